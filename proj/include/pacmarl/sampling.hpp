#pragma once

#include <vector>

#include "pacmarl/mdp.hpp"

namespace pacmarl {

/// One tuple collected by an agent. The reward is the noisy value that
/// crossed the agent-to-learner channel and may fall outside [0, r_max].
struct Sample {
    int state = 0;
    int action = 0;
    double noisy_reward = 0.0;
    int next_state = 0;
    int agent_id = 0;
    long time = 0;
};

enum class SampleMode { replace, accumulate };

/// Knobs of the approximate Bellman machinery. k is the sample-set capacity,
/// k_m the number of median groups; k must be a multiple of k_m and, in
/// replace mode, k/k_m must be a power of two so the doubling ladder tops out
/// exactly at k.
struct BellmanConfig {
    double eps_b = 0.1;  // UCB scale added as eps_b / sqrt(|u|)
    double eps_a = 1e-7; // value-iteration residual slack
    int max_sweeps = 30;
    SampleMode mode = SampleMode::replace;
    double gamma = 0.98;
    int k = 12;
    int k_m = 3;

    void validate() const;
};

/// Sample buffer for one state-action: `active` feeds the Bellman estimate,
/// `pending` collects fresh samples until a swap condition is met.
struct SampleSet {
    std::vector<Sample> active;
    std::vector<Sample> pending;
};

struct SampleSetTable {
    int num_states = 0;
    int num_actions = 0;
    std::vector<SampleSet> sets;

    SampleSetTable() = default;
    SampleSetTable(int s, int a)
        : num_states(s), num_actions(a), sets(static_cast<size_t>(s) * a) {}

    SampleSet& at(int s, int a) { return sets[static_cast<size_t>(s) * num_actions + a]; }
    const SampleSet& at(int s, int a) const { return sets[static_cast<size_t>(s) * num_actions + a]; }

    size_t total_samples() const;
};

/// Mean of noisy_reward + gamma * max_a' q(next, a') over the j-th (1-based)
/// contiguous block of |active| / k_m samples. Requires a non-empty active
/// set whose size divides into k_m equal blocks.
double group_mean(const QTable& q, const SampleSet& u, int j, const BellmanConfig& cfg);

/// eps_b / sqrt(|active|) plus the median of the k_m group means; an even
/// group count takes the mean of the two middle values.
double median_of_means(const QTable& q, const SampleSet& u, const BellmanConfig& cfg);

/// Saturated median-of-means estimate; q.q_max when the active set is empty.
double approx_bellman(const QTable& q, const SampleSet& u, const BellmanConfig& cfg);

/// Synchronous sweeps q <- B~q until the sup-norm residual drops to eps_a or
/// max_sweeps is hit. Returns the new table and the sweep count.
ValueIterationResult value_iteration(QTable q, const SampleSetTable& sets,
                                     const BellmanConfig& cfg);

/// Routes one sample through the pending/active discipline. Returns true
/// exactly when the active set was refreshed (an update the learner must
/// publish). Samples for a full active set are discarded.
bool ingest_sample(SampleSetTable& sets, const Sample& s, const BellmanConfig& cfg);

} // namespace pacmarl
