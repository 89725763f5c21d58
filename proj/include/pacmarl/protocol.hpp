#pragma once

#include <memory>
#include <vector>

#include "pacmarl/channels.hpp"
#include "pacmarl/mdp.hpp"
#include "pacmarl/sampling.hpp"
#include "pacmarl/weighting.hpp"

namespace pacmarl {

/// World the agents act in. `step` reports both the next state carried by
/// the transmitted sample and the agent's position afterwards; the two
/// differ only on reset events (landing on a grid goal), which are
/// environment-level and invisible to the learner.
class Environment {
public:
    virtual ~Environment() = default;
    virtual int num_states() const = 0;
    virtual int num_actions() const = 0;

    struct Outcome {
        int sample_next_state = 0;
        double reward = 0.0;
        int new_position = 0;
    };
    virtual Outcome step(int state, int action, Rng& rng) const = 0;

    int random_state(Rng& rng) const {
        return std::uniform_int_distribution<int>(0, num_states() - 1)(rng);
    }
};

/// Generic tabular MDP environment with sampled transitions.
class MdpEnvironment : public Environment {
public:
    explicit MdpEnvironment(Mdp mdp) : mdp_(std::move(mdp)) {}
    int num_states() const override { return mdp_.num_states; }
    int num_actions() const override { return mdp_.num_actions; }
    Outcome step(int state, int action, Rng& rng) const override;
    const Mdp& mdp() const { return mdp_; }

private:
    Mdp mdp_;
};

/// Deterministic wrap-around grid; landing on the goal pays 1 and teleports
/// the agent uniformly at random.
class GridEnvironment : public Environment {
public:
    explicit GridEnvironment(GridWorld grid) : grid_(grid) {}
    int num_states() const override { return grid_.num_states(); }
    int num_actions() const override { return GridWorld::kNumActions; }
    Outcome step(int state, int action, Rng& rng) const override;
    const GridWorld& grid() const { return grid_; }

private:
    GridWorld grid_;
};

enum class Scheme { learner_only, uniform, optimal, optimal_quantization, adaptive };

/// Fusion scheme selection. The quantization scheme needs the PAC factor f
/// of the target run; the adaptive scheme can optionally fold the graph
/// degree into its weight formula.
struct SchemeSpec {
    Scheme kind = Scheme::uniform;
    double quantization_f = 1.0;
    bool adaptive_degree_corrected = false;
};

struct AgentState {
    int id = 0;
    int state = 0;
    QTable fused_q; // always saturated
    NoiseEstimate noise_est;
};

struct LearnerState {
    QTable q;
    SampleSetTable sample_sets;
    std::vector<Sample> inbox;
    bool update_flag = false;
};

/// Per-link channel parameters. agent_to_agent[j][i] governs the relay from
/// agent j to agent i and is consulted only for graph edges.
struct ChannelSet {
    std::vector<ChannelSpec> learner_to_agent;
    std::vector<std::vector<ChannelSpec>> agent_to_agent;
    std::vector<ChannelSpec> reward;

    /// Identical links everywhere, the usual grid-world experiment setting.
    static ChannelSet identical(int n, double sigma_l, double sigma_a, double sigma_r,
                                double delta_q_l = 0.0, double delta_q_a = 0.0);
};

struct TraceRecord {
    long step = 0;
    int agent_id = 0;
    int state = 0;
    int action = 0;
    double reward = 0.0; // true, pre-noise reward
    bool broadcast_flag = false;
    int vi_sweeps = 0;

    bool operator==(const TraceRecord&) const = default;
};

/// Committed greedy policy of one agent, in force from `from_step` until the
/// next segment for the same agent.
struct PolicySegment {
    long from_step = 0;
    int agent_id = 0;
    std::vector<int> policy;
};

struct Trace {
    std::vector<TraceRecord> records;
    std::vector<PolicySegment> segments;
};

struct SystemState {
    std::shared_ptr<const Environment> env;
    CommGraph graph;
    ChannelSet channels;
    SchemeSpec scheme;
    std::vector<WeightVector> weights; // per agent; fixed except under adaptive
    BellmanConfig bellman;
    LearnerState learner;
    std::vector<AgentState> agents;
    long time = 0;
    long broadcast_count = 0; // update-triggered broadcasts, initial excluded

    std::vector<Rng> learner_rng;              // per agent
    std::vector<Rng> reward_rng;               // per agent
    std::vector<Rng> env_rng;                  // per agent
    std::vector<std::vector<Rng>> relay_rng;   // [from][to]

    int num_agents() const { return static_cast<int>(agents.size()); }
};

/// Fusion weights one agent would use under a scheme, given its channel
/// parameters and neighbor list. The adaptive scheme reports its uniform
/// starting weights.
WeightVector scheme_weights(const SchemeSpec& scheme, const ChannelSet& channels, int agent,
                            const std::vector<int>& neighbors);

/// Builds a fully initialized system: Q at q_max everywhere, agents placed
/// uniformly at random, and the initial (noisy) broadcast performed.
SystemState make_system(std::shared_ptr<const Environment> env, const CommGraph& graph,
                        const ChannelSet& channels, const SchemeSpec& scheme,
                        const BellmanConfig& bellman, double q_max, uint64_t seed,
                        Trace* trace = nullptr);

/// Publishes the learner's table: fresh learner-hop copies for every agent,
/// relay copies along every edge, fusion per the configured scheme.
void broadcast(SystemState& sys, Trace* trace = nullptr);

/// One agent acts greedily on its fused table, the environment advances, and
/// the sample (with reward noise) lands in the learner's inbox. Returns the
/// transmitted sample; the trace record carries the true reward.
Sample agent_step(SystemState& sys, int agent_id, Trace* trace = nullptr);

struct LearnerStepResult {
    bool broadcasted = false;
    int vi_sweeps = 0;
};

/// Drains the inbox through the sample-set discipline; value-iterates and
/// re-broadcasts only if some active set changed.
LearnerStepResult learner_step(SystemState& sys, Trace* trace = nullptr);

/// Advances `num_steps` ticks: all agents act, then the learner ingests.
void run_steps(SystemState& sys, long num_steps, Trace* trace = nullptr);

/// Re-places every agent uniformly at random (episode boundary).
void reset_agent_positions(SystemState& sys);

} // namespace pacmarl
