#pragma once

#include <vector>

namespace pacmarl {

/// Dense Q-table over (state, action). Entries are meaningful on [0, q_max];
/// saturate() clamps them there.
struct QTable {
    int num_states = 0;
    int num_actions = 0;
    double q_max = 0.0;
    std::vector<double> values;

    QTable() = default;
    QTable(int s, int a, double q_max_, double init = 0.0)
        : num_states(s), num_actions(a), q_max(q_max_),
          values(static_cast<size_t>(s) * a, init) {}

    double& operator()(int s, int a) { return values[static_cast<size_t>(s) * num_actions + a]; }
    double operator()(int s, int a) const { return values[static_cast<size_t>(s) * num_actions + a]; }

    bool operator==(const QTable& other) const = default;
};

/// Tabular MDP with dense transition and reward tensors, indexed
/// [s * A * S + a * S + s'].
struct Mdp {
    int num_states = 0;
    int num_actions = 0;
    std::vector<double> transition; // p(s'|s,a), each (s,a) row sums to 1
    std::vector<double> reward;     // R(s,a,s') in [0, r_max]
    double discount = 0.0;
    double r_max = 0.0;

    Mdp() = default;
    Mdp(int s, int a, double gamma, double r_max_)
        : num_states(s), num_actions(a),
          transition(static_cast<size_t>(s) * a * s, 0.0),
          reward(static_cast<size_t>(s) * a * s, 0.0),
          discount(gamma), r_max(r_max_) {}

    size_t idx(int s, int a, int s2) const {
        return (static_cast<size_t>(s) * num_actions + a) * num_states + s2;
    }
    double prob(int s, int a, int s2) const { return transition[idx(s, a, s2)]; }
    double& prob(int s, int a, int s2) { return transition[idx(s, a, s2)]; }
    double rew(int s, int a, int s2) const { return reward[idx(s, a, s2)]; }
    double& rew(int s, int a, int s2) { return reward[idx(s, a, s2)]; }

    double q_max() const { return r_max / (1.0 - discount); }

    /// Throws std::invalid_argument if a transition row does not sum to 1
    /// within 1e-12 or a reward falls outside [0, r_max].
    void validate() const;
};

/// Wrap-around square grid with a single rewarding corner. Landing on the
/// goal pays 1 and resets the walker; the reset is an environment event, not
/// part of the transition reported to a learner.
struct GridWorld {
    int side = 5;

    static constexpr int kNumActions = 4; // up, down, left, right

    int num_states() const { return side * side; }
    int goal() const { return side * side - 1; } // top-right, row 0 at bottom

    int row(int s) const { return s / side; }
    int col(int s) const { return s % side; }
    int state(int r, int c) const { return r * side + c; }

    /// Deterministic wrap-around move.
    int step(int s, int action) const;

    double landing_reward(int next_state) const { return next_state == goal() ? 1.0 : 0.0; }

    /// The grid as an MDP with the goal reset folded into the dynamics:
    /// entering the goal pays 1 and transitions uniformly over all states.
    Mdp to_mdp(double gamma) const;
};

/// Entrywise clamp to [0, q_max]. Idempotent and monotone.
QTable saturate(QTable q);

/// Argmax over actions at `state`; ties broken toward the lowest index.
int greedy_action(const QTable& q, int state);

/// V(s) = max_a Q(s,a) for every state.
std::vector<double> state_values(const QTable& q);

/// Greedy policy over the whole table.
std::vector<int> greedy_policy(const QTable& q);

struct ValueIterationResult {
    QTable q;
    int sweeps = 0;
};

/// Exact synchronous value iteration to sup-norm Bellman residual <= tol.
/// The operator is a gamma-contraction so ceil(ln(q_max/tol)/(1-gamma))
/// sweeps always suffice; iteration stops early once the residual drops.
ValueIterationResult exact_value_iteration(const Mdp& mdp, double tol);

/// Exact evaluation of a stationary deterministic policy: solves
/// (I - gamma * P_pi) v = r_pi by dense elimination.
std::vector<double> policy_value(const Mdp& mdp, const std::vector<int>& policy);

} // namespace pacmarl
