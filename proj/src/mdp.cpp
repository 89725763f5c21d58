#include "pacmarl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pacmarl/linalg.hpp"

namespace pacmarl {

void Mdp::validate() const {
    if (num_states <= 0 || num_actions <= 0)
        throw std::invalid_argument("Mdp: state and action counts must be positive");
    if (discount < 0.0 || discount >= 1.0)
        throw std::invalid_argument("Mdp: discount must lie in [0, 1)");
    if (r_max < 0.0) throw std::invalid_argument("Mdp: r_max must be >= 0");
    for (int s = 0; s < num_states; ++s) {
        for (int a = 0; a < num_actions; ++a) {
            double total = 0.0;
            for (int s2 = 0; s2 < num_states; ++s2) {
                const double p = prob(s, a, s2);
                if (p < 0.0) throw std::invalid_argument("Mdp: negative transition probability");
                const double r = rew(s, a, s2);
                if (r < 0.0 || r > r_max)
                    throw std::invalid_argument("Mdp: reward outside [0, r_max]");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-12)
                throw std::invalid_argument("Mdp: transition row does not sum to 1");
        }
    }
}

int GridWorld::step(int s, int action) const {
    int r = row(s);
    int c = col(s);
    switch (action) {
        case 0: r = (r + 1) % side; break;        // up
        case 1: r = (r + side - 1) % side; break; // down
        case 2: c = (c + side - 1) % side; break; // left
        case 3: c = (c + 1) % side; break;        // right
        default: throw std::invalid_argument("GridWorld::step: action out of range");
    }
    return state(r, c);
}

Mdp GridWorld::to_mdp(double gamma) const {
    const int s_count = num_states();
    Mdp mdp(s_count, kNumActions, gamma, 1.0);
    const double uniform = 1.0 / s_count;
    for (int s = 0; s < s_count; ++s) {
        for (int a = 0; a < kNumActions; ++a) {
            const int next = step(s, a);
            if (next == goal()) {
                for (int s2 = 0; s2 < s_count; ++s2) {
                    mdp.prob(s, a, s2) = uniform;
                    mdp.rew(s, a, s2) = 1.0;
                }
            } else {
                mdp.prob(s, a, next) = 1.0;
            }
        }
    }
    return mdp;
}

QTable saturate(QTable q) {
    for (double& v : q.values) v = std::clamp(v, 0.0, q.q_max);
    return q;
}

int greedy_action(const QTable& q, int state) {
    int best = 0;
    double best_value = q(state, 0);
    for (int a = 1; a < q.num_actions; ++a) {
        if (q(state, a) > best_value) {
            best_value = q(state, a);
            best = a;
        }
    }
    return best;
}

std::vector<double> state_values(const QTable& q) {
    std::vector<double> v(q.num_states);
    for (int s = 0; s < q.num_states; ++s) v[s] = q(s, greedy_action(q, s));
    return v;
}

std::vector<int> greedy_policy(const QTable& q) {
    std::vector<int> pi(q.num_states);
    for (int s = 0; s < q.num_states; ++s) pi[s] = greedy_action(q, s);
    return pi;
}

ValueIterationResult exact_value_iteration(const Mdp& mdp, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("exact_value_iteration: tol must be > 0");
    const double q_max = mdp.q_max();
    const int cap = static_cast<int>(
        std::ceil(std::log(std::max(q_max, tol) / tol) / (1.0 - mdp.discount))) + 1;

    QTable q(mdp.num_states, mdp.num_actions, q_max, 0.0);
    QTable next = q;
    int sweeps = 0;
    for (; sweeps < cap; ++sweeps) {
        const std::vector<double> v = state_values(q);
        double residual = 0.0;
        for (int s = 0; s < mdp.num_states; ++s) {
            for (int a = 0; a < mdp.num_actions; ++a) {
                double backup = 0.0;
                for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                    const double p = mdp.prob(s, a, s2);
                    if (p == 0.0) continue;
                    backup += p * (mdp.rew(s, a, s2) + mdp.discount * v[s2]);
                }
                residual = std::max(residual, std::abs(backup - q(s, a)));
                next(s, a) = backup;
            }
        }
        std::swap(q, next);
        if (residual <= tol) {
            ++sweeps;
            break;
        }
    }
    return {std::move(q), sweeps};
}

std::vector<double> policy_value(const Mdp& mdp, const std::vector<int>& policy) {
    const int n = mdp.num_states;
    if (static_cast<int>(policy.size()) != n)
        throw std::invalid_argument("policy_value: policy size mismatch");
    std::vector<double> a(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> b(n, 0.0);
    for (int s = 0; s < n; ++s) {
        const int act = policy[s];
        a[static_cast<size_t>(s) * n + s] = 1.0;
        for (int s2 = 0; s2 < n; ++s2) {
            const double p = mdp.prob(s, act, s2);
            if (p == 0.0) continue;
            a[static_cast<size_t>(s) * n + s2] -= mdp.discount * p;
            b[s] += p * mdp.rew(s, act, s2);
        }
    }
    return solve_linear(std::move(a), std::move(b));
}

} // namespace pacmarl
