#include "pacmarl/sampling.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace pacmarl {

namespace {

bool is_power_of_two(long v) { return v > 0 && (v & (v - 1)) == 0; }

// |pending| = 2^p * k_m for some integer p >= 0
bool on_doubling_ladder(size_t count, int k_m) {
    if (count == 0 || count % static_cast<size_t>(k_m) != 0) return false;
    return is_power_of_two(static_cast<long>(count) / k_m);
}

double sample_target(const QTable& q, const Sample& s, double gamma) {
    double best = q(s.next_state, 0);
    for (int a = 1; a < q.num_actions; ++a) best = std::max(best, q(s.next_state, a));
    return s.noisy_reward + gamma * best;
}

} // namespace

void BellmanConfig::validate() const {
    if (eps_a <= 0.0) throw std::invalid_argument("BellmanConfig: eps_a must be > 0");
    if (eps_b < 0.0) throw std::invalid_argument("BellmanConfig: eps_b must be >= 0");
    if (max_sweeps < 1) throw std::invalid_argument("BellmanConfig: max_sweeps must be >= 1");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("BellmanConfig: gamma in [0,1)");
    if (k_m < 1 || k < k_m || k % k_m != 0)
        throw std::invalid_argument("BellmanConfig: k must be a positive multiple of k_m");
    if (mode == SampleMode::replace && !is_power_of_two(k / k_m))
        throw std::invalid_argument("BellmanConfig: replace mode needs k/k_m a power of two");
}

size_t SampleSetTable::total_samples() const {
    size_t n = 0;
    for (const SampleSet& u : sets) n += u.active.size() + u.pending.size();
    return n;
}

double group_mean(const QTable& q, const SampleSet& u, int j, const BellmanConfig& cfg) {
    const size_t n = u.active.size();
    assert(n > 0 && n % static_cast<size_t>(cfg.k_m) == 0);
    assert(j >= 1 && j <= cfg.k_m);
    const size_t block = n / cfg.k_m;
    const size_t begin = static_cast<size_t>(j - 1) * block;
    double sum = 0.0;
    for (size_t l = begin; l < begin + block; ++l)
        sum += sample_target(q, u.active[l], cfg.gamma);
    return sum / static_cast<double>(block);
}

double median_of_means(const QTable& q, const SampleSet& u, const BellmanConfig& cfg) {
    const size_t n = u.active.size();
    assert(n > 0);
    constexpr int kStackGroups = 64;
    double stack_means[kStackGroups];
    std::vector<double> heap_means;
    double* means = stack_means;
    if (cfg.k_m > kStackGroups) {
        heap_means.resize(cfg.k_m);
        means = heap_means.data();
    }
    for (int j = 1; j <= cfg.k_m; ++j) means[j - 1] = group_mean(q, u, j, cfg);
    std::sort(means, means + cfg.k_m);
    const int mid = cfg.k_m / 2;
    const double median =
        (cfg.k_m % 2 == 1) ? means[mid] : 0.5 * (means[mid - 1] + means[mid]);
    return cfg.eps_b / std::sqrt(static_cast<double>(n)) + median;
}

double approx_bellman(const QTable& q, const SampleSet& u, const BellmanConfig& cfg) {
    if (u.active.empty()) return q.q_max;
    return std::clamp(median_of_means(q, u, cfg), 0.0, q.q_max);
}

ValueIterationResult value_iteration(QTable q, const SampleSetTable& sets,
                                     const BellmanConfig& cfg) {
    QTable next = q;
    int sweeps = 0;
    const size_t entries = q.values.size();
    while (sweeps < cfg.max_sweeps) {
        double residual = 0.0;
#pragma omp parallel for reduction(max : residual) if (entries >= 4096)
        for (long i = 0; i < static_cast<long>(entries); ++i) {
            const int s = static_cast<int>(i) / q.num_actions;
            const int a = static_cast<int>(i) % q.num_actions;
            const double backed = approx_bellman(q, sets.at(s, a), cfg);
            residual = std::max(residual, std::abs(backed - q.values[i]));
            next.values[i] = backed;
        }
        std::swap(q, next);
        ++sweeps;
        if (residual <= cfg.eps_a) break;
    }
    return {std::move(q), sweeps};
}

bool ingest_sample(SampleSetTable& sets, const Sample& s, const BellmanConfig& cfg) {
    SampleSet& u = sets.at(s.state, s.action);
    if (u.active.size() >= static_cast<size_t>(cfg.k)) return false;
    u.pending.push_back(s);
    if (u.pending.size() > u.active.size() && on_doubling_ladder(u.pending.size(), cfg.k_m)) {
        if (cfg.mode == SampleMode::replace) {
            u.active = std::move(u.pending);
        } else {
            u.active.insert(u.active.end(), u.pending.begin(), u.pending.end());
            if (u.active.size() > static_cast<size_t>(cfg.k))
                u.active.erase(u.active.begin(),
                               u.active.end() - static_cast<size_t>(cfg.k));
        }
        u.pending.clear();
        return true;
    }
    return false;
}

} // namespace pacmarl
