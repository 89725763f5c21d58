#include "pacmarl/weighting.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pacmarl/linalg.hpp"

namespace pacmarl {

double WeightVector::sum() const {
    double total = self_weight;
    for (double w : neighbor_weights) total += w;
    return total;
}

void WeightVector::validate() const {
    if (std::abs(sum() - 1.0) > 1e-10)
        throw std::invalid_argument("WeightVector: weights must sum to 1");
}

WeightVector WeightVector::learner_only(int d) {
    return {1.0, std::vector<double>(static_cast<size_t>(d), 0.0)};
}

WeightVector WeightVector::uniform(int d) {
    const double w = 1.0 / (d + 1);
    return {w, std::vector<double>(static_cast<size_t>(d), w)};
}

QTable fuse(const QTable& q_learner, const std::vector<QTable>& q_neighbors,
            const WeightVector& w) {
    if (q_neighbors.size() != w.neighbor_weights.size())
        throw std::invalid_argument("fuse: neighbor table count does not match weights");
    w.validate();
    QTable out = q_learner;
    for (double& v : out.values) v *= w.self_weight;
    for (size_t j = 0; j < q_neighbors.size(); ++j) {
        const double wj = w.neighbor_weights[j];
        const QTable& qn = q_neighbors[j];
        if (qn.values.size() != out.values.size())
            throw std::invalid_argument("fuse: neighbor table shape mismatch");
        for (size_t i = 0; i < out.values.size(); ++i) out.values[i] += wj * qn.values[i];
    }
    return saturate(std::move(out));
}

double additive_sigma_c(double sigma_l, const std::vector<double>& sigma_a,
                        const WeightVector& w) {
    assert(sigma_a.size() == w.neighbor_weights.size());
    double var = w.self_weight * w.self_weight * sigma_l * sigma_l;
    for (size_t j = 0; j < sigma_a.size(); ++j) {
        const double wj = w.neighbor_weights[j];
        var += wj * wj * (sigma_l * sigma_l + sigma_a[j] * sigma_a[j]);
    }
    return std::sqrt(var);
}

WeightVector optimal_additive_weights(double sigma_l, const std::vector<double>& sigma_a) {
    if (sigma_l <= 0.0)
        throw std::invalid_argument("optimal_additive_weights: sigma_l must be > 0");
    const int d = static_cast<int>(sigma_a.size());
    if (d == 0) return WeightVector::learner_only(0);

    const double sl2 = 2.0 * sigma_l * sigma_l;
    std::vector<double> a(static_cast<size_t>(d) * d, sl2);
    for (int j = 0; j < d; ++j)
        a[static_cast<size_t>(j) * d + j] += sl2 + 2.0 * sigma_a[j] * sigma_a[j];
    std::vector<double> b(static_cast<size_t>(d), sl2);

    WeightVector w;
    w.neighbor_weights = solve_linear(std::move(a), std::move(b));
    double total = 0.0;
    for (double wj : w.neighbor_weights) total += wj;
    w.self_weight = 1.0 - total;
    return w;
}

WeightVector identical_case_weights(double sigma_l, double sigma_a, int d) {
    if (sigma_l <= 0.0)
        throw std::invalid_argument("identical_case_weights: sigma_l must be > 0");
    if (d < 0) throw std::invalid_argument("identical_case_weights: d must be >= 0");
    if (d == 0) return WeightVector::learner_only(0);
    const double sl2 = sigma_l * sigma_l;
    const double sa2 = sigma_a * sigma_a;
    WeightVector w;
    w.self_weight = (sl2 + sa2) / ((d + 1) * sl2 + sa2);
    w.neighbor_weights.assign(static_cast<size_t>(d), (1.0 - w.self_weight) / d);
    return w;
}

bool uniform_vs_learner_only(double sigma_l, double sigma_a, int d) {
    if (sigma_l <= 0.0)
        throw std::invalid_argument("uniform_vs_learner_only: sigma_l must be > 0");
    // With no neighbors the uniform average is the learner copy itself.
    if (d == 0) return true;
    return d + 1 >= (sigma_a * sigma_a) / (sigma_l * sigma_l);
}

double quantization_g(double sigma_l, double f, double delta_q, int d, double w_self) {
    assert(d >= 1);
    const double rest = 1.0 - w_self;
    return sigma_l * f * std::sqrt(w_self * w_self + 2.0 * rest * rest / d) +
           delta_q * (std::abs(w_self) + 2.0 * std::abs(rest));
}

WeightVector quantization_weights(double sigma_l, double delta_q, int d, double f) {
    if (sigma_l <= 0.0 || f <= 0.0)
        throw std::invalid_argument("quantization_weights: sigma_l and f must be > 0");
    if (d < 0) throw std::invalid_argument("quantization_weights: d must be >= 0");
    if (d == 0) return WeightVector::learner_only(0);

    double w_self;
    if (f * sigma_l <= delta_q) {
        w_self = 1.0;
    } else if (delta_q == 0.0) {
        w_self = 2.0 / (d + 2); // pure additive limit: identical-channel optimum with sigma_a = sigma_l
    } else {
        // Stationary point of g on [2/(d+2), 1]: the radicand is
        // 2 (d+2) (sigma_l f / delta_q)^2 - 2d, which is positive whenever
        // f sigma_l > delta_q.
        const double ratio = sigma_l * f / delta_q;
        const double radicand = 2.0 * (d + 2) * ratio * ratio - 2.0 * d;
        w_self = 2.0 / (d + 2) * (1.0 + d / std::sqrt(radicand));
    }
    WeightVector w;
    w.self_weight = w_self;
    w.neighbor_weights.assign(static_cast<size_t>(d), (1.0 - w_self) / d);
    return w;
}

double quantization_bound(double dq_self, const std::vector<double>& dq_learner,
                          const std::vector<double>& dq_relay, const WeightVector& w) {
    assert(dq_learner.size() == w.neighbor_weights.size());
    assert(dq_relay.size() == w.neighbor_weights.size());
    double bound = dq_self * std::abs(w.self_weight);
    for (size_t j = 0; j < dq_learner.size(); ++j)
        bound += (dq_learner[j] + dq_relay[j]) * std::abs(w.neighbor_weights[j]);
    return bound;
}

namespace {

double oracle_objective(WeightObjective objective, const OracleParams& p,
                        const std::vector<double>& w) {
    if (objective == WeightObjective::additive) {
        double total = 0.0;
        double var = 0.0;
        for (size_t j = 0; j < w.size(); ++j) {
            total += w[j];
            var += w[j] * w[j] * (p.sigma_l * p.sigma_l + p.sigma_a[j] * p.sigma_a[j]);
        }
        const double self = 1.0 - total;
        return var + self * self * p.sigma_l * p.sigma_l;
    }
    return quantization_g(p.sigma_l, p.f, p.delta_q, p.d, w[0]);
}

// Full grid over [lo_i, hi_i]^d at the given step; returns the best point.
std::vector<double> grid_minimize(WeightObjective objective, const OracleParams& p,
                                  std::vector<double> lo, std::vector<double> hi,
                                  double step) {
    const int d = static_cast<int>(lo.size());
    std::vector<long> counts(d);
    for (int i = 0; i < d; ++i)
        counts[i] = std::lround((hi[i] - lo[i]) / step) + 1;
    std::vector<long> index(d, 0);
    std::vector<double> point(d), best_point(d);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        for (int i = 0; i < d; ++i)
            point[i] = std::min(hi[i], lo[i] + step * index[i]);
        const double value = oracle_objective(objective, p, point);
        if (value < best) {
            best = value;
            best_point = point;
        }
        int carry = d - 1;
        while (carry >= 0 && ++index[carry] >= counts[carry]) {
            index[carry] = 0;
            --carry;
        }
        if (carry < 0) break;
    }
    return best_point;
}

std::vector<double> refine(WeightObjective objective, const OracleParams& p,
                           std::vector<double> center, double step, double refine_step) {
    const int d = static_cast<int>(center.size());
    while (step > refine_step) {
        const double next_step = std::max(refine_step, step / 10.0);
        std::vector<double> lo(d), hi(d);
        for (int i = 0; i < d; ++i) {
            lo[i] = std::max(0.0, center[i] - 2.0 * step);
            hi[i] = std::min(1.0, center[i] + 2.0 * step);
        }
        center = grid_minimize(objective, p, lo, hi, next_step);
        step = next_step;
    }
    return center;
}

// Scans coordinate i of w over [0, 1] with the others frozen, then shrinks
// the winning cell until the step reaches refine_step.
double line_minimize(WeightObjective objective, const OracleParams& p,
                     std::vector<double>& w, int i, double step, double refine_step) {
    double lo = 0.0, hi = 1.0;
    double best_wi = w[i];
    while (true) {
        double best = std::numeric_limits<double>::infinity();
        const long count = std::lround((hi - lo) / step) + 1;
        for (long n = 0; n < count; ++n) {
            w[i] = std::min(hi, lo + step * n);
            const double value = oracle_objective(objective, p, w);
            if (value < best) {
                best = value;
                best_wi = w[i];
            }
        }
        if (step <= refine_step) break;
        lo = std::max(0.0, best_wi - 2.0 * step);
        hi = std::min(1.0, best_wi + 2.0 * step);
        step = std::max(refine_step, step / 10.0);
    }
    w[i] = best_wi;
    return best_wi;
}

std::vector<double> coordinate_descent(WeightObjective objective, const OracleParams& p,
                                       int d, double step, double refine_step) {
    std::vector<double> w(static_cast<size_t>(d), 1.0 / (d + 1));
    for (int pass = 0; pass < 60; ++pass) {
        double moved = 0.0;
        for (int i = 0; i < d; ++i) {
            const double before = w[i];
            line_minimize(objective, p, w, i, step, refine_step);
            moved = std::max(moved, std::abs(w[i] - before));
        }
        if (moved < refine_step) break;
    }
    return w;
}

} // namespace

WeightVector brute_force_weight_oracle(WeightObjective objective, const OracleParams& params,
                                       double grid_step, double refine_step) {
    const int d = objective == WeightObjective::additive
                      ? static_cast<int>(params.sigma_a.size())
                      : 1; // quantization objective is one-dimensional in w_self
    if (d == 0) return WeightVector::learner_only(0);

    // A full grid at the requested step is only tractable in one dimension;
    // higher dimensions start coarse and refine, or fall back to coordinate
    // descent past d = 3.
    std::vector<double> point;
    if (d == 1) {
        point = grid_minimize(objective, params, {0.0}, {1.0}, grid_step);
        point = refine(objective, params, point, grid_step, refine_step);
    } else if (d <= 3) {
        const double coarse = std::max(grid_step, d == 2 ? 5e-3 : 2e-2);
        point = grid_minimize(objective, params,
                              std::vector<double>(d, 0.0), std::vector<double>(d, 1.0),
                              coarse);
        point = refine(objective, params, point, coarse, refine_step);
    } else {
        point = coordinate_descent(objective, params, d, std::max(grid_step, 1e-3),
                                   refine_step);
    }

    WeightVector w;
    if (objective == WeightObjective::additive) {
        w.neighbor_weights = point;
        double total = 0.0;
        for (double wj : point) total += wj;
        w.self_weight = 1.0 - total;
    } else {
        w.self_weight = point[0];
        w.neighbor_weights.assign(static_cast<size_t>(params.d),
                                  (1.0 - point[0]) / params.d);
    }
    return w;
}

AdaptiveUpdate adaptive_weight_update(NoiseEstimate est, const QTable& q_true,
                                      const QTable& q_learner_noisy,
                                      const std::vector<QTable>& q_neighbors_noisy,
                                      bool degree_corrected) {
    const int d = static_cast<int>(q_neighbors_noisy.size());

    WeightVector w;
    const double denom = degree_corrected ? d * est.sigma_l_sq + est.sigma_la_sq
                                          : est.sigma_l_sq + est.sigma_la_sq;
    if (est.t == 0 || denom <= 0.0 || d == 0) {
        w = WeightVector::uniform(d);
    } else {
        w.self_weight = est.sigma_la_sq / denom;
        w.neighbor_weights.assign(static_cast<size_t>(d), (1.0 - w.self_weight) / d);
    }

    const size_t entries = q_true.values.size();
    assert(q_learner_noisy.values.size() == entries);
    double learner_ss = 0.0;
    for (size_t i = 0; i < entries; ++i) {
        const double r = q_learner_noisy.values[i] - q_true.values[i];
        learner_ss += r * r;
    }
    est.t += 1;
    const double batch_l = entries > 1 ? learner_ss / static_cast<double>(entries - 1) : 0.0;
    est.sigma_l_sq += (batch_l - est.sigma_l_sq) / static_cast<double>(est.t);

    if (d > 0) {
        double relay_ss = 0.0;
        for (const QTable& qn : q_neighbors_noisy) {
            assert(qn.values.size() == entries);
            for (size_t i = 0; i < entries; ++i) {
                const double r = qn.values[i] - q_true.values[i];
                relay_ss += r * r;
            }
        }
        const size_t count = entries * static_cast<size_t>(d);
        const double batch_la = count > 1 ? relay_ss / static_cast<double>(count - 1) : 0.0;
        est.sigma_la_sq += (batch_la - est.sigma_la_sq) / static_cast<double>(est.t);
    }

    return {est, std::move(w)};
}

} // namespace pacmarl
