#pragma once

#include <vector>

#include "pacmarl/mdp.hpp"

namespace pacmarl {

/// Convex fusion coefficients for one agent: its own learner copy plus one
/// weight per neighbor relay. Must sum to 1 within 1e-10.
struct WeightVector {
    double self_weight = 1.0;
    std::vector<double> neighbor_weights;

    double sum() const;
    void validate() const;

    static WeightVector learner_only(int d);
    static WeightVector uniform(int d);
};

/// Entrywise weighted sum of the learner copy and the neighbor relays,
/// saturated to [0, q_max].
QTable fuse(const QTable& q_learner, const std::vector<QTable>& q_neighbors,
            const WeightVector& w);

/// Equivalent additive scale sigma_c(w) of the fused noise:
/// sqrt( sum_j w_j^2 (sigma_l^2 + sigma_a_j^2) + w_self^2 sigma_l^2 ).
double additive_sigma_c(double sigma_l, const std::vector<double>& sigma_a,
                        const WeightVector& w);

/// Optimal weights for heterogeneous neighbor noise: solves the d x d system
/// A w = b with A = 2 sigma_l^2 (J + I) + 2 diag(sigma_a_j^2) and
/// b = 2 sigma_l^2 1, then w_self = 1 - sum w_j. A is symmetric positive
/// definite for sigma_l > 0 so the solve is well posed.
WeightVector optimal_additive_weights(double sigma_l, const std::vector<double>& sigma_a);

/// Closed form for d identical neighbors:
/// w_self = (sigma_l^2 + sigma_a^2) / ((d+1) sigma_l^2 + sigma_a^2),
/// neighbors share the remainder equally.
WeightVector identical_case_weights(double sigma_l, double sigma_a, int d);

/// True iff uniform averaging beats using the learner copy alone,
/// i.e. d + 1 >= sigma_a^2 / sigma_l^2.
bool uniform_vs_learner_only(double sigma_l, double sigma_a, int d);

/// Objective traded off by the identical-parameter quantization case:
/// g(w) = sigma_l f sqrt(w^2 + 2(1-w)^2/d) + delta_q (|w| + 2|1-w|).
double quantization_g(double sigma_l, double f, double delta_q, int d, double w_self);

/// Optimal self weight under identical quantized channels. w_self = 1 when
/// f * sigma_l <= delta_q; otherwise the interior minimizer of g, lying in
/// [2/(d+2), 1]. Neighbors share the remainder equally.
WeightVector quantization_weights(double sigma_l, double delta_q, int d, double f);

/// Worst-case quantization half-width of a fused table:
/// dq_self |w_self| + sum_j (dq_learner_j + dq_relay_j) |w_j|.
double quantization_bound(double dq_self, const std::vector<double>& dq_learner,
                          const std::vector<double>& dq_relay, const WeightVector& w);

enum class WeightObjective { additive, quantization };

/// Grid/coordinate-descent parameters of the quantization objective;
/// only sigma_l and d matter for the additive objective.
struct OracleParams {
    double sigma_l = 1.0;
    std::vector<double> sigma_a; // additive objective, one entry per neighbor
    double f = 1.0;              // quantization objective
    double delta_q = 0.0;        // quantization objective
    int d = 0;                   // quantization objective neighbor count
};

/// Test oracle: minimizes the requested objective by multiresolution grid
/// search (full grid for d <= 3, cyclic coordinate descent above), refining
/// the winning cell until the step reaches refine_step.
WeightVector brute_force_weight_oracle(WeightObjective objective, const OracleParams& params,
                                       double grid_step, double refine_step);

/// Running variance estimates of the learner and relay channels, updated
/// once per broadcast from observed residuals.
struct NoiseEstimate {
    double sigma_l_sq = 0.0;
    double sigma_la_sq = 0.0; // estimates sigma_l^2 + sigma_a^2
    long t = 0;
};

struct AdaptiveUpdate {
    NoiseEstimate estimate;
    WeightVector weights;
};

/// One adaptive step: weights come from the previous estimates
/// (w_self = sigma_la^2 / (sigma_la^2 + sigma_l^2), neighbors equal), then
/// the estimates absorb this broadcast's batch residual variances with step
/// 1/t. Before any update, or when both estimates are zero, weights are
/// uniform. `degree_corrected` switches to
/// w_self = sigma_la^2 / (d sigma_l^2 + sigma_la^2).
AdaptiveUpdate adaptive_weight_update(NoiseEstimate est, const QTable& q_true,
                                      const QTable& q_learner_noisy,
                                      const std::vector<QTable>& q_neighbors_noisy,
                                      bool degree_corrected = false);

} // namespace pacmarl
