#pragma once

#include <string>
#include <vector>

#include "pacmarl/mdp.hpp"
#include "pacmarl/protocol.hpp"

namespace pacmarl {

/// Everything the PAC calculators consume. sigma bounds the Bellman-operator
/// variance (user-supplied in general; bellman_sigma computes it exactly on
/// a known desk-scale MDP); sigma_c / delta_q_c describe the per-agent fused
/// noise.
struct PacParams {
    int num_agents = 1;
    int num_states = 1;
    int num_actions = 1;
    double gamma = 0.98;
    double delta = 0.1;
    int k = 12;
    int k_m = 3;
    double eps_a = 1e-7;
    double eps_s = 1.0;
    double sigma = 0.0;
    double sigma_r = 0.0;
    std::vector<double> sigma_c;   // one per agent
    std::vector<double> delta_q_c; // one per agent
    double q_max = 50.0;

    long sa() const { return static_cast<long>(num_states) * num_actions; }
    void validate() const;
};

/// ceil(1 + log2(k / k_m)), the ladder-length term shared by the formulas.
long ladder_term(double ratio);

/// f = sqrt(2 ln(24 N ceil(1 + log2(k/k_m)) (SA)^3 / delta)).
double compute_f(const PacParams& p);

/// k_m = ceil(5.6 ln(8 N ceil(1 + log2(ratio)) (SA)^2 / delta)); the caller
/// supplies the ratio k/k_m, which breaks the formula's self-reference.
int compute_km(const PacParams& p, double ratio);

/// eps_b = 2 sqrt(k_m (sigma^2 + sigma_r^2)).
double compute_eps_b(const PacParams& p);

/// Minimal admissible sample-set capacity:
/// ceil(eps_b^2 / ((1-gamma)^2 eps_s^2)).
long compute_k_min(const PacParams& p);

/// T_H = ceil(ln(q_max / eps_s) / (1 - gamma)).
long compute_t_h(const PacParams& p);

/// Per-agent suboptimality floor:
/// (2 eps_a + 2(1+3 gamma)(delta_q_c + sigma_c f)) / (1-gamma) + 3 eps_s.
std::vector<double> compute_eps_eff(const PacParams& p, double f);

/// Explicit (pre-asymptotic) bound on the total cost of exploration:
/// SA (1 + log2 T_H) T_H
///   * (q_max (2 k_m + N ceil(3 + log2(k/k_m)))
///      + (18 sqrt(k) + 10 N) sqrt(8 k_m (sigma^2 + sigma_r^2))).
double compute_tce_bound(const PacParams& p);

struct PacReport {
    double f_value = 0.0;
    double eps_b = 0.0;
    long k_min = 0;
    long t_h = 0;
    int km_suggested = 0;
    std::vector<double> eps_eff;
    double tce_bound = 0.0;
};

PacReport make_pac_report(const PacParams& p);

/// Flat key=value block, one line per quantity.
std::string format_pac_report(const PacReport& report);

/// Exact standard deviation of the one-step Bellman target
/// R(s,a,s') + gamma * Q(s', pi_Q(s')) under p(.|s,a), maximized over (s,a).
double bellman_sigma(const Mdp& mdp, const QTable& q);

/// Realized total cost of exploration of a trace: for every agent step,
/// max(0, V*(s_t) - V^pi_t(s_t) - eps) where pi_t is the committed greedy
/// policy in force at step t, evaluated exactly on the MDP.
double empirical_tce(const Trace& trace, const Mdp& mdp, const QTable& q_star, double eps);

} // namespace pacmarl
