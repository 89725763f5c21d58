#include "pacmarl/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace pacmarl {

void PacParams::validate() const {
    if (num_agents < 1 || num_states < 1 || num_actions < 1)
        throw std::invalid_argument("PacParams: counts must be positive");
    if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("PacParams: gamma in [0,1)");
    if (delta <= 0.0 || delta >= 1.0)
        throw std::invalid_argument("PacParams: delta must lie in (0,1)");
    if (k_m < 1 || k < k_m) throw std::invalid_argument("PacParams: need k >= k_m >= 1");
    if (eps_a <= 0.0 || eps_s <= 0.0)
        throw std::invalid_argument("PacParams: eps_a and eps_s must be > 0");
    if (sigma < 0.0 || sigma_r < 0.0)
        throw std::invalid_argument("PacParams: noise scales must be >= 0");
    if (q_max <= 0.0) throw std::invalid_argument("PacParams: q_max must be > 0");
}

long ladder_term(double ratio) {
    if (ratio < 1.0) throw std::invalid_argument("ladder_term: ratio must be >= 1");
    return static_cast<long>(std::ceil(1.0 + std::log2(ratio)));
}

double compute_f(const PacParams& p) {
    const double sa = static_cast<double>(p.sa());
    const double arg = 24.0 * p.num_agents *
                       static_cast<double>(ladder_term(static_cast<double>(p.k) / p.k_m)) *
                       sa * sa * sa / p.delta;
    if (arg <= 1.0) throw std::invalid_argument("compute_f: log argument must exceed 1");
    return std::sqrt(2.0 * std::log(arg));
}

int compute_km(const PacParams& p, double ratio) {
    const double sa = static_cast<double>(p.sa());
    const double arg =
        8.0 * p.num_agents * static_cast<double>(ladder_term(ratio)) * sa * sa / p.delta;
    return static_cast<int>(std::ceil(5.6 * std::log(arg)));
}

double compute_eps_b(const PacParams& p) {
    return 2.0 * std::sqrt(p.k_m * (p.sigma * p.sigma + p.sigma_r * p.sigma_r));
}

long compute_k_min(const PacParams& p) {
    const double eps_b = compute_eps_b(p);
    const double denom = (1.0 - p.gamma) * (1.0 - p.gamma) * p.eps_s * p.eps_s;
    return static_cast<long>(std::ceil(eps_b * eps_b / denom));
}

long compute_t_h(const PacParams& p) {
    return static_cast<long>(std::ceil(std::log(p.q_max / p.eps_s) / (1.0 - p.gamma)));
}

std::vector<double> compute_eps_eff(const PacParams& p, double f) {
    std::vector<double> out;
    const size_t n = std::max(p.sigma_c.size(), static_cast<size_t>(p.num_agents));
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const double sigma_c = i < p.sigma_c.size() ? p.sigma_c[i] : 0.0;
        const double dq_c = i < p.delta_q_c.size() ? p.delta_q_c[i] : 0.0;
        const double eff = (2.0 * p.eps_a + 2.0 * (1.0 + 3.0 * p.gamma) * (dq_c + sigma_c * f)) /
                               (1.0 - p.gamma) +
                           3.0 * p.eps_s;
        out.push_back(eff);
    }
    return out;
}

double compute_tce_bound(const PacParams& p) {
    const double sa = static_cast<double>(p.sa());
    const double t_h = static_cast<double>(compute_t_h(p));
    const double horizon_factor = sa * (1.0 + std::log2(t_h)) * t_h;
    const double ladder3 =
        std::ceil(3.0 + std::log2(static_cast<double>(p.k) / p.k_m));
    const double q_term = p.q_max * (2.0 * p.k_m + p.num_agents * ladder3);
    const double noise_term =
        (18.0 * std::sqrt(static_cast<double>(p.k)) + 10.0 * p.num_agents) *
        std::sqrt(8.0 * p.k_m * (p.sigma * p.sigma + p.sigma_r * p.sigma_r));
    return horizon_factor * (q_term + noise_term);
}

PacReport make_pac_report(const PacParams& p) {
    p.validate();
    PacReport report;
    report.f_value = compute_f(p);
    report.eps_b = compute_eps_b(p);
    report.k_min = compute_k_min(p);
    report.t_h = compute_t_h(p);
    report.km_suggested = compute_km(p, static_cast<double>(p.k) / p.k_m);
    report.eps_eff = compute_eps_eff(p, report.f_value);
    report.tce_bound = compute_tce_bound(p);
    return report;
}

std::string format_pac_report(const PacReport& report) {
    char line[128];
    std::string out;
    auto emit = [&](const char* key, double value) {
        std::snprintf(line, sizeof(line), "%s=%.10g\n", key, value);
        out += line;
    };
    emit("f", report.f_value);
    emit("eps_b", report.eps_b);
    emit("k_min", static_cast<double>(report.k_min));
    emit("t_h", static_cast<double>(report.t_h));
    emit("km_suggested", static_cast<double>(report.km_suggested));
    for (size_t i = 0; i < report.eps_eff.size(); ++i) {
        std::snprintf(line, sizeof(line), "eps_eff_%zu=%.10g\n", i, report.eps_eff[i]);
        out += line;
    }
    emit("tce_bound", report.tce_bound);
    return out;
}

double bellman_sigma(const Mdp& mdp, const QTable& q) {
    const std::vector<int> pi = greedy_policy(q);
    double worst = 0.0;
    for (int s = 0; s < mdp.num_states; ++s) {
        for (int a = 0; a < mdp.num_actions; ++a) {
            double mean = 0.0;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                const double p = mdp.prob(s, a, s2);
                if (p == 0.0) continue;
                mean += p * (mdp.rew(s, a, s2) + mdp.discount * q(s2, pi[s2]));
            }
            double var = 0.0;
            for (int s2 = 0; s2 < mdp.num_states; ++s2) {
                const double p = mdp.prob(s, a, s2);
                if (p == 0.0) continue;
                const double target = mdp.rew(s, a, s2) + mdp.discount * q(s2, pi[s2]);
                var += p * (target - mean) * (target - mean);
            }
            worst = std::max(worst, var);
        }
    }
    return std::sqrt(worst);
}

double empirical_tce(const Trace& trace, const Mdp& mdp, const QTable& q_star, double eps) {
    const std::vector<double> v_star = state_values(q_star);

    // Per-agent committed-policy timeline, plus a cache of exact policy
    // evaluations keyed by the policy itself.
    std::map<int, std::vector<const PolicySegment*>> timeline;
    for (const PolicySegment& seg : trace.segments) timeline[seg.agent_id].push_back(&seg);
    std::map<std::vector<int>, std::vector<double>> value_cache;

    auto values_for = [&](const std::vector<int>& policy) -> const std::vector<double>& {
        auto it = value_cache.find(policy);
        if (it == value_cache.end())
            it = value_cache.emplace(policy, policy_value(mdp, policy)).first;
        return it->second;
    };

    double tce = 0.0;
    for (const TraceRecord& rec : trace.records) {
        const auto& segs = timeline[rec.agent_id];
        const PolicySegment* active = nullptr;
        for (const PolicySegment* seg : segs) {
            if (seg->from_step <= rec.step) active = seg;
            else break;
        }
        if (!active) continue; // no committed policy yet
        const std::vector<double>& v_pi = values_for(active->policy);
        const double gap = v_star[rec.state] - v_pi[rec.state] - eps;
        if (gap > 0.0) tce += gap;
    }
    return tce;
}

} // namespace pacmarl
