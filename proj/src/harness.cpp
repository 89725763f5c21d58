#include "pacmarl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>

namespace pacmarl {

void ExperimentConfig::validate() const {
    if (grid_side < 2) throw ConfigError("config: side must be >= 2");
    if (num_agents < 1) throw ConfigError("config: agents must be >= 1");
    if (episodes < 1 || steps_per_episode < 0)
        throw ConfigError("config: episodes >= 1 and steps >= 0 required");
    if (replications < 1) throw ConfigError("config: replications must be >= 1");
    if (sigma_l2 < 0.0 || sigma_a2 < 0.0 || sigma_r < 0.0 || delta_q_l < 0.0 || delta_q_a < 0.0)
        throw ConfigError("config: noise parameters must be >= 0");
    if (pac_delta <= 0.0 || pac_delta >= 1.0) throw ConfigError("config: pac-delta in (0,1)");
    if (pac_eps_s <= 0.0) throw ConfigError("config: pac-eps-s must be > 0");
    try {
        bellman_config().validate();
        comm_graph().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

CommGraph ExperimentConfig::comm_graph() const {
    switch (graph) {
        case GraphKind::full: return CommGraph::full(num_agents);
        case GraphKind::regular: return CommGraph::regular(num_agents, graph_degree);
        case GraphKind::edges: return CommGraph::from_edges(num_agents, graph_edges);
    }
    throw ConfigError("config: unknown graph kind");
}

ChannelSet ExperimentConfig::channel_set() const {
    return ChannelSet::identical(num_agents, std::sqrt(sigma_l2), std::sqrt(sigma_a2), sigma_r,
                                 delta_q_l, delta_q_a);
}

BellmanConfig ExperimentConfig::bellman_config() const {
    BellmanConfig b;
    b.eps_b = eps_b;
    b.eps_a = eps_a;
    b.max_sweeps = max_sweeps;
    b.mode = mode;
    b.gamma = gamma;
    b.k = k;
    b.k_m = k_m;
    return b;
}

SchemeSpec ExperimentConfig::scheme_spec() const {
    SchemeSpec spec;
    spec.kind = scheme;
    spec.adaptive_degree_corrected = adaptive_degree_corrected;
    if (scheme == Scheme::optimal_quantization) {
        PacParams p;
        p.num_agents = num_agents;
        p.num_states = grid_side * grid_side;
        p.num_actions = GridWorld::kNumActions;
        p.k = k;
        p.k_m = k_m;
        p.delta = pac_delta;
        spec.quantization_f = compute_f(p);
    }
    return spec;
}

ReplicationOutput run_replication(const ExperimentConfig& cfg, int rep_index, bool keep_trace) {
    const uint64_t rep_seed = cfg.base_seed + static_cast<uint64_t>(rep_index);
    const GridWorld grid = cfg.grid();
    auto env = std::make_shared<const GridEnvironment>(grid);

    Trace trace;
    SystemState sys = make_system(env, cfg.comm_graph(), cfg.channel_set(), cfg.scheme_spec(),
                                  cfg.bellman_config(), cfg.q_max(), rep_seed, &trace);

    ReplicationOutput out;
    out.episode_agent_reward.assign(cfg.episodes,
                                    std::vector<double>(cfg.num_agents, 0.0));

    for (int e = 0; e < cfg.episodes; ++e) {
        reset_agent_positions(sys);
        const size_t first = trace.records.size();
        run_steps(sys, cfg.steps_per_episode, &trace);
        for (size_t r = first; r < trace.records.size(); ++r)
            out.episode_agent_reward[e][trace.records[r].agent_id] += trace.records[r].reward;
    }

    if (cfg.include_oracle_agent) {
        const Mdp mdp = grid.to_mdp(cfg.gamma);
        const QTable q_star = exact_value_iteration(mdp, 1e-10).q;
        Rng oracle_rng(derive_seed(rep_seed, 5ULL << 32));
        out.oracle_episode_reward.assign(cfg.episodes, 0.0);
        for (int e = 0; e < cfg.episodes; ++e) {
            int state = std::uniform_int_distribution<int>(0, grid.num_states() - 1)(oracle_rng);
            for (int step = 0; step < cfg.steps_per_episode; ++step) {
                const int action = greedy_action(q_star, state);
                const int next = grid.step(state, action);
                out.oracle_episode_reward[e] += grid.landing_reward(next);
                state = next == grid.goal()
                            ? std::uniform_int_distribution<int>(0, grid.num_states() - 1)(
                                  oracle_rng)
                            : next;
            }
        }
    }

    if (keep_trace) out.trace = std::move(trace);
    return out;
}

std::vector<EpisodeMetrics> aggregate_metrics(const ExperimentConfig& cfg,
                                              const std::vector<ReplicationOutput>& outputs) {
    std::vector<EpisodeMetrics> metrics(cfg.episodes);
    for (int e = 0; e < cfg.episodes; ++e) {
        double sum = 0.0;
        long n = 0;
        for (const ReplicationOutput& rep : outputs)
            for (double r : rep.episode_agent_reward[e]) {
                sum += r;
                ++n;
            }
        const double mean = sum / static_cast<double>(n);
        double ss = 0.0;
        for (const ReplicationOutput& rep : outputs)
            for (double r : rep.episode_agent_reward[e]) ss += (r - mean) * (r - mean);
        const double stddev = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;

        double oracle = std::numeric_limits<double>::quiet_NaN();
        if (cfg.include_oracle_agent) {
            double osum = 0.0;
            for (const ReplicationOutput& rep : outputs) osum += rep.oracle_episode_reward[e];
            oracle = osum / static_cast<double>(outputs.size());
        }
        metrics[e] = {e + 1, mean, stddev, oracle};
    }
    return metrics;
}

std::vector<EpisodeMetrics> run_experiment(const ExperimentConfig& cfg, bool parallel) {
    cfg.validate();
    std::vector<ReplicationOutput> outputs(cfg.replications);
    std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (int r = 0; r < cfg.replications; ++r) {
        try {
            outputs[r] = run_replication(cfg, r, false);
        } catch (...) {
#pragma omp critical
            failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return aggregate_metrics(cfg, outputs);
}

void emit_csv(const std::vector<EpisodeMetrics>& metrics, const std::string& path) {
    if (metrics.empty()) throw ConfigError("emit_csv: no metrics to write");
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("emit_csv: cannot open '" + path + "' for writing");
    std::fprintf(f, "episode,mean_reward,std_reward,oracle_mean\n");
    for (const EpisodeMetrics& m : metrics)
        std::fprintf(f, "%d,%.10g,%.10g,%.10g\n", m.episode, m.mean_reward, m.std_reward,
                     m.oracle_mean);
    std::fclose(f);
}

PacParams pac_params_for(const ExperimentConfig& cfg) {
    PacParams p;
    p.num_agents = cfg.num_agents;
    p.num_states = cfg.grid_side * cfg.grid_side;
    p.num_actions = GridWorld::kNumActions;
    p.gamma = cfg.gamma;
    p.delta = cfg.pac_delta;
    p.k = cfg.k;
    p.k_m = cfg.k_m;
    p.eps_a = cfg.eps_a;
    p.eps_s = cfg.pac_eps_s;
    p.sigma_r = cfg.sigma_r;
    p.q_max = cfg.q_max();

    const Mdp mdp = cfg.grid().to_mdp(cfg.gamma);
    const QTable q_star = exact_value_iteration(mdp, 1e-10).q;
    p.sigma = bellman_sigma(mdp, q_star);

    const CommGraph graph = cfg.comm_graph();
    const ChannelSet channels = cfg.channel_set();
    const SchemeSpec spec = cfg.scheme_spec();
    for (int i = 0; i < cfg.num_agents; ++i) {
        const std::vector<int> nbrs = graph.neighbors(i);
        const WeightVector w = scheme_weights(spec, channels, i, nbrs);
        std::vector<double> sigma_a, dq_l, dq_a;
        for (int j : nbrs) {
            sigma_a.push_back(channels.agent_to_agent[j][i].sigma);
            dq_l.push_back(channels.learner_to_agent[j].delta_q);
            dq_a.push_back(channels.agent_to_agent[j][i].delta_q);
        }
        p.sigma_c.push_back(additive_sigma_c(channels.learner_to_agent[i].sigma, sigma_a, w));
        p.delta_q_c.push_back(
            quantization_bound(channels.learner_to_agent[i].delta_q, dq_l, dq_a, w));
    }
    return p;
}

std::vector<SurfacePoint> three_agent_surface(const std::vector<double>& ratios1,
                                              const std::vector<double>& ratios2) {
    std::vector<SurfacePoint> rows;
    rows.reserve(ratios1.size() * ratios2.size());
    for (double r1 : ratios1) {
        for (double r2 : ratios2) {
            const WeightVector w =
                optimal_additive_weights(1.0, {std::sqrt(r1), std::sqrt(r2)});
            rows.push_back({r1, r2, 1, w.self_weight,
                            w.neighbor_weights[0] / w.neighbor_weights[1]});
        }
    }
    return rows;
}

std::vector<SurfacePoint> two_group_surface(const std::vector<double>& ratios1,
                                            const std::vector<int>& group_sizes) {
    std::vector<SurfacePoint> rows;
    rows.reserve(ratios1.size() * group_sizes.size());
    for (double r1 : ratios1) {
        for (int n_a : group_sizes) {
            std::vector<double> sigma_a(static_cast<size_t>(2 * n_a), 1.0);
            for (int j = 0; j < n_a; ++j) sigma_a[j] = std::sqrt(r1);
            const WeightVector w = optimal_additive_weights(1.0, sigma_a);
            rows.push_back({r1, 1.0, n_a, w.self_weight,
                            w.neighbor_weights[0] / w.neighbor_weights[n_a]});
        }
    }
    return rows;
}

void emit_surface_csv(const std::vector<SurfacePoint>& rows, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("emit_surface_csv: cannot open '" + path + "' for writing");
    std::fprintf(f, "ratio_a1,ratio_a2,group_size,w_self,weight_ratio\n");
    for (const SurfacePoint& r : rows)
        std::fprintf(f, "%.10g,%.10g,%d,%.10g,%.10g\n", r.ratio_a1, r.ratio_a2, r.group_size,
                     r.w_self, r.weight_ratio);
    std::fclose(f);
}

Scheme parse_scheme(const std::string& name) {
    if (name == "learner_only") return Scheme::learner_only;
    if (name == "uniform") return Scheme::uniform;
    if (name == "optimal") return Scheme::optimal;
    if (name == "optimal_quantization") return Scheme::optimal_quantization;
    if (name == "adaptive") return Scheme::adaptive;
    throw ConfigError("config: unknown scheme '" + name + "'");
}

SampleMode parse_mode(const std::string& name) {
    if (name == "replace") return SampleMode::replace;
    if (name == "accumulate") return SampleMode::accumulate;
    throw ConfigError("config: unknown sample mode '" + name + "'");
}

GraphKind parse_graph_kind(const std::string& name) {
    if (name == "full") return GraphKind::full;
    if (name == "regular") return GraphKind::regular;
    if (name == "edges") return GraphKind::edges;
    throw ConfigError("config: unknown graph kind '" + name + "'");
}

std::vector<std::pair<int, int>> parse_edge_list(const std::string& text) {
    std::vector<std::pair<int, int>> edges;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const size_t dash = item.find('-');
        if (dash == std::string::npos)
            throw ConfigError("config: edge list entries look like 'i-j'");
        try {
            edges.emplace_back(std::stoi(item.substr(0, dash)), std::stoi(item.substr(dash + 1)));
        } catch (const std::exception&) {
            throw ConfigError("config: bad edge '" + item + "'");
        }
    }
    return edges;
}

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

} // namespace

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot read '" + path + "'");
    ExperimentConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#' || t[0] == '[') continue; // sections are organizational
        const size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: line " + std::to_string(line_no) + " is not key=value");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            if (key == "side") cfg.grid_side = std::stoi(value);
            else if (key == "agents") cfg.num_agents = std::stoi(value);
            else if (key == "graph") cfg.graph = parse_graph_kind(value);
            else if (key == "graph-degree") cfg.graph_degree = std::stoi(value);
            else if (key == "graph-edges") cfg.graph_edges = parse_edge_list(value);
            else if (key == "sigma-l2") cfg.sigma_l2 = std::stod(value);
            else if (key == "sigma-a2") cfg.sigma_a2 = std::stod(value);
            else if (key == "sigma-r") cfg.sigma_r = std::stod(value);
            else if (key == "delta-q-l") cfg.delta_q_l = std::stod(value);
            else if (key == "delta-q-a") cfg.delta_q_a = std::stod(value);
            else if (key == "scheme") cfg.scheme = parse_scheme(value);
            else if (key == "adaptive-degree-corrected")
                cfg.adaptive_degree_corrected = parse_bool(value, key);
            else if (key == "k") cfg.k = std::stoi(value);
            else if (key == "k-m") cfg.k_m = std::stoi(value);
            else if (key == "eps-a") cfg.eps_a = std::stod(value);
            else if (key == "eps-b") cfg.eps_b = std::stod(value);
            else if (key == "gamma") cfg.gamma = std::stod(value);
            else if (key == "max-sweeps") cfg.max_sweeps = std::stoi(value);
            else if (key == "mode") cfg.mode = parse_mode(value);
            else if (key == "episodes") cfg.episodes = std::stoi(value);
            else if (key == "steps") cfg.steps_per_episode = std::stoi(value);
            else if (key == "replications") cfg.replications = std::stoi(value);
            else if (key == "seed") cfg.base_seed = std::stoull(value);
            else if (key == "oracle") cfg.include_oracle_agent = parse_bool(value, key);
            else if (key == "pac-delta") cfg.pac_delta = std::stod(value);
            else if (key == "pac-eps-s") cfg.pac_eps_s = std::stod(value);
            else throw ConfigError("config: unknown key '" + key + "'");
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError("config: bad value for key '" + key + "': '" + value + "'");
        }
    }
    return cfg;
}

} // namespace pacmarl
