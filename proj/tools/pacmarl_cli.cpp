// Command-line front end: `run` produces the episode CSV for one experiment,
// `weights` tabulates optimal fusion weights, `bounds` prints the PAC
// calculator report, `sweep` batches several config files.
//
// Exit codes: 0 success, 2 configuration error, 3 I/O error.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pacmarl/harness.hpp"

using namespace pacmarl;

namespace {

struct RunOverrides {
    std::string config_path;
    std::string out_path = "experiment.csv";
    bool serial = false;

    ExperimentConfig cfg; // receives direct flag values
};

void add_run_options(CLI::App* cmd, RunOverrides& r) {
    cmd->add_option("--config", r.config_path, "config file (key=value lines)");
    cmd->add_option("--out", r.out_path, "output CSV path")->capture_default_str();
    cmd->add_flag("--serial", r.serial, "run replications serially");

    cmd->add_option("--seed", r.cfg.base_seed, "base seed");
    cmd->add_option("--scheme", [&r](const std::vector<std::string>& v) {
        r.cfg.scheme = parse_scheme(v.back());
        return true;
    }, "learner_only|uniform|optimal|optimal_quantization|adaptive");
    cmd->add_option("--sigma-l2", r.cfg.sigma_l2, "learner-agent noise variance");
    cmd->add_option("--sigma-a2", r.cfg.sigma_a2, "agent-agent noise variance");
    cmd->add_option("--sigma-r", r.cfg.sigma_r, "reward noise scale");
    cmd->add_option("--delta-q", [&r](const std::vector<std::string>& v) {
        r.cfg.delta_q_l = r.cfg.delta_q_a = std::stod(v.back());
        return true;
    }, "quantization half-width for both hop kinds");
    cmd->add_option("--delta-q-l", r.cfg.delta_q_l, "learner-hop quantization");
    cmd->add_option("--delta-q-a", r.cfg.delta_q_a, "relay-hop quantization");
    cmd->add_option("--replications", r.cfg.replications, "parallel experiments");
    cmd->add_option("--episodes", r.cfg.episodes, "episodes per replication");
    cmd->add_option("--steps", r.cfg.steps_per_episode, "steps per episode");
    cmd->add_option("--agents", r.cfg.num_agents, "agent count");
    cmd->add_option("--side", r.cfg.grid_side, "grid side length");
    cmd->add_option("--gamma", r.cfg.gamma, "discount factor");
    cmd->add_option("--k", r.cfg.k, "sample-set capacity");
    cmd->add_option("--k-m", r.cfg.k_m, "median group count");
    cmd->add_option("--eps-a", r.cfg.eps_a, "value-iteration slack");
    cmd->add_option("--eps-b", r.cfg.eps_b, "UCB scale");
    cmd->add_option("--max-sweeps", r.cfg.max_sweeps, "VI sweep cap");
    cmd->add_option("--mode", [&r](const std::vector<std::string>& v) {
        r.cfg.mode = parse_mode(v.back());
        return true;
    }, "replace|accumulate");
    cmd->add_option("--graph", [&r](const std::vector<std::string>& v) {
        r.cfg.graph = parse_graph_kind(v.back());
        return true;
    }, "full|regular|edges");
    cmd->add_option("--graph-degree", r.cfg.graph_degree, "degree for regular graphs");
    cmd->add_option("--graph-edges", [&r](const std::vector<std::string>& v) {
        r.cfg.graph_edges = parse_edge_list(v.back());
        return true;
    }, "edge list, e.g. 0-1,1-2");
    cmd->add_option("--oracle", r.cfg.include_oracle_agent, "simulate the oracle agent");
    cmd->add_option("--pac-delta", r.cfg.pac_delta, "failure probability for reports");
    cmd->add_option("--pac-eps-s", r.cfg.pac_eps_s, "finite-sample slack for reports");
    cmd->add_option("--adaptive-degree-corrected", r.cfg.adaptive_degree_corrected,
                    "degree-corrected adaptive weights");
}

// Direct flags win over the config file: re-parsing the tracked options after
// loading the file would lose callback state, so overrides are applied by
// replaying the flag values kept in r.cfg.
ExperimentConfig resolve_config(const RunOverrides& r, const CLI::App* cmd) {
    if (r.config_path.empty()) return r.cfg;
    ExperimentConfig cfg = load_config_file(r.config_path);
    const ExperimentConfig& direct = r.cfg;
    auto passed = [&](const char* name) { return cmd->count(name) > 0; };
    if (passed("--seed")) cfg.base_seed = direct.base_seed;
    if (passed("--scheme")) cfg.scheme = direct.scheme;
    if (passed("--sigma-l2")) cfg.sigma_l2 = direct.sigma_l2;
    if (passed("--sigma-a2")) cfg.sigma_a2 = direct.sigma_a2;
    if (passed("--sigma-r")) cfg.sigma_r = direct.sigma_r;
    if (passed("--delta-q")) {
        cfg.delta_q_l = direct.delta_q_l;
        cfg.delta_q_a = direct.delta_q_a;
    }
    if (passed("--delta-q-l")) cfg.delta_q_l = direct.delta_q_l;
    if (passed("--delta-q-a")) cfg.delta_q_a = direct.delta_q_a;
    if (passed("--replications")) cfg.replications = direct.replications;
    if (passed("--episodes")) cfg.episodes = direct.episodes;
    if (passed("--steps")) cfg.steps_per_episode = direct.steps_per_episode;
    if (passed("--agents")) cfg.num_agents = direct.num_agents;
    if (passed("--side")) cfg.grid_side = direct.grid_side;
    if (passed("--gamma")) cfg.gamma = direct.gamma;
    if (passed("--k")) cfg.k = direct.k;
    if (passed("--k-m")) cfg.k_m = direct.k_m;
    if (passed("--eps-a")) cfg.eps_a = direct.eps_a;
    if (passed("--eps-b")) cfg.eps_b = direct.eps_b;
    if (passed("--max-sweeps")) cfg.max_sweeps = direct.max_sweeps;
    if (passed("--mode")) cfg.mode = direct.mode;
    if (passed("--graph")) cfg.graph = direct.graph;
    if (passed("--graph-degree")) cfg.graph_degree = direct.graph_degree;
    if (passed("--graph-edges")) cfg.graph_edges = direct.graph_edges;
    if (passed("--oracle")) cfg.include_oracle_agent = direct.include_oracle_agent;
    if (passed("--pac-delta")) cfg.pac_delta = direct.pac_delta;
    if (passed("--pac-eps-s")) cfg.pac_eps_s = direct.pac_eps_s;
    if (passed("--adaptive-degree-corrected"))
        cfg.adaptive_degree_corrected = direct.adaptive_degree_corrected;
    return cfg;
}

std::vector<double> linear_grid(double lo, double hi, int steps) {
    std::vector<double> out;
    if (steps <= 1) {
        out.push_back(lo);
        return out;
    }
    for (int i = 0; i < steps; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / (steps - 1));
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cooperative multi-agent PAC RL under noisy communication"};
    app.require_subcommand(1);

    // run
    RunOverrides run;
    CLI::App* run_cmd = app.add_subcommand("run", "run one experiment and emit the episode CSV");
    add_run_options(run_cmd, run);

    // weights
    std::string surface = "three-agent";
    double ratio_min = 0.0, ratio_max = 10.0;
    int ratio_steps = 21, na_max = 5;
    std::string weights_out = "weights.csv";
    CLI::App* weights_cmd =
        app.add_subcommand("weights", "tabulate optimal fusion weight surfaces");
    weights_cmd->add_option("--surface", surface, "three-agent|two-group")
        ->capture_default_str();
    weights_cmd->add_option("--ratio-min", ratio_min, "smallest noise-variance ratio")
        ->capture_default_str();
    weights_cmd->add_option("--ratio-max", ratio_max, "largest noise-variance ratio")
        ->capture_default_str();
    weights_cmd->add_option("--ratio-steps", ratio_steps, "grid points per axis")
        ->capture_default_str();
    weights_cmd->add_option("--na-max", na_max, "largest group size (two-group surface)")
        ->capture_default_str();
    weights_cmd->add_option("--out", weights_out, "output CSV path")->capture_default_str();

    // bounds
    PacParams pac;
    std::vector<double> sigma_c_in, delta_q_c_in;
    std::string bounds_config;
    CLI::App* bounds_cmd = app.add_subcommand("bounds", "print the PAC calculator report");
    bounds_cmd->add_option("--config", bounds_config,
                           "derive the parameters from an experiment config");
    bounds_cmd->add_option("--agents", pac.num_agents)->capture_default_str();
    bounds_cmd->add_option("--states", pac.num_states)->capture_default_str();
    bounds_cmd->add_option("--actions", pac.num_actions)->capture_default_str();
    bounds_cmd->add_option("--gamma", pac.gamma)->capture_default_str();
    bounds_cmd->add_option("--delta", pac.delta)->capture_default_str();
    bounds_cmd->add_option("--k", pac.k)->capture_default_str();
    bounds_cmd->add_option("--k-m", pac.k_m)->capture_default_str();
    bounds_cmd->add_option("--eps-a", pac.eps_a)->capture_default_str();
    bounds_cmd->add_option("--eps-s", pac.eps_s)->capture_default_str();
    bounds_cmd->add_option("--sigma", pac.sigma, "Bellman-operator variance bound")
        ->capture_default_str();
    bounds_cmd->add_option("--sigma-r", pac.sigma_r)->capture_default_str();
    bounds_cmd->add_option("--sigma-c", sigma_c_in, "fused noise scale, one value or per agent");
    bounds_cmd->add_option("--delta-q-c", delta_q_c_in,
                           "fused quantization bound, one value or per agent");
    bounds_cmd->add_option("--q-max", pac.q_max)->capture_default_str();

    // sweep
    std::vector<std::string> sweep_configs;
    std::string out_dir = ".";
    bool sweep_serial = false;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "run a batch of config files");
    sweep_cmd->add_option("configs", sweep_configs, "config files to run")->required();
    sweep_cmd->add_option("--out-dir", out_dir, "directory for the CSVs")
        ->capture_default_str();
    sweep_cmd->add_flag("--serial", sweep_serial, "run replications serially");

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 2;
        }

        if (*run_cmd) {
            ExperimentConfig cfg = resolve_config(run, run_cmd);
            cfg.validate();
            const std::vector<EpisodeMetrics> metrics = run_experiment(cfg, !run.serial);
            emit_csv(metrics, run.out_path);
            std::printf("wrote %s (final episode mean %.6g, std %.6g)\n", run.out_path.c_str(),
                        metrics.back().mean_reward, metrics.back().std_reward);
        } else if (*weights_cmd) {
            const std::vector<double> ratios = linear_grid(ratio_min, ratio_max, ratio_steps);
            std::vector<SurfacePoint> rows;
            if (surface == "three-agent") {
                rows = three_agent_surface(ratios, ratios);
            } else if (surface == "two-group") {
                std::vector<int> sizes;
                for (int n = 1; n <= na_max; ++n) sizes.push_back(n);
                rows = two_group_surface(ratios, sizes);
            } else {
                throw ConfigError("weights: unknown surface '" + surface + "'");
            }
            emit_surface_csv(rows, weights_out);
            std::printf("wrote %s (%zu rows)\n", weights_out.c_str(), rows.size());
        } else if (*bounds_cmd) {
            if (!bounds_config.empty()) {
                ExperimentConfig cfg = load_config_file(bounds_config);
                cfg.validate();
                pac = pac_params_for(cfg);
            } else {
                auto spread = [&](std::vector<double> in) {
                    if (in.empty()) in.push_back(0.0);
                    while (static_cast<int>(in.size()) < pac.num_agents)
                        in.push_back(in.back());
                    return in;
                };
                pac.sigma_c = spread(sigma_c_in);
                pac.delta_q_c = spread(delta_q_c_in);
            }
            pac.validate();
            std::fputs(format_pac_report(make_pac_report(pac)).c_str(), stdout);
        } else if (*sweep_cmd) {
            std::filesystem::create_directories(out_dir);
            for (const std::string& path : sweep_configs) {
                ExperimentConfig cfg = load_config_file(path);
                cfg.validate();
                const std::string stem = std::filesystem::path(path).stem().string();
                const std::string out = (std::filesystem::path(out_dir) / (stem + ".csv")).string();
                emit_csv(run_experiment(cfg, !sweep_serial), out);
                std::printf("wrote %s\n", out.c_str());
            }
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
