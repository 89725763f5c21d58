#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "pacmarl/bounds.hpp"
#include "pacmarl/protocol.hpp"

namespace pacmarl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GraphKind { full, regular, edges };

/// Declarative description of one experiment. Defaults reproduce the
/// weak-noise grid-world run (4 fully connected agents, 150 replications of
/// 10 episodes x 50 steps).
struct ExperimentConfig {
    int grid_side = 5;
    int num_agents = 4;
    GraphKind graph = GraphKind::full;
    int graph_degree = 0;
    std::vector<std::pair<int, int>> graph_edges;

    double sigma_l2 = 0.1; // learner-to-agent noise variance
    double sigma_a2 = 0.1; // agent-to-agent relay noise variance
    double sigma_r = 0.0;
    double delta_q_l = 0.0;
    double delta_q_a = 0.0;

    Scheme scheme = Scheme::uniform;
    bool adaptive_degree_corrected = false;

    int k = 9;
    int k_m = 3;
    double eps_a = 1e-7;
    double eps_b = 0.1;
    double gamma = 0.98;
    int max_sweeps = 30;
    SampleMode mode = SampleMode::accumulate;

    int episodes = 10;
    int steps_per_episode = 50;
    int replications = 150;
    uint64_t base_seed = 1;
    bool include_oracle_agent = true;

    double pac_delta = 0.1; // failure probability for the f factor and reports
    double pac_eps_s = 1.0; // finite-sample slack for the PAC report

    void validate() const; // throws ConfigError

    GridWorld grid() const { return GridWorld{grid_side}; }
    CommGraph comm_graph() const;
    ChannelSet channel_set() const;
    BellmanConfig bellman_config() const;
    SchemeSpec scheme_spec() const;
    double q_max() const { return 1.0 / (1.0 - gamma); }
};

struct EpisodeMetrics {
    int episode = 0;          // 1-based
    double mean_reward = 0.0; // over replications x agents
    double std_reward = 0.0;  // sample std over replications x agents
    double oracle_mean = 0.0; // NaN when the oracle agent is disabled
};

struct ReplicationOutput {
    std::vector<std::vector<double>> episode_agent_reward; // [episode][agent]
    std::vector<double> oracle_episode_reward;             // [episode]
    Trace trace;                                           // kept on request
};

/// Runs one seeded replication (seed = base_seed + index).
ReplicationOutput run_replication(const ExperimentConfig& cfg, int rep_index,
                                  bool keep_trace = false);

std::vector<EpisodeMetrics> aggregate_metrics(const ExperimentConfig& cfg,
                                              const std::vector<ReplicationOutput>& outputs);

/// Full experiment: replications in parallel (OpenMP) or serially; both paths
/// produce identical metrics because every replication owns its seed chain.
std::vector<EpisodeMetrics> run_experiment(const ExperimentConfig& cfg, bool parallel = true);

/// Writes `episode,mean_reward,std_reward,oracle_mean` rows, >= 6 significant
/// digits, deterministic order. Throws IoError if the path is unwritable.
void emit_csv(const std::vector<EpisodeMetrics>& metrics, const std::string& path);

/// PAC parameters implied by a config, for reports and monitoring. sigma is
/// measured exactly on the grid MDP at Q*, sigma_c follows the scheme's
/// fusion weights.
PacParams pac_params_for(const ExperimentConfig& cfg);

struct SurfacePoint {
    double ratio_a1 = 0.0; // sigma_A,1^2 / sigma_L^2
    double ratio_a2 = 0.0; // sigma_A,2^2 / sigma_L^2 (fixed to 1 on group surfaces)
    int group_size = 1;
    double w_self = 0.0;
    double weight_ratio = 0.0; // w_1 / w_2 across the two noise groups
};

/// Optimal weights for the fully connected 3-agent case over a grid of the
/// two neighbor-noise ratios (sigma_L = 1).
std::vector<SurfacePoint> three_agent_surface(const std::vector<double>& ratios1,
                                              const std::vector<double>& ratios2);

/// Two symmetric neighbor groups of size n_a each, sigma_L = sigma_A,2 = 1,
/// over a grid of sigma_A,1^2 / sigma_A,2^2 and group sizes.
std::vector<SurfacePoint> two_group_surface(const std::vector<double>& ratios1,
                                            const std::vector<int>& group_sizes);

void emit_surface_csv(const std::vector<SurfacePoint>& rows, const std::string& path);

/// Loads a flat key=value config file ('#' comments and [section] headers are
/// allowed; sections are organizational only). Unknown keys are errors.
ExperimentConfig load_config_file(const std::string& path);

Scheme parse_scheme(const std::string& name);
SampleMode parse_mode(const std::string& name);
GraphKind parse_graph_kind(const std::string& name);
std::vector<std::pair<int, int>> parse_edge_list(const std::string& text);

} // namespace pacmarl
