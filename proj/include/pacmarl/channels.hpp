#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pacmarl/mdp.hpp"

namespace pacmarl {

using Rng = std::mt19937_64;

/// splitmix64 step; used to derive independent stream seeds from a base seed
/// and a tag so replications and channels never share generator state.
uint64_t derive_seed(uint64_t base, uint64_t tag);

enum class ChannelKind { learner_to_agent, agent_to_agent, reward };

/// One communication link: an additive zero-mean Gaussian of scale `sigma`
/// plus a bounded quantization term drawn uniformly on [-delta_q, delta_q].
/// Reward links are additive-only.
struct ChannelSpec {
    double sigma = 0.0;
    double delta_q = 0.0;
    ChannelKind kind = ChannelKind::learner_to_agent;

    void validate() const;
};

/// Undirected communication graph over the agents.
struct CommGraph {
    int n = 0;
    std::vector<uint8_t> adjacency; // row-major n x n, zero diagonal, symmetric

    CommGraph() = default;
    explicit CommGraph(int agents)
        : n(agents), adjacency(static_cast<size_t>(agents) * agents, 0) {}

    bool edge(int i, int j) const { return adjacency[static_cast<size_t>(i) * n + j] != 0; }
    void add_edge(int i, int j);
    int degree(int i) const;
    std::vector<int> neighbors(int i) const;

    static CommGraph full(int agents);
    /// Circulant d-regular graph: offsets 1..d/2 on each side, plus the
    /// antipode when d is odd (requires an even agent count then).
    static CommGraph regular(int agents, int degree);
    static CommGraph from_edges(int agents, const std::vector<std::pair<int, int>>& edges);

    void validate() const;
};

/// Adds an independent noise draw to every entry. Entries, agents and
/// broadcast events all use fresh draws; the generator never reads q.
QTable corrupt_q(const QTable& q, const ChannelSpec& spec, Rng& rng);

/// Reward crossing the agent-to-learner channel.
double corrupt_reward(double r, const ChannelSpec& spec, Rng& rng);

/// Second hop of an agent-to-agent relay: the input is the sender's already
/// noisy learner copy and the relay noise stacks on top of it.
QTable relay_q(const QTable& q_received, const ChannelSpec& spec, Rng& rng);

} // namespace pacmarl
