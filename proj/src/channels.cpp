#include "pacmarl/channels.hpp"

#include <cassert>
#include <stdexcept>

namespace pacmarl {

uint64_t derive_seed(uint64_t base, uint64_t tag) {
    uint64_t z = base + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void ChannelSpec::validate() const {
    if (sigma < 0.0) throw std::invalid_argument("ChannelSpec: sigma must be >= 0");
    if (delta_q < 0.0) throw std::invalid_argument("ChannelSpec: delta_q must be >= 0");
    if (kind == ChannelKind::reward && delta_q != 0.0)
        throw std::invalid_argument("ChannelSpec: reward channels are additive-only");
}

void CommGraph::add_edge(int i, int j) {
    if (i == j) throw std::invalid_argument("CommGraph: self-loops not allowed");
    adjacency[static_cast<size_t>(i) * n + j] = 1;
    adjacency[static_cast<size_t>(j) * n + i] = 1;
}

int CommGraph::degree(int i) const {
    int d = 0;
    for (int j = 0; j < n; ++j) d += edge(i, j) ? 1 : 0;
    return d;
}

std::vector<int> CommGraph::neighbors(int i) const {
    std::vector<int> out;
    for (int j = 0; j < n; ++j)
        if (edge(i, j)) out.push_back(j);
    return out;
}

CommGraph CommGraph::full(int agents) {
    CommGraph g(agents);
    for (int i = 0; i < agents; ++i)
        for (int j = i + 1; j < agents; ++j) g.add_edge(i, j);
    return g;
}

CommGraph CommGraph::regular(int agents, int degree) {
    if (degree < 0 || degree >= agents)
        throw std::invalid_argument("CommGraph::regular: need 0 <= d < n");
    if (degree % 2 == 1 && agents % 2 == 1)
        throw std::invalid_argument("CommGraph::regular: odd degree needs an even agent count");
    CommGraph g(agents);
    for (int off = 1; off <= degree / 2; ++off)
        for (int i = 0; i < agents; ++i) g.add_edge(i, (i + off) % agents);
    if (degree % 2 == 1)
        for (int i = 0; i < agents / 2; ++i) g.add_edge(i, i + agents / 2);
    return g;
}

CommGraph CommGraph::from_edges(int agents, const std::vector<std::pair<int, int>>& edges) {
    CommGraph g(agents);
    for (const auto& [i, j] : edges) {
        if (i < 0 || j < 0 || i >= agents || j >= agents)
            throw std::invalid_argument("CommGraph::from_edges: vertex out of range");
        g.add_edge(i, j);
    }
    return g;
}

void CommGraph::validate() const {
    for (int i = 0; i < n; ++i) {
        if (edge(i, i)) throw std::invalid_argument("CommGraph: nonzero diagonal");
        for (int j = 0; j < n; ++j)
            if (edge(i, j) != edge(j, i))
                throw std::invalid_argument("CommGraph: adjacency not symmetric");
    }
}

QTable corrupt_q(const QTable& q, const ChannelSpec& spec, Rng& rng) {
    assert(spec.kind != ChannelKind::reward);
    QTable out = q;
    if (spec.sigma == 0.0 && spec.delta_q == 0.0) return out;
    std::normal_distribution<double> gauss(0.0, spec.sigma);
    std::uniform_real_distribution<double> quant(-spec.delta_q, spec.delta_q);
    for (double& v : out.values) {
        double noise = 0.0;
        if (spec.sigma > 0.0) noise += gauss(rng);
        if (spec.delta_q > 0.0) noise += quant(rng);
        v += noise;
    }
    return out;
}

double corrupt_reward(double r, const ChannelSpec& spec, Rng& rng) {
    assert(spec.kind == ChannelKind::reward);
    if (spec.sigma == 0.0) return r;
    std::normal_distribution<double> gauss(0.0, spec.sigma);
    return r + gauss(rng);
}

QTable relay_q(const QTable& q_received, const ChannelSpec& spec, Rng& rng) {
    assert(spec.kind == ChannelKind::agent_to_agent);
    return corrupt_q(q_received, spec, rng);
}

} // namespace pacmarl
