#include "pacmarl/protocol.hpp"

#include <cassert>
#include <stdexcept>

namespace pacmarl {

namespace {

// Seed tags keep every stream distinct within a replication.
enum class StreamKind : uint64_t { learner_hop = 1, relay = 2, reward = 3, environment = 4 };

uint64_t stream_tag(StreamKind kind, int from, int to) {
    return (static_cast<uint64_t>(kind) << 32) |
           (static_cast<uint64_t>(static_cast<uint32_t>(from + 1)) << 16) |
           static_cast<uint64_t>(static_cast<uint32_t>(to + 1));
}

void record_segments(const SystemState& sys, Trace* trace) {
    if (!trace) return;
    for (const AgentState& ag : sys.agents)
        trace->segments.push_back({sys.time + 1, ag.id, greedy_policy(ag.fused_q)});
}

} // namespace

WeightVector scheme_weights(const SchemeSpec& scheme, const ChannelSet& channels, int agent,
                            const std::vector<int>& neighbors) {
    const int d = static_cast<int>(neighbors.size());
    switch (scheme.kind) {
        case Scheme::learner_only:
            return WeightVector::learner_only(d);
        case Scheme::uniform:
            return WeightVector::uniform(d);
        case Scheme::optimal: {
            const double sigma_l = channels.learner_to_agent[agent].sigma;
            if (sigma_l <= 0.0) return WeightVector::learner_only(d);
            std::vector<double> sigma_a;
            sigma_a.reserve(neighbors.size());
            for (int j : neighbors) sigma_a.push_back(channels.agent_to_agent[j][agent].sigma);
            return optimal_additive_weights(sigma_l, sigma_a);
        }
        case Scheme::optimal_quantization: {
            const double sigma_l = channels.learner_to_agent[agent].sigma;
            const double delta_q = channels.learner_to_agent[agent].delta_q;
            if (sigma_l <= 0.0) return WeightVector::learner_only(d);
            return quantization_weights(sigma_l, delta_q, d, scheme.quantization_f);
        }
        case Scheme::adaptive:
            return WeightVector::uniform(d); // replaced at every broadcast
    }
    throw std::invalid_argument("scheme_weights: unknown scheme");
}

Environment::Outcome MdpEnvironment::step(int state, int action, Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    int next = mdp_.num_states - 1;
    for (int s2 = 0; s2 < mdp_.num_states; ++s2) {
        acc += mdp_.prob(state, action, s2);
        if (u < acc) {
            next = s2;
            break;
        }
    }
    return {next, mdp_.rew(state, action, next), next};
}

Environment::Outcome GridEnvironment::step(int state, int action, Rng& rng) const {
    const int next = grid_.step(state, action);
    const double reward = grid_.landing_reward(next);
    int position = next;
    if (next == grid_.goal()) position = random_state(rng);
    return {next, reward, position};
}

ChannelSet ChannelSet::identical(int n, double sigma_l, double sigma_a, double sigma_r,
                                 double delta_q_l, double delta_q_a) {
    ChannelSet set;
    set.learner_to_agent.assign(n, {sigma_l, delta_q_l, ChannelKind::learner_to_agent});
    set.agent_to_agent.assign(
        n, std::vector<ChannelSpec>(n, {sigma_a, delta_q_a, ChannelKind::agent_to_agent}));
    set.reward.assign(n, {sigma_r, 0.0, ChannelKind::reward});
    return set;
}

SystemState make_system(std::shared_ptr<const Environment> env, const CommGraph& graph,
                        const ChannelSet& channels, const SchemeSpec& scheme,
                        const BellmanConfig& bellman, double q_max, uint64_t seed,
                        Trace* trace) {
    bellman.validate();
    graph.validate();
    const int n = graph.n;
    if (static_cast<int>(channels.learner_to_agent.size()) != n ||
        static_cast<int>(channels.reward.size()) != n ||
        static_cast<int>(channels.agent_to_agent.size()) != n)
        throw std::invalid_argument("make_system: channel table size must match agent count");

    SystemState sys;
    sys.env = std::move(env);
    sys.graph = graph;
    sys.channels = channels;
    sys.scheme = scheme;
    sys.bellman = bellman;

    const int s_count = sys.env->num_states();
    const int a_count = sys.env->num_actions();
    sys.learner.q = QTable(s_count, a_count, q_max, q_max);
    sys.learner.sample_sets = SampleSetTable(s_count, a_count);

    sys.learner_rng.reserve(n);
    sys.reward_rng.reserve(n);
    sys.env_rng.reserve(n);
    sys.relay_rng.assign(n, {});
    for (int i = 0; i < n; ++i) {
        sys.learner_rng.emplace_back(derive_seed(seed, stream_tag(StreamKind::learner_hop, -1, i)));
        sys.reward_rng.emplace_back(derive_seed(seed, stream_tag(StreamKind::reward, i, -1)));
        sys.env_rng.emplace_back(derive_seed(seed, stream_tag(StreamKind::environment, i, -1)));
        sys.relay_rng[i].reserve(n);
        for (int j = 0; j < n; ++j)
            sys.relay_rng[i].emplace_back(derive_seed(seed, stream_tag(StreamKind::relay, i, j)));
    }

    // Static fusion weights; the adaptive scheme recomputes at each broadcast.
    sys.weights.reserve(n);
    for (int i = 0; i < n; ++i)
        sys.weights.push_back(scheme_weights(scheme, channels, i, graph.neighbors(i)));

    sys.agents.reserve(n);
    for (int i = 0; i < n; ++i) {
        AgentState ag;
        ag.id = i;
        ag.state = sys.env->random_state(sys.env_rng[i]);
        ag.fused_q = QTable(s_count, a_count, q_max, q_max);
        sys.agents.push_back(std::move(ag));
    }

    sys.learner.update_flag = true;
    broadcast(sys, trace);
    return sys;
}

void broadcast(SystemState& sys, Trace* trace) {
    const int n = sys.num_agents();
    const QTable& q = sys.learner.q;

    std::vector<QTable> learner_copies;
    learner_copies.reserve(n);
    for (int i = 0; i < n; ++i)
        learner_copies.push_back(corrupt_q(q, sys.channels.learner_to_agent[i], sys.learner_rng[i]));

    for (int i = 0; i < n; ++i) {
        const std::vector<int> nbrs = sys.graph.neighbors(i);
        std::vector<QTable> relays;
        relays.reserve(nbrs.size());
        for (int j : nbrs)
            relays.push_back(
                relay_q(learner_copies[j], sys.channels.agent_to_agent[j][i], sys.relay_rng[j][i]));

        if (sys.scheme.kind == Scheme::adaptive) {
            AdaptiveUpdate upd =
                adaptive_weight_update(sys.agents[i].noise_est, q, learner_copies[i], relays,
                                       sys.scheme.adaptive_degree_corrected);
            sys.agents[i].noise_est = upd.estimate;
            sys.weights[i] = std::move(upd.weights);
        }
        sys.agents[i].fused_q = fuse(learner_copies[i], relays, sys.weights[i]);
    }
    sys.learner.update_flag = false;
    record_segments(sys, trace);
}

Sample agent_step(SystemState& sys, int agent_id, Trace* trace) {
    AgentState& ag = sys.agents[agent_id];
    const int action = greedy_action(ag.fused_q, ag.state);
    const Environment::Outcome out = sys.env->step(ag.state, action, sys.env_rng[agent_id]);
    const double noisy =
        corrupt_reward(out.reward, sys.channels.reward[agent_id], sys.reward_rng[agent_id]);

    Sample sample{ag.state, action, noisy, out.sample_next_state, agent_id, sys.time};
    sys.learner.inbox.push_back(sample);
    if (trace)
        trace->records.push_back({sys.time, agent_id, ag.state, action, out.reward, false, 0});
    ag.state = out.new_position;
    return sample;
}

LearnerStepResult learner_step(SystemState& sys, Trace* trace) {
    bool updated = false;
    for (const Sample& s : sys.learner.inbox)
        updated |= ingest_sample(sys.learner.sample_sets, s, sys.bellman);
    sys.learner.inbox.clear();
    if (!updated) return {};

    sys.learner.update_flag = true;
    ValueIterationResult vi =
        value_iteration(std::move(sys.learner.q), sys.learner.sample_sets, sys.bellman);
    sys.learner.q = std::move(vi.q);
    sys.broadcast_count += 1;
    broadcast(sys, trace);
    return {true, vi.sweeps};
}

void run_steps(SystemState& sys, long num_steps, Trace* trace) {
    const int n = sys.num_agents();
    for (long step = 0; step < num_steps; ++step) {
        sys.time += 1;
        const size_t first_record = trace ? trace->records.size() : 0;
        for (int i = 0; i < n; ++i) agent_step(sys, i, trace);
        const LearnerStepResult lr = learner_step(sys, trace);
        if (trace && lr.broadcasted) {
            for (size_t r = first_record; r < trace->records.size(); ++r) {
                trace->records[r].broadcast_flag = true;
                trace->records[r].vi_sweeps = lr.vi_sweeps;
            }
        }
    }
}

void reset_agent_positions(SystemState& sys) {
    for (AgentState& ag : sys.agents) ag.state = sys.env->random_state(sys.env_rng[ag.id]);
}

} // namespace pacmarl
