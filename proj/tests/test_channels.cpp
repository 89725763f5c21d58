#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pacmarl/channels.hpp"
#include "test_util.hpp"

using namespace pacmarl;

namespace {

QTable big_table(int entries, double fill, double q_max = 1e9) {
    QTable q(entries, 1, q_max);
    for (double& v : q.values) v = fill;
    return q;
}

double mean_of(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return ss / static_cast<double>(v.size() - 1);
}

std::vector<double> injected_noise(const QTable& before, const QTable& after) {
    std::vector<double> noise(before.values.size());
    for (size_t i = 0; i < noise.size(); ++i) noise[i] = after.values[i] - before.values[i];
    return noise;
}

} // namespace

TEST_CASE("noiseless channel is the identity") {
    Rng rng(1);
    const QTable q = big_table(64, 3.25);
    const ChannelSpec spec{0.0, 0.0, ChannelKind::learner_to_agent};
    CHECK(corrupt_q(q, spec, rng) == q);
}

TEST_CASE("quantization-only corruption stays within the half-width") {
    Rng rng(2);
    const QTable q = big_table(4096, 1.0);
    const ChannelSpec spec{0.0, 0.2, ChannelKind::learner_to_agent};
    const QTable out = corrupt_q(q, spec, rng);
    for (size_t i = 0; i < q.values.size(); ++i)
        CHECK(std::abs(out.values[i] - q.values[i]) <= 0.2);
}

TEST_CASE("additive noise has the configured variance and zero mean") {
    Rng rng(3);
    const int n = 100000;
    const QTable q = big_table(n, 0.0);
    const double sigma = std::sqrt(0.1);
    const ChannelSpec spec{sigma, 0.0, ChannelKind::learner_to_agent};
    const std::vector<double> noise = injected_noise(q, corrupt_q(q, spec, rng));
    CHECK(variance_of(noise) == doctest::Approx(0.1).epsilon(0.05));
    CHECK(std::abs(mean_of(noise)) <= 3.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("reward channel adds zero-mean gaussian noise") {
    Rng rng(4);
    const ChannelSpec quiet{0.0, 0.0, ChannelKind::reward};
    CHECK(corrupt_reward(1.0, quiet, rng) == 1.0);

    const ChannelSpec spec{0.5, 0.0, ChannelKind::reward};
    const int n = 100000;
    std::vector<double> draws(n);
    for (double& d : draws) d = corrupt_reward(1.0, spec, rng);
    CHECK(mean_of(draws) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("two-hop relay composes additive variances") {
    Rng rng_l(5), rng_a(6);
    const int n = 100000;
    const QTable q = big_table(n, 2.0);
    const double sl = std::sqrt(0.1), sa = std::sqrt(0.3);
    const QTable hop1 = corrupt_q(q, {sl, 0.0, ChannelKind::learner_to_agent}, rng_l);
    const QTable hop2 = relay_q(hop1, {sa, 0.0, ChannelKind::agent_to_agent}, rng_a);
    const std::vector<double> noise = injected_noise(q, hop2);
    CHECK(variance_of(noise) == doctest::Approx(0.4).epsilon(0.05));
}

TEST_CASE("two-hop relay with both hops silent is the identity") {
    Rng rng(7);
    const QTable q = big_table(32, 5.5);
    const QTable hop1 = corrupt_q(q, {0.0, 0.0, ChannelKind::learner_to_agent}, rng);
    const QTable hop2 = relay_q(hop1, {0.0, 0.0, ChannelKind::agent_to_agent}, rng);
    CHECK(hop2 == q);
}

TEST_CASE("quantization-only hops obey the triangle bound") {
    Rng rng(8);
    const QTable q = big_table(4096, 1.0);
    const QTable hop1 = corrupt_q(q, {0.0, 0.15, ChannelKind::learner_to_agent}, rng);
    const QTable hop2 = relay_q(hop1, {0.0, 0.25, ChannelKind::agent_to_agent}, rng);
    for (size_t i = 0; i < q.values.size(); ++i)
        CHECK(std::abs(hop2.values[i] - q.values[i]) <= 0.15 + 0.25);
}

TEST_CASE("noise draws do not depend on the table being corrupted") {
    // The draw sequence extracted through a zero table must reproduce the
    // corruption of arbitrary tables bit for bit.
    Rng rng_zero(9), rng_a(9), rng_b(9);
    Rng content(10);
    const QTable qa = testutil::random_qtable(50, 2, 10.0, content);
    const QTable qb = testutil::random_qtable(50, 2, 10.0, content);
    const ChannelSpec spec{0.7, 0.3, ChannelKind::learner_to_agent};

    const QTable zero = big_table(100, 0.0);
    const std::vector<double> draws = injected_noise(zero, corrupt_q(zero, spec, rng_zero));
    const QTable out_a = corrupt_q(qa, spec, rng_a);
    const QTable out_b = corrupt_q(qb, spec, rng_b);
    for (size_t i = 0; i < draws.size(); ++i) {
        CHECK(out_a.values[i] == qa.values[i] + draws[i]);
        CHECK(out_b.values[i] == qb.values[i] + draws[i]);
    }
}

TEST_CASE("corruption is bit-reproducible under a fixed seed") {
    Rng rng_a(11), rng_b(11);
    Rng content(12);
    const QTable q = testutil::random_qtable(30, 3, 10.0, content);
    const ChannelSpec spec{0.4, 0.1, ChannelKind::agent_to_agent};
    CHECK(corrupt_q(q, spec, rng_a) == corrupt_q(q, spec, rng_b));
}

TEST_CASE("channel spec validation") {
    const ChannelSpec plain_reward{0.1, 0.0, ChannelKind::reward};
    CHECK_NOTHROW(plain_reward.validate());
    const ChannelSpec quantized_reward{0.1, 0.2, ChannelKind::reward};
    CHECK_THROWS_AS(quantized_reward.validate(), std::invalid_argument);
    const ChannelSpec negative_sigma{-0.1, 0.0, ChannelKind::learner_to_agent};
    CHECK_THROWS_AS(negative_sigma.validate(), std::invalid_argument);
}

TEST_CASE("communication graphs") {
    const CommGraph full = CommGraph::full(4);
    full.validate();
    for (int i = 0; i < 4; ++i) CHECK(full.degree(i) == 3);
    CHECK_FALSE(full.edge(2, 2));

    const CommGraph ring = CommGraph::regular(6, 2);
    ring.validate();
    for (int i = 0; i < 6; ++i) CHECK(ring.degree(i) == 2);
    CHECK(ring.edge(0, 1));
    CHECK(ring.edge(0, 5));

    const CommGraph cube = CommGraph::regular(6, 3);
    cube.validate();
    for (int i = 0; i < 6; ++i) CHECK(cube.degree(i) == 3);
    CHECK_THROWS_AS(CommGraph::regular(5, 3), std::invalid_argument);

    const CommGraph path = CommGraph::from_edges(3, {{0, 1}, {1, 2}});
    path.validate();
    CHECK(path.degree(1) == 2);
    CHECK(path.neighbors(1) == std::vector<int>{0, 2});
    CHECK_THROWS_AS(CommGraph::from_edges(2, {{0, 2}}), std::invalid_argument);
}

TEST_CASE("derived seeds separate streams") {
    CHECK(derive_seed(42, 1) != derive_seed(42, 2));
    CHECK(derive_seed(42, 1) != derive_seed(43, 1));
    CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}
