#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "pacmarl/sampling.hpp"
#include "test_util.hpp"

using namespace pacmarl;

namespace {

BellmanConfig basic_cfg(int k, int k_m, double gamma = 0.5, double eps_b = 0.0) {
    BellmanConfig cfg;
    cfg.k = k;
    cfg.k_m = k_m;
    cfg.gamma = gamma;
    cfg.eps_b = eps_b;
    cfg.eps_a = 1e-9;
    cfg.max_sweeps = 500;
    return cfg;
}

Sample make_sample(int s, int a, double reward, int next) {
    Sample out;
    out.state = s;
    out.action = a;
    out.noisy_reward = reward;
    out.next_state = next;
    return out;
}

// Sample table where every (s,a) holds ladder-sized active sets with random
// content; roughly a third stay empty.
SampleSetTable random_sample_table(int s_count, int a_count, const BellmanConfig& cfg,
                                   Rng& rng) {
    SampleSetTable table(s_count, a_count);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> any_state(0, s_count - 1);
    const int max_p = static_cast<int>(std::log2(cfg.k / cfg.k_m));
    std::uniform_int_distribution<int> pow(0, max_p);
    for (int s = 0; s < s_count; ++s) {
        for (int a = 0; a < a_count; ++a) {
            if (unit(rng) < 0.3) continue;
            const int n = cfg.k_m * (1 << pow(rng));
            for (int l = 0; l < n; ++l)
                table.at(s, a).active.push_back(
                    make_sample(s, a, 4.0 * unit(rng) - 1.0, any_state(rng)));
        }
    }
    return table;
}

} // namespace

TEST_CASE("group_mean of a single sample is reward + gamma * max q(next)") {
    QTable q(1, 2, 10.0);
    q(0, 0) = 3.0;
    q(0, 1) = 1.0;
    SampleSet u = testutil::make_active_set({2.0}, {0});
    CHECK(group_mean(q, u, 1, basic_cfg(4, 1)) == doctest::Approx(3.5).epsilon(1e-12));
}

TEST_CASE("group_mean splits six targets into contiguous blocks of two") {
    QTable q(1, 1, 10.0); // q == 0, so each target is just the reward
    SampleSet u = testutil::make_active_set({1, 2, 3, 4, 5, 6}, {0});
    const BellmanConfig cfg = basic_cfg(12, 3);
    CHECK(group_mean(q, u, 1, cfg) == doctest::Approx(1.5).epsilon(1e-12));
    CHECK(group_mean(q, u, 2, cfg) == doctest::Approx(3.5).epsilon(1e-12));
    CHECK(group_mean(q, u, 3, cfg) == doctest::Approx(5.5).epsilon(1e-12));
}

TEST_CASE("median_of_means over three group means, with and without UCB") {
    QTable q(1, 1, 10.0);
    SampleSet u = testutil::make_active_set({1, 2, 3, 4, 5, 6}, {0});
    BellmanConfig cfg = basic_cfg(12, 3);
    CHECK(median_of_means(q, u, cfg) == doctest::Approx(3.5).epsilon(1e-12));
    cfg.eps_b = 0.1;
    CHECK(median_of_means(q, u, cfg) ==
          doctest::Approx(3.5 + 0.1 / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("median_of_means with one group is the plain mean plus UCB") {
    QTable q(1, 1, 10.0);
    SampleSet u = testutil::make_active_set({1, 2, 3, 4}, {0});
    BellmanConfig cfg = basic_cfg(4, 1, 0.5, 0.2);
    CHECK(median_of_means(q, u, cfg) == doctest::Approx(2.5 + 0.2 / 2.0).epsilon(1e-12));
}

TEST_CASE("even group count takes the mean of the two middle group means") {
    QTable q(1, 1, 10.0);
    SampleSet u = testutil::make_active_set({1, 2, 30, 4}, {0});
    // group means: {1, 2, 30, 4} -> sorted {1, 2, 4, 30}, median (2+4)/2
    CHECK(median_of_means(q, u, basic_cfg(4, 4)) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("approx_bellman saturates and maps empty sets to q_max") {
    QTable q(1, 1, 10.0);
    SampleSet empty;
    const BellmanConfig cfg = basic_cfg(4, 1);
    CHECK(approx_bellman(q, empty, cfg) == 10.0);

    SampleSet high = testutil::make_active_set({12.0}, {0}); // 1.2 * q_max
    CHECK(approx_bellman(q, high, cfg) == 10.0);
    SampleSet low = testutil::make_active_set({-0.5}, {0});
    CHECK(approx_bellman(q, low, cfg) == 0.0);
}

TEST_CASE("median_of_means is monotone in q") {
    Rng rng(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const BellmanConfig cfg = basic_cfg(12, 3, 0.9);
    for (int trial = 0; trial < 300; ++trial) {
        QTable q = testutil::random_qtable(4, 2, 10.0, rng);
        SampleSet u;
        for (int l = 0; l < 6; ++l)
            u.active.push_back(make_sample(0, 0, 2.0 * unit(rng), l % 4));
        const double before = median_of_means(q, u, cfg);
        QTable raised = q;
        raised.values[static_cast<size_t>(8.0 * unit(rng) * 0.999)] += 3.0 * unit(rng);
        CHECK(median_of_means(raised, u, cfg) >= before - 1e-12);
    }
}

TEST_CASE("value_iteration on all-empty sets fixes q_max in one sweep") {
    const BellmanConfig cfg = basic_cfg(4, 1);
    SampleSetTable sets(2, 2);
    QTable q(2, 2, 10.0, 10.0);
    const ValueIterationResult result = value_iteration(q, sets, cfg);
    CHECK(result.sweeps == 1);
    for (double v : result.q.values) CHECK(v == 10.0);
}

TEST_CASE("value_iteration with exact deterministic samples reaches the exact fixed point") {
    Mdp mdp(2, 2, 0.5, 1.0);
    auto arc = [&](int s, int a, int next) {
        mdp.prob(s, a, next) = 1.0;
        mdp.rew(s, a, next) = next == 1 ? 1.0 : 0.0;
    };
    arc(0, 0, 1);
    arc(0, 1, 0);
    arc(1, 0, 0);
    arc(1, 1, 1);

    BellmanConfig cfg = basic_cfg(4, 1, 0.5);
    SampleSetTable sets(2, 2);
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 2; ++a) {
            int next = 0;
            for (int s2 = 0; s2 < 2; ++s2)
                if (mdp.prob(s, a, s2) == 1.0) next = s2;
            for (int l = 0; l < cfg.k; ++l)
                sets.at(s, a).active.push_back(make_sample(s, a, mdp.rew(s, a, next), next));
        }
    }

    QTable q0(2, 2, mdp.q_max(), mdp.q_max());
    const ValueIterationResult vi = value_iteration(q0, sets, cfg);
    const QTable exact = exact_value_iteration(mdp, 1e-13).q;
    CHECK(testutil::max_abs_diff(vi.q, exact) < cfg.eps_a / (1.0 - cfg.gamma) + 1e-12);
}

TEST_CASE("value_iteration hits the 30-sweep cap on the grid-world setup") {
    const GridWorld grid{5};
    BellmanConfig cfg;
    cfg.k = 9;
    cfg.k_m = 3;
    cfg.gamma = 0.98;
    cfg.eps_a = 1e-7;
    cfg.eps_b = 0.1;
    cfg.max_sweeps = 30;
    cfg.mode = SampleMode::accumulate;

    SampleSetTable sets(25, 4);
    for (int s = 0; s < 25; ++s) {
        for (int a = 0; a < 4; ++a) {
            const int next = grid.step(s, a);
            for (int l = 0; l < cfg.k; ++l)
                sets.at(s, a).active.push_back(
                    make_sample(s, a, grid.landing_reward(next), next));
        }
    }
    QTable q0(25, 4, 50.0, 50.0);
    const ValueIterationResult vi = value_iteration(q0, sets, cfg);
    CHECK(vi.sweeps == 30);
    for (double v : vi.q.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 50.0);
    }
}

TEST_CASE("ingest_sample follows the doubling ladder in replace mode") {
    BellmanConfig cfg = basic_cfg(12, 3);
    SampleSetTable sets(1, 1);
    auto push = [&]() { return ingest_sample(sets, make_sample(0, 0, 1.0, 0), cfg); };

    CHECK_FALSE(push());
    CHECK_FALSE(push());
    CHECK(push()); // pending hits 3 > 0 active
    CHECK(sets.at(0, 0).active.size() == 3);
    CHECK(sets.at(0, 0).pending.empty());

    // pending reaching 3 again is not > active; the swap waits for 6
    CHECK_FALSE(push());
    CHECK_FALSE(push());
    CHECK_FALSE(push());
    CHECK(sets.at(0, 0).pending.size() == 3);
    CHECK_FALSE(push());
    CHECK_FALSE(push());
    CHECK(push());
    CHECK(sets.at(0, 0).active.size() == 6);

    for (int i = 0; i < 11; ++i) CHECK_FALSE(push());
    CHECK(push());
    CHECK(sets.at(0, 0).active.size() == 12);

    // full set: everything else is discarded
    CHECK_FALSE(push());
    CHECK(sets.at(0, 0).pending.empty());
    CHECK(sets.at(0, 0).active.size() == 12);
}

TEST_CASE("accumulate mode appends instead of replacing and caps at k") {
    BellmanConfig cfg = basic_cfg(9, 3);
    cfg.mode = SampleMode::accumulate;
    SampleSetTable sets(1, 1);
    double stamp = 0.0;
    auto push = [&]() {
        return ingest_sample(sets, make_sample(0, 0, stamp++, 0), cfg);
    };

    for (int i = 0; i < 2; ++i) CHECK_FALSE(push());
    CHECK(push());
    CHECK(sets.at(0, 0).active.size() == 3);
    for (int i = 0; i < 5; ++i) CHECK_FALSE(push());
    CHECK(push());
    CHECK(sets.at(0, 0).active.size() == 9); // 3 old + 6 new
    CHECK(sets.at(0, 0).active.front().noisy_reward == 0.0);
    CHECK_FALSE(push()); // full
}

TEST_CASE("accumulate cap keeps the newest k samples") {
    BellmanConfig cfg = basic_cfg(12, 3);
    cfg.mode = SampleMode::accumulate;
    SampleSetTable sets(1, 1);
    double stamp = 0.0;
    bool swapped = false;
    // Drive until active reaches 9, then the next swap appends 12 and caps.
    while (sets.at(0, 0).active.size() < 9)
        swapped = ingest_sample(sets, make_sample(0, 0, stamp++, 0), cfg);
    CHECK(swapped);
    while (!ingest_sample(sets, make_sample(0, 0, stamp++, 0), cfg)) {}
    CHECK(sets.at(0, 0).active.size() == 12);
    // Oldest three of the 21 seen samples fell off the front.
    CHECK(sets.at(0, 0).active.front().noisy_reward == 9.0);
}

TEST_CASE("replace-mode fuzz keeps the active size on the ladder") {
    Rng rng(41);
    BellmanConfig cfg = basic_cfg(8, 2);
    SampleSetTable sets(3, 2);
    std::uniform_int_distribution<int> any_s(0, 2), any_a(0, 1);
    for (int i = 0; i < 20000; ++i) {
        const Sample s = make_sample(any_s(rng), any_a(rng), 1.0, any_s(rng));
        const size_t before_active = sets.at(s.state, s.action).active.size();
        const size_t before_pending = sets.at(s.state, s.action).pending.size();
        const bool swapped = ingest_sample(sets, s, cfg);
        const size_t n = sets.at(s.state, s.action).active.size();
        CHECK((n == 0 || n == 2 || n == 4 || n == 8));
        if (swapped) {
            const size_t grown = before_pending + 1;
            CHECK(grown > before_active);
            CHECK(grown % cfg.k_m == 0);
            const size_t ratio = grown / cfg.k_m;
            CHECK((ratio & (ratio - 1)) == 0); // 2^p * k_m
        }
    }
}

TEST_CASE("approximate Bellman operator is a gamma-contraction (sampled)") {
    Rng rng(53);
    BellmanConfig cfg = basic_cfg(12, 3, 0.9, 0.1);
    for (int trial = 0; trial < 300; ++trial) {
        const SampleSetTable sets = random_sample_table(5, 3, cfg, rng);
        const QTable q1 = testutil::random_qtable(5, 3, 10.0, rng);
        const QTable q2 = testutil::random_qtable(5, 3, 10.0, rng);
        double dist = 0.0;
        for (size_t i = 0; i < q1.values.size(); ++i)
            dist = std::max(dist, std::abs(q1.values[i] - q2.values[i]));
        for (int s = 0; s < 5; ++s) {
            for (int a = 0; a < 3; ++a) {
                const double b1 = approx_bellman(q1, sets.at(s, a), cfg);
                const double b2 = approx_bellman(q2, sets.at(s, a), cfg);
                CHECK(std::abs(b1 - b2) <= cfg.gamma * dist + 1e-12);
            }
        }
    }
}

TEST_CASE("BellmanConfig validation") {
    BellmanConfig cfg = basic_cfg(12, 3);
    CHECK_NOTHROW(cfg.validate()); // 12/3 = 4 is a power of two
    cfg.k = 9;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument); // 3 is not
    cfg.mode = SampleMode::accumulate;
    CHECK_NOTHROW(cfg.validate()); // accumulate mode allows it
    cfg.k = 10;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument); // not a multiple
    cfg.k = 9;
    cfg.eps_a = 0.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}
