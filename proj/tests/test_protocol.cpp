#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pushsum/protocol.hpp"

using namespace pushsum;

namespace {

ProtocolParams two_node() {
    ProtocolParams params;
    params.n = 2;
    return params;
}

double sum_x(const SystemState& s) {
    double acc = 0.0;
    for (const AgentState& a : s.agents) acc += a.x;
    return acc;
}

double sum_w(const SystemState& s) {
    double acc = 0.0;
    for (const AgentState& a : s.agents) acc += a.w;
    return acc;
}

} // namespace

TEST_CASE("push_sum_step update rule") {
    const ProtocolParams params = two_node();

    SUBCASE("delivered") {
        SystemState s = make_initial_state({-1.0, 1.0});
        push_sum_step(s, params, {0, 1, true});
        CHECK(s.agents[0].x == -0.5);
        CHECK(s.agents[0].w == 0.5);
        CHECK(s.agents[1].x == 0.5);
        CHECK(s.agents[1].w == 1.5);
        CHECK(s.t == 1);
    }
    SUBCASE("failed: receiver untouched") {
        SystemState s = make_initial_state({-1.0, 1.0});
        push_sum_step(s, params, {0, 1, false});
        CHECK(s.agents[0].x == -0.5);
        CHECK(s.agents[0].w == 0.5);
        CHECK(s.agents[1].x == 1.0);
        CHECK(s.agents[1].w == 1.0);
    }
    SUBCASE("delivered conserves both sums; failure drops alpha * sender") {
        SystemState s = make_initial_state({0.3, -2.0, 5.5});
        ProtocolParams p3 = params;
        p3.n = 3;
        p3.alpha = 0.25;
        const double x0 = sum_x(s), w0 = sum_w(s);
        push_sum_step(s, p3, {2, 0, true});
        CHECK(s.agents[1].x == -2.0); // bystander untouched
        CHECK(s.agents[1].w == 1.0);
        CHECK(sum_x(s) == doctest::Approx(x0).epsilon(1e-15));
        CHECK(sum_w(s) == doctest::Approx(w0).epsilon(1e-15));

        const double xs = s.agents[1].x, ws = s.agents[1].w;
        const double x1 = sum_x(s), w1 = sum_w(s);
        push_sum_step(s, p3, {1, 0, false});
        CHECK(sum_x(s) == doctest::Approx(x1 - p3.alpha * xs).epsilon(1e-14));
        CHECK(sum_w(s) == doctest::Approx(w1 - p3.alpha * ws).epsilon(1e-14));
    }
}

TEST_CASE("consensus_step update rule") {
    const ProtocolParams params = two_node();

    SystemState s = make_initial_state({-1.0, 1.0});
    consensus_step(s, params, {0, 1, true});
    CHECK(s.agents[0].x == -1.0);
    CHECK(s.agents[1].x == 0.0);

    consensus_step(s, params, {1, 0, false});
    CHECK(s.agents[0].x == -1.0); // failures change nothing
    CHECK(s.agents[1].x == 0.0);
    CHECK(s.t == 2);

    SystemState fixed = make_initial_state({0.7, 0.7});
    consensus_step(fixed, params, {0, 1, true});
    CHECK(fixed.agents[0].x == 0.7); // consensus states are fixed points
    CHECK(fixed.agents[1].x == doctest::Approx(0.7).epsilon(1e-16));
}

TEST_CASE("spread") {
    SystemState s = make_initial_state({-1.0, 1.0});
    CHECK(spread(s, Mode::PushSum) == 2.0);
    CHECK(spread(s, Mode::Consensus) == 2.0);

    SystemState flat = make_initial_state({0.4, 0.4, 0.4});
    CHECK(spread(flat, Mode::PushSum) == 0.0);

    // One delivered 0->1 step from ((-1,1),(1,1)) gives ratios (-1, 1/3).
    push_sum_step(s, two_node(), {0, 1, true});
    CHECK(spread(s, Mode::PushSum) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

    SystemState degenerate = make_initial_state({1.0, 1.0});
    degenerate.agents[0].w = 0.0;
    CHECK_THROWS_AS(spread(degenerate, Mode::PushSum), std::domain_error);
    CHECK_NOTHROW(spread(degenerate, Mode::Consensus));
}

TEST_CASE("renormalize keeps ratios") {
    SystemState s = make_initial_state({3.0, -0.5});
    s.agents[0].w = 0.25;
    const double r0 = s.agents[0].x / s.agents[0].w;
    const double r1 = s.agents[1].x / s.agents[1].w;
    renormalize(s);
    CHECK(s.agents[1].w == 1.0);
    CHECK(s.agents[0].x / s.agents[0].w == doctest::Approx(r0).epsilon(1e-15));
    CHECK(s.agents[1].x / s.agents[1].w == doctest::Approx(r1).epsilon(1e-15));
}

TEST_CASE("event stream distribution") {
    EventStream events(3, 0.4, 99);
    const long draws = 60000;
    long pair_count[3][3] = {};
    long delivered = 0;
    for (long i = 0; i < draws; ++i) {
        const EdgeEvent e = events.next();
        CHECK(e.sender != e.receiver);
        CHECK(e.sender >= 0);
        CHECK(e.sender < 3);
        CHECK(e.receiver >= 0);
        CHECK(e.receiver < 3);
        ++pair_count[e.sender][e.receiver];
        delivered += e.delivered ? 1 : 0;
    }
    // 6 ordered pairs at 10000 expected each; 5 sigma ~ 456.
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) CHECK(std::abs(pair_count[i][j] - draws / 6) < 500);
    // delivery rate 0.6; 5 sigma ~ 600.
    CHECK(std::abs(delivered - 36000) < 650);
    CHECK(events.count() == draws);

    EventStream all_delivered(2, 0.0, 7);
    for (int i = 0; i < 1000; ++i) CHECK(all_delivered.next().delivered);
}

TEST_CASE("run_to_consensus basics") {
    ProtocolParams params = two_node();

    SUBCASE("lossless push-sum averages exactly") {
        const TrialRecord rec = run_to_consensus(params, {-1.0, 1.0}, Mode::PushSum, 42);
        CHECK(rec.converged);
        CHECK(std::abs(rec.final_value) <= params.tol);
    }
    SUBCASE("bitwise determinism") {
        params.p = 0.5;
        const TrialRecord a = run_to_consensus(params, {-1.0, 1.0}, Mode::PushSum, 1234);
        const TrialRecord b = run_to_consensus(params, {-1.0, 1.0}, Mode::PushSum, 1234);
        CHECK(a.final_value == b.final_value);
        CHECK(a.steps == b.steps);
        CHECK(a.events_fingerprint == b.events_fingerprint);
        const TrialRecord c = run_to_consensus(params, {-1.0, 1.0}, Mode::PushSum, 1235);
        CHECK(c.final_value != a.final_value);
    }
    SUBCASE("final value stays in the initial hull") {
        params.p = 0.7;
        params.n = 4;
        for (std::uint64_t seed = 0; seed < 40; ++seed) {
            const std::vector<double> values{-3.0, 0.25, 1.5, 8.0};
            const TrialRecord rec = run_to_consensus(params, values, Mode::PushSum, seed);
            CHECK(rec.converged);
            CHECK(rec.final_value >= -3.0 - 1e-12);
            CHECK(rec.final_value <= 8.0 + 1e-12);
        }
    }
    SUBCASE("non-convergence is reported, not thrown") {
        params.p = 0.5;
        params.max_steps = 3;
        const TrialRecord rec = run_to_consensus(params, {-1.0, 1.0}, Mode::PushSum, 5);
        CHECK(!rec.converged);
        CHECK(rec.steps == 3);
    }
    SUBCASE("validation") {
        params.p = 1.0;
        CHECK_THROWS_AS(run_to_consensus(params, {-1.0, 1.0}, Mode::PushSum, 1), std::invalid_argument);
        params.p = 0.5;
        CHECK_THROWS_AS(run_to_consensus(params, {-1.0, 1.0, 0.0}, Mode::PushSum, 1),
                        std::invalid_argument);
        ProtocolParams bad = params;
        bad.alpha = 1.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
        bad.alpha = 0.5;
        bad.tol = 0.0;
        CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    }
    SUBCASE("consensus mode converges and failures only slow it") {
        params.p = 0.6;
        params.n = 5;
        params.max_steps = 400000;
        const std::vector<double> values{1.0, 2.0, 3.0, 4.0, 5.0};
        const TrialRecord rec = run_to_consensus(params, values, Mode::Consensus, 7);
        CHECK(rec.converged);
        CHECK(rec.final_value >= 1.0 - 1e-9);
        CHECK(rec.final_value <= 5.0 + 1e-9);
    }
}

TEST_CASE("long lossy runs stay numerically sane") {
    // 2e5 steps at p = 0.9 shrink x and w by thousands of halvings; the
    // periodic rescale keeps everything in normal double range.
    ProtocolParams params = two_node();
    params.p = 0.9;
    SystemState state = make_initial_state({-1.0, 1.0});
    EventStream events(2, params.p, 77);
    for (int t = 0; t < 200000; ++t) {
        push_sum_step(state, params, events.next());
        if (state.t % kRenormalizeInterval == 0) renormalize(state);
    }
    for (const AgentState& agent : state.agents) {
        CHECK(agent.w > 1e-200);
        CHECK(std::isfinite(agent.x / agent.w));
    }
    CHECK(std::isfinite(spread(state, Mode::PushSum)));
}

TEST_CASE("fit_log_slope recovers a geometric rate") {
    std::vector<double> series;
    for (int i = 0; i < 50; ++i) series.push_back(3.0 * std::pow(0.8, i));
    CHECK(fit_log_slope(series) == doctest::Approx(std::log(0.8)).epsilon(1e-12));
    std::vector<double> with_zeros = series;
    with_zeros.push_back(0.0);
    CHECK(fit_log_slope(with_zeros) == doctest::Approx(std::log(0.8)).epsilon(1e-12));
}

TEST_CASE("spread decays exponentially across p and n") {
    // Fitted log-spread slope strictly negative in at least 99 of 100
    // seeded trials, for every (p, n) combination.
    for (double p : {0.0, 0.3, 0.6, 0.9}) {
        for (int n : {2, 5}) {
            ProtocolParams params;
            params.n = n;
            params.p = p;
            params.tol = 1e-300;
            params.max_steps = 10000;
            std::vector<double> values(n);
            for (int i = 0; i < n; ++i) values[i] = i == 0 ? -1.0 : (i == n - 1 ? 1.0 : 0.1 * i);

            int negative = 0;
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                std::vector<double> trace;
                run_to_consensus_traced(params, values, Mode::PushSum, seed, 50, trace);
                if (fit_log_slope(trace) < 0.0) ++negative;
            }
            INFO("p=" << p << " n=" << n << " negative=" << negative);
            CHECK(negative >= 99);
        }
    }
}

TEST_CASE("decay rate is bounded away from zero at p = 0.5") {
    ProtocolParams params = two_node();
    params.p = 0.5;
    params.tol = 1e-300;
    params.max_steps = 10000;
    std::vector<double> trace;
    run_to_consensus_traced(params, {-1.0, 1.0}, Mode::PushSum, 4, 50, trace);
    CHECK(fit_log_slope(trace) < -0.01); // per 50-step sample; observed around -10
}

TEST_CASE("hull monotonicity fuzz") {
    // M(t) never rises, m(t) never falls, weights stay positive, and a
    // failed step removes exactly alpha * w_sender from the weight total.
    Xoshiro256pp rng(2024);
    long steps_done = 0;
    while (steps_done < 200000) {
        const int n = 2 + static_cast<int>(rng.next_below(5));
        ProtocolParams params;
        params.n = n;
        params.p = rng.next_double();
        params.alpha = 0.05 + 0.9 * rng.next_double();
        std::vector<double> values(n);
        for (double& v : values) v = 20.0 * rng.next_double() - 10.0;

        SystemState state = make_initial_state(values);
        EventStream events(n, params.p, rng.next());
        double prev_max = *std::max_element(values.begin(), values.end());
        double prev_min = *std::min_element(values.begin(), values.end());
        for (int t = 0; t < 800; ++t, ++steps_done) {
            const EdgeEvent event = events.next();
            const double w_sender = state.agents[event.sender].w;
            const double total_w_before = [&] {
                double acc = 0.0;
                for (const AgentState& a : state.agents) acc += a.w;
                return acc;
            }();
            push_sum_step(state, params, event);
            if (state.t % kRenormalizeInterval == 0) renormalize(state);

            double cur_max = -1e300, cur_min = 1e300;
            for (const AgentState& a : state.agents) {
                REQUIRE(a.w > 0.0);
                const double r = a.x / a.w;
                cur_max = std::max(cur_max, r);
                cur_min = std::min(cur_min, r);
            }
            const double slack = 8e-15 * std::max(1.0, std::abs(prev_max));
            REQUIRE(cur_max <= prev_max + slack);
            REQUIRE(cur_min >= prev_min - 8e-15 * std::max(1.0, std::abs(prev_min)));
            prev_max = cur_max;
            prev_min = cur_min;

            if (!event.delivered && state.t % kRenormalizeInterval != 0) {
                double total_w_after = 0.0;
                for (const AgentState& a : state.agents) total_w_after += a.w;
                REQUIRE(total_w_after ==
                        doctest::Approx(total_w_before - params.alpha * w_sender).epsilon(1e-12));
            }
        }
    }
}
