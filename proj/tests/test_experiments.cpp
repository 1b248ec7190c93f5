#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include "pushsum/csv.hpp"
#include "pushsum/experiments.hpp"

using namespace pushsum;

TEST_CASE("linear_grid") {
    const std::vector<double> grid = linear_grid(0.0, 1.0, 0.05);
    REQUIRE(grid.size() == 21);
    CHECK(grid.front() == 0.0);
    CHECK(grid.back() == 1.0);
    CHECK(grid[6] == 0.3); // snapped, not 0.30000000000000004
    CHECK_THROWS_AS(linear_grid(1.0, 0.0, 0.1), std::invalid_argument);
}

TEST_CASE("bounds_table sandwich holds rowwise") {
    const std::vector<BoundSet> rows = bounds_table(linear_grid(0.0, 1.0, 0.05));
    REQUIRE(rows.size() == 21);
    CHECK(!rows.front().upper_highp.has_value()); // p = 0 row
    CHECK(!rows.back().upper_highp.has_value());  // p = 1 row
    CHECK(rows.back().lower_series == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rows.back().upper_general == 1.0);
    for (const BoundSet& b : rows) {
        double upper = b.upper_general;
        if (b.upper_highp) upper = std::min(upper, *b.upper_highp);
        CHECK(std::max(b.lower_closed, b.lower_series) <= upper + 1e-15);
    }
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, 1.0 / 3.0, 0.30000000000000004, 1e-300, 12345.678901234567, 0.0}) {
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
        CHECK(std::strtod(format_double(-v).c_str(), nullptr) == -v);
    }
}

TEST_CASE("csv writer") {
    std::ostringstream out;
    CsvWriter csv(out);
    csv.comment("hello");
    csv.header({"a", "b", "c"});
    csv.field(1.5).field(std::optional<double>{}).field(std::string("x"));
    csv.end_row();
    CHECK(out.str() == "# hello\na,b,c\n1.5,,x\n");
}

TEST_CASE("simulate_table is deterministic") {
    const std::vector<double> grid{0.2, 0.6};
    const std::vector<SimulateRow> a = simulate_table(grid, 2, 0.5, 2000, 9, 2);
    const std::vector<SimulateRow> b = simulate_table(grid, 2, 0.5, 2000, 9, 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].estimate.r_hat == b[i].estimate.r_hat);
        CHECK(a[i].estimate.stderr_mean == b[i].estimate.stderr_mean);
    }
    // grid points use distinct derived seeds
    CHECK(a[0].estimate.r_hat != a[1].estimate.r_hat);
}

TEST_CASE("consensus error does not depend on p") {
    ProtocolParams params;
    params.n = 5;
    params.alpha = 0.5;
    params.p = 0.0;
    const ErrorEstimate base = estimate_consensus_R(params, 4000, 77);
    params.p = 0.5;
    const ErrorEstimate lossy = estimate_consensus_R(params, 4000, 78);
    CHECK(std::abs(base.r_hat - lossy.r_hat) <=
          3.0 * std::hypot(base.stderr_mean, lossy.stderr_mean));
    CHECK(base.r_hat > 0.0); // consensus misses the average even without losses
}

TEST_CASE("run_compare emits both protocols per instance") {
    CompareConfig config;
    config.n = 3;
    config.p_samples = 4;
    config.alpha_samples = 4;
    config.trials_per_cell = 2;
    config.p_max = 0.8;
    config.base_seed = 5;
    const std::vector<CompareRecord> records = run_compare(config);
    REQUIRE(records.size() == 4 * 4 * 2 * 2);
    long converged = 0, pushsum_count = 0;
    for (const CompareRecord& rec : records) {
        if (rec.converged) {
            ++converged;
            CHECK(rec.error >= 0.0);
            CHECK(rec.error <= 2.0 + 1e-12); // n - 1
            CHECK(rec.speed >= 0);
        }
        pushsum_count += rec.pushsum ? 1 : 0;
        CHECK(rec.p < 0.8);
        CHECK(rec.alpha > 0.02);
        CHECK(rec.alpha < 0.98);
    }
    CHECK(pushsum_count * 2 == static_cast<long>(records.size()));
    CHECK(converged == static_cast<long>(records.size())); // mild settings all converge

    const std::vector<CompareRecord> again = run_compare(config);
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(records[i].error == again[i].error);
        CHECK(records[i].speed == again[i].speed);
    }
}

TEST_CASE("label_cells") {
    std::vector<CompareRecord> records;
    auto add = [&](bool pushsum, double error, double p, long speed) {
        CompareRecord rec;
        rec.pushsum = pushsum;
        rec.error = error;
        rec.p = p;
        rec.speed = speed;
        rec.converged = true;
        records.push_back(rec);
    };
    // cell (0, 0): both present, consensus faster -> a
    add(true, 0.01, 0.05, 100);
    add(false, 0.01, 0.05, 50);
    // cell (1, 1): both present, push-sum faster -> b
    add(true, 0.03, 0.15, 40);
    add(false, 0.03, 0.15, 400);
    // cell (3, 0): consensus only -> c
    add(false, 0.07, 0.05, 60);

    const CellGrid grid = label_cells(records, 4, 0.08, 10, 1.0);
    CHECK(grid.labels[grid.index(0, 0)] == CellLabel::ConsensusFaster);
    CHECK(grid.labels[grid.index(1, 1)] == CellLabel::PushSumFaster);
    CHECK(grid.labels[grid.index(3, 0)] == CellLabel::NoPushSum);
    CHECK(grid.labels[grid.index(2, 5)] == CellLabel::Empty);
    CHECK(grid.consensus_speed[grid.index(0, 0)] == 50.0);
    CHECK(grid.pushsum_count[grid.index(1, 1)] == 1);
}
