#include "doctest.h"

#include <cmath>
#include <sstream>

#include "sgru/data.hpp"
#include "sgru/errors.hpp"
#include "sgru/metrics.hpp"
#include "sgru/synth.hpp"

using namespace sgru;

namespace {

Scaler ghi_scaler(double lo, double hi) {
    Scaler s;
    s.mins.fill(0.0);
    s.maxs.fill(1.0);
    s.mins[kFeatGhi] = lo;
    s.maxs[kFeatGhi] = hi;
    return s;
}

ExperimentReport mini_report(const std::string& region, const std::string& month, TrainMode mode,
                             double train_rmse, double test_rmse) {
    ExperimentReport r;
    r.region = region;
    r.month = month;
    r.mode = mode;
    r.train_rmse_phys = train_rmse;
    r.test_rmse_phys = test_rmse;
    return r;
}

} // namespace

TEST_CASE("rmse hand values and errors") {
    std::vector<double> a{3.0, 4.0};
    std::vector<double> zero{0.0, 0.0};
    CHECK(rmse(a, a) == 0.0);
    CHECK(rmse(a, zero) == doctest::Approx(3.5355339059327378).epsilon(1e-9));
    CHECK(rmse(zero, a) == rmse(a, zero)); // symmetry
    CHECK_THROWS_AS(rmse(a, std::vector<double>{1.0}), UsageError);
    CHECK_THROWS_AS(rmse(std::vector<double>{}, std::vector<double>{}), UsageError);
}

TEST_CASE("rmse invariances") {
    RandomSource rng(3);
    std::vector<double> a(40), b(40);
    for (int i = 0; i < 40; ++i) {
        a[i] = rng.uniform(-5.0, 5.0);
        b[i] = rng.uniform(-5.0, 5.0);
    }
    const double base = rmse(a, b);

    // Identical permutation of both vectors.
    std::vector<double> ap = a, bp = b;
    for (int i = 0; i < 40; i += 2) {
        std::swap(ap[i], ap[(i + 7) % 40]);
        std::swap(bp[i], bp[(i + 7) % 40]);
    }
    CHECK(rmse(ap, bp) == doctest::Approx(base).epsilon(1e-12));

    // Constant shift of both.
    std::vector<double> ac = a, bc = b;
    for (int i = 0; i < 40; ++i) {
        ac[i] += 3.25;
        bc[i] += 3.25;
    }
    CHECK(rmse(ac, bc) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("physical rmse scales by the GHI range") {
    Scaler s = ghi_scaler(0.0, 800.0);
    std::vector<double> actual{0.2, 0.4, 0.6};
    std::vector<double> pred{0.3, 0.5, 0.7}; // normalized rmse exactly 0.1
    CHECK(physical_rmse(pred, actual, s) == doctest::Approx(80.0).epsilon(1e-12));
    CHECK(physical_rmse(actual, actual, s) == 0.0);
    CHECK_THROWS_AS(physical_rmse(pred, actual, ghi_scaler(5.0, 5.0)), UsageError);
}

TEST_CASE("physical rmse two-path identity") {
    RandomSource rng(7);
    Scaler s = ghi_scaler(12.5, 931.0);
    std::vector<double> pred(64), actual(64);
    for (int i = 0; i < 64; ++i) {
        pred[i] = rng.uniform();
        actual[i] = rng.uniform();
    }
    // Path 1: inverse-transform then rmse (what physical_rmse does).
    const double path1 = physical_rmse(pred, actual, s);
    // Path 2: normalized rmse times the range.
    const double path2 = rmse(pred, actual) * s.ghi_range();
    CHECK(std::abs(path1 - path2) / std::max(1.0, path2) < 1e-9);
}

TEST_CASE("persistence baseline") {
    WindowedDataset ds;
    ds.window_len = 2;
    ds.feature_dim = kFeatureCount;
    ds.ghi_col = kFeatGhi;
    ds.scaler = ghi_scaler(0.0, 100.0);

    SUBCASE("constant series scores zero") {
        for (int i = 0; i < 6; ++i) {
            Matrix w(2, kFeatureCount, 0.0);
            w(0, kFeatGhi) = 0.4;
            w(1, kFeatGhi) = 0.4;
            ds.inputs.push_back(w);
            ds.targets.push_back(0.4);
            ds.target_hours.push_back(i % 24);
        }
        CHECK(persistence_baseline(ds) == 0.0);
    }
    SUBCASE("alternating series scores the full range") {
        for (int i = 0; i < 6; ++i) {
            const double last = i % 2 ? 1.0 : 0.0;
            Matrix w(2, kFeatureCount, 0.0);
            w(0, kFeatGhi) = 1.0 - last;
            w(1, kFeatGhi) = last;
            ds.inputs.push_back(w);
            ds.targets.push_back(1.0 - last); // always the opposite of the last row
            ds.target_hours.push_back(i % 24);
        }
        CHECK(persistence_baseline(ds) == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("empty dataset is an error") {
        CHECK_THROWS_AS(persistence_baseline(ds), UsageError);
    }
}

TEST_CASE("persistence baseline matches a brute-force recomputation") {
    SynthConfig cfg;
    cfg.days = 4;
    cfg.noise_sd = 0.0;
    cfg.seed = 11;
    TimeSeriesTable table = synth_dataset(cfg);
    const int window = 6;
    Scaler s = fit_scaler(table);
    auto ds = make_windows(table, s, window);

    // Independent recomputation straight from the raw table: predict GHI at
    // row i+window-1 for the target at row i+window.
    double sq = 0.0;
    const int n = static_cast<int>(table.rows.size()) - window;
    for (int i = 0; i < n; ++i) {
        const double diff = table.rows[i + window - 1].f[kFeatGhi] -
                            table.rows[i + window].f[kFeatGhi];
        sq += diff * diff;
    }
    const double expect = std::sqrt(sq / n);
    CHECK(persistence_baseline(ds) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("compare_report shapes and flagging") {
    SUBCASE("single report gives a single flagged row") {
        auto rows = compare_report({mini_report("A", "January", TrainMode::kStateful, 50, 40)});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].best_mode == "stateful");
        CHECK(std::isnan(rows[0].test_stateless));
        CHECK(rows[0].test_stateful == 40.0);
    }
    SUBCASE("lower stateful test rmse wins") {
        auto rows = compare_report({mini_report("A", "Jan", TrainMode::kStateless, 50, 45),
                                    mini_report("A", "Jan", TrainMode::kStateful, 51, 40)});
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].best_mode == "stateful");
    }
    SUBCASE("ties break toward stateless") {
        auto rows = compare_report({mini_report("A", "Jan", TrainMode::kStateless, 50, 40),
                                    mini_report("A", "Jan", TrainMode::kStateful, 50, 40)});
        CHECK(rows[0].best_mode == "stateless");
    }
    SUBCASE("duplicate cell is an error") {
        CHECK_THROWS_AS(
            compare_report({mini_report("A", "Jan", TrainMode::kStateless, 1, 1),
                            mini_report("A", "Jan", TrainMode::kStateless, 2, 2)}),
            UsageError);
    }
    SUBCASE("rows keep first-appearance order and flag exactly one mode") {
        auto rows = compare_report({mini_report("B", "Jul", TrainMode::kStateless, 9, 9),
                                    mini_report("A", "Jan", TrainMode::kStateless, 5, 5),
                                    mini_report("B", "Jul", TrainMode::kStateful, 8, 8),
                                    mini_report("A", "Jan", TrainMode::kStateful, 6, 6)});
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].region == "B");
        CHECK(rows[1].region == "A");
        CHECK(rows[0].best_mode == "stateful");
        CHECK(rows[1].best_mode == "stateless");
    }
}

TEST_CASE("compare csv layout") {
    auto rows = compare_report({mini_report("Orissa", "January", TrainMode::kStateless, 55.37, 32.76),
                                mini_report("Orissa", "January", TrainMode::kStateful, 55.0, 35.48)});
    std::ostringstream out;
    write_compare_csv(rows, out);
    CHECK(out.str() ==
          "region,month,train_rmse_stateless,train_rmse_stateful,test_rmse_stateless,"
          "test_rmse_stateful,best_mode\n"
          "Orissa,January,55.37,55.00,32.76,35.48,stateless\n");
}

TEST_CASE("report csv carries the config echo") {
    ExperimentReport r = mini_report("A", "Jan", TrainMode::kStateful, 12.345, 67.891);
    r.seed = 42;
    r.config.layers = 2;
    r.config.hidden_dim = 32;
    r.persistence_rmse_phys = 99.5;
    std::ostringstream out;
    write_report_csv(r, out);
    const std::string text = out.str();
    CHECK(text.find("A,Jan,stateful,42,2,32,") != std::string::npos);
    CHECK(text.find(",12.35,67.89,99.50") != std::string::npos); // two decimals
}
