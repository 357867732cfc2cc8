#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sgru/data.hpp"
#include "sgru/training.hpp"

namespace sgru {

// sqrt(mean((pred - actual)^2)); lengths must match and be nonzero.
double rmse(std::span<const double> pred, std::span<const double> actual);

// RMSE after inverse-transforming both series through the scaler's GHI
// channel; equals the normalized RMSE times the GHI range.
double physical_rmse(std::span<const double> pred_norm, std::span<const double> actual_norm,
                     const Scaler& scaler);

// Naive previous-hour forecast (GHI at the last window row), physical RMSE.
double persistence_baseline(const WindowedDataset& ds);

// One (region, month, mode) training outcome.
struct ExperimentReport {
    std::string region;
    std::string month;
    TrainMode mode = TrainMode::kStateless;
    std::uint64_t seed = 0;
    TrainConfig config;
    std::vector<EpochRecord> records;
    double train_rmse_phys = 0.0;
    double test_rmse_phys = 0.0;
    double persistence_rmse_phys = 0.0;
};

struct CompareRow {
    std::string region;
    std::string month;
    // NaN marks a mode that was not run.
    double train_stateless, train_stateful;
    double test_stateless, test_stateful;
    std::string best_mode; // argmin of test RMSE; ties go to stateless
};

// One row per (region, month), in first-appearance order. Throws on a
// duplicated (region, month, mode).
std::vector<CompareRow> compare_report(const std::vector<ExperimentReport>& reports);

// region,month,train_rmse_stateless,train_rmse_stateful,test_rmse_stateless,
// test_rmse_stateful,best_mode -- physical RMSE with two fractional digits,
// missing cells empty.
void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out);

// Single-row CSV echo of one report (config, seed, final RMSE values).
void write_report_csv(const ExperimentReport& report, std::ostream& out);

} // namespace sgru
