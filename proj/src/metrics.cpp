#include "sgru/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "sgru/errors.hpp"

namespace sgru {

double rmse(std::span<const double> pred, std::span<const double> actual) {
    if (pred.size() != actual.size()) {
        throw UsageError("rmse: length mismatch, " + std::to_string(pred.size()) + " vs " +
                         std::to_string(actual.size()));
    }
    if (pred.empty()) throw UsageError("rmse: empty input");
    double sq = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - actual[i];
        sq += d * d;
    }
    return std::sqrt(sq / static_cast<double>(pred.size()));
}

double physical_rmse(std::span<const double> pred_norm, std::span<const double> actual_norm,
                     const Scaler& scaler) {
    if (scaler.ghi_range() <= 0.0) {
        throw UsageError("physical_rmse: degenerate GHI range in scaler");
    }
    std::vector<double> pred(pred_norm.size()), actual(actual_norm.size());
    for (std::size_t i = 0; i < pred_norm.size(); ++i) {
        pred[i] = scaler.inverse1(pred_norm[i], kFeatGhi);
    }
    for (std::size_t i = 0; i < actual_norm.size(); ++i) {
        actual[i] = scaler.inverse1(actual_norm[i], kFeatGhi);
    }
    return rmse(pred, actual);
}

double persistence_baseline(const WindowedDataset& ds) {
    if (ds.size() == 0) throw UsageError("persistence_baseline: empty dataset");
    std::vector<double> pred(static_cast<std::size_t>(ds.size()));
    for (int i = 0; i < ds.size(); ++i) {
        pred[static_cast<std::size_t>(i)] = ds.inputs[i](ds.window_len - 1, ds.ghi_col);
    }
    return physical_rmse(pred, ds.targets, ds.scaler);
}

std::vector<CompareRow> compare_report(const std::vector<ExperimentReport>& reports) {
    constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();
    std::vector<CompareRow> rows;
    auto find_row = [&](const std::string& region, const std::string& month) -> CompareRow& {
        for (auto& r : rows) {
            if (r.region == region && r.month == month) return r;
        }
        rows.push_back(CompareRow{region, month, kUnset, kUnset, kUnset, kUnset, ""});
        return rows.back();
    };
    for (const auto& rep : reports) {
        CompareRow& row = find_row(rep.region, rep.month);
        double& train_cell =
            rep.mode == TrainMode::kStateless ? row.train_stateless : row.train_stateful;
        double& test_cell =
            rep.mode == TrainMode::kStateless ? row.test_stateless : row.test_stateful;
        if (!std::isnan(test_cell)) {
            throw UsageError("compare_report: duplicate entry for (" + rep.region + ", " +
                             rep.month + ", " + mode_name(rep.mode) + ")");
        }
        train_cell = rep.train_rmse_phys;
        test_cell = rep.test_rmse_phys;
    }
    for (auto& row : rows) {
        // Argmin over present test cells; tie goes to stateless.
        if (!std::isnan(row.test_stateless) &&
            (std::isnan(row.test_stateful) || row.test_stateless <= row.test_stateful)) {
            row.best_mode = "stateless";
        } else {
            row.best_mode = "stateful";
        }
    }
    return rows;
}

namespace {

void append_cell(std::string& line, double v) {
    line += ',';
    if (std::isnan(v)) return; // missing mode: empty cell
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    line += buf;
}

} // namespace

void write_compare_csv(const std::vector<CompareRow>& rows, std::ostream& out) {
    out << "region,month,train_rmse_stateless,train_rmse_stateful,test_rmse_stateless,"
           "test_rmse_stateful,best_mode\n";
    for (const auto& r : rows) {
        std::string line = r.region + "," + r.month;
        append_cell(line, r.train_stateless);
        append_cell(line, r.train_stateful);
        append_cell(line, r.test_stateless);
        append_cell(line, r.test_stateful);
        line += ',';
        line += r.best_mode;
        out << line << '\n';
    }
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
    out << "region,month,mode,seed,layers,hidden,window,horizon,batch_size,epochs,learning_rate,"
           "clip_norm,train_rmse_phys,test_rmse_phys,persistence_rmse_phys\n";
    char buf[160];
    std::snprintf(buf, sizeof(buf), "%d,%d,%d,%d,%d,%d,%g,%g,%.2f,%.2f,%.2f\n",
                  report.config.layers, report.config.hidden_dim, report.config.window_len,
                  report.config.horizon, report.config.batch_size, report.config.epochs,
                  report.config.learning_rate, report.config.clip_norm, report.train_rmse_phys,
                  report.test_rmse_phys, report.persistence_rmse_phys);
    out << report.region << ',' << report.month << ',' << mode_name(report.mode) << ','
        << report.seed << ',' << buf;
}

} // namespace sgru
