#include "sgru/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <set>
#include <thread>

#include "sgru/errors.hpp"

namespace fs = std::filesystem;

namespace sgru {

namespace {

std::string sanitize_label(const std::string& label) {
    std::string out;
    for (char c : label) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
        out.push_back(ok ? c : '_');
    }
    return out.empty() ? std::string("x") : out;
}

fs::path cell_dir(const RunSpec& run, const ExperimentReport& report) {
    return fs::path(run.out_dir) /
           (sanitize_label(report.region) + "_" + sanitize_label(report.month) + "_" +
            mode_name(report.mode));
}

void write_scaler_csv(const Scaler& scaler, std::ostream& out) {
    out << "feature,min,max\n";
    char buf[64];
    for (int f = 0; f < kFeatureCount; ++f) {
        out << kFeatureNames[f] << ',';
        auto [e1, ec1] = std::to_chars(buf, buf + sizeof(buf), scaler.mins[f]);
        out.write(buf, e1 - buf);
        out << ',';
        auto [e2, ec2] = std::to_chars(buf, buf + sizeof(buf), scaler.maxs[f]);
        out.write(buf, e2 - buf);
        out << '\n';
    }
}

// Hour-vs-GHI plot data for one 24-hour test day: the first full 00..23 run
// of test targets, or the leading targets when the test split has no full
// day. Values in W/m^2.
void write_hour_ghi_csv(const WindowedDataset& test, const std::vector<double>& preds_norm,
                        std::ostream& out) {
    const int n = test.size();
    int start = 0;
    for (int i = 0; i + 24 <= n; ++i) {
        if (test.target_hours[i] == 0) {
            start = i;
            break;
        }
    }
    const int count = std::min(24, n - start);
    out << "hour,actual_ghi,predicted_ghi\n";
    char buf[96];
    for (int i = start; i < start + count; ++i) {
        const double actual = test.scaler.inverse1(test.targets[i], kFeatGhi);
        const double pred = test.scaler.inverse1(preds_norm[i], kFeatGhi);
        std::snprintf(buf, sizeof(buf), "%d,%.2f,%.2f\n", test.target_hours[i], actual, pred);
        out << buf;
    }
}

void write_cell_artifacts(const RunSpec& run, const ExperimentReport& report,
                          const GruStack& model, const PreparedDataset& prepared,
                          const std::vector<double>& test_preds) {
    const fs::path dir = cell_dir(run, report);
    fs::create_directories(dir);
    save_checkpoint(model, (dir / "model.ckpt").string());
    {
        std::ofstream out(dir / "epochs.csv");
        write_epoch_csv(report.records, out);
    }
    {
        std::ofstream out(dir / "report.csv");
        write_report_csv(report, out);
    }
    {
        std::ofstream out(dir / "hour_ghi.csv");
        write_hour_ghi_csv(prepared.test_windows, test_preds, out);
    }
    {
        std::ofstream out(dir / "scaler.csv");
        write_scaler_csv(prepared.test_windows.scaler, out);
    }
}

struct CellOutcome {
    ExperimentReport report;
    GruStack model;
    std::vector<double> test_preds;
};

// Runs independent (dataset, mode) cells on a small worker pool. Results are
// slot-addressed, so scheduling cannot change the outcome.
std::vector<CellOutcome> run_cells(const std::vector<PreparedDataset>& prepared,
                                   const RunSpec& run, const std::vector<TrainMode>& modes) {
    struct Task {
        int dataset;
        TrainMode mode;
    };
    std::vector<Task> tasks;
    for (std::size_t d = 0; d < prepared.size(); ++d) {
        for (TrainMode mode : modes) tasks.push_back({static_cast<int>(d), mode});
    }

    std::vector<CellOutcome> outcomes(tasks.size());
    std::vector<std::exception_ptr> errors(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1)) {
            try {
                const auto& p = prepared[tasks[i].dataset];
                CellOutcome& out = outcomes[i];
                out.report = train_cell(p, run, tasks[i].mode, out.model);
                out.test_preds = predict_series(out.model, p.test_windows, tasks[i].mode);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };

    const int workers = std::clamp(run.jobs, 1, static_cast<int>(tasks.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& err : errors) {
        if (err) std::rethrow_exception(err);
    }
    return outcomes;
}

void validate_spec(const RunSpec& run) {
    if (run.datasets.empty()) throw UsageError("run: no datasets configured");
    if (run.out_dir.empty()) throw UsageError("run: output directory not set");
    std::set<std::pair<std::string, std::string>> labels;
    for (const auto& d : run.datasets) {
        if (!labels.insert({d.region, d.month}).second) {
            throw UsageError("run: duplicate dataset label (" + d.region + ", " + d.month + ")");
        }
    }
}

std::vector<PreparedDataset> extract_and_optimize(const RunSpec& run, std::ostream& log) {
    // Stage 1 loads every input before anything is written, so a bad path
    // fails the run with no partial outputs.
    std::vector<TimeSeriesTable> tables;
    for (const auto& spec : run.datasets) {
        TimeSeriesTable table = load_dataset(spec);
        table.region = spec.region;
        table.month_label = spec.month;
        tables.push_back(std::move(table));
    }
    log << "[1/5] data set extraction: " << tables.size() << " dataset(s) loaded\n";

    std::vector<PreparedDataset> prepared;
    for (std::size_t i = 0; i < tables.size(); ++i) {
        PreparedDataset p;
        p.spec = run.datasets[i];
        auto [train_table, test_table] =
            chrono_split(tables[i], run.train_fraction, run.train.window_len);
        Scaler scaler = fit_scaler(train_table);
        p.train_windows = make_windows(train_table, scaler, run.train.window_len,
                                       run.train.horizon, run.cyclic_hour);
        p.test_windows = make_windows(test_table, scaler, run.train.window_len,
                                      run.train.horizon, run.cyclic_hour);
        prepared.push_back(std::move(p));
    }
    log << "[2/5] data optimization: " << prepared.size() << " hourly table(s), "
        << (prepared.empty() ? kFeatureCount : prepared.front().train_windows.feature_dim)
        << " features, window " << run.train.window_len << "\n";
    return prepared;
}

} // namespace

TimeSeriesTable load_dataset(const DatasetSpec& spec) {
    if (spec.kind == DatasetSpec::Kind::kSynth) {
        return synth_dataset(spec.synth);
    }
    const fs::path path(spec.path);
    if (!fs::exists(path)) {
        throw UsageError("dataset not found: " + spec.path);
    }
    if (path.extension() == ".dat") {
        return optimize(parse_surfrad_file(spec.path));
    }
    return read_canonical_csv_file(spec.path);
}

PreparedDataset prepare_dataset(const DatasetSpec& spec, const RunSpec& run) {
    TimeSeriesTable table = load_dataset(spec);
    table.region = spec.region;
    table.month_label = spec.month;
    PreparedDataset p;
    p.spec = spec;
    auto [train_table, test_table] = chrono_split(table, run.train_fraction, run.train.window_len);
    Scaler scaler = fit_scaler(train_table);
    p.train_windows =
        make_windows(train_table, scaler, run.train.window_len, run.train.horizon, run.cyclic_hour);
    p.test_windows =
        make_windows(test_table, scaler, run.train.window_len, run.train.horizon, run.cyclic_hour);
    return p;
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& region,
                        const std::string& month) {
    return RandomSource::derive(master, fnv1a64(region) ^ (fnv1a64(month) * 31));
}

ExperimentReport train_cell(const PreparedDataset& prepared, const RunSpec& run, TrainMode mode,
                            GruStack& model) {
    TrainConfig cfg = run.train;
    cfg.mode = mode;
    cfg.seed = cell_seed(run.seed, prepared.spec.region, prepared.spec.month);

    GruStack stack = build_stack(cfg, prepared.train_windows.feature_dim);
    TrainResult result = train(std::move(stack), prepared.train_windows, prepared.test_windows, cfg);

    ExperimentReport report;
    report.region = prepared.spec.region;
    report.month = prepared.spec.month;
    report.mode = mode;
    report.seed = cfg.seed;
    report.config = cfg;
    report.records = std::move(result.records);

    const std::vector<double> train_preds =
        predict_series(result.stack, prepared.train_windows, mode);
    const std::vector<double> test_preds = predict_series(result.stack, prepared.test_windows, mode);
    report.train_rmse_phys =
        physical_rmse(train_preds, prepared.train_windows.targets, prepared.train_windows.scaler);
    report.test_rmse_phys =
        physical_rmse(test_preds, prepared.test_windows.targets, prepared.test_windows.scaler);
    report.persistence_rmse_phys = persistence_baseline(prepared.test_windows);

    model = std::move(result.stack);
    return report;
}

namespace {

void run_pipeline(const RunSpec& run, std::ostream& log, bool compare) {
    validate_spec(run);
    std::vector<PreparedDataset> prepared = extract_and_optimize(run, log);

    std::vector<TrainMode> modes;
    if (compare) {
        modes = {TrainMode::kStateless, TrainMode::kStateful};
    } else {
        modes = {run.train.mode};
    }
    std::vector<CellOutcome> outcomes = run_cells(prepared, run, modes);
    log << "[3/5] neural network training: " << outcomes.size() << " run(s), modes:";
    for (TrainMode m : modes) log << ' ' << mode_name(m);
    log << "\n";

    fs::create_directories(run.out_dir);
    std::vector<ExperimentReport> reports;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const int dataset_index = static_cast<int>(i) / static_cast<int>(modes.size());
        write_cell_artifacts(run, outcomes[i].report, outcomes[i].model, prepared[dataset_index],
                             outcomes[i].test_preds);
        reports.push_back(outcomes[i].report);
    }

    if (compare) {
        std::vector<CompareRow> rows = compare_report(reports);
        std::ofstream out(fs::path(run.out_dir) / "compare.csv");
        write_compare_csv(rows, out);
        log << "[4/5] result analysis: comparison table with " << rows.size() << " row(s)\n";
        int stateful_best = 0;
        for (const auto& row : rows) {
            if (row.best_mode == "stateful") ++stateful_best;
        }
        log << "[5/5] conclusion: stateful best in " << stateful_best << "/" << rows.size()
            << " cell(s); artifacts in " << run.out_dir << "\n";
    } else {
        log << "[4/5] result analysis: " << reports.size() << " report(s) emitted\n";
        log << "[5/5] conclusion: artifacts in " << run.out_dir << "\n";
    }
}

} // namespace

void run_train(const RunSpec& run, std::ostream& log) { run_pipeline(run, log, false); }

void run_compare(const RunSpec& run, std::ostream& log) { run_pipeline(run, log, true); }

double run_evaluate(const RunSpec& run, const std::string& model_path, std::ostream& log) {
    if (run.datasets.size() != 1) {
        throw UsageError("evaluate: exactly one dataset expected");
    }
    GruStack model = load_checkpoint(model_path);
    PreparedDataset prepared = prepare_dataset(run.datasets.front(), run);
    if (prepared.test_windows.feature_dim != model.input_dim()) {
        throw UsageError("evaluate: dataset feature dim " +
                         std::to_string(prepared.test_windows.feature_dim) +
                         " does not match model input dim " + std::to_string(model.input_dim()));
    }
    const TrainMode mode = run.train.mode;
    const std::vector<double> preds = predict_series(model, prepared.test_windows, mode);
    const double value =
        physical_rmse(preds, prepared.test_windows.targets, prepared.test_windows.scaler);

    if (!run.out_dir.empty()) {
        fs::create_directories(run.out_dir);
        ExperimentReport report;
        report.region = prepared.spec.region;
        report.month = prepared.spec.month;
        report.mode = mode;
        report.seed = run.seed;
        report.config = run.train;
        report.test_rmse_phys = value;
        report.persistence_rmse_phys = persistence_baseline(prepared.test_windows);
        std::ofstream rep(fs::path(run.out_dir) / "report.csv");
        write_report_csv(report, rep);
        std::ofstream hg(fs::path(run.out_dir) / "hour_ghi.csv");
        write_hour_ghi_csv(prepared.test_windows, preds, hg);
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", value);
    log << "test rmse (" << mode_name(mode) << "): " << buf << " W/m^2\n";
    return value;
}

} // namespace sgru
