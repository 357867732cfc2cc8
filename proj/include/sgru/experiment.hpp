#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sgru/metrics.hpp"
#include "sgru/synth.hpp"
#include "sgru/training.hpp"

namespace sgru {

// One input series: a SURFRAD .dat file, a canonical .csv, or a synthetic
// generator spec, labeled with region and month.
struct DatasetSpec {
    enum class Kind { kFile, kSynth };
    Kind kind = Kind::kSynth;
    std::string path;  // kFile; .dat parses as SURFRAD, anything else as canonical CSV
    SynthConfig synth; // kSynth
    std::string region;
    std::string month;
};

struct RunSpec {
    std::vector<DatasetSpec> datasets;
    TrainConfig train;
    double train_fraction = 0.8;
    bool cyclic_hour = false;
    std::string out_dir;
    std::uint64_t seed = 0; // master seed; per-cell seeds derived from labels
    int jobs = 1;           // worker pool width for independent cells
};

// Normalized windows for one dataset after split and scaling.
struct PreparedDataset {
    DatasetSpec spec;
    WindowedDataset train_windows;
    WindowedDataset test_windows;
};

TimeSeriesTable load_dataset(const DatasetSpec& spec);
PreparedDataset prepare_dataset(const DatasetSpec& spec, const RunSpec& run);

// Deterministic per-cell seed shared by both modes of a (region, month).
std::uint64_t cell_seed(std::uint64_t master, const std::string& region, const std::string& month);

// Trains one (dataset, mode) cell and fills the report; the trained model is
// returned through `model`.
ExperimentReport train_cell(const PreparedDataset& prepared, const RunSpec& run, TrainMode mode,
                            GruStack& model);

// Pipeline stages, each logged exactly once per run, in order:
//   1 data set extraction, 2 data optimization, 3 neural network training,
//   4 result analysis, 5 conclusion.
// run_train trains run.train.mode only; run_compare trains both modes and
// additionally writes compare.csv. Per-cell artifacts land in
// <out_dir>/<region>_<month>_<mode>/: model.ckpt, epochs.csv, report.csv,
// hour_ghi.csv, scaler.csv. Nothing is written outside out_dir, and nothing
// is written until all inputs have loaded.
void run_train(const RunSpec& run, std::ostream& log);
void run_compare(const RunSpec& run, std::ostream& log);

// Loads a checkpoint, rebuilds the dataset split, and reports the physical
// test RMSE under the given mode's evaluation regime. Artifacts (report.csv,
// hour_ghi.csv) go to out_dir when it is nonempty.
double run_evaluate(const RunSpec& run, const std::string& model_path, std::ostream& log);

} // namespace sgru
