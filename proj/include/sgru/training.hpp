#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "sgru/data.hpp"
#include "sgru/gru.hpp"

namespace sgru {

enum class TrainMode { kStateless, kStateful };

const char* mode_name(TrainMode mode);
TrainMode mode_from_name(const std::string& name);

struct TrainConfig {
    TrainMode mode = TrainMode::kStateless;
    int window_len = 24;
    int horizon = 1; // steps ahead
    int batch_size = 24;
    int epochs = 100;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
    int layers = 2;
    int hidden_dim = 32;
    bool shuffle = true;    // stateless only; stateful batches stay chronological
    double clip_norm = 5.0; // global gradient-norm clip, 0 disables
};

struct EpochRecord {
    int epoch = 0;       // 1-based
    double loss = 0.0;     // mean training MSE, normalized units
    double val_loss = 0.0; // mean validation MSE, normalized units
};

// Mean squared error over the batch and its gradient 2(pred - target)/B.
std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target);

struct Batch {
    std::vector<int> windows; // dataset indices, one per batch column
};

// Stateless: indices (optionally seeded-shuffled) chunked into batches, the
// last one possibly short. Stateful: contiguous stripes -- slot i of batch
// k+1 is the chronological successor of slot i of batch k; the trailing
// remainder is dropped so every batch has full width.
std::vector<Batch> make_batches(const WindowedDataset& ds, const TrainConfig& cfg);
std::vector<Batch> make_batches(const WindowedDataset& ds, const TrainConfig& cfg,
                                RandomSource& rng);

struct AdamState {
    GruStack m; // first moments
    GruStack v; // second moments
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_stack(const GruStack& stack);
};

// Standard Adam update with bias correction.
void adam_step(GruStack& params, const GruStack& grads, AdamState& st, double learning_rate);

// Scales grads so their global L2 norm is at most max_norm (no-op when
// max_norm <= 0). Returns the pre-clip norm.
double clip_gradients(GruStack& grads, double max_norm);

// Test/inspection hook, called once per trained batch.
struct BatchEvent {
    int epoch;       // 1-based
    int batch_index; // 0-based within the epoch
    const HiddenState& init_state;
    const HiddenState& final_state;
};
using BatchObserver = std::function<void(const BatchEvent&)>;

struct TrainResult {
    GruStack stack;
    std::vector<EpochRecord> records;
};

// MSE training over windows. Stateless: hidden state zeroed at every batch.
// Stateful: zero at epoch start, values (never gradients) carried across
// batches, reset at the epoch boundary. Validation runs after each epoch in
// the same regime, always starting from a zero state. Aborts with
// NumericError if the loss stops being finite.
TrainResult train(GruStack stack, const WindowedDataset& train_ds, const WindowedDataset& val_ds,
                  const TrainConfig& cfg, const BatchObserver& on_batch = {});

// Regime-aware mean MSE over a dataset (the validation pass).
double evaluate_mse(const GruStack& stack, const WindowedDataset& ds, const TrainConfig& cfg);

// Normalized per-window predictions. Stateless: each window from a zero
// state. Stateful: windows in chronological order, state carried across
// consecutive windows, starting from zero.
std::vector<double> predict_series(const GruStack& stack, const WindowedDataset& ds,
                                   TrainMode mode);

// Fresh stack for a config: Glorot weights seeded from cfg.seed.
GruStack build_stack(const TrainConfig& cfg, int feature_dim);

// epoch,loss,val_loss with six fractional digits.
void write_epoch_csv(const std::vector<EpochRecord>& records, std::ostream& out);

} // namespace sgru
