#include "sgru/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <string>

#include "sgru/errors.hpp"

namespace sgru {

const char* mode_name(TrainMode mode) {
    return mode == TrainMode::kStateless ? "stateless" : "stateful";
}

TrainMode mode_from_name(const std::string& name) {
    if (name == "stateless") return TrainMode::kStateless;
    if (name == "stateful") return TrainMode::kStateful;
    throw UsageError("unknown mode '" + name + "' (expected stateless or stateful)");
}

std::pair<double, Matrix> mse_loss(const Matrix& pred, const Matrix& target) {
    if (!pred.same_shape(target)) {
        throw ShapeError("mse_loss: shape mismatch " + shape_str(pred) + " vs " + shape_str(target));
    }
    const int n = pred.size();
    Matrix d_pred(pred.rows(), pred.cols());
    double loss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double diff = pred.data()[i] - target.data()[i];
        loss += diff * diff;
        d_pred.data()[i] = 2.0 * diff / n;
    }
    return {loss / n, std::move(d_pred)};
}

std::vector<Batch> make_batches(const WindowedDataset& ds, const TrainConfig& cfg) {
    RandomSource rng(cfg.seed);
    return make_batches(ds, cfg, rng);
}

std::vector<Batch> make_batches(const WindowedDataset& ds, const TrainConfig& cfg,
                                RandomSource& rng) {
    const int n = ds.size();
    const int b = cfg.batch_size;
    if (b < 1) throw UsageError("make_batches: batch_size must be >= 1");
    if (n < b) {
        throw UsageError("make_batches: dataset has " + std::to_string(n) +
                         " windows, smaller than one batch of " + std::to_string(b));
    }
    std::vector<Batch> batches;
    if (cfg.mode == TrainMode::kStateful) {
        // Contiguous stripes: stripe i covers windows [i*k, (i+1)*k), batch t
        // takes element t of every stripe. Remainder dropped.
        const int k = n / b;
        batches.resize(k);
        for (int t = 0; t < k; ++t) {
            batches[t].windows.resize(b);
            for (int i = 0; i < b; ++i) batches[t].windows[i] = i * k + t;
        }
    } else {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        if (cfg.shuffle) {
            for (int i = n - 1; i > 0; --i) {
                const int j = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
                std::swap(order[i], order[j]);
            }
        }
        for (int start = 0; start < n; start += b) {
            Batch batch;
            const int end = std::min(start + b, n);
            batch.windows.assign(order.begin() + start, order.begin() + end);
            batches.push_back(std::move(batch));
        }
    }
    return batches;
}

AdamState AdamState::for_stack(const GruStack& stack) {
    AdamState st;
    st.m = GruStack::zeros_like(stack);
    st.v = GruStack::zeros_like(stack);
    return st;
}

void adam_step(GruStack& params, const GruStack& grads, AdamState& st, double learning_rate) {
    st.step += 1;
    const double bc1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
    const double bc2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
    auto p = params.param_arrays();
    auto g = grads.param_arrays();
    auto m = st.m.param_arrays();
    auto v = st.v.param_arrays();
    for (std::size_t a = 0; a < p.size(); ++a) {
        double* pp = p[a]->data();
        const double* gp = g[a]->data();
        double* mp = m[a]->data();
        double* vp = v[a]->data();
        if (!p[a]->same_shape(*g[a])) {
            throw ShapeError("adam_step: parameter " + shape_str(*p[a]) + " vs gradient " +
                             shape_str(*g[a]));
        }
        for (int i = 0, n = p[a]->size(); i < n; ++i) {
            mp[i] = st.beta1 * mp[i] + (1.0 - st.beta1) * gp[i];
            vp[i] = st.beta2 * vp[i] + (1.0 - st.beta2) * gp[i] * gp[i];
            const double m_hat = mp[i] / bc1;
            const double v_hat = vp[i] / bc2;
            pp[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + st.epsilon);
        }
    }
}

double clip_gradients(GruStack& grads, double max_norm) {
    double sq = 0.0;
    for (const Matrix* m : static_cast<const GruStack&>(grads).param_arrays()) {
        const double* p = m->data();
        for (int i = 0, n = m->size(); i < n; ++i) sq += p[i] * p[i];
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double f = max_norm / norm;
        for (Matrix* m : grads.param_arrays()) {
            double* p = m->data();
            for (int i = 0, n = m->size(); i < n; ++i) p[i] *= f;
        }
    }
    return norm;
}

namespace {

// Batch columns assembled timestep-major: seq[t] is (feature_dim, B).
struct AssembledBatch {
    std::vector<Matrix> seq;
    Matrix targets; // (1, B)
};

AssembledBatch assemble(const WindowedDataset& ds, const Batch& batch) {
    const int b = static_cast<int>(batch.windows.size());
    const int timesteps = ds.window_len;
    const int features = ds.feature_dim;
    AssembledBatch out;
    out.seq.reserve(timesteps);
    for (int t = 0; t < timesteps; ++t) {
        Matrix x(features, b);
        for (int col = 0; col < b; ++col) {
            const Matrix& window = ds.inputs[batch.windows[col]];
            for (int f = 0; f < features; ++f) x(f, col) = window(t, f);
        }
        out.seq.push_back(std::move(x));
    }
    out.targets = Matrix(1, b);
    for (int col = 0; col < b; ++col) out.targets(0, col) = ds.targets[batch.windows[col]];
    return out;
}

double forward_batch_mse(const GruStack& stack, const WindowedDataset& ds, const Batch& batch,
                         HiddenState& state) {
    AssembledBatch ab = assemble(ds, batch);
    auto res = stack_forward(ab.seq, state, stack);
    state = std::move(res.final_state);
    return mse_loss(res.preds.back(), ab.targets).first;
}

} // namespace

double evaluate_mse(const GruStack& stack, const WindowedDataset& ds, const TrainConfig& cfg) {
    TrainConfig eval_cfg = cfg;
    eval_cfg.shuffle = false;
    eval_cfg.batch_size = std::min(cfg.batch_size, ds.size());
    auto batches = make_batches(ds, eval_cfg);
    HiddenState state = HiddenState::zeros(stack, eval_cfg.batch_size);
    double total = 0.0;
    long samples = 0;
    for (const Batch& batch : batches) {
        const int b = static_cast<int>(batch.windows.size());
        if (cfg.mode == TrainMode::kStateless || b != state.batch()) {
            state = HiddenState::zeros(stack, b);
        }
        const double loss = forward_batch_mse(stack, ds, batch, state);
        total += loss * b;
        samples += b;
    }
    return total / static_cast<double>(samples);
}

std::vector<double> predict_series(const GruStack& stack, const WindowedDataset& ds,
                                   TrainMode mode) {
    std::vector<double> preds;
    preds.reserve(ds.size());
    if (mode == TrainMode::kStateful) {
        // Chronological, batch width 1, state carried across windows.
        HiddenState state = HiddenState::zeros(stack, 1);
        for (int i = 0; i < ds.size(); ++i) {
            Batch batch{{i}};
            AssembledBatch ab = assemble(ds, batch);
            auto res = stack_forward(ab.seq, state, stack);
            state = std::move(res.final_state);
            preds.push_back(res.preds.back()(0, 0));
        }
    } else {
        // Columns are independent; chunking is only a carrier.
        const int chunk = 64;
        for (int start = 0; start < ds.size(); start += chunk) {
            Batch batch;
            for (int i = start; i < std::min(start + chunk, ds.size()); ++i) {
                batch.windows.push_back(i);
            }
            AssembledBatch ab = assemble(ds, batch);
            HiddenState state = HiddenState::zeros(stack, static_cast<int>(batch.windows.size()));
            auto res = stack_forward(ab.seq, state, stack);
            for (int col = 0; col < res.preds.back().cols(); ++col) {
                preds.push_back(res.preds.back()(0, col));
            }
        }
    }
    return preds;
}

GruStack build_stack(const TrainConfig& cfg, int feature_dim) {
    if (cfg.layers < 1) throw UsageError("build_stack: layers must be >= 1");
    if (cfg.hidden_dim < 1) throw UsageError("build_stack: hidden_dim must be >= 1");
    RandomSource rng(cfg.seed);
    std::vector<int> dims(static_cast<std::size_t>(cfg.layers), cfg.hidden_dim);
    return GruStack::glorot(feature_dim, dims, rng);
}

TrainResult train(GruStack stack, const WindowedDataset& train_ds, const WindowedDataset& val_ds,
                  const TrainConfig& cfg, const BatchObserver& on_batch) {
    if (cfg.epochs < 1) throw UsageError("train: epochs must be >= 1");
    if (train_ds.feature_dim != stack.input_dim()) {
        throw ShapeError("train: dataset feature dim " + std::to_string(train_ds.feature_dim) +
                         " does not match stack input dim " + std::to_string(stack.input_dim()));
    }
    stack.validate();

    AdamState adam = AdamState::for_stack(stack);
    // Shuffle stream is separate from the init stream so regimes that do not
    // shuffle consume identical randomness.
    RandomSource shuffle_rng(RandomSource::derive(cfg.seed, fnv1a64("shuffle")));

    TrainResult result;
    result.records.reserve(cfg.epochs);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        auto batches = make_batches(train_ds, cfg, shuffle_rng);
        HiddenState state = HiddenState::zeros(stack, cfg.batch_size);
        double total = 0.0;
        long samples = 0;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            const Batch& batch = batches[bi];
            const int b = static_cast<int>(batch.windows.size());
            if (cfg.mode == TrainMode::kStateless || b != state.batch()) {
                state = HiddenState::zeros(stack, b);
            }
            HiddenState init = state;

            AssembledBatch ab = assemble(train_ds, batch);
            auto fwd = stack_forward(ab.seq, init, stack);
            auto [loss, d_pred] = mse_loss(fwd.preds.back(), ab.targets);
            if (!std::isfinite(loss)) {
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(bi));
            }
            total += loss * b;
            samples += b;

            std::vector<Matrix> d_preds(ab.seq.size(), Matrix::zeros(1, b));
            d_preds.back() = std::move(d_pred);
            auto grads = stack_backward(fwd.cache, d_preds, stack);
            clip_gradients(grads.grads, cfg.clip_norm);
            adam_step(stack, grads.grads, adam, cfg.learning_rate);

            state = std::move(fwd.final_state); // carried values, not gradients
            if (on_batch) {
                on_batch(BatchEvent{epoch, static_cast<int>(bi), init, state});
            }
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.loss = total / static_cast<double>(samples);
        rec.val_loss = evaluate_mse(stack, val_ds, cfg);
        if (!std::isfinite(rec.val_loss)) {
            throw NumericError("train: non-finite validation loss at epoch " +
                               std::to_string(epoch));
        }
        result.records.push_back(rec);
    }
    result.stack = std::move(stack);
    return result;
}

void write_epoch_csv(const std::vector<EpochRecord>& records, std::ostream& out) {
    out << "epoch,loss,val_loss\n";
    char buf[96];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", r.epoch, r.loss, r.val_loss);
        out << buf;
    }
}

} // namespace sgru
