#include "sgru/gru.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "sgru/errors.hpp"

namespace sgru {

GruLayerParams GruLayerParams::zeros(int input_dim, int hidden_dim) {
    GruLayerParams p;
    p.W_z = Matrix::zeros(hidden_dim, input_dim);
    p.U_z = Matrix::zeros(hidden_dim, hidden_dim);
    p.b_z = Matrix::zeros(hidden_dim, 1);
    p.W_r = Matrix::zeros(hidden_dim, input_dim);
    p.U_r = Matrix::zeros(hidden_dim, hidden_dim);
    p.b_r = Matrix::zeros(hidden_dim, 1);
    p.W_h = Matrix::zeros(hidden_dim, input_dim);
    p.U_h = Matrix::zeros(hidden_dim, hidden_dim);
    p.b_h = Matrix::zeros(hidden_dim, 1);
    return p;
}

GruLayerParams GruLayerParams::glorot(int input_dim, int hidden_dim, RandomSource& rng) {
    GruLayerParams p = zeros(input_dim, hidden_dim);
    p.W_z = glorot_init(hidden_dim, input_dim, rng);
    p.U_z = glorot_init(hidden_dim, hidden_dim, rng);
    p.W_r = glorot_init(hidden_dim, input_dim, rng);
    p.U_r = glorot_init(hidden_dim, hidden_dim, rng);
    p.W_h = glorot_init(hidden_dim, input_dim, rng);
    p.U_h = glorot_init(hidden_dim, hidden_dim, rng);
    return p;
}

GruStack GruStack::glorot(int input_dim, const std::vector<int>& hidden_dims, RandomSource& rng) {
    if (hidden_dims.empty()) {
        throw UsageError("GruStack: at least one layer required");
    }
    GruStack s;
    int d = input_dim;
    for (int h : hidden_dims) {
        s.layers.push_back(GruLayerParams::glorot(d, h, rng));
        d = h;
    }
    s.w_out = glorot_init(1, d, rng);
    s.b_out = Matrix::zeros(1, 1);
    return s;
}

GruStack GruStack::zeros_like(const GruStack& other) {
    GruStack s;
    for (const auto& layer : other.layers) {
        s.layers.push_back(GruLayerParams::zeros(layer.input_dim(), layer.hidden_dim()));
    }
    s.w_out = Matrix::zeros(other.w_out.rows(), other.w_out.cols());
    s.b_out = Matrix::zeros(1, 1);
    return s;
}

std::vector<Matrix*> GruStack::param_arrays() {
    std::vector<Matrix*> out;
    for (auto& l : layers) {
        out.insert(out.end(), {&l.W_z, &l.U_z, &l.b_z, &l.W_r, &l.U_r, &l.b_r, &l.W_h, &l.U_h, &l.b_h});
    }
    out.push_back(&w_out);
    out.push_back(&b_out);
    return out;
}

std::vector<const Matrix*> GruStack::param_arrays() const {
    std::vector<const Matrix*> out;
    for (const auto& l : layers) {
        out.insert(out.end(), {&l.W_z, &l.U_z, &l.b_z, &l.W_r, &l.U_r, &l.b_r, &l.W_h, &l.U_h, &l.b_h});
    }
    out.push_back(&w_out);
    out.push_back(&b_out);
    return out;
}

void GruStack::validate() const {
    if (layers.empty()) throw ShapeError("GruStack: no layers");
    int d = layers.front().input_dim();
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const auto& l = layers[i];
        const int h = l.hidden_dim();
        if (l.input_dim() != d) {
            throw ShapeError("GruStack: layer " + std::to_string(i) + " expects input dim " +
                             std::to_string(l.input_dim()) + ", chain provides " + std::to_string(d));
        }
        auto check = [&](const Matrix& m, int r, int c, const char* name) {
            if (m.rows() != r || m.cols() != c) {
                throw ShapeError("GruStack: layer " + std::to_string(i) + " " + name + " is " +
                                 shape_str(m) + ", expected (" + std::to_string(r) + "x" +
                                 std::to_string(c) + ")");
            }
        };
        check(l.U_z, h, h, "U_z");
        check(l.b_z, h, 1, "b_z");
        check(l.W_r, h, d, "W_r");
        check(l.U_r, h, h, "U_r");
        check(l.b_r, h, 1, "b_r");
        check(l.W_h, h, d, "W_h");
        check(l.U_h, h, h, "U_h");
        check(l.b_h, h, 1, "b_h");
        d = h;
    }
    if (w_out.rows() != 1 || w_out.cols() != d) {
        throw ShapeError("GruStack: w_out is " + shape_str(w_out) + ", expected (1x" +
                         std::to_string(d) + ")");
    }
    if (b_out.rows() != 1 || b_out.cols() != 1) {
        throw ShapeError("GruStack: b_out is " + shape_str(b_out) + ", expected (1x1)");
    }
}

HiddenState HiddenState::zeros(const GruStack& stack, int batch) {
    HiddenState s;
    for (const auto& l : stack.layers) {
        s.h.push_back(Matrix::zeros(l.hidden_dim(), batch));
    }
    return s;
}

std::pair<Matrix, StepCache> cell_forward(const Matrix& x, const Matrix& h_prev,
                                          const GruLayerParams& p) {
    if (x.rows() != p.input_dim()) {
        throw ShapeError("cell_forward: input " + shape_str(x) + " does not match weights " +
                         shape_str(p.W_z));
    }
    if (h_prev.rows() != p.hidden_dim() || h_prev.cols() != x.cols()) {
        throw ShapeError("cell_forward: state " + shape_str(h_prev) + " does not match input " +
                         shape_str(x) + " and hidden dim " + std::to_string(p.hidden_dim()));
    }
    StepCache cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.z = sigmoid(add_col_bias(add(matmul(p.W_z, x), matmul(p.U_z, h_prev)), p.b_z));
    cache.r = sigmoid(add_col_bias(add(matmul(p.W_r, x), matmul(p.U_r, h_prev)), p.b_r));
    cache.rh = hadamard(cache.r, h_prev);
    cache.c = tanh_act(add_col_bias(add(matmul(p.W_h, x), matmul(p.U_h, cache.rh)), p.b_h));
    cache.h = add(hadamard(cache.z, cache.c), hadamard(ones_minus(cache.z), h_prev));
    Matrix h_new = cache.h;
    return {std::move(h_new), std::move(cache)};
}

StackForwardResult stack_forward(const std::vector<Matrix>& seq, const HiddenState& init,
                                 const GruStack& stack) {
    if (seq.empty()) throw UsageError("stack_forward: empty sequence");
    const int layer_count = stack.layer_count();
    if (static_cast<int>(init.h.size()) != layer_count) {
        throw ShapeError("stack_forward: init state has " + std::to_string(init.h.size()) +
                         " layers, stack has " + std::to_string(layer_count));
    }
    const int timesteps = static_cast<int>(seq.size());
    const int batch = seq.front().cols();

    StackForwardResult res;
    res.cache.timesteps = timesteps;
    res.cache.batch = batch;
    res.cache.steps.assign(timesteps, std::vector<StepCache>(layer_count));
    res.final_state = init;
    res.preds.reserve(timesteps);

    for (int t = 0; t < timesteps; ++t) {
        const Matrix* layer_input = &seq[t];
        for (int l = 0; l < layer_count; ++l) {
            auto [h_new, cache] = cell_forward(*layer_input, res.final_state.h[l], stack.layers[l]);
            res.final_state.h[l] = std::move(h_new);
            res.cache.steps[t][l] = std::move(cache);
            layer_input = &res.cache.steps[t][l].h;
        }
        res.preds.push_back(add_col_bias(matmul(stack.w_out, *layer_input), stack.b_out));
    }
    return res;
}

namespace {

// Backward through one cell step. dh is dLoss/dh_t; returns dLoss/dx_t and
// dLoss/dh_{t-1}, accumulating parameter gradients into g.
std::pair<Matrix, Matrix> cell_backward(const StepCache& s, const Matrix& dh,
                                        const GruLayerParams& p, GruLayerParams& g) {
    // h = z o c + (1 - z) o h_prev
    Matrix dz = hadamard(dh, sub(s.c, s.h_prev));
    Matrix dc = hadamard(dh, s.z);
    Matrix dh_prev = hadamard(dh, ones_minus(s.z));

    // c = tanh(a); da = dc o (1 - c^2)
    Matrix da = hadamard(dc, ones_minus(hadamard(s.c, s.c)));
    Matrix x_t = transpose(s.x);
    Matrix h_prev_t = transpose(s.h_prev);
    accumulate(g.W_h, matmul(da, x_t));
    accumulate(g.U_h, matmul(da, transpose(s.rh)));
    accumulate(g.b_h, row_sums(da));

    // gradient w.r.t. (r o h_prev)
    Matrix drh = matmul(transpose(p.U_h), da);
    Matrix dr = hadamard(drh, s.h_prev);
    accumulate(dh_prev, hadamard(drh, s.r));

    // pre-sigmoid gradients
    Matrix dz_pre = hadamard(dz, hadamard(s.z, ones_minus(s.z)));
    Matrix dr_pre = hadamard(dr, hadamard(s.r, ones_minus(s.r)));
    accumulate(g.W_z, matmul(dz_pre, x_t));
    accumulate(g.U_z, matmul(dz_pre, h_prev_t));
    accumulate(g.b_z, row_sums(dz_pre));
    accumulate(g.W_r, matmul(dr_pre, x_t));
    accumulate(g.U_r, matmul(dr_pre, h_prev_t));
    accumulate(g.b_r, row_sums(dr_pre));

    accumulate(dh_prev, matmul(transpose(p.U_z), dz_pre));
    accumulate(dh_prev, matmul(transpose(p.U_r), dr_pre));

    Matrix dx = matmul(transpose(p.W_z), dz_pre);
    accumulate(dx, matmul(transpose(p.W_r), dr_pre));
    accumulate(dx, matmul(transpose(p.W_h), da));
    return {std::move(dx), std::move(dh_prev)};
}

} // namespace

StackGrads stack_backward(const ForwardCache& cache, const std::vector<Matrix>& d_preds,
                          const GruStack& stack) {
    if (static_cast<int>(d_preds.size()) != cache.timesteps) {
        throw UsageError("stack_backward: " + std::to_string(d_preds.size()) +
                         " pred gradients for " + std::to_string(cache.timesteps) + " timesteps");
    }
    const int layer_count = stack.layer_count();
    const int timesteps = cache.timesteps;

    StackGrads out;
    out.grads = GruStack::zeros_like(stack);
    out.d_init.h.reserve(layer_count);

    // Head: preds_t = w_out h_top_t + b_out.
    std::vector<Matrix> dh_seq;
    dh_seq.reserve(timesteps);
    Matrix w_out_t = transpose(stack.w_out);
    for (int t = 0; t < timesteps; ++t) {
        const Matrix& h_top = cache.steps[t][layer_count - 1].h;
        accumulate(out.grads.w_out, matmul(d_preds[t], transpose(h_top)));
        accumulate(out.grads.b_out, row_sums(d_preds[t]));
        dh_seq.push_back(matmul(w_out_t, d_preds[t]));
    }

    // Layers top-down; within a layer, time backward. dx of layer l feeds
    // dh of layer l-1 at the same timestep.
    std::vector<Matrix> d_init_rev;
    for (int l = layer_count - 1; l >= 0; --l) {
        Matrix dh_carry = Matrix::zeros(stack.layers[l].hidden_dim(), cache.batch);
        std::vector<Matrix> dx_seq(timesteps);
        for (int t = timesteps - 1; t >= 0; --t) {
            Matrix dh = add(dh_seq[t], dh_carry);
            auto [dx, dh_prev] =
                cell_backward(cache.steps[t][l], dh, stack.layers[l], out.grads.layers[l]);
            dx_seq[t] = std::move(dx);
            dh_carry = std::move(dh_prev);
        }
        d_init_rev.push_back(std::move(dh_carry));
        dh_seq = std::move(dx_seq);
    }
    for (auto it = d_init_rev.rbegin(); it != d_init_rev.rend(); ++it) {
        out.d_init.h.push_back(std::move(*it));
    }
    return out;
}

double predict(const GruStack& stack, const std::vector<Matrix>& window, const HiddenState& init) {
    auto res = stack_forward(window, init, stack);
    return res.preds.back()(0, 0);
}

namespace {

void write_array_line(std::ostream& out, const Matrix& m) {
    char buf[64];
    const double* p = m.data();
    for (int i = 0, n = m.size(); i < n; ++i) {
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), p[i]);
        if (i > 0) out.put(' ');
        out.write(buf, end - buf);
    }
    out.put('\n');
}

void read_array_line(std::istream& in, Matrix& m, const char* name) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(std::string("checkpoint: missing array line for ") + name);
    }
    const char* p = line.data();
    const char* end = p + line.size();
    double* mp = m.data();
    for (int i = 0, n = m.size(); i < n; ++i) {
        while (p < end && *p == ' ') ++p;
        auto [next, ec] = std::from_chars(p, end, mp[i]);
        if (ec != std::errc()) {
            throw ParseError(std::string("checkpoint: bad value in ") + name + " at index " +
                             std::to_string(i));
        }
        p = next;
    }
    while (p < end && *p == ' ') ++p;
    if (p != end) {
        throw ParseError(std::string("checkpoint: trailing data in ") + name);
    }
}

} // namespace

void write_checkpoint(const GruStack& stack, std::ostream& out) {
    stack.validate();
    out << "sgru-checkpoint 1 layers=" << stack.layer_count() << " input=" << stack.input_dim()
        << " hidden=";
    for (int l = 0; l < stack.layer_count(); ++l) {
        if (l > 0) out << ',';
        out << stack.layers[l].hidden_dim();
    }
    out << '\n';
    for (const Matrix* m : stack.param_arrays()) {
        write_array_line(out, *m);
    }
}

GruStack read_checkpoint(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError("checkpoint: empty file");
    std::istringstream hs(header);
    std::string magic, layers_kv, input_kv, hidden_kv;
    int version = 0;
    hs >> magic >> version >> layers_kv >> input_kv >> hidden_kv;
    if (magic != "sgru-checkpoint" || version != 1) {
        throw ParseError("checkpoint: unrecognized header: " + header);
    }
    auto kv_int = [](const std::string& kv, const char* key) {
        std::string prefix = std::string(key) + "=";
        if (kv.rfind(prefix, 0) != 0) {
            throw ParseError("checkpoint: expected " + prefix + "..., got " + kv);
        }
        return kv.substr(prefix.size());
    };
    int layer_count = std::stoi(kv_int(layers_kv, "layers"));
    int input_dim = std::stoi(kv_int(input_kv, "input"));
    std::vector<int> hidden_dims;
    {
        std::istringstream hd(kv_int(hidden_kv, "hidden"));
        std::string tok;
        while (std::getline(hd, tok, ',')) hidden_dims.push_back(std::stoi(tok));
    }
    if (static_cast<int>(hidden_dims.size()) != layer_count || layer_count < 1 || input_dim < 1) {
        throw ParseError("checkpoint: inconsistent header: " + header);
    }

    GruStack stack;
    int d = input_dim;
    for (int h : hidden_dims) {
        stack.layers.push_back(GruLayerParams::zeros(d, h));
        d = h;
    }
    stack.w_out = Matrix::zeros(1, d);
    stack.b_out = Matrix::zeros(1, 1);

    static const char* kNames[] = {"W_z", "U_z", "b_z", "W_r", "U_r", "b_r", "W_h", "U_h", "b_h"};
    auto arrays = stack.param_arrays();
    for (std::size_t i = 0; i < arrays.size(); ++i) {
        const char* name = i + 2 >= arrays.size() ? (i + 2 == arrays.size() ? "w_out" : "b_out")
                                                  : kNames[i % 9];
        read_array_line(in, *arrays[i], name);
    }
    stack.validate();
    return stack;
}

void save_checkpoint(const GruStack& stack, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open checkpoint for writing: " + path);
    write_checkpoint(stack, out);
    if (!out) throw UsageError("checkpoint write failed: " + path);
}

GruStack load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open checkpoint: " + path);
    return read_checkpoint(in);
}

} // namespace sgru
