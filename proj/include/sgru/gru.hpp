#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "sgru/matrix.hpp"

namespace sgru {

// One GRU layer. Shapes: W_* (H, D), U_* (H, H), b_* (H, 1).
struct GruLayerParams {
    Matrix W_z, U_z, b_z; // update gate
    Matrix W_r, U_r, b_r; // reset gate
    Matrix W_h, U_h, b_h; // candidate

    int input_dim() const { return W_z.cols(); }
    int hidden_dim() const { return W_z.rows(); }

    bool operator==(const GruLayerParams&) const = default;

    static GruLayerParams zeros(int input_dim, int hidden_dim);
    // Glorot-uniform weights, zero biases.
    static GruLayerParams glorot(int input_dim, int hidden_dim, RandomSource& rng);
};

// Stacked GRU layers plus a linear scalar output head.
// Layer l consumes layer l-1's hidden sequence; layer 0 consumes the input.
struct GruStack {
    std::vector<GruLayerParams> layers;
    Matrix w_out; // (1, H_last)
    Matrix b_out; // (1, 1)

    int input_dim() const { return layers.front().input_dim(); }
    int top_hidden_dim() const { return layers.back().hidden_dim(); }
    int layer_count() const { return static_cast<int>(layers.size()); }

    static GruStack glorot(int input_dim, const std::vector<int>& hidden_dims, RandomSource& rng);
    // Same shapes, all entries zero. Used for gradients and optimizer moments.
    static GruStack zeros_like(const GruStack& other);

    // All parameter arrays in a fixed order (per layer: W_z U_z b_z W_r U_r
    // b_r W_h U_h b_h, then w_out, b_out).
    std::vector<Matrix*> param_arrays();
    std::vector<const Matrix*> param_arrays() const;

    // Checks chained dimensions; throws ShapeError on inconsistency.
    void validate() const;

    bool operator==(const GruStack& other) const = default;
};

// Per-layer hidden vectors, batch-width B: h[l] is (H_l, B).
struct HiddenState {
    std::vector<Matrix> h;

    int batch() const { return h.empty() ? 0 : h.front().cols(); }
    bool operator==(const HiddenState& other) const = default;

    static HiddenState zeros(const GruStack& stack, int batch);
};

// Activations one cell step keeps for the backward pass.
struct StepCache {
    Matrix x;      // (D, B) input to this layer at this step
    Matrix h_prev; // (H, B)
    Matrix z;      // (H, B) update gate
    Matrix r;      // (H, B) reset gate
    Matrix rh;     // (H, B) r o h_prev
    Matrix c;      // (H, B) candidate
    Matrix h;      // (H, B) new hidden
};

// One StepCache per (timestep, layer) of the forward pass it came from.
struct ForwardCache {
    int timesteps = 0;
    int batch = 0;
    std::vector<std::vector<StepCache>> steps; // [t][layer]
};

// z = sigmoid(W_z x + U_z h_prev + b_z)
// r = sigmoid(W_r x + U_r h_prev + b_r)
// c = tanh(W_h x + U_h (r o h_prev) + b_h)
// h = z o c + (1 - z) o h_prev
std::pair<Matrix, StepCache> cell_forward(const Matrix& x, const Matrix& h_prev,
                                          const GruLayerParams& p);

struct StackForwardResult {
    std::vector<Matrix> preds; // T of (1, B): w_out h_top_t + b_out
    HiddenState final_state;   // hidden state of every layer at t = T-1
    ForwardCache cache;
};

StackForwardResult stack_forward(const std::vector<Matrix>& seq, const HiddenState& init,
                                 const GruStack& stack);

struct StackGrads {
    GruStack grads;     // same shapes as the stack
    HiddenState d_init; // gradient w.r.t. the initial state (flow stops there)
};

// Exact reverse accumulation through time and layers for the forward pass
// recorded in `cache`, driven by d_preds (dLoss/dPred per timestep).
StackGrads stack_backward(const ForwardCache& cache, const std::vector<Matrix>& d_preds,
                          const GruStack& stack);

// Prediction at the final timestep for a single window (column batch allowed).
double predict(const GruStack& stack, const std::vector<Matrix>& window, const HiddenState& init);

// Plain-text checkpoint: one header line with dims and layer count, then one
// line of whitespace-separated decimals per parameter array (shortest
// round-trip formatting, so reload is bit-exact).
void save_checkpoint(const GruStack& stack, const std::string& path);
GruStack load_checkpoint(const std::string& path);
void write_checkpoint(const GruStack& stack, std::ostream& out);
GruStack read_checkpoint(std::istream& in);

} // namespace sgru
