#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "finite_diff.hpp"
#include "oracle_gru.hpp"
#include "sgru/errors.hpp"
#include "sgru/gru.hpp"

using namespace sgru;

namespace {

std::vector<Matrix> random_seq(int timesteps, int dim, int batch, RandomSource& rng) {
    std::vector<Matrix> seq;
    for (int t = 0; t < timesteps; ++t) {
        Matrix x(dim, batch);
        for (int i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
        seq.push_back(std::move(x));
    }
    return seq;
}

oracle::Mat to_oracle(const Matrix& m) {
    oracle::Mat out(m.rows(), oracle::Vec(m.cols()));
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
    }
    return out;
}

oracle::Vec col_of(const Matrix& m, int col) {
    oracle::Vec v(m.rows());
    for (int r = 0; r < m.rows(); ++r) v[r] = m(r, col);
    return v;
}

oracle::StackParams to_oracle(const GruStack& s) {
    oracle::StackParams p;
    for (const auto& l : s.layers) {
        oracle::LayerParams lp;
        lp.W_z = to_oracle(l.W_z); lp.U_z = to_oracle(l.U_z); lp.b_z = col_of(l.b_z, 0);
        lp.W_r = to_oracle(l.W_r); lp.U_r = to_oracle(l.U_r); lp.b_r = col_of(l.b_r, 0);
        lp.W_h = to_oracle(l.W_h); lp.U_h = to_oracle(l.U_h); lp.b_h = col_of(l.b_h, 0);
        p.layers.push_back(std::move(lp));
    }
    for (int c = 0; c < s.w_out.cols(); ++c) p.w_out.push_back(s.w_out(0, c));
    p.b_out = s.b_out(0, 0);
    return p;
}

void offset_update_bias(GruStack& s, double offset) {
    for (auto& l : s.layers) {
        for (int i = 0; i < l.b_z.size(); ++i) l.b_z.data()[i] += offset;
    }
}

} // namespace

TEST_CASE("cell_forward with zero parameters is a fixed point") {
    auto p = GruLayerParams::zeros(3, 4);
    Matrix x(3, 2, 0.7);
    Matrix h0 = Matrix::zeros(4, 2);
    auto [h, cache] = cell_forward(x, h0, p);
    for (int i = 0; i < cache.z.size(); ++i) {
        CHECK(cache.z.data()[i] == 0.5);
        CHECK(cache.r.data()[i] == 0.5);
        CHECK(cache.c.data()[i] == 0.0);
        CHECK(h.data()[i] == 0.0);
    }
}

TEST_CASE("update gate saturation identities") {
    RandomSource rng(3);
    GruStack base = GruStack::glorot(3, {4, 4}, rng);
    auto seq = random_seq(1, 3, 2, rng);
    HiddenState init = HiddenState::zeros(base, 2);
    // Make h_prev nonzero so the two branches are distinguishable.
    for (auto& h : init.h) {
        for (int i = 0; i < h.size(); ++i) h.data()[i] = 0.3 + 0.01 * i;
    }

    SUBCASE("z forced to 1: new state equals the candidate") {
        GruStack s = base;
        offset_update_bias(s, 50.0);
        auto [h, cache] = cell_forward(seq[0], init.h[0], s.layers[0]);
        for (int i = 0; i < h.size(); ++i) {
            CHECK(std::abs(h.data()[i] - cache.c.data()[i]) < 1e-10);
        }
    }

    SUBCASE("z forced to 0: state passes through, input ignored") {
        GruStack s = base;
        offset_update_bias(s, -50.0);
        auto [h, cache] = cell_forward(seq[0], init.h[0], s.layers[0]);
        for (int i = 0; i < h.size(); ++i) {
            CHECK(std::abs(h.data()[i] - init.h[0].data()[i]) < 1e-10);
        }
        // Different input, same output.
        auto other = random_seq(1, 3, 2, rng);
        auto [h2, cache2] = cell_forward(other[0], init.h[0], s.layers[0]);
        for (int i = 0; i < h.size(); ++i) {
            CHECK(std::abs(h2.data()[i] - h.data()[i]) < 1e-10);
        }
    }
}

TEST_CASE("cell_forward shape errors") {
    auto p = GruLayerParams::zeros(3, 4);
    CHECK_THROWS_AS(cell_forward(Matrix(2, 2), Matrix(4, 2), p), ShapeError);
    CHECK_THROWS_AS(cell_forward(Matrix(3, 2), Matrix(3, 2), p), ShapeError);
    CHECK_THROWS_AS(cell_forward(Matrix(3, 2), Matrix(4, 3), p), ShapeError);
}

TEST_CASE("stack_forward degenerate case reduces to cell plus head") {
    RandomSource rng(5);
    GruStack s = GruStack::glorot(3, {4}, rng);
    auto seq = random_seq(1, 3, 2, rng);
    HiddenState init = HiddenState::zeros(s, 2);

    auto res = stack_forward(seq, init, s);
    auto [h, cache] = cell_forward(seq[0], init.h[0], s.layers[0]);
    Matrix expect = add_col_bias(matmul(s.w_out, h), s.b_out);
    CHECK(res.preds.size() == 1);
    CHECK(res.preds[0] == expect);
    CHECK(res.final_state.h[0] == h);
}

TEST_CASE("stack_forward rejects empty sequence") {
    RandomSource rng(6);
    GruStack s = GruStack::glorot(3, {4}, rng);
    CHECK_THROWS_AS(stack_forward({}, HiddenState::zeros(s, 1), s), UsageError);
}

TEST_CASE("stack_forward matches the scalar oracle") {
    // 2-layer, H = 3, T = 4, fixed seed, checked column by column.
    RandomSource rng(20240);
    GruStack s = GruStack::glorot(2, {3, 3}, rng);
    const int batch = 2;
    auto seq = random_seq(4, 2, batch, rng);
    HiddenState init = HiddenState::zeros(s, batch);

    auto res = stack_forward(seq, init, s);

    oracle::StackParams op = to_oracle(s);
    for (int b = 0; b < batch; ++b) {
        std::vector<oracle::Vec> oseq;
        for (const auto& x : seq) oseq.push_back(col_of(x, b));
        std::vector<oracle::Vec> oh{oracle::Vec(3, 0.0), oracle::Vec(3, 0.0)};
        oracle::Vec preds = oracle::run(op, oseq, oh);
        REQUIRE(preds.size() == res.preds.size());
        for (std::size_t t = 0; t < preds.size(); ++t) {
            CHECK(res.preds[t](0, b) == doctest::Approx(preds[t]).epsilon(1e-12));
        }
    }
}

TEST_CASE("splitting a sequence and threading the state is exact") {
    RandomSource rng(21);
    GruStack s = GruStack::glorot(3, {5, 4}, rng);
    const int timesteps = 7;
    auto seq = random_seq(timesteps, 3, 2, rng);
    HiddenState init = HiddenState::zeros(s, 2);
    auto whole = stack_forward(seq, init, s);

    for (int split = 1; split < timesteps; ++split) {
        std::vector<Matrix> head(seq.begin(), seq.begin() + split);
        std::vector<Matrix> tail(seq.begin() + split, seq.end());
        auto first = stack_forward(head, init, s);
        auto second = stack_forward(tail, first.final_state, s);
        for (int t = 0; t < split; ++t) {
            CHECK(first.preds[t] == whole.preds[t]); // bit-identical
        }
        for (int t = split; t < timesteps; ++t) {
            CHECK(second.preds[t - split] == whole.preds[t]);
        }
        CHECK(second.final_state == whole.final_state);
    }
}

TEST_CASE("zero pred gradients give zero parameter gradients") {
    RandomSource rng(22);
    GruStack s = GruStack::glorot(3, {4, 4}, rng);
    auto seq = random_seq(5, 3, 2, rng);
    auto res = stack_forward(seq, HiddenState::zeros(s, 2), s);
    std::vector<Matrix> d_preds(5, Matrix::zeros(1, 2));
    auto grads = stack_backward(res.cache, d_preds, s);
    for (const Matrix* m : grads.grads.param_arrays()) {
        for (int i = 0; i < m->size(); ++i) CHECK(m->data()[i] == 0.0);
    }
    for (const auto& h : grads.d_init.h) {
        for (int i = 0; i < h.size(); ++i) CHECK(h.data()[i] == 0.0);
    }
}

TEST_CASE("stack_backward rejects mismatched gradient count") {
    RandomSource rng(23);
    GruStack s = GruStack::glorot(2, {3}, rng);
    auto seq = random_seq(4, 2, 1, rng);
    auto res = stack_forward(seq, HiddenState::zeros(s, 1), s);
    std::vector<Matrix> d_preds(3, Matrix::zeros(1, 1));
    CHECK_THROWS_AS(stack_backward(res.cache, d_preds, s), UsageError);
}

TEST_CASE("analytic gradients match central finite differences") {
    // 2-layer, H = 4, T = 5, B = 2, three seeds.
    for (std::uint64_t seed : {101ULL, 202ULL, 303ULL}) {
        RandomSource rng(seed);
        GruStack s = GruStack::glorot(3, {4, 4}, rng);
        auto seq = random_seq(5, 3, 2, rng);
        HiddenState init = HiddenState::zeros(s, 2);

        // Random linear functional of the predictions.
        std::vector<Matrix> weights;
        for (int t = 0; t < 5; ++t) {
            Matrix w(1, 2);
            w(0, 0) = rng.uniform(-1.0, 1.0);
            w(0, 1) = rng.uniform(-1.0, 1.0);
            weights.push_back(w);
        }
        auto loss = [&](const GruStack& stack) {
            auto r = stack_forward(seq, init, stack);
            double total = 0.0;
            for (int t = 0; t < 5; ++t) {
                for (int b = 0; b < 2; ++b) total += weights[t](0, b) * r.preds[t](0, b);
            }
            return total;
        };

        auto fwd = stack_forward(seq, init, s);
        auto analytic = stack_backward(fwd.cache, weights, s);
        GruStack numeric = testutil::finite_diff_grads(s, loss, 1e-5);
        CHECK(testutil::max_grad_rel_err(analytic.grads, numeric) < 1e-5);
    }
}

TEST_CASE("gradient w.r.t. the initial state matches finite differences") {
    RandomSource rng(404);
    GruStack s = GruStack::glorot(2, {3, 3}, rng);
    auto seq = random_seq(4, 2, 2, rng);
    HiddenState init = HiddenState::zeros(s, 2);
    for (auto& h : init.h) {
        for (int i = 0; i < h.size(); ++i) h.data()[i] = rng.uniform(-0.5, 0.5);
    }
    std::vector<Matrix> weights;
    for (int t = 0; t < 4; ++t) {
        Matrix w(1, 2);
        w(0, 0) = rng.uniform(-1.0, 1.0);
        w(0, 1) = rng.uniform(-1.0, 1.0);
        weights.push_back(w);
    }
    auto fwd = stack_forward(seq, init, s);
    auto analytic = stack_backward(fwd.cache, weights, s);

    const double eps = 1e-5;
    for (std::size_t l = 0; l < init.h.size(); ++l) {
        for (int i = 0; i < init.h[l].size(); ++i) {
            HiddenState up = init, down = init;
            up.h[l].data()[i] += eps;
            down.h[l].data()[i] -= eps;
            auto eval = [&](const HiddenState& st) {
                auto r = stack_forward(seq, st, s);
                double total = 0.0;
                for (int t = 0; t < 4; ++t) {
                    for (int b = 0; b < 2; ++b) total += weights[t](0, b) * r.preds[t](0, b);
                }
                return total;
            };
            double numeric = (eval(up) - eval(down)) / (2.0 * eps);
            CHECK(testutil::grad_rel_err(analytic.d_init.h[l].data()[i], numeric) < 1e-5);
        }
    }
}

TEST_CASE("candidate gradients vanish when z is forced to 0") {
    RandomSource rng(24);
    GruStack s = GruStack::glorot(3, {4}, rng);
    offset_update_bias(s, -50.0);
    auto seq = random_seq(5, 3, 2, rng);
    auto res = stack_forward(seq, HiddenState::zeros(s, 2), s);
    std::vector<Matrix> d_preds;
    for (int t = 0; t < 5; ++t) {
        Matrix w(1, 2);
        w(0, 0) = rng.uniform(-1.0, 1.0);
        w(0, 1) = rng.uniform(-1.0, 1.0);
        d_preds.push_back(w);
    }
    auto grads = stack_backward(res.cache, d_preds, s);
    const auto& g = grads.grads.layers[0];
    for (const Matrix* m : {&g.W_h, &g.U_h, &g.b_h}) {
        for (int i = 0; i < m->size(); ++i) {
            CHECK(std::abs(m->data()[i]) < 1e-18);
        }
    }
}

TEST_CASE("hidden entries stay bounded from zero init over 10^4 steps") {
    RandomSource rng(25);
    GruStack s = GruStack::glorot(4, {8}, rng);

    // Inputs on the normalized feature scale: the strict open bound holds.
    Matrix h = Matrix::zeros(8, 1);
    double worst = 0.0;
    for (int step = 0; step < 10000; ++step) {
        Matrix x(4, 1);
        for (int i = 0; i < 4; ++i) x.data()[i] = rng.uniform(-2.0, 2.0);
        auto [h_new, cache] = cell_forward(x, h, s.layers[0]);
        h = std::move(h_new);
        for (int i = 0; i < h.size(); ++i) worst = std::max(worst, std::abs(h.data()[i]));
    }
    CHECK(worst < 1.0);

    // Arbitrary finite inputs: tanh may saturate to exactly +-1 in double
    // precision, so the bound closes but is never exceeded.
    h = Matrix::zeros(8, 1);
    worst = 0.0;
    for (int step = 0; step < 10000; ++step) {
        Matrix x(4, 1);
        for (int i = 0; i < 4; ++i) x.data()[i] = rng.uniform(-1e6, 1e6);
        auto [h_new, cache] = cell_forward(x, h, s.layers[0]);
        h = std::move(h_new);
        for (int i = 0; i < h.size(); ++i) worst = std::max(worst, std::abs(h.data()[i]));
        REQUIRE(h.all_finite());
    }
    CHECK(worst <= 1.0);
}

TEST_CASE("predict is the last forward prediction and is pure") {
    RandomSource rng(26);
    GruStack s = GruStack::glorot(3, {4, 4}, rng);
    auto seq = random_seq(6, 3, 1, rng);
    HiddenState init = HiddenState::zeros(s, 1);
    auto res = stack_forward(seq, init, s);
    double p1 = predict(s, seq, init);
    double p2 = predict(s, seq, init);
    CHECK(p1 == res.preds.back()(0, 0));
    CHECK(p1 == p2);
}

TEST_CASE("predict ignores the window when z is forced to 0") {
    RandomSource rng(27);
    GruStack s = GruStack::glorot(3, {4}, rng);
    offset_update_bias(s, -50.0);
    HiddenState init = HiddenState::zeros(s, 1);
    auto a = random_seq(5, 3, 1, rng);
    auto b = random_seq(5, 3, 1, rng);
    CHECK(predict(s, a, init) == doctest::Approx(predict(s, b, init)).epsilon(1e-12));
}

TEST_CASE("checkpoint round-trips bit-exactly") {
    RandomSource rng(31);
    GruStack s = GruStack::glorot(7, {5, 3}, rng);
    // Exercise awkward values.
    s.b_out(0, 0) = 0.1 + 0.2; // not exactly 0.3
    s.layers[0].b_z(0, 0) = 1e-308;
    s.layers[0].b_z(1, 0) = -12345.6789;

    std::stringstream buf;
    write_checkpoint(s, buf);
    GruStack loaded = read_checkpoint(buf);
    CHECK(loaded == s);
}

TEST_CASE("checkpoint file round-trip and errors") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "sgru_ckpt_test";
    fs::create_directories(dir);
    fs::path path = dir / "model.ckpt";

    RandomSource rng(32);
    GruStack s = GruStack::glorot(4, {6}, rng);
    save_checkpoint(s, path.string());
    CHECK(load_checkpoint(path.string()) == s);

    SUBCASE("truncated file") {
        std::stringstream buf;
        write_checkpoint(s, buf);
        std::string text = buf.str();
        std::stringstream cut(text.substr(0, text.size() / 2));
        CHECK_THROWS_AS(read_checkpoint(cut), ParseError);
    }
    SUBCASE("bad header") {
        std::stringstream bad("not-a-checkpoint 9\n");
        CHECK_THROWS_AS(read_checkpoint(bad), ParseError);
    }
    SUBCASE("missing path") {
        CHECK_THROWS_AS(load_checkpoint((dir / "absent.ckpt").string()), UsageError);
    }
    fs::remove_all(dir);
}

TEST_CASE("stack validate catches inconsistent chains") {
    RandomSource rng(33);
    GruStack s = GruStack::glorot(3, {4, 5}, rng);
    s.layers[1].W_z = Matrix::zeros(5, 9); // wrong input dim
    CHECK_THROWS_AS(s.validate(), ShapeError);
    GruStack t = GruStack::glorot(3, {4}, rng);
    t.w_out = Matrix::zeros(1, 7);
    CHECK_THROWS_AS(t.validate(), ShapeError);
}
