#include "sgru/matrix.hpp"

#include <cmath>
#include <string>

#include "sgru/errors.hpp"

namespace sgru {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    }
}

} // namespace

Matrix::Matrix(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) {
        throw UsageError("Matrix: dimensions must be positive, got " + std::to_string(rows) + "x" +
                         std::to_string(cols));
    }
    values_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    if (rows_ < 1 || cols_ < 1) {
        throw UsageError("Matrix: empty initializer");
    }
    values_.reserve(static_cast<std::size_t>(rows_) * cols_);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != cols_) {
            throw ShapeError("Matrix: ragged initializer rows");
        }
        values_.insert(values_.end(), row.begin(), row.end());
    }
}

bool Matrix::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix Matrix::identity(int n) {
    Matrix m(n, n, 0.0);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::string shape_str(const Matrix& m) {
    return "(" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + ")";
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ, " + shape_str(a) + " x " + shape_str(b));
    }
    const int n = a.rows(), k = a.cols(), m = b.cols();
    Matrix out(n, m, 0.0);
    const double* ap = a.data();
    const double* bp = b.data();
    double* op = out.data();
    // i-k-j order: the inner loop runs along contiguous rows of b and out.
    for (int i = 0; i < n; ++i) {
        double* orow = op + static_cast<std::size_t>(i) * m;
        const double* arow = ap + static_cast<std::size_t>(i) * k;
        for (int kk = 0; kk < k; ++kk) {
            const double aik = arow[kk];
            const double* brow = bp + static_cast<std::size_t>(kk) * m;
            for (int j = 0; j < m; ++j) {
                orow[j] += aik * brow[j];
            }
        }
    }
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    Matrix out = a;
    double* op = out.data();
    const double* bp = b.data();
    for (int i = 0, n = a.size(); i < n; ++i) op[i] += bp[i];
    return out;
}

Matrix sub(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "sub");
    Matrix out = a;
    double* op = out.data();
    const double* bp = b.data();
    for (int i = 0, n = a.size(); i < n; ++i) op[i] -= bp[i];
    return out;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "hadamard");
    Matrix out = a;
    double* op = out.data();
    const double* bp = b.data();
    for (int i = 0, n = a.size(); i < n; ++i) op[i] *= bp[i];
    return out;
}

Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    double* op = out.data();
    for (int i = 0, n = a.size(); i < n; ++i) op[i] *= s;
    return out;
}

Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows(), 0.0);
    for (int r = 0; r < a.rows(); ++r) {
        for (int c = 0; c < a.cols(); ++c) {
            out(c, r) = a(r, c);
        }
    }
    return out;
}

Matrix sigmoid(const Matrix& a) {
    Matrix out = a;
    double* op = out.data();
    for (int i = 0, n = a.size(); i < n; ++i) op[i] = 1.0 / (1.0 + std::exp(-op[i]));
    return out;
}

Matrix tanh_act(const Matrix& a) {
    Matrix out = a;
    double* op = out.data();
    for (int i = 0, n = a.size(); i < n; ++i) op[i] = std::tanh(op[i]);
    return out;
}

Matrix ones_minus(const Matrix& a) {
    Matrix out = a;
    double* op = out.data();
    for (int i = 0, n = a.size(); i < n; ++i) op[i] = 1.0 - op[i];
    return out;
}

Matrix add_col_bias(const Matrix& a, const Matrix& bias) {
    if (bias.rows() != a.rows() || bias.cols() != 1) {
        throw ShapeError("add_col_bias: bias " + shape_str(bias) + " does not match " + shape_str(a));
    }
    Matrix out = a;
    for (int r = 0; r < a.rows(); ++r) {
        const double b = bias(r, 0);
        for (int c = 0; c < a.cols(); ++c) out(r, c) += b;
    }
    return out;
}

Matrix row_sums(const Matrix& a) {
    Matrix out(a.rows(), 1, 0.0);
    for (int r = 0; r < a.rows(); ++r) {
        double s = 0.0;
        for (int c = 0; c < a.cols(); ++c) s += a(r, c);
        out(r, 0) = s;
    }
    return out;
}

void accumulate(Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "accumulate");
    double* ap = a.data();
    const double* bp = b.data();
    for (int i = 0, n = a.size(); i < n; ++i) ap[i] += bp[i];
}

Matrix glorot_init(int rows, int cols, RandomSource& rng) {
    const double limit = std::sqrt(6.0 / (rows + cols));
    Matrix out(rows, cols, 0.0);
    double* op = out.data();
    for (int i = 0, n = out.size(); i < n; ++i) op[i] = rng.uniform(-limit, limit);
    return out;
}

} // namespace sgru
