#pragma once

#include <initializer_list>
#include <vector>

#include "sgru/random.hpp"

namespace sgru {

// Dense 2-D double matrix, row-major. The single numeric carrier for
// weights, activations and gradients. No broadcasting: bias addition is an
// explicit per-column add (add_col_bias) so shape mistakes fail loudly.
class Matrix {
public:
    Matrix() = default;
    Matrix(int rows, int cols, double fill = 0.0);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int size() const { return rows_ * cols_; }
    bool empty() const { return values_.empty(); }

    double& operator()(int r, int c) { return values_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return values_[static_cast<std::size_t>(r) * cols_ + c]; }

    double* data() { return values_.data(); }
    const double* data() const { return values_.data(); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    // Bitwise equality (shape and every entry).
    bool operator==(const Matrix& other) const = default;

    bool all_finite() const;

    static Matrix zeros(int rows, int cols) { return Matrix(rows, cols, 0.0); }
    static Matrix identity(int n);

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> values_;
};

std::string shape_str(const Matrix& m);

// Core arithmetic. All functions are pure; shape errors throw ShapeError
// naming both shapes.
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double s);
Matrix transpose(const Matrix& a);

// Elementwise nonlinearities.
Matrix sigmoid(const Matrix& a);
Matrix tanh_act(const Matrix& a);

// 1 - a, elementwise.
Matrix ones_minus(const Matrix& a);

// a + bias repeated per column; bias must be (a.rows, 1).
Matrix add_col_bias(const Matrix& a, const Matrix& bias);

// Row sums as an (a.rows, 1) column vector.
Matrix row_sums(const Matrix& a);

// In-place accumulate: a += b. Shape-checked.
void accumulate(Matrix& a, const Matrix& b);

// Glorot-uniform init: entries uniform in +-sqrt(6 / (rows + cols)).
Matrix glorot_init(int rows, int cols, RandomSource& rng);

} // namespace sgru
