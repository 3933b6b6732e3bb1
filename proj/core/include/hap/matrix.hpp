#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hap {

// Thrown when operand shapes do not conform.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Thrown when a value leaves a primitive's documented domain (e.g. log of a
// non-positive input).
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown on malformed or inconsistent data files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Thrown when a computation produces NaN/Inf where finiteness is required.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dense row-major matrix of doubles. The only value type the numeric core
// traffics in; graphs, features, parameters and gradients are all Matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
    if (rows < 1 || cols < 1) {
      throw ShapeError("Matrix: dimensions must be >= 1, got " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  Matrix(int rows, int cols, std::vector<double> values)
      : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows < 1 || cols < 1 ||
        data_.size() != static_cast<size_t>(rows) * cols) {
      throw ShapeError("Matrix: value count does not match " +
                       std::to_string(rows) + "x" + std::to_string(cols));
    }
  }
  // Row-of-rows initializer, mostly for tests and fixtures.
  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = static_cast<int>(rows.size());
    if (rows_ == 0) throw ShapeError("Matrix: empty initializer");
    cols_ = static_cast<int>(rows.begin()->size());
    data_.reserve(static_cast<size_t>(rows_) * cols_);
    for (const auto& r : rows) {
      if (static_cast<int>(r.size()) != cols_)
        throw ShapeError("Matrix: ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }
  static Matrix ones(int rows, int cols) { return Matrix(rows, cols, 1.0); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& at(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double at(int i, int j) const {
    return data_[static_cast<size_t>(i) * cols_ + j];
  }
  double& operator[](size_t k) { return data_[k]; }
  double operator[](size_t k) const { return data_[k]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs_diff(const Matrix& o) const {
    if (!same_shape(o))
      throw ShapeError("max_abs_diff: shapes differ");
    double m = 0.0;
    for (size_t k = 0; k < data_.size(); ++k)
      m = std::max(m, std::fabs(data_[k] - o.data_[k]));
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace hap
