#include "sdae/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sdae/error.hpp"

namespace sdae {
namespace {

bool finite_range(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

void require_finite(std::span<const double> xs, const char* what) {
  if (!finite_range(xs)) throw NumericError(std::string(what) + " contains a non-finite entry");
}

std::string dims(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Vector::Vector(std::size_t n, double fill) : data_(n, fill) { require_finite(data_, "vector"); }

Vector::Vector(std::vector<double> data) : data_(std::move(data)) {
  require_finite(data_, "vector");
}

Vector::Vector(std::initializer_list<double> values) : data_(values) {
  require_finite(data_, "vector");
}

bool Vector::all_finite() const noexcept { return finite_range(data_); }

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  require_finite(data_, "matrix");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix " + dims(rows_, cols_) + " given " + std::to_string(data_.size()) +
                     " values");
  }
  require_finite(data_, "matrix");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ShapeError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
  require_finite(data_, "matrix");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

bool Matrix::all_finite() const noexcept { return finite_range(data_); }

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: lengths " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw ShapeError("axpy: lengths " + std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  }
  const double* xp = x.data();
  double* yp = y.data();
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) yp[i] += alpha * xp[i];
}

Vector matvec(const Matrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    throw ShapeError("matvec: matrix is " + dims(m.rows(), m.cols()) + " but vector has length " +
                     std::to_string(v.size()));
  }
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), v);
  return Vector(std::move(out));
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

void affine_rows(const Matrix& w, std::span<const double> bias, const Matrix& in, Matrix& out) {
  if (w.cols() != in.cols() || bias.size() != w.rows()) {
    throw ShapeError("affine: weights " + dims(w.rows(), w.cols()) + ", bias " +
                     std::to_string(bias.size()) + ", input " + dims(in.rows(), in.cols()));
  }
  if (out.rows() != in.rows() || out.cols() != w.rows()) out = Matrix(in.rows(), w.rows());
  // Walking w^T row by row keeps the inner loop contiguous while each output
  // still accumulates its terms in ascending input index, exactly like dot().
  const Matrix wt = transpose(w);
  for (std::size_t b = 0; b < in.rows(); ++b) {
    auto acc = out.row(b);
    std::fill(acc.begin(), acc.end(), 0.0);
    const auto x = in.row(b);
    for (std::size_t k = 0; k < x.size(); ++k) {
      // A zero term cannot change a partial sum that started at +0.0.
      if (x[k] != 0.0) axpy(x[k], wt.row(k), acc);
    }
    for (std::size_t j = 0; j < acc.size(); ++j) acc[j] += bias[j];
  }
}

void affine_rows_transposed(const Matrix& w, std::span<const double> bias, const Matrix& in,
                            Matrix& out) {
  if (w.rows() != in.cols() || bias.size() != w.cols()) {
    throw ShapeError("affine (transposed): weights " + dims(w.rows(), w.cols()) + ", bias " +
                     std::to_string(bias.size()) + ", input " + dims(in.rows(), in.cols()));
  }
  if (out.rows() != in.rows() || out.cols() != w.cols()) out = Matrix(in.rows(), w.cols());
  for (std::size_t b = 0; b < in.rows(); ++b) {
    auto acc = out.row(b);
    std::fill(acc.begin(), acc.end(), 0.0);
    const auto y = in.row(b);
    for (std::size_t j = 0; j < y.size(); ++j) {
      if (y[j] != 0.0) axpy(y[j], w.row(j), acc);
    }
    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += bias[k];
  }
}

Matrix gather_rows(const Matrix& src, std::span<const std::size_t> indices) {
  Matrix out(indices.size(), src.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= src.rows()) {
      throw ArgumentError("gather_rows: index " + std::to_string(indices[i]) + " out of " +
                          std::to_string(src.rows()) + " rows");
    }
    const auto r = src.row(indices[i]);
    std::copy(r.begin(), r.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace sdae
