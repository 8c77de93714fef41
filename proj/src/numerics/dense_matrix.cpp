#include "svsnn/numerics/dense_matrix.hpp"

#include <Eigen/Core>
#include <cmath>
#include <string>

#include "svsnn/error.hpp"

namespace svsnn::numerics {

namespace {
using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows * cols) {
    throw InvalidInput("DenseMatrix: " + std::to_string(entries_.size()) + " entries for a " +
                       std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> values) {
  DenseMatrix m(values.size(), values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  return m;
}

bool DenseMatrix::all_finite() const {
  for (double v : entries_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw InvalidInput("multiply: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  Eigen::Map<const RowMajor> ma(a.entries().data(), a.rows(), a.cols());
  Eigen::Map<const RowMajor> mb(b.entries().data(), b.rows(), b.cols());
  Eigen::Map<RowMajor> mo(out.entries().data(), out.rows(), out.cols());
  mo.noalias() = ma * mb;
  return out;
}

DenseMatrix gram_rows(const DenseMatrix& m) {
  const auto n = m.rows();
  DenseMatrix out(n, n);
  if (n == 0) return out;
  Eigen::Map<const RowMajor> mm(m.entries().data(), m.rows(), m.cols());
  RowMajor g = RowMajor::Zero(n, n);
  g.selfadjointView<Eigen::Lower>().rankUpdate(mm);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      out(i, j) = g(i, j);
      out(j, i) = g(i, j);
    }
  }
  return out;
}

}  // namespace svsnn::numerics
