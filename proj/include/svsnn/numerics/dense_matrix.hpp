#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace svsnn::numerics {

// Row-major dense matrix of doubles.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> values);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return entries_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }

  std::span<const double> entries() const { return entries_; }
  std::span<double> entries() { return entries_; }

  bool all_finite() const;
  DenseMatrix transposed() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);

// m * m^T, exploiting symmetry of the result.
DenseMatrix gram_rows(const DenseMatrix& m);

}  // namespace svsnn::numerics
