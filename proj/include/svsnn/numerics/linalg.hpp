#pragma once

#include <vector>

#include "svsnn/numerics/dense_matrix.hpp"

namespace svsnn::numerics {

struct JacobiOptions {
  double relative_tolerance = 1e-12;
  int max_sweeps = 100;
};

struct SymmetricEigen {
  std::vector<double> values;  // descending
  DenseMatrix vectors;         // column i pairs with values[i]
};

// Cyclic Jacobi rotations. Throws InvalidInput for non-square, non-finite or
// asymmetric (beyond 1e-10 relative) input and ConvergenceError when the
// off-diagonal norm does not drop below tolerance * initial norm in time.
std::vector<double> symmetric_eigenvalues(const DenseMatrix& m, const JacobiOptions& opts = {});
SymmetricEigen symmetric_eigen(const DenseMatrix& m, const JacobiOptions& opts = {});

// min(rows, cols) singular values, descending. Wide or square inputs go
// through the eigenproblem of m * m^T; tall inputs use one-sided Jacobi.
std::vector<double> singular_values(const DenseMatrix& m);

// One-sided (Hestenes) Jacobi on the shorter dimension. Slower than the Gram
// route but keeps relative accuracy for small singular values.
std::vector<double> singular_values_one_sided_jacobi(const DenseMatrix& m,
                                                     const JacobiOptions& opts = {});

}  // namespace svsnn::numerics
