#include "svsnn/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "svsnn/error.hpp"

namespace svsnn::numerics {

namespace {

void require_finite(const DenseMatrix& m, const char* who) {
  if (!m.all_finite()) throw InvalidInput(std::string(who) + ": matrix has non-finite entries");
}

void require_symmetric(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw InvalidInput("symmetric_eigen: matrix is not square");
  double scale = 0.0;
  for (double v : m.entries()) scale = std::max(scale, std::abs(v));
  const double tol = 1e-10 * std::max(scale, 1.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = i + 1; j < m.cols(); ++j) {
      if (std::abs(m(i, j) - m(j, i)) > tol) {
        throw InvalidInput("symmetric_eigen: asymmetric entry at (" + std::to_string(i) + ", " +
                           std::to_string(j) + ")");
      }
    }
  }
}

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

SymmetricEigen jacobi_eigen(const DenseMatrix& input, bool want_vectors, const JacobiOptions& opts) {
  require_finite(input, "symmetric_eigen");
  require_symmetric(input);
  const std::size_t n = input.rows();

  // Work on the symmetrized copy so tiny asymmetries cannot bias the result.
  DenseMatrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (input(i, j) + input(j, i));

  DenseMatrix v = want_vectors ? DenseMatrix::identity(n) : DenseMatrix{};

  double frob = 0.0;
  for (double x : a.entries()) frob += x * x;
  frob = std::sqrt(frob);
  const double target = opts.relative_tolerance * frob;

  bool converged = off_diagonal_norm(a) <= target;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;

        if (want_vectors) {
          for (std::size_t k = 0; k < n; ++k) {
            const double vkp = v(k, p);
            const double vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
    converged = off_diagonal_norm(a) <= target;
  }
  if (!converged) {
    throw ConvergenceError("symmetric_eigen: no convergence after " +
                           std::to_string(opts.max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

  SymmetricEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(order[i], order[i]);
  if (want_vectors) {
    out.vectors = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k) out.vectors(k, i) = v(k, order[i]);
  }
  return out;
}

}  // namespace

std::vector<double> symmetric_eigenvalues(const DenseMatrix& m, const JacobiOptions& opts) {
  return jacobi_eigen(m, false, opts).values;
}

SymmetricEigen symmetric_eigen(const DenseMatrix& m, const JacobiOptions& opts) {
  return jacobi_eigen(m, true, opts);
}

std::vector<double> singular_values(const DenseMatrix& m) {
  require_finite(m, "singular_values");
  if (m.rows() > m.cols()) return singular_values_one_sided_jacobi(m);
  auto eig = symmetric_eigenvalues(gram_rows(m));
  for (double& e : eig) e = std::sqrt(std::max(e, 0.0));
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

std::vector<double> singular_values_one_sided_jacobi(const DenseMatrix& m, const JacobiOptions& opts) {
  require_finite(m, "singular_values");
  // Orthogonalize the vectors along the shorter dimension.
  DenseMatrix w = m.rows() <= m.cols() ? m : m.transposed();
  const std::size_t n = w.rows();
  const std::size_t len = w.cols();

  auto dot = [&](std::size_t i, std::size_t j) {
    const auto ri = w.row(i);
    const auto rj = w.row(j);
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += ri[k] * rj[k];
    return s;
  };

  const double tol = std::max(opts.relative_tolerance, 1e-15);
  bool rotated = true;
  int sweep = 0;
  for (; sweep < opts.max_sweeps && rotated; ++sweep) {
    rotated = false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double alpha = dot(i, i);
        const double beta = dot(j, j);
        const double gamma = dot(i, j);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        auto ri = w.row(i);
        auto rj = w.row(j);
        for (std::size_t k = 0; k < len; ++k) {
          const double xi = ri[k];
          const double xj = rj[k];
          ri[k] = c * xi - s * xj;
          rj[k] = s * xi + c * xj;
        }
      }
    }
  }
  if (rotated) {
    throw ConvergenceError("singular_values_one_sided_jacobi: no convergence after " +
                           std::to_string(opts.max_sweeps) + " sweeps");
  }
  std::vector<double> sv(n);
  for (std::size_t i = 0; i < n; ++i) sv[i] = std::sqrt(dot(i, i));
  std::sort(sv.begin(), sv.end(), std::greater<>());
  return sv;
}

}  // namespace svsnn::numerics
