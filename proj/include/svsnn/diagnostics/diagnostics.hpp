#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <vector>

#include "svsnn/model/field_model.hpp"
#include "svsnn/numerics/dense_matrix.hpp"
#include "svsnn/problems/problem.hpp"

namespace svsnn::diagnostics {

// One row per (point, equation), point-major; columns follow the flat
// parameter vector. Throws DiagnosticError for a non-finite row.
numerics::DenseMatrix assemble_jacobian(const model::FieldModel& m, const problems::PdeProblem& p,
                                        problems::OperatorKind op, std::span<const model::ConstraintPoint> points,
                                        int workers = 1);

// Smallest k whose leading k squared values hold at least eta of the energy.
std::size_t effective_rank(std::span<const double> sigma, double eta = 0.99);
// Count of sigma_i > rel * sigma_1.
std::size_t algebraic_rank(std::span<const double> sigma, double rel = 1e-10);
// sigma_1 / sigma_r with r the algebraic rank.
double condition_number(std::span<const double> sigma);

struct JacobianReport {
  problems::OperatorKind op = problems::OperatorKind::PDE;
  std::size_t rows = 0, cols = 0;
  std::vector<double> sigma;  // descending
  double eta = 0.99;
  std::size_t r_eff = 0;
  std::size_t rank = 0;
  double cond = 0.0;
  double residual_norm = 0.0;
};

JacobianReport jacobian_report(problems::OperatorKind op, const numerics::DenseMatrix& j,
                               std::span<const double> residuals, double eta = 0.99);

struct NtkReport {
  std::vector<double> eigenvalues;  // of J J^T, descending
  std::vector<double> sigma;        // of J, computed independently
  double cond = 0.0;                // lambda_1 / lambda_r
  // max_i |sqrt(lambda_i) - sigma_i| / sigma_i over the algebraic rank.
  double sigma_check = 0.0;
  // cond(K) / cond(J)^2.
  double cond_ratio = 0.0;
  // Directions at the 10th and 90th percentile of the nonzero spectrum and
  // the ratio of their residual decay times, (sigma_low / sigma_high)^2.
  std::size_t low_index = 0, high_index = 0;
  double bias_ratio = 0.0;
};

NtkReport ntk_from_jacobian(const numerics::DenseMatrix& j);

// r_i(t) = r_i(0) exp(-lambda_i t); row per time, column per direction.
numerics::DenseMatrix simulate_residual_decay(std::span<const double> eigenvalues, std::span<const double> r0,
                                              std::span<const double> times);

struct CollapseSummary {
  bool collapsed = false;
  std::size_t r_eff = 0;   // at eta = 0.99
  std::size_t limit = 0;   // min(rows, cols)
  double fraction = 0.05;
  std::string summary;
};

CollapseSummary collapse_indicator(const JacobianReport& r, double fraction = 0.05);

// At most cap points, chosen by stream "diagnostics" of seed and kept in their
// original order.
std::vector<model::ConstraintPoint> select_rows(std::span<const model::ConstraintPoint> points, std::size_t cap,
                                                std::uint64_t seed, problems::OperatorKind op);

struct DiagnoseOptions {
  std::size_t row_cap = 512;
  double eta = 0.99;
  double collapse_fraction = 0.05;
  std::uint64_t seed = 0;
  int workers = 1;
};

struct OperatorDiagnostics {
  JacobianReport jacobian;
  NtkReport ntk;
  CollapseSummary collapse;
};

std::vector<OperatorDiagnostics> diagnose(const model::FieldModel& m, const problems::PdeProblem& p,
                                          const problems::TrainingPoints& points, const DiagnoseOptions& opts = {});

// svd_<op>.csv: header "sigma", one descending value per row.
void write_spectrum_csv(const std::filesystem::path& path, std::span<const double> sigma);
nlohmann::ordered_json diagnostics_json(std::span<const OperatorDiagnostics> d, const DiagnoseOptions& opts);

}  // namespace svsnn::diagnostics
