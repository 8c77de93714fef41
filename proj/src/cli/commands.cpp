#include "svsnn/cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <thread>

#include "svsnn/error.hpp"
#include "svsnn/io/checkpoint.hpp"
#include "svsnn/model/mlp_kernel.hpp"
#include "svsnn/model/svsnn_model.hpp"

namespace svsnn::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_json(const fs::path& path, const json& j) {
  std::ofstream f(path);
  f << j.dump(2) << '\n';
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

json options_json(const problems::ProblemOptions& o) {
  return {{"reynolds", o.reynolds}, {"tg_boundary", o.tg_boundary == problems::TgBoundary::Exact ? "exact" : "periodic"}};
}

problems::ProblemOptions options_from(const nlohmann::json& j) {
  problems::ProblemOptions o;
  if (!j.is_object()) return o;
  o.reynolds = j.value("reynolds", o.reynolds);
  o.tg_boundary = j.value("tg_boundary", std::string("periodic")) == "exact" ? problems::TgBoundary::Exact
                                                                              : problems::TgBoundary::Periodic;
  return o;
}

json metrics_json(const problems::PdeProblem& p, const std::vector<problems::ErrorMetrics>& m) {
  json rel = json::object(), mx = json::object();
  for (std::size_t f = 0; f < p.field_names.size(); ++f) {
    rel[p.field_names[f]] = f < m.size() ? number_or_null(m[f].rel_l2) : json(nullptr);
    mx[p.field_names[f]] = f < m.size() ? number_or_null(m[f].max_abs) : json(nullptr);
  }
  return {{"rel_l2", rel}, {"max_abs", mx}};
}

void check_fit(const model::FieldModel& m, const problems::PdeProblem& p) {
  if (m.spatial_dim() != p.spatial_dim || m.temporal() != p.temporal || m.field_count() != p.field_count()) {
    throw ConfigurationError("checkpoint model does not fit problem " + p.id);
  }
}

// Trains, streaming records; returns summary.json. On a non-finite loss the
// records written so far stay on disk and summary.json records the failure.
json run_training(const RunConfig& cfg, std::ostream& log, std::mutex* log_mutex = nullptr) {
  const auto p = problems::make_problem(cfg.problem, cfg.problem_options);
  auto m = training::make_model(cfg.model, p, cfg.train.seed);
  fs::create_directories(cfg.out_dir);
  std::ofstream records(cfg.out_dir / "records.jsonl", std::ios::trunc);
  if (!records) throw std::runtime_error("cannot write " + (cfg.out_dir / "records.jsonl").string());

  auto say = [&](const std::string& s) {
    if (log_mutex) {
      std::lock_guard lock(*log_mutex);
      log << s << std::endl;
    } else {
      log << s << std::endl;
    }
  };
  say(p.id + ": " + m->kind() + " with " + std::to_string(m->parameter_count()) + " parameters, " +
      std::to_string(cfg.train.epochs) + " epochs -> " + cfg.out_dir.string());

  json summary;
  summary["problem"] = p.id;
  summary["model"] = m->kind();
  summary["params"] = m->parameter_count();
  summary["epochs"] = cfg.train.epochs;
  summary["seed"] = cfg.train.seed;

  training::TrainResult result;
  try {
    result = training::train(*m, p, cfg.train, [&](const training::TrainRecord& r) {
      records << training::record_json(r, p.field_names).dump() << '\n';
      records.flush();
      std::ostringstream os;
      os << "  epoch " << r.epoch << "  loss " << std::setprecision(4) << r.loss_total;
      if (!r.metrics.empty()) os << "  rel_l2(" << p.field_names[0] << ") " << r.metrics[0].rel_l2;
      say(os.str());
    });
  } catch (const training::NonFiniteLoss& e) {
    summary["status"] = "non-finite";
    summary["error"] = {{"epoch", e.epoch}, {"component", e.component}, {"magnitude", number_or_null(e.magnitude)},
                        {"message", e.what()}};
    write_json(cfg.out_dir / "summary.json", summary);
    throw;
  }

  json header = {{"problem", p.id},
                 {"problem_options", options_json(cfg.problem_options)},
                 {"seed", cfg.train.seed},
                 {"epochs", cfg.train.epochs},
                 {"points", {{"ic", cfg.train.points.ic}, {"pde", cfg.train.points.pde}, {"bc", cfg.train.points.bc}}}};
  io::write_checkpoint(cfg.out_dir / "checkpoint.bin", io::make_checkpoint(*m, nlohmann::json::parse(header.dump())));

  const auto& last = result.records.back();
  summary["status"] = "ok";
  summary["final"] = {{"loss_ic", last.losses.ic ? json(*last.losses.ic) : json(nullptr)},
                      {"loss_pde", last.losses.pde ? json(*last.losses.pde) : json(nullptr)},
                      {"loss_bc", last.losses.bc ? json(*last.losses.bc) : json(nullptr)},
                      {"loss_total", number_or_null(last.loss_total)}};
  summary["metrics"] = metrics_json(p, last.metrics);
  summary["wall_seconds"] = result.wall_seconds;
  write_json(cfg.out_dir / "summary.json", summary);
  return summary;
}

struct Restored {
  io::Checkpoint ck;
  std::unique_ptr<model::FieldModel> model;
  problems::PdeProblem problem;
};

Restored restore(const fs::path& checkpoint, const std::optional<std::string>& problem) {
  Restored r;
  r.ck = io::read_checkpoint(checkpoint);
  r.model = io::restore_model(r.ck);
  std::string id;
  if (problem) id = *problem;
  else if (r.ck.header.contains("problem")) id = r.ck.header["problem"].get<std::string>();
  else throw ConfigurationError("checkpoint names no problem; pass --problem");
  r.problem = problems::make_problem(id, options_from(r.ck.header.value("problem_options", nlohmann::json())));
  check_fit(*r.model, r.problem);
  return r;
}

}  // namespace

void cmd_train(const RunConfig& cfg, std::ostream& log) { run_training(cfg, log); }

bool cmd_evaluate(const EvaluateRequest& req, std::ostream& log) {
  const auto r = restore(req.checkpoint, req.problem);
  const auto& p = r.problem;
  const auto grid = problems::make_eval_grid(p, req.grid);
  fs::create_directories(req.out_dir);
  bool finite = true;
  std::vector<problems::ErrorMetrics> metrics;
  for (int f = 0; f < p.field_count(); ++f) {
    const auto pred = problems::predict(*r.model, grid.sites, f);
    std::vector<double> exact;
    if (p.has_exact()) {
      exact = problems::exact_values(p, grid.sites, f);
      metrics.push_back(problems::field_metrics(p, f, pred, exact));
      finite = finite && std::isfinite(metrics.back().rel_l2) && std::isfinite(metrics.back().max_abs);
    }
    const auto path = req.out_dir / ("field_" + p.field_names[f] + ".csv");
    std::ofstream csv(path);
    csv << std::setprecision(17);
    csv << "x";
    if (p.spatial_dim > 1) csv << ",y";
    if (p.temporal) csv << ",t";
    csv << ",predicted";
    if (p.has_exact()) csv << ",exact,abs_error";
    csv << '\n';
    for (std::size_t i = 0; i < grid.sites.size(); ++i) {
      const auto& s = grid.sites[i];
      csv << s.x[0];
      if (p.spatial_dim > 1) csv << ',' << s.x[1];
      if (p.temporal) csv << ',' << s.t;
      csv << ',' << pred[i];
      if (p.has_exact()) csv << ',' << exact[i] << ',' << std::abs(pred[i] - exact[i]);
      csv << '\n';
      finite = finite && std::isfinite(pred[i]);
    }
    if (!csv) throw std::runtime_error("cannot write " + path.string());
  }
  json out;
  out["problem"] = p.id;
  out["points"] = grid.sites.size();
  const auto mj = metrics_json(p, metrics);
  out["rel_l2"] = mj["rel_l2"];
  out["max_abs"] = mj["max_abs"];
  write_json(req.out_dir / "metrics.json", out);
  log << "evaluated " << p.id << " on " << grid.sites.size() << " points -> " << req.out_dir.string() << std::endl;
  return finite;
}

void cmd_diagnose(const DiagnoseRequest& req, std::ostream& log) {
  const auto r = restore(req.checkpoint, req.problem);
  const auto& p = r.problem;
  const auto& h = r.ck.header;
  const std::uint64_t train_seed = h.value("seed", std::uint64_t{0});
  problems::PointCounts counts = training::default_config(p).points;
  if (h.contains("points")) {
    counts.ic = h["points"].value("ic", counts.ic);
    counts.pde = h["points"].value("pde", counts.pde);
    counts.bc = h["points"].value("bc", counts.bc);
  }
  const auto points = problems::sample_points(p, counts, train_seed);
  auto opts = req.options;
  opts.seed = req.seed.value_or(train_seed);
  const auto d = diagnostics::diagnose(*r.model, p, points, opts);
  fs::create_directories(req.out_dir);
  double check = 0.0;
  for (const auto& x : d) {
    diagnostics::write_spectrum_csv(req.out_dir / ("svd_" + std::string(problems::operator_name(x.jacobian.op)) + ".csv"),
                                    x.jacobian.sigma);
    check = std::max(check, x.ntk.sigma_check);
    log << x.collapse.summary << ", cond " << x.jacobian.cond << std::endl;
  }
  json out;
  out["problem"] = p.id;
  out["model"] = r.model->kind();
  out["params"] = r.model->parameter_count();
  const auto body = diagnostics::diagnostics_json(d, opts);
  for (const auto& [k, v] : body.items()) out[k] = v;
  out["ntk_check_residual"] = check;
  write_json(req.out_dir / "diag.json", out);
}

bool cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  const auto& s = cfg.sweep;
  if (s.empty()) throw ConfigurationError("sweep: no axes given; set at least one of sweep.modes, sweep.w_char, sweep.sigma");
  const auto p = problems::make_problem(cfg.problem, cfg.problem_options);

  struct Cell {
    std::optional<int> modes;
    std::optional<double> w_char, sigma;
  };
  std::vector<Cell> cells;
  const auto opt_ints = [](const std::vector<int>& v) {
    std::vector<std::optional<int>> o(v.begin(), v.end());
    if (o.empty()) o.emplace_back();
    return o;
  };
  const auto opt_reals = [](const std::vector<double>& v) {
    std::vector<std::optional<double>> o(v.begin(), v.end());
    if (o.empty()) o.emplace_back();
    return o;
  };
  for (auto n : opt_ints(s.modes))
    for (auto w : opt_reals(s.w_char))
      for (auto sg : opt_reals(s.sigma)) cells.push_back({n, w, sg});

  std::vector<json> summaries(cells.size());
  std::vector<std::string> status(cells.size(), "ok");
  std::mutex log_mutex;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      RunConfig c = cfg;
      c.out_dir = cfg.out_dir / ("cell_" + std::to_string(i));
      if (cells[i].modes) c.model.modes = *cells[i].modes;
      if (cells[i].w_char) c.model.frequency.w_char = {*cells[i].w_char};
      if (cells[i].sigma) c.model.frequency.sigma = {*cells[i].sigma};
      try {
        summaries[i] = run_training(c, log, &log_mutex);
      } catch (const std::exception& e) {
        status[i] = dynamic_cast<const training::NonFiniteLoss*>(&e) ? "non-finite" : "error";
        std::lock_guard lock(log_mutex);
        log << "cell " << i << " failed: " << e.what() << std::endl;
      }
    }
  };
  {
    const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(std::max(s.jobs, 1)), cells.size());
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
  }

  fs::create_directories(cfg.out_dir);
  std::ofstream csv(cfg.out_dir / "sweep.csv");
  csv << std::setprecision(17);
  csv << "cell,modes,w_char,sigma,params,loss_total,loss_ic,loss_pde,loss_bc";
  for (const auto& f : p.field_names) csv << ",rel_l2_" << f;
  for (const auto& f : p.field_names) csv << ",max_abs_" << f;
  csv << ",wall_seconds,status\n";
  const auto cellval = [](const json& j) -> std::string {
    if (j.is_null()) return "";
    std::ostringstream os;
    os << std::setprecision(17) << j.get<double>();
    return os.str();
  };
  bool ok = true;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const auto& sm = summaries[i];
    const bool have = !sm.is_null() && sm.contains("final");
    const int modes = c.modes.value_or(cfg.model.modes.value_or(p.recommended.modes));
    csv << i << ',' << modes << ',';
    if (c.w_char) csv << *c.w_char;
    csv << ',';
    if (c.sigma) csv << *c.sigma;
    csv << ',' << (have ? std::to_string(sm["params"].get<std::size_t>()) : std::string());
    for (const auto* k : {"loss_total", "loss_ic", "loss_pde", "loss_bc"}) csv << ',' << (have ? cellval(sm["final"][k]) : "");
    for (const auto* k : {"rel_l2", "max_abs"})
      for (const auto& f : p.field_names) csv << ',' << (have ? cellval(sm["metrics"][k][f]) : "");
    csv << ',' << (have ? cellval(sm["wall_seconds"]) : "") << ',' << status[i] << '\n';
    ok = ok && status[i] == "ok";
  }
  if (!csv) throw std::runtime_error("cannot write sweep.csv");
  return ok;
}

void cmd_list_problems(std::ostream& out) {
  out << std::left << std::setw(20) << "id" << std::setw(5) << "dim" << std::setw(6) << "time" << std::setw(10) << "fields"
      << std::setw(9) << "params" << std::setw(10) << "baseline" << "title\n";
  for (const auto& id : problems::problem_ids()) {
    const auto p = problems::make_problem(id);
    const auto& rec = p.recommended;
    const auto params = model::count_parameters(model::SvSnnConfig{rec.modes, rec.k, p.temporal, p.field_count()});
    std::string fields;
    for (const auto& f : p.field_names) fields += (fields.empty() ? "" : ",") + f;
    out << std::setw(20) << id << std::setw(5) << p.spatial_dim << std::setw(6) << (p.temporal ? "yes" : "no")
        << std::setw(10) << fields << std::setw(9) << params << std::setw(10)
        << model::mlp_count_parameters(rec.baseline_widths) << p.title << '\n';
  }
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigurationError*>(&e) || dynamic_cast<const std::invalid_argument*>(&e)) return 2;
  return 1;
}

}  // namespace svsnn::cli
