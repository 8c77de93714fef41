#include "svsnn/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "svsnn/error.hpp"

namespace svsnn::cli {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"problem", {"id", "reynolds", "tg_boundary"}},
      {"model", {"kind", "modes", "k", "widths", "w_char", "sigma", "w_min", "w_max", "temporal_output_bias"}},
      {"train",
       {"epochs", "lr", "decay", "decay_every", "weight_ic", "weight_pde", "weight_bc", "n_ic", "n_pde", "n_bc", "seed",
        "eval_stride", "workers"}},
      {"eval", {"nx", "ny", "nt"}},
      {"output", {"dir"}},
      {"diagnose", {"row_cap", "eta", "collapse_fraction"}},
      {"sweep", {"modes", "w_char", "sigma", "jobs"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

class Reader {
 public:
  Reader(const std::string& text, std::string source) : source_(std::move(source)) {
    std::istringstream in(text);
    std::string line, section;
    for (int no = 1; std::getline(in, line); ++no) {
      const auto t = trim(line);
      if (t.empty() || t[0] == ';' || t[0] == '#') continue;
      if (t.front() == '[' && t.back() == ']') {
        section = trim(t.substr(1, t.size() - 2));
        lines_[section] = no;
        continue;
      }
      const auto eq = t.find('=');
      if (eq != std::string::npos) lines_[section + "." + trim(t.substr(0, eq))] = no;
    }
    std::istringstream again(text);
    try {
      pt::ini_parser::read_ini(again, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigurationError(source_ + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree_) {
      const auto it = known_keys().find(section);
      if (it == known_keys().end()) fail(section, "", "unknown section [" + section + "]");
      if (!body.data().empty()) fail(section, "", "expected a section, found a top-level key");
      for (const auto& [key, value] : body) {
        if (!it->second.count(key)) fail(section, key, "unknown key");
      }
    }
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& what) const {
    const std::string field = key.empty() ? section : section + "." + key;
    const auto it = lines_.find(field);
    const std::string where = it == lines_.end() ? source_ : source_ + ":" + std::to_string(it->second);
    throw ConfigurationError(where + ": " + (key.empty() ? "" : field + ": ") + what);
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto s = tree_.get_child_optional(section);
    if (!s) return std::nullopt;
    const auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  std::vector<std::string> items(const std::string& section, const std::string& key) const {
    std::vector<std::string> out;
    const auto r = raw(section, key);
    if (!r) return out;
    std::stringstream ss(*r);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) fail(section, key, "empty list entry");
      out.push_back(item);
    }
    if (out.empty()) fail(section, key, "empty value");
    return out;
  }

  long long integer(const std::string& section, const std::string& key, const std::string& text, long long lo) const {
    long long v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) fail(section, key, "expected an integer, got '" + text + "'");
    if (v < lo) fail(section, key, "must be >= " + std::to_string(lo) + ", got " + text);
    return v;
  }

  // Plain numbers, or multiples of pi written as "20pi" / "pi".
  double real(const std::string& section, const std::string& key, const std::string& text) const {
    std::string t = text;
    double scale = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
      scale = std::numbers::pi;
      t = trim(t.substr(0, t.size() - 2));
      if (t.empty()) t = "1";
    }
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || !std::isfinite(v)) {
      fail(section, key, "expected a number, got '" + text + "'");
    }
    return v * scale;
  }

  template <class F>
  void with(const std::string& section, const std::string& key, F&& f) const {
    if (const auto r = raw(section, key)) {
      if (r->empty()) fail(section, key, "empty value");
      f(*r);
    }
  }

  std::optional<long long> get_int(const std::string& s, const std::string& k, long long lo) const {
    std::optional<long long> out;
    with(s, k, [&](const std::string& v) { out = integer(s, k, v, lo); });
    return out;
  }
  std::optional<double> get_real(const std::string& s, const std::string& k) const {
    std::optional<double> out;
    with(s, k, [&](const std::string& v) { out = real(s, k, v); });
    return out;
  }
  std::vector<long long> int_list(const std::string& s, const std::string& k, long long lo) const {
    std::vector<long long> out;
    for (const auto& i : items(s, k)) out.push_back(integer(s, k, i, lo));
    return out;
  }
  std::vector<double> real_list(const std::string& s, const std::string& k) const {
    std::vector<double> out;
    for (const auto& i : items(s, k)) out.push_back(real(s, k, i));
    return out;
  }

 private:
  std::string source_;
  pt::ptree tree_;
  std::map<std::string, int> lines_;
};

template <class T>
std::vector<T> narrow(const std::vector<long long>& v) {
  return {v.begin(), v.end()};
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  const Reader r(text, source);
  RunConfig c;

  const auto id = r.raw("problem", "id");
  if (!id || id->empty()) r.fail("problem", "id", "required");
  c.problem = *id;
  if (auto v = r.get_real("problem", "reynolds")) {
    if (!(*v > 0.0)) r.fail("problem", "reynolds", "must be positive");
    c.problem_options.reynolds = *v;
  }
  r.with("problem", "tg_boundary", [&](const std::string& v) {
    if (v == "periodic") c.problem_options.tg_boundary = problems::TgBoundary::Periodic;
    else if (v == "exact") c.problem_options.tg_boundary = problems::TgBoundary::Exact;
    else r.fail("problem", "tg_boundary", "expected periodic or exact, got '" + v + "'");
  });
  const auto p = problems::make_problem(c.problem, c.problem_options);

  r.with("model", "kind", [&](const std::string& v) {
    if (v != "svsnn" && v != "baseline") r.fail("model", "kind", "expected svsnn or baseline, got '" + v + "'");
    c.model.kind = v;
  });
  if (auto v = r.get_int("model", "modes", 1)) c.model.modes = static_cast<int>(*v);
  c.model.k = narrow<int>(r.int_list("model", "k", 4));
  if (!c.model.k.empty() && c.model.k.size() != 1 && static_cast<int>(c.model.k.size()) != p.spatial_dim) {
    r.fail("model", "k", "give one value or one per spatial direction (" + std::to_string(p.spatial_dim) + ")");
  }
  c.model.widths = narrow<int>(r.int_list("model", "widths", 1));
  c.model.frequency.w_char = r.real_list("model", "w_char");
  c.model.frequency.sigma = r.real_list("model", "sigma");
  c.model.frequency.w_min = r.real_list("model", "w_min");
  c.model.frequency.w_max = r.real_list("model", "w_max");
  for (const auto* key : {"w_char", "sigma", "w_min", "w_max"}) {
    const auto n = r.items("model", key).size();
    if (n > 1 && static_cast<int>(n) != p.spatial_dim) r.fail("model", key, "give one value or one per spatial direction");
  }
  if (auto v = r.get_real("model", "temporal_output_bias")) c.model.init.temporal_output_bias = *v;

  c.train = training::default_config(p);
  if (auto v = r.get_int("train", "epochs", 1)) c.train.epochs = static_cast<std::size_t>(*v);
  if (auto v = r.get_real("train", "lr")) c.train.lr = *v;
  if (auto v = r.get_real("train", "decay")) c.train.decay = *v;
  if (auto v = r.get_int("train", "decay_every", 1)) c.train.decay_every = static_cast<std::size_t>(*v);
  if (auto v = r.get_real("train", "weight_ic")) c.train.weights.ic = *v;
  if (auto v = r.get_real("train", "weight_pde")) c.train.weights.pde = *v;
  if (auto v = r.get_real("train", "weight_bc")) c.train.weights.bc = *v;
  if (auto v = r.get_int("train", "n_ic", 0)) c.train.points.ic = static_cast<std::size_t>(*v);
  if (auto v = r.get_int("train", "n_pde", 1)) c.train.points.pde = static_cast<std::size_t>(*v);
  if (const auto bc = r.int_list("train", "n_bc", 0); !bc.empty()) {
    if (bc.size() == 1) c.train.points.bc.assign(p.bc_components, static_cast<std::size_t>(bc[0]));
    else if (bc.size() == p.bc_components) c.train.points.bc = narrow<std::size_t>(bc);
    else r.fail("train", "n_bc", "give one value or one per boundary component (" + std::to_string(p.bc_components) + ")");
  }
  if (auto v = r.get_int("train", "seed", 0)) c.train.seed = static_cast<std::uint64_t>(*v);
  if (auto v = r.get_int("train", "eval_stride", 0)) c.train.eval_stride = static_cast<std::size_t>(*v);
  if (auto v = r.get_int("train", "workers", 1)) c.train.workers = static_cast<int>(*v);
  try {
    c.train.validate();
  } catch (const InvalidInput& e) {
    throw ConfigurationError(source + ": [train] " + e.what());
  }

  if (auto v = r.get_int("eval", "nx", 2)) c.train.grid.nx = static_cast<std::size_t>(*v);
  if (auto v = r.get_int("eval", "ny", 2)) c.train.grid.ny = static_cast<std::size_t>(*v);
  if (auto v = r.get_int("eval", "nt", 2)) c.train.grid.nt = static_cast<std::size_t>(*v);

  c.out_dir = std::filesystem::path("runs") / c.problem;
  r.with("output", "dir", [&](const std::string& v) { c.out_dir = v; });

  if (auto v = r.get_int("diagnose", "row_cap", 1)) c.diagnose.row_cap = static_cast<std::size_t>(*v);
  if (auto v = r.get_real("diagnose", "eta")) {
    if (!(*v > 0.0 && *v < 1.0)) r.fail("diagnose", "eta", "must lie in (0, 1)");
    c.diagnose.eta = *v;
  }
  if (auto v = r.get_real("diagnose", "collapse_fraction")) {
    if (!(*v > 0.0 && *v <= 1.0)) r.fail("diagnose", "collapse_fraction", "must lie in (0, 1]");
    c.diagnose.collapse_fraction = *v;
  }
  c.diagnose.seed = c.train.seed;
  c.diagnose.workers = c.train.workers;

  c.sweep.modes = narrow<int>(r.int_list("sweep", "modes", 1));
  c.sweep.w_char = r.real_list("sweep", "w_char");
  c.sweep.sigma = r.real_list("sweep", "sigma");
  if (auto v = r.get_int("sweep", "jobs", 1)) c.sweep.jobs = static_cast<int>(*v);

  // Build the model once so shape and frequency errors surface at load time.
  try {
    training::make_model(c.model, p, c.train.seed);
  } catch (const InvalidInput& e) {
    throw ConfigurationError(source + ": [model] " + e.what());
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace svsnn::cli
