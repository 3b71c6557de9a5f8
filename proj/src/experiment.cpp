#include "mfc/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "mfc/errors.hpp"
#include "mfc/estimation.hpp"
#include "mfc/measure.hpp"
#include "mfc/moments.hpp"

namespace mfc {

using nlohmann::json;

namespace {

// Walks one JSON object, remembering which keys were read so that
// leftovers can be rejected as typos.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& key) {
    const json* v = find(key);
    if (v == nullptr) throw ConfigError(field(key), "missing required field");
    return *v;
  }

  double number(const std::string& key, std::optional<double> fallback = std::nullopt) {
    const json* v = find(key);
    if (v == nullptr) {
      if (fallback) return *fallback;
      throw ConfigError(field(key), "missing required field");
    }
    if (!v->is_number()) throw ConfigError(field(key), "expected a number");
    return v->get<double>();
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    const json* v = find(key);
    if (v == nullptr) {
      if (fallback) return *fallback;
      throw ConfigError(field(key), "missing required field");
    }
    if (v->is_number_integer()) return v->get<std::int64_t>();
    if (v->is_number_float()) {
      const double d = v->get<double>();
      if (std::floor(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    }
    throw ConfigError(field(key), "expected an integer");
  }

  std::string string(const std::string& key, std::optional<std::string> fallback = std::nullopt) {
    const json* v = find(key);
    if (v == nullptr) {
      if (fallback) return *fallback;
      throw ConfigError(field(key), "missing required field");
    }
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    return v->get<std::string>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
    return v->get<bool>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected a number");
      }
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  std::vector<int> integers(const std::string& key, std::vector<int> fallback) {
    const json* v = find(key);
    if (v == nullptr) return fallback;
    if (!v->is_array()) throw ConfigError(field(key), "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number_integer()) {
        throw ConfigError(field(key) + "[" + std::to_string(i) + "]", "expected an integer");
      }
      out.push_back((*v)[i].get<int>());
    }
    return out;
  }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (!seen_.contains(it.key())) throw ConfigError(field(it.key()), "unknown key");
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <class F>
void checked(const std::string& field, F&& f) {
  try {
    f();
  } catch (const ParameterError& e) {
    throw ConfigError(field, e.what());
  } catch (const ArgumentError& e) {
    throw ConfigError(field, e.what());
  }
}

CovarianceModel parse_covariance(const json& node, const std::string& path) {
  ObjectReader r(node, path);
  CovarianceModel model;
  const std::string family = r.string("family");
  checked(r.field("family"), [&] { model.family = covariance_family_from_string(family); });
  model.sigma2 = r.number("sigma2");
  model.ell = r.number("ell", 1.0);
  if (model.family == CovarianceFamily::powered_exponential) model.kappa = r.number("kappa");
  if (model.family == CovarianceFamily::generalized_cauchy) model.alpha = r.number("alpha");
  r.finish();
  checked(path, [&] { model.validate(); });
  return model;
}

SeriesModel parse_series(const json& node, const std::string& path, int n, bool& symmetrize) {
  ObjectReader r(node, path);
  SeriesModel s;
  s.n = n;
  s.amplitudes = r.numbers("amplitudes", {});
  const json& freq = r.require("frequencies");
  if (!freq.is_array()) throw ConfigError(r.field("frequencies"), "expected an array of vectors");
  for (std::size_t i = 0; i < freq.size(); ++i) {
    const std::string where = r.field("frequencies") + "[" + std::to_string(i) + "]";
    const json& w = freq[i];
    if (!w.is_array() || w.size() != static_cast<std::size_t>(n)) {
      throw ConfigError(where, "expected " + std::to_string(n) + " integers");
    }
    std::array<int, 3> v{0, 0, 0};
    for (std::size_t d = 0; d < w.size(); ++d) {
      if (!w[d].is_number_integer()) throw ConfigError(where, "expected integers");
      v[d] = w[d].get<int>();
    }
    s.frequencies.push_back(v);
  }
  if (const json* inn = r.find("innovation")) {
    ObjectReader ir(*inn, r.field("innovation"));
    const std::string type = ir.string("type", "uniform_symmetric");
    if (type != "uniform_symmetric") throw ConfigError(ir.field("type"), "unsupported innovation " + type);
    s.innovation.bound = ir.number("bound", std::sqrt(3.0));
    ir.finish();
  }
  if (const json* phi = r.find("phi")) {
    ObjectReader pr(*phi, r.field("phi"));
    const std::string family = pr.string("family", "power_beta");
    if (family != "power_beta") throw ConfigError(pr.field("family"), "unsupported phi " + family);
    s.phi.beta = pr.number("beta", 2.0);
    pr.finish();
  }
  s.D = r.number("D", 1.0);
  symmetrize = r.boolean("symmetrize", false);
  r.finish();
  checked(path, [&] { s.validate(); });
  return s;
}

json covariance_json(const CovarianceModel& m) {
  json j{{"family", std::string(to_string(m.family))}, {"sigma2", m.sigma2}, {"ell", m.ell}};
  if (m.family == CovarianceFamily::powered_exponential) j["kappa"] = m.kappa;
  if (m.family == CovarianceFamily::generalized_cauchy) j["alpha"] = m.alpha;
  return j;
}

json series_json(const SeriesModel& s, bool symmetrize) {
  json freq = json::array();
  for (const auto& w : s.frequencies) {
    json v = json::array();
    for (int d = 0; d < s.n; ++d) v.push_back(w[static_cast<std::size_t>(d)]);
    freq.push_back(v);
  }
  return {{"amplitudes", s.amplitudes},
          {"frequencies", freq},
          {"innovation", {{"type", "uniform_symmetric"}, {"bound", s.innovation.bound}}},
          {"phi", {{"family", "power_beta"}, {"beta", s.phi.beta}}},
          {"D", s.D},
          {"symmetrize", symmetrize}};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Infinite and NaN values are not representable in JSON; they become strings.
json number_json(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

nlohmann::json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("<syntax>", "line " + std::to_string(line) + ", column " +
                                      std::to_string(col) + ": " + e.what());
  }
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  ObjectReader root(doc, "");
  ExperimentConfig cfg;
  CascadeConfig& cc = cfg.cascade;

  const std::int64_t n = root.integer("n", 1);
  if (n < 1 || n > 3) throw ConfigError("n", "must be 1, 2 or 3");
  cc.grid.n = static_cast<int>(n);
  {
    const json& g = root.require("grid");
    ObjectReader gr(g, "grid");
    const std::int64_t N = gr.integer("N");
    if (N < 2 || !is_power_of_two(static_cast<std::size_t>(N))) {
      throw ConfigError("grid.N", "must be a power of two >= 2");
    }
    cc.grid.N = static_cast<std::size_t>(N);
    gr.finish();
  }

  bool symmetrize = false;
  json scenario_json;
  {
    const json& s = root.require("scenario");
    ObjectReader sr(s, "scenario");
    const std::string type = sr.string("type");
    if (type == "geometric_gaussian") {
      const auto model = parse_covariance(sr.require("covariance"), "scenario.covariance");
      cc.scenario = GeometricGaussian{model};
      scenario_json = {{"type", type}, {"covariance", covariance_json(model)}};
    } else if (type == "subgaussian_series") {
      const auto series = parse_series(sr.require("series"), "scenario.series", cc.grid.n, symmetrize);
      cc.scenario = SubGaussianSeries{symmetrize ? symmetrized(series) : series};
      scenario_json = {{"type", type}, {"series", series_json(series, symmetrize)}};
    } else {
      throw ConfigError("scenario.type", "unknown scenario '" + type + "'");
    }
    sr.finish();
  }

  cc.b = root.number("b", 2.0);
  if (!(cc.b > 1.0)) throw ConfigError("b", "must be > 1");
  const std::int64_t m = root.integer("m", 1);
  if (m < 1 || m > 64) throw ConfigError("m", "must be in [1, 64]");
  cc.m = static_cast<int>(m);

  if (const json* nz = root.find("normalizer")) {
    ObjectReader nr(*nz, "normalizer");
    const std::string mode = nr.string("mode", "closed_form");
    if (mode == "closed_form") {
      cc.normalizer.kind = NormalizerMode::Kind::closed_form;
    } else if (mode == "monte_carlo") {
      cc.normalizer.kind = NormalizerMode::Kind::monte_carlo;
    } else {
      throw ConfigError("normalizer.mode", "expected closed_form or monte_carlo");
    }
    cc.normalizer.tolerance = nr.number("tolerance", 1e-3);
    if (!(cc.normalizer.tolerance > 0.0)) throw ConfigError("normalizer.tolerance", "must be > 0");
    nr.finish();
  }

  cfg.p = root.number("p", 2.0);
  if (!(cfg.p >= 2.0)) throw ConfigError("p", "must be >= 2");
  if (const json* g = root.find("gamma"); g != nullptr && !g->is_null()) {
    if (!g->is_number()) throw ConfigError("gamma", "expected a number");
    cfg.gamma = g->get<double>();
    if (!(*cfg.gamma > 1.0)) throw ConfigError("gamma", "must be > 1");
  }

  cfg.q_values = root.numbers("q_values", cfg.q_values);
  if (cfg.q_values.empty()) throw ConfigError("q_values", "must not be empty");
  for (std::size_t i = 0; i < cfg.q_values.size(); ++i) {
    const double q = cfg.q_values[i];
    if (!(q >= 0.0 && q <= cfg.p)) {
      throw ConfigError("q_values[" + std::to_string(i) + "]", "must lie in [0, p]");
    }
  }

  const auto window = root.integers("j_window", {cfg.j_window.first, cfg.j_window.second});
  if (window.size() != 2) throw ConfigError("j_window", "expected [j_min, j_max]");
  if (window[0] < 0 || window[1] <= window[0]) throw ConfigError("j_window", "need 0 <= j_min < j_max");
  cfg.j_window = {window[0], window[1]};

  cfg.t_list = root.numbers("t_list", {1.0 / 64, 1.0 / 32, 1.0 / 16, 1.0 / 8, 1.0 / 4, 1.0 / 2});
  cfg.m_list = root.integers("m_list", cfg.m_list);
  if (cfg.m_list.empty()) throw ConfigError("m_list", "must not be empty");
  for (std::size_t i = 0; i < cfg.m_list.size(); ++i) {
    if (cfg.m_list[i] < 1 || (i > 0 && cfg.m_list[i] <= cfg.m_list[i - 1])) {
      throw ConfigError("m_list", "must be strictly increasing positive integers");
    }
  }

  const int m_max = std::max(cc.m, cfg.m_list.back());
  const std::int64_t M = root.integer("M", m_max + 4);
  if (M < cc.m || M > 64) throw ConfigError("M", "must be in [m, 64]");
  cfg.M = static_cast<int>(M);

  const std::int64_t R = root.integer("replicates", cfg.replicates);
  if (R < 2) throw ConfigError("replicates", "must be >= 2");
  cfg.replicates = static_cast<int>(R);
  if (const json* s = root.find("seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "expected a nonnegative integer");
    }
    cfg.seed = s->get<std::uint64_t>();
  }
  const std::int64_t workers = root.integer("workers", cfg.workers);
  if (workers < 1) throw ConfigError("workers", "must be >= 1");
  cfg.workers = static_cast<int>(workers);
  cfg.output_dir = root.string("output_dir", cfg.output_dir);
  root.finish();

  checked("scenario", [&] { cc.validate(); });

  cfg.effective = {
      {"scenario", scenario_json},
      {"n", cc.grid.n},
      {"grid", {{"N", cc.grid.N}}},
      {"b", cc.b},
      {"m", cc.m},
      {"M", cfg.M},
      {"p", cfg.p},
      {"q_values", cfg.q_values},
      {"j_window", {cfg.j_window.first, cfg.j_window.second}},
      {"t_list", cfg.t_list},
      {"m_list", cfg.m_list},
      {"replicates", cfg.replicates},
      {"seed", cfg.seed},
      {"workers", cfg.workers},
      {"output_dir", cfg.output_dir},
      {"normalizer",
       {{"mode", cc.normalizer.kind == NormalizerMode::Kind::closed_form ? "closed_form" : "monte_carlo"},
        {"tolerance", cc.normalizer.tolerance}}},
  };
  if (cfg.gamma) cfg.effective["gamma"] = *cfg.gamma;
  return cfg;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("--override", "expected key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError(key, "empty path component");
    if (!node->is_object()) throw ConfigError(key, "path crosses a non-object value");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

namespace {

json canonical_config(const ExperimentConfig& config) {
  json canonical = config.effective;
  canonical.erase("workers");
  canonical.erase("output_dir");
  return canonical;
}

}  // namespace

std::string config_hash(const ExperimentConfig& config) {
  const json canonical = canonical_config(config);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, fnv1a(canonical.dump()));
  return buf;
}

namespace {

struct Artifacts {
  std::filesystem::path dir;
  std::string hash;
  std::uint64_t seed = 0;

  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw ConfigError("output_dir", "cannot write " + (dir / name).string());
    return f;
  }

  void csv_header(std::ostream& os, const std::vector<std::string>& warnings,
                  const std::string& columns) const {
    os << "# config_hash=" << hash << "\n# seed=" << seed << "\n";
    for (const auto& w : warnings) os << "# warning: " << w << "\n";
    os << columns << "\n";
  }
};

json condition_json(const ConditionReport& r) {
  json details = json::object();
  for (const auto& d : r.details) details[d.name] = number_json(d.value);
  json j{{"target", std::string(to_string(r.target))},
         {"p", r.p},
         {"b", r.b},
         {"n", r.n},
         {"b_threshold", number_json(r.b_threshold)},
         {"b_ok", r.b_ok},
         {"mixing_checkable", r.mixing_checkable},
         {"mixing_ok", r.mixing_ok},
         {"gamma_window", nullptr},
         {"alpha_required", nullptr},
         {"details", details},
         {"notes", r.notes}};
  if (r.gamma_window) j["gamma_window"] = {number_json(r.gamma_window->lo), number_json(r.gamma_window->hi)};
  if (r.alpha_required) j["alpha_required"] = number_json(*r.alpha_required);
  return j;
}

json forecast_json(const RateForecast& f) {
  json j{{"p", f.p},
         {"log_moment", number_json(f.log_moment)},
         {"geo_factor", number_json(f.geo_factor)},
         {"gamma_window", {number_json(f.gamma_window.lo), number_json(f.gamma_window.hi)}},
         {"gamma_star", number_json(f.gamma_star)},
         {"gamma", nullptr},
         {"gamma_factor", nullptr},
         {"gamma_admissible", f.gamma_admissible},
         {"gamma_b_condition", f.gamma_b_condition},
         {"tightest_valid_factor", number_json(f.tightest_valid_factor)}};
  if (f.gamma) j["gamma"] = *f.gamma;
  if (f.gamma_factor) j["gamma_factor"] = number_json(*f.gamma_factor);
  return j;
}

bool is_even_integer(double p) { return std::floor(p) == p && std::fmod(p, 2.0) == 0.0; }

void run_conditions(const ExperimentConfig& cfg, const Artifacts& art, std::ostream& out) {
  const ConditionReport report = check_conditions(cfg.cascade, cfg.p);
  json doc{{"config_hash", art.hash},
           {"seed", cfg.seed},
           {"config", canonical_config(cfg)},
           {"report", condition_json(report)},
           {"rates", nullptr}};
  if (is_even_integer(cfg.p)) doc["rates"] = forecast_json(rate_exponents(cfg.cascade, cfg.p, cfg.gamma));
  auto f = art.open("conditions.json");
  f << doc.dump(2) << "\n";
  out << "conditions: b_threshold=" << format_double(report.b_threshold)
      << " b_ok=" << (report.b_ok ? "true" : "false")
      << " mixing_ok=" << (report.mixing_ok ? "true" : "false") << "\n";
}

MonteCarlo monte_carlo(const ExperimentConfig& cfg) {
  return {cfg.replicates, cfg.seed, cfg.workers};
}

void run_renyi(const ExperimentConfig& cfg, const Artifacts& art, std::ostream& out) {
  const auto estimates = renyi_empirical(cfg.cascade, cfg.q_values, cfg.j_window, cfg.M, monte_carlo(cfg));
  std::vector<std::string> warnings;
  if (!estimates.empty()) warnings = estimates.front().warnings;
  auto f = art.open("renyi.csv");
  art.csv_header(f, warnings, "q,T_hat,stderr,T_theory,j_min,j_max,R");
  for (const auto& e : estimates) {
    f << format_double(e.q) << ',' << format_double(e.T_hat) << ',' << format_double(e.std_error)
      << ',' << format_double(e.T_theory) << ',' << e.j_min << ',' << e.j_max << ',' << e.R << "\n";
    out << "renyi: q=" << format_double(e.q) << " T_hat=" << format_double(e.T_hat)
        << " stderr=" << format_double(e.std_error) << " T_theory=" << format_double(e.T_theory) << "\n";
  }
}

void run_scaling(const ExperimentConfig& cfg, const Artifacts& art, std::ostream& out) {
  std::vector<ScalingFit> fits;
  for (double q : cfg.q_values) fits.push_back(scaling_fit(cfg.cascade, q, cfg.t_list, cfg.M, monte_carlo(cfg)));
  auto f = art.open("scaling.csv");
  art.csv_header(f, {}, "q,t,mean,se,slope,theory_slope");
  for (const auto& fit : fits) {
    for (const auto& pt : fit.per_t) {
      f << format_double(fit.q) << ',' << format_double(pt.t) << ',' << format_double(pt.mean) << ','
        << format_double(pt.se) << ',' << format_double(fit.slope) << ','
        << format_double(fit.theory_slope) << "\n";
    }
    out << "scaling: q=" << format_double(fit.q) << " slope=" << format_double(fit.slope)
        << " theory_slope=" << format_double(fit.theory_slope) << "\n";
  }
}

void run_rates(const ExperimentConfig& cfg, const Artifacts& art, std::ostream& out) {
  if (!is_even_integer(cfg.p)) throw ConfigError("p", "rate fits need an even integer p");
  std::vector<double> qs;
  for (double q : cfg.q_values) {
    if (q >= 2.0 && q <= cfg.p) qs.push_back(q);
  }
  if (qs.empty()) qs.push_back(2.0);
  std::vector<RateFit> fits;
  for (double q : qs) {
    fits.push_back(rate_fit(cfg.cascade, q, cfg.m_list, cfg.M, monte_carlo(cfg), cfg.p, cfg.gamma));
  }
  std::vector<std::string> warnings;
  for (const auto& fit : fits) {
    for (const auto& w : fit.warnings) {
      if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
    }
  }
  auto f = art.open("rates.csv");
  art.csv_header(f, warnings, "q,m,mean,se,slope,theory_factor_geo,theory_factor_gamma");
  for (const auto& fit : fits) {
    const std::string gamma = fit.theory_factor_gamma ? format_double(*fit.theory_factor_gamma) : "";
    for (const auto& pt : fit.per_m) {
      f << format_double(fit.q) << ',' << pt.m << ',' << format_double(pt.mean) << ','
        << format_double(pt.se) << ',' << format_double(fit.slope) << ','
        << format_double(fit.theory_factor_geo) << ',' << gamma << "\n";
    }
    out << "rates: q=" << format_double(fit.q) << " fitted_factor=" << format_double(fit.fitted_factor)
        << " theory_factor=" << format_double(fit.theory_factor)
        << " bound_ok=" << (fit.bound_ok ? "true" : "false") << "\n";
  }
}

void run_martingale(const ExperimentConfig& cfg, const Artifacts& art, std::ostream& out) {
  const auto rows = martingale_check(cfg.cascade, cfg.m_list, monte_carlo(cfg));
  auto f = art.open("martingale.csv");
  art.csv_header(f, {}, "m,mean,se,pass");
  bool all = true;
  for (const auto& r : rows) {
    f << r.m << ',' << format_double(r.mean) << ',' << format_double(r.se) << ','
      << (r.pass ? "true" : "false") << "\n";
    all = all && r.pass;
  }
  out << "martingale: " << (all ? "all rows pass" : "some rows fail") << "\n";
}

void dump_density(const ExperimentConfig& cfg, const Artifacts& art) {
  const DensityGrid d = build_density(cfg.cascade, StreamKey{cfg.seed, 0, 0});
  auto f = art.open("density.bin");
  write_density_binary(f, d);
}

void dump_measures(const ExperimentConfig& cfg, const Artifacts& art) {
  const DensityGrid d = build_density(cfg.cascade, StreamKey{cfg.seed, 0, 0});
  std::vector<MeasureVector> levels;
  for (int j = cfg.j_window.first; j <= cfg.j_window.second; ++j) levels.push_back(dyadic_measures(d, j));
  auto f = art.open("measures.csv");
  f << "# config_hash=" << art.hash << "\n# seed=" << art.seed << "\n";
  write_measure_csv(f, levels);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiplicative cascade experiments"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  std::optional<int> workers;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  bool want_density = false;
  bool want_measures = false;
  app.add_option("--config", config_path, "Experiment JSON file")->required();
  app.add_option("--seed", seed, "Master seed (overrides config)");
  app.add_option("--replicates", replicates, "Replicate count (overrides config)");
  app.add_option("--workers", workers, "Worker threads (scheduling only)");
  app.add_option("--out", out_dir, "Output directory (overrides config)");
  app.add_option("--override", overrides, "Dotted key=value override, repeatable");
  app.add_flag("--dump-density", want_density, "Write density.bin for replicate 0");
  app.add_flag("--dump-measures", want_measures, "Write measures.csv for replicate 0");
  for (const char* name : {"conditions", "renyi", "scaling", "rates", "martingale", "all"}) {
    app.add_subcommand(name, std::string("Run ") + name);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return exit_config;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("--config", "cannot read " + config_path);
    std::stringstream buf;
    buf << in.rdbuf();
    json doc = parse_config_text(buf.str());
    for (const auto& o : overrides) apply_override(doc, o);
    if (seed) doc["seed"] = *seed;
    if (replicates) doc["replicates"] = *replicates;
    if (workers) doc["workers"] = *workers;
    if (out_dir) doc["output_dir"] = *out_dir;
    const ExperimentConfig cfg = parse_config(doc);

    Artifacts art{cfg.output_dir, config_hash(cfg), cfg.seed};
    std::error_code ec;
    std::filesystem::create_directories(art.dir, ec);
    if (ec) throw ConfigError("output_dir", "cannot create " + cfg.output_dir + ": " + ec.message());

    const bool all = command == "all";
    if (all || command == "conditions") run_conditions(cfg, art, out);
    if (all || command == "renyi") run_renyi(cfg, art, out);
    if (all || command == "scaling") run_scaling(cfg, art, out);
    if (all || command == "rates") run_rates(cfg, art, out);
    if (all || command == "martingale") run_martingale(cfg, art, out);
    if (want_density) dump_density(cfg, art);
    if (want_measures) dump_measures(cfg, art);
    return exit_ok;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ParameterError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ArgumentError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_config;
  } catch (const ResolutionError& e) {
    err << "resolution error: " << e.what() << "\n";
    return exit_resolution;
  } catch (const EmbeddingError& e) {
    err << "embedding error: " << e.what() << "\n";
    return exit_resolution;
  } catch (const Error& e) {
    err << "estimation error: " << e.what() << "\n";
    return exit_estimation;
  }
}

}  // namespace mfc
