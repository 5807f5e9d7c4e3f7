#include "fkpath/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "fkpath/bounds.hpp"
#include "json.hpp"

namespace fkpath {

using json = nlohmann::json;

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::convergence_in_N: return "convergence_in_N";
    case Scenario::uniform_in_time: return "uniform_in_time";
    case Scenario::coupling_check: return "coupling_check";
    case Scenario::bound_vs_empirical: return "bound_vs_empirical";
    case Scenario::truncation_gap: return "truncation_gap";
  }
  return "unknown";
}

std::vector<std::pair<std::size_t, std::size_t>> ExperimentConfig::grid() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < particles.size(); ++i) {
    if (auto_p) {
      out.emplace_back(particles[i], auto_depths[i]);
    } else {
      for (std::size_t p : depths) out.emplace_back(particles[i], p);
    }
  }
  return out;
}

namespace {

/// Collects diagnostics while reading typed values out of the document.
class Reader {
 public:
  std::vector<std::string> diags;

  void fail(const std::string& path, const std::string& msg) { diags.push_back(path + ": " + msg); }

  const json* field(const json& obj, const std::string& key, const std::string& path,
                    bool required) {
    const std::string full = join(path, key);
    if (!obj.is_object() || !obj.contains(key)) {
      if (required) fail(full, "missing required field");
      return nullptr;
    }
    return &obj.at(key);
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path,
                               bool required) {
    const json* v = field(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      fail(join(path, key), "expected a number");
      return std::nullopt;
    }
    return v->get<double>();
  }

  std::optional<std::uint64_t> integer(const json& obj, const std::string& key,
                                       const std::string& path, bool required,
                                       std::uint64_t min_value) {
    const json* v = field(obj, key, path, required);
    if (!v) return std::nullopt;
    return as_integer(*v, join(path, key), min_value);
  }

  std::optional<std::uint64_t> as_integer(const json& v, const std::string& path,
                                          std::uint64_t min_value) {
    if (v.is_number_unsigned()) {
      const auto x = v.get<std::uint64_t>();
      if (x < min_value) {
        fail(path, "must be at least " + std::to_string(min_value));
        return std::nullopt;
      }
      return x;
    }
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= static_cast<double>(min_value) && d == std::floor(d) && d < 1.8e19) {
        return static_cast<std::uint64_t>(d);
      }
    }
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
      fail(path, "must be at least " + std::to_string(min_value));
      return std::nullopt;
    }
    fail(path, "expected an integer >= " + std::to_string(min_value));
    return std::nullopt;
  }

  std::optional<std::vector<double>> numbers(const json& obj, const std::string& key,
                                             const std::string& path, bool required) {
    const json* v = field(obj, key, path, required);
    if (!v) return std::nullopt;
    const std::string full = join(path, key);
    if (!v->is_array() || v->empty()) {
      fail(full, "expected a nonempty array of numbers");
      return std::nullopt;
    }
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        fail(full + "[" + std::to_string(i) + "]", "expected a number");
        return std::nullopt;
      }
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  std::optional<Matrix> matrix(const json& obj, const std::string& key, const std::string& path,
                               std::size_t size) {
    const json* v = field(obj, key, path, true);
    if (!v) return std::nullopt;
    const std::string full = join(path, key);
    if (!v->is_array() || v->size() != size) {
      fail(full, "expected " + std::to_string(size) + " rows");
      return std::nullopt;
    }
    Matrix out;
    bool good = true;
    for (std::size_t i = 0; i < size; ++i) {
      const std::string row_path = full + "[" + std::to_string(i) + "]";
      const json& row = (*v)[i];
      if (!row.is_array() || row.size() != size) {
        fail(row_path, "expected " + std::to_string(size) + " entries");
        good = false;
        continue;
      }
      std::vector<double> r;
      double total = 0.0;
      for (std::size_t j = 0; j < size; ++j) {
        if (!row[j].is_number() || !(row[j].get<double>() >= 0.0)) {
          fail(row_path + "[" + std::to_string(j) + "]", "expected a nonnegative number");
          good = false;
          r.push_back(0.0);
          continue;
        }
        r.push_back(row[j].get<double>());
        total += r.back();
      }
      if (std::abs(total - 1.0) > 1e-9) {
        fail(row_path, "row must sum to 1");
        good = false;
      }
      out.push_back(std::move(r));
    }
    if (!good) return std::nullopt;
    try {
      (void)MixingKernel::homogeneous(out);
    } catch (const FkError& e) {
      fail(full, e.what());
      return std::nullopt;
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
  static std::string at(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
  }
};

std::optional<std::vector<double>> read_initial(Reader& r, const json& m, std::size_t e) {
  auto init = r.numbers(m, "initial", "model", false);
  if (!init) return std::vector<double>{};
  if (init->size() != e) {
    r.fail("model.initial", "expected " + std::to_string(e) + " weights");
    return std::nullopt;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < e; ++i) {
    if (!((*init)[i] >= 0.0)) r.fail(Reader::at("model.initial", i), "must be nonnegative");
    total += (*init)[i];
  }
  if (!(total > 0.0)) r.fail("model.initial", "weights must have positive total");
  return init;
}

std::optional<State> read_padding(Reader& r, const json& m, std::size_t e) {
  auto pad = r.integer(m, "padding", "model", false, 0);
  if (!pad) return std::nullopt;
  if (*pad >= e) {
    r.fail("model.padding", "must be a state index below " + std::to_string(e));
    return std::nullopt;
  }
  return static_cast<State>(*pad);
}

std::optional<ModelConfig> read_garch(Reader& r, const json& m, bool general) {
  ModelConfig out;
  out.type = general ? "garch_general" : "garch_beta0";
  GarchSpec spec;
  auto alpha = r.numbers(m, "alpha", "model", true);
  auto gamma = r.numbers(m, "gamma", "model", true);
  auto beta = r.numbers(m, "beta", "model", general);
  if (!alpha || !gamma) return std::nullopt;
  const std::size_t e = alpha->size();
  if (gamma->size() != e) r.fail("model.gamma", "expected " + std::to_string(e) + " entries");
  if (beta && beta->size() != e) r.fail("model.beta", "expected " + std::to_string(e) + " entries");
  for (std::size_t i = 0; i < e; ++i) {
    if (!((*alpha)[i] > 0.0)) r.fail(Reader::at("model.alpha", i), "alpha_min > 0 is required");
  }
  for (std::size_t i = 0; i < gamma->size(); ++i) {
    const double g = (*gamma)[i];
    if (!(g >= 0.0)) r.fail(Reader::at("model.gamma", i), "gamma_min >= 0 is required");
    if (!(g < 1.0)) r.fail(Reader::at("model.gamma", i), "gamma_max < 1 is required");
  }
  if (beta) {
    for (std::size_t i = 0; i < beta->size(); ++i) {
      const double b = (*beta)[i];
      if (!(b >= 0.0)) r.fail(Reader::at("model.beta", i), "beta_min >= 0 is required");
      if (!(b < 1.0)) r.fail(Reader::at("model.beta", i), "beta_max < 1 is required");
      if (!general && b != 0.0) r.fail(Reader::at("model.beta", i), "garch_beta0 needs beta = 0");
    }
  }
  if (general && gamma->size() == e) {
    for (double g : *gamma) {
      if (g != gamma->front()) {
        r.fail("model.gamma", "garch_general needs a constant gamma");
        break;
      }
    }
  }
  auto q = r.matrix(m, "transition", "model", e);
  auto init = read_initial(r, m, e);
  spec.padding = read_padding(r, m, e);
  if (!q || !init) return std::nullopt;
  spec.alpha = *alpha;
  spec.gamma = *gamma;
  spec.beta = beta ? *beta : std::vector<double>(e, 0.0);
  spec.transition = *q;
  spec.initial = *init;
  out.spec = std::move(spec);
  return out;
}

std::optional<ModelConfig> read_kalman(Reader& r, const json& m) {
  ModelConfig out;
  out.type = "mixture_kalman";
  KalmanSpec spec;
  auto h = r.numbers(m, "h", "model", true);
  auto v = r.numbers(m, "v", "model", true);
  auto w = r.numbers(m, "w", "model", true);
  auto cap = r.number(m, "cap", "model", false);
  if (!h || !v || !w) return std::nullopt;
  const std::size_t e = h->size();
  if (v->size() != e) r.fail("model.v", "expected " + std::to_string(e) + " entries");
  if (w->size() != e) r.fail("model.w", "expected " + std::to_string(e) + " entries");
  for (std::size_t i = 0; i < e; ++i) {
    if (!(std::abs((*h)[i]) < 1.0)) r.fail(Reader::at("model.h", i), "h_bar < 1 is required");
  }
  for (std::size_t i = 0; i < v->size(); ++i) {
    if (!((*v)[i] > 0.0)) r.fail(Reader::at("model.v", i), "v_min > 0 is required");
  }
  for (std::size_t i = 0; i < w->size(); ++i) {
    if (!((*w)[i] > 0.0)) r.fail(Reader::at("model.w", i), "w_min > 0 is required");
  }
  if (cap && !(*cap > 0.0)) r.fail("model.cap", "C_y > 0 is required");
  auto q = r.matrix(m, "transition", "model", e);
  auto init = read_initial(r, m, e);
  spec.padding = read_padding(r, m, e);
  if (!q || !init) return std::nullopt;
  spec.h = *h;
  spec.v = *v;
  spec.w = *w;
  spec.cap = cap.value_or(10.0);
  spec.transition = *q;
  spec.initial = *init;
  out.spec = std::move(spec);
  return out;
}

std::optional<ModelConfig> read_logistic(Reader& r, const json& m) {
  ModelConfig out;
  out.type = "logistic_ar";
  auto rho = r.number(m, "rho", "model", true);
  auto K = r.number(m, "K", "model", false);
  auto weights = r.numbers(m, "weights", "model", true);
  auto support = r.numbers(m, "support", "model", false);
  auto l = r.number(m, "l", "model", !support.has_value());
  if (!rho || !weights) return std::nullopt;
  if (!(std::abs(*rho) < 1.0)) r.fail("model.rho", "|rho| < 1 is required");
  if (K && !(*K >= 0.0)) r.fail("model.K", "K >= 0 is required");
  if (l && !(*l >= 0.0)) r.fail("model.l", "l >= 0 is required");
  std::vector<double> values;
  if (support) {
    values = *support;
    if (l) {
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::abs(values[i]) > *l) r.fail(Reader::at("model.support", i), "must lie in [-l, l]");
      }
    }
  } else if (l) {
    values = {-*l, 0.0, *l};
  } else {
    return std::nullopt;
  }
  if (weights->size() != values.size()) {
    r.fail("model.weights", "expected " + std::to_string(values.size()) + " weights");
    return std::nullopt;
  }
  std::set<double> seen;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!seen.insert(values[i]).second) r.fail(Reader::at("model.support", i), "duplicate value");
  }
  for (std::size_t i = 0; i < weights->size(); ++i) {
    if (!((*weights)[i] > 0.0)) r.fail(Reader::at("model.weights", i), "must be positive");
  }
  LogisticSpec spec;
  spec.rho = *rho;
  spec.support = values;
  spec.weights = *weights;
  spec.K = K.value_or(1.0);
  out.spec = std::move(spec);
  return out;
}

std::size_t num_states(const ModelConfig& m) {
  return std::visit([](const auto& s) { return s.num_states(); }, m.spec);
}

/// Resolves "auto" depths by the closed-form selector.
void resolve_auto(Reader& r, ExperimentConfig& cfg) {
  for (std::size_t N : cfg.particles) {
    const double n = static_cast<double>(N);
    std::optional<std::size_t> p;
    try {
      if (cfg.corollary) {
        const auto& c = *cfg.corollary;
        p = choose_p(c.c, c.phi, c.tau, n, 1);
      } else if (cfg.model.type == "garch_beta0" || cfg.model.type == "garch_general") {
        const auto mode =
            cfg.model.type == "garch_beta0" ? GarchMode::beta_zero : GarchMode::general;
        p = garch_auto_p(std::get<GarchSpec>(cfg.model.spec), mode, n, 1);
      } else if (cfg.model.type == "mixture_kalman") {
        const auto rep = kalman_constants(std::get<KalmanSpec>(cfg.model.spec));
        if (rep.feasible && std::isfinite(rep.phi) && rep.phi > 0.0 && rep.tau > 0.0) {
          p = choose_p(rep.c, rep.phi, rep.tau, n, 1);
        }
      } else {
        const auto rep = logistic_constants(std::get<LogisticSpec>(cfg.model.spec));
        if (rep.tau > 0.0 && rep.phi > 0.0) p = choose_p(rep.c, rep.phi, rep.tau, n, 1);
      }
    } catch (const FkError& e) {
      r.fail("p", std::string("auto depth: ") + e.what());
      return;
    }
    if (!p) {
      r.fail("p", "auto depth needs finite corollary constants; give explicit depths or a "
                  "corollary override");
      return;
    }
    cfg.auto_depths.push_back(*p);
  }
}

double states_pow(std::size_t e, std::size_t k) {
  return std::pow(static_cast<double>(e), static_cast<double>(k));
}

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::optional<std::size_t> oracle_budget_from_env() {
  const char* raw = std::getenv("FKPATH_ORACLE_BUDGET");
  if (!raw || !*raw) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (*end != '\0' || v == 0) return std::nullopt;
  return static_cast<std::size_t>(v);
}

ConfigResult validate_config(const std::string& text, std::optional<std::size_t> budget_override) {
  ConfigResult result;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    result.diagnostics.push_back("parse error at " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) +
                                 ": " + e.what());
    return result;
  }
  Reader r;
  if (!doc.is_object()) {
    result.diagnostics.push_back("(root): expected a JSON object");
    return result;
  }
  ExperimentConfig cfg;

  static const std::set<std::string> known = {
      "model", "scenario", "horizon", "particles", "p", "replications", "seed", "output",
      "observations", "corollary", "path_cap", "oracle_budget", "threads"};
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) r.fail(key, "unknown field");
  }

  std::optional<ModelConfig> model;
  if (const json* m = r.field(doc, "model", "", true)) {
    if (!m->is_object()) {
      r.fail("model", "expected an object");
    } else if (const json* type = r.field(*m, "type", "model", true)) {
      const std::string t = type->is_string() ? type->get<std::string>() : "";
      if (t == "garch_beta0") model = read_garch(r, *m, false);
      else if (t == "garch_general") model = read_garch(r, *m, true);
      else if (t == "mixture_kalman") model = read_kalman(r, *m);
      else if (t == "logistic_ar") model = read_logistic(r, *m);
      else r.fail("model.type", "expected garch_beta0, garch_general, mixture_kalman or logistic_ar");
    }
  }

  if (const json* s = r.field(doc, "scenario", "", true)) {
    const std::string name = s->is_string() ? s->get<std::string>() : "";
    bool found = false;
    for (Scenario sc : {Scenario::convergence_in_N, Scenario::uniform_in_time,
                        Scenario::coupling_check, Scenario::bound_vs_empirical,
                        Scenario::truncation_gap}) {
      if (name == to_string(sc)) {
        cfg.scenario = sc;
        found = true;
      }
    }
    if (!found) {
      r.fail("scenario", "expected convergence_in_N, uniform_in_time, coupling_check, "
                         "bound_vs_empirical or truncation_gap");
    }
  }

  if (auto h = r.integer(doc, "horizon", "", true, 1)) cfg.horizon = *h;
  if (const json* parts = r.field(doc, "particles", "", true)) {
    if (!parts->is_array() || parts->empty()) {
      r.fail("particles", "expected a nonempty array of particle counts");
    } else {
      for (std::size_t i = 0; i < parts->size(); ++i) {
        if (auto v = r.as_integer((*parts)[i], Reader::at("particles", i), 1)) {
          cfg.particles.push_back(*v);
        }
      }
    }
  }
  if (const json* p = r.field(doc, "p", "", true)) {
    if (p->is_string() && p->get<std::string>() == "auto") {
      cfg.auto_p = true;
    } else if (p->is_array() && !p->empty()) {
      for (std::size_t i = 0; i < p->size(); ++i) {
        if (auto v = r.as_integer((*p)[i], Reader::at("p", i), 1)) cfg.depths.push_back(*v);
      }
    } else {
      r.fail("p", "expected \"auto\" or a nonempty array of depths");
    }
  }
  if (auto v = r.integer(doc, "replications", "", false, 1)) cfg.replications = *v;
  if (auto v = r.integer(doc, "seed", "", false, 0)) cfg.seed = *v;
  if (auto v = r.integer(doc, "path_cap", "", false, 1)) cfg.path_cap = *v;
  if (auto v = r.integer(doc, "oracle_budget", "", false, 1)) cfg.oracle_budget = *v;
  if (auto v = r.integer(doc, "threads", "", false, 0)) cfg.threads = *v;
  if (budget_override) cfg.oracle_budget = *budget_override;
  if (const json* out = r.field(doc, "output", "", false)) {
    if (out->is_string()) cfg.output = out->get<std::string>();
    else r.fail("output", "expected a path string");
  }
  if (cfg.output.empty()) cfg.output = std::string(to_string(cfg.scenario)) + ".csv";
  if (const json* obs = r.field(doc, "observations", "", false)) {
    if (obs->is_string()) cfg.observations_file = obs->get<std::string>();
    else r.fail("observations", "expected a file path");
  }
  if (const json* cor = r.field(doc, "corollary", "", false)) {
    CorollaryOverride c;
    auto cc = r.number(*cor, "c", "corollary", true);
    auto phi = r.number(*cor, "phi", "corollary", true);
    auto tau = r.number(*cor, "tau", "corollary", true);
    auto eps = r.number(*cor, "eps", "corollary", false);
    if (cc && !(*cc >= 1.0)) r.fail("corollary.c", "c >= 1 is required");
    if (phi && !(*phi > 0.0)) r.fail("corollary.phi", "phi > 0 is required");
    if (tau && !(*tau > 0.0 && *tau < 1.0)) r.fail("corollary.tau", "0 < tau < 1 is required");
    if (eps && !(*eps > 0.0 && *eps <= 1.0)) r.fail("corollary.eps", "0 < eps <= 1 is required");
    if (cc && phi && tau) {
      c.c = *cc;
      c.phi = *phi;
      c.tau = *tau;
      c.eps = eps.value_or(1.0);
      cfg.corollary = c;
    }
  }

  if (model) {
    cfg.model = std::move(*model);
    const std::size_t e = num_states(cfg.model);
    const double budget = static_cast<double>(cfg.oracle_budget);
    const bool path_oracle = cfg.scenario == Scenario::truncation_gap ||
                             cfg.scenario == Scenario::convergence_in_N ||
                             cfg.scenario == Scenario::bound_vs_empirical;
    if (path_oracle && states_pow(e, cfg.horizon + 1) > budget) {
      r.fail("horizon", "|E|^(horizon+1) exceeds the oracle budget " +
                            std::to_string(cfg.oracle_budget));
    }
    if (cfg.scenario == Scenario::uniform_in_time) {
      for (std::size_t p : cfg.depths) {
        if (states_pow(e, p) > budget) r.fail("p", "|E|^p exceeds the oracle budget");
      }
    }
    if (cfg.scenario == Scenario::bound_vs_empirical && cfg.model.type == "logistic_ar" &&
        cfg.horizon + 1 > cfg.path_cap) {
      r.fail("horizon", "logistic decomposition needs full paths: horizon + 1 <= path_cap");
    }
    if (r.diags.empty() && cfg.auto_p) resolve_auto(r, cfg);
  }

  result.diagnostics = std::move(r.diags);
  if (result.diagnostics.empty()) result.config = std::move(cfg);
  return result;
}

ConfigResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigResult r;
    r.diagnostics.push_back(path + ": cannot open config file");
    return r;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return validate_config(buf.str(), oracle_budget_from_env());
}

std::string describe_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "model: " << cfg.model.type << " (" << num_states(cfg.model) << " states)\n";
  out << "scenario: " << to_string(cfg.scenario) << "\n";
  out << "horizon: " << cfg.horizon << "\n";
  out << "replications: " << cfg.replications << "\n";
  out << "seed: " << cfg.seed << "\n";
  out << "output: " << cfg.output << "\n";
  out << "oracle budget: " << cfg.oracle_budget << "\n";
  out << "observations: " << (cfg.observations_file.empty() ? "simulated" : cfg.observations_file)
      << "\n";
  out << "depths: " << (cfg.auto_p ? "auto" : "explicit") << "\n";
  for (const auto& [N, p] : cfg.grid()) out << "  N=" << N << " p=" << p << "\n";
  return out.str();
}

}  // namespace fkpath
