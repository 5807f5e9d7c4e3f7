#include "fkpath/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "fkpath/garch.hpp"
#include "fkpath/kalman.hpp"
#include "fkpath/logistic.hpp"
#include "fkpath/smc.hpp"

namespace fkpath {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool within(double value, double bound) {
  return value <= bound * (1.0 + 1e-12) + 1e-12;
}

ExpectedConstants from_override(const CorollaryOverride& c) {
  ExpectedConstants e;
  e.c = c.c;
  e.phi = c.phi;
  e.tau = c.tau;
  e.eps = c.eps;
  e.stable = c.tau * c.c * c.c * c.c < 1.0;
  e.notes.emplace_back("corollary constants taken from the config override");
  return e;
}

}  // namespace

std::vector<double> observations_for(const ExperimentConfig& config,
                                     std::vector<std::string>* notes) {
  const std::size_t horizon = config.horizon;
  if (!config.observations_file.empty()) {
    std::ifstream in(config.observations_file);
    if (!in) throw FkError(ErrorKind::config, "cannot open " + config.observations_file);
    std::vector<double> y{0.0};
    double v = 0.0;
    while (y.size() <= horizon && in >> v) y.push_back(v);
    if (y.size() <= horizon) {
      throw FkError(ErrorKind::config, "observations file has fewer than horizon values");
    }
    return y;
  }
  RandomSource rng(config.seed, 0);
  const ModelConfig& m = config.model;
  if (const auto* g = std::get_if<GarchSpec>(&m.spec)) return simulate_garch(*g, horizon, rng).y;
  if (const auto* k = std::get_if<KalmanSpec>(&m.spec)) {
    KalmanData d = simulate_kalman(*k, horizon, rng);
    if (notes) notes->push_back("observation cap rejection rate " + fmt_short(d.rejection_rate));
    return d.y;
  }
  return simulate_logistic(std::get<LogisticSpec>(m.spec), horizon, rng).y;
}

ModelInstance build_instance(const ExperimentConfig& config) {
  ModelInstance inst;
  inst.name = config.model.type;
  inst.y = observations_for(config, &inst.notes);
  const ModelConfig& m = config.model;
  if (const auto* g0 = std::get_if<GarchSpec>(&m.spec)) {
    GarchSpec spec = *g0;
    spec.y = inst.y;
    const GarchMode mode = m.type == "garch_general" ? GarchMode::general : GarchMode::beta_zero;
    inst.model = make_garch_model(spec);
    const double eps = inst.model.kernel.epsilon(1);
    inst.constants = [spec, mode](std::size_t p) { return garch_constants(spec, mode, p).consts; };
    inst.expected = [spec, mode, eps](std::size_t p) {
      const GarchConstantsReport r = garch_constants(spec, mode, p);
      ExpectedConstants e;
      e.c = r.c;
      e.phi = r.phi;
      e.tau = r.tau;
      e.eps = eps;
      e.stable = r.stable;
      e.ratio_feasible = r.ratio_feasible;
      e.notes = r.notes;
      return e;
    };
  } else if (const auto* k0 = std::get_if<KalmanSpec>(&m.spec)) {
    KalmanSpec spec = *k0;
    spec.y = inst.y;
    inst.model = make_kalman_model(spec);
    const KalmanConstantsReport r = kalman_constants(spec);
    const double eps = inst.model.kernel.epsilon(1);
    inst.constants = [r](std::size_t) { return r.consts; };
    inst.expected = [r, eps](std::size_t) {
      ExpectedConstants e;
      e.c = r.c;
      e.phi = r.phi;
      e.tau = r.tau;
      e.eps = eps;
      e.stable = r.stable;
      e.notes = r.notes;
      return e;
    };
  } else {
    LogisticSpec spec = std::get<LogisticSpec>(m.spec);
    spec.y = inst.y;
    inst.model = make_logistic_model(spec);
    const LogisticConstantsReport r = logistic_constants(spec);
    inst.constants = [r](std::size_t) { return r.consts; };
    inst.expected = [r](std::size_t) {
      ExpectedConstants e;
      e.c = r.c;
      e.phi = r.phi;
      e.tau = r.tau;
      e.eps = 1.0;
      e.stable = r.stable;
      e.notes = r.notes;
      return e;
    };
    inst.logistic = spec;
  }
  if (config.corollary) {
    const ExpectedConstants e = from_override(*config.corollary);
    inst.expected = [e](std::size_t) { return e; };
  }
  return inst;
}

std::string format_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const ResultRow& r : rows) {
    out += r.scenario + "," + r.model + "," + std::to_string(r.n) + "," + std::to_string(r.N) +
           "," + std::to_string(r.p) + "," + std::to_string(r.rep) + "," + r.metric + "," +
           fmt(r.value) + "," + (r.bound ? fmt(*r.bound) : std::string()) + "," +
           std::to_string(r.seed) + "\n";
  }
  return out;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 2 || xs.size() != ys.size()) return std::nan("");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::nan("");
}

std::optional<double> corollary_value(const ExpectedConstants& e, double N) {
  if (!e.stable || !std::isfinite(e.c) || !std::isfinite(e.phi) || !(e.phi > 0.0) ||
      !(e.tau > 0.0)) {
    return std::nullopt;
  }
  return corollary_bound(e.c, e.eps, e.phi, e.tau, N).value;
}

BoundReport bound_report(const ExperimentConfig& config, const ModelInstance& inst, std::size_t N,
                         std::size_t p) {
  BoundReport rep;
  const HypothesisConstants consts = inst.constants(p);
  const ExpectedConstants e = inst.expected(p);
  const double n = static_cast<double>(N);
  const TheoremBound th = theorem_bound(consts, config.horizon, p, n);
  const TheoremBound t2 = tele2_bound(consts, config.horizon, p);
  rep.theorem_bound = th.value;
  rep.tele2_bound = t2.value;
  rep.vacuous = th.vacuous;
  rep.extended = th.extended || t2.extended;
  rep.c = e.c;
  rep.phi = e.phi;
  rep.eps = e.eps;
  rep.tau = e.tau;
  rep.stable = e.stable;
  rep.ratio_feasible = e.ratio_feasible;
  rep.notes = e.notes;
  rep.chosen_p = p;
  if (std::isfinite(e.c) && e.c >= 1.0 && e.phi > 0.0 && std::isfinite(e.phi) && e.tau > 0.0) {
    rep.chosen_p = choose_p(e.c, e.phi, e.tau, n, inst.model.min_p);
  }
  if (e.stable && std::isfinite(e.phi) && e.phi > 0.0 && e.tau > 0.0) {
    const CorollaryBound cb = corollary_bound(e.c, e.eps, e.phi, e.tau, n);
    rep.corollary_bound = cb.value;
    rep.C = cb.C;
    rep.D = cb.D;
    rep.exponent = cb.exponent;
  } else {
    rep.notes.emplace_back("corollary not available: tau c^3 < 1 fails or constants not finite");
  }
  if (rep.extended) rep.notes.emplace_back("constants extended past the horizon (a = b = 1)");
  for (const std::string& note : inst.notes) rep.notes.push_back(note);
  return rep;
}

std::string format_bound_report(const BoundReport& r, std::size_t N, std::size_t p) {
  std::ostringstream out;
  auto opt = [](const std::optional<double>& v) { return v ? fmt(*v) : std::string("n/a"); };
  out << "N=" << N << " p=" << p << "\n";
  out << "  theorem_bound: " << opt(r.theorem_bound) << (r.vacuous ? " (vacuous)" : "") << "\n";
  out << "  tele2_bound: " << opt(r.tele2_bound) << "\n";
  out << "  corollary_bound: " << opt(r.corollary_bound) << "\n";
  out << "  C: " << fmt(r.C) << "\n  D: " << fmt(r.D) << "\n  exponent: " << fmt(r.exponent)
      << "\n";
  out << "  chosen_p: " << r.chosen_p << "\n";
  out << "  c: " << fmt(r.c) << "\n  phi: " << fmt(r.phi) << "\n  eps: " << fmt(r.eps)
      << "\n  tau: " << fmt(r.tau) << "\n";
  out << "  tau_c3_below_1: " << (r.stable ? "true" : "false") << "\n";
  if (r.ratio_feasible) {
    out << "  ratio_below_2: " << (*r.ratio_feasible ? "true" : "false") << "\n";
  }
  out << "  extended: " << (r.extended ? "true" : "false") << "\n";
  for (const std::string& note : r.notes) out << "  note: " << note << "\n";
  return out.str();
}

namespace {

/// Oracles shared by every replication.
struct Oracles {
  /// exact_path_filter(k) for k = 0..horizon (path scenarios only).
  std::vector<PathMeasure> path_filters;
  /// Exact truncated filters by depth, k = 0..horizon.
  std::map<std::size_t, std::vector<PathMeasure>> truncated;
  /// Global truncation gap at the horizon by depth.
  std::map<std::size_t, double> global_gap;
};

struct Task {
  std::size_t N;
  std::size_t p;
  std::size_t rep;
};

class Runner {
 public:
  Runner(const ExperimentConfig& cfg, const ModelInstance& inst, const Oracles& oracles)
      : cfg_(cfg), inst_(inst), oracles_(oracles) {}

  std::vector<ResultRow> run(const Task& t) const {
    std::vector<ResultRow> rows;
    try {
      switch (cfg_.scenario) {
        case Scenario::coupling_check: coupling(t, rows); break;
        case Scenario::convergence_in_N: convergence(t, rows); break;
        case Scenario::uniform_in_time: uniform(t, rows); break;
        case Scenario::bound_vs_empirical: empirical(t, rows); break;
        case Scenario::truncation_gap: break;
      }
    } catch (const FkError& e) {
      if (e.kind() != ErrorKind::degenerate_particle_system) throw;
      rows.push_back(row(t, cfg_.horizon, "degenerate", 1.0, std::nullopt, false));
    }
    return rows;
  }

  ResultRow row(const Task& t, std::size_t n, std::string metric, double value,
                std::optional<double> bound, bool gated) const {
    ResultRow r;
    r.scenario = to_string(cfg_.scenario);
    r.model = inst_.name;
    r.n = n;
    r.N = t.N;
    r.p = t.p;
    r.rep = t.rep;
    r.metric = std::move(metric);
    r.value = value;
    r.bound = bound;
    r.seed = cfg_.seed;
    r.gated = gated;
    return r;
  }

 private:
  RandomSource stream(const Task& t) const { return RandomSource(cfg_.seed, t.rep + 1); }

  RunOptions options() const { return RunOptions{cfg_.path_cap}; }

  void coupling(const Task& t, std::vector<ResultRow>& rows) const {
    const HypothesisConstants consts = inst_.constants(t.p);
    const std::size_t memory = full_path_memory(inst_.model, cfg_.horizon, t.p, options());
    ParticleSystem sys(inst_.model, t.N, ParticleMode::full_path, t.p, memory, stream(t));
    const double tp = std::pow(consts.tau, static_cast<double>(t.p));
    for (std::size_t k = 1; k <= cfg_.horizon; ++k) {
      const double bound = consts.phi.at(k) * tp;
      CoupledStepResult res = coupled_step(inst_.model, std::move(sys), t.p, bound);
      rows.push_back(row(t, k, "coupling_discrepancy", res.diagnostics.weight_discrepancy, bound,
                         true));
      rows.push_back(row(t, k, "projected_discrepancy", res.diagnostics.projected_discrepancy,
                         bound, true));
      sys = std::move(res.full);
    }
  }

  void convergence(const Task& t, std::vector<ResultRow>& rows) const {
    const auto out = run_filter(inst_.model, cfg_.horizon, t.N, ParticleMode::full_path, t.p,
                                stream(t), options());
    const PathMeasure exact = project_last_p(oracles_.path_filters.at(cfg_.horizon), t.p);
    const double bound =
        theorem_bound(inst_.constants(t.p), cfg_.horizon, t.p, static_cast<double>(t.N)).value;
    rows.push_back(row(t, cfg_.horizon, "tv_error", tv_distance(out.back(), exact), bound, false));
  }

  void uniform(const Task& t, std::vector<ResultRow>& rows) const {
    const auto& exact = oracles_.truncated.at(t.p);
    const std::optional<double> bound =
        corollary_value(inst_.expected(t.p), static_cast<double>(t.N));
    ParticleSystem sys(inst_.model, t.N, ParticleMode::full_path, t.p,
                       std::max<std::size_t>(t.p, 1), stream(t));
    for (std::size_t k = 1; k <= cfg_.horizon; ++k) {
      sys = particle_step(inst_.model, std::move(sys));
      rows.push_back(row(t, k, "tv_error", tv_distance(sys.projected(t.p), exact.at(k)), bound,
                         false));
    }
  }

  void empirical(const Task& t, std::vector<ResultRow>& rows) const {
    const std::size_t n = cfg_.horizon;
    const std::size_t memory =
        inst_.logistic ? kUnlimitedMemory : full_path_memory(inst_.model, n, t.p, options());
    ParticleSystem sys(inst_.model, t.N, ParticleMode::full_path, t.p, memory, stream(t));
    for (std::size_t k = 1; k <= n; ++k) sys = particle_step(inst_.model, std::move(sys));
    const PathMeasure& exact = oracles_.path_filters.at(n);
    const double bound =
        theorem_bound(inst_.constants(t.p), n, t.p, static_cast<double>(t.N)).value;
    rows.push_back(row(t, n, "tv_error", tv_distance(sys.projected(t.p), project_last_p(exact, t.p)),
                       bound, false));
    if (t.rep == 0) {
      rows.push_back(row(t, n, "truncation_gap", oracles_.global_gap.at(t.p),
                         tele2_bound(inst_.constants(t.p), n, t.p).value, true));
    }
    if (inst_.logistic) {
      const XErrorDecomposition d =
          x_filter_error_decomposition(*inst_.logistic, n, t.p, sys.path_measure(), exact);
      rows.push_back(row(t, n, "x_error", d.x_error, d.total(), true));
      rows.push_back(row(t, n, "x_segment_error", d.segment_error, std::nullopt, false));
      rows.push_back(row(t, n, "x_tail", d.tail, std::nullopt, false));
    }
  }

  const ExperimentConfig& cfg_;
  const ModelInstance& inst_;
  const Oracles& oracles_;
};

std::vector<std::size_t> distinct_depths(const ExperimentConfig& cfg) {
  std::vector<std::size_t> out;
  for (const auto& [N, p] : cfg.grid()) {
    if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(p);
  }
  return out;
}

void truncation_rows(const ExperimentConfig& cfg, const ModelInstance& inst, const Oracles& orc,
                     std::vector<ResultRow>& rows) {
  const Runner helper(cfg, inst, orc);
  for (std::size_t p : distinct_depths(cfg)) {
    const HypothesisConstants consts = inst.constants(p);
    const double tp = std::pow(consts.tau, static_cast<double>(p));
    const Task t{0, p, 0};
    for (std::size_t n = 1; n <= cfg.horizon; ++n) {
      for (std::size_t k = 1; k < n; ++k) {
        const double gap = local_truncation_gap(inst.model, k, n, p, orc.path_filters.at(k - 1),
                                                cfg.oracle_budget);
        rows.push_back(helper.row(t, n, "local_gap_k" + std::to_string(k), gap,
                                  2.0 * consts.phi.at(k) * tp, true));
      }
      const double global = tv_distance(orc.truncated.at(p).at(n),
                                        project_last_p(orc.path_filters.at(n), p));
      rows.push_back(helper.row(t, n, "global_gap", global, tele2_bound(consts, n, p).value, true));
    }
  }
}

std::string summarize(const ExperimentConfig& cfg, const std::vector<ResultRow>& rows,
                      std::size_t violations) {
  std::ostringstream out;
  out << "scenario " << to_string(cfg.scenario) << ", model " << cfg.model.type << ", "
      << rows.size() << " rows\n";
  if (cfg.scenario == Scenario::convergence_in_N) {
    std::map<std::size_t, std::map<std::size_t, std::pair<double, std::size_t>>> by_p;
    for (const ResultRow& r : rows) {
      if (r.metric != "tv_error") continue;
      auto& cell = by_p[r.p][r.N];
      cell.first += r.value;
      cell.second += 1;
    }
    for (const auto& [p, byN] : by_p) {
      std::vector<double> xs;
      std::vector<double> ys;
      for (const auto& [N, acc] : byN) {
        const double mean = acc.first / static_cast<double>(acc.second);
        out << "  p=" << p << " N=" << N << " mean tv_error " << fmt_short(mean) << "\n";
        xs.push_back(std::log(static_cast<double>(N)));
        ys.push_back(std::log(mean));
      }
      out << "  p=" << p << " log-log slope " << fmt_short(fit_slope(xs, ys)) << "\n";
    }
  }
  if (cfg.scenario == Scenario::uniform_in_time) {
    std::map<std::pair<std::size_t, std::size_t>, std::map<std::size_t, std::pair<double, std::size_t>>>
        series;
    std::map<std::pair<std::size_t, std::size_t>, std::optional<double>> bounds;
    for (const ResultRow& r : rows) {
      if (r.metric != "tv_error") continue;
      auto& cell = series[{r.N, r.p}][r.n];
      cell.first += r.value;
      cell.second += 1;
      bounds[{r.N, r.p}] = r.bound;
    }
    for (const auto& [key, byn] : series) {
      std::vector<double> xs;
      std::vector<double> ys;
      double worst = 0.0;
      for (const auto& [n, acc] : byn) {
        const double mean = acc.first / static_cast<double>(acc.second);
        worst = std::max(worst, mean);
        if (2 * n > cfg.horizon) {
          xs.push_back(static_cast<double>(n));
          ys.push_back(mean);
        }
      }
      const auto& b = bounds[key];
      out << "  N=" << key.first << " p=" << key.second << " late slope "
          << fmt_short(fit_slope(xs, ys)) << " per step, max mean tv_error " << fmt_short(worst)
          << ", corollary bound " << (b ? fmt_short(*b) : std::string("n/a")) << "\n";
    }
  }
  std::size_t degenerate = 0;
  for (const ResultRow& r : rows) degenerate += r.metric == "degenerate";
  if (degenerate > 0) out << "  degenerate replications: " << degenerate << "\n";
  out << "  deterministic bound violations: " << violations << "\n";
  return out.str();
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const ModelInstance inst = build_instance(cfg);
  Oracles orc;
  const bool path_oracle = cfg.scenario == Scenario::truncation_gap ||
                           cfg.scenario == Scenario::convergence_in_N ||
                           cfg.scenario == Scenario::bound_vs_empirical;
  if (path_oracle) {
    orc.path_filters.push_back(initial_paths(inst.model));
    for (std::size_t k = 1; k <= cfg.horizon; ++k) {
      orc.path_filters.push_back(normalized_step(inst.model, k, orc.path_filters.back()));
      if (orc.path_filters.back().size() > cfg.oracle_budget) {
        throw FkError(ErrorKind::enumeration_too_large, "path oracle exceeds the budget");
      }
    }
  }
  if (cfg.scenario == Scenario::truncation_gap || cfg.scenario == Scenario::uniform_in_time ||
      cfg.scenario == Scenario::bound_vs_empirical) {
    for (std::size_t p : distinct_depths(cfg)) {
      auto& seq = orc.truncated[p];
      seq.push_back(initial_paths(inst.model));
      for (std::size_t k = 1; k <= cfg.horizon; ++k) {
        seq.push_back(truncated_step(inst.model, k, p, seq.back()));
      }
      if (path_oracle) {
        orc.global_gap[p] =
            tv_distance(seq.back(), project_last_p(orc.path_filters.back(), p));
      }
    }
  }

  ExperimentResult result;
  if (cfg.scenario == Scenario::truncation_gap) {
    truncation_rows(cfg, inst, orc, result.rows);
  } else {
    std::vector<Task> tasks;
    for (const auto& [N, p] : cfg.grid()) {
      for (std::size_t rep = 0; rep < cfg.replications; ++rep) tasks.push_back({N, p, rep});
    }
    std::vector<std::vector<ResultRow>> per_task(tasks.size());
    const Runner runner(cfg, inst, orc);
    std::size_t threads = cfg.threads > 0 ? cfg.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(tasks.size(), 1));
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    auto work = [&](std::size_t id) {
      try {
        for (std::size_t i = next++; i < tasks.size(); i = next++) per_task[i] = runner.run(tasks[i]);
      } catch (...) {
        errors[id] = std::current_exception();
        next = tasks.size();
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (std::size_t id = 0; id < threads; ++id) pool.emplace_back(work, id);
      for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (auto& rows : per_task) {
      for (auto& r : rows) result.rows.push_back(std::move(r));
    }
  }
  for (const ResultRow& r : result.rows) {
    if (r.gated && r.bound && !within(r.value, *r.bound)) ++result.violations;
  }
  result.exit_code = result.violations > 0 ? 2 : 0;
  result.summary = summarize(cfg, result.rows, result.violations);
  for (const std::string& note : inst.notes) result.summary += "  note: " + note + "\n";
  return result;
}

}  // namespace fkpath
