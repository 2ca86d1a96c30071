#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dampedwave/analysis.hpp"
#include "dampedwave/assembly.hpp"
#include "dampedwave/config.hpp"
#include "dampedwave/error.hpp"
#include "dampedwave/output.hpp"
#include "dampedwave/stationary.hpp"
#include "dampedwave/timestepper.hpp"

namespace dampedwave {

struct ExperimentResult {
  Table table;
  Plot plot;
};

namespace detail {

inline DampingField damping_from(const ExperimentConfig& c) {
  if (c.has("a-values")) return DampingField::piecewise(c.real_list("a-values"));
  return DampingField::constant(c.real("a-const"));
}

inline std::size_t n_steps_of(const ExperimentConfig& c) { return steps_for(c.real("t-final"), c.real("tau")); }

struct Variant {
  std::string label;
  bool adaptive = false;
  double theta = 1.0;
  double lambda = 1.0;

  SchemeParams scheme(double tau, std::size_t n_steps) const {
    return adaptive ? SchemeParams::adaptive_theta(lambda, tau, n_steps) : SchemeParams::fixed(theta, tau, n_steps);
  }
};

inline Variant fixed_variant(double theta) {
  return {"theta=" + short_number(theta), false, theta, 0.0};
}

inline Variant adaptive_variant(double lambda) {
  return {"theta=1/2+" + short_number(lambda) + "*tau", true, 0.0, lambda};
}

/// The user's single scheme if theta or lambda is set, otherwise the experiment's defaults.
inline std::vector<Variant> variants_of(const ExperimentConfig& c, std::vector<Variant> defaults) {
  if (c.has("theta")) return {fixed_variant(c.real("theta"))};
  if (c.has("lambda")) return {adaptive_variant(c.real("lambda"))};
  return defaults;
}

inline double hat(double x) { return 1.0 - std::abs(2.0 * x - 1.0); }

/// Initial state from the u0/p0 keys.
inline State initial_state(const ExperimentConfig& c, const DiscreteOperators& ops) {
  const std::string u0 = c.has("u0") ? c.text("u0") : "zero";
  const std::string p0 = c.has("p0") ? c.text("p0") : "zero";
  std::mt19937_64 rng(c.count("seed"));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::optional<AnalyticMode> mode;
  if (u0 == "mode" || p0 == "mode") {
    if (!ops.damping_field.is_constant()) throw ConfigError("initial data 'mode' needs constant damping");
    mode = analytic_mode(ops.damping_field.a0());
  }
  State s{Vector(ops.dim_v(), 0.0), Vector(ops.dim_q(), 0.0), 0};
  if (u0 == "mode") {
    s.u = project_v(ops, [&](double x) { return mode->u(x, 0.0); }).coefficients();
  } else if (u0 == "cos") {
    s.u = project_v(ops, [](double x) { return std::cos(pi * x); }).coefficients();
  } else if (u0 == "random") {
    for (auto& v : s.u) v = dist(rng);
  }
  if (p0 == "mode") {
    s.p = project_q(ops, [&](double x) { return mode->p(x, 0.0); }).coefficients();
  } else if (p0 == "sin") {
    s.p = project_q(ops, [](double x) { return std::sin(pi * x); }).coefficients();
  } else if (p0 == "hat") {
    s.p = project_q(ops, hat).coefficients();
  } else if (p0 == "random") {
    for (auto& v : s.p) v = dist(rng);
  }
  return s;
}

inline StepSolver step_solver_of(const ExperimentConfig& c) {
  return c.has("method") && c.text("method") == "schur" ? StepSolver::schur : StepSolver::monolithic;
}

/// Runs tasks concurrently and returns their results in submission order.
template <class T>
std::vector<T> run_ordered(std::vector<std::function<T()>> tasks) {
  std::vector<std::future<T>> futures;
  futures.reserve(tasks.size());
  for (auto& t : tasks) futures.push_back(std::async(std::launch::async, std::move(t)));
  std::vector<T> out;
  out.reserve(futures.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace detail

// --- decay table ----------------------------------------------------------------

inline ExperimentResult run_decay_table(const ExperimentConfig& c) {
  const double a = c.real("a-const");
  const bool zero = c.text("u0") == "zero" && c.text("p0") == "zero";
  if (!zero && !(c.text("u0") == "mode" && c.text("p0") == "mode")) {
    throw ConfigError("decay-table needs u0 = p0 = mode or u0 = p0 = zero");
  }
  const AnalyticMode mode = analytic_mode(a);
  const double tau = c.real("tau");
  const std::size_t n_steps = detail::n_steps_of(c);
  const double every = c.real("report-every");
  if (!(every > 0.0) || !detail::nearly_integer(every / tau)) {
    throw ConfigError("'report-every' must be a positive multiple of 'tau'");
  }
  const auto stride = static_cast<std::size_t>(std::llround(every / tau));

  auto ops = std::make_shared<const DiscreteOperators>(
      assemble_operators(c.count("n-cells"), static_cast<int>(c.integer("degree")), DampingField::constant(a)));
  const State init = detail::initial_state(c, *ops);
  const auto variants = detail::variants_of(c, {detail::fixed_variant(1.0), detail::adaptive_variant(1.0)});

  std::vector<std::function<EnergySeries()>> tasks;
  for (const auto& v : variants) {
    tasks.emplace_back([=] {
      const Stepper stepper(ops, v.scheme(tau, n_steps));
      RunOptions opts;
      opts.history_depth = 1;
      return run(stepper, init, opts).energies.at(0);
    });
  }
  const auto series = detail::run_ordered(std::move(tasks));

  EnergySeries exact{0, tau, {}, {}};
  for (std::size_t n = 0; n <= n_steps; ++n) {
    exact.indices.push_back(n);
    exact.values.push_back(zero ? 0.0 : mode.energy(static_cast<double>(n) * tau));
  }

  ExperimentResult r;
  r.table.columns = {"t", "E_exact"};
  for (const auto& v : variants) r.table.columns.push_back("E_" + v.label);
  for (std::size_t n = 0; n <= n_steps; n += stride) {
    std::vector<std::string> row = {format_number(static_cast<double>(n) * tau), format_number(exact.values[n])};
    for (const auto& s : series) row.push_back(format_number(s.values[n]));
    r.table.rows.push_back(std::move(row));
  }
  auto fitted = [](const EnergySeries& s) {
    try {
      return format_number(fit_decay_rate(s).alpha);
    } catch (const InvalidArgument&) {
      return std::string("nan");
    }
  };
  std::vector<std::string> footer = {"alpha", fitted(exact)};
  for (const auto& s : series) footer.push_back(fitted(s));
  r.table.rows.push_back(std::move(footer));

  r.plot = {"Energy decay", "t", "E", true, {}};
  r.plot.series.push_back(plot_series("exact", exact));
  for (std::size_t i = 0; i < variants.size(); ++i) r.plot.series.push_back(plot_series(variants[i].label, series[i]));
  return r;
}

// --- convergence ----------------------------------------------------------------

inline ExperimentResult run_convergence(const ExperimentConfig& c) {
  const auto variants = detail::variants_of(c, {detail::fixed_variant(1.0), detail::adaptive_variant(1.0)});
  const std::string sweep = c.text("sweep");
  const std::size_t levels = c.count("levels");
  const int k = static_cast<int>(c.integer("degree"));
  const double a = c.real("a-const");
  analytic_mode(a);

  struct Job {
    std::string sweep;
    detail::Variant variant;
    ConvergenceSpec spec;
  };
  std::vector<Job> jobs;
  for (const auto& v : variants) {
    ConvergenceSpec base;
    base.a_const = a;
    base.k = k;
    base.t_final = c.real("t-final");
    base.adaptive = v.adaptive;
    base.theta = v.theta;
    base.lambda = v.lambda;
    base.reference = c.text("reference") == "interpolation" ? ReferenceMap::interpolation : ReferenceMap::l2_projection;
    if (sweep == "both" || sweep == "h") {
      ConvergenceSpec s = base;
      s.sweep = SweepKind::h;
      for (std::size_t l = 0; l < levels; ++l) s.points.push_back({c.count("n-cells-coarse") << l, c.real("tau")});
      jobs.push_back({"h", v, s});
    }
    if (sweep == "both" || sweep == "tau") {
      ConvergenceSpec s = base;
      s.sweep = SweepKind::tau;
      for (std::size_t l = 0; l < levels; ++l) {
        s.points.push_back({c.count("n-cells"), c.real("tau-coarse") / static_cast<double>(std::size_t{1} << l)});
      }
      jobs.push_back({"tau", v, s});
    }
  }
  for (const auto& j : jobs) {
    for (const auto& p : j.spec.points) steps_for(j.spec.t_final, p.tau);
  }

  std::vector<std::function<ErrorRow()>> tasks;
  for (const auto& j : jobs) {
    for (const auto& p : j.spec.points) tasks.emplace_back([spec = j.spec, p] { return convergence_point(spec, p); });
  }
  const auto rows = detail::run_ordered(std::move(tasks));

  ExperimentResult r;
  r.table.columns = {"sweep", "scheme", "theta", "h", "tau", "discrete_error", "l2_error_u", "l2_error_p", "rate"};
  r.plot = {"Discrete error", "refinement level", "error", true, {}};
  std::size_t at = 0;
  for (const auto& j : jobs) {
    std::vector<ErrorRow> block(rows.begin() + static_cast<std::ptrdiff_t>(at),
                                rows.begin() + static_cast<std::ptrdiff_t>(at + j.spec.points.size()));
    at += j.spec.points.size();
    fill_rates(block, j.spec.sweep);
    PlotSeries ps{j.sweep + " " + j.variant.label, {}, {}};
    for (std::size_t i = 0; i < block.size(); ++i) {
      const auto& e = block[i];
      r.table.rows.push_back({j.sweep, j.variant.label, format_number(e.theta), format_number(e.h),
                              format_number(e.tau), format_number(e.discrete_error), format_number(e.l2_error_u),
                              format_number(e.l2_error_p), e.rate ? format_number(*e.rate) : std::string()});
      ps.x.push_back(static_cast<double>(i));
      ps.y.push_back(e.discrete_error);
    }
    r.plot.series.push_back(std::move(ps));
  }
  return r;
}

// --- Crank-Nicolson demo ----------------------------------------------------------

struct CnRun {
  detail::Variant variant;
  std::size_t n_cells = 0;
  double theta = 0.0;
  EnergySeries energy;
  std::optional<RateFit> fit;
};

inline std::vector<CnRun> cn_demo_runs(const ExperimentConfig& c) {
  const auto variants = detail::variants_of(c, {detail::fixed_variant(0.5), detail::adaptive_variant(1.0)});
  const double tau = c.real("tau");
  const std::size_t n_steps = detail::n_steps_of(c);
  const DampingField field = detail::damping_from(c);
  const int k = static_cast<int>(c.integer("degree"));
  const FitWindow window{c.optional_real("fit-lo"), c.optional_real("fit-hi")};

  std::vector<std::function<CnRun()>> tasks;
  for (const auto& v : variants) {
    for (long long level : c.integer_list("mesh-levels")) {
      if (level < 0 || level > 20) throw ConfigError("'mesh-levels' entries must lie in [0,20]");
      const std::size_t n = std::size_t{1} << level;
      tasks.emplace_back([=, &c] {
        auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(n, k, field));
        const Stepper stepper(ops, v.scheme(tau, n_steps), detail::step_solver_of(c));
        RunOptions opts;
        opts.history_depth = 1;
        CnRun out{v, n, stepper.theta(), run(stepper, detail::initial_state(c, *ops), opts).energies.at(0), {}};
        try {
          out.fit = fit_decay_rate(out.energy, window);
        } catch (const InvalidArgument&) {
        }
        return out;
      });
    }
  }
  return detail::run_ordered(std::move(tasks));
}

inline ExperimentResult run_cn_demo(const ExperimentConfig& c) {
  const auto runs = cn_demo_runs(c);
  const DampingField field = detail::damping_from(c);
  const double alpha = field.a0() > 0.0 ? stability_constants(field.a0(), field.a1()).alpha_disc : 0.0;
  const std::size_t stride = std::max<std::size_t>(1, c.count("report-stride"));

  ExperimentResult r;
  r.table.columns = {"kind", "scheme", "theta", "n_cells", "t", "energy", "bound"};
  r.plot = {"Energy decay, fixed tau", "t", "E", true, {}};
  for (const auto& run : runs) {
    const double e0 = run.energy.values.front();
    for (std::size_t i = 0; i < run.energy.size(); i += stride) {
      const double t = run.energy.time(i);
      r.table.rows.push_back({"energy", run.variant.label, format_number(run.theta), std::to_string(run.n_cells),
                              format_number(t), format_number(run.energy.values[i]),
                              format_number(3.0 * std::exp(-alpha * t) * e0)});
    }
    r.plot.series.push_back(plot_series(run.variant.label + " n=" + std::to_string(run.n_cells), run.energy));
  }
  for (const auto& run : runs) {
    r.table.rows.push_back({"fit", run.variant.label, format_number(run.theta), std::to_string(run.n_cells),
                            run.fit ? format_number(run.energy.time(run.fit->n_lo)) : "nan",
                            run.fit ? format_number(run.fit->alpha) : "nan", ""});
  }
  return r;
}

// --- decay rate versus damping ----------------------------------------------------

struct ArateRow {
  double a = 0.0;
  double g = 0.0;
  double rate = 0.0;
  std::size_t iterations = 0;
};

inline std::vector<ArateRow> arate_rows(const ExperimentConfig& c) {
  const auto variants = detail::variants_of(c, {detail::adaptive_variant(1.0)});
  if (variants.size() != 1) throw ConfigError("arate runs a single scheme");
  const auto v = variants.front();
  const double tau = c.real("tau");
  const std::size_t n_steps = detail::n_steps_of(c);
  const double t_final = c.real("t-final");
  const std::size_t n_cells = c.count("n-cells");
  const int k = static_cast<int>(c.integer("degree"));
  OperatorNormOptions opts;
  opts.tol = c.real("tol");
  opts.seed = c.count("seed");
  const long long lo = c.integer("a-exp-min");
  const long long hi = c.integer("a-exp-max");
  if (hi < lo) throw ConfigError("'a-exp-max' must not be below 'a-exp-min'");

  std::vector<std::function<ArateRow()>> tasks;
  for (long long j = lo; j <= hi; ++j) {
    const double a = std::ldexp(1.0, static_cast<int>(j));
    tasks.emplace_back([=] {
      auto ops = std::make_shared<const DiscreteOperators>(assemble_operators(n_cells, k, DampingField::constant(a)));
      const Stepper stepper(ops, v.scheme(tau, n_steps));
      const OperatorNormResult nrm = operator_norm(stepper, n_steps, opts);
      return ArateRow{a, exact_rate_constant_a(a), -std::log(nrm.norm) / t_final, nrm.iterations};
    });
  }
  return detail::run_ordered(std::move(tasks));
}

inline ExperimentResult run_arate(const ExperimentConfig& c) {
  const auto rows = arate_rows(c);
  ExperimentResult r;
  r.table.columns = {"a", "g", "rate", "rel_error", "iterations"};
  r.plot = {"Decay rate versus damping", "log2 a", "rate", true, {}};
  PlotSeries g{"g(a)", {}, {}};
  PlotSeries f{"-ln||S||/t", {}, {}};
  for (const auto& row : rows) {
    r.table.rows.push_back({format_number(row.a), format_number(row.g), format_number(row.rate),
                            format_number((row.rate - row.g) / row.g), std::to_string(row.iterations)});
    g.x.push_back(std::log2(row.a));
    g.y.push_back(row.g);
    f.x.push_back(std::log2(row.a));
    f.y.push_back(row.rate);
  }
  r.plot.series = {g, f};
  return r;
}

// --- stationary -------------------------------------------------------------------

/// Manufactured problem with u = cos(pi x), p = sin(pi x): f = pi cos(pi x) + a u, g = -pi sin(pi x).
inline ExperimentResult run_stationary(const ExperimentConfig& c) {
  const DampingField field = detail::damping_from(c);
  const DiscreteOperators ops =
      assemble_operators(c.count("n-cells"), static_cast<int>(c.integer("degree")), field);
  const auto ue = [](double x) { return std::cos(pi * x); };
  const auto pe = [](double x) { return std::sin(pi * x); };
  const Vector f = assemble_load(ops.disc, [&](double x) { return (pi + field(x)) * std::cos(pi * x); }, SpaceKind::v);
  const Vector g = assemble_load(ops.disc, [](double x) { return -pi * std::sin(pi * x); }, SpaceKind::q);
  const auto method = c.text("method") == "schur" ? StationaryMethod::schur : StationaryMethod::monolithic;
  const StationarySolution sol = solve_stationary(ops, f, g, method);

  ExperimentResult r;
  r.table.notes = {"l2_error_u=" + format_number(l2_distance(ops, sol.u_bar.coefficients(), SpaceKind::v, ue)) +
                       " l2_error_p=" + format_number(l2_distance(ops, sol.p_bar.coefficients(), SpaceKind::q, pe)),
                   "residual_v=" + format_number(sol.residual_v) + " residual_q=" + format_number(sol.residual_q)};
  r.table.columns = {"x", "u_h", "p_h", "u_exact", "p_exact"};
  r.plot = {"Stationary solution", "x", "value", false, {}};
  PlotSeries pu{"u_h", {}, {}};
  PlotSeries pp{"p_h", {}, {}};
  const auto& mesh = *ops.disc.mesh;
  for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
    const double x = mesh.to_global(cell, 0.5);
    const double u = sol.u_bar(x);
    const double p = sol.p_bar(x);
    r.table.rows.push_back({format_number(x), format_number(u), format_number(p), format_number(ue(x)),
                            format_number(pe(x))});
    pu.x.push_back(x);
    pu.y.push_back(u);
    pp.x.push_back(x);
    pp.y.push_back(p);
  }
  r.plot.series = {pu, pp};
  return r;
}

// --- general simulation -----------------------------------------------------------

inline ExperimentResult run_simulate(const ExperimentConfig& c) {
  const DampingField field = detail::damping_from(c);
  auto ops = std::make_shared<const DiscreteOperators>(
      assemble_operators(c.count("n-cells"), static_cast<int>(c.integer("degree")), field));
  const auto variant = detail::variants_of(c, {detail::fixed_variant(1.0)}).front();
  const std::size_t n_steps = detail::n_steps_of(c);
  const Stepper stepper(ops, variant.scheme(c.real("tau"), n_steps), detail::step_solver_of(c));
  const std::size_t stride = c.count("snapshot-stride");

  RunOptions opts;
  opts.snapshot_stride = stride == 0 ? std::max<std::size_t>(n_steps, 1) : stride;
  const RunResult res = run(stepper, detail::initial_state(c, *ops), opts);
  std::vector<State> snaps = res.snapshots;
  if (snaps.empty() || snaps.back().time_index != res.history.newest().time_index) {
    snaps.push_back(res.history.newest());
  }

  ExperimentResult r;
  r.table.columns = {"step", "t", "x", "u", "p", "energy"};
  r.plot = {"Energy", "t", "E", true, {plot_series("E0", res.energies.at(0))}};
  const auto& mesh = *ops->disc.mesh;
  const auto& e0 = res.energies.at(0);
  for (const auto& s : snaps) {
    const FEFunction u(ops->disc.v_space, s.u);
    const FEFunction p(ops->disc.q_space, s.p);
    const double t = static_cast<double>(s.time_index) * stepper.tau();
    for (std::size_t cell = 0; cell < mesh.n_cells(); ++cell) {
      const double x = mesh.to_global(cell, 0.5);
      r.table.rows.push_back({std::to_string(s.time_index), format_number(t), format_number(x), format_number(u(x)),
                              format_number(p(x)), format_number(e0.values[s.time_index])});
    }
  }
  return r;
}

inline ExperimentResult run_experiment(const ExperimentConfig& c) {
  const auto& e = c.experiment();
  if (e == "decay-table") return run_decay_table(c);
  if (e == "convergence") return run_convergence(c);
  if (e == "cn-demo") return run_cn_demo(c);
  if (e == "arate") return run_arate(c);
  if (e == "stationary") return run_stationary(c);
  if (e == "simulate") return run_simulate(c);
  throw ConfigError("unknown experiment '" + e + "'");
}

}  // namespace dampedwave
