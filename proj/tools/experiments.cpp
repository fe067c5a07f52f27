#include "experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pin/coarsegrain.hpp"
#include "pin/continuum_psi.hpp"
#include "pin/csv.hpp"
#include "pin/disorder.hpp"
#include "pin/error.hpp"
#include "pin/freenergy.hpp"
#include "pin/renewal.hpp"
#include "pin/stats.hpp"
#include "pin/weakcoupling.hpp"

#ifndef PIN_VERSION
#define PIN_VERSION "unknown"
#endif

namespace pin::cli {

namespace {

namespace fs = std::filesystem;

// Streams for auxiliary draws stay clear of the replica streams 0, 1, 2, ...
constexpr std::uint64_t kAuxStream = 1ULL << 40;

struct Context {
  Context(const RunConfig& c, fs::path o) : cfg(c), out(std::move(o)) {}

  const RunConfig& cfg;
  fs::path out;
  std::uint64_t seed = 0;
  double budget = 0.0;
  std::vector<std::string> outputs;
  bool partial = false;
  std::string note;

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    std::ofstream os(out / name, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + (out / name).string());
    body(os);
    outputs.push_back(name);
  }

  void out_of_budget(const BudgetExceeded& e) {
    partial = true;
    note = e.what();
  }
};

double cost(std::size_t n, std::size_t replicas) {
  return static_cast<double>(n) * static_cast<double>(n) * static_cast<double>(replicas);
}

RenewalLaw make_law(const RunConfig& cfg, std::size_t needed) {
  const auto configured = static_cast<std::size_t>(cfg.integer("law.n_max"));
  const std::size_t n_max = configured > 0 ? configured : std::max<std::size_t>(needed, 2);
  if (n_max < needed) throw DomainError("law.n_max is smaller than the largest lattice length needed");
  const auto& kind = cfg.str("law.kind");
  if (kind == "deterministic") return deterministic_law(n_max);
  if (kind == "two_point") return two_point_law(n_max);
  return build_renewal(cfg.real("law.alpha"), SlowlyVarying::from_key(cfg.str("law.L"), cfg.real("law.L_param")),
                       n_max);
}

DisorderLaw make_disorder(const RunConfig& cfg) {
  return DisorderLaw::from_key(cfg.str("disorder.kind"), cfg.real("disorder.gamma"));
}

CriticalSolver make_solver(const RunConfig& cfg) {
  CriticalSolver s;
  s.kappa = cfg.real("solver.kappa");
  s.c0 = cfg.real("solver.c0");
  s.tol = cfg.real("solver.tol");
  s.h_lo = cfg.real("solver.h_lo");
  s.h_hi = cfg.real("solver.h_hi");
  s.expand = true;
  return s;
}

std::size_t as_size(std::int64_t v) { return static_cast<std::size_t>(v); }

void run_sim(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto N = as_size(cfg.integer("sim.N"));
  const double t = cfg.real("sim.t");
  const auto replicas = as_size(cfg.integer("sim.replicas"));
  std::vector<double> cs;
  if (cfg.has("sim.c")) cs = cfg.reals("sim.c");
  double widest = 1.0;
  for (double c : cs) widest = std::max(widest, c);
  const auto law = make_law(cfg, static_cast<std::size_t>(std::ceil(static_cast<double>(N) * t * widest - 1e-9)));
  const auto disorder = make_disorder(cfg);

  std::vector<EnsembleEstimate> points;
  double spent = 0.0;
  const auto& h_hat = cfg.reals("sim.h_hat");
  const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(N) * t));
  for (double beta_hat : cfg.reals("sim.beta_hat")) {
    try {
      auto sweep = common_h_sweep(law, disorder, beta_hat, h_hat, t, N, replicas, ctx.seed, ctx.budget - spent);
      spent += cost(n, replicas) * static_cast<double>(h_hat.size());
      for (auto& p : sweep.points) points.push_back(std::move(p));
    } catch (const BudgetExceeded& e) {
      ctx.out_of_budget(e);
      break;
    }
  }
  ctx.write("ensemble.csv", [&](std::ostream& os) { write_ensemble_csv(os, points); });
  ctx.write("ensemble_summary.csv", [&](std::ostream& os) { write_ensemble_summary_csv(os, points); });

  if (cs.empty() || ctx.partial) return;
  std::vector<ScalingReport> reps;
  for (double c : cs) {
    try {
      reps.push_back(scaling_check(law, disorder, cfg.reals("sim.beta_hat").front(), h_hat.front(), t, c, N,
                                   replicas, ctx.seed, ctx.budget - spent));
      spent += 2.0 * cost(n, replicas);
    } catch (const BudgetExceeded& e) {
      ctx.out_of_budget(e);
      break;
    }
  }
  ctx.write("scaling.csv", [&](std::ostream& os) {
    csv::header(os, "scaling", {"c", "N", "N_scaled", "mean_a", "mean_b", "var_a", "var_b", "ks", "ks_c"});
    for (const auto& r : reps) {
      csv::row(os, {csv::num(r.c), csv::num(static_cast<std::uint64_t>(r.N)),
                    csv::num(static_cast<std::uint64_t>(r.N_scaled)), csv::num(r.mean_a), csv::num(r.mean_b),
                    csv::num(r.var_a), csv::num(r.var_b), csv::num(r.ks), csv::num(r.ks_constrained)});
    }
  });
}

void run_psi(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double nu = cfg.maybe_real("psi.nu").value_or(cfg.real("law.alpha"));
  PsiQuadrature q;
  q.panels = as_size(cfg.integer("psi.panels"));
  const double tol = cfg.real("psi.tol");
  std::vector<PsiSeries> free, constrained;
  for (double dh : cfg.reals("psi.delta_hat")) {
    for (double t : cfg.reals("psi.t_grid")) {
      free.push_back(psi_hat(nu, dh, t, tol, q));
      constrained.push_back(psi_hat_c(nu, dh, t, tol, q));
    }
  }
  ctx.write("psi.csv", [&](std::ostream& os) { write_psi_csv(os, free, constrained); });
}

void run_uconv(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto Ns = cfg.sizes("uconv.N_list");
  const auto base = make_law(cfg, *std::max_element(Ns.begin(), Ns.end()));
  const RenewalLaw law = cfg.boolean("uconv.intersection") ? intersection_law(base) : base;
  std::vector<double> ts;
  if (cfg.has("uconv.t_grid")) {
    ts = cfg.reals("uconv.t_grid");
  } else {
    for (int i = 0; i <= 64; ++i) ts.push_back(i / 64.0);
  }
  const double dh = cfg.real("uconv.delta_hat");
  const auto rows = uconv_check(law, law.alpha(), dh, ts, Ns, cfg.real("uconv.tol"));
  ctx.write("uconv.csv", [&](std::ostream& os) {
    csv::header(os, "uconv", {"nu", "delta_hat", "N", "delta_N", "sup_dev", "sup_dev_c"});
    for (const auto& r : rows) {
      csv::row(os, {csv::num(law.alpha()), csv::num(dh), csv::num(static_cast<std::uint64_t>(r.N)),
                    csv::num(r.delta_N), csv::num(r.sup_dev), csv::num(r.sup_dev_c)});
    }
  });
}

void run_cg_check(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto N = as_size(cfg.integer("cg.N"));
  const auto t = as_size(cfg.integer("cg.t"));
  const auto law = make_law(cfg, N * t);
  const auto disorder = make_disorder(cfg);
  const double beta = cfg.real("cg.beta"), h = cfg.real("cg.h");
  const double lam = disorder.lambda(beta);
  std::vector<CgIdentityReport> reps;
  for (std::int64_t i = 0; i < cfg.integer("cg.instances"); ++i) {
    Rng rng(ctx.seed, static_cast<std::uint64_t>(i));
    const auto omega = sample_disorder(disorder, N * t, rng);
    try {
      reps.push_back(verify_cg_identity(law, omega, beta, lam, h, N, t));
    } catch (const BudgetExceeded& e) {
      ctx.out_of_budget(e);
      break;
    }
  }
  ctx.write("cg_identity.csv", [&](std::ostream& os) {
    csv::header(os, "cg_identity", {"instance", "N", "t", "beta", "h", "lhs", "rhs", "rel_dev", "total_probability",
                                    "signatures"});
    for (std::size_t i = 0; i < reps.size(); ++i) {
      const auto& r = reps[i];
      csv::row(os, {csv::num(static_cast<std::uint64_t>(i)), csv::num(static_cast<std::uint64_t>(N)),
                    csv::num(static_cast<std::uint64_t>(t)), csv::num(beta), csv::num(h), csv::num(r.lhs),
                    csv::num(r.rhs), csv::num(r.rel_dev), csv::num(r.total_probability), csv::num(r.signatures)});
    }
  });
}

void run_rege(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const double alpha = cfg.maybe_real("rege.alpha").value_or(cfg.real("law.alpha"));
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("rege: alpha must lie in (0, 1)");
  const auto t_max = cfg.integer("rege.t_max");
  std::vector<RegenSample> samples;
  for (std::int64_t i = 0; i < cfg.integer("rege.write_samples"); ++i) {
    Rng rng(ctx.seed, static_cast<std::uint64_t>(i));
    samples.push_back(sample_regenerative_cg(alpha, t_max, rng));
  }
  ctx.write("regen_cg.csv", [&](std::ostream& os) { write_cg_csv(os, samples); });

  const auto n = as_size(cfg.integer("rege.samples"));
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(ctx.seed, kAuxStream + i);
    g[i] = sample_last_before(alpha, 0.0, 1.0, rng);
  }
  const double ks = stats::ks_distance(g, [&](double u) { return last_point_cdf(alpha, 0.0, 1.0, u); });
  const auto rep = lemma_tail_estimates(alpha, cfg.reals("rege.gamma_grid"), n, ctx.seed);
  ctx.write("lemma_tails.csv", [&](std::ostream& os) { write_tail_csv(os, rep); });
  ctx.write("regen_summary.csv", [&](std::ostream& os) {
    csv::header(os, "regen_summary", {"alpha", "samples", "g1_mean", "g1_ks", "slope_near_end", "slope_near_end_se",
                                      "slope_short", "slope_short_se"});
    csv::row(os, {csv::num(alpha), csv::num(static_cast<std::uint64_t>(n)), csv::num(stats::summarize(g).mean),
                  csv::num(ks), csv::num(rep.slope_near_end), csv::num(rep.slope_near_end_se),
                  csv::num(rep.slope_short), csv::num(rep.slope_short_se)});
  });
}

void write_trace(Context& ctx, std::span<const CriticalPoint> points) {
  ctx.write("hc_trace.csv", [&](std::ostream& os) {
    csv::header(os, "hc_trace", {"beta", "step", "h_lo", "h_hi"});
    for (const auto& p : points) {
      for (std::size_t i = 0; i < p.trace.size(); ++i) {
        csv::row(os, {csv::num(p.beta), csv::num(static_cast<std::uint64_t>(i)), csv::num(p.trace[i].first),
                      csv::num(p.trace[i].second)});
      }
    }
  });
}

void run_hc(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto N = as_size(cfg.integer("hc.N"));
  const auto replicas = as_size(cfg.integer("hc.replicas"));
  const auto law = make_law(cfg, N);
  const auto disorder = make_disorder(cfg);
  const auto solver = make_solver(cfg);
  std::vector<CriticalPoint> points;
  double spent = 0.0;
  for (double beta : cfg.reals("hc.beta")) {
    try {
      points.push_back(critical_point(law, disorder, beta, solver, N, replicas, ctx.seed, ctx.budget - spent));
      spent += static_cast<double>(points.back().evaluations) * cost(N, replicas);
    } catch (const BudgetExceeded& e) {
      ctx.out_of_budget(e);
      break;
    }
  }
  ctx.write("critical.csv", [&](std::ostream& os) { write_critical_csv(os, points); });
  write_trace(ctx, points);
}

void run_scan(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto N = as_size(cfg.integer("scan.N"));
  const auto replicas = as_size(cfg.integer("scan.replicas"));
  const auto law = make_law(cfg, N);
  const auto scan = universality_scan(law, make_disorder(cfg), cfg.reals("scan.beta_grid"), N, replicas, ctx.seed,
                                      make_solver(cfg), ctx.budget);
  if (!scan.complete) {
    ctx.partial = true;
    ctx.note = "budget exhausted after " + std::to_string(scan.points.size()) + " beta values";
  }
  ctx.write("scan.csv", [&](std::ostream& os) { write_scan_csv(os, scan); });
  ctx.write("scan_summary.csv", [&](std::ostream& os) { write_scan_summary_csv(os, scan); });
  std::vector<CriticalPoint> points;
  for (const auto& p : scan.points) points.push_back(p.point);
  write_trace(ctx, points);
}

void run_smoothing(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto N = as_size(cfg.integer("smoothing.N"));
  const auto replicas = as_size(cfg.integer("smoothing.replicas"));
  const double beta = cfg.real("smoothing.beta");
  const auto law = make_law(cfg, N);
  const auto disorder = make_disorder(cfg);
  for (double d : cfg.reals("smoothing.h_offsets")) {
    if (d < 0.0) throw DomainError("smoothing.h_offsets must be nonnegative");
  }
  CriticalPoint cp;
  try {
    cp = critical_point(law, disorder, beta, make_solver(cfg), N, replicas, ctx.seed, ctx.budget);
  } catch (const BudgetExceeded& e) {
    ctx.out_of_budget(e);
    return;
  }
  ctx.write("critical.csv", [&](std::ostream& os) { write_critical_csv(os, std::span(&cp, 1)); });
  std::vector<double> hs;
  for (double d : cfg.reals("smoothing.h_offsets")) hs.push_back(cp.h_c + d);
  SmoothingReport rep;
  try {
    rep = smoothing_check(law, disorder, beta, cp.h_c, hs, N, replicas, ctx.seed,
                          ctx.budget - static_cast<double>(cp.evaluations) * cost(N, replicas));
  } catch (const BudgetExceeded& e) {
    ctx.out_of_budget(e);
    return;
  }
  ctx.write("smoothing.csv", [&](std::ostream& os) {
    csv::header(os, "smoothing", {"beta", "h_c", "h", "F", "stderr", "bound", "violation", "negative"});
    for (const auto& r : rep.rows) {
      csv::row(os, {csv::num(beta), csv::num(cp.h_c), csv::num(r.h), csv::num(r.F), csv::num(r.std_error),
                    csv::num(r.bound), csv::num(r.violation ? 1 : 0), csv::num(r.negative ? 1 : 0)});
    }
  });
}

void run_alpha_gt1(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto N = as_size(cfg.integer("alpha_gt1.N"));
  const auto replicas = as_size(cfg.integer("alpha_gt1.replicas"));
  const auto law = make_law(cfg, N);
  const auto disorder = make_disorder(cfg);
  const auto solver = make_solver(cfg);
  // One beta at a time so that a budget stop keeps the finished rows.
  std::vector<AlphaGt1Row> rows;
  AlphaGt1Report rep;
  double spent = 0.0;
  for (double beta : cfg.reals("alpha_gt1.beta_grid")) {
    const double one[] = {beta};
    try {
      auto r = alpha_gt1_check(law, disorder, one, N, replicas, ctx.seed, solver, ctx.budget - spent);
      spent += static_cast<double>(r.rows.front().point.evaluations) * cost(N, replicas);
      rep.target = r.target;
      rep.mean_return_time = r.mean_return_time;
      rows.push_back(std::move(r.rows.front()));
    } catch (const BudgetExceeded& e) {
      ctx.out_of_budget(e);
      break;
    }
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.point.beta < b.point.beta; });
  ctx.write("alpha_gt1.csv", [&](std::ostream& os) {
    csv::header(os, "alpha_gt1", {"beta", "h_c", "ci_lo", "ci_hi", "ratio", "target", "rel_err", "mean_return_time"});
    for (const auto& r : rows) {
      csv::row(os, {csv::num(r.point.beta), csv::num(r.point.h_c), csv::num(r.point.ci_lo), csv::num(r.point.ci_hi),
                    csv::num(r.ratio), csv::num(rep.target), csv::num(r.rel_err), csv::num(rep.mean_return_time)});
    }
  });
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

}  // namespace

int run(const RunConfig& config, const RunOptions& options, std::ostream& log) {
  const auto started = std::chrono::steady_clock::now();
  const std::string started_utc = utc_now();
  fs::create_directories(options.out_dir);
  Context ctx(config, options.out_dir);
  ctx.seed = options.seed.value_or(static_cast<std::uint64_t>(config.integer("seed")));
  ctx.budget = options.budget.value_or(config.real("budget"));
  const int workers = options.workers.value_or(static_cast<int>(config.integer("workers")));
  if (workers > 0) omp_set_num_threads(workers);

  int code = kOk;
  std::string status = "ok";
  try {
    ctx.write("config.txt", [&](std::ostream& os) { os << config.text; });
    const auto& e = config.experiment;
    if (e == "sim") run_sim(ctx);
    else if (e == "psi") run_psi(ctx);
    else if (e == "uconv") run_uconv(ctx);
    else if (e == "cg-check") run_cg_check(ctx);
    else if (e == "rege") run_rege(ctx);
    else if (e == "hc") run_hc(ctx);
    else if (e == "scan") run_scan(ctx);
    else if (e == "smoothing") run_smoothing(ctx);
    else if (e == "alpha-gt1") run_alpha_gt1(ctx);
    else throw DomainError("unknown experiment '" + e + "'");
    if (ctx.partial) {
      code = kBudgetPartial;
      status = "partial";
    }
  } catch (const BudgetExceeded& e) {
    code = kBudgetPartial;
    status = "partial";
    ctx.note = e.what();
  } catch (const DomainError& e) {
    code = kConfigError;
    status = "config_error";
    ctx.note = e.what();
  } catch (const ConvergenceError& e) {
    code = kDiagnostic;
    status = "diagnostic";
    ctx.note = std::string(e.what()) + " (last value " + csv::num(e.last_value()) + ")";
  } catch (const DiagnosticError& e) {
    code = kDiagnostic;
    status = "diagnostic";
    ctx.note = e.what();
  }
  if (!ctx.note.empty()) log << config.experiment << ": " << ctx.note << '\n';

  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  std::string outputs;
  for (const auto& o : ctx.outputs) outputs += (outputs.empty() ? "" : ",") + o;
  std::ofstream m(options.out_dir / "manifest.txt", std::ios::binary);
  m << "experiment=" << config.experiment << '\n'
    << "config_file=" << options.config_path << '\n'
    << "config_hash=fnv1a64:" << hex64(fnv1a(config.text)) << '\n'
    << "seed=" << ctx.seed << '\n'
    << "workers=" << (workers > 0 ? workers : omp_get_max_threads()) << '\n'
    << "budget=" << csv::num(ctx.budget) << '\n'
    << "version=" << PIN_VERSION << '\n'
    << "compiler=" << __VERSION__ << '\n'
    << "started_utc=" << started_utc << '\n'
    << "wall_time_s=" << csv::num(wall) << '\n'
    << "status=" << status << '\n'
    << "exit_code=" << code << '\n'
    << "outputs=" << outputs << '\n'
    << "message=" << one_line(ctx.note) << '\n';
  return code;
}

}  // namespace pin::cli
