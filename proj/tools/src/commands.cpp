#include "ifbs_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ifbs/analysis.hpp"
#include "ifbs/errors.hpp"
#include "ifbs/instance_io.hpp"
#include "ifbs/linalg.hpp"
#include "ifbs/report_json.hpp"
#include "ifbs/trace_io.hpp"
#include "ifbs_cli/config.hpp"
#include "ifbs_cli/schedule_spec.hpp"

namespace ifbs::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kThresholds[] = {1e-2, 1e-4, 1e-6, 1e-8, 1e-10};

void check_spec(const InstanceSpec& s) {
  if (s.m < 1 || s.n < 1) throw UsageError("m and n must be positive");
  if (s.sparsity < 0 || s.sparsity > s.n) {
    throw UsageError("sparsity " + std::to_string(s.sparsity) + " must lie in [0, n = " +
                     std::to_string(s.n) + "]");
  }
  if (!(s.entry_std > 0.0)) throw UsageError("std must be positive");
  if (!(s.rho >= 0.0)) throw UsageError("rho must be nonnegative");
}

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw UsageError("cannot open " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw UsageError(p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream out(p);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::optional<double> curvature_on(const L1LSInstance& inst, const IndexSet& e) {
  if (e.empty() || static_cast<Index>(e.size()) > linalg::kDefaultRestrictedCap) return std::nullopt;
  return linalg::smallest_restricted_eigenvalue(inst.a(), e);
}

json instance_digest(const L1LSInstance& inst) {
  return {{"m", inst.rows()},
          {"n", inst.cols()},
          {"rho", inst.rho()},
          {"lipschitz", inst.lipschitz()},
          {"b_norm", inst.b().norm()}};
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  InstanceSpec spec;
  bool seed_given = false;
  std::string a_csv;
  std::string b_csv;
  std::string out;
};

int cmd_generate(const GenerateArgs& g, std::ostream& out) {
  std::optional<L1LSInstance> inst;
  if (!g.a_csv.empty() || !g.b_csv.empty()) {
    if (g.a_csv.empty() || g.b_csv.empty()) throw UsageError("--a-csv and --b-csv go together");
    if (!(g.spec.rho >= 0.0)) throw UsageError("rho must be nonnegative");
    inst.emplace(load_instance_csv(g.a_csv, g.b_csv, g.spec.rho));
  } else {
    if (!g.seed_given) throw UsageError("--seed is required when generating");
    check_spec(g.spec);
    inst.emplace(generate_instance(g.spec));
  }
  save_instance(g.out, *inst);
  json digest = instance_digest(*inst);
  digest["path"] = g.out;
  out << digest.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// run

L1LSInstance experiment_instance(const ExperimentConfig& cfg) {
  if (cfg.instance) return load_instance(*cfg.instance);
  if (cfg.a_csv) return load_instance_csv(*cfg.a_csv, *cfg.b_csv, cfg.generate.rho);
  check_spec(cfg.generate);
  return generate_instance(cfg.generate);
}

struct Prepared {
  AlgorithmConfig cfg;
  std::optional<Schedule> schedule;
  std::string error;  // schedule construction failed numerically
};

std::optional<std::int64_t> first_below(const SolverTrace& tr, double threshold) {
  for (const TraceRow& r : tr.rows) {
    if (r.gap <= threshold) return r.k;
  }
  return std::nullopt;
}

struct RunArgs {
  std::string config;
  std::string output;
  bool timings = false;
};

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg = load_config(args.config);
  if (!args.output.empty()) cfg.output = args.output;
  const L1LSInstance inst = experiment_instance(cfg);
  const double l = inst.lipschitz();

  // Parse every step rule before the expensive reference solve.
  std::vector<StepRule> steps;
  for (const auto& a : cfg.algorithms) steps.push_back(parse_step(a.step, l));

  fs::create_directories(cfg.output);
  save_instance(cfg.output / "instance.bin", inst);

  const ReferenceSolution ref = reference_solve(inst, cfg.gap_tol);
  const ManifoldClassification de = classify_de(ref.h_star, inst.rho(), cfg.e_threshold);
  const std::optional<double> l_e = curvature_on(inst, de.e);

  json ref_json = to_json(ref);
  ref_json["lipschitz"] = l;
  ref_json["l_E"] = l_e ? json(*l_e) : json(nullptr);
  ref_json["e_threshold"] = cfg.e_threshold;
  ref_json["E"] = de.e;
  ref_json["D"] = de.d;
  ref_json["x_star"] = std::vector<double>(ref.x_star.data(), ref.x_star.data() + ref.x_star.size());
  write_json(cfg.output / "reference.json", ref_json);

  ScheduleContext ctx{l, &inst, l_e};
  std::vector<Prepared> prepared;
  for (std::size_t i = 0; i < cfg.algorithms.size(); ++i) {
    Prepared p{cfg.algorithms[i], std::nullopt, ""};
    try {
      p.schedule = parse_schedule(p.cfg.schedule, steps[i], ctx);
    } catch (const NumericalFailure& e) {
      p.error = e.what();
    }
    prepared.push_back(std::move(p));
  }

  const std::int64_t stride = cfg.effective_stride(inst.cols());
  const Vector x0 = Vector::Zero(inst.cols());
  json comparison;
  comparison["F_star"] = ref.f_star;
  comparison["reference_gap"] = ref.duality_gap;
  comparison["thresholds"] = kThresholds;
  comparison["algorithms"] = json::array();
  bool aborted = false;

  for (Prepared& p : prepared) {
    json entry{{"name", p.cfg.name}, {"schedule", p.cfg.schedule}};
    json summary{{"name", p.cfg.name}, {"step", p.cfg.step}};
    std::optional<SolverTrace> trace;
    if (p.schedule) {
      summary["validity"] = to_json(validate(*p.schedule, std::clamp<std::int64_t>(p.cfg.max_iter, 1, 100000), l));
      RunOptions opt;
      opt.algorithm = p.cfg.algorithm;
      opt.termination = {p.cfg.max_iter, p.cfg.target_gap, ref.f_star, p.cfg.step_tol};
      opt.restart_test = p.cfg.restart_test;
      opt.snapshot_stride = stride;
      try {
        trace = run(inst.problem(), *p.schedule, x0, opt);
      } catch (const NumericalFailure& e) {
        p.error = e.what();
      }
    }
    if (!trace) {
      aborted = true;
      err << p.cfg.name << ": aborted: " << p.error << '\n';
      entry["status"] = summary["status"] = "aborted";
      entry["error"] = summary["error"] = p.error;
      write_json(cfg.output / (p.cfg.name + ".json"), summary);
      comparison["algorithms"].push_back(entry);
      continue;
    }

    {
      std::ofstream csv(cfg.output / (p.cfg.name + ".csv"));
      write_trace_csv(csv, *trace);
    }
    if (stride > 0) {
      std::ofstream snap(cfg.output / (p.cfg.name + ".snap"), std::ios::binary);
      write_snapshots(snap, *trace);
    }
    summary.update(trace_summary_json(*trace, args.timings));
    summary["status"] = "ok";
    write_json(cfg.output / (p.cfg.name + ".json"), summary);

    entry["status"] = "ok";
    entry["iterations"] = trace->iterations;
    entry["termination"] = trace->termination;
    entry["final_gap"] = trace->final_objective - ref.f_star;
    auto& ks = entry["first_k_below"] = json::array();
    for (double t : kThresholds) {
      const auto k = first_below(*trace, t);
      ks.push_back(k ? json(*k) : json(nullptr));
    }
    comparison["algorithms"].push_back(entry);

    char line[256];
    const auto k10 = first_below(*trace, 1e-10);
    std::snprintf(line, sizeof line, "%-16s iterations=%-8lld final_gap=%-12.3e k(1e-10)=%s\n",
                  p.cfg.name.c_str(), static_cast<long long>(trace->iterations),
                  trace->final_objective - ref.f_star, k10 ? std::to_string(*k10).c_str() : "-");
    out << line;
  }
  write_json(cfg.output / "comparison.json", comparison);
  return aborted ? kExitNumerical : kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

struct AnalyzeArgs {
  std::string run_dir;
  std::vector<std::string> algorithms;
  std::optional<double> e_threshold;
  double window = 0.5;
  bool rate_only = false;
};

bool fista_like(const std::string& schedule) {
  return schedule.find("capped") == std::string::npos &&
         (schedule.find("fista-bt") != std::string::npos ||
          schedule.find("chambolle-dossal") != std::string::npos);
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
  const fs::path dir = args.run_dir;
  const L1LSInstance inst = load_instance(dir / "instance.bin");
  const json ref_json = read_json(dir / "reference.json");
  const auto xs = ref_json.at("x_star").get<std::vector<double>>();
  if (static_cast<Index>(xs.size()) != inst.cols()) throw UsageError("reference.json does not match instance.bin");
  const Vector x_star = Eigen::Map<const Vector>(xs.data(), static_cast<Index>(xs.size()));
  const Vector h_star = inst.least_squares().gradient(x_star);
  const double f_star = ref_json.at("F_star").get<double>();
  const double ref_gap = ref_json.at("duality_gap").get<double>();
  const double threshold = args.e_threshold.value_or(ref_json.value("e_threshold", kDefaultEThreshold));
  const ManifoldClassification de = classify_de(h_star, inst.rho(), threshold);
  const std::optional<double> l_e = curvature_on(inst, de.e);

  std::vector<std::string> names = args.algorithms;
  if (names.empty()) {
    const json comparison = read_json(dir / "comparison.json");
    for (const auto& a : comparison.at("algorithms")) {
      if (a.at("status") == "ok") names.push_back(a.at("name").get<std::string>());
    }
  }
  if (names.empty()) throw UsageError("no completed runs in " + dir.string());

  bool failed = false;
  for (const std::string& name : names) {
    const json summary = read_json(dir / (name + ".json"));
    if (summary.value("status", "") != "ok") throw UsageError(name + ": run did not complete");
    const std::string schedule = summary.at("schedule").get<std::string>();
    const std::int64_t stride = summary.at("snapshot_stride").get<std::int64_t>();

    SolverTrace trace;
    {
      std::ifstream csv(dir / (name + ".csv"));
      if (!csv) throw UsageError("cannot open " + (dir / (name + ".csv")).string());
      trace.rows = read_trace_csv(csv);
    }
    if (stride > 0) {
      std::ifstream snap(dir / (name + ".snap"), std::ios::binary);
      if (!snap) throw UsageError("cannot open snapshots for " + name);
      read_snapshots(snap, trace);
    }
    if (trace.rows.empty()) throw UsageError(name + ": empty trace");

    json report{{"name", name}, {"schedule", schedule}};
    std::int64_t start_k = 1;
    if (!args.rate_only) {
      if (stride != 1) {
        throw UsageError(name + ": snapshots were stored every " + std::to_string(stride) +
                         " iterations; identification analysis needs snapshot stride 1 (set "
                         "`stride = 1` in the config and rerun, or pass --rate-only)");
      }
      ManifoldReport m = detect_identification(trace, de, h_star, inst.rho());

      double al = 1.0, au = 0.0;
      bool lambda_constant = true;
      for (const TraceRow& r : trace.rows) {
        al = std::min(al, r.alpha);
        au = std::max(au, r.alpha);
        lambda_constant = lambda_constant && r.lambda == trace.rows.front().lambda;
      }
      if (al > 0.0 && au < 1.0 && lambda_constant) {
        const Vector& x0 = trace.snapshots.front().x;
        const double dist = (x0 - x_star).squaredNorm();
        const BoundInputs in{.rho = inst.rho(),
                             .lipschitz = inst.lipschitz(),
                             .lambda1 = trace.rows.front().lambda,
                             .alpha_lower = al,
                             .alpha_upper = au,
                             .alpha1 = trace.rows.front().alpha,
                             .objective_gap1 = trace.rows.front().objective - f_star,
                             .delta1_sq = 0.0,
                             .dist1_sq = dist,
                             .dist0_sq = dist,
                             .omega = de.omega};
        const IdentificationBounds b = identification_bounds(in);
        m.bound_k_e = b.k_e;
        m.bound_k_d = b.k_d;
      } else if (fista_like(schedule)) {
        m.note += "; no explicit bound: alpha_k -> 1, so identification is finite but the "
                  "iteration count is not bounded a priori";
      } else {
        m.note += "; no explicit bound: needs a constant step and momentum in [a, b] with 0 < a, b < 1";
      }
      if (m.k_sign && m.k_support) start_k = std::max(*m.k_sign, *m.k_support) + 1;
      report["manifold"] = to_json(m);
    }

    RateOptions ro;
    ro.window_fraction = args.window;
    ro.start_k = start_k;
    ro.gap_floor = 10.0 * ref_gap;
    if (l_e && *l_e > 0.0) ro.theoretical_rate = 1.0 - std::sqrt(std::min(1.0, *l_e * trace.rows.front().lambda));
    try {
      report["rate"] = to_json(fit_local_rate(trace, ro));
    } catch (const NumericalFailure& e) {
      failed = true;
      report["rate"] = {{"error", e.what()}};
      err << name << ": " << e.what() << '\n';
    }
    report["l_E"] = l_e ? json(*l_e) : json(nullptr);
    write_json(dir / (name + ".analysis.json"), report);
    out << name;
    if (report.contains("manifold")) {
      const json& m = report["manifold"];
      out << " K_sign=" << m["K_sign"].dump() << " K_support=" << m["K_support"].dump()
          << " bound_K_E=" << m["bound_K_E"].dump() << " bound_K_D=" << m["bound_K_D"].dump();
    }
    if (report["rate"].contains("fitted_rate")) {
      out << " q=" << report["rate"]["fitted_rate"].dump() << " r2=" << report["rate"]["r_squared"].dump()
          << " oscillations=" << report["rate"]["oscillation_count"].dump();
    }
    out << '\n';
  }
  return failed ? kExitNumerical : kExitOk;
}

// ---------------------------------------------------------------------------
// validate-schedule

struct ValidateArgs {
  std::string schedule;
  std::string step = "1/L";
  std::optional<double> lipschitz;
  std::string instance;
  std::int64_t horizon = 10000;
  double gap_tol = 1e-12;
};

int cmd_validate(const ValidateArgs& args, std::ostream& out) {
  std::optional<L1LSInstance> inst;
  if (!args.instance.empty()) inst.emplace(load_instance(args.instance));
  if (!inst && !args.lipschitz) throw UsageError("give --lipschitz or --instance");
  if (args.horizon < 1) throw UsageError("--horizon must be positive");
  const double l = args.lipschitz ? *args.lipschitz : inst->lipschitz();
  if (!(l > 0.0)) throw UsageError("--lipschitz must be positive");

  ScheduleContext ctx{l, inst ? &*inst : nullptr, std::nullopt};
  if (inst && args.schedule.find("optimal") != std::string::npos) {
    const ReferenceSolution ref = reference_solve(*inst, args.gap_tol);
    ctx.local_curvature = curvature_on(*inst, classify_de(ref.h_star, inst->rho()).e);
  }
  const StepRule step = parse_step(args.step, l);
  const Schedule s = parse_schedule(args.schedule, step, ctx);
  json j = to_json(validate(s, args.horizon, l));
  j["schedule"] = s.describe();
  j["lipschitz"] = l;
  j["horizon"] = args.horizon;
  out << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inertial forward-backward splitting experiments for l1-regularized least squares", "ifbs"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a seeded random instance (or import CSV) to a binary file");
  g->add_option("--m", gen.spec.m, "Rows of A")->capture_default_str();
  g->add_option("--n", gen.spec.n, "Columns of A")->capture_default_str();
  g->add_option("--sparsity", gen.spec.sparsity, "Nonzeros of the planted signal")->capture_default_str();
  g->add_option("--std", gen.spec.entry_std, "Standard deviation of the entries of A")->capture_default_str();
  g->add_option("--rho", gen.spec.rho, "l1 weight")->capture_default_str();
  auto* seed_opt = g->add_option("--seed", gen.spec.seed, "Generator seed");
  g->add_option("--a-csv", gen.a_csv, "Import A from CSV instead of generating");
  g->add_option("--b-csv", gen.b_csv, "Import b from CSV instead of generating");
  g->add_option("--out", gen.out, "Output path")->required();

  RunArgs run_args;
  auto* r = app.add_subcommand("run", "Solve the reference problem, then run every configured algorithm");
  r->add_option("--config", run_args.config, "Experiment config file")->required();
  r->add_option("--output", run_args.output, "Override the config's output directory");
  r->add_flag("--timings", run_args.timings, "Record wall-clock time in the summaries");

  AnalyzeArgs an;
  auto* a = app.add_subcommand("analyze", "Manifold identification and local-rate reports for a run directory");
  a->add_option("--run-dir", an.run_dir, "Output directory of `run`")->required();
  a->add_option("--algorithm", an.algorithms, "Restrict to these algorithm names");
  a->add_option("--e-threshold", an.e_threshold, "Override the E classification threshold");
  a->add_option("--window", an.window, "Fraction of usable iterations used by the rate fit")
      ->capture_default_str()
      ->check(CLI::Range(1e-6, 1.0));
  a->add_flag("--rate-only", an.rate_only, "Skip identification (allows strided snapshots)");

  ValidateArgs va;
  auto* v = app.add_subcommand("validate-schedule", "Check a schedule against the convergence hypotheses");
  v->add_option("--schedule", va.schedule, "Schedule text, e.g. \"capped(fista-bt, cap=0.99)\"")->required();
  v->add_option("--step", va.step, "Step rule, e.g. 1/L or \"0.5/L, 1/L@100\"")->capture_default_str();
  v->add_option("--lipschitz", va.lipschitz, "Lipschitz constant L");
  v->add_option("--instance", va.instance, "Instance file (provides L, and l_E for `optimal`)");
  v->add_option("--horizon", va.horizon, "Iterations simulated")->capture_default_str();

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (g->parsed()) {
      gen.seed_given = seed_opt->count() > 0;
      return cmd_generate(gen, out);
    }
    if (r->parsed()) return cmd_run(run_args, out, err);
    if (a->parsed()) return cmd_analyze(an, out, err);
    if (v->parsed()) return cmd_validate(va, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ifbs::cli
