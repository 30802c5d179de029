#include "minkflow/cli.hpp"

#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "minkflow/config.hpp"
#include "minkflow/error.hpp"
#include "minkflow/io.hpp"
#include "minkflow/minkowski.hpp"
#include "minkflow/shapes.hpp"
#include "minkflow/verify.hpp"

namespace fs = std::filesystem;

namespace minkflow {

namespace {

using Json = nlohmann::ordered_json;

const std::set<std::string> kCommonKeys{"mode", "n", "n_theta", "n_phi", "seed", "out"};
const std::set<std::string> kFlowKeys{"alpha",      "beta",         "f",           "even_only",  "initial",
                                      "symmetrize", "dt_init",      "dt_min",      "dt_max",     "cfl_safety",
                                      "tol_residual", "tol_J_rate", "max_steps",   "renormalize_every",
                                      "snapshot_every", "eps_convex", "polar_filter", "burn_in"};
const std::set<std::string> kLpKeys{"p",          "phi",          "even_only", "initial",      "symmetrize",
                                    "cfl_safety", "tol_residual", "tol_J_rate", "max_steps",   "polar_filter",
                                    "dt_max",     "snapshot_every"};
const std::set<std::string> kVerifyKeys{"samples", "checks", "tolerance"};

std::set<std::string> merged(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::set<std::string> out = a;
  out.insert(b.begin(), b.end());
  return out;
}

struct Context {
  RunConfig cfg;
  GridPtr grid;
  std::uint64_t seed = 0;
  fs::path out_dir;
  fs::path base_dir;
};

Context open(const CliArgs& args, const std::string& mode, const std::set<std::string>& keys,
             const std::set<std::string>& prefixes = {}) {
  Context ctx{RunConfig::load(args.config_path), nullptr, 0, {}, {}};
  const RunConfig& cfg = ctx.cfg;
  cfg.reject_unknown(merged(kCommonKeys, keys), prefixes);
  if (cfg.has("mode") && cfg.get_string("mode", "") != mode) {
    cfg.fail("mode", "config is for mode '" + cfg.get_string("mode", "") + "', command is '" + mode + "'");
  }
  const long n = cfg.get_long("n", 2);
  if (n != 1 && n != 2) cfg.fail("n", "n must be 1 or 2");
  const long nt = cfg.get_long("n_theta", n == 2 ? 32 : 128);
  const long np = cfg.get_long("n_phi", 2 * nt);
  try {
    ctx.grid = SphereGrid::build(static_cast<int>(n), static_cast<int>(nt), static_cast<int>(np));
  } catch (const Error& e) {
    cfg.fail(cfg.has("n_phi") && n == 2 ? "n_phi" : "n_theta", e.what());
  }
  const long seed = cfg.get_long("seed", 0);
  if (seed < 0) cfg.fail("seed", "seed must be >= 0");
  ctx.seed = args.seed.value_or(static_cast<std::uint64_t>(seed));
  ctx.base_dir = fs::path(args.config_path).parent_path();
  ctx.out_dir = args.out_dir ? fs::path(*args.out_dir) : fs::path(cfg.get_string("out", "."));
  return ctx;
}

fs::path resolve(const Context& ctx, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : ctx.base_dir / path;
}

// "file:<body file>" or a polynomial in x1, x2, x3.
ScalarField field_from_spec(const Context& ctx, const std::string& key, const std::string& fallback) {
  const RunConfig& cfg = ctx.cfg;
  const std::string spec = cfg.get_string(key, fallback);
  try {
    if (spec.rfind("file:", 0) == 0) {
      const SupportField samples = read_body(resolve(ctx, spec.substr(5)).string());
      if (!samples.grid->same_layout(*ctx.grid)) cfg.fail(key, "sample file grid differs from the run grid");
      return samples.u;
    }
    const SpherePolynomial poly = SpherePolynomial::parse(spec);
    if (cfg.get_bool("even_only", false) && !poly.even()) cfg.fail(key, "'" + spec + "' has odd terms but even_only = true");
    return sample(*ctx.grid, poly);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config && std::string(e.what()).find(cfg.source()) != std::string::npos) throw;
    cfg.fail(key, "bad '" + key + "': " + e.what());
  }
}

SupportField initial_from_spec(const Context& ctx, const std::string& fallback) {
  const RunConfig& cfg = ctx.cfg;
  const std::string spec = cfg.get_string("initial", fallback);
  try {
    if (spec.rfind("file:", 0) == 0) {
      SupportField b = read_body(resolve(ctx, spec.substr(5)).string());
      if (!b.grid->same_layout(*ctx.grid)) cfg.fail("initial", "body file grid differs from the run grid");
      b.grid = ctx.grid;
      return b;
    }
    return make_shape(parse_shape(spec, ctx.grid->dim(), ctx.seed), ctx.grid);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::config && std::string(e.what()).find(cfg.source()) != std::string::npos) throw;
    cfg.fail("initial", "bad initial body: " + std::string(e.what()));
  }
}

std::optional<bool> symmetric_option(const RunConfig& cfg) {
  const std::string s = cfg.get_string("symmetrize", "auto");
  if (s == "auto") return std::nullopt;
  return cfg.get_bool("symmetrize", false);
}

void prepare_out(const Context& ctx) {
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create output directory '" + ctx.out_dir.string() + "'");
}

Json monitors_json(const Trajectory& tr) {
  const Monitors& m = tr.monitors;
  Json j;
  j["monotonicity_violations"] = m.monotonicity_violations;
  j["worst_monotonicity_excess"] = m.worst_monotonicity_excess;
  j["eta_bound_violations"] = m.eta_bound_violations;
  j["u_bound_violations"] = m.u_bound_violations;
  j["max_Z0_drift"] = m.max_Z0_drift;
  j["rejected_steps"] = m.rejected_steps;
  return j;
}

Json grid_json(const Context& ctx) {
  Json j;
  j["n"] = ctx.grid->dim();
  j["n_theta"] = ctx.grid->n_theta();
  j["n_phi"] = ctx.grid->dim() == 2 ? ctx.grid->n_phi() : 0;
  return j;
}

void write_snapshots(const Context& ctx, const Trajectory& tr, const std::string& what) {
  for (const Snapshot& s : tr.snapshots) {
    std::ostringstream name;
    name << "snapshot_" << std::setw(7) << std::setfill('0') << s.step << ".body";
    write_body(s.u, (ctx.out_dir / name.str()).string(), what + " step " + std::to_string(s.step));
  }
}

std::string short_num(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

int status_exit(FlowStatus s) {
  switch (s) {
    case FlowStatus::converged: return exit_ok;
    case FlowStatus::max_steps: return exit_max_steps;
    case FlowStatus::step_failure: return exit_step_failure;
  }
  return exit_step_failure;
}

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    std::string msg = e.what();
    const std::string prefix = std::string(to_string(ErrorCode::config)) + ": ";
    if (e.code() == ErrorCode::config && msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
    err << "minkflow: " << msg << "\n";
    return e.code() == ErrorCode::config ? exit_config : exit_step_failure;
  }
}

}  // namespace

int cmd_flow(const CliArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Context ctx = open(args, "flow", kFlowKeys);
    const RunConfig& cfg = ctx.cfg;
    if (!cfg.has("alpha")) cfg.fail("alpha", "missing required key 'alpha'");
    if (!cfg.has("beta")) cfg.fail("beta", "missing required key 'beta'");
    const double alpha = cfg.get_double("alpha", 0.0);
    const double beta = cfg.get_double("beta", 1.0);
    Regime regime;
    try {
      regime = classify(ctx.grid->dim(), alpha, beta);
    } catch (const Error& e) {
      cfg.fail(cfg.line_of("alpha") >= cfg.line_of("beta") ? "alpha" : "beta", e.what());
    }
    const SupportField initial = initial_from_spec(ctx, "sphere(1)");
    ScalarField f = field_from_spec(ctx, "f", "1");
    const std::optional<bool> sym_opt = symmetric_option(cfg);
    const bool sym = sym_opt.value_or(requires_even(regime));

    FlowConfig fc;
    try {
      fc.params = FlowParams::make(*ctx.grid, alpha, beta, std::move(f), sym);
    } catch (const Error& e) {
      cfg.fail("f", e.what());
    }
    fc.initial = initial;
    fc.symmetrize = sym;
    fc.dt_init = cfg.get_double("dt_init", fc.dt_init);
    fc.dt_min = cfg.get_double("dt_min", fc.dt_min);
    fc.dt_max = cfg.get_double("dt_max", fc.dt_max);
    fc.cfl_safety = cfg.get_double("cfl_safety", fc.cfl_safety);
    fc.tol_residual = cfg.get_double("tol_residual", fc.tol_residual);
    fc.tol_J_rate = cfg.get_double("tol_J_rate", fc.tol_J_rate);
    fc.max_steps = cfg.get_long("max_steps", fc.max_steps);
    fc.renormalize_every = static_cast<int>(cfg.get_long("renormalize_every", fc.renormalize_every));
    fc.snapshot_every = static_cast<int>(cfg.get_long("snapshot_every", fc.snapshot_every));
    fc.eps_convex = cfg.get_double("eps_convex", fc.eps_convex);
    fc.polar_filter = cfg.get_double("polar_filter", fc.polar_filter);
    fc.burn_in = cfg.get_long("burn_in", fc.burn_in);
    try {
      fc.validate();
    } catch (const Error& e) {
      const std::string msg = e.what();
      std::string key = "initial";
      for (const char* k : {"dt_min", "dt_max", "dt_init", "cfl_safety", "tol_residual", "tol_J_rate", "max_steps",
                            "renormalize_every", "snapshot_every", "polar_filter"}) {
        if (msg.find(k) != std::string::npos) key = k;
      }
      if (msg.find("even f") != std::string::npos) key = "f";
      cfg.fail(key, msg);
    }

    prepare_out(ctx);
    const Trajectory tr = run(fc);
    const FlowState& s = tr.final_state;
    std::ostringstream prov;
    prov << "flow alpha=" << fmt17(alpha) << " beta=" << fmt17(beta) << " f=" << cfg.get_string("f", "1")
         << " initial=" << cfg.get_string("initial", "sphere(1)") << " seed=" << ctx.seed << " step=" << s.step;
    write_trajectory_csv(tr, (ctx.out_dir / "trajectory.csv").string());
    write_body(s.u, (ctx.out_dir / "final.body").string(), prov.str());
    if (ctx.grid->dim() == 2) export_obj(s.u, (ctx.out_dir / "final.obj").string());
    if (fc.snapshot_every > 0) write_snapshots(ctx, tr, "flow");

    Json j;
    j["command"] = "flow";
    j["status"] = to_string(tr.status);
    j["regime"] = to_string(tr.regime);
    j["planar"] = tr.planar;
    j["grid"] = grid_json(ctx);
    j["alpha"] = alpha;
    j["beta"] = beta;
    j["seed"] = ctx.seed;
    j["symmetric"] = sym;
    j["steps"] = s.step;
    j["t"] = s.t;
    j["c"] = tr.c();
    j["residual"] = s.residual;
    j["J"] = s.J;
    j["Z0"] = s.Z0;
    j["lambda_min"] = s.lambda_min;
    j["monitors"] = monitors_json(tr);
    if (!tr.failure.empty()) j["failure"] = tr.failure;
    write_text((ctx.out_dir / "summary.json").string(), j.dump(2) + "\n");

    out << "flow: " << to_string(tr.status) << " after " << s.step << " steps, regime " << to_string(tr.regime)
        << ", c = " << fmt17(tr.c()) << ", residual = " << fmt17(s.residual) << "\n";
    if (!tr.failure.empty()) err << "minkflow: " << tr.failure << "\n";
    return status_exit(tr.status);
  });
}

int cmd_lp_solve(const CliArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Context ctx = open(args, "lp-solve", kLpKeys);
    const RunConfig& cfg = ctx.cfg;
    if (!cfg.has("p")) cfg.fail("p", "missing required key 'p'");
    const double p = cfg.get_double("p", 0.0);
    const int n = ctx.grid->dim();
    if (!(p > -n - 1.0)) cfg.fail("p", "p = " + fmt17(p) + " must exceed -n-1 = " + std::to_string(-n - 1));

    LpProblem pr{p, ctx.grid, {}};
    std::optional<SupportField> manufactured_from;
    const std::string phi_spec = cfg.get_string("phi", "1");
    if (phi_spec.rfind("manufactured(", 0) == 0 && phi_spec.back() == ')') {
      const std::string inner = phi_spec.substr(13, phi_spec.size() - 14);
      try {
        manufactured_from = make_shape(parse_shape(inner, n, ctx.seed), ctx.grid);
        pr.phi = manufactured_phi(*manufactured_from, p);
      } catch (const Error& e) {
        cfg.fail("phi", "bad manufactured body: " + std::string(e.what()));
      }
    } else {
      pr.phi = field_from_spec(ctx, "phi", "1");
    }
    try {
      validate(pr);
    } catch (const Error& e) {
      cfg.fail("phi", e.what());
    }
    const SupportField initial = initial_from_spec(ctx, "sphere(1)");

    LpOptions opts;
    opts.cfl_safety = cfg.get_double("cfl_safety", opts.cfl_safety);
    opts.tol_residual = cfg.get_double("tol_residual", opts.tol_residual);
    opts.tol_J_rate = cfg.get_double("tol_J_rate", opts.tol_J_rate);
    opts.max_steps = cfg.get_long("max_steps", opts.max_steps);
    opts.polar_filter = cfg.get_double("polar_filter", opts.polar_filter);
    opts.dt_max = cfg.get_double("dt_max", opts.dt_max);
    opts.snapshot_every = static_cast<int>(cfg.get_long("snapshot_every", opts.snapshot_every));
    opts.symmetric = symmetric_option(cfg);
    if (opts.max_steps < 0) cfg.fail("max_steps", "max_steps must be >= 0");
    if (!(opts.cfl_safety > 0.0)) cfg.fail("cfl_safety", "cfl_safety must be positive");
    if (!(opts.tol_residual > 0.0)) cfg.fail("tol_residual", "tol_residual must be positive");

    LpSolution sol;
    try {
      sol = solve(pr, &initial, opts);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::invalid_params) throw;
      cfg.fail(cfg.has("symmetrize") ? "symmetrize" : "initial", e.what());
    }
    prepare_out(ctx);
    const Trajectory& tr = sol.trajectory;
    std::ostringstream prov;
    prov << "lp-solve p=" << fmt17(p) << " phi=" << phi_spec << " initial=" << cfg.get_string("initial", "sphere(1)")
         << " seed=" << ctx.seed;
    write_trajectory_csv(tr, (ctx.out_dir / "trajectory.csv").string());
    write_body(sol.u, (ctx.out_dir / "solution.body").string(), prov.str());
    if (n == 2) export_obj(sol.u, (ctx.out_dir / "solution.obj").string());
    if (opts.snapshot_every > 0) write_snapshots(ctx, tr, "lp-solve");

    Json j;
    j["command"] = "lp-solve";
    j["status"] = to_string(tr.status);
    j["regime"] = to_string(tr.regime);
    j["grid"] = grid_json(ctx);
    j["p"] = p;
    j["seed"] = ctx.seed;
    j["steps"] = tr.final_state.step;
    j["c"] = sol.c;
    j["flow_residual"] = tr.final_state.residual;
    j["residual"] = sol.residual;
    j["unique_up_to_dilation"] = sol.unique_up_to_dilation;
    if (manufactured_from) {
      j["recovery_error"] = sol.unique_up_to_dilation ? sup_distance(renormalize(sol.u), renormalize(*manufactured_from))
                                                      : sup_distance(sol.u, *manufactured_from);
    }
    j["monitors"] = monitors_json(tr);
    if (!tr.failure.empty()) j["failure"] = tr.failure;
    write_text((ctx.out_dir / "summary.json").string(), j.dump(2) + "\n");

    out << "lp-solve: " << to_string(tr.status) << " after " << tr.final_state.step << " steps, c = " << fmt17(sol.c)
        << ", residual = " << fmt17(sol.residual);
    if (sol.unique_up_to_dilation) out << " (unique up to dilation)";
    out << "\n";
    if (!tr.failure.empty()) err << "minkflow: " << tr.failure << "\n";
    return status_exit(tr.status);
  });
}

int cmd_verify(const CliArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const Context ctx = open(args, "verify", kVerifyKeys, {"tol."});
    const RunConfig& cfg = ctx.cfg;
    VerifyOptions opts;
    opts.grid = ctx.grid;
    opts.seed = ctx.seed;
    opts.samples = static_cast<int>(cfg.get_long("samples", opts.samples));
    if (opts.samples < 1) cfg.fail("samples", "samples must be >= 1");
    if (cfg.has("checks")) {
      std::istringstream is(cfg.get_string("checks", ""));
      std::string name;
      while (std::getline(is, name, ',')) {
        const auto b = name.find_first_not_of(' ');
        const auto e = name.find_last_not_of(' ');
        if (b == std::string::npos) continue;
        name = name.substr(b, e - b + 1);
        if (std::find(all_checks().begin(), all_checks().end(), name) == all_checks().end()) {
          cfg.fail("checks", "unknown check '" + name + "'");
        }
        opts.checks.push_back(name);
      }
    }
    if (cfg.has("tolerance")) {
      opts.tolerance = cfg.get_double("tolerance", 0.0);
      if (*opts.tolerance < 0.0) cfg.fail("tolerance", "tolerance must be >= 0");
    }
    for (const std::string& key : cfg.keys_with_prefix("tol.")) {
      opts.item_tolerance[key.substr(4)] = cfg.get_double(key, 0.0);
    }

    const VerifyReport rep = run_verify(opts);
    prepare_out(ctx);
    std::ostringstream table;
    table << std::left << std::setw(22) << "check" << std::setw(12) << "kind" << std::setw(26) << "value"
          << std::setw(12) << "tolerance" << "result\n";
    Json j;
    j["command"] = "verify";
    j["grid"] = grid_json(ctx);
    j["seed"] = ctx.seed;
    j["samples"] = opts.samples;
    Json checks = Json::array();
    for (const CheckResult& c : rep.checks) {
      Json jc;
      jc["name"] = c.name;
      jc["pass"] = c.pass();
      Json items = Json::array();
      for (const CheckItem& it : c.items) {
        table << std::setw(22) << (c.name + "." + it.name) << std::setw(12) << (it.lower_bound ? ">= -tol" : "<= tol")
              << std::setw(26) << fmt17(it.value) << std::setw(12) << short_num(it.tolerance)
              << (it.pass ? "PASS" : "FAIL") << "\n";
        Json ji;
        ji["item"] = it.name;
        ji["value"] = it.value;
        ji["tolerance"] = it.tolerance;
        ji["lower_bound"] = it.lower_bound;
        ji["pass"] = it.pass;
        items.push_back(ji);
      }
      jc["items"] = items;
      checks.push_back(jc);
    }
    j["checks"] = checks;
    j["pass"] = rep.pass();
    write_text((ctx.out_dir / "verify_table.txt").string(), table.str());
    write_text((ctx.out_dir / "summary.json").string(), j.dump(2) + "\n");
    out << table.str() << (rep.pass() ? "verify: all checks passed\n" : "verify: FAILED\n");
    return rep.pass() ? exit_ok : exit_verify_failed;
  });
}

int run_command(const CliArgs& args, std::ostream& out, std::ostream& err) {
  if (args.command == "flow") return cmd_flow(args, out, err);
  if (args.command == "lp-solve") return cmd_lp_solve(args, out, err);
  if (args.command == "verify") return cmd_verify(args, out, err);
  err << "minkflow: unknown command '" << args.command << "'\n";
  return exit_config;
}

}  // namespace minkflow
