#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "minkflow/cli.hpp"
#include "minkflow/config.hpp"
#include "minkflow/error.hpp"
#include "minkflow/io.hpp"
#include "minkflow/shapes.hpp"

using namespace minkflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("minkflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

bool bit_equal(const ScalarField& a, const ScalarField& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::string config_error(const std::string& text) {
  try {
    RunConfig::parse(text, "run.cfg");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

int run_cli(const std::string& cmd, const fs::path& cfg, const fs::path& out, std::string* stdout_text = nullptr,
            std::string* stderr_text = nullptr) {
  std::ostringstream o, e;
  CliArgs args{cmd, cfg.string(), out.string(), std::nullopt};
  const int code = run_command(args, o, e);
  if (stdout_text) *stdout_text = o.str();
  if (stderr_text) *stderr_text = e.str();
  return code;
}

}  // namespace

TEST_CASE("body files round-trip bit-exactly") {
  auto g = SphereGrid::build(2, 16, 32);
  SupportField b = make_shape(Shape::ellipsoid({1, 0.9, 1.3}), g);
  std::mt19937_64 eng(3);
  for (double& v : b.u) v *= 1.0 + 1e-3 * std::generate_canonical<double, 53>(eng);
  b.u[0] = 0.1 + 0.2;  // not representable in short decimal
  b.u[1] = std::nextafter(1.0, 2.0);
  b.u[2] = 1e-300;
  const fs::path dir = scratch("body");
  write_body(b, (dir / "b.body").string(), "unit test");
  std::string prov;
  const SupportField r = read_body((dir / "b.body").string(), &prov);
  CHECK(bit_equal(r.u, b.u));
  CHECK(r.grid->same_layout(*g));
  CHECK(r.symmetric == b.symmetric);
  CHECK(prov == "unit test");
  CHECK(body_to_string(r, prov) == body_to_string(b, prov));

  auto g1 = SphereGrid::build(1, 64);
  const SupportField c = make_shape(Shape::ellipsoid({1.2, 0.8, 1}), g1);
  CHECK(bit_equal(body_from_string(body_to_string(c, "")).u, c.u));
}

TEST_CASE("malformed body files") {
  auto code = [](const std::string& text) {
    try {
      body_from_string(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::config;
  };
  CHECK(code("no header") == ErrorCode::io);
  CHECK(code("{\"n\":2}\n1\n") == ErrorCode::io);
  CHECK(code("{\"format\":\"minkflow-body\",\"n\":2,\"n_theta\":8,\"n_phi\":16,\"symmetric\":false}\n1\n2\n") ==
        ErrorCode::size_mismatch);
  CHECK(code("{\"format\":\"minkflow-body\",\"n\":2,\"n_theta\":8,\"n_phi\":16,\"symmetric\":false}\n1\nabc\n") ==
        ErrorCode::io);
  CHECK_THROWS_AS(read_body("/nonexistent/x.body"), Error);
}

TEST_CASE("mesh export") {
  auto g = SphereGrid::build(2, 32, 64);
  const fs::path dir = scratch("obj");
  for (auto ax : {Vec3{1, 1, 1}, Vec3{1, 1, 2}}) {
    const SupportField b = make_shape(Shape::ellipsoid(ax), g);
    export_obj(b, (dir / "m.obj").string());
    std::istringstream in(read_text((dir / "m.obj").string()));
    std::string line;
    std::size_t verts = 0, faces = 0;
    double worst = 0.0;
    while (std::getline(in, line)) {
      if (line.rfind("v ", 0) == 0) {
        ++verts;
        std::istringstream ls(line.substr(2));
        double x, y, z;
        ls >> x >> y >> z;
        worst = std::max(worst, std::abs(x * x / (ax[0] * ax[0]) + y * y / (ax[1] * ax[1]) + z * z / (ax[2] * ax[2]) - 1));
      } else if (line.rfind("f ", 0) == 0) {
        ++faces;
      }
    }
    CHECK(verts == g->size());
    CHECK(faces == 2 * 31 * 64 + 2 * 62);
    const double h = g->h_min();
    CHECK(worst < 3 * h * h);
  }
  auto g1 = SphereGrid::build(1, 32);
  CHECK_THROWS_AS(export_obj(make_shape(Shape::sphere(1), g1), (dir / "x.obj").string()), Error);
}

TEST_CASE("config grammar and line-anchored errors") {
  const RunConfig c = RunConfig::parse("# comment\nalpha = 1.5   # trailing\n\nbeta=2\nname = a b c\n", "run.cfg");
  CHECK(c.get_double("alpha", 0) == 1.5);
  CHECK(c.get_double("beta", 0) == 2.0);
  CHECK(c.get_string("name", "") == "a b c");
  CHECK(c.line_of("beta") == 4);
  CHECK(c.get_long("missing", 7) == 7);

  CHECK(config_error("alpha = 1\nbogus line\n").find("run.cfg:2:") != std::string::npos);
  CHECK(config_error("a = 1\nb = 2\na = 3\n").find("run.cfg:3:") != std::string::npos);
  CHECK(config_error("a =\n").find("run.cfg:1:") != std::string::npos);

  const RunConfig d = RunConfig::parse("x = abc\nflag = maybe\n", "run.cfg");
  try {
    d.get_double("x", 0);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("run.cfg:1:") != std::string::npos);
  }
  CHECK_THROWS_AS(d.get_bool("flag", false), Error);
  CHECK_THROWS_AS(d.reject_unknown({"x"}), Error);
  CHECK_NOTHROW(d.reject_unknown({"x", "flag"}));
  CHECK_THROWS_AS(RunConfig::load("/nonexistent/run.cfg"), Error);
}

TEST_CASE("flow command") {
  const fs::path dir = scratch("cli_flow");
  write_text((dir / "c.cfg").string(),
             "mode = flow\nn_theta = 16\nalpha = 0\nbeta = 1\ninitial = ellipsoid(1, 1, 1.5)\n");
  std::string out;
  CHECK(run_cli("flow", dir / "c.cfg", dir / "a", &out) == exit_ok);
  CHECK(out.find("converged") != std::string::npos);
  const std::string csv = read_text((dir / "a" / "trajectory.csv").string());
  CHECK(csv.rfind("t,dt,eta,J,Z0,residual,lambda_min,u_min,u_max\n", 0) == 0);
  CHECK(fs::exists(dir / "a" / "final.obj"));
  const std::string summary = read_text((dir / "a" / "summary.json").string());
  CHECK(summary.find("\"regime\": \"C\"") != std::string::npos);
  CHECK(summary.find("\"monotonicity_violations\": 0") != std::string::npos);

  // identical reruns give identical summaries
  CHECK(run_cli("flow", dir / "c.cfg", dir / "b") == exit_ok);
  CHECK(read_text((dir / "b" / "summary.json").string()) == summary);
  CHECK(read_text((dir / "b" / "final.body").string()) == read_text((dir / "a" / "final.body").string()));

  // a restart from the written body reproduces its samples
  write_text((dir / "r.cfg").string(),
             "n_theta = 16\nalpha = 0\nbeta = 1\nmax_steps = 0\npolar_filter = 0\ninitial = file:a/final.body\n");
  CHECK(run_cli("flow", dir / "r.cfg", dir / "r") == exit_max_steps);

  write_text((dir / "m.cfg").string(), "n_theta = 16\nalpha = 0\nbeta = 1\nmax_steps = 5\n"
                                       "initial = ellipsoid(1, 1, 1.5)\n");
  CHECK(run_cli("flow", dir / "m.cfg", dir / "m") == exit_max_steps);

  write_text((dir / "f.cfg").string(), "n_theta = 16\nalpha = 0\nbeta = 1\ndt_init = 0.5\ndt_max = 0.5\n"
                                       "dt_min = 0.4\ninitial = ellipsoid(1, 1, 1.5)\n");
  CHECK(run_cli("flow", dir / "f.cfg", dir / "f") == exit_step_failure);
  CHECK(fs::exists(dir / "f" / "summary.json"));
}

TEST_CASE("flow command config errors") {
  const fs::path dir = scratch("cli_errors");
  std::string err;
  write_text((dir / "x.cfg").string(), "n_theta = 16\nbeta = 1\nalpha = 0.5\n");
  write_text((dir / "x.cfg").string(), "n_theta = 16\nbeta = 0.5\nalpha = 0.5\n");
  CHECK(run_cli("flow", dir / "x.cfg", dir / "o", nullptr, &err) == exit_config);
  CHECK(err.find("x.cfg:3:") != std::string::npos);
  CHECK(err.find("alpha = 1 - beta") != std::string::npos);

  write_text((dir / "y.cfg").string(), "n_theta = 16\nalpha = 1\nbeta = 1\nf = 1 + 0.3*x1\n");
  CHECK(run_cli("flow", dir / "y.cfg", dir / "o", nullptr, &err) == exit_config);
  CHECK(err.find("y.cfg:4:") != std::string::npos);

  write_text((dir / "z.cfg").string(), "alpha = 1\nbeta = 1\ninitial = perturbed(sphere(1), 0.9, x3^2 - 1/3)\n");
  CHECK(run_cli("flow", dir / "z.cfg", dir / "o", nullptr, &err) == exit_config);
  CHECK(err.find("z.cfg:3:") != std::string::npos);

  write_text((dir / "w.cfg").string(), "mode = verify\nalpha = 1\nbeta = 1\n");
  CHECK(run_cli("flow", dir / "w.cfg", dir / "o") == exit_config);
  CHECK(run_cli("flow", dir / "missing.cfg", dir / "o") == exit_config);
}

TEST_CASE("lp-solve command") {
  const fs::path dir = scratch("cli_lp");
  write_text((dir / "a.cfg").string(), "n_theta = 16\np = 2\n");
  CHECK(run_cli("lp-solve", dir / "a.cfg", dir / "a") == exit_ok);
  const SupportField u = read_body((dir / "a" / "solution.body").string());
  for (double v : u.u) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));

  write_text((dir / "b.cfg").string(), "n_theta = 16\np = 4\nphi = manufactured(ellipsoid(1, 1, 1.3))\n");
  CHECK(run_cli("lp-solve", dir / "b.cfg", dir / "b") == exit_ok);
  CHECK(read_text((dir / "b" / "summary.json").string()).find("recovery_error") != std::string::npos);

  std::string err;
  write_text((dir / "c.cfg").string(), "n_theta = 16\np = -3\n");
  CHECK(run_cli("lp-solve", dir / "c.cfg", dir / "c", nullptr, &err) == exit_config);
  CHECK(err.find("c.cfg:2:") != std::string::npos);
}

TEST_CASE("verify command") {
  const fs::path dir = scratch("cli_verify");
  write_text((dir / "a.cfg").string(), "seed = 7\nsamples = 4\n");
  std::string out;
  CHECK(run_cli("verify", dir / "a.cfg", dir / "a", &out) == exit_ok);
  CHECK(out.find("polar.residual") != std::string::npos);
  write_text((dir / "b.cfg").string(), "samples = 2\ntolerance = 0\n");
  CHECK(run_cli("verify", dir / "b.cfg", dir / "b") == exit_verify_failed);
  write_text((dir / "c.cfg").string(), "samples = 2\nchecks = polar\n");
  CHECK(run_cli("verify", dir / "c.cfg", dir / "c", &out) == exit_ok);
  CHECK(out.find("af.margin") == std::string::npos);
  CHECK(out.find("polar.residual") != std::string::npos);
  write_text((dir / "d.cfg").string(), "checks = polar, bogus\n");
  CHECK(run_cli("verify", dir / "d.cfg", dir / "d") == exit_config);
}
