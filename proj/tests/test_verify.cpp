#include "doctest.h"
#include "minkflow/error.hpp"
#include "minkflow/verify.hpp"

using namespace minkflow;

namespace {

VerifyOptions base(int samples) {
  VerifyOptions o;
  o.grid = SphereGrid::build(2, 32, 64);
  o.samples = samples;
  return o;
}

}  // namespace

TEST_CASE("default suite passes on a seeded sample") {
  VerifyOptions o = base(20);
  const VerifyReport rep = run_verify(o);
  CHECK(rep.checks.size() == all_checks().size());
  for (const auto& c : rep.checks) {
    for (const auto& it : c.items) {
      INFO(c.name << "." << it.name << " = " << it.value);
      CHECK(it.pass);
    }
  }
  CHECK(rep.pass());
}

TEST_CASE("zero tolerance fails on discretization error") {
  VerifyOptions o = base(3);
  o.tolerance = 0.0;
  CHECK_FALSE(run_verify(o).pass());
}

TEST_CASE("selection and determinism") {
  VerifyOptions o = base(4);
  o.checks = {"polar"};
  const VerifyReport a = run_verify(o);
  REQUIRE(a.checks.size() == 1);
  CHECK(a.checks[0].name == "polar");
  // a check's stream does not depend on which other checks run
  o.checks = {"af", "polar"};
  const VerifyReport b = run_verify(o);
  CHECK(b.checks[1].items[0].value == a.checks[0].items[0].value);
  o.checks = {"nope"};
  CHECK_THROWS_AS(run_verify(o), Error);
}

TEST_CASE("per-item tolerance override") {
  VerifyOptions o = base(2);
  o.checks = {"bs"};
  o.item_tolerance["bs.ellipsoid"] = 0.0;
  const VerifyReport rep = run_verify(o);
  CHECK(rep.checks[0].items[0].pass);
  CHECK_FALSE(rep.checks[0].items[1].pass);
}

TEST_CASE("planar suite") {
  VerifyOptions o;
  o.grid = SphereGrid::build(1, 128);
  o.samples = 5;
  CHECK(run_verify(o).pass());
}
