#include <doctest.h>

#include <cmath>
#include <cstring>

#include "test_util.hpp"
#include "warpiso/warp_model.hpp"

using namespace warpiso;

namespace {

WarpSpec paper_spec(double m = 1.0, int n = 2, double lo = 0.1, double hi = 10.0) {
  return make_preset("paper", {{"m", m}}, n, lo, hi);
}

double phi_paper_closed(double m, double r) {
  return -m / (2 * r * (r + 1) * (r + 1)) - m / (r * r * (r + 1));
}

}  // namespace

TEST_SUITE("warp_model") {

TEST_CASE("f and f' from the squared form") {
  const WarpSpec paper = paper_spec();
  CHECK(paper.f_value(1.0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-15));

  const WarpSpec euclid = make_preset("euclidean", {}, 2, 0.1, 10.0);
  CHECK(euclid.f_value(3.0) == 1.0);
  CHECK(euclid.f_prime(3.0) == 0.0);

  // f^2 = 1 + kappa r^2  =>  f' = kappa r / f
  const WarpSpec sf = make_preset("spaceform", {{"kappa", 1.0}}, 2, 0.1, 10.0);
  CHECK(sf.f_prime(2.0) == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("f-form and f^2-form agree") {
  const WarpSpec squared("1 + kappa*r^2", true, {{"kappa", 1.0}}, 2, 0.1, 10.0);
  const WarpSpec plain("sqrt(1 + kappa*r^2)", false, {{"kappa", 1.0}}, 2, 0.1, 10.0);
  for (double r : {0.2, 1.0, 4.0, 9.5}) {
    CHECK(squared.f_value(r) == doctest::Approx(plain.f_value(r)).epsilon(1e-14));
    CHECK(squared.f_prime(r) == doctest::Approx(plain.f_prime(r)).epsilon(1e-12));
    CHECK(phi_stability(squared, r) ==
          doctest::Approx(phi_stability(plain, r)).epsilon(1e-11));
  }
}

TEST_CASE("phi matches the closed forms") {
  const WarpSpec euclid = make_preset("euclidean", {}, 2, 0.1, 10.0);
  const WarpSpec paper = paper_spec();
  const WarpSpec ads = make_preset("ads", {{"m", 1.0}, {"kappa", 1.0}}, 2, 1.1, 10.0);
  const WarpSpec sf = make_preset("spaceform", {{"kappa", 1.0}}, 2, 0.1, 10.0);

  CHECK(phi_stability(paper, 1.0) == doctest::Approx(-0.625).epsilon(1e-15));

  for (int i = 0; i < 100; ++i) {
    const double r = 0.1 + (10.0 - 0.1) * i / 99.0;
    CHECK(std::abs(phi_stability(euclid, r)) <= 1e-15);
    CHECK(std::abs(phi_stability(sf, r)) <= 1e-12);
    const double closed = phi_paper_closed(1.0, r);
    CHECK(std::abs(phi_stability(paper, r) - closed) <= 1e-12 * std::max(1.0, std::abs(closed)));
    const double ra = 1.1 + (10.0 - 1.1) * i / 99.0;
    const double ads_closed = 3.0 / (2 * ra * ra * ra);
    CHECK(std::abs(phi_stability(ads, ra) - ads_closed) <=
          1e-12 * std::max(1.0, ads_closed));
  }
}

TEST_CASE("alternate-form value and the r^2 Phi identity") {
  const WarpSpec euclid = make_preset("euclidean", {}, 2, 0.1, 10.0);
  CHECK(alternate_form_value(euclid, 2.0).value == doctest::Approx(1.0).epsilon(1e-15));

  const WarpSpec paper = paper_spec();
  const AlternateFormCondition alt = alternate_form_value(paper, 1.0);
  // f^2 - r f f' = 1.5 + 1/8
  CHECK(alt.value == doctest::Approx(1.625).epsilon(1e-15));
  CHECK(1.0 - alt.value == doctest::Approx(phi_stability(paper, 1.0)).epsilon(1e-14));

  // f^2 = 1 + kappa r^2 sits exactly on the equality case
  const WarpSpec sf = make_preset("spaceform", {{"kappa", 1.0}}, 2, 0.1, 10.0);
  for (double r : {0.3, 1.0, 5.0}) {
    CHECK(alternate_form_value(sf, r).value == doctest::Approx(1.0).epsilon(1e-13));
  }

  const WarpSpec ads = make_preset("ads", {{"m", 1.0}, {"kappa", 1.0}}, 2, 1.1, 10.0);
  const WarpSpec* specs[] = {&euclid, &paper, &sf, &ads};
  for (const WarpSpec* spec : specs) {
    for (int i = 0; i < 200; ++i) {
      const double r = spec->r_min() + (spec->r_max() - spec->r_min()) * i / 199.0;
      const double lhs = r * r * phi_stability(*spec, r);
      const double rhs = 1.0 - alternate_form_value(*spec, r).value;
      CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("condition scan verdicts") {
  const WarpSpec euclid = make_preset("euclidean", {}, 2, 0.1, 10.0);
  CHECK(glw_condition(euclid, 0.1, 10.0).holds());

  const WarpSpec paper = paper_spec();
  const PhiProfile scan = glw_condition(paper, 0.1, 10.0);
  REQUIRE(scan.violations.size() == 1);
  CHECK(scan.violations[0].lo == doctest::Approx(0.1));
  CHECK(scan.violations[0].hi == doctest::Approx(10.0));
  CHECK_FALSE(scan.holds());

  const WarpSpec ads = make_preset("ads", {{"m", 1.0}, {"kappa", 1.0}}, 2, 1.1, 10.0);
  CHECK(glw_condition(ads, 1.1, 10.0).holds());
}

TEST_CASE("violation intervals bracket the sign changes") {
  // f^2 = 1 + a sin r has Phi = a cos(r)/(2r) - a sin(r)/r^2 with sign changes
  const WarpSpec wavy("1 + a*sin(r)", true, {{"a", 0.3}}, 2, 0.5, 9.0);
  const PhiProfile scan = glw_condition(wavy, 0.5, 9.0);
  REQUIRE_FALSE(scan.violations.empty());
  for (const auto& iv : scan.violations) {
    CHECK(iv.lo < iv.hi);
    // each reported interval contains at least one grid point with Phi < 0
    bool has_negative_grid_point = false;
    for (std::size_t i = 0; i < scan.grid.size(); ++i) {
      if (scan.grid[i] >= iv.lo && scan.grid[i] <= iv.hi && scan.phi[i] < 0.0) {
        has_negative_grid_point = true;
      }
    }
    CHECK(has_negative_grid_point);
    // refined endpoints sit on sign changes (away from the scan boundary)
    const double width = 1e-9 * (9.0 - 0.5);
    if (iv.lo > 0.5 + 1e-12) {
      CHECK(phi_stability(wavy, iv.lo - width) * phi_stability(wavy, iv.lo + width) <= 0.0);
    }
    if (iv.hi < 9.0 - 1e-12) {
      CHECK(phi_stability(wavy, iv.hi - width) * phi_stability(wavy, iv.hi + width) <= 0.0);
    }
  }
}

TEST_CASE("enlarging tol never converts HOLDS into VIOLATED") {
  const WarpSpec wavy("1 + a*sin(r)", true, {{"a", 0.3}}, 2, 0.5, 9.0);
  bool prev_holds = false;
  for (double tol : {0.0, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    ConditionScanOptions opts;
    opts.tol = tol;
    const bool holds = glw_condition(wavy, 0.5, 9.0, opts).holds();
    if (prev_holds) CHECK(holds);
    prev_holds = holds;
  }
}

TEST_CASE("spec construction rejects bad input") {
  CHECK_THROWS_AS(make_preset("spaceform", {{"kappa", -1.0}}, 2, 0.1, 2.0), SpecError);
  CHECK_THROWS_AS(WarpSpec("1", true, {}, 0, 0.1, 1.0), SpecError);
  CHECK_THROWS_AS(WarpSpec("1", true, {}, 2, 0.0, 1.0), SpecError);
  CHECK_THROWS_AS(WarpSpec("1", true, {}, 2, 2.0, 1.0), SpecError);
  CHECK_THROWS_AS(WarpSpec("1 + m*r", true, {}, 2, 0.1, 1.0), SpecError);  // unbound
  CHECK_THROWS_AS(make_preset("nope", {}, 2, 0.1, 1.0), SpecError);
  // hyperbolic-type space form is fine on a bounded interval
  CHECK_NOTHROW(make_preset("spaceform", {{"kappa", -0.5}}, 2, 0.1, 1.3));
}

TEST_CASE("radius outside the validity interval is an error") {
  const WarpSpec paper = paper_spec();
  CHECK_THROWS_AS(paper.f_value(10.5), EvalError);
  CHECK_THROWS_AS(phi_stability(paper, 0.05), EvalError);
  CHECK_NOTHROW(paper.f_raw(0.01));  // the integral path reaches below r_min
}

TEST_CASE("ads preset raises r_min past the horizon root") {
  const WarpSpec ads = make_preset("ads", {{"m", 1.0}, {"kappa", 1.0}}, 2, 0.1, 10.0);
  // largest root of kappa r^3 + r - m: r ~ 0.6823 for m = kappa = 1
  CHECK(ads.r_min() > 0.682);
  CHECK(ads.r_min() < 0.683);
  CHECK(ads.f2_value(ads.r_min()) > 0.0);
  CHECK_THROWS_AS(make_preset("ads", {{"m", 1.0}, {"kappa", 1.0}}, 2, 0.1, 0.5),
                  SpecError);
}

TEST_CASE("phi evaluation is deterministic") {
  const WarpSpec paper = paper_spec();
  const double a = phi_stability(paper, 1.2345);
  const double b = phi_stability(paper, 1.2345);
  CHECK(std::memcmp(&a, &b, sizeof(double)) == 0);
}

}  // TEST_SUITE
