#include "rmap/expr.hpp"

#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "rmap/error.hpp"
#include "rmap/rng.hpp"

using rmap::Error;
using rmap::ErrorKind;
using rmap::Rng;
using rmap::expr::ScalarField;

namespace {
const std::vector<std::string> kUVW = {"u", "v", "w"};

Eigen::VectorXd pt3(double a, double b, double c) {
  Eigen::VectorXd p(3);
  p << a, b, c;
  return p;
}
}  // namespace

TEST_CASE("basic arithmetic and precedence") {
  auto f = ScalarField::parse("1+v*w", kUVW);
  CHECK(f.eval(pt3(0, 2, 3)) == doctest::Approx(7.0));

  // ^ binds tighter than unary minus: -v^2 = -(v^2)
  auto g = ScalarField::parse("-v^2", kUVW);
  CHECK(g.eval(pt3(0, 3, 0)) == doctest::Approx(-9.0));

  // right-associative exponent chains fold to integer constants
  auto h = ScalarField::parse("v^2^3", kUVW);
  CHECK(h.eval(pt3(0, 2, 0)) == doctest::Approx(256.0));

  auto d = ScalarField::parse("w-v-1", kUVW);
  CHECK(d.eval(pt3(0, 2, 7)) == doctest::Approx(4.0));

  auto q = ScalarField::parse("8/v/w", kUVW);
  CHECK(q.eval(pt3(0, 2, 2)) == doctest::Approx(2.0));
}

TEST_CASE("functions and constants") {
  auto f = ScalarField::parse("sin(pi/2)+cos(0)", kUVW);
  CHECK(f.eval(pt3(0, 0, 0)) == doctest::Approx(2.0).epsilon(1e-14));

  auto g = ScalarField::parse("log(e)", kUVW);
  CHECK(g.eval(pt3(0, 0, 0)) == doctest::Approx(1.0).epsilon(1e-14));

  auto h = ScalarField::parse("sqrt(v^2+w^2)", kUVW);
  CHECK(h.eval(pt3(0, 3, 4)) == doctest::Approx(5.0));
}

TEST_CASE("negative and folded exponents") {
  auto f = ScalarField::parse("v^-2", kUVW);
  CHECK(f.eval(pt3(0, 2, 0)) == doctest::Approx(0.25));

  auto g = ScalarField::parse("v^(3-1)", kUVW);
  CHECK(g.eval(pt3(0, 5, 0)) == doctest::Approx(25.0));
}

TEST_CASE("constant positive base with variable exponent lowers to exp") {
  auto f = ScalarField::parse("e^w", kUVW);
  CHECK(f.eval(pt3(0, 0, 1.5)) == doctest::Approx(std::exp(1.5)).epsilon(1e-15));

  auto g = ScalarField::parse("2^w", kUVW);
  CHECK(g.eval(pt3(0, 0, 10)) == doctest::Approx(1024.0).epsilon(1e-12));

  // the h of the warped-product fixture
  auto h = ScalarField::parse("1/(v*e^w)", kUVW);
  CHECK(h.eval(pt3(0, 1, 0)) == doctest::Approx(1.0));
  auto jet = h.jet1(pt3(0, 1, 0));
  CHECK(jet.grad[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(jet.grad[2] == doctest::Approx(-1.0).epsilon(1e-14));

  // variable base with non-integer exponent stays rejected
  CHECK_THROWS_AS(ScalarField::parse("v^w", kUVW), Error);
  CHECK_THROWS_AS(ScalarField::parse("v^0.5", kUVW), Error);
}

TEST_CASE("jet2 of exp(2*w)") {
  auto f = ScalarField::parse("exp(2*w)", kUVW);
  auto jet = f.jet2(pt3(0, 0, 0));
  CHECK(jet.value == doctest::Approx(1.0));
  CHECK(jet.grad[2] == doctest::Approx(2.0));
  CHECK(jet.hess(2, 2) == doctest::Approx(4.0));
  CHECK(jet.grad[0] == 0.0);
  CHECK(jet.hess(0, 2) == 0.0);
}

TEST_CASE("jets match central differences on a messy expression") {
  auto f = ScalarField::parse("sin(u*v)+exp(w/2)*cos(v)+v^3/(1+w^2)", kUVW);
  auto value_of = [&](const Eigen::VectorXd& p) { return f.eval(p); };

  Rng rng(911);
  for (int trial = 0; trial < 25; ++trial) {
    Eigen::VectorXd p = pt3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
    auto jet = f.jet2(p);
    Eigen::VectorXd fd_g = oracles::fd_grad(value_of, p);
    Eigen::MatrixXd fd_h = oracles::fd_hess(value_of, p);
    double scale = 1.0 + std::abs(jet.value);
    CHECK((jet.grad - fd_g).cwiseAbs().maxCoeff() < 1e-6 * scale);
    CHECK((jet.hess - fd_h).cwiseAbs().maxCoeff() < 1e-5 * scale);
    CHECK((jet.hess - jet.hess.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("print/parse round trip preserves values and derivatives") {
  const std::vector<std::string> exprs = {
      "(1+v^2)/4", "-v/4",       "1/(v*e^w)",          "exp(2*w)+v^2",
      "v*exp(w)",  "-(u+v)*w^2", "sqrt(u^2+v^2+1)",    "sin(u)*cos(v)-tan(w/4)",
      "2^w",       "u/v/w",      "u-(v-w)",            "pi*u+e",
      "-u^2",      "(-u)^2",     "log(2+cos(u))/(3+v)", "u^-3*v",
  };
  Rng rng(4242);
  for (const auto& text : exprs) {
    CAPTURE(text);
    auto f = ScalarField::parse(text, kUVW);
    auto f2 = ScalarField::parse(f.to_string(), kUVW);
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd p = pt3(rng.uniform(0.5, 2), rng.uniform(0.5, 2), rng.uniform(0.5, 2));
      double a = f.eval(p);
      double b = f2.eval(p);
      CHECK(a == doctest::Approx(b).epsilon(1e-15));
      auto ja = f.jet1(p);
      auto jb = f2.jet1(p);
      CHECK((ja.grad - jb.grad).cwiseAbs().maxCoeff() < 1e-14 * (1.0 + ja.grad.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("parse errors carry byte offsets") {
  try {
    ScalarField::parse("v*+w", kUVW);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(e.offset() == 2);
  }

  try {
    ScalarField::parse("v*(w+1", kUVW);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Parse);
    CHECK(e.offset() == 6);
  }

  try {
    ScalarField::parse("v*q", kUVW);
    FAIL("expected unknown identifier");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownIdentifier);
    CHECK(e.offset() == 2);
    CHECK(std::string(e.what()).find("'q'") != std::string::npos);
  }

  try {
    ScalarField::parse("sinh(v)", kUVW);
    FAIL("expected unknown function");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownIdentifier);
    CHECK(std::string(e.what()).find("sinh") != std::string::npos);
  }
}

TEST_CASE("domain errors name the offending subexpression") {
  auto f = ScalarField::parse("1+log(v-2)", kUVW);
  try {
    f.eval(pt3(0, 1, 0));
    FAIL("expected domain error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
    CHECK(std::string(e.what()).find("log(v-2)") != std::string::npos);
  }

  auto g = ScalarField::parse("u/(v*w)", kUVW);
  try {
    g.eval(pt3(1, 0, 5));
    FAIL("expected division by zero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Domain);
    CHECK(std::string(e.what()).find("division by zero") != std::string::npos);
  }

  auto h = ScalarField::parse("sqrt(v)", kUVW);
  CHECK_THROWS_AS(h.eval(pt3(0, -1, 0)), Error);

  auto z = ScalarField::parse("v^-1", kUVW);
  CHECK_THROWS_AS(z.eval(pt3(0, 0, 0)), Error);
}

TEST_CASE("non-finite results are reported, never returned") {
  auto f = ScalarField::parse("exp(v^2)", kUVW);
  CHECK_THROWS_AS(f.eval(pt3(0, 1e6, 0)), Error);
  // sqrt is fine at 0 for values but its derivative blows up
  auto g = ScalarField::parse("sqrt(v)", kUVW);
  CHECK(g.eval(pt3(0, 0, 0)) == 0.0);
  CHECK_THROWS_AS(g.jet1(pt3(0, 0, 0)), Error);
}

TEST_CASE("dimension mismatch is rejected") {
  auto f = ScalarField::parse("u+v+w", kUVW);
  Eigen::VectorXd p(2);
  p << 1, 2;
  CHECK_THROWS_AS(f.eval(p), Error);
}
