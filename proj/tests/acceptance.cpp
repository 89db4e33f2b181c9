// Acceptance gate: reproduces the worked fixtures and the property suites,
// printing one verdict line per criterion.  Exit status 0 only when all nine
// criteria hold.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "rmap/clairaut.hpp"
#include "rmap/contact.hpp"
#include "rmap/error.hpp"
#include "rmap/expr.hpp"
#include "rmap/geodesic.hpp"
#include "rmap/manifest.hpp"
#include "rmap/rng.hpp"
#include "rmap/smooth_map.hpp"

using rmap::ChartManifold;
using rmap::CheckResult;
using rmap::CheckStatus;
using rmap::GeodesicTrace;
using rmap::Manifest;
using rmap::Report;
using rmap::Rng;
using rmap::SmoothMapSpec;

namespace {

int failures = 0;

void verdict(int number, bool pass, const std::string& detail) {
  std::printf("[%s] %d. %s\n", pass ? "PASS" : "FAIL", number, detail.c_str());
  if (!pass) ++failures;
}

std::string fixture(const char* name) {
  return std::string(RMAP_FIXTURE_DIR) + "/" + name;
}

const CheckResult& find_check(const Report& r, const std::string& name) {
  for (const auto& c : r.checks)
    if (c.name == name) return c;
  throw std::runtime_error("report has no check named " + name);
}

double res(const Report& r, const std::string& check, const std::string& label) {
  for (const auto& [key, value] : find_check(r, check).residuals)
    if (key == label) return value;
  throw std::runtime_error("check " + check + " has no residual " + label);
}

bool passed(const Report& r, const std::string& check) {
  return find_check(r, check).status == CheckStatus::Pass;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof(buf), pattern, args);
  va_end(args);
  return buf;
}

// Velocity of unit g-norm at p, direction drawn from the rng.
Eigen::VectorXd unit_velocity(const ChartManifold& chart, const Eigen::VectorXd& p, Rng& rng) {
  Eigen::VectorXd v(chart.dim());
  for (int i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v / std::sqrt(v.dot(chart.metric(p) * v));
}

// ----------------------------------------------------------------------------
// 1. Shear-target worked example: axioms, type estimate, trans-Sasakian.
void criterion1() {
  Manifest m = rmap::load_manifest(fixture("example_2_1.json"));
  auto t0 = std::chrono::steady_clock::now();
  Report r = rmap::run_checks(m, 7);
  double dt = seconds_since(t0);

  double axioms = std::max({res(r, "axioms", "psi_squared"), res(r, "axioms", "psi_xi"),
                            res(r, "axioms", "eta_psi"), res(r, "axioms", "eta_xi"),
                            res(r, "axioms", "compatibility"), res(r, "axioms", "eta_metric")});
  double type_err = std::max(res(r, "type", "alpha_error"), res(r, "type", "beta_error"));
  double ts = std::max({res(r, "trans_sasakian", "psi_equation"),
                        res(r, "trans_sasakian", "eta_scalar"),
                        res(r, "trans_sasakian", "xi_equation")});
  bool pass = passed(r, "axioms") && axioms < 1e-10 && passed(r, "type") && type_err < 1e-6 &&
              passed(r, "trans_sasakian") && ts < 1e-8 && dt < 1.0;
  verdict(1, pass,
          fmt("shear-target structure: axioms %.1e, (alpha,beta)=(1,0) error %.1e, "
              "trans-sasakian %.1e, %.3f s",
              axioms, type_err, ts, dt));
}

// ----------------------------------------------------------------------------
// 2. Rank-one map onto the shear target: splitting, sff, Clairaut, harmonicity.
void criterion2() {
  Manifest m = rmap::load_manifest(fixture("example_3_1.json"));
  auto t0 = std::chrono::steady_clock::now();
  Report r = rmap::run_checks(m, 7);
  double dt = seconds_since(t0);

  bool rank_ok = res(r, "riemannian_map", "rank") == 1.0;
  double angle = res(r, "riemannian_map", "kernel_angle");
  double iso = res(r, "riemannian_map", "isometry");
  double sff = res(r, "sff_vanishes", "sff_norm");
  double reeb_vertical = res(r, "anti_invariance", "reeb_vertical");
  double drift = res(r, "clairaut_conservation", "max_drift");
  double tension = res(r, "harmonicity", "tension");
  double rho_v = res(r, "harmonicity", "pushed_vertical");
  bool pass = rank_ok && angle < 1e-8 && iso < 1e-10 && passed(r, "riemannian_map") &&
              sff < 1e-9 && passed(r, "anti_invariance") && reeb_vertical < 1e-8 &&
              passed(r, "clairaut_conservation") && drift < 1e-6 && passed(r, "harmonicity") &&
              tension < 1e-8 && rho_v < 1e-8 && dt < 10.0;
  verdict(2, pass,
          fmt("rank-one shear map: kernel angle %.1e, isometry %.1e, sff %.1e, Reeb vertical "
              "part %.1e, Clairaut drift %.1e over 5 geodesics, tension %.1e, %.2f s",
              angle, iso, sff, reeb_vertical, drift, tension, dt));
}

// ----------------------------------------------------------------------------
// 3. Warped-product target: anti-invariance, type, sff oracle, frame variants.
void criterion3() {
  Manifest m = rmap::load_manifest(fixture("example_3_2.json"));
  auto t0 = std::chrono::steady_clock::now();
  Report r = rmap::run_checks(m, 7);
  double dt = seconds_since(t0);

  double type_err = std::max(res(r, "type", "alpha_error"), res(r, "type", "beta_error"));

  // Cross-check the second fundamental form against the value-only
  // finite-difference oracle at seeded interior points.
  const SmoothMapSpec* map = m.find_map("pi");
  Rng rng(303);
  double sff_diff = 0.0;
  for (int k = 0; k < 6; ++k) {
    Eigen::VectorXd p(3);
    p << rng.uniform(0.7, 1.9), rng.uniform(-1.1, 0.05), rng.uniform(-0.9, 0.9);
    auto data = rmap::map_point_data(*map, p);
    auto dec = rmap::decompose(*map, p);
    Eigen::VectorXd w = dec.hker.col(0);
    Eigen::VectorXd ad = rmap::second_fundamental_form(data, w, w);
    Eigen::VectorXd fd = oracles::fd_sff(*map, p, w, w);
    sff_diff = std::max(sff_diff, (ad - fd).norm() / (1.0 + ad.norm()));
  }

  // Both printed perp-frame variants span the computed complement; the
  // gradient condition with the printed h is frame-independent and holds for
  // neither, while the fitted h = w satisfies it.
  bool variants = passed(r, "frame_span") && passed(r, "frame_span_printed");
  bool printed_flagged = passed(r, "gradient_printed_h");  // flagged unsatisfied
  bool fitted_ok = passed(r, "gradient_fitted_h");
  double printed_residual = res(r, "gradient_printed_h", "gradient_residual");

  bool pass = passed(r, "anti_invariance") && passed(r, "type") && type_err < 1e-6 &&
              sff_diff < 1e-6 && variants && printed_flagged && fitted_ok && dt < 10.0;
  verdict(3, pass,
          fmt("warped-product map: anti-invariant, (alpha,beta) error %.1e, sff vs "
              "finite-difference oracle %.1e, both perp variants span-checked, printed h "
              "satisfies neither (residual %.2g), fitted h=w does, %.2f s",
              type_err, sff_diff, printed_residual, dt));
}

// ----------------------------------------------------------------------------
// 4. Normality of the second fundamental form over random Riemannian maps.
void criterion4() {
  Rng rng(404);
  auto fmtnum = [](double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "(%.17g)", x);
    return std::string(buf);
  };
  auto identity_metric = [](int n) {
    std::vector<std::string> g(static_cast<std::size_t>(n * n), "0");
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i * n + i)] = "1";
    return g;
  };

  double worst = 0.0, largest_sff = 0.0, worst_iso = 0.0;
  int wrong_rank = 0;
  for (int trial = 0; trial < 100; ++trial) {
    int n = 3 + trial % 3;
    int r = 1 + (trial / 3) % 2;
    int b = r + 1;

    // Random orthogonal source rotation feeding a cylinder-type isometric
    // immersion: x -> (sin L1, cos L1, L2, ..., Lr) with Li the first r
    // rotated coordinates.  A Riemannian map with curved image by build.
    Eigen::MatrixXd gauss(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) gauss(i, j) = rng.normal();
    Eigen::MatrixXd rot = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();

    std::vector<std::string> coords, lines;
    for (int i = 0; i < n; ++i) coords.push_back("x" + std::to_string(i + 1));
    for (int i = 0; i < r; ++i) {
      std::string s;
      for (int j = 0; j < n; ++j) {
        if (j) s += "+";
        s += fmtnum(rot(i, j)) + "*" + coords[static_cast<std::size_t>(j)];
      }
      lines.push_back(s);
    }
    std::vector<std::string> comps = {"sin(" + lines[0] + ")", "cos(" + lines[0] + ")"};
    for (int i = 1; i < r; ++i) comps.push_back(lines[static_cast<std::size_t>(i)]);

    std::vector<std::string> bcoords;
    for (int i = 0; i < b; ++i) bcoords.push_back("y" + std::to_string(i + 1));
    ChartManifold source("M", coords, rmap::DomainSpec::unbounded(n), identity_metric(n));
    ChartManifold target("B", bcoords, rmap::DomainSpec::unbounded(b), identity_metric(b));
    auto map = SmoothMapSpec::parse(source, target, comps);

    for (int sample = 0; sample < 3; ++sample) {
      Eigen::VectorXd p(n);
      for (int i = 0; i < n; ++i) p[i] = rng.uniform(-1.5, 1.5);
      auto dec = rmap::decompose(map, p);
      if (dec.rank != r) ++wrong_rank;
      worst_iso = std::max(worst_iso, rmap::isometry_residual(map, p));
      auto data = rmap::map_point_data(map, p);
      for (int i = 0; i < dec.rank; ++i)
        for (int j = i; j < dec.rank; ++j) {
          Eigen::VectorXd sff =
              rmap::second_fundamental_form(data, dec.hker.col(i), dec.hker.col(j));
          largest_sff = std::max(largest_sff, sff.norm());
          for (int k = 0; k < dec.rank; ++k)
            worst = std::max(worst, std::abs(sff.dot(dec.range.col(k))));
        }
    }
  }
  bool pass = worst < 1e-8 && wrong_rank == 0 && worst_iso < 1e-10 && largest_sff > 0.1;
  verdict(4, pass,
          fmt("100 random Riemannian maps: max range component of sff %.1e (largest sff "
              "norm %.2f, isometry %.1e)",
              worst, largest_sff, worst_iso));
}

// ----------------------------------------------------------------------------
// 5. Jets of random expressions against central finite differences.
std::string random_expression(Rng& rng, int depth) {
  if (depth == 0 || rng.uniform() < 0.25) {
    if (rng.uniform() < 0.55) {
      const char* vars[3] = {"x", "y", "z"};
      return vars[static_cast<int>(rng.uniform(0, 3)) % 3];
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", rng.uniform(0.3, 2.0));
    return buf;
  }
  std::string a = random_expression(rng, depth - 1);
  switch (static_cast<int>(rng.uniform(0, 12)) % 12) {
    case 0: return "(" + a + "+" + random_expression(rng, depth - 1) + ")";
    case 1: return "(" + a + "-" + random_expression(rng, depth - 1) + ")";
    case 2: return a + "*" + random_expression(rng, depth - 1);
    case 3: return "(" + a + ")/(" + random_expression(rng, depth - 1) + "+3)";
    case 4: return "sin(" + a + ")";
    case 5: return "cos(" + a + ")";
    case 6: return "tan(" + a + ")";
    case 7: return "exp(" + a + ")";
    case 8: return "sqrt((" + a + ")^2+0.5)";
    case 9: return "log((" + a + ")^2+1.5)";
    case 10: return "(" + a + ")^2";
    default: return "(" + a + ")^3";
  }
}

void criterion5() {
  const std::vector<std::string> coords = {"x", "y", "z"};
  Rng rng(501);
  int accepted = 0, attempts = 0;
  double worst = 0.0;
  while (accepted < 500 && attempts < 20000) {
    ++attempts;
    std::string text = random_expression(rng, 3);
    double candidate_worst = 0.0;
    bool usable = true;
    try {
      auto field = rmap::expr::ScalarField::parse(text, coords);
      auto value_only = [&](const Eigen::VectorXd& q) { return field.eval(q); };
      for (int k = 0; k < 3 && usable; ++k) {
        Eigen::VectorXd p(3);
        p << rng.uniform(0.4, 1.4), rng.uniform(0.4, 1.4), rng.uniform(0.4, 1.4);
        auto jet = field.jet2(p);
        // Magnitude cap keeps the finite-difference roundoff below the
        // comparison floor.
        if (std::abs(jet.value) > 50.0 || jet.grad.cwiseAbs().maxCoeff() > 50.0 ||
            jet.hess.cwiseAbs().maxCoeff() > 50.0) {
          usable = false;
          break;
        }
        Eigen::VectorXd grad_fd = oracles::fd_grad(value_only, p, 1e-5);
        Eigen::MatrixXd hess_fd = oracles::fd_hess(value_only, p, 1e-4);
        // The oracle must resolve the derivative itself: points where halving
        // the step moves the estimate past half the comparison budget are
        // outside finite-difference resolution and are redrawn.
        Eigen::VectorXd grad_fd2 = oracles::fd_grad(value_only, p, 2e-5);
        Eigen::MatrixXd hess_fd2 = oracles::fd_hess(value_only, p, 2e-4);
        for (int i = 0; i < 3 && usable; ++i) {
          if (std::abs(grad_fd[i] - grad_fd2[i]) > 5e-7 * (1.0 + std::abs(grad_fd[i])))
            usable = false;
          for (int j = 0; j < 3; ++j)
            if (std::abs(hess_fd(i, j) - hess_fd2(i, j)) > 5e-7 * (1.0 + std::abs(hess_fd(i, j))))
              usable = false;
        }
        if (!usable) break;
        for (int i = 0; i < 3; ++i) {
          candidate_worst = std::max(
              candidate_worst, std::abs(jet.grad[i] - grad_fd[i]) / (1.0 + std::abs(jet.grad[i])));
          for (int j = 0; j < 3; ++j)
            candidate_worst =
                std::max(candidate_worst, std::abs(jet.hess(i, j) - hess_fd(i, j)) /
                                              (1.0 + std::abs(jet.hess(i, j))));
        }
      }
    } catch (const rmap::Error&) {
      usable = false;  // left the function's domain at a test point
    }
    if (!usable) continue;
    ++accepted;
    worst = std::max(worst, candidate_worst);
  }
  bool pass = accepted == 500 && worst < 1e-6;
  verdict(5, pass,
          fmt("jets of %d random expressions vs central differences: worst relative "
              "deviation %.1e (%d candidates drawn)",
              accepted, worst, attempts));
}

// ----------------------------------------------------------------------------
// 6. Integrator order on the sphere and speed conservation across the charts.
void criterion6() {
  ChartManifold sphere = fixtures::sphere();
  Eigen::VectorXd start = fixtures::vec2(1.2, 0.4);
  Rng rng(606);
  Eigen::VectorXd vel = unit_velocity(sphere, start, rng);
  auto endpoint = [&](double step) {
    return rmap::integrate_geodesic(sphere, start, vel, 0.5, step).samples.back().point;
  };
  Eigen::VectorXd reference = endpoint(1e-4);
  double coarse = (endpoint(0.02) - reference).norm();
  double fine = (endpoint(0.01) - reference).norm();
  double order = std::log2(coarse / fine);

  struct Case {
    ChartManifold chart;
    Eigen::VectorXd start;
    double length;
  };
  std::vector<Case> cases;
  cases.push_back({fixtures::plane(), fixtures::vec2(0, 0), 1.0});
  cases.push_back({fixtures::polar(), fixtures::vec2(2.0, 0.0), 0.5});
  cases.push_back({fixtures::sphere(), fixtures::vec2(1.2, 0.4), 0.5});
  cases.push_back({fixtures::sasakian_target(), fixtures::vec3(0.2, 0.3, -0.1), 0.5});
  cases.push_back({fixtures::warped_target(), fixtures::vec3(0.3, 1.2, 0.2), 0.3});
  cases.push_back({fixtures::flat3(), fixtures::vec3(0, 0, 0), 1.0});

  double worst_drift = 0.0;
  for (const auto& c : cases)
    for (int k = 0; k < 3; ++k) {
      Eigen::VectorXd v = unit_velocity(c.chart, c.start, rng);
      GeodesicTrace trace = rmap::integrate_geodesic(c.chart, c.start, v, c.length, 1e-3);
      worst_drift = std::max(worst_drift, trace.max_speed_drift / c.length);
    }

  bool pass = order >= 3.5 && worst_drift < 1e-6;
  verdict(6, pass,
          fmt("geodesic integrator: empirical order %.2f on the sphere, worst speed drift "
              "%.1e per unit arclength over %zu charts x 3 directions",
              order, worst_drift, cases.size()));
}

// ----------------------------------------------------------------------------
// 7. Geodesic-image characterisation sampled along seeded geodesics.
void criterion7() {
  Manifest m = rmap::load_manifest(fixture("example_3_1.json"));
  const SmoothMapSpec* map = m.find_map("pi");
  const rmap::ContactStructure* structure = m.find_structure("S");

  Rng rng(731);
  int one_sided = 0, samples = 0, geodesic_samples = 0;
  for (int trial = 0; trial < 5; ++trial) {
    Eigen::VectorXd start(3);
    start << rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5);
    Eigen::VectorXd vel;
    do {
      vel = unit_velocity(*map->domain, start, rng);
    } while (std::abs(vel[0]) > 1.0 || std::abs(vel[1]) > 1.0);
    GeodesicTrace gamma = rmap::integrate_geodesic(*map->domain, start, vel, 0.8, 1e-3);
    for (const auto& sample : rmap::thm31_residuals(*map, *structure, gamma)) {
      bool equations = std::max(sample.range_residual, sample.perp_residual) < 1e-5;
      bool geodesic = sample.image_accel < 1e-5;
      if (equations != geodesic) ++one_sided;
      if (geodesic) ++geodesic_samples;
      ++samples;
    }
  }
  bool pass = one_sided == 0 && samples > 0;
  verdict(7, pass,
          fmt("characterisation equations vs image acceleration: %d samples over 5 seeded "
              "geodesics, %d one-sided disagreements (%d geodesic verdicts)",
              samples, one_sided, geodesic_samples));
}

// ----------------------------------------------------------------------------
// 8. Integrability verdicts on both worked targets.
void criterion8() {
  Report shear = rmap::run_checks(rmap::load_manifest(fixture("example_2_1.json")), 7);
  Report warped = rmap::run_checks(rmap::load_manifest(fixture("example_3_2.json")), 7);
  double contact = res(shear, "contact_distribution", "residual");
  double perp = res(warped, "perp_integrable", "residual");
  bool pass = passed(shear, "contact_distribution") && contact > 0.1 &&
              passed(warped, "perp_integrable") && perp < 1e-8;
  verdict(8, pass,
          fmt("integrability: contact distribution residual %.2g (non-integrable), perp "
              "distribution residual %.1e (integrable)",
              contact, perp));
}

// ----------------------------------------------------------------------------
// 9. Byte-identical reports across repeated seeded runs of the cli.
void criterion9() {
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  bool pass = true;
  std::string detail;
  for (const char* name : {"example_3_1.json", "example_3_2.json"}) {
    std::string first = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                        "/rmap_accept_a.json";
    std::string second = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                         "/rmap_accept_b.json";
    std::string base = std::string(RMAP_CLI_PATH) + " check " + fixture(name) +
                       " --seed 123 --format json --out ";
    int rc1 = std::system((base + first).c_str());
    int rc2 = std::system((base + second).c_str());
    std::string a = slurp(first), b = slurp(second);
    if (rc1 != 0 || rc2 != 0 || a.empty() || a != b) {
      pass = false;
      detail = fmt("%s: run statuses %d/%d, %zu vs %zu bytes%s", name, rc1, rc2, a.size(),
                   b.size(), a == b ? "" : " (differ)");
      break;
    }
    detail += fmt("%s%s %zu bytes", detail.empty() ? "" : ", ", name, a.size());
  }
  verdict(9, pass, "repeated seeded cli runs byte-identical: " + detail);
}

}  // namespace

int main() {
  std::printf("acceptance gate, toolkit %s\n", rmap::kToolkitVersion);
  void (*criteria[])() = {criterion1, criterion2, criterion3, criterion4, criterion5,
                          criterion6, criterion7, criterion8, criterion9};
  for (int i = 0; i < 9; ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      verdict(i + 1, false, std::string("exception: ") + e.what());
    }
  }
  std::printf("%d of 9 criteria passed\n", 9 - failures);
  return failures == 0 ? 0 : 1;
}
