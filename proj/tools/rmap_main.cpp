#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rmap/error.hpp"
#include "rmap/manifest.hpp"

namespace {

int write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::fputs(text.c_str(), stdout);
    return 0;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "error: cannot write \"%s\"\n", path.c_str());
    return 2;
  }
  out << text;
  return 0;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  Eigen::VectorXd out(static_cast<int>(v.size()));
  for (int i = 0; i < out.size(); ++i) out[i] = v[i];
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"almost-contact Riemannian map toolkit"};
  app.require_subcommand(1);

  std::string manifest_path;
  std::string out_path;

  auto* check = app.add_subcommand("check", "run every check in a manifest");
  std::uint64_t seed = 0;
  double tol = 1e-8;
  std::string format = "text";
  check->add_option("manifest", manifest_path, "manifest file")->required();
  check->add_option("--seed", seed, "seed for randomised point draws");
  check->add_option("--tol", tol, "tolerance for checks that do not set one");
  check->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"json", "text"}));
  check->add_option("--out", out_path, "write the report to a file");

  auto* geodesic = app.add_subcommand("geodesic", "trace a codomain geodesic as CSV");
  std::string map_name;
  std::vector<double> start, velocity;
  double length = 1.0, step = 1e-3;
  geodesic->add_option("manifest", manifest_path, "manifest file")->required();
  geodesic->add_option("--map", map_name, "map whose codomain carries the geodesic")->required();
  geodesic->add_option("--start", start, "start point coordinates")->required()->expected(-1);
  geodesic->add_option("--velocity", velocity, "initial velocity components")
      ->required()
      ->expected(-1);
  geodesic->add_option("--length", length, "arclength to integrate")->required();
  geodesic->add_option("--step", step, "integrator step")->required();
  geodesic->add_option("--out", out_path, "write the CSV to a file");

  auto* validate = app.add_subcommand("validate", "parse a manifest and report its contents");
  validate->add_option("manifest", manifest_path, "manifest file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (check->parsed()) {
      rmap::Manifest m = rmap::load_manifest(manifest_path);
      rmap::Report report = rmap::run_checks(m, seed, tol);
      std::string text =
          format == "json" ? rmap::emit_report_json(report) : rmap::emit_report_text(report);
      if (int io = write_output(text, out_path)) return io;
      return report.exit_code();
    }
    if (geodesic->parsed()) {
      rmap::Manifest m = rmap::load_manifest(manifest_path);
      std::string csv = rmap::geodesic_csv(m, map_name, to_vector(start), to_vector(velocity),
                                           length, step);
      return write_output(csv, out_path);
    }
    rmap::Manifest m = rmap::load_manifest(manifest_path);
    std::printf("%s: %zu manifolds, %zu structures, %zu maps, %zu frame sets, %zu checks\n",
                manifest_path.c_str(), m.manifolds.size(), m.structures.size(), m.maps.size(),
                m.frames.size(), m.checks.size());
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
