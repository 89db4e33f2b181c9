#include "rmap/manifest.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "rmap/error.hpp"
#include "rmap/geodesic.hpp"
#include "rmap/rng.hpp"

namespace rmap {
namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& msg) { fail(ErrorKind::Parse, msg); }

// Re-throws library errors with the manifest section prepended, keeping the
// error kind.
template <typename F>
auto with_context(const std::string& ctx, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), ctx + ": " + e.what(), e.offset());
  }
}

// ----------------------------------------------------------------------------
// JSON access with manifest-shaped error messages
// ----------------------------------------------------------------------------

const json* opt_member(const json& j, const char* key) {
  if (!j.is_object()) return nullptr;
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

const json& member(const json& j, const char* key, const std::string& ctx) {
  const json* found = opt_member(j, key);
  if (!found) parse_fail(ctx + " is missing \"" + key + "\"");
  return *found;
}

std::string as_string(const json& j, const std::string& ctx) {
  if (!j.is_string()) parse_fail(ctx + " must be a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& ctx) {
  if (!j.is_number()) parse_fail(ctx + " must be a number");
  return j.get<double>();
}

int as_int(const json& j, const std::string& ctx) {
  if (!j.is_number_integer()) parse_fail(ctx + " must be an integer");
  return j.get<int>();
}

bool as_bool(const json& j, const std::string& ctx) {
  if (!j.is_boolean()) parse_fail(ctx + " must be a boolean");
  return j.get<bool>();
}

std::uint64_t as_seed(const json& j, const std::string& ctx) {
  if (!j.is_number_integer() || (j.is_number_integer() && j.get<std::int64_t>() < 0))
    parse_fail(ctx + " must be a non-negative integer");
  return j.get<std::uint64_t>();
}

const json& as_array(const json& j, const std::string& ctx) {
  if (!j.is_array()) parse_fail(ctx + " must be an array");
  return j;
}

std::vector<std::string> string_list(const json& j, const std::string& ctx) {
  std::vector<std::string> out;
  for (const json& e : as_array(j, ctx)) out.push_back(as_string(e, ctx + " entry"));
  return out;
}

Eigen::VectorXd number_list(const json& j, int dim, const std::string& ctx) {
  const json& arr = as_array(j, ctx);
  if (dim >= 0 && static_cast<int>(arr.size()) != dim)
    fail(ErrorKind::DimensionMismatch,
         ctx + " needs " + std::to_string(dim) + " entries, got " + std::to_string(arr.size()));
  Eigen::VectorXd out(arr.size());
  for (int i = 0; i < static_cast<int>(arr.size()); ++i) out[i] = as_number(arr[i], ctx + " entry");
  return out;
}

// ----------------------------------------------------------------------------
// Manifest object parsing
// ----------------------------------------------------------------------------

void load_manifolds(const json& root, Manifest& m) {
  const json* arr = opt_member(root, "manifolds");
  if (!arr) return;
  for (const json& j : as_array(*arr, "manifolds")) {
    std::string name = as_string(member(j, "name", "manifold"), "manifold name");
    std::string ctx = "manifold \"" + name + "\"";
    if (m.find_manifold(name)) parse_fail("duplicate manifold name \"" + name + "\"");

    std::vector<std::string> coords = string_list(member(j, "coords", ctx), ctx + " coords");
    if (coords.empty()) parse_fail(ctx + " has no coordinates");
    int dim = static_cast<int>(coords.size());

    const json& box = member(j, "box", ctx);
    Eigen::VectorXd lo = number_list(member(box, "lo", ctx + " box"), dim, ctx + " box lo");
    Eigen::VectorXd hi = number_list(member(box, "hi", ctx + " box"), dim, ctx + " box hi");
    DomainSpec dom = DomainSpec::box(lo, hi);

    if (const json* ex = opt_member(j, "exclusions")) {
      for (const json& e : as_array(*ex, ctx + " exclusions")) {
        std::string coord = as_string(member(e, "coord", ctx + " exclusion"), ctx + " exclusion coord");
        auto it = std::find(coords.begin(), coords.end(), coord);
        if (it == coords.end())
          fail(ErrorKind::UnresolvedReference,
               ctx + " exclusion names unknown coordinate \"" + coord + "\"");
        dom.exclusions.push_back({static_cast<int>(it - coords.begin()),
                                  as_number(member(e, "value", ctx + " exclusion"),
                                            ctx + " exclusion value")});
      }
    }

    std::vector<std::string> metric = string_list(member(j, "metric", ctx), ctx + " metric");
    if (static_cast<int>(metric.size()) != dim * dim)
      fail(ErrorKind::DimensionMismatch, ctx + " metric needs " + std::to_string(dim * dim) +
                                             " entries, got " + std::to_string(metric.size()));
    with_context(ctx, [&] {
      m.manifolds.push_back(std::make_unique<ChartManifold>(name, coords, dom, metric));
    });
  }
}

const ChartManifold* manifold_ref(const json& j, const char* key, const Manifest& m,
                                  const std::string& ctx) {
  std::string name = as_string(member(j, key, ctx), ctx + std::string(" ") + key);
  const ChartManifold* chart = m.find_manifold(name);
  if (!chart)
    fail(ErrorKind::UnresolvedReference, ctx + " references unknown manifold \"" + name + "\"");
  return chart;
}

void load_structures(const json& root, Manifest& m) {
  const json* arr = opt_member(root, "structures");
  if (!arr) return;
  for (const json& j : as_array(*arr, "structures")) {
    std::string name = as_string(member(j, "name", "structure"), "structure name");
    std::string ctx = "structure \"" + name + "\"";
    if (m.find_structure(name)) parse_fail("duplicate structure name \"" + name + "\"");
    const ChartManifold* chart = manifold_ref(j, "manifold", m, ctx);

    std::vector<std::string> psi = string_list(member(j, "psi", ctx), ctx + " psi");
    std::vector<std::string> xi = string_list(member(j, "xi", ctx), ctx + " xi");
    std::vector<std::string> eta = string_list(member(j, "eta", ctx), ctx + " eta");
    ContactStructure s =
        with_context(ctx, [&] { return ContactStructure::parse(*chart, psi, xi, eta); });

    if (const json* type = opt_member(j, "type")) {
      std::string alpha = as_string(member(*type, "alpha", ctx + " type"), ctx + " type alpha");
      std::string beta = as_string(member(*type, "beta", ctx + " type"), ctx + " type beta");
      with_context(ctx + " type", [&] {
        s.declared_type = {chart->parse_field(alpha), chart->parse_field(beta)};
      });
    }
    m.structures.push_back({name, std::make_unique<ContactStructure>(std::move(s))});
  }
}

void load_maps(const json& root, Manifest& m) {
  const json* arr = opt_member(root, "maps");
  if (!arr) return;
  for (const json& j : as_array(*arr, "maps")) {
    std::string name = as_string(member(j, "name", "map"), "map name");
    std::string ctx = "map \"" + name + "\"";
    if (m.find_map(name)) parse_fail("duplicate map name \"" + name + "\"");
    const ChartManifold* dom = manifold_ref(j, "domain", m, ctx);
    const ChartManifold* cod = manifold_ref(j, "codomain", m, ctx);

    std::vector<std::string> comps = string_list(member(j, "components", ctx), ctx + " components");
    if (static_cast<int>(comps.size()) != cod->dim())
      fail(ErrorKind::DimensionMismatch,
           ctx + " needs " + std::to_string(cod->dim()) + " components");
    SmoothMapSpec map =
        with_context(ctx, [&] { return SmoothMapSpec::parse(*dom, *cod, comps); });
    m.maps.push_back({name, std::make_unique<SmoothMapSpec>(std::move(map))});
  }
}

void load_frames(const json& root, Manifest& m) {
  const json* arr = opt_member(root, "frames");
  if (!arr) return;
  for (const json& j : as_array(*arr, "frames")) {
    std::string name = as_string(member(j, "name", "frame set"), "frame set name");
    std::string ctx = "frames \"" + name + "\"";
    if (m.find_frames(name)) parse_fail("duplicate frame set name \"" + name + "\"");
    const ChartManifold* chart = manifold_ref(j, "manifold", m, ctx);

    Manifest::FrameSet set;
    set.name = name;
    set.manifold = chart;
    for (const json& f : as_array(member(j, "fields", ctx), ctx + " fields")) {
      std::vector<std::string> comps = string_list(f, ctx + " field");
      if (static_cast<int>(comps.size()) != chart->dim())
        fail(ErrorKind::DimensionMismatch,
             ctx + " field needs " + std::to_string(chart->dim()) + " components");
      set.fields.push_back(
          with_context(ctx, [&] { return VectorFieldSpec::parse(*chart, comps); }));
    }
    if (set.fields.empty()) parse_fail(ctx + " has no fields");
    m.frames.push_back(std::move(set));
  }
}

// ----------------------------------------------------------------------------
// Check parameter parsing
// ----------------------------------------------------------------------------

const ContactStructure* structure_ref(const json& j, const Manifest& m, const std::string& ctx) {
  std::string name = as_string(member(j, "structure", ctx), ctx + " structure");
  const ContactStructure* s = m.find_structure(name);
  if (!s)
    fail(ErrorKind::UnresolvedReference, ctx + " references unknown structure \"" + name + "\"");
  return s;
}

const SmoothMapSpec* map_ref(const json& j, const Manifest& m, const std::string& ctx) {
  std::string name = as_string(member(j, "map", ctx), ctx + " map");
  const SmoothMapSpec* map = m.find_map(name);
  if (!map) fail(ErrorKind::UnresolvedReference, ctx + " references unknown map \"" + name + "\"");
  return map;
}

const Manifest::FrameSet* frames_ref(const json& j, const char* key, const Manifest& m,
                                     const std::string& ctx) {
  std::string name = as_string(member(j, key, ctx), ctx + std::string(" ") + key);
  const Manifest::FrameSet* set = m.find_frames(name);
  if (!set)
    fail(ErrorKind::UnresolvedReference, ctx + " references unknown frame set \"" + name + "\"");
  return set;
}

void require_chart(const ChartManifold* have, const ChartManifold* want, const std::string& what,
                   const std::string& ctx) {
  if (have != want)
    fail(ErrorKind::Invalid, ctx + ": " + what + " lives on \"" + have->name() +
                                 "\", expected \"" + want->name() + "\"");
}

PointsSpec parse_points(const json& j, const ChartManifold& chart, const std::string& ctx) {
  const json& pj = member(j, "points", ctx);
  PointsSpec out;
  if (pj.is_array()) {
    for (const json& p : pj)
      out.points.push_back(number_list(p, chart.dim(), ctx + " point"));
    if (out.points.empty()) parse_fail(ctx + " points list is empty");
    for (size_t k = 0; k < out.points.size(); ++k)
      if (!chart.domain().contains(out.points[k]))
        fail(ErrorKind::Invalid, ctx + " point " + std::to_string(k) +
                                     " lies outside the domain of \"" + chart.name() + "\"");
    return out;
  }
  if (const json* r = opt_member(pj, "random")) {
    out.random_n = as_int(member(*r, "n", ctx + " random"), ctx + " random n");
    if (out.random_n <= 0) parse_fail(ctx + " random n must be positive");
    if (const json* s = opt_member(*r, "seed"))
      out.random_seed = as_seed(*s, ctx + " random seed");
    if (!chart.domain().finite())
      fail(ErrorKind::Invalid, ctx + " random sampling needs a bounded box on \"" +
                                   chart.name() + "\"");
    return out;
  }
  parse_fail(ctx + " points must be a list of points or {\"random\": {\"n\": ..., \"seed\": ...}}");
}

std::optional<expr::ScalarField> parse_h(const json& j, const ChartManifold& chart,
                                         const std::string& ctx) {
  const json* h = opt_member(j, "h");
  if (!h) return std::nullopt;
  return with_context(ctx + " h",
                      [&] { return chart.parse_field(as_string(*h, ctx + " h")); });
}

CodomainFrames parse_codomain_frames(const json& j, const SmoothMapSpec& map, const Manifest& m,
                                     const std::string& ctx) {
  const Manifest::FrameSet* range = frames_ref(j, "range", m, ctx);
  const Manifest::FrameSet* perp = frames_ref(j, "perp", m, ctx);
  require_chart(range->manifold, map.codomain, "range frame set \"" + range->name + "\"", ctx);
  require_chart(perp->manifold, map.codomain, "perp frame set \"" + perp->name + "\"", ctx);
  return CodomainFrames{range->fields, perp->fields};
}

std::optional<SmoothMapSpec> parse_section(const json& j, const SmoothMapSpec& map,
                                           const std::string& ctx) {
  const json* s = opt_member(j, "section");
  if (!s) return std::nullopt;
  std::vector<std::string> comps =
      string_list(member(*s, "components", ctx + " section"), ctx + " section components");
  if (static_cast<int>(comps.size()) != map.domain->dim())
    fail(ErrorKind::DimensionMismatch,
         ctx + " section needs " + std::to_string(map.domain->dim()) + " components");
  return with_context(ctx + " section",
                      [&] { return SmoothMapSpec::parse(*map.codomain, *map.domain, comps); });
}

std::vector<ClairautStart> parse_starts(const json& j, int dim, const std::string& ctx) {
  std::vector<ClairautStart> out;
  for (const json& s : as_array(member(j, "starts", ctx), ctx + " starts")) {
    ClairautStart start;
    start.point = number_list(member(s, "point", ctx + " start"), dim, ctx + " start point");
    start.velocity =
        number_list(member(s, "velocity", ctx + " start"), dim, ctx + " start velocity");
    out.push_back(std::move(start));
  }
  if (out.empty()) parse_fail(ctx + " starts list is empty");
  return out;
}

std::optional<std::pair<expr::ScalarField, expr::ScalarField>> parse_type_pair(
    const json& j, const char* key, const ChartManifold& chart, const std::string& ctx) {
  const json* t = opt_member(j, key);
  if (!t) return std::nullopt;
  std::string sub = ctx + " " + key;
  return with_context(sub, [&] {
    return std::make_pair(chart.parse_field(as_string(member(*t, "alpha", sub), sub + " alpha")),
                          chart.parse_field(as_string(member(*t, "beta", sub), sub + " beta")));
  });
}

double opt_number(const json& j, const char* key, double fallback, const std::string& ctx) {
  const json* v = opt_member(j, key);
  return v ? as_number(*v, ctx + std::string(" ") + key) : fallback;
}

bool opt_bool(const json& j, const char* key, bool fallback, const std::string& ctx) {
  const json* v = opt_member(j, key);
  return v ? as_bool(*v, ctx + std::string(" ") + key) : fallback;
}

CheckParams parse_check_params(const std::string& type, const json& j, const Manifest& m,
                               const std::string& ctx) {
  if (type == "almost_contact") {
    AlmostContactCheck c;
    c.structure = structure_ref(j, m, ctx);
    c.points = parse_points(j, *c.structure->chart, ctx);
    c.expect_pass = opt_bool(j, "expect_pass", true, ctx);
    return c;
  }
  if (type == "estimate_type") {
    EstimateTypeCheck c;
    c.structure = structure_ref(j, m, ctx);
    c.points = parse_points(j, *c.structure->chart, ctx);
    c.expect = parse_type_pair(j, "expect", *c.structure->chart, ctx);
    return c;
  }
  if (type == "trans_sasakian") {
    TransSasakianCheck c;
    c.structure = structure_ref(j, m, ctx);
    c.points = parse_points(j, *c.structure->chart, ctx);
    const json* alpha = opt_member(j, "alpha");
    const json* beta = opt_member(j, "beta");
    if (static_cast<bool>(alpha) != static_cast<bool>(beta))
      parse_fail(ctx + " needs both alpha and beta or neither");
    if (alpha)
      c.type = with_context(ctx, [&] {
        return std::make_pair(
            c.structure->chart->parse_field(as_string(*alpha, ctx + " alpha")),
            c.structure->chart->parse_field(as_string(*beta, ctx + " beta")));
      });
    return c;
  }
  if (type == "riemannian_map") {
    RiemannianMapCheck c;
    c.map = map_ref(j, m, ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    if (const json* e = opt_member(j, "expect")) {
      if (const json* r = opt_member(*e, "rank")) c.expect_rank = as_int(*r, ctx + " expect rank");
      if (const json* k = opt_member(*e, "kernel"))
        for (const json& v : as_array(*k, ctx + " expect kernel"))
          c.expect_kernel.push_back(number_list(v, c.map->domain->dim(), ctx + " kernel vector"));
    }
    c.kernel_tol = opt_number(j, "kernel_tol", 1e-8, ctx);
    return c;
  }
  if (type == "sff") {
    SffCheck c;
    c.map = map_ref(j, m, ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    if (const json* e = opt_member(j, "expect")) {
      if (e->is_string()) {
        if (e->get<std::string>() != "zero")
          parse_fail(ctx + " expect must be \"zero\" or a component list");
      } else {
        std::vector<std::string> comps = string_list(*e, ctx + " expect");
        if (static_cast<int>(comps.size()) != c.map->codomain->dim())
          fail(ErrorKind::DimensionMismatch,
               ctx + " expect needs " + std::to_string(c.map->codomain->dim()) + " components");
        for (const std::string& s : comps)
          c.expect.push_back(
              with_context(ctx + " expect", [&] { return c.map->codomain->parse_field(s); }));
      }
    }
    return c;
  }
  if (type == "shape_operator") {
    ShapeOperatorCheck c;
    c.map = map_ref(j, m, ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    std::vector<std::string> comps = string_list(member(j, "vector", ctx), ctx + " vector");
    if (static_cast<int>(comps.size()) != c.map->codomain->dim())
      fail(ErrorKind::DimensionMismatch,
           ctx + " vector needs " + std::to_string(c.map->codomain->dim()) + " components");
    for (const std::string& s : comps)
      c.vector_field.push_back(
          with_context(ctx + " vector", [&] { return c.map->codomain->parse_field(s); }));
    for (const json& row : as_array(member(j, "expect", ctx), ctx + " expect")) {
      std::vector<expr::ScalarField> entries;
      for (const std::string& s : string_list(row, ctx + " expect row"))
        entries.push_back(
            with_context(ctx + " expect", [&] { return c.map->codomain->parse_field(s); }));
      c.expect.push_back(std::move(entries));
    }
    for (const auto& row : c.expect)
      if (row.size() != c.expect.size())
        fail(ErrorKind::DimensionMismatch, ctx + " expect must be a square matrix");
    return c;
  }
  if (type == "umbilical") {
    UmbilicalCheck c;
    c.map = map_ref(j, m, ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    c.h = parse_h(j, *c.map->codomain, ctx);
    c.expect_satisfied = opt_bool(j, "expect_satisfied", true, ctx);
    return c;
  }
  if (type == "anti_invariance") {
    AntiInvarianceCheck c;
    c.map = map_ref(j, m, ctx);
    c.structure = structure_ref(j, m, ctx);
    require_chart(c.structure->chart, c.map->codomain, "the structure", ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    if (const json* e = opt_member(j, "expect_reeb")) {
      std::string pos = as_string(*e, ctx + " expect_reeb");
      if (pos == "horizontal") c.expect_reeb = ReebPosition::Horizontal;
      else if (pos == "vertical") c.expect_reeb = ReebPosition::Vertical;
      else if (pos == "mixed") c.expect_reeb = ReebPosition::Mixed;
      else parse_fail(ctx + " expect_reeb must be horizontal, vertical or mixed");
    }
    return c;
  }
  if (type == "harmonicity") {
    HarmonicityCheck c;
    c.map = map_ref(j, m, ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    c.expect_harmonic = opt_bool(j, "expect_harmonic", true, ctx);
    return c;
  }
  if (type == "frame_match") {
    FrameMatchCheck c;
    c.map = map_ref(j, m, ctx);
    c.frames = parse_codomain_frames(j, *c.map, m, ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    return c;
  }
  if (type == "clairaut_geodesic") {
    ClairautGeodesicCheck c;
    c.map = map_ref(j, m, ctx);
    c.structure = structure_ref(j, m, ctx);
    require_chart(c.structure->chart, c.map->codomain, "the structure", ctx);
    c.frames = parse_codomain_frames(j, *c.map, m, ctx);
    c.h = parse_h(j, *c.map->codomain, ctx);
    c.section = parse_section(j, *c.map, ctx);
    c.starts = parse_starts(j, c.map->codomain->dim(), ctx);
    c.length = as_number(member(j, "length", ctx), ctx + " length");
    c.step = as_number(member(j, "step", ctx), ctx + " step");
    c.expect_conserved = opt_bool(j, "expect_conserved", true, ctx);
    return c;
  }
  if (type == "thm31_equivalence") {
    Thm31Check c;
    c.map = map_ref(j, m, ctx);
    c.structure = structure_ref(j, m, ctx);
    require_chart(c.structure->chart, c.map->codomain, "the structure", ctx);
    const json& s = member(j, "start", ctx);
    c.start = number_list(member(s, "point", ctx + " start"), c.map->domain->dim(),
                          ctx + " start point");
    c.velocity = number_list(member(s, "velocity", ctx + " start"), c.map->domain->dim(),
                             ctx + " start velocity");
    c.length = as_number(member(j, "length", ctx), ctx + " length");
    c.step = as_number(member(j, "step", ctx), ctx + " step");
    if (const json* e = opt_member(j, "expect")) {
      std::string kind = as_string(*e, ctx + " expect");
      if (kind == "geodesic") c.expect_geodesic = true;
      else if (kind == "non_geodesic") c.expect_geodesic = false;
      else parse_fail(ctx + " expect must be geodesic or non_geodesic");
    }
    return c;
  }
  if (type == "thm32") {
    Thm32Check c;
    c.map = map_ref(j, m, ctx);
    c.structure = structure_ref(j, m, ctx);
    require_chart(c.structure->chart, c.map->codomain, "the structure", ctx);
    c.frames = parse_codomain_frames(j, *c.map, m, ctx);
    c.h = parse_h(j, *c.map->codomain, ctx);
    std::optional<SmoothMapSpec> section = parse_section(j, *c.map, ctx);
    if (!section) parse_fail(ctx + " needs a section");
    c.section = std::move(*section);
    c.starts = parse_starts(j, c.map->codomain->dim(), ctx);
    c.length = as_number(member(j, "length", ctx), ctx + " length");
    c.step = as_number(member(j, "step", ctx), ctx + " step");
    return c;
  }
  if (type == "range_distribution") {
    RangeDistributionCheck c;
    c.map = map_ref(j, m, ctx);
    c.structure = structure_ref(j, m, ctx);
    require_chart(c.structure->chart, c.map->codomain, "the structure", ctx);
    c.frames = parse_codomain_frames(j, *c.map, m, ctx);
    c.h = parse_h(j, *c.map->codomain, ctx);
    c.points = parse_points(j, *c.map->domain, ctx);
    return c;
  }
  if (type == "integrability") {
    IntegrabilityCheck c;
    c.manifold = manifold_ref(j, "manifold", m, ctx);
    const Manifest::FrameSet* frames = frames_ref(j, "frames", m, ctx);
    const Manifest::FrameSet* complement = frames_ref(j, "complement", m, ctx);
    require_chart(frames->manifold, c.manifold, "frame set \"" + frames->name + "\"", ctx);
    require_chart(complement->manifold, c.manifold, "frame set \"" + complement->name + "\"",
                  ctx);
    c.frames = frames->fields;
    c.complement = complement->fields;
    c.points = parse_points(j, *c.manifold, ctx);
    c.expect_integrable = opt_bool(j, "expect_integrable", true, ctx);
    return c;
  }
  parse_fail(ctx + " has unknown type \"" + type + "\"");
}

void load_checks(const json& root, Manifest& m) {
  const json* arr = opt_member(root, "checks");
  if (!arr) return;
  for (const json& j : as_array(*arr, "checks")) {
    CheckSpec spec;
    spec.name = as_string(member(j, "name", "check"), "check name");
    std::string ctx = "check \"" + spec.name + "\"";
    for (const CheckSpec& other : m.checks)
      if (other.name == spec.name) parse_fail("duplicate check name \"" + spec.name + "\"");
    spec.type = as_string(member(j, "type", ctx), ctx + " type");
    if (const json* t = opt_member(j, "tol")) spec.tol = as_number(*t, ctx + " tol");
    spec.params = parse_check_params(spec.type, j, m, ctx);
    m.checks.push_back(std::move(spec));
  }
}

// ----------------------------------------------------------------------------
// Check runner
// ----------------------------------------------------------------------------

std::vector<Eigen::VectorXd> resolve_points(const PointsSpec& spec, const ChartManifold& chart,
                                            std::uint64_t fallback_seed) {
  if (!spec.points.empty()) return spec.points;
  Rng rng(spec.random_seed ? *spec.random_seed : fallback_seed);
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(spec.random_n);
  for (int i = 0; i < spec.random_n; ++i) pts.push_back(chart.domain().sample(rng));
  return pts;
}

// Largest principal angle between the column spans of a and b, measured in
// the metric g.
double max_principal_angle(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Eigen::MatrixXd& g) {
  if (a.cols() != b.cols())
    fail(ErrorKind::DimensionMismatch, "compared spans have different dimensions");
  if (a.cols() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  Eigen::MatrixXd root = es.operatorSqrt();
  auto orthonormal = [&](const Eigen::MatrixXd& span) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(root * span);
    return Eigen::MatrixXd(qr.householderQ() *
                           Eigen::MatrixXd::Identity(span.rows(), span.cols()));
  };
  Eigen::MatrixXd qa = orthonormal(a);
  Eigen::MatrixXd qb = orthonormal(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
  double c = std::clamp(svd.singularValues().minCoeff(), -1.0, 1.0);
  if (c < 0.7) return std::acos(c);
  // acos flattens small angles to sqrt(eps); the sines of the principal
  // angles are the singular values of the projection residual.
  Eigen::JacobiSVD<Eigen::MatrixXd> res(qb - qa * (qa.transpose() * qb));
  double s = std::clamp(res.singularValues().maxCoeff(), 0.0, 1.0);
  return std::asin(s);
}

struct CheckRunner {
  std::uint64_t check_seed = 0;
  double tol = 0.0;
  CheckResult& out;

  void add(const char* label, double value) { out.residuals.emplace_back(label, value); }
  void set_status(bool pass) { out.status = pass ? CheckStatus::Pass : CheckStatus::Fail; }

  void operator()(const AlmostContactCheck& c) {
    auto pts = resolve_points(c.points, *c.structure->chart, check_seed);
    AxiomResiduals r =
        check_almost_contact(*c.structure, pts, tol, Rng::derive(check_seed, 1));
    add("psi_squared", r.psi_squared);
    add("psi_xi", r.psi_xi);
    add("eta_psi", r.eta_psi);
    add("eta_xi", r.eta_xi);
    add("compatibility", r.compatibility);
    add("eta_metric", r.eta_metric);
    set_status(r.pass == c.expect_pass);
  }

  void operator()(const EstimateTypeCheck& c) {
    auto pts = resolve_points(c.points, *c.structure->chart, check_seed);
    double fit = 0.0, cond = 0.0, alpha_err = 0.0, beta_err = 0.0;
    TypeEstimate first{};
    for (size_t k = 0; k < pts.size(); ++k) {
      TypeEstimate est = estimate_type(*c.structure, pts[k]);
      if (k == 0) first = est;
      fit = std::max(fit, est.residual);
      cond = std::max(cond, est.cond);
      if (c.expect) {
        alpha_err = std::max(alpha_err, std::abs(est.alpha - c.expect->first.eval(pts[k])));
        beta_err = std::max(beta_err, std::abs(est.beta - c.expect->second.eval(pts[k])));
      }
    }
    add("alpha", first.alpha);
    add("beta", first.beta);
    add("fit_residual", fit);
    add("cond", cond);
    if (c.expect) {
      add("alpha_error", alpha_err);
      add("beta_error", beta_err);
      set_status(alpha_err < tol && beta_err < tol);
    } else {
      set_status(fit < tol);
    }
  }

  void operator()(const TransSasakianCheck& c) {
    auto pts = resolve_points(c.points, *c.structure->chart, check_seed);
    TransSasakianResiduals worst{};
    for (size_t k = 0; k < pts.size(); ++k) {
      double alpha = 0.0, beta = 0.0;
      if (c.type) {
        alpha = c.type->first.eval(pts[k]);
        beta = c.type->second.eval(pts[k]);
      } else if (c.structure->declared_type) {
        alpha = c.structure->declared_type->first.eval(pts[k]);
        beta = c.structure->declared_type->second.eval(pts[k]);
      } else {
        TypeEstimate est = estimate_type(*c.structure, pts[k]);
        alpha = est.alpha;
        beta = est.beta;
      }
      TransSasakianResiduals r = trans_sasakian_residual(*c.structure, pts[k], alpha, beta,
                                                         Rng::derive(check_seed, 100 + k));
      worst.psi_equation = std::max(worst.psi_equation, r.psi_equation);
      worst.eta_scalar = std::max(worst.eta_scalar, r.eta_scalar);
      worst.eta_printed = std::max(worst.eta_printed, r.eta_printed);
      worst.xi_equation = std::max(worst.xi_equation, r.xi_equation);
    }
    add("psi_equation", worst.psi_equation);
    add("eta_scalar", worst.eta_scalar);
    add("eta_printed", worst.eta_printed);
    add("xi_equation", worst.xi_equation);
    set_status(std::max({worst.psi_equation, worst.eta_scalar, worst.xi_equation}) < tol);
  }

  void operator()(const RiemannianMapCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    double iso = 0.0, angle = 0.0, sigma_min = std::numeric_limits<double>::infinity();
    int rank = -1;
    bool rank_ok = true;
    Eigen::MatrixXd expected;
    if (!c.expect_kernel.empty()) {
      expected.resize(c.map->domain->dim(), static_cast<int>(c.expect_kernel.size()));
      for (int i = 0; i < expected.cols(); ++i) expected.col(i) = c.expect_kernel[i];
    }
    for (const auto& p : pts) {
      FrameDecomposition dec = decompose(*c.map, p);
      if (rank < 0) rank = dec.rank;
      int want = c.expect_rank ? *c.expect_rank : rank;
      if (dec.rank != want) rank_ok = false;
      iso = std::max(iso, isometry_residual(*c.map, p));
      if (dec.rank > 0) sigma_min = std::min(sigma_min, dec.singular_values[dec.rank - 1]);
      if (expected.cols() > 0) {
        if (expected.cols() != dec.ker.cols())
          fail(ErrorKind::DimensionMismatch,
               "expected kernel has " + std::to_string(expected.cols()) +
                   " fields, decomposition has " + std::to_string(dec.ker.cols()));
        angle = std::max(angle,
                         max_principal_angle(dec.ker, expected, c.map->domain->metric(p)));
      }
    }
    add("rank", static_cast<double>(rank));
    add("isometry", iso);
    add("sigma_min", sigma_min);
    if (expected.cols() > 0) add("kernel_angle", angle);
    set_status(rank_ok && iso < tol && (expected.cols() == 0 || angle < c.kernel_tol));
  }

  void operator()(const SffCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    double norm = 0.0, mismatch = 0.0;
    for (const auto& p : pts) {
      MapPointData data = map_point_data(*c.map, p);
      FrameDecomposition dec = decompose(*c.map, p);
      Eigen::MatrixXd g2 = c.map->codomain->metric(data.jet.image);
      auto g2norm = [&](const Eigen::VectorXd& v) { return std::sqrt(v.dot(g2 * v)); };
      if (c.expect.empty()) {
        for (int i = 0; i < dec.rank; ++i)
          for (int k = i; k < dec.rank; ++k)
            norm = std::max(
                norm, g2norm(second_fundamental_form(data, dec.hker.col(i), dec.hker.col(k))));
      } else {
        if (dec.rank != 1)
          fail(ErrorKind::Invalid, "component expectations need a rank-1 map, rank is " +
                                       std::to_string(dec.rank));
        Eigen::VectorXd value = second_fundamental_form(data, dec.hker.col(0), dec.hker.col(0));
        Eigen::VectorXd want(value.size());
        for (int i = 0; i < want.size(); ++i) want[i] = c.expect[i].eval(data.jet.image);
        norm = std::max(norm, g2norm(value));
        mismatch = std::max(mismatch, g2norm(value - want));
      }
    }
    add("sff_norm", norm);
    if (!c.expect.empty()) add("mismatch", mismatch);
    set_status((c.expect.empty() ? norm : mismatch) < tol);
  }

  void operator()(const ShapeOperatorCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    double err = 0.0;
    for (const auto& p : pts) {
      Eigen::VectorXd image = c.map->apply(p);
      Eigen::VectorXd v(static_cast<int>(c.vector_field.size()));
      for (int i = 0; i < v.size(); ++i) v[i] = c.vector_field[i].eval(image);
      Eigen::MatrixXd a = shape_operator(*c.map, p, v);
      if (a.rows() != static_cast<int>(c.expect.size()))
        fail(ErrorKind::DimensionMismatch, "expected a " + std::to_string(c.expect.size()) +
                                               "x" + std::to_string(c.expect.size()) +
                                               " operator, rank gives " +
                                               std::to_string(a.rows()));
      for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k)
          err = std::max(err, std::abs(a(i, k) - c.expect[i][k].eval(image)));
    }
    add("entry_error", err);
    set_status(err < tol);
  }

  void operator()(const UmbilicalCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    UmbilicalGradientReport rep = umbilical_gradient_check(*c.map, c.h, pts, tol);
    add("umbilical_residual", rep.umbilical_residual);
    add("gradient_residual", rep.gradient_residual);
    add("h2_norm", rep.h2_norm);
    add("grad_norm", rep.grad_norm);
    set_status(rep.satisfied == c.expect_satisfied);
  }

  void operator()(const AntiInvarianceCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    double residual = 0.0, vert = 0.0, horiz = 0.0;
    bool anti = true, reeb_ok = true;
    for (const auto& p : pts) {
      AntiInvariantSplit split = anti_invariance_check(*c.map, *c.structure, p, tol);
      residual = std::max(residual, split.residual);
      vert = std::max(vert, split.reeb_vertical_norm);
      horiz = std::max(horiz, split.reeb_horizontal_norm);
      anti = anti && split.is_anti_invariant;
      if (c.expect_reeb && split.reeb_position != *c.expect_reeb) reeb_ok = false;
    }
    add("residual", residual);
    add("reeb_vertical", vert);
    add("reeb_horizontal", horiz);
    set_status(anti && reeb_ok);
  }

  void operator()(const HarmonicityCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    HarmonicityReport rep = harmonicity_report(*c.map, pts, tol);
    add("tension", rep.tension_norm);
    add("pushed_vertical", rep.pushed_vertical);
    add("trace_residual", rep.trace_residual);
    set_status(rep.harmonic == c.expect_harmonic);
  }

  void operator()(const FrameMatchCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    double angle = 0.0;
    for (const auto& p : pts)
      angle = std::max(angle, declared_frame_mismatch(*c.map, c.frames, p));
    add("principal_angle", angle);
    set_status(angle < tol);
  }

  void operator()(const ClairautGeodesicCheck& c) {
    auto traces = clairaut_geodesic_check(*c.map, *c.structure, c.h, c.frames, c.section,
                                          c.starts, c.length, c.step, tol);
    double drift = 0.0, umb = 0.0, grad = 0.0;
    bool conserved = true, def22 = false;
    std::vector<double> drifts, initial;
    for (const auto& t : traces) {
      drift = std::max(drift, t.drift);
      conserved = conserved && t.pass;
      drifts.push_back(t.drift);
      initial.push_back(t.invariant.empty() ? 0.0 : t.invariant.front());
      if (t.def22_checked) {
        def22 = true;
        umb = std::max(umb, t.umbilical_residual);
        grad = std::max(grad, t.gradient_residual);
      }
    }
    add("max_drift", drift);
    if (def22) {
      add("umbilical_residual", umb);
      add("gradient_residual", grad);
    }
    out.artifacts.emplace_back("drift", std::move(drifts));
    out.artifacts.emplace_back("initial_invariant", std::move(initial));
    set_status(conserved == c.expect_conserved);
  }

  void operator()(const Thm31Check& c) {
    GeodesicTrace gamma =
        integrate_geodesic(*c.map->domain, c.start, c.velocity, c.length, c.step);
    std::vector<Thm31Sample> samples = thm31_residuals(*c.map, *c.structure, gamma);
    double range = 0.0, perp = 0.0, accel = 0.0;
    int one_sided = 0;
    bool any_non_geodesic = false;
    for (const auto& s : samples) {
      range = std::max(range, s.range_residual);
      perp = std::max(perp, s.perp_residual);
      accel = std::max(accel, s.image_accel);
      bool eq_side = std::max(s.range_residual, s.perp_residual) < tol;
      bool accel_side = s.image_accel < tol;
      if (eq_side != accel_side) ++one_sided;
      if (!accel_side) any_non_geodesic = true;
    }
    add("range_residual", range);
    add("perp_residual", perp);
    add("image_accel", accel);
    add("one_sided", static_cast<double>(one_sided));
    bool pass = one_sided == 0 &&
                (c.expect_geodesic ? std::max({range, perp, accel}) < tol : any_non_geodesic);
    set_status(pass);
  }

  void operator()(const Thm32Check& c) {
    auto traces = clairaut_geodesic_check(*c.map, *c.structure, c.h, c.frames, c.section,
                                          c.starts, c.length, c.step,
                                          std::numeric_limits<double>::infinity());
    double lhs = 0.0, residual = 0.0;
    std::vector<double> per_trace;
    for (const auto& t : traces) {
      double worst = 0.0;
      for (const auto& s : thm32_residual(*c.map, *c.structure, c.h, t, c.frames, c.section)) {
        lhs = std::max(lhs, std::abs(s.lhs));
        worst = std::max(worst, s.residual);
      }
      per_trace.push_back(worst);
      residual = std::max(residual, worst);
    }
    add("max_residual", residual);
    add("max_lhs", lhs);
    out.artifacts.emplace_back("trace_residual", std::move(per_trace));
    set_status(residual < tol);
  }

  void operator()(const RangeDistributionCheck& c) {
    auto pts = resolve_points(c.points, *c.map->domain, check_seed);
    RangeDistributionReport rep =
        range_distribution_checks(*c.map, *c.structure, c.h, c.frames, pts, tol);
    add("range_dim", static_cast<double>(rep.range_dim));
    add("gradient_pairing", rep.gradient_pairing);
    add("range_mean_curvature", rep.range_mean_curvature);
    if (rep.vacuous)
      out.status = CheckStatus::Vacuous;
    else
      set_status(rep.gradient_pass && rep.minimal_pass);
  }

  void operator()(const IntegrabilityCheck& c) {
    auto pts = resolve_points(c.points, *c.manifold, check_seed);
    IntegrabilityReport rep =
        integrability_check(*c.manifold, c.frames, c.complement, pts, tol);
    add("residual", rep.residual);
    set_status(rep.integrable == c.expect_integrable);
  }
};

// ----------------------------------------------------------------------------
// Report emission
// ----------------------------------------------------------------------------

std::string fmt_real(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_escaped(std::string& out, const std::string& s) {
  out += '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  out += '"';
}

}  // namespace

// ----------------------------------------------------------------------------
// Public interface
// ----------------------------------------------------------------------------

const ChartManifold* Manifest::find_manifold(const std::string& name) const {
  for (const auto& m : manifolds)
    if (m->name() == name) return m.get();
  return nullptr;
}

const ContactStructure* Manifest::find_structure(const std::string& name) const {
  for (const auto& s : structures)
    if (s.name == name) return s.value.get();
  return nullptr;
}

const SmoothMapSpec* Manifest::find_map(const std::string& name) const {
  for (const auto& m : maps)
    if (m.name == name) return m.value.get();
  return nullptr;
}

const Manifest::FrameSet* Manifest::find_frames(const std::string& name) const {
  for (const auto& f : frames)
    if (f.name == name) return &f;
  return nullptr;
}

Manifest parse_manifest(const std::string& text, const std::string& source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, source + ": " + e.what());
  }
  if (!root.is_object()) parse_fail(source + ": manifest must be a JSON object");

  Manifest m;
  load_manifolds(root, m);
  load_structures(root, m);
  load_maps(root, m);
  load_frames(root, m);
  load_checks(root, m);
  return m;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Invalid, "cannot read manifest file \"" + path + "\"");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path);
}

const char* to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Vacuous: return "vacuous";
    case CheckStatus::Error: return "error";
  }
  return "error";
}

int Report::exit_code() const {
  int code = 0;
  for (const CheckResult& c : checks) {
    if (c.status == CheckStatus::Error) return 2;
    if (c.status == CheckStatus::Fail) code = 1;
  }
  return code;
}

Report run_checks(const Manifest& m, std::uint64_t seed, double default_tol) {
  Report report;
  report.toolkit_version = kToolkitVersion;
  report.seed = seed;
  auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < m.checks.size(); ++i) {
    const CheckSpec& spec = m.checks[i];
    CheckResult result;
    result.name = spec.name;
    result.type = spec.type;
    CheckRunner runner{Rng::derive(seed, i), spec.tol.value_or(default_tol), result};
    try {
      std::visit(runner, spec.params);
    } catch (const std::exception& e) {
      result.status = CheckStatus::Error;
      result.error = e.what();
    }
    report.checks.push_back(std::move(result));
  }
  report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

std::string emit_report_json(const Report& r) {
  int counts[4] = {0, 0, 0, 0};
  for (const CheckResult& c : r.checks) ++counts[static_cast<int>(c.status)];

  std::string out = "{\n  \"toolkit_version\": ";
  append_escaped(out, r.toolkit_version);
  out += ",\n  \"seed\": " + std::to_string(r.seed);
  out += ",\n  \"summary\": {\"pass\": " + std::to_string(counts[0]) +
         ", \"fail\": " + std::to_string(counts[1]) +
         ", \"vacuous\": " + std::to_string(counts[2]) +
         ", \"error\": " + std::to_string(counts[3]) + "}";
  out += ",\n  \"checks\": [";
  for (std::size_t i = 0; i < r.checks.size(); ++i) {
    const CheckResult& c = r.checks[i];
    out += i ? ",\n    {" : "\n    {";
    out += "\"name\": ";
    append_escaped(out, c.name);
    out += ", \"type\": ";
    append_escaped(out, c.type);
    out += ", \"status\": ";
    append_escaped(out, to_string(c.status));
    out += ", \"residuals\": {";
    for (std::size_t k = 0; k < c.residuals.size(); ++k) {
      if (k) out += ", ";
      append_escaped(out, c.residuals[k].first);
      out += ": " + fmt_real(c.residuals[k].second);
    }
    out += "}";
    if (!c.artifacts.empty()) {
      out += ", \"artifacts\": {";
      for (std::size_t k = 0; k < c.artifacts.size(); ++k) {
        if (k) out += ", ";
        append_escaped(out, c.artifacts[k].first);
        out += ": [";
        for (std::size_t v = 0; v < c.artifacts[k].second.size(); ++v) {
          if (v) out += ", ";
          out += fmt_real(c.artifacts[k].second[v]);
        }
        out += "]";
      }
      out += "}";
    }
    if (c.status == CheckStatus::Error) {
      out += ", \"error\": ";
      append_escaped(out, c.error);
    }
    out += "}";
  }
  out += r.checks.empty() ? "]\n}\n" : "\n  ]\n}\n";
  return out;
}

std::string emit_report_text(const Report& r) {
  int counts[4] = {0, 0, 0, 0};
  for (const CheckResult& c : r.checks) ++counts[static_cast<int>(c.status)];

  char line[256];
  std::snprintf(line, sizeof line, "rmap %s  seed %llu  elapsed %.3f s\n\n",
                r.toolkit_version.c_str(), static_cast<unsigned long long>(r.seed),
                r.elapsed_seconds);
  std::string out = line;
  std::snprintf(line, sizeof line, "%-28s  %-20s  %-8s  %s\n", "name", "type", "status",
                "worst residual");
  out += line;
  out += std::string(76, '-') + "\n";
  for (const CheckResult& c : r.checks) {
    double worst = 0.0;
    for (const auto& [label, value] : c.residuals) worst = std::max(worst, std::abs(value));
    char worst_buf[32];
    if (c.residuals.empty())
      std::snprintf(worst_buf, sizeof worst_buf, "-");
    else
      std::snprintf(worst_buf, sizeof worst_buf, "%.3g", worst);
    std::snprintf(line, sizeof line, "%-28s  %-20s  %-8s  %s\n", c.name.c_str(), c.type.c_str(),
                  to_string(c.status), c.status == CheckStatus::Error ? c.error.c_str() : worst_buf);
    out += line;
  }
  std::snprintf(line, sizeof line, "\n%zu checks: %d pass, %d fail, %d vacuous, %d error\n",
                r.checks.size(), counts[0], counts[1], counts[2], counts[3]);
  out += line;
  return out;
}

std::string geodesic_csv(const Manifest& m, const std::string& map_name,
                         const Eigen::VectorXd& start, const Eigen::VectorXd& velocity,
                         double length, double step) {
  const SmoothMapSpec* map = m.find_map(map_name);
  if (!map)
    fail(ErrorKind::UnresolvedReference, "manifest has no map \"" + map_name + "\"");

  // The angle and invariant columns need the declared frames, structure and h
  // from a check bound to this map.
  const ContactStructure* structure = nullptr;
  const CodomainFrames* frames = nullptr;
  const std::optional<expr::ScalarField>* h = nullptr;
  for (const CheckSpec& spec : m.checks) {
    if (const auto* c = std::get_if<ClairautGeodesicCheck>(&spec.params); c && c->map == map) {
      structure = c->structure;
      frames = &c->frames;
      h = &c->h;
      break;
    }
    if (const auto* c = std::get_if<Thm32Check>(&spec.params); c && c->map == map) {
      structure = c->structure;
      frames = &c->frames;
      h = &c->h;
      break;
    }
  }
  if (!structure)
    fail(ErrorKind::Invalid,
         "no check in the manifest binds codomain frames for map \"" + map_name + "\"");

  std::vector<ClairautStart> starts(1);
  starts[0].point = start;
  starts[0].velocity = velocity;
  auto traces = clairaut_geodesic_check(*map, *structure, *h, *frames, std::nullopt, starts,
                                        length, step, std::numeric_limits<double>::infinity());
  const ClairautGeodesicTrace& trace = traces.front();

  int n = map->codomain->dim();
  std::string out = "s";
  for (int i = 1; i <= n; ++i) out += ",x" + std::to_string(i);
  for (int i = 1; i <= n; ++i) out += ",v" + std::to_string(i);
  out += ",theta,invariant\n";
  for (std::size_t k = 0; k < trace.base.samples.size(); ++k) {
    const GeodesicSample& s = trace.base.samples[k];
    out += fmt_real(s.s);
    for (int i = 0; i < n; ++i) out += "," + fmt_real(s.point[i]);
    for (int i = 0; i < n; ++i) out += "," + fmt_real(s.velocity[i]);
    out += "," + fmt_real(trace.theta[k]) + "," + fmt_real(trace.invariant[k]) + "\n";
  }
  return out;
}

}  // namespace rmap
