#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <yaml-cpp/yaml.h>

#include <nlohmann/json.hpp>
#include "rplab/rplab.hpp"

namespace rplab {

/// Invalid scenario configuration; the message carries the line number.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class ScenarioKind { rp_exact, rp_mc, casimir_scan, torque_scan, dipole };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::rp_exact: return "rp-exact";
    case ScenarioKind::rp_mc: return "rp-mc";
    case ScenarioKind::casimir_scan: return "casimir-scan";
    case ScenarioKind::torque_scan: return "torque-scan";
    case ScenarioKind::dipole: return "dipole";
  }
  return "?";
}

inline std::optional<ScenarioKind> scenario_from_string(const std::string& s) {
  for (auto k : {ScenarioKind::rp_exact, ScenarioKind::rp_mc, ScenarioKind::casimir_scan, ScenarioKind::torque_scan,
                 ScenarioKind::dipole})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

enum class Theory { scalar, gauge };

struct GeometryConfig {
  std::vector<int> extents;
  std::vector<Boundary> boundary;
  int reflection_dim = 0;
  int reflection_plane = 0;

  LatticeGeometry build() const { return build_geometry(extents, boundary, reflection_dim, reflection_plane); }
};

struct ModelConfig {
  Theory theory = Theory::gauge;
  std::string group = "Z2";  ///< "U1" or "Z<N>"
  double inverse_coupling = 1.0;
  double c2 = 0.5;
  double c4 = 0.0;
  int levels = 3;
  /// Scalar Monte Carlo: sample the discretized (quadrature) measure instead
  /// of the continuum one, so results compare with exact enumeration.
  bool discrete_measure = false;

  bool is_u1() const { return group == "U1"; }
  int zn_order() const { return std::stoi(group.substr(1)); }
};

struct FunctionalConfig {
  int count = 100;
  int schwarz_pairs = 100;
  RandomPolynomialParams poly;
  bool compare_exact = false;  ///< rp-mc: also enumerate and compare
};

struct ProbeConfig {
  ProbeSpec spec;
  Coord anchor{};
  std::optional<double> conductor_alpha;  ///< U(1) stand-in for a conductor
  std::optional<std::pair<int, int>> slab;  ///< normal direction, thickness
};

enum class RotationSet { identity, plane, spatial };

struct ScanConfig {
  std::vector<int> separations;
  EvalMode mode = EvalMode::exact;
  SelfEnergy self_energy = SelfEnergy::automatic;
  bool translation_average = false;
  RotationSet rotations = RotationSet::plane;
  std::array<int, 2> rotation_plane{1, 2};
};

struct DipoleConfig {
  int count = 10000;
  double min_distance = 0.5;
  double max_distance = 5.0;
  int orientations = 13;
  double table_distance = 1.0;
  double fd_step = 1e-4;
};

struct OutputConfig {
  std::string dir = "out";
  std::string format = "csv";
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::rp_exact;
  std::optional<std::uint64_t> seed;
  GeometryConfig geometry;
  ModelConfig model;
  EnumerationOptions enumeration;
  FunctionalConfig functionals;
  ProbeConfig probe;
  ScanConfig scan;
  McParams mc;
  DipoleConfig dipole;
  OutputConfig output;

  bool uses_mc() const {
    return scenario == ScenarioKind::rp_mc ||
           ((scenario == ScenarioKind::casimir_scan || scenario == ScenarioKind::torque_scan) &&
            scan.mode == EvalMode::mc);
  }
};

// --- YAML reading -------------------------------------------------------------

namespace detail {

inline std::string at_line(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? "line " + std::to_string(m.line + 1) + ": " : "";
}

/// A mapping whose keys are consumed one by one; leftovers are rejected.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) throw ConfigError(at_line(node_) + path_ + " must be a mapping");
  }

  bool has(const std::string& key) const { return static_cast<bool>(lookup(key)); }

  YAML::Node raw(const std::string& key) {
    seen_.insert(key);
    return lookup(key);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    YAML::Node n = raw(key);
    if (!n) return std::nullopt;
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError(at_line(n) + name(key) + " has the wrong type");
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    auto v = opt<T>(key);
    return v ? *v : fallback;
  }

  Section child(const std::string& key) { return Section(raw(key), name(key)); }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  /// Line-anchored error about `key` (or the section itself).
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    YAML::Node n = has(key) ? lookup(key) : node_;
    throw ConfigError((n ? at_line(n) : std::string()) + name(key) + ": " + msg);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!seen_.count(k)) throw ConfigError(at_line(kv.first) + "unknown key '" + name(k) + "'");
    }
  }

 private:
  // const access never inserts; a missing key yields an invalid node
  YAML::Node lookup(const std::string& key) const {
    if (!node_ || !node_.IsMap()) return YAML::Node(YAML::NodeType::Undefined);
    const YAML::Node& n = node_;
    return n[key];
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

inline Coord read_coord(Section& s, const std::string& key, int d) {
  Coord c{};
  auto v = s.opt<std::vector<int>>(key);
  if (!v) return c;
  if (static_cast<int>(v->size()) != d) s.fail(key, "needs " + std::to_string(d) + " coordinates");
  for (int i = 0; i < d; ++i) c[i] = (*v)[i];
  return c;
}

inline void read_shape(Section& p, ProbeConfig& probe, int d) {
  ProbeSpec& spec = probe.spec;
  int sources = 0;
  if (p.has("links") || p.has("plaquettes")) ++sources;
  if (p.has("slab")) ++sources;
  if (p.has("box")) ++sources;
  if (sources > 1) p.fail("links", "give exactly one of links/plaquettes, slab or box");

  if (auto links = p.opt<std::vector<std::vector<int>>>("links")) {
    for (const auto& l : *links) {
      if (static_cast<int>(l.size()) != d + 1) p.fail("links", "each entry is d coordinates followed by a direction");
      ShapeElement el;
      for (int i = 0; i < d; ++i) el.offset[i] = l[i];
      el.mu = l[d];
      if (el.mu < 1 || el.mu >= d) p.fail("links", "link direction must be spatial (1.." + std::to_string(d - 1) + ")");
      spec.shape.elements.push_back(el);
    }
  }
  if (auto plaqs = p.opt<std::vector<std::vector<int>>>("plaquettes")) {
    for (const auto& l : *plaqs) {
      if (static_cast<int>(l.size()) != d + 2)
        p.fail("plaquettes", "each entry is d coordinates followed by two directions");
      ShapeElement el;
      for (int i = 0; i < d; ++i) el.offset[i] = l[i];
      el.mu = std::min(l[d], l[d + 1]);
      el.nu = std::max(l[d], l[d + 1]);
      if (el.mu < 1 || el.nu >= d || el.mu == el.nu) p.fail("plaquettes", "plaquette directions must be two distinct spatial axes");
      spec.shape.elements.push_back(el);
    }
  }
  if (auto pivot = p.opt<std::vector<double>>("pivot")) {
    if (static_cast<int>(pivot->size()) != d) p.fail("pivot", "needs " + std::to_string(d) + " coordinates");
    for (int i = 0; i < d; ++i) {
      const double twice = 2.0 * (*pivot)[i];
      if (twice != std::round(twice)) p.fail("pivot", "coordinates must be integers or half-integers");
      spec.shape.pivot2[i] = static_cast<int>(std::lround(twice));
    }
  }
  if (p.has("slab")) {
    Section slab = p.child("slab");
    const int normal = slab.get<int>("normal", 1);
    const int thickness = slab.get<int>("thickness", 1);
    slab.finish();
    if (normal < 1 || normal >= d) p.fail("slab", "normal must be a spatial direction");
    if (thickness < 1) p.fail("slab", "thickness must be at least 1");
    probe.slab = std::make_pair(normal, thickness);  // needs the geometry
  }
  if (p.has("box")) {
    Section box = p.child("box");
    const Coord lo = read_coord(box, "lo", d);
    const Coord hi = read_coord(box, "hi", d);
    const bool with_plaquettes = box.get<bool>("plaquettes", false);
    box.finish();
    for (int mu = 1; mu < d; ++mu)
      if (hi[mu] < lo[mu]) p.fail("box", "hi must not be below lo");
    const Coord pivot = spec.shape.pivot2;
    spec.shape = box_shape(d, lo, hi, with_plaquettes);
    if (p.has("pivot")) spec.shape.pivot2 = pivot;
  }
}

inline void check_budget(const ScenarioConfig& c, const LatticeGeometry& geom) {
  const bool exact_gauge = c.model.theory == Theory::gauge &&
                           (c.scenario == ScenarioKind::rp_exact ||
                            (c.scenario == ScenarioKind::rp_mc && c.functionals.compare_exact) ||
                            ((c.scenario == ScenarioKind::casimir_scan || c.scenario == ScenarioKind::torque_scan) &&
                             c.scan.mode == EvalMode::exact));
  const bool exact_scalar = c.model.theory == Theory::scalar &&
                            (c.scenario == ScenarioKind::rp_exact ||
                             (c.scenario == ScenarioKind::rp_mc && c.functionals.compare_exact));
  if (exact_gauge) {
    if (c.model.is_u1()) throw ConfigError("exact evaluation needs a Z_N group; U(1) is Monte Carlo only");
    const auto fixed = fixed_links(geom, c.enumeration.reduction);
    int free = 0;
    for (bool f : fixed) free += f ? 0 : 1;
    try {
      checked_config_count(static_cast<std::uint64_t>(c.model.zn_order()), free, c.enumeration.budget, "configuration");
    } catch (const BudgetError& e) {
      throw ConfigError(e.what());
    }
  }
  if (exact_scalar) {
    try {
      checked_config_count(static_cast<std::uint64_t>(c.model.levels), geom.num_sites(), c.enumeration.budget,
                           "configuration");
    } catch (const BudgetError& e) {
      throw ConfigError(e.what());
    }
  }
}

}  // namespace detail

/// Parses and validates a YAML scenario. `forced` (the CLI subcommand), if
/// given, must agree with a `scenario:` key when one is present.
/// `seed_override` (--seed) replaces any seed in the file.
inline ScenarioConfig parse_config(const std::string& text, std::optional<ScenarioKind> forced = std::nullopt,
                                   std::optional<std::uint64_t> seed_override = std::nullopt) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  detail::Section top(root, "");
  ScenarioConfig c;

  if (auto s = top.opt<std::string>("scenario")) {
    auto k = scenario_from_string(*s);
    if (!k) top.fail("scenario", "unknown scenario '" + *s + "'");
    if (forced && *forced != *k) top.fail("scenario", "config is for '" + *s + "' but the command is '" + to_string(*forced) + "'");
    c.scenario = *k;
  } else if (forced) {
    c.scenario = *forced;
  } else {
    throw ConfigError("no scenario given");
  }
  c.seed = top.opt<std::uint64_t>("seed");

  // geometry
  const bool needs_lattice = c.scenario != ScenarioKind::dipole;
  {
    detail::Section g = top.child("geometry");
    c.geometry.extents = g.get<std::vector<int>>("extents", {});
    const int d = static_cast<int>(c.geometry.extents.size());
    if (needs_lattice && d == 0) g.fail("extents", "geometry.extents is required");
    std::vector<std::string> b = g.get<std::vector<std::string>>("boundary", std::vector<std::string>(d, "periodic"));
    if (static_cast<int>(b.size()) != d) g.fail("boundary", "needs one entry per extent");
    for (const auto& s : b) {
      if (s == "periodic") c.geometry.boundary.push_back(Boundary::periodic);
      else if (s == "open") c.geometry.boundary.push_back(Boundary::open);
      else g.fail("boundary", "entries are 'periodic' or 'open'");
    }
    c.geometry.reflection_dim = g.get<int>("reflection_dim", d - 1);
    int default_plane = 0;
    if (d > 0 && c.geometry.reflection_dim >= 0 && c.geometry.reflection_dim < d &&
        c.geometry.boundary[c.geometry.reflection_dim] == Boundary::open)
      default_plane = (c.geometry.extents[c.geometry.reflection_dim] - 1) / 2;
    c.geometry.reflection_plane = g.get<int>("reflection_plane", default_plane);
    g.finish();
    if (needs_lattice) {
      try {
        c.geometry.build();
      } catch (const GeometryError& e) {
        g.fail("extents", e.what());
      }
      if ((c.scenario == ScenarioKind::casimir_scan || c.scenario == ScenarioKind::torque_scan) &&
          c.geometry.reflection_dim == 0)
        g.fail("reflection_dim", "static probes fill all of Euclidean time; the mirror must be spatial");
    }
  }

  // model
  {
    detail::Section m = top.child("model");
    const std::string theory = m.get<std::string>("theory", "gauge");
    if (theory == "gauge") c.model.theory = Theory::gauge;
    else if (theory == "scalar") c.model.theory = Theory::scalar;
    else m.fail("theory", "theory is 'scalar' or 'gauge'");
    c.model.group = m.get<std::string>("group", "Z2");
    if (c.model.group != "U1") {
      bool ok = c.model.group.size() >= 2 && c.model.group[0] == 'Z';
      for (std::size_t i = 1; ok && i < c.model.group.size(); ++i) ok = std::isdigit(static_cast<unsigned char>(c.model.group[i]));
      if (!ok || c.model.zn_order() < 2) m.fail("group", "group is 'U1' or 'Z<N>' with N >= 2");
    }
    c.model.inverse_coupling = m.get<double>("inverse_coupling", 1.0);
    if (!std::isfinite(c.model.inverse_coupling) || c.model.inverse_coupling < 0.0)
      m.fail("inverse_coupling", "must be finite and non-negative");
    c.model.c2 = m.get<double>("c2", 0.5);
    c.model.c4 = m.get<double>("c4", 0.0);
    c.model.levels = m.get<int>("levels", 3);
    c.model.discrete_measure = m.get<bool>("discrete_measure", false);
    m.finish();
    if (c.model.theory == Theory::scalar) {
      try {
        ScalarModel{c.model.c2, c.model.c4}.validate();
      } catch (const ModelError& e) {
        m.fail("c2", e.what());
      }
      if (c.model.levels < 2) m.fail("levels", "needs at least two quadrature levels");
      if (c.scenario == ScenarioKind::casimir_scan || c.scenario == ScenarioKind::torque_scan)
        m.fail("theory", "probe scans need the gauge theory");
    }
  }

  // enumeration
  {
    detail::Section e = top.child("enumeration");
    c.enumeration.budget = e.get<std::uint64_t>("budget", kEnumerationBudget);
    const std::string red = e.get<std::string>("reduction", "none");
    if (red == "none") c.enumeration.reduction = SymmetryReduction::none;
    else if (red == "gauge") c.enumeration.reduction = SymmetryReduction::gauge;
    else if (red == "gauge_and_center") c.enumeration.reduction = SymmetryReduction::gauge_and_center;
    else e.fail("reduction", "reduction is none, gauge or gauge_and_center");
    c.enumeration.workers = e.get<int>("workers", 0);
    e.finish();
    if ((c.scenario == ScenarioKind::rp_exact || c.scenario == ScenarioKind::rp_mc) &&
        c.enumeration.reduction != SymmetryReduction::none)
      e.fail("reduction", "random functionals are not gauge invariant; use reduction: none");
  }

  // functionals
  {
    detail::Section f = top.child("functionals");
    c.functionals.count = f.get<int>("count", c.scenario == ScenarioKind::rp_mc ? 10 : 100);
    c.functionals.schwarz_pairs = f.get<int>("schwarz_pairs", c.scenario == ScenarioKind::rp_mc ? 10 : 100);
    c.functionals.poly.max_terms = f.get<int>("max_terms", 4);
    c.functionals.poly.max_factors = f.get<int>("max_factors", 3);
    c.functionals.poly.max_power = f.get<int>("max_power", 2);
    c.functionals.compare_exact = f.get<bool>("compare_exact", false);
    f.finish();
    if (c.functionals.count < 0 || c.functionals.schwarz_pairs < 0) f.fail("count", "counts must be non-negative");
    if (c.functionals.poly.max_terms < 1 || c.functionals.poly.max_factors < 1 || c.functionals.poly.max_power < 1)
      f.fail("max_terms", "polynomial limits must be positive");
  }

  // probe
  {
    detail::Section p = top.child("probe");
    const int d = static_cast<int>(c.geometry.extents.size());
    const std::string kind = p.get<std::string>("kind", "charge");
    if (kind == "charge") c.probe.spec.kind = ProbeKind::charge;
    else if (kind == "dielectric") c.probe.spec.kind = ProbeKind::dielectric;
    else if (kind == "conductor") c.probe.spec.kind = ProbeKind::conductor;
    else p.fail("kind", "kind is charge, dielectric or conductor");
    c.probe.spec.charge = p.get<int>("charge", 1);
    const auto alpha = p.opt<double>("alpha");
    const auto eps = p.opt<double>("epsilon");
    if (alpha && eps) p.fail("alpha", "give alpha or epsilon, not both");
    c.probe.spec.alpha = alpha ? *alpha : eps ? (1.0 - *eps) * c.model.inverse_coupling : 0.25;
    c.probe.conductor_alpha = p.opt<double>("conductor_alpha");
    c.probe.anchor = detail::read_coord(p, "anchor", d);
    detail::read_shape(p, c.probe, d);
    p.finish();
    const bool scan = c.scenario == ScenarioKind::casimir_scan || c.scenario == ScenarioKind::torque_scan;
    if (scan && c.probe.slab) {
      try {
        c.probe.spec.shape = slab_shape(c.geometry.build(), c.probe.slab->first, c.probe.slab->second);
      } catch (const Error& e) {
        throw ConfigError(std::string("probe.slab: ") + e.what());
      }
    }
    if (scan && c.probe.spec.kind != ProbeKind::charge && c.probe.spec.shape.elements.empty())
      throw ConfigError("probe: a body needs links, plaquettes, a slab or a box");
  }

  // scan
  {
    detail::Section s = top.child("scan");
    c.scan.separations = s.get<std::vector<int>>("separations", {});
    const std::string mode = s.get<std::string>("mode", "exact");
    if (mode == "exact") c.scan.mode = EvalMode::exact;
    else if (mode == "mc") c.scan.mode = EvalMode::mc;
    else s.fail("mode", "mode is exact or mc");
    const std::string se = s.get<std::string>("self_energy", "auto");
    if (se == "auto") c.scan.self_energy = SelfEnergy::automatic;
    else if (se == "subtract") c.scan.self_energy = SelfEnergy::subtract;
    else if (se == "none") c.scan.self_energy = SelfEnergy::none;
    else s.fail("self_energy", "self_energy is auto, subtract or none");
    c.scan.translation_average = s.get<bool>("translation_average", false);
    const std::string rot = s.get<std::string>("rotations", "plane");
    if (rot == "identity") c.scan.rotations = RotationSet::identity;
    else if (rot == "plane") c.scan.rotations = RotationSet::plane;
    else if (rot == "spatial") c.scan.rotations = RotationSet::spatial;
    else s.fail("rotations", "rotations is identity, plane or spatial");
    if (auto rp = s.opt<std::vector<int>>("rotation_plane")) {
      if (rp->size() != 2) s.fail("rotation_plane", "needs two axes");
      c.scan.rotation_plane = {(*rp)[0], (*rp)[1]};
    }
    s.finish();
    const int d = static_cast<int>(c.geometry.extents.size());
    if (c.scenario == ScenarioKind::casimir_scan) {
      if (c.scan.separations.empty()) s.fail("separations", "casimir-scan needs scan.separations");
      for (std::size_t i = 1; i < c.scan.separations.size(); ++i)
        if (c.scan.separations[i] <= c.scan.separations[i - 1]) s.fail("separations", "must be strictly increasing");
    }
    if (c.scenario == ScenarioKind::torque_scan && c.scan.rotations == RotationSet::plane) {
      const auto [a, b] = c.scan.rotation_plane;
      if (a < 1 || b < 1 || a >= d || b >= d || a == b) s.fail("rotation_plane", "needs two distinct spatial axes");
    }
    if (c.scan.translation_average && c.geometry.boundary.size() > 0 &&
        c.geometry.boundary[c.geometry.reflection_dim] != Boundary::periodic)
      s.fail("translation_average", "needs a periodic reflection direction");
  }

  // mc
  {
    detail::Section m = top.child("mc");
    if (auto seed = m.opt<std::uint64_t>("seed")) c.seed = *seed;
    c.mc.therm_sweeps = m.get<int>("therm_sweeps", 200);
    c.mc.measure_sweeps = m.get<int>("measure_sweeps", 10000);
    c.mc.n_blocks = m.get<int>("n_blocks", 20);
    c.mc.proposal_width = m.get<double>("proposal_width", 1.0);
    c.mc.chains = m.get<int>("chains", 1);
    c.mc.overlap_threshold = m.get<double>("overlap_threshold", 0.5);
    c.mc.workers = m.get<int>("workers", 0);
    m.finish();
    try {
      c.mc.validate();
    } catch (const Error& e) {
      m.fail("measure_sweeps", e.what());
    }
  }

  // dipole
  {
    detail::Section dp = top.child("dipole");
    c.dipole.count = dp.get<int>("count", 10000);
    c.dipole.min_distance = dp.get<double>("min_distance", 0.5);
    c.dipole.max_distance = dp.get<double>("max_distance", 5.0);
    c.dipole.orientations = dp.get<int>("orientations", 13);
    c.dipole.table_distance = dp.get<double>("table_distance", 1.0);
    c.dipole.fd_step = dp.get<double>("fd_step", 1e-4);
    dp.finish();
    if (c.dipole.count < 1) dp.fail("count", "must be positive");
    if (!(c.dipole.min_distance > 0.0) || c.dipole.max_distance < c.dipole.min_distance)
      dp.fail("min_distance", "need 0 < min_distance <= max_distance");
    if (c.dipole.orientations < 2) dp.fail("orientations", "need at least two orientations");
    if (!(c.dipole.table_distance > 0.0)) dp.fail("table_distance", "must be positive");
    if (!(c.dipole.fd_step > 0.0 && c.dipole.fd_step < 0.5)) dp.fail("fd_step", "must lie in (0, 0.5)");
  }

  // output
  {
    detail::Section o = top.child("output");
    c.output.dir = o.get<std::string>("dir", "out");
    c.output.format = o.get<std::string>("format", "csv");
    o.finish();
    if (c.output.format != "csv" && c.output.format != "json") o.fail("format", "format is csv or json");
  }
  top.finish();

  if (seed_override) c.seed = seed_override;
  if (c.uses_mc() && !c.seed) throw ConfigError("Monte Carlo scenarios need an explicit seed (seed: or --seed)");
  if (needs_lattice) detail::check_budget(c, c.geometry.build());
  return c;
}

inline ScenarioConfig load_config(const std::string& path, std::optional<ScenarioKind> forced = std::nullopt,
                                  std::optional<std::uint64_t> seed_override = std::nullopt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), forced, seed_override);
}

// --- reports ----------------------------------------------------------------------

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal form; identical bytes for identical values.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  json to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows) {
      json obj;
      for (std::size_t i = 0; i < columns.size(); ++i) obj[columns[i]] = r[i];
      rows_json.push_back(obj);
    }
    return rows_json;
  }

  std::string to_csv() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }
};

struct RunReport {
  json report;
  std::vector<Table> tables;
  std::vector<Verdict> verdicts;
  double wall_clock_seconds = 0.0;

  int fails() const {
    int n = 0;
    for (const auto& v : verdicts) n += v.status == Status::fail ? 1 : 0;
    return n;
  }

  /// 0 unless a verdict fails; inconclusive verdicts do not fail a run.
  int exit_code() const { return fails() > 0 ? 1 : 0; }
};

inline json number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

inline json to_json(const Verdict& v) {
  json j;
  j["check"] = v.check;
  j["status"] = to_string(v.status);
  j["mode"] = v.exact ? "exact" : "mc";
  j["margin"] = number(v.margin);
  if (!v.exact) j["z_score"] = number(v.z_score);
  if (!v.details.empty()) j["details"] = v.details;
  return j;
}

inline json to_json(const Estimate& e) {
  json j;
  j["re"] = number(e.mean.real());
  j["im"] = number(e.mean.imag());
  j["std_error"] = number(e.std_error);
  j["n_samples"] = e.n_samples;
  j["n_blocks"] = e.n_blocks;
  if (e.flagged) j["flag"] = e.flag_reason;
  return j;
}

inline json to_json(const ScenarioConfig& c) {
  json j;
  j["scenario"] = to_string(c.scenario);
  if (c.seed) j["seed"] = *c.seed;
  if (c.scenario != ScenarioKind::dipole) {
    json g;
    g["extents"] = c.geometry.extents;
    json b = json::array();
    for (auto x : c.geometry.boundary) b.push_back(x == Boundary::periodic ? "periodic" : "open");
    g["boundary"] = b;
    g["reflection_dim"] = c.geometry.reflection_dim;
    g["reflection_plane"] = c.geometry.reflection_plane;
    j["geometry"] = g;
    json m;
    m["theory"] = c.model.theory == Theory::gauge ? "gauge" : "scalar";
    if (c.model.theory == Theory::gauge) {
      m["group"] = c.model.group;
      m["inverse_coupling"] = c.model.inverse_coupling;
    } else {
      m["c2"] = c.model.c2;
      m["c4"] = c.model.c4;
      m["levels"] = c.model.levels;
      m["discrete_measure"] = c.model.discrete_measure;
    }
    j["model"] = m;
    json e;
    e["budget"] = c.enumeration.budget;
    const char* red[] = {"none", "gauge", "gauge_and_center"};
    e["reduction"] = red[static_cast<int>(c.enumeration.reduction)];
    j["enumeration"] = e;
  }
  if (c.scenario == ScenarioKind::rp_exact || c.scenario == ScenarioKind::rp_mc) {
    json f;
    f["count"] = c.functionals.count;
    f["schwarz_pairs"] = c.functionals.schwarz_pairs;
    f["max_terms"] = c.functionals.poly.max_terms;
    f["max_factors"] = c.functionals.poly.max_factors;
    f["max_power"] = c.functionals.poly.max_power;
    f["compare_exact"] = c.functionals.compare_exact;
    j["functionals"] = f;
  }
  if (c.scenario == ScenarioKind::casimir_scan || c.scenario == ScenarioKind::torque_scan) {
    json p;
    const char* kinds[] = {"charge", "dielectric", "conductor"};
    p["kind"] = kinds[static_cast<int>(c.probe.spec.kind)];
    if (c.probe.spec.kind == ProbeKind::charge) p["charge"] = c.probe.spec.charge;
    if (c.probe.spec.kind == ProbeKind::dielectric) p["alpha"] = c.probe.spec.alpha;
    json els = json::array();
    for (const auto& el : c.probe.spec.shape.elements) {
      json x = json::array();
      for (int i = 0; i < static_cast<int>(c.geometry.extents.size()); ++i) x.push_back(el.offset[i]);
      x.push_back(el.mu);
      if (el.nu >= 0) x.push_back(el.nu);
      els.push_back(x);
    }
    if (!els.empty()) p["elements"] = els;
    p["anchor"] = std::vector<int>(c.probe.anchor.begin(), c.probe.anchor.begin() + c.geometry.extents.size());
    if (c.probe.conductor_alpha) p["conductor_alpha"] = *c.probe.conductor_alpha;
    j["probe"] = p;
    json s;
    s["mode"] = c.scan.mode == EvalMode::exact ? "exact" : "mc";
    if (c.scenario == ScenarioKind::casimir_scan) s["separations"] = c.scan.separations;
    const char* se[] = {"auto", "subtract", "none"};
    s["self_energy"] = se[static_cast<int>(c.scan.self_energy)];
    s["translation_average"] = c.scan.translation_average;
    if (c.scenario == ScenarioKind::torque_scan) {
      const char* rs[] = {"identity", "plane", "spatial"};
      s["rotations"] = rs[static_cast<int>(c.scan.rotations)];
      s["rotation_plane"] = c.scan.rotation_plane;
    }
    j["scan"] = s;
  }
  if (c.uses_mc()) {
    json m;
    m["therm_sweeps"] = c.mc.therm_sweeps;
    m["measure_sweeps"] = c.mc.measure_sweeps;
    m["n_blocks"] = c.mc.n_blocks;
    m["proposal_width"] = c.mc.proposal_width;
    m["chains"] = c.mc.chains;
    m["overlap_threshold"] = c.mc.overlap_threshold;
    j["mc"] = m;
  }
  if (c.scenario == ScenarioKind::dipole) {
    json d;
    d["count"] = c.dipole.count;
    d["min_distance"] = c.dipole.min_distance;
    d["max_distance"] = c.dipole.max_distance;
    d["orientations"] = c.dipole.orientations;
    d["table_distance"] = c.dipole.table_distance;
    d["fd_step"] = c.dipole.fd_step;
    j["dipole"] = d;
  }
  j["output"] = {{"format", c.output.format}};  // the directory is not part of the result
  return j;
}

// --- pipelines ----------------------------------------------------------------------

namespace detail {

inline std::uint64_t functional_seed(const ScenarioConfig& c) { return derive_seed(c.seed.value_or(1), 0x5eed); }

inline McParams mc_params(const ScenarioConfig& c) {
  McParams p = c.mc;
  p.seed = c.seed.value_or(0);
  return p;
}

/// Relative agreement check: pass iff |a - b| <= tol * max(|a|, |b|, floor).
inline Verdict agreement(std::string check, cplx a, cplx b, double tol, std::string details, double floor = 1e-300) {
  Verdict v;
  v.check = std::move(check);
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  const double rel = std::abs(a - b) / scale;
  v.margin = tol - rel;
  v.status = rel <= tol ? Status::pass : Status::fail;
  v.details = std::move(details);
  return v;
}

/// MC estimate within k sigma of an exact value.
inline Verdict mc_agreement(std::string check, const Estimate& mc, cplx exact, std::string details) {
  Verdict v;
  v.check = std::move(check);
  v.exact = false;
  const double dev = std::abs(mc.mean - exact);
  v.margin = kSigmaLevel * mc.std_error - dev;
  v.z_score = mc.std_error > 0.0 ? dev / mc.std_error : (dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  v.status = mc.flagged ? Status::inconclusive : (dev <= kSigmaLevel * mc.std_error ? Status::pass : Status::fail);
  v.details = std::move(details);
  return v;
}

inline Table correlator_table(const std::vector<Estimate>& values, const std::string& name = "correlators") {
  Table t{name, {"index", "re", "im", "std_error", "n_samples"}, {}};
  for (std::size_t i = 0; i < values.size(); ++i)
    t.rows.push_back({std::to_string(i), format_number(values[i].mean.real()), format_number(values[i].mean.imag()),
                      format_number(values[i].std_error), std::to_string(values[i].n_samples)});
  return t;
}

inline void run_rp_scalar(const ScenarioConfig& c, const LatticeGeometry& geom, RunReport& out) {
  Rng rng(functional_seed(c));
  const ScalarModel model{c.model.c2, c.model.c4};
  const int n = c.functionals.count, np = c.functionals.schwarz_pairs;
  std::vector<ScalarFunctional> fs;
  for (int i = 0; i < n + 2 * np; ++i) fs.push_back(random_scalar_functional(geom, Region::plus, rng, c.functionals.poly));

  // factors: f_i then Theta f_i; products: <f_i Theta f_i> for all i, then
  // the cross terms <f_a Theta f_b> of every Schwarz pair
  std::vector<ScalarFunctional> factors = fs;
  for (const auto& f : fs) factors.push_back(theta_functional(geom, f));
  const int m = static_cast<int>(fs.size());
  std::vector<std::vector<int>> products;
  for (int i = 0; i < m; ++i) products.push_back({i, m + i});
  for (int k = 0; k < np; ++k) products.push_back({n + 2 * k, m + n + 2 * k + 1});

  const bool exact = c.scenario == ScenarioKind::rp_exact;
  const QuadratureMeasure q = gauss_quadrature(model, c.model.levels);
  std::vector<Estimate> values;
  std::vector<cplx> exact_values;
  if (exact || c.functionals.compare_exact)
    exact_values = exact_scalar_expectations(q, geom, factors, products, c.enumeration.budget);
  if (exact) {
    for (const auto& v : exact_values) values.push_back(Estimate::exact_value(v));
  } else {
    const McParams p = mc_params(c);
    values = c.model.discrete_measure ? scalar_mc_expectations(q, geom, factors, products, p)
                                      : scalar_mc_expectations(model, geom, factors, products, p);
  }

  for (int i = 0; i < n; ++i) out.verdicts.push_back(check_rp(values[i], "f" + std::to_string(i)));
  if (exact)
    for (int i = 0; i < n; ++i) {
      const double rhs = factorization_rhs(q, geom, fs[i], c.enumeration.budget);
      out.verdicts.push_back(agreement("factorization", values[i].mean, rhs, 1e-12, "f" + std::to_string(i)));
    }
  for (int k = 0; k < np; ++k)
    out.verdicts.push_back(check_schwarz(values[m + k], values[n + 2 * k], values[n + 2 * k + 1],
                                         "pair" + std::to_string(k)));
  if (!exact && c.functionals.compare_exact) {
    if (!c.model.discrete_measure)
      throw ConfigError("compare_exact for the scalar theory needs model.discrete_measure: true");
    for (std::size_t i = 0; i < values.size(); ++i)
      out.verdicts.push_back(mc_agreement("mc_vs_exact", values[i], exact_values[i], "product" + std::to_string(i)));
  }
  out.tables.push_back(correlator_table(values));
  json est = json::array();
  for (const auto& v : values) est.push_back(to_json(v));
  out.report["estimates"] = est;
}

template <class G>
void run_rp_gauge(const ScenarioConfig& c, const LatticeGeometry& geom, const GaugeModel<G>& model, RunReport& out) {
  Rng rng(functional_seed(c));
  const int n = c.functionals.count, np = c.functionals.schwarz_pairs;
  std::vector<GaugeFunctional> fs;
  for (int i = 0; i < n + 2 * np; ++i) fs.push_back(random_gauge_functional(geom, Region::plus, rng, c.functionals.poly));
  ObservableSet set;
  const int m = static_cast<int>(fs.size());
  for (const auto& f : fs) set.add_factor(compile(geom, f));
  for (const auto& f : fs) set.add_factor(compile(geom, theta_gauge_functional(geom, f)));
  for (int i = 0; i < m; ++i) set.add_product({i, m + i});
  for (int k = 0; k < np; ++k) set.add_product({n + 2 * k, m + n + 2 * k + 1});

  const bool exact = c.scenario == ScenarioKind::rp_exact;
  std::vector<Estimate> values;
  std::vector<cplx> exact_values;
  if constexpr (std::is_same_v<G, ZnGroup>) {
    if (exact || c.functionals.compare_exact) exact_values = exact_gauge_expectations(model, geom, set, c.enumeration);
  }
  if (exact) {
    for (const auto& v : exact_values) values.push_back(Estimate::exact_value(v));
  } else {
    values = mc_expectations(model, geom, set, mc_params(c));
  }
  for (int i = 0; i < n; ++i) out.verdicts.push_back(check_rp(values[i], "f" + std::to_string(i)));
  for (int k = 0; k < np; ++k)
    out.verdicts.push_back(check_schwarz(values[m + k], values[n + 2 * k], values[n + 2 * k + 1],
                                         "pair" + std::to_string(k)));
  if (!exact && !exact_values.empty())
    for (std::size_t i = 0; i < values.size(); ++i)
      out.verdicts.push_back(mc_agreement("mc_vs_exact", values[i], exact_values[i], "product" + std::to_string(i)));
  out.tables.push_back(correlator_table(values));
  json est = json::array();
  for (const auto& v : values) est.push_back(to_json(v));
  out.report["estimates"] = est;
}

inline EnergyOptions energy_options(const ScenarioConfig& c) {
  EnergyOptions o;
  o.mode = c.scan.mode;
  o.enumeration = c.enumeration;
  o.mc = mc_params(c);
  o.self_energy = c.scan.self_energy;
  o.translation_average = c.scan.translation_average;
  return o;
}

template <class G>
ProbeSpec effective_spec(const ScenarioConfig& c, const GaugeModel<G>& model, RunReport& out) {
  ProbeSpec spec = c.probe.spec;
  if constexpr (std::is_same_v<G, U1Group>) {
    if (spec.kind == ProbeKind::conductor) {
      spec.kind = ProbeKind::dielectric;
      spec.alpha = c.probe.conductor_alpha.value_or(50.0 * model.inverse_coupling);
      out.report["conductor_realization"] = {{"kind", "dielectric"}, {"alpha", spec.alpha}};
    }
  }
  return spec;
}

template <class G>
void run_casimir(const ScenarioConfig& c, const LatticeGeometry& geom, const GaugeModel<G>& model, RunReport& out) {
  const ProbeSpec spec = effective_spec(c, model, out);
  const EnergyCurve curve = energy_scan(model, geom, spec, c.scan.separations, energy_options(c), c.probe.anchor);
  Table t{"energy_curve", {"separation", "energy_mean", "energy_stderr", "n_samples"}, {}};
  json pts = json::array();
  for (std::size_t i = 0; i < curve.separations.size(); ++i) {
    const Estimate& e = curve.energies[i];
    t.rows.push_back({std::to_string(curve.separations[i]), format_number(e.mean.real()), format_number(e.std_error),
                      std::to_string(e.n_samples)});
    json p = to_json(e);
    p["separation"] = curve.separations[i];
    pts.push_back(p);
  }
  out.tables.push_back(t);
  out.report["curve"] = pts;
  if (curve.separations.size() >= 3)
    for (auto& v : concavity_scan(curve)) out.verdicts.push_back(v);
  // on a periodic mirror direction the probe meets its image from both sides;
  // attraction is a statement about separations up to half the extent
  const int r = geom.reflection_dim();
  const int max_sep = geom.boundary(r) == Boundary::periodic ? geom.extent(r) / 2 : std::numeric_limits<int>::max();
  int in_range = 0;
  for (int z : curve.separations) in_range += z <= max_sep ? 1 : 0;
  if (in_range >= 2) out.verdicts.push_back(monotonicity_check(curve, max_sep));
}

template <class G>
void run_torque(const ScenarioConfig& c, const LatticeGeometry& geom, const GaugeModel<G>& model, RunReport& out) {
  const ProbeSpec spec = effective_spec(c, model, out);
  std::vector<Rotation> rots;
  if (c.scan.rotations == RotationSet::identity) rots = {Rotation{}};
  else if (c.scan.rotations == RotationSet::plane) rots = plane_rotations(c.scan.rotation_plane[0], c.scan.rotation_plane[1]);
  else rots = spatial_rotations(geom.dim());
  const TorqueResult r = torque_scan(model, geom, spec, c.probe.anchor, rots, energy_options(c));
  Table t{"orientation_matrix", {"row", "col", "energy_mean", "energy_stderr", "n_samples"}, {}};
  json mat = json::array();
  for (std::size_t i = 0; i < r.matrix.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < r.matrix[i].size(); ++j) {
      const Estimate& e = r.matrix[i][j];
      t.rows.push_back({std::to_string(i), std::to_string(j), format_number(e.mean.real()),
                        format_number(e.std_error), std::to_string(e.n_samples)});
      row.push_back(to_json(e));
    }
    mat.push_back(row);
  }
  json names = json::array();
  for (const auto& rot : rots) names.push_back(rot.name);
  out.report["rotations"] = names;
  out.report["matrix"] = mat;
  out.tables.push_back(t);
  for (const auto& v : r.verdicts) out.verdicts.push_back(v);
}

inline void run_dipole(const ScenarioConfig& c, RunReport& out) {
  Rng rng(derive_seed(c.seed.value_or(1), 0xd1));
  const auto& dc = c.dipole;
  for (DipoleKind kind : {DipoleKind::electric, DipoleKind::magnetic}) {
    const std::string tag = kind == DipoleKind::electric ? "electric" : "magnetic";
    std::vector<Verdict> sign, paths, deriv;
    double worst_sign = std::numeric_limits<double>::infinity();
    double worst_path = 0.0, worst_deriv = 0.0;
    for (int i = 0; i < dc.count; ++i) {
      const Vec3 m(rng.normal(), rng.normal(), rng.normal());
      Vec3 dir(rng.normal(), rng.normal(), rng.normal());
      while (dir.norm() < 1e-8) dir = Vec3(rng.normal(), rng.normal(), rng.normal());
      const double dist = rng.uniform(dc.min_distance, dc.max_distance);
      const Vec3 r = dir.normalized() * dist;
      const Dipole d{m, kind};
      const double e = mirror_pair_energy(d, r);
      const double e2 = mirror_pair_energy_via_reflection(d, r);
      worst_sign = std::min(worst_sign, -e);
      worst_path = std::max(worst_path, std::abs(e - e2) / std::max(std::abs(e), 1e-300));
      const double h = dc.fd_step * dist;
      const Vec3 u = r / dist;
      const double fd = (mirror_pair_energy(d, u * (dist + h)) - mirror_pair_energy(d, u * (dist - h))) / (2.0 * h);
      const double an = mirror_pair_radial_derivative(d, r);
      worst_deriv = std::max(worst_deriv, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
    }
    Verdict v1{"dipole_mirror_energy_nonpositive", worst_sign >= 0.0 ? Status::pass : Status::fail, worst_sign,
               std::numeric_limits<double>::quiet_NaN(), true, tag};
    Verdict v2{"dipole_paths_agree", worst_path <= 1e-12 ? Status::pass : Status::fail, 1e-12 - worst_path,
               std::numeric_limits<double>::quiet_NaN(), true, tag};
    Verdict v3{"dipole_radial_derivative", worst_deriv <= 1e-6 ? Status::pass : Status::fail, 1e-6 - worst_deriv,
               std::numeric_limits<double>::quiet_NaN(), true, tag};
    out.verdicts.insert(out.verdicts.end(), {v1, v2, v3});
  }

  Table t{"orientation_table", {"orientation_deg", "kind", "mirror_energy", "energy_via_reflection"}, {}};
  const Vec3 r(0.0, 0.0, dc.table_distance);
  for (int k = 0; k < dc.orientations; ++k) {
    const double deg = 180.0 * k / (dc.orientations - 1);
    const double th = deg * std::numbers::pi / 180.0;
    const Vec3 m(std::sin(th), 0.0, std::cos(th));
    for (DipoleKind kind : {DipoleKind::electric, DipoleKind::magnetic}) {
      const Dipole d{m, kind};
      t.rows.push_back({format_number(deg), kind == DipoleKind::electric ? "electric" : "magnetic",
                        format_number(mirror_pair_energy(d, r)), format_number(mirror_pair_energy_via_reflection(d, r))});
    }
  }
  out.tables.push_back(t);
}

template <class F>
void with_gauge_model(const ScenarioConfig& c, F&& f) {
  if (c.model.is_u1()) f(GaugeModel<U1Group>{U1Group{}, c.model.inverse_coupling});
  else f(GaugeModel<ZnGroup>{ZnGroup(c.model.zn_order()), c.model.inverse_coupling});
}

}  // namespace detail

/// Runs a validated scenario. Verdict failures are reported, not thrown.
inline RunReport run_scenario(const ScenarioConfig& c) {
  RunReport out;
  out.report["scenario"] = to_string(c.scenario);
  if (c.seed) out.report["seed"] = *c.seed;
  out.report["config"] = to_json(c);
  if (c.scenario == ScenarioKind::dipole) {
    detail::run_dipole(c, out);
  } else {
    const LatticeGeometry geom = c.geometry.build();
    if (c.model.theory == Theory::scalar) {
      if (c.scenario != ScenarioKind::rp_exact && c.scenario != ScenarioKind::rp_mc)
        throw ConfigError("the scalar theory supports rp-exact and rp-mc only");
      detail::run_rp_scalar(c, geom, out);
    } else {
      detail::with_gauge_model(c, [&](const auto& model) {
        switch (c.scenario) {
          case ScenarioKind::rp_exact:
          case ScenarioKind::rp_mc: detail::run_rp_gauge(c, geom, model, out); break;
          case ScenarioKind::casimir_scan: detail::run_casimir(c, geom, model, out); break;
          case ScenarioKind::torque_scan: detail::run_torque(c, geom, model, out); break;
          case ScenarioKind::dipole: break;
        }
      });
    }
  }
  json vs = json::array();
  int counts[3] = {0, 0, 0};
  for (const auto& v : out.verdicts) {
    vs.push_back(to_json(v));
    ++counts[static_cast<int>(v.status)];
  }
  out.report["verdicts"] = vs;
  out.report["summary"] = {{"pass", counts[0]}, {"fail", counts[1]}, {"inconclusive", counts[2]}};
  return out;
}

/// Writes report.json (deterministic payload), timing.json (wall clock) and,
/// for the csv format, one CSV per table. With the json format the tables are
/// embedded in the report instead.
inline void write_outputs(const RunReport& run, const std::string& dir, const std::string& format) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  json report = run.report;
  if (format == "json") {
    json tables;
    for (const auto& t : run.tables) tables[t.name] = t.to_json();
    report["tables"] = tables;
  } else {
    for (const auto& t : run.tables) {
      std::ofstream f(fs::path(dir) / (t.name + ".csv"), std::ios::binary);
      f << t.to_csv();
    }
  }
  std::ofstream(fs::path(dir) / "report.json", std::ios::binary) << report.dump(2) << "\n";
  json timing = {{"wall_clock_seconds", run.wall_clock_seconds}};
  std::ofstream(fs::path(dir) / "timing.json", std::ios::binary) << timing.dump(2) << "\n";
}

}  // namespace rplab
