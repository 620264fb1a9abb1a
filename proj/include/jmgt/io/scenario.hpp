#pragma once

#include "jmgt/evolution/integrate.hpp"

#include <json.hpp>
#include <openssl/sha.h>
#include <yaml-cpp/yaml.h>

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace jmgt {

using Json = nlohmann::json;

inline constexpr int schema_version = 1;

struct GeometryConfig {
  std::string kind = "interval";  // interval | rectangle
  double lx = 1.0;
  double ly = 1.0;
  int nx = 100;
  int ny = 100;
  std::string gamma0 = "left";
  std::optional<Point> x0;
  bool allow_empty_gamma0 = false;
};

struct ParamsConfig {
  double tau = 1.0;
  double c = 1.0;
  double delta = 1.0;
  double k = 0.5;
  double lambda = 1.0;
  std::string alpha = "critical";  // number | critical | critical+g | critical-g
  double kappa0 = 1.0;
  double kappa1 = 1.0;
  std::string forcing = "none";  // none | sine:A,omega
};

struct TimeConfig {
  double T = 1.0;
  double dt = 1e-3;
  std::string scheme = "crank_nicolson";  // crank_nicolson | backward_euler | theta
  double theta = 0.5;
  bool nonlinear = false;
  bool corrector = true;
};

struct OutputConfig {
  int stride = 1;
  bool store_states = false;
};

struct ExperimentConfig {
  std::string name;
  Json options = Json::object();
};

struct ScenarioConfig {
  GeometryConfig geometry;
  ParamsConfig params;
  InitialDataSpec initial;
  TimeConfig time;
  OutputConfig outputs;
  ExperimentConfig experiment;
  std::string source_text;
};

namespace detail {

inline std::string where(const YAML::Node& n, const std::string& field) {
  std::ostringstream os;
  if (n.Mark().line >= 0) os << "line " << n.Mark().line + 1 << ", column " << n.Mark().column + 1 << ": ";
  os << field;
  return os.str();
}

[[noreturn]] inline void fail(const YAML::Node& n, const std::string& field, const std::string& msg) {
  throw ConfigurationError(where(n, field) + ": " + msg);
}

inline void allow_keys(const YAML::Node& n, const std::string& section, std::initializer_list<const char*> keys) {
  if (!n.IsMap()) fail(n, section, "expected a mapping");
  const std::set<std::string> ok(keys.begin(), keys.end());
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    if (!ok.count(key)) fail(kv.first, section + "." + key, "unknown key");
  }
}

template <class T>
T read(const YAML::Node& parent, const std::string& section, const char* key, T fallback) {
  const YAML::Node n = parent[key];
  if (!n) return fallback;
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, section + "." + key, "has the wrong type");
  }
}

inline double read_positive(const YAML::Node& parent, const std::string& section, const char* key, double fallback) {
  const double v = read(parent, section, key, fallback);
  if (!(v > 0.0) || !std::isfinite(v)) fail(parent[key] ? parent[key] : parent, section + "." + key, "must be positive");
  return v;
}

inline double read_nonnegative(const YAML::Node& parent, const std::string& section, const char* key, double fallback) {
  const double v = read(parent, section, key, fallback);
  if (!(v >= 0.0) || !std::isfinite(v)) fail(parent[key] ? parent[key] : parent, section + "." + key, "must be nonnegative");
  return v;
}

inline Json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Sequence: {
      Json a = Json::array();
      for (const auto& e : n) a.push_back(yaml_to_json(e));
      return a;
    }
    case YAML::NodeType::Map: {
      Json o = Json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (s == "true" || s == "false") return s == "true";
      try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size()) return v;
      } catch (const std::exception&) {
      }
      return s;
    }
    default:
      return nullptr;
  }
}

// critical alpha is tau c^2 / b, written in the scenario as "critical", "critical+g" or "critical-g"
inline double parse_alpha(const std::string& spec, const ParamsConfig& p, const YAML::Node& node) {
  const double crit = p.tau * p.c * p.c / (p.delta + p.tau * p.c * p.c);
  try {
    if (spec.rfind("critical", 0) == 0) {
      const std::string rest = spec.substr(8);
      if (rest.empty()) return crit;
      if (rest[0] != '+' && rest[0] != '-') throw std::invalid_argument(spec);
      return crit + std::stod(rest);
    }
    std::size_t used = 0;
    const double v = std::stod(spec, &used);
    if (used != spec.size()) throw std::invalid_argument(spec);
    return v;
  } catch (const std::exception&) {
    fail(node, "params.alpha", "expected a number, 'critical', 'critical+g' or 'critical-g', got '" + spec + "'");
  }
}

struct SineForcing {
  double amplitude = 0.0;
  double omega = 0.0;
};

inline std::optional<SineForcing> parse_forcing(const std::string& spec, const YAML::Node& node) {
  if (spec == "none") return std::nullopt;
  if (spec.rfind("sine:", 0) == 0) {
    const std::string body = spec.substr(5);
    const auto comma = body.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(body);
      return SineForcing{std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1))};
    } catch (const std::exception&) {
    }
  }
  fail(node, "params.forcing", "expected 'none' or 'sine:A,omega', got '" + spec + "'");
}

}  // namespace detail

inline ScenarioConfig parse_scenario(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigurationError("line " + std::to_string(e.mark.line + 1) + ": YAML syntax error: " + e.msg);
  }
  if (!root || !root.IsMap()) throw ConfigurationError("scenario must be a YAML mapping");
  detail::allow_keys(root, "scenario",
                     {"schema_version", "geometry", "params", "initial_data", "time", "outputs", "experiment"});
  ScenarioConfig sc;
  sc.source_text = text;

  if (!root["schema_version"]) throw ConfigurationError("schema_version: missing");
  const int version = detail::read(root, "", "schema_version", 0);
  if (version != schema_version)
    detail::fail(root["schema_version"], "schema_version", "unsupported version " + std::to_string(version));

  const YAML::Node g = root["geometry"];
  if (!g) throw ConfigurationError("geometry: missing");
  detail::allow_keys(g, "geometry", {"kind", "sizes", "resolution", "gamma0", "x0", "allow_empty_gamma0"});
  auto& geo = sc.geometry;
  geo.kind = detail::read<std::string>(g, "geometry", "kind", "interval");
  if (geo.kind != "interval" && geo.kind != "rectangle") detail::fail(g["kind"], "geometry.kind", "expected interval or rectangle");
  const int dims = geo.kind == "interval" ? 1 : 2;
  auto read_pair = [&](const char* key, auto& a, auto& b) {
    const YAML::Node n = g[key];
    if (!n) return;
    using T = std::decay_t<decltype(a)>;
    try {
      if (n.IsScalar()) {
        a = n.as<T>();
        b = a;
      } else if (n.IsSequence() && static_cast<int>(n.size()) == dims) {
        a = n[0].as<T>();
        if (dims == 2) b = n[1].as<T>();
      } else {
        throw YAML::Exception(n.Mark(), "shape");
      }
    } catch (const YAML::Exception&) {
      detail::fail(n, std::string("geometry.") + key, "expected a number or a list of " + std::to_string(dims));
    }
  };
  read_pair("sizes", geo.lx, geo.ly);
  read_pair("resolution", geo.nx, geo.ny);
  if (!(geo.lx > 0.0) || !(geo.ly > 0.0)) detail::fail(g["sizes"], "geometry.sizes", "must be positive");
  if (geo.nx < 2 || (dims == 2 && geo.ny < 2)) detail::fail(g["resolution"], "geometry.resolution", "needs at least 2 cells per direction");
  if (dims == 1) {
    geo.ly = 0.0;
    geo.ny = 0;
  }
  geo.gamma0 = detail::read<std::string>(g, "geometry", "gamma0", dims == 1 ? "endpoint0" : "left");
  geo.allow_empty_gamma0 = detail::read(g, "geometry", "allow_empty_gamma0", false);
  if (g["x0"]) {
    try {
      const auto v = g["x0"].as<std::vector<double>>();
      if (static_cast<int>(v.size()) != dims) throw YAML::Exception(g["x0"].Mark(), "size");
      geo.x0 = Point(v[0], dims == 2 ? v[1] : 0.0);
    } catch (const YAML::Exception&) {
      detail::fail(g["x0"], "geometry.x0", "expected a list of " + std::to_string(dims) + " numbers");
    }
  }

  const YAML::Node p = root["params"] ? root["params"] : YAML::Node(YAML::NodeType::Map);
  detail::allow_keys(p, "params", {"tau", "c", "delta", "k", "lambda", "alpha", "kappa0", "kappa1", "forcing"});
  auto& pc = sc.params;
  pc.tau = detail::read_positive(p, "params", "tau", 1.0);
  pc.c = detail::read_positive(p, "params", "c", 1.0);
  pc.delta = detail::read_positive(p, "params", "delta", 1.0);
  pc.lambda = detail::read_positive(p, "params", "lambda", 1.0);
  pc.k = detail::read_nonnegative(p, "params", "k", 0.5);
  pc.alpha = detail::read<std::string>(p, "params", "alpha", "critical");
  if (detail::parse_alpha(pc.alpha, pc, p["alpha"] ? p["alpha"] : p) < 0.0)
    detail::fail(p["alpha"], "params.alpha", "alpha must be nonnegative");
  pc.kappa0 = detail::read(p, "params", "kappa0", 1.0);
  const bool empty_gamma0 = geo.gamma0 == "none" || geo.gamma0.empty();
  if (!empty_gamma0 && !(pc.kappa0 > 0.0))
    detail::fail(p["kappa0"] ? p["kappa0"] : p, "params.kappa0",
                 "must be positive on gamma0 (Robin coercivity of lambda d_nu u + kappa0 u = 0)");
  pc.kappa1 = detail::read_nonnegative(p, "params", "kappa1", 1.0);
  pc.forcing = detail::read<std::string>(p, "params", "forcing", "none");
  detail::parse_forcing(pc.forcing, p["forcing"] ? p["forcing"] : p);

  const YAML::Node d = root["initial_data"] ? root["initial_data"] : YAML::Node(YAML::NodeType::Map);
  detail::allow_keys(d, "initial_data", {"shape", "h_size", "h1_size", "compatible", "mode"});
  auto& id = sc.initial;
  id.shape = detail::read<std::string>(d, "initial_data", "shape", "bump");
  static const std::set<std::string> shapes{"bump", "bump_lift", "mode", "random", "zero", "rightmost_mode"};
  if (!shapes.count(id.shape))
    detail::fail(d["shape"], "initial_data.shape", "expected bump, bump_lift, mode, random, zero or rightmost_mode");
  if (d["h_size"] && d["h1_size"]) detail::fail(d, "initial_data", "give either h_size or h1_size, not both");
  if (d["h_size"]) id.h_size = detail::read_positive(d, "initial_data", "h_size", 1.0);
  if (d["h1_size"]) id.h1_size = detail::read_positive(d, "initial_data", "h1_size", 1.0);
  id.compatible = detail::read(d, "initial_data", "compatible", true);
  id.mode = detail::read(d, "initial_data", "mode", 0);
  if (id.mode < 0) detail::fail(d["mode"], "initial_data.mode", "must be nonnegative");

  const YAML::Node t = root["time"] ? root["time"] : YAML::Node(YAML::NodeType::Map);
  detail::allow_keys(t, "time", {"T", "dt", "scheme", "theta", "nonlinear", "corrector"});
  auto& tc = sc.time;
  tc.T = detail::read_nonnegative(t, "time", "T", 1.0);
  tc.dt = detail::read_positive(t, "time", "dt", 1e-3);
  if (tc.T > 0.0 && tc.dt > tc.T) detail::fail(t["dt"], "time.dt", "must not exceed T");
  tc.scheme = detail::read<std::string>(t, "time", "scheme", "crank_nicolson");
  if (tc.scheme == "crank_nicolson") {
    tc.theta = 0.5;
  } else if (tc.scheme == "backward_euler") {
    tc.theta = 1.0;
  } else if (tc.scheme == "theta") {
    tc.theta = detail::read(t, "time", "theta", 0.5);
    if (!(tc.theta >= 0.5 && tc.theta <= 1.0)) detail::fail(t["theta"] ? t["theta"] : t, "time.theta", "must lie in [0.5, 1]");
  } else {
    detail::fail(t["scheme"], "time.scheme", "expected crank_nicolson, backward_euler or theta");
  }
  if (t["theta"] && tc.scheme != "theta") detail::fail(t["theta"], "time.theta", "only used with scheme: theta");
  tc.nonlinear = detail::read(t, "time", "nonlinear", false);
  tc.corrector = detail::read(t, "time", "corrector", true);

  const YAML::Node o = root["outputs"] ? root["outputs"] : YAML::Node(YAML::NodeType::Map);
  detail::allow_keys(o, "outputs", {"stride", "store_states"});
  sc.outputs.stride = detail::read(o, "outputs", "stride", 1);
  if (sc.outputs.stride < 1) detail::fail(o["stride"], "outputs.stride", "must be at least 1");
  sc.outputs.store_states = detail::read(o, "outputs", "store_states", false);

  if (const YAML::Node e = root["experiment"]) {
    detail::allow_keys(e, "experiment", {"name", "options"});
    sc.experiment.name = detail::read<std::string>(e, "experiment", "name", "");
    if (e["options"]) {
      if (!e["options"].IsMap()) detail::fail(e["options"], "experiment.options", "expected a mapping");
      sc.experiment.options = detail::yaml_to_json(e["options"]);
    }
  }
  return sc;
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_scenario(ss.str());
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path + ": " + e.what());
  }
}

// every field with defaults filled in; numbers stored as doubles so 100 and 100.0 agree
inline Json normalized(const ScenarioConfig& sc) {
  const auto& g = sc.geometry;
  const auto& p = sc.params;
  const auto& d = sc.initial;
  const auto& t = sc.time;
  Json j;
  j["schema_version"] = static_cast<double>(schema_version);
  j["geometry"] = {{"kind", g.kind},
                   {"sizes", g.kind == "interval" ? Json::array({g.lx}) : Json::array({g.lx, g.ly})},
                   {"resolution", g.kind == "interval" ? Json::array({double(g.nx)}) : Json::array({double(g.nx), double(g.ny)})},
                   {"gamma0", g.gamma0},
                   {"allow_empty_gamma0", g.allow_empty_gamma0}};
  j["geometry"]["x0"] = g.x0 ? Json::array({g.x0->x(), g.x0->y()}) : Json(nullptr);
  j["params"] = {{"tau", p.tau}, {"c", p.c},         {"delta", p.delta},   {"k", p.k},           {"lambda", p.lambda},
                 {"alpha", p.alpha}, {"kappa0", p.kappa0}, {"kappa1", p.kappa1}, {"forcing", p.forcing}};
  j["initial_data"] = {{"shape", d.shape}, {"compatible", d.compatible}, {"mode", double(d.mode)}};
  j["initial_data"]["h_size"] = d.h_size ? Json(*d.h_size) : Json(nullptr);
  j["initial_data"]["h1_size"] = d.h1_size ? Json(*d.h1_size) : Json(nullptr);
  j["time"] = {{"T", t.T},           {"dt", t.dt},   {"scheme", t.scheme}, {"theta", t.theta},
               {"nonlinear", t.nonlinear}, {"corrector", t.corrector}};
  j["outputs"] = {{"stride", double(sc.outputs.stride)}, {"store_states", sc.outputs.store_states}};
  j["experiment"] = {{"name", sc.experiment.name}, {"options", sc.experiment.options}};
  return j;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char digest[SHA256_DIGEST_LENGTH];
  SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
  std::ostringstream os;
  for (unsigned char c : digest) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(c);
  return os.str();
}

// json objects keep their keys sorted, so the dump is canonical
inline std::string scenario_hash(const ScenarioConfig& sc) { return sha256_hex(normalized(sc).dump()); }

inline PhysicalParams make_params(const ScenarioConfig& sc, const Mesh& mesh) {
  const auto& pc = sc.params;
  PhysicalParams p;
  p.tau = pc.tau;
  p.c = pc.c;
  p.delta = pc.delta;
  p.k = pc.k;
  p.lambda = pc.lambda;
  p.alpha = constant_field(detail::parse_alpha(pc.alpha, pc, YAML::Node()));
  p.kappa0 = constant_field(pc.kappa0);
  p.kappa1 = constant_field(pc.kappa1);
  if (const auto f = detail::parse_forcing(pc.forcing, YAML::Node())) {
    const Point center = 0.5 * (mesh.lower + mesh.upper);
    const Point ext = mesh.extent();
    const double r = mesh.dimension == 1 ? 0.3 * ext.x() : 0.3 * std::min(ext.x(), ext.y());
    const detail::SineForcing sf = *f;
    p.forcing = [=](const Point& x, double t) {
      const double r2 = (x - center).squaredNorm() / (r * r);
      return r2 < 1.0 ? sf.amplitude * std::pow(1.0 - r2, 3) * std::sin(sf.omega * t) : 0.0;
    };
  }
  validate(p);
  return p;
}

inline Mesh make_mesh(const GeometryConfig& g) {
  return g.kind == "interval" ? build_interval_mesh(g.lx, g.nx) : build_rect_mesh(g.lx, g.ly, g.nx, g.ny);
}

inline std::shared_ptr<const Model> make_model(const ScenarioConfig& sc) {
  auto mesh = std::make_shared<const Mesh>(make_mesh(sc.geometry));
  const BoundaryPartition part = partition_boundary(*mesh, sc.geometry.gamma0, sc.geometry.allow_empty_gamma0);
  return build_model(mesh, part, make_params(sc, *mesh), sc.geometry.allow_empty_gamma0);
}

}  // namespace jmgt
