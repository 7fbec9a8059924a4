#include "memphase/config.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "memphase/errors.hpp"
#include "memphase/io.hpp"
#include "memphase/parallel.hpp"

namespace memphase::config {

namespace {

std::string join(const std::string& path, const char* key) {
  return path.empty() ? std::string(key) : path + "." + key;
}

const Json& member(const Json& object, const std::string& path, const char* key) {
  if (!object.contains(key)) throw ConfigError("missing key '" + join(path, key) + "'");
  return object.at(key);
}

double as_number(const Json& v, const std::string& where) {
  if (!v.is_number()) throw ConfigError("'" + where + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError("'" + where + "' must be finite");
  return x;
}

}  // namespace

Json parse(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into a 1-based line and column.
    const std::size_t offset = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    std::size_t line = 1;
    std::size_t column = 1;
    for (std::size_t i = 0; i < offset; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    std::ostringstream msg;
    msg << source << ": malformed JSON at line " << line << ", column " << column;
    throw ConfigError(msg.str());
  }
}

Json load(const std::filesystem::path& path) {
  return parse(io::read_file(path), path.string());
}

void require_keys(const Json& object, const std::string& path,
                  std::initializer_list<const char*> allowed) {
  if (!object.is_object()) {
    throw ConfigError("'" + (path.empty() ? std::string("<root>") : path) + "' must be an object");
  }
  for (const auto& [key, _] : object.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw ConfigError("unknown key '" + join(path, key.c_str()) + "'");
  }
}

double number(const Json& object, const std::string& path, const char* key) {
  return as_number(member(object, path, key), join(path, key));
}

double number_or(const Json& object, const std::string& path, const char* key, double fallback) {
  return object.contains(key) ? number(object, path, key) : fallback;
}

long long integer_or(const Json& object, const std::string& path, const char* key,
                     long long fallback) {
  if (!object.contains(key)) return fallback;
  const Json& v = object.at(key);
  if (!v.is_number_integer()) throw ConfigError("'" + join(path, key) + "' must be an integer");
  return v.get<long long>();
}

bool boolean_or(const Json& object, const std::string& path, const char* key, bool fallback) {
  if (!object.contains(key)) return fallback;
  const Json& v = object.at(key);
  if (!v.is_boolean()) throw ConfigError("'" + join(path, key) + "' must be true or false");
  return v.get<bool>();
}

Point point(const Json& value, const std::string& path, int min_size, int max_size, int* size) {
  if (!value.is_array() || static_cast<int>(value.size()) < min_size ||
      static_cast<int>(value.size()) > max_size) {
    std::ostringstream msg;
    msg << "'" << path << "' must be an array of " << min_size;
    if (max_size != min_size) msg << " to " << max_size;
    msg << " numbers";
    throw ConfigError(msg.str());
  }
  Point p{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < value.size(); ++i) {
    p[i] = as_number(value[i], path + "[" + std::to_string(i) + "]");
  }
  if (size) *size = static_cast<int>(value.size());
  return p;
}

Globals globals(const Json& doc) {
  Globals g;
  if (doc.contains("threads")) {
    const Json& t = doc.at("threads");
    if (t.is_string() && t.get<std::string>() == "auto") {
      g.threads = 0u;
    } else if (t.is_number_integer() && t.get<long long>() >= 1 && t.get<long long>() <= 1024) {
      g.threads = static_cast<unsigned>(t.get<long long>());
    } else {
      throw ConfigError("'threads' must be a positive integer or \"auto\"");
    }
  }
  if (doc.contains("memory_cap_points")) {
    const Json& m = doc.at("memory_cap_points");
    if (!m.is_number_integer() || m.get<long long>() < 1) {
      throw ConfigError("'memory_cap_points' must be a positive integer");
    }
    g.memory_cap_points = static_cast<std::size_t>(m.get<long long>());
  }
  if (doc.contains("output_dir")) {
    const Json& o = doc.at("output_dir");
    if (!o.is_string() || o.get<std::string>().empty()) {
      throw ConfigError("'output_dir' must be a non-empty string");
    }
    g.output_dir = o.get<std::string>();
  }
  return g;
}

void apply(const Globals& g) {
  if (g.threads) parallel::set_threads(*g.threads);
  if (g.memory_cap_points) set_memory_cap(*g.memory_cap_points);
}

PhaseSplit split(const Json& value, const std::string& path) {
  if (value.is_null()) return PhaseSplit::none();
  if (value.is_string() && value.get<std::string>() == "none") return PhaseSplit::none();
  if (!value.is_object() || !value.contains("kind") || !value.at("kind").is_string()) {
    throw ConfigError("'" + path + "' must be \"none\" or an object with a \"kind\"");
  }
  const std::string kind = value.at("kind").get<std::string>();
  if (kind == "none") {
    require_keys(value, path, {"kind"});
    return PhaseSplit::none();
  }
  if (kind == "cap") {
    require_keys(value, path, {"kind", "theta0"});
    return PhaseSplit::cap(number(value, path, "theta0"));
  }
  if (kind == "arcs") {
    require_keys(value, path, {"kind", "alpha1", "alpha2"});
    return PhaseSplit::two_arcs(number(value, path, "alpha1"), number(value, path, "alpha2"));
  }
  throw ConfigError("'" + path + ".kind' must be one of none, cap, arcs");
}

Geometry geometry(const Json& value, const std::string& path) {
  if (!value.is_object() || !value.contains("kind") || !value.at("kind").is_string()) {
    throw ConfigError("'" + path + "' must be an object with a \"kind\"");
  }
  const std::string kind = value.at("kind").get<std::string>();
  if (kind == "sphere3d") {
    require_keys(value, path, {"kind", "R", "center", "split"});
    const Point c = value.contains("center") ? point(value.at("center"), join(path, "center"), 3, 3)
                                             : Point{0.0, 0.0, 0.0};
    const PhaseSplit s = value.contains("split") ? split(value.at("split"), join(path, "split")) : PhaseSplit{};
    return Geometry::sphere(number(value, path, "R"), c, s);
  }
  if (kind == "disk2d") {
    require_keys(value, path, {"kind", "R", "center", "split"});
    const Point c = value.contains("center") ? point(value.at("center"), join(path, "center"), 2, 2)
                                             : Point{0.0, 0.0, 0.0};
    const PhaseSplit s = value.contains("split") ? split(value.at("split"), join(path, "split")) : PhaseSplit{};
    return Geometry::disk(number(value, path, "R"), c[0], c[1], s);
  }
  if (kind == "plane") {
    require_keys(value, path, {"kind", "position", "cross_section"});
    return Geometry::plane(number_or(value, path, "position", 0.0),
                           number_or(value, path, "cross_section", 1.0));
  }
  throw ConfigError("'" + path + ".kind' must be one of sphere3d, disk2d, plane");
}

Modulus modulus(const Json& value, const std::string& path) {
  require_keys(value, path, {"a1", "a2"});
  return Modulus(number_or(value, path, "a1", 1.0), number_or(value, path, "a2", 1.0));
}

Box box(const Json& value, const std::string& path) {
  require_keys(value, path, {"lo", "hi"});
  int nlo = 0;
  int nhi = 0;
  Box b;
  b.lo = point(member(value, path, "lo"), join(path, "lo"), 1, 3, &nlo);
  b.hi = point(member(value, path, "hi"), join(path, "hi"), 1, 3, &nhi);
  if (nlo != nhi) throw ConfigError("'" + path + "' lo and hi must have the same length");
  b.dim = nlo;
  return b;
}

DoubleWell potential(const Json& value, const std::string& path) {
  if (!value.is_string()) throw ConfigError("'" + path + "' must be a string");
  return DoubleWell::parse(value.get<std::string>());
}

namespace {

void fill_common(const Json& doc, RecoveryConfig& cfg) {
  cfg.geometry = geometry(member(doc, "", "geometry"), "geometry");
  if (doc.contains("potential")) cfg.potential = potential(doc.at("potential"), "potential");
  if (doc.contains("modulus")) cfg.modulus = modulus(doc.at("modulus"), "modulus");
  cfg.q = number_or(doc, "", "q", cfg.geometry.dim() == 2 ? 8.0 : 6.0);
  cfg.box = box(member(doc, "", "box"), "box");
}

}  // namespace

RecoveryConfig sweep_config(const Json& doc) {
  require_keys(doc, "", {"threads", "memory_cap_points", "output_dir", "meta", "geometry", "potential",
                         "modulus", "epsilons", "q", "box"});
  RecoveryConfig cfg;
  fill_common(doc, cfg);
  const Json& eps = member(doc, "", "epsilons");
  if (!eps.is_array()) throw ConfigError("'epsilons' must be an array of numbers");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    cfg.epsilons.push_back(as_number(eps[i], "epsilons[" + std::to_string(i) + "]"));
  }
  validate(cfg);
  return cfg;
}

RecoveryConfig single_config(const Json& doc, std::initializer_list<const char*> extra) {
  if (!doc.is_object()) throw ConfigError("'<root>' must be an object");
  for (const auto& [key, _] : doc.items()) {
    static constexpr const char* base[] = {"threads", "memory_cap_points", "output_dir", "meta",
                                           "geometry", "potential", "modulus", "epsilon", "q", "box"};
    const bool known = std::any_of(std::begin(base), std::end(base), [&](const char* a) { return key == a; }) ||
                       std::any_of(extra.begin(), extra.end(), [&](const char* a) { return key == a; });
    if (!known) throw ConfigError("unknown key '" + key + "'");
  }
  RecoveryConfig cfg;
  fill_common(doc, cfg);
  cfg.epsilons = {number(doc, "", "epsilon")};
  validate(cfg);
  return cfg;
}

FlowConfig flow_config(const Json& doc) {
  require_keys(doc, "", {"threads", "memory_cap_points", "output_dir", "meta", "epsilon", "lambda", "steps",
                         "dt", "mass_constraint", "seed", "init_u", "init_v", "log_every", "c_safe", "q",
                         "box", "potential", "check_gradients"});
  FlowConfig cfg;
  cfg.epsilon = number(doc, "", "epsilon");
  cfg.lambda = number_or(doc, "", "lambda", cfg.lambda);
  cfg.steps = static_cast<int>(integer_or(doc, "", "steps", cfg.steps));
  if (doc.contains("dt")) {
    const Json& dt = doc.at("dt");
    if (dt.is_string() && dt.get<std::string>() == "auto") {
      cfg.dt.reset();
    } else {
      cfg.dt = as_number(dt, "dt");
    }
  }
  cfg.mass_constraint = boolean_or(doc, "", "mass_constraint", cfg.mass_constraint);
  if (doc.contains("seed")) {
    const Json& s = doc.at("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      throw ConfigError("'seed' must be a non-negative integer");
    }
    cfg.seed = s.get<std::uint64_t>();
  }
  cfg.init_u = geometry(member(doc, "", "init_u"), "init_u");
  if (doc.contains("init_v")) {
    const Json& v = doc.at("init_v");
    if (!v.is_object() || !v.contains("kind") || !v.at("kind").is_string()) {
      throw ConfigError("'init_v' must be an object with a \"kind\"");
    }
    const std::string kind = v.at("kind").get<std::string>();
    if (kind == "noise") {
      require_keys(v, "init_v", {"kind", "amplitude"});
      cfg.init_v = InitV::noise(number(v, "init_v", "amplitude"));
    } else if (kind == "cap") {
      require_keys(v, "init_v", {"kind", "theta0"});
      cfg.init_v = InitV::cap(number(v, "init_v", "theta0"));
    } else if (kind == "constant") {
      require_keys(v, "init_v", {"kind", "c"});
      cfg.init_v = InitV::constant(number(v, "init_v", "c"));
    } else {
      throw ConfigError("'init_v.kind' must be one of noise, cap, constant");
    }
  }
  cfg.log_every = static_cast<int>(integer_or(doc, "", "log_every", cfg.log_every));
  cfg.c_safe = number_or(doc, "", "c_safe", cfg.c_safe);
  cfg.q = number_or(doc, "", "q", cfg.q);
  cfg.box = box(member(doc, "", "box"), "box");
  if (doc.contains("potential")) cfg.potential = potential(doc.at("potential"), "potential");
  cfg.check_gradients = boolean_or(doc, "", "check_gradients", cfg.check_gradients);
  validate(cfg);
  return cfg;
}

Json to_json(const Geometry& g) {
  Json j;
  switch (g.kind()) {
    case Geometry::Kind::Sphere3D:
      j = {{"kind", "sphere3d"}, {"R", g.radius()}, {"center", {g.center()[0], g.center()[1], g.center()[2]}}};
      break;
    case Geometry::Kind::Disk2D:
      j = {{"kind", "disk2d"}, {"R", g.radius()}, {"center", {g.center()[0], g.center()[1]}}};
      break;
    case Geometry::Kind::Plane1DInterface:
      return {{"kind", "plane"}, {"position", g.position()}, {"cross_section", g.cross_section()}};
  }
  const PhaseSplit& s = g.split();
  switch (s.kind) {
    case PhaseSplit::Kind::None:
      j["split"] = "none";
      break;
    case PhaseSplit::Kind::Cap3D:
      j["split"] = {{"kind", "cap"}, {"theta0", s.theta0}};
      break;
    case PhaseSplit::Kind::TwoArcs2D:
      j["split"] = {{"kind", "arcs"}, {"alpha1", s.alpha1}, {"alpha2", s.alpha2}};
      break;
  }
  return j;
}

Json to_json(const SharpLimits& s) {
  Json j;
  j["perimeter"] = s.perimeter;
  j["line"] = s.line ? Json(*s.line) : Json(nullptr);
  j["willmore"] = s.willmore ? Json(*s.willmore) : Json(nullptr);
  return j;
}

}  // namespace memphase::config
