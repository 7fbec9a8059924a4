#include "memphase/grid.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include <json.hpp>

#include "memphase/errors.hpp"
#include "memphase/io.hpp"
#include "memphase/parallel.hpp"

namespace memphase {

namespace {

std::atomic<std::size_t> g_memory_cap{kDefaultMemoryCap};

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

std::filesystem::path strip_json(const std::filesystem::path& stem) {
  if (stem.extension() == ".json" || stem.extension() == ".bin") {
    return stem.parent_path() / stem.stem();
  }
  return stem;
}

}  // namespace

void set_memory_cap(std::size_t points) { g_memory_cap.store(points); }
std::size_t memory_cap() { return g_memory_cap.load(); }

double GridSpec::cell_volume() const {
  double v = 1.0;
  for (int a = 0; a < dim; ++a) v *= spacing;
  return v;
}

Index GridSpec::unflatten(std::size_t flat) const {
  Index idx{};
  idx[2] = flat % dims[2];
  flat /= dims[2];
  idx[1] = flat % dims[1];
  idx[0] = flat / dims[1];
  return idx;
}

Point GridSpec::point(const Index& idx) const {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) p[a] = coordinate(a, idx[a]);
  return p;
}

void GridSpec::validate() const {
  if (dim < 1 || dim > 3) throw ConfigError("grid: dim must be 1, 2 or 3");
  for (int a = 0; a < 3; ++a) {
    if (dims[a] == 0) throw ConfigError("grid: extents must be positive");
    if (a >= dim && dims[a] != 1) throw ConfigError("grid: inactive axes must have extent 1");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw ConfigError("grid: spacing must be > 0");
  for (int a = 0; a < 3; ++a) {
    if (!std::isfinite(origin[a])) throw ConfigError("grid: origin must be finite");
  }
  const double count = static_cast<double>(dims[0]) * static_cast<double>(dims[1]) *
                       static_cast<double>(dims[2]);
  if (count > static_cast<double>(memory_cap())) {
    throw ConfigError("grid: " + std::to_string(static_cast<long double>(count)) +
                      " points exceed the memory cap of " + std::to_string(memory_cap()));
  }
}

GridSpec GridSpec::box(int dim, const Index& dims, double spacing, const Point& lo) {
  GridSpec g;
  g.dim = dim;
  g.dims = {1, 1, 1};
  g.origin = {0.0, 0.0, 0.0};
  for (int a = 0; a < dim; ++a) {
    g.dims[a] = dims[a];
    g.origin[a] = lo[a] + 0.5 * spacing;
  }
  g.spacing = spacing;
  g.validate();
  return g;
}

ScalarField::ScalarField(GridSpec spec, double fill) : spec_(spec) {
  spec_.validate();
  values_.assign(spec_.size(), fill);
}

ScalarField::ScalarField(GridSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
  spec_.validate();
  if (values_.size() != spec_.size()) throw ShapeError("field: value count does not match grid");
}

ScalarField ScalarField::sample(const GridSpec& spec,
                                const std::function<double(const Point&)>& f) {
  ScalarField out(spec);
  auto vals = out.values();
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) vals[i] = f(spec.point(i));
  });
  return out;
}

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw ShapeError(std::string(what) + ": fields live on different grids");
}

void require_stencil_shape(const GridSpec& spec) {
  for (int a = 0; a < spec.dim; ++a) {
    if (spec.dims[a] < 3) {
      throw ShapeError("stencil: axis " + std::to_string(a) + " has fewer than 3 points");
    }
  }
}

double partial_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                  const Index& idx, int axis) {
  const std::size_t s = spec.strides()[axis];
  const std::size_t n = spec.dims[axis];
  const std::size_t i = idx[axis];
  const double h = spec.spacing;
  if (i == 0) return (-3.0 * f[flat] + 4.0 * f[flat + s] - f[flat + 2 * s]) / (2.0 * h);
  if (i == n - 1) return (3.0 * f[flat] - 4.0 * f[flat - s] + f[flat - 2 * s]) / (2.0 * h);
  return (f[flat + s] - f[flat - s]) / (2.0 * h);
}

double second_partial_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                         const Index& idx, int axis) {
  const std::size_t s = spec.strides()[axis];
  const std::size_t n = spec.dims[axis];
  std::size_t c = flat;
  if (idx[axis] == 0) c += s;
  if (idx[axis] == n - 1) c -= s;
  const double h = spec.spacing;
  return (f[c - s] - 2.0 * f[c] + f[c + s]) / (h * h);
}

double laplacian_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                    const Index& idx) {
  double lap = 0.0;
  for (int a = 0; a < spec.dim; ++a) lap += second_partial_at(spec, f, flat, idx, a);
  return lap;
}

Point gradient_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                  const Index& idx) {
  Point g{0.0, 0.0, 0.0};
  for (int a = 0; a < spec.dim; ++a) g[a] = partial_at(spec, f, flat, idx, a);
  return g;
}

VectorField gradient(const ScalarField& f) {
  const GridSpec& spec = f.spec();
  require_stencil_shape(spec);
  VectorField out;
  for (int a = 0; a < spec.dim; ++a) out.emplace_back(spec);
  const auto src = f.values();
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Index idx = spec.unflatten(i);
      for (int a = 0; a < spec.dim; ++a) out[a][i] = partial_at(spec, src, i, idx, a);
    }
  });
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  const GridSpec& spec = f.spec();
  require_stencil_shape(spec);
  ScalarField out(spec);
  const auto src = f.values();
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = laplacian_at(spec, src, i, spec.unflatten(i));
  });
  return out;
}

double integrate(const ScalarField& f) {
  const auto vals = f.values();
  return f.spec().cell_volume() * parallel::sum(vals.size(), [&](std::size_t i) { return vals[i]; });
}

Point tangential_gradient_at(const GridSpec& spec, std::span<const double> v,
                             std::span<const double> u, std::size_t flat, const Index& idx,
                             bool* flagged) {
  Point gv = gradient_at(spec, v, flat, idx);
  const Point gu = gradient_at(spec, u, flat, idx);
  double norm2 = 0.0;
  for (int a = 0; a < spec.dim; ++a) norm2 += gu[a] * gu[a];
  const double norm = std::sqrt(norm2);
  if (norm <= kGradientFloor) {
    if (flagged) *flagged = true;
    return gv;
  }
  if (flagged) *flagged = false;
  double dot = 0.0;
  for (int a = 0; a < spec.dim; ++a) dot += gv[a] * gu[a] / norm;
  for (int a = 0; a < spec.dim; ++a) gv[a] -= dot * gu[a] / norm;
  return gv;
}

TangentialGradient tangential_gradient(const ScalarField& v, const ScalarField& u) {
  require_same_spec(v.spec(), u.spec(), "tangential_gradient");
  const GridSpec& spec = v.spec();
  require_stencil_shape(spec);
  TangentialGradient out;
  for (int a = 0; a < spec.dim; ++a) out.components.emplace_back(spec);
  out.flagged.assign(spec.size(), 0);
  parallel::for_chunks(spec.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      bool flag = false;
      const Point g = tangential_gradient_at(spec, v.values(), u.values(), i, spec.unflatten(i), &flag);
      for (int a = 0; a < spec.dim; ++a) out.components[a][i] = g[a];
      out.flagged[i] = flag ? 1 : 0;
    }
  });
  for (auto f : out.flagged) out.flagged_count += f;
  return out;
}

void write_field(const ScalarField& f, const std::filesystem::path& stem_in) {
  const auto stem = strip_json(stem_in);
  const GridSpec& spec = f.spec();
  nlohmann::json side;
  side["dim"] = spec.dim;
  side["dims"] = std::vector<std::size_t>(spec.dims.begin(), spec.dims.begin() + spec.dim);
  side["spacing"] = spec.spacing;
  side["origin"] = std::vector<double>(spec.origin.begin(), spec.origin.begin() + spec.dim);
  side["dtype"] = "float64";
  side["endianness"] = "little";
  side["layout"] = "row-major-last-fastest";
  side["format_version"] = kFieldFormatVersion;

  std::string payload(f.size() * 8, '\0');
  for (std::size_t i = 0; i < f.size(); ++i) {
    const auto bits = std::bit_cast<std::uint64_t>(f[i]);
    for (int b = 0; b < 8; ++b) payload[i * 8 + b] = static_cast<char>((bits >> (8 * b)) & 0xFF);
  }
  io::write_file_atomic(with_suffix(stem, ".bin"), payload);
  io::write_file_atomic(with_suffix(stem, ".json"), side.dump(2) + "\n");
}

ScalarField read_field(const std::filesystem::path& stem_in) {
  const auto stem = strip_json(stem_in);
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(io::read_file(with_suffix(stem, ".json")));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("field sidecar: malformed JSON: ") + e.what());
  }
  auto require = [&](const char* key) -> const nlohmann::json& {
    if (!side.is_object() || !side.contains(key)) {
      throw IoError(std::string("field sidecar: malformed header, missing key '") + key + "'");
    }
    return side.at(key);
  };
  auto bad = [](const char* key) {
    return IoError(std::string("field sidecar: malformed header, bad value for key '") + key + "'");
  };
  GridSpec spec;
  try {
    const auto& jdim = require("dim");
    if (!jdim.is_number_integer()) throw bad("dim");
    spec.dim = jdim.get<int>();
    if (spec.dim < 1 || spec.dim > 3) throw bad("dim");
    const auto& jdims = require("dims");
    if (!jdims.is_array() || static_cast<int>(jdims.size()) != spec.dim) throw bad("dims");
    const auto& jorigin = require("origin");
    if (!jorigin.is_array() || static_cast<int>(jorigin.size()) != spec.dim) throw bad("origin");
    for (int a = 0; a < spec.dim; ++a) {
      if (!jdims[a].is_number_unsigned() || jdims[a].get<std::size_t>() == 0) throw bad("dims");
      if (!jorigin[a].is_number()) throw bad("origin");
      spec.dims[a] = jdims[a].get<std::size_t>();
      spec.origin[a] = jorigin[a].get<double>();
    }
    const auto& jh = require("spacing");
    if (!jh.is_number()) throw bad("spacing");
    spec.spacing = jh.get<double>();
    if (require("dtype") != "float64") throw bad("dtype");
    if (require("endianness") != "little") throw bad("endianness");
    if (require("layout") != "row-major-last-fastest") throw bad("layout");
    spec.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("field sidecar: malformed header: ") + e.what());
  }

  const std::string payload = io::read_file(with_suffix(stem, ".bin"));
  if (payload.size() != spec.size() * 8) throw IoError("field payload: payload size mismatch");
  std::vector<double> values(spec.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(payload[i * 8 + b])) << (8 * b);
    }
    values[i] = std::bit_cast<double>(bits);
    if (!std::isfinite(values[i])) {
      throw IoError("field payload: non-finite value at index " + std::to_string(i));
    }
  }
  return ScalarField(spec, std::move(values));
}

}  // namespace memphase
