#include "memphase/slicing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <unordered_map>

#include "memphase/energy.hpp"
#include "memphase/errors.hpp"
#include "memphase/parallel.hpp"

namespace memphase {

namespace {

// Cell topology for marching squares / cubes. Corner k sits at offset
// ((k >> a) & 1) along axis a. Case tables are generated by cutting every
// face with segments that separate its inside corners (U > t) and chaining
// the segments into closed polygons, which are then fan-triangulated.
struct CellTopology {
  int dim = 0;
  int corners = 0;
  std::vector<std::array<int, 2>> edge_corners;  // lower corner first
  std::vector<std::vector<std::array<int, 3>>> cases;
};

int corner_bit(int corner, int axis) { return (corner >> axis) & 1; }

// Cyclic corner order of a square face spanned by axes b < c at fixed bits.
std::array<int, 4> face_cycle(int fixed_bits, int b, int c) {
  return {fixed_bits, fixed_bits | (1 << b), fixed_bits | (1 << b) | (1 << c), fixed_bits | (1 << c)};
}

CellTopology make_topology(int dim) {
  CellTopology topo;
  topo.dim = dim;
  topo.corners = 1 << dim;
  std::map<std::pair<int, int>, int> edge_index;
  for (int a = 0; a < topo.corners; ++a) {
    for (int b = a + 1; b < topo.corners; ++b) {
      const int diff = a ^ b;
      if ((diff & (diff - 1)) == 0) {
        edge_index[{a, b}] = static_cast<int>(topo.edge_corners.size());
        topo.edge_corners.push_back({a, b});
      }
    }
  }
  auto edge_of = [&](int a, int b) { return edge_index.at({std::min(a, b), std::max(a, b)}); };

  std::vector<std::array<int, 4>> faces;
  if (dim == 2) {
    faces.push_back(face_cycle(0, 0, 1));
  } else {
    for (int a = 0; a < 3; ++a) {
      const int b = a == 0 ? 1 : 0;
      const int c = a == 2 ? 1 : 2;
      for (int s = 0; s < 2; ++s) faces.push_back(face_cycle(s << a, b, c));
    }
  }

  auto corner_pos = [&](int k) {
    std::array<double, 3> p{0, 0, 0};
    for (int a = 0; a < dim; ++a) p[a] = corner_bit(k, a);
    return p;
  };

  topo.cases.resize(std::size_t{1} << topo.corners);
  for (int mask = 0; mask < (1 << topo.corners); ++mask) {
    auto inside = [&](int k) { return (mask >> k) & 1; };
    std::vector<std::array<int, 2>> segments;
    for (const auto& f : faces) {
      std::array<int, 4> cut{};  // edge index between f[i] and f[i+1], or -1
      int count = 0;
      for (int i = 0; i < 4; ++i) {
        const int a = f[i];
        const int b = f[(i + 1) % 4];
        cut[i] = inside(a) != inside(b) ? edge_of(a, b) : -1;
        count += cut[i] >= 0;
      }
      if (count == 2) {
        std::array<int, 2> seg{-1, -1};
        int n = 0;
        for (int i = 0; i < 4; ++i) {
          if (cut[i] >= 0) seg[n++] = cut[i];
        }
        segments.push_back(seg);
      } else if (count == 4) {
        // Ambiguous face: cut off each inside corner separately.
        for (int i = 0; i < 4; ++i) {
          if (inside(f[i])) segments.push_back({cut[(i + 3) % 4], cut[i]});
        }
      }
    }
    if (dim == 2) {
      for (const auto& s : segments) topo.cases[mask].push_back({s[0], s[1], -1});
      continue;
    }
    // Chain segments into loops; every cut edge has exactly two neighbours.
    std::map<int, std::vector<int>> adjacency;
    for (const auto& s : segments) {
      adjacency[s[0]].push_back(s[1]);
      adjacency[s[1]].push_back(s[0]);
    }
    std::map<int, bool> visited;
    for (const auto& [start, _] : adjacency) {
      if (visited[start]) continue;
      std::vector<int> loop{start};
      visited[start] = true;
      int prev = -1;
      int cur = start;
      for (;;) {
        const auto& nb = adjacency[cur];
        const int next = nb[0] != prev ? nb[0] : nb[1];
        if (next == start) break;
        if (visited[next]) break;
        visited[next] = true;
        loop.push_back(next);
        prev = cur;
        cur = next;
      }
      // Orient so that the polygon normal points away from the inside corners.
      auto midpoint = [&](int e) {
        const auto pa = corner_pos(topo.edge_corners[e][0]);
        const auto pb = corner_pos(topo.edge_corners[e][1]);
        return std::array<double, 3>{0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1]), 0.5 * (pa[2] + pb[2])};
      };
      std::array<double, 3> normal{0, 0, 0};
      std::array<double, 3> centroid{0, 0, 0};
      for (std::size_t i = 0; i < loop.size(); ++i) {
        const auto p = midpoint(loop[i]);
        const auto q = midpoint(loop[(i + 1) % loop.size()]);
        normal[0] += (p[1] - q[1]) * (p[2] + q[2]);
        normal[1] += (p[2] - q[2]) * (p[0] + q[0]);
        normal[2] += (p[0] - q[0]) * (p[1] + q[1]);
        for (int a = 0; a < 3; ++a) centroid[a] += p[a] / static_cast<double>(loop.size());
      }
      std::array<double, 3> in_centroid{0, 0, 0};
      int in_count = 0;
      for (const auto& e : loop) {
        for (int k : topo.edge_corners[e]) {
          if (inside(k)) {
            const auto p = corner_pos(k);
            for (int a = 0; a < 3; ++a) in_centroid[a] += p[a];
            ++in_count;
          }
        }
      }
      double dot = 0.0;
      for (int a = 0; a < 3; ++a) dot += normal[a] * (in_centroid[a] / in_count - centroid[a]);
      if (dot > 0.0) std::reverse(loop.begin(), loop.end());
      for (std::size_t i = 1; i + 1 < loop.size(); ++i) {
        topo.cases[mask].push_back({loop[0], loop[i], loop[i + 1]});
      }
    }
  }
  return topo;
}

const CellTopology& topology(int dim) {
  static const CellTopology square = make_topology(2);
  static const CellTopology cube = make_topology(3);
  return dim == 2 ? square : cube;
}

double norm2(const Point& g) { return g[0] * g[0] + g[1] * g[1] + g[2] * g[2]; }

// A cut-edge vertex produced while visiting one cell.
struct CutVertex {
  Point position;
  double fraction;
  int edge;
};

// Iterates over every cell crossing any of `levels` (sorted ascending) and
// invokes emit(level_index, simplex vertices, vertex count, corner data).
struct CellVisitor {
  const ScalarField& field;
  const CellTopology* topo = nullptr;
  std::array<std::size_t, 8> corner_offset{};
  std::size_t cell_count_hint = 0;

  explicit CellVisitor(const ScalarField& U) : field(U) {
    const GridSpec& spec = U.spec();
    if (spec.dim >= 2) {
      topo = &topology(spec.dim);
      const Index strides = spec.strides();
      for (int k = 0; k < topo->corners; ++k) {
        std::size_t off = 0;
        for (int a = 0; a < spec.dim; ++a) off += corner_bit(k, a) * strides[a];
        corner_offset[k] = off;
      }
    }
  }

  bool is_cell(const Index& idx) const {
    const GridSpec& spec = field.spec();
    for (int a = 0; a < spec.dim; ++a) {
      if (idx[a] + 1 >= spec.dims[a]) return false;
    }
    return true;
  }
};

double simplex_measure(int dim, const Point& a, const Point& b, const Point& c) {
  if (dim == 2) return std::sqrt(norm2({b[0] - a[0], b[1] - a[1], b[2] - a[2]}));
  const Point u{b[0] - a[0], b[1] - a[1], b[2] - a[2]};
  const Point v{c[0] - a[0], c[1] - a[1], c[2] - a[2]};
  const Point x{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  return 0.5 * std::sqrt(norm2(x));
}

void require_slicing_shape(const GridSpec& spec) {
  for (int a = 0; a < spec.dim; ++a) {
    if (spec.dims[a] < 2) throw ShapeError("slicing: every axis needs at least two points");
  }
}

}  // namespace

double IsoSurface::total_measure() const {
  return parallel::pairwise_sum(measures);
}

double IsoSurface::integrate_aux(std::size_t k) const {
  std::vector<double> terms(simplices.size());
  const int nv = dim == 2 ? 2 : 3;
  for (std::size_t s = 0; s < simplices.size(); ++s) {
    double mean = 0.0;
    for (int j = 0; j < nv; ++j) mean += aux[k][simplices[s][j]];
    terms[s] = measures[s] * mean / nv;
  }
  return parallel::pairwise_sum(terms);
}

nlohmann::json IsoSurface::to_json() const {
  nlohmann::json j;
  j["dim"] = dim;
  j["level"] = level;
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (const auto& p : vertices) {
    verts.push_back(dim == 2 ? nlohmann::json{p[0], p[1]} : nlohmann::json{p[0], p[1], p[2]});
  }
  auto& simp = j["simplices"] = nlohmann::json::array();
  for (const auto& s : simplices) {
    simp.push_back(dim == 2 ? nlohmann::json{s[0], s[1]} : nlohmann::json{s[0], s[1], s[2]});
  }
  j["measures"] = measures;
  auto& scalars = j["scalars"] = nlohmann::json::object();
  for (std::size_t k = 0; k < aux.size(); ++k) scalars["aux" + std::to_string(k)] = aux[k];
  return j;
}

IsoSurface extract(const ScalarField& U, double level, std::span<const NodeFunction> aux) {
  const GridSpec& spec = U.spec();
  if (spec.dim < 2) throw ShapeError("extract: level sets need dimension 2 or 3");
  require_slicing_shape(spec);
  const CellVisitor visitor(U);
  const CellTopology& topo = *visitor.topo;
  const auto vals = U.values();
  const std::size_t naux = aux.size();

  struct ChunkOut {
    std::vector<std::uint64_t> keys;
    std::vector<Point> positions;
    std::vector<double> aux_values;  // naux per vertex
    std::vector<std::array<std::uint32_t, 3>> simplices;  // local vertex indices
    std::vector<double> measures;
  };
  const std::size_t chunks = parallel::chunk_count(spec.size());
  std::vector<ChunkOut> outs(chunks);

  parallel::for_chunks(spec.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
    ChunkOut& out = outs[c];
    std::unordered_map<std::uint64_t, std::uint32_t> local;
    std::vector<double> corner_aux(8 * std::max<std::size_t>(naux, 1));
    for (std::size_t base = begin; base < end; ++base) {
      const Index idx = spec.unflatten(base);
      if (!visitor.is_cell(idx)) continue;
      std::array<double, 8> cv{};
      int mask = 0;
      for (int k = 0; k < topo.corners; ++k) {
        cv[k] = vals[base + visitor.corner_offset[k]];
        if (cv[k] > level) mask |= 1 << k;
      }
      const auto& tris = topo.cases[mask];
      if (tris.empty()) continue;
      for (int k = 0; k < topo.corners; ++k) {
        const std::size_t node = base + visitor.corner_offset[k];
        Index nidx = idx;
        for (int a = 0; a < spec.dim; ++a) nidx[a] += corner_bit(k, a);
        for (std::size_t q = 0; q < naux; ++q) corner_aux[k * naux + q] = aux[q](node, nidx);
      }
      auto vertex_for = [&](int e) -> std::uint32_t {
        const int ka = topo.edge_corners[e][0];
        const int kb = topo.edge_corners[e][1];
        const int axis = std::countr_zero(static_cast<unsigned>(ka ^ kb));
        const std::uint64_t key = (base + visitor.corner_offset[ka]) * 3 + axis;
        if (auto it = local.find(key); it != local.end()) return it->second;
        const double f = (level - cv[ka]) / (cv[kb] - cv[ka]);
        Index ia = idx;
        for (int a = 0; a < spec.dim; ++a) ia[a] += corner_bit(ka, a);
        Point p = spec.point(ia);
        p[axis] += f * spec.spacing;
        const auto id = static_cast<std::uint32_t>(out.positions.size());
        out.keys.push_back(key);
        out.positions.push_back(p);
        for (std::size_t q = 0; q < naux; ++q) {
          const double a0 = corner_aux[ka * naux + q];
          const double a1 = corner_aux[kb * naux + q];
          out.aux_values.push_back(a0 + f * (a1 - a0));
        }
        local.emplace(key, id);
        return id;
      };
      for (const auto& t : tris) {
        std::array<std::uint32_t, 3> s{vertex_for(t[0]), vertex_for(t[1]), 0};
        if (spec.dim == 3) s[2] = vertex_for(t[2]);
        out.simplices.push_back(s);
        out.measures.push_back(simplex_measure(spec.dim, out.positions[s[0]], out.positions[s[1]],
                                               out.positions[s[2]]));
      }
    }
  });

  IsoSurface surface;
  surface.dim = spec.dim;
  surface.level = level;
  surface.aux.assign(naux, {});
  std::unordered_map<std::uint64_t, std::uint32_t> global;
  for (const auto& out : outs) {
    std::vector<std::uint32_t> remap(out.positions.size());
    for (std::size_t i = 0; i < out.positions.size(); ++i) {
      auto [it, fresh] = global.emplace(out.keys[i], static_cast<std::uint32_t>(surface.vertices.size()));
      if (fresh) {
        surface.vertices.push_back(out.positions[i]);
        for (std::size_t q = 0; q < naux; ++q) surface.aux[q].push_back(out.aux_values[i * naux + q]);
      }
      remap[i] = it->second;
    }
    for (std::size_t s = 0; s < out.simplices.size(); ++s) {
      const auto& t = out.simplices[s];
      surface.simplices.push_back({remap[t[0]], remap[t[1]], spec.dim == 3 ? remap[t[2]] : 0});
      surface.measures.push_back(out.measures[s]);
    }
  }
  return surface;
}

std::vector<double> level_integrals(const ScalarField& U, std::span<const double> levels,
                                    std::span<const NodeFunction> aux, const VertexIntegrand& f) {
  const GridSpec& spec = U.spec();
  if (spec.dim < 2) throw ShapeError("level_integrals: level sets need dimension 2 or 3");
  require_slicing_shape(spec);
  const std::size_t nlev = levels.size();
  std::vector<std::size_t> order(nlev);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return levels[a] < levels[b]; });
  std::vector<double> sorted(nlev);
  for (std::size_t k = 0; k < nlev; ++k) sorted[k] = levels[order[k]];

  const CellVisitor visitor(U);
  const CellTopology& topo = *visitor.topo;
  const auto vals = U.values();
  const std::size_t naux = aux.size();
  const std::size_t chunks = parallel::chunk_count(spec.size());
  std::vector<double> partial(chunks * nlev, 0.0);

  parallel::for_chunks(spec.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
    std::vector<std::vector<double>> terms(nlev);
    std::vector<double> corner_aux(8 * std::max<std::size_t>(naux, 1));
    std::vector<double> vertex_aux(3 * std::max<std::size_t>(naux, 1));
    for (std::size_t base = begin; base < end; ++base) {
      const Index idx = spec.unflatten(base);
      if (!visitor.is_cell(idx)) continue;
      std::array<double, 8> cv{};
      double lo = INFINITY;
      double hi = -INFINITY;
      for (int k = 0; k < topo.corners; ++k) {
        cv[k] = vals[base + visitor.corner_offset[k]];
        lo = std::min(lo, cv[k]);
        hi = std::max(hi, cv[k]);
      }
      // The cell is cut by t iff lo <= t < hi.
      auto first = std::lower_bound(sorted.begin(), sorted.end(), lo);
      if (first == sorted.end() || !(*first < hi)) continue;
      bool aux_ready = false;
      for (auto it = first; it != sorted.end() && *it < hi; ++it) {
        const double level = *it;
        const auto lev = static_cast<std::size_t>(it - sorted.begin());
        int mask = 0;
        for (int k = 0; k < topo.corners; ++k) {
          if (cv[k] > level) mask |= 1 << k;
        }
        const auto& tris = topo.cases[mask];
        if (tris.empty()) continue;
        if (naux > 0 && !aux_ready) {
          for (int k = 0; k < topo.corners; ++k) {
            const std::size_t node = base + visitor.corner_offset[k];
            Index nidx = idx;
            for (int a = 0; a < spec.dim; ++a) nidx[a] += corner_bit(k, a);
            for (std::size_t q = 0; q < naux; ++q) corner_aux[k * naux + q] = aux[q](node, nidx);
          }
          aux_ready = true;
        }
        const int nv = spec.dim == 2 ? 2 : 3;
        for (const auto& t : tris) {
          std::array<Point, 3> p{};
          double mean = 0.0;
          for (int j = 0; j < nv; ++j) {
            const int e = t[j];
            const int ka = topo.edge_corners[e][0];
            const int kb = topo.edge_corners[e][1];
            const int axis = std::countr_zero(static_cast<unsigned>(ka ^ kb));
            const double fr = (level - cv[ka]) / (cv[kb] - cv[ka]);
            Index ia = idx;
            for (int a = 0; a < spec.dim; ++a) ia[a] += corner_bit(ka, a);
            p[j] = spec.point(ia);
            p[j][axis] += fr * spec.spacing;
            if (f) {
              for (std::size_t q = 0; q < naux; ++q) {
                const double a0 = corner_aux[ka * naux + q];
                vertex_aux[q] = a0 + fr * (corner_aux[kb * naux + q] - a0);
              }
              mean += f(order[lev], std::span<const double>(vertex_aux.data(), naux));
            } else {
              mean += 1.0;
            }
          }
          terms[lev].push_back(simplex_measure(spec.dim, p[0], p[1], p[2]) * mean / nv);
        }
      }
    }
    for (std::size_t k = 0; k < nlev; ++k) partial[order[k] * chunks + c] = parallel::pairwise_sum(terms[k]);
  });

  std::vector<double> out(nlev);
  for (std::size_t k = 0; k < nlev; ++k) {
    out[k] = parallel::pairwise_sum(std::span<const double>(partial).subspan(k * chunks, chunks));
  }
  return out;
}

ScalarField phi_field(const ScalarField& u, const DoubleWell& well) {
  ScalarField U(u.spec());
  const auto src = u.values();
  auto dst = U.values();
  parallel::for_chunks(u.size(), [&](std::size_t, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) dst[i] = well.phi(src[i]);
  });
  return U;
}

CoareaResult coarea_check(const ScalarField& U, int t_samples) {
  if (t_samples < 16) throw DomainError("coarea_check: needs at least 16 level samples");
  const GridSpec& spec = U.spec();
  require_stencil_shape(spec);
  CoareaResult r;
  // Level sets only exist inside the hull of the grid points, so the volume
  // side uses trapezoid weights over that same hull.
  r.lhs = spec.cell_volume() * parallel::sum(spec.size(), [&](std::size_t i) {
    const Index idx = spec.unflatten(i);
    double weight = 1.0;
    for (int a = 0; a < spec.dim; ++a) {
      if (idx[a] == 0 || idx[a] + 1 == spec.dims[a]) weight *= 0.5;
    }
    return weight * std::sqrt(norm2(gradient_at(spec, U.values(), i, idx)));
  });
  const auto [lo_it, hi_it] = std::minmax_element(U.values().begin(), U.values().end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!(hi > lo)) {
    r.lhs = r.rhs = r.gap = 0.0;
    return r;
  }
  const double dt = (hi - lo) / t_samples;
  std::vector<double> levels(t_samples);
  for (int k = 0; k < t_samples; ++k) levels[k] = lo + (k + 0.5) * dt;
  const auto per = level_integrals(U, levels);
  r.rhs = dt * parallel::pairwise_sum(per);
  r.gap = r.lhs > 0.0 ? std::abs(r.lhs - r.rhs) / r.lhs : 0.0;
  return r;
}

double per_slice_mm(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                    double epsilon, double t) {
  require_same_spec(u.spec(), v.spec(), "per_slice_mm");
  require_stencil_shape(u.spec());
  const ScalarField U = phi_field(u, well);
  const GridSpec& spec = u.spec();
  const NodeFunction density = [&](std::size_t flat, const Index& idx) {
    const Point g = tangential_gradient_at(spec, v.values(), u.values(), flat, idx);
    return well.value(v[flat]) / epsilon + 0.5 * epsilon * norm2(g);
  };
  const std::array<double, 1> level{t};
  const std::array<NodeFunction, 1> aux{density};
  return level_integrals(U, level, aux,
                         [](std::size_t, std::span<const double> a) { return a[0]; })[0];
}

double equidistribution_defect(const ScalarField& u, const DoubleWell& well, double epsilon,
                               int levels) {
  require_stencil_shape(u.spec());
  const GridSpec& spec = u.spec();
  const double dt = 2.0 / levels;
  std::vector<double> ts(levels);
  std::vector<double> target(levels);
  for (int k = 0; k < levels; ++k) {
    ts[k] = -1.0 + (k + 0.5) * dt;
    target[k] = std::sqrt(2.0 * well.value(ts[k]));
  }
  const std::array<NodeFunction, 1> aux{[&](std::size_t flat, const Index& idx) {
    return epsilon * std::sqrt(norm2(gradient_at(spec, u.values(), flat, idx)));
  }};
  const auto per = level_integrals(u, ts, aux, [&](std::size_t k, std::span<const double> a) {
    return std::abs(a[0] - target[k]);
  });
  return dt * parallel::pairwise_sum(per);
}

double TestFunction::operator()(const Point& x, double s) const {
  if (power < 0) return 0.0;
  const double r2 = norm2({x[0] - center[0], x[1] - center[1], x[2] - center[2]});
  const double c = std::clamp(s, -2.0, 2.0);
  double pw = 1.0;
  for (int k = 0; k < power; ++k) pw *= c;
  return std::exp(-0.5 * r2) * pw;
}

TestFunction TestFunction::zero() {
  TestFunction t;
  t.id = "zero";
  t.power = -1;
  return t;
}

std::vector<TestFunction> builtin_test_functions() {
  std::vector<TestFunction> out;
  const std::array<Point, 2> centers{Point{0.0, 0.0, 0.0}, Point{0.5, 0.0, 0.0}};
  for (std::size_t c = 0; c < centers.size(); ++c) {
    for (int m = 0; m <= 2; ++m) {
      TestFunction t;
      t.id = "c" + std::to_string(c) + "_m" + std::to_string(m);
      t.center = centers[c];
      t.power = m;
      out.push_back(t);
    }
  }
  return out;
}

namespace {

double eval_test(const TestFunction& phi, const Point& x, double s) {
  return phi.power < 0 ? 0.0 : phi(x, s);
}

}  // namespace

nlohmann::json MfPairResult::to_json() const {
  return {{"id", id},
          {"grad_version", grad_version},
          {"mu_version", mu_version},
          {"reference", reference},
          {"gap", gap},
          {"mu_gap", mu_gap},
          {"sup_phi", sup_phi},
          {"discrepancy_l1", discrepancy},
          {"version_difference", version_difference},
          {"inequality_holds", inequality_holds}};
}

void gauss_legendre(int n, double a, double b, std::vector<double>& nodes,
                    std::vector<double>& weights) {
  nodes.assign(n, 0.0);
  weights.assign(n, 0.0);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    nodes[i] = mid - half * z;
    nodes[n - 1 - i] = mid + half * z;
    weights[i] = weights[n - 1 - i] = 2.0 * half / ((1.0 - z * z) * dp * dp);
  }
}

double reference_integral(const Geometry& g, const DoubleWell& well, const TestFunction& phi) {
  if (phi.power < 0) return 0.0;
  const double R = g.radius();
  const Point& c = g.center();
  std::vector<double> terms;
  std::vector<double> nodes;
  std::vector<double> weights;
  switch (g.kind()) {
    case Geometry::Kind::Sphere3D: {
      constexpr int kAzimuths = 1024;
      const double dpsi = 2.0 * std::numbers::pi / kAzimuths;
      auto piece = [&](double t0, double t1, int n, double s) {
        gauss_legendre(n, t0, t1, nodes, weights);
        for (int i = 0; i < n; ++i) {
          const double st = std::sin(nodes[i]);
          const double ct = std::cos(nodes[i]);
          for (int j = 0; j < kAzimuths; ++j) {
            const double psi = (j + 0.5) * dpsi;
            const Point x{c[0] + R * st * std::cos(psi), c[1] + R * st * std::sin(psi), c[2] + R * ct};
            terms.push_back(weights[i] * dpsi * R * R * st * phi(x, s));
          }
        }
      };
      if (g.split().kind == PhaseSplit::Kind::Cap3D) {
        piece(0.0, g.split().theta0, 256, 1.0);
        piece(g.split().theta0, std::numbers::pi, 256, -1.0);
      } else {
        piece(0.0, std::numbers::pi, 512, 1.0);
      }
      break;
    }
    case Geometry::Kind::Disk2D: {
      auto piece = [&](double a0, double a1, int n, double s) {
        gauss_legendre(n, a0, a1, nodes, weights);
        for (int i = 0; i < n; ++i) {
          const Point x{c[0] + R * std::cos(nodes[i]), c[1] + R * std::sin(nodes[i]), 0.0};
          terms.push_back(weights[i] * R * phi(x, s));
        }
      };
      if (g.split().kind == PhaseSplit::Kind::TwoArcs2D) {
        const double a1 = g.split().alpha1;
        const double a2 = g.split().alpha2;
        piece(a1, a2, 2048, 1.0);
        piece(a2, a1 + 2.0 * std::numbers::pi, 2048, -1.0);
      } else {
        piece(0.0, 2.0 * std::numbers::pi, 4096, 1.0);
      }
      break;
    }
    case Geometry::Kind::Plane1DInterface:
      throw ConfigError("reference_integral: unsupported for the planar interface");
  }
  return well.sigma() * parallel::pairwise_sum(terms);
}

std::vector<MfPairResult> mf_pair_diagnostics(const ScalarField& u, const ScalarField& v,
                                              const DoubleWell& well, double epsilon,
                                              std::span<const TestFunction> tests,
                                              const Geometry& reference) {
  require_same_spec(u.spec(), v.spec(), "mf_pair");
  const GridSpec& spec = u.spec();
  require_stencil_shape(spec);
  const std::size_t nt = tests.size();
  // Slots: grad_k, mu_k for each test, then |xi|.
  const auto sums = parallel::sum_many(spec.size(), 2 * nt + 1, [&](std::size_t i, std::span<double> out) {
    const Point g = gradient_at(spec, u.values(), i, spec.unflatten(i));
    const double g2 = norm2(g);
    const double w = well.value(u[i]);
    const double grad_part = 0.5 * epsilon * g2;
    const double pot_part = w / epsilon;
    const double coarea = std::sqrt(2.0 * w * g2);
    const double mm = grad_part + pot_part;
    const Point x = spec.point(i);
    for (std::size_t k = 0; k < nt; ++k) {
      const double ph = mm == 0.0 && coarea == 0.0 ? 0.0 : eval_test(tests[k], x, v[i]);
      out[2 * k] = ph * coarea;
      out[2 * k + 1] = ph * mm;
    }
    out[2 * nt] = std::abs(grad_part - pot_part);
  });
  std::vector<double> sup(nt, 0.0);
  {
    const std::size_t chunks = parallel::chunk_count(spec.size());
    std::vector<double> partial(chunks * nt, 0.0);
    parallel::for_chunks(spec.size(), [&](std::size_t c, std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const Point x = spec.point(i);
        for (std::size_t k = 0; k < nt; ++k) {
          auto& m = partial[c * nt + k];
          m = std::max(m, std::abs(eval_test(tests[k], x, v[i])));
        }
      }
    });
    for (std::size_t c = 0; c < chunks; ++c) {
      for (std::size_t k = 0; k < nt; ++k) sup[k] = std::max(sup[k], partial[c * nt + k]);
    }
  }
  const double vol = spec.cell_volume();
  const double disc = vol * sums[2 * nt];
  std::vector<MfPairResult> out;
  for (std::size_t k = 0; k < nt; ++k) {
    MfPairResult r;
    r.id = tests[k].id;
    r.grad_version = vol * sums[2 * k];
    r.mu_version = vol * sums[2 * k + 1];
    r.reference = reference_integral(reference, well, tests[k]);
    r.gap = std::abs(r.grad_version - r.reference);
    r.mu_gap = std::abs(r.mu_version - r.reference);
    r.sup_phi = sup[k];
    r.discrepancy = disc;
    r.version_difference = std::abs(r.mu_version - r.grad_version);
    r.inequality_holds = r.version_difference <= r.sup_phi * r.discrepancy + 1e-10 &&
                         std::abs(r.mu_gap - r.gap) <= r.sup_phi * r.discrepancy + 1e-10;
    out.push_back(r);
  }
  return out;
}

double mf_pair_gap(const ScalarField& u, const ScalarField& v, const DoubleWell& well, double epsilon,
                   const TestFunction& phi, const Geometry& reference) {
  const std::array<TestFunction, 1> one{phi};
  return mf_pair_diagnostics(u, v, well, epsilon, one, reference)[0].gap;
}

MfPairResult mu_version_gap(const ScalarField& u, const ScalarField& v, const DoubleWell& well,
                            double epsilon, const TestFunction& phi, const Geometry& reference) {
  const std::array<TestFunction, 1> one{phi};
  return mf_pair_diagnostics(u, v, well, epsilon, one, reference)[0];
}

double density_ratio(const ScalarField& u, const DoubleWell& well, double epsilon, const Point& x0,
                     double r) {
  const GridSpec& spec = u.spec();
  if (spec.dim != 3) throw DomainError("density_ratio: needs a 3D field");
  if (!(r > 0.0) || !(epsilon > 0.0)) throw DomainError("density_ratio: r and epsilon must be > 0");
  require_stencil_shape(spec);
  const double h = spec.spacing;
  std::array<std::size_t, 3> lo{};
  std::array<std::size_t, 3> hi{};
  for (int a = 0; a < 3; ++a) {
    const double box_lo = spec.origin[a] - 0.5 * h;
    const double box_hi = spec.origin[a] + (static_cast<double>(spec.dims[a]) - 0.5) * h;
    if (x0[a] - r < box_lo || x0[a] + r > box_hi) {
      throw DomainError("density_ratio: ball is not inside the grid box");
    }
    lo[a] = static_cast<std::size_t>(std::max(0.0, std::ceil((x0[a] - r - spec.origin[a]) / h)));
    hi[a] = std::min(spec.dims[a] - 1,
                     static_cast<std::size_t>(std::floor((x0[a] + r - spec.origin[a]) / h)));
  }
  std::vector<double> terms;
  for (std::size_t i = lo[0]; i <= hi[0]; ++i) {
    for (std::size_t j = lo[1]; j <= hi[1]; ++j) {
      for (std::size_t k = lo[2]; k <= hi[2]; ++k) {
        const Index idx{i, j, k};
        const Point x = spec.point(idx);
        const double d2 = norm2({x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]});
        if (d2 > r * r) continue;
        const std::size_t flat = spec.flatten(idx);
        const Point g = gradient_at(spec, u.values(), flat, idx);
        terms.push_back(0.5 * epsilon * norm2(g) + well.value(u[flat]) / epsilon);
      }
    }
  }
  const double mass = spec.cell_volume() * parallel::pairwise_sum(terms);
  return mass / (well.sigma() * std::numbers::pi * r * r);
}

}  // namespace memphase
