#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

namespace memphase {

using Point = std::array<double, 3>;
using Index = std::array<std::size_t, 3>;

inline constexpr std::size_t kDefaultMemoryCap = std::size_t{1} << 31;
inline constexpr double kGradientFloor = 1e-12;

void set_memory_cap(std::size_t points);
std::size_t memory_cap();

/// Uniform isotropic cell-centred grid in 1, 2 or 3 dimensions. Unused
/// trailing axes have extent 1. Storage is row-major, last axis fastest.
struct GridSpec {
  int dim = 1;
  Index dims{1, 1, 1};
  double spacing = 1.0;
  Point origin{0.0, 0.0, 0.0};

  std::size_t size() const { return dims[0] * dims[1] * dims[2]; }
  double cell_volume() const;
  Index strides() const { return {dims[1] * dims[2], dims[2], 1}; }

  double coordinate(int axis, std::size_t i) const {
    return origin[axis] + static_cast<double>(i) * spacing;
  }
  Index unflatten(std::size_t flat) const;
  std::size_t flatten(const Index& idx) const {
    return (idx[0] * dims[1] + idx[1]) * dims[2] + idx[2];
  }
  Point point(const Index& idx) const;
  Point point(std::size_t flat) const { return point(unflatten(flat)); }

  /// Throws ConfigError unless 1 <= dim <= 3, extents positive, h > 0 and the
  /// point count fits the memory cap.
  void validate() const;

  /// Grid of the given dimension whose points are the cell centres of
  /// [lo, lo + dims*h].
  static GridSpec box(int dim, const Index& dims, double spacing, const Point& lo);

  bool operator==(const GridSpec&) const = default;
};

class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridSpec spec, double fill = 0.0);
  ScalarField(GridSpec spec, std::vector<double> values);

  /// Samples f at every grid point (parallel over chunks).
  static ScalarField sample(const GridSpec& spec, const std::function<double(const Point&)>& f);

  const GridSpec& spec() const { return spec_; }
  std::size_t size() const { return values_.size(); }
  // Spans into a temporary field would dangle, so rvalues have no view.
  std::span<const double> values() const& { return values_; }
  std::span<double> values() & { return values_; }
  std::span<const double> values() const&& = delete;
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

 private:
  GridSpec spec_;
  std::vector<double> values_;
};

using VectorField = std::vector<ScalarField>;

void require_same_spec(const GridSpec& a, const GridSpec& b, const char* what);
/// Stencil operators need at least three points along every active axis.
void require_stencil_shape(const GridSpec& spec);

// Pointwise stencils. Interior points use central differences; boundary
// points use one-sided second-order differences for first derivatives and
// the nearest interior second difference for second derivatives.
double partial_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                  const Index& idx, int axis);
double second_partial_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                         const Index& idx, int axis);
double laplacian_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                    const Index& idx);
Point gradient_at(const GridSpec& spec, std::span<const double> f, std::size_t flat,
                  const Index& idx);

VectorField gradient(const ScalarField& f);
ScalarField laplacian(const ScalarField& f);

/// Midpoint rule h^n * sum(values) with deterministic chunked pairwise
/// summation.
double integrate(const ScalarField& f);

/// grad v with its component along grad u / |grad u| removed. Where
/// |grad u| <= kGradientFloor the gradient is returned unprojected.
Point tangential_gradient_at(const GridSpec& spec, std::span<const double> v,
                             std::span<const double> u, std::size_t flat, const Index& idx,
                             bool* flagged = nullptr);

struct TangentialGradient {
  VectorField components;
  std::vector<std::uint8_t> flagged;
  std::size_t flagged_count = 0;
};

TangentialGradient tangential_gradient(const ScalarField& v, const ScalarField& u);

/// Field files: `<stem>.json` sidecar plus `<stem>.bin` little-endian binary64
/// payload.
inline constexpr int kFieldFormatVersion = 1;
void write_field(const ScalarField& f, const std::filesystem::path& stem);
ScalarField read_field(const std::filesystem::path& stem);

}  // namespace memphase
