#pragma once
// Regular sampling grids over a rectangular or disk-shaped patch, and the
// staircase sweep used to integrate along axis-aligned paths.

#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "hybridlens/geometry.hpp"
#include "hybridlens/parallel.hpp"

namespace hybridlens {

enum class PatchShape { box, disk };

/// Location of a point inside a grid cell: the cell's lower-left node (i, j)
/// and local coordinates (s, t) ∈ [0, 1]².
struct CellCoord {
  int i{0};
  int j{0};
  double s{0.0};
  double t{0.0};
};

/// nx × ny nodes spanning box. With PatchShape::disk only nodes in the disk
/// inscribed in the box (centered, radius = half the shorter side) are active.
class Grid2D {
 public:
  Grid2D() = default;
  Grid2D(const Box2& box, int nx, int ny, PatchShape shape = PatchShape::box);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Box2& box() const { return box_; }
  PatchShape shape() const { return shape_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_); }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }

  double x(int i) const { return i == nx_ - 1 ? box_.hi.x : box_.lo.x + i * dx_; }
  double y(int j) const { return j == ny_ - 1 ? box_.hi.y : box_.lo.y + j * dy_; }
  Vec2 node(int i, int j) const { return {x(i), y(j)}; }
  Vec2 spacing() const { return {dx_, dy_}; }
  double diameter() const { return box_.diameter(); }

  /// Inside the patch (box, intersected with the disk for disk patches).
  bool contains(const Vec2& p) const;
  bool active(int i, int j) const { return mask_[index(i, j)] != 0; }
  std::size_t active_count() const;

  /// Cell containing p whose four corners are all active.
  std::optional<CellCoord> locate(const Vec2& p) const;
  /// Nearest node (not necessarily active).
  std::pair<int, int> nearest_node(const Vec2& p) const;

  bool operator==(const Grid2D& o) const {
    return nx_ == o.nx_ && ny_ == o.ny_ && shape_ == o.shape_ && box_.lo == o.box_.lo && box_.hi == o.box_.hi;
  }

 private:
  Box2 box_{{-1.0, -1.0}, {1.0, 1.0}};
  int nx_{2};
  int ny_{2};
  PatchShape shape_{PatchShape::box};
  double dx_{2.0};
  double dy_{2.0};
  std::vector<char> mask_;
};

/// Values sampled on the nodes of a grid; inactive nodes hold NaN.
template <class T>
struct GridField {
  Grid2D grid;
  std::vector<T> values;

  GridField() = default;
  GridField(const Grid2D& g, const T& fill) : grid(g), values(g.size(), fill) {}

  const T& at(int i, int j) const { return values[grid.index(i, j)]; }
  T& at(int i, int j) { return values[grid.index(i, j)]; }
};

using ScalarGrid = GridField<double>;
using VectorGrid = GridField<Vec2>;

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline VectorGrid nan_vector_grid(const Grid2D& g) { return VectorGrid(g, Vec2{kNaN, kNaN}); }
inline ScalarGrid nan_scalar_grid(const Grid2D& g) { return ScalarGrid(g, kNaN); }

/// Evaluates fn at every active node.
template <class T, class Fn>
GridField<T> sample(const Grid2D& g, const T& inactive, Fn&& fn) {
  GridField<T> out(g, inactive);
  parallel_for(static_cast<std::size_t>(g.ny()), [&](std::size_t j) {
    for (int i = 0; i < g.nx(); ++i)
      if (g.active(i, static_cast<int>(j))) out.at(i, static_cast<int>(j)) = fn(g.node(i, static_cast<int>(j)));
  });
  return out;
}

enum class Axis { x1, x2 };

/// Carries a scalar from base (value base_value) to every active node along
/// an axis-aligned staircase: first along the `first` axis through base (the
/// spine), then along the other axis. step(value, from, to) advances the
/// value across one straight segment; segments end at node coordinates.
/// Nodes not reachable without leaving the patch are left NaN. Branches off
/// the spine run in parallel.
template <class Step>
ScalarGrid staircase_sweep(const Grid2D& g, const Vec2& base, double base_value, Axis first, const Step& step) {
  ScalarGrid out = nan_scalar_grid(g);
  const bool along_x = first == Axis::x1;
  const int n_spine = along_x ? g.nx() : g.ny();
  const int n_branch = along_x ? g.ny() : g.nx();
  const double b_spine = along_x ? base.x : base.y;
  const double b_branch = along_x ? base.y : base.x;
  auto spine_coord = [&](int k) { return along_x ? g.x(k) : g.y(k); };
  auto branch_coord = [&](int k) { return along_x ? g.y(k) : g.x(k); };
  auto point = [&](double s, double b) { return along_x ? Vec2{s, b} : Vec2{b, s}; };
  auto node_index = [&](int ks, int kb) { return along_x ? g.index(ks, kb) : g.index(kb, ks); };

  if (!g.contains(base)) return out;

  // March from the base along one coordinate line, visiting node
  // coordinates in order of increasing distance on each side.
  auto march = [&](auto coord_of, int count, double start, double start_value, auto make_point, auto visit) {
    int up = 0;
    while (up < count && coord_of(up) < start) ++up;
    for (int dir = 0; dir < 2; ++dir) {
      Vec2 prev = make_point(start);
      double value = start_value;
      for (int k = dir == 0 ? up : up - 1; dir == 0 ? k < count : k >= 0; k += dir == 0 ? 1 : -1) {
        const Vec2 p = make_point(coord_of(k));
        if (!g.contains(p)) break;
        if (!(p == prev)) value = step(value, prev, p);
        prev = p;
        visit(k, value);
      }
    }
  };

  std::vector<double> spine(static_cast<std::size_t>(n_spine), kNaN);
  march(spine_coord, n_spine, b_spine, base_value, [&](double s) { return point(s, b_branch); },
        [&](int k, double v) { spine[static_cast<std::size_t>(k)] = v; });

  parallel_for(static_cast<std::size_t>(n_spine), [&](std::size_t ks_u) {
    const int ks = static_cast<int>(ks_u);
    if (std::isnan(spine[ks_u])) return;
    const double s = spine_coord(ks);
    march(branch_coord, n_branch, b_branch, spine[ks_u], [&](double b) { return point(s, b); },
          [&](int kb, double v) {
            const std::size_t idx = node_index(ks, kb);
            const int i = along_x ? ks : kb;
            const int j = along_x ? kb : ks;
            if (g.active(i, j)) out.values[idx] = v;
          });
  });
  return out;
}

/// Composite Simpson integral of a 1-form along the staircase paths:
/// value(node) = ∫ from base to node of ω · dx. Each segment is split into
/// `panels` Simpson panels.
ScalarGrid integrate_one_form(const Grid2D& g, const VectorFn2& omega, const Vec2& base, Axis first, int panels = 1);

}  // namespace hybridlens
