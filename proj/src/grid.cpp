#include "hybridlens/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "hybridlens/errors.hpp"

namespace hybridlens {

int thread_count() {
  if (const char* env = std::getenv("HYBRIDLENS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

Grid2D::Grid2D(const Box2& box, int nx, int ny, PatchShape shape) : box_(box), nx_(nx), ny_(ny), shape_(shape) {
  if (nx < 2 || ny < 2) throw InvalidArgument("Grid2D: need at least 2 nodes per axis");
  if (!box.bounded() || !(box.hi.x > box.lo.x) || !(box.hi.y > box.lo.y)) {
    throw InvalidArgument("Grid2D: box must be bounded with hi > lo");
  }
  dx_ = (box.hi.x - box.lo.x) / (nx - 1);
  dy_ = (box.hi.y - box.lo.y) / (ny - 1);
  mask_.assign(size(), 0);
  for (int j = 0; j < ny_; ++j)
    for (int i = 0; i < nx_; ++i) mask_[index(i, j)] = contains(node(i, j)) ? 1 : 0;
}

bool Grid2D::contains(const Vec2& p) const {
  if (!box_.contains(p)) return false;
  if (shape_ == PatchShape::box) return true;
  const Vec2 c = box_.center();
  const double r = 0.5 * std::min(box_.hi.x - box_.lo.x, box_.hi.y - box_.lo.y);
  return norm2(p - c) <= r * r * (1.0 + 1e-12);
}

std::size_t Grid2D::active_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

std::optional<CellCoord> Grid2D::locate(const Vec2& p) const {
  if (!box_.contains(p)) return std::nullopt;
  const double fx = (p.x - box_.lo.x) / dx_;
  const double fy = (p.y - box_.lo.y) / dy_;
  CellCoord c;
  c.i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 2);
  c.j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 2);
  c.s = (p.x - x(c.i)) / (x(c.i + 1) - x(c.i));
  c.t = (p.y - y(c.j)) / (y(c.j + 1) - y(c.j));
  if (!active(c.i, c.j) || !active(c.i + 1, c.j) || !active(c.i, c.j + 1) || !active(c.i + 1, c.j + 1)) {
    return std::nullopt;
  }
  return c;
}

std::pair<int, int> Grid2D::nearest_node(const Vec2& p) const {
  const int i = std::clamp(static_cast<int>(std::lround((p.x - box_.lo.x) / dx_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::lround((p.y - box_.lo.y) / dy_)), 0, ny_ - 1);
  return {i, j};
}

ScalarGrid integrate_one_form(const Grid2D& g, const VectorFn2& omega, const Vec2& base, Axis first, int panels) {
  if (panels < 1) throw InvalidArgument("integrate_one_form: panels must be >= 1");
  auto step = [&](double value, const Vec2& from, const Vec2& to) {
    const Vec2 delta = (to - from) / static_cast<double>(panels);
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const Vec2 a = from + delta * static_cast<double>(p);
      const Vec2 m = a + delta * 0.5;
      const Vec2 b = a + delta;
      acc += (dot(omega(a), delta) + 4.0 * dot(omega(m), delta) + dot(omega(b), delta)) / 6.0;
    }
    return value + acc;
  };
  return staircase_sweep(g, base, 0.0, first, step);
}

}  // namespace hybridlens
