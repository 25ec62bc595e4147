#pragma once
// Fixed-size linear algebra and finite differences used across the library.
//
// Vectors are row vectors. For matrices, A ⊗ B means AᵀB, so for two
// row vectors outer(u, v)(i, j) = u_i v_j. A Jacobian DF has one row per
// component of F and one column per coordinate: DF(k, i) = ∂F_k/∂x_i.

#include <array>
#include <cmath>
#include <functional>
#include <limits>

namespace hybridlens {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr double operator[](int i) const { return i == 0 ? x : y; }
  constexpr double& operator[](int i) { return i == 0 ? x : y; }

  constexpr Vec2 operator+(const Vec2& r) const { return {x + r.x, y + r.y}; }
  constexpr Vec2 operator-(const Vec2& r) const { return {x - r.x, y - r.y}; }
  constexpr Vec2 operator-() const { return {-x, -y}; }
  constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
  constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
  constexpr Vec2& operator+=(const Vec2& r) { x += r.x; y += r.y; return *this; }
  constexpr Vec2& operator-=(const Vec2& r) { x -= r.x; y -= r.y; return *this; }
  constexpr bool operator==(const Vec2&) const = default;
};

constexpr Vec2 operator*(double s, const Vec2& v) { return v * s; }
constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
constexpr double norm2(const Vec2& a) { return dot(a, a); }
/// a⊥ = (−a₂, a₁).
constexpr Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }
/// Scalar cross product a₁b₂ − a₂b₁.
constexpr double cross2(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](int i) { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3 operator+(const Vec3& r) const { return {x + r.x, y + r.y, z + r.z}; }
  constexpr Vec3 operator-(const Vec3& r) const { return {x - r.x, y - r.y, z - r.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr Vec2 xy() const { return {x, y}; }
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
constexpr Vec3 cross3(const Vec3& v, const Vec3& w) {
  return {v.y * w.z - v.z * w.y, v.z * w.x - v.x * w.z, v.x * w.y - v.y * w.x};
}
constexpr Vec3 lift(const Vec2& v, double z) { return {v.x, v.y, z}; }

/// A direction. Construction checks |v| = 1 to within kTolerance.
class UnitVec3 {
 public:
  static constexpr double kTolerance = 1e-12;

  /// Throws InvalidArgument when |v| differs from 1 by more than kTolerance.
  explicit UnitVec3(const Vec3& v);
  /// Normalizes v; throws InvalidArgument on a zero or non-finite vector.
  static UnitVec3 normalize(const Vec3& v);

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }
  double operator[](int i) const { return v_[i]; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }

 private:
  struct Unchecked {};
  UnitVec3(const Vec3& v, Unchecked) : v_(v) {}
  Vec3 v_;
};

struct Mat2 {
  std::array<std::array<double, 2>, 2> e{};

  constexpr double operator()(int i, int j) const { return e[i][j]; }
  constexpr double& operator()(int i, int j) { return e[i][j]; }

  static constexpr Mat2 zero() { return {}; }
  static constexpr Mat2 identity() { return from(1.0, 0.0, 0.0, 1.0); }
  static constexpr Mat2 diag(double a, double b) { return from(a, 0.0, 0.0, b); }
  static constexpr Mat2 from(double a00, double a01, double a10, double a11) {
    Mat2 m;
    m.e = {{{a00, a01}, {a10, a11}}};
    return m;
  }

  constexpr Mat2 operator+(const Mat2& r) const {
    return from(e[0][0] + r.e[0][0], e[0][1] + r.e[0][1], e[1][0] + r.e[1][0], e[1][1] + r.e[1][1]);
  }
  constexpr Mat2 operator-(const Mat2& r) const {
    return from(e[0][0] - r.e[0][0], e[0][1] - r.e[0][1], e[1][0] - r.e[1][0], e[1][1] - r.e[1][1]);
  }
  constexpr Mat2 operator*(double s) const {
    return from(e[0][0] * s, e[0][1] * s, e[1][0] * s, e[1][1] * s);
  }
  constexpr Mat2 operator*(const Mat2& r) const {
    return from(e[0][0] * r.e[0][0] + e[0][1] * r.e[1][0], e[0][0] * r.e[0][1] + e[0][1] * r.e[1][1],
                e[1][0] * r.e[0][0] + e[1][1] * r.e[1][0], e[1][0] * r.e[0][1] + e[1][1] * r.e[1][1]);
  }
  /// Column action M vᵀ.
  constexpr Vec2 operator*(const Vec2& v) const {
    return {e[0][0] * v.x + e[0][1] * v.y, e[1][0] * v.x + e[1][1] * v.y};
  }
  constexpr bool operator==(const Mat2&) const = default;
  constexpr Mat2 transpose() const { return from(e[0][0], e[1][0], e[0][1], e[1][1]); }
  constexpr Mat2 sym() const { return (*this + transpose()) * 0.5; }
  constexpr double det() const { return e[0][0] * e[1][1] - e[0][1] * e[1][0]; }
  constexpr double trace() const { return e[0][0] + e[1][1]; }
  double frobenius() const {
    return std::sqrt(e[0][0] * e[0][0] + e[0][1] * e[0][1] + e[1][0] * e[1][0] + e[1][1] * e[1][1]);
  }
  /// Throws SingularMatrix when det is exactly zero.
  Mat2 inverse() const;
};

constexpr Mat2 operator*(double s, const Mat2& m) { return m * s; }
/// Row action v M.
constexpr Vec2 row_times(const Vec2& v, const Mat2& m) {
  return {v.x * m(0, 0) + v.y * m(1, 0), v.x * m(0, 1) + v.y * m(1, 1)};
}
/// u ⊗ v = uᵀv.
constexpr Mat2 outer(const Vec2& u, const Vec2& v) {
  return Mat2::from(u.x * v.x, u.x * v.y, u.y * v.x, u.y * v.y);
}

/// 3×2 Jacobian of a map ℝ² → ℝ³.
struct Mat32 {
  std::array<std::array<double, 2>, 3> e{};

  constexpr double operator()(int k, int i) const { return e[k][i]; }
  constexpr double& operator()(int k, int i) { return e[k][i]; }
  /// ∂F/∂x_i as a 3-vector.
  constexpr Vec3 column(int i) const { return {e[0][i], e[1][i], e[2][i]}; }
  /// Upper 2×2 block (derivatives of the first two components).
  constexpr Mat2 top() const { return Mat2::from(e[0][0], e[0][1], e[1][0], e[1][1]); }
  constexpr Mat32 operator-(const Mat32& r) const {
    Mat32 m;
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 2; ++i) m.e[k][i] = e[k][i] - r.e[k][i];
    return m;
  }
  double max_abs() const {
    double out = 0.0;
    for (const auto& row : e)
      for (double v : row) out = std::max(out, std::abs(v));
    return out;
  }
};

/// Row vector (1×3) times a 3×2 matrix.
constexpr Vec2 row_times(const Vec3& v, const Mat32& m) {
  return {v.x * m(0, 0) + v.y * m(1, 0) + v.z * m(2, 0), v.x * m(0, 1) + v.y * m(1, 1) + v.z * m(2, 1)};
}
/// A ⊗ B = AᵀB for two 3×2 matrices.
constexpr Mat2 outer(const Mat32& a, const Mat32& b) {
  Mat2 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) m(i, j) = dot(a.column(i), b.column(j));
  return m;
}

/// Eigen-decomposition of a symmetric 2×2 matrix, lambda1 ≥ lambda2.
struct SymEigen2 {
  double lambda1{0.0};
  double lambda2{0.0};
  Vec2 v1{1.0, 0.0};
  Vec2 v2{0.0, 1.0};
};

/// Closed form; uses the symmetric part of m.
SymEigen2 sym_eigen(const Mat2& m);

/// Axis-aligned rectangle; the default covers the whole plane.
struct Box2 {
  Vec2 lo{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Vec2 hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};

  static Box2 plane() { return {}; }
  bool contains(const Vec2& p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  bool bounded() const { return std::isfinite(lo.x) && std::isfinite(lo.y) && std::isfinite(hi.x) && std::isfinite(hi.y); }
  double diameter() const { return norm(hi - lo); }
  Vec2 center() const { return (lo + hi) * 0.5; }
};

/// Central-difference stencil with per-axis steps. order is 2 or 4.
struct FDStencil {
  double h1{1e-5};
  double h2{1e-5};
  int order{2};

  /// h = max(1e-5, 1e-5·|x|), second order.
  static FDStencil gradient_default(const Vec2& x);
  /// h = max(1e-3, 1e-3·|x|), second order. Second differences divide by h²,
  /// so the gradient step would leave only ~1e-6 relative accuracy.
  static FDStencil hessian_default(const Vec2& x);
  static FDStencil uniform(double h, int order = 2) { return {h, h, order}; }

  /// Largest offset of any evaluation point along each axis.
  Vec2 reach() const { return order == 4 ? Vec2{2.0 * h1, 2.0 * h2} : Vec2{h1, h2}; }
};

using ScalarFn2 = std::function<double(const Vec2&)>;
using VectorFn2 = std::function<Vec2(const Vec2&)>;
using Vector3Fn2 = std::function<Vec3(const Vec2&)>;

/// Throws DomainViolation when the stencil around x leaves domain.
void require_stencil_inside(const Vec2& x, const FDStencil& stencil, const Box2& domain);

Vec2 fd_gradient(const ScalarFn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain = Box2::plane());
Mat2 fd_jacobian(const VectorFn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain = Box2::plane());
Mat32 fd_jacobian(const Vector3Fn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain = Box2::plane());
/// Symmetric; the mixed partial is the average of both orders.
Mat2 fd_hessian(const ScalarFn2& f, const Vec2& x, const FDStencil& stencil, const Box2& domain = Box2::plane());

/// ∂₁a₂ − ∂₂a₁ from a Jacobian.
constexpr double scalar_curl(const Mat2& jacobian) { return jacobian(1, 0) - jacobian(0, 1); }
double scalar_curl(const VectorFn2& a, const Vec2& x, const FDStencil& stencil, const Box2& domain = Box2::plane());

}  // namespace hybridlens
