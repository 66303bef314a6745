#pragma once

// Reference implementations for tests. Deliberately naive: plain arrays,
// explicit loops, no Eigen and nothing from the library under test.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;
using Mat4 = std::array<std::array<double, 4>, 4>;

inline Mat4 identity4() {
  Mat4 m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
  return m;
}

inline Mat4 rigid(const Mat3& r, const Vec3& t) {
  Mat4 m = identity4();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) m[i][j] = r[i][j];
    m[i][3] = t[i];
  }
  return m;
}

inline Mat4 mul(const Mat4& a, const Mat4& b) {
  Mat4 c{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Gauss-Jordan with partial pivoting; general 4x4, not the rigid shortcut.
inline Mat4 inverse(Mat4 a) {
  Mat4 inv = identity4();
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    std::swap(inv[col], inv[pivot]);
    const double d = a[col][col];
    for (int j = 0; j < 4; ++j) {
      a[col][j] /= d;
      inv[col][j] /= d;
    }
    for (int r = 0; r < 4; ++r) {
      if (r == col) continue;
      const double f = a[r][col];
      for (int j = 0; j < 4; ++j) {
        a[r][j] -= f * a[col][j];
        inv[r][j] -= f * inv[col][j];
      }
    }
  }
  return inv;
}

inline Vec3 apply(const Mat4& m, const Vec3& p) {
  double h[4] = {p[0], p[1], p[2], 1.0};
  double out[4] = {0, 0, 0, 0};
  for (int i = 0; i < 4; ++i)
    for (int k = 0; k < 4; ++k) out[i] += m[i][k] * h[k];
  return {out[0] / out[3], out[1] / out[3], out[2] / out[3]};
}

// K p with the homogeneous divide done last.
inline Vec2 project(double fx, double fy, double cx, double cy, const Vec3& p) {
  const double u = fx * p[0] + cx * p[2];
  const double v = fy * p[1] + cy * p[2];
  return {u / p[2], v / p[2]};
}

// Rodrigues' formula for a unit axis.
inline Mat3 rotation(Vec3 axis, double angle) {
  const double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
  for (double& a : axis) a /= n;
  const double c = std::cos(angle), s = std::sin(angle), C = 1 - c;
  const double x = axis[0], y = axis[1], z = axis[2];
  return {{{c + x * x * C, x * y * C - z * s, x * z * C + y * s},
           {y * x * C + z * s, c + y * y * C, y * z * C - x * s},
           {z * x * C - y * s, z * y * C + x * s, c + z * z * C}}};
}

// ---- recency-weighted fusion -------------------------------------------

inline double alpha(long n) {
  // written out from the schedule: 0.1 per step, 0 at N = 2, capped at 0.65
  static const double table[] = {0.0, 0.1, 0.0, 0.3, 0.4, 0.5, 0.6};
  if (n < 7) return table[n];
  return 0.65;
}

struct Obj {
  std::string id;
  double x, y;
};

inline std::vector<double> scores(const std::vector<Vec2>& gaze, const std::vector<Obj>& objs) {
  const long big_n = static_cast<long>(gaze.size()) - 1;
  const double a = alpha(big_n);
  std::vector<double> out;
  for (const Obj& o : objs) {
    double s = 0;
    for (long n = 0; n <= big_n; ++n) {
      const double dx = gaze[n][0] - o.x;
      const double dy = gaze[n][1] - o.y;
      s += std::exp(a * static_cast<double>(n - big_n)) * std::sqrt(dx * dx + dy * dy);
    }
    out.push_back(s);
  }
  return out;
}

// Index of the argmin, lowest id on exact ties.
inline std::size_t fuse(const std::vector<Vec2>& gaze, const std::vector<Obj>& objs) {
  const auto s = scores(gaze, objs);
  const double best = *std::min_element(s.begin(), s.end());
  std::optional<std::size_t> pick;
  for (std::size_t i = 0; i < objs.size(); ++i) {
    if (s[i] != best) continue;
    if (!pick || objs[i].id < objs[*pick].id) pick = i;
  }
  return *pick;
}

// ---- region counting ----------------------------------------------------

struct Region {
  std::string id;
  double x0, y0, x1, y1;
  int w = 0, h = 0;
  std::vector<std::uint8_t> mask;  // row-major, empty = use the box
};

inline bool inside(const Region& r, double x, double y) {
  if (!r.mask.empty()) {
    if (x < 0 || y < 0) return false;
    const long px = static_cast<long>(std::floor(x));
    const long py = static_cast<long>(std::floor(y));
    if (px >= r.w || py >= r.h) return false;
    return r.mask[static_cast<std::size_t>(py * r.w + px)] != 0;
  }
  return !(x < r.x0) && !(x > r.x1) && !(y < r.y0) && !(y > r.y1);
}

// Counts per region and the winner (most points, lowest id on ties); -1 if
// the best count is zero.
inline std::pair<std::vector<long>, long> align(const std::vector<Vec2>& pts, const std::vector<Region>& regions) {
  std::vector<long> counts(regions.size(), 0);
  for (std::size_t i = 0; i < regions.size(); ++i)
    for (const Vec2& p : pts)
      if (inside(regions[i], p[0], p[1])) ++counts[i];
  long best = -1;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (counts[i] == 0) continue;
    if (best < 0 || counts[i] > counts[best] || (counts[i] == counts[best] && regions[i].id < regions[best].id))
      best = static_cast<long>(i);
  }
  return {counts, best};
}

// ---- Gaussian helpers ---------------------------------------------------

inline double phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// P(x + e in [a, b]) for x uniform on [a, b], e ~ N(0, sigma^2); midpoint rule.
inline double jitter_inside_fraction(double a, double b, double sigma, int steps = 20000) {
  double acc = 0;
  const double h = (b - a) / steps;
  for (int i = 0; i < steps; ++i) {
    const double x = a + (i + 0.5) * h;
    acc += phi((b - x) / sigma) - phi((a - x) / sigma);
  }
  return acc * h / (b - a);
}

// Probability that nearest-neighbour selection on a regular grid keeps cell
// (col, row) of a cols x rows grid with spacing d under isotropic N(0, sigma^2)
// offset. Grid Voronoi cells are axis-aligned, so the axes factor.
inline double grid_keep_probability(int col, int row, int cols, int rows, double d, double sigma) {
  const auto axis = [&](int i, int n) {
    const double lo = i == 0 ? -std::numeric_limits<double>::infinity() : -d / 2;
    const double hi = i == n - 1 ? std::numeric_limits<double>::infinity() : d / 2;
    return (std::isinf(hi) ? 1.0 : phi(hi / sigma)) - (std::isinf(lo) ? 0.0 : phi(lo / sigma));
  };
  return axis(col, cols) * axis(row, rows);
}

// Nearest sample index to t; ties go to the earlier sample.
inline std::size_t nearest(const std::vector<double>& times, double t) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  return best;
}

}  // namespace oracle
