#pragma once

/// @file quadrature.hpp
/// @brief Adaptive Gauss–Kronrod (7/15) quadrature with interval bisection.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <queue>
#include <string>
#include <vector>

#include "value.hpp"

namespace vcalc {

struct QuadratureConfig {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  unsigned max_depth = 50;
  bool presplit = true;
  bool force_numeric = false;  // skip the symbolic antiderivative path

  void validate() const {
    if (!(abs_tol > 0) || !(rel_tol > 0)) throw std::invalid_argument("quadrature tolerances must be positive");
    if (max_depth < 10) throw std::invalid_argument("quadrature depth must be at least 10");
  }
};

struct QuadResult {
  double value = 0;
  double error = 0;
  bool ok = false;
  std::string message;
};

namespace detail {

// Kronrod 15-point nodes on [-1, 1] (non-negative half) and weights; the
// Gauss 7-point rule reuses the odd-indexed nodes.
inline constexpr std::array<double, 8> kXk{0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWk{0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg{0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  unsigned depth;
  bool operator<(const Segment& o) const { return error < o.error; }
};

/// One G7K15 panel. Returns false if f is not finite at a node.
inline bool gk15(const std::function<Value(double)>& f, double a, double b, double& value, double& error) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double gauss = 0, kron = 0;
  for (int i = 0; i < 8; ++i) {
    const double dx = h * kXk[i];
    double s;
    if (i == 7) {
      auto y = f(c).real();
      if (!y) return false;
      s = *y;
      kron += kWk[i] * s;
      gauss += kWg[3] * s;
      continue;
    }
    auto y1 = f(c - dx).real(), y2 = f(c + dx).real();
    if (!y1 || !y2) return false;
    s = *y1 + *y2;
    kron += kWk[i] * s;
    if (i % 2 == 1) gauss += kWg[i / 2] * s;
  }
  value = kron * h;
  error = std::fabs((kron - gauss) * h);
  return true;
}

}  // namespace detail

/// ∫_a^b f over an increasing list of cut points (a and b included).
inline QuadResult integrate_numeric(const std::function<Value(double)>& f, std::vector<double> cuts,
                                    const QuadratureConfig& cfg = {}) {
  using detail::Segment;
  QuadResult r;
  if (cuts.size() < 2) {
    r.ok = true;
    return r;
  }
  std::priority_queue<Segment> heap;
  double total = 0, err = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    Segment s{cuts[i], cuts[i + 1], 0, 0, 0};
    if (!detail::gk15(f, s.a, s.b, s.value, s.error)) {
      r.message = "integrand not finite on [" + std::to_string(s.a) + ", " + std::to_string(s.b) + "]";
      return r;
    }
    total += s.value;
    err += s.error;
    heap.push(s);
  }
  constexpr int kMaxSegments = 20000;
  int segments = static_cast<int>(heap.size());
  while (!heap.empty() && err > std::max(cfg.abs_tol, cfg.rel_tol * std::fabs(total))) {
    Segment s = heap.top();
    heap.pop();
    if (s.depth >= cfg.max_depth || segments >= kMaxSegments) {
      r.value = total;
      r.error = err;
      r.message = "no convergence within depth " + std::to_string(cfg.max_depth);
      return r;
    }
    const double m = 0.5 * (s.a + s.b);
    Segment l{s.a, m, 0, 0, s.depth + 1}, h{m, s.b, 0, 0, s.depth + 1};
    if (!detail::gk15(f, l.a, l.b, l.value, l.error) || !detail::gk15(f, h.a, h.b, h.value, h.error)) {
      r.message = "integrand not finite near " + std::to_string(m);
      return r;
    }
    total += l.value + h.value - s.value;
    err += l.error + h.error - s.error;
    heap.push(l);
    heap.push(h);
    ++segments;
  }
  // Recompute from the leaves to shed accumulated cancellation.
  double sum = 0, e = 0;
  while (!heap.empty()) {
    sum += heap.top().value;
    e += heap.top().error;
    heap.pop();
  }
  r.value = sum;
  r.error = e;
  r.ok = true;
  return r;
}

/// Oriented ∫_a^b with interior cut points; ∫_a^a = 0 and ∫_b^a = -∫_a^b.
inline QuadResult integrate_oriented(const std::function<Value(double)>& f, double a, double b,
                                     const std::vector<double>& interior, const QuadratureConfig& cfg = {}) {
  if (a == b) return {0.0, 0.0, true, {}};
  const bool flip = a > b;
  const double lo = flip ? b : a, hi = flip ? a : b;
  std::vector<double> cuts{lo};
  if (cfg.presplit)
    for (double c : interior)
      if (c > lo && c < hi) cuts.push_back(c);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  QuadResult r = integrate_numeric(f, cuts, cfg);
  if (flip) r.value = -r.value;
  return r;
}

}  // namespace vcalc
