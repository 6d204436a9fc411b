#pragma once

// Globally adaptive Gauss-Kronrod (7/15) quadrature over a finite interval for
// any value type that forms a vector space (double, std::complex, Eigen types).

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <vector>

namespace dll::quad {

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5) and the centre.
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <class V>
struct Panel {
  double a, b;
  V value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

}  // namespace detail

struct Interval {
  double a, b;
};

template <class V>
struct Result {
  V value;
  double error = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::vector<Interval> panels;  // final subdivision, sorted by left endpoint
};

/// One 15-point Kronrod panel; `error` is the Kronrod-Gauss difference.
template <class V, class F, class Norm>
detail::Panel<V> gk15_panel(F& f, double a, double b, Norm& norm) {
  using namespace detail;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  V fc = f(c);
  V kron = fc * kWgk[7];
  V gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    V f1 = f(c - dx);
    V f2 = f(c + dx);
    V s = f1 + f2;
    kron = kron + s * kWgk[j];
    if (j % 2 == 1) gauss = gauss + s * kWg[j / 2];
  }
  kron = kron * h;
  gauss = gauss * h;
  V diff = kron - gauss;
  return {a, b, kron, norm(diff)};
}

/// Integrate f over [a, b] until error <= max(abs_tol, rel_tol * |I|) or
/// `max_panels` panels have been used. Optional breakpoints seed the panel set.
template <class F, class Norm>
auto integrate_with_norm(F&& f, double a, double b, double abs_tol, double rel_tol, Norm norm,
                         int max_panels = 2000, const std::vector<double>& breakpoints = {}) {
  using V = std::decay_t<decltype(f(a))>;
  std::priority_queue<detail::Panel<V>> heap;
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);

  Result<V> out;
  bool first = true;
  double err = 0.0;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    auto p = gk15_panel<V>(f, cuts[i], cuts[i + 1], norm);
    out.evaluations += 15;
    if (first) {
      out.value = p.value;
      first = false;
    } else {
      out.value = out.value + p.value;
    }
    err += p.error;
    heap.push(std::move(p));
  }
  int panels = static_cast<int>(heap.size());
  while (true) {
    const double tol = std::max(abs_tol, rel_tol * norm(out.value));
    if (err <= tol) {
      out.converged = true;
      break;
    }
    if (panels >= max_panels) break;
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {  // interval exhausted
      heap.push(worst);
      break;
    }
    auto left = gk15_panel<V>(f, worst.a, mid, norm);
    auto right = gk15_panel<V>(f, mid, worst.b, norm);
    out.evaluations += 30;
    out.value = out.value - worst.value + left.value + right.value;
    err += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
    ++panels;
  }
  // recompute the error sum to shed accumulated rounding in the running total
  err = 0.0;
  for (auto copy = heap; !copy.empty(); copy.pop()) err += copy.top().error;
  out.error = err;
  out.panels.reserve(heap.size());
  while (!heap.empty()) {
    out.panels.push_back({heap.top().a, heap.top().b});
    heap.pop();
  }
  std::sort(out.panels.begin(), out.panels.end(),
            [](const Interval& l, const Interval& r) { return l.a < r.a; });
  const double tol = std::max(abs_tol, rel_tol * norm(out.value));
  out.converged = err <= tol;
  return out;
}

template <class F>
Result<double> integrate(F&& f, double a, double b, double abs_tol, double rel_tol,
                         int max_panels = 2000, const std::vector<double>& breakpoints = {}) {
  return integrate_with_norm(std::forward<F>(f), a, b, abs_tol, rel_tol,
                             [](double v) { return std::abs(v); }, max_panels, breakpoints);
}

}  // namespace dll::quad
