#pragma once

// One-dimensional quadrature building blocks shared by the oracle and the
// local-SDP integral: Gauss-Legendre nodes of arbitrary order, a 7/15-point
// Gauss-Kronrod panel rule, a globally adaptive integrator whose panel
// evaluations can be farmed out to threads, and a deterministic parallel map.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include "asx/error.hpp"

namespace asx::quad {

using cplx = std::complex<double>;

/// Resolves a thread-count request; 0 means "all available cores".
inline unsigned resolve_threads(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Calls body(i) for i in [0, n). Each index is visited exactly once; callers
/// write into slot i so the result never depends on scheduling.
template <typename Body>
void parallel_for(std::size_t n, unsigned threads, Body&& body) {
  threads = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        body(i);
      } catch (...) {
        if (!failed.exchange(true)) first_error = std::current_exception();
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads - 1);
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  if (first_error) std::rethrow_exception(first_error);
}

struct Rule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

namespace detail {

// P_n(x) and P_n'(x) by the three-term recurrence, |x| < 1.
inline std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  if (n == 0) return {1.0, 0.0};
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on P_n).
inline Rule gauss_legendre(int n) {
  if (n < 1) throw ConfigError("gauss_legendre needs n >= 1");
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int iter = 0; iter < 100; ++iter) {
      const auto [p, dp] = detail::legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = detail::legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

// 7-point Gauss / 15-point Kronrod abscissae and weights (QUADPACK qk15).
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
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

inline constexpr int kPanelNodes = 15;

/// Maps the 15 Kronrod nodes onto [a, b], in ascending order.
inline std::array<double, kPanelNodes> kronrod_nodes(double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  std::array<double, kPanelNodes> x{};
  for (int j = 0; j < 7; ++j) {
    x[j] = c - h * kXgk[j];
    x[14 - j] = c + h * kXgk[j];
  }
  x[7] = c;
  return x;
}

struct PanelEstimate {
  cplx value;
  double error = 0;
};

/// Kronrod estimate and QUADPACK-style error from values at kronrod_nodes(a, b).
inline PanelEstimate kronrod_panel(double a, double b, std::span<const cplx, kPanelNodes> f) {
  const double h = 0.5 * (b - a);
  cplx k = kWgk[7] * f[7];
  cplx g = kWg[3] * f[7];
  double absk = kWgk[7] * std::abs(f[7]);
  for (int j = 0; j < 7; ++j) {
    const cplx pair = f[j] + f[14 - j];
    k += kWgk[j] * pair;
    absk += kWgk[j] * (std::abs(f[j]) + std::abs(f[14 - j]));
    if (j % 2 == 1) g += kWg[j / 2] * pair;
  }
  const cplx mean = 0.5 * k;
  double asc = kWgk[7] * std::abs(f[7] - mean);
  for (int j = 0; j < 7; ++j) asc += kWgk[j] * (std::abs(f[j] - mean) + std::abs(f[14 - j] - mean));
  asc *= std::abs(h);
  absk *= std::abs(h);
  double err = std::abs((k - g) * h);
  if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (absk > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * absk, err);
  return {k * h, err};
}

struct AdaptiveResult {
  cplx value;
  double error = 0;
  long evaluations = 0;
  int panels = 0;
  bool converged = false;
};

/// Vectorised integrand: fills out[i] = f(x[i]).
using BatchFn = std::function<void(std::span<const double> x, std::span<cplx> out)>;

struct AdaptiveOptions {
  double abs_tol = 0.0;
  double rel_tol = 0.0;
  int max_panels = 2000;
  int initial_panels = 1;
};

/// Globally adaptive Gauss-Kronrod integration of a complex integrand.
///
/// Each sweep bisects every panel whose error exceeds its length-proportional
/// share of the tolerance, then evaluates all new panels in one batch. Panels
/// are kept in left-to-right order and summed in that order, so the result
/// depends only on the integrand, never on how the batch is evaluated.
inline AdaptiveResult integrate_adaptive(const BatchFn& f, double a, double b, const AdaptiveOptions& opt) {
  struct Panel {
    double a, b;
    PanelEstimate est;
  };
  AdaptiveResult res;
  if (a == b) {
    res.converged = true;
    return res;
  }
  const double length = b - a;

  auto evaluate = [&](std::vector<std::pair<double, double>> const& spans) {
    std::vector<double> xs(spans.size() * kPanelNodes);
    for (std::size_t p = 0; p < spans.size(); ++p) {
      const auto nodes = kronrod_nodes(spans[p].first, spans[p].second);
      std::copy(nodes.begin(), nodes.end(), xs.begin() + p * kPanelNodes);
    }
    std::vector<cplx> vals(xs.size());
    f(xs, vals);
    res.evaluations += static_cast<long>(xs.size());
    std::vector<Panel> out;
    out.reserve(spans.size());
    for (std::size_t p = 0; p < spans.size(); ++p) {
      std::span<const cplx, kPanelNodes> fv(vals.data() + p * kPanelNodes, kPanelNodes);
      out.push_back({spans[p].first, spans[p].second, kronrod_panel(spans[p].first, spans[p].second, fv)});
    }
    return out;
  };

  const int n0 = std::max(1, std::min(opt.initial_panels, opt.max_panels));
  std::vector<std::pair<double, double>> init;
  for (int i = 0; i < n0; ++i) init.emplace_back(a + length * i / n0, i + 1 == n0 ? b : a + length * (i + 1) / n0);
  std::vector<Panel> panels = evaluate(init);

  for (;;) {
    cplx total = 0.0;
    double err = 0.0;
    for (const auto& p : panels) {
      total += p.est.value;
      err += p.est.error;
    }
    res.value = total;
    res.error = err;
    res.panels = static_cast<int>(panels.size());
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(total));
    if (err <= tol) {
      res.converged = true;
      return res;
    }
    std::vector<std::size_t> marked;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      const double share = tol * std::abs(panels[i].b - panels[i].a) / std::abs(length);
      const double mid = 0.5 * (panels[i].a + panels[i].b);
      const bool splittable = mid != panels[i].a && mid != panels[i].b &&
                              std::abs(panels[i].b - panels[i].a) > 1e-13 * std::abs(length);
      if (panels[i].est.error > share && splittable) marked.push_back(i);
    }
    if (marked.empty() || panels.size() + marked.size() > static_cast<std::size_t>(opt.max_panels)) return res;

    std::vector<std::pair<double, double>> halves;
    for (auto i : marked) {
      const double mid = 0.5 * (panels[i].a + panels[i].b);
      halves.emplace_back(panels[i].a, mid);
      halves.emplace_back(mid, panels[i].b);
    }
    auto fresh = evaluate(halves);
    std::vector<Panel> next;
    next.reserve(panels.size() + marked.size());
    std::size_t m = 0;
    for (std::size_t i = 0; i < panels.size(); ++i) {
      if (m < marked.size() && marked[m] == i) {
        next.push_back(fresh[2 * m]);
        next.push_back(fresh[2 * m + 1]);
        ++m;
      } else {
        next.push_back(panels[i]);
      }
    }
    panels = std::move(next);
  }
}

/// Convenience wrapper for a scalar integrand.
template <typename F>
AdaptiveResult integrate_adaptive_scalar(F&& fn, double a, double b, const AdaptiveOptions& opt) {
  BatchFn batch = [&](std::span<const double> x, std::span<cplx> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = fn(x[i]);
  };
  return integrate_adaptive(batch, a, b, opt);
}

}  // namespace asx::quad
