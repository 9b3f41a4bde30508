#pragma once

// Adaptive Gauss-Kronrod (7, 15) quadrature on finite intervals.

#include <array>
#include <cmath>
#include <queue>
#include <vector>

#include "affsym/error.hpp"

namespace affsym {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

struct QuadratureOptions {
  double abs_tol = 1e-13;
  double rel_tol = 1e-13;
  int max_subdivisions = 2000;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes 1, 3, 5, 7.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <typename F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kKronrodNodes[i];
    const double sum = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * sum;
  }
  return {a, b, kronrod * h, std::abs((kronrod - gauss) * h)};
}

}  // namespace detail

/// Integrates f over [a, b]. Throws QuadratureFailure if the tolerance is not
/// met within the subdivision budget or the integrand is not finite.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, const QuadratureOptions& opt = {}) {
  QuadratureResult out;
  if (a == b) return out;
  int evals = 0;
  auto counted = [&](double x) {
    ++evals;
    return f(x);
  };
  std::priority_queue<detail::Panel> panels;
  panels.push(detail::gk15(counted, a, b));
  double value = panels.top().value, error = panels.top().error;

  for (int k = 0; k < opt.max_subdivisions; ++k) {
    if (!std::isfinite(value)) fail(ErrorKind::QuadratureFailure, "quadrature: integrand is not finite");
    if (error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
      return {value, error, evals};
    }
    const auto worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    const auto left = detail::gk15(counted, worst.a, mid);
    const auto right = detail::gk15(counted, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to drop accumulated rounding in the running totals.
  value = error = 0.0;
  for (; !panels.empty(); panels.pop()) {
    value += panels.top().value;
    error += panels.top().error;
  }
  if (error <= std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) return {value, error, evals};
  fail(ErrorKind::QuadratureFailure,
       "quadrature: error estimate " + std::to_string(error) + " above tolerance after subdivision budget");
}

}  // namespace affsym
