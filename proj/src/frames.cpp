#include <cmath>

#include "affsym/tetrad.hpp"

namespace affsym {

namespace {

template <typename V>
using ScalarOf = typename std::decay_t<V>::Scalar;

template <typename S>
using Square = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <typename S>
Square<S> zeros(Eigen::Index n) {
  Square<S> E(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index k = 0; k < n; ++k) E(i, k) = S(0.0);
  return E;
}

FrameField coordinate_frame(Eigen::Index n, double c) {
  return analytic_frame(n, [n, c](const auto& x) {
    using S = ScalarOf<decltype(x)>;
    auto E = zeros<S>(n);
    for (Eigen::Index i = 0; i < n; ++i) E(i, i) = S(c);
    return E;
  });
}

// e^1 = dx, e^2 = exp(x) dy
FrameField exponential_2d(double c) {
  return analytic_frame(2, [c](const auto& x) {
    using S = ScalarOf<decltype(x)>;
    using std::exp;
    auto E = zeros<S>(2);
    E(0, 0) = S(c);
    E(1, 1) = c * exp(x(0));
    return E;
  });
}

// e_1 = d_x, e_2 = exp(x) d_y, so e^2 = exp(-x) dy
FrameField affine_line(double c) {
  return analytic_frame(2, [c](const auto& x) {
    using S = ScalarOf<decltype(x)>;
    using std::exp;
    auto E = zeros<S>(2);
    E(0, 0) = S(c);
    E(1, 1) = c * exp(-x(0));
    return E;
  });
}

// Euler angles (theta, phi, psi):
//   s1 = -sin psi dtheta + cos psi sin theta dphi
//   s2 =  cos psi dtheta + sin psi sin theta dphi
//   s3 =  dpsi + cos theta dphi
FrameField so3_left_invariant(double c) {
  return analytic_frame(3, [c](const auto& x) {
    using S = ScalarOf<decltype(x)>;
    using std::cos, std::sin;
    const S th = x(0), ps = x(2);
    auto E = zeros<S>(3);
    E(0, 0) = -c * sin(ps);
    E(0, 1) = c * cos(ps) * sin(th);
    E(1, 0) = c * cos(ps);
    E(1, 1) = c * sin(ps) * sin(th);
    E(2, 1) = c * cos(th);
    E(2, 2) = S(c);
    return E;
  });
}

}  // namespace

std::vector<std::string> builtin_frame_names() {
  return {"coordinate", "exponential-2d", "affine-line", "so3-leftinvariant"};
}

Eigen::Index builtin_frame_dimension(const std::string& name) {
  if (name == "coordinate") return 0;
  if (name == "exponential-2d" || name == "affine-line") return 2;
  if (name == "so3-leftinvariant") return 3;
  fail(ErrorKind::InvalidArgument, "unknown frame '" + name + "'");
}

FrameField builtin_frame(const std::string& name, Eigen::Index n, double scale) {
  if (!(scale > 0.0)) fail(ErrorKind::InvalidArgument, "frame scale must be positive");
  const auto fixed = builtin_frame_dimension(name);
  if (fixed == 0) {
    if (n < 1) fail(ErrorKind::InvalidArgument, "coordinate frame needs a positive dimension");
    return coordinate_frame(n, scale);
  }
  if (n != 0 && n != fixed) {
    fail(ErrorKind::InvalidArgument, "frame '" + name + "' is " + std::to_string(fixed) + "-dimensional");
  }
  if (name == "exponential-2d") return exponential_2d(scale);
  if (name == "affine-line") return affine_line(scale);
  return so3_left_invariant(scale);
}

}  // namespace affsym
