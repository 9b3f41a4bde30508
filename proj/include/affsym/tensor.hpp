#pragma once

// Small dense tensors with every index running over 0..n-1.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace affsym {

template <typename Scalar, int Rank>
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Eigen::Index n) : n_(n), data_(size_for(n), Scalar(0)) {}

  Eigen::Index dim() const { return n_; }

  template <typename... I>
  Scalar& operator()(I... idx) {
    static_assert(sizeof...(I) == Rank);
    return data_[offset(idx...)];
  }
  template <typename... I>
  const Scalar& operator()(I... idx) const {
    static_assert(sizeof...(I) == Rank);
    return data_[offset(idx...)];
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Tensor& operator+=(const Tensor& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  Tensor& operator*=(Scalar s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Scalar s, Tensor a) { return a *= s; }

 private:
  static std::size_t size_for(Eigen::Index n) {
    std::size_t s = 1;
    for (int r = 0; r < Rank; ++r) s *= static_cast<std::size_t>(n);
    return s;
  }
  template <typename... I>
  std::size_t offset(I... idx) const {
    std::size_t off = 0;
    ((off = off * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx)), ...);
    return off;
  }

  Eigen::Index n_ = 0;
  std::vector<Scalar> data_;
};

template <typename Scalar>
using Tensor3 = Tensor<Scalar, 3>;
template <typename Scalar>
using Tensor4 = Tensor<Scalar, 4>;

using Tensor3d = Tensor3<double>;
using Tensor4d = Tensor4<double>;

}  // namespace affsym
