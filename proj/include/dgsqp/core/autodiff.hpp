#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dgsqp/core/dual.hpp"

namespace dgsqp::ad {

// Sweep width: derivatives are propagated kChunk directions at a time.
inline constexpr int kChunk = 8;
using D1 = Dual<double, kChunk>;
using D2 = Dual<D1, kChunk>;

template <class S>
std::vector<S> lift(const Eigen::VectorXd& x) {
  std::vector<S> xs(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) xs[static_cast<std::size_t>(i)] = S(x[i]);
  return xs;
}

// Gradient of f: R^n -> R given as a callable on std::vector<D1>.
template <class F>
Eigen::VectorXd gradient(F&& f, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::VectorXd g(n);
  auto xs = lift<D1>(x);
  for (int c0 = 0; c0 < n; c0 += kChunk) {
    const int w = std::min(kChunk, n - c0);
    for (int l = 0; l < w; ++l) xs[static_cast<std::size_t>(c0 + l)].d[l] = 1.0;
    D1 y = f(xs);
    for (int l = 0; l < w; ++l) {
      g[c0 + l] = y.d[l];
      xs[static_cast<std::size_t>(c0 + l)].d[l] = 0.0;
    }
  }
  return g;
}

// Jacobian of f: R^n -> R^m given as a callable on std::vector<D1>.
template <class F>
Eigen::MatrixXd jacobian(F&& f, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  auto xs = lift<D1>(x);
  Eigen::MatrixXd J;
  for (int c0 = 0; c0 < n; c0 += kChunk) {
    const int w = std::min(kChunk, n - c0);
    for (int l = 0; l < w; ++l) xs[static_cast<std::size_t>(c0 + l)].d[l] = 1.0;
    std::vector<D1> y = f(xs);
    if (J.size() == 0) J.resize(static_cast<Eigen::Index>(y.size()), n);
    for (std::size_t r = 0; r < y.size(); ++r)
      for (int l = 0; l < w; ++l) J(static_cast<Eigen::Index>(r), c0 + l) = y[r].d[l];
    for (int l = 0; l < w; ++l) xs[static_cast<std::size_t>(c0 + l)].d[l] = 0.0;
  }
  return J;
}

// Dense Hessian of f: R^n -> R given as a callable on std::vector<D2>.
template <class F>
Eigen::MatrixXd hessian(F&& f, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd H(n, n);
  auto xs = lift<D2>(x);
  for (int o0 = 0; o0 < n; o0 += kChunk) {
    const int ow = std::min(kChunk, n - o0);
    for (int l = 0; l < ow; ++l) xs[static_cast<std::size_t>(o0 + l)].d[l] = D1(1.0);
    for (int i0 = 0; i0 < n; i0 += kChunk) {
      const int iw = std::min(kChunk, n - i0);
      for (int l = 0; l < iw; ++l) xs[static_cast<std::size_t>(i0 + l)].v.d[l] = 1.0;
      D2 y = f(xs);
      for (int ol = 0; ol < ow; ++ol)
        for (int il = 0; il < iw; ++il) H(i0 + il, o0 + ol) = y.d[ol].d[il];
      for (int l = 0; l < iw; ++l) xs[static_cast<std::size_t>(i0 + l)].v.d[l] = 0.0;
    }
    for (int l = 0; l < ow; ++l) xs[static_cast<std::size_t>(o0 + l)].d[l] = D1(0.0);
  }
  return H;
}

}  // namespace dgsqp::ad
