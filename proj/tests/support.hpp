#pragma once

// Shared helpers for the unit and acceptance tests: seeded tensors, scalar
// reference implementations and a central-difference gradient checker.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "tnet/autograd.hpp"
#include "tnet/rng.hpp"
#include "tnet/tensor.hpp"

namespace tnet::testing {

template <typename T>
Tensor<T> random_tensor(Shape s, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  Rng rng(seed);
  Tensor<T> t(s);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rng.uniform(lo, hi));
  return t;
}

template <typename T>
Var<T> random_var(Shape s, std::uint64_t seed, bool grad = false, double lo = -1.0, double hi = 1.0) {
  return Var<T>(random_tensor<T>(s, seed, lo, hi), grad);
}

/// Reference 2-D convolution: zero padding, (out, in, k, k) weights.
template <typename T>
Tensor<T> naive_conv2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, int stride, int pad) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();
  const int k = ws.h;
  const int oh = (xs.h + 2 * pad - k) / stride + 1;
  const int ow = (xs.w + 2 * pad - k) / stride + 1;
  Tensor<T> y(Shape{xs.n, ws.n, oh, ow});
  for (int n = 0; n < xs.n; ++n)
    for (int o = 0; o < ws.n; ++o)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) {
          double acc = b[o];
          for (int c = 0; c < xs.c; ++c)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int yy = i * stride - pad + u;
                const int xx = j * stride - pad + v;
                if (yy < 0 || xx < 0 || yy >= xs.h || xx >= xs.w) continue;
                acc += static_cast<double>(x.at(n, c, yy, xx)) * w.at(o, c, u, v);
              }
          y.at(n, o, i, j) = static_cast<T>(acc);
        }
  return y;
}

/// Reference transposed convolution by scattering, (in, out, k, k) weights.
template <typename T>
Tensor<T> naive_conv_transpose2d(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b,
                                 int stride, int pad) {
  const Shape xs = x.shape();
  const Shape ws = w.shape();
  const int k = ws.h;
  const int oh = (xs.h - 1) * stride - 2 * pad + k;
  const int ow = (xs.w - 1) * stride - 2 * pad + k;
  std::vector<double> acc(static_cast<std::size_t>(xs.n) * ws.c * oh * ow, 0.0);
  const auto idx = [&](int n, int o, int i, int j) {
    return ((static_cast<std::size_t>(n) * ws.c + o) * oh + i) * ow + j;
  };
  for (int n = 0; n < xs.n; ++n)
    for (int c = 0; c < xs.c; ++c)
      for (int i = 0; i < xs.h; ++i)
        for (int j = 0; j < xs.w; ++j)
          for (int o = 0; o < ws.c; ++o)
            for (int u = 0; u < k; ++u)
              for (int v = 0; v < k; ++v) {
                const int yy = i * stride - pad + u;
                const int xx = j * stride - pad + v;
                if (yy < 0 || xx < 0 || yy >= oh || xx >= ow) continue;
                acc[idx(n, o, yy, xx)] += static_cast<double>(x.at(n, c, i, j)) * w.at(c, o, u, v);
              }
  Tensor<T> y(Shape{xs.n, ws.c, oh, ow});
  for (int n = 0; n < xs.n; ++n)
    for (int o = 0; o < ws.c; ++o)
      for (int i = 0; i < oh; ++i)
        for (int j = 0; j < ow; ++j) y.at(n, o, i, j) = static_cast<T>(acc[idx(n, o, i, j)] + b[o]);
  return y;
}

template <typename T>
Tensor<T> naive_relu(Tensor<T> x) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::max(x[i], T(0));
  return x;
}

template <typename T>
Tensor<T> naive_concat(const std::vector<Tensor<T>>& parts) {
  const Shape s0 = parts.front().shape();
  int c = 0;
  for (const auto& p : parts) c += p.shape().c;
  Tensor<T> y(Shape{s0.n, c, s0.h, s0.w});
  for (int n = 0; n < s0.n; ++n) {
    int off = 0;
    for (const auto& p : parts) {
      for (int cc = 0; cc < p.shape().c; ++cc)
        for (int i = 0; i < s0.h; ++i)
          for (int j = 0; j < s0.w; ++j) y.at(n, off + cc, i, j) = p.at(n, cc, i, j);
      off += p.shape().c;
    }
  }
  return y;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  double max_abs_error = 0.0;
  double worst_analytic = 0.0;  // the pair behind max_rel_error
  double worst_numeric = 0.0;
  int checked = 0;
  int kink_fallbacks = 0;  // positions where no step size was stable
};

/// Compares analytic gradients of a scalar-valued function with numerical
/// derivatives at up to `per_input` seeded positions of every input.
/// The numerical value is a five-point stencil at the largest step h in
/// {eps, eps/10, eps/100} whose result agrees with the stencil at h/2 up to
/// rounding (no ReLU or |x| kink inside the stencil); otherwise the first
/// two-point central difference, for steps 1e-6 down to 1e-8, that is stable
/// under halving.
/// Relative error is |a - n| / max(|a|, |n|, floor).
inline GradCheckResult grad_check(const std::function<Var<double>()>& f,
                                  const std::vector<Var<double>>& inputs, int per_input = 12,
                                  double eps = 1e-3, double floor = 1e-9, std::uint64_t seed = 99) {
  for (auto v : inputs) v.zero_grad();
  Var<double> out = f();
  const double f0 = out.value()[0];
  backward(out);
  std::vector<Tensor<double>> analytic;
  for (const auto& v : inputs) {
    analytic.push_back(v.has_grad() ? v.grad() : Tensor<double>(v.shape()));
  }
  GradCheckResult r;
  Rng rng(seed);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Var<double> v = inputs[i];
    const std::size_t n = v.value().size();
    std::vector<std::size_t> positions;
    if (static_cast<std::size_t>(per_input) >= n) {
      for (std::size_t j = 0; j < n; ++j) positions.push_back(j);
    } else {
      for (int j = 0; j < per_input; ++j) positions.push_back(rng.below(n));
    }
    for (std::size_t j : positions) {
      double& slot = v.mutable_value()[j];
      const double saved = slot;
      const auto at = [&](double offset) {
        NoGradGuard guard;
        slot = saved + offset;
        return f().value()[0];
      };
      const auto five_point = [&](double h) {
        return (8 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12 * h);
      };
      // Largest step whose stencil agrees with the half step up to rounding.
      double numeric = 0.0;
      bool smooth = false;
      for (double h = eps; h >= eps / 100 && !smooth; h /= 10) {
        const double wide = five_point(h);
        const double narrow = five_point(h / 2);
        const double rounding = 1e-15 * std::max(std::abs(f0), 1.0) / h;
        if (std::abs(wide - narrow) <= 1e-7 * std::max(std::abs(wide), std::abs(narrow)) + 4 * rounding) {
          numeric = wide;
          smooth = true;
        }
      }
      // Kink close by: shrink a two-point difference until halving the step
      // no longer changes it beyond rounding.
      for (double h = 1e-6; h >= 1e-8 && !smooth; h /= 10) {
        const double wide = (at(h) - at(-h)) / (2 * h);
        const double narrow = (at(h / 2) - at(-h / 2)) / h;
        const double rounding = 1e-15 * std::max(std::abs(f0), 1.0) / h;
        numeric = narrow;
        if (std::abs(wide - narrow) <= 1e-6 * std::max(std::abs(wide), std::abs(narrow)) + 4 * rounding) {
          smooth = true;
        }
      }
      if (!smooth) ++r.kink_fallbacks;
      slot = saved;
      const double a = analytic[i][j];
      const double abs_err = std::abs(a - numeric);
      const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), floor});
      if (rel > r.max_rel_error) {
        r.max_rel_error = rel;
        r.worst_analytic = a;
        r.worst_numeric = numeric;
      }
      r.max_abs_error = std::max(r.max_abs_error, abs_err);
      ++r.checked;
    }
  }
  return r;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("tnet_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace tnet::testing
