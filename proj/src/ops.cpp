#include "tnet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "blas.hpp"

namespace tnet::ops {

using detail::col2im;
using detail::gemm;
using detail::im2col;

namespace {

template <typename T>
void require_same(const Shape& a, const Shape& b, const char* op) {
  if (a != b) throw ShapeError(std::string(op) + ": shape " + a.str() + " vs " + b.str());
}

template <typename T>
void add_into(Node<T>* node, const Tensor<T>& g) {
  if (node->requires_grad) node->accumulate(g);
}

}  // namespace

template <typename T>
void softmax_rows(T* m, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    T* row = m + static_cast<long>(r) * cols;
    const T mx = *std::max_element(row, row + cols);
    T total = 0;
    for (int j = 0; j < cols; ++j) {
      row[j] = std::exp(row[j] - mx);
      total += row[j];
    }
    for (int j = 0; j < cols; ++j) row[j] /= total;
  }
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  if (ws.c != xs.c || ws.h != ws.w) {
    throw ShapeError("conv2d: weight " + ws.str() + " incompatible with input " + xs.str());
  }
  if (bias.shape() != Shape{1, ws.n, 1, 1}) throw ShapeError("conv2d: bad bias shape");
  const int k = ws.h;
  const int out_h = (xs.h + 2 * pad - k) / stride + 1;
  const int out_w = (xs.w + 2 * pad - k) / stride + 1;
  if (out_h < 1 || out_w < 1) throw ShapeError("conv2d: input " + xs.str() + " too small");

  const int cout = ws.n;
  const int ckk = xs.c * k * k;
  const int p = out_h * out_w;
  const bool direct = k == 1 && stride == 1 && pad == 0;

  Tensor<T> out({xs.n, cout, out_h, out_w});
  std::vector<T> col(direct ? 0 : static_cast<std::size_t>(ckk) * p);
  const T* w = weight.value().data();
  const T* b = bias.value().data();
  for (int n = 0; n < xs.n; ++n) {
    const T* src = x.value().sample(n);
    if (!direct) {
      im2col(src, xs.c, xs.h, xs.w, k, stride, pad, out_h, out_w, col.data());
      src = col.data();
    }
    T* dst = out.sample(n);
    gemm(false, false, cout, p, ckk, T(1), w, ckk, src, p, T(0), dst, p);
    for (int c = 0; c < cout; ++c) {
      T* plane = dst + static_cast<long>(c) * p;
      for (int i = 0; i < p; ++i) plane[i] += b[c];
    }
  }

  return make_result<T>(std::move(out), {x, weight, bias}, [=](Node<T>& self) {
    const Tensor<T>& g = self.grad;
    std::vector<T> buf(direct ? 0 : static_cast<std::size_t>(ckk) * p);
    const T* wv = weight.value().data();
    if (bias.requires_grad()) {
      T* db = bias.node()->grad_buffer().data();
      for (int n = 0; n < xs.n; ++n) {
        const T* gn = g.sample(n);
        for (int c = 0; c < cout; ++c) {
          T acc = 0;
          for (int i = 0; i < p; ++i) acc += gn[static_cast<long>(c) * p + i];
          db[c] += acc;
        }
      }
    }
    if (weight.requires_grad()) {
      T* dw = weight.node()->grad_buffer().data();
      for (int n = 0; n < xs.n; ++n) {
        const T* src = x.value().sample(n);
        if (!direct) {
          im2col(src, xs.c, xs.h, xs.w, k, stride, pad, out_h, out_w, buf.data());
          src = buf.data();
        }
        gemm(false, true, cout, ckk, p, T(1), g.sample(n), p, src, p, T(1), dw, ckk);
      }
    }
    if (x.requires_grad()) {
      Tensor<T>& dx = x.node()->grad_buffer();
      for (int n = 0; n < xs.n; ++n) {
        if (direct) {
          gemm(true, false, xs.c, p, cout, T(1), wv, ckk, g.sample(n), p, T(1), dx.sample(n), p);
        } else {
          gemm(true, false, ckk, p, cout, T(1), wv, ckk, g.sample(n), p, T(0), buf.data(), p);
          col2im(buf.data(), xs.c, xs.h, xs.w, k, stride, pad, out_h, out_w, dx.sample(n));
        }
      }
    }
  });
}

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride,
                        int pad) {
  const Shape xs = x.shape();
  const Shape ws = weight.shape();
  if (ws.n != xs.c || ws.h != ws.w) {
    throw ShapeError("conv_transpose2d: weight " + ws.str() + " incompatible with input " +
                     xs.str());
  }
  if (bias.shape() != Shape{1, ws.c, 1, 1}) throw ShapeError("conv_transpose2d: bad bias shape");
  const int k = ws.h;
  const int cout = ws.c;
  const int out_h = (xs.h - 1) * stride - 2 * pad + k;
  const int out_w = (xs.w - 1) * stride - 2 * pad + k;
  if (out_h < 1 || out_w < 1) throw ShapeError("conv_transpose2d: degenerate output");
  if ((out_h + 2 * pad - k) / stride + 1 != xs.h || (out_w + 2 * pad - k) / stride + 1 != xs.w) {
    throw ShapeError("conv_transpose2d: geometry is not invertible for this stride/padding");
  }

  const int kk = cout * k * k;
  const int p = xs.h * xs.w;
  Tensor<T> out({xs.n, cout, out_h, out_w});
  std::vector<T> col(static_cast<std::size_t>(kk) * p);
  const T* w = weight.value().data();
  const T* b = bias.value().data();
  const long plane = static_cast<long>(out_h) * out_w;
  for (int n = 0; n < xs.n; ++n) {
    gemm(true, false, kk, p, xs.c, T(1), w, kk, x.value().sample(n), p, T(0), col.data(), p);
    T* dst = out.sample(n);
    col2im(col.data(), cout, out_h, out_w, k, stride, pad, xs.h, xs.w, dst);
    for (int c = 0; c < cout; ++c) {
      for (long i = 0; i < plane; ++i) dst[c * plane + i] += b[c];
    }
  }

  return make_result<T>(std::move(out), {x, weight, bias}, [=](Node<T>& self) {
    const Tensor<T>& g = self.grad;
    std::vector<T> gcol(static_cast<std::size_t>(kk) * p);
    if (bias.requires_grad()) {
      T* db = bias.node()->grad_buffer().data();
      for (int n = 0; n < xs.n; ++n) {
        const T* gn = g.sample(n);
        for (int c = 0; c < cout; ++c) {
          T acc = 0;
          for (long i = 0; i < plane; ++i) acc += gn[c * plane + i];
          db[c] += acc;
        }
      }
    }
    if (!weight.requires_grad() && !x.requires_grad()) return;
    for (int n = 0; n < xs.n; ++n) {
      im2col(g.sample(n), cout, out_h, out_w, k, stride, pad, xs.h, xs.w, gcol.data());
      if (x.requires_grad()) {
        gemm(false, false, xs.c, p, kk, T(1), weight.value().data(), kk, gcol.data(), p, T(1),
             x.node()->grad_buffer().sample(n), p);
      }
      if (weight.requires_grad()) {
        gemm(false, true, xs.c, kk, p, T(1), x.value().sample(n), p, gcol.data(), p, T(1),
             weight.node()->grad_buffer().data(), kk);
      }
    }
  });
}

template <typename T>
Var<T> relu(const Var<T>& x) {
  Tensor<T> out = x.value();
  for (T& v : out.vec()) v = v > T(0) ? v : T(0);
  return make_result<T>(std::move(out), {x}, [x](Node<T>& self) {
    Tensor<T> g = self.grad;
    const Tensor<T>& y = self.value;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(y[i] > T(0))) g[i] = T(0);
    }
    add_into(x.node(), g);
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same<T>(a.shape(), b.shape(), "add");
  Tensor<T> out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  return make_result<T>(std::move(out), {a, b}, [a, b](Node<T>& self) {
    add_into(a.node(), self.grad);
    add_into(b.node(), self.grad);
  });
}

template <typename T>
Var<T> scale(const Var<T>& x, T s) {
  Tensor<T> out = x.value();
  for (T& v : out.vec()) v *= s;
  return make_result<T>(std::move(out), {x}, [x, s](Node<T>& self) {
    Tensor<T> g = self.grad;
    for (T& v : g.vec()) v *= s;
    add_into(x.node(), g);
  });
}

template <typename T>
Var<T> scale_by(const Var<T>& x, const Var<T>& g) {
  if (g.value().size() != 1) throw ShapeError("scale_by: factor must be a scalar");
  const T s = g.value()[0];
  Tensor<T> out = x.value();
  for (T& v : out.vec()) v *= s;
  return make_result<T>(std::move(out), {x, g}, [x, g](Node<T>& self) {
    const T sv = g.value()[0];
    if (g.requires_grad()) {
      T acc = 0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) acc += self.grad[i] * x.value()[i];
      g.node()->accumulate(Tensor<T>(g.shape(), acc));
    }
    if (x.requires_grad()) {
      Tensor<T> dx = self.grad;
      for (T& v : dx.vec()) v *= sv;
      x.node()->accumulate(dx);
    }
  });
}

template <typename T>
Var<T> channel_affine(const Var<T>& x, const std::vector<T>& mul, const std::vector<T>& shift) {
  const Shape s = x.shape();
  if (mul.size() != static_cast<std::size_t>(s.c) || shift.size() != mul.size()) {
    throw ShapeError("channel_affine: coefficient count does not match channels");
  }
  Tensor<T> out = x.value();
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      T* p = out.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) p[i] = p[i] * mul[c] + shift[c];
    }
  }
  return make_result<T>(std::move(out), {x}, [x, mul, s](Node<T>& self) {
    Tensor<T> g = self.grad;
    const std::size_t pl = s.plane();
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        T* p = g.sample(n) + c * pl;
        for (std::size_t i = 0; i < pl; ++i) p[i] *= mul[c];
      }
    }
    add_into(x.node(), g);
  });
}

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  Shape s = parts.front().shape();
  int channels = 0;
  for (const auto& v : parts) {
    const Shape& ps = v.shape();
    if (ps.n != s.n || ps.h != s.h || ps.w != s.w) {
      throw ShapeError("concat_channels: " + ps.str() + " vs " + s.str());
    }
    channels += ps.c;
  }
  const Shape os{s.n, channels, s.h, s.w};
  Tensor<T> out(os);
  for (int n = 0; n < s.n; ++n) {
    T* dst = out.sample(n);
    for (const auto& v : parts) {
      const std::size_t count = v.shape().sample();
      std::copy_n(v.value().sample(n), count, dst);
      dst += count;
    }
  }
  return make_result<T>(std::move(out), parts, [parts, os](Node<T>& self) {
    for (int n = 0; n < os.n; ++n) {
      const T* src = self.grad.sample(n);
      for (const auto& v : parts) {
        const std::size_t count = v.shape().sample();
        if (v.requires_grad()) {
          T* dst = v.node()->grad_buffer().sample(n);
          for (std::size_t i = 0; i < count; ++i) dst[i] += src[i];
        }
        src += count;
      }
    }
  });
}

template <typename T>
Var<T> channel_fuse(const Var<T>& lateral, const Var<T>& vertical, const Var<T>& alpha,
                    const Var<T>& beta) {
  const Shape s = lateral.shape();
  require_same<T>(s, vertical.shape(), "channel_fuse");
  const Shape ws{1, s.c, 1, 1};
  if (alpha.shape() != ws || beta.shape() != ws) {
    throw ShapeError("channel_fuse: fusion vectors must have " + std::to_string(s.c) +
                     " entries");
  }
  Tensor<T> out(s);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      const T a = alpha.value()[c];
      const T b = beta.value()[c];
      const T* l = lateral.value().sample(n) + c * plane;
      const T* v = vertical.value().sample(n) + c * plane;
      T* o = out.sample(n) + c * plane;
      for (std::size_t i = 0; i < plane; ++i) o[i] = a * l[i] + b * v[i];
    }
  }
  return make_result<T>(std::move(out), {lateral, vertical, alpha, beta}, [=](Node<T>& self) {
    const Tensor<T>& g = self.grad;
    Tensor<T> dl(s), dv(s), da(ws), db(ws);
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        const std::size_t off = n * s.sample() + c * plane;
        const T a = alpha.value()[c];
        const T b = beta.value()[c];
        T sa = 0, sb = 0;
        for (std::size_t i = 0; i < plane; ++i) {
          const T gi = g[off + i];
          dl[off + i] = gi * a;
          dv[off + i] = gi * b;
          sa += gi * lateral.value()[off + i];
          sb += gi * vertical.value()[off + i];
        }
        da[c] += sa;
        db[c] += sb;
      }
    }
    add_into(lateral.node(), dl);
    add_into(vertical.node(), dv);
    add_into(alpha.node(), da);
    add_into(beta.node(), db);
  });
}

namespace {

// r = s * (d - rowsum(d * s)), the softmax Jacobian-vector product, in place on d.
template <typename T>
void softmax_backward_rows(const T* s, T* d, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const T* sr = s + static_cast<long>(r) * cols;
    T* dr = d + static_cast<long>(r) * cols;
    T dot = 0;
    for (int j = 0; j < cols; ++j) dot += dr[j] * sr[j];
    for (int j = 0; j < cols; ++j) dr[j] = sr[j] * (dr[j] - dot);
  }
}

}  // namespace

template <typename T>
Tensor<T> position_attention_matrix(const Tensor<T>& x, int sample) {
  const Shape s = x.shape();
  const int c = s.c;
  const int p = static_cast<int>(s.plane());
  Tensor<T> m({1, 1, p, p});
  const T* xv = x.sample(sample);
  gemm(true, false, p, p, c, T(1), xv, p, xv, p, T(0), m.data(), p);
  softmax_rows(m.data(), p, p);
  return m;
}

template <typename T>
Tensor<T> channel_attention_matrix(const Tensor<T>& x, int sample) {
  const Shape s = x.shape();
  const int c = s.c;
  const int p = static_cast<int>(s.plane());
  Tensor<T> m({1, 1, c, c});
  const T* xv = x.sample(sample);
  gemm(false, true, c, c, p, T(1), xv, p, xv, p, T(0), m.data(), c);
  softmax_rows(m.data(), c, c);
  return m;
}

template <typename T>
Var<T> position_attention_increment(const Var<T>& x) {
  const Shape s = x.shape();
  const int c = s.c;
  const int p = static_cast<int>(s.plane());
  Tensor<T> out(s);
  auto mats = std::make_shared<std::vector<Tensor<T>>>();
  for (int n = 0; n < s.n; ++n) {
    mats->push_back(position_attention_matrix(x.value(), n));
    gemm(false, true, c, p, p, T(1), x.value().sample(n), p, mats->back().data(), p, T(0),
         out.sample(n), p);
  }
  return make_result<T>(std::move(out), {x}, [x, mats, s, c, p](Node<T>& self) {
    if (!x.requires_grad()) return;
    Tensor<T> dx(s);
    std::vector<T> d(static_cast<std::size_t>(p) * p);
    for (int n = 0; n < s.n; ++n) {
      const T* xv = x.value().sample(n);
      const T* g = self.grad.sample(n);
      const T* sm = (*mats)[n].data();
      T* dxn = dx.sample(n);
      // inc = X S^T
      gemm(false, false, c, p, p, T(1), g, p, sm, p, T(0), dxn, p);
      gemm(true, false, p, p, c, T(1), g, p, xv, p, T(0), d.data(), p);
      softmax_backward_rows(sm, d.data(), p, p);
      // B = X^T X
      gemm(false, false, c, p, p, T(1), xv, p, d.data(), p, T(1), dxn, p);
      gemm(false, true, c, p, p, T(1), xv, p, d.data(), p, T(1), dxn, p);
    }
    x.node()->accumulate(dx);
  });
}

template <typename T>
Var<T> channel_attention_increment(const Var<T>& x) {
  const Shape s = x.shape();
  const int c = s.c;
  const int p = static_cast<int>(s.plane());
  Tensor<T> out(s);
  auto mats = std::make_shared<std::vector<Tensor<T>>>();
  for (int n = 0; n < s.n; ++n) {
    mats->push_back(channel_attention_matrix(x.value(), n));
    gemm(false, false, c, p, c, T(1), mats->back().data(), c, x.value().sample(n), p, T(0),
         out.sample(n), p);
  }
  return make_result<T>(std::move(out), {x}, [x, mats, s, c, p](Node<T>& self) {
    if (!x.requires_grad()) return;
    Tensor<T> dx(s);
    std::vector<T> d(static_cast<std::size_t>(c) * c);
    for (int n = 0; n < s.n; ++n) {
      const T* xv = x.value().sample(n);
      const T* g = self.grad.sample(n);
      const T* m = (*mats)[n].data();
      T* dxn = dx.sample(n);
      // inc = M X
      gemm(true, false, c, p, c, T(1), m, c, g, p, T(0), dxn, p);
      gemm(false, true, c, c, p, T(1), g, p, xv, p, T(0), d.data(), c);
      softmax_backward_rows(m, d.data(), c, c);
      // A = X X^T
      gemm(false, false, c, p, c, T(1), d.data(), c, xv, p, T(1), dxn, p);
      gemm(true, false, c, p, c, T(1), d.data(), c, xv, p, T(1), dxn, p);
    }
    x.node()->accumulate(dx);
  });
}

template <typename T>
Var<T> avg_pool2(const Var<T>& x) {
  const Shape s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) throw ShapeError("avg_pool2: odd spatial size " + s.str());
  const Shape os{s.n, s.c, s.h / 2, s.w / 2};
  Tensor<T> out(os);
  const Tensor<T>& xv = x.value();
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < os.h; ++y) {
        for (int xx = 0; xx < os.w; ++xx) {
          out.at(n, c, y, xx) = T(0.25) * (xv.at(n, c, 2 * y, 2 * xx) + xv.at(n, c, 2 * y, 2 * xx + 1) +
                                           xv.at(n, c, 2 * y + 1, 2 * xx) +
                                           xv.at(n, c, 2 * y + 1, 2 * xx + 1));
        }
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [x, s, os](Node<T>& self) {
    if (!x.requires_grad()) return;
    Tensor<T> dx(s);
    for (int n = 0; n < s.n; ++n) {
      for (int c = 0; c < s.c; ++c) {
        for (int y = 0; y < os.h; ++y) {
          for (int xx = 0; xx < os.w; ++xx) {
            const T g = T(0.25) * self.grad.at(n, c, y, xx);
            dx.at(n, c, 2 * y, 2 * xx) = g;
            dx.at(n, c, 2 * y, 2 * xx + 1) = g;
            dx.at(n, c, 2 * y + 1, 2 * xx) = g;
            dx.at(n, c, 2 * y + 1, 2 * xx + 1) = g;
          }
        }
      }
    }
    x.node()->accumulate(dx);
  });
}

template <typename T>
Var<T> max_pool2(const Var<T>& x) {
  const Shape s = x.shape();
  if (s.h % 2 != 0 || s.w % 2 != 0) throw ShapeError("max_pool2: odd spatial size " + s.str());
  const Shape os{s.n, s.c, s.h / 2, s.w / 2};
  Tensor<T> out(os);
  auto argmax = std::make_shared<std::vector<std::size_t>>(os.numel());
  const Tensor<T>& xv = x.value();
  std::size_t o = 0;
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < os.h; ++y) {
        for (int xx = 0; xx < os.w; ++xx, ++o) {
          const std::size_t base = ((static_cast<std::size_t>(n) * s.c + c) * s.h + 2 * y) * s.w + 2 * xx;
          std::size_t best = base;
          for (std::size_t cand : {base + 1, base + s.w, base + s.w + 1}) {
            if (xv[cand] > xv[best]) best = cand;
          }
          out[o] = xv[best];
          (*argmax)[o] = best;
        }
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [x, argmax](Node<T>& self) {
    if (!x.requires_grad()) return;
    Tensor<T> dx(x.shape());
    for (std::size_t i = 0; i < argmax->size(); ++i) dx[(*argmax)[i]] += self.grad[i];
    x.node()->accumulate(dx);
  });
}

template <typename T>
Var<T> sum(const Var<T>& x) {
  T acc = 0;
  for (T v : x.value().span()) acc += v;
  return make_result<T>(Tensor<T>({1, 1, 1, 1}, acc), {x}, [x](Node<T>& self) {
    add_into(x.node(), Tensor<T>(x.shape(), self.grad[0]));
  });
}

template <typename T>
Var<T> smooth_l1_loss(const Var<T>& pred, const Var<T>& gt) {
  const Shape s = pred.shape();
  require_same<T>(s, gt.shape(), "smooth_l1_loss");
  const T norm = T(1) / (static_cast<T>(s.n) * static_cast<T>(s.plane()));
  T acc = 0;
  for (std::size_t i = 0; i < s.numel(); ++i) {
    const T e = std::abs(pred.value()[i] - gt.value()[i]);
    acc += e < T(1) ? T(0.5) * e * e : e - T(0.5);
  }
  return make_result<T>(Tensor<T>({1, 1, 1, 1}, acc * norm), {pred, gt},
                        [pred, gt, norm](Node<T>& self) {
                          const T g0 = self.grad[0] * norm;
                          Tensor<T> d(pred.shape());
                          for (std::size_t i = 0; i < d.size(); ++i) {
                            const T diff = pred.value()[i] - gt.value()[i];
                            const T slope =
                                std::abs(diff) < T(1) ? diff : (diff > T(0) ? T(1) : T(-1));
                            d[i] = g0 * slope;
                          }
                          add_into(pred.node(), d);
                          if (gt.requires_grad()) {
                            for (T& v : d.vec()) v = -v;
                            gt.node()->accumulate(d);
                          }
                        });
}

template <typename T>
Var<T> normalized_sq_distance(const Var<T>& a, const Var<T>& b) {
  const Shape s = a.shape();
  require_same<T>(s, b.shape(), "normalized_sq_distance");
  const T norm = T(1) / (static_cast<T>(s.n) * static_cast<T>(s.sample()));
  T acc = 0;
  for (std::size_t i = 0; i < s.numel(); ++i) {
    const T d = a.value()[i] - b.value()[i];
    acc += d * d;
  }
  return make_result<T>(Tensor<T>({1, 1, 1, 1}, acc * norm), {a, b}, [a, b, norm](Node<T>& self) {
    const T g0 = T(2) * self.grad[0] * norm;
    Tensor<T> d(a.shape());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = g0 * (a.value()[i] - b.value()[i]);
    add_into(a.node(), d);
    if (b.requires_grad()) {
      for (T& v : d.vec()) v = -v;
      b.node()->accumulate(d);
    }
  });
}

#define TNET_INSTANTIATE(T)                                                                   \
  template void softmax_rows<T>(T*, int, int);                                                \
  template Var<T> conv2d<T>(const Var<T>&, const Var<T>&, const Var<T>&, int, int);           \
  template Var<T> conv_transpose2d<T>(const Var<T>&, const Var<T>&, const Var<T>&, int, int); \
  template Var<T> relu<T>(const Var<T>&);                                                     \
  template Var<T> add<T>(const Var<T>&, const Var<T>&);                                       \
  template Var<T> scale<T>(const Var<T>&, T);                                                 \
  template Var<T> scale_by<T>(const Var<T>&, const Var<T>&);                                  \
  template Var<T> channel_affine<T>(const Var<T>&, const std::vector<T>&,                     \
                                    const std::vector<T>&);                                   \
  template Var<T> concat_channels<T>(const std::vector<Var<T>>&);                             \
  template Var<T> channel_fuse<T>(const Var<T>&, const Var<T>&, const Var<T>&,                \
                                  const Var<T>&);                                             \
  template Var<T> position_attention_increment<T>(const Var<T>&);                             \
  template Var<T> channel_attention_increment<T>(const Var<T>&);                              \
  template Tensor<T> position_attention_matrix<T>(const Tensor<T>&, int);                     \
  template Tensor<T> channel_attention_matrix<T>(const Tensor<T>&, int);                      \
  template Var<T> avg_pool2<T>(const Var<T>&);                                                \
  template Var<T> max_pool2<T>(const Var<T>&);                                                \
  template Var<T> sum<T>(const Var<T>&);                                                      \
  template Var<T> smooth_l1_loss<T>(const Var<T>&, const Var<T>&);                            \
  template Var<T> normalized_sq_distance<T>(const Var<T>&, const Var<T>&);

TNET_INSTANTIATE(float)
TNET_INSTANTIATE(double)

}  // namespace tnet::ops
