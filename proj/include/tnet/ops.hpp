#pragma once

// Differentiable tensor operations. All convolutions use zero padding and
// PyTorch weight layouts: conv2d weights are (out, in, k, k), transposed
// convolution weights are (in, out, k, k), biases are (1, out, 1, 1).

#include <vector>

#include "tnet/autograd.hpp"

namespace tnet::ops {

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride, int pad);

template <typename T>
Var<T> conv_transpose2d(const Var<T>& x, const Var<T>& weight, const Var<T>& bias, int stride,
                        int pad);

template <typename T>
Var<T> relu(const Var<T>& x);

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);

/// x * s for a constant s.
template <typename T>
Var<T> scale(const Var<T>& x, T s);

/// x * g where g is a learnable (1, 1, 1, 1) scalar.
template <typename T>
Var<T> scale_by(const Var<T>& x, const Var<T>& g);

/// Per-channel constant affine map: y[n,c] = x[n,c] * mul[c] + shift[c].
template <typename T>
Var<T> channel_affine(const Var<T>& x, const std::vector<T>& mul, const std::vector<T>& shift);

template <typename T>
Var<T> concat_channels(const std::vector<Var<T>>& parts);

/// alpha[c] * lateral + beta[c] * vertical, alpha/beta of shape (1, C, 1, 1).
template <typename T>
Var<T> channel_fuse(const Var<T>& lateral, const Var<T>& vertical, const Var<T>& alpha,
                    const Var<T>& beta);

/// Per sample, with X the C x P reshape of x and S = softmax_rows(X^T X),
/// returns X S^T reshaped back to (C, H, W).
template <typename T>
Var<T> position_attention_increment(const Var<T>& x);

/// Per sample, with M = softmax_rows(X X^T), returns M X.
template <typename T>
Var<T> channel_attention_increment(const Var<T>& x);

/// The P x P spatial attention matrix of one sample, shape (1, 1, P, P).
template <typename T>
Tensor<T> position_attention_matrix(const Tensor<T>& x, int sample);

/// The C x C channel attention matrix of one sample, shape (1, 1, C, C).
template <typename T>
Tensor<T> channel_attention_matrix(const Tensor<T>& x, int sample);

/// 2x2 average pooling with stride 2; H and W must be even.
template <typename T>
Var<T> avg_pool2(const Var<T>& x);

/// 2x2 max pooling with stride 2; H and W must be even.
template <typename T>
Var<T> max_pool2(const Var<T>& x);

template <typename T>
Var<T> sum(const Var<T>& x);

/// Per-image mean over pixels of the channel sum of smooth-L1(|pred - gt|),
/// averaged over the batch. Returns a (1, 1, 1, 1) scalar.
template <typename T>
Var<T> smooth_l1_loss(const Var<T>& pred, const Var<T>& gt);

/// Per-image ||a - b||^2 / (C H W), averaged over the batch.
template <typename T>
Var<T> normalized_sq_distance(const Var<T>& a, const Var<T>& b);

/// Row-wise softmax of a rows x cols matrix, in place.
template <typename T>
void softmax_rows(T* m, int rows, int cols);

}  // namespace tnet::ops
