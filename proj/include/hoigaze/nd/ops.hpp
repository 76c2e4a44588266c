#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "hoigaze/nd/graph.hpp"

namespace hoigaze::nd {

using Rng = std::mt19937_64;

// Elementwise.
Var add(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var tanh(Var a);

/// Sum of all elements, shape [1].
Var sum(Var a);

Var reshape(Var a, Shape shape);
/// 2-D transpose.
Var transpose(Var a);

/// Concatenation along `axis`; all other dimensions must agree.
Var concat(const std::vector<Var>& parts, std::size_t axis);
/// `length` entries of `axis` starting at `begin`.
Var slice(Var a, std::size_t axis, std::size_t begin, std::size_t length);

/// 2-D product, summed over the inner index in ascending order.
Var matmul(Var a, Var b);

/// Contracts `axis` of `x` with a matrix. With `transpose_m` false the
/// matrix is n x p and out[.., j, ..] = sum_k x[.., k, ..] * m[k, j];
/// otherwise it is p x n and out[.., j, ..] = sum_k m[j, k] * x[.., k, ..].
Var axis_product(Var x, Var m, std::size_t axis, bool transpose_m);

/// Kernel-3 convolution over time with one frame of zero padding on each
/// side. input C_in x T, kernel C_out x C_in x 3, bias C_out.
Var conv1d(Var input, Var kernel, Var bias);

/// Per column of a C x T input, normalises across the C channels and
/// applies the per-channel affine map.
Var layer_norm(Var input, Var gain, Var offset, double epsilon = 1e-5);

/// Max-subtracted softmax along `axis`.
Var softmax(Var a, std::size_t axis);

/// Inverted dropout. Identity when !training or rate == 0.
/// Throws ConfigError unless 0 <= rate < 1.
Var dropout(Var a, double rate, bool training, Rng& rng);

/// Mean over columns of -log softmax(logits[:, t])[labels[t]] for a
/// C x T logit map.
Var softmax_cross_entropy(Var logits, std::span<const std::size_t> labels);

/// Mean over columns of weights[t] * |pred[:, t] - target[:, t]|^2.
Var weighted_squared_error(Var pred, const NdArray& target, std::span<const double> weights);

/// Scales every column of a D x T array to unit length. Columns whose norm
/// is below `min_norm` are replaced by the matching column of `fallback`
/// and pass no gradient. `fallback_count` receives the number replaced.
Var unit_columns(Var a, const NdArray& fallback, double min_norm,
                 std::size_t* fallback_count = nullptr);

}  // namespace hoigaze::nd
