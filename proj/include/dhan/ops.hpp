#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dhan/graph.hpp"
#include "dhan/rng.hpp"
#include "dhan/tensor.hpp"

// Differentiable primitives. Each op computes its forward value eagerly and,
// when any input requires a gradient, records its exact backward on the tape.
// Sparse ops keep a pointer to the adjacency they were given; the adjacency
// must outlive the tape.
namespace dhan::ops {

inline constexpr double kLeakySlope = 0.2;
inline constexpr double kLayerNormEps = 1e-5;

// X[n x d] * W[d x d']
Tensor linear(Tape& tape, const Tensor& x, const Tensor& w);
Tensor add(Tape& tape, const Tensor& a, const Tensor& b);
Tensor scalar_mul(Tape& tape, const Tensor& x, double c);
Tensor add_scalar(Tape& tape, const Tensor& x, double c);
// x * s for a 1x1 tensor s.
Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s);
// x[n x k] + b[1 x k] on every row.
Tensor add_row_broadcast(Tape& tape, const Tensor& x, const Tensor& b);
// Multiplies row i by the constant weights[i].
Tensor mul_rows(Tape& tape, const Tensor& x, std::span<const double> weights);

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope = kLeakySlope);
Tensor sigmoid(Tape& tape, const Tensor& x);
Tensor log(Tape& tape, const Tensor& x);

Tensor softmax_rows(Tape& tape, const Tensor& x);
Tensor log_softmax_rows(Tape& tape, const Tensor& x);
// Softmax over the entries of each row with mask != 0; masked entries are 0
// and a fully masked row is all zeros.
Tensor masked_softmax_rows(Tape& tape, const Tensor& x, std::span<const std::uint8_t> mask);

// Softmax of an m x 1 score column within segments [off[s], off[s+1]).
// Empty segments raise EmptySegment unless allow_empty is set.
Tensor segment_softmax(Tape& tape, const Tensor& scores, std::span<const std::uint32_t> offsets,
                       bool allow_empty = false);

// Per stored edge (i, j) of `adj`: s[i] + t[j]. s is rows x 1, t is cols x 1.
Tensor edge_pair_sum(Tape& tape, const Tensor& s, const Tensor& t, const CsrAdjacency& adj);
// Row i of the result is sum over edges (i, j) of w_ij * x[j].
Tensor spmm(Tape& tape, const Tensor& edge_weights, const Tensor& x, const CsrAdjacency& adj);

Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = kLayerNormEps);

Tensor concat_cols(Tape& tape, std::span<const Tensor> parts);
Tensor concat_rows(Tape& tape, std::span<const Tensor> parts);
// Rows [begin, end) of x.
Tensor row_slice(Tape& tape, const Tensor& x, std::size_t begin, std::size_t end);
Tensor gather_rows(Tape& tape, const Tensor& x, std::span<const std::uint32_t> index);
Tensor reshape(Tape& tape, const Tensor& x, std::size_t rows, std::size_t cols);

// out_i = sum_k coeffs[i, k] * parts[k]_i
Tensor weighted_sum_rows(Tape& tape, const Tensor& coeffs, std::span<const Tensor> parts);
// out_i = <a_i, b_i>, an n x 1 column.
Tensor rowwise_dot(Tape& tape, const Tensor& a, const Tensor& b);
// out_i = x[i, cols[i]], an n x 1 column.
Tensor pick(Tape& tape, const Tensor& x, std::span<const std::uint32_t> cols);

Tensor sum(Tape& tape, const Tensor& x);
Tensor mean(Tape& tape, const Tensor& x);

// Mean over rows of the summed per-entry binary cross-entropy with logits.
Tensor bce_with_logits(Tape& tape, const Tensor& logits, std::span<const double> targets);

// Inverted dropout: kept entries are scaled by 1/(1-rate). Identity when not
// training or rate == 0.
Tensor dropout(Tape& tape, const Tensor& x, double rate, Rng& rng, bool training);

}  // namespace dhan::ops
