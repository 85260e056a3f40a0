#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

// Dense and sparse compute kernels behind the differentiable ops. Two
// implementations with identical signatures:
//   serial::  straightforward single-threaded loops, kept as the reference
//   omp::     OpenMP row-parallel versions used by the ops
// Each output element is produced by one thread with the same reduction
// order as the serial loop, so both namespaces return bitwise-equal results
// regardless of the thread count.

namespace dhan::kernels {

using Offsets = std::span<const std::uint32_t>;
using Indices = std::span<const std::uint32_t>;
using In = std::span<const double>;
using Out = std::span<double>;

#define DHAN_KERNEL_DECLS                                                                  \
  /* C[m x n] = A[m x k] * B[k x n] */                                                     \
  void gemm(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c);               \
  /* C[m x k] += G[m x n] * B[k x n]^T */                                                  \
  void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, In g, In b, Out c);        \
  /* C[k x n] += A[m x k]^T * G[m x n] */                                                  \
  void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, In a, In g, Out c);        \
  /* y_e = softmax of x over each segment [off[s], off[s+1]); empty segments skipped */    \
  void segment_softmax(Offsets off, In x, Out y);                                          \
  void segment_softmax_backward(Offsets off, In y, In gy, Out gx_acc);                     \
  /* Y[i] = sum_e w_e * X[col_e] over the edges of row i; Y is n x h */                    \
  void spmm(Offsets off, Indices col, In w, In x, std::size_t h, Out y);                   \
  void spmm_backward_x(Offsets off, Indices col, In w, In gy, std::size_t h, Out gx_acc);  \
  void spmm_backward_w(Offsets off, Indices col, In x, In gy, std::size_t h, Out gw_acc);  \
  /* e_(i,j) = s_i + t_j for every stored edge */                                          \
  void edge_pair_sum(Offsets off, Indices col, In s, In t, Out e);                         \
  void edge_pair_sum_backward(Offsets off, Indices col, In ge, Out gs_acc, Out gt_acc);    \
  /* Row layer norm with population variance; saves per-row mean and 1/std */             \
  void layer_norm(std::size_t n, std::size_t h, In x, In gain, In bias, double eps, Out y, \
                  Out mean, Out rstd);                                                     \
  void layer_norm_backward(std::size_t n, std::size_t h, In x, In gain, In mean, In rstd,  \
                           In gy, Out gx_acc, Out ggain_acc, Out gbias_acc);

namespace serial {
DHAN_KERNEL_DECLS
}  // namespace serial

namespace omp {
DHAN_KERNEL_DECLS
}  // namespace omp

#undef DHAN_KERNEL_DECLS

// Applies the DHAN_THREADS cap (if set) to the OpenMP runtime. Returns the
// thread count in effect.
int configure_threads_from_env();

}  // namespace dhan::kernels
