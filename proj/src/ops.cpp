#include "dhan/ops.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "dhan/error.hpp"
#include "dhan/kernels.hpp"

namespace dhan::ops {

namespace k = kernels::omp;

namespace {

std::string shape_str(const Tensor& t) {
  return std::to_string(t.rows()) + "x" + std::to_string(t.cols());
}

void require_shape(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, std::string(op) + ": " + detail);
}

Tensor make(std::size_t r, std::size_t c, std::vector<double> v, bool rg) {
  return Tensor::from(r, c, std::move(v), rg);
}

bool any_grad(std::span<const Tensor> ts) {
  return std::any_of(ts.begin(), ts.end(), [](const Tensor& t) { return t.requires_grad(); });
}

}  // namespace

Tensor linear(Tape& tape, const Tensor& x, const Tensor& w) {
  require_shape(x.cols() == w.rows(), "linear", shape_str(x) + " * " + shape_str(w));
  const std::size_t n = x.rows(), d = x.cols(), m = w.cols();
  std::vector<double> y(n * m);
  k::gemm(n, d, m, x.data(), w.data(), y);
  Tensor out = make(n, m, std::move(y), x.requires_grad() || w.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, w, out, n, d, m]() mutable {
      const auto g = out.grad();
      if (x.requires_grad()) k::gemm_nt_acc(n, m, d, g, w.data(), x.mutable_grad());
      if (w.requires_grad()) k::gemm_tn_acc(n, d, m, x.data(), g, w.mutable_grad());
    });
  }
  return out;
}

Tensor add(Tape& tape, const Tensor& a, const Tensor& b) {
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add",
                shape_str(a) + " + " + shape_str(b));
  std::vector<double> y(a.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] + b.data()[i];
  Tensor out = make(a.rows(), a.cols(), std::move(y), a.requires_grad() || b.requires_grad());
  if (out.requires_grad()) {
    tape.record([a, b, out]() mutable {
      const auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    });
  }
  return out;
}

Tensor scalar_mul(Tape& tape, const Tensor& x, double c) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = c * x.data()[i];
  Tensor out = make(x.rows(), x.cols(), std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, c]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += c * g[i];
    });
  }
  return out;
}

Tensor add_scalar(Tape& tape, const Tensor& x, double c) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.data()[i] + c;
  Tensor out = make(x.rows(), x.cols(), std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor scale_by(Tape& tape, const Tensor& x, const Tensor& s) {
  require_shape(s.size() == 1, "scale_by", "scale must be 1x1, got " + shape_str(s));
  const double sv = s.data()[0];
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = sv * x.data()[i];
  Tensor out = make(x.rows(), x.cols(), std::move(y), x.requires_grad() || s.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, s, out, sv]() mutable {
      const auto g = out.grad();
      if (x.requires_grad()) {
        auto gx = x.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += sv * g[i];
      }
      if (s.requires_grad()) {
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * x.data()[i];
        s.mutable_grad()[0] += acc;
      }
    });
  }
  return out;
}

Tensor add_row_broadcast(Tape& tape, const Tensor& x, const Tensor& b) {
  require_shape(b.rows() == 1 && b.cols() == x.cols(), "add_row_broadcast",
                shape_str(x) + " + " + shape_str(b));
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] = x.data()[i * c + j] + b.data()[j];
  Tensor out = make(n, c, std::move(y), x.requires_grad() || b.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, b, out, n, c]() mutable {
      const auto g = out.grad();
      if (x.requires_grad()) {
        auto gx = x.mutable_grad();
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < c; ++j) gb[j] += g[i * c + j];
      }
    });
  }
  return out;
}

Tensor mul_rows(Tape& tape, const Tensor& x, std::span<const double> weights) {
  require_shape(weights.size() == x.rows(), "mul_rows",
                std::to_string(weights.size()) + " weights for " + shape_str(x));
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> w(weights.begin(), weights.end());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] = w[i] * x.data()[i * c + j];
  Tensor out = make(n, c, std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, w = std::move(w), n, c]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += w[i] * g[i * c + j];
    });
  }
  return out;
}

Tensor leaky_relu(Tape& tape, const Tensor& x, double slope) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = x.data()[i];
    y[i] = v >= 0.0 ? v : slope * v;
  }
  Tensor out = make(x.rows(), x.cols(), std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, slope]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i)
        gx[i] += (x.data()[i] >= 0.0 ? 1.0 : slope) * g[i];
    });
  }
  return out;
}

Tensor sigmoid(Tape& tape, const Tensor& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = x.data()[i];
    if (v >= 0.0) {
      y[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      y[i] = e / (1.0 + e);
    }
  }
  Tensor out = make(x.rows(), x.cols(), std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      const auto g = out.grad();
      const auto s = out.data();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * s[i] * (1.0 - s[i]);
    });
  }
  return out;
}

Tensor log(Tape& tape, const Tensor& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double v = x.data()[i];
    if (!(v > 0.0)) throw Error(ErrorCode::InvalidArgument, "log of a non-positive value");
    y[i] = std::log(v);
  }
  Tensor out = make(x.rows(), x.cols(), std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / x.data()[i];
    });
  }
  return out;
}

namespace {

// Row softmax restricted to mask (all entries when mask is empty).
std::vector<double> row_softmax_values(const Tensor& x, std::span<const std::uint8_t> mask) {
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> y(x.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data().data() + i * c;
    auto on = [&](std::size_t j) { return mask.empty() || mask[i * c + j] != 0; };
    double mx = -INFINITY;
    for (std::size_t j = 0; j < c; ++j)
      if (on(j)) mx = std::max(mx, xi[j]);
    if (mx == -INFINITY) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j)
      if (on(j)) {
        y[i * c + j] = std::exp(xi[j] - mx);
        s += y[i * c + j];
      }
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] /= s;
  }
  return y;
}

void row_softmax_backward(const Tensor& out, const Tensor& x) {
  const std::size_t n = out.rows(), c = out.cols();
  const auto g = out.grad();
  const auto y = out.data();
  auto gx = x.mutable_grad();
  for (std::size_t i = 0; i < n; ++i) {
    double dot = 0.0;
    for (std::size_t j = 0; j < c; ++j) dot += y[i * c + j] * g[i * c + j];
    for (std::size_t j = 0; j < c; ++j) gx[i * c + j] += y[i * c + j] * (g[i * c + j] - dot);
  }
}

}  // namespace

Tensor softmax_rows(Tape& tape, const Tensor& x) {
  Tensor out = make(x.rows(), x.cols(), row_softmax_values(x, {}), x.requires_grad());
  if (out.requires_grad()) tape.record([x, out]() mutable { row_softmax_backward(out, x); });
  return out;
}

Tensor masked_softmax_rows(Tape& tape, const Tensor& x, std::span<const std::uint8_t> mask) {
  require_shape(mask.size() == x.size(), "masked_softmax_rows", "mask size mismatch");
  Tensor out = make(x.rows(), x.cols(), row_softmax_values(x, mask), x.requires_grad());
  if (out.requires_grad()) tape.record([x, out]() mutable { row_softmax_backward(out, x); });
  return out;
}

Tensor log_softmax_rows(Tape& tape, const Tensor& x) {
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data().data() + i * c;
    const double mx = *std::max_element(xi, xi + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(xi[j] - mx);
    const double lse = mx + std::log(s);
    for (std::size_t j = 0; j < c; ++j) y[i * c + j] = xi[j] - lse;
  }
  Tensor out = make(n, c, std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, n, c]() mutable {
      const auto g = out.grad();
      const auto y = out.data();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < n; ++i) {
        double gs = 0.0;
        for (std::size_t j = 0; j < c; ++j) gs += g[i * c + j];
        for (std::size_t j = 0; j < c; ++j)
          gx[i * c + j] += g[i * c + j] - std::exp(y[i * c + j]) * gs;
      }
    });
  }
  return out;
}

Tensor segment_softmax(Tape& tape, const Tensor& scores, std::span<const std::uint32_t> offsets,
                       bool allow_empty) {
  require_shape(scores.cols() == 1, "segment_softmax", "scores must be a column");
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != scores.rows())
    throw Error(ErrorCode::ShapeMismatch, "segment_softmax: offsets do not partition scores");
  for (std::size_t s = 0; s + 1 < offsets.size(); ++s) {
    if (offsets[s] > offsets[s + 1])
      throw Error(ErrorCode::ShapeMismatch, "segment_softmax: offsets decrease");
    if (!allow_empty && offsets[s] == offsets[s + 1])
      throw Error(ErrorCode::EmptySegment, "segment " + std::to_string(s) + " is empty");
  }
  std::vector<double> y(scores.size(), 0.0);
  k::segment_softmax(offsets, scores.data(), y);
  Tensor out = make(scores.rows(), 1, std::move(y), scores.requires_grad());
  if (out.requires_grad()) {
    std::vector<std::uint32_t> off(offsets.begin(), offsets.end());
    tape.record([scores, out, off = std::move(off)]() mutable {
      k::segment_softmax_backward(off, out.data(), out.grad(), scores.mutable_grad());
    });
  }
  return out;
}

Tensor edge_pair_sum(Tape& tape, const Tensor& s, const Tensor& t, const CsrAdjacency& adj) {
  require_shape(s.cols() == 1 && t.cols() == 1 && s.rows() == adj.num_rows(), "edge_pair_sum",
                "endpoint score columns do not match adjacency");
  for (auto c : adj.col_indices)
    if (c >= t.rows())
      throw Error(ErrorCode::ShapeMismatch, "edge_pair_sum: neighbor index out of range");
  std::vector<double> e(adj.num_edges());
  k::edge_pair_sum(adj.row_offsets, adj.col_indices, s.data(), t.data(), e);
  Tensor out = make(adj.num_edges(), 1, std::move(e), s.requires_grad() || t.requires_grad());
  if (out.requires_grad()) {
    const CsrAdjacency* a = &adj;
    tape.record([s, t, out, a]() mutable {
      std::vector<double> gs(s.rows(), 0.0), gt(t.rows(), 0.0);
      k::edge_pair_sum_backward(a->row_offsets, a->col_indices, out.grad(), gs, gt);
      if (s.requires_grad()) {
        auto g = s.mutable_grad();
        for (std::size_t i = 0; i < gs.size(); ++i) g[i] += gs[i];
      }
      if (t.requires_grad()) {
        auto g = t.mutable_grad();
        for (std::size_t i = 0; i < gt.size(); ++i) g[i] += gt[i];
      }
    });
  }
  return out;
}

Tensor spmm(Tape& tape, const Tensor& edge_weights, const Tensor& x, const CsrAdjacency& adj) {
  require_shape(edge_weights.cols() == 1 && edge_weights.rows() == adj.num_edges(), "spmm",
                "edge weights " + shape_str(edge_weights) + " for " +
                    std::to_string(adj.num_edges()) + " edges");
  for (auto c : adj.col_indices)
    if (c >= x.rows()) throw Error(ErrorCode::ShapeMismatch, "spmm: neighbor index out of range");
  const std::size_t h = x.cols();
  std::vector<double> y(adj.num_rows() * h);
  k::spmm(adj.row_offsets, adj.col_indices, edge_weights.data(), x.data(), h, y);
  Tensor out = make(adj.num_rows(), h, std::move(y),
                    edge_weights.requires_grad() || x.requires_grad());
  if (out.requires_grad()) {
    const CsrAdjacency* a = &adj;
    tape.record([edge_weights, x, out, a, h]() mutable {
      const auto g = out.grad();
      if (x.requires_grad())
        k::spmm_backward_x(a->row_offsets, a->col_indices, edge_weights.data(), g, h,
                           x.mutable_grad());
      if (edge_weights.requires_grad())
        k::spmm_backward_w(a->row_offsets, a->col_indices, x.data(), g, h,
                           edge_weights.mutable_grad());
    });
  }
  return out;
}

Tensor layer_norm(Tape& tape, const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps) {
  const std::size_t n = x.rows(), h = x.cols();
  require_shape(h >= 2, "layer_norm", "needs at least 2 columns");
  require_shape(gain.size() == h && bias.size() == h, "layer_norm",
                "gain/bias must have " + std::to_string(h) + " entries");
  std::vector<double> y(x.size()), mean(n), rstd(n);
  k::layer_norm(n, h, x.data(), gain.data(), bias.data(), eps, y, mean, rstd);
  Tensor out =
      make(n, h, std::move(y), x.requires_grad() || gain.requires_grad() || bias.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, gain, bias, out, n, h, mean = std::move(mean),
                 rstd = std::move(rstd)]() mutable {
      std::vector<double> gx(x.requires_grad() ? 0 : x.size());
      std::vector<double> gg(gain.requires_grad() ? 0 : h), gb(bias.requires_grad() ? 0 : h);
      const std::span<double> gx_out = x.requires_grad() ? x.mutable_grad() : std::span(gx);
      const std::span<double> gg_out = gain.requires_grad() ? gain.mutable_grad() : std::span(gg);
      const std::span<double> gb_out = bias.requires_grad() ? bias.mutable_grad() : std::span(gb);
      k::layer_norm_backward(n, h, x.data(), gain.data(), mean, rstd, out.grad(), gx_out, gg_out,
                             gb_out);
    });
  }
  return out;
}

Tensor concat_cols(Tape& tape, std::span<const Tensor> parts) {
  require_shape(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t n = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    require_shape(p.rows() == n, "concat_cols", "row counts differ");
    total += p.cols();
  }
  std::vector<double> y(n * total);
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < p.cols(); ++j) y[i * total + off + j] = p(i, j);
    off += p.cols();
  }
  Tensor out = make(n, total, std::move(y), any_grad(parts));
  if (out.requires_grad()) {
    std::vector<Tensor> ps(parts.begin(), parts.end());
    tape.record([ps = std::move(ps), out, n, total]() mutable {
      const auto g = out.grad();
      std::size_t off = 0;
      for (auto& p : ps) {
        if (p.requires_grad()) {
          auto gp = p.mutable_grad();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p.cols(); ++j) gp[i * p.cols() + j] += g[i * total + off + j];
        }
        off += p.cols();
      }
    });
  }
  return out;
}

Tensor concat_rows(Tape& tape, std::span<const Tensor> parts) {
  require_shape(!parts.empty(), "concat_rows", "no inputs");
  const std::size_t c = parts[0].cols();
  std::vector<double> y;
  std::size_t rows = 0;
  for (const auto& p : parts) {
    require_shape(p.cols() == c, "concat_rows", "column counts differ");
    y.insert(y.end(), p.data().begin(), p.data().end());
    rows += p.rows();
  }
  Tensor out = make(rows, c, std::move(y), any_grad(parts));
  if (out.requires_grad()) {
    std::vector<Tensor> ps(parts.begin(), parts.end());
    tape.record([ps = std::move(ps), out]() mutable {
      const auto g = out.grad();
      std::size_t off = 0;
      for (auto& p : ps) {
        if (p.requires_grad()) {
          auto gp = p.mutable_grad();
          for (std::size_t i = 0; i < p.size(); ++i) gp[i] += g[off + i];
        }
        off += p.size();
      }
    });
  }
  return out;
}

Tensor row_slice(Tape& tape, const Tensor& x, std::size_t begin, std::size_t end) {
  require_shape(begin <= end && end <= x.rows(), "row_slice", "range outside " + shape_str(x));
  const std::size_t c = x.cols();
  std::vector<double> y(x.data().begin() + static_cast<std::ptrdiff_t>(begin * c),
                        x.data().begin() + static_cast<std::ptrdiff_t>(end * c));
  Tensor out = make(end - begin, c, std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, begin, c]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[begin * c + i] += g[i];
    });
  }
  return out;
}

Tensor gather_rows(Tape& tape, const Tensor& x, std::span<const std::uint32_t> index) {
  const std::size_t c = x.cols();
  std::vector<double> y(index.size() * c);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= x.rows())
      throw Error(ErrorCode::ShapeMismatch, "gather_rows: index out of range");
    std::copy_n(x.data().begin() + static_cast<std::ptrdiff_t>(index[i] * c), c,
                y.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  Tensor out = make(index.size(), c, std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    std::vector<std::uint32_t> idx(index.begin(), index.end());
    tape.record([x, out, idx = std::move(idx), c]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < idx.size(); ++i)
        for (std::size_t j = 0; j < c; ++j) gx[idx[i] * c + j] += g[i * c + j];
    });
  }
  return out;
}

Tensor reshape(Tape& tape, const Tensor& x, std::size_t rows, std::size_t cols) {
  require_shape(rows * cols == x.size(), "reshape", shape_str(x) + " to different size");
  Tensor out = make(rows, cols, std::vector<double>(x.data().begin(), x.data().end()),
                    x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
    });
  }
  return out;
}

Tensor weighted_sum_rows(Tape& tape, const Tensor& coeffs, std::span<const Tensor> parts) {
  require_shape(!parts.empty() && coeffs.cols() == parts.size(), "weighted_sum_rows",
                "coefficient columns must match part count");
  const std::size_t n = coeffs.rows(), h = parts[0].cols(), kk = parts.size();
  for (const auto& p : parts)
    require_shape(p.rows() == n && p.cols() == h, "weighted_sum_rows", "part shapes differ");
  std::vector<double> y(n * h, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < kk; ++r) {
      const double w = coeffs(i, r);
      const double* pi = parts[r].data().data() + i * h;
      for (std::size_t c = 0; c < h; ++c) y[i * h + c] += w * pi[c];
    }
  Tensor out = make(n, h, std::move(y), coeffs.requires_grad() || any_grad(parts));
  if (out.requires_grad()) {
    std::vector<Tensor> ps(parts.begin(), parts.end());
    tape.record([coeffs, ps = std::move(ps), out, n, h, kk]() mutable {
      const auto g = out.grad();
      for (std::size_t r = 0; r < kk; ++r) {
        auto& p = ps[r];
        if (coeffs.requires_grad()) {
          auto gc = coeffs.mutable_grad();
          for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t c = 0; c < h; ++c) acc += g[i * h + c] * p.data()[i * h + c];
            gc[i * kk + r] += acc;
          }
        }
        if (p.requires_grad()) {
          auto gp = p.mutable_grad();
          for (std::size_t i = 0; i < n; ++i) {
            const double w = coeffs.data()[i * kk + r];
            for (std::size_t c = 0; c < h; ++c) gp[i * h + c] += w * g[i * h + c];
          }
        }
      }
    });
  }
  return out;
}

Tensor rowwise_dot(Tape& tape, const Tensor& a, const Tensor& b) {
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "rowwise_dot",
                shape_str(a) + " . " + shape_str(b));
  const std::size_t n = a.rows(), c = a.cols();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) y[i] += a(i, j) * b(i, j);
  Tensor out = make(n, 1, std::move(y), a.requires_grad() || b.requires_grad());
  if (out.requires_grad()) {
    tape.record([a, b, out, n, c]() mutable {
      const auto g = out.grad();
      if (a.requires_grad()) {
        auto ga = a.mutable_grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < c; ++j) ga[i * c + j] += g[i] * b(i, j);
      }
      if (b.requires_grad()) {
        auto gb = b.mutable_grad();
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < c; ++j) gb[i * c + j] += g[i] * a(i, j);
      }
    });
  }
  return out;
}

Tensor pick(Tape& tape, const Tensor& x, std::span<const std::uint32_t> cols) {
  require_shape(cols.size() == x.rows(), "pick", "one column index per row required");
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (cols[i] >= c) throw Error(ErrorCode::ShapeMismatch, "pick: column out of range");
    y[i] = x(i, cols[i]);
  }
  Tensor out = make(n, 1, std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    std::vector<std::uint32_t> idx(cols.begin(), cols.end());
    tape.record([x, out, idx = std::move(idx), c]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < idx.size(); ++i) gx[i * c + idx[i]] += g[i];
    });
  }
  return out;
}

Tensor sum(Tape& tape, const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor out = make(1, 1, {s}, x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out]() mutable {
      const double g = out.grad()[0];
      for (auto& v : x.mutable_grad()) v += g;
    });
  }
  return out;
}

Tensor mean(Tape& tape, const Tensor& x) {
  require_shape(x.size() > 0, "mean", "empty tensor");
  return scalar_mul(tape, sum(tape, x), 1.0 / static_cast<double>(x.size()));
}

Tensor bce_with_logits(Tape& tape, const Tensor& logits, std::span<const double> targets) {
  require_shape(targets.size() == logits.size() && logits.rows() > 0, "bce_with_logits",
                "targets must match logits");
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  double loss = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits.data()[i];
    loss += std::max(z, 0.0) - z * targets[i] + std::log1p(std::exp(-std::abs(z)));
  }
  Tensor out = make(1, 1, {loss * inv_n}, logits.requires_grad());
  if (out.requires_grad()) {
    std::vector<double> tg(targets.begin(), targets.end());
    tape.record([logits, out, tg = std::move(tg), inv_n]() mutable {
      const double g = out.grad()[0];
      auto gl = logits.mutable_grad();
      for (std::size_t i = 0; i < gl.size(); ++i) {
        const double z = logits.data()[i];
        const double s = z >= 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
        gl[i] += g * (s - tg[i]) * inv_n;
      }
    });
  }
  return out;
}

Tensor dropout(Tape& tape, const Tensor& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw Error(ErrorCode::InvalidArgument, "dropout rate must lie in [0, 1)");
  if (!training || rate == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(x.size());
  for (auto& m : mask) m = uniform_unit(rng) < rate ? 0.0 : keep_scale;
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x.data()[i] * mask[i];
  Tensor out = make(x.rows(), x.cols(), std::move(y), x.requires_grad());
  if (out.requires_grad()) {
    tape.record([x, out, mask = std::move(mask)]() mutable {
      const auto g = out.grad();
      auto gx = x.mutable_grad();
      for (std::size_t i = 0; i < g.size(); ++i) gx[i] += mask[i] * g[i];
    });
  }
  return out;
}

}  // namespace dhan::ops
