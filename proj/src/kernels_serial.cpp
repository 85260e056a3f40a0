#include <algorithm>
#include <cmath>

#include "dhan/kernels.hpp"

namespace dhan::kernels::serial {

void gemm(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c.data() + i * n;
    std::fill(ci, ci + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      const double* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

void gemm_nt_acc(std::size_t m, std::size_t n, std::size_t k, In g, In b, Out c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* gi = g.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double* bp = b.data() + p * n;
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += gi[j] * bp[j];
      c[i * k + p] += acc;
    }
  }
}

void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, In a, In g, Out c) {
  for (std::size_t p = 0; p < k; ++p) {
    double* cp = c.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double aip = a[i * k + p];
      const double* gi = g.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * gi[j];
    }
  }
}

void segment_softmax(Offsets off, In x, Out y) {
  const std::size_t segments = off.size() - 1;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::uint32_t b = off[s], e = off[s + 1];
    if (b == e) continue;
    double mx = x[b];
    for (auto i = b + 1; i < e; ++i) mx = std::max(mx, x[i]);
    double sum = 0.0;
    for (auto i = b; i < e; ++i) {
      y[i] = std::exp(x[i] - mx);
      sum += y[i];
    }
    const double inv = 1.0 / sum;
    for (auto i = b; i < e; ++i) y[i] *= inv;
  }
}

void segment_softmax_backward(Offsets off, In y, In gy, Out gx_acc) {
  const std::size_t segments = off.size() - 1;
  for (std::size_t s = 0; s < segments; ++s) {
    const std::uint32_t b = off[s], e = off[s + 1];
    double dot = 0.0;
    for (auto i = b; i < e; ++i) dot += y[i] * gy[i];
    for (auto i = b; i < e; ++i) gx_acc[i] += y[i] * (gy[i] - dot);
  }
}

void spmm(Offsets off, Indices col, In w, In x, std::size_t h, Out y) {
  const std::size_t n = off.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    double* yi = y.data() + i * h;
    std::fill(yi, yi + h, 0.0);
    for (auto e = off[i]; e < off[i + 1]; ++e) {
      const double we = w[e];
      const double* xj = x.data() + static_cast<std::size_t>(col[e]) * h;
      for (std::size_t c = 0; c < h; ++c) yi[c] += we * xj[c];
    }
  }
}

void spmm_backward_x(Offsets off, Indices col, In w, In gy, std::size_t h, Out gx_acc) {
  const std::size_t n = off.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double* gi = gy.data() + i * h;
    for (auto e = off[i]; e < off[i + 1]; ++e) {
      const double we = w[e];
      double* gj = gx_acc.data() + static_cast<std::size_t>(col[e]) * h;
      for (std::size_t c = 0; c < h; ++c) gj[c] += we * gi[c];
    }
  }
}

void spmm_backward_w(Offsets off, Indices col, In x, In gy, std::size_t h, Out gw_acc) {
  const std::size_t n = off.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    const double* gi = gy.data() + i * h;
    for (auto e = off[i]; e < off[i + 1]; ++e) {
      const double* xj = x.data() + static_cast<std::size_t>(col[e]) * h;
      double acc = 0.0;
      for (std::size_t c = 0; c < h; ++c) acc += gi[c] * xj[c];
      gw_acc[e] += acc;
    }
  }
}

void edge_pair_sum(Offsets off, Indices col, In s, In t, Out e) {
  const std::size_t n = off.size() - 1;
  for (std::size_t i = 0; i < n; ++i)
    for (auto k = off[i]; k < off[i + 1]; ++k) e[k] = s[i] + t[col[k]];
}

void edge_pair_sum_backward(Offsets off, Indices col, In ge, Out gs_acc, Out gt_acc) {
  const std::size_t n = off.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (auto k = off[i]; k < off[i + 1]; ++k) {
      acc += ge[k];
      gt_acc[col[k]] += ge[k];
    }
    gs_acc[i] += acc;
  }
}

void layer_norm(std::size_t n, std::size_t h, In x, In gain, In bias, double eps, Out y,
                Out mean, Out rstd) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * h;
    double mu = 0.0;
    for (std::size_t c = 0; c < h; ++c) mu += xi[c];
    mu /= static_cast<double>(h);
    double var = 0.0;
    for (std::size_t c = 0; c < h; ++c) var += (xi[c] - mu) * (xi[c] - mu);
    var /= static_cast<double>(h);
    const double r = 1.0 / std::sqrt(var + eps);
    mean[i] = mu;
    rstd[i] = r;
    for (std::size_t c = 0; c < h; ++c) y[i * h + c] = (xi[c] - mu) * r * gain[c] + bias[c];
  }
}

void layer_norm_backward(std::size_t n, std::size_t h, In x, In gain, In mean, In rstd, In gy,
                         Out gx_acc, Out ggain_acc, Out gbias_acc) {
  const double inv_h = 1.0 / static_cast<double>(h);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * h;
    const double* gi = gy.data() + i * h;
    const double mu = mean[i], r = rstd[i];
    // dxhat = gy * gain; dx = r * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
    double sum_d = 0.0, sum_dx = 0.0;
    for (std::size_t c = 0; c < h; ++c) {
      const double d = gi[c] * gain[c];
      const double xh = (xi[c] - mu) * r;
      sum_d += d;
      sum_dx += d * xh;
    }
    for (std::size_t c = 0; c < h; ++c) {
      const double d = gi[c] * gain[c];
      const double xh = (xi[c] - mu) * r;
      gx_acc[i * h + c] += r * (d - sum_d * inv_h - xh * sum_dx * inv_h);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * h;
    const double* gi = gy.data() + i * h;
    for (std::size_t c = 0; c < h; ++c) {
      ggain_acc[c] += gi[c] * (xi[c] - mean[i]) * rstd[i];
      gbias_acc[c] += gi[c];
    }
  }
}

}  // namespace dhan::kernels::serial
