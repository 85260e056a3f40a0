#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "dhan/kernels.hpp"

namespace dhan::kernels {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kMinParallelWork = 1 << 14;

inline long as_long(std::size_t n) { return static_cast<long>(n); }

// Contiguous [begin, end) slice of `n` items for the calling thread.
inline std::pair<std::size_t, std::size_t> thread_slice(std::size_t n) {
  const std::size_t t = static_cast<std::size_t>(omp_get_thread_num());
  const std::size_t nt = static_cast<std::size_t>(omp_get_num_threads());
  return {n * t / nt, n * (t + 1) / nt};
}
}  // namespace

int configure_threads_from_env() {
  if (const char* env = std::getenv("DHAN_THREADS")) {
    try {
      const int cap = std::stoi(env);
      if (cap > 0) omp_set_num_threads(std::min(cap, omp_get_num_procs()));
    } catch (const std::exception&) {
    }
  }
  return omp_get_max_threads();
}

namespace omp {

void gemm(std::size_t m, std::size_t k, std::size_t n, In a, In b, Out c) {
#pragma omp parallel for schedule(static) if (m * k * n > kMinParallelWork)
  for (long il = 0; il < as_long(m); ++il) {
    const auto i = static_cast<std::size_t>(il);
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
#pragma omp parallel for schedule(static) if (m * k * n > kMinParallelWork)
  for (long il = 0; il < as_long(m); ++il) {
    const auto i = static_cast<std::size_t>(il);
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
#pragma omp parallel for schedule(static) if (m * k * n > kMinParallelWork)
  for (long pl = 0; pl < as_long(k); ++pl) {
    const auto p = static_cast<std::size_t>(pl);
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
#pragma omp parallel for schedule(static) if (x.size() > kMinParallelWork)
  for (long sl = 0; sl < as_long(segments); ++sl) {
    const auto s = static_cast<std::size_t>(sl);
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
#pragma omp parallel for schedule(static) if (y.size() > kMinParallelWork)
  for (long sl = 0; sl < as_long(segments); ++sl) {
    const auto s = static_cast<std::size_t>(sl);
    const std::uint32_t b = off[s], e = off[s + 1];
    double dot = 0.0;
    for (auto i = b; i < e; ++i) dot += y[i] * gy[i];
    for (auto i = b; i < e; ++i) gx_acc[i] += y[i] * (gy[i] - dot);
  }
}

void spmm(Offsets off, Indices col, In w, In x, std::size_t h, Out y) {
  const std::size_t n = off.size() - 1;
#pragma omp parallel for schedule(dynamic, 64) if (col.size() * h > kMinParallelWork)
  for (long il = 0; il < as_long(n); ++il) {
    const auto i = static_cast<std::size_t>(il);
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
  // Scatter into source rows: threads own disjoint feature-column ranges so
  // every output element keeps the serial edge order.
  const std::size_t n = off.size() - 1;
#pragma omp parallel if (col.size() * h > kMinParallelWork)
  {
    const auto [c0, c1] = thread_slice(h);
    for (std::size_t i = 0; i < n; ++i) {
      const double* gi = gy.data() + i * h;
      for (auto e = off[i]; e < off[i + 1]; ++e) {
        const double we = w[e];
        double* gj = gx_acc.data() + static_cast<std::size_t>(col[e]) * h;
        for (std::size_t c = c0; c < c1; ++c) gj[c] += we * gi[c];
      }
    }
  }
}

void spmm_backward_w(Offsets off, Indices col, In x, In gy, std::size_t h, Out gw_acc) {
  const std::size_t n = off.size() - 1;
#pragma omp parallel for schedule(dynamic, 64) if (col.size() * h > kMinParallelWork)
  for (long il = 0; il < as_long(n); ++il) {
    const auto i = static_cast<std::size_t>(il);
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
#pragma omp parallel for schedule(static) if (col.size() > kMinParallelWork)
  for (long il = 0; il < as_long(n); ++il) {
    const auto i = static_cast<std::size_t>(il);
    for (auto k = off[i]; k < off[i + 1]; ++k) e[k] = s[i] + t[col[k]];
  }
}

void edge_pair_sum_backward(Offsets off, Indices col, In ge, Out gs_acc, Out gt_acc) {
  const std::size_t n = off.size() - 1;
#pragma omp parallel for schedule(static) if (col.size() > kMinParallelWork)
  for (long il = 0; il < as_long(n); ++il) {
    const auto i = static_cast<std::size_t>(il);
    double acc = 0.0;
    for (auto k = off[i]; k < off[i + 1]; ++k) acc += ge[k];
    gs_acc[i] += acc;
  }
  // scatter side stays serial
  for (std::size_t k = 0; k < col.size(); ++k) gt_acc[col[k]] += ge[k];
}

void layer_norm(std::size_t n, std::size_t h, In x, In gain, In bias, double eps, Out y,
                Out mean, Out rstd) {
#pragma omp parallel for schedule(static) if (n * h > kMinParallelWork)
  for (long il = 0; il < as_long(n); ++il) {
    const auto i = static_cast<std::size_t>(il);
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
  const bool par = n * h > kMinParallelWork;
#pragma omp parallel for schedule(static) if (par)
  for (long il = 0; il < as_long(n); ++il) {
    const auto i = static_cast<std::size_t>(il);
    const double* xi = x.data() + i * h;
    const double* gi = gy.data() + i * h;
    const double mu = mean[i], r = rstd[i];
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
#pragma omp parallel if (par)
  {
    const auto [c0, c1] = thread_slice(h);
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.data() + i * h;
      const double* gi = gy.data() + i * h;
      for (std::size_t c = c0; c < c1; ++c) {
        ggain_acc[c] += gi[c] * (xi[c] - mean[i]) * rstd[i];
        gbias_acc[c] += gi[c];
      }
    }
  }
}

}  // namespace omp
}  // namespace dhan::kernels
