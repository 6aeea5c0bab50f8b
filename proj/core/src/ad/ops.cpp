#include "hit/ad/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "hit/error.hpp"

namespace hit::ad {

namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <class T>
ConstMatMap<T> as_matrix(const T* p, std::size_t rows, std::size_t cols) {
  return ConstMatMap<T>(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
template <class T>
MatMap<T> as_matrix(T* p, std::size_t rows, std::size_t cols) {
  return MatMap<T>(p, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <class T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() != b.shape())
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

template <class T>
void record(const Tensor<T>& out, typename Tape<T>::BackwardFn fn) {
  Tape<T>::active()->push(out, std::move(fn));
}

// Handles are shallow; gradient slots stay writable through captured copies.
template <class T>
std::span<T> grad_of(const Tensor<T>& t) {
  return const_cast<Tensor<T>&>(t).grad();
}

template <class T>
void accumulate(const Tensor<T>& dst, std::span<const T> src) {
  auto g = grad_of(dst);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += src[i];
}

std::size_t last_dim(const Shape& s) { return s.back(); }

}  // namespace

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "add");
  Tensor<T> out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] + y[i];
  if (needs_grad(a, b)) {
    out.set_requires_grad(true);
    record(out, [a, b, out]() mutable {
      auto g = std::as_const(out).grad();
      if (a.requires_grad()) accumulate(a, g);
      if (b.requires_grad()) accumulate(b, g);
    });
  }
  return out;
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "sub");
  Tensor<T> out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] - y[i];
  if (needs_grad(a, b)) {
    out.set_requires_grad(true);
    record(out, [a, b, out]() mutable {
      auto g = std::as_const(out).grad();
      if (a.requires_grad()) accumulate(a, g);
      if (b.requires_grad()) {
        auto gb = grad_of(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "mul");
  Tensor<T> out(a.shape());
  auto o = out.data();
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * y[i];
  if (needs_grad(a, b)) {
    out.set_requires_grad(true);
    record(out, [a, b, out]() mutable {
      auto g = std::as_const(out).grad();
      auto x = std::as_const(a).data();
      auto y = std::as_const(b).data();
      if (a.requires_grad()) {
        auto ga = grad_of(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * y[i];
      }
      if (b.requires_grad()) {
        auto gb = grad_of(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * x[i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  Tensor<T> out(a.shape());
  auto o = out.data();
  auto x = a.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = x[i] * factor;
  if (needs_grad(a)) {
    out.set_requires_grad(true);
    record(out, [a, out, factor]() mutable {
      auto g = std::as_const(out).grad();
      auto ga = grad_of(a);
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * factor;
    });
  }
  return out;
}

template <class T>
Tensor<T> add_row_vector(const Tensor<T>& x, const Tensor<T>& row) {
  const std::size_t n = last_dim(x.shape());
  if (row.numel() != n)
    throw DimensionError("add_row_vector: row " + shape_str(row.shape()) + " does not match " +
                         shape_str(x.shape()));
  const std::size_t rows = x.numel() / n;
  Tensor<T> out(x.shape());
  auto o = out.data();
  auto xs = x.data();
  auto r = row.data();
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < n; ++j) o[i * n + j] = xs[i * n + j] + r[j];
  if (needs_grad(x, row)) {
    out.set_requires_grad(true);
    record(out, [x, row, out, rows, n]() mutable {
      auto g = std::as_const(out).grad();
      if (x.requires_grad()) accumulate(x, g);
      if (row.requires_grad()) {
        auto gr = grad_of(row);
        for (std::size_t i = 0; i < rows; ++i)
          for (std::size_t j = 0; j < n; ++j) gr[j] += g[i * n + j];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> add_tiled(const Tensor<T>& x, const Tensor<T>& tile) {
  const std::size_t tsize = tile.numel();
  if (x.numel() % tsize != 0 || last_dim(x.shape()) != last_dim(tile.shape()))
    throw DimensionError("add_tiled: tile " + shape_str(tile.shape()) + " does not divide " +
                         shape_str(x.shape()));
  const std::size_t reps = x.numel() / tsize;
  Tensor<T> out(x.shape());
  auto o = out.data();
  auto xs = x.data();
  auto t = tile.data();
  for (std::size_t r = 0; r < reps; ++r)
    for (std::size_t i = 0; i < tsize; ++i) o[r * tsize + i] = xs[r * tsize + i] + t[i];
  if (needs_grad(x, tile)) {
    out.set_requires_grad(true);
    record(out, [x, tile, out, reps, tsize]() mutable {
      auto g = std::as_const(out).grad();
      if (x.requires_grad()) accumulate(x, g);
      if (tile.requires_grad()) {
        auto gt = grad_of(tile);
        for (std::size_t r = 0; r < reps; ++r)
          for (std::size_t i = 0; i < tsize; ++i) gt[i] += g[r * tsize + i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> broadcast_rows(const Tensor<T>& row, std::size_t count) {
  const std::size_t n = row.numel();
  Tensor<T> out(Shape{count, n});
  auto o = out.data();
  auto r = row.data();
  for (std::size_t i = 0; i < count; ++i) std::copy(r.begin(), r.end(), o.begin() + i * n);
  if (needs_grad(row)) {
    out.set_requires_grad(true);
    record(out, [row, out, count, n]() mutable {
      auto g = std::as_const(out).grad();
      auto gr = grad_of(row);
      for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < n; ++j) gr[j] += g[i * n + j];
    });
  }
  return out;
}

template <class T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  Tensor<T> out = x.view(std::move(shape));
  if (needs_grad(x)) {
    out.set_requires_grad(true);
    record(out, [x, out]() mutable { accumulate(x, std::as_const(out).grad()); });
  }
  return out;
}

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
    throw DimensionError("matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()));
  const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
  Tensor<T> out(Shape{m, n});
  as_matrix(out.raw(), m, n).noalias() = as_matrix(a.raw(), m, k) * as_matrix(b.raw(), k, n);
  if (needs_grad(a, b)) {
    out.set_requires_grad(true);
    record(out, [a, b, out, m, k, n]() mutable {
      auto g = as_matrix(std::as_const(out).grad().data(), m, n);
      if (a.requires_grad())
        as_matrix(grad_of(a).data(), m, k).noalias() += g * as_matrix(b.raw(), k, n).transpose();
      if (b.requires_grad())
        as_matrix(grad_of(b).data(), k, n).noalias() += as_matrix(a.raw(), m, k).transpose() * g;
    });
  }
  return out;
}

template <class T>
Tensor<T> linear(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& bias) {
  const std::size_t k = last_dim(x.shape());
  if (w.rank() != 2 || w.dim(0) != k)
    throw DimensionError("linear: incompatible shapes " + shape_str(x.shape()) + " and " +
                         shape_str(w.shape()));
  const std::size_t n = w.dim(1);
  if (bias.defined() && bias.numel() != n)
    throw DimensionError("linear: bias " + shape_str(bias.shape()) + " does not match " +
                         shape_str(w.shape()));
  const std::size_t m = x.numel() / k;
  Shape out_shape = x.shape();
  out_shape.back() = n;
  Tensor<T> out(out_shape);
  auto o = as_matrix(out.raw(), m, n);
  o.noalias() = as_matrix(x.raw(), m, k) * as_matrix(w.raw(), k, n);
  if (bias.defined()) {
    Eigen::Map<const Eigen::Matrix<T, 1, Eigen::Dynamic>> bv(bias.raw(), static_cast<Eigen::Index>(n));
    o.rowwise() += bv;
  }
  const bool bias_grad = bias.defined() && bias.requires_grad();
  if (needs_grad(x, w) || (bias_grad && Tape<T>::active())) {
    out.set_requires_grad(true);
    record(out, [x, w, bias, out, m, k, n]() mutable {
      auto g = as_matrix(std::as_const(out).grad().data(), m, n);
      if (x.requires_grad())
        as_matrix(grad_of(x).data(), m, k).noalias() += g * as_matrix(w.raw(), k, n).transpose();
      if (w.requires_grad())
        as_matrix(grad_of(w).data(), k, n).noalias() += as_matrix(x.raw(), m, k).transpose() * g;
      if (bias.defined() && bias.requires_grad()) {
        Eigen::Map<Eigen::Matrix<T, 1, Eigen::Dynamic>> gb(grad_of(bias).data(), static_cast<Eigen::Index>(n));
        gb += g.colwise().sum();
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> sum(const Tensor<T>& x) {
  T acc = T(0);
  for (T v : x.data()) acc += v;
  Tensor<T> out = Tensor<T>::scalar(acc);
  if (needs_grad(x)) {
    out.set_requires_grad(true);
    record(out, [x, out]() mutable {
      const T g = std::as_const(out).grad()[0];
      for (auto& v : grad_of(x)) v += g;
    });
  }
  return out;
}

template <class T>
Tensor<T> mean(const Tensor<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.numel()));
}

template <class T>
Tensor<T> dot(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "dot");
  T acc = T(0);
  auto x = a.data();
  auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  Tensor<T> out = Tensor<T>::scalar(acc);
  if (needs_grad(a, b)) {
    out.set_requires_grad(true);
    record(out, [a, b, out]() mutable {
      const T g = std::as_const(out).grad()[0];
      auto x = std::as_const(a).data();
      auto y = std::as_const(b).data();
      // a and b may be the same node (<x, x>); both contributions must land.
      if (a.requires_grad()) {
        auto ga = grad_of(a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * y[i];
      }
      if (b.requires_grad()) {
        auto gb = grad_of(b);
        for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * x[i];
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  const auto& s = x.shape();
  const int r = static_cast<int>(s.size());
  const int ax = axis < 0 ? axis + r : axis;
  if (ax < 0 || ax >= r) throw IndexError("softmax: axis " + std::to_string(axis) + " out of range");
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < ax; ++i) outer *= s[static_cast<std::size_t>(i)];
  for (int i = ax + 1; i < r; ++i) inner *= s[static_cast<std::size_t>(i)];
  const std::size_t n = s[static_cast<std::size_t>(ax)];

  Tensor<T> out(s);
  auto o = out.data();
  auto xs = x.data();
  for (std::size_t a = 0; a < outer; ++a) {
    for (std::size_t c = 0; c < inner; ++c) {
      const std::size_t base = a * n * inner + c;
      T mx = xs[base];
      for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xs[base + j * inner]);
      T z = T(0);
      for (std::size_t j = 0; j < n; ++j) {
        const T e = std::exp(xs[base + j * inner] - mx);
        o[base + j * inner] = e;
        z += e;
      }
      for (std::size_t j = 0; j < n; ++j) o[base + j * inner] /= z;
    }
  }
  if (needs_grad(x)) {
    out.set_requires_grad(true);
    record(out, [x, out, outer, inner, n]() mutable {
      auto g = std::as_const(out).grad();
      auto y = std::as_const(out).data();
      auto gx = grad_of(x);
      for (std::size_t a = 0; a < outer; ++a) {
        for (std::size_t c = 0; c < inner; ++c) {
          const std::size_t base = a * n * inner + c;
          T inner_prod = T(0);
          for (std::size_t j = 0; j < n; ++j) inner_prod += g[base + j * inner] * y[base + j * inner];
          for (std::size_t j = 0; j < n; ++j) {
            const std::size_t idx = base + j * inner;
            gx[idx] += y[idx] * (g[idx] - inner_prod);
          }
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  const std::size_t d = last_dim(x.shape());
  if (gamma.numel() != d || beta.numel() != d)
    throw DimensionError("layer_norm: affine parameters " + shape_str(gamma.shape()) + "/" +
                         shape_str(beta.shape()) + " do not match " + shape_str(x.shape()));
  const std::size_t rows = x.numel() / d;
  Tensor<T> out(x.shape());
  std::vector<T> xhat(x.numel());
  std::vector<T> rstd(rows);
  auto xs = x.data();
  auto o = out.data();
  auto gm = gamma.data();
  auto bt = beta.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = xs.data() + r * d;
    T mu = T(0);
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<T>(d);
    T var = T(0);
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(d);
    const T rs = T(1) / std::sqrt(var + eps);
    rstd[r] = rs;
    for (std::size_t j = 0; j < d; ++j) {
      const T h = (row[j] - mu) * rs;
      xhat[r * d + j] = h;
      o[r * d + j] = h * gm[j] + bt[j];
    }
  }
  if (needs_grad(x, gamma, beta)) {
    out.set_requires_grad(true);
    record(out, [x, gamma, beta, out, xhat = std::move(xhat), rstd = std::move(rstd), rows, d]() mutable {
      auto g = std::as_const(out).grad();
      auto gm = std::as_const(gamma).data();
      if (gamma.requires_grad() || beta.requires_grad()) {
        auto gg = gamma.requires_grad() ? grad_of(gamma) : std::span<T>{};
        auto gb = beta.requires_grad() ? grad_of(beta) : std::span<T>{};
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < d; ++j) {
            if (!gg.empty()) gg[j] += g[r * d + j] * xhat[r * d + j];
            if (!gb.empty()) gb[j] += g[r * d + j];
          }
      }
      if (x.requires_grad()) {
        auto gx = grad_of(x);
        std::vector<T> dh(d);
        for (std::size_t r = 0; r < rows; ++r) {
          T mean_dh = T(0), mean_dh_h = T(0);
          for (std::size_t j = 0; j < d; ++j) {
            dh[j] = g[r * d + j] * gm[j];
            mean_dh += dh[j];
            mean_dh_h += dh[j] * xhat[r * d + j];
          }
          mean_dh /= static_cast<T>(d);
          mean_dh_h /= static_cast<T>(d);
          for (std::size_t j = 0; j < d; ++j)
            gx[r * d + j] += rstd[r] * (dh[j] - mean_dh - xhat[r * d + j] * mean_dh_h);
        }
      }
    });
  }
  return out;
}

template <class T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr T kAlpha = static_cast<T>(0.7978845608028654);  // sqrt(2/pi)
  constexpr T kBeta = static_cast<T>(0.044715);
  Tensor<T> out(x.shape());
  auto xs = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const T v = xs[i];
    o[i] = T(0.5) * v * (T(1) + std::tanh(kAlpha * (v + kBeta * v * v * v)));
  }
  if (needs_grad(x)) {
    out.set_requires_grad(true);
    record(out, [x, out]() mutable {
      auto g = std::as_const(out).grad();
      auto xs = std::as_const(x).data();
      auto gx = grad_of(x);
      for (std::size_t i = 0; i < gx.size(); ++i) {
        const T v = xs[i];
        const T t = std::tanh(kAlpha * (v + kBeta * v * v * v));
        const T dt = (T(1) - t * t) * kAlpha * (T(1) + T(3) * kBeta * v * v);
        gx[i] += g[i] * (T(0.5) * (T(1) + t) + T(0.5) * v * dt);
      }
    });
  }
  return out;
}

namespace {
struct GridDims {
  std::size_t batch, h, w, d;
};

template <class T>
GridDims grid_dims(const Tensor<T>& grid, const char* op) {
  const auto& s = grid.shape();
  if (s.size() < 3) throw DimensionError(std::string(op) + ": expected [..., H, W, d], got " + shape_str(s));
  const std::size_t n = s.size();
  GridDims g{1, s[n - 3], s[n - 2], s[n - 1]};
  for (std::size_t i = 0; i + 3 < n; ++i) g.batch *= s[i];
  return g;
}
}  // namespace

template <class T>
Tensor<T> avg_pool2(const Tensor<T>& grid) {
  const auto g = grid_dims(grid, "avg_pool2");
  if (g.h % 2 != 0 || g.w % 2 != 0)
    throw DimensionError("avg_pool2: spatial dims must be even, got " + shape_str(grid.shape()));
  const std::size_t oh = g.h / 2, ow = g.w / 2;
  Shape out_shape = grid.shape();
  out_shape[out_shape.size() - 3] = oh;
  out_shape[out_shape.size() - 2] = ow;
  Tensor<T> out(out_shape);
  auto in = grid.data();
  auto o = out.data();
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        T* dst = o.data() + ((b * oh + i) * ow + j) * g.d;
        for (std::size_t di = 0; di < 2; ++di)
          for (std::size_t dj = 0; dj < 2; ++dj) {
            const T* src = in.data() + ((b * g.h + 2 * i + di) * g.w + 2 * j + dj) * g.d;
            for (std::size_t c = 0; c < g.d; ++c) dst[c] += src[c];
          }
        for (std::size_t c = 0; c < g.d; ++c) dst[c] *= T(0.25);
      }
  if (needs_grad(grid)) {
    out.set_requires_grad(true);
    record(out, [grid, out, g, oh, ow]() mutable {
      auto go = std::as_const(out).grad();
      auto gi = grad_of(grid);
      for (std::size_t b = 0; b < g.batch; ++b)
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j) {
            const T* src = go.data() + ((b * oh + i) * ow + j) * g.d;
            for (std::size_t di = 0; di < 2; ++di)
              for (std::size_t dj = 0; dj < 2; ++dj) {
                T* dst = gi.data() + ((b * g.h + 2 * i + di) * g.w + 2 * j + dj) * g.d;
                for (std::size_t c = 0; c < g.d; ++c) dst[c] += T(0.25) * src[c];
              }
          }
    });
  }
  return out;
}

template <class T>
Tensor<T> avg_pool2_transpose(const Tensor<T>& grid) {
  const auto g = grid_dims(grid, "avg_pool2_transpose");
  const std::size_t oh = g.h * 2, ow = g.w * 2;
  Shape out_shape = grid.shape();
  out_shape[out_shape.size() - 3] = oh;
  out_shape[out_shape.size() - 2] = ow;
  Tensor<T> out(out_shape);
  auto in = grid.data();
  auto o = out.data();
  for (std::size_t b = 0; b < g.batch; ++b)
    for (std::size_t i = 0; i < oh; ++i)
      for (std::size_t j = 0; j < ow; ++j) {
        const T* src = in.data() + ((b * g.h + i / 2) * g.w + j / 2) * g.d;
        T* dst = o.data() + ((b * oh + i) * ow + j) * g.d;
        for (std::size_t c = 0; c < g.d; ++c) dst[c] = src[c] * T(0.25);
      }
  if (needs_grad(grid)) {
    out.set_requires_grad(true);
    record(out, [grid, out, g, oh, ow]() mutable {
      auto go = std::as_const(out).grad();
      auto gi = grad_of(grid);
      for (std::size_t b = 0; b < g.batch; ++b)
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j) {
            const T* src = go.data() + ((b * oh + i) * ow + j) * g.d;
            T* dst = gi.data() + ((b * g.h + i / 2) * g.w + j / 2) * g.d;
            for (std::size_t c = 0; c < g.d; ++c) dst[c] += T(0.25) * src[c];
          }
    });
  }
  return out;
}

template <class T>
Tensor<T> cross_entropy_smoothed(const Tensor<T>& logits, std::span<const int> targets, double smoothing) {
  if (!(smoothing >= 0.0 && smoothing < 1.0))
    throw RangeError("cross_entropy_smoothed: smoothing must lie in [0, 1), got " + std::to_string(smoothing));
  if (logits.rank() != 2 || logits.dim(0) != targets.size())
    throw DimensionError("cross_entropy_smoothed: logits " + shape_str(logits.shape()) + " vs " +
                         std::to_string(targets.size()) + " targets");
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  for (int t : targets)
    if (t < 0 || static_cast<std::size_t>(t) >= classes)
      throw IndexError("cross_entropy_smoothed: target " + std::to_string(t) + " out of range");

  const T off = static_cast<T>(smoothing / static_cast<double>(classes));
  const T on = static_cast<T>(1.0 - smoothing) + off;
  std::vector<T> probs(batch * classes);
  auto z = logits.data();
  T loss = T(0);
  for (std::size_t b = 0; b < batch; ++b) {
    const T* row = z.data() + b * classes;
    const T mx = *std::max_element(row, row + classes);
    T s = T(0);
    for (std::size_t c = 0; c < classes; ++c) s += std::exp(row[c] - mx);
    const T lse = mx + std::log(s);
    for (std::size_t c = 0; c < classes; ++c) {
      const T logp = row[c] - lse;
      probs[b * classes + c] = std::exp(logp);
      const T q = static_cast<std::size_t>(targets[b]) == c ? on : off;
      loss -= q * logp;
    }
  }
  loss /= static_cast<T>(batch);
  Tensor<T> out = Tensor<T>::scalar(loss);
  if (needs_grad(logits)) {
    out.set_requires_grad(true);
    std::vector<int> tg(targets.begin(), targets.end());
    record(out, [logits, out, probs = std::move(probs), tg = std::move(tg), batch, classes, on, off]() mutable {
      const T g = std::as_const(out).grad()[0] / static_cast<T>(batch);
      auto gl = grad_of(logits);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < classes; ++c) {
          const T q = static_cast<std::size_t>(tg[b]) == c ? on : off;
          gl[b * classes + c] += g * (probs[b * classes + c] - q);
        }
    });
  }
  return out;
}

template <class T>
Tensor<T> dropout(const Tensor<T>& x, double p, bool training, std::mt19937_64& rng) {
  if (!(p >= 0.0 && p < 1.0))
    throw RangeError("dropout: p must lie in [0, 1), got " + std::to_string(p));
  if (!training || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::bernoulli_distribution keep(1.0 - p);
  std::vector<T> mask(x.numel());
  for (auto& m : mask) m = keep(rng) ? keep_scale : T(0);
  Tensor<T> out(x.shape());
  auto xs = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = xs[i] * mask[i];
  if (needs_grad(x)) {
    out.set_requires_grad(true);
    record(out, [x, out, mask = std::move(mask)]() mutable {
      auto g = std::as_const(out).grad();
      auto gx = grad_of(x);
      for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * mask[i];
    });
  }
  return out;
}

namespace {
template <class T>
void check_attention_shapes(const Tensor<T>& q, const Tensor<T>& kv, std::size_t heads, const char* op) {
  if (q.rank() != 2 || kv.rank() != 2 || q.dim(1) != kv.dim(1) || kv.dim(0) % q.dim(0) != 0)
    throw DimensionError(std::string(op) + ": incompatible shapes " + shape_str(q.shape()) + " and " +
                         shape_str(kv.shape()));
  if (heads == 0 || q.dim(1) % heads != 0)
    throw DimensionError(std::string(op) + ": width " + std::to_string(q.dim(1)) +
                         " not divisible by heads " + std::to_string(heads));
}
}  // namespace

template <class T>
Tensor<T> cls_attention_scores(const Tensor<T>& q, const Tensor<T>& k, std::size_t heads) {
  check_attention_shapes(q, k, heads, "cls_attention_scores");
  const std::size_t batch = q.dim(0), d = q.dim(1), m = k.dim(0) / batch, dk = d / heads;
  const T inv_sqrt = T(1) / std::sqrt(static_cast<T>(dk));
  Tensor<T> out(Shape{batch, heads, m});
  auto qs = q.data();
  auto ks = k.data();
  auto o = out.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < m; ++t) {
      const T* krow = ks.data() + (b * m + t) * d;
      const T* qrow = qs.data() + b * d;
      for (std::size_t h = 0; h < heads; ++h) {
        T acc = T(0);
        for (std::size_t j = h * dk; j < (h + 1) * dk; ++j) acc += qrow[j] * krow[j];
        o[(b * heads + h) * m + t] = acc * inv_sqrt;
      }
    }
  if (needs_grad(q, k)) {
    out.set_requires_grad(true);
    record(out, [q, k, out, batch, d, m, dk, heads, inv_sqrt]() mutable {
      auto g = std::as_const(out).grad();
      auto qs = std::as_const(q).data();
      auto ks = std::as_const(k).data();
      auto gq = q.requires_grad() ? grad_of(q) : std::span<T>{};
      auto gk = k.requires_grad() ? grad_of(k) : std::span<T>{};
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < m; ++t) {
          const std::size_t krow = (b * m + t) * d;
          for (std::size_t h = 0; h < heads; ++h) {
            const T gs = g[(b * heads + h) * m + t] * inv_sqrt;
            for (std::size_t j = h * dk; j < (h + 1) * dk; ++j) {
              if (!gq.empty()) gq[b * d + j] += gs * ks[krow + j];
              if (!gk.empty()) gk[krow + j] += gs * qs[b * d + j];
            }
          }
        }
    });
  }
  return out;
}

template <class T>
Tensor<T> cls_attention_mix(const Tensor<T>& p, const Tensor<T>& v, std::size_t heads) {
  if (p.rank() != 3 || p.dim(1) != heads || v.rank() != 2 || p.dim(0) * p.dim(2) != v.dim(0) ||
      v.dim(1) % heads != 0)
    throw DimensionError("cls_attention_mix: incompatible shapes " + shape_str(p.shape()) + " and " +
                         shape_str(v.shape()));
  const std::size_t batch = p.dim(0), m = p.dim(2), d = v.dim(1), dk = d / heads;
  Tensor<T> out(Shape{batch, d});
  auto ps = p.data();
  auto vs = v.data();
  auto o = out.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < m; ++t) {
      const T* vrow = vs.data() + (b * m + t) * d;
      for (std::size_t h = 0; h < heads; ++h) {
        const T w = ps[(b * heads + h) * m + t];
        for (std::size_t j = h * dk; j < (h + 1) * dk; ++j) o[b * d + j] += w * vrow[j];
      }
    }
  if (needs_grad(p, v)) {
    out.set_requires_grad(true);
    record(out, [p, v, out, batch, m, d, dk, heads]() mutable {
      auto g = std::as_const(out).grad();
      auto ps = std::as_const(p).data();
      auto vs = std::as_const(v).data();
      auto gp = p.requires_grad() ? grad_of(p) : std::span<T>{};
      auto gv = v.requires_grad() ? grad_of(v) : std::span<T>{};
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t t = 0; t < m; ++t) {
          const std::size_t vrow = (b * m + t) * d;
          for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t pidx = (b * heads + h) * m + t;
            T acc = T(0);
            for (std::size_t j = h * dk; j < (h + 1) * dk; ++j) {
              acc += g[b * d + j] * vs[vrow + j];
              if (!gv.empty()) gv[vrow + j] += ps[pidx] * g[b * d + j];
            }
            if (!gp.empty()) gp[pidx] += acc;
          }
        }
    });
  }
  return out;
}

#define HIT_INSTANTIATE_OPS(T)                                                                      \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                       \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                       \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                       \
  template Tensor<T> scale(const Tensor<T>&, T);                                                    \
  template Tensor<T> add_row_vector(const Tensor<T>&, const Tensor<T>&);                            \
  template Tensor<T> add_tiled(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> broadcast_rows(const Tensor<T>&, std::size_t);                                 \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                              \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> linear(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);                  \
  template Tensor<T> sum(const Tensor<T>&);                                                         \
  template Tensor<T> mean(const Tensor<T>&);                                                        \
  template Tensor<T> dot(const Tensor<T>&, const Tensor<T>&);                                       \
  template Tensor<T> softmax(const Tensor<T>&, int);                                                \
  template Tensor<T> layer_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);           \
  template Tensor<T> gelu(const Tensor<T>&);                                                        \
  template Tensor<T> avg_pool2(const Tensor<T>&);                                                   \
  template Tensor<T> avg_pool2_transpose(const Tensor<T>&);                                         \
  template Tensor<T> cross_entropy_smoothed(const Tensor<T>&, std::span<const int>, double);        \
  template Tensor<T> dropout(const Tensor<T>&, double, bool, std::mt19937_64&);                     \
  template Tensor<T> cls_attention_scores(const Tensor<T>&, const Tensor<T>&, std::size_t);         \
  template Tensor<T> cls_attention_mix(const Tensor<T>&, const Tensor<T>&, std::size_t);

HIT_INSTANTIATE_OPS(float)
HIT_INSTANTIATE_OPS(double)

#undef HIT_INSTANTIATE_OPS

}  // namespace hit::ad
