#include "pcc/diff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pcc/error.hpp"
#include "pcc/simd/kernels.hpp"

namespace pcc::diff {
namespace {

[[noreturn]] void shape_error(const char* op, const std::string& detail) {
  fail(ErrorKind::ShapeMismatch, std::string(op) + ": " + detail);
}

std::string dims(std::size_t r, std::size_t c) {
  return "[" + std::to_string(r) + "," + std::to_string(c) + "]";
}

template <class T>
std::string dims(const Var<T>& v) {
  return dims(v.rows(), v.cols());
}

template <class T>
std::vector<T> transpose(const T* src, std::size_t rows, std::size_t cols) {
  std::vector<T> out(rows * cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[c * rows + r] = src[r * cols + c];
  return out;
}

template <class T>
Tape<T>& tape_of(const Var<T>& a) {
  return *a.tape();
}

template <class T>
void same_tape(const Var<T>& a, const Var<T>& b, const char* op) {
  if (a.tape() != b.tape()) shape_error(op, "operands live on different tapes");
}

template <class T>
void note_bits(Tape<T>& tape, const std::vector<bool>& bits) {
  std::uint64_t word = 0;
  std::size_t n = 0;
  for (const bool b : bits) {
    word = (word << 1) | (b ? 1u : 0u);
    if (++n == 64) {
      tape.note_kink(word);
      word = 0;
      n = 0;
    }
  }
  tape.note_kink(word ^ (static_cast<std::uint64_t>(n) << 56));
}

}  // namespace

template <class T>
Var<T> matmul(Var<T> a, Var<T> b) {
  same_tape(a, b, "matmul");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) shape_error("matmul", dims(a) + " x " + dims(b));
  Tensor<T> out(m, n);
  simd::gemm<T>().nn(m, n, k, a.value().ptr(), b.value().ptr(), out.ptr());
  return tape_of(a).push(
      std::move(out), {a, b}, [a, b, m, n, k](Tape<T>& t, std::uint32_t self) {
        const T* g = t.grad_buffer(self).data();
        if (a.requires_grad()) {
          const auto bt = transpose(b.value().ptr(), k, n);
          simd::gemm<T>().nn(m, k, n, g, bt.data(), t.grad_buffer(a.id()).data());
        }
        if (b.requires_grad())
          simd::gemm<T>().tn(m, n, k, a.value().ptr(), g,
                             t.grad_buffer(b.id()).data());
      });
}

template <class T>
Var<T> matmul_nt(Var<T> a, Var<T> b) {
  same_tape(a, b, "matmul_nt");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) shape_error("matmul_nt", dims(a) + " x " + dims(b) + "^T");
  Tensor<T> out(m, n);
  const auto bt = transpose(b.value().ptr(), n, k);
  simd::gemm<T>().nn(m, n, k, a.value().ptr(), bt.data(), out.ptr());
  return tape_of(a).push(
      std::move(out), {a, b}, [a, b, m, n, k](Tape<T>& t, std::uint32_t self) {
        const T* g = t.grad_buffer(self).data();
        if (a.requires_grad())
          simd::gemm<T>().nn(m, k, n, g, b.value().ptr(),
                             t.grad_buffer(a.id()).data());
        if (b.requires_grad())
          simd::gemm<T>().tn(m, k, n, g, a.value().ptr(),
                             t.grad_buffer(b.id()).data());
      });
}

template <class T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
  same_tape(x, w, "linear");
  same_tape(x, b, "linear");
  const std::size_t m = x.rows(), in = x.cols(), out_w = w.cols();
  if (w.rows() != in) shape_error("linear", dims(x) + " x " + dims(w));
  if (b.size() != out_w)
    shape_error("linear", "bias has " + std::to_string(b.size()) +
                              " elements, expected " + std::to_string(out_w));
  Tensor<T> out(m, out_w);
  const T* bias = b.value().ptr();
  for (std::size_t r = 0; r < m; ++r)
    std::copy(bias, bias + out_w, out.ptr() + r * out_w);
  simd::gemm<T>().nn(m, out_w, in, x.value().ptr(), w.value().ptr(), out.ptr());
  return tape_of(x).push(
      std::move(out), {x, w, b},
      [x, w, b, m, in, out_w](Tape<T>& t, std::uint32_t self) {
        const T* g = t.grad_buffer(self).data();
        if (x.requires_grad()) {
          const auto wt = transpose(w.value().ptr(), in, out_w);
          simd::gemm<T>().nn(m, in, out_w, g, wt.data(),
                             t.grad_buffer(x.id()).data());
        }
        if (w.requires_grad())
          simd::gemm<T>().tn(m, out_w, in, x.value().ptr(), g,
                             t.grad_buffer(w.id()).data());
        if (b.requires_grad()) {
          auto gb = t.grad_buffer(b.id());
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < out_w; ++c) gb[c] += g[r * out_w + c];
        }
      });
}

template <class T>
Var<T> add(Var<T> a, Var<T> b) {
  same_tape(a, b, "add");
  if (a.shape() != b.shape()) shape_error("add", dims(a) + " + " + dims(b));
  Tensor<T> out = a.value();
  const T* bv = b.value().ptr();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b](Tape<T>& t, std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           for (const auto& v : {a, b}) {
                             if (!v.requires_grad()) continue;
                             auto gv = t.grad_buffer(v.id());
                             for (std::size_t i = 0; i < g.size(); ++i)
                               gv[i] += g[i];
                           }
                         });
}

template <class T>
Var<T> sub(Var<T> a, Var<T> b) {
  same_tape(a, b, "sub");
  if (a.shape() != b.shape()) shape_error("sub", dims(a) + " - " + dims(b));
  Tensor<T> out = a.value();
  const T* bv = b.value().ptr();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return tape_of(a).push(std::move(out), {a, b},
                         [a, b](Tape<T>& t, std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           if (a.requires_grad()) {
                             auto ga = t.grad_buffer(a.id());
                             for (std::size_t i = 0; i < g.size(); ++i)
                               ga[i] += g[i];
                           }
                           if (b.requires_grad()) {
                             auto gb = t.grad_buffer(b.id());
                             for (std::size_t i = 0; i < g.size(); ++i)
                               gb[i] -= g[i];
                           }
                         });
}

template <class T>
Var<T> scale(Var<T> a, T factor) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v *= factor;
  return tape_of(a).push(std::move(out), {a},
                         [a, factor](Tape<T>& t, std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           auto ga = t.grad_buffer(a.id());
                           for (std::size_t i = 0; i < g.size(); ++i)
                             ga[i] += factor * g[i];
                         });
}

template <class T>
Var<T> add_row(Var<T> a, Var<T> v) {
  same_tape(a, v, "add_row");
  const std::size_t m = a.rows(), n = a.cols();
  if (v.size() != n) shape_error("add_row", dims(a) + " + row " + dims(v));
  Tensor<T> out = a.value();
  const T* rv = v.value().ptr();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) out[r * n + c] += rv[c];
  return tape_of(a).push(std::move(out), {a, v},
                         [a, v, m, n](Tape<T>& t, std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           if (a.requires_grad()) {
                             auto ga = t.grad_buffer(a.id());
                             for (std::size_t i = 0; i < g.size(); ++i)
                               ga[i] += g[i];
                           }
                           if (v.requires_grad()) {
                             auto gv = t.grad_buffer(v.id());
                             for (std::size_t r = 0; r < m; ++r)
                               for (std::size_t c = 0; c < n; ++c)
                                 gv[c] += g[r * n + c];
                           }
                         });
}

template <class T>
Var<T> relu(Var<T> x) {
  Tensor<T> out = x.value();
  for (auto& v : out.data()) v = v > T(0) ? v : T(0);
  Tape<T>& tape = tape_of(x);
  if (tape.tracking_kinks()) {
    std::vector<bool> bits(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) bits[i] = x.value()[i] > T(0);
    note_bits(tape, bits);
  }
  return tape.push(std::move(out), {x}, [x](Tape<T>& t, std::uint32_t self) {
    const auto g = t.grad_buffer(self);
    auto gx = t.grad_buffer(x.id());
    const T* xv = x.value().ptr();
    for (std::size_t i = 0; i < g.size(); ++i)
      if (xv[i] > T(0)) gx[i] += g[i];
  });
}

template <class T>
Var<T> softmax_rows(Var<T> x) {
  const std::size_t m = x.rows(), n = x.cols();
  Tensor<T> out = x.value();
  for (std::size_t r = 0; r < m; ++r) {
    T* row = out.ptr() + r * n;
    const T mx = *std::max_element(row, row + n);
    T total = T(0);
    for (std::size_t c = 0; c < n; ++c) {
      row[c] = std::exp(row[c] - mx);
      total += row[c];
    }
    for (std::size_t c = 0; c < n; ++c) row[c] /= total;
  }
  return tape_of(x).push(std::move(out), {x},
                         [x, m, n](Tape<T>& t, std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           auto gx = t.grad_buffer(x.id());
                           const T* yv = t.value(self).ptr();
                           for (std::size_t r = 0; r < m; ++r) {
                             T dot = T(0);
                             for (std::size_t c = 0; c < n; ++c)
                               dot += g[r * n + c] * yv[r * n + c];
                             for (std::size_t c = 0; c < n; ++c)
                               gx[r * n + c] +=
                                   yv[r * n + c] * (g[r * n + c] - dot);
                           }
                         });
}

template <class T>
Var<T> batchnorm(Var<T> x, Var<T> gamma, Var<T> beta,
                 Parameter<T>& running_mean, Parameter<T>& running_var,
                 BatchNormOptions opts) {
  same_tape(x, gamma, "batchnorm");
  same_tape(x, beta, "batchnorm");
  const std::size_t m = x.rows(), n = x.cols();
  if (gamma.size() != n || beta.size() != n || running_mean.value.size() != n ||
      running_var.value.size() != n)
    shape_error("batchnorm", "per-feature parameters must have " +
                                 std::to_string(n) + " elements");
  Tape<T>& tape = tape_of(x);
  const bool train = tape.training();
  if (train && m < 2)
    fail(ErrorKind::DegenerateBatch,
         "batchnorm in training mode needs at least 2 rows, got " +
             std::to_string(m));

  const T* xv = x.value().ptr();
  std::vector<T> mean(n), inv_std(n);
  if (train) {
    for (std::size_t c = 0; c < n; ++c) {
      double s = 0.0;
      for (std::size_t r = 0; r < m; ++r) s += xv[r * n + c];
      const double mu = s / static_cast<double>(m);
      double ss = 0.0;
      for (std::size_t r = 0; r < m; ++r) {
        const double d = xv[r * n + c] - mu;
        ss += d * d;
      }
      const double var = ss / static_cast<double>(m);
      mean[c] = static_cast<T>(mu);
      inv_std[c] = static_cast<T>(1.0 / std::sqrt(var + opts.eps));
      const double unbiased = ss / static_cast<double>(m - 1);
      T& rm = running_mean.value[c];
      T& rv = running_var.value[c];
      rm = static_cast<T>((1.0 - opts.momentum) * rm + opts.momentum * mu);
      rv = static_cast<T>((1.0 - opts.momentum) * rv +
                          opts.momentum * unbiased);
    }
  } else {
    for (std::size_t c = 0; c < n; ++c) {
      mean[c] = running_mean.value[c];
      inv_std[c] = static_cast<T>(
          1.0 / std::sqrt(static_cast<double>(running_var.value[c]) + opts.eps));
    }
  }

  Tensor<T> xhat(m, n);
  Tensor<T> out(m, n);
  const T* gv = gamma.value().ptr();
  const T* bv = beta.value().ptr();
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const T h = (xv[r * n + c] - mean[c]) * inv_std[c];
      xhat[r * n + c] = h;
      out[r * n + c] = gv[c] * h + bv[c];
    }
  return tape.push(
      std::move(out), {x, gamma, beta},
      [x, gamma, beta, m, n, train, xhat = std::move(xhat),
       inv_std = std::move(inv_std)](Tape<T>& t, std::uint32_t self) {
        const auto g = t.grad_buffer(self);
        const T* gm = gamma.value().ptr();
        if (gamma.requires_grad()) {
          auto gg = t.grad_buffer(gamma.id());
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c)
              gg[c] += g[r * n + c] * xhat[r * n + c];
        }
        if (beta.requires_grad()) {
          auto gb = t.grad_buffer(beta.id());
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c) gb[c] += g[r * n + c];
        }
        if (!x.requires_grad()) return;
        auto gx = t.grad_buffer(x.id());
        if (!train) {
          for (std::size_t r = 0; r < m; ++r)
            for (std::size_t c = 0; c < n; ++c)
              gx[r * n + c] += g[r * n + c] * gm[c] * inv_std[c];
          return;
        }
        const T inv_m = T(1) / static_cast<T>(m);
        for (std::size_t c = 0; c < n; ++c) {
          T sum_d = T(0), sum_dh = T(0);
          for (std::size_t r = 0; r < m; ++r) {
            const T d = g[r * n + c] * gm[c];
            sum_d += d;
            sum_dh += d * xhat[r * n + c];
          }
          for (std::size_t r = 0; r < m; ++r) {
            const T d = g[r * n + c] * gm[c];
            gx[r * n + c] += inv_std[c] * inv_m *
                             (static_cast<T>(m) * d - sum_d -
                              xhat[r * n + c] * sum_dh);
          }
        }
      });
}

template <class T>
Var<T> segment_max(Var<T> x, std::size_t k) {
  const std::size_t rows = x.rows(), n = x.cols();
  if (k == 0 || rows % k != 0)
    shape_error("segment_max", std::to_string(rows) +
                                   " rows do not split into blocks of " +
                                   std::to_string(k));
  const std::size_t groups = rows / k;
  const T* xv = x.value().ptr();
  Tensor<T> out(groups, n);
  std::vector<std::uint32_t> arg(groups * n);
  for (std::size_t gi = 0; gi < groups; ++gi)
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t best = gi * k;
      for (std::size_t r = gi * k + 1; r < (gi + 1) * k; ++r)
        if (xv[r * n + c] > xv[best * n + c]) best = r;
      out[gi * n + c] = xv[best * n + c];
      arg[gi * n + c] = static_cast<std::uint32_t>(best);
    }
  Tape<T>& tape = tape_of(x);
  if (tape.tracking_kinks())
    for (const auto a : arg) tape.note_kink(a);
  return tape.push(std::move(out), {x},
                   [x, n, arg = std::move(arg)](Tape<T>& t, std::uint32_t self) {
                     const auto g = t.grad_buffer(self);
                     auto gx = t.grad_buffer(x.id());
                     for (std::size_t i = 0; i < g.size(); ++i)
                       gx[arg[i] * n + i % n] += g[i];
                   });
}

template <class T>
Var<T> max_rows(Var<T> x) {
  return segment_max(x, x.rows());
}

template <class T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) shape_error("concat_cols", "no inputs");
  const std::size_t m = parts[0].rows();
  std::size_t total = 0;
  for (const auto& p : parts) {
    same_tape(parts[0], p, "concat_cols");
    if (p.rows() != m)
      shape_error("concat_cols", dims(parts[0]) + " with " + dims(p));
    total += p.cols();
  }
  Tensor<T> out(m, total);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const std::size_t w = p.cols();
    const T* pv = p.value().ptr();
    for (std::size_t r = 0; r < m; ++r)
      std::copy(pv + r * w, pv + (r + 1) * w, out.ptr() + r * total + offset);
    offset += w;
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return tape_of(parts[0]).push(
      std::move(out), parts,
      [inputs, m, total](Tape<T>& t, std::uint32_t self) {
        const auto g = t.grad_buffer(self);
        std::size_t offset = 0;
        for (const auto& p : inputs) {
          const std::size_t w = p.cols();
          if (p.requires_grad()) {
            auto gp = t.grad_buffer(p.id());
            for (std::size_t r = 0; r < m; ++r)
              for (std::size_t c = 0; c < w; ++c)
                gp[r * w + c] += g[r * total + offset + c];
          }
          offset += w;
        }
      });
}

template <class T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) shape_error("concat_rows", "no inputs");
  const std::size_t n = parts[0].cols();
  std::size_t total = 0;
  for (const auto& p : parts) {
    same_tape(parts[0], p, "concat_rows");
    if (p.cols() != n)
      shape_error("concat_rows", dims(parts[0]) + " with " + dims(p));
    total += p.rows();
  }
  Tensor<T> out(total, n);
  std::size_t offset = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.ptr() + offset);
    offset += p.size();
  }
  std::vector<Var<T>> inputs(parts.begin(), parts.end());
  return tape_of(parts[0]).push(
      std::move(out), parts, [inputs](Tape<T>& t, std::uint32_t self) {
        const auto g = t.grad_buffer(self);
        std::size_t offset = 0;
        for (const auto& p : inputs) {
          if (p.requires_grad()) {
            auto gp = t.grad_buffer(p.id());
            for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += g[offset + i];
          }
          offset += p.size();
        }
      });
}

template <class T>
Var<T> slice_cols(Var<T> x, std::size_t start, std::size_t width) {
  const std::size_t m = x.rows(), n = x.cols();
  if (width == 0 || start + width > n)
    shape_error("slice_cols", "columns [" + std::to_string(start) + ", " +
                                  std::to_string(start + width) + ") of " +
                                  dims(x));
  Tensor<T> out(m, width);
  const T* xv = x.value().ptr();
  for (std::size_t r = 0; r < m; ++r)
    std::copy(xv + r * n + start, xv + r * n + start + width,
              out.ptr() + r * width);
  return tape_of(x).push(std::move(out), {x},
                         [x, m, n, start, width](Tape<T>& t, std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           auto gx = t.grad_buffer(x.id());
                           for (std::size_t r = 0; r < m; ++r)
                             for (std::size_t c = 0; c < width; ++c)
                               gx[r * n + start + c] += g[r * width + c];
                         });
}

template <class T>
Var<T> gather_rows(Var<T> x, std::span<const std::uint32_t> index) {
  const std::size_t m = x.rows(), n = x.cols();
  if (index.empty()) shape_error("gather_rows", "empty index");
  for (const auto i : index)
    if (i >= m)
      shape_error("gather_rows", "row " + std::to_string(i) + " of " + dims(x));
  Tensor<T> out(index.size(), n);
  const T* xv = x.value().ptr();
  for (std::size_t r = 0; r < index.size(); ++r)
    std::copy(xv + index[r] * n, xv + (index[r] + 1) * n, out.ptr() + r * n);
  std::vector<std::uint32_t> idx(index.begin(), index.end());
  return tape_of(x).push(std::move(out), {x},
                         [x, n, idx = std::move(idx)](Tape<T>& t,
                                                      std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           auto gx = t.grad_buffer(x.id());
                           for (std::size_t r = 0; r < idx.size(); ++r)
                             for (std::size_t c = 0; c < n; ++c)
                               gx[idx[r] * n + c] += g[r * n + c];
                         });
}

template <class T>
Var<T> reshape(Var<T> x, std::size_t rows, std::size_t cols) {
  if (rows * cols != x.size())
    shape_error("reshape", dims(x) + " to " + dims(rows, cols));
  Tensor<T> out = x.value();
  out.reshape({rows, cols});
  return tape_of(x).push(std::move(out), {x},
                         [x](Tape<T>& t, std::uint32_t self) {
                           const auto g = t.grad_buffer(self);
                           auto gx = t.grad_buffer(x.id());
                           for (std::size_t i = 0; i < g.size(); ++i)
                             gx[i] += g[i];
                         });
}

template <class T>
Var<T> sum(Var<T> x) {
  double s = 0.0;
  for (const T v : x.value().data()) s += v;
  return tape_of(x).push(Tensor<T>(1, 1, static_cast<T>(s)), {x},
                         [x](Tape<T>& t, std::uint32_t self) {
                           const T g = t.grad_buffer(self)[0];
                           for (auto& v : t.grad_buffer(x.id())) v += g;
                         });
}

template <class T>
Var<T> chamfer_l2(Var<T> a, Var<T> b) {
  same_tape(a, b, "chamfer_l2");
  if (a.cols() != 3 || b.cols() != 3)
    shape_error("chamfer_l2", "point sets must be [n,3], got " + dims(a) +
                                  " and " + dims(b));
  const std::size_t na = a.rows(), nb = b.rows();
  const T* av = a.value().ptr();
  const T* bv = b.value().ptr();
  auto soa = [](const T* p, std::size_t n) {
    std::vector<T> out(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
      out[i] = p[3 * i];
      out[n + i] = p[3 * i + 1];
      out[2 * n + i] = p[3 * i + 2];
    }
    return out;
  };
  const auto& kern = simd::distance<T>();
  std::vector<T> dab(na), dba(nb);
  std::vector<std::uint32_t> iab(na), iba(nb);
  {
    const auto bs = soa(bv, nb);
    kern.nearest(av, na, bs.data(), nb, dab.data(), iab.data());
    const auto as = soa(av, na);
    kern.nearest(bv, nb, as.data(), na, dba.data(), iba.data());
  }
  double sab = 0.0, sba = 0.0;
  for (const T d : dab) sab += d;
  for (const T d : dba) sba += d;
  const double value =
      sab / static_cast<double>(na) + sba / static_cast<double>(nb);

  Tape<T>& tape = tape_of(a);
  if (tape.tracking_kinks()) {
    for (const auto i : iab) tape.note_kink(i);
    for (const auto i : iba) tape.note_kink(i);
  }
  return tape.push(
      Tensor<T>(1, 1, static_cast<T>(value)), {a, b},
      [a, b, na, nb, iab = std::move(iab), iba = std::move(iba)](
          Tape<T>& t, std::uint32_t self) {
        const T g = t.grad_buffer(self)[0];
        const T* av = a.value().ptr();
        const T* bv = b.value().ptr();
        std::span<T> ga, gb;
        if (a.requires_grad()) ga = t.grad_buffer(a.id());
        if (b.requires_grad()) gb = t.grad_buffer(b.id());
        const T wa = g * T(2) / static_cast<T>(na);
        const T wb = g * T(2) / static_cast<T>(nb);
        for (std::size_t i = 0; i < na; ++i) {
          const std::size_t j = iab[i];
          for (int c = 0; c < 3; ++c) {
            const T r = wa * (av[3 * i + c] - bv[3 * j + c]);
            if (!ga.empty()) ga[3 * i + c] += r;
            if (!gb.empty()) gb[3 * j + c] -= r;
          }
        }
        for (std::size_t j = 0; j < nb; ++j) {
          const std::size_t i = iba[j];
          for (int c = 0; c < 3; ++c) {
            const T r = wb * (bv[3 * j + c] - av[3 * i + c]);
            if (!gb.empty()) gb[3 * j + c] += r;
            if (!ga.empty()) ga[3 * i + c] -= r;
          }
        }
      });
}

#define PCC_INSTANTIATE_OPS(T)                                               \
  template Var<T> matmul(Var<T>, Var<T>);                                    \
  template Var<T> matmul_nt(Var<T>, Var<T>);                                 \
  template Var<T> linear(Var<T>, Var<T>, Var<T>);                            \
  template Var<T> add(Var<T>, Var<T>);                                       \
  template Var<T> sub(Var<T>, Var<T>);                                       \
  template Var<T> scale(Var<T>, T);                                          \
  template Var<T> add_row(Var<T>, Var<T>);                                   \
  template Var<T> relu(Var<T>);                                              \
  template Var<T> softmax_rows(Var<T>);                                      \
  template Var<T> batchnorm(Var<T>, Var<T>, Var<T>, Parameter<T>&,           \
                            Parameter<T>&, BatchNormOptions);                \
  template Var<T> max_rows(Var<T>);                                          \
  template Var<T> segment_max(Var<T>, std::size_t);                          \
  template Var<T> concat_cols(std::span<const Var<T>>);                      \
  template Var<T> concat_rows(std::span<const Var<T>>);                      \
  template Var<T> slice_cols(Var<T>, std::size_t, std::size_t);              \
  template Var<T> gather_rows(Var<T>, std::span<const std::uint32_t>);       \
  template Var<T> reshape(Var<T>, std::size_t, std::size_t);                 \
  template Var<T> sum(Var<T>);                                               \
  template Var<T> chamfer_l2(Var<T>, Var<T>);

PCC_INSTANTIATE_OPS(float)
PCC_INSTANTIATE_OPS(double)

}  // namespace pcc::diff
