#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pcc/diff/params.hpp"
#include "pcc/diff/tensor.hpp"

// Differentiable ops over matrices. Shape errors throw ShapeMismatch.
namespace pcc::diff {

// [m,k] x [k,n] -> [m,n]
template <class T>
Var<T> matmul(Var<T> a, Var<T> b);
// [m,k] x [n,k]^T -> [m,n]
template <class T>
Var<T> matmul_nt(Var<T> a, Var<T> b);
// x[*,in] W[in,out] + b[1,out]
template <class T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b);

template <class T>
Var<T> add(Var<T> a, Var<T> b);
template <class T>
Var<T> sub(Var<T> a, Var<T> b);
template <class T>
Var<T> scale(Var<T> a, T factor);
// Adds row vector v[1,n] to every row of a[m,n].
template <class T>
Var<T> add_row(Var<T> a, Var<T> v);

template <class T>
Var<T> relu(Var<T> x);
template <class T>
Var<T> softmax_rows(Var<T> x);

struct BatchNormOptions {
  double momentum = 0.1;
  double eps = 1e-5;
};

// Per-column normalisation over rows. Training tapes use batch statistics
// and update the running buffers (rows must be >= 2, else DegenerateBatch);
// eval tapes use the running statistics.
template <class T>
Var<T> batchnorm(Var<T> x, Var<T> gamma, Var<T> beta,
                 Parameter<T>& running_mean, Parameter<T>& running_var,
                 BatchNormOptions opts = {});

// [m,n] -> [1,n], column-wise max over rows.
template <class T>
Var<T> max_rows(Var<T> x);
// [g*k,n] -> [g,n], column-wise max over each consecutive block of k rows.
template <class T>
Var<T> segment_max(Var<T> x, std::size_t k);

template <class T>
Var<T> concat_cols(std::span<const Var<T>> parts);
template <class T>
Var<T> concat_rows(std::span<const Var<T>> parts);
template <class T>
Var<T> slice_cols(Var<T> x, std::size_t start, std::size_t width);
// out[i] = x[index[i]]; backward scatter-adds.
template <class T>
Var<T> gather_rows(Var<T> x, std::span<const std::uint32_t> index);
template <class T>
Var<T> reshape(Var<T> x, std::size_t rows, std::size_t cols);

template <class T>
Var<T> sum(Var<T> x);

// Symmetric L2 Chamfer distance between point sets stored as [n,3] and
// [m,3] rows; scalar result accumulated in f64. The gradient flows through
// each point's nearest-neighbour residuals in both directions.
template <class T>
Var<T> chamfer_l2(Var<T> a, Var<T> b);

}  // namespace pcc::diff
