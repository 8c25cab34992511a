#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

// Hot inner loops with a scalar reference and an AVX2 variant chosen at
// runtime. Every variant evaluates the same expression tree per output
// element (no FMA, no reassociation), so scalar and AVX2 results are
// bit-identical; tests/test_simd.cpp enforces this.
namespace pcc::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

// Best ISA supported by this CPU.
Isa detected_isa();

// ISA used by kernels(). Defaults to detected_isa(); the PCC_SIMD
// environment variable ("scalar" or "avx2") or set_active_isa() override it.
Isa active_isa();
void set_active_isa(Isa isa);

template <class T>
struct GemmKernels {
  // C[m,n] += A[m,k] * B[k,n], all row-major, dense.
  void (*nn)(std::size_t m, std::size_t n, std::size_t k, const T* a,
             const T* b, T* c);
  // C[k,n] += A[m,k]^T * B[m,n].
  void (*tn)(std::size_t m, std::size_t n, std::size_t k, const T* a,
             const T* b, T* c);
};

template <class T>
struct DistanceKernels {
  // For each query point (xyz interleaved) the smallest squared distance
  // to the reference set and its index; ties keep the lowest index.
  // ref_soa holds x[0..nr), y[0..nr), z[0..nr).
  void (*nearest)(const T* queries, std::size_t nq, const T* ref_soa,
                  std::size_t nr, T* dist, std::uint32_t* index);
  // out[i] = |p_i - c|^2 for SoA points.
  void (*sq_dist)(const T* soa, std::size_t n, const T* center, T* out);
  // min_dist[i] = min(min_dist[i], |p_i - c|^2).
  void (*min_update)(const T* soa, std::size_t n, const T* center,
                     T* min_dist);
};

struct KernelTable {
  GemmKernels<float> gemm_f32;
  GemmKernels<double> gemm_f64;
  DistanceKernels<float> dist_f32;
  DistanceKernels<double> dist_f64;
};

const KernelTable& kernels();
const KernelTable& kernels(Isa isa);

template <class T>
const GemmKernels<T>& gemm();
template <class T>
const DistanceKernels<T>& distance();

template <>
inline const GemmKernels<float>& gemm<float>() { return kernels().gemm_f32; }
template <>
inline const GemmKernels<double>& gemm<double>() { return kernels().gemm_f64; }
template <>
inline const DistanceKernels<float>& distance<float>() {
  return kernels().dist_f32;
}
template <>
inline const DistanceKernels<double>& distance<double>() {
  return kernels().dist_f64;
}

namespace detail {
KernelTable scalar_table();
// Only valid to call when the CPU reports AVX2.
KernelTable avx2_table();
}  // namespace detail

}  // namespace pcc::simd
