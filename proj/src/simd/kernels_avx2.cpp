#include <immintrin.h>

#include <limits>

#include "pcc/simd/kernels.hpp"

namespace pcc::simd {
namespace {

template <class T>
struct V;

template <>
struct V<float> {
  using reg = __m256;
  using ireg = __m256i;
  static constexpr std::size_t width = 8;
  static reg load(const float* p) { return _mm256_loadu_ps(p); }
  static void store(float* p, reg v) { _mm256_storeu_ps(p, v); }
  static reg set1(float v) { return _mm256_set1_ps(v); }
  static reg add(reg a, reg b) { return _mm256_add_ps(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_ps(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_ps(a, b); }
  static reg min(reg a, reg b) { return _mm256_min_ps(a, b); }
  static reg lt(reg a, reg b) { return _mm256_cmp_ps(a, b, _CMP_LT_OQ); }
  static reg blend(reg a, reg b, reg mask) {
    return _mm256_blendv_ps(a, b, mask);
  }
  static ireg iota() { return _mm256_setr_epi32(0, 1, 2, 3, 4, 5, 6, 7); }
  static ireg iset1(std::size_t v) {
    return _mm256_set1_epi32(static_cast<int>(v));
  }
  static ireg iadd(ireg a, ireg b) { return _mm256_add_epi32(a, b); }
  static ireg iblend(ireg a, ireg b, reg mask) {
    return _mm256_blendv_epi8(a, b, _mm256_castps_si256(mask));
  }
  static void istore(std::uint64_t* out, ireg v) {
    alignas(32) std::int32_t tmp[8];
    _mm256_store_si256(reinterpret_cast<__m256i*>(tmp), v);
    for (int l = 0; l < 8; ++l) out[l] = static_cast<std::uint64_t>(tmp[l]);
  }
};

template <>
struct V<double> {
  using reg = __m256d;
  using ireg = __m256i;
  static constexpr std::size_t width = 4;
  static reg load(const double* p) { return _mm256_loadu_pd(p); }
  static void store(double* p, reg v) { _mm256_storeu_pd(p, v); }
  static reg set1(double v) { return _mm256_set1_pd(v); }
  static reg add(reg a, reg b) { return _mm256_add_pd(a, b); }
  static reg sub(reg a, reg b) { return _mm256_sub_pd(a, b); }
  static reg mul(reg a, reg b) { return _mm256_mul_pd(a, b); }
  static reg min(reg a, reg b) { return _mm256_min_pd(a, b); }
  static reg lt(reg a, reg b) { return _mm256_cmp_pd(a, b, _CMP_LT_OQ); }
  static reg blend(reg a, reg b, reg mask) {
    return _mm256_blendv_pd(a, b, mask);
  }
  static ireg iota() { return _mm256_setr_epi64x(0, 1, 2, 3); }
  static ireg iset1(std::size_t v) {
    return _mm256_set1_epi64x(static_cast<long long>(v));
  }
  static ireg iadd(ireg a, ireg b) { return _mm256_add_epi64(a, b); }
  static ireg iblend(ireg a, ireg b, reg mask) {
    return _mm256_blendv_epi8(a, b, _mm256_castpd_si256(mask));
  }
  static void istore(std::uint64_t* out, ireg v) {
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out), v);
  }
};

template <class T>
void axpy_row(T* c, const T* b, T a, std::size_t n) {
  using v = V<T>;
  const auto av = v::set1(a);
  std::size_t j = 0;
  for (; j + v::width <= n; j += v::width)
    v::store(c + j, v::add(v::load(c + j), v::mul(av, v::load(b + j))));
  for (; j < n; ++j) c[j] = c[j] + a * b[j];
}

template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a,
             const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      axpy_row(c + i * n, b + p * n, a[i * k + p], n);
}

template <class T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a,
             const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p)
      axpy_row(c + p * n, b + i * n, a[i * k + p], n);
}

template <class T>
inline T sq3(T dx, T dy, T dz) {
  return (dx * dx + dy * dy) + dz * dz;
}

template <class T>
inline typename V<T>::reg vsq3(typename V<T>::reg dx, typename V<T>::reg dy,
                               typename V<T>::reg dz) {
  using v = V<T>;
  return v::add(v::add(v::mul(dx, dx), v::mul(dy, dy)), v::mul(dz, dz));
}

template <class T>
void nearest(const T* queries, std::size_t nq, const T* ref, std::size_t nr,
             T* dist, std::uint32_t* index) {
  using v = V<T>;
  constexpr std::size_t w = v::width;
  const T* rx = ref;
  const T* ry = ref + nr;
  const T* rz = ref + 2 * nr;
  const std::size_t nvec = nr / w * w;
  for (std::size_t q = 0; q < nq; ++q) {
    const T qx = queries[3 * q], qy = queries[3 * q + 1],
            qz = queries[3 * q + 2];
    T best = std::numeric_limits<T>::infinity();
    std::uint64_t arg = 0;
    if (nvec > 0) {
      const auto vx = v::set1(qx), vy = v::set1(qy), vz = v::set1(qz);
      auto vbest = v::set1(std::numeric_limits<T>::infinity());
      auto vidx = v::iset1(0);
      auto cur = v::iota();
      const auto step = v::iset1(w);
      for (std::size_t j = 0; j < nvec; j += w) {
        const auto d = vsq3<T>(v::sub(v::load(rx + j), vx),
                               v::sub(v::load(ry + j), vy),
                               v::sub(v::load(rz + j), vz));
        const auto mask = v::lt(d, vbest);
        vbest = v::blend(vbest, d, mask);
        vidx = v::iblend(vidx, cur, mask);
        cur = v::iadd(cur, step);
      }
      alignas(32) T lane_best[w];
      std::uint64_t lane_idx[w];
      v::store(lane_best, vbest);
      v::istore(lane_idx, vidx);
      best = lane_best[0];
      arg = lane_idx[0];
      for (std::size_t l = 1; l < w; ++l) {
        if (lane_best[l] < best ||
            (lane_best[l] == best && lane_idx[l] < arg)) {
          best = lane_best[l];
          arg = lane_idx[l];
        }
      }
    }
    for (std::size_t j = nvec; j < nr; ++j) {
      const T d = sq3(rx[j] - qx, ry[j] - qy, rz[j] - qz);
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    dist[q] = best;
    index[q] = static_cast<std::uint32_t>(arg);
  }
}

template <class T>
void sq_dist(const T* soa, std::size_t n, const T* c, T* out) {
  using v = V<T>;
  const auto cx = v::set1(c[0]), cy = v::set1(c[1]), cz = v::set1(c[2]);
  std::size_t i = 0;
  for (; i + v::width <= n; i += v::width)
    v::store(out + i, vsq3<T>(v::sub(v::load(soa + i), cx),
                              v::sub(v::load(soa + n + i), cy),
                              v::sub(v::load(soa + 2 * n + i), cz)));
  for (; i < n; ++i)
    out[i] = sq3(soa[i] - c[0], soa[n + i] - c[1], soa[2 * n + i] - c[2]);
}

template <class T>
void min_update(const T* soa, std::size_t n, const T* c, T* min_dist) {
  using v = V<T>;
  const auto cx = v::set1(c[0]), cy = v::set1(c[1]), cz = v::set1(c[2]);
  std::size_t i = 0;
  for (; i + v::width <= n; i += v::width) {
    const auto d = vsq3<T>(v::sub(v::load(soa + i), cx),
                           v::sub(v::load(soa + n + i), cy),
                           v::sub(v::load(soa + 2 * n + i), cz));
    // min(a, b) returns b unless a < b: identical to the scalar update.
    v::store(min_dist + i, v::min(d, v::load(min_dist + i)));
  }
  for (; i < n; ++i) {
    const T d = sq3(soa[i] - c[0], soa[n + i] - c[1], soa[2 * n + i] - c[2]);
    if (d < min_dist[i]) min_dist[i] = d;
  }
}

}  // namespace

namespace detail {
KernelTable avx2_table() {
  return KernelTable{
      {&gemm_nn<float>, &gemm_tn<float>},
      {&gemm_nn<double>, &gemm_tn<double>},
      {&nearest<float>, &sq_dist<float>, &min_update<float>},
      {&nearest<double>, &sq_dist<double>, &min_update<double>},
  };
}
}  // namespace detail

}  // namespace pcc::simd
