#include "pcc/simd/kernels.hpp"

namespace pcc::simd {
namespace {

template <class T>
void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const T* a,
             const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      const T* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

template <class T>
void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const T* a,
             const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const T* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T av = a[i * k + p];
      T* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] = crow[j] + av * brow[j];
    }
  }
}

template <class T>
inline T sq3(T dx, T dy, T dz) {
  return (dx * dx + dy * dy) + dz * dz;
}

template <class T>
void nearest(const T* queries, std::size_t nq, const T* ref, std::size_t nr,
             T* dist, std::uint32_t* index) {
  const T* rx = ref;
  const T* ry = ref + nr;
  const T* rz = ref + 2 * nr;
  for (std::size_t q = 0; q < nq; ++q) {
    const T qx = queries[3 * q], qy = queries[3 * q + 1],
            qz = queries[3 * q + 2];
    T best = sq3(rx[0] - qx, ry[0] - qy, rz[0] - qz);
    std::uint32_t arg = 0;
    for (std::size_t j = 1; j < nr; ++j) {
      const T d = sq3(rx[j] - qx, ry[j] - qy, rz[j] - qz);
      if (d < best) {
        best = d;
        arg = static_cast<std::uint32_t>(j);
      }
    }
    dist[q] = best;
    index[q] = arg;
  }
}

template <class T>
void sq_dist(const T* soa, std::size_t n, const T* c, T* out) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = sq3(soa[i] - c[0], soa[n + i] - c[1], soa[2 * n + i] - c[2]);
}

template <class T>
void min_update(const T* soa, std::size_t n, const T* c, T* min_dist) {
  for (std::size_t i = 0; i < n; ++i) {
    const T d = sq3(soa[i] - c[0], soa[n + i] - c[1], soa[2 * n + i] - c[2]);
    if (d < min_dist[i]) min_dist[i] = d;
  }
}

}  // namespace

namespace detail {
KernelTable scalar_table() {
  return KernelTable{
      {&gemm_nn<float>, &gemm_tn<float>},
      {&gemm_nn<double>, &gemm_tn<double>},
      {&nearest<float>, &sq_dist<float>, &min_update<float>},
      {&nearest<double>, &sq_dist<double>, &min_update<double>},
  };
}
}  // namespace detail

}  // namespace pcc::simd
