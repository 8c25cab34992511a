#include <doctest.h>

#include <cstring>
#include <random>
#include <vector>
#include <array>

#include "pcc/simd/kernels.hpp"

using namespace pcc::simd;

namespace {

bool have_avx2() { return detected_isa() == Isa::Avx2; }

template <class T>
std::vector<T> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(rng));
  return v;
}

template <class T>
bool bit_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

template <class T>
void check_gemm(const GemmKernels<T>& s, const GemmKernels<T>& v) {
  std::mt19937_64 rng(7);
  for (const auto [m, n, k] : {std::array<std::size_t, 3>{1, 1, 1},
                               {3, 5, 7},
                               {17, 9, 33},
                               {8, 16, 4},
                               {31, 67, 13}}) {
    const auto a = random_vec<T>(rng, m * k);
    const auto b = random_vec<T>(rng, k * n);
    const auto c0 = random_vec<T>(rng, m * n);
    auto cs = c0, cv = c0;
    s.nn(m, n, k, a.data(), b.data(), cs.data());
    v.nn(m, n, k, a.data(), b.data(), cv.data());
    CHECK(bit_equal(cs, cv));

    const auto bt = random_vec<T>(rng, m * n);
    std::vector<T> ds(k * n, T(0)), dv(k * n, T(0));
    s.tn(m, n, k, a.data(), bt.data(), ds.data());
    v.tn(m, n, k, a.data(), bt.data(), dv.data());
    CHECK(bit_equal(ds, dv));
  }
}

template <class T>
void check_distance(const DistanceKernels<T>& s, const DistanceKernels<T>& v) {
  std::mt19937_64 rng(11);
  for (const std::size_t nr : {1u, 3u, 8u, 13u, 100u}) {
    const std::size_t nq = 37;
    const auto q = random_vec<T>(rng, 3 * nq);
    auto ref = random_vec<T>(rng, 3 * nr);
    // Duplicate reference points force index tie-breaks.
    if (nr > 4) {
      ref[3] = ref[0];
      ref[nr + 3] = ref[nr];
      ref[2 * nr + 3] = ref[2 * nr];
    }
    std::vector<T> ds(nq), dv(nq);
    std::vector<std::uint32_t> is(nq), iv(nq);
    s.nearest(q.data(), nq, ref.data(), nr, ds.data(), is.data());
    v.nearest(q.data(), nq, ref.data(), nr, dv.data(), iv.data());
    CHECK(bit_equal(ds, dv));
    CHECK(is == iv);

    const auto c = random_vec<T>(rng, 3);
    std::vector<T> os(nr), ov(nr);
    s.sq_dist(ref.data(), nr, c.data(), os.data());
    v.sq_dist(ref.data(), nr, c.data(), ov.data());
    CHECK(bit_equal(os, ov));

    auto ms = random_vec<T>(rng, nr);
    for (auto& x : ms) x = x * x;
    auto mv = ms;
    s.min_update(ref.data(), nr, c.data(), ms.data());
    v.min_update(ref.data(), nr, c.data(), mv.data());
    CHECK(bit_equal(ms, mv));
  }
}

}  // namespace

TEST_CASE("scalar and avx2 gemm kernels agree bit for bit") {
  if (!have_avx2()) return;
  const auto s = detail::scalar_table();
  const auto v = detail::avx2_table();
  check_gemm(s.gemm_f32, v.gemm_f32);
  check_gemm(s.gemm_f64, v.gemm_f64);
}

TEST_CASE("scalar and avx2 distance kernels agree bit for bit") {
  if (!have_avx2()) return;
  const auto s = detail::scalar_table();
  const auto v = detail::avx2_table();
  check_distance(s.dist_f32, v.dist_f32);
  check_distance(s.dist_f64, v.dist_f64);
}

TEST_CASE("nearest keeps the lowest index on ties") {
  const float ref[] = {1, 1, 0, 0, 0, 0, 0, 0, 0};  // x = 1,1,0 ; y,z = 0
  const float q[] = {0.5f, 0, 0};
  for (const Isa isa : {Isa::Scalar, Isa::Avx2}) {
    if (isa == Isa::Avx2 && !have_avx2()) continue;
    float d;
    std::uint32_t i;
    kernels(isa).dist_f32.nearest(q, 1, ref, 3, &d, &i);
    CHECK(i == 0);
    CHECK(d == doctest::Approx(0.25));
  }
}

TEST_CASE("active isa can be switched") {
  const Isa before = active_isa();
  set_active_isa(Isa::Scalar);
  CHECK(active_isa() == Isa::Scalar);
  CHECK(&kernels() != nullptr);
  set_active_isa(before);
  CHECK(isa_name(Isa::Scalar) == "scalar");
}
