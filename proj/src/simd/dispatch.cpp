#include <atomic>
#include <cstdlib>
#include <string_view>

#include "pcc/simd/kernels.hpp"

namespace pcc::simd {
namespace {

Isa initial_isa() {
  const Isa best = detected_isa();
  if (const char* env = std::getenv("PCC_SIMD")) {
    const std::string_view want(env);
    if (want == "scalar") return Isa::Scalar;
    if (want == "avx2" && best == Isa::Avx2) return Isa::Avx2;
  }
  return best;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

Isa detected_isa() {
#if defined(__x86_64__) || defined(__i386__)
  static const bool has_avx2 = __builtin_cpu_supports("avx2");
  return has_avx2 ? Isa::Avx2 : Isa::Scalar;
#else
  return Isa::Scalar;
#endif
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && detected_isa() != Isa::Avx2) isa = Isa::Scalar;
  active().store(isa, std::memory_order_relaxed);
}

const KernelTable& kernels(Isa isa) {
  static const KernelTable scalar = detail::scalar_table();
  if (isa == Isa::Avx2 && detected_isa() == Isa::Avx2) {
    static const KernelTable avx2 = detail::avx2_table();
    return avx2;
  }
  return scalar;
}

const KernelTable& kernels() { return kernels(active_isa()); }

}  // namespace pcc::simd
