#include <cstdlib>
#include <string_view>

#include "lab/error.hpp"
#include "lab/simd/kernels.hpp"

namespace lab::simd {

bool available(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      return detail::avx2_table() != nullptr && __builtin_cpu_supports("avx2") &&
             __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) throw CapabilityError("requested SIMD kernel table is not available");
  return isa == Isa::Avx2 ? *detail::avx2_table() : detail::kScalarTable;
}

const KernelTable& active() {
  static const KernelTable& chosen = [] () -> const KernelTable& {
    const char* env = std::getenv("LAB_SIMD");
    const std::string_view want = env ? env : "";
    if (want == "scalar") return detail::kScalarTable;
    if (available(Isa::Avx2)) return *detail::avx2_table();
    return detail::kScalarTable;
  }();
  return chosen;
}

}  // namespace lab::simd
