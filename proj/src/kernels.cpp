#include "plkit/kernels.hpp"

#include <stdexcept>
#include <string>

#include "plkit/detail/kernel_tables.hpp"

namespace plkit::kernels {

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(PLKIT_HAVE_AVX2_TU)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
    case Isa::neon:
#if defined(PLKIT_HAVE_NEON_TU)
      return true;  // baseline on every aarch64 build target
#else
      return false;
#endif
  }
  return false;
}

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

const Ops& ops(Isa isa) {
  if (!isa_available(isa)) {
    throw std::invalid_argument(std::string("kernel ISA not available: ") +
                                isa_name(isa));
  }
  switch (isa) {
    case Isa::scalar:
      return detail::scalar_table();
    case Isa::avx2:
#if defined(PLKIT_HAVE_AVX2_TU)
      return detail::avx2_table();
#else
      break;
#endif
    case Isa::neon:
#if defined(PLKIT_HAVE_NEON_TU)
      return detail::neon_table();
#else
      break;
#endif
  }
  return detail::scalar_table();
}

Isa active_isa() {
  static const Isa chosen = [] {
    if (isa_available(Isa::avx2)) return Isa::avx2;
    if (isa_available(Isa::neon)) return Isa::neon;
    return Isa::scalar;
  }();
  return chosen;
}

const Ops& ops() {
  static const Ops& table = ops(active_isa());
  return table;
}

}  // namespace plkit::kernels
