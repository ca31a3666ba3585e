#pragma once

#include <cstddef>
#include <cstdint>

namespace plkit::kernels {

enum class Isa { scalar, avx2, neon };

// Lane-independent batch primitives behind the hot loops (NMS sweeps,
// assignment enumeration, attention gating). Every implementation of a
// kernel performs the identical per-element IEEE operation sequence, so
// outputs are bit-identical across ISAs; reductions stay with the callers.
// Inputs must be finite.
struct Ops {
  // out[i] = IoU of the query box against box i of the SoA arrays.
  void (*iou_one_vs_many)(double qx1, double qy1, double qx2, double qy2,
                          const double* x1, const double* y1,
                          const double* x2, const double* y2,
                          std::size_t n, double* out);

  void (*area_many)(const double* x1, const double* y1,
                    const double* x2, const double* y2,
                    std::size_t n, double* out);

  void (*mul_many)(const double* a, const double* b, std::size_t n, double* out);

  void (*clamp_many)(const double* v, double lo, double hi, std::size_t n, double* out);

  // out[i] = prod_{j<terms} (bit j of (base+i) set ? on[j] : off[j]).
  // terms <= 32; base+count must not overflow 32 bits.
  void (*select_product_many)(std::uint32_t base, std::size_t count,
                              const double* on, const double* off,
                              int terms, double* out);

  // out[i] = sum_{j<terms} (bit j of (base+i) set ? on[j] : off[j]).
  void (*select_sum_many)(std::uint32_t base, std::size_t count,
                          const double* on, const double* off,
                          int terms, double* out);
};

// Runtime-selected table for this machine.
const Ops& ops();

// A specific table; throws std::invalid_argument when the ISA is not
// available in this build/CPU. The scalar table always exists.
const Ops& ops(Isa isa);

Isa active_isa();
bool isa_available(Isa isa);
const char* isa_name(Isa isa);

}  // namespace plkit::kernels
