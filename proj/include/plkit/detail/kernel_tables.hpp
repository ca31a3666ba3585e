#pragma once

#include "plkit/kernels.hpp"

namespace plkit::kernels::detail {

const Ops& scalar_table();
const Ops& avx2_table();  // defined only when the AVX2 TU is in the build
const Ops& neon_table();  // defined only when the NEON TU is in the build

}  // namespace plkit::kernels::detail
