#include <cstdlib>
#include <cstring>

#include "cklab/errors.hpp"
#include "cklab/kernels.hpp"

namespace cklab::kernels {

// Defined in kernels_avx2.cpp; nullptr when that TU was built without AVX2.
const Table* avx2_table_impl();

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const Table& pick() {
  const Table* avx2 = cpu_has_avx2() ? avx2_table_impl() : nullptr;
  if (const char* force = std::getenv("CKLAB_KERNELS")) {
    if (std::strcmp(force, "scalar") == 0) return scalar_table();
    if (std::strcmp(force, "avx2") == 0) {
      if (!avx2) throw ConfigError("CKLAB_KERNELS=avx2 but AVX2 unavailable");
      return *avx2;
    }
    throw ConfigError(std::string("unknown CKLAB_KERNELS value: ") + force);
  }
  return avx2 ? *avx2 : scalar_table();
}

}  // namespace

const Table& active() {
  static const Table& table = pick();
  return table;
}

const Table* avx2_table() {
  return cpu_has_avx2() ? avx2_table_impl() : nullptr;
}

}  // namespace cklab::kernels
