#include <cstdlib>
#include <cstring>
#include <stdexcept>

#include "ebv/kernels.hpp"

namespace ebv::kernels {

namespace {

constexpr KernelSet kScalar{&scalar::lf_hamiltonian, &scalar::godunov_hamiltonian, &scalar::relax, Isa::scalar};
constexpr KernelSet kAvx2{&avx2::lf_hamiltonian, &avx2::godunov_hamiltonian, &avx2::relax, Isa::avx2};

const KernelSet& select() {
  const char* force = std::getenv("EBV_SIMD");
  if (force != nullptr && std::strcmp(force, "scalar") == 0) return kScalar;
  return avx2_supported() ? kAvx2 : kScalar;
}

}  // namespace

const char* isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

bool avx2_supported() {
#if defined(EBV_HAVE_AVX2_KERNELS) && (defined(__x86_64__) || defined(__i386__))
  static const bool ok = __builtin_cpu_supports("avx2");
  return ok;
#else
  return false;
#endif
}

const KernelSet& kernels_for(Isa isa) {
  if (isa == Isa::avx2) {
    if (!avx2_supported()) throw std::runtime_error("AVX2 kernels not available on this CPU/build");
    return kAvx2;
  }
  return kScalar;
}

const KernelSet& active() {
  static const KernelSet& chosen = select();
  return chosen;
}

}  // namespace ebv::kernels
