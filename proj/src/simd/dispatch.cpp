#include "chj/error.hpp"
#include "chj/simd/lax_oleinik_kernel.hpp"

namespace chj::simd {

const char* name(Backend backend) noexcept {
  switch (backend) {
    case Backend::automatic: return "automatic";
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
  }
  return "unknown";
}

bool avx2_available() noexcept {
#if CHJ_HAVE_AVX2_TU && (defined(__GNUC__) || defined(__clang__))
  static const bool supported = __builtin_cpu_supports("avx2");
  return supported;
#else
  return false;
#endif
}

Backend resolve(Backend requested) noexcept {
  if (requested == Backend::scalar) return Backend::scalar;
  return avx2_available() ? Backend::avx2 : Backend::scalar;
}

void minimize(Backend backend, const MinimizeRequest& req, const MinimizeOutput& out) {
  if (req.n % 4 != 0) throw Error(ErrorCode::InvalidArgument, "kernel node count must be a multiple of 4");
  if (resolve(backend) == Backend::avx2) {
    minimize_avx2(req, out);
  } else {
    minimize_scalar(req, out);
  }
}

#if !CHJ_HAVE_AVX2_TU
void minimize_avx2(const MinimizeRequest& req, const MinimizeOutput& out) { minimize_scalar(req, out); }
#endif

}  // namespace chj::simd
