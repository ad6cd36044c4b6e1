#include <immintrin.h>

#include <cmath>

#include "chj/simd/lax_oleinik_kernel.hpp"

// Mirrors kernel_scalar.cpp operation by operation so that both backends round
// identically (the build disables FMA contraction).

namespace chj::simd {

namespace {

struct Lanes {
  __m256d dt, cpv, drift, hia, pot;
  __m128i node_index;
  const double* base;
};

inline __m256d vabs(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }

inline __m256d cost_lanes(const Lanes& l, __m256d v, __m256d* foot_value) {
  const __m256d s = _mm256_mul_pd(v, l.cpv);
  const __m256d r = _mm256_round_pd(s, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d snap = _mm256_cmp_pd(vabs(_mm256_sub_pd(s, r)), _mm256_set1_pd(kSnapCells), _CMP_LT_OQ);
  const __m256d f = _mm256_floor_pd(s);
  const __m256d m = _mm256_blendv_pd(f, r, snap);
  const __m256d theta = _mm256_blendv_pd(_mm256_sub_pd(s, f), _mm256_setzero_pd(), snap);
  const __m128i idx = _mm_sub_epi32(l.node_index, _mm256_cvtpd_epi32(m));
  const __m256d a = _mm256_i32gather_pd(l.base, idx, 8);
  const __m256d b = _mm256_i32gather_pd(l.base, _mm_sub_epi32(idx, _mm_set1_epi32(1)), 8);
  const __m256d interp = _mm256_add_pd(a, _mm256_mul_pd(theta, _mm256_sub_pd(b, a)));
  if (foot_value) *foot_value = interp;
  const __m256d diff = _mm256_sub_pd(v, l.drift);
  const __m256d run = _mm256_mul_pd(l.dt, _mm256_sub_pd(_mm256_mul_pd(_mm256_mul_pd(diff, diff), l.hia), l.pot));
  return _mm256_add_pd(interp, run);
}

}  // namespace

void minimize_avx2(const MinimizeRequest& req, const MinimizeOutput& out) {
  const double* base = req.phi_ext + req.pad;
  const QuadraticNodeTable& t = *req.table;
  const __m256d dt = _mm256_set1_pd(req.dt);
  const __m256d g = _mm256_set1_pd(kGoldenRatio);
  const __m256d vmax = _mm256_set1_pd(req.v_max);
  const __m256d neg_vmax = _mm256_set1_pd(-req.v_max);
  const __m256d spacing = _mm256_set1_pd(req.spacing);

  for (int i0 = 0; i0 < req.n; i0 += 4) {
    Lanes l;
    l.dt = dt;
    l.cpv = _mm256_set1_pd(req.cells_per_velocity);
    l.drift = _mm256_loadu_pd(t.drift.data() + i0);
    l.hia = _mm256_loadu_pd(t.half_inv_a.data() + i0);
    l.pot = _mm256_loadu_pd(t.potential.data() + i0);
    l.node_index = _mm_setr_epi32(i0, i0 + 1, i0 + 2, i0 + 3);
    l.base = base;

    __m256d best = _mm256_set1_pd(INFINITY);
    __m256d best_v = _mm256_setzero_pd();
    __m256d best_foot = _mm256_setzero_pd();
    for (int k = 0; k < req.n_velocities; ++k) {
      const double v = req.velocities[k];
      // Same foot for all four lanes: contiguous loads instead of gathers.
      const double s = v * req.cells_per_velocity;
      const double r = std::nearbyint(s);
      double m;
      double theta;
      if (std::fabs(s - r) < kSnapCells) {
        m = r;
        theta = 0.0;
      } else {
        m = std::floor(s);
        theta = s - m;
      }
      const int mi = static_cast<int>(m);
      const __m256d a = _mm256_loadu_pd(base + i0 - mi);
      const __m256d b = _mm256_loadu_pd(base + i0 - mi - 1);
      const __m256d interp = _mm256_add_pd(a, _mm256_mul_pd(_mm256_set1_pd(theta), _mm256_sub_pd(b, a)));
      const __m256d vv = _mm256_set1_pd(v);
      const __m256d diff = _mm256_sub_pd(vv, l.drift);
      const __m256d run =
          _mm256_mul_pd(dt, _mm256_sub_pd(_mm256_mul_pd(_mm256_mul_pd(diff, diff), l.hia), l.pot));
      const __m256d c = _mm256_add_pd(interp, run);
      const __m256d better = _mm256_cmp_pd(c, best, _CMP_LT_OQ);
      best = _mm256_blendv_pd(best, c, better);
      best_v = _mm256_blendv_pd(best_v, vv, better);
      best_foot = _mm256_blendv_pd(best_foot, interp, better);
    }

    __m256d lo = _mm256_max_pd(neg_vmax, _mm256_sub_pd(best_v, spacing));
    __m256d hi = _mm256_min_pd(vmax, _mm256_add_pd(best_v, spacing));
    __m256d c = _mm256_sub_pd(hi, _mm256_mul_pd(g, _mm256_sub_pd(hi, lo)));
    __m256d d = _mm256_add_pd(lo, _mm256_mul_pd(g, _mm256_sub_pd(hi, lo)));
    __m256d fc = cost_lanes(l, c, nullptr);
    __m256d fd = cost_lanes(l, d, nullptr);
    for (int it = 0; it < req.golden_iterations; ++it) {
      const __m256d take = _mm256_cmp_pd(fc, fd, _CMP_LT_OQ);
      hi = _mm256_blendv_pd(hi, d, take);
      lo = _mm256_blendv_pd(c, lo, take);
      const __m256d width = _mm256_sub_pd(hi, lo);
      const __m256d fresh = _mm256_blendv_pd(_mm256_add_pd(lo, _mm256_mul_pd(g, width)),
                                             _mm256_sub_pd(hi, _mm256_mul_pd(g, width)), take);
      const __m256d f_fresh = cost_lanes(l, fresh, nullptr);
      const __m256d c_next = _mm256_blendv_pd(d, fresh, take);
      const __m256d fc_next = _mm256_blendv_pd(fd, f_fresh, take);
      const __m256d d_next = _mm256_blendv_pd(fresh, c, take);
      const __m256d fd_next = _mm256_blendv_pd(f_fresh, fc, take);
      c = c_next;
      fc = fc_next;
      d = d_next;
      fd = fd_next;
    }
    const __m256d vm = _mm256_mul_pd(_mm256_set1_pd(0.5), _mm256_add_pd(lo, hi));
    __m256d foot_m;
    const __m256d fm = cost_lanes(l, vm, &foot_m);
    const __m256d better = _mm256_cmp_pd(fm, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, fm, better);
    best_v = _mm256_blendv_pd(best_v, vm, better);
    best_foot = _mm256_blendv_pd(best_foot, foot_m, better);

    _mm256_storeu_pd(out.min_cost + i0, best);
    _mm256_storeu_pd(out.argmin + i0, best_v);
    _mm256_storeu_pd(out.foot_value + i0, best_foot);
  }
}

}  // namespace chj::simd
