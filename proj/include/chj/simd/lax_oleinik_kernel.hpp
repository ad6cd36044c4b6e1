#pragma once

#include <vector>

// Inner loop of the semi-Lagrangian Lax-Oleinik step for the quadratic family:
// for every node i,
//   min over v of  I(phi)(x_i - v dt) + dt * ((v - drift_i)^2 / (2 a_i) - V_i)
// where I is periodic linear interpolation. The u-dependent part of the
// Lagrangian is affine and handled by the caller.
//
// Two backends compute bit-identical results: a portable scalar reference and
// an AVX2 variant (4 nodes per lane group, gathers for the golden-section
// refinement). The backend is picked at runtime.

namespace chj::simd {

enum class Backend { automatic, scalar, avx2 };

const char* name(Backend backend) noexcept;
bool avx2_available() noexcept;
/// automatic -> best available; avx2 falls back to scalar when unavailable.
Backend resolve(Backend requested) noexcept;

struct QuadraticNodeTable {
  std::vector<double> drift;       ///< a(x_i) b(x_i)
  std::vector<double> half_inv_a;  ///< 1 / (2 a(x_i))
  std::vector<double> potential;   ///< V(x_i)
};

struct MinimizeRequest {
  /// Node values for indices [-pad, n + pad), i.e. phi_ext[j + pad] = phi[j mod n].
  const double* phi_ext = nullptr;
  int pad = 0;
  int n = 0;  ///< multiple of 4
  double dt = 0.0;
  double cells_per_velocity = 0.0;  ///< dt / h
  const QuadraticNodeTable* table = nullptr;
  /// Velocity samples ordered by increasing |v|, so strict-less ties keep the
  /// smallest |v|.
  const double* velocities = nullptr;
  int n_velocities = 0;
  double v_max = 0.0;
  double spacing = 0.0;  ///< distance between neighbouring samples
  int golden_iterations = 0;
};

struct MinimizeOutput {
  double* min_cost = nullptr;
  double* argmin = nullptr;
  double* foot_value = nullptr;  ///< I(phi)(x_i - v* dt)
};

void minimize_scalar(const MinimizeRequest& req, const MinimizeOutput& out);
void minimize_avx2(const MinimizeRequest& req, const MinimizeOutput& out);
void minimize(Backend backend, const MinimizeRequest& req, const MinimizeOutput& out);

/// Feet closer than this (in cells) to a node snap onto it.
inline constexpr double kSnapCells = 1e-9;
inline constexpr double kGoldenRatio = 0.6180339887498949;

}  // namespace chj::simd
