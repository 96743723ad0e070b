#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "pnp/grid.hpp"

namespace pnp {

/// Uniform random values in [lo, hi) at every cell.
template <typename Scalar, typename Rng>
CellField<Scalar> random_field(const GridSpec<Scalar>& g, Rng& rng, Scalar lo, Scalar hi) {
  std::uniform_real_distribution<Scalar> dist(lo, hi);
  Vector<Scalar> v(g.size());
  for (Index k = 0; k < g.size(); ++k) v[k] = dist(rng);
  return CellField<Scalar>(g, std::move(v));
}

/// Zero-mean sum of low Fourier modes (wavenumbers up to `max_mode` per
/// axis) with random amplitudes in [-amplitude, amplitude] and random phases.
template <typename Scalar, typename Rng>
CellField<Scalar> random_smooth_field(const GridSpec<Scalar>& g, Rng& rng, Scalar amplitude, int max_mode = 2) {
  constexpr Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  std::uniform_real_distribution<Scalar> amp(-amplitude, amplitude);
  std::uniform_real_distribution<Scalar> phase(0, two_pi);
  const Scalar L = g.upper() - g.lower();
  Vector<Scalar> v = Vector<Scalar>::Zero(g.size());
  const int my = g.dim() > 1 ? max_mode : 0;
  const int mz = g.dim() > 2 ? max_mode : 0;
  for (int kx = 0; kx <= max_mode; ++kx)
    for (int ky = 0; ky <= my; ++ky)
      for (int kz = 0; kz <= mz; ++kz) {
        if (kx == 0 && ky == 0 && kz == 0) continue;
        const Scalar a = amp(rng) / Scalar(max_mode * (g.dim() > 1 ? 2 : 1));
        const Scalar p = phase(rng);
        for (Index k = 0; k < g.size(); ++k) {
          const auto x = g.position(k);
          v[k] += a * std::cos(two_pi * (kx * x[0] + ky * x[1] + kz * x[2]) / L + p);
        }
      }
  v.array() -= v.mean();
  return CellField<Scalar>(g, std::move(v));
}

}  // namespace pnp
