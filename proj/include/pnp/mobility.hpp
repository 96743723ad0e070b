#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include "pnp/grid.hpp"

namespace pnp {

/// Rule for evaluating the mobility e^{-S} at a face from the two adjacent
/// cell values.
enum class MeanKind { Harmonic, Geometric, Arithmetic, Entropic };

inline std::string to_string(MeanKind k) {
  switch (k) {
    case MeanKind::Harmonic: return "harmonic";
    case MeanKind::Geometric: return "geometric";
    case MeanKind::Arithmetic: return "arithmetic";
    case MeanKind::Entropic: return "entropic";
  }
  return "unknown";
}

/// Case-insensitive parse of "harmonic" | "geometric" | "arithmetic" | "entropic".
inline MeanKind parse_mean_kind(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "harmonic") return MeanKind::Harmonic;
  if (s == "geometric") return MeanKind::Geometric;
  if (s == "arithmetic") return MeanKind::Arithmetic;
  if (s == "entropic") return MeanKind::Entropic;
  throw InvalidArgument("unknown mean kind '" + std::string(text) + "'");
}

inline constexpr MeanKind kAllMeans[] = {MeanKind::Harmonic, MeanKind::Geometric, MeanKind::Arithmetic,
                                          MeanKind::Entropic};

/**
 * Mobility e^{-S} at the face between two cells holding exponents s0, s1.
 *
 * Every rule is written as e^{-max} r(d) with d = |s1 - s0| >= 0, so all
 * four share one exponential and differ only in r. Below d = 1e-5 the r are
 * evaluated from their Taylor series
 *
 *   harmonic    1 + d/2 - d^3/24
 *   entropic    1 + d/2 + d^2/12
 *   geometric   1 + d/2 + d^2/8
 *   arithmetic  1 + d/2 + d^2/4
 *
 * which keeps the ordering harmonic <= entropic <= geometric <= arithmetic
 * intact under rounding. Geometric and arithmetic switch to e^{-min} for
 * d > 1 to avoid overflowing e^{d}.
 */
template <typename Scalar>
Scalar face_mean(Scalar s0, Scalar s1, MeanKind kind) {
  const Scalar hi = std::max(s0, s1);
  const Scalar lo = std::min(s0, s1);
  const Scalar d = hi - lo;
  const bool series = d < Scalar(1e-5);
  Scalar r = 0;
  switch (kind) {
    case MeanKind::Harmonic:
      r = std::exp(-hi) * (series ? Scalar(1) + (d / 2 - d * d * d / 24) : Scalar(2) / (Scalar(1) + std::exp(-d)));
      break;
    case MeanKind::Geometric:
      if (d > Scalar(1))
        r = std::exp(-(hi + lo) / 2);
      else
        r = std::exp(-hi) * (series ? Scalar(1) + (d / 2 + d * d / 8) : std::exp(d / 2));
      break;
    case MeanKind::Arithmetic:
      if (d > Scalar(1))
        r = std::exp(-lo) * (Scalar(1) + std::exp(-d)) / 2;
      else
        r = std::exp(-hi) * (series ? Scalar(1) + (d / 2 + d * d / 4) : (Scalar(1) + std::exp(d)) / 2);
      break;
    case MeanKind::Entropic:
      r = std::exp(-hi) * (series ? Scalar(1) + (d / 2 + d * d / 12) : d / -std::expm1(-d));
      break;
  }
  if (!(r > Scalar(0)) || !std::isfinite(r))
    throw DomainError("face mobility not representable for exponents " + std::to_string(double(s0)) + ", " +
                      std::to_string(double(s1)));
  return r;
}

/// Face mobility e^{-S_{i+1/2}} on every face of the grid.
template <typename Scalar>
FaceField<Scalar> face_mobility(const CellField<Scalar>& S, MeanKind kind) {
  const auto& g = S.spec();
  const auto& s = S.values();
  if (!s.allFinite()) throw DomainError("face_mobility: exponent field is not finite");
  std::array<Vector<Scalar>, 3> comps;
  for (int d = 0; d < g.dim(); ++d) {
    Vector<Scalar> c(g.size());
    detail::for_each_forward_pair(g, d, [&](Index k, Index kp) { c[k] = face_mean(s[k], s[kp], kind); });
    comps[d] = std::move(c);
  }
  return FaceField<Scalar>(g, std::move(comps));
}

}  // namespace pnp
