#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include "pnp/error.hpp"

namespace pnp {

using Index = Eigen::Index;

/**
 * Uniform periodic Cartesian grid on the cube (a, b)^dim with n cells per
 * axis.
 *
 * Cells are stored with axis 0 varying fastest. Zero-based cell i on an axis
 * has its center at a + (i + 1/2) h, i.e. cell i here is cell i+1 in the
 * one-based numbering x_i = a + (i - 1/2) h.
 */
template <typename Scalar>
class GridSpec {
 public:
  GridSpec(int dim, int n, Scalar a, Scalar b) : dim_(dim), n_(n), a_(a), b_(b) {
    if (dim < 1 || dim > 3) throw InvalidArgument("grid: dim must be 1, 2 or 3, got " + std::to_string(dim));
    if (n < 2) throw InvalidArgument("grid: need at least 2 cells per axis, got " + std::to_string(n));
    if (!(b > a)) throw InvalidArgument("grid: domain upper bound must exceed lower bound");
    h_ = (b - a) / static_cast<Scalar>(n);
    size_ = 1;
    for (int d = 0; d < dim; ++d) size_ *= n;
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  Scalar lower() const { return a_; }
  Scalar upper() const { return b_; }
  Scalar h() const { return h_; }
  /// Number of cells, n^dim.
  Index size() const { return size_; }
  /// |Omega| = (b - a)^dim.
  Scalar volume() const { return std::pow(b_ - a_, dim_); }
  /// h^dim, the weight of one cell in grid sums.
  Scalar cell_volume() const { return std::pow(h_, dim_); }

  Index stride(int axis) const {
    Index s = 1;
    for (int d = 0; d < axis; ++d) s *= n_;
    return s;
  }

  /// Zero-based per-axis coordinates of a linear cell index (unused axes are 0).
  std::array<int, 3> coords(Index k) const {
    std::array<int, 3> c{0, 0, 0};
    for (int d = 0; d < dim_; ++d) {
      c[d] = static_cast<int>(k % n_);
      k /= n_;
    }
    return c;
  }

  /// Linear index of cell (i, j, k), wrapping every coordinate periodically.
  Index index(std::array<Index, 3> c) const {
    Index k = 0;
    for (int d = dim_ - 1; d >= 0; --d) {
      Index w = c[d] % n_;
      if (w < 0) w += n_;
      k = k * n_ + w;
    }
    return k;
  }

  /// Center coordinate of zero-based cell i along any axis.
  Scalar center(Index i) const { return a_ + (static_cast<Scalar>(i) + Scalar(0.5)) * h_; }

  /// Center of cell k; unused axes are 0.
  std::array<Scalar, 3> position(Index k) const {
    const auto c = coords(k);
    std::array<Scalar, 3> x{0, 0, 0};
    for (int d = 0; d < dim_; ++d) x[d] = center(c[d]);
    return x;
  }

  void check_axis(int axis) const {
    if (axis < 0 || axis >= dim_)
      throw InvalidArgument("grid: axis " + std::to_string(axis) + " invalid for dim " + std::to_string(dim_));
  }

  friend bool operator==(const GridSpec& l, const GridSpec& r) {
    return l.dim_ == r.dim_ && l.n_ == r.n_ && l.a_ == r.a_ && l.b_ == r.b_;
  }

 private:
  int dim_;
  int n_;
  Scalar a_;
  Scalar b_;
  Scalar h_;
  Index size_;
};

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

namespace detail {

/// Calls fn(k, forward(k)) for every cell k, where forward(k) is the periodic
/// neighbour of k along `axis`. Traversal order is fixed.
template <typename Scalar, typename Fn>
void for_each_forward_pair(const GridSpec<Scalar>& g, int axis, Fn&& fn) {
  const Index s = g.stride(axis);
  const Index n = g.n();
  const Index block = s * n;
  const Index outer = g.size() / block;
  for (Index o = 0; o < outer; ++o) {
    for (Index j = 0; j < n; ++j) {
      const Index base = o * block + j * s;
      const Index next = (j + 1 == n) ? o * block : base + s;
      for (Index in = 0; in < s; ++in) fn(base + in, next + in);
    }
  }
}

template <typename Scalar>
void check_same_grid(const GridSpec<Scalar>& a, const GridSpec<Scalar>& b, const char* where) {
  if (!(a == b)) throw InvalidArgument(std::string(where) + ": grid mismatch");
}

}  // namespace detail

/// Scalar values at cell centers (periodic grid functions).
template <typename Scalar>
class CellField {
 public:
  using VectorType = Vector<Scalar>;

  explicit CellField(GridSpec<Scalar> spec) : spec_(std::move(spec)), values_(VectorType::Zero(spec_.size())) {}

  CellField(GridSpec<Scalar> spec, VectorType values) : spec_(std::move(spec)), values_(std::move(values)) {
    if (values_.size() != spec_.size())
      throw InvalidArgument("CellField: expected " + std::to_string(spec_.size()) + " values, got " +
                            std::to_string(values_.size()));
  }

  static CellField constant(const GridSpec<Scalar>& spec, Scalar value) {
    return CellField(spec, VectorType::Constant(spec.size(), value));
  }

  /// Point values fn(x, y, z) at cell centers; unused coordinates are 0.
  template <typename Fn>
  static CellField sample(const GridSpec<Scalar>& spec, Fn&& fn) {
    VectorType v(spec.size());
    for (Index k = 0; k < spec.size(); ++k) {
      const auto x = spec.position(k);
      v[k] = fn(x[0], x[1], x[2]);
    }
    return CellField(spec, std::move(v));
  }

  const GridSpec<Scalar>& spec() const { return spec_; }
  const VectorType& values() const { return values_; }
  Index size() const { return values_.size(); }

  Scalar operator[](Index k) const { return values_[k]; }
  /// Periodic access by (zero-based) cell coordinates.
  Scalar operator()(Index i, Index j = 0, Index k = 0) const { return values_[spec_.index({i, j, k})]; }

  friend CellField operator+(const CellField& l, const CellField& r) {
    detail::check_same_grid(l.spec_, r.spec_, "CellField +");
    return CellField(l.spec_, l.values_ + r.values_);
  }
  friend CellField operator-(const CellField& l, const CellField& r) {
    detail::check_same_grid(l.spec_, r.spec_, "CellField -");
    return CellField(l.spec_, l.values_ - r.values_);
  }
  friend CellField operator*(Scalar s, const CellField& f) { return CellField(f.spec_, s * f.values_); }
  friend CellField operator*(const CellField& f, Scalar s) { return s * f; }

 private:
  GridSpec<Scalar> spec_;
  VectorType values_;
};

/// Staggered values: component `axis` holds one value per cell k, located at
/// the face between k and its forward neighbour along that axis (i + 1/2).
template <typename Scalar>
class FaceField {
 public:
  using VectorType = Vector<Scalar>;

  explicit FaceField(GridSpec<Scalar> spec) : spec_(std::move(spec)) {
    for (int d = 0; d < spec_.dim(); ++d) comps_[d] = VectorType::Zero(spec_.size());
  }

  FaceField(GridSpec<Scalar> spec, std::array<VectorType, 3> comps) : spec_(std::move(spec)), comps_(std::move(comps)) {
    for (int d = 0; d < spec_.dim(); ++d)
      if (comps_[d].size() != spec_.size()) throw InvalidArgument("FaceField: component size mismatch");
    for (int d = spec_.dim(); d < 3; ++d) comps_[d].resize(0);
  }

  static FaceField constant(const GridSpec<Scalar>& spec, Scalar value) {
    std::array<VectorType, 3> c;
    for (int d = 0; d < spec.dim(); ++d) c[d] = VectorType::Constant(spec.size(), value);
    return FaceField(spec, std::move(c));
  }

  const GridSpec<Scalar>& spec() const { return spec_; }
  const VectorType& component(int axis) const {
    spec_.check_axis(axis);
    return comps_[axis];
  }

  /// Periodic access to the face (i, j, k) + 1/2 e_axis.
  Scalar operator()(int axis, Index i, Index j = 0, Index k = 0) const {
    return component(axis)[spec_.index({i, j, k})];
  }

  friend FaceField operator+(const FaceField& l, const FaceField& r) {
    detail::check_same_grid(l.spec_, r.spec_, "FaceField +");
    std::array<VectorType, 3> c;
    for (int d = 0; d < l.spec_.dim(); ++d) c[d] = l.comps_[d] + r.comps_[d];
    return FaceField(l.spec_, std::move(c));
  }
  friend FaceField operator-(const FaceField& l, const FaceField& r) {
    detail::check_same_grid(l.spec_, r.spec_, "FaceField -");
    std::array<VectorType, 3> c;
    for (int d = 0; d < l.spec_.dim(); ++d) c[d] = l.comps_[d] - r.comps_[d];
    return FaceField(l.spec_, std::move(c));
  }

 private:
  GridSpec<Scalar> spec_;
  std::array<VectorType, 3> comps_;
};

/// Forward difference D f at faces i+1/2 along `axis`.
template <typename Scalar>
Vector<Scalar> diff_forward(const CellField<Scalar>& f, int axis) {
  const auto& g = f.spec();
  g.check_axis(axis);
  const Scalar inv_h = Scalar(1) / g.h();
  const auto& v = f.values();
  Vector<Scalar> out(g.size());
  detail::for_each_forward_pair(g, axis, [&](Index k, Index kp) { out[k] = (v[kp] - v[k]) * inv_h; });
  return out;
}

/// Forward average A f at faces i+1/2 along `axis`.
template <typename Scalar>
Vector<Scalar> avg_forward(const CellField<Scalar>& f, int axis) {
  const auto& g = f.spec();
  g.check_axis(axis);
  const auto& v = f.values();
  Vector<Scalar> out(g.size());
  detail::for_each_forward_pair(g, axis, [&](Index k, Index kp) { out[k] = (v[kp] + v[k]) / Scalar(2); });
  return out;
}

template <typename Scalar>
FaceField<Scalar> gradient(const CellField<Scalar>& f) {
  std::array<Vector<Scalar>, 3> c;
  for (int d = 0; d < f.spec().dim(); ++d) c[d] = diff_forward(f, d);
  return FaceField<Scalar>(f.spec(), std::move(c));
}

/// Cell-wise forward averages along every axis.
template <typename Scalar>
FaceField<Scalar> face_average(const CellField<Scalar>& f) {
  std::array<Vector<Scalar>, 3> c;
  for (int d = 0; d < f.spec().dim(); ++d) c[d] = avg_forward(f, d);
  return FaceField<Scalar>(f.spec(), std::move(c));
}

/// Discrete divergence: sum over axes of (F_{k+1/2} - F_{k-1/2}) / h.
template <typename Scalar>
CellField<Scalar> divergence(const FaceField<Scalar>& F) {
  const auto& g = F.spec();
  const Scalar inv_h = Scalar(1) / g.h();
  Vector<Scalar> out = Vector<Scalar>::Zero(g.size());
  for (int d = 0; d < g.dim(); ++d) {
    const auto& c = F.component(d);
    detail::for_each_forward_pair(g, d, [&](Index k, Index kp) { out[kp] += (c[kp] - c[k]) * inv_h; });
  }
  return CellField<Scalar>(g, std::move(out));
}

template <typename Scalar>
CellField<Scalar> laplacian(const CellField<Scalar>& f) {
  return divergence(gradient(f));
}

/// Face-wise product D * F.
template <typename Scalar>
FaceField<Scalar> face_product(const FaceField<Scalar>& D, const FaceField<Scalar>& F) {
  detail::check_same_grid(D.spec(), F.spec(), "face_product");
  std::array<Vector<Scalar>, 3> c;
  for (int d = 0; d < D.spec().dim(); ++d) c[d] = D.component(d).cwiseProduct(F.component(d));
  return FaceField<Scalar>(D.spec(), std::move(c));
}

/// div(D grad f) for a strictly positive face coefficient D.
template <typename Scalar>
CellField<Scalar> weighted_laplacian(const FaceField<Scalar>& D, const CellField<Scalar>& f) {
  detail::check_same_grid(D.spec(), f.spec(), "weighted_laplacian");
  for (int d = 0; d < D.spec().dim(); ++d)
    if (!(D.component(d).minCoeff() > Scalar(0)))
      throw DomainError("weighted_laplacian: face weights must be strictly positive");
  return divergence(face_product(D, gradient(f)));
}

/// Grid average h^dim sum(f) / |Omega|.
template <typename Scalar>
Scalar mean(const CellField<Scalar>& f) {
  return f.spec().cell_volume() * f.values().sum() / f.spec().volume();
}

/// <f, g> = h^dim sum f g.
template <typename Scalar>
Scalar inner(const CellField<Scalar>& f, const CellField<Scalar>& g) {
  detail::check_same_grid(f.spec(), g.spec(), "inner");
  return f.spec().cell_volume() * f.values().dot(g.values());
}

/// [F, G] = sum over axes of <a(F G), 1>; under periodicity this is
/// h^dim times the plain face sum.
template <typename Scalar>
Scalar face_inner(const FaceField<Scalar>& F, const FaceField<Scalar>& G) {
  detail::check_same_grid(F.spec(), G.spec(), "face_inner");
  Scalar s = 0;
  for (int d = 0; d < F.spec().dim(); ++d) s += F.component(d).dot(G.component(d));
  return F.spec().cell_volume() * s;
}

enum class NormKind { L2, Lp, Linf, GradL2, H1, H2 };

template <typename Scalar>
Scalar norm(const CellField<Scalar>& f, NormKind kind, Scalar p = 2) {
  const Scalar w = f.spec().cell_volume();
  switch (kind) {
    case NormKind::L2:
      return std::sqrt(inner(f, f));
    case NormKind::Lp: {
      if (!(p >= 1)) throw InvalidArgument("norm: p must be >= 1");
      return std::pow(w * f.values().array().abs().pow(p).sum(), Scalar(1) / p);
    }
    case NormKind::Linf:
      return f.values().cwiseAbs().maxCoeff();
    case NormKind::GradL2: {
      const auto g = gradient(f);
      return std::sqrt(face_inner(g, g));
    }
    case NormKind::H1: {
      const auto g = gradient(f);
      return std::sqrt(inner(f, f) + face_inner(g, g));
    }
    case NormKind::H2: {
      const auto g = gradient(f);
      const auto lap = divergence(g);
      return std::sqrt(inner(f, f) + face_inner(g, g) + inner(lap, lap));
    }
  }
  throw InvalidArgument("norm: unknown kind");
}

/// Face-wise l2 norm sqrt([F, F]).
template <typename Scalar>
Scalar face_norm(const FaceField<Scalar>& F) {
  return std::sqrt(face_inner(F, F));
}

/// Maximum absolute face value over all axes.
template <typename Scalar>
Scalar face_max_abs(const FaceField<Scalar>& F) {
  Scalar m = 0;
  for (int d = 0; d < F.spec().dim(); ++d) m = std::max(m, F.component(d).cwiseAbs().maxCoeff());
  return m;
}

using Grid = GridSpec<double>;
using CellFieldd = CellField<double>;
using FaceFieldd = FaceField<double>;

}  // namespace pnp
