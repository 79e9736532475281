#pragma once

// Conformal layer over G(4,1).
//
// e_o = (e- + e+)/sqrt2 and e_inf = (e- - e+)/sqrt2 are derived vectors, so
// e_o^2 = e_inf^2 = 0 and e_o . e_inf = -1. E = e_o ^ e_inf = e+ e-.

#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/Core>

#include "cgareg/errors.hpp"
#include "cgareg/ga.hpp"

namespace cgareg {

using MV = Multivector<G41>;
using Vec3 = Eigen::Vector3d;

namespace blade {
inline constexpr BladeIndex e1 = 0b00001;
inline constexpr BladeIndex e2 = 0b00010;
inline constexpr BladeIndex e3 = 0b00100;
inline constexpr BladeIndex ep = 0b01000;
inline constexpr BladeIndex em = 0b10000;
inline constexpr BladeIndex e12 = e1 | e2;
inline constexpr BladeIndex e13 = e1 | e3;
inline constexpr BladeIndex e23 = e2 | e3;
inline constexpr BladeIndex e123 = e1 | e2 | e3;
inline constexpr BladeIndex epm = ep | em;
inline constexpr BladeIndex euclid_mask = e123;
}  // namespace blade

// Rotor coefficient order used for serialization and the rotor solver.
inline constexpr std::array<BladeIndex, 4> kRotorBasis = {0, blade::e12, blade::e13, blade::e23};

inline MV e_o() {
  const double h = std::numbers::sqrt2 / 2.0;
  MV m;
  m[blade::em] = h;
  m[blade::ep] = h;
  return m;
}

inline MV e_inf() {
  const double h = std::numbers::sqrt2 / 2.0;
  MV m;
  m[blade::em] = h;
  m[blade::ep] = -h;
  return m;
}

// e_o ^ e_inf
inline MV origin_infinity() { return MV::blade(blade::epm, 1.0); }

// Euclidean pseudoscalar e123.
inline MV pseudoscalar3() { return MV::blade(blade::e123, 1.0); }

// Pseudoscalar of G(4,1): I (e_o ^ e_inf).
inline MV pseudoscalar5() { return pseudoscalar3() * origin_infinity(); }

inline MV vec(const Vec3& x) {
  MV m;
  m[blade::e1] = x.x();
  m[blade::e2] = x.y();
  m[blade::e3] = x.z();
  return m;
}

inline Vec3 to_vec3(const MV& m) { return {m[blade::e1], m[blade::e2], m[blade::e3]}; }

// True when the multivector has no e+ / e- content.
inline bool is_euclidean(const MV& m, double tol = 0.0) {
  for (BladeIndex i = 0; i < MV::kSize; ++i)
    if ((i & blade::epm) != 0 && std::abs(m[i]) > tol) return false;
  return true;
}

inline MV euclidean_part(const MV& m) {
  MV out;
  for (BladeIndex i = 0; i < MV::kSize; ++i)
    if ((i & blade::epm) == 0) out[i] = m[i];
  return out;
}

inline MV embed(const Vec3& x) {
  return e_o() + vec(x) + 0.5 * x.squaredNorm() * e_inf();
}

inline Vec3 unembed(const MV& p) {
  const double alpha = -inner(e_inf(), p).scalar();
  if (!(std::abs(alpha) > 1e-12)) throw DegeneratePointError("unembed: -(e_inf . P) vanishes");
  return to_vec3(grade(project_onto_blade(p / alpha, pseudoscalar3()), 1));
}

inline MV translator(const Vec3& t) { return 1.0 + 0.5 * (e_inf() * vec(t)); }

// V Z V^dagger; V must be unitary.
inline MV apply_versor(const MV& v, const MV& z) {
  const MV vv = v * reverse(v) - 1.0;
  if (vv.max_abs() > 1e-10 * std::max(1.0, v.max_abs() * v.max_abs()))
    throw UsageError("apply_versor: versor is not unitary");
  return v * z * reverse(v);
}

// exp(-theta B / 2) = cos(theta/2) - sin(theta/2) B, so that the e12 plane
// rotates e1 towards e2 under x -> R x R^dagger.
inline MV rotor_exp(const MV& b, double theta) {
  if (!is_euclidean(b, 0.0) || grade(b, 2) != b)
    throw UsageError("rotor_exp: B must be a Euclidean bivector");
  if (std::abs(norm_sq(b) - 1.0) > 1e-10) throw UsageError("rotor_exp: B must be a unit bivector");
  return std::cos(theta / 2.0) - std::sin(theta / 2.0) * b;
}

// Right-handed rotation by theta about the unit axis n (plane I n).
inline MV rotor_axis_angle(const Vec3& axis, double theta) {
  const double len = axis.norm();
  if (!(len > 0.0)) throw UsageError("rotor_axis_angle: zero axis");
  return rotor_exp(pseudoscalar3() * vec(axis / len), theta);
}

inline MV rotate(const MV& rotor, const MV& z) { return rotor * z * reverse(rotor); }

inline Vec3 rotate(const MV& rotor, const Vec3& x) { return to_vec3(rotate(rotor, vec(x))); }

struct Motor {
  MV rotor{1.0};
  Vec3 t = Vec3::Zero();

  static Motor identity() { return {}; }

  // U = T R
  MV versor() const { return translator(t) * rotor; }

  Vec3 apply(const Vec3& x) const { return rotate(rotor, x) + t; }

  Motor inverse() const {
    const MV rr = reverse(rotor);
    return {rr, -rotate(rr, t)};
  }

  std::array<double, 4> rotor_coeffs() const {
    return {rotor[kRotorBasis[0]], rotor[kRotorBasis[1]], rotor[kRotorBasis[2]],
            rotor[kRotorBasis[3]]};
  }
};

inline MV rotor_from_coeffs(const std::array<double, 4>& c) {
  MV r;
  for (std::size_t k = 0; k < 4; ++k) r[kRotorBasis[k]] = c[k];
  return r;
}

// Picks the representative of {R, -R} with scalar part >= 0 (first non-zero
// bivector coefficient > 0 when the scalar part vanishes).
inline MV canonicalize_rotor(const MV& r, double tol = 1e-12) {
  double lead = 0.0;
  for (BladeIndex b : kRotorBasis) {
    if (std::abs(r[b]) > tol) {
      lead = r[b];
      break;
    }
  }
  return lead < 0.0 ? -r : r;
}

inline void check_rotor(const MV& r) {
  if (grade_project(r, GradeMask{0, 2}) != r || !is_euclidean(r))
    throw UsageError("rotor must be an even element of G3");
  if (std::abs(norm_sq(r) - 1.0) > 1e-12) throw UsageError("rotor is not unit");
}

inline Motor make_motor(const MV& rotor, const Vec3& t) {
  check_rotor(rotor);
  return {canonicalize_rotor(rotor), t};
}

struct CoeffQuad {
  MV c1, c2, c3, c4;
};

inline CoeffQuad coefficients(const MV& p) {
  const MV big_i = pseudoscalar3();
  return {-project_onto_blade(inner(e_inf(), p), big_i),
          -project_onto_blade(inner(e_o(), p), big_i),
          project_onto_blade(inner(origin_infinity(), p), big_i),
          project_onto_blade(p, big_i)};
}

inline MV reconstruct(const CoeffQuad& q) {
  if (!is_euclidean(q.c1) || !is_euclidean(q.c2) || !is_euclidean(q.c3) || !is_euclidean(q.c4))
    throw UsageError("reconstruct: coefficient outside G3");
  return e_o() * q.c1 + e_inf() * q.c2 + origin_infinity() * q.c3 + q.c4;
}

enum class Direction { forward, inverse };

// Coefficients of T R (P) from those of P (forward), or of R^dagger T^dagger (Q)
// from those of Q (inverse), without leaving G3.
inline CoeffQuad coeffs_under_motor(const CoeffQuad& q, const Motor& m, Direction dir) {
  const MV t = vec(m.t);
  const double t2 = m.t.squaredNorm();
  if (dir == Direction::forward) {
    const MV& r = m.rotor;
    const MV p1 = rotate(r, q.c1), p2 = rotate(r, q.c2), p3 = rotate(r, q.c3),
             p4 = rotate(r, q.c4);
    return {p1,
            0.5 * t2 * p1 - outer(t, inner(t, p1)) + p2 - outer(t, p3) + inner(t, p4),
            inner(t, p1) + p3,
            outer(t, p1) + p4};
  }
  const MV rb = reverse(m.rotor);
  const MV tq1 = inner(t, q.c1);
  return {rotate(rb, q.c1),
          rotate(rb, 0.5 * t2 * q.c1 - outer(t, tq1) + q.c2 + outer(t, q.c3) - inner(t, q.c4)),
          rotate(rb, q.c3 - tq1),
          rotate(rb, q.c4 - outer(t, q.c1))};
}

inline double coeff_distance_sq(const MV& p, const MV& q) {
  const CoeffQuad a = coefficients(p), b = coefficients(q);
  return norm_sq(a.c3 - b.c3) + norm_sq(a.c4 - b.c4);
}

// embed(R(x) + t + n) - U embed(x) U^dagger
inline MV conformal_residual(const Vec3& x, const Vec3& n, const Motor& m) {
  const Vec3 y = m.apply(x);
  return vec(n) + 0.5 * (n.squaredNorm() + 2.0 * n.dot(y)) * e_inf();
}

struct SphereParams {
  Vec3 center;
  double r_sq;  // negative for imaginary spheres
};

inline SphereParams dual_sphere_params(const MV& v) {
  const MV g1 = grade(v, 1);
  const double alpha = -inner(e_inf(), g1).scalar();
  if (!(std::abs(alpha) > 1e-12)) throw DegeneratePointError("dual_sphere_params: flat or degenerate sphere");
  return {to_vec3(g1 / alpha), norm_sq(g1) / (alpha * alpha)};
}

}  // namespace cgareg
