#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "cgareg/cga.hpp"
#include "oracles.hpp"

using namespace cgareg;
namespace bl = cgareg::blade;

namespace {

constexpr double kPi = std::numbers::pi;

double gap(const MV& a, const MV& b) { return (a - b).max_abs(); }

double quad_gap(const CoeffQuad& a, const CoeffQuad& b) {
  return std::max({gap(a.c1, b.c1), gap(a.c2, b.c2), gap(a.c3, b.c3), gap(a.c4, b.c4)});
}

}  // namespace

TEST(Cga, NullBasis) {
  EXPECT_NEAR(norm_sq(e_o()), 0.0, 1e-15);
  EXPECT_NEAR(norm_sq(e_inf()), 0.0, 1e-15);
  EXPECT_NEAR(inner(e_o(), e_inf()).scalar(), -1.0, 1e-15);
  EXPECT_LT(gap(outer(e_o(), e_inf()), origin_infinity()), 1e-15);
  EXPECT_LT(gap(pseudoscalar5(), pseudoscalar3() * outer(e_o(), e_inf())), 1e-15);
  EXPECT_LT(gap(origin_infinity() * origin_infinity(), MV(1.0)), 1e-15);
}

TEST(Cga, EmbedExamples) {
  EXPECT_LT(gap(embed(Vec3::Zero()), e_o()), 1e-15);
  const MV p = embed(Vec3(1, 2, 3));
  EXPECT_LT(gap(p, vec(Vec3(1, 2, 3)) + 7.0 * e_inf() + e_o()), 1e-14);
  EXPECT_TRUE(unembed(p).isApprox(Vec3(1, 2, 3), 1e-15));
  EXPECT_TRUE(unembed(3.0 * p).isApprox(Vec3(1, 2, 3), 1e-15));
  EXPECT_THROW(unembed(e_inf()), DegeneratePointError);
  EXPECT_THROW(unembed(vec(Vec3(1, 0, 0))), DegeneratePointError);
}

TEST(CgaProperty, EmbeddedPointsAreNullAndEncodeDistance) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 x = oracle::random_vec(rng, 5.0), y = oracle::random_vec(rng, 5.0);
    const MV px = embed(x), py = embed(y);
    ASSERT_LE(std::abs(norm_sq(px)), 1e-12 * (1.0 + x.squaredNorm() * x.squaredNorm()));
    ASSERT_NEAR(inner(px, py).scalar(), -0.5 * (x - y).squaredNorm(), 1e-12 * (1 + (x - y).squaredNorm()));
    ASSERT_LE((unembed(px) - x).norm(), 1e-12 * (1 + x.norm()));
  }
}

TEST(Cga, TranslatorAndRotorExamples) {
  const Vec3 t(1, -2, 0.5);
  EXPECT_LT(gap(apply_versor(translator(t), e_inf()), e_inf()), 1e-15);
  EXPECT_LT(gap(apply_versor(translator(t), e_o()), embed(t)), 1e-14);
  EXPECT_LT(gap(apply_versor(translator(t), embed(Vec3(1, 1, 1))), embed(Vec3(2, -1, 1.5))), 1e-13);

  const MV r = rotor_exp(MV::blade(bl::e12), kPi / 2);
  EXPECT_LT(gap(rotate(r, vec(Vec3(1, 0, 0))), vec(Vec3(0, 1, 0))), 1e-15);
  EXPECT_LT(gap(rotate(r, e_o()), e_o()), 1e-15);
  EXPECT_LT(gap(rotate(r, e_inf()), e_inf()), 1e-15);
  const MV rz = rotor_axis_angle(Vec3(0, 0, 2), kPi / 2);
  EXPECT_LT(gap(rz, r), 1e-15);
  EXPECT_THROW(rotor_exp(MV::blade(bl::e12, 2.0), 1.0), UsageError);
  EXPECT_THROW(rotor_axis_angle(Vec3::Zero(), 1.0), UsageError);
}

TEST(CgaProperty, RotorMatchesRodrigues) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const Vec3 axis = oracle::random_vec(rng), x = oracle::random_vec(rng);
    const double angle = u(rng);
    const Vec3 want = oracle::rodrigues(axis, angle) * x;
    ASSERT_LE((rotate(rotor_axis_angle(axis, angle), x) - want).norm(), 1e-13 * (1 + x.norm()));
  }
}

TEST(Cga, ApplyVersorRejectsNonUnitary) {
  EXPECT_THROW(apply_versor(MV(2.0), e_o()), UsageError);
  EXPECT_THROW(apply_versor(MV(1.0) + MV::blade(bl::e1), e_o()), UsageError);
}

TEST(CgaProperty, MotorActsOnEmbeddedPointsAsRigidMotion) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 1000; ++i) {
    const Motor m = oracle::random_motor(rng);
    const Vec3 x = oracle::random_vec(rng, 3.0);
    const MV y = apply_versor(m.versor(), embed(x));
    ASSERT_LE(gap(y, embed(m.apply(x))), 1e-11 * (1 + x.squaredNorm() + m.t.squaredNorm()));
    const Motor inv = m.inverse();
    ASSERT_LE((inv.apply(m.apply(x)) - x).norm(), 1e-12 * (1 + x.norm() + m.t.norm()));
  }
}

TEST(CgaProperty, VersorIsOutermorphism) {
  std::mt19937_64 rng(24);
  for (int i = 0; i < 200; ++i) {
    const MV u = oracle::random_motor(rng).versor();
    const MV a = oracle::random_mv<G41>(rng), b = oracle::random_mv<G41>(rng);
    const MV lhs = apply_versor(u, outer(a, b));
    const MV rhs = outer(apply_versor(u, a), apply_versor(u, b));
    ASSERT_LE(gap(lhs, rhs), 1e-10 * (1 + lhs.max_abs()));
    ASSERT_LE(gap(apply_versor(u, a * b), apply_versor(u, a) * apply_versor(u, b)), 1e-10 * (1 + lhs.max_abs()));
  }
}

TEST(Cga, CoefficientExamples) {
  const CoeffQuad o = coefficients(e_o());
  EXPECT_LT(quad_gap(o, {MV(1.0), MV(), MV(), MV()}), 1e-15);
  const CoeffQuad inf = coefficients(e_inf());
  EXPECT_LT(quad_gap(inf, {MV(), MV(1.0), MV(), MV()}), 1e-15);
  const CoeffQuad big_e = coefficients(origin_infinity());
  EXPECT_LT(quad_gap(big_e, {MV(), MV(), MV(1.0), MV()}), 1e-15);
  const Vec3 x(1, 2, 3);
  const CoeffQuad p = coefficients(embed(x));
  EXPECT_LT(quad_gap(p, {MV(1.0), MV(7.0), MV(), vec(x)}), 1e-14);
  const CoeffQuad b = coefficients(MV::blade(bl::e12, 2.0));
  EXPECT_LT(quad_gap(b, {MV(), MV(), MV(), MV::blade(bl::e12, 2.0)}), 1e-15);
}

TEST(CgaProperty, CoefficientRoundTripAndWedgeForm) {
  std::mt19937_64 rng(25);
  for (int i = 0; i < 1000; ++i) {
    const MV p = oracle::random_mv<G41>(rng);
    const CoeffQuad q = coefficients(p);
    for (const MV* c : {&q.c1, &q.c2, &q.c3, &q.c4}) ASSERT_TRUE(is_euclidean(*c, 1e-14));
    ASSERT_LE(gap(reconstruct(q), p), 1e-13);
    const MV wedge = outer(e_o(), q.c1) + outer(e_inf(), q.c2) + outer(origin_infinity(), q.c3) + q.c4;
    ASSERT_LE(gap(wedge, p), 1e-13);
  }
  EXPECT_THROW(reconstruct({e_o(), MV(), MV(), MV()}), UsageError);
}

TEST(CgaProperty, CoefficientTransportMatchesSandwich) {
  std::mt19937_64 rng(26);
  for (int i = 0; i < 1000; ++i) {
    const Motor m = oracle::random_motor(rng);
    const MV p = oracle::random_mv<G41>(rng);
    const MV q = apply_versor(m.versor(), p);
    const double scale = 1 + q.max_abs();
    ASSERT_LE(quad_gap(coeffs_under_motor(coefficients(p), m, Direction::forward), coefficients(q)), 1e-12 * scale);
    ASSERT_LE(quad_gap(coeffs_under_motor(coefficients(q), m, Direction::inverse), coefficients(p)), 1e-12 * scale);
  }
}

// Replacing the minus in front of t ^ (t . Q1) in the inverse C2 update with a
// plus breaks the round trip whenever t . Q1 has a non-zero wedge with t.
TEST(Cga, InverseTransportNeedsNegativeDoubleTranslationTerm) {
  const Motor m = make_motor(MV(1.0), Vec3(1, 2, 0));
  const MV p = outer(e_o(), MV::blade(bl::e13)) + e_inf();
  const CoeffQuad q = coefficients(apply_versor(m.versor(), p));
  const MV t = vec(m.t);
  const MV flipped = 0.5 * m.t.squaredNorm() * q.c1 + outer(t, inner(t, q.c1)) + q.c2 + outer(t, q.c3) -
                     inner(t, q.c4);
  EXPECT_GT(gap(flipped, coefficients(p).c2), 1.0);
  EXPECT_LT(gap(coeffs_under_motor(q, m, Direction::inverse).c2, coefficients(p).c2), 1e-13);
}

TEST(Cga, MotorHelpers) {
  const MV r = rotor_axis_angle(Vec3(0, 0, 1), 0.3);
  const Motor m = make_motor(-r, Vec3(1, 0, 0));
  EXPECT_GT(m.rotor.scalar(), 0.0);
  EXPECT_LT(gap(rotor_from_coeffs(m.rotor_coeffs()), m.rotor), 1e-16);
  EXPECT_THROW(make_motor(MV(2.0), Vec3::Zero()), UsageError);
  EXPECT_THROW(make_motor(MV::blade(bl::e1), Vec3::Zero()), UsageError);
  EXPECT_LT(gap(canonicalize_rotor(MV::blade(bl::e12, -1.0)), MV::blade(bl::e12)), 1e-16);
  EXPECT_EQ(Motor::identity().apply(Vec3(1, 2, 3)), Vec3(1, 2, 3));
}

TEST(Cga, CoefficientDistance) {
  EXPECT_DOUBLE_EQ(coeff_distance_sq(e_o(), e_o()), 0.0);
  // Points differ only through C4 = x, so the distance is |x - y|^2.
  EXPECT_NEAR(coeff_distance_sq(embed(Vec3(1, 0, 0)), embed(Vec3(0, 2, 0))), 5.0, 1e-14);
  // C3 difference of the bivector E contributes <(E coeff)^2>.
  EXPECT_NEAR(coeff_distance_sq(3.0 * origin_infinity(), MV()), 9.0, 1e-14);
}

TEST(CgaProperty, ConformalResidualMatchesDirectDifference) {
  std::mt19937_64 rng(27);
  for (int i = 0; i < 1000; ++i) {
    const Motor m = oracle::random_motor(rng);
    const Vec3 x = oracle::random_vec(rng), n = oracle::random_vec(rng, 0.1);
    const MV direct = embed(m.apply(x) + n) - apply_versor(m.versor(), embed(x));
    const MV res = conformal_residual(x, n, m);
    ASSERT_LE(gap(res, direct), 1e-12 * (1 + direct.max_abs() + m.t.squaredNorm()));
    ASSERT_EQ(res.grades_present(), 0b10u);
  }
}

TEST(Cga, DualSphereParams) {
  const SphereParams s = dual_sphere_params(embed(Vec3(1, 2, 3)) - 0.5 * 4.0 * e_inf());
  EXPECT_TRUE(s.center.isApprox(Vec3(1, 2, 3), 1e-14));
  EXPECT_NEAR(s.r_sq, 4.0, 1e-13);
  const SphereParams scaled = dual_sphere_params(-3.0 * embed(Vec3(0, 1, 0)));
  EXPECT_TRUE(scaled.center.isApprox(Vec3(0, 1, 0), 1e-14));
  EXPECT_NEAR(scaled.r_sq, 0.0, 1e-14);
  const SphereParams imag = dual_sphere_params(e_o() + 0.5 * e_inf());
  EXPECT_NEAR(imag.r_sq, -1.0, 1e-14);
  EXPECT_THROW(dual_sphere_params(e_inf()), DegeneratePointError);
  EXPECT_THROW(dual_sphere_params(vec(Vec3(1, 0, 0))), DegeneratePointError);
}
