#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cgareg/spectra.hpp"
#include "oracles.hpp"

using namespace cgareg;
namespace bl = cgareg::blade;

namespace {

std::vector<Vec3> random_points(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Vec3> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng), y = 0.7 * u(rng), z = 0.4 * u(rng);
    out.emplace_back(x + 0.3, y - 0.1, z + 0.2);
  }
  return out;
}

std::vector<Vec3> moved(const std::vector<Vec3>& pts, const Motor& m) {
  std::vector<Vec3> out;
  for (const Vec3& p : pts) out.push_back(m.apply(p));
  return out;
}

}  // namespace

TEST(Spectra, OriginCloudMapsInfinityToOrigin) {
  const MultilinearMap f = build_cloud_map({e_o()});
  EXPECT_LT((f.apply(e_inf()) + 2.0 * e_o()).max_abs(), 1e-15);
  EXPECT_LT(f.apply(e_o()).max_abs(), 1e-15);
  EXPECT_THROW(build_cloud_map({}), UsageError);
}

TEST(Spectra, SingleVectorGradeMatrix) {
  const MultilinearMap f = build_cloud_map({MV::blade(bl::e1)});
  Eigen::MatrixXd want = -Eigen::MatrixXd::Identity(5, 5);
  want(0, 0) = 1.0;
  EXPECT_LT((grade_matrix(f, 1) - want).norm(), 1e-15);
  EXPECT_EQ(grade_matrix(f, 2).rows(), 10);
  EXPECT_THROW(grade_matrix(f, 0), UsageError);
  EXPECT_THROW(grade_matrix(f, 3), UsageError);
  EXPECT_THROW(eigen_grade(f, 4), UsageError);

  const EigenBasis b = eigen_grade(f, 1);
  ASSERT_EQ(b.pairs.size(), 5u);
  EXPECT_NEAR(b.pairs[0].lambda, 1.0, 1e-14);
  EXPECT_FALSE(b.pairs[0].degenerate);
  for (std::size_t i = 1; i < 5; ++i) {
    EXPECT_NEAR(b.pairs[i].lambda, -1.0, 1e-14);
    EXPECT_TRUE(b.pairs[i].degenerate);
  }
  EXPECT_FALSE(b.diagnostics.empty());
}

TEST(Spectra, MomentPathMatchesDirectOracle) {
  std::mt19937_64 rng(31);
  const auto cloud = embed_cloud(random_points(rng, 20));
  const MultilinearMap f(cloud);
  ASSERT_TRUE(f.is_vector_cloud());
  for (int i = 0; i < 20; ++i) {
    const MV z = oracle::random_mv<G41>(rng);
    const MV want = oracle::direct_map(cloud, z);
    ASSERT_LE((f.apply(z) - want).max_abs(), 1e-12 * (1 + want.max_abs()));
  }
  // A non-vector cloud takes the direct-sum path.
  std::vector<MV> mixed = cloud;
  mixed[0][bl::e12] = 0.25;
  const MultilinearMap g(mixed);
  EXPECT_FALSE(g.is_vector_cloud());
  const MV z = oracle::random_mv<G41>(rng);
  const MV want = oracle::direct_map(mixed, z);
  EXPECT_LE((g.apply(z) - want).max_abs(), 1e-12 * (1 + want.max_abs()));
}

TEST(SpectraProperty, MapIsLinearAndPermutationInvariant) {
  std::mt19937_64 rng(32);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = random_points(rng, 30);
    const MultilinearMap f(embed_cloud(pts));
    std::shuffle(pts.begin(), pts.end(), rng);
    const MultilinearMap h(embed_cloud(pts));
    const MV a = oracle::random_mv<G41>(rng), b = oracle::random_mv<G41>(rng);
    const double al = g(rng), be = g(rng);
    const MV lhs = f.apply(al * a + be * b);
    const double scale = 1 + lhs.max_abs() + f.apply(a).max_abs() + f.apply(b).max_abs();
    ASSERT_LE((lhs - al * f.apply(a) - be * f.apply(b)).max_abs(), 1e-12 * scale);
    ASSERT_LE((h.apply(a) - f.apply(a)).max_abs(), 1e-12 * scale);
  }
}

TEST(SpectraProperty, EigenpairsSatisfyResidualAndSpan) {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 20; ++trial) {
    const MultilinearMap f(embed_cloud(random_points(rng, 40)));
    for (int k : {1, 2}) {
      const EigenBasis b = eigen_grade(f, k);
      const Eigen::MatrixXd m = grade_matrix(f, k);
      const std::size_t n = k == 1 ? 5 : 10;
      EXPECT_EQ(b.complex_rejected, 0);
      ASSERT_EQ(b.pairs.size(), n);
      for (std::size_t i = 0; i < b.pairs.size(); ++i) {
        const EigenPair& p = b.pairs[i];
        EXPECT_EQ(p.rank, static_cast<int>(i));
        if (i > 0) EXPECT_GE(b.pairs[i - 1].lambda, p.lambda);
        EXPECT_EQ(grade(p.p, k), p.p);
        EXPECT_LE((f.apply(p.p) - p.lambda * p.p).coeff_norm(), 1e-8 * m.norm());
      }
      // Spectral reconstruction: with P^k the dual basis under <. .>,
      // F(Z) = sum_k lambda_k <Z P^k> P_k on grade k.
      Eigen::MatrixXd basis(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
      const auto blades = blades_of_grade<G41>(k);
      for (std::size_t c = 0; c < n; ++c)
        for (std::size_t r = 0; r < n; ++r)
          basis(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = b.pairs[c].p[blades[r]];
      const Eigen::MatrixXd inv = basis.inverse();
      const MV z = grade(oracle::random_mv<G41>(rng), k);
      Eigen::VectorXd zc(static_cast<Eigen::Index>(n));
      for (std::size_t r = 0; r < n; ++r) zc[static_cast<Eigen::Index>(r)] = z[blades[r]];
      const Eigen::VectorXd w = inv * zc;
      MV rebuilt;
      for (std::size_t c = 0; c < n; ++c) rebuilt += b.pairs[c].lambda * w[static_cast<Eigen::Index>(c)] * b.pairs[c].p;
      const MV fz = f.apply(z);
      ASSERT_LE((rebuilt - fz).max_abs(), 1e-9 * (1 + fz.max_abs()));
    }
  }
}

TEST(SpectraProperty, SpectrumAndEigenvectorsAreMotorEquivariant) {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 20; ++trial) {
    const auto pts = random_points(rng, 50);
    const Motor m = oracle::random_motor(rng, 0.5);
    const auto src = embed_cloud(pts), dst = embed_cloud(moved(pts, m));
    const MultilinearMap fs(src), fd(dst);
    const MV ref_s = reference_multivector(src), ref_d = reference_multivector(dst);
    EXPECT_LE((apply_versor(m.versor(), ref_s) - ref_d).max_abs(), 1e-10 * (1 + ref_d.max_abs()));
    for (int k : {1, 2}) {
      const EigenBasis bs = normalize_eigenbasis(eigen_grade(fs, k), ref_s);
      const EigenBasis bd = normalize_eigenbasis(eigen_grade(fd, k), ref_d);
      ASSERT_EQ(bs.pairs.size(), bd.pairs.size());
      double lam_max = 0.0;
      for (const auto& p : bs.pairs) lam_max = std::max(lam_max, std::abs(p.lambda));
      for (std::size_t i = 0; i < bs.pairs.size(); ++i) {
        ASSERT_NEAR(bs.pairs[i].lambda, bd.pairs[i].lambda, 1e-9 * lam_max);
        if (bs.pairs[i].degenerate) continue;
        const MV moved_p = apply_versor(m.versor(), bs.pairs[i].p);
        ASSERT_LE((moved_p - bd.pairs[i].p).max_abs(), 1e-7 * (1 + bd.pairs[i].p.max_abs()));
      }
    }
  }
}

TEST(Spectra, NormalizationFixesReferenceProduct) {
  std::mt19937_64 rng(35);
  const auto cloud = embed_cloud(random_points(rng, 30));
  const MultilinearMap f(cloud);
  const MV ref = reference_multivector(cloud);
  for (int k : {1, 2}) {
    const EigenBasis b = normalize_eigenbasis(eigen_grade(f, k), ref);
    for (const auto& p : b.pairs) {
      EXPECT_NEAR(scalar_product(p.p, ref), 1.0, 1e-12);
      EXPECT_NE(p.scale, 0.0);
    }
  }
  EXPECT_THROW(reference_multivector({}), UsageError);
}

TEST(Spectra, CentrallySymmetricCloudDropsEigenvectorsOrthogonalToReference) {
  // With the cloud mean at the origin the reference reduces to
  // (1 + i)(e_inf + e_o ^ e_inf). F then preserves the Euclidean vectors, the
  // Euclidean bivectors and the e_i ^ e+- bivectors, none of which pair with
  // the reference, so only span{e+, e-} (grade 1) and E (grade 2) survive.
  std::mt19937_64 rng(36);
  std::vector<Vec3> pts;
  for (const Vec3& p : random_points(rng, 12)) {
    pts.push_back(p);
    pts.push_back(-p);
  }
  const auto cloud = embed_cloud(pts);
  const MultilinearMap f(cloud);
  const MV ref = reference_multivector(cloud);

  const EigenBasis b1 = normalize_eigenbasis(eigen_grade(f, 1), ref);
  EXPECT_EQ(b1.dropped.size(), 3u);
  EXPECT_EQ(b1.pairs.size(), 2u);
  for (const auto& d : b1.dropped) EXPECT_LT(std::abs(d.p[bl::ep]) + std::abs(d.p[bl::em]), 1e-9);
  for (const auto& p : b1.pairs) EXPECT_LT(euclidean_part(p.p).max_abs(), 1e-9 * p.p.max_abs());

  const EigenBasis b2 = normalize_eigenbasis(eigen_grade(f, 2), ref);
  EXPECT_EQ(b2.dropped.size(), 9u);
  ASSERT_EQ(b2.pairs.size(), 1u);
  for (const auto& d : b2.dropped) EXPECT_LT(std::abs(d.p[bl::epm]), 1e-9);
  MV rest = b2.pairs[0].p;
  rest[bl::epm] = 0.0;
  EXPECT_LT(rest.max_abs(), 1e-9 * std::abs(b2.pairs[0].p[bl::epm]));
}

TEST(Spectra, FailureModes) {
  std::mt19937_64 rng(37);
  const auto cloud = embed_cloud(random_points(rng, 10));
  const MultilinearMap f(cloud);
  SpectraOptions strict;
  strict.eps_eig = -1.0;
  EXPECT_THROW(eigen_grade(f, 1, strict), DegenerateSpectrumError);
  // A reference orthogonal to every grade-1 eigenvector drops them all.
  EXPECT_THROW(normalize_eigenbasis(eigen_grade(f, 1), MV::blade(bl::e12)), NormalizationError);
}
