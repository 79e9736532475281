#pragma once

// Dense geometric algebra kernel over G(p,q).
//
// Blades are indexed by a bitmask of generators: bit k set <=> generator
// e_{k+1} present. Generators are ordered e_1..e_p (square +1) followed by the
// q generators squaring to -1. For G(4,1) that is e1, e2, e3, e+ (bit 3),
// e- (bit 4).
//
// Inner product convention: A_r . B_s = <A_r B_s>_{|r-s|} for r, s > 0 and
// zero whenever either side is a scalar. This is NOT the left contraction;
// in particular t . alpha = 0 for a scalar alpha, which the coefficient
// transport formulas in cga.hpp rely on.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "cgareg/errors.hpp"

namespace cgareg {

using BladeIndex = std::uint32_t;

template <int P, int Q>
struct Signature {
  static_assert(P >= 0 && Q >= 0, "negative generator count");
  static_assert(P + Q <= 12, "signature too large for the dense kernel");
  static constexpr int p = P;
  static constexpr int q = Q;
  static constexpr int dim = P + Q;
  static constexpr std::size_t size = std::size_t{1} << dim;

  static constexpr int metric(int generator) noexcept {
    return generator < P ? 1 : -1;
  }
};

using G3 = Signature<3, 0>;
using G41 = Signature<4, 1>;

template <class T>
concept AlgebraSignature = requires {
  { T::p } -> std::convertible_to<int>;
  { T::q } -> std::convertible_to<int>;
  { T::size } -> std::convertible_to<std::size_t>;
};

constexpr int grade_of(BladeIndex blade) noexcept { return std::popcount(blade); }

// Reordering sign of e_a e_b -> e_{a^b}, counting transpositions only.
constexpr int reorder_sign(BladeIndex a, BladeIndex b) noexcept {
  int swaps = 0;
  for (BladeIndex x = a >> 1; x != 0; x >>= 1) swaps += std::popcount(x & b);
  return (swaps & 1) ? -1 : 1;
}

template <AlgebraSignature Sig>
constexpr int compute_product_sign(BladeIndex a, BladeIndex b) noexcept {
  int sign = reorder_sign(a, b);
  for (BladeIndex common = a & b; common != 0; common &= common - 1) {
    sign *= Sig::metric(std::countr_zero(common));
  }
  return sign;
}

namespace detail {

inline constexpr int kTabulatedDim = 6;

template <AlgebraSignature Sig>
constexpr auto make_sign_table() {
  constexpr std::size_t n = Sig::dim <= kTabulatedDim ? Sig::size : 1;
  std::array<std::int8_t, n * n> table{};
  if constexpr (Sig::dim <= kTabulatedDim) {
    for (BladeIndex a = 0; a < n; ++a)
      for (BladeIndex b = 0; b < n; ++b)
        table[a * n + b] = static_cast<std::int8_t>(compute_product_sign<Sig>(a, b));
  }
  return table;
}

template <AlgebraSignature Sig>
inline constexpr auto kSignTable = make_sign_table<Sig>();

}  // namespace detail

// e_a e_b = product_sign(a, b) * e_{a ^ b}
template <AlgebraSignature Sig>
constexpr int product_sign(BladeIndex a, BladeIndex b) noexcept {
  if constexpr (Sig::dim <= detail::kTabulatedDim) {
    return detail::kSignTable<Sig>[a * Sig::size + b];
  } else {
    return compute_product_sign<Sig>(a, b);
  }
}

constexpr int reverse_sign(int grade) noexcept {
  return ((grade * (grade - 1) / 2) & 1) ? -1 : 1;
}

// Set of grades, used by grade projection.
class GradeMask {
 public:
  constexpr GradeMask() = default;
  constexpr GradeMask(std::initializer_list<int> grades) {
    for (int g : grades) bits_ |= bit(g);
  }
  static constexpr GradeMask single(int grade) {
    GradeMask m;
    m.bits_ = bit(grade);
    return m;
  }
  static constexpr GradeMask all() {
    GradeMask m;
    m.bits_ = ~std::uint32_t{0};
    return m;
  }
  constexpr bool contains(int grade) const noexcept {
    return grade >= 0 && grade < 32 && ((bits_ >> grade) & 1u);
  }
  constexpr bool empty() const noexcept { return bits_ == 0; }

 private:
  static constexpr std::uint32_t bit(int grade) {
    if (grade < 0 || grade > 12) throw UsageError("grade out of range: " + std::to_string(grade));
    return std::uint32_t{1} << grade;
  }
  std::uint32_t bits_ = 0;
};

template <AlgebraSignature Sig>
class Multivector {
 public:
  using signature = Sig;
  static constexpr std::size_t kSize = Sig::size;

  constexpr Multivector() = default;
  explicit constexpr Multivector(double scalar) { c_[0] = scalar; }

  static constexpr Multivector blade(BladeIndex index, double coeff = 1.0) {
    Multivector m;
    m.c_.at(index) = coeff;
    return m;
  }

  // Generator e_{k+1}, zero-based.
  static constexpr Multivector basis_vector(int generator, double coeff = 1.0) {
    return blade(BladeIndex{1} << generator, coeff);
  }

  // Grade-1 element from per-generator coefficients (missing trailing ones are zero).
  static Multivector vector(std::span<const double> coords) {
    if (coords.size() > static_cast<std::size_t>(Sig::dim))
      throw UsageError("too many vector coordinates for signature");
    Multivector m;
    for (std::size_t k = 0; k < coords.size(); ++k) m.c_[BladeIndex{1} << k] = coords[k];
    return m;
  }
  static Multivector vector(std::initializer_list<double> coords) {
    return vector(std::span<const double>(coords.begin(), coords.size()));
  }

  constexpr double operator[](BladeIndex i) const { return c_[i]; }
  constexpr double& operator[](BladeIndex i) { return c_[i]; }

  std::span<const double, kSize> coeffs() const noexcept { return c_; }
  std::span<double, kSize> coeffs() noexcept { return c_; }

  double scalar() const noexcept { return c_[0]; }

  Multivector& operator+=(const Multivector& o) noexcept {
    for (std::size_t i = 0; i < kSize; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Multivector& operator-=(const Multivector& o) noexcept {
    for (std::size_t i = 0; i < kSize; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Multivector& operator*=(double s) noexcept {
    for (auto& x : c_) x *= s;
    return *this;
  }
  Multivector& operator/=(double s) noexcept {
    for (auto& x : c_) x /= s;
    return *this;
  }

  friend Multivector operator+(Multivector a, const Multivector& b) noexcept { return a += b; }
  friend Multivector operator-(Multivector a, const Multivector& b) noexcept { return a -= b; }
  friend Multivector operator-(Multivector a) noexcept { return a *= -1.0; }
  friend Multivector operator*(Multivector a, double s) noexcept { return a *= s; }
  friend Multivector operator*(double s, Multivector a) noexcept { return a *= s; }
  friend Multivector operator/(Multivector a, double s) noexcept { return a /= s; }
  friend Multivector operator+(Multivector a, double s) noexcept {
    a.c_[0] += s;
    return a;
  }
  friend Multivector operator+(double s, Multivector a) noexcept { return a + s; }
  friend Multivector operator-(Multivector a, double s) noexcept {
    a.c_[0] -= s;
    return a;
  }
  friend Multivector operator-(double s, const Multivector& a) noexcept { return -a + s; }

  friend bool operator==(const Multivector&, const Multivector&) = default;

  // Largest absolute coefficient.
  double max_abs() const noexcept {
    double m = 0.0;
    for (double x : c_) m = std::max(m, std::abs(x));
    return m;
  }

  // Euclidean norm of the coefficient array (metric-blind).
  double coeff_norm() const noexcept {
    double s = 0.0;
    for (double x : c_) s += x * x;
    return std::sqrt(s);
  }

  bool is_finite() const noexcept {
    return std::all_of(c_.begin(), c_.end(), [](double x) { return std::isfinite(x); });
  }

  bool is_zero(double tol = 0.0) const noexcept { return max_abs() <= tol; }

  // Bitmask of grades with a coefficient above tol.
  std::uint32_t grades_present(double tol = 0.0) const noexcept {
    std::uint32_t mask = 0;
    for (BladeIndex i = 0; i < kSize; ++i)
      if (std::abs(c_[i]) > tol) mask |= std::uint32_t{1} << grade_of(i);
    return mask;
  }

 private:
  std::array<double, kSize> c_{};
};

enum class ProductKind { geometric, outer, inner, scalar };

namespace detail {

// Sums sign * a_i * b_j into e_{i^j} for every non-zero pair the filter keeps.
template <AlgebraSignature Sig, class Keep>
Multivector<Sig> blade_product(const Multivector<Sig>& a, const Multivector<Sig>& b, Keep keep) {
  Multivector<Sig> out;
  for (BladeIndex i = 0; i < Sig::size; ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    const int gi = grade_of(i);
    for (BladeIndex j = 0; j < Sig::size; ++j) {
      const double bj = b[j];
      if (bj == 0.0) continue;
      const BladeIndex k = i ^ j;
      if (!keep(gi, grade_of(j), grade_of(k))) continue;
      out[k] += product_sign<Sig>(i, j) * ai * bj;
    }
  }
  return out;
}

}  // namespace detail

template <AlgebraSignature Sig>
Multivector<Sig> geometric(const Multivector<Sig>& a, const Multivector<Sig>& b) {
  return detail::blade_product(a, b, [](int, int, int) { return true; });
}

template <AlgebraSignature Sig>
Multivector<Sig> outer(const Multivector<Sig>& a, const Multivector<Sig>& b) {
  return detail::blade_product(a, b, [](int r, int s, int k) { return k == r + s; });
}

// Hestenes inner product; annihilates scalars on either side.
template <AlgebraSignature Sig>
Multivector<Sig> inner(const Multivector<Sig>& a, const Multivector<Sig>& b) {
  return detail::blade_product(a, b, [](int r, int s, int k) {
    return r > 0 && s > 0 && k == (r > s ? r - s : s - r);
  });
}

// <ab>, computed without forming the full product.
template <AlgebraSignature Sig>
double scalar_product(const Multivector<Sig>& a, const Multivector<Sig>& b) {
  double s = 0.0;
  for (BladeIndex i = 0; i < Sig::size; ++i) {
    if (a[i] == 0.0 || b[i] == 0.0) continue;
    s += product_sign<Sig>(i, i) * a[i] * b[i];
  }
  return s;
}

template <AlgebraSignature Sig>
Multivector<Sig> product(const Multivector<Sig>& a, const Multivector<Sig>& b, ProductKind kind) {
  switch (kind) {
    case ProductKind::geometric: return geometric(a, b);
    case ProductKind::outer: return outer(a, b);
    case ProductKind::inner: return inner(a, b);
    case ProductKind::scalar: return Multivector<Sig>(scalar_product(a, b));
  }
  throw UsageError("unknown product kind");
}

template <AlgebraSignature Sig>
Multivector<Sig> operator*(const Multivector<Sig>& a, const Multivector<Sig>& b) {
  return geometric(a, b);
}
template <AlgebraSignature Sig>
Multivector<Sig> operator^(const Multivector<Sig>& a, const Multivector<Sig>& b) {
  return outer(a, b);
}
template <AlgebraSignature Sig>
Multivector<Sig> operator|(const Multivector<Sig>& a, const Multivector<Sig>& b) {
  return inner(a, b);
}

template <AlgebraSignature Sig>
Multivector<Sig> grade_project(const Multivector<Sig>& a, GradeMask grades) {
  Multivector<Sig> out;
  for (BladeIndex i = 0; i < Sig::size; ++i)
    if (grades.contains(grade_of(i))) out[i] = a[i];
  return out;
}

template <AlgebraSignature Sig>
Multivector<Sig> grade(const Multivector<Sig>& a, int k) {
  return grade_project(a, GradeMask::single(k));
}

template <AlgebraSignature Sig>
Multivector<Sig> reverse(const Multivector<Sig>& a) {
  Multivector<Sig> out;
  for (BladeIndex i = 0; i < Sig::size; ++i) out[i] = reverse_sign(grade_of(i)) * a[i];
  return out;
}

// Signed squared norm <a a^dagger>; negative values are legitimate in G(p,q).
template <AlgebraSignature Sig>
double norm_sq(const Multivector<Sig>& a) {
  double s = 0.0;
  for (BladeIndex i = 0; i < Sig::size; ++i) {
    if (a[i] == 0.0) continue;
    s += product_sign<Sig>(i, i) * reverse_sign(grade_of(i)) * a[i] * a[i];
  }
  return s;
}

template <AlgebraSignature Sig>
double magnitude(const Multivector<Sig>& a) {
  return std::sqrt(std::abs(norm_sq(a)));
}

inline constexpr double kDefaultInverseEps = 1e-12;

// Inverse of a simple multivector (a a^dagger is a scalar): a^dagger / <a a^dagger>.
template <AlgebraSignature Sig>
Multivector<Sig> inverse_simple(const Multivector<Sig>& a, double eps_inv = kDefaultInverseEps) {
  const Multivector<Sig> rev = reverse(a);
  const Multivector<Sig> aa = geometric(a, rev);
  const double n = aa.scalar();
  const double scale = std::max(a.coeff_norm() * a.coeff_norm(), 1e-300);
  Multivector<Sig> rest = aa;
  rest[0] = 0.0;
  if (rest.max_abs() > 1e-10 * scale)
    throw NumericalError("inverse_simple: multivector is not simple");
  if (std::abs(n) <= eps_inv * scale)
    throw NumericalError("inverse_simple: <a a^dagger> vanishes");
  return rev / n;
}

// Projection onto an invertible s-blade A: X_k -> (X_k . A) A^{-1} for
// 0 < k <= s, scalars pass through, grades above s vanish.
template <AlgebraSignature Sig>
Multivector<Sig> project_onto_blade(const Multivector<Sig>& x, const Multivector<Sig>& blade_a) {
  int s = -1;
  for (BladeIndex i = 0; i < Sig::size; ++i)
    if (blade_a[i] != 0.0) s = std::max(s, grade_of(i));
  if (s < 0) throw NumericalError("project_onto_blade: zero blade");
  const Multivector<Sig> a_inv = inverse_simple(blade_a);
  Multivector<Sig> out;
  out[0] = x[0];
  for (int k = 1; k <= s; ++k) {
    const Multivector<Sig> xk = grade(x, k);
    if (xk.max_abs() == 0.0) continue;
    out += grade(geometric(inner(xk, blade_a), a_inv), k);
  }
  return out;
}

// Reciprocal of basis blade e_J under the scalar product: <e_J e^K> = delta_JK.
template <AlgebraSignature Sig>
Multivector<Sig> reciprocal_blade(BladeIndex blade) {
  if (blade >= Sig::size) throw UsageError("blade index out of range");
  const double s = product_sign<Sig>(blade, blade);  // e_J e_J = s
  return Multivector<Sig>::blade(blade, 1.0 / s);
}

// Basis blades of one grade in lexicographic order of their generator lists
// (grade 2 in G(4,1): e12, e13, e14, e15, e23, ...).
template <AlgebraSignature Sig>
std::vector<BladeIndex> blades_of_grade(int k) {
  if (k < 0 || k > Sig::dim) throw UsageError("grade out of range for signature");
  std::vector<BladeIndex> out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    BladeIndex b = 0;
    for (int g : idx) b |= BladeIndex{1} << g;
    out.push_back(b);
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == Sig::dim - k + pos) --pos;
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
    for (int j = pos + 1; j < k; ++j)
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

// Human-readable blade label, e.g. "e13" or "1" for the scalar.
template <AlgebraSignature Sig>
std::string blade_name(BladeIndex blade) {
  if (blade == 0) return "1";
  std::string s = "e";
  for (int g = 0; g < Sig::dim; ++g)
    if ((blade >> g) & 1u) s += std::to_string(g + 1);
  return s;
}

}  // namespace cgareg
