// Exact linear algebra over the Laurent ring: fraction-free elimination,
// rank, determinant, unit inverses, and span membership.

#include <catch2/catch_amalgamated.hpp>

#include "qaff/linalg.hpp"

using qaff::Laurent;
using qaff::Matrix;
using qaff::qint;

namespace {
Laurent L(const char* s) { return Laurent::parse(s); }
}  // namespace

TEST_CASE("matrix basics") {
  Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m.is_zero());
  m.at(1, 2) = L("q");
  CHECK_FALSE(m.is_zero());
  CHECK(Matrix().empty());
  CHECK_FALSE(m.empty());
  Matrix id = Matrix::identity(3);
  CHECK(id.is_diagonal());
  Matrix d(2, 2);
  d.at(0, 0) = L("q");
  CHECK(d.is_diagonal());
  d.at(0, 1) = L("1");
  CHECK_FALSE(d.is_diagonal());
}

TEST_CASE("arithmetic and shape guards") {
  Matrix a(2, 2), b(2, 2);
  a.at(0, 0) = L("q");
  a.at(0, 1) = L("1");
  a.at(1, 1) = L("q^-1");
  b.at(0, 0) = L("1");
  b.at(1, 0) = L("q");
  Matrix s = a + b;
  CHECK(s.at(0, 0) == L("q + 1"));
  CHECK((s - b) == a);
  // product against a hand-computed value
  Matrix p = a * b;
  CHECK(p.at(0, 0) == L("q + q"));  // q*1 + 1*q
  CHECK(p.at(1, 0) == L("1"));      // q^-1 * q
  CHECK(p.at(0, 1).is_zero());
  CHECK_THROWS(a + Matrix(2, 3));
  CHECK_THROWS(a * Matrix(3, 2));
  // identity is neutral
  CHECK(Matrix::identity(2) * a == a);
  CHECK(a * Matrix::identity(2) == a);
}

TEST_CASE("scaled and map") {
  Matrix a = Matrix::identity(2);
  Matrix twice = a.scaled(qint(2));
  CHECK(twice.at(0, 0) == qint(2));
  Matrix barred = twice.map([](const Laurent& x) { return x.bar(); });
  CHECK(barred == twice);  // [2] is bar-invariant
  Matrix neg = a.map([](const Laurent& x) { return -x; });
  CHECK((a + neg).is_zero());
}

TEST_CASE("rank over the Laurent ring (fraction-free)") {
  Matrix m(3, 3);
  // rows: r2 = q * r1 -> rank 2 with the third independent row
  m.at(0, 0) = L("1");
  m.at(0, 1) = L("q");
  m.at(1, 0) = L("q");
  m.at(1, 1) = L("q^2");
  m.at(2, 2) = L("q^-5");
  CHECK(qaff::rank(m) == 2);
  CHECK(qaff::rank(Matrix::identity(4)) == 4);
  CHECK(qaff::rank(Matrix(3, 3)) == 0);
  // rank is preserved under scalar scaling by a unit
  CHECK(qaff::rank(m.scaled(L("-q^3"))) == 2);
}

TEST_CASE("determinant") {
  Matrix m(2, 2);
  m.at(0, 0) = L("q");
  m.at(0, 1) = L("1");
  m.at(1, 0) = L("1");
  m.at(1, 1) = L("q^-1");
  CHECK(qaff::det(m).is_zero());
  m.at(1, 1) = L("q^-1 + 1");
  CHECK(qaff::det(m) == L("q"));  // q(q^-1 + 1) - 1
  CHECK(qaff::det(Matrix::identity(5)) == L("1"));
  // det is multiplicative on a known pair
  Matrix a(2, 2), b(2, 2);
  a.at(0, 0) = L("q");
  a.at(1, 1) = L("q^-1");
  b.at(0, 1) = L("1");
  b.at(1, 0) = L("-1");
  CHECK(qaff::det(a * b) == qaff::det(a) * qaff::det(b));
}

TEST_CASE("unit monomials and their inverses") {
  CHECK(qaff::is_unit_monomial(L("q^3")));
  CHECK(qaff::is_unit_monomial(L("-q^-2")));
  CHECK(qaff::is_unit_monomial(L("1")));
  CHECK_FALSE(qaff::is_unit_monomial(L("2q")));
  CHECK_FALSE(qaff::is_unit_monomial(L("q + 1")));
  CHECK_FALSE(qaff::is_unit_monomial(Laurent{}));
  CHECK(qaff::unit_inverse(L("-q^2")) == L("-q^-2"));
  CHECK(qaff::unit_inverse(L("q^3")) * L("q^3") == L("1"));
  CHECK_THROWS_AS(qaff::unit_inverse(L("q + 1")), qaff::InverseNotLaurent);
  CHECK_THROWS_AS(qaff::unit_inverse(L("2")), qaff::InverseNotLaurent);
}

TEST_CASE("inverse of a unimodular matrix") {
  // upper triangular with unit diagonal: inverse stays Laurent
  Matrix m(3, 3);
  m.at(0, 0) = L("q");
  m.at(0, 1) = qint(2);
  m.at(0, 2) = L("1 - q");
  m.at(1, 1) = L("-1");
  m.at(1, 2) = L("q^-4");
  m.at(2, 2) = L("q^-1");
  Matrix inv = qaff::inverse_unimodular(m);
  CHECK(m * inv == Matrix::identity(3));
  CHECK(inv * m == Matrix::identity(3));
  // non-invertible input is rejected
  Matrix sing(2, 2);
  sing.at(0, 0) = L("1");
  CHECK_THROWS(qaff::inverse_unimodular(sing));
}

TEST_CASE("span membership") {
  Matrix e11(2, 2), e22(2, 2), x(2, 2);
  e11.at(0, 0) = L("1");
  e22.at(1, 1) = L("1");
  // q*e11 - e22 is in span{e11, e22}
  x.at(0, 0) = L("q");
  x.at(1, 1) = L("-1");
  CHECK(qaff::in_span({e11, e22}, x));
  // an off-diagonal matrix is not
  Matrix y(2, 2);
  y.at(0, 1) = L("1");
  CHECK_FALSE(qaff::in_span({e11, e22}, y));
  // zero is in every span
  CHECK(qaff::in_span({e11}, Matrix(2, 2)));
}

TEST_CASE("global unit ratio") {
  Matrix a(2, 2);
  a.at(0, 0) = L("q + q^-1");
  a.at(1, 1) = L("1");
  a.at(1, 0) = L("-q^2");
  Matrix b = a.scaled(L("-q^3"));
  auto r = qaff::global_unit_ratio(b, a);
  REQUIRE(r.has_value());
  CHECK(*r == L("-q^3"));
  // inconsistent scaling has no global ratio
  Matrix c = a;
  c.at(1, 1) = L("q");
  CHECK_FALSE(qaff::global_unit_ratio(c, a).has_value());
  // non-unit ratios are rejected
  Matrix d = a.scaled(qint(2));
  CHECK_FALSE(qaff::global_unit_ratio(d, a).has_value());
}
