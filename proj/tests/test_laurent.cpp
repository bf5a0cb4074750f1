// Exact Laurent-polynomial arithmetic in q: the coefficient ring everything
// else computes over.

#include <catch2/catch_amalgamated.hpp>

#include "qaff/laurent.hpp"

using qaff::Laurent;
using qaff::qbinom;
using qaff::qfact;
using qaff::qint;

TEST_CASE("monomials, coefficients and term access") {
  Laurent p = Laurent::monomial(3, -2) + Laurent::q_pow(5);
  CHECK(p.coeff(-2) == 3);
  CHECK(p.coeff(5) == 1);
  CHECK(p.coeff(0) == 0);
  CHECK(p.min_exp() == -2);
  CHECK(p.max_exp() == 5);
  CHECK(p.term_count() == 2);
  CHECK_FALSE(p.is_zero());
  CHECK(Laurent{}.is_zero());
  CHECK(Laurent{0}.is_zero());
}

TEST_CASE("ring arithmetic with exact cancellation") {
  Laurent a = Laurent::parse("q + 1 + q^-1");
  Laurent b = Laurent::parse("q - 1");
  CHECK(a + b == Laurent::parse("2q + q^-1"));
  CHECK(a - a == Laurent{});
  // (q + 1 + q^-1)(q - 1) = q^2 - q^-1
  CHECK(a * b == Laurent::parse("q^2 - q^-1"));
  CHECK(-b == Laurent::parse("1 - q"));
  Laurent c = a;
  c += b;
  c -= b;
  CHECK(c == a);
}

TEST_CASE("integer scalars embed on the left") {
  qaff::Int five = 5;
  CHECK(five * Laurent::q_pow(2) == Laurent::monomial(5, 2));
}

TEST_CASE("power") {
  Laurent two = qint(2);  // q + q^-1
  CHECK(two.pow(0) == Laurent{1});
  CHECK(two.pow(1) == two);
  CHECK(two.pow(3) == Laurent::parse("q^3 + 3q + 3q^-1 + q^-3"));
}

TEST_CASE("ordering is a total order compatible with equality") {
  Laurent a = Laurent::parse("q");
  Laurent b = Laurent::parse("q^-1");
  CHECK((a <=> b) != std::strong_ordering::equal);
  CHECK((a <=> a) == std::strong_ordering::equal);
  // total: exactly one of <, ==, > holds.
  bool lt = (a <=> b) == std::strong_ordering::less;
  bool gt = (a <=> b) == std::strong_ordering::greater;
  CHECK(lt != gt);
}

TEST_CASE("parse round trips to_string") {
  for (const char* s : {"q + q^-1", "1", "-q^3 + 2 - 5q^-2", "q^2",
                        "3q^4 - q^2 + 7q^-6"}) {
    Laurent p = Laurent::parse(s);
    CHECK(Laurent::parse(p.to_string()) == p);
  }
  CHECK(Laurent{}.to_string() == "0");
}

TEST_CASE("parse rejects malformed input with an offset") {
  CHECK_THROWS_AS(Laurent::parse(""), qaff::SyntaxError);
  CHECK_THROWS_AS(Laurent::parse("q +"), qaff::SyntaxError);
  CHECK_THROWS_AS(Laurent::parse("q^"), qaff::SyntaxError);
  CHECK_THROWS_AS(Laurent::parse("* q"), qaff::SyntaxError);
  try {
    Laurent::parse("q + + q");
    FAIL("expected SyntaxError");
  } catch (const qaff::SyntaxError& e) {
    CHECK(std::string(e.what()).find("offset") != std::string::npos);
  }
}

TEST_CASE("bar involution inverts q") {
  Laurent p = Laurent::parse("2q^3 - q + 5q^-2");
  CHECK(p.bar() == Laurent::parse("2q^-3 - q^-1 + 5q^2"));
  CHECK(p.bar().bar() == p);
  // quantum integers are bar-invariant
  for (long n = 0; n <= 6; ++n) CHECK(qint(n).bar() == qint(n));
}

TEST_CASE("positivity and evaluation at q = 1") {
  CHECK(qint(4).is_positive());
  CHECK_FALSE(Laurent::parse("q - 1").is_positive());
  // "positive" means no negative coefficient; zero qualifies vacuously
  CHECK(Laurent{}.is_positive());
  CHECK(qint(5).eval_q1() == 5);
  CHECK(Laurent::parse("q^7 - 3 + q^-7").eval_q1() == -1);
  CHECK(qbinom(6, 3).eval_q1() == 20);
}

TEST_CASE("divide_exact is exact division or an error") {
  Laurent n = qint(2) * qint(3);
  CHECK(n.divide_exact(qint(2)) == qint(3));
  CHECK(n.divide_exact(qint(3)) == qint(2));
  CHECK_THROWS_AS(qint(3).divide_exact(qint(2)), qaff::InexactDivision);
  CHECK_THROWS_AS(Laurent{1}.divide_exact(Laurent{}), qaff::InexactDivision);
  // zero divided by anything nonzero is zero
  CHECK(Laurent{}.divide_exact(qint(2)) == Laurent{});
}

TEST_CASE("quantum integers against the balanced power-sum oracle") {
  for (long n = 0; n <= 8; ++n) {
    Laurent expect;
    for (long j = 0; j < n; ++j)
      expect += Laurent::q_pow(static_cast<int>(n - 1 - 2 * j));
    CHECK(qint(n) == expect);
    CHECK(qint(-n) == -expect);
  }
  CHECK(qint(2) == Laurent::parse("q + q^-1"));
  CHECK(qint(1) == Laurent{1});
  CHECK(qint(0) == Laurent{});
}

TEST_CASE("quantum factorial and binomial against Pascal recurrence") {
  CHECK(qfact(0) == Laurent{1});
  CHECK(qfact(3) == qint(1) * qint(2) * qint(3));
  CHECK_THROWS(qfact(-1));

  // Pascal oracle: [n,k] = q^k [n-1,k] + q^{k-n} [n-1,k-1].
  for (long n = 0; n <= 8; ++n)
    for (long k = 0; k <= n; ++k) {
      Laurent expect;
      if (k == 0 || k == n) {
        expect = Laurent{1};
      } else {
        expect = Laurent::q_pow(static_cast<int>(k)) * qbinom(n - 1, k) +
                 Laurent::q_pow(static_cast<int>(k - n)) * qbinom(n - 1, k - 1);
      }
      CHECK(qbinom(n, k) == expect);
      CHECK(qbinom(n, k).bar() == qbinom(n, k));
      CHECK(qbinom(n, k).is_positive());
    }
  CHECK(qbinom(2, 5).is_zero());
  CHECK(qbinom(5, -1).is_zero());
  // factorial form: [n,k] [k]! [n-k]! = [n]!
  CHECK(qbinom(5, 2) * qfact(2) * qfact(3) == qfact(5));
}

TEST_CASE("grading-shift classes") {
  using qaff::Side;
  // cohomological shift contributes a sign, internal shift a power of q
  CHECK(qaff::shift_class(Side::skew, 0, 3) == Laurent::q_pow(3));
  CHECK(qaff::shift_class(Side::skew, 1, 0) == Laurent::parse("-1"));
  CHECK(qaff::shift_class(Side::symmetric, 2, -1) == Laurent::q_pow(-1));
  // the angle shift differs by side
  CHECK(qaff::angle_class(Side::symmetric, 2) == Laurent::q_pow(2));
  CHECK(qaff::angle_class(Side::skew, 1) == Laurent::parse("-q^-1"));
  CHECK(qaff::angle_class(Side::skew, 2) == Laurent::q_pow(-2));
  CHECK(qaff::shift_triple_class(Side::skew, 1, 1, 2) ==
        Laurent::parse("q"));
}

TEST_CASE("side names") {
  CHECK(qaff::to_string(qaff::Side::skew) == "skew");
  CHECK(qaff::to_string(qaff::Side::symmetric) == "symmetric");
  CHECK(qaff::side_from_string("sym") == qaff::Side::symmetric);
  CHECK_THROWS(qaff::side_from_string("bogus"));
}
