// Word language: factor construction, text round trips, weight flow, and
// formal adjoints.

#include <catch2/catch_amalgamated.hpp>

#include "qaff/word.hpp"

using qaff::FactorKind;
using qaff::make_E;
using qaff::make_F;
using qaff::parse_word;
using qaff::Weight;
using qaff::WordExpr;
using qaff::word_to_string;

TEST_CASE("factor constructors") {
  qaff::Factor e = make_E(2, 3);
  CHECK(e.kind == FactorKind::E);
  CHECK(e.index == 2);
  CHECK(e.power == 3);
  qaff::Factor t = qaff::make_T(1, /*primed=*/true, /*inverse=*/true);
  CHECK(t.kind == FactorKind::Tprime);
  CHECK(t.power == -1);
  qaff::Factor s = qaff::make_shift(1, 2, -3);
  CHECK(s.shift == std::array<int, 3>{1, 2, -3});
  qaff::Factor id = qaff::make_idem({0, 2});
  CHECK(id.idem == Weight{0, 2});
}

TEST_CASE("word text round trips") {
  for (const char* text : {
           "E1 F1 1_(0,2)",
           "F0^(2) F1^(3) 1_(0,0,2)",
           "T1 T2^-1 T0' T1'^-1 1_(1,1,0)",
           "R' R'^-1 1_(0,2)",
           "phi1 phi2^-1 1_(1,1)",
           "E1,1 F1,1 1_(0,2)",
           "<1>[2]{-3} E0 1_(0,2)",
           "1_(3,0,1)",
       }) {
    WordExpr w = parse_word(text);
    CHECK(word_to_string(w) == text);
    CHECK(parse_word(word_to_string(w)) == w);
  }
}

TEST_CASE("parse validates indices against n when given") {
  CHECK_NOTHROW(parse_word("E1 1_(0,2)", 2));
  CHECK_THROWS_AS(parse_word("E2 1_(0,2)", 2), qaff::SyntaxError);
  CHECK_THROWS_AS(parse_word("1_(0,2)", 3), qaff::SyntaxError);  // arity
  CHECK_THROWS_AS(parse_word("E1 E1 Q9", 2), qaff::SyntaxError);
  CHECK_THROWS_AS(parse_word("F1^(0) 1_(0,2)", 2), qaff::SyntaxError);
  try {
    parse_word("E1 ??", 2);
    FAIL("expected SyntaxError");
  } catch (const qaff::SyntaxError& e) {
    CHECK(e.offset > 0);
  }
}

TEST_CASE("factor weight action") {
  using qaff::factor_target;
  // E_i raises along alpha_i, F_i lowers; divided powers scale the move
  CHECK(factor_target(make_E(1), {1, 1}) == Weight{0, 2});
  CHECK(factor_target(make_F(1), {0, 2}) == Weight{1, 1});
  CHECK(factor_target(make_E(1, 2), {2, 0}) == Weight{0, 2});
  CHECK(factor_target(make_E(0), {1, 0, 1}) == Weight{2, 0, 0});
  CHECK(factor_target(make_F(0), {2, 0, 0}) == Weight{1, 0, 1});
  // braid factors reflect, the rotation cycles
  CHECK(factor_target(qaff::make_T(1), {3, 0}) == Weight{0, 3});
  CHECK(factor_target(qaff::make_Rprime(), {1, 2, 0}) == Weight{2, 0, 1});
  CHECK(factor_target(qaff::make_Rprime(true), {2, 0, 1}) == Weight{1, 2, 0});
  // idempotents and shifts are weight-neutral
  CHECK(factor_target(qaff::make_idem({0, 2}), {0, 2}) == Weight{0, 2});
  CHECK(factor_target(qaff::make_shift(1, 0, 0), {0, 2}) == Weight{0, 2});
}

TEST_CASE("weight flow records boundaries rightmost-first") {
  WordExpr w = parse_word("E1 F1 1_(0,2)", 2);
  auto flow = qaff::weight_flow(w, {0, 2}, 2);
  REQUIRE(flow.has_value());
  // source, then one boundary per weight-carrying factor
  CHECK(*flow == std::vector<Weight>{{0, 2}, {1, 1}, {0, 2}});
  CHECK(qaff::flow_target(w, {0, 2}) == Weight{0, 2});
}

TEST_CASE("weight flow detects zero words") {
  // lowering below zero
  CHECK_FALSE(qaff::weight_flow(parse_word("E1 1_(0,2)", 2), {0, 2}, 2));
  // idempotent mismatch
  CHECK_FALSE(qaff::weight_flow(parse_word("F1 1_(1,1)", 2), {0, 2}, 2));
  // source outside the object set
  CHECK_FALSE(qaff::weight_flow(parse_word("1_(0,3)", 2), {0, 3}, 2));
}

TEST_CASE("internal idempotents are checked along the flow") {
  WordExpr good = parse_word("E1 1_(1,1) F1 1_(0,2)", 2);
  WordExpr bad = parse_word("E1 1_(0,2) F1 1_(0,2)", 2);
  CHECK(qaff::weight_flow(good, {0, 2}, 2).has_value());
  CHECK_FALSE(qaff::weight_flow(bad, {0, 2}, 2));
}

TEST_CASE("formal adjoints swap raising and lowering with a grading shift") {
  // At k = (0,2): right adjoint of F1 is E1 with internal shift
  // <a(-<k,a_1> + a)> accumulated from the local weight.
  Weight k{0, 2};
  WordExpr w = parse_word("F1 1_(0,2)", 2);
  WordExpr r = qaff::right_adjoint(w, k);
  REQUIRE(r.factors.size() == 3);  // 1_k, E1, net shift
  CHECK(r.factors[0].kind == FactorKind::Idem);
  CHECK(r.factors[1].kind == FactorKind::E);
  CHECK(r.factors[1].index == 1);
  CHECK(r.factors[2].kind == FactorKind::Shift);
  // left and right adjoint shifts are opposite
  WordExpr l = qaff::left_adjoint(w, k);
  CHECK(l.factors[2].shift[0] == -r.factors[2].shift[0]);
  // adjoint of an adjoint restores the generator content (the adjoint word
  // runs the other way, so it starts at F1's target weight)
  WordExpr rr = qaff::right_adjoint(WordExpr{{r.factors[0], r.factors[1]}},
                                    Weight{1, 1});
  bool has_F1 = false;
  for (const auto& f : rr.factors)
    has_F1 |= (f.kind == FactorKind::F && f.index == 1);
  CHECK(has_F1);
}

TEST_CASE("adjoint rejects unsupported factors") {
  CHECK_THROWS_AS(
      qaff::right_adjoint(parse_word("T1 1_(0,2)", 2), Weight{0, 2}),
      qaff::UnsupportedFactor);
}
