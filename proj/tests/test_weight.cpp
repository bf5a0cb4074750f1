// Weight lattice plumbing: simple roots with a cyclic zeroth node, the
// pairing, reflections, rotation, and the distinguished weights.

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "qaff/weight.hpp"

using qaff::alpha;
using qaff::Weight;

TEST_CASE("simple roots") {
  CHECK(alpha(4, 1) == Weight{-1, 1, 0, 0});
  CHECK(alpha(4, 3) == Weight{0, 0, -1, 1});
  CHECK(alpha(4, 0) == Weight{1, 0, 0, -1});
  CHECK(alpha(2, 0) == Weight{1, -1});
  CHECK_THROWS_AS(alpha(4, 4), qaff::ConfigMismatch);
  CHECK_THROWS_AS(alpha(1, 0), qaff::ConfigMismatch);
  // the affine roots sum to zero
  for (int n : {2, 3, 5}) {
    Weight s(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < n; ++i) s = qaff::add(s, alpha(n, i));
    CHECK(s == Weight(static_cast<std::size_t>(n), 0));
  }
}

TEST_CASE("pairing realizes the cyclic A-type Cartan matrix") {
  for (int n : {3, 4, 5}) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const long v = qaff::pairing(alpha(n, i), alpha(n, j));
        const int d = (i - j + n) % n;
        if (d == 0)
          CHECK(v == 2);
        else if (d == 1 || d == n - 1)
          CHECK(v == -1);
        else
          CHECK(v == 0);
      }
  }
  // n = 2: the two nodes are doubly linked
  CHECK(qaff::pairing(alpha(2, 0), alpha(2, 1)) == -2);
  CHECK_THROWS_AS(qaff::pairing(Weight{1}, Weight{1, 2}),
                  qaff::ConfigMismatch);
}

TEST_CASE("add, sub, reflect, rotate") {
  Weight k{3, 0, 1};
  CHECK(qaff::add(k, alpha(3, 1)) == Weight{2, 1, 1});
  CHECK(qaff::sub(k, alpha(3, 0)) == Weight{2, 0, 2});
  CHECK(qaff::reflect(k, 1) == Weight{0, 3, 1});
  CHECK(qaff::reflect(k, 2) == Weight{3, 1, 0});
  CHECK(qaff::reflect(k, 0) == Weight{1, 0, 3});  // swaps outer slots
  CHECK(qaff::reflect(qaff::reflect(k, 2), 2) == k);
  CHECK(qaff::rotate(k) == Weight{0, 1, 3});
  CHECK(qaff::rotate(qaff::rotate(qaff::rotate(k))) == k);
  CHECK_THROWS_AS(qaff::reflect(k, 3), qaff::ConfigMismatch);
}

TEST_CASE("reflection interacts with the pairing as a Weyl action") {
  // <s_i k, a_i> = -<k, a_i> for the finite nodes
  Weight k{2, 5, 1, 0};
  for (int i = 1; i < 4; ++i)
    CHECK(qaff::pairing(qaff::reflect(k, i), alpha(4, i)) ==
          -qaff::pairing(k, alpha(4, i)));
}

TEST_CASE("nonzero objects are the nonnegative compositions of N") {
  CHECK(qaff::is_nonzero_object({0, 2}, 2));
  CHECK(qaff::is_nonzero_object({1, 1, 0}, 2));
  CHECK_FALSE(qaff::is_nonzero_object({-1, 3}, 2));
  CHECK_FALSE(qaff::is_nonzero_object({1, 0}, 2));
  CHECK_FALSE(qaff::is_nonzero_object({3, 0}, 2));
}

TEST_CASE("distinguished weights") {
  CHECK(qaff::eta_weight(4, 3) == Weight{0, 0, 0, 3});
  CHECK(qaff::eta_weight(2, 1) == Weight{0, 1});
  CHECK(qaff::mu_weight(5, 3) == Weight{0, 0, 1, 1, 1});
  CHECK(qaff::mu_weight(3, 3) == Weight{1, 1, 1});  // n = N allowed
  CHECK_THROWS_AS(qaff::mu_weight(2, 3), qaff::ConfigMismatch);
}

TEST_CASE("folding map and root realization") {
  // p(a_0, a_1, ..., a_{n-1}) subtracts a_0 from every finite coefficient
  CHECK(qaff::p_map({1, 0, 0}) == std::vector<int>{-1, -1});
  CHECK(qaff::p_map({0, 2, 1}) == std::vector<int>{2, 1});
  // realizing p of the affine node gives minus the sum of the finite roots,
  // which is alpha_0 with the wrap removed
  Weight w = qaff::root_combination(3, qaff::p_map({1, 0, 0}));
  Weight want = qaff::sub(Weight(3, 0), qaff::add(alpha(3, 1), alpha(3, 2)));
  CHECK(w == want);
  CHECK_THROWS_AS(qaff::p_map({}), qaff::ConfigMismatch);
}

TEST_CASE("weight text round trip") {
  for (const Weight& k :
       {Weight{0, 2}, Weight{1, 0, 3}, Weight{-1, 5}, Weight{7}}) {
    CHECK(qaff::parse_weight(qaff::weight_to_string(k)) == k);
  }
  CHECK(qaff::weight_to_string({0, 2}) == "(0,2)");
  CHECK_THROWS_AS(qaff::parse_weight("0,2"), qaff::SyntaxError);
  CHECK_THROWS_AS(qaff::parse_weight("(0,2"), qaff::SyntaxError);
  CHECK_THROWS_AS(qaff::parse_weight("(0,2)x"), qaff::SyntaxError);
}

TEST_CASE("weight enumeration is complete, sorted, and duplicate-free") {
  auto ws = qaff::enumerate_weights(3, 4);
  CHECK(ws.size() == 15);  // compositions of 4 into 3 parts
  std::set<Weight> seen(ws.begin(), ws.end());
  CHECK(seen.size() == ws.size());
  for (const auto& k : ws) CHECK(qaff::is_nonzero_object(k, 4));
  CHECK(std::is_sorted(ws.begin(), ws.end()));
  CHECK(qaff::enumerate_weights(2, 0).size() == 1);
}

TEST_CASE("strict slot guard") {
  CHECK_NOTHROW(qaff::require_n_gt_N(3, 2));
  CHECK_THROWS_AS(qaff::require_n_gt_N(2, 2), qaff::ConfigMismatch);
}
