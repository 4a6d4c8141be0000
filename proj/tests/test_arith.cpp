#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "creature/extnum.hpp"
#include "creature/tower.hpp"

using namespace creature;

namespace {

// independent high-precision double check for interval containment
double rat_d(const Rat& q) { return q.get_d(); }

}  // namespace

TEST_CASE("log2_binom small exact cases") {
  // C(4,2) = 6: interval must contain log2 6
  ExtNum v = log2_binom(BigNat(4), BigNat(2), 32);
  Interval iv = v.enclosure(64);
  double lg6 = std::log2(6.0);
  CHECK(rat_d(iv.lo) <= lg6);
  CHECK(rat_d(iv.hi) >= lg6);
  // C(n, 0) = 1: exactly 0
  ExtNum z = log2_binom(BigNat(5), BigNat(0), 32);
  CHECK(z.is_exact());
  CHECK(z.exact_value() == 0);
  // power of two: C(4,1) = 4 -> exactly 2
  ExtNum p = log2_binom(BigNat(4), BigNat(1), 32);
  CHECK(p.is_exact());
  CHECK(p.exact_value() == 2);
}

TEST_CASE("log2_binom big case cross-checked against the exact binomial") {
  BigNat n = BigNat(1) << 10, k = BigNat(1) << 9;
  ExtNum v = log2_binom(n, k, 64);
  // independent oracle: exact big-integer binomial, then bit length brackets
  BigNat c = binom_exact(n, k, 1u << 22);
  Interval iv = v.enclosure(96);
  // log2 c lies in [bits-1, bits]
  std::size_t bits = bit_length(c);
  CHECK(rat_d(iv.hi) >= static_cast<double>(bits - 1));
  CHECK(rat_d(iv.lo) <= static_cast<double>(bits));
  // width bound: <= 2^(1-prec) * max(1, log2 C) at the requested precision
  Interval at_p = v.enclosure(64);
  Rat width = at_p.hi - at_p.lo;
  Rat bound = Rat(BigNat(bits + 1)) / Rat(BigNat(1) << 60);
  CHECK(width < bound);
}

TEST_CASE("log2_binom domain error") {
  CHECK_THROWS_AS(log2_binom(BigNat(3), BigNat(4), 32), domain_error);
  CHECK_THROWS_AS(log2_binom(BigNat(3), BigNat(1), 8), precondition_error);
}

TEST_CASE("exhaustive interval containment for small binomials") {
  // all n,k with C(n,k) <= 2^20: interval contains exact log2
  for (unsigned n = 0; n <= 24; ++n) {
    for (unsigned k = 0; k <= n; ++k) {
      BigNat c = binom_exact(BigNat(n), BigNat(k), 1u << 20);
      if (c > (1u << 20)) continue;
      ExtNum v = log2_binom(BigNat(n), BigNat(k), 32);
      Interval iv = v.enclosure(64);
      double truth = std::log2(c.get_d());
      CHECK(rat_d(iv.lo) <= truth + 1e-12);
      CHECK(rat_d(iv.hi) >= truth - 1e-12);
    }
  }
}

TEST_CASE("tower_cmp: examples from the definitions") {
  // 2^(3^2) vs 2^(3^3): same base, 9 < 27
  TowerNum a = TowerNum::tower(BigNat(2), BigNat(3), BigNat(2));
  TowerNum b = TowerNum::tower(BigNat(2), BigNat(3), BigNat(3));
  CHECK(tower_cmp(a, b) == Ord::LT);
  // 2^(3^1) vs flat 8: both denote 8
  TowerNum c = TowerNum::tower(BigNat(2), BigNat(3), BigNat(1));
  CHECK(tower_cmp(c, TowerNum::flat_value(BigNat(8))) == Ord::EQ);
  // 3^(2^4) = 43046721 vs 2^(3^3) = 134217728
  TowerNum d = TowerNum::tower(BigNat(3), BigNat(2), BigNat(4));
  TowerNum e = TowerNum::tower(BigNat(2), BigNat(3), BigNat(3));
  CHECK(tower_cmp(d, e) == Ord::LT);
}

TEST_CASE("tower_cmp agrees with exact expansion whenever it fits 2^16 bits") {
  std::vector<TowerNum> towers;
  std::vector<BigNat> values;
  for (unsigned base : {2u, 3u, 4u, 6u}) {
    for (unsigned mid : {2u, 3u, 5u}) {
      for (unsigned top : {0u, 1u, 2u, 3u}) {
        BigNat e = pow_checked(BigNat(mid), BigNat(top), 64);
        BigNat v = pow_checked(BigNat(base), e, 1u << 16);
        towers.push_back(TowerNum::tower(BigNat(base), BigNat(mid), BigNat(top)));
        values.push_back(v);
      }
    }
  }
  for (std::size_t i = 0; i < towers.size(); ++i) {
    for (std::size_t j = 0; j < towers.size(); ++j) {
      Ord got = tower_cmp(towers[i], towers[j]);
      int want = cmp(values[i], values[j]);
      CHECK(got == (want < 0 ? Ord::LT : want > 0 ? Ord::GT : Ord::EQ));
    }
  }
}

TEST_CASE("tower_cmp on non-materializable same-base towers") {
  // 2^(5^100) vs 2^(5^101)
  TowerNum a = TowerNum::tower(BigNat(2), BigNat(5), BigNat(100));
  TowerNum b = TowerNum::tower(BigNat(2), BigNat(5), BigNat(101));
  CHECK(tower_cmp(a, b) == Ord::LT);
  CHECK(tower_cmp(b, a) == Ord::GT);
  CHECK(tower_cmp(a, a) == Ord::EQ);
  // 4^(5^100) = 2^(2*5^100) vs 2^(5^101) = 2^(5*5^100): LT via canonical roots
  TowerNum c = TowerNum::tower(BigNat(4), BigNat(5), BigNat(100));
  CHECK(tower_cmp(c, b) == Ord::LT);
  CHECK(tower_cmp(b, c) == Ord::GT);
  // 4^(5^100) vs 2^(2*... ) equality through the canonical root:
  // 16^(5^100) = 4^(2*5^100) -- compare 16^(5^100) vs 4^(5^101): 4*5^100 vs
  // 2*5^101 = 10*5^100: LT
  TowerNum d = TowerNum::tower(BigNat(16), BigNat(5), BigNat(100));
  TowerNum e = TowerNum::tower(BigNat(4), BigNat(5), BigNat(101));
  CHECK(tower_cmp(d, e) == Ord::LT);
}

TEST_CASE("tower flat vs huge tower") {
  TowerNum huge = TowerNum::tower(BigNat(2), BigNat(7), BigNat(50));
  BigNat big = pow_checked(BigNat(2), BigNat(1u << 15), 1u << 16);
  CHECK(tower_cmp(TowerNum::flat_value(big), huge) == Ord::LT);
  CHECK(tower_cmp(huge, TowerNum::flat_value(big)) == Ord::GT);
}

TEST_CASE("tower_sq_cmp: congenial separation shape") {
  // f = B^(e^3), g = B^(e^9), e = 3, B = 2: f^2 = 2^54 < g = 2^19683
  TowerNum f = TowerNum::tower(BigNat(2), BigNat(3), BigNat(3));
  TowerNum g = TowerNum::tower(BigNat(2), BigNat(3), BigNat(9));
  CHECK(tower_sq_cmp(f, g, false) == Ord::LT);
  CHECK(tower_sq_cmp(f, g, true) == Ord::LT);  // f^2 * B < g too
  CHECK(tower_sq_cmp(g, f, false) == Ord::GT);
  // non-materializable: f = B^(e^1000), g' = B^(e^1001): 2 e^1000 < e^1001
  TowerNum fl = TowerNum::tower(BigNat(2), BigNat(3), BigNat(1000));
  TowerNum gl = TowerNum::tower(BigNat(2), BigNat(3), BigNat(1001));
  CHECK(tower_sq_cmp(fl, gl, false) == Ord::LT);
  // and 2 e^1000 > e^1000: f^2 > g when tops are equal
  CHECK(tower_sq_cmp(fl, fl, false) == Ord::GT);
}

TEST_CASE("ext_cmp basics") {
  CHECK(ext_cmp(ExtNum::exact(Rat(1, 2)), ExtNum::exact(Rat(1, 3))) == Ord::GT);
  // interval vs exact: log2(3) in [1.58, 1.59] vs 2
  CHECK(ext_cmp(ExtNum::log2(BigNat(3)), ExtNum::exact(2L)) == Ord::LT);
  // log2(3)/2 vs log2(5)/3: 0.7925 vs 0.7740
  ExtNum a = ExtNum::log2(BigNat(3)) / ExtNum::exact(2L);
  ExtNum b = ExtNum::log2(BigNat(5)) / ExtNum::exact(3L);
  CHECK(ext_cmp(a, b) == Ord::GT);
  // undecidable: the same irrational through two expressions
  ExtNum c = ExtNum::log2(BigNat(9));
  ExtNum d = ExtNum::log2(BigNat(3)) * ExtNum::exact(2L);
  CHECK_THROWS_AS(ext_cmp(c, d, 1024), undecidable_error);
}

TEST_CASE("ext_cmp antisymmetric and transitive on a decided set") {
  std::vector<ExtNum> vals = {
      ExtNum::exact(Rat(1, 3)),        ExtNum::log2(BigNat(3)),
      ExtNum::log3(BigNat(7)),         ExtNum::exact(2L),
      ExtNum::log2(BigNat(10)),        ExtNum::exact(Rat(7, 2)),
  };
  for (std::size_t i = 0; i < vals.size(); ++i) {
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (i == j) continue;  // self-comparison of an interval never separates
      Ord oij = ext_cmp(vals[i], vals[j]);
      Ord oji = ext_cmp(vals[j], vals[i]);
      if (oij == Ord::LT) CHECK(oji == Ord::GT);
      if (oij == Ord::GT) CHECK(oji == Ord::LT);
      if (oij == Ord::EQ) CHECK(oji == Ord::EQ);
      for (std::size_t k = 0; k < vals.size(); ++k) {
        if (k == i || k == j) continue;
        if (oij == Ord::LT && ext_cmp(vals[j], vals[k]) == Ord::LT)
          CHECK(ext_cmp(vals[i], vals[k]) == Ord::LT);
      }
    }
  }
}

TEST_CASE("exactness detection") {
  CHECK(ExtNum::log2(BigNat(1024)).is_exact());
  CHECK(ExtNum::log2(BigNat(1024)).exact_value() == 10);
  CHECK(ExtNum::log3(BigNat(27)).is_exact());
  CHECK(ExtNum::log3(BigNat(27)).exact_value() == 3);
  CHECK(!ExtNum::log2(BigNat(6)).is_exact());
  // arithmetic on exact values stays exact
  ExtNum v = (ExtNum::exact(Rat(1, 2)) + ExtNum::exact(Rat(1, 3))) * ExtNum::exact(6L);
  CHECK(v.is_exact());
  CHECK(v.exact_value() == 5);
  // max0
  CHECK((ExtNum::exact(-3L)).max0().exact_value() == 0);
}

TEST_CASE("interval widening never shrinks: sub/mul respect enclosure") {
  ExtNum x = ExtNum::log2(BigNat(6)) - ExtNum::log2(BigNat(3));  // = 1 exactly
  Interval iv = x.enclosure(128);
  CHECK(rat_d(iv.lo) <= 1.0);
  CHECK(rat_d(iv.hi) >= 1.0);
  CHECK(ext_cmp(x, ExtNum::exact(Rat(9, 10))) == Ord::GT);
  CHECK(ext_cmp(x, ExtNum::exact(Rat(11, 10))) == Ord::LT);
}

TEST_CASE("tower json round trip") {
  TowerNum t = TowerNum::tower(BigNat(5), BigNat(4), BigNat(77));
  TowerNum u = TowerNum::from_json(t.to_json());
  CHECK(tower_cmp(t, u) == Ord::EQ);
  TowerNum f = TowerNum::flat_value(BigNat(123456789));
  CHECK(tower_cmp(TowerNum::from_json(f.to_json()), f) == Ord::EQ);
}
