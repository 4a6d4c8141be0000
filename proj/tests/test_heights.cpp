#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "creature/params.hpp"

using namespace creature;

namespace {

Regime toy_regime_J3() {
  // small lax toy: levels 0 and 4 with three sublevels each
  Regime r;
  r.mode = Regime::Mode::toy;
  r.validation = ValidationLevel::lax;
  auto add = [&](const std::string& h, unsigned nP, unsigned nR, unsigned nB,
                 unsigned nS, unsigned len) {
    ToyHeightDecl d;
    d.h = height_from_string(h);
    d.nP = BigNat(nP);
    d.nR = BigNat(nR);
    d.nB = BigNat(nB);
    d.nS = BigNat(nS);
    d.interval_len = BigNat(len);
    r.heights.push_back(d);
  };
  add("(0,0)", 1, 2, 3, 4, 2);
  add("(0,1)", 5, 6, 7, 8, 3);
  add("(0,2)", 9, 10, 11, 16, 4);
  add("1", 17, 18, 19, 1820, 4);   // C(16, 4) = 1820
  add("2", 30941, 30942, 30943, 30944, 0);
  add("3", 30945, 30946, 30947, 32768, 15);
  add("(4,0)", 990721, 990722, 990723, 990724, 2);  // nS = 4 = 2^2
  r.nm_levels[0] = ToyNmLevel{0, BigNat(3), std::nullopt, false};
  r.nm_levels[1] = ToyNmLevel{1, BigNat(3), std::nullopt, false};
  return r;
}

}  // namespace

TEST_CASE("height ordering and serialization") {
  Height a = Height::sub(0, BigNat(0));
  Height b = Height::sub(0, BigNat(2));
  Height c = Height::lev(1);
  Height d = Height::lev(3);
  Height e = Height::sub(1, BigNat(0));
  CHECK(a < b);
  CHECK(b < c);
  CHECK(c < d);
  CHECK(d < e);
  CHECK(to_string(e) == "(4,0)");
  CHECK(height_from_string("(4,0)") == e);
  CHECK(height_from_string("7") == Height::lev(7));
  CHECK_THROWS_AS(height_from_string("4"), validation_error);
}

TEST_CASE("typegroups by residue") {
  CHECK(Height::sub(2, BigNat(5)).typegroup() == TypeGroup::nm);
  CHECK(Height::lev(5).typegroup() == TypeGroup::star_n);
  CHECK(Height::lev(6).typegroup() == TypeGroup::slalom);
  CHECK(Height::lev(7).typegroup() == TypeGroup::ct);
}

TEST_CASE("step crosses boundaries per the Def 3.1 ordering") {
  Regime r = toy_regime_J3();
  // succ of (0, J_0 - 1) -> level 1
  CHECK(step(Height::sub(0, BigNat(2)), StepDir::succ, r) == Height::lev(1));
  // 4k+3 < (4k+4, 0)
  CHECK(step(Height::lev(3), StepDir::succ, r) == Height::sub(1, BigNat(0)));
  // interior sublevel step
  CHECK(step(Height::sub(0, BigNat(0)), StepDir::succ, r) == Height::sub(0, BigNat(1)));
  // pred inverses
  CHECK(step(Height::lev(1), StepDir::pred, r) == Height::sub(0, BigNat(2)));
  CHECK(step(Height::sub(1, BigNat(0)), StepDir::pred, r) == Height::lev(3));
  CHECK_THROWS_AS(step(Height::sub(0, BigNat(0)), StepDir::pred, r), domain_error);
}

TEST_CASE("paper regime: succ of (0,0) is (0,1) because J_0 = 3") {
  Regime p = Regime::paper();
  CHECK(step(Height::sub(0, BigNat(0)), StepDir::succ, p) == Height::sub(0, BigNat(1)));
  CHECK(step(Height::sub(0, BigNat(2)), StepDir::succ, p) == Height::lev(1));
}

TEST_CASE("step round trip: pred(succ(h)) = h") {
  Regime r = toy_regime_J3();
  std::vector<Height> hs = {Height::sub(0, BigNat(0)), Height::sub(0, BigNat(1)),
                            Height::sub(0, BigNat(2)), Height::lev(1), Height::lev(2),
                            Height::lev(3), Height::sub(1, BigNat(0))};
  for (const auto& h : hs) {
    Height s = step(h, StepDir::succ, r);
    CHECK(step(s, StepDir::pred, r) == h);
  }
}

TEST_CASE("layout: typegroups, declared intervals, disjoint and ordered") {
  Regime r = toy_regime_J3();
  ParamTable t = build_table(r, Height::sub(1, BigNat(0)));
  // slalom heights carry no interval
  LevelLayout slal = layout(Height::lev(2), t);
  CHECK(slal.tg == TypeGroup::slalom);
  CHECK(!slal.interval.has_value());
  // declared toy interval echoed back, consecutive placement
  BigNat next_lo = 0;
  for (const auto& rec : t.records()) {
    if (rec.tg == TypeGroup::slalom) continue;
    LevelLayout l = layout(rec.h, t);
    REQUIRE(l.interval.has_value());
    auto [lo, len] = *l.interval;
    CHECK(lo == next_lo);
    next_lo = lo + len;
  }
  // J exposed on sublevels
  LevelLayout nm0 = layout(Height::sub(0, BigNat(1)), t);
  REQUIRE(nm0.sublevel_count.has_value());
  CHECK(*nm0.sublevel_count == 3);
}

TEST_CASE("layout horizon error") {
  Regime r = toy_regime_J3();
  ParamTable t = build_table(r, Height::lev(1));
  CHECK_THROWS_AS(layout(Height::lev(6), t), horizon_error);
}
