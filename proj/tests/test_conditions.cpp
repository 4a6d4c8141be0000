#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "creature/json_io.hpp"
#include "toy_tables.hpp"

using namespace creature;
using creature::testing::toy_explicit_table;
using creature::testing::toy_uniform_table;

namespace {

Creature cells_creature(Height h, std::vector<unsigned long> atoms) {
  std::vector<BigNat> v;
  for (auto a : atoms) v.push_back(BigNat(a));
  return make_creature(CreatureTag::nmCell, h, std::move(v));
}

// condition over toy_explicit: one nm index with small explicit creatures
Condition simple_nm_condition(const ParamTable& t) {
  Condition p;
  p.horizon = t.horizon();
  p.support.push_back({"a", IndexType::nm, ""});
  p.nm_supports[0] = {"a"};
  p.halving[0] = ExtNum::exact(0L);
  p.creatures[CondKey{"a", Height::sub(0, BigNat(0))}] =
      cells_creature(Height::sub(0, BigNat(0)), {0, 1, 2, 3});
  p.creatures[CondKey{"a", Height::sub(0, BigNat(1))}] =
      cells_creature(Height::sub(0, BigNat(1)), {5, 9});
  p.creatures[CondKey{"a", Height::sub(0, BigNat(2))}] =
      cells_creature(Height::sub(0, BigNat(2)), {7});
  p.witnesses = recompute_witnesses(p, t);
  return p;
}

// random level-0 condition over toy_uniform (norms positive, powers of two)
Condition random_uniform_condition(std::mt19937_64& rng, const ParamTable& t,
                                   const std::string& id, bool full_strength) {
  Condition p;
  p.horizon = t.horizon();
  p.support.push_back({id, IndexType::nm, ""});
  p.nm_supports[0] = {id};
  p.halving[0] = ExtNum::exact(0L);
  unsigned cells = full_strength ? 27 : 12 + rng() % 16;
  for (unsigned i = 0; i < cells; ++i) {
    unsigned logsz = full_strength ? 11 : 7 + rng() % 5;  // |M| = 2^logsz
    std::vector<BigNat> atoms;
    for (unsigned long v = 0; v < (1ul << logsz); ++v) atoms.push_back(BigNat(v));
    Creature c;
    c.tag = CreatureTag::nmCell;
    c.height = Height::sub(0, BigNat(i));
    c.atoms = std::move(atoms);
    p.creatures[CondKey{id, c.height}] = std::move(c);
  }
  p.witnesses = recompute_witnesses(p, t);
  return p;
}

}  // namespace

TEST_CASE("validate accepts a simple condition and reports violations") {
  ParamTable t = toy_explicit_table();
  Condition p = simple_nm_condition(t);
  CHECK(validate(p, t).ok);
  Condition bad = p;
  bad.nm_supports[0] = {"a"};
  bad.nm_supports[1] = {};
  auto rep = validate(bad, t);
  CHECK(!rep.ok);  // Def 3.10 (i): supports non-decreasing
}

TEST_CASE("validate rejects foreign atoms") {
  ParamTable t = toy_explicit_table();
  Condition bad = simple_nm_condition(t);
  bad.creatures[CondKey{"a", Height::sub(0, BigNat(0))}].atoms = {BigNat(1) << 60};
  CHECK(!validate(bad, t).ok);  // atom exceeds 2^I
}

TEST_CASE("poss: count 1 below the trunk, products above") {
  ParamTable t = toy_explicit_table();
  Condition p = simple_nm_condition(t);
  PossResult at0 = poss(p, Height::sub(0, BigNat(0)), t);
  CHECK(at0.count == 1);
  CHECK(at0.list.size() == 1);
  PossResult at2 = poss(p, Height::sub(0, BigNat(2)), t);
  CHECK(at2.count == 8);  // 4 * 2
  CHECK(at2.list.size() == 8);
  PossResult at_l1 = poss(p, Height::lev(1), t);
  CHECK(at_l1.count == 8);  // 4 * 2 * 1
  CHECK(at_l1.count <= t.nP(Height::lev(1)));  // Lemma 4.9 shape
}

TEST_CASE("meet: singletons below the cut, stronger, distinct etas incompatible") {
  ParamTable t = toy_explicit_table();
  Condition p = simple_nm_condition(t);
  Height cut = Height::sub(0, BigNat(2));
  PossResult ps = poss(p, cut, t);
  REQUIRE(ps.list.size() == 8);
  for (const auto& eta : ps.list) {
    Condition q = meet(p, eta, cut, t);
    CHECK(is_stronger(q, p, t).stronger);
    for (const auto& [key, atom] : eta.atoms) {
      Creature c = q.creature_at(key.index, key.h);
      CHECK(c.atoms.size() == 1);
      CHECK(c.atoms.front() == atom);
    }
  }
  // distinct possibilities give incompatible meets
  Condition q0 = meet(p, ps.list[0], cut, t);
  Condition q1 = meet(p, ps.list[1], cut, t);
  bool differs = false;
  for (const auto& [key, atom] : ps.list[0].atoms)
    if (q0.creature_at(key.index, key.h).atoms !=
        q1.creature_at(key.index, key.h).atoms)
      differs = true;
  CHECK(differs);
  // eta picking a foreign atom is rejected
  Possibility bogus = ps.list[0];
  bogus.atoms.begin()->second = BigNat(1) << 50;
  CHECK_THROWS_AS(meet(p, bogus, cut, t), precondition_error);
}

TEST_CASE("is_stronger checklist clauses") {
  ParamTable t = toy_explicit_table();
  Condition p = simple_nm_condition(t);
  CHECK(is_stronger(p, p, t).stronger);  // reflexive
  Condition q = p;
  q.creatures[CondKey{"a", Height::sub(0, BigNat(0))}].atoms = {BigNat(2)};
  CHECK(is_stronger(q, p, t).stronger);
  CHECK(!is_stronger(p, q, t).stronger);
  Condition r = p;
  r.halving[0] = ExtNum::exact(Rat(1, 2));
  CHECK(is_stronger(r, p, t).stronger);
  auto rep = is_stronger(p, r, t);
  CHECK(!rep.stronger);
  CHECK(rep.first_failing.find("halving") != std::string::npos);
}

TEST_CASE("frame coarsening and ct closure") {
  ParamTable t = toy_uniform_table();
  Condition p;
  p.horizon = t.horizon();
  p.support.push_back({"c", IndexType::ct, ""});
  p.frame_starts = {0, 1};  // segments {3}, {7}
  Condition q = p;
  q.frame_starts = {0};  // coarser: one segment {3, 7}
  CHECK(is_stronger(q, p, t).stronger);
  auto rep = is_stronger(p, q, t);
  CHECK(!rep.stronger);
  CHECK(rep.first_failing.find("frame") != std::string::npos);
  REQUIRE(p.ct_closure(Height::lev(5)).has_value());
  CHECK(*p.ct_closure(Height::lev(5)) == Height::lev(7));
  CHECK(!q.ct_closure(Height::lev(5)).has_value());  // clipped by horizon
}

TEST_CASE("trim_poss: unique theta with q^eta <= p^theta") {
  ParamTable t = toy_explicit_table();
  Condition p = simple_nm_condition(t);
  Condition q = p;
  q.creatures[CondKey{"a", Height::sub(0, BigNat(0))}].atoms = {BigNat(1), BigNat(3)};
  q.creatures[CondKey{"a", Height::sub(0, BigNat(1))}].atoms = {BigNat(9)};
  REQUIRE(is_stronger(q, p, t).stronger);
  Height cut = Height::lev(1);
  for (const auto& eta : poss(q, cut, t).list) {
    Possibility theta = trim_poss(q, p, eta, cut, t);
    Condition qe = meet(q, eta, cut, t);
    unsigned matches = 0;
    for (const auto& theta2 : poss(p, cut, t).list) {
      Condition pt2 = meet(p, theta2, cut, t);
      if (is_stronger(qe, pt2, t).stronger) {
        ++matches;
        CHECK(theta2 == theta);
      }
    }
    CHECK(matches == 1);  // Lemma 4.17 uniqueness
  }
  for (const auto& eta : poss(p, cut, t).list)
    CHECK(trim_poss(p, p, eta, cut, t) == eta);
}

TEST_CASE("half: drop by exactly 1/n^P at level 0") {
  ParamTable t = toy_uniform_table(Height::lev(3));
  std::mt19937_64 rng(42);
  Condition q = random_uniform_condition(rng, t, "a", true);
  ExtNum before = nm_level_norm(q, 0, t);
  CHECK(ext_cmp(before, ExtNum::exact(1L)) == Ord::GT);
  Condition h = half(q, 0, t);
  ExtNum after = nm_level_norm(h, 0, t);
  CHECK(ext_ge(after, before - ExtNum::exact(1L)));
  CHECK(ext_ge(before - ExtNum::exact(1L), after));
  // halving strictly increases when min stack norm > d
  CHECK(ext_cmp(h.halving_at(0), q.halving_at(0)) == Ord::GT);
  // and again: half is not idempotent
  Condition hh = half(h, 0, t);
  CHECK(ext_cmp(hh.halving_at(0), h.halving_at(0)) == Ord::GT);
  // levels below 4h unchanged
  Condition h1 = half(q, 1, t);
  CHECK(ext_cmp(h1.halving_at(0), q.halving_at(0)) == Ord::EQ);
}

TEST_CASE("unhalve: clauses verified on randomized instances") {
  ParamTable t = toy_uniform_table(Height::lev(3));
  std::mt19937_64 rng(7);
  unsigned ran = 0;
  for (unsigned trial = 0; trial < 25 && ran < 12; ++trial) {
    Condition q = random_uniform_condition(rng, t, "a", true);
    Rat M(1, 2 + trial % 3);
    if (!ext_ge(nm_level_norm(q, 0, t), ExtNum::exact(M))) continue;
    Condition r = half(q, 0, t);
    for (unsigned i = 0; i < 4; ++i) {
      auto key = CondKey{"a", Height::sub(0, BigNat(rng() % 27))};
      auto it = r.creatures.find(key);
      if (it == r.creatures.end()) continue;
      if (it->second.atoms.size() >= 1024)
        it->second.atoms.resize(it->second.atoms.size() / 2);
    }
    r.witnesses = recompute_witnesses(r, t);
    try {
      if (ext_cmp(nm_level_norm(r, 0, t), ExtNum::exact(M)) != Ord::GT) continue;
    } catch (const undecidable_error&) {
      continue;
    }
    auto res = unhalve(q, r, 0, M, t);  // clauses (i)-(vi) asserted inside
    ++ran;
    CHECK(res.h_star >= 1);
    CHECK(ext_cmp(res.s.halving_at(0), q.halving_at(0)) == Ord::EQ);
  }
  CHECK(ran >= 8);
}

TEST_CASE("amalgamate: stronger than both, norms within 1 of the minimum") {
  ParamTable t = toy_uniform_table();
  std::mt19937_64 rng(11);
  for (unsigned trial = 0; trial < 8; ++trial) {
    Condition p = random_uniform_condition(rng, t, "a", false);
    Condition q = random_uniform_condition(rng, t, "b", false);
    p.nm_supports[1] = {"a"};
    q.nm_supports[1] = {"b"};
    for (unsigned i = 0; i < 3; ++i) {
      p.creatures[CondKey{"a", Height::sub(1, BigNat(i))}] =
          cells_creature(Height::sub(1, BigNat(i)), {0, 1, 2, 3});
      q.creatures[CondKey{"b", Height::sub(1, BigNat(i + 3))}] =
          cells_creature(Height::sub(1, BigNat(i + 3)), {1, 5});
    }
    p.halving[1] = ExtNum::exact(0L);
    q.halving[1] = ExtNum::exact(0L);
    p.witnesses = recompute_witnesses(p, t);
    q.witnesses = recompute_witnesses(q, t);
    Condition r = amalgamate(p, q, t);
    CHECK(is_stronger(r, p, t).stronger);
    CHECK(is_stronger(r, q, t).stronger);
    for (unsigned k = 0; k <= 1; ++k) {
      ExtNum nr = nm_level_norm(r, k, t);
      ExtNum np_k = nm_level_norm(p, k, t);
      ExtNum nq_k = nm_level_norm(q, k, t);
      ExtNum n = ext_ge(np_k, nq_k) ? nq_k : np_k;
      CHECK(ext_ge(nr, n - ExtNum::exact(1L)));
    }
  }
  Condition p = random_uniform_condition(rng, t, "x", false);
  Condition q2 = random_uniform_condition(rng, t, "x", false);
  CHECK_THROWS_AS(amalgamate(p, q2, t), precondition_error);
}

TEST_CASE("disjointify: Lemma 4.12 bound on random families") {
  std::mt19937_64 rng(3);
  for (unsigned trial = 0; trial < 50; ++trial) {
    unsigned k = 1 + trial % 2;
    unsigned l = 1 + rng() % k;
    std::vector<std::vector<BigNat>> family(l);
    for (auto& X : family) {
      unsigned sz = 1 + rng() % 12;
      std::set<unsigned> s;
      while (s.size() < sz) s.insert(rng() % 12);
      for (auto v : s) X.push_back(BigNat(v));
    }
    auto out = disjointify(family, k);  // postconditions asserted inside
    REQUIRE(out.size() == family.size());
    std::set<std::string> seen;
    for (const auto& X : out)
      for (const auto& v : X) {
        CHECK(!seen.count(v.get_str()));
        seen.insert(v.get_str());
      }
  }
  std::vector<std::vector<BigNat>> one = {{BigNat(1), BigNat(2)}};
  CHECK(disjointify(one, 3)[0] == one[0]);  // l = 1: unchanged
  CHECK_THROWS_AS(disjointify(std::vector<std::vector<BigNat>>(5, {BigNat(0)}), 3),
                  precondition_error);
}

TEST_CASE("build_full: single nm index, valid and modest, zero halving") {
  ParamTable t = toy_explicit_table();
  Condition p = build_full({{"a", IndexType::nm, ""}}, t);
  CHECK(validate(p, t).ok);
  CHECK(check_modest(p, t).ok);
  unsigned nontrivial = 0;
  for (const auto& [key, c] : p.creatures)
    if (c.atoms.size() > 1) ++nontrivial;
  CHECK(nontrivial == 1);  // X_alpha at level 0 has size 3^0 = 1
  CHECK(ext_cmp(p.halving_at(0), ExtNum::exact(0L)) == Ord::EQ);
  // the one non-trivial creature carries the full base set
  ExtNum stack = nm_stack_norm(p, "a", 0, t);
  CHECK(ext_ge(stack, ExtNum::exact(0L)));
}

TEST_CASE("build_full: ct index gets the trivial frame") {
  ParamTable t = toy_uniform_table();
  Condition p = build_full({{"c", IndexType::ct, ""}}, t);
  CHECK(p.frame_starts.size() == p.max_level_k() + 1);
  CHECK(validate(p, t).ok);
}

TEST_CASE("restrict: projection keeps or drops typegroup data") {
  ParamTable t = toy_explicit_table();
  Condition p = simple_nm_condition(t);
  p.support.push_back({"s", IndexType::slalom, "01"});
  p.creatures[CondKey{"s", Height::lev(2)}] =
      make_creature(CreatureTag::slalom, Height::lev(2), {BigNat(0), BigNat(5)});
  p.witnesses = recompute_witnesses(p, t);
  Condition full = restrict_condition(p, {"a", "s"}, t);
  CHECK(full.support.size() == 2);
  Condition nm_only = restrict_condition(p, {"a"}, t);
  CHECK(nm_only.support.size() == 1);
  CHECK(nm_only.nm_supports.at(0).count("a") == 1);
  CHECK(nm_only.creatures.size() == 3);
  Condition two_nm = p;
  two_nm.support.push_back({"a2", IndexType::nm, ""});
  CHECK_THROWS_AS(restrict_condition(two_nm, {"a2", "s"}, t), precondition_error);
}

TEST_CASE("xi_prepare: below-divergence slalom creatures become singletons") {
  ParamTable t = toy_uniform_table();
  Condition p;
  p.horizon = t.horizon();
  p.support.push_back({"x", IndexType::slalom, "00"});
  p.support.push_back({"z", IndexType::slalom, "01"});
  p.frame_starts = {0, 1};
  for (unsigned k = 0; k <= 1; ++k) {
    Height h = Height::lev(4 * k + 2);
    p.creatures[CondKey{"x", h}] =
        make_creature(CreatureTag::slalom, h, {BigNat(0), BigNat(1)});
    p.creatures[CondKey{"z", h}] =
        make_creature(CreatureTag::slalom, h, {BigNat(2), BigNat(3)});
  }
  p.witnesses = recompute_witnesses(p, t);
  // branches "00", "01" diverge at the second bit: k_zeta = 2, so both
  // slalom levels (k = 0, 1) lie below the threshold for z
  Condition q = xi_prepare(p, "x", t);
  CHECK(q.creature_at("z", Height::lev(2)).atoms.size() == 1);
  CHECK(q.creature_at("z", Height::lev(6)).atoms.size() == 1);
  CHECK(q.creature_at("x", Height::lev(2)).atoms.size() == 2);
  Condition q2 = xi_prepare(q, "x", t);
  CHECK(q2.creatures == q.creatures);
  // Def 10.16's three-case check on the output
  auto rep = levels_report(q, t);
  for (const auto& [k, who] : rep.slalom_splitting) {
    if (who.first == "x") continue;
    CHECK(k >= divergence_level("00", who.second));
  }
}

TEST_CASE("make_modest: one non-trivial index per height, idempotent") {
  ParamTable t = toy_uniform_table();
  Condition p;
  p.horizon = t.horizon();
  p.support.push_back({"s1", IndexType::slalom, "0"});
  p.support.push_back({"s2", IndexType::slalom, "1"});
  p.frame_starts = {0, 1};
  Height h2 = Height::lev(2);
  Height h6 = Height::lev(6);
  p.creatures[CondKey{"s1", h2}] =
      make_creature(CreatureTag::slalom, h2, {BigNat(0), BigNat(1)});
  p.creatures[CondKey{"s2", h2}] =
      make_creature(CreatureTag::slalom, h2, {BigNat(4), BigNat(7)});
  p.creatures[CondKey{"s2", h6}] =
      make_creature(CreatureTag::slalom, h6, {BigNat(3), BigNat(8)});
  p.witnesses = recompute_witnesses(p, t);
  CHECK(!check_modest(p, t).ok);
  Condition q = make_modest(p, t);
  CHECK(check_modest(q, t).ok);
  CHECK(is_stronger(q, p, t).stronger);
  CHECK(q.support.size() == p.support.size());
  Condition q2 = make_modest(q, t);
  CHECK(q2.creatures == q.creatures);
}

TEST_CASE("levels_report: entries, relevant heights, agreeable levels") {
  ParamTable t = toy_uniform_table();
  Condition p;
  p.horizon = t.horizon();
  p.support.push_back({"a", IndexType::nm, ""});
  p.support.push_back({"s", IndexType::slalom, "0"});
  p.nm_supports[0] = {"a"};
  p.frame_starts = {0, 1};
  p.creatures[CondKey{"a", Height::sub(0, BigNat(2))}] =
      cells_creature(Height::sub(0, BigNat(2)), {0, 1});
  p.creatures[CondKey{"s", Height::lev(6)}] =
      make_creature(CreatureTag::slalom, Height::lev(6), {BigNat(0), BigNat(2)});
  p.witnesses = recompute_witnesses(p, t);
  auto rep = levels_report(p, t);
  REQUIRE(rep.entry.at("a").has_value());
  CHECK(*rep.entry.at("a") == Height::sub(0, BigNat(2)));
  CHECK(rep.agreeable_ks == std::vector<unsigned>{0, 1});
  CHECK(rep.slalom_splitting.at(1).first == "s");
  bool has_62 = false;
  for (const auto& h : rep.relevant) has_62 |= h == Height::lev(6);
  CHECK(has_62);
}

TEST_CASE("condition json round trip") {
  ParamTable t = toy_explicit_table();
  Condition p = simple_nm_condition(t);
  p.halving[0] = ExtNum::exact(Rat(1, 3));
  Condition q = condition_from_json(condition_to_json(p));
  CHECK(q.creatures == p.creatures);
  CHECK(q.frame_starts == p.frame_starts);
  CHECK(is_stronger(q, p, t).stronger);
  CHECK(is_stronger(p, q, t).stronger);
}
