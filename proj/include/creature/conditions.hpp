#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "creature/congenial.hpp"
#include "creature/norms.hpp"

namespace creature {

enum class IndexType { nm, nn, cn, ct, slalom };

TypeGroup typegroup_of(IndexType t);
CreatureTag tag_of(IndexType t);
std::string to_string(IndexType t);
IndexType index_type_from_string(const std::string& s);

struct IndexDecl {
  std::string id;
  IndexType type;
  std::string branch;  // slalom only: the congenial pair's branch prefix
};

struct CondKey {
  std::string index;
  Height h;
  bool operator<(const CondKey& o) const;
  bool operator==(const CondKey& o) const;
};

struct WitnessSchedule {
  // lim sup: per index, targets (i, height where the norm is >= i)
  std::map<std::string, std::vector<std::pair<unsigned, Height>>> limsup;
  // lim inf: targets (i, k_i): compound norm >= i for all 4l >= 4k_i in horizon
  std::vector<std::pair<unsigned, unsigned>> liminf;
  Rat width_bound{0};   // |S_4k|/(4k+1) decreases toward this by the horizon
  Rat halving_eps{1, 2};  // the epsilon of Def 3.10's halving bound
};

// A finite-truncation condition of the product forcing. Creatures are sparse:
// an absent (index, height) entry is the singleton {0}. The trunk length is
// derived (first level with a non-trivial nm creature), not stored.
struct Condition {
  Height horizon = Height::lev(1);
  std::vector<IndexDecl> support;
  std::map<CondKey, Creature> creatures;
  std::vector<unsigned> frame_starts{0};  // k's such that 4k+3 starts a segment
  std::map<unsigned, ExtNum> halving;     // d(4k), default 0
  std::map<unsigned, std::set<std::string>> nm_supports;  // S_4k
  WitnessSchedule witnesses;

  const IndexDecl* find_index(const std::string& id) const;
  Creature creature_at(const std::string& id, const Height& h) const;
  bool has_materialized(const std::string& id, const Height& h) const;
  bool nontrivial_at(const std::string& id, const Height& h) const;
  ExtNum halving_at(unsigned k) const;

  // trklgth(p)/4: first k with a non-trivial nm creature (UINT_MAX if none)
  unsigned trunk_k() const;

  unsigned max_level_k() const;  // largest k with 4k <= horizon's level
  bool is_segment_start(unsigned k) const;
  unsigned segment_start_of(unsigned k) const;
  unsigned segment_end_of(unsigned k) const;  // clipped at the horizon
  // L* = min segment-start ct height >= h (Def 4.7); nullopt beyond horizon
  std::optional<Height> ct_closure(const Height& h) const;
};

struct Possibility {
  std::map<CondKey, BigNat> atoms;
  bool operator==(const Possibility& o) const { return atoms == o.atoms; }
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
  void fail(std::string v) {
    ok = false;
    violations.push_back(std::move(v));
  }
};

// All TYPE invariants plus the halving bound d(4k) < 2^(4k n^P) (1 - eps).
ValidationReport validate(const Condition& p, const ParamTable& table);

// Def 4.3 modesty; reasons name the violated clause.
ValidationReport check_modest(const Condition& p, const ParamTable& table);

// Lemma 4.4: a modest q <= p with the same support; idempotent on modest p.
Condition make_modest(const Condition& p, const ParamTable& table);

struct LevelsReport {
  // first non-trivial height per index (the tg-specific support entry point)
  std::map<std::string, std::optional<Height>> entry;
  std::vector<Height> relevant;         // Def 4.5
  std::vector<unsigned> agreeable_ks;   // Def 7.1: 4k, 4k+1, 4k+2 agreeable
  // Def 10.15: slalom-splitting levels k -> (alpha_k, zeta branch)
  std::map<unsigned, std::pair<std::string, std::string>> slalom_splitting;
};
LevelsReport levels_report(const Condition& p, const ParamTable& table);

struct PossResult {
  BigNat count;
  std::vector<Possibility> list;
};
BigNat poss_count(const Condition& p, const Height& L, const ParamTable& table);
PossResult poss(const Condition& p, const Height& L, const ParamTable& table,
                std::size_t cap = 1u << 18);

// Def 4.7: p wedge eta.
Condition meet(const Condition& p, const Possibility& eta, const Height& L,
               const ParamTable& table);

struct StrongerReport {
  bool stronger = true;
  std::string first_failing;
};
StrongerReport is_stronger(const Condition& q, const Condition& p,
                           const ParamTable& table);

// Lemma 4.17: the unique theta in poss(p, <L) with q^eta <= p^theta.
Possibility trim_poss(const Condition& q, const Condition& p, const Possibility& eta,
                      const Height& L, const ParamTable& table);

// Lemma 4.11 (finite truncation): a valid modest condition with supp = B.
Condition build_full(const std::vector<IndexDecl>& B, const ParamTable& table);

// Lemma 4.19's projection p|B.
Condition restrict_condition(const Condition& p, const std::set<std::string>& B,
                             const ParamTable& table);

// Lemma 4.12: pairwise disjoint X_i* <= X_i with mu(X_i*) >= mu(X_i) - 1,
// i.e. |X_i*| >= ceil(|X_i| / 3^(4k+1)). Members are sublevel indices.
std::vector<std::vector<BigNat>> disjointify(
    const std::vector<std::vector<BigNat>>& family, unsigned k, std::size_t cap = 1u << 20);

// Lemma 4.13.
Condition amalgamate(const Condition& p, const Condition& q, const ParamTable& table);

// Def 7.2: half(q, >= 4h).
Condition half(const Condition& q, unsigned h, const ParamTable& table);

// Lemma 7.3.
struct UnhalveResult {
  Condition s;
  unsigned h_star;
};
UnhalveResult unhalve(const Condition& q, const Condition& r, unsigned h,
                      const Rat& M, const ParamTable& table);

// Def 10.16 / Lemma 10.17.
Condition xi_prepare(const Condition& p, const std::string& xi_id,
                     const ParamTable& table);

// ---- norm helpers on conditions ----

// Compound creature norm of p at level 4k (Def 3.10 (xi)).
ExtNum nm_level_norm(const Condition& p, unsigned k, const ParamTable& table);
// Stack norm of one index's stacked creature at level 4k.
ExtNum nm_stack_norm(const Condition& p, const std::string& id, unsigned k,
                     const ParamTable& table);
// Norm of a lim sup creature / creature segment at its height.
ExtNum limsup_norm(const Condition& p, const std::string& id, const Height& h,
                   const ParamTable& table);

// Recompute a faithful witness schedule from the actual norms.
WitnessSchedule recompute_witnesses(const Condition& p, const ParamTable& table);

}  // namespace creature
