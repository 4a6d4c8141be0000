#pragma once

#include <vector>

#include "creature/params.hpp"
#include "creature/tower.hpp"

namespace creature {

// One function pair (f_xi, g_xi) of a congenial family, generated from a
// finite binary branch prefix (shorter prefixes are completed with zeros).
struct CongenialPair {
  std::string branch;
  unsigned horizon = 0;  // values present for k = 0..horizon
  std::vector<std::pair<TowerNum, TowerNum>> values;
};

// branch bit at position j, completing with zeros
bool branch_bit(const std::string& branch, unsigned j);

// 1-based lexicographic rank of branch|k among 2^k.
BigNat branch_rank(const std::string& branch, unsigned k);

// f(k) = B^(e_k^(3^(2i))), g(k) = B^(e_k^(3^(2i-1))) with e_k = n^B_{4k+2}+1.
std::pair<TowerNum, TowerNum> gen_pair(const std::string& branch, unsigned k,
                                       const ParamTable& table);

CongenialPair gen_member(const std::string& branch, unsigned horizon,
                         const ParamTable& table);

// log2 g_xi(k) for slalom norms.
ExtNum log2_g(const std::string& branch, unsigned k, const ParamTable& table);

struct FamilyReport {
  bool ok = true;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
  void fail(std::string v) {
    ok = false;
    violations.push_back(std::move(v));
  }
};

// Def 3.2 (i) and (iii) exactly (by tower comparison); (ii) as the finite-
// horizon proxy log2 f / (log2 g)^2 >= e_k^3 / log2 n^B, nondecreasing in k.
FamilyReport validate_family(const std::vector<CongenialPair>& pairs,
                             unsigned horizon, const ParamTable& table);

// First k at which the zero-completed branches diverge.
unsigned divergence_level(const std::string& a, const std::string& b);

std::string family_to_json(const std::vector<CongenialPair>& pairs);
std::vector<CongenialPair> family_from_json(const std::string& text);

}  // namespace creature
