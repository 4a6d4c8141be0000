#pragma once

#include <cstdint>
#include <vector>

#include "creature/norms.hpp"

namespace creature {

// A downward-closed subtree of 2^{<=m}, stored by its depth-m leaves. The
// finite surrogate of leaflessness is "every node extends to depth m".
struct FiniteTree {
  unsigned depth = 0;
  std::vector<std::uint32_t> leaves;  // sorted, strings of length `depth`
  // nodes below depth m with no extension (violations of the leafless
  // surrogate, representable so sturdy_check can report them)
  std::vector<std::pair<std::uint32_t, unsigned>> dead_ends;

  static FiniteTree from_leaves(unsigned depth, std::vector<std::uint32_t> leaves);
  static FiniteTree full(unsigned depth);

  bool has_node(std::uint32_t s, unsigned len) const;
  // number of depth-m leaves extending the length-len node s
  std::size_t leaves_below(std::uint32_t s, unsigned len) const;
  // all nodes at a given tree level
  std::vector<std::uint32_t> level_nodes(unsigned len) const;
  Rat measure() const;  // |T cap 2^m| / 2^m
};

// Fact 11.5 (iii): 2^k * lambda([T] cap [s]) for s in T of length k.
Rat rel_measure(const FiniteTree& T, std::uint32_t s, unsigned len);

struct SturdyReport {
  bool sturdy = false;
  std::vector<std::string> violations;
};
// Def 11.6 at finite depth: measure exactly 1/2 and no node of relative
// measure 0 (equivalently, every node has a depth-m extension).
SturdyReport sturdy_check(const FiniteTree& T);

// Fact 11.5 (i) at depth m: { s xor r : s leaf, r in 2^{<=m} zero-padded }.
std::vector<std::uint32_t> translate_closure(const FiniteTree& T);

// Lemma 11.1: X' = members of M avoiding E, with the intersect-norm drop
// bound |E| asserted, and the nn-norm drop <= 1/log2 n^B asserted when
// |E| <= n^P_{<L}.
struct PruneResult {
  std::vector<std::uint64_t> kept;
  unsigned intersect_before = 0, intersect_after = 0;
  bool empty_result = false;
};
PruneResult prune_avoid(const std::vector<std::uint64_t>& M, std::uint64_t E,
                        unsigned universe, const BigNat& nP, const BigNat& nB);

// Lemma 11.4 (i): D = {X in C : T not a subset of X}, with (*_8) asserted:
// |C \ D| <= Delta_L, and the norm drop <= 1/(2^min I * n^B).
Creature avoid_tree(const Creature& C, std::uint64_t T_mask, const ParamTable& table);

// Lemma 11.4 (ii) / Lemma 12.1: D <= C with measure(cap_{X in D} F(X))
// >= 1/n^B_{L+} and norm drop <= 1/(2^min I * n^B). Omega is a finite
// uniform probability space of `omega_size` points; F maps atom index ->
// subset mask of Omega.
Creature shrink_measure(const Creature& C,
                        const std::vector<std::vector<std::uint64_t>>& F,
                        unsigned omega_size, const ParamTable& table);

// Lemma 12.2: fat nodes at depth k and the threshold k*.
struct FatResult {
  std::vector<std::uint32_t> fat;  // fat nodes of T cap 2^k
  unsigned k_star = 0;
};
FatResult fat_nodes(const FiniteTree& T, const Rat& eps, unsigned k);

// Serial reference for the OpenMP-parallel fat-node sweep in fat_nodes.
std::vector<std::uint32_t> fat_nodes_at_serial(const FiniteTree& T, const Rat& eps,
                                               unsigned k);

std::string tree_to_json(const FiniteTree& T);
FiniteTree tree_from_json(const std::string& text);

}  // namespace creature
