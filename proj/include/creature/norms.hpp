#pragma once

#include <cstdint>
#include <vector>

#include "creature/params.hpp"

namespace creature {

enum class CreatureTag { slalom, nn, cn, ct, nmCell };

std::string to_string(CreatureTag t);

// A creature is a nonempty subset of a finite possibility space, stored as a
// sorted list of atom codes:
//   slalom  - integers below f_xi(k)
//   nn/cn   - subsets of 2^I encoded as bitmasks over the 2^|I| strings
//   ct, nm  - strings in 2^I encoded as integers below 2^|I|
struct Creature {
  CreatureTag tag;
  Height height;
  std::vector<BigNat> atoms;

  std::size_t size() const { return atoms.size(); }
  bool is_singleton() const { return atoms.size() == 1; }
  bool contains(const BigNat& a) const;
  void normalize();  // sort + dedupe; domain_error when empty
  bool operator==(const Creature& o) const {
    return tag == o.tag && height == o.height && atoms == o.atoms;
  }
};

Creature make_creature(CreatureTag tag, Height h, std::vector<BigNat> atoms);

// Extra inputs some norms need beyond the table.
struct NormContext {
  std::optional<ExtNum> log2_g;  // slalom: log2 g_xi(k) of the pair in play
  SacksScale scale;              // ct
};

// Def 3.3(iii) / 3.5(iv) / 3.10(v); nn delegates to nn_norm.
ExtNum pointwise_norm(const Creature& c, const ParamTable& table,
                      const NormContext& ctx = {});

// The cn norm's binomial (and Lemma 11.4's Delta_L): one deliberately
// isolated reading of the ambiguous typography.
BigNat cn_delta(const BigNat& interval_len, const BigNat& nB);

// Minimum hitting set: minimal |Y|, Y subseteq 2^I, meeting every X in M.
// Members of M are bitmasks over a universe of `universe_bits` cells
// (resource_error beyond 64 cells - exact search only, no approximation).
unsigned intersect_norm(const std::vector<std::uint64_t>& M, unsigned universe_size);

// intersect_norm of a creature's atoms (nn/cn tags).
unsigned intersect_norm(const Creature& c, const ParamTable& table);

ExtNum nn_norm(const Creature& c, const ParamTable& table);

// Def 3.7: the maximal k with 2^{<=k} order-embeddable into T_X.
// X as integer-coded strings of `len` bits.
unsigned split_norm(const std::vector<std::uint64_t>& X, unsigned len);
unsigned split_norm(const Creature& c, const ParamTable& table);

// nor_Sacks^{B,m}(X) = max({i | F_m^B(i) <= split(X)} u {0})
unsigned nor_sacks(unsigned split, const BigNat& B, unsigned m, const SacksScale& scale);

// Def 3.8(viii): max over the segment of nor_Sacks of each creature.
unsigned sacks_segment_norm(const std::vector<Creature>& segment,
                            const ParamTable& table, const SacksScale& scale,
                            unsigned segment_level_k);

// ---------------------------------------------------------------------------
// lim inf stacks (Def 3.10)
// ---------------------------------------------------------------------------

// Sparse stacked creature: cells listed explicitly at their sublevel index,
// every unlisted cell defaults to a singleton (norm 0) or, for the symbolic
// maximal stacks of uniform blocks, to the full base set with the declared
// cell norm.
struct StackedCreature {
  unsigned k = 0;  // lives at level 4k
  std::vector<std::pair<BigNat, Creature>> cells;  // sorted by sublevel index
  enum class Default { singleton, full } default_cell = Default::singleton;
  std::optional<ExtNum> default_full_norm;  // required when default == full
  std::optional<BigNat> J;                  // sublevel count
  std::optional<BigNat> J_pow3;             // or J = 3^this

  BigNat explicit_count() const { return BigNat(static_cast<unsigned long>(cells.size())); }
};

// mu_{4k}(X) = log3 |X| / (4k+1)
ExtNum mu_4k(const BigNat& count, unsigned k);
ExtNum mu_4k_pow3(const BigNat& exponent, unsigned k);  // |X| = 3^exponent

// Def 3.10(x) via the sorted-prefix algorithm (equals brute force; tested).
ExtNum stack_norm(const StackedCreature& s, unsigned k, const ParamTable& table);

// Def 3.10(xi); d is the halving parameter. Empty support yields 0.
ExtNum compound_norm(const std::vector<StackedCreature>& stacks, const ExtNum& d,
                     unsigned k, const ParamTable& table);

// Cell norm from a raw size (log2 |M| / (n^B log2 n^B)).
ExtNum cell_norm_of_size(const BigNat& size, const BigNat& nB);

}  // namespace creature
