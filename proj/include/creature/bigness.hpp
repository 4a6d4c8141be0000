#pragma once

#include <cstdint>
#include <functional>

#include "creature/norms.hpp"

namespace creature {

// Def 5.1 / 5.4 variants.
struct BignessSpec {
  enum class Kind { cBig, cdBig, strong, eStrong, eStrongCD } kind;
  unsigned c = 1, d = 1, e = 1;

  static BignessSpec c_big(unsigned c) { return {Kind::cBig, c, 1, 1}; }
  static BignessSpec cd_big(unsigned c, unsigned d) { return {Kind::cdBig, c, d, 1}; }
  static BignessSpec strong(unsigned c) { return {Kind::strong, c, 1, c}; }
  static BignessSpec e_strong(unsigned e, unsigned c) {
    return {Kind::eStrong, c, 1, e};
  }
  static BignessSpec e_strong_cd(unsigned e, unsigned c, unsigned d) {
    return {Kind::eStrongCD, c, d, e};
  }
  // The norm-drop tolerance of the spec: 1, 1/c or 1/e.
  Rat drop() const;
  std::string name() const;
};

// A norm on the subsets of a fixed creature's atom list, with an exact
// integer-arithmetic predicate for the drop comparisons (never floats).
struct SetNorm {
  std::string name;
  // norm(Y) >= norm(X) - drop, decided exactly
  std::function<bool(std::uint64_t Y, std::uint64_t X, const Rat& drop)> ge_drop;
  // the value itself, for reports and --explain
  std::function<ExtNum(std::uint64_t mask)> value;
};

// Fact 5.2's exemplary norms.
SetNorm norm_log2();                       // log2 |.|
SetNorm norm_logc_div_c(unsigned c);       // log_c |.| / c (strongly c-big)
SetNorm norm_card();                       // |.| (fails bigness; counterexamples)
// Obs 5.5: the same norm divided by e.
SetNorm norm_scaled(SetNorm base, unsigned e);
// Table norms over a concrete creature's atoms.
SetNorm norm_cell(const BigNat& nB);
SetNorm norm_slalom(const BigNat& nP, const BigNat& g);
SetNorm norm_nn(const Creature& c, const ParamTable& table);
SetNorm norm_cn(const Creature& c, const ParamTable& table);

struct BignessResult {
  bool holds = true;
  std::uint64_t counter_X = 0;              // minimal failing subset (mask)
  std::vector<std::uint8_t> coloring;        // colors of X's atoms in mask order
};

// Exhaustive Def 5.1 check over all nonempty X and all colorings up to
// color permutation (restricted-growth enumeration). n = |C| <= cap.
// The OpenMP path fans out over the subsets X; the serial twin is the
// reference implementation.
BignessResult check_bigness(unsigned n, const SetNorm& norm, const BignessSpec& spec,
                            unsigned cap = 16);
BignessResult check_bigness_serial(unsigned n, const SetNorm& norm,
                                   const BignessSpec& spec, unsigned cap = 16);

// Lemma 5.3's constructive witness: indices (0-based) of d parts whose union
// keeps the norm within 1 of the whole, built by the proof's regrouping.
std::vector<unsigned> cd_witness_from_b(const std::vector<std::uint64_t>& partition,
                                        const SetNorm& norm, unsigned b, unsigned d);

// Cor 5.7: the best color class; asserts the norm drop when `drop` given.
Creature homogenize_creature(const Creature& C,
                             const std::vector<unsigned>& coloring,
                             const SetNorm& norm, const Rat* assert_drop = nullptr);

// Lemma 5.8: shrink each C_L so F is constant on the product; norms drop by
// at most 1/n^B_L each. F maps the tuple of chosen atom INDICES (into each
// creature's atom list, in `heights` order) to a color < n^B_K.
std::map<Height, Creature> homogenize_product(
    const std::vector<Height>& H, const std::map<Height, Creature>& creatures,
    const std::function<unsigned(const std::vector<std::size_t>&)>& F,
    const ParamTable& table);

}  // namespace creature
