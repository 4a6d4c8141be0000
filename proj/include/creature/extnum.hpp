#pragma once

#include <memory>
#include <optional>
#include <string>

#include "creature/bigmath.hpp"

namespace creature {

enum class Ord { LT, EQ, GT };

// A certified enclosure [lo, hi] of a real number, endpoints dyadic.
struct Interval {
  Rat lo, hi;
};

// Norm values are never floats: an ExtNum is an exact rational whenever the
// defining expression collapses to one (log2 of a power of two, etc.), and
// otherwise keeps its expression tree so enclosures can be re-evaluated at
// escalating precision. Values are immutable and cheap to copy.
class ExtNum {
 public:
  ExtNum();  // 0
  static ExtNum exact(const Rat& q);
  static ExtNum exact(long v);
  static ExtNum log2(const BigNat& n);   // n >= 1
  static ExtNum log3(const BigNat& n);   // n >= 1
  static ExtNum log2_rat(const Rat& q);  // q > 0
  // log2 C(n, k); exact when C(n,k) materializes to a power of two.
  static ExtNum log2_binom(const BigNat& n, const BigNat& k,
                           unsigned precision);
  // log2 of a positive ExtNum; exact when the argument is an exact rational
  // with power-of-two numerator and denominator.
  static ExtNum log2_of(const ExtNum& x);

  ExtNum operator+(const ExtNum& o) const;
  ExtNum operator-(const ExtNum& o) const;
  ExtNum operator*(const ExtNum& o) const;
  ExtNum operator/(const ExtNum& o) const;
  ExtNum max0() const;  // max(value, 0)

  bool is_exact() const { return exact_.has_value(); }
  const Rat& exact_value() const;  // requires is_exact()

  // Certified enclosure at the given working precision (bits).
  Interval enclosure(unsigned precision) const;

  // Human-readable value with provenance ("3/2" or "~0.7925 [lo,hi]").
  std::string describe(unsigned precision = 128) const;

  struct Expr;  // opaque node

 private:
  std::optional<Rat> exact_;
  std::shared_ptr<const Expr> expr_;
};

constexpr unsigned kDefaultMaxPrecision = 1u << 14;

// Exact ordering if decidable at some precision <= max_precision.
// Exact-vs-exact compares exactly; equal exact values give EQ; otherwise an
// undecidable comparison throws (never a silent tie).
Ord ext_cmp(const ExtNum& a, const ExtNum& b,
            unsigned max_precision = kDefaultMaxPrecision);

// a >= b, allowing EQ; convenience over ext_cmp.
bool ext_ge(const ExtNum& a, const ExtNum& b,
            unsigned max_precision = kDefaultMaxPrecision);
bool ext_le(const ExtNum& a, const ExtNum& b,
            unsigned max_precision = kDefaultMaxPrecision);

// log2 C(n,k) as an interval provably containing the value, width at most
// 2^(1-precision) * max(1, log2 C(n,k)); exact rational when it can be.
ExtNum log2_binom(const BigNat& n, const BigNat& k, unsigned precision);

std::string extnum_to_json(const ExtNum& v, unsigned precision = 128);

}  // namespace creature
