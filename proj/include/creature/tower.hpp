#pragma once

#include <optional>
#include <string>

#include "creature/extnum.hpp"

namespace creature {

// Depth-3 tower base^(mid^top), or a flat bignum for small values. This is
// exactly the shape of the congenial pair formulas f(k) = B^(e^(3^(2i))).
struct TowerNum {
  std::optional<BigNat> flat;
  BigNat base{2}, mid{1}, top{0};  // denotes base^(mid^top) when !flat

  static TowerNum flat_value(BigNat v);
  static TowerNum tower(BigNat base, BigNat mid, BigNat top);

  bool is_flat() const { return flat.has_value(); }

  // Exact log2 as an ExtNum: (mid^top) * log2(base). Requires the exponent
  // mid^top to be materializable.
  ExtNum log2() const;

  std::string to_json() const;
  static TowerNum from_json(const std::string& j);
};

// Exact total ordering of the denoted integers. Same-base towers compare via
// their exponents; mixed bases fall back to exact log-bound sandwiching with
// escalating precision (expanding outright whenever the values fit in 2^20
// bits).
Ord tower_cmp(const TowerNum& a, const TowerNum& b);

// Exact comparison of c1*a^2 (+bump1) vs c2*b (as integers), where a, b are
// towers with a common base; used for the congenial separation property
// f^2 < g and f^2 * n^B < g. bump adds 1 to the exponent of the left side's
// base (i.e. multiplies by base) when true.
Ord tower_sq_cmp(const TowerNum& f, const TowerNum& g, bool times_base);

}  // namespace creature
