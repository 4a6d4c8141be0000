#pragma once

#include <compare>
#include <string>

#include "creature/bigmath.hpp"

namespace creature {

enum class TypeGroup { nm, star_n, slalom, ct };

std::string to_string(TypeGroup tg);

// A height is either the sublevel (4k, i) of the lim inf factor or a level
// 4k+1 / 4k+2 / 4k+3 of the lim sup factors, ordered
//   ... < 4k-1 < (4k,0) < ... < (4k, J_4k - 1) < 4k+1 < 4k+2 < 4k+3 < (4k+4,0) < ...
struct Height {
  enum class Kind { Sub, Lev };
  Kind kind;
  unsigned k = 0;  // Sub: index of level 4k. Lev: unused.
  unsigned n = 0;  // Lev: the level number, n mod 4 in {1,2,3}.
  BigNat i;        // Sub: sublevel index, may be large.

  static Height sub(unsigned k, BigNat i);
  static Height lev(unsigned n);

  unsigned level() const { return kind == Kind::Sub ? 4 * k : n; }
  TypeGroup typegroup() const;

  bool operator==(const Height& o) const;
  bool operator<(const Height& o) const;
  bool operator<=(const Height& o) const { return *this == o || *this < o; }
};

// "(4k,i)" for sublevels, decimal level number otherwise.
std::string to_string(const Height& h);
Height height_from_string(const std::string& s);

struct Regime;      // params.hpp
class ParamTable;   // params.hpp

enum class StepDir { succ, pred };

// Immediate neighbor in the Def-3.1 order; J_4k comes from the regime.
Height step(const Height& h, StepDir dir, const Regime& regime);

struct LevelLayout {
  Height h;
  TypeGroup tg;
  // Interval I_L as [lo, lo+len), absent for slalom heights and for heights
  // whose layout is only known in magnitude.
  std::optional<std::pair<BigNat, BigNat>> interval;  // (lo, len)
  std::optional<BigNat> sublevel_count;               // J_4k if materializable
  std::optional<BigNat> sublevel_count_pow3;          // else J_4k = 3^this
};

LevelLayout layout(const Height& h, const ParamTable& table);

}  // namespace creature
