#pragma once

#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "creature/extnum.hpp"
#include "creature/heights.hpp"

namespace creature {

// ---------------------------------------------------------------------------
// Mag: a quantity that is an exact bignum while it fits the materialization
// cap and a certified iterated-exponential magnitude beyond it. A non-exact
// Mag denotes a value in exp2^depth([top_lo, top_hi]) (depth = 0 means the
// interval itself). Bounds are always outward.
// ---------------------------------------------------------------------------
struct Mag {
  std::optional<BigNat> exact;
  int depth = 0;
  double top_lo = 0.0, top_hi = 0.0;

  static Mag from_big(BigNat v, std::size_t bit_cap);
  static Mag one() { return from_big(BigNat(1), 64); }
  bool is_exact() const { return exact.has_value(); }
  std::string describe() const;
};

Mag mag_mul(const Mag& a, const Mag& b, std::size_t bit_cap);
Mag mag_add(const Mag& a, const Mag& b, std::size_t bit_cap);
Mag mag_add_one(const Mag& a, std::size_t bit_cap);
Mag mag_pow(const Mag& base, const Mag& exp, std::size_t bit_cap);
Mag mag_pow2(const Mag& exp, std::size_t bit_cap);  // 2^exp
// value^ [slo, shi] multiplicative scalar on the log (for binomial bounds):
// returns an enclosure of x with log2(x) in [log2(a)*slo, log2(a)*shi].
Mag mag_log2(const Mag& a);  // enclosure of log2(a)
std::optional<Ord> mag_cmp(const Mag& a, const Mag& b);

// ---------------------------------------------------------------------------
// Regimes and the parameter table (Def 4.8)
// ---------------------------------------------------------------------------
enum class ValidationLevel { strict, lax };

struct ToyHeightDecl {
  Height h;
  std::optional<BigNat> nP, nR, nB, nS;  // absent = derive canonically
  std::optional<BigNat> interval_len;    // nm/*n/ct heights
};

struct ToyNmLevel {
  unsigned k = 0;
  std::optional<BigNat> J;        // explicit sublevel count
  std::optional<BigNat> J_pow3;   // or J = 3^this
  bool uniform = false;           // one declared sublevel (4k,0) stands for all
};

// Pluggable Sacks scale F_m^B(i); the default is F(i) = B^(i+1), ignoring m.
struct SacksScale {
  bool is_default = true;
  std::function<BigNat(const BigNat& B, unsigned m, unsigned i)> f;
  BigNat operator()(const BigNat& B, unsigned m, unsigned i) const;
};

struct Regime {
  enum class Mode { paper, toy } mode = Mode::paper;
  ValidationLevel validation = ValidationLevel::lax;
  std::vector<ToyHeightDecl> heights;     // toy only
  std::map<unsigned, ToyNmLevel> nm_levels;
  std::size_t bit_cap = 1u << 20;         // materialization cap in bits
  SacksScale scale;

  static Regime paper();
  std::optional<BigNat> declared_J(unsigned k) const;
  std::optional<BigNat> declared_J_pow3(unsigned k) const;
  bool uniform_level(unsigned k) const;
};

Regime regime_from_json(const std::string& text);
std::string regime_to_json(const Regime& r);

struct HeightRecord {
  Height h;
  TypeGroup tg;
  Mag nP, nR, nB, nS;
  std::optional<Mag> interval_lo, interval_len;
  std::optional<BigNat> J, J_pow3;  // on (4k,0) records
  bool uniform_block = false;
};

// Per-inequality verification outcome for the Def 4.8 chain.
enum class CheckStatus { exact, magnitude, structural, skipped, failed };
struct ChainCheck {
  Height h;
  std::string what;
  CheckStatus status;
  std::string note;
};

class ParamTable {
 public:
  const Regime& regime() const { return regime_; }
  const Height& horizon() const { return horizon_; }
  const std::vector<HeightRecord>& records() const { return records_; }
  const std::vector<ChainCheck>& checks() const { return checks_; }

  // Immutable per-height record; horizon_error beyond the table,
  // and for non-materialized sublevels of uniform nm blocks.
  const HeightRecord& at(const Height& h) const;
  bool contains(const Height& h) const;

  // Convenience: exact values (resource_error when magnitude-only).
  BigNat nP(const Height& h) const;
  BigNat nB(const Height& h) const;
  BigNat nS(const Height& h) const;
  BigNat nR(const Height& h) const;
  // Interval [lo, lo+len) of I_h; resource_error when magnitude-only.
  std::pair<BigNat, BigNat> interval(const Height& h) const;
  BigNat interval_len(const Height& h) const;
  // J_4k, exact or as power of three.
  std::pair<std::optional<BigNat>, std::optional<BigNat>> J(unsigned k) const;

 private:
  friend ParamTable build_table(const Regime&, const Height&);
  Regime regime_;
  Height horizon_ = Height::lev(1);
  std::vector<HeightRecord> records_;
  std::vector<ChainCheck> checks_;
};

// Build the table through `horizon` (inclusive), validating the declared or
// derived values at the regime's validation level. Toy declarations failing
// validation raise validation_error naming the violated inequality.
ParamTable build_table(const Regime& regime, const Height& horizon);

}  // namespace creature
