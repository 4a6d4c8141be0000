#pragma once

#include <cstdint>
#include <vector>

#include "creature/params.hpp"

namespace creature {

// Finite-horizon (f, g)-localisation instance: the cover uses plain
// membership at every k < K (the paper's footnote: "h in S would lead to
// the same results").
struct SlalomInstance {
  std::vector<unsigned> f, g;

  unsigned K() const { return static_cast<unsigned>(f.size()); }
  void check() const;
  BigNat point_count() const;  // prod f(k)
};

// One slalom: per axis a sorted subset S_k of f(k) with |S_k| <= g(k).
using Slalom = std::vector<std::vector<unsigned>>;

struct CoverResult {
  unsigned count = 0;
  std::vector<Slalom> family;
};

// Exact minimum (f, g)-covering family via branch and bound with the volume
// lower bound ceil(prod f / prod g); deterministic lexicographic tie-break.
// The OpenMP fan-out runs over the first-level branches; the serial twin is
// kept for the tests and the benchmark.
CoverResult min_cover_exact(const SlalomInstance& inst, std::size_t cap = 4096);
CoverResult min_cover_exact_serial(const SlalomInstance& inst, std::size_t cap = 4096);

// Greedy max-coverage upper bound (>= exact on every instance).
CoverResult min_cover_greedy(const SlalomInstance& inst);

// ceil(prod f / prod g)
BigNat volume_lower_bound(const SlalomInstance& inst);

// Fact 10.2 (finite analogue): f_A <= f_B and g_A >= g_B pointwise implies
// min_cover(A) <= min_cover(B); both sides computed exactly and asserted.
bool check_monotone(const SlalomInstance& A, const SlalomInstance& B);

// ---------------------------------------------------------------------------
// punctual-reading codec (Lemma 10.13)
// ---------------------------------------------------------------------------

struct Codec {
  std::vector<unsigned> z;      // cut positions, strictly increasing
  std::vector<BigNat> nS;       // n^S_{4k+2} per k
};

Codec make_codec(const ParamTable& table, unsigned K);

// t(k) < n^S_{4k+2} for all k; returns s in 2^{z(K-1)}.
std::vector<bool> codec_encode(const Codec& c, const std::vector<BigNat>& t);
// C_k: decode t|(k+1) from s|z(k).
std::vector<BigNat> codec_decode(const Codec& c, const std::vector<bool>& s,
                                 unsigned k);

}  // namespace creature
