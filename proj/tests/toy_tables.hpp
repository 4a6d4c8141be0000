// Shared toy regimes for the test and acceptance suites.
#pragma once

#include "creature/conditions.hpp"

namespace creature::testing {

inline ToyHeightDecl decl(const std::string& h, const BigNat& nP, const BigNat& nR,
                          const BigNat& nB, const BigNat& nS,
                          std::optional<BigNat> len = std::nullopt) {
  ToyHeightDecl d;
  d.h = height_from_string(h);
  d.nP = nP;
  d.nR = nR;
  d.nB = nB;
  d.nS = nS;
  d.interval_len = std::move(len);
  return d;
}

// Lax chain with a uniform lim inf level 0 (J_0 = 27, n^B = 3, |I| = 11) and
// a uniform level 4 (J_4 = 9); levels 1..7 are lim sup heights with
// power-of-two parameters where the formulas allow. Creature-bearing tests
// live here: full level-0 cells have norm 11/(3 log2 3) ~ 2.31, so compound
// norms at level 0 reach ~1.2 and halving has room to act.
inline Regime toy_uniform() {
  Regime r;
  r.mode = Regime::Mode::toy;
  r.validation = ValidationLevel::lax;
  r.heights.push_back(decl("(0,0)", BigNat(1), BigNat(2), BigNat(3),
                           BigNat(1) << 11, BigNat(11)));
  BigNat nP1 = BigNat(2049);
  r.heights.push_back(decl("1", nP1, nP1 + 1, BigNat(1) << 12, BigNat(1) << 13,
                           BigNat(2)));
  BigNat nP2 = nP1 * (BigNat(1) << 13) + 1;
  r.heights.push_back(decl("2", nP2, nP2 + 1, BigNat(1) << 25, BigNat(1) << 26));
  BigNat nP3 = nP2 * (BigNat(1) << 26) + 1;
  r.heights.push_back(decl("3", nP3, nP3 + 1, BigNat(1) << 52, BigNat(1) << 53,
                           BigNat(53)));
  BigNat nP4 = nP3 + 1;  // ct at 3 has k = 0: multiplier (n^S)^max(0,-1) = 1
  r.heights.push_back(decl("(4,0)", nP4, nP4 + 1, BigNat(1) << 54, BigNat(1) << 55,
                           BigNat(55)));
  BigNat nP5 = nP4 * (BigNat(1) << 55) + 1;
  r.heights.push_back(decl("5", nP5, nP5 + 1, BigNat(1) << 110, BigNat(1) << 111,
                           BigNat(2)));
  BigNat nP6 = nP5 * (BigNat(1) << 111) + 1;
  r.heights.push_back(decl("6", nP6, nP6 + 1, BigNat(1) << 222, BigNat(1) << 223));
  BigNat nP7 = nP6 * (BigNat(1) << 223) + 1;
  r.heights.push_back(decl("7", nP7, nP7 + 1, BigNat(1) << 445, BigNat(1) << 446,
                           BigNat(446)));
  ToyNmLevel l0;
  l0.k = 0;
  l0.J = BigNat(27);
  l0.uniform = true;
  r.nm_levels[0] = l0;
  ToyNmLevel l1;
  l1.k = 1;
  l1.J = BigNat(9);
  l1.uniform = true;
  r.nm_levels[1] = l1;
  return r;
}

inline ParamTable toy_uniform_table(const Height& horizon = Height::lev(7)) {
  return build_table(toy_uniform(), horizon);
}

// Non-uniform lax chain with three explicit sublevels at level 0 (J_0 = 3);
// used where per-sublevel records matter (possibility shapes, meets).
inline Regime toy_explicit() {
  Regime r;
  r.mode = Regime::Mode::toy;
  r.validation = ValidationLevel::lax;
  r.heights.push_back(decl("(0,0)", BigNat(1), BigNat(2), BigNat(4), BigNat(16),
                           BigNat(4)));
  r.heights.push_back(decl("(0,1)", BigNat(17), BigNat(18), BigNat(32), BigNat(64),
                           BigNat(6)));
  BigNat nP02 = BigNat(17) * 64 + 1;  // 1089
  r.heights.push_back(decl("(0,2)", nP02, nP02 + 1, BigNat(1) << 11, BigNat(1) << 12,
                           BigNat(12)));
  BigNat nP1 = nP02 * (BigNat(1) << 12) + 1;
  r.heights.push_back(decl("1", nP1, nP1 + 1, BigNat(1) << 23, BigNat(1) << 24,
                           BigNat(2)));
  BigNat nP2 = nP1 * (BigNat(1) << 24) + 1;
  r.heights.push_back(decl("2", nP2, nP2 + 1, BigNat(1) << 47, BigNat(1) << 48));
  BigNat nP3 = nP2 * (BigNat(1) << 48) + 1;
  r.heights.push_back(decl("3", nP3, nP3 + 1, BigNat(1) << 95, BigNat(1) << 96,
                           BigNat(96)));
  ToyNmLevel l0;
  l0.k = 0;
  l0.J = BigNat(3);
  r.nm_levels[0] = l0;
  return r;
}

inline ParamTable toy_explicit_table(const Height& horizon = Height::lev(3)) {
  return build_table(toy_explicit(), horizon);
}

// Strict-mode chain (both footnote-14 consequences included); dies of size
// past (0,2), which is exactly the Def 4.8 growth at work.
inline Regime toy_strict(unsigned seed_variant = 0) {
  Regime r;
  r.mode = Regime::Mode::toy;
  r.validation = ValidationLevel::strict;
  // (0,0): n^B > (n^B_-)^{n^P} = 2
  BigNat nS0 = BigNat(1) << (2 + (seed_variant % 2));  // 4 or 8
  BigNat len0 = 2 + (seed_variant % 2);
  r.heights.push_back(decl("(0,0)", BigNat(1), BigNat(2), BigNat(3), nS0, len0));
  // (0,1): n^B > max(3^{n^P}, 3 * 2^{n^S+1})
  BigNat nP1 = nS0 + 1;
  BigNat c1 = pow_checked(BigNat(3), nP1, 4096);
  BigNat c2 = BigNat(3) * pow_checked(BigNat(2), nS0 + 1, 4096);
  BigNat nB1 = (c1 > c2 ? c1 : c2) + 1 + seed_variant;
  BigNat len1 = bit_length(nB1) + 1;
  BigNat nS1 = BigNat(1) << mpz_get_ui(len1.get_mpz_t());
  r.heights.push_back(decl("(0,1)", nP1, nP1 + 1, nB1, nS1, len1));
  // (0,2)
  BigNat nP2 = nP1 * nS1 + 1;
  BigNat d1 = pow_checked(nB1, nP2, 1u << 19);
  BigNat d2 = nB1 * pow_checked(BigNat(2), nS1 + 1, 1u << 19);
  BigNat nB2 = (d1 > d2 ? d1 : d2) + 1;
  BigNat len2 = bit_length(nB2) + 1;
  BigNat nS2 = BigNat(1) << mpz_get_ui(len2.get_mpz_t());
  r.heights.push_back(decl("(0,2)", nP2, nP2 + 1, nB2, nS2, len2));
  ToyNmLevel l0;
  l0.k = 0;
  l0.J = BigNat(3);
  r.nm_levels[0] = l0;
  return r;
}

// The Def 3.10(xi) anchor regime for one level 4k: J per the paper formula
// 3^((4k+1) 2^(4k n^P)), a uniform block whose full-cell norm equals
// mu(J_4k) exactly (len = log2(nB) * nB * mu). Horizon is exactly (4k, 0).
// Heights after a uniform block restart from a small n^P (scale model; the
// cross-block recursion check is skipped by design).
inline ParamTable anchor_table(unsigned k) {
  Regime r;
  r.mode = Regime::Mode::toy;
  r.validation = ValidationLevel::lax;
  BigNat nP(1);
  for (unsigned kk = 0;; ++kk) {
    // uniform nm level kk with J = 3^((4kk+1) 2^(4kk nP))
    BigNat e2 = pow_checked(BigNat(2), BigNat(4ul * kk) * nP, 1u << 22);
    BigNat jexp = BigNat(4 * kk + 1) * e2;
    ToyNmLevel l;
    l.k = kk;
    l.uniform = true;
    try {
      l.J = pow_checked(BigNat(3), jexp, 64);
    } catch (const resource_error&) {
      l.J_pow3 = jexp;
    }
    r.nm_levels[kk] = l;
    unsigned nb_bits = static_cast<unsigned>(bit_length(nP)) + 2;
    BigNat nB = BigNat(1) << nb_bits;
    BigNat len = BigNat(nb_bits) * nB * e2;  // full-cell norm = e2 = mu(J)
    ToyHeightDecl d;
    d.h = Height::sub(kk, BigNat(0));
    d.nP = nP;
    d.nR = nP + 1;
    d.nB = nB;
    d.interval_len = len;
    r.heights.push_back(d);
    if (kk == k) break;
    // lim sup levels 4kk+1 .. 4kk+3, restarting small after the block
    BigNat q(5);
    for (unsigned lev = 4 * kk + 1; lev <= 4 * kk + 3; ++lev) {
      BigNat nR = q + 1;
      unsigned b = static_cast<unsigned>(bit_length(nR)) + 1;
      BigNat nBl = BigNat(1) << b;
      ToyHeightDecl e;
      e.h = Height::lev(lev);
      e.nP = q;
      e.nR = nR;
      e.nB = nBl;
      e.nS = lev % 4 == 3 ? BigNat(nBl * 2) : BigNat(nBl + 1);  // slow chain growth
      if (lev % 4 == 1) e.interval_len = BigNat(2);
      if (lev % 4 == 3) e.interval_len = BigNat(b + 1);  // n^S = 2^(b+1)
      r.heights.push_back(e);
      if (lev % 4 == 3)
        q = q + 1;  // ct at 4kk+3, kk <= 1: multiplier (n^S)^max(0,kk-1) = 1
      else
        q = q * *e.nS + 1;
    }
    nP = q;
  }
  return build_table(r, Height::sub(k, BigNat(0)));
}

// The exact full-cell norm of the anchor regime's uniform cells.
inline ExtNum anchor_full_cell_norm(const ParamTable& t, unsigned k) {
  const auto& rec = t.at(Height::sub(k, BigNat(0)));
  BigNat len = *rec.interval_len->exact;
  BigNat nB = *rec.nB.exact;
  return ExtNum::exact(Rat(len)) / (ExtNum::exact(Rat(nB)) * ExtNum::log2(nB));
}

}  // namespace creature::testing
