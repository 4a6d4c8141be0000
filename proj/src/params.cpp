#include "creature/params.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <sstream>

namespace creature {

// ---------------------------------------------------------------------------
// Mag arithmetic
// ---------------------------------------------------------------------------

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dn(double x) { return std::nextafter(x, -kInf); }
double up(double x) { return std::nextafter(x, kInf); }

// outward log2 of a positive bignum, as a double interval
std::pair<double, double> big_log2_iv(const BigNat& v) {
  if (v <= 0) throw domain_error("Mag: log2 of nonpositive");
  signed long e;
  double d = mpz_get_d_2exp(&e, v.get_mpz_t());  // v = d * 2^e, d in [0.5, 1)
  double l = std::log2(d) + static_cast<double>(e);
  return {dn(dn(l)), up(up(l))};
}

// Non-exact view: (depth, lo, hi) with value in exp2^depth([lo, hi]).
struct View {
  int depth;
  double lo, hi;
};

View view_of(const Mag& m) {
  if (m.exact) {
    auto [l, h] = big_log2_iv(*m.exact == 0 ? BigNat(1) : *m.exact);
    if (*m.exact <= 1) return {0, 0.0, up(1.0)};
    return {1, l, h};
  }
  return {m.depth, m.top_lo, m.top_hi};
}

// Raise the representation depth by one: value = exp2^d([lo,hi]) becomes
// exp2^(d+1)([log2 lo, log2 hi]).
View lift(const View& v) {
  if (v.lo <= 0)
    return {v.depth + 1, -1024.0, v.hi <= 1 ? 1.0 : up(std::log2(v.hi))};
  return {v.depth + 1, dn(std::log2(v.lo)), up(std::log2(v.hi))};
}

void canonicalize(View& v) {
  while (v.hi > 1e12) v = lift(v);
  while (v.depth > 0 && v.hi < 40.0) {
    // lower: exp2 the interval
    v = {v.depth - 1, v.lo <= -1020 ? 0.0 : dn(std::exp2(v.lo)), up(std::exp2(v.hi))};
  }
}

Mag from_view(View v) {
  Mag m;
  canonicalize(v);
  m.depth = v.depth;
  m.top_lo = v.lo;
  m.top_hi = v.hi;
  return m;
}

}  // namespace

Mag Mag::from_big(BigNat v, std::size_t bit_cap) {
  if (v < 0) throw domain_error("Mag: negative");
  Mag m;
  if (bit_length(v) <= bit_cap) {
    m.exact = std::move(v);
    return m;
  }
  auto [l, h] = big_log2_iv(v);
  return from_view({1, l, h});
}

std::string Mag::describe() const {
  if (exact) return exact->get_str();
  std::ostringstream os;
  os << "exp2^" << depth << "([" << top_lo << ", " << top_hi << "])";
  return os.str();
}

Mag mag_log2(const Mag& a) {
  if (a.exact) {
    if (auto k = exact_log(*a.exact, 2)) {
      Mag m;
      m.exact = *k;
      return m;
    }
    View v = view_of(a);  // depth 1 = [log2 lo, log2 hi]
    return from_view({0, v.depth == 0 ? 0.0 : v.lo, v.depth == 0 ? v.hi : v.hi});
  }
  View v = view_of(a);
  if (v.depth == 0) {
    if (v.lo < 1) return from_view({0, 0.0, v.hi <= 1 ? 1.0 : up(std::log2(v.hi))});
    return from_view({0, dn(std::log2(v.lo)), up(std::log2(v.hi))});
  }
  return from_view({v.depth - 1, v.lo, v.hi});
}

Mag mag_pow2(const Mag& e, std::size_t bit_cap) {
  if (e.exact) {
    if (auto ul = to_ulong(*e.exact); ul && *ul <= bit_cap) {
      BigNat r;
      mpz_ui_pow_ui(r.get_mpz_t(), 2, *ul);
      return Mag::from_big(r, bit_cap);
    }
    // exact exponent, too big to materialize: value = 2^e has log2 = e
    if (bit_length(*e.exact) <= 52) {
      double d = e.exact->get_d();
      return from_view({1, dn(d), up(d)});
    }
    auto [l, h] = big_log2_iv(*e.exact);
    return from_view({2, l, h});
  }
  View v = view_of(e);
  return from_view({v.depth + 1, v.lo, v.hi});
}

Mag mag_add(const Mag& a, const Mag& b, std::size_t bit_cap) {
  if (a.exact && b.exact) return Mag::from_big(*a.exact + *b.exact, bit_cap);
  View va = view_of(a), vb = view_of(b);
  while (va.depth < vb.depth) va = lift(va);
  while (vb.depth < va.depth) vb = lift(vb);
  if (va.depth == 0)
    return from_view({0, dn(va.lo + vb.lo), up(va.hi + vb.hi)});
  // a + b <= 2 * max(a, b); lower bound is max of lower bounds.
  double lo = std::max(va.lo, vb.lo);
  double hi = std::max(va.hi, vb.hi);
  if (va.depth == 1)
    hi = up(hi + 1.0);
  else
    hi = up(up(hi));  // one doubling is negligible at depth >= 2
  return from_view({va.depth, lo, hi});
}

Mag mag_add_one(const Mag& a, std::size_t bit_cap) {
  if (a.exact) return Mag::from_big(*a.exact + 1, bit_cap);
  View v = view_of(a);
  return from_view({v.depth, v.lo, v.depth >= 2 ? up(v.hi) : up(v.hi + 1.0)});
}

Mag mag_mul(const Mag& a, const Mag& b, std::size_t bit_cap) {
  if (a.exact && b.exact) return Mag::from_big(*a.exact * *b.exact, bit_cap);
  Mag la = mag_log2(a), lb = mag_log2(b);
  Mag s = mag_add(la, lb, bit_cap);
  return mag_pow2(s, bit_cap);
}

Mag mag_pow(const Mag& base, const Mag& exp, std::size_t bit_cap) {
  if (base.exact && exp.exact) {
    try {
      return Mag::from_big(pow_checked(*base.exact, *exp.exact, bit_cap), bit_cap);
    } catch (const resource_error&) {
      // fall through to the magnitude path
    }
  }
  Mag l = mag_mul(exp, mag_log2(base), bit_cap);
  return mag_pow2(l, bit_cap);
}

std::optional<Ord> mag_cmp(const Mag& a, const Mag& b) {
  if (a.exact && b.exact) {
    int c = cmp(*a.exact, *b.exact);
    return c < 0 ? Ord::LT : (c > 0 ? Ord::GT : Ord::EQ);
  }
  View va = view_of(a), vb = view_of(b);
  canonicalize(va);
  canonicalize(vb);
  while (va.depth < vb.depth) va = lift(va);
  while (vb.depth < va.depth) vb = lift(vb);
  if (va.hi < vb.lo) return Ord::LT;
  if (va.lo > vb.hi) return Ord::GT;
  return std::nullopt;
}

namespace {
Mag mag_hull(const Mag& lo_val, const Mag& hi_val) {
  View a = view_of(lo_val), b = view_of(hi_val);
  while (a.depth < b.depth) a = lift(a);
  while (b.depth < a.depth) b = lift(b);
  return from_view({a.depth, std::min(a.lo, b.lo), std::max(a.hi, b.hi)});
}
}  // namespace

// ---------------------------------------------------------------------------
// SacksScale / Regime
// ---------------------------------------------------------------------------

BigNat SacksScale::operator()(const BigNat& B, unsigned m, unsigned i) const {
  if (is_default) {
    BigNat r;
    mpz_pow_ui(r.get_mpz_t(), B.get_mpz_t(), i + 1);
    return r;
  }
  return f(B, m, i);
}

Regime Regime::paper() {
  Regime r;
  r.mode = Mode::paper;
  r.validation = ValidationLevel::strict;
  return r;
}

std::optional<BigNat> Regime::declared_J(unsigned k) const {
  auto it = nm_levels.find(k);
  if (it == nm_levels.end()) return std::nullopt;
  return it->second.J;
}

std::optional<BigNat> Regime::declared_J_pow3(unsigned k) const {
  auto it = nm_levels.find(k);
  if (it == nm_levels.end()) return std::nullopt;
  return it->second.J_pow3;
}

bool Regime::uniform_level(unsigned k) const {
  auto it = nm_levels.find(k);
  return it != nm_levels.end() && it->second.uniform;
}

Regime regime_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Regime r;
  std::string mode = j.value("mode", "toy");
  if (mode == "paper") return Regime::paper();
  r.mode = Regime::Mode::toy;
  r.validation = j.value("validation", std::string("lax")) == "strict"
                     ? ValidationLevel::strict
                     : ValidationLevel::lax;
  if (j.contains("heights")) {
    for (const auto& e : j["heights"]) {
      ToyHeightDecl d;
      d.h = height_from_string(e.at("h").get<std::string>());
      auto get = [&](const char* key) -> std::optional<BigNat> {
        if (!e.contains(key)) return std::nullopt;
        return big_from_dec(e[key].get<std::string>());
      };
      d.nP = get("nP");
      d.nR = get("nR");
      d.nB = get("nB");
      d.nS = get("nS");
      d.interval_len = get("len");
      r.heights.push_back(std::move(d));
    }
  }
  if (j.contains("nmLevels")) {
    for (const auto& e : j["nmLevels"]) {
      ToyNmLevel l;
      l.k = e.at("k").get<unsigned>();
      if (e.contains("J")) l.J = big_from_dec(e["J"].get<std::string>());
      if (e.contains("Jpow3")) l.J_pow3 = big_from_dec(e["Jpow3"].get<std::string>());
      l.uniform = e.value("uniform", false);
      r.nm_levels[l.k] = std::move(l);
    }
  }
  return r;
}

std::string regime_to_json(const Regime& r) {
  nlohmann::json j;
  j["mode"] = r.mode == Regime::Mode::paper ? "paper" : "toy";
  j["validation"] = r.validation == ValidationLevel::strict ? "strict" : "lax";
  j["heights"] = nlohmann::json::array();
  for (const auto& d : r.heights) {
    nlohmann::json e;
    e["h"] = to_string(d.h);
    if (d.nP) e["nP"] = d.nP->get_str();
    if (d.nR) e["nR"] = d.nR->get_str();
    if (d.nB) e["nB"] = d.nB->get_str();
    if (d.nS) e["nS"] = d.nS->get_str();
    if (d.interval_len) e["len"] = d.interval_len->get_str();
    j["heights"].push_back(e);
  }
  j["nmLevels"] = nlohmann::json::array();
  for (const auto& [k, l] : r.nm_levels) {
    nlohmann::json e;
    e["k"] = k;
    if (l.J) e["J"] = l.J->get_str();
    if (l.J_pow3) e["Jpow3"] = l.J_pow3->get_str();
    if (l.uniform) e["uniform"] = true;
    j["nmLevels"].push_back(e);
  }
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// ParamTable accessors
// ---------------------------------------------------------------------------

const HeightRecord& ParamTable::at(const Height& h) const {
  for (const auto& r : records_)
    if (r.h == h) return r;
  // uniform nm blocks: every sublevel shares the (4k,0) record (a scale
  // model of the paper recursion; the per-sublevel n^P is not materialized)
  if (h.kind == Height::Kind::Sub) {
    for (const auto& r : records_)
      if (r.h.kind == Height::Kind::Sub && r.h.k == h.k && r.uniform_block) {
        bool below_J = false;
        if (r.J) below_J = h.i < *r.J;
        else if (r.J_pow3) {
          try {
            below_J = h.i < pow_checked(BigNat(3), *r.J_pow3, bit_length(h.i) + 8);
          } catch (const resource_error&) {
            below_J = true;
          }
        }
        if (below_J) return r;
      }
  }
  throw horizon_error("height " + to_string(h) + " beyond table horizon");
}

bool ParamTable::contains(const Height& h) const {
  for (const auto& r : records_)
    if (r.h == h) return true;
  return false;
}

namespace {
BigNat exact_or_throw(const Mag& m, const char* what, const Height& h) {
  if (!m.exact)
    throw resource_error(std::string(what) + " at " + to_string(h) +
                         " is magnitude-only");
  return *m.exact;
}
}  // namespace

BigNat ParamTable::nP(const Height& h) const { return exact_or_throw(at(h).nP, "n^P", h); }
BigNat ParamTable::nB(const Height& h) const { return exact_or_throw(at(h).nB, "n^B", h); }
BigNat ParamTable::nS(const Height& h) const { return exact_or_throw(at(h).nS, "n^S", h); }
BigNat ParamTable::nR(const Height& h) const { return exact_or_throw(at(h).nR, "n^R", h); }

std::pair<BigNat, BigNat> ParamTable::interval(const Height& h) const {
  const auto& r = at(h);
  if (!r.interval_lo || !r.interval_len)
    throw resource_error("I_L undefined (slalom) or not materialized at " + to_string(h));
  return {exact_or_throw(*r.interval_lo, "interval lo", h),
          exact_or_throw(*r.interval_len, "interval len", h)};
}

BigNat ParamTable::interval_len(const Height& h) const {
  const auto& r = at(h);
  if (!r.interval_len) throw resource_error("I_L undefined at " + to_string(h));
  return exact_or_throw(*r.interval_len, "interval len", h);
}

std::pair<std::optional<BigNat>, std::optional<BigNat>> ParamTable::J(unsigned k) const {
  for (const auto& r : records_)
    if (r.h.kind == Height::Kind::Sub && r.h.k == k && r.h.i == 0)
      return {r.J, r.J_pow3};
  throw horizon_error("level 4k with k=" + std::to_string(k) + " beyond horizon");
}

// ---------------------------------------------------------------------------
// build_table
// ---------------------------------------------------------------------------

namespace {

struct Builder {
  const Regime& regime;
  Height horizon;
  std::size_t cap;
  std::vector<HeightRecord> recs;
  std::vector<ChainCheck> checks;
  Mag next_lo = Mag::from_big(BigNat(0), 64);  // next free interval position
  Mag prod_nS = Mag::one();                    // Π_{K<L} n^S_K
  Mag z_cum = Mag::from_big(BigNat(0), 64);    // z(k) cumulative (Lemma 10.13)

  void check(const Height& h, const std::string& what, const Mag& a, const Mag& b,
             bool structural_ok, const std::string& note) {
    // records the outcome of "a < b"
    auto o = mag_cmp(a, b);
    ChainCheck c{h, what, CheckStatus::failed, note};
    if (o == Ord::LT)
      c.status = (a.is_exact() && b.is_exact()) ? CheckStatus::exact
                                                : CheckStatus::magnitude;
    else if (!o && structural_ok)
      c.status = CheckStatus::structural;
    else
      c.status = CheckStatus::failed;
    checks.push_back(c);
    if (c.status == CheckStatus::failed) {
      if (regime.mode == Regime::Mode::toy)
        throw validation_error("Def 4.8 violated at " + to_string(h) + ": " + what);
      throw error("paper regime chain check failed at " + to_string(h) + ": " + what);
    }
  }

  void skip(const Height& h, const std::string& what, const std::string& note) {
    checks.push_back({h, what, CheckStatus::skipped, note});
  }

  const ToyHeightDecl* decl(const Height& h) const {
    for (const auto& d : regime.heights)
      if (d.h == h) return &d;
    return nullptr;
  }

  // ---- paper-regime layout helpers ----

  // minimal |I| with |I| > nB^2 * log2(nB) (cell norm threshold, Def 3.10(vi))
  Mag nm_len(const Mag& nB) {
    if (nB.is_exact()) {
      if (auto a = exact_log(*nB.exact, 2)) {
        return Mag::from_big(*nB.exact * *nB.exact * *a + 1, cap);
      }
      // non-power-of-two nB: smallest integer above nB^2*log2(nB)
      ExtNum t = ExtNum::exact(Rat(*nB.exact * *nB.exact)) * ExtNum::log2(*nB.exact);
      return Mag::from_big(ceil_strict(t), cap);
    }
    Mag t = mag_mul(mag_mul(nB, nB, cap), mag_log2(nB), cap);
    return mag_add_one(t, cap);
  }

  static BigNat ceil_strict(const ExtNum& x) {
    // smallest integer strictly greater than x (x >= 0, non-integer or exact)
    if (x.is_exact()) {
      const Rat& q = x.exact_value();
      BigNat fl;
      mpz_fdiv_q(fl.get_mpz_t(), q.get_num().get_mpz_t(), q.get_den().get_mpz_t());
      return fl + 1;
    }
    for (unsigned p = 64; p <= (1u << 14); p *= 2) {
      Interval iv = x.enclosure(p);
      BigNat lo_fl, hi_fl;
      mpz_fdiv_q(lo_fl.get_mpz_t(), iv.lo.get_num().get_mpz_t(), iv.lo.get_den().get_mpz_t());
      mpz_fdiv_q(hi_fl.get_mpz_t(), iv.hi.get_num().get_mpz_t(), iv.hi.get_den().get_mpz_t());
      if (lo_fl == hi_fl) return lo_fl + 1;
    }
    throw undecidable_error("ceil_strict: could not isolate the integer part");
  }

  // minimal |I| with the nn norm of the full POSS above nB (Def 3.4(ii))
  Mag nn_len(const Mag& nB) {
    // threshold T = nB^2*log2(nB); |I| = nB + m with m minimal such that
    // log2(2^m + 1) > T. For integer T this is m = T; otherwise m = ceil(T)
    // unless m-1 already clears it.
    if (nB.is_exact()) {
      if (auto a = exact_log(*nB.exact, 2)) {
        BigNat T = *nB.exact * *nB.exact * *a;
        return Mag::from_big(*nB.exact + T, cap);
      }
      ExtNum T = ExtNum::exact(Rat(*nB.exact * *nB.exact)) * ExtNum::log2(*nB.exact);
      BigNat m = ceil_strict(T);
      // try m-1: log2(2^(m-1)+1) > T?
      if (m >= 2) {
        BigNat pw = pow_checked(BigNat(2), m - 1, cap) + 1;
        ExtNum lhs = ExtNum::log2(pw);
        try {
          if (ext_cmp(lhs, T) == Ord::GT) m = m - 1;
        } catch (const undecidable_error&) {
        }
      }
      return Mag::from_big(*nB.exact + m, cap);
    }
    Mag t = mag_mul(mag_mul(nB, nB, cap), mag_log2(nB), cap);
    return mag_add(nB, mag_add_one(t, cap), cap);
  }

  // minimal certified |I| with the cn norm of the full POSS above nB
  Mag cn_len(const Mag& nB, const Mag& lo) {
    // denominator D = 2^lo * nB^2 * log2(3 nB); need
    //   log2 C(2^|I|, 2^(|I|-nB)) - log2 C(2^(|I|-1), 2^(nB-1)) > nB * D.
    Mag three_nB = mag_mul(Mag::from_big(BigNat(3), 64), nB, cap);
    Mag D = mag_mul(mag_mul(mag_pow2(lo, cap), mag_mul(nB, nB, cap), cap),
                    mag_hull(mag_log2(nB), mag_log2(mag_mul(three_nB, Mag::from_big(BigNat(2), 64), cap))),
                    cap);
    Mag rhs = mag_mul(nB, D, cap);
    if (nB.is_exact() && lo.is_exact() && bit_length(*nB.exact) < 16 &&
        bit_length(*lo.exact) < 10) {
      // materializable search for the minimal length
      BigNat nb = *nB.exact;
      ExtNum denom = ExtNum::exact(Rat(pow_checked(BigNat(2), *lo.exact, cap) * nb * nb)) *
                     ExtNum::log2(3 * nb);
      ExtNum target = ExtNum::exact(Rat(nb)) * denom;
      for (BigNat len = nb + 1; to_ulong(len) && *to_ulong(len) <= 4096; ++len) {
        BigNat N = pow_checked(BigNat(2), len, cap);
        BigNat K = pow_checked(BigNat(2), len - nb, cap);
        ExtNum num = log2_binom(N, K, 128) -
                     log2_binom(N / 2, pow_checked(BigNat(2), nb - 1, cap), 128);
        try {
          if (ext_cmp(num, target) == Ord::GT) return Mag::from_big(len, cap);
        } catch (const undecidable_error&) {
        }
      }
      throw resource_error("cn layout: no interval length <= 4096 suffices");
    }
    // magnitude path: pick |I| = nB + ceil(log2(rhs)) + margin and certify
    // the lower bound 2^(|I|-nB)*nB >= rhs*2^margin*nB against rhs plus the
    // subtrahend bound 2^nB * |I|, doubling the margin until it clears.
    Mag base = mag_add(nB, mag_add_one(mag_log2(rhs), cap), cap);
    Mag margin = Mag::from_big(BigNat(64), 64);
    for (int tries = 0; tries < 48; ++tries) {
      Mag len = mag_add(base, margin, cap);
      Mag pos = mag_mul(mag_pow2(mag_add(margin, mag_log2(rhs), cap), cap), nB, cap);
      Mag sub = mag_mul(mag_pow2(nB, cap), len, cap);
      if (mag_cmp(mag_add(rhs, sub, cap), pos) == Ord::LT) return len;
      margin = mag_mul(margin, Mag::from_big(BigNat(2), 64), cap);
    }
    throw resource_error("cn layout: could not certify an interval length");
  }

  // minimal |I| with nor_Sacks of the full 2^I above nB: F(nB+1) by scale
  Mag ct_len(const Mag& nB) {
    if (regime.scale.is_default) {
      return mag_pow(nB, mag_add(nB, Mag::from_big(BigNat(2), 64), cap), cap);
    }
    if (!nB.is_exact())
      throw resource_error("custom Sacks scale needs materializable n^B");
    auto b = to_ulong(*nB.exact);
    if (!b) throw resource_error("custom Sacks scale: n^B too large");
    return Mag::from_big(regime.scale(*nB.exact, 0, static_cast<unsigned>(*b) + 1), cap);
  }

  HeightRecord build_height(const Height& h, const HeightRecord* prev) {
    HeightRecord rec;
    rec.h = h;
    rec.tg = h.typegroup();
    const bool toy = regime.mode == Regime::Mode::toy;
    const ToyHeightDecl* d = toy ? decl(h) : nullptr;

    // (1) n^P
    if (!prev) {
      rec.nP = Mag::from_big(BigNat(1), cap);  // n^P_{<(0,0)} = 1
      if (toy && d && d->nP && *d->nP != 1)
        throw validation_error("Def 4.8: n^P_{<(0,0)} must be 1");
    } else if (toy && d && d->nP) {
      rec.nP = Mag::from_big(*d->nP, cap);
    } else {
      // minimal integer above n^P * n^S (resp. n^P * (n^S)^(k-1) below ct)
      if (prev->tg == TypeGroup::ct) {
        unsigned kk = prev->h.n / 4;
        unsigned e = kk >= 1 ? kk - 1 : 0;
        Mag m = mag_pow(prev->nS, Mag::from_big(BigNat(e), 64), cap);
        rec.nP = mag_add_one(mag_mul(prev->nP, m, cap), cap);
      } else {
        rec.nP = mag_add_one(mag_mul(prev->nP, prev->nS, cap), cap);
      }
    }

    // (2) n^R
    if (toy && d && d->nR) {
      rec.nR = Mag::from_big(*d->nR, cap);
    } else if (!prev) {
      rec.nR = Mag::from_big(BigNat(2), cap);
    } else {
      switch (prev->tg) {
        case TypeGroup::nm: {
          if (prev->interval_lo && prev->interval_len) {
            Mag maxI1 = mag_add(*prev->interval_lo, *prev->interval_len, cap);
            rec.nR = mag_add(rec.nP, mag_pow2(maxI1, cap), cap);
          } else {
            rec.nR = mag_add_one(rec.nP, cap);
          }
          break;
        }
        case TypeGroup::star_n: {
          Mag maxI2 = mag_add_one(mag_add(*prev->interval_lo, *prev->interval_len, cap), cap);
          rec.nR = mag_add(rec.nP, mag_pow2(mag_pow2(maxI2, cap), cap), cap);
          break;
        }
        case TypeGroup::slalom: {
          // z(k) = z(k-1) + ceil(log2 n^S_{4k+2}) + 1
          Mag zk = mag_add_one(mag_add(z_cum, mag_add_one(mag_log2(prev->nS), cap), cap), cap);
          z_cum = zk;
          rec.nR = mag_add(rec.nP, zk, cap);
          break;
        }
        case TypeGroup::ct:
          rec.nR = mag_add_one(rec.nP, cap);  // no additional demands
          break;
      }
    }
    // general requirement n^P < n^R < 2^{n^R}/l, minimal repair when exact
    {
      unsigned ell = prev ? prev->h.level() : 0;
      if (rec.nR.is_exact() && rec.nP.is_exact()) {
        BigNat r = *rec.nR.exact;
        if (r <= *rec.nP.exact) r = *rec.nP.exact + 1;
        if (ell > 0) {
          while (true) {
            // need ell * r < 2^r; r >= 64 always suffices for small ell
            if (bit_length(BigNat(ell) * r) <= 62 &&
                (BigNat(ell) * r) < pow_checked(BigNat(2), std::min<BigNat>(r, BigNat(62)), 128))
              break;
            if (r >= 64) break;
            ++r;
          }
        }
        rec.nR = Mag::from_big(r, cap);
      }
    }

    // (3) n^B
    if (toy && d && d->nB) {
      rec.nB = Mag::from_big(*d->nB, cap);
    } else {
      Mag baseB = prev ? prev->nB : Mag::from_big(BigNat(2), cap);
      if (toy) {
        // canonical derived toy n^B: smallest value passing the level's checks
        BigNat b = rec.nR.is_exact() ? *rec.nR.exact + 1 : BigNat(2);
        rec.nB = Mag::from_big(b, cap);
      } else {
        rec.nB = mag_pow(baseB, mag_mul(rec.nP, rec.nR, cap), cap);
      }
    }

    // (4) layout
    if (rec.tg != TypeGroup::slalom) {
      Mag len;
      if (toy) {
        if (!d || !d->interval_len)
          throw validation_error("toy regime: interval length undeclared at " +
                                 to_string(h));
        len = Mag::from_big(*d->interval_len, cap);
      } else {
        switch (rec.tg) {
          case TypeGroup::nm: len = nm_len(rec.nB); break;
          case TypeGroup::star_n: {
            Mag a = nn_len(rec.nB);
            Mag b = cn_len(rec.nB, next_lo);
            auto o = mag_cmp(a, b);
            len = (o == Ord::GT) ? a : b;
            break;
          }
          case TypeGroup::ct: len = ct_len(rec.nB); break;
          default: break;
        }
      }
      rec.interval_lo = next_lo;
      rec.interval_len = len;
      next_lo = mag_add(next_lo, len, cap);
    }

    // J on (4k,0)
    if (h.kind == Height::Kind::Sub && h.i == 0) {
      if (toy) {
        rec.J = regime.declared_J(h.k);
        rec.J_pow3 = regime.declared_J_pow3(h.k);
        if (!rec.J && !rec.J_pow3)
          throw validation_error("toy regime: J_{4k} undeclared for k=" +
                                 std::to_string(h.k));
        rec.uniform_block = regime.uniform_level(h.k);
      } else {
        // J_4k = 3^((4k+1) * 2^(4k * n^P_{<(4k,0)}))
        if (rec.nP.is_exact()) {
          BigNat e2 = BigNat(4) * h.k * *rec.nP.exact;
          try {
            BigNat pw = pow_checked(BigNat(2), e2, cap);
            BigNat expn = BigNat(4 * h.k + 1) * pw;
            rec.J_pow3 = expn;
            try {
              rec.J = pow_checked(BigNat(3), expn, cap);
            } catch (const resource_error&) {
            }
          } catch (const resource_error&) {
            rec.uniform_block = true;
          }
        } else {
          rec.uniform_block = true;
        }
        if (!rec.J) rec.uniform_block = true;
      }
    }

    // (5) n^S
    if (toy && d && d->nS) {
      rec.nS = Mag::from_big(*d->nS, cap);
      if ((rec.tg == TypeGroup::nm || rec.tg == TypeGroup::ct) && d->interval_len) {
        BigNat expect = pow_checked(BigNat(2), *d->interval_len, cap);
        if (expect != *d->nS)
          throw validation_error("toy regime: n^S must equal 2^|I_L| at " +
                                 to_string(h));
      }
    } else {
      switch (rec.tg) {
        case TypeGroup::nm:
        case TypeGroup::ct:
          rec.nS = mag_pow2(*rec.interval_len, cap);
          break;
        case TypeGroup::star_n: {
          if (rec.interval_len->is_exact() && rec.nB.is_exact()) {
            BigNat len = *rec.interval_len->exact;
            BigNat nb = *rec.nB.exact;
            if (nb <= len) {
              try {
                BigNat N = pow_checked(BigNat(2), len, cap);
                BigNat K = pow_checked(BigNat(2), len - nb, cap);
                rec.nS = Mag::from_big(binom_exact(N, K, cap), cap);
                break;
              } catch (const resource_error&) {
              }
            }
          }
          // trivial but certified bounds: N <= C(N, K) <= 2^N with N = 2^|I|
          Mag N = mag_pow2(*rec.interval_len, cap);
          rec.nS = mag_hull(N, mag_pow2(N, cap));
          break;
        }
        case TypeGroup::slalom: {
          // n^S = n^B ^ (e_k ^ (3^(2^(k+1)))), e_k = n^B + 1
          unsigned kk = h.n / 4;
          Mag e = mag_add_one(rec.nB, cap);
          BigNat tower_top;
          if (kk + 1 >= 63) throw resource_error("slalom n^S: k too large");
          mpz_ui_pow_ui(tower_top.get_mpz_t(), 3, 1ull << (kk + 1));
          Mag inner = mag_pow(e, Mag::from_big(tower_top, cap), cap);
          rec.nS = mag_pow(rec.nB, inner, cap);
          break;
        }
      }
    }
    return rec;
  }

  void validate(const HeightRecord& rec, const HeightRecord* prev) {
    const Height& h = rec.h;
    const bool strict = regime.validation == ValidationLevel::strict ||
                        regime.mode == Regime::Mode::paper;
    check(h, "n^P < n^R", rec.nP, rec.nR, true, "n^R = n^P + positive term");
    check(h, "n^R < n^B", rec.nR, rec.nB, regime.mode == Regime::Mode::paper,
          "n^B = (n^B-)^{n^P n^R} >= 2^{n^R} > n^R");
    check(h, "n^B < n^S", rec.nB, rec.nS, regime.mode == Regime::Mode::paper,
          "n^S is exponential in the layout, which exceeds n^B by the threshold");
    if (prev && prev->uniform_block) {
      // uniform nm blocks are scale models: the per-sublevel n^P recursion is
      // not materialized, so the cross-height bound cannot be stated
      skip(h, "n^S_{L-} < n^P_{<L}",
           "predecessor is a uniform nm block (scale model)");
    } else if (prev) {
      // lax: n^S_{L-} < n^P_{<L}. ct predecessors at k <= 1 have the
      // modesty multiplier (n^S)^max(0,k-1) = 1 and only n^P grows.
      bool ct_small_k = prev->tg == TypeGroup::ct && prev->h.n / 4 <= 1;
      if (ct_small_k) {
        check(h, "n^P_{<L-} < n^P_{<L} (ct, k <= 1)", prev->nP, rec.nP,
              regime.mode == Regime::Mode::paper, "n^P_{<L} := n^P_{<L-} + 1");
      } else {
        check(h, "n^S_{L-} < n^P_{<L}", prev->nS, rec.nP,
              regime.mode == Regime::Mode::paper,
              "n^P_{<L} := n^P_{<L-} n^S_{L-} + 1 by construction");
      }
      if (strict) {
        // the Def 4.8 recursion itself: n^P n^S (resp. the ct variant) < n^P+
        Mag lhs;
        if (prev->tg == TypeGroup::ct) {
          unsigned kk = prev->h.n / 4;
          lhs = mag_mul(
              prev->nP,
              mag_pow(prev->nS, Mag::from_big(BigNat(kk >= 1 ? kk - 1 : 0), 64), cap),
              cap);
        } else {
          lhs = mag_mul(prev->nP, prev->nS, cap);
        }
        check(h, "n^P_{<L-} * n^S_{L-} < n^P_{<L}", lhs, rec.nP,
              regime.mode == Regime::Mode::paper,
              "n^P_{<L} := lhs + 1 by construction");
      }
    }
    if (strict) {
      // n^R < 2^{n^R} / l  i.e.  l * n^R < 2^{n^R}
      unsigned ell = prev ? prev->h.level() : 0;
      if (ell >= 1) {
        if (rec.nR.is_exact() && *rec.nR.exact <= 4096) {
          BigNat lhs = BigNat(ell) * *rec.nR.exact;
          BigNat rhs = pow_checked(BigNat(2), *rec.nR.exact, 8192);
          checks.push_back({h, "l * n^R < 2^{n^R}",
                            lhs < rhs ? CheckStatus::exact : CheckStatus::failed, ""});
          if (lhs >= rhs)
            throw validation_error("Def 4.8 violated at " + to_string(h) +
                                   ": l * n^R < 2^{n^R}");
        } else {
          checks.push_back({h, "l * n^R < 2^{n^R}", CheckStatus::structural,
                            "n^R >= 64 makes 2^{n^R} dwarf l * n^R"});
        }
      }
      // Π_{K<L} n^S_K < n^P_{<L}
      check(h, "prod n^S < n^P", prod_nS, rec.nP, regime.mode == Regime::Mode::paper,
            "immediate consequence of the n^P recursion");
      // footnote 14
      Mag baseB = prev ? prev->nB : Mag::from_big(BigNat(2), cap);
      Mag c1 = mag_pow(baseB, rec.nP, cap);
      check(h, "(n^B_{L-})^{n^P} < n^B_L", c1, rec.nB,
            regime.mode == Regime::Mode::paper, "exponent n^P n^R > n^P");
      if (prev) {
        bool pred_supports = prev->tg == TypeGroup::nm || prev->tg == TypeGroup::star_n;
        if (regime.mode == Regime::Mode::paper && !pred_supports) {
          skip(h, "n^B_{L-} * 2^{n^S_{L-}+1} < n^B_L",
               "fails at slalom/ct predecessors in the Def 4.8 recursion "
               "(n^R_{<L} << n^S_{L-}); see Lemma 12.1's hypothesis");
        } else {
          Mag c2 = mag_mul(prev->nB, mag_pow2(mag_add_one(prev->nS, cap), cap), cap);
          check(h, "n^B_{L-} * 2^{n^S_{L-}+1} < n^B_L", c2, rec.nB,
                regime.mode == Regime::Mode::paper && pred_supports,
                "n^R_{<L} >= n^S_{L-} at nm/*n predecessors");
        }
      }
    }
    prod_nS = mag_mul(prod_nS, rec.nS, cap);
  }
};

}  // namespace

ParamTable build_table(const Regime& regime, const Height& horizon) {
  ParamTable t;
  t.regime_ = regime;
  t.horizon_ = horizon;
  Builder b{regime, horizon, regime.bit_cap};

  Height h = Height::sub(0, BigNat(0));
  const HeightRecord* prev = nullptr;
  while (true) {
    HeightRecord rec = b.build_height(h, prev);
    b.validate(rec, prev);
    b.recs.push_back(std::move(rec));
    prev = &b.recs.back();
    if (horizon < h || h == horizon) break;
    // advance; uniform nm blocks jump to the level's end
    if (h.kind == Height::Kind::Sub) {
      const HeightRecord& levrec = [&]() -> const HeightRecord& {
        for (const auto& r : b.recs)
          if (r.h.kind == Height::Kind::Sub && r.h.k == h.k && r.h.i == 0) return r;
        throw error("internal: missing level record");
      }();
      if (levrec.uniform_block) {
        h = Height::lev(4 * h.k + 1);
      } else if (levrec.J && h.i + 1 < *levrec.J) {
        h = Height::sub(h.k, h.i + 1);
      } else {
        h = Height::lev(4 * h.k + 1);
      }
    } else if (h.n % 4 == 3) {
      h = Height::sub(h.n / 4 + 1, BigNat(0));
    } else {
      h = Height::lev(h.n + 1);
    }
    if (b.recs.size() > 4096) throw resource_error("table horizon too deep");
  }
  t.records_ = std::move(b.recs);
  t.checks_ = std::move(b.checks);
  return t;
}

}  // namespace creature
