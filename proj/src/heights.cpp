#include "creature/heights.hpp"

#include "creature/params.hpp"

namespace creature {

std::string to_string(TypeGroup tg) {
  switch (tg) {
    case TypeGroup::nm: return "nm";
    case TypeGroup::star_n: return "*n";
    case TypeGroup::slalom: return "slalom";
    case TypeGroup::ct: return "ct";
  }
  return "?";
}

Height Height::sub(unsigned k, BigNat i) {
  if (i < 0) throw domain_error("Height: negative sublevel index");
  Height h;
  h.kind = Kind::Sub;
  h.k = k;
  h.i = std::move(i);
  return h;
}

Height Height::lev(unsigned n) {
  if (n % 4 == 0) throw domain_error("Height: level 4k is a sublevel family, not a level");
  Height h;
  h.kind = Kind::Lev;
  h.n = n;
  return h;
}

TypeGroup Height::typegroup() const {
  if (kind == Kind::Sub) return TypeGroup::nm;
  switch (n % 4) {
    case 1: return TypeGroup::star_n;
    case 2: return TypeGroup::slalom;
    default: return TypeGroup::ct;
  }
}

bool Height::operator==(const Height& o) const {
  if (kind != o.kind) return false;
  if (kind == Kind::Sub) return k == o.k && i == o.i;
  return n == o.n;
}

bool Height::operator<(const Height& o) const {
  unsigned la = level(), lb = o.level();
  if (la != lb) return la < lb;
  // same level number: only sublevels share one
  if (kind == Kind::Sub && o.kind == Kind::Sub) return i < o.i;
  return false;  // equal levels of Lev kind are equal heights
}

std::string to_string(const Height& h) {
  if (h.kind == Height::Kind::Sub)
    return "(" + std::to_string(4 * h.k) + "," + h.i.get_str() + ")";
  return std::to_string(h.n);
}

Height height_from_string(const std::string& s) {
  if (s.empty()) throw validation_error("empty height string");
  if (s.front() == '(') {
    auto comma = s.find(',');
    auto close = s.rfind(')');
    if (comma == std::string::npos || close == std::string::npos || close < comma)
      throw validation_error("malformed sublevel height '" + s + "'");
    long lvl = std::stol(s.substr(1, comma - 1));
    if (lvl < 0 || lvl % 4 != 0)
      throw validation_error("sublevel height must name a level 4k: '" + s + "'");
    BigNat i = big_from_dec(s.substr(comma + 1, close - comma - 1));
    return Height::sub(static_cast<unsigned>(lvl / 4), std::move(i));
  }
  long n = std::stol(s);
  if (n <= 0 || n % 4 == 0)
    throw validation_error("level must be 4k+1, 4k+2 or 4k+3: '" + s + "'");
  return Height::lev(static_cast<unsigned>(n));
}

namespace {

// J_4k as known to the regime (declared in toy mode, Def 3.10(ii) formula in
// paper mode; the paper formula needs n^P and is resolved by the table, so
// stepping in paper mode is only supported where J is still the k = 0 value
// or the caller goes through a built table).
std::pair<std::optional<BigNat>, std::optional<BigNat>> regime_J(const Regime& r,
                                                                 unsigned k) {
  if (r.mode == Regime::Mode::toy) {
    auto e = r.declared_J(k);
    auto p = r.declared_J_pow3(k);
    if (!e && !p) throw validation_error("toy regime: J_{4k} undeclared for k=" +
                                         std::to_string(k));
    return {e, p};
  }
  if (k == 0) return {BigNat(3), std::nullopt};  // 3^((0+1)*2^0) = 3
  return {std::nullopt, std::nullopt};  // beyond: only a built table knows
}

bool index_below_J(const BigNat& next, const std::optional<BigNat>& J,
                   const std::optional<BigNat>& Jpow3) {
  if (J) return next < *J;
  if (Jpow3) {
    // next < 3^e  <=>  bitlen(next) <= e*log2(3); compare via 3^e when small
    try {
      BigNat j = pow_checked(BigNat(3), *Jpow3, bit_length(next) + 8);
      return next < j;
    } catch (const resource_error&) {
      return true;  // 3^e is astronomically larger
    }
  }
  throw horizon_error("J_{4k} not known at this height");
}

}  // namespace

Height step(const Height& h, StepDir dir, const Regime& regime) {
  if (dir == StepDir::succ) {
    if (h.kind == Height::Kind::Sub) {
      auto [J, J3] = regime_J(regime, h.k);
      BigNat next = h.i + 1;
      if (index_below_J(next, J, J3)) return Height::sub(h.k, next);
      return Height::lev(4 * h.k + 1);
    }
    if (h.n % 4 == 3) return Height::sub(h.n / 4 + 1, BigNat(0));
    return Height::lev(h.n + 1);
  }
  // pred
  if (h.kind == Height::Kind::Sub) {
    if (h.i > 0) return Height::sub(h.k, h.i - 1);
    if (h.k == 0) throw domain_error("pred of (0,0) is undefined");
    return Height::lev(4 * h.k - 1);
  }
  if (h.n % 4 == 1) {
    unsigned k = h.n / 4;
    auto [J, J3] = regime_J(regime, k);
    if (J) return Height::sub(k, *J - 1);
    if (J3) {
      BigNat j = pow_checked(BigNat(3), *J3, regime.bit_cap);
      return Height::sub(k, j - 1);
    }
    throw horizon_error("pred: J_{4k} not known");
  }
  return Height::lev(h.n - 1);
}

LevelLayout layout(const Height& h, const ParamTable& table) {
  const HeightRecord& rec = table.at(h);
  LevelLayout out;
  out.h = h;
  out.tg = rec.tg;
  if (rec.tg != TypeGroup::slalom && rec.interval_lo && rec.interval_len &&
      rec.interval_lo->is_exact() && rec.interval_len->is_exact()) {
    out.interval = {*rec.interval_lo->exact, *rec.interval_len->exact};
  }
  if (h.kind == Height::Kind::Sub) {
    auto [J, J3] = table.J(h.k);
    out.sublevel_count = J;
    out.sublevel_count_pow3 = J3;
  }
  return out;
}

}  // namespace creature
