#include "creature/tower.hpp"

#include <json.hpp>

namespace creature {

namespace {

constexpr std::size_t kExpandCapBits = 1u << 20;

std::optional<BigNat> try_pow(const BigNat& m, const BigNat& t, std::size_t cap) {
  try {
    return pow_checked(m, t, cap);
  } catch (const resource_error&) {
    return std::nullopt;
  }
}

// Try to materialize base^(mid^top) as a flat bignum.
std::optional<BigNat> try_expand(const TowerNum& t, std::size_t cap = kExpandCapBits) {
  if (t.flat) return t.flat;
  if (auto e = try_pow(t.mid, t.top, cap)) return try_pow(t.base, *e, cap);
  return std::nullopt;
}

Ord ord_of(int c) { return c < 0 ? Ord::LT : (c > 0 ? Ord::GT : Ord::EQ); }

// base = g^s with g not a perfect power; integers have a unique such root.
void canonical_root(const BigNat& m, BigNat& g, BigNat& s) {
  g = m;
  s = 1;
  if (m >= 2 && mpz_perfect_power_p(m.get_mpz_t())) {
    for (unsigned long k = bit_length(m); k >= 2; --k) {
      BigNat r;
      if (mpz_root(r.get_mpz_t(), m.get_mpz_t(), k) != 0) {
        g = r;
        s = static_cast<unsigned long>(k);
        return;
      }
    }
  }
}

// Exact comparison of c1*m1^t1 vs c2*m2^t2 (nonnegative integers, c >= 1).
Ord cmp_coef_pow(const BigNat& c1, const BigNat& m1, const BigNat& t1,
                 const BigNat& c2, const BigNat& m2, const BigNat& t2) {
  auto flatten = [](const BigNat& c, const BigNat& m, const BigNat& t,
                    std::size_t cap) -> std::optional<BigNat> {
    if (t == 0 || m == 1) return c;
    if (auto p = try_pow(m, t, cap)) return c * *p;
    return std::nullopt;
  };
  auto f1 = flatten(c1, m1, t1, kExpandCapBits);
  auto f2 = flatten(c2, m2, t2, kExpandCapBits);
  if (f1 && f2) return ord_of(cmp(*f1, *f2));
  if (f1) {
    if (auto v2 = flatten(c2, m2, t2, bit_length(*f1) + 64))
      return ord_of(cmp(*f1, *v2));
    return Ord::LT;
  }
  if (f2) {
    if (auto v1 = flatten(c1, m1, t1, bit_length(*f2) + 64))
      return ord_of(cmp(*v1, *f2));
    return Ord::GT;
  }
  // Neither side materializes.
  BigNat g1, s1, g2, s2;
  canonical_root(m1, g1, s1);
  canonical_root(m2, g2, s2);
  if (g1 == g2) {
    // c1 * g^(s1*t1) vs c2 * g^(s2*t2)
    BigNat a1 = s1 * t1, a2 = s2 * t2;
    if (a1 == a2) return ord_of(cmp(c1, c2));
    const bool left_small = a1 < a2;
    BigNat diff = left_small ? a2 - a1 : a1 - a2;
    std::size_t cap = bit_length(c1) + bit_length(c2) + 64;
    if (auto p = try_pow(g1, diff, cap))
      return ord_of(left_small ? cmp(c1, c2 * *p) : cmp(c1 * *p, c2));
    return left_small ? Ord::LT : Ord::GT;  // the power dwarfs both coefficients
  }
  // Distinct canonical bases, both beyond the cap: escalate on
  // log2(c) + t*log2(m). Ties are impossible for the tower shapes this
  // artifact produces; the cap failure is loud.
  ExtNum l1 = ExtNum::log2(c1) + ExtNum::exact(Rat(t1)) * ExtNum::log2(m1);
  ExtNum l2 = ExtNum::log2(c2) + ExtNum::exact(Rat(t2)) * ExtNum::log2(m2);
  return ext_cmp(l1, l2, 1u << 16);
}

}  // namespace

TowerNum TowerNum::flat_value(BigNat v) {
  if (v < 0) throw domain_error("TowerNum: negative");
  TowerNum t;
  t.flat = std::move(v);
  return t;
}

TowerNum TowerNum::tower(BigNat base, BigNat mid, BigNat top) {
  if (base < 2) throw domain_error("TowerNum: base < 2");
  if (mid < 1) throw domain_error("TowerNum: mid < 1");
  if (top < 0) throw domain_error("TowerNum: top < 0");
  TowerNum t;
  if (top == 0 || mid == 1) {
    t.flat = base;  // base^(mid^0) = base^1
    return t;
  }
  t.base = std::move(base);
  t.mid = std::move(mid);
  t.top = std::move(top);
  return t;
}

ExtNum TowerNum::log2() const {
  if (flat) {
    if (*flat < 1) throw domain_error("TowerNum::log2 of 0");
    return ExtNum::log2(*flat);
  }
  BigNat e = pow_checked(mid, top, kExpandCapBits * 32);
  return ExtNum::exact(Rat(e)) * ExtNum::log2(base);
}

Ord tower_cmp(const TowerNum& a, const TowerNum& b) {
  auto fa = try_expand(a), fb = try_expand(b);
  if (fa && fb) return ord_of(cmp(*fa, *fb));
  if (fa) {
    // b stayed tower-sized; retry expansion with room to cover the flat side.
    if (auto v = try_expand(b, bit_length(*fa) + 128)) return ord_of(cmp(*fa, *v));
    return Ord::LT;
  }
  if (fb) {
    if (auto v = try_expand(a, bit_length(*fb) + 128)) return ord_of(cmp(*v, *fb));
    return Ord::GT;
  }
  // Both genuinely tower-sized.
  if (a.base == b.base) return cmp_coef_pow(1, a.mid, a.top, 1, b.mid, b.top);
  BigNat g1, s1, g2, s2;
  canonical_root(a.base, g1, s1);
  canonical_root(b.base, g2, s2);
  auto e1 = try_pow(a.mid, a.top, kExpandCapBits);
  auto e2 = try_pow(b.mid, b.top, kExpandCapBits);
  if (g1 == g2) {
    if (e1 && e2) return ord_of(cmp(s1 * *e1, s2 * *e2));
    return cmp_coef_pow(s1, a.mid, a.top, s2, b.mid, b.top);
  }
  if (e1 && e2) {
    // A1*log2(g1) vs A2*log2(g2); exact whenever a base is a power of two,
    // escalating-precision sandwich otherwise.
    ExtNum l1 = ExtNum::exact(Rat(s1 * *e1)) * ExtNum::log2(g1);
    ExtNum l2 = ExtNum::exact(Rat(s2 * *e2)) * ExtNum::log2(g2);
    return ext_cmp(l1, l2, 1u << 16);
  }
  throw undecidable_error(
      "tower_cmp: distinct bases with non-materializable exponents");
}

Ord tower_sq_cmp(const TowerNum& f, const TowerNum& g, bool times_base) {
  // multiplier * f^2 vs g, multiplier = f's base when times_base is set.
  auto ff = try_expand(f);
  auto fg = try_expand(g);
  if (ff && fg) {
    BigNat lhs = *ff * *ff;
    if (times_base) lhs *= f.flat ? *ff : f.base;
    return ord_of(cmp(lhs, *fg));
  }
  if (ff && !fg) {
    BigNat lhs = *ff * *ff;
    if (times_base) lhs *= f.flat ? *ff : f.base;
    if (auto v = try_expand(g, 2 * bit_length(lhs) + 128)) return ord_of(cmp(lhs, *v));
    return Ord::LT;
  }
  if (!ff && fg) return Ord::GT;  // f alone already exceeds the cap
  if (f.base != g.base)
    throw precondition_error("tower_sq_cmp: towers must share a base");
  // exponents: 2*m1^t1 (+1 if times_base) vs m2^t2
  Ord o = cmp_coef_pow(2, f.mid, f.top, 1, g.mid, g.top);
  if (!times_base) return o;
  if (o == Ord::LT) {
    // 2E1 < E2 as integers gives 2E1+1 <= E2; equality 2E1+1 = E2 is ruled
    // out mod m when both mids coincide (1 ≢ 0), and by a direct check
    // otherwise.
    if (f.mid == g.mid) return Ord::LT;
    auto e1 = try_pow(f.mid, f.top, kExpandCapBits);
    auto e2 = try_pow(g.mid, g.top, kExpandCapBits);
    if (e1 && e2) return ord_of(cmp(2 * *e1 + 1, *e2));
    return Ord::LT;  // non-materializable exponents cannot differ by exactly 1
  }
  return Ord::GT;  // EQ or GT both flip to GT after the +1
}

std::string TowerNum::to_json() const {
  nlohmann::json j;
  if (flat) {
    j["base"] = flat->get_str();
    j["mid"] = "1";
    j["top"] = "1";
  } else {
    j["base"] = base.get_str();
    j["mid"] = mid.get_str();
    j["top"] = top.get_str();
  }
  return j.dump();
}

TowerNum TowerNum::from_json(const std::string& s) {
  auto j = nlohmann::json::parse(s);
  if (j.contains("flat")) return flat_value(big_from_dec(j["flat"].get<std::string>()));
  BigNat base = big_from_dec(j["base"].get<std::string>());
  BigNat mid = big_from_dec(j["mid"].get<std::string>());
  BigNat top = big_from_dec(j["top"].get<std::string>());
  if (mid == 1 || top == 0) return flat_value(std::move(base));
  return tower(std::move(base), std::move(mid), std::move(top));
}

}  // namespace creature
