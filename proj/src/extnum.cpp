#include "creature/extnum.hpp"

#include <mpfr.h>

#include <cstdio>
#include <utility>

namespace creature {

namespace {

constexpr std::size_t kBinomMaterializeCap = 1u << 22;  // bits

// Minimal RAII shim over mpfr_t.
class Mf {
 public:
  explicit Mf(unsigned prec) { mpfr_init2(x_, prec); }
  ~Mf() { mpfr_clear(x_); }
  Mf(const Mf&) = delete;
  Mf& operator=(const Mf&) = delete;
  mpfr_ptr get() { return x_; }
  mpfr_srcptr get() const { return x_; }

 private:
  mpfr_t x_;
};

Rat mpfr_to_rat(mpfr_srcptr x) {
  if (mpfr_zero_p(x)) return Rat(0);
  mpz_class m;
  mpfr_exp_t e = mpfr_get_z_2exp(m.get_mpz_t(), x);
  Rat r(m);
  Rat two(2);
  if (e >= 0) {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(e));
    r *= Rat(p);
  } else {
    mpz_class p;
    mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(-e));
    r /= Rat(p);
  }
  r.canonicalize();
  return r;
}

void rat_to_mpfr(mpfr_ptr out, const Rat& q, mpfr_rnd_t rnd) {
  mpfr_set_q(out, q.get_mpq_t(), rnd);
}

struct IntervalM {
  Rat lo, hi;
};

IntervalM point(const Rat& q) { return {q, q}; }

IntervalM add_iv(const IntervalM& a, const IntervalM& b) {
  return {a.lo + b.lo, a.hi + b.hi};
}
IntervalM sub_iv(const IntervalM& a, const IntervalM& b) {
  return {a.lo - b.hi, a.hi - b.lo};
}
IntervalM mul_iv(const IntervalM& a, const IntervalM& b) {
  Rat c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
  Rat lo = c[0], hi = c[0];
  for (int i = 1; i < 4; ++i) {
    if (c[i] < lo) lo = c[i];
    if (c[i] > hi) hi = c[i];
  }
  return {lo, hi};
}
IntervalM div_iv(const IntervalM& a, const IntervalM& b) {
  if (b.lo <= 0 && b.hi >= 0)
    throw domain_error("ExtNum division: denominator interval contains 0");
  IntervalM inv{Rat(1) / b.hi, Rat(1) / b.lo};
  return mul_iv(a, inv);
}

// Certified enclosure of log2(n), n >= 1, via MPFR directed rounding.
IntervalM log2_iv(const BigNat& n, unsigned prec) {
  Mf x(prec + 8), lo(prec + 8), hi(prec + 8);
  mpfr_set_z(x.get(), n.get_mpz_t(), MPFR_RNDD);
  mpfr_log2(lo.get(), x.get(), MPFR_RNDD);
  mpfr_set_z(x.get(), n.get_mpz_t(), MPFR_RNDU);
  mpfr_log2(hi.get(), x.get(), MPFR_RNDU);
  return {mpfr_to_rat(lo.get()), mpfr_to_rat(hi.get())};
}

// Certified enclosure of ln Gamma(z+1) for a bignum z >= 0.
IntervalM lngamma1p_iv(const BigNat& z, unsigned prec) {
  Mf x(prec + 16), lo(prec + 16), hi(prec + 16);
  BigNat z1 = z + 1;
  mpfr_set_z(x.get(), z1.get_mpz_t(), MPFR_RNDD);
  mpfr_lngamma(lo.get(), x.get(), MPFR_RNDD);
  mpfr_set_z(x.get(), z1.get_mpz_t(), MPFR_RNDU);
  mpfr_lngamma(hi.get(), x.get(), MPFR_RNDU);
  IntervalM r{mpfr_to_rat(lo.get()), mpfr_to_rat(hi.get())};
  if (r.lo > r.hi) std::swap(r.lo, r.hi);  // lngamma not monotone near 1..2
  return r;
}

IntervalM ln2_iv(unsigned prec) {
  Mf lo(prec + 8), hi(prec + 8);
  mpfr_const_log2(lo.get(), MPFR_RNDD);
  mpfr_const_log2(hi.get(), MPFR_RNDU);
  return {mpfr_to_rat(lo.get()), mpfr_to_rat(hi.get())};
}

}  // namespace

struct ExtNum::Expr {
  enum Kind { kConst, kLog2, kLog3, kLog2Rat, kLogBinom, kAdd, kSub, kMul, kDiv, kMax0, kLog2E };
  Kind kind;
  Rat cval;
  BigNat n, k;
  std::shared_ptr<const Expr> a, b;

  static std::shared_ptr<const Expr> leaf(Kind kd, Rat c, BigNat nn, BigNat kk) {
    auto e = std::make_shared<Expr>();
    e->kind = kd;
    e->cval = std::move(c);
    e->n = std::move(nn);
    e->k = std::move(kk);
    return e;
  }
  static std::shared_ptr<const Expr> node(Kind kd, std::shared_ptr<const Expr> x,
                                          std::shared_ptr<const Expr> y) {
    auto e = std::make_shared<Expr>();
    e->kind = kd;
    e->a = std::move(x);
    e->b = std::move(y);
    return e;
  }
};

namespace {

using Expr = ExtNum::Expr;

IntervalM eval(const Expr& e, unsigned prec) {
  switch (e.kind) {
    case Expr::kConst:
      return point(e.cval);
    case Expr::kLog2:
      return log2_iv(e.n, prec);
    case Expr::kLog3: {
      IntervalM num = log2_iv(e.n, prec);
      IntervalM den = log2_iv(BigNat(3), prec);
      return div_iv(num, den);
    }
    case Expr::kLog2Rat: {
      BigNat num = e.cval.get_num(), den = e.cval.get_den();
      return sub_iv(log2_iv(num, prec), log2_iv(den, prec));
    }
    case Expr::kLogBinom: {
      IntervalM g1 = lngamma1p_iv(e.n, prec);
      IntervalM g2 = lngamma1p_iv(e.k, prec);
      IntervalM g3 = lngamma1p_iv(e.n - e.k, prec);
      IntervalM ln = sub_iv(sub_iv(g1, g2), g3);
      return div_iv(ln, ln2_iv(prec));
    }
    case Expr::kAdd:
      return add_iv(eval(*e.a, prec), eval(*e.b, prec));
    case Expr::kSub:
      return sub_iv(eval(*e.a, prec), eval(*e.b, prec));
    case Expr::kMul:
      return mul_iv(eval(*e.a, prec), eval(*e.b, prec));
    case Expr::kDiv:
      return div_iv(eval(*e.a, prec), eval(*e.b, prec));
    case Expr::kMax0: {
      IntervalM v = eval(*e.a, prec);
      if (v.hi < 0) return point(Rat(0));
      if (v.lo < 0) v.lo = 0;
      return v;
    }
    case Expr::kLog2E: {
      IntervalM v = eval(*e.a, prec);
      if (v.hi <= 0) throw domain_error("log2 of a nonpositive value");
      if (v.lo <= 0)
        throw undecidable_error(
            "log2 argument's enclosure straddles 0; refine precision");
      auto lg = [prec](const Rat& q, mpfr_rnd_t rnd) {
        Mf x(prec + 8), r(prec + 8);
        rat_to_mpfr(x.get(), q, rnd);
        mpfr_log2(r.get(), x.get(), rnd);
        return mpfr_to_rat(r.get());
      };
      return {lg(v.lo, MPFR_RNDD), lg(v.hi, MPFR_RNDU)};
    }
  }
  throw error("ExtNum: corrupt expression");
}

}  // namespace

ExtNum::ExtNum() : exact_(Rat(0)), expr_(nullptr) {}

ExtNum ExtNum::exact(const Rat& q) {
  ExtNum v;
  v.exact_ = q;
  v.exact_->canonicalize();
  v.expr_ = nullptr;
  return v;
}

ExtNum ExtNum::exact(long x) { return exact(Rat(x)); }

ExtNum ExtNum::log2(const BigNat& n) {
  if (n < 1) throw domain_error("log2: n < 1");
  if (auto k = exact_log(n, 2)) return exact(Rat(*k));
  ExtNum v;
  v.exact_.reset();
  v.expr_ = Expr::leaf(Expr::kLog2, Rat(0), n, BigNat(0));
  return v;
}

ExtNum ExtNum::log3(const BigNat& n) {
  if (n < 1) throw domain_error("log3: n < 1");
  if (auto k = exact_log(n, 3)) return exact(Rat(*k));
  ExtNum v;
  v.exact_.reset();
  v.expr_ = Expr::leaf(Expr::kLog3, Rat(0), n, BigNat(0));
  return v;
}

ExtNum ExtNum::log2_rat(const Rat& q) {
  if (q <= 0) throw domain_error("log2_rat: q <= 0");
  auto kn = exact_log(q.get_num(), 2);
  auto kd = exact_log(q.get_den(), 2);
  if (kn && kd) return exact(Rat(*kn - *kd));
  ExtNum v;
  v.exact_.reset();
  v.expr_ = Expr::leaf(Expr::kLog2Rat, q, BigNat(0), BigNat(0));
  return v;
}

ExtNum ExtNum::log2_binom(const BigNat& n, const BigNat& k, unsigned precision) {
  if (k > n) throw domain_error("log2_binom: k > n");
  (void)precision;
  try {
    BigNat c = binom_exact(n, k, kBinomMaterializeCap);
    return ExtNum::log2(c);
  } catch (const resource_error&) {
    ExtNum v;
    v.exact_.reset();
    v.expr_ = Expr::leaf(Expr::kLogBinom, Rat(0), n, k);
    return v;
  }
}

// Binary op helper: fold exact values, otherwise build a node.
#define CREATURE_EXT_BINOP(opname, kindval, exact_expr)                       \
  ExtNum ExtNum::operator opname(const ExtNum& o) const {                    \
    if (exact_ && o.exact_) {                                                 \
      Rat r = (exact_expr);                                                   \
      r.canonicalize();                                                       \
      return ExtNum::exact(r);                                                \
    }                                                                         \
    ExtNum v;                                                                 \
    v.exact_.reset();                                                         \
    auto lhs = exact_ ? Expr::leaf(Expr::kConst, *exact_, BigNat(0), BigNat(0)) : expr_; \
    auto rhs = o.exact_ ? Expr::leaf(Expr::kConst, *o.exact_, BigNat(0), BigNat(0)) : o.expr_; \
    v.expr_ = Expr::node(Expr::kindval, lhs, rhs);                            \
    return v;                                                                 \
  }

CREATURE_EXT_BINOP(+, kAdd, *exact_ + *o.exact_)
CREATURE_EXT_BINOP(-, kSub, *exact_ - *o.exact_)
CREATURE_EXT_BINOP(*, kMul, *exact_ * *o.exact_)
#undef CREATURE_EXT_BINOP

ExtNum ExtNum::operator/(const ExtNum& o) const {
  if (exact_ && o.exact_) {
    if (*o.exact_ == 0) throw domain_error("ExtNum: division by zero");
    Rat r = *exact_ / *o.exact_;
    r.canonicalize();
    return ExtNum::exact(r);
  }
  ExtNum v;
  v.exact_.reset();
  auto lhs = exact_ ? Expr::leaf(Expr::kConst, *exact_, BigNat(0), BigNat(0)) : expr_;
  auto rhs = o.exact_ ? Expr::leaf(Expr::kConst, *o.exact_, BigNat(0), BigNat(0)) : o.expr_;
  v.expr_ = Expr::node(Expr::kDiv, lhs, rhs);
  return v;
}

ExtNum ExtNum::log2_of(const ExtNum& x) {
  if (x.is_exact()) return ExtNum::log2_rat(x.exact_value());
  ExtNum v;
  v.exact_.reset();
  v.expr_ = Expr::node(Expr::kLog2E, x.expr_, nullptr);
  return v;
}

ExtNum ExtNum::max0() const {
  if (exact_) return exact(*exact_ < 0 ? Rat(0) : *exact_);
  ExtNum v;
  v.exact_.reset();
  v.expr_ = Expr::node(Expr::kMax0, expr_, nullptr);
  return v;
}

const Rat& ExtNum::exact_value() const {
  if (!exact_) throw error("ExtNum: not exact");
  return *exact_;
}

Interval ExtNum::enclosure(unsigned precision) const {
  if (exact_) return {*exact_, *exact_};
  IntervalM v = eval(*expr_, precision);
  return {v.lo, v.hi};
}

std::string ExtNum::describe(unsigned precision) const {
  if (exact_) return exact_->get_str() + " (exact)";
  Interval iv = enclosure(precision);
  double mid = (iv.lo.get_d() + iv.hi.get_d()) / 2.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "~%.10g", mid);
  return std::string(buf) + " (interval, width " +
         std::to_string(Rat(iv.hi - iv.lo).get_d()) + ")";
}

Ord ext_cmp(const ExtNum& a, const ExtNum& b, unsigned max_precision) {
  if (a.is_exact() && b.is_exact()) {
    int c = cmp(a.exact_value(), b.exact_value());
    return c < 0 ? Ord::LT : (c > 0 ? Ord::GT : Ord::EQ);
  }
  for (unsigned p = 64; p <= max_precision; p *= 2) {
    try {
      Interval ia = a.enclosure(p), ib = b.enclosure(p);
      if (ia.hi < ib.lo) return Ord::LT;
      if (ia.lo > ib.hi) return Ord::GT;
    } catch (const undecidable_error&) {
      // an inner enclosure needs more precision; escalate
    }
  }
  throw undecidable_error("ext_cmp: values indistinguishable at precision " +
                          std::to_string(max_precision));
}

bool ext_ge(const ExtNum& a, const ExtNum& b, unsigned max_precision) {
  if (a.is_exact() && b.is_exact()) return a.exact_value() >= b.exact_value();
  // same defining expression => equal
  // (diff of structurally identical values is 0 and never separates).
  try {
    return ext_cmp(a, b, max_precision) != Ord::LT;
  } catch (const undecidable_error&) {
    // fall through to structural equality
  }
  // Structurally identical enclosures at every precision: treat as equal.
  Interval ia = a.enclosure(256), ib = b.enclosure(256);
  if (ia.lo == ib.lo && ia.hi == ib.hi) return true;
  throw undecidable_error("ext_ge: undecidable");
}

bool ext_le(const ExtNum& a, const ExtNum& b, unsigned max_precision) {
  return ext_ge(b, a, max_precision);
}

ExtNum log2_binom(const BigNat& n, const BigNat& k, unsigned precision) {
  if (precision < 16) throw precondition_error("log2_binom: precision < 16");
  return ExtNum::log2_binom(n, k, precision);
}

std::string extnum_to_json(const ExtNum& v, unsigned precision) {
  if (v.is_exact()) return std::string("{\"exact\":\"") + v.exact_value().get_str() + "\"}";
  Interval iv = v.enclosure(precision);
  auto hex = [](const Rat& q) {
    Mf x(256);
    rat_to_mpfr(x.get(), q, MPFR_RNDN);
    char* s = nullptr;
    mpfr_asprintf(&s, "%Ra", x.get());
    std::string out(s);
    mpfr_free_str(s);
    return out;
  };
  return std::string("{\"lo\":\"") + hex(iv.lo) + "\",\"hi\":\"" + hex(iv.hi) + "\"}";
}

}  // namespace creature
