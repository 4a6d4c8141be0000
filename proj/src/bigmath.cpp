#include "creature/bigmath.hpp"

namespace creature {

BigNat big_from_dec(const std::string& s) {
  BigNat n;
  if (n.set_str(s, 10) != 0 || n < 0)
    throw validation_error("not a decimal natural number: '" + s + "'");
  return n;
}

std::size_t bit_length(const BigNat& n) {
  if (n == 0) return 0;
  return mpz_sizeinbase(n.get_mpz_t(), 2);
}

std::optional<BigNat> exact_log(const BigNat& n, unsigned base) {
  if (n <= 0) return std::nullopt;
  if (n == 1) return BigNat(0);
  // mpz_remove counts the multiplicity of `base`; n must be a pure power.
  BigNat rest, b(base);
  mp_bitcnt_t k = mpz_remove(rest.get_mpz_t(), n.get_mpz_t(), b.get_mpz_t());
  if (rest != 1) return std::nullopt;
  return BigNat(static_cast<unsigned long>(k));
}

BigNat pow_checked(const BigNat& base, const BigNat& exp, std::size_t bit_cap) {
  if (exp == 0) return BigNat(1);
  if (base == 0) return BigNat(0);
  if (base == 1) return BigNat(1);
  auto e = to_ulong(exp);
  if (!e) throw resource_error("pow: exponent too large to materialize");
  // estimated bits = exp * bits(base); be conservative.
  if (static_cast<double>(*e) * static_cast<double>(bit_length(base)) >
      static_cast<double>(bit_cap))
    throw resource_error("pow: result would exceed " + std::to_string(bit_cap) +
                         " bits");
  BigNat r;
  mpz_pow_ui(r.get_mpz_t(), base.get_mpz_t(), *e);
  return r;
}

BigNat binom_exact(const BigNat& n, const BigNat& k, std::size_t bit_cap) {
  if (k > n) throw domain_error("binom: k > n");
  BigNat kk = k;
  if (k * 2 > n) kk = n - k;
  auto k_ul = to_ulong(kk);
  if (!k_ul) throw resource_error("binom: k too large for exact computation");
  // bits(C(n,k)) <= k*(log2(n)+1); cheap overestimate.
  double est = static_cast<double>(*k_ul) *
               (static_cast<double>(bit_length(n)) + 1.0);
  if (est > static_cast<double>(bit_cap) && *k_ul > 0)
    throw resource_error("binom: result would exceed bit cap");
  BigNat r;
  mpz_bin_ui(r.get_mpz_t(), n.get_mpz_t(), *k_ul);
  return r;
}

std::size_t floor_log2(const BigNat& n) {
  if (n < 1) throw domain_error("floor_log2: n < 1");
  return bit_length(n) - 1;
}

std::optional<unsigned long> to_ulong(const BigNat& n) {
  if (n < 0 || !n.fits_ulong_p()) return std::nullopt;
  return n.get_ui();
}

Rat rat_from_string(const std::string& s) {
  Rat q;
  if (q.set_str(s, 10) != 0) throw validation_error("not a rational: '" + s + "'");
  q.canonicalize();
  return q;
}

std::string rat_to_string(const Rat& q) { return q.get_str(); }

}  // namespace creature
