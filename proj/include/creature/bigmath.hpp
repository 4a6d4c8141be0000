#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>

#include "creature/errors.hpp"

namespace creature {

// Arbitrary-precision nonnegative integer. GMP does the limb work; the
// wrappers below add the few exactness queries the norm formulas need.
using BigNat = mpz_class;
using Rat = mpq_class;

inline BigNat big(unsigned long v) { return BigNat(v); }
BigNat big_from_dec(const std::string& s);

// Number of bits in n (0 for n = 0).
std::size_t bit_length(const BigNat& n);

// n == base^k exactly?  Returns k.
std::optional<BigNat> exact_log(const BigNat& n, unsigned base);

// base^exp with a cap on the result's bit size (resource_error beyond).
BigNat pow_checked(const BigNat& base, const BigNat& exp, std::size_t bit_cap);

// C(n, k) computed exactly; resource_error if the result would exceed the cap.
BigNat binom_exact(const BigNat& n, const BigNat& k, std::size_t bit_cap);

// floor(log2(n)) for n >= 1.
std::size_t floor_log2(const BigNat& n);

std::optional<unsigned long> to_ulong(const BigNat& n);

Rat rat_from_string(const std::string& s);  // "p/q" or "p"
std::string rat_to_string(const Rat& q);

}  // namespace creature
