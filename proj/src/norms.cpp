#include "creature/norms.hpp"

#include <algorithm>
#include <bit>

namespace creature {

std::string to_string(CreatureTag t) {
  switch (t) {
    case CreatureTag::slalom: return "slalom";
    case CreatureTag::nn: return "nn";
    case CreatureTag::cn: return "cn";
    case CreatureTag::ct: return "ct";
    case CreatureTag::nmCell: return "nm";
  }
  return "?";
}

bool Creature::contains(const BigNat& a) const {
  return std::binary_search(atoms.begin(), atoms.end(), a);
}

void Creature::normalize() {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  if (atoms.empty()) throw domain_error("creature must be nonempty (p(L) != 0)");
}

Creature make_creature(CreatureTag tag, Height h, std::vector<BigNat> atoms) {
  Creature c{tag, h, std::move(atoms)};
  c.normalize();
  return c;
}

BigNat cn_delta(const BigNat& interval_len, const BigNat& nB) {
  // C(2^(|I|-1), 2^(n^B-1)); reading the "-1"s inside the exponents.
  if (interval_len < 1 || nB < 1) throw domain_error("cn_delta: |I|, n^B >= 1");
  BigNat n = pow_checked(BigNat(2), interval_len - 1, 1u << 22);
  BigNat k = pow_checked(BigNat(2), nB - 1, 1u << 22);
  if (k > n) throw domain_error("cn_delta: 2^(n^B-1) > 2^(|I|-1)");
  return binom_exact(n, k, 1u << 22);
}

ExtNum cell_norm_of_size(const BigNat& size, const BigNat& nB) {
  if (size < 1) throw domain_error("cell norm of empty set");
  if (nB < 2) throw domain_error("cell norm needs n^B >= 2 (log2 n^B > 0)");
  return ExtNum::log2(size) / (ExtNum::exact(Rat(nB)) * ExtNum::log2(nB));
}

ExtNum pointwise_norm(const Creature& c, const ParamTable& table,
                      const NormContext& ctx) {
  if (c.atoms.empty()) throw domain_error("norm of empty creature");
  const BigNat sz(static_cast<unsigned long>(c.atoms.size()));
  switch (c.tag) {
    case CreatureTag::slalom: {
      // log2|M| / (n^P_{<4k+2} * log2 g_xi(k))
      if (!ctx.log2_g)
        throw precondition_error("slalom norm needs log2 g of the pair");
      BigNat nP = table.nP(c.height);
      return ExtNum::log2(sz) / (ExtNum::exact(Rat(nP)) * *ctx.log2_g);
    }
    case CreatureTag::cn: {
      BigNat nB = table.nB(c.height);
      auto [lo, len] = table.interval(c.height);
      ExtNum num = ExtNum::log2(sz) - ExtNum::log2(cn_delta(len, nB));
      ExtNum den = ExtNum::exact(Rat(pow_checked(BigNat(2), lo, 1u << 22) * nB * nB)) *
                   ExtNum::log2(3 * nB);
      return (num / den).max0();
    }
    case CreatureTag::nmCell: {
      BigNat nB = table.nB(c.height);
      return cell_norm_of_size(sz, nB);
    }
    case CreatureTag::nn:
      return nn_norm(c, table);
    case CreatureTag::ct: {
      unsigned s = split_norm(c, table);
      unsigned kk = c.height.n / 4;
      return ExtNum::exact(
          static_cast<long>(nor_sacks(s, table.nB(c.height), kk, ctx.scale)));
    }
  }
  throw error("pointwise_norm: bad tag");
}

// ---------------------------------------------------------------------------
// minimum hitting set (exact branch and bound)
// ---------------------------------------------------------------------------

namespace {

// Upper bound by greedy max-coverage.
unsigned greedy_hitting(const std::vector<std::uint64_t>& sets, unsigned universe) {
  std::vector<std::uint64_t> left = sets;
  unsigned count = 0;
  while (!left.empty()) {
    unsigned best = 0;
    std::size_t best_hits = 0;
    for (unsigned y = 0; y < universe; ++y) {
      std::size_t hits = 0;
      for (auto m : left)
        if (m >> y & 1) ++hits;
      if (hits > best_hits) {
        best_hits = hits;
        best = y;
      }
    }
    std::vector<std::uint64_t> next;
    for (auto m : left)
      if (!(m >> best & 1)) next.push_back(m);
    left.swap(next);
    ++count;
  }
  return count;
}

// Lower bound: a maximal collection of pairwise disjoint sets needs one
// point each.
unsigned disjoint_lower(const std::vector<std::uint64_t>& sets) {
  std::uint64_t used = 0;
  unsigned n = 0;
  for (auto m : sets)
    if (!(m & used)) {
      used |= m;
      ++n;
    }
  return n;
}

void hitting_dfs(const std::vector<std::uint64_t>& sets, unsigned universe,
                 unsigned chosen, unsigned& best) {
  if (sets.empty()) {
    best = std::min(best, chosen);
    return;
  }
  if (chosen + disjoint_lower(sets) >= best) return;
  // branch on the points of the smallest remaining set
  std::uint64_t pivot = sets.front();
  for (const auto& m : sets)
    if (std::popcount(m) < std::popcount(pivot)) pivot = m;
  for (unsigned y = 0; y < universe; ++y) {
    if (!(pivot >> y & 1)) continue;
    std::vector<std::uint64_t> next;
    next.reserve(sets.size());
    for (auto m : sets)
      if (!(m >> y & 1)) next.push_back(m);
    hitting_dfs(next, universe, chosen + 1, best);
  }
}

}  // namespace

unsigned intersect_norm(const std::vector<std::uint64_t>& M, unsigned universe_size) {
  if (universe_size > 64)
    throw resource_error("intersect_norm: universe larger than 64 points; "
                         "exact search only");
  for (auto m : M)
    if (m == 0) throw domain_error("intersect_norm: empty member set");
  if (M.empty()) return 0;
  unsigned best = greedy_hitting(M, universe_size);
  hitting_dfs(M, universe_size, 0, best);
  return best;
}

namespace {
std::vector<std::uint64_t> atoms_as_masks(const Creature& c, const ParamTable& table,
                                          unsigned* universe_out) {
  BigNat len = table.interval_len(c.height);
  auto l = to_ulong(len);
  if (!l || *l > 6)
    throw resource_error("intersect_norm: 2^|I| exceeds 64; exact search only");
  unsigned universe = 1u << *l;
  std::vector<std::uint64_t> out;
  out.reserve(c.atoms.size());
  for (const auto& a : c.atoms) {
    if (bit_length(a) > universe)
      throw validation_error("atom mask exceeds the 2^I universe");
    out.push_back(mpz_get_ui(a.get_mpz_t()));
  }
  if (universe_out) *universe_out = universe;
  return out;
}
}  // namespace

unsigned intersect_norm(const Creature& c, const ParamTable& table) {
  if (c.tag != CreatureTag::nn && c.tag != CreatureTag::cn)
    throw precondition_error("intersect_norm applies to nn/cn creatures");
  unsigned universe = 0;
  auto masks = atoms_as_masks(c, table, &universe);
  return intersect_norm(masks, universe);
}

ExtNum nn_norm(const Creature& c, const ParamTable& table) {
  unsigned iv = intersect_norm(c, table);
  BigNat nB = table.nB(c.height);
  if (nB < 2) throw domain_error("nn norm needs n^B >= 2");
  if (iv == 0) throw domain_error("nn norm of empty family");
  return ExtNum::log2(BigNat(iv)) / (ExtNum::exact(Rat(nB)) * ExtNum::log2(nB));
}

// ---------------------------------------------------------------------------
// split norm
// ---------------------------------------------------------------------------

namespace {

// g over the trie of X: leaves 0; one child passes through; two children
// give max(children, 1 + min(children)).
unsigned split_rec(const std::vector<std::uint64_t>& xs, std::size_t lo, std::size_t hi,
                   unsigned bit, unsigned len) {
  if (hi - lo == 1 || bit == len) return 0;
  // strings sorted by value; split on bit `bit` (counting from the least
  // significant = first coordinate of I).
  // Sorting order must match bit significance: we sort by reversed-bit value
  // before calling, so here the partition is contiguous.
  std::size_t mid = lo;
  while (mid < hi && !((xs[mid] >> (len - 1 - bit)) & 1)) ++mid;
  if (mid == lo || mid == hi) return split_rec(xs, lo, hi, bit + 1, len);
  unsigned a = split_rec(xs, lo, mid, bit + 1, len);
  unsigned b = split_rec(xs, mid, hi, bit + 1, len);
  return std::max(std::max(a, b), 1 + std::min(a, b));
}

}  // namespace

unsigned split_norm(const std::vector<std::uint64_t>& X, unsigned len) {
  if (X.empty()) throw domain_error("split_norm: empty X");
  if (len > 62) throw resource_error("split_norm: |I| > 62");
  std::vector<std::uint64_t> xs = X;
  // order by most-significant-first so the trie recursion sees contiguous
  // blocks (bit 0 of the string = most significant in the sort key)
  for (auto& v : xs) {
    std::uint64_t r = 0;
    for (unsigned b = 0; b < len; ++b)
      if (v >> b & 1) r |= 1ull << (len - 1 - b);
    v = r;
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return split_rec(xs, 0, xs.size(), 0, len);
}

unsigned split_norm(const Creature& c, const ParamTable& table) {
  if (c.atoms.size() == 1) return 0;  // a single string never branches
  BigNat len = table.interval_len(c.height);
  auto l = to_ulong(len);
  if (!l || *l > 62) throw resource_error("split_norm: interval too long");
  std::vector<std::uint64_t> xs;
  xs.reserve(c.atoms.size());
  for (const auto& a : c.atoms) xs.push_back(mpz_get_ui(a.get_mpz_t()));
  return split_norm(xs, static_cast<unsigned>(*l));
}

unsigned nor_sacks(unsigned split, const BigNat& B, unsigned m, const SacksScale& scale) {
  unsigned i = 0;
  while (true) {
    BigNat f = scale(B, m, i + 1);
    if (f > split) break;
    ++i;
    if (i > 4096) throw resource_error("nor_sacks: runaway scale");
  }
  return i;  // max{i : F(i) <= split} with F(0) implicitly <= everything
}

unsigned sacks_segment_norm(const std::vector<Creature>& segment,
                            const ParamTable& table, const SacksScale& scale,
                            unsigned segment_level_k) {
  if (segment.empty()) throw precondition_error("empty creature segment");
  // norms are taken relative to the segment's first level K1 = 4k+3
  BigNat B = table.nB(Height::lev(4 * segment_level_k + 3));
  unsigned best = 0;
  for (const auto& X : segment) {
    unsigned s = split_norm(X, table);
    best = std::max(best, nor_sacks(s, B, segment_level_k, scale));
  }
  return best;
}

// ---------------------------------------------------------------------------
// stacks
// ---------------------------------------------------------------------------

ExtNum mu_4k(const BigNat& count, unsigned k) {
  if (count < 1) throw domain_error("mu of empty set");
  return ExtNum::log3(count) / ExtNum::exact(static_cast<long>(4 * k + 1));
}

ExtNum mu_4k_pow3(const BigNat& exponent, unsigned k) {
  return ExtNum::exact(Rat(exponent)) / ExtNum::exact(static_cast<long>(4 * k + 1));
}

ExtNum stack_norm(const StackedCreature& s, unsigned k, const ParamTable& table) {
  // groups of cells sorted by cell norm (descending); then the best prefix
  // value max_m min(mu(m), norm of the m-th cell).
  struct Group {
    ExtNum norm;
    BigNat count;
    bool count_pow3 = false;  // count = 3^count_value
  };
  std::vector<Group> groups;
  for (const auto& [idx, cell] : s.cells) {
    (void)idx;
    ExtNum n = cell.is_singleton()
                   ? ExtNum::exact(0L)
                   : pointwise_norm(cell, table, {});
    groups.push_back({n, BigNat(1), false});
  }
  BigNat listed = s.explicit_count();
  if (s.J_pow3) {
    if (!s.cells.empty())
      throw resource_error("stack_norm: symbolic J with explicit cells");
    if (s.default_cell == StackedCreature::Default::full) {
      if (!s.default_full_norm)
        throw precondition_error("full default cells need their cell norm");
      groups.push_back({*s.default_full_norm, *s.J_pow3, true});
    } else {
      groups.push_back({ExtNum::exact(0L), *s.J_pow3, true});
    }
  } else {
    if (!s.J) throw precondition_error("stack needs J");
    if (*s.J < listed) throw validation_error("more cells than J_{4k}");
    BigNat rest = *s.J - listed;
    if (rest > 0) {
      if (s.default_cell == StackedCreature::Default::full) {
        if (!s.default_full_norm)
          throw precondition_error("full default cells need their cell norm");
        groups.push_back({*s.default_full_norm, rest, false});
      } else {
        groups.push_back({ExtNum::exact(0L), rest, false});
      }
    }
  }
  std::sort(groups.begin(), groups.end(), [](const Group& a, const Group& b) {
    try {
      return ext_cmp(a.norm, b.norm, 1u << 12) == Ord::GT;
    } catch (const undecidable_error&) {
      return false;  // indistinguishable norms may sort either way
    }
  });
  auto cmp_sel = [](const ExtNum& a, const ExtNum& b) {
    try {
      return ext_cmp(a, b, 1u << 12);
    } catch (const undecidable_error&) {
      return Ord::EQ;  // indistinguishable: either choice is the same value
    }
  };
  ExtNum best = ExtNum::exact(0L);
  BigNat cum = 0;
  for (const auto& g : groups) {
    ExtNum mu = g.count_pow3 ? mu_4k_pow3(g.count, k) : (cum += g.count, mu_4k(cum, k));
    ExtNum candidate = cmp_sel(mu, g.norm) == Ord::LT ? mu : g.norm;  // min
    if (cmp_sel(candidate, best) == Ord::GT) best = candidate;
  }
  return best;
}

ExtNum compound_norm(const std::vector<StackedCreature>& stacks, const ExtNum& d,
                     unsigned k, const ParamTable& table) {
  if (stacks.empty()) return ExtNum::exact(0L);  // empty support yields 0
  std::optional<ExtNum> min_stack;
  for (const auto& s : stacks) {
    ExtNum v = stack_norm(s, k, table);
    bool smaller;
    try {
      smaller = !min_stack || ext_cmp(v, *min_stack, 1u << 12) == Ord::LT;
    } catch (const undecidable_error&) {
      smaller = false;
    }
    if (smaller) min_stack = v;
  }
  ExtNum diff = *min_stack - d;
  // ill-defined (min stack norm <= d) yields 0; values in (0, 1] also floor
  // to 0 since norms are into the nonnegative reals
  try {
    if (ext_cmp(diff, ExtNum::exact(1L), 1u << 12) != Ord::GT)
      return ExtNum::exact(0L);
  } catch (const undecidable_error&) {
    return ExtNum::exact(0L);  // == 1 up to precision: log2 is 0
  }
  BigNat nP = table.nP(Height::sub(k, BigNat(0)));
  return ExtNum::log2_of(diff) / ExtNum::exact(Rat(nP));
}

}  // namespace creature
