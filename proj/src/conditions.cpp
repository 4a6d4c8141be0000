#include "creature/conditions.hpp"

#include <algorithm>
#include <climits>

namespace creature {

TypeGroup typegroup_of(IndexType t) {
  switch (t) {
    case IndexType::nm: return TypeGroup::nm;
    case IndexType::nn:
    case IndexType::cn: return TypeGroup::star_n;
    case IndexType::ct: return TypeGroup::ct;
    case IndexType::slalom: return TypeGroup::slalom;
  }
  throw error("bad index type");
}

CreatureTag tag_of(IndexType t) {
  switch (t) {
    case IndexType::nm: return CreatureTag::nmCell;
    case IndexType::nn: return CreatureTag::nn;
    case IndexType::cn: return CreatureTag::cn;
    case IndexType::ct: return CreatureTag::ct;
    case IndexType::slalom: return CreatureTag::slalom;
  }
  throw error("bad index type");
}

std::string to_string(IndexType t) {
  switch (t) {
    case IndexType::nm: return "nm";
    case IndexType::nn: return "nn";
    case IndexType::cn: return "cn";
    case IndexType::ct: return "ct";
    case IndexType::slalom: return "slalom";
  }
  return "?";
}

IndexType index_type_from_string(const std::string& s) {
  if (s == "nm") return IndexType::nm;
  if (s == "nn") return IndexType::nn;
  if (s == "cn") return IndexType::cn;
  if (s == "ct") return IndexType::ct;
  if (s == "slalom") return IndexType::slalom;
  throw validation_error("unknown index type '" + s + "'");
}

bool CondKey::operator<(const CondKey& o) const {
  if (index != o.index) return index < o.index;
  if (h == o.h) return false;
  return h < o.h;
}
bool CondKey::operator==(const CondKey& o) const {
  return index == o.index && h == o.h;
}

// ---------------------------------------------------------------------------
// Condition basics
// ---------------------------------------------------------------------------

const IndexDecl* Condition::find_index(const std::string& id) const {
  for (const auto& d : support)
    if (d.id == id) return &d;
  return nullptr;
}

namespace {

// Canonical atom of the default singleton at a height: the all-zeros string,
// except at *n heights where the atom must be a valid POSS member (a set of
// relative size 1 - 2^-n^B); there it is the mask with the lowest bits set.
BigNat default_atom(IndexType t, const Height& h, const ParamTable& table) {
  if (t == IndexType::nn || t == IndexType::cn) {
    BigNat len = table.interval_len(h);
    BigNat nB = table.nB(h);
    auto l = to_ulong(len);
    if (!l || *l > 20)
      throw resource_error("default *n atom: interval too long to materialize");
    BigNat cells = BigNat(1) << *l;
    BigNat denom = pow_checked(BigNat(2), nB, 64);
    if (cells % denom != 0)
      throw validation_error("POSS size (1-2^-nB)*2^|I| is not integral");
    BigNat size = cells - cells / denom;
    auto s = to_ulong(size);
    if (!s) throw resource_error("default *n atom too large");
    BigNat mask = (BigNat(1) << *s) - 1;
    return mask;
  }
  return BigNat(0);
}

ExtNum exact_unsigned(unsigned v) { return ExtNum::exact(static_cast<long>(v)); }

bool ge_or_eq(const ExtNum& a, const ExtNum& b) {
  try {
    return ext_ge(a, b);
  } catch (const undecidable_error&) {
    return true;  // indistinguishable values count as equal
  }
}

}  // namespace

Creature Condition::creature_at(const std::string& id, const Height& h) const {
  auto it = creatures.find(CondKey{id, h});
  const IndexDecl* d = find_index(id);
  if (!d) throw precondition_error("index '" + id + "' not in support");
  if (it != creatures.end()) return it->second;
  Creature c;
  c.tag = tag_of(d->type);
  c.height = h;
  c.atoms = {BigNat(0)};  // resolved to the canonical default atom lazily
  return c;
}

bool Condition::has_materialized(const std::string& id, const Height& h) const {
  return creatures.count(CondKey{id, h}) > 0;
}

bool Condition::nontrivial_at(const std::string& id, const Height& h) const {
  auto it = creatures.find(CondKey{id, h});
  return it != creatures.end() && it->second.atoms.size() > 1;
}

ExtNum Condition::halving_at(unsigned k) const {
  auto it = halving.find(k);
  return it == halving.end() ? ExtNum::exact(0L) : it->second;
}

unsigned Condition::trunk_k() const {
  unsigned best = UINT_MAX;
  for (const auto& [key, c] : creatures) {
    if (key.h.kind == Height::Kind::Sub && c.atoms.size() > 1)
      best = std::min(best, key.h.k);
  }
  return best;
}

unsigned Condition::max_level_k() const {
  return horizon.kind == Height::Kind::Sub ? horizon.k : horizon.n / 4;
}

bool Condition::is_segment_start(unsigned k) const {
  return std::find(frame_starts.begin(), frame_starts.end(), k) != frame_starts.end();
}

unsigned Condition::segment_start_of(unsigned k) const {
  unsigned best = 0;
  for (unsigned s : frame_starts)
    if (s <= k) best = std::max(best, s);
  return best;
}

unsigned Condition::segment_end_of(unsigned k) const {
  unsigned start = segment_start_of(k);
  unsigned end = max_level_k();
  for (unsigned s : frame_starts)
    if (s > start) end = std::min(end, s - 1);
  return end;
}

std::optional<Height> Condition::ct_closure(const Height& h) const {
  // smallest segment-initial ct height >= h
  for (unsigned s : frame_starts) {
    Height cand = Height::lev(4 * s + 3);
    if (h < cand || h == cand) {
      if (cand < horizon || cand == horizon) return cand;
      return std::nullopt;  // next boundary beyond horizon
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// norm helpers
// ---------------------------------------------------------------------------

namespace {

NormContext norm_ctx_for(const Condition& p, const IndexDecl& d, const Height& h,
                         const ParamTable& table) {
  NormContext ctx;
  ctx.scale = table.regime().scale;
  if (d.type == IndexType::slalom) {
    if (d.branch.empty())
      throw validation_error("slalom index '" + d.id + "' lacks a branch");
    ctx.log2_g = log2_g(d.branch, h.n / 4, table);
  }
  return ctx;
}

// materialized heights of one typegroup within the table, in order
std::vector<Height> tg_heights(const ParamTable& table, TypeGroup tg) {
  std::vector<Height> out;
  for (const auto& r : table.records())
    if (r.tg == tg) out.push_back(r.h);
  return out;
}

StackedCreature stacked_of(const Condition& p, const std::string& id, unsigned k,
                           const ParamTable& table) {
  StackedCreature s;
  s.k = k;
  auto [J, J3] = table.J(k);
  s.J = J;
  s.J_pow3 = J3;
  for (const auto& [key, c] : p.creatures) {
    if (key.index == id && key.h.kind == Height::Kind::Sub && key.h.k == k)
      s.cells.emplace_back(key.h.i, c);
  }
  std::sort(s.cells.begin(), s.cells.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  return s;
}

}  // namespace

ExtNum nm_stack_norm(const Condition& p, const std::string& id, unsigned k,
                     const ParamTable& table) {
  return stack_norm(stacked_of(p, id, k, table), k, table);
}

ExtNum nm_level_norm(const Condition& p, unsigned k, const ParamTable& table) {
  auto it = p.nm_supports.find(k);
  if (it == p.nm_supports.end() || it->second.empty()) return ExtNum::exact(0L);
  std::vector<StackedCreature> stacks;
  for (const auto& id : it->second) stacks.push_back(stacked_of(p, id, k, table));
  return compound_norm(stacks, p.halving_at(k), k, table);
}

ExtNum limsup_norm(const Condition& p, const std::string& id, const Height& h,
                   const ParamTable& table) {
  const IndexDecl* d = p.find_index(id);
  if (!d) throw precondition_error("limsup_norm: unknown index");
  if (d->type == IndexType::ct) {
    unsigned k = h.n / 4;
    if (!p.is_segment_start(k))
      throw precondition_error("ct norms attach to segment-initial heights");
    unsigned end = p.segment_end_of(k);
    std::vector<Creature> segment;
    for (unsigned j = k; j <= end; ++j)
      segment.push_back(p.creature_at(id, Height::lev(4 * j + 3)));
    // default singletons carry atom {0}; that is fine for split norms
    return ExtNum::exact(static_cast<long>(
        sacks_segment_norm(segment, table, table.regime().scale, k)));
  }
  return pointwise_norm(p.creature_at(id, h), table, norm_ctx_for(p, *d, h, table));
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

ValidationReport validate(const Condition& p, const ParamTable& table) {
  ValidationReport rep;
  // support sanity
  for (const auto& d : p.support) {
    if (d.type == IndexType::slalom && d.branch.empty())
      rep.fail("slalom index '" + d.id + "' needs a congenial branch");
  }
  unsigned trunk = p.trunk_k();
  // frame: consecutive segments covering heights_ct, first at k = 0
  if (p.frame_starts.empty() || p.frame_starts.front() != 0)
    rep.fail("Def 3.8 (i): frame must start at the first ct height");
  if (!std::is_sorted(p.frame_starts.begin(), p.frame_starts.end()))
    rep.fail("Def 3.8 (i): frame starts must be increasing");
  // nm supports
  const std::set<std::string>* prevS = nullptr;
  for (const auto& [k, S] : p.nm_supports) {
    for (const auto& id : S) {
      const IndexDecl* d = p.find_index(id);
      if (!d || d->type != IndexType::nm)
        rep.fail("S_{4k} contains non-nm index '" + id + "'");
    }
    if (trunk != UINT_MAX && k < trunk && !S.empty())
      rep.fail("Def 3.10 (viii): S_{4j} = 0 below the trunk");
    if (prevS &&
        !std::includes(S.begin(), S.end(), prevS->begin(), prevS->end()))
      rep.fail("Def 3.10 (i): supports S_{4k} must be non-decreasing");
    prevS = &S;
  }
  // creatures
  std::map<Height, std::vector<std::string>> nontrivial_by_height;
  for (const auto& [key, c] : p.creatures) {
    const IndexDecl* d = p.find_index(key.index);
    if (!d) {
      rep.fail("creature for undeclared index '" + key.index + "'");
      continue;
    }
    if (c.atoms.empty()) {
      rep.fail("empty creature at (" + key.index + ", " + to_string(key.h) + ")");
      continue;
    }
    if (typegroup_of(d->type) != key.h.typegroup()) {
      rep.fail("index '" + key.index + "' has a creature at a foreign height " +
               to_string(key.h));
      continue;
    }
    if (!(key.h < p.horizon) && !(key.h == p.horizon)) {
      rep.fail("creature beyond horizon at " + to_string(key.h));
      continue;
    }
    if (c.atoms.size() > 1) nontrivial_by_height[key.h].push_back(key.index);
    try {
    switch (d->type) {
      case IndexType::nm: {
        // atoms in 2^I; index must be in S_4k when non-trivial
        BigNat len = table.interval_len(key.h);
        for (const auto& a : c.atoms)
          if (bit_length(a) > len) {
            rep.fail("nm atom exceeds 2^{I_L} at " + to_string(key.h));
            break;
          }
        auto [J, J3] = table.J(key.h.k);
        if (J && key.h.i >= *J) rep.fail("sublevel index beyond J_{4k}");
        if (c.atoms.size() > 1) {
          auto it = p.nm_supports.find(key.h.k);
          if (it == p.nm_supports.end() || !it->second.count(key.index))
            rep.fail("non-trivial nm creature outside S_{4k} at " +
                     to_string(key.h));
        }
        break;
      }
      case IndexType::nn:
      case IndexType::cn: {
        BigNat len = table.interval_len(key.h);
        BigNat nB = table.nB(key.h);
        auto l = to_ulong(len);
        if (!l || *l > 20) break;  // membership uncheckable, caught elsewhere
        BigNat cells = BigNat(1) << *l;
        BigNat denom = pow_checked(BigNat(2), nB, 64);
        if (cells % denom != 0) {
          rep.fail("Def 3.4 (iii): POSS size not integral at " + to_string(key.h));
          break;
        }
        BigNat want = cells - cells / denom;
        for (const auto& a : c.atoms) {
          if (bit_length(a) > cells) {
            rep.fail("*n atom mask exceeds P(2^I) at " + to_string(key.h));
            break;
          }
          if (mpz_popcount(a.get_mpz_t()) != want) {
            rep.fail("Def 3.4 (iii): atom of wrong relative size at " +
                     to_string(key.h));
            break;
          }
        }
        break;
      }
      case IndexType::ct: {
        BigNat len = table.interval_len(key.h);
        for (const auto& a : c.atoms)
          if (bit_length(a) > len) {
            rep.fail("ct atom exceeds 2^{I_L} at " + to_string(key.h));
            break;
          }
        break;
      }
      case IndexType::slalom: {
        auto [f, g] = gen_pair(d->branch, key.h.n / 4, table);
        (void)g;
        for (const auto& a : c.atoms)
          if (tower_cmp(TowerNum::flat_value(a + 1), f) == Ord::GT) {
            rep.fail("Def 3.3 (ii): slalom atom >= f_xi(k) at " + to_string(key.h));
            break;
          }
        break;
      }
    }
    } catch (const error& e) {
      rep.fail("creature at (" + key.index + ", " + to_string(key.h) +
               ") uncheckable: " + e.what());
    }
  }
  // Def 3.10 (ix): sublevel modesty
  for (const auto& [h, ids] : nontrivial_by_height) {
    if (h.kind == Height::Kind::Sub && ids.size() > 1)
      rep.fail("Def 3.10 (ix): two non-trivial nm creatures at " + to_string(h));
  }
  // witness schedule: lim sup
  for (const auto& [id, targets] : p.witnesses.limsup) {
    const IndexDecl* d = p.find_index(id);
    if (!d) {
      rep.fail("witness schedule names unknown index '" + id + "'");
      continue;
    }
    for (const auto& [i, h] : targets) {
      try {
        ExtNum n = limsup_norm(p, id, h, table);
        if (!ge_or_eq(n, exact_unsigned(i)))
          rep.fail("lim sup witness fails: ||p(" + id + ", " + to_string(h) +
                   ")|| < " + std::to_string(i));
      } catch (const error& e) {
        rep.fail(std::string("lim sup witness unevaluable: ") + e.what());
      }
    }
  }
  // witness schedule: lim inf (norm >= i for ALL 4l >= 4k_i within horizon)
  unsigned maxk = p.max_level_k();
  for (const auto& [i, ki] : p.witnesses.liminf) {
    for (unsigned l = ki; l <= maxk; ++l) {
      ExtNum n = nm_level_norm(p, l, table);
      if (!ge_or_eq(n, exact_unsigned(i))) {
        rep.fail("Def 3.10 (xii): compound norm at 4*" + std::to_string(l) +
                 " below the declared lim inf target " + std::to_string(i));
        break;
      }
    }
  }
  // widths nonincreasing toward the declared bound
  {
    std::optional<Rat> prev;
    Rat last(0);
    bool any = false;
    for (unsigned k = (trunk == UINT_MAX ? 0 : trunk); k <= maxk; ++k) {
      auto it = p.nm_supports.find(k);
      unsigned sz = it == p.nm_supports.end() ? 0 : it->second.size();
      if (sz == 0 && !any) continue;
      Rat ratio(sz, 4 * k + 1);
      ratio.canonicalize();
      if (prev && ratio > *prev)
        rep.fail("Def 3.10 (xiii): width-to-height ratio increases at k=" +
                 std::to_string(k));
      prev = ratio;
      last = ratio;
      any = true;
    }
    if (any && last > p.witnesses.width_bound)
      rep.fail("Def 3.10 (xiii): final width ratio above the declared bound");
  }
  // halving bound: d(4k) < 2^(4k n^P) (1 - eps)
  for (const auto& [k, d] : p.halving) {
    try {
      if (ext_cmp(d, ExtNum::exact(0L)) == Ord::LT)
        rep.fail("halving parameter negative at 4*" + std::to_string(k));
    } catch (const undecidable_error&) {
    }
    if (k == 0) continue;  // 2^0 * (1-eps) bound is vacuous at the trunk
    try {
      BigNat nP = table.nP(Height::sub(k, BigNat(0)));
      BigNat e2 = BigNat(4) * k * nP;
      auto bits = to_ulong(e2);
      if (!bits || *bits > 4096) continue;  // bound astronomically slack
      Rat cap = Rat(pow_checked(BigNat(2), e2, 8192)) *
                (Rat(1) - p.witnesses.halving_eps);
      if (ext_cmp(d, ExtNum::exact(cap)) != Ord::LT)
        rep.fail("halving bound d(4k) < 2^{4k n^P}(1-eps) fails at k=" +
                 std::to_string(k));
    } catch (const undecidable_error&) {
      rep.fail("halving bound undecidable at k=" + std::to_string(k));
    } catch (const error&) {
      // table magnitude-only here: bound vacuously slack
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// modesty
// ---------------------------------------------------------------------------

ValidationReport check_modest(const Condition& p, const ParamTable& table) {
  ValidationReport rep;
  unsigned trunk = p.trunk_k();
  // (i) no non-trivial creatures below the trunk, in any typegroup
  if (trunk != UINT_MAX) {
    Height tl = Height::sub(trunk, BigNat(0));
    for (const auto& [key, c] : p.creatures)
      if (c.atoms.size() > 1 && key.h < tl)
        rep.fail("Def 4.3 (i): non-trivial creature below trklgth at " +
                 to_string(key.h));
  }
  // (ii) at most one non-trivial index per height
  std::map<Height, unsigned> cnt;
  for (const auto& [key, c] : p.creatures)
    if (c.atoms.size() > 1) ++cnt[key.h];
  for (const auto& [h, n] : cnt)
    if (n > 1) rep.fail("Def 4.3 (ii): two non-trivial indices at " + to_string(h));
  // (iii)+(iv) ct segments
  unsigned maxk = p.max_level_k();
  std::set<std::string> entered;
  for (unsigned s : p.frame_starts) {
    if (s > maxk) break;
    unsigned end = p.segment_end_of(s);
    if (end > maxk) break;  // segment clipped by the horizon: skip checks
    std::set<std::string> seg_support = entered;
    std::map<std::string, std::vector<unsigned>> nontrivial_levels;
    for (const auto& d : p.support) {
      if (d.type != IndexType::ct) continue;
      for (unsigned j = s; j <= end; ++j)
        if (p.nontrivial_at(d.id, Height::lev(4 * j + 3))) {
          seg_support.insert(d.id);
          nontrivial_levels[d.id].push_back(j);
        }
    }
    if (!seg_support.empty() && seg_support.size() >= s)
      rep.fail("Def 4.3 (iii): |supp(p, ct, segment at " + std::to_string(s) +
               ")| >= k");
    for (const auto& id : seg_support) {
      // (iii): norm >= k for every supported index
      ExtNum norm = limsup_norm(p, id, Height::lev(4 * s + 3), table);
      if (!ge_or_eq(norm, exact_unsigned(s)))
        rep.fail("Def 4.3 (iii): ct norm below k on segment at " + std::to_string(s));
      auto it = nontrivial_levels.find(id);
      if (it != nontrivial_levels.end()) {
        // (iv): exactly one non-trivial height, norm exactly k, minimal size
        if (it->second.size() != 1) {
          rep.fail("Def 4.3 (iv): several non-trivial ct heights in one segment");
          continue;
        }
        try {
          if (!ge_or_eq(exact_unsigned(s), norm))
            rep.fail("Def 4.3 (iv): ct segment norm exceeds k");
        } catch (const error&) {
        }
        BigNat B = table.nB(Height::lev(4 * s + 3));
        BigNat c = table.regime().scale(B, s, s);
        auto cl = to_ulong(c);
        Creature cr = p.creature_at(id, Height::lev(4 * it->second.front() + 3));
        if (cl && *cl <= 30) {
          BigNat want = BigNat(1) << *cl;
          if (BigNat(static_cast<unsigned long>(cr.atoms.size())) != want)
            rep.fail("Def 4.3 (iv): ct creature not minimal (expected 2^c atoms)");
        }
      }
    }
    entered = seg_support;
  }
  return rep;
}

namespace {

Creature shrink_to_min(const Creature& c) {
  Creature out = c;
  out.atoms = {c.atoms.front()};
  return out;
}

// recursive extraction of the leaves of an embedded 2^{<=target} over the
// sorted reversed-bit string list
bool extract_witness(const std::vector<std::uint64_t>& xs, std::size_t lo,
                     std::size_t hi, unsigned bit, unsigned len, unsigned target,
                     std::vector<std::uint64_t>& out) {
  if (target == 0) {
    out.push_back(xs[lo]);
    return true;
  }
  if (hi - lo < (1ull << target) || bit == len) return false;
  std::size_t mid = lo;
  while (mid < hi && !((xs[mid] >> (len - 1 - bit)) & 1)) ++mid;
  if (mid == lo || mid == hi)  // single child: descend
    return extract_witness(xs, lo, hi, bit + 1, len, target, out);
  // split at this node...
  std::size_t before = out.size();
  if (extract_witness(xs, lo, mid, bit + 1, len, target - 1, out) &&
      extract_witness(xs, mid, hi, bit + 1, len, target - 1, out))
    return true;
  out.resize(before);
  // ...or embed entirely within one child
  if (extract_witness(xs, lo, mid, bit + 1, len, target, out)) return true;
  out.resize(before);
  return extract_witness(xs, mid, hi, bit + 1, len, target, out);
}

std::vector<std::uint64_t> split_witness(std::vector<std::uint64_t> xs, unsigned len,
                                         unsigned target) {
  // sort by reversed bits so the trie is contiguous
  for (auto& v : xs) {
    std::uint64_t r = 0;
    for (unsigned b = 0; b < len; ++b)
      if (v >> b & 1) r |= 1ull << (len - 1 - b);
    v = r;
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<std::uint64_t> picked;
  if (!extract_witness(xs, 0, xs.size(), 0, len, target, picked))
    throw certificate_error("split_witness: no embedded 2^{<=k} of the needed height");
  // un-reverse
  for (auto& v : picked) {
    std::uint64_t r = 0;
    for (unsigned b = 0; b < len; ++b)
      if (v >> b & 1) r |= 1ull << (len - 1 - b);
    v = r;
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace

Condition make_modest(const Condition& p, const ParamTable& table) {
  if (check_modest(p, table).ok) return p;
  Condition q = p;
  unsigned trunk = q.trunk_k();
  // (i): singletons below the trunk
  if (trunk != UINT_MAX) {
    Height tl = Height::sub(trunk, BigNat(0));
    for (auto& [key, c] : q.creatures)
      if (c.atoms.size() > 1 && key.h < tl) c = shrink_to_min(c);
  }
  // (ii): one non-trivial index per lim sup height, preserving witnesses.
  // Greedy demand assignment: each declared (i, L) demand keeps its height if
  // free, else moves up to the next free non-trivial height with norm >= i.
  std::map<Height, std::string> taken;
  std::set<CondKey> keep;
  struct Demand {
    std::string id;
    unsigned i;
    Height h;
  };
  std::vector<Demand> demands;
  for (const auto& [id, targets] : q.witnesses.limsup) {
    const IndexDecl* d = q.find_index(id);
    if (!d || d->type == IndexType::ct) continue;  // ct handled with segments
    for (const auto& [i, h] : targets) demands.push_back({id, i, h});
  }
  std::sort(demands.begin(), demands.end(), [](const Demand& a, const Demand& b) {
    if (a.h == b.h) return a.i > b.i;
    return a.h < b.h;
  });
  for (const auto& dem : demands) {
    const IndexDecl* d = q.find_index(dem.id);
    std::vector<Height> heights = tg_heights(table, typegroup_of(d->type));
    bool placed = false;
    for (const Height& h : heights) {
      if (h < dem.h) continue;
      if (!(h < q.horizon) && !(h == q.horizon)) break;
      auto t = taken.find(h);
      if (t != taken.end() && t->second != dem.id) continue;
      if (!q.nontrivial_at(dem.id, h)) continue;
      ExtNum n = limsup_norm(q, dem.id, h, table);
      if (!ge_or_eq(n, exact_unsigned(dem.i))) continue;
      taken[h] = dem.id;
      keep.insert(CondKey{dem.id, h});
      placed = true;
      break;
    }
    if (!placed)
      throw horizon_error("make_modest: witness (i=" + std::to_string(dem.i) +
                          ") for '" + dem.id + "' cannot be kept within the horizon");
  }
  for (auto& [key, c] : q.creatures) {
    const IndexDecl* d = q.find_index(key.index);
    if (!d || typegroup_of(d->type) == TypeGroup::nm ||
        typegroup_of(d->type) == TypeGroup::ct)
      continue;
    if (c.atoms.size() > 1 && !keep.count(key)) c = shrink_to_min(c);
  }
  // ct: (iii)+(iv): per segment, shrink each supported index to one minimal
  // witness of norm exactly k at its first height of sufficient split norm.
  unsigned maxk = q.max_level_k();
  for (unsigned s : q.frame_starts) {
    if (s > maxk) break;
    unsigned end = q.segment_end_of(s);
    if (end > maxk) continue;
    BigNat B = table.nB(Height::lev(4 * s + 3));
    BigNat c_needed = table.regime().scale(B, s, s);
    auto cl = to_ulong(c_needed);
    for (const auto& d : q.support) {
      if (d.type != IndexType::ct) continue;
      std::vector<unsigned> nontrivial;
      for (unsigned j = s; j <= end; ++j)
        if (q.nontrivial_at(d.id, Height::lev(4 * j + 3))) nontrivial.push_back(j);
      if (nontrivial.empty()) continue;
      if (!cl || *cl > 24)
        throw resource_error("make_modest: minimal ct witness 2^c too large");
      // pick the first height whose creature embeds 2^{<=c}
      bool done = false;
      for (unsigned j : nontrivial) {
        Height h = Height::lev(4 * j + 3);
        Creature cr = q.creature_at(d.id, h);
        unsigned sp = split_norm(cr, table);
        if (sp < *cl) continue;
        auto len = to_ulong(table.interval_len(h));
        std::vector<std::uint64_t> xs;
        for (const auto& a : cr.atoms) xs.push_back(mpz_get_ui(a.get_mpz_t()));
        auto picked = split_witness(xs, static_cast<unsigned>(*len),
                                    static_cast<unsigned>(*cl));
        Creature minimal = cr;
        minimal.atoms.clear();
        for (auto v : picked) minimal.atoms.push_back(BigNat(v));
        minimal.normalize();
        q.creatures[CondKey{d.id, h}] = minimal;
        for (unsigned j2 : nontrivial)
          if (j2 != j)
            q.creatures[CondKey{d.id, Height::lev(4 * j2 + 3)}] =
                shrink_to_min(q.creature_at(d.id, Height::lev(4 * j2 + 3)));
        done = true;
        break;
      }
      if (!done)
        throw horizon_error(
            "make_modest: no ct height in the segment at k=" + std::to_string(s) +
            " admits the minimal 2^c witness (coarsen the frame or extend the "
            "horizon)");
    }
  }
  q.witnesses = recompute_witnesses(q, table);
  auto rep = check_modest(q, table);
  if (!rep.ok)
    throw certificate_error("make_modest: output fails modesty: " +
                            rep.violations.front());
  return q;
}

// ---------------------------------------------------------------------------
// levels report
// ---------------------------------------------------------------------------

LevelsReport levels_report(const Condition& p, const ParamTable& table) {
  (void)table;
  LevelsReport rep;
  for (const auto& d : p.support) rep.entry[d.id] = std::nullopt;
  std::set<Height> nontrivial_heights;
  for (const auto& [key, c] : p.creatures) {
    if (c.atoms.size() <= 1) continue;
    nontrivial_heights.insert(key.h);
    auto& e = rep.entry[key.index];
    if (!e || key.h < *e) e = key.h;
    if (key.h.typegroup() == TypeGroup::slalom) {
      const IndexDecl* d = p.find_index(key.index);
      if (d && d->type == IndexType::slalom) {
        unsigned k = key.h.n / 4;
        if (!rep.slalom_splitting.count(k))
          rep.slalom_splitting[k] = {d->id, d->branch};
      }
    }
  }
  // relevant heights: segment-initial ct heights plus non-ct heights with a
  // non-trivial creature
  for (unsigned k : p.frame_starts)
    if (k <= p.max_level_k()) rep.relevant.push_back(Height::lev(4 * k + 3));
  for (const auto& h : nontrivial_heights)
    if (h.typegroup() != TypeGroup::ct) rep.relevant.push_back(h);
  std::sort(rep.relevant.begin(), rep.relevant.end(),
            [](const Height& a, const Height& b) { return a < b; });
  // agreeable levels: 4k-1 closes a segment and 4k+3 opens one; equivalently
  // k is a frame start (vacuously for k = 0)
  for (unsigned k : p.frame_starts)
    if (k <= p.max_level_k()) rep.agreeable_ks.push_back(k);
  return rep;
}

// ---------------------------------------------------------------------------
// possibilities
// ---------------------------------------------------------------------------

namespace {

struct Coord {
  CondKey key;
  std::vector<BigNat> atoms;
};

std::vector<Coord> poss_coords(const Condition& p, const Height& L,
                               const ParamTable& table) {
  std::vector<Coord> coords;
  std::optional<Height> closure = p.ct_closure(L);
  auto included = [&](const IndexDecl& d, const Height& h) {
    if (typegroup_of(d.type) != h.typegroup()) return false;
    if (typegroup_of(d.type) == TypeGroup::ct) return !closure || h < *closure;
    return h < L;
  };
  // materialized creatures (covers uniform nm blocks), in key order
  for (const auto& [key, c] : p.creatures) {
    const IndexDecl* d = p.find_index(key.index);
    if (!d || !included(*d, key.h)) continue;
    coords.push_back({key, c.atoms});
  }
  // default singletons of S_4k members at materialized sublevels; these
  // contribute a factor of one but fix the possibility's shape
  for (const auto& d : p.support) {
    if (typegroup_of(d.type) != TypeGroup::nm) continue;
    for (const auto& r : table.records()) {
      if (r.tg != TypeGroup::nm || !(r.h < L)) continue;
      auto it = p.nm_supports.find(r.h.k);
      if (it == p.nm_supports.end() || !it->second.count(d.id)) continue;
      if (p.has_materialized(d.id, r.h)) continue;
      coords.push_back({CondKey{d.id, r.h}, {default_atom(d.type, r.h, table)}});
    }
  }
  std::sort(coords.begin(), coords.end(),
            [](const Coord& a, const Coord& b) { return a.key < b.key; });
  return coords;
}

}  // namespace

BigNat poss_count(const Condition& p, const Height& L, const ParamTable& table) {
  BigNat n = 1;
  for (const auto& c : poss_coords(p, L, table))
    n *= BigNat(static_cast<unsigned long>(c.atoms.size()));
  return n;
}

PossResult poss(const Condition& p, const Height& L, const ParamTable& table,
                std::size_t cap) {
  auto coords = poss_coords(p, L, table);
  PossResult out;
  out.count = 1;
  for (const auto& c : coords)
    out.count *= BigNat(static_cast<unsigned long>(c.atoms.size()));
  if (out.count > static_cast<unsigned long>(cap))
    throw resource_error("poss: enumeration of " + out.count.get_str() +
                         " possibilities exceeds the cap (count bound still " +
                         out.count.get_str() + ")");
  std::vector<std::size_t> idx(coords.size(), 0);
  while (true) {
    Possibility eta;
    for (std::size_t j = 0; j < coords.size(); ++j)
      eta.atoms[coords[j].key] = coords[j].atoms[idx[j]];
    out.list.push_back(std::move(eta));
    std::size_t j = 0;
    for (; j < coords.size(); ++j) {
      if (++idx[j] < coords[j].atoms.size()) break;
      idx[j] = 0;
    }
    if (j == coords.size()) break;
  }
  return out;
}

Condition meet(const Condition& p, const Possibility& eta, const Height& L,
               const ParamTable& table) {
  // eta must be one of p's possibilities at the cut L
  auto coords = poss_coords(p, L, table);
  if (coords.size() != eta.atoms.size())
    throw precondition_error("meet: eta is not shaped like poss(p, <L)");
  for (const auto& c : coords) {
    auto it = eta.atoms.find(c.key);
    if (it == eta.atoms.end())
      throw precondition_error("meet: eta lacks the coordinate (" + c.key.index +
                               ", " + to_string(c.key.h) + ")");
    if (std::find(c.atoms.begin(), c.atoms.end(), it->second) == c.atoms.end())
      throw precondition_error("meet: eta picks an atom outside p's creature");
  }
  Condition q = p;
  for (const auto& [key, atom] : eta.atoms) {
    Creature c = q.creature_at(key.index, key.h);
    c.atoms = {atom};
    q.creatures[key] = c;
  }
  return q;
}

// ---------------------------------------------------------------------------
// is_stronger / trim_poss
// ---------------------------------------------------------------------------

StrongerReport is_stronger(const Condition& q, const Condition& p,
                           const ParamTable& table) {
  StrongerReport rep;
  auto fail = [&](const std::string& s) {
    rep.stronger = false;
    rep.first_failing = s;
    return rep;
  };
  // trunk may only grow (vacuous when p has no nm part at all)
  bool p_has_nm = false;
  for (const auto& d : p.support) p_has_nm |= d.type == IndexType::nm;
  if (p_has_nm && q.trunk_k() < p.trunk_k())
    return fail("trklgth(q) >= trklgth(p)");
  // support may only grow
  for (const auto& d : p.support) {
    const IndexDecl* e = q.find_index(d.id);
    if (!e || e->type != d.type || e->branch != d.branch)
      return fail("supp(q) contains supp(p)");
  }
  // nm supports do not shrink above the trunk
  unsigned maxk = std::min(p.max_level_k(), q.max_level_k());
  for (unsigned k = 0; k <= maxk; ++k) {
    if (4 * k < 4 * q.trunk_k() && q.trunk_k() != UINT_MAX) continue;
    auto itp = p.nm_supports.find(k);
    if (itp == p.nm_supports.end()) continue;
    auto itq = q.nm_supports.find(k);
    const std::set<std::string> empty;
    const auto& Sq = itq == q.nm_supports.end() ? empty : itq->second;
    if (!std::includes(Sq.begin(), Sq.end(), itp->second.begin(), itp->second.end()))
      return fail("S_{4k}(q) contains S_{4k}(p) above the trunk");
  }
  // frame coarser: every start of q is a start of p
  for (unsigned s : q.frame_starts)
    if (!p.is_segment_start(s)) return fail("frame of q coarser than frame of p");
  // creature-wise inclusion on the old support, over every height either
  // side materializes
  {
    std::set<CondKey> keys;
    for (const auto& [key, c] : p.creatures) keys.insert(key);
    for (const auto& [key, c] : q.creatures) keys.insert(key);
    for (const auto& key : keys) {
      const IndexDecl* d = p.find_index(key.index);
      if (!d) continue;  // new index of q: no constraint from p
      if (!(key.h < p.horizon) && !(key.h == p.horizon)) continue;
      Creature cp = p.creature_at(key.index, key.h);
      Creature cq = q.creature_at(key.index, key.h);
      if (!p.has_materialized(key.index, key.h))
        cp.atoms = {default_atom(d->type, key.h, table)};
      if (!q.has_materialized(key.index, key.h))
        cq.atoms = {default_atom(d->type, key.h, table)};
      for (const auto& a : cq.atoms)
        if (!cp.contains(a))
          return fail("q(alpha, L) subset of p(alpha, L) at (" + key.index + ", " +
                      to_string(key.h) + ")");
    }
  }
  // halving parameters do not decrease
  for (unsigned k = 0; k <= maxk; ++k) {
    if (!ge_or_eq(q.halving_at(k), p.halving_at(k)))
      return fail("halving parameters do not decrease");
  }
  return rep;
}

Possibility trim_poss(const Condition& q, const Condition& p, const Possibility& eta,
                      const Height& L, const ParamTable& table) {
  auto sr = is_stronger(q, p, table);
  if (!sr.stronger)
    throw precondition_error("trim_poss: q is not stronger than p (" +
                             sr.first_failing + ")");
  Possibility theta;
  for (const auto& c : poss_coords(p, L, table)) {
    auto it = eta.atoms.find(c.key);
    if (it != eta.atoms.end()) {
      theta.atoms[c.key] = it->second;
    } else {
      Creature cq = q.creature_at(c.key.index, c.key.h);
      if (!q.has_materialized(c.key.index, c.key.h)) {
        const IndexDecl* d = q.find_index(c.key.index);
        cq.atoms = {default_atom(d->type, c.key.h, table)};
      }
      if (cq.atoms.size() != 1)
        throw precondition_error(
            "trim_poss: eta does not determine the coordinate (" + c.key.index +
            ", " + to_string(c.key.h) + ")");
      theta.atoms[c.key] = cq.atoms.front();
    }
  }
  return theta;
}

// ---------------------------------------------------------------------------
// build_full (Lemma 4.11, finite truncation)
// ---------------------------------------------------------------------------

Condition build_full(const std::vector<IndexDecl>& B, const ParamTable& table) {
  Condition p;
  p.horizon = table.horizon();
  p.support = B;
  unsigned maxk = p.max_level_k();
  // trivial frame
  p.frame_starts.clear();
  for (unsigned k = 0; k <= maxk; ++k) p.frame_starts.push_back(k);

  // group indices by typegroup, in declaration order
  std::map<TypeGroup, std::vector<const IndexDecl*>> groups;
  for (const auto& d : B) groups[typegroup_of(d.type)].push_back(&d);

  // --- nm: S_4k of size s_4k = min(|B_nm|, k+1), d == 0; per index a block
  // X_alpha of J_4k of size 3^((4k+1)k) carrying full base sets.
  const auto& nm = groups[TypeGroup::nm];
  for (unsigned k = 0; k <= maxk; ++k) {
    if (nm.empty()) break;
    if (!table.contains(Height::sub(k, BigNat(0)))) continue;
    unsigned s4k = std::min<unsigned>(nm.size(), k + 1);
    std::set<std::string> S;
    for (unsigned j = 0; j < s4k; ++j) S.insert(nm[j]->id);
    p.nm_supports[k] = S;
    p.halving[k] = ExtNum::exact(0L);
    auto [J, J3] = table.J(k);
    BigNat xsize = pow_checked(BigNat(3), BigNat((4ul * k + 1) * k), 1u << 20);
    BigNat need = BigNat(s4k) * xsize;
    BigNat capacity = J ? *J : pow_checked(BigNat(3), *J3, 1u << 20);
    if (need > capacity)
      throw resource_error(
          "build_full: J_{4k} too small for disjoint X_alpha (need s_{4k} * "
          "3^{(4k+1)k} = " + need.get_str() + " <= (k+1) * 3^{(4k+1)k} <= J)");
    unsigned j = 0;
    for (const auto* d : nm) {
      if (!S.count(d->id)) break;
      BigNat lo = BigNat(j) * xsize;
      // full base sets on the block [lo, lo + xsize)
      for (BigNat i = lo; i < lo + xsize; ++i) {
        Height h = Height::sub(k, i);
        BigNat len = table.interval_len(h);
        auto l = to_ulong(len);
        if (!l || *l > 12)
          throw resource_error("build_full: 2^{I_L} too large to materialize");
        Creature c;
        c.tag = CreatureTag::nmCell;
        c.height = h;
        for (unsigned long v = 0; v < (1ul << *l); ++v) c.atoms.push_back(BigNat(v));
        p.creatures[CondKey{d->id, h}] = std::move(c);
      }
      ++j;
    }
  }

  // --- modular lim sup factors: staggered entry with round-robin modesty
  for (TypeGroup tg : {TypeGroup::star_n, TypeGroup::slalom}) {
    const auto& idx = groups[tg];
    if (idx.empty()) continue;
    auto heights = tg_heights(table, tg);
    for (std::size_t m = 0; m < heights.size(); ++m) {
      // indices entered by height m: index j enters at the j-th tg height
      std::size_t entered = std::min(idx.size(), m + 1);
      const IndexDecl* owner = idx[m % entered];
      const Height& h = heights[m];
      // owner gets the full base set, others stay singleton (default)
      Creature c;
      c.tag = tag_of(owner->type);
      c.height = h;
      if (tg == TypeGroup::slalom) {
        // full base set f_xi(k) is astronomically large; take an initial
        // segment witnessing a norm of at least ~k instead
        BigNat nP = table.nP(h);
        ExtNum lg = log2_g(owner->branch, h.n / 4, table);
        // |M| = 2^t with t such that t / (nP log2 g) is as large as the
        // table allows at toy scale; cap the creature at 4096 atoms
        unsigned long t = 12;
        for (unsigned long v = 0; v < (1ul << t); ++v) c.atoms.push_back(BigNat(v));
        (void)nP;
        (void)lg;
      } else {
        BigNat len = table.interval_len(h);
        BigNat nB = table.nB(h);
        auto l = to_ulong(len);
        if (!l || *l > 5)
          throw resource_error("build_full: POSS at *n height too large");
        unsigned long cells = 1ul << *l;
        BigNat denom = pow_checked(BigNat(2), nB, 64);
        if ((BigNat(cells) % denom) != 0)
          throw validation_error("build_full: POSS size not integral");
        unsigned long want =
            mpz_get_ui(BigNat(BigNat(cells) - BigNat(cells) / denom).get_mpz_t());
        // all masks over `cells` bits with popcount == want
        for (std::uint64_t mask = (1ull << want) - 1; mask < (1ull << cells);) {
          c.atoms.push_back(BigNat(static_cast<unsigned long>(mask)));
          // next combination (Gosper's hack)
          std::uint64_t cbits = mask & -mask, r = mask + cbits;
          mask = (((r ^ mask) >> 2) / cbits) | r;
        }
      }
      c.normalize();
      p.creatures[CondKey{owner->id, h}] = std::move(c);
    }
  }

  // --- ct: staggered entry honouring |supp| < k; index j first non-trivial
  // at segment k = j + 2, then one minimal witness per later segment.
  const auto& cts = groups[TypeGroup::ct];
  for (unsigned k = 0; k <= maxk; ++k) {
    if (cts.empty()) break;
    Height h = Height::lev(4 * k + 3);
    if (!table.contains(h)) continue;
    // supported at segment k: indices j with j + 2 <= k, count < k
    std::size_t sup = 0;
    while (sup < cts.size() && sup + 2 <= k) ++sup;
    if (sup == 0) continue;
    // trivial frame: each segment is one height; modesty (ii) allows one
    // non-trivial index there, so entry must leave room: with several ct
    // indices the frame must group heights. Merge segments [k .. k+sup-1].
    // (Handled by rebuilding the frame below.)
    (void)h;
  }
  if (!cts.empty()) {
    // rebuild the frame so a segment starting at k spans `sup(k)` heights
    std::vector<unsigned> starts;
    unsigned k = 0;
    while (k <= maxk) {
      starts.push_back(k);
      std::size_t sup = 0;
      while (sup < cts.size() && sup + 2 <= k) ++sup;
      k += std::max<std::size_t>(1, sup);
    }
    p.frame_starts = starts;
    for (std::size_t si = 0; si < starts.size(); ++si) {
      unsigned s = starts[si];
      unsigned end = (si + 1 < starts.size() ? starts[si + 1] - 1 : maxk);
      std::size_t sup = 0;
      while (sup < cts.size() && sup + 2 <= s) ++sup;
      if (sup == 0) continue;
      BigNat B_ = table.nB(Height::lev(4 * s + 3));
      BigNat c_min = table.regime().scale(B_, s, s);
      auto cl = to_ulong(c_min);
      if (!cl || *cl > 16)
        throw resource_error("build_full: minimal ct witness 2^c too large");
      for (std::size_t j = 0; j < sup; ++j) {
        unsigned lev_k = s + static_cast<unsigned>(j);
        if (lev_k > end || lev_k > maxk) break;
        Height h = Height::lev(4 * lev_k + 3);
        BigNat len = table.interval_len(h);
        auto l = to_ulong(len);
        if (!l || *l < *cl)
          throw resource_error("build_full: |I_L| below the minimal split norm c");
        // minimal creature: the 2^c strings spreading over the first c bits
        Creature c;
        c.tag = CreatureTag::ct;
        c.height = h;
        for (std::uint64_t v = 0; v < (1ull << *cl); ++v) c.atoms.push_back(BigNat(v));
        p.creatures[CondKey{cts[j]->id, h}] = std::move(c);
      }
    }
  }

  p.witnesses = recompute_witnesses(p, table);
  return p;
}

// ---------------------------------------------------------------------------
// restrict (Lemma 4.19 projection)
// ---------------------------------------------------------------------------

Condition restrict_condition(const Condition& p, const std::set<std::string>& B,
                             const ParamTable& table) {
  // hypothesis: B contains or misses the nm indices, same for ct
  bool nm_in = false, nm_out = false, ct_in = false, ct_out = false;
  for (const auto& d : p.support) {
    bool in = B.count(d.id) > 0;
    if (d.type == IndexType::nm) (in ? nm_in : nm_out) = true;
    if (d.type == IndexType::ct) (in ? ct_in : ct_out) = true;
  }
  if (nm_in && nm_out)
    throw precondition_error("restrict: B must contain or miss A_nm entirely");
  if (ct_in && ct_out)
    throw precondition_error("restrict: B must contain or miss A_ct entirely");
  Condition q;
  q.horizon = p.horizon;
  for (const auto& d : p.support)
    if (B.count(d.id)) q.support.push_back(d);
  for (const auto& [key, c] : p.creatures)
    if (B.count(key.index)) q.creatures[key] = c;
  if (ct_in) {
    q.frame_starts = p.frame_starts;
  } else {
    q.frame_starts.clear();
    for (unsigned k = 0; k <= p.max_level_k(); ++k) q.frame_starts.push_back(k);
  }
  if (nm_in) {
    q.halving = p.halving;
    for (const auto& [k, S] : p.nm_supports) {
      std::set<std::string> SS;
      for (const auto& id : S)
        if (B.count(id)) SS.insert(id);
      q.nm_supports[k] = SS;
    }
  }
  q.witnesses = recompute_witnesses(q, table);
  return q;
}

// ---------------------------------------------------------------------------
// disjointify (Lemma 4.12)
// ---------------------------------------------------------------------------

namespace {

BigNat ceil_div(const BigNat& a, const BigNat& b) {
  BigNat q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  if (r != 0) q += 1;
  return q;
}

bool disjointify_dfs(const std::vector<std::vector<BigNat>>& family,
                     const std::vector<unsigned long>& targets, std::size_t i,
                     std::set<BigNat>& used,
                     std::vector<std::vector<BigNat>>& out) {
  if (i == family.size()) return true;
  // choose targets[i] unused elements of family[i]: backtracking over
  // combinations, first-fit order
  std::vector<BigNat> avail;
  for (const auto& x : family[i])
    if (!used.count(x)) avail.push_back(x);
  unsigned long t = targets[i];
  if (avail.size() < t) return false;
  std::vector<std::size_t> comb(t);
  for (std::size_t j = 0; j < t; ++j) comb[j] = j;
  while (true) {
    for (std::size_t j = 0; j < t; ++j) used.insert(avail[comb[j]]);
    out[i].clear();
    for (std::size_t j = 0; j < t; ++j) out[i].push_back(avail[comb[j]]);
    if (disjointify_dfs(family, targets, i + 1, used, out)) return true;
    for (std::size_t j = 0; j < t; ++j) used.erase(avail[comb[j]]);
    // next combination
    std::size_t j = t;
    while (j > 0) {
      --j;
      if (comb[j] + (t - j) < avail.size()) {
        ++comb[j];
        for (std::size_t l = j + 1; l < t; ++l) comb[l] = comb[l - 1] + 1;
        break;
      }
      if (j == 0) return false;
    }
    if (t == 0) return false;
  }
}

}  // namespace

namespace {
std::vector<std::vector<BigNat>> disjointify_core(
    const std::vector<std::vector<BigNat>>& family, unsigned k, std::size_t cap) {
  BigNat shrink = pow_checked(BigNat(3), BigNat(4ul * k + 1), 1u << 20);
  std::vector<unsigned long> targets;
  std::size_t total = 0;
  for (const auto& X : family) {
    if (X.empty()) throw domain_error("disjointify: empty member");
    BigNat t = ceil_div(BigNat(static_cast<unsigned long>(X.size())), shrink);
    targets.push_back(mpz_get_ui(t.get_mpz_t()));
    total += X.size();
  }
  if (total > cap) throw resource_error("disjointify: family too large");
  // greedy, largest first
  std::vector<std::size_t> order(family.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return family[a].size() > family[b].size();
  });
  std::vector<std::vector<BigNat>> out(family.size());
  std::set<BigNat> used;
  bool ok = true;
  for (std::size_t i : order) {
    out[i].clear();
    for (const auto& x : family[i]) {
      if (out[i].size() >= targets[i]) break;
      if (!used.count(x)) {
        used.insert(x);
        out[i].push_back(x);
      }
    }
    if (out[i].size() < targets[i]) {
      ok = false;
      break;
    }
  }
  if (!ok) {
    // exhaustive fallback
    used.clear();
    for (auto& v : out) v.clear();
    if (!disjointify_dfs(family, targets, 0, used, out))
      throw certificate_error(
          "disjointify: no disjoint refinement meets the Lemma 4.12 bound");
  }
  // postcondition: disjoint, subsets, sizes
  std::set<BigNat> seen;
  for (std::size_t i = 0; i < family.size(); ++i) {
    if (out[i].size() < targets[i])
      throw certificate_error("disjointify: size bound violated");
    for (const auto& x : out[i]) {
      if (seen.count(x)) throw certificate_error("disjointify: overlap");
      seen.insert(x);
      if (std::find(family[i].begin(), family[i].end(), x) == family[i].end())
        throw certificate_error("disjointify: not a subset");
    }
    std::sort(out[i].begin(), out[i].end());
  }
  return out;
}
}  // namespace

std::vector<std::vector<BigNat>> disjointify(
    const std::vector<std::vector<BigNat>>& family, unsigned k, std::size_t cap) {
  if (family.size() > k)
    throw precondition_error("disjointify: |family| <= k required (Lemma 4.12)");
  return disjointify_core(family, k, cap);
}

// ---------------------------------------------------------------------------
// amalgamate (Lemma 4.13)
// ---------------------------------------------------------------------------

namespace {

// sublevels witnessing the stack norm: cells of norm >= the stack value,
// cut to the best prefix (largest set with mu >= value)
std::vector<BigNat> stack_witness(const Condition& p, const std::string& id,
                                  unsigned k, const ParamTable& table) {
  ExtNum value = nm_stack_norm(p, id, k, table);
  std::vector<BigNat> cells;
  for (const auto& [key, c] : p.creatures) {
    if (key.index != id || key.h.kind != Height::Kind::Sub || key.h.k != k) continue;
    if (c.atoms.size() <= 1) continue;
    ExtNum n = pointwise_norm(c, table, {});
    if (ge_or_eq(n, value)) cells.push_back(key.h.i);
  }
  std::sort(cells.begin(), cells.end());
  return cells;
}

}  // namespace

Condition amalgamate(const Condition& p, const Condition& q, const ParamTable& table) {
  // preconditions
  for (const auto& d : p.support)
    if (q.find_index(d.id)) throw precondition_error("amalgamate: overlapping supports");
  unsigned maxk = std::min(p.max_level_k(), q.max_level_k());
  for (unsigned k = 0; k <= maxk; ++k) {
    try {
      if (ext_cmp(p.halving_at(k), q.halving_at(k)) != Ord::EQ)
        throw precondition_error("amalgamate: halving parameters differ at k=" +
                                 std::to_string(k));
    } catch (const undecidable_error&) {
      // indistinguishable: accept as identical
    }
  }
  // k0: both relative widths <= 1/2 from k0 on
  unsigned k0 = 0;
  for (unsigned k = 0; k <= maxk; ++k) {
    auto width = [&](const Condition& c) {
      auto it = c.nm_supports.find(k);
      return Rat(it == c.nm_supports.end() ? 0 : it->second.size(), 4 * k + 1);
    };
    if (width(p) > Rat(1, 2) || width(q) > Rat(1, 2)) k0 = k + 1;
  }
  Condition r;
  r.horizon = p.horizon < q.horizon ? p.horizon : q.horizon;
  r.support = p.support;
  for (const auto& d : q.support) r.support.push_back(d);
  // finest common coarsening: starts present in both frames
  r.frame_starts.clear();
  for (unsigned s : p.frame_starts)
    if (q.is_segment_start(s)) r.frame_starts.push_back(s);
  r.halving = p.halving;
  // creatures: union, with trunks extended to 4 k0
  Height tl = Height::sub(k0, BigNat(0));
  auto absorb = [&](const Condition& src) {
    for (const auto& [key, c] : src.creatures) {
      Creature cc = c;
      if (key.h < tl && cc.atoms.size() > 1) cc = shrink_to_min(cc);
      r.creatures[key] = cc;
    }
  };
  absorb(p);
  absorb(q);
  // nm supports: union above the new trunk
  for (unsigned k = k0; k <= maxk; ++k) {
    std::set<std::string> S;
    auto itp = p.nm_supports.find(k);
    if (itp != p.nm_supports.end()) S.insert(itp->second.begin(), itp->second.end());
    auto itq = q.nm_supports.find(k);
    if (itq != q.nm_supports.end()) S.insert(itq->second.begin(), itq->second.end());
    if (!S.empty()) r.nm_supports[k] = S;
  }
  // lim sup modesty conflicts: at a height where both p and q are non-trivial,
  // keep the creature with the larger norm and shrink the other
  std::map<Height, std::vector<std::string>> nontrivial;
  for (const auto& [key, c] : r.creatures)
    if (c.atoms.size() > 1 && key.h.kind == Height::Kind::Lev)
      nontrivial[key.h].push_back(key.index);
  for (auto& [h, ids] : nontrivial) {
    if (ids.size() <= 1) continue;
    std::sort(ids.begin(), ids.end());
    std::string best = ids.front();
    ExtNum best_norm = ExtNum::exact(-1L);
    for (const auto& id : ids) {
      const IndexDecl* d = r.find_index(id);
      if (d->type == IndexType::ct) continue;  // segments handled by norms
      ExtNum n = limsup_norm(r, id, h, table);
      if (!ge_or_eq(best_norm, n)) {
        best = id;
        best_norm = n;
      }
    }
    for (const auto& id : ids) {
      const IndexDecl* d = r.find_index(id);
      if (d->type == IndexType::ct) continue;
      if (id != best)
        r.creatures[CondKey{id, h}] = shrink_to_min(r.creatures[CondKey{id, h}]);
    }
  }
  // nm levels: disjointify the stack-norm witnesses
  for (unsigned k = k0; k <= maxk; ++k) {
    auto it = r.nm_supports.find(k);
    if (it == r.nm_supports.end() || it->second.empty()) continue;
    std::vector<std::string> ids;
    std::vector<std::vector<BigNat>> witnesses;
    const Condition* srcs[2] = {&p, &q};
    for (const auto& id : it->second) {
      const Condition* src = p.find_index(id) ? srcs[0] : srcs[1];
      auto w = stack_witness(*src, id, k, table);
      if (w.empty()) continue;  // stack norm 0: nothing to protect
      ids.push_back(id);
      witnesses.push_back(std::move(w));
    }
    if (ids.empty()) continue;
    // the proof applies Lemma 4.12 with l = |S_p| + |S_q| <= 2k+1 sets
    auto disjoint = disjointify_core(witnesses, k, 1u << 20);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const Condition* src = p.find_index(ids[j]) ? srcs[0] : srcs[1];
      std::set<BigNat> keep(disjoint[j].begin(), disjoint[j].end());
      // shrink every listed cell outside the kept set to a singleton
      for (const auto& [key, c] : src->creatures) {
        if (key.index != ids[j] || key.h.kind != Height::Kind::Sub || key.h.k != k)
          continue;
        if (c.atoms.size() > 1 && !keep.count(key.h.i))
          r.creatures[key] = shrink_to_min(c);
      }
    }
  }
  r.witnesses = recompute_witnesses(r, table);
  return r;
}

// ---------------------------------------------------------------------------
// half / unhalve (Def 7.2, Lemma 7.3)
// ---------------------------------------------------------------------------

Condition half(const Condition& q, unsigned h, const ParamTable& table) {
  Condition r = q;
  unsigned maxk = q.max_level_k();
  for (unsigned k = h; k <= maxk; ++k) {
    auto it = q.nm_supports.find(k);
    if (it == q.nm_supports.end() || it->second.empty()) continue;
    std::optional<ExtNum> min_stack;
    for (const auto& id : it->second) {
      ExtNum v = nm_stack_norm(q, id, k, table);
      if (!min_stack || !ge_or_eq(v, *min_stack)) min_stack = v;
    }
    ExtNum d = q.halving_at(k);
    ExtNum inc = (*min_stack - d) / ExtNum::exact(2L);
    r.halving[k] = d + inc;
  }
  return r;
}

UnhalveResult unhalve(const Condition& q, const Condition& r, unsigned h,
                      const Rat& M, const ParamTable& table) {
  unsigned maxk = std::min(q.max_level_k(), r.max_level_k());
  ExtNum Mx = ExtNum::exact(M);
  // hypotheses
  for (unsigned k = h; k <= maxk; ++k)
    if (!ge_or_eq(nm_level_norm(q, k, table), Mx))
      throw precondition_error("unhalve: ||q(nm,4k)|| >= M fails at k=" +
                               std::to_string(k));
  Condition hq = half(q, h, table);
  auto sr = is_stronger(r, hq, table);
  if (!sr.stronger)
    throw precondition_error("unhalve: r <= half(q, >=4h) fails (" +
                             sr.first_failing + ")");
  if (r.trunk_k() != h)
    throw precondition_error("unhalve: trklgth(r) = 4h required");
  for (unsigned k = h; k <= maxk; ++k) {
    ExtNum n = nm_level_norm(r, k, table);
    try {
      if (ext_cmp(n, ExtNum::exact(0L)) != Ord::GT)
        throw precondition_error("unhalve: ||r(nm,4k)|| > 0 fails at k=" +
                                 std::to_string(k));
    } catch (const undecidable_error&) {
      throw precondition_error("unhalve: ||r(nm,4k)|| > 0 undecidable at k=" +
                               std::to_string(k));
    }
  }
  // h-dagger: minimal with ||r(nm,4k)|| > M for all 4k >= 4 h-dagger
  std::optional<unsigned> hd;
  for (unsigned cand = h; cand <= maxk; ++cand) {
    bool all = true;
    for (unsigned k = cand; k <= maxk; ++k) {
      try {
        if (ext_cmp(nm_level_norm(r, k, table), Mx) != Ord::GT) {
          all = false;
          break;
        }
      } catch (const undecidable_error&) {
        all = false;
        break;
      }
    }
    if (all) {
      hd = cand;
      break;
    }
  }
  if (!hd)
    throw horizon_error("unhalve: no h-dagger with ||r|| > M through the horizon");
  unsigned h_star = *hd + 1;
  UnhalveResult out{r, h_star};
  for (unsigned k = h; k < h_star; ++k) out.s.halving[k] = q.halving_at(k);
  // certificates (Lemma 7.3 (i)-(vi))
  auto si = is_stronger(out.s, q, table);
  if (!si.stronger)
    throw certificate_error("unhalve: (i) s <= q fails: " + si.first_failing);
  if (out.s.trunk_k() != h) throw certificate_error("unhalve: (ii) trklgth(s) != 4h");
  for (unsigned k = h_star; k <= maxk; ++k)
    if (!ge_or_eq(nm_level_norm(out.s, k, table), Mx))
      throw certificate_error("unhalve: (iii) ||s|| >= M fails at k=" +
                              std::to_string(k));
  BigNat nP_h = table.nP(Height::sub(h, BigNat(0)));
  for (unsigned k = h; k < h_star && k <= maxk; ++k) {
    BigNat nP_k = table.nP(Height::sub(k, BigNat(0)));
    ExtNum bound = Mx - ExtNum::exact(Rat(1) / Rat(nP_k));
    if (!ge_or_eq(nm_level_norm(out.s, k, table), bound))
      throw certificate_error("unhalve: (v) ||s|| >= M - 1/n^P fails at k=" +
                              std::to_string(k));
    (void)nP_h;
  }
  // (iv) and (vi): s is r with only halving parameters changed below 4 h*,
  // so the creatures (and hence the possibilities) coincide by construction;
  // spot-check (vi) via the counts.
  Height cut = Height::sub(std::min<unsigned>(h_star, maxk), BigNat(0));
  if (poss_count(out.s, cut, table) != poss_count(r, cut, table))
    throw certificate_error("unhalve: (vi) poss(s) != poss(r)");
  return out;
}

// ---------------------------------------------------------------------------
// xi_prepare (Def 10.16 / Lemma 10.17)
// ---------------------------------------------------------------------------

Condition xi_prepare(const Condition& p, const std::string& xi_id,
                     const ParamTable& table) {
  const IndexDecl* xi = p.find_index(xi_id);
  if (!xi || xi->type != IndexType::slalom)
    throw precondition_error("xi_prepare: '" + xi_id + "' is not a slalom index");
  Condition q = p;
  for (const auto& d : p.support) {
    if (d.type != IndexType::slalom || d.id == xi_id) continue;
    if (d.branch == xi->branch) continue;  // same pair: nothing to separate
    unsigned kd = divergence_level(xi->branch, d.branch);
    for (const auto& [key, c] : p.creatures) {
      if (key.index != d.id || key.h.typegroup() != TypeGroup::slalom) continue;
      unsigned k = key.h.n / 4;
      if (k < kd && c.atoms.size() > 1) q.creatures[key] = shrink_to_min(c);
    }
  }
  q.witnesses = recompute_witnesses(q, table);
  return q;
}

// ---------------------------------------------------------------------------
// recompute_witnesses
// ---------------------------------------------------------------------------

WitnessSchedule recompute_witnesses(const Condition& p, const ParamTable& table) {
  WitnessSchedule w;
  w.halving_eps = p.witnesses.halving_eps;
  // lim sup: for each index, greedy targets i = 1, 2, ... at increasing heights
  for (const auto& d : p.support) {
    std::vector<std::pair<unsigned, Height>> targets;
    unsigned next_i = 1;
    if (d.type == IndexType::ct) {
      for (unsigned s : p.frame_starts) {
        if (s > p.max_level_k()) break;
        Height h = Height::lev(4 * s + 3);
        if (!table.contains(h)) break;
        ExtNum n = limsup_norm(p, d.id, h, table);
        while (ge_or_eq(n, exact_unsigned(next_i))) {
          targets.push_back({next_i, h});
          ++next_i;
        }
      }
    } else if (typegroup_of(d.type) != TypeGroup::nm) {
      std::vector<Height> hs;
      for (const auto& [key, c] : p.creatures)
        if (key.index == d.id && c.atoms.size() > 1) hs.push_back(key.h);
      std::sort(hs.begin(), hs.end(), [](const Height& a, const Height& b) { return a < b; });
      for (const Height& h : hs) {
        ExtNum n = limsup_norm(p, d.id, h, table);
        while (ge_or_eq(n, exact_unsigned(next_i))) {
          targets.push_back({next_i, h});
          ++next_i;
        }
      }
    }
    if (!targets.empty()) w.limsup[d.id] = targets;
  }
  // lim inf: suffix minima of the compound norms
  unsigned maxk = p.max_level_k();
  std::vector<ExtNum> norms;
  for (unsigned k = 0; k <= maxk; ++k) norms.push_back(nm_level_norm(p, k, table));
  for (unsigned i = 1; i <= 8; ++i) {
    std::optional<unsigned> ki;
    for (unsigned k = 0; k <= maxk; ++k) {
      bool all = true;
      for (unsigned l = k; l <= maxk; ++l)
        if (!ge_or_eq(norms[l], exact_unsigned(i))) {
          all = false;
          break;
        }
      if (all) {
        ki = k;
        break;
      }
    }
    if (!ki) break;
    w.liminf.push_back({i, *ki});
  }
  // width bound: the final ratio
  Rat last(0);
  for (unsigned k = 0; k <= maxk; ++k) {
    auto it = p.nm_supports.find(k);
    if (it != p.nm_supports.end() && !it->second.empty()) {
      last = Rat(it->second.size(), 4 * k + 1);
      last.canonicalize();
    }
  }
  w.width_bound = last;
  return w;
}

}  // namespace creature
