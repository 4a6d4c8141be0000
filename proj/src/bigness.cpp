#include "creature/bigness.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>

namespace creature {

Rat BignessSpec::drop() const {
  switch (kind) {
    case Kind::cBig:
    case Kind::cdBig:
      return Rat(1);
    case Kind::strong:
      return Rat(1, c);
    case Kind::eStrong:
    case Kind::eStrongCD:
      return Rat(1, e);
  }
  throw error("bad spec");
}

std::string BignessSpec::name() const {
  switch (kind) {
    case Kind::cBig: return "c-big(c=" + std::to_string(c) + ")";
    case Kind::cdBig:
      return "(c,d)-big(c=" + std::to_string(c) + ",d=" + std::to_string(d) + ")";
    case Kind::strong: return "strongly c-big(c=" + std::to_string(c) + ")";
    case Kind::eStrong:
      return "e-strongly c-big(e=" + std::to_string(e) + ",c=" + std::to_string(c) + ")";
    case Kind::eStrongCD:
      return "e-strongly (c,d)-big(e=" + std::to_string(e) +
             ",c=" + std::to_string(c) + ",d=" + std::to_string(d) + ")";
  }
  return "?";
}

namespace {

unsigned long msize(std::uint64_t m) { return static_cast<unsigned long>(std::popcount(m)); }

// |X|^q <= |Y|^q * base^(scale * p), all exact; drop = p/q >= 0.
bool log_ge_drop(unsigned long ysz, unsigned long xsz, const Rat& drop,
                 const BigNat& base, const BigNat& scale) {
  if (ysz == 0) return xsz == 0;
  BigNat p = drop.get_num(), q = drop.get_den();
  BigNat lhs = pow_checked(BigNat(xsz), q, 1u << 22);
  BigNat rhs = pow_checked(BigNat(ysz), q, 1u << 22) *
               pow_checked(base, scale * p, 1u << 22);
  return lhs <= rhs;
}

}  // namespace

SetNorm norm_log2() {
  SetNorm n;
  n.name = "log2";
  n.ge_drop = [](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    return log_ge_drop(msize(Y), msize(X), drop, BigNat(2), BigNat(1));
  };
  n.value = [](std::uint64_t m) { return ExtNum::log2(BigNat(msize(m))); };
  return n;
}

SetNorm norm_logc_div_c(unsigned c) {
  if (c < 2) throw precondition_error("log_c norm needs c >= 2");
  SetNorm n;
  n.name = "log_c/c(c=" + std::to_string(c) + ")";
  n.ge_drop = [c](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    // log_c|Y|/c >= log_c|X|/c - drop  <=>  |X|^q <= |Y|^q * c^(c p)
    return log_ge_drop(msize(Y), msize(X), drop, BigNat(c), BigNat(c));
  };
  n.value = [c](std::uint64_t m) {
    return ExtNum::log2(BigNat(msize(m))) /
           (ExtNum::exact(static_cast<long>(c)) * ExtNum::log2(BigNat(c)));
  };
  return n;
}

SetNorm norm_card() {
  SetNorm n;
  n.name = "card";
  n.ge_drop = [](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    // |Y| >= |X| - drop
    return Rat(msize(Y)) >= Rat(msize(X)) - drop;
  };
  n.value = [](std::uint64_t m) { return ExtNum::exact(Rat(msize(m))); };
  return n;
}

SetNorm norm_scaled(SetNorm base, unsigned e) {
  if (e == 0) throw precondition_error("norm_scaled: e >= 1");
  SetNorm n;
  n.name = base.name + "/" + std::to_string(e);
  auto inner = base.ge_drop;
  n.ge_drop = [inner, e](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    return inner(Y, X, drop * Rat(e));
  };
  auto innerv = base.value;
  n.value = [innerv, e](std::uint64_t m) {
    return innerv(m) / ExtNum::exact(static_cast<long>(e));
  };
  return n;
}

SetNorm norm_cell(const BigNat& nB) {
  if (nB < 2) throw precondition_error("cell norm needs n^B >= 2");
  SetNorm n;
  n.name = "cell(nB=" + nB.get_str() + ")";
  BigNat b = nB;
  n.ge_drop = [b](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    // log2|.|/(nB log2 nB) = log_nB|.|/nB
    return log_ge_drop(msize(Y), msize(X), drop, b, b);
  };
  n.value = [b](std::uint64_t m) { return cell_norm_of_size(BigNat(msize(m)), b); };
  return n;
}

SetNorm norm_slalom(const BigNat& nP, const BigNat& g) {
  if (g < 2) throw precondition_error("slalom norm needs g >= 2");
  SetNorm n;
  n.name = "slalom(nP=" + nP.get_str() + ")";
  BigNat p = nP, gg = g;
  n.ge_drop = [p, gg](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    // log2|.|/(nP log2 g): |X|^q <= |Y|^q * g^(nP p)
    return log_ge_drop(msize(Y), msize(X), drop, gg, p);
  };
  n.value = [p, gg](std::uint64_t m) {
    return ExtNum::log2(BigNat(msize(m))) /
           (ExtNum::exact(Rat(p)) * ExtNum::log2(gg));
  };
  return n;
}

namespace {
std::vector<std::uint64_t> creature_masks(const Creature& c, const ParamTable& table,
                                          unsigned* universe) {
  BigNat len = table.interval_len(c.height);
  auto l = to_ulong(len);
  if (!l || *l > 6) throw resource_error("norm over 2^I beyond 64 cells");
  if (universe) *universe = 1u << *l;
  std::vector<std::uint64_t> out;
  for (const auto& a : c.atoms) out.push_back(mpz_get_ui(a.get_mpz_t()));
  return out;
}
}  // namespace

SetNorm norm_nn(const Creature& c, const ParamTable& table) {
  unsigned universe = 0;
  auto masks = creature_masks(c, table, &universe);
  BigNat nB = table.nB(c.height);
  if (nB < 2) throw precondition_error("nn norm needs n^B >= 2");
  SetNorm n;
  n.name = "nn";
  auto inter = [masks, universe](std::uint64_t sub) -> unsigned long {
    std::vector<std::uint64_t> sel;
    for (std::size_t i = 0; i < masks.size(); ++i)
      if (sub >> i & 1) sel.push_back(masks[i]);
    if (sel.empty()) return 0;
    return intersect_norm(sel, universe);
  };
  n.ge_drop = [inter, nB](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    return log_ge_drop(inter(Y), inter(X), drop, nB, nB);
  };
  n.value = [inter, nB](std::uint64_t m) {
    unsigned long iv = inter(m);
    if (iv == 0) return ExtNum::exact(0L);
    return ExtNum::log2(BigNat(iv)) / (ExtNum::exact(Rat(nB)) * ExtNum::log2(nB));
  };
  return n;
}

SetNorm norm_cn(const Creature& c, const ParamTable& table) {
  auto [lo, len] = table.interval(c.height);
  BigNat nB = table.nB(c.height);
  BigNat delta = cn_delta(len, nB);
  BigNat scale = pow_checked(BigNat(2), lo, 4096) * nB * nB;  // * log2(3nB)
  BigNat b3 = 3 * nB;
  SetNorm n;
  n.name = "cn";
  n.ge_drop = [delta, scale, b3](std::uint64_t Y, std::uint64_t X, const Rat& drop) {
    // floored norm: true iff u(X) <= drop or u(Y) >= u(X) - drop, where
    // u(M) = (log2|M| - log2 Delta) / (2^lo nB^2 log2(3nB))
    BigNat p = drop.get_num(), q = drop.get_den();
    BigNat xq = pow_checked(BigNat(msize(X)), q, 1u << 22);
    BigNat floor_rhs = pow_checked(delta, q, 1u << 22) *
                       pow_checked(b3, scale * p, 1u << 22);
    if (xq <= floor_rhs) return true;  // u(X) <= drop
    if (msize(Y) == 0) return false;
    BigNat yq = pow_checked(BigNat(msize(Y)), q, 1u << 22);
    return xq <= yq * pow_checked(b3, scale * p, 1u << 22);
  };
  ExtNum den = ExtNum::exact(Rat(scale)) * ExtNum::log2(b3);
  ExtNum logd = ExtNum::log2(delta);
  n.value = [den, logd](std::uint64_t m) {
    if (msize(m) == 0) return ExtNum::exact(0L);
    return ((ExtNum::log2(BigNat(msize(m))) - logd) / den).max0();
  };
  return n;
}

// ---------------------------------------------------------------------------
// check_bigness
// ---------------------------------------------------------------------------

namespace {

// does some admissible block selection keep the norm within `drop` of X?
bool partition_ok(const std::vector<std::uint64_t>& blocks, std::uint64_t X,
                  const SetNorm& norm, const BignessSpec& spec) {
  Rat drop = spec.drop();
  switch (spec.kind) {
    case BignessSpec::Kind::cBig:
    case BignessSpec::Kind::strong:
    case BignessSpec::Kind::eStrong: {
      for (std::uint64_t b : blocks)
        if (b && norm.ge_drop(b, X, drop)) return true;
      return false;
    }
    case BignessSpec::Kind::cdBig:
    case BignessSpec::Kind::eStrongCD: {
      unsigned m = static_cast<unsigned>(blocks.size());
      for (std::uint32_t sel = 1; sel < (1u << m); ++sel) {
        if (static_cast<unsigned>(std::popcount(sel)) > spec.d) continue;
        std::uint64_t u = 0;
        for (unsigned j = 0; j < m; ++j)
          if (sel >> j & 1) u |= blocks[j];
        if (u && norm.ge_drop(u, X, drop)) return true;
      }
      return false;
    }
  }
  return false;
}

// first failing coloring of X in restricted-growth order, or empty
std::vector<std::uint8_t> scan_colorings(std::uint64_t X, unsigned n,
                                         const SetNorm& norm,
                                         const BignessSpec& spec) {
  std::vector<unsigned> pos;
  for (unsigned i = 0; i < n; ++i)
    if (X >> i & 1) pos.push_back(i);
  unsigned s = static_cast<unsigned>(pos.size());
  std::vector<std::uint8_t> a(s, 0);  // restricted growth string
  while (true) {
    // blocks from the RGS
    unsigned m = 0;
    for (unsigned i = 0; i < s; ++i) m = std::max<unsigned>(m, a[i] + 1);
    std::vector<std::uint64_t> blocks(m, 0);
    for (unsigned i = 0; i < s; ++i) blocks[a[i]] |= 1ull << pos[i];
    if (!partition_ok(blocks, X, norm, spec)) return a;
    // next RGS with values < c
    unsigned i = s;
    while (i-- > 0) {
      unsigned maxprev = 0;
      for (unsigned j = 0; j < i; ++j) maxprev = std::max<unsigned>(maxprev, a[j] + 1);
      unsigned limit = std::min(spec.c - 1, maxprev);
      if (a[i] < limit) {
        ++a[i];
        for (unsigned j = i + 1; j < s; ++j) a[j] = 0;
        break;
      }
      if (i == 0) return {};
    }
    if (s == 0) return {};
  }
}

}  // namespace

BignessResult check_bigness_serial(unsigned n, const SetNorm& norm,
                                   const BignessSpec& spec, unsigned cap) {
  if (n == 0) throw domain_error("check_bigness: empty creature");
  if (n > cap || n > 24)
    throw resource_error("check_bigness: |C| exceeds the exhaustive cap");
  if (spec.c < 1 || spec.d < 1 || spec.d > spec.c || spec.e < 1)
    throw precondition_error("bigness spec: c >= 1, 1 <= d <= c, e >= 1");
  BignessResult res;
  for (std::uint64_t X = 1; X < (1ull << n); ++X) {
    auto bad = scan_colorings(X, n, norm, spec);
    if (!bad.empty()) {
      res.holds = false;
      res.counter_X = X;
      res.coloring = bad;
      return res;
    }
  }
  return res;
}

BignessResult check_bigness(unsigned n, const SetNorm& norm, const BignessSpec& spec,
                            unsigned cap) {
  if (n == 0) throw domain_error("check_bigness: empty creature");
  if (n > cap || n > 24)
    throw resource_error("check_bigness: |C| exceeds the exhaustive cap");
  if (spec.c < 1 || spec.d < 1 || spec.d > spec.c || spec.e < 1)
    throw precondition_error("bigness spec: c >= 1, 1 <= d <= c, e >= 1");
  const std::uint64_t total = (1ull << n) - 1;
  std::uint64_t best_X = 0;
  bool found = false;
  // fan out over the subsets X; each thread keeps its minimal failing X and
  // the global minimum is reduced at the end (deterministic result)
#pragma omp parallel
  {
    std::uint64_t local_best = UINT64_MAX;
#pragma omp for schedule(dynamic, 64) nowait
    for (long xi = 1; xi <= static_cast<long>(total); ++xi) {
      std::uint64_t X = static_cast<std::uint64_t>(xi);
      if (X >= local_best) continue;
      if (!scan_colorings(X, n, norm, spec).empty()) local_best = X;
    }
#pragma omp critical
    {
      if (local_best != UINT64_MAX && (!found || local_best < best_X)) {
        found = true;
        best_X = local_best;
      }
    }
  }
  BignessResult res;
  if (found) {
    res.holds = false;
    res.counter_X = best_X;
    res.coloring = scan_colorings(best_X, n, norm, spec);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Lemma 5.3 witness
// ---------------------------------------------------------------------------

std::vector<unsigned> cd_witness_from_b(const std::vector<std::uint64_t>& partition,
                                        const SetNorm& norm, unsigned b, unsigned d) {
  unsigned c = static_cast<unsigned>(partition.size());
  if (b == 0 || d == 0) throw precondition_error("cd_witness: b, d >= 1");
  if (c > d * b) throw precondition_error("cd_witness: c/d <= b required");
  std::uint64_t X = 0;
  for (auto m : partition) X |= m;
  if (X == 0) throw domain_error("cd_witness: empty union");
  // Y_j = union of X_{i b + j}, j = 0..b-1 (empty parts beyond c)
  std::optional<unsigned> j0;
  for (unsigned j = 0; j < b; ++j) {
    std::uint64_t Y = 0;
    for (unsigned i = 0; i * b + j < c; ++i) Y |= partition[i * b + j];
    if (Y && norm.ge_drop(Y, X, Rat(1))) {
      j0 = j;
      break;
    }
  }
  if (!j0)
    throw certificate_error(
        "cd_witness: no Y_j within 1 of the whole (norm not b-big on X?)");
  std::vector<unsigned> tuple;
  for (unsigned i = 0; i < d; ++i) {
    unsigned idx = i * b + *j0;
    if (idx < c) tuple.push_back(idx);
  }
  // pad with arbitrary existing indices (lowest first, no duplicates)
  for (unsigned i = 0; tuple.size() < d && i < c; ++i)
    if (std::find(tuple.begin(), tuple.end(), i) == tuple.end()) tuple.push_back(i);
  // certificate: the union over the tuple keeps the norm within 1
  std::uint64_t U = 0;
  for (unsigned i : tuple) U |= partition[i];
  if (!norm.ge_drop(U, X, Rat(1)))
    throw certificate_error("cd_witness: returned tuple fails the union bound");
  std::sort(tuple.begin(), tuple.end());
  return tuple;
}

// ---------------------------------------------------------------------------
// Cor 5.7 homogenization
// ---------------------------------------------------------------------------

Creature homogenize_creature(const Creature& C, const std::vector<unsigned>& coloring,
                             const SetNorm& norm, const Rat* assert_drop) {
  if (C.atoms.empty()) throw domain_error("homogenize: empty creature");
  if (coloring.size() != C.atoms.size())
    throw precondition_error("homogenize: coloring must cover the creature");
  unsigned colors = *std::max_element(coloring.begin(), coloring.end()) + 1;
  if (C.atoms.size() > 63) throw resource_error("homogenize: |C| > 63");
  std::vector<std::uint64_t> classes(colors, 0);
  for (std::size_t i = 0; i < coloring.size(); ++i)
    classes[coloring[i]] |= 1ull << i;
  std::uint64_t full = (1ull << C.atoms.size()) - 1;
  unsigned best = 0;
  std::optional<ExtNum> best_v;
  for (unsigned col = 0; col < colors; ++col) {
    if (!classes[col]) continue;
    ExtNum v = norm.value(classes[col]);
    bool better = false;
    if (!best_v) {
      better = true;
    } else {
      try {
        better = ext_cmp(v, *best_v) == Ord::GT;
      } catch (const undecidable_error&) {
        better = false;  // ties break toward the lower color index
      }
    }
    if (better) {
      best = col;
      best_v = v;
    }
  }
  if (assert_drop && !norm.ge_drop(classes[best], full, *assert_drop))
    throw certificate_error("homogenize: best class drops the norm beyond " +
                            assert_drop->get_str());
  Creature out = C;
  out.atoms.clear();
  for (std::size_t i = 0; i < C.atoms.size(); ++i)
    if (classes[best] >> i & 1) out.atoms.push_back(C.atoms[i]);
  return out;
}

// ---------------------------------------------------------------------------
// Lemma 5.8 product homogenization
// ---------------------------------------------------------------------------

std::map<Height, Creature> homogenize_product(
    const std::vector<Height>& H, const std::map<Height, Creature>& creatures,
    const std::function<unsigned(const std::vector<std::size_t>&)>& F,
    const ParamTable& table) {
  if (H.empty()) throw precondition_error("homogenize_product: H nonempty");
  for (const Height& h : H)
    if (h.typegroup() == TypeGroup::ct)
      throw precondition_error("homogenize_product: H must avoid heights_ct");
  std::vector<Height> hs = H;
  std::sort(hs.begin(), hs.end(), [](const Height& a, const Height& b) { return a < b; });
  std::map<Height, Creature> D = creatures;
  // pinned representative index per processed height
  std::map<Height, std::size_t> pinned;  // representative atoms above the current height
  for (std::size_t mi = hs.size(); mi-- > 0;) {
    const Height& M = hs[mi];
    const Creature& CM = D.at(M);
    // enumerate tuples over the heights below M (current D), pinned above
    std::vector<std::size_t> lower;  // positions of heights below M in hs
    for (std::size_t j = 0; j < mi; ++j) lower.push_back(j);
    // signatures
    std::map<std::vector<unsigned>, std::uint64_t> groups;
    if (CM.atoms.size() > 63)
      throw resource_error("homogenize_product: creature too large");
    for (std::size_t a = 0; a < CM.atoms.size(); ++a) {
      std::vector<unsigned> sig;
      std::vector<std::size_t> idx(hs.size(), 0);
      for (const auto& [h, i] : pinned) {
        for (std::size_t j = 0; j < hs.size(); ++j)
          if (hs[j] == h) idx[j] = i;
      }
      idx[mi] = a;
      // odometer over the lower heights
      std::vector<std::size_t> li(lower.size(), 0);
      while (true) {
        for (std::size_t j = 0; j < lower.size(); ++j) idx[lower[j]] = li[j];
        sig.push_back(F(idx));
        if (sig.size() > (1u << 20))
          throw resource_error("homogenize_product: product too large");
        bool done = true;
        for (std::size_t j = lower.size(); j-- > 0;) {
          if (++li[j] < D.at(hs[lower[j]]).atoms.size()) {
            done = false;
            break;
          }
          li[j] = 0;
        }
        if (done || lower.empty()) break;
      }
      groups[sig] |= 1ull << a;
    }
    // the best group by the height's own norm
    BigNat nB = table.nB(M);
    SetNorm norm = M.typegroup() == TypeGroup::nm ? norm_cell(nB) : norm_log2();
    if (M.typegroup() == TypeGroup::star_n) {
      norm = CM.tag == CreatureTag::nn ? norm_nn(CM, table) : norm_cn(CM, table);
    }
    std::uint64_t full = (1ull << CM.atoms.size()) - 1;
    std::optional<ExtNum> best_v;
    std::uint64_t best_mask = 0;
    for (const auto& [sig, mask] : groups) {
      ExtNum v = norm.value(mask);
      bool better = !best_v;
      if (best_v) {
        try {
          better = ext_cmp(v, *best_v) == Ord::GT;
        } catch (const undecidable_error&) {
          better = false;
        }
      }
      if (better) {
        best_v = v;
        best_mask = mask;
      }
    }
    // norm drop <= 1/n^B_M, a checked certificate
    if (!norm.ge_drop(best_mask, full, Rat(1) / Rat(nB)))
      throw certificate_error(
          "homogenize_product: norm drop beyond 1/n^B at " + to_string(M) +
          " (the supplied norm lacks the required strong bigness)");
    Creature DM = CM;
    DM.atoms.clear();
    std::size_t rep = SIZE_MAX;
    for (std::size_t a = 0; a < CM.atoms.size(); ++a)
      if (best_mask >> a & 1) {
        DM.atoms.push_back(CM.atoms[a]);
        if (rep == SIZE_MAX) rep = a;
      }
    D[M] = DM;
    pinned[M] = rep;
  }
  // final certificate: F constant on the product of the D_L
  std::vector<std::vector<std::size_t>> choices(hs.size());
  for (std::size_t j = 0; j < hs.size(); ++j) {
    const Creature& orig = creatures.at(hs[j]);
    const Creature& kept = D.at(hs[j]);
    for (const auto& a : kept.atoms) {
      auto it = std::find(orig.atoms.begin(), orig.atoms.end(), a);
      choices[j].push_back(static_cast<std::size_t>(it - orig.atoms.begin()));
    }
  }
  std::optional<unsigned> value;
  std::vector<std::size_t> li(hs.size(), 0);
  while (true) {
    std::vector<std::size_t> idx(hs.size());
    for (std::size_t j = 0; j < hs.size(); ++j) idx[j] = choices[j][li[j]];
    unsigned v = F(idx);
    if (!value) value = v;
    if (*value != v)
      throw certificate_error("homogenize_product: F not constant on the output");
    bool done = true;
    for (std::size_t j = hs.size(); j-- > 0;) {
      if (++li[j] < choices[j].size()) {
        done = false;
        break;
      }
      li[j] = 0;
    }
    if (done) break;
  }
  return D;
}

}  // namespace creature
