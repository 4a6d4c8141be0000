#include "creature/cover.hpp"

#include <omp.h>

#include <algorithm>

namespace creature {

void SlalomInstance::check() const {
  if (f.empty() || f.size() != g.size())
    throw validation_error("slalom instance: f and g must have equal length >= 1");
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (g[k] == 0 || f[k] == 0)
      throw validation_error("slalom instance: 0 < g(k) and 0 < f(k)");
    if (g[k] > f[k])
      throw validation_error("slalom instance: g(k) <= f(k) required");
  }
}

BigNat SlalomInstance::point_count() const {
  BigNat n = 1;
  for (unsigned v : f) n *= v;
  return n;
}

BigNat volume_lower_bound(const SlalomInstance& inst) {
  BigNat num = 1, den = 1;
  for (unsigned v : inst.f) num *= v;
  for (unsigned v : inst.g) den *= v;
  BigNat q, r;
  mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
  if (r != 0) q += 1;
  return q;
}

namespace {

// Points are mixed-radix codes; boxes are canonical maximal slaloms
// (|S_k| = g(k)). A box is stored as the sorted vector of point codes it
// covers, as a bitmask over the point list.
struct Instance {
  const SlalomInstance& in;
  unsigned K;
  unsigned points;                       // prod f
  std::vector<unsigned> radix;           // f
  std::vector<Slalom> boxes;             // canonical g-sized boxes
  std::vector<std::vector<std::uint64_t>> box_mask;  // coverage bitmask
  unsigned words;

  explicit Instance(const SlalomInstance& i, std::size_t cap) : in(i) {
    i.check();
    K = i.K();
    BigNat pc = i.point_count();
    auto pc_ul = to_ulong(pc);
    if (!pc_ul || *pc_ul > cap)
      throw resource_error("min_cover: point space exceeds the cap");
    points = static_cast<unsigned>(*pc_ul);
    radix = i.f;
    words = (points + 63) / 64;
    // enumerate boxes = products of g(k)-subsets of f(k), lexicographically
    std::vector<std::vector<std::vector<unsigned>>> axis_subsets(K);
    for (unsigned k = 0; k < K; ++k) {
      std::vector<unsigned> comb(i.g[k]);
      for (unsigned j = 0; j < i.g[k]; ++j) comb[j] = j;
      while (true) {
        axis_subsets[k].push_back(comb);
        // next lexicographic combination of size g[k] from f[k]
        int j = static_cast<int>(i.g[k]) - 1;
        while (j >= 0 && comb[j] == i.f[k] - i.g[k] + j) --j;
        if (j < 0) break;
        ++comb[j];
        for (unsigned l = j + 1; l < i.g[k]; ++l) comb[l] = comb[l - 1] + 1;
      }
      if (axis_subsets[k].size() > cap)
        throw resource_error("min_cover: axis subset space exceeds the cap");
    }
    // cartesian product of axis subsets
    std::vector<std::size_t> idx(K, 0);
    bool done = false;
    while (!done) {
      Slalom s(K);
      for (unsigned k = 0; k < K; ++k) s[k] = axis_subsets[k][idx[k]];
      boxes.push_back(s);
      if (boxes.size() > cap)
        throw resource_error("min_cover: box space exceeds the cap");
      done = true;
      for (unsigned j = K; j-- > 0;) {
        if (++idx[j] < axis_subsets[j].size()) {
          done = false;
          break;
        }
        idx[j] = 0;
      }
    }
    // coverage masks
    box_mask.assign(boxes.size(), std::vector<std::uint64_t>(words, 0));
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      for (unsigned p = 0; p < points; ++p) {
        unsigned rest = p;
        bool inside = true;
        for (unsigned k = 0; k < K; ++k) {
          unsigned coord = rest % radix[k];
          rest /= radix[k];
          const auto& S = boxes[b][k];
          if (!std::binary_search(S.begin(), S.end(), coord)) {
            inside = false;
            break;
          }
        }
        if (inside) box_mask[b][p / 64] |= 1ull << (p % 64);
      }
    }
  }

  bool all_covered(const std::vector<std::uint64_t>& cov) const {
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t want = ~0ull;
      if (w == words - 1 && points % 64) want = (1ull << (points % 64)) - 1;
      if ((cov[w] & want) != want) return false;
    }
    return true;
  }

  int first_uncovered(const std::vector<std::uint64_t>& cov) const {
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t want = ~0ull;
      if (w == words - 1 && points % 64) want = (1ull << (points % 64)) - 1;
      std::uint64_t miss = want & ~cov[w];
      if (miss) return static_cast<int>(w * 64 + std::countr_zero(miss));
    }
    return -1;
  }

  unsigned uncovered_count(const std::vector<std::uint64_t>& cov) const {
    unsigned n = 0;
    for (unsigned w = 0; w < words; ++w) {
      std::uint64_t want = ~0ull;
      if (w == words - 1 && points % 64) want = (1ull << (points % 64)) - 1;
      n += std::popcount(want & ~cov[w]);
    }
    return n;
  }
};

unsigned max_box_cover(const Instance& inst) {
  unsigned m = 1;
  BigNat prod = 1;
  for (unsigned g : inst.in.g) prod *= g;
  auto ul = to_ulong(prod);
  m = ul ? static_cast<unsigned>(std::min<unsigned long>(*ul, inst.points)) : inst.points;
  return std::max(1u, m);
}

// DFS: can the remaining points be covered with `left` more boxes?
bool cover_dfs(const Instance& inst, std::vector<std::uint64_t>& cov, unsigned left,
               std::vector<std::size_t>& picked) {
  int fu = inst.first_uncovered(cov);
  if (fu < 0) return true;
  if (left == 0) return false;
  unsigned maxper = max_box_cover(inst);
  if (inst.uncovered_count(cov) > left * maxper) return false;
  for (std::size_t b = 0; b < inst.boxes.size(); ++b) {
    if (!(inst.box_mask[b][fu / 64] >> (fu % 64) & 1)) continue;
    std::vector<std::uint64_t> next = cov;
    for (unsigned w = 0; w < inst.words; ++w) next[w] |= inst.box_mask[b][w];
    picked.push_back(b);
    if (cover_dfs(inst, next, left - 1, picked)) return true;
    picked.pop_back();
  }
  return false;
}

CoverResult solve_exact(const Instance& inst, bool parallel) {
  SlalomInstance tmp{inst.in.f, inst.in.g};
  BigNat lb = volume_lower_bound(tmp);
  auto lb_ul = to_ulong(lb);
  unsigned t = lb_ul ? static_cast<unsigned>(*lb_ul) : 1;
  while (true) {
    std::vector<std::uint64_t> cov(inst.words, 0);
    // branch over boxes covering point 0 at the top level (all minimal
    // covers contain one; the lexicographically first solution is kept)
    std::vector<std::size_t> top;
    for (std::size_t b = 0; b < inst.boxes.size(); ++b)
      if (inst.box_mask[b][0] & 1) top.push_back(b);
    std::vector<std::size_t> best_pick;
    bool found = false;
    if (!parallel) {
      for (std::size_t b : top) {
        std::vector<std::uint64_t> next = cov;
        for (unsigned w = 0; w < inst.words; ++w) next[w] |= inst.box_mask[b][w];
        std::vector<std::size_t> picked{b};
        if (cover_dfs(inst, next, t - 1, picked)) {
          best_pick = picked;
          found = true;
          break;
        }
      }
    } else {
      // deterministic: keep the branch with the smallest top index that
      // succeeds
      std::size_t winner = SIZE_MAX;
      std::vector<std::vector<std::size_t>> wins(top.size());
#pragma omp parallel for schedule(dynamic)
      for (long i = 0; i < static_cast<long>(top.size()); ++i) {
        bool skip;
#pragma omp critical
        skip = winner <= static_cast<std::size_t>(i);
        if (skip) continue;
        std::vector<std::uint64_t> next = cov;
        for (unsigned w = 0; w < inst.words; ++w)
          next[w] |= inst.box_mask[top[i]][w];
        std::vector<std::size_t> picked{top[i]};
        if (cover_dfs(inst, next, t - 1, picked)) {
#pragma omp critical
          {
            if (static_cast<std::size_t>(i) < winner) {
              winner = i;
              wins[i] = picked;
            }
          }
        }
      }
      if (winner != SIZE_MAX) {
        best_pick = wins[winner];
        found = true;
      }
    }
    if (found) {
      CoverResult out;
      out.count = t;
      for (std::size_t b : best_pick) out.family.push_back(inst.boxes[b]);
      return out;
    }
    ++t;
    if (t > inst.points + 1)
      throw error("min_cover: internal failure (no cover found)");
  }
}

}  // namespace

CoverResult min_cover_exact(const SlalomInstance& inst, std::size_t cap) {
  Instance I(inst, cap);
  return solve_exact(I, true);
}

CoverResult min_cover_exact_serial(const SlalomInstance& inst, std::size_t cap) {
  Instance I(inst, cap);
  return solve_exact(I, false);
}

CoverResult min_cover_greedy(const SlalomInstance& inst) {
  Instance I(inst, 1u << 22);
  std::vector<std::uint64_t> cov(I.words, 0);
  CoverResult out;
  while (!I.all_covered(cov)) {
    std::size_t best = SIZE_MAX;
    unsigned best_gain = 0;
    for (std::size_t b = 0; b < I.boxes.size(); ++b) {
      unsigned gain = 0;
      for (unsigned w = 0; w < I.words; ++w)
        gain += std::popcount(I.box_mask[b][w] & ~cov[w]);
      if (gain > best_gain) {
        best_gain = gain;
        best = b;  // lexicographic tie-break: first maximiser wins
      }
    }
    if (best == SIZE_MAX) throw error("greedy: no progress");
    for (unsigned w = 0; w < I.words; ++w) cov[w] |= I.box_mask[best][w];
    out.family.push_back(I.boxes[best]);
    ++out.count;
  }
  return out;
}

bool check_monotone(const SlalomInstance& A, const SlalomInstance& B) {
  A.check();
  B.check();
  if (A.K() != B.K())
    throw precondition_error("check_monotone: instances of different length");
  for (unsigned k = 0; k < A.K(); ++k)
    if (!(A.f[k] <= B.f[k] && A.g[k] >= B.g[k]))
      throw precondition_error("check_monotone: f_A <= f_B, g_A >= g_B required");
  unsigned a = min_cover_exact(A).count;
  unsigned b = min_cover_exact(B).count;
  if (a > b)
    throw certificate_error("Fact 10.2 violated: min_cover(A) > min_cover(B)");
  return true;
}

// ---------------------------------------------------------------------------
// codec
// ---------------------------------------------------------------------------

Codec make_codec(const ParamTable& table, unsigned K) {
  Codec c;
  unsigned prev = 0;
  for (unsigned k = 0; k < K; ++k) {
    BigNat nS = table.nS(Height::lev(4 * k + 2));
    if (nS < 1) throw validation_error("codec: n^S must be positive");
    // ceil(log2 nS) + 1atop the previous cut
    std::size_t cl = nS == 1 ? 0 : bit_length(nS - 1);
    unsigned zk = prev + static_cast<unsigned>(cl) + 1;
    c.z.push_back(zk);
    c.nS.push_back(nS);
    prev = zk;
  }
  return c;
}

std::vector<bool> codec_encode(const Codec& c, const std::vector<BigNat>& t) {
  if (t.size() != c.z.size())
    throw precondition_error("codec_encode: t must have K entries");
  std::vector<bool> s;
  unsigned prev = 0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] >= c.nS[k]) throw domain_error("codec: t(k) >= n^S_{4k+2}");
    unsigned width = c.z[k] - prev;
    // big-endian block of `width` bits (one spare bit per block)
    for (unsigned b = width; b-- > 0;)
      s.push_back(mpz_tstbit(t[k].get_mpz_t(), b) != 0);
    prev = c.z[k];
  }
  return s;
}

std::vector<BigNat> codec_decode(const Codec& c, const std::vector<bool>& s,
                                 unsigned k) {
  if (k >= c.z.size()) throw precondition_error("codec_decode: k beyond K");
  if (s.size() < c.z[k])
    throw precondition_error("codec_decode: s shorter than z(k)");
  std::vector<BigNat> t;
  unsigned prev = 0;
  for (unsigned j = 0; j <= k; ++j) {
    unsigned width = c.z[j] - prev;
    BigNat v = 0;
    for (unsigned b = 0; b < width; ++b) {
      v <<= 1;
      if (s[prev + b]) v += 1;
    }
    t.push_back(v);
    prev = c.z[j];
  }
  return t;
}

}  // namespace creature
