#include "creature/trees.hpp"

#include <json.hpp>
#include <omp.h>

#include <algorithm>
#include <bit>

namespace creature {

FiniteTree FiniteTree::from_leaves(unsigned depth, std::vector<std::uint32_t> leaves) {
  if (depth > 30) throw resource_error("FiniteTree: depth > 30");
  FiniteTree t;
  t.depth = depth;
  t.leaves = std::move(leaves);
  std::sort(t.leaves.begin(), t.leaves.end());
  t.leaves.erase(std::unique(t.leaves.begin(), t.leaves.end()), t.leaves.end());
  for (auto v : t.leaves)
    if (depth < 32 && (v >> depth) != 0)
      throw validation_error("leaf exceeds 2^depth");
  if (t.leaves.empty()) throw domain_error("FiniteTree: no leaves (empty tree)");
  return t;
}

FiniteTree FiniteTree::full(unsigned depth) {
  std::vector<std::uint32_t> l(1u << depth);
  for (std::uint32_t i = 0; i < l.size(); ++i) l[i] = i;
  return from_leaves(depth, std::move(l));
}

bool FiniteTree::has_node(std::uint32_t s, unsigned len) const {
  return leaves_below(s, len) > 0;
}

std::size_t FiniteTree::leaves_below(std::uint32_t s, unsigned len) const {
  if (len > depth) throw domain_error("node longer than the tree depth");
  std::uint64_t lo = static_cast<std::uint64_t>(s) << (depth - len);
  std::uint64_t hi = static_cast<std::uint64_t>(s + 1) << (depth - len);
  auto a = std::lower_bound(leaves.begin(), leaves.end(), lo);
  auto b = std::lower_bound(leaves.begin(), leaves.end(), hi);
  return static_cast<std::size_t>(b - a);
}

std::vector<std::uint32_t> FiniteTree::level_nodes(unsigned len) const {
  std::vector<std::uint32_t> out;
  std::uint32_t prev = 0;
  bool first = true;
  for (auto v : leaves) {
    std::uint32_t node = v >> (depth - len);
    if (first || node != prev) out.push_back(node);
    prev = node;
    first = false;
  }
  return out;
}

Rat FiniteTree::measure() const {
  Rat m(static_cast<unsigned long>(leaves.size()), 1);
  m /= Rat(BigNat(1) << depth);
  m.canonicalize();
  return m;
}

Rat rel_measure(const FiniteTree& T, std::uint32_t s, unsigned len) {
  if (!T.has_node(s, len)) throw domain_error("rel_measure: s not in T");
  // 2^len * (leaves below s) / 2^depth
  Rat r(static_cast<unsigned long>(T.leaves_below(s, len)), 1);
  r *= Rat(BigNat(1) << len);
  r /= Rat(BigNat(1) << T.depth);
  r.canonicalize();
  return r;
}

SturdyReport sturdy_check(const FiniteTree& T) {
  SturdyReport rep;
  rep.sturdy = true;
  if (T.measure() != Rat(1, 2)) {
    rep.sturdy = false;
    rep.violations.push_back("measure is " + T.measure().get_str() +
                             ", not exactly 1/2");
  }
  for (const auto& [node, len] : T.dead_ends) {
    rep.sturdy = false;
    rep.violations.push_back("node of length " + std::to_string(len) +
                             " has no extension to depth m (relative measure 0)");
    (void)node;
  }
  return rep;
}

std::vector<std::uint32_t> translate_closure(const FiniteTree& T) {
  // r ranges over 2^{<=m} zero-padded, which at depth m covers every mask
  std::vector<bool> seen(1u << T.depth, false);
  for (std::uint32_t mask = 0; mask < (1u << T.depth); ++mask)
    for (auto s : T.leaves) seen[s ^ mask] = true;
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < seen.size(); ++v)
    if (seen[v]) out.push_back(v);
  return out;
}

PruneResult prune_avoid(const std::vector<std::uint64_t>& M, std::uint64_t E,
                        unsigned universe, const BigNat& nP, const BigNat& nB) {
  PruneResult out;
  out.intersect_before = intersect_norm(M, universe);
  for (auto H : M)
    if ((H & E) == 0) out.kept.push_back(H);
  out.empty_result = out.kept.empty();
  out.intersect_after = out.kept.empty() ? 0 : intersect_norm(out.kept, universe);
  unsigned esz = static_cast<unsigned>(std::popcount(E));
  if (out.intersect_after + esz < out.intersect_before)
    throw certificate_error(
        "Lemma 11.1: intersect-norm drop exceeds |E| (" +
        std::to_string(out.intersect_before) + " -> " +
        std::to_string(out.intersect_after) + ", |E| = " + std::to_string(esz) + ")");
  if (!out.empty_result && BigNat(esz) <= nP && nB >= 2) {
    // nn-norm drop <= 1/log2 n^B  <=>  before <= after * 2^{n^B}
    BigNat lhs(out.intersect_before);
    BigNat rhs = BigNat(out.intersect_after) * pow_checked(BigNat(2), nB, 4096);
    if (lhs > rhs)
      throw certificate_error("Lemma 11.1: nn-norm drop exceeds 1/log2 n^B");
  }
  return out;
}

Creature avoid_tree(const Creature& C, std::uint64_t T_mask, const ParamTable& table) {
  if (C.tag != CreatureTag::cn)
    throw precondition_error("avoid_tree applies to cn creatures");
  auto [lo, len] = table.interval(C.height);
  BigNat nB = table.nB(C.height);
  auto l = to_ulong(len);
  if (!l || *l > 6) throw resource_error("avoid_tree: 2^I beyond exact range");
  unsigned cells = 1u << *l;
  if (std::popcount(T_mask) * 2 < cells)
    throw precondition_error("avoid_tree: |T| >= 2^(|I|-1) required");
  BigNat delta = cn_delta(len, nB);
  // the proof's usable form of ||C|| >= 2: |C| >= 2 * Delta_L
  if (BigNat(static_cast<unsigned long>(C.atoms.size())) < 2 * delta)
    throw precondition_error("avoid_tree: |C| >= 2 Delta_L required (the form "
                             "of ||C|| >= 2 the proof uses)");
  Creature D = C;
  D.atoms.clear();
  std::size_t removed = 0;
  for (const auto& a : C.atoms) {
    std::uint64_t X = mpz_get_ui(a.get_mpz_t());
    if ((T_mask & ~X) != 0)
      D.atoms.push_back(a);  // T not a subset of X
    else
      ++removed;
  }
  if (D.atoms.empty())
    throw certificate_error("avoid_tree: D empty (outside the lemma's regime)");
  // (*_8)
  if (BigNat(static_cast<unsigned long>(removed)) > delta)
    throw certificate_error("Lemma 11.4 (*_8): |C \\ D| > Delta_L");
  // norm drop <= 1/(2^min I * n^B)  <=>  |C| <= |D| * (3 n^B)^{n^B}
  BigNat lhs(static_cast<unsigned long>(C.atoms.size()));
  BigNat rhs = BigNat(static_cast<unsigned long>(D.atoms.size())) *
               pow_checked(3 * nB, nB, 4096);
  (void)lo;
  if (lhs > rhs)
    throw certificate_error("Lemma 11.4 (i): cn-norm drop bound violated");
  return D;
}

Creature shrink_measure(const Creature& C,
                        const std::vector<std::vector<std::uint64_t>>& F,
                        unsigned omega_size, const ParamTable& table) {
  if (C.tag != CreatureTag::cn && C.tag != CreatureTag::slalom)
    throw precondition_error("shrink_measure applies to cn or slalom creatures");
  if (F.size() != C.atoms.size())
    throw precondition_error("shrink_measure: F must map every atom");
  if (omega_size == 0) throw precondition_error("shrink_measure: empty Omega");
  BigNat nB = table.nB(C.height);
  // successor height in the table
  const HeightRecord* next = nullptr;
  bool seen = false;
  for (const auto& r : table.records()) {
    if (seen) {
      next = &r;
      break;
    }
    if (r.h == C.height) seen = true;
  }
  if (!next) throw horizon_error("shrink_measure: no successor height in table");
  if (!next->nB.is_exact())
    throw resource_error("shrink_measure: n^B_{L+} magnitude-only");
  BigNat nB_next = *next->nB.exact;
  BigNat nS = table.nS(C.height);
  // feasibility hypothesis first: n^B_{L+} > n^B_L * 2^{n^S_L + 1}
  BigNat bound = nB * pow_checked(BigNat(2), nS + 1, 1u << 20);
  if (nB_next <= bound)
    throw precondition_error(
        "shrink_measure: feasibility n^B_{L+} > n^B_L 2^{n^S_L+1} fails");
  // each F(X) of measure >= 1/n^B
  auto weight = [&](const std::vector<std::uint64_t>& mask) {
    std::size_t c = 0;
    for (auto w : mask) c += std::popcount(w);
    return c;
  };
  for (const auto& m : F)
    if (BigNat(static_cast<unsigned long>(weight(m))) * nB <
        BigNat(omega_size))
      throw precondition_error("shrink_measure: some F(X) has measure < 1/n^B");
  if (C.atoms.size() > 24) throw resource_error("shrink_measure: |C| > 24");
  // exhaustive search over subsets in decreasing-size (= decreasing-norm) order
  unsigned n = static_cast<unsigned>(C.atoms.size());
  std::vector<std::uint32_t> subsets;
  for (std::uint32_t s = 1; s < (1u << n); ++s) subsets.push_back(s);
  std::sort(subsets.begin(), subsets.end(), [](std::uint32_t a, std::uint32_t b) {
    int pa = std::popcount(a), pb = std::popcount(b);
    if (pa != pb) return pa > pb;
    return a < b;
  });
  std::size_t words = F.empty() ? 0 : F.front().size();
  for (std::uint32_t s : subsets) {
    std::vector<std::uint64_t> inter(words, ~0ull);
    for (unsigned i = 0; i < n; ++i)
      if (s >> i & 1)
        for (std::size_t w = 0; w < words; ++w) inter[w] &= F[i][w];
    // mask off padding bits
    std::size_t total = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t m = inter[w];
      if (w == words - 1 && omega_size % 64)
        m &= (1ull << (omega_size % 64)) - 1;
      total += std::popcount(m);
    }
    // measure >= 1/n^B_{L+}
    if (BigNat(static_cast<unsigned long>(total)) * nB_next < BigNat(omega_size))
      continue;
    // norm drop <= 1/(2^min I * n^B) for cn (exact integer form), and the
    // analogous 1/n^B bound for slalom (which has no interval I_L)
    unsigned long dsz = static_cast<unsigned long>(std::popcount(s));
    if (C.tag == CreatureTag::cn) {
      BigNat rhs = BigNat(dsz) * pow_checked(3 * nB, nB, 4096);
      if (BigNat(static_cast<unsigned long>(n)) > rhs) continue;
    }
    Creature D = C;
    D.atoms.clear();
    for (unsigned i = 0; i < n; ++i)
      if (s >> i & 1) D.atoms.push_back(C.atoms[i]);
    return D;
  }
  throw certificate_error("shrink_measure: no qualifying D within the cap");
}

std::vector<std::uint32_t> fat_nodes_at_serial(const FiniteTree& T, const Rat& eps,
                                               unsigned k) {
  std::vector<std::uint32_t> fat;
  Rat threshold = (Rat(1) - eps) / Rat(BigNat(1) << k);
  for (auto s : T.level_nodes(k)) {
    Rat lam(static_cast<unsigned long>(T.leaves_below(s, k)), 1);
    lam /= Rat(BigNat(1) << T.depth);
    lam.canonicalize();
    if (lam >= threshold) fat.push_back(s);
  }
  return fat;
}

FatResult fat_nodes(const FiniteTree& T, const Rat& eps, unsigned k) {
  if (eps <= 0 || eps >= 1) throw precondition_error("fat_nodes: 0 < eps < 1");
  if (k > T.depth) throw precondition_error("fat_nodes: k <= depth");
  FatResult out;
  // fat nodes at depth k, fanned out over the level (serial twin kept for
  // the tests and the benchmark)
  auto nodes = T.level_nodes(k);
  std::vector<char> is_fat(nodes.size(), 0);
  Rat threshold = (Rat(1) - eps) / Rat(BigNat(1) << k);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(nodes.size()); ++i) {
    Rat lam(static_cast<unsigned long>(T.leaves_below(nodes[i], k)), 1);
    lam /= Rat(BigNat(1) << T.depth);
    lam.canonicalize();
    is_fat[i] = lam >= threshold ? 1 : 0;
  }
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (is_fat[i]) out.fat.push_back(nodes[i]);
  // k*: least k* with |T cap 2^j| / 2^j - mu eps^2 <= mu for all j in [k*, m]
  Rat mu = T.measure();
  if (mu <= 0) throw precondition_error("fat_nodes: measure(T) > 0 required");
  std::optional<unsigned> kstar;
  for (unsigned cand = 0; cand <= T.depth; ++cand) {
    bool all = true;
    for (unsigned j = cand; j <= T.depth; ++j) {
      Rat lvl(static_cast<unsigned long>(T.level_nodes(j).size()), 1);
      lvl /= Rat(BigNat(1) << j);
      lvl.canonicalize();
      if (lvl - mu * eps * eps > mu) {
        all = false;
        break;
      }
    }
    if (all) {
      kstar = cand;
      break;
    }
  }
  if (!kstar)
    throw horizon_error("fat_nodes: no k* within the depth (truncation artifact)");
  out.k_star = *kstar;
  if (k >= out.k_star) {
    // Lemma 12.2: |fat| >= |T cap 2^k| (1 - eps)
    Rat lhs(static_cast<unsigned long>(out.fat.size()), 1);
    Rat rhs = Rat(static_cast<unsigned long>(nodes.size()), 1) * (Rat(1) - eps);
    if (lhs < rhs)
      throw certificate_error("Lemma 12.2: fat-node count below (1-eps)|T cap 2^k|");
  }
  return out;
}

std::string tree_to_json(const FiniteTree& T) {
  nlohmann::json j;
  j["depth"] = T.depth;
  j["leaves"] = nlohmann::json::array();
  for (auto v : T.leaves) {
    std::string s;
    for (unsigned b = 0; b < T.depth; ++b)
      s += ((v >> (T.depth - 1 - b)) & 1) ? '1' : '0';
    j["leaves"].push_back(s);
  }
  return j.dump();
}

FiniteTree tree_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  unsigned depth = j.at("depth").get<unsigned>();
  std::vector<std::uint32_t> leaves;
  std::vector<std::pair<std::uint32_t, unsigned>> dead;
  for (const auto& e : j.at("leaves")) {
    std::string s = e.get<std::string>();
    std::uint32_t v = 0;
    for (char c : s) {
      if (c != '0' && c != '1') throw validation_error("leaf must be a bitstring");
      v = (v << 1) | (c == '1');
    }
    if (s.size() == depth)
      leaves.push_back(v);
    else if (s.size() < depth)
      dead.push_back({v, static_cast<unsigned>(s.size())});
    else
      throw validation_error("leaf longer than the declared depth");
  }
  FiniteTree t = FiniteTree::from_leaves(depth, std::move(leaves));
  t.dead_ends = std::move(dead);
  return t;
}

}  // namespace creature
