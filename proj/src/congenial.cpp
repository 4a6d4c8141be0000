#include "creature/congenial.hpp"

#include <json.hpp>

namespace creature {

bool branch_bit(const std::string& branch, unsigned j) {
  if (j < branch.size()) {
    char c = branch[j];
    if (c != '0' && c != '1') throw validation_error("branch must be binary");
    return c == '1';
  }
  return false;
}

BigNat branch_rank(const std::string& branch, unsigned k) {
  BigNat v = 0;
  for (unsigned j = 0; j < k; ++j) v = v * 2 + (branch_bit(branch, j) ? 1 : 0);
  return v + 1;
}

std::pair<TowerNum, TowerNum> gen_pair(const std::string& branch, unsigned k,
                                       const ParamTable& table) {
  for (char c : branch)
    if (c != '0' && c != '1') throw validation_error("branch must be binary");
  // finite prefixes complete with zeros; the stated precondition |branch| >= k
  // is then met by the completed branch
  BigNat i = branch_rank(branch, k);
  Height h = Height::lev(4 * k + 2);
  BigNat B = table.nB(h);
  if (B < 2) throw validation_error("congenial pairs need n^B >= 2");
  BigNat e = B + 1;
  // tops 3^(2i) and 3^(2i-1)
  BigNat two_i = 2 * i;
  BigNat top_f = pow_checked(BigNat(3), two_i, 1u << 22);
  BigNat top_g = pow_checked(BigNat(3), two_i - 1, 1u << 22);
  return {TowerNum::tower(B, e, top_f), TowerNum::tower(B, e, top_g)};
}

CongenialPair gen_member(const std::string& branch, unsigned horizon,
                         const ParamTable& table) {
  CongenialPair p;
  p.branch = branch;
  p.horizon = horizon;
  for (unsigned k = 0; k <= horizon; ++k) p.values.push_back(gen_pair(branch, k, table));
  return p;
}

ExtNum log2_g(const std::string& branch, unsigned k, const ParamTable& table) {
  return gen_pair(branch, k, table).second.log2();
}

unsigned divergence_level(const std::string& a, const std::string& b) {
  unsigned n = std::max(a.size(), b.size());
  for (unsigned j = 0; j < n; ++j)
    if (branch_bit(a, j) != branch_bit(b, j)) return j + 1;
  throw validation_error("branches complete to the same function pair: '" + a +
                         "' vs '" + b + "'");
}

namespace {

// n^S_{4k+2} per the Def 4.8 formula, as a tower over the table's n^B.
TowerNum slalom_nS_tower(unsigned k, const ParamTable& table) {
  Height h = Height::lev(4 * k + 2);
  BigNat B = table.nB(h);
  BigNat e = B + 1;
  if (k + 1 >= 32) throw resource_error("slalom n^S: k too large");
  BigNat top = pow_checked(BigNat(3), BigNat(1ul << (k + 1)), 1u << 22);
  return TowerNum::tower(B, e, top);
}

}  // namespace

FamilyReport validate_family(const std::vector<CongenialPair>& pairs,
                             unsigned horizon, const ParamTable& table) {
  FamilyReport rep;
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    const auto& p = pairs[a];
    if (p.horizon < horizon || p.values.size() <= horizon) {
      rep.fail("pair '" + p.branch + "' not represented to horizon");
      continue;
    }
    std::optional<ExtNum> prev_ratio;
    for (unsigned k = 0; k <= horizon; ++k) {
      const auto& [f, g] = p.values[k];
      Height h = Height::lev(4 * k + 2);
      BigNat B = table.nB(h);
      // (i) n^B <= g < f <= n^S
      if (tower_cmp(TowerNum::flat_value(B), g) == Ord::GT)
        rep.fail("(i) n^B <= g fails for '" + p.branch + "' at k=" + std::to_string(k));
      if (tower_cmp(g, f) != Ord::LT)
        rep.fail("(i) g < f fails for '" + p.branch + "' at k=" + std::to_string(k));
      if (tower_cmp(f, slalom_nS_tower(k, table)) == Ord::GT)
        rep.fail("(i) f <= n^S fails for '" + p.branch + "' at k=" + std::to_string(k));
      // (ii) finite-horizon proxy: log2 f / (log2 g)^2 >= e_k^3 / log2 n^B,
      // nondecreasing in k. For towers this ratio is e_k^(3^(2i-1)) / log2 B.
      BigNat e = B + 1;
      BigNat i = branch_rank(p.branch, k);
      BigNat expo = pow_checked(BigNat(3), 2 * i - 1, 1u << 22);
      ExtNum ratio = ExtNum::exact(Rat(pow_checked(e, expo, 1u << 22))) / ExtNum::log2(B);
      ExtNum floor_val = ExtNum::exact(Rat(e * e * e)) / ExtNum::log2(B);
      if (!ext_ge(ratio, floor_val))
        rep.fail("(ii) proxy ratio below e_k^3/log2 n^B for '" + p.branch + "'");
      if (prev_ratio && !ext_ge(ratio, *prev_ratio))
        rep.fail("(ii) proxy ratio decreased at k=" + std::to_string(k));
      prev_ratio = ratio;
    }
  }
  // (iii): pairwise, a single stable direction from the divergence level on
  for (std::size_t a = 0; a < pairs.size(); ++a) {
    for (std::size_t b = a + 1; b < pairs.size(); ++b) {
      const auto& P = pairs[a];
      const auto& Q = pairs[b];
      if (P.values.size() <= horizon || Q.values.size() <= horizon) continue;
      unsigned kd;
      try {
        kd = divergence_level(P.branch, Q.branch);
      } catch (const validation_error& e) {
        rep.fail(e.what());
        continue;
      }
      int direction = 0;  // +1: f_P^2 < g_Q; -1: f_Q^2 < g_P
      for (unsigned k = kd; k <= horizon; ++k) {
        bool pq = tower_sq_cmp(P.values[k].first, Q.values[k].second, false) == Ord::LT;
        bool qp = tower_sq_cmp(Q.values[k].first, P.values[k].second, false) == Ord::LT;
        if (pq == qp) {
          rep.fail("(iii) not exactly one direction at k=" + std::to_string(k) +
                   " for '" + P.branch + "' vs '" + Q.branch + "'");
          break;
        }
        int dir = pq ? +1 : -1;
        if (direction == 0)
          direction = dir;
        else if (direction != dir) {
          rep.fail("(iii) direction flips at k=" + std::to_string(k) + " for '" +
                   P.branch + "' vs '" + Q.branch + "'");
          break;
        }
        // Lemma 10.10's quantitative form: F(xi,zeta,k) < 1/n^B, i.e.
        // f^2 * n^B < g on the winning side.
        const auto& [fw, gw] = pq ? std::pair<const TowerNum&, const TowerNum&>(
                                        P.values[k].first, Q.values[k].second)
                                  : std::pair<const TowerNum&, const TowerNum&>(
                                        Q.values[k].first, P.values[k].second);
        if (tower_sq_cmp(fw, gw, true) != Ord::LT)
          rep.fail("F(xi,zeta,k) < 1/n^B fails at k=" + std::to_string(k));
      }
      if (kd > horizon)
        rep.notes.push_back("pairs '" + P.branch + "', '" + Q.branch +
                            "' diverge beyond the horizon; (iii) vacuous");
    }
  }
  return rep;
}

std::string family_to_json(const std::vector<CongenialPair>& pairs) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& p : pairs) {
    nlohmann::json e;
    e["branch"] = p.branch;
    e["horizon"] = p.horizon;
    e["values"] = nlohmann::json::array();
    for (const auto& [f, g] : p.values) {
      nlohmann::json v;
      v["f"] = nlohmann::json::parse(f.to_json());
      v["g"] = nlohmann::json::parse(g.to_json());
      e["values"].push_back(v);
    }
    j.push_back(e);
  }
  return j.dump(2);
}

std::vector<CongenialPair> family_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::vector<CongenialPair> out;
  for (const auto& e : j) {
    CongenialPair p;
    p.branch = e.at("branch").get<std::string>();
    p.horizon = e.at("horizon").get<unsigned>();
    for (const auto& v : e.at("values")) {
      p.values.emplace_back(TowerNum::from_json(v.at("f").dump()),
                            TowerNum::from_json(v.at("g").dump()));
    }
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace creature
