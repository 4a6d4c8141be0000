// creature-lab: command-line front end for the finite-truncation creature
// forcing toolkit. All math goes through the library; this file is parsing,
// dispatch and printing only.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "creature/bigness.hpp"
#include "creature/conditions.hpp"
#include "creature/cover.hpp"
#include "creature/json_io.hpp"
#include "creature/trees.hpp"

using namespace creature;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

unsigned env_precision() {
  if (const char* p = std::getenv("CREATURE_LAB_PRECISION")) {
    long v = std::atol(p);
    if (v >= 16) return static_cast<unsigned>(v);
  }
  return 128;
}

ParamTable load_table(const std::string& regime_arg, const std::string& upto) {
  Regime r = regime_arg == "paper" ? Regime::paper()
                                   : regime_from_json(slurp(regime_arg));
  return build_table(r, height_from_string(upto));
}

std::string mag_str(const Mag& m) { return m.describe(); }

const char* status_str(CheckStatus s) {
  switch (s) {
    case CheckStatus::exact: return "exact";
    case CheckStatus::magnitude: return "magnitude";
    case CheckStatus::structural: return "structural";
    case CheckStatus::skipped: return "skipped";
    case CheckStatus::failed: return "FAILED";
  }
  return "?";
}

int cmd_table(const std::string& regime, const std::string& upto, bool as_json,
              bool checks) {
  ParamTable t = load_table(regime, upto);
  if (as_json) {
    nlohmann::json j;
    j["horizon"] = to_string(t.horizon());
    j["heights"] = nlohmann::json::array();
    for (const auto& r : t.records()) {
      nlohmann::json e;
      e["h"] = to_string(r.h);
      e["tg"] = to_string(r.tg);
      e["nP"] = mag_str(r.nP);
      e["nR"] = mag_str(r.nR);
      e["nB"] = mag_str(r.nB);
      e["nS"] = mag_str(r.nS);
      if (r.interval_len) e["len"] = mag_str(*r.interval_len);
      if (r.J) e["J"] = r.J->get_str();
      if (r.J_pow3) e["Jpow3"] = r.J_pow3->get_str();
      j["heights"].push_back(e);
    }
    if (checks) {
      j["checks"] = nlohmann::json::array();
      for (const auto& c : t.checks())
        j["checks"].push_back({to_string(c.h), c.what, status_str(c.status), c.note});
    }
    std::cout << j.dump(2) << "\n";
    return 0;
  }
  std::cout << "height      tg       n^P                n^R                n^B                n^S\n";
  for (const auto& r : t.records()) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-11s %-8s %-18s %-18s %-18s %-18s",
                  to_string(r.h).c_str(), to_string(r.tg).c_str(),
                  mag_str(r.nP).c_str(), mag_str(r.nR).c_str(),
                  mag_str(r.nB).c_str(), mag_str(r.nS).c_str());
    std::cout << buf << "\n";
  }
  if (checks) {
    std::cout << "\nDef 4.8 chain checks:\n";
    for (const auto& c : t.checks())
      std::cout << "  " << to_string(c.h) << "  " << c.what << "  ["
                << status_str(c.status) << "]" << (c.note.empty() ? "" : "  # " + c.note)
                << "\n";
  }
  return 0;
}

SetNorm named_norm(const std::string& name, const Creature& c, const ParamTable& t) {
  if (name == "log2") return norm_log2();
  if (name == "card") return norm_card();
  if (name.rfind("logc", 0) == 0) {
    unsigned cc = std::stoul(name.substr(4));
    return norm_logc_div_c(cc);
  }
  if (name == "cell") return norm_cell(t.nB(c.height));
  if (name == "nn") return norm_nn(c, t);
  if (name == "cn") return norm_cn(c, t);
  throw validation_error("unknown norm '" + name + "'");
}

int cmd_norm(const std::string& regime, const std::string& upto,
             const std::string& file, const std::string& branch, bool as_json,
             bool explain) {
  ParamTable t = load_table(regime, upto);
  Creature c = creature_from_json(slurp(file));
  NormContext ctx;
  ctx.scale = t.regime().scale;
  if (c.tag == CreatureTag::slalom) {
    if (branch.empty())
      throw validation_error("slalom norms need --branch for the congenial pair");
    ctx.log2_g = log2_g(branch, c.height.n / 4, t);
  }
  ExtNum v = pointwise_norm(c, t, ctx);
  unsigned prec = env_precision();
  if (as_json) {
    nlohmann::json j;
    j["value"] = nlohmann::json::parse(extnum_to_json(v, prec));
    j["display"] = v.describe(prec);
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "norm = " << v.describe(prec) << "\n";
  }
  if (explain) {
    std::cout << "# tag " << to_string(c.tag) << " at " << to_string(c.height)
              << ", |M| = " << c.atoms.size() << "\n";
    switch (c.tag) {
      case CreatureTag::nmCell:
        std::cout << "# cell norm: log2|M| / (n^B log2 n^B), n^B = "
                  << t.nB(c.height).get_str() << "\n";
        break;
      case CreatureTag::nn:
        std::cout << "# nn norm: log2 ||M||^intersect / (n^B log2 n^B), "
                  << "||M||^intersect = " << intersect_norm(c, t) << "\n";
        break;
      case CreatureTag::cn:
        std::cout << "# cn norm: (log2|M| - log2 C(2^(|I|-1), 2^(n^B-1))) / "
                     "(2^min I (n^B)^2 log2 3n^B)\n";
        break;
      case CreatureTag::slalom:
        std::cout << "# slalom norm: log2|M| / (n^P log2 g_xi(k))\n";
        break;
      case CreatureTag::ct:
        std::cout << "# ct: nor_Sacks via the split norm, split = "
                  << split_norm(c, t) << "\n";
        break;
    }
  }
  return 0;
}

int cmd_bigness(const std::string& regime, const std::string& upto,
                const std::string& file, const std::string& spec_str,
                const std::string& norm_name, bool as_json) {
  ParamTable t = load_table(regime, upto);
  Creature c = creature_from_json(slurp(file));
  // spec: "c=3", "c=3,d=2", "strong:c=3", "estrong:e=2,c=3[,d=2]"
  unsigned cc = 2, dd = 0, ee = 0;
  bool strong = spec_str.rfind("strong", 0) == 0;
  bool estrong = spec_str.rfind("estrong", 0) == 0;
  std::string params = spec_str;
  if (auto pos = params.find(':'); pos != std::string::npos) params = params.substr(pos + 1);
  std::stringstream ss(params);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    std::string k = item.substr(0, eq);
    unsigned v = std::stoul(item.substr(eq + 1));
    if (k == "c") cc = v;
    if (k == "d") dd = v;
    if (k == "e") ee = v;
  }
  BignessSpec spec = BignessSpec::c_big(cc);
  if (estrong && dd) spec = BignessSpec::e_strong_cd(ee, cc, dd);
  else if (estrong) spec = BignessSpec::e_strong(ee, cc);
  else if (strong) spec = BignessSpec::strong(cc);
  else if (dd) spec = BignessSpec::cd_big(cc, dd);
  SetNorm norm = named_norm(norm_name, c, t);
  auto res = check_bigness(static_cast<unsigned>(c.atoms.size()), norm, spec, 20);
  if (as_json) {
    nlohmann::json j;
    j["spec"] = spec.name();
    j["holds"] = res.holds;
    if (!res.holds) {
      nlohmann::json X = nlohmann::json::array();
      unsigned pos = 0;
      for (std::size_t i = 0; i < c.atoms.size(); ++i)
        if (res.counter_X >> i & 1) X.push_back(c.atoms[i].get_str()), ++pos;
      j["counterexample"]["X"] = X;
      j["counterexample"]["coloring"] = res.coloring;
    }
    std::cout << j.dump(2) << "\n";
  } else if (res.holds) {
    std::cout << "holds (" << spec.name() << ", norm " << norm.name << ")\n";
  } else {
    std::cout << "FAILS; counterexample X mask = " << res.counter_X
              << ", coloring =";
    for (auto col : res.coloring) std::cout << " " << unsigned(col);
    std::cout << "\n";
  }
  return res.holds ? 0 : 0;
}

int cmd_cover_solve(const std::vector<unsigned>& f, const std::vector<unsigned>& g,
                    const std::string& mode, bool as_json) {
  SlalomInstance inst{f, g};
  CoverResult res = mode == "greedy" ? min_cover_greedy(inst) : min_cover_exact(inst);
  if (as_json) {
    nlohmann::json j;
    j["mode"] = mode;
    j["count"] = res.count;
    j["volumeLowerBound"] = volume_lower_bound(inst).get_str();
    nlohmann::json fam = nlohmann::json::array();
    for (const auto& s : res.family) fam.push_back(s);
    j["family"] = fam;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << res.count << "\n";
  }
  return 0;
}

Condition load_condition(const std::string& path) {
  return condition_from_json(slurp(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"creature-lab: finite-truncation creature forcing toolkit"};
  app.require_subcommand(1);
  bool as_json = false;
  app.add_flag("--json", as_json, "machine-readable output");
  std::string regime = "paper", upto = "3";
  app.add_option("--regime", regime, "regime file or 'paper'");
  app.add_option("--upto", upto, "table horizon height");
  unsigned long long seed = 0;
  app.add_option("--seed", seed, "seed for randomized flows");

  // table
  auto* tbl = app.add_subcommand("table", "print the parameter table");
  bool tbl_checks = false;
  tbl->add_flag("--checks", tbl_checks, "print the Def 4.8 chain checks");

  // norm
  auto* nrm = app.add_subcommand("norm", "evaluate a creature norm");
  std::string nrm_file, nrm_branch;
  bool nrm_explain = false;
  nrm->add_option("--creature", nrm_file, "creature JSON file")->required();
  nrm->add_option("--branch", nrm_branch, "congenial branch for slalom norms");
  nrm->add_flag("--explain", nrm_explain, "print the instantiated formula");

  // bigness
  auto* big = app.add_subcommand("bigness", "exhaustive bigness check");
  std::string big_spec = "c=2", big_norm = "log2", big_file;
  big->add_option("--spec", big_spec, "c=..[,d=..] | strong:c=.. | estrong:e=..,c=..");
  big->add_option("--norm", big_norm, "log2 | logc<N> | card | cell | nn | cn");
  big->add_option("--creature", big_file)->required();

  // congenial
  auto* cong = app.add_subcommand("congenial", "congenial pair families");
  auto* cong_gen = cong->add_subcommand("gen", "generate pairs");
  std::string branches = "0,1";
  unsigned cong_horizon = 2;
  cong_gen->add_option("--branches", branches, "comma-separated branch prefixes");
  cong_gen->add_option("--horizon", cong_horizon, "k horizon");
  auto* cong_val = cong->add_subcommand("validate", "validate a family file");
  std::string cong_file;
  cong_val->add_option("file", cong_file)->required();

  // cond
  auto* cond = app.add_subcommand("cond", "condition calculus");
  std::string cond_file, cond_file2, cond_eta, cond_out;
  std::string cond_cut = "1", cond_xi, cond_keep;
  unsigned cond_h = 0;
  std::string cond_M = "1";
  auto* c_validate = cond->add_subcommand("validate");
  c_validate->add_option("file", cond_file)->required();
  auto* c_modest = cond->add_subcommand("modest");
  c_modest->add_option("file", cond_file)->required();
  auto* c_poss = cond->add_subcommand("poss");
  c_poss->add_option("file", cond_file)->required();
  c_poss->add_option("--below", cond_cut);
  auto* c_meet = cond->add_subcommand("meet");
  c_meet->add_option("file", cond_file)->required();
  c_meet->add_option("--eta", cond_eta)->required();
  c_meet->add_option("--below", cond_cut);
  auto* c_stronger = cond->add_subcommand("stronger");
  c_stronger->add_option("q", cond_file)->required();
  c_stronger->add_option("p", cond_file2)->required();
  auto* c_half = cond->add_subcommand("half");
  c_half->add_option("file", cond_file)->required();
  c_half->add_option("--from", cond_h);
  auto* c_unhalve = cond->add_subcommand("unhalve");
  c_unhalve->add_option("q", cond_file)->required();
  c_unhalve->add_option("r", cond_file2)->required();
  c_unhalve->add_option("--from", cond_h);
  c_unhalve->add_option("--M", cond_M);
  auto* c_amalg = cond->add_subcommand("amalgamate");
  c_amalg->add_option("p", cond_file)->required();
  c_amalg->add_option("q", cond_file2)->required();
  auto* c_prepare = cond->add_subcommand("prepare");
  c_prepare->add_option("file", cond_file)->required();
  c_prepare->add_option("--xi", cond_xi)->required();
  auto* c_restrict = cond->add_subcommand("restrict");
  c_restrict->add_option("file", cond_file)->required();
  c_restrict->add_option("--keep", cond_keep, "comma-separated index ids");
  auto* c_build = cond->add_subcommand("build");
  std::string cond_indices;
  c_build->add_option("--indices", cond_indices,
                      "comma-separated id:type[:branch] declarations")
      ->required();

  // tree
  auto* tree = app.add_subcommand("tree", "finite tree and measure combinatorics");
  std::string tree_file, tree_node;
  std::string tree_eps = "1/4";
  unsigned tree_k = 0;
  auto* t_measure = tree->add_subcommand("measure");
  t_measure->add_option("file", tree_file)->required();
  t_measure->add_option("--node", tree_node, "bitstring node for relative measure");
  auto* t_sturdy = tree->add_subcommand("sturdy");
  t_sturdy->add_option("file", tree_file)->required();
  auto* t_fat = tree->add_subcommand("fat");
  t_fat->add_option("file", tree_file)->required();
  t_fat->add_option("--eps", tree_eps);
  t_fat->add_option("--k", tree_k);
  auto* t_avoid = tree->add_subcommand("avoid");
  std::string avoid_creature, avoid_T;
  t_avoid->add_option("--creature", avoid_creature)->required();
  t_avoid->add_option("--T", avoid_T, "tree mask (decimal) over 2^I")->required();
  auto* t_shrink = tree->add_subcommand("shrink");
  std::string shrink_creature, shrink_F;
  unsigned shrink_omega = 0;
  t_shrink->add_option("--creature", shrink_creature)->required();
  t_shrink->add_option("--F", shrink_F, "JSON array of Omega masks per atom")->required();
  t_shrink->add_option("--omega", shrink_omega)->required();

  // cover
  auto* cover = app.add_subcommand("cover", "localisation covers");
  auto* cov_solve = cover->add_subcommand("solve");
  std::string cov_f = "3,3", cov_g = "2,2", cov_mode = "exact";
  cov_solve->add_option("--f", cov_f);
  cov_solve->add_option("--g", cov_g);
  cov_solve->add_option("--mode", cov_mode, "exact | greedy");
  auto* cov_codec = cover->add_subcommand("codec");
  std::string codec_t;
  cov_codec->add_option("--t", codec_t, "comma-separated t(k) values")->required();

  auto parse_unsigned_list = [](const std::string& s) {
    std::vector<unsigned> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoul(item));
    return out;
  };

  try {
    app.parse(argc, argv);
    if (tbl->parsed()) return cmd_table(regime, upto, as_json, tbl_checks);
    if (nrm->parsed())
      return cmd_norm(regime, upto, nrm_file, nrm_branch, as_json, nrm_explain);
    if (big->parsed())
      return cmd_bigness(regime, upto, big_file, big_spec, big_norm, as_json);
    if (cong->parsed()) {
      ParamTable t = load_table(regime, upto);
      if (cong_gen->parsed()) {
        std::vector<CongenialPair> fam;
        std::stringstream ss(branches);
        std::string b;
        while (std::getline(ss, b, ',')) fam.push_back(gen_member(b, cong_horizon, t));
        std::cout << family_to_json(fam) << "\n";
        return 0;
      }
      auto fam = family_from_json(slurp(cong_file));
      unsigned hz = fam.empty() ? 0 : fam.front().horizon;
      auto rep = validate_family(fam, hz, t);
      if (rep.ok) {
        std::cout << "family valid (clauses (i), (iii) exact; (ii) proxy)\n";
        return 0;
      }
      for (const auto& v : rep.violations) std::cerr << v << "\n";
      return 2;
    }
    if (cond->parsed()) {
      ParamTable t = load_table(regime, upto);
      if (c_validate->parsed()) {
        auto rep = validate(load_condition(cond_file), t);
        if (rep.ok) {
          std::cout << "valid\n";
          return 0;
        }
        for (const auto& v : rep.violations) std::cerr << v << "\n";
        return 2;
      }
      if (c_modest->parsed()) {
        std::cout << condition_to_json(make_modest(load_condition(cond_file), t)) << "\n";
        return 0;
      }
      if (c_poss->parsed()) {
        auto res = poss(load_condition(cond_file), height_from_string(cond_cut), t);
        if (as_json) {
          nlohmann::json j;
          j["count"] = res.count.get_str();
          j["list"] = nlohmann::json::array();
          for (const auto& eta : res.list)
            j["list"].push_back(nlohmann::json::parse(possibility_to_json(eta)));
          std::cout << j.dump(2) << "\n";
        } else {
          std::cout << "count = " << res.count.get_str() << "\n";
        }
        return 0;
      }
      if (c_meet->parsed()) {
        Condition p = load_condition(cond_file);
        Possibility eta = possibility_from_json(slurp(cond_eta));
        std::cout << condition_to_json(meet(p, eta, height_from_string(cond_cut), t))
                  << "\n";
        return 0;
      }
      if (c_stronger->parsed()) {
        auto rep = is_stronger(load_condition(cond_file), load_condition(cond_file2), t);
        if (rep.stronger) {
          std::cout << "stronger\n";
          return 0;
        }
        std::cout << "not stronger: " << rep.first_failing << "\n";
        return 0;
      }
      if (c_half->parsed()) {
        std::cout << condition_to_json(half(load_condition(cond_file), cond_h, t)) << "\n";
        return 0;
      }
      if (c_unhalve->parsed()) {
        auto res = unhalve(load_condition(cond_file), load_condition(cond_file2), cond_h,
                           rat_from_string(cond_M), t);
        std::cout << condition_to_json(res.s) << "\n";
        std::cerr << "h* = " << res.h_star << "\n";
        return 0;
      }
      if (c_amalg->parsed()) {
        std::cout << condition_to_json(
                         amalgamate(load_condition(cond_file), load_condition(cond_file2), t))
                  << "\n";
        return 0;
      }
      if (c_prepare->parsed()) {
        std::cout << condition_to_json(xi_prepare(load_condition(cond_file), cond_xi, t))
                  << "\n";
        return 0;
      }
      if (c_restrict->parsed()) {
        std::set<std::string> B;
        std::stringstream ss(cond_keep);
        std::string id;
        while (std::getline(ss, id, ',')) B.insert(id);
        std::cout << condition_to_json(restrict_condition(load_condition(cond_file), B, t))
                  << "\n";
        return 0;
      }
      if (c_build->parsed()) {
        std::vector<IndexDecl> B;
        std::stringstream ss(cond_indices);
        std::string item;
        while (std::getline(ss, item, ',')) {
          IndexDecl d;
          auto c1 = item.find(':');
          if (c1 == std::string::npos)
            throw validation_error("index declaration needs id:type");
          d.id = item.substr(0, c1);
          auto rest = item.substr(c1 + 1);
          auto c2 = rest.find(':');
          d.type = index_type_from_string(c2 == std::string::npos ? rest
                                                                  : rest.substr(0, c2));
          if (c2 != std::string::npos) d.branch = rest.substr(c2 + 1);
          B.push_back(d);
        }
        std::cout << condition_to_json(build_full(B, t)) << "\n";
        return 0;
      }
    }
    if (tree->parsed()) {
      if (t_measure->parsed()) {
        FiniteTree T = tree_from_json(slurp(tree_file));
        if (tree_node.empty()) {
          std::cout << T.measure().get_str() << "\n";
        } else {
          std::uint32_t v = 0;
          for (char ch : tree_node) v = (v << 1) | (ch == '1');
          std::cout << rel_measure(T, v, static_cast<unsigned>(tree_node.size())).get_str()
                    << "\n";
        }
        return 0;
      }
      if (t_sturdy->parsed()) {
        auto rep = sturdy_check(tree_from_json(slurp(tree_file)));
        if (rep.sturdy) {
          std::cout << "sturdy\n";
          return 0;
        }
        for (const auto& v : rep.violations) std::cout << v << "\n";
        return 0;
      }
      if (t_fat->parsed()) {
        FiniteTree T = tree_from_json(slurp(tree_file));
        auto res = fat_nodes(T, rat_from_string(tree_eps), tree_k);
        std::cout << "k* = " << res.k_star << ", |fat| = " << res.fat.size() << "\n";
        return 0;
      }
      ParamTable t = load_table(regime, upto);
      if (t_avoid->parsed()) {
        Creature c = creature_from_json(slurp(avoid_creature));
        std::uint64_t T_mask = std::stoull(avoid_T);
        std::cout << creature_to_json(avoid_tree(c, T_mask, t)) << "\n";
        return 0;
      }
      if (t_shrink->parsed()) {
        Creature c = creature_from_json(slurp(shrink_creature));
        auto j = nlohmann::json::parse(slurp(shrink_F));
        std::vector<std::vector<std::uint64_t>> F;
        for (const auto& row : j) {
          std::vector<std::uint64_t> m;
          for (const auto& w : row) m.push_back(w.get<std::uint64_t>());
          F.push_back(m);
        }
        std::cout << creature_to_json(shrink_measure(c, F, shrink_omega, t)) << "\n";
        return 0;
      }
    }
    if (cover->parsed()) {
      if (cov_solve->parsed())
        return cmd_cover_solve(parse_unsigned_list(cov_f), parse_unsigned_list(cov_g),
                               cov_mode, as_json);
      if (cov_codec->parsed()) {
        ParamTable t = load_table(regime, upto);
        std::vector<BigNat> tv;
        std::stringstream ss(codec_t);
        std::string item;
        while (std::getline(ss, item, ',')) tv.push_back(big_from_dec(item));
        Codec c = make_codec(t, static_cast<unsigned>(tv.size()));
        auto s = codec_encode(c, tv);
        std::string bits;
        for (bool b : s) bits += b ? '1' : '0';
        auto back = codec_decode(c, s, static_cast<unsigned>(tv.size()) - 1);
        bool ok = back == tv;
        std::cout << "s = " << bits << (ok ? "  (roundtrip ok)" : "  (ROUNDTRIP FAILED)")
                  << "\n";
        return ok ? 0 : 3;
      }
    }
    std::cerr << "no subcommand action\n";
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const validation_error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const precondition_error& e) {
    std::cerr << "precondition error: " << e.what() << "\n";
    return 2;
  } catch (const domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const horizon_error& e) {
    std::cerr << "horizon error: " << e.what() << "\n";
    return 2;
  } catch (const resource_error& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return 3;
  } catch (const certificate_error& e) {
    std::cerr << "certificate failure: " << e.what() << "\n";
    return 3;
  } catch (const undecidable_error& e) {
    std::cerr << "undecidable at precision: " << e.what() << "\n";
    return 3;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
