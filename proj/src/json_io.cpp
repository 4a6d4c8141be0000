#include "creature/json_io.hpp"

#include <json.hpp>

namespace creature {

namespace {

CreatureTag tag_from_string(const std::string& s) {
  if (s == "slalom") return CreatureTag::slalom;
  if (s == "nn") return CreatureTag::nn;
  if (s == "cn") return CreatureTag::cn;
  if (s == "ct") return CreatureTag::ct;
  if (s == "nm") return CreatureTag::nmCell;
  throw validation_error("unknown creature tag '" + s + "'");
}

nlohmann::json creature_json(const Creature& c) {
  nlohmann::json j;
  j["tag"] = to_string(c.tag);
  j["height"] = to_string(c.height);
  j["atoms"] = nlohmann::json::array();
  for (const auto& a : c.atoms) j["atoms"].push_back(a.get_str());
  return j;
}

Creature creature_parse(const nlohmann::json& j) {
  Creature c;
  c.tag = tag_from_string(j.at("tag").get<std::string>());
  c.height = height_from_string(j.at("height").get<std::string>());
  for (const auto& a : j.at("atoms")) c.atoms.push_back(big_from_dec(a.get<std::string>()));
  c.normalize();
  return c;
}

}  // namespace

std::string creature_to_json(const Creature& c) { return creature_json(c).dump(2); }

Creature creature_from_json(const std::string& text) {
  return creature_parse(nlohmann::json::parse(text));
}

std::string condition_to_json(const Condition& p) {
  nlohmann::json j;
  j["horizon"] = to_string(p.horizon);
  j["support"] = nlohmann::json::array();
  for (const auto& d : p.support) {
    nlohmann::json e;
    e["id"] = d.id;
    e["type"] = to_string(d.type);
    if (!d.branch.empty()) e["branch"] = d.branch;
    j["support"].push_back(e);
  }
  j["frame"] = p.frame_starts;
  j["halving"] = nlohmann::json::object();
  for (const auto& [k, d] : p.halving) {
    if (!d.is_exact())
      throw resource_error("condition with non-rational halving cannot serialize");
    j["halving"][std::to_string(k)] = d.exact_value().get_str();
  }
  j["nmSupports"] = nlohmann::json::object();
  for (const auto& [k, S] : p.nm_supports)
    j["nmSupports"][std::to_string(k)] = S;
  j["creatures"] = nlohmann::json::array();
  for (const auto& [key, c] : p.creatures) {
    nlohmann::json e = creature_json(c);
    e["index"] = key.index;
    j["creatures"].push_back(e);
  }
  nlohmann::json w;
  w["limsup"] = nlohmann::json::object();
  for (const auto& [id, ts] : p.witnesses.limsup) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [i, h] : ts) arr.push_back({i, to_string(h)});
    w["limsup"][id] = arr;
  }
  w["liminf"] = nlohmann::json::array();
  for (const auto& [i, k] : p.witnesses.liminf) w["liminf"].push_back({i, k});
  w["widthBound"] = p.witnesses.width_bound.get_str();
  w["halvingEps"] = p.witnesses.halving_eps.get_str();
  j["witnesses"] = w;
  return j.dump(2);
}

Condition condition_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Condition p;
  p.horizon = height_from_string(j.at("horizon").get<std::string>());
  for (const auto& e : j.at("support")) {
    IndexDecl d;
    d.id = e.at("id").get<std::string>();
    d.type = index_type_from_string(e.at("type").get<std::string>());
    d.branch = e.value("branch", std::string());
    p.support.push_back(d);
  }
  p.frame_starts.clear();
  for (const auto& v : j.at("frame")) p.frame_starts.push_back(v.get<unsigned>());
  if (j.contains("halving"))
    for (const auto& [k, v] : j["halving"].items())
      p.halving[std::stoul(k)] = ExtNum::exact(rat_from_string(v.get<std::string>()));
  if (j.contains("nmSupports"))
    for (const auto& [k, v] : j["nmSupports"].items()) {
      std::set<std::string> S;
      for (const auto& id : v) S.insert(id.get<std::string>());
      p.nm_supports[std::stoul(k)] = S;
    }
  for (const auto& e : j.at("creatures")) {
    Creature c = creature_parse(e);
    p.creatures[CondKey{e.at("index").get<std::string>(), c.height}] = c;
  }
  if (j.contains("witnesses")) {
    const auto& w = j["witnesses"];
    if (w.contains("limsup"))
      for (const auto& [id, arr] : w["limsup"].items())
        for (const auto& t : arr)
          p.witnesses.limsup[id].push_back(
              {t.at(0).get<unsigned>(), height_from_string(t.at(1).get<std::string>())});
    if (w.contains("liminf"))
      for (const auto& t : w["liminf"])
        p.witnesses.liminf.push_back({t.at(0).get<unsigned>(), t.at(1).get<unsigned>()});
    if (w.contains("widthBound"))
      p.witnesses.width_bound = rat_from_string(w["widthBound"].get<std::string>());
    if (w.contains("halvingEps"))
      p.witnesses.halving_eps = rat_from_string(w["halvingEps"].get<std::string>());
  }
  return p;
}

std::string possibility_to_json(const Possibility& eta) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& [key, atom] : eta.atoms) {
    nlohmann::json e;
    e["index"] = key.index;
    e["height"] = to_string(key.h);
    e["atom"] = atom.get_str();
    j.push_back(e);
  }
  return j.dump(2);
}

Possibility possibility_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  Possibility eta;
  for (const auto& e : j) {
    eta.atoms[CondKey{e.at("index").get<std::string>(),
                      height_from_string(e.at("height").get<std::string>())}] =
        big_from_dec(e.at("atom").get<std::string>());
  }
  return eta;
}

}  // namespace creature
