#pragma once

#include <string>

#include "creature/conditions.hpp"

namespace creature {

std::string creature_to_json(const Creature& c);
Creature creature_from_json(const std::string& text);

std::string condition_to_json(const Condition& p);
Condition condition_from_json(const std::string& text);

std::string possibility_to_json(const Possibility& eta);
Possibility possibility_from_json(const std::string& text);

}  // namespace creature
