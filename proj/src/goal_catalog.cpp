// Copyright 2026 The convosim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "convosim/goal_catalog.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "convosim/errors.hpp"
#include "convosim/rng.hpp"
#include <json.hpp>

namespace convosim {

using nlohmann::json;

bool is_topic_code(const std::string& code) {
    return code.size() == 1 &&
           std::find(kTopicCodes.begin(), kTopicCodes.end(), code[0]) != kTopicCodes.end();
}

bool is_specificity_code(const std::string& code) {
    return std::find_if(kSpecificityCodes.begin(), kSpecificityCodes.end(),
                        [&](const char* c) { return code == c; }) != kSpecificityCodes.end();
}

TurnBand turn_band(const std::string& specificity_code) {
    if (specificity_code == "HH") return {1, 2};
    if (specificity_code == "HL") return {3, 4};
    if (specificity_code == "LL") return {3, 7};
    if (specificity_code == "LH") return {6, 8};
    throw UnknownCodeError(specificity_code);
}

GoalTemplateCatalog GoalTemplateCatalog::from_templates(std::vector<GoalTemplate> templates) {
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& t : templates) {
        if (!is_topic_code(t.topic_code))
            throw InvalidInputError("template with unknown topic code '" + t.topic_code + "'");
        if (!is_specificity_code(t.specificity_code))
            throw InvalidInputError("template with unknown specificity code '" +
                                    t.specificity_code + "'");
        if (t.description.empty() || t.example.empty())
            throw InvalidInputError("template " + t.topic_code + "/" + t.specificity_code +
                                    " has an empty description or example");
        if (!cells.emplace(t.topic_code, t.specificity_code).second)
            throw InvalidInputError("duplicate template for cell " + t.topic_code + "/" +
                                    t.specificity_code);
    }
    const std::size_t grid = kTopicCodes.size() * kSpecificityCodes.size();
    if (cells.size() != grid)
        throw InvalidInputError("template catalog must cover the full " + std::to_string(grid) +
                                "-cell grid, found " + std::to_string(cells.size()));
    GoalTemplateCatalog catalog;
    catalog.templates_ = std::move(templates);
    return catalog;
}

GoalTemplateCatalog GoalTemplateCatalog::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open goal template catalog: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw InvalidInputError("goal template catalog must be a JSON array: " + path);

    std::vector<GoalTemplate> templates;
    for (const auto& entry : doc) {
        GoalTemplate t;
        t.topic_code = entry.value("topic_code", "");
        t.specificity_code = entry.value("specificity_code", "");
        t.description = entry.value("description", "");
        t.example = entry.value("example", "");
        templates.push_back(std::move(t));
    }
    return from_templates(std::move(templates));
}

std::vector<GoalTemplate> GoalTemplateCatalog::sample_templates(std::uint64_t rng_seed) const {
    Rng rng(derive_seed(rng_seed, "goal_templates"));
    const auto idx = rng.sample_indices(templates_.size(), 3);
    std::vector<GoalTemplate> out;
    out.reserve(3);
    for (std::size_t i : idx) out.push_back(templates_[i]);
    return out;
}

std::vector<std::string> validate_goal(const ConversationGoal& goal) {
    std::vector<std::string> violations;
    if (!is_topic_code(goal.category_code))
        violations.push_back("category_code '" + goal.category_code + "' is not in A-K");
    if (!is_specificity_code(goal.specificity_code)) {
        violations.push_back("specificity_code '" + goal.specificity_code +
                             "' is not one of LL/HL/LH/HH");
    } else {
        const TurnBand band = turn_band(goal.specificity_code);
        if (goal.target_turn_count < band.low || goal.target_turn_count > band.high)
            violations.push_back("turn count outside band: target_turn_count " +
                                 std::to_string(goal.target_turn_count) + " not in [" +
                                 std::to_string(band.low) + "," + std::to_string(band.high) +
                                 "] for " + goal.specificity_code);
    }
    if (goal.listener_goal.empty()) violations.push_back("listener_goal is empty");
    if (goal.listener_expertise.empty()) violations.push_back("listener_expertise is empty");
    if (goal.initial_query_examples.empty() || goal.initial_query_examples.size() > 3)
        violations.push_back("initial_query_examples must hold 1-3 entries");
    for (const auto& q : goal.initial_query_examples)
        if (q.empty()) violations.push_back("initial query example is empty");
    return violations;
}

}  // namespace convosim
