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

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace convosim {

inline constexpr std::array<char, 11> kTopicCodes = {'A', 'B', 'C', 'D', 'E', 'F',
                                                     'G', 'H', 'I', 'J', 'K'};
inline constexpr std::array<const char*, 4> kSpecificityCodes = {"LL", "HL", "LH", "HH"};

/// One cell of the 11-topic x 4-specificity grid the goal agent samples from.
struct GoalTemplate {
    std::string topic_code;        // "A".."K"
    std::string specificity_code;  // LL | HL | LH | HH
    std::string description;
    std::string example;
};

/// The customized session-level goal the listener agent is conditioned on.
struct ConversationGoal {
    std::string category_code;
    std::string specificity_code;
    int target_turn_count = 0;  // 1-8, inside the specificity band
    std::string listener_goal;
    std::string listener_expertise;
    std::vector<std::string> initial_query_examples;  // 1-3 entries
};

struct TurnBand {
    int low = 0;
    int high = 0;
};

/// Expected resolution band per specificity: HH->[1,2], HL->[3,4], LL->[3,7],
/// LH->[6,8]. Throws UnknownCodeError for anything else.
TurnBand turn_band(const std::string& specificity_code);

bool is_topic_code(const std::string& code);
bool is_specificity_code(const std::string& code);

/// Holds the shipped 44-template catalog. Load rejects anything that is not
/// exactly one template per grid cell.
class GoalTemplateCatalog {
public:
    static GoalTemplateCatalog load_file(const std::string& path);
    static GoalTemplateCatalog from_templates(std::vector<GoalTemplate> templates);

    const std::vector<GoalTemplate>& templates() const { return templates_; }
    std::size_t size() const { return templates_.size(); }

    /// Three distinct templates, uniform without replacement, deterministic
    /// under seed.
    std::vector<GoalTemplate> sample_templates(std::uint64_t rng_seed) const;

private:
    std::vector<GoalTemplate> templates_;
};

/// All violations found, empty when the goal is well-formed. Violations are
/// data, not errors: the repair loop feeds them back to the goal agent.
std::vector<std::string> validate_goal(const ConversationGoal& goal);

}  // namespace convosim
