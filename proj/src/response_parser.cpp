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

#include "convosim/response_parser.hpp"

#include <algorithm>
#include <cctype>

namespace convosim {

const char* to_string(ParseFailureKind kind) {
    switch (kind) {
        case ParseFailureKind::kNoBlockFound: return "NoBlockFound";
        case ParseFailureKind::kMissingField: return "MissingField";
        case ParseFailureKind::kUnknownEnumValue: return "UnknownEnumValue";
        case ParseFailureKind::kUnknownTrackId: return "UnknownTrackId";
        case ParseFailureKind::kDuplicateTrackId: return "DuplicateTrackId";
        case ParseFailureKind::kEmptyField: return "EmptyField";
    }
    return "Unknown";
}

const char* to_string(GoalProgress p) {
    return p == GoalProgress::kMovesTowardGoal ? "MOVES_TOWARD_GOAL"
                                               : "DOES_NOT_MOVE_TOWARD_GOAL";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t begin = 0;
    std::size_t end = s.size();
    while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
    while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
    return s.substr(begin, end - begin);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

// Models echo the bracketed placeholders from the instructions; strip one
// layer of [] or quotes before matching enums.
std::string strip_decorations(std::string v) {
    v = trim(v);
    while (v.size() >= 2 && ((v.front() == '[' && v.back() == ']') ||
                             (v.front() == '"' && v.back() == '"') ||
                             (v.front() == '\'' && v.back() == '\'')))
        v = trim(v.substr(1, v.size() - 2));
    return v;
}

bool is_key_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// A top-level "key: value" line; keys are snake_case identifiers.
bool split_key_value(const std::string& line, std::string& key, std::string& value) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i > 3) return false;  // deeper indentation is a continuation, not a key
    if (i >= line.size() || !is_key_start(line[i])) return false;
    std::size_t start = i;
    while (i < line.size() && is_key_char(line[i])) ++i;
    if (i >= line.size() || line[i] != ':') return false;
    key = lower(line.substr(start, i - start));
    value = trim(line.substr(i + 1));
    return true;
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string::npos) {
            lines.push_back(text.substr(start));
            break;
        }
        std::string line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

// Extracts key-value pairs from a line range, folding indented continuation
// lines into the preceding value.
FieldMap collect_fields(const std::vector<std::string>& lines, std::size_t begin,
                        std::size_t end) {
    FieldMap fields;
    std::string current_key;
    for (std::size_t i = begin; i < end; ++i) {
        const std::string& line = lines[i];
        std::string key, value;
        if (split_key_value(line, key, value)) {
            // First occurrence wins; repeated keys are model noise.
            if (!fields.count(key)) {
                fields[key] = value;
                current_key = key;
            } else {
                current_key.clear();
            }
        } else if (!current_key.empty() && !trim(line).empty()) {
            std::string folded = trim(line);
            std::string& slot = fields[current_key];
            if (slot.empty())
                slot = folded;
            else
                slot += " " + folded;
        }
    }
    return fields;
}

}  // namespace

ParseResult<FieldMap> extract_block(const std::string& raw) {
    const std::vector<std::string> lines = split_lines(raw);

    // Prefer the first fenced block anywhere in the reply.
    std::size_t fence_open = lines.size();
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).rfind("```", 0) == 0) {
            fence_open = i;
            break;
        }
    }
    if (fence_open < lines.size()) {
        std::size_t fence_close = lines.size();
        for (std::size_t i = fence_open + 1; i < lines.size(); ++i) {
            if (trim(lines[i]).rfind("```", 0) == 0) {
                fence_close = i;
                break;
            }
        }
        FieldMap fields = collect_fields(lines, fence_open + 1, fence_close);
        if (!fields.empty()) return fields;
        return ParseFailure{ParseFailureKind::kNoBlockFound,
                            "fenced block contains no key-value lines"};
    }

    // Otherwise the first bare run of key-value lines.
    std::string key, value;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (split_key_value(lines[i], key, value)) {
            std::size_t end = i + 1;
            while (end < lines.size()) {
                const std::string trimmed = trim(lines[end]);
                if (trimmed.empty()) break;
                ++end;
            }
            return collect_fields(lines, i, end);
        }
    }
    return ParseFailure{ParseFailureKind::kNoBlockFound, "no key-value lines in response"};
}

namespace {

// Grabs a required field; writes a failure and returns false when missing
// or empty.
bool grab(const FieldMap& fields, const std::string& key, std::string& out,
          std::optional<ParseFailure>& failure) {
    auto it = fields.find(key);
    if (it == fields.end()) {
        failure = ParseFailure{ParseFailureKind::kMissingField, "missing field '" + key + "'"};
        return false;
    }
    out = strip_decorations(it->second);
    if (out.empty()) {
        failure = ParseFailure{ParseFailureKind::kEmptyField, "field '" + key + "' is empty"};
        return false;
    }
    return true;
}

std::optional<int> parse_int(const std::string& text) {
    const std::string v = strip_decorations(text);
    if (v.empty()) return std::nullopt;
    std::size_t i = v[0] == '-' ? 1 : 0;
    if (i == v.size()) return std::nullopt;
    long value = 0;
    for (; i < v.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(v[i]))) return std::nullopt;
        value = value * 10 + (v[i] - '0');
        if (value > 1000000) return std::nullopt;
    }
    return static_cast<int>(v[0] == '-' ? -value : value);
}

}  // namespace

ParseResult<ListenerProfile> validate_profile(const FieldMap& fields,
                                              const Demographics& demographics) {
    ListenerProfile profile;
    profile.demographics = demographics;
    std::optional<ParseFailure> failure;
    if (!grab(fields, "preferred_musical_culture", profile.preferred_musical_culture, failure) ||
        !grab(fields, "top_1_artist", profile.top_1_artist, failure) ||
        !grab(fields, "top_1_genre", profile.top_1_genre, failure))
        return *failure;
    return profile;
}

ParseResult<ConversationGoal> validate_goal_output(const FieldMap& fields) {
    ConversationGoal goal;
    std::optional<ParseFailure> failure;
    std::string category, specificity, turn_count;
    if (!grab(fields, "category_code", category, failure) ||
        !grab(fields, "specificity_code", specificity, failure) ||
        !grab(fields, "target_turn_count", turn_count, failure) ||
        !grab(fields, "listener_goal", goal.listener_goal, failure) ||
        !grab(fields, "listener_expertise", goal.listener_expertise, failure))
        return *failure;

    goal.category_code = category;
    if (goal.category_code.size() == 1)
        goal.category_code[0] =
            static_cast<char>(std::toupper(static_cast<unsigned char>(goal.category_code[0])));
    if (!is_topic_code(goal.category_code))
        return ParseFailure{ParseFailureKind::kUnknownEnumValue,
                            "category_code '" + category + "' is not in A-K"};

    std::string spec_upper = specificity;
    std::transform(spec_upper.begin(), spec_upper.end(), spec_upper.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (!is_specificity_code(spec_upper))
        return ParseFailure{ParseFailureKind::kUnknownEnumValue,
                            "specificity_code '" + specificity + "' is not LL/HL/LH/HH"};
    goal.specificity_code = spec_upper;

    const std::optional<int> turns = parse_int(turn_count);
    if (!turns || *turns < 1 || *turns > 8)
        return ParseFailure{ParseFailureKind::kUnknownEnumValue,
                            "target_turn_count '" + turn_count + "' is not an integer in 1-8"};
    goal.target_turn_count = *turns;

    for (int i = 1; i <= 3; ++i) {
        auto it = fields.find("initial_query_example_" + std::to_string(i));
        if (it == fields.end()) continue;
        const std::string example = strip_decorations(it->second);
        if (!example.empty()) goal.initial_query_examples.push_back(example);
    }
    if (goal.initial_query_examples.empty())
        return ParseFailure{ParseFailureKind::kMissingField,
                            "missing field 'initial_query_example_1'"};
    return goal;
}

ParseResult<ListenerTurnOutput> validate_listener_turn(const FieldMap& fields, int turn) {
    ListenerTurnOutput out;
    std::optional<ParseFailure> failure;
    if (!grab(fields, "thought", out.thought, failure) ||
        !grab(fields, "message", out.message, failure))
        return *failure;
    if (turn >= 2) {
        std::string label;
        if (!grab(fields, "goal_progress_assessment", label, failure)) return *failure;
        const std::string folded = lower(label);
        if (folded == "moves_toward_goal")
            out.goal_progress = GoalProgress::kMovesTowardGoal;
        else if (folded == "does_not_move_toward_goal")
            out.goal_progress = GoalProgress::kDoesNotMoveTowardGoal;
        else
            return ParseFailure{ParseFailureKind::kUnknownEnumValue,
                                "goal_progress_assessment '" + label + "' is not a known label"};
    }
    // Turn 1 never carries a label even when the model volunteers one.
    return out;
}

ParseResult<RecsysTurnOutput> validate_recsys_turn(const FieldMap& fields,
                                                   const std::vector<std::string>& pool_ids,
                                                   const std::vector<std::string>& used_ids) {
    RecsysTurnOutput out;
    std::optional<ParseFailure> failure;
    if (!grab(fields, "thought", out.thought, failure) ||
        !grab(fields, "track_id", out.track_id, failure) ||
        !grab(fields, "message", out.message, failure))
        return *failure;
    if (std::find(pool_ids.begin(), pool_ids.end(), out.track_id) == pool_ids.end())
        return ParseFailure{ParseFailureKind::kUnknownTrackId,
                            "track_id '" + out.track_id + "' is not in the pool"};
    if (std::find(used_ids.begin(), used_ids.end(), out.track_id) != used_ids.end())
        return ParseFailure{ParseFailureKind::kDuplicateTrackId,
                            "track_id '" + out.track_id + "' was already recommended"};
    return out;
}

ParseResult<JudgeScore> validate_judge_score(const FieldMap& fields) {
    JudgeScore out;
    std::optional<ParseFailure> failure;
    std::string score;
    if (!grab(fields, "score", score, failure)) return *failure;
    const std::optional<int> value = parse_int(score);
    if (!value || *value < 1 || *value > 4)
        return ParseFailure{ParseFailureKind::kUnknownEnumValue,
                            "score '" + score + "' is not an integer in 1-4"};
    out.score = *value;
    if (auto it = fields.find("rationale"); it != fields.end())
        out.rationale = strip_decorations(it->second);
    return out;
}

ParseResult<GoalClassification> validate_goal_class(const FieldMap& fields) {
    GoalClassification out;
    std::optional<ParseFailure> failure;
    std::string topic, specificity;
    if (!grab(fields, "topic", topic, failure) ||
        !grab(fields, "specificity", specificity, failure))
        return *failure;
    if (topic.size() == 1)
        topic[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(topic[0])));
    if (!is_topic_code(topic))
        return ParseFailure{ParseFailureKind::kUnknownEnumValue,
                            "topic '" + topic + "' is not in A-K"};
    std::transform(specificity.begin(), specificity.end(), specificity.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (!is_specificity_code(specificity))
        return ParseFailure{ParseFailureKind::kUnknownEnumValue,
                            "specificity '" + specificity + "' is not LL/HL/LH/HH"};
    out.topic_code = topic;
    out.specificity_code = specificity;
    return out;
}

namespace {

template <typename T, typename Validator>
ParseResult<T> parse_with(const std::string& raw, Validator&& validate) {
    ParseResult<FieldMap> block = extract_block(raw);
    if (!parse_ok(block)) return std::get<ParseFailure>(block);
    return validate(std::get<FieldMap>(block));
}

}  // namespace

ParseResult<ListenerProfile> parse_profile(const std::string& raw,
                                           const Demographics& demographics) {
    return parse_with<ListenerProfile>(
        raw, [&](const FieldMap& f) { return validate_profile(f, demographics); });
}

ParseResult<ConversationGoal> parse_goal(const std::string& raw) {
    return parse_with<ConversationGoal>(
        raw, [](const FieldMap& f) { return validate_goal_output(f); });
}

ParseResult<ListenerTurnOutput> parse_listener_turn(const std::string& raw, int turn) {
    return parse_with<ListenerTurnOutput>(
        raw, [&](const FieldMap& f) { return validate_listener_turn(f, turn); });
}

ParseResult<RecsysTurnOutput> parse_recsys_turn(const std::string& raw,
                                                const std::vector<std::string>& pool_ids,
                                                const std::vector<std::string>& used_ids) {
    return parse_with<RecsysTurnOutput>(
        raw, [&](const FieldMap& f) { return validate_recsys_turn(f, pool_ids, used_ids); });
}

ParseResult<JudgeScore> parse_judge_score(const std::string& raw) {
    return parse_with<JudgeScore>(raw,
                                  [](const FieldMap& f) { return validate_judge_score(f); });
}

ParseResult<GoalClassification> parse_goal_class(const std::string& raw) {
    return parse_with<GoalClassification>(
        raw, [](const FieldMap& f) { return validate_goal_class(f); });
}

}  // namespace convosim
