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

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "convosim/agents_types.hpp"
#include "convosim/goal_catalog.hpp"
#include "convosim/llm_gateway.hpp"

namespace convosim {

enum class ParseFailureKind {
    kNoBlockFound,
    kMissingField,
    kUnknownEnumValue,
    kUnknownTrackId,
    kDuplicateTrackId,
    kEmptyField,
};

const char* to_string(ParseFailureKind kind);

struct ParseFailure {
    ParseFailureKind kind;
    std::string detail;
};

/// Ordered key -> folded scalar value. Parsing never throws: every input
/// yields either fields or a typed failure.
using FieldMap = std::map<std::string, std::string>;

template <typename T>
using ParseResult = std::variant<T, ParseFailure>;

template <typename T>
bool parse_ok(const ParseResult<T>& r) {
    return std::holds_alternative<T>(r);
}

/// Locates the first fenced block (``` ... ```) or, failing that, the first
/// bare run of top-level "key: value" lines. Multiline scalars are folded to
/// single-line values; unknown keys are preserved. Fails with kNoBlockFound
/// when no key-value line exists.
ParseResult<FieldMap> extract_block(const std::string& raw);

struct GoalClassification {
    std::string topic_code;
    std::string specificity_code;
};

struct JudgeScore {
    int score = 0;  // 1-4
    std::string rationale;
};

// Field-map validators, one per (role, turn-kind) schema. Enum matching is
// case-insensitive and strips surrounding brackets.
ParseResult<ListenerProfile> validate_profile(const FieldMap& fields,
                                              const Demographics& demographics);
ParseResult<ConversationGoal> validate_goal_output(const FieldMap& fields);
ParseResult<ListenerTurnOutput> validate_listener_turn(const FieldMap& fields, int turn);
ParseResult<RecsysTurnOutput> validate_recsys_turn(const FieldMap& fields,
                                                   const std::vector<std::string>& pool_ids,
                                                   const std::vector<std::string>& used_ids);
ParseResult<JudgeScore> validate_judge_score(const FieldMap& fields);
ParseResult<GoalClassification> validate_goal_class(const FieldMap& fields);

// extract_block composed with the matching validator.
ParseResult<ListenerProfile> parse_profile(const std::string& raw,
                                           const Demographics& demographics);
ParseResult<ConversationGoal> parse_goal(const std::string& raw);
ParseResult<ListenerTurnOutput> parse_listener_turn(const std::string& raw, int turn);
ParseResult<RecsysTurnOutput> parse_recsys_turn(const std::string& raw,
                                                const std::vector<std::string>& pool_ids,
                                                const std::vector<std::string>& used_ids);
ParseResult<JudgeScore> parse_judge_score(const std::string& raw);
ParseResult<GoalClassification> parse_goal_class(const std::string& raw);

struct AttemptRecord {
    int attempt = 0;
    std::string raw;
    std::string failure_kind;
    std::string failure_detail;
};

/// Raised when every repair attempt failed; carries the full attempt trail
/// for the diagnostic log.
class ConversationAbortedError : public Error {
public:
    ConversationAbortedError(std::string stage, std::vector<AttemptRecord> attempts)
        : Error("aborted at stage '" + stage + "' after " + std::to_string(attempts.size()) +
                " attempts"),
          stage(std::move(stage)),
          attempts(std::move(attempts)) {}
    std::string stage;
    std::vector<AttemptRecord> attempts;
};

template <typename T>
struct RepairOutcome {
    T value{};
    int attempt_count = 0;
    std::vector<AttemptRecord> failures;
    TokenUsage usage;
};

/// Issues the request, validates the reply, and on failure re-issues with
/// the builder told what went wrong (so it can append a corrective
/// instruction). After max_attempts failures the conversation is aborted.
template <typename T>
RepairOutcome<T> repair_loop(
    LlmGateway& gateway,
    const std::function<ChatRequest(const std::optional<ParseFailure>&)>& build_request,
    const std::function<ParseResult<T>(const std::string&)>& validate, int max_attempts,
    const std::string& stage) {
    if (max_attempts < 1) throw InvalidInputError("repair loop needs max_attempts >= 1");
    RepairOutcome<T> outcome;
    std::optional<ParseFailure> last_failure;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        const ChatRequest request = build_request(last_failure);
        CompletionResult completion = gateway.complete(request);
        outcome.usage += completion.usage;
        outcome.attempt_count = attempt;
        ParseResult<T> result = validate(completion.text);
        if (parse_ok(result)) {
            outcome.value = std::move(std::get<T>(result));
            return outcome;
        }
        last_failure = std::get<ParseFailure>(result);
        outcome.failures.push_back(AttemptRecord{attempt, completion.text,
                                                 to_string(last_failure->kind),
                                                 last_failure->detail});
    }
    throw ConversationAbortedError(stage, outcome.failures);
}

}  // namespace convosim
