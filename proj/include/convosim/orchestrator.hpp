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

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "convosim/agents.hpp"
#include "convosim/agents_types.hpp"
#include "convosim/catalog.hpp"
#include "convosim/goal_catalog.hpp"
#include "convosim/llm_gateway.hpp"
#include "convosim/response_parser.hpp"

namespace convosim {

struct Turn {
    int index = 0;  // 1-8
    ListenerTurnOutput listener;
    RecsysTurnOutput recsys;
};

struct ConversationMetadata {
    std::uint64_t seed = 0;
    std::string backend_id;
    std::string user_id;
    UtcTimestamp started_at = 0;
    UtcTimestamp finished_at = 0;
    TokenUsage usage;
    int request_count = 0;
    int bundles_audited = 0;
    int isolation_breaches = 0;
};

/// One finished data point: the conditioning pair, the sample it was
/// grounded on, and the full 8-turn transcript.
struct Conversation {
    std::string conversation_id;
    std::string session_id;
    ListenerProfile profile;
    ConversationGoal goal;
    SessionSample sample;
    std::vector<Turn> turns;
    ConversationMetadata metadata;
};

class GoalInvalidError : public Error {
public:
    GoalInvalidError(std::vector<std::string> violations)
        : Error("generated goal is invalid: " +
                (violations.empty() ? std::string("unspecified") : violations.front())),
          violations(std::move(violations)) {}
    std::vector<std::string> violations;
};

struct OrchestratorOptions {
    int turns = 8;
    int retry_cap = 3;       // repair-loop attempts per agent call
    bool audit_bundles = true;
};

/// Runs the two-stage pipeline for one session sample: profile call,
/// template sample, goal call, then the alternating listener/recsys loop.
/// Strictly sequential within a conversation; deterministic under a
/// scripted backend and fixed seed.
class ConversationGenerator {
public:
    ConversationGenerator(const Catalog& catalog, const GoalTemplateCatalog& templates,
                          const PromptLibrary& prompts, LlmGateway& gateway,
                          OrchestratorOptions options = {});

    /// Throws ConversationAbortedError (from the repair loop) or
    /// GoalInvalidError; both mean "no conversation for this session".
    Conversation generate(const ListeningSession& session, const SessionSample& sample,
                          std::uint64_t conversation_seed);

private:
    const Catalog* catalog_;
    const GoalTemplateCatalog* templates_;
    PromptBuilder builder_;
    LlmGateway* gateway_;
    OrchestratorOptions options_;
};

struct AbortRecord {
    std::string session_id;
    std::string conversation_id;  // the id the conversation would have had
    std::string stage;            // "role" or "role/turnN"
    std::string reason;
    std::vector<AttemptRecord> attempts;
};

struct GenerationManifest {
    int requested = 0;
    int succeeded = 0;
    int aborted = 0;
    std::vector<std::string> conversation_ids;  // session order
    std::vector<AbortRecord> aborts;
    TokenMeter::Snapshot tokens;
    int bundles_audited = 0;
    int isolation_breaches = 0;
};

struct BatchOptions {
    std::uint64_t run_seed = 0;
    int workers = 1;
    SamplingBounds bounds;
    OrchestratorOptions orchestrator;
};

/// Generates one conversation per session, conversation-level parallelism
/// up to the worker limit. Each conversation's RNG is derived from
/// (run_seed, session_id), so results do not depend on batch order or
/// worker count. The sink is called as conversations complete (under an
/// internal lock); aborted conversations never reach it.
GenerationManifest generate_dataset(const std::vector<ListeningSession>& sessions,
                                    const Catalog& catalog,
                                    const GoalTemplateCatalog& templates,
                                    const PromptLibrary& prompts, LlmGateway& gateway,
                                    const BatchOptions& options,
                                    const std::function<void(const Conversation&)>& sink);

}  // namespace convosim
