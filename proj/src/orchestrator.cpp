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

#include "convosim/orchestrator.hpp"

#include <atomic>
#include <mutex>
#include <sstream>
#include <thread>

#include "convosim/rng.hpp"

namespace convosim {

namespace {

std::string hex16(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[i] = digits[v & 0xf];
    return out;
}

}  // namespace

ConversationGenerator::ConversationGenerator(const Catalog& catalog,
                                             const GoalTemplateCatalog& templates,
                                             const PromptLibrary& prompts, LlmGateway& gateway,
                                             OrchestratorOptions options)
    : catalog_(&catalog),
      templates_(&templates),
      builder_(prompts, catalog),
      gateway_(&gateway),
      options_(options) {}

Conversation ConversationGenerator::generate(const ListeningSession& session,
                                             const SessionSample& sample,
                                             std::uint64_t conversation_seed) {
    Conversation conv;
    conv.session_id = session.session_id;
    conv.conversation_id = "cv-" + session.session_id + "-" + hex16(conversation_seed);
    conv.sample = sample;
    conv.metadata.seed = conversation_seed;
    conv.metadata.backend_id = gateway_->backend_id();
    conv.metadata.user_id = session.user_id;
    conv.metadata.started_at = now_utc();

    IsolationContext isolation;
    isolation.pool_ids = sample.pool_tracks;
    isolation.profile_ids = sample.profile_tracks;

    // Every bundle goes through the auditor before it is sent. A breach is a
    // builder bug, so it aborts the conversation rather than leaking data.
    auto audited_request = [&](const PromptBundle& bundle) {
        ++conv.metadata.bundles_audited;
        if (options_.audit_bundles) {
            const std::vector<std::string> breaches = audit_isolation(bundle, isolation);
            if (!breaches.empty()) {
                conv.metadata.isolation_breaches += static_cast<int>(breaches.size());
                throw ConversationAbortedError(
                    "isolation/" + std::string(to_string(bundle.role_tag)),
                    {AttemptRecord{0, "", "IsolationBreach", breaches.front()}});
            }
        }
        ChatRequest request;
        request.role_tag = bundle.role_tag;
        request.parts = bundle.parts;
        request.seed = conversation_seed;
        return request;
    };

    // Repair attempts re-issue the same bundle with a corrective text part
    // appended, naming the failure.
    auto with_repair = [&](const PromptBundle& bundle,
                           const std::optional<ParseFailure>& failure) {
        ChatRequest request = audited_request(bundle);
        if (failure)
            request.parts.push_back(ContentPart::text(builder_.render_repair_instruction(
                to_string(failure->kind), failure->detail)));
        return request;
    };

    // Stage 1a: listener profile from demographics + profiling tracks.
    const PromptBundle profile_bundle =
        builder_.build_profile_prompt(sample.demographics, sample.profile_tracks);
    auto profile_outcome = repair_loop<ListenerProfile>(
        *gateway_,
        [&](const std::optional<ParseFailure>& f) { return with_repair(profile_bundle, f); },
        [&](const std::string& raw) { return parse_profile(raw, sample.demographics); },
        options_.retry_cap, "profile");
    conv.profile = profile_outcome.value;
    conv.metadata.usage += profile_outcome.usage;
    conv.metadata.request_count += profile_outcome.attempt_count;

    // Stage 1b: three templates, then the customized goal.
    const std::vector<GoalTemplate> goal_templates =
        templates_->sample_templates(derive_seed(conversation_seed, "templates"));
    const PromptBundle goal_bundle =
        builder_.build_goal_prompt(goal_templates, sample.pool_tracks, conv.profile);
    auto goal_outcome = repair_loop<ConversationGoal>(
        *gateway_,
        [&](const std::optional<ParseFailure>& f) { return with_repair(goal_bundle, f); },
        [&](const std::string& raw) -> ParseResult<ConversationGoal> {
            ParseResult<ConversationGoal> parsed = parse_goal(raw);
            if (!parse_ok(parsed)) return parsed;
            // Band containment and text checks ride the same repair loop.
            const std::vector<std::string> violations =
                validate_goal(std::get<ConversationGoal>(parsed));
            if (!violations.empty())
                return ParseFailure{ParseFailureKind::kUnknownEnumValue, violations.front()};
            return parsed;
        },
        options_.retry_cap, "goal");
    conv.goal = goal_outcome.value;
    conv.metadata.usage += goal_outcome.usage;
    conv.metadata.request_count += goal_outcome.attempt_count;

    {
        const std::vector<std::string> violations = validate_goal(conv.goal);
        if (!violations.empty()) throw GoalInvalidError(violations);
    }
    isolation.goal_text = conv.goal.listener_goal;

    // Stage 2: the alternating turn loop. History grows append-only.
    std::vector<HistoryEntry> history;
    std::vector<std::string> used_ids;
    std::optional<LastRecommendation> last;

    for (int turn = 1; turn <= options_.turns; ++turn) {
        const PromptBundle listener_bundle = builder_.build_listener_prompt(
            turn, conv.profile, conv.goal, sample.profile_tracks, history, last);
        auto listener_outcome = repair_loop<ListenerTurnOutput>(
            *gateway_,
            [&](const std::optional<ParseFailure>& f) { return with_repair(listener_bundle, f); },
            [&](const std::string& raw) { return parse_listener_turn(raw, turn); },
            options_.retry_cap, "listener/turn" + std::to_string(turn));
        conv.metadata.usage += listener_outcome.usage;
        conv.metadata.request_count += listener_outcome.attempt_count;
        history.push_back(HistoryEntry{HistoryEntry::Speaker::kListener,
                                       listener_outcome.value.message, ""});

        const PromptBundle recsys_bundle = builder_.build_recsys_prompt(
            turn, conv.profile, sample.pool_tracks, history, used_ids);
        auto recsys_outcome = repair_loop<RecsysTurnOutput>(
            *gateway_,
            [&](const std::optional<ParseFailure>& f) { return with_repair(recsys_bundle, f); },
            [&](const std::string& raw) {
                return parse_recsys_turn(raw, sample.pool_tracks, used_ids);
            },
            options_.retry_cap, "recsys/turn" + std::to_string(turn));
        conv.metadata.usage += recsys_outcome.usage;
        conv.metadata.request_count += recsys_outcome.attempt_count;

        used_ids.push_back(recsys_outcome.value.track_id);
        isolation.recommended_ids.push_back(recsys_outcome.value.track_id);
        history.push_back(HistoryEntry{HistoryEntry::Speaker::kRecsys,
                                       recsys_outcome.value.message,
                                       recsys_outcome.value.track_id});
        last = LastRecommendation{recsys_outcome.value.track_id, recsys_outcome.value.message};

        conv.turns.push_back(Turn{turn, std::move(listener_outcome.value),
                                  std::move(recsys_outcome.value)});
    }

    conv.metadata.finished_at = now_utc();
    return conv;
}

GenerationManifest generate_dataset(const std::vector<ListeningSession>& sessions,
                                    const Catalog& catalog,
                                    const GoalTemplateCatalog& templates,
                                    const PromptLibrary& prompts, LlmGateway& gateway,
                                    const BatchOptions& options,
                                    const std::function<void(const Conversation&)>& sink) {
    GenerationManifest manifest;
    manifest.requested = static_cast<int>(sessions.size());

    struct Slot {
        bool succeeded = false;
        std::string conversation_id;
        AbortRecord abort;
        int bundles_audited = 0;
        int breaches = 0;
    };
    std::vector<Slot> slots(sessions.size());

    std::mutex sink_mutex;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        ConversationGenerator generator(catalog, templates, prompts, gateway,
                                        options.orchestrator);
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= sessions.size()) break;
            const ListeningSession& session = sessions[i];
            Slot& slot = slots[i];
            const std::uint64_t conv_seed = derive_seed(options.run_seed, session.session_id);
            const std::string conv_id = "cv-" + session.session_id + "-" + hex16(conv_seed);
            slot.abort.session_id = session.session_id;
            slot.abort.conversation_id = conv_id;
            try {
                const SessionSample sample =
                    sample_session(session, catalog, options.run_seed, options.bounds);
                Conversation conv = generator.generate(session, sample, conv_seed);
                slot.bundles_audited = conv.metadata.bundles_audited;
                slot.breaches = conv.metadata.isolation_breaches;
                slot.succeeded = true;
                slot.conversation_id = conv.conversation_id;
                {
                    std::lock_guard<std::mutex> lock(sink_mutex);
                    sink(conv);
                }
            } catch (const ConversationAbortedError& e) {
                slot.abort.stage = e.stage;
                slot.abort.reason = e.what();
                slot.abort.attempts = e.attempts;
            } catch (const GoalInvalidError& e) {
                slot.abort.stage = "goal_validation";
                slot.abort.reason = e.what();
            } catch (const Error& e) {
                slot.abort.stage = "pipeline";
                slot.abort.reason = e.what();
            }
        }
    };

    const int worker_count =
        std::max(1, std::min<int>(options.workers, static_cast<int>(sessions.size())));
    if (worker_count <= 1 || sessions.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(worker_count));
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (const Slot& slot : slots) {
        manifest.bundles_audited += slot.bundles_audited;
        manifest.isolation_breaches += slot.breaches;
        if (slot.succeeded) {
            ++manifest.succeeded;
            manifest.conversation_ids.push_back(slot.conversation_id);
        } else {
            ++manifest.aborted;
            manifest.aborts.push_back(slot.abort);
        }
    }
    manifest.tokens = gateway.meter().snapshot();
    return manifest;
}

}  // namespace convosim
