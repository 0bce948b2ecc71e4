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

#include "convosim/pipeline.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "convosim/dataset_store.hpp"
#include "convosim/evaluation.hpp"
#include "convosim/live_backend.hpp"
#include "convosim/orchestrator.hpp"
#include "convosim/scripted_backend.hpp"
#include <json.hpp>

namespace convosim {

using nlohmann::json;

namespace {

std::shared_ptr<ChatBackend> make_backend(const BackendConfig& config) {
    if (config.kind == "scripted") {
        if (config.script_path.empty())
            throw InvalidInputError("scripted backend needs backend.script_path");
        return std::make_shared<ScriptedBackend>(
            ScriptedBackend::load_script_file(config.script_path));
    }
    LiveBackendSettings settings;
    settings.endpoint = config.endpoint;
    settings.path = config.route;
    settings.model = config.model;
    settings.api_key_env = config.api_key_env;
    settings.timeout_seconds = config.timeout_seconds;
    return std::make_shared<LiveBackend>(std::move(settings));
}

GatewayOptions gateway_options(const RunConfig& config) {
    GatewayOptions options;
    options.max_attempts = config.backend.max_attempts;
    options.requests_per_minute = config.backend.requests_per_minute;
    options.estimator.text_bytes_per_token = config.token_text_divisor;
    return options;
}

json tokens_to_json(const TokenMeter::Snapshot& snapshot) {
    json per_role = json::object();
    for (const auto& [role, counters] : snapshot.per_role)
        per_role[role] = {{"input_tokens", counters.input_tokens},
                          {"output_tokens", counters.output_tokens},
                          {"request_count", counters.request_count}};
    const RoleCounters total = snapshot.total();
    return json{{"per_role", per_role},
                {"total",
                 {{"input_tokens", total.input_tokens},
                  {"output_tokens", total.output_tokens},
                  {"request_count", total.request_count}}}};
}

json cost_to_json(const CostReport& report) {
    json per_role = json::object();
    for (const auto& [role, cost] : report.per_role)
        per_role[role] = {{"input_tokens", cost.input_tokens},
                          {"output_tokens", cost.output_tokens},
                          {"request_count", cost.request_count},
                          {"input_share_pct", cost.input_share_pct},
                          {"cost", cost.cost}};
    return json{{"per_role", per_role},
                {"total_input_tokens", report.total_input_tokens},
                {"total_output_tokens", report.total_output_tokens},
                {"total_cost", report.total_cost}};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::out | std::ios::trunc);
    if (!out) throw SinkUnavailableError("cannot write file: " + path);
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
}

struct SplitInputs {
    std::vector<ListeningSession> sessions;
    std::map<std::string, Partition> partition;
    std::vector<SplitAssignment> assignments;
};

SplitInputs load_split(const RunConfig& config) {
    SplitInputs inputs;
    inputs.sessions = load_sessions_file(config.sessions_path);
    inputs.partition =
        chronological_split(inputs.sessions, parse_rfc3339(config.split_boundary));
    inputs.assignments = classify_temperature(inputs.sessions, inputs.partition);
    return inputs;
}

json axis_to_json(const AxisDiversity& axis) {
    json distribution = json::object();
    for (std::size_t i = 0; i < axis.bins.size(); ++i)
        distribution[axis.bins[i]] = axis.distribution[i];
    return json{{"kld_to_uniform", axis.kld_to_uniform},
                {"coverage", axis.coverage},
                {"distribution", distribution}};
}

}  // namespace

Pipeline::Pipeline(RunConfig config) : config_(std::move(config)) {
    validate_run_config(config_);
}

std::string Pipeline::ingest() {
    const Catalog catalog = load_catalog_file(config_.catalog_path);
    SplitInputs split = load_split(config_);
    const std::vector<ListeningSession> eligible =
        select_eligible(split.sessions, catalog, config_.min_session_tracks);

    std::filesystem::create_directories(config_.output_dir);
    const std::string split_path =
        (std::filesystem::path(config_.output_dir) / "split.jsonl").string();
    {
        std::ofstream out(split_path, std::ios::out | std::ios::trunc);
        if (!out) throw SinkUnavailableError("cannot write split file: " + split_path);
        for (const auto& a : split.assignments)
            out << json{{"session_id", a.session_id},
                        {"partition", to_string(a.partition)},
                        {"user_temperature", to_string(a.user_temperature)}}
                       .dump()
                << '\n';
    }

    int train = 0, test = 0, warm = 0, cold = 0;
    for (const auto& a : split.assignments) {
        if (a.partition == Partition::kTrain) {
            ++train;
        } else {
            ++test;
            if (a.user_temperature == Temperature::kWarm) ++warm;
            if (a.user_temperature == Temperature::kCold) ++cold;
        }
    }
    std::set<std::string> eligible_ids;
    for (const auto& s : eligible) eligible_ids.insert(s.session_id);

    const json report{{"catalog_tracks", catalog.size()},
                      {"sessions_total", split.sessions.size()},
                      {"eligible_sessions", eligible.size()},
                      {"train_sessions", train},
                      {"test_sessions", test},
                      {"warm_user_test_sessions", warm},
                      {"cold_user_test_sessions", cold},
                      {"split_boundary", config_.split_boundary},
                      {"split_path", split_path}};
    write_text_file(
        (std::filesystem::path(config_.output_dir) / "ingest_report.json").string(),
        report.dump(2));
    return report.dump(2);
}

std::string Pipeline::generate(bool dry_run) {
    const Catalog catalog = load_catalog_file(config_.catalog_path);
    SplitInputs split = load_split(config_);
    std::vector<ListeningSession> eligible =
        select_eligible(split.sessions, catalog, config_.min_session_tracks);

    // Narrow to the targeted partition, optionally balancing test quotas.
    if (config_.target_partition != "all") {
        const Partition wanted =
            config_.target_partition == "train" ? Partition::kTrain : Partition::kTest;
        std::vector<ListeningSession> filtered;
        for (auto& s : eligible)
            if (split.partition.at(s.session_id) == wanted) filtered.push_back(std::move(s));
        eligible = std::move(filtered);

        if (wanted == Partition::kTest && config_.balanced_sampling) {
            const BalancedSelection selection = balanced_test_sampling(
                eligible, split.assignments, config_.quotas, config_.seed);
            std::set<std::string> chosen(selection.session_ids.begin(),
                                         selection.session_ids.end());
            std::vector<ListeningSession> balanced;
            for (auto& s : eligible)
                if (chosen.count(s.session_id)) balanced.push_back(std::move(s));
            eligible = std::move(balanced);
        }
    }
    if (config_.max_conversations > 0 && eligible.size() > config_.max_conversations)
        eligible.resize(config_.max_conversations);

    if (dry_run) {
        // Planned call counts assume clean replies: profile + goal + one
        // listener and one recsys call per turn.
        const std::size_t n = eligible.size();
        const json plan{{"dry_run", true},
                        {"planned_conversations", n},
                        {"planned_calls",
                         {{"profile", n},
                          {"goal", n},
                          {"listener", n * static_cast<std::size_t>(config_.turns)},
                          {"recsys", n * static_cast<std::size_t>(config_.turns)}}},
                        {"config", json::parse(run_config_to_json_text(config_))}};
        return plan.dump(2);
    }

    const GoalTemplateCatalog templates = GoalTemplateCatalog::load_file(config_.templates_path);
    const PromptLibrary prompts = PromptLibrary::load_dir(config_.prompts_dir);
    auto backend = make_backend(config_.backend);
    LlmGateway gateway(backend, gateway_options(config_));

    std::filesystem::create_directories(config_.output_dir);
    const std::string store_path =
        (std::filesystem::path(config_.output_dir) / "conversations.jsonl").string();
    ConversationWriter writer(store_path);

    BatchOptions batch;
    batch.run_seed = config_.seed;
    batch.workers = config_.workers;
    batch.bounds = config_.bounds;
    batch.orchestrator.turns = config_.turns;
    batch.orchestrator.retry_cap = config_.retry_cap;

    const UtcTimestamp started = now_utc();
    const GenerationManifest manifest =
        generate_dataset(eligible, catalog, templates, prompts, gateway, batch,
                         [&](const Conversation& c) { writer.write(c); });
    writer.finalize_sorted();

    // Diagnostic log: one line per failed attempt of every aborted
    // conversation, raw reply included.
    const std::string diagnostics_path =
        (std::filesystem::path(config_.output_dir) / "diagnostics.jsonl").string();
    {
        std::ofstream diag(diagnostics_path, std::ios::out | std::ios::trunc);
        if (!diag) throw SinkUnavailableError("cannot write diagnostics: " + diagnostics_path);
        for (const auto& a : manifest.aborts) {
            const std::size_t slash = a.stage.find('/');
            const std::string role = a.stage.substr(0, slash);
            int turn = 0;
            if (slash != std::string::npos) {
                const std::string rest = a.stage.substr(slash + 1);
                if (rest.rfind("turn", 0) == 0) turn = std::atoi(rest.c_str() + 4);
            }
            if (a.attempts.empty()) {
                diag << json{{"conversation_id", a.conversation_id},
                             {"session_id", a.session_id},
                             {"turn", turn},
                             {"role", role},
                             {"failure_kind", "Abort"},
                             {"raw", a.reason}}
                            .dump()
                     << '\n';
            }
            for (const auto& attempt : a.attempts)
                diag << json{{"conversation_id", a.conversation_id},
                             {"session_id", a.session_id},
                             {"turn", turn},
                             {"role", role},
                             {"failure_kind", attempt.failure_kind},
                             {"raw", attempt.raw}}
                            .dump()
                     << '\n';
        }
    }

    json aborts = json::array();
    for (const auto& a : manifest.aborts)
        aborts.push_back({{"session_id", a.session_id},
                          {"conversation_id", a.conversation_id},
                          {"stage", a.stage},
                          {"reason", a.reason}});

    json doc{{"schema_version", 1},
             {"requested", manifest.requested},
             {"succeeded", manifest.succeeded},
             {"aborted", manifest.aborted},
             {"conversation_ids", manifest.conversation_ids},
             {"aborts", aborts},
             {"tokens", tokens_to_json(manifest.tokens)},
             {"bundles_audited", manifest.bundles_audited},
             {"isolation_breaches", manifest.isolation_breaches},
             {"store_path", store_path},
             {"diagnostics_path", diagnostics_path},
             {"backend_id", backend->backend_id()},
             {"started_at", format_rfc3339(started)},
             {"finished_at", format_rfc3339(now_utc())},
             {"config", json::parse(run_config_to_json_text(config_))}};
    if (config_.prices.input_per_million > 0.0 || config_.prices.output_per_million > 0.0)
        doc["cost"] = cost_to_json(estimate_cost(manifest.tokens, config_.prices));

    write_text_file((std::filesystem::path(config_.output_dir) / "manifest.json").string(),
                    doc.dump(2));
    return doc.dump(2);
}

std::string Pipeline::judge(const std::string& dataset_path) {
    const std::vector<Conversation> conversations = read_conversations_file(dataset_path);
    const Catalog catalog = load_catalog_file(config_.catalog_path);
    const PromptLibrary prompts = PromptLibrary::load_dir(config_.prompts_dir);
    const JudgeRubrics rubrics = JudgeRubrics::load_file(config_.rubrics_path);
    auto backend = make_backend(config_.backend);
    LlmGateway gateway(backend, gateway_options(config_));

    std::filesystem::create_directories(config_.output_dir);
    const std::string scores_path =
        (std::filesystem::path(config_.output_dir) / "judge_scores.jsonl").string();

    JudgeOptions options;
    options.retry_cap = config_.retry_cap;
    options.workers = config_.workers;
    options.seed = config_.seed;
    JudgeHarness harness(rubrics, prompts, catalog, gateway, options);
    const JudgeReport report = harness.run(conversations, scores_path);

    json aspects = json::object();
    for (const auto& [id, a] : report.per_aspect)
        aspects[id] = {{"n", a.n},
                       {"mean", a.mean},
                       {"histogram", a.histogram}};
    json failures = json::array();
    for (const auto& f : report.failures)
        failures.push_back({{"conversation_id", f.conversation_id},
                            {"aspect_id", f.aspect_id},
                            {"reason", f.reason}});

    const json doc{{"conversations", conversations.size()},
                   {"aspects", aspects},
                   {"failures", failures},
                   {"scores_path", scores_path},
                   {"tokens", tokens_to_json(gateway.meter().snapshot())}};
    write_text_file(
        (std::filesystem::path(config_.output_dir) / "judge_report.json").string(),
        doc.dump(2));
    return doc.dump(2);
}

std::string Pipeline::stats(const std::string& dataset_path) {
    const std::vector<Conversation> conversations = read_conversations_file(dataset_path);

    std::vector<SplitAssignment> assignments;
    if (!config_.sessions_path.empty() && std::filesystem::exists(config_.sessions_path))
        assignments = load_split(config_).assignments;

    const LengthUnit unit =
        config_.length_unit == "chars" ? LengthUnit::kChars : LengthUnit::kWords;
    const DatasetStats stats = compute_stats(conversations, assignments, unit);

    const json doc{{"conversation_count", stats.conversation_count},
                   {"users", {{"total", stats.users_total},
                              {"warm", stats.users_warm},
                              {"cold", stats.users_cold}}},
                   {"tracks", {{"total", stats.tracks_total},
                               {"warm", stats.tracks_warm},
                               {"cold", stats.tracks_cold}}},
                   {"avg_query_len", stats.avg_query_len},
                   {"avg_response_len", stats.avg_response_len},
                   {"avg_thought_len", stats.avg_thought_len},
                   {"length_unit", config_.length_unit}};
    return doc.dump(2);
}

std::string Pipeline::ablate(const std::vector<std::string>& dataset_paths,
                             bool use_stored_goals) {
    if (dataset_paths.empty()) throw InvalidInputError("ablate needs at least one dataset");

    std::shared_ptr<ChatBackend> backend;
    std::unique_ptr<LlmGateway> gateway;
    std::unique_ptr<PromptLibrary> prompts;
    if (!use_stored_goals) {
        backend = make_backend(config_.backend);
        gateway = std::make_unique<LlmGateway>(backend, gateway_options(config_));
        prompts = std::make_unique<PromptLibrary>(PromptLibrary::load_dir(config_.prompts_dir));
    }

    json rows = json::array();
    for (const auto& path : dataset_paths) {
        const std::vector<Conversation> conversations = read_conversations_file(path);
        std::vector<GoalClassification> classifications;
        std::size_t failures = 0;
        for (const auto& c : conversations) {
            if (use_stored_goals) {
                classifications.push_back(classification_from_goal(c));
            } else {
                auto result =
                    classify_goal(c, *prompts, *gateway, config_.retry_cap, config_.seed);
                if (std::holds_alternative<GoalClassification>(result))
                    classifications.push_back(std::get<GoalClassification>(result));
                else
                    ++failures;
            }
        }
        if (classifications.empty())
            throw InvalidInputError("no classifiable conversations in " + path);
        const DiversityReport report = diversity_report(classifications);
        rows.push_back({{"dataset", path},
                        {"n", report.n},
                        {"kld_specificity", report.specificity.kld_to_uniform},
                        {"kld_topic", report.topic.kld_to_uniform},
                        {"coverage_specificity", report.specificity.coverage},
                        {"coverage_topic", report.topic.coverage},
                        {"specificity", axis_to_json(report.specificity)},
                        {"topic", axis_to_json(report.topic)},
                        {"classification_failures", failures}});
    }
    const json doc{{"mode", use_stored_goals ? "stored_goals" : "judge"},
                   {"datasets", rows}};
    return doc.dump(2);
}

}  // namespace convosim
