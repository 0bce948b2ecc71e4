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

#include "convosim/run_config.hpp"

#include <fstream>

#include "convosim/errors.hpp"
#include "convosim/time_utils.hpp"
#include <json.hpp>

namespace convosim {

using nlohmann::json;

namespace {

void merge_into(RunConfig& config, const json& doc) {
    if (!doc.is_object()) throw InvalidInputError("run config must be a JSON object");

    auto str = [&](const char* key, std::string& slot) {
        if (doc.contains(key)) slot = doc.at(key).get<std::string>();
    };
    auto uint = [&](const char* key, std::size_t& slot) {
        if (doc.contains(key)) slot = doc.at(key).get<std::size_t>();
    };
    auto integer = [&](const char* key, int& slot) {
        if (doc.contains(key)) slot = doc.at(key).get<int>();
    };
    auto boolean = [&](const char* key, bool& slot) {
        if (doc.contains(key)) slot = doc.at(key).get<bool>();
    };

    str("catalog_path", config.catalog_path);
    str("sessions_path", config.sessions_path);
    str("templates_path", config.templates_path);
    str("prompts_dir", config.prompts_dir);
    str("rubrics_path", config.rubrics_path);
    str("output_dir", config.output_dir);
    str("split_boundary", config.split_boundary);
    str("target_partition", config.target_partition);
    boolean("balanced_sampling", config.balanced_sampling);
    uint("max_conversations", config.max_conversations);

    if (doc.contains("quotas")) {
        const json& q = doc.at("quotas");
        if (q.contains("warm_conversations"))
            config.quotas.warm_conversations = q.at("warm_conversations").get<std::size_t>();
        if (q.contains("cold_conversations"))
            config.quotas.cold_conversations = q.at("cold_conversations").get<std::size_t>();
    }

    uint("profile_size", config.bounds.profile_size);
    uint("pool_min", config.bounds.pool_min);
    uint("pool_max", config.bounds.pool_max);
    uint("min_session_tracks", config.min_session_tracks);
    integer("turns", config.turns);
    integer("retry_cap", config.retry_cap);
    integer("workers", config.workers);
    if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
    uint("token_text_divisor", config.token_text_divisor);
    str("length_unit", config.length_unit);
    boolean("allow_overrides", config.allow_overrides);

    if (doc.contains("prices")) {
        const json& p = doc.at("prices");
        if (p.contains("input_per_million"))
            config.prices.input_per_million = p.at("input_per_million").get<double>();
        if (p.contains("output_per_million"))
            config.prices.output_per_million = p.at("output_per_million").get<double>();
    }

    if (doc.contains("backend")) {
        const json& b = doc.at("backend");
        BackendConfig& backend = config.backend;
        auto bstr = [&](const char* key, std::string& slot) {
            if (b.contains(key)) slot = b.at(key).get<std::string>();
        };
        bstr("kind", backend.kind);
        bstr("script_path", backend.script_path);
        bstr("endpoint", backend.endpoint);
        bstr("route", backend.route);
        bstr("model", backend.model);
        bstr("api_key_env", backend.api_key_env);
        if (b.contains("timeout_seconds"))
            backend.timeout_seconds = b.at("timeout_seconds").get<int>();
        if (b.contains("requests_per_minute"))
            backend.requests_per_minute = b.at("requests_per_minute").get<double>();
        if (b.contains("max_attempts")) backend.max_attempts = b.at("max_attempts").get<int>();
    }
}

json parse_object(const std::string& text, const char* what) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw InvalidInputError(std::string(what) + " is not a JSON object");
    return doc;
}

}  // namespace

RunConfig run_config_from_json_text(const std::string& json_text) {
    RunConfig config;
    merge_into(config, parse_object(json_text, "run config"));
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return run_config_from_json_text(text);
}

RunConfig apply_overrides(const RunConfig& base, const std::string& overrides_json_text) {
    RunConfig config = base;
    if (!overrides_json_text.empty())
        merge_into(config, parse_object(overrides_json_text, "config overrides"));
    return config;
}

std::string run_config_to_json_text(const RunConfig& c) {
    const json doc{
        {"catalog_path", c.catalog_path},
        {"sessions_path", c.sessions_path},
        {"templates_path", c.templates_path},
        {"prompts_dir", c.prompts_dir},
        {"rubrics_path", c.rubrics_path},
        {"output_dir", c.output_dir},
        {"split_boundary", c.split_boundary},
        {"target_partition", c.target_partition},
        {"balanced_sampling", c.balanced_sampling},
        {"max_conversations", c.max_conversations},
        {"quotas",
         {{"warm_conversations", c.quotas.warm_conversations},
          {"cold_conversations", c.quotas.cold_conversations}}},
        {"profile_size", c.bounds.profile_size},
        {"pool_min", c.bounds.pool_min},
        {"pool_max", c.bounds.pool_max},
        {"min_session_tracks", c.min_session_tracks},
        {"turns", c.turns},
        {"retry_cap", c.retry_cap},
        {"workers", c.workers},
        {"seed", c.seed},
        {"token_text_divisor", c.token_text_divisor},
        {"length_unit", c.length_unit},
        {"allow_overrides", c.allow_overrides},
        {"prices",
         {{"input_per_million", c.prices.input_per_million},
          {"output_per_million", c.prices.output_per_million}}},
        {"backend",
         {{"kind", c.backend.kind},
          {"script_path", c.backend.script_path},
          {"endpoint", c.backend.endpoint},
          {"route", c.backend.route},
          {"model", c.backend.model},
          {"api_key_env", c.backend.api_key_env},
          {"timeout_seconds", c.backend.timeout_seconds},
          {"requests_per_minute", c.backend.requests_per_minute},
          {"max_attempts", c.backend.max_attempts}}}};
    return doc.dump(2);
}

void validate_run_config(const RunConfig& c) {
    // Hard shape errors first.
    if (c.turns < 1) throw InvalidInputError("turns must be >= 1");
    if (c.retry_cap < 1) throw InvalidInputError("retry_cap must be >= 1");
    if (c.workers < 1) throw InvalidInputError("workers must be >= 1");
    if (c.bounds.profile_size < 1) throw InvalidInputError("profile_size must be >= 1");
    if (c.bounds.pool_min < 1 || c.bounds.pool_min > c.bounds.pool_max)
        throw InvalidInputError("pool bounds must satisfy 1 <= pool_min <= pool_max");
    if (c.min_session_tracks < c.bounds.profile_size + c.bounds.pool_min)
        throw InvalidInputError(
            "min_session_tracks must cover profile_size + pool_min, got " +
            std::to_string(c.min_session_tracks));
    if (c.backend.kind != "scripted" && c.backend.kind != "live")
        throw InvalidInputError("backend.kind must be 'scripted' or 'live'");
    if (c.target_partition != "all" && c.target_partition != "train" &&
        c.target_partition != "test")
        throw InvalidInputError("target_partition must be all|train|test");
    if (c.length_unit != "words" && c.length_unit != "chars")
        throw InvalidInputError("length_unit must be 'words' or 'chars'");
    if (c.token_text_divisor < 1) throw InvalidInputError("token_text_divisor must be >= 1");
    parse_rfc3339(c.split_boundary);  // throws on malformed boundary

    // Published-constant pins; loosened only behind the explicit flag.
    if (!c.allow_overrides) {
        if (c.bounds.profile_size != 5)
            throw InvalidInputError("profile_size is pinned to 5 (set allow_overrides to change)");
        if (c.bounds.pool_min < 16 || c.bounds.pool_max > 32)
            throw InvalidInputError(
                "pool bounds are pinned within [16,32] (set allow_overrides to change)");
        if (c.min_session_tracks != 21)
            throw InvalidInputError(
                "min_session_tracks is pinned to 21 (set allow_overrides to change)");
        if (c.turns != 8)
            throw InvalidInputError("turns is pinned to 8 (set allow_overrides to change)");
    }
}

}  // namespace convosim
