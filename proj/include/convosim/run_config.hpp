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
#include <string>

#include "convosim/catalog.hpp"
#include "convosim/llm_gateway.hpp"

namespace convosim {

struct BackendConfig {
    std::string kind = "scripted";  // scripted | live
    std::string script_path;
    std::string endpoint;
    std::string route = "/v1/chat/completions";
    std::string model;
    std::string api_key_env = "CONVOSIM_API_KEY";
    int timeout_seconds = 60;
    double requests_per_minute = 0.0;
    int max_attempts = 3;
};

/// Everything a run needs, loaded from one JSON document. Every knob is
/// overridable from the command line; the effective config is echoed into
/// the manifest.
struct RunConfig {
    std::string catalog_path;
    std::string sessions_path;
    std::string templates_path = "data/goal_templates.json";
    std::string prompts_dir = "data/prompts";
    std::string rubrics_path = "data/judge_rubrics.json";
    std::string output_dir = "out";

    std::string split_boundary = "2019-01-01T00:00:00Z";
    Quotas quotas{800, 200};
    std::string target_partition = "all";  // all | train | test
    bool balanced_sampling = false;        // apply quotas when targeting test
    std::size_t max_conversations = 0;     // 0 = unlimited

    SamplingBounds bounds;              // profile 5, pool [16,32]
    std::size_t min_session_tracks = 21;
    int turns = 8;
    int retry_cap = 3;
    int workers = 4;
    std::uint64_t seed = 0;

    BackendConfig backend;
    std::size_t token_text_divisor = 4;
    std::string length_unit = "words";  // words | chars
    PriceTable prices;

    /// Pins below stay at their published values unless this is set.
    bool allow_overrides = false;
};

RunConfig run_config_from_json_text(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// Applies a JSON object of overrides (same keys as the config document) on
/// top of an existing config.
RunConfig apply_overrides(const RunConfig& base, const std::string& overrides_json_text);

std::string run_config_to_json_text(const RunConfig& config);

/// Rejects constants outside their pinned values (profile size 5, pool
/// bounds within [16,32], eligibility threshold 21, 8 turns) unless
/// allow_overrides is set; malformed values are always rejected.
void validate_run_config(const RunConfig& config);

}  // namespace convosim
