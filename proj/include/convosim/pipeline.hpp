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

#include <memory>
#include <string>
#include <vector>

#include "convosim/run_config.hpp"

namespace convosim {

/// Command bodies behind the C API and the CLI. Each call loads what it
/// needs, runs one stage, writes its output files under config.output_dir,
/// and returns the report as a JSON document.
class Pipeline {
public:
    explicit Pipeline(RunConfig config);  // validates the config

    /// Split + eligibility: writes split.jsonl, returns the counts report.
    std::string ingest();

    /// Full generation batch (or a call-count plan when dry_run). Writes
    /// conversations.jsonl + manifest.json.
    std::string generate(bool dry_run = false);

    /// Judge harness over a conversation store. Writes judge_scores.jsonl
    /// (resumable) + judge_report.json.
    std::string judge(const std::string& dataset_path);

    /// Dataset statistics; uses sessions+boundary for warm/cold when the
    /// config provides them.
    std::string stats(const std::string& dataset_path);

    /// Diversity comparison across stores, one row per dataset. With
    /// use_stored_goals the codes come from the stored goals; otherwise the
    /// judge backend classifies transcripts.
    std::string ablate(const std::vector<std::string>& dataset_paths, bool use_stored_goals);

    const RunConfig& config() const { return config_; }

private:
    RunConfig config_;
};

}  // namespace convosim
