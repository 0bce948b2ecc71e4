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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convosim/catalog.hpp"
#include "convosim/llm_gateway.hpp"
#include "convosim/orchestrator.hpp"
#include "convosim/prompt_template.hpp"
#include "convosim/response_parser.hpp"

namespace convosim {

/// One judged aspect: the rubric text is data, editable without recompiling.
struct JudgeAspect {
    std::string id;
    std::string entity;
    std::string rubric;
    bool needs_track_data = false;
};

/// Loads the ten-aspect rubric set and validates the fixed id list.
class JudgeRubrics {
public:
    static JudgeRubrics load_file(const std::string& path);
    static const std::array<const char*, 10>& expected_ids();

    const std::vector<JudgeAspect>& aspects() const { return aspects_; }

private:
    std::vector<JudgeAspect> aspects_;
};

struct JudgeScoreRecord {
    std::string conversation_id;
    std::string aspect_id;
    int score = 0;
    std::string rationale;
};

struct JudgeFailureRecord {
    std::string conversation_id;
    std::string aspect_id;
    std::string reason;
};

struct AspectReport {
    int n = 0;
    double mean = 0.0;
    std::array<int, 4> histogram{};  // scores 1..4
};

struct JudgeReport {
    std::map<std::string, AspectReport> per_aspect;
    std::vector<JudgeScoreRecord> scores;
    std::vector<JudgeFailureRecord> failures;
};

/// Arithmetic mean + histogram per aspect; permutation-invariant.
JudgeReport aggregate(std::vector<JudgeScoreRecord> scores,
                      std::vector<JudgeFailureRecord> failures = {});

/// Renders the full transcript (thoughts, progress labels, messages) the
/// judge reads.
std::string render_transcript(const Conversation& conversation);

struct JudgeOptions {
    int retry_cap = 2;  // attempts per (conversation, aspect) call
    int workers = 1;
    std::uint64_t seed = 0;
};

/// One gateway call per (conversation, aspect); failures are recorded, never
/// fatal. A batch is resumable through its scores file: pairs already
/// present are skipped on re-run.
class JudgeHarness {
public:
    JudgeHarness(const JudgeRubrics& rubrics, const PromptLibrary& prompts,
                 const Catalog& catalog, LlmGateway& gateway, JudgeOptions options = {});

    /// Scores one aspect of one conversation. Returns the failure reason on
    /// the error path.
    std::variant<JudgeScoreRecord, JudgeFailureRecord> judge_conversation(
        const Conversation& conversation, const JudgeAspect& aspect) const;

    /// Runs all aspects over all conversations, appending to scores_path
    /// (JSONL) as results land. Aspects run in fixed order within a
    /// conversation; conversations run in parallel up to the worker limit.
    JudgeReport run(const std::vector<Conversation>& conversations,
                    const std::string& scores_path) const;

private:
    const JudgeRubrics* rubrics_;
    const PromptLibrary* prompts_;
    const Catalog* catalog_;
    LlmGateway* gateway_;
    JudgeOptions options_;
};

/// Classifies one conversation's goal through the judge backend
/// (transcript-only), for datasets whose goals are absent or untrusted.
std::variant<GoalClassification, JudgeFailureRecord> classify_goal(
    const Conversation& conversation, const PromptLibrary& prompts, LlmGateway& gateway,
    int retry_cap, std::uint64_t seed);

/// Shortcut mode: read the codes the goal agent already committed to.
GoalClassification classification_from_goal(const Conversation& conversation);

struct AxisDiversity {
    std::vector<std::string> bins;
    std::vector<double> distribution;  // sums to 1 over bins
    double kld_to_uniform = 0.0;       // nats
    double coverage = 0.0;             // non-zero bins / bins
};

/// KLD = sum over non-zero bins of p*ln(p/u) with u uniform; coverage is the
/// non-zero-bin fraction. Throws InvalidInputError on empty input.
AxisDiversity diversity_metrics(const std::vector<std::string>& assignments,
                                const std::vector<std::string>& bins);

struct DiversityReport {
    std::size_t n = 0;
    AxisDiversity specificity;  // 4 bins
    AxisDiversity topic;        // 11 bins
};

DiversityReport diversity_report(const std::vector<GoalClassification>& classifications);

std::vector<std::string> specificity_bins();
std::vector<std::string> topic_bins();

}  // namespace convosim
