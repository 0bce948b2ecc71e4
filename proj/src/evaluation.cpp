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

#include "convosim/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "convosim/agents.hpp"
#include "convosim/rng.hpp"
#include <json.hpp>

namespace convosim {

using nlohmann::json;

const std::array<const char*, 10>& JudgeRubrics::expected_ids() {
    static const std::array<const char*, 10> ids = {
        "goal_plausibility",          "profile_appropriateness",
        "listener_progress_accuracy", "listener_thought_quality",
        "listener_message_linguistic", "listener_message_helpfulness",
        "recsys_thought_quality",     "recsys_track_quality",
        "recsys_message_linguistic",  "recsys_message_alignment"};
    return ids;
}

JudgeRubrics JudgeRubrics::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open judge rubric file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw InvalidInputError("judge rubric file must be a JSON array: " + path);

    JudgeRubrics rubrics;
    std::set<std::string> seen;
    for (const auto& entry : doc) {
        JudgeAspect aspect;
        aspect.id = entry.value("id", "");
        aspect.entity = entry.value("entity", "");
        aspect.rubric = entry.value("rubric", "");
        aspect.needs_track_data = entry.value("needs_track_data", false);
        if (aspect.id.empty() || aspect.rubric.empty())
            throw InvalidInputError("judge rubric entries need non-empty id and rubric");
        if (!seen.insert(aspect.id).second)
            throw InvalidInputError("duplicate judge aspect id: " + aspect.id);
        rubrics.aspects_.push_back(std::move(aspect));
    }

    for (const char* id : expected_ids())
        if (!seen.count(id))
            throw InvalidInputError(std::string("judge rubric file is missing aspect '") + id +
                                    "'");
    if (rubrics.aspects_.size() != expected_ids().size())
        throw InvalidInputError("judge rubric file must define exactly the ten known aspects");
    return rubrics;
}

JudgeReport aggregate(std::vector<JudgeScoreRecord> scores,
                      std::vector<JudgeFailureRecord> failures) {
    JudgeReport report;
    for (const auto& s : scores) {
        if (s.score < 1 || s.score > 4)
            throw InvalidInputError("judge score out of range for aspect " + s.aspect_id);
        AspectReport& a = report.per_aspect[s.aspect_id];
        a.n += 1;
        a.histogram[static_cast<std::size_t>(s.score - 1)] += 1;
    }
    for (auto& [_, a] : report.per_aspect) {
        long sum = 0;
        for (int v = 1; v <= 4; ++v) sum += static_cast<long>(v) * a.histogram[v - 1];
        a.mean = static_cast<double>(sum) / a.n;
    }
    report.scores = std::move(scores);
    report.failures = std::move(failures);
    return report;
}

std::string render_transcript(const Conversation& c) {
    std::ostringstream out;
    out << "Goal category: " << c.goal.category_code
        << ", specificity: " << c.goal.specificity_code
        << ", target turns: " << c.goal.target_turn_count << "\n"
        << "Listener goal: " << c.goal.listener_goal << "\n\n";
    for (const auto& t : c.turns) {
        out << "Turn " << t.index << "\n";
        out << "  Listener thought: " << t.listener.thought << "\n";
        if (t.listener.goal_progress)
            out << "  Listener progress label: " << to_string(*t.listener.goal_progress) << "\n";
        out << "  Listener: " << t.listener.message << "\n";
        out << "  RecSys thought: " << t.recsys.thought << "\n";
        out << "  RecSys recommends " << t.recsys.track_id << ": " << t.recsys.message << "\n";
    }
    return out.str();
}

JudgeHarness::JudgeHarness(const JudgeRubrics& rubrics, const PromptLibrary& prompts,
                           const Catalog& catalog, LlmGateway& gateway, JudgeOptions options)
    : rubrics_(&rubrics),
      prompts_(&prompts),
      catalog_(&catalog),
      gateway_(&gateway),
      options_(options) {}

std::variant<JudgeScoreRecord, JudgeFailureRecord> JudgeHarness::judge_conversation(
    const Conversation& conversation, const JudgeAspect& aspect) const {
    // Track context for the aspects that need it: the recommended tracks
    // plus, for pool/profile-level aspects, those track sets.
    std::string context;
    if (aspect.needs_track_data) {
        std::ostringstream ctx;
        ctx << "Track data:\n";
        auto render = [&](const std::string& id) {
            if (catalog_->contains(id)) ctx << "- " << render_track_text(catalog_->at(id), true) << "\n";
        };
        if (aspect.id == "goal_plausibility") {
            for (const auto& id : conversation.sample.pool_tracks) render(id);
        } else if (aspect.id == "profile_appropriateness") {
            for (const auto& id : conversation.sample.profile_tracks) render(id);
        } else {
            for (const auto& t : conversation.turns) render(t.recsys.track_id);
        }
        context = ctx.str();
    }

    ChatRequest base;
    base.role_tag = RoleTag::kJudge;
    base.seed = derive_seed(options_.seed, conversation.conversation_id);
    base.parts.push_back(ContentPart::text(
        render_template(prompts_->get("judge_score"),
                        {{"aspect_id", aspect.id},
                         {"rubric", aspect.rubric},
                         {"context", context},
                         {"transcript", render_transcript(conversation)}})));
    if (aspect.needs_track_data) {
        // Attach the audio/image data of the recommended tracks, as in
        // generation.
        for (const auto& t : conversation.turns) {
            if (!catalog_->contains(t.recsys.track_id)) continue;
            const Track& track = catalog_->at(t.recsys.track_id);
            if (track.audio_ref) base.parts.push_back(ContentPart::audio(*track.audio_ref));
            if (track.image_ref) base.parts.push_back(ContentPart::image(*track.image_ref));
        }
    }

    try {
        auto outcome = repair_loop<JudgeScore>(
            *gateway_,
            [&](const std::optional<ParseFailure>& failure) {
                ChatRequest request = base;
                if (failure)
                    request.parts.push_back(ContentPart::text(
                        render_template(prompts_->get("repair"),
                                        {{"failure_kind", to_string(failure->kind)},
                                         {"failure_detail", failure->detail}})));
                return request;
            },
            [](const std::string& raw) { return parse_judge_score(raw); }, options_.retry_cap,
            "judge/" + aspect.id);
        return JudgeScoreRecord{conversation.conversation_id, aspect.id, outcome.value.score,
                                outcome.value.rationale};
    } catch (const Error& e) {
        return JudgeFailureRecord{conversation.conversation_id, aspect.id, e.what()};
    }
}

namespace {

std::vector<JudgeScoreRecord> load_score_file(const std::string& path) {
    std::vector<JudgeScoreRecord> out;
    std::ifstream in(path);
    if (!in) return out;  // absent file: fresh batch
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        if (!j.is_object()) continue;
        out.push_back(JudgeScoreRecord{j.value("conversation_id", ""), j.value("aspect_id", ""),
                                       j.value("score", 0), j.value("rationale", "")});
    }
    return out;
}

}  // namespace

JudgeReport JudgeHarness::run(const std::vector<Conversation>& conversations,
                              const std::string& scores_path) const {
    std::vector<JudgeScoreRecord> scores = load_score_file(scores_path);
    std::set<std::pair<std::string, std::string>> done;
    for (const auto& s : scores) done.emplace(s.conversation_id, s.aspect_id);

    std::ofstream sink(scores_path, std::ios::app);
    if (!sink) throw SinkUnavailableError("cannot open judge score file: " + scores_path);

    std::mutex result_mutex;
    std::vector<JudgeFailureRecord> failures;
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= conversations.size()) break;
            const Conversation& conversation = conversations[i];
            // Fixed aspect order within a conversation keeps scripted runs
            // deterministic at any worker count.
            for (const auto& aspect : rubrics_->aspects()) {
                {
                    std::lock_guard<std::mutex> lock(result_mutex);
                    if (done.count({conversation.conversation_id, aspect.id})) continue;
                }
                auto result = judge_conversation(conversation, aspect);
                std::lock_guard<std::mutex> lock(result_mutex);
                if (std::holds_alternative<JudgeScoreRecord>(result)) {
                    const auto& record = std::get<JudgeScoreRecord>(result);
                    scores.push_back(record);
                    done.emplace(record.conversation_id, record.aspect_id);
                    sink << json{{"conversation_id", record.conversation_id},
                                 {"aspect_id", record.aspect_id},
                                 {"score", record.score},
                                 {"rationale", record.rationale}}
                                .dump()
                         << '\n';
                    sink.flush();
                } else {
                    failures.push_back(std::get<JudgeFailureRecord>(result));
                }
            }
        }
    };

    const int worker_count = std::max(
        1, std::min<int>(options_.workers, static_cast<int>(conversations.size())));
    if (worker_count <= 1 || conversations.size() <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < worker_count; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    return aggregate(std::move(scores), std::move(failures));
}

std::variant<GoalClassification, JudgeFailureRecord> classify_goal(
    const Conversation& conversation, const PromptLibrary& prompts, LlmGateway& gateway,
    int retry_cap, std::uint64_t seed) {
    ChatRequest base;
    base.role_tag = RoleTag::kJudge;
    base.seed = derive_seed(seed, conversation.conversation_id + "/classify");
    // Transcript only: classification must work for arms generated without a
    // stored goal.
    std::ostringstream transcript;
    for (const auto& t : conversation.turns) {
        transcript << "Turn " << t.index << "\n";
        transcript << "  Listener: " << t.listener.message << "\n";
        transcript << "  RecSys recommends " << t.recsys.track_id << ": " << t.recsys.message
                   << "\n";
    }
    base.parts.push_back(ContentPart::text(render_template(
        prompts.get("judge_classify"), {{"transcript", transcript.str()}})));

    try {
        auto outcome = repair_loop<GoalClassification>(
            gateway,
            [&](const std::optional<ParseFailure>& failure) {
                ChatRequest request = base;
                if (failure)
                    request.parts.push_back(ContentPart::text(
                        render_template(prompts.get("repair"),
                                        {{"failure_kind", to_string(failure->kind)},
                                         {"failure_detail", failure->detail}})));
                return request;
            },
            [](const std::string& raw) { return parse_goal_class(raw); }, retry_cap,
            "classify");
        return outcome.value;
    } catch (const Error& e) {
        return JudgeFailureRecord{conversation.conversation_id, "classification", e.what()};
    }
}

GoalClassification classification_from_goal(const Conversation& conversation) {
    return GoalClassification{conversation.goal.category_code,
                              conversation.goal.specificity_code};
}

std::vector<std::string> specificity_bins() {
    return {kSpecificityCodes.begin(), kSpecificityCodes.end()};
}

std::vector<std::string> topic_bins() {
    std::vector<std::string> bins;
    for (char c : kTopicCodes) bins.emplace_back(1, c);
    return bins;
}

AxisDiversity diversity_metrics(const std::vector<std::string>& assignments,
                                const std::vector<std::string>& bins) {
    if (assignments.empty())
        throw InvalidInputError("diversity metrics need at least one assignment");
    if (bins.empty()) throw InvalidInputError("diversity metrics need at least one bin");

    AxisDiversity out;
    out.bins = bins;
    out.distribution.assign(bins.size(), 0.0);
    for (const auto& code : assignments) {
        const auto it = std::find(bins.begin(), bins.end(), code);
        if (it == bins.end())
            throw InvalidInputError("assignment '" + code + "' is not a known bin");
        out.distribution[static_cast<std::size_t>(it - bins.begin())] += 1.0;
    }

    const double n = static_cast<double>(assignments.size());
    const double uniform = 1.0 / static_cast<double>(bins.size());
    std::size_t non_zero = 0;
    double kld = 0.0;
    for (double& p : out.distribution) {
        p /= n;
        if (p > 0.0) {
            ++non_zero;
            kld += p * std::log(p / uniform);
        }
    }
    out.kld_to_uniform = kld;
    out.coverage = static_cast<double>(non_zero) / static_cast<double>(bins.size());
    return out;
}

DiversityReport diversity_report(const std::vector<GoalClassification>& classifications) {
    DiversityReport report;
    report.n = classifications.size();
    std::vector<std::string> specificities, topics;
    specificities.reserve(classifications.size());
    topics.reserve(classifications.size());
    for (const auto& c : classifications) {
        specificities.push_back(c.specificity_code);
        topics.push_back(c.topic_code);
    }
    report.specificity = diversity_metrics(specificities, specificity_bins());
    report.topic = diversity_metrics(topics, topic_bins());
    return report;
}

}  // namespace convosim
