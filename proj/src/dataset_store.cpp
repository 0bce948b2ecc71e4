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

#include "convosim/dataset_store.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>

#include "convosim/errors.hpp"
#include <json.hpp>

namespace convosim {

using nlohmann::json;

namespace {

json demographics_to_json(const Demographics& d) {
    return json{{"age_group", d.age_group},
                {"country", d.country},
                {"gender", d.gender},
                {"preferred_language", d.preferred_language}};
}

Demographics demographics_from_json(const json& j) {
    Demographics d;
    d.age_group = j.value("age_group", "unknown");
    d.country = j.value("country", "unknown");
    d.gender = j.value("gender", "unknown");
    d.preferred_language = j.value("preferred_language", "unknown");
    return d;
}

json goal_to_json(const ConversationGoal& g) {
    return json{{"category_code", g.category_code},
                {"specificity_code", g.specificity_code},
                {"target_turn_count", g.target_turn_count},
                {"listener_goal", g.listener_goal},
                {"listener_expertise", g.listener_expertise},
                {"initial_query_examples", g.initial_query_examples}};
}

ConversationGoal goal_from_json(const json& j) {
    ConversationGoal g;
    g.category_code = j.value("category_code", "");
    g.specificity_code = j.value("specificity_code", "");
    g.target_turn_count = j.value("target_turn_count", 0);
    g.listener_goal = j.value("listener_goal", "");
    g.listener_expertise = j.value("listener_expertise", "");
    for (const auto& q : j.value("initial_query_examples", json::array()))
        g.initial_query_examples.push_back(q.get<std::string>());
    return g;
}

json turn_to_json(const Turn& t) {
    json listener{{"thought", t.listener.thought}, {"message", t.listener.message}};
    if (t.listener.goal_progress)
        listener["goal_progress"] = to_string(*t.listener.goal_progress);
    return json{{"index", t.index},
                {"listener", listener},
                {"recsys",
                 {{"thought", t.recsys.thought},
                  {"track_id", t.recsys.track_id},
                  {"message", t.recsys.message}}}};
}

Turn turn_from_json(const json& j) {
    Turn t;
    t.index = j.value("index", 0);
    const json& listener = j.at("listener");
    t.listener.thought = listener.value("thought", "");
    t.listener.message = listener.value("message", "");
    if (listener.contains("goal_progress")) {
        const std::string label = listener["goal_progress"].get<std::string>();
        t.listener.goal_progress = label == "MOVES_TOWARD_GOAL"
                                       ? GoalProgress::kMovesTowardGoal
                                       : GoalProgress::kDoesNotMoveTowardGoal;
    }
    const json& recsys = j.at("recsys");
    t.recsys.thought = recsys.value("thought", "");
    t.recsys.track_id = recsys.value("track_id", "");
    t.recsys.message = recsys.value("message", "");
    return t;
}

}  // namespace

std::string conversation_to_json_line(const Conversation& c) {
    json turns = json::array();
    for (const auto& t : c.turns) turns.push_back(turn_to_json(t));

    // nlohmann::json orders keys alphabetically, which keeps serialized
    // records byte-stable across runs.
    const json record{
        {"schema_version", kConversationSchemaVersion},
        {"conversation_id", c.conversation_id},
        {"session_id", c.session_id},
        {"profile",
         {{"demographics", demographics_to_json(c.profile.demographics)},
          {"preferred_musical_culture", c.profile.preferred_musical_culture},
          {"top_1_artist", c.profile.top_1_artist},
          {"top_1_genre", c.profile.top_1_genre}}},
        {"goal", goal_to_json(c.goal)},
        {"sample",
         {{"session_id", c.sample.session_id},
          {"profile_tracks", c.sample.profile_tracks},
          {"pool_tracks", c.sample.pool_tracks},
          {"demographics", demographics_to_json(c.sample.demographics)}}},
        {"turns", turns},
        {"metadata",
         {{"seed", c.metadata.seed},
          {"backend_id", c.metadata.backend_id},
          {"user_id", c.metadata.user_id},
          {"started_at", format_rfc3339(c.metadata.started_at)},
          {"finished_at", format_rfc3339(c.metadata.finished_at)},
          {"input_tokens", c.metadata.usage.input_tokens},
          {"output_tokens", c.metadata.usage.output_tokens},
          {"request_count", c.metadata.request_count},
          {"bundles_audited", c.metadata.bundles_audited},
          {"isolation_breaches", c.metadata.isolation_breaches}}}};
    return record.dump();
}

Conversation conversation_from_json_line(const std::string& line) {
    const json j = json::parse(line);
    Conversation c;
    c.conversation_id = j.value("conversation_id", "");
    c.session_id = j.value("session_id", "");

    const json& profile = j.at("profile");
    c.profile.demographics = demographics_from_json(profile.at("demographics"));
    c.profile.preferred_musical_culture = profile.value("preferred_musical_culture", "");
    c.profile.top_1_artist = profile.value("top_1_artist", "");
    c.profile.top_1_genre = profile.value("top_1_genre", "");

    c.goal = goal_from_json(j.at("goal"));

    const json& sample = j.at("sample");
    c.sample.session_id = sample.value("session_id", "");
    for (const auto& id : sample.value("profile_tracks", json::array()))
        c.sample.profile_tracks.push_back(id.get<std::string>());
    for (const auto& id : sample.value("pool_tracks", json::array()))
        c.sample.pool_tracks.push_back(id.get<std::string>());
    c.sample.demographics = demographics_from_json(sample.at("demographics"));

    for (const auto& t : j.at("turns")) c.turns.push_back(turn_from_json(t));

    const json& meta = j.at("metadata");
    c.metadata.seed = meta.value("seed", 0ULL);
    c.metadata.backend_id = meta.value("backend_id", "");
    c.metadata.user_id = meta.value("user_id", "");
    c.metadata.started_at = parse_rfc3339(meta.value("started_at", "1970-01-01T00:00:00Z"));
    c.metadata.finished_at = parse_rfc3339(meta.value("finished_at", "1970-01-01T00:00:00Z"));
    c.metadata.usage.input_tokens = meta.value("input_tokens", 0LL);
    c.metadata.usage.output_tokens = meta.value("output_tokens", 0LL);
    c.metadata.request_count = meta.value("request_count", 0);
    c.metadata.bundles_audited = meta.value("bundles_audited", 0);
    c.metadata.isolation_breaches = meta.value("isolation_breaches", 0);
    return c;
}

ConversationWriter::ConversationWriter(const std::string& path) : path_(path) {
    out_.open(path, std::ios::out | std::ios::trunc);
    if (!out_) throw SinkUnavailableError("cannot open conversation store for writing: " + path);
}

std::string ConversationWriter::write(const Conversation& conversation) {
    const std::string line = conversation_to_json_line(conversation);
    std::lock_guard<std::mutex> lock(mutex_);
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw SinkUnavailableError("write failed on conversation store: " + path_);
    ++written_;
    return conversation.conversation_id;
}

void ConversationWriter::finalize_sorted() {
    std::lock_guard<std::mutex> lock(mutex_);
    out_.close();

    std::ifstream in(path_);
    if (!in) throw SinkUnavailableError("cannot reopen conversation store: " + path_);
    std::vector<std::pair<std::string, std::string>> keyed;  // (conversation_id, line)
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json j = json::parse(line, nullptr, false);
        keyed.emplace_back(j.is_object() ? j.value("conversation_id", "") : "", line);
    }
    in.close();
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    const std::string tmp = path_ + ".tmp";
    {
        std::ofstream sorted(tmp, std::ios::out | std::ios::trunc);
        if (!sorted) throw SinkUnavailableError("cannot write sorted store: " + tmp);
        for (const auto& [_, l] : keyed) sorted << l << '\n';
    }
    std::filesystem::rename(tmp, path_);
}

std::vector<Conversation> read_conversations_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open conversation store: " + path);
    std::vector<Conversation> out;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        try {
            out.push_back(conversation_from_json_line(line));
        } catch (const std::exception& e) {
            throw MalformedRecordError(line_number, e.what());
        }
    }
    return out;
}

std::size_t text_length(const std::string& text, LengthUnit unit) {
    if (unit == LengthUnit::kChars) return text.size();
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_word) ++words;
        in_word = !space;
    }
    return words;
}

DatasetStats compute_stats(const std::vector<Conversation>& conversations,
                           const std::vector<SplitAssignment>& assignments, LengthUnit unit) {
    if (conversations.empty())
        throw EmptyDatasetError("cannot compute statistics over an empty dataset");

    std::map<std::string, const SplitAssignment*> by_session;
    for (const auto& a : assignments) by_session[a.session_id] = &a;

    DatasetStats stats;
    stats.conversation_count = conversations.size();

    std::set<std::string> users, warm_users, cold_users;
    std::set<std::string> tracks, warm_tracks, cold_tracks;
    std::size_t query_sum = 0, query_n = 0;
    std::size_t response_sum = 0, response_n = 0;
    std::size_t thought_sum = 0, thought_n = 0;

    for (const auto& c : conversations) {
        for (const auto& t : c.turns) {
            query_sum += text_length(t.listener.message, unit);
            ++query_n;
            response_sum += text_length(t.recsys.message, unit);
            ++response_n;
            thought_sum += text_length(t.listener.thought, unit);
            thought_sum += text_length(t.recsys.thought, unit);
            thought_n += 2;
        }

        const auto it = by_session.find(c.session_id);
        const SplitAssignment* assignment =
            it != by_session.end() && it->second->partition == Partition::kTest ? it->second
                                                                                : nullptr;
        if (!c.metadata.user_id.empty()) {
            users.insert(c.metadata.user_id);
            if (assignment) {
                if (assignment->user_temperature == Temperature::kWarm)
                    warm_users.insert(c.metadata.user_id);
                else if (assignment->user_temperature == Temperature::kCold)
                    cold_users.insert(c.metadata.user_id);
            }
        }

        auto tally_track = [&](const std::string& id) {
            tracks.insert(id);
            if (!assignment) return;
            const auto temp = assignment->track_temperatures.find(id);
            if (temp == assignment->track_temperatures.end()) return;
            if (temp->second == Temperature::kWarm)
                warm_tracks.insert(id);
            else
                cold_tracks.insert(id);
        };
        for (const auto& id : c.sample.profile_tracks) tally_track(id);
        for (const auto& id : c.sample.pool_tracks) tally_track(id);
    }

    stats.users_total = users.size();
    stats.users_warm = warm_users.size();
    stats.users_cold = cold_users.size();
    stats.tracks_total = tracks.size();
    stats.tracks_warm = warm_tracks.size();
    stats.tracks_cold = cold_tracks.size();
    stats.avg_query_len = query_n ? static_cast<double>(query_sum) / query_n : 0.0;
    stats.avg_response_len = response_n ? static_cast<double>(response_sum) / response_n : 0.0;
    stats.avg_thought_len = thought_n ? static_cast<double>(thought_sum) / thought_n : 0.0;
    return stats;
}

}  // namespace convosim
