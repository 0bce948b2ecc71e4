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

#include "convosim/agents.hpp"

#include <cctype>
#include <sstream>

namespace convosim {

const char* to_string(InfoClass c) {
    switch (c) {
        case InfoClass::kDemographics: return "demographics";
        case InfoClass::kProfileTracks: return "profile_tracks";
        case InfoClass::kPoolTracks: return "pool_tracks";
        case InfoClass::kGoal: return "goal";
        case InfoClass::kProfile: return "profile";
        case InfoClass::kHistory: return "history";
        case InfoClass::kRecommendedTrack: return "recommended_track";
    }
    return "unknown";
}

namespace {

std::string flatten(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) out.push_back(c == '\n' || c == '\r' ? ' ' : c);
    return out;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

}  // namespace

std::string render_track_text(const Track& track, bool include_id) {
    std::ostringstream out;
    out << "Title: " << track.title << ", Artist: " << track.artist;
    if (!track.album.empty()) out << ", Album: " << track.album;
    if (include_id) out << ", ID: " << track.track_id;
    if (track.release_date) out << ", Released: " << *track.release_date;
    if (track.popularity) out << ", Popularity: " << *track.popularity;
    if (!track.tags.empty()) out << ", Tags: " << join(track.tags, "; ");
    if (track.tempo_bpm) out << ", Tempo: " << *track.tempo_bpm << " BPM";
    if (track.key) out << ", Key: " << *track.key;
    if (!track.chords.empty()) out << ", Chords: " << join(track.chords, " ");
    if (track.lyrics) out << ", Lyrics: " << flatten(*track.lyrics);
    return out.str();
}

void PromptBuilder::append_track_parts(PromptBundle& bundle, const std::string& track_id,
                                       bool include_id) const {
    const Track& track = catalog_->at(track_id);
    bundle.parts.push_back(ContentPart::text(render_track_text(track, include_id)));
    if (track.audio_ref) bundle.parts.push_back(ContentPart::audio(*track.audio_ref));
    if (track.image_ref) bundle.parts.push_back(ContentPart::image(*track.image_ref));
}

std::string PromptBuilder::render_profile_text(const ListenerProfile& profile) {
    std::ostringstream out;
    out << "Listener Profile:\n"
        << "- age_group: " << profile.demographics.age_group << "\n"
        << "- country: " << profile.demographics.country << "\n"
        << "- gender: " << profile.demographics.gender << "\n"
        << "- preferred_language: " << profile.demographics.preferred_language << "\n"
        << "- preferred_musical_culture: " << profile.preferred_musical_culture << "\n"
        << "- top_1_artist: " << profile.top_1_artist << "\n"
        << "- top_1_genre: " << profile.top_1_genre;
    return out.str();
}

std::string PromptBuilder::render_goal_text(const ConversationGoal& goal) {
    std::ostringstream out;
    out << "Conversation Goal:\n"
        << "- category_code: " << goal.category_code << "\n"
        << "- specificity_code: " << goal.specificity_code << "\n"
        << "- target_turn_count: " << goal.target_turn_count << "\n"
        << "- listener_goal: " << flatten(goal.listener_goal) << "\n"
        << "- listener_expertise: " << flatten(goal.listener_expertise);
    for (std::size_t i = 0; i < goal.initial_query_examples.size(); ++i)
        out << "\n- initial_query_example_" << (i + 1) << ": "
            << flatten(goal.initial_query_examples[i]);
    return out.str();
}

std::string PromptBuilder::render_history_text(const std::vector<HistoryEntry>& history) {
    if (history.empty()) return "(no conversation yet)";
    std::ostringstream out;
    bool first = true;
    for (const auto& entry : history) {
        if (!first) out << "\n";
        first = false;
        if (entry.speaker == HistoryEntry::Speaker::kListener)
            out << "Listener: " << flatten(entry.message);
        else
            out << "RecSys (recommended " << entry.track_id << "): " << flatten(entry.message);
    }
    return out.str();
}

PromptBundle PromptBuilder::build_profile_prompt(
    const Demographics& demographics, const std::vector<std::string>& profile_tracks) const {
    PromptBundle bundle;
    bundle.role_tag = RoleTag::kProfile;
    bundle.parts.push_back(ContentPart::text(
        render_template(prompts_->get("profile"),
                        {{"age_group", demographics.age_group},
                         {"country", demographics.country},
                         {"gender", demographics.gender},
                         {"preferred_language", demographics.preferred_language}})));
    for (const auto& id : profile_tracks) append_track_parts(bundle, id, /*include_id=*/false);
    bundle.provenance = {InfoClass::kDemographics, InfoClass::kProfileTracks};
    return bundle;
}

PromptBundle PromptBuilder::build_goal_prompt(const std::vector<GoalTemplate>& templates,
                                              const std::vector<std::string>& pool_tracks,
                                              const ListenerProfile& profile) const {
    PromptBundle bundle;
    bundle.role_tag = RoleTag::kGoal;
    bundle.parts.push_back(ContentPart::text(prompts_->get("goal")));
    for (const auto& id : pool_tracks) append_track_parts(bundle, id, /*include_id=*/false);

    std::ostringstream rendered;
    for (const auto& t : templates)
        rendered << "- topic " << t.topic_code << " / specificity " << t.specificity_code << ": "
                 << t.description << " (example: \"" << t.example << "\")\n";
    bundle.parts.push_back(ContentPart::text(
        render_template(prompts_->get("goal_context"),
                        {{"listener_profile", render_profile_text(profile)},
                         {"templates", rendered.str()}})));
    bundle.provenance = {InfoClass::kPoolTracks, InfoClass::kProfile, InfoClass::kDemographics};
    return bundle;
}

PromptBundle PromptBuilder::build_listener_prompt(
    int turn, const ListenerProfile& profile, const ConversationGoal& goal,
    const std::vector<std::string>& profile_tracks, const std::vector<HistoryEntry>& history,
    const std::optional<LastRecommendation>& last) const {
    if (turn >= 2 && !last)
        throw InvalidInputError("listener turns >= 2 need the last recommendation");

    PromptBundle bundle;
    bundle.role_tag = RoleTag::kListener;
    bundle.parts.push_back(ContentPart::text(prompts_->get("listener_system")));
    for (const auto& id : profile_tracks) append_track_parts(bundle, id, /*include_id=*/false);

    if (turn == 1) {
        bundle.parts.push_back(ContentPart::text(
            render_template(prompts_->get("listener_turn1"),
                            {{"listener_profile", render_profile_text(profile)},
                             {"conversation_goal", render_goal_text(goal)}})));
        bundle.provenance = {InfoClass::kDemographics, InfoClass::kProfile, InfoClass::kGoal,
                             InfoClass::kProfileTracks};
        return bundle;
    }

    bundle.parts.push_back(ContentPart::text(
        render_template(prompts_->get("listener_context"),
                        {{"listener_profile", render_profile_text(profile)},
                         {"conversation_goal", render_goal_text(goal)},
                         {"history", render_history_text(history)}})));
    append_track_parts(bundle, last->track_id, /*include_id=*/false);
    bundle.parts.push_back(ContentPart::text(
        render_template(prompts_->get("listener_turn"),
                        {{"turn", std::to_string(turn)},
                         {"recsys_message", flatten(last->message)}})));
    bundle.provenance = {InfoClass::kDemographics, InfoClass::kProfile,
                         InfoClass::kGoal,         InfoClass::kProfileTracks,
                         InfoClass::kHistory,      InfoClass::kRecommendedTrack};
    return bundle;
}

PromptBundle PromptBuilder::build_recsys_prompt(
    int turn, const ListenerProfile& profile, const std::vector<std::string>& pool_tracks,
    const std::vector<HistoryEntry>& history,
    const std::vector<std::string>& used_track_ids) const {
    if (history.empty() || history.back().speaker != HistoryEntry::Speaker::kListener)
        throw InvalidInputError("recsys prompt needs the listener's latest message in history");

    PromptBundle bundle;
    bundle.role_tag = RoleTag::kRecsys;
    bundle.parts.push_back(ContentPart::text(
        render_template(prompts_->get("recsys_system"),
                        {{"listener_profile", render_profile_text(profile)}})));
    for (const auto& id : pool_tracks) append_track_parts(bundle, id, /*include_id=*/true);

    std::vector<HistoryEntry> earlier(history.begin(), history.end() - 1);
    const std::string& latest = history.back().message;
    if (turn == 1) {
        bundle.parts.push_back(ContentPart::text(
            render_template(prompts_->get("recsys_turn1"),
                            {{"listener_message", flatten(latest)}})));
    } else {
        bundle.parts.push_back(ContentPart::text(
            render_template(prompts_->get("recsys_turn"),
                            {{"turn", std::to_string(turn)},
                             {"history", render_history_text(earlier)},
                             {"used_track_ids", join(used_track_ids, ", ")},
                             {"listener_message", flatten(latest)}})));
    }
    bundle.provenance = {InfoClass::kDemographics, InfoClass::kProfile, InfoClass::kPoolTracks,
                         InfoClass::kHistory};
    if (!used_track_ids.empty()) bundle.provenance.insert(InfoClass::kRecommendedTrack);
    return bundle;
}

std::string PromptBuilder::render_repair_instruction(const std::string& failure_kind,
                                                     const std::string& failure_detail) const {
    return render_template(prompts_->get("repair"), {{"failure_kind", failure_kind},
                                                     {"failure_detail", failure_detail}});
}

const std::set<InfoClass>& forbidden_classes(RoleTag role) {
    static const std::set<InfoClass> kProfileForbidden{InfoClass::kGoal, InfoClass::kPoolTracks};
    static const std::set<InfoClass> kGoalForbidden{InfoClass::kProfileTracks};
    static const std::set<InfoClass> kListenerForbidden{InfoClass::kPoolTracks};
    static const std::set<InfoClass> kRecsysForbidden{InfoClass::kGoal,
                                                      InfoClass::kProfileTracks};
    static const std::set<InfoClass> kNone{};
    switch (role) {
        case RoleTag::kProfile: return kProfileForbidden;
        case RoleTag::kGoal: return kGoalForbidden;
        case RoleTag::kListener: return kListenerForbidden;
        case RoleTag::kRecsys: return kRecsysForbidden;
        case RoleTag::kJudge: return kNone;
    }
    return kNone;
}

namespace {

bool is_token_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Whole-token occurrence check so "t1" never matches inside "t12".
bool contains_token(const std::string& text, const std::string& token) {
    if (token.empty()) return false;
    for (std::size_t pos = text.find(token); pos != std::string::npos;
         pos = text.find(token, pos + 1)) {
        const bool left_ok = pos == 0 || !is_token_char(text[pos - 1]);
        const std::size_t after = pos + token.size();
        const bool right_ok = after >= text.size() || !is_token_char(text[after]);
        if (left_ok && right_ok) return true;
    }
    return false;
}

}  // namespace

std::vector<std::string> audit_isolation(const PromptBundle& bundle,
                                         const IsolationContext& context) {
    std::vector<std::string> breaches;
    const std::set<InfoClass>& forbidden = forbidden_classes(bundle.role_tag);

    for (InfoClass c : bundle.provenance)
        if (forbidden.count(c))
            breaches.push_back(std::string("provenance of ") + to_string(bundle.role_tag) +
                               " bundle contains forbidden class " + to_string(c));

    std::string text;
    for (const auto& part : bundle.parts)
        if (part.kind == PartKind::kText) {
            text += part.payload;
            text += "\n";
        }

    if (forbidden.count(InfoClass::kGoal) && !context.goal_text.empty() &&
        text.find(context.goal_text) != std::string::npos)
        breaches.push_back(std::string(to_string(bundle.role_tag)) +
                           " bundle text contains the conversation goal");

    if (forbidden.count(InfoClass::kPoolTracks)) {
        for (const auto& id : context.pool_ids) {
            const bool recommended =
                std::find(context.recommended_ids.begin(), context.recommended_ids.end(), id) !=
                context.recommended_ids.end();
            if (!recommended && contains_token(text, id))
                breaches.push_back(std::string(to_string(bundle.role_tag)) +
                                   " bundle text leaks non-recommended pool id " + id);
        }
    }

    if (forbidden.count(InfoClass::kProfileTracks))
        for (const auto& id : context.profile_ids)
            if (contains_token(text, id))
                breaches.push_back(std::string(to_string(bundle.role_tag)) +
                                   " bundle text leaks profiling track id " + id);

    return breaches;
}

}  // namespace convosim
