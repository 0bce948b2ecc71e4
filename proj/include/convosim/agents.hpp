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

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "convosim/agents_types.hpp"
#include "convosim/catalog.hpp"
#include "convosim/goal_catalog.hpp"
#include "convosim/llm_gateway.hpp"
#include "convosim/prompt_template.hpp"

namespace convosim {

/// Information classes a prompt can carry; the isolation policy is stated
/// over these.
enum class InfoClass {
    kDemographics,
    kProfileTracks,
    kPoolTracks,
    kGoal,
    kProfile,
    kHistory,
    kRecommendedTrack,
};

const char* to_string(InfoClass c);

/// An assembled prompt plus the exact set of information classes that went
/// into it. The auditor cross-checks provenance against the role policy and
/// the rendered text.
struct PromptBundle {
    RoleTag role_tag = RoleTag::kListener;
    std::vector<ContentPart> parts;
    std::set<InfoClass> provenance;
};

struct HistoryEntry {
    enum class Speaker { kListener, kRecsys };
    Speaker speaker = Speaker::kListener;
    std::string message;
    std::string track_id;  // recsys entries only
};

struct LastRecommendation {
    std::string track_id;
    std::string message;
};

/// Renders one track as a prompt line; pool tracks carry their id so the
/// recommender can select by it, profiling tracks never do.
std::string render_track_text(const Track& track, bool include_id);

/// Assembles the per-role prompts of the two-stage pipeline. Building is
/// pure: same inputs, same bundle.
class PromptBuilder {
public:
    PromptBuilder(const PromptLibrary& prompts, const Catalog& catalog)
        : prompts_(&prompts), catalog_(&catalog) {}

    PromptBundle build_profile_prompt(const Demographics& demographics,
                                      const std::vector<std::string>& profile_tracks) const;

    PromptBundle build_goal_prompt(const std::vector<GoalTemplate>& templates,
                                   const std::vector<std::string>& pool_tracks,
                                   const ListenerProfile& profile) const;

    /// Turn 1 carries profile tracks + profile + goal and instructs the use
    /// of an initial query example; later turns add the recommended track
    /// and the recommender's message. The pool never appears here.
    PromptBundle build_listener_prompt(int turn, const ListenerProfile& profile,
                                       const ConversationGoal& goal,
                                       const std::vector<std::string>& profile_tracks,
                                       const std::vector<HistoryEntry>& history,
                                       const std::optional<LastRecommendation>& last) const;

    /// Full pool with ids + profile + history + used ids. The goal and the
    /// profiling tracks never appear here.
    PromptBundle build_recsys_prompt(int turn, const ListenerProfile& profile,
                                     const std::vector<std::string>& pool_tracks,
                                     const std::vector<HistoryEntry>& history,
                                     const std::vector<std::string>& used_track_ids) const;

    /// Corrective instruction appended on repair attempts.
    std::string render_repair_instruction(const std::string& failure_kind,
                                          const std::string& failure_detail) const;

    static std::string render_profile_text(const ListenerProfile& profile);
    static std::string render_goal_text(const ConversationGoal& goal);
    static std::string render_history_text(const std::vector<HistoryEntry>& history);

private:
    void append_track_parts(PromptBundle& bundle, const std::string& track_id,
                            bool include_id) const;

    const PromptLibrary* prompts_;
    const Catalog* catalog_;
};

/// What the auditor scans a bundle against.
struct IsolationContext {
    std::vector<std::string> pool_ids;
    std::vector<std::string> profile_ids;
    std::vector<std::string> recommended_ids;  // pool ids the listener may legitimately see
    std::string goal_text;                     // listener_goal marker
};

/// Role policy: profile sees no goal/pool; goal sees no profiling tracks;
/// listener sees no pool; recsys sees no goal and no profiling tracks.
const std::set<InfoClass>& forbidden_classes(RoleTag role);

/// Returns all breaches: forbidden provenance entries plus forbidden-class
/// markers found in the rendered text (goal text, non-recommended pool ids,
/// profiling-track ids). Empty means clean.
std::vector<std::string> audit_isolation(const PromptBundle& bundle,
                                         const IsolationContext& context);

}  // namespace convosim
