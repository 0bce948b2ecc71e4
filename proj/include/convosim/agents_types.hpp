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
#include <string>

#include "convosim/catalog.hpp"

namespace convosim {

/// The profile agent's inference over the profiling tracks, paired with the
/// factual demographics it was given.
struct ListenerProfile {
    Demographics demographics;
    std::string preferred_musical_culture;
    std::string top_1_artist;
    std::string top_1_genre;
};

enum class GoalProgress { kMovesTowardGoal, kDoesNotMoveTowardGoal };

const char* to_string(GoalProgress p);

/// One listener turn: thought, progress label (absent on turn 1, required
/// afterwards), and the outgoing message.
struct ListenerTurnOutput {
    std::string thought;
    std::optional<GoalProgress> goal_progress;
    std::string message;
};

/// One recommender turn. track_id must come from the session pool and must
/// not repeat within a conversation.
struct RecsysTurnOutput {
    std::string thought;
    std::string track_id;
    std::string message;
};

}  // namespace convosim
