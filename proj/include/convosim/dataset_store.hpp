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

#include <cstddef>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

#include "convosim/catalog.hpp"
#include "convosim/orchestrator.hpp"

namespace convosim {

inline constexpr int kConversationSchemaVersion = 1;

std::string conversation_to_json_line(const Conversation& conversation);
Conversation conversation_from_json_line(const std::string& line);

/// Newline-delimited conversation store: one self-contained JSON object per
/// line, flushed per write so partial batches survive crashes. Writes are
/// line-atomic under the internal lock.
class ConversationWriter {
public:
    explicit ConversationWriter(const std::string& path);  // throws SinkUnavailableError

    /// Appends one record and returns its conversation_id.
    std::string write(const Conversation& conversation);

    std::size_t written() const { return written_; }
    const std::string& path() const { return path_; }

    /// Rewrites the store sorted by conversation_id so batch output is
    /// byte-stable across worker counts. Call once after the batch.
    void finalize_sorted();

private:
    std::string path_;
    std::ofstream out_;
    std::mutex mutex_;
    std::size_t written_ = 0;
};

std::vector<Conversation> read_conversations_file(const std::string& path);

enum class LengthUnit { kWords, kChars };

std::size_t text_length(const std::string& text, LengthUnit unit);

struct DatasetStats {
    std::size_t conversation_count = 0;
    std::size_t users_total = 0;
    std::size_t users_warm = 0;
    std::size_t users_cold = 0;
    std::size_t tracks_total = 0;
    std::size_t tracks_warm = 0;
    std::size_t tracks_cold = 0;
    double avg_query_len = 0.0;     // listener messages
    double avg_response_len = 0.0;  // recsys messages
    double avg_thought_len = 0.0;   // both roles' thoughts pooled
};

/// Averages use whitespace word counts by default (configurable to
/// characters). Track universe is the union of each conversation's profile
/// and pool tracks; warm/cold counts come from the split assignments and
/// stay zero for conversations whose session has no test assignment.
/// Throws EmptyDatasetError when there are no conversations.
DatasetStats compute_stats(const std::vector<Conversation>& conversations,
                           const std::vector<SplitAssignment>& assignments,
                           LengthUnit unit = LengthUnit::kWords);

}  // namespace convosim
