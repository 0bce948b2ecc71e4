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
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "convosim/llm_gateway.hpp"

namespace convosim {

/// Deterministic offline backend. Replies are keyed by role and replayed in
/// order; replay cursors are keyed by (request seed, role), so every
/// conversation (which carries its own seed on each request) reads the same
/// script from the start regardless of batch order or worker count.
///
/// A reply may contain the placeholder {{next_track_id}}, resolved against
/// the request text: candidate ids are taken from "ID: <id>" markers, ids
/// following "Previous Tracks:" are excluded, and the first remaining
/// candidate wins. Temperature is ignored.
class ScriptedBackend : public ChatBackend {
public:
    /// role name ("profile"|"goal"|"listener"|"recsys"|"judge") -> replies.
    using Script = std::map<std::string, std::vector<std::string>>;

    explicit ScriptedBackend(Script script);

    /// Loads a JSON object {role: [reply, ...], ...}.
    static Script load_script_file(const std::string& path);

    std::string backend_id() const override { return "scripted"; }
    std::string complete(const ChatRequest& request) override;

private:
    Script script_;
    std::mutex mutex_;
    std::map<std::pair<std::uint64_t, std::string>, std::size_t> cursors_;
};

/// Resolves scripted-reply placeholders against the request text. Exposed
/// for tests.
std::string resolve_script_placeholders(const std::string& reply, const ChatRequest& request);

}  // namespace convosim
