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

#include "convosim/scripted_backend.hpp"

#include <cctype>
#include <fstream>
#include <unordered_set>

#include <json.hpp>

namespace convosim {

namespace {

bool is_id_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ':';
}

std::string read_id_at(const std::string& text, std::size_t pos) {
    std::size_t end = pos;
    while (end < text.size() && is_id_char(text[end])) ++end;
    return text.substr(pos, end - pos);
}

// Candidate ids come from "ID: <id>" markers; used ids follow a
// "Previous Tracks:" marker up to end of line.
std::string pick_next_track_id(const ChatRequest& request) {
    std::vector<std::string> candidates;
    std::unordered_set<std::string> used;

    for (const auto& part : request.parts) {
        if (part.kind != PartKind::kText) continue;
        const std::string& text = part.payload;

        static const std::string kIdMarker = "ID: ";
        for (std::size_t pos = text.find(kIdMarker); pos != std::string::npos;
             pos = text.find(kIdMarker, pos + 1)) {
            std::string id = read_id_at(text, pos + kIdMarker.size());
            if (!id.empty()) candidates.push_back(std::move(id));
        }

        static const std::string kUsedMarker = "Previous Tracks:";
        for (std::size_t pos = text.find(kUsedMarker); pos != std::string::npos;
             pos = text.find(kUsedMarker, pos + 1)) {
            std::size_t cur = pos + kUsedMarker.size();
            const std::size_t eol = text.find('\n', cur);
            const std::size_t end = eol == std::string::npos ? text.size() : eol;
            while (cur < end) {
                if (is_id_char(text[cur])) {
                    std::string id = read_id_at(text, cur);
                    cur += id.size();
                    used.insert(std::move(id));
                } else {
                    ++cur;
                }
            }
        }
    }

    for (const auto& id : candidates)
        if (!used.count(id)) return id;
    return candidates.empty() ? std::string("none") : candidates.front();
}

}  // namespace

std::string resolve_script_placeholders(const std::string& reply, const ChatRequest& request) {
    static const std::string kPlaceholder = "{{next_track_id}}";
    if (reply.find(kPlaceholder) == std::string::npos) return reply;
    const std::string id = pick_next_track_id(request);
    std::string out = reply;
    for (std::size_t pos = out.find(kPlaceholder); pos != std::string::npos;
         pos = out.find(kPlaceholder, pos))
        out.replace(pos, kPlaceholder.size(), id);
    return out;
}

ScriptedBackend::ScriptedBackend(Script script) : script_(std::move(script)) {
    if (script_.empty()) throw InvalidInputError("scripted backend requires a non-empty script");
}

ScriptedBackend::Script ScriptedBackend::load_script_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInputError("cannot open script file: " + path);
    nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw InvalidInputError("script file must be a JSON object: " + path);
    Script script;
    for (const auto& [role, replies] : doc.items()) {
        role_tag_from_string(role);  // reject unknown roles early
        if (!replies.is_array())
            throw InvalidInputError("script entry for role '" + role + "' must be an array");
        for (const auto& r : replies) script[role].push_back(r.get<std::string>());
    }
    return script;
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
    const std::string role = to_string(request.role_tag);
    std::size_t index;
    {
        std::lock_guard<std::mutex> lock(mutex_);
        index = cursors_[{request.seed, role}]++;
    }
    auto it = script_.find(role);
    if (it == script_.end() || index >= it->second.size())
        throw ScriptExhaustedError("script exhausted for role '" + role + "' at reply index " +
                                   std::to_string(index));
    return resolve_script_placeholders(it->second[index], request);
}

}  // namespace convosim
