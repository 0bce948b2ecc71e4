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

#include "convosim/live_backend.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

namespace convosim {

using nlohmann::json;

std::string base64_encode(std::string_view bytes) {
    static const char* alphabet =
        "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((bytes.size() + 2) / 3 * 4);
    std::size_t i = 0;
    while (i + 2 < bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                           static_cast<unsigned char>(bytes[i + 2]);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back(alphabet[v & 63]);
        i += 3;
    }
    if (i + 1 == bytes.size()) {
        const unsigned v = static_cast<unsigned char>(bytes[i]) << 16;
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.append("==");
    } else if (i + 2 == bytes.size()) {
        const unsigned v = (static_cast<unsigned char>(bytes[i]) << 16) |
                           (static_cast<unsigned char>(bytes[i + 1]) << 8);
        out.push_back(alphabet[(v >> 18) & 63]);
        out.push_back(alphabet[(v >> 12) & 63]);
        out.push_back(alphabet[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

namespace {

std::string read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw AttachmentMissingError(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string extension_of(const std::string& path) {
    const auto dot = path.rfind('.');
    if (dot == std::string::npos) return "";
    std::string ext = path.substr(dot + 1);
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext;
}

json part_to_json(const ContentPart& part) {
    switch (part.kind) {
        case PartKind::kText:
            return json{{"type", "text"}, {"text", part.payload}};
        case PartKind::kImage: {
            const std::string ext = extension_of(part.payload);
            const std::string mime = ext == "jpg" || ext == "jpeg" ? "image/jpeg" : "image/png";
            return json{{"type", "image_url"},
                        {"image_url",
                         {{"url", "data:" + mime + ";base64," +
                                      base64_encode(read_file_bytes(part.payload))}}}};
        }
        case PartKind::kAudio: {
            std::string format = extension_of(part.payload);
            if (format.empty()) format = "mp3";
            return json{{"type", "input_audio"},
                        {"input_audio",
                         {{"data", base64_encode(read_file_bytes(part.payload))},
                          {"format", format}}}};
        }
    }
    return json{};
}

}  // namespace

struct LiveBackend::Impl {
    LiveBackendSettings settings;
    std::unique_ptr<httplib::Client> client;
    std::string api_key;
};

LiveBackend::LiveBackend(LiveBackendSettings settings) : impl_(std::make_unique<Impl>()) {
    if (settings.endpoint.empty())
        throw InvalidInputError("live backend requires an endpoint URL");
    impl_->settings = std::move(settings);
    impl_->client = std::make_unique<httplib::Client>(impl_->settings.endpoint);
    impl_->client->set_connection_timeout(impl_->settings.timeout_seconds);
    impl_->client->set_read_timeout(impl_->settings.timeout_seconds);
    if (const char* key = std::getenv(impl_->settings.api_key_env.c_str())) impl_->api_key = key;
}

LiveBackend::~LiveBackend() = default;

std::string LiveBackend::backend_id() const {
    return "live:" + impl_->settings.model;
}

std::string LiveBackend::complete(const ChatRequest& request) {
    json content = json::array();
    for (const auto& part : request.parts) content.push_back(part_to_json(part));

    json body{{"model", impl_->settings.model},
              {"temperature", request.temperature},
              {"messages", json::array({json{{"role", "user"}, {"content", content}}})}};

    httplib::Headers headers{{"Content-Type", "application/json"}};
    if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);

    auto res = impl_->client->Post(impl_->settings.path, headers, body.dump(),
                                   "application/json");
    if (!res)
        throw TransientBackendError("connection to " + impl_->settings.endpoint +
                                    " failed: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransientBackendError("backend returned status " + std::to_string(res->status));
    if (res->status != 200)
        throw BackendUnavailableError("backend returned status " + std::to_string(res->status) +
                                      ": " + res->body);

    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty() ||
        !reply["choices"][0].contains("message"))
        throw BackendUnavailableError("backend returned an unexpected response shape");
    return reply["choices"][0]["message"].value("content", "");
}

}  // namespace convosim
