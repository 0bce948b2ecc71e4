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

#include <memory>
#include <string>

#include "convosim/llm_gateway.hpp"

namespace convosim {

struct LiveBackendSettings {
    std::string endpoint;                       // scheme://host[:port]
    std::string path = "/v1/chat/completions";  // chat-completions style route
    std::string model;
    std::string api_key_env = "CONVOSIM_API_KEY";
    int timeout_seconds = 60;
};

/// HTTP adapter speaking the common chat-completions JSON shape. Audio and
/// image attachment locators are treated as file paths and inlined as
/// base64; a missing file raises AttachmentMissingError. 429 and 5xx
/// responses and connection failures surface as TransientBackendError so
/// the gateway's retry policy applies; other non-200 statuses are final.
class LiveBackend : public ChatBackend {
public:
    explicit LiveBackend(LiveBackendSettings settings);
    ~LiveBackend() override;

    std::string backend_id() const override;
    std::string complete(const ChatRequest& request) override;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string base64_encode(std::string_view bytes);

}  // namespace convosim
