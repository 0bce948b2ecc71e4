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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "convosim/errors.hpp"

namespace convosim {

enum class RoleTag { kProfile, kGoal, kListener, kRecsys, kJudge };

const char* to_string(RoleTag role);
RoleTag role_tag_from_string(const std::string& name);  // throws UnknownCodeError

enum class PartKind { kText, kAudio, kImage };

/// For text parts the payload is the text itself; for audio/image parts it
/// is an attachment locator. Snippet length and image size are enforced at
/// attachment preparation, not here.
struct ContentPart {
    PartKind kind = PartKind::kText;
    std::string payload;

    static ContentPart text(std::string t) { return {PartKind::kText, std::move(t)}; }
    static ContentPart audio(std::string ref) { return {PartKind::kAudio, std::move(ref)}; }
    static ContentPart image(std::string ref) { return {PartKind::kImage, std::move(ref)}; }
};

/// parts is non-empty and starts with a text part. The seed is honored only
/// by the scripted backend, which uses it to key its per-conversation replay
/// queues.
struct ChatRequest {
    RoleTag role_tag = RoleTag::kListener;
    std::vector<ContentPart> parts;
    double temperature = 0.7;
    std::uint64_t seed = 0;
};

struct TokenUsage {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;

    TokenUsage& operator+=(const TokenUsage& other) {
        input_tokens += other.input_tokens;
        output_tokens += other.output_tokens;
        return *this;
    }
};

/// Fixed multimodal token allocations: 258 tokens per image part, 96 per
/// audio part (3 s at 32 tokens/s). Text is estimated, attachments are not.
struct TokenEstimator {
    std::size_t text_bytes_per_token = 4;
    std::int64_t image_tokens_per_part = 258;
    std::int64_t audio_tokens_per_part = 96;

    std::int64_t estimate_text(std::string_view text) const;
    /// 258*images + 96*audio, no text component.
    std::int64_t multimodal_input_tokens(const ChatRequest& request) const;
    TokenUsage estimate_input(const ChatRequest& request) const;
};

struct RoleCounters {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t request_count = 0;
};

/// Monotone per-role counters, safe under concurrent recording.
class TokenMeter {
public:
    struct Snapshot {
        std::map<std::string, RoleCounters> per_role;
        RoleCounters total() const;
    };

    void record(RoleTag role, const TokenUsage& usage);
    Snapshot snapshot() const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, RoleCounters> per_role_;
};

/// Per-token prices, quoted per million tokens.
struct PriceTable {
    double input_per_million = 0.0;
    double output_per_million = 0.0;
};

struct RoleCost {
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
    std::int64_t request_count = 0;
    double input_share_pct = 0.0;  // share of total input tokens
    double cost = 0.0;
};

struct CostReport {
    std::map<std::string, RoleCost> per_role;
    std::int64_t total_input_tokens = 0;
    std::int64_t total_output_tokens = 0;
    double total_cost = 0.0;
};

CostReport estimate_cost(const TokenMeter::Snapshot& snapshot, const PriceTable& prices);

/// Transient failures are the only ones the gateway retries.
class TransientBackendError : public Error {
public:
    explicit TransientBackendError(const std::string& what) : Error(what) {}
};

/// Narrow transport interface: send parts, receive text. Implementations
/// must be callable from multiple threads.
class ChatBackend {
public:
    virtual ~ChatBackend() = default;
    virtual std::string backend_id() const = 0;
    virtual std::string complete(const ChatRequest& request) = 0;
};

struct GatewayOptions {
    int max_attempts = 3;  // total tries per request, transient failures only
    std::chrono::milliseconds initial_backoff{100};
    double backoff_multiplier = 2.0;
    std::chrono::milliseconds max_backoff{5000};
    double requests_per_minute = 0.0;  // 0 disables rate limiting
    TokenEstimator estimator;
};

struct CompletionResult {
    std::string text;
    TokenUsage usage;
};

/// Provider-agnostic front door for every agent call. Applies the rate
/// limiter and retry policy, and meters token usage per role.
class LlmGateway {
public:
    LlmGateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options = {});

    /// Throws BackendUnavailableError once transient retries are exhausted;
    /// non-transient backend errors propagate immediately without resubmission.
    CompletionResult complete(const ChatRequest& request);

    const TokenMeter& meter() const { return meter_; }
    std::string backend_id() const { return backend_->backend_id(); }

private:
    void rate_limit_acquire();

    std::shared_ptr<ChatBackend> backend_;
    GatewayOptions options_;
    TokenMeter meter_;

    std::mutex bucket_mutex_;
    double bucket_tokens_ = 0.0;
    std::chrono::steady_clock::time_point bucket_refill_at_{};
};

}  // namespace convosim
