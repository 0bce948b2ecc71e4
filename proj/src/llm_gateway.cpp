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

#include "convosim/llm_gateway.hpp"

#include <algorithm>
#include <thread>

namespace convosim {

const char* to_string(RoleTag role) {
    switch (role) {
        case RoleTag::kProfile: return "profile";
        case RoleTag::kGoal: return "goal";
        case RoleTag::kListener: return "listener";
        case RoleTag::kRecsys: return "recsys";
        case RoleTag::kJudge: return "judge";
    }
    return "unknown";
}

RoleTag role_tag_from_string(const std::string& name) {
    if (name == "profile") return RoleTag::kProfile;
    if (name == "goal") return RoleTag::kGoal;
    if (name == "listener") return RoleTag::kListener;
    if (name == "recsys") return RoleTag::kRecsys;
    if (name == "judge") return RoleTag::kJudge;
    throw UnknownCodeError(name);
}

std::int64_t TokenEstimator::estimate_text(std::string_view text) const {
    if (text.empty()) return 0;
    const std::size_t divisor = std::max<std::size_t>(1, text_bytes_per_token);
    return static_cast<std::int64_t>((text.size() + divisor - 1) / divisor);
}

std::int64_t TokenEstimator::multimodal_input_tokens(const ChatRequest& request) const {
    std::int64_t tokens = 0;
    for (const auto& part : request.parts) {
        if (part.kind == PartKind::kImage) tokens += image_tokens_per_part;
        if (part.kind == PartKind::kAudio) tokens += audio_tokens_per_part;
    }
    return tokens;
}

TokenUsage TokenEstimator::estimate_input(const ChatRequest& request) const {
    TokenUsage usage;
    usage.input_tokens = multimodal_input_tokens(request);
    for (const auto& part : request.parts)
        if (part.kind == PartKind::kText) usage.input_tokens += estimate_text(part.payload);
    return usage;
}

RoleCounters TokenMeter::Snapshot::total() const {
    RoleCounters t;
    for (const auto& [_, c] : per_role) {
        t.input_tokens += c.input_tokens;
        t.output_tokens += c.output_tokens;
        t.request_count += c.request_count;
    }
    return t;
}

void TokenMeter::record(RoleTag role, const TokenUsage& usage) {
    std::lock_guard<std::mutex> lock(mutex_);
    RoleCounters& c = per_role_[to_string(role)];
    c.input_tokens += usage.input_tokens;
    c.output_tokens += usage.output_tokens;
    c.request_count += 1;
}

TokenMeter::Snapshot TokenMeter::snapshot() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return Snapshot{per_role_};
}

CostReport estimate_cost(const TokenMeter::Snapshot& snapshot, const PriceTable& prices) {
    CostReport report;
    for (const auto& [role, counters] : snapshot.per_role) {
        report.total_input_tokens += counters.input_tokens;
        report.total_output_tokens += counters.output_tokens;
    }
    for (const auto& [role, counters] : snapshot.per_role) {
        RoleCost rc;
        rc.input_tokens = counters.input_tokens;
        rc.output_tokens = counters.output_tokens;
        rc.request_count = counters.request_count;
        rc.cost = counters.input_tokens * prices.input_per_million / 1e6 +
                  counters.output_tokens * prices.output_per_million / 1e6;
        rc.input_share_pct = report.total_input_tokens > 0
                                 ? 100.0 * static_cast<double>(counters.input_tokens) /
                                       static_cast<double>(report.total_input_tokens)
                                 : 0.0;
        report.total_cost += rc.cost;
        report.per_role[role] = rc;
    }
    return report;
}

LlmGateway::LlmGateway(std::shared_ptr<ChatBackend> backend, GatewayOptions options)
    : backend_(std::move(backend)), options_(options) {
    if (!backend_) throw InvalidInputError("gateway requires a backend");
    bucket_tokens_ = options_.requests_per_minute;
    bucket_refill_at_ = std::chrono::steady_clock::now();
}

void LlmGateway::rate_limit_acquire() {
    if (options_.requests_per_minute <= 0.0) return;
    const double per_second = options_.requests_per_minute / 60.0;
    while (true) {
        std::chrono::milliseconds wait{0};
        {
            std::lock_guard<std::mutex> lock(bucket_mutex_);
            const auto now = std::chrono::steady_clock::now();
            const double elapsed =
                std::chrono::duration<double>(now - bucket_refill_at_).count();
            bucket_tokens_ = std::min(options_.requests_per_minute,
                                      bucket_tokens_ + elapsed * per_second);
            bucket_refill_at_ = now;
            if (bucket_tokens_ >= 1.0) {
                bucket_tokens_ -= 1.0;
                return;
            }
            wait = std::chrono::milliseconds(
                static_cast<long>(((1.0 - bucket_tokens_) / per_second) * 1000.0) + 1);
        }
        std::this_thread::sleep_for(wait);
    }
}

CompletionResult LlmGateway::complete(const ChatRequest& request) {
    if (request.parts.empty() || request.parts.front().kind != PartKind::kText)
        throw InvalidInputError("chat request must start with a text part");

    auto backoff = options_.initial_backoff;
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, options_.max_attempts); ++attempt) {
        rate_limit_acquire();
        try {
            std::string text = backend_->complete(request);
            TokenUsage usage = options_.estimator.estimate_input(request);
            usage.output_tokens = options_.estimator.estimate_text(text);
            meter_.record(request.role_tag, usage);
            return CompletionResult{std::move(text), usage};
        } catch (const TransientBackendError& e) {
            last_error = e.what();
            if (attempt == options_.max_attempts) break;
            std::this_thread::sleep_for(backoff);
            backoff = std::min(options_.max_backoff,
                               std::chrono::milliseconds(static_cast<long>(
                                   backoff.count() * options_.backoff_multiplier)));
        }
        // Non-transient errors propagate without resubmission.
    }
    throw BackendUnavailableError("retries exhausted after " +
                                  std::to_string(options_.max_attempts) +
                                  " attempts: " + last_error);
}

}  // namespace convosim
