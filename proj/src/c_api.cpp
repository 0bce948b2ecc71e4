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

#include "convosim.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "convosim/errors.hpp"
#include "convosim/pipeline.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct convosim_pipeline {
    std::unique_ptr<convosim::Pipeline> impl;
    std::string last_error;

    // Maps the exception taxonomy onto status codes and stores the message.
    template <typename Fn>
    convosim_status run(char** out_json, Fn&& fn) {
        if (out_json) *out_json = nullptr;
        last_error.clear();
        try {
            const std::string result = fn();
            if (out_json) {
                *out_json = dup_string(result);
                if (!*out_json) {
                    last_error = "out of memory";
                    return CONVOSIM_ERR_RUNTIME;
                }
            }
            return CONVOSIM_OK;
        } catch (const convosim::InvalidInputError& e) {
            last_error = e.what();
            return CONVOSIM_ERR_INVALID_INPUT;
        } catch (const std::exception& e) {
            last_error = e.what();
            return CONVOSIM_ERR_RUNTIME;
        }
    }
};

extern "C" {

const char* convosim_version(void) { return kVersion; }

convosim_status convosim_pipeline_create(const char* config_path, const char* overrides_json,
                                         convosim_pipeline** out) {
    if (!out) return CONVOSIM_ERR_INVALID_INPUT;
    *out = nullptr;
    auto handle = std::make_unique<convosim_pipeline>();
    const convosim_status status = handle->run(nullptr, [&]() -> std::string {
        convosim::RunConfig config;
        if (config_path && *config_path) config = convosim::load_run_config(config_path);
        if (overrides_json && *overrides_json)
            config = convosim::apply_overrides(config, overrides_json);
        handle->impl = std::make_unique<convosim::Pipeline>(std::move(config));
        return {};
    });
    // Hand the handle back even on failure so the caller can read the error.
    *out = handle.release();
    return status;
}

void convosim_pipeline_destroy(convosim_pipeline* pipeline) { delete pipeline; }

const char* convosim_last_error(const convosim_pipeline* pipeline) {
    return pipeline ? pipeline->last_error.c_str() : "";
}

convosim_status convosim_effective_config(convosim_pipeline* pipeline, char** config_json) {
    if (!pipeline || !pipeline->impl || !config_json) return CONVOSIM_ERR_INVALID_INPUT;
    return pipeline->run(config_json, [&] {
        return convosim::run_config_to_json_text(pipeline->impl->config());
    });
}

convosim_status convosim_run_ingest(convosim_pipeline* pipeline, char** report_json) {
    if (!pipeline || !pipeline->impl) return CONVOSIM_ERR_INVALID_INPUT;
    return pipeline->run(report_json, [&] { return pipeline->impl->ingest(); });
}

convosim_status convosim_run_generate(convosim_pipeline* pipeline, int dry_run,
                                      char** manifest_json) {
    if (!pipeline || !pipeline->impl) return CONVOSIM_ERR_INVALID_INPUT;
    return pipeline->run(manifest_json,
                         [&] { return pipeline->impl->generate(dry_run != 0); });
}

convosim_status convosim_run_judge(convosim_pipeline* pipeline, const char* dataset_path,
                                   char** report_json) {
    if (!pipeline || !pipeline->impl || !dataset_path) return CONVOSIM_ERR_INVALID_INPUT;
    return pipeline->run(report_json, [&] { return pipeline->impl->judge(dataset_path); });
}

convosim_status convosim_run_stats(convosim_pipeline* pipeline, const char* dataset_path,
                                   char** stats_json) {
    if (!pipeline || !pipeline->impl || !dataset_path) return CONVOSIM_ERR_INVALID_INPUT;
    return pipeline->run(stats_json, [&] { return pipeline->impl->stats(dataset_path); });
}

convosim_status convosim_run_ablate(convosim_pipeline* pipeline,
                                    const char* const* dataset_paths, size_t dataset_count,
                                    int use_stored_goals, char** report_json) {
    if (!pipeline || !pipeline->impl || (!dataset_paths && dataset_count > 0))
        return CONVOSIM_ERR_INVALID_INPUT;
    return pipeline->run(report_json, [&] {
        std::vector<std::string> paths;
        paths.reserve(dataset_count);
        for (size_t i = 0; i < dataset_count; ++i) paths.emplace_back(dataset_paths[i]);
        return pipeline->impl->ablate(paths, use_stored_goals != 0);
    });
}

void convosim_string_free(char* s) { std::free(s); }

}  // extern "C"
