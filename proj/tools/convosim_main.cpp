// Command-line front end for the convosim pipeline. Talks to the core
// exclusively through the C API in convosim.h.

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "convosim.h"
#include <CLI11.hpp>
#include <json.hpp>

namespace {

struct PipelineDeleter {
    void operator()(convosim_pipeline* p) const { convosim_pipeline_destroy(p); }
};
using PipelineHandle = std::unique_ptr<convosim_pipeline, PipelineDeleter>;

struct CommonFlags {
    std::string config_path;
    std::string seed;
    std::string backend;
    std::string workers;
    std::string output_dir;
    std::string boundary;
    std::string script_path;
    bool allow_overrides = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "Run config file (JSON)");
    cmd->add_option("--seed", flags.seed, "Override the run seed");
    cmd->add_option("--backend", flags.backend, "Backend kind: scripted or live")
        ->check(CLI::IsMember({"scripted", "live"}));
    cmd->add_option("--workers", flags.workers, "Worker thread count");
    cmd->add_option("--output-dir", flags.output_dir, "Output directory");
    cmd->add_option("--boundary", flags.boundary, "Chronological split boundary (RFC 3339)");
    cmd->add_option("--script", flags.script_path, "Scripted backend reply file");
    cmd->add_flag("--allow-overrides", flags.allow_overrides,
                  "Permit constants outside their published values");
}

// Folds the command-line flags into a JSON overrides object.
std::string overrides_json(const CommonFlags& flags) {
    nlohmann::json doc = nlohmann::json::object();
    if (!flags.seed.empty()) doc["seed"] = std::stoull(flags.seed);
    if (!flags.workers.empty()) doc["workers"] = std::stoi(flags.workers);
    if (!flags.output_dir.empty()) doc["output_dir"] = flags.output_dir;
    if (!flags.boundary.empty()) doc["split_boundary"] = flags.boundary;
    if (flags.allow_overrides) doc["allow_overrides"] = true;
    if (!flags.backend.empty() || !flags.script_path.empty()) {
        nlohmann::json backend = nlohmann::json::object();
        if (!flags.backend.empty()) backend["kind"] = flags.backend;
        if (!flags.script_path.empty()) backend["script_path"] = flags.script_path;
        doc["backend"] = backend;
    }
    return doc.empty() ? std::string() : doc.dump();
}

int finish(const PipelineHandle& pipeline, convosim_status status, char* report) {
    if (report) {
        std::puts(report);
        convosim_string_free(report);
    }
    if (status != CONVOSIM_OK)
        std::fprintf(stderr, "error: %s\n", convosim_last_error(pipeline.get()));
    return static_cast<int>(status);
}

PipelineHandle open_pipeline(const CommonFlags& flags, convosim_status& status) {
    convosim_pipeline* raw = nullptr;
    const std::string overrides = overrides_json(flags);
    status = convosim_pipeline_create(flags.config_path.empty() ? nullptr
                                                                : flags.config_path.c_str(),
                                      overrides.empty() ? nullptr : overrides.c_str(), &raw);
    return PipelineHandle(raw);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Goal-conditioned conversational music recommendation data pipeline"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* ingest = app.add_subcommand("ingest", "Split sessions and report eligibility");
    add_common_flags(ingest, flags);

    auto* generate = app.add_subcommand("generate", "Generate a conversation dataset");
    add_common_flags(generate, flags);
    bool dry_run = false;
    generate->add_flag("--dry-run", dry_run, "Print planned call counts without backend calls");

    auto* judge = app.add_subcommand("judge", "Score a dataset with the judge harness");
    add_common_flags(judge, flags);
    std::string judge_dataset;
    judge->add_option("dataset", judge_dataset, "Conversation store (JSONL)")->required();

    auto* stats = app.add_subcommand("stats", "Dataset statistics");
    add_common_flags(stats, flags);
    std::string stats_dataset;
    stats->add_option("dataset", stats_dataset, "Conversation store (JSONL)")->required();

    auto* ablate = app.add_subcommand("ablate", "Diversity metrics across datasets");
    add_common_flags(ablate, flags);
    std::vector<std::string> ablate_datasets;
    ablate->add_option("datasets", ablate_datasets, "Conversation stores (JSONL)")
        ->required()
        ->expected(-1);
    bool use_stored_goals = false;
    ablate->add_flag("--stored-goals", use_stored_goals,
                     "Classify from stored goals instead of the judge backend");

    CLI11_PARSE(app, argc, argv);

    convosim_status status = CONVOSIM_OK;
    PipelineHandle pipeline = open_pipeline(flags, status);
    if (status != CONVOSIM_OK) return finish(pipeline, status, nullptr);

    char* report = nullptr;
    if (ingest->parsed()) {
        status = convosim_run_ingest(pipeline.get(), &report);
    } else if (generate->parsed()) {
        status = convosim_run_generate(pipeline.get(), dry_run ? 1 : 0, &report);
    } else if (judge->parsed()) {
        status = convosim_run_judge(pipeline.get(), judge_dataset.c_str(), &report);
    } else if (stats->parsed()) {
        status = convosim_run_stats(pipeline.get(), stats_dataset.c_str(), &report);
    } else if (ablate->parsed()) {
        std::vector<const char*> paths;
        paths.reserve(ablate_datasets.size());
        for (const auto& p : ablate_datasets) paths.push_back(p.c_str());
        status = convosim_run_ablate(pipeline.get(), paths.data(), paths.size(),
                                     use_stored_goals ? 1 : 0, &report);
    }
    return finish(pipeline, status, report);
}
