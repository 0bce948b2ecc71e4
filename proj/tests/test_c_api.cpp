// Exercises the shared library exactly as an external consumer would: C
// header only, no core C++ symbols.

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "convosim.h"
#include "support/fixture_files.hpp"
#include <json.hpp>

namespace {

int failures = 0;

#define CHECK_TRUE(cond)                                                          \
    do {                                                                          \
        if (!(cond)) {                                                            \
            std::fprintf(stderr, "[FAIL] %s:%d: %s\n", __FILE__, __LINE__, #cond); \
            ++failures;                                                           \
        }                                                                         \
    } while (0)

struct Handle {
    convosim_pipeline* p = nullptr;
    ~Handle() { convosim_pipeline_destroy(p); }
};

std::string take(char* s) {
    std::string out = s ? s : "";
    convosim_string_free(s);
    return out;
}

}  // namespace

int main() {
    using convosim_tests::FixtureSpec;
    using convosim_tests::TempDir;

    CHECK_TRUE(std::strlen(convosim_version()) > 0);

    TempDir dir("convosim-capi");
    FixtureSpec spec;
    spec.sessions = 4;
    spec.tracks_per_session = 24;
    spec.mixed_years = true;
    convosim_tests::write_catalog_and_sessions(spec, dir.file("catalog.jsonl"),
                                               dir.file("sessions.jsonl"));
    convosim_tests::write_text(dir.file("replies.json"),
                               convosim_tests::well_formed_script_json());
    convosim_tests::write_text(
        dir.file("config.json"),
        convosim_tests::run_config_json(dir.file("catalog.jsonl"), dir.file("sessions.jsonl"),
                                        dir.file("replies.json"), dir.file("out"), 11, 2));

    // Invalid config path maps to invalid-input, with a readable error.
    {
        Handle h;
        const convosim_status status =
            convosim_pipeline_create("/no/such/config.json", nullptr, &h.p);
        CHECK_TRUE(status == CONVOSIM_ERR_INVALID_INPUT);
        CHECK_TRUE(std::strlen(convosim_last_error(h.p)) > 0);
    }

    // Constant pins are enforced through the C surface too.
    {
        Handle h;
        const convosim_status status = convosim_pipeline_create(
            dir.file("config.json").c_str(), R"({"turns": 5})", &h.p);
        CHECK_TRUE(status == CONVOSIM_ERR_INVALID_INPUT);
        CHECK_TRUE(std::string(convosim_last_error(h.p)).find("turns") != std::string::npos);
    }

    Handle h;
    CHECK_TRUE(convosim_pipeline_create(dir.file("config.json").c_str(), nullptr, &h.p) ==
               CONVOSIM_OK);

    {
        char* raw = nullptr;
        CHECK_TRUE(convosim_effective_config(h.p, &raw) == CONVOSIM_OK);
        const auto config = nlohmann::json::parse(take(raw));
        CHECK_TRUE(config["seed"] == 11);
        CHECK_TRUE(config["turns"] == 8);
    }

    {
        char* raw = nullptr;
        CHECK_TRUE(convosim_run_ingest(h.p, &raw) == CONVOSIM_OK);
        const auto report = nlohmann::json::parse(take(raw));
        CHECK_TRUE(report["sessions_total"] == 4);
        CHECK_TRUE(report["eligible_sessions"] == 4);
        CHECK_TRUE(report["train_sessions"] == 2);
        CHECK_TRUE(report["test_sessions"] == 2);
    }

    {
        char* raw = nullptr;
        CHECK_TRUE(convosim_run_generate(h.p, /*dry_run=*/1, &raw) == CONVOSIM_OK);
        const auto plan = nlohmann::json::parse(take(raw));
        CHECK_TRUE(plan["dry_run"] == true);
        CHECK_TRUE(plan["planned_conversations"] == 4);
        CHECK_TRUE(plan["planned_calls"]["recsys"] == 32);
    }

    std::string store_path;
    {
        char* raw = nullptr;
        CHECK_TRUE(convosim_run_generate(h.p, 0, &raw) == CONVOSIM_OK);
        const auto manifest = nlohmann::json::parse(take(raw));
        CHECK_TRUE(manifest["succeeded"] == 4);
        CHECK_TRUE(manifest["aborted"] == 0);
        CHECK_TRUE(manifest["isolation_breaches"] == 0);
        store_path = manifest["store_path"].get<std::string>();
    }

    {
        char* raw = nullptr;
        CHECK_TRUE(convosim_run_stats(h.p, store_path.c_str(), &raw) == CONVOSIM_OK);
        const auto stats = nlohmann::json::parse(take(raw));
        CHECK_TRUE(stats["conversation_count"] == 4);
        CHECK_TRUE(stats["users"]["total"] == 2);
        CHECK_TRUE(stats["avg_query_len"].get<double>() > 0.0);
    }

    {
        char* raw = nullptr;
        const char* paths[] = {store_path.c_str(), store_path.c_str()};
        CHECK_TRUE(convosim_run_ablate(h.p, paths, 2, /*use_stored_goals=*/1, &raw) ==
                   CONVOSIM_OK);
        const auto report = nlohmann::json::parse(take(raw));
        CHECK_TRUE(report["datasets"].size() == 2);
        CHECK_TRUE(report["datasets"][0].contains("kld_specificity"));
        CHECK_TRUE(report["datasets"][0].contains("coverage_topic"));
    }

    {
        char* raw = nullptr;
        CHECK_TRUE(convosim_run_stats(h.p, "/no/such/store.jsonl", &raw) ==
                   CONVOSIM_ERR_INVALID_INPUT);
        CHECK_TRUE(raw == nullptr);
    }

    if (failures == 0) std::puts("c_api: ok");
    return failures == 0 ? 0 : 1;
}
