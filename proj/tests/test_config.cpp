#include <doctest.h>

#include "convosim/errors.hpp"
#include "convosim/run_config.hpp"
#include "convosim/time_utils.hpp"

using namespace convosim;

TEST_CASE("config defaults pass validation once paths are set") {
    RunConfig config = run_config_from_json_text(R"({
        "catalog_path": "c.jsonl",
        "sessions_path": "s.jsonl",
        "backend": {"kind": "scripted", "script_path": "r.json"}
    })");
    CHECK_NOTHROW(validate_run_config(config));
    CHECK(config.bounds.profile_size == 5);
    CHECK(config.bounds.pool_min == 16);
    CHECK(config.bounds.pool_max == 32);
    CHECK(config.min_session_tracks == 21);
    CHECK(config.turns == 8);
    CHECK(config.quotas.warm_conversations == 800);
    CHECK(config.quotas.cold_conversations == 200);
}

TEST_CASE("published constants are pinned unless allow_overrides") {
    RunConfig config;
    SUBCASE("turns") { config.turns = 6; }
    SUBCASE("profile size") { config.bounds.profile_size = 4; }
    SUBCASE("pool bounds") { config.bounds.pool_max = 40; }
    SUBCASE("eligibility threshold") { config.min_session_tracks = 10; }
    CHECK_THROWS_AS(validate_run_config(config), InvalidInputError);
    config.allow_overrides = true;
    if (config.min_session_tracks >= config.bounds.profile_size + config.bounds.pool_min)
        CHECK_NOTHROW(validate_run_config(config));
}

TEST_CASE("hard shape errors are rejected even with overrides") {
    RunConfig config;
    config.allow_overrides = true;
    SUBCASE("inverted pool bounds") { config.bounds.pool_min = 33; }
    SUBCASE("threshold below profile+pool_min") { config.min_session_tracks = 20; }
    SUBCASE("zero workers") { config.workers = 0; }
    SUBCASE("unknown backend") { config.backend.kind = "psychic"; }
    SUBCASE("unknown partition") { config.target_partition = "validation"; }
    SUBCASE("bad boundary") { config.split_boundary = "soon"; }
    SUBCASE("bad length unit") { config.length_unit = "syllables"; }
    CHECK_THROWS_AS(validate_run_config(config), InvalidInputError);
}

TEST_CASE("overrides layer on top of the base config") {
    const RunConfig base = run_config_from_json_text(R"({
        "catalog_path": "c.jsonl", "seed": 1, "workers": 2,
        "backend": {"kind": "scripted", "script_path": "a.json"}
    })");
    const RunConfig merged = apply_overrides(
        base, R"({"seed": 9, "backend": {"script_path": "b.json"}})");
    CHECK(merged.seed == 9);
    CHECK(merged.workers == 2);                      // untouched
    CHECK(merged.catalog_path == "c.jsonl");         // untouched
    CHECK(merged.backend.script_path == "b.json");   // overridden
    CHECK(merged.backend.kind == "scripted");        // untouched nested field
}

TEST_CASE("config round-trips through its JSON echo") {
    RunConfig config;
    config.catalog_path = "cat.jsonl";
    config.seed = 77;
    config.quotas = {10, 3};
    config.prices = {0.3, 2.5};
    config.backend.kind = "live";
    config.backend.endpoint = "http://127.0.0.1:8080";
    config.backend.model = "test-model";
    const RunConfig back = run_config_from_json_text(run_config_to_json_text(config));
    CHECK(back.catalog_path == config.catalog_path);
    CHECK(back.seed == config.seed);
    CHECK(back.quotas.warm_conversations == 10);
    CHECK(back.prices.output_per_million == doctest::Approx(2.5));
    CHECK(back.backend.endpoint == config.backend.endpoint);
}

TEST_CASE("malformed config documents are rejected") {
    CHECK_THROWS_AS(run_config_from_json_text("not json"), InvalidInputError);
    CHECK_THROWS_AS(run_config_from_json_text("[1,2]"), InvalidInputError);
    CHECK_THROWS_AS(load_run_config("/no/such/config.json"), InvalidInputError);
}

TEST_CASE("rfc3339 parsing and formatting") {
    CHECK(parse_rfc3339("1970-01-01T00:00:00Z") == 0);
    CHECK(parse_rfc3339("2019-01-01T00:00:00Z") == 1546300800);
    CHECK(parse_rfc3339("2019-01-01T01:00:00+01:00") == 1546300800);
    CHECK(parse_rfc3339("2018-12-31T23:30:00-00:30") == 1546300800);
    CHECK(parse_rfc3339("2019-01-01") == 1546300800);
    CHECK(parse_rfc3339("2019-06-01T12:30:45.5Z") == parse_rfc3339("2019-06-01T12:30:45Z"));
    CHECK(format_rfc3339(1546300800) == "2019-01-01T00:00:00Z");
    CHECK(format_rfc3339(parse_rfc3339("2026-08-09T23:59:59Z")) == "2026-08-09T23:59:59Z");

    CHECK_THROWS_AS(parse_rfc3339("2019-13-01T00:00:00Z"), InvalidInputError);
    CHECK_THROWS_AS(parse_rfc3339("2019-02-30T00:00:00Z"), InvalidInputError);
    CHECK_THROWS_AS(parse_rfc3339("2019-01-01T25:00:00Z"), InvalidInputError);
    CHECK_THROWS_AS(parse_rfc3339("not a date"), InvalidInputError);
    CHECK_THROWS_AS(parse_rfc3339("2019-01-01T00:00:00Zjunk"), InvalidInputError);
}
