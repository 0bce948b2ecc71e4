#include <doctest.h>

#include <set>

#include "convosim/errors.hpp"
#include "convosim/goal_catalog.hpp"

using namespace convosim;

namespace {

const GoalTemplateCatalog& shipped_catalog() {
    static const GoalTemplateCatalog catalog =
        GoalTemplateCatalog::load_file(std::string(CONVOSIM_DATA_DIR) + "/goal_templates.json");
    return catalog;
}

}  // namespace

TEST_CASE("shipped template catalog covers the 11x4 grid exactly once") {
    const auto& catalog = shipped_catalog();
    CHECK(catalog.size() == 44);
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& t : catalog.templates()) cells.emplace(t.topic_code, t.specificity_code);
    CHECK(cells.size() == 44);
}

TEST_CASE("catalog load rejects incomplete grids") {
    std::vector<GoalTemplate> templates = shipped_catalog().templates();
    templates.pop_back();
    CHECK_THROWS_AS(GoalTemplateCatalog::from_templates(templates), InvalidInputError);

    templates = shipped_catalog().templates();
    templates.push_back(templates.front());  // duplicate cell
    CHECK_THROWS_AS(GoalTemplateCatalog::from_templates(templates), InvalidInputError);
}

TEST_CASE("sample_templates draws 3 distinct templates deterministically") {
    const auto& catalog = shipped_catalog();

    const auto triple = catalog.sample_templates(123);
    REQUIRE(triple.size() == 3);
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& t : triple) cells.emplace(t.topic_code, t.specificity_code);
    CHECK(cells.size() == 3);

    const auto again = catalog.sample_templates(123);
    for (int i = 0; i < 3; ++i) {
        CHECK(triple[i].topic_code == again[i].topic_code);
        CHECK(triple[i].specificity_code == again[i].specificity_code);
    }
}

TEST_CASE("every template appears across 10k seeds") {
    const auto& catalog = shipped_catalog();
    std::set<std::pair<std::string, std::string>> seen;
    for (std::uint64_t seed = 0; seed < 10000 && seen.size() < 44; ++seed)
        for (const auto& t : catalog.sample_templates(seed))
            seen.emplace(t.topic_code, t.specificity_code);
    CHECK(seen.size() == 44);
}

TEST_CASE("turn bands match the published mapping") {
    CHECK(turn_band("HH").low == 1);
    CHECK(turn_band("HH").high == 2);
    CHECK(turn_band("HL").low == 3);
    CHECK(turn_band("HL").high == 4);
    CHECK(turn_band("LL").low == 3);
    CHECK(turn_band("LL").high == 7);
    CHECK(turn_band("LH").low == 6);
    CHECK(turn_band("LH").high == 8);
    CHECK_THROWS_AS(turn_band("XX"), UnknownCodeError);

    for (const char* code : kSpecificityCodes) {
        const TurnBand band = turn_band(code);
        CHECK(band.low >= 1);
        CHECK(band.high <= 8);
        CHECK(band.low <= band.high);
    }
}

TEST_CASE("goal validation returns all violations") {
    ConversationGoal goal;
    goal.category_code = "G";
    goal.specificity_code = "HH";
    goal.target_turn_count = 2;
    goal.listener_goal = "find one exact song";
    goal.listener_expertise = "novice";
    goal.initial_query_examples = {"that one song please"};
    CHECK(validate_goal(goal).empty());

    SUBCASE("turn count outside the band") {
        goal.target_turn_count = 5;
        const auto violations = validate_goal(goal);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].find("turn count outside band") != std::string::npos);
    }
    SUBCASE("empty listener_goal") {
        goal.listener_goal.clear();
        CHECK(validate_goal(goal).size() == 1);
    }
    SUBCASE("bad codes accumulate") {
        goal.category_code = "Z";
        goal.specificity_code = "QQ";
        CHECK(validate_goal(goal).size() == 2);
    }
    SUBCASE("too many query examples") {
        goal.initial_query_examples = {"a", "b", "c", "d"};
        CHECK(validate_goal(goal).size() == 1);
    }
}
