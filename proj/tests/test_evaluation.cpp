#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "convosim/evaluation.hpp"
#include "convosim/scripted_backend.hpp"
#include "support/fixture_files.hpp"
#include <json.hpp>

using namespace convosim;
using convosim_tests::TempDir;

namespace {

const PromptLibrary& prompts() {
    static const PromptLibrary lib =
        PromptLibrary::load_dir(std::string(CONVOSIM_DATA_DIR) + "/prompts");
    return lib;
}

const JudgeRubrics& rubrics() {
    static const JudgeRubrics r =
        JudgeRubrics::load_file(std::string(CONVOSIM_DATA_DIR) + "/judge_rubrics.json");
    return r;
}

Conversation tiny_conversation(const std::string& id) {
    Conversation c;
    c.conversation_id = id;
    c.session_id = "sess-" + id;
    c.goal.category_code = "B";
    c.goal.specificity_code = "LH";
    c.goal.target_turn_count = 7;
    c.goal.listener_goal = "find the sandy song";
    c.goal.listener_expertise = "karaoke regular";
    c.goal.initial_query_examples = {"what was that sandy song"};
    c.sample.profile_tracks = {"a1"};
    c.sample.pool_tracks = {"p0", "p1"};
    for (int t = 1; t <= 2; ++t) {
        Turn turn;
        turn.index = t;
        turn.listener.thought = "t" + std::to_string(t);
        if (t > 1) turn.listener.goal_progress = GoalProgress::kMovesTowardGoal;
        turn.listener.message = "m" + std::to_string(t);
        turn.recsys.thought = "rt" + std::to_string(t);
        turn.recsys.track_id = "p" + std::to_string(t - 1);
        turn.recsys.message = "rm" + std::to_string(t);
        c.turns.push_back(turn);
    }
    return c;
}

LlmGateway judge_gateway(const std::vector<int>& scores) {
    const auto doc = nlohmann::json::parse(convosim_tests::judge_script_json(scores));
    ScriptedBackend::Script script;
    for (const auto& [role, replies] : doc.items())
        for (const auto& r : replies) script[role].push_back(r.get<std::string>());
    return LlmGateway(std::make_shared<ScriptedBackend>(std::move(script)));
}

}  // namespace

TEST_CASE("rubric file defines exactly the ten aspects") {
    CHECK(rubrics().aspects().size() == 10);
    std::set<std::string> ids;
    for (const auto& a : rubrics().aspects()) ids.insert(a.id);
    for (const char* expected : JudgeRubrics::expected_ids()) CHECK(ids.count(expected) == 1);
}

TEST_CASE("scripted judge returns parsed scores and records failures") {
    Catalog catalog;

    SUBCASE("score 4 comes back as 4") {
        LlmGateway gateway = judge_gateway({4});
        JudgeHarness harness(rubrics(), prompts(), catalog, gateway);
        const auto result =
            harness.judge_conversation(tiny_conversation("c1"), rubrics().aspects()[3]);
        REQUIRE(std::holds_alternative<JudgeScoreRecord>(result));
        CHECK(std::get<JudgeScoreRecord>(result).score == 4);
    }

    SUBCASE("out-of-range score retries then records a failure") {
        ScriptedBackend::Script script;
        script["judge"] = {"score: 7", "score: 9"};
        LlmGateway gateway(std::make_shared<ScriptedBackend>(script));
        JudgeHarness harness(rubrics(), prompts(), catalog, gateway, JudgeOptions{2, 1, 0});
        const auto result =
            harness.judge_conversation(tiny_conversation("c1"), rubrics().aspects()[3]);
        REQUIRE(std::holds_alternative<JudgeFailureRecord>(result));
        CHECK(gateway.meter().snapshot().per_role.at("judge").request_count == 2);
    }
}

TEST_CASE("a 10x10 batch makes exactly 100 judge calls and aggregates exactly") {
    Catalog catalog;
    // Per conversation the 10 aspects consume scores 4,4,3,4,2,4,3,4,4,1.
    const std::vector<int> per_conversation = {4, 4, 3, 4, 2, 4, 3, 4, 4, 1};
    LlmGateway gateway = judge_gateway(per_conversation);

    std::vector<Conversation> batch;
    for (int i = 0; i < 10; ++i) batch.push_back(tiny_conversation("c" + std::to_string(i)));

    TempDir dir;
    JudgeHarness harness(rubrics(), prompts(), catalog, gateway, JudgeOptions{2, 4, 7});
    const JudgeReport report = harness.run(batch, dir.file("scores.jsonl"));

    CHECK(gateway.meter().snapshot().per_role.at("judge").request_count == 100);
    CHECK(report.scores.size() == 100);
    CHECK(report.failures.empty());

    // Every aspect sees one fixed score across the 10 conversations, so the
    // mean equals that score and the histogram is a point mass.
    for (std::size_t a = 0; a < rubrics().aspects().size(); ++a) {
        const AspectReport& ar = report.per_aspect.at(rubrics().aspects()[a].id);
        CHECK(ar.n == 10);
        CHECK(ar.mean == doctest::Approx(per_conversation[a]));
        CHECK(ar.histogram[per_conversation[a] - 1] == 10);
    }

    SUBCASE("re-running skips already scored pairs") {
        LlmGateway gateway2 = judge_gateway(per_conversation);
        JudgeHarness harness2(rubrics(), prompts(), catalog, gateway2, JudgeOptions{2, 4, 7});
        const JudgeReport again = harness2.run(batch, dir.file("scores.jsonl"));
        CHECK(again.scores.size() == 100);
        const auto snapshot = gateway2.meter().snapshot();
        CHECK(snapshot.per_role.count("judge") == 0);  // zero new calls
    }
}

TEST_CASE("aggregate reproduces hand-computed means and histograms") {
    std::vector<JudgeScoreRecord> scores;
    for (int s : {4, 4, 3, 4}) scores.push_back({"c1", "listener_thought_quality", s, ""});
    const JudgeReport report = aggregate(scores);
    const AspectReport& a = report.per_aspect.at("listener_thought_quality");
    CHECK(a.n == 4);
    CHECK(a.mean == doctest::Approx(3.75));
    CHECK(a.histogram[2] == 1);
    CHECK(a.histogram[3] == 3);

    SUBCASE("an all-4 corpus means 4.00") {
        std::vector<JudgeScoreRecord> all4;
        for (int i = 0; i < 25; ++i) all4.push_back({"c", "recsys_track_quality", 4, ""});
        CHECK(aggregate(all4).per_aspect.at("recsys_track_quality").mean ==
              doctest::Approx(4.0));
    }
    SUBCASE("a single score") {
        const JudgeReport single = aggregate({{"c", "goal_plausibility", 1, ""}});
        CHECK(single.per_aspect.at("goal_plausibility").mean == doctest::Approx(1.0));
        CHECK(single.per_aspect.at("goal_plausibility").histogram[0] == 1);
    }
    SUBCASE("aggregation is permutation-invariant and histograms sum to n") {
        std::mt19937_64 rng(3);
        std::vector<JudgeScoreRecord> random_scores;
        for (int i = 0; i < 40; ++i)
            random_scores.push_back(
                {"c" + std::to_string(i % 5), "profile_appropriateness",
                 1 + static_cast<int>(rng() % 4), ""});
        const JudgeReport fwd = aggregate(random_scores);
        std::reverse(random_scores.begin(), random_scores.end());
        const JudgeReport rev = aggregate(random_scores);
        const auto& fa = fwd.per_aspect.at("profile_appropriateness");
        const auto& ra = rev.per_aspect.at("profile_appropriateness");
        CHECK(fa.mean == doctest::Approx(ra.mean));
        CHECK(fa.histogram == ra.histogram);
        CHECK(fa.histogram[0] + fa.histogram[1] + fa.histogram[2] + fa.histogram[3] == fa.n);
    }
}

TEST_CASE("goal classification parses scripted replies and the stored shortcut") {
    SUBCASE("scripted judge reply") {
        ScriptedBackend::Script script;
        script["judge"] = {"topic: B\nspecificity: HL"};
        LlmGateway gateway(std::make_shared<ScriptedBackend>(script));
        const auto result = classify_goal(tiny_conversation("c1"), prompts(), gateway, 2, 0);
        REQUIRE(std::holds_alternative<GoalClassification>(result));
        CHECK(std::get<GoalClassification>(result).topic_code == "B");
        CHECK(std::get<GoalClassification>(result).specificity_code == "HL");
    }
    SUBCASE("unknown code becomes a failure record after retries") {
        ScriptedBackend::Script script;
        script["judge"] = {"topic: Z\nspecificity: HL", "topic: Z\nspecificity: HL"};
        LlmGateway gateway(std::make_shared<ScriptedBackend>(script));
        const auto result = classify_goal(tiny_conversation("c1"), prompts(), gateway, 2, 0);
        CHECK(std::holds_alternative<JudgeFailureRecord>(result));
    }
    SUBCASE("stored-goal shortcut copies the stored codes") {
        const GoalClassification c = classification_from_goal(tiny_conversation("c9"));
        CHECK(c.topic_code == "B");
        CHECK(c.specificity_code == "LH");
    }
}

TEST_CASE("diversity metrics match hand-derived values") {
    const std::vector<std::string> four = {"LL", "HL", "LH", "HH"};

    SUBCASE("uniform distribution has zero KLD and full coverage") {
        const AxisDiversity d = diversity_metrics({"LL", "HL", "LH", "HH"}, four);
        CHECK(d.kld_to_uniform == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(d.coverage == doctest::Approx(1.0));
    }

    SUBCASE("(0.5, 0.5, 0, 0) gives ln 2 and coverage 1/2") {
        const AxisDiversity d = diversity_metrics({"LL", "HL"}, four);
        CHECK(d.kld_to_uniform == doctest::Approx(std::log(2.0)).epsilon(1e-9));
        CHECK(d.coverage == doctest::Approx(0.5));
    }

    SUBCASE("50 assignments in one topic of 11 give ln 11 and coverage 1/11") {
        const std::vector<std::string> all_d(50, "D");
        const AxisDiversity d = diversity_metrics(all_d, topic_bins());
        CHECK(d.kld_to_uniform == doctest::Approx(std::log(11.0)).epsilon(1e-9));
        CHECK(d.coverage == doctest::Approx(1.0 / 11.0));
    }

    SUBCASE("KLD is always non-negative and zero only at uniform") {
        std::mt19937_64 rng(17);
        for (int trial = 0; trial < 200; ++trial) {
            std::vector<std::string> assignments;
            const int n = 1 + static_cast<int>(rng() % 60);
            for (int i = 0; i < n; ++i) assignments.push_back(four[rng() % 4]);
            const AxisDiversity d = diversity_metrics(assignments, four);
            CHECK(d.kld_to_uniform >= -1e-12);
            // Exact-zero KLD implies the empirical distribution is uniform.
            if (std::abs(d.kld_to_uniform) < 1e-12)
                for (double p : d.distribution) CHECK(p == doctest::Approx(0.25));
            double sum = 0.0;
            for (double p : d.distribution) sum += p;
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
        }
    }

    SUBCASE("coverage is monotone as assignments are added") {
        std::vector<std::string> assignments = {"LL"};
        double last = diversity_metrics(assignments, four).coverage;
        for (const char* next : {"LL", "HL", "HL", "LH", "HH"}) {
            assignments.push_back(next);
            const double cov = diversity_metrics(assignments, four).coverage;
            CHECK(cov >= last);
            last = cov;
        }
        CHECK(last == doctest::Approx(1.0));
    }

    SUBCASE("unknown assignment codes are rejected") {
        CHECK_THROWS_AS(diversity_metrics({"XX"}, four), InvalidInputError);
        CHECK_THROWS_AS(diversity_metrics({}, four), InvalidInputError);
    }
}

TEST_CASE("diversity report covers both axes") {
    std::vector<GoalClassification> classifications = {
        {"A", "LL"}, {"B", "HL"}, {"C", "LH"}, {"D", "HH"}, {"A", "LL"}};
    const DiversityReport report = diversity_report(classifications);
    CHECK(report.n == 5);
    CHECK(report.specificity.distribution.size() == 4);
    CHECK(report.topic.distribution.size() == 11);
    CHECK(report.topic.coverage == doctest::Approx(4.0 / 11.0));
}
