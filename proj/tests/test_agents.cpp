#include <doctest.h>

#include <sstream>

#include "convosim/agents.hpp"
#include "convosim/errors.hpp"

using namespace convosim;

namespace {

const PromptLibrary& prompts() {
    static const PromptLibrary lib =
        PromptLibrary::load_dir(std::string(CONVOSIM_DATA_DIR) + "/prompts");
    return lib;
}

Catalog small_catalog() {
    Catalog catalog;
    for (int i = 0; i < 10; ++i) {
        Track t;
        t.track_id = "pf" + std::to_string(i);
        t.title = "Profile Song " + std::to_string(i);
        t.artist = "Artist P";
        if (i % 2 == 0) t.audio_ref = "audio/pf" + std::to_string(i) + ".mp3";
        if (i % 3 == 0) t.image_ref = "img/pf" + std::to_string(i) + ".png";
        catalog.add(t);
    }
    for (int i = 0; i < 20; ++i) {
        Track t;
        t.track_id = "pool" + std::to_string(i);
        t.title = "Pool Song " + std::to_string(i);
        t.artist = "Artist Q";
        t.audio_ref = "audio/pool" + std::to_string(i) + ".mp3";
        t.image_ref = "img/pool" + std::to_string(i) + ".png";
        catalog.add(t);
    }
    return catalog;
}

std::vector<std::string> profile_ids() {
    return {"pf0", "pf1", "pf2", "pf3", "pf4"};
}

std::vector<std::string> pool_ids(int n = 16) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back("pool" + std::to_string(i));
    return out;
}

ListenerProfile sample_profile() {
    ListenerProfile p;
    p.demographics = {"25-34", "US", "female", "en"};
    p.preferred_musical_culture = "Western indie";
    p.top_1_artist = "Artist P";
    p.top_1_genre = "indie pop";
    return p;
}

ConversationGoal sample_goal() {
    ConversationGoal g;
    g.category_code = "G";
    g.specificity_code = "HL";
    g.target_turn_count = 3;
    g.listener_goal = "collect wistful but hopeful songs for evening walks";
    g.listener_expertise = "casual mood-driven listener";
    g.initial_query_examples = {"something wistful but hopeful please"};
    return g;
}

std::string all_text(const PromptBundle& bundle) {
    std::string out;
    for (const auto& part : bundle.parts)
        if (part.kind == PartKind::kText) out += part.payload + "\n";
    return out;
}

int count_kind(const PromptBundle& bundle, PartKind kind) {
    int n = 0;
    for (const auto& part : bundle.parts) n += part.kind == kind ? 1 : 0;
    return n;
}

IsolationContext context_for(const std::vector<std::string>& recommended = {}) {
    IsolationContext ctx;
    ctx.pool_ids = pool_ids();
    ctx.profile_ids = profile_ids();
    ctx.recommended_ids = recommended;
    ctx.goal_text = sample_goal().listener_goal;
    return ctx;
}

}  // namespace

TEST_CASE("profile prompt carries demographics and attachments only from profile tracks") {
    const Catalog catalog = small_catalog();
    PromptBuilder builder(prompts(), catalog);
    const PromptBundle bundle =
        builder.build_profile_prompt(sample_profile().demographics, profile_ids());

    CHECK(bundle.role_tag == RoleTag::kProfile);
    // pf0..pf4: audio on pf0, pf2, pf4; images on pf0, pf3.
    CHECK(count_kind(bundle, PartKind::kAudio) == 3);
    CHECK(count_kind(bundle, PartKind::kImage) == 2);
    CHECK(bundle.provenance ==
          std::set<InfoClass>{InfoClass::kDemographics, InfoClass::kProfileTracks});

    const std::string text = all_text(bundle);
    CHECK(text.find("age_group: 25-34") != std::string::npos);
    CHECK(text.find("Profile Song 0") != std::string::npos);
    CHECK(audit_isolation(bundle, context_for()).empty());
}

TEST_CASE("goal prompt includes the pool, the templates, and the profile") {
    const Catalog catalog = small_catalog();
    PromptBuilder builder(prompts(), catalog);
    std::vector<GoalTemplate> templates = {
        {"A", "LL", "broad audio exploration", "play something spacious"},
        {"G", "HL", "specific mood hunt", "bittersweet but hopeful"},
        {"K", "HH", "one exact era track", "the 1999 countdown song"},
    };
    const PromptBundle bundle =
        builder.build_goal_prompt(templates, pool_ids(), sample_profile());

    CHECK(bundle.role_tag == RoleTag::kGoal);
    const std::string text = all_text(bundle);
    for (int i = 0; i < 16; ++i)
        CHECK(text.find("Pool Song " + std::to_string(i)) != std::string::npos);
    CHECK(text.find("topic A / specificity LL") != std::string::npos);
    CHECK(text.find("topic K / specificity HH") != std::string::npos);
    CHECK(text.find("Western indie") != std::string::npos);
    CHECK(bundle.provenance.count(InfoClass::kPoolTracks) == 1);
    CHECK(bundle.provenance.count(InfoClass::kProfileTracks) == 0);
    CHECK(audit_isolation(bundle, context_for()).empty());
}

TEST_CASE("listener prompts never carry the pool and gain the track on later turns") {
    const Catalog catalog = small_catalog();
    PromptBuilder builder(prompts(), catalog);

    SUBCASE("turn 1 uses kickoff wording and the initial query examples") {
        const PromptBundle bundle = builder.build_listener_prompt(
            1, sample_profile(), sample_goal(), profile_ids(), {}, std::nullopt);
        CHECK(bundle.provenance ==
              std::set<InfoClass>{InfoClass::kDemographics, InfoClass::kProfile,
                                  InfoClass::kGoal, InfoClass::kProfileTracks});
        const std::string text = all_text(bundle);
        CHECK(text.find("Turn 1") != std::string::npos);
        CHECK(text.find("initial_query_example_1") != std::string::npos);
        CHECK(text.find("Pool Song") == std::string::npos);
        CHECK(audit_isolation(bundle, context_for()).empty());
    }

    SUBCASE("turn 3 includes the recommended track's attachments and message") {
        std::vector<HistoryEntry> history = {
            {HistoryEntry::Speaker::kListener, "opening", ""},
            {HistoryEntry::Speaker::kRecsys, "try this", "pool2"},
            {HistoryEntry::Speaker::kListener, "more please", ""},
            {HistoryEntry::Speaker::kRecsys, "and this", "pool5"},
        };
        const PromptBundle bundle = builder.build_listener_prompt(
            3, sample_profile(), sample_goal(), profile_ids(), history,
            LastRecommendation{"pool5", "and this"});
        CHECK(count_kind(bundle, PartKind::kAudio) >= 1);  // recommended track audio
        const std::string text = all_text(bundle);
        CHECK(text.find("Pool Song 5") != std::string::npos);
        CHECK(text.find("and this") != std::string::npos);
        CHECK(audit_isolation(bundle, context_for({"pool2", "pool5"})).empty());
    }

    SUBCASE("turn 2 without a recommendation is rejected") {
        CHECK_THROWS_AS(builder.build_listener_prompt(2, sample_profile(), sample_goal(),
                                                      profile_ids(), {}, std::nullopt),
                        InvalidInputError);
    }
}

TEST_CASE("recsys prompts carry pool ids and used ids but never the goal") {
    const Catalog catalog = small_catalog();
    PromptBuilder builder(prompts(), catalog);
    std::vector<HistoryEntry> history = {{HistoryEntry::Speaker::kListener, "opening", ""}};

    SUBCASE("turn 1 lists every pool id") {
        const PromptBundle bundle =
            builder.build_recsys_prompt(1, sample_profile(), pool_ids(), history, {});
        const std::string text = all_text(bundle);
        for (const auto& id : pool_ids()) CHECK(text.find("ID: " + id) != std::string::npos);
        CHECK(text.find(sample_goal().listener_goal) == std::string::npos);
        CHECK(bundle.provenance.count(InfoClass::kGoal) == 0);
        CHECK(audit_isolation(bundle, context_for()).empty());
    }

    SUBCASE("later turns list previous tracks") {
        history.push_back({HistoryEntry::Speaker::kRecsys, "try this", "pool2"});
        history.push_back({HistoryEntry::Speaker::kListener, "another", ""});
        const PromptBundle bundle =
            builder.build_recsys_prompt(2, sample_profile(), pool_ids(), history, {"pool2"});
        const std::string text = all_text(bundle);
        CHECK(text.find("Previous Tracks: pool2") != std::string::npos);
        CHECK(text.find("NO DUPLICATES") != std::string::npos);
        CHECK(audit_isolation(bundle, context_for({"pool2"})).empty());
    }

    SUBCASE("recsys prompt requires the listener's latest message") {
        CHECK_THROWS_AS(
            builder.build_recsys_prompt(1, sample_profile(), pool_ids(), {}, {}),
            InvalidInputError);
    }
}

TEST_CASE("auditor flags goal text and foreign track ids") {
    const IsolationContext ctx = context_for({"pool2"});

    SUBCASE("recsys bundle containing the goal sentence is a breach") {
        PromptBundle bundle;
        bundle.role_tag = RoleTag::kRecsys;
        bundle.parts.push_back(
            ContentPart::text("note: " + sample_goal().listener_goal + " etc"));
        const auto breaches = audit_isolation(bundle, ctx);
        REQUIRE(breaches.size() == 1);
        CHECK(breaches[0].find("goal") != std::string::npos);
    }

    SUBCASE("listener bundle containing a non-recommended pool id is a breach") {
        PromptBundle bundle;
        bundle.role_tag = RoleTag::kListener;
        bundle.parts.push_back(ContentPart::text("have you heard pool7 lately"));
        const auto breaches = audit_isolation(bundle, ctx);
        REQUIRE(breaches.size() == 1);
        CHECK(breaches[0].find("pool7") != std::string::npos);
    }

    SUBCASE("a recommended pool id in a listener bundle is fine") {
        PromptBundle bundle;
        bundle.role_tag = RoleTag::kListener;
        bundle.parts.push_back(ContentPart::text("loved pool2, thanks"));
        CHECK(audit_isolation(bundle, ctx).empty());
    }

    SUBCASE("id matching is token-bounded") {
        PromptBundle bundle;
        bundle.role_tag = RoleTag::kListener;
        // pool1 must not match inside pool12.
        bundle.parts.push_back(ContentPart::text("the tag pool12-extended is not an id"));
        IsolationContext narrow;
        narrow.pool_ids = {"pool1"};
        CHECK(audit_isolation(bundle, narrow).empty());
    }

    SUBCASE("forbidden provenance is a breach even without text markers") {
        PromptBundle bundle;
        bundle.role_tag = RoleTag::kRecsys;
        bundle.parts.push_back(ContentPart::text("clean text"));
        bundle.provenance = {InfoClass::kGoal};
        const auto breaches = audit_isolation(bundle, ctx);
        REQUIRE(breaches.size() == 1);
        CHECK(breaches[0].find("provenance") != std::string::npos);
    }

    SUBCASE("profile bundle with a pool id is a breach") {
        PromptBundle bundle;
        bundle.role_tag = RoleTag::kProfile;
        bundle.parts.push_back(ContentPart::text("pool3 snuck in"));
        CHECK(audit_isolation(bundle, ctx).size() == 1);
    }
}

TEST_CASE("template rendering substitutes and rejects unknown placeholders") {
    CHECK(render_template("a {{x}} b {{y}}", {{"x", "1"}, {"y", "2"}}) == "a 1 b 2");
    CHECK(render_template("no placeholders", {}) == "no placeholders");
    CHECK(render_template("{{x}}{{x}}", {{"x", "q"}}) == "qq");
    CHECK_THROWS_AS(render_template("{{missing}}", {}), InvalidInputError);
}

// Golden snapshot of the assembled profile prompt for a fixed fixture. The
// exact wording lives in data/prompts; this pins the assembly order and the
// track rendering so accidental changes show up in review.
TEST_CASE("profile prompt assembly snapshot") {
    Catalog catalog;
    Track t;
    t.track_id = "snap1";
    t.title = "Golden Hour";
    t.artist = "Test Artist";
    t.album = "Fixtures";
    t.popularity = 61;
    t.tags = {"dream pop", "shoegaze"};
    t.tempo_bpm = 98.0;
    catalog.add(t);

    CHECK(render_track_text(catalog.at("snap1"), false) ==
          "Title: Golden Hour, Artist: Test Artist, Album: Fixtures, Popularity: 61, "
          "Tags: dream pop; shoegaze, Tempo: 98 BPM");
    CHECK(render_track_text(catalog.at("snap1"), true) ==
          "Title: Golden Hour, Artist: Test Artist, Album: Fixtures, ID: snap1, "
          "Popularity: 61, Tags: dream pop; shoegaze, Tempo: 98 BPM");

    PromptBuilder builder(prompts(), catalog);
    Demographics demo{"18-24", "KR", "male", "ko"};
    const PromptBundle bundle = builder.build_profile_prompt(demo, {"snap1"});
    REQUIRE(bundle.parts.size() == 2);
    CHECK(bundle.parts[0].payload.find("- age_group: 18-24") != std::string::npos);
    CHECK(bundle.parts[0].payload.find("- country: KR") != std::string::npos);
    CHECK(bundle.parts[1].payload ==
          "Title: Golden Hour, Artist: Test Artist, Album: Fixtures, Popularity: 61, "
          "Tags: dream pop; shoegaze, Tempo: 98 BPM");
}
