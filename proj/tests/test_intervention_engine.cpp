#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "cst/curation.hpp"
#include "cst/engine.hpp"
#include "support/test_util.hpp"

using namespace cst;

namespace {

struct EngineFixture {
    PipelineContext ctx = PipelineContext::make(default_generator_config());
    std::vector<SceneGraph> scenes;
    std::vector<TokenSequence> corpus;
    ReferenceDensityModel model;
    DetectorProfile detector;

    explicit EngineFixture(int n_scenes = 300, int n_corpus = 800,
                           std::vector<GroupKey> weak = {})
        : model(ctx.schema, 0.1) {
        scenes = testutil::sample_scenes(ctx.config, 10000, n_scenes);
        const auto corpus_scenes = testutil::sample_scenes(ctx.config, 20000, n_corpus);
        corpus = testutil::encode_all(corpus_scenes, ctx);
        model = train(corpus, ctx.schema, 0.1);
        detector = fit(build_manifest(corpus_scenes, ctx), ctx.config.catalog, {}, std::move(weak));
    }
};

}  // namespace

TEST_CASE("run_campaign: N = 0, determinism, record sanity") {
    EngineFixture f(40, 200);

    CampaignOptions opts;
    opts.n = 0;
    CHECK(run_campaign(f.scenes, f.model, f.detector, f.ctx, opts).records.empty());

    opts.n = 60;
    opts.seed = 5;
    const auto a = run_campaign(f.scenes, f.model, f.detector, f.ctx, opts);
    const auto b = run_campaign(f.scenes, f.model, f.detector, f.ctx, opts);
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].scene_id == b.records[i].scene_id);
        CHECK(a.records[i].delta == b.records[i].delta);
        CHECK(a.records[i].target_value == b.records[i].target_value);
    }

    for (const auto& r : a.records) {
        CHECK(r.delta == doctest::Approx(r.score_after - r.score_before).epsilon(1e-12));
        CHECK(r.delta >= -1.0);
        CHECK(r.delta <= 1.0);
        CHECK(r.strategy == "mlm");
        if (r.category == kCategoryWeather) {
            CHECK(r.agent_id == -1);
            CHECK(r.source_value != r.target_value);
        } else {
            CHECK(r.agent_id > 0);
        }
        if (r.category == kCategoryAsset) CHECK(r.source_value != r.target_value);
    }
}

TEST_CASE("campaign asset edits never leave the vehicle families") {
    EngineFixture f(60, 300);
    CampaignOptions opts;
    opts.n = 150;
    opts.seed = 11;
    opts.weights = CategoryWeights{1.0, 0.0, 0.0, 0.0};
    const auto result = run_campaign(f.scenes, f.model, f.detector, f.ctx, opts);
    REQUIRE(result.records.size() > 100);
    for (const auto& r : result.records) {
        const auto* info = f.ctx.config.catalog.find_by_name(r.target_value.get<std::string>());
        REQUIRE(info != nullptr);
        CHECK(AssetCatalog::is_vehicle_family(info->family));
    }
}

TEST_CASE("single-node locality of counterfactual scenes") {
    EngineFixture f(50, 300);
    CampaignOptions opts;
    opts.n = 80;
    opts.seed = 21;

    std::unordered_map<std::int64_t, const SceneGraph*> by_id;
    for (const auto& s : f.scenes) by_id[s.id] = &s;

    const auto result = run_campaign(f.scenes, f.model, f.detector, f.ctx, opts);
    REQUIRE(!result.records.empty());
    for (const auto& r : result.records) {
        const SceneGraph& source = *by_id.at(r.scene_id);
        const TokenSequence seq = encode_scene(source, f.ctx.config, f.ctx.schema);
        const SceneGraph rendered = decode_scene(seq, source, f.ctx.config);

        // rebuild the counterfactual from the record and compare node by node
        SceneGraph after = rendered;
        if (r.category == kCategoryWeather) {
            for (const auto& p : f.ctx.config.weather_presets)
                if (p.name == r.target_value.get<std::string>()) after.weather = p.state;
        } else {
            for (auto& agent : after.agents) {
                if (agent.id != r.agent_id) continue;
                if (r.category == kCategoryAsset) {
                    const auto* info =
                        f.ctx.config.catalog.find_by_name(r.target_value.get<std::string>());
                    agent.asset = AssetRef{info->family, info->model};
                    agent.extent = info->extent;
                } else if (r.category == kCategoryRotation) {
                    agent.pose.yaw = r.target_value.get<double>();
                } else {
                    agent.pose.x = r.target_value.at(0).get<double>();
                    agent.pose.y = r.target_value.at(1).get<double>();
                }
            }
        }
        // the reconstructed counterfactual differs from the rendered source
        // in exactly the touched node
        int diff_agents = 0;
        for (std::size_t i = 0; i < after.agents.size(); ++i)
            if (!(after.agents[i] == rendered.agents[i])) ++diff_agents;
        if (r.category == kCategoryWeather) {
            CHECK(diff_agents == 0);
            CHECK_FALSE(after.weather == rendered.weather);
        } else {
            CHECK(diff_agents == 1);
            CHECK(after.weather == rendered.weather);
        }
    }
}

TEST_CASE("injected zero-exposure asset draws negative mean delta") {
    const GroupKey weak = GroupKey::asset("bike.diamondback");
    EngineFixture f(400, 1500, {weak});

    CampaignOptions opts;
    opts.n = 2000;
    opts.seed = 31;
    opts.weights = CategoryWeights{0.6, 0.2, 0.2, 0.0};
    const auto result = run_campaign(f.scenes, f.model, f.detector, f.ctx, opts);

    double sum = 0.0;
    int n = 0;
    for (const auto& r : result.records) {
        if (r.category != kCategoryAsset) continue;
        if (r.target_value.get<std::string>() != "bike.diamondback") continue;
        sum += r.delta;
        ++n;
    }
    REQUIRE(n >= 20);
    CHECK(sum / n < 0.0);
}

TEST_CASE("random campaign pairs, stays uniform, and scores lower likelihood") {
    EngineFixture f(350, 1200);
    CampaignOptions opts;
    opts.n = 3600;  // ~2000 rotation records for the marginal check
    opts.seed = 41;
    opts.weights = CategoryWeights{0.25, 0.58, 0.17, 0.0};
    const auto mlm = run_campaign(f.scenes, f.model, f.detector, f.ctx, opts);
    const auto rnd = run_random_campaign(mlm.records, f.scenes, f.detector, f.ctx, 42);

    // pairing: bijection modulo logged no-op drops
    CHECK(rnd.records.size() + rnd.dropped_noop == mlm.records.size());
    std::size_t ri = 0;
    for (const auto& r : rnd.records) {
        CHECK(r.strategy == "random");
        // pairs preserved by (scene, agent, category) in order
        bool matched = false;
        while (ri < mlm.records.size()) {
            const auto& m = mlm.records[ri++];
            if (m.scene_id == r.scene_id && m.agent_id == r.agent_id &&
                m.category == r.category) {
                matched = true;
                break;
            }
        }
        CHECK(matched);
    }

    // random rotation marginal is near uniform
    std::vector<double> rot_targets;
    for (const auto& r : rnd.records)
        if (r.category == kCategoryRotation) rot_targets.push_back(r.target_value.get<double>());
    REQUIRE(rot_targets.size() >= 2000);
    std::vector<double> hist(36, 0.0);
    for (double y : rot_targets) hist[static_cast<int>(y / 10.0)] += 1.0 / rot_targets.size();
    double tv_uniform = 0.0;
    for (double h : hist) tv_uniform += std::abs(h - 1.0 / 36.0);
    CHECK(tv_uniform / 2.0 <= 0.08);

    // the generator assigns higher likelihood to the MLM counterfactuals
    std::unordered_map<std::int64_t, const SceneGraph*> by_id;
    for (const auto& s : f.scenes) by_id[s.id] = &s;
    auto mean_loglik = [&](const std::vector<InterventionRecord>& records) {
        double total = 0.0;
        long n = 0;
        for (const auto& r : records) {
            const SceneGraph& src = *by_id.at(r.scene_id);
            const TokenSequence seq = encode_scene(src, f.ctx.config, f.ctx.schema);
            SceneGraph cf = decode_scene(seq, src, f.ctx.config);
            if (r.category == kCategoryWeather) {
                cf = apply_group_edit(cf, -1, GroupKey::weather(r.target_value.get<std::string>()),
                                      f.ctx);
            } else if (r.category == kCategoryAsset) {
                cf = apply_group_edit(cf, r.agent_id,
                                      GroupKey::asset(r.target_value.get<std::string>()), f.ctx);
            } else {
                for (auto& agent : cf.agents)
                    if (agent.id == r.agent_id) agent.pose.yaw = r.target_value.get<double>();
            }
            const double lp = scene_distribution_log_prob(f.ctx.config, cf);
            REQUIRE(std::isfinite(lp));
            total += lp;
            ++n;
        }
        return total / n;
    };
    // compare over the matched pairs only
    std::vector<InterventionRecord> mlm_paired;
    std::set<std::pair<std::int64_t, int>> rnd_keys;
    for (const auto& r : rnd.records) rnd_keys.insert({r.scene_id, r.agent_id});
    for (const auto& m : mlm.records)
        if (rnd_keys.count({m.scene_id, m.agent_id})) mlm_paired.push_back(m);
    REQUIRE(mlm_paired.size() >= 1000);
    CHECK(mean_loglik(mlm_paired) > mean_loglik(rnd.records));
}

TEST_CASE("aggregate_groups arithmetic and filters") {
    auto rec = [](const std::string& category, nlohmann::json src, nlohmann::json tgt,
                  double delta_value) {
        InterventionRecord r;
        r.scene_id = 1;
        r.category = category;
        r.agent_id = 2;
        r.source_value = std::move(src);
        r.target_value = std::move(tgt);
        r.delta = delta_value;
        r.strategy = "mlm";
        return r;
    };

    SUBCASE("30 occurrences with 6 events gives 20 percent") {
        std::vector<InterventionRecord> records;
        // 15 records: target group X each time -> 15 occurrences of X; plus
        // 15 more with X as source -> 30 total
        for (int i = 0; i < 15; ++i)
            records.push_back(rec(kCategoryAsset, "sedan.prius", "asset.X",
                                  i < 6 ? -0.5 : -0.01));
        for (int i = 0; i < 15; ++i)
            records.push_back(rec(kCategoryAsset, "asset.X", "sedan.prius", -0.01));
        AggregateOptions opts;
        opts.min_count = 10;
        const auto groups = aggregate_groups(records, 0.2, opts);
        const GroupStats* x = nullptr;
        for (const auto& g : groups)
            if (g.key.str() == "asset:asset.X") x = &g;
        REQUIRE(x != nullptr);
        CHECK(x->total == 30);
        CHECK(x->events == 6);
        CHECK(x->percent == doctest::Approx(20.0));
    }

    SUBCASE("groups below min_count are excluded") {
        std::vector<InterventionRecord> records;
        for (int i = 0; i < 19; ++i)
            records.push_back(rec(kCategoryWeather, "w.a", "w.b", -0.5));
        AggregateOptions opts;
        opts.min_count = 20;
        const auto groups = aggregate_groups(records, 0.2, opts);
        for (const auto& g : groups) CHECK(g.key.str() != "weather:w.b");
        // both sides appear at 19 occurrences; nothing survives the filter
        CHECK(groups.empty());
    }

    SUBCASE("all zero deltas produce zero percents") {
        std::vector<InterventionRecord> records;
        for (int i = 0; i < 25; ++i) records.push_back(rec(kCategoryAsset, "a.s", "a.t", 0.0));
        AggregateOptions opts;
        opts.min_count = 20;
        for (const auto& g : aggregate_groups(records, 0.2, opts)) {
            CHECK(g.percent == 0.0);
            CHECK(g.tier == 3);
        }
    }

    SUBCASE("event crediting follows the delta sign") {
        std::vector<InterventionRecord> records(40, rec(kCategoryAsset, "a.src", "a.tgt", -0.3));
        records.resize(60, rec(kCategoryAsset, "a.src", "a.tgt", 0.3));
        AggregateOptions opts;
        opts.min_count = 1;
        const auto groups = aggregate_groups(records, 0.2, opts);
        REQUIRE(groups.size() == 2);
        for (const auto& g : groups) {
            if (g.key.str() == "asset:a.tgt") {
                CHECK(g.events == 40);  // negative deltas credit the target
            } else {
                CHECK(g.key.str() == "asset:a.src");
                CHECK(g.events == 20);  // positive deltas credit the source
            }
            CHECK(g.total == 60);
        }
    }

    SUBCASE("conservation: occurrences = 2x distinct + self records once") {
        std::vector<InterventionRecord> records;
        for (int i = 0; i < 12; ++i) records.push_back(rec(kCategoryAsset, "a.p", "a.q", 0.0));
        for (int i = 0; i < 5; ++i)
            records.push_back(rec(kCategoryRotation, 175.0, 177.0, 0.0));  // same bin: self
        AggregateOptions opts;
        opts.min_count = 1;
        const auto groups = aggregate_groups(records, 0.2, opts);
        long total = 0;
        for (const auto& g : groups) total += g.total;
        CHECK(total == 2 * 12 + 5);

        opts.count_self_per_side = true;
        const auto groups2 = aggregate_groups(records, 0.2, opts);
        total = 0;
        for (const auto& g : groups2) total += g.total;
        CHECK(total == 2 * 12 + 2 * 5);
    }

    SUBCASE("location records only count when enabled") {
        std::vector<InterventionRecord> records;
        for (int i = 0; i < 30; ++i) {
            auto r = rec(kCategoryLocation, nlohmann::json::array({10.0, 20.0}),
                         nlohmann::json::array({200.0, -100.0}), -0.4);
            records.push_back(std::move(r));
        }
        AggregateOptions opts;
        opts.min_count = 1;
        CHECK(aggregate_groups(records, 0.2, opts).empty());
        opts.include_location = true;
        CHECK_FALSE(aggregate_groups(records, 0.2, opts).empty());
    }

    SUBCASE("tier assignment uses the configured cuts") {
        std::vector<InterventionRecord> records;
        for (int i = 0; i < 50; ++i)
            records.push_back(rec(kCategoryAsset, "a.hi", "a.lo", i < 20 ? 0.5 : 0.0));
        AggregateOptions opts;
        opts.min_count = 1;
        const auto groups = aggregate_groups(records, 0.2, opts);
        for (const auto& g : groups) {
            if (g.key.str() == "asset:a.hi") CHECK(g.tier == 1);  // 40 percent
            if (g.key.str() == "asset:a.lo") CHECK(g.tier == 3);  // 0 percent
        }
    }
}

TEST_CASE("two-step campaigns") {
    EngineFixture f(120, 500);
    const std::vector<GroupKey> first_set = {
        GroupKey::asset("bike.diamondback"), GroupKey::asset("heavy.cybertruck"),
        GroupKey::weather("cloudy_dark"), GroupKey::rotation_value(178.0)};

    TwoStepOptions opts;
    opts.n = 250;
    opts.seed = 77;
    const auto records = run_two_step(f.scenes, f.model, f.detector, f.ctx, first_set, opts);
    REQUIRE(records.size() >= 150);

    SUBCASE("telescoping holds exactly") {
        for (const auto& r : records) {
            CHECK(r.delta20 == doctest::Approx(r.delta10 + r.delta21).epsilon(1e-9));
            CHECK(r.delta10 == doctest::Approx(r.f0 - r.f1).epsilon(1e-12));
            CHECK(r.delta21 == doctest::Approx(r.f1 - r.f2).epsilon(1e-12));
        }
    }

    SUBCASE("second edits come from a different category") {
        for (const auto& r : records) {
            CHECK(r.second_category != to_string(r.first_edit.kind));
        }
    }

    SUBCASE("question-1 retention bounds the first drop by 0.8") {
        const auto q1 = filter_two_step(records, 1, 0.2, 0.2);
        for (const auto& r : records) {
            if (r.delta10 >= 0.2 && r.delta21 >= 0.2) CHECK(r.delta10 <= 0.8 + 1e-9);
        }
        (void)q1;
    }

    SUBCASE("question-1 passes are a subset of question-3 passes") {
        auto passes = [](const TwoStepRecord& r, int q) {
            if (q == 1) return r.delta10 >= 0.2 && r.delta21 >= 0.2;
            return r.delta21 >= 0.0 && r.delta10 >= 0.2;
        };
        for (const auto& r : records)
            if (passes(r, 1)) CHECK(passes(r, 3));
    }

    SUBCASE("singleton J forces every first edit") {
        TwoStepOptions single_opts;
        single_opts.n = 40;
        single_opts.seed = 9;
        const auto singles = run_two_step(f.scenes, f.model, f.detector, f.ctx,
                                          {GroupKey::asset("heavy.colacar")}, single_opts);
        REQUIRE(!singles.empty());
        for (const auto& r : singles) CHECK(r.first_edit.str() == "asset:heavy.colacar");
    }

    SUBCASE("unknown question id is rejected") {
        CHECK_THROWS_AS(filter_two_step(records, 4, 0.2, 0.2), ConfigError);
    }
}

TEST_CASE("filter_two_step on constructed fixtures") {
    auto make = [](double f0, double f1, double f2, const std::string& second_target) {
        TwoStepRecord r;
        r.scene_id = 1;
        r.first_edit = GroupKey::asset("a.first");
        r.second_category = kCategoryAsset;
        r.second_source = "a.src";
        r.second_target = second_target;
        r.f0 = f0;
        r.f1 = f1;
        r.f2 = f2;
        r.delta10 = f0 - f1;
        r.delta21 = f1 - f2;
        r.delta20 = f0 - f2;
        return r;
    };

    SUBCASE("exactly 3 of 10 passing question 2 gives 30 percent") {
        std::vector<TwoStepRecord> records;
        for (int i = 0; i < 3; ++i) records.push_back(make(0.9, 0.5, 0.2, "a.second"));
        for (int i = 0; i < 7; ++i) records.push_back(make(0.9, 0.9, 0.85, "a.second"));
        const auto summary = filter_two_step(records, 2, 0.2, 0.2);
        REQUIRE(summary.pairs.size() == 1);
        CHECK(summary.pairs[0].total == 10);
        CHECK(summary.pairs[0].passes == 3);
        CHECK(summary.pairs[0].percent == doctest::Approx(30.0));
        REQUIRE(summary.second_edits.size() == 1);
        CHECK(summary.second_edits[0].percent == doctest::Approx(30.0));
    }

    SUBCASE("question 3 with all negative delta21 has an empty pass set") {
        std::vector<TwoStepRecord> records;
        for (int i = 0; i < 10; ++i) records.push_back(make(0.9, 0.5, 0.8, "a.second"));
        const auto summary = filter_two_step(records, 3, 0.2, 0.2);
        for (const auto& p : summary.pairs) CHECK(p.passes == 0);
    }
}
