#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "cst/generator.hpp"
#include "cst/rng.hpp"
#include "support/test_util.hpp"

using namespace cst;

TEST_CASE("sample_scene is a pure function of (config, seed)") {
    const auto cfg = default_generator_config();
    const SceneGraph a = sample_scene(cfg, 7);
    const SceneGraph b = sample_scene(cfg, 7);
    CHECK(a == b);

    nlohmann::json ja = a, jb = b;
    CHECK(ja.dump() == jb.dump());

    const SceneGraph c = sample_scene(cfg, 8);
    CHECK_FALSE(a == c);
}

TEST_CASE("default pedestrian count is 20 and the count law holds") {
    const auto cfg = default_generator_config();
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const SceneGraph s = sample_scene(cfg, seed);
        CHECK(s.pedestrian_count() == 20);
        const int v = s.vehicle_count();
        CHECK(v >= cfg.vehicle_count.min_count);
        CHECK(v <= cfg.vehicle_count.max_count);
        // agents list excludes the ego, so total = V + P
        CHECK(static_cast<int>(s.agents.size()) == v + 20);
        CHECK(s.ego.kind == AgentKind::ego);
        CHECK(s.ego.asset == cfg.ego_asset);
    }
}

TEST_CASE("weather draws stay on the preset set with the configured frequencies") {
    const auto cfg = default_generator_config();
    std::map<int, int> counts;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const SceneGraph s = sample_scene(cfg, 100000 + i);
        const int p = cfg.preset_index(s.weather);
        REQUIRE(p >= 0);
        ++counts[p];
    }
    double weight_total = 0.0;
    for (const auto& p : cfg.weather_presets) weight_total += p.weight;
    for (int p = 0; p < static_cast<int>(cfg.weather_presets.size()); ++p) {
        const double expected = cfg.weather_presets[p].weight / weight_total;
        const double observed = counts[p] / static_cast<double>(n);
        CHECK(std::abs(observed - expected) <= 0.02);
    }
}

TEST_CASE("generated scenes satisfy the type invariants") {
    const auto cfg = default_generator_config();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const SceneGraph s = sample_scene(cfg, seed);
        for (int a = 0; a < WeatherState::kAttrCount; ++a) {
            if (a == WeatherState::kSunAltitudeIndex) {
                CHECK(s.weather.values[a] >= -90.0);
                CHECK(s.weather.values[a] <= 90.0);
            } else {
                CHECK(s.weather.values[a] >= 0.0);
                CHECK(s.weather.values[a] <= 1.0);
            }
        }
        CHECK(cfg.camera_index(s.camera) >= 0);
        auto check_pose = [&](const Pose& p) {
            CHECK(p.x - cfg.min_coord >= 0.0);
            CHECK(p.x - cfg.min_coord < 600.0);
            CHECK(p.y - cfg.min_coord >= 0.0);
            CHECK(p.y - cfg.min_coord < 600.0);
            CHECK(p.z - cfg.min_coord >= 0.0);
            CHECK(p.yaw >= 0.0);
            CHECK(p.yaw < 360.0);
            CHECK(p.roll == 0.0);
        };
        check_pose(s.ego.pose);
        for (const auto& agent : s.agents) {
            check_pose(agent.pose);
            CHECK(cfg.catalog.find(agent.asset) != nullptr);
            for (double e : agent.extent) CHECK(e > 0.0);
        }
    }
}

TEST_CASE("log-prob: generated scenes have finite density, impossible scenes the sentinel") {
    const auto cfg = default_generator_config();
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const SceneGraph s = sample_scene(cfg, seed);
        CHECK(std::isfinite(scene_distribution_log_prob(cfg, s)));
    }

    SceneGraph s = sample_scene(cfg, 3);
    s.weather.values[0] = 0.123456;  // not any preset's cloudiness row
    CHECK(scene_distribution_log_prob(cfg, s) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("log-prob ordering follows the configured asset weights") {
    auto cfg = default_generator_config();
    const SceneGraph base = sample_scene(cfg, 11);
    REQUIRE(base.vehicle_count() >= 1);

    int vehicle_index = -1;
    for (int i = 0; i < static_cast<int>(base.agents.size()); ++i)
        if (base.agents[i].kind == AgentKind::vehicle) vehicle_index = i;

    auto with_asset = [&](const std::string& name) {
        SceneGraph s = base;
        const AssetInfo* info = cfg.catalog.find_by_name(name);
        REQUIRE(info != nullptr);
        s.agents[vehicle_index].asset = AssetRef{info->family, info->model};
        s.agents[vehicle_index].extent = info->extent;
        return s;
    };

    const double w_sedan = cfg.catalog.find_by_name("sedan.prius")->weight;
    const double w_bike = cfg.catalog.find_by_name("bike.gazelle")->weight;
    REQUIRE(w_sedan > w_bike);
    const double lp_sedan = scene_distribution_log_prob(cfg, with_asset("sedan.prius"));
    const double lp_bike = scene_distribution_log_prob(cfg, with_asset("bike.gazelle"));
    CHECK(std::isfinite(lp_sedan));
    CHECK(std::isfinite(lp_bike));
    CHECK(lp_sedan > lp_bike);
    CHECK(lp_sedan - lp_bike == doctest::Approx(std::log(w_sedan / w_bike)).epsilon(1e-9));
}

TEST_CASE("rotation placement marginal is bimodal") {
    const auto cfg = default_generator_config();
    std::vector<int> hist(36, 0);
    int total = 0;
    for (std::uint64_t seed = 0; seed < 600; ++seed) {
        const SceneGraph s = sample_scene(cfg, 5000 + seed);
        for (const auto& a : s.agents) {
            ++hist[static_cast<int>(a.pose.yaw / 10.0)];
            ++total;
        }
    }
    REQUIRE(total >= 5000);
    auto mass = [&](int lo_bin, int hi_bin) {
        double m = 0.0;
        for (int b = lo_bin; b != hi_bin; b = (b + 1) % 36) m += hist[b];
        return m / total;
    };
    // modes at 0 and 180 (sigma 25): most mass within +-40 degrees of a mode
    CHECK(mass(32, 4) > 0.30);   // [320, 40)
    CHECK(mass(14, 22) > 0.30);  // [140, 220)
    CHECK(mass(7, 11) < 0.05);   // trough [70, 110)
    CHECK(mass(25, 29) < 0.05);  // trough [250, 290)
}

TEST_CASE("configuration errors") {
    auto cfg = default_generator_config();
    cfg.weather_presets.clear();
    CHECK_THROWS_AS(sample_scene(cfg, 1), ConfigError);

    auto cfg2 = default_generator_config();
    cfg2.maps[0].waypoints.clear();
    cfg2.maps[1].waypoints.clear();
    CHECK_THROWS_AS(sample_scene(cfg2, 1), ConfigError);
}

TEST_CASE("generator config round-trips through JSON") {
    const auto cfg = default_generator_config();
    nlohmann::json j = cfg;
    const GeneratorConfig back = j.get<GeneratorConfig>();
    const SceneGraph a = sample_scene(cfg, 42);
    const SceneGraph b = sample_scene(back, 42);
    CHECK(a == b);
    CHECK(nlohmann::json(back).dump() == j.dump());
}
