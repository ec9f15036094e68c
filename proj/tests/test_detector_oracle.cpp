#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cst/detector.hpp"
#include "cst/rng.hpp"
#include "support/test_util.hpp"

using namespace cst;

namespace {

TrainingManifest manifest_of(std::initializer_list<std::pair<std::string, long>> items) {
    TrainingManifest m;
    for (const auto& [asset, count] : items) m.counts[ManifestKey{asset, 0, 0}] = count;
    m.total_images = 1;
    return m;
}

// one labeled side-on vehicle straight ahead
struct DetectFixture {
    GeneratorConfig cfg = default_generator_config();
    SceneGraph scene;
    LabelSet labels;

    explicit DetectFixture(const std::string& asset_name, double distance = 30.0,
                           int preset = 0) {
        scene.id = 900;
        scene.map_id = "TownA";
        scene.weather = cfg.weather_presets[preset].state;
        scene.camera = CameraModel{1600, 900, 800.0, 800.0, 450.0};
        scene.ego.id = 0;
        scene.ego.kind = AgentKind::ego;
        scene.ego.pose = Pose{0, 0, 0.5, 0, 0};
        scene.ego.extent = cfg.catalog.at(cfg.ego_asset).extent;

        const AssetInfo* info = cfg.catalog.find_by_name(asset_name);
        REQUIRE(info != nullptr);
        AgentNode a;
        a.id = 1;
        a.kind = AgentKind::vehicle;
        a.asset = AssetRef{info->family, info->model};
        a.extent = {2.3, 0.95, 1.25};  // fixture extent: box clears the filters
        a.pose = Pose{distance, 0.0, 0.5 + 1.6, 0.0, 90.0};
        scene.agents.push_back(a);
        labels = derive_labels(scene);
        REQUIRE(labels.boxes.size() == 1);
    }
};

}  // namespace

TEST_CASE("fit: exposure kernel arithmetic") {
    const auto cfg = default_generator_config();

    SUBCASE("empty manifest gives zero exposure everywhere") {
        const auto profile = fit(TrainingManifest{}, cfg.catalog);
        for (const auto& [name, e] : profile.exposure) CHECK(e == 0.0);
    }

    SUBCASE("100 diamondback instances spill 50 to the gazelle") {
        const auto profile = fit(manifest_of({{"bike.diamondback", 100}}), cfg.catalog);
        CHECK(profile.exposure_of("bike.diamondback") == doctest::Approx(100.0));
        CHECK(profile.exposure_of("bike.gazelle") == doctest::Approx(50.0));
        CHECK(profile.exposure_of("bike.crossbike") == doctest::Approx(50.0));
        // any-vehicle floor
        CHECK(profile.exposure_of("heavy.cybertruck") == doctest::Approx(5.0));
        CHECK(profile.exposure_of("sedan.prius") == doctest::Approx(5.0));
    }

    SUBCASE("adding counts strictly increases exposure where sim > 0") {
        const auto base = fit(manifest_of({{"sedan.prius", 1000}}), cfg.catalog);
        const auto more = fit(manifest_of({{"sedan.prius", 1500}}), cfg.catalog);
        for (const auto& [name, e] : base.exposure) CHECK(more.exposure_of(name) > e);
    }

    SUBCASE("negative constants are rejected") {
        DetectorConstants bad;
        bad.jitter = -0.1;
        CHECK_THROWS_AS(fit(TrainingManifest{}, cfg.catalog, bad), ConfigError);
    }
}

TEST_CASE("light level: normalized sun altitude minus cloudiness penalty") {
    const auto cfg = default_generator_config();
    DetectorConstants k;
    WeatherState w;
    w.values[WeatherState::kSunAltitudeIndex] = 45.0;
    w.values[0] = 0.6;
    CHECK(light_level(w, k) == doctest::Approx(0.5 - 0.5 * 0.6));
}

TEST_CASE("detect: saturation, misses, exposure ordering") {
    SUBCASE("huge exposure saturates confidence and shrinks jitter") {
        DetectFixture f("sedan.prius");
        auto profile = fit(manifest_of({{"sedan.prius", 1}}), f.cfg.catalog);
        profile.exposure["sedan.prius"] = 1e9;
        const auto preds = detect(profile, f.cfg, f.scene, f.labels, 1);
        REQUIRE(preds.size() >= 1);
        CHECK(preds[0].confidence > 0.99);
        CHECK(iou(preds[0].box, f.labels.boxes[0].box) > 0.95);
    }

    SUBCASE("all below c_min with no false positives gives an empty list") {
        DetectFixture f("bike.gazelle", 45.0, 4);  // dark preset
        DetectorConstants k;
        k.lambda_fp = 0.0;
        auto profile = fit(TrainingManifest{}, f.cfg.catalog, k);
        // a half-occluded small box in the dark lands under the miss threshold
        LabelSet occluded = f.labels;
        occluded.boxes[0].box = Box2D{780, 440, 816, 476};
        occluded.boxes[0].occluded_frac = 0.5;
        occluded.boxes[0].visible_px = 1320;
        const double c = object_confidence(profile, f.cfg, f.scene, f.scene.agents[0],
                                           occluded.boxes[0]);
        REQUIRE(c < k.c_min);
        CHECK(detect(profile, f.cfg, f.scene, occluded, 1).empty());
    }

    SUBCASE("high-exposure asset outscores the zero-exposure one in the same spot") {
        DetectFixture rich("sedan.prius");
        DetectFixture poor("bike.gazelle");
        const auto profile = fit(manifest_of({{"sedan.prius", 20000}}), rich.cfg.catalog);
        // same geometry, same weather: only the asset differs
        const double c_rich = object_confidence(profile, rich.cfg, rich.scene,
                                                rich.scene.agents[0], rich.labels.boxes[0]);
        const double c_poor = object_confidence(profile, poor.cfg, poor.scene,
                                                poor.scene.agents[0], poor.labels.boxes[0]);
        CHECK(c_rich > c_poor);
    }

    SUBCASE("detection is deterministic given (profile, scene, seed)") {
        DetectFixture f("sedan.prius");
        const auto profile = fit(manifest_of({{"sedan.prius", 500}}), f.cfg.catalog);
        const auto a = detect(profile, f.cfg, f.scene, f.labels, 77);
        const auto b = detect(profile, f.cfg, f.scene, f.labels, 77);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].confidence == b[i].confidence);
            CHECK(a[i].box == b[i].box);
        }
        const auto c = detect(profile, f.cfg, f.scene, f.labels, 78);
        bool identical = a.size() == c.size();
        if (identical)
            for (std::size_t i = 0; i < a.size(); ++i) identical &= (a[i].box == c[i].box);
        CHECK_FALSE(identical);
    }
}

TEST_CASE("weakness injection forces exposure to zero by group membership") {
    DetectFixture f("bike.diamondback");
    const auto manifest = manifest_of({{"bike.diamondback", 5000}});

    const auto healthy = fit(manifest, f.cfg.catalog);
    const auto weak_asset =
        fit(manifest, f.cfg.catalog, {}, {GroupKey::asset("bike.diamondback")});
    const double c_healthy = object_confidence(healthy, f.cfg, f.scene, f.scene.agents[0],
                                               f.labels.boxes[0]);
    const double c_weak = object_confidence(weak_asset, f.cfg, f.scene, f.scene.agents[0],
                                            f.labels.boxes[0]);
    CHECK(c_weak < c_healthy);

    // rotation-bin weakness hits the yaw=90 fixture via bin [90, 100)
    const auto weak_rot = fit(manifest, f.cfg.catalog, {}, {GroupKey::rotation_value(95.0)});
    CHECK(object_confidence(weak_rot, f.cfg, f.scene, f.scene.agents[0], f.labels.boxes[0]) ==
          doctest::Approx(c_weak));

    // weather weakness keys on the scene preset
    const auto weak_weather =
        fit(manifest, f.cfg.catalog, {}, {GroupKey::weather(f.cfg.weather_presets[0].name)});
    CHECK(object_confidence(weak_weather, f.cfg, f.scene, f.scene.agents[0],
                            f.labels.boxes[0]) == doctest::Approx(c_weak));
}

TEST_CASE("spillover ordering: family kernel beats the any-vehicle kernel") {
    DetectFixture gazelle("bike.gazelle");
    DetectFixture cyber("heavy.cybertruck");

    const auto before = fit(manifest_of({{"sedan.prius", 3000}}), gazelle.cfg.catalog);
    const auto after =
        fit(manifest_of({{"sedan.prius", 3000}, {"bike.diamondback", 800}}), gazelle.cfg.catalog);

    const double d_gazelle =
        object_confidence(after, gazelle.cfg, gazelle.scene, gazelle.scene.agents[0],
                          gazelle.labels.boxes[0]) -
        object_confidence(before, gazelle.cfg, gazelle.scene, gazelle.scene.agents[0],
                          gazelle.labels.boxes[0]);
    const double d_cyber = object_confidence(after, cyber.cfg, cyber.scene,
                                             cyber.scene.agents[0], cyber.labels.boxes[0]) -
                           object_confidence(before, cyber.cfg, cyber.scene,
                                             cyber.scene.agents[0], cyber.labels.boxes[0]);
    CHECK(d_gazelle > 0.0);
    CHECK(d_cyber > 0.0);
    CHECK(d_gazelle > d_cyber);
}

TEST_CASE("diminishing returns in the exposure response") {
    DetectFixture f("sedan.prius");
    auto conf_at = [&](long count) {
        const auto profile = fit(manifest_of({{"sedan.prius", count}}), f.cfg.catalog);
        return object_confidence(profile, f.cfg, f.scene, f.scene.agents[0], f.labels.boxes[0]);
    };
    const double gain_low = conf_at(1000) - conf_at(100);
    const double gain_high = conf_at(10000) - conf_at(1000);
    CHECK(gain_low > 0.0);
    CHECK(gain_high > 0.0);
    CHECK(gain_high < gain_low);
}

TEST_CASE("exposure monotonicity across random manifests") {
    const auto cfg = default_generator_config();
    RandomStream rng(2024);
    const auto vehicles = cfg.catalog.vehicle_entries();
    for (int trial = 0; trial < 20; ++trial) {
        TrainingManifest m;
        for (int i = 0; i < 5; ++i) {
            const auto* a = vehicles[rng.uniform_index(vehicles.size())];
            m.counts[ManifestKey{a->name, static_cast<int>(rng.uniform_index(36)),
                                 static_cast<int>(rng.uniform_index(15))}] +=
                1 + static_cast<long>(rng.uniform_index(500));
        }
        TrainingManifest bigger = m;
        const auto* extra = vehicles[rng.uniform_index(vehicles.size())];
        bigger.counts[ManifestKey{extra->name, 0, 0}] += 200;

        const auto p1 = fit(m, cfg.catalog);
        const auto p2 = fit(bigger, cfg.catalog);
        for (const auto& [name, e] : p1.exposure) CHECK(p2.exposure_of(name) >= e);
    }
}

TEST_CASE("AP: perfect detector, silent detector, hand-computed curve") {
    SUBCASE("all ground truth matched at IOU 1 with no false positives") {
        DetectFixture f("sedan.prius");
        DetectorConstants k;
        k.jitter = 0.0;
        k.lambda_fp = 0.0;
        auto profile = fit(manifest_of({{"sedan.prius", 100000}}), f.cfg.catalog, k);
        const auto r = evaluate_ap(profile, f.cfg, {{f.scene, f.labels}}, 0.5, 9);
        CHECK(r.ap == doctest::Approx(100.0));
        CHECK_FALSE(r.zero_gt_warning);
    }

    SUBCASE("detector emitting nothing scores zero") {
        DetectFixture f("bike.gazelle", 45.0, 4);
        DetectorConstants k;
        k.lambda_fp = 0.0;
        auto profile = fit(TrainingManifest{}, f.cfg.catalog, k);
        LabelSet occluded = f.labels;
        occluded.boxes[0].box = Box2D{780, 440, 816, 476};
        occluded.boxes[0].occluded_frac = 0.5;
        occluded.boxes[0].visible_px = 1320;
        REQUIRE(detect(profile, f.cfg, f.scene, occluded, 9).empty());
        const auto r = evaluate_ap(profile, f.cfg, {{f.scene, occluded}}, 0.5, 9);
        CHECK(r.ap == 0.0);
        CHECK_FALSE(r.zero_gt_warning);
    }

    SUBCASE("zero ground truth raises the warning flag") {
        DetectFixture f("sedan.prius");
        LabelSet empty;
        empty.scene_id = f.scene.id;
        SceneGraph bare = f.scene;
        bare.agents.clear();
        const auto profile = fit(TrainingManifest{}, f.cfg.catalog);
        const auto r = evaluate_ap(profile, f.cfg, {{bare, empty}}, 0.5, 9);
        CHECK(r.ap == 0.0);
        CHECK(r.zero_gt_warning);
    }

    SUBCASE("one image, two GT, three predictions: 101-point hand value") {
        const Box2D gt1{100, 100, 200, 200};
        const Box2D gt2{400, 100, 500, 200};
        LabelSet gt;
        gt.boxes.push_back(LabeledBox{1, gt1, 10, 2000, 0});
        gt.boxes.push_back(LabeledBox{2, gt2, 10, 2000, 0});
        const std::vector<Prediction> preds = {
            Prediction{gt1, 0.9},                         // correct
            Prediction{Box2D{700, 700, 800, 800}, 0.8},   // false
            Prediction{gt2, 0.7},                         // correct
        };
        const auto r = ap_from_predictions({preds}, {gt}, 0.5);
        // PR points: (1, .5), (.5, .5), (.667, 1); interpolated:
        // r in [0,.5] -> 1, r in (.5,1] -> 2/3; AP = (51 + 50*(2/3)) / 101
        const double expected = 100.0 * (51.0 + 50.0 * (2.0 / 3.0)) / 101.0;
        CHECK(r.ap == doctest::Approx(expected).epsilon(1e-9));
        CHECK(expected == doctest::Approx(83.5).epsilon(1e-2));
    }
}

TEST_CASE("profile JSON round trip") {
    const auto cfg = default_generator_config();
    const auto profile = fit(manifest_of({{"sedan.prius", 123}, {"bike.gazelle", 7}}),
                             cfg.catalog, {}, {GroupKey::rotation_value(178.0)});
    nlohmann::json j = profile;
    const DetectorProfile back = j.get<DetectorProfile>();
    CHECK(back.exposure == profile.exposure);
    CHECK(back.weak_groups == profile.weak_groups);
    CHECK(nlohmann::json(back).dump() == j.dump());

    TrainingManifest m = manifest_of({{"sedan.prius", 5}});
    nlohmann::json jm = m;
    CHECK(jm.get<TrainingManifest>().counts == m.counts);
}
