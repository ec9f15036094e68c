#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cst/codec.hpp"
#include "cst/engine.hpp"
#include "cst/rng.hpp"
#include "support/test_util.hpp"

using namespace cst;

TEST_CASE("encode_scalar digit rules") {
    CHECK(encode_scalar(0.0) == std::array<int, 3>{0, 0, 0});
    CHECK(encode_scalar(123.47) == std::array<int, 3>{1, 23, 4});
    CHECK(encode_scalar(599.99) == std::array<int, 3>{5, 99, 9});
    CHECK(encode_scalar(99.999) == std::array<int, 3>{0, 99, 9});
    CHECK_THROWS_AS(encode_scalar(-0.001), CodecError);
    CHECK_THROWS_AS(encode_scalar(600.0), CodecError);
}

TEST_CASE("decode_scalar formula and range checks") {
    CHECK(decode_scalar(1, 23, 4) == doctest::Approx(123.4).epsilon(1e-9));
    CHECK(decode_scalar(0, 0, 0) == 0.0);
    CHECK(decode_scalar(5, 99, 9) == doctest::Approx(599.9).epsilon(1e-9));
    CHECK_THROWS_AS(decode_scalar(6, 0, 0), CodecError);
    CHECK_THROWS_AS(decode_scalar(0, 100, 0), CodecError);
    CHECK_THROWS_AS(decode_scalar(0, 0, 10), CodecError);
}

TEST_CASE("scalar round trip obeys the truncation bound") {
    RandomStream rng(99);
    for (int i = 0; i < 20000; ++i) {
        const double v = rng.uniform(0.0, 600.0);
        const double back = decode_scalar(encode_scalar(v));
        CHECK(back <= v + 1e-6);
        CHECK(back > v - 0.1 - 1e-6);
    }
    // 0.1-grid values survive exactly
    for (int k = 0; k < 6000; ++k) {
        const double v = k / 10.0;
        CHECK(decode_scalar(encode_scalar(v)) == doctest::Approx(v).epsilon(1e-12));
    }
}

TEST_CASE("sequence layout arithmetic") {
    auto cfg = default_generator_config();
    auto ctx = PipelineContext::make(cfg);

    SceneGraph empty = sample_scene(cfg, 21);
    empty.agents.clear();
    const TokenSequence s0 = encode_scene(empty, ctx.config, ctx.schema);
    CHECK(s0.size() == 30);

    auto cfg12 = cfg;
    cfg12.pedestrian_count = 4;
    SceneGraph s = sample_scene(cfg12, 6);
    while (s.vehicle_count() != 8) s = sample_scene(cfg12, s.seed + 1);
    REQUIRE(s.agents.size() == 12);
    const TokenSequence seq = encode_scene(s, ctx.config, ctx.schema);
    CHECK(seq.size() == 30 + 17 * 12);

    CHECK_THROWS_AS(TokenSchema::agent_count_for_length(31), CodecError);
    CHECK(TokenSchema::agent_count_for_length(234) == 12);
}

TEST_CASE("vocabulary ranges partition: no token is legal in two classes") {
    auto ctx = PipelineContext::make(default_generator_config());
    const auto& classes = ctx.schema->classes();
    int expected_offset = 0;
    for (const auto& c : classes) {
        CHECK(c.vocab_offset == expected_offset);
        CHECK(c.vocab_size > 0);
        expected_offset += c.vocab_size;
    }
    CHECK(ctx.schema->total_vocab() == expected_offset);
}

TEST_CASE("scene round trip: pose within 0.1, discrete attributes exact") {
    auto ctx = PipelineContext::make(default_generator_config());
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const SceneGraph g = sample_scene(ctx.config, seed);
        const TokenSequence s = encode_scene(g, ctx.config, ctx.schema);
        const SceneGraph back = decode_scene(s, g, ctx.config);

        CHECK(back.weather == g.weather);
        CHECK(back.camera == g.camera);
        CHECK(back.map_id == g.map_id);

        auto close = [&](const Pose& a, const Pose& b) {
            CHECK(std::abs(a.x - b.x) < 0.1);
            CHECK(std::abs(a.y - b.y) < 0.1);
            CHECK(std::abs(a.z - b.z) < 0.1);
            CHECK(std::abs(a.roll - b.roll) < 0.1);
            CHECK(std::abs(a.yaw - b.yaw) < 0.1);
        };
        close(back.ego.pose, g.ego.pose);
        REQUIRE(back.agents.size() == g.agents.size());
        for (std::size_t i = 0; i < g.agents.size(); ++i) {
            close(back.agents[i].pose, g.agents[i].pose);
            CHECK(back.agents[i].asset == g.agents[i].asset);
            CHECK(back.agents[i].id == g.agents[i].id);
        }

        // idempotence: encode(decode(S)) == S token-for-token
        const TokenSequence again = encode_scene(back, ctx.config, ctx.schema);
        CHECK(again.tokens == s.tokens);
    }
}

TEST_CASE("single-token asset change decodes to a single-node difference") {
    auto ctx = PipelineContext::make(default_generator_config());
    const SceneGraph g = sample_scene(ctx.config, 17);
    REQUIRE(g.vehicle_count() >= 1);
    int vi = -1;
    for (int i = 0; i < static_cast<int>(g.agents.size()); ++i)
        if (g.agents[i].kind == AgentKind::vehicle) {
            vi = i;
            break;
        }

    TokenSequence seq = encode_scene(g, ctx.config, ctx.schema);
    const SceneGraph base = decode_scene(seq, g, ctx.config);

    // flip the model token within the same family
    const auto pos = asset_positions(vi);
    const int family = g.agents[vi].asset.family;
    const int model = g.agents[vi].asset.model;
    const int new_model = (model + 1) % ctx.config.catalog.models_in_family(family);
    REQUIRE(new_model != model);
    seq.tokens[pos[1]] = ctx.schema->global_token(16, new_model);
    const SceneGraph after = decode_scene(seq, g, ctx.config);

    CHECK(after.agents[vi].asset.model == new_model);
    CHECK(after.agents[vi].extent ==
          ctx.config.catalog.at(AssetRef{family, new_model}).extent);
    for (int i = 0; i < static_cast<int>(base.agents.size()); ++i) {
        if (i == vi) continue;
        CHECK(after.agents[i] == base.agents[i]);
    }
    CHECK(after.weather == base.weather);
    CHECK(after.ego == base.ego);
}

TEST_CASE("locality: k-token edits only change the owning nodes") {
    auto ctx = PipelineContext::make(default_generator_config());
    RandomStream rng(5150);
    for (int trial = 0; trial < 30; ++trial) {
        const SceneGraph g = sample_scene(ctx.config, 900 + trial);
        TokenSequence seq = encode_scene(g, ctx.config, ctx.schema);
        const SceneGraph base = decode_scene(seq, g, ctx.config);

        // perturb the yaw decimal digit of up to 3 distinct agents
        std::set<int> touched;
        const int edits = 1 + static_cast<int>(rng.uniform_index(3));
        for (int e = 0; e < edits; ++e) {
            const int ai = static_cast<int>(rng.uniform_index(g.agents.size()));
            touched.insert(ai);
            const auto pos = yaw_positions(ai)[2];
            const int local = ctx.schema->local_token(22, seq.tokens[pos]);
            seq.tokens[pos] = ctx.schema->global_token(22, (local + 1) % 10);
        }
        const SceneGraph after = decode_scene(seq, g, ctx.config);
        for (int i = 0; i < static_cast<int>(base.agents.size()); ++i) {
            if (touched.count(i)) continue;
            CHECK(after.agents[i] == base.agents[i]);
        }
        CHECK(after.weather == base.weather);
        CHECK(after.camera == base.camera);
    }
}

TEST_CASE("encoding errors name the offending attribute") {
    auto ctx = PipelineContext::make(default_generator_config());
    SceneGraph g = sample_scene(ctx.config, 2);
    g.weather.values[1] = 0.987654;
    try {
        encode_scene(g, ctx.config, ctx.schema);
        FAIL("expected CodecError");
    } catch (const CodecError& e) {
        CHECK(std::string(e.what()).find("precipitation") != std::string::npos);
    }
}

TEST_CASE("schema hash is stable and config-sensitive") {
    const auto a = TokenSchema::build(default_generator_config());
    const auto b = TokenSchema::build(default_generator_config());
    CHECK(a->hash() == b->hash());

    auto cfg = default_generator_config();
    cfg.weather_presets.pop_back();
    const auto c = TokenSchema::build(cfg);
    CHECK(a->hash() != c->hash());
}
