#include "cst/engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "cst/io.hpp"
#include "cst/rng.hpp"

namespace cst {

namespace {

constexpr std::uint64_t kDetectStream = 0xDE7EC7ULL;

// slot class ids, mirroring the codec's registry order
constexpr int kClassFamily = 15;
constexpr int kClassModel = 16;
constexpr int kClassRotH = 20;
constexpr int kClassRotO = 21;

std::vector<int> vehicle_agent_ids(const SceneGraph& scene) {
    std::vector<int> out;
    for (const auto& a : scene.agents)
        if (a.kind == AgentKind::vehicle) out.push_back(a.id);
    return out;
}

int agent_index_of(const SceneGraph& scene, int agent_id) {
    for (int i = 0; i < static_cast<int>(scene.agents.size()); ++i)
        if (scene.agents[i].id == agent_id) return i;
    throw DataError("agent id not found in scene: " + std::to_string(agent_id));
}

// Labeled vehicles are preferred targets: an edit to an off-camera vehicle
// carries no causal information at this scale. Falls back to any vehicle.
std::vector<int> eligible_agent_ids(const SceneGraph& scene, const LabelSet& labels) {
    std::vector<int> labeled;
    for (const auto& b : labels.boxes) {
        for (const auto& a : scene.agents)
            if (a.id == b.agent_id && a.kind == AgentKind::vehicle) labeled.push_back(a.id);
    }
    if (!labeled.empty()) return labeled;
    return vehicle_agent_ids(scene);
}

// Keeps vehicle asset edits inside the vehicle families and inside the
// catalog's per-family model ranges; forbids reproducing the source pair.
SupportFilter make_asset_filter(const PipelineContext& ctx, int source_family, int source_model,
                                std::size_t family_pos) {
    const TokenSchema& schema = *ctx.schema;
    const AssetCatalog& cat = ctx.config.catalog;
    return [&schema, &cat, source_family, source_model, family_pos](
               std::size_t pos, int global, const TokenSequence& current) {
        if (pos == family_pos) {
            const int family = global - schema.slot_class(kClassFamily).vocab_offset;
            if (!AssetCatalog::is_vehicle_family(family)) return false;
            // avoid a dead end when the source family has a single model
            if (family == source_family && cat.models_in_family(family) < 2) return false;
            return true;
        }
        const int family =
            current.tokens[family_pos] - schema.slot_class(kClassFamily).vocab_offset;
        const int model = global - schema.slot_class(kClassModel).vocab_offset;
        if (model >= cat.models_in_family(family)) return false;
        if (family == source_family && model == source_model) return false;
        return true;
    };
}

// Rotation values must stay below 360: when the hundreds digit is 3 the
// two-digit block is capped at 59.
SupportFilter make_rotation_filter(const PipelineContext& ctx, std::size_t hundreds_pos) {
    const TokenSchema& schema = *ctx.schema;
    return [&schema, hundreds_pos](std::size_t pos, int global, const TokenSequence& current) {
        const SlotInfo slot = schema.slot_at(pos);
        if (slot.kind == SlotKind::rot_hundreds) return true;
        if (slot.kind == SlotKind::rot_ones) {
            const int w0 = current.tokens[hundreds_pos] - schema.slot_class(kClassRotH).vocab_offset;
            const int w1 = global - schema.slot_class(kClassRotO).vocab_offset;
            return w0 < 3 || w1 <= 59;
        }
        return true;
    };
}

int preset_of_sequence(const TokenSequence& seq, const TokenSchema& schema) {
    for (int p = 0; p < static_cast<int>(schema.preset_token_rows().size()); ++p) {
        bool match = true;
        for (int a = 0; a < WeatherState::kAttrCount; ++a) {
            const int local = schema.local_token(a, seq.tokens[a]);
            if (local != schema.preset_token_rows()[p][a]) {
                match = false;
                break;
            }
        }
        if (match) return p;
    }
    return -1;
}

// Joint preset resampling: scores every configured preset under the model's
// per-position weather distributions and samples one.
int sample_weather_preset(const MaskedSequenceModel& model, const TokenSequence& seq,
                          RandomStream& rng, bool forbid_original) {
    const TokenSchema& schema = model.schema();
    const auto positions = weather_positions();
    const auto dists = model.predict_distribution(seq, positions);

    const int original = preset_of_sequence(seq, schema);
    const auto& rows = schema.preset_token_rows();
    std::vector<double> weights(rows.size(), 0.0);
    for (std::size_t p = 0; p < rows.size(); ++p) {
        if (forbid_original && static_cast<int>(p) == original) continue;
        double log_w = 0.0;
        for (int a = 0; a < WeatherState::kAttrCount; ++a)
            log_w += std::log(dists[a].probs[rows[p][a]]);
        weights[p] = std::exp(log_w);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) throw DataError("empty preset support in weather resample");
    return static_cast<int>(rng.categorical(weights));
}

void write_preset_tokens(TokenSequence& seq, int preset) {
    const TokenSchema& schema = *seq.schema;
    const auto& row = schema.preset_token_rows()[preset];
    for (int a = 0; a < WeatherState::kAttrCount; ++a)
        seq.tokens[a] = schema.global_token(a, row[a]);
}

void write_scalar_tokens(TokenSequence& seq, std::size_t base, double value, bool rotation) {
    const TokenSchema& schema = *seq.schema;
    const auto w = encode_scalar(value);
    seq.tokens[base] = schema.global_token(rotation ? 20 : 17, w[0]);
    seq.tokens[base + 1] = schema.global_token(rotation ? 21 : 18, w[1]);
    seq.tokens[base + 2] = schema.global_token(rotation ? 22 : 19, w[2]);
}

struct PreparedScene {
    TokenSequence seq;
    SceneGraph rendered;  // decode(encode(scene)): the scored "before" scene
    LabelSet labels;
    double score_before = 0.0;
};

class SceneCache {
public:
    SceneCache(const std::vector<SceneGraph>& scenes, const DetectorProfile& detector,
               const PipelineContext& ctx)
        : scenes_(scenes), detector_(detector), ctx_(ctx) {}

    const PreparedScene& prepared(std::size_t index) {
        auto it = cache_.find(index);
        if (it != cache_.end()) return it->second;
        PreparedScene p;
        p.seq = encode_scene(scenes_[index], ctx_.config, ctx_.schema);
        p.rendered = decode_scene(p.seq, scenes_[index], ctx_.config);
        p.labels = derive_labels(p.rendered, ctx_.geometry);
        const auto preds =
            detect(detector_, ctx_.config, p.rendered, p.labels,
                   derive_seed(kDetectStream, static_cast<std::uint64_t>(p.rendered.id)),
                   ctx_.geometry);
        p.score_before = score_example(preds, p.labels).score;
        return cache_.emplace(index, std::move(p)).first->second;
    }

private:
    const std::vector<SceneGraph>& scenes_;
    const DetectorProfile& detector_;
    const PipelineContext& ctx_;
    std::unordered_map<std::size_t, PreparedScene> cache_;
};

nlohmann::json asset_value(const PipelineContext& ctx, const AssetRef& ref) {
    return ctx.config.catalog.at(ref).name;
}

std::string preset_name_of(const PipelineContext& ctx, const WeatherState& w) {
    const int p = ctx.config.preset_index(w);
    if (p < 0) throw DataError("scene weather is not a configured preset");
    return ctx.config.weather_presets[p].name;
}

}  // namespace

PipelineContext PipelineContext::make(GeneratorConfig cfg, GeometryOptions geo) {
    PipelineContext ctx;
    ctx.schema = TokenSchema::build(cfg);
    ctx.config = std::move(cfg);
    ctx.geometry = geo;
    return ctx;
}

double pipeline_score(const DetectorProfile& detector, const PipelineContext& ctx,
                      const SceneGraph& scene) {
    const LabelSet labels = derive_labels(scene, ctx.geometry);
    const auto preds = detect(detector, ctx.config, scene, labels,
                              derive_seed(kDetectStream, static_cast<std::uint64_t>(scene.id)),
                              ctx.geometry);
    return score_example(preds, labels).score;
}

CampaignResult run_campaign(const std::vector<SceneGraph>& scenes,
                            const MaskedSequenceModel& model, const DetectorProfile& detector,
                            const PipelineContext& ctx, const CampaignOptions& opts) {
    if (scenes.empty() && opts.n > 0) throw DataError("campaign needs at least one scene");
    if (!(opts.tau > 0.0)) throw ConfigError("tau must be > 0");

    CampaignResult result;
    SceneCache cache(scenes, detector, ctx);
    const double weights[4] = {opts.weights.asset, opts.weights.rotation, opts.weights.weather,
                               opts.weights.location};
    static const char* categories[4] = {kCategoryAsset, kCategoryRotation, kCategoryWeather,
                                        kCategoryLocation};

    for (long t = 0; t < opts.n; ++t) {
        RandomStream rng(derive_seed(opts.seed, 0x7261ULL, static_cast<std::uint64_t>(t)));
        const std::size_t scene_index = static_cast<std::size_t>(t) % scenes.size();
        const SceneGraph& source = scenes[scene_index];
        const std::string category = categories[rng.categorical(weights)];
        const PreparedScene& before = cache.prepared(scene_index);

        int agent_id = -1;
        int agent_index = -1;
        if (category != kCategoryWeather) {
            const auto eligible = eligible_agent_ids(before.rendered, before.labels);
            if (eligible.empty()) {
                ++result.skipped_no_agent;
                continue;
            }
            agent_id = eligible[rng.uniform_index(eligible.size())];
            agent_index = agent_index_of(source, agent_id);
        }

        TokenSequence after_seq = before.seq;

        InterventionRecord rec;
        rec.scene_id = source.id;
        rec.category = category;
        rec.agent_id = agent_id;
        rec.strategy = "mlm";

        if (category == kCategoryAsset) {
            const AgentNode& agent = before.rendered.agents[agent_index];
            rec.source_value = asset_value(ctx, agent.asset);
            const auto positions = asset_positions(agent_index);
            const auto filter =
                make_asset_filter(ctx, agent.asset.family, agent.asset.model, positions[0]);
            after_seq = mask_and_resample(model, before.seq, positions, rng,
                                          /*forbid_original=*/false, filter);
        } else if (category == kCategoryRotation) {
            const AgentNode& agent = before.rendered.agents[agent_index];
            rec.source_value = agent.pose.yaw;
            const auto positions = yaw_positions(agent_index);
            const auto filter = make_rotation_filter(ctx, positions[0]);
            after_seq = mask_and_resample(model, before.seq, positions, rng,
                                          /*forbid_original=*/false, filter);
        } else if (category == kCategoryLocation) {
            const AgentNode& agent = before.rendered.agents[agent_index];
            rec.source_value = nlohmann::json::array({agent.pose.x, agent.pose.y});
            const auto positions = location_positions(agent_index);
            after_seq = mask_and_resample(model, before.seq, positions, rng,
                                          /*forbid_original=*/false);
        } else {  // weather
            rec.source_value = preset_name_of(ctx, before.rendered.weather);
            const int preset = sample_weather_preset(model, before.seq, rng,
                                                     /*forbid_original=*/true);
            write_preset_tokens(after_seq, preset);
        }

        if (after_seq.tokens == before.seq.tokens) {
            ++result.dropped_noop;
            continue;
        }

        const SceneGraph after = decode_scene(after_seq, source, ctx.config);
        if (category == kCategoryAsset) {
            rec.target_value = asset_value(ctx, after.agents[agent_index].asset);
        } else if (category == kCategoryRotation) {
            rec.target_value = after.agents[agent_index].pose.yaw;
        } else if (category == kCategoryLocation) {
            rec.target_value =
                nlohmann::json::array({after.agents[agent_index].pose.x,
                                       after.agents[agent_index].pose.y});
        } else {
            rec.target_value = preset_name_of(ctx, after.weather);
        }

        rec.score_before = before.score_before;
        rec.score_after = pipeline_score(detector, ctx, after);
        rec.delta = delta(rec.score_after, rec.score_before);
        result.records.push_back(std::move(rec));
    }
    return result;
}

CampaignResult run_random_campaign(const std::vector<InterventionRecord>& records,
                                   const std::vector<SceneGraph>& scenes,
                                   const DetectorProfile& detector, const PipelineContext& ctx,
                                   std::uint64_t seed) {
    std::unordered_map<std::int64_t, const SceneGraph*> by_id;
    for (const auto& s : scenes) by_id[s.id] = &s;

    CampaignResult result;
    const auto vehicle_pool = ctx.config.catalog.vehicle_entries();

    long index = -1;
    for (const auto& mlm : records) {
        ++index;
        RandomStream rng(derive_seed(seed, 0x7243ULL, static_cast<std::uint64_t>(index)));
        auto it = by_id.find(mlm.scene_id);
        if (it == by_id.end()) throw DataError("random campaign: scene id not found");
        const SceneGraph& source = *it->second;

        const TokenSequence seq = encode_scene(source, ctx.config, ctx.schema);
        const SceneGraph rendered = decode_scene(seq, source, ctx.config);
        TokenSequence after_seq = seq;

        InterventionRecord rec;
        rec.scene_id = mlm.scene_id;
        rec.category = mlm.category;
        rec.agent_id = mlm.agent_id;
        rec.strategy = "random";

        if (mlm.category == kCategoryAsset) {
            const int agent_index = agent_index_of(source, mlm.agent_id);
            const AssetRef source_asset = rendered.agents[agent_index].asset;
            rec.source_value = asset_value(ctx, source_asset);
            std::vector<const AssetInfo*> choices;
            for (const auto* a : vehicle_pool)
                if (!(AssetRef{a->family, a->model} == source_asset)) choices.push_back(a);
            const AssetInfo* target = choices[rng.uniform_index(choices.size())];
            const std::size_t base = asset_positions(agent_index)[0];
            after_seq.tokens[base] = ctx.schema->global_token(kClassFamily, target->family);
            after_seq.tokens[base + 1] = ctx.schema->global_token(kClassModel, target->model);
        } else if (mlm.category == kCategoryRotation) {
            const int agent_index = agent_index_of(source, mlm.agent_id);
            rec.source_value = rendered.agents[agent_index].pose.yaw;
            const double yaw = rng.uniform(0.0, 360.0);
            write_scalar_tokens(after_seq, yaw_positions(agent_index)[0], yaw, /*rotation=*/true);
        } else if (mlm.category == kCategoryLocation) {
            const int agent_index = agent_index_of(source, mlm.agent_id);
            rec.source_value = nlohmann::json::array(
                {rendered.agents[agent_index].pose.x, rendered.agents[agent_index].pose.y});
            const double lo = ctx.config.min_coord;
            const auto base = location_positions(agent_index)[0];
            write_scalar_tokens(after_seq, base, rng.uniform(0.0, 600.0), false);
            write_scalar_tokens(after_seq, base + 3, rng.uniform(0.0, 600.0), false);
            (void)lo;
        } else if (mlm.category == kCategoryWeather) {
            rec.source_value = preset_name_of(ctx, rendered.weather);
            const int original = ctx.config.preset_index(rendered.weather);
            std::vector<double> w(ctx.config.weather_presets.size(), 1.0);
            if (original >= 0) w[original] = 0.0;
            write_preset_tokens(after_seq, static_cast<int>(rng.categorical(w)));
        } else {
            throw DataError("unknown record category: " + mlm.category);
        }

        if (after_seq.tokens == seq.tokens) {
            ++result.dropped_noop;
            continue;
        }
        const SceneGraph after = decode_scene(after_seq, source, ctx.config);
        if (mlm.category == kCategoryAsset) {
            rec.target_value = asset_value(ctx, after.agents[agent_index_of(source, mlm.agent_id)].asset);
        } else if (mlm.category == kCategoryRotation) {
            rec.target_value = after.agents[agent_index_of(source, mlm.agent_id)].pose.yaw;
        } else if (mlm.category == kCategoryLocation) {
            const int ai = agent_index_of(source, mlm.agent_id);
            rec.target_value = nlohmann::json::array({after.agents[ai].pose.x, after.agents[ai].pose.y});
        } else {
            rec.target_value = preset_name_of(ctx, after.weather);
        }

        rec.score_before = pipeline_score(detector, ctx, rendered);
        rec.score_after = pipeline_score(detector, ctx, after);
        rec.delta = delta(rec.score_after, rec.score_before);
        result.records.push_back(std::move(rec));
    }
    return result;
}

GroupKey record_source_group(const InterventionRecord& r) {
    if (r.category == kCategoryAsset) return GroupKey::asset(r.source_value.get<std::string>());
    if (r.category == kCategoryRotation) return GroupKey::rotation_value(r.source_value.get<double>());
    if (r.category == kCategoryWeather) return GroupKey::weather(r.source_value.get<std::string>());
    if (r.category == kCategoryLocation)
        return GroupKey::location_value(r.source_value.at(0).get<double>(),
                                        r.source_value.at(1).get<double>());
    throw DataError("unknown record category: " + r.category);
}

GroupKey record_target_group(const InterventionRecord& r) {
    if (r.category == kCategoryAsset) return GroupKey::asset(r.target_value.get<std::string>());
    if (r.category == kCategoryRotation) return GroupKey::rotation_value(r.target_value.get<double>());
    if (r.category == kCategoryWeather) return GroupKey::weather(r.target_value.get<std::string>());
    if (r.category == kCategoryLocation)
        return GroupKey::location_value(r.target_value.at(0).get<double>(),
                                        r.target_value.at(1).get<double>());
    throw DataError("unknown record category: " + r.category);
}

std::vector<GroupStats> aggregate_groups(const std::vector<InterventionRecord>& records,
                                         double tau, const AggregateOptions& opts) {
    if (!(tau > 0.0)) throw ConfigError("tau must be > 0");
    std::map<GroupKey, GroupStats> stats;
    auto touch = [&](const GroupKey& key) -> GroupStats& {
        auto [it, inserted] = stats.try_emplace(key);
        if (inserted) it->second.key = key;
        return it->second;
    };

    for (const auto& r : records) {
        if (r.category == kCategoryLocation && !opts.include_location) continue;
        const GroupKey src = record_source_group(r);
        const GroupKey tgt = record_target_group(r);

        if (src == tgt && !opts.count_self_per_side) {
            GroupStats& g = touch(src);
            g.total += 1;
            if (r.delta <= -tau || r.delta >= tau) g.events += 1;
            continue;
        }
        GroupStats& gs = touch(src);
        gs.total += 1;
        if (r.delta >= tau) gs.events += 1;
        GroupStats& gt = touch(tgt);
        gt.total += 1;
        if (r.delta <= -tau) gt.events += 1;
    }

    std::vector<GroupStats> out;
    for (auto& [key, g] : stats) {
        if (g.total < opts.min_count) continue;
        g.percent = 100.0 * static_cast<double>(g.events) / static_cast<double>(g.total);
        g.tier = g.percent >= opts.tier1_cut ? 1 : (g.percent >= opts.tier2_cut ? 2 : 3);
        out.push_back(g);
    }
    std::sort(out.begin(), out.end(), [](const GroupStats& a, const GroupStats& b) {
        if (a.percent != b.percent) return a.percent > b.percent;
        if (a.total != b.total) return a.total > b.total;
        return a.key.str() < b.key.str();
    });
    return out;
}

SceneGraph apply_group_edit(const SceneGraph& scene, int agent_id, const GroupKey& group,
                            const PipelineContext& ctx) {
    SceneGraph out = scene;
    switch (group.kind) {
        case GroupKey::Kind::asset: {
            const AssetInfo* info = ctx.config.catalog.find_by_name(group.asset_name);
            if (!info) throw DataError("unknown asset group: " + group.asset_name);
            AgentNode& agent = out.agents[agent_index_of(out, agent_id)];
            agent.asset = AssetRef{info->family, info->model};
            agent.extent = info->extent;
            return out;
        }
        case GroupKey::Kind::rotation: {
            AgentNode& agent = out.agents[agent_index_of(out, agent_id)];
            agent.pose.yaw = group.rotation_bin_center();
            return out;
        }
        case GroupKey::Kind::weather: {
            for (const auto& p : ctx.config.weather_presets) {
                if (p.name == group.weather_name) {
                    out.weather = p.state;
                    return out;
                }
            }
            throw DataError("unknown weather group: " + group.weather_name);
        }
        case GroupKey::Kind::location: {
            AgentNode& agent = out.agents[agent_index_of(out, agent_id)];
            agent.pose.x = (group.cell_x + 0.5) * GroupKey::kLocationCellSize;
            agent.pose.y = (group.cell_y + 0.5) * GroupKey::kLocationCellSize;
            return out;
        }
    }
    throw DataError("unknown group kind");
}

std::vector<TwoStepRecord> run_two_step(const std::vector<SceneGraph>& scenes,
                                        const MaskedSequenceModel& model,
                                        const DetectorProfile& detector,
                                        const PipelineContext& ctx,
                                        const std::vector<GroupKey>& first_edit_set,
                                        const TwoStepOptions& opts) {
    if (first_edit_set.empty()) throw ConfigError("two-step campaign needs a non-empty first-edit set");
    if (scenes.empty() && opts.n > 0) throw DataError("two-step campaign needs scenes");

    std::vector<TwoStepRecord> out;
    SceneCache cache(scenes, detector, ctx);

    for (long t = 0; t < opts.n; ++t) {
        RandomStream rng(derive_seed(opts.seed, 0x7257ULL, static_cast<std::uint64_t>(t)));
        const std::size_t scene_index = static_cast<std::size_t>(t) % scenes.size();
        const SceneGraph& source = scenes[scene_index];
        const GroupKey first = first_edit_set[rng.uniform_index(first_edit_set.size())];

        const PreparedScene& before = cache.prepared(scene_index);
        const auto vehicles = eligible_agent_ids(before.rendered, before.labels);
        if (vehicles.empty()) continue;

        // forced first edit, written directly into the token sequence
        TokenSequence seq1 = before.seq;
        int first_agent = -1;
        std::string first_category;
        if (first.kind == GroupKey::Kind::asset) {
            first_category = kCategoryAsset;
            first_agent = vehicles[rng.uniform_index(vehicles.size())];
            const AssetInfo* info = ctx.config.catalog.find_by_name(first.asset_name);
            if (!info) throw DataError("unknown asset in first-edit set: " + first.asset_name);
            const std::size_t base = asset_positions(agent_index_of(source, first_agent))[0];
            seq1.tokens[base] = ctx.schema->global_token(kClassFamily, info->family);
            seq1.tokens[base + 1] = ctx.schema->global_token(kClassModel, info->model);
        } else if (first.kind == GroupKey::Kind::rotation) {
            first_category = kCategoryRotation;
            first_agent = vehicles[rng.uniform_index(vehicles.size())];
            write_scalar_tokens(seq1, yaw_positions(agent_index_of(source, first_agent))[0],
                                first.rotation_bin_center(), true);
        } else if (first.kind == GroupKey::Kind::weather) {
            first_category = kCategoryWeather;
            int preset = -1;
            for (int p = 0; p < static_cast<int>(ctx.config.weather_presets.size()); ++p)
                if (ctx.config.weather_presets[p].name == first.weather_name) preset = p;
            if (preset < 0) throw DataError("unknown weather in first-edit set: " + first.weather_name);
            write_preset_tokens(seq1, preset);
        } else {
            throw ConfigError("location groups are not supported as two-step first edits");
        }

        const SceneGraph scene1 = decode_scene(seq1, source, ctx.config);

        // second edit: model-sampled, from a different category
        std::vector<std::string> second_choices;
        for (const char* c : {kCategoryAsset, kCategoryRotation, kCategoryWeather})
            if (first_category != c) second_choices.push_back(c);
        const std::string second = second_choices[rng.uniform_index(second_choices.size())];

        TwoStepRecord rec;
        rec.scene_id = source.id;
        rec.first_edit = first;
        rec.first_agent_id = first_agent;
        rec.second_category = second;

        TokenSequence seq2 = seq1;
        if (second == kCategoryWeather) {
            rec.second_agent_id = -1;
            rec.second_source = preset_name_of(ctx, scene1.weather);
            const int preset = sample_weather_preset(model, seq1, rng, true);
            write_preset_tokens(seq2, preset);
        } else {
            const int agent_id = vehicles[rng.uniform_index(vehicles.size())];
            const int agent_index = agent_index_of(source, agent_id);
            rec.second_agent_id = agent_id;
            if (second == kCategoryAsset) {
                const AssetRef src_asset = scene1.agents[agent_index].asset;
                rec.second_source = asset_value(ctx, src_asset);
                const auto positions = asset_positions(agent_index);
                const auto filter =
                    make_asset_filter(ctx, src_asset.family, src_asset.model, positions[0]);
                seq2 = mask_and_resample(model, seq1, positions, rng, false, filter);
            } else {
                rec.second_source = scene1.agents[agent_index].pose.yaw;
                const auto positions = yaw_positions(agent_index);
                const auto filter = make_rotation_filter(ctx, positions[0]);
                seq2 = mask_and_resample(model, seq1, positions, rng, false, filter);
            }
        }
        if (seq2.tokens == seq1.tokens) continue;  // no-op second edit

        const SceneGraph scene2 = decode_scene(seq2, source, ctx.config);
        if (second == kCategoryAsset) {
            rec.second_target =
                asset_value(ctx, scene2.agents[agent_index_of(source, rec.second_agent_id)].asset);
        } else if (second == kCategoryRotation) {
            rec.second_target = scene2.agents[agent_index_of(source, rec.second_agent_id)].pose.yaw;
        } else {
            rec.second_target = preset_name_of(ctx, scene2.weather);
        }

        rec.f0 = before.score_before;
        rec.f1 = pipeline_score(detector, ctx, scene1);
        rec.f2 = pipeline_score(detector, ctx, scene2);
        rec.delta10 = rec.f0 - rec.f1;
        rec.delta21 = rec.f1 - rec.f2;
        rec.delta20 = rec.f0 - rec.f2;
        out.push_back(std::move(rec));
    }
    return out;
}

namespace {

GroupKey two_step_second_group(const TwoStepRecord& r) {
    if (r.second_category == kCategoryAsset)
        return GroupKey::asset(r.second_target.get<std::string>());
    if (r.second_category == kCategoryRotation)
        return GroupKey::rotation_value(r.second_target.get<double>());
    return GroupKey::weather(r.second_target.get<std::string>());
}

}  // namespace

TwoStepSummary filter_two_step(const std::vector<TwoStepRecord>& records, int question,
                               double tau1, double tau2) {
    if (question < 1 || question > 3) throw ConfigError("unknown two-step question id");
    auto passes = [&](const TwoStepRecord& r) {
        switch (question) {
            case 1: return r.delta10 >= tau1 && r.delta21 >= tau2;
            case 2: return r.delta20 >= tau2;
            default: return r.delta21 >= 0.0 && r.delta10 >= tau1;
        }
    };

    std::map<std::pair<std::string, std::string>, TwoStepPairStat> pair_map;
    std::map<std::string, TwoStepPairStat> second_map;
    for (const auto& r : records) {
        const std::string first = r.first_edit.str();
        const std::string second = two_step_second_group(r).str();
        auto& p = pair_map[{first, second}];
        p.first = first;
        p.second = second;
        ++p.total;
        auto& s = second_map[second];
        s.second = second;
        ++s.total;
        if (passes(r)) {
            ++p.passes;
            ++s.passes;
        }
    }

    TwoStepSummary summary;
    auto finish = [](TwoStepPairStat& s) {
        s.percent = s.total > 0 ? 100.0 * s.passes / s.total : 0.0;
    };
    for (auto& [k, v] : pair_map) {
        finish(v);
        summary.pairs.push_back(v);
    }
    for (auto& [k, v] : second_map) {
        finish(v);
        summary.second_edits.push_back(v);
    }
    auto order = [](const TwoStepPairStat& a, const TwoStepPairStat& b) {
        if (a.percent != b.percent) return a.percent > b.percent;
        if (a.total != b.total) return a.total > b.total;
        return std::tie(a.first, a.second) < std::tie(b.first, b.second);
    };
    std::sort(summary.pairs.begin(), summary.pairs.end(), order);
    std::sort(summary.second_edits.begin(), summary.second_edits.end(), order);
    return summary;
}

using nlohmann::json;

void to_json(json& j, const InterventionRecord& r) {
    j = json{{"scene_id", r.scene_id},
             {"category", r.category},
             {"agent_id", r.agent_id},
             {"source", r.source_value},
             {"target", r.target_value},
             {"score_before", r.score_before},
             {"score_after", r.score_after},
             {"delta", r.delta},
             {"strategy", r.strategy}};
}

void from_json(const json& j, InterventionRecord& r) {
    j.at("scene_id").get_to(r.scene_id);
    j.at("category").get_to(r.category);
    j.at("agent_id").get_to(r.agent_id);
    r.source_value = j.at("source");
    r.target_value = j.at("target");
    j.at("score_before").get_to(r.score_before);
    j.at("score_after").get_to(r.score_after);
    j.at("delta").get_to(r.delta);
    j.at("strategy").get_to(r.strategy);
}

void to_json(json& j, const TwoStepRecord& r) {
    j = json{{"scene_id", r.scene_id},
             {"first_edit", r.first_edit},
             {"second_category", r.second_category},
             {"second_source", r.second_source},
             {"second_target", r.second_target},
             {"first_agent_id", r.first_agent_id},
             {"second_agent_id", r.second_agent_id},
             {"f0", r.f0},
             {"f1", r.f1},
             {"f2", r.f2},
             {"delta10", r.delta10},
             {"delta21", r.delta21},
             {"delta20", r.delta20}};
}

void from_json(const json& j, TwoStepRecord& r) {
    j.at("scene_id").get_to(r.scene_id);
    j.at("first_edit").get_to(r.first_edit);
    j.at("second_category").get_to(r.second_category);
    r.second_source = j.at("second_source");
    r.second_target = j.at("second_target");
    j.at("first_agent_id").get_to(r.first_agent_id);
    j.at("second_agent_id").get_to(r.second_agent_id);
    j.at("f0").get_to(r.f0);
    j.at("f1").get_to(r.f1);
    j.at("f2").get_to(r.f2);
    j.at("delta10").get_to(r.delta10);
    j.at("delta21").get_to(r.delta21);
    j.at("delta20").get_to(r.delta20);
}

}  // namespace cst
