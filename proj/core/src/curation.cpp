#include "cst/curation.hpp"

#include <algorithm>
#include <cmath>

#include "cst/io.hpp"
#include "cst/rng.hpp"

namespace cst {

namespace {

constexpr std::uint64_t kSelectStream = 0x5E1EC7ULL;

int yaw_bin_of(double yaw) {
    const int nbins = static_cast<int>(360.0 / GroupKey::kRotationBinWidth);
    int bin = static_cast<int>(std::floor(yaw / GroupKey::kRotationBinWidth));
    return ((bin % nbins) + nbins) % nbins;
}

}  // namespace

std::vector<int> select_group_vehicles(const SceneGraph& scene, std::uint64_t per_scene_seed) {
    // depends only on (seed, scene id): identical across group datasets
    RandomStream rng(derive_seed(per_scene_seed, kSelectStream,
                                 static_cast<std::uint64_t>(scene.id)));
    const int n_v = rng.uniform_int(3, 6);

    std::vector<int> vehicles;
    for (const auto& a : scene.agents)
        if (a.kind == AgentKind::vehicle) vehicles.push_back(a.id);

    // partial Fisher-Yates; scenes with fewer than n_v vehicles use them all
    const int take = std::min<int>(n_v, static_cast<int>(vehicles.size()));
    for (int i = 0; i < take; ++i) {
        const int j = i + static_cast<int>(rng.uniform_index(vehicles.size() - i));
        std::swap(vehicles[i], vehicles[j]);
    }
    vehicles.resize(take);
    std::sort(vehicles.begin(), vehicles.end());
    return vehicles;
}

std::vector<SceneGraph> build_group_dataset(const std::vector<SceneGraph>& scenes,
                                            const GroupKey& group, std::uint64_t per_scene_seed,
                                            const PipelineContext& ctx) {
    if (group.kind == GroupKey::Kind::asset && !ctx.config.catalog.find_by_name(group.asset_name))
        throw DataError("unknown group: " + group.str());
    if (group.kind == GroupKey::Kind::weather) {
        bool known = false;
        for (const auto& p : ctx.config.weather_presets) known |= (p.name == group.weather_name);
        if (!known) throw DataError("unknown group: " + group.str());
    }

    std::vector<SceneGraph> out;
    out.reserve(scenes.size());
    for (const auto& scene : scenes) {
        SceneGraph modified = scene;
        if (group.kind == GroupKey::Kind::weather) {
            modified = apply_group_edit(scene, -1, group, ctx);
        } else {
            for (int vid : select_group_vehicles(scene, per_scene_seed))
                modified = apply_group_edit(modified, vid, group, ctx);
        }
        // fresh id so group datasets never collide with their sources
        modified.id = static_cast<std::int64_t>(
            derive_seed(static_cast<std::uint64_t>(scene.id), fnv1a64(group.str())) >> 1);
        out.push_back(std::move(modified));
    }
    return out;
}

std::vector<AgnosticBucket> cause_agnostic_collect(const std::vector<ScoredScene>& pool,
                                                   const std::vector<double>& thresholds,
                                                   long per_bucket, std::uint64_t seed) {
    if (pool.empty()) throw DataError("cause-agnostic collection: empty pool");

    std::vector<AgnosticBucket> out;
    for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
        AgnosticBucket bucket;
        bucket.threshold = thresholds[ti];
        std::vector<const ScoredScene*> members;
        for (const auto& s : pool)
            if (s.score <= bucket.threshold) members.push_back(&s);
        bucket.bucket_size = static_cast<long>(members.size());

        RandomStream rng(derive_seed(seed, 0xA67ULL, static_cast<std::uint64_t>(ti)));
        const long take = std::min<long>(per_bucket, bucket.bucket_size);
        bucket.shortage = bucket.bucket_size < per_bucket;
        for (long i = 0; i < take; ++i) {
            const auto j =
                static_cast<std::size_t>(i) + rng.uniform_index(members.size() - i);
            std::swap(members[i], members[j]);
        }
        for (long i = 0; i < take; ++i) bucket.selected.push_back(members[i]->scene);
        out.push_back(std::move(bucket));
    }
    return out;
}

TrainingManifest build_manifest(const std::vector<SceneGraph>& scenes,
                                const PipelineContext& ctx) {
    TrainingManifest manifest;
    for (const auto& scene : scenes) {
        const LabelSet labels = derive_labels(scene, ctx.geometry);
        const int weather_id = ctx.config.preset_index(scene.weather);
        for (const auto& box : labels.boxes) {
            const AgentNode* agent = nullptr;
            for (const auto& a : scene.agents)
                if (a.id == box.agent_id) agent = &a;
            if (!agent) continue;
            const AssetInfo* info = ctx.config.catalog.find(agent->asset);
            if (!info) continue;
            ManifestKey key{info->name, yaw_bin_of(agent->pose.yaw), weather_id};
            ++manifest.counts[key];
        }
        ++manifest.total_images;
    }
    return manifest;
}

std::vector<SceneGraph> materialize_dataset(const DatasetManifestSpec& spec,
                                            const std::vector<SceneGraph>& group_source_pool,
                                            const PipelineContext& ctx) {
    std::vector<SceneGraph> out = spec.base;
    for (const auto& [group, count] : spec.additions) {
        if (count < 0) throw DataError("negative addition count for " + group.str());
        if (count > static_cast<long>(group_source_pool.size()))
            throw DataError("group source pool smaller than requested addition for " + group.str());
        const std::vector<SceneGraph> pool_slice(group_source_pool.begin(),
                                                 group_source_pool.begin() + count);
        auto group_scenes = build_group_dataset(pool_slice, group, spec.seed, ctx);
        out.insert(out.end(), group_scenes.begin(), group_scenes.end());
    }
    return out;
}

}  // namespace cst
