#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "cst/detector.hpp"
#include "cst/engine.hpp"
#include "cst/groups.hpp"
#include "json.hpp"

namespace cst {

// Group-augmented dataset: per scene, n_v in {3..6} vehicles are selected
// by a seed derived only from (seed, scene id) — never from the group — so
// every group dataset modifies the same vehicles. Asset groups swap the
// selected vehicles' assets, rotation groups set their yaw to the bin
// center, weather groups swap the scene preset.
std::vector<SceneGraph> build_group_dataset(const std::vector<SceneGraph>& scenes,
                                            const GroupKey& group, std::uint64_t per_scene_seed,
                                            const PipelineContext& ctx);

// The vehicle ids build_group_dataset would modify for this scene.
std::vector<int> select_group_vehicles(const SceneGraph& scene, std::uint64_t per_scene_seed);

struct ScoredScene {
    SceneGraph scene;
    double score = 0.0;
};

struct AgnosticBucket {
    double threshold = 0.0;
    std::vector<SceneGraph> selected;
    long bucket_size = 0;   // scenes scoring <= threshold
    bool shortage = false;  // bucket smaller than per_bucket
};

// Cause-agnostic baseline: bucket scenes by score <= threshold, then sample
// per_bucket of them uniformly without replacement.
std::vector<AgnosticBucket> cause_agnostic_collect(const std::vector<ScoredScene>& pool,
                                                   const std::vector<double>& thresholds,
                                                   long per_bucket, std::uint64_t seed);

// Labeled-instance counts per (asset, yaw bin, weather preset) over the scenes.
TrainingManifest build_manifest(const std::vector<SceneGraph>& scenes, const PipelineContext& ctx);

struct DatasetManifestSpec {
    std::vector<SceneGraph> base;
    std::vector<std::pair<GroupKey, long>> additions;  // group dataset scene counts
    std::uint64_t seed = 0;
};

// Base scenes plus the first `count` scenes of each group dataset built from
// the source pool.
std::vector<SceneGraph> materialize_dataset(const DatasetManifestSpec& spec,
                                            const std::vector<SceneGraph>& group_source_pool,
                                            const PipelineContext& ctx);

}  // namespace cst
