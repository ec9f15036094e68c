#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cst/generator.hpp"
#include "cst/geometry.hpp"
#include "cst/groups.hpp"
#include "cst/scoring.hpp"
#include "json.hpp"

namespace cst {

// One labeled-instance bucket: the instance's asset, its yaw bin, and the
// scene's weather preset.
struct ManifestKey {
    std::string asset;
    int rotation_bin = 0;
    int weather_id = 0;

    auto operator<=>(const ManifestKey&) const = default;
};

struct TrainingManifest {
    std::map<ManifestKey, long> counts;
    long total_images = 0;

    long total_instances() const;
    void add(const TrainingManifest& other);
};

struct DetectorConstants {
    double b0 = -2.0;   // intercept
    double b1 = 0.35;   // exposure weight
    double b2 = 1.2;    // size weight
    double b3 = 1.5;    // visibility weight
    double b4 = 0.8;    // light weight
    double c_min = 0.3;       // miss threshold
    double jitter = 0.25;     // box noise scale
    double lambda_fp = 0.3;   // false positives per image
    double capacity = 1.0;    // multiplier on b1
    double sim_same_asset = 1.0;
    double sim_same_family = 0.5;
    double sim_any_vehicle = 0.05;
    double cloud_penalty = 0.5;  // light() = sun_altitude/90 - cloud_penalty * cloudiness
    double fp_conf_min = 0.05;
    double fp_conf_max = 0.5;
};

// Forcing a group's exposure to zero regardless of the manifest lets tests
// plant known weaknesses and check the discovery pipeline recovers them.
struct DetectorProfile {
    DetectorConstants constants;
    std::map<std::string, double> exposure;  // per catalog asset name
    std::vector<GroupKey> weak_groups;

    double exposure_of(const std::string& asset_name) const;
};

double light_level(const WeatherState& weather, const DetectorConstants& k);

DetectorProfile fit(const TrainingManifest& manifest, const AssetCatalog& catalog,
                    const DetectorConstants& constants = {},
                    std::vector<GroupKey> weak_groups = {});

// Confidence of one labeled object under the profile (before the c_min cut).
double object_confidence(const DetectorProfile& profile, const GeneratorConfig& config,
                         const SceneGraph& scene, const AgentNode& agent,
                         const LabeledBox& label, const GeometryOptions& geo = {});

// Synthetic detections: per label, a jittered box with the logistic
// confidence when it clears c_min, plus Poisson(lambda_fp) false positives.
// Deterministic given (profile, scene, seed); per-object jitter streams are
// keyed by agent id so an edit to one agent leaves the others' boxes alone.
std::vector<Prediction> detect(const DetectorProfile& profile, const GeneratorConfig& config,
                               const SceneGraph& scene, const LabelSet& labels,
                               std::uint64_t seed, const GeometryOptions& geo = {});

struct APResult {
    double ap = 0.0;  // [0, 100]
    bool zero_gt_warning = false;
};

// 101-point interpolated AP: pooled predictions sorted by confidence,
// greedy-matched per image against unclaimed ground truth at the IOU cut.
APResult ap_from_predictions(const std::vector<std::vector<Prediction>>& predictions,
                             const std::vector<LabelSet>& ground_truth, double iou_threshold);

// Runs detect over the dataset and scores the pooled result.
APResult evaluate_ap(const DetectorProfile& profile, const GeneratorConfig& config,
                     const std::vector<std::pair<SceneGraph, LabelSet>>& dataset,
                     double iou_threshold = 0.5, std::uint64_t seed = 0,
                     const GeometryOptions& geo = {});

void to_json(nlohmann::json& j, const TrainingManifest& m);
void from_json(const nlohmann::json& j, TrainingManifest& m);
void to_json(nlohmann::json& j, const DetectorConstants& k);
void from_json(const nlohmann::json& j, DetectorConstants& k);
void to_json(nlohmann::json& j, const DetectorProfile& p);
void from_json(const nlohmann::json& j, DetectorProfile& p);

}  // namespace cst
