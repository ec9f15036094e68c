#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cst/codec.hpp"
#include "cst/density.hpp"
#include "cst/detector.hpp"
#include "cst/generator.hpp"
#include "cst/geometry.hpp"
#include "cst/groups.hpp"
#include "cst/scoring.hpp"
#include "json.hpp"

namespace cst {

inline constexpr const char* kCategoryAsset = "asset";
inline constexpr const char* kCategoryRotation = "rotation";
inline constexpr const char* kCategoryWeather = "weather";
inline constexpr const char* kCategoryLocation = "location";

struct InterventionRecord {
    std::int64_t scene_id = 0;
    std::string category;
    int agent_id = -1;  // -1 for weather edits
    nlohmann::json source_value;
    nlohmann::json target_value;
    double score_before = 0.0;
    double score_after = 0.0;
    double delta = 0.0;
    std::string strategy;  // "mlm" or "random"
};

struct CategoryWeights {
    double asset = 0.35;
    double rotation = 0.30;
    double weather = 0.25;
    double location = 0.10;
};

struct CampaignOptions {
    long n = 1000;
    double tau = 0.2;
    CategoryWeights weights;
    std::uint64_t seed = 1;
};

struct CampaignResult {
    std::vector<InterventionRecord> records;
    long skipped_no_agent = 0;
    long dropped_noop = 0;
};

// Everything a campaign needs besides scenes and the models.
struct PipelineContext {
    GeneratorConfig config;
    GeometryOptions geometry;
    std::shared_ptr<const TokenSchema> schema;

    static PipelineContext make(GeneratorConfig cfg, GeometryOptions geo = {});
};

// The canonical per-scene score: derive labels, detect with the scene-keyed
// stream, apply the per-example scoring rules. Campaigns, the cause-agnostic
// collector, and the CLI all score through this one path.
double pipeline_score(const DetectorProfile& detector, const PipelineContext& ctx,
                      const SceneGraph& scene);

// Single-step MLM campaign: per trial pick a scene (round-robin), a category
// by weight, an eligible non-ego vehicle when applicable, mask the category's
// token group, resample through the model, decode, relabel, score both
// scenes. Deterministic per seed.
CampaignResult run_campaign(const std::vector<SceneGraph>& scenes,
                            const MaskedSequenceModel& model, const DetectorProfile& detector,
                            const PipelineContext& ctx, const CampaignOptions& opts);

// Matched random baseline: same scene, agent, and category as each MLM
// record, with the new value drawn uniformly (catalog / [0,360) / presets /
// legal coordinate range).
CampaignResult run_random_campaign(const std::vector<InterventionRecord>& records,
                                   const std::vector<SceneGraph>& scenes,
                                   const DetectorProfile& detector, const PipelineContext& ctx,
                                   std::uint64_t seed);

struct GroupStats {
    GroupKey key;
    long total = 0;
    long events = 0;
    double percent = 0.0;
    int tier = 3;
};

struct AggregateOptions {
    long min_count = 20;
    bool include_location = false;
    bool count_self_per_side = false;  // source==target records count once when false
    double tier1_cut = 10.0;
    double tier2_cut = 5.0;
};

// Table-1 style aggregation: each record adds one occurrence to its source
// group and one to its target group; delta <= -tau credits the target,
// delta >= +tau credits the source. Sorted by percent descending.
std::vector<GroupStats> aggregate_groups(const std::vector<InterventionRecord>& records,
                                         double tau, const AggregateOptions& opts = {});

struct TwoStepRecord {
    std::int64_t scene_id = 0;
    GroupKey first_edit;
    std::string second_category;
    nlohmann::json second_source;
    nlohmann::json second_target;
    int first_agent_id = -1;
    int second_agent_id = -1;
    double f0 = 0.0, f1 = 0.0, f2 = 0.0;
    // drop conventions: delta10 = f0 - f1, delta21 = f1 - f2, delta20 = f0 - f2
    double delta10 = 0.0, delta21 = 0.0, delta20 = 0.0;
};

struct TwoStepOptions {
    long n = 500;
    double tau1 = 0.2;
    double tau2 = 0.2;
    std::uint64_t seed = 1;
};

// First edit forced uniformly from J; second edit model-sampled from a
// different category.
std::vector<TwoStepRecord> run_two_step(const std::vector<SceneGraph>& scenes,
                                        const MaskedSequenceModel& model,
                                        const DetectorProfile& detector,
                                        const PipelineContext& ctx,
                                        const std::vector<GroupKey>& first_edit_set,
                                        const TwoStepOptions& opts);

struct TwoStepPairStat {
    std::string first;
    std::string second;
    long total = 0;
    long passes = 0;
    double percent = 0.0;
};

struct TwoStepSummary {
    std::vector<TwoStepPairStat> pairs;         // keyed by (first, second)
    std::vector<TwoStepPairStat> second_edits;  // keyed by second edit only
};

// question 1: delta10 >= tau1 and delta21 >= tau2
// question 2: delta20 >= tau2
// question 3: delta21 >= 0 and delta10 >= tau1
TwoStepSummary filter_two_step(const std::vector<TwoStepRecord>& records, int question,
                               double tau1, double tau2);

// Applies a group value directly to a scene (used by the random baseline,
// forced two-step first edits, and curation).
SceneGraph apply_group_edit(const SceneGraph& scene, int agent_id, const GroupKey& group,
                            const PipelineContext& ctx);

// Group keys of a record's source/target values.
GroupKey record_source_group(const InterventionRecord& r);
GroupKey record_target_group(const InterventionRecord& r);

void to_json(nlohmann::json& j, const InterventionRecord& r);
void from_json(const nlohmann::json& j, InterventionRecord& r);
void to_json(nlohmann::json& j, const TwoStepRecord& r);
void from_json(const nlohmann::json& j, TwoStepRecord& r);

}  // namespace cst
