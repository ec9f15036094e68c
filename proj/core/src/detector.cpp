#include "cst/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cst/io.hpp"
#include "cst/rng.hpp"

namespace cst {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int yaw_bin(double yaw_deg) {
    int bin = static_cast<int>(std::floor(yaw_deg / GroupKey::kRotationBinWidth));
    const int nbins = static_cast<int>(360.0 / GroupKey::kRotationBinWidth);
    return ((bin % nbins) + nbins) % nbins;
}

}  // namespace

long TrainingManifest::total_instances() const {
    long total = 0;
    for (const auto& [k, v] : counts) total += v;
    return total;
}

void TrainingManifest::add(const TrainingManifest& other) {
    for (const auto& [k, v] : other.counts) counts[k] += v;
    total_images += other.total_images;
}

double DetectorProfile::exposure_of(const std::string& asset_name) const {
    auto it = exposure.find(asset_name);
    return it == exposure.end() ? 0.0 : it->second;
}

double light_level(const WeatherState& weather, const DetectorConstants& k) {
    return weather.sun_altitude() / 90.0 - k.cloud_penalty * weather.cloudiness();
}

DetectorProfile fit(const TrainingManifest& manifest, const AssetCatalog& catalog,
                    const DetectorConstants& constants, std::vector<GroupKey> weak_groups) {
    if (constants.jitter < 0.0 || constants.lambda_fp < 0.0 || constants.c_min < 0.0)
        throw ConfigError("detector constants must be non-negative where required");

    DetectorProfile profile;
    profile.constants = constants;
    profile.weak_groups = std::move(weak_groups);

    for (const auto& entry : catalog.entries()) {
        if (!AssetCatalog::is_vehicle_family(entry.family)) continue;
        double e = 0.0;
        for (const auto& [key, count] : manifest.counts) {
            const AssetInfo* other = catalog.find_by_name(key.asset);
            double sim = constants.sim_any_vehicle;
            if (key.asset == entry.name)
                sim = constants.sim_same_asset;
            else if (other && other->family == entry.family)
                sim = constants.sim_same_family;
            e += sim * static_cast<double>(count);
        }
        profile.exposure[entry.name] = e * entry.detectability;
    }
    return profile;
}

namespace {

bool in_weak_group(const DetectorProfile& profile, const GeneratorConfig& cfg,
                   const SceneGraph& scene, const AgentNode& agent) {
    if (profile.weak_groups.empty()) return false;
    const int bin = yaw_bin(agent.pose.yaw);
    int weather_id = -2;
    for (const auto& g : profile.weak_groups) {
        switch (g.kind) {
            case GroupKey::Kind::asset: {
                const AssetInfo* info = cfg.catalog.find(agent.asset);
                if (info && info->name == g.asset_name) return true;
                break;
            }
            case GroupKey::Kind::rotation:
                if (bin == g.rotation_bin) return true;
                break;
            case GroupKey::Kind::weather: {
                if (weather_id == -2) weather_id = cfg.preset_index(scene.weather);
                if (weather_id >= 0 && cfg.weather_presets[weather_id].name == g.weather_name)
                    return true;
                break;
            }
            case GroupKey::Kind::location:
                break;  // location weaknesses are not modeled
        }
    }
    return false;
}

const AgentNode* find_agent(const SceneGraph& scene, int agent_id) {
    for (const auto& a : scene.agents)
        if (a.id == agent_id) return &a;
    return nullptr;
}

}  // namespace

double object_confidence(const DetectorProfile& profile, const GeneratorConfig& cfg,
                         const SceneGraph& scene, const AgentNode& agent, const LabeledBox& label,
                         const GeometryOptions& geo) {
    const DetectorConstants& k = profile.constants;
    const AssetInfo* info = cfg.catalog.find(agent.asset);
    double e = info ? profile.exposure_of(info->name) : 0.0;
    if (in_weak_group(profile, cfg, scene, agent)) e = 0.0;

    // size term uses the full-resolution box height
    const double h_px = label.box.height() / geo.buffer_scale;
    const double logit = k.b0 + k.b1 * k.capacity * std::log1p(e) +
                         k.b2 * std::min(1.0, h_px / 120.0) +
                         k.b3 * (1.0 - label.occluded_frac) +
                         k.b4 * light_level(scene.weather, k);
    return logistic(logit);
}

std::vector<Prediction> detect(const DetectorProfile& profile, const GeneratorConfig& cfg,
                               const SceneGraph& scene, const LabelSet& labels, std::uint64_t seed,
                               const GeometryOptions& geo) {
    const DetectorConstants& k = profile.constants;
    std::vector<Prediction> out;

    const double img_w = scene.camera.image_width * geo.buffer_scale;
    const double img_h = scene.camera.image_height * geo.buffer_scale;

    for (const auto& label : labels.boxes) {
        const AgentNode* agent = find_agent(scene, label.agent_id);
        if (!agent) throw DataError("label references unknown agent id");
        const double c = object_confidence(profile, cfg, scene, *agent, label, geo);
        if (c < k.c_min) continue;

        // jitter stream keyed by agent id, independent of the label set
        RandomStream rng(derive_seed(seed, 0xB0C5ULL, static_cast<std::uint64_t>(label.agent_id)));
        const double sx = k.jitter * (1.0 - c) * label.box.width();
        const double sy = k.jitter * (1.0 - c) * label.box.height();
        Box2D b = label.box;
        b.x_min += rng.normal() * sx;
        b.x_max += rng.normal() * sx;
        b.y_min += rng.normal() * sy;
        b.y_max += rng.normal() * sy;
        if (b.x_min > b.x_max) std::swap(b.x_min, b.x_max);
        if (b.y_min > b.y_max) std::swap(b.y_min, b.y_max);
        b.x_min = std::clamp(b.x_min, 0.0, img_w - 1.0);
        b.x_max = std::clamp(b.x_max, b.x_min + 1e-3, img_w);
        b.y_min = std::clamp(b.y_min, 0.0, img_h - 1.0);
        b.y_max = std::clamp(b.y_max, b.y_min + 1e-3, img_h);
        out.push_back(Prediction{b, c});
    }

    // false positives come from their own stream so the label set does not
    // shift them between a scene and its counterfactual
    RandomStream fp_rng(derive_seed(seed, 0xFA15EULL));
    const int n_fp = fp_rng.poisson(k.lambda_fp);
    for (int i = 0; i < n_fp; ++i) {
        const double w = fp_rng.uniform(30.0, 300.0) * geo.buffer_scale;
        const double h = fp_rng.uniform(30.0, 200.0) * geo.buffer_scale;
        const double cx = fp_rng.uniform(0.0, img_w);
        const double cy = fp_rng.uniform(0.0, img_h);
        Box2D b{std::max(0.0, cx - w / 2), std::max(0.0, cy - h / 2),
                std::min(img_w, cx + w / 2), std::min(img_h, cy + h / 2)};
        const double conf = fp_rng.uniform(k.fp_conf_min, k.fp_conf_max);
        if (!b.valid()) continue;
        out.push_back(Prediction{b, conf});
    }
    return out;
}

APResult ap_from_predictions(const std::vector<std::vector<Prediction>>& predictions,
                             const std::vector<LabelSet>& ground_truth, double iou_threshold) {
    if (predictions.size() != ground_truth.size())
        throw DataError("ap_from_predictions: image count mismatch");

    struct Pooled {
        double confidence;
        int image;
        int pred_index;
    };
    std::vector<Pooled> pooled;
    long total_gt = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        total_gt += static_cast<long>(ground_truth[i].boxes.size());
        for (int p = 0; p < static_cast<int>(predictions[i].size()); ++p)
            pooled.push_back(Pooled{predictions[i][p].confidence, static_cast<int>(i), p});
    }

    APResult result;
    if (total_gt == 0) {
        result.zero_gt_warning = true;
        return result;
    }

    std::stable_sort(pooled.begin(), pooled.end(), [](const Pooled& a, const Pooled& b) {
        return a.confidence > b.confidence;
    });

    std::vector<std::vector<bool>> claimed(ground_truth.size());
    for (std::size_t i = 0; i < ground_truth.size(); ++i)
        claimed[i].assign(ground_truth[i].boxes.size(), false);

    std::vector<double> precision, recall;
    long tp = 0, fp = 0;
    for (const auto& item : pooled) {
        const auto& gt = ground_truth[item.image].boxes;
        const Box2D& pb = predictions[item.image][item.pred_index].box;
        double best = 0.0;
        int best_g = -1;
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (claimed[item.image][g]) continue;
            const double v = iou(pb, gt[g].box);
            if (v > best) {
                best = v;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0 && best >= iou_threshold) {
            claimed[item.image][best_g] = true;
            ++tp;
        } else {
            ++fp;
        }
        precision.push_back(static_cast<double>(tp) / (tp + fp));
        recall.push_back(static_cast<double>(tp) / total_gt);
    }

    // 101-point interpolation: max precision at recall >= r
    double ap = 0.0;
    for (int r = 0; r <= 100; ++r) {
        const double level = r / 100.0;
        double best = 0.0;
        for (std::size_t i = 0; i < precision.size(); ++i)
            if (recall[i] >= level - 1e-12) best = std::max(best, precision[i]);
        ap += best;
    }
    result.ap = 100.0 * ap / 101.0;
    return result;
}

APResult evaluate_ap(const DetectorProfile& profile, const GeneratorConfig& cfg,
                     const std::vector<std::pair<SceneGraph, LabelSet>>& dataset,
                     double iou_threshold, std::uint64_t seed, const GeometryOptions& geo) {
    if (dataset.empty()) throw DataError("evaluate_ap: dataset is empty");

    std::vector<std::vector<Prediction>> preds(dataset.size());
    std::vector<LabelSet> gt(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        const auto& [scene, labels] = dataset[i];
        preds[i] = detect(profile, cfg, scene, labels, derive_seed(seed, 0xE7A1ULL, scene.id), geo);
        gt[i] = labels;
    }
    return ap_from_predictions(preds, gt, iou_threshold);
}

using nlohmann::json;

void to_json(json& j, const TrainingManifest& m) {
    json counts = json::array();
    for (const auto& [k, v] : m.counts)
        counts.push_back(json{{"asset", k.asset},
                              {"rotation_bin", k.rotation_bin},
                              {"weather_id", k.weather_id},
                              {"count", v}});
    j = json{{"counts", counts}, {"total_images", m.total_images}};
}

void from_json(const json& j, TrainingManifest& m) {
    m = TrainingManifest{};
    for (const auto& c : j.at("counts")) {
        ManifestKey k{c.at("asset").get<std::string>(), c.at("rotation_bin").get<int>(),
                      c.at("weather_id").get<int>()};
        m.counts[k] = c.at("count").get<long>();
    }
    j.at("total_images").get_to(m.total_images);
}

void to_json(json& j, const DetectorConstants& k) {
    j = json{{"b0", k.b0},
             {"b1", k.b1},
             {"b2", k.b2},
             {"b3", k.b3},
             {"b4", k.b4},
             {"c_min", k.c_min},
             {"jitter", k.jitter},
             {"lambda_fp", k.lambda_fp},
             {"capacity", k.capacity},
             {"sim_same_asset", k.sim_same_asset},
             {"sim_same_family", k.sim_same_family},
             {"sim_any_vehicle", k.sim_any_vehicle},
             {"cloud_penalty", k.cloud_penalty},
             {"fp_conf_min", k.fp_conf_min},
             {"fp_conf_max", k.fp_conf_max}};
}

void from_json(const json& j, DetectorConstants& k) {
    k = DetectorConstants{};
    j.at("b0").get_to(k.b0);
    j.at("b1").get_to(k.b1);
    j.at("b2").get_to(k.b2);
    j.at("b3").get_to(k.b3);
    j.at("b4").get_to(k.b4);
    j.at("c_min").get_to(k.c_min);
    j.at("jitter").get_to(k.jitter);
    j.at("lambda_fp").get_to(k.lambda_fp);
    j.at("capacity").get_to(k.capacity);
    j.at("sim_same_asset").get_to(k.sim_same_asset);
    j.at("sim_same_family").get_to(k.sim_same_family);
    j.at("sim_any_vehicle").get_to(k.sim_any_vehicle);
    j.at("cloud_penalty").get_to(k.cloud_penalty);
    j.at("fp_conf_min").get_to(k.fp_conf_min);
    j.at("fp_conf_max").get_to(k.fp_conf_max);
}

void to_json(json& j, const DetectorProfile& p) {
    j = json{{"constants", p.constants}, {"exposure", p.exposure}, {"weak_groups", p.weak_groups}};
}

void from_json(const json& j, DetectorProfile& p) {
    j.at("constants").get_to(p.constants);
    p.exposure = j.at("exposure").get<std::map<std::string, double>>();
    p.weak_groups = j.at("weak_groups").get<std::vector<GroupKey>>();
}

}  // namespace cst
