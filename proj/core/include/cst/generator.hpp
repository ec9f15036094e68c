#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cst/scene.hpp"
#include "json.hpp"

namespace cst {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Waypoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool sidewalk = false;  // sidewalk waypoints host pedestrians, road ones vehicles
};

struct MapSpec {
    std::string name;
    double weight = 1.0;
    std::vector<Waypoint> waypoints;

    std::vector<int> road_indices() const;
    std::vector<int> sidewalk_indices() const;
};

struct WeatherPreset {
    std::string name;
    WeatherState state;
    double weight = 1.0;
};

// Mixture of wrapped normals over [0, 360) degrees.
struct RotationMixture {
    struct Mode {
        double mean_deg = 0.0;
        double sigma_deg = 25.0;
        double weight = 1.0;
    };
    std::vector<Mode> modes;

    double sample(class RandomStream& rng) const;
    double log_pdf(double yaw_deg) const;  // density per degree
};

struct VehicleCountModel {
    double mean = 8.0;  // Poisson mean, truncated to [min_count, max_count]
    int min_count = 1;
    int max_count = 20;

    int sample(class RandomStream& rng) const;
    double log_pmf(int v) const;
};

struct CameraChoice {
    CameraModel camera;
    double weight = 1.0;
};

struct GeneratorConfig {
    std::vector<MapSpec> maps;
    std::vector<WeatherPreset> weather_presets;
    std::vector<CameraChoice> cameras;
    AssetCatalog catalog;
    VehicleCountModel vehicle_count;
    RotationMixture rotation;
    int pedestrian_count = 20;
    double min_coord = -300.0;        // codec offset origin; span is [min_coord, min_coord+600)
    double ride_height_vehicle = 0.5;  // pose z above the waypoint, per kind
    double ride_height_pedestrian = 0.9;
    double camera_height = 1.6;       // camera center above the ego pose
    AssetRef ego_asset{3, 0};          // fixed for every scene

    const MapSpec& map(const std::string& id) const;
    int preset_index(const WeatherState& w, double tol = 1e-9) const;
    int camera_index(const CameraModel& c, double tol = 1e-9) const;
    void validate() const;
};

// Built-in desk-scale configuration: two maps, 15 weather presets, 6
// camera calibrations, 23 vehicle assets plus pedestrian models.
GeneratorConfig default_generator_config();

// Pure function of (config, seed): identical inputs give identical scenes.
SceneGraph sample_scene(const GeneratorConfig& config, std::uint64_t seed);

// Log density of a scene under the generator's factorized sampling.
// Returns -infinity for scenes outside the generator's support.
double scene_distribution_log_prob(const GeneratorConfig& config, const SceneGraph& scene);

void to_json(nlohmann::json& j, const GeneratorConfig& c);
void from_json(const nlohmann::json& j, GeneratorConfig& c);
void to_json(nlohmann::json& j, const Waypoint& w);
void from_json(const nlohmann::json& j, Waypoint& w);

}  // namespace cst
