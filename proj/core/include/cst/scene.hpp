#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace cst {

// 10 scalar weather attributes. Index 4 (sun_altitude) is in degrees
// [-90, 90]; every other attribute is a fraction in [0, 1].
struct WeatherState {
    static constexpr int kAttrCount = 10;
    static constexpr int kSunAltitudeIndex = 4;

    std::array<double, kAttrCount> values{};

    static const std::array<std::string, kAttrCount>& attr_names();

    double cloudiness() const { return values[0]; }
    double precipitation() const { return values[1]; }
    double puddles() const { return values[2]; }
    double wind() const { return values[3]; }
    double sun_altitude() const { return values[4]; }

    bool operator==(const WeatherState& o) const { return values == o.values; }
};

struct CameraModel {
    int image_width = 0;
    int image_height = 0;
    double focal = 0.0;
    double principal_x = 0.0;
    double principal_y = 0.0;

    std::array<double, 5> as_array() const {
        return {static_cast<double>(image_width), static_cast<double>(image_height),
                focal, principal_x, principal_y};
    }
    bool operator==(const CameraModel& o) const = default;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double roll = 0.0;  // degrees, [0, 360)
    double yaw = 0.0;   // degrees, [0, 360)

    bool operator==(const Pose& o) const = default;
};

enum class AgentKind { ego, vehicle, pedestrian };

std::string to_string(AgentKind k);
AgentKind agent_kind_from_string(const std::string& s);

// Two-part asset identifier: class family + model index within the family.
struct AssetRef {
    int family = 0;
    int model = 0;
    bool operator==(const AssetRef& o) const = default;
    auto operator<=>(const AssetRef& o) const = default;
};

struct AgentNode {
    int id = 0;
    AgentKind kind = AgentKind::vehicle;
    AssetRef asset;
    Pose pose;
    std::array<double, 3> extent{};  // half-dimensions, meters

    bool operator==(const AgentNode& o) const = default;
};

struct SceneGraph {
    std::int64_t id = 0;
    std::string map_id;  // "TownA" or "TownB"
    std::uint64_t seed = 0;
    WeatherState weather;
    CameraModel camera;
    AgentNode ego;
    std::vector<AgentNode> agents;  // non-ego agents, stable order

    bool operator==(const SceneGraph& o) const = default;

    int vehicle_count() const;
    int pedestrian_count() const;
};

// Asset catalog: families are fixed; entries carry extents, a base
// detectability constant in (0, 1], and a generator sampling weight.
struct AssetInfo {
    std::string name;
    int family = 0;
    int model = 0;
    std::array<double, 3> extent{};
    double detectability = 1.0;
    double weight = 1.0;
};

class AssetCatalog {
public:
    static constexpr int kFamilyCount = 6;
    // Families 0..4 are vehicles; family 5 is pedestrians (occluders only).
    static const std::array<std::string, kFamilyCount>& family_names();
    static constexpr int kPedestrianFamily = 5;

    void add(AssetInfo info);

    const AssetInfo& at(const AssetRef& ref) const;
    const AssetInfo* find(const AssetRef& ref) const;       // nullptr if absent
    const AssetInfo* find_by_name(const std::string&) const;

    int models_in_family(int family) const;
    int max_models_per_family() const;
    const std::vector<AssetInfo>& entries() const { return entries_; }
    std::vector<const AssetInfo*> vehicle_entries() const;
    std::vector<const AssetInfo*> family_entries(int family) const;

    static bool is_vehicle_family(int family) { return family >= 0 && family < kPedestrianFamily; }

private:
    std::vector<AssetInfo> entries_;
};

void to_json(nlohmann::json& j, const WeatherState& w);
void from_json(const nlohmann::json& j, WeatherState& w);
void to_json(nlohmann::json& j, const CameraModel& c);
void from_json(const nlohmann::json& j, CameraModel& c);
void to_json(nlohmann::json& j, const Pose& p);
void from_json(const nlohmann::json& j, Pose& p);
void to_json(nlohmann::json& j, const AgentNode& a);
void from_json(const nlohmann::json& j, AgentNode& a);
void to_json(nlohmann::json& j, const SceneGraph& s);
void from_json(const nlohmann::json& j, SceneGraph& s);
void to_json(nlohmann::json& j, const AssetInfo& a);
void from_json(const nlohmann::json& j, AssetInfo& a);
void to_json(nlohmann::json& j, const AssetCatalog& c);
void from_json(const nlohmann::json& j, AssetCatalog& c);

}  // namespace cst
