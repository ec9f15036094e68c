#pragma once

#include <compare>
#include <string>

#include "json.hpp"

namespace cst {

// An intervention group: a specific asset, a 10-degree yaw bin, a weather
// preset, or (optionally) a coarse location cell.
struct GroupKey {
    enum class Kind { asset, rotation, weather, location };

    Kind kind = Kind::asset;
    std::string asset_name;  // kind == asset
    int rotation_bin = 0;    // kind == rotation: yaw in [10*bin, 10*bin + 10)
    std::string weather_name;  // kind == weather
    int cell_x = 0, cell_y = 0;  // kind == location: 50 m cells

    static constexpr double kRotationBinWidth = 10.0;
    static constexpr double kLocationCellSize = 50.0;

    static GroupKey asset(std::string name);
    static GroupKey rotation_value(double yaw_deg);
    static GroupKey rotation_bin_index(int bin);
    static GroupKey weather(std::string preset_name);
    static GroupKey location_value(double x, double y);

    // canonical text form, e.g. "asset:bike.diamondback", "rot:[170-180)"
    std::string str() const;
    static GroupKey parse(const std::string& text);

    double rotation_bin_center() const;

    auto operator<=>(const GroupKey&) const = default;
    bool operator==(const GroupKey&) const = default;
};

std::string to_string(GroupKey::Kind k);

void to_json(nlohmann::json& j, const GroupKey& g);
void from_json(const nlohmann::json& j, GroupKey& g);

}  // namespace cst
