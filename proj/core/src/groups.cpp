#include "cst/groups.hpp"

#include <cmath>
#include <stdexcept>

namespace cst {

GroupKey GroupKey::asset(std::string name) {
    GroupKey g;
    g.kind = Kind::asset;
    g.asset_name = std::move(name);
    return g;
}

GroupKey GroupKey::rotation_value(double yaw_deg) {
    GroupKey g;
    g.kind = Kind::rotation;
    const int nbins = static_cast<int>(360.0 / kRotationBinWidth);
    int bin = static_cast<int>(std::floor(yaw_deg / kRotationBinWidth));
    g.rotation_bin = ((bin % nbins) + nbins) % nbins;
    return g;
}

GroupKey GroupKey::rotation_bin_index(int bin) {
    GroupKey g;
    g.kind = Kind::rotation;
    g.rotation_bin = bin;
    return g;
}

GroupKey GroupKey::weather(std::string preset_name) {
    GroupKey g;
    g.kind = Kind::weather;
    g.weather_name = std::move(preset_name);
    return g;
}

GroupKey GroupKey::location_value(double x, double y) {
    GroupKey g;
    g.kind = Kind::location;
    g.cell_x = static_cast<int>(std::floor(x / kLocationCellSize));
    g.cell_y = static_cast<int>(std::floor(y / kLocationCellSize));
    return g;
}

double GroupKey::rotation_bin_center() const {
    return rotation_bin * kRotationBinWidth + kRotationBinWidth / 2.0;
}

std::string GroupKey::str() const {
    switch (kind) {
        case Kind::asset:
            return "asset:" + asset_name;
        case Kind::rotation: {
            const int lo = rotation_bin * static_cast<int>(kRotationBinWidth);
            return "rot:[" + std::to_string(lo) + "-" +
                   std::to_string(lo + static_cast<int>(kRotationBinWidth)) + ")";
        }
        case Kind::weather:
            return "weather:" + weather_name;
        case Kind::location:
            return "loc:(" + std::to_string(cell_x) + "/" + std::to_string(cell_y) + ")";
    }
    throw std::logic_error("unknown group kind");
}

GroupKey GroupKey::parse(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw std::invalid_argument("bad group key: " + text);
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "asset") return asset(rest);
    if (kind == "weather") return weather(rest);
    if (kind == "rot") {
        // accepts "[170-180)" or a plain degree value like "175"
        if (!rest.empty() && rest.front() == '[') {
            const auto dash = rest.find('-', 1);
            if (dash == std::string::npos) throw std::invalid_argument("bad rotation group: " + text);
            return rotation_bin_index(std::stoi(rest.substr(1, dash - 1)) /
                                      static_cast<int>(kRotationBinWidth));
        }
        return rotation_value(std::stod(rest));
    }
    if (kind == "loc") {
        const auto sep = rest.find('/');
        if (rest.size() < 5 || rest.front() != '(' || sep == std::string::npos)
            throw std::invalid_argument("bad location group: " + text);
        GroupKey g;
        g.kind = Kind::location;
        g.cell_x = std::stoi(rest.substr(1, sep - 1));
        g.cell_y = std::stoi(rest.substr(sep + 1));
        return g;
    }
    throw std::invalid_argument("unknown group kind: " + text);
}

std::string to_string(GroupKey::Kind k) {
    switch (k) {
        case GroupKey::Kind::asset: return "asset";
        case GroupKey::Kind::rotation: return "rotation";
        case GroupKey::Kind::weather: return "weather";
        case GroupKey::Kind::location: return "location";
    }
    throw std::logic_error("unknown group kind");
}

void to_json(nlohmann::json& j, const GroupKey& g) { j = g.str(); }

void from_json(const nlohmann::json& j, GroupKey& g) { g = GroupKey::parse(j.get<std::string>()); }

}  // namespace cst
