#include "cst/scene.hpp"

#include <algorithm>
#include <stdexcept>

namespace cst {

const std::array<std::string, WeatherState::kAttrCount>& WeatherState::attr_names() {
    static const std::array<std::string, kAttrCount> names = {
        "cloudiness", "precipitation", "puddles",   "wind",        "sun_altitude",
        "fog_density", "fog_distance", "wetness",   "fog_falloff", "scatter"};
    return names;
}

std::string to_string(AgentKind k) {
    switch (k) {
        case AgentKind::ego: return "ego";
        case AgentKind::vehicle: return "vehicle";
        case AgentKind::pedestrian: return "pedestrian";
    }
    throw std::logic_error("unknown AgentKind");
}

AgentKind agent_kind_from_string(const std::string& s) {
    if (s == "ego") return AgentKind::ego;
    if (s == "vehicle") return AgentKind::vehicle;
    if (s == "pedestrian") return AgentKind::pedestrian;
    throw std::invalid_argument("unknown agent kind: " + s);
}

int SceneGraph::vehicle_count() const {
    return static_cast<int>(
        std::count_if(agents.begin(), agents.end(),
                      [](const AgentNode& a) { return a.kind == AgentKind::vehicle; }));
}

int SceneGraph::pedestrian_count() const {
    return static_cast<int>(
        std::count_if(agents.begin(), agents.end(),
                      [](const AgentNode& a) { return a.kind == AgentKind::pedestrian; }));
}

const std::array<std::string, AssetCatalog::kFamilyCount>& AssetCatalog::family_names() {
    static const std::array<std::string, kFamilyCount> names = {
        "bike", "motorcycle", "compact", "sedan", "heavy", "pedestrian"};
    return names;
}

void AssetCatalog::add(AssetInfo info) {
    if (info.family < 0 || info.family >= kFamilyCount)
        throw std::invalid_argument("asset family out of range: " + info.name);
    if (find_by_name(info.name)) throw std::invalid_argument("duplicate asset name: " + info.name);
    if (!(info.detectability > 0.0 && info.detectability <= 1.0))
        throw std::invalid_argument("detectability must be in (0,1]: " + info.name);
    for (double e : info.extent)
        if (!(e > 0.0)) throw std::invalid_argument("extents must be positive: " + info.name);
    info.model = models_in_family(info.family);
    entries_.push_back(std::move(info));
}

const AssetInfo* AssetCatalog::find(const AssetRef& ref) const {
    for (const auto& e : entries_)
        if (e.family == ref.family && e.model == ref.model) return &e;
    return nullptr;
}

const AssetInfo& AssetCatalog::at(const AssetRef& ref) const {
    const AssetInfo* e = find(ref);
    if (!e)
        throw std::out_of_range("unknown asset (family " + std::to_string(ref.family) +
                                ", model " + std::to_string(ref.model) + ")");
    return *e;
}

const AssetInfo* AssetCatalog::find_by_name(const std::string& name) const {
    for (const auto& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

int AssetCatalog::models_in_family(int family) const {
    int n = 0;
    for (const auto& e : entries_)
        if (e.family == family) ++n;
    return n;
}

int AssetCatalog::max_models_per_family() const {
    int best = 0;
    for (int f = 0; f < kFamilyCount; ++f) best = std::max(best, models_in_family(f));
    return best;
}

std::vector<const AssetInfo*> AssetCatalog::vehicle_entries() const {
    std::vector<const AssetInfo*> out;
    for (const auto& e : entries_)
        if (is_vehicle_family(e.family)) out.push_back(&e);
    return out;
}

std::vector<const AssetInfo*> AssetCatalog::family_entries(int family) const {
    std::vector<const AssetInfo*> out;
    for (const auto& e : entries_)
        if (e.family == family) out.push_back(&e);
    return out;
}

using nlohmann::json;

void to_json(json& j, const WeatherState& w) {
    j = json::object();
    for (int i = 0; i < WeatherState::kAttrCount; ++i) j[WeatherState::attr_names()[i]] = w.values[i];
}

void from_json(const json& j, WeatherState& w) {
    for (int i = 0; i < WeatherState::kAttrCount; ++i)
        j.at(WeatherState::attr_names()[i]).get_to(w.values[i]);
}

void to_json(json& j, const CameraModel& c) {
    j = json{{"width", c.image_width},
             {"height", c.image_height},
             {"focal", c.focal},
             {"cx", c.principal_x},
             {"cy", c.principal_y}};
}

void from_json(const json& j, CameraModel& c) {
    j.at("width").get_to(c.image_width);
    j.at("height").get_to(c.image_height);
    j.at("focal").get_to(c.focal);
    j.at("cx").get_to(c.principal_x);
    j.at("cy").get_to(c.principal_y);
}

void to_json(json& j, const Pose& p) {
    j = json{{"x", p.x}, {"y", p.y}, {"z", p.z}, {"roll", p.roll}, {"yaw", p.yaw}};
}

void from_json(const json& j, Pose& p) {
    j.at("x").get_to(p.x);
    j.at("y").get_to(p.y);
    j.at("z").get_to(p.z);
    j.at("roll").get_to(p.roll);
    j.at("yaw").get_to(p.yaw);
}

void to_json(json& j, const AgentNode& a) {
    j = json{{"id", a.id},
             {"kind", to_string(a.kind)},
             {"family", a.asset.family},
             {"model", a.asset.model},
             {"pose", a.pose},
             {"extent", a.extent}};
}

void from_json(const json& j, AgentNode& a) {
    j.at("id").get_to(a.id);
    a.kind = agent_kind_from_string(j.at("kind").get<std::string>());
    j.at("family").get_to(a.asset.family);
    j.at("model").get_to(a.asset.model);
    j.at("pose").get_to(a.pose);
    j.at("extent").get_to(a.extent);
}

void to_json(json& j, const SceneGraph& s) {
    j = json{{"id", s.id},       {"map", s.map_id}, {"seed", s.seed},
             {"weather", s.weather}, {"camera", s.camera}, {"ego", s.ego},
             {"agents", s.agents}};
}

void from_json(const json& j, SceneGraph& s) {
    j.at("id").get_to(s.id);
    j.at("map").get_to(s.map_id);
    j.at("seed").get_to(s.seed);
    j.at("weather").get_to(s.weather);
    j.at("camera").get_to(s.camera);
    j.at("ego").get_to(s.ego);
    j.at("agents").get_to(s.agents);
}

void to_json(json& j, const AssetInfo& a) {
    j = json{{"name", a.name},     {"family", a.family},
             {"model", a.model},   {"extent", a.extent},
             {"detectability", a.detectability}, {"weight", a.weight}};
}

void from_json(const json& j, AssetInfo& a) {
    j.at("name").get_to(a.name);
    j.at("family").get_to(a.family);
    j.at("model").get_to(a.model);
    j.at("extent").get_to(a.extent);
    j.at("detectability").get_to(a.detectability);
    j.at("weight").get_to(a.weight);
}

void to_json(json& j, const AssetCatalog& c) { j = json{{"entries", c.entries()}}; }

void from_json(const json& j, AssetCatalog& c) {
    c = AssetCatalog{};
    for (const auto& e : j.at("entries")) {
        AssetInfo info = e.get<AssetInfo>();
        c.add(std::move(info));
    }
}

}  // namespace cst
