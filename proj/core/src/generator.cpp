#include "cst/generator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <tuple>
#include <unordered_map>

#include "cst/rng.hpp"

namespace cst {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_factorial(int n) {
    double s = 0.0;
    for (int i = 2; i <= n; ++i) s += std::log(static_cast<double>(i));
    return s;
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

}  // namespace

std::vector<int> MapSpec::road_indices() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(waypoints.size()); ++i)
        if (!waypoints[i].sidewalk) out.push_back(i);
    return out;
}

std::vector<int> MapSpec::sidewalk_indices() const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(waypoints.size()); ++i)
        if (waypoints[i].sidewalk) out.push_back(i);
    return out;
}

double RotationMixture::sample(RandomStream& rng) const {
    std::vector<double> w;
    w.reserve(modes.size());
    for (const auto& m : modes) w.push_back(m.weight);
    const auto& mode = modes[rng.categorical(w)];
    double yaw = std::fmod(rng.normal(mode.mean_deg, mode.sigma_deg), 360.0);
    if (yaw < 0.0) yaw += 360.0;
    return yaw;
}

double RotationMixture::log_pdf(double yaw_deg) const {
    double total_w = 0.0;
    for (const auto& m : modes) total_w += m.weight;
    double p = 0.0;
    for (const auto& m : modes) {
        // wrap over a few periods; sigma << 360 so this converges immediately
        for (int k = -2; k <= 2; ++k) {
            const double d = (yaw_deg - m.mean_deg + 360.0 * k) / m.sigma_deg;
            p += (m.weight / total_w) * normal_pdf(d) / m.sigma_deg;
        }
    }
    return p > 0.0 ? std::log(p) : kNegInf;
}

int VehicleCountModel::sample(RandomStream& rng) const {
    for (;;) {
        const int v = rng.poisson(mean);
        if (v >= min_count && v <= max_count) return v;
    }
}

double VehicleCountModel::log_pmf(int v) const {
    if (v < min_count || v > max_count) return kNegInf;
    auto raw = [&](int k) { return k * std::log(mean) - mean - log_factorial(k); };
    double norm = 0.0;
    for (int k = min_count; k <= max_count; ++k) norm += std::exp(raw(k));
    return raw(v) - std::log(norm);
}

const MapSpec& GeneratorConfig::map(const std::string& id) const {
    for (const auto& m : maps)
        if (m.name == id) return m;
    throw ConfigError("unknown map id: " + id);
}

int GeneratorConfig::preset_index(const WeatherState& w, double tol) const {
    for (int i = 0; i < static_cast<int>(weather_presets.size()); ++i) {
        bool match = true;
        for (int a = 0; a < WeatherState::kAttrCount; ++a) {
            if (std::abs(weather_presets[i].state.values[a] - w.values[a]) > tol) {
                match = false;
                break;
            }
        }
        if (match) return i;
    }
    return -1;
}

int GeneratorConfig::camera_index(const CameraModel& c, double tol) const {
    for (int i = 0; i < static_cast<int>(cameras.size()); ++i) {
        const CameraModel& k = cameras[i].camera;
        if (k.image_width == c.image_width && k.image_height == c.image_height &&
            std::abs(k.focal - c.focal) <= tol && std::abs(k.principal_x - c.principal_x) <= tol &&
            std::abs(k.principal_y - c.principal_y) <= tol)
            return i;
    }
    return -1;
}

void GeneratorConfig::validate() const {
    if (maps.empty()) throw ConfigError("generator config has no maps");
    for (const auto& m : maps) {
        if (m.waypoints.empty()) throw ConfigError("map has empty waypoint set: " + m.name);
        if (m.road_indices().empty()) throw ConfigError("map has no road waypoints: " + m.name);
        if (m.sidewalk_indices().empty() && pedestrian_count > 0)
            throw ConfigError("map has no sidewalk waypoints: " + m.name);
    }
    if (weather_presets.empty()) throw ConfigError("weather preset list is empty");
    if (cameras.empty()) throw ConfigError("camera calibration set is empty");
    if (catalog.entries().empty()) throw ConfigError("asset catalog is empty");
    for (int f = 0; f < AssetCatalog::kFamilyCount; ++f)
        if (catalog.models_in_family(f) == 0)
            throw ConfigError("asset family is empty: " + AssetCatalog::family_names()[f]);
    if (rotation.modes.empty()) throw ConfigError("rotation mixture has no modes");
    if (!catalog.find(ego_asset)) throw ConfigError("ego asset not in catalog");
}

namespace {

// Waypoint coordinates are built in decimeters so every coordinate sits on
// the codec's 0.1 m grid exactly.
Waypoint wp(int x_dm, int y_dm, bool sidewalk) {
    return Waypoint{x_dm / 10.0, y_dm / 10.0, 0.0, sidewalk};
}

void add_grid_streets(MapSpec& m, const std::vector<int>& lines_dm, int lo_dm, int hi_dm,
                      int step_dm, int sidewalk_offset_dm) {
    std::set<std::tuple<int, int, bool>> seen;
    auto push = [&](int x_dm, int y_dm, bool sidewalk) {
        if (seen.emplace(x_dm, y_dm, sidewalk).second) m.waypoints.push_back(wp(x_dm, y_dm, sidewalk));
    };
    for (int line : lines_dm) {
        for (int t = lo_dm; t <= hi_dm; t += step_dm) {
            push(line, t, false);
            push(t, line, false);
            push(line + sidewalk_offset_dm, t, true);
            push(line - sidewalk_offset_dm, t, true);
            push(t, line + sidewalk_offset_dm, true);
            push(t, line - sidewalk_offset_dm, true);
        }
    }
}

WeatherPreset preset(const std::string& name, std::array<double, 10> v, double weight) {
    WeatherPreset p;
    p.name = name;
    p.state.values = v;
    p.weight = weight;
    return p;
}

}  // namespace

GeneratorConfig default_generator_config() {
    GeneratorConfig cfg;

    // Compact downtown grids: the 30 px height filter caps the usable range
    // near 55 m, so streets must sit inside the camera corridor for scenes
    // to carry labeled vehicles.
    MapSpec town_a;
    town_a.name = "TownA";
    town_a.weight = 0.5;
    add_grid_streets(town_a, {-400, 0, 400}, -500, 500, 40, 50);
    cfg.maps.push_back(std::move(town_a));

    MapSpec town_b;
    town_b.name = "TownB";
    town_b.weight = 0.5;
    add_grid_streets(town_b, {-450, -150, 150, 450}, -550, 550, 50, 60);
    cfg.maps.push_back(std::move(town_b));

    // attrs: cloudiness, precipitation, puddles, wind, sun_altitude,
    //        fog_density, fog_distance, wetness, fog_falloff, scatter
    cfg.weather_presets = {
        preset("clear_noon",          {0.05, 0.00, 0.00, 0.10, 75.0, 0.00, 0.00, 0.00, 0.00, 0.20}, 0.24),
        preset("clear_sunset",        {0.10, 0.00, 0.00, 0.20, 15.0, 0.00, 0.00, 0.00, 0.00, 0.30}, 0.15),
        preset("cloudy_noon",         {0.60, 0.00, 0.00, 0.30, 65.0, 0.05, 0.10, 0.00, 0.10, 0.40}, 0.12),
        preset("cloudy_sunset",       {0.65, 0.00, 0.00, 0.30, 12.0, 0.05, 0.10, 0.00, 0.10, 0.40}, 0.09),
        preset("cloudy_dark",         {0.90, 0.00, 0.00, 0.40, -20.0, 0.10, 0.20, 0.00, 0.20, 0.50}, 0.075),
        preset("cloudy_dark_puddles", {0.90, 0.10, 0.70, 0.40, -20.0, 0.10, 0.20, 0.50, 0.20, 0.50}, 0.045),
        preset("sunny_puddles",       {0.15, 0.00, 0.60, 0.20, 70.0, 0.00, 0.00, 0.40, 0.00, 0.20}, 0.06),
        preset("rain_noon",           {0.80, 0.60, 0.50, 0.50, 60.0, 0.10, 0.30, 0.80, 0.20, 0.60}, 0.055),
        preset("rain_sunset",         {0.85, 0.70, 0.60, 0.50, 10.0, 0.10, 0.30, 0.80, 0.20, 0.60}, 0.035),
        preset("wet_noon",            {0.30, 0.05, 0.30, 0.20, 68.0, 0.00, 0.00, 0.60, 0.00, 0.30}, 0.05),
        preset("wet_cloudy_noon",     {0.70, 0.05, 0.40, 0.30, 55.0, 0.05, 0.10, 0.60, 0.10, 0.40}, 0.04),
        preset("fog_noon",            {0.40, 0.00, 0.00, 0.10, 62.0, 0.60, 0.70, 0.10, 0.50, 0.70}, 0.025),
        preset("fog_dark",            {0.70, 0.00, 0.00, 0.10, -15.0, 0.70, 0.80, 0.10, 0.60, 0.70}, 0.02),
        preset("windy_noon",          {0.25, 0.00, 0.00, 0.90, 66.0, 0.00, 0.00, 0.00, 0.00, 0.30}, 0.025),
        preset("clear_dawn",          {0.10, 0.00, 0.00, 0.10, 5.0,  0.05, 0.10, 0.05, 0.10, 0.30}, 0.01),
    };

    auto cam = [](double f, double cx, double cy, double w) {
        CameraChoice c;
        c.camera = CameraModel{1600, 900, f, cx, cy};
        c.weight = w;
        return c;
    };
    cfg.cameras = {cam(1250.0, 800.0, 450.0, 0.30), cam(1250.0, 804.0, 446.0, 0.15),
                   cam(1150.0, 800.0, 450.0, 0.20), cam(1150.0, 796.0, 454.0, 0.15),
                   cam(1000.0, 800.0, 450.0, 0.12), cam(800.0, 800.0, 450.0, 0.08)};

    AssetCatalog cat;
    auto add_asset = [&](const std::string& name, int family, double ex, double ey, double ez,
                         double weight) {
        AssetInfo a;
        a.name = name;
        a.family = family;
        a.extent = {ex, ey, ez};
        a.detectability = 1.0;
        a.weight = weight;
        cat.add(std::move(a));
    };
    // weights follow a rough popularity skew within each family
    // bikes
    add_asset("bike.diamondback", 0, 0.90, 0.25, 0.60, 3.2);
    add_asset("bike.gazelle", 0, 0.90, 0.25, 0.60, 1.8);
    add_asset("bike.crossbike", 0, 0.85, 0.25, 0.55, 1.1);
    // motorcycles
    add_asset("moto.kawasaki", 1, 1.10, 0.40, 0.65, 4.2);
    add_asset("moto.harley", 1, 1.20, 0.45, 0.70, 2.2);
    add_asset("moto.yamaha", 1, 1.10, 0.40, 0.65, 1.1);
    // compacts
    add_asset("compact.citroen_c3", 2, 1.90, 0.85, 0.75, 14.0);
    add_asset("compact.isetta", 2, 1.60, 0.80, 0.70, 7.0);
    add_asset("compact.mini", 2, 1.85, 0.85, 0.70, 3.6);
    add_asset("compact.panda", 2, 1.80, 0.82, 0.72, 1.9);
    // sedans
    add_asset("sedan.mercedes_ccc", 3, 2.30, 0.95, 0.75, 18.0);
    add_asset("sedan.prius", 3, 2.25, 0.92, 0.75, 10.0);
    add_asset("sedan.model3", 3, 2.35, 0.95, 0.75, 6.0);
    add_asset("sedan.patrol", 3, 2.45, 1.00, 0.95, 3.5);
    add_asset("sedan.volkswagen_t2", 3, 2.25, 0.95, 1.00, 2.0);
    add_asset("sedan.jeep", 3, 2.30, 0.95, 0.90, 1.2);
    // heavies
    add_asset("heavy.cybertruck", 4, 3.20, 1.20, 1.10, 7.0);
    add_asset("heavy.colacar", 4, 3.40, 1.30, 1.30, 3.4);
    add_asset("heavy.firetruck", 4, 3.80, 1.35, 1.40, 1.6);
    // pedestrians (occluders only; never labeled, never intervention targets)
    add_asset("ped.adult_a", 5, 0.35, 0.35, 0.90, 4.0);
    add_asset("ped.adult_b", 5, 0.35, 0.35, 0.90, 0.8);
    add_asset("ped.worker", 5, 0.40, 0.40, 0.90, 0.3);
    add_asset("ped.child", 5, 0.30, 0.30, 0.60, 0.15);
    cfg.catalog = std::move(cat);

    cfg.vehicle_count = VehicleCountModel{8.0, 1, 20};
    cfg.rotation.modes = {{0.0, 25.0, 0.62}, {180.0, 25.0, 0.38}};
    cfg.pedestrian_count = 20;
    cfg.ego_asset = AssetRef{3, 0};
    return cfg;
}

namespace {

// Draw order is part of the generator contract; scene_distribution_log_prob
// mirrors the same factorization.
struct Draw {
    const GeneratorConfig& cfg;
    RandomStream& rng;

    const MapSpec& map() {
        std::vector<double> w;
        for (const auto& m : cfg.maps) w.push_back(m.weight);
        return cfg.maps[rng.categorical(w)];
    }
    int weather() {
        std::vector<double> w;
        for (const auto& p : cfg.weather_presets) w.push_back(p.weight);
        return static_cast<int>(rng.categorical(w));
    }
    int camera() {
        std::vector<double> w;
        for (const auto& c : cfg.cameras) w.push_back(c.weight);
        return static_cast<int>(rng.categorical(w));
    }
    const Waypoint& waypoint(const MapSpec& m, const std::vector<int>& idx) {
        return m.waypoints[idx[rng.uniform_index(idx.size())]];
    }
    const AssetInfo* asset(const std::vector<const AssetInfo*>& pool) {
        std::vector<double> w;
        w.reserve(pool.size());
        for (const auto* a : pool) w.push_back(a->weight);
        return pool[rng.categorical(w)];
    }
};

}  // namespace

SceneGraph sample_scene(const GeneratorConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    RandomStream rng(derive_seed(seed, 0x5C31EULL));
    Draw draw{cfg, rng};

    SceneGraph scene;
    scene.seed = seed;
    scene.id = static_cast<std::int64_t>(seed);

    const MapSpec& m = draw.map();
    scene.map_id = m.name;
    scene.weather = cfg.weather_presets[draw.weather()].state;
    scene.camera = cfg.cameras[draw.camera()].camera;

    const auto roads = m.road_indices();
    const auto sidewalks = m.sidewalk_indices();
    const auto vehicles = cfg.catalog.vehicle_entries();
    const auto pedestrians = cfg.catalog.family_entries(AssetCatalog::kPedestrianFamily);

    const int v_count = cfg.vehicle_count.sample(rng);

    auto place = [&](AgentNode& node, const Waypoint& w, double ride_height) {
        node.pose.x = w.x;
        node.pose.y = w.y;
        node.pose.z = w.z + ride_height;
        node.pose.roll = 0.0;
        node.pose.yaw = cfg.rotation.sample(rng);
    };

    scene.ego.id = 0;
    scene.ego.kind = AgentKind::ego;
    scene.ego.asset = cfg.ego_asset;
    scene.ego.extent = cfg.catalog.at(cfg.ego_asset).extent;
    place(scene.ego, draw.waypoint(m, roads), cfg.ride_height_vehicle);

    int next_id = 1;
    for (int i = 0; i < v_count; ++i) {
        AgentNode a;
        a.id = next_id++;
        a.kind = AgentKind::vehicle;
        const AssetInfo* info = draw.asset(vehicles);
        a.asset = AssetRef{info->family, info->model};
        a.extent = info->extent;
        place(a, draw.waypoint(m, roads), cfg.ride_height_vehicle);
        scene.agents.push_back(std::move(a));
    }
    for (int i = 0; i < cfg.pedestrian_count; ++i) {
        AgentNode a;
        a.id = next_id++;
        a.kind = AgentKind::pedestrian;
        const AssetInfo* info = draw.asset(pedestrians);
        a.asset = AssetRef{info->family, info->model};
        a.extent = info->extent;
        place(a, draw.waypoint(m, sidewalks), cfg.ride_height_pedestrian);
        scene.agents.push_back(std::move(a));
    }
    return scene;
}

namespace {

struct WaypointIndex {
    std::unordered_map<std::uint64_t, int> road, sidewalk;
    int road_count = 0, sidewalk_count = 0;

    static std::uint64_t key(double x, double y) {
        const auto kx = static_cast<std::int64_t>(std::llround(x * 10.0));
        const auto ky = static_cast<std::int64_t>(std::llround(y * 10.0));
        return (static_cast<std::uint64_t>(kx) << 32) ^ static_cast<std::uint32_t>(ky);
    }

    explicit WaypointIndex(const MapSpec& m) {
        for (int i = 0; i < static_cast<int>(m.waypoints.size()); ++i) {
            const auto& w = m.waypoints[i];
            auto& table = w.sidewalk ? sidewalk : road;
            table.emplace(key(w.x, w.y), i);
        }
        road_count = static_cast<int>(m.road_indices().size());
        sidewalk_count = static_cast<int>(m.sidewalk_indices().size());
    }

    const Waypoint* find(const MapSpec& m, double x, double y, bool want_sidewalk) const {
        const auto& table = want_sidewalk ? sidewalk : road;
        auto it = table.find(key(x, y));
        if (it == table.end()) return nullptr;
        const Waypoint& w = m.waypoints[it->second];
        if (std::abs(w.x - x) > 1e-6 || std::abs(w.y - y) > 1e-6) return nullptr;
        return &w;
    }
};

}  // namespace

double scene_distribution_log_prob(const GeneratorConfig& cfg, const SceneGraph& scene) {
    cfg.validate();

    double map_total = 0.0, map_w = -1.0;
    for (const auto& m : cfg.maps) {
        map_total += m.weight;
        if (m.name == scene.map_id) map_w = m.weight;
    }
    if (map_w <= 0.0) return kNegInf;
    double lp = std::log(map_w / map_total);

    const int wi = cfg.preset_index(scene.weather);
    if (wi < 0) return kNegInf;
    double wp_total = 0.0;
    for (const auto& p : cfg.weather_presets) wp_total += p.weight;
    lp += std::log(cfg.weather_presets[wi].weight / wp_total);

    const int ci = cfg.camera_index(scene.camera);
    if (ci < 0) return kNegInf;
    double cam_total = 0.0;
    for (const auto& c : cfg.cameras) cam_total += c.weight;
    lp += std::log(cfg.cameras[ci].weight / cam_total);

    const int v = scene.vehicle_count();
    const int p = scene.pedestrian_count();
    if (p != cfg.pedestrian_count) return kNegInf;
    lp += cfg.vehicle_count.log_pmf(v);
    if (!std::isfinite(lp)) return kNegInf;

    const MapSpec& m = cfg.map(scene.map_id);
    const WaypointIndex index(m);

    double veh_weight_total = 0.0;
    for (const auto* a : cfg.catalog.vehicle_entries()) veh_weight_total += a->weight;
    double ped_weight_total = 0.0;
    for (const auto* a : cfg.catalog.family_entries(AssetCatalog::kPedestrianFamily))
        ped_weight_total += a->weight;

    auto pose_lp = [&](const AgentNode& a, bool sidewalk, double ride_height) -> double {
        const Waypoint* w = index.find(m, a.pose.x, a.pose.y, sidewalk);
        if (!w) return kNegInf;
        if (std::abs(a.pose.z - (w->z + ride_height)) > 1e-6) return kNegInf;
        if (a.pose.roll != 0.0) return kNegInf;
        if (a.pose.yaw < 0.0 || a.pose.yaw >= 360.0) return kNegInf;
        const int n = sidewalk ? index.sidewalk_count : index.road_count;
        return -std::log(static_cast<double>(n)) + cfg.rotation.log_pdf(a.pose.yaw);
    };

    if (scene.ego.kind != AgentKind::ego || !(scene.ego.asset == cfg.ego_asset)) return kNegInf;
    lp += pose_lp(scene.ego, false, cfg.ride_height_vehicle);

    for (const auto& a : scene.agents) {
        const AssetInfo* info = cfg.catalog.find(a.asset);
        if (!info) return kNegInf;
        if (a.kind == AgentKind::vehicle) {
            if (!AssetCatalog::is_vehicle_family(a.asset.family)) return kNegInf;
            lp += std::log(info->weight / veh_weight_total);
            lp += pose_lp(a, false, cfg.ride_height_vehicle);
        } else if (a.kind == AgentKind::pedestrian) {
            if (a.asset.family != AssetCatalog::kPedestrianFamily) return kNegInf;
            lp += std::log(info->weight / ped_weight_total);
            lp += pose_lp(a, true, cfg.ride_height_pedestrian);
        } else {
            return kNegInf;
        }
        if (!std::isfinite(lp)) return kNegInf;
    }
    return lp;
}

using nlohmann::json;

void to_json(json& j, const Waypoint& w) {
    j = json{{"x", w.x}, {"y", w.y}, {"z", w.z}, {"sidewalk", w.sidewalk}};
}

void from_json(const json& j, Waypoint& w) {
    j.at("x").get_to(w.x);
    j.at("y").get_to(w.y);
    j.at("z").get_to(w.z);
    j.at("sidewalk").get_to(w.sidewalk);
}

void to_json(json& j, const GeneratorConfig& c) {
    json maps = json::array();
    for (const auto& m : c.maps)
        maps.push_back(json{{"name", m.name}, {"weight", m.weight}, {"waypoints", m.waypoints}});
    json presets = json::array();
    for (const auto& p : c.weather_presets)
        presets.push_back(json{{"name", p.name}, {"state", p.state}, {"weight", p.weight}});
    json cams = json::array();
    for (const auto& cc : c.cameras)
        cams.push_back(json{{"camera", cc.camera}, {"weight", cc.weight}});
    json modes = json::array();
    for (const auto& mo : c.rotation.modes)
        modes.push_back(json{{"mean", mo.mean_deg}, {"sigma", mo.sigma_deg}, {"weight", mo.weight}});
    j = json{{"maps", maps},
             {"weather_presets", presets},
             {"cameras", cams},
             {"catalog", c.catalog},
             {"vehicle_count",
              {{"mean", c.vehicle_count.mean},
               {"min", c.vehicle_count.min_count},
               {"max", c.vehicle_count.max_count}}},
             {"rotation_modes", modes},
             {"pedestrian_count", c.pedestrian_count},
             {"min_coord", c.min_coord},
             {"ride_height_vehicle", c.ride_height_vehicle},
             {"ride_height_pedestrian", c.ride_height_pedestrian},
             {"camera_height", c.camera_height},
             {"ego_asset", {{"family", c.ego_asset.family}, {"model", c.ego_asset.model}}}};
}

void from_json(const json& j, GeneratorConfig& c) {
    c = GeneratorConfig{};
    for (const auto& mj : j.at("maps")) {
        MapSpec m;
        mj.at("name").get_to(m.name);
        mj.at("weight").get_to(m.weight);
        mj.at("waypoints").get_to(m.waypoints);
        c.maps.push_back(std::move(m));
    }
    for (const auto& pj : j.at("weather_presets")) {
        WeatherPreset p;
        pj.at("name").get_to(p.name);
        pj.at("state").get_to(p.state);
        pj.at("weight").get_to(p.weight);
        c.weather_presets.push_back(std::move(p));
    }
    for (const auto& cj : j.at("cameras")) {
        CameraChoice cc;
        cj.at("camera").get_to(cc.camera);
        cj.at("weight").get_to(cc.weight);
        c.cameras.push_back(cc);
    }
    j.at("catalog").get_to(c.catalog);
    c.vehicle_count.mean = j.at("vehicle_count").at("mean").get<double>();
    c.vehicle_count.min_count = j.at("vehicle_count").at("min").get<int>();
    c.vehicle_count.max_count = j.at("vehicle_count").at("max").get<int>();
    for (const auto& mj : j.at("rotation_modes")) {
        RotationMixture::Mode mo;
        mj.at("mean").get_to(mo.mean_deg);
        mj.at("sigma").get_to(mo.sigma_deg);
        mj.at("weight").get_to(mo.weight);
        c.rotation.modes.push_back(mo);
    }
    j.at("pedestrian_count").get_to(c.pedestrian_count);
    j.at("min_coord").get_to(c.min_coord);
    j.at("ride_height_vehicle").get_to(c.ride_height_vehicle);
    j.at("ride_height_pedestrian").get_to(c.ride_height_pedestrian);
    j.at("camera_height").get_to(c.camera_height);
    c.ego_asset.family = j.at("ego_asset").at("family").get<int>();
    c.ego_asset.model = j.at("ego_asset").at("model").get<int>();
}

}  // namespace cst
