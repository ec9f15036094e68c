#include "cst/codec.hpp"

#include <algorithm>
#include <cmath>

#include "cst/io.hpp"

namespace cst {

namespace {

constexpr double kValueTol = 1e-9;

std::vector<double> sorted_unique(std::vector<double> vals) {
    std::sort(vals.begin(), vals.end());
    std::vector<double> out;
    for (double v : vals) {
        if (out.empty() || std::abs(v - out.back()) > kValueTol) out.push_back(v);
    }
    return out;
}

int find_value(const std::vector<double>& vals, double v) {
    for (int i = 0; i < static_cast<int>(vals.size()); ++i)
        if (std::abs(vals[i] - v) <= kValueTol) return i;
    return -1;
}

}  // namespace

std::shared_ptr<const TokenSchema> TokenSchema::build(const GeneratorConfig& cfg) {
    auto schema = std::make_shared<TokenSchema>();

    schema->family_count_ = AssetCatalog::kFamilyCount;
    schema->max_models_ = cfg.catalog.max_models_per_family();
    schema->ego_family_ = cfg.ego_asset.family;

    for (int a = 0; a < WeatherState::kAttrCount; ++a) {
        std::vector<double> vals;
        for (const auto& p : cfg.weather_presets) vals.push_back(p.state.values[a]);
        schema->weather_values_.push_back(sorted_unique(std::move(vals)));
    }
    for (int a = 0; a < 5; ++a) {
        std::vector<double> vals;
        for (const auto& c : cfg.cameras) vals.push_back(c.camera.as_array()[a]);
        schema->camera_values_.push_back(sorted_unique(std::move(vals)));
    }

    int offset = 0;
    auto add_class = [&](const std::string& name, int size) {
        SlotClass c;
        c.id = static_cast<int>(schema->classes_.size());
        c.name = name;
        c.vocab_offset = offset;
        c.vocab_size = size;
        offset += size;
        schema->classes_.push_back(std::move(c));
    };

    for (int a = 0; a < WeatherState::kAttrCount; ++a)
        add_class("weather_attr_" + std::to_string(a),
                  static_cast<int>(schema->weather_values_[a].size()));
    for (int a = 0; a < 5; ++a)
        add_class("camera_attr_" + std::to_string(a),
                  static_cast<int>(schema->camera_values_[a].size()));
    add_class("asset_family", schema->family_count_);
    add_class("asset_model", schema->max_models_);
    add_class("coord_hundreds", 6);
    add_class("coord_ones", 100);
    add_class("coord_decimal", 10);
    add_class("rot_hundreds", 4);
    add_class("rot_ones", 100);
    add_class("rot_decimal", 10);
    schema->total_vocab_ = offset;

    for (const auto& p : cfg.weather_presets) {
        std::array<int, WeatherState::kAttrCount> row{};
        for (int a = 0; a < WeatherState::kAttrCount; ++a) {
            const int idx = find_value(schema->weather_values_[a], p.state.values[a]);
            if (idx < 0) throw CodecError("preset value missing from schema: " + p.name);
            row[a] = idx;
        }
        schema->preset_tokens_.push_back(row);
    }

    schema->hash_ = fnv1a64(schema->to_json().dump());
    return schema;
}

namespace {

// class ids follow the add_class order above
constexpr int kClassWeatherBase = 0;
constexpr int kClassCameraBase = 10;
constexpr int kClassFamily = 15;
constexpr int kClassModel = 16;
constexpr int kClassCoordH = 17;
constexpr int kClassCoordO = 18;
constexpr int kClassCoordD = 19;
constexpr int kClassRotH = 20;
constexpr int kClassRotO = 21;
constexpr int kClassRotD = 22;

// pose block layout: x(3) y(3) z(3) roll(3) yaw(3)
SlotInfo pose_slot(int offset_in_pose, int agent_index) {
    SlotInfo s;
    s.agent_index = agent_index;
    const int scalar = offset_in_pose / 3;
    s.digit = offset_in_pose % 3;
    static constexpr PoseRole roles[5] = {PoseRole::x, PoseRole::y, PoseRole::z, PoseRole::roll,
                                          PoseRole::yaw};
    s.role = roles[scalar];
    const bool rot = (s.role == PoseRole::roll || s.role == PoseRole::yaw);
    if (s.digit == 0) {
        s.class_id = rot ? kClassRotH : kClassCoordH;
        s.kind = rot ? SlotKind::rot_hundreds : SlotKind::coord_hundreds;
    } else if (s.digit == 1) {
        s.class_id = rot ? kClassRotO : kClassCoordO;
        s.kind = rot ? SlotKind::rot_ones : SlotKind::coord_ones;
    } else {
        s.class_id = rot ? kClassRotD : kClassCoordD;
        s.kind = rot ? SlotKind::rot_decimal : SlotKind::coord_decimal;
    }
    return s;
}

}  // namespace

SlotInfo TokenSchema::slot_at(std::size_t position) const {
    SlotInfo s;
    if (position < 10) {
        s.class_id = kClassWeatherBase + static_cast<int>(position);
        s.kind = SlotKind::weather_attr;
        s.attr_index = static_cast<int>(position);
        s.agent_index = -2;
        return s;
    }
    if (position < 15) {
        s.class_id = kClassCameraBase + static_cast<int>(position - 10);
        s.kind = SlotKind::camera_attr;
        s.attr_index = static_cast<int>(position - 10);
        s.agent_index = -2;
        return s;
    }
    if (position < kHeaderLen) return pose_slot(static_cast<int>(position - 15), -1);

    const std::size_t rel = position - kHeaderLen;
    const int agent = static_cast<int>(rel / kAgentBlockLen);
    const int off = static_cast<int>(rel % kAgentBlockLen);
    if (off == 0) {
        s.class_id = kClassFamily;
        s.kind = SlotKind::asset_family;
        s.agent_index = agent;
        return s;
    }
    if (off == 1) {
        s.class_id = kClassModel;
        s.kind = SlotKind::asset_model;
        s.agent_index = agent;
        return s;
    }
    return pose_slot(off - 2, agent);
}

int TokenSchema::agent_count_for_length(std::size_t n) {
    if (!valid_length(n)) throw CodecError("sequence length " + std::to_string(n) +
                                           " is not 30 + 17*k");
    return static_cast<int>((n - kHeaderLen) / kAgentBlockLen);
}

int TokenSchema::weather_value_index(int attr, double value) const {
    return find_value(weather_values_.at(attr), value);
}
double TokenSchema::weather_value(int attr, int index) const {
    return weather_values_.at(attr).at(index);
}
int TokenSchema::camera_value_index(int attr, double value) const {
    return find_value(camera_values_.at(attr), value);
}
double TokenSchema::camera_value(int attr, int index) const {
    return camera_values_.at(attr).at(index);
}

int TokenSchema::global_token(int class_id, int local) const {
    const SlotClass& c = slot_class(class_id);
    if (local < 0 || local >= c.vocab_size)
        throw CodecError("local token " + std::to_string(local) + " out of range for " + c.name);
    return c.vocab_offset + local;
}

int TokenSchema::local_token(int class_id, int global) const {
    const SlotClass& c = slot_class(class_id);
    if (!c.contains(global))
        throw CodecError("token " + std::to_string(global) + " outside class " + c.name);
    return global - c.vocab_offset;
}

nlohmann::json TokenSchema::to_json() const {
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : classes_)
        classes.push_back(nlohmann::json{
            {"id", c.id}, {"name", c.name}, {"offset", c.vocab_offset}, {"size", c.vocab_size}});
    return nlohmann::json{{"classes", classes},
                          {"weather_values", weather_values_},
                          {"camera_values", camera_values_},
                          {"family_count", family_count_},
                          {"max_models", max_models_},
                          {"ego_family", ego_family_}};
}

std::array<int, 3> encode_scalar(double v) {
    if (!(v >= 0.0 && v < 600.0))
        throw CodecError("scalar " + std::to_string(v) + " outside [0, 600)");
    // epsilon guard keeps 0.1-grid values stable under binary floating point
    const int whole = static_cast<int>(std::floor(v));
    const int w0 = whole / 100;
    const int w1 = whole % 100;
    int w2 = static_cast<int>(std::floor((v - whole) * 10.0 + 1e-6));
    if (w2 > 9) w2 = 9;
    return {w0, w1, w2};
}

double decode_scalar(int w0, int w1, int w2) {
    if (w0 < 0 || w0 > 5) throw CodecError("hundreds digit out of range");
    if (w1 < 0 || w1 > 99) throw CodecError("ones digit out of range");
    if (w2 < 0 || w2 > 9) throw CodecError("decimal digit out of range");
    return 100.0 * w0 + w1 + 0.1 * w2;
}

double decode_scalar(const std::array<int, 3>& w) { return decode_scalar(w[0], w[1], w[2]); }

namespace {

void encode_pose(const Pose& pose, double min_coord, const TokenSchema& schema,
                 std::vector<int>& out) {
    const double vals[5] = {pose.x - min_coord, pose.y - min_coord, pose.z - min_coord, pose.roll,
                            pose.yaw};
    for (int s = 0; s < 5; ++s) {
        const bool rot = s >= 3;
        if (rot && !(vals[s] >= 0.0 && vals[s] < 360.0))
            throw CodecError("rotation outside [0, 360)");
        const auto w = encode_scalar(vals[s]);
        if (rot && w[0] > 3) throw CodecError("rotation hundreds digit out of range");
        out.push_back(schema.global_token(rot ? kClassRotH : kClassCoordH, w[0]));
        out.push_back(schema.global_token(rot ? kClassRotO : kClassCoordO, w[1]));
        out.push_back(schema.global_token(rot ? kClassRotD : kClassCoordD, w[2]));
    }
}

Pose decode_pose(const TokenSequence& seq, std::size_t base, double min_coord) {
    const TokenSchema& schema = *seq.schema;
    double vals[5];
    for (int s = 0; s < 5; ++s) {
        const bool rot = s >= 3;
        const int w0 = schema.local_token(rot ? kClassRotH : kClassCoordH, seq.tokens[base + s * 3]);
        const int w1 =
            schema.local_token(rot ? kClassRotO : kClassCoordO, seq.tokens[base + s * 3 + 1]);
        const int w2 =
            schema.local_token(rot ? kClassRotD : kClassCoordD, seq.tokens[base + s * 3 + 2]);
        vals[s] = decode_scalar(w0, w1, w2);
    }
    Pose p;
    p.x = vals[0] + min_coord;
    p.y = vals[1] + min_coord;
    p.z = vals[2] + min_coord;
    p.roll = vals[3];
    p.yaw = vals[4];
    return p;
}

}  // namespace

int map_index_of(const GeneratorConfig& cfg, const std::string& map_id) {
    for (int i = 0; i < static_cast<int>(cfg.maps.size()); ++i)
        if (cfg.maps[i].name == map_id) return i;
    throw CodecError("unknown map id: " + map_id);
}

TokenSequence encode_scene(const SceneGraph& scene, const GeneratorConfig& cfg,
                           std::shared_ptr<const TokenSchema> schema) {
    TokenSequence seq;
    seq.schema = schema;
    seq.map_index = map_index_of(cfg, scene.map_id);
    auto& out = seq.tokens;
    out.reserve(TokenSchema::kHeaderLen + scene.agents.size() * TokenSchema::kAgentBlockLen);

    for (int a = 0; a < WeatherState::kAttrCount; ++a) {
        const int idx = schema->weather_value_index(a, scene.weather.values[a]);
        if (idx < 0)
            throw CodecError("weather attribute not in configured support: " +
                             WeatherState::attr_names()[a]);
        out.push_back(schema->global_token(kClassWeatherBase + a, idx));
    }
    const auto cam = scene.camera.as_array();
    static const char* cam_names[5] = {"image_width", "image_height", "focal", "principal_x",
                                       "principal_y"};
    for (int a = 0; a < 5; ++a) {
        const int idx = schema->camera_value_index(a, cam[a]);
        if (idx < 0)
            throw CodecError(std::string("camera attribute not in configured support: ") +
                             cam_names[a]);
        out.push_back(schema->global_token(kClassCameraBase + a, idx));
    }
    encode_pose(scene.ego.pose, cfg.min_coord, *schema, out);

    for (const auto& agent : scene.agents) {
        if (!cfg.catalog.find(agent.asset))
            throw CodecError("agent asset not in configured catalog");
        out.push_back(schema->global_token(kClassFamily, agent.asset.family));
        out.push_back(schema->global_token(kClassModel, agent.asset.model));
        encode_pose(agent.pose, cfg.min_coord, *schema, out);
    }
    return seq;
}

SceneGraph decode_scene(const TokenSequence& seq, const SceneGraph& template_scene,
                        const GeneratorConfig& cfg) {
    if (!seq.schema) throw CodecError("token sequence has no schema");
    const TokenSchema& schema = *seq.schema;
    const int agents = TokenSchema::agent_count_for_length(seq.tokens.size());
    if (agents != static_cast<int>(template_scene.agents.size()))
        throw CodecError("agent count mismatch between sequence and template");

    SceneGraph scene = template_scene;
    for (int a = 0; a < WeatherState::kAttrCount; ++a) {
        const int local = schema.local_token(kClassWeatherBase + a, seq.tokens[a]);
        scene.weather.values[a] = schema.weather_value(a, local);
    }
    const double cam0 = schema.camera_value(0, schema.local_token(kClassCameraBase + 0, seq.tokens[10]));
    const double cam1 = schema.camera_value(1, schema.local_token(kClassCameraBase + 1, seq.tokens[11]));
    scene.camera.image_width = static_cast<int>(cam0);
    scene.camera.image_height = static_cast<int>(cam1);
    scene.camera.focal = schema.camera_value(2, schema.local_token(kClassCameraBase + 2, seq.tokens[12]));
    scene.camera.principal_x =
        schema.camera_value(3, schema.local_token(kClassCameraBase + 3, seq.tokens[13]));
    scene.camera.principal_y =
        schema.camera_value(4, schema.local_token(kClassCameraBase + 4, seq.tokens[14]));

    scene.ego.pose = decode_pose(seq, 15, cfg.min_coord);

    for (int i = 0; i < agents; ++i) {
        const std::size_t base = TokenSchema::kHeaderLen + i * TokenSchema::kAgentBlockLen;
        AgentNode& agent = scene.agents[i];
        const int family = schema.local_token(kClassFamily, seq.tokens[base]);
        const int model = schema.local_token(kClassModel, seq.tokens[base + 1]);
        const AssetInfo* info = cfg.catalog.find(AssetRef{family, model});
        if (!info)
            throw CodecError("decoded asset index unknown to catalog (family " +
                             std::to_string(family) + ", model " + std::to_string(model) + ")");
        agent.asset = AssetRef{family, model};
        agent.extent = info->extent;
        agent.pose = decode_pose(seq, base + 2, cfg.min_coord);
    }
    return scene;
}

namespace {
std::size_t agent_block(int agent_index) {
    return TokenSchema::kHeaderLen +
           static_cast<std::size_t>(agent_index) * TokenSchema::kAgentBlockLen;
}
}  // namespace

std::vector<std::size_t> asset_positions(int agent_index) {
    const std::size_t b = agent_block(agent_index);
    return {b, b + 1};
}

std::vector<std::size_t> yaw_positions(int agent_index) {
    const std::size_t b = agent_block(agent_index) + 2 + 12;  // yaw is the 5th pose scalar
    return {b, b + 1, b + 2};
}

std::vector<std::size_t> location_positions(int agent_index) {
    const std::size_t b = agent_block(agent_index) + 2;
    return {b, b + 1, b + 2, b + 3, b + 4, b + 5};  // x digits then y digits
}

std::vector<std::size_t> weather_positions() {
    std::vector<std::size_t> out(WeatherState::kAttrCount);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
    return out;
}

}  // namespace cst
