#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cst/generator.hpp"
#include "cst/scene.hpp"
#include "json.hpp"

namespace cst {

struct CodecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Slot classes partition the global token vocabulary into disjoint index
// ranges. Classes 0..9 are the weather attributes, 10..14 the camera
// attributes, then asset family/model and the six digit classes.
struct SlotClass {
    int id = 0;
    std::string name;
    int vocab_offset = 0;
    int vocab_size = 0;

    bool contains(int token) const {
        return token >= vocab_offset && token < vocab_offset + vocab_size;
    }
};

enum class SlotKind {
    weather_attr,
    camera_attr,
    asset_family,
    asset_model,
    coord_hundreds,
    coord_ones,
    coord_decimal,
    rot_hundreds,
    rot_ones,
    rot_decimal,
};

// Which scalar of the owning agent a pose-digit position belongs to.
enum class PoseRole { x, y, z, roll, yaw, none };

// Per-position annotation, derivable from the sequence length alone.
struct SlotInfo {
    int class_id = 0;
    SlotKind kind = SlotKind::weather_attr;
    int attr_index = 0;        // weather/camera attribute index
    int agent_index = -2;      // -2 global, -1 ego, >=0 index into scene.agents
    PoseRole role = PoseRole::none;
    int digit = 0;             // 0 hundreds, 1 ones, 2 decimal
};

class TokenSchema {
public:
    static constexpr int kHeaderLen = 30;  // 10 weather + 5 camera + 15 ego pose
    static constexpr int kAgentBlockLen = 17;

    static std::shared_ptr<const TokenSchema> build(const GeneratorConfig& config);

    const std::vector<SlotClass>& classes() const { return classes_; }
    const SlotClass& slot_class(int id) const { return classes_.at(id); }
    int total_vocab() const { return total_vocab_; }

    SlotInfo slot_at(std::size_t position) const;
    static bool valid_length(std::size_t n) {
        return n >= kHeaderLen && (n - kHeaderLen) % kAgentBlockLen == 0;
    }
    static int agent_count_for_length(std::size_t n);

    // value <-> local index lookups
    int weather_value_index(int attr, double value) const;   // -1 if absent
    double weather_value(int attr, int index) const;
    int camera_value_index(int attr, double value) const;
    double camera_value(int attr, int index) const;
    const std::vector<std::array<int, WeatherState::kAttrCount>>& preset_token_rows() const {
        return preset_tokens_;
    }

    int family_count() const { return family_count_; }
    int max_models() const { return max_models_; }
    int ego_family() const { return ego_family_; }

    int global_token(int class_id, int local) const;
    int local_token(int class_id, int global) const;

    std::uint64_t hash() const { return hash_; }
    nlohmann::json to_json() const;

    // weather slots of each preset as local indices (one row per preset)
    const std::vector<std::vector<double>>& weather_values() const { return weather_values_; }

private:
    std::vector<SlotClass> classes_;
    std::vector<std::vector<double>> weather_values_;  // per attribute, sorted unique
    std::vector<std::vector<double>> camera_values_;
    std::vector<std::array<int, WeatherState::kAttrCount>> preset_tokens_;  // local indices
    int family_count_ = 0;
    int max_models_ = 0;
    int ego_family_ = 0;
    int total_vocab_ = 0;
    std::uint64_t hash_ = 0;
};

struct TokenSequence {
    std::vector<int> tokens;
    std::shared_ptr<const TokenSchema> schema;
    int map_index = 0;  // sequence metadata; tokens do not encode the map

    std::size_t size() const { return tokens.size(); }
    int agent_count() const { return TokenSchema::agent_count_for_length(tokens.size()); }
    bool operator==(const TokenSequence& o) const { return tokens == o.tokens; }
};

int map_index_of(const GeneratorConfig& config, const std::string& map_id);

// Offset value in [0, 600) -> (hundreds, two-digit ones block, decimal).
// Truncates toward zero with a 1e-6 grid guard so 0.1-aligned inputs
// round-trip exactly.
std::array<int, 3> encode_scalar(double v);

// (w0, w1, w2) -> 100*w0 + w1 + 0.1*w2
double decode_scalar(int w0, int w1, int w2);
double decode_scalar(const std::array<int, 3>& w);

TokenSequence encode_scene(const SceneGraph& scene, const GeneratorConfig& config,
                           std::shared_ptr<const TokenSchema> schema);

// Reconstructs a scene from tokens. The template supplies fields tokens do
// not carry (ids, map, seed); extents are refreshed from the catalog for
// the decoded asset.
SceneGraph decode_scene(const TokenSequence& seq, const SceneGraph& template_scene,
                        const GeneratorConfig& config);

// Positions of the token groups the intervention categories touch.
std::vector<std::size_t> asset_positions(int agent_index);
std::vector<std::size_t> yaw_positions(int agent_index);
std::vector<std::size_t> location_positions(int agent_index);  // x and y digit groups
std::vector<std::size_t> weather_positions();

}  // namespace cst
