#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "cst/generator.hpp"
#include "cst/scene.hpp"
#include "json.hpp"

namespace cst {

struct Box2D {
    double x_min = 0.0, y_min = 0.0, x_max = 0.0, y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    double area() const { return width() > 0 && height() > 0 ? width() * height() : 0.0; }
    bool valid() const { return x_min < x_max && y_min < y_max; }
    bool operator==(const Box2D&) const = default;
};

double iou(const Box2D& a, const Box2D& b);

// Per-pixel nearest-surface distance; background is +infinity.
struct DepthBuffer {
    int width = 0;
    int height = 0;
    double scale = 1.0;  // buffer resolution / camera resolution
    std::vector<double> depth;

    double at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return depth[static_cast<std::size_t>(y) * width + x]; }

    static DepthBuffer empty(int w, int h, double scale = 1.0) {
        DepthBuffer b;
        b.width = w;
        b.height = h;
        b.scale = scale;
        b.depth.assign(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity());
        return b;
    }
};

struct LabeledBox {
    int agent_id = 0;
    Box2D box;
    double closest_depth = 0.0;
    long visible_px = 0;
    double occluded_frac = 0.0;
};

struct LabelSet {
    std::int64_t scene_id = 0;
    std::vector<LabeledBox> boxes;
};

struct GeometryOptions {
    double buffer_scale = 1.0;  // 1.0 full resolution, 0.25 reduced
    double min_height_px = 30.0;
    double max_depth_m = 250.0;
    double max_occluded_frac = 0.80;
    long min_visible_px = 1300;

    // thresholds at the working resolution (ceil per the reduced-buffer rule)
    double height_threshold() const;
    long visible_threshold() const;
};

// Weak-perspective projection of the agent cuboid: corners are projected at
// the agent-center depth, so a 10 m -> 20 m move exactly halves the box.
// Returns the clipped axis-aligned hull and the depth of the nearest corner,
// or nothing when the center is behind the camera or the box misses the image.
std::optional<std::pair<Box2D, double>> project_agent(const CameraModel& camera,
                                                      const Pose& ego_pose,
                                                      const AgentNode& agent,
                                                      double camera_height = 1.6,
                                                      double buffer_scale = 1.0);

DepthBuffer build_depth_buffer(const SceneGraph& scene, const GeometryOptions& opts = {},
                               double camera_height = 1.6);

struct OcclusionStats {
    double occluded_frac = 0.0;  // t: fraction of box pixels strictly nearer than the agent
    long visible_px = 0;         // q: box pixels at or beyond the agent's closest point
    long box_px = 0;
};

OcclusionStats occlusion_stats(const DepthBuffer& buffer, const Box2D& box, double closest_depth);

// The four ground-truth filters; boundary semantics: keep iff
// height >= 30 px, depth <= 250 m, t < 0.80, q >= 1300 (scaled thresholds
// when a reduced buffer is configured).
bool passes_label_filters(double box_height_px, double closest_depth_m, double occluded_frac,
                          long visible_px, const GeometryOptions& opts = {});

// Ground-truth labels for the scene's vehicles (pedestrians occlude but are
// never labeled). Uses an exact interval-arithmetic evaluation of the depth
// buffer semantics; derive_labels_buffered is the pixel-loop reference.
LabelSet derive_labels(const SceneGraph& scene, const GeometryOptions& opts = {},
                       double camera_height = 1.6);
LabelSet derive_labels_buffered(const SceneGraph& scene, const GeometryOptions& opts = {},
                                double camera_height = 1.6);

void to_json(nlohmann::json& j, const LabeledBox& b);
void from_json(const nlohmann::json& j, LabeledBox& b);
void to_json(nlohmann::json& j, const LabelSet& l);
void from_json(const nlohmann::json& j, LabelSet& l);

}  // namespace cst
