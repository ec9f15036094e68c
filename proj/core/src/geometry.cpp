#include "cst/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cst {

double iou(const Box2D& a, const Box2D& b) {
    const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
    const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

double GeometryOptions::height_threshold() const {
    return buffer_scale == 1.0 ? min_height_px : std::ceil(min_height_px * buffer_scale);
}

long GeometryOptions::visible_threshold() const {
    return buffer_scale == 1.0
               ? min_visible_px
               : static_cast<long>(std::ceil(min_visible_px * buffer_scale * buffer_scale));
}

namespace {

constexpr double kDegToRad = M_PI / 180.0;

struct CameraFrame {
    double cx, cy, cz;       // camera center, world
    double fx_x, fx_y;       // forward
    double rx_x, rx_y;       // right
};

CameraFrame camera_frame(const Pose& ego_pose, double camera_height) {
    const double yaw = ego_pose.yaw * kDegToRad;
    CameraFrame f;
    f.cx = ego_pose.x;
    f.cy = ego_pose.y;
    f.cz = ego_pose.z + camera_height;
    f.fx_x = std::cos(yaw);
    f.fx_y = std::sin(yaw);
    f.rx_x = std::sin(yaw);
    f.rx_y = -std::cos(yaw);
    return f;
}

struct CamPoint {
    double x, y, z;  // right, down, forward
};

CamPoint to_camera(const CameraFrame& f, double wx, double wy, double wz) {
    const double dx = wx - f.cx, dy = wy - f.cy, dz = wz - f.cz;
    CamPoint p;
    p.x = dx * f.rx_x + dy * f.rx_y;
    p.y = -dz;  // world up maps to image down
    p.z = dx * f.fx_x + dy * f.fx_y;
    return p;
}

// integer pixel range [begin, end) covered rule: pixel p is inside iff
// p + 0.5 lies in [lo, hi)
int px_begin(double lo) { return static_cast<int>(std::ceil(lo - 0.5)); }
int px_end(double hi) { return static_cast<int>(std::ceil(hi - 0.5)); }

struct PixelRect {
    int x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // half-open

    bool empty() const { return x0 >= x1 || y0 >= y1; }
    long count() const { return empty() ? 0 : static_cast<long>(x1 - x0) * (y1 - y0); }
};

PixelRect pixel_rect(const Box2D& b, int w, int h) {
    PixelRect r;
    r.x0 = std::max(0, px_begin(b.x_min));
    r.x1 = std::min(w, px_end(b.x_max));
    r.y0 = std::max(0, px_begin(b.y_min));
    r.y1 = std::min(h, px_end(b.y_max));
    return r;
}

struct ProjectedAgent {
    int agent_id = 0;
    AgentKind kind = AgentKind::vehicle;
    Box2D box;
    double closest = 0.0;
};

std::vector<ProjectedAgent> project_all(const SceneGraph& scene, const GeometryOptions& opts,
                                        double camera_height) {
    std::vector<ProjectedAgent> out;
    out.reserve(scene.agents.size());
    for (const auto& agent : scene.agents) {
        auto p = project_agent(scene.camera, scene.ego.pose, agent, camera_height,
                               opts.buffer_scale);
        if (!p) continue;
        out.push_back(ProjectedAgent{agent.id, agent.kind, p->first, p->second});
    }
    return out;
}

int buffer_width(const CameraModel& cam, double scale) {
    return std::max(1, static_cast<int>(std::lround(cam.image_width * scale)));
}
int buffer_height(const CameraModel& cam, double scale) {
    return std::max(1, static_cast<int>(std::lround(cam.image_height * scale)));
}

}  // namespace

std::optional<std::pair<Box2D, double>> project_agent(const CameraModel& camera,
                                                      const Pose& ego_pose, const AgentNode& agent,
                                                      double camera_height, double buffer_scale) {
    if (!(camera.focal > 0.0)) throw ConfigError("degenerate camera: focal must be > 0");
    for (double e : agent.extent)
        if (!(e > 0.0)) throw ConfigError("agent extents must be positive");

    const CameraFrame frame = camera_frame(ego_pose, camera_height);
    const CamPoint center = to_camera(frame, agent.pose.x, agent.pose.y, agent.pose.z);
    if (center.z <= 1e-9) return std::nullopt;  // behind the camera plane

    const double yaw = agent.pose.yaw * kDegToRad;
    const double roll = agent.pose.roll * kDegToRad;
    const double cy = std::cos(yaw), sy = std::sin(yaw);
    const double cr = std::cos(roll), sr = std::sin(roll);

    double min_u = std::numeric_limits<double>::infinity(), max_u = -min_u;
    double min_v = min_u, max_v = -min_u;
    double closest = std::numeric_limits<double>::infinity();

    for (int corner = 0; corner < 8; ++corner) {
        const double sx = (corner & 1) ? agent.extent[0] : -agent.extent[0];
        const double sy_ = (corner & 2) ? agent.extent[1] : -agent.extent[1];
        const double sz = (corner & 4) ? agent.extent[2] : -agent.extent[2];
        // roll about the body x axis, then yaw about world z
        const double by = sy_ * cr - sz * sr;
        const double bz = sy_ * sr + sz * cr;
        const double wx = agent.pose.x + sx * cy - by * sy;
        const double wy = agent.pose.y + sx * sy + by * cy;
        const double wz = agent.pose.z + bz;

        const CamPoint p = to_camera(frame, wx, wy, wz);
        closest = std::min(closest, p.z);
        // weak perspective: all corners projected at the center depth
        const double u = (camera.focal * p.x / center.z + camera.principal_x) * buffer_scale;
        const double v = (camera.focal * p.y / center.z + camera.principal_y) * buffer_scale;
        min_u = std::min(min_u, u);
        max_u = std::max(max_u, u);
        min_v = std::min(min_v, v);
        max_v = std::max(max_v, v);
    }
    closest = std::max(closest, 1e-3);

    const double w = camera.image_width * buffer_scale;
    const double h = camera.image_height * buffer_scale;
    Box2D box{std::max(0.0, min_u), std::max(0.0, min_v), std::min(w, max_u), std::min(h, max_v)};
    if (!box.valid()) return std::nullopt;
    return std::make_pair(box, closest);
}

DepthBuffer build_depth_buffer(const SceneGraph& scene, const GeometryOptions& opts,
                               double camera_height) {
    const int w = buffer_width(scene.camera, opts.buffer_scale);
    const int h = buffer_height(scene.camera, opts.buffer_scale);
    DepthBuffer buf = DepthBuffer::empty(w, h, opts.buffer_scale);

    for (const auto& pa : project_all(scene, opts, camera_height)) {
        const PixelRect r = pixel_rect(pa.box, w, h);
        for (int y = r.y0; y < r.y1; ++y)
            for (int x = r.x0; x < r.x1; ++x) buf.at(x, y) = std::min(buf.at(x, y), pa.closest);
    }
    return buf;
}

OcclusionStats occlusion_stats(const DepthBuffer& buffer, const Box2D& box, double closest_depth) {
    const PixelRect r = pixel_rect(box, buffer.width, buffer.height);
    OcclusionStats s;
    s.box_px = r.count();
    for (int y = r.y0; y < r.y1; ++y) {
        for (int x = r.x0; x < r.x1; ++x) {
            if (buffer.at(x, y) < closest_depth)
                continue;  // occluding pixel, counted via box_px - visible
            ++s.visible_px;
        }
    }
    s.occluded_frac = s.box_px > 0 ? static_cast<double>(s.box_px - s.visible_px) / s.box_px : 0.0;
    return s;
}

bool passes_label_filters(double box_height_px, double closest_depth_m, double occluded_frac,
                          long visible_px, const GeometryOptions& opts) {
    if (box_height_px < opts.height_threshold()) return false;
    if (closest_depth_m > opts.max_depth_m) return false;
    if (occluded_frac >= opts.max_occluded_frac) return false;
    if (visible_px < opts.visible_threshold()) return false;
    return true;
}

namespace {

LabelSet labels_from_projections(const SceneGraph& scene,
                                 const std::vector<ProjectedAgent>& projected,
                                 const GeometryOptions& opts, const DepthBuffer* buffer) {
    const int w = buffer ? buffer->width : buffer_width(scene.camera, opts.buffer_scale);
    const int h = buffer ? buffer->height : buffer_height(scene.camera, opts.buffer_scale);

    LabelSet labels;
    labels.scene_id = scene.id;

    for (const auto& target : projected) {
        if (target.kind != AgentKind::vehicle) continue;

        OcclusionStats stats;
        if (buffer) {
            stats = occlusion_stats(*buffer, target.box, target.closest);
        } else {
            // exact interval-arithmetic evaluation of the buffer semantics:
            // a pixel reads strictly closer than the target iff some agent
            // with a nearer closest point covers it
            const PixelRect rv = pixel_rect(target.box, w, h);
            stats.box_px = rv.count();
            if (stats.box_px > 0) {
                std::vector<PixelRect> occluders;
                for (const auto& other : projected) {
                    if (other.agent_id == target.agent_id) continue;
                    if (!(other.closest < target.closest)) continue;
                    PixelRect ro = pixel_rect(other.box, w, h);
                    ro.x0 = std::max(ro.x0, rv.x0);
                    ro.x1 = std::min(ro.x1, rv.x1);
                    ro.y0 = std::max(ro.y0, rv.y0);
                    ro.y1 = std::min(ro.y1, rv.y1);
                    if (!ro.empty()) occluders.push_back(ro);
                }
                long occluded = 0;
                if (!occluders.empty()) {
                    std::vector<int> xs, ys;
                    for (const auto& o : occluders) {
                        xs.push_back(o.x0);
                        xs.push_back(o.x1);
                        ys.push_back(o.y0);
                        ys.push_back(o.y1);
                    }
                    std::sort(xs.begin(), xs.end());
                    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
                    std::sort(ys.begin(), ys.end());
                    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
                    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
                        for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
                            const int cx = xs[i], cy = ys[j];
                            for (const auto& o : occluders) {
                                if (cx >= o.x0 && cx < o.x1 && cy >= o.y0 && cy < o.y1) {
                                    occluded += static_cast<long>(xs[i + 1] - xs[i]) *
                                                (ys[j + 1] - ys[j]);
                                    break;
                                }
                            }
                        }
                    }
                }
                stats.visible_px = stats.box_px - occluded;
                stats.occluded_frac = static_cast<double>(occluded) / stats.box_px;
            }
        }

        if (!passes_label_filters(target.box.height(), target.closest, stats.occluded_frac,
                                  stats.visible_px, opts))
            continue;
        labels.boxes.push_back(LabeledBox{target.agent_id, target.box, target.closest,
                                          stats.visible_px, stats.occluded_frac});
    }
    std::sort(labels.boxes.begin(), labels.boxes.end(),
              [](const LabeledBox& a, const LabeledBox& b) { return a.agent_id < b.agent_id; });
    return labels;
}

}  // namespace

LabelSet derive_labels(const SceneGraph& scene, const GeometryOptions& opts,
                       double camera_height) {
    return labels_from_projections(scene, project_all(scene, opts, camera_height), opts, nullptr);
}

LabelSet derive_labels_buffered(const SceneGraph& scene, const GeometryOptions& opts,
                                double camera_height) {
    const DepthBuffer buf = build_depth_buffer(scene, opts, camera_height);
    return labels_from_projections(scene, project_all(scene, opts, camera_height), opts, &buf);
}

using nlohmann::json;

void to_json(json& j, const LabeledBox& b) {
    j = json{{"agent_id", b.agent_id},
             {"box", {b.box.x_min, b.box.y_min, b.box.x_max, b.box.y_max}},
             {"depth", b.closest_depth},
             {"visible_px", b.visible_px},
             {"occluded_frac", b.occluded_frac}};
}

void from_json(const json& j, LabeledBox& b) {
    j.at("agent_id").get_to(b.agent_id);
    const auto& box = j.at("box");
    b.box = Box2D{box.at(0).get<double>(), box.at(1).get<double>(), box.at(2).get<double>(),
                  box.at(3).get<double>()};
    j.at("depth").get_to(b.closest_depth);
    j.at("visible_px").get_to(b.visible_px);
    j.at("occluded_frac").get_to(b.occluded_frac);
}

void to_json(json& j, const LabelSet& l) {
    j = json{{"scene_id", l.scene_id}, {"boxes", l.boxes}};
}

void from_json(const json& j, LabelSet& l) {
    j.at("scene_id").get_to(l.scene_id);
    j.at("boxes").get_to(l.boxes);
}

}  // namespace cst
