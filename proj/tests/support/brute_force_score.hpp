#pragma once

// Independent re-implementation of the per-example scoring rules, kept
// deliberately separate from the library: its own IOU, its own ordering,
// its own claiming loop. Used as the oracle for the scoring golden tests.

#include <algorithm>
#include <cstddef>
#include <vector>

namespace brute {

struct Box {
    double x0, y0, x1, y1;
};

struct Pred {
    Box box;
    double conf;
};

inline double box_area(const Box& b) {
    const double w = b.x1 - b.x0;
    const double h = b.y1 - b.y0;
    return (w > 0 && h > 0) ? w * h : 0.0;
}

inline double box_iou(const Box& a, const Box& b) {
    const double x0 = std::max(a.x0, b.x0);
    const double y0 = std::max(a.y0, b.y0);
    const double x1 = std::min(a.x1, b.x1);
    const double y1 = std::min(a.y1, b.y1);
    if (x1 <= x0 || y1 <= y0) return 0.0;
    const double inter = (x1 - x0) * (y1 - y0);
    const double uni = box_area(a) + box_area(b) - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

// mean over predictions of confidence * aligned IOU; descending confidence
// (ties: larger area, then input order); each prediction aligns to the
// unclaimed ground truth with highest IOU; IOU > 0.05 claims it
inline double score(std::vector<Pred> preds, std::vector<Box> gt) {
    if (preds.empty()) return gt.empty() ? 1.0 : 0.0;

    std::vector<std::size_t> order(preds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (preds[a].conf != preds[b].conf) return preds[a].conf > preds[b].conf;
        return box_area(preds[a].box) > box_area(preds[b].box);
    });

    std::vector<bool> claimed(gt.size(), false);
    double sum = 0.0;
    for (std::size_t oi : order) {
        double best = -1.0;
        std::size_t best_g = gt.size();
        for (std::size_t g = 0; g < gt.size(); ++g) {
            if (claimed[g]) continue;
            const double v = box_iou(preds[oi].box, gt[g]);
            if (v > best) {
                best = v;
                best_g = g;
            }
        }
        if (best_g == gt.size()) continue;  // nothing unclaimed: term is 0
        if (best > 0.05) claimed[best_g] = true;
        sum += preds[oi].conf * best;
    }
    return sum / static_cast<double>(preds.size());
}

}  // namespace brute
