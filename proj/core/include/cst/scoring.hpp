#pragma once

#include <vector>

#include "cst/geometry.hpp"
#include "json.hpp"

namespace cst {

struct Prediction {
    Box2D box;
    double confidence = 0.0;
};

struct ScoreTerm {
    double confidence = 0.0;
    double matched_iou = 0.0;
    bool claimed = false;  // whether this prediction claimed a ground truth
};

struct ScoreReport {
    double score = 0.0;  // in [0, 1]
    std::vector<ScoreTerm> terms;
    int unmatched_gt = 0;
};

// Per-example score: predictions in descending confidence (ties: larger box
// area, then input order), each aligned to the unclaimed ground truth with
// highest IOU; IOU > 0.05 claims it; term = confidence * aligned IOU; the
// score is the mean term. No predictions: 0 with ground truth present, 1 on
// an empty scene.
ScoreReport score_example(const std::vector<Prediction>& predictions, const LabelSet& labels);

// score_after - score_before, in [-1, 1]
double delta(double score_after, double score_before);

// |delta| >= tau with tau > 0
bool is_sufficient(double delta_value, double tau);

void to_json(nlohmann::json& j, const Prediction& p);
void from_json(const nlohmann::json& j, Prediction& p);

}  // namespace cst
