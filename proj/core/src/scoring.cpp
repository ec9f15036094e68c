#include "cst/scoring.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace cst {

ScoreReport score_example(const std::vector<Prediction>& predictions, const LabelSet& labels) {
    for (const auto& p : predictions) {
        if (!(p.confidence >= 0.0 && p.confidence <= 1.0))
            throw std::invalid_argument("prediction confidence outside [0, 1]");
        if (!p.box.valid()) throw std::invalid_argument("malformed prediction box");
    }

    ScoreReport report;
    if (predictions.empty()) {
        report.unmatched_gt = static_cast<int>(labels.boxes.size());
        report.score = labels.boxes.empty() ? 1.0 : 0.0;
        return report;
    }

    std::vector<std::size_t> order(predictions.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (predictions[a].confidence != predictions[b].confidence)
            return predictions[a].confidence > predictions[b].confidence;
        return predictions[a].box.area() > predictions[b].box.area();
    });

    std::vector<bool> claimed(labels.boxes.size(), false);
    double total = 0.0;
    report.terms.resize(predictions.size());
    for (std::size_t oi : order) {
        const Prediction& pred = predictions[oi];
        double best_iou = 0.0;
        int best_gt = -1;
        for (std::size_t g = 0; g < labels.boxes.size(); ++g) {
            if (claimed[g]) continue;
            const double v = iou(pred.box, labels.boxes[g].box);
            if (best_gt < 0 || v > best_iou) {
                best_iou = v;
                best_gt = static_cast<int>(g);
            }
        }
        ScoreTerm term;
        term.confidence = pred.confidence;
        if (best_gt >= 0) {
            term.matched_iou = best_iou;
            if (best_iou > 0.05) {
                claimed[best_gt] = true;
                term.claimed = true;
            }
        }
        report.terms[oi] = term;
        total += term.confidence * term.matched_iou;
    }
    report.score = total / static_cast<double>(predictions.size());
    report.unmatched_gt =
        static_cast<int>(std::count(claimed.begin(), claimed.end(), false));
    return report;
}

double delta(double score_after, double score_before) { return score_after - score_before; }

bool is_sufficient(double delta_value, double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("tau must be > 0");
    return std::abs(delta_value) >= tau;
}

using nlohmann::json;

void to_json(json& j, const Prediction& p) {
    j = json{{"box", {p.box.x_min, p.box.y_min, p.box.x_max, p.box.y_max}},
             {"confidence", p.confidence}};
}

void from_json(const json& j, Prediction& p) {
    const auto& box = j.at("box");
    p.box = Box2D{box.at(0).get<double>(), box.at(1).get<double>(), box.at(2).get<double>(),
                  box.at(3).get<double>()};
    j.at("confidence").get_to(p.confidence);
}

}  // namespace cst
