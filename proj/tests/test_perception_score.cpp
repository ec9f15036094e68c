#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "cst/rng.hpp"
#include "cst/scoring.hpp"
#include "support/brute_force_score.hpp"

using namespace cst;

namespace {

LabelSet make_labels(const std::vector<Box2D>& boxes) {
    LabelSet l;
    for (std::size_t i = 0; i < boxes.size(); ++i)
        l.boxes.push_back(LabeledBox{static_cast<int>(i + 1), boxes[i], 10.0, 2000, 0.0});
    return l;
}

}  // namespace

TEST_CASE("golden: one perfect prediction scores 1") {
    const Box2D gt{100, 100, 200, 200};
    const auto report = score_example({Prediction{gt, 1.0}}, make_labels({gt}));
    CHECK(report.score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.terms.size() == 1);
    CHECK(report.terms[0].claimed);
    CHECK(report.unmatched_gt == 0);
}

TEST_CASE("golden: mean of confidence x IOU over all predictions") {
    // prediction 1: conf .9 against a GT with IOU .8; prediction 2: conf .5, IOU 0
    const Box2D gt{0, 0, 100, 80};
    // nested box: inter 6400, union 8000 -> IOU 0.8
    const Box2D hit{0, 0, 100, 64};
    REQUIRE(iou(hit, gt) == doctest::Approx(0.8).epsilon(1e-9));
    const Box2D miss{500, 500, 600, 600};

    const auto report =
        score_example({Prediction{hit, 0.9}, Prediction{miss, 0.5}}, make_labels({gt}));
    CHECK(report.score == doctest::Approx((0.9 * 0.8 + 0.0) / 2.0).epsilon(1e-9));
    CHECK(report.score == doctest::Approx(0.36).epsilon(1e-9));
}

TEST_CASE("golden: IOU at or below 0.05 still contributes but never claims") {
    const Box2D gt{0, 0, 100, 100};
    // overlap 10x50=500 over union 10000+5000-500=14500 -> IOU 0.0344...
    const Box2D graze{90, 50, 190, 150};
    const double g = iou(graze, gt);
    REQUIRE(g > 0.0);
    REQUIRE(g < 0.05);

    const auto report = score_example({Prediction{graze, 0.7}}, make_labels({gt}));
    CHECK(report.score == doctest::Approx(0.7 * g).epsilon(1e-9));
    CHECK_FALSE(report.terms[0].claimed);
    CHECK(report.unmatched_gt == 1);
}

TEST_CASE("empty-prediction conventions") {
    CHECK(score_example({}, make_labels({Box2D{0, 0, 10, 10}})).score == 0.0);
    CHECK(score_example({}, make_labels({})).score == 1.0);
}

TEST_CASE("claiming is exclusive: one GT cannot back two predictions") {
    const Box2D gt{0, 0, 100, 100};
    const auto report = score_example(
        {Prediction{gt, 0.9}, Prediction{gt, 0.8}}, make_labels({gt}));
    // second prediction finds no unclaimed GT, term 0
    CHECK(report.terms[0].matched_iou == doctest::Approx(1.0));
    CHECK(report.terms[1].matched_iou == 0.0);
    CHECK(report.score == doctest::Approx((0.9 + 0.0) / 2).epsilon(1e-9));
}

TEST_CASE("randomized agreement with the independent brute-force oracle") {
    RandomStream rng(20240601);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_gt = static_cast<int>(rng.uniform_index(5));
        const int n_pred = static_cast<int>(rng.uniform_index(7));

        std::vector<Box2D> gt;
        LabelSet labels;
        std::vector<brute::Box> bgt;
        for (int g = 0; g < n_gt; ++g) {
            const double x = rng.uniform(0, 1400), y = rng.uniform(0, 700);
            const double w = rng.uniform(20, 220), h = rng.uniform(20, 180);
            labels.boxes.push_back(LabeledBox{g + 1, Box2D{x, y, x + w, y + h}, 10.0, 2000, 0.0});
            bgt.push_back(brute::Box{x, y, x + w, y + h});
        }
        std::vector<Prediction> preds;
        std::vector<brute::Pred> bpreds;
        for (int p = 0; p < n_pred; ++p) {
            double x, y, w, h;
            if (!labels.boxes.empty() && rng.uniform() < 0.7) {
                const auto& base = labels.boxes[rng.uniform_index(labels.boxes.size())].box;
                x = base.x_min + rng.uniform(-40, 40);
                y = base.y_min + rng.uniform(-40, 40);
                w = base.width() * rng.uniform(0.6, 1.4);
                h = base.height() * rng.uniform(0.6, 1.4);
            } else {
                x = rng.uniform(0, 1400);
                y = rng.uniform(0, 700);
                w = rng.uniform(20, 220);
                h = rng.uniform(20, 180);
            }
            // quantized confidences exercise the tie-break path
            const double conf = std::round(rng.uniform(0.0, 1.0) * 10.0) / 10.0;
            preds.push_back(Prediction{Box2D{x, y, x + w, y + h}, conf});
            bpreds.push_back(brute::Pred{brute::Box{x, y, x + w, y + h}, conf});
        }
        const double lib = score_example(preds, labels).score;
        const double oracle = brute::score(bpreds, bgt);
        CHECK(lib == doctest::Approx(oracle).epsilon(1e-9));
    }
}

TEST_CASE("tie-break determinism: equal-confidence predictions permute safely") {
    const Box2D gt1{0, 0, 100, 100};
    const Box2D gt2{300, 0, 380, 100};
    const std::vector<Prediction> preds = {
        Prediction{Box2D{0, 0, 100, 100}, 0.8},
        Prediction{Box2D{300, 0, 380, 100}, 0.8},
    };
    const auto fwd = score_example(preds, make_labels({gt1, gt2}));
    const auto rev = score_example({preds[1], preds[0]}, make_labels({gt1, gt2}));
    CHECK(fwd.score == doctest::Approx(rev.score).epsilon(1e-12));
}

TEST_CASE("score stays in range on adversarial inputs") {
    RandomStream rng(31337);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<Prediction> preds;
        LabelSet labels;
        for (std::size_t p = rng.uniform_index(6); p > 0; --p) {
            const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
            preds.push_back(
                Prediction{Box2D{x, y, x + rng.uniform(1, 50), y + rng.uniform(1, 50)},
                           rng.uniform()});
        }
        for (std::size_t g = rng.uniform_index(6); g > 0; --g) {
            const double x = rng.uniform(0, 100), y = rng.uniform(0, 100);
            labels.boxes.push_back(LabeledBox{static_cast<int>(g),
                                              Box2D{x, y, x + rng.uniform(1, 50), y + rng.uniform(1, 50)},
                                              5.0, 1500, 0.0});
        }
        const auto r = score_example(preds, labels);
        CHECK(r.score >= 0.0);
        CHECK(r.score <= 1.0);
    }
}

TEST_CASE("delta algebra") {
    CHECK(delta(0.3, 0.9) == doctest::Approx(-0.6).epsilon(1e-12));
    CHECK(delta(0.42, 0.42) == 0.0);
    CHECK(delta(1.0, 0.0) == 1.0);
    RandomStream rng(7);
    for (int i = 0; i < 100; ++i) {
        const double d = delta(rng.uniform(), rng.uniform());
        CHECK(d >= -1.0);
        CHECK(d <= 1.0);
    }
}

TEST_CASE("sufficiency rule with inclusive boundary") {
    CHECK(is_sufficient(-0.25, 0.2));
    CHECK_FALSE(is_sufficient(0.19, 0.2));
    CHECK(is_sufficient(0.2, 0.2));
    CHECK(is_sufficient(-0.2, 0.2));
    CHECK_THROWS_AS(is_sufficient(0.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(is_sufficient(0.5, -0.1), std::invalid_argument);
}

TEST_CASE("malformed inputs are rejected") {
    CHECK_THROWS(score_example({Prediction{Box2D{10, 10, 5, 20}, 0.5}}, make_labels({})));
    CHECK_THROWS(score_example({Prediction{Box2D{0, 0, 10, 10}, 1.5}}, make_labels({})));
}
