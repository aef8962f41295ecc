#include "doctest.h"

#include "biobot/detection.hpp"
#include "biobot/kvfile.hpp"

#include <algorithm>
#include <cmath>

using namespace biobot;

namespace {

ThermalImage random_image(Rng& rng)
{
    ThermalImage img;
    for (double& v : img.px)
        v = 20.0 + 20.0 * uniform01(rng);
    return img;
}

struct Trained {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> val;
    SvmModel model;
};

const Trained& trained()
{
    static const Trained t = [] {
        Trained x;
        x.train = synth_dataset(load_recipe(std::string(BIOBOT_DATA_DIR) + "/recipes/train.recipe"), 1);
        x.val = synth_dataset(load_recipe(std::string(BIOBOT_DATA_DIR) + "/recipes/validation.recipe"), 2);
        x.model = train_detector(x.train, 4, KernelKind::Linear);
        return x;
    }();
    return t;
}

std::vector<Example> xor_set()
{
    return {{{1, 1}, 1}, {{-1, -1}, 1}, {{1, -1}, -1}, {{-1, 1}, -1}};
}

double train_accuracy(const SvmModel& m, const std::vector<Example>& d)
{
    int ok = 0;
    for (const auto& e : d)
        ok += (classify(m, e.x).label == DetectionLabel::Human) == (e.y > 0);
    return static_cast<double>(ok) / static_cast<double>(d.size());
}

} // namespace

TEST_CASE("median filter examples")
{
    const ThermalImage flat = uniform_image(30.0);
    CHECK(median3x3(flat) == flat);

    ThermalImage spot = uniform_image(25.0);
    spot.at(10, 12) = 40.0;
    CHECK(median3x3(spot) == uniform_image(25.0));
    CHECK(median3x3(median3x3(spot)) == median3x3(spot));

    ThermalImage checker;
    for (int r = 0; r < kThermalSize; ++r)
        for (int c = 0; c < kThermalSize; ++c)
            checker.at(r, c) = (r + c) % 2 ? 30.0 : 20.0;
    const ThermalImage m = median3x3(checker);
    for (int r = 1; r < kThermalSize - 1; ++r)
        for (int c = 1; c < kThermalSize - 1; ++c)
            CHECK(m.at(r, c) == checker.at(r, c)); // centre and diagonals are the 5-of-9 majority
}

TEST_CASE("median filter matches brute force")
{
    Rng rng = make_rng(1);
    for (int k = 0; k < 1000; ++k) {
        const ThermalImage img = random_image(rng);
        const ThermalImage m = median3x3(img);
        for (int r = 0; r < kThermalSize; ++r)
            for (int c = 0; c < kThermalSize; ++c) {
                std::vector<double> w;
                for (int dr = -1; dr <= 1; ++dr)
                    for (int dc = -1; dc <= 1; ++dc) {
                        const int rr = r + dr < 0 ? 0 : (r + dr > 31 ? 31 : r + dr);
                        const int cc = c + dc < 0 ? 0 : (c + dc > 31 ? 31 : c + dc);
                        w.push_back(img.at(rr, cc));
                    }
                std::sort(w.begin(), w.end());
                REQUIRE(m.at(r, c) == w[4]);
                CHECK(std::find(w.begin(), w.end(), m.at(r, c)) != w.end());
            }
    }
}

TEST_CASE("hot pixel gate")
{
    ThermalImage img = uniform_image(20.0);
    for (int i = 0; i < 16; ++i)
        img.px[static_cast<std::size_t>(i)] = 30.0;
    auto g = hot_pixel_gate(img);
    CHECK(g.active);
    CHECK(g.count == 16);
    img.px[0] = 20.0;
    g = hot_pixel_gate(img);
    CHECK_FALSE(g.active);
    CHECK(g.count == 15);

    ThermalImage hot = uniform_image(20.0);
    for (int i = 0; i < 100; ++i)
        hot.px[static_cast<std::size_t>(i)] = 45.0;
    CHECK_FALSE(hot_pixel_gate(hot).active);
    CHECK(hot_pixel_gate(hot).count == 0);

    ThermalImage edges = uniform_image(20.0);
    for (int i = 0; i < 8; ++i) {
        edges.px[static_cast<std::size_t>(i)] = 28.0;
        edges.px[static_cast<std::size_t>(100 + i)] = 38.0;
    }
    CHECK(hot_pixel_gate(edges).count == 16);
}

TEST_CASE("hog lengths and properties")
{
    CHECK(hog_length(2) == 8100);
    CHECK(hog_length(4) == 1764);
    CHECK(hog_length(8) == 324);
    CHECK_THROWS_AS(hog_length(3), std::invalid_argument);
    for (int cs : {2, 4, 8}) {
        const auto z = hog(uniform_image(26.0), cs);
        CHECK(z.size() == hog_length(cs));
        CHECK(std::all_of(z.begin(), z.end(), [](double v) { return v == 0.0; }));
    }
    Rng rng = make_rng(2);
    for (int k = 0; k < 50; ++k) {
        ThermalImage img = random_image(rng);
        ThermalImage shifted = img;
        for (double& v : shifted.px)
            v += 7.25;
        for (int cs : {2, 4, 8}) {
            const auto a = hog(img, cs);
            const auto b = hog(shifted, cs);
            for (std::size_t i = 0; i < a.size(); ++i)
                CHECK(std::abs(a[i] - b[i]) < 1e-9);
            for (std::size_t blk = 0; blk < a.size(); blk += 36) {
                double ss = 0.0;
                for (std::size_t i = blk; i < blk + 36; ++i)
                    ss += a[i] * a[i];
                CHECK(std::sqrt(ss) <= 1.0 + 1e-6);
            }
        }
    }
}

TEST_CASE("hog orientation voting")
{
    ThermalImage ramp;
    for (int r = 0; r < kThermalSize; ++r)
        for (int c = 0; c < kThermalSize; ++c)
            ramp.at(r, c) = 2.0 * c;
    // Horizontal gradient sits at 0 deg, halfway between the first and last bin centres.
    const auto h = hog(ramp, 8);
    for (std::size_t blk = 0; blk < h.size(); blk += 9) {
        CHECK(h[blk + 0] == doctest::Approx(h[blk + 8]));
        for (int b = 1; b < 8; ++b)
            CHECK(h[blk + static_cast<std::size_t>(b)] == 0.0);
    }
}

TEST_CASE("svm on tiny sets")
{
    const std::vector<Example> pair{{{-1.0}, -1}, {{1.0}, 1}};
    const SvmModel lin = train_svm(pair, KernelKind::Linear);
    CHECK(lin.weights[0] > 0.0);
    CHECK(train_accuracy(lin, pair) == 1.0);

    CHECK(train_accuracy(train_svm(xor_set(), KernelKind::Linear), xor_set()) <= 0.75);
    CHECK(train_accuracy(train_svm(xor_set(), KernelKind::Poly2), xor_set()) == 1.0);

    // No line through the plane gets all four XOR points right.
    int best = 0;
    for (int a = 0; a < 360; ++a)
        for (double b = -3.0; b <= 3.0; b += 0.05) {
            const double wx = std::cos(a * 0.0174533), wy = std::sin(a * 0.0174533);
            int ok = 0;
            for (const auto& e : xor_set())
                ok += ((wx * e.x[0] + wy * e.x[1] + b) > 0) == (e.y > 0);
            best = std::max(best, ok);
        }
    CHECK(best == 3);

    CHECK_THROWS_AS(train_svm({}, KernelKind::Linear), std::invalid_argument);
    CHECK_THROWS_AS(train_svm({{{1.0}, 1}, {{2.0}, 1}}, KernelKind::Linear), std::invalid_argument);
    CHECK_THROWS_AS(train_svm({{{1.0}, 1}, {{2.0, 1.0}, -1}}, KernelKind::Poly2), std::invalid_argument);
}

TEST_CASE("linear svm on separable data")
{
    Rng rng = make_rng(3);
    const std::vector<double> w{0.6, -0.8, 0.0, 0.0, 0.0};
    std::vector<Example> data;
    while (data.size() < 200) {
        std::vector<double> x(5);
        for (double& v : x)
            v = 4.0 * uniform01(rng) - 2.0;
        double s = 0.3;
        for (std::size_t k = 0; k < 5; ++k)
            s += w[k] * x[k];
        if (std::abs(s) < 0.5)
            continue;
        data.push_back({x, s > 0 ? 1 : -1});
    }
    TrainOptions o;
    o.C = 10.0;
    o.epochs = 200;
    const SvmModel m = train_svm(data, KernelKind::Linear, o);
    CHECK(train_accuracy(m, data) == 1.0);
    REQUIRE(m.objective_history.size() == 200);
    for (std::size_t i = 1; i < m.objective_history.size(); ++i)
        CHECK(m.objective_history[i] <= m.objective_history[i - 1]);
    CHECK(m.objective == doctest::Approx(linear_objective(m, data)));
}

TEST_CASE("dual solver satisfies the optimality conditions")
{
    Rng rng = make_rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Example> data;
        for (int i = 0; i < 30; ++i) {
            std::vector<double> x{2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0};
            data.push_back({x, x[0] * x[0] + 0.5 * x[1] > 0.3 + 0.3 * (uniform01(rng) - 0.5) ? 1 : -1});
        }
        if (std::none_of(data.begin(), data.end(), [](const Example& e) { return e.y > 0; }) ||
            std::all_of(data.begin(), data.end(), [](const Example& e) { return e.y > 0; }))
            continue;
        for (auto kernel : {KernelKind::Poly2, KernelKind::Poly3}) {
            TrainOptions o;
            o.C = 2.0;
            const SvmModel m = train_svm(data, kernel, o);
            double sum_ay = 0.0;
            for (double c : m.coef) {
                CHECK(std::abs(c) <= o.C + 1e-12);
                sum_ay += c;
            }
            CHECK(std::abs(sum_ay) < 1e-9);
            // Complementary slackness through the decision values.
            for (const auto& e : data) {
                const double f = e.y * classify(m, e.x).score;
                double alpha = 0.0;
                for (std::size_t i = 0; i < m.support.size(); ++i)
                    if (m.support[i] == e.x)
                        alpha = std::abs(m.coef[i]);
                if (alpha <= 0.0)
                    CHECK(f >= 1.0 - 1e-2);
                else if (alpha >= o.C)
                    CHECK(f <= 1.0 + 1e-2);
                else
                    CHECK(std::abs(f - 1.0) < 1e-2);
            }
        }
    }
}

TEST_CASE("dual solver matches a grid search on small sets")
{
    Rng rng = make_rng(5);
    const double C = 1.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 4 + trial % 3;
        std::vector<Example> data;
        for (int i = 0; i < n; ++i)
            data.push_back({{2.0 * uniform01(rng) - 1.0, 2.0 * uniform01(rng) - 1.0}, i % 2 ? 1 : -1});
        TrainOptions o;
        o.C = C;
        o.tolerance = 1e-8;
        const SvmModel m = train_svm(data, KernelKind::Poly2, o);

        // Grid over the first n-1 multipliers; the last is fixed by sum(alpha*y) = 0.
        const int steps = n <= 5 ? 40 : 16;
        double best = -1e300;
        std::vector<int> idx(static_cast<std::size_t>(n - 1), 0);
        for (;;) {
            std::vector<double> a(static_cast<std::size_t>(n));
            double s = 0.0;
            for (int i = 0; i < n - 1; ++i) {
                a[static_cast<std::size_t>(i)] = C * idx[static_cast<std::size_t>(i)] / steps;
                s += a[static_cast<std::size_t>(i)] * data[static_cast<std::size_t>(i)].y;
            }
            a[static_cast<std::size_t>(n - 1)] = -s * data[static_cast<std::size_t>(n - 1)].y;
            if (a.back() >= 0.0 && a.back() <= C) {
                double obj = 0.0;
                for (int i = 0; i < n; ++i) {
                    obj += a[static_cast<std::size_t>(i)];
                    for (int j = 0; j < n; ++j)
                        obj -= 0.5 * a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(j)] *
                               data[static_cast<std::size_t>(i)].y * data[static_cast<std::size_t>(j)].y *
                               kernel_value(KernelKind::Poly2, data[static_cast<std::size_t>(i)].x,
                                            data[static_cast<std::size_t>(j)].x);
                }
                best = std::max(best, obj);
            }
            int k = 0;
            while (k < n - 1 && ++idx[static_cast<std::size_t>(k)] > steps)
                idx[static_cast<std::size_t>(k++)] = 0;
            if (k == n - 1)
                break;
        }
        CHECK(m.objective >= best - 1e-9);
        CHECK(m.objective <= best + 0.05 * std::abs(best) + 0.05);
    }
}

TEST_CASE("classify examples and cost")
{
    SvmModel m;
    m.feature_length = 2;
    m.weights = {1.0, 0.0};
    m.bias = -0.5;
    auto c = classify(m, std::vector<double>{1.0, 0.0});
    CHECK(c.score == 0.5);
    CHECK(c.label == DetectionLabel::Human);
    c = classify(m, std::vector<double>{0.5, 3.0});
    CHECK(c.score == 0.0);
    CHECK(c.label == DetectionLabel::NonHuman);
    m.weights = {0.0, 0.0};
    m.bias = -1.0;
    CHECK(classify(m, std::vector<double>{9.0, -4.0}).score == -1.0);
    CHECK_THROWS_AS(classify(m, std::vector<double>{1.0}), std::invalid_argument);

    // Linear inference cost depends on the feature length only.
    Rng rng = make_rng(6);
    for (std::size_t n : {10u, 100u}) {
        std::vector<Example> data;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> x(1764);
            for (double& v : x)
                v = uniform01(rng);
            data.push_back({x, i % 2 ? 1 : -1});
        }
        TrainOptions o;
        o.epochs = 2;
        const SvmModel lin = train_svm(data, KernelKind::Linear, o);
        std::uint64_t madds = 0;
        classify(lin, data[0].x, &madds);
        CHECK(madds == 1765);
    }
}

TEST_CASE("detection pipeline")
{
    const Trained& t = trained();
    std::uint64_t madds = 0;
    const auto none = detect(uniform_image(26.0), t.model, &madds);
    CHECK(none.label == DetectionLabel::NoCandidate);
    CHECK_FALSE(none.gate_active);
    CHECK_FALSE(none.score);
    CHECK(madds == 0);

    Rng rng = make_rng(7);
    SceneSpec s;
    s.ambient_c = 26.0;
    s.noise_sd = 0.2;
    s.subjects.push_back(make_subject(find_subject("human3"), 0.0, 1.0, rng));
    const auto human = detect(render_frame(s, rng), t.model, &madds);
    CHECK(human.gate_active);
    CHECK(human.label == DetectionLabel::Human);
    CHECK(madds == 1765);

    SceneSpec o;
    o.ambient_c = 26.0;
    o.noise_sd = 0.2;
    o.subjects.push_back(make_subject(find_subject("microwave"), 0.0, 1.0, rng));
    o.subjects.back().parts = {{PrimitiveShape::Rect, 0, 16, 24, 16, 33.0}};
    const auto obj = detect(render_frame(o, rng), t.model);
    CHECK(obj.gate_active);
    CHECK(obj.label == DetectionLabel::NonHuman);
}

TEST_CASE("evaluation")
{
    const Trained& t = trained();
    const EvalMetrics tr = evaluate(t.model, t.train);
    CHECK(tr.accuracy == 1.0);
    const EvalMetrics v = evaluate(t.model, t.val);
    CHECK(v.n == t.val.size());
    CHECK(v.tp + v.fn + v.tn + v.fp == v.n);
    CHECK(v.accuracy >= 0.85);
    CHECK(v.recall_by_distance.size() == 11);
    CHECK_THROWS_AS(evaluate(t.model, {}), std::invalid_argument);
}

TEST_CASE("model files round trip")
{
    const Trained& t = trained();
    const SvmModel back = model_from_text(model_to_text(t.model));
    CHECK(back.weights == t.model.weights);
    CHECK(back.bias == t.model.bias);
    CHECK(back.input_mean == t.model.input_mean);
    CHECK(back.cell_size == 4);

    const SvmModel poly = train_svm(xor_set(), KernelKind::Poly3);
    const std::string text = model_to_text(poly);
    const SvmModel pb = model_from_text(text);
    CHECK(pb.support == poly.support);
    CHECK(pb.coef == poly.coef);
    CHECK(classify(pb, std::vector<double>{1, 1}).score == classify(poly, std::vector<double>{1, 1}).score);

    CHECK_THROWS_AS(model_from_text("not a model\n"), FormatError);
    CHECK_THROWS_WITH_AS(model_from_text("biobot-svm 1\nkernal = linear\n"), doctest::Contains("kernal"), FormatError);
    std::string bad = model_to_text(t.model);
    bad.replace(bad.find("feature_length = 1764"), 21, "feature_length = 1763");
    CHECK_THROWS_AS(model_from_text(bad), FormatError);
}
