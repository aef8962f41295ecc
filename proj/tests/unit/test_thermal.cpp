#include "doctest.h"

#include "biobot/detection.hpp"
#include "biobot/geometry.hpp"
#include "biobot/kvfile.hpp"
#include "biobot/thermal.hpp"

#include <cmath>
#include <filesystem>
#include <set>

using namespace biobot;

namespace {

ThermalSubject block(double half_w, double half_h, double z, double distance_m, double temp = 36.0)
{
    ThermalSubject s;
    s.id = "block";
    s.parts.push_back({PrimitiveShape::Rect, 0.0, z, half_w, half_h, temp});
    s.distance_m = distance_m;
    return s;
}

// Covered area in pixel units of a noise-free frame.
double footprint(const ThermalImage& img, double ambient, double temp)
{
    double a = 0.0;
    for (double v : img.px)
        a += (v - ambient) / (temp - ambient);
    return a;
}

} // namespace

TEST_CASE("empty scene renders ambient")
{
    Rng rng = make_rng(1);
    SceneSpec scene;
    scene.ambient_c = 26.0;
    const ThermalImage img = render_frame(scene, rng);
    for (double v : img.px)
        CHECK(v == 26.0);
}

TEST_CASE("projection geometry")
{
    Rng rng = make_rng(2);
    SceneSpec scene;
    scene.ambient_c = 26.0;
    scene.camera_height_cm = 100.0;
    scene.subjects.push_back(block(10.0, 45.0, 100.0, 1.0));
    const ThermalImage img = render_frame(scene, rng);
    double column = 0.0;
    for (int r = 0; r < kThermalSize; ++r)
        column += (img.at(r, 15) - 26.0) / 10.0;
    const double expected = 2.0 * rad2deg(std::atan(0.45 / 1.0)) / kThermalPixelDeg;
    CHECK(expected == doctest::Approx(17.2).epsilon(0.01));
    CHECK(std::abs(column - expected) < 0.4);

    auto area_at = [&](double d) {
        SceneSpec s;
        s.ambient_c = 26.0;
        s.camera_height_cm = 50.0;
        s.subjects.push_back(block(10.0, 10.0, 50.0, d));
        return footprint(render_frame(s, rng), 26.0, 36.0);
    };
    const double ratio = std::sqrt(area_at(0.5) / area_at(1.5));
    CHECK(ratio > 2.7);
    CHECK(ratio < 3.3);
}

TEST_CASE("footprint shrinks with distance")
{
    Rng build = make_rng(3);
    const ThermalSubject human = make_subject(find_subject("human1"), 30.0, 1.0, build);
    double last = 1e9;
    for (double d = 0.5; d <= 3.0 + 1e-9; d += 0.25) {
        SceneSpec s;
        s.ambient_c = 20.0;
        s.camera_height_cm = 60.0;
        ThermalSubject h = human;
        h.distance_m = d;
        s.subjects.push_back(h);
        Rng rng = make_rng(4);
        const ThermalImage img = render_frame(s, rng);
        double a = 0.0;
        for (double v : img.px)
            a += v - 20.0;
        CHECK(a < last);
        last = a;
    }
}

TEST_CASE("rendering determinism and seed independence without noise")
{
    Rng b = make_rng(5);
    SceneSpec s;
    s.subjects.push_back(make_subject(find_subject("oven"), 10.0, 0.8, b));
    Rng r1 = make_rng(6), r2 = make_rng(7);
    CHECK(render_frame(s, r1) == render_frame(s, r2));
    s.noise_sd = 0.2;
    s.salt_pepper = 0.01;
    Rng r3 = make_rng(8), r4 = make_rng(8), r5 = make_rng(9);
    const ThermalImage a = render_frame(s, r3);
    CHECK(a == render_frame(s, r4));
    CHECK_FALSE(a == render_frame(s, r5));
}

TEST_CASE("subjects behind the camera are rejected")
{
    Rng rng = make_rng(10);
    SceneSpec s;
    s.subjects.push_back(block(10, 10, 0, 1.0));
    s.subjects.back().bearing_deg = 120.0;
    CHECK_THROWS_AS(render_frame(s, rng), std::invalid_argument);
    s.subjects.back().bearing_deg = 0.0;
    s.subjects.back().distance_m = 0.0;
    CHECK_THROWS_AS(render_frame(s, rng), std::invalid_argument);
}

TEST_CASE("nearest subject occludes")
{
    Rng rng = make_rng(11);
    SceneSpec s;
    s.ambient_c = 20.0;
    s.camera_height_cm = 0.0;
    s.subjects.push_back(block(400, 400, 0, 2.0, 40.0));
    s.subjects.push_back(block(5, 5, 0, 0.5, 30.0));
    const ThermalImage img = render_frame(s, rng);
    CHECK(img.at(15, 15) == doctest::Approx(30.0));
    CHECK(img.at(0, 0) == doctest::Approx(40.0));
    CHECK(img.subject_id == "block");
    CHECK(img.distance_m == 0.5);
}

TEST_CASE("human frames pass the gate")
{
    const DatasetRecipe r = load_recipe(std::string(BIOBOT_DATA_DIR) + "/recipes/validation.recipe");
    int humans = 0;
    for (const auto& li : synth_dataset(r, 12)) {
        if (!li.human)
            continue;
        ++humans;
        CHECK(li.image.distance_m <= 1.5 + 1e-9);
        CHECK(hot_pixel_gate(li.image).count > kGateThreshold);
    }
    CHECK(humans > 100);
}

TEST_CASE("dataset recipes")
{
    const DatasetRecipe train = load_recipe(std::string(BIOBOT_DATA_DIR) + "/recipes/train.recipe");
    const DatasetRecipe val = load_recipe(std::string(BIOBOT_DATA_DIR) + "/recipes/validation.recipe");
    const auto data = synth_dataset(train, 1);
    std::size_t h = 0, nh = 0;
    std::set<double> train_d;
    for (const auto& li : data) {
        (li.human ? h : nh) += 1;
        train_d.insert(li.image.distance_m);
    }
    CHECK(h == 559);
    CHECK(nh == 575);
    CHECK(train_d == std::set<double>{0.5, 1.0, 1.5});

    std::set<long long> bins;
    for (const auto& li : synth_dataset(val, 2))
        bins.insert(std::llround(li.image.distance_m * 10));
    CHECK(bins.size() == 11);

    for (const auto& a : train.subjects)
        for (const auto& b : val.subjects)
            CHECK(a != b);

    DatasetRecipe one;
    one.subjects = {"human1"};
    one.distances_m = {1.0};
    one.rotations = 1;
    CHECK(synth_dataset(one, 3).size() == 1);
    CHECK_THROWS_AS(synth_dataset(DatasetRecipe{}, 3), std::invalid_argument);
    CHECK(recipe_from_text(recipe_to_text(train)).subjects == train.subjects);
    CHECK_THROWS_WITH_AS(recipe_from_text("subjects = oven\ndistances_m = 1\nsacle = 2\n"), doctest::Contains("sacle"),
                         FormatError);
    CHECK_THROWS_AS(recipe_from_text("subjects = toaster\ndistances_m = 1\n"), FormatError);
}

TEST_CASE("image and manifest files")
{
    Rng rng = make_rng(13);
    SceneSpec s;
    s.noise_sd = 0.3;
    s.subjects.push_back(make_subject(find_subject("human2"), 0.0, 1.2, rng));
    ThermalImage img = render_frame(s, rng);
    img.timestamp_s = 4.5;
    CHECK(image_from_text(image_to_text(img)) == img);
    CHECK_THROWS_AS(image_from_text("1,2,3\n"), FormatError);

    const auto dir = std::filesystem::temp_directory_path() / "biobot_manifest_test";
    std::filesystem::remove_all(dir);
    DatasetRecipe r;
    r.subjects = {"human1", "lamp"};
    r.distances_m = {0.5, 1.0};
    r.rotations = 2;
    const auto data = synth_dataset(r, 4);
    const auto back = load_dataset(write_dataset(data, dir.string()));
    REQUIRE(back.size() == data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        CHECK(back[i].human == data[i].human);
        CHECK(back[i].image == data[i].image);
    }
    std::filesystem::remove_all(dir);
}
