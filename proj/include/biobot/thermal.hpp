#pragma once
/**
 * @file thermal.hpp
 * @brief Synthetic 32x32 thermopile frames and labeled dataset synthesis.
 *
 * Camera frame: optical axis horizontal, column 0 looks left, row 0 looks up,
 * 2.8125 deg per pixel. Subjects are flat billboards facing the camera, built
 * from ellipses and rectangles in a (u = lateral cm, z = height above floor cm)
 * plane. A subject's turntable rotation is baked into its primitives.
 */

#include "biobot/rng.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biobot {

inline constexpr int kThermalSize = 32;
inline constexpr int kThermalPixels = kThermalSize * kThermalSize;
inline constexpr double kThermalFovDeg = 90.0;
inline constexpr double kThermalPixelDeg = kThermalFovDeg / kThermalSize;

struct ThermalImage {
    std::array<double, kThermalPixels> px{};
    double distance_m{0.0};
    std::string subject_id;
    double timestamp_s{0.0};

    double& at(int row, int col) { return px[static_cast<std::size_t>(row * kThermalSize + col)]; }
    double at(int row, int col) const { return px[static_cast<std::size_t>(row * kThermalSize + col)]; }
    bool operator==(const ThermalImage&) const = default;
};

/// Image with every pixel at @p value.
ThermalImage uniform_image(double value);

enum class SubjectKind { Human, HotObject };
std::string_view to_string(SubjectKind k);

enum class PrimitiveShape { Ellipse, Rect };

struct Primitive {
    PrimitiveShape shape{PrimitiveShape::Rect};
    double u_cm{0.0};      ///< centre, lateral (positive = camera left)
    double z_cm{0.0};      ///< centre, height above the floor
    double half_w_cm{1.0};
    double half_h_cm{1.0};
    double temp_c{30.0};

    bool contains(double u, double z) const;
};

struct ThermalSubject {
    std::string id;
    SubjectKind kind{SubjectKind::HotObject};
    std::vector<Primitive> parts;
    double distance_m{1.0}; ///< along the line of sight to the billboard
    double bearing_deg{0.0}; ///< from the optical axis, positive = left
};

struct SceneSpec {
    double ambient_c{26.0};
    double ambient_sd{0.0};   ///< per-pixel background variation
    double camera_height_cm{3.0};
    std::vector<ThermalSubject> subjects;
    double noise_sd{0.0};     ///< sensor noise on every pixel
    double salt_pepper{0.0};  ///< fraction of pixels replaced by outliers
    double outlier_delta_c{20.0};
    double timestamp_s{0.0};
};

/// Throws std::invalid_argument for a subject at or behind the camera plane or invalid noise settings.
ThermalImage render_frame(const SceneSpec& scene, Rng& rng);

/// Catalog entry; dimensions in cm (width, height, depth).
struct SubjectTemplate {
    std::string id;
    SubjectKind kind{SubjectKind::HotObject};
    double width_cm{0.0};
    double height_cm{0.0};
    double depth_cm{0.0};
    double height_max_cm{0.0}; ///< humans: standing height range upper end
};

const std::vector<SubjectTemplate>& subject_catalog();
/// Throws std::invalid_argument for an unknown id.
const SubjectTemplate& find_subject(std::string_view id);

/// Builds a posed subject. Surface temperatures and posture are drawn from @p rng.
ThermalSubject make_subject(const SubjectTemplate& tpl, double rotation_deg, double distance_m, Rng& rng);

// Datasets

struct LabeledImage {
    ThermalImage image;
    bool human{false};
};

/**
 * Dataset recipe. Two modes:
 * - grid: every subject x distance x `rotations` evenly spaced turntable angles;
 * - sampled: `human_images` / `nonhuman_images` scaled by `scale`, spread round-robin
 *   over subject x distance with random rotations.
 */
struct DatasetRecipe {
    std::string name{"dataset"};
    std::vector<std::string> subjects;
    std::vector<double> distances_m;
    int rotations{0};
    double human_images{0.0};
    double nonhuman_images{0.0};
    double scale{1.0};
    double ambient_min_c{25.0};
    double ambient_max_c{27.0};
    double ambient_sd{0.3};
    double camera_height_min_cm{0.0};
    double camera_height_max_cm{30.0};
    double bearing_jitter_deg{5.0};
    double noise_sd{0.2};
    double salt_pepper{0.01};
};

DatasetRecipe recipe_from_text(std::string_view text, std::string_view source = "<recipe>");
DatasetRecipe load_recipe(const std::string& path);
std::string recipe_to_text(const DatasetRecipe& r);

/// Image i uses stream (seed, i). Throws std::invalid_argument for an empty recipe.
std::vector<LabeledImage> synth_dataset(const DatasetRecipe& recipe, std::uint64_t seed);

// Files

/// 32 lines of 32 comma-separated values; leading '#' lines carry metadata.
std::string image_to_text(const ThermalImage& img);
ThermalImage image_from_text(std::string_view text, std::string_view source = "<image>");

struct ManifestEntry {
    std::string path;
    bool human{false};
    double distance_m{0.0};
    std::string subject_id;
};

/// Writes images under @p dir plus manifest.csv; returns the manifest path.
std::string write_dataset(const std::vector<LabeledImage>& data, const std::string& dir);
std::vector<ManifestEntry> read_manifest(const std::string& path);
/// Loads every image a manifest lists; relative paths resolve against the manifest's directory.
std::vector<LabeledImage> load_dataset(const std::string& manifest_path);

} // namespace biobot
