#pragma once
/**
 * @file detection.hpp
 * @brief Frame-level human detection: 3x3 median, hot-pixel gate, HOG, SVM.
 */

#include "biobot/thermal.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biobot {

/// Edge-replicated 3x3 median.
ThermalImage median3x3(const ThermalImage& img);

inline constexpr double kHumanBandMinC = 28.0;
inline constexpr double kHumanBandMaxC = 38.0;
inline constexpr int kGateThreshold = 15;

struct GateResult {
    bool active{false};
    int count{0};
};

/// Counts pixels in [28, 38] C; active iff the count exceeds 15.
GateResult hot_pixel_gate(const ThermalImage& img);

inline constexpr int kHogBins = 9;
inline constexpr int kHogBlockCells = 2;

/// Feature length for a 32x32 image; throws std::invalid_argument unless cell_size is 2, 4 or 8.
std::size_t hog_length(int cell_size);

/// HOG over a row-major 32x32 field: centred gradients, 9 unsigned bins with
/// bilinear voting, 2x2-cell blocks at stride one, L2 block normalisation.
std::vector<double> hog(std::span<const double> field, int cell_size);
std::vector<double> hog(const ThermalImage& img, int cell_size);

enum class KernelKind { Linear, Poly2, Poly3 };
std::string_view to_string(KernelKind k);
KernelKind kernel_from_string(std::string_view s);
int kernel_degree(KernelKind k);

struct Example {
    std::vector<double> x;
    int y{1}; ///< +1 human, -1 non-human
};

struct TrainOptions {
    double C{1.0};
    int epochs{60};               ///< linear solver passes
    std::uint64_t seed{1};        ///< linear solver shuffling
    double tolerance{1e-3};       ///< dual solver KKT tolerance
    long long max_iterations{2'000'000};
};

struct SvmModel {
    KernelKind kernel{KernelKind::Linear};
    int cell_size{4};
    double C{1.0};
    std::size_t feature_length{0};
    double input_mean{0.0}; ///< temperature standardisation applied before HOG
    double input_sd{1.0};
    double bias{0.0};
    std::vector<double> weights;                  ///< Linear
    std::vector<std::vector<double>> support;     ///< Poly
    std::vector<double> coef;                     ///< Poly: alpha_i * y_i
    double objective{0.0};
    long long iterations{0};
    std::vector<double> objective_history; ///< Linear: primal objective at each epoch's averaged iterate
    std::size_t training_examples{0};
};

/// Throws std::invalid_argument for an empty or single-class set or mismatched lengths.
SvmModel train_svm(const std::vector<Example>& data, KernelKind kernel, const TrainOptions& opts = {});

/// Regularised hinge objective 0.5|w|^2 + C * sum(hinge) of a linear model.
double linear_objective(const SvmModel& m, const std::vector<Example>& data);
/// Dual objective sum(alpha) - 0.5 sum alpha_i alpha_j y_i y_j K_ij of a kernel model.
double dual_objective(const SvmModel& m);
double kernel_value(KernelKind k, std::span<const double> a, std::span<const double> b);

enum class DetectionLabel { Human, NonHuman, NoCandidate };
std::string_view to_string(DetectionLabel l);
DetectionLabel detection_label_from_string(std::string_view s);

struct Classification {
    double score{0.0};
    DetectionLabel label{DetectionLabel::NonHuman};
};

/// score > 0 is Human. @p madds, when given, is incremented by the multiply-adds performed.
Classification classify(const SvmModel& m, std::span<const double> x, std::uint64_t* madds = nullptr);

struct DetectionResult {
    bool gate_active{false};
    int hot_pixel_count{0};
    std::optional<double> score;
    DetectionLabel label{DetectionLabel::NoCandidate};
};

/// Standardised HOG features of an (already filtered) image under the model's settings.
std::vector<double> model_features(const SvmModel& m, const ThermalImage& img);

/// median -> gate -> (if active) HOG -> classify.
DetectionResult detect(const ThermalImage& img, const SvmModel& m, std::uint64_t* madds = nullptr);

/// Mean and sd of every pixel of every (filtered) image.
std::pair<double, double> dataset_standardisation(const std::vector<LabeledImage>& data);
/// Median-filtered, standardised HOG examples.
std::vector<Example> dataset_features(const std::vector<LabeledImage>& data, int cell_size, double mean, double sd);

/// Filters, standardises and trains on a labeled image set.
SvmModel train_detector(const std::vector<LabeledImage>& data, int cell_size, KernelKind kernel,
                        const TrainOptions& opts = {});

struct DistanceBin {
    double distance_m{0.0};
    std::size_t positives{0};
    std::size_t detected{0};
    double recall() const { return positives ? static_cast<double>(detected) / positives : 0.0; }
};

struct EvalMetrics {
    std::size_t n{0};
    std::size_t tp{0}, fn{0}, tn{0}, fp{0};
    std::size_t gated_out{0}; ///< NoCandidate frames
    double accuracy{0.0};
    double positive_accuracy{0.0}; ///< recall on human frames
    double negative_accuracy{0.0}; ///< specificity on non-human frames
    double balanced_accuracy{0.0};
    std::vector<DistanceBin> recall_by_distance;
};

/// NoCandidate counts as a NonHuman prediction. Throws std::invalid_argument for an empty set.
EvalMetrics evaluate(const SvmModel& m, const std::vector<LabeledImage>& data);

std::string model_to_text(const SvmModel& m);
SvmModel model_from_text(std::string_view text, std::string_view source = "<model>");
SvmModel load_model(const std::string& path);
void save_model(const SvmModel& m, const std::string& path);

} // namespace biobot
