#include "biobot/detection.hpp"

#include "biobot/geometry.hpp"
#include "biobot/kvfile.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace biobot {

ThermalImage median3x3(const ThermalImage& img)
{
    ThermalImage out = img;
    std::array<double, 9> w{};
    for (int r = 0; r < kThermalSize; ++r)
        for (int c = 0; c < kThermalSize; ++c) {
            int k = 0;
            for (int dr = -1; dr <= 1; ++dr)
                for (int dc = -1; dc <= 1; ++dc)
                    w[static_cast<std::size_t>(k++)] =
                        img.at(std::clamp(r + dr, 0, kThermalSize - 1), std::clamp(c + dc, 0, kThermalSize - 1));
            std::nth_element(w.begin(), w.begin() + 4, w.end());
            out.at(r, c) = w[4];
        }
    return out;
}

GateResult hot_pixel_gate(const ThermalImage& img)
{
    GateResult g;
    for (double v : img.px)
        g.count += (v >= kHumanBandMinC && v <= kHumanBandMaxC) ? 1 : 0;
    g.active = g.count > kGateThreshold;
    return g;
}

std::size_t hog_length(int cell_size)
{
    if (cell_size != 2 && cell_size != 4 && cell_size != 8)
        throw std::invalid_argument("hog: cell size must be 2, 4 or 8, got " + std::to_string(cell_size));
    const std::size_t cells = static_cast<std::size_t>(kThermalSize / cell_size);
    const std::size_t blocks = (cells - kHogBlockCells + 1) * (cells - kHogBlockCells + 1);
    return blocks * kHogBlockCells * kHogBlockCells * kHogBins;
}

std::vector<double> hog(std::span<const double> field, int cell_size)
{
    const std::size_t len = hog_length(cell_size);
    if (field.size() != static_cast<std::size_t>(kThermalPixels))
        throw std::invalid_argument("hog: expected a 32x32 field");
    const int n = kThermalSize;
    const int cells = n / cell_size;
    auto at = [&](int r, int c) {
        return field[static_cast<std::size_t>(std::clamp(r, 0, n - 1) * n + std::clamp(c, 0, n - 1))];
    };
    std::vector<double> hist(static_cast<std::size_t>(cells * cells * kHogBins), 0.0);
    const double bin_width = 180.0 / kHogBins;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const double gx = at(r, c + 1) - at(r, c - 1);
            const double gy = at(r + 1, c) - at(r - 1, c);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0)
                continue;
            double ang = rad2deg(std::atan2(gy, gx));
            ang = std::fmod(ang + 180.0, 180.0);
            const double pos = ang / bin_width - 0.5;
            const double lo = std::floor(pos);
            const double f = pos - lo;
            const int b0 = (static_cast<int>(lo) + kHogBins) % kHogBins;
            const int b1 = (b0 + 1) % kHogBins;
            double* h = &hist[static_cast<std::size_t>(((r / cell_size) * cells + c / cell_size) * kHogBins)];
            h[b0] += mag * (1.0 - f);
            h[b1] += mag * f;
        }
    std::vector<double> out;
    out.reserve(len);
    constexpr double eps2 = 1e-6;
    for (int by = 0; by + kHogBlockCells <= cells; ++by)
        for (int bx = 0; bx + kHogBlockCells <= cells; ++bx) {
            const std::size_t start = out.size();
            for (int cy = by; cy < by + kHogBlockCells; ++cy)
                for (int cx = bx; cx < bx + kHogBlockCells; ++cx) {
                    const double* h = &hist[static_cast<std::size_t>((cy * cells + cx) * kHogBins)];
                    out.insert(out.end(), h, h + kHogBins);
                }
            double ss = 0.0;
            for (std::size_t i = start; i < out.size(); ++i)
                ss += out[i] * out[i];
            const double norm = std::sqrt(ss + eps2);
            for (std::size_t i = start; i < out.size(); ++i)
                out[i] /= norm;
        }
    return out;
}

std::vector<double> hog(const ThermalImage& img, int cell_size) { return hog(std::span<const double>(img.px), cell_size); }

std::string_view to_string(KernelKind k)
{
    switch (k) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Poly2: return "poly2";
    case KernelKind::Poly3: return "poly3";
    }
    return "?";
}

KernelKind kernel_from_string(std::string_view s)
{
    if (s == "linear")
        return KernelKind::Linear;
    if (s == "poly2" || s == "quadratic")
        return KernelKind::Poly2;
    if (s == "poly3" || s == "cubic")
        return KernelKind::Poly3;
    throw FormatError("unknown kernel '" + std::string(s) + "' (expected linear, poly2 or poly3)");
}

int kernel_degree(KernelKind k) { return k == KernelKind::Poly2 ? 2 : k == KernelKind::Poly3 ? 3 : 1; }

namespace {

double dot(std::span<const double> a, std::span<const double> b)
{
    return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

void check_training_set(const std::vector<Example>& data)
{
    if (data.empty())
        throw std::invalid_argument("train_svm: empty training set");
    bool pos = false, neg = false;
    for (const auto& e : data) {
        if (e.y != 1 && e.y != -1)
            throw std::invalid_argument("train_svm: labels must be +1 or -1");
        if (e.x.size() != data.front().x.size())
            throw std::invalid_argument("train_svm: inconsistent feature lengths");
        pos = pos || e.y == 1;
        neg = neg || e.y == -1;
    }
    if (!pos || !neg)
        throw std::invalid_argument("train_svm: both classes are required");
}

// Pegasos on the bias-augmented problem. After each epoch the candidate is the
// average of the iterates over the last half of the epochs so far; the model
// keeps the best candidate seen, so objective_history never increases.
SvmModel train_linear(const std::vector<Example>& data, const TrainOptions& o)
{
    const std::size_t n = data.size();
    const std::size_t d = data.front().x.size();
    const double lambda = 1.0 / (o.C * static_cast<double>(n));
    const double radius = 1.0 / std::sqrt(lambda);
    std::vector<double> w(d + 1, 0.0);
    std::vector<std::vector<double>> epoch_sums;
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = make_rng(o.seed, 0x5eed);
    SvmModel m;
    m.kernel = KernelKind::Linear;
    m.C = o.C;
    m.feature_length = d;
    m.training_examples = n;
    m.weights.assign(d, 0.0);
    SvmModel cand = m;
    long long t = 0;
    for (int epoch = 0; epoch < o.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<double> sum(d + 1, 0.0);
        for (std::size_t idx : order) {
            ++t;
            const Example& e = data[idx];
            const double eta = 1.0 / (lambda * static_cast<double>(t));
            const double margin = e.y * (dot(std::span<const double>(w).first(d), e.x) + w[d]);
            const double shrink = 1.0 - eta * lambda;
            for (double& v : w)
                v *= shrink;
            if (margin < 1.0) {
                for (std::size_t k = 0; k < d; ++k)
                    w[k] += eta * e.y * e.x[k];
                w[d] += eta * e.y;
            }
            const double nrm = std::sqrt(dot(w, w));
            if (nrm > radius)
                for (double& v : w)
                    v *= radius / nrm;
            for (std::size_t k = 0; k <= d; ++k)
                sum[k] += w[k];
        }
        epoch_sums.push_back(std::move(sum));
        const std::size_t first = epoch_sums.size() / 2;
        const double count = static_cast<double>((epoch_sums.size() - first) * n);
        for (std::size_t k = 0; k < d; ++k) {
            double acc = 0.0;
            for (std::size_t j = first; j < epoch_sums.size(); ++j)
                acc += epoch_sums[j][k];
            cand.weights[k] = acc / count;
        }
        double b = 0.0;
        for (std::size_t j = first; j < epoch_sums.size(); ++j)
            b += epoch_sums[j][d];
        cand.bias = b / count;
        const double obj = linear_objective(cand, data);
        if (m.objective_history.empty() || obj <= m.objective_history.back()) {
            m.weights = cand.weights;
            m.bias = cand.bias;
            m.objective_history.push_back(obj);
        } else {
            m.objective_history.push_back(m.objective_history.back());
        }
    }
    m.iterations = t;
    m.objective = m.objective_history.empty() ? linear_objective(m, data) : m.objective_history.back();
    return m;
}

// Dual coordinate ascent over maximal violating pairs.
SvmModel train_kernel(const std::vector<Example>& data, KernelKind kernel, const TrainOptions& o)
{
    const std::size_t n = data.size();
    std::vector<double> Q(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            Q[i * n + j] = Q[j * n + i] = data[i].y * data[j].y * kernel_value(kernel, data[i].x, data[j].x);
    const double C = o.C;
    std::vector<double> alpha(n, 0.0), G(n, -1.0);
    auto y = [&](std::size_t i) { return static_cast<double>(data[i].y); };
    auto up = [&](std::size_t i) { return (y(i) > 0 && alpha[i] < C) || (y(i) < 0 && alpha[i] > 0); };
    auto low = [&](std::size_t i) { return (y(i) > 0 && alpha[i] > 0) || (y(i) < 0 && alpha[i] < C); };
    long long it = 0;
    for (; it < o.max_iterations; ++it) {
        double gmax = -HUGE_VAL, gmin = HUGE_VAL;
        std::size_t i = n, j = n;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = -y(k) * G[k];
            if (up(k) && v > gmax) {
                gmax = v;
                i = k;
            }
            if (low(k) && v < gmin) {
                gmin = v;
                j = k;
            }
        }
        if (i == n || j == n || gmax - gmin < o.tolerance)
            break;
        const double* Qi = &Q[i * n];
        const double* Qj = &Q[j * n];
        const double ai = alpha[i], aj = alpha[j];
        if (y(i) != y(j)) {
            const double quad = std::max(Qi[i] + Qj[j] + 2.0 * Qi[j], 1e-12);
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0 && alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = diff;
            } else if (diff <= 0 && alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = -diff;
            }
            if (diff > 0 && alpha[i] > C) {
                alpha[i] = C;
                alpha[j] = C - diff;
            } else if (diff <= 0 && alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            const double quad = std::max(Qi[i] + Qj[j] - 2.0 * Qi[j], 1e-12);
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C && alpha[i] > C) {
                alpha[i] = C;
                alpha[j] = sum - C;
            } else if (sum <= C && alpha[j] < 0) {
                alpha[j] = 0;
                alpha[i] = sum;
            }
            if (sum > C && alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = sum - C;
            } else if (sum <= C && alpha[i] < 0) {
                alpha[i] = 0;
                alpha[j] = sum;
            }
        }
        const double di = alpha[i] - ai, dj = alpha[j] - aj;
        for (std::size_t k = 0; k < n; ++k)
            G[k] += Qi[k] * di + Qj[k] * dj;
    }

    // rho from free vectors, else the midpoint of the feasible interval.
    double sum_free = 0.0, ub = HUGE_VAL, lb = -HUGE_VAL;
    int nfree = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double yg = y(k) * G[k];
        if (alpha[k] >= C) {
            if (y(k) < 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else if (alpha[k] <= 0) {
            if (y(k) > 0)
                ub = std::min(ub, yg);
            else
                lb = std::max(lb, yg);
        } else {
            ++nfree;
            sum_free += yg;
        }
    }
    const double rho = nfree > 0 ? sum_free / nfree : 0.5 * (ub + lb);

    SvmModel m;
    m.kernel = kernel;
    m.C = C;
    m.feature_length = data.front().x.size();
    m.training_examples = n;
    m.bias = -rho;
    m.iterations = it;
    for (std::size_t k = 0; k < n; ++k)
        if (alpha[k] > 0) {
            m.support.push_back(data[k].x);
            m.coef.push_back(alpha[k] * y(k));
        }
    m.objective = dual_objective(m);
    return m;
}

} // namespace

double kernel_value(KernelKind k, std::span<const double> a, std::span<const double> b)
{
    const double d = dot(a, b);
    switch (k) {
    case KernelKind::Linear: return d;
    case KernelKind::Poly2: return (1.0 + d) * (1.0 + d);
    case KernelKind::Poly3: return (1.0 + d) * (1.0 + d) * (1.0 + d);
    }
    return d;
}

SvmModel train_svm(const std::vector<Example>& data, KernelKind kernel, const TrainOptions& opts)
{
    check_training_set(data);
    if (!(opts.C > 0.0))
        throw std::invalid_argument("train_svm: C must be positive");
    return kernel == KernelKind::Linear ? train_linear(data, opts) : train_kernel(data, kernel, opts);
}

double linear_objective(const SvmModel& m, const std::vector<Example>& data)
{
    double loss = 0.0;
    for (const auto& e : data)
        loss += std::max(0.0, 1.0 - e.y * (dot(m.weights, e.x) + m.bias));
    return 0.5 * (dot(m.weights, m.weights) + m.bias * m.bias) + m.C * loss;
}

double dual_objective(const SvmModel& m)
{
    double s = 0.0, q = 0.0;
    for (std::size_t i = 0; i < m.support.size(); ++i) {
        s += std::abs(m.coef[i]);
        for (std::size_t j = 0; j < m.support.size(); ++j)
            q += m.coef[i] * m.coef[j] * kernel_value(m.kernel, m.support[i], m.support[j]);
    }
    return s - 0.5 * q;
}

std::string_view to_string(DetectionLabel l)
{
    switch (l) {
    case DetectionLabel::Human: return "Human";
    case DetectionLabel::NonHuman: return "NonHuman";
    case DetectionLabel::NoCandidate: return "NoCandidate";
    }
    return "?";
}

DetectionLabel detection_label_from_string(std::string_view s)
{
    for (auto l : {DetectionLabel::Human, DetectionLabel::NonHuman, DetectionLabel::NoCandidate})
        if (to_string(l) == s)
            return l;
    throw FormatError("unknown detection label '" + std::string(s) + "'");
}

Classification classify(const SvmModel& m, std::span<const double> x, std::uint64_t* madds)
{
    if (x.size() != m.feature_length)
        throw std::invalid_argument("classify: feature length " + std::to_string(x.size()) + " does not match model " +
                                    std::to_string(m.feature_length));
    double score = m.bias;
    std::uint64_t ops = 0;
    if (m.kernel == KernelKind::Linear) {
        for (std::size_t k = 0; k < x.size(); ++k)
            score += m.weights[k] * x[k];
        ops = x.size() + 1;
    } else {
        for (std::size_t i = 0; i < m.support.size(); ++i)
            score += m.coef[i] * kernel_value(m.kernel, m.support[i], x);
        ops = m.support.size() * (x.size() + static_cast<std::uint64_t>(kernel_degree(m.kernel)) + 1) + 1;
    }
    if (madds)
        *madds += ops;
    return {score, score > 0.0 ? DetectionLabel::Human : DetectionLabel::NonHuman};
}

std::vector<double> model_features(const SvmModel& m, const ThermalImage& img)
{
    std::array<double, kThermalPixels> z{};
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = (img.px[i] - m.input_mean) / m.input_sd;
    return hog(std::span<const double>(z), m.cell_size);
}

DetectionResult detect(const ThermalImage& img, const SvmModel& m, std::uint64_t* madds)
{
    const ThermalImage filtered = median3x3(img);
    const GateResult g = hot_pixel_gate(filtered);
    DetectionResult r;
    r.gate_active = g.active;
    r.hot_pixel_count = g.count;
    if (!g.active)
        return r;
    const Classification c = classify(m, model_features(m, filtered), madds);
    r.score = c.score;
    r.label = c.label;
    return r;
}

std::pair<double, double> dataset_standardisation(const std::vector<LabeledImage>& data)
{
    if (data.empty())
        throw std::invalid_argument("dataset_standardisation: empty dataset");
    double sum = 0.0, sq = 0.0;
    std::size_t n = 0;
    for (const auto& li : data) {
        const ThermalImage f = median3x3(li.image);
        for (double v : f.px) {
            sum += v;
            sq += v * v;
            ++n;
        }
    }
    const double mean = sum / static_cast<double>(n);
    const double var = std::max(0.0, sq / static_cast<double>(n) - mean * mean);
    return {mean, var > 0.0 ? std::sqrt(var) : 1.0};
}

std::vector<Example> dataset_features(const std::vector<LabeledImage>& data, int cell_size, double mean, double sd)
{
    SvmModel shape;
    shape.cell_size = cell_size;
    shape.input_mean = mean;
    shape.input_sd = sd;
    std::vector<Example> out;
    out.reserve(data.size());
    for (const auto& li : data)
        out.push_back({model_features(shape, median3x3(li.image)), li.human ? 1 : -1});
    return out;
}

SvmModel train_detector(const std::vector<LabeledImage>& data, int cell_size, KernelKind kernel,
                        const TrainOptions& opts)
{
    const auto [mean, sd] = dataset_standardisation(data);
    SvmModel m = train_svm(dataset_features(data, cell_size, mean, sd), kernel, opts);
    m.cell_size = cell_size;
    m.input_mean = mean;
    m.input_sd = sd;
    return m;
}

EvalMetrics evaluate(const SvmModel& m, const std::vector<LabeledImage>& data)
{
    if (data.empty())
        throw std::invalid_argument("evaluate: empty dataset");
    EvalMetrics e;
    std::map<long long, DistanceBin> bins;
    for (const auto& li : data) {
        const DetectionResult r = detect(li.image, m);
        const bool said_human = r.label == DetectionLabel::Human;
        e.gated_out += r.label == DetectionLabel::NoCandidate ? 1 : 0;
        if (li.human) {
            (said_human ? e.tp : e.fn) += 1;
            auto& b = bins[std::llround(li.image.distance_m * 1000.0)];
            b.distance_m = li.image.distance_m;
            b.positives += 1;
            b.detected += said_human ? 1 : 0;
        } else {
            (said_human ? e.fp : e.tn) += 1;
        }
    }
    e.n = data.size();
    e.accuracy = static_cast<double>(e.tp + e.tn) / static_cast<double>(e.n);
    e.positive_accuracy = e.tp + e.fn ? static_cast<double>(e.tp) / static_cast<double>(e.tp + e.fn) : 0.0;
    e.negative_accuracy = e.tn + e.fp ? static_cast<double>(e.tn) / static_cast<double>(e.tn + e.fp) : 0.0;
    e.balanced_accuracy = 0.5 * (e.positive_accuracy + e.negative_accuracy);
    for (const auto& [key, b] : bins)
        e.recall_by_distance.push_back(b);
    return e;
}

// Model files ----------------------------------------------------------------

namespace {

constexpr std::string_view kModelMagic = "biobot-svm 1";

std::string join(std::span<const double> v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ' ';
        s += format_double(v[i]);
    }
    return s;
}

} // namespace

std::string model_to_text(const SvmModel& m)
{
    std::ostringstream o;
    o << kModelMagic << '\n'
      << "kernel = " << to_string(m.kernel) << '\n'
      << "cell_size = " << m.cell_size << '\n'
      << "C = " << format_double(m.C) << '\n'
      << "feature_length = " << m.feature_length << '\n'
      << "input_mean = " << format_double(m.input_mean) << '\n'
      << "input_sd = " << format_double(m.input_sd) << '\n'
      << "bias = " << format_double(m.bias) << '\n'
      << "objective = " << format_double(m.objective) << '\n'
      << "iterations = " << m.iterations << '\n'
      << "training_examples = " << m.training_examples << '\n';
    if (m.kernel == KernelKind::Linear) {
        o << "weights = " << join(m.weights) << '\n';
    } else {
        o << "support_vectors = " << m.support.size() << '\n';
        for (std::size_t i = 0; i < m.support.size(); ++i)
            o << "sv = " << format_double(m.coef[i]) << ' ' << join(m.support[i]) << '\n';
    }
    return o.str();
}

SvmModel model_from_text(std::string_view text, std::string_view source)
{
    const std::string src(source);
    const auto nl = text.find('\n');
    if (trim(text.substr(0, nl)) != kModelMagic)
        throw FormatError(src + ": not a model file (expected '" + std::string(kModelMagic) + "' on line 1)");
    const KvDocument doc = parse_kv(nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1), source);
    if (doc.sections.size() != 1)
        throw FormatError(src + ": unexpected sections");
    const KvSection& s = doc.sections[0];
    s.require_known({"kernel", "cell_size", "C", "feature_length", "input_mean", "input_sd", "bias", "objective",
                     "iterations", "training_examples", "weights", "support_vectors", "sv"});
    try {
        SvmModel m;
        m.kernel = kernel_from_string(trim(s.get("kernel")));
        m.cell_size = static_cast<int>(parse_int(s.get("cell_size"), "cell_size"));
        m.C = s.get_double("C");
        m.feature_length = static_cast<std::size_t>(parse_int(s.get("feature_length"), "feature_length"));
        if (m.feature_length == 0)
            throw FormatError("feature_length must be positive");
        m.input_mean = s.get_double("input_mean", 0.0);
        m.input_sd = s.get_double("input_sd", 1.0);
        m.bias = s.get_double("bias");
        m.objective = s.get_double("objective", 0.0);
        m.iterations = s.has("iterations") ? parse_int(s.get("iterations"), "iterations") : 0;
        m.training_examples =
            s.has("training_examples") ? static_cast<std::size_t>(parse_int(s.get("training_examples"), "training_examples")) : 0;
        if (!(m.input_sd > 0.0))
            throw FormatError("input_sd must be positive");
        if (m.kernel == KernelKind::Linear) {
            m.weights = s.get_doubles("weights");
            if (m.weights.size() != m.feature_length)
                throw FormatError("weights: expected " + std::to_string(m.feature_length) + " values, got " +
                                  std::to_string(m.weights.size()));
        } else {
            const auto count = static_cast<std::size_t>(parse_int(s.get("support_vectors"), "support_vectors"));
            for (const auto& e : s.entries) {
                if (e.key != "sv")
                    continue;
                auto v = parse_doubles(e.value, "sv");
                if (v.size() != m.feature_length + 1)
                    throw FormatError("line " + std::to_string(e.line) + ": sv: expected " +
                                      std::to_string(m.feature_length + 1) + " values");
                m.coef.push_back(v.front());
                m.support.emplace_back(v.begin() + 1, v.end());
            }
            if (m.support.size() != count)
                throw FormatError("support_vectors = " + std::to_string(count) + " but " +
                                  std::to_string(m.support.size()) + " sv lines");
        }
        return m;
    } catch (const FormatError& e) {
        throw FormatError(src + ": " + e.what());
    } catch (const std::invalid_argument& e) {
        throw FormatError(src + ": " + e.what());
    }
}

SvmModel load_model(const std::string& path) { return model_from_text(read_text_file(path), path); }

void save_model(const SvmModel& m, const std::string& path)
{
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot write " + path);
    f << model_to_text(m);
}

} // namespace biobot
