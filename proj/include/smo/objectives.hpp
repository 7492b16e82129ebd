#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "smo/dataset_io.hpp"
#include "smo/errors.hpp"
#include "smo/image.hpp"
#include "smo/image_enhance.hpp"
#include "smo/optimizer.hpp"
#include "smo/param_space.hpp"
#include "smo/seg_metrics.hpp"

namespace smo {

/// A named minimization target with its default search space.
struct Objective {
    std::string name;
    ParamSpace space;
    ObjectiveFn evaluate;
    std::optional<std::pair<Position, double>> known_optimum;
};

inline double sphere(std::span<const double> x) {
    double s = 0.0;
    for (const double v : x) s += v * v;
    return s;
}

inline double rastrigin(std::span<const double> x) {
    constexpr double two_pi = 2.0 * 3.14159265358979323846;
    double s = 10.0 * double(x.size());
    for (const double v : x) s += v * v - 10.0 * std::cos(two_pi * v);
    return s;
}

inline ParamSpace continuous_box(std::size_t dim, double lo, double hi) {
    std::vector<ParamDesc> params;
    for (std::size_t j = 0; j < dim; ++j)
        params.emplace_back(ContinuousParam{"x" + std::to_string(j), lo, hi, false});
    return ParamSpace(std::move(params));
}

inline Objective make_sphere(std::size_t dim = 2, double lo = -5.0, double hi = 5.0) {
    Objective obj;
    obj.name = "sphere";
    obj.space = continuous_box(dim, lo, hi);
    obj.evaluate = [](const Position& p) { return sphere(p.raw); };
    if (lo <= 0.0 && hi >= 0.0)
        obj.known_optimum = {obj.space.repair(std::vector<double>(dim, 0.0)), 0.0};
    return obj;
}

inline Objective make_rastrigin(std::size_t dim = 2, double lo = -5.12, double hi = 5.12) {
    Objective obj;
    obj.name = "rastrigin";
    obj.space = continuous_box(dim, lo, hi);
    obj.evaluate = [](const Position& p) { return rastrigin(p.raw); };
    if (lo <= 0.0 && hi >= 0.0)
        obj.known_optimum = {obj.space.repair(std::vector<double>(dim, 0.0)), 0.0};
    return obj;
}

/// Mixed-variable test objective over the paper_preset space with the unique
/// minimum (lr=1e-3, batch=32, epochs=50) and value 0: squared log10 error
/// on the learning rate, 0.05 per epoch of distance from 50, and 1 per
/// batch-size index step away from 32.
inline double mixed_test_value(const Position& p) {
    const double lr_term = std::pow(std::log10(p.real(0)) - std::log10(1e-3), 2.0);
    const double batch_term = std::fabs(double(p.category_index(1)) - 3.0);
    const double epoch_term = 0.05 * std::fabs(double(p.integer(2)) - 50.0);
    return lr_term + batch_term + epoch_term;
}

inline Objective make_mixed_test() {
    Objective obj;
    obj.name = "mixed_test";
    obj.space = paper_preset();
    obj.evaluate = mixed_test_value;
    obj.known_optimum = {obj.space.repair({-3.0, 3.0, 50.0}), 0.0};
    return obj;
}

// --- toy segmentation surrogate ---------------------------------------

struct ToySegParams {
    enum class Kernel { none = 0, box3 = 1, box5 = 2, median3 = 3 };

    double threshold = 0.5;
    int smooth_iters = 0;
    Kernel kernel = Kernel::none;
};

inline constexpr std::array<const char*, 4> kToySegKernelNames{"none", "box3", "box5",
                                                               "median3"};

inline ParamSpace toy_seg_space() {
    std::vector<ParamDesc> params;
    params.emplace_back(ContinuousParam{"threshold", 0.0, 1.0, false});
    params.emplace_back(DiscreteParam{"smooth_iters", 0, 10});
    params.emplace_back(CategoricalParam{
        "kernel", {kToySegKernelNames.begin(), kToySegKernelNames.end()}});
    return ParamSpace(std::move(params));
}

inline ToySegParams toy_seg_params_from(const Position& p) {
    ToySegParams params;
    params.threshold = p.real(0);
    params.smooth_iters = int(p.integer(1));
    params.kernel = ToySegParams::Kernel(p.category_index(2));
    return params;
}

inline GrayImage apply_toy_kernel(const GrayImage& img, ToySegParams::Kernel kernel) {
    switch (kernel) {
        case ToySegParams::Kernel::none: return img;
        case ToySegParams::Kernel::box3: return box_filter(img, 1);
        case ToySegParams::Kernel::box5: return box_filter(img, 2);
        case ToySegParams::Kernel::median3: return median3x3(img);
    }
    throw InvalidParams("unknown toy kernel");
}

inline MaskImage threshold_mask(const GrayImage& img, double threshold) {
    MaskImage mask = MaskImage::filled(img.width, img.height, 0, 2);
    for (std::size_t i = 0; i < img.pixels(); ++i)
        mask.data[i] = img.data[i] >= threshold ? 1 : 0;
    return mask;
}

/// Deterministic toy segmenter: optional kernel, then smooth_iters passes of
/// 3x3 box smoothing, then a binary threshold.
inline MaskImage toy_segment(const GrayImage& img, const ToySegParams& p) {
    GrayImage work = apply_toy_kernel(img, p.kernel);
    for (int i = 0; i < p.smooth_iters; ++i) work = box_filter(work, 1);
    return threshold_mask(work, p.threshold);
}

/// Collapses a multi-class mask to cell-vs-background (any class > 0 -> 1).
inline MaskImage binarize_mask(const MaskImage& mask) {
    MaskImage out = mask;
    out.num_classes = 2;
    for (auto& v : out.data) v = v > 0 ? 1 : 0;
    return out;
}

/// Mean two-class categorical dice loss of the toy segmenter on a dataset.
inline double toy_seg_objective(const std::vector<SamplePair>& dataset, const ToySegParams& p,
                                double epsilon = 1e-7) {
    if (dataset.empty()) throw EmptyDataset("toy_seg_objective: empty dataset");
    double sum = 0.0;
    for (const auto& sample : dataset)
        sum += categorical_dice_loss(toy_segment(sample.image, p), binarize_mask(sample.mask),
                                     epsilon);
    return sum / double(dataset.size());
}

/// Cached evaluator for toy_seg_objective. Smoothing stacks are memoized per
/// (kernel, iteration) level, so repeated evaluations only pay for the
/// threshold and the loss. A level is built from the previous one with the
/// same box filter the direct path uses, keeping cached results
/// bit-identical to toy_seg_objective.
class ToySegObjective {
public:
    explicit ToySegObjective(const std::vector<SamplePair>& dataset, double epsilon = 1e-7)
        : epsilon_(epsilon) {
        if (dataset.empty()) throw EmptyDataset("ToySegObjective: empty dataset");
        for (const auto& sample : dataset) {
            images_.push_back(sample.image);
            masks_.push_back(binarize_mask(sample.mask));
        }
    }

    double operator()(const Position& p) const { return evaluate(toy_seg_params_from(p)); }

    double evaluate(const ToySegParams& p) const {
        const auto& level = smoothed(p.kernel, p.smooth_iters);
        double sum = 0.0;
        for (std::size_t i = 0; i < images_.size(); ++i)
            sum += categorical_dice_loss(threshold_mask(level[i], p.threshold), masks_[i],
                                         epsilon_);
        return sum / double(images_.size());
    }

    std::size_t size() const { return images_.size(); }

private:
    const std::vector<GrayImage>& smoothed(ToySegParams::Kernel kernel, int iters) const {
        auto& stack = cache_[std::size_t(kernel)];
        while (int(stack.size()) <= iters) {
            std::vector<GrayImage> level;
            level.reserve(images_.size());
            if (stack.empty()) {
                for (const auto& img : images_) level.push_back(apply_toy_kernel(img, kernel));
            } else {
                for (const auto& img : stack.back()) level.push_back(box_filter(img, 1));
            }
            stack.push_back(std::move(level));
        }
        return stack[std::size_t(iters)];
    }

    std::vector<GrayImage> images_;
    std::vector<MaskImage> masks_;
    double epsilon_;
    mutable std::array<std::vector<std::vector<GrayImage>>, 4> cache_;
};

inline Objective make_toy_seg(const std::vector<SamplePair>& dataset) {
    Objective obj;
    obj.name = "toy_seg";
    obj.space = toy_seg_space();
    obj.evaluate = ToySegObjective(dataset);
    return obj;
}

// --- enhancement tuning ------------------------------------------------

inline ParamSpace enhance_space(int max_tiles = 16) {
    if (max_tiles < 2) throw InvalidParams("enhance_space: max_tiles must be >= 2");
    std::vector<ParamDesc> params;
    params.emplace_back(ContinuousParam{"kappa", 0.02, 0.5, false});
    params.emplace_back(ContinuousParam{"lambda", 0.01, 0.25, false});
    params.emplace_back(DiscreteParam{"iterations", 0, 25});
    params.emplace_back(CategoricalParam{"edge_fn", {"exponential", "rational"}});
    params.emplace_back(ContinuousParam{"clip_limit", 1.0, 8.0, false});
    params.emplace_back(DiscreteParam{"tiles_x", 1, max_tiles});
    params.emplace_back(DiscreteParam{"tiles_y", 1, max_tiles});
    return ParamSpace(std::move(params));
}

inline std::pair<PmdParams, ClaheParams> enhance_params_from(const Position& p) {
    PmdParams pmd;
    pmd.kappa = p.real(0);
    pmd.lambda = p.real(1);
    pmd.iterations = int(p.integer(2));
    pmd.edge_fn = p.category_index(3) == 0 ? EdgeFunction::exponential : EdgeFunction::rational;
    ClaheParams cl;
    cl.clip_limit = p.real(4);
    cl.tiles_x = int(p.integer(5));
    cl.tiles_y = int(p.integer(6));
    return {pmd, cl};
}

/// Mean enhancement_score of enhance() over the sample images (minimized).
/// The tile range is capped by the smallest sample dimension so every
/// position in the space is evaluable.
inline Objective make_enhance_objective(std::vector<GrayImage> samples) {
    if (samples.empty()) throw EmptyDataset("enhance objective: no sample images");
    int min_dim = samples.front().width;
    for (const auto& img : samples) min_dim = std::min({min_dim, img.width, img.height});
    Objective obj;
    obj.name = "enhance_score";
    obj.space = enhance_space(std::clamp(min_dim, 2, 16));
    obj.evaluate = [samples = std::move(samples)](const Position& p) {
        const auto [pmd, cl] = enhance_params_from(p);
        double sum = 0.0;
        for (const auto& img : samples) sum += enhancement_score(enhance(img, pmd, cl));
        return sum / double(samples.size());
    };
    return obj;
}

}  // namespace smo
