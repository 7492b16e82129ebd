#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "smo/errors.hpp"
#include "smo/image.hpp"

namespace smo {

/// One-vs-rest pixel counts for a single class.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;

    std::uint64_t total() const { return tp + tn + fp + fn; }
    bool operator==(const ConfusionCounts&) const = default;
};

inline void require_same_shape(const MaskImage& a, const MaskImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw ShapeMismatch("mask dimensions differ: " + std::to_string(a.width) + "x" +
                            std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                            std::to_string(b.height));
    if (a.num_classes != b.num_classes)
        throw ShapeMismatch("mask class counts differ: " + std::to_string(a.num_classes) +
                            " vs " + std::to_string(b.num_classes));
}

inline ConfusionCounts confusion(const MaskImage& pred, const MaskImage& gt, int cls) {
    require_same_shape(pred, gt);
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const bool p = pred.data[i] == cls;
        const bool g = gt.data[i] == cls;
        if (p && g)
            ++c.tp;
        else if (p && !g)
            ++c.fp;
        else if (!p && g)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

inline double accuracy(const ConfusionCounts& c) {
    if (c.total() == 0) throw EmptyMask("accuracy: zero pixels");
    return double(c.tp + c.tn) / double(c.total());
}

/// Dice from counts; both-empty pairs are vacuously perfect (1.0).
inline double dice(const ConfusionCounts& c) {
    const std::uint64_t denom = 2 * c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return 2.0 * double(c.tp) / double(denom);
}

inline double iou(const ConfusionCounts& c) {
    const std::uint64_t denom = c.tp + c.fp + c.fn;
    if (denom == 0) return 1.0;
    return double(c.tp) / double(denom);
}

inline double dice(const MaskImage& pred, const MaskImage& gt, int cls) {
    return dice(confusion(pred, gt, cls));
}

inline double iou(const MaskImage& pred, const MaskImage& gt, int cls) {
    return iou(confusion(pred, gt, cls));
}

/// Per-pixel class probabilities, pixel-major layout (w*h*C).
struct ProbMap {
    int width = 0;
    int height = 0;
    int num_classes = 2;
    std::vector<double> data;

    double at(int x, int y, int c) const {
        return data[(std::size_t(y) * width + x) * num_classes + c];
    }
    double& at(int x, int y, int c) {
        return data[(std::size_t(y) * width + x) * num_classes + c];
    }

    /// One-hot encoding of a mask.
    static ProbMap one_hot(const MaskImage& mask) {
        ProbMap p{mask.width, mask.height, mask.num_classes,
                  std::vector<double>(mask.data.size() * mask.num_classes, 0.0)};
        for (std::size_t i = 0; i < mask.data.size(); ++i)
            p.data[i * mask.num_classes + mask.data[i]] = 1.0;
        return p;
    }

    void validate() const {
        if (data.size() != std::size_t(width) * height * num_classes)
            throw ShapeMismatch("probmap: data length does not match dimensions");
        for (std::size_t px = 0; px < std::size_t(width) * height; ++px) {
            double sum = 0.0;
            for (int c = 0; c < num_classes; ++c) {
                const double v = data[px * num_classes + c];
                if (!(v >= 0.0)) throw InvalidParams("probmap: negative probability");
                sum += v;
            }
            if (std::fabs(sum - 1.0) > 1e-6)
                throw InvalidParams("probmap: pixel probabilities do not sum to 1");
        }
    }
};

/// Soft multi-class dice loss:
///   1 - (1/C) * sum_c (2*sum(P_c*G_c) + eps) / (sum(P_c) + sum(G_c) + eps)
/// with G one-hot ground truth.
inline double categorical_dice_loss(const ProbMap& pred, const MaskImage& gt, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidEpsilon("categorical_dice_loss: epsilon must be positive");
    if (pred.width != gt.width || pred.height != gt.height || pred.num_classes != gt.num_classes)
        throw ShapeMismatch("categorical_dice_loss: prediction/mask shapes differ");
    pred.validate();
    const int C = pred.num_classes;
    double ratio_sum = 0.0;
    for (int c = 0; c < C; ++c) {
        double inter = 0.0, psum = 0.0, gsum = 0.0;
        for (std::size_t px = 0; px < gt.data.size(); ++px) {
            const double p = pred.data[px * C + c];
            psum += p;
            if (gt.data[px] == c) {
                gsum += 1.0;
                inter += p;
            }
        }
        ratio_sum += (2.0 * inter + epsilon) / (psum + gsum + epsilon);
    }
    return 1.0 - ratio_sum / C;
}

/// Same loss with an implicit one-hot prediction.
inline double categorical_dice_loss(const MaskImage& pred, const MaskImage& gt, double epsilon) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidEpsilon("categorical_dice_loss: epsilon must be positive");
    require_same_shape(pred, gt);
    const int C = gt.num_classes;
    double ratio_sum = 0.0;
    for (int c = 0; c < C; ++c) {
        const ConfusionCounts cc = confusion(pred, gt, c);
        const double inter = double(cc.tp);
        const double psum = double(cc.tp + cc.fp);
        const double gsum = double(cc.tp + cc.fn);
        ratio_sum += (2.0 * inter + epsilon) / (psum + gsum + epsilon);
    }
    return 1.0 - ratio_sum / C;
}

struct ClassReport {
    int cls = 0;
    ConfusionCounts counts;
    double accuracy = 0.0;
    double dice = 0.0;
    double iou = 0.0;
    bool vacuous = false;  // class absent from both masks
};

struct MacroReport {
    std::vector<ClassReport> per_class;
    double mean_accuracy = 0.0;
    double mean_dice = 0.0;
    double mean_iou = 0.0;
    double overall_accuracy = 0.0;  // joint pixel accuracy over all classes
};

/// Per-class one-vs-rest metrics plus unweighted class means and the joint
/// ("overall") pixel accuracy.
inline MacroReport macro_report(const MaskImage& pred, const MaskImage& gt) {
    require_same_shape(pred, gt);
    if (pred.data.empty()) throw EmptyMask("macro_report: zero pixels");
    MacroReport report;
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < pred.data.size(); ++i)
        if (pred.data[i] == gt.data[i]) ++correct;
    report.overall_accuracy = double(correct) / double(pred.data.size());
    for (int c = 0; c < gt.num_classes; ++c) {
        ClassReport cr;
        cr.cls = c;
        cr.counts = confusion(pred, gt, c);
        cr.accuracy = accuracy(cr.counts);
        cr.dice = dice(cr.counts);
        cr.iou = iou(cr.counts);
        cr.vacuous = cr.counts.tp + cr.counts.fp + cr.counts.fn == 0;
        report.mean_accuracy += cr.accuracy;
        report.mean_dice += cr.dice;
        report.mean_iou += cr.iou;
        report.per_class.push_back(cr);
    }
    report.mean_accuracy /= gt.num_classes;
    report.mean_dice /= gt.num_classes;
    report.mean_iou /= gt.num_classes;
    return report;
}

}  // namespace smo
