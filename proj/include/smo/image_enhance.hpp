#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "smo/errors.hpp"
#include "smo/image.hpp"

namespace smo {

/// Edge-stopping function for Perona-Malik diffusion.
enum class EdgeFunction { exponential, rational };

inline const char* to_string(EdgeFunction f) {
    return f == EdgeFunction::exponential ? "exponential" : "rational";
}

inline EdgeFunction edge_function_from_string(const std::string& s) {
    if (s == "exponential") return EdgeFunction::exponential;
    if (s == "rational") return EdgeFunction::rational;
    throw InvalidParams("unknown edge function '" + s + "'");
}

struct PmdParams {
    double kappa = 0.1;    // edge threshold K
    double lambda = 0.2;   // step size, <= 0.25 for 4-neighbour stability
    int iterations = 10;
    EdgeFunction edge_fn = EdgeFunction::exponential;

    void validate() const {
        if (!(kappa > 0.0) || !std::isfinite(kappa))
            throw InvalidParams("pmd: kappa must be positive");
        if (!(lambda > 0.0) || lambda > 0.25)
            throw InvalidParams("pmd: lambda must be in (0, 0.25]");
        if (iterations < 0) throw InvalidParams("pmd: iterations must be >= 0");
    }
};

struct ClaheParams {
    double clip_limit = 2.0;  // multiple of the uniform bin height
    int tiles_x = 8;
    int tiles_y = 8;
    int bins = 256;

    void validate() const {
        if (!(clip_limit >= 1.0)) throw InvalidParams("clahe: clip_limit must be >= 1");
        if (tiles_x < 1 || tiles_y < 1) throw InvalidParams("clahe: tiles must be >= 1");
        if (bins < 2) throw InvalidParams("clahe: bins must be >= 2");
    }
};

/// Explicit 4-neighbour Perona-Malik diffusion with clamp-to-edge boundary:
///   I <- I + lambda * sum_d g(|grad_d|) * grad_d
/// with g exponential = exp(-(d/K)^2) or rational = 1/(1+(d/K)^2).
/// Constant images are exact fixed points; output stays in [0,1].
inline GrayImage pmd_filter(const GrayImage& img, const PmdParams& p) {
    p.validate();
    GrayImage cur = img;
    if (p.iterations == 0) return cur;
    GrayImage next = GrayImage::filled(img.width, img.height, 0.0);
    const double inv_k2 = 1.0 / (p.kappa * p.kappa);
    const auto g = [&](double d) {
        const double r = d * d * inv_k2;
        return p.edge_fn == EdgeFunction::exponential ? std::exp(-r) : 1.0 / (1.0 + r);
    };
    for (int it = 0; it < p.iterations; ++it) {
        for (int y = 0; y < cur.height; ++y) {
            for (int x = 0; x < cur.width; ++x) {
                const double c = cur.at(x, y);
                const double dn = cur.at(x, clamp_coord(y - 1, cur.height)) - c;
                const double ds = cur.at(x, clamp_coord(y + 1, cur.height)) - c;
                const double dw = cur.at(clamp_coord(x - 1, cur.width), y) - c;
                const double de = cur.at(clamp_coord(x + 1, cur.width), y) - c;
                double v = c + p.lambda * (g(dn) * dn + g(ds) * ds + g(dw) * dw + g(de) * de);
                if (v < 0.0) v = 0.0;
                if (v > 1.0) v = 1.0;
                next.at(x, y) = v;
            }
        }
        std::swap(cur, next);
    }
    return cur;
}

/// Contrast-limited adaptive histogram equalization. Per-tile histograms are
/// clipped at clip_limit times the uniform bin height with the excess spread
/// uniformly in a single pass; pixel mappings are the per-tile CDFs blended
/// bilinearly between tile centers.
inline GrayImage clahe(const GrayImage& img, const ClaheParams& p) {
    p.validate();
    if (img.width < p.tiles_x || img.height < p.tiles_y)
        throw InvalidParams("clahe: more tiles than pixels per axis");
    const int tx = p.tiles_x, ty = p.tiles_y, bins = p.bins;

    const auto bin_of = [&](double v) {
        int b = int(v * bins);
        return b < 0 ? 0 : (b >= bins ? bins - 1 : b);
    };
    std::vector<int> xedge(tx + 1), yedge(ty + 1);
    for (int t = 0; t <= tx; ++t) xedge[t] = int(std::int64_t(t) * img.width / tx);
    for (int t = 0; t <= ty; ++t) yedge[t] = int(std::int64_t(t) * img.height / ty);

    // per-tile CDF lookup tables
    std::vector<std::vector<double>> lut(std::size_t(tx) * ty);
    for (int gy = 0; gy < ty; ++gy) {
        for (int gx = 0; gx < tx; ++gx) {
            std::vector<double> hist(bins, 0.0);
            const int x0 = xedge[gx], x1 = xedge[gx + 1];
            const int y0 = yedge[gy], y1 = yedge[gy + 1];
            for (int y = y0; y < y1; ++y)
                for (int x = x0; x < x1; ++x) hist[bin_of(img.at(x, y))] += 1.0;
            const double total = double(x1 - x0) * double(y1 - y0);
            const double ceiling = p.clip_limit * total / bins;
            double excess = 0.0;
            for (double& h : hist)
                if (h > ceiling) {
                    excess += h - ceiling;
                    h = ceiling;
                }
            const double share = excess / bins;
            double cum = 0.0;
            auto& table = lut[std::size_t(gy) * tx + gx];
            table.resize(bins);
            for (int b = 0; b < bins; ++b) {
                cum += hist[b] + share;
                table[b] = cum / total;
            }
        }
    }

    std::vector<double> cx(tx), cy(ty);
    for (int t = 0; t < tx; ++t) cx[t] = 0.5 * (xedge[t] + xedge[t + 1]);
    for (int t = 0; t < ty; ++t) cy[t] = 0.5 * (yedge[t] + yedge[t + 1]);

    const auto locate = [](const std::vector<double>& centers, double pos, int& a, int& b,
                           double& w) {
        const int n = int(centers.size());
        if (n == 1 || pos <= centers.front()) {
            a = b = 0;
            w = 0.0;
            return;
        }
        if (pos >= centers.back()) {
            a = b = n - 1;
            w = 0.0;
            return;
        }
        int t = 0;
        while (pos >= centers[t + 1]) ++t;
        a = t;
        b = t + 1;
        w = (pos - centers[t]) / (centers[t + 1] - centers[t]);
    };

    GrayImage out = GrayImage::filled(img.width, img.height, 0.0);
    for (int y = 0; y < img.height; ++y) {
        int ya, yb;
        double wy;
        locate(cy, y + 0.5, ya, yb, wy);
        for (int x = 0; x < img.width; ++x) {
            int xa, xb;
            double wx;
            locate(cx, x + 0.5, xa, xb, wx);
            const int b = bin_of(img.at(x, y));
            const double top = lut[std::size_t(ya) * tx + xa][b] * (1.0 - wx) +
                               lut[std::size_t(ya) * tx + xb][b] * wx;
            const double bot = lut[std::size_t(yb) * tx + xa][b] * (1.0 - wx) +
                               lut[std::size_t(yb) * tx + xb][b] * wx;
            out.at(x, y) = top * (1.0 - wy) + bot * wy;
        }
    }
    return out;
}

enum class EnhanceOrder { pmd_first, clahe_first };

/// Hybrid enhancement: diffusion denoise, then adaptive equalization
/// (the reverse order is available for experiments).
inline GrayImage enhance(const GrayImage& img, const PmdParams& pmd, const ClaheParams& cl,
                         EnhanceOrder order = EnhanceOrder::pmd_first) {
    if (order == EnhanceOrder::pmd_first) return clahe(pmd_filter(img, pmd), cl);
    return pmd_filter(clahe(img, cl), pmd);
}

/// Scalar quality score, lower is better: negated sum of histogram entropy
/// (bits, 256 bins) and half the mean local standard deviation over 8x8
/// blocks. A constant image scores exactly 0.
inline double enhancement_score(const GrayImage& img) {
    std::vector<double> hist(256, 0.0);
    for (const double v : img.data) {
        int b = int(v * 256.0);
        if (b < 0) b = 0;
        if (b > 255) b = 255;
        hist[b] += 1.0;
    }
    const double n = double(img.pixels());
    double entropy = 0.0;
    for (const double h : hist)
        if (h > 0.0) {
            const double p = h / n;
            entropy -= p * std::log2(p);
        }

    double sigma_sum = 0.0;
    int blocks = 0;
    for (int by = 0; by < img.height; by += 8) {
        for (int bx = 0; bx < img.width; bx += 8) {
            const int x1 = std::min(bx + 8, img.width);
            const int y1 = std::min(by + 8, img.height);
            double s = 0.0, s2 = 0.0;
            const double cnt = double(x1 - bx) * double(y1 - by);
            for (int y = by; y < y1; ++y)
                for (int x = bx; x < x1; ++x) {
                    const double v = img.at(x, y);
                    s += v;
                    s2 += v * v;
                }
            const double mean = s / cnt;
            const double var = std::max(0.0, s2 / cnt - mean * mean);
            sigma_sum += std::sqrt(var);
            ++blocks;
        }
    }
    const double mean_sigma = blocks > 0 ? sigma_sum / blocks : 0.0;
    return -(entropy + 0.5 * mean_sigma);
}

}  // namespace smo
