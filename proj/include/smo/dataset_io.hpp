#pragma once

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "smo/errors.hpp"
#include "smo/image.hpp"
#include "smo/rng.hpp"

namespace smo {

namespace detail {

struct FileHandle {
    std::FILE* f = nullptr;
    FileHandle(const std::string& path, const char* mode) : f(std::fopen(path.c_str(), mode)) {}
    ~FileHandle() {
        if (f) std::fclose(f);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

// Decodes any PNG to 8-bit RGBA rows (the usual libpng transform recipe).
inline void read_png_rgba(const std::string& path, int& width, int& height,
                          std::vector<png_byte>& pixels) {
    FileHandle file(path, "rb");
    if (!file.f) throw IoError("cannot open '" + path + "' for reading");
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(png ? &png : nullptr, nullptr, nullptr);
        throw DecodeError("libpng initialization failed");
    }
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("failed to decode '" + path + "'");
    }
    png_init_io(png, file.f);
    png_read_info(png, info);
    width = int(png_get_image_width(png, info));
    height = int(png_get_image_height(png, info));
    const png_byte color = png_get_color_type(png, info);
    const png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color == PNG_COLOR_TYPE_RGB || color == PNG_COLOR_TYPE_GRAY ||
        color == PNG_COLOR_TYPE_PALETTE)
        png_set_filler(png, 0xFF, PNG_FILLER_AFTER);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA)
        png_set_gray_to_rgb(png);
    png_read_update_info(png, info);
    if (png_get_rowbytes(png, info) != std::size_t(width) * 4) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DecodeError("unexpected row layout in '" + path + "'");
    }
    pixels.assign(std::size_t(width) * height * 4, 0);
    rows.resize(height);
    for (int y = 0; y < height; ++y) rows[y] = pixels.data() + std::size_t(y) * width * 4;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

inline void write_png_gray8(const std::string& path, int width, int height,
                            const std::vector<png_byte>& bytes) {
    FileHandle file(path, "wb");
    if (!file.f) throw IoError("cannot open '" + path + "' for writing");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(png ? &png : nullptr, nullptr);
        throw IoError("libpng initialization failed");
    }
    std::vector<png_bytep> rows(height);
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("failed to write '" + path + "'");
    }
    png_init_io(png, file.f);
    png_set_IHDR(png, info, width, height, 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        rows[y] = const_cast<png_bytep>(bytes.data()) + std::size_t(y) * width;
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// Reads a PNG as grayscale in [0,1]. Gray pixels map as v/255; color pixels
/// are converted by luminance 0.299R + 0.587G + 0.114B.
inline GrayImage read_png_gray(const std::string& path) {
    int width = 0, height = 0;
    std::vector<png_byte> rgba;
    detail::read_png_rgba(path, width, height, rgba);
    GrayImage img = GrayImage::filled(width, height, 0.0);
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        const png_byte r = rgba[i * 4], g = rgba[i * 4 + 1], b = rgba[i * 4 + 2];
        img.data[i] = (r == g && g == b) ? r / 255.0
                                         : (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
    }
    return img;
}

/// Reads a class-index mask. Must be a single-channel grayscale PNG whose
/// pixel values are the class indices.
inline MaskImage read_png_mask(const std::string& path) {
    int width = 0, height = 0;
    std::vector<png_byte> rgba;
    detail::read_png_rgba(path, width, height, rgba);
    MaskImage mask = MaskImage::filled(width, height, 0, 2);
    int max_class = 1;
    for (std::size_t i = 0; i < mask.pixels(); ++i) {
        const png_byte r = rgba[i * 4], g = rgba[i * 4 + 1], b = rgba[i * 4 + 2];
        if (r != g || g != b)
            throw DecodeError("mask '" + path + "' is not single-channel grayscale");
        mask.data[i] = r;
        max_class = std::max(max_class, int(r));
    }
    mask.num_classes = max_class + 1;
    return mask;
}

/// Writes an 8-bit grayscale PNG; intensities quantize as round(v*255).
inline void write_png_gray(const std::string& path, const GrayImage& img) {
    std::vector<png_byte> bytes(img.pixels());
    for (std::size_t i = 0; i < img.pixels(); ++i) {
        long q = std::lround(img.data[i] * 255.0);
        if (q < 0) q = 0;
        if (q > 255) q = 255;
        bytes[i] = png_byte(q);
    }
    detail::write_png_gray8(path, img.width, img.height, bytes);
}

/// Writes class indices verbatim as an 8-bit grayscale PNG.
inline void write_png_mask(const std::string& path, const MaskImage& mask) {
    std::vector<png_byte> bytes(mask.data.begin(), mask.data.end());
    detail::write_png_gray8(path, mask.width, mask.height, bytes);
}

struct SamplePair {
    GrayImage image;
    MaskImage mask;
    std::string id;

    bool operator==(const SamplePair&) const = default;
};

/// Loads an image/mask pair at the working resolution: bilinear resize and
/// [0,1] normalization for the image, nearest-neighbour resize for the mask.
inline SamplePair load_pair(const std::string& image_path, const std::string& mask_path,
                            int target = 256) {
    SamplePair pair;
    pair.image = bilinear_resize(read_png_gray(image_path), target, target);
    pair.mask = nearest_resize(read_png_mask(mask_path), target, target);
    pair.id = std::filesystem::path(image_path).stem().string();
    return pair;
}

enum class AugmentOp { hflip, vflip, rot90, rot180, rot270 };

inline const char* to_string(AugmentOp op) {
    switch (op) {
        case AugmentOp::hflip: return "hflip";
        case AugmentOp::vflip: return "vflip";
        case AugmentOp::rot90: return "rot90";
        case AugmentOp::rot180: return "rot180";
        case AugmentOp::rot270: return "rot270";
    }
    return "?";
}

namespace detail {

template <class Img>
Img hflip(const Img& in) {
    Img out = in;
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) out.at(x, y) = in.at(in.width - 1 - x, y);
    return out;
}

template <class Img>
Img vflip(const Img& in) {
    Img out = in;
    for (int y = 0; y < in.height; ++y)
        for (int x = 0; x < in.width; ++x) out.at(x, y) = in.at(x, in.height - 1 - y);
    return out;
}

// 90 degrees clockwise; output width is input height.
template <class Img>
Img rot90(const Img& in) {
    Img out = in;
    out.width = in.height;
    out.height = in.width;
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x) out.at(x, y) = in.at(y, in.height - 1 - x);
    return out;
}

template <class Img>
Img apply_op(const Img& in, AugmentOp op) {
    switch (op) {
        case AugmentOp::hflip: return hflip(in);
        case AugmentOp::vflip: return vflip(in);
        case AugmentOp::rot90: return rot90(in);
        case AugmentOp::rot180: return rot90(rot90(in));
        case AugmentOp::rot270: return rot90(rot90(rot90(in)));
    }
    throw InvalidParams("unknown augment op");
}

}  // namespace detail

/// Applies the same geometric transform to image and mask.
inline SamplePair augment(const SamplePair& pair, AugmentOp op) {
    return SamplePair{detail::apply_op(pair.image, op), detail::apply_op(pair.mask, op),
                      pair.id};
}

inline constexpr double kSynthBackground = 0.1;
inline constexpr double kSynthCytoplasm = 0.5;
inline constexpr double kSynthNucleus = 0.9;

struct SynthOptions {
    int count = 20;
    std::uint64_t seed = 0;
    double noise = 0.02;  // additive uniform amplitude; 0 gives the clean image
    int size = 256;
};

/// Deterministic synthetic "cell" dataset: 1-3 bright nucleus ellipses, each
/// strictly inside a mid-gray cytoplasm ellipse, over a dark background with
/// additive uniform noise. Mask classes: 0 background, 1 cytoplasm, 2
/// nucleus. Geometry and noise use independent derived rng streams so the
/// same seed yields the same masks at any noise amplitude.
inline std::vector<SamplePair> synth_dataset(const SynthOptions& opt) {
    if (opt.count < 1) throw InvalidParams("synth_dataset: count must be >= 1");
    if (opt.size < 16) throw InvalidParams("synth_dataset: size must be >= 16");
    std::vector<SamplePair> samples;
    samples.reserve(opt.count);
    for (int s = 0; s < opt.count; ++s) {
        Rng geom(derive_seed(opt.seed, std::uint64_t(2 * s)));
        Rng noise(derive_seed(opt.seed, std::uint64_t(2 * s + 1)));
        const double size = opt.size;

        struct Ellipse {
            double cx, cy, a, b;
            bool contains(double x, double y) const {
                const double u = (x - cx) / a, v = (y - cy) / b;
                return u * u + v * v <= 1.0;
            }
        };
        std::vector<Ellipse> cyto, nucleus;
        const int cells = 1 + int(geom.uniform_index(3));
        for (int c = 0; c < cells; ++c) {
            Ellipse cy;
            cy.cx = size * geom.uniform(0.2, 0.8);
            cy.cy = size * geom.uniform(0.2, 0.8);
            cy.a = size * geom.uniform(0.08, 0.2);
            cy.b = size * geom.uniform(0.08, 0.2);
            const double scale = geom.uniform(0.3, 0.55);
            // offset kept small enough that the nucleus ellipse stays inside
            // the cytoplasm ellipse with margin
            const double mag = 0.8 * (1.0 - scale) * geom.uniform();
            const double ang = geom.uniform(0.0, 2.0 * 3.14159265358979323846);
            Ellipse nu;
            nu.cx = cy.cx + mag * std::cos(ang) * cy.a;
            nu.cy = cy.cy + mag * std::sin(ang) * cy.b;
            nu.a = scale * cy.a;
            nu.b = scale * cy.b;
            cyto.push_back(cy);
            nucleus.push_back(nu);
        }

        SamplePair pair;
        pair.image = GrayImage::filled(opt.size, opt.size, 0.0);
        pair.mask = MaskImage::filled(opt.size, opt.size, 0, 3);
        char id[32];
        std::snprintf(id, sizeof(id), "cell_%04d", s);
        pair.id = id;
        for (int y = 0; y < opt.size; ++y) {
            for (int x = 0; x < opt.size; ++x) {
                const double px = x + 0.5, py = y + 0.5;
                int label = 0;
                for (const auto& e : nucleus)
                    if (e.contains(px, py)) {
                        label = 2;
                        break;
                    }
                if (label == 0)
                    for (const auto& e : cyto)
                        if (e.contains(px, py)) {
                            label = 1;
                            break;
                        }
                pair.mask.at(x, y) = std::uint8_t(label);
                pair.image.at(x, y) =
                    label == 2 ? kSynthNucleus : (label == 1 ? kSynthCytoplasm : kSynthBackground);
            }
        }
        if (opt.noise > 0.0) {
            for (double& v : pair.image.data) {
                v += noise.uniform(-opt.noise, opt.noise);
                if (v < 0.0) v = 0.0;
                if (v > 1.0) v = 1.0;
            }
        }
        samples.push_back(std::move(pair));
    }
    return samples;
}

inline std::vector<SamplePair> synth_dataset(int count, std::uint64_t seed) {
    SynthOptions opt;
    opt.count = count;
    opt.seed = seed;
    return synth_dataset(opt);
}

/// Writes images/<id>.png, masks/<id>.png and a manifest of ids.
inline void save_dataset(const std::string& dir, const std::vector<SamplePair>& samples) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(dir) / "images", ec);
    fs::create_directories(fs::path(dir) / "masks", ec);
    std::ofstream manifest(fs::path(dir) / "manifest.txt");
    if (!manifest) throw IoError("cannot write manifest in '" + dir + "'");
    for (const auto& s : samples) {
        write_png_gray((fs::path(dir) / "images" / (s.id + ".png")).string(), s.image);
        write_png_mask((fs::path(dir) / "masks" / (s.id + ".png")).string(), s.mask);
        manifest << s.id << '\n';
    }
}

/// Ids from the manifest when present, otherwise sorted image stems.
inline std::vector<std::string> dataset_ids(const std::string& dir) {
    namespace fs = std::filesystem;
    std::vector<std::string> ids;
    const fs::path manifest = fs::path(dir) / "manifest.txt";
    if (fs::exists(manifest)) {
        std::ifstream in(manifest);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) ids.push_back(line);
        return ids;
    }
    const fs::path images = fs::path(dir) / "images";
    if (!fs::exists(images)) throw IoError("dataset directory '" + dir + "' has no images/");
    for (const auto& entry : fs::directory_iterator(images))
        if (entry.path().extension() == ".png") ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

inline std::vector<SamplePair> load_dataset(const std::string& dir, int limit = 0,
                                            int target = 256) {
    namespace fs = std::filesystem;
    std::vector<std::string> ids = dataset_ids(dir);
    if (limit > 0 && int(ids.size()) > limit) ids.resize(limit);
    if (ids.empty()) throw EmptyDataset("no samples found in '" + dir + "'");
    std::vector<SamplePair> samples;
    samples.reserve(ids.size());
    for (const auto& id : ids)
        samples.push_back(load_pair((fs::path(dir) / "images" / (id + ".png")).string(),
                                    (fs::path(dir) / "masks" / (id + ".png")).string(), target));
    return samples;
}

}  // namespace smo
