#pragma once

#include <array>
#include <string>
#include <vector>

#include "smo/errors.hpp"

namespace smo {

struct TensorShape {
    int height = 0;
    int width = 0;
    int channels = 0;

    bool operator==(const TensorShape&) const = default;
};

inline std::string to_string(const TensorShape& s) {
    return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" +
           std::to_string(s.channels);
}

inline constexpr std::array<const char*, 5> kStageNames{"Block 1", "Block 2", "Block 3",
                                                        "Block 4", "Middle"};
inline constexpr std::array<int, 5> kEncoderChannels{64, 128, 256, 512, 1024};
inline constexpr std::array<int, 5> kDecoderChannels{512, 256, 128, 64, 1024};

inline void validate_plan_input(const TensorShape& input) {
    if (input.height != input.width)
        throw InvalidInput("plan input must be square, got " + to_string(input));
    const int s = input.height;
    if (s < 32 || (s & (s - 1)) != 0)
        throw InvalidInput("plan input side must be a power of two >= 32, got " +
                           std::to_string(s));
}

/// Encoder stage shapes: spatial dims halve per block, channel counts are
/// fixed at the 256-input reference values.
inline std::array<TensorShape, 5> encoder_shapes(const TensorShape& input) {
    validate_plan_input(input);
    std::array<TensorShape, 5> shapes;
    for (int k = 0; k < 5; ++k)
        shapes[k] = TensorShape{input.height >> k, input.width >> k, kEncoderChannels[k]};
    return shapes;
}

/// Decoder stage shapes, ordered Block 1 -> Middle to mirror the encoder.
inline std::array<TensorShape, 5> decoder_shapes(const TensorShape& input) {
    validate_plan_input(input);
    std::array<TensorShape, 5> shapes;
    for (int k = 0; k < 5; ++k)
        shapes[k] = TensorShape{input.height >> k, input.width >> k, kDecoderChannels[k]};
    return shapes;
}

struct StagePlan {
    std::string name;
    TensorShape encoder;
    TensorShape decoder;
    bool aligned = false;
};

struct AlignmentReport {
    std::vector<StagePlan> stages;
    bool pass = false;
};

/// Checks per-stage spatial equality between encoder and decoder, plus full
/// shape equality at the bottleneck.
inline AlignmentReport verify_alignment(const std::array<TensorShape, 5>& encoder,
                                        const std::array<TensorShape, 5>& decoder) {
    AlignmentReport report;
    report.pass = true;
    for (int k = 0; k < 5; ++k) {
        StagePlan stage;
        stage.name = kStageNames[k];
        stage.encoder = encoder[k];
        stage.decoder = decoder[k];
        stage.aligned = encoder[k].height == decoder[k].height &&
                        encoder[k].width == decoder[k].width;
        if (k == 4) stage.aligned = stage.aligned && encoder[k] == decoder[k];
        report.pass = report.pass && stage.aligned;
        report.stages.push_back(std::move(stage));
    }
    return report;
}

inline AlignmentReport verify_alignment(const TensorShape& input) {
    return verify_alignment(encoder_shapes(input), decoder_shapes(input));
}

/// Fixed-width text table, one row per stage.
inline std::string format_plan_table(const AlignmentReport& report) {
    const auto pad = [](std::string s, std::size_t w) {
        while (s.size() < w) s += ' ';
        return s;
    };
    std::string out = pad("Stage", 10) + pad("Encoder", 16) + pad("Decoder", 16) + "Aligned\n";
    for (const auto& stage : report.stages) {
        out += pad(stage.name, 10);
        out += pad(to_string(stage.encoder), 16);
        out += pad(to_string(stage.decoder), 16);
        out += stage.aligned ? "yes" : "NO";
        out += '\n';
    }
    out += report.pass ? "alignment: pass\n" : "alignment: FAIL\n";
    return out;
}

}  // namespace smo
