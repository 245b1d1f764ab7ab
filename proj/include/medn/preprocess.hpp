#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

namespace medn {

// 8-bit RGB image, row-major, three bytes per pixel.
struct RgbFrame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<std::uint8_t> pixels;

    RgbFrame() = default;
    RgbFrame(std::size_t w, std::size_t h);

    std::uint8_t& at(std::size_t x, std::size_t y, std::size_t channel) {
        return pixels[(y * width + x) * 3 + channel];
    }
    std::uint8_t at(std::size_t x, std::size_t y, std::size_t channel) const {
        return pixels[(y * width + x) * 3 + channel];
    }

    bool operator==(const RgbFrame&) const = default;
};

// Single-channel image with intensities in [0, 1], row-major.
struct GrayFrame {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;

    GrayFrame() = default;
    GrayFrame(std::size_t w, std::size_t h, double fill = 0.0);

    double& at(std::size_t x, std::size_t y) { return pixels[y * width + x]; }
    double at(std::size_t x, std::size_t y) const { return pixels[y * width + x]; }

    bool operator==(const GrayFrame&) const = default;
};

// Per-pixel, per-channel maximum of two frames (removes sprite flicker).
RgbFrame pixel_max(const RgbFrame& a, const RgbFrame& b);

// BT.601 luma: (299 R + 587 G + 114 B) / (1000 * 255).
GrayFrame luminance(const RgbFrame& frame);

// Area-average downscale. Each output pixel is the overlap-weighted mean of
// the source pixels it covers; for integer factors that is the plain block
// mean. Upscaling is rejected.
GrayFrame rescale(const GrayFrame& frame, std::size_t out_width, std::size_t out_height);

// The four most recent frames, newest last. The first push fills every slot
// with that frame. observation() concatenates the frames oldest first:
//   obs[k * width * height + y * width + x] = frame_k(x, y).
class FrameStack {
public:
    static constexpr std::size_t kDepth = 4;

    FrameStack(std::size_t width, std::size_t height);

    std::vector<double> push(const GrayFrame& frame);
    std::vector<double> observation() const;

    bool warmed_up() const noexcept { return pushes_ > 0; }
    const std::array<GrayFrame, kDepth>& frames() const noexcept { return frames_; }

private:
    std::size_t width_;
    std::size_t height_;
    std::size_t pushes_ = 0;
    std::array<GrayFrame, kDepth> frames_;
};

// Plain-text pixmap ("P3"): magic, width height, max value, then R G B
// triples. '#' starts a comment running to end of line.
RgbFrame read_ppm(std::istream& in);
void write_ppm(std::ostream& out, const RgbFrame& frame);

} // namespace medn
