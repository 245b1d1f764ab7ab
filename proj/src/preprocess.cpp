#include "medn/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "medn/errors.hpp"

namespace medn {

RgbFrame::RgbFrame(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

GrayFrame::GrayFrame(std::size_t w, std::size_t h, double fill)
    : width(w), height(h), pixels(w * h, fill) {}

RgbFrame pixel_max(const RgbFrame& a, const RgbFrame& b) {
    if (a.width != b.width || a.height != b.height) {
        throw DimensionError("pixel_max: frames " + std::to_string(a.width) + "x" +
                             std::to_string(a.height) + " and " + std::to_string(b.width) + "x" +
                             std::to_string(b.height) + " differ");
    }
    RgbFrame out = a;
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        out.pixels[i] = std::max(a.pixels[i], b.pixels[i]);
    }
    return out;
}

GrayFrame luminance(const RgbFrame& frame) {
    GrayFrame out(frame.width, frame.height);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
        const long weighted = 299L * frame.pixels[3 * i] + 587L * frame.pixels[3 * i + 1] +
                              114L * frame.pixels[3 * i + 2];
        out.pixels[i] = static_cast<double>(weighted) / 255000.0;
    }
    return out;
}

GrayFrame rescale(const GrayFrame& frame, std::size_t out_width, std::size_t out_height) {
    if (out_width == 0 || out_height == 0) {
        throw ContractError("rescale: output dimensions must be positive");
    }
    if (out_width > frame.width || out_height > frame.height) {
        throw ContractError("rescale: upscaling " + std::to_string(frame.width) + "x" +
                            std::to_string(frame.height) + " to " + std::to_string(out_width) +
                            "x" + std::to_string(out_height) + " is not supported");
    }
    const double sx = static_cast<double>(frame.width) / static_cast<double>(out_width);
    const double sy = static_cast<double>(frame.height) / static_cast<double>(out_height);
    GrayFrame out(out_width, out_height);
    for (std::size_t oy = 0; oy < out_height; ++oy) {
        const double y0 = static_cast<double>(oy) * sy;
        const double y1 = static_cast<double>(oy + 1) * sy;
        for (std::size_t ox = 0; ox < out_width; ++ox) {
            const double x0 = static_cast<double>(ox) * sx;
            const double x1 = static_cast<double>(ox + 1) * sx;
            double total = 0.0;
            double weight = 0.0;
            const auto ylast = std::min(frame.height, static_cast<std::size_t>(std::ceil(y1)));
            const auto xlast = std::min(frame.width, static_cast<std::size_t>(std::ceil(x1)));
            for (auto y = static_cast<std::size_t>(y0); y < ylast; ++y) {
                const double wy = std::min(y1, static_cast<double>(y + 1)) -
                                  std::max(y0, static_cast<double>(y));
                for (auto x = static_cast<std::size_t>(x0); x < xlast; ++x) {
                    const double wx = std::min(x1, static_cast<double>(x + 1)) -
                                      std::max(x0, static_cast<double>(x));
                    total += wx * wy * frame.at(x, y);
                    weight += wx * wy;
                }
            }
            out.at(ox, oy) = total / weight;
        }
    }
    return out;
}

FrameStack::FrameStack(std::size_t width, std::size_t height) : width_(width), height_(height) {
    if (width == 0 || height == 0) {
        throw ContractError("FrameStack: dimensions must be positive");
    }
}

std::vector<double> FrameStack::push(const GrayFrame& frame) {
    if (frame.width != width_ || frame.height != height_) {
        throw DimensionError("FrameStack: frame " + std::to_string(frame.width) + "x" +
                             std::to_string(frame.height) + " does not match stack " +
                             std::to_string(width_) + "x" + std::to_string(height_));
    }
    if (pushes_ == 0) {
        frames_.fill(frame);
    } else {
        std::rotate(frames_.begin(), frames_.begin() + 1, frames_.end());
        frames_.back() = frame;
    }
    ++pushes_;
    return observation();
}

std::vector<double> FrameStack::observation() const {
    if (pushes_ == 0) {
        throw ContractError("FrameStack: no frame pushed yet");
    }
    std::vector<double> obs;
    obs.reserve(kDepth * width_ * height_);
    for (const auto& f : frames_) {
        obs.insert(obs.end(), f.pixels.begin(), f.pixels.end());
    }
    return obs;
}

namespace {

// Next whitespace-separated token, skipping '#' comments.
std::string ppm_token(std::istream& in) {
    std::string token;
    for (;;) {
        if (!(in >> token)) {
            throw FormatError("ppm: unexpected end of file");
        }
        if (token.front() != '#') {
            return token;
        }
        std::string rest;
        std::getline(in, rest);
    }
}

std::size_t ppm_number(std::istream& in, const char* what) {
    const std::string token = ppm_token(in);
    std::size_t used = 0;
    unsigned long value = 0;
    try {
        value = std::stoul(token, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != token.size()) {
        throw FormatError(std::string("ppm: bad ") + what + " '" + token + "'");
    }
    return value;
}

} // namespace

RgbFrame read_ppm(std::istream& in) {
    if (ppm_token(in) != "P3") {
        throw FormatError("ppm: expected magic 'P3'");
    }
    const std::size_t width = ppm_number(in, "width");
    const std::size_t height = ppm_number(in, "height");
    const std::size_t max_value = ppm_number(in, "max value");
    if (width == 0 || height == 0) {
        throw FormatError("ppm: dimensions must be positive");
    }
    if (max_value != 255) {
        throw FormatError("ppm: only max value 255 is supported, got " + std::to_string(max_value));
    }
    RgbFrame frame(width, height);
    for (auto& channel : frame.pixels) {
        const std::size_t v = ppm_number(in, "sample");
        if (v > 255) {
            throw FormatError("ppm: sample " + std::to_string(v) + " exceeds 255");
        }
        channel = static_cast<std::uint8_t>(v);
    }
    return frame;
}

void write_ppm(std::ostream& out, const RgbFrame& frame) {
    out << "P3\n" << frame.width << ' ' << frame.height << "\n255\n";
    for (std::size_t y = 0; y < frame.height; ++y) {
        for (std::size_t x = 0; x < frame.width; ++x) {
            out << (x > 0 ? " " : "") << int(frame.at(x, y, 0)) << ' ' << int(frame.at(x, y, 1))
                << ' ' << int(frame.at(x, y, 2));
        }
        out << '\n';
    }
}

} // namespace medn
