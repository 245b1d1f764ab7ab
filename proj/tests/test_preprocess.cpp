#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "medn/errors.hpp"
#include "medn/preprocess.hpp"
#include "medn/rng.hpp"

using namespace medn;

namespace {

RgbFrame random_rgb(std::size_t w, std::size_t h, Rng& rng) {
    RgbFrame f(w, h);
    for (auto& p : f.pixels) {
        p = static_cast<std::uint8_t>(rng.index(256));
    }
    return f;
}

GrayFrame random_gray(std::size_t w, std::size_t h, Rng& rng) {
    GrayFrame f(w, h);
    for (double& p : f.pixels) {
        p = rng.uniform01();
    }
    return f;
}

double mean(const GrayFrame& f) {
    return std::accumulate(f.pixels.begin(), f.pixels.end(), 0.0) / static_cast<double>(f.pixels.size());
}

} // namespace

TEST(PixelMax, IsAnElementwiseJoin) {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const RgbFrame a = random_rgb(7, 5, rng);
        const RgbFrame b = random_rgb(7, 5, rng);
        const RgbFrame c = random_rgb(7, 5, rng);
        const RgbFrame m = pixel_max(a, b);
        EXPECT_EQ(m, pixel_max(b, a));
        EXPECT_EQ(pixel_max(a, a), a);
        EXPECT_EQ(pixel_max(pixel_max(a, b), c), pixel_max(a, pixel_max(b, c)));
        for (std::size_t i = 0; i < m.pixels.size(); ++i) {
            EXPECT_EQ(m.pixels[i], std::max(a.pixels[i], b.pixels[i]));
        }
    }
}

TEST(PixelMax, SizeMismatch) {
    EXPECT_THROW(pixel_max(RgbFrame(2, 2), RgbFrame(2, 3)), DimensionError);
}

TEST(Luminance, FrozenPrimaries) {
    RgbFrame f(4, 1);
    f.at(0, 0, 0) = 255;
    f.at(1, 0, 1) = 255;
    f.at(2, 0, 2) = 255;
    f.at(3, 0, 0) = f.at(3, 0, 1) = f.at(3, 0, 2) = 255;
    const GrayFrame g = luminance(f);
    EXPECT_DOUBLE_EQ(g.at(0, 0), 0.299);
    EXPECT_DOUBLE_EQ(g.at(1, 0), 0.587);
    EXPECT_DOUBLE_EQ(g.at(2, 0), 0.114);
    EXPECT_EQ(g.at(3, 0), 1.0);
}

TEST(Luminance, RangeAndMonotonicity) {
    Rng rng(2);
    const RgbFrame f = random_rgb(16, 16, rng);
    RgbFrame brighter = f;
    for (auto& p : brighter.pixels) {
        p = static_cast<std::uint8_t>(std::min(255, p + 10));
    }
    const GrayFrame g = luminance(f);
    const GrayFrame gb = luminance(brighter);
    for (std::size_t i = 0; i < g.pixels.size(); ++i) {
        EXPECT_GE(g.pixels[i], 0.0);
        EXPECT_LE(g.pixels[i], 1.0);
        EXPECT_GE(gb.pixels[i], g.pixels[i]);
    }
    EXPECT_EQ(luminance(RgbFrame(3, 3)), GrayFrame(3, 3, 0.0));
}

TEST(Rescale, IdentityIsExact) {
    Rng rng(3);
    const GrayFrame f = random_gray(9, 6, rng);
    EXPECT_EQ(rescale(f, 9, 6), f);
}

TEST(Rescale, IntegerFactorIsBlockMean) {
    Rng rng(4);
    const GrayFrame f = random_gray(8, 6, rng);
    const GrayFrame r = rescale(f, 4, 2);
    for (std::size_t y = 0; y < 2; ++y) {
        for (std::size_t x = 0; x < 4; ++x) {
            double total = 0.0;
            for (std::size_t dy = 0; dy < 3; ++dy) {
                for (std::size_t dx = 0; dx < 2; ++dx) {
                    total += f.at(2 * x + dx, 3 * y + dy);
                }
            }
            EXPECT_NEAR(r.at(x, y), total / 6.0, 1e-15);
        }
    }
}

TEST(Rescale, FractionalFactorWeighsOverlap) {
    GrayFrame f(3, 1);
    f.pixels = {0.3, 0.9, 0.6};
    const GrayFrame r = rescale(f, 2, 1);
    EXPECT_NEAR(r.at(0, 0), (0.3 + 0.5 * 0.9) / 1.5, 1e-15);
    EXPECT_NEAR(r.at(1, 0), (0.5 * 0.9 + 0.6) / 1.5, 1e-15);
}

TEST(Rescale, PreservesConstantsAndMean) {
    Rng rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t w = 5 + rng.index(30);
        const std::size_t h = 5 + rng.index(30);
        const std::size_t ow = 1 + rng.index(w);
        const std::size_t oh = 1 + rng.index(h);
        const double c = rng.uniform01();
        const GrayFrame flat = rescale(GrayFrame(w, h, c), ow, oh);
        for (double p : flat.pixels) {
            EXPECT_NEAR(p, c, 1e-12);
        }
        const GrayFrame f = random_gray(w, h, rng);
        const GrayFrame r = rescale(f, ow, oh);
        EXPECT_NEAR(mean(r), mean(f), 1e-12);
        const auto [lo, hi] = std::minmax_element(f.pixels.begin(), f.pixels.end());
        for (double p : r.pixels) {
            EXPECT_GE(p, *lo - 1e-12);
            EXPECT_LE(p, *hi + 1e-12);
        }
    }
}

TEST(Rescale, RejectsUpscaleAndEmpty) {
    EXPECT_THROW(rescale(GrayFrame(4, 4), 5, 4), ContractError);
    EXPECT_THROW(rescale(GrayFrame(4, 4), 0, 2), ContractError);
}

TEST(FrameStack, FirstPushFillsEverySlot) {
    FrameStack stack(2, 2);
    EXPECT_FALSE(stack.warmed_up());
    EXPECT_THROW(stack.observation(), ContractError);
    const auto obs = stack.push(GrayFrame(2, 2, 0.5));
    ASSERT_EQ(obs.size(), 16u);
    for (double v : obs) {
        EXPECT_EQ(v, 0.5);
    }
}

TEST(FrameStack, OldestFirstOrdering) {
    FrameStack stack(3, 2);
    for (int k = 1; k <= 6; ++k) {
        GrayFrame f(3, 2);
        for (std::size_t i = 0; i < f.pixels.size(); ++i) {
            f.pixels[i] = k + 0.01 * static_cast<double>(i);
        }
        const auto obs = stack.push(f);
        for (std::size_t slot = 0; slot < FrameStack::kDepth; ++slot) {
            const int expected = std::max(1, k - 3 + static_cast<int>(slot));
            for (std::size_t y = 0; y < 2; ++y) {
                for (std::size_t x = 0; x < 3; ++x) {
                    EXPECT_DOUBLE_EQ(obs[slot * 6 + y * 3 + x], expected + 0.01 * static_cast<double>(y * 3 + x));
                }
            }
        }
        EXPECT_EQ(obs, stack.observation());
    }
    EXPECT_THROW(stack.push(GrayFrame(2, 3)), DimensionError);
}

TEST(Ppm, RoundTripAndComments) {
    Rng rng(6);
    const RgbFrame f = random_rgb(5, 3, rng);
    std::stringstream text;
    write_ppm(text, f);
    EXPECT_EQ(read_ppm(text), f);

    std::istringstream commented("P3 # magic\n2 1\n# max\n255\n255 0 0  0 0 255\n");
    const RgbFrame g = read_ppm(commented);
    EXPECT_EQ(g.width, 2u);
    EXPECT_EQ(g.at(0, 0, 0), 255);
    EXPECT_EQ(g.at(1, 0, 2), 255);
}

TEST(Ppm, MalformedInput) {
    for (const char* text : {"P6 1 1 255 0 0 0", "P3 1 1 65535 0 0 0", "P3 1 1 255 0 0", "P3 1 1 255 0 0 300",
                             "P3 0 1 255", "P3 x 1 255 0 0 0"}) {
        std::istringstream in(text);
        EXPECT_THROW(read_ppm(in), FormatError) << text;
    }
}

TEST(Pipeline, AtariStyleChainProducesStackedObservation) {
    Rng rng(7);
    FrameStack stack(4, 3);
    RgbFrame previous = random_rgb(8, 6, rng);
    std::vector<double> obs;
    for (int t = 0; t < 5; ++t) {
        const RgbFrame current = random_rgb(8, 6, rng);
        obs = stack.push(rescale(luminance(pixel_max(previous, current)), 4, 3));
        previous = current;
    }
    ASSERT_EQ(obs.size(), 4u * 4 * 3);
    for (double v : obs) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}
