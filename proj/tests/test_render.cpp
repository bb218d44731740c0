#include <doctest.h>

#include <cmath>
#include <random>

#include "psfnet/psf_ops.hpp"
#include "psfnet/render.hpp"
#include "psfnet/synth.hpp"

using namespace psfnet;

namespace {

// A model whose forward output is a fixed kernel regardless of inputs
// (zero weights, kernel baked into the output biases).
MlpModel constant_kernel_model(const PsfGrid& kernel) {
    MlpModel m;
    const int k2 = kernel.width * kernel.height;
    m.layer_sizes = {3, 1, k2};
    m.w1 = Eigen::MatrixXd::Zero(1, 3);
    m.b1 = Eigen::VectorXd::Zero(1);
    m.w2 = Eigen::MatrixXd::Zero(k2, 1);
    m.b2.resize(k2);
    for (int i = 0; i < k2; ++i) m.b2[i] = kernel.values[static_cast<size_t>(i)];
    m.out_width = kernel.width;
    m.out_height = kernel.height;
    m.out_pitch_um = kernel.pitch_um;
    return m;
}

// Field-dependent model: hidden tanh of normalized inputs feeds the output,
// enough nonconstant structure to exercise the tiling path.
MlpModel varying_model(int k, double pitch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    MlpModel m;
    m.layer_sizes = {3, 6, k * k};
    m.w1.resize(6, 3);
    m.b1.resize(6);
    m.w2.resize(k * k, 6);
    m.b2.resize(k * k);
    for (Eigen::Index i = 0; i < m.w1.size(); ++i) m.w1.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < m.b1.size(); ++i) m.b1[i] = dist(rng);
    for (Eigen::Index i = 0; i < m.w2.size(); ++i) m.w2.data()[i] = dist(rng);
    for (Eigen::Index i = 0; i < m.b2.size(); ++i) m.b2[i] = 0.5 + dist(rng);
    m.input_norm = {{{0.0, 50.0}, {0.0, 3.0}, {180.0, 180.0}}};
    m.out_width = k;
    m.out_height = k;
    m.out_pitch_um = pitch;
    return m;
}

}  // namespace

TEST_CASE("pixel_to_field axis conventions") {
    FieldMapping mapping{100.0, 100.0, 1.0};
    FieldPoint origin = pixel_to_field(mapping, 100.0, 100.0, 5.0);
    CHECK(origin.r_mm == 0.0);
    CHECK(origin.phi_deg == 0.0);
    CHECK(origin.dz_um == 5.0);

    FieldPoint right = pixel_to_field(mapping, 1100.0, 100.0, 0.0);  // 1000 um right
    CHECK(right.r_mm == doctest::Approx(1.0));
    CHECK(right.phi_deg == doctest::Approx(0.0));

    FieldPoint above = pixel_to_field(mapping, 100.0, 50.0, 0.0);  // smaller row = up
    CHECK(above.phi_deg == doctest::Approx(90.0));

    FieldPoint left = pixel_to_field(mapping, 50.0, 100.0, 0.0);
    CHECK(left.phi_deg == doctest::Approx(180.0));
}

TEST_CASE("thin lens: unit magnification and infinity focus") {
    CHECK(defocus_from_depth(12.0, 6.0, 12.0) == 0.0);
    // i(2f) = 2f exactly
    const double i_2f = 6.0 * 12.0 / (12.0 - 6.0);
    CHECK(i_2f == 12.0);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(defocus_from_depth(inf, 6.0, inf) == 0.0);
    // f = 6mm, focus at infinity, object at 10m
    const double dz = defocus_from_depth(10000.0, 6.0, inf);
    const double expected = (6.0 * 10000.0 / (10000.0 - 6.0) - 6.0) * 1000.0;
    CHECK(dz == doctest::Approx(expected).epsilon(1e-12));
    CHECK(dz == doctest::Approx(3.602161).epsilon(1e-6));
}

TEST_CASE("thin lens rejects distances at or inside the focal length") {
    CHECK_THROWS_AS(defocus_from_depth(5.0, 6.0, 100.0), BehindFocalPlane);
    CHECK_THROWS_AS(defocus_from_depth(100.0, 6.0, 6.0), BehindFocalPlane);
}

TEST_CASE("linear depth gradient") {
    DefocusMap m = linear_depth_gradient(3, 2, 50.0, -50.0);
    CHECK(m.at(0, 0) == 50.0);
    CHECK(m.at(1, 0) == 0.0);
    CHECK(m.at(2, 1) == -50.0);

    DefocusMap flat = linear_depth_gradient(4, 4, 7.0, 7.0);
    for (double v : flat.dz_um) CHECK(v == 7.0);

    DefocusMap wide = linear_depth_gradient(101, 1, 50.0, -50.0);
    CHECK(wide.at(25, 0) == doctest::Approx(25.0));
}

TEST_CASE("checkerboard pattern") {
    Image b = checkerboard(2, 2, 1, 0.0, 1.0);
    CHECK(b.at(0, 0) == 1.0);
    CHECK(b.at(1, 0) == 0.0);
    CHECK(b.at(0, 1) == 0.0);
    CHECK(b.at(1, 1) == 1.0);

    Image bands = checkerboard(4, 8, 4, 0.2, 0.8);
    CHECK(bands.at(0, 0) == 0.8);
    CHECK(bands.at(3, 3) == 0.8);
    CHECK(bands.at(0, 4) == 0.2);

    // level counts balanced up to one cell row/column
    Image big = checkerboard(30, 20, 7, 0.0, 1.0);
    int high = 0;
    for (double v : big.values) high += (v == 1.0);
    const int low = 30 * 20 - high;
    CHECK(std::abs(high - low) <= 7 * 30);
}

TEST_CASE("delta image reproduces the kernel stamp") {
    SynthLensSpec lens;
    PsfGrid kernel = normalize_volume(synth_psf(lens, FieldPoint(0, 0, 0), 13, 13, 6.5));
    MlpModel m = constant_kernel_model(kernel);
    const PsfGrid k = forward(m, FieldPoint(0, 0, 0));

    Image img(33, 33, 6.5);
    img.at(16, 16) = 1.0;
    DefocusMap dz(33, 33, 0.0);
    FieldMapping mapping{16.0, 16.0, 6.5};
    Image out = convolve_spatially_variant(img, m, mapping, dz, 64);
    for (int y = 0; y < 13; ++y)
        for (int x = 0; x < 13; ++x)
            CHECK(out.at(16 - 6 + x, 16 - 6 + y) ==
                  doctest::Approx(k.at(x, y)).epsilon(1e-12));
}

TEST_CASE("uniform image is invariant under volume-1 kernels") {
    MlpModel m = varying_model(9, 2.0, 11);
    Image img(40, 40, 2.0, 0.37);
    DefocusMap dz(40, 40, 3.0);
    FieldMapping mapping{19.5, 19.5, 2.0};
    Image out = convolve_spatially_variant(img, m, mapping, dz, 8);
    for (double v : out.values) CHECK(v == doctest::Approx(0.37).epsilon(1e-6));
}

TEST_CASE("tile_px = 1 equals brute-force per-pixel inference") {
    MlpModel m = varying_model(7, 1.5, 23);
    SynthLensSpec lens;
    Image img(32, 32, 1.5);
    // textured input
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) img.at(x, y) = 0.5 + 0.5 * std::sin(0.7 * x) * std::cos(0.3 * y);
    DefocusMap dz = linear_depth_gradient(32, 32, -20.0, 20.0);
    FieldMapping mapping{15.5, 15.5, 1.5};

    Image tiled = convolve_spatially_variant(img, m, mapping, dz, 1);

    // independent brute-force oracle
    Image expected(32, 32, 1.5);
    const int kc = 7 / 2;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) {
            const FieldPoint fp = pixel_to_field(mapping, x, y, dz.at(x, y));
            const PsfGrid k = forward(m, fp);
            double acc = 0.0;
            for (int ky = 0; ky < 7; ++ky)
                for (int kx = 0; kx < 7; ++kx) {
                    const int sx = std::clamp(x - (kx - kc), 0, 31);
                    const int sy = std::clamp(y - (ky - kc), 0, 31);
                    acc += k.at(kx, ky) * img.at(sx, sy);
                }
            expected.at(x, y) = acc;
        }
    for (size_t i = 0; i < tiled.values.size(); ++i)
        CHECK(std::fabs(tiled.values[i] - expected.values[i]) < 1e-9);
}

TEST_CASE("energy bound and non-negativity") {
    MlpModel m = varying_model(9, 2.0, 31);
    Image img(48, 48, 2.0);
    for (int y = 0; y < 48; ++y)
        for (int x = 0; x < 48; ++x) img.at(x, y) = ((x + y) % 5) / 5.0;
    DefocusMap dz(48, 48, 0.0);
    FieldMapping mapping{23.5, 23.5, 2.0};
    Image out = convolve_spatially_variant(img, m, mapping, dz, 16);
    double in_sum = 0.0, out_sum = 0.0;
    for (double v : img.values) in_sum += v;
    for (double v : out.values) {
        CHECK(v >= 0.0);
        out_sum += v;
    }
    CHECK(out_sum <= in_sum * (1.0 + 1e-6));
}

TEST_CASE("determinism: identical inputs give identical outputs") {
    MlpModel m = varying_model(7, 1.0, 41);
    Image img = checkerboard(36, 36, 6, 0.1, 0.9);
    DefocusMap dz = linear_depth_gradient(36, 36, 50.0, -50.0);
    FieldMapping mapping{17.5, 17.5, 1.0};
    Image a = convolve_spatially_variant(img, m, mapping, dz, 8);
    Image b = convolve_spatially_variant(img, m, mapping, dz, 8);
    CHECK(a == b);
}

TEST_CASE("defocus outside the envelope is clamped and counted") {
    MlpModel m = varying_model(7, 1.0, 43);
    Image img(16, 16, 1.0, 0.5);
    DefocusMap dz(16, 16, 120.0);
    FieldMapping mapping{7.5, 7.5, 1.0};
    ConvolveStats stats;
    convolve_spatially_variant(img, m, mapping, dz, 8, &stats);
    CHECK(stats.clamped_dz_count > 0);
}

TEST_CASE("pitch and dimension contracts") {
    MlpModel m = varying_model(7, 2.0, 47);
    Image img(16, 16, 1.0, 0.5);  // pitch differs from kernel
    DefocusMap dz(16, 16, 0.0);
    FieldMapping mapping{7.5, 7.5, 1.0};
    CHECK_THROWS_AS(convolve_spatially_variant(img, m, mapping, dz, 4), PitchMismatch);

    Image ok(16, 16, 2.0, 0.5);
    DefocusMap bad(8, 8, 0.0);
    CHECK_THROWS_AS(convolve_spatially_variant(ok, m, mapping, bad, 4), DimensionMismatch);
}
