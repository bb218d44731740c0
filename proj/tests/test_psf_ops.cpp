#include <doctest.h>

#include <cmath>
#include <random>

#include "psfnet/psf_ops.hpp"
#include "psfnet/synth.hpp"

using namespace psfnet;

namespace {

PsfGrid random_blob(std::uint64_t seed, int size = 21, double pitch = 1.0) {
    SynthLensSpec spec;
    spec.seed = seed;
    spec.noise_floor = 1e-3;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dz(-40.0, 40.0), r(-3.0, 3.0), phi(0.0, 360.0);
    return synth_psf(spec, FieldPoint(dz(rng), r(rng), phi(rng)), size, size, pitch);
}

}  // namespace

TEST_CASE("centroid of a point mass is its position") {
    PsfGrid g(8, 8, 1.0);
    g.at(3, 5) = 2.5;
    auto [cx, cy] = centroid(g);
    CHECK(cx == doctest::Approx(3.0));
    CHECK(cy == doctest::Approx(5.0));
}

TEST_CASE("centroid of a uniform 4x4 grid is the geometric center") {
    PsfGrid g(4, 4, 1.0, 1.0);
    auto [cx, cy] = centroid(g);
    CHECK(cx == doctest::Approx(1.5));
    CHECK(cy == doctest::Approx(1.5));
}

TEST_CASE("centroid weighted mean, hand-computed") {
    PsfGrid g(3, 1, 1.0);
    g.at(0, 0) = 1.0;
    g.at(2, 0) = 3.0;
    auto [cx, cy] = centroid(g);
    CHECK(cx == doctest::Approx(1.5));
    CHECK(cy == doctest::Approx(0.0));
}

TEST_CASE("centroid rejects an all-zero grid") {
    PsfGrid g(4, 4, 1.0);
    CHECK_THROWS_AS(centroid(g), AllZeroGrid);
    CHECK_THROWS_AS(center_and_crop(g, 3), AllZeroGrid);
    CHECK_THROWS_AS(normalize_volume(g), AllZeroGrid);
}

TEST_CASE("center_and_crop: point mass at grid center is a fixed point") {
    PsfGrid g(9, 9, 0.5);
    g.at(4, 4) = 1.0;
    CHECK(center_and_crop(g, 9) == g);
}

TEST_CASE("center_and_crop: corner mass lands on the output center, volume conserved") {
    PsfGrid g(9, 9, 1.0);
    g.at(0, 0) = 2.0;
    PsfGrid out = center_and_crop(g, 3);
    CHECK(out.width == 3);
    CHECK(out.at(1, 1) == 2.0);
    CHECK(out.sum() == doctest::Approx(2.0));
}

TEST_CASE("center_and_crop: large input crops to requested size with pitch unchanged") {
    PsfGrid g(1400, 1100, 0.3070);
    g.at(700, 550) = 1.0;
    g.at(710, 560) = 0.5;
    PsfGrid out = center_and_crop(g, 256);
    CHECK(out.width == 256);
    CHECK(out.height == 256);
    CHECK(out.pitch_um == 0.3070);
    CHECK(out.sum() == doctest::Approx(1.5));
}

TEST_CASE("centering fixed point: centroid of a centered crop is near the window center") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        PsfGrid g = random_blob(seed, 41);
        for (int n : {9, 16, 21}) {
            PsfGrid c = center_and_crop(g, n);
            auto [cx, cy] = centroid(c);
            CHECK(std::fabs(cx - (n - 1) / 2.0) <= 0.5);
            CHECK(std::fabs(cy - (n - 1) / 2.0) <= 0.5);
        }
    }
}

TEST_CASE("resample: identity when pitch and size match") {
    PsfGrid g = random_blob(11, 16);
    CHECK(resample(g, g.pitch_um, 16) == g);
}

TEST_CASE("resample: exact 2x integer binning") {
    PsfGrid g(4, 4, 1.0, 1.0);
    PsfGrid out = resample(g, 2.0, 2);
    CHECK(out.width == 2);
    for (double v : out.values) CHECK(v == doctest::Approx(4.0));
    CHECK(out.sum() == doctest::Approx(16.0));
}

TEST_CASE("resample: 256 @ 0.3070um to 13 @ 6.5um") {
    PsfGrid g = random_blob(5, 256, 0.3070);
    PsfGrid out = resample(g, 6.5, 13);
    CHECK(out.width == 13);
    CHECK(out.height == 13);
    CHECK(out.pitch_um == 6.5);
    // 13 x 6.5um covers more than 256 x 0.307um, so volume is conserved
    CHECK(out.sum() == doctest::Approx(g.sum()).epsilon(1e-9));
}

TEST_CASE("resample rejects upsampling") {
    PsfGrid g(4, 4, 2.0, 1.0);
    CHECK_THROWS_AS(resample(g, 1.0, 8), UpsampleNotSupported);
}

TEST_CASE("resample volume properties over random grids") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        PsfGrid g = random_blob(seed, 24);
        // integer ratio, output footprint covers the input: conserved
        PsfGrid covered = resample(g, 2.0, 12);
        CHECK(covered.sum() == doctest::Approx(g.sum()).epsilon(1e-9));
        // cropping footprint: can only lose energy
        PsfGrid cropped = resample(g, 3.0, 4);
        CHECK(cropped.sum() <= g.sum() + 1e-9);
    }
}

TEST_CASE("normalize_volume: uniform 13x13 becomes 1/169 everywhere") {
    PsfGrid g(13, 13, 6.5, 0.7);
    PsfGrid out = normalize_volume(g);
    for (double v : out.values) CHECK(v == doctest::Approx(1.0 / 169.0));
    CHECK(std::fabs(out.sum() - 1.0) < 1e-12);
}

TEST_CASE("normalize_volume: idempotent and scale invariant") {
    PsfGrid g = random_blob(3, 13);
    PsfGrid n1 = normalize_volume(g);
    PsfGrid n2 = normalize_volume(n1);
    PsfGrid scaled = g;
    for (double& v : scaled.values) v *= 17.5;
    PsfGrid n3 = normalize_volume(scaled);
    for (size_t i = 0; i < n1.values.size(); ++i) {
        CHECK(std::fabs(n1.values[i] - n2.values[i]) < 1e-12);
        CHECK(std::fabs(n1.values[i] - n3.values[i]) < 1e-12);
    }
}

TEST_CASE("normalize_volume: proportionality") {
    PsfGrid g(2, 1, 1.0);
    g.at(0, 0) = 2.0;
    g.at(1, 0) = 6.0;
    PsfGrid out = normalize_volume(g);
    CHECK(out.at(0, 0) == doctest::Approx(0.25));
    CHECK(out.at(1, 0) == doctest::Approx(0.75));
}

TEST_CASE("flatten is row-major and unflatten inverts it exactly") {
    PsfGrid g(2, 2, 1.0);
    g.at(0, 0) = 1.0;
    g.at(1, 0) = 2.0;
    g.at(0, 1) = 3.0;
    g.at(1, 1) = 4.0;
    auto v = flatten(g);
    CHECK(v == std::vector<double>{1.0, 2.0, 3.0, 4.0});
    CHECK(unflatten(v, 2, 2, 1.0) == g);

    PsfGrid blob = random_blob(9, 13);
    auto fv = flatten(blob);
    CHECK(fv.size() == 169);
    CHECK(unflatten(fv, 13, 13, blob.pitch_um) == blob);
}

TEST_CASE("unflatten rejects length mismatch") {
    CHECK_THROWS_AS(unflatten(std::vector<double>(5), 2, 2, 1.0), DimensionMismatch);
}
