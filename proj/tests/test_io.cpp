#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "psfnet/io.hpp"
#include "psfnet/psf_ops.hpp"
#include "psfnet/synth.hpp"

using namespace psfnet;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("psfnet_io_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

PsfDataset small_dataset() {
    SynthLensSpec spec;
    spec.noise_floor = 1e-3;
    SamplingGrid grid{{-10.0, 0.0}, {0.0, 2.0}, {0.0, 90.0}};
    PsfDataset data = generate_dataset(spec, grid, 13, 13, 6.5);
    for (auto& [fp, g] : data.samples) g = normalize_volume(g);
    return data;
}

}  // namespace

TEST_CASE("psfd round-trip preserves metadata and f32-quantized values") {
    TempDir tmp;
    PsfDataset data = small_dataset();
    const std::string path = tmp.file("d.psfd");
    save_dataset(data, path);
    PsfDataset back = load_dataset(path);
    REQUIRE(back.size() == data.size());
    CHECK(back.grid_width == 13);
    CHECK(back.grid_height == 13);
    CHECK(back.pitch_um == 6.5);
    for (size_t i = 0; i < data.size(); ++i) {
        CHECK(back.samples[i].first == data.samples[i].first);
        for (size_t p = 0; p < data.samples[i].second.values.size(); ++p)
            CHECK(back.samples[i].second.values[p] ==
                  static_cast<double>(static_cast<float>(data.samples[i].second.values[p])));
    }
}

TEST_CASE("psfd rejects unknown magic, version and truncation") {
    TempDir tmp;
    PsfDataset data = small_dataset();
    const std::string path = tmp.file("d.psfd");
    save_dataset(data, path);

    std::ifstream f(path, std::ios::binary);
    std::vector<char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    auto write_variant = [&](const std::string& name, auto mutate) {
        std::vector<char> copy = bytes;
        mutate(copy);
        std::ofstream o(tmp.file(name), std::ios::binary);
        o.write(copy.data(), static_cast<std::streamsize>(copy.size()));
    };
    write_variant("magic.psfd", [](std::vector<char>& b) { b[0] = 'X'; });
    write_variant("version.psfd", [](std::vector<char>& b) { b[4] = 9; });
    write_variant("short.psfd", [](std::vector<char>& b) { b.resize(b.size() / 2); });

    CHECK_THROWS_AS(load_dataset(tmp.file("magic.psfd")), BadMagic);
    CHECK_THROWS_AS(load_dataset(tmp.file("version.psfd")), BadVersion);
    CHECK_THROWS_AS(load_dataset(tmp.file("short.psfd")), TruncatedFile);
}

TEST_CASE("pgm 16-bit round-trip is exact at quantization resolution") {
    TempDir tmp;
    Image img(7, 5, 1.0);
    for (size_t i = 0; i < img.values.size(); ++i)
        img.values[i] = static_cast<double>(i) / (img.values.size() - 1);
    const std::string path = tmp.file("img.pgm");
    save_pgm(img, path);
    Image back = load_pgm(path);
    REQUIRE(back.width == 7);
    REQUIRE(back.height == 5);
    for (size_t i = 0; i < img.values.size(); ++i)
        CHECK(std::fabs(back.values[i] - img.values[i]) <= 0.5 / 65535.0);
}

TEST_CASE("pgm 8-bit round-trip and out-of-range clamping") {
    TempDir tmp;
    Image img(3, 1, 1.0);
    img.values = {-0.2, 0.5, 1.7};
    const std::string path = tmp.file("img8.pgm");
    save_pgm(img, path, 255);
    Image back = load_pgm(path);
    CHECK(back.values[0] == 0.0);
    CHECK(back.values[1] == doctest::Approx(0.5).epsilon(1e-2));
    CHECK(back.values[2] == 1.0);
}

TEST_CASE("pgm rejects non-P5 input and truncated data") {
    TempDir tmp;
    {
        std::ofstream o(tmp.file("bad.pgm"), std::ios::binary);
        o << "P2\n2 2\n255\n0 0 0 0\n";
    }
    CHECK_THROWS_AS(load_pgm(tmp.file("bad.pgm")), BadMagic);
    {
        std::ofstream o(tmp.file("short.pgm"), std::ios::binary);
        o << "P5\n4 4\n255\nab";
    }
    CHECK_THROWS_AS(load_pgm(tmp.file("short.pgm")), TruncatedFile);
}

TEST_CASE("pgm write is deterministic byte-for-byte") {
    TempDir tmp;
    Image img(16, 16, 1.0);
    for (size_t i = 0; i < img.values.size(); ++i) img.values[i] = (i % 7) / 7.0;
    save_pgm(img, tmp.file("a.pgm"));
    save_pgm(img, tmp.file("b.pgm"));
    CHECK(file_digest(tmp.file("a.pgm")) == file_digest(tmp.file("b.pgm")));
}

TEST_CASE("run manifest text contains all fields") {
    TempDir tmp;
    RunManifest m;
    m.command = "train";
    m.flags = {{"hidden", "64"}, {"out", "model.psfn"}};
    m.input_digests = {{"data.psfd", "0123456789abcdef"}};
    m.tool_version = "0.1.0";
    m.seed = 7;
    m.duration_s = 1.5;
    const std::string text = m.to_text();
    CHECK(text.find("command=train") != std::string::npos);
    CHECK(text.find("flag.hidden=64") != std::string::npos);
    CHECK(text.find("input.data.psfd=0123456789abcdef") != std::string::npos);
    CHECK(text.find("seed=7") != std::string::npos);

    m.write(tmp.file("out.bin"));
    CHECK(fs::exists(tmp.file("out.bin") + ".manifest"));
}
