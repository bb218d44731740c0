#pragma once

#include <cstdint>
#include <string>

#include "psfnet/render.hpp"
#include "psfnet/types.hpp"

namespace psfnet {

// .psfd dataset container, little-endian:
//   "PSFD" | version u32 = 1 | count u32 | width u32 | height u32 | pitch f64
//   then per sample: dz f64, r f64, phi f64, width*height f32 row-major.
void save_dataset(const PsfDataset& data, const std::string& path);
PsfDataset load_dataset(const std::string& path);

/// Binary PGM (P5), 8- or 16-bit, big-endian sample order. Values are
/// normalized to [0,1] on read and scaled + rounded half-up on write.
void save_pgm(const Image& img, const std::string& path, int maxval = 65535);
Image load_pgm(const std::string& path, double pitch_um = 1.0);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex chars.
std::string file_digest(const std::string& path);

/// Flat key=value run manifest written alongside every CLI output.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> flags;
    std::vector<std::pair<std::string, std::string>> input_digests;  // path -> digest
    std::string tool_version;
    std::uint64_t seed = 0;
    double duration_s = 0.0;

    std::string to_text() const;
    void write(const std::string& out_path) const;  // writes out_path + ".manifest"
};

}  // namespace psfnet
