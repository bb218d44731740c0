#include "psfnet/io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace psfnet {

namespace {

std::vector<std::uint8_t> read_all(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path);
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

void write_all(const std::string& path, const void* data, size_t size) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path + " for writing");
    f.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!f) throw Error("write failed: " + path);
}

struct ByteReader {
    const std::vector<std::uint8_t>& buf;
    size_t pos = 0;

    void need(size_t count) const {
        if (pos + count > buf.size()) throw TruncatedFile("file truncated");
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
        return v;
    }
    float f32() {
        need(4);
        std::uint32_t bits = 0;
        for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(buf[pos++]) << (8 * i);
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(buf[pos++]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

}  // namespace

void save_dataset(const PsfDataset& data, const std::string& path) {
    if (data.samples.empty()) throw InsufficientData("refusing to write an empty dataset");
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'P', 'S', 'F', 'D'});
    put_u32(out, 1);
    put_u32(out, static_cast<std::uint32_t>(data.samples.size()));
    put_u32(out, static_cast<std::uint32_t>(data.grid_width));
    put_u32(out, static_cast<std::uint32_t>(data.grid_height));
    put_f64(out, data.pitch_um);
    for (const auto& [fp, grid] : data.samples) {
        put_f64(out, fp.dz_um);
        put_f64(out, fp.r_mm);
        put_f64(out, fp.phi_deg);
        for (double v : grid.values) put_f32(out, static_cast<float>(v));
    }
    write_all(path, out.data(), out.size());
}

PsfDataset load_dataset(const std::string& path) {
    const auto bytes = read_all(path);
    ByteReader rd{bytes};
    rd.need(4);
    if (std::memcmp(bytes.data(), "PSFD", 4) != 0) throw BadMagic("not a .psfd dataset file");
    rd.pos = 4;
    const std::uint32_t version = rd.u32();
    if (version != 1) throw BadVersion("unsupported .psfd version " + std::to_string(version));
    const std::uint32_t count = rd.u32();
    PsfDataset data;
    data.grid_width = static_cast<int>(rd.u32());
    data.grid_height = static_cast<int>(rd.u32());
    data.pitch_um = rd.f64();
    for (std::uint32_t s = 0; s < count; ++s) {
        const double dz = rd.f64();
        const double r = rd.f64();
        const double phi = rd.f64();
        PsfGrid grid(data.grid_width, data.grid_height, data.pitch_um);
        for (double& v : grid.values) v = rd.f32();
        data.push(FieldPoint(dz, r, phi), std::move(grid));
    }
    return data;
}

void save_pgm(const Image& img, const std::string& path, int maxval) {
    if (maxval != 255 && maxval != 65535) throw Error("PGM maxval must be 255 or 65535");
    std::ostringstream header;
    header << "P5\n" << img.width << " " << img.height << "\n" << maxval << "\n";
    const std::string head = header.str();
    std::vector<std::uint8_t> out(head.begin(), head.end());
    for (double v : img.values) {
        const double clamped = std::min(std::max(v, 0.0), 1.0);
        const auto q = static_cast<std::uint32_t>(std::floor(clamped * maxval + 0.5));
        if (maxval == 65535) out.push_back(static_cast<std::uint8_t>(q >> 8));  // big-endian
        out.push_back(static_cast<std::uint8_t>(q & 0xff));
    }
    write_all(path, out.data(), out.size());
}

Image load_pgm(const std::string& path, double pitch_um) {
    const auto bytes = read_all(path);
    size_t pos = 0;
    auto token = [&]() -> std::string {
        // Skip whitespace and '#' comment lines.
        while (pos < bytes.size()) {
            if (std::isspace(bytes[pos])) {
                ++pos;
            } else if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t += static_cast<char>(bytes[pos++]);
        if (t.empty()) throw TruncatedFile("PGM header truncated");
        return t;
    };
    if (token() != "P5") throw BadMagic("not a binary PGM (P5) file");
    const int w = std::stoi(token());
    const int h = std::stoi(token());
    const int maxval = std::stoi(token());
    if (w < 1 || h < 1 || maxval < 1 || maxval > 65535) throw Error("bad PGM header");
    ++pos;  // single whitespace after maxval

    Image img(w, h, pitch_um);
    const size_t count = static_cast<size_t>(w) * h;
    if (maxval > 255) {
        if (pos + 2 * count > bytes.size()) throw TruncatedFile("PGM data truncated");
        for (size_t i = 0; i < count; ++i) {
            const int v = (bytes[pos] << 8) | bytes[pos + 1];
            pos += 2;
            img.values[i] = static_cast<double>(v) / maxval;
        }
    } else {
        if (pos + count > bytes.size()) throw TruncatedFile("PGM data truncated");
        for (size_t i = 0; i < count; ++i) img.values[i] = static_cast<double>(bytes[pos++]) / maxval;
    }
    return img;
}

std::string file_digest(const std::string& path) {
    const auto bytes = read_all(path);
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (std::uint8_t b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string RunManifest::to_text() const {
    std::ostringstream os;
    os << "command=" << command << "\n";
    for (const auto& [k, v] : flags) os << "flag." << k << "=" << v << "\n";
    for (const auto& [path, digest] : input_digests) os << "input." << path << "=" << digest << "\n";
    os << "tool_version=" << tool_version << "\n";
    os << "seed=" << seed << "\n";
    os << "duration_s=" << duration_s << "\n";
    return os.str();
}

void RunManifest::write(const std::string& out_path) const {
    const std::string text = to_text();
    write_all(out_path + ".manifest", text.data(), text.size());
}

}  // namespace psfnet
