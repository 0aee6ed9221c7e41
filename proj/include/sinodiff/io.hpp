#pragma once

#include <json.hpp>
#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "sinodiff/core.hpp"
#include "sinodiff/geometry.hpp"
#include "sinodiff/hankel.hpp"
#include "sinodiff/noise.hpp"
#include "sinodiff/sampler.hpp"
#include "sinodiff/score.hpp"

namespace sinodiff {

static_assert(std::endian::native == std::endian::little,
              "raw-float payloads are little-endian; big-endian hosts are unsupported");

/// One persisted 2D array: little-endian float32 row-major payload in
/// <basename>.raw plus a JSON sidecar <basename>.json carrying dims, kind
/// ("image" | "sinogram" | "hankel"), the scale factor applied to physical
/// values, and src_dims for Hankel dumps.
struct RawArray {
    std::string kind = "image";
    int width  = 0;
    int height = 0;
    double scale = 1.0;
    ArrayRM values;
    nlohmann::json sidecar;
};

namespace detail {

inline void write_file(const std::string& path, const void* data, std::size_t bytes) {
    std::ofstream f(path, std::ios::binary);
    require_data(f.good(), "cannot open for writing: " + path);
    f.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    require_data(f.good(), "write failed: " + path);
}

inline std::vector<char> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    require_data(f.good(), "cannot open: " + path);
    const std::streamsize bytes = f.tellg();
    std::vector<char> buf(static_cast<std::size_t>(bytes));
    f.seekg(0);
    f.read(buf.data(), bytes);
    require_data(f.good(), "read failed: " + path);
    return buf;
}

}  // namespace detail

inline void save_raw(const std::string& basename, const ArrayRM& values, const std::string& kind,
                     double scale = 1.0, nlohmann::json extra = nlohmann::json::object()) {
    require(kind == "image" || kind == "sinogram" || kind == "hankel", "save_raw: bad kind");
    std::vector<float> payload(static_cast<std::size_t>(values.size()));
    for (Index i = 0; i < values.size(); ++i)
        payload[static_cast<std::size_t>(i)] = static_cast<float>(values.data()[i]);
    detail::write_file(basename + ".raw", payload.data(), payload.size() * sizeof(float));

    nlohmann::json sidecar = std::move(extra);
    sidecar["width"]  = static_cast<int>(values.cols());
    sidecar["height"] = static_cast<int>(values.rows());
    sidecar["kind"]   = kind;
    sidecar["scale"]  = scale;
    std::ofstream f(basename + ".json");
    require_data(f.good(), "cannot open for writing: " + basename + ".json");
    f << sidecar.dump(2) << "\n";
}

inline RawArray load_raw(const std::string& basename) {
    std::ifstream jf(basename + ".json");
    require_data(jf.good(), "cannot open: " + basename + ".json");
    RawArray out;
    out.sidecar = nlohmann::json::parse(jf);
    out.kind    = out.sidecar.at("kind").get<std::string>();
    out.width   = out.sidecar.at("width").get<int>();
    out.height  = out.sidecar.at("height").get<int>();
    out.scale   = out.sidecar.at("scale").get<double>();
    require_data(out.width > 0 && out.height > 0, "load_raw: bad dims in sidecar");

    const std::vector<char> buf = detail::read_file(basename + ".raw");
    const std::size_t expect = std::size_t(out.width) * std::size_t(out.height) * sizeof(float);
    require_data(buf.size() == expect,
                 "load_raw: payload size does not match sidecar dims: " + basename);
    out.values.resize(out.height, out.width);
    const float* p = reinterpret_cast<const float*>(buf.data());
    for (Index i = 0; i < out.values.size(); ++i) out.values.data()[i] = p[i];
    return out;
}

inline void save_image(const std::string& basename, const Image& img, double scale = 1.0) {
    save_raw(basename, img.values, "image", scale);
}

inline void save_sinogram(const std::string& basename, const Sinogram& s, double scale = 1.0) {
    save_raw(basename, s.values, "sinogram", scale);
}

/// Debug dump of a Hankel matrix with src_dims and, when P >= 8, the
/// triple*-partition row ranges.
inline void save_hankel(const std::string& basename, const HankelMatrix& h, double scale = 1.0) {
    h.validate();
    nlohmann::json extra;
    extra["src_dims"] = {{"lx", h.src.lx}, {"ly", h.src.ly}, {"l", h.src.l}};
    if (h.rows() >= 8) {
        const Index p = h.rows(), m1 = p / 2, m2 = p - m1;
        extra["partitions"] = {{"part1", {0, m1}},
                               {"part2", {m1, p}},
                               {"part3", {m1 / 2, m1 + m2 / 2}}};
    }
    save_raw(basename, ArrayRM(h.values.array()), "hankel", scale, std::move(extra));
}

inline Image as_image(const RawArray& r) {
    require_data(r.kind == "image", "expected an image file");
    Image img(r.width, r.height);
    img.values = r.values;
    return img;
}

inline Sinogram as_sinogram(const RawArray& r) {
    require_data(r.kind == "sinogram", "expected a sinogram file");
    Sinogram s(r.height, r.width);
    s.values = r.values;
    return s;
}

// --------------------------------------------------------------------------
// 16-bit grayscale PNG with a linear display window.

namespace detail {

inline void append_u32be(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back(static_cast<unsigned char>(v >> 24));
    out.push_back(static_cast<unsigned char>(v >> 16));
    out.push_back(static_cast<unsigned char>(v >> 8));
    out.push_back(static_cast<unsigned char>(v));
}

inline void append_chunk(std::vector<unsigned char>& out, const char type[4],
                         const std::vector<unsigned char>& data) {
    append_u32be(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t crc_start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    const uLong crc = crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + data.size()));
    append_u32be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

/// Linear map [low, high] -> [0, 65535], clamped, written as 16-bit
/// grayscale PNG.
inline void export_png(const std::string& path, const ArrayRM& values, double low, double high) {
    require(low < high, "export_png: degenerate window");
    const int w = static_cast<int>(values.cols());
    const int h = static_cast<int>(values.rows());

    std::vector<unsigned char> scan(std::size_t(h) * (1 + std::size_t(w) * 2));
    std::size_t pos = 0;
    for (int r = 0; r < h; ++r) {
        scan[pos++] = 0;  // filter: none
        for (int c = 0; c < w; ++c) {
            const double t = (values(r, c) - low) / (high - low);
            const long q   = std::lround(std::clamp(t, 0.0, 1.0) * 65535.0);
            scan[pos++]    = static_cast<unsigned char>(q >> 8);
            scan[pos++]    = static_cast<unsigned char>(q & 0xff);
        }
    }

    uLongf comp_size = compressBound(static_cast<uLong>(scan.size()));
    std::vector<unsigned char> comp(comp_size);
    require_data(compress2(comp.data(), &comp_size, scan.data(), static_cast<uLong>(scan.size()),
                           9) == Z_OK,
                 "export_png: zlib compression failed");
    comp.resize(comp_size);

    std::vector<unsigned char> png = {137, 80, 78, 71, 13, 10, 26, 10};
    std::vector<unsigned char> ihdr;
    detail::append_u32be(ihdr, static_cast<std::uint32_t>(w));
    detail::append_u32be(ihdr, static_cast<std::uint32_t>(h));
    ihdr.push_back(16);  // bit depth
    ihdr.push_back(0);   // grayscale
    ihdr.push_back(0);   // deflate
    ihdr.push_back(0);   // adaptive filtering
    ihdr.push_back(0);   // no interlace
    detail::append_chunk(png, "IHDR", ihdr);
    detail::append_chunk(png, "IDAT", comp);
    detail::append_chunk(png, "IEND", {});
    detail::write_file(path, png.data(), png.size());
}

/// Read back a PNG written by export_png (16-bit grayscale, filter 0 rows).
inline ArrayRM read_png16(const std::string& path) {
    const std::vector<char> buf = detail::read_file(path);
    require_data(buf.size() > 8 && static_cast<unsigned char>(buf[1]) == 'P', "read_png16: not a PNG");
    std::size_t pos = 8;
    int w = 0, h = 0;
    std::vector<unsigned char> idat;
    auto u32 = [&](std::size_t at) {
        return (std::uint32_t(static_cast<unsigned char>(buf[at])) << 24) |
               (std::uint32_t(static_cast<unsigned char>(buf[at + 1])) << 16) |
               (std::uint32_t(static_cast<unsigned char>(buf[at + 2])) << 8) |
               std::uint32_t(static_cast<unsigned char>(buf[at + 3]));
    };
    while (pos + 8 <= buf.size()) {
        const std::uint32_t len = u32(pos);
        const std::string type(buf.begin() + pos + 4, buf.begin() + pos + 8);
        const std::size_t data = pos + 8;
        if (type == "IHDR") {
            w = static_cast<int>(u32(data));
            h = static_cast<int>(u32(data + 4));
            require_data(buf[data + 8] == 16 && buf[data + 9] == 0,
                         "read_png16: only 16-bit grayscale supported");
        } else if (type == "IDAT") {
            idat.insert(idat.end(), buf.begin() + data, buf.begin() + data + len);
        } else if (type == "IEND") {
            break;
        }
        pos = data + len + 4;
    }
    require_data(w > 0 && h > 0 && !idat.empty(), "read_png16: malformed file");

    const std::size_t raw_size = std::size_t(h) * (1 + std::size_t(w) * 2);
    std::vector<unsigned char> raw(raw_size);
    uLongf dest = static_cast<uLongf>(raw_size);
    require_data(uncompress(raw.data(), &dest, idat.data(), static_cast<uLong>(idat.size())) ==
                         Z_OK &&
                     dest == raw_size,
                 "read_png16: zlib inflate failed");

    ArrayRM out(h, w);
    std::size_t p = 0;
    for (int r = 0; r < h; ++r) {
        require_data(raw[p] == 0, "read_png16: unsupported row filter");
        ++p;
        for (int c = 0; c < w; ++c) {
            out(r, c) = double((std::uint16_t(raw[p]) << 8) | raw[p + 1]);
            p += 2;
        }
    }
    return out;
}

// --------------------------------------------------------------------------
// Run configuration: one JSON document covering every stage.

struct PathConfig {
    std::string image, sinogram, lowdose, models_prefix, output_prefix, reference;
};

inline void to_json(nlohmann::json& j, const PathConfig& p) {
    j = nlohmann::json{{"image", p.image},
                       {"sinogram", p.sinogram},
                       {"lowdose", p.lowdose},
                       {"models_prefix", p.models_prefix},
                       {"output_prefix", p.output_prefix},
                       {"reference", p.reference}};
}

inline void from_json(const nlohmann::json& j, PathConfig& p) {
    if (j.contains("image")) j.at("image").get_to(p.image);
    if (j.contains("sinogram")) j.at("sinogram").get_to(p.sinogram);
    if (j.contains("lowdose")) j.at("lowdose").get_to(p.lowdose);
    if (j.contains("models_prefix")) j.at("models_prefix").get_to(p.models_prefix);
    if (j.contains("output_prefix")) j.at("output_prefix").get_to(p.output_prefix);
    if (j.contains("reference")) j.at("reference").get_to(p.reference);
}

struct RunConfig {
    FanGeometry geometry;
    DoseSpec dose;
    ReconConfig recon;
    TrainConfig train;
    ScheduleSpec train_schedule{10, 0.1, 1.0};
    int window       = 8;
    int patch_rows   = 64;
    double eta       = 22000.0;  // PWLS calibration constant
    double rescale_max = 4.0;    // target max line integral before the exponential
    std::uint64_t seed = 0;
    PathConfig paths;
};

inline void to_json(nlohmann::json& j, const RunConfig& c) {
    j = nlohmann::json{{"geometry", c.geometry},
                       {"dose", c.dose},
                       {"recon", c.recon},
                       {"train", c.train},
                       {"train_schedule", c.train_schedule},
                       {"window", c.window},
                       {"patch_rows", c.patch_rows},
                       {"eta", c.eta},
                       {"rescale_max", c.rescale_max},
                       {"seed", c.seed},
                       {"paths", c.paths}};
}

/// Reject keys that the reference document does not carry, recursively.
inline void reject_unknown_keys(const nlohmann::json& doc, const nlohmann::json& reference,
                                const std::string& prefix = "") {
    if (!doc.is_object() || !reference.is_object()) return;
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (!reference.contains(it.key()))
            throw std::runtime_error("config: unknown key '" + prefix + it.key() + "'");
        reject_unknown_keys(it.value(), reference.at(it.key()), prefix + it.key() + ".");
    }
}

inline void from_json(const nlohmann::json& j, RunConfig& c) {
    reject_unknown_keys(j, nlohmann::json(RunConfig{}));
    // Partial documents are allowed; absent sections keep their defaults.
    if (j.contains("geometry")) j.at("geometry").get_to(c.geometry);
    if (j.contains("dose")) j.at("dose").get_to(c.dose);
    if (j.contains("recon")) j.at("recon").get_to(c.recon);
    if (j.contains("train")) j.at("train").get_to(c.train);
    if (j.contains("train_schedule")) j.at("train_schedule").get_to(c.train_schedule);
    if (j.contains("window")) j.at("window").get_to(c.window);
    if (j.contains("patch_rows")) j.at("patch_rows").get_to(c.patch_rows);
    if (j.contains("eta")) j.at("eta").get_to(c.eta);
    if (j.contains("rescale_max")) j.at("rescale_max").get_to(c.rescale_max);
    if (j.contains("seed")) j.at("seed").get_to(c.seed);
    if (j.contains("paths")) j.at("paths").get_to(c.paths);
    require(c.window >= 2, "config: window must be >= 2");
    require(c.patch_rows >= 1, "config: patch_rows must be >= 1");
    require(c.eta > 0.0, "config: eta must be > 0");
    require(c.rescale_max > 0.0, "config: rescale_max must be > 0");
}

/// FNV-1a over the canonical (sorted-key) dump.
inline std::string config_hash(const nlohmann::json& j) {
    const std::string dump = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : dump) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace sinodiff
