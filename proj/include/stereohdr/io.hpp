// Copyright (c) 2026 the stereohdr authors.
// The stereohdr source code is licensed under the Apache License, Version 2.0.
// SPDX: Apache-2.0

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stereohdr/camera.hpp"
#include "stereohdr/errors.hpp"
#include "stereohdr/fusion.hpp"
#include "stereohdr/histogram.hpp"
#include "stereohdr/image.hpp"
#include "stereohdr/planner.hpp"
#include "stereohdr/scene.hpp"

namespace stereohdr {

using nlohmann::json;

// --- PFM (grayscale, little endian) ----------------------------------------

inline void write_pfm(const std::filesystem::path& path, const ImageF& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw BadInput("cannot open " + path.string() + " for writing");
    f << "Pf\n" << img.width() << " " << img.height() << "\n-1.0\n";
    // PFM stores rows bottom-up
    for (int y = img.height() - 1; y >= 0; --y)
        for (int x = 0; x < img.width(); ++x) {
            float v = float(img.at(x, y));
            f.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

inline ImageF read_pfm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw BadInput("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    f >> magic >> w >> h >> scale;
    if (magic != "Pf" || w <= 0 || h <= 0) throw BadInput("not a grayscale PFM: " + path.string());
    if (scale > 0) throw BadInput("big-endian PFM unsupported: " + path.string());
    f.get();  // single whitespace after the header
    ImageF img(w, h);
    for (int y = h - 1; y >= 0; --y)
        for (int x = 0; x < w; ++x) {
            float v;
            f.read(reinterpret_cast<char*>(&v), sizeof v);
            img.at(x, y) = double(v);
        }
    if (!f) throw BadInput("truncated PFM: " + path.string());
    return img;
}

// --- PGM (binary, 8-bit) ----------------------------------------------------

inline void write_pgm(const std::filesystem::path& path, const ImageU8& img) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw BadInput("cannot open " + path.string() + " for writing");
    f << "P5\n" << img.width() << " " << img.height() << "\n255\n";
    f.write(reinterpret_cast<const char*>(img.data().data()), std::streamsize(img.size()));
}

inline ImageU8 read_pgm(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw BadInput("cannot open " + path.string());
    std::string magic;
    int w = 0, h = 0, maxval = 0;
    f >> magic >> w >> h >> maxval;
    if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255)
        throw BadInput("unsupported PGM: " + path.string());
    f.get();
    ImageU8 img(w, h);
    f.read(reinterpret_cast<char*>(img.data().data()), std::streamsize(img.size()));
    if (!f) throw BadInput("truncated PGM: " + path.string());
    return img;
}

// --- PNG (grayscale 8-bit, stored deflate) ----------------------------------

namespace io_detail {

inline uint32_t crc32_of(std::span<const uint8_t> data, uint32_t crc = 0) {
    static const auto table = [] {
        std::array<uint32_t, 256> t{};
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    crc ^= 0xffffffffu;
    for (uint8_t b : data) crc = table[(crc ^ b) & 0xffu] ^ (crc >> 8);
    return crc ^ 0xffffffffu;
}

inline void push_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(uint8_t(x >> 24));
    v.push_back(uint8_t(x >> 16));
    v.push_back(uint8_t(x >> 8));
    v.push_back(uint8_t(x));
}

inline void push_chunk(std::vector<uint8_t>& out, const char type[4], std::span<const uint8_t> payload) {
    push_u32(out, uint32_t(payload.size()));
    std::vector<uint8_t> body(type, type + 4);
    body.insert(body.end(), payload.begin(), payload.end());
    out.insert(out.end(), body.begin(), body.end());
    push_u32(out, crc32_of(body));
}

}  // namespace io_detail

/// Minimal PNG encoder (8-bit grayscale, uncompressed deflate blocks). Used
/// for previews; PFM stays the data format.
inline void write_png_gray(const std::filesystem::path& path, const ImageU8& img) {
    using namespace io_detail;
    std::vector<uint8_t> raw;
    raw.reserve(size_t(img.height()) * (size_t(img.width()) + 1));
    for (int y = 0; y < img.height(); ++y) {
        raw.push_back(0);  // filter: none
        for (int x = 0; x < img.width(); ++x) raw.push_back(img.at(x, y));
    }
    // zlib stream with stored blocks
    std::vector<uint8_t> z{0x78, 0x01};
    size_t pos = 0;
    while (pos < raw.size()) {
        size_t len = std::min<size_t>(65535, raw.size() - pos);
        z.push_back(pos + len == raw.size() ? 1 : 0);
        z.push_back(uint8_t(len & 0xff));
        z.push_back(uint8_t(len >> 8));
        z.push_back(uint8_t(~len & 0xff));
        z.push_back(uint8_t((~len >> 8) & 0xff));
        z.insert(z.end(), raw.begin() + long(pos), raw.begin() + long(pos + len));
        pos += len;
    }
    uint32_t a = 1, b = 0;
    for (uint8_t c : raw) {
        a = (a + c) % 65521;
        b = (b + a) % 65521;
    }
    push_u32(z, (b << 16) | a);

    std::vector<uint8_t> png{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<uint8_t> ihdr;
    push_u32(ihdr, uint32_t(img.width()));
    push_u32(ihdr, uint32_t(img.height()));
    ihdr.insert(ihdr.end(), {8, 0, 0, 0, 0});  // bit depth 8, grayscale
    push_chunk(png, "IHDR", ihdr);
    push_chunk(png, "IDAT", z);
    push_chunk(png, "IEND", {});

    std::ofstream f(path, std::ios::binary);
    if (!f) throw BadInput("cannot open " + path.string() + " for writing");
    f.write(reinterpret_cast<const char*>(png.data()), std::streamsize(png.size()));
}

// --- JSON schemas -------------------------------------------------------------

inline json camera_to_json(const CameraModel& cam) {
    return json{{"icrf", cam.icrf.table()},
                {"sigma_r", cam.noise.sigma_r},
                {"sigma_q", cam.noise.sigma_q},
                {"gain_const", cam.noise.gain_const},
                {"exposure_range", {cam.t_min, cam.t_max}},
                {"iso_set", cam.iso_set},
                {"d_saturation", cam.d_saturation},
                {"bit_depth", cam.bit_depth}};
}

inline CameraModel camera_from_json(const json& j) {
    CameraModel cam;
    std::array<double, Icrf::kTableSize> table{};
    auto t = j.at("icrf");
    if (t.size() != Icrf::kTableSize) throw BadInput("icrf table must have 256 entries");
    for (size_t i = 0; i < table.size(); ++i) table[i] = t[i].get<double>();
    cam.icrf = Icrf(table);
    cam.noise.sigma_r = j.at("sigma_r").get<double>();
    cam.noise.sigma_q = j.at("sigma_q").get<double>();
    cam.noise.gain_const = j.at("gain_const").get<double>();
    cam.t_min = j.at("exposure_range").at(0).get<double>();
    cam.t_max = j.at("exposure_range").at(1).get<double>();
    cam.iso_set = j.at("iso_set").get<std::vector<double>>();
    cam.d_saturation = j.at("d_saturation").get<int>();
    cam.bit_depth = j.at("bit_depth").get<int>();
    cam.validate();
    return cam;
}

inline void save_json(const std::filesystem::path& path, const json& j) {
    std::ofstream f(path);
    if (!f) throw BadInput("cannot open " + path.string() + " for writing");
    f << j.dump(2) << "\n";
}

inline json load_json(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw BadInput("cannot open " + path.string());
    json j;
    try {
        f >> j;
    } catch (const std::exception& e) {
        throw BadInput("malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

/// Histogram: CSV of (bin_low, bin_high, prob) rows plus a JSON sidecar at
/// <path>.json holding the range of interest.
inline void save_histogram(const std::filesystem::path& csv_path, const LogRadianceHistogram& h) {
    std::ofstream f(csv_path);
    if (!f) throw BadInput("cannot open " + csv_path.string() + " for writing");
    f.precision(17);
    for (int b = 0; b < h.bin_count(); ++b)
        f << h.edges()[size_t(b)] << "," << h.edges()[size_t(b) + 1] << "," << h.probs()[size_t(b)]
          << "\n";
    Interval roi = h.range_of_interest();
    save_json(csv_path.string() + ".json", json{{"range_of_interest", {roi.lo, roi.hi}}});
}

inline LogRadianceHistogram load_histogram(const std::filesystem::path& csv_path) {
    std::ifstream f(csv_path);
    if (!f) throw BadInput("cannot open " + csv_path.string());
    std::vector<double> edges, probs;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        double lo, hi, p;
        char c1, c2;
        if (!(ss >> lo >> c1 >> hi >> c2 >> p)) throw BadInput("bad histogram row: " + line);
        if (edges.empty()) edges.push_back(lo);
        edges.push_back(hi);
        probs.push_back(p);
    }
    LogRadianceHistogram h(std::move(edges), std::move(probs));
    auto sidecar = csv_path.string() + ".json";
    if (std::filesystem::exists(sidecar)) {
        json j = load_json(sidecar);
        h.set_range_of_interest(j.at("range_of_interest").at(0).get<double>(),
                                j.at("range_of_interest").at(1).get<double>());
    }
    return h;
}

inline json plan_to_json(const CapturePlan& plan, const PlannerConfig& cfg) {
    json shots = json::array();
    for (const auto& s : plan.shots)
        shots.push_back({{"camera", to_string(s.camera)}, {"t_seconds", s.t}, {"iso", s.iso}});
    json config{{"gamma_err", cfg.gamma_err},
                {"eta", cfg.eta},
                {"eta_db", snr_to_db(cfg.eta)},
                {"max_shots_per_camera", cfg.max_shots_per_camera}};
    if (cfg.range_of_interest)
        config["range_of_interest"] = {cfg.range_of_interest->lo, cfg.range_of_interest->hi};
    return json{{"shots", shots},
                {"metrics",
                 {{"t_cap", plan.t_cap},
                  {"predicted_disp_err", plan.predicted_disp_err},
                  {"worst_snr_db", snr_to_db(plan.worst_snr)},
                  {"coverage_ok", plan.coverage_ok}}},
                {"config", config}};
}

/// Rebuilds shots (with cached intervals) from a plan file; needs the cameras
/// and the SNR floor the plan was made with.
inline std::vector<Shot> shots_from_json(const json& j, std::span<const CameraModel> cameras,
                                         double eta) {
    std::vector<Shot> shots;
    for (const auto& js : j.at("shots")) {
        CameraId id = js.at("camera").get<std::string>() == "secondary" ? CameraId::secondary
                                                                        : CameraId::primary;
        const CameraModel& cam = cameras[size_t(id) < cameras.size() ? size_t(id) : 0];
        double t = js.at("t_seconds").get<double>();
        double iso = js.at("iso").get<double>();
        double g = cam.gain_for_iso(iso);
        shots.push_back({id, t, iso, g, cam.log_radiance_interval(t, g, eta)});
    }
    return shots;
}

// --- capture stacks on disk ---------------------------------------------------

inline void save_stacks(const std::filesystem::path& dir, const CaptureStacks& stacks) {
    std::filesystem::create_directories(dir);
    json manifest;
    manifest["shots"] = json::array();
    int index = 0;
    auto dump = [&](std::span<const LdrImage> stack) {
        for (const auto& img : stack) {
            char name[32];
            std::snprintf(name, sizeof name, "shot_%03d.pgm", index);
            write_pgm(dir / name, img.pixels);
            manifest["shots"].push_back({{"file", name},
                                         {"camera", to_string(img.shot.camera)},
                                         {"t_seconds", img.shot.t},
                                         {"iso", img.shot.iso},
                                         {"gain", img.shot.gain},
                                         {"interval", {img.shot.interval.lo, img.shot.interval.hi}}});
            ++index;
        }
    };
    dump(stacks.primary);
    dump(stacks.secondary);
    save_json(dir / "stack.json", manifest);
}

inline CaptureStacks load_stacks(const std::filesystem::path& dir) {
    json manifest = load_json(dir / "stack.json");
    CaptureStacks stacks;
    for (const auto& js : manifest.at("shots")) {
        LdrImage img;
        img.pixels = read_pgm(dir / js.at("file").get<std::string>());
        img.shot.camera = js.at("camera").get<std::string>() == "secondary" ? CameraId::secondary
                                                                            : CameraId::primary;
        img.shot.t = js.at("t_seconds").get<double>();
        img.shot.iso = js.at("iso").get<double>();
        img.shot.gain = js.at("gain").get<double>();
        img.shot.interval = {js.at("interval").at(0).get<double>(),
                             js.at("interval").at(1).get<double>()};
        (img.shot.camera == CameraId::primary ? stacks.primary : stacks.secondary)
            .push_back(std::move(img));
    }
    return stacks;
}

// --- scenes on disk -----------------------------------------------------------

inline void save_scene(const std::filesystem::path& dir, const SyntheticScene& scene) {
    std::filesystem::create_directories(dir);
    write_pfm(dir / "log_radiance.pfm", scene.log_radiance);
    write_pfm(dir / "gt_disparity.pfm", scene.gt_disparity);
    write_pgm(dir / "occlusion.pgm", scene.occlusion);
    double lo = scene.log_radiance[0], hi = scene.log_radiance[0];
    for (double v : scene.log_radiance.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    write_png_gray(dir / "preview.png", tone_map(scene.log_radiance, lo, hi));
    json j{{"width", scene.spec.width},
           {"height", scene.spec.height},
           {"seed", scene.spec.seed},
           {"layer_disparities", scene.spec.layer_disparities},
           {"texture_amp", scene.spec.texture_amp}};
    save_json(dir / "scene.json", j);
    save_histogram(dir / "target_hist.csv", scene.spec.target_hist);
}

inline SyntheticScene load_scene(const std::filesystem::path& dir) {
    SyntheticScene scene;
    scene.log_radiance = read_pfm(dir / "log_radiance.pfm");
    scene.gt_disparity = read_pfm(dir / "gt_disparity.pfm");
    ImageU8 occ = read_pgm(dir / "occlusion.pgm");
    scene.occlusion = Mask(occ.width(), occ.height(), 0);
    for (size_t i = 0; i < occ.size(); ++i) scene.occlusion[i] = occ[i] ? 1 : 0;
    json j = load_json(dir / "scene.json");
    scene.spec.width = j.at("width").get<int>();
    scene.spec.height = j.at("height").get<int>();
    scene.spec.seed = j.at("seed").get<uint64_t>();
    scene.spec.layer_disparities = j.at("layer_disparities").get<std::vector<double>>();
    scene.spec.texture_amp = j.at("texture_amp").get<double>();
    scene.spec.target_hist = load_histogram(dir / "target_hist.csv");
    return scene;
}

// --- run manifest ---------------------------------------------------------------

inline uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw BadInput("cannot hash " + path.string());
    uint64_t h = 1469598103934665603ull;
    char buf[4096];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) {
        for (std::streamsize i = 0; i < f.gcount(); ++i)
            h = (h ^ uint8_t(buf[i])) * 1099511628211ull;
        if (!f) break;
    }
    return h;
}

/// Every command writes one of these next to its outputs: enough to replay the
/// run and to check inputs have not changed.
struct RunManifest {
    std::string command;
    json config;
    std::vector<std::filesystem::path> inputs;
    std::vector<std::filesystem::path> outputs;
    uint64_t seed = 0;
    double wall_ms = 0.0;

    void save(const std::filesystem::path& path) const {
        json j{{"command", command}, {"config", config}, {"seed", seed}, {"wall_ms", wall_ms}};
        j["inputs"] = json::object();
        for (const auto& p : inputs) {
            char hex[20];
            std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)fnv1a_file(p));
            j["inputs"][p.string()] = hex;
        }
        j["outputs"] = json::array();
        for (const auto& p : outputs) j["outputs"].push_back(p.string());
        save_json(path, j);
    }
};

}  // namespace stereohdr
