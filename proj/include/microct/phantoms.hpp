#pragma once

#include <filesystem>
#include <iomanip>
#include <sstream>

#include "microlocal.hpp"
#include "rng.hpp"
#include "xray.hpp"

namespace microct {

struct EllipseSpec {
    double cx = 0.0, cy = 0.0;     // center, physical coordinates
    double ax = 0.0, ay = 0.0;     // semi-axes
    double rotation = 0.0;         // radians
    double intensity = 0.0;
};

inline nlohmann::json to_json(const EllipseSpec& e) {
    return {{"cx", e.cx}, {"cy", e.cy}, {"ax", e.ax}, {"ay", e.ay},
            {"rotation", e.rotation}, {"intensity", e.intensity}};
}

inline EllipseSpec ellipse_from_json(const nlohmann::json& j) {
    EllipseSpec e;
    e.cx = j.at("cx").get<double>();
    e.cy = j.at("cy").get<double>();
    e.ax = j.at("ax").get<double>();
    e.ay = j.at("ay").get<double>();
    e.rotation = j.at("rotation").get<double>();
    e.intensity = j.at("intensity").get<double>();
    return e;
}

struct PhantomConfig {
    std::size_t count_min = 3, count_max = 8;
    double axis_min_rel = 0.08, axis_max_rel = 0.35;  // relative to the half-extent
    double intensity_min = 0.2, intensity_max = 1.0;
    double margin_rel = 0.95;  // ellipses stay inside this fraction of the inscribed disk
    bool intensity_ramps = false;  // linear interior ramps instead of flat plateaus
    double ramp_min = 0.2, ramp_max = 0.6;
};

inline bool ellipse_contains(const EllipseSpec& e, double x, double y) {
    double dx = x - e.cx, dy = y - e.cy;
    double c = std::cos(e.rotation), s = std::sin(e.rotation);
    double lx = dx * c + dy * s, ly = -dx * s + dy * c;
    double qa = lx / e.ax, qb = ly / e.ay;
    return qa * qa + qb * qb <= 1.0;
}

// First-order signed distance to the ellipse boundary (negative inside).
inline double ellipse_signed_distance(const EllipseSpec& e, double x, double y) {
    double dx = x - e.cx, dy = y - e.cy;
    double c = std::cos(e.rotation), s = std::sin(e.rotation);
    double lx = dx * c + dy * s, ly = -dx * s + dy * c;
    double qa = lx / e.ax, qb = ly / e.ay;
    double f = std::sqrt(qa * qa + qb * qb);
    if (f <= 1e-9) return -std::min(e.ax, e.ay);
    double grad = std::sqrt(qa * qa / (e.ax * e.ax) + qb * qb / (e.ay * e.ay)) / f;
    return (f - 1.0) / grad;
}

// Deterministic in (seed, size, config). Overlapping intensities sum, the
// raster is clipped to [0,1]; specs carry the exact analytic boundaries.
inline std::pair<Image, std::vector<EllipseSpec>> generate_phantom(std::uint64_t seed,
                                                                   std::size_t size,
                                                                   const PhantomConfig& cfg = {}) {
    Rng rng(seed);
    const double extent = static_cast<double>(size);
    const double radius = extent / 2.0;
    std::size_t span = cfg.count_max - cfg.count_min + 1;
    std::size_t count = cfg.count_min + static_cast<std::size_t>(rng.uniform_index(span));

    std::vector<EllipseSpec> specs;
    specs.reserve(count);
    struct Ramp {
        double gx = 0.0, gy = 0.0;  // intensity gradient per unit length, 0 = flat
    };
    std::vector<Ramp> ramps;
    ramps.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        EllipseSpec e;
        e.ax = rng.uniform(cfg.axis_min_rel, cfg.axis_max_rel) * radius;
        e.ay = rng.uniform(cfg.axis_min_rel, cfg.axis_max_rel) * radius;
        e.rotation = rng.uniform(0.0, kPi);
        e.intensity = rng.uniform(cfg.intensity_min, cfg.intensity_max);
        double reach = cfg.margin_rel * radius - std::max(e.ax, e.ay);
        if (reach < 0.0) reach = 0.0;
        do {
            e.cx = rng.uniform(-reach, reach);
            e.cy = rng.uniform(-reach, reach);
        } while (e.cx * e.cx + e.cy * e.cy > reach * reach);
        specs.push_back(e);
        Ramp r;
        if (cfg.intensity_ramps) {
            double dir = rng.uniform(0.0, 2.0 * kPi);
            double slope = rng.uniform(cfg.ramp_min, cfg.ramp_max) / std::max(e.ax, e.ay);
            r.gx = slope * std::cos(dir);
            r.gy = slope * std::sin(dir);
        }
        ramps.push_back(r);
    }

    Image u(size, extent);
    const double dx = u.pixel_pitch();
    const double half = (static_cast<double>(size) - 1.0) / 2.0;
    const double rim = 3.0 * dx;  // C1 anti-aliased transition width
    for (std::size_t i = 0; i < size; ++i)
        for (std::size_t j = 0; j < size; ++j) {
            double px = (static_cast<double>(j) - half) * dx;
            double py = (half - static_cast<double>(i)) * dx;
            double v = 0.0;
            for (std::size_t k = 0; k < specs.size(); ++k) {
                const EllipseSpec& e = specs[k];
                double sd = ellipse_signed_distance(e, px, py);
                double t = std::min(1.0, std::max(0.0, 0.5 - sd / rim));
                double level = e.intensity *
                               (1.0 + ramps[k].gx * (px - e.cx) + ramps[k].gy * (py - e.cy));
                v += std::max(0.0, level) * t * t * (3.0 - 2.0 * t);
            }
            u.at(i, j) = std::min(1.0, std::max(0.0, v));
        }
    return {std::move(u), std::move(specs)};
}

// Boundary samples with analytic normals, for visibility classification.
inline std::vector<EdgePoint> ellipse_edge_points(const EllipseSpec& e, std::size_t samples = 256) {
    std::vector<EdgePoint> out;
    out.reserve(samples);
    double c = std::cos(e.rotation), s = std::sin(e.rotation);
    for (std::size_t k = 0; k < samples; ++k) {
        double t = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(samples);
        double lx = e.ax * std::cos(t), ly = e.ay * std::sin(t);
        EdgePoint p;
        p.x = e.cx + lx * c - ly * s;
        p.y = e.cy + lx * s + ly * c;
        double nlx = std::cos(t) / e.ax, nly = std::sin(t) / e.ay;  // local-frame gradient
        double nx = nlx * c - nly * s, ny = nlx * s + nly * c;
        p.normal = fold_angle(std::atan2(ny, nx));
        out.push_back(p);
    }
    return out;
}

// m = R_hat u + eps, eps ~ N(0, (sigma_rel * max(R_hat u))^2) i.i.d.
inline Sinogram simulate_measurement(const Image& u, const Projector& proj, double operator_scale,
                                     double sigma_rel, std::uint64_t seed, unsigned threads = 1) {
    if (sigma_rel < 0.0) throw std::invalid_argument("simulate_measurement: sigma_rel must be >= 0");
    Sinogram m = proj.forward(u, threads);
    for (auto& x : m.data) x *= operator_scale;
    if (sigma_rel > 0.0) {
        double peak = 0.0;
        for (double x : m.data) peak = std::max(peak, x);
        double sigma = sigma_rel * peak;
        Rng rng(seed);
        for (auto& x : m.data) x += sigma * rng.normal();
    }
    return m;
}

// --- dataset persistence: manifest.json + images/ sinograms/ specs/ ---

struct DatasetManifest {
    int version = 1;
    ScanGeometry geometry;
    double operator_scale = 1.0;
    double noise_sigma_rel = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> train_samples;
    std::vector<std::string> test_samples;
};

inline nlohmann::json to_json(const DatasetManifest& m) {
    nlohmann::json j;
    j["version"] = m.version;
    j["geometry"] = to_json(m.geometry);
    j["operator_scale"] = m.operator_scale;
    j["noise_sigma_rel"] = m.noise_sigma_rel;
    j["seed"] = m.seed;
    j["counts"] = {{"train", m.train_samples.size()}, {"test", m.test_samples.size()}};
    j["train_samples"] = m.train_samples;
    j["test_samples"] = m.test_samples;
    return j;
}

class Dataset {
  public:
    Dataset(std::filesystem::path root, DatasetManifest manifest)
        : root_(std::move(root)), manifest_(std::move(manifest)) {}

    const DatasetManifest& manifest() const { return manifest_; }
    const std::filesystem::path& root() const { return root_; }
    std::size_t train_count() const { return manifest_.train_samples.size(); }
    std::size_t test_count() const { return manifest_.test_samples.size(); }

    const std::string& name(bool train, std::size_t i) const {
        return train ? manifest_.train_samples.at(i) : manifest_.test_samples.at(i);
    }

    Image load_image(bool train, std::size_t i) const {
        const auto& g = manifest_.geometry;
        Image u(g.image_size, g.image_extent());
        auto path = root_ / "images" / (name(train, i) + ".f32");
        u.data = read_f32(path, g.image_size * g.image_size);
        for (double x : u.data)
            if (!std::isfinite(x)) throw CorruptDataset("non-finite entries in " + path.string());
        return u;
    }

    Sinogram load_sinogram(bool train, std::size_t i) const {
        auto base = root_ / "sinograms" / name(train, i);
        Sinogram m = load_sinogram_checked(base);
        for (double x : m.data)
            if (!std::isfinite(x)) throw CorruptDataset("non-finite entries in " + base.string() + ".f32");
        return m;
    }

    std::vector<EllipseSpec> load_specs(bool train, std::size_t i) const {
        auto j = nlohmann::json::parse(read_text(root_ / "specs" / (name(train, i) + ".json")));
        std::vector<EllipseSpec> out;
        for (const auto& e : j.at("ellipses")) out.push_back(ellipse_from_json(e));
        return out;
    }

  private:
    Sinogram load_sinogram_checked(const std::filesystem::path& base) const {
        ScanGeometry g;
        double scale = 0.0;
        Sinogram m = ::microct::load_sinogram(base, &g, &scale);
        if (geometry_hash(g) != geometry_hash(manifest_.geometry))
            throw CorruptDataset("sinogram geometry differs from manifest: " + base.string());
        return m;
    }

    std::filesystem::path root_;
    DatasetManifest manifest_;
};

inline std::string sample_name(bool train, std::size_t index) {
    std::ostringstream os;
    os << (train ? "train_" : "test_") << std::setw(5) << std::setfill('0') << index;
    return os.str();
}

// Generates and persists the full tree. Per-sample randomness derives from
// (seed, global index), so the tree is identical for any thread count.
inline Dataset write_dataset(const std::filesystem::path& root, const ScanGeometry& g,
                             std::size_t train_count, std::size_t test_count, double sigma_rel,
                             std::uint64_t seed, const PhantomConfig& cfg = {},
                             unsigned threads = 1) {
    namespace fs = std::filesystem;
    fs::create_directories(root / "images");
    fs::create_directories(root / "sinograms");
    fs::create_directories(root / "specs");

    Projector proj(g, threads);
    double norm = estimate_operator_norm(proj, 100, 0x9a7e5u ^ geometry_hash(g));
    double scale = 1.0 / norm;

    DatasetManifest man;
    man.geometry = g;
    man.operator_scale = scale;
    man.noise_sigma_rel = sigma_rel;
    man.seed = seed;
    for (std::size_t i = 0; i < train_count; ++i) man.train_samples.push_back(sample_name(true, i));
    for (std::size_t i = 0; i < test_count; ++i) man.test_samples.push_back(sample_name(false, i));

    const std::size_t total = train_count + test_count;
    parallel_for(total, threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t idx = lo; idx < hi; ++idx) {
            bool train = idx < train_count;
            std::size_t local = train ? idx : idx - train_count;
            std::string name = sample_name(train, local);
            auto [img, specs] =
                generate_phantom(Rng::derive(seed, 2 * idx).next_u64(), g.image_size, cfg);
            Sinogram m = simulate_measurement(img, proj, scale, sigma_rel,
                                              Rng::derive(seed, 2 * idx + 1).next_u64());
            write_f32(root / "images" / (name + ".f32"), img.data);
            save_sinogram(root / "sinograms" / name, m, g, scale);
            nlohmann::json sj;
            sj["ellipses"] = nlohmann::json::array();
            for (const auto& e : specs) sj["ellipses"].push_back(to_json(e));
            write_text(root / "specs" / (name + ".json"), sj.dump(2) + "\n");
        }
    });

    write_text(root / "manifest.json", to_json(man).dump(2) + "\n");
    return Dataset(root, man);
}

inline Dataset read_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    auto j = nlohmann::json::parse(read_text(root / "manifest.json"), nullptr, false);
    if (j.is_discarded()) throw CorruptDataset("unparsable manifest at " + root.string());
    int version = j.at("version").get<int>();
    if (version != 1)
        throw UnsupportedVersion("dataset version " + std::to_string(version) + " not supported");
    DatasetManifest man;
    man.version = version;
    man.geometry = geometry_from_json(j.at("geometry"));
    man.operator_scale = j.at("operator_scale").get<double>();
    man.noise_sigma_rel = j.at("noise_sigma_rel").get<double>();
    man.seed = j.at("seed").get<std::uint64_t>();
    man.train_samples = j.at("train_samples").get<std::vector<std::string>>();
    man.test_samples = j.at("test_samples").get<std::vector<std::string>>();
    if (j.at("counts").at("train").get<std::size_t>() != man.train_samples.size() ||
        j.at("counts").at("test").get<std::size_t>() != man.test_samples.size())
        throw CorruptDataset("manifest counts disagree with sample lists: " + root.string());
    auto require = [&](const fs::path& p) {
        if (!fs::exists(p)) throw CorruptDataset("missing dataset file: " + p.string());
    };
    for (int split = 0; split < 2; ++split) {
        const auto& names = split == 0 ? man.train_samples : man.test_samples;
        for (const auto& name : names) {
            require(root / "images" / (name + ".f32"));
            require(root / "sinograms" / (name + ".f32"));
            require(root / "sinograms" / (name + ".json"));
            require(root / "specs" / (name + ".json"));
        }
    }
    return Dataset(root, man);
}

}  // namespace microct
