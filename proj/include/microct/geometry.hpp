#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"

namespace microct {

// Set membership below any discretization scale used here.
constexpr double kAngleTol = 1e-9;

enum class AngleSetKind { LimitedInterval, SparseDiscrete };

// Admissible normal directions A. Angles are normals in [-pi/2, pi/2);
// the measured line through offset s along normal w has direction w + pi/2.
struct AngleSet {
    AngleSetKind kind = AngleSetKind::LimitedInterval;
    double gamma = kPi / 3;          // LimitedInterval half-width, 0 < gamma < pi/2
    std::vector<double> angles;      // SparseDiscrete, strictly increasing in [-pi/2, pi/2)
    double eta = 0.0;                // sparse strip half-width (classifier parameter only)

    static AngleSet limited(double gamma_) {
        if (!(gamma_ > 0.0 && gamma_ < kPi / 2))
            throw std::invalid_argument("AngleSet: gamma must be in (0, pi/2)");
        AngleSet a;
        a.kind = AngleSetKind::LimitedInterval;
        a.gamma = gamma_;
        return a;
    }

    static AngleSet sparse(std::vector<double> angles_, double eta_ = 0.0) {
        if (angles_.empty()) throw std::invalid_argument("AngleSet: empty sparse angle list");
        for (double& w : angles_) w = fold_angle(w);
        std::sort(angles_.begin(), angles_.end());
        for (std::size_t i = 1; i < angles_.size(); ++i)
            if (angles_[i] - angles_[i - 1] <= kAngleTol)
                throw std::invalid_argument("AngleSet: sparse angles must be distinct mod pi");
        AngleSet a;
        a.kind = AngleSetKind::SparseDiscrete;
        a.angles = std::move(angles_);
        a.eta = eta_;
        return a;
    }

    std::vector<double> boundary() const {
        if (kind == AngleSetKind::LimitedInterval) return {-gamma, gamma};
        return angles;  // {w_i +- eta} ~ {w_i}
    }
};

inline bool angle_set_contains(const AngleSet& a, double omega) {
    omega = fold_angle(omega);
    if (a.kind == AngleSetKind::LimitedInterval) return std::abs(omega) <= a.gamma + kAngleTol;
    for (double w : a.angles) {
        double d = std::abs(fold_angle(omega - w));
        if (d <= a.eta + kAngleTol) return true;
    }
    return false;
}

inline std::vector<double> uniform_angles(double gamma, std::size_t count) {
    if (count == 0) throw std::invalid_argument("uniform_angles: count must be >= 1");
    if (count == 1) return {0.0};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = -gamma + 2.0 * gamma * static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

// N equispaced normals covering [-pi/2, pi/2), half-open so no pair
// coincides mod pi.
inline std::vector<double> sparse_uniform_angles(std::size_t count) {
    if (count == 0) throw std::invalid_argument("sparse_uniform_angles: count must be >= 1");
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = -kPi / 2 + kPi * static_cast<double>(i) / static_cast<double>(count);
    return out;
}

struct ScanGeometry {
    std::size_t image_size = 0;      // pixels per side
    double pixel_pitch = 1.0;
    std::size_t num_detectors = 0;
    double detector_pitch = 1.0;
    AngleSet angle_set;
    std::vector<double> angles_measured;

    double image_extent() const { return static_cast<double>(image_size) * pixel_pitch; }
    double detector_extent() const { return static_cast<double>(num_detectors) * detector_pitch; }

    // Spacing of the measured angles; one step is the default streak tolerance.
    double angular_step() const {
        if (angles_measured.size() < 2) return kPi;
        if (angle_set.kind == AngleSetKind::SparseDiscrete)
            return kPi / static_cast<double>(angles_measured.size());
        return (angles_measured.back() - angles_measured.front()) /
               static_cast<double>(angles_measured.size() - 1);
    }

    void validate() const {
        if (image_size == 0 || num_detectors == 0)
            throw std::invalid_argument("ScanGeometry: zero-sized image or detector array");
        if (pixel_pitch <= 0 || detector_pitch <= 0)
            throw std::invalid_argument("ScanGeometry: pitches must be positive");
        // Detector array must span the image diagonal (no truncation).
        double diag = image_extent() * std::sqrt(2.0);
        if (detector_extent() + detector_pitch < diag)
            throw std::invalid_argument("ScanGeometry: detector array shorter than image diagonal");
        for (double w : angles_measured)
            if (!angle_set_contains(angle_set, w))
                throw std::invalid_argument("ScanGeometry: measured angle outside the angle set");
    }
};

// Default detector array: unit pitch, wide enough for the image diagonal.
inline ScanGeometry make_limited_geometry(std::size_t image_size, double gamma, std::size_t num_angles) {
    ScanGeometry g;
    g.image_size = image_size;
    g.pixel_pitch = 1.0;
    g.num_detectors = static_cast<std::size_t>(std::ceil(static_cast<double>(image_size) * std::sqrt(2.0)));
    g.detector_pitch = 1.0;
    g.angle_set = AngleSet::limited(gamma);
    g.angles_measured = uniform_angles(gamma, num_angles);
    g.validate();
    return g;
}

inline ScanGeometry make_sparse_geometry(std::size_t image_size, std::size_t num_angles, double eta = 0.0) {
    ScanGeometry g;
    g.image_size = image_size;
    g.pixel_pitch = 1.0;
    g.num_detectors = static_cast<std::size_t>(std::ceil(static_cast<double>(image_size) * std::sqrt(2.0)));
    g.detector_pitch = 1.0;
    g.angle_set = AngleSet::sparse(sparse_uniform_angles(num_angles), eta);
    g.angles_measured = g.angle_set.angles;
    g.validate();
    return g;
}

inline nlohmann::json to_json(const AngleSet& a) {
    nlohmann::json j;
    if (a.kind == AngleSetKind::LimitedInterval) {
        j["kind"] = "limited";
        j["gamma"] = a.gamma;
    } else {
        j["kind"] = "sparse";
        j["angles"] = a.angles;
        j["eta"] = a.eta;
    }
    return j;
}

inline AngleSet angle_set_from_json(const nlohmann::json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "limited") return AngleSet::limited(j.at("gamma").get<double>());
    if (kind == "sparse")
        return AngleSet::sparse(j.at("angles").get<std::vector<double>>(), j.value("eta", 0.0));
    throw std::invalid_argument("AngleSet: unknown kind '" + kind + "'");
}

inline nlohmann::json to_json(const ScanGeometry& g) {
    nlohmann::json j;
    j["image_size"] = g.image_size;
    j["pixel_pitch"] = g.pixel_pitch;
    j["num_detectors"] = g.num_detectors;
    j["detector_pitch"] = g.detector_pitch;
    j["angle_set"] = to_json(g.angle_set);
    j["angles_measured"] = g.angles_measured;
    return j;
}

inline ScanGeometry geometry_from_json(const nlohmann::json& j) {
    ScanGeometry g;
    g.image_size = j.at("image_size").get<std::size_t>();
    g.pixel_pitch = j.at("pixel_pitch").get<double>();
    g.num_detectors = j.at("num_detectors").get<std::size_t>();
    g.detector_pitch = j.at("detector_pitch").get<double>();
    g.angle_set = angle_set_from_json(j.at("angle_set"));
    g.angles_measured = j.at("angles_measured").get<std::vector<double>>();
    g.validate();
    return g;
}

// Stable identity for checkpoint/dataset compatibility checks.
inline std::uint64_t geometry_hash(const ScanGeometry& g) {
    return fnv1a64(to_json(g).dump());
}

}  // namespace microct
