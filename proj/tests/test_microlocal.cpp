#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace microct;

TEST_CASE("visibility classification goldens") {
    AngleSet a = AngleSet::limited(kPi / 3);
    CHECK(classify_visibility(0.0, a) == Visibility::Visible);
    CHECK(classify_visibility(kPi / 2 - 0.01, a) == Visibility::Invisible);
    CHECK(classify_visibility(kPi / 3, a) == Visibility::Boundary);
    CHECK(classify_visibility(-kPi / 3, a) == Visibility::Boundary);
}

TEST_CASE("sparse visibility with eta") {
    AngleSet zero_eta = AngleSet::sparse({-kPi / 3, 0.0, kPi / 3});
    CHECK(classify_visibility(0.0, zero_eta) == Visibility::Boundary);  // eta = 0: listed angles are the boundary
    CHECK(classify_visibility(0.1, zero_eta) == Visibility::Invisible);

    AngleSet strips = AngleSet::sparse({-kPi / 3, 0.0, kPi / 3}, 0.05);
    CHECK(classify_visibility(0.01, strips) == Visibility::Visible);
    CHECK(classify_visibility(0.05, strips) == Visibility::Boundary);
    CHECK(classify_visibility(0.2, strips) == Visibility::Invisible);
}

TEST_CASE("classification equals the membership predicate; flips are invariant") {
    Rng rng(99);
    std::vector<AngleSet> sets = {AngleSet::limited(kPi / 3), AngleSet::limited(0.4),
                                  AngleSet::sparse(sparse_uniform_angles(12)),
                                  AngleSet::sparse(sparse_uniform_angles(6), 0.02)};
    for (const auto& a : sets) {
        for (int i = 0; i < 10000; ++i) {
            double w = rng.uniform(-kPi / 2, kPi / 2);
            Visibility v = classify_visibility(w, a);
            bool member = angle_set_contains(a, w);
            if (v == Visibility::Invisible)
                CHECK_FALSE(member);
            else
                CHECK(member);
            CHECK(classify_visibility(w + kPi, a) == v);
            CHECK(classify_visibility(w - kPi, a) == v);
        }
    }
}

TEST_CASE("extract_edges on a constant image") {
    Image u(32);
    for (auto& x : u.data) x = 0.7;
    CHECK(extract_edges(u, 0.1).empty());
    CHECK_THROWS_AS(extract_edges(u, 0.0), std::invalid_argument);
}

TEST_CASE("extract_edges on a vertical step edge") {
    Image u(32);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j) u.at(i, j) = j >= 16 ? 1.0 : 0.0;
    auto edges = extract_edges(u, 0.1);
    REQUIRE_FALSE(edges.empty());
    for (const auto& e : edges) CHECK(std::abs(e.normal) < 1e-6);  // horizontal normal
}

TEST_CASE("extract_edges on a disk points radially") {
    Image u = testutil::soft_disk_image(64, 20.0);
    auto edges = extract_edges(u, 0.2);
    REQUIRE(edges.size() > 20);
    for (const auto& e : edges) {
        double radial = fold_angle(std::atan2(e.y, e.x));
        double diff = std::abs(fold_angle(e.normal - radial));
        CHECK(diff <= 2.0 * kPi / 180.0);
    }
}

TEST_CASE("predict_streaks for a disk are the tangent families") {
    Image u = testutil::soft_disk_image(64, 20.0);
    AngleSet a = AngleSet::limited(kPi / 3);
    auto edges = extract_edges(u, 0.2);
    auto streaks = predict_streaks(edges, a, 2.0 * kPi / 180.0);
    REQUIRE_FALSE(streaks.empty());
    for (const auto& s : streaks) {
        CHECK((std::abs(s.omega - kPi / 3) < 1e-12 || std::abs(s.omega + kPi / 3) < 1e-12));
        CHECK(std::abs(std::abs(s.offset) - 20.0) < 1.5);  // tangent lines of the circle
    }
    bool plus = false, minus = false;
    for (const auto& s : streaks) (s.omega > 0 ? plus : minus) = true;
    CHECK(plus);
    CHECK(minus);
}

TEST_CASE("predict_streaks edge cases") {
    AngleSet a = AngleSet::limited(kPi / 3);
    CHECK(predict_streaks({}, a).empty());
    // normals nowhere near the boundary produce nothing
    std::vector<EdgePoint> edges = {{1.0, 2.0, 0.0}};
    CHECK(predict_streaks(edges, a, 0.01).empty());
}

TEST_CASE("kernel atlas: deterministic, zero impulse, shape") {
    ScanGeometry g = make_limited_geometry(32, kPi / 3, 24);
    Projector proj(g);
    KernelAtlas a1 = estimate_kernel_atlas(proj, 1, 7);
    KernelAtlas a2 = estimate_kernel_atlas(proj, 1, 7, 3);
    REQUIRE(a1.num_subbands == 4);
    for (std::size_t k = 0; k < a1.filters.size(); ++k)
        CHECK(testutil::max_abs_diff(a1.filters[k], a2.filters[k]) == 0.0);
    CHECK_THROWS_AS(estimate_kernel_atlas(proj, 1, 8), std::invalid_argument);
    CHECK_THROWS_AS(estimate_kernel_atlas(proj, 1, 17), std::invalid_argument);
}

TEST_CASE("kernel atlas energy sits in the bow mask for limited angles") {
    ScanGeometry g = make_limited_geometry(64, kPi / 3, 60);
    Projector proj(g);
    KernelAtlas atlas = estimate_kernel_atlas(proj, 2, 15);
    FilterMask bow0 = build_mask(MaskKind::Bow, g.angle_set, 15, 0);
    FilterMask bow3 = build_mask(MaskKind::Bow, g.angle_set, 15, 3);
    for (std::size_t i = 0; i < atlas.num_subbands; ++i) {
        CHECK(energy_fraction_inside(atlas.patch(i, i), bow3) >= 0.85);
        // frozen from the oracle run: exact-cone mask already holds the energy
        CHECK(energy_fraction_inside(atlas.patch(i, i), bow0) >= 0.97);
    }
}

TEST_CASE("full-angle diagonal patches are isotropic to 5%") {
    ScanGeometry g = make_limited_geometry(64, kPi / 2 - 1e-9, 90);
    Projector proj(g);
    KernelAtlas atlas = estimate_kernel_atlas(proj, 2, 15);
    const long p = 15, c = 7;
    for (std::size_t s = 0; s < atlas.num_subbands; ++s) {
        const auto& patch = atlas.patch(s, s);
        double ev = 0.0, eh = 0.0;
        for (long i = 0; i < p; ++i)
            for (long j = 0; j < p; ++j) {
                double dx = static_cast<double>(j - c), dy = static_cast<double>(c - i);
                double e = patch[static_cast<std::size_t>(i * p + j)];
                e *= e;
                if (std::abs(dx) <= std::abs(dy)) ev += e;
                if (std::abs(dy) <= std::abs(dx)) eh += e;
            }
        CHECK(std::abs(ev - eh) / (ev + eh) <= 0.05);
    }
}
