#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace microct;

TEST_CASE("psnr goldens") {
    Image ref = testutil::disk_image(64, 20.0);  // values span [0, 1]
    CHECK(psnr(ref, ref) == kPsnrCap);

    Image shifted = ref;
    for (auto& x : shifted.data) x += 0.1;
    CHECK(psnr(shifted, ref) == Catch::Approx(20.0).margin(1e-9));  // MSE 0.01, range 1

    Image other(32);
    CHECK_THROWS_AS(psnr(other, ref), std::invalid_argument);
}

TEST_CASE("noise decreases psnr in expectation") {
    Image ref = testutil::disk_image(32, 10.0);
    double mean_lo = 0.0, mean_hi = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        Image lo = ref, hi = ref;
        for (std::size_t i = 0; i < ref.data.size(); ++i) {
            double n = rng.normal();
            lo.data[i] += 0.02 * n;
            hi.data[i] += 0.08 * n;
        }
        mean_lo += psnr(lo, ref);
        mean_hi += psnr(hi, ref);
    }
    CHECK(mean_lo / 20.0 > mean_hi / 20.0);
}

TEST_CASE("psnr invariant under simultaneous shift") {
    Image ref = testutil::disk_image(32, 9.0);
    Image u = ref;
    Rng rng(3);
    for (auto& x : u.data) x += 0.05 * rng.normal();
    double base = psnr(u, ref);
    Image us = u, rs = ref;
    for (auto& x : us.data) x += 0.4;
    for (auto& x : rs.data) x += 0.4;
    CHECK(psnr(us, rs) == Catch::Approx(base).epsilon(1e-12));
}

TEST_CASE("ssim goldens and bounds") {
    Image ref = testutil::disk_image(64, 20.0);
    CHECK(ssim(ref, ref) == Catch::Approx(1.0).margin(1e-12));

    Image inverted = ref;
    for (auto& x : inverted.data) x = 1.0 - x;
    CHECK(ssim(inverted, ref) < 0.5);

    Image flat(64);
    for (auto& x : flat.data) x = 0.5;
    double v = ssim(flat, ref);
    CHECK(std::isfinite(v));
    CHECK(v <= 1.0);
    CHECK(v >= -1.0);

    Image other(32);
    CHECK_THROWS_AS(ssim(other, ref), std::invalid_argument);
}

TEST_CASE("ssim stays within [-1, 1] on random pairs") {
    for (int trial = 0; trial < 1000; ++trial) {
        Image a = testutil::random_image(16, 2 * trial);
        Image b = testutil::random_image(16, 2 * trial + 1);
        double v = ssim(a, b);
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }
}

TEST_CASE("ssim nearly invariant under simultaneous shift") {
    // the luminance term is not exactly shift-invariant; the drift must stay small
    Image ref = testutil::disk_image(32, 9.0);
    Image u = ref;
    Rng rng(4);
    for (auto& x : u.data) x += 0.05 * rng.normal();
    double base = ssim(u, ref);
    Image us = u, rs = ref;
    for (auto& x : us.data) x += 0.1;
    for (auto& x : rs.data) x += 0.1;
    CHECK(std::abs(ssim(us, rs) - base) <= 0.1);
}

TEST_CASE("ssim is symmetric in its arguments at equal ranges") {
    Image a = testutil::disk_image(32, 9.0);
    Image b = a;
    Rng rng(5);
    for (auto& x : b.data) x = std::clamp(x + 0.03 * rng.normal(), 0.0, 1.0);
    b.data[0] = 0.0;
    b.data[1] = 1.0;  // pin the range of both images to [0,1]
    a.data[2] = 0.0;
    a.data[3] = 1.0;
    CHECK(ssim(a, b) == Catch::Approx(ssim(b, a)).epsilon(1e-12));
}

TEST_CASE("metric report means") {
    Image ref = testutil::disk_image(16, 5.0);
    MetricReport rep;
    rep.add(ref, ref);
    Image off = ref;
    for (auto& x : off.data) x += 0.1;
    rep.add(off, ref);
    REQUIRE(rep.psnr_values.size() == 2);
    CHECK(rep.mean_psnr() == Catch::Approx(0.5 * (99.0 + 20.0)).margin(1e-6));
    CHECK(rep.mean_ssim() <= 1.0);
}
