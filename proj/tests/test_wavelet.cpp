#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace microct;

TEST_CASE("constant image: detail subbands vanish") {
    Image u(32);
    for (auto& x : u.data) x = 3.25;
    WaveletCoeffs w = haar_analyze(u, 3);
    for (std::size_t iota = 1; iota < w.subband_count(); ++iota) {
        SubbandRect r = w.subband_rect(iota);
        for (std::size_t i = 0; i < r.side; ++i)
            for (std::size_t j = 0; j < r.side; ++j)
                CHECK(std::abs(w.at(r.row0 + i, r.col0 + j)) < 1e-12);
    }
    SubbandRect f = w.subband_rect(0);
    double expected = 3.25 * 8.0;  // 3 levels: 2^3 per axis... scaling (1/sqrt2)^... each level multiplies by 2
    for (std::size_t i = 0; i < f.side; ++i)
        for (std::size_t j = 0; j < f.side; ++j)
            CHECK(w.at(f.row0 + i, f.col0 + j) == Catch::Approx(expected).margin(1e-10));
}

TEST_CASE("2x2 impulse golden") {
    Image u(2);
    u.at(0, 0) = 1.0;
    WaveletCoeffs w = haar_analyze(u, 1);
    // orthonormal butterfly by hand: every quadrant holds 1/2
    CHECK(w.at(0, 0) == Catch::Approx(0.5));
    CHECK(w.at(0, 1) == Catch::Approx(0.5));
    CHECK(w.at(1, 0) == Catch::Approx(0.5));
    CHECK(w.at(1, 1) == Catch::Approx(0.5));
}

TEST_CASE("perfect reconstruction and Parseval") {
    for (std::size_t side : {32u, 64u, 128u}) {
        for (int trial = 0; trial < 100; ++trial) {
            Image u = testutil::random_image(side, 1000 * side + trial);
            WaveletCoeffs w = haar_analyze(u, 3);
            CHECK(w.subband_count() == 10);
            double nu = norm2(u.data), nw = norm2(w.data);
            CHECK(std::abs(nu - nw) <= 1e-10 * std::max(1.0, nu));
            Image back = haar_synthesize(w);
            CHECK(testutil::max_abs_diff(u.data, back.data) < 1e-10);
        }
    }
}

TEST_CASE("analyze after synthesize is identity") {
    WaveletCoeffs w(64, 3);
    Rng rng(77);
    for (auto& x : w.data) x = rng.uniform(-2.0, 2.0);
    WaveletCoeffs back = haar_analyze(haar_synthesize(w), 3);
    CHECK(testutil::max_abs_diff(w.data, back.data) < 1e-10);
}

TEST_CASE("zero coefficients give zero image") {
    WaveletCoeffs w(16, 2);
    Image u = haar_synthesize(w);
    for (double x : u.data) CHECK(x == 0.0);
}

TEST_CASE("subband rectangles tile the layout") {
    WaveletCoeffs w(128, 3);
    CHECK(w.subband_rect(0).side == 16);  // coarsest side 2^4 at side 128
    // finest (d) subband is one halving from the full side
    SubbandRect finest = w.subband_rect(w.subband_count() - 1);
    CHECK(finest.side == 64);
    CHECK(finest.orientation == Orientation::D);

    std::vector<int> covered(128 * 128, 0);
    std::size_t area = 0;
    for (std::size_t iota = 0; iota < w.subband_count(); ++iota) {
        SubbandRect r = w.subband_rect(iota);
        area += r.side * r.side;
        for (std::size_t i = 0; i < r.side; ++i)
            for (std::size_t j = 0; j < r.side; ++j) covered[(r.row0 + i) * 128 + (r.col0 + j)]++;
    }
    CHECK(area == 128 * 128);
    for (int c : covered) CHECK(c == 1);

    CHECK_THROWS_AS(w.subband_rect(w.subband_count()), std::invalid_argument);
}

TEST_CASE("orientation convention: vertical variation puts nothing in (h)") {
    Image u(32);
    for (std::size_t i = 0; i < 32; ++i)
        for (std::size_t j = 0; j < 32; ++j) u.at(i, j) = std::sin(0.4 * static_cast<double>(i));
    WaveletCoeffs w = haar_analyze(u, 3);
    for (std::size_t iota = 0; iota < w.subband_count(); ++iota) {
        SubbandRect r = w.subband_rect(iota);
        if (r.orientation != Orientation::H) continue;
        for (std::size_t i = 0; i < r.side; ++i)
            for (std::size_t j = 0; j < r.side; ++j)
                CHECK(std::abs(w.at(r.row0 + i, r.col0 + j)) < 1e-12);
    }
}

TEST_CASE("subband view writes through") {
    WaveletCoeffs w(16, 2);
    auto view = subband_view(w, 3);  // some detail band
    view.at(0, 0) = 42.0;
    SubbandRect r = w.subband_rect(3);
    CHECK(w.at(r.row0, r.col0) == 42.0);
}

TEST_CASE("analyze rejects bad level counts") {
    Image u(24);  // 24 = 8*3, divisible by 8 but not 16
    CHECK_NOTHROW(haar_analyze(u, 3));
    CHECK_THROWS_AS(haar_analyze(u, 4), std::invalid_argument);
}
