#include <catch2/catch_amalgamated.hpp>

#include "test_util.hpp"

using namespace microct;

namespace {

struct Instance {
    ScanGeometry g;
    Projector proj;
    double scale;
    std::size_t levels;
    Sinogram m;

    Instance(ScanGeometry g_, std::size_t levels_, std::uint64_t seed)
        : g(std::move(g_)), proj(g), scale(1.0 / estimate_operator_norm(proj, 60, 17)), levels(levels_),
          m(make_sinogram_for(g)) {
        auto [img, specs] = generate_phantom(seed, g.image_size);
        m = simulate_measurement(img, proj, scale, 0.01, seed + 1);
    }
};

std::vector<double> delta_diagonal_filters(std::size_t q, std::size_t p) {
    std::vector<double> zeta(q * q * p * p, 0.0);
    std::size_t center = (p / 2) * p + p / 2;
    for (std::size_t i = 0; i < q; ++i) zeta[(i * q + i) * p * p + center] = 1.0;
    return zeta;
}

}  // namespace

TEST_CASE("soft threshold goldens") {
    WaveletCoeffs w(2, 1);
    w.data = {2.0, -2.0, 0.5, -0.25};
    WaveletCoeffs out = soft_threshold(w, 1.0);
    CHECK(out.data == std::vector<double>{1.0, -1.0, 0.0, 0.0});
    WaveletCoeffs same = soft_threshold(w, 0.0);
    CHECK(same.data == w.data);
    CHECK_THROWS_AS(soft_threshold(w, -0.1), std::invalid_argument);

    Rng rng(4);
    WaveletCoeffs r(8, 1);
    for (auto& x : r.data) x = rng.uniform(-2.0, 2.0);
    WaveletCoeffs s = soft_threshold(r, 0.3);
    double l1_in = 0.0, l1_out = 0.0;
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        l1_in += std::abs(r.data[i]);
        l1_out += std::abs(s.data[i]);
    }
    CHECK(l1_out <= l1_in);
}

TEST_CASE("correction: zero filters, identity probe, off-diagonal routing") {
    const std::size_t side = 32, levels = 2, p = 7;
    FilterMask full = build_mask(MaskKind::Full, AngleSet::limited(1.0), p, 0);
    CorrectionEngine engine(full, side, levels);
    const std::size_t q = engine.subbands();

    WaveletCoeffs w(side, levels);
    Rng rng(5);
    for (auto& x : w.data) x = rng.uniform(-1.0, 1.0);

    std::vector<double> zeros(q * q * p * p, 0.0);
    WaveletCoeffs out = correction_apply(w, zeros, engine);
    for (double x : out.data) CHECK(x == 0.0);

    WaveletCoeffs ident = correction_apply(w, delta_diagonal_filters(q, p), engine);
    CHECK(testutil::max_abs_diff(ident.data, w.data) < 1e-12);

    // single off-diagonal filter: energy lands only in the target subband
    std::vector<double> zeta(q * q * p * p, 0.0);
    const std::size_t tgt = 1, src = 5;
    zeta[(tgt * q + src) * p * p + (p / 2) * p + p / 2] = 1.0;
    WaveletCoeffs routed = correction_apply(w, zeta, engine);
    for (std::size_t iota = 0; iota < q; ++iota) {
        SubbandRect r = routed.subband_rect(iota);
        double energy = 0.0;
        for (std::size_t i = 0; i < r.side; ++i)
            for (std::size_t j = 0; j < r.side; ++j)
                energy += routed.at(r.row0 + i, r.col0 + j) * routed.at(r.row0 + i, r.col0 + j);
        if (iota == tgt)
            CHECK(energy > 0.0);
        else
            CHECK(energy == 0.0);
    }
}

TEST_CASE("correction adjoint identity") {
    const std::size_t side = 32, levels = 2;
    Rng rng(6);
    for (std::size_t p : {5u, 7u, 17u}) {  // 17 exceeds the coarsest side: wrap-around path
        FilterMask mask = build_mask(MaskKind::Bow, AngleSet::limited(kPi / 3), p, 1);
        CorrectionEngine engine(mask, side, levels);
        std::size_t q = engine.subbands();
        std::vector<double> zeta(q * q * p * p);
        for (auto& z : zeta) z = rng.uniform(-1.0, 1.0);
        WaveletCoeffs w(side, levels), g(side, levels);
        for (auto& x : w.data) x = rng.uniform(-1.0, 1.0);
        for (auto& x : g.data) x = rng.uniform(-1.0, 1.0);
        WaveletCoeffs cw, ctg;
        engine.apply(w, zeta, cw);
        engine.apply_adjoint(g, zeta, ctg);
        double lhs = dot(cw.data, g.data);
        double rhs = dot(w.data, ctg.data);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST_CASE("correction filter gradient matches the linear pairing") {
    const std::size_t side = 16, levels = 1, p = 5;
    FilterMask mask = build_mask(MaskKind::X, AngleSet::limited(kPi / 4), p, 0);
    CorrectionEngine engine(mask, side, levels);
    std::size_t q = engine.subbands();
    Rng rng(7);
    WaveletCoeffs w(side, levels), g(side, levels);
    for (auto& x : w.data) x = rng.uniform(-1.0, 1.0);
    for (auto& x : g.data) x = rng.uniform(-1.0, 1.0);
    std::vector<double> grad;
    engine.filter_gradient(w, g, grad);
    // <C(w; e_t), g> must equal grad[t] exactly (linearity in zeta)
    for (int probe = 0; probe < 12; ++probe) {
        std::size_t t = Rng(100 + probe).uniform_index(q * q * p * p);
        std::vector<double> e(q * q * p * p, 0.0);
        e[t] = 1.0;
        WaveletCoeffs cw;
        engine.apply(w, e, cw);
        double pairing = dot(cw.data, g.data);
        std::size_t tap = t % (p * p);
        if (mask.support[tap])
            CHECK(std::abs(pairing - grad[t]) <= 1e-12 * std::max(1.0, std::abs(pairing)));
        else
            CHECK(grad[t] == 0.0);
    }
}

TEST_CASE("oversize patch is rejected") {
    FilterMask big = build_mask(MaskKind::Full, AngleSet::limited(1.0), 65, 0);
    CHECK_THROWS_AS(CorrectionEngine(big, 16, 1), std::invalid_argument);
}

TEST_CASE("psidonet with beta = 0 recovers ISTA per layer") {
    std::vector<Instance> instances;
    instances.emplace_back(make_limited_geometry(16, kPi / 3, 10), 1, 21);
    instances.emplace_back(make_limited_geometry(32, kPi / 6, 14), 2, 22);
    instances.emplace_back(make_sparse_geometry(32, 8), 2, 23);
    const double alpha = 0.9, lambda = 0.01;
    const std::size_t K = 6;
    for (auto& inst : instances) {
        UnrolledOperator op(inst.proj, inst.scale, inst.levels);
        FilterMask mask = build_mask(MaskKind::Full, inst.g.angle_set, 5, 0);
        CorrectionEngine engine(mask, inst.g.image_size, inst.levels);
        NetworkParams params = make_network(inst.g, inst.scale, K, inst.levels, mask, lambda);
        for (auto& l : params.layers) {
            l.alpha = alpha;
            l.beta = 0.0;
            l.gamma = alpha * lambda;
        }
        ForwardTrace trace;
        Image net = psidonet_forward(inst.m, params, op, engine, &trace);

        IstaConfig cfg{lambda, alpha, K};
        std::vector<WaveletCoeffs> iterates;
        Image ista = ista_solve(inst.m, op, cfg, &iterates);

        REQUIRE(trace.w.size() == iterates.size());
        for (std::size_t k = 0; k < iterates.size(); ++k)
            CHECK(testutil::max_abs_diff(trace.w[k].data, iterates[k].data) < 1e-10);
        CHECK(testutil::max_abs_diff(net.data, ista.data) < 1e-10);
    }
}

TEST_CASE("zero data with zero init stays zero") {
    ScanGeometry g = make_limited_geometry(16, kPi / 3, 10);
    Projector proj(g);
    UnrolledOperator op(proj, 1.0, 1);
    FilterMask mask = build_mask(MaskKind::Full, g.angle_set, 5, 0);
    CorrectionEngine engine(mask, 16, 1);
    NetworkParams params = make_network(g, 1.0, 4, 1, mask, 0.01);
    Sinogram m = make_sinogram_for(g);
    WaveletCoeffs w0(16, 1);
    Image out = psidonet_forward(m, params, op, engine, nullptr, &w0);
    for (double x : out.data) CHECK(x == 0.0);
}

TEST_CASE("zero blocks return the synthesized init") {
    ScanGeometry g = make_limited_geometry(16, kPi / 3, 10);
    Projector proj(g);
    UnrolledOperator op(proj, 1.0, 1);
    FilterMask mask = build_mask(MaskKind::Full, g.angle_set, 5, 0);
    CorrectionEngine engine(mask, 16, 1);
    NetworkParams params;  // empty unroll
    params.geometry = g;
    params.operator_scale = 1.0;
    params.levels = 1;
    params.patch_size = 5;
    params.q_subbands = 4;
    params.mask = mask;
    WaveletCoeffs w0(16, 1);
    Rng rng(9);
    for (auto& x : w0.data) x = rng.uniform(-1.0, 1.0);
    Sinogram m = testutil::random_sinogram(g, 10);
    Image out = psidonet_forward(m, params, op, engine, nullptr, &w0);
    Image expect = haar_synthesize(w0, g.image_extent());
    CHECK(testutil::max_abs_diff(out.data, expect.data) == 0.0);
}

TEST_CASE("thresholds off: forward is linear in the data") {
    Instance inst(make_limited_geometry(32, kPi / 3, 20), 2, 31);
    UnrolledOperator op(inst.proj, inst.scale, inst.levels);
    FilterMask mask = build_mask(MaskKind::Bow, inst.g.angle_set, 7, 1);
    CorrectionEngine engine(mask, inst.g.image_size, inst.levels);
    NetworkParams params = make_network(inst.g, inst.scale, 3, inst.levels, mask, 0.0);
    Rng rng(32);
    for (auto& l : params.layers) {
        l.alpha = 0.8;
        l.beta = 0.4;
        l.gamma = 0.0;
        for (auto& z : l.zeta) z = 0.05 * rng.uniform(-1.0, 1.0);
    }
    Image once = psidonet_forward(inst.m, params, op, engine);
    Sinogram doubled = inst.m;
    for (auto& x : doubled.data) x *= 2.0;
    Image twice = psidonet_forward(doubled, params, op, engine);
    for (std::size_t i = 0; i < once.data.size(); ++i)
        CHECK(std::abs(twice.data[i] - 2.0 * once.data[i]) <=
              1e-12 * std::max(1.0, std::abs(twice.data[i])));
}

TEST_CASE("out-of-mask filter entries never influence the output") {
    Instance inst(make_limited_geometry(32, kPi / 3, 20), 2, 41);
    UnrolledOperator op(inst.proj, inst.scale, inst.levels);
    FilterMask mask = build_mask(MaskKind::X, inst.g.angle_set, 7, 1);
    CorrectionEngine engine(mask, inst.g.image_size, inst.levels);
    NetworkParams params = make_network(inst.g, inst.scale, 3, inst.levels, mask, 0.005);
    Rng rng(42);
    for (auto& l : params.layers)
        for (auto& z : l.zeta) z = 0.1 * rng.uniform(-1.0, 1.0);
    Image base = psidonet_forward(inst.m, params, op, engine);

    NetworkParams tampered = params;
    const std::size_t p = params.patch_size, q = params.q_subbands;
    for (auto& l : tampered.layers)
        for (std::size_t pair = 0; pair < q * q; ++pair)
            for (std::size_t t = 0; t < p * p; ++t)
                if (!mask.support[t]) l.zeta[pair * p * p + t] = rng.uniform(-100.0, 100.0);
    Image same = psidonet_forward(inst.m, tampered, op, engine);
    CHECK(base.data == same.data);  // bit-identical
}

TEST_CASE("ista objective is non-increasing") {
    Instance inst(make_limited_geometry(32, kPi / 3, 20), 2, 51);
    UnrolledOperator op(inst.proj, inst.scale, inst.levels);
    IstaConfig cfg{0.005, 1.0, 30};
    std::vector<WaveletCoeffs> iterates;
    ista_solve(inst.m, op, cfg, &iterates);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& w : iterates) {
        Image u = haar_synthesize(w, inst.g.image_extent());
        double obj = sparsity_objective(u, inst.m, op, cfg.lambda);
        CHECK(obj <= prev + 1e-9);
        prev = obj;
    }
}

TEST_CASE("huge lambda shrinks the first iterate to zero") {
    Instance inst(make_limited_geometry(16, kPi / 3, 10), 1, 61);
    UnrolledOperator op(inst.proj, inst.scale, inst.levels);
    WaveletCoeffs b = op.data_term(inst.m);
    double binf = 0.0;
    for (double x : b.data) binf = std::max(binf, std::abs(x));
    // after one step the argument of the shrinkage is bounded by ~2*binf
    IstaConfig cfg{3.0 * binf, 1.0, 1};
    std::vector<WaveletCoeffs> iterates;
    ista_solve(inst.m, op, cfg, &iterates);
    for (double x : iterates[1].data) CHECK(x == 0.0);
}

TEST_CASE("lambda = 0 behaves like Landweber: residual decreases") {
    Instance inst(make_limited_geometry(32, kPi / 2 - 1e-9, 40), 2, 71);
    UnrolledOperator op(inst.proj, inst.scale, inst.levels);
    IstaConfig cfg{0.0, 1.0, 25};
    std::vector<WaveletCoeffs> iterates;
    ista_solve(inst.m, op, cfg, &iterates);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& w : iterates) {
        Image u = haar_synthesize(w, inst.g.image_extent());
        Sinogram r = inst.proj.forward(u);
        double res = 0.0;
        for (std::size_t i = 0; i < r.data.size(); ++i) {
            double d = inst.scale * r.data[i] - inst.m.data[i];
            res += d * d;
        }
        CHECK(res <= prev + 1e-9);
        prev = res;
    }
}

TEST_CASE("checkpoint round-trip is exact") {
    ScanGeometry g = make_limited_geometry(16, kPi / 3, 10);
    FilterMask mask = build_mask(MaskKind::Bow, g.angle_set, 5, 1);
    NetworkParams params = make_network(g, 0.123, 3, 1, mask, 0.01);
    Rng rng(81);
    for (auto& l : params.layers) {
        l.alpha = rng.uniform(0.0, 2.0);
        l.beta = rng.uniform(-1.0, 1.0);
        l.gamma = rng.uniform(-0.1, 0.1);
        for (std::size_t t = 0; t < l.zeta.size(); ++t)
            if (mask.support[t % (5 * 5)]) l.zeta[t] = rng.uniform(-1.0, 1.0);
    }
    auto path = std::filesystem::temp_directory_path() / "microct_ckpt_test.ckpt";
    std::vector<double> blob = {1.0, 2.0, 3.0};
    save_checkpoint(path, params, blob, "adam");

    std::vector<double> blob_back;
    std::string kind;
    NetworkParams loaded = load_checkpoint(path, &blob_back, &kind);
    CHECK(kind == "adam");
    CHECK(blob_back == blob);
    CHECK(loaded.operator_scale == params.operator_scale);
    REQUIRE(loaded.blocks() == params.blocks());
    for (std::size_t k = 0; k < params.blocks(); ++k) {
        CHECK(loaded.layers[k].alpha == params.layers[k].alpha);
        CHECK(loaded.layers[k].beta == params.layers[k].beta);
        CHECK(loaded.layers[k].gamma == params.layers[k].gamma);
        CHECK(loaded.layers[k].zeta == params.layers[k].zeta);
    }
    CHECK(loaded.mask.support == params.mask.support);

    // corrupting the magic is refused
    std::string bytes = read_text(path);
    bytes[0] = 'X';
    write_text(path, bytes);
    CHECK_THROWS_AS(load_checkpoint(path), IntegrityError);
    // truncation is refused
    save_checkpoint(path, params, blob, "adam");
    write_text(path, read_text(path).substr(0, read_text(path).size() / 2));
    CHECK_THROWS_AS(load_checkpoint(path), IntegrityError);
    std::filesystem::remove(path);
}
