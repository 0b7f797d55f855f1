#pragma once

#include <cmath>
#include <cstring>
#include <optional>

#include "masks.hpp"
#include "wavelet.hpp"
#include "xray.hpp"

namespace microct {

// Per-block learnables of the unrolled iteration: step alpha_k, correction
// weight beta_k, threshold gamma_k (applied as |gamma_k|), and the Q x Q bank
// of p x p filter patches zeta_k (masked before every use).
struct LayerParams {
    double alpha = 1.0;
    double beta = 1.0;
    double gamma = 0.0;
    std::vector<double> zeta;  // Q*Q patches, each p*p, target-major

    LayerParams() = default;
    LayerParams(std::size_t q_subbands, std::size_t p)
        : zeta(q_subbands * q_subbands * p * p, 0.0) {}
};

struct NetworkParams {
    std::vector<LayerParams> layers;
    FilterMask mask;
    std::size_t levels = 0;
    std::size_t patch_size = 0;   // p, shared by every layer
    std::size_t q_subbands = 0;   // Q = 3*levels + 1
    ScanGeometry geometry;
    double operator_scale = 1.0;  // R_hat = operator_scale * R, so ||R_hat|| = 1

    std::size_t blocks() const { return layers.size(); }
    std::size_t scalar_count() const {
        return layers.size() * (3 + q_subbands * q_subbands * patch_size * patch_size);
    }
};

// Untrained network reproduces ISTA with step alpha=1, threshold lambda0
// (zeta = 0, so beta's value does not change the initial forward pass).
// beta starts at 1/sqrt(Q * active_taps): with a unit beta, the first Adam
// steps (each filter tap moves by ~lr) swing the correction by
// ~sqrt(Q * taps) * lr per coefficient and the 10-block unroll diverges at
// the stock learning rate; the damped start keeps the same model family and
// lets beta grow back as the filters become informative.
inline NetworkParams make_network(const ScanGeometry& g, double operator_scale, std::size_t blocks,
                                  std::size_t levels, const FilterMask& mask, double lambda0) {
    if (blocks == 0) throw std::invalid_argument("make_network: need at least one block");
    if (mask.size % 2 == 0) throw std::invalid_argument("make_network: even filter size");
    if (mask.size > 2 * g.image_size)
        throw std::invalid_argument("make_network: filter size beyond 2x image side");
    NetworkParams np;
    np.geometry = g;
    np.operator_scale = operator_scale;
    np.levels = levels;
    np.patch_size = mask.size;
    np.q_subbands = 3 * levels + 1;
    np.mask = mask;
    np.layers.assign(blocks, LayerParams(np.q_subbands, np.patch_size));
    double beta0 = 1.0 / std::sqrt(static_cast<double>(np.q_subbands) *
                                   static_cast<double>(mask.active_count));
    for (auto& l : np.layers) {
        l.alpha = 1.0;
        l.beta = beta0;
        l.gamma = lambda0;  // alpha * lambda0 with alpha = 1
    }
    return np;
}

struct IstaConfig {
    double lambda = 1e-3;   // regularization weight, > 0
    double alpha = 1.0;     // step, in (0, 1] once the operator is normalized
    std::size_t iterations = 10;
};

inline void soft_threshold_inplace(std::vector<double>& w, double gamma) {
    if (gamma < 0.0) throw std::invalid_argument("soft_threshold: gamma must be >= 0");
    for (double& x : w) {
        double a = std::abs(x) - gamma;
        x = a > 0.0 ? (x > 0.0 ? a : -a) : 0.0;
    }
}

inline WaveletCoeffs soft_threshold(const WaveletCoeffs& w, double gamma) {
    WaveletCoeffs out = w;
    soft_threshold_inplace(out.data, gamma);
    return out;
}

namespace detail {

inline void pad_wrap(const double* src, std::size_t s, std::size_t h, std::vector<double>& out) {
    const std::size_t sp = s + 2 * h;
    out.resize(sp * sp);
    const long ls = static_cast<long>(s), lh = static_cast<long>(h);
    for (long i = 0; i < static_cast<long>(sp); ++i) {
        long si = ((i - lh) % ls + ls) % ls;
        for (long j = 0; j < static_cast<long>(sp); ++j) {
            long sj = ((j - lh) % ls + ls) % ls;
            out[static_cast<std::size_t>(i) * sp + static_cast<std::size_t>(j)] =
                src[static_cast<std::size_t>(si) * s + static_cast<std::size_t>(sj)];
        }
    }
}

// Nearest-neighbour duplication (one dyadic step up).
inline std::vector<double> upsample2(const std::vector<double>& x, std::size_t s) {
    std::vector<double> y(4 * s * s);
    for (std::size_t i = 0; i < 2 * s; ++i)
        for (std::size_t j = 0; j < 2 * s; ++j) y[i * 2 * s + j] = x[(i / 2) * s + (j / 2)];
    return y;
}

// 2x2 averaging (one dyadic step down).
inline std::vector<double> downsample2(const std::vector<double>& x, std::size_t s) {
    std::size_t hs = s / 2;
    std::vector<double> y(hs * hs);
    for (std::size_t i = 0; i < hs; ++i)
        for (std::size_t j = 0; j < hs; ++j)
            y[i * hs + j] = 0.25 * (x[(2 * i) * s + 2 * j] + x[(2 * i) * s + 2 * j + 1] +
                                    x[(2 * i + 1) * s + 2 * j] + x[(2 * i + 1) * s + 2 * j + 1]);
    return y;
}

// Transpose of upsample2: 2x2 block sums.
inline std::vector<double> upsample2_t(const std::vector<double>& y, std::size_t s_fine) {
    std::size_t s = s_fine / 2;
    std::vector<double> x(s * s, 0.0);
    for (std::size_t i = 0; i < s_fine; ++i)
        for (std::size_t j = 0; j < s_fine; ++j) x[(i / 2) * s + (j / 2)] += y[i * s_fine + j];
    return x;
}

// Transpose of downsample2: scaled duplication.
inline std::vector<double> downsample2_t(const std::vector<double>& y, std::size_t s_coarse) {
    std::size_t s = s_coarse * 2;
    std::vector<double> x(s * s);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < s; ++j) x[i * s + j] = 0.25 * y[(i / 2) * s_coarse + (j / 2)];
    return x;
}

inline std::vector<double> resample(std::vector<double> x, std::size_t from, std::size_t to) {
    while (from < to) {
        x = upsample2(x, from);
        from *= 2;
    }
    while (from > to) {
        x = downsample2(x, from);
        from /= 2;
    }
    return x;
}

inline std::vector<double> resample_t(std::vector<double> y, std::size_t from, std::size_t to) {
    // transpose of resample(from -> to), mapping back to `from`-sized arrays
    while (to > from) {
        y = upsample2_t(y, to);
        to /= 2;
    }
    while (to < from) {
        y = downsample2_t(y, to);
        to *= 2;
    }
    return y;
}

}  // namespace detail

// Applies the learnable correction: every source subband is dyadically
// resampled to the target's resolution and circularly convolved with the
// masked filter patch. Active mask cells are iterated as a flat tap list, so
// out-of-mask filter entries can never touch the output.
class CorrectionEngine {
  public:
    CorrectionEngine(const FilterMask& mask, std::size_t side, std::size_t levels)
        : mask_(mask), p_(mask.size), h_((mask.size - 1) / 2), template_(side, levels) {
        if (p_ % 2 == 0) throw std::invalid_argument("correction: filter size must be odd");
        if (p_ > 2 * side) throw std::invalid_argument("correction: oversize filter patch");
        q_ = template_.subband_count();
        rects_.resize(q_);
        for (std::size_t i = 0; i < q_; ++i) rects_[i] = template_.subband_rect(i);
        const long c = static_cast<long>(h_);
        for (std::size_t i = 0; i < p_; ++i)
            for (std::size_t j = 0; j < p_; ++j)
                if (mask_.at(i, j))
                    taps_.push_back(Tap{static_cast<long>(i) - c, static_cast<long>(j) - c,
                                        i * p_ + j});
    }

    std::size_t subbands() const { return q_; }
    std::size_t patch_size() const { return p_; }
    const FilterMask& mask() const { return mask_; }

    // out = sum_{src} mask.zeta[tgt,src] (*) resample(w[src])
    void apply(const WaveletCoeffs& w, const std::vector<double>& zeta, WaveletCoeffs& out,
               unsigned threads = 1) const {
        check_shapes(w, zeta);
        out = WaveletCoeffs(w.side, w.levels);
        auto resampled = resample_sources(w);
        parallel_for(q_, threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> acc, pad;
            for (std::size_t tgt = lo; tgt < hi; ++tgt) {
                const std::size_t s = rects_[tgt].side;
                acc.assign(s * s, 0.0);
                for (std::size_t src = 0; src < q_; ++src) {
                    const double* f = zeta.data() + (tgt * q_ + src) * p_ * p_;
                    const std::vector<double>& r = resampled[src][side_index(s)];
                    detail::pad_wrap(r.data(), s, h_, pad);
                    convolve_acc(pad, s, f, acc);
                }
                deposit(out, rects_[tgt], acc);
            }
        });
    }

    // out = C^T g: correlation with the same masked filters, then the
    // transposed resampling back to each source subband.
    void apply_adjoint(const WaveletCoeffs& g, const std::vector<double>& zeta, WaveletCoeffs& out,
                       unsigned threads = 1) const {
        check_shapes(g, zeta);
        out = WaveletCoeffs(g.side, g.levels);
        // pad every target subband once
        std::vector<std::vector<double>> padded(q_);
        for (std::size_t tgt = 0; tgt < q_; ++tgt) {
            auto sub = g.extract(rects_[tgt]);
            detail::pad_wrap(sub.data(), rects_[tgt].side, h_, padded[tgt]);
        }
        parallel_for(q_, threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> corr, acc;
            for (std::size_t src = lo; src < hi; ++src) {
                const std::size_t s_src = rects_[src].side;
                acc.assign(s_src * s_src, 0.0);
                for (std::size_t tgt = 0; tgt < q_; ++tgt) {
                    const std::size_t s = rects_[tgt].side;
                    const double* f = zeta.data() + (tgt * q_ + src) * p_ * p_;
                    corr.assign(s * s, 0.0);
                    correlate_acc(padded[tgt], s, f, corr);
                    auto back = detail::resample_t(std::move(corr), s_src, s);
                    for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += back[k];
                }
                deposit(out, rects_[src], acc);
            }
        });
    }

    // d/d zeta of <apply(w, zeta), g>, masked. grad has zeta's layout.
    void filter_gradient(const WaveletCoeffs& w, const WaveletCoeffs& g, std::vector<double>& grad,
                         unsigned threads = 1) const {
        check_shapes(w, {});
        grad.assign(q_ * q_ * p_ * p_, 0.0);
        auto resampled = resample_sources(w);
        std::vector<std::vector<double>> gsubs(q_);
        for (std::size_t tgt = 0; tgt < q_; ++tgt) gsubs[tgt] = g.extract(rects_[tgt]);
        parallel_for(q_ * q_, threads, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> pad;
            for (std::size_t pair = lo; pair < hi; ++pair) {
                const std::size_t tgt = pair / q_, src = pair % q_;
                const std::size_t s = rects_[tgt].side;
                const std::vector<double>& r = resampled[src][side_index(s)];
                detail::pad_wrap(r.data(), s, h_, pad);
                const std::vector<double>& gsub = gsubs[tgt];
                double* gf = grad.data() + pair * p_ * p_;
                const std::size_t sp = s + 2 * h_;
                for (const Tap& t : taps_) {
                    const double* base = pad.data() +
                                         (static_cast<std::size_t>(static_cast<long>(h_) - t.oi)) * sp +
                                         static_cast<std::size_t>(static_cast<long>(h_) - t.oj);
                    // four independent accumulators so the reduction pipelines
                    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
                    for (std::size_t i = 0; i < s; ++i) {
                        const double* prow = base + i * sp;
                        const double* grow = gsub.data() + i * s;
                        std::size_t j = 0;
                        for (; j + 4 <= s; j += 4) {
                            a0 += prow[j] * grow[j];
                            a1 += prow[j + 1] * grow[j + 1];
                            a2 += prow[j + 2] * grow[j + 2];
                            a3 += prow[j + 3] * grow[j + 3];
                        }
                        for (; j < s; ++j) a0 += prow[j] * grow[j];
                    }
                    gf[t.tap] = (a0 + a1) + (a2 + a3);
                }
            }
        });
    }

  private:
    struct Tap {
        long oi, oj;       // row/col offsets from the patch center
        std::size_t tap;   // flat index into the p x p patch
    };

    void check_shapes(const WaveletCoeffs& w, const std::vector<double>& zeta) const {
        if (w.side != template_.side || w.levels != template_.levels)
            throw std::invalid_argument("correction: coefficient shape mismatch");
        if (!zeta.empty() && zeta.size() != q_ * q_ * p_ * p_)
            throw std::invalid_argument("correction: filter bank size mismatch");
    }

    std::size_t side_index(std::size_t s) const {
        std::size_t cs = template_.coarsest_side(), k = 0;
        while (cs < s) {
            cs <<= 1;
            ++k;
        }
        return k;
    }

    std::vector<std::vector<std::vector<double>>> resample_sources(const WaveletCoeffs& w) const {
        const std::size_t n_sides = template_.levels + 1;
        std::vector<std::vector<std::vector<double>>> out(q_);
        for (std::size_t src = 0; src < q_; ++src) {
            out[src].resize(n_sides);
            auto base = w.extract(rects_[src]);
            for (std::size_t k = 0; k < n_sides; ++k) {
                std::size_t s = template_.coarsest_side() << k;
                out[src][k] = detail::resample(base, rects_[src].side, s);
            }
        }
        return out;
    }

    void convolve_acc(const std::vector<double>& pad, std::size_t s, const double* f,
                      std::vector<double>& acc) const {
        const std::size_t sp = s + 2 * h_;
        for (const Tap& t : taps_) {
            const double ft = f[t.tap];
            if (ft == 0.0) continue;
            const double* base = pad.data() +
                                 (static_cast<std::size_t>(static_cast<long>(h_) - t.oi)) * sp +
                                 static_cast<std::size_t>(static_cast<long>(h_) - t.oj);
            for (std::size_t i = 0; i < s; ++i) {
                const double* prow = base + i * sp;
                double* arow = acc.data() + i * s;
                for (std::size_t j = 0; j < s; ++j) arow[j] += ft * prow[j];
            }
        }
    }

    void correlate_acc(const std::vector<double>& pad, std::size_t s, const double* f,
                       std::vector<double>& acc) const {
        const std::size_t sp = s + 2 * h_;
        for (const Tap& t : taps_) {
            const double ft = f[t.tap];
            if (ft == 0.0) continue;
            const double* base = pad.data() +
                                 (static_cast<std::size_t>(static_cast<long>(h_) + t.oi)) * sp +
                                 static_cast<std::size_t>(static_cast<long>(h_) + t.oj);
            for (std::size_t i = 0; i < s; ++i) {
                const double* prow = base + i * sp;
                double* arow = acc.data() + i * s;
                for (std::size_t j = 0; j < s; ++j) arow[j] += ft * prow[j];
            }
        }
    }

    static void deposit(WaveletCoeffs& w, const SubbandRect& r, const std::vector<double>& buf) {
        for (std::size_t i = 0; i < r.side; ++i)
            for (std::size_t j = 0; j < r.side; ++j) w.at(r.row0 + i, r.col0 + j) = buf[i * r.side + j];
    }

    FilterMask mask_;
    std::size_t p_, h_, q_ = 0;
    WaveletCoeffs template_;
    std::vector<SubbandRect> rects_;
    std::vector<Tap> taps_;
};

inline WaveletCoeffs correction_apply(const WaveletCoeffs& w, const std::vector<double>& zeta,
                                      const CorrectionEngine& engine, unsigned threads = 1) {
    WaveletCoeffs out;
    engine.apply(w, zeta, out, threads);
    return out;
}

// Everything a backward pass needs from one forward pass.
struct ForwardTrace {
    std::vector<WaveletCoeffs> w;           // K+1 iterates, w[0] = init
    std::vector<WaveletCoeffs> pre;         // K pre-activations z_k
    std::vector<WaveletCoeffs> normal_w;    // K values of N w_k
    std::vector<WaveletCoeffs> corr_w;      // K values of C_k w_k
    WaveletCoeffs data_term;                // b = W R_hat^T m
};

// Matrix-free fixed part: synthesize -> forward -> adjoint -> analyze,
// with the normalization scale folded in (scale^2 on the normal operator).
class UnrolledOperator {
  public:
    UnrolledOperator(const Projector& proj, double scale, std::size_t levels)
        : proj_(&proj), scale_(scale), levels_(levels) {}

    WaveletCoeffs normal_apply(const WaveletCoeffs& w, unsigned threads = 1) const {
        Image u = haar_synthesize(w, proj_->geometry().image_extent());
        Sinogram s = proj_->forward(u, threads);
        Image b = proj_->adjoint(s, threads);
        double s2 = scale_ * scale_;
        for (auto& x : b.data) x *= s2;
        return haar_analyze(b, levels_);
    }

    WaveletCoeffs data_term(const Sinogram& m, unsigned threads = 1) const {
        Image b = proj_->adjoint(m, threads);
        for (auto& x : b.data) x *= scale_;
        return haar_analyze(b, levels_);
    }

    const Projector& projector() const { return *proj_; }
    double scale() const { return scale_; }
    std::size_t levels() const { return levels_; }

  private:
    const Projector* proj_;
    double scale_;
    std::size_t levels_;
};

// K unrolled blocks of
//   w <- S_{|gamma_k|}( w - alpha_k N w + alpha_k b - beta_k C_k w ).
// Returns the synthesized image; the trace carries per-layer intermediates.
inline Image psidonet_forward(const Sinogram& m, const NetworkParams& params,
                              const UnrolledOperator& op, const CorrectionEngine& engine,
                              ForwardTrace* trace = nullptr,
                              const WaveletCoeffs* w0 = nullptr, unsigned threads = 1) {
    check_sinogram_matches(m, params.geometry);
    if (op.levels() != params.levels) throw std::invalid_argument("psidonet: levels mismatch");
    WaveletCoeffs b = op.data_term(m, threads);
    WaveletCoeffs w = w0 ? *w0 : b;  // default init: W R_hat^T m
    if (w.side != b.side || w.levels != b.levels)
        throw std::invalid_argument("psidonet: w0 shape mismatch");
    if (trace) {
        *trace = ForwardTrace{};
        trace->data_term = b;
        trace->w.push_back(w);
    }
    for (const LayerParams& layer : params.layers) {
        WaveletCoeffs nw = op.normal_apply(w, threads);
        WaveletCoeffs cw;
        engine.apply(w, layer.zeta, cw, threads);
        WaveletCoeffs z(w.side, w.levels);
        for (std::size_t i = 0; i < z.data.size(); ++i)
            z.data[i] = w.data[i] - layer.alpha * nw.data[i] + layer.alpha * b.data[i] -
                        layer.beta * cw.data[i];
        WaveletCoeffs next = soft_threshold(z, std::abs(layer.gamma));
        if (trace) {
            trace->normal_w.push_back(std::move(nw));
            trace->corr_w.push_back(std::move(cw));
            trace->pre.push_back(std::move(z));
            trace->w.push_back(next);
        }
        w = std::move(next);
    }
    return haar_synthesize(w, params.geometry.image_extent());
}

// Plain ISTA for the wavelet-sparse formulation; the beta_k = 0 specialization
// of the network, kept as its own loop.
inline Image ista_solve(const Sinogram& m, const UnrolledOperator& op, const IstaConfig& cfg,
                        std::vector<WaveletCoeffs>* iterates = nullptr, unsigned threads = 1) {
    if (cfg.lambda < 0.0 || cfg.alpha <= 0.0) throw std::invalid_argument("ista: bad config");
    WaveletCoeffs b = op.data_term(m, threads);
    WaveletCoeffs w = b;
    if (iterates) {
        iterates->clear();
        iterates->push_back(w);
    }
    for (std::size_t k = 0; k < cfg.iterations; ++k) {
        WaveletCoeffs nw = op.normal_apply(w, threads);
        for (std::size_t i = 0; i < w.data.size(); ++i)
            w.data[i] = w.data[i] - cfg.alpha * nw.data[i] + cfg.alpha * b.data[i];
        soft_threshold_inplace(w.data, cfg.alpha * cfg.lambda);
        if (iterates) iterates->push_back(w);
    }
    return haar_synthesize(w, op.projector().geometry().image_extent());
}

// 1/2 ||R_hat u - m||^2 + lambda ||W u||_1, the objective ISTA descends.
inline double sparsity_objective(const Image& u, const Sinogram& m, const UnrolledOperator& op,
                                 double lambda) {
    Sinogram r = op.projector().forward(u);
    double fidelity = 0.0;
    for (std::size_t i = 0; i < r.data.size(); ++i) {
        double d = op.scale() * r.data[i] - m.data[i];
        fidelity += d * d;
    }
    WaveletCoeffs w = haar_analyze(u, op.levels());
    double l1 = 0.0;
    for (double x : w.data) l1 += std::abs(x);
    return 0.5 * fidelity + lambda * l1;
}

// --- checkpoint format: magic, header JSON, little-endian float64 payload ---
// Payload order: per layer k: alpha_k, beta_k, gamma_k, zeta_k (target-major
// Q*Q patches, row-major p*p each); then an optional trainer-state blob.

inline constexpr char kCheckpointMagic[8] = {'M', 'C', 'T', 'C', 'K', 'P', 'T', '1'};

inline void save_checkpoint(const std::filesystem::path& path, const NetworkParams& params,
                            const std::vector<double>& trainer_state = {},
                            const std::string& trainer_kind = "") {
    nlohmann::json header;
    header["version"] = 1;
    header["blocks"] = params.blocks();
    header["patch_size"] = params.patch_size;
    header["levels"] = params.levels;
    header["q_subbands"] = params.q_subbands;
    header["mask"] = {{"kind", mask_kind_name(params.mask.kind)}, {"q", params.mask.q}};
    header["geometry"] = to_json(params.geometry);
    header["geometry_hash"] = geometry_hash(params.geometry);
    header["operator_scale"] = params.operator_scale;
    header["trainer_state"] = trainer_kind;
    header["trainer_state_len"] = trainer_state.size();
    std::string hs = header.dump();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open checkpoint for writing: " + path.string());
    f.write(kCheckpointMagic, 8);
    auto len = static_cast<std::uint32_t>(hs.size());
    f.write(reinterpret_cast<const char*>(&len), 4);
    f.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    auto put = [&f](const double* d, std::size_t n) {
        f.write(reinterpret_cast<const char*>(d), static_cast<std::streamsize>(n * sizeof(double)));
    };
    for (const LayerParams& l : params.layers) {
        put(&l.alpha, 1);
        put(&l.beta, 1);
        put(&l.gamma, 1);
        put(l.zeta.data(), l.zeta.size());
    }
    put(trainer_state.data(), trainer_state.size());
    if (!f) throw IoError("checkpoint write failed: " + path.string());
}

inline NetworkParams load_checkpoint(const std::filesystem::path& path,
                                     std::vector<double>* trainer_state = nullptr,
                                     std::string* trainer_kind = nullptr) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open checkpoint: " + path.string());
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, kCheckpointMagic, 8) != 0)
        throw IntegrityError("not a checkpoint file: " + path.string());
    std::uint32_t len = 0;
    f.read(reinterpret_cast<char*>(&len), 4);
    std::string hs(len, '\0');
    f.read(hs.data(), len);
    if (!f) throw IntegrityError("truncated checkpoint header: " + path.string());
    auto header = nlohmann::json::parse(hs, nullptr, false);
    if (header.is_discarded()) throw IntegrityError("corrupt checkpoint header: " + path.string());
    if (header.at("version").get<int>() != 1)
        throw UnsupportedVersion("unsupported checkpoint version in " + path.string());

    NetworkParams params;
    params.geometry = geometry_from_json(header.at("geometry"));
    if (header.at("geometry_hash").get<std::uint64_t>() != geometry_hash(params.geometry))
        throw IntegrityError("checkpoint geometry hash mismatch: " + path.string());
    params.operator_scale = header.at("operator_scale").get<double>();
    params.levels = header.at("levels").get<std::size_t>();
    params.patch_size = header.at("patch_size").get<std::size_t>();
    params.q_subbands = header.at("q_subbands").get<std::size_t>();
    std::size_t blocks = header.at("blocks").get<std::size_t>();
    MaskKind kind = mask_kind_from_name(header.at("mask").at("kind").get<std::string>());
    std::size_t mq = header.at("mask").at("q").get<std::size_t>();
    params.mask = build_mask(kind, params.geometry.angle_set, params.patch_size, mq);

    auto get = [&f, &path](double* d, std::size_t n) {
        f.read(reinterpret_cast<char*>(d), static_cast<std::streamsize>(n * sizeof(double)));
        if (!f) throw IntegrityError("truncated checkpoint payload: " + path.string());
    };
    params.layers.assign(blocks, LayerParams(params.q_subbands, params.patch_size));
    for (LayerParams& l : params.layers) {
        get(&l.alpha, 1);
        get(&l.beta, 1);
        get(&l.gamma, 1);
        get(l.zeta.data(), l.zeta.size());
    }
    std::size_t extra = header.at("trainer_state_len").get<std::size_t>();
    if (trainer_state) {
        trainer_state->assign(extra, 0.0);
        if (extra) get(trainer_state->data(), extra);
    }
    if (trainer_kind) *trainer_kind = header.at("trainer_state").get<std::string>();
    return params;
}

}  // namespace microct
