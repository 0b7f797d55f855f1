#pragma once

#include <chrono>
#include <iomanip>
#include <sstream>

#include "metrics.hpp"
#include "phantoms.hpp"
#include "unrolled.hpp"

namespace microct {

// Same shape as the learnables; zeta entries outside the mask stay zero.
struct ParamGradients {
    struct Layer {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        std::vector<double> zeta;
    };
    std::vector<Layer> layers;

    static ParamGradients zeros_like(const NetworkParams& p) {
        ParamGradients g;
        g.layers.assign(p.blocks(), Layer{});
        for (auto& l : g.layers)
            l.zeta.assign(p.q_subbands * p.q_subbands * p.patch_size * p.patch_size, 0.0);
        return g;
    }

    void accumulate(const ParamGradients& other, double weight) {
        for (std::size_t k = 0; k < layers.size(); ++k) {
            layers[k].alpha += weight * other.layers[k].alpha;
            layers[k].beta += weight * other.layers[k].beta;
            layers[k].gamma += weight * other.layers[k].gamma;
            for (std::size_t i = 0; i < layers[k].zeta.size(); ++i)
                layers[k].zeta[i] += weight * other.layers[k].zeta[i];
        }
    }
};

// Loss is half the mean squared pixel error; "zero iff equal" as required.
struct LossValue {
    double scalar = 0.0;
};

namespace detail {

inline double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace detail

// Reverse-mode pass through the unrolled blocks. Uses the stored trace:
// the normal operator is self-adjoint, the correction adjoint is masked
// correlation plus transposed resampling, and the soft-threshold subgradient
// is the open active set {|z| > gamma}.
inline std::pair<LossValue, ParamGradients> backward(const NetworkParams& params,
                                                     const UnrolledOperator& op,
                                                     const CorrectionEngine& engine,
                                                     const ForwardTrace& trace, const Image& target,
                                                     unsigned threads = 1) {
    const std::size_t blocks = params.blocks();
    if (trace.w.size() != blocks + 1 || trace.pre.size() != blocks ||
        trace.normal_w.size() != blocks || trace.corr_w.size() != blocks)
        throw std::invalid_argument("backward: trace does not match the network (stale intermediates)");
    if (target.side * target.side != trace.w.back().data.size())
        throw std::invalid_argument("backward: target shape mismatch");

    const double n_px = static_cast<double>(target.data.size());
    Image recon = haar_synthesize(trace.w.back(), target.extent);
    LossValue loss;
    Image residual(target.side, target.extent);
    for (std::size_t i = 0; i < residual.data.size(); ++i) {
        double d = recon.data[i] - target.data[i];
        residual.data[i] = d / n_px;
        loss.scalar += 0.5 * d * d / n_px;
    }

    ParamGradients grads = ParamGradients::zeros_like(params);
    // d loss / d w_K = W residual (orthogonal W)
    WaveletCoeffs g_w = haar_analyze(residual, params.levels);

    for (std::size_t k = blocks; k-- > 0;) {
        const LayerParams& layer = params.layers[k];
        const WaveletCoeffs& z = trace.pre[k];
        const double gamma_eff = std::abs(layer.gamma);

        WaveletCoeffs g_z(z.side, z.levels);
        double g_gamma_eff = 0.0;
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            if (std::abs(z.data[i]) > gamma_eff) {
                g_z.data[i] = g_w.data[i];
                g_gamma_eff -= detail::sign(z.data[i]) * g_w.data[i];
            }
        }
        grads.layers[k].gamma = detail::sign(layer.gamma) * g_gamma_eff;

        // z = w - alpha (N w - b) - beta C w
        double g_alpha = 0.0, g_beta = 0.0;
        for (std::size_t i = 0; i < z.data.size(); ++i) {
            g_alpha += (trace.data_term.data[i] - trace.normal_w[k].data[i]) * g_z.data[i];
            g_beta -= trace.corr_w[k].data[i] * g_z.data[i];
        }
        grads.layers[k].alpha = g_alpha;
        grads.layers[k].beta = g_beta;

        std::vector<double> zeta_grad;
        engine.filter_gradient(trace.w[k], g_z, zeta_grad, threads);
        for (std::size_t i = 0; i < zeta_grad.size(); ++i)
            grads.layers[k].zeta[i] = -layer.beta * zeta_grad[i];

        WaveletCoeffs n_gz = op.normal_apply(g_z, threads);
        WaveletCoeffs c_gz;
        engine.apply_adjoint(g_z, layer.zeta, c_gz, threads);
        WaveletCoeffs g_prev(z.side, z.levels);
        for (std::size_t i = 0; i < g_prev.data.size(); ++i)
            g_prev.data[i] = g_z.data[i] - layer.alpha * n_gz.data[i] - layer.beta * c_gz.data[i];
        g_w = std::move(g_prev);
    }
    return {loss, grads};
}

// --- flat parameter packing (checkpoint payload order) ---

inline std::vector<double> params_to_vector(const NetworkParams& p) {
    std::vector<double> v;
    v.reserve(p.scalar_count());
    for (const auto& l : p.layers) {
        v.push_back(l.alpha);
        v.push_back(l.beta);
        v.push_back(l.gamma);
        v.insert(v.end(), l.zeta.begin(), l.zeta.end());
    }
    return v;
}

inline void vector_to_params(const std::vector<double>& v, NetworkParams& p) {
    std::size_t off = 0;
    for (auto& l : p.layers) {
        l.alpha = v[off++];
        l.beta = v[off++];
        l.gamma = v[off++];
        std::copy(v.begin() + static_cast<long>(off),
                  v.begin() + static_cast<long>(off + l.zeta.size()), l.zeta.begin());
        off += l.zeta.size();
    }
}

inline std::vector<double> grads_to_vector(const ParamGradients& g) {
    std::vector<double> v;
    for (const auto& l : g.layers) {
        v.push_back(l.alpha);
        v.push_back(l.beta);
        v.push_back(l.gamma);
        v.insert(v.end(), l.zeta.begin(), l.zeta.end());
    }
    return v;
}

struct AdamState {
    std::vector<double> m, v;
    std::size_t t = 0;

    static AdamState zeros(std::size_t n) {
        AdamState s;
        s.m.assign(n, 0.0);
        s.v.assign(n, 0.0);
        return s;
    }

    // checkpoint blob: [t, m..., v...]
    std::vector<double> serialize() const {
        std::vector<double> out;
        out.reserve(1 + m.size() + v.size());
        out.push_back(static_cast<double>(t));
        out.insert(out.end(), m.begin(), m.end());
        out.insert(out.end(), v.begin(), v.end());
        return out;
    }

    static AdamState deserialize(const std::vector<double>& blob, std::size_t n) {
        if (blob.size() != 1 + 2 * n) throw IntegrityError("Adam state blob has the wrong length");
        AdamState s;
        s.t = static_cast<std::size_t>(blob[0]);
        s.m.assign(blob.begin() + 1, blob.begin() + 1 + static_cast<long>(n));
        s.v.assign(blob.begin() + 1 + static_cast<long>(n), blob.end());
        return s;
    }
};

inline void adam_step(std::vector<double>& theta, const std::vector<double>& grad, AdamState& state,
                      double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    if (theta.size() != grad.size() || theta.size() != state.m.size())
        throw std::invalid_argument("adam_step: size mismatch");
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grad[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grad[i] * grad[i];
        double mhat = state.m[i] / bc1;
        double vhat = state.v[i] / bc2;
        theta[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

inline void adam_step(NetworkParams& params, const ParamGradients& grads, AdamState& state, double lr,
                      double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
    auto theta = params_to_vector(params);
    adam_step(theta, grads_to_vector(grads), state, lr, beta1, beta2, eps);
    vector_to_params(theta, params);
}

struct TrainConfig {
    std::size_t blocks = 10;
    std::size_t epochs = 15;
    std::size_t batch = 25;
    double lr = 1e-3;
    double lambda0 = 2e-3;
    std::uint64_t seed = 0;
    MaskKind mask_kind = MaskKind::Full;
    std::size_t mask_q = 0;
    std::size_t patch_size = 17;
    std::size_t levels = 0;  // 0: log2(side) - 4, clamped to >= 1
    unsigned threads = 1;
    std::size_t val_limit = 0;  // 0: whole test split
    std::filesystem::path out_dir;
};

struct TrainResult {
    NetworkParams params;
    std::vector<double> epoch_train_loss;
    std::vector<double> epoch_val_psnr;
};

inline std::size_t default_levels(std::size_t side) {
    std::size_t l = 0, s = side;
    while (s > 16) {
        s /= 2;
        ++l;
    }
    return std::max<std::size_t>(l, 1);
}

// Supervised training: epochs x batches of forward/backward/Adam, fixed
// shuffle and reduction order under the seed, per-epoch validation PSNR.
inline TrainResult train(const Dataset& data, const TrainConfig& cfg) {
    namespace fs = std::filesystem;
    const DatasetManifest& man = data.manifest();
    const ScanGeometry& g = man.geometry;
    const std::size_t levels = cfg.levels ? cfg.levels : default_levels(g.image_size);

    Projector proj(g, cfg.threads);
    UnrolledOperator op(proj, man.operator_scale, levels);
    FilterMask mask = build_mask(cfg.mask_kind, g.angle_set, cfg.patch_size, cfg.mask_q);
    CorrectionEngine engine(mask, g.image_size, levels);
    NetworkParams params = make_network(g, man.operator_scale, cfg.blocks, levels, mask, cfg.lambda0);
    AdamState adam = AdamState::zeros(params.scalar_count());

    const bool persist = !cfg.out_dir.empty();
    std::ostringstream log;
    log << "epoch,batch,loss,val_psnr,wall_time_s\n";
    auto t_start = std::chrono::steady_clock::now();
    auto elapsed = [&t_start] {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    };
    auto flush_log = [&] {
        if (persist) write_text(cfg.out_dir / "training_log.csv", log.str());
    };
    auto save = [&](const fs::path& p) { save_checkpoint(p, params, adam.serialize(), "adam"); };
    if (persist) fs::create_directories(cfg.out_dir);

    const std::size_t n_train = data.train_count();
    if (n_train == 0) throw std::invalid_argument("train: dataset has no training samples");
    std::vector<std::size_t> order(n_train);

    TrainResult result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < n_train; ++i) order[i] = i;
        Rng shuffle_rng = Rng::derive(cfg.seed, 1000 + epoch);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < n_train; start += cfg.batch) {
            const std::size_t bsize = std::min(cfg.batch, n_train - start);
            std::vector<LossValue> losses(bsize);
            std::vector<ParamGradients> grads(bsize);
            parallel_for(bsize, cfg.threads, [&](std::size_t lo, std::size_t hi) {
                for (std::size_t b = lo; b < hi; ++b) {
                    std::size_t idx = order[start + b];
                    Image target = data.load_image(true, idx);
                    Sinogram m = data.load_sinogram(true, idx);
                    ForwardTrace trace;
                    psidonet_forward(m, params, op, engine, &trace);
                    auto [l, gr] = backward(params, op, engine, trace, target);
                    losses[b] = l;
                    grads[b] = std::move(gr);
                }
            });
            ParamGradients batch_grad = ParamGradients::zeros_like(params);
            double batch_loss = 0.0;
            for (std::size_t b = 0; b < bsize; ++b) {  // fixed sample order
                batch_grad.accumulate(grads[b], 1.0 / static_cast<double>(bsize));
                batch_loss += losses[b].scalar / static_cast<double>(bsize);
            }
            adam_step(params, batch_grad, adam, cfg.lr);
            bool params_finite = true;
            for (const auto& l : params.layers) {
                params_finite = params_finite && std::isfinite(l.alpha) && std::isfinite(l.beta) &&
                                std::isfinite(l.gamma);
                for (double z : l.zeta) params_finite = params_finite && std::isfinite(z);
                if (!params_finite) break;
            }
            if (!std::isfinite(batch_loss) || !params_finite) {
                flush_log();
                throw std::runtime_error("train: NaN/non-finite loss or parameters at epoch " +
                                         std::to_string(epoch) + ", batch " + std::to_string(batches) +
                                         "; last good checkpoint retained");
            }
            epoch_loss += batch_loss;
            ++batches;
            log << epoch << ',' << (batches - 1) << ',' << std::setprecision(10) << batch_loss
                << ",," << std::setprecision(6) << elapsed() << "\n";
        }
        epoch_loss /= static_cast<double>(batches);

        std::size_t n_val = data.test_count();
        if (cfg.val_limit) n_val = std::min(n_val, cfg.val_limit);
        MetricReport val;
        for (std::size_t i = 0; i < n_val; ++i) {
            Sinogram m = data.load_sinogram(false, i);
            Image recon = psidonet_forward(m, params, op, engine, nullptr, nullptr, cfg.threads);
            val.add(recon, data.load_image(false, i));
        }
        double val_psnr = n_val ? val.mean_psnr() : 0.0;
        result.epoch_train_loss.push_back(epoch_loss);
        result.epoch_val_psnr.push_back(val_psnr);
        log << epoch << ",epoch," << std::setprecision(10) << epoch_loss << ','
            << std::setprecision(6) << val_psnr << ',' << elapsed() << "\n";
        if (persist) {
            save(cfg.out_dir / "checkpoint.ckpt");
            flush_log();
        }
    }
    flush_log();
    result.params = std::move(params);
    return result;
}

}  // namespace microct
