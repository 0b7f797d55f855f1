// Command-line surface for the tomography toolkit: dataset generation,
// training, reconstruction, evaluation, and microlocal diagnostics.
//
// Exit codes: 0 success, 2 invalid arguments, 3 data/checkpoint integrity.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include <microct/microct.hpp>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace microct;

namespace {

unsigned default_threads() {
    if (const char* env = std::getenv("MICROCT_THREADS")) {
        int v = std::atoi(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return 1;
}

// Flags override the optional JSON config file: values not given on the
// command line are pulled from the file when present.
struct ConfigFile {
    json data = json::object();

    void load(const std::string& path) {
        if (path.empty()) return;
        data = json::parse(read_text(path), nullptr, false);
        if (data.is_discarded() || !data.is_object())
            throw std::invalid_argument("config file is not a JSON object: " + path);
        // a run_config.json written by a previous run works directly
        if (data.contains("resolved") && data.at("resolved").is_object())
            data = data.at("resolved");
    }

    template <typename T>
    void fall_back(const CLI::App* cmd, const std::string& flag, const std::string& key, T& var) const {
        if (cmd->count(flag) == 0 && data.contains(key)) var = data.at(key).get<T>();
    }
};

ScanGeometry parse_geometry(const std::string& spec, std::size_t size, std::size_t angles) {
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("geometry must be limited:<deg-half-width> or sparse:<count>");
    std::string kind = spec.substr(0, colon);
    std::string arg = spec.substr(colon + 1);
    if (kind == "limited") {
        double deg = std::stod(arg);
        if (!(deg > 0.0 && deg < 90.0))
            throw std::invalid_argument("limited half-width must be in (0, 90) degrees");
        return make_limited_geometry(size, deg * kPi / 180.0, angles);
    }
    if (kind == "sparse") {
        int n = std::stoi(arg);
        if (n < 1) throw std::invalid_argument("sparse angle count must be >= 1");
        return make_sparse_geometry(size, static_cast<std::size_t>(n));
    }
    throw std::invalid_argument("unknown geometry kind '" + kind + "'");
}

void write_resolved_config(const fs::path& dir, const std::string& command, const json& resolved) {
    json j;
    j["command"] = command;
    j["resolved"] = resolved;
    fs::create_directories(dir);
    write_text(dir / "run_config.json", j.dump(2) + "\n");
}

// --- gen-data ---

struct GenDataArgs {
    std::string out;
    std::size_t train = 100, test = 10, size = 64, angles = 60;
    std::string geometry = "limited:60";
    double noise = 0.01;
    std::uint64_t seed = 0;
    bool force = false;
    unsigned threads = default_threads();
    std::string config;
};

int cmd_gen_data(const GenDataArgs& a) {
    fs::path out(a.out);
    if (fs::exists(out) && !fs::is_empty(out)) {
        if (!a.force) throw std::invalid_argument("output exists and is not empty (use --force): " + a.out);
        fs::remove_all(out);
    }
    ScanGeometry g = parse_geometry(a.geometry, a.size, a.angles);
    write_dataset(out, g, a.train, a.test, a.noise, a.seed, {}, a.threads);
    json resolved{{"out", a.out},       {"train", a.train}, {"test", a.test},
                  {"size", a.size},     {"angles", g.angles_measured.size()},
                  {"geometry", a.geometry}, {"noise", a.noise}, {"seed", a.seed},
                  {"threads", a.threads}};
    write_resolved_config(out, "gen-data", resolved);
    std::cout << "wrote dataset: " << a.train << " train + " << a.test << " test samples at "
              << a.size << "x" << a.size << "\n";
    return 0;
}

// --- train ---

struct TrainArgs {
    std::string data, out;
    std::size_t blocks = 10, filter_size = 17, q = 0, epochs = 15, batch = 25, levels = 0,
                val_limit = 0;
    std::string mask = "full";
    double lr = 1e-3, lambda0 = 2e-3;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
    std::string config;
};

int cmd_train(const TrainArgs& a) {
    Dataset data = read_dataset(a.data);
    TrainConfig cfg;
    cfg.blocks = a.blocks;
    cfg.epochs = a.epochs;
    cfg.batch = a.batch;
    cfg.lr = a.lr;
    cfg.lambda0 = a.lambda0;
    cfg.seed = a.seed;
    cfg.mask_kind = mask_kind_from_name(a.mask);
    cfg.mask_q = a.q;
    cfg.patch_size = a.filter_size;
    cfg.levels = a.levels;
    cfg.threads = a.threads;
    cfg.val_limit = a.val_limit;
    cfg.out_dir = a.out;
    // surface mask/geometry incompatibility before any training work
    build_mask(cfg.mask_kind, data.manifest().geometry.angle_set, cfg.patch_size, cfg.mask_q);

    json resolved{{"data", a.data},   {"out", a.out},       {"blocks", a.blocks},
                  {"filter_size", a.filter_size}, {"mask", a.mask}, {"q", a.q},
                  {"epochs", a.epochs}, {"batch", a.batch},  {"lr", a.lr},
                  {"lambda0", a.lambda0}, {"seed", a.seed},  {"levels", cfg.levels},
                  {"val_limit", a.val_limit}, {"threads", a.threads}};
    write_resolved_config(a.out, "train", resolved);

    TrainResult res = train(data, cfg);
    std::cout << "trained " << a.epochs << " epochs; final val PSNR "
              << (res.epoch_val_psnr.empty() ? 0.0 : res.epoch_val_psnr.back()) << " dB\n";
    return 0;
}

// --- reconstruct ---

struct ReconstructArgs {
    std::string data, out, checkpoint;
    std::string split = "test";
    std::size_t limit = 0;
    bool use_fbp = false, use_ista = false, hann = false;
    double lambda = 1e-3;
    std::size_t iters = 100;
    unsigned threads = default_threads();
    std::string config;
};

int cmd_reconstruct(const ReconstructArgs& a) {
    Dataset data = read_dataset(a.data);
    const DatasetManifest& man = data.manifest();
    bool train_split = a.split == "train";
    if (!train_split && a.split != "test")
        throw std::invalid_argument("--split must be train or test");
    std::size_t count = train_split ? data.train_count() : data.test_count();
    if (a.limit) count = std::min(count, a.limit);

    int methods = int(a.use_fbp) + int(a.use_ista) + int(!a.checkpoint.empty());
    if (methods != 1)
        throw std::invalid_argument("choose exactly one of --checkpoint, --fbp, --ista");

    Projector proj(man.geometry, a.threads);
    fs::path out(a.out);
    fs::create_directories(out);

    NetworkParams params;
    std::unique_ptr<CorrectionEngine> engine;
    std::unique_ptr<UnrolledOperator> op;
    if (!a.checkpoint.empty()) {
        params = load_checkpoint(a.checkpoint);
        if (geometry_hash(params.geometry) != geometry_hash(man.geometry))
            throw IntegrityError("checkpoint geometry does not match the dataset");
        engine = std::make_unique<CorrectionEngine>(params.mask, man.geometry.image_size, params.levels);
        op = std::make_unique<UnrolledOperator>(proj, params.operator_scale, params.levels);
    } else if (a.use_ista) {
        op = std::make_unique<UnrolledOperator>(proj, man.operator_scale,
                                                default_levels(man.geometry.image_size));
    }

    for (std::size_t i = 0; i < count; ++i) {
        Sinogram m = data.load_sinogram(train_split, i);
        Image recon;
        if (a.use_fbp) {
            // FBP runs on the unnormalized sinogram
            Sinogram raw = m;
            for (auto& x : raw.data) x /= man.operator_scale;
            recon = fbp(raw, proj, a.hann, a.threads);
        } else if (a.use_ista) {
            IstaConfig cfg{a.lambda, 1.0, a.iters};
            recon = ista_solve(m, *op, cfg, nullptr, a.threads);
        } else {
            recon = psidonet_forward(m, params, *op, *engine, nullptr, nullptr, a.threads);
        }
        const std::string& name = data.name(train_split, i);
        write_f32(out / (name + ".f32"), recon.data);
        write_image_png(out / (name + ".png"), recon);
    }

    json resolved{{"data", a.data},     {"out", a.out},   {"checkpoint", a.checkpoint},
                  {"split", a.split},   {"limit", a.limit}, {"fbp", a.use_fbp},
                  {"ista", a.use_ista}, {"lambda", a.lambda}, {"iters", a.iters},
                  {"hann", a.hann},     {"threads", a.threads}};
    write_resolved_config(out, "reconstruct", resolved);
    std::cout << "reconstructed " << count << " samples into " << a.out << "\n";
    return 0;
}

// --- eval ---

struct EvalArgs {
    std::string data, recon, out;
    std::string split = "test";
    unsigned threads = default_threads();
    std::string config;
};

int cmd_eval(const EvalArgs& a) {
    Dataset data = read_dataset(a.data);
    bool train_split = a.split == "train";
    if (!train_split && a.split != "test")
        throw std::invalid_argument("--split must be train or test");
    std::size_t count = train_split ? data.train_count() : data.test_count();
    fs::path recon_dir(a.recon);
    fs::path out = a.out.empty() ? recon_dir / "metrics.csv" : fs::path(a.out);

    MetricReport report;
    std::ostringstream csv;
    csv << "sample,psnr,ssim\n";
    std::size_t evaluated = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const std::string& name = data.name(train_split, i);
        fs::path f = recon_dir / (name + ".f32");
        if (!fs::exists(f)) continue;
        Image ref = data.load_image(train_split, i);
        Image rec(ref.side, ref.extent);
        rec.data = read_f32(f, ref.side * ref.side);
        report.add(rec, ref);
        csv << name << ',' << std::setprecision(10) << report.psnr_values.back() << ','
            << report.ssim_values.back() << "\n";
        ++evaluated;
    }
    if (evaluated == 0) throw CorruptDataset("no reconstructions found in " + a.recon);
    csv << "mean," << std::setprecision(10) << report.mean_psnr() << ',' << report.mean_ssim()
        << "\n";
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_text(out, csv.str());
    json resolved{{"data", a.data}, {"recon", a.recon}, {"out", out.string()}, {"split", a.split}};
    write_text(fs::path(out).concat(".config.json"),
               json{{"command", "eval"}, {"resolved", resolved}}.dump(2) + "\n");
    std::cout << "mean PSNR " << report.mean_psnr() << " dB, mean SSIM " << report.mean_ssim()
              << " over " << evaluated << " samples\n";
    return 0;
}

// --- predict-artifacts ---

struct PredictArgs {
    std::string data, out;
    std::string split = "test";
    std::size_t index = 0;
    double threshold = 0.1;
    double tol_deg = -1.0;  // <0: one angular step of the geometry
    bool use_raster = false;
    unsigned threads = default_threads();
    std::string config;
};

int cmd_predict_artifacts(const PredictArgs& a) {
    Dataset data = read_dataset(a.data);
    bool train_split = a.split == "train";
    const ScanGeometry& g = data.manifest().geometry;
    Image u = data.load_image(train_split, a.index);

    std::vector<EdgePoint> edges;
    if (a.use_raster) {
        edges = extract_edges(u, a.threshold);
    } else {
        for (const EllipseSpec& e : data.load_specs(train_split, a.index)) {
            auto pts = ellipse_edge_points(e, 512);
            edges.insert(edges.end(), pts.begin(), pts.end());
        }
    }
    double tol = a.tol_deg >= 0.0 ? a.tol_deg * kPi / 180.0 : g.angular_step();
    auto streaks = predict_streaks(edges, g.angle_set, tol);

    // overlay: base image dimmed, visible edges solid, invisible dashed,
    // streak lines drawn across the frame
    Image overlay = u;
    auto [lo, hi] = std::minmax_element(u.data.begin(), u.data.end());
    double span = (*hi > *lo) ? (*hi - *lo) : 1.0;
    for (auto& x : overlay.data) x = 0.6 * (x - *lo) / span;
    const double half = (static_cast<double>(u.side) - 1.0) / 2.0;
    auto plot = [&](double x, double y, double value) {
        long j = std::lround(x / u.pixel_pitch() + half);
        long i = std::lround(half - y / u.pixel_pitch());
        if (i < 0 || j < 0 || i >= static_cast<long>(u.side) || j >= static_cast<long>(u.side)) return;
        overlay.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = value;
    };
    for (const StreakLine& s : streaks) {
        double wx = std::cos(s.omega), wy = std::sin(s.omega);
        double ext = u.extent;
        for (double t = -ext; t <= ext; t += u.pixel_pitch() / 2.0) {
            // dashed streak line: 6 px on, 4 px off
            if (std::fmod(std::abs(t), 10.0 * u.pixel_pitch()) > 6.0 * u.pixel_pitch()) continue;
            plot(s.offset * wx - t * wy, s.offset * wy + t * wx, 0.85);
        }
    }
    std::size_t n_visible = 0, n_invisible = 0, n_boundary = 0;
    for (std::size_t k = 0; k < edges.size(); ++k) {
        Visibility v = classify_visibility(edges[k], g.angle_set, tol);
        if (v == Visibility::Visible) {
            ++n_visible;
            plot(edges[k].x, edges[k].y, 1.0);
        } else if (v == Visibility::Boundary) {
            ++n_boundary;
            plot(edges[k].x, edges[k].y, 1.0);
        } else {
            ++n_invisible;
            if (k % 8 < 4) plot(edges[k].x, edges[k].y, 1.0);  // dashed
        }
    }

    fs::path out(a.out);
    fs::create_directories(out);
    write_png16(out / "overlay.png", overlay.data, overlay.side, overlay.side);
    json report;
    report["edges"] = {{"visible", n_visible}, {"invisible", n_invisible}, {"boundary", n_boundary}};
    report["streaks"] = json::array();
    std::vector<double> directions;
    for (const StreakLine& s : streaks) {
        report["streaks"].push_back({{"omega", s.omega}, {"offset", s.offset}});
        bool seen = false;
        for (double d : directions) seen = seen || std::abs(d - s.omega) < 1e-9;
        if (!seen) directions.push_back(s.omega);
    }
    report["streak_directions"] = directions;
    write_text(out / "streaks.json", report.dump(2) + "\n");
    json resolved{{"data", a.data},   {"out", a.out},       {"split", a.split},
                  {"index", a.index}, {"threshold", a.threshold}, {"tol_deg", a.tol_deg},
                  {"use_raster", a.use_raster}};
    write_resolved_config(out, "predict-artifacts", resolved);
    std::cout << "edges: " << n_visible << " visible, " << n_invisible << " invisible, "
              << n_boundary << " boundary; " << streaks.size() << " streak lines in "
              << directions.size() << " directions\n";
    return 0;
}

// --- dump-filters ---

struct DumpFiltersArgs {
    std::string data, geometry, out;
    std::size_t size = 64, angles = 60, levels = 0, patch = 15;
    unsigned threads = default_threads();
    std::string config;
};

int cmd_dump_filters(const DumpFiltersArgs& a) {
    ScanGeometry g;
    if (!a.data.empty())
        g = read_dataset(a.data).manifest().geometry;
    else if (!a.geometry.empty())
        g = parse_geometry(a.geometry, a.size, a.angles);
    else
        throw std::invalid_argument("dump-filters needs --data or --geometry");
    std::size_t levels = a.levels ? a.levels : default_levels(g.image_size);

    Projector proj(g, a.threads);
    KernelAtlas atlas = estimate_kernel_atlas(proj, levels, a.patch, a.threads);
    const std::size_t q = atlas.num_subbands, p = atlas.patch_size;

    // tiled PNG: q x q tiles with 1-px separators, global normalization
    const std::size_t tile = p + 1, wside = q * tile + 1;
    std::vector<double> sheet(wside * wside, 0.0);
    double vmax = 0.0;
    for (const auto& patch : atlas.filters)
        for (double v : patch) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) vmax = 1.0;
    for (std::size_t ti = 0; ti < q; ++ti)
        for (std::size_t tj = 0; tj < q; ++tj) {
            const auto& patch = atlas.patch(ti, tj);
            for (std::size_t i = 0; i < p; ++i)
                for (std::size_t j = 0; j < p; ++j)
                    sheet[(ti * tile + 1 + i) * wside + (tj * tile + 1 + j)] =
                        0.5 + 0.5 * patch[i * p + j] / vmax;
        }
    fs::path out(a.out);
    fs::create_directories(out);
    write_png16(out / "atlas.png", sheet, wside, wside);

    std::vector<double> flat;
    flat.reserve(q * q * p * p);
    for (const auto& patch : atlas.filters) flat.insert(flat.end(), patch.begin(), patch.end());
    write_f32(out / "atlas.f32", flat);
    json meta{{"subbands", q}, {"patch", p}, {"levels", levels}, {"geometry", to_json(g)},
              {"order", "target-major (iota, iota'), row-major patches"}};
    write_text(out / "atlas.json", meta.dump(2) + "\n");
    json resolved{{"data", a.data}, {"geometry", a.geometry}, {"size", a.size},
                  {"angles", a.angles}, {"levels", levels}, {"patch", a.patch},
                  {"out", a.out}, {"threads", a.threads}};
    write_resolved_config(out, "dump-filters", resolved);
    std::cout << "kernel atlas: " << q << "x" << q << " patches of " << p << "x" << p << "\n";
    return 0;
}

// --- dump-mask ---

struct DumpMaskArgs {
    std::string kind = "bow", geometry = "limited:60", out;
    std::size_t size = 64, angles = 60, filter_size = 33, q = 1;
    std::string config;
};

int cmd_dump_mask(const DumpMaskArgs& a) {
    ScanGeometry g = parse_geometry(a.geometry, a.size, a.angles);
    FilterMask m = build_mask(mask_kind_from_name(a.kind), g.angle_set, a.filter_size, a.q);
    fs::path out(a.out);
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    write_mask_pbm(out, m);
    std::cout << "mask " << a.kind << " q=" << a.q << ": " << m.active_count << "/"
              << (a.filter_size * a.filter_size) << " active cells\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"microct: limited- and sparse-angle CT reconstruction with unrolled"
                 " wavelet-domain networks and microlocal diagnostics"};
    app.require_subcommand(1);

    GenDataArgs gd;
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic ellipse dataset");
    gen->add_option("--out", gd.out, "output directory")->required();
    gen->add_option("--train", gd.train, "training sample count");
    gen->add_option("--test", gd.test, "test sample count");
    gen->add_option("--size", gd.size, "image side in pixels");
    gen->add_option("--geometry", gd.geometry, "limited:<deg-half-width> or sparse:<count>");
    gen->add_option("--angles", gd.angles, "measured angle count (limited geometry)");
    gen->add_option("--noise", gd.noise, "relative Gaussian noise level");
    gen->add_option("--seed", gd.seed, "master seed");
    gen->add_flag("--force", gd.force, "overwrite an existing non-empty output");
    gen->add_option("--threads", gd.threads, "worker cap (default $MICROCT_THREADS or 1)");
    gen->add_option("--config", gd.config, "JSON config file (flags override)");

    TrainArgs tr;
    auto* trn = app.add_subcommand("train", "train the unrolled network");
    trn->add_option("--data", tr.data, "dataset directory")->required();
    trn->add_option("--out", tr.out, "output directory")->required();
    trn->add_option("--blocks", tr.blocks, "unrolled block count");
    trn->add_option("--filter-size", tr.filter_size, "filter patch side (odd)");
    trn->add_option("--mask", tr.mask, "full | bow | x | sparse");
    trn->add_option("--q", tr.q, "stripe half-width in pixels");
    trn->add_option("--epochs", tr.epochs, "training epochs");
    trn->add_option("--batch", tr.batch, "batch size");
    trn->add_option("--lr", tr.lr, "Adam learning rate");
    trn->add_option("--lambda0", tr.lambda0, "initial threshold weight");
    trn->add_option("--seed", tr.seed, "training seed");
    trn->add_option("--levels", tr.levels, "wavelet levels (0 = auto)");
    trn->add_option("--val-limit", tr.val_limit, "validation sample cap (0 = all)");
    trn->add_option("--threads", tr.threads, "worker cap");
    trn->add_option("--config", tr.config, "JSON config file (flags override)");

    ReconstructArgs rc;
    auto* rec = app.add_subcommand("reconstruct", "reconstruct dataset samples");
    rec->add_option("--data", rc.data, "dataset directory")->required();
    rec->add_option("--out", rc.out, "output directory")->required();
    rec->add_option("--checkpoint", rc.checkpoint, "trained network checkpoint");
    rec->add_option("--split", rc.split, "train | test");
    rec->add_option("--limit", rc.limit, "sample cap (0 = all)");
    rec->add_flag("--fbp", rc.use_fbp, "filtered backprojection baseline");
    rec->add_flag("--hann", rc.hann, "apodize the ramp filter (with --fbp)");
    rec->add_flag("--ista", rc.use_ista, "plain ISTA baseline");
    rec->add_option("--lambda", rc.lambda, "ISTA regularization weight");
    rec->add_option("--iters", rc.iters, "ISTA iterations");
    rec->add_option("--threads", rc.threads, "worker cap");
    rec->add_option("--config", rc.config, "JSON config file (flags override)");

    EvalArgs ev;
    auto* evl = app.add_subcommand("eval", "PSNR/SSIM against ground truth");
    evl->add_option("--data", ev.data, "dataset directory")->required();
    evl->add_option("--recon", ev.recon, "reconstruction directory")->required();
    evl->add_option("--out", ev.out, "CSV path (default <recon>/metrics.csv)");
    evl->add_option("--split", ev.split, "train | test");
    evl->add_option("--config", ev.config, "JSON config file (flags override)");

    PredictArgs pa;
    auto* pred = app.add_subcommand("predict-artifacts",
                                    "visibility classification and streak prediction overlay");
    pred->add_option("--data", pa.data, "dataset directory")->required();
    pred->add_option("--out", pa.out, "output directory")->required();
    pred->add_option("--split", pa.split, "train | test");
    pred->add_option("--index", pa.index, "sample index");
    pred->add_option("--threshold", pa.threshold, "edge gradient threshold (--use-raster)");
    pred->add_option("--tol-deg", pa.tol_deg, "streak angle tolerance in degrees (<0: one angular step)");
    pred->add_flag("--use-raster", pa.use_raster, "extract edges from the raster instead of specs");
    pred->add_option("--threads", pa.threads, "worker cap");
    pred->add_option("--config", pa.config, "JSON config file (flags override)");

    DumpFiltersArgs df;
    auto* dump = app.add_subcommand("dump-filters", "estimate and dump the wavelet-domain kernel atlas");
    dump->add_option("--data", df.data, "dataset directory (geometry source)");
    dump->add_option("--geometry", df.geometry, "geometry spec when no dataset is given");
    dump->add_option("--size", df.size, "image side for --geometry");
    dump->add_option("--angles", df.angles, "angle count for --geometry");
    dump->add_option("--levels", df.levels, "wavelet levels (0 = auto)");
    dump->add_option("--patch", df.patch, "atlas patch side (odd, <= coarsest subband side)");
    dump->add_option("--out", df.out, "output directory")->required();
    dump->add_option("--threads", df.threads, "worker cap");
    dump->add_option("--config", df.config, "JSON config file (flags override)");

    DumpMaskArgs dm;
    auto* mask = app.add_subcommand("dump-mask", "rasterize a filter mask to PBM");
    mask->add_option("--kind", dm.kind, "full | bow | x | sparse");
    mask->add_option("--geometry", dm.geometry, "geometry spec");
    mask->add_option("--size", dm.size, "image side for the geometry");
    mask->add_option("--angles", dm.angles, "angle count for the geometry");
    mask->add_option("--filter-size", dm.filter_size, "mask side (odd)");
    mask->add_option("--q", dm.q, "stripe half-width");
    mask->add_option("--out", dm.out, "output PBM path")->required();
    mask->add_option("--config", dm.config, "JSON config file (flags override)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        ConfigFile cf;
        if (gen->parsed()) {
            cf.load(gd.config);
            cf.fall_back(gen, "--train", "train", gd.train);
            cf.fall_back(gen, "--test", "test", gd.test);
            cf.fall_back(gen, "--size", "size", gd.size);
            cf.fall_back(gen, "--geometry", "geometry", gd.geometry);
            cf.fall_back(gen, "--angles", "angles", gd.angles);
            cf.fall_back(gen, "--noise", "noise", gd.noise);
            cf.fall_back(gen, "--seed", "seed", gd.seed);
            cf.fall_back(gen, "--threads", "threads", gd.threads);
            return cmd_gen_data(gd);
        }
        if (trn->parsed()) {
            cf.load(tr.config);
            cf.fall_back(trn, "--blocks", "blocks", tr.blocks);
            cf.fall_back(trn, "--filter-size", "filter_size", tr.filter_size);
            cf.fall_back(trn, "--mask", "mask", tr.mask);
            cf.fall_back(trn, "--q", "q", tr.q);
            cf.fall_back(trn, "--epochs", "epochs", tr.epochs);
            cf.fall_back(trn, "--batch", "batch", tr.batch);
            cf.fall_back(trn, "--lr", "lr", tr.lr);
            cf.fall_back(trn, "--lambda0", "lambda0", tr.lambda0);
            cf.fall_back(trn, "--seed", "seed", tr.seed);
            cf.fall_back(trn, "--levels", "levels", tr.levels);
            cf.fall_back(trn, "--val-limit", "val_limit", tr.val_limit);
            cf.fall_back(trn, "--threads", "threads", tr.threads);
            return cmd_train(tr);
        }
        if (rec->parsed()) {
            cf.load(rc.config);
            cf.fall_back(rec, "--checkpoint", "checkpoint", rc.checkpoint);
            cf.fall_back(rec, "--split", "split", rc.split);
            cf.fall_back(rec, "--limit", "limit", rc.limit);
            cf.fall_back(rec, "--lambda", "lambda", rc.lambda);
            cf.fall_back(rec, "--iters", "iters", rc.iters);
            cf.fall_back(rec, "--fbp", "fbp", rc.use_fbp);
            cf.fall_back(rec, "--ista", "ista", rc.use_ista);
            cf.fall_back(rec, "--hann", "hann", rc.hann);
            cf.fall_back(rec, "--threads", "threads", rc.threads);
            return cmd_reconstruct(rc);
        }
        if (evl->parsed()) {
            cf.load(ev.config);
            cf.fall_back(evl, "--split", "split", ev.split);
            cf.fall_back(evl, "--out", "out", ev.out);
            return cmd_eval(ev);
        }
        if (pred->parsed()) {
            cf.load(pa.config);
            cf.fall_back(pred, "--split", "split", pa.split);
            cf.fall_back(pred, "--index", "index", pa.index);
            cf.fall_back(pred, "--threshold", "threshold", pa.threshold);
            cf.fall_back(pred, "--tol-deg", "tol_deg", pa.tol_deg);
            cf.fall_back(pred, "--use-raster", "use_raster", pa.use_raster);
            return cmd_predict_artifacts(pa);
        }
        if (dump->parsed()) {
            cf.load(df.config);
            cf.fall_back(dump, "--levels", "levels", df.levels);
            cf.fall_back(dump, "--patch", "patch", df.patch);
            cf.fall_back(dump, "--size", "size", df.size);
            cf.fall_back(dump, "--angles", "angles", df.angles);
            cf.fall_back(dump, "--geometry", "geometry", df.geometry);
            return cmd_dump_filters(df);
        }
        if (mask->parsed()) {
            cf.load(dm.config);
            return cmd_dump_mask(dm);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IntegrityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
