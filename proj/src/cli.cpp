#include "f4d/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <limits>

#include <CLI11.hpp>

#include "f4d/evalkit.hpp"
#include "f4d/io.hpp"
#include "f4d/mrsim.hpp"
#include "f4d/phantom.hpp"
#include "f4d/trainer.hpp"

namespace fs = std::filesystem;

namespace f4d::cli {

namespace {

io::Config load_config(const std::string& path) {
    if (path.empty()) return io::Config::parse_string("", "<defaults>");
    return io::Config::parse_file(path);
}

fs::path ensure_out_dir(const std::string& out) {
    if (out.empty()) throw UsageError("missing --out directory");
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

Axis axis_from_string(const std::string& s) {
    if (s == "x") return Axis::X;
    if (s == "y") return Axis::Y;
    if (s == "z") return Axis::Z;
    throw ValidationError("tube_axis must be one of x, y, z");
}

PhantomSpec phantom_spec_from(const io::Config& cfg) {
    PhantomSpec spec;
    spec.dims = {cfg.get_int("nx", 32), cfg.get_int("ny", 32), cfg.get_int("nz", 32)};
    spec.spacing_mm = cfg.get_double("spacing", 0.5);
    spec.dt_ms = cfg.get_double("dt", 10.0);
    spec.tube_radius_mm = cfg.get_double("tube_radius", 5.0);
    spec.tube_axis = axis_from_string(cfg.get_str("tube_axis", "z"));
    spec.offset_a_mm = cfg.get_double("offset_a", 0.0);
    spec.offset_b_mm = cfg.get_double("offset_b", 0.0);
    spec.v_peak = cfg.get_double("v_peak", 1.5);
    if (cfg.has("waveform"))
        spec.waveform = cfg.get_list("waveform");
    else
        spec.waveform = {0.2, 0.45, 0.8, 1.0, 0.85, 0.6, 0.4, 0.25};
    spec.nt = cfg.get_int("nt", static_cast<int>(spec.waveform.size()));
    spec.m_vessel = cfg.get_double("m_vessel", 100.0);
    spec.m_background = cfg.get_double("m_background", 20.0);
    return spec;
}

AcquisitionConfig acquisition_from(const io::Config& cfg) {
    AcquisitionConfig ac;
    ac.venc_low = cfg.get_double("venc_low", 0.5);
    ac.tsnr_high = {cfg.get_double("tsnr_high_min", 8.0),
                    cfg.get_double("tsnr_high_max", 12.0)};
    ac.tsnr_low = {cfg.get_double("tsnr_low_min", 2.0),
                   cfg.get_double("tsnr_low_max", 6.0)};
    ac.tsnr_highvenc = cfg.get_double("tsnr_highvenc", 15.0);
    ac.magnitude_floor = cfg.get_double("magnitude_floor", 30.0);
    ac.seed = cfg.get_u64("seed", 0);
    ac.noise_free = cfg.get_bool("noise_free", false);
    return ac;
}

train::TrainConfig train_config_from(const io::Config& cfg) {
    train::TrainConfig tc;
    tc.epochs_stage1 = cfg.get_int("epochs_stage1", 20);
    tc.epochs_stage2 = cfg.get_int("epochs_stage2", 20);
    tc.batch_size = cfg.get_int("batch_size", 8);
    tc.lr = cfg.get_double("lr", 1e-4);
    tc.seed = cfg.get_u64("seed", 0);
    tc.disc_only = cfg.get_bool("disc_only", false);
    tc.loss.variant = loss::variant_from_name(cfg.get_str("variant", "wasserstein"));
    tc.loss.lambda_g = cfg.get_double("lambda_g", 1e-3);
    tc.loss.mu_g = cfg.get_double("mu_g", 5e-7);
    tc.loss.mu_d = cfg.get_double("mu_d", 5e-5);
    tc.loss.lambda_gp = cfg.get_double("lambda_gp", 10.0);
    tc.gen.width = cfg.get_int("width", 16);
    tc.gen.growth = cfg.get_int("growth", 8);
    tc.gen.n_rrdb = cfg.get_int("n_rrdb", 2);
    tc.gen.n_hr_blocks = cfg.get_int("n_hr_blocks", 1);
    tc.disc.width = cfg.get_int("disc_width", 16);
    tc.disc.n_down_blocks = cfg.get_int("disc_blocks", 2);
    tc.disc.hidden = cfg.get_int("disc_hidden", 64);
    return tc;
}

net::GeneratorSpec generator_spec_from(const io::Config& cfg) {
    net::GeneratorSpec gs;
    gs.width = cfg.get_int("width", 16);
    gs.growth = cfg.get_int("growth", 8);
    gs.n_rrdb = cfg.get_int("n_rrdb", 2);
    gs.n_hr_blocks = cfg.get_int("n_hr_blocks", 1);
    return gs;
}

std::string stratum_name(SnrStratum s) {
    switch (s) {
    case SnrStratum::High: return "high";
    case SnrStratum::Low: return "low";
    default: return "noise_free";
    }
}

std::string snr_log_csv(const std::vector<SnrLogEntry>& log) {
    std::string csv = "timestep,stratum,tsnr\n";
    for (const SnrLogEntry& e : log)
        csv += std::to_string(e.timestep) + "," + stratum_name(e.stratum) + "," +
               io::fmt_g17(e.tsnr) + "\n";
    return csv;
}

std::vector<SnrLogEntry> parse_snr_log_csv(const fs::path& path) {
    const std::string text = io::read_text_file(path);
    std::vector<SnrLogEntry> out;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        const std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (line_no == 1 || line.empty()) continue; // header
        const std::size_t c1 = line.find(',');
        const std::size_t c2 = line.find(',', c1 + 1);
        if (c1 == std::string::npos || c2 == std::string::npos)
            throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                                  ": expected timestep,stratum,tsnr");
        SnrLogEntry e;
        e.timestep = std::stoi(line.substr(0, c1));
        const std::string strat = line.substr(c1 + 1, c2 - c1 - 1);
        if (strat == "high") e.stratum = SnrStratum::High;
        else if (strat == "low") e.stratum = SnrStratum::Low;
        else e.stratum = SnrStratum::NoiseFree;
        e.tsnr = std::stod(line.substr(c2 + 1));
        out.push_back(e);
    }
    return out;
}

// --------------------------------------------------------------------------

void cmd_phantom(const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const PhantomSpec spec = phantom_spec_from(cfg);
    const PhantomVolumes vols = make_phantom(spec);

    io::write_velocity(dir / "hr_velocity.f4d", vols.velocity);
    io::write_magnitude(dir / "magnitude.f4d", vols.magnitude, spec.spacing_mm);
    io::write_mask(dir / "mask.f4d", vols.mask, spec.spacing_mm);
    io::write_manifest(dir, "phantom", cfg,
                       {{"out_velocity", (dir / "hr_velocity.f4d").string()},
                        {"out_magnitude", (dir / "magnitude.f4d").string()},
                        {"out_mask", (dir / "mask.f4d").string()},
                        {"peak_systole_index",
                         std::to_string(peak_systole_index(spec))}});
}

void cmd_synth(const std::string& hr, const std::string& mag, const std::string& mask,
               const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const VelocityVolume v = io::read_velocity(hr);
    const MagnitudeVolume m = io::read_magnitude(mag);
    const FluidMask fm = io::read_mask(mask);
    const AcquisitionConfig ac = acquisition_from(cfg);

    const SynthesisResult res = synthesize(v, m, fm, ac);
    io::write_velocity(dir / "lr_velocity.f4d", res.lr);
    io::write_text_file(dir / "snr_log.csv", snr_log_csv(res.snr_log));
    io::write_manifest(dir, "synth", cfg,
                       {{"in_hr", hr},
                        {"in_magnitude", mag},
                        {"in_mask", mask},
                        {"out_lr", (dir / "lr_velocity.f4d").string()},
                        {"out_snr_log", (dir / "snr_log.csv").string()}});
}

void cmd_patch(const std::string& hr, const std::string& lr, const std::string& mask,
               const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const VelocityVolume vh = io::read_velocity(hr);
    const VelocityVolume vl = io::read_velocity(lr);
    const FluidMask fm = io::read_mask(mask);

    const int count = cfg.get_int("count", 20);
    const bool do_augment = cfg.get_bool("augment", true);
    const std::uint64_t seed = cfg.get_u64("seed", 0);

    Rng rng(derive_seed(seed, 0x706174)); // stream tag: patch extraction
    std::vector<PatchPair> pairs = extract_pairs(vh, vl, fm, count, rng);
    if (do_augment) {
        std::vector<PatchPair> expanded;
        expanded.reserve(pairs.size() * 10);
        for (const PatchPair& p : pairs)
            for (PatchPair& q : augment(p)) expanded.push_back(std::move(q));
        pairs = std::move(expanded);
    }

    io::PatchSet ps;
    ps.patches = std::move(pairs);
    ps.hr_spacing_mm = vh.spacing_mm;
    ps.dt_ms = vh.dt_ms;
    ps.seed = seed;
    io::write_patches(dir / "patches.f4d", ps);
    io::write_manifest(dir, "patch", cfg,
                       {{"in_hr", hr},
                        {"in_lr", lr},
                        {"in_mask", mask},
                        {"out_patches", (dir / "patches.f4d").string()},
                        {"n_patches", std::to_string(ps.patches.size())}});
}

void cmd_train(const std::string& train_path, const std::string& val_path,
               const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const train::TrainConfig tc = train_config_from(cfg);

    train::Dataset data;
    data.train = io::read_patches(train_path).patches;
    if (!val_path.empty()) data.val = io::read_patches(val_path).patches;

    const train::StageResult s1 = train::train_stage1(tc, data);
    io::save_checkpoint(dir / "gen_stage1.f4dw", s1.gen);

    std::string csv = train::train_log_header();
    for (const train::EpochRecord& rec : s1.log)
        train::append_epoch_rows(csv, rec, tc.loss.variant);

    std::vector<std::pair<std::string, std::string>> outputs = {
        {"in_train", train_path},
        {"in_val", val_path},
        {"out_gen_stage1", (dir / "gen_stage1.f4dw").string()}};

    if (tc.epochs_stage2 > 0) {
        const train::StageResult s2 =
            train::train_stage2(tc, data, s1.gen, &s1.gen_adam);
        io::save_checkpoint(dir / "gen_stage2.f4dw", s2.gen);
        io::save_checkpoint(dir / "disc_stage2.f4dw", s2.disc);
        for (const train::EpochRecord& rec : s2.log)
            train::append_epoch_rows(csv, rec, tc.loss.variant);
        outputs.emplace_back("out_gen_stage2", (dir / "gen_stage2.f4dw").string());
        outputs.emplace_back("out_disc_stage2", (dir / "disc_stage2.f4dw").string());
    }

    io::write_text_file(dir / "train_log.csv", csv);
    outputs.emplace_back("out_train_log", (dir / "train_log.csv").string());
    io::write_manifest(dir, "train", cfg, outputs);
}

// Tiled inference over one volume. With identity=true the network is
// replaced by plain trilinear upsampling of each tile (tiling oracle).
VelocityVolume run_inference(const VelocityVolume& lr, const net::ParamSet* params,
                             const net::GeneratorSpec& spec, bool identity) {
    const TilePlan plan = plan_tiles(lr.dims);
    const Dims3 hd{2 * lr.dims.nx, 2 * lr.dims.ny, 2 * lr.dims.nz};
    VelocityVolume sr = VelocityVolume::zeros(hd, lr.nt, lr.spacing_mm / 2.0, lr.dt_ms);

    const std::size_t lr_vox = static_cast<std::size_t>(kPatchLr) * kPatchLr * kPatchLr;
    for (int t = 0; t < lr.nt; ++t) {
        std::vector<std::vector<float>> tile_outputs(plan.tiles.size());
        for (std::size_t i = 0; i < plan.tiles.size(); ++i) {
            const Tile& tile = plan.tiles[i];
            // gather the LR tile as a {3,12,12,12} tensor
            std::vector<double> x(lr_vox * 3);
            for (int z = 0; z < kPatchLr; ++z)
                for (int y = 0; y < kPatchLr; ++y)
                    for (int xx = 0; xx < kPatchLr; ++xx) {
                        const std::size_t vi =
                            (static_cast<std::size_t>(z) * kPatchLr + y) * kPatchLr + xx;
                        for (int c = 0; c < 3; ++c)
                            x[c * lr_vox + vi] = lr.at(t, tile.lr_origin[2] + z,
                                                       tile.lr_origin[1] + y,
                                                       tile.lr_origin[0] + xx, c);
                    }
            std::vector<double> y;
            if (identity) {
                y.assign(lr_vox * 8 * 3, 0.0);
                kern::up2_fwd(x.data(), 3, {kPatchLr, kPatchLr, kPatchLr}, y.data(),
                              kern::Exec::Par);
            } else {
                ad::Tensor xt({3, kPatchLr, kPatchLr, kPatchLr}, std::move(x));
                y = net::forward_generator(*params, xt, spec).v;
            }
            // back to (z,y,x,c) float storage
            const std::size_t hr_vox =
                static_cast<std::size_t>(kPatchHr) * kPatchHr * kPatchHr;
            std::vector<float> out(hr_vox * 3);
            for (std::size_t vi = 0; vi < hr_vox; ++vi)
                for (int c = 0; c < 3; ++c)
                    out[vi * 3 + c] = static_cast<float>(y[c * hr_vox + vi]);
            tile_outputs[i] = std::move(out);
        }
        const std::vector<float> frame = stitch(plan, tile_outputs);
        std::copy(frame.begin(), frame.end(), sr.frame(t));
    }
    return sr;
}

void cmd_infer(const std::string& lr_path, const std::string& weights,
               const std::string& config, const std::string& out, bool identity) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const VelocityVolume lr = io::read_velocity(lr_path);
    const net::GeneratorSpec spec = generator_spec_from(cfg);

    net::ParamSet params;
    if (!identity) {
        if (weights.empty()) throw UsageError("infer: --weights required");
        params = io::load_checkpoint(weights);
    }
    const VelocityVolume sr = run_inference(lr, identity ? nullptr : &params, spec,
                                            identity);
    io::write_velocity(dir / "sr_velocity.f4d", sr);
    io::write_manifest(dir, "infer", cfg,
                       {{"in_lr", lr_path},
                        {"in_weights", weights},
                        {"identity", identity ? "1" : "0"},
                        {"out_sr", (dir / "sr_velocity.f4d").string()}});
}

int peak_from_velocity(const VelocityVolume& v) {
    int best = 0;
    double best_speed = -1.0;
    for (int t = 0; t < v.nt; ++t) {
        double m = 0.0;
        const float* f = v.frame(t);
        const std::size_t n = v.dims.voxels();
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (int c = 0; c < 3; ++c)
                s += static_cast<double>(f[i * 3 + c]) * f[i * 3 + c];
            m = std::max(m, s);
        }
        if (m > best_speed) {
            best_speed = m;
            best = t;
        }
    }
    return best;
}

void cmd_eval(const std::string& sr_path, const std::string& hr_path,
              const std::string& mask_path, const std::string& snr_path,
              const std::string& config, const std::string& out,
              const std::string& model) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const VelocityVolume sr = io::read_velocity(sr_path);
    const VelocityVolume hr = io::read_velocity(hr_path);
    const FluidMask mask = io::read_mask(mask_path);
    const RegionLabels labels = decompose_regions(mask);

    std::vector<SnrLogEntry> snr_log;
    if (!snr_path.empty()) {
        snr_log = parse_snr_log_csv(snr_path);
    } else {
        for (int t = 0; t < hr.nt; ++t)
            snr_log.push_back({t, SnrStratum::NoiseFree,
                               std::numeric_limits<double>::infinity()});
    }
    const int peak = cfg.has("peak_index") ? cfg.get_int("peak_index")
                                           : peak_from_velocity(hr);

    const eval::MetricsReport report =
        eval::compute_metrics(sr, hr, labels, snr_log, peak);
    io::write_text_file(dir / "metrics.csv", eval::report_csv(report, model));
    io::write_manifest(dir, "eval", cfg,
                       {{"in_sr", sr_path},
                        {"in_hr", hr_path},
                        {"in_mask", mask_path},
                        {"in_snr_log", snr_path},
                        {"model", model},
                        {"peak_index", std::to_string(peak)},
                        {"out_metrics", (dir / "metrics.csv").string()}});
}

void cmd_interp(const std::string& a_path, const std::string& b_path,
                const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const net::ParamSet a = io::load_checkpoint(a_path);
    const net::ParamSet b = io::load_checkpoint(b_path);

    std::vector<double> alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
    if (cfg.has("alphas")) alphas = cfg.get_list("alphas");

    std::vector<std::pair<std::string, std::string>> outputs = {{"in_a", a_path},
                                                                {"in_b", b_path}};
    for (double alpha : alphas) {
        const net::ParamSet mix = net::interpolate_weights(a, b, alpha);
        char name[64];
        std::snprintf(name, sizeof(name), "interp_%g.f4dw", alpha);
        io::save_checkpoint(dir / name, mix);
        outputs.emplace_back("out_checkpoint", (dir / name).string());
    }
    io::write_manifest(dir, "interp", cfg, outputs);
}

void cmd_pca(const std::string& weights, const std::string& patches_path,
             const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const net::ParamSet params = io::load_checkpoint(weights);
    const net::GeneratorSpec spec = generator_spec_from(cfg);
    const io::PatchSet ps = io::read_patches(patches_path);

    const std::string tap_name = cfg.get_str("tap", "middle");
    eval::Tap tap;
    if (tap_name == "middle") tap = eval::Tap::Middle;
    else if (tap_name == "end") tap = eval::Tap::End;
    else throw ValidationError("pca: tap must be 'middle' or 'end'");
    const int count = cfg.get_int("count", 10000);

    Rng rng(derive_seed(cfg.get_u64("seed", 0), 0x706361)); // stream tag: pca
    const auto samples =
        eval::extract_features(params, spec, ps.patches, tap, count, rng);
    const eval::PcaResult pca = eval::pca_project(samples);

    io::write_text_file(dir / "pca.csv", eval::pca_csv(samples, pca));
    io::write_text_file(dir / "pca_variance.csv",
                        "component,fraction\n1," + io::fmt_g17(pca.fractions[0]) +
                            "\n2," + io::fmt_g17(pca.fractions[1]) + "\n");
    io::write_manifest(dir, "pca", cfg,
                       {{"in_weights", weights},
                        {"in_patches", patches_path},
                        {"out_projections", (dir / "pca.csv").string()},
                        {"out_variance", (dir / "pca_variance.csv").string()}});
}

void cmd_export_slice(const std::string& volume_path, const std::string& ref_path,
                      const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const VelocityVolume v = io::read_velocity(volume_path);

    const std::string mode = cfg.get_str("mode", "speed");
    const int z = cfg.get_int("z", v.dims.nz / 2);
    const int t = cfg.get_int("t", 0);
    if (z < 0 || z >= v.dims.nz || t < 0 || t >= v.nt)
        throw ValidationError("export-slice: slice out of range");

    VelocityVolume ref;
    if (mode == "error") {
        if (ref_path.empty())
            throw UsageError("export-slice: mode=error requires --ref");
        ref = io::read_velocity(ref_path);
        if (!(ref.dims == v.dims) || ref.nt != v.nt)
            throw ValidationError("export-slice: --ref dims must match --volume");
    } else if (mode != "speed") {
        throw ValidationError("export-slice: mode must be 'speed' or 'error'");
    }

    std::vector<double> img(static_cast<std::size_t>(v.dims.nx) * v.dims.ny);
    for (int y = 0; y < v.dims.ny; ++y)
        for (int x = 0; x < v.dims.nx; ++x) {
            double s = 0.0;
            for (int c = 0; c < 3; ++c) {
                double d = v.at(t, z, y, x, c);
                if (mode == "error") d -= ref.at(t, z, y, x, c);
                s += d * d;
            }
            img[static_cast<std::size_t>(y) * v.dims.nx + x] = std::sqrt(s);
        }
    io::write_pgm(dir / "slice.pgm", v.dims.nx, v.dims.ny, img);
    io::write_manifest(dir, "export-slice", cfg,
                       {{"in_volume", volume_path},
                        {"in_ref", ref_path},
                        {"out_slice", (dir / "slice.pgm").string()}});
}

void cmd_stability(const std::string& train_path, const std::string& val_path,
                   const std::string& config, const std::string& out) {
    const io::Config cfg = load_config(config);
    const fs::path dir = ensure_out_dir(out);
    const train::TrainConfig base = train_config_from(cfg);

    train::Dataset data;
    data.train = io::read_patches(train_path).patches;
    if (!val_path.empty()) data.val = io::read_patches(val_path).patches;

    std::vector<std::string> variant_names;
    {
        std::string raw = cfg.get_str("variants", "vanilla,relativistic,wasserstein");
        std::size_t pos = 0;
        while (pos <= raw.size()) {
            std::size_t comma = raw.find(',', pos);
            if (comma == std::string::npos) comma = raw.size();
            const std::string item = raw.substr(pos, comma - pos);
            if (!item.empty()) variant_names.push_back(item);
            pos = comma + 1;
        }
    }
    std::vector<std::string> lambda_labels;
    {
        const std::string raw = cfg.get_str("lambdas", "0.0001,0.001,0.01");
        std::size_t pos = 0;
        while (pos <= raw.size()) {
            std::size_t comma = raw.find(',', pos);
            if (comma == std::string::npos) comma = raw.size();
            const std::string item = raw.substr(pos, comma - pos);
            if (!item.empty()) lambda_labels.push_back(item);
            pos = comma + 1;
        }
    }

    std::vector<train::StabilityCell> grid;
    for (const std::string& vn : variant_names)
        for (const std::string& ll : lambda_labels)
            grid.push_back({loss::variant_from_name(vn), std::stod(ll), ll});

    const train::StabilityReport report = train::run_stability_suite(base, data, grid);
    io::write_text_file(dir / "stability_summary.csv", report.summary_csv());
    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        std::string csv = train::train_log_header();
        for (const train::EpochRecord& rec : report.runs[i].log)
            train::append_epoch_rows(csv, rec, grid[i].variant);
        const std::string name = "train_log_" + loss::variant_name(grid[i].variant) +
                                 "_" + grid[i].lambda_label + ".csv";
        io::write_text_file(dir / name, csv);
    }
    io::write_manifest(dir, "stability", cfg,
                       {{"in_train", train_path},
                        {"in_val", val_path},
                        {"out_summary", (dir / "stability_summary.csv").string()}});
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Synthetic dual-venc 4D flow MRI super-resolution toolkit"};
    app.require_subcommand(1);

    std::string config, out, hr, lr, mag, mask, sr, snr, weights, a, b, patches,
        train_p, val_p, volume, ref, model = "model";
    bool identity = false;

    auto* p_phantom = app.add_subcommand("phantom", "Generate an analytic flow phantom");
    p_phantom->add_option("--config", config);
    p_phantom->add_option("--out", out)->required();

    auto* p_synth = app.add_subcommand("synth", "Downsample to synthetic dual-venc MRI");
    p_synth->add_option("--hr", hr)->required();
    p_synth->add_option("--mag", mag)->required();
    p_synth->add_option("--mask", mask)->required();
    p_synth->add_option("--config", config);
    p_synth->add_option("--out", out)->required();

    auto* p_patch = app.add_subcommand("patch", "Extract aligned HR/LR patch pairs");
    p_patch->add_option("--hr", hr)->required();
    p_patch->add_option("--lr", lr)->required();
    p_patch->add_option("--mask", mask)->required();
    p_patch->add_option("--config", config);
    p_patch->add_option("--out", out)->required();

    auto* p_train = app.add_subcommand("train", "Two-stage adversarial training");
    p_train->add_option("--train", train_p)->required();
    p_train->add_option("--val", val_p);
    p_train->add_option("--config", config);
    p_train->add_option("--out", out)->required();

    auto* p_infer = app.add_subcommand("infer", "Tiled super-resolution inference");
    p_infer->add_option("--lr", lr)->required();
    p_infer->add_option("--weights", weights);
    p_infer->add_flag("--identity", identity,
                      "replace the network with trilinear upsampling");
    p_infer->add_option("--config", config);
    p_infer->add_option("--out", out)->required();

    auto* p_eval = app.add_subcommand("eval", "Stratified error metrics");
    p_eval->add_option("--sr", sr)->required();
    p_eval->add_option("--hr", hr)->required();
    p_eval->add_option("--mask", mask)->required();
    p_eval->add_option("--snr-log", snr);
    p_eval->add_option("--model", model);
    p_eval->add_option("--config", config);
    p_eval->add_option("--out", out)->required();

    auto* p_interp = app.add_subcommand("interp", "Network weight interpolation sweep");
    p_interp->add_option("--a", a)->required();
    p_interp->add_option("--b", b)->required();
    p_interp->add_option("--config", config);
    p_interp->add_option("--out", out)->required();

    auto* p_pca = app.add_subcommand("pca", "Feature distribution analysis");
    p_pca->add_option("--weights", weights)->required();
    p_pca->add_option("--patches", patches)->required();
    p_pca->add_option("--config", config);
    p_pca->add_option("--out", out)->required();

    auto* p_slice = app.add_subcommand("export-slice", "Write a z-slice graymap");
    p_slice->add_option("--volume", volume)->required();
    p_slice->add_option("--ref", ref);
    p_slice->add_option("--config", config);
    p_slice->add_option("--out", out)->required();

    auto* p_stab = app.add_subcommand("stability", "Adversarial-variant stability grid");
    p_stab->add_option("--train", train_p)->required();
    p_stab->add_option("--val", val_p);
    p_stab->add_option("--config", config);
    p_stab->add_option("--out", out)->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help() << std::endl;
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return 2;
    }

    try {
        if (p_phantom->parsed()) cmd_phantom(config, out);
        else if (p_synth->parsed()) cmd_synth(hr, mag, mask, config, out);
        else if (p_patch->parsed()) cmd_patch(hr, lr, mask, config, out);
        else if (p_train->parsed()) cmd_train(train_p, val_p, config, out);
        else if (p_infer->parsed()) cmd_infer(lr, weights, config, out, identity);
        else if (p_eval->parsed()) cmd_eval(sr, hr, mask, snr, config, out, model);
        else if (p_interp->parsed()) cmd_interp(a, b, config, out);
        else if (p_pca->parsed()) cmd_pca(weights, patches, config, out);
        else if (p_slice->parsed()) cmd_export_slice(volume, ref, config, out);
        else if (p_stab->parsed()) cmd_stability(train_p, val_p, config, out);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << std::endl;
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << std::endl;
        return 4;
    } catch (const ValidationError& e) {
        std::cerr << "input error: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << std::endl;
        return 3;
    }
    return 0;
}

} // namespace f4d::cli
