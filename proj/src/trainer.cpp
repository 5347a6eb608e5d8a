#include "f4d/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "f4d/io.hpp"
#include "f4d/rng.hpp"

namespace f4d::train {

namespace {

constexpr std::uint64_t kStreamShuffle = 2;
constexpr std::uint64_t kStreamBeta = 4;

ad::Value patch_leaf(ad::Graph& g, const std::vector<float>& v, int n) {
    // patch storage is (z,y,x,c); graph tensors are {c,z,y,x}
    const std::size_t vox = static_cast<std::size_t>(n) * n * n;
    std::vector<double> t(vox * 3);
    for (std::size_t i = 0; i < vox; ++i)
        for (int c = 0; c < 3; ++c)
            t[c * vox + i] = static_cast<double>(v[i * 3 + c]);
    return g.leaf({3, n, n, n}, std::move(t));
}

struct DataLossValues {
    ad::Value total;
    ad::Value mse_nf, mse_b, mse_c;
};

// Region MSEs pooled over the batch: each region's voxel set spans all
// samples (Eq-style mean over the region, empty regions contribute zero).
DataLossValues build_data_loss(ad::Graph& g, const std::vector<ad::Value>& srs,
                               const std::vector<ad::Value>& hrs,
                               const std::vector<const PatchPair*>& batch) {
    ad::Value sums[3] = {ad::Value{-1}, ad::Value{-1}, ad::Value{-1}};
    std::size_t counts[3] = {0, 0, 0};
    for (std::size_t i = 0; i < batch.size(); ++i) {
        for (int r = 0; r < 3; ++r) {
            auto [s, c] = loss::region_sq_sum(g, srs[i], hrs[i], batch[i]->labels_hr,
                                              static_cast<Region>(r));
            if (c == 0) continue;
            counts[r] += c;
            sums[r] = sums[r].valid() ? g.add(sums[r], s) : s;
        }
    }
    DataLossValues out;
    ad::Value* slot[3] = {&out.mse_nf, &out.mse_b, &out.mse_c};
    for (int r = 0; r < 3; ++r) {
        *slot[r] = counts[r] ? g.scale(sums[r], 1.0 / static_cast<double>(counts[r]))
                             : g.scalar(0.0);
    }
    out.total = g.add(g.add(out.mse_nf, out.mse_b), out.mse_c);
    return out;
}

// Mean-relative-error accumulation over fluid voxels of one patch.
void accumulate_mre(const std::vector<double>& sr, const PatchPair& pair,
                    double& sum, std::size_t& count) {
    const std::size_t vox =
        static_cast<std::size_t>(kPatchHr) * kPatchHr * kPatchHr;
    constexpr double eps = 1e-6;
    for (std::size_t i = 0; i < vox; ++i) {
        if (pair.labels_hr[i] == static_cast<std::uint8_t>(Region::NonFluid)) continue;
        double dn = 0.0, hn = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double h = static_cast<double>(pair.x_hr[i * 3 + c]);
            const double d = sr[c * vox + i] - h;
            dn += d * d;
            hn += h * h;
        }
        sum += std::tanh(std::sqrt(dn) / (std::sqrt(hn) + eps));
        ++count;
    }
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed,
                                          int global_epoch) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(derive_seed(seed, kStreamShuffle, static_cast<std::uint64_t>(global_epoch)));
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[static_cast<std::size_t>(rng.below(i))]);
    return idx;
}

net::ParamSet grads_to_params(ad::Graph& g, const net::ParamSet& like,
                              const std::vector<ad::Value>& grads) {
    net::ParamSet out;
    for (std::size_t i = 0; i < like.entries().size(); ++i)
        out.add(like.entries()[i].first,
                ad::Tensor(like.entries()[i].second.shape, g.val(grads[i])));
    return out;
}

struct EpochStats {
    loss::LossReport sum;
    int batches = 0;
    double mre_sum = 0.0;
    std::size_t mre_count = 0;

    void add(const loss::LossReport& r) {
        sum.mse_nonfluid += r.mse_nonfluid;
        sum.mse_bound += r.mse_bound;
        sum.mse_core += r.mse_core;
        sum.adv_g += r.adv_g;
        sum.adv_d += r.adv_d;
        sum.l2_g += r.l2_g;
        sum.l2_d += r.l2_d;
        ++batches;
    }
    loss::LossReport mean(const loss::LossConfig& lc, double lambda_g) const {
        loss::LossReport r = sum;
        const double inv = batches ? 1.0 / batches : 0.0;
        r.mse_nonfluid *= inv;
        r.mse_bound *= inv;
        r.mse_core *= inv;
        r.adv_g *= inv;
        r.adv_d *= inv;
        r.l2_g *= inv;
        r.l2_d *= inv;
        r.total_g = r.mse_nonfluid + r.mse_bound + r.mse_core +
                    lambda_g * r.adv_g + lc.mu_g * r.l2_g;
        r.total_d = r.adv_d + lc.mu_d * r.l2_d;
        return r;
    }
    double mre() const {
        return mre_count ? 100.0 * mre_sum / static_cast<double>(mre_count) : 0.0;
    }
};

double host_l2(const net::ParamSet& p) {
    double s = 0.0;
    for (const auto& [name, t] : p.entries())
        for (double x : t.v) s += x * x;
    return s;
}

// Forward-only validation pass. Stage 2 additionally scores the current
// discriminator on the val set so the adversarial curves have a val series.
struct ValResult {
    loss::LossReport report;
    double mre = 0.0;
};

ValResult validate(const TrainConfig& cfg, const std::vector<PatchPair>& val,
                   const net::ParamSet& gen, const net::ParamSet* disc) {
    ValResult out;
    if (val.empty()) return out;

    double sq[3] = {0, 0, 0};
    std::size_t cnt[3] = {0, 0, 0};
    double mre_sum = 0.0;
    std::size_t mre_count = 0;
    std::vector<double> hr_scores, sr_scores;

    for (const PatchPair& pair : val) {
        ad::Graph g;
        const net::BoundParams gp = net::bind_params(g, gen);
        const ad::Value x_lr = patch_leaf(g, pair.x_lr, kPatchLr);
        const ad::Value x_hr = patch_leaf(g, pair.x_hr, kPatchHr);
        const net::GeneratorTaps taps = net::generator_forward(g, gp, x_lr, cfg.gen);

        for (int r = 0; r < 3; ++r) {
            auto [s, c] = loss::region_sq_sum(g, taps.out, x_hr, pair.labels_hr,
                                              static_cast<Region>(r));
            sq[r] += g.scalar_val(s);
            cnt[r] += c;
        }
        accumulate_mre(g.val(taps.out), pair, mre_sum, mre_count);

        if (disc) {
            const net::BoundParams dp = net::bind_params(g, *disc);
            const ad::Value masked = loss::mask_nonfluid(g, taps.out, pair.labels_hr);
            hr_scores.push_back(
                g.scalar_val(net::discriminator_forward(g, dp, x_hr, cfg.disc)));
            sr_scores.push_back(
                g.scalar_val(net::discriminator_forward(g, dp, masked, cfg.disc)));
        }
    }

    loss::LossReport& r = out.report;
    r.mse_nonfluid = cnt[0] ? sq[0] / static_cast<double>(cnt[0]) : 0.0;
    r.mse_bound = cnt[1] ? sq[1] / static_cast<double>(cnt[1]) : 0.0;
    r.mse_core = cnt[2] ? sq[2] / static_cast<double>(cnt[2]) : 0.0;
    r.l2_g = host_l2(gen);
    if (disc) {
        r.l2_d = host_l2(*disc);
        std::pair<double, double> adv;
        switch (cfg.loss.variant) {
        case loss::Variant::Vanilla: adv = loss::adv_vanilla(hr_scores, sr_scores); break;
        case loss::Variant::Relativistic:
            adv = loss::adv_relativistic(hr_scores, sr_scores);
            break;
        default: adv = loss::adv_wasserstein(hr_scores, sr_scores, 0.0); break;
        }
        r.adv_g = adv.first;
        r.adv_d = adv.second;
    }
    r.total_g = r.mse_nonfluid + r.mse_bound + r.mse_core +
                cfg.effective_lambda_g() * r.adv_g + cfg.loss.mu_g * r.l2_g;
    r.total_d = r.adv_d + cfg.loss.mu_d * r.l2_d;
    out.mre = mre_count ? 100.0 * mre_sum / static_cast<double>(mre_count) : 0.0;
    return out;
}

} // namespace

void TrainConfig::validate() const {
    if (epochs_stage1 < 0 || epochs_stage2 < 0)
        throw ValidationError("train: epoch counts must be >= 0");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (!(lr > 0.0)) throw ValidationError("train: learning rate must be > 0");
    loss.validate();
    gen.validate();
    disc.validate();
}

StageResult train_stage1(const TrainConfig& cfg, const Dataset& data) {
    cfg.validate();
    if (data.train.empty()) throw ValidationError("train_stage1: empty dataset");

    StageResult res;
    res.gen = net::init_generator(cfg.gen, cfg.seed);
    res.gen_adam = net::AdamState::init(res.gen);

    for (int epoch = 0; epoch < cfg.epochs_stage1; ++epoch) {
        const auto order = shuffled_indices(data.train.size(), cfg.seed, epoch);
        EpochStats stats;

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const PatchPair*> batch;
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&data.train[order[i]]);

            ad::Graph g;
            const net::BoundParams gp = net::bind_params(g, res.gen);
            std::vector<ad::Value> srs, hrs;
            for (const PatchPair* pair : batch) {
                const ad::Value x_lr = patch_leaf(g, pair->x_lr, kPatchLr);
                hrs.push_back(patch_leaf(g, pair->x_hr, kPatchHr));
                srs.push_back(net::generator_forward(g, gp, x_lr, cfg.gen).out);
            }
            const DataLossValues dl = build_data_loss(g, srs, hrs, batch);
            const ad::Value l2 = loss::l2_sum(g, gp.all());
            const ad::Value total = g.add(dl.total, g.scale(l2, cfg.loss.mu_g));
            if (!std::isfinite(g.scalar_val(total)))
                throw NumericError("train_stage1: non-finite loss");

            const auto grads = g.gradients(total, gp.all());
            net::ParamSet gset = grads_to_params(g, res.gen, grads);
            net::adam_step(res.gen, gset, res.gen_adam, cfg.lr);

            loss::LossReport rep;
            rep.mse_nonfluid = g.scalar_val(dl.mse_nf);
            rep.mse_bound = g.scalar_val(dl.mse_b);
            rep.mse_core = g.scalar_val(dl.mse_c);
            rep.l2_g = g.scalar_val(l2);
            stats.add(rep);
            for (std::size_t i = 0; i < batch.size(); ++i)
                accumulate_mre(g.val(srs[i]), *batch[i], stats.mre_sum, stats.mre_count);
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.stage = 1;
        rec.train = stats.mean(cfg.loss, 0.0);
        rec.train_mre = stats.mre();
        const ValResult v = validate(cfg, data.val, res.gen, nullptr);
        rec.val = v.report;
        rec.val_mre = v.mre;
        res.log.push_back(rec);
    }
    return res;
}

StageResult train_stage2(const TrainConfig& cfg, const Dataset& data,
                         const net::ParamSet& gen_init,
                         const net::AdamState* gen_adam_init) {
    cfg.validate();
    if (data.train.empty()) throw ValidationError("train_stage2: empty dataset");

    StageResult res;
    res.gen = gen_init;
    res.gen_adam = gen_adam_init ? *gen_adam_init : net::AdamState::init(res.gen);
    res.disc = net::init_discriminator(cfg.disc, cfg.seed);
    net::AdamState disc_adam = net::AdamState::init(res.disc);

    const double lambda_g = cfg.effective_lambda_g();
    Rng beta_rng(derive_seed(cfg.seed, kStreamBeta));

    for (int epoch = 0; epoch < cfg.epochs_stage2; ++epoch) {
        const int global_epoch = cfg.epochs_stage1 + epoch;
        const auto order = shuffled_indices(data.train.size(), cfg.seed, global_epoch);
        EpochStats stats;

        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
            std::vector<const PatchPair*> batch;
            for (std::size_t i = start; i < end; ++i)
                batch.push_back(&data.train[order[i]]);

            ad::Graph g;
            const net::BoundParams gp = net::bind_params(g, res.gen);

            // Generator forward once per batch; the discriminator step uses a
            // detached copy of the prediction.
            std::vector<ad::Value> srs, hrs, masked_srs, detached_srs;
            for (const PatchPair* pair : batch) {
                const ad::Value x_lr = patch_leaf(g, pair->x_lr, kPatchLr);
                const ad::Value x_hr = patch_leaf(g, pair->x_hr, kPatchHr);
                const ad::Value sr = net::generator_forward(g, gp, x_lr, cfg.gen).out;
                hrs.push_back(x_hr);
                srs.push_back(sr);
                masked_srs.push_back(loss::mask_nonfluid(g, sr, pair->labels_hr));
                const ad::Value det = g.leaf(g.shape(sr), g.val(sr));
                detached_srs.push_back(
                    loss::mask_nonfluid(g, det, pair->labels_hr));
            }

            // ---- discriminator step -------------------------------------------------
            const net::BoundParams dp1 = net::bind_params(g, res.disc);
            std::vector<ad::Value> d_hr, d_sr;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                d_hr.push_back(net::discriminator_forward(g, dp1, hrs[i], cfg.disc));
                d_sr.push_back(
                    net::discriminator_forward(g, dp1, detached_srs[i], cfg.disc));
            }
            ad::Value adv_d{-1};
            switch (cfg.loss.variant) {
            case loss::Variant::Vanilla:
                adv_d = loss::adv_vanilla(g, d_hr, d_sr).second;
                break;
            case loss::Variant::Relativistic:
                adv_d = loss::adv_relativistic(g, d_hr, d_sr).second;
                break;
            default: {
                std::vector<double> betas;
                for (std::size_t i = 0; i < batch.size(); ++i)
                    betas.push_back(beta_rng.uniform());
                const loss::CriticFn critic = [&](ad::Graph& gg, ad::Value x) {
                    return net::discriminator_forward(gg, dp1, x, cfg.disc);
                };
                const ad::Value gpen = loss::gradient_penalty(
                    g, critic, hrs, detached_srs, betas, cfg.loss.lambda_gp);
                adv_d = loss::adv_wasserstein(g, d_hr, d_sr, gpen).second;
                break;
            }
            }
            const ad::Value l2_d = loss::l2_sum(g, dp1.all());
            const ad::Value total_d = g.add(adv_d, g.scale(l2_d, cfg.loss.mu_d));
            if (!std::isfinite(g.scalar_val(total_d)))
                throw NumericError("train_stage2: non-finite discriminator loss");
            {
                const auto dgrads = g.gradients(total_d, dp1.all());
                net::ParamSet dset = grads_to_params(g, res.disc, dgrads);
                net::adam_step(res.disc, dset, disc_adam, cfg.lr);
            }

            // ---- generator step (updated discriminator) ------------------------------
            const net::BoundParams dp2 = net::bind_params(g, res.disc);
            std::vector<ad::Value> g_hr, g_sr;
            for (std::size_t i = 0; i < batch.size(); ++i) {
                g_hr.push_back(net::discriminator_forward(g, dp2, hrs[i], cfg.disc));
                g_sr.push_back(
                    net::discriminator_forward(g, dp2, masked_srs[i], cfg.disc));
            }
            ad::Value adv_g{-1};
            switch (cfg.loss.variant) {
            case loss::Variant::Vanilla:
                adv_g = loss::adv_vanilla(g, g_hr, g_sr).first;
                break;
            case loss::Variant::Relativistic:
                adv_g = loss::adv_relativistic(g, g_hr, g_sr).first;
                break;
            default:
                adv_g = loss::adv_wasserstein(g, g_hr, g_sr, g.scalar(0.0)).first;
                break;
            }

            const DataLossValues dl = build_data_loss(g, srs, hrs, batch);
            const ad::Value l2_g = loss::l2_sum(g, gp.all());
            ad::Value total_g = g.add(dl.total, g.scale(l2_g, cfg.loss.mu_g));
            // lambda_g = 0 keeps the loss graph identical to stage 1, so the
            // generator trajectory matches continued stage-1 training exactly.
            if (lambda_g != 0.0)
                total_g = g.add(total_g, g.scale(adv_g, lambda_g));
            if (!std::isfinite(g.scalar_val(total_g)))
                throw NumericError("train_stage2: non-finite generator loss");
            {
                const auto ggrads = g.gradients(total_g, gp.all());
                net::ParamSet gset = grads_to_params(g, res.gen, ggrads);
                net::adam_step(res.gen, gset, res.gen_adam, cfg.lr);
            }

            loss::LossReport rep;
            rep.mse_nonfluid = g.scalar_val(dl.mse_nf);
            rep.mse_bound = g.scalar_val(dl.mse_b);
            rep.mse_core = g.scalar_val(dl.mse_c);
            rep.adv_g = g.scalar_val(adv_g);
            rep.adv_d = g.scalar_val(adv_d);
            rep.l2_g = g.scalar_val(l2_g);
            rep.l2_d = g.scalar_val(l2_d);
            stats.add(rep);
            for (std::size_t i = 0; i < batch.size(); ++i)
                accumulate_mre(g.val(srs[i]), *batch[i], stats.mre_sum, stats.mre_count);
        }

        EpochRecord rec;
        rec.epoch = global_epoch;
        rec.stage = 2;
        rec.train = stats.mean(cfg.loss, lambda_g);
        rec.train_mre = stats.mre();
        const ValResult v = validate(cfg, data.val, res.gen, &res.disc);
        rec.val = v.report;
        rec.val_mre = v.mre;
        res.log.push_back(rec);
    }
    return res;
}

std::string train_log_header() {
    return "epoch,stage,variant,mse_nonfluid,mse_bound,mse_core,adv_g,adv_d,"
           "l2_g,l2_d,total_g,total_d,split,mre\n";
}

namespace {
void append_row(std::string& csv, const EpochRecord& rec, loss::Variant variant,
                const loss::LossReport& r, const char* split, double mre) {
    csv += std::to_string(rec.epoch) + "," + std::to_string(rec.stage) + "," +
           loss::variant_name(variant) + "," + io::fmt_g17(r.mse_nonfluid) + "," +
           io::fmt_g17(r.mse_bound) + "," + io::fmt_g17(r.mse_core) + "," +
           io::fmt_g17(r.adv_g) + "," + io::fmt_g17(r.adv_d) + "," +
           io::fmt_g17(r.l2_g) + "," + io::fmt_g17(r.l2_d) + "," +
           io::fmt_g17(r.total_g) + "," + io::fmt_g17(r.total_d) + "," + split +
           "," + io::fmt_g17(mre) + "\n";
}
} // namespace

void append_epoch_rows(std::string& csv, const EpochRecord& rec,
                       loss::Variant variant) {
    append_row(csv, rec, variant, rec.train, "train", rec.train_mre);
    append_row(csv, rec, variant, rec.val, "val", rec.val_mre);
}

std::string StabilityReport::summary_csv() const {
    std::string csv =
        "variant,lambda_g,final_train_mre,final_val_mre,best_val_mre,"
        "final_val_data_loss\n";
    for (const StabilityRow& r : rows) {
        csv += loss::variant_name(r.cell.variant) + "," + r.cell.lambda_label + "," +
               io::fmt_g17(r.final_train_mre) + "," + io::fmt_g17(r.final_val_mre) +
               "," + io::fmt_g17(r.best_val_mre) + "," +
               io::fmt_g17(r.final_val_data_loss) + "\n";
    }
    return csv;
}

StabilityReport run_stability_suite(const TrainConfig& base, const Dataset& data,
                                    const std::vector<StabilityCell>& grid) {
    if (grid.empty()) throw ValidationError("stability suite: empty grid");

    StabilityReport report;
    report.warm_start = train_stage1(base, data);

    for (const StabilityCell& cell : grid) {
        TrainConfig cfg = base;
        cfg.loss.variant = cell.variant;
        cfg.loss.lambda_g = cell.lambda_g;
        cfg.disc_only = false;
        StageResult run = train_stage2(cfg, data, report.warm_start.gen,
                                       &report.warm_start.gen_adam);

        StabilityRow row;
        row.cell = cell;
        if (!run.log.empty()) {
            row.final_train_mre = run.log.back().train_mre;
            row.final_val_mre = run.log.back().val_mre;
            row.best_val_mre = run.log.front().val_mre;
            for (const EpochRecord& rec : run.log)
                row.best_val_mre = std::min(row.best_val_mre, rec.val_mre);
            row.final_val_data_loss = data_loss(run.log.back().val);
        }
        report.rows.push_back(row);
        report.runs.push_back(std::move(run));
    }
    return report;
}

} // namespace f4d::train
