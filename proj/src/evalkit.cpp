#include "f4d/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "f4d/io.hpp"

namespace f4d::eval {

namespace {
constexpr double kEps = 1e-6;
}

std::string snr_scope_name(SnrScope s) {
    switch (s) {
    case SnrScope::All: return "all";
    case SnrScope::High: return "high";
    default: return "low";
    }
}

std::string time_scope_name(TimeScope t) {
    return t == TimeScope::FullCycle ? "full_cycle" : "peak_systole";
}

const StratumMetrics& MetricsReport::at(Region r, SnrScope s, TimeScope t) const {
    for (const StratumMetrics& m : rows)
        if (m.region == r && m.snr == s && m.time == t) return m;
    throw ValidationError("metrics report: no such stratum");
}

namespace {

struct Accum {
    std::size_t n = 0;
    double tanh_sum = 0.0;
    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double hr_max = 0.0;
    double de_sum = 0.0;
    double sh[3]{}, ss[3]{}, shh[3]{}, sss[3]{}, shs[3]{};

    void add(const float* sr, const float* hr) {
        double dn = 0.0, hn = 0.0, sn = 0.0, dot = 0.0;
        for (int c = 0; c < 3; ++c) {
            const double h = static_cast<double>(hr[c]);
            const double s = static_cast<double>(sr[c]);
            const double d = s - h;
            dn += d * d;
            hn += h * h;
            sn += s * s;
            dot += s * h;
            sh[c] += h;
            ss[c] += s;
            shh[c] += h * h;
            sss[c] += s * s;
            shs[c] += h * s;
        }
        const double dnorm = std::sqrt(dn);
        const double hnorm = std::sqrt(hn);
        ++n;
        tanh_sum += std::tanh(dnorm / (hnorm + kEps));
        abs_sum += dnorm;
        sq_sum += dn;
        hr_max = std::max(hr_max, hnorm);
        // |cos|^2 formed from squared norms so an identical pair scores an
        // exact zero; the epsilon guards the zero-norm case.
        de_sum += 1.0 - std::sqrt(dot * dot / std::max(sn * hn, kEps * kEps));
    }

    StratumMetrics finish(Region r, SnrScope s, TimeScope t) const {
        StratumMetrics m;
        m.region = r;
        m.snr = s;
        m.time = t;
        m.n_voxels = n;
        if (n == 0) return m;
        m.present = true;
        const double inv = 1.0 / static_cast<double>(n);
        m.mre = 100.0 * tanh_sum * inv;
        m.mae = abs_sum * inv;
        m.vnrmse = hr_max > 0.0 ? std::sqrt(sq_sum * inv) / hr_max
                                : std::numeric_limits<double>::quiet_NaN();
        m.de = 100.0 * de_sum * inv;
        for (int c = 0; c < 3; ++c) {
            const double mh = sh[c] * inv;
            const double ms = ss[c] * inv;
            const double var_h = shh[c] * inv - mh * mh;
            const double var_s = sss[c] * inv - ms * ms;
            const double cov = shs[c] * inv - mh * ms;
            m.k[c] = var_h > 0.0 ? cov / var_h
                                 : std::numeric_limits<double>::quiet_NaN();
            m.r2[c] = (var_h > 0.0 && var_s > 0.0)
                          ? (cov * cov) / (var_h * var_s)
                          : std::numeric_limits<double>::quiet_NaN();
        }
        return m;
    }
};

} // namespace

MetricsReport compute_metrics(const VelocityVolume& v_sr, const VelocityVolume& v_hr,
                              const RegionLabels& labels,
                              const std::vector<SnrLogEntry>& snr_log,
                              int peak_index) {
    if (!(v_sr.dims == v_hr.dims) || v_sr.nt != v_hr.nt)
        throw ValidationError("compute_metrics: SR/HR dimension mismatch");
    if (!(labels.dims == v_hr.dims))
        throw ValidationError("compute_metrics: label dimension mismatch");
    if (static_cast<int>(snr_log.size()) != v_hr.nt)
        throw ValidationError("compute_metrics: SNR log does not cover every frame");
    if (peak_index < 0 || peak_index >= v_hr.nt)
        throw ValidationError("compute_metrics: peak index out of range");

    auto frame_in_scope = [&](int t, SnrScope s) {
        if (s == SnrScope::All) return true;
        const double tsnr = snr_log[static_cast<std::size_t>(t)].tsnr;
        if (s == SnrScope::High) return tsnr >= 10.0 && tsnr <= 12.0;
        return tsnr >= 2.0 && tsnr <= 4.0;
    };

    MetricsReport report;
    const std::size_t vox = v_hr.dims.voxels();
    for (Region region : {Region::Boundary, Region::Core}) {
        for (SnrScope snr : {SnrScope::All, SnrScope::High, SnrScope::Low}) {
            for (TimeScope time : {TimeScope::FullCycle, TimeScope::PeakSystole}) {
                Accum acc;
                for (int t = 0; t < v_hr.nt; ++t) {
                    if (!frame_in_scope(t, snr)) continue;
                    if (time == TimeScope::PeakSystole && t != peak_index) continue;
                    const float* fs = v_sr.frame(t);
                    const float* fh = v_hr.frame(t);
                    for (std::size_t i = 0; i < vox; ++i) {
                        if (labels.data[i] != static_cast<std::uint8_t>(region))
                            continue;
                        acc.add(fs + i * 3, fh + i * 3);
                    }
                }
                report.rows.push_back(acc.finish(region, snr, time));
            }
        }
    }
    return report;
}

namespace {
std::string metric_field(double v) {
    return std::isnan(v) ? "NA" : io::fmt_g17(v);
}

std::string region_name(Region r) {
    switch (r) {
    case Region::Boundary: return "boundary";
    case Region::Core: return "core";
    default: return "nonfluid";
    }
}
} // namespace

std::string report_csv(const MetricsReport& report, const std::string& model_label) {
    std::string csv =
        "model,region,snr,time,n_voxels,mre_pct,mae,vnrmse,de_pct,"
        "k_x,k_y,k_z,r2_x,r2_y,r2_z\n";
    for (const StratumMetrics& m : report.rows) {
        csv += model_label + "," + region_name(m.region) + "," +
               snr_scope_name(m.snr) + "," + time_scope_name(m.time) + "," +
               std::to_string(m.n_voxels) + ",";
        if (!m.present) {
            csv += "NA,NA,NA,NA,NA,NA,NA,NA,NA,NA\n";
            continue;
        }
        csv += metric_field(m.mre) + "," + metric_field(m.mae) + "," +
               metric_field(m.vnrmse) + "," + metric_field(m.de);
        for (int c = 0; c < 3; ++c) csv += "," + metric_field(m.k[c]);
        for (int c = 0; c < 3; ++c) csv += "," + metric_field(m.r2[c]);
        csv += "\n";
    }
    return csv;
}

std::vector<FeatureSample> extract_features(const net::ParamSet& params,
                                            const net::GeneratorSpec& spec,
                                            const std::vector<PatchPair>& patches,
                                            Tap tap, int count, Rng& rng) {
    if (patches.empty())
        throw ValidationError("extract_features: empty patch list");
    if (count < 1) throw ValidationError("extract_features: count must be >= 1");

    std::unordered_map<int, std::vector<float>> cache;
    std::vector<FeatureSample> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const int id = static_cast<int>(rng.below(patches.size()));
        auto it = cache.find(id);
        if (it == cache.end()) {
            ad::Graph g;
            const net::BoundParams bp = net::bind_params(g, params);
            const PatchPair& pair = patches[static_cast<std::size_t>(id)];
            const std::size_t vox =
                static_cast<std::size_t>(kPatchLr) * kPatchLr * kPatchLr;
            std::vector<double> x(vox * 3);
            for (std::size_t v = 0; v < vox; ++v)
                for (int c = 0; c < 3; ++c)
                    x[c * vox + v] = static_cast<double>(pair.x_lr[v * 3 + c]);
            const net::GeneratorTaps taps =
                net::generator_forward(g, bp, g.leaf({3, 12, 12, 12}, std::move(x)), spec);
            const auto& feat = g.val(tap == Tap::Middle ? taps.middle : taps.end);
            it = cache.emplace(id, std::vector<float>(feat.begin(), feat.end())).first;
        }
        FeatureSample s;
        s.tap = tap;
        s.patch_id = id;
        s.features = it->second;
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

// One application of the sample covariance to v, streamed over the samples;
// optionally deflated against a previous component.
std::vector<double> apply_cov(const std::vector<FeatureSample>& samples,
                              const std::vector<double>& mean,
                              const std::vector<double>& v,
                              const std::vector<double>* deflate) {
    const std::size_t d = mean.size();
    std::vector<double> out(d, 0.0);
    for (const FeatureSample& s : samples) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j)
            dot += (static_cast<double>(s.features[j]) - mean[j]) * v[j];
        for (std::size_t j = 0; j < d; ++j)
            out[j] += (static_cast<double>(s.features[j]) - mean[j]) * dot;
    }
    const double inv = 1.0 / static_cast<double>(samples.size());
    for (double& x : out) x *= inv;
    if (deflate) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += out[j] * (*deflate)[j];
        for (std::size_t j = 0; j < d; ++j) out[j] -= dot * (*deflate)[j];
    }
    return out;
}

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Dominant eigenpair of the (deflated) covariance via power iteration.
std::pair<std::vector<double>, double> power_component(
    const std::vector<FeatureSample>& samples, const std::vector<double>& mean,
    const std::vector<double>* deflate) {
    const std::size_t d = mean.size();
    Rng rng(0xBADA55u);
    std::vector<double> v(d);
    for (double& x : v) x = rng.normal();
    if (deflate) {
        double dot = 0.0;
        for (std::size_t j = 0; j < d; ++j) dot += v[j] * (*deflate)[j];
        for (std::size_t j = 0; j < d; ++j) v[j] -= dot * (*deflate)[j];
    }
    double n = norm2(v);
    if (n == 0.0) return {std::vector<double>(d, 0.0), 0.0};
    for (double& x : v) x /= n;

    double lambda = 0.0;
    for (int iter = 0; iter < 500; ++iter) {
        std::vector<double> u = apply_cov(samples, mean, v, deflate);
        const double un = norm2(u);
        if (un < 1e-300) return {std::vector<double>(d, 0.0), 0.0};
        for (double& x : u) x /= un;
        const double change = std::fabs(un - lambda);
        lambda = un;
        v.swap(u);
        if (change <= 1e-13 * std::max(1.0, lambda)) break;
    }
    return {v, lambda};
}

} // namespace

PcaResult pca_project(const std::vector<FeatureSample>& samples) {
    if (samples.size() < 3)
        throw ValidationError("pca_project: need at least 3 samples");
    const std::size_t d = samples[0].features.size();
    for (const FeatureSample& s : samples)
        if (s.features.size() != d)
            throw ValidationError("pca_project: inconsistent feature dimensionality");

    PcaResult res;
    res.mean.assign(d, 0.0);
    for (const FeatureSample& s : samples)
        for (std::size_t j = 0; j < d; ++j)
            res.mean[j] += static_cast<double>(s.features[j]);
    for (double& x : res.mean) x /= static_cast<double>(samples.size());

    double total_var = 0.0;
    for (const FeatureSample& s : samples)
        for (std::size_t j = 0; j < d; ++j) {
            const double c = static_cast<double>(s.features[j]) - res.mean[j];
            total_var += c * c;
        }
    total_var /= static_cast<double>(samples.size());

    res.projections.assign(samples.size(), {0.0, 0.0});
    res.components[0].assign(d, 0.0);
    res.components[1].assign(d, 0.0);
    if (total_var == 0.0) return res; // degenerate input

    auto [v1, l1] = power_component(samples, res.mean, nullptr);
    auto [v2, l2] = power_component(samples, res.mean, &v1);
    res.components[0] = v1;
    res.components[1] = v2;
    res.fractions = {l1 / total_var, l2 / total_var};

    for (std::size_t i = 0; i < samples.size(); ++i) {
        double p1 = 0.0, p2 = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            const double c = static_cast<double>(samples[i].features[j]) - res.mean[j];
            p1 += c * v1[j];
            p2 += c * v2[j];
        }
        res.projections[i] = {p1, p2};
    }
    return res;
}

std::string pca_csv(const std::vector<FeatureSample>& samples, const PcaResult& pca) {
    std::string csv = "tap,patch_id,pc1,pc2\n";
    for (std::size_t i = 0; i < samples.size(); ++i) {
        csv += (samples[i].tap == Tap::Middle ? "middle" : "end");
        csv += "," + std::to_string(samples[i].patch_id) + "," +
               io::fmt_g17(pca.projections[i][0]) + "," +
               io::fmt_g17(pca.projections[i][1]) + "\n";
    }
    return csv;
}

} // namespace f4d::eval
