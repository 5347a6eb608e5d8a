#include "f4d/mrsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "f4d/kernels.hpp"

namespace f4d {

namespace {
constexpr double kPi = 3.141592653589793238462643383279502884;

kern::Shape3 shape_of(Dims3 d) { return {d.nz, d.ny, d.nx}; }

void require_same_dims(Dims3 a, Dims3 b, const char* what) {
    if (!(a == b))
        throw ValidationError(std::string(what) + ": dimension mismatch");
}
} // namespace

void AcquisitionConfig::validate() const {
    if (!(venc_low > 0.0))
        throw ValidationError("acquisition: venc_low must be > 0");
    if (!(tsnr_high[0] > 0.0) || tsnr_high[1] < tsnr_high[0] ||
        !(tsnr_low[0] > 0.0) || tsnr_low[1] < tsnr_low[0])
        throw ValidationError("acquisition: TSNR ranges must be positive and ordered");
    if (!(tsnr_highvenc > 0.0))
        throw ValidationError("acquisition: tsnr_highvenc must be > 0");
    if (downsample_factor != 2)
        throw ValidationError("acquisition: downsample_factor must be 2");
}

VencPair select_vencs(const VelocityVolume& v, int t, const AcquisitionConfig& cfg) {
    const float* f = v.frame(t);
    const std::size_t n = v.dims.voxels() * 3;
    double vmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(static_cast<double>(f[i]));
        if (a > vmax) vmax = a;
    }
    const double twice = 2.0 * cfg.venc_low;
    return {cfg.venc_low, vmax >= twice ? vmax : twice};
}

ScalarField encode_phase(const ScalarField& v, double venc) {
    if (!(venc > 0.0)) throw ValidationError("encode_phase: venc must be > 0");
    ScalarField phi = ScalarField::zeros(v.dims);
    const double s = kPi / venc;
    for (std::size_t i = 0; i < v.data.size(); ++i) phi.data[i] = v.data[i] * s;
    return phi;
}

ComplexVolume assemble_complex(const MagnitudeVolume& m, const ScalarField& phase,
                               double magnitude_floor) {
    require_same_dims(m.dims, phase.dims, "assemble_complex");
    ComplexVolume out = ComplexVolume::zeros(m.dims, ComplexSpace::Image);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double mag = static_cast<double>(m.data[i]);
        if (mag < magnitude_floor) continue; // below-floor voxels stay zero
        out.data[i] = {mag * std::cos(phase.data[i]), mag * std::sin(phase.data[i])};
    }
    return out;
}

ComplexVolume fft3(const ComplexVolume& x) {
    ComplexVolume out = x;
    kern::fft3(out.data.data(), shape_of(x.dims), false, kern::Exec::Par);
    out.space = ComplexSpace::KSpace;
    return out;
}

ComplexVolume ifft3(const ComplexVolume& x) {
    ComplexVolume out = x;
    kern::fft3(out.data.data(), shape_of(x.dims), true, kern::Exec::Par);
    out.space = ComplexSpace::Image;
    return out;
}

ComplexVolume crop_kspace(const ComplexVolume& k, int factor) {
    if (factor != 2) throw ValidationError("crop_kspace: factor must be 2");
    const Dims3 d = k.dims;
    if (d.nx % 2 || d.ny % 2 || d.nz % 2)
        throw ValidationError("crop_kspace: all dims must be even");

    const Dims3 o{d.nx / 2, d.ny / 2, d.nz / 2};
    ComplexVolume out = ComplexVolume::zeros(o, ComplexSpace::KSpace);

    // Output bin ko holds frequency f in [-M/2, M/2); the same frequency sits
    // at index (f mod N) of the full-size transform.
    auto src_index = [](int ko, int m, int n) {
        const int f = ko < m / 2 ? ko : ko - m;
        return f >= 0 ? f : f + n;
    };
    const double scale = 1.0 / std::sqrt(8.0);
    for (int z = 0; z < o.nz; ++z) {
        const int zi = src_index(z, o.nz, d.nz);
        for (int y = 0; y < o.ny; ++y) {
            const int yi = src_index(y, o.ny, d.ny);
            for (int x = 0; x < o.nx; ++x) {
                const int xi = src_index(x, o.nx, d.nx);
                out.at(z, y, x) = k.at(zi, yi, xi) * scale;
            }
        }
    }
    return out;
}

ComplexVolume add_kspace_noise(const ComplexVolume& k, double tsnr,
                               double signal_ref, Rng& rng) {
    if (std::isinf(tsnr)) return k; // noise-free limit
    if (!(tsnr > 0.0)) throw ValidationError("add_kspace_noise: tsnr must be > 0");
    if (!(signal_ref > 0.0))
        throw ValidationError("add_kspace_noise: signal_ref must be > 0");

    const double sigma = signal_ref / tsnr;
    ComplexVolume out = k;
    for (auto& v : out.data)
        v += std::complex<double>(sigma * rng.normal(), sigma * rng.normal());
    return out;
}

std::pair<ScalarField, MagnitudeVolume> decode_velocity(const ComplexVolume& x,
                                                        double venc) {
    if (!(venc > 0.0)) throw ValidationError("decode_velocity: venc must be > 0");
    ScalarField v = ScalarField::zeros(x.dims);
    MagnitudeVolume m = MagnitudeVolume::filled(x.dims, 0.0f);
    const double s = venc / kPi;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        double phase = std::atan2(x.data[i].imag(), x.data[i].real());
        if (phase <= -kPi) phase = kPi; // arg convention: (-pi, pi]
        v.data[i] = phase * s;
        m.data[i] = static_cast<float>(std::abs(x.data[i]));
    }
    return {std::move(v), std::move(m)};
}

namespace {

// Six-branch correction of the aliased low-venc measurement; returns the
// matched branch index or -1 for the no-correction fallback.
inline double unwrap_one(double lv, double hv, double venc_low, int& branch) {
    const double t1 = 1.2 * venc_low;
    const double t2 = 3.0 * venc_low;
    const double t3 = 5.0 * venc_low;
    const double t4 = 7.0 * venc_low;
    const double d = hv - lv;
    branch = -1;
    double corr = 0.0;
    if (d > t1 && d < t2) {
        corr = 2.0 * venc_low; branch = 0;
    } else if (d > -t2 && d < -t1) {
        corr = -2.0 * venc_low; branch = 1;
    } else if (d >= t2 && d < t3) {
        corr = 4.0 * venc_low; branch = 2;
    } else if (d > -t3 && d <= -t2) {
        corr = -4.0 * venc_low; branch = 3;
    } else if (d >= t3 && d < t4) {
        corr = 6.0 * venc_low; branch = 4;
    } else if (d > -t4 && d <= -t3) {
        corr = -6.0 * venc_low; branch = 5;
    }
    return lv + corr;
}

inline void count_branch(UnwrapBranchCounters* counters, int branch) {
    if (!counters) return;
    if (branch >= 0)
        ++counters->branch[static_cast<std::size_t>(branch)];
    else
        ++counters->none;
}

} // namespace

ScalarField dualvenc_unwrap_component(const ScalarField& v_lv, const ScalarField& v_hv,
                                      double venc_low, UnwrapBranchCounters* counters) {
    require_same_dims(v_lv.dims, v_hv.dims, "dualvenc_unwrap");
    if (!(venc_low > 0.0))
        throw ValidationError("dualvenc_unwrap: venc_low must be > 0");
    ScalarField out = v_lv;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        int branch = -1;
        out.data[i] = unwrap_one(v_lv.data[i], v_hv.data[i], venc_low, branch);
        count_branch(counters, branch);
    }
    return out;
}

VelocityVolume dualvenc_unwrap(const VelocityVolume& v_lv, const VelocityVolume& v_hv,
                               double venc_low, UnwrapBranchCounters* counters) {
    require_same_dims(v_lv.dims, v_hv.dims, "dualvenc_unwrap");
    if (v_lv.nt != v_hv.nt)
        throw ValidationError("dualvenc_unwrap: timestep count mismatch");
    if (!(venc_low > 0.0))
        throw ValidationError("dualvenc_unwrap: venc_low must be > 0");

    VelocityVolume out = v_lv;
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        int branch = -1;
        out.data[i] = static_cast<float>(
            unwrap_one(static_cast<double>(v_lv.data[i]),
                       static_cast<double>(v_hv.data[i]), venc_low, branch));
        count_branch(counters, branch);
    }
    return out;
}

SynthesisResult synthesize(const VelocityVolume& v_hr, const MagnitudeVolume& m,
                           const FluidMask& mask, const AcquisitionConfig& cfg) {
    cfg.validate();
    v_hr.validate();
    require_same_dims(v_hr.dims, m.dims, "synthesize");
    require_same_dims(v_hr.dims, mask.dims, "synthesize");
    const Dims3 d = v_hr.dims;
    if (d.nx % 2 || d.ny % 2 || d.nz % 2)
        throw ValidationError("synthesize: all spatial dims must be even");

    double signal_ref = 0.0;
    if (!cfg.noise_free) {
        const std::size_t nfluid = mask.fluid_count();
        if (nfluid == 0)
            throw ValidationError("synthesize: empty fluid mask, cannot calibrate noise");
        double sum = 0.0;
        for (std::size_t i = 0; i < m.data.size(); ++i)
            if (mask.data[i]) sum += std::fabs(static_cast<double>(m.data[i]));
        signal_ref = sum / static_cast<double>(nfluid);
        if (!(signal_ref > 0.0))
            throw ValidationError("synthesize: zero mean fluid magnitude");
    }

    const Dims3 lo{d.nx / 2, d.ny / 2, d.nz / 2};
    SynthesisResult res;
    res.lr = VelocityVolume::zeros(lo, v_hr.nt, v_hr.spacing_mm * 2.0, v_hr.dt_ms);
    res.snr_log.resize(v_hr.nt);

    for (int t = 0; t < v_hr.nt; ++t) {
        const VencPair vencs = select_vencs(v_hr, t, cfg);

        SnrLogEntry log;
        log.timestep = t;
        if (cfg.noise_free) {
            log.stratum = SnrStratum::NoiseFree;
            log.tsnr = std::numeric_limits<double>::infinity();
        } else {
            Rng stratum_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t), 997));
            const bool high = stratum_rng.bernoulli_half();
            const auto& range = high ? cfg.tsnr_high : cfg.tsnr_low;
            log.stratum = high ? SnrStratum::High : SnrStratum::Low;
            log.tsnr = stratum_rng.uniform(range[0], range[1]);
        }
        res.snr_log[t] = log;

        // Six independent (component, venc channel) jobs per timestep.
        ScalarField decoded[3][2];
#pragma omp parallel for collapse(2) schedule(static)
        for (int c = 0; c < 3; ++c) {
            for (int ch = 0; ch < 2; ++ch) {
                ScalarField comp = ScalarField::zeros(d);
                const float* fr = v_hr.frame(t);
                for (std::size_t i = 0; i < comp.data.size(); ++i)
                    comp.data[i] = static_cast<double>(fr[i * 3 + c]);

                const double venc = ch == 0 ? vencs.venc_low : vencs.venc_high;
                ComplexVolume sig =
                    assemble_complex(m, encode_phase(comp, venc), cfg.magnitude_floor);
                kern::fft3(sig.data.data(), shape_of(d), false, kern::Exec::Serial);
                sig.space = ComplexSpace::KSpace;
                ComplexVolume cropped = crop_kspace(sig, cfg.downsample_factor);
                if (!cfg.noise_free) {
                    Rng noise_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(t),
                                              static_cast<std::uint64_t>(c),
                                              static_cast<std::uint64_t>(ch)));
                    const double tsnr = ch == 0 ? log.tsnr : cfg.tsnr_highvenc;
                    cropped = add_kspace_noise(cropped, tsnr, signal_ref, noise_rng);
                }
                kern::fft3(cropped.data.data(), shape_of(lo), true, kern::Exec::Serial);
                cropped.space = ComplexSpace::Image;
                decoded[c][ch] = decode_velocity(cropped, venc).first;
            }
        }

        float* out_frame = res.lr.frame(t);
        for (int c = 0; c < 3; ++c) {
            const ScalarField dv =
                dualvenc_unwrap_component(decoded[c][0], decoded[c][1], cfg.venc_low);
            for (std::size_t i = 0; i < lo.voxels(); ++i)
                out_frame[i * 3 + c] = static_cast<float>(dv.data[i]);
        }
    }
    return res;
}

} // namespace f4d
