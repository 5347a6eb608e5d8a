#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "f4d/rng.hpp"
#include "f4d/volume.hpp"

namespace f4d {

/// Scalar field over a 3D grid, used for phases and per-component velocities
/// during acquisition simulation (64-bit working precision).
struct ScalarField {
    Dims3 dims;
    std::vector<double> data;

    static ScalarField zeros(Dims3 d) { return {d, std::vector<double>(d.voxels(), 0.0)}; }
    double& at(int z, int y, int x) {
        return data[(static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x];
    }
    double at(int z, int y, int x) const {
        return data[(static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x];
    }
};

enum class SnrStratum : std::uint8_t { High = 0, Low = 1, NoiseFree = 2 };

struct SnrLogEntry {
    int timestep = 0;
    SnrStratum stratum = SnrStratum::NoiseFree;
    double tsnr = 0.0; ///< low-venc channel TSNR (inf when noise free)
};

struct AcquisitionConfig {
    double venc_low = 0.5;                  // m/s
    std::array<double, 2> tsnr_high{8.0, 12.0};
    std::array<double, 2> tsnr_low{2.0, 6.0};
    double tsnr_highvenc = 15.0;
    double magnitude_floor = 30.0;
    int downsample_factor = 2;
    std::uint64_t seed = 0;
    bool noise_free = false;

    void validate() const;
};

struct VencPair {
    double venc_low = 0.0;
    double venc_high = 0.0;
};

/// Picks the per-timestep venc pair: venc_high is the largest absolute
/// velocity component of the frame when that exceeds 2*venc_low, else
/// 2*venc_low.
VencPair select_vencs(const VelocityVolume& v, int t, const AcquisitionConfig& cfg);

/// phi = (v / venc) * pi, no wrapping applied.
ScalarField encode_phase(const ScalarField& v, double venc);

/// m * exp(i*phi) per voxel; magnitudes strictly below `magnitude_floor` are
/// zeroed first.
ComplexVolume assemble_complex(const MagnitudeVolume& m, const ScalarField& phase,
                               double magnitude_floor);

/// Orthonormal 3D DFT and inverse.
ComplexVolume fft3(const ComplexVolume& x);
ComplexVolume ifft3(const ComplexVolume& x);

/// Retains the centered half-size block of DC-centered k-space, rescaled by
/// 1/sqrt(8) so band-limited image intensities are preserved under the
/// orthonormal convention. All dims must be even; factor must be 2.
ComplexVolume crop_kspace(const ComplexVolume& k, int factor = 2);

/// Adds zero-mean Gaussian noise with std signal_ref/tsnr to the real and
/// imaginary part of every sample (the same std holds in image space under
/// the orthonormal transform).
ComplexVolume add_kspace_noise(const ComplexVolume& k, double tsnr,
                               double signal_ref, Rng& rng);

/// v = arg(x) * venc / pi with arg in (-pi, pi]; also returns |x|.
std::pair<ScalarField, MagnitudeVolume> decode_velocity(const ComplexVolume& x,
                                                        double venc);

/// Hit counters for the six correction branches of the dual-venc
/// reconstruction plus the no-correction fallback.
struct UnwrapBranchCounters {
    std::array<std::uint64_t, 6> branch{};
    std::uint64_t none = 0;
};

/// Dual-venc phase unwrapping: applies the six-branch correction with
/// thresholds t1=1.2, t2=3, t3=5, t4=7 (times venc_low) to d = v_hv - v_lv,
/// component-wise. Voxels matching no branch keep the low-venc value.
VelocityVolume dualvenc_unwrap(const VelocityVolume& v_lv, const VelocityVolume& v_hv,
                               double venc_low, UnwrapBranchCounters* counters = nullptr);

/// Full-precision unwrap of one velocity component (the path synthesize
/// uses between decode and the final volume).
ScalarField dualvenc_unwrap_component(const ScalarField& v_lv, const ScalarField& v_hv,
                                      double venc_low,
                                      UnwrapBranchCounters* counters = nullptr);

struct SynthesisResult {
    VelocityVolume lr;
    std::vector<SnrLogEntry> snr_log;
};

/// Full acquisition pipeline: per timestep and velocity component, encode at
/// both vencs, transform to k-space, centrally crop by 2, add calibrated
/// noise (low-venc channel at a TSNR drawn from the high or low stratum,
/// high-venc channel at the fixed high-venc TSNR), return to image space,
/// decode, and dual-venc unwrap. Deterministic for a fixed cfg.seed.
SynthesisResult synthesize(const VelocityVolume& v_hr, const MagnitudeVolume& m,
                           const FluidMask& mask, const AcquisitionConfig& cfg);

} // namespace f4d
