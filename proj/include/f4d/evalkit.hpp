#pragma once

#include <array>
#include <string>
#include <vector>

#include "f4d/mrsim.hpp"
#include "f4d/nets.hpp"
#include "f4d/patching.hpp"
#include "f4d/rng.hpp"
#include "f4d/volume.hpp"

namespace f4d::eval {

enum class SnrScope { All = 0, High = 1, Low = 2 };
enum class TimeScope { FullCycle = 0, PeakSystole = 1 };

std::string snr_scope_name(SnrScope s);
std::string time_scope_name(TimeScope t);

/// Metrics for one (region, SNR, time) stratum. Degenerate sub-metrics
/// (zero reference maximum or zero variance) are NaN and exported as absent.
struct StratumMetrics {
    Region region = Region::Boundary;
    SnrScope snr = SnrScope::All;
    TimeScope time = TimeScope::FullCycle;
    bool present = false; ///< false when the stratum has no fluid voxels
    std::size_t n_voxels = 0;
    double mre = 0.0;    ///< percent
    double mae = 0.0;    ///< m/s
    double vnrmse = 0.0;
    double de = 0.0;     ///< percent
    std::array<double, 3> k{};  ///< regression slope per component (SR on HR)
    std::array<double, 3> r2{}; ///< coefficient of determination per component
};

struct MetricsReport {
    std::vector<StratumMetrics> rows; ///< 2 regions x 3 SNR x 2 time scopes

    const StratumMetrics& at(Region r, SnrScope s, TimeScope t) const;
};

/// Stratified error metrics between a super-resolved and a reference volume.
/// High/Low SNR strata keep only frames whose logged TSNR falls in [10,12]
/// and [2,4] respectively; every frame counts toward All.
MetricsReport compute_metrics(const VelocityVolume& v_sr, const VelocityVolume& v_hr,
                              const RegionLabels& labels,
                              const std::vector<SnrLogEntry>& snr_log,
                              int peak_index);

/// One row per stratum; absent strata/metrics exported as NA. Numeric fields
/// are full-precision decimals, so parsing the CSV recovers them exactly.
std::string report_csv(const MetricsReport& report, const std::string& model_label);

enum class Tap { Middle = 0, End = 1 };

struct FeatureSample {
    Tap tap = Tap::Middle;
    int patch_id = 0;
    std::vector<float> features;
};

/// Flattened generator activations for `count` patches sampled uniformly
/// with replacement. Middle taps the features entering the upsampler; End
/// taps the features entering the component branches.
std::vector<FeatureSample> extract_features(const net::ParamSet& params,
                                            const net::GeneratorSpec& spec,
                                            const std::vector<PatchPair>& patches,
                                            Tap tap, int count, Rng& rng);

struct PcaResult {
    std::vector<std::array<double, 2>> projections; ///< per sample
    std::array<double, 2> fractions{};              ///< explained variance
    std::vector<double> mean;
    std::array<std::vector<double>, 2> components;
};

/// Top-2 principal components via deflated power iteration (no covariance
/// matrix is materialized). Zero-variance input yields zero projections and
/// fractions (0,0).
PcaResult pca_project(const std::vector<FeatureSample>& samples);

std::string pca_csv(const std::vector<FeatureSample>& samples, const PcaResult& pca);

} // namespace f4d::eval
