#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "f4d/losses.hpp"
#include "f4d/nets.hpp"
#include "f4d/patching.hpp"

namespace f4d::train {

struct TrainConfig {
    int epochs_stage1 = 20;
    int epochs_stage2 = 20;
    int batch_size = 8;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    bool disc_only = false; ///< trains the discriminator with lambda_g forced to 0
    loss::LossConfig loss;
    net::GeneratorSpec gen;
    net::DiscriminatorSpec disc;

    void validate() const;
    double effective_lambda_g() const { return disc_only ? 0.0 : loss.lambda_g; }
};

struct Dataset {
    std::vector<PatchPair> train;
    std::vector<PatchPair> val;
};

struct EpochRecord {
    int epoch = 0; ///< global index (stage 2 continues stage 1 numbering)
    int stage = 1;
    loss::LossReport train;
    loss::LossReport val;
    double train_mre = 0.0; ///< percent, fluid voxels
    double val_mre = 0.0;
};

struct StageResult {
    net::ParamSet gen;
    net::ParamSet disc; ///< empty after stage 1
    net::AdamState gen_adam;
    std::vector<EpochRecord> log;
};

/// Stage 1: generator only, data-matching terms plus L2; adversarial terms
/// are never evaluated.
StageResult train_stage1(const TrainConfig& cfg, const Dataset& data);

/// Stage 2: alternating one discriminator step and one generator step per
/// batch. The discriminator sees raw HR patches and non-fluid-masked SR
/// patches. The generator's Adam state carries over from stage 1 (pass
/// nullptr for a fresh optimizer); the discriminator optimizer starts fresh.
/// With lambda_g = 0 the generator trajectory is bit-identical to continued
/// stage-1 training.
StageResult train_stage2(const TrainConfig& cfg, const Dataset& data,
                         const net::ParamSet& gen_init,
                         const net::AdamState* gen_adam_init);

/// Data-matching part of a validation LossReport (what "stabilization to the
/// generator-only baseline" is measured on).
inline double data_loss(const loss::LossReport& r) {
    return r.mse_nonfluid + r.mse_bound + r.mse_core;
}

// ---- training-log CSV --------------------------------------------------------

std::string train_log_header();
void append_epoch_rows(std::string& csv, const EpochRecord& rec,
                       loss::Variant variant);

// ---- stability experiment grid -------------------------------------------------

struct StabilityCell {
    loss::Variant variant;
    double lambda_g = 0.0;
    std::string lambda_label; ///< echoed verbatim in the report
};

struct StabilityRow {
    StabilityCell cell;
    double final_train_mre = 0.0;
    double final_val_mre = 0.0;
    double best_val_mre = 0.0;
    double final_val_data_loss = 0.0;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    std::vector<StageResult> runs; ///< one per cell, same order
    StageResult warm_start;        ///< shared stage-1 run

    std::string summary_csv() const;
};

/// Runs stage 2 for every (variant, lambda_g) cell from one shared stage-1
/// warm start.
StabilityReport run_stability_suite(const TrainConfig& base, const Dataset& data,
                                    const std::vector<StabilityCell>& grid);

} // namespace f4d::train
