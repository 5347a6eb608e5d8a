#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "f4d/rng.hpp"
#include "f4d/volume.hpp"

namespace f4d {

inline constexpr int kPatchHr = 24; ///< HR patch edge (voxels)
inline constexpr int kPatchLr = 12; ///< LR patch edge (voxels)
inline constexpr int kTileStride = 8;

/// Minimum fluid voxels for a patch to be kept: floor(0.05 * 24^3).
inline constexpr int kMinFluidVoxels = static_cast<int>(0.05 * kPatchHr * kPatchHr * kPatchHr);

/// Aligned HR/LR training pair. The HR patch spans exactly the 2x upsampled
/// extent of the LR patch: HR origin = 2 * LR origin.
struct PatchPair {
    std::array<int, 3> origin{}; ///< LR voxel coordinates (x, y, z)
    int timestep = 0;
    std::vector<float> x_hr;       ///< 24^3 x 3, (z,y,x,c) order
    std::vector<float> x_lr;       ///< 12^3 x 3
    std::vector<std::uint8_t> labels_hr; ///< 24^3 Region values

    int fluid_count() const;
    /// Fluid mask derived from the labels (Boundary or Core).
    std::vector<std::uint8_t> mask_hr() const;
};

/// Uniformly samples `count` valid patch pairs (random LR origin and
/// timestep), rejecting candidates below the fluid threshold. Throws after
/// 10^4 consecutive rejections.
std::vector<PatchPair> extract_pairs(const VelocityVolume& v_hr,
                                     const VelocityVolume& v_lr,
                                     const FluidMask& mask_hr, int count, Rng& rng);

/// The pair itself plus nine rotated copies (3 axes x 3 angles), HR and LR
/// rotated consistently.
std::vector<PatchPair> augment(const PatchPair& pair);

struct Tile {
    std::array<int, 3> lr_origin{};
    std::array<int, 3> hr_keep_begin{}; ///< retained HR window (absolute, inclusive)
    std::array<int, 3> hr_keep_end{};   ///< exclusive
};

/// Inference tiling: LR origins at stride 8 per axis (last origin clamped to
/// the volume edge); the retained HR windows partition the output exactly.
struct TilePlan {
    Dims3 lr_dims;
    std::vector<int> origins[3]; ///< per-axis origin lists
    std::vector<Tile> tiles;     ///< row-major over (z, y, x) origin indices
};

TilePlan plan_tiles(Dims3 lr_dims);

/// Writes each tile's retained window of its 24^3 x 3 prediction into a
/// single HR frame (2x the LR dims). Every output voxel is written exactly
/// once.
std::vector<float> stitch(const TilePlan& plan,
                          const std::vector<std::vector<float>>& tile_outputs);

} // namespace f4d
