#include "f4d/patching.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

namespace f4d {

int PatchPair::fluid_count() const {
    int n = 0;
    for (auto l : labels_hr)
        n += (l != static_cast<std::uint8_t>(Region::NonFluid)) ? 1 : 0;
    return n;
}

std::vector<std::uint8_t> PatchPair::mask_hr() const {
    std::vector<std::uint8_t> m(labels_hr.size());
    for (std::size_t i = 0; i < m.size(); ++i)
        m[i] = labels_hr[i] != static_cast<std::uint8_t>(Region::NonFluid) ? 1 : 0;
    return m;
}

namespace {

// Copies a cubic window of a velocity frame into (z,y,x,c) patch storage.
void copy_window(const float* frame, Dims3 dims, std::array<int, 3> origin, int n,
                 std::vector<float>& out) {
    out.resize(static_cast<std::size_t>(n) * n * n * 3);
    std::size_t w = 0;
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y) {
            const std::size_t base =
                ((static_cast<std::size_t>(origin[2] + z) * dims.ny + origin[1] + y) *
                     dims.nx +
                 origin[0]) * 3;
            for (int i = 0; i < n * 3; ++i) out[w++] = frame[base + i];
        }
}

} // namespace

std::vector<PatchPair> extract_pairs(const VelocityVolume& v_hr,
                                     const VelocityVolume& v_lr,
                                     const FluidMask& mask_hr, int count, Rng& rng) {
    if (count < 1) throw ValidationError("extract_pairs: count must be >= 1");
    const Dims3 hd = v_hr.dims;
    const Dims3 ld = v_lr.dims;
    if (hd.nx != 2 * ld.nx || hd.ny != 2 * ld.ny || hd.nz != 2 * ld.nz)
        throw ValidationError("extract_pairs: HR dims must be exactly 2x LR dims");
    if (!(mask_hr.dims == hd))
        throw ValidationError("extract_pairs: mask dims must match HR dims");
    if (v_hr.nt != v_lr.nt)
        throw ValidationError("extract_pairs: timestep count mismatch");
    if (ld.nx < kPatchLr || ld.ny < kPatchLr || ld.nz < kPatchLr)
        throw ValidationError("extract_pairs: LR volume smaller than a patch");

    const RegionLabels labels = decompose_regions(mask_hr);

    const int rx = ld.nx - kPatchLr + 1;
    const int ry = ld.ny - kPatchLr + 1;
    const int rz = ld.nz - kPatchLr + 1;

    std::vector<PatchPair> pairs;
    pairs.reserve(count);
    int rejections = 0;
    while (static_cast<int>(pairs.size()) < count) {
        std::array<int, 3> o{static_cast<int>(rng.below(rx)),
                             static_cast<int>(rng.below(ry)),
                             static_cast<int>(rng.below(rz))};
        const int t = static_cast<int>(rng.below(v_hr.nt));
        const std::array<int, 3> ho{2 * o[0], 2 * o[1], 2 * o[2]};

        int fluid = 0;
        for (int z = 0; z < kPatchHr; ++z)
            for (int y = 0; y < kPatchHr; ++y)
                for (int x = 0; x < kPatchHr; ++x)
                    fluid += mask_hr.at(ho[2] + z, ho[1] + y, ho[0] + x) ? 1 : 0;
        if (fluid < kMinFluidVoxels) {
            if (++rejections >= 10000)
                throw ValidationError(
                    "extract_pairs: no patch met the fluid threshold after 10000 "
                    "rejections");
            continue;
        }
        rejections = 0;

        PatchPair p;
        p.origin = o;
        p.timestep = t;
        copy_window(v_hr.frame(t), hd, ho, kPatchHr, p.x_hr);
        copy_window(v_lr.frame(t), ld, o, kPatchLr, p.x_lr);
        p.labels_hr.resize(static_cast<std::size_t>(kPatchHr) * kPatchHr * kPatchHr);
        std::size_t w = 0;
        for (int z = 0; z < kPatchHr; ++z)
            for (int y = 0; y < kPatchHr; ++y)
                for (int x = 0; x < kPatchHr; ++x)
                    p.labels_hr[w++] = static_cast<std::uint8_t>(
                        labels.at(ho[2] + z, ho[1] + y, ho[0] + x));
        pairs.push_back(std::move(p));
    }
    return pairs;
}

namespace {

std::vector<float> rotate_patch_field90(const std::vector<float>& in, int n, Axis axis) {
    std::vector<float> out(in.size());
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const std::size_t src =
                    ((static_cast<std::size_t>(z) * n + y) * n + x) * 3;
                const auto d = rotate_index90(n, axis, x, y, z);
                const auto w =
                    rotate_vector90(axis, in[src], in[src + 1], in[src + 2]);
                const std::size_t dst =
                    ((static_cast<std::size_t>(d[2]) * n + d[1]) * n + d[0]) * 3;
                out[dst] = w[0];
                out[dst + 1] = w[1];
                out[dst + 2] = w[2];
            }
    return out;
}

std::vector<std::uint8_t> rotate_patch_labels90(const std::vector<std::uint8_t>& in,
                                                int n, Axis axis) {
    std::vector<std::uint8_t> out(in.size());
    for (int z = 0; z < n; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                const auto d = rotate_index90(n, axis, x, y, z);
                out[(static_cast<std::size_t>(d[2]) * n + d[1]) * n + d[0]] =
                    in[(static_cast<std::size_t>(z) * n + y) * n + x];
            }
    return out;
}

} // namespace

std::vector<PatchPair> augment(const PatchPair& pair) {
    std::vector<PatchPair> out;
    out.reserve(10);
    out.push_back(pair);
    for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
        PatchPair r = pair; // rotated copies inherit the source origin
        for (int turn = 0; turn < 3; ++turn) {
            r.x_hr = rotate_patch_field90(r.x_hr, kPatchHr, axis);
            r.x_lr = rotate_patch_field90(r.x_lr, kPatchLr, axis);
            r.labels_hr = rotate_patch_labels90(r.labels_hr, kPatchHr, axis);
            out.push_back(r);
        }
    }
    return out;
}

TilePlan plan_tiles(Dims3 lr_dims) {
    if (lr_dims.nx < kPatchLr || lr_dims.ny < kPatchLr || lr_dims.nz < kPatchLr)
        throw ValidationError("plan_tiles: every LR dim must be >= " +
                              std::to_string(kPatchLr));

    TilePlan plan;
    plan.lr_dims = lr_dims;
    const int dims[3] = {lr_dims.nx, lr_dims.ny, lr_dims.nz};
    // Retained-window cuts per axis. Interior cuts sit at the end of the
    // previous tile's central window (= its origin*2 + 20); with the regular
    // stride of 8 that is exactly the next tile's central start.
    std::vector<int> cuts[3];
    for (int a = 0; a < 3; ++a) {
        auto& org = plan.origins[a];
        for (int o = 0; o + kPatchLr <= dims[a]; o += kTileStride) org.push_back(o);
        if (org.back() + kPatchLr < dims[a]) org.push_back(dims[a] - kPatchLr);
        cuts[a].push_back(0);
        for (std::size_t j = 1; j < org.size(); ++j)
            cuts[a].push_back(2 * org[j - 1] + kPatchHr - 4); // end of central 16^3
        cuts[a].push_back(2 * dims[a]);
    }

    for (std::size_t iz = 0; iz < plan.origins[2].size(); ++iz)
        for (std::size_t iy = 0; iy < plan.origins[1].size(); ++iy)
            for (std::size_t ix = 0; ix < plan.origins[0].size(); ++ix) {
                Tile t;
                t.lr_origin = {plan.origins[0][ix], plan.origins[1][iy],
                               plan.origins[2][iz]};
                t.hr_keep_begin = {cuts[0][ix], cuts[1][iy], cuts[2][iz]};
                t.hr_keep_end = {cuts[0][ix + 1], cuts[1][iy + 1], cuts[2][iz + 1]};
                plan.tiles.push_back(t);
            }
    return plan;
}

std::vector<float> stitch(const TilePlan& plan,
                          const std::vector<std::vector<float>>& tile_outputs) {
    if (tile_outputs.size() != plan.tiles.size())
        throw ValidationError("stitch: expected " +
                              std::to_string(plan.tiles.size()) + " tiles, got " +
                              std::to_string(tile_outputs.size()));
    const std::size_t tile_len =
        static_cast<std::size_t>(kPatchHr) * kPatchHr * kPatchHr * 3;
    const Dims3 hr{2 * plan.lr_dims.nx, 2 * plan.lr_dims.ny, 2 * plan.lr_dims.nz};
    std::vector<float> out(hr.voxels() * 3, 0.0f);

    for (std::size_t i = 0; i < plan.tiles.size(); ++i) {
        if (tile_outputs[i].size() != tile_len)
            throw ValidationError("stitch: tile " + std::to_string(i) +
                                  " has wrong size");
        const Tile& t = plan.tiles[i];
        const int hx = 2 * t.lr_origin[0];
        const int hy = 2 * t.lr_origin[1];
        const int hz = 2 * t.lr_origin[2];
        for (int z = t.hr_keep_begin[2]; z < t.hr_keep_end[2]; ++z)
            for (int y = t.hr_keep_begin[1]; y < t.hr_keep_end[1]; ++y) {
                const int x0 = t.hr_keep_begin[0];
                const int len = t.hr_keep_end[0] - x0;
                const std::size_t src =
                    ((static_cast<std::size_t>(z - hz) * kPatchHr + (y - hy)) *
                         kPatchHr +
                     (x0 - hx)) * 3;
                const std::size_t dst =
                    ((static_cast<std::size_t>(z) * hr.ny + y) * hr.nx + x0) * 3;
                std::memcpy(&out[dst], &tile_outputs[i][src],
                            sizeof(float) * static_cast<std::size_t>(len) * 3);
            }
    }
    return out;
}

} // namespace f4d
