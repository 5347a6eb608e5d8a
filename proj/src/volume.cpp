#include "f4d/volume.hpp"

#include <cmath>
#include <string>

namespace f4d {

VelocityVolume VelocityVolume::zeros(Dims3 d, int nt, double spacing, double dt) {
    VelocityVolume v;
    v.dims = d;
    v.nt = nt;
    v.spacing_mm = spacing;
    v.dt_ms = dt;
    v.data.assign(d.voxels() * 3 * static_cast<std::size_t>(nt), 0.0f);
    return v;
}

void VelocityVolume::validate() const {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1 || nt < 1)
        throw ValidationError("velocity volume: dims and nt must be >= 1");
    if (!(spacing_mm > 0.0) || !(dt_ms > 0.0))
        throw ValidationError("velocity volume: spacing and dt must be > 0");
    if (data.size() != dims.voxels() * 3 * static_cast<std::size_t>(nt))
        throw ValidationError("velocity volume: payload size mismatch");
    for (float f : data)
        if (!std::isfinite(f))
            throw NumericError("velocity volume: non-finite component");
}

MagnitudeVolume MagnitudeVolume::filled(Dims3 d, float value) {
    MagnitudeVolume m;
    m.dims = d;
    m.data.assign(d.voxels(), value);
    return m;
}

void MagnitudeVolume::validate() const {
    if (data.size() != dims.voxels())
        throw ValidationError("magnitude volume: payload size mismatch");
    for (float f : data) {
        if (!std::isfinite(f)) throw NumericError("magnitude volume: non-finite value");
        if (f < 0.0f) throw ValidationError("magnitude volume: negative intensity");
    }
}

ComplexVolume ComplexVolume::zeros(Dims3 d, ComplexSpace space) {
    ComplexVolume c;
    c.dims = d;
    c.space = space;
    c.data.assign(d.voxels(), {0.0, 0.0});
    return c;
}

FluidMask FluidMask::filled(Dims3 d, bool value) {
    FluidMask m;
    m.dims = d;
    m.data.assign(d.voxels(), value ? 1 : 0);
    return m;
}

std::size_t FluidMask::fluid_count() const {
    std::size_t n = 0;
    for (auto b : data) n += b ? 1 : 0;
    return n;
}

std::size_t RegionLabels::count(Region r) const {
    std::size_t n = 0;
    for (auto b : data) n += (b == static_cast<std::uint8_t>(r)) ? 1 : 0;
    return n;
}

RegionLabels decompose_regions(const FluidMask& mask) {
    const Dims3 d = mask.dims;
    if (d.nx < 3 || d.ny < 3 || d.nz < 3)
        throw ValidationError("decompose_regions: every axis must be >= 3, got " +
                              std::to_string(d.nx) + "x" + std::to_string(d.ny) +
                              "x" + std::to_string(d.nz));

    RegionLabels lab;
    lab.dims = d;
    lab.data.assign(d.voxels(), static_cast<std::uint8_t>(Region::NonFluid));

    auto fluid_at = [&](int z, int y, int x) -> bool {
        if (x < 0 || y < 0 || z < 0 || x >= d.nx || y >= d.ny || z >= d.nz)
            return false; // erosion pads with non-fluid
        return mask.at(z, y, x);
    };

    for (int z = 0; z < d.nz; ++z) {
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) {
                if (!mask.at(z, y, x)) continue;
                const bool core = fluid_at(z, y, x - 1) && fluid_at(z, y, x + 1) &&
                                  fluid_at(z, y - 1, x) && fluid_at(z, y + 1, x) &&
                                  fluid_at(z - 1, y, x) && fluid_at(z + 1, y, x);
                lab.data[mask.index(z, y, x)] =
                    static_cast<std::uint8_t>(core ? Region::Core : Region::Boundary);
            }
        }
    }
    return lab;
}

namespace {

VelocityVolume rotate90_once(const VelocityVolume& v, Axis axis) {
    const int n = v.dims.nx;
    VelocityVolume out = VelocityVolume::zeros(v.dims, v.nt, v.spacing_mm, v.dt_ms);

    for (int t = 0; t < v.nt; ++t) {
        for (int z = 0; z < n; ++z) {
            for (int y = 0; y < n; ++y) {
                for (int x = 0; x < n; ++x) {
                    const auto dst = rotate_index90(n, axis, x, y, z);
                    const auto w = rotate_vector90(axis, v.at(t, z, y, x, 0),
                                                   v.at(t, z, y, x, 1),
                                                   v.at(t, z, y, x, 2));
                    out.at(t, dst[2], dst[1], dst[0], 0) = w[0];
                    out.at(t, dst[2], dst[1], dst[0], 1) = w[1];
                    out.at(t, dst[2], dst[1], dst[0], 2) = w[2];
                }
            }
        }
    }
    return out;
}

} // namespace

VelocityVolume rotate_field(const VelocityVolume& v, Axis axis, int angle_deg) {
    if (v.dims.nx != v.dims.ny || v.dims.ny != v.dims.nz)
        throw ValidationError("rotate_field: volume must be spatially cubic");
    if (angle_deg != 90 && angle_deg != 180 && angle_deg != 270)
        throw ValidationError("rotate_field: angle must be 90, 180 or 270 degrees");

    VelocityVolume out = rotate90_once(v, axis);
    for (int turns = angle_deg / 90 - 1; turns > 0; --turns)
        out = rotate90_once(out, axis);
    return out;
}

} // namespace f4d
