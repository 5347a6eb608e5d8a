#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "f4d/errors.hpp"

namespace f4d {

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Per-voxel region label used by the loss decomposition and the stratified
/// metrics. Boundary voxels are fluid voxels face-adjacent to non-fluid.
enum class Region : std::uint8_t { NonFluid = 0, Boundary = 1, Core = 2 };

struct Dims3 {
    int nx = 0, ny = 0, nz = 0;
    std::size_t voxels() const {
        return static_cast<std::size_t>(nx) * ny * nz;
    }
    bool operator==(const Dims3&) const = default;
};

/// Time-resolved 3-component velocity field (m/s).
/// Storage order is (t, z, y, x, component), component fastest.
struct VelocityVolume {
    Dims3 dims;
    int nt = 0;
    double spacing_mm = 0.0;
    double dt_ms = 0.0;
    std::vector<float> data;

    static VelocityVolume zeros(Dims3 d, int nt, double spacing, double dt);

    std::size_t index(int t, int z, int y, int x, int c) const {
        return (((static_cast<std::size_t>(t) * dims.nz + z) * dims.ny + y) *
                    dims.nx +
                x) * 3 + c;
    }
    float& at(int t, int z, int y, int x, int c) { return data[index(t, z, y, x, c)]; }
    float at(int t, int z, int y, int x, int c) const { return data[index(t, z, y, x, c)]; }

    const float* frame(int t) const { return data.data() + static_cast<std::size_t>(t) * dims.voxels() * 3; }
    float* frame(int t) { return data.data() + static_cast<std::size_t>(t) * dims.voxels() * 3; }

    /// Checks the type invariants (positive dims/spacing/dt, finite data).
    void validate() const;
};

/// Scalar signal intensity volume (arbitrary scanner units).
struct MagnitudeVolume {
    Dims3 dims;
    std::vector<float> data;

    static MagnitudeVolume filled(Dims3 d, float value);
    std::size_t index(int z, int y, int x) const {
        return (static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x;
    }
    float& at(int z, int y, int x) { return data[index(z, y, x)]; }
    float at(int z, int y, int x) const { return data[index(z, y, x)]; }
    void validate() const;
};

enum class ComplexSpace : std::uint8_t { Image = 0, KSpace = 1 };

/// Complex-valued volume; either an image-space signal or its DFT.
struct ComplexVolume {
    Dims3 dims;
    ComplexSpace space = ComplexSpace::Image;
    std::vector<std::complex<double>> data;

    static ComplexVolume zeros(Dims3 d, ComplexSpace space);
    std::size_t index(int z, int y, int x) const {
        return (static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x;
    }
    std::complex<double>& at(int z, int y, int x) { return data[index(z, y, x)]; }
    const std::complex<double>& at(int z, int y, int x) const { return data[index(z, y, x)]; }
};

struct FluidMask {
    Dims3 dims;
    std::vector<std::uint8_t> data; // 1 = fluid

    static FluidMask filled(Dims3 d, bool value);
    std::size_t index(int z, int y, int x) const {
        return (static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x;
    }
    bool at(int z, int y, int x) const { return data[index(z, y, x)] != 0; }
    void set(int z, int y, int x, bool v) { data[index(z, y, x)] = v ? 1 : 0; }
    std::size_t fluid_count() const;
};

struct RegionLabels {
    Dims3 dims;
    std::vector<std::uint8_t> data; // Region values

    Region at(int z, int y, int x) const {
        return static_cast<Region>(
            data[(static_cast<std::size_t>(z) * dims.ny + y) * dims.nx + x]);
    }
    std::size_t count(Region r) const;
};

/// Splits a fluid mask into Core (survives one 6-connected binary erosion,
/// faces padded non-fluid) and Boundary (fluid minus Core).
/// Requires every axis >= 3.
RegionLabels decompose_regions(const FluidMask& mask);

/// Rotates a spatially cubic velocity field by 90/180/270 degrees about a
/// grid axis. Both the voxel grid and the velocity vectors are rotated, so
/// per-voxel speeds are preserved exactly (components are only permuted and
/// negated). A rotation composed with its inverse is the identity bit-for-bit.
VelocityVolume rotate_field(const VelocityVolume& v, Axis axis, int angle_deg);

/// Destination (x,y,z) of a voxel under one +90 degree right-handed rotation
/// about `axis` in an n^3 grid (cyclic x->y->z convention).
inline std::array<int, 3> rotate_index90(int n, Axis axis, int x, int y, int z) {
    switch (axis) {
    case Axis::X: return {x, (n - 1) - z, y};
    case Axis::Y: return {z, y, (n - 1) - x};
    default:      return {(n - 1) - y, x, z};
    }
}

/// Vector transform of the same rotation.
inline std::array<float, 3> rotate_vector90(Axis axis, float vx, float vy, float vz) {
    switch (axis) {
    case Axis::X: return {vx, -vz, vy};
    case Axis::Y: return {vz, vy, -vx};
    default:      return {-vy, vx, vz};
    }
}

} // namespace f4d
