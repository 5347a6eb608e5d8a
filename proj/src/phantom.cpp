#include "f4d/phantom.hpp"

#include <algorithm>
#include <cmath>

namespace f4d {

void PhantomSpec::validate() const {
    if (dims.nx < 1 || dims.ny < 1 || dims.nz < 1 || nt < 1)
        throw ValidationError("phantom: dims and nt must be >= 1");
    if (!(spacing_mm > 0.0) || !(dt_ms > 0.0))
        throw ValidationError("phantom: spacing and dt must be > 0");
    if (!(tube_radius_mm > 0.0))
        throw ValidationError("phantom: tube_radius must be > 0");
    if (!(v_peak > 0.0)) throw ValidationError("phantom: v_peak must be > 0");
    if (static_cast<int>(waveform.size()) != nt)
        throw ValidationError("phantom: waveform length must equal nt");
    bool has_peak = false;
    for (double w : waveform) {
        if (w < 0.0 || w > 1.0)
            throw ValidationError("phantom: waveform entries must lie in [0,1]");
        if (w == 1.0) has_peak = true;
    }
    if (!has_peak)
        throw ValidationError("phantom: waveform must contain an entry equal to 1");
    if (m_vessel < 0.0 || m_background < 0.0)
        throw ValidationError("phantom: magnitude intensities must be >= 0");

    // The tube cross-section (center +- R) must fit inside the transverse
    // extent of the volume.
    int na, nb;
    switch (tube_axis) {
    case Axis::X: na = dims.ny; nb = dims.nz; break;
    case Axis::Y: na = dims.nz; nb = dims.nx; break;
    default:      na = dims.nx; nb = dims.ny; break;
    }
    const double ca = 0.5 * na * spacing_mm + offset_a_mm;
    const double cb = 0.5 * nb * spacing_mm + offset_b_mm;
    if (ca - tube_radius_mm < 0.0 || ca + tube_radius_mm > na * spacing_mm ||
        cb - tube_radius_mm < 0.0 || cb + tube_radius_mm > nb * spacing_mm)
        throw ValidationError("phantom: tube does not fit inside the volume");
}

PhantomVolumes make_phantom(const PhantomSpec& spec) {
    spec.validate();
    const Dims3 d = spec.dims;

    PhantomVolumes out{
        VelocityVolume::zeros(d, spec.nt, spec.spacing_mm, spec.dt_ms),
        MagnitudeVolume::filled(d, static_cast<float>(spec.m_background)),
        FluidMask::filled(d, false)};

    // Transverse axes (a, b) and the axial component index per tube axis.
    const int axial = static_cast<int>(spec.tube_axis);
    int na, nb;
    switch (spec.tube_axis) {
    case Axis::X: na = d.ny; nb = d.nz; break;
    case Axis::Y: na = d.nz; nb = d.nx; break;
    default:      na = d.nx; nb = d.ny; break;
    }
    const double ca = 0.5 * na * spec.spacing_mm + spec.offset_a_mm;
    const double cb = 0.5 * nb * spec.spacing_mm + spec.offset_b_mm;
    const double r2max = spec.tube_radius_mm * spec.tube_radius_mm;

    for (int z = 0; z < d.nz; ++z) {
        for (int y = 0; y < d.ny; ++y) {
            for (int x = 0; x < d.nx; ++x) {
                double ia, ib;
                switch (spec.tube_axis) {
                case Axis::X: ia = y; ib = z; break;
                case Axis::Y: ia = z; ib = x; break;
                default:      ia = x; ib = y; break;
                }
                const double pa = (ia + 0.5) * spec.spacing_mm - ca;
                const double pb = (ib + 0.5) * spec.spacing_mm - cb;
                const double r2 = pa * pa + pb * pb;
                if (r2 < r2max) {
                    out.mask.set(z, y, x, true);
                    out.magnitude.at(z, y, x) = static_cast<float>(spec.m_vessel);
                    const double profile = spec.v_peak * (1.0 - r2 / r2max);
                    for (int t = 0; t < spec.nt; ++t)
                        out.velocity.at(t, z, y, x, axial) =
                            static_cast<float>(spec.waveform[t] * profile);
                }
            }
        }
    }
    return out;
}

int peak_systole_index(const PhantomSpec& spec) {
    if (spec.waveform.empty())
        throw ValidationError("peak_systole_index: empty waveform");
    const auto it = std::max_element(spec.waveform.begin(), spec.waveform.end());
    return static_cast<int>(it - spec.waveform.begin());
}

} // namespace f4d
