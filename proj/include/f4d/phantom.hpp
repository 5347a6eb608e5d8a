#pragma once

#include <tuple>
#include <vector>

#include "f4d/volume.hpp"

namespace f4d {

/// Analytic straight-tube flow phantom: a parabolic (Poiseuille) axial
/// profile scaled by a per-timestep waveform. Substitutes for CFD input and
/// gives exactly checkable fields.
struct PhantomSpec {
    Dims3 dims{32, 32, 32};
    int nt = 8;
    double spacing_mm = 0.5;
    double dt_ms = 10.0;

    double tube_radius_mm = 5.0;
    Axis tube_axis = Axis::Z;
    double offset_a_mm = 0.0; ///< centerline offset along the first transverse axis
    double offset_b_mm = 0.0; ///< centerline offset along the second transverse axis

    double v_peak = 1.5; ///< peak centerline velocity at waveform = 1 (m/s)
    std::vector<double> waveform; ///< per-timestep scale factors in [0,1], max = 1

    double m_vessel = 100.0;
    double m_background = 20.0;

    void validate() const;
};

struct PhantomVolumes {
    VelocityVolume velocity;
    MagnitudeVolume magnitude;
    FluidMask mask;
};

/// Generates the phantom. A voxel is fluid when its center lies strictly
/// inside the tube radius; axial velocity there is
/// waveform[t] * v_peak * (1 - (r/R)^2), transverse components are zero.
PhantomVolumes make_phantom(const PhantomSpec& spec);

/// First timestep at which the waveform attains its maximum.
int peak_systole_index(const PhantomSpec& spec);

} // namespace f4d
