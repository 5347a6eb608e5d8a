#pragma once

#include <complex>
#include <cstddef>

namespace f4d::kern {

/// Execution policy for the compute kernels. Every kernel has a serial
/// reference path and an OpenMP path that produce bit-identical results:
/// parallelism is only ever over independent output elements, and each
/// element's reduction runs in a fixed serial order.
enum class Exec { Serial, Par };

struct Shape3 {
    int d = 0, h = 0, w = 0; // slowest to fastest varying
    std::size_t voxels() const {
        return static_cast<std::size_t>(d) * h * w;
    }
};

/// Output spatial size of a 3D convolution along one axis.
inline int conv_out_dim(int in, int k, int stride, int pad) {
    return (in + 2 * pad - k) / stride + 1;
}

// All tensors are channels-first, x fastest: [c][z][y][x].
// w is [cout][cin][kz][ky][kx]. Zero padding, cubic kernel of size k.

/// y[cout, ys] = conv(x[cin, xs], w) (no bias).
void conv3_fwd(const double* x, Shape3 xs, int cin, const double* w, int cout,
               int k, int stride, int pad, double* y, Exec exec);

/// gx[cin, xs] = d(conv)/dx applied to gy (transposed convolution).
void conv3_dx(const double* gy, Shape3 ys, int cout, const double* w, int cin,
              int k, int stride, int pad, double* gx, Shape3 xs, Exec exec);

/// gw[cout, cin, k^3] = d(conv)/dw given input x and upstream gy.
void conv3_dw(const double* x, Shape3 xs, int cin, const double* gy, Shape3 ys,
              int cout, int k, int stride, int pad, double* gw, Exec exec);

/// Trilinear x2 upsampling (half-voxel aligned, edge clamped).
/// y dims = 2 * xs per axis.
void up2_fwd(const double* x, int c, Shape3 xs, double* y, Exec exec);

/// Adjoint (transpose) of up2_fwd. gy has dims 2 * xs; gx has dims xs.
void up2_adj(const double* gy, int c, Shape3 xs, double* gx, Exec exec);

/// In-place orthonormal 3D DFT (1/sqrt(N) scaling both directions).
/// Radix-2 per axis for power-of-two sizes, direct DFT otherwise.
void fft3(std::complex<double>* data, Shape3 dims, bool inverse, Exec exec);

} // namespace f4d::kern
