#include "f4d/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace f4d::kern {

namespace {

inline std::size_t idx3(Shape3 s, int z, int y, int x) {
    return (static_cast<std::size_t>(z) * s.h + y) * s.w + x;
}

} // namespace

void conv3_fwd(const double* x, Shape3 xs, int cin, const double* w, int cout,
               int k, int stride, int pad, double* y, Exec exec) {
    const Shape3 ys{conv_out_dim(xs.d, k, stride, pad),
                    conv_out_dim(xs.h, k, stride, pad),
                    conv_out_dim(xs.w, k, stride, pad)};
    const std::size_t xvox = xs.voxels();
    const std::size_t kvol = static_cast<std::size_t>(k) * k * k;
    const bool par = exec == Exec::Par;

#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int o = 0; o < cout; ++o) {
        for (int zo = 0; zo < ys.d; ++zo) {
            for (int yo = 0; yo < ys.h; ++yo) {
                for (int xo = 0; xo < ys.w; ++xo) {
                    double acc = 0.0;
                    const int zb = zo * stride - pad;
                    const int yb = yo * stride - pad;
                    const int xb = xo * stride - pad;
                    for (int c = 0; c < cin; ++c) {
                        const double* xc = x + c * xvox;
                        const double* wc =
                            w + (static_cast<std::size_t>(o) * cin + c) * kvol;
                        for (int kz = 0; kz < k; ++kz) {
                            const int zi = zb + kz;
                            if (zi < 0 || zi >= xs.d) continue;
                            for (int ky = 0; ky < k; ++ky) {
                                const int yi = yb + ky;
                                if (yi < 0 || yi >= xs.h) continue;
                                const double* xrow = xc + idx3(xs, zi, yi, 0);
                                const double* wrow = wc + (kz * k + ky) * k;
                                for (int kx = 0; kx < k; ++kx) {
                                    const int xi = xb + kx;
                                    if (xi < 0 || xi >= xs.w) continue;
                                    acc += wrow[kx] * xrow[xi];
                                }
                            }
                        }
                    }
                    y[(static_cast<std::size_t>(o) * ys.d + zo) * ys.h * ys.w +
                      static_cast<std::size_t>(yo) * ys.w + xo] = acc;
                }
            }
        }
    }
}

void conv3_dx(const double* gy, Shape3 ys, int cout, const double* w, int cin,
              int k, int stride, int pad, double* gx, Shape3 xs, Exec exec) {
    const std::size_t yvox = ys.voxels();
    const std::size_t kvol = static_cast<std::size_t>(k) * k * k;
    const bool par = exec == Exec::Par;

#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int c = 0; c < cin; ++c) {
        for (int zi = 0; zi < xs.d; ++zi) {
            for (int yi = 0; yi < xs.h; ++yi) {
                for (int xi = 0; xi < xs.w; ++xi) {
                    double acc = 0.0;
                    for (int kz = 0; kz < k; ++kz) {
                        const int zn = zi + pad - kz;
                        if (zn < 0 || zn % stride) continue;
                        const int zo = zn / stride;
                        if (zo >= ys.d) continue;
                        for (int ky = 0; ky < k; ++ky) {
                            const int yn = yi + pad - ky;
                            if (yn < 0 || yn % stride) continue;
                            const int yo = yn / stride;
                            if (yo >= ys.h) continue;
                            for (int kx = 0; kx < k; ++kx) {
                                const int xn = xi + pad - kx;
                                if (xn < 0 || xn % stride) continue;
                                const int xo = xn / stride;
                                if (xo >= ys.w) continue;
                                const std::size_t koff =
                                    (static_cast<std::size_t>(kz) * k + ky) * k + kx;
                                for (int o = 0; o < cout; ++o) {
                                    acc += w[(static_cast<std::size_t>(o) * cin + c) * kvol + koff] *
                                           gy[o * yvox + idx3(ys, zo, yo, xo)];
                                }
                            }
                        }
                    }
                    gx[c * xs.voxels() + idx3(xs, zi, yi, xi)] = acc;
                }
            }
        }
    }
}

void conv3_dw(const double* x, Shape3 xs, int cin, const double* gy, Shape3 ys,
              int cout, int k, int stride, int pad, double* gw, Exec exec) {
    const std::size_t xvox = xs.voxels();
    const std::size_t yvox = ys.voxels();
    const std::size_t kvol = static_cast<std::size_t>(k) * k * k;
    const bool par = exec == Exec::Par;

#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int o = 0; o < cout; ++o) {
        for (int c = 0; c < cin; ++c) {
            const double* gyo = gy + o * yvox;
            const double* xc = x + c * xvox;
            double* gwk = gw + (static_cast<std::size_t>(o) * cin + c) * kvol;
            for (int kz = 0; kz < k; ++kz) {
                for (int ky = 0; ky < k; ++ky) {
                    for (int kx = 0; kx < k; ++kx) {
                        double acc = 0.0;
                        for (int zo = 0; zo < ys.d; ++zo) {
                            const int zi = zo * stride - pad + kz;
                            if (zi < 0 || zi >= xs.d) continue;
                            for (int yo = 0; yo < ys.h; ++yo) {
                                const int yi = yo * stride - pad + ky;
                                if (yi < 0 || yi >= xs.h) continue;
                                const double* xrow = xc + idx3(xs, zi, yi, 0);
                                const double* grow = gyo + idx3(ys, zo, yo, 0);
                                for (int xo = 0; xo < ys.w; ++xo) {
                                    const int xi = xo * stride - pad + kx;
                                    if (xi < 0 || xi >= xs.w) continue;
                                    acc += grow[xo] * xrow[xi];
                                }
                            }
                        }
                        gwk[(kz * k + ky) * k + kx] = acc;
                    }
                }
            }
        }
    }
}

namespace {

// Per-axis stencil of the half-voxel aligned x2 interpolation: output sample
// ho reads LR positions a,b with weights wa,wb (clamped at the faces).
struct Tap {
    int a, b;
    double wa, wb;
};

std::vector<Tap> up2_taps(int n) {
    std::vector<Tap> t(2 * n);
    for (int ho = 0; ho < 2 * n; ++ho) {
        const double u = 0.5 * ho - 0.25;
        const int i0 = static_cast<int>(std::floor(u));
        const double f = u - i0;
        Tap tap;
        tap.a = std::clamp(i0, 0, n - 1);
        tap.b = std::clamp(i0 + 1, 0, n - 1);
        tap.wa = 1.0 - f;
        tap.wb = f;
        t[ho] = tap;
    }
    return t;
}

} // namespace

void up2_fwd(const double* x, int c, Shape3 xs, double* y, Exec exec) {
    const Shape3 ys{2 * xs.d, 2 * xs.h, 2 * xs.w};
    const auto tz = up2_taps(xs.d);
    const auto ty = up2_taps(xs.h);
    const auto tx = up2_taps(xs.w);
    const std::size_t xvox = xs.voxels();
    const std::size_t yvox = ys.voxels();
    const bool par = exec == Exec::Par;

#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int ch = 0; ch < c; ++ch) {
        for (int zo = 0; zo < ys.d; ++zo) {
            const double* xc = x + ch * xvox;
            double* yc = y + ch * yvox;
            const Tap& z = tz[zo];
            for (int yo = 0; yo < ys.h; ++yo) {
                const Tap& yy = ty[yo];
                const double* r00 = xc + idx3(xs, z.a, yy.a, 0);
                const double* r01 = xc + idx3(xs, z.a, yy.b, 0);
                const double* r10 = xc + idx3(xs, z.b, yy.a, 0);
                const double* r11 = xc + idx3(xs, z.b, yy.b, 0);
                const double w00 = z.wa * yy.wa, w01 = z.wa * yy.wb;
                const double w10 = z.wb * yy.wa, w11 = z.wb * yy.wb;
                double* out = yc + idx3(ys, zo, yo, 0);
                for (int xo = 0; xo < ys.w; ++xo) {
                    const Tap& xt = tx[xo];
                    const double va = w00 * r00[xt.a] + w01 * r01[xt.a] +
                                      w10 * r10[xt.a] + w11 * r11[xt.a];
                    const double vb = w00 * r00[xt.b] + w01 * r01[xt.b] +
                                      w10 * r10[xt.b] + w11 * r11[xt.b];
                    out[xo] = xt.wa * va + xt.wb * vb;
                }
            }
        }
    }
}

void up2_adj(const double* gy, int c, Shape3 xs, double* gx, Exec exec) {
    const Shape3 ys{2 * xs.d, 2 * xs.h, 2 * xs.w};
    const auto tz = up2_taps(xs.d);
    const auto ty = up2_taps(xs.h);
    const auto tx = up2_taps(xs.w);
    const std::size_t xvox = xs.voxels();
    const std::size_t yvox = ys.voxels();
    const bool par = exec == Exec::Par;

    // Gather form of the transpose: each LR voxel sums the HR samples whose
    // stencil touches it. Candidate HR indices per axis are 2l-1 .. 2l+2.
    auto gather = [](const std::vector<Tap>& taps, int l, int n2, int* hs,
                     double* ws) {
        int cnt = 0;
        for (int ho = std::max(0, 2 * l - 1); ho <= std::min(n2 - 1, 2 * l + 2);
             ++ho) {
            double wsum = 0.0;
            if (taps[ho].a == l) wsum += taps[ho].wa;
            if (taps[ho].b == l) wsum += taps[ho].wb;
            if (wsum != 0.0) {
                hs[cnt] = ho;
                ws[cnt] = wsum;
                ++cnt;
            }
        }
        return cnt;
    };

#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int ch = 0; ch < c; ++ch) {
        for (int zl = 0; zl < xs.d; ++zl) {
            const double* gc = gy + ch * yvox;
            double* xc = gx + ch * xvox;
            int zh[4];
            double zw[4];
            const int nz = gather(tz, zl, ys.d, zh, zw);
            for (int yl = 0; yl < xs.h; ++yl) {
                int yh[4];
                double yw[4];
                const int ny = gather(ty, yl, ys.h, yh, yw);
                for (int xl = 0; xl < xs.w; ++xl) {
                    int xh[4];
                    double xw[4];
                    const int nx = gather(tx, xl, ys.w, xh, xw);
                    double acc = 0.0;
                    for (int iz = 0; iz < nz; ++iz)
                        for (int iy = 0; iy < ny; ++iy)
                            for (int ix = 0; ix < nx; ++ix)
                                acc += zw[iz] * yw[iy] * xw[ix] *
                                       gc[idx3(ys, zh[iz], yh[iy], xh[ix])];
                    xc[idx3(xs, zl, yl, xl)] = acc;
                }
            }
        }
    }
}

namespace {

using cplx = std::complex<double>;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey on one line, unscaled.
void fft_line_pow2(cplx* a, int n, bool inverse) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * 3.141592653589793238462643383279502884 / len;
        const cplx wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (int j = 0; j < len / 2; ++j) {
                const cplx u = a[i + j];
                const cplx v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Direct DFT fallback for non power-of-two sizes; twiddles precomputed.
void fft_line_direct(cplx* a, int n, const std::vector<cplx>& tw,
                     std::vector<cplx>& scratch) {
    for (int kk = 0; kk < n; ++kk) {
        cplx acc(0.0, 0.0);
        std::size_t t = 0;
        for (int j = 0; j < n; ++j) {
            acc += a[j] * tw[t];
            t += kk;
            if (t >= static_cast<std::size_t>(n)) t -= n;
        }
        scratch[kk] = acc;
    }
    std::copy(scratch.begin(), scratch.end(), a);
}

void fft_axis(cplx* data, Shape3 dims, int axis, bool inverse, bool par) {
    const int n = axis == 0 ? dims.d : (axis == 1 ? dims.h : dims.w);
    const std::size_t stride =
        axis == 2 ? 1
                  : (axis == 1 ? static_cast<std::size_t>(dims.w)
                               : static_cast<std::size_t>(dims.h) * dims.w);
    const int na = axis == 0 ? dims.h : dims.d;
    const int nb = axis == 2 ? dims.h : dims.w;
    const std::size_t sa =
        axis == 0 ? static_cast<std::size_t>(dims.w)
                  : static_cast<std::size_t>(dims.h) * dims.w;
    const std::size_t sb = axis == 2 ? static_cast<std::size_t>(dims.w) : 1;

    const bool pow2 = is_pow2(n);
    std::vector<cplx> tw;
    if (!pow2) {
        tw.resize(n);
        const double sign = inverse ? 1.0 : -1.0;
        for (int j = 0; j < n; ++j) {
            const double ang =
                sign * 2.0 * 3.141592653589793238462643383279502884 * j / n;
            tw[j] = cplx(std::cos(ang), std::sin(ang));
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));

#pragma omp parallel for collapse(2) schedule(static) if (par)
    for (int ia = 0; ia < na; ++ia) {
        for (int ib = 0; ib < nb; ++ib) {
            std::vector<cplx> line(n), scratch(pow2 ? 0 : n);
            cplx* base = data + ia * sa + ib * sb;
            for (int i = 0; i < n; ++i) line[i] = base[i * stride];
            if (pow2)
                fft_line_pow2(line.data(), n, inverse);
            else
                fft_line_direct(line.data(), n, tw, scratch);
            for (int i = 0; i < n; ++i) base[i * stride] = line[i] * scale;
        }
    }
}

} // namespace

void fft3(cplx* data, Shape3 dims, bool inverse, Exec exec) {
    const bool par = exec == Exec::Par;
    fft_axis(data, dims, 2, inverse, par);
    fft_axis(data, dims, 1, inverse, par);
    fft_axis(data, dims, 0, inverse, par);
}

} // namespace f4d::kern
