// Timing comparison between the serial reference kernels and their OpenMP
// counterparts on training-sized workloads.

#include <chrono>
#include <complex>
#include <cstdio>
#include <vector>

#include "f4d/kernels.hpp"
#include "f4d/rng.hpp"

using namespace f4d;

namespace {

template <typename F>
double time_best_of(int reps, F&& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
    }
    return best;
}

std::vector<double> random_buffer(std::size_t n, Rng& rng) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

void row(const char* name, double t_serial, double t_par) {
    std::printf("%-28s %10.3f ms %10.3f ms %8.2fx\n", name, 1e3 * t_serial,
                1e3 * t_par, t_serial / t_par);
}

} // namespace

int main() {
    Rng rng(7);
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "openmp", "speedup");

    {
        const kern::Shape3 xs{24, 24, 24};
        const int cin = 16, cout = 16, k = 3;
        const auto x = random_buffer(cin * xs.voxels(), rng);
        const auto w = random_buffer(static_cast<std::size_t>(cout) * cin * k * k * k, rng);
        std::vector<double> y(cout * xs.voxels());
        const auto run = [&](kern::Exec e) {
            kern::conv3_fwd(x.data(), xs, cin, w.data(), cout, k, 1, 1, y.data(), e);
        };
        row("conv3 fwd 16x16 24^3",
            time_best_of(3, [&] { run(kern::Exec::Serial); }),
            time_best_of(3, [&] { run(kern::Exec::Par); }));

        std::vector<double> gx(cin * xs.voxels());
        const auto rundx = [&](kern::Exec e) {
            kern::conv3_dx(y.data(), xs, cout, w.data(), cin, k, 1, 1, gx.data(), xs, e);
        };
        row("conv3 dx 16x16 24^3",
            time_best_of(3, [&] { rundx(kern::Exec::Serial); }),
            time_best_of(3, [&] { rundx(kern::Exec::Par); }));

        std::vector<double> gw(w.size());
        const auto rundw = [&](kern::Exec e) {
            kern::conv3_dw(x.data(), xs, cin, y.data(), xs, cout, k, 1, 1, gw.data(), e);
        };
        row("conv3 dw 16x16 24^3",
            time_best_of(3, [&] { rundw(kern::Exec::Serial); }),
            time_best_of(3, [&] { rundw(kern::Exec::Par); }));
    }

    {
        const kern::Shape3 xs{16, 16, 16};
        const int c = 16;
        const auto x = random_buffer(c * xs.voxels(), rng);
        std::vector<double> y(c * xs.voxels() * 8);
        const auto run = [&](kern::Exec e) {
            kern::up2_fwd(x.data(), c, xs, y.data(), e);
        };
        row("trilinear up2 16ch 16^3",
            time_best_of(5, [&] { run(kern::Exec::Serial); }),
            time_best_of(5, [&] { run(kern::Exec::Par); }));
    }

    {
        const kern::Shape3 dims{64, 64, 64};
        std::vector<std::complex<double>> data(dims.voxels());
        for (auto& z : data) z = {rng.normal(), rng.normal()};
        auto copy = data;
        const auto run = [&](kern::Exec e) {
            copy = data;
            kern::fft3(copy.data(), dims, false, e);
        };
        row("fft3 64^3",
            time_best_of(3, [&] { run(kern::Exec::Serial); }),
            time_best_of(3, [&] { run(kern::Exec::Par); }));
    }
    return 0;
}
