#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "f4d/losses.hpp"
#include "f4d/nets.hpp"
#include "f4d/rng.hpp"

using namespace f4d;

namespace {

constexpr double kLn2 = 0.69314718055994530941723212145818;

std::vector<std::uint8_t> labels_cube(int n, Rng& rng) {
    std::vector<std::uint8_t> l(static_cast<std::size_t>(n) * n * n);
    for (auto& x : l) x = static_cast<std::uint8_t>(rng.below(3));
    return l;
}

ad::Value random_patch(ad::Graph& g, int n, Rng& rng, double scale = 1.0) {
    std::vector<double> v(static_cast<std::size_t>(n) * n * n * 3);
    for (double& x : v) x = scale * rng.normal();
    return g.leaf({3, n, n, n}, std::move(v));
}

} // namespace

TEST_CASE("region_mse: identical patches, uniform offset, empty region") {
    Rng rng(31);
    ad::Graph g;
    const int n = 6;
    const auto labels = labels_cube(n, rng);
    const ad::Value hr = random_patch(g, n, rng);
    CHECK(g.scalar_val(loss::region_mse(g, hr, hr, labels, Region::Core)) == 0.0);
    CHECK(g.scalar_val(loss::region_mse(g, hr, hr, labels, Region::Boundary)) == 0.0);

    // SR = HR + (0.1, 0, 0) everywhere -> every non-empty region scores 0.01
    std::vector<double> off(g.val(hr));
    const std::size_t vox = static_cast<std::size_t>(n) * n * n;
    for (std::size_t i = 0; i < vox; ++i) off[i] += 0.1;
    const ad::Value sr = g.leaf({3, n, n, n}, std::move(off));
    for (int r = 0; r < 3; ++r)
        CHECK(g.scalar_val(loss::region_mse(g, sr, hr, labels,
                                            static_cast<Region>(r))) ==
              doctest::Approx(0.01).epsilon(1e-9));

    // an absent region contributes zero
    std::vector<std::uint8_t> only_core(vox, 2);
    CHECK(g.scalar_val(loss::region_mse(g, sr, hr, only_core, Region::Boundary)) ==
          0.0);
}

TEST_CASE("region_mse decomposition: weighted sums recombine to the total") {
    Rng rng(32);
    ad::Graph g;
    const int n = 6;
    const auto labels = labels_cube(n, rng);
    const ad::Value hr = random_patch(g, n, rng);
    const ad::Value sr = random_patch(g, n, rng);

    double total = 0.0;
    const auto& hv = g.val(hr);
    const auto& sv = g.val(sr);
    for (std::size_t i = 0; i < hv.size(); ++i) {
        const double d = sv[i] - hv[i];
        total += d * d;
    }
    double sum = 0.0;
    for (int r = 0; r < 3; ++r) {
        auto [s, c] = loss::region_sq_sum(g, sr, hr, labels, static_cast<Region>(r));
        sum += g.scalar_val(s);
        const double mse =
            g.scalar_val(loss::region_mse(g, sr, hr, labels, static_cast<Region>(r)));
        if (c) CHECK(mse == doctest::Approx(g.scalar_val(s) / c).epsilon(1e-12));
    }
    CHECK(sum == doctest::Approx(total).epsilon(1e-9));
}

TEST_CASE("mask_nonfluid zeroes only non-fluid voxels and is idempotent") {
    Rng rng(33);
    ad::Graph g;
    const int n = 5;
    const auto labels = labels_cube(n, rng);
    const ad::Value x = random_patch(g, n, rng);
    const ad::Value m1 = loss::mask_nonfluid(g, x, labels);
    const ad::Value m2 = loss::mask_nonfluid(g, m1, labels);
    const std::size_t vox = static_cast<std::size_t>(n) * n * n;
    const auto& xv = g.val(x);
    const auto& mv = g.val(m1);
    for (std::size_t i = 0; i < vox; ++i)
        for (int c = 0; c < 3; ++c) {
            const double got = mv[c * vox + i];
            if (labels[i] == 0)
                CHECK(got == 0.0);
            else
                CHECK(got == xv[c * vox + i]); // preserved bitwise
        }
    CHECK(g.val(m2) == g.val(m1));

    std::vector<std::uint8_t> fluid(vox, 1), none(vox, 0);
    CHECK(g.val(loss::mask_nonfluid(g, x, fluid)) == g.val(x));
    for (double v : g.val(loss::mask_nonfluid(g, x, none))) CHECK(v == 0.0);
}

TEST_CASE("vanilla adversarial loss closed forms") {
    auto [lg0, ld0] = loss::adv_vanilla({0.0, 0.0}, {0.0, 0.0});
    CHECK(ld0 == doctest::Approx(2.0 * kLn2).epsilon(1e-12));
    CHECK(lg0 == doctest::Approx(kLn2).epsilon(1e-12));

    auto [lg1, ld1] = loss::adv_vanilla({50.0}, {-50.0});
    CHECK(ld1 < 1e-20); // perfect discriminator
    auto [lg2, ld2] = loss::adv_vanilla({0.0}, {50.0});
    CHECK(lg2 < 1e-20); // generator fully deceives

    CHECK(ld0 >= 0.0);
    CHECK_THROWS_AS(loss::adv_vanilla({}, {0.0}), ValidationError);
}

TEST_CASE("relativistic adversarial loss closed forms") {
    auto [lg, ld] = loss::adv_relativistic({1.3, 1.3}, {1.3, 1.3});
    CHECK(ld == doctest::Approx(2.0 * kLn2).epsilon(1e-12));
    CHECK(lg == doctest::Approx(2.0 * kLn2).epsilon(1e-12));

    auto [lg1, ld1] = loss::adv_relativistic({50.0, 50.0}, {0.0, 0.0});
    CHECK(ld1 < 1e-20);

    // swapping the lists exchanges the generator/discriminator roles
    auto [lg2, ld2] = loss::adv_relativistic({0.0, 0.0}, {50.0, 50.0});
    CHECK(lg2 == doctest::Approx(ld1).epsilon(1e-12));
    CHECK(ld2 == doctest::Approx(lg1).epsilon(1e-12));
}

TEST_CASE("wasserstein loss arithmetic") {
    auto [lg, ld] = loss::adv_wasserstein({1.0}, {4.0}, 0.0);
    CHECK(lg == 4.0);
    CHECK(ld == -3.0);

    auto [lg1, ld1] = loss::adv_wasserstein({2.0, 2.0}, {2.0, 2.0}, 0.0);
    CHECK(ld1 == 0.0);

    auto [lg2, ld2] = loss::adv_wasserstein({1.0}, {4.0}, 7.0);
    CHECK(ld2 == doctest::Approx(4.0).epsilon(1e-15)); // shifted by exactly +7

    // antisymmetry without the penalty term
    auto [lg3, ld3] = loss::adv_wasserstein({4.0}, {1.0}, 0.0);
    CHECK(ld3 == -ld);
}

TEST_CASE("gradient penalty closed forms for linear critics") {
    Rng rng(34);
    const int n = 3 * 24 * 24 * 24;

    auto linear_critic = [&](double norm_target) {
        std::vector<double> w(n, 0.0);
        // two nonzero taps give an exact, simple norm
        w[0] = norm_target;
        ad::Graph g;
        const ad::Value wv = g.leaf({1, n}, std::move(w));
        std::vector<ad::Value> hr{random_patch(g, 24, rng)};
        std::vector<ad::Value> sr{random_patch(g, 24, rng)};
        const loss::CriticFn critic = [&](ad::Graph& gg, ad::Value x) {
            return gg.matvec(wv, gg.reshape(x, {n}));
        };
        const ad::Value gp =
            loss::gradient_penalty(g, critic, hr, sr, {0.37}, 10.0);
        return g.scalar_val(gp);
    };

    CHECK(linear_critic(1.0) == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(linear_critic(2.0) == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("gradient penalty: beta=1 evaluates the critic at x_HR exactly") {
    Rng rng(35);
    ad::Graph g;
    const int n = 3 * 24 * 24 * 24;
    std::vector<double> w(n);
    for (double& x : w) x = 0.01 * rng.normal();
    const ad::Value wv = g.leaf({1, n}, std::move(w));
    const ad::Value hr = random_patch(g, 24, rng);
    const ad::Value sr = random_patch(g, 24, rng);

    // capture the interpolate by probing the critic's input
    std::vector<double> seen;
    const loss::CriticFn critic = [&](ad::Graph& gg, ad::Value x) {
        seen = gg.val(x);
        return gg.matvec(wv, gg.reshape(x, {n}));
    };
    (void)loss::gradient_penalty(g, critic, {hr}, {sr}, {1.0}, 10.0);
    const auto& hv = g.val(hr);
    REQUIRE(seen.size() == hv.size());
    for (std::size_t i = 0; i < seen.size(); ++i)
        CHECK(seen[i] == doctest::Approx(hv[i]).epsilon(1e-15));
}

TEST_CASE("all variants: parameter gradients match finite differences") {
    // generator-and-discriminator losses on tiny networks, checked per
    // variant against central differences through the full graph
    net::GeneratorSpec gs;
    gs.width = 4;
    gs.growth = 2;
    gs.n_rrdb = 1;
    gs.n_hr_blocks = 0;
    net::DiscriminatorSpec ds;
    ds.width = 2;
    ds.n_down_blocks = 2;
    ds.hidden = 3;

    Rng data_rng(36);
    std::vector<double> x_lr(3 * 12 * 12 * 12), x_hr(3 * 24 * 24 * 24);
    for (double& v : x_lr) v = 0.3 * data_rng.normal();
    for (double& v : x_hr) v = 0.3 * data_rng.normal();

    for (loss::Variant variant :
         {loss::Variant::Vanilla, loss::Variant::Relativistic,
          loss::Variant::Wasserstein}) {
        const net::ParamSet gen0 = net::init_generator(gs, 50);
        const net::ParamSet disc0 = net::init_discriminator(ds, 51);

        // flatten/unflatten helpers over both parameter sets
        auto flatten = [](const net::ParamSet& p) {
            std::vector<double> out;
            for (const auto& [n, t] : p.entries())
                out.insert(out.end(), t.v.begin(), t.v.end());
            return out;
        };
        auto unflatten = [](net::ParamSet p, const std::vector<double>& v) {
            std::size_t at = 0;
            for (auto& [n, t] : p.entries())
                for (double& x : t.v) x = v[at++];
            return p;
        };

        const std::vector<double> g0 = flatten(gen0);
        const std::vector<double> d0 = flatten(disc0);

        // L_G as a function of generator parameters
        auto eval_lg = [&](const std::vector<double>& gv) {
            const net::ParamSet gen = unflatten(gen0, gv);
            ad::Graph g;
            g.set_exec(kern::Exec::Serial);
            const net::BoundParams bg = net::bind_params(g, gen);
            const net::BoundParams bd = net::bind_params(g, disc0);
            const ad::Value sr =
                net::generator_forward(g, bg, g.leaf({3, 12, 12, 12}, x_lr), gs).out;
            const ad::Value hr = g.leaf({3, 24, 24, 24}, x_hr);
            std::vector<ad::Value> sh{net::discriminator_forward(g, bd, hr, ds)};
            std::vector<ad::Value> ss{net::discriminator_forward(g, bd, sr, ds)};
            ad::Value lg{-1};
            switch (variant) {
            case loss::Variant::Vanilla: lg = loss::adv_vanilla(g, sh, ss).first; break;
            case loss::Variant::Relativistic:
                lg = loss::adv_relativistic(g, sh, ss).first;
                break;
            default:
                lg = loss::adv_wasserstein(g, sh, ss, g.scalar(0.0)).first;
                break;
            }
            return std::pair<ad::Graph, ad::Value>(std::move(g), lg);
        };

        {
            auto [g, lg] = eval_lg(g0);
            std::vector<ad::Value> wrt;
            for (int i = 0; i < static_cast<int>(gen0.size()); ++i)
                wrt.push_back(ad::Value{i});
            const auto grads = g.gradients(lg, wrt);
            std::vector<double> flat;
            for (const auto& gv : grads)
                flat.insert(flat.end(), g.val(gv).begin(), g.val(gv).end());
            Rng pick(60 + static_cast<int>(variant));
            int accepted = 0;
            for (int c = 0; c < 40 && accepted < 10; ++c) {
                const std::size_t i = pick.below(g0.size());
                auto fd_at = [&](double h) {
                    std::vector<double> p = g0;
                    p[i] += h;
                    auto [gp, lp] = eval_lg(p);
                    p[i] -= 2 * h;
                    auto [gm, lm] = eval_lg(p);
                    return (gp.scalar_val(lp) - gm.scalar_val(lm)) / (2 * h);
                };
                const double fd = fd_at(1e-4);
                const double fd2 = fd_at(5e-5);
                if (std::fabs(fd - fd2) >
                    5e-5 * std::max({1e-3, std::fabs(fd), std::fabs(fd2)}))
                    continue; // secant spans an activation kink
                ++accepted;
                CHECK(std::fabs(fd2 - flat[i]) <=
                      1e-3 * std::max({1e-3, std::fabs(fd2), std::fabs(flat[i])}));
            }
            CHECK(accepted == 10);
        }

        // L_D (with gradient penalty for wasserstein) as a function of
        // discriminator parameters
        auto eval_ld = [&](const std::vector<double>& dv) {
            const net::ParamSet disc = unflatten(disc0, dv);
            ad::Graph g;
            g.set_exec(kern::Exec::Serial);
            const net::BoundParams bd = net::bind_params(g, disc);
            const ad::Value hr = g.leaf({3, 24, 24, 24}, x_hr);
            // detached fake input
            std::vector<double> fake(x_hr.size());
            Rng fr(99);
            for (double& v : fake) v = 0.3 * fr.normal();
            const ad::Value sr = g.leaf({3, 24, 24, 24}, fake);
            std::vector<ad::Value> sh{net::discriminator_forward(g, bd, hr, ds)};
            std::vector<ad::Value> ss{net::discriminator_forward(g, bd, sr, ds)};
            ad::Value ld{-1};
            switch (variant) {
            case loss::Variant::Vanilla: ld = loss::adv_vanilla(g, sh, ss).second; break;
            case loss::Variant::Relativistic:
                ld = loss::adv_relativistic(g, sh, ss).second;
                break;
            default: {
                const loss::CriticFn critic = [&](ad::Graph& gg, ad::Value x) {
                    return net::discriminator_forward(gg, bd, x, ds);
                };
                const ad::Value gp =
                    loss::gradient_penalty(g, critic, {hr}, {sr}, {0.41}, 10.0);
                ld = loss::adv_wasserstein(g, sh, ss, gp).second;
                break;
            }
            }
            return std::pair<ad::Graph, ad::Value>(std::move(g), ld);
        };

        {
            auto [g, ld] = eval_ld(d0);
            std::vector<ad::Value> wrt;
            const int first = static_cast<int>(0);
            (void)first;
            for (int i = 0; i < static_cast<int>(disc0.size()); ++i)
                wrt.push_back(ad::Value{i});
            const auto grads = g.gradients(ld, wrt);
            std::vector<double> flat;
            for (const auto& gv : grads)
                flat.insert(flat.end(), g.val(gv).begin(), g.val(gv).end());
            Rng pick(70 + static_cast<int>(variant));
            int accepted = 0;
            for (int c = 0; c < 40 && accepted < 10; ++c) {
                const std::size_t i = pick.below(d0.size());
                auto fd_at = [&](double h) {
                    std::vector<double> p = d0;
                    p[i] += h;
                    auto [gp, lp] = eval_ld(p);
                    p[i] -= 2 * h;
                    auto [gm, lm] = eval_ld(p);
                    return (gp.scalar_val(lp) - gm.scalar_val(lm)) / (2 * h);
                };
                const double fd = fd_at(1e-4);
                const double fd2 = fd_at(5e-5);
                if (std::fabs(fd - fd2) >
                    5e-5 * std::max({1e-3, std::fabs(fd), std::fabs(fd2)}))
                    continue;
                ++accepted;
                CHECK(std::fabs(fd2 - flat[i]) <=
                      1e-3 * std::max({1e-3, std::fabs(fd2), std::fabs(flat[i])}));
            }
            CHECK(accepted == 10);
        }
    }
}
