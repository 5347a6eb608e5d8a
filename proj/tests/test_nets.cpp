#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "f4d/nets.hpp"
#include "f4d/rng.hpp"

using namespace f4d;

namespace {

net::GeneratorSpec tiny_gen() {
    net::GeneratorSpec s;
    s.width = 4;
    s.growth = 2;
    s.n_rrdb = 1;
    s.n_hr_blocks = 1;
    return s;
}

net::DiscriminatorSpec tiny_disc() {
    net::DiscriminatorSpec s;
    s.width = 2;
    s.n_down_blocks = 2;
    s.hidden = 4;
    return s;
}

ad::Tensor random_input(std::vector<int> shape, std::uint64_t seed, double scale) {
    Rng rng(seed);
    ad::Tensor t = ad::Tensor::zeros(std::move(shape));
    for (double& x : t.v) x = scale * rng.normal();
    return t;
}

// Shape-arithmetic oracle for the generator parameter count, written out
// independently of the ParamSet construction.
std::size_t gen_count_oracle(const net::GeneratorSpec& s) {
    auto conv = [](int cin, int cout) {
        return static_cast<std::size_t>(cout) * cin * 27 + cout;
    };
    std::size_t n = conv(3, s.width); // head
    for (int r = 0; r < s.n_rrdb; ++r)
        for (int b = 0; b < 2; ++b)
            n += conv(s.width, s.growth) + conv(s.width + s.growth, s.growth) +
                 conv(s.width + 2 * s.growth, s.width);
    n += conv(s.width, s.width);                     // trunk
    n += static_cast<std::size_t>(s.n_hr_blocks) * conv(s.width, s.width);
    n += 3 * conv(s.width, 1);                       // branches
    return n;
}

} // namespace

TEST_CASE("generator parameter count matches the shape-arithmetic oracle") {
    for (net::GeneratorSpec s : {tiny_gen(), net::GeneratorSpec{}}) {
        const net::ParamSet p = net::init_generator(s, 1);
        CHECK(p.total_scalars() == gen_count_oracle(s));
        CHECK(p.total_scalars() == net::generator_param_count(s));
    }
    // the tiny gradcheck topologies stay under 5000 parameters
    CHECK(net::generator_param_count(tiny_gen()) < 5000);
    CHECK(net::discriminator_param_count(tiny_disc()) < 5000);
}

TEST_CASE("generator forward: output shape and determinism") {
    const net::GeneratorSpec spec = tiny_gen();
    const net::ParamSet p = net::init_generator(spec, 3);
    const ad::Tensor x = random_input({3, 12, 12, 12}, 9, 0.3);

    const ad::Tensor y1 = net::forward_generator(p, x, spec);
    const ad::Tensor y2 = net::forward_generator(p, x, spec);
    CHECK(y1.shape == std::vector<int>{3, 24, 24, 24});
    CHECK(y1.v == y2.v); // bitwise stable

    ad::Tensor bad = random_input({3, 10, 10, 10}, 9, 0.3);
    CHECK_THROWS_AS(net::forward_generator(p, bad, spec), ValidationError);
}

TEST_CASE("generator with zeroed branch weights maps anything to zero") {
    const net::GeneratorSpec spec = tiny_gen();
    net::ParamSet p = net::init_generator(spec, 4);
    for (int c = 0; c < 3; ++c) {
        for (double& v : p.at("g.branch" + std::to_string(c) + ".w").v) v = 0.0;
        for (double& v : p.at("g.branch" + std::to_string(c) + ".b").v) v = 0.0;
    }
    const ad::Tensor y =
        net::forward_generator(p, random_input({3, 12, 12, 12}, 10, 0.5), spec);
    for (double v : y.v) CHECK(v == 0.0);
}

TEST_CASE("generator taps have the documented shapes") {
    const net::GeneratorSpec spec = tiny_gen();
    const net::ParamSet p = net::init_generator(spec, 5);
    ad::Graph g;
    const net::BoundParams bp = net::bind_params(g, p);
    const auto taps = net::generator_forward(
        g, bp, g.leaf(random_input({3, 12, 12, 12}, 11, 0.2)), spec);
    CHECK(g.shape(taps.middle) == std::vector<int>{spec.width, 12, 12, 12});
    CHECK(g.shape(taps.end) == std::vector<int>{spec.width, 24, 24, 24});
}

TEST_CASE("discriminator: deterministic finite scores, zero head gives zero") {
    const net::DiscriminatorSpec spec = tiny_disc();
    net::ParamSet p = net::init_discriminator(spec, 6);
    const ad::Tensor x = random_input({3, 24, 24, 24}, 12, 3.0); // |v| up to ~10

    const double s1 = net::forward_discriminator(p, x, spec);
    const double s2 = net::forward_discriminator(p, x, spec);
    CHECK(s1 == s2);
    CHECK(std::isfinite(s1));

    for (double& v : p.at("d.fc1.w").v) v = 0.0;
    for (double& v : p.at("d.fc1.b").v) v = 0.0;
    CHECK(net::forward_discriminator(p, x, spec) == 0.0);
}

TEST_CASE("discriminator rejects too-deep down blocks") {
    net::DiscriminatorSpec s = tiny_disc();
    s.n_down_blocks = 6; // 24 -> 12 -> 6 -> 3 -> 2 -> 1 -> 1? out dim reaches 0
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
    net::ParamSet p;
    p.add("w", ad::Tensor({2}, {1.0, -2.0}));
    net::ParamSet g0;
    g0.add("w", ad::Tensor({2}, {0.0, 0.0}));
    net::AdamState st = net::AdamState::init(p);
    const auto before = p.at("w").v;
    net::adam_step(p, g0, st, 1e-2);
    CHECK(p.at("w").v == before);
}

TEST_CASE("adam: first step matches the hand-computed update") {
    net::ParamSet p;
    p.add("w", ad::Tensor({1}, {1.0}));
    net::ParamSet g;
    g.add("w", ad::Tensor({1}, {2.0}));
    net::AdamState st = net::AdamState::init(p);
    const double lr = 0.1, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    net::adam_step(p, g, st, lr, beta1, beta2, eps);

    // by hand: m = 0.2, v = 0.004, mhat = 2, vhat = 4, step = lr*2/(2+eps)
    const double want =
        static_cast<double>(static_cast<float>(1.0 - lr * 2.0 / (2.0 + eps)));
    CHECK(p.at("w").v[0] == want);
}

TEST_CASE("adam runs are bitwise reproducible") {
    auto run = []() {
        net::ParamSet p = net::init_generator(tiny_gen(), 42);
        net::AdamState st = net::AdamState::init(p);
        Rng rng(17);
        for (int step = 0; step < 5; ++step) {
            net::ParamSet g;
            for (const auto& [name, t] : p.entries()) {
                ad::Tensor gt = ad::Tensor::zeros(t.shape);
                for (double& x : gt.v) x = rng.normal();
                g.add(name, std::move(gt));
            }
            net::adam_step(p, g, st, 1e-3);
        }
        return p;
    };
    const net::ParamSet a = run();
    const net::ParamSet b = run();
    for (std::size_t i = 0; i < a.entries().size(); ++i)
        CHECK(a.entries()[i].second.v == b.entries()[i].second.v);
}

TEST_CASE("interpolate_weights: exact endpoints and midpoint") {
    const net::ParamSet a = net::init_generator(tiny_gen(), 1);
    const net::ParamSet b = net::init_generator(tiny_gen(), 2);

    const net::ParamSet at0 = net::interpolate_weights(a, b, 0.0);
    const net::ParamSet at1 = net::interpolate_weights(a, b, 1.0);
    for (std::size_t i = 0; i < a.entries().size(); ++i) {
        CHECK(at0.entries()[i].second.v == a.entries()[i].second.v);
        CHECK(at1.entries()[i].second.v == b.entries()[i].second.v);
    }

    net::ParamSet s1, s2;
    s1.add("w", ad::Tensor({1}, {2.0}));
    s2.add("w", ad::Tensor({1}, {4.0}));
    CHECK(net::interpolate_weights(s1, s2, 0.5).at("w").v[0] == 3.0);

    CHECK_THROWS_AS(net::interpolate_weights(a, b, 1.5), ValidationError);
    net::ParamSet other;
    other.add("different", ad::Tensor({1}, {0.0}));
    CHECK_THROWS_AS(net::interpolate_weights(a, other, 0.5), ValidationError);
}

TEST_CASE("init is deterministic per seed and on the binary32 grid") {
    const net::ParamSet a = net::init_generator(tiny_gen(), 77);
    const net::ParamSet b = net::init_generator(tiny_gen(), 77);
    const net::ParamSet c = net::init_generator(tiny_gen(), 78);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.entries().size(); ++i) {
        CHECK(a.entries()[i].second.v == b.entries()[i].second.v);
        if (a.entries()[i].second.v != c.entries()[i].second.v) any_diff = true;
        for (double x : a.entries()[i].second.v)
            CHECK(static_cast<double>(static_cast<float>(x)) == x);
    }
    CHECK(any_diff);
}
