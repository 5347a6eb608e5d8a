#include "f4d/nets.hpp"

#include <cmath>

#include "f4d/rng.hpp"

namespace f4d::net {

void ParamSet::add(std::string name, ad::Tensor t) {
    if (index_.count(name))
        throw ValidationError("param set: duplicate name '" + name + "'");
    index_[name] = items_.size();
    items_.emplace_back(std::move(name), std::move(t));
}

ad::Tensor& ParamSet::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end())
        throw ValidationError("param set: unknown name '" + name + "'");
    return items_[it->second].second;
}

const ad::Tensor& ParamSet::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end())
        throw ValidationError("param set: unknown name '" + name + "'");
    return items_[it->second].second;
}

std::size_t ParamSet::total_scalars() const {
    std::size_t n = 0;
    for (const auto& [name, t] : items_) n += t.numel();
    return n;
}

bool ParamSet::same_structure(const ParamSet& other) const {
    if (items_.size() != other.items_.size()) return false;
    for (std::size_t i = 0; i < items_.size(); ++i)
        if (items_[i].first != other.items_[i].first ||
            items_[i].second.shape != other.items_[i].second.shape)
            return false;
    return true;
}

void ParamSet::quantize_f32() {
    for (auto& [name, t] : items_)
        for (double& x : t.v) x = static_cast<double>(static_cast<float>(x));
}

void GeneratorSpec::validate() const {
    if (n_rrdb < 1) throw ValidationError("generator: n_rrdb must be >= 1");
    if (width < 4) throw ValidationError("generator: width must be >= 4");
    if (growth < 1) throw ValidationError("generator: growth must be >= 1");
    if (n_hr_blocks < 0) throw ValidationError("generator: n_hr_blocks must be >= 0");
}

void DiscriminatorSpec::validate() const {
    if (n_down_blocks < 1)
        throw ValidationError("discriminator: n_down_blocks must be >= 1");
    if (width < 1) throw ValidationError("discriminator: width must be >= 1");
    if (hidden < 1) throw ValidationError("discriminator: hidden must be >= 1");
    int s = 24;
    for (int i = 0; i < n_down_blocks; ++i) {
        if (s < 2)
            throw ValidationError(
                "discriminator: too many down blocks for a 24^3 input");
        s = kern::conv_out_dim(s, 3, 2, 1);
    }
}

int DiscriminatorSpec::spatial_after_blocks() const {
    int s = 24;
    for (int i = 0; i < n_down_blocks; ++i) s = kern::conv_out_dim(s, 3, 2, 1);
    return s;
}

namespace {

constexpr double kLReluSlope = 0.2;
constexpr double kResidualScale = 0.2;

ad::Tensor he_normal(std::vector<int> shape, int fan_in, Rng& rng) {
    ad::Tensor t = ad::Tensor::zeros(std::move(shape));
    const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
    for (double& x : t.v) x = std * rng.normal();
    return t;
}

void add_conv(ParamSet& p, const std::string& name, int cin, int cout, Rng& rng) {
    p.add(name + ".w", he_normal({cout, cin, 3, 3, 3}, cin * 27, rng));
    p.add(name + ".b", ad::Tensor::zeros({cout}));
}

void add_dense(ParamSet& p, const std::string& name, int nin, int nout, Rng& rng) {
    p.add(name + ".w", he_normal({nout, nin}, nin, rng));
    p.add(name + ".b", ad::Tensor::zeros({nout}));
}

// Sub-block and branch channel plans shared by init, forward, and the
// parameter-count arithmetic.
struct ConvPlan {
    std::string name;
    int cin, cout;
};

std::vector<ConvPlan> generator_convs(const GeneratorSpec& s) {
    std::vector<ConvPlan> plan;
    plan.push_back({"g.head", 3, s.width});
    for (int r = 0; r < s.n_rrdb; ++r)
        for (int b = 0; b < 2; ++b) {
            const std::string base =
                "g.rrdb" + std::to_string(r) + ".sub" + std::to_string(b);
            plan.push_back({base + ".c0", s.width, s.growth});
            plan.push_back({base + ".c1", s.width + s.growth, s.growth});
            plan.push_back({base + ".c2", s.width + 2 * s.growth, s.width});
        }
    plan.push_back({"g.trunk", s.width, s.width});
    for (int h = 0; h < s.n_hr_blocks; ++h)
        plan.push_back({"g.hr" + std::to_string(h), s.width, s.width});
    for (int c = 0; c < 3; ++c)
        plan.push_back({"g.branch" + std::to_string(c), s.width, 1});
    return plan;
}

} // namespace

ParamSet init_generator(const GeneratorSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, 0x67656e)); // stream tag: generator init
    ParamSet p;
    for (const auto& c : generator_convs(spec)) add_conv(p, c.name, c.cin, c.cout, rng);
    p.quantize_f32();
    return p;
}

ParamSet init_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(derive_seed(seed, 0x64697363)); // stream tag: discriminator init
    ParamSet p;
    int cin = 3;
    for (int i = 0; i < spec.n_down_blocks; ++i) {
        const int cout = spec.width << i;
        add_conv(p, "d.down" + std::to_string(i), cin, cout, rng);
        cin = cout;
    }
    const int s = spec.spatial_after_blocks();
    const int flat = cin * s * s * s;
    add_dense(p, "d.fc0", flat, spec.hidden, rng);
    add_dense(p, "d.fc1", spec.hidden, 1, rng);
    p.quantize_f32();
    return p;
}

std::size_t generator_param_count(const GeneratorSpec& spec) {
    std::size_t n = 0;
    for (const auto& c : generator_convs(spec))
        n += static_cast<std::size_t>(c.cout) * c.cin * 27 + c.cout;
    return n;
}

std::size_t discriminator_param_count(const DiscriminatorSpec& spec) {
    std::size_t n = 0;
    int cin = 3;
    for (int i = 0; i < spec.n_down_blocks; ++i) {
        const int cout = spec.width << i;
        n += static_cast<std::size_t>(cout) * cin * 27 + cout;
        cin = cout;
    }
    const int s = spec.spatial_after_blocks();
    n += static_cast<std::size_t>(spec.hidden) * cin * s * s * s + spec.hidden;
    n += static_cast<std::size_t>(spec.hidden) + 1;
    return n;
}

ad::Value BoundParams::at(const std::string& name) const {
    for (const auto& [n, v] : values)
        if (n == name) return v;
    throw ValidationError("bound params: unknown name '" + name + "'");
}

std::vector<ad::Value> BoundParams::all() const {
    std::vector<ad::Value> out;
    out.reserve(values.size());
    for (const auto& [n, v] : values) out.push_back(v);
    return out;
}

BoundParams bind_params(ad::Graph& g, const ParamSet& params) {
    BoundParams bp;
    bp.values.reserve(params.size());
    for (const auto& [name, t] : params.entries())
        bp.values.emplace_back(name, g.leaf(t));
    return bp;
}

namespace {

ad::Value conv_block(ad::Graph& g, const BoundParams& p, const std::string& name,
                     ad::Value x, int stride, bool lrelu) {
    ad::Value y = g.bias_add(g.conv3(x, p.at(name + ".w"), stride, 1),
                             p.at(name + ".b"));
    return lrelu ? g.leaky_relu(y, kLReluSlope) : y;
}

ad::Value dense_sub_block(ad::Graph& g, const BoundParams& p,
                          const std::string& base, ad::Value x) {
    ad::Value y0 = conv_block(g, p, base + ".c0", x, 1, true);
    ad::Value y1 = conv_block(g, p, base + ".c1", g.concat_c(x, y0), 1, true);
    ad::Value y2 = conv_block(g, p, base + ".c2", g.concat_c(g.concat_c(x, y0), y1),
                              1, false);
    return g.add(x, g.scale(y2, kResidualScale));
}

} // namespace

GeneratorTaps generator_forward(ad::Graph& g, const BoundParams& p, ad::Value x_lr,
                                const GeneratorSpec& spec) {
    spec.validate();
    const auto& xs = g.shape(x_lr);
    if (xs != std::vector<int>{3, 12, 12, 12})
        throw ValidationError("generator: input must be {3,12,12,12}");

    ad::Value f0 = conv_block(g, p, "g.head", x_lr, 1, false);
    ad::Value f = f0;
    for (int r = 0; r < spec.n_rrdb; ++r) {
        const std::string base = "g.rrdb" + std::to_string(r);
        ad::Value y = dense_sub_block(g, p, base + ".sub0", f);
        y = dense_sub_block(g, p, base + ".sub1", y);
        f = g.add(f, g.scale(y, kResidualScale));
    }
    ad::Value middle = g.add(f0, conv_block(g, p, "g.trunk", f, 1, false));

    ad::Value h = g.upsample2(middle);
    for (int i = 0; i < spec.n_hr_blocks; ++i)
        h = conv_block(g, p, "g.hr" + std::to_string(i), h, 1, true);
    ad::Value end = h;

    ad::Value bx = conv_block(g, p, "g.branch0", end, 1, false);
    ad::Value by = conv_block(g, p, "g.branch1", end, 1, false);
    ad::Value bz = conv_block(g, p, "g.branch2", end, 1, false);
    ad::Value out = g.concat_c(g.concat_c(bx, by), bz);
    return {out, middle, end};
}

ad::Value discriminator_forward(ad::Graph& g, const BoundParams& p, ad::Value x,
                                const DiscriminatorSpec& spec) {
    spec.validate();
    if (g.shape(x) != std::vector<int>{3, 24, 24, 24})
        throw ValidationError("discriminator: input must be {3,24,24,24}");

    ad::Value h = x;
    for (int i = 0; i < spec.n_down_blocks; ++i)
        h = conv_block(g, p, "d.down" + std::to_string(i), h, 2, true);

    const auto& hs = g.shape(h);
    const int flat = hs[0] * hs[1] * hs[2] * hs[3];
    ad::Value v = g.reshape(h, {flat});
    v = g.leaky_relu(g.add(g.matvec(p.at("d.fc0.w"), v), p.at("d.fc0.b")),
                     kLReluSlope);
    v = g.add(g.matvec(p.at("d.fc1.w"), v), p.at("d.fc1.b"));
    return g.reshape(v, {1});
}

ad::Tensor forward_generator(const ParamSet& params, const ad::Tensor& x_lr,
                             const GeneratorSpec& spec) {
    ad::Graph g;
    const BoundParams p = bind_params(g, params);
    const GeneratorTaps taps = generator_forward(g, p, g.leaf(x_lr), spec);
    ad::Tensor out = g.tensor(taps.out);
    out.require_finite("generator output");
    return out;
}

double forward_discriminator(const ParamSet& params, const ad::Tensor& x,
                             const DiscriminatorSpec& spec) {
    ad::Graph g;
    const BoundParams p = bind_params(g, params);
    const ad::Value score = discriminator_forward(g, p, g.leaf(x), spec);
    const double s = g.scalar_val(score);
    if (!std::isfinite(s)) throw NumericError("discriminator score is non-finite");
    return s;
}

AdamState AdamState::init(const ParamSet& params) {
    AdamState st;
    for (const auto& [name, t] : params.entries()) {
        st.m.add(name, ad::Tensor::zeros(t.shape));
        st.v.add(name, ad::Tensor::zeros(t.shape));
    }
    return st;
}

void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr,
               double beta1, double beta2, double eps) {
    if (!params.same_structure(grads) || !params.same_structure(state.m))
        throw ValidationError("adam_step: parameter/gradient structure mismatch");

    state.step += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.step));

    for (std::size_t i = 0; i < params.entries().size(); ++i) {
        auto& theta = params.entries()[i].second.v;
        const auto& g = grads.entries()[i].second.v;
        auto& m = state.m.entries()[i].second.v;
        auto& v = state.v.entries()[i].second.v;
        for (std::size_t j = 0; j < theta.size(); ++j) {
            m[j] = beta1 * m[j] + (1.0 - beta1) * g[j];
            v[j] = beta2 * v[j] + (1.0 - beta2) * g[j] * g[j];
            const double mhat = m[j] / bc1;
            const double vhat = v[j] / bc2;
            theta[j] -= lr * mhat / (std::sqrt(vhat) + eps);
        }
    }
    params.quantize_f32();
}

ParamSet interpolate_weights(const ParamSet& a, const ParamSet& b, double alpha) {
    if (!a.same_structure(b))
        throw ValidationError("interpolate_weights: structure mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ValidationError("interpolate_weights: alpha must lie in [0,1]");
    if (alpha == 0.0) return a;
    if (alpha == 1.0) return b;

    ParamSet out = a;
    for (std::size_t i = 0; i < out.entries().size(); ++i) {
        auto& o = out.entries()[i].second.v;
        const auto& bv = b.entries()[i].second.v;
        for (std::size_t j = 0; j < o.size(); ++j)
            o[j] = (1.0 - alpha) * o[j] + alpha * bv[j];
    }
    out.quantize_f32();
    return out;
}

} // namespace f4d::net
