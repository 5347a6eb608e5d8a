#include "f4d/losses.hpp"

namespace f4d::loss {

std::string variant_name(Variant v) {
    switch (v) {
    case Variant::Vanilla: return "vanilla";
    case Variant::Relativistic: return "relativistic";
    default: return "wasserstein";
    }
}

Variant variant_from_name(const std::string& name) {
    if (name == "vanilla") return Variant::Vanilla;
    if (name == "relativistic") return Variant::Relativistic;
    if (name == "wasserstein") return Variant::Wasserstein;
    throw ValidationError("unknown adversarial variant '" + name + "'");
}

void LossConfig::validate() const {
    if (lambda_g < 0 || mu_g < 0 || mu_d < 0 || lambda_gp < 0)
        throw ValidationError("loss config: weights must be >= 0");
}

namespace {

// Region indicator replicated across the 3 velocity channels of a {3,n,n,n}
// patch tensor.
ad::Value region_indicator(ad::Graph& g, const std::vector<int>& shape,
                           const std::vector<std::uint8_t>& labels,
                           bool (*pred)(std::uint8_t), std::size_t* count_out) {
    const std::size_t vox = static_cast<std::size_t>(shape[1]) * shape[2] * shape[3];
    if (labels.size() != vox)
        throw ValidationError("region labels do not match patch dims");
    std::vector<double> m(static_cast<std::size_t>(shape[0]) * vox, 0.0);
    std::size_t count = 0;
    for (std::size_t i = 0; i < vox; ++i) {
        if (pred(labels[i])) {
            ++count;
            for (int c = 0; c < shape[0]; ++c) m[c * vox + i] = 1.0;
        }
    }
    if (count_out) *count_out = count;
    return g.leaf(shape, std::move(m));
}

} // namespace

std::pair<ad::Value, std::size_t> region_sq_sum(ad::Graph& g, ad::Value sr,
                                                ad::Value hr,
                                                const std::vector<std::uint8_t>& labels,
                                                Region region) {
    if (g.shape(sr) != g.shape(hr))
        throw ValidationError("region_sq_sum: SR/HR shape mismatch");
    static bool (*preds[3])(std::uint8_t) = {
        [](std::uint8_t l) { return l == static_cast<std::uint8_t>(Region::NonFluid); },
        [](std::uint8_t l) { return l == static_cast<std::uint8_t>(Region::Boundary); },
        [](std::uint8_t l) { return l == static_cast<std::uint8_t>(Region::Core); }};
    std::size_t count = 0;
    ad::Value ind = region_indicator(g, g.shape(sr), labels,
                                     preds[static_cast<int>(region)], &count);
    ad::Value d = g.sub(sr, hr);
    ad::Value s = g.sum(g.mul(g.mul(d, d), ind));
    return {s, count};
}

ad::Value region_mse(ad::Graph& g, ad::Value sr, ad::Value hr,
                     const std::vector<std::uint8_t>& labels, Region region) {
    auto [s, count] = region_sq_sum(g, sr, hr, labels, region);
    if (count == 0) return g.scalar(0.0);
    return g.scale(s, 1.0 / static_cast<double>(count));
}

ad::Value mask_nonfluid(ad::Graph& g, ad::Value sr,
                        const std::vector<std::uint8_t>& labels) {
    ad::Value ind = region_indicator(
        g, g.shape(sr), labels,
        [](std::uint8_t l) { return l != static_cast<std::uint8_t>(Region::NonFluid); },
        nullptr);
    return g.mul(sr, ind);
}

namespace {

ad::Value mean_of(ad::Graph& g, const std::vector<ad::Value>& xs) {
    if (xs.empty()) throw ValidationError("adversarial loss: empty score list");
    ad::Value acc = xs[0];
    for (std::size_t i = 1; i < xs.size(); ++i) acc = g.add(acc, xs[i]);
    return g.scale(acc, 1.0 / static_cast<double>(xs.size()));
}

// softplus(x) = -log sigma(-x); the stable form of -log(1 - sigma(x)).
ad::Value softplus(ad::Graph& g, ad::Value x) {
    return g.scale(g.log_sigmoid(g.scale(x, -1.0)), -1.0);
}

ad::Value mean_softplus(ad::Graph& g, const std::vector<ad::Value>& xs, double sign) {
    if (xs.empty()) throw ValidationError("adversarial loss: empty score list");
    ad::Value acc{-1};
    for (const ad::Value& x : xs) {
        ad::Value t = softplus(g, sign < 0 ? g.scale(x, -1.0) : x);
        acc = acc.valid() ? g.add(acc, t) : t;
    }
    return g.scale(acc, 1.0 / static_cast<double>(xs.size()));
}

} // namespace

std::pair<ad::Value, ad::Value> adv_vanilla(ad::Graph& g,
                                            const std::vector<ad::Value>& scores_hr,
                                            const std::vector<ad::Value>& scores_sr) {
    // L_G = -E[log sigma(D(sr))] = E[softplus(-D(sr))]
    ad::Value lg = mean_softplus(g, scores_sr, -1.0);
    // L_D = E[softplus(-D(hr))] + E[softplus(D(sr))]
    ad::Value ld = g.add(mean_softplus(g, scores_hr, -1.0),
                         mean_softplus(g, scores_sr, +1.0));
    return {lg, ld};
}

std::pair<ad::Value, ad::Value> adv_relativistic(
    ad::Graph& g, const std::vector<ad::Value>& scores_hr,
    const std::vector<ad::Value>& scores_sr) {
    ad::Value mean_hr = mean_of(g, scores_hr);
    ad::Value mean_sr = mean_of(g, scores_sr);
    std::vector<ad::Value> d_hr, d_sr; // relativistic differences
    d_hr.reserve(scores_hr.size());
    d_sr.reserve(scores_sr.size());
    for (const ad::Value& s : scores_hr) d_hr.push_back(g.sub(s, mean_sr));
    for (const ad::Value& s : scores_sr) d_sr.push_back(g.sub(s, mean_hr));

    // L_D = -E[log Drel(hr,sr)] - E[log(1 - Drel(sr,hr))]
    ad::Value ld = g.add(mean_softplus(g, d_hr, -1.0), mean_softplus(g, d_sr, +1.0));
    // L_G = -E[log(1 - Drel(hr,sr))] - E[log Drel(sr,hr)]
    ad::Value lg = g.add(mean_softplus(g, d_hr, +1.0), mean_softplus(g, d_sr, -1.0));
    return {lg, ld};
}

std::pair<ad::Value, ad::Value> adv_wasserstein(
    ad::Graph& g, const std::vector<ad::Value>& scores_hr,
    const std::vector<ad::Value>& scores_sr, ad::Value gp) {
    ad::Value lg = mean_of(g, scores_sr);
    ad::Value ld = g.add(g.sub(mean_of(g, scores_hr), lg), gp);
    return {lg, ld};
}

ad::Value gradient_penalty(ad::Graph& g, const CriticFn& critic,
                           const std::vector<ad::Value>& x_hr,
                           const std::vector<ad::Value>& x_sr,
                           const std::vector<double>& betas, double lambda_gp) {
    if (x_hr.size() != x_sr.size() || x_hr.size() != betas.size() || x_hr.empty())
        throw ValidationError("gradient_penalty: batch size mismatch");

    ad::Value acc{-1};
    for (std::size_t i = 0; i < x_hr.size(); ++i) {
        const double beta = betas[i];
        if (!(beta >= 0.0 && beta <= 1.0))
            throw ValidationError("gradient_penalty: beta must lie in [0,1]");
        ad::Value xhat =
            g.add(g.scale(x_hr[i], beta), g.scale(x_sr[i], 1.0 - beta));
        ad::Value score = critic(g, xhat);
        ad::Value gin = g.gradients(score, {xhat})[0];
        ad::Value norm = g.sqrt(g.sum(g.mul(gin, gin)));
        ad::Value d = g.sub(norm, g.scalar(1.0));
        ad::Value term = g.mul(d, d);
        acc = acc.valid() ? g.add(acc, term) : term;
    }
    return g.scale(acc, lambda_gp / static_cast<double>(x_hr.size()));
}

ad::Value l2_sum(ad::Graph& g, const std::vector<ad::Value>& params) {
    ad::Value acc{-1};
    for (const ad::Value& p : params) {
        ad::Value t = g.sum(g.mul(p, p));
        acc = acc.valid() ? g.add(acc, t) : t;
    }
    if (!acc.valid()) return g.scalar(0.0);
    return acc;
}

namespace {

template <typename F>
std::pair<double, double> eval_scalar_pair(const std::vector<double>& hr,
                                           const std::vector<double>& sr, F&& fn) {
    ad::Graph g;
    g.set_exec(kern::Exec::Serial);
    std::vector<ad::Value> vh, vs;
    for (double s : hr) vh.push_back(g.scalar(s));
    for (double s : sr) vs.push_back(g.scalar(s));
    auto [lg, ld] = fn(g, vh, vs);
    return {g.scalar_val(lg), g.scalar_val(ld)};
}

} // namespace

std::pair<double, double> adv_vanilla(const std::vector<double>& scores_hr,
                                      const std::vector<double>& scores_sr) {
    return eval_scalar_pair(scores_hr, scores_sr,
                            [](ad::Graph& g, auto& h, auto& s) {
                                return adv_vanilla(g, h, s);
                            });
}

std::pair<double, double> adv_relativistic(const std::vector<double>& scores_hr,
                                           const std::vector<double>& scores_sr) {
    return eval_scalar_pair(scores_hr, scores_sr,
                            [](ad::Graph& g, auto& h, auto& s) {
                                return adv_relativistic(g, h, s);
                            });
}

std::pair<double, double> adv_wasserstein(const std::vector<double>& scores_hr,
                                          const std::vector<double>& scores_sr,
                                          double gp) {
    return eval_scalar_pair(scores_hr, scores_sr,
                            [gp](ad::Graph& g, auto& h, auto& s) {
                                return adv_wasserstein(g, h, s, g.scalar(gp));
                            });
}

} // namespace f4d::loss
