#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "f4d/autodiff.hpp"

namespace f4d::net {

/// Ordered, named parameter collection (theta_G / theta_D). Iteration always
/// follows insertion order, which fixes the checkpoint layout.
class ParamSet {
public:
    void add(std::string name, ad::Tensor t);
    bool has(const std::string& name) const { return index_.count(name) != 0; }
    ad::Tensor& at(const std::string& name);
    const ad::Tensor& at(const std::string& name) const;

    std::size_t size() const { return items_.size(); }
    std::size_t total_scalars() const;
    bool same_structure(const ParamSet& other) const;

    std::vector<std::pair<std::string, ad::Tensor>>& entries() { return items_; }
    const std::vector<std::pair<std::string, ad::Tensor>>& entries() const {
        return items_;
    }

    /// Rounds every value to the nearest binary32, so saved checkpoints are
    /// bit-identical to the live parameters.
    void quantize_f32();

private:
    std::vector<std::pair<std::string, ad::Tensor>> items_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Scaled-down residual-in-residual dense generator: head conv, n_rrdb
/// blocks, trunk conv with a global residual, trilinear x2 upsampling,
/// n_hr_blocks HR convs, and one conv branch per velocity component.
struct GeneratorSpec {
    int n_rrdb = 2;
    int width = 16;
    int growth = 8;
    int n_hr_blocks = 1;

    void validate() const;
};

/// Strided-conv critic: n_down_blocks stride-2 convs (channel count doubling
/// from `width`), flatten, one hidden dense layer, scalar pre-activation
/// score.
struct DiscriminatorSpec {
    int n_down_blocks = 2;
    int width = 16;
    int hidden = 64;

    void validate() const;
    int spatial_after_blocks() const; ///< spatial edge before flatten (24^3 input)
};

ParamSet init_generator(const GeneratorSpec& spec, std::uint64_t seed);
ParamSet init_discriminator(const DiscriminatorSpec& spec, std::uint64_t seed);

std::size_t generator_param_count(const GeneratorSpec& spec);
std::size_t discriminator_param_count(const DiscriminatorSpec& spec);

/// Parameters registered as graph leaves, preserving set order.
struct BoundParams {
    std::vector<std::pair<std::string, ad::Value>> values;

    ad::Value at(const std::string& name) const;
    std::vector<ad::Value> all() const;
};

BoundParams bind_params(ad::Graph& g, const ParamSet& params);

struct GeneratorTaps {
    ad::Value out;    ///< {3,24,24,24}
    ad::Value middle; ///< activations entering the trilinear upsampler
    ad::Value end;    ///< activations entering the per-component branches
};

GeneratorTaps generator_forward(ad::Graph& g, const BoundParams& p, ad::Value x_lr,
                                const GeneratorSpec& spec);

ad::Value discriminator_forward(ad::Graph& g, const BoundParams& p, ad::Value x,
                                const DiscriminatorSpec& spec);

/// Eval-only wrappers over a throwaway graph.
ad::Tensor forward_generator(const ParamSet& params, const ad::Tensor& x_lr,
                             const GeneratorSpec& spec);
double forward_discriminator(const ParamSet& params, const ad::Tensor& x,
                             const DiscriminatorSpec& spec);

/// Adam optimizer state (first/second moments per parameter plus step count).
struct AdamState {
    ParamSet m, v;
    long step = 0;

    static AdamState init(const ParamSet& params);
};

/// Standard Adam update with bias correction. Updated parameters are rounded
/// to the binary32 grid (the checkpoint precision).
void adam_step(ParamSet& params, const ParamSet& grads, AdamState& state, double lr,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

/// Per-parameter (1-alpha)*a + alpha*b. The endpoints return the inputs
/// bit-for-bit.
ParamSet interpolate_weights(const ParamSet& a, const ParamSet& b, double alpha);

} // namespace f4d::net
