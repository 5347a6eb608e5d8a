#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "f4d/autodiff.hpp"
#include "f4d/volume.hpp"

namespace f4d::loss {

enum class Variant { Vanilla, Relativistic, Wasserstein };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct LossConfig {
    double lambda_g = 1e-3; ///< adversarial weight
    double mu_g = 5e-7;     ///< generator L2 weight
    double mu_d = 5e-5;     ///< discriminator L2 weight
    double lambda_gp = 10.0;
    Variant variant = Variant::Wasserstein;

    void validate() const;
};

/// One evaluation of the composite losses. total_g and total_d follow the
/// printed combination: data terms + lambda_g*adv_g + mu_g*l2_g, and
/// adv_d + mu_d*l2_d (adv_d already contains the gradient penalty for the
/// Wasserstein variant).
struct LossReport {
    double mse_nonfluid = 0, mse_bound = 0, mse_core = 0;
    double adv_g = 0, adv_d = 0;
    double l2_g = 0, l2_d = 0;
    double total_g = 0, total_d = 0;
};

// ---- graph-level building blocks (differentiable) ---------------------------

/// Per-voxel squared-residual sum restricted to `region`, plus the voxel
/// count; region_mse = sum / count. Exposed separately so batches can pool
/// regions across samples.
std::pair<ad::Value, std::size_t> region_sq_sum(ad::Graph& g, ad::Value sr,
                                                ad::Value hr,
                                                const std::vector<std::uint8_t>& labels,
                                                Region region);

/// Mean over region voxels of || sr_i - hr_i ||^2 (0 for an empty region).
ad::Value region_mse(ad::Graph& g, ad::Value sr, ad::Value hr,
                     const std::vector<std::uint8_t>& labels, Region region);

/// Zeroes every NonFluid voxel of a {3,n,n,n} patch; fluid voxels pass
/// through bitwise. Idempotent.
ad::Value mask_nonfluid(ad::Graph& g, ad::Value sr,
                        const std::vector<std::uint8_t>& labels);

/// (L_G, L_D) for the original adversarial loss, stabilized via softplus.
std::pair<ad::Value, ad::Value> adv_vanilla(ad::Graph& g,
                                            const std::vector<ad::Value>& scores_hr,
                                            const std::vector<ad::Value>& scores_sr);

/// (L_G, L_D) for the relativistic average discriminator.
std::pair<ad::Value, ad::Value> adv_relativistic(
    ad::Graph& g, const std::vector<ad::Value>& scores_hr,
    const std::vector<ad::Value>& scores_sr);

/// (L_G, L_D) for the Wasserstein critic; gp is added to L_D as-is.
std::pair<ad::Value, ad::Value> adv_wasserstein(
    ad::Graph& g, const std::vector<ad::Value>& scores_hr,
    const std::vector<ad::Value>& scores_sr, ad::Value gp);

using CriticFn = std::function<ad::Value(ad::Graph&, ad::Value)>;

/// lambda_gp * mean_i (||grad_xhat D(xhat_i)||_2 - 1)^2 with
/// xhat_i = beta_i * x_hr_i + (1 - beta_i) * x_sr_i. The result is
/// differentiable with respect to the critic parameters (double backprop).
ad::Value gradient_penalty(ad::Graph& g, const CriticFn& critic,
                           const std::vector<ad::Value>& x_hr,
                           const std::vector<ad::Value>& x_sr,
                           const std::vector<double>& betas, double lambda_gp);

/// Sum of squares over a parameter list.
ad::Value l2_sum(ad::Graph& g, const std::vector<ad::Value>& params);

// ---- scalar conveniences (tests, reporting) ---------------------------------

std::pair<double, double> adv_vanilla(const std::vector<double>& scores_hr,
                                      const std::vector<double>& scores_sr);
std::pair<double, double> adv_relativistic(const std::vector<double>& scores_hr,
                                           const std::vector<double>& scores_sr);
std::pair<double, double> adv_wasserstein(const std::vector<double>& scores_hr,
                                          const std::vector<double>& scores_sr,
                                          double gp);

} // namespace f4d::loss
