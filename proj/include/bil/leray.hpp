#pragma once

#include "bil/spectral_ops.hpp"

namespace bil {

/// Diagnostics attached to physical-space products.
struct AliasingInfo {
    bool support_overflow = false;  // occupied supports of the factors sum past Nyquist
    double top_third_energy = 0.0;  // output energy fraction with max_i |k_i| > N/3
};

/// Leray projector: u_hat(k) -> u_hat(k) - k (k . u_hat)/|k|^2. The zero mode
/// passes through unchanged; *nonzero_mean is set when it is not negligible.
SpectralVector leray_project(const SpectralVector& u, bool* nonzero_mean = nullptr);

/// Pointwise tensor product u_i v_j formed in physical space.
TensorField tensor_product(const SpectralVector& u, const SpectralVector& v,
                           AliasingInfo* info = nullptr);

/// B(u,v) = P (-Laplace)^{-1} div(u (x) v), assembled without materializing
/// the full tensor. Output is divergence-free to machine precision.
SpectralVector bilinear_B(const SpectralVector& u, const SpectralVector& v,
                          AliasingInfo* info = nullptr);

/// g = (-Laplace)^{-1} P f.
SpectralVector lift_force(const SpectralVector& f);

} // namespace bil
