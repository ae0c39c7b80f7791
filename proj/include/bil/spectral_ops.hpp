#pragma once

#include <functional>

#include "bil/spectral_field.hpp"

namespace bil {

/// Spectral derivative along one axis: coeff(k) *= i k_axis / L.
/// The Nyquist plane k_axis = N/2 is zeroed (an odd multiplier has no
/// Hermitian-consistent value there).
SpectralScalar derivative(const SpectralScalar& f, int axis);

/// Sum of component derivatives.
SpectralScalar divergence(const SpectralVector& u);

/// (grad f)_i = derivative(f, i).
SpectralVector gradient(const SpectralScalar& f);

/// (-Laplace)^{-1}: coeff(k) /= |k/L|^2 for k != 0; the zero mode maps to 0.
/// Sets *mean_warning when |coeff(0)| > 1e-12 * ||f||_2.
SpectralScalar inverse_laplacian(const SpectralScalar& f, bool* mean_warning = nullptr);

/// (-Laplace)^{alpha/2}: coeff(k) *= |k/L|^alpha, zero mode -> 0 (identity
/// on the zero mode only when alpha == 0).
SpectralScalar riesz_potential(const SpectralScalar& f, double alpha, bool* mean_warning = nullptr);

/// Applies a real frequency multiplier m(k).
SpectralScalar apply_multiplier(const SpectralScalar& f,
                                const std::function<double(const KVec&)>& mult);

/// Uniform-grid Riemann sum ((2 pi L / N)^d sum |f(x)|^p)^{1/p}, 1 <= p < inf.
double lp_norm(const SpectralScalar& f, double p);
double lp_norm(const SpectralVector& u, double p);

/// L2 norm from coefficients: (2 pi L)^{d/2} sqrt(sum |coeff|^2).
double parseval_l2(const SpectralScalar& f);
double parseval_l2(const SpectralVector& u);

/// Random mean-free band-limited real field: Hermitian coefficients drawn on
/// modes with 0 < max_i |k_i| <= kmax. Deterministic in `seed`.
SpectralScalar random_band_limited(const Grid& grid, std::uint64_t seed, int kmax);

/// Random divergence-free mean-free band-limited vector field.
SpectralVector random_divergence_free(const Grid& grid, std::uint64_t seed, int kmax);

} // namespace bil
