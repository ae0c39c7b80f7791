#pragma once

#include <limits>

#include "bil/littlewood_paley.hpp"

namespace bil {

/// Homogeneous Besov space indices. q = besov_qinf() selects the sup norm.
struct BesovParams {
    double s = 0.0;
    double p = 2.0;
    double q = 2.0;
};

inline constexpr double besov_qinf() { return std::numeric_limits<double>::infinity(); }

/// (sum_j 2^{jsq} ||block_j f||_{L^p}^q)^{1/q} over the certified range
/// (sup over j when q = inf). f must be mean-free with its energy inside the
/// certified radius window; more than 1e-8 relative out-of-range energy throws.
double besov_norm(const SpectralScalar& f, const BesovParams& params, const DyadicPartition& part);

/// Vector norm: component block L^p norms are combined in l2 across components
/// before the l^q dyadic sum.
double besov_norm(const SpectralVector& u, const BesovParams& params, const DyadicPartition& part);

/// Same sum restricted to j in `indices` (all certified).
double restricted_besov_norm(const SpectralScalar& f, const BesovParams& params,
                             const BlockIndexSet& indices, const DyadicPartition& part);
double restricted_besov_norm(const SpectralVector& u, const BesovParams& params,
                             const BlockIndexSet& indices, const DyadicPartition& part);

/// The certified-range sum without the out-of-range energy gate. Quadratic
/// images (u, B(g,g)) legitimately carry doubled-carrier content above the
/// top certified block; their norms are reported over the certified window.
double besov_norm_certified(const SpectralScalar& f, const BesovParams& params,
                            const DyadicPartition& part);
double besov_norm_certified(const SpectralVector& u, const BesovParams& params,
                            const DyadicPartition& part);

/// Dyadic scaling f -> lambda^w f(lambda .), lambda = 2^{lam_log2}, realized
/// exactly in frequency space: the box period rescales to L / lambda, so the
/// mode of integer index k moves to physical frequency lambda k / L and the
/// dyadic blocks shift by lam_log2. Satisfies
///   besov_norm(scaled f; s,p,q) = 2^{m (w + s - d/p)} besov_norm(f; s,p,q)
/// to machine precision (the certified range shifts along; both partitions
/// must be built for their own grids).
SpectralScalar scaling_transform(const SpectralScalar& f, int lam_log2, double weight);
SpectralVector scaling_transform(const SpectralVector& u, int lam_log2, double weight);

} // namespace bil
