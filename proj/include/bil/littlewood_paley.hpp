#pragma once

#include <utility>
#include <vector>

#include "bil/spectral_field.hpp"

namespace bil {

/// Smooth monotone step S: [-1,1] -> [0,1] built from the bump
/// psi(t) = exp(-1/(1-t^2)), integrated by composite Simpson (4096 panels)
/// and evaluated by cubic interpolation of the cumulative table.
/// S(-1) = 0, S(1) = 1, all derivatives vanish at the ends.
double smooth_step(double u);

/// Compactly supported spectral bump: 1 on |t| <= 1/2, smooth transition,
/// 0 on |t| >= 1 (exact branches at the ends).
double smooth_bump(double t);

/// Radial cutoffs of the dyadic partition: chi = 1 on r <= 3/4, 0 on
/// r >= 4/3; phi(r) = chi(r/2) - chi(r), supported on [3/4, 8/3] with
/// phi = 1 on [4/3, 3/2]. chi is tabulated on 2^16 radius samples with
/// cubic interpolation; the branches outside the transition are exact.
double chi_cutoff(double r);
double phi_cutoff(double r);

/// Strictly increasing set of dyadic indices.
using BlockIndexSet = std::vector<int>;

/// Sampled radial cutoffs plus the dyadic index range the grid certifies:
/// j_max is the largest j with 8/3 * 2^j <= N/(2L); j_min the smallest j
/// whose annulus (3/4, 8/3) * 2^j contains a lattice frequency.
class DyadicPartition {
  public:
    DyadicPartition(int j_min, int j_max, double phi_scale = 1.0);

    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }

    double chi(double r) const { return chi_cutoff(r); }
    double phi(double r) const { return phi_scale_ * phi_cutoff(r); }

    bool certified(int j) const { return j >= j_min_ && j <= j_max_; }

    /// Radius window [4/3 * 2^{j_min}, 3/2 * 2^{j_max}] on which the finite
    /// partition sum telescopes to exactly 1.
    std::pair<double, double> certified_radii() const;

    /// Exports (radius, chi, phi) rows.
    void write_profiles_csv(std::ostream& os, double r_lo, double r_hi, int samples) const;

  private:
    int j_min_;
    int j_max_;
    double phi_scale_; // 1.0 normally; != 1 only for sabotage/negative controls
};

/// Builds the certified partition for a grid. Throws if fewer than 3 dyadic
/// indices are certified. phi_scale != 1 is a deliberate sabotage knob used
/// by negative controls.
DyadicPartition build_partition(const Grid& grid, double phi_scale = 1.0);

/// Homogeneous dyadic block: coeff(k) *= phi(2^{-j} |k|/L). j must be certified.
SpectralScalar dyadic_block(const SpectralScalar& f, int j, const DyadicPartition& part);

/// Low-frequency cut: coeff(k) *= chi(2^{-j} |k|/L).
SpectralScalar low_pass(const SpectralScalar& f, int j, const DyadicPartition& part);

/// All certified blocks of f, in increasing j order. Sets *out_of_range to the
/// Parseval energy fraction outside the certified radius window (mean excluded).
std::vector<std::pair<int, SpectralScalar>> block_partition_apply(
    const SpectralScalar& f, const DyadicPartition& part, double* out_of_range = nullptr);

/// Parseval energy fraction of f outside the certified window (mean excluded).
double out_of_range_energy(const SpectralScalar& f, const DyadicPartition& part);

} // namespace bil
