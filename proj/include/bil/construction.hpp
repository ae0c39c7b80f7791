#pragma once

#include <optional>
#include <string>

#include "bil/besov.hpp"
#include "bil/leray.hpp"

namespace bil {

// ----------------------------------------------------------------------------
// Reference profiles (continuum scale)
// ----------------------------------------------------------------------------

/// Smooth even cutoff with theta_hat = 1 for |xi| <= 1/(200 d) and 0 for
/// |xi| >= 1/(100 d).
double theta_hat(double xi, int d);

/// theta(x) = (1/pi) int_0^inf theta_hat(xi) cos(x xi) dxi (Simpson, 4096 panels).
double theta_eval(double x, int d);

/// phi(x) = theta(x_1) ... theta(x_d) sin(17/24 x_d).
std::function<double(const std::array<double, 4>&)> phi_profile(int d);

/// diag(eps, eps, 1, ..., 1) and e = (sqrt2/2)(1, 1, 0, ..., 0).
std::array<double, 4> matrix_A_diag(double eps, int d);
std::array<double, 4> direction_e(int d);

// ----------------------------------------------------------------------------
// Desk-scale schedule
// ----------------------------------------------------------------------------

/// How envelope factors are realized on the grid.
///  - Spectral: hard-truncated trigonometric profiles whose Fourier supports
///    are exact finite mode sets inside the Lemma A.1 annulus. Machine-exact
///    annulus containment and carrier-block purity; hosts a single summand.
///  - Fejer: nonnegative Fejer-kernel envelopes translated along x3. Band
///    limited exactly (order nfej), quasi-localized, so summand masses add in
///    L^d to a few percent; used for the multi-summand sweeps.
enum class EnvelopeKind { Spectral, Fejer };

/// One envelope summand: designated scale block, internal modulation h on
/// axis 2 (x3), and its translation data.
struct EnvelopeSummand {
    int block = 0;          // dyadic index l; squared envelope lands in its plateau
    int h = 1;              // internal carrier: doubled mode 2h sits in plateau(l)
    double x3_center = 0.0; // translation along x3, in angle units [0, 2 pi)
    double u_phase = 0.0;   // translation phase along the antidiagonal x1 - x2
};

/// Parameterization of the force family: lattice carrier (C, C, 0, ...)
/// modulating anisotropic envelopes, amplitude n_proxy^{-1/(2q)} with
/// n_proxy = 16 |summands| standing in for the paper's n.
struct ConstructionSchedule {
    int dim = 3;
    double q = 1.0;
    double eps = 0.1;
    int carrier = 0;                // integer C; carrier vector (C, C, 0, ..., 0)
    int carrier_block = 0;          // certified block holding the carrier
    double amplitude_base = 1.0;
    double bandwidth_factor = 15.0; // W; antidiagonal bandwidth sigma_u = eps * W
    int spread_cap = 2;             // hard cap on |T|: Nyquist and k2 != 0 budgets
    double spectral_hwidth = 0.9;   // x3 mode bump half width (Spectral kind)
    int fejer_order = 3;            // Fejer kernel order (Fejer kind)
    EnvelopeKind kind = EnvelopeKind::Fejer;
    std::vector<EnvelopeSummand> summands;

    double n_proxy() const { return 16.0 * static_cast<double>(summands.size()); }
    double amplitude() const;
    /// Distinct scale blocks, strictly increasing.
    BlockIndexSet block_set() const;

    /// Checks carrier plateau placement, Nyquist/product budgets, plateau
    /// residence of the squared-envelope modes, the k2 != 0 safety margin and
    /// translation separation. Throws on violation.
    void validate(const Grid& grid) const;

    std::string to_json() const;
    static ConstructionSchedule from_json(const std::string& text);
};

/// Feasibility-scanned schedule. Spectral kind: single summand placed for an
/// exact Lemma A.1 annulus (carrier in the top certified block). Fejer kind:
/// m summands at the top feasible envelope block, translated apart along x3;
/// the carrier sits one block below the top so all spectra stay inside the
/// certified radius window. carrier_block_override forces the carrier block.
/// Throws std::runtime_error when the grid cannot host the request.
ConstructionSchedule desk_scale(int d, double q, int m, const Grid& grid,
                                EnvelopeKind kind = EnvelopeKind::Fejer, double eps = 0.1,
                                int carrier_block_override = -1);

// ----------------------------------------------------------------------------
// Built fields
// ----------------------------------------------------------------------------

/// Energy split of a spectrum against target annuli (physical radii).
struct SupportReport {
    std::vector<std::pair<double, double>> annuli;
    double inside_energy = 0.0;
    double outside_energy = 0.0;
    bool pass = false; // outside <= 1e-10 relative
};

SupportReport verify_support(const SpectralScalar& f, double r_lo, double r_hi);
SupportReport verify_support(const SpectralScalar& f,
                             const std::vector<std::pair<double, double>>& annuli);

/// All fields of one schedule instance. The per-summand physical factors are
/// shared, so a^2 (H1 + H2) = b^2 holds to roundoff by construction.
struct BuiltConstruction {
    SpectralScalar b;
    SpectralScalar c;
    SpectralVector g;
    SpectralScalar H1, H2;
    std::vector<std::vector<double>> beta; // per-summand physical fields (amplitude off)
    std::vector<int> beta_block;           // designated block per summand
    double amplitude = 0.0;
    double carrier_radius = 0.0;           // physical |carrier|

    explicit BuiltConstruction(const Grid& grid)
        : b(grid), c(grid), g(grid), H1(grid), H2(grid) {}
};

/// Builds b, c, g, H1, H2 for a validated schedule.
BuiltConstruction build_construction(const ConstructionSchedule& sched, const Grid& grid);

/// b alone. carrier_on = false drops the sine carrier, leaving the envelope sum.
SpectralScalar build_bn(const ConstructionSchedule& sched, const Grid& grid,
                        bool carrier_on = true);

/// c = F^{-1}[ (k2 - k1)/k2 * b_hat ], multiplier 0 on the plane k2 = 0.
/// Throws if b has more than 1e-12 relative energy on that plane.
SpectralScalar build_cn(const SpectralScalar& b);

/// g = (b, c - b, 0, ..., 0); divergence-free by the multiplier identity.
SpectralVector build_gn(const ConstructionSchedule& sched, const Grid& grid);

/// Diagonal (same-summand) and cross (distinct-summand) parts of b^2 / a^2.
std::pair<SpectralScalar, SpectralScalar> build_H1_H2(const ConstructionSchedule& sched,
                                                      const Grid& grid);

/// Lemma A.1 annulus for the instance: physical radii Lambda * (33/34, 35/34).
std::pair<double, double> lemma_a1_annulus(const ConstructionSchedule& sched, const Grid& grid);

} // namespace bil
