#pragma once

#include <map>
#include <string>
#include <vector>

#include "bil/besov.hpp"
#include "bil/leray.hpp"

namespace bil {

enum class ResidualNorm { Ld, BesovB0d2 };

/// Configuration of the successive-approximation solver for u = B(u,u) + g.
struct SolverConfig {
    int max_iter = 60;
    double residual_tol = 1e-10;
    /// Abort threshold on ||g||_{L^d}. 0 means: calibrate as 1/(4 C_hat) with
    /// C_hat the measured sup of ||B(u,u)||/||u||^2 over a random corpus.
    double smallness_guard = 0.0;
    double damping = 1.0;
    ResidualNorm norm = ResidualNorm::Ld;
    std::uint64_t guard_seed = 12345;
};

enum class SolverError { None, SmallnessViolated, NonConvergence, DivergenceDetected };

struct SolverReport {
    SpectralVector u;
    int iterations = 0;
    std::vector<double> residual_history;
    bool converged = false;
    SolverError error = SolverError::None;
    double fixed_point_residual = 0.0; // independent post-hoc ||u - B(u,u) - g||
    double guard_used = 0.0;
    std::map<std::string, double> norms;

    explicit SolverReport(const Grid& grid) : u(grid) {}
};

const char* solver_error_name(SolverError e);

/// Measured sup of ||B(u,u)||_{L^d} / ||u||_{L^d}^2 over a seeded random
/// divergence-free corpus; the default smallness guard is 1/(4 C_hat).
double measure_bilinear_constant(const Grid& grid, std::uint64_t seed, int samples = 12);

/// Picard iteration u^0 = g, u^{m+1} = (1-damping) u^m + damping (B(u^m,u^m) + g).
/// part is required when cfg.norm = BesovB0d2.
SolverReport picard_solve(const SpectralVector& g, const SolverConfig& cfg,
                          const DyadicPartition* part = nullptr);

/// G = B(g,g); U = u - g - G.
std::pair<SpectralVector, SpectralVector> decompose_solution(const SpectralVector& u,
                                                             const SpectralVector& g);

/// JSON document: config echo, iteration count, residual history, named norms.
std::string solver_report_json(const SolverReport& report, const SolverConfig& cfg);

} // namespace bil
