#include "bil/picard.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bil {

const char* solver_error_name(SolverError e) {
    switch (e) {
        case SolverError::None: return "none";
        case SolverError::SmallnessViolated: return "SmallnessViolated";
        case SolverError::NonConvergence: return "NonConvergence";
        case SolverError::DivergenceDetected: return "DivergenceDetected";
    }
    return "unknown";
}

double measure_bilinear_constant(const Grid& grid, std::uint64_t seed, int samples) {
    const double d = grid.dim();
    const int kmax = std::max(2, grid.res() / 8);
    double chat = 0.0;
    for (int s = 0; s < samples; ++s) {
        SpectralVector u = random_divergence_free(grid, seed + 77 * s, kmax);
        double nu = lp_norm(u, d);
        if (nu == 0.0) continue;
        SpectralVector Bu = bilinear_B(u, u);
        chat = std::max(chat, lp_norm(Bu, d) / (nu * nu));
    }
    return chat;
}

namespace {

double solver_norm(const SpectralVector& v, ResidualNorm which, const DyadicPartition* part) {
    if (which == ResidualNorm::Ld) return lp_norm(v, v.grid().dim());
    if (!part) throw std::invalid_argument("picard_solve: Besov residual needs a partition");
    return besov_norm_certified(v, BesovParams{0.0, double(v.grid().dim()), 2.0}, *part);
}

} // namespace

SolverReport picard_solve(const SpectralVector& g, const SolverConfig& cfg,
                          const DyadicPartition* part) {
    if (cfg.max_iter < 1) throw std::invalid_argument("picard_solve: max_iter >= 1");
    if (!(cfg.residual_tol > 0.0)) throw std::invalid_argument("picard_solve: residual_tol > 0");
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0))
        throw std::invalid_argument("picard_solve: damping in (0,1]");

    const Grid& grid = g.grid();
    SolverReport report(grid);

    double guard = cfg.smallness_guard;
    if (guard <= 0.0) {
        double chat = measure_bilinear_constant(grid, cfg.guard_seed);
        guard = chat > 0.0 ? 1.0 / (4.0 * chat) : std::numeric_limits<double>::infinity();
    }
    report.guard_used = guard;

    const double d = grid.dim();
    double gnorm = lp_norm(g, d);
    if (gnorm >= guard) {
        report.error = SolverError::SmallnessViolated;
        report.norms["g_Ld"] = gnorm;
        return report;
    }

    SpectralVector u = g;
    int grew = 0;
    for (int m = 1; m <= cfg.max_iter; ++m) {
        SpectralVector Bu = bilinear_B(u, u);
        SpectralVector next = (1.0 - cfg.damping) * u + cfg.damping * (Bu + g);
        double r = solver_norm(next - u, cfg.norm, part);
        report.residual_history.push_back(r);
        u = next;
        report.iterations = m;
        if (r <= cfg.residual_tol) {
            report.converged = true;
            break;
        }
        std::size_t n = report.residual_history.size();
        if (n >= 2 && report.residual_history[n - 1] > report.residual_history[n - 2]) {
            if (++grew >= 3) {
                report.error = SolverError::DivergenceDetected;
                break;
            }
        } else {
            grew = 0;
        }
    }
    if (!report.converged && report.error == SolverError::None)
        report.error = SolverError::NonConvergence;

    // Independent a-posteriori certificate, recomputed outside the loop.
    SpectralVector residual = u - bilinear_B(u, u) - g;
    report.fixed_point_residual = solver_norm(residual, cfg.norm, part);
    if (report.converged && report.fixed_point_residual > cfg.residual_tol) {
        report.converged = false;
        report.error = SolverError::NonConvergence;
    }

    report.u = u;
    report.norms["g_Ld"] = gnorm;
    report.norms["u_Ld"] = lp_norm(u, d);
    if (part) report.norms["u_B0d2"] = besov_norm_certified(u, BesovParams{0.0, d, 2.0}, *part);
    return report;
}

std::pair<SpectralVector, SpectralVector> decompose_solution(const SpectralVector& u,
                                                             const SpectralVector& g) {
    SpectralVector G = bilinear_B(g, g);
    SpectralVector U = u - g - G;
    return {std::move(G), std::move(U)};
}

std::string solver_report_json(const SolverReport& report, const SolverConfig& cfg) {
    nlohmann::json j;
    j["config"]["max_iter"] = cfg.max_iter;
    j["config"]["residual_tol"] = cfg.residual_tol;
    j["config"]["smallness_guard"] = cfg.smallness_guard;
    j["config"]["damping"] = cfg.damping;
    j["config"]["norm"] = cfg.norm == ResidualNorm::Ld ? "Ld" : "B0d2";
    j["iterations"] = report.iterations;
    j["converged"] = report.converged;
    j["error"] = solver_error_name(report.error);
    j["guard_used"] = report.guard_used;
    j["fixed_point_residual"] = report.fixed_point_residual;
    j["residual_history"] = report.residual_history;
    for (const auto& [k, v] : report.norms) j["norms"][k] = v;
    return j.dump(2);
}

} // namespace bil
