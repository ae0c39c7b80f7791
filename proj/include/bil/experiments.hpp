#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bil/construction.hpp"
#include "bil/picard.hpp"

namespace bil {

/// Parsed CLI/JSON run configuration. Unknown keys are rejected at parse time.
struct RunConfig {
    std::string command = "certify"; // certify | decay | inflation | solve | endtoend
    int dim = 3;
    int res = 64;
    double period = 1.0;

    // schedule / sweep
    std::vector<int> m_values = {1, 2, 3, 4};
    double q = 1.0;
    double eps = 0.1;
    std::vector<double> eps_sweep = {0.4, 0.2, 0.1};
    double amplitude_base = 1.0;
    double bandwidth_factor = 15.0;
    std::string schedule_kind = "fejer"; // fejer | spectral
    std::string g_file;                  // solve: optional BSPC1 component prefix

    // besov selection (0 resolves to p = d / the schedule q)
    double besov_s = 0.0;
    double besov_p = 0.0;
    double besov_q = 0.0;

    SolverConfig solver;
    bool cubic_check = false;

    std::string out_dir = "out";
    std::uint64_t seed = 7;
    int threads = 1;
    std::string sabotage = "none"; // none | partition | projector
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);

/// One sweep instance. Column order of the CSV matches field order here.
struct SweepRow {
    int m = 0;
    double n_proxy = 0.0;
    double eps = 0.0;
    double g_Bd1 = 0.0;        // ||g||_{B^0_{d,1}}
    double g_Bdq = 0.0;        // ||g||_{B^0_{d,q}}
    double c_Bd1 = 0.0;        // ||c||_{B^0_{d,1}}
    double BG_restr_Bdq = 0.0; // restricted ||B(g,g)||_{B^0_{d,q}(K)}
    double u_Bdq = 0.0;
    double u_restr_Bdq = 0.0;
    double U_Ld = 0.0;
    double U_Bdq = 0.0;
    double J1 = 0.0, J2 = 0.0, J3 = 0.0, J4 = 0.0;
    double H2_rel = 0.0;      // ||H2||_2 / ||H1||_2
    double cancel_max = 0.0;  // max_l ||block_l H2||_2 / ||H2||_2 (0 when H2 = 0)
    int iterations = 0;
    std::string flags;
};

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Per-block J measurements (paper's J1..J4 analogs) and their q-aggregates
/// J_i = sum_l 2^{-2lq} v_i(l)^q.
struct JTerms {
    std::vector<int> blocks;
    std::vector<double> v1, v2, v3, v4;
    double J1 = 0.0, J2 = 0.0, J3 = 0.0, J4 = 0.0;
};

JTerms compute_j_terms(const BuiltConstruction& built, const ConstructionSchedule& sched,
                       const DyadicPartition& part);

/// Minimal polyline SVG (one file per chart).
void write_svg_lines(const std::string& path, const std::string& title,
                     const std::string& x_label, const std::vector<double>& x,
                     const std::vector<std::pair<std::string, std::vector<double>>>& series);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

// Commands. Return the process exit code: 0 pass, 1 assertion failure,
// 2 configuration/feasibility error.
int cmd_certify(const RunConfig& cfg, std::ostream& log);
int cmd_decay(const RunConfig& cfg, std::ostream& log);
int cmd_inflation(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_endtoend(const RunConfig& cfg, std::ostream& log);
int run_command(const RunConfig& cfg, std::ostream& log);

/// The endtoend sweep (shared with the acceptance suite): builds, solves and
/// measures every instance in cfg.m_values. Throws on infeasible schedules;
/// solver failures are reported in the row flags.
std::vector<SweepRow> run_endtoend_sweep(const RunConfig& cfg, bool solve);

} // namespace bil
