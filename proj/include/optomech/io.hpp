#pragma once

#include "optomech/core_model.hpp"
#include "optomech/cycle_analysis.hpp"
#include "optomech/integrator.hpp"
#include "optomech/kickmap.hpp"
#include "optomech/sweep.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace optomech {

/// Parameters and integrator settings resolved from a config file plus overrides.
struct RunConfig {
    SystemParams params;
    IntegratorConfig integrator;
    bool refine_halfwidth_set = false; ///< otherwise the halfwidth follows lambda_l
};

/**
 * Flat key=value config. '#' starts a comment. Physical keys:
 *   omega_m_hz, mass_kg, gamma_over_omega_m, kappa_over_omega_m, lambda_nm,
 *   n_order, power_w            (required)
 *   duffing_alpha_per_m2        (optional, default 0)
 * Integrator keys (optional): dt_base, refine_factor, refine_halfwidth_nm,
 *   window_margin, ringdown_tolerance, ringdown_reach.
 * Errors are ConfigError carrying the key and 1-based line.
 */
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Desk-top defaults with default integrator settings.
RunConfig default_config();

/// Applies key=value overrides (line 0 in errors); same keys and validation as the file.
void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides);

/// Every key parse_config accepts.
const std::vector<std::string>& config_keys();

/// Writes `key = value` lines that parse_config reads back to the same values.
void write_config(std::ostream& out, const RunConfig& cfg);

/// %.17g
std::string format_double(double v);

namespace csv {

inline constexpr const char* trajectory_header = "t_s,x_m,p_kgms,n_photons_total,work_J,dissipated_J";
inline constexpr const char* photons_header = "t_s,n_photons_total";
inline constexpr const char* limit_cycle_header = "x_m,p_kgms";
inline constexpr const char* branch_header = "power_w,a_bar_m,a_min_m,a_max_m,branch_id,seed_count";
inline constexpr const char* fixed_cycle_header = "power_w,a_min_m,a_max_m,a_bar_m,stable,balance_residual";
inline constexpr const char* fixed_cycle_audit_header =
    "power_w,a_min_m,a_max_m,a_bar_m,stable,balance_residual,kick_work_J,arc_loss_J,slope,advisory";
inline constexpr const char* attractor_header = "power_w,a_bar_m,branch_id,n_seeds,status";
inline constexpr const char* duffing_header = "duffing_alpha_per_m2,a_bar_m,branch_id,n_seeds,status";
inline constexpr const char* comparison_header = "power_w,a_bar_full_m,a_bar_kickmap_m,rel_diff,matched";
inline constexpr const char* mode_dump_header = "t_s,k,re_alpha,im_alpha";

void write_trajectory(std::ostream& out, const Trajectory& traj);
void write_photons(std::ostream& out, const Trajectory& traj);
void write_limit_cycle(std::ostream& out, const LimitCycle& cycle);
void write_mode_dump(std::ostream& out, const Trajectory& traj);
void write_branch_table(std::ostream& out, const SweepResult& result);
void write_fixed_cycles(std::ostream& out, double power, const KickMap& km,
                        const std::vector<FixedCycle>& cycles, bool audit);
void write_attractor(std::ostream& out, const SweepResult& result);
void write_trace(std::ostream& out, const BranchTrace& trace);
void write_comparison(std::ostream& out, const ComparisonReport& report);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated file without quoting. Throws Error on ragged rows.
Table read(std::istream& in);

/// Checks the header against `expected` and that every cell of the named numeric
/// columns parses as a double (NaN allowed). Returns an empty string when valid.
std::string validate(const Table& table, const std::string& expected_header,
                     const std::vector<std::string>& numeric_columns);

} // namespace csv

} // namespace optomech
