#pragma once

#include "optomech/cycle_analysis.hpp"
#include "optomech/integrator.hpp"
#include "optomech/kickmap.hpp"

#include <string>
#include <vector>

namespace optomech {

enum class SweepVariable { Power, DuffingAlpha };
enum class SweepMode { Independent, ContinueUp, ContinueDown };

const char* to_string(SweepVariable v) noexcept;
const char* to_string(SweepMode m) noexcept;

struct SweepPlan {
    SweepVariable variable = SweepVariable::Power;
    std::vector<double> values; ///< strictly increasing; continue-down walks it from the top
    EnsembleSpec seeds;
    SweepMode mode = SweepMode::Independent;
    double gap_factor = 3.0;
    double jump_threshold = 0.25; ///< relative a_bar change flagged as a branch jump

    /// Throws InvalidParameter on an empty, non-increasing or too short list.
    void validate() const;

    /// from, from + step, ... up to `to` (inclusive within step/1e6).
    static std::vector<double> grid(double from, double to, double step);
};

struct SweepPoint {
    double value = 0.0;
    EnsembleResult ensemble;
};

struct SweepResult {
    SweepVariable variable = SweepVariable::Power;
    std::vector<SweepPoint> points; ///< in increasing value
};

/// One row per branch, plus one per seed that did not converge (branch_id -1).
struct AttractorRow {
    double value = 0.0;
    double a_bar = 0.0;
    double a_min = 0.0;
    double a_max = 0.0;
    int branch_id = 0;
    int n_seeds = 0;
    std::string status;
};

std::vector<AttractorRow> attractor_rows(const SweepResult& result);

/// Independent-mode ensemble at every power.
SweepResult power_sweep(const SweepPlan& plan, const SystemParams& params, const IntegratorConfig& cfg);

/// Independent-mode ensemble at every Duffing constant, power held at params.power.
SweepResult duffing_sweep(const SweepPlan& plan, const SystemParams& params, const IntegratorConfig& cfg);

/// Duffing constants alpha with |alpha| a_ref^2 spanning [product_lo, product_hi] in n steps.
std::vector<double> duffing_grid(double a_ref, double product_lo, double product_hi, int n);

struct TraceEntry {
    double value = 0.0;
    CycleStatus status = CycleStatus::NotConverged;
    double a_bar = 0.0;
    double a_min = 0.0;
    double a_max = 0.0;
    bool branch_jump = false;
};

struct BranchTrace {
    SweepMode mode = SweepMode::ContinueUp;
    std::vector<TraceEntry> entries; ///< in sweep order
    bool terminated = false;
    std::string termination;
};

/**
 * Follows one branch in power. The first value runs a full ensemble and picks the
 * lowest (continue-up) or highest (continue-down) branch; each later value starts
 * from the mirror state the previous run ended in.
 */
BranchTrace continuation_sweep(const SweepPlan& plan, const SystemParams& params, const IntegratorConfig& cfg);

struct ComparisonRow {
    double power = 0.0;
    double a_bar_full = 0.0;     ///< NaN when no full branch is paired
    double a_bar_kickmap = 0.0;  ///< NaN for a full branch no stable root paired with
    double rel_diff = 0.0;       ///< NaN when unpaired
    bool matched = false;
};

struct ComparisonReport {
    std::vector<ComparisonRow> rows;
    std::vector<int> full_counts;    ///< branches per power (rest excluded)
    std::vector<int> kickmap_counts; ///< stable roots per power
    double tolerance = 0.10;
};

/// Pairs every stable kick-map root with the nearest full-simulation branch.
ComparisonReport compare_oracles(const std::vector<double>& powers, const SystemParams& params,
                                 const IntegratorConfig& cfg, const EnsembleSpec& seeds,
                                 double tolerance = 0.10, double gap_factor = 3.0);

} // namespace optomech
