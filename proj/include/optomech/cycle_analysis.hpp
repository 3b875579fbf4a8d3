#pragma once

#include "optomech/core_model.hpp"
#include "optomech/integrator.hpp"

#include <string>
#include <vector>

namespace optomech {

struct TurningPoint {
    double t = 0.0; ///< [s]
    double x = 0.0; ///< [m]
    bool right = false; ///< p crosses + to -; otherwise - to +
};

/// Poincare section p = 0 with linear interpolation between adjacent samples.
std::vector<TurningPoint> turning_points(const std::vector<Sample>& samples);

struct CyclePoint {
    double t = 0.0;
    double x = 0.0;
    double p = 0.0;
};

/// Change of the momentum-equivalent of mechanical energy, sqrt(p^2 + (m omega_m x)^2),
/// across a window of width 10 kappa / g centred on x_k.
struct SawtoothJump {
    int k = 0;
    bool forward = true;
    double jump = 0.0; ///< [kg m/s]; positive means acceleration
};

struct LimitCycle {
    double a_min = 0.0;  ///< -min x [m], clamped at 0
    double a_max = 0.0;  ///< max x [m], clamped at 0
    double a_bar = 0.0;  ///< sqrt((a_min^2 + a_max^2) / 2)
    double period = 0.0; ///< [s]; 0 for the rest state
    std::vector<CyclePoint> points; ///< one period
    std::vector<SawtoothJump> jumps;
};

/// sqrt((a_min^2 + a_max^2) / 2), the only formula used for LimitCycle::a_bar.
double average_amplitude(double a_min, double a_max) noexcept;

enum class CycleStatus { Converged, Rest, NotConverged, Failed };

const char* to_string(CycleStatus status) noexcept;

struct CycleDetection {
    CycleStatus status = CycleStatus::NotConverged;
    LimitCycle cycle;
    std::string detail;
};

struct DetectionOptions {
    double rel_tol = 1e-3;
    double window_periods = 20.0;
    /// Below this half peak-to-peak x over the window the trajectory counts as at rest [m];
    /// a static radiation-pressure offset is still rest.
    double rest_floor = 10e-9;
};

/// Convergence test on the turning-point sequences over the last window_periods.
CycleDetection detect_limit_cycle(const Trajectory& traj, const DetectionOptions& opts = {});

/// Signed jump at every x_k inside [-a_min, a_max], one entry per crossing direction.
std::vector<SawtoothJump> sawtooth_profile(const LimitCycle& cycle, const SystemParams& params);

/// Period average of x (trapezoidal in t).
double equilibrium_shift(const LimitCycle& cycle);

struct Branch {
    double center = 0.0; ///< mean a_bar of the members [m]
    double spread = 0.0; ///< max - min a_bar of the members [m]
    int count = 0;
    LimitCycle representative;
};

struct BranchSet {
    std::vector<Branch> branches; ///< increasing center
};

/**
 * Single-linkage clustering on a_bar. Neighbours are split where the gap exceeds
 * max(lambda_l / 20, gap_factor * median spread of the clusters formed at lambda_l / 20).
 */
BranchSet cluster_branches(const std::vector<LimitCycle>& cycles, double lambda_l, double gap_factor = 3.0);

struct EnsembleSpec {
    int n_seeds = 12;
    double a_lo = 0.25e-6;         ///< smallest equivalent seed amplitude [m]
    double a_hi = 6e-6;            ///< largest [m]
    double transient_periods = 200.0;
    double window_periods = 20.0;
    int max_extensions = 2;        ///< extra transient+window chunks for slow convergers
    int sample_stride = 10;
    double rel_tol = 1e-3;
    unsigned workers = 0;          ///< 0 = hardware concurrency

    /// Seed amplitudes, uniform on [a_lo, a_hi] (a single seed uses a_lo).
    std::vector<double> seeds() const;
};

struct SeedOutcome {
    double seed_amplitude = 0.0;
    CycleStatus status = CycleStatus::NotConverged;
    LimitCycle cycle;
    std::string detail;
    MirrorState final_mirror;
};

struct EnsembleResult {
    std::vector<SeedOutcome> seeds; ///< in seed order
    BranchSet branches;             ///< from converged and rest outcomes
};

/// Integrates one trajectory from `start` and tests it for a limit cycle, extending as allowed.
SeedOutcome run_to_cycle(const SystemParams& params, const IntegratorConfig& base,
                         const EnsembleSpec& spec, const MirrorState& start);

/// Seeds (x, p) = (0, m omega_m a) for each seed amplitude a.
EnsembleResult run_ensemble(const SystemParams& params, const IntegratorConfig& base,
                            const EnsembleSpec& spec, double gap_factor = 3.0);

} // namespace optomech
