#pragma once

#include "optomech/core_model.hpp"
#include "optomech/dynamics.hpp"
#include "optomech/error.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace optomech {

/**
 * Fixed-step RK4 settings. Times are in scaled units (1/omega_m).
 *
 * The step is dt_base / refine_factor while any mode is being integrated, i.e.
 * while the mirror is within refine_halfwidth of a resonance position (or a
 * mode it just passed is still ringing down). Elsewhere all modes are slaved to
 * their quasi-static value and the mirror alone is stepped with dt_base.
 */
struct IntegratorConfig {
    double dt_base = 5e-4;
    int refine_factor = 10;
    double refine_halfwidth = 0.0; ///< [m]
    double t_end = 0.0;            ///< duration measured from the initial state's time
    int sample_stride = 1;
    double record_from = 0.0;      ///< samples earlier than this (relative) time are not stored
    int window_margin = 2;         ///< half-wavelengths kept beyond the turning points
    double ringdown_tolerance = 1e-6;
    double ringdown_reach = 8.0;   ///< ringing modes stay integrated up to this many refine halfwidths
    bool dump_modes = false;

    /// Defaults with refine_halfwidth = lambda_l / 20.
    static IntegratorConfig defaults(const SystemParams& params);

    double dt_fine() const noexcept { return dt_base / refine_factor; }
};

/// Running energy audit of the mirror [J].
struct EnergyLedger {
    double work_radiation = 0.0;
    double dissipated = 0.0;
    double mech_energy_start = 0.0;
    double mech_energy_now = 0.0;
};

struct Sample {
    double t = 0.0;               ///< [s]
    double x = 0.0;               ///< [m]
    double p = 0.0;               ///< [kg m/s]
    double photons = 0.0;         ///< sum_k |alpha_{N+k}|^2
    double work = 0.0;            ///< cumulative radiation work [J]
    double dissipated = 0.0;      ///< cumulative damping loss [J]
};

struct ModeSample {
    double t = 0.0;
    int k = 0;
    Complex alpha;
};

struct Trajectory {
    SystemParams params;
    std::vector<Sample> samples;
    std::vector<ModeSample> mode_dump;
    EnergyLedger ledger;
    FullState final_state;
    std::size_t steps = 0;
    std::size_t fine_steps = 0;
};

/// Raised when a step produced a non-finite value. last_good is the state before that step.
class NumericalBlowup : public NumericalError {
public:
    NumericalBlowup(const std::string& message, FullState last_good)
        : NumericalError(message), last_good_(std::move(last_good)) {}

    const FullState& last_good() const noexcept { return last_good_; }

private:
    FullState last_good_;
};

class Integrator {
public:
    /// Validates params and config; throws InvalidParameter if the fine step is too
    /// coarse for the fastest integrated phase rotation.
    Integrator(const SystemParams& params, const IntegratorConfig& cfg);

    /// Mirror at `mirror`, every window mode at its zeroth-order slaved value.
    FullState initial_state(const MirrorState& mirror, double time = 0.0) const;

    /// One classic RK4 step of (x, p, every amplitude in state.modes); dt in scaled time.
    FullState rk4_step(const FullState& state, double dt) const;

    /// Advance by cfg.t_end. Throws NumericalBlowup or GeometryError.
    Trajectory integrate(const FullState& initial) const;

    const SystemParams& params() const noexcept { return params_; }
    const IntegratorConfig& config() const noexcept { return cfg_; }
    const ScaledUnits& units() const noexcept { return units_; }

    /// Human-readable statement of the binding step-size constraint.
    const std::string& binding_constraint() const noexcept { return binding_; }

private:
    SystemParams params_;
    IntegratorConfig cfg_;
    ScaledUnits units_;
    std::string binding_;
};

/// |dE_mech - W + D| / max(|W|, D, |dE_mech|, E_start, E_now).
double ledger_residual(const Trajectory& traj);

} // namespace optomech
