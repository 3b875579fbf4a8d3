#pragma once

// Dimensionless equations of motion and the stepping engine behind Integrator.
// Not part of the installed interface.

#include "optomech/core_model.hpp"
#include "optomech/dynamics.hpp"
#include "optomech/integrator.hpp"

#include <cmath>
#include <vector>

namespace optomech::detail {

/// Coefficients of the scaled system: time 1/omega_m, length lambda/2, amplitude alpha_L/omega_m.
struct ScaledSystem {
    double n;         ///< N
    double detune;    ///< omega_l / omega_m
    double kappa;     ///< kappa / omega_m
    double gamma;     ///< gamma / omega_m
    double drive;     ///< 1 with a drive, 0 without
    double force;     ///< hbar omega_l s_a^2 / (m l^2 omega_m^2)
    double duffing;   ///< alpha l^2

    explicit ScaledSystem(const SystemParams& params);

    double detuning(int k, double X) const noexcept { return detune * (k - X) / (n + X); }

    Complex slaved_amplitude(int k, double X) const noexcept
    {
        const double d = detuning(k, X);
        const double den = d * d + kappa * kappa;
        // -i drive / (i d + kappa) = drive * (-d - i kappa) / (d^2 + kappa^2)
        return {-drive * d / den, -drive * kappa / den};
    }

    Complex first_order_amplitude(int k, double X, double P) const noexcept
    {
        const Complex denom{kappa, detuning(k, X)};
        const double rate = -detune * (n + k) * P / ((n + X) * (n + X));
        return slaved_amplitude(k, X) + drive * rate / (denom * denom * denom);
    }

    double slaved_photons(int k, double X) const noexcept
    {
        const double d = detuning(k, X);
        return drive * drive / (d * d + kappa * kappa);
    }

    /// Largest |detuning| of a mode within `halfwidth` of its resonance position.
    double max_detuning(double halfwidth) const noexcept { return detune * halfwidth / (n - 1.0); }

    double energy(double X, double P) const noexcept
    {
        return 0.5 * P * P + 0.5 * X * X + 0.25 * duffing * X * X * X * X;
    }
};

/// Neumaier compensated summation.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) noexcept
    {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) carry += (sum - t) + v;
        else carry += (v - t) + sum;
        sum = t;
    }
    double value() const noexcept { return sum + carry; }
};

/**
 * Mutable single-trajectory stepping engine.
 *
 * Holds the mirror, the window of mode amplitudes and the activity flags. A mode
 * is integrated ("active") while the mirror is within the refine halfwidth of its
 * resonance, or within twice that while it still rings; otherwise it is replaced
 * by its zeroth-order quasi-static amplitude.
 */
class Propagator {
public:
    Propagator(const SystemParams& params, const IntegratorConfig& cfg, const ScaledUnits& units);

    void load(const FullState& state, bool all_active);

    /// Updates active and slaved sets for the coming step; returns true if any mode is active.
    bool prepare_step();
    void step(double dt);
    /// Integrates every window mode with no slaving (used by the public rk4_step).
    void step_all(double dt);
    void after_step();
    void rollback();
    bool finite() const noexcept;

    FullState export_state() const;
    Sample sample() const;
    void dump_modes(std::vector<ModeSample>& out) const;

    double time() const noexcept { return t_; }
    void set_time(double t) noexcept { t_ = t; }
    double work() const noexcept { return work_.value(); }
    double dissipated() const noexcept { return dissipated_.value(); }
    double mech_energy() const noexcept { return sys_.energy(X_, P_); }

private:
    void rhs(double X, double P, const double* re, const double* im, double* dre, double* dim,
             double& dX, double& dP, double& dW, double& dD) const noexcept;
    void rk4(double dt);
    bool ringing(int k) const noexcept;
    void reshape_window(int lo, int hi);
    void check_geometry() const;
    Complex current_amplitude(int k) const noexcept;
    std::size_t index(int k) const noexcept { return static_cast<std::size_t>(k - k_lo_); }
    int k_hi() const noexcept { return k_lo_ + static_cast<int>(amp_.size()) - 1; }

    SystemParams params_;
    ScaledUnits units_;
    ScaledSystem sys_;
    double halfwidth_;
    double reach_;
    int margin_;
    double ring_threshold_;

    double t_ = 0.0;
    double X_ = 0.0;
    double P_ = 0.0;
    CompensatedSum work_;
    CompensatedSum dissipated_;

    int k_lo_ = 0;
    std::vector<Complex> amp_;
    std::vector<char> is_active_;
    std::vector<int> active_;
    std::vector<int> slaved_;

    double run_min_ = 0.0;
    double run_max_ = 0.0;
    double last_window_t_ = 0.0;

    // rollback copy
    double prev_t_ = 0.0, prev_X_ = 0.0, prev_P_ = 0.0;
    CompensatedSum prev_work_, prev_dissipated_;
    std::vector<Complex> prev_amp_;

    // RK4 scratch
    std::vector<double> re0_, im0_, re_, im_, k_re_[4], k_im_[4];
};

} // namespace optomech::detail
