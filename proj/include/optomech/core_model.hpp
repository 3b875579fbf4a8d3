#pragma once

#include <numbers>
#include <string>
#include <vector>

namespace optomech {

/**
 * Physical constants of a Fabry-Perot cavity with one movable mirror.
 *
 * All fields are SI. The static cavity length is not stored: it is always
 * N * lambda_l / 2 so the order-N mode is resonant with the drive at x = 0.
 * hbar and c are fixed CODATA values and cannot be changed per instance.
 */
struct SystemParams {
    static constexpr double hbar = 1.054571817e-34; ///< [J s]
    static constexpr double c = 299792458.0;        ///< [m/s]

    double omega_m = 1e7;       ///< mechanical angular frequency [rad/s]
    double mass = 5e-15;        ///< [kg]
    double gamma = 1e5;         ///< mechanical damping rate [1/s]
    double kappa = 1e9;         ///< cavity decay rate, shared by all modes [1/s]
    double lambda_l = 1e-6;     ///< drive wavelength [m]
    int n_order = 10000;        ///< order N of the mode resonant at x = 0
    double power = 1.0;         ///< drive power [W]
    double duffing_alpha = 0.0; ///< cubic spring constant [1/m^2]

    /// Desk set: gamma = 1e-2 omega_m, kappa = 1e2 omega_m, lambda_l = 1000 nm, N = 10000.
    static SystemParams desk_defaults() { return SystemParams{}; }

    double L0() const noexcept { return n_order * lambda_l / 2.0; }
    double half_wavelength() const noexcept { return lambda_l / 2.0; }
    double omega_l() const noexcept { return 2.0 * std::numbers::pi * c / lambda_l; }

    /// Throws InvalidParameter on any hard violation.
    void validate() const;

    /// Soft diagnostics (e.g. kappa/omega_m not >> 1). Empty when the regime is as intended.
    std::vector<std::string> warnings() const;
};

/// Real drive amplitude alpha_L = sqrt(2 kappa P / (hbar omega_l)), units s^-1/2.
double drive_amplitude(const SystemParams& params);

/// omega_{N+k}(x) = (N+k) pi c / (x + L0). Throws GeometryError when x <= -L0 or N+k <= 0.
double mode_frequency(const SystemParams& params, int k, double x);

/// x_k = k lambda_l / 2, where mode N+k meets the drive frequency.
double resonance_position(const SystemParams& params, int k) noexcept;

/// Linearized coupling g_{N+k} = 4 pi c / ((N+k) lambda_l^2) [rad/(s m)].
double coupling_strength(const SystemParams& params, int k);

/// All k with x_min - margin*lambda/2 <= x_k <= x_max + margin*lambda/2, ascending.
std::vector<int> active_window(const SystemParams& params, double x_min, double x_max, int margin);

/// Mechanical energy p^2/2m + m w^2 x^2/2 + m w^2 alpha x^4/4 [J].
double mechanical_energy(const SystemParams& params, double x, double p) noexcept;

/**
 * Dimensionless units used internally by the integrator.
 *
 * time in 1/omega_m, length in lambda_l/2, momentum in m*omega_m*lambda_l/2,
 * mode amplitude in alpha_L/omega_m (so the scaled drive term is exactly -i).
 * With zero drive the amplitude scale falls back to 1.
 */
struct ScaledUnits {
    double time_scale;      ///< [s]
    double length_scale;    ///< [m]
    double momentum_scale;  ///< [kg m/s]
    double energy_scale;    ///< m * (omega_m * length_scale)^2 [J]
    double amplitude_scale; ///< alpha_L / omega_m [photons^1/2]

    explicit ScaledUnits(const SystemParams& params);

    double to_scaled_time(double t) const noexcept { return t / time_scale; }
    double to_si_time(double tau) const noexcept { return tau * time_scale; }
    double to_scaled_length(double x) const noexcept { return x / length_scale; }
    double to_si_length(double X) const noexcept { return X * length_scale; }
    double to_scaled_momentum(double p) const noexcept { return p / momentum_scale; }
    double to_si_momentum(double P) const noexcept { return P * momentum_scale; }
    double to_scaled_energy(double e) const noexcept { return e / energy_scale; }
    double to_si_energy(double e) const noexcept { return e * energy_scale; }
    double to_scaled_amplitude(double a) const noexcept { return a / amplitude_scale; }
    double to_si_amplitude(double a) const noexcept { return a * amplitude_scale; }
};

} // namespace optomech
