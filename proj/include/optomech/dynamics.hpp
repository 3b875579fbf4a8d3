#pragma once

#include "optomech/core_model.hpp"

#include <complex>
#include <vector>

namespace optomech {

using Complex = std::complex<double>;

/// Mechanical state of the movable mirror (SI).
struct MirrorState {
    double x = 0.0; ///< displacement from static equilibrium [m]
    double p = 0.0; ///< momentum [kg m/s]
};

/**
 * Complex amplitudes alpha_{N+k} for a contiguous range of offsets k.
 *
 * An empty set has no offsets. Offsets outside [lo, hi] have no amplitude.
 */
class ModeSet {
public:
    ModeSet() = default;
    ModeSet(int k_lo, int k_hi);

    bool empty() const noexcept { return amps_.empty(); }
    std::size_t size() const noexcept { return amps_.size(); }
    int lo() const noexcept { return lo_; }
    int hi() const noexcept { return lo_ + static_cast<int>(amps_.size()) - 1; }
    bool contains(int k) const noexcept { return !empty() && k >= lo() && k <= hi(); }
    std::vector<int> offsets() const;

    /// Throws std::out_of_range for offsets outside the window.
    Complex amplitude(int k) const;
    void set(int k, Complex value);

    const std::vector<Complex>& amplitudes() const noexcept { return amps_; }
    std::vector<Complex>& amplitudes() noexcept { return amps_; }

private:
    int lo_ = 0;
    std::vector<Complex> amps_;
};

struct FullState {
    MirrorState mirror;
    ModeSet modes;
    double time = 0.0; ///< [s]
};

struct MirrorDerivative {
    double dx_dt = 0.0; ///< [m/s]
    double dp_dt = 0.0; ///< [N]
};

/// omega_{N+k}(x) - omega_l, evaluated without cancellation as omega_l (x_k - x) / (L0 + x).
double mode_detuning(const SystemParams& params, int k, double x);

/// d alpha_{N+k}/dt = -i (omega_{N+k}(x) - omega_l) alpha - i alpha_L - kappa alpha.
Complex mode_rhs(const FullState& state, int k, const SystemParams& params);

/// hbar * sum_k (N+k) pi c / (x+L0)^2 |alpha_{N+k}|^2. Zero for an empty mode set.
double radiation_force(const FullState& state, const SystemParams& params);

/// Mirror equations with optional cubic (Duffing) spring; alpha = 0 is the harmonic case.
MirrorDerivative mirror_rhs(const FullState& state, const SystemParams& params);

/// Zeroth-order slaved amplitude -i alpha_L / (i Delta + kappa) with the full detuning.
Complex steady_amplitude(const SystemParams& params, int k, double x);

/**
 * Slaved amplitude including the first-order velocity correction:
 * alpha0 + alpha_L dDelta/dt / (i Delta + kappa)^3, dDelta/dt = -omega_{N+k}(x) v / (x + L0).
 */
Complex first_order_amplitude(const SystemParams& params, int k, double x, double v);

struct PhotonEstimate {
    double photons = 0.0;
    /// False when the first-order bracket went negative and the result was clamped to 0.
    bool valid = true;
};

/**
 * Quasi-static photon number of mode N+k with the linearized coupling g_{N+k}:
 *
 *   alpha_L^2 / (g^2 d^2 + kappa^2) * [1 + 4 kappa g^2 d v / (g^2 d^2 + kappa^2)^2],  d = x - x_k.
 */
PhotonEstimate adiabatic_photon_number(int k, double x, double v, const SystemParams& params);

} // namespace optomech
