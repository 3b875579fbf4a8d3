#include "optomech/dynamics.hpp"

#include "optomech/error.hpp"

#include <cmath>
#include <stdexcept>

namespace optomech {

ModeSet::ModeSet(int k_lo, int k_hi)
    : lo_(k_lo)
{
    if (k_hi < k_lo) throw ContractViolation("ModeSet: k_hi < k_lo");
    amps_.assign(static_cast<std::size_t>(k_hi - k_lo + 1), Complex{});
}

std::vector<int> ModeSet::offsets() const
{
    std::vector<int> out;
    out.reserve(amps_.size());
    for (std::size_t i = 0; i < amps_.size(); ++i) out.push_back(lo_ + static_cast<int>(i));
    return out;
}

Complex ModeSet::amplitude(int k) const
{
    if (!contains(k)) throw std::out_of_range("ModeSet: offset outside window");
    return amps_[static_cast<std::size_t>(k - lo_)];
}

void ModeSet::set(int k, Complex value)
{
    if (!contains(k)) throw std::out_of_range("ModeSet: offset outside window");
    amps_[static_cast<std::size_t>(k - lo_)] = value;
}

double mode_detuning(const SystemParams& params, int k, double x)
{
    if (params.n_order + k <= 0) throw GeometryError("mode order N+k must be positive");
    const double length = x + params.L0();
    if (!(length > 0.0)) throw GeometryError("mirror collision: x <= -L0");
    return params.omega_l() * (resonance_position(params, k) - x) / length;
}

Complex mode_rhs(const FullState& state, int k, const SystemParams& params)
{
    const Complex alpha = state.modes.amplitude(k);
    const double detuning = mode_detuning(params, k, state.mirror.x);
    const double alpha_l = drive_amplitude(params);
    const Complex i{0.0, 1.0};
    return -i * detuning * alpha - i * alpha_l - params.kappa * alpha;
}

double radiation_force(const FullState& state, const SystemParams& params)
{
    const double length = state.mirror.x + params.L0();
    if (!(length > 0.0)) throw GeometryError("mirror collision: x <= -L0");
    double sum = 0.0;
    for (std::size_t i = 0; i < state.modes.size(); ++i) {
        const int n = params.n_order + state.modes.lo() + static_cast<int>(i);
        sum += n * std::norm(state.modes.amplitudes()[i]);
    }
    return SystemParams::hbar * std::numbers::pi * SystemParams::c * sum / (length * length);
}

MirrorDerivative mirror_rhs(const FullState& state, const SystemParams& params)
{
    const double x = state.mirror.x;
    const double p = state.mirror.p;
    const double spring = params.mass * params.omega_m * params.omega_m;
    MirrorDerivative d;
    d.dx_dt = p / params.mass;
    d.dp_dt = -spring * (1.0 + params.duffing_alpha * x * x) * x + radiation_force(state, params)
            - params.gamma * p;
    return d;
}

Complex steady_amplitude(const SystemParams& params, int k, double x)
{
    const Complex i{0.0, 1.0};
    const double detuning = mode_detuning(params, k, x);
    return -i * drive_amplitude(params) / (i * detuning + params.kappa);
}

Complex first_order_amplitude(const SystemParams& params, int k, double x, double v)
{
    const Complex i{0.0, 1.0};
    const double detuning = mode_detuning(params, k, x);
    const double detuning_rate = -mode_frequency(params, k, x) * v / (x + params.L0());
    const double alpha_l = drive_amplitude(params);
    const Complex denom = i * detuning + params.kappa;
    return -i * alpha_l / denom + alpha_l * detuning_rate / (denom * denom * denom);
}

PhotonEstimate adiabatic_photon_number(int k, double x, double v, const SystemParams& params)
{
    const double g = coupling_strength(params, k);
    const double d = x - resonance_position(params, k);
    const double alpha_l = drive_amplitude(params);
    const double lorentz = g * g * d * d + params.kappa * params.kappa;
    const double bracket = 1.0 + 4.0 * params.kappa * g * g * d * v / (lorentz * lorentz);
    PhotonEstimate est;
    if (bracket < 0.0) {
        est.valid = false;
        est.photons = 0.0;
    } else {
        est.photons = alpha_l * alpha_l / lorentz * bracket;
    }
    return est;
}

} // namespace optomech
