#include "optomech/core_model.hpp"

#include "optomech/error.hpp"

#include <cmath>
#include <sstream>

namespace optomech {

void SystemParams::validate() const
{
    auto fail = [](const std::string& what) { throw InvalidParameter(what); };
    if (!(omega_m > 0.0) || !std::isfinite(omega_m)) fail("omega_m must be positive");
    if (!(mass > 0.0) || !std::isfinite(mass)) fail("mass must be positive");
    if (!(kappa > 0.0) || !std::isfinite(kappa)) fail("kappa must be positive");
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be non-negative");
    if (!(power >= 0.0) || !std::isfinite(power)) fail("power must be non-negative");
    if (!(lambda_l > 0.0) || !std::isfinite(lambda_l)) fail("lambda_l must be positive");
    if (n_order <= 0) fail("n_order must be a positive integer");
    if (!std::isfinite(duffing_alpha)) fail("duffing_alpha must be finite");
}

std::vector<std::string> SystemParams::warnings() const
{
    std::vector<std::string> out;
    if (kappa / omega_m < 10.0) {
        std::ostringstream os;
        os << "kappa/omega_m = " << kappa / omega_m
           << " is not >> 1; the cavity may not follow the mirror adiabatically";
        out.push_back(os.str());
    }
    if (gamma >= 2.0 * omega_m) {
        out.push_back("gamma >= 2 omega_m: mechanics is not underdamped");
    }
    return out;
}

double drive_amplitude(const SystemParams& params)
{
    if (params.power < 0.0) throw InvalidParameter("drive power must be non-negative");
    return std::sqrt(2.0 * params.kappa * params.power / (SystemParams::hbar * params.omega_l()));
}

double mode_frequency(const SystemParams& params, int k, double x)
{
    const int n = params.n_order + k;
    if (n <= 0) throw GeometryError("mode order N+k must be positive");
    const double length = x + params.L0();
    if (!(length > 0.0)) throw GeometryError("mirror collision: x <= -L0");
    return n * std::numbers::pi * SystemParams::c / length;
}

double resonance_position(const SystemParams& params, int k) noexcept
{
    return k * params.half_wavelength();
}

double coupling_strength(const SystemParams& params, int k)
{
    const int n = params.n_order + k;
    if (n <= 0) throw InvalidParameter("mode order N+k must be positive");
    return 4.0 * std::numbers::pi * SystemParams::c / (n * params.lambda_l * params.lambda_l);
}

std::vector<int> active_window(const SystemParams& params, double x_min, double x_max, int margin)
{
    if (x_min > x_max) throw ContractViolation("active_window: x_min > x_max");
    if (margin < 0) throw ContractViolation("active_window: negative margin");
    const double h = params.half_wavelength();
    const double lo = x_min - margin * h;
    const double hi = x_max + margin * h;
    auto k = static_cast<int>(std::ceil(lo / h));
    while (k * h < lo) ++k;
    while ((k - 1) * h >= lo) --k;
    std::vector<int> out;
    for (; k * h <= hi; ++k) out.push_back(k);
    return out;
}

double mechanical_energy(const SystemParams& params, double x, double p) noexcept
{
    const double spring = params.mass * params.omega_m * params.omega_m;
    return p * p / (2.0 * params.mass) + 0.5 * spring * x * x
         + 0.25 * spring * params.duffing_alpha * x * x * x * x;
}

ScaledUnits::ScaledUnits(const SystemParams& params)
    : time_scale(1.0 / params.omega_m),
      length_scale(params.half_wavelength()),
      momentum_scale(params.mass * params.omega_m * params.half_wavelength()),
      energy_scale(params.mass * params.omega_m * params.omega_m * params.half_wavelength()
                   * params.half_wavelength()),
      amplitude_scale(1.0)
{
    const double alpha_l = drive_amplitude(params);
    if (alpha_l > 0.0) amplitude_scale = alpha_l / params.omega_m;
}

} // namespace optomech
