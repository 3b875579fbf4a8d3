#include "optomech/integrator.hpp"

#include "scaled_system.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace optomech {

IntegratorConfig IntegratorConfig::defaults(const SystemParams& params)
{
    IntegratorConfig cfg;
    cfg.refine_halfwidth = params.lambda_l / 20.0;
    return cfg;
}

Integrator::Integrator(const SystemParams& params, const IntegratorConfig& cfg)
    : params_(params), cfg_(cfg), units_((params.validate(), params))
{
    if (!(cfg_.dt_base > 0.0)) throw InvalidParameter("dt_base must be positive");
    if (cfg_.refine_factor < 1) throw InvalidParameter("refine_factor must be >= 1");
    if (cfg_.sample_stride < 1) throw InvalidParameter("sample_stride must be >= 1");
    if (!(cfg_.t_end >= 0.0)) throw InvalidParameter("t_end must be non-negative");
    if (!(cfg_.refine_halfwidth > 0.0)) throw InvalidParameter("refine_halfwidth must be positive");
    if (cfg_.window_margin < 1) throw InvalidParameter("window_margin must be >= 1");
    if (!(cfg_.ringdown_tolerance > 0.0)) throw InvalidParameter("ringdown_tolerance must be positive");

    const detail::ScaledSystem sys(params_);
    const double halfwidth = units_.to_scaled_length(cfg_.refine_halfwidth);
    if (halfwidth >= 0.5) throw InvalidParameter("refine_halfwidth must be below lambda_l/4");
    const double max_detuning = sys.max_detuning(halfwidth);
    const double product = cfg_.dt_fine() * max_detuning;
    std::ostringstream os;
    os << "dt_fine * max integrated detuning = " << cfg_.dt_fine() << " * " << max_detuning << " = "
       << product << " (limit 0.1); dt_fine * kappa = " << cfg_.dt_fine() * sys.kappa;
    binding_ = os.str();
    if (product > 0.1) throw InvalidParameter("time step too coarse: " + binding_);
}

FullState Integrator::initial_state(const MirrorState& mirror, double time) const
{
    const detail::ScaledSystem sys(params_);
    const double X = units_.to_scaled_length(mirror.x);
    const double P = units_.to_scaled_momentum(mirror.p);
    const double reach = std::hypot(X, P);
    const int margin = cfg_.window_margin;
    const int lo = static_cast<int>(std::floor(X - reach)) - margin;
    const int hi = static_cast<int>(std::ceil(X + reach)) + margin;
    if (params_.n_order + lo <= 0) throw GeometryError("initial window reaches mode order <= 0");
    FullState s;
    s.mirror = mirror;
    s.time = time;
    s.modes = ModeSet(lo, hi);
    for (int k = lo; k <= hi; ++k) {
        s.modes.set(k, units_.to_si_amplitude(1.0) * sys.slaved_amplitude(k, X));
    }
    return s;
}

FullState Integrator::rk4_step(const FullState& state, double dt) const
{
    if (!(dt > 0.0)) throw ContractViolation("rk4_step: dt must be positive");
    detail::Propagator prop(params_, cfg_, units_);
    prop.load(state, /*all_active=*/true);
    prop.step_all(dt);
    FullState out = prop.export_state();
    if (!prop.finite()) throw NumericalBlowup("non-finite state after RK4 step", state);
    return out;
}

Trajectory Integrator::integrate(const FullState& initial) const
{
    detail::Propagator prop(params_, cfg_, units_);
    prop.load(initial, /*all_active=*/false);

    Trajectory traj;
    traj.params = params_;
    const double t0 = units_.to_scaled_time(initial.time);
    const double t_stop = t0 + cfg_.t_end;
    const double t_record = t0 + cfg_.record_from;
    const double e_start = prop.mech_energy();

    auto record = [&]() {
        traj.samples.push_back(prop.sample());
        if (cfg_.dump_modes) prop.dump_modes(traj.mode_dump);
    };
    if (t_record <= t0) record();

    std::size_t since_sample = 0;
    bool recorded_last = true;
    while (prop.time() < t_stop) {
        const bool fine = prop.prepare_step();
        double dt = fine ? cfg_.dt_fine() : cfg_.dt_base;
        const double remaining = t_stop - prop.time();
        bool last = false;
        if (dt >= remaining) {
            dt = remaining;
            last = true;
        }
        prop.step(dt);
        if (!prop.finite()) {
            prop.rollback();
            throw NumericalBlowup("non-finite state after RK4 step", prop.export_state());
        }
        if (last) prop.set_time(t_stop);
        ++traj.steps;
        if (fine) ++traj.fine_steps;
        prop.after_step();

        recorded_last = false;
        if (prop.time() >= t_record && ++since_sample >= static_cast<std::size_t>(cfg_.sample_stride)) {
            since_sample = 0;
            record();
            recorded_last = true;
        }
    }
    if (!recorded_last && prop.time() >= t_record) record();

    traj.final_state = prop.export_state();
    traj.ledger.work_radiation = units_.to_si_energy(prop.work());
    traj.ledger.dissipated = units_.to_si_energy(prop.dissipated());
    traj.ledger.mech_energy_start = units_.to_si_energy(e_start);
    traj.ledger.mech_energy_now = units_.to_si_energy(prop.mech_energy());
    return traj;
}

double ledger_residual(const Trajectory& traj)
{
    const auto& l = traj.ledger;
    const double delta = l.mech_energy_now - l.mech_energy_start;
    const double denom = std::max({std::abs(l.work_radiation), l.dissipated, std::abs(delta),
                                   std::abs(l.mech_energy_start), std::abs(l.mech_energy_now)});
    if (denom == 0.0) return 0.0;
    return std::abs(delta - l.work_radiation + l.dissipated) / denom;
}

} // namespace optomech
