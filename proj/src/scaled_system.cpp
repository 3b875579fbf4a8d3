#include "scaled_system.hpp"

#include "optomech/error.hpp"

#include <algorithm>
#include <numbers>

namespace optomech::detail {

ScaledSystem::ScaledSystem(const SystemParams& params)
    : n(static_cast<double>(params.n_order)),
      detune(params.omega_l() / params.omega_m),
      kappa(params.kappa / params.omega_m),
      gamma(params.gamma / params.omega_m),
      drive(drive_amplitude(params) > 0.0 ? 1.0 : 0.0),
      force(0.0),
      duffing(params.duffing_alpha * params.half_wavelength() * params.half_wavelength())
{
    const ScaledUnits units(params);
    const double l = units.length_scale;
    const double s = units.amplitude_scale;
    force = SystemParams::hbar * params.omega_l() * s * s
          / (params.mass * l * l * params.omega_m * params.omega_m);
}

Propagator::Propagator(const SystemParams& params, const IntegratorConfig& cfg, const ScaledUnits& units)
    : params_(params),
      units_(units),
      sys_(params),
      halfwidth_(units.to_scaled_length(cfg.refine_halfwidth)),
      reach_(cfg.ringdown_reach * units.to_scaled_length(cfg.refine_halfwidth)),
      margin_(cfg.window_margin),
      ring_threshold_(cfg.ringdown_tolerance / (sys_.kappa * sys_.kappa))
{
}

void Propagator::load(const FullState& state, bool all_active)
{
    t_ = units_.to_scaled_time(state.time);
    X_ = units_.to_scaled_length(state.mirror.x);
    P_ = units_.to_scaled_momentum(state.mirror.p);
    work_ = {};
    dissipated_ = {};
    check_geometry();

    if (state.modes.empty()) {
        const int lo = static_cast<int>(std::floor(X_)) - margin_;
        const int hi = static_cast<int>(std::ceil(X_)) + margin_;
        k_lo_ = lo;
        amp_.assign(static_cast<std::size_t>(hi - lo + 1), Complex{});
        for (int k = lo; k <= hi; ++k) amp_[index(k)] = sys_.slaved_amplitude(k, X_);
    } else {
        k_lo_ = state.modes.lo();
        amp_.resize(state.modes.size());
        for (std::size_t i = 0; i < amp_.size(); ++i) {
            amp_[i] = state.modes.amplitudes()[i] / units_.amplitude_scale;
        }
    }
    if (params_.n_order + k_lo_ <= 0) throw GeometryError("mode window reaches order N+k <= 0");

    is_active_.assign(amp_.size(), 0);
    active_.clear();
    for (int k = k_lo_; k <= k_hi(); ++k) {
        const double dist = std::abs(X_ - k);
        if (all_active || dist < halfwidth_ || (dist < reach_ && ringing(k))) {
            is_active_[index(k)] = 1;
            active_.push_back(k);
        }
    }
    slaved_.clear();
    run_min_ = run_max_ = X_;
    last_window_t_ = t_;
}

bool Propagator::ringing(int k) const noexcept
{
    const Complex ref = sys_.first_order_amplitude(k, X_, P_);
    return std::norm(amp_[index(k)] - ref) > ring_threshold_;
}

void Propagator::check_geometry() const
{
    if (!(X_ + sys_.n > 0.0)) throw GeometryError("mirror collision: x <= -L0");
    if (!(X_ < sys_.n)) throw GeometryError("mirror escaped: x >= L0");
}

bool Propagator::prepare_step()
{
    check_geometry();
    std::size_t kept = 0;
    for (int k : active_) {
        const double dist = std::abs(X_ - k);
        if (dist < halfwidth_ || (dist < reach_ && ringing(k))) {
            active_[kept++] = k;
        } else {
            is_active_[index(k)] = 0;
        }
    }
    active_.resize(kept);

    const int lo = std::max(k_lo_, static_cast<int>(std::ceil(X_ - halfwidth_)));
    const int hi = std::min(k_hi(), static_cast<int>(std::floor(X_ + halfwidth_)));
    for (int k = lo; k <= hi; ++k) {
        if (is_active_[index(k)]) continue;
        amp_[index(k)] = sys_.first_order_amplitude(k, X_, P_);
        is_active_[index(k)] = 1;
        active_.push_back(k);
    }
    std::sort(active_.begin(), active_.end());

    slaved_.clear();
    const double reach = margin_ + 0.5;
    const int s_lo = std::max(k_lo_, static_cast<int>(std::ceil(X_ - reach)));
    const int s_hi = std::min(k_hi(), static_cast<int>(std::floor(X_ + reach)));
    for (int k = s_lo; k <= s_hi; ++k) {
        if (!is_active_[index(k)]) slaved_.push_back(k);
    }
    return !active_.empty();
}

void Propagator::rhs(double X, double P, const double* re, const double* im, double* dre, double* dim,
                     double& dX, double& dP, double& dW, double& dD) const noexcept
{
    const double inv = 1.0 / (sys_.n + X);
    const double kappa = sys_.kappa;
    double sum = 0.0;
    for (std::size_t i = 0; i < active_.size(); ++i) {
        const int k = active_[i];
        const double d = sys_.detune * (k - X) * inv;
        dre[i] = d * im[i] - kappa * re[i];
        dim[i] = -d * re[i] - kappa * im[i] - sys_.drive;
        sum += (sys_.n + k) * (re[i] * re[i] + im[i] * im[i]);
    }
    const double drive2 = sys_.drive * sys_.drive;
    for (int k : slaved_) {
        const double d = sys_.detune * (k - X) * inv;
        sum += (sys_.n + k) * drive2 / (d * d + kappa * kappa);
    }
    const double f = sys_.force * sum * inv * inv;
    dX = P;
    dP = -(1.0 + sys_.duffing * X * X) * X + f - sys_.gamma * P;
    dW = f * P;
    dD = sys_.gamma * P * P;
}

void Propagator::rk4(double dt)
{
    const std::size_t na = active_.size();
    for (auto* v : {&re0_, &im0_, &re_, &im_}) v->resize(na);
    for (int s = 0; s < 4; ++s) {
        k_re_[s].resize(na);
        k_im_[s].resize(na);
    }
    for (std::size_t i = 0; i < na; ++i) {
        const Complex a = amp_[index(active_[i])];
        re0_[i] = a.real();
        im0_[i] = a.imag();
    }

    prev_t_ = t_;
    prev_X_ = X_;
    prev_P_ = P_;
    prev_work_ = work_;
    prev_dissipated_ = dissipated_;
    prev_amp_.resize(na);
    for (std::size_t i = 0; i < na; ++i) prev_amp_[i] = amp_[index(active_[i])];

    double kX[4], kP[4], kW[4], kD[4];
    const double X0 = X_;
    const double P0 = P_;

    rhs(X0, P0, re0_.data(), im0_.data(), k_re_[0].data(), k_im_[0].data(), kX[0], kP[0], kW[0], kD[0]);
    const double c[3] = {0.5 * dt, 0.5 * dt, dt};
    for (int s = 1; s < 4; ++s) {
        const double h = c[s - 1];
        for (std::size_t i = 0; i < na; ++i) {
            re_[i] = re0_[i] + h * k_re_[s - 1][i];
            im_[i] = im0_[i] + h * k_im_[s - 1][i];
        }
        rhs(X0 + h * kX[s - 1], P0 + h * kP[s - 1], re_.data(), im_.data(), k_re_[s].data(),
            k_im_[s].data(), kX[s], kP[s], kW[s], kD[s]);
    }

    const double w = dt / 6.0;
    X_ = X0 + w * (kX[0] + 2.0 * kX[1] + 2.0 * kX[2] + kX[3]);
    P_ = P0 + w * (kP[0] + 2.0 * kP[1] + 2.0 * kP[2] + kP[3]);
    work_.add(w * (kW[0] + 2.0 * kW[1] + 2.0 * kW[2] + kW[3]));
    dissipated_.add(w * (kD[0] + 2.0 * kD[1] + 2.0 * kD[2] + kD[3]));
    for (std::size_t i = 0; i < na; ++i) {
        const double r = re0_[i] + w * (k_re_[0][i] + 2.0 * k_re_[1][i] + 2.0 * k_re_[2][i] + k_re_[3][i]);
        const double m = im0_[i] + w * (k_im_[0][i] + 2.0 * k_im_[1][i] + 2.0 * k_im_[2][i] + k_im_[3][i]);
        amp_[index(active_[i])] = {r, m};
    }
    t_ += dt;
}

void Propagator::step(double dt)
{
    rk4(dt);
}

void Propagator::step_all(double dt)
{
    active_.clear();
    for (int k = k_lo_; k <= k_hi(); ++k) {
        is_active_[index(k)] = 1;
        active_.push_back(k);
    }
    slaved_.clear();
    rk4(dt);
}

void Propagator::rollback()
{
    t_ = prev_t_;
    X_ = prev_X_;
    P_ = prev_P_;
    work_ = prev_work_;
    dissipated_ = prev_dissipated_;
    for (std::size_t i = 0; i < active_.size(); ++i) amp_[index(active_[i])] = prev_amp_[i];
}

bool Propagator::finite() const noexcept
{
    if (!std::isfinite(X_) || !std::isfinite(P_)) return false;
    if (!std::isfinite(work_.value()) || !std::isfinite(dissipated_.value())) return false;
    for (int k : active_) {
        const Complex a = amp_[index(k)];
        if (!std::isfinite(a.real()) || !std::isfinite(a.imag())) return false;
    }
    return true;
}

void Propagator::reshape_window(int lo, int hi)
{
    if (params_.n_order + lo <= 0) throw GeometryError("mode window reaches order N+k <= 0");
    if (lo == k_lo_ && hi == k_hi()) return;
    std::vector<Complex> amp(static_cast<std::size_t>(hi - lo + 1));
    std::vector<char> flags(amp.size(), 0);
    for (int k = lo; k <= hi; ++k) {
        const std::size_t j = static_cast<std::size_t>(k - lo);
        if (k >= k_lo_ && k <= k_hi()) {
            amp[j] = amp_[index(k)];
            flags[j] = is_active_[index(k)];
        } else {
            amp[j] = sys_.slaved_amplitude(k, X_);
        }
    }
    k_lo_ = lo;
    amp_ = std::move(amp);
    is_active_ = std::move(flags);
}

void Propagator::after_step()
{
    check_geometry();
    run_min_ = std::min(run_min_, X_);
    run_max_ = std::max(run_max_, X_);
    const int need_lo = static_cast<int>(std::floor(X_)) - margin_;
    const int need_hi = static_cast<int>(std::ceil(X_)) + margin_;

    if (t_ - last_window_t_ >= 2.0 * std::numbers::pi) {
        int lo = std::min(static_cast<int>(std::floor(run_min_)) - margin_, need_lo);
        int hi = std::max(static_cast<int>(std::ceil(run_max_)) + margin_, need_hi);
        for (int k : active_) {
            lo = std::min(lo, k);
            hi = std::max(hi, k);
        }
        reshape_window(lo, hi);
        run_min_ = run_max_ = X_;
        last_window_t_ = t_;
    } else if (need_lo < k_lo_ || need_hi > k_hi()) {
        reshape_window(std::min(need_lo, k_lo_), std::max(need_hi, k_hi()));
    }
}

Complex Propagator::current_amplitude(int k) const noexcept
{
    if (is_active_[index(k)]) return amp_[index(k)];
    return sys_.slaved_amplitude(k, X_);
}

FullState Propagator::export_state() const
{
    FullState s;
    s.time = units_.to_si_time(t_);
    s.mirror.x = units_.to_si_length(X_);
    s.mirror.p = units_.to_si_momentum(P_);
    s.modes = ModeSet(k_lo_, k_hi());
    for (int k = k_lo_; k <= k_hi(); ++k) s.modes.set(k, current_amplitude(k) * units_.amplitude_scale);
    return s;
}

Sample Propagator::sample() const
{
    Sample s;
    s.t = units_.to_si_time(t_);
    s.x = units_.to_si_length(X_);
    s.p = units_.to_si_momentum(P_);
    const double reach = margin_ + 0.5;
    const int lo = std::max(k_lo_, static_cast<int>(std::ceil(X_ - reach)));
    const int hi = std::min(k_hi(), static_cast<int>(std::floor(X_ + reach)));
    double photons = 0.0;
    for (int k = lo; k <= hi; ++k) photons += std::norm(current_amplitude(k));
    s.photons = photons * units_.amplitude_scale * units_.amplitude_scale;
    s.work = units_.to_si_energy(work_.value());
    s.dissipated = units_.to_si_energy(dissipated_.value());
    return s;
}

void Propagator::dump_modes(std::vector<ModeSample>& out) const
{
    const double t = units_.to_si_time(t_);
    for (int k = k_lo_; k <= k_hi(); ++k) {
        out.push_back({t, k, current_amplitude(k) * units_.amplitude_scale});
    }
}

} // namespace optomech::detail
