#include "optomech/kickmap.hpp"

#include "optomech/error.hpp"
#include "optomech/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace optomech {

namespace {

constexpr int max_events = 10000;

struct Arc {
    double x0, v0, beta, omega;
    double b;

    Arc(double x, double v, double beta_, double omega_)
        : x0(x), v0(v), beta(beta_), omega(omega_), b((v + beta_ * x) / omega_) {}

    double x(double t) const
    {
        const double th = omega * t;
        return std::exp(-beta * t) * (x0 * std::cos(th) + b * std::sin(th));
    }
    double v(double t) const
    {
        const double th = omega * t;
        return std::exp(-beta * t) * (v0 * std::cos(th) - (x0 * omega + beta * b) * std::sin(th));
    }
    /// First t > 0 with v(t) = 0.
    double turning_time() const
    {
        if (v0 == 0.0) return std::numbers::pi / omega;
        const double theta0 = std::atan(v0 / (x0 * omega + beta * b));
        const double theta = theta0 > 0.0 ? theta0 : theta0 + std::numbers::pi;
        return theta / omega;
    }
};

/// Solves x(t) = target on [0, t_hi], where x is monotone; safeguarded Newton.
double crossing_time(const Arc& arc, double target, double t_hi)
{
    double lo = 0.0, hi = t_hi;
    const double f_lo = arc.x(lo) - target;
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
        const double f = arc.x(t) - target;
        if (f == 0.0) return t;
        if ((f > 0.0) == (f_lo > 0.0)) lo = t;
        else hi = t;
        const double v = arc.v(t);
        double next = v != 0.0 ? t - f / v : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        if (std::abs(next - t) <= 1e-15 * t_hi || hi - lo <= 1e-15 * t_hi) return next;
        t = next;
    }
    throw NumericalError("damped arc: resonance crossing did not converge");
}

} // namespace

KickMap::KickMap(const SystemParams& params) : params_(params)
{
    params_.validate();
    if (params_.duffing_alpha != 0.0)
        throw InvalidParameter("kick map requires a harmonic spring (duffing_alpha = 0)");
    const double beta = 0.5 * params_.gamma;
    if (!(beta < params_.omega_m)) throw InvalidParameter("kick map requires underdamped mechanics");
    omega_d_ = std::sqrt(params_.omega_m * params_.omega_m - beta * beta);
    alpha_l_ = drive_amplitude(params_);
    leading_work_ = SystemParams::hbar * alpha_l_ * alpha_l_ * std::numbers::pi / params_.kappa;
}

double KickMap::correction_coefficient(int k) const
{
    const double a2 = alpha_l_ * alpha_l_;
    const double k4 = std::pow(params_.kappa, 4);
    return 3.0 * SystemParams::hbar * SystemParams::hbar * a2 * a2 * coupling_strength(params_, k) *
           std::numbers::pi / (8.0 * params_.mass * k4);
}

ArcResult KickMap::damped_arc(const ArcState& start) const
{
    const double h = params_.half_wavelength();
    double dir;
    if (start.v > 0.0) dir = 1.0;
    else if (start.v < 0.0) dir = -1.0;
    else if (start.x < 0.0) dir = 1.0;
    else if (start.x > 0.0) dir = -1.0;
    else return {ArcEvent::AtRest, start, 0};

    const double u = start.x / h;
    const double nearest = std::round(u);
    int k;
    if (std::abs(u - nearest) <= 1e-12 * std::max(1.0, std::abs(u))) {
        k = static_cast<int>(nearest) + (dir > 0.0 ? 1 : -1);
    } else {
        k = dir > 0.0 ? static_cast<int>(std::floor(u)) + 1 : static_cast<int>(std::ceil(u)) - 1;
    }
    const double x_k = resonance_position(params_, k);

    const Arc arc(start.x, start.v, 0.5 * params_.gamma, omega_d_);
    const double t_turn = arc.turning_time();
    const double x_turn = arc.x(t_turn);
    if (dir * (x_turn - x_k) > 0.0) {
        const double t = crossing_time(arc, x_k, t_turn);
        return {ArcEvent::Resonance, {x_k, arc.v(t), start.t + t}, k};
    }
    return {ArcEvent::TurningPoint, {x_turn, 0.0, start.t + t_turn}, 0};
}

double KickMap::kick_work(int k, double v_approach, Direction direction) const
{
    if (v_approach == 0.0) throw ContractViolation("kick_work: approach velocity is zero");
    if (direction == Direction::Forward && v_approach < 0.0)
        throw ContractViolation("kick_work: forward kick needs a positive approach velocity");
    if (direction == Direction::Backward && v_approach > 0.0)
        throw ContractViolation("kick_work: backward kick needs a negative approach velocity");
    const double correction = correction_coefficient(k) / v_approach;
    return direction == Direction::Forward ? leading_work_ + correction : -leading_work_ - correction;
}

KickResult KickMap::forward_kick(int k, double v_minus) const
{
    KickResult r;
    r.work = kick_work(k, v_minus, Direction::Forward);
    r.valid = std::abs(correction_coefficient(k) / v_minus) <= 0.5 * leading_work_;
    r.v_after = std::sqrt(v_minus * v_minus + 2.0 * r.work / params_.mass);
    return r;
}

KickResult KickMap::backward_kick(int k, double v_plus) const
{
    KickResult r;
    const double work = kick_work(k, v_plus, Direction::Backward);
    r.valid = std::abs(correction_coefficient(k) / v_plus) <= 0.5 * leading_work_;
    const double radicand = v_plus * v_plus + 2.0 * work / params_.mass;
    if (radicand <= 0.0) {
        r.blocked = true;
        r.v_after = 0.0;
        r.work = -0.5 * params_.mass * v_plus * v_plus;
        return r;
    }
    r.work = work;
    r.v_after = -std::sqrt(radicand);
    return r;
}

bool KickMap::in_range(int k, double a_min, double a_max) const noexcept
{
    const double x_k = resonance_position(params_, k);
    return x_k >= -a_min && x_k <= a_max;
}

HalfCycle KickMap::half_cycle_map(double a_start, Direction direction) const
{
    if (!(a_start > 0.0)) throw ContractViolation("half_cycle_map: start amplitude must be positive");
    const double m = params_.mass;
    const double w2 = params_.omega_m * params_.omega_m;
    auto energy = [&](const ArcState& s) { return 0.5 * m * (s.v * s.v + w2 * s.x * s.x); };

    HalfCycle out;
    ArcState s{direction == Direction::Forward ? -a_start : a_start, 0.0, 0.0};
    const bool driven = leading_work_ > 0.0;
    for (int events = 0;; ++events) {
        if (events > max_events) throw NumericalError("half_cycle_map: runaway (more than 1e4 events)");
        const ArcResult arc = damped_arc(s);
        out.arc_loss += energy(s) - energy(arc.state);
        s = arc.state;
        if (arc.event != ArcEvent::Resonance) break;
        if (!driven) continue;
        const KickResult kick =
            direction == Direction::Forward ? forward_kick(arc.k, s.v) : backward_kick(arc.k, s.v);
        out.kicks.push_back({arc.k, direction, s.v, kick.v_after, kick.work, kick.valid, kick.blocked});
        out.advisory = out.advisory || !kick.valid;
        s.v = kick.v_after;
        if (kick.blocked) break;
    }
    out.a_end = direction == Direction::Forward ? s.x : -s.x;
    return out;
}

CycleCandidate KickMap::cycle(double a_min_in) const
{
    CycleCandidate c;
    c.a_min_in = a_min_in;
    const HalfCycle fwd = half_cycle_map(a_min_in, Direction::Forward);
    c.a_max = fwd.a_end;
    c.kick_log = fwd.kicks;
    c.arc_loss = fwd.arc_loss;
    c.advisory = fwd.advisory;
    if (!(c.a_max > 0.0)) {
        c.a_min_out = -c.a_max;
        c.residual = c.a_min_out - a_min_in;
        return c;
    }
    const HalfCycle bwd = half_cycle_map(c.a_max, Direction::Backward);
    c.a_min_out = bwd.a_end;
    c.kick_log.insert(c.kick_log.end(), bwd.kicks.begin(), bwd.kicks.end());
    c.arc_loss += bwd.arc_loss;
    c.advisory = c.advisory || bwd.advisory;
    c.residual = c.a_min_out - a_min_in;
    return c;
}

std::vector<double> KickMap::default_grid()
{
    std::vector<double> grid(60);
    const double lo = 0.1e-6, hi = 6e-6;
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = lo + (hi - lo) * i / (grid.size() - 1);
    return grid;
}

std::vector<FixedCycle> KickMap::find_fixed_cycles(const std::vector<double>& a_grid) const
{
    if (a_grid.empty()) throw InvalidParameter("fixed-cycle grid is empty");
    for (std::size_t i = 0; i < a_grid.size(); ++i) {
        if (!(a_grid[i] > 0.0)) throw InvalidParameter("fixed-cycle grid must be positive");
        if (i > 0 && !(a_grid[i] > a_grid[i - 1])) throw InvalidParameter("fixed-cycle grid must increase");
    }
    const double tol = params_.lambda_l / 1e4;
    auto residual = [&](double a) { return cycle(a).residual; };

    std::vector<double> r(a_grid.size());
    parallel_for(a_grid.size(), [&](std::size_t i) { r[i] = residual(a_grid[i]); });

    std::vector<double> roots;
    for (std::size_t i = 0; i < a_grid.size(); ++i) {
        if (r[i] == 0.0) {
            roots.push_back(a_grid[i]);
            continue;
        }
        if (i + 1 == a_grid.size() || r[i + 1] == 0.0 || (r[i] > 0.0) == (r[i + 1] > 0.0)) continue;
        double lo = a_grid[i], hi = a_grid[i + 1], f_lo = r[i];
        double mid = 0.5 * (lo + hi), f_mid = residual(mid);
        for (int it = 0; it < 200; ++it) {
            if (f_mid == 0.0) break;
            if ((f_mid > 0.0) == (f_lo > 0.0)) {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
            const double next = 0.5 * (lo + hi);
            if (next == lo || next == hi) break;
            mid = next;
            f_mid = residual(mid);
        }
        if (std::abs(f_mid) < tol) roots.push_back(mid);
    }

    // Blocked reflections pin a_min_out to -x_k, so r = -x_k - a has a root at the
    // edge of a plateau that a sign scan can miss.
    const double h_w = params_.half_wavelength();
    for (int k = -1; -k * h_w <= a_grid.back(); --k) {
        const double a = -k * h_w;
        if (a < a_grid.front()) continue;
        if (std::abs(residual(a)) < tol) roots.push_back(a);
    }
    std::sort(roots.begin(), roots.end());
    std::vector<double> unique;
    for (double a : roots) {
        if (unique.empty() || a - unique.back() >= tol) unique.push_back(a);
        else if (std::abs(residual(a)) < std::abs(residual(unique.back()))) unique.back() = a;
    }

    std::vector<FixedCycle> out;
    out.reserve(unique.size());
    for (double a : unique) {
        const CycleCandidate c = cycle(a);
        const double h = std::min(tol, 0.25 * a);
        const double left = cycle(a - h).a_min_out;
        const double right = cycle(a + h).a_min_out;
        const bool jump_left = std::abs(c.a_min_out - left) > 10.0 * tol;
        const bool jump_right = std::abs(right - c.a_min_out) > 10.0 * tol;
        if (jump_left && jump_right) continue;
        FixedCycle f;
        f.a_min = a;
        f.a_max = c.a_max;
        f.a_bar = std::sqrt(0.5 * (a * a + c.a_max * c.a_max));
        f.advisory = c.advisory;
        if (jump_right) f.slope = (c.a_min_out - left) / h;
        else if (jump_left) f.slope = (right - c.a_min_out) / h;
        else f.slope = (right - left) / (2.0 * h);
        f.stable = std::abs(f.slope) < 1.0;
        out.push_back(f);
    }
    return out;
}

BalanceAudit KickMap::balance_audit(double a_min_in) const
{
    const CycleCandidate c = cycle(a_min_in);
    BalanceAudit b;
    for (const auto& k : c.kick_log) b.lhs += k.work;
    b.rhs = c.arc_loss;
    b.signed_gap = b.lhs - b.rhs;
    const double denom = std::max(std::abs(b.lhs), std::abs(b.rhs));
    b.residual = denom > 0.0 ? std::abs(b.signed_gap) / denom : 0.0;
    return b;
}

BalanceAudit KickMap::balance_audit(const FixedCycle& cycle) const
{
    return balance_audit(cycle.a_min);
}

} // namespace optomech
