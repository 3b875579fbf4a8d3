#include "optomech/cycle_analysis.hpp"

#include "optomech/error.hpp"
#include "optomech/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace optomech {

namespace {

double mean(const std::vector<double>& v)
{
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variation(const std::vector<double>& v)
{
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
}

double energy_momentum(const SystemParams& params, double x, double p)
{
    return std::sqrt(2.0 * params.mass * mechanical_energy(params, x, p));
}

} // namespace

double average_amplitude(double a_min, double a_max) noexcept
{
    return std::sqrt(0.5 * (a_min * a_min + a_max * a_max));
}

const char* to_string(CycleStatus status) noexcept
{
    switch (status) {
    case CycleStatus::Converged: return "converged";
    case CycleStatus::Rest: return "rest";
    case CycleStatus::NotConverged: return "not_converged";
    case CycleStatus::Failed: return "failed";
    }
    return "unknown";
}

std::vector<TurningPoint> turning_points(const std::vector<Sample>& samples)
{
    std::vector<TurningPoint> out;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const Sample& a = samples[i - 1];
        const Sample& b = samples[i];
        const bool right = a.p > 0.0 && b.p <= 0.0;
        const bool left = a.p < 0.0 && b.p >= 0.0;
        if (!right && !left) continue;
        const double f = a.p / (a.p - b.p);
        out.push_back({a.t + f * (b.t - a.t), a.x + f * (b.x - a.x), right});
    }
    return out;
}

CycleDetection detect_limit_cycle(const Trajectory& traj, const DetectionOptions& opts)
{
    if (!(opts.rel_tol > 0.0)) throw InvalidParameter("rel_tol must be positive");
    if (!(opts.window_periods > 0.0)) throw InvalidParameter("window_periods must be positive");
    CycleDetection out;
    const auto& s = traj.samples;
    if (s.size() < 2) {
        out.detail = "too few samples";
        return out;
    }
    const double t_nominal = 2.0 * std::numbers::pi / traj.params.omega_m;
    const double t_from = s.back().t - opts.window_periods * t_nominal;

    std::vector<Sample> window;
    for (const auto& x : s) {
        if (x.t >= t_from) window.push_back(x);
    }
    double lo = window.front().x, hi = lo;
    for (const auto& x : window) {
        lo = std::min(lo, x.x);
        hi = std::max(hi, x.x);
    }
    if ((hi - lo) / 2 < opts.rest_floor) {
        out.status = CycleStatus::Rest;
        out.detail = "decayed to rest";
        return out;
    }

    std::vector<double> rights, lefts, right_times;
    for (const auto& tp : turning_points(window)) {
        if (tp.right) {
            rights.push_back(tp.x);
            right_times.push_back(tp.t);
        } else {
            lefts.push_back(-tp.x);
        }
    }
    if (rights.size() < 3 || lefts.size() < 2) {
        out.detail = "too few turning points in the window";
        return out;
    }

    LimitCycle& c = out.cycle;
    const double a_max = mean(rights);
    const double a_min = mean(lefts);
    c.a_max = std::max(0.0, a_max);
    c.a_min = std::max(0.0, a_min);
    c.a_bar = average_amplitude(c.a_min, c.a_max);
    const double scale_max = std::max(std::abs(a_max), c.a_bar);
    const double scale_min = std::max(std::abs(a_min), c.a_bar);
    const double var_max = variation(rights) / scale_max;
    const double var_min = variation(lefts) / scale_min;

    c.period = (right_times.back() - right_times.front()) / static_cast<double>(right_times.size() - 1);
    const double t0 = right_times[right_times.size() - 2];
    const double t1 = right_times.back();
    for (const auto& x : window) {
        if (x.t >= t0 && x.t <= t1) c.points.push_back({x.t, x.x, x.p});
    }

    if (var_max >= opts.rel_tol || var_min >= opts.rel_tol) {
        out.detail = "turning points vary by " + std::to_string(std::max(var_max, var_min));
        return out;
    }
    c.jumps = sawtooth_profile(c, traj.params);
    out.status = CycleStatus::Converged;
    return out;
}

std::vector<SawtoothJump> sawtooth_profile(const LimitCycle& cycle, const SystemParams& params)
{
    std::vector<SawtoothJump> out;
    const auto& pts = cycle.points;
    const std::size_t n = pts.size();
    if (n < 3) return out;
    const double h = params.half_wavelength();
    const int k_lo = static_cast<int>(std::ceil(-cycle.a_min / h));
    const int k_hi = static_cast<int>(std::floor(cycle.a_max / h));

    // Linear interpolation of the energy momentum where x reaches `edge`, walking from
    // index i in steps of `step` (periodic), while x stays monotone.
    auto q_at = [&](std::size_t i, int step, double edge, double dir, double& q) {
        std::size_t j = i;
        for (std::size_t count = 0; count < n; ++count) {
            const std::size_t next = step > 0 ? (j + 1) % n : (j + n - 1) % n;
            const CyclePoint& a = pts[j];
            const CyclePoint& b = pts[next];
            if ((b.x - a.x) * dir * step <= 0.0) return false;
            if ((b.x - edge) * (a.x - edge) <= 0.0 && a.x != b.x) {
                const double f = (edge - a.x) / (b.x - a.x);
                const double x = a.x + f * (b.x - a.x);
                const double p = a.p + f * (b.p - a.p);
                q = energy_momentum(params, x, p);
                return true;
            }
            j = next;
        }
        return false;
    };

    for (int k = k_lo; k <= k_hi; ++k) {
        if (params.n_order + k <= 0) continue;
        const double x_k = resonance_position(params, k);
        const double half = 5.0 * params.kappa / coupling_strength(params, k);
        for (std::size_t i = 0; i < n; ++i) {
            const CyclePoint& a = pts[i];
            const CyclePoint& b = pts[(i + 1) % n];
            if (i + 1 == n) break;
            const bool fwd = a.x < x_k && b.x >= x_k;
            const bool bwd = a.x > x_k && b.x <= x_k;
            if (!fwd && !bwd) continue;
            const double dir = fwd ? 1.0 : -1.0;
            double q_before = 0.0, q_after = 0.0;
            if (!q_at(i, -1, x_k - dir * half, dir, q_before)) continue;
            if (!q_at(i, +1, x_k + dir * half, dir, q_after)) continue;
            out.push_back({k, fwd, q_after - q_before});
        }
    }
    return out;
}

double equilibrium_shift(const LimitCycle& cycle)
{
    const auto& pts = cycle.points;
    if (pts.size() < 2) return 0.0;
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        area += 0.5 * (pts[i].x + pts[i - 1].x) * (pts[i].t - pts[i - 1].t);
    }
    const double span = pts.back().t - pts.front().t;
    return span > 0.0 ? area / span : 0.0;
}

BranchSet cluster_branches(const std::vector<LimitCycle>& cycles, double lambda_l, double gap_factor)
{
    if (cycles.empty()) throw InvalidParameter("cluster_branches needs at least one cycle");
    if (!(gap_factor > 0.0)) throw InvalidParameter("gap_factor must be positive");
    std::vector<std::size_t> order(cycles.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cycles[a].a_bar < cycles[b].a_bar; });

    auto split = [&](double threshold) {
        std::vector<std::vector<std::size_t>> groups{{order[0]}};
        for (std::size_t i = 1; i < order.size(); ++i) {
            const double gap = cycles[order[i]].a_bar - cycles[order[i - 1]].a_bar;
            if (gap > threshold) groups.emplace_back();
            groups.back().push_back(order[i]);
        }
        return groups;
    };
    auto spread_of = [&](const std::vector<std::size_t>& g) {
        return cycles[g.back()].a_bar - cycles[g.front()].a_bar;
    };

    const double min_gap = lambda_l / 20.0;
    auto groups = split(min_gap);
    std::vector<double> spreads;
    for (const auto& g : groups) spreads.push_back(spread_of(g));
    std::nth_element(spreads.begin(), spreads.begin() + spreads.size() / 2, spreads.end());
    const double median = spreads[spreads.size() / 2];
    groups = split(std::max(min_gap, gap_factor * median));

    BranchSet out;
    for (const auto& g : groups) {
        Branch b;
        double sum = 0.0;
        for (std::size_t i : g) sum += cycles[i].a_bar;
        b.center = sum / static_cast<double>(g.size());
        b.spread = spread_of(g);
        b.count = static_cast<int>(g.size());
        b.representative = cycles[g[g.size() / 2]];
        out.branches.push_back(std::move(b));
    }
    return out;
}

std::vector<double> EnsembleSpec::seeds() const
{
    if (n_seeds < 1) throw InvalidParameter("n_seeds must be >= 1");
    std::vector<double> out(static_cast<std::size_t>(n_seeds));
    for (int i = 0; i < n_seeds; ++i) {
        out[static_cast<std::size_t>(i)] = n_seeds == 1 ? a_lo : a_lo + (a_hi - a_lo) * i / (n_seeds - 1);
    }
    return out;
}

SeedOutcome run_to_cycle(const SystemParams& params, const IntegratorConfig& base,
                         const EnsembleSpec& spec, const MirrorState& start)
{
    SeedOutcome out;
    IntegratorConfig cfg = base;
    const double period = 2.0 * std::numbers::pi; // scaled
    cfg.t_end = (spec.transient_periods + spec.window_periods) * period;
    cfg.record_from = spec.transient_periods * period;
    cfg.sample_stride = spec.sample_stride;
    DetectionOptions opts;
    opts.rel_tol = spec.rel_tol;
    opts.window_periods = spec.window_periods;

    const Integrator integ(params, cfg);
    FullState state = integ.initial_state(start);
    try {
        for (int attempt = 0; attempt <= spec.max_extensions; ++attempt) {
            const Trajectory traj = integ.integrate(state);
            state = traj.final_state;
            CycleDetection det = detect_limit_cycle(traj, opts);
            out.status = det.status;
            out.cycle = std::move(det.cycle);
            out.detail = std::move(det.detail);
            if (out.status != CycleStatus::NotConverged) break;
        }
    } catch (const NumericalError& e) {
        out.status = CycleStatus::Failed;
        out.detail = e.what();
    } catch (const GeometryError& e) {
        out.status = CycleStatus::Failed;
        out.detail = e.what();
    }
    out.final_mirror = state.mirror;
    return out;
}

EnsembleResult run_ensemble(const SystemParams& params, const IntegratorConfig& base,
                            const EnsembleSpec& spec, double gap_factor)
{
    const std::vector<double> amps = spec.seeds();
    EnsembleResult out;
    out.seeds.resize(amps.size());
    parallel_for(amps.size(), [&](std::size_t i) {
        const MirrorState start{0.0, params.mass * params.omega_m * amps[i]};
        out.seeds[i] = run_to_cycle(params, base, spec, start);
        out.seeds[i].seed_amplitude = amps[i];
    }, spec.workers);

    std::vector<LimitCycle> cycles;
    for (const auto& s : out.seeds) {
        if (s.status == CycleStatus::Converged || s.status == CycleStatus::Rest) cycles.push_back(s.cycle);
    }
    if (!cycles.empty()) out.branches = cluster_branches(cycles, params.lambda_l, gap_factor);
    return out;
}

} // namespace optomech
