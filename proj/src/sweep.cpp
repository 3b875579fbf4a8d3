#include "optomech/sweep.hpp"

#include "optomech/error.hpp"
#include "optomech/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace optomech {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

SystemParams with_value(SystemParams p, SweepVariable v, double value)
{
    if (v == SweepVariable::Power) p.power = value;
    else p.duffing_alpha = value;
    return p;
}

SweepResult independent(const SweepPlan& plan, const SystemParams& params, const IntegratorConfig& cfg)
{
    plan.validate();
    const std::vector<double> amps = plan.seeds.seeds();
    const std::size_t n_seeds = amps.size();
    const std::size_t n_values = plan.values.size();
    for (double v : plan.values) with_value(params, plan.variable, v).validate();

    std::vector<SeedOutcome> outcomes(n_values * n_seeds);
    parallel_for(outcomes.size(), [&](std::size_t idx) {
        const std::size_t i = idx / n_seeds;
        const std::size_t j = idx % n_seeds;
        const SystemParams p = with_value(params, plan.variable, plan.values[i]);
        const MirrorState start{0.0, p.mass * p.omega_m * amps[j]};
        IntegratorConfig c = cfg;
        if (c.refine_halfwidth <= 0.0) c.refine_halfwidth = IntegratorConfig::defaults(p).refine_halfwidth;
        outcomes[idx] = run_to_cycle(p, c, plan.seeds, start);
        outcomes[idx].seed_amplitude = amps[j];
    }, plan.seeds.workers);

    SweepResult out;
    out.variable = plan.variable;
    for (std::size_t i = 0; i < n_values; ++i) {
        SweepPoint pt;
        pt.value = plan.values[i];
        pt.ensemble.seeds.assign(outcomes.begin() + static_cast<std::ptrdiff_t>(i * n_seeds),
                                 outcomes.begin() + static_cast<std::ptrdiff_t>((i + 1) * n_seeds));
        std::vector<LimitCycle> cycles;
        for (const auto& s : pt.ensemble.seeds) {
            if (s.status == CycleStatus::Converged || s.status == CycleStatus::Rest) cycles.push_back(s.cycle);
        }
        if (!cycles.empty()) pt.ensemble.branches = cluster_branches(cycles, params.lambda_l, plan.gap_factor);
        out.points.push_back(std::move(pt));
    }
    return out;
}

} // namespace

const char* to_string(SweepVariable v) noexcept
{
    return v == SweepVariable::Power ? "power" : "duffing_alpha";
}

const char* to_string(SweepMode m) noexcept
{
    switch (m) {
    case SweepMode::Independent: return "independent";
    case SweepMode::ContinueUp: return "continue-up";
    case SweepMode::ContinueDown: return "continue-down";
    }
    return "unknown";
}

void SweepPlan::validate() const
{
    if (values.empty()) throw InvalidParameter("sweep needs at least one value");
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (!(values[i] > values[i - 1])) throw InvalidParameter("sweep values must be strictly increasing");
    }
    if (mode != SweepMode::Independent && values.size() < 2)
        throw InvalidParameter("continuation needs at least two values");
    if (mode != SweepMode::Independent && variable != SweepVariable::Power)
        throw InvalidParameter("continuation is defined for power sweeps only");
    if (!(jump_threshold > 0.0)) throw InvalidParameter("jump_threshold must be positive");
}

std::vector<double> SweepPlan::grid(double from, double to, double step)
{
    if (!(step > 0.0) || !(to >= from)) throw InvalidParameter("grid needs step > 0 and to >= from");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((to - from) / step + 1e-6));
    for (long i = 0; i <= n; ++i) out.push_back(from + static_cast<double>(i) * step);
    return out;
}

std::vector<AttractorRow> attractor_rows(const SweepResult& result)
{
    std::vector<AttractorRow> rows;
    for (const auto& pt : result.points) {
        int id = 0;
        for (const auto& b : pt.ensemble.branches.branches) {
            const bool rest = b.representative.a_bar == 0.0;
            rows.push_back({pt.value, b.center, b.representative.a_min, b.representative.a_max, id++, b.count,
                            rest ? "rest" : "ok"});
        }
        for (const auto& s : pt.ensemble.seeds) {
            if (s.status == CycleStatus::Converged || s.status == CycleStatus::Rest) continue;
            rows.push_back({pt.value, s.cycle.a_bar, s.cycle.a_min, s.cycle.a_max, -1, 1, to_string(s.status)});
        }
    }
    return rows;
}

SweepResult power_sweep(const SweepPlan& plan, const SystemParams& params, const IntegratorConfig& cfg)
{
    if (plan.variable != SweepVariable::Power) throw InvalidParameter("power_sweep needs variable = power");
    return independent(plan, params, cfg);
}

SweepResult duffing_sweep(const SweepPlan& plan, const SystemParams& params, const IntegratorConfig& cfg)
{
    if (plan.variable != SweepVariable::DuffingAlpha)
        throw InvalidParameter("duffing_sweep needs variable = duffing_alpha");
    return independent(plan, params, cfg);
}

std::vector<double> duffing_grid(double a_ref, double product_lo, double product_hi, int n)
{
    if (!(a_ref > 0.0) || n < 2 || !(product_hi > product_lo))
        throw InvalidParameter("duffing_grid needs a_ref > 0, n >= 2 and an increasing range");
    std::vector<double> out;
    for (int i = 0; i < n; ++i) {
        const double product = product_lo + (product_hi - product_lo) * i / (n - 1);
        out.push_back(product / (a_ref * a_ref));
    }
    return out;
}

BranchTrace continuation_sweep(const SweepPlan& plan, const SystemParams& params, const IntegratorConfig& cfg)
{
    plan.validate();
    if (plan.mode == SweepMode::Independent) throw InvalidParameter("continuation needs a continue-* mode");
    std::vector<double> values = plan.values;
    if (plan.mode == SweepMode::ContinueDown) std::reverse(values.begin(), values.end());

    BranchTrace trace;
    trace.mode = plan.mode;

    SystemParams p = with_value(params, SweepVariable::Power, values.front());
    const EnsembleResult first = run_ensemble(p, cfg, plan.seeds, plan.gap_factor);
    const SeedOutcome* chosen = nullptr;
    for (const auto& s : first.seeds) {
        if (s.status != CycleStatus::Converged) continue;
        const bool better = !chosen || (plan.mode == SweepMode::ContinueUp ? s.cycle.a_bar < chosen->cycle.a_bar
                                                                           : s.cycle.a_bar > chosen->cycle.a_bar);
        if (better) chosen = &s;
    }
    if (!chosen) {
        trace.entries.push_back({values.front(), CycleStatus::Rest, 0.0, 0.0, 0.0, false});
        trace.terminated = true;
        trace.termination = "no oscillating branch at the starting power";
        return trace;
    }
    trace.entries.push_back({values.front(), chosen->status, chosen->cycle.a_bar, chosen->cycle.a_min,
                             chosen->cycle.a_max, false});
    MirrorState state = chosen->final_mirror;
    double previous = chosen->cycle.a_bar;

    for (std::size_t i = 1; i < values.size(); ++i) {
        p = with_value(params, SweepVariable::Power, values[i]);
        const SeedOutcome out = run_to_cycle(p, cfg, plan.seeds, state);
        TraceEntry e{values[i], out.status, out.cycle.a_bar, out.cycle.a_min, out.cycle.a_max, false};
        if (out.status == CycleStatus::Converged && previous > 0.0)
            e.branch_jump = std::abs(out.cycle.a_bar - previous) / previous > plan.jump_threshold;
        trace.entries.push_back(e);
        if (out.status == CycleStatus::Rest || out.status == CycleStatus::Failed) {
            trace.terminated = true;
            trace.termination = out.status == CycleStatus::Rest ? "oscillation decayed to rest" : out.detail;
            break;
        }
        state = out.final_mirror;
        if (out.status == CycleStatus::Converged) previous = out.cycle.a_bar;
    }
    return trace;
}

ComparisonReport compare_oracles(const std::vector<double>& powers, const SystemParams& params,
                                 const IntegratorConfig& cfg, const EnsembleSpec& seeds,
                                 double tolerance, double gap_factor)
{
    ComparisonReport report;
    report.tolerance = tolerance;
    if (powers.empty()) return report;

    SweepPlan plan;
    plan.variable = SweepVariable::Power;
    plan.values = powers;
    std::sort(plan.values.begin(), plan.values.end());
    plan.seeds = seeds;
    plan.gap_factor = gap_factor;
    const SweepResult full = power_sweep(plan, params, cfg);

    for (const auto& pt : full.points) {
        std::vector<double> branches;
        for (const auto& b : pt.ensemble.branches.branches) {
            if (b.center > 0.0) branches.push_back(b.center);
        }
        const KickMap km(with_value(params, SweepVariable::Power, pt.value));
        std::vector<double> roots;
        for (const auto& f : km.find_fixed_cycles(KickMap::default_grid())) {
            if (f.stable) roots.push_back(f.a_bar);
        }
        report.full_counts.push_back(static_cast<int>(branches.size()));
        report.kickmap_counts.push_back(static_cast<int>(roots.size()));

        std::vector<char> used(branches.size(), 0);
        for (double r : roots) {
            ComparisonRow row{pt.value, nan, r, nan, false};
            double best = std::numeric_limits<double>::infinity();
            std::size_t best_i = 0;
            for (std::size_t i = 0; i < branches.size(); ++i) {
                const double d = std::abs(r - branches[i]) / branches[i];
                if (d < best) {
                    best = d;
                    best_i = i;
                }
            }
            if (!branches.empty()) {
                row.a_bar_full = branches[best_i];
                row.rel_diff = best;
                row.matched = best < tolerance;
                used[best_i] = 1;
            }
            report.rows.push_back(row);
        }
        for (std::size_t i = 0; i < branches.size(); ++i) {
            if (!used[i]) report.rows.push_back({pt.value, branches[i], nan, nan, false});
        }
    }
    return report;
}

} // namespace optomech
