#pragma once

#include "optomech/core_model.hpp"

#include <vector>

namespace optomech {

/**
 * Semi-analytical cycle model: damped harmonic arcs between resonance
 * positions, joined by instantaneous velocity kicks at every x_k the mirror
 * crosses.
 *
 * Kick energetics (per resonance k, linearized coupling g_{N+k}):
 *
 *   forward  (v- > 0):  W+ = hbar aL^2 pi / kappa + C_k / v-
 *   backward (v+ < 0):  W- = -hbar aL^2 pi / kappa - C_k / v+
 *   C_k = 3 hbar^2 aL^4 g_{N+k} pi / (8 m kappa^4)
 *
 * and the velocity after the kick follows from (m/2)(v_after^2 - v_before^2) = W.
 * Duffing springs are not supported; the arcs are exactly harmonic.
 */

struct ArcState {
    double x = 0.0; ///< [m]
    double v = 0.0; ///< [m/s]
    double t = 0.0; ///< [s]
};

enum class ArcEvent { Resonance, TurningPoint, AtRest };

struct ArcResult {
    ArcEvent event = ArcEvent::TurningPoint;
    ArcState state;  ///< state at the event
    int k = 0;       ///< resonance offset reached (Resonance only)
};

enum class Direction { Forward, Backward };

struct KickResult {
    double v_after = 0.0;
    double work = 0.0;    ///< radiation work, equal to (m/2)(v_after^2 - v_before^2)
    bool valid = true;    ///< false when |C_k / v| exceeds half the leading term
    bool blocked = false; ///< backward only: mirror cannot pass x_k
};

struct KickRecord {
    int k = 0;
    Direction direction = Direction::Forward;
    double v_before = 0.0;
    double v_after = 0.0;
    double work = 0.0;
    bool valid = true;
    bool blocked = false;
};

struct HalfCycle {
    double a_end = 0.0;          ///< turning amplitude reached (A_max forward, A_min backward)
    std::vector<KickRecord> kicks;
    double arc_loss = 0.0;       ///< mechanical energy removed by damping along the arcs [J]
    bool advisory = false;       ///< some kick was outside the perturbative regime
};

struct CycleCandidate {
    double a_min_in = 0.0;
    double a_max = 0.0;
    double a_min_out = 0.0;
    double residual = 0.0;       ///< a_min_out - a_min_in
    std::vector<KickRecord> kick_log;
    double arc_loss = 0.0;
    bool advisory = false;
};

struct FixedCycle {
    double a_min = 0.0;
    double a_max = 0.0;
    double a_bar = 0.0;
    double slope = 0.0;  ///< d a_min_out / d a_min_in at the root
    bool stable = false; ///< |slope| < 1 (return-map criterion)
    bool advisory = false;
};

struct BalanceAudit {
    double lhs = 0.0;      ///< total kick work over the cycle [J]
    double rhs = 0.0;      ///< total arc damping loss [J]
    double residual = 0.0; ///< |lhs - rhs| / max(|lhs|, rhs)
    double signed_gap = 0.0; ///< lhs - rhs
};

class KickMap {
public:
    /// Throws InvalidParameter for overdamped mechanics or a nonzero Duffing constant.
    explicit KickMap(const SystemParams& params);

    /// Propagates the analytic damped arc to the next resonance crossing or turning point.
    ArcResult damped_arc(const ArcState& start) const;

    KickResult forward_kick(int k, double v_minus) const;
    KickResult backward_kick(int k, double v_plus) const;

    /// W+ for Forward (v_approach > 0) or W- for Backward (v_approach < 0).
    double kick_work(int k, double v_approach, Direction direction) const;

    /// True if x_k lies in [-a_min, a_max], i.e. the kick contributes to a cycle with these extents.
    bool in_range(int k, double a_min, double a_max) const noexcept;

    /// Forward: from (-a_start, 0) to the right turning point. Backward: from (a_start, 0) to the left one.
    HalfCycle half_cycle_map(double a_start, Direction direction) const;

    /// Forward then backward half cycle starting from (-a_min_in, 0).
    CycleCandidate cycle(double a_min_in) const;

    /// Roots of a_min_out(a) - a bracketed on `a_grid`, refined to |r| < lambda_l / 1e4.
    std::vector<FixedCycle> find_fixed_cycles(const std::vector<double>& a_grid) const;

    BalanceAudit balance_audit(const FixedCycle& cycle) const;
    BalanceAudit balance_audit(double a_min_in) const;

    double leading_work() const noexcept { return leading_work_; }
    double correction_coefficient(int k) const;

    /// 60 points spanning 0.1 um to 6 um.
    static std::vector<double> default_grid();

private:
    SystemParams params_;
    double alpha_l_;
    double leading_work_;
    double omega_d_;
};

} // namespace optomech
