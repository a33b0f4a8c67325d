//! Monotone policy iteration for the regularized model problem.
//!
//! The discrete problem on a radial grid asks for `w` with `w(rho) = 0`,
//! `w(R) = L` and, at every interior node,
//!
//! ```text
//! theta(w'') w'' + theta(w') (N-1) w'/r + B |w'|^2 + b |w'| - c0 w
//!     + M (r - rho)^mu (w + delta)^(-alpha) = 0.
//! ```
//!
//! Every term of the operator is convex in the jet of `w`, so each sweep
//! linearizes from below: the extremal weights and the gradient sign are
//! frozen at the current iterate (subgradients of the kinked terms), the
//! quadratic gradient term is replaced by its tangent
//! `2 B w_k' z' - B |w_k'|^2`, and the forcing
//! `f(w) = M d^mu (w + delta)^(-alpha)` is handled by direction:
//!
//! * ascending sweeps replace `f` by its tangent at the iterate. Since `f`
//!   is convex and decreasing, the tangent lies below `f` and its slope
//!   strengthens the diagonal, so each linearized solution is again a
//!   subsolution and climbs toward the discrete solution from below;
//! * the solve from above performs one sweep with `f` lagged at the upper
//!   bracket and then hands over to the ascending iteration. A longer
//!   monotone descent is not available: every linearization of a convex
//!   operator lies below it, so one exact sweep from any supersolution
//!   already lands at or below the discrete solution, and pinning iterates
//!   from above would freeze that overshoot instead of correcting it.
//!
//! A nodewise projection onto the previous iterate makes the ascent exact
//! in floating point, a halving damper pulls rogue steps back inside the
//! bracket, and the iteration stops only when the update is below tolerance
//! and every extremal weight has stopped switching.
//!
//! The singular problem is reached by continuation: `delta` is halved a
//! fixed number of times, each level warm started from the previous one.
//! The previous solution is a subsolution of the next level because
//! shrinking `delta` only increases the forcing, so the continuation is
//! nodewise nondecreasing by construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, RadialGrid};
use crate::params::{ProblemSpec, PucciSign};
use crate::radial::{forcing_term, hopf_point, sabu_residual, theta};

/// Iteration controls. The defaults run the full continuation with nine
/// levels from `delta0 = 1e-2` down to about `3.9e-5`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub delta0: f64,
    pub delta_steps: usize,
    pub inner_tol: f64,
    pub max_inner: usize,
    pub policy_tol: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            delta0: 1e-2,
            delta_steps: 8,
            inner_tol: 1e-10,
            max_inner: 500,
            policy_tol: 1e-9,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta0 > 0.0 && self.delta0.is_finite()) {
            return Err(Error::Validation(format!(
                "delta0 must be positive (key delta0, got {})",
                self.delta0
            )));
        }
        if !(self.inner_tol > 0.0 && self.inner_tol.is_finite()) {
            return Err(Error::Validation(format!(
                "inner_tol must be positive (key inner_tol, got {})",
                self.inner_tol
            )));
        }
        if self.max_inner < 3 {
            return Err(Error::Validation(format!(
                "max_inner must be at least 3 (key max_inner, got {})",
                self.max_inner
            )));
        }
        if !(self.policy_tol >= 0.0 && self.policy_tol.is_finite()) {
            return Err(Error::Validation(format!(
                "policy_tol must be nonnegative (key policy_tol, got {})",
                self.policy_tol
            )));
        }
        Ok(())
    }
}

/// Result of one regularized solve at fixed `delta`.
#[derive(Debug, Clone)]
pub struct RegularizedSolve {
    pub w: GridFunction,
    pub sweeps: usize,
    /// Smallest nodewise update over all sweeps; ascending solves keep this
    /// at or above zero exactly.
    pub min_update: f64,
    /// Largest nodewise update over all sweeps.
    pub max_update: f64,
}

/// Summary of a full continuation solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub delta_final: f64,
    pub sweeps_total: usize,
    /// Maximal interior residual scaled by the local term magnitudes.
    pub residual_max: f64,
    /// Uniform gap between the last two continuation levels.
    pub continuation_gap: f64,
    /// First radius where the profile stops increasing.
    pub hopf_radius: f64,
    pub max_value: f64,
    /// Constant upper bracket used by the iteration.
    pub upper_bound: f64,
}

/// Converged profile with its report and the continuation trail.
#[derive(Debug, Clone)]
pub struct Solution {
    pub w: GridFunction,
    pub report: SolveReport,
    /// One `(delta, profile)` pair per continuation level, in the order
    /// they were solved.
    pub levels: Vec<(f64, GridFunction)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Direction {
    Ascending,
    Descending,
}

struct SweepOutcome {
    z: Vec<f64>,
    flips: usize,
    update_inf: f64,
    update_min: f64,
    update_max: f64,
}

fn forcing_pair(spec: &ProblemSpec, r: f64, w: f64, delta: f64, node: usize) -> Result<(f64, f64)> {
    let f = &spec.forcing;
    if f.M == 0.0 {
        return Ok((0.0, 0.0));
    }
    let base = w + delta;
    if base <= 0.0 {
        return Err(Error::Singularity { node, r });
    }
    let dist = (r - spec.geometry.rho).max(0.0);
    let val = f.M * dist.powf(f.mu) * base.powf(-f.alpha);
    let slope = -f.alpha * val / base;
    Ok((val, slope))
}

fn solve_tridiagonal(
    sub: &[f64],
    diag: &[f64],
    sup: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv == 0.0 {
        return Err(Error::Validation("singular tridiagonal system".into()));
    }
    c[0] = sup[0] / piv;
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - sub[i] * c[i - 1];
        if piv == 0.0 {
            return Err(Error::Validation("singular tridiagonal system".into()));
        }
        if i < n - 1 {
            c[i] = sup[i] / piv;
        }
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / piv;
    }
    let mut z = d;
    for i in (0..n - 1).rev() {
        let next = z[i + 1];
        z[i] -= c[i] * next;
    }
    Ok(z)
}

fn count_flips(old: &GridFunction, new: &GridFunction, policy_tol: f64) -> usize {
    let fields = [
        (old.derivative(), new.derivative()),
        (old.second_derivative(), new.second_derivative()),
    ];
    let mut flips = 0;
    for (a, b) in &fields {
        for i in 1..a.len() - 1 {
            let (x, y) = (a.value(i), b.value(i));
            if (x >= 0.0) != (y >= 0.0) && x.abs() > policy_tol && y.abs() > policy_tol {
                flips += 1;
            }
        }
    }
    flips
}

fn policy_sweep(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    delta: f64,
    w_k: &GridFunction,
    upper: f64,
    cfg: &SolveConfig,
    direction: Direction,
) -> Result<SweepOutcome> {
    let n = grid.len();
    let ell = &spec.ell;
    let g = &spec.growth;
    let d1 = w_k.derivative();
    let d2 = w_k.second_derivative();

    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    diag[0] = 1.0;
    rhs[0] = 0.0;
    diag[n - 1] = 1.0;
    rhs[n - 1] = spec.geometry.L;

    for i in 1..n - 1 {
        let r = grid.node(i);
        let hm = r - grid.node(i - 1);
        let hp = grid.node(i + 1) - r;
        let wp = d1.value(i);
        let wpp = d2.value(i);
        let theta_pp = theta(wpp, ell, PucciSign::Plus);
        let theta_p = theta(wp, ell, PucciSign::Plus);
        let s = if wp >= 0.0 { 1.0 } else { -1.0 };
        let advect = if spec.dim > 1 {
            theta_p * (spec.dim - 1) as f64 / r
        } else {
            0.0
        } + g.b * s
            + 2.0 * g.B * wp;

        let lo = (2.0 * theta_pp - advect * hp) / (hm * (hm + hp));
        let hi = (2.0 * theta_pp + advect * hm) / (hp * (hm + hp));
        if lo < 0.0 || hi < 0.0 {
            return Err(Error::Validation(format!(
                "first order terms dominate the stencil at node {i} (r = {r}); refine the grid"
            )));
        }
        let (f_val, f_slope) = forcing_pair(spec, r, w_k.value(i), delta, i)?;
        let mut center = -2.0 * theta_pp / (hm * hp) + advect * (hp - hm) / (hm * hp) - g.c0;
        let mut source = g.B * wp * wp - f_val;
        if direction == Direction::Ascending {
            center += f_slope;
            source += f_slope * w_k.value(i);
        }
        sub[i] = lo;
        diag[i] = center;
        sup[i] = hi;
        rhs[i] = source;
    }

    let mut z = solve_tridiagonal(&sub, &diag, &sup, &rhs)?;

    let slack = 1e-9 * (1.0 + upper.abs());
    let escape = |z: &[f64]| -> Option<(usize, f64)> {
        let mut worst: Option<(usize, f64)> = None;
        for (i, &v) in z.iter().enumerate() {
            let over = (v - upper).max(-v);
            if over > slack && worst.map_or(true, |(_, w)| over > w) {
                worst = Some((i, over));
            }
        }
        worst
    };
    let mut halvings = 0;
    while let Some((node, overshoot)) = escape(&z) {
        if halvings >= 50 {
            return Err(Error::BracketViolation { node, overshoot });
        }
        for (v, &prev) in z.iter_mut().zip(w_k.values()) {
            *v = 0.5 * (*v + prev);
        }
        halvings += 1;
    }

    let mut update_inf = 0.0f64;
    let mut update_min = f64::INFINITY;
    let mut update_max = f64::NEG_INFINITY;
    for (v, &prev) in z.iter_mut().zip(w_k.values()) {
        if direction == Direction::Ascending && *v < prev {
            *v = prev;
        }
        let du = *v - prev;
        update_inf = update_inf.max(du.abs());
        update_min = update_min.min(du);
        update_max = update_max.max(du);
    }

    let z_fn = GridFunction::new(grid.clone(), z)?;
    let flips = count_flips(w_k, &z_fn, cfg.policy_tol);
    Ok(SweepOutcome {
        z: z_fn.values().to_vec(),
        flips,
        update_inf,
        update_min,
        update_max,
    })
}

fn iterate(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    delta: f64,
    start: GridFunction,
    upper: f64,
    cfg: &SolveConfig,
    direction: Direction,
) -> Result<RegularizedSolve> {
    let mut w = start;
    let mut sweeps = 0;
    let mut min_update = f64::INFINITY;
    let mut max_update = f64::NEG_INFINITY;
    let mut last_update = f64::NAN;
    let mut quiet_but_flipping = 0usize;
    loop {
        if sweeps >= cfg.max_inner {
            return Err(Error::NonConvergence {
                sweeps,
                last_update,
            });
        }
        let outcome = policy_sweep(spec, grid, delta, &w, upper, cfg, direction)?;
        sweeps += 1;
        last_update = outcome.update_inf;
        min_update = min_update.min(outcome.update_min);
        max_update = max_update.max(outcome.update_max);
        let converged = outcome.update_inf <= cfg.inner_tol && outcome.flips == 0;
        if outcome.update_inf <= cfg.inner_tol && outcome.flips > 0 {
            quiet_but_flipping += 1;
            if quiet_but_flipping >= 50 {
                return Err(Error::PolicyOscillation { sweeps });
            }
        } else {
            quiet_but_flipping = 0;
        }
        w = GridFunction::new(grid.clone(), outcome.z)?;
        if converged {
            for _ in 0..2 {
                let polish = policy_sweep(spec, grid, delta, &w, upper, cfg, direction)?;
                sweeps += 1;
                min_update = min_update.min(polish.update_min);
                max_update = max_update.max(polish.update_max);
                w = GridFunction::new(grid.clone(), polish.z)?;
            }
            return Ok(RegularizedSolve {
                w,
                sweeps,
                min_update,
                max_update,
            });
        }
    }
}

/// Constant upper bracket dominating the boundary datum and every
/// supersolution level of the zeroth order balance.
fn upper_level(spec: &ProblemSpec) -> Result<f64> {
    let f = &spec.forcing;
    let g = &spec.growth;
    let mut level = spec.geometry.L;
    if f.M > 0.0 {
        if g.c0 <= 0.0 {
            return Err(Error::Validation(
                "c0 must be positive when the forcing amplitude M is positive (key c0)".into(),
            ));
        }
        let balance = (f.M * spec.geometry.width().powf(f.mu) / g.c0).powf(1.0 / (1.0 + f.alpha));
        level = level.max(balance);
    }
    Ok(level * (1.0 + 1e-6))
}

fn constant_profile(grid: &RadialGrid, level: f64) -> GridFunction {
    GridFunction::new(grid.clone(), vec![level; grid.len()]).unwrap()
}

/// Solve the regularized problem at fixed `delta`, sweeping upward from the
/// zero subsolution.
pub fn solve_regularized(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    delta: f64,
    cfg: &SolveConfig,
) -> Result<RegularizedSolve> {
    spec.validate()?;
    cfg.validate()?;
    let upper = upper_level(spec)?;
    let start = GridFunction::zeros(grid.clone());
    iterate(spec, grid, delta, start, upper, cfg, Direction::Ascending)
}

/// Solve the regularized problem at fixed `delta` starting from the
/// constant upper bracket: one sweep with the forcing lagged at the bracket
/// performs the drop, then the ascending iteration finishes from where it
/// lands. The answer agrees with [`solve_regularized`] up to the iteration
/// tolerance and serves as an independent second path to the same fixed
/// point.
pub fn solve_regularized_from_above(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    delta: f64,
    cfg: &SolveConfig,
) -> Result<RegularizedSolve> {
    spec.validate()?;
    cfg.validate()?;
    let upper = upper_level(spec)?;
    let start = constant_profile(grid, upper / (1.0 + 1e-6));
    let drop = policy_sweep(spec, grid, delta, &start, upper, cfg, Direction::Descending)?;
    let landed = GridFunction::new(grid.clone(), drop.z)?;
    let mut rs = iterate(spec, grid, delta, landed, upper, cfg, Direction::Ascending)?;
    rs.sweeps += 1;
    rs.min_update = rs.min_update.min(drop.update_min);
    rs.max_update = rs.max_update.max(drop.update_max);
    Ok(rs)
}

/// Residual magnitude scaled by the local size of the individual terms, so
/// the figure stays meaningful where second derivatives blow up.
pub fn scaled_residual_max(w: &GridFunction, spec: &ProblemSpec, delta: f64) -> Result<f64> {
    let res = sabu_residual(w, spec, delta)?;
    let d1 = w.derivative();
    let d2 = w.second_derivative();
    let g = &spec.growth;
    let mut worst = 0.0f64;
    for i in 1..w.len() - 1 {
        let r = w.grid().node(i);
        let wp = d1.value(i);
        let wpp = d2.value(i);
        let force = forcing_term(spec, r, w.value(i), delta)?;
        let tangential = if spec.dim > 1 {
            (theta(wp, &spec.ell, PucciSign::Plus) * (spec.dim - 1) as f64 * wp / r).abs()
        } else {
            0.0
        };
        let scale = (theta(wpp, &spec.ell, PucciSign::Plus) * wpp).abs()
            + tangential
            + g.B * wp * wp
            + g.b * wp.abs()
            + g.c0 * w.value(i).abs()
            + force;
        worst = worst.max(res.value(i).abs() / (1.0 + scale));
    }
    Ok(worst)
}

/// Continuation solve on an explicit grid.
pub fn solve_singular_on(
    spec: &ProblemSpec,
    grid: &RadialGrid,
    cfg: &SolveConfig,
) -> Result<Solution> {
    spec.validate()?;
    cfg.validate()?;
    let upper = upper_level(spec)?;
    let mut w = GridFunction::zeros(grid.clone());
    let mut levels = Vec::with_capacity(cfg.delta_steps + 1);
    let mut sweeps_total = 0;
    let mut prev_gap: Option<f64> = None;
    let mut last_gap = 0.0;
    for step in 0..=cfg.delta_steps {
        let delta = cfg.delta0 * 0.5f64.powi(step as i32);
        let rs = iterate(
            spec,
            grid,
            delta,
            w.clone(),
            upper,
            cfg,
            Direction::Ascending,
        )?;
        sweeps_total += rs.sweeps;
        let gap = rs
            .w
            .values()
            .iter()
            .zip(w.values())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        if step > 0 {
            if let Some(pg) = prev_gap {
                if gap > 0.9 * pg && gap > 100.0 * cfg.inner_tol {
                    return Err(Error::ContinuationStagnation { gap, prev_gap: pg });
                }
            }
            prev_gap = Some(gap);
            last_gap = gap;
        }
        w = rs.w;
        levels.push((delta, w.clone()));
    }
    let delta_final = cfg.delta0 * 0.5f64.powi(cfg.delta_steps as i32);
    let residual_max = scaled_residual_max(&w, spec, delta_final)?;
    let report = SolveReport {
        delta_final,
        sweeps_total,
        residual_max,
        continuation_gap: last_gap,
        hopf_radius: hopf_point(&w),
        max_value: w.max_value(),
        upper_bound: upper,
    };
    Ok(Solution { w, report, levels })
}

/// Continuation solve on the default boundary refined grid with 2049 nodes.
pub fn solve_singular(spec: &ProblemSpec, cfg: &SolveConfig) -> Result<Solution> {
    let grid = RadialGrid::boundary_refined(spec.geometry.rho, spec.geometry.R, 2049)?;
    solve_singular_on(spec, &grid, cfg)
}

/// Nodewise dominance audit: checks `low <= high + slack` everywhere and
/// returns the largest signed gap `low - high`.
pub fn compare_audit(low: &GridFunction, high: &GridFunction, slack: f64) -> Result<f64> {
    if low.len() != high.len() {
        return Err(Error::Validation(format!(
            "profiles have different node counts ({} vs {})",
            low.len(),
            high.len()
        )));
    }
    let mut worst = f64::NEG_INFINITY;
    let mut worst_node = 0;
    for i in 0..low.len() {
        let gap = low.value(i) - high.value(i);
        if gap > worst {
            worst = gap;
            worst_node = i;
        }
    }
    if worst > slack {
        return Err(Error::ComparisonFailure {
            node: worst_node,
            gap: worst,
        });
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{Ellipticity, GrowthParams};

    fn plain_spec() -> ProblemSpec {
        let mut spec = ProblemSpec::default();
        spec.ell = Ellipticity::new(1.0, 1.0);
        spec.growth = GrowthParams {
            B: 0.0,
            b: 0.0,
            d: 0.0,
            c0: 0.0,
        };
        spec.forcing.M = 0.0;
        spec
    }

    #[test]
    fn harmonic_profile_matches_the_closed_form() {
        let spec = plain_spec();
        let grid = RadialGrid::uniform(1.0, 2.0, 1025).unwrap();
        let rs = solve_regularized(&spec, &grid, 1.0, &SolveConfig::default()).unwrap();
        let mut worst = 0.0f64;
        for i in 0..rs.w.len() {
            let r = grid.node(i);
            let exact = r.ln() / 2.0f64.ln();
            worst = worst.max((rs.w.value(i) - exact).abs());
        }
        assert!(worst < 1e-6, "harmonic profile off by {worst}");
    }

    #[test]
    fn refinement_converges_at_second_order() {
        let mut spec = ProblemSpec::default();
        spec.ell = Ellipticity::new(1.0, 1.0);
        spec.growth = GrowthParams {
            B: 0.1,
            b: 0.05,
            d: 0.0,
            c0: 0.5,
        };
        spec.forcing.M = 1.0;
        spec.forcing.alpha = 1.0;
        let cfg = SolveConfig::default();
        let delta = 0.1;
        let mid = |n: usize| {
            let grid = RadialGrid::uniform(1.0, 2.0, n).unwrap();
            let rs = solve_regularized(&spec, &grid, delta, &cfg).unwrap();
            rs.w.value(n / 2)
        };
        let coarse = mid(257);
        let medium = mid(513);
        let fine = mid(1025);
        let ratio = (coarse - medium).abs() / (medium - fine).abs();
        assert!(
            ratio > 3.5,
            "midpoint refinement ratio {ratio} below second order"
        );
    }

    #[test]
    fn ascending_and_descending_meet_and_keep_their_invariants() {
        let mut spec = ProblemSpec::default();
        spec.ell = Ellipticity::new(1.0, 2.0);
        spec.growth = GrowthParams {
            B: 0.1,
            b: 0.05,
            d: 0.0,
            c0: 0.5,
        };
        spec.forcing.M = 1.0;
        spec.forcing.alpha = 1.0;
        let grid = RadialGrid::boundary_refined(1.0, 2.0, 513).unwrap();
        let cfg = SolveConfig::default();
        let up = solve_regularized(&spec, &grid, 1e-2, &cfg).unwrap();
        let down = solve_regularized_from_above(&spec, &grid, 1e-2, &cfg).unwrap();
        assert!(up.min_update >= 0.0, "ascent dipped by {}", up.min_update);
        assert!(
            down.min_update < 0.0,
            "the drop sweep never went down ({})",
            down.min_update
        );
        let gap = compare_audit(&up.w, &down.w, 1e-7).unwrap();
        let meet = up
            .w
            .values()
            .iter()
            .zip(down.w.values())
            .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
        assert!(meet < 1e-7, "brackets meet only to {meet} (signed {gap})");
    }

    #[test]
    fn continuation_is_nodewise_monotone_and_reports_sane_figures() {
        let mut spec = ProblemSpec::default();
        spec.forcing.alpha = 2.0;
        spec.growth.c0 = 0.5;
        let grid = RadialGrid::boundary_refined(1.0, 2.0, 513).unwrap();
        let sol = solve_singular_on(&spec, &grid, &SolveConfig::default()).unwrap();
        assert_eq!(sol.levels.len(), 9);
        for pair in sol.levels.windows(2) {
            let (d_prev, ref w_prev) = pair[0];
            let (d_next, ref w_next) = pair[1];
            assert!(d_next < d_prev);
            for i in 0..w_prev.len() {
                assert!(
                    w_next.value(i) >= w_prev.value(i),
                    "level {d_next} dipped under level {d_prev} at node {i}"
                );
            }
        }
        assert!(sol.report.residual_max < 1e-8);
        assert!(sol.report.max_value > 0.0);
        assert!(sol.report.max_value <= sol.report.upper_bound);
        assert!(sol.report.delta_final < 4e-5);
        assert!(sol.w.value(0) == 0.0);
        assert!((sol.w.value(sol.w.len() - 1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn forcing_without_coercivity_is_rejected() {
        let mut spec = ProblemSpec::default();
        spec.growth.c0 = 0.0;
        let grid = RadialGrid::uniform(1.0, 2.0, 65).unwrap();
        let err = solve_regularized(&spec, &grid, 1e-2, &SolveConfig::default()).unwrap_err();
        assert!(err.to_string().contains("c0"));
    }

    #[test]
    fn sweep_cap_reports_nonconvergence() {
        let mut spec = ProblemSpec::default();
        spec.growth.c0 = 0.5;
        let grid = RadialGrid::uniform(1.0, 2.0, 65).unwrap();
        let mut cfg = SolveConfig::default();
        cfg.max_inner = 3;
        let err = solve_regularized(&spec, &grid, 1e-2, &cfg).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }

    #[test]
    fn zero_delta_from_zero_start_hits_the_singularity_guard() {
        let mut spec = ProblemSpec::default();
        spec.growth.c0 = 0.5;
        let grid = RadialGrid::uniform(1.0, 2.0, 65).unwrap();
        let err = solve_regularized(&spec, &grid, 0.0, &SolveConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Singularity { .. }));
    }

    #[test]
    fn compare_audit_flags_crossing_profiles() {
        let grid = RadialGrid::uniform(1.0, 2.0, 33).unwrap();
        let low = GridFunction::from_fn(grid.clone(), |r| r - 1.0);
        let high = GridFunction::from_fn(grid, |r| 0.5 * (r - 1.0));
        let err = compare_audit(&low, &high, 1e-9).unwrap_err();
        assert!(matches!(err, Error::ComparisonFailure { .. }));
    }

    #[test]
    fn solved_profile_solves_the_equation_pointwise() {
        let mut spec = ProblemSpec::default();
        spec.ell = Ellipticity::new(1.0, 2.0);
        spec.growth = GrowthParams {
            B: 0.2,
            b: 0.1,
            d: 0.0,
            c0: 1.0,
        };
        spec.forcing.alpha = 1.5;
        spec.forcing.mu = 1.0;
        let grid = RadialGrid::boundary_refined(1.0, 2.0, 1025).unwrap();
        let rs = solve_regularized(&spec, &grid, 5e-3, &SolveConfig::default()).unwrap();
        let scaled = scaled_residual_max(&rs.w, &spec, 5e-3).unwrap();
        assert!(scaled < 1e-8, "scaled residual {scaled}");
    }
}
