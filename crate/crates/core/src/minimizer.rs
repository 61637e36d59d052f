//! Projected nonlinear conjugate gradient over equivariant Fourier loops,
//! multi-start driver, and the angular-speed sweep.

use rayon::prelude::*;
use serde::Serialize;

use crate::action::{ActionEvaluator, ProblemSetup, RotatingFrame};
use crate::diagnostics::{report, DiagnosticsReport};
use crate::loop_space::FourierLoop;
use crate::symmetry::SymmetryGroup;
use crate::{Error, Result, Vec3};

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    /// Highest harmonic `N`.
    pub order: usize,
    /// Quadrature points `M`, rounded up to a multiple of the group's time order.
    pub grid: usize,
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Random starts, in addition to `initial`.
    pub starts: usize,
    pub collision_guard: f64,
    pub seed: u64,
    /// Coefficient scale of random starts.
    pub amplitude: f64,
    /// Minimize even when the group is flagged fully uncoercive.
    pub allow_uncoercive: bool,
    /// Extra starting loops, run before the random ones.
    pub initial: Vec<FourierLoop>,
    /// Run starts on the rayon pool.
    pub parallel: bool,
    /// Keep the accepted action values of the returned run.
    pub record_history: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            order: 32,
            grid: 256,
            max_iters: 5000,
            grad_tol: 1e-8,
            starts: 8,
            collision_guard: 1e-6,
            seed: 0,
            amplitude: 1.0,
            allow_uncoercive: false,
            initial: Vec::new(),
            parallel: true,
            record_history: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeResult {
    #[serde(skip)]
    pub loop_: FourierLoop,
    pub action: f64,
    /// Norm of the projected gradient.
    pub grad_norm: f64,
    /// Norm of the unprojected gradient.
    pub full_grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub min_distance: f64,
    pub diagnostics: DiagnosticsReport,
    /// Index of the winning start; warm starts come first.
    pub start: usize,
    pub grid: usize,
    #[serde(skip)]
    pub history: Vec<f64>,
}

/// Grid size used for `group`: at least `grid` and `2N+2`, a multiple of the time order.
pub fn effective_grid(group: &SymmetryGroup, order: usize, grid: usize) -> usize {
    let q = group.time_order().max(1);
    let m = grid.max(2 * order + 2);
    m.div_ceil(q) * q
}

/// Orthogonal projection onto centered equivariant coefficient vectors.
pub(crate) fn project_tangent(group: &SymmetryGroup, masses: &[f64], g: &FourierLoop) -> Result<FourierLoop> {
    let mut c = g.clone();
    let n = c.n();
    let stride = c.coeffs().len() / n;
    let m2: f64 = masses.iter().map(|m| m * m).sum();
    let cf = c.coeffs_mut();
    for off in 0..stride {
        let s: f64 = (0..n).map(|i| masses[i] * cf[i * stride + off]).sum::<f64>() / m2;
        for i in 0..n {
            cf[i * stride + off] -= masses[i] * s;
        }
    }
    c.project(group)
}

fn dot(a: &FourierLoop, b: &FourierLoop) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).sum()
}

struct Run {
    x: FourierLoop,
    value: f64,
    grad_norm: f64,
    iterations: usize,
    converged: bool,
    history: Vec<f64>,
}

enum RunError {
    Collided,
    Other(Error),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::CollisionAtSample { .. } => RunError::Collided,
            other => RunError::Other(other),
        }
    }
}

fn descend(
    eval: &ActionEvaluator,
    group: &SymmetryGroup,
    start: FourierLoop,
    opts: &MinimizeOptions,
) -> std::result::Result<Run, RunError> {
    let masses = &eval.setup().masses;
    let mut x = start;
    let first = eval.evaluate(&x, true)?;
    if first.min_distance < opts.collision_guard {
        return Err(RunError::Collided);
    }
    let mut f = first.value;
    let mut g = project_tangent(group, masses, &first.gradient.unwrap())?;
    let mut d = g.scaled(-1.0);
    let mut gd_prev = 0.0;
    let mut step_prev = 0.0;
    let mut history = if opts.record_history { vec![f] } else { Vec::new() };
    let mut iterations = 0;
    let mut guard_hits = 0usize;
    while iterations < opts.max_iters {
        let gnorm = g.norm();
        if gnorm <= opts.grad_tol {
            return Ok(Run { x, value: f, grad_norm: gnorm, iterations, converged: true, history });
        }
        let mut gd = dot(&g, &d);
        if gd >= 0.0 {
            d = g.scaled(-1.0);
            gd = -gnorm * gnorm;
        }
        let mut alpha =
            if step_prev > 0.0 { (step_prev * gd_prev / gd).min(1e3 * step_prev) } else { (0.1 / d.norm()).min(1.0) };
        let mut accepted: Option<(FourierLoop, f64, FourierLoop)> = None;
        let mut fallback: Option<(f64, FourierLoop, f64, FourierLoop)> = None;
        // bracket [lo, hi] on the step, with the slope at lo
        let (mut lo, mut slope_lo, mut hi) = (0.0, gd, f64::INFINITY);
        for _ in 0..60 {
            let trial = x.axpy(alpha, &d)?;
            let next = match eval.evaluate(&trial, true) {
                Ok(e) if e.min_distance >= opts.collision_guard => {
                    let gt = e.gradient.unwrap();
                    let slope = dot(&gt, &d);
                    let armijo = e.value <= f + 1e-4 * alpha * gd;
                    let flat = e.value <= f + 1e-12 * f.abs();
                    let approx_wolfe = flat && slope >= 0.9 * gd && slope <= -0.8 * gd;
                    if (armijo && slope >= 0.9 * gd) || approx_wolfe {
                        accepted = Some((trial, e.value, gt));
                        break;
                    }
                    if (armijo || flat) && slope < 0.9 * gd {
                        // too short: still descending steeply
                        let grown = if slope > slope_lo {
                            alpha - slope * (alpha - lo) / (slope - slope_lo)
                        } else {
                            4.0 * alpha
                        };
                        if armijo {
                            fallback = Some((alpha, trial, e.value, gt));
                        }
                        lo = alpha;
                        slope_lo = slope;
                        let grown = grown.clamp(1.5 * alpha, 10.0 * alpha);
                        if hi.is_finite() {
                            grown.min(lo + 0.9 * (hi - lo))
                        } else {
                            grown
                        }
                    } else {
                        hi = alpha;
                        let w = alpha - lo;
                        let s = if slope > slope_lo { lo - slope_lo * w / (slope - slope_lo) } else { lo + 0.5 * w };
                        s.clamp(lo + 0.1 * w, lo + 0.9 * w)
                    }
                }
                Ok(_) | Err(Error::CollisionAtSample { .. }) => {
                    guard_hits += 1;
                    hi = alpha;
                    0.5 * (lo + alpha)
                }
                Err(e) => return Err(RunError::Other(e)),
            };
            alpha = next;
        }
        if accepted.is_none() {
            if let Some((a, xt, ft, gt)) = fallback {
                alpha = a;
                accepted = Some((xt, ft, gt));
            }
        }
        let Some((xn, fn_, gfull)) = accepted else {
            // no acceptable step along the descent direction
            if guard_hits > 0 && iterations == 0 {
                return Err(RunError::Collided);
            }
            break;
        };
        let gn = project_tangent(group, masses, &gfull)?;
        // Polak-Ribiere+
        let beta = (dot(&gn, &gn) - dot(&gn, &g)).max(0.0) / (gnorm * gnorm);
        d = gn.scaled(-1.0).axpy(beta, &d)?;
        step_prev = alpha;
        gd_prev = gd;
        x = xn;
        f = fn_;
        g = gn;
        iterations += 1;
        if opts.record_history {
            history.push(f);
        }
    }
    let gnorm = g.norm();
    Ok(Run { x, value: f, grad_norm: gnorm, iterations, converged: gnorm <= opts.grad_tol, history })
}

fn check_preconditions(setup: &ProblemSetup, group: &SymmetryGroup, opts: &MinimizeOptions) -> Result<SymmetryGroup> {
    if group.n() != setup.n() {
        return Err(Error::DimensionMismatch(format!("group on {} bodies, {} masses", group.n(), setup.n())));
    }
    let group = group.clone().with_masses(&setup.masses)?;
    if group.is_bound_to_collisions() {
        return Err(Error::BoundToCollisions);
    }
    let w = setup.frame.omega_vec;
    if w.norm() > 0.0 && !group.is_rotation_axis(&w) {
        return Err(Error::NotARotationAxis([w.x, w.y, w.z]));
    }
    if !opts.allow_uncoercive && group.is_fully_uncoercive()? {
        return Err(Error::FullyUncoercive);
    }
    Ok(group)
}

/// Best-of-starts local minimizer of the discretized action over centered equivariant loops.
pub fn minimize(setup: &ProblemSetup, group: &SymmetryGroup, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    let group = check_preconditions(setup, group, opts)?;
    let m = effective_grid(&group, opts.order, opts.grid);
    let eval = ActionEvaluator::new(setup, opts.order, m)?;
    let mut starts: Vec<Result<FourierLoop>> = opts
        .initial
        .iter()
        .map(|x| {
            let mut y = x.with_order(opts.order);
            y.center(&setup.masses)?;
            y.project(&group)
        })
        .collect();
    for s in 0..opts.starts {
        starts.push(FourierLoop::random_equivariant(
            &group,
            opts.order,
            opts.seed.wrapping_add(s as u64),
            opts.amplitude,
        ));
    }
    if starts.is_empty() {
        return Err(Error::InvalidInput("no starts requested".into()));
    }
    let run =
        |start: Result<FourierLoop>| -> std::result::Result<Run, RunError> { descend(&eval, &group, start?, opts) };
    let runs: Vec<std::result::Result<Run, RunError>> =
        if opts.parallel { starts.into_par_iter().map(run).collect() } else { starts.into_iter().map(run).collect() };
    let mut best: Option<(usize, Run)> = None;
    let mut collided = 0;
    for (i, r) in runs.into_iter().enumerate() {
        match r {
            Ok(run) => {
                if best.as_ref().is_none_or(|(_, b)| run.value < b.value) {
                    best = Some((i, run));
                }
            }
            Err(RunError::Collided) => collided += 1,
            Err(RunError::Other(e)) => return Err(e),
        }
    }
    let Some((start, run)) = best else {
        return Err(Error::AllStartsCollided(collided));
    };
    finish(setup, &group, &eval, start, run)
}

fn finish(
    setup: &ProblemSetup,
    group: &SymmetryGroup,
    eval: &ActionEvaluator,
    start: usize,
    run: Run,
) -> Result<MinimizeResult> {
    let e = eval.evaluate(&run.x, true)?;
    let full = e.gradient.unwrap();
    let m = eval.grid_size();
    Ok(MinimizeResult {
        diagnostics: report(setup, group, &run.x, m),
        action: run.value,
        grad_norm: run.grad_norm,
        full_grad_norm: full.norm(),
        iterations: run.iterations,
        converged: run.converged,
        min_distance: e.min_distance,
        start,
        grid: m,
        history: run.history,
        loop_: run.x,
    })
}

/// One row of an angular-speed sweep.
#[derive(Clone, Debug)]
pub struct SweepPoint {
    pub omega: f64,
    pub result: std::result::Result<MinimizeResult, String>,
}

/// Minimizes at each speed about `axis`; each point after the first starts
/// from the previous loop (slightly perturbed) and from one fresh random loop.
pub fn sweep_omega(
    masses: &[f64],
    alpha: f64,
    axis: &Vec3,
    group: &SymmetryGroup,
    omegas: &[f64],
    opts: &MinimizeOptions,
) -> Vec<SweepPoint> {
    let mut out = Vec::with_capacity(omegas.len());
    let mut prev: Option<FourierLoop> = None;
    for (idx, &omega) in omegas.iter().enumerate() {
        let result = ProblemSetup::new(masses, alpha, RotatingFrame::about(axis, omega)).and_then(|setup| {
            let mut o = opts.clone();
            if let Some(p) = &prev {
                let noise =
                    FourierLoop::random_equivariant(group, p.order(), opts.seed.wrapping_add(1000 + idx as u64), 1e-3)?;
                o.initial = vec![p.axpy(1.0, &noise)?];
                o.starts = 1;
                o.seed = opts.seed.wrapping_add(idx as u64 * 7919);
            }
            minimize(&setup, group, &o)
        });
        if let Ok(r) = &result {
            prev = Some(r.loop_.clone());
        }
        out.push(SweepPoint { omega, result: result.map_err(|e| e.to_string()) });
    }
    out
}
