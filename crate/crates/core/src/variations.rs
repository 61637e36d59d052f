//! Second variation of the action along vertical perturbations of planar
//! loops, with closed forms at rotating Lagrange and Euler solutions.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::action::{ActionEvaluator, ProblemSetup, RotatingFrame, COLLISION_EPS};
use crate::baselines::{euler_solution, lagrange_solution, Baseline};
use crate::loop_space::FourierLoop;
use crate::symmetry::validate_masses;
use crate::{Error, Result, Vec3};

/// Grid used by the closed-form comparisons.
const REPORT_GRID: usize = 128;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationReport {
    pub second_derivative: f64,
    pub closed_form: Option<f64>,
    pub criterion_satisfied: bool,
    pub threshold: Option<f64>,
}

/// `int sum m_i phi_i'^2 - alpha sum_{i<j} m_i m_j (phi_i - phi_j)^2 / |x_i - x_j|^(alpha+2) dt`
/// on an `m`-point grid. `phi` is read from the third coordinate of its bodies;
/// `planar` must lie in the horizontal plane.
pub fn second_variation_vertical(
    masses: &[f64],
    alpha: f64,
    planar: &FourierLoop,
    phi: &FourierLoop,
    m: usize,
) -> Result<f64> {
    let n = planar.n();
    if phi.n() != n || masses.len() != n {
        return Err(Error::DimensionMismatch("loop, perturbation and masses disagree on n".into()));
    }
    let planar_defect = (0..n)
        .flat_map(|i| (0..=planar.order()).map(move |k| (i, k)))
        .map(|(i, k)| planar.a(i, 2, k).abs().max(planar.b(i, 2, k).abs()))
        .fold(0.0, f64::max);
    if planar_defect > 1e-12 {
        return Err(Error::PreconditionViolated("loop is not horizontal".into()));
    }
    let h = TAU / m as f64;
    let mut total = 0.0;
    for j in 0..m {
        let t = TAU * j as f64 / m as f64;
        let x = planar.position(t);
        let p = phi.position(t);
        let dp = phi.velocity(t);
        for i in 0..n {
            total += h * masses[i] * dp[i].z * dp[i].z;
            for l in (i + 1)..n {
                let r = (x[i] - x[l]).norm();
                if r < COLLISION_EPS {
                    return Err(Error::CollisionAtSample { sample: j, i: i + 1, j: l + 1 });
                }
                let d = p[i].z - p[l].z;
                total -= h * alpha * masses[i] * masses[l] * d * d / r.powf(alpha + 2.0);
            }
        }
    }
    Ok(total)
}

/// Second derivative of `eps -> A(x + eps phi)` at 0 by central differences
/// with one Richardson step.
pub fn second_variation_fd(
    setup: &ProblemSetup,
    x: &FourierLoop,
    phi: &FourierLoop,
    m: usize,
    step: f64,
) -> Result<f64> {
    let phi = phi.with_order(x.order());
    let eval = ActionEvaluator::new(setup, x.order(), m)?;
    let a0 = eval.value(x)?;
    let d2 = |h: f64| -> Result<f64> {
        let plus = eval.value(&x.axpy(h, &phi)?)?;
        let minus = eval.value(&x.axpy(-h, &phi)?)?;
        Ok((plus - 2.0 * a0 + minus) / (h * h))
    };
    let coarse = d2(step)?;
    let fine = d2(step / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Vertical perturbation `phi_i(t) = x_i(t/k) . e` of a rotating central
/// configuration, written on the first harmonic.
pub fn lagrange_direction(b: &Baseline, e: &Vec3) -> FourierLoop {
    let axis = Vec3::z();
    let perp = axis.cross(e);
    let mut phi = FourierLoop::zeros(b.masses.len(), 1);
    for (i, q) in b.positions().iter().enumerate() {
        phi.set_a(i, 2, 1, q.dot(e));
        phi.set_b(i, 2, 1, q.dot(&perp));
    }
    phi
}

/// Vertical perturbation `phi_i(t) = v_i sin t`.
pub fn sine_direction(v: &[f64]) -> FourierLoop {
    let mut phi = FourierLoop::zeros(v.len(), 1);
    for (i, &vi) in v.iter().enumerate() {
        phi.set_b(i, 2, 1, vi);
    }
    phi
}

/// Rotating Lagrange solution is not a minimizer when `(k + omega)^2 > 1`.
pub fn lagrange_instability_test(masses: &[f64], alpha: f64, k: i64, omega: f64) -> Result<VariationReport> {
    let b = lagrange_solution(masses, alpha, k, omega)?;
    let order = (k.unsigned_abs() as usize).max(1);
    let x = b.to_loop(order, &Vec3::z())?;
    let phi = lagrange_direction(&b, &Vec3::x());
    let second = second_variation_vertical(&b.masses, alpha, &x, &phi, REPORT_GRID.max(4 * order + 4))?;
    let c = k as f64 + omega;
    Ok(VariationReport {
        second_derivative: second,
        closed_form: Some(PI * b.inertia * (1.0 - c * c)),
        criterion_satisfied: c * c > 1.0,
        threshold: Some(1.0),
    })
}

/// `pi sum_{i<j} m_i m_j (v_i - v_j)^2 (1 - alpha / |xbar_i - xbar_j|^(alpha+2))`.
pub fn sine_variation_closed_form(b: &Baseline, v: &[f64]) -> f64 {
    let pts = b.positions();
    let mut s = 0.0;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let r = (pts[i] - pts[j]).norm();
            s += b.masses[i] * b.masses[j] * (v[i] - v[j]).powi(2) * (1.0 - b.alpha / r.powf(b.alpha + 2.0));
        }
    }
    PI * s
}

/// `T(m1) = m1 / 2^(alpha+1) + 1 - 2 m1`.
pub fn euler_threshold(m1: f64, alpha: f64) -> Result<f64> {
    if !(m1 > 0.0 && m1 < 0.5) {
        return Err(Error::MassOutOfRange(m1));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    Ok(m1 / 2f64.powf(alpha + 1.0) + 1.0 - 2.0 * m1)
}

/// `(k + omega)^2 > T(m1)`.
pub fn euler_predicate(m1: f64, alpha: f64, k: i64, omega: f64) -> Result<bool> {
    let c = k as f64 + omega;
    Ok(c * c > euler_threshold(m1, alpha)?)
}

/// Sine variation `phi_i = v_i sin t` of a rotating Euler solution; requires
/// `v_1 = v_2` and `sum m_i v_i = 0`.
pub fn sine_variation_test(b: &Baseline, v: &[f64]) -> Result<VariationReport> {
    if v.len() != 3 || (v[0] - v[1]).abs() > 1e-12 {
        return Err(Error::PreconditionViolated("sine variation needs v1 = v2".into()));
    }
    let mv: f64 = b.masses.iter().zip(v).map(|(m, v)| m * v).sum();
    if mv.abs() > 1e-12 {
        return Err(Error::PreconditionViolated("sine variation needs sum m_i v_i = 0".into()));
    }
    let order = (b.k.unsigned_abs() as usize).max(1);
    let x = b.to_loop(order, &Vec3::z())?;
    let phi = sine_direction(v);
    let second = second_variation_vertical(&b.masses, b.alpha, &x, &phi, REPORT_GRID.max(4 * order + 4))?;
    let closed = sine_variation_closed_form(b, v);
    let threshold = euler_threshold(b.masses[0], b.alpha)?;
    let nonzero = v.iter().any(|&x| x != 0.0);
    Ok(VariationReport {
        second_derivative: second,
        closed_form: Some(closed),
        criterion_satisfied: nonzero && closed < 0.0,
        threshold: Some(threshold),
    })
}

/// The standard sine direction `v = (1, 1, -2 m1 / m3)` for an Euler solution.
pub fn euler_sine_vector(masses: &[f64]) -> Result<[f64; 3]> {
    let m = validate_masses(3, masses)?;
    if (m[0] - m[1]).abs() > 1e-12 {
        return Err(Error::AsymmetricMasses);
    }
    Ok([1.0, 1.0, -2.0 * m[0] / m[2]])
}

/// Builds the Euler solution and runs [`sine_variation_test`] with [`euler_sine_vector`].
pub fn euler_instability_test(masses: &[f64], alpha: f64, k: i64, omega: f64) -> Result<VariationReport> {
    let b = euler_solution(masses, alpha, k, omega)?;
    let v = euler_sine_vector(masses)?;
    sine_variation_test(&b, &v)
}

/// Open intervals of speeds `omega` for which `min (k + omega)^2 > threshold`
/// over `k` congruent to one of `residues`: every such interval meeting
/// `[0, modulus)`, unclipped, so one straddling zero appears whole.
pub fn window_for_threshold(threshold: f64, residues: &[i64], modulus: i64) -> Result<Vec<(f64, f64)>> {
    if residues.is_empty() || modulus <= 0 {
        return Err(Error::InvalidInput("need a positive modulus and at least one residue".into()));
    }
    let p = modulus as f64;
    let rad = threshold.max(0.0).sqrt();
    let mut bad: Vec<(f64, f64)> = Vec::new();
    for &r in residues {
        let c = (-r).rem_euclid(modulus) as f64;
        for shift in [-2.0 * p, -p, 0.0, p, 2.0 * p] {
            bad.push((c + shift - rad, c + shift + rad));
        }
    }
    bad.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut cursor = bad[0].1;
    for &(lo, hi) in &bad[1..] {
        if lo > cursor && lo > 0.0 && cursor < p {
            out.push((cursor, lo));
        }
        cursor = cursor.max(hi);
    }
    Ok(out)
}

/// Speeds for which the sine variation destabilizes every admissible rotating Euler solution.
pub fn nonplanar_window(masses: &[f64], alpha: f64, residues: &[i64], modulus: i64) -> Result<Vec<(f64, f64)>> {
    let m = validate_masses(3, masses)?;
    if (m[0] - m[1]).abs() > 1e-12 {
        return Err(Error::AsymmetricMasses);
    }
    window_for_threshold(euler_threshold(m[0], alpha)?, residues, modulus)
}

/// Convenience for the vertical-variation second derivative of a loop in a
/// frame spinning about `e3`.
pub fn vertical_setup(masses: &[f64], alpha: f64, omega: f64) -> Result<ProblemSetup> {
    ProblemSetup::new(masses, alpha, RotatingFrame::about(&Vec3::z(), omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_direction_gives_zero() {
        let b = lagrange_solution(&[1.0; 3], 1.0, 1, 0.0).unwrap();
        let x = b.to_loop(1, &Vec3::z()).unwrap();
        let phi = FourierLoop::zeros(3, 1);
        assert_eq!(second_variation_vertical(&b.masses, 1.0, &x, &phi, 32).unwrap(), 0.0);
    }

    #[test]
    fn lagrange_closed_form_values() {
        let r = lagrange_instability_test(&[1.0; 3], 1.0, 2, 0.0).unwrap();
        let i = lagrange_solution(&[1.0; 3], 1.0, 2, 0.0).unwrap().inertia;
        assert!((r.closed_form.unwrap() + 3.0 * PI * i).abs() < 1e-12);
        assert!((r.second_derivative - r.closed_form.unwrap()).abs() < 1e-10);
        assert!(r.criterion_satisfied);
        let r = lagrange_instability_test(&[1.0; 3], 1.0, 1, 0.0).unwrap();
        assert!(r.closed_form.unwrap().abs() < 1e-12);
        assert!(!r.criterion_satisfied);
    }

    #[test]
    fn threshold_values() {
        assert!((euler_threshold(1.0 / 3.0, 1.0).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        assert!(matches!(euler_threshold(0.5, 1.0), Err(Error::MassOutOfRange(_))));
        assert!(matches!(euler_threshold(0.0, 1.0), Err(Error::MassOutOfRange(_))));
    }

    #[test]
    fn sine_test_sign() {
        let r = euler_instability_test(&[1.0; 3], 1.0, 0, 0.9).unwrap();
        assert!(r.criterion_satisfied);
        let r = euler_instability_test(&[1.0; 3], 1.0, 0, 0.5).unwrap();
        assert!(!r.criterion_satisfied);
        let b = euler_solution(&[1.0; 3], 1.0, 0, 0.5).unwrap();
        let r = sine_variation_test(&b, &[0.0; 3]).unwrap();
        assert_eq!(r.second_derivative, 0.0);
        assert!(!r.criterion_satisfied);
    }

    #[test]
    fn even_window() {
        let w = nonplanar_window(&[1.0; 3], 1.0, &[0], 2).unwrap();
        let s = (5.0f64 / 12.0).sqrt();
        assert_eq!(w.len(), 1);
        assert!((w[0].0 - s).abs() < 1e-12 && (w[0].1 - (2.0 - s)).abs() < 1e-12);
        assert!(window_for_threshold(0.3, &[0], 1).unwrap().is_empty());
    }
}
