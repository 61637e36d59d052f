//! The alpha-homogeneous potential, the rotating-frame kinetic form, and the
//! discretized action with its exact coefficient gradient.

use std::f64::consts::TAU;

use crate::loop_space::FourierLoop;
use crate::symmetry::{validate_masses, SymmetryGroup};
use crate::{Error, Mat3, Result, Vec3};

/// Distance below which two bodies are considered collided.
pub const COLLISION_EPS: f64 = 1e-10;

/// `Omega` with `Omega x = x cross omega`.
pub fn omega_matrix(w: &Vec3) -> Mat3 {
    Mat3::new(0.0, w.z, -w.y, -w.z, 0.0, w.x, w.y, -w.x, 0.0)
}

/// A frame rotating uniformly about `omega_vec`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotatingFrame {
    pub omega_vec: Vec3,
    pub omega: Mat3,
}

impl RotatingFrame {
    pub fn new(omega_vec: Vec3) -> Self {
        Self { omega_vec, omega: omega_matrix(&omega_vec) }
    }

    pub fn inertial() -> Self {
        Self::new(Vec3::zeros())
    }

    /// Frame spinning at speed `omega` about `axis` (normalized here).
    pub fn about(axis: &Vec3, omega: f64) -> Self {
        Self::new(axis.normalize() * omega)
    }

    pub fn speed(&self) -> f64 {
        self.omega_vec.norm()
    }
}

/// Masses (normalized to sum 1), homogeneity exponent, and frame.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSetup {
    pub masses: Vec<f64>,
    pub alpha: f64,
    pub frame: RotatingFrame,
}

impl ProblemSetup {
    pub fn new(masses: &[f64], alpha: f64, frame: RotatingFrame) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { masses: validate_masses(masses.len(), masses)?, alpha, frame })
    }

    pub fn equal_masses(n: usize, alpha: f64, frame: RotatingFrame) -> Result<Self> {
        Self::new(&vec![1.0; n], alpha, frame)
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }
}

/// `sum_{i<j} m_i m_j / |x_i - x_j|^alpha`.
pub fn potential(masses: &[f64], alpha: f64, config: &[Vec3]) -> Result<f64> {
    let mut u = 0.0;
    for i in 0..config.len() {
        for j in (i + 1)..config.len() {
            let r = (config[i] - config[j]).norm();
            if r < COLLISION_EPS {
                return Err(Error::CollisionAtSample { sample: 0, i: i + 1, j: j + 1 });
            }
            u += masses[i] * masses[j] / r.powf(alpha);
        }
    }
    Ok(u)
}

/// Gradient of [`potential`] with respect to each position.
pub fn potential_gradient(masses: &[f64], alpha: f64, config: &[Vec3]) -> Vec<Vec3> {
    let mut g = vec![Vec3::zeros(); config.len()];
    for i in 0..config.len() {
        for j in (i + 1)..config.len() {
            let d = config[i] - config[j];
            let r2 = d.norm_squared();
            let f = -alpha * masses[i] * masses[j] * r2.powf(-(alpha + 2.0) / 2.0);
            g[i] += d * f;
            g[j] -= d * f;
        }
    }
    g
}

/// Moment of inertia `sum m_i |x_i|^2`.
pub fn inertia(masses: &[f64], config: &[Vec3]) -> f64 {
    masses.iter().zip(config).map(|(m, x)| m * x.norm_squared()).sum()
}

/// `1/2 sum m_i |v_i + Omega x_i|^2`.
pub fn kinetic(masses: &[f64], omega: &Mat3, x: &[Vec3], v: &[Vec3]) -> f64 {
    0.5 * masses.iter().zip(x.iter().zip(v)).map(|(m, (x, v))| m * (v + omega * x).norm_squared()).sum::<f64>()
}

/// The kinetic form written through differences, `1/2 sum_{i<j} m_i m_j |u_ij|^2`,
/// valid for centered configurations and masses summing to 1.
pub fn kinetic_by_differences(masses: &[f64], omega: &Mat3, x: &[Vec3], v: &[Vec3]) -> f64 {
    let mut k = 0.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let u = v[i] - v[j] + omega * (x[i] - x[j]);
            k += masses[i] * masses[j] * u.norm_squared();
        }
    }
    0.5 * k
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: f64,
    pub gradient: Option<FourierLoop>,
    pub min_distance: f64,
}

/// Evaluates the rectangle-rule action on a fixed grid for loops of one shape.
#[derive(Clone, Debug)]
pub struct ActionEvaluator {
    setup: ProblemSetup,
    order: usize,
    m: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl ActionEvaluator {
    pub fn new(setup: &ProblemSetup, order: usize, m: usize) -> Result<Self> {
        if m < 2 * order + 2 {
            return Err(Error::DimensionMismatch(format!("grid of {m} points too coarse for order {order}")));
        }
        let mut cos = Vec::with_capacity(m * (order + 1));
        let mut sin = Vec::with_capacity(m * (order + 1));
        for j in 0..m {
            let t = TAU * j as f64 / m as f64;
            for k in 0..=order {
                let (s, c) = (k as f64 * t).sin_cos();
                cos.push(c);
                sin.push(s);
            }
        }
        Ok(Self { setup: setup.clone(), order, m, cos, sin })
    }

    pub fn setup(&self) -> &ProblemSetup {
        &self.setup
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn check(&self, x: &FourierLoop) -> Result<()> {
        if x.order() != self.order || x.n() != self.setup.n() {
            return Err(Error::DimensionMismatch(format!(
                "evaluator for n={}, N={} got loop with n={}, N={}",
                self.setup.n(),
                self.order,
                x.n(),
                x.order()
            )));
        }
        Ok(())
    }

    /// Positions and velocities at grid point `j`.
    fn synth(&self, x: &FourierLoop, j: usize, pos: &mut [Vec3], vel: &mut [Vec3]) {
        let row = j * (self.order + 1);
        let cf = x.coeffs();
        for i in 0..pos.len() {
            for c in 0..3 {
                let base = x.index(i, c, 0);
                let (mut p, mut v) = (0.0, 0.0);
                for k in 0..=self.order {
                    let (a, b) = (cf[base + 2 * k], cf[base + 2 * k + 1]);
                    let (ck, sk) = (self.cos[row + k], self.sin[row + k]);
                    p += a * ck + b * sk;
                    v += k as f64 * (b * ck - a * sk);
                }
                pos[i][c] = p;
                vel[i][c] = v;
            }
        }
    }

    /// Smallest pairwise distance on the grid.
    pub fn min_distance(&self, x: &FourierLoop) -> Result<f64> {
        self.check(x)?;
        let n = x.n();
        let (mut pos, mut vel) = (vec![Vec3::zeros(); n], vec![Vec3::zeros(); n]);
        let mut best = f64::INFINITY;
        for j in 0..self.m {
            self.synth(x, j, &mut pos, &mut vel);
            for a in 0..n {
                for b in (a + 1)..n {
                    best = best.min((pos[a] - pos[b]).norm());
                }
            }
        }
        Ok(best)
    }

    pub fn value(&self, x: &FourierLoop) -> Result<f64> {
        self.evaluate(x, false).map(|e| e.value)
    }

    pub fn value_and_gradient(&self, x: &FourierLoop) -> Result<(f64, FourierLoop)> {
        self.evaluate(x, true).map(|e| (e.value, e.gradient.unwrap()))
    }

    /// Value, optional gradient, and the smallest pairwise distance on the grid.
    pub fn evaluate(&self, x: &FourierLoop, want_grad: bool) -> Result<Evaluation> {
        self.check(x)?;
        let n = x.n();
        let h = TAU / self.m as f64;
        let masses = &self.setup.masses;
        let alpha = self.setup.alpha;
        let om = self.setup.frame.omega;
        let omt = om.transpose();
        let (mut pos, mut vel) = (vec![Vec3::zeros(); n], vec![Vec3::zeros(); n]);
        let mut grad = want_grad.then(|| FourierLoop::zeros(n, self.order));
        let mut total = 0.0;
        let mut min_distance = f64::INFINITY;
        for j in 0..self.m {
            self.synth(x, j, &mut pos, &mut vel);
            let mut u = 0.0;
            for a in 0..n {
                for b in (a + 1)..n {
                    let r = (pos[a] - pos[b]).norm();
                    min_distance = min_distance.min(r);
                    if r < COLLISION_EPS {
                        return Err(Error::CollisionAtSample { sample: j, i: a + 1, j: b + 1 });
                    }
                    u += masses[a] * masses[b] / r.powf(alpha);
                }
            }
            total += h * (kinetic(masses, &om, &pos, &vel) + u);
            let Some(g) = grad.as_mut() else { continue };
            let du = potential_gradient(masses, alpha, &pos);
            let row = j * (self.order + 1);
            let gc = g.coeffs_mut();
            for i in 0..n {
                let w = vel[i] + om * pos[i];
                let gx = (omt * w * masses[i] + du[i]) * h;
                let gv = w * (masses[i] * h);
                for c in 0..3 {
                    let base = x.index(i, c, 0);
                    for k in 0..=self.order {
                        let (ck, sk) = (self.cos[row + k], self.sin[row + k]);
                        let kf = k as f64;
                        gc[base + 2 * k] += gx[c] * ck - kf * gv[c] * sk;
                        gc[base + 2 * k + 1] += gx[c] * sk + kf * gv[c] * ck;
                    }
                }
            }
        }
        if let Some(g) = grad.as_mut() {
            for i in 0..n {
                for c in 0..3 {
                    let idx = g.index(i, c, 0) + 1;
                    g.coeffs_mut()[idx] = 0.0;
                }
            }
        }
        Ok(Evaluation { value: total, gradient: grad, min_distance })
    }
}

/// Action of an equivariant loop, checking that the frame axis is a rotation
/// axis and that the value is invariant under every generator.
pub fn action_of_equivariant(setup: &ProblemSetup, group: &SymmetryGroup, x: &FourierLoop, m: usize) -> Result<f64> {
    let w = setup.frame.omega_vec;
    if w.norm() > 0.0 && !group.is_rotation_axis(&w) {
        return Err(Error::NotARotationAxis([w.x, w.y, w.z]));
    }
    let eval = ActionEvaluator::new(setup, x.order(), m)?;
    let value = eval.value(x)?;
    for g in group.generators() {
        let other = eval.value(&x.act(g)?)?;
        if (other - value).abs() > 1e-9 * value.abs().max(1.0) {
            return Err(Error::PreconditionViolated(format!(
                "action not invariant under a generator ({value} vs {other}); refine the grid"
            )));
        }
    }
    Ok(value)
}
