//! Post-hoc checks of computed orbits: angular momentum, planarity,
//! collision margin and Euler-Lagrange residual.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::action::{potential_gradient, ProblemSetup};
use crate::loop_space::FourierLoop;
use crate::symmetry::SymmetryGroup;
use crate::Vec3;

/// Orbits with `planarity_ratio` above this are reported as non-planar.
pub const PLANARITY_THRESHOLD: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub j_mean: [f64; 3],
    pub j_max_deviation: f64,
    pub j_in_estar_residual: f64,
    pub planarity_ratio: f64,
    pub min_pairwise_distance: f64,
    pub el_residual_max: f64,
}

impl DiagnosticsReport {
    pub fn j_norm(&self) -> f64 {
        Vec3::from(self.j_mean).norm()
    }

    pub fn is_planar(&self) -> bool {
        self.planarity_ratio <= PLANARITY_THRESHOLD
    }
}

/// `J(t) = sum m_i x_i x x_i'` in frame coordinates.
pub fn angular_momentum(masses: &[f64], x: &FourierLoop, t: f64) -> Vec3 {
    let p = x.position(t);
    let v = x.velocity(t);
    masses.iter().zip(p.iter().zip(&v)).map(|(m, (p, v))| p.cross(v) * *m).sum()
}

/// Mean of `J` over the grid and its largest deviation from the mean.
pub fn angular_momentum_profile(masses: &[f64], x: &FourierLoop, m: usize) -> (Vec3, f64) {
    let js: Vec<Vec3> = (0..m).map(|j| angular_momentum(masses, x, TAU * j as f64 / m as f64)).collect();
    let mean = js.iter().sum::<Vec3>() / m as f64;
    let dev = js.iter().map(|j| (j - mean).norm()).fold(0.0, f64::max);
    (mean, dev)
}

/// Orthonormal basis of `E*`, where the angular momentum of equivariant orbits lives.
pub fn estar_space(group: &SymmetryGroup) -> Vec<Vec3> {
    group.estar_basis()
}

/// Distance from `v` to the span of `basis` (assumed orthonormal).
pub fn distance_to_span(v: &Vec3, basis: &[Vec3]) -> f64 {
    let proj: Vec3 = basis.iter().map(|b| b * b.dot(v)).sum();
    (v - proj).norm()
}

/// Ratio of the smallest to the largest singular value of the `3 x (nM)`
/// cloud of positions.
pub fn planarity_ratio(x: &FourierLoop, m: usize) -> f64 {
    let mut cloud = DMatrix::<f64>::zeros(3, x.n() * m);
    for j in 0..m {
        for (i, p) in x.position(TAU * j as f64 / m as f64).iter().enumerate() {
            cloud.set_column(j * x.n() + i, p);
        }
    }
    let sv = cloud.svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

pub fn min_pairwise_distance(x: &FourierLoop, m: usize) -> f64 {
    let mut best = f64::INFINITY;
    for j in 0..m {
        let p = x.position(TAU * j as f64 / m as f64);
        for a in 0..p.len() {
            for b in (a + 1)..p.len() {
                best = best.min((p[a] - p[b]).norm());
            }
        }
    }
    best
}

/// Largest `|m_i (x'' + 2 Omega x' + Omega^2 x) - grad_i U|` on the grid.
pub fn el_residual(setup: &ProblemSetup, x: &FourierLoop, m: usize) -> f64 {
    let om = setup.frame.omega;
    let om2 = om * om;
    let mut worst = 0.0f64;
    for j in 0..m {
        let t = TAU * j as f64 / m as f64;
        let p = x.position(t);
        let v = x.velocity(t);
        let a = x.acceleration(t);
        if (0..p.len()).any(|i| ((i + 1)..p.len()).any(|l| (p[i] - p[l]).norm() < 1e-10)) {
            return f64::INFINITY;
        }
        let du = potential_gradient(&setup.masses, setup.alpha, &p);
        for i in 0..p.len() {
            let r = (a[i] + om * v[i] * 2.0 + om2 * p[i]) * setup.masses[i] - du[i];
            worst = worst.max(r.norm());
        }
    }
    worst
}

pub fn report(setup: &ProblemSetup, group: &SymmetryGroup, x: &FourierLoop, m: usize) -> DiagnosticsReport {
    let (mean, dev) = angular_momentum_profile(&setup.masses, x, m);
    DiagnosticsReport {
        j_mean: [mean.x, mean.y, mean.z],
        j_max_deviation: dev,
        j_in_estar_residual: distance_to_span(&mean, &estar_space(group)),
        planarity_ratio: planarity_ratio(x, m),
        min_pairwise_distance: min_pairwise_distance(x, m),
        el_residual_max: el_residual(setup, x, m),
    }
}
