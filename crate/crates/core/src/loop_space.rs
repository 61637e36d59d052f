//! Truncated Fourier loops of `n` bodies in space with period `2pi`, the
//! action of symmetry elements on them, and projection onto equivariant loops.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use nalgebra::Rotation3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::symmetry::{GroupElement, SymmetryGroup};
use crate::{Error, Result, Vec3};

/// A loop `x_i(t) = sum_k a_{i,k} cos(kt) + b_{i,k} sin(kt)`, `k = 0..=N`.
///
/// Coefficients are stored flat; see [`FourierLoop::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct FourierLoop {
    n: usize,
    order: usize,
    coeffs: Vec<f64>,
}

/// Positions and velocities on the uniform grid `t_j = 2 pi j / M`.
#[derive(Clone, Debug)]
pub struct SampledLoop {
    pub times: Vec<f64>,
    /// `positions[j][i]` is body `i` at `t_j`.
    pub positions: Vec<Vec<Vec3>>,
    pub velocities: Vec<Vec<Vec3>>,
}

impl FourierLoop {
    pub fn zeros(n: usize, order: usize) -> Self {
        Self { n, order, coeffs: vec![0.0; n * 3 * (order + 1) * 2] }
    }

    pub fn from_coeffs(n: usize, order: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != n * 3 * (order + 1) * 2 {
            return Err(Error::DimensionMismatch(format!("{} coefficients for n = {n}, N = {order}", coeffs.len())));
        }
        let mut x = Self { n, order, coeffs };
        for i in 0..n {
            for c in 0..3 {
                x.coeffs[Self::raw_index(order, i, c, 0) + 1] = 0.0;
            }
        }
        Ok(x)
    }

    /// A rigid configuration, constant in time.
    pub fn constant(config: &[Vec3], order: usize) -> Self {
        let mut x = Self::zeros(config.len(), order);
        for (i, p) in config.iter().enumerate() {
            for c in 0..3 {
                x.set_a(i, c, 0, p[c]);
            }
        }
        x
    }

    fn raw_index(order: usize, i: usize, c: usize, k: usize) -> usize {
        ((i * 3 + c) * (order + 1) + k) * 2
    }

    /// Flat index of `a_{i,c,k}`; `b_{i,c,k}` sits at the next slot.
    pub fn index(&self, i: usize, c: usize, k: usize) -> usize {
        Self::raw_index(self.order, i, c, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn a(&self, i: usize, c: usize, k: usize) -> f64 {
        self.coeffs[self.index(i, c, k)]
    }

    pub fn b(&self, i: usize, c: usize, k: usize) -> f64 {
        self.coeffs[self.index(i, c, k) + 1]
    }

    pub fn set_a(&mut self, i: usize, c: usize, k: usize, v: f64) {
        let idx = self.index(i, c, k);
        self.coeffs[idx] = v;
    }

    pub fn set_b(&mut self, i: usize, c: usize, k: usize, v: f64) {
        if k > 0 {
            let idx = self.index(i, c, k) + 1;
            self.coeffs[idx] = v;
        }
    }

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.order != other.order {
            return Err(Error::DimensionMismatch(format!(
                "loops of shape (n={}, N={}) and (n={}, N={})",
                self.n, self.order, other.n, other.order
            )));
        }
        Ok(())
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| x + s * y).collect();
        Ok(Self { n: self.n, order: self.order, coeffs })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { n: self.n, order: self.order, coeffs: self.coeffs.iter().map(|x| s * x).collect() }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Largest coefficient difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// Same loop with harmonics truncated or zero-padded to `order`.
    pub fn with_order(&self, order: usize) -> Self {
        let mut y = Self::zeros(self.n, order);
        for i in 0..self.n {
            for c in 0..3 {
                for k in 0..=order.min(self.order) {
                    y.set_a(i, c, k, self.a(i, c, k));
                    y.set_b(i, c, k, self.b(i, c, k));
                }
            }
        }
        y
    }

    pub fn position(&self, t: f64) -> Vec<Vec3> {
        self.derivative_at(t, 0)
    }

    pub fn velocity(&self, t: f64) -> Vec<Vec3> {
        self.derivative_at(t, 1)
    }

    pub fn acceleration(&self, t: f64) -> Vec<Vec3> {
        self.derivative_at(t, 2)
    }

    fn derivative_at(&self, t: f64, d: u32) -> Vec<Vec3> {
        let mut out = vec![Vec3::zeros(); self.n];
        for k in 0..=self.order {
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            // d-th derivative of a cos + b sin
            let (wc, ws) = match d {
                0 => (c, s),
                1 => (-kf * s, kf * c),
                _ => (-kf * kf * c, -kf * kf * s),
            };
            for (i, p) in out.iter_mut().enumerate() {
                for comp in 0..3 {
                    let idx = self.index(i, comp, k);
                    p[comp] += self.coeffs[idx] * wc + self.coeffs[idx + 1] * ws;
                }
            }
        }
        out
    }

    /// Positions and velocities on `m` uniform grid points.
    pub fn sample(&self, m: usize) -> SampledLoop {
        let times: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
        SampledLoop {
            positions: times.iter().map(|&t| self.position(t)).collect(),
            velocities: times.iter().map(|&t| self.velocity(t)).collect(),
            times,
        }
    }

    /// Discrete Fourier fit of positions sampled at `t_j = 2 pi j / M`;
    /// exact for loops of order `< M/2`.
    pub fn from_samples(positions: &[Vec<Vec3>], order: usize) -> Result<Self> {
        let m = positions.len();
        if m < 2 * order + 2 {
            return Err(Error::DimensionMismatch(format!("{m} samples cannot resolve order {order}")));
        }
        let n = positions[0].len();
        if positions.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch("ragged sample rows".into()));
        }
        let mut x = Self::zeros(n, order);
        for (j, row) in positions.iter().enumerate() {
            let t = TAU * j as f64 / m as f64;
            for k in 0..=order {
                let (s, c) = (k as f64 * t).sin_cos();
                let w = if k == 0 { 1.0 } else { 2.0 } / m as f64;
                for (i, p) in row.iter().enumerate() {
                    for comp in 0..3 {
                        let idx = x.index(i, comp, k);
                        x.coeffs[idx] += w * p[comp] * c;
                        if k > 0 {
                            x.coeffs[idx + 1] += w * p[comp] * s;
                        }
                    }
                }
            }
        }
        Ok(x)
    }

    /// Removes the weighted mean so that `sum m_i x_i = 0`.
    pub fn center(&mut self, masses: &[f64]) -> Result<()> {
        if masses.len() != self.n {
            return Err(Error::DimensionMismatch(format!("{} masses for {} bodies", masses.len(), self.n)));
        }
        let total: f64 = masses.iter().sum();
        let stride = 3 * (self.order + 1) * 2;
        for off in 0..stride {
            let mean: f64 = (0..self.n).map(|i| masses[i] * self.coeffs[i * stride + off]).sum::<f64>() / total;
            for i in 0..self.n {
                self.coeffs[i * stride + off] -= mean;
            }
        }
        Ok(())
    }

    /// Largest `|sum_i m_i c_i|` over coefficient slots.
    pub fn center_of_mass_defect(&self, masses: &[f64]) -> f64 {
        let stride = 3 * (self.order + 1) * 2;
        (0..stride)
            .map(|off| (0..self.n).map(|i| masses[i] * self.coeffs[i * stride + off]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    /// The loop `t -> rho x_{sigma^-1(i)}(tau^-1 t)`, exact on coefficients.
    pub fn act(&self, g: &GroupElement) -> Result<Self> {
        if g.perm.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "element permutes {} bodies, loop has {}",
                g.perm.len(),
                self.n
            )));
        }
        let mut y = Self::zeros(self.n, self.order);
        let o = g.time.orientation as f64;
        for k in 0..=self.order {
            let (sk, ck) = (k as f64 * g.time.shift).sin_cos();
            for j in 0..self.n {
                let mut a = Vec3::zeros();
                let mut b = Vec3::zeros();
                for c in 0..3 {
                    let a0 = self.a(j, c, k);
                    let b0 = o * self.b(j, c, k);
                    a[c] = a0 * ck - b0 * sk;
                    b[c] = a0 * sk + b0 * ck;
                }
                let (a, b) = (g.space * a, g.space * b);
                let i = g.perm.image(j);
                for c in 0..3 {
                    y.set_a(i, c, k, a[c]);
                    y.set_b(i, c, k, b[c]);
                }
            }
        }
        Ok(y)
    }

    /// Group average `(1/|G|) sum_g g.x`.
    pub fn project(&self, group: &SymmetryGroup) -> Result<Self> {
        if group.n() != self.n {
            return Err(Error::DimensionMismatch(format!("group on {} bodies, loop has {}", group.n(), self.n)));
        }
        let mut acc = vec![0.0; self.coeffs.len()];
        for g in group.elements() {
            let y = self.act(g)?;
            for (s, v) in acc.iter_mut().zip(&y.coeffs) {
                *s += v;
            }
        }
        let w = 1.0 / group.order() as f64;
        Ok(Self { n: self.n, order: self.order, coeffs: acc.into_iter().map(|v| v * w).collect() })
    }

    /// Largest coefficient change under any generator.
    pub fn equivariance_defect(&self, group: &SymmetryGroup) -> Result<f64> {
        let mut worst = 0.0f64;
        for g in group.generators() {
            worst = worst.max(self.act(g)?.max_abs_diff(self));
        }
        Ok(worst)
    }

    /// Random equivariant loop, coefficients uniform with scale `amplitude/(1+k^2)`.
    pub fn random_equivariant(group: &SymmetryGroup, order: usize, seed: u64, amplitude: f64) -> Result<Self> {
        if !(amplitude > 0.0) {
            return Err(Error::InvalidInput("amplitude must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut x = Self::zeros(group.n(), order);
        for i in 0..group.n() {
            for c in 0..3 {
                for k in 0..=order {
                    let scale = amplitude / (1.0 + (k * k) as f64);
                    x.set_a(i, c, k, scale * rng.gen_range(-1.0..1.0));
                    let b = scale * rng.gen_range(-1.0..1.0);
                    x.set_b(i, c, k, b);
                }
            }
        }
        x.center(&group.masses_or_equal())?;
        let y = x.project(group)?;
        if y.norm() < 1e-12 * amplitude {
            return Err(Error::DegenerateOutput("projection onto equivariant loops vanished; raise the order".into()));
        }
        Ok(y)
    }

    /// Applies a fixed orthogonal map to every body.
    pub fn transform_space(&self, r: &crate::Mat3) -> Self {
        let mut y = self.clone();
        for i in 0..self.n {
            for k in 0..=self.order {
                let a = r * Vec3::new(self.a(i, 0, k), self.a(i, 1, k), self.a(i, 2, k));
                let b = r * Vec3::new(self.b(i, 0, k), self.b(i, 1, k), self.b(i, 2, k));
                for c in 0..3 {
                    y.set_a(i, c, k, a[c]);
                    y.set_b(i, c, k, b[c]);
                }
            }
        }
        y
    }

    /// Trajectory table with header `t,x1,y1,z1,...`. With `omega` the
    /// positions are mapped to the inertial frame by `exp(t Omega)`.
    pub fn to_csv(&self, m: usize, omega: Option<&Vec3>) -> String {
        let mut out = String::from("t");
        for i in 1..=self.n {
            let _ = write!(out, ",x{i},y{i},z{i}");
        }
        out.push('\n');
        for j in 0..m {
            let t = TAU * j as f64 / m as f64;
            let rot = omega.map(|w| inertial_rotation(w, t));
            let _ = write!(out, "{t}");
            for p in self.position(t) {
                let p = rot.map_or(p, |r| r * p);
                let _ = write!(out, ",{},{},{}", p.x, p.y, p.z);
            }
            out.push('\n');
        }
        out
    }

    /// Inverse of [`FourierLoop::to_csv`] for rotating-frame tables.
    pub fn from_csv(text: &str, order: usize) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::InvalidInput("empty CSV".into()))?;
        let cols = header.split(',').count();
        if cols < 4 || (cols - 1) % 3 != 0 {
            return Err(Error::InvalidInput(format!("bad CSV header {header:?}")));
        }
        let n = (cols - 1) / 3;
        let mut rows = Vec::new();
        for line in lines {
            let vals = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::InvalidInput(format!("bad CSV value: {e}")))?;
            if vals.len() != cols {
                return Err(Error::InvalidInput("ragged CSV row".into()));
            }
            rows.push((0..n).map(|i| Vec3::new(vals[1 + 3 * i], vals[2 + 3 * i], vals[3 + 3 * i])).collect());
        }
        Self::from_samples(&rows, order)
    }
}

/// `exp(t Omega)` for `Omega x = x cross omega`.
pub fn inertial_rotation(omega: &Vec3, t: f64) -> crate::Mat3 {
    Rotation3::from_scaled_axis(-omega * t).into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symmetry::{Perm, TimeTransform, DEFAULT_CAP};
    use std::f64::consts::PI;

    fn random_loop(n: usize, order: usize, seed: u64) -> FourierLoop {
        let g = SymmetryGroup::generate(n, vec![], 1).unwrap();
        FourierLoop::random_equivariant(&g, order, seed, 1.0).unwrap()
    }

    #[test]
    fn shift_by_pi_negates_first_harmonic() {
        let mut x = FourierLoop::zeros(3, 1);
        x.set_a(0, 0, 1, 1.0);
        x.set_b(1, 2, 1, -2.0);
        let g = GroupElement::diagonal(TimeTransform::shift(PI), [1.0; 3], Perm::identity(3));
        let y = x.act(&g).unwrap();
        assert!(y.max_abs_diff(&x.scaled(-1.0)) < 1e-15);
    }

    #[test]
    fn act_matches_pointwise_oracle() {
        let x = random_loop(3, 2, 5);
        let g = GroupElement::diagonal(
            TimeTransform::reflection(0.7),
            [1.0, 1.0, -1.0],
            Perm::from_cycles(3, &[&[1, 2]]).unwrap(),
        );
        let y = x.act(&g).unwrap();
        let ginv = g.inverse();
        for j in 0..64 {
            let t = TAU * j as f64 / 64.0;
            let src = x.position(ginv.time.apply(t));
            let got = y.position(t);
            for i in 0..3 {
                let expect = g.space * src[g.perm.inverse().image(i)];
                assert!((got[i] - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn c3_minus_projection_is_a_choreography() {
        let r = GroupElement::diagonal(
            TimeTransform::shift(PI / 3.0),
            [1.0, 1.0, -1.0],
            Perm::from_cycles(3, &[&[1, 2, 3]]).unwrap(),
        );
        let g = SymmetryGroup::generate(3, vec![r.clone()], DEFAULT_CAP).unwrap();
        let mut x = FourierLoop::zeros(3, 5);
        for c in 0..3 {
            for k in 0..=5 {
                x.set_a(0, c, k, 0.3 + 0.1 * (c + k) as f64);
                x.set_b(0, c, k, 0.2 - 0.05 * (c * k) as f64);
            }
        }
        let y = x.project(&g).unwrap();
        for j in 0..60 {
            let t = TAU * j as f64 / 60.0;
            let now = y.position(t);
            let before = y.position(t - PI / 3.0);
            for i in 0..3 {
                assert!((now[(i + 1) % 3] - r.space * before[i]).norm() < 1e-10);
            }
        }
        assert!(y.project(&g).unwrap().max_abs_diff(&y) < 1e-12);
    }

    #[test]
    fn sample_round_trip() {
        let x = random_loop(3, 6, 1);
        let s = x.sample(32);
        let y = FourierLoop::from_samples(&s.positions, 6).unwrap();
        assert!(y.max_abs_diff(&x) < 1e-12);
        assert!(FourierLoop::from_samples(&s.positions[..10], 6).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let x = random_loop(3, 4, 9);
        let y = FourierLoop::from_csv(&x.to_csv(16, None), 4).unwrap();
        assert!(y.max_abs_diff(&x) < 1e-13);
    }

    #[test]
    fn inertial_rotation_solves_frame_equation() {
        let w = Vec3::new(0.0, 0.0, 0.7);
        let (t, h) = (0.4, 1e-6);
        let d = (inertial_rotation(&w, t + h) - inertial_rotation(&w, t - h)) / (2.0 * h);
        let omega = crate::action::omega_matrix(&w);
        let expect = inertial_rotation(&w, t) * omega;
        assert!((d - expect).abs().max() < 1e-8);
    }

    #[test]
    fn random_is_deterministic_and_centered() {
        let a = random_loop(3, 4, 42);
        assert_eq!(a, random_loop(3, 4, 42));
        assert!(a.center_of_mass_defect(&[1.0 / 3.0; 3]) < 1e-14);
    }
}
