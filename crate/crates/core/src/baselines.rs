//! Rigidly rotating Lagrange (equilateral) and Euler (collinear) solutions,
//! the rotation numbers a group admits for them, and the Gordon test.

use std::f64::consts::{PI, TAU};
use std::ops::RangeInclusive;

use nalgebra::Rotation3;
use serde::{Deserialize, Serialize};

use crate::action::inertia;
use crate::loop_space::FourierLoop;
use crate::symmetry::{validate_masses, SymmetryGroup};
use crate::{Error, Mat3, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    Lagrange,
    Euler,
}

/// A central configuration rotating `k` times per period in a frame of speed `omega`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Baseline {
    pub kind: BaselineKind,
    pub k: i64,
    pub omega: f64,
    pub alpha: f64,
    pub masses: Vec<f64>,
    /// Side length for Lagrange, half-length `R` for Euler.
    pub scale: f64,
    /// Configuration in the horizontal plane, centered.
    pub config: Vec<[f64; 3]>,
    pub inertia: f64,
    pub potential: f64,
    pub action: f64,
}

impl Baseline {
    pub fn positions(&self) -> Vec<Vec3> {
        self.config.iter().map(|p| Vec3::from(*p)).collect()
    }

    /// `(k + omega)^2 I - alpha U`.
    pub fn kepler_residual(&self) -> f64 {
        let c = self.k as f64 + self.omega;
        c * c * self.inertia - self.alpha * self.potential
    }

    /// The loop `x_i(t) = Rot_axis(-k t) xbar_i`, with `xbar` carried from the
    /// horizontal plane to the plane orthogonal to `axis`.
    pub fn to_loop(&self, order: usize, axis: &Vec3) -> Result<FourierLoop> {
        rotating_loop(&self.positions(), self.k, order, axis)
    }
}

/// Rotation carrying `e3` to the unit vector along `axis`.
pub(crate) fn frame_to_axis(axis: &Vec3) -> Mat3 {
    let a = axis.normalize();
    Rotation3::rotation_between(&Vec3::z(), &a)
        .map(|r| r.into_inner())
        .unwrap_or_else(|| Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0)))
}

/// `x_i(t) = Rot_axis(-k t) R q_i` where `R` maps the horizontal plane to `axis^perp`.
pub fn rotating_loop(config: &[Vec3], k: i64, order: usize, axis: &Vec3) -> Result<FourierLoop> {
    let kk = k.unsigned_abs() as usize;
    if kk > order {
        return Err(Error::DimensionMismatch(format!("rotation number {k} exceeds order {order}")));
    }
    let rot = frame_to_axis(axis);
    let e = axis.normalize();
    let mut x = FourierLoop::zeros(config.len(), order);
    for (i, q) in config.iter().enumerate() {
        let a = rot * q;
        let b = -(k.signum() as f64) * e.cross(&a);
        for c in 0..3 {
            x.set_a(i, c, kk, a[c]);
            x.set_b(i, c, kk, b[c]);
        }
    }
    Ok(x)
}

fn frequency(k: i64, omega: f64) -> Result<f64> {
    let c = k as f64 + omega;
    if c.abs() < 1e-14 {
        return Err(Error::ZeroFrequency);
    }
    Ok(c)
}

fn lagrange_shape(masses: &[f64], side: f64, phase: f64) -> Vec<Vec3> {
    let r = side / 3f64.sqrt();
    let mut pts: Vec<Vec3> = (0..masses.len())
        .map(|j| {
            let a = phase + TAU * j as f64 / 3.0;
            Vec3::new(r * a.cos(), r * a.sin(), 0.0)
        })
        .collect();
    let com: Vec3 = pts.iter().zip(masses).map(|(p, m)| p * *m).sum();
    for p in &mut pts {
        *p -= com;
    }
    pts
}

fn finish(
    kind: BaselineKind,
    k: i64,
    omega: f64,
    alpha: f64,
    masses: Vec<f64>,
    scale: f64,
    pts: Vec<Vec3>,
) -> Baseline {
    let c = k as f64 + omega;
    let i = inertia(&masses, &pts);
    let u = crate::action::potential(&masses, alpha, &pts).expect("central configurations are collision-free");
    Baseline {
        kind,
        k,
        omega,
        alpha,
        scale,
        config: pts.iter().map(|p| [p.x, p.y, p.z]).collect(),
        inertia: i,
        potential: u,
        action: TAU * (0.5 * c * c * i + u),
        masses,
    }
}

/// Equilateral triangle with side `s`, `s^(alpha+2) = alpha / (k+omega)^2`.
pub fn lagrange_solution(masses: &[f64], alpha: f64, k: i64, omega: f64) -> Result<Baseline> {
    if masses.len() != 3 {
        return Err(Error::DimensionMismatch("Lagrange solutions need three bodies".into()));
    }
    let m = validate_masses(3, masses)?;
    let c = frequency(k, omega)?;
    let side = (alpha / (c * c)).powf(1.0 / (alpha + 2.0));
    let pts = lagrange_shape(&m, side, 0.0);
    Ok(finish(BaselineKind::Lagrange, k, omega, alpha, m, side, pts))
}

/// Collinear `xbar = (R, -R, 0)` with body 3 at the center, `m1 = m2`.
pub fn euler_solution(masses: &[f64], alpha: f64, k: i64, omega: f64) -> Result<Baseline> {
    if masses.len() != 3 {
        return Err(Error::DimensionMismatch("Euler solutions need three bodies".into()));
    }
    let m = validate_masses(3, masses)?;
    if (m[0] - m[1]).abs() > 1e-12 {
        return Err(Error::AsymmetricMasses);
    }
    let c = frequency(k, omega)?;
    let beta = c * c / (m[0] * 2f64.powf(-alpha) + 2.0 * m[2]);
    let r = (alpha / (2.0 * beta)).powf(1.0 / (alpha + 2.0));
    let pts = vec![Vec3::new(r, 0.0, 0.0), Vec3::new(-r, 0.0, 0.0), Vec3::zeros()];
    Ok(finish(BaselineKind::Euler, k, omega, alpha, m, r, pts))
}

pub fn baseline(kind: BaselineKind, masses: &[f64], alpha: f64, k: i64, omega: f64) -> Result<Baseline> {
    match kind {
        BaselineKind::Lagrange => lagrange_solution(masses, alpha, k, omega),
        BaselineKind::Euler => euler_solution(masses, alpha, k, omega),
    }
}

const LABELINGS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// Unit-scale shapes to test, one per labeling of the bodies, in the horizontal plane.
fn candidate_shapes(kind: BaselineKind, masses: &[f64]) -> Vec<Vec<Vec3>> {
    let mut out = Vec::new();
    for lab in LABELINGS {
        match kind {
            BaselineKind::Lagrange => {
                let base = lagrange_shape(&[1.0 / 3.0; 3], 1.0, 0.0);
                let mut pts: Vec<Vec3> = (0..3).map(|i| base[lab[i]]).collect();
                let com: Vec3 = pts.iter().zip(masses).map(|(p, m)| p * *m).sum();
                for p in &mut pts {
                    *p -= com;
                }
                out.push(pts);
            }
            BaselineKind::Euler => {
                // lab[2] sits at the center; the outer pair must carry equal masses
                let (a, b, mid) = (lab[0], lab[1], lab[2]);
                if a > b || (masses[a] - masses[b]).abs() > 1e-12 {
                    continue;
                }
                let mut pts = vec![Vec3::zeros(); 3];
                pts[a] = Vec3::x();
                pts[b] = -Vec3::x();
                pts[mid] = Vec3::zeros();
                out.push(pts);
            }
        }
    }
    out
}

fn rotate_z(p: &Vec3, th: f64) -> Vec3 {
    let (s, c) = th.sin_cos();
    Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
}

/// Whether the loop is fixed by every generator, tested on a 64-point grid.
fn equivariant_on_grid(group: &SymmetryGroup, x: &FourierLoop) -> bool {
    group.generators().iter().all(|g| {
        let y = match x.act(g) {
            Ok(y) => y,
            Err(_) => return false,
        };
        (0..64).all(|j| {
            let t = TAU * j as f64 / 64.0;
            x.position(t).iter().zip(y.position(t)).all(|(p, q)| (p - q).norm() < 1e-10)
        })
    })
}

fn preferred_axes(group: &SymmetryGroup) -> Vec<Vec3> {
    let mut axes = Vec::new();
    if group.is_rotation_axis(&Vec3::z()) {
        axes.push(Vec3::z());
    }
    for a in group.rotation_axes() {
        if !axes.iter().any(|b: &Vec3| b.cross(&a).norm() < 1e-9) {
            axes.push(a);
        }
    }
    axes
}

/// Rotation numbers `k` in `k_range` for which some labeling and phase of the
/// shape gives an equivariant rigidly rotating loop about a rotation axis.
pub fn admissible_rotation_numbers(
    group: &SymmetryGroup,
    kind: BaselineKind,
    k_range: RangeInclusive<i64>,
) -> Result<Vec<i64>> {
    if group.n() != 3 {
        return Err(Error::IncompatibleShape("central configurations need three bodies".into()));
    }
    let masses = group.masses_or_equal();
    let shapes = candidate_shapes(kind, &masses);
    if shapes.is_empty() {
        return Err(Error::IncompatibleShape(format!("no labeling of the {kind:?} shape fits the masses")));
    }
    let axes = preferred_axes(group);
    let mut out = Vec::new();
    for k in k_range {
        let order = k.unsigned_abs() as usize;
        let ok = axes.iter().any(|axis| {
            shapes.iter().any(|shape| {
                (0..24).any(|j| {
                    let th = PI * j as f64 / 12.0;
                    let pts: Vec<Vec3> = shape.iter().map(|p| rotate_z(p, th)).collect();
                    rotating_loop(&pts, k, order, axis).is_ok_and(|x| equivariant_on_grid(group, &x))
                })
            })
        });
        if ok {
            out.push(k);
        }
    }
    Ok(out)
}

/// Equivariant baseline: the admissible rotation number with least action,
/// positioned as an equivariant loop about the group's preferred axis.
#[derive(Clone, Debug)]
pub struct EquivariantBaseline {
    pub baseline: Baseline,
    pub axis: Vec3,
    pub config: Vec<Vec3>,
}

impl EquivariantBaseline {
    pub fn to_loop(&self, order: usize) -> Result<FourierLoop> {
        rotating_loop(&self.config, self.baseline.k, order, &self.axis)
    }
}

/// Cheapest equivariant rotating `kind` solution at speed `omega`, searching
/// rotation numbers within `|k + omega| <= window`.
pub fn best_equivariant_baseline(
    group: &SymmetryGroup,
    kind: BaselineKind,
    alpha: f64,
    omega: f64,
    window: i64,
) -> Result<EquivariantBaseline> {
    let masses = group.masses_or_equal();
    let centre = (-omega).round() as i64;
    let mut ks = admissible_rotation_numbers(group, kind, (centre - window)..=(centre + window))?;
    ks.retain(|&k| (k as f64 + omega).abs() > 1e-14);
    ks.sort_by(|a, b| (*a as f64 + omega).abs().total_cmp(&(*b as f64 + omega).abs()).then(a.cmp(b)));
    let &k = ks.first().ok_or_else(|| Error::IncompatibleShape("no admissible rotation number".into()))?;
    let b = baseline(kind, &masses, alpha, k, omega)?;
    let order = k.unsigned_abs() as usize;
    for axis in preferred_axes(group) {
        for lab_shape in candidate_shapes(kind, &masses) {
            for j in 0..24 {
                let th = PI * j as f64 / 12.0;
                let unit: Vec<Vec3> = lab_shape.iter().map(|p| rotate_z(p, th)).collect();
                let x = rotating_loop(&unit, k, order, &axis)?;
                if equivariant_on_grid(group, &x) {
                    let scale = b.scale / unit_scale(kind, &unit);
                    let config = unit.iter().map(|p| p * scale).collect();
                    return Ok(EquivariantBaseline { baseline: b, axis, config });
                }
            }
        }
    }
    Err(Error::IncompatibleShape("admissible rotation number without an equivariant placement".into()))
}

fn unit_scale(kind: BaselineKind, pts: &[Vec3]) -> f64 {
    match kind {
        BaselineKind::Lagrange => (pts[0] - pts[1]).norm(),
        BaselineKind::Euler => pts.iter().map(|p| p.norm()).fold(0.0, f64::max),
    }
}

/// True iff some admissible `k` minimizes `|k + omega|` over the integers and that minimum is nonzero.
pub fn gordon_predicate(group: &SymmetryGroup, omega: f64) -> Result<bool> {
    let lo = (-omega).floor() as i64;
    let best = ((lo as f64 + omega).abs()).min((lo as f64 + 1.0 + omega).abs());
    if best < 1e-14 {
        return Ok(false);
    }
    let ks = admissible_rotation_numbers(group, BaselineKind::Lagrange, lo..=lo + 1)?;
    Ok(ks.iter().any(|&k| ((k as f64 + omega).abs() - best).abs() < 1e-12))
}
