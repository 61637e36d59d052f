//! Group elements of `O(T) x O(3) x S_n`, finite group generation, and the
//! decision procedures (core, action type, rotation axes, coercivity,
//! collision-forcing, homographic cores) used to screen symmetry groups.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Mat3, Result, Vec3};

/// Absolute tolerance for comparing matrices and singular values.
pub const GROUP_TOL: f64 = 1e-9;

/// Default cap on the number of elements produced by [`SymmetryGroup::generate`].
pub const DEFAULT_CAP: usize = 1024;

fn wrap_angle(s: f64) -> f64 {
    let r = s.rem_euclid(TAU);
    if TAU - r < 1e-12 {
        0.0
    } else {
        r
    }
}

fn angle_close(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d) < GROUP_TOL
}

/// An isometry of the time circle: `t -> orientation * t + shift (mod 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeTransform {
    pub shift: f64,
    pub orientation: i8,
}

impl TimeTransform {
    pub fn identity() -> Self {
        Self { shift: 0.0, orientation: 1 }
    }

    /// Time shift `t -> t + shift`.
    pub fn shift(shift: f64) -> Self {
        Self { shift: wrap_angle(shift), orientation: 1 }
    }

    /// Time reflection `t -> -t + shift`.
    pub fn reflection(shift: f64) -> Self {
        Self { shift: wrap_angle(shift), orientation: -1 }
    }

    pub fn new(shift: f64, orientation: i8) -> Result<Self> {
        if orientation != 1 && orientation != -1 {
            return Err(Error::InvalidInput(format!("time orientation must be +1 or -1, got {orientation}")));
        }
        if !shift.is_finite() {
            return Err(Error::InvalidInput("non-finite time shift".into()));
        }
        Ok(Self { shift: wrap_angle(shift), orientation })
    }

    pub fn apply(&self, t: f64) -> f64 {
        wrap_angle(self.orientation as f64 * t + self.shift)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            shift: wrap_angle(self.orientation as f64 * other.shift + self.shift),
            orientation: self.orientation * other.orientation,
        }
    }

    pub fn inverse(&self) -> Self {
        Self { shift: wrap_angle(-(self.orientation as f64) * self.shift), orientation: self.orientation }
    }

    pub fn is_identity(&self) -> bool {
        self.orientation == 1 && angle_close(self.shift, 0.0)
    }

    pub fn is_reflection(&self) -> bool {
        self.orientation == -1
    }

    /// Whether some `t` is fixed (identity or reflection).
    pub fn has_fixed_point(&self) -> bool {
        self.is_reflection() || self.is_identity()
    }

    /// The two fixed points of a reflection, `shift/2` and `shift/2 + pi`.
    pub fn fixed_points(&self) -> Option<[f64; 2]> {
        self.is_reflection().then(|| [wrap_angle(self.shift / 2.0), wrap_angle(self.shift / 2.0 + PI)])
    }

    pub fn det(&self) -> f64 {
        self.orientation as f64
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.orientation == other.orientation && angle_close(self.shift, other.shift)
    }
}

/// A permutation of `{0, .., n-1}` stored as its image list.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm(Vec<usize>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n).collect())
    }

    /// Builds from 0-based images, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return Err(Error::InvalidInput(format!("not a permutation: {images:?}")));
            }
            seen[i] = true;
        }
        Ok(Perm(images))
    }

    /// Builds from 1-based images, the convention of group spec files.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.iter().any(|&i| i == 0) {
            return Err(Error::InvalidInput("permutation images are 1-based".into()));
        }
        Self::from_images(images.iter().map(|i| i - 1).collect())
    }

    /// Builds from 1-based cycles, e.g. `&[&[1, 2, 3]]`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (pos, &i) in cycle.iter().enumerate() {
                let j = cycle[(pos + 1) % cycle.len()];
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(Error::InvalidInput(format!("bad cycle {cycle:?}")));
                }
                images[i - 1] = j - 1;
            }
        }
        Self::from_images(images)
    }

    /// Parses cycle notation such as `"(1,2,3)"`, `"(1,2)(3,4)"` or `"()"`.
    pub fn parse(n: usize, s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut cycles: Vec<Vec<usize>> = Vec::new();
        for part in s.split(')') {
            let part = part.trim_start_matches('(');
            if part.is_empty() {
                continue;
            }
            let cycle = part
                .split(',')
                .map(|x| x.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidInput(format!("bad cycle notation {s:?}")))?;
            cycles.push(cycle);
        }
        let refs: Vec<&[usize]> = cycles.iter().map(|c| c.as_slice()).collect();
        Self::from_cycles(n, &refs)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        Perm(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn order(&self) -> usize {
        let mut p = self.clone();
        let mut k = 1;
        while !p.is_identity() {
            p = self.compose(&p);
            k += 1;
        }
        k
    }

    pub fn is_transposition(&self) -> bool {
        self.0.iter().enumerate().filter(|(i, j)| i != *j).count() == 2
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] || self.0[start] == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut j = self.0[start];
            while j != start {
                seen[j] = true;
                cycle.push(j);
                j = self.0[j];
            }
            out.push(cycle);
        }
        out
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let items: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", items.join(","))?;
        }
        Ok(())
    }
}

/// One symmetry `(tau, rho, sigma)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub time: TimeTransform,
    pub space: Mat3,
    pub perm: Perm,
}

impl GroupElement {
    pub fn new(time: TimeTransform, space: Mat3, perm: Perm) -> Result<Self> {
        let residual = (space * space.transpose() - Mat3::identity()).abs().max();
        if !(residual <= GROUP_TOL) {
            return Err(Error::InvalidInput(format!("space matrix is not orthogonal (residual {residual:e})")));
        }
        Ok(Self { time, space, perm })
    }

    pub fn identity(n: usize) -> Self {
        Self { time: TimeTransform::identity(), space: Mat3::identity(), perm: Perm::identity(n) }
    }

    /// Shorthand for a diagonal space part.
    pub fn diagonal(time: TimeTransform, signs: [f64; 3], perm: Perm) -> Self {
        Self { time, space: Mat3::from_diagonal(&Vec3::from(signs)), perm }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            time: self.time.compose(&other.time),
            space: self.space * other.space,
            perm: self.perm.compose(&other.perm),
        }
    }

    pub fn inverse(&self) -> Self {
        Self { time: self.time.inverse(), space: self.space.transpose(), perm: self.perm.inverse() }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.perm == other.perm
            && self.time.approx_eq(&other.time)
            && (self.space - other.space).abs().max() < GROUP_TOL
    }

    pub fn is_identity(&self) -> bool {
        self.time.is_identity() && self.perm.is_identity() && (self.space - Mat3::identity()).abs().max() < GROUP_TOL
    }

    pub fn det_space(&self) -> f64 {
        self.space.determinant().signum()
    }

    /// `det(tau(g)) det(rho(g))`, the character a rotation axis must carry.
    pub fn axis_character(&self) -> f64 {
        self.time.det() * self.det_space()
    }
}

/// A finite subgroup of `O(T) x O(3) x S_n`, with optional (normalized) masses.
#[derive(Clone, Debug)]
pub struct SymmetryGroup {
    n: usize,
    generators: Vec<GroupElement>,
    elements: Vec<GroupElement>,
    masses: Option<Vec<f64>>,
}

impl SymmetryGroup {
    /// Closes the generator set under composition, failing above `cap` elements.
    pub fn generate(n: usize, generators: Vec<GroupElement>, cap: usize) -> Result<Self> {
        if cap == 0 {
            return Err(Error::InvalidInput("cap must be at least 1".into()));
        }
        for g in &generators {
            if g.perm.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "generator permutes {} indices, group has n = {n}",
                    g.perm.len()
                )));
            }
        }
        let mut elements = vec![GroupElement::identity(n)];
        let mut frontier = 0;
        while frontier < elements.len() {
            let e = elements[frontier].clone();
            frontier += 1;
            for g in &generators {
                let p = g.compose(&e);
                if !elements.iter().any(|x| x.approx_eq(&p)) {
                    if elements.len() >= cap {
                        return Err(Error::CapExceeded { cap });
                    }
                    elements.push(p);
                }
            }
        }
        Ok(Self { n, generators, elements, masses: None })
    }

    /// Attaches masses (normalized to sum 1); they must be constant on sigma-orbits.
    pub fn with_masses(mut self, masses: &[f64]) -> Result<Self> {
        self.masses = Some(validate_masses(self.n, masses)?);
        for g in &self.elements {
            let m = self.masses.as_ref().unwrap();
            for i in 0..self.n {
                if (m[i] - m[g.perm.image(i)]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "masses must be constant on orbits of the index action (body {})",
                        i + 1
                    )));
                }
            }
        }
        Ok(self)
    }

    pub fn with_equal_masses(self) -> Result<Self> {
        let m = vec![1.0; self.n];
        self.with_masses(&m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn masses(&self) -> Option<&[f64]> {
        self.masses.as_deref()
    }

    pub fn masses_or_equal(&self) -> Vec<f64> {
        self.masses.clone().unwrap_or_else(|| vec![1.0 / self.n as f64; self.n])
    }

    fn require_masses(&self) -> Result<&[f64]> {
        self.masses.as_deref().ok_or(Error::MissingMasses)
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.elements.iter().any(|x| x.approx_eq(g))
    }

    /// Elements acting trivially on time (`ker tau`).
    pub fn core(&self) -> Vec<&GroupElement> {
        self.elements.iter().filter(|g| g.time.is_identity()).collect()
    }

    pub fn core_order(&self) -> usize {
        self.core().len()
    }

    pub fn action_type(&self) -> ActionType {
        let reflections = self.elements.iter().any(|g| g.time.is_reflection());
        if !reflections {
            ActionType::Cyclic
        } else if self.order() / self.core_order() == 2 {
            ActionType::Brake
        } else {
            ActionType::Dihedral
        }
    }

    /// Number of distinct time shifts, i.e. the order of the time-rotation part.
    pub fn time_order(&self) -> usize {
        let mut shifts: Vec<f64> = Vec::new();
        for g in self.elements.iter().filter(|g| g.time.orientation == 1) {
            if !shifts.iter().any(|&s| angle_close(s, g.time.shift)) {
                shifts.push(g.time.shift);
            }
        }
        shifts.len()
    }

    pub fn is_transitive(&self) -> bool {
        let mut reached = vec![false; self.n];
        reached[0] = true;
        for g in &self.elements {
            reached[g.perm.image(0)] = true;
        }
        reached.iter().all(|&r| r)
    }

    /// Orthonormal basis of `E*`, the subspace fixed by `g -> det(tau) det(rho) rho`.
    pub fn estar_basis(&self) -> Vec<Vec3> {
        let mut p = Mat3::zeros();
        for g in &self.elements {
            p += g.space * g.axis_character();
        }
        p /= self.order() as f64;
        fixed_space_basis(&p)
    }

    /// Whether the line spanned by `v` is a rotation axis.
    pub fn is_rotation_axis(&self, v: &Vec3) -> bool {
        let norm = v.norm();
        if norm < GROUP_TOL {
            return false;
        }
        let u = v / norm;
        self.elements.iter().all(|g| (g.space * u - u * g.axis_character()).norm() < 1e-8)
    }

    /// Rotation axes, reported up to sign. A whole plane or space of axes is
    /// reported by canonical basis vectors where possible.
    pub fn rotation_axes(&self) -> Vec<Vec3> {
        self.estar_basis()
    }

    /// Dimension of the centered configurations fixed by every element.
    pub fn fixed_config_dim(&self) -> Result<usize> {
        let masses = self.require_masses()?;
        let all: Vec<&GroupElement> = self.elements.iter().collect();
        Ok(rank(&fixed_config_projector(self.n, masses, &all)))
    }

    /// Sufficient test for "every equivariant loop collides": some time `t0` has
    /// an isotropy subgroup whose fixed centered configurations all have two
    /// bodies coinciding.
    pub fn is_bound_to_collisions(&self) -> bool {
        let masses = self.masses_or_equal();
        let mut isotropies: Vec<Vec<&GroupElement>> = vec![self.core()];
        for g in self.elements.iter().filter(|g| g.time.is_reflection()) {
            for t0 in g.time.fixed_points().unwrap() {
                let h: Vec<&GroupElement> =
                    self.elements.iter().filter(|x| angle_close(x.time.apply(t0), t0)).collect();
                isotropies.push(h);
            }
        }
        isotropies.iter().any(|h| {
            if h.len() <= 1 {
                return false;
            }
            let p = fixed_config_projector(self.n, &masses, h);
            forces_collision(self.n, &p)
        })
    }

    /// Criterion-based full uncoercivity: no axes with nonzero fixed
    /// configurations, or uncoercive axis module under an intransitive index action.
    pub fn is_fully_uncoercive(&self) -> Result<bool> {
        let masses = self.require_masses()?.to_vec();
        let axes = self.rotation_axes();
        if axes.is_empty() {
            return Ok(self.fixed_config_dim()? > 0);
        }
        if self.is_transitive() {
            return Ok(false);
        }
        Ok(self.axis_module_dim(&masses) > 0)
    }

    /// Fixed centered vectors `u` in `R^n` with `(g u)_i = chi(g) u_{sigma^-1 i}`,
    /// where `chi = det(tau) det(rho)` is the action of `rho` on any rotation axis.
    fn axis_module_dim(&self, masses: &[f64]) -> usize {
        let n = self.n;
        let mut p = DMatrix::<f64>::zeros(n, n);
        for g in &self.elements {
            let chi = g.axis_character();
            for j in 0..n {
                p[(g.perm.image(j), j)] += chi;
            }
        }
        p /= self.order() as f64;
        let c = centering(masses);
        rank(&(p * c))
    }

    pub fn core_kind(&self) -> CoreKind {
        classify_core(&self.core())
    }

    /// Homographic cores: antipodal binary, rotating triangle, or triangle with reflection.
    pub fn is_homographic(&self) -> Result<bool> {
        if self.is_bound_to_collisions() {
            return Err(Error::PreconditionViolated("is_homographic called on a group bound to collisions".into()));
        }
        Ok(self.core_kind().is_homographic())
    }

    pub fn is_vertical_isosceles(&self) -> bool {
        self.core_kind() == CoreKind::VerticalIsosceles
    }

    pub fn profile(&self) -> GroupProfile {
        let with_masses = if self.masses.is_some() {
            self.clone()
        } else {
            self.clone().with_equal_masses().expect("equal masses are orbit-constant")
        };
        let axes = self.rotation_axes();
        let bound = self.is_bound_to_collisions();
        let fixed = with_masses.fixed_config_dim().expect("masses present");
        let fully_uncoercive = with_masses.is_fully_uncoercive().expect("masses present");
        let kind = self.core_kind();
        GroupProfile {
            order: self.order(),
            core_order: self.core_order(),
            action_type: self.action_type(),
            type_r: !axes.is_empty(),
            rotation_axes: axes.iter().map(|v| [v.x, v.y, v.z]).collect(),
            fixed_config_dim: fixed,
            bound_to_collisions: bound,
            fully_uncoercive,
            homographic: !bound && kind.is_homographic(),
            vertical_isosceles: kind == CoreKind::VerticalIsosceles,
        }
    }
}

pub(crate) fn validate_masses(n: usize, masses: &[f64]) -> Result<Vec<f64>> {
    if masses.len() != n {
        return Err(Error::DimensionMismatch(format!("{} masses for {n} bodies", masses.len())));
    }
    if masses.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
        return Err(Error::InvalidInput("masses must be positive and finite".into()));
    }
    let total: f64 = masses.iter().sum();
    Ok(masses.iter().map(|m| m / total).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionType {
    Cyclic,
    Brake,
    Dihedral,
}

/// The possible actions of a nontrivial core on a three-body configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoreKind {
    Trivial,
    /// `<(-1, (1,2))>`: antipodal binary with the third mass at the origin.
    AntipodalBinary,
    /// `<(r_2, (1,2))>`, rotation by pi about an axis.
    VerticalIsosceles,
    /// `<(r_3, (1,2,3))>`.
    RotatingTriangle,
    /// `<(r_3, (1,2,3)), (h_2, (1,2))>`.
    ReflectedTriangle,
    Other,
}

impl CoreKind {
    pub fn is_homographic(self) -> bool {
        matches!(self, Self::AntipodalBinary | Self::RotatingTriangle | Self::ReflectedTriangle)
    }
}

fn is_half_turn(m: &Mat3) -> bool {
    (m.determinant() - 1.0).abs() < 1e-9 && (m.trace() + 1.0).abs() < 1e-9
}

fn is_third_turn(m: &Mat3) -> bool {
    (m.determinant() - 1.0).abs() < 1e-9 && m.trace().abs() < 1e-9
}

fn classify_core(core: &[&GroupElement]) -> CoreKind {
    match core.len() {
        1 => CoreKind::Trivial,
        2 => {
            let c = core.iter().find(|g| !g.is_identity()).unwrap();
            if !c.perm.is_transposition() {
                CoreKind::Other
            } else if (c.space + Mat3::identity()).abs().max() < GROUP_TOL {
                CoreKind::AntipodalBinary
            } else if is_half_turn(&c.space) {
                CoreKind::VerticalIsosceles
            } else {
                CoreKind::Other
            }
        }
        3 => {
            let ok = core
                .iter()
                .filter(|g| !g.is_identity())
                .all(|g| g.perm.cycles().first().is_some_and(|c| c.len() == 3) && is_third_turn(&g.space));
            if ok {
                CoreKind::RotatingTriangle
            } else {
                CoreKind::Other
            }
        }
        6 => {
            let rot = core.iter().find(|g| g.perm.order() == 3);
            let Some(rot) = rot else { return CoreKind::Other };
            if !is_third_turn(&rot.space) {
                return CoreKind::Other;
            }
            let axis = fixed_space_basis(&((rot.space + rot.space.transpose()) * 0.5));
            let Some(axis) = axis.first().copied() else { return CoreKind::Other };
            let ok = core.iter().filter(|g| g.perm.is_transposition()).all(|g| {
                let image = g.space * axis;
                (g.space * g.space - Mat3::identity()).abs().max() < GROUP_TOL
                    && ((image - axis).norm() < 1e-8 || (image + axis).norm() < 1e-8)
            });
            if ok {
                CoreKind::ReflectedTriangle
            } else {
                CoreKind::Other
            }
        }
        _ => CoreKind::Other,
    }
}

/// Derived flags of a group.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupProfile {
    pub order: usize,
    pub core_order: usize,
    pub action_type: ActionType,
    pub rotation_axes: Vec<[f64; 3]>,
    pub type_r: bool,
    pub fixed_config_dim: usize,
    pub bound_to_collisions: bool,
    pub fully_uncoercive: bool,
    pub homographic: bool,
    pub vertical_isosceles: bool,
}

/// Orthonormal basis of the range of a symmetric projector, preferring
/// canonical basis vectors and a positive leading component.
pub(crate) fn fixed_space_basis(p: &Mat3) -> Vec<Vec3> {
    let canonical: Vec<Vec3> = (0..3)
        .map(|i| {
            let mut e = Vec3::zeros();
            e[i] = 1.0;
            e
        })
        .filter(|e| (p * e - e).norm() < 1e-8)
        .collect();
    let eig = SymmetricEigen::new((p + p.transpose()) * 0.5);
    let dim = eig.eigenvalues.iter().filter(|&&l| l > 0.5).count();
    if canonical.len() >= dim {
        return canonical.into_iter().take(dim).collect();
    }
    let mut basis = canonical;
    for (i, &l) in eig.eigenvalues.iter().enumerate() {
        if basis.len() == dim {
            break;
        }
        if l <= 0.5 {
            continue;
        }
        let mut v: Vec3 = eig.eigenvectors.column(i).into_owned();
        for b in &basis {
            v -= b * b.dot(&v);
        }
        if v.norm() < 1e-6 {
            continue;
        }
        v /= v.norm();
        let lead = v.iter().copied().find(|x| x.abs() > 1e-9).unwrap_or(1.0);
        if lead < 0.0 {
            v = -v;
        }
        for x in v.iter_mut() {
            if x.abs() < 1e-14 {
                *x = 0.0;
            }
        }
        basis.push(v);
    }
    basis
}

/// Orthogonal projector onto `{sum m_i u_i = 0}` in `R^n`.
pub(crate) fn centering(masses: &[f64]) -> DMatrix<f64> {
    let n = masses.len();
    let m = nalgebra::DVector::from_column_slice(masses);
    DMatrix::identity(n, n) - &m * m.transpose() / m.norm_squared()
}

/// Projector onto centered configurations in `R^{3n}` fixed by every element of `h`.
pub(crate) fn fixed_config_projector(n: usize, masses: &[f64], h: &[&GroupElement]) -> DMatrix<f64> {
    let mut p = DMatrix::<f64>::zeros(3 * n, 3 * n);
    for g in h {
        for j in 0..n {
            let i = g.perm.image(j);
            for r in 0..3 {
                for c in 0..3 {
                    p[(3 * i + r, 3 * j + c)] += g.space[(r, c)];
                }
            }
        }
    }
    p /= h.len() as f64;
    let cn = centering(masses);
    let mut c = DMatrix::<f64>::zeros(3 * n, 3 * n);
    for i in 0..n {
        for j in 0..n {
            for r in 0..3 {
                c[(3 * i + r, 3 * j + r)] = cn[(i, j)];
            }
        }
    }
    p * c
}

fn forces_collision(n: usize, p: &DMatrix<f64>) -> bool {
    for i in 0..n {
        for j in (i + 1)..n {
            let mut max = 0.0f64;
            for r in 0..3 {
                for col in 0..3 * n {
                    max = max.max((p[(3 * i + r, col)] - p[(3 * j + r, col)]).abs());
                }
            }
            if max < GROUP_TOL {
                return true;
            }
        }
    }
    false
}

pub(crate) fn rank(m: &DMatrix<f64>) -> usize {
    m.clone().svd(false, false).singular_values.iter().filter(|&&s| s > GROUP_TOL).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c3_minus() -> SymmetryGroup {
        let r = GroupElement::diagonal(
            TimeTransform::shift(PI / 3.0),
            [1.0, 1.0, -1.0],
            Perm::from_cycles(3, &[&[1, 2, 3]]).unwrap(),
        );
        SymmetryGroup::generate(3, vec![r], DEFAULT_CAP).unwrap().with_equal_masses().unwrap()
    }

    #[test]
    fn perm_cycles_and_parse() {
        let p = Perm::parse(3, "(1,2,3)").unwrap();
        assert_eq!(p.images(), &[1, 2, 0]);
        assert_eq!(p.to_string(), "(1,2,3)");
        assert_eq!(p.order(), 3);
        assert!(Perm::parse(3, "()").unwrap().is_identity());
        assert!(Perm::parse(3, "(1,2)").unwrap().is_transposition());
        assert!(Perm::from_one_based(&[2, 2, 1]).is_err());
    }

    #[test]
    fn time_transform_group_law() {
        let a = TimeTransform::shift(1.0);
        let b = TimeTransform::reflection(0.5);
        let t = 0.3;
        assert!((a.compose(&b).apply(t) - a.apply(b.apply(t))).abs() < 1e-12);
        assert!(b.compose(&b.inverse()).is_identity());
        let [p, q] = b.fixed_points().unwrap();
        assert!(angle_close(b.apply(p), p) && angle_close(b.apply(q), q));
    }

    #[test]
    fn non_orthogonal_rejected() {
        let m = Mat3::from_diagonal(&Vec3::new(1.0, 2.0, 1.0));
        assert!(GroupElement::new(TimeTransform::identity(), m, Perm::identity(3)).is_err());
    }

    #[test]
    fn empty_generators_give_trivial_group() {
        let g = SymmetryGroup::generate(3, vec![], 10).unwrap();
        assert_eq!(g.order(), 1);
        let p = g.profile();
        assert_eq!(p.core_order, 1);
        assert_eq!(p.action_type, ActionType::Cyclic);
        assert_eq!(p.rotation_axes.len(), 3);
        assert!(p.type_r);
        assert!(!p.bound_to_collisions);
        assert_eq!(g.with_equal_masses().unwrap().fixed_config_dim().unwrap(), 6);
    }

    #[test]
    fn c3_minus_has_order_six() {
        let g = c3_minus();
        assert_eq!(g.order(), 6);
        let p = g.profile();
        assert_eq!(p.core_order, 1);
        assert_eq!(p.rotation_axes, vec![[0.0, 0.0, 1.0]]);
        assert_eq!(g.fixed_config_dim().unwrap(), 0);
    }

    #[test]
    fn irrational_shift_exceeds_cap() {
        let r = GroupElement::identity(3);
        let r = GroupElement { time: TimeTransform::shift(TAU * 2f64.sqrt() / 2.0), ..r };
        assert!(matches!(SymmetryGroup::generate(3, vec![r], 200), Err(Error::CapExceeded { cap: 200 })));
    }

    #[test]
    fn vertical_isosceles_fixed_dim() {
        let k = GroupElement::diagonal(
            TimeTransform::identity(),
            [-1.0, -1.0, 1.0],
            Perm::from_cycles(3, &[&[1, 2]]).unwrap(),
        );
        let g = SymmetryGroup::generate(3, vec![k], 10).unwrap().with_equal_masses().unwrap();
        assert_eq!(g.fixed_config_dim().unwrap(), 3);
        assert_eq!(g.core_order(), 2);
        assert!(g.is_vertical_isosceles());
        assert!(!g.is_homographic().unwrap());
        assert!(!g.is_bound_to_collisions());
    }

    #[test]
    fn antipodal_core_is_homographic() {
        let k = GroupElement::diagonal(
            TimeTransform::identity(),
            [-1.0, -1.0, -1.0],
            Perm::from_cycles(3, &[&[1, 2]]).unwrap(),
        );
        let g = SymmetryGroup::generate(3, vec![k], 10).unwrap();
        assert!(g.is_homographic().unwrap());
    }

    #[test]
    fn rotating_triangle_cores_are_homographic() {
        let (c, s) = ((TAU / 3.0).cos(), (TAU / 3.0).sin());
        let r3 = Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0);
        let k = GroupElement::new(TimeTransform::identity(), r3, Perm::from_cycles(3, &[&[1, 2, 3]]).unwrap()).unwrap();
        let g = SymmetryGroup::generate(3, vec![k.clone()], 10).unwrap();
        assert_eq!(g.core_kind(), CoreKind::RotatingTriangle);
        let h = GroupElement::diagonal(
            TimeTransform::identity(),
            [1.0, -1.0, 1.0],
            Perm::from_cycles(3, &[&[1, 2]]).unwrap(),
        );
        let g = SymmetryGroup::generate(3, vec![k, h], 20).unwrap();
        assert_eq!(g.order(), 6);
        assert_eq!(g.core_kind(), CoreKind::ReflectedTriangle);
        assert!(g.is_homographic().unwrap());
    }

    #[test]
    fn trivial_core_not_homographic() {
        assert!(!c3_minus().is_homographic().unwrap());
    }

    #[test]
    fn collision_element_detected() {
        let h = GroupElement::diagonal(
            TimeTransform::reflection(0.0),
            [1.0, 1.0, 1.0],
            Perm::from_cycles(3, &[&[1, 2]]).unwrap(),
        );
        let g = SymmetryGroup::generate(3, vec![h], 10).unwrap();
        assert!(g.is_bound_to_collisions());
        assert!(matches!(g.is_homographic(), Err(Error::PreconditionViolated(_))));
        assert!(!SymmetryGroup::generate(3, vec![], 10).unwrap().is_bound_to_collisions());
    }

    #[test]
    fn masses_must_respect_orbits() {
        let g = c3_minus();
        assert!(g.clone().with_masses(&[1.0, 2.0, 1.0]).is_err());
        let m = g.with_masses(&[2.0, 2.0, 2.0]).unwrap();
        assert!((m.masses().unwrap().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        let plain = SymmetryGroup::generate(3, vec![], 1).unwrap();
        assert!(matches!(plain.fixed_config_dim(), Err(Error::MissingMasses)));
    }
}
