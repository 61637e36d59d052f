//! Enumeration of three-body space symmetry groups by sign matrices, their
//! reduction to representatives, and the named catalog.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::baselines::{admissible_rotation_numbers, BaselineKind};
use crate::symmetry::{GroupElement, GroupProfile, Perm, SymmetryGroup, TimeTransform, DEFAULT_CAP};
use crate::{Error, Mat3, Result};

/// Rows `(r_V^i, h_V^i)` of diagonal sign pairs, one per coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignMatrix {
    pub rows: [[i8; 2]; 3],
}

fn digit(row: [i8; 2]) -> u8 {
    match row {
        [1, 1] => 0,
        [1, -1] => 1,
        [-1, 1] => 2,
        _ => 3,
    }
}

fn row_of(d: u8) -> [i8; 2] {
    match d {
        0 => [1, 1],
        1 => [1, -1],
        2 => [-1, 1],
        _ => [-1, -1],
    }
}

impl SignMatrix {
    pub fn new(rows: [[i8; 2]; 3]) -> Result<Self> {
        if rows.iter().flatten().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidInput(format!("sign matrix entries must be +-1: {rows:?}")));
        }
        Ok(Self { rows })
    }

    /// Parses a three-digit code; row `i` gets digit `i`.
    pub fn from_code(code: &str) -> Result<Self> {
        let digits: Vec<u8> = code.bytes().map(|b| b.wrapping_sub(b'0')).collect();
        if digits.len() != 3 || digits.iter().any(|&d| d > 3) {
            return Err(Error::InvalidInput(format!("sign code must be three digits in 0..=3, got {code:?}")));
        }
        Ok(Self { rows: [row_of(digits[0]), row_of(digits[1]), row_of(digits[2])] })
    }

    /// Sorted digit string under `0=[++], 1=[+-], 2=[-+], 3=[--]`.
    pub fn code(&self) -> String {
        let mut d: Vec<u8> = self.rows.iter().map(|&r| digit(r)).collect();
        d.sort_unstable();
        d.iter().map(|d| char::from(b'0' + d)).collect()
    }

    /// Same multiset with rows in sorted digit order.
    pub fn sorted(&self) -> Self {
        Self::from_code(&self.code()).unwrap()
    }

    pub fn r_diag(&self) -> [f64; 3] {
        self.rows.map(|r| r[0] as f64)
    }

    pub fn h_diag(&self) -> [f64; 3] {
        self.rows.map(|r| r[1] as f64)
    }

    /// The matrix obtained by using `rh` in place of `h`.
    pub fn rh_partner(&self) -> Self {
        Self { rows: self.rows.map(|[r, h]| [r, r * h]) }
    }

    /// Smaller of the code and the code of the `rh` partner.
    pub fn canonical_code(&self) -> String {
        self.code().min(self.rh_partner().code())
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.code())
    }
}

/// All multisets of three rows: 20 matrices.
pub fn canonical_sign_matrices() -> Vec<SignMatrix> {
    let mut out = Vec::new();
    for a in 0..4u8 {
        for b in a..4 {
            for c in b..4 {
                out.push(SignMatrix { rows: [row_of(a), row_of(b), row_of(c)] });
            }
        }
    }
    out
}

/// Index actions `[r_Sigma, h_Sigma]` of the two generators of a dihedral-type group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SigmaPair {
    CycleTransposition,
    IdentityTransposition,
    TranspositionIdentity,
    TranspositionTransposition,
    IdentityIdentity,
}

impl SigmaPair {
    pub const ALL: [SigmaPair; 5] = [
        SigmaPair::CycleTransposition,
        SigmaPair::IdentityTransposition,
        SigmaPair::TranspositionIdentity,
        SigmaPair::TranspositionTransposition,
        SigmaPair::IdentityIdentity,
    ];

    /// The pairs enumerated independently; `[(1,2),()]` is a coordinate change of `[(1,2),(1,2)]`.
    pub const ENUMERATED: [SigmaPair; 4] = [
        SigmaPair::CycleTransposition,
        SigmaPair::IdentityTransposition,
        SigmaPair::TranspositionTransposition,
        SigmaPair::IdentityIdentity,
    ];

    fn cycles(self) -> (&'static str, &'static str) {
        match self {
            Self::CycleTransposition => ("(1,2,3)", "(1,2)"),
            Self::IdentityTransposition => ("()", "(1,2)"),
            Self::TranspositionIdentity => ("(1,2)", "()"),
            Self::TranspositionTransposition => ("(1,2)", "(1,2)"),
            Self::IdentityIdentity => ("()", "()"),
        }
    }

    pub fn r_sigma(self) -> Perm {
        Perm::parse(3, self.cycles().0).unwrap()
    }

    pub fn h_sigma(self) -> Perm {
        Perm::parse(3, self.cycles().1).unwrap()
    }

    /// Whether `rh` has the same index action as `h` up to relabeling, so the
    /// `rh` partner of a sign matrix describes the same group.
    pub fn allows_rh(self) -> bool {
        let rh = self.r_sigma().compose(&self.h_sigma());
        rh.is_identity() == self.h_sigma().is_identity()
    }

    /// Parses `"(1,2,3),(1,2)"`, with or without surrounding brackets.
    pub fn parse(s: &str) -> Result<Self> {
        let s: String = s.chars().filter(|c| !c.is_whitespace() && *c != '[' && *c != ']').collect();
        let split = s.find("),").ok_or_else(|| Error::InvalidInput(format!("bad sigma pair {s:?}")))?;
        let (r, h) = (&s[..=split], &s[split + 2..]);
        let (r, h) = (Perm::parse(3, r)?, Perm::parse(3, h)?);
        Self::ALL
            .into_iter()
            .find(|p| p.r_sigma() == r && p.h_sigma() == h)
            .ok_or_else(|| Error::InvalidInput(format!("unsupported sigma pair {s:?}")))
    }
}

impl fmt::Display for SigmaPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, h) = self.cycles();
        write!(f, "[{r},{h}]")
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

fn diag_order(d: &[f64; 3]) -> usize {
    if d.iter().all(|&x| x > 0.0) {
        1
    } else {
        2
    }
}

/// `r = (t + 2pi/ord, r_V, r_Sigma)` with `ord` the order of `(r_V, r_Sigma)`;
/// `None` when `r` would be trivial.
fn rotation_generator(r_v: [f64; 3], r_sigma: Perm) -> Option<GroupElement> {
    let ord = lcm(diag_order(&r_v), r_sigma.order());
    (ord > 1).then(|| GroupElement::diagonal(TimeTransform::shift(TAU / ord as f64), r_v, r_sigma))
}

pub fn dihedral_group(sm: &SignMatrix, pair: SigmaPair) -> SymmetryGroup {
    let mut gens = Vec::new();
    gens.extend(rotation_generator(sm.r_diag(), pair.r_sigma()));
    gens.push(GroupElement::diagonal(TimeTransform::reflection(0.0), sm.h_diag(), pair.h_sigma()));
    SymmetryGroup::generate(3, gens, DEFAULT_CAP).expect("sign-matrix groups are finite")
}

/// A cyclic-type candidate `(r_V, r_Sigma)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicCandidate {
    /// Number of `-1` entries of `r_V = diag(+..+, -..-)`.
    pub minus_count: usize,
    pub r_sigma: Perm,
}

impl CyclicCandidate {
    pub fn r_v(&self) -> [f64; 3] {
        let mut d = [1.0; 3];
        for x in d.iter_mut().skip(3 - self.minus_count) {
            *x = -1.0;
        }
        d
    }

    pub fn r_v_label(&self) -> String {
        self.r_v().iter().map(|&x| if x > 0.0 { '+' } else { '-' }).collect::<String>()
    }

    pub fn group(&self) -> SymmetryGroup {
        let gens: Vec<GroupElement> = rotation_generator(self.r_v(), self.r_sigma.clone()).into_iter().collect();
        SymmetryGroup::generate(3, gens, DEFAULT_CAP).expect("cyclic candidates are finite")
    }
}

pub fn cyclic_candidates() -> Vec<CyclicCandidate> {
    let mut out = Vec::new();
    for minus_count in 0..4 {
        for s in ["()", "(1,2)", "(1,2,3)"] {
            out.push(CyclicCandidate { minus_count, r_sigma: Perm::parse(3, s).unwrap() });
        }
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct Candidates {
    pub dihedral: Vec<(SignMatrix, SigmaPair)>,
    pub cyclic: Vec<CyclicCandidate>,
}

/// All 20 sign matrices crossed with the five sigma pairs, plus the 12 cyclic candidates.
pub fn enumerate_candidates() -> Candidates {
    let mut dihedral = Vec::new();
    for pair in SigmaPair::ALL {
        for sm in canonical_sign_matrices() {
            dihedral.push((sm, pair));
        }
    }
    Candidates { dihedral, cyclic: cyclic_candidates() }
}

/// Rotating-frame identifications of sign codes.
pub const FRAME_EQUIVALENT_CODES: [(&str, &str); 4] = [("023", "001"), ("123", "011"), ("223", "012"), ("233", "013")];

/// Rotating-frame identifications of cyclic candidates, `(r_V minus count, r_Sigma)`.
pub const FRAME_EQUIVALENT_CYCLIC: [((usize, &str), (usize, &str)); 4] = [
    ((2, "(1,2,3)"), (0, "(1,2,3)")),
    ((3, "()"), (1, "()")),
    ((3, "(1,2)"), (1, "(1,2)")),
    ((3, "(1,2,3)"), (1, "(1,2,3)")),
];

/// Named pairs of groups related by conjugacy (`true`) or by a change of rotating frame (`false`).
pub const NAMED_EQUIVALENCES: [(&str, &str, bool); 3] =
    [("C6+", "C3-", true), ("C6-", "C3+", false), ("D12-eight", "D12-+", true)];

fn frame_representative(code: &str) -> String {
    FRAME_EQUIVALENT_CODES.iter().find(|(a, _)| *a == code).map_or(code, |(_, b)| b).to_string()
}

fn cyclic_representative(c: &CyclicCandidate) -> CyclicCandidate {
    let key = (c.minus_count, c.r_sigma.to_string());
    FRAME_EQUIVALENT_CYCLIC
        .iter()
        .find(|((m, s), _)| (*m, s.to_string()) == key)
        .map_or(c.clone(), |(_, (m, s))| CyclicCandidate { minus_count: *m, r_sigma: Perm::parse(3, s).unwrap() })
}

/// A group surviving the reduction.
#[derive(Clone, Debug, Serialize)]
pub struct ReducedEntry {
    pub name: String,
    pub digit_code: Option<String>,
    pub sigma_pair: String,
    pub order: usize,
    pub axes: Vec<[f64; 3]>,
    pub flags: GroupProfile,
    #[serde(skip)]
    pub group: SymmetryGroup,
    #[serde(skip)]
    pub key: ReducedKey,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ReducedKey {
    Dihedral(SigmaPair, String),
    Cyclic(CyclicCandidate),
    Core(String),
}

fn equal_mass(group: SymmetryGroup) -> SymmetryGroup {
    group.with_equal_masses().expect("equal masses are orbit-constant")
}

fn fully_uncoercive(group: &SymmetryGroup) -> bool {
    equal_mass(group.clone()).is_fully_uncoercive().expect("masses set")
}

/// Survivors of the reduction for a candidate list, before naming.
pub fn reduce_keys(candidates: &Candidates) -> Vec<ReducedKey> {
    let mut out = BTreeSet::new();
    let mut pairs: BTreeMap<SigmaPair, BTreeSet<String>> = BTreeMap::new();
    for (sm, pair) in &candidates.dihedral {
        // the [(1,2),()] case is the [(1,2),(1,2)] case in other coordinates
        let pair =
            if *pair == SigmaPair::TranspositionIdentity { SigmaPair::TranspositionTransposition } else { *pair };
        let sm = sm.sorted();
        if dihedral_group(&sm, pair).is_bound_to_collisions() {
            continue;
        }
        let code = if pair.allows_rh() { sm.canonical_code() } else { sm.code() };
        pairs.entry(pair).or_default().insert(code);
    }
    for (pair, codes) in pairs {
        let reps: BTreeSet<String> = codes.iter().map(|c| frame_representative(c)).collect();
        for code in reps {
            let group = dihedral_group(&SignMatrix::from_code(&code).unwrap(), pair);
            if !group.is_bound_to_collisions() && !fully_uncoercive(&group) {
                out.insert(ReducedKey::Dihedral(pair, code));
            }
        }
    }
    let cyclic: BTreeSet<CyclicCandidate> =
        candidates.cyclic.iter().filter(|c| !c.group().is_bound_to_collisions()).map(cyclic_representative).collect();
    for c in cyclic {
        let group = c.group();
        if !group.is_bound_to_collisions() && !fully_uncoercive(&group) {
            out.insert(ReducedKey::Cyclic(c));
        }
    }
    out.into_iter().collect()
}

impl ReducedKey {
    pub fn group(&self) -> SymmetryGroup {
        match self {
            Self::Dihedral(pair, code) => dihedral_group(&SignMatrix::from_code(code).unwrap(), *pair),
            Self::Cyclic(c) => c.group(),
            Self::Core(name) => catalog_group(name).expect("core keys come from the catalog"),
        }
    }

    pub fn sigma_pair(&self) -> String {
        match self {
            Self::Dihedral(pair, _) => pair.to_string(),
            Self::Cyclic(c) => format!("[{}]", c.r_sigma),
            Self::Core(_) => String::new(),
        }
    }

    pub fn digit_code(&self) -> Option<String> {
        match self {
            Self::Dihedral(_, code) => Some(code.clone()),
            _ => None,
        }
    }
}

/// Key of a catalog group, recovered from its generators.
fn key_of_generators(group: &SymmetryGroup) -> Option<ReducedKey> {
    let gens = group.generators();
    let diag = |g: &GroupElement| -> Option<[f64; 3]> {
        let m = g.space;
        let is_diag = (m - Mat3::from_diagonal(&m.diagonal())).abs().max() < 1e-12;
        (is_diag && m.diagonal().iter().all(|x| (x.abs() - 1.0).abs() < 1e-12)).then_some([
            m[(0, 0)],
            m[(1, 1)],
            m[(2, 2)],
        ])
    };
    let r = gens.iter().find(|g| g.time.orientation == 1);
    let h = gens.iter().find(|g| g.time.orientation == -1);
    let (r_v, r_sigma) = match r {
        Some(r) => (diag(r)?, r.perm.clone()),
        None => ([1.0; 3], Perm::identity(3)),
    };
    if let Some(r) = r {
        let expected = rotation_generator(r_v, r_sigma.clone())?;
        if !expected.time.approx_eq(&r.time) {
            return None;
        }
    }
    match h {
        None => {
            let minus_count = r_v.iter().filter(|&&x| x < 0.0).count();
            let c = CyclicCandidate { minus_count, r_sigma };
            (c.r_v() == {
                let mut s = r_v;
                s.sort_by(|a, b| b.total_cmp(a));
                s
            })
            .then_some(ReducedKey::Cyclic(c))
        }
        Some(h) => {
            let h_v = diag(h)?;
            let pair = SigmaPair::ALL.into_iter().find(|p| p.r_sigma() == r_sigma && p.h_sigma() == h.perm)?;
            let rows = [0, 1, 2].map(|i| [r_v[i] as i8, h_v[i] as i8]);
            let sm = SignMatrix::new(rows).ok()?;
            let code = if pair.allows_rh() { sm.canonical_code() } else { sm.code() };
            Some(ReducedKey::Dihedral(pair, code))
        }
    }
}

/// Names of the trivial-core representatives, in table order.
pub const TABLE_NAMES: [&str; 15] = [
    "C1-", "L2+-", "L2-+", "H2+-", "H2-+", "H4+-", "H4-+", "C3+", "C3-", "L6++", "L6+-", "L6-+", "D6+-", "D6-+",
    "D12-+",
];

/// Every name accepted by [`catalog`].
pub const CATALOG_NAMES: [&str; 25] = [
    "C1-",
    "L2+-",
    "L2-+",
    "H2+-",
    "H2-+",
    "H4+-",
    "H4-+",
    "C3+",
    "C3-",
    "L6++",
    "L6+-",
    "L6-+",
    "D6+-",
    "D6-+",
    "D12-+",
    "vertical-isosceles",
    "D12-eight",
    "C1+",
    "C2+",
    "C2-",
    "L2-",
    "H2-",
    "C6-",
    "C6+",
    "000-with-transpositions",
];

fn el(shift: f64, orientation: i8, d: [f64; 3], perm: &str) -> GroupElement {
    let time = if orientation == 1 { TimeTransform::shift(shift) } else { TimeTransform::reflection(shift) };
    GroupElement::diagonal(time, d, Perm::parse(3, perm).unwrap())
}

fn catalog_generators(name: &str) -> Result<Vec<GroupElement>> {
    const P: f64 = 1.0;
    const M: f64 = -1.0;
    let third = TAU / 3.0;
    let sixth = PI / 3.0;
    let gens = match name {
        "C1+" => vec![],
        "C1-" => vec![el(PI, 1, [P, P, M], "()")],
        "C2+" => vec![el(PI, 1, [P, P, P], "(1,2)")],
        "C2-" => vec![el(PI, 1, [P, P, M], "(1,2)")],
        "C3+" => vec![el(third, 1, [P, P, P], "(1,2,3)")],
        "C3-" => vec![el(sixth, 1, [P, P, M], "(1,2,3)")],
        "C6+" => vec![el(sixth, 1, [P, M, P], "(1,2,3)")],
        "C6-" => vec![el(sixth, 1, [P, M, M], "(1,2,3)")],
        "L2-" => vec![el(PI, 1, [P, M, M], "()")],
        "H2-" => vec![el(PI, 1, [P, M, M], "(1,2)")],
        "L2+-" => vec![el(0.0, -1, [P, M, M], "()")],
        "L2-+" => vec![el(PI, 1, [P, P, M], "()"), el(0.0, -1, [P, M, P], "()")],
        "H2+-" => vec![el(0.0, -1, [P, M, M], "(1,2)")],
        "H2-+" => vec![el(PI, 1, [P, P, M], "()"), el(0.0, -1, [P, M, P], "(1,2)")],
        "H4+-" => vec![el(PI, 1, [P, P, P], "(1,2)"), el(0.0, -1, [P, M, M], "(1,2)")],
        "H4-+" => vec![el(PI, 1, [P, P, M], "(1,2)"), el(0.0, -1, [P, M, P], "(1,2)")],
        "L6++" => vec![el(third, 1, [P, P, P], "(1,2,3)"), el(0.0, -1, [P, M, P], "(1,2)")],
        "L6+-" => vec![el(third, 1, [P, P, P], "(1,2,3)"), el(0.0, -1, [P, M, M], "(1,2)")],
        "L6-+" => vec![el(sixth, 1, [P, P, M], "(1,2,3)"), el(0.0, -1, [P, M, P], "(1,2)")],
        "D6+-" => vec![el(third, 1, [P, P, P], "(1,2,3)"), el(0.0, -1, [M, M, M], "(1,2)")],
        "D6-+" => vec![el(sixth, 1, [P, P, M], "(1,2,3)"), el(0.0, -1, [M, M, P], "(1,2)")],
        "D12-+" => vec![el(sixth, 1, [P, M, M], "(1,2,3)"), el(0.0, -1, [M, P, P], "(1,2)")],
        "D12-eight" => vec![el(sixth, 1, [P, M, M], "(1,2,3)"), el(0.0, -1, [M, M, M], "(1,2)")],
        "vertical-isosceles" => vec![el(0.0, 1, [M, M, P], "(1,2)")],
        "000-with-transpositions" => vec![el(third, 1, [P, P, P], "(1,2,3)"), el(0.0, -1, [P, P, P], "(1,2)")],
        other => return Err(Error::UnknownName(other.to_string())),
    };
    Ok(gens)
}

pub fn catalog_group(name: &str) -> Result<SymmetryGroup> {
    SymmetryGroup::generate(3, catalog_generators(name)?, DEFAULT_CAP)
}

/// A named group with its derived flags and admissible rotation numbers.
#[derive(Clone, Debug, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    #[serde(skip)]
    pub group: SymmetryGroup,
    pub profile: GroupProfile,
    /// Modulus of the residues below: the number of distinct time shifts.
    pub k_modulus: usize,
    pub lagrange_k_residues: Vec<i64>,
    pub euler_k_residues: Vec<i64>,
}

pub fn catalog(name: &str) -> Result<CatalogEntry> {
    let group = catalog_group(name)?;
    let modulus = group.time_order();
    let top = modulus as i64 - 1;
    let residues = |kind| admissible_rotation_numbers(&group, kind, 0..=top).unwrap_or_default();
    Ok(CatalogEntry {
        name: name.to_string(),
        profile: group.profile(),
        k_modulus: modulus,
        lagrange_k_residues: residues(BaselineKind::Lagrange),
        euler_k_residues: residues(BaselineKind::Euler),
        group,
    })
}

fn name_index() -> Vec<(ReducedKey, &'static str)> {
    CATALOG_NAMES.iter().filter_map(|&n| key_of_generators(&catalog_group(n).ok()?).map(|k| (k, n))).collect()
}

fn entry_for(key: ReducedKey, names: &[(ReducedKey, &'static str)]) -> ReducedEntry {
    let group = key.group();
    let profile = group.profile();
    let name = names.iter().find(|(k, _)| *k == key).map(|(_, n)| n.to_string()).unwrap_or_else(|| match &key {
        ReducedKey::Dihedral(p, c) => format!("{p}:{c}"),
        ReducedKey::Cyclic(c) => format!("[{}]:{}", c.r_v_label(), c.r_sigma),
        ReducedKey::Core(n) => n.clone(),
    });
    ReducedEntry {
        name,
        digit_code: key.digit_code(),
        sigma_pair: key.sigma_pair(),
        order: group.order(),
        axes: profile.rotation_axes.clone(),
        flags: profile,
        group,
        key,
    }
}

/// Computed survivors with names, without comparing against the expected list.
pub fn reduce_computed(candidates: &Candidates) -> Vec<ReducedEntry> {
    let names = name_index();
    let mut entries: Vec<ReducedEntry> = reduce_keys(candidates).into_iter().map(|k| entry_for(k, &names)).collect();
    entries.sort_by_key(|e| TABLE_NAMES.iter().position(|n| *n == e.name).unwrap_or(usize::MAX));
    entries
}

/// Survivors of the reduction, required to equal the trivial-core table.
pub fn reduce_to_representatives(candidates: &Candidates) -> Result<Vec<ReducedEntry>> {
    let entries = reduce_computed(candidates);
    let got: BTreeSet<&str> = entries.iter().map(|e| e.name.as_str()).collect();
    let want: BTreeSet<&str> = TABLE_NAMES.into_iter().collect();
    if got != want {
        return Err(Error::ReductionMismatch {
            missing: want.difference(&got).map(|s| s.to_string()).collect(),
            unexpected: got.difference(&want).map(|s| s.to_string()).collect(),
        });
    }
    Ok(entries)
}

/// Candidates that produce the given entries.
pub fn candidates_of(entries: &[ReducedEntry]) -> Candidates {
    let mut c = Candidates::default();
    for e in entries {
        match &e.key {
            ReducedKey::Dihedral(p, code) => c.dihedral.push((SignMatrix::from_code(code).unwrap(), *p)),
            ReducedKey::Cyclic(cc) => c.cyclic.push(cc.clone()),
            ReducedKey::Core(_) => {}
        }
    }
    c
}

/// The reduced table plus the vertical isosceles group.
pub fn classify_table(candidates: &Candidates) -> (Vec<ReducedEntry>, Result<()>) {
    let entries = reduce_computed(candidates);
    let check = reduce_to_representatives(candidates).map(|_| ());
    let mut all = entries;
    all.push(entry_for(ReducedKey::Core("vertical-isosceles".into()), &[]));
    (all, check)
}

/// Survivors restricted to one sigma pair.
pub fn survivors_for_pair(pair: SigmaPair) -> Vec<ReducedEntry> {
    let pair = if pair == SigmaPair::TranspositionIdentity { SigmaPair::TranspositionTransposition } else { pair };
    let cands =
        Candidates { dihedral: canonical_sign_matrices().into_iter().map(|s| (s, pair)).collect(), cyclic: vec![] };
    reduce_computed(&cands)
}

/// Rotation axes of the `[(1,2,3),(1,2)]` groups that survive the collision
/// filter, keyed by sign code (`rh` partners identified).
pub fn rotation_axes_table() -> BTreeMap<String, Vec<[f64; 3]>> {
    let pair = SigmaPair::CycleTransposition;
    let mut out = BTreeMap::new();
    for sm in canonical_sign_matrices() {
        let group = dihedral_group(&sm, pair);
        if group.is_bound_to_collisions() {
            continue;
        }
        out.entry(sm.canonical_code()).or_insert_with(|| group.profile().rotation_axes);
    }
    out
}

/// Rotation axes of the group of an arbitrary code under a sigma pair.
pub fn axes_for_code(code: &str, pair: SigmaPair) -> Result<Vec<[f64; 3]>> {
    Ok(dihedral_group(&SignMatrix::from_code(code)?, pair).profile().rotation_axes)
}

/// One cell of the cyclic-type grid.
#[derive(Clone, Debug, Serialize)]
pub struct CyclicCell {
    pub r_v: String,
    pub r_sigma: String,
    pub label: String,
    pub frame_equivalent_to: Option<String>,
    pub fully_uncoercive: bool,
    pub bound_to_collisions: bool,
}

/// The 12 cyclic candidates with computed flags; cells identified with
/// another by a change of rotating frame carry that cell's label.
pub fn cyclic_table() -> Vec<CyclicCell> {
    let names = name_index();
    let label_of = |c: &CyclicCandidate| {
        names
            .iter()
            .find(|(k, _)| *k == ReducedKey::Cyclic(c.clone()))
            .map_or_else(|| format!("[{}]:{}", c.r_v_label(), c.r_sigma), |(_, n)| n.to_string())
    };
    cyclic_candidates()
        .into_iter()
        .map(|c| {
            let group = c.group();
            let rep = cyclic_representative(&c);
            CyclicCell {
                r_v: c.r_v_label(),
                r_sigma: c.r_sigma.to_string(),
                label: label_of(&c),
                frame_equivalent_to: (rep != c).then(|| label_of(&rep)),
                fully_uncoercive: fully_uncoercive(&group),
                bound_to_collisions: group.is_bound_to_collisions(),
            }
        })
        .collect()
}

/// Group description file: `{ n, masses, generators: [{ time, space, perm }] }`
/// with 1-based permutation images.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub n: usize,
    #[serde(default)]
    pub masses: Option<Vec<f64>>,
    pub generators: Vec<GeneratorSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub time: TimeTransform,
    pub space: [[f64; 3]; 3],
    pub perm: Vec<usize>,
}

impl GroupSpec {
    pub fn build(&self, cap: usize) -> Result<SymmetryGroup> {
        let mut gens = Vec::new();
        for g in &self.generators {
            let time = TimeTransform::new(g.time.shift, g.time.orientation)?;
            let s = g.space;
            let space = Mat3::new(s[0][0], s[0][1], s[0][2], s[1][0], s[1][1], s[1][2], s[2][0], s[2][1], s[2][2]);
            gens.push(GroupElement::new(time, space, Perm::from_one_based(&g.perm)?)?);
        }
        let group = SymmetryGroup::generate(self.n, gens, cap)?;
        match &self.masses {
            Some(m) => group.with_masses(m),
            None => Ok(group),
        }
    }

    pub fn from_group(group: &SymmetryGroup) -> Self {
        Self {
            n: group.n(),
            masses: group.masses().map(|m| m.to_vec()),
            generators: group
                .generators()
                .iter()
                .map(|g| GeneratorSpec {
                    time: g.time,
                    space: [0, 1, 2].map(|r| [0, 1, 2].map(|c| g.space[(r, c)])),
                    perm: g.perm.images().iter().map(|i| i + 1).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_matrices_and_twelve_cyclic() {
        let all = canonical_sign_matrices();
        assert_eq!(all.len(), 20);
        assert_eq!(all.iter().map(|s| s.code()).collect::<BTreeSet<_>>().len(), 20);
        assert_eq!(cyclic_candidates().len(), 12);
        let canon: BTreeSet<String> = all.iter().map(|s| s.canonical_code()).collect();
        assert_eq!(canon.len(), 13);
    }

    #[test]
    fn code_of_rows() {
        let sm = SignMatrix::new([[1, -1], [1, -1], [-1, 1]]).unwrap();
        assert_eq!(sm.code(), "112");
        assert_eq!(SignMatrix::from_code("003").unwrap().canonical_code(), "002");
        assert!(SignMatrix::from_code("04").is_err());
    }

    #[test]
    fn sigma_pair_parsing() {
        assert_eq!(SigmaPair::parse("(1,2),(1,2)").unwrap(), SigmaPair::TranspositionTransposition);
        assert_eq!(SigmaPair::parse("[(1,2,3),(1,2)]").unwrap(), SigmaPair::CycleTransposition);
        assert_eq!(SigmaPair::parse("(),()").unwrap().to_string(), "[(),()]");
        assert!(SigmaPair::parse("(1,3)").is_err());
    }

    #[test]
    fn catalog_keys_round_trip() {
        let key = key_of_generators(&catalog_group("L6-+").unwrap()).unwrap();
        assert_eq!(key, ReducedKey::Dihedral(SigmaPair::CycleTransposition, "012".into()));
        assert!(matches!(catalog("nope"), Err(Error::UnknownName(_))));
    }

    #[test]
    fn group_spec_round_trip() {
        let g = catalog_group("D6-+").unwrap();
        let spec = GroupSpec::from_group(&g);
        let json = serde_json::to_string(&spec).unwrap();
        let back: GroupSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back.build(DEFAULT_CAP).unwrap().order(), g.order());
    }
}
