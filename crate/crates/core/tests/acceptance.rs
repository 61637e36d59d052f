//! One line per acceptance criterion, written straight to stderr so it shows
//! up whether or not the test output is captured.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::io::Write;
use std::time::{Duration, Instant};

use orbitsym::action::{kinetic, kinetic_by_differences, omega_matrix, ActionEvaluator, ProblemSetup, RotatingFrame};
use orbitsym::baselines::{baseline, best_equivariant_baseline, BaselineKind};
use orbitsym::classification::{
    canonical_sign_matrices, catalog, catalog_group, classify_table, cyclic_candidates, cyclic_table,
    enumerate_candidates, rotation_axes_table, CATALOG_NAMES,
};
use orbitsym::diagnostics::angular_momentum;
use orbitsym::minimizer::{minimize, sweep_omega, MinimizeOptions, MinimizeResult};
use orbitsym::symmetry::{SymmetryGroup, DEFAULT_CAP};
use orbitsym::variations::{
    euler_instability_test, euler_threshold, lagrange_instability_test, nonplanar_window, window_for_threshold,
};
use orbitsym::{FourierLoop, Vec3};

fn report(n: u32, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {status} {detail}");
    assert!(ok, "criterion {n} failed: {detail}");
}

const EQUAL: [f64; 3] = [1.0 / 3.0; 3];

fn run(name: &str, omega: f64) -> (MinimizeResult, Duration) {
    let group = catalog_group(name).unwrap();
    let setup = ProblemSetup::equal_masses(3, 1.0, RotatingFrame::about(&Vec3::z(), omega)).unwrap();
    let t = Instant::now();
    let r = minimize(&setup, &group, &MinimizeOptions::default()).unwrap();
    (r, t.elapsed())
}

fn lagrange_level(name: &str, omega: f64) -> f64 {
    let g = catalog_group(name).unwrap().with_equal_masses().unwrap();
    best_equivariant_baseline(&g, BaselineKind::Lagrange, 1.0, omega, 12).unwrap().baseline.action
}

fn axis_set(axes: &[[f64; 3]]) -> BTreeSet<usize> {
    axes.iter().map(|a| a.iter().position(|c| (c.abs() - 1.0).abs() < 1e-12).expect("canonical axis") + 1).collect()
}

#[test]
fn criterion_1_classification() {
    let t = Instant::now();
    let (table, check) = classify_table(&enumerate_candidates());
    let cyc = cyclic_table();
    let axes = rotation_axes_table();
    let elapsed = t.elapsed();
    let mut problems = Vec::new();

    // trivial-core table: name, sigma pair, sign code
    let expected_table: BTreeSet<(&str, &str, Option<&str>)> = [
        ("C1-", "[()]", None),
        ("L2+-", "[(),()]", Some("011")),
        ("L2-+", "[(),()]", Some("012")),
        ("H2+-", "[(),(1,2)]", Some("011")),
        ("H2-+", "[(),(1,2)]", Some("012")),
        ("H4+-", "[(1,2),(1,2)]", Some("011")),
        ("H4-+", "[(1,2),(1,2)]", Some("012")),
        ("C3+", "[(1,2,3)]", None),
        ("C3-", "[(1,2,3)]", None),
        ("L6++", "[(1,2,3),(1,2)]", Some("001")),
        ("L6+-", "[(1,2,3),(1,2)]", Some("011")),
        ("L6-+", "[(1,2,3),(1,2)]", Some("012")),
        ("D6+-", "[(1,2,3),(1,2)]", Some("111")),
        ("D6-+", "[(1,2,3),(1,2)]", Some("112")),
        ("D12-+", "[(1,2,3),(1,2)]", Some("122")),
    ]
    .into_iter()
    .collect();
    let got_table: BTreeSet<(&str, &str, Option<&str>)> = table
        .iter()
        .filter(|e| e.name != "vertical-isosceles")
        .map(|e| (e.name.as_str(), e.sigma_pair.as_str(), e.digit_code.as_deref()))
        .collect();
    for miss in expected_table.difference(&got_table) {
        problems.push(format!("reduced table missing {miss:?}"));
    }
    for extra in got_table.difference(&expected_table) {
        problems.push(format!("reduced table unexpected {extra:?}"));
    }
    if !table.iter().any(|e| e.name == "vertical-isosceles") {
        problems.push("vertical isosceles record missing".into());
    }
    if let Err(e) = check {
        problems.push(format!("reduction check: {e}"));
    }

    // cyclic grid: (r_V, r_Sigma) -> (label, equivalent-to, fully uncoercive)
    let expected_cyclic: Vec<(&str, &str, &str, Option<&str>, bool)> = vec![
        ("+++", "()", "C1+", None, true),
        ("+++", "(1,2)", "C2+", None, true),
        ("+++", "(1,2,3)", "C3+", None, false),
        ("++-", "()", "C1-", None, false),
        ("++-", "(1,2)", "C2-", None, true),
        ("++-", "(1,2,3)", "C3-", None, false),
        ("+--", "()", "L2-", None, true),
        ("+--", "(1,2)", "H2-", None, true),
        ("+--", "(1,2,3)", "C6-", Some("C3+"), false),
        ("---", "()", "", Some("C1-"), false),
        ("---", "(1,2)", "", Some("C2-"), true),
        ("---", "(1,2,3)", "", Some("C3-"), false),
    ];
    for (rv, rs, label, eq, fu) in expected_cyclic {
        match cyc.iter().find(|c| c.r_v == rv && c.r_sigma == rs) {
            None => problems.push(format!("cyclic cell [{rv}]{rs} missing")),
            Some(c) => {
                let label_ok = label.is_empty() || c.label == label;
                if !label_ok || c.frame_equivalent_to.as_deref() != eq || c.fully_uncoercive != fu {
                    problems.push(format!("cyclic cell [{rv}]{rs}: got {c:?}"));
                }
            }
        }
    }
    let fu_marks = cyc.iter().filter(|c| c.fully_uncoercive && c.frame_equivalent_to.is_none()).count();
    if fu_marks != 5 {
        problems.push(format!("{fu_marks} fully uncoercive marks"));
    }

    // rotation axes of the [(1,2,3),(1,2)] candidates
    let expected_axes: BTreeMap<&str, BTreeSet<usize>> = [
        ("001", vec![1, 2]),
        ("011", vec![2, 3]),
        ("111", vec![]),
        ("012", vec![3]),
        ("112", vec![]),
        ("023", vec![1]),
        ("122", vec![]),
        ("123", vec![1]),
        ("223", vec![2, 3]),
    ]
    .into_iter()
    .map(|(k, v)| (k, v.into_iter().collect()))
    .collect();
    let got_axes: BTreeMap<&str, BTreeSet<usize>> = axes.iter().map(|(k, v)| (k.as_str(), axis_set(v))).collect();
    for (code, want) in &expected_axes {
        match got_axes.get(code) {
            Some(got) if got == want => {}
            got => problems.push(format!("axes {code}: want {want:?}, got {got:?}")),
        }
    }
    if got_axes.len() != expected_axes.len() {
        problems.push(format!("{} axis cells, want {}", got_axes.len(), expected_axes.len()));
    }
    if elapsed >= Duration::from_secs(1) {
        problems.push(format!("took {elapsed:?}"));
    }
    let detail = if problems.is_empty() { format!("exact match in {elapsed:?}") } else { problems.join("; ") };
    report(1, problems.is_empty(), &detail);
}

#[test]
fn criterion_2_enumeration_counts() {
    let sm = canonical_sign_matrices().len();
    let cc = cyclic_candidates().len();
    report(2, sm == 20 && cc == 12, &format!("{sm} sign matrices, {cc} cyclic candidates"));
}

#[test]
fn criterion_3_threshold_arithmetic() {
    let tol = 1e-12;
    let mut errs = Vec::new();
    let t13 = euler_threshold(1.0 / 3.0, 1.0).unwrap();
    errs.push(("T(1/3)", (t13 - 5.0 / 12.0).abs()));
    errs.push(("T(m1->0)", (euler_threshold(1e-14, 1.0).unwrap() - 1.0).abs()));
    for alpha in [0.5, 1.0, 2.0] {
        let lim = euler_threshold(0.5 - 1e-14, alpha).unwrap();
        errs.push(("T(m1->1/2)", (lim - 2f64.powf(-(2.0 + alpha))).abs()));
    }
    let win = nonplanar_window(&EQUAL, 1.0, &[0], 2).unwrap();
    let r = (5.0f64 / 12.0).sqrt();
    let (lo, hi) = win.first().copied().unwrap_or((f64::NAN, f64::NAN));
    errs.push(("window low", (lo - r).abs()));
    errs.push(("window high", (hi - (2.0 - r)).abs()));
    let direct = window_for_threshold(5.0 / 12.0, &[0], 2).unwrap();
    let ok = win.len() == 1 && direct == win && (lo - 0.645497).abs() < 5e-7 && errs.iter().all(|(_, e)| *e <= tol);
    let worst = errs.iter().map(|(_, e)| *e).fold(0.0, f64::max);
    report(3, ok, &format!("window {win:?}, worst error {worst:.2e}"));
}

#[test]
fn criterion_4_second_variation() {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut count = 0;
    for alpha in [0.5, 1.0, 2.0] {
        for k in [1i64, 2, 3] {
            for omega in [-0.3, 0.1, 0.4] {
                let lag = lagrange_instability_test(&[1.0; 3], alpha, k, omega).unwrap();
                let eul = euler_instability_test(&[1.0, 1.0, 2.0], alpha, k, omega).unwrap();
                for r in [lag, eul] {
                    let c = r.closed_form.unwrap();
                    worst = worst.max((r.second_derivative - c).abs() / c.abs().max(1e-300));
                    count += 1;
                }
            }
        }
    }
    let elapsed = t.elapsed();
    let ok = worst <= 1e-6 && elapsed < Duration::from_secs(10);
    report(4, ok, &format!("{count} comparisons, worst relative error {worst:.2e}, {elapsed:?}"));
}

#[test]
fn criterion_5_gordon() {
    let (r, elapsed) = run("C1-", 0.5);
    let target = lagrange_level("C1-", 0.5);
    let rel = (r.action - target).abs() / target;
    let ok = rel <= 5e-3 && elapsed < Duration::from_secs(60);
    report(5, ok, &format!("action {:.10} vs Lagrange {:.10} (rel {rel:.1e}), {elapsed:?}", r.action, target));
}

#[test]
fn criterion_6_figure_eight() {
    let (r, elapsed) = run("D6+-", 0.0);
    let d = &r.diagnostics;
    let ok = r.converged
        && d.j_norm() <= 1e-6
        && d.planarity_ratio <= 1e-3
        && d.min_pairwise_distance >= 0.05
        && d.el_residual_max <= 1e-6
        && elapsed < Duration::from_secs(120);
    report(
        6,
        ok,
        &format!(
            "converged {}, |J| {:.1e}, planarity {:.1e}, min distance {:.3}, EL {:.1e}, {elapsed:?}",
            r.converged,
            d.j_norm(),
            d.planarity_ratio,
            d.min_pairwise_distance,
            d.el_residual_max
        ),
    );
}

fn inside(windows: &[(f64, f64)], w: f64) -> bool {
    windows.iter().any(|(a, b)| w > *a && w < *b)
}

#[test]
fn criterion_7_p12_window() {
    let t = Instant::now();
    let mut problems = Vec::new();
    let mut notes = Vec::new();
    for name in ["L6-+", "C3-"] {
        let entry = catalog(name).unwrap();
        let windows = nonplanar_window(&EQUAL, 1.0, &entry.lagrange_k_residues, entry.k_modulus as i64).unwrap();
        let omega = 0.5;
        assert!(inside(&windows, omega));
        let (r, _) = run(name, omega);
        let level = lagrange_level(name, omega);
        let j = r.diagnostics.j_mean;
        let off_axis = j[0].hypot(j[1]);
        if !(r.diagnostics.planarity_ratio >= 1e-2 && r.action < level && off_axis <= 1e-6) {
            problems.push(format!(
                "{name} at {omega}: planarity {:.2e}, action {} vs {level}, off-axis J {off_axis:.1e}",
                r.diagnostics.planarity_ratio, r.action
            ));
        }
        notes.push(format!(
            "{name} planarity {:.3} action {:.6} < {:.6}",
            r.diagnostics.planarity_ratio, r.action, level
        ));

        let group = catalog_group(name).unwrap();
        let omegas: Vec<f64> = (0..21).map(|i| 0.09 * i as f64).collect();
        let pts = sweep_omega(&EQUAL, 1.0, &Vec3::z(), &group, &omegas, &MinimizeOptions::default());
        let mut nonplanar = 0;
        for p in &pts {
            let res = match &p.result {
                Ok(r) => r,
                Err(e) => {
                    problems.push(format!("{name} sweep at {}: {e}", p.omega));
                    continue;
                }
            };
            let planar = res.diagnostics.planarity_ratio < 1e-2;
            if !planar {
                nonplanar += 1;
                if !inside(&windows, p.omega) {
                    problems.push(format!("{name}: non-planar at {} outside the window", p.omega));
                }
            }
            if !inside(&windows, p.omega) {
                let level = lagrange_level(name, p.omega);
                if (res.action - level).abs() > 1e-3 * level {
                    problems
                        .push(format!("{name}: action {} at {} differs from baseline {level}", res.action, p.omega));
                }
            }
        }
        if nonplanar == 0 {
            problems.push(format!("{name}: no non-planar point in the sweep"));
        }
        notes.push(format!("{name} window {windows:.3?} non-planar points {nonplanar}/21"));
    }
    let elapsed = t.elapsed();
    if elapsed >= Duration::from_secs(600) {
        problems.push(format!("took {elapsed:?}"));
    }
    let detail = if problems.is_empty() { format!("{}; {elapsed:?}", notes.join("; ")) } else { problems.join("; ") };
    report(7, problems.is_empty(), &detail);
}

#[test]
fn criterion_8_l2_exhibit() {
    let (r, elapsed) = run("L2-+", 0.9);
    let ok = r.converged && r.diagnostics.planarity_ratio >= 1e-2 && elapsed < Duration::from_secs(60);
    report(
        8,
        ok,
        &format!(
            "converged {}, planarity {:.3e}, action {:.6}, {elapsed:?}",
            r.converged, r.diagnostics.planarity_ratio, r.action
        ),
    );
}

#[test]
fn criterion_9_property_suites() {
    let t = Instant::now();
    let mut problems = Vec::new();
    let trivial = SymmetryGroup::generate(3, vec![], DEFAULT_CAP).unwrap();
    let free = |seed: u64, order: usize| FourierLoop::random_equivariant(&trivial, order, seed, 1.0).unwrap();

    for name in CATALOG_NAMES {
        let g = catalog_group(name).unwrap();
        let closed = g
            .elements()
            .iter()
            .all(|a| g.contains(&a.inverse()) && g.elements().iter().all(|b| g.contains(&a.compose(b))));
        if !closed {
            problems.push(format!("{name} not closed"));
        }
        let g = g.with_equal_masses().unwrap();
        let frame = g.rotation_axes().first().map_or(RotatingFrame::inertial(), |a| RotatingFrame::about(a, 0.7));
        let setup = ProblemSetup::equal_masses(3, 1.0, frame).unwrap();
        let eval = ActionEvaluator::new(&setup, 5, 96).unwrap();
        for seed in 0..4u64 {
            let x = free(seed, 5);
            let p = x.project(&g).unwrap();
            if p.project(&g).unwrap().max_abs_diff(&p) > 1e-12 {
                problems.push(format!("{name}: projection not idempotent"));
            }
            let a = eval.value(&x).unwrap();
            for el in g.elements() {
                let b = eval.value(&x.act(el).unwrap()).unwrap();
                if (a - b).abs() > 1e-9 * a.abs().max(1.0) {
                    problems.push(format!("{name}: action not invariant ({a} vs {b})"));
                }
            }
            if let Ok(y) = FourierLoop::random_equivariant(&g, 5, seed, 1.0) {
                let masses = g.masses_or_equal();
                for s in 0..5 {
                    let tt = TAU * s as f64 / 5.0 + 0.1;
                    let j = angular_momentum(&masses, &y, tt);
                    for el in g.elements() {
                        let lhs = angular_momentum(&masses, &y, el.time.apply(tt));
                        if (lhs - el.space * j * el.axis_character()).norm() > 1e-10 * j.norm().max(1.0) {
                            problems.push(format!("{name}: J identity fails"));
                        }
                    }
                }
            }
        }
    }

    let setup = ProblemSetup::new(&[1.0, 2.0, 1.5], 1.3, RotatingFrame::new(Vec3::new(0.2, -0.1, 1.0) * 0.6)).unwrap();
    let eval = ActionEvaluator::new(&setup, 5, 64).unwrap();
    let mut worst_fd = 0.0f64;
    for seed in 0..16u64 {
        let x = free(100 + seed, 5);
        let v = free(200 + seed, 5);
        let e = eval.evaluate(&x, true).unwrap();
        if e.min_distance < 0.05 {
            continue;
        }
        let h = 1e-5;
        let fd =
            (eval.value(&x.axpy(h, &v).unwrap()).unwrap() - eval.value(&x.axpy(-h, &v).unwrap()).unwrap()) / (2.0 * h);
        let an: f64 = e.gradient.unwrap().coeffs().iter().zip(v.coeffs()).map(|(a, b)| a * b).sum();
        worst_fd = worst_fd.max((fd - an).abs() / an.abs().max(1.0));
    }
    if worst_fd > 1e-6 {
        problems.push(format!("gradient vs finite differences {worst_fd:.1e}"));
    }

    let mut worst_kepler = 0.0f64;
    for kind in [BaselineKind::Lagrange, BaselineKind::Euler] {
        for m in [[1.0, 1.0, 1.0], [1.0, 1.0, 2.5]] {
            for alpha in [0.5, 1.0, 2.0] {
                for k in [-2i64, 1, 3] {
                    for omega in [-0.4, 0.0, 0.35] {
                        worst_kepler =
                            worst_kepler.max(baseline(kind, &m, alpha, k, omega).unwrap().kepler_residual().abs());
                    }
                }
            }
        }
    }
    if worst_kepler > 1e-10 {
        problems.push(format!("Kepler residual {worst_kepler:.1e}"));
    }

    let mut worst_kin = 0.0f64;
    let masses = [0.2, 0.5, 0.3];
    for seed in 0..16u64 {
        let mut x = free(300 + seed, 3);
        x.center(&masses).unwrap();
        let om = omega_matrix(&Vec3::new(0.3, -1.1, 0.8));
        let tt = 0.37 * seed as f64;
        let (p, v) = (x.position(tt), x.velocity(tt));
        let a = kinetic(&masses, &om, &p, &v);
        worst_kin = worst_kin.max((a - kinetic_by_differences(&masses, &om, &p, &v)).abs() / a.max(1.0));
    }
    if worst_kin > 1e-12 {
        problems.push(format!("kinetic difference identity {worst_kin:.1e}"));
    }
    let elapsed = t.elapsed();
    if elapsed >= Duration::from_secs(300) {
        problems.push(format!("took {elapsed:?}"));
    }
    let detail = if problems.is_empty() {
        format!("fd {worst_fd:.1e}, Kepler {worst_kepler:.1e}, kinetic {worst_kin:.1e}, {elapsed:?}")
    } else {
        problems.join("; ")
    };
    report(9, problems.is_empty(), &detail);
}
