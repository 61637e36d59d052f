use orbitsym::classification::{
    canonical_sign_matrices, catalog, catalog_group, enumerate_candidates, reduce_computed, survivors_for_pair,
    SigmaPair, SignMatrix, NAMED_EQUIVALENCES, TABLE_NAMES,
};

#[test]
fn sign_codes_sort_rows() {
    let sm = SignMatrix::new([[1, -1], [1, -1], [-1, 1]]).unwrap();
    assert_eq!(sm.code(), "112");
    assert_eq!(SignMatrix::new([[-1, 1], [1, -1], [1, -1]]).unwrap().code(), "112");
    assert!(SignMatrix::new([[1, 0], [1, 1], [1, 1]]).is_err());
    assert!(SignMatrix::from_code("124").is_err());
    assert_eq!(canonical_sign_matrices().len(), 20);
}

#[test]
fn identity_pair_survivors() {
    let names: Vec<String> = survivors_for_pair(SigmaPair::IdentityIdentity).into_iter().map(|e| e.name).collect();
    assert_eq!(names, ["L2+-", "L2-+"]);
}

#[test]
fn catalog_examples() {
    let c3 = catalog("C3-").unwrap();
    assert_eq!(c3.k_modulus, 6);
    assert_eq!(c3.lagrange_k_residues, [2, 4]);
    assert!(!c3.profile.bound_to_collisions && !c3.profile.fully_uncoercive);

    let vi = catalog("vertical-isosceles").unwrap();
    assert_eq!(vi.group.order(), 2);
    assert!(vi.profile.rotation_axes.contains(&[0.0, 0.0, 1.0]));

    let l2 = catalog("L2-+").unwrap();
    assert_eq!(l2.k_modulus, 2);
    assert_eq!(l2.euler_k_residues, [0]);

    assert!(catalog("no-such-group").is_err());
}

#[test]
fn table_entries_are_neither_bound_nor_fully_uncoercive() {
    for name in TABLE_NAMES {
        let p = catalog_group(name).unwrap().with_equal_masses().unwrap().profile();
        assert!(!p.bound_to_collisions, "{name} is bound to collisions");
        assert!(!p.fully_uncoercive, "{name} is fully uncoercive");
    }
}

#[test]
fn reduction_is_deterministic() {
    let a: Vec<String> = reduce_computed(&enumerate_candidates()).into_iter().map(|e| e.name).collect();
    let b: Vec<String> = reduce_computed(&enumerate_candidates()).into_iter().map(|e| e.name).collect();
    assert_eq!(a, b);
}

#[test]
fn named_equivalences_share_invariants() {
    for (a, b, conjugate) in NAMED_EQUIVALENCES {
        let (ga, gb) = (catalog_group(a).unwrap(), catalog_group(b).unwrap());
        let (pa, pb) = (ga.profile(), gb.profile());
        assert_eq!(pa.bound_to_collisions, pb.bound_to_collisions, "{a} {b}");
        assert_eq!(pa.rotation_axes.is_empty(), pb.rotation_axes.is_empty(), "{a} {b}");
        if conjugate {
            assert_eq!(ga.order(), gb.order(), "{a} {b}");
            assert_eq!(pa.rotation_axes.len(), pb.rotation_axes.len(), "{a} {b}");
            assert_eq!(pa.type_r, pb.type_r, "{a} {b}");
        }
    }
}
