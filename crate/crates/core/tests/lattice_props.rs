use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use wavekac::subspace::{
    complement, containment_angle, join, leq, meet, orthonormalize_cut, project, Subspace, ToleranceConfig,
};

fn subspace(n: usize, r: usize, vals: &[f64]) -> Subspace {
    let m = DMatrix::from_fn(n, r, |i, j| vals[(i * r + j) % vals.len()] + 0.013 * (i * 7 + j * 3) as f64);
    orthonormalize_cut(&m, 1e-8).unwrap()
}

fn pair() -> impl Strategy<Value = (Subspace, Subspace)> {
    (2usize..12)
        .prop_flat_map(|n| (Just(n), 0..=n, 0..=n, prop::collection::vec(-1.0f64..1.0, 200)))
        .prop_map(|(n, ra, rb, v)| (subspace(n, ra, &v[..100]), subspace(n, rb, &v[100..])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn meet_and_join_bound((a, b) in pair()) {
        let tol = ToleranceConfig::default();
        let m = meet(&a, &b, &tol).unwrap();
        let j = join(&a, &b, &tol).unwrap();
        prop_assert!(leq(&m, &a, &tol).unwrap() && leq(&m, &b, &tol).unwrap());
        prop_assert!(leq(&a, &j, &tol).unwrap() && leq(&b, &j, &tol).unwrap());
        prop_assert!(j.dim() <= a.dim() + b.dim());
        prop_assert!(m.dim() <= a.dim().min(b.dim()));
    }

    #[test]
    fn complement_is_orthogonal_and_involutive((a, _b) in pair()) {
        let c = complement(&a);
        prop_assert_eq!(a.dim() + c.dim(), a.ambient_dim());
        if !a.is_zero() && !c.is_zero() {
            let cross = a.frame().transpose() * c.frame();
            prop_assert!(cross.amax() < 1e-9);
        }
        let cc = complement(&c);
        prop_assert!(containment_angle(&a, &cc) < 1e-8 && containment_angle(&cc, &a) < 1e-8);
    }

    #[test]
    fn projection_is_idempotent((a, _b) in pair(), seed in -1.0f64..1.0) {
        let n = a.ambient_dim();
        let v = DVector::from_fn(n, |i, _| (seed + i as f64).sin());
        let p = project(&a, &v);
        let pp = project(&a, &p);
        prop_assert!((&p - &pp).norm() < 1e-10);
        prop_assert!(p.norm() <= v.norm() + 1e-12);
    }

    #[test]
    fn order_matches_absorption((a, b) in pair()) {
        let tol = ToleranceConfig::default();
        let j = join(&a, &b, &tol).unwrap();
        let back = meet(&a, &j, &tol).unwrap();
        prop_assert_eq!(back.dim(), a.dim());
    }
}
