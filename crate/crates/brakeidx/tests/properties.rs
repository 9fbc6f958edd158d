use brakeidx::angle::Omega;
use brakeidx::iteration::iterate_periodic;
use brakeidx::lagrangian::{i_l, i_omega_l0, mu_clm, mu_clm_range, LagrangianFrame};
use brakeidx::omega::i_nu_omega;
use brakeidx::path::{fundamental_solution_auto, path_to, SymplecticPath};
use brakeidx::signature::{sgn_m_eps, sgn_m_eps_from, EpsSide};
use brakeidx::suite::{case_with_dimension, general_case};
use brakeidx::symplectic::{complexify, diamond, rotation, Mat, SymplecticMatrix};
use proptest::prelude::*;
use std::f64::consts::PI;

fn suite_path(seed: u64, n: usize) -> SymplecticPath {
    let c = case_with_dimension(seed, 0, n, false).unwrap();
    fundamental_solution_auto(&c.b).unwrap()
}

/// [[A, AS], [0, A⁻ᵀ]] with S symmetric
fn symplectic_from(n: usize, entries: &[f64]) -> Mat {
    let a = Mat::from_fn(n, n, |i, k| entries[i * n + k] + if i == k { 2.0 } else { 0.0 });
    let s = Mat::from_fn(n, n, |i, k| entries[n * n + i.min(k) * n + i.max(k)]);
    let a_inv_t = a.clone().try_inverse().unwrap().transpose();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&a);
    m.view_mut((0, n), (n, n)).copy_from(&(&a * s));
    m.view_mut((n, n), (n, n)).copy_from(&a_inv_t);
    m
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn intersection_count_is_additive(seed in any::<u64>(), n in 1usize..=2, frac in 0.1f64..0.9) {
        let p = suite_path(seed, n);
        let last = p.samples().len() - 1;
        let k = ((last as f64 * frac) as usize).clamp(1, last - 1);
        for v in [LagrangianFrame::v1(n), LagrangianFrame::v2(n), LagrangianFrame::v_theta(n, 1.0)] {
            let whole = mu_clm(&v, &p).unwrap();
            let parts = mu_clm_range(&v, &p, 0, k).unwrap() + mu_clm_range(&v, &p, k, last).unwrap();
            prop_assert_eq!(whole, parts);
        }
    }

    #[test]
    fn intersection_count_is_symplectically_invariant(
        seed in any::<u64>(),
        n in 1usize..=2,
        entries in prop::collection::vec(-0.5f64..0.5, 8),
    ) {
        let p = suite_path(seed, n);
        let g = symplectic_from(n, &entries);
        let g_inv = g.clone().try_inverse().unwrap();
        let conj: Vec<Mat> = p.samples().iter().map(|m| &g * m * &g_inv).collect();
        let q = SymplecticPath::from_samples(p.grid().to_vec(), conj, None).unwrap();
        let d = 2 * n;
        let mut big = Mat::zeros(2 * d, 2 * d);
        big.view_mut((0, 0), (d, d)).copy_from(&g);
        big.view_mut((d, d), (d, d)).copy_from(&g);
        let big = complexify(&big);
        for v in [LagrangianFrame::v1(n), LagrangianFrame::v2(n)] {
            let moved = v.transform(&big).unwrap();
            prop_assert_eq!(mu_clm(&v, &p).unwrap(), mu_clm(&moved, &q).unwrap());
        }
    }

    #[test]
    fn periodic_index_is_conjugation_symmetric(seed in any::<u64>(), n in 1usize..=2, num in 1i64..12) {
        let p = suite_path(seed, n);
        let w = Omega::from_turns(num, 13);
        let a = i_nu_omega(&p, w).unwrap();
        let b = i_nu_omega(&p, w.conj()).unwrap();
        prop_assert_eq!((a.index, a.nullity), (b.index, b.nullity));
    }

    #[test]
    fn rotated_index_is_squeezed(seed in any::<u64>(), n in 1usize..=3, theta in 0.05f64..(PI - 0.05)) {
        let p = suite_path(seed, n);
        let l0 = i_l(&p, 0).unwrap().index;
        let w = i_omega_l0(&p, theta).unwrap().index;
        prop_assert!(l0 <= w && w <= l0 + n as i64, "i_L0 = {}, i_ω^L0 = {}", l0, w);
    }

    #[test]
    fn boundary_indices_differ_by_at_most_n(seed in any::<u64>(), idx in 0usize..50) {
        let c = general_case(seed, idx).unwrap();
        let p = fundamental_solution_auto(&c.b).unwrap();
        let (a, b) = (i_l(&p, 0).unwrap(), i_l(&p, 1).unwrap());
        let n = c.n as i64;
        prop_assert!((a.index - b.index).abs() <= n);
        prop_assert!((a.sum() - b.sum()).abs() <= n);
    }

    #[test]
    fn orthogonal_endpoints_have_balanced_signature(n in 1usize..=3, theta in 0.0f64..(2.0 * PI), tau in 0.3f64..4.0) {
        let r = SymplecticMatrix::new(rotation(n, theta)).unwrap();
        let s = sgn_m_eps(&r, EpsSide::Plus).unwrap();
        prop_assert_eq!(s.signature, 0);
        prop_assert_eq!((s.inertia.0, s.inertia.2), (n, n));
        let p = SymplecticPath::rotation(n, tau);
        prop_assert_eq!(i_l(&p, 0).unwrap().index, i_l(&p, 1).unwrap().index);
    }

    #[test]
    fn signature_is_additive_and_stable(a in -2.0f64..2.0, b in -2.0f64..2.0, theta in 0.1f64..3.0) {
        let shear = SymplecticMatrix::new(Mat::from_row_slice(2, 2, &[1.0, a, 0.0, 1.0])).unwrap();
        let lower = SymplecticMatrix::new(Mat::from_row_slice(2, 2, &[1.0, 0.0, b, 1.0])).unwrap();
        let rot = SymplecticMatrix::new(rotation(1, theta)).unwrap();
        let sig = |m: &SymplecticMatrix| sgn_m_eps(m, EpsSide::Plus).unwrap().signature;
        prop_assert_eq!(sig(&diamond(&shear, &lower)), sig(&shear) + sig(&lower));
        prop_assert_eq!(sig(&diamond(&diamond(&shear, &rot), &lower)), sig(&shear) + sig(&rot) + sig(&lower));
        for eps0 in [1e-2, 1e-3, 1e-4] {
            prop_assert_eq!(sgn_m_eps_from(&shear, EpsSide::Plus, eps0).unwrap().signature, sig(&shear));
        }
    }
}

#[test]
fn negative_shear_endpoint_iterates_linearly() {
    let m = Mat::from_row_slice(2, 2, &[1.0, -1.0, 0.0, 1.0]);
    let p = path_to(&m, 1.0, 512).unwrap();
    let one = i_nu_omega(&p, Omega::ONE).unwrap();
    assert_eq!(one.nullity, 1);
    assert_eq!(one.index % 2, 0);
    for k in 1..=6 {
        let it = i_nu_omega(&iterate_periodic(&p, k).unwrap(), Omega::ONE).unwrap();
        assert_eq!((it.index, it.nullity), (k as i64 * one.index, 1), "iterate {k}");
    }
}
