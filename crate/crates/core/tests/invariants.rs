use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use vdselect_core::ambient::{center_project, dot, norm};
use vdselect_core::rng::seeded;
use vdselect_core::selectors::{run_path, LarsState, Step, StoppingRule};
use vdselect_core::{AmbientSpace, ColumnProvider, DenseColumns, DummyLaw, DummyPool, OrthonormalBasis};

fn gaussian(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn centered(space: &AmbientSpace, seed: u64) -> Vec<f64> {
    center_project(&gaussian(space.n(), seed), space).unwrap().into_vec()
}

fn instance(n: usize, p: usize, seed: u64) -> (DenseColumns, Vec<f64>) {
    let space = AmbientSpace::new(n).unwrap();
    let x = DenseColumns::standardized(space, p, &gaussian(n * p, seed)).unwrap();
    (x, centered(&space, seed ^ 0xabc))
}

/// Unit-norm centered dummy block, column-major.
fn unit_block(space: &AmbientSpace, l: usize, seed: u64) -> Vec<f64> {
    (0..l)
        .flat_map(|j| {
            let v = centered(space, seed.wrapping_add(j as u64 * 7919));
            let s = norm(&v);
            v.into_iter().map(move |a| a / s)
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn coefficients_of_an_extension(n in 5usize..50, k in 0usize..4, seed in any::<u64>()) {
        let space = AmbientSpace::new(n).unwrap();
        let k = k.min(space.m() - 1);
        let mut basis = OrthonormalBasis::new(space);
        for i in 0..k {
            basis.extend(&centered(&space, seed.wrapping_add(i as u64))).unwrap();
        }
        let v = centered(&space, seed.wrapping_add(99));
        let before: Vec<f64> = basis.directions().map(|e| dot(e, &v)).collect();
        basis.extend(&v).unwrap();
        let t = basis.coeffs(&v).unwrap();
        let perp = (norm(&v).powi(2) - before.iter().map(|a| a * a).sum::<f64>()).max(0.0).sqrt();
        prop_assert_eq!(t.len(), k + 1);
        for (a, b) in t.iter().zip(before.iter().chain([&perp])) {
            prop_assert!((a - b).abs() <= 1e-10 * norm(&v), "{} vs {}", a, b);
        }
    }

    #[test]
    fn stick_bookkeeping_and_realization(n in 6usize..40, l in 1usize..30, k in 1usize..5, seed in any::<u64>()) {
        let space = AmbientSpace::new(n).unwrap();
        let k = k.min(space.m());
        let mut pool = DummyPool::sampled(l, DummyLaw::Spherical, space, seed);
        let mut basis = OrthonormalBasis::new(space);
        for i in 0..k {
            basis.extend(&centered(&space, seed.wrapping_add(i as u64 + 1))).unwrap();
            pool.fresh_projections(&basis).unwrap();
        }
        for d in 0..l {
            let revealed: f64 = pool.table().column(d).iter().map(|a| a * a).sum();
            prop_assert!((pool.sticks()[d].r2 - (1.0 - revealed)).abs() <= 1e-12);
        }
        let target = (seed % l as u64) as usize;
        let column = pool.table().column(target);
        let d = pool.realize(target, &basis, k).unwrap().to_vec();
        prop_assert!((norm(&d) - 1.0).abs() <= 1e-12);
        prop_assert!(d.iter().sum::<f64>().abs() <= 1e-10);
        let t = basis.coeffs(&d).unwrap();
        for (a, b) in t.iter().zip(&column) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn lars_path_certificates(n in 12usize..60, p in 2usize..25, l in 1usize..60, seed in any::<u64>()) {
        let (x, y) = instance(n, p, seed);
        let space = AmbientSpace::new(n).unwrap();
        let pool = DummyPool::sampled(l, DummyLaw::Spherical, space, seed ^ 1);
        let mut st = LarsState::new(&x, &y, pool).unwrap();
        let scale = norm(&y);
        let mut last_c = f64::INFINITY;
        for _ in 0..(n - 2).min(p + l) {
            let Step::Entered(e) = st.step().unwrap() else { break };
            prop_assert!(e.c_before <= last_c + 1e-9 * scale, "{} after {}", e.c_before, last_c);
            last_c = e.c_before;
            let r = st.residual();
            let active: Vec<f64> = st.signed_columns().iter().map(|c| dot(c, r)).collect();
            let c = active.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            for a in &active {
                prop_assert!((a - c).abs() <= 1e-6 * scale);
            }
            let in_active: Vec<usize> = st.active().iter().map(|&(g, _)| g).collect();
            for j in (0..p).filter(|j| !in_active.contains(j)) {
                prop_assert!(dot(&x.column(j), r).abs() <= c + 1e-6 * scale);
            }
            let t = st.residual_coeffs().unwrap();
            for (_, s) in st.pool().dummy_scores(&t).unwrap() {
                prop_assert!(s.abs() <= c + 1e-6 * scale);
            }
        }
    }

    #[test]
    fn shadow_scores_are_explicit_products(n in 8usize..40, p in 2usize..15, l in 1usize..25, seed in any::<u64>()) {
        let (x, y) = instance(n, p, seed);
        let space = AmbientSpace::new(n).unwrap();
        let d = unit_block(&space, l, seed ^ 2);
        let pool = DummyPool::shadow(d.clone(), l, DummyLaw::Spherical, space).unwrap();
        let mut st = LarsState::new(&x, &y, pool).unwrap();
        for _ in 0..5 {
            let t = st.residual_coeffs().unwrap();
            for (ell, s) in st.pool().dummy_scores(&t).unwrap() {
                let explicit = dot(&d[ell * n..(ell + 1) * n], st.residual());
                prop_assert!((s - explicit).abs() <= 1e-10, "{} vs {}", s, explicit);
            }
            if let Step::Finished = st.step().unwrap() {
                break;
            }
        }
    }

    #[test]
    fn dropping_an_unselected_dummy_keeps_the_path(n in 10usize..40, p in 2usize..15, l in 2usize..25, seed in any::<u64>()) {
        let (x, y) = instance(n, p, seed);
        let space = AmbientSpace::new(n).unwrap();
        let d = unit_block(&space, l, seed ^ 3);
        let stop = StoppingRule::DummyCount(1);
        let full = run_path(&x, &y, DummyPool::shadow(d.clone(), l, DummyLaw::Spherical, space).unwrap(), stop).unwrap();
        let chosen: Vec<usize> = full.events.iter().filter(|e| e.is_dummy).map(|e| e.index - p).collect();
        let Some(drop) = (0..l).find(|ell| !chosen.contains(ell)) else { return Ok(()) };
        let mut kept = d[..drop * n].to_vec();
        kept.extend_from_slice(&d[(drop + 1) * n..]);
        let reduced = run_path(&x, &y, DummyPool::shadow(kept, l - 1, DummyLaw::Spherical, space).unwrap(), stop).unwrap();
        prop_assert_eq!(full.events.len(), reduced.events.len());
        for (a, b) in full.events.iter().zip(&reduced.events) {
            let expected = if a.is_dummy && a.index > p + drop { a.index - 1 } else { a.index };
            prop_assert_eq!(expected, b.index);
            prop_assert!((a.gamma - b.gamma).abs() <= 1e-10);
        }
    }
}
