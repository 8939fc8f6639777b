use gkz::lattice::*;
use gkz::linalg::{self, qi, Q, Z};
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn five_point() -> Configuration {
    Configuration::new(vec![vec![1, 1, 1, 1, 1], vec![0, 1, 2, 0, 0], vec![0, 0, 0, 1, -1]]).unwrap()
}

fn appell() -> Configuration {
    Configuration::new(vec![vec![1, 0, 0, 0, 1, 1], vec![0, 1, 0, 0, 1, 0], vec![0, 0, 1, 0, 0, 1], vec![0, 0, 0, 1, -1, -1]]).unwrap()
}

fn z(v: &[i64]) -> Vec<Z> {
    v.iter().map(|&x| Z::from(x)).collect()
}

fn apply(a: &Configuration, u: &[Z]) -> Vec<Z> {
    a.rows().iter().map(|r| r.iter().zip(u).map(|(x, y)| Z::from(*x) * y).sum()).collect()
}

/// Index of the lattice spanned by `basis` inside its rational span.
fn saturation_index(basis: &[Vec<Z>]) -> Z {
    let cols: Vec<Vec<Z>> = linalg::transpose(basis);
    linalg::smith_diagonal(&cols).iter().fold(Z::one(), |acc, d| acc * d.abs())
}

#[test]
fn kernel_of_five_point_matches_fixed_basis() {
    let a = five_point();
    let k = kernel_basis(&a);
    assert_eq!(k.len(), 2);
    for u in &k {
        assert!(apply(&a, u).iter().all(|x| x.is_zero()));
    }
    assert_eq!(saturation_index(&k), Z::one());
    // same lattice as the fixed basis: each fixed vector is an integer combination and vice versa
    let fixed = vec![z(&[-1, 2, -1, 0, 0]), z(&[-2, 0, 0, 1, 1])];
    let mut both = k.clone();
    both.extend(fixed.iter().cloned());
    assert_eq!(linalg::smith_diagonal(&linalg::transpose(&both)), vec![Z::one(), Z::one()]);
    assert_eq!(saturation_index(&fixed), Z::one());
}

#[test]
fn kernel_of_identity_plus_ones() {
    let a = Configuration::new(vec![vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, 1]]).unwrap();
    let k = kernel_basis(&a);
    assert_eq!(k.len(), 1);
    let u = &k[0];
    let s = if u[3].is_negative() { Z::one() } else { -Z::one() };
    let u: Vec<Z> = u.iter().map(|x| x * &s).collect();
    assert_eq!(u, z(&[1, 1, 1, -1]));
}

#[test]
fn kernel_of_appell() {
    let a = appell();
    let k = kernel_basis(&a);
    assert_eq!(k.len(), 2);
    for u in &k {
        assert!(apply(&a, u).iter().all(|x| x.is_zero()));
    }
}

#[test]
fn random_kernels_are_saturated() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut done = 0;
    while done < 40 {
        let n = rng.gen_range(1..=3);
        let nn = rng.gen_range(n + 1..=6);
        let rows: Vec<Vec<i64>> = (0..n).map(|_| (0..nn).map(|_| rng.gen_range(-4..=4)).collect()).collect();
        let Ok(a) = Configuration::new(rows) else { continue };
        let k = kernel_basis(&a);
        assert_eq!(k.len(), nn - n);
        for u in &k {
            assert!(apply(&a, u).iter().all(|x| x.is_zero()));
        }
        assert_eq!(saturation_index(&k), Z::one(), "{:?}", a.rows());
        done += 1;
    }
}

#[test]
fn simplex_examples() {
    let a = five_point();
    assert_eq!(simplex_data(&a, &[1, 3, 4]).unwrap().det_abs(), Z::from(2));
    let sd = simplex_data(&a, &[2, 4, 5]).unwrap();
    assert_eq!(sd.det_abs(), Z::from(2));
    let m = a.submatrix(&sd.sigma);
    assert_eq!(linalg::mat_mul(&sd.inv, &m), linalg::identity(3));
    // p-values of a(1) sum to one
    let pa: Vec<Q> = sd.sigma.iter().map(|&i| p(&sd, i, a.col(1)).unwrap()).collect();
    assert_eq!(pa.iter().fold(Q::zero(), |x, y| x + y), Q::one());
    assert!(matches!(p(&sd, 1, a.col(1)), Err(gkz::GkzError::IndexNotInSimplex(..))));
    for &i in &sd.sigma {
        for &j in &sd.sigma {
            let v = p(&sd, j, a.col(i)).unwrap();
            assert_eq!(v, if i == j { Q::one() } else { Q::zero() });
        }
    }
    assert!(matches!(simplex_data(&a, &[1, 2, 3]), Err(gkz::GkzError::DegenerateSimplex(_))));
    let b = Configuration::new(vec![vec![1, 0, 0, 1], vec![0, 1, 0, 1], vec![0, 0, 1, -1]]).unwrap();
    let sd = simplex_data(&b, &[1, 2, 3]).unwrap();
    assert_eq!(sd.inv, linalg::identity(3));
    assert_eq!(sd.det_abs(), Z::one());
}

#[test]
fn homogeneous_p_sums_are_one() {
    for a in [five_point(), appell()] {
        for s in gkz::geometry::combinations(&a.labels(), a.n()) {
            let Ok(sd) = simplex_data(&a, &s) else { continue };
            for j in a.labels() {
                let total = sd.coords(a.col(j)).into_iter().fold(Q::zero(), |x, y| x + y);
                assert_eq!(total, Q::one());
            }
        }
    }
}

#[test]
fn five_point_flip_representatives() {
    let a = five_point();
    let sd = simplex_data(&a, &[2, 4, 5]).unwrap();
    let q = quotient_reps(&a, &sd, Some(1)).unwrap();
    assert_eq!(q.reps.len(), 2);
    assert!(!same_class(&sd, &[0, 0, 0], &[0, 1, 0]));
    for k in &q.reps {
        let level = sector_level(&a, &sd, k, 1);
        assert!(level >= Q::zero() && level < Q::one());
    }
    let unit = simplex_data(&a, &[1, 2, 4]).unwrap();
    assert_eq!(quotient_reps(&a, &unit, None).unwrap().reps, vec![vec![0, 0, 0]]);
}

#[test]
fn normalization_needs_homogeneity() {
    let a = Configuration::new(vec![vec![1, 0, 0, 1, 1], vec![0, 1, 0, 1, 0], vec![0, 0, 1, -1, -1]]).unwrap();
    let sd = simplex_data(&a, &[1, 2, 3]).unwrap();
    assert!(matches!(quotient_reps(&a, &sd, Some(4)), Err(gkz::GkzError::NormalizationImpossible)));
    assert!(quotient_reps(&a, &sd, None).is_ok());
}

fn box_points(n: usize, d: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out.into_iter().flat_map(|p| (0..d).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out
}

#[test]
fn representative_counts_against_snf() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut done = 0;
    while done < 30 {
        let m: Vec<Vec<i64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(-3..=3)).collect()).collect();
        let d = linalg::det(&m.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect::<Vec<_>>());
        if d.is_zero() || d.abs() > qi(12) {
            continue;
        }
        let d = d.abs().to_integer();
        let rows: Vec<Vec<i64>> = m.iter().map(|r| [r.clone(), vec![r.iter().sum::<i64>() + 1]].concat()).collect();
        let Ok(a) = Configuration::new(rows) else { continue };
        let sd = simplex_data(&a, &[1, 2, 3]).unwrap();
        let zm: Vec<Vec<Z>> = m.iter().map(|r| z(r)).collect();
        let snf = linalg::smith_diagonal(&zm).iter().fold(Z::one(), |acc, x| acc * x.abs());
        assert_eq!(snf, d);
        // brute force: classes of Z^3 / Z tA met inside the box [0, d)^3
        let dd = i64::try_from(&d).unwrap();
        let mut classes: Vec<Vec<i64>> = Vec::new();
        for k in box_points(3, dd) {
            if classes.iter().all(|c| !same_class(&sd, c, &k)) {
                classes.push(k);
            }
        }
        assert_eq!(Z::from(classes.len()), d);
        let q = quotient_reps(&a, &sd, None).unwrap();
        assert_eq!(Z::from(q.reps.len()), d);
        for (x, k) in q.reps.iter().enumerate() {
            for l in &q.reps[x + 1..] {
                assert!(!same_class(&sd, k, l));
            }
        }
        // the pairing tk A^{-1} v mod Z separates every pair of classes
        let vs: Vec<Vec<Q>> = box_points(3, dd).into_iter().map(|v| v.into_iter().map(qi).collect()).collect();
        for (x, k) in q.reps.iter().enumerate() {
            for l in &q.reps[x + 1..] {
                let diff: Vec<Q> = k.iter().zip(l).map(|(p, q)| qi(p - q)).collect();
                let sep = vs.iter().any(|v| !linalg::dot(&diff, &sd.coords(v)).is_integer());
                assert!(sep);
            }
        }
        done += 1;
    }
}

#[test]
fn lattice_indices() {
    assert_eq!(lattice_index(&appell()), Z::one());
    assert_eq!(lattice_index(&five_point()), Z::one());
    assert_eq!(lattice_index(&Configuration::new(vec![vec![2, 4]]).unwrap()), Z::from(2));
    let b = Configuration::new(vec![vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
    assert_eq!(lattice_index(&b), Z::one());
}

#[test]
fn configuration_json() {
    let a = Configuration::from_json(r#"{"n": 3, "N": 5, "rows": [[1,1,1,1,1],[0,1,2,0,0],[0,0,0,1,-1]]}"#).unwrap();
    assert_eq!(a, five_point());
    let s = serde_json::to_string(&a).unwrap();
    assert_eq!(Configuration::from_json(&s).unwrap(), a);
    assert!(Configuration::from_json(r#"{"n": 2, "N": 5, "rows": [[1,1,1,1,1],[0,1,2,0,0],[0,0,0,1,-1]]}"#).is_err());
}
