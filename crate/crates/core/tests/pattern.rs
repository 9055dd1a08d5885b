use delone_fermions::pattern::*;
use delone_fermions::{rng, Error};
use proptest::prelude::*;
use rand::Rng;
use std::f64::consts::PI;

fn brute_set_distance(x: &[f64], set: &[Vec<f64>]) -> f64 {
    set.iter().map(|y| ((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance of `A ∪ S` and `B ∪ S` with the circle `S` replaced by a dense sample.
fn sampled_hausdorff_2d(a: &[Vec<f64>], b: &[Vec<f64>], rho: f64, samples: usize) -> f64 {
    let circle: Vec<Vec<f64>> = (0..samples).map(|k| {
        let t = 2.0 * PI * k as f64 / samples as f64;
        vec![rho * t.cos(), rho * t.sin()]
    }).collect();
    let au: Vec<Vec<f64>> = a.iter().chain(&circle).cloned().collect();
    let bu: Vec<Vec<f64>> = b.iter().chain(&circle).cloned().collect();
    let d1 = a.iter().map(|x| brute_set_distance(x, &bu)).fold(0.0, f64::max);
    let d2 = b.iter().map(|x| brute_set_distance(x, &au)).fold(0.0, f64::max);
    d1.max(d2)
}

fn in_disc<R: Rng>(r: &mut R, rho: f64) -> Vec<f64> {
    loop {
        let x = vec![r.gen_range(-rho..rho), r.gen_range(-rho..rho)];
        if norm(&x) < rho {
            return x;
        }
    }
}

#[test]
fn hausdorff_matches_brute_force() {
    let mut r = rng::seeded(3);
    // In one dimension the sphere is the pair {±ρ}, so the oracle is exact.
    for _ in 0..200 {
        let rho = r.gen_range(1.0..5.0);
        let a: Vec<Vec<f64>> = (0..r.gen_range(0..6)).map(|_| vec![r.gen_range(-rho..rho)]).collect();
        let b: Vec<Vec<f64>> = (0..r.gen_range(0..6)).map(|_| vec![r.gen_range(-rho..rho)]).collect();
        let sa: Vec<Vec<f64>> = a.iter().cloned().chain([vec![rho], vec![-rho]]).collect();
        let sb: Vec<Vec<f64>> = b.iter().cloned().chain([vec![rho], vec![-rho]]).collect();
        let one = |x: &Vec<f64>, s: &[Vec<f64>]| s.iter().map(|y| (x[0] - y[0]).abs()).fold(f64::INFINITY, f64::min);
        let oracle = sa.iter().map(|x| one(x, &sb)).fold(0.0, f64::max).max(sb.iter().map(|x| one(x, &sa)).fold(0.0, f64::max));
        assert!((hausdorff(&a, &b, Some(rho)).unwrap() - oracle).abs() < 1e-14);
    }
    for _ in 0..40 {
        let rho = r.gen_range(1.0..4.0);
        let (ka, kb) = (r.gen_range(1..6), r.gen_range(1..6));
        let a: Vec<Vec<f64>> = (0..ka).map(|_| in_disc(&mut r, rho)).collect();
        let b: Vec<Vec<f64>> = (0..kb).map(|_| in_disc(&mut r, rho)).collect();
        let samples = 20000;
        let oracle = sampled_hausdorff_2d(&a, &b, rho, samples);
        let err = rho * PI / samples as f64;
        let got = hausdorff(&a, &b, Some(rho)).unwrap();
        assert!(got <= oracle + 1e-12 && oracle - got <= err, "{got} {oracle}");
        let plain = hausdorff(&a, &b, None).unwrap();
        assert!(plain >= got - 1e-15);
    }
    assert!(matches!(hausdorff(&[], &[vec![0.0]], None), Err(Error::EmptySet)));
    assert_eq!(hausdorff(&[], &[], Some(1.0)).unwrap(), 0.0);
}

/// For a pattern and its copy shifted by `δ`, `d_H(Λ[r], Λ'[r]) = δ` once `r > δ`, so the
/// condition `d_H < 1/r` holds exactly for `r < 1/δ` and `D = δ/(1+δ)`.
#[test]
fn metric_on_shifted_copies() {
    let mut r = rng::seeded(17);
    for (dim, window) in [(1usize, 40.0), (2, 14.0)] {
        let base = generate(&PatternKind::Periodic { dim }, window, 0).unwrap();
        for _ in 0..6 {
            let delta = r.gen_range(0.08..0.3);
            let t = r.gen_range(0.0..2.0 * PI);
            let shift: Vec<f64> = if dim == 1 { vec![delta] } else { vec![delta * t.cos(), delta * t.sin()] };
            let moved = base.translated(&shift);
            let rep = pattern_metric_report(&base, &moved, 64).unwrap();
            assert!(rep.comparison_radius > 1.0 / delta);
            assert!((rep.value - delta / (1.0 + delta)).abs() < 1e-9, "{} {}", rep.value, delta / (1.0 + delta));
        }
    }
}

#[test]
fn metric_symmetry_and_floor() {
    let mut pairs = 0;
    for seed in 0..25u64 {
        let p = generate(&PatternKind::RandomDisplaced { dim: 2, lambda: 0.4 }, 6.0, seed).unwrap();
        let q = generate(&PatternKind::RandomDisplaced { dim: 2, lambda: 0.4 }, 6.0, seed + 100).unwrap();
        let d_pq = pattern_metric(&p, &q, 48).unwrap();
        assert_eq!(d_pq, pattern_metric(&q, &p, 48).unwrap());
        assert!(d_pq > 0.0 && d_pq <= 1.0);
        let floor = 1.0 / (1.0 + p.origin_reach());
        assert!((pattern_metric(&p, &p, 48).unwrap() - floor).abs() < 1e-12);
        assert!(d_pq >= floor - 1e-12);
        pairs += 2;
    }
    assert_eq!(pairs, 50);
    let a = generate(&PatternKind::Periodic { dim: 1 }, 5.0, 0).unwrap();
    let b = generate(&PatternKind::Periodic { dim: 2 }, 5.0, 0).unwrap();
    assert!(matches!(pattern_metric(&a, &b, 32), Err(Error::DimensionMismatch(1, 2))));
    assert!(pattern_metric(&a, &a, 1).is_err());
}

#[test]
fn generators_produce_delone_sets() {
    let kinds = [
        PatternKind::Periodic { dim: 1 },
        PatternKind::Periodic { dim: 2 },
        PatternKind::Periodic { dim: 3 },
        PatternKind::RandomDisplaced { dim: 2, lambda: 0.5 },
        PatternKind::PerturbedPeriodic { dim: 2, epsilon: 0.3 },
        PatternKind::PerturbedPeriodic { dim: 1, epsilon: 0.45 },
        PatternKind::TripletRotation { theta: 0.3, spacing: 4.0, r: 1.0, count: 7 },
    ];
    for kind in &kinds {
        for seed in 0..5 {
            let p = generate(kind, 6.0, seed).unwrap();
            let rep = validate_delone(&p);
            assert!(rep.valid, "{kind:?}: {:?}", rep.violations.first());
        }
    }
    assert!(generate(&PatternKind::RandomDisplaced { dim: 2, lambda: 1.0 }, 5.0, 0).is_err());
    assert!(generate(&PatternKind::PerturbedPeriodic { dim: 2, epsilon: 0.5 }, 5.0, 0).is_err());
    assert!(generate(&PatternKind::TripletRotation { theta: 0.3, spacing: 1.0, r: 1.0, count: 3 }, 5.0, 0).is_err());
    assert!(generate(&PatternKind::Periodic { dim: 2 }, 0.0, 0).is_err());
}

#[test]
fn validator_reports_violations() {
    let mut p = generate(&PatternKind::Periodic { dim: 2 }, 5.0, 0).unwrap();
    p.points.push(vec![0.2, 0.0]);
    assert!(validate_delone(&p).violations.iter().any(|v| matches!(v, Violation::Discreteness { .. })));
    let mut q = generate(&PatternKind::Periodic { dim: 2 }, 5.0, 0).unwrap();
    q.points.retain(|x| norm(x) > 1.5);
    assert!(validate_delone(&q).violations.iter().any(|v| matches!(v, Violation::Density { .. })));
    let mut d = generate(&PatternKind::Periodic { dim: 1 }, 5.0, 0).unwrap();
    d.points.push(vec![1.0]);
    assert!(validate_delone(&d).violations.iter().any(|v| matches!(v, Violation::Duplicate { .. })));
}

#[test]
fn serialization_round_trips() {
    let p = generate(&PatternKind::PerturbedPeriodic { dim: 2, epsilon: 0.2 }, 5.0, 9).unwrap();
    assert_eq!(Pattern::from_json(&p.to_json().unwrap()).unwrap(), p);
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    let back = Pattern::read_csv(std::io::Cursor::new(buf), (p.r, p.big_r), p.window_radius).unwrap();
    assert_eq!(back.points, p.points);
    let dir = std::env::temp_dir().join(format!("pattern-rt-{}.json", std::process::id()));
    p.save(&dir).unwrap();
    assert_eq!(Pattern::load(&dir).unwrap(), p);
    std::fs::remove_file(dir).ok();
    assert!(Pattern::read_csv(std::io::Cursor::new("1,x\n"), (0.1, 1.0), 3.0).is_err());
}

#[test]
fn truncation_rules() {
    let p = generate(&PatternKind::Periodic { dim: 2 }, 4.0, 0).unwrap();
    let t = truncate(&p, 1.5).unwrap();
    assert_eq!(t.points.len(), 9);
    assert!(matches!(truncate(&p, 4.5), Err(Error::WindowExhausted(_))));
    assert!(truncate(&p, 0.0).is_err());
    let u = truncate(&p, 1.0).unwrap();
    assert!(truncated_distance(&t, &u).is_err());
    let moved = p.translated(&[1.0, 0.0]);
    assert_eq!(moved.origin_reach(), 3.0);
    assert!(truncate(&moved, 3.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric_on_finite_sets(seed in any::<u64>()) {
        let mut r = rng::seeded(seed);
        let mut set = |k: usize| -> Vec<Vec<f64>> { (0..k).map(|_| vec![r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0)]).collect() };
        let (a, b, c) = (set(4), set(5), set(3));
        let ab = hausdorff(&a, &b, Some(5.0)).unwrap();
        prop_assert_eq!(ab, hausdorff(&b, &a, Some(5.0)).unwrap());
        prop_assert_eq!(hausdorff(&a, &a, Some(5.0)).unwrap(), 0.0);
        prop_assert!(ab <= hausdorff(&a, &c, Some(5.0)).unwrap() + hausdorff(&c, &b, Some(5.0)).unwrap() + 1e-12);
    }
}
