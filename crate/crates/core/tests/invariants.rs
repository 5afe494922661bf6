use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kobpath::cvec::{self, CVec};
use kobpath::metric::DiscAutomorphism;
use kobpath::numerics::optimize::segment_length;
use kobpath::numerics::{adaptive_simpson, hausdorff, interp_linear, max_spacing, monotone_interp_invert, QuadConfig};
use kobpath::paths::{collapse, reparam_map, IntervalSet, Path, Segment, SegmentKind};
use kobpath::properties::{verify_almost_geodesic, verify_chord_arc, Condition, GeodesicParams};
use kobpath::reparam::{arc_length, invert, unit_speed_reparametrize, ReparamConfig};
use kobpath::{fixtures, Domain, OptConfig};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(0x6b6f_6270), failure_persistence: None, ..ProptestConfig::default() }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A point near the fixture interior point of `domain`, displaced by at most
/// 30% of its boundary distance.
fn point_near(domain: &Domain, offsets: &[f64]) -> CVec {
    let x = fixtures::interior_point(domain);
    let r = 0.3 * domain.boundary_distance(&x) / (x.len() as f64).sqrt();
    x.iter().enumerate().map(|(k, z)| z + c(r * offsets[2 * k], r * offsets[2 * k + 1])).collect()
}

fn offsets() -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, 8)
}

fn domain_index() -> impl Strategy<Value = usize> {
    0..fixtures::fixture_domains().len()
}

fn disc_point() -> impl Strategy<Value = Complex64> {
    (0.0..0.9f64, -3.2..3.2f64).prop_map(|(r, a)| Complex64::from_polar(r, a))
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn metric_is_absolutely_homogeneous(d in domain_index(), o in offsets(), v in offsets(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let domain = &fixtures::fixture_domains()[d];
        let z = point_near(domain, &o);
        let v: CVec = (0..domain.dim()).map(|k| c(v[2 * k], v[2 * k + 1])).collect();
        let s = c(re, im);
        let scaled: CVec = v.iter().map(|x| x * s).collect();
        let k = domain.infinitesimal_metric(&z, &v).unwrap();
        let ks = domain.infinitesimal_metric(&z, &scaled).unwrap();
        prop_assert!((ks - s.norm() * k).abs() <= 1e-12 * (1.0 + ks));
    }

    #[test]
    fn distance_is_symmetric_and_satisfies_the_triangle_inequality(d in domain_index(), a in offsets(), b in offsets(), e in offsets()) {
        let domain = &fixtures::fixture_domains()[d];
        let (x, y, z) = (point_near(domain, &a), point_near(domain, &b), point_near(domain, &e));
        let dxy = domain.distance(&x, &y).unwrap();
        prop_assert!((dxy - domain.distance(&y, &x).unwrap()).abs() <= 1e-12 * (1.0 + dxy));
        prop_assert!(domain.distance(&x, &x).unwrap() <= 1e-12);
        let dxz = domain.distance(&x, &z).unwrap();
        let dzy = domain.distance(&z, &y).unwrap();
        prop_assert!(dxy <= dxz + dzy + 1e-12);
    }

    #[test]
    fn distance_never_exceeds_the_length_of_a_joining_segment(d in domain_index(), a in offsets(), b in offsets()) {
        let domain = &fixtures::fixture_domains()[d];
        let (x, y) = (point_near(domain, &a), point_near(domain, &b));
        let k = domain.distance(&x, &y).unwrap();
        prop_assert!(k <= segment_length(domain, &x, &y, 1e-12) + 1e-9);
    }

    #[test]
    fn disc_automorphisms_are_isometries(z in disc_point(), w in disc_point(), a in disc_point(), theta in -3.2..3.2f64, v in disc_point()) {
        let disc = Domain::UnitDisc;
        let phi = DiscAutomorphism { rotation: theta, a };
        let k0 = disc.distance(&[z], &[w]).unwrap();
        let k1 = disc.distance(&[phi.apply(z)], &[phi.apply(w)]).unwrap();
        prop_assert!((k1 - k0).abs() <= 1e-10 * k0.max(1e-300));
        let m0 = disc.infinitesimal_metric(&[z], &[v]).unwrap();
        let m1 = disc.infinitesimal_metric(&[phi.apply(z)], &[phi.derivative(z) * v]).unwrap();
        prop_assert!((m1 - m0).abs() <= 1e-10 * m0.max(1e-300));
    }

    #[test]
    fn ball_metric_is_invariant_under_unitary_maps(o in offsets(), v in offsets(), t0 in -3.2..3.2f64, t1 in -3.2..3.2f64) {
        let ball = Domain::UnitBall(2);
        let z = point_near(&ball, &o);
        let v: CVec = vec![c(v[0], v[1]), c(v[2], v[3])];
        // Coordinate swap composed with a diagonal phase.
        let u = |x: &CVec| vec![Complex64::from_polar(1.0, t0) * x[1], Complex64::from_polar(1.0, t1) * x[0]];
        let k0 = ball.infinitesimal_metric(&z, &v).unwrap();
        let k1 = ball.infinitesimal_metric(&u(&z), &u(&v)).unwrap();
        prop_assert!((k1 - k0).abs() <= 1e-12 * (1.0 + k0));
    }

    #[test]
    fn quadrature_is_additive(split in 0.01..0.49f64) {
        let cfg = QuadConfig::default();
        let f = |t: f64| 1.0 / (1.0 - t * t);
        let whole = adaptive_simpson(f, 0.0, 0.5, &cfg).unwrap();
        let parts = adaptive_simpson(f, 0.0, split, &cfg).unwrap() + adaptive_simpson(f, split, 0.5, &cfg).unwrap();
        prop_assert!((whole - parts).abs() <= 2.0 * cfg.tol);
    }

    #[test]
    fn linear_inversion_round_trips(steps in proptest::collection::vec(0.01..1.0f64, 2..20), frac in 0.0..1.0f64) {
        let grid: Vec<f64> = (0..steps.len()).map(|k| k as f64).collect();
        let values: Vec<f64> = steps.iter().scan(0.0, |acc, s| { *acc += s; Some(*acc) }).collect();
        let s = values[0] + frac * (values[values.len() - 1] - values[0]);
        let t = monotone_interp_invert(&grid, &values, s).unwrap();
        prop_assert!((interp_linear(&grid, &values, t) - s).abs() <= 1e-12);
    }

    #[test]
    fn collapse_composes_back_to_the_original(a in 0.2..0.9f64, len in 0.05..0.5f64, b in 1.5..2.0f64, len2 in 0.05..0.4f64) {
        let (p0, p1, p2, p3) = (c(0.0, 0.0), c(0.3, 0.1), c(-0.2, 0.4), c(0.1, -0.3));
        let (a2, b2) = (b, b + len2);
        let horizon = b2 + 0.7;
        let segs = vec![
            Segment { start: 0.0, end: a, kind: SegmentKind::Affine { from: vec![p0], to: vec![p1] } },
            Segment { start: a, end: a + len, kind: SegmentKind::Constant(vec![p1]) },
            Segment { start: a + len, end: a2, kind: SegmentKind::Affine { from: vec![p1], to: vec![p2] } },
            Segment { start: a2, end: b2, kind: SegmentKind::Constant(vec![p2]) },
            Segment { start: b2, end: horizon, kind: SegmentKind::Affine { from: vec![p2], to: vec![p3] } },
        ];
        let path = Path::new(Domain::UnitDisc, horizon, segs).unwrap();
        let zeros = IntervalSet { intervals: vec![(a, a + len), (a2, b2)], points: vec![] };
        let (aux, plan) = collapse(&path, &zeros).unwrap();
        prop_assert!((plan.tau - (horizon - len - len2)).abs() <= 1e-12);
        let map = reparam_map(&plan);
        let mut prev = 0.0;
        for k in 0..=200 {
            let t = (horizon * k as f64 / 200.0).min(horizon);
            let at = map.eval(t);
            prop_assert!(at >= prev && at <= plan.tau + 1e-15);
            prev = at;
            prop_assert!(cvec::dist(&path.eval(t).unwrap(), &aux.eval(at.min(plan.tau)).unwrap()) <= 1e-12);
        }
    }
}

fn random_path(seed: u64, pick: usize) -> Path {
    let domains = [Domain::UnitDisc, Domain::Polydisc(vec![1.0, 1.0]), Domain::UnitBall(2)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    fixtures::random_path(&mut rng, &domains[pick % 3])
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn sigma_has_unit_speed_almost_everywhere(seed in any::<u64>(), pick in 0..3usize) {
        let result = unit_speed_reparametrize(&random_path(seed, pick), &ReparamConfig::default()).unwrap();
        prop_assert!(result.diagnostics.fraction_unit_speed >= 0.99, "{:?}", result.diagnostics);
        prop_assert_eq!(result.sigma.horizon(), result.table.total);
    }

    #[test]
    fn image_is_preserved(seed in any::<u64>(), pick in 0..3usize) {
        let path = random_path(seed, pick);
        let result = unit_speed_reparametrize(&path, &ReparamConfig::default()).unwrap();
        let (a, b) = (path.image_samples(512), result.sigma.image_samples(512));
        prop_assert!(hausdorff(&a, &b) <= 2.0 * max_spacing(&a).max(max_spacing(&b)));
    }

    #[test]
    fn inversion_round_trips_and_is_monotone(seed in any::<u64>(), pick in 0..3usize, us in proptest::collection::vec(0.0..1.0f64, 1000)) {
        let path = random_path(seed, pick);
        let cfg = ReparamConfig::default();
        let table = arc_length(&path, &cfg.quad).unwrap();
        let eps = cfg.eps_inv_for(table.total);
        let mut s: Vec<f64> = us.iter().map(|u| u * table.total).collect();
        s.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for s in s {
            let t = invert(&table, s, eps).unwrap();
            prop_assert!((table.value_at(t) - s).abs() <= eps);
            prop_assert!(t >= prev);
            prev = t;
        }
    }

    /// In the disc the Euclidean speed of a unit-speed curve is `1 − |σ|² ≤ 1`.
    #[test]
    fn disc_sigma_is_lipschitz(seed in any::<u64>(), pairs in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1000)) {
        let result = unit_speed_reparametrize(&random_path(seed, 0), &ReparamConfig::default()).unwrap();
        let ell = result.length();
        let pairs: Vec<(f64, f64)> = pairs.iter().map(|(s, t)| (s * ell, t * ell)).collect();
        let ratio = kobpath::reparam::lipschitz_ratio(&result.sigma, &pairs).unwrap();
        prop_assert!(ratio <= 1.0 + 1e-4, "{}", ratio);
    }

    #[test]
    fn reparametrisation_is_idempotent(seed in any::<u64>(), pick in 0..3usize) {
        let cfg = ReparamConfig::default();
        let once = unit_speed_reparametrize(&random_path(seed, pick), &cfg).unwrap();
        let twice = unit_speed_reparametrize(&once.sigma, &cfg).unwrap();
        let ell = once.length();
        prop_assert!((twice.length() - ell).abs() <= cfg.quad.tol * once.sigma.segments().len() as f64);
        let mut worst: f64 = 0.0;
        for u in kobpath::numerics::uniform_grid(ell, 257) {
            worst = worst.max(cvec::dist(&once.sigma.eval(u).unwrap(), &twice.sigma.eval(u.min(twice.length())).unwrap()));
        }
        prop_assert!(worst <= 1e-6, "{}", worst);
    }

    #[test]
    fn verdicts_are_monotone_in_the_parameters(seed in any::<u64>(), pick in 0..3usize, dl in 0.0..2.0f64, dk in 0.0..1.0f64) {
        let path = random_path(seed, pick);
        let base = GeodesicParams::new(1.0 + dl, dk).unwrap();
        let bigger = GeodesicParams::new(1.5 + dl, 0.5 + dk).unwrap();
        let ca = (verify_chord_arc(&path, base, 16, 1e-6).unwrap(), verify_chord_arc(&path, bigger, 16, 1e-6).unwrap());
        prop_assert!(!ca.0.passed() || ca.1.passed());
        prop_assert!(ca.1.worst_slack <= ca.0.worst_slack);
        let ag = (verify_almost_geodesic(&path, base, 16, 1e-6).unwrap(), verify_almost_geodesic(&path, bigger, 16, 1e-6).unwrap());
        prop_assert!(!ag.0.passed() || ag.1.passed());
    }

    #[test]
    fn worst_slack_grows_under_nested_refinement(seed in any::<u64>(), pick in 0..3usize) {
        let path = random_path(seed, pick);
        let p = GeodesicParams::new(1.0, 0.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for n in [5, 9, 17, 33] {
            let r = verify_chord_arc(&path, p, n, 1e-6).unwrap();
            prop_assert!(r.worst_slack >= prev);
            prev = r.worst_slack;
        }
    }

    /// At `λ = 1`, `l − K` only grows when the interval grows (triangle
    /// inequality), so the worst pair is the endpoint pair on every grid.
    #[test]
    fn sigma_preserves_the_chord_arc_slack(seed in any::<u64>(), pick in 0..3usize, margin in 0.0..0.3f64) {
        let path = random_path(seed, pick);
        let kappa = verify_chord_arc(&path, GeodesicParams::new(1.0, 0.0).unwrap(), 64, 0.0).unwrap().worst_slack.max(0.0);
        let params = GeodesicParams::new(1.0, kappa + margin).unwrap();
        let original = verify_chord_arc(&path, params, 64, 1e-6).unwrap();
        let result = unit_speed_reparametrize(&path, &ReparamConfig::default()).unwrap();
        let on_sigma = verify_chord_arc(&result.sigma, params, 64, 1e-6).unwrap();
        prop_assert!(on_sigma.worst_slack <= original.worst_slack + 1e-6);
        // Unit speed turns the lower distance bound into the chord-arc bound.
        let ag = verify_almost_geodesic(&result.sigma, params, 64, 1e-6).unwrap();
        let lower = ag.rows.iter().filter(|r| r.condition == Condition::LowerDistance).map(|r| r.slack).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(lower <= on_sigma.worst_slack + 1e-6 * (1.0 + result.length()));
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn refinement_lengths_never_increase(z in disc_point(), w in disc_point()) {
        prop_assume!((z - w).norm() > 1e-3);
        let r = kobpath::metric::optimize_joining_path(&Domain::UnitDisc, &[z], &[w], &OptConfig::default()).unwrap();
        for pair in r.level_lengths.windows(2) {
            prop_assert!(pair[1] <= pair[0] + 1e-12);
        }
        prop_assert!(r.length >= Domain::UnitDisc.distance(&[z], &[w]).unwrap() - 1e-9);
    }
}
