//! Randomised invariants. Proptest drives the seeds and parameters; the
//! states and fields themselves come from the crate's seeded generators so
//! every failure replays from the printed inputs.

use std::f64::consts::PI;

use proptest::prelude::*;

use dglab::evolution::{Propagator, Scheme};
use dglab::functionals::{dg_rhs, r_functional, LocalFields, Regularisation};
use dglab::gauge::{gauge_apply, transformed_momentum, GaugeParams};
use dglab::grid::spectral::{forward, spectral_derivative};
use dglab::grid::{inner_product, l2_norm, make_grid, sample, GridSpec, InitialState, ScalarFieldSpec, WaveFunction};
use dglab::kinematics::{
    apply_momentum, catalog_list, catalog_lookup, homomorphism_residual, lie_bracket, CatalogEntry, CommutatorCheck,
    DGParams,
};
use dglab::random::{band_limited_state, node_free_state, real_trig_poly, rng, trig_vector_field};
use dglab::C64;

fn grid1() -> GridSpec {
    make_grid(1, 64, 2.0 * PI).unwrap()
}

fn grid2() -> GridSpec {
    make_grid(2, 16, 2.0 * PI).unwrap()
}

fn grid(two_d: bool) -> GridSpec {
    if two_d {
        grid2()
    } else {
        grid1()
    }
}

fn dist(grid: &GridSpec, a: &[C64], b: &[C64]) -> f64 {
    let d: Vec<C64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    l2_norm(grid, &d)
}

fn rel(a: &WaveFunction, b: &WaveFunction) -> f64 {
    dist(a.grid(), a.values(), b.values()) / b.norm()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parseval(seed: u64, two_d: bool) {
        let g = grid(two_d);
        let psi = band_limited_state(&g, 5, &mut rng(seed)).unwrap();
        let hat = forward(&g, psi.values());
        let lhs: f64 = hat.iter().map(|z| z.norm_sqr()).sum();
        let rhs: f64 = psi.values().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.len() as f64;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn derivative_is_linear(seed: u64, a in -3.0..3.0f64, b in -3.0..3.0f64, two_d: bool) {
        let g = grid(two_d);
        let mut r = rng(seed);
        let f = band_limited_state(&g, 6, &mut r).unwrap();
        let h = band_limited_state(&g, 6, &mut r).unwrap();
        let comb: Vec<C64> = f.values().iter().zip(h.values()).map(|(x, y)| a * x + b * y).collect();
        for axis in 0..g.dim() {
            for order in 1..=2 {
                let lhs = spectral_derivative(&g, &comb, axis, order).unwrap();
                let df = spectral_derivative(&g, f.values(), axis, order).unwrap();
                let dh = spectral_derivative(&g, h.values(), axis, order).unwrap();
                let rhs: Vec<C64> = df.iter().zip(&dh).map(|(x, y)| a * x + b * y).collect();
                prop_assert!(dist(&g, &lhs, &rhs) < 1e-10);
            }
        }
    }

    #[test]
    fn second_derivative_is_first_composed(seed: u64, two_d: bool) {
        let g = grid(two_d);
        let psi = band_limited_state(&g, 3, &mut rng(seed)).unwrap();
        for axis in 0..g.dim() {
            let d1 = spectral_derivative(&g, psi.values(), axis, 1).unwrap();
            let d11 = spectral_derivative(&g, &d1, axis, 1).unwrap();
            let d2 = spectral_derivative(&g, psi.values(), axis, 2).unwrap();
            prop_assert!(dist(&g, &d11, &d2) < 1e-10);
        }
    }

    #[test]
    fn momentum_is_symmetric(seed: u64, d in -5.0..5.0f64, two_d: bool) {
        let g = grid(two_d);
        let mut r = rng(seed);
        let psi = band_limited_state(&g, 4, &mut r).unwrap();
        let phi = band_limited_state(&g, 4, &mut r).unwrap();
        let x = trig_vector_field(&g, 3, &mut r).unwrap();
        let params = DGParams::default().with_d(d);
        let lhs = inner_product(&phi, &apply_momentum(&x, &psi, &params).unwrap()).unwrap();
        let rhs = inner_product(&apply_momentum(&x, &phi, &params).unwrap(), &psi).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn momentum_is_linear(seed: u64, a_re in -2.0..2.0f64, a_im in -2.0..2.0f64, d in -1.0..1.0f64) {
        let g = grid1();
        let mut r = rng(seed);
        let psi = band_limited_state(&g, 4, &mut r).unwrap();
        let phi = band_limited_state(&g, 4, &mut r).unwrap();
        let x = trig_vector_field(&g, 3, &mut r).unwrap();
        let params = DGParams::default().with_d(d);
        let a = C64::new(a_re, a_im);
        let comb = psi.with_values(psi.values().iter().zip(phi.values()).map(|(p, q)| a * p + q).collect());
        let lhs = apply_momentum(&x, &comb, &params).unwrap();
        let pp = apply_momentum(&x, &psi, &params).unwrap();
        let pq = apply_momentum(&x, &phi, &params).unwrap();
        let rhs: Vec<C64> = pp.values().iter().zip(pq.values()).map(|(p, q)| a * p + q).collect();
        prop_assert!(dist(&g, lhs.values(), &rhs) < 1e-10);
    }

    #[test]
    fn commutators_hold_for_every_d(seed: u64, d in -10.0..10.0f64, two_d: bool) {
        let g = grid(two_d);
        let mut r = rng(seed);
        let states: Vec<_> = (0..3).map(|_| band_limited_state(&g, 3, &mut r).unwrap()).collect();
        let x = trig_vector_field(&g, 2, &mut r).unwrap();
        let y = trig_vector_field(&g, 2, &mut r).unwrap();
        let f = ScalarFieldSpec::Trig(real_trig_poly(&g, 2, 1.0, true, &mut r));
        let h = ScalarFieldSpec::Trig(real_trig_poly(&g, 2, 1.0, true, &mut r));
        let params = DGParams::default().with_d(d);
        for check in [
            CommutatorCheck::Positions(&f, &h),
            CommutatorCheck::MomentumPosition(&x, &f),
            CommutatorCheck::Momenta(&x, &y),
        ] {
            let res = homomorphism_residual(check, &params, &states).unwrap();
            prop_assert!(res < 1e-8, "{check:?}: {res}");
        }
    }

    #[test]
    fn catalog_round_trips(idx in 0usize..10, upper: bool) {
        let entries = catalog_list();
        let e = &entries[idx % entries.len()];
        let name = if upper { e.system.to_uppercase() } else { format!("  {}  ", e.system) };
        prop_assert_eq!(catalog_lookup(&name).unwrap(), e);
        let back: CatalogEntry = serde_json::from_str(&serde_json::to_string(e).unwrap()).unwrap();
        prop_assert_eq!(&back, e);
    }

    #[test]
    fn continuity_holds_pointwise(seed: u64, d in -1.0..1.0f64, dp in -1.0..1.0f64, c in prop::array::uniform5(-1.0..1.0f64), two_d: bool) {
        let g = grid(two_d);
        let psi = node_free_state(&g, 2, &mut rng(seed)).unwrap();
        let params = DGParams { d, d_prime: dp, c, ..DGParams::default() };
        let dot = dg_rhs(&psi, &params, &Regularisation::default()).unwrap();
        let lf = LocalFields::new(&psi, 1.0, 1.0);
        let scale = max_abs(&lf.lap_rho) + max_abs(&lf.div_j0);
        for (i, (p, pd)) in psi.values().iter().zip(&dot).enumerate() {
            let drho = 2.0 * (p.conj() * pd).re;
            let want = -lf.div_j0[i] + d * lf.lap_rho[i];
            prop_assert!((drho - want).abs() < 1e-10 * scale, "{i}: {drho} vs {want}");
        }
    }

    #[test]
    fn functionals_are_homogeneous(seed: u64, mag in 0.01..100.0f64, arg in -PI..PI) {
        let g = grid1();
        let psi = node_free_state(&g, 2, &mut rng(seed)).unwrap();
        let scaled = psi.scaled(C64::from_polar(mag, arg));
        let params = DGParams::default();
        let reg = Regularisation::default();
        for i in 1..=5 {
            let a = r_functional(i, &psi, &params, &reg).unwrap();
            let b = r_functional(i, &scaled, &params, &reg).unwrap();
            let s = max_abs(&a).max(1.0);
            prop_assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-9 * s), "R{i}");
        }
    }

    #[test]
    fn functionals_commute_with_translation(seed: u64, shift in 1usize..64) {
        let g = grid1();
        let psi = node_free_state(&g, 3, &mut rng(seed)).unwrap();
        let n = g.len();
        let moved = psi.with_values((0..n).map(|i| psi.values()[(i + n - shift) % n]).collect());
        let params = DGParams::default();
        let reg = Regularisation::default();
        for i in 1..=5 {
            let a = r_functional(i, &psi, &params, &reg).unwrap();
            let b = r_functional(i, &moved, &params, &reg).unwrap();
            let s = max_abs(&a).max(1.0);
            prop_assert!((0..n).all(|j| (b[j] - a[(j + n - shift) % n]).abs() < 1e-9 * s), "R{i}");
        }
    }

    #[test]
    fn zero_couplings_give_the_linear_equation(seed: u64, c in prop::array::uniform5(-2.0..2.0f64), hbar in 0.5..2.0f64, mass in 0.5..2.0f64) {
        let g = grid1();
        let psi = band_limited_state(&g, 4, &mut rng(seed)).unwrap();
        let base = DGParams { hbar, mass, ..DGParams::default() };
        let lin = dg_rhs(&psi, &base, &Regularisation::default()).unwrap();
        let no_dp = dg_rhs(&psi, &DGParams { c, ..base.clone() }, &Regularisation::default()).unwrap();
        prop_assert_eq!(&lin, &no_dp);
        let lap = spectral_derivative(&g, psi.values(), 0, 2).unwrap();
        let want: Vec<C64> = lap.iter().map(|l| C64::new(0.0, hbar / (2.0 * mass)) * l).collect();
        prop_assert!(dist(&g, &lin, &want) < 1e-10 * l2_norm(&g, &want).max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn linear_evolution_is_unitary(seed: u64, dt in 1e-3..0.5f64, amp in 0.0..3.0f64, two_d: bool) {
        let g = grid(two_d);
        let mut r = rng(seed);
        let psi = band_limited_state(&g, 4, &mut r).unwrap();
        let v = ScalarFieldSpec::Trig(real_trig_poly(&g, 2, amp, true, &mut r));
        let params = DGParams { potential: v, ..DGParams::default() };
        let prop = Propagator::new(&g, &params, Regularisation::default(), Scheme::Strang).unwrap();
        let mut out = psi.clone();
        for k in 0..10 {
            out = prop.advance(&out, dt, k).unwrap();
        }
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn linear_evolution_is_reversible(seed: u64, dt in 1e-3..0.5f64, amp in 0.0..3.0f64) {
        let g = grid1();
        let mut r = rng(seed);
        let psi = band_limited_state(&g, 4, &mut r).unwrap();
        let v = ScalarFieldSpec::Trig(real_trig_poly(&g, 2, amp, true, &mut r));
        let params = DGParams { potential: v, ..DGParams::default() };
        let prop = Propagator::new(&g, &params, Regularisation::default(), Scheme::Strang).unwrap();
        let back = prop.advance(&prop.advance(&psi, dt, 1).unwrap(), -dt, 2).unwrap();
        prop_assert!(rel(&back, &psi) < 1e-12);
        prop_assert!(back.time().abs() < 1e-15);
    }

    #[test]
    fn plane_waves_disperse_exactly(m in -10i32..=10, t in 0.01..2.0f64, d in 0.0..1.0f64, mass in 0.5..2.0f64) {
        let g = grid1();
        let k = m as f64;
        let psi = sample(&g, &InitialState::PlaneWave { k: vec![k] }).unwrap();
        let params = DGParams { mass, d, ..DGParams::default() };
        let prop = Propagator::new(&g, &params, Regularisation::default(), Scheme::Strang).unwrap();
        let mut out = psi.clone();
        for s in 0..4 {
            out = prop.advance(&out, t / 4.0, s).unwrap();
        }
        let want = psi.scaled(C64::from_polar(1.0, -k * k * t / (2.0 * mass)));
        prop_assert!(rel(&out, &want) < 1e-11);
    }
}

fn gauge_params() -> impl Strategy<Value = GaugeParams> {
    (-0.3..0.3f64, -0.5..0.5f64, 0.5..1.5f64, -0.3..0.3f64, 0.5..2.0f64)
        .prop_map(|(kappa, gamma, lambda, theta, amp)| GaugeParams { kappa, gamma, lambda, theta, amp })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gauge_group_law(seed: u64, a in gauge_params(), b in gauge_params()) {
        let g = grid1();
        let psi = node_free_state(&g, 2, &mut rng(seed)).unwrap();
        let twice = gauge_apply(&b, &gauge_apply(&a, &psi).unwrap()).unwrap();
        let once = gauge_apply(&b.compose(&a), &psi).unwrap();
        prop_assert!(rel(&twice, &once) < 1e-12);
    }

    #[test]
    fn gauge_inverse(seed: u64, a in gauge_params()) {
        let g = grid1();
        let psi = node_free_state(&g, 2, &mut rng(seed)).unwrap();
        let inv = a.inverse().unwrap();
        let back = gauge_apply(&inv, &gauge_apply(&a, &psi).unwrap()).unwrap();
        prop_assert!(rel(&back, &psi) < 1e-12);
        let id = a.compose(&inv);
        let e = GaugeParams::identity();
        for (x, y) in [(id.kappa, e.kappa), (id.gamma, e.gamma), (id.lambda, e.lambda), (id.theta, e.theta), (id.amp, e.amp)] {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn phase_gauges_preserve_density(seed: u64, gamma in -2.0..2.0f64, lambda in 0.2..3.0f64, theta in -1.0..1.0f64) {
        let g = grid1();
        let psi = node_free_state(&g, 3, &mut rng(seed)).unwrap();
        let out = gauge_apply(&GaugeParams::phase(gamma, lambda, theta), &psi).unwrap();
        for (a, b) in psi.density().iter().zip(out.density()) {
            prop_assert!((a - b).abs() <= 1e-14 * a.max(1.0));
        }
    }

    #[test]
    fn transformed_momenta_close_under_brackets(seed: u64, gamma in -2.0..2.0f64) {
        let g = grid1();
        let mut r = rng(seed);
        let psi = band_limited_state(&g, 3, &mut r).unwrap();
        let x = trig_vector_field(&g, 2, &mut r).unwrap();
        let y = trig_vector_field(&g, 2, &mut r).unwrap();
        let gp = GaugeParams::phase(gamma, 1.0, 0.0);
        let params = DGParams::default();
        let (px, py) = (transformed_momentum(&gp, &x, &params), transformed_momentum(&gp, &y, &params));
        let pxy = px.apply(&py.apply(&psi).unwrap()).unwrap();
        let pyx = py.apply(&px.apply(&psi).unwrap()).unwrap();
        let comm: Vec<C64> = pxy.values().iter().zip(pyx.values()).map(|(a, b)| a - b).collect();
        let br = transformed_momentum(&gp, &lie_bracket(&x, &y).unwrap(), &params).apply(&psi).unwrap();
        let want: Vec<C64> = br.values().iter().map(|z| C64::new(0.0, -1.0) * z).collect();
        prop_assert!(dist(&g, &comm, &want) < 1e-8);
    }

    #[test]
    fn gauge_equivalence(seed: u64, d in prop::sample::select(vec![0.0, 0.1, 1.0]), hbar in 0.5..2.0f64) {
        let g = grid1();
        let mut r = rng(seed);
        let psi = band_limited_state(&g, 4, &mut r).unwrap();
        let x = trig_vector_field(&g, 3, &mut r).unwrap();
        let params = DGParams { hbar, ..DGParams::default() };
        let lhs = transformed_momentum(&GaugeParams::phase(4.0 * d, 1.0, 0.0), &x, &params).apply(&psi).unwrap();
        let rhs = apply_momentum(&x, &psi, &params.clone().with_d(d)).unwrap();
        prop_assert!(rel(&lhs, &rhs) < 1e-10);
    }
}
