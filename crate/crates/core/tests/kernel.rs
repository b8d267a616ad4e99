use dyadica::kernel::*;
use dyadica::lattice::{CubeId, ShiftedLattice};
use dyadica::measure::io::{FunctionPreset, MeasurePreset};
use dyadica::measure::{AccretiveFunction, DominatingFunction, FactorMeasure};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Setup {
    mn: FactorMeasure,
    mm: FactorMeasure,
    b1: AccretiveFunction,
    b2: AccretiveFunction,
}

fn setup(depth: u32, seed: u64) -> Setup {
    let mn = MeasurePreset::RandomDirichlet(seed).build(1, depth).unwrap();
    let mm = MeasurePreset::Uniform.build(1, depth).unwrap();
    let b1 = FunctionPreset::RandomComplex { seed: seed + 1, amp: 0.3 }.build(mn.grid());
    let b2 = FunctionPreset::RandomReal { seed: seed + 2, amp: 0.3 }.build(mm.grid());
    Setup { mn, mm, b1, b2 }
}

fn kernel(s: &Setup, kind: BuiltinKind) -> KernelSpec {
    let lambda = DominatingFunction::power_law(2.0, 1.0).unwrap();
    make_builtin(
        kind,
        BuiltinParams {
            alpha: 1.0,
            beta: 1.0,
            measure_n: &s.mn,
            measure_m: &s.mm,
            lambda_n: lambda.clone(),
            lambda_m: lambda,
            b1: Some(&s.b1),
        },
    )
    .unwrap()
}

const STANDARD: BuiltinKind = BuiltinKind::StandardProduct { c: 0.5, oscillate: true };

fn random_field(n: usize, m: usize, seed: u64) -> Array2<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Array2::from_shape_fn((n, m), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn plain_standard_product_saturates_size_at_half() {
    let s = setup(4, 1);
    let k = kernel(&s, BuiltinKind::StandardProduct { c: 0.5, oscillate: false });
    let r = verify_estimates(&k, EstimateMode::Size, SamplePlan { samples: 2000, seed: 3 }, 1.0);
    assert!((r.worst_ratio - 0.5).abs() < 1e-14);
    assert!(r.pass);
}

#[test]
fn zero_kernel_has_zero_ratios() {
    let s = setup(3, 2);
    let k = kernel(&s, BuiltinKind::Zero);
    for mode in EstimateMode::ALL {
        let r = verify_estimates(&k, mode, SamplePlan { samples: 500, seed: 4 }, 1.0);
        assert_eq!(r.worst_ratio, 0.0);
        assert!(r.pass);
    }
}

#[test]
fn violator_fails_size_and_grows_with_depth() {
    let ratio = |depth| {
        let s = setup(depth, 3);
        let k = kernel(&s, BuiltinKind::Violator);
        verify_estimates(&k, EstimateMode::Size, SamplePlan { samples: 4000, seed: 5 }, 10.0)
    };
    let (shallow, deep) = (ratio(3), ratio(6));
    // near d = 1/2 the product bound is about 4·t1·t2
    assert!(!shallow.pass && !deep.pass);
    assert!(deep.worst_ratio > 4.0 * shallow.worst_ratio, "{} vs {}", shallow.worst_ratio, deep.worst_ratio);
}

#[test]
fn standard_product_estimates_are_stable_under_refinement() {
    let s = setup(5, 4);
    let k = kernel(&s, STANDARD);
    for mode in EstimateMode::ALL {
        let a = verify_estimates(&k, mode, SamplePlan { samples: 20_000, seed: 6 }, 10.0);
        let b = verify_estimates(&k, mode, SamplePlan { samples: 40_000, seed: 6 }, 10.0);
        assert!(a.worst_ratio.is_finite() && a.worst_ratio > 0.0);
        let change = (b.worst_ratio - a.worst_ratio) / a.worst_ratio;
        assert!(change < 0.1, "{}: {} → {}", mode.name(), a.worst_ratio, b.worst_ratio);
    }
}

#[test]
fn annihilating_kernel_kills_b() {
    let s = setup(4, 5);
    let k = kernel(&s, BuiltinKind::BAnnihilating);
    let b = Array2::from_shape_fn((16, 16), |(i, j)| s.b1.values[i] * s.b2.values[j]);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let t1 = rng.random_range(0.01..1.0);
        let t2 = rng.random_range(0.01..1.0);
        let theta = apply_theta(&k, &b, s.mn.weights(), s.mm.weights(), t1, t2).unwrap();
        assert!(theta.iter().all(|v| v.norm() < 1e-12));
    }
}

#[test]
fn constant_kernel_integrates() {
    let s = setup(3, 6);
    let k = kernel(&s, BuiltinKind::Violator);
    let f = Array2::from_elem((8, 8), Complex64::new(2.0, 0.0));
    let theta = apply_theta(&k, &f, s.mn.weights(), s.mm.weights(), 0.3, 0.7).unwrap();
    assert!(theta.iter().all(|v| (v - Complex64::new(2.0, 0.0)).norm() < 1e-14));
    let zero = Array2::zeros((8, 8));
    let theta = apply_theta(&k, &zero, s.mn.weights(), s.mm.weights(), 0.3, 0.7).unwrap();
    assert!(theta.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn linearity_and_tensor_consistency() {
    let s = setup(3, 7);
    let k = kernel(&s, STANDARD);
    let (w1, w2) = (s.mn.weights(), s.mm.weights());
    let f = random_field(8, 8, 1);
    let g = random_field(8, 8, 2);
    let a = Complex64::new(0.3, -1.2);
    let combo = &f * a + &g;
    let lhs = apply_theta(&k, &combo, w1, w2, 0.2, 0.4).unwrap();
    let rhs = apply_theta(&k, &f, w1, w2, 0.2, 0.4).unwrap() * a + apply_theta(&k, &g, w1, w2, 0.2, 0.4).unwrap();
    assert!(lhs.iter().zip(rhs.iter()).all(|(x, y)| (x - y).norm() < 1e-13));
    let direct = apply_theta_direct(&k, &f, w1, w2, 0.2, 0.4).unwrap();
    let fast = apply_theta(&k, &f, w1, w2, 0.2, 0.4).unwrap();
    assert!(direct.iter().zip(fast.iter()).all(|(x, y)| (x - y).norm() < 1e-12));
}

#[test]
fn tabulated_round_trip_and_application() {
    let s = setup(2, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let table = Array2::from_shape_fn((16, 16), |_| rng.random_range(-1.0..1.0));
    let mut buf = Vec::new();
    write_tabulated(&mut buf, &table).unwrap();
    assert_eq!(buf.len(), 16 + 8 * 256);
    let back = read_tabulated(buf.as_slice()).unwrap();
    assert_eq!(back, table);
    assert!(read_tabulated(&buf[..20]).is_err());
    let lambda = DominatingFunction::power_law(2.0, 1.0).unwrap();
    let k = tabulated_kernel(back, s.mn.grid(), s.mm.grid(), 1.0, 1.0, lambda.clone(), lambda).unwrap();
    let f = random_field(4, 4, 3);
    let fast = apply_theta(&k, &f, s.mn.weights(), s.mm.weights(), 0.5, 0.5).unwrap();
    let direct = apply_theta_direct(&k, &f, s.mn.weights(), s.mm.weights(), 0.5, 0.5).unwrap();
    assert!(direct.iter().zip(fast.iter()).all(|(x, y)| (x - y).norm() < 1e-13));
}

fn lattices(depth: u32) -> (ShiftedLattice, ShiftedLattice) {
    (
        ShiftedLattice::build(1, depth, 11, 1, 0.25).unwrap(),
        ShiftedLattice::build(1, depth, 12, 1, 0.25).unwrap(),
    )
}

#[test]
fn carleson_assumptions_zero_and_annihilating() {
    let s = setup(3, 9);
    let (ln, lm) = lattices(3);
    let plan = CarlesonPlan { exterior_samples: 2, nodes: 2, seed: 1 };
    let zero = kernel(&s, BuiltinKind::Zero);
    for mode in [CarlesonMode::Size, CarlesonMode::Holder] {
        let r = verify_carleson_assumptions(&zero, &s.b1, &s.b2, &s.mn, &s.mm, &ln, &lm, mode, plan, 1.0).unwrap();
        assert_eq!(r.worst_ratio, 0.0);
    }
    let k = kernel(&s, BuiltinKind::BAnnihilating);
    let nodes = carleson_box_nodes(0, 3, 3).unwrap();
    let ext = Exterior { x: 1, y: 5, yp: 5, t: 0.3 };
    let lhs = carleson_box_lhs(&k, &s.b1, &s.mn, &ln, Orientation::First, CubeId::ROOT, ext, &nodes);
    assert!(lhs < 1e-12);
}

#[test]
fn carleson_assumptions_stable_under_quadrature_refinement() {
    let s = setup(4, 10);
    let (ln, lm) = lattices(4);
    let k = kernel(&s, STANDARD);
    for mode in [CarlesonMode::Size, CarlesonMode::Holder] {
        let run = |g| {
            let plan = CarlesonPlan { exterior_samples: 3, nodes: g, seed: 2 };
            verify_carleson_assumptions(&k, &s.b1, &s.b2, &s.mn, &s.mm, &ln, &lm, mode, plan, 10.0)
                .unwrap()
                .worst_ratio
        };
        let (a, b) = (run(4), run(8));
        assert!(a.is_finite() && a > 0.0);
        assert!(((b - a) / a).abs() < 0.1, "{mode:?}: {a} → {b}");
    }
}
