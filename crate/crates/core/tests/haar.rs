use dyadica::haar::*;
use dyadica::lattice::{CubeId, ShiftedLattice};
use dyadica::measure::io::{FunctionPreset, MeasurePreset};
use dyadica::measure::{AccretiveFunction, FactorMeasure};
use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn root_children(depth: u32) -> ShiftedLattice {
    ShiftedLattice::from_bits(
        dyadica::lattice::ShiftBits::zero(1, depth),
        dyadica::lattice::GoodnessParams::new(1, 0.25).unwrap(),
    )
    .unwrap()
}

#[test]
fn uniform_ordering_is_identity() {
    let lat = root_children(1);
    let m = FactorMeasure::uniform(1, 1).unwrap();
    let b = AccretiveFunction::constant(m.grid(), 1.0);
    let ord = order_children(&lat, &m, &b, CubeId::ROOT, 1.0).unwrap();
    assert_eq!(ord.children[0].index[0], 0);
    assert_eq!(ord.tails, vec![c(1.0), c(0.5)]);
}

#[test]
fn heavy_left_child_goes_last() {
    let lat = root_children(1);
    let m = FactorMeasure::new(1, 1, vec![0.75, 0.25]).unwrap();
    let b = AccretiveFunction::constant(m.grid(), 1.0);
    let ord = order_children(&lat, &m, &b, CubeId::ROOT, 1.0).unwrap();
    assert_eq!(ord.children[0].index[0], 1);
    assert_eq!(ord.tails, vec![c(1.0), c(0.75)]);

    let phi = haar_function(&ord, 1).unwrap().dense(&lat);
    assert!((phi[1] - c(3f64.sqrt())).norm() < 1e-14);
    assert!((phi[0] + c(3f64.sqrt() / 3.0)).norm() < 1e-14);
    let integral: Complex64 = phi.iter().zip(m.weights()).map(|(v, w)| v * w).sum();
    assert!(integral.norm() < 1e-14);
    let norm: f64 = phi.iter().zip(m.weights()).map(|(v, w)| v.norm_sqr() * w).sum();
    assert!((norm - 1.0).abs() < 1e-14);
}

#[test]
fn zero_mass_child_first_is_valid() {
    let lat = root_children(1);
    let m = FactorMeasure::new(1, 1, vec![0.0, 1.0]).unwrap();
    let b = AccretiveFunction::constant(m.grid(), 1.0);
    let ord = order_children(&lat, &m, &b, CubeId::ROOT, 1.0).unwrap();
    assert_eq!(ord.children[0].index[0], 0);
    assert!(haar_function(&ord, 1).is_err());
    let sys = HaarSystem::build(&m, &b, &lat).unwrap();
    assert_eq!(sys.dropped().len(), 1);
}

#[test]
fn no_valid_ordering_is_reported() {
    let lat = root_children(1);
    let m = FactorMeasure::uniform(1, 1).unwrap();
    let b = AccretiveFunction::constant(m.grid(), 1.0);
    assert!(matches!(
        order_children(&lat, &m, &b, CubeId::ROOT, 1.5),
        Err(dyadica::Error::InsufficientAccretivity { .. })
    ));
}

#[test]
fn classical_haar_under_uniform_measure() {
    let lat = root_children(1);
    let m = FactorMeasure::uniform(1, 1).unwrap();
    let b = AccretiveFunction::constant(m.grid(), 1.0);
    let sys = HaarSystem::build(&m, &b, &lat).unwrap();
    let phi = sys.functions()[1].dense(&lat);
    assert_eq!(phi, vec![c(1.0), c(-1.0)]);
}

fn random_setup(dim: usize, depth: u32, seed: u64) -> (FactorMeasure, AccretiveFunction, ShiftedLattice) {
    let m = MeasurePreset::RandomDirichlet(seed).build(dim, depth).unwrap();
    let b = FunctionPreset::RandomComplex { seed: seed + 1, amp: 0.4 }.build(m.grid());
    let lat = ShiftedLattice::build(dim, depth, seed + 2, 1, 0.25).unwrap();
    (m, b, lat)
}

#[test]
fn cancellation_and_biorthogonality() {
    for (dim, depth, seed) in [(1, 5, 3), (2, 3, 9), (1, 4, 21)] {
        let (m, b, lat) = random_setup(dim, depth, seed);
        let sys = HaarSystem::build(&m, &b, &lat).unwrap();
        assert_eq!(sys.len(), lat.grid().len());
        for k in 1..sys.len() {
            assert!(sys.cancellation(k).norm() <= 1e-12 * b.sup_norm);
        }
        let g = sys.gram();
        for ((i, j), v) in g.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - c(want)).norm() < 1e-10, "gram[{i},{j}] = {v}");
        }
    }
}

fn random_field(n: usize, m: usize, rng: &mut ChaCha8Rng) -> Array2<Complex64> {
    Array2::from_shape_fn((n, m), |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn round_trip_random_fields() {
    let (mn, bn, ln) = random_setup(1, 4, 40);
    let (mm, bm, lm) = random_setup(1, 4, 50);
    let sn = HaarSystem::build(&mn, &bn, &ln).unwrap();
    let sm = HaarSystem::build(&mm, &bm, &lm).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let f = random_field(16, 16, &mut rng);
        let coeffs = forward_transform(&f, &sn, &sm).unwrap();
        let g = reconstruct(&coeffs, &sn, &sm).unwrap();
        assert!(relative_l2_error(&f, &g, mn.weights(), mm.weights()) <= 1e-10);
    }
    let mut delta = Array2::zeros((16, 16));
    delta[[5, 11]] = c(1.0);
    let g = reconstruct(&forward_transform(&delta, &sn, &sm).unwrap(), &sn, &sm).unwrap();
    assert!(relative_l2_error(&delta, &g, mn.weights(), mm.weights()) <= 1e-10);
}

#[test]
fn single_basis_pair_has_unit_coefficient() {
    let (mn, bn, ln) = random_setup(1, 3, 60);
    let (mm, bm, lm) = random_setup(2, 2, 61);
    let sn = HaarSystem::build(&mn, &bn, &ln).unwrap();
    let sm = HaarSystem::build(&mm, &bm, &lm).unwrap();
    let (a, z) = (3, 7);
    let f = Array2::from_shape_fn((8, 16), |(i, j)| {
        bn.values[i] * bm.values[j] * sn.matrix()[[i, a]] * sm.matrix()[[j, z]]
    });
    let coeffs = forward_transform(&f, &sn, &sm).unwrap();
    for ((i, j), v) in coeffs.values.indexed_iter() {
        let want = if (i, j) == (a, z) { 1.0 } else { 0.0 };
        assert!((v - c(want)).norm() < 1e-10);
    }
}

#[test]
fn b_itself_has_only_the_top_component() {
    let (mn, bn, ln) = random_setup(1, 3, 70);
    let (mm, bm, lm) = random_setup(1, 3, 71);
    let sn = HaarSystem::build(&mn, &bn, &ln).unwrap();
    let sm = HaarSystem::build(&mm, &bm, &lm).unwrap();
    let f = Array2::from_shape_fn((8, 8), |(i, j)| bn.values[i] * bm.values[j]);
    let coeffs = forward_transform(&f, &sn, &sm).unwrap();
    for ((i, j), v) in coeffs.values.indexed_iter() {
        if (i, j) != (0, 0) {
            assert!(v.norm() < 1e-12);
        }
    }
    let g = reconstruct(&coeffs, &sn, &sm).unwrap();
    assert!(relative_l2_error(&f, &g, mn.weights(), mm.weights()) < 1e-12);
    let zero = Array2::zeros((8, 8));
    assert!(forward_transform(&zero, &sn, &sm).unwrap().values.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn parseval_for_classical_haar() {
    let m = FactorMeasure::uniform(1, 4).unwrap();
    let b = AccretiveFunction::constant(m.grid(), 1.0);
    let lat = ShiftedLattice::build(1, 4, 5, 1, 0.25).unwrap();
    let s = HaarSystem::build(&m, &b, &lat).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = random_field(16, 16, &mut rng);
    let coeffs = forward_transform(&f, &s, &s).unwrap();
    let energy: f64 = coeffs.values.iter().map(|v| v.norm_sqr()).sum();
    let norm: f64 = f.iter().map(|v| v.norm_sqr()).sum::<f64>() / 256.0;
    assert!((energy - norm).abs() < 1e-12 * norm);
}

#[test]
fn csv_export_has_one_row_per_pair() {
    let (m, b, lat) = random_setup(1, 2, 80);
    let s = HaarSystem::build(&m, &b, &lat).unwrap();
    let f = Array2::from_elem((4, 4), c(1.0));
    let coeffs = forward_transform(&f, &s, &s).unwrap();
    let mut buf = Vec::new();
    coeffs.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level1,index1,childIdx1,level2,index2,childIdx2,re,im"
    );
    assert_eq!(lines.count(), 16);
}

#[test]
fn xi_hand_example() {
    let m = FactorMeasure::uniform(1, 1).unwrap();
    let b = AccretiveFunction::constant(m.grid(), 1.0);
    let lat = root_children(1);
    let sys = HaarSystem::build(&m, &b, &lat).unwrap();
    let cube = CubeId { level: 1, index: [0, 0] };
    let d = xi_decomposition(&sys, cube, 1, 1).unwrap();
    assert_eq!(d.average, c(1.0));
    assert_eq!(d.xi, vec![c(0.0), c(-2.0)]);
    assert!(xi_decomposition(&sys, cube, 2, 1).is_err());
    assert!(xi_decomposition(&sys, cube, 0, 1).is_err());
}

#[test]
fn xi_identity_on_random_inputs() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for t in 0..100u64 {
        let dim = 1 + (t % 2) as usize;
        let depth = if dim == 1 { 5 } else { 3 };
        let (m, b, lat) = random_setup(dim, depth, 1000 + t);
        let sys = HaarSystem::build(&m, &b, &lat).unwrap();
        let level = rng.random_range(1..=depth);
        let cube = lat.cubes_at(level).nth(rng.random_range(0..lat.count_at(level))).unwrap();
        let k = rng.random_range(1..=level);
        let j = rng.random_range(1..(1usize << dim));
        let d = xi_decomposition(&sys, cube, k, j).unwrap();
        let phi = sys.function(HaarIndex { cube: d.ancestor, child: j }).unwrap().dense(&lat);
        for (i, (x, p)) in d.xi.iter().zip(&phi).enumerate() {
            assert!((x + d.average - p).norm() < 1e-12);
            if lat.contains_cell(d.inner, i) {
                assert_eq!(x.norm(), 0.0);
            }
        }
        assert!(d.sup_constant.is_finite());
    }
}

#[test]
fn property_envelopes_within_calibrated_range() {
    let values = [c(1.0), c(0.6), Complex64::new(0.8, 0.5)];
    let masses = [0.0, 1.0, 3.0];
    let (env, used) = calibrate_envelope(1, 2, &masses, &values, 0.5).unwrap();
    assert!(used > 100);
    assert!(env.l2.min > 0.0 && env.l2.max.is_finite());
    assert!(env.pointwise.min > 0.0);
    // every system in the family lands in the calibrated interval
    let m = FactorMeasure::new(1, 2, vec![1.0, 3.0, 0.0, 1.0]).unwrap();
    let b = AccretiveFunction::new(vec![c(1.0), c(0.6), Complex64::new(0.8, 0.5), c(1.0)]);
    let lat = ShiftedLattice::from_bits(
        dyadica::lattice::ShiftBits::zero(1, 2),
        dyadica::lattice::GoodnessParams::new(1, 0.25).unwrap(),
    )
    .unwrap();
    let e = haar_envelope(&HaarSystem::build(&m, &b, &lat).unwrap());
    for (r, got) in [(env.l1, e.l1), (env.l2, e.l2), (env.linf, e.linf), (env.pointwise, e.pointwise)] {
        assert!(r.contains(got.min, 1e-12) && r.contains(got.max, 1e-12));
    }
}
