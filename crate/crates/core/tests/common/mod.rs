#![allow(dead_code)]

use bochner_rho::frame_spectral::{build_frame, DiagonalFrame, CLUSTER_RTOL};
use bochner_rho::tensor_geometry::{covariant_jet, endos_at, ChartField, GeometryJet};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn jet_of(field: &ChartField) -> GeometryJet {
    let frame = build_frame(&endos_at(field, &field.x0).unwrap()).unwrap();
    covariant_jet(field, &frame).unwrap()
}

pub fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / (1.0 + y.abs())
}

/// Haar-ish unitary from the QR factor of a complex Gaussian-like matrix.
pub fn random_unitary(k: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(k, k, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    m.qr().q()
}

/// Block-diagonal unitary: random inside each group of equal `a_j`, random phase otherwise.
pub fn gauge_rotation(frame: &DiagonalFrame, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let n = frame.n;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        match groups.iter_mut().find(|g| (frame.a[g[0]] - frame.a[j]).abs() <= CLUSTER_RTOL * frame.a[j]) {
            Some(g) => g.push(j),
            None => groups.push(vec![j]),
        }
    }
    let mut u = DMatrix::<Complex64>::zeros(n, n);
    for g in &groups {
        let block = random_unitary(g.len(), rng);
        for (r, &i) in g.iter().enumerate() {
            for (c, &k) in g.iter().enumerate() {
                u[(i, k)] = block[(r, c)];
            }
        }
    }
    let phases = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| {
        Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
    }));
    u * phases
}
