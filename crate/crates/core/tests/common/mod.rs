//! Shared test helpers: an independent dense-matrix circuit simulator used
//! as the oracle for statevector evaluation, plus dataset discovery.
//!
//! The oracle deliberately re-derives every gate matrix from first
//! principles and applies full 2^n×2^n operators built by Kronecker
//! products — the opposite of the production stride engine — so the two
//! paths share no code beyond the placement list.

#![allow(dead_code)]

use num_complex::Complex64;
use qcnn_core::ansatz::{GateKind, GatePlacement};
use std::path::PathBuf;

pub type CMat = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn eye(dim: usize) -> CMat {
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = (a.len(), a[0].len());
    let (rb, cb) = (b.len(), b[0].len());
    let mut out = vec![vec![c(0.0, 0.0); ca * cb]; ra * rb];
    for i in 0..ra {
        for j in 0..ca {
            for k in 0..rb {
                for l in 0..cb {
                    out[i * rb + k][j * cb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    let mut out = vec![vec![c(0.0, 0.0); m]; n];
    for i in 0..n {
        for j in 0..m {
            let mut acc = c(0.0, 0.0);
            for t in 0..k {
                acc += a[i][t] * b[t][j];
            }
            out[i][j] = acc;
        }
    }
    out
}

pub fn matvec(a: &CMat, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(m, x)| m * x).sum())
        .collect()
}

// Gate matrices, re-derived independently of the production crate.
fn rx2(theta: f64) -> CMat {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![vec![c(co, 0.0), c(0.0, -s)], vec![c(0.0, -s), c(co, 0.0)]]
}

fn ry2(theta: f64) -> CMat {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

fn rz2(theta: f64) -> CMat {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![vec![c(co, -s), c(0.0, 0.0)], vec![c(0.0, 0.0), c(co, s)]]
}

fn x2() -> CMat {
    vec![
        vec![c(0.0, 0.0), c(1.0, 0.0)],
        vec![c(1.0, 0.0), c(0.0, 0.0)],
    ]
}

fn u32mat(theta: f64, phi: f64, lambda: f64) -> CMat {
    use std::f64::consts::FRAC_PI_2;
    let mut m = rz2(phi);
    for f in [rx2(-FRAC_PI_2), rz2(theta), rx2(FRAC_PI_2), rz2(lambda)] {
        m = matmul(&m, &f);
    }
    m
}

/// Lift a single-qubit matrix onto wire `q` (1-based, qubit 1 = most
/// significant) of an `n`-qubit register.
pub fn lift_single(n: usize, q: usize, u: &CMat) -> CMat {
    let mut m = vec![vec![c(1.0, 0.0)]];
    for wire in 1..=n {
        let factor = if wire == q { u.clone() } else { eye(2) };
        m = kron(&m, &factor);
    }
    m
}

/// Lift a controlled-U onto (control, target): P0 ⊗ I + P1 ⊗ U.
pub fn lift_controlled(n: usize, control: usize, target: usize, u: &CMat) -> CMat {
    let p0 = vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(0.0, 0.0)],
    ];
    let p1 = vec![
        vec![c(0.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), c(1.0, 0.0)],
    ];
    let mut inactive = vec![vec![c(1.0, 0.0)]];
    let mut active = vec![vec![c(1.0, 0.0)]];
    for wire in 1..=n {
        let (fi, fa) = if wire == control {
            (p0.clone(), p1.clone())
        } else if wire == target {
            (eye(2), u.clone())
        } else {
            (eye(2), eye(2))
        };
        inactive = kron(&inactive, &fi);
        active = kron(&active, &fa);
    }
    for i in 0..inactive.len() {
        for j in 0..inactive.len() {
            inactive[i][j] += active[i][j];
        }
    }
    inactive
}

/// Resolve a placement's angle slots against (params ++ features).
pub fn resolve_angles(
    p: &GatePlacement,
    n_params: usize,
    params: &[f64],
    features: &[f64],
) -> Vec<f64> {
    p.slots
        .iter()
        .map(|&s| {
            if s < n_params {
                params[s]
            } else {
                features[s - n_params]
            }
        })
        .collect()
}

/// Full-dimension operator of one placement.
pub fn placement_operator(
    n: usize,
    p: &GatePlacement,
    n_params: usize,
    params: &[f64],
    features: &[f64],
) -> CMat {
    let a = resolve_angles(p, n_params, params, features);
    let target = p.target.get();
    match p.kind {
        GateKind::Rx => lift_single(n, target, &rx2(a[0])),
        GateKind::Ry => lift_single(n, target, &ry2(a[0])),
        GateKind::Rz => lift_single(n, target, &rz2(a[0])),
        GateKind::U3 => lift_single(n, target, &u32mat(a[0], a[1], a[2])),
        GateKind::PauliX => lift_single(n, target, &x2()),
        GateKind::Cnot => lift_controlled(n, p.control.unwrap().get(), target, &x2()),
        GateKind::Crx => lift_controlled(n, p.control.unwrap().get(), target, &rx2(a[0])),
        GateKind::Crz => lift_controlled(n, p.control.unwrap().get(), target, &rz2(a[0])),
    }
}

/// Evolve a raw state through placements via dense operators.
pub fn dense_evolve(
    n: usize,
    placements: &[GatePlacement],
    n_params: usize,
    params: &[f64],
    features: &[f64],
    state: &[Complex64],
) -> Vec<Complex64> {
    let mut v = state.to_vec();
    for p in placements {
        let op = placement_operator(n, p, n_params, params, features);
        v = matvec(&op, &v);
    }
    v
}

/// Deterministic pseudo-random stream for test inputs.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        TestRng(seed)
    }

    pub fn next_f64(&mut self) -> f64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn angles(&mut self, count: usize, hi: f64) -> Vec<f64> {
        (0..count).map(|_| self.next_f64() * hi).collect()
    }
}

/// Dataset directory: $QCNN_DATA_DIR, or `data/` at the workspace root.
pub fn data_dir() -> Option<PathBuf> {
    let candidate = match std::env::var_os("QCNN_DATA_DIR") {
        Some(v) => PathBuf::from(v),
        None => workspace_root().join("data"),
    };
    candidate.is_dir().then_some(candidate)
}

/// Directory where CLI-produced acceptance artifacts live.
pub fn results_dir() -> PathBuf {
    match std::env::var_os("QCNN_RESULTS_DIR") {
        Some(v) => PathBuf::from(v),
        None => workspace_root().join("runs").join("acceptance"),
    }
}

pub fn cache_dir() -> PathBuf {
    workspace_root().join("cache")
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .and_then(|p| p.parent())
        .expect("workspace root")
        .to_path_buf()
}
