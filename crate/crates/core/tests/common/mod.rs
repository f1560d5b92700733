//! Shared test helpers: dense reference operators and random inputs.
#![allow(dead_code)]

use num_complex::Complex64;
use walkmix::core_sim::{Environment, Gate2, WalkModel};
use walkmix::env_gen::sample_environment;
use walkmix::linalg::CMatrix;
use walkmix::rng::{sample_stream, symmetric_f64, SampleRng};

pub fn idx(env_dim: usize, s: usize, c: usize, e: usize) -> usize {
    e + env_dim * (c + 2 * s)
}

/// The full `d × d` one-step operator, entry by entry from its definition:
/// coin `F`, then a move to `s−1` (coin 0) or `s+1` (coin 1) together with
/// `E_c`. In the local model `E_c` is `G_c` on environment bit `s` of the
/// site being left.
pub fn dense_step_operator(model: &WalkModel) -> CMatrix {
    let n = model.sites;
    let d = model.env_dim();
    let f = model.coin;
    let mut u = CMatrix::zeros(model.dim(), model.dim());
    for s in 0..n {
        for c0 in 0..2 {
            for e in 0..d {
                let col = idx(d, s, c0, e);
                for c in 0..2 {
                    let s_new = if c == 0 { (s + n - 1) % n } else { (s + 1) % n };
                    for e_new in 0..d {
                        let env = env_element(&model.environment, c, s, e_new, e);
                        if env != Complex64::new(0.0, 0.0) {
                            u[(idx(d, s_new, c, e_new), col)] += f[(c, c0)] * env;
                        }
                    }
                }
            }
        }
    }
    u
}

fn env_element(env: &Environment, c: usize, s: usize, e_new: usize, e: usize) -> Complex64 {
    match env {
        Environment::Nonlocal { e0, e1 } => {
            if c == 0 {
                e0[(e_new, e)]
            } else {
                e1[(e_new, e)]
            }
        }
        Environment::Local { g0, g1 } => {
            let bit = 1usize << s;
            if (e_new & !bit) != (e & !bit) {
                return Complex64::new(0.0, 0.0);
            }
            let g: &Gate2 = if c == 0 { g0 } else { g1 };
            g[(usize::from(e_new & bit != 0), usize::from(e & bit != 0))]
        }
    }
}

/// Dense `|ψ(t)⟩ = Uᵗ|ψ(0)⟩`.
pub fn dense_evolve(model: &WalkModel, psi: &[Complex64], steps: usize) -> Vec<Complex64> {
    let u = dense_step_operator(model);
    let mut v = nalgebra::DVector::from_column_slice(psi);
    for _ in 0..steps {
        v = &u * v;
    }
    v.as_slice().to_vec()
}

pub fn random_vector(rng: &mut SampleRng, dim: usize) -> Vec<Complex64> {
    (0..dim).map(|_| Complex64::new(symmetric_f64(rng, 1.0), symmetric_f64(rng, 1.0))).collect()
}

pub fn random_unit_vector(rng: &mut SampleRng, dim: usize) -> Vec<Complex64> {
    let mut v = random_vector(rng, dim);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

pub fn random_gate(rng: &mut SampleRng) -> Gate2 {
    let (e0, _) = sample_environment(2, 1.0, rng).unwrap();
    Gate2::new(e0[(0, 0)], e0[(0, 1)], e0[(1, 0)], e0[(1, 1)])
}

pub fn random_nonlocal(sites: usize, env_dim: usize, seed: u64) -> WalkModel {
    let (e0, e1) = sample_environment(env_dim, 1.0, &mut sample_stream(seed, 0)).unwrap();
    WalkModel::nonlocal(sites, e0, e1).unwrap().with_seed(seed)
}

pub fn random_local(sites: usize, seed: u64) -> WalkModel {
    let mut rng = sample_stream(seed, 1);
    let g0 = random_gate(&mut rng);
    let g1 = random_gate(&mut rng);
    WalkModel::local(sites, g0, g1).unwrap()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_diff_f64(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
