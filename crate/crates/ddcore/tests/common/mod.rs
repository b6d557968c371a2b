//! Shared helpers for the integration suites: benchmark plant setup and a
//! seeded random-system generator.

#![allow(dead_code)]

use ddcore::lti::{self, StateSpace, TransferRow};
use ddcore::matpoly::{Matrix, Polynomial, Vector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha12Rng;

pub fn discrete_msd() -> StateSpace {
    let (plant, ts) = lti::msd();
    lti::zoh_plant(&plant, ts).unwrap()
}

pub fn discrete_pendulum() -> StateSpace {
    let (plant, ts) = lti::inverted_pendulum();
    lti::zoh_plant(&plant, ts).unwrap()
}

pub fn discrete_submarine() -> StateSpace {
    let (plant, ts) = lti::submarine();
    lti::zoh_plant(&plant, ts).unwrap()
}

/// Draw a random transfer row: monic denominator with well-separated
/// roots in the disk of the given radius, numerator entries kept clear of
/// the poles so the row is robustly coprime.
pub fn random_row(rng: &mut ChaCha12Rng, m: usize, n_max: usize, radius: f64) -> TransferRow {
    'outer: loop {
        let n = rng.gen_range(1..=n_max);
        let mut roots: Vec<Complex64> = Vec::new();
        while roots.len() < n {
            if n - roots.len() >= 2 && rng.gen_bool(0.5) {
                let re = rng.gen_range(-radius..radius);
                let im = rng.gen_range(0.05..radius);
                let c = Complex64::new(re, im);
                if c.norm() < radius {
                    roots.push(c);
                    roots.push(c.conj());
                }
            } else {
                roots.push(Complex64::new(rng.gen_range(-radius..radius), 0.0));
            }
        }
        for i in 0..roots.len() {
            for j in (i + 1)..roots.len() {
                if (roots[i] - roots[j]).norm() < 2e-2 {
                    continue 'outer;
                }
            }
        }
        let den = Polynomial::from_roots(&roots, 1e-9).unwrap();
        let mut num = Vec::with_capacity(m);
        for _ in 0..m {
            let deg = if n == 1 { 0 } else { rng.gen_range(0..n) };
            let coeffs: Vec<f64> = (0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect();
            num.push(Polynomial::new(coeffs));
        }
        if num.iter().any(|p| p.is_zero()) {
            continue;
        }
        // keep numerator roots away from the poles
        for p in &num {
            if let Some(d) = p.degree() {
                if d >= 1 {
                    let nr = p.roots().unwrap();
                    for q in nr.roots() {
                        for r in &roots {
                            if (q - r).norm() < 1e-2 {
                                continue 'outer;
                            }
                        }
                    }
                }
            }
        }
        return TransferRow { den, num };
    }
}

/// Observable-canonical realization of one transfer row.
pub fn row_state_space(row: &TransferRow) -> StateSpace {
    let n = row.order();
    let m = row.num.len();
    let mut a = Matrix::zeros(n, n);
    for i in 0..n {
        a[(i, 0)] = -row.den.coeff(n - 1 - i);
        if i + 1 < n {
            a[(i, i + 1)] = 1.0;
        }
    }
    let mut b = Matrix::zeros(n, m);
    for j in 0..m {
        for i in 0..n {
            b[(i, j)] = row.num[j].coeff(n - 1 - i);
        }
    }
    let mut c = Matrix::zeros(1, n);
    c[(0, 0)] = 1.0;
    StateSpace::new(a, b, c, Matrix::zeros(1, m)).unwrap()
}

/// Block-diagonal stack of per-output rows into one plant.
pub fn stack_rows(rows: &[TransferRow]) -> StateSpace {
    let parts: Vec<StateSpace> = rows.iter().map(row_state_space).collect();
    let n: usize = parts.iter().map(|s| s.order()).sum();
    let m = parts[0].n_inputs();
    let p = parts.len();
    let mut a = Matrix::zeros(n, n);
    let mut b = Matrix::zeros(n, m);
    let mut c = Matrix::zeros(p, n);
    let mut off = 0;
    for (i, part) in parts.iter().enumerate() {
        let ni = part.order();
        a.view_mut((off, off), (ni, ni)).copy_from(&part.a);
        b.view_mut((off, 0), (ni, m)).copy_from(&part.b);
        c.view_mut((i, off), (1, ni)).copy_from(&part.c);
        off += ni;
    }
    StateSpace::new(a, b, c, Matrix::zeros(p, m)).unwrap()
}

/// Simulate a seeded uniform-excitation trajectory just long enough for
/// the rank condition at window `n_window` plus margin.
pub fn short_experiment(
    ss: &StateSpace,
    n_window: usize,
    order_bound: usize,
    margin: usize,
    amplitude: f64,
    seed: u64,
) -> ddcore::datagen::Trajectory {
    let m = ss.n_inputs();
    let cols = m * (n_window + 1) + order_bound + margin;
    ddcore::datagen::excite(ss, &Vector::zeros(ss.order()), cols + n_window, amplitude, seed)
        .unwrap()
}
