//! Shared helpers for the integration suites: an independent full-space
//! evolution oracle, the Page-value formula, and the criterion reporter.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use rydpulse::evolve::HamiltonianEigen;
use rydpulse::pulse::PulseSequence;

/// Print one pass/fail line and fail the test on a miss.
pub fn criterion(number: usize, description: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {number} [{status}] {description}: {detail}");
    assert!(ok, "criterion {number} failed: {detail}");
}

/// Dense 2^N Hamiltonian built directly from the definition: pair
/// interactions via chord distances, detuning on the excitation number,
/// drive as single-spin flips. Independent of the sector machinery.
pub fn full_hamiltonian(n: usize, d: f64, c6: f64, omega: f64, delta: f64) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    let r = |i: usize, j: usize| {
        let theta = std::f64::consts::PI * (j - i) as f64 / n as f64;
        d * theta.sin() / (std::f64::consts::PI / n as f64).sin()
    };
    for b in 0..dim {
        let mut diag = -delta * (b.count_ones() as f64);
        for i in 0..n {
            for j in (i + 1)..n {
                if b >> i & 1 == 1 && b >> j & 1 == 1 {
                    diag += c6 / r(i, j).powi(6);
                }
            }
        }
        h[(b, b)] = diag;
        for site in 0..n {
            h[(b, b ^ (1 << site))] = 0.5 * omega;
        }
    }
    h
}

/// Evolve |down...down> through the sequence in the full computational basis.
pub fn full_evolve(seq: &PulseSequence, n: usize, d: f64, c6: f64) -> DVector<Complex64> {
    let dim = 1usize << n;
    let mut psi = DVector::from_element(dim, Complex64::new(0.0, 0.0));
    psi[0] = Complex64::new(1.0, 0.0);
    for seg in &seq.segments {
        let h = full_hamiltonian(n, d, c6, seg.omega, seg.delta);
        psi = HamiltonianEigen::new(&h).propagate(seg.dt_us, &psi);
    }
    psi
}

/// Page's mean entanglement entropy of a Haar state, d_a <= d_b:
/// psi(d_a d_b + 1) - psi(d_b + 1) - (d_a - 1) / (2 d_b).
pub fn page_entropy(d_a: usize, d_b: usize) -> f64 {
    assert!(d_a <= d_b);
    use statrs::function::gamma::digamma;
    digamma((d_a * d_b + 1) as f64) - digamma((d_b + 1) as f64)
        - (d_a as f64 - 1.0) / (2.0 * d_b as f64)
}
