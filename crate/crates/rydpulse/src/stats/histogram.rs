//! Binned empirical distributions, JS divergence, percentile summaries.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Histogram with uniform-or-not bin edges plus explicit out-of-range
/// counters. The overflow counter doubles as the "overflow bin" of the omega
/// histograms; it enters probability masses (and thus JS divergences) as one
/// extra category but not the in-range density.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Histogram {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn uniform(lo: f64, hi: f64, n_bins: usize) -> Self {
        assert!(hi > lo && n_bins > 0);
        let width = (hi - lo) / n_bins as f64;
        let bin_edges = (0..=n_bins).map(|i| lo + width * i as f64).collect();
        Self {
            bin_edges,
            counts: vec![0; n_bins],
            underflow: 0,
            overflow: 0,
        }
    }

    pub fn observe(&mut self, x: f64) {
        let lo = self.bin_edges[0];
        let hi = *self.bin_edges.last().unwrap();
        if x < lo {
            self.underflow += 1;
        } else if x >= hi {
            self.overflow += 1;
        } else {
            // uniform and non-uniform edges both handled by binary search
            let idx = match self
                .bin_edges
                .binary_search_by(|e| e.partial_cmp(&x).unwrap())
            {
                Ok(i) => i.min(self.counts.len() - 1),
                Err(i) => i - 1,
            };
            self.counts[idx] += 1;
        }
    }

    pub fn observe_all<I: IntoIterator<Item = f64>>(&mut self, xs: I) {
        for x in xs {
            self.observe(x);
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.underflow + self.overflow
    }

    /// In-range density: integrates to 1 over the binned range when any
    /// in-range count exists.
    pub fn density(&self) -> Vec<f64> {
        let in_range: u64 = self.counts.iter().sum();
        if in_range == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts
            .iter()
            .zip(self.bin_edges.windows(2))
            .map(|(&c, w)| c as f64 / in_range as f64 / (w[1] - w[0]))
            .collect()
    }

    /// Probability masses over in-range bins plus a final overflow category.
    /// Underflow is folded into the first bin (only relevant for signed data
    /// observed against a non-negative range).
    pub fn masses(&self) -> Vec<f64> {
        let total = self.total();
        let mut m: Vec<f64> = self
            .counts
            .iter()
            .map(|&c| c as f64 / total as f64)
            .collect();
        if let Some(first) = m.first_mut() {
            *first += self.underflow as f64 / total as f64;
        }
        m.push(self.overflow as f64 / total as f64);
        m
    }

    pub fn same_edges(&self, other: &Self) -> bool {
        self.bin_edges == other.bin_edges
    }
}

/// Rebin raw values onto the given histogram's edges.
pub fn rebin(values: &[f64], template: &Histogram) -> Histogram {
    let mut h = Histogram {
        bin_edges: template.bin_edges.clone(),
        counts: vec![0; template.counts.len()],
        underflow: 0,
        overflow: 0,
    };
    h.observe_all(values.iter().copied());
    h
}

fn kl_to_mixture(p: &[f64], m: &[f64]) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &mi)| pi * (pi / mi).ln())
        .sum()
}

/// Jensen-Shannon divergence between probability mass vectors (natural log,
/// bounded by ln 2; 0 log 0 = 0).
pub fn js_divergence_masses(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    let m: Vec<f64> = p.iter().zip(q).map(|(&a, &b)| 0.5 * (a + b)).collect();
    0.5 * kl_to_mixture(p, &m) + 0.5 * kl_to_mixture(q, &m)
}

/// JS divergence between two histograms over identical bin edges.
pub fn js_divergence(p: &Histogram, q: &Histogram) -> Result<f64> {
    if !p.same_edges(q) {
        return Err(Error::BinMismatch);
    }
    Ok(js_divergence_masses(&p.masses(), &q.masses()))
}

/// Median and central-68% interval summary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Summary {
    pub median: f64,
    pub p16: f64,
    pub p84: f64,
    pub n: usize,
}

/// Linear-interpolation percentile of sorted data, q in [0, 1].
fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Median plus the [16th, 84th] percentile pair.
pub fn summarize(values: &[f64]) -> Result<Summary> {
    if values.is_empty() {
        return Err(Error::EmptyInput("summarize"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(Summary {
        median: percentile_sorted(&sorted, 0.5),
        p16: percentile_sorted(&sorted, 0.16),
        p84: percentile_sorted(&sorted, 0.84),
        n: values.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn density_normalization() {
        let mut h = Histogram::uniform(0.0, 8.0, 60);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        h.observe_all((0..5000).map(|_| rng.gen_range(-1.0..12.0)));
        let integral: f64 = h
            .density()
            .iter()
            .zip(h.bin_edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum();
        assert!((integral - 1.0).abs() < 1e-12);
        let mass: f64 = h.masses().iter().sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn js_trivial_cases() {
        let mut p = Histogram::uniform(0.0, 1.0, 10);
        p.observe_all([0.05, 0.15, 0.25]);
        assert_eq!(js_divergence(&p, &p).unwrap(), 0.0);

        let mut q = Histogram::uniform(0.0, 1.0, 10);
        q.observe_all([0.75, 0.85, 0.95]);
        let js = js_divergence(&p, &q).unwrap();
        assert!((js - std::f64::consts::LN_2).abs() < 1e-12, "disjoint -> ln 2");

        let other = Histogram::uniform(0.0, 2.0, 10);
        assert!(js_divergence(&p, &other).is_err());
    }

    #[test]
    fn js_self_distance_floor() {
        // two draws from the same distribution sit near the sampling floor
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let template = Histogram::uniform(0.0, 1.0, 50);
        let draw = |rng: &mut ChaCha12Rng| -> Vec<f64> {
            (0..10_000).map(|_| rng.gen::<f64>().powf(0.7)).collect()
        };
        let a = rebin(&draw(&mut rng), &template);
        let b = rebin(&draw(&mut rng), &template);
        let js = js_divergence(&a, &b).unwrap();
        // bootstrap-style calibration: repeat and take the max as the floor
        let mut floor: f64 = 0.0;
        for _ in 0..5 {
            let x = rebin(&draw(&mut rng), &template);
            let y = rebin(&draw(&mut rng), &template);
            floor = floor.max(js_divergence(&x, &y).unwrap());
        }
        assert!(js <= 2.0 * floor.max(1e-4), "js {js} floor {floor}");
        assert!(js < 0.01);
    }

    #[test]
    fn summarize_examples() {
        let s = summarize(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(s.median, 2.0);

        let s = summarize(&[5.0; 40]).unwrap();
        assert_eq!(s.p16, s.p84);

        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn uniform_interval_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let vals: Vec<f64> = (0..100_000).map(|_| rng.gen::<f64>()).collect();
        let s = summarize(&vals).unwrap();
        assert!((s.p16 - 0.16).abs() < 0.01);
        assert!((s.p84 - 0.84).abs() < 0.01);
        assert!((s.median - 0.5).abs() < 0.01);
    }
}
