//! Closed-form distribution of the drive-detuning ratio eta = Omega / |V - Delta|
//! under uniform sampling of the drive amplitudes, plus the characteristic
//! crossover distance.

use serde::{Deserialize, Serialize};

use crate::stats::histogram::{summarize, Summary};
use crate::{Error, Result};

/// Which branch structure applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EtaCase {
    /// V > Delta_max: the detuning never crosses V; density has compact
    /// support [0, eta_plus].
    StrongInteraction,
    /// 0 < V <= Delta_max: the antiblockade point is reachable and the
    /// density has a 1/eta^2 tail (eta_plus = infinity at V = Delta_max).
    WeakInteraction,
}

/// Parameters of the eta distribution for one interaction strength.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EtaModel {
    pub v: f64,
    pub omega_max: f64,
    pub delta_max: f64,
    pub eta_minus: f64,
    pub eta_plus: f64,
    pub case: EtaCase,
}

impl EtaModel {
    pub fn new(v: f64, omega_max: f64, delta_max: f64) -> Result<Self> {
        if v <= 0.0 {
            return Err(Error::NonPositiveInteraction(v));
        }
        if omega_max <= 0.0 || delta_max <= 0.0 {
            return Err(Error::InvalidConfig(
                "omega_max and delta_max must be positive".into(),
            ));
        }
        let case = if v > delta_max {
            EtaCase::StrongInteraction
        } else {
            EtaCase::WeakInteraction
        };
        let eta_minus = omega_max / (v + delta_max);
        let eta_plus = if v == delta_max {
            f64::INFINITY
        } else {
            omega_max / (v - delta_max).abs()
        };
        Ok(Self {
            v,
            omega_max,
            delta_max,
            eta_minus,
            eta_plus,
            case,
        })
    }

    /// Probability density of eta.
    pub fn pdf(&self, eta: f64) -> Result<f64> {
        if eta < 0.0 {
            return Err(Error::NegativeArgument(eta));
        }
        let (om, dm, v) = (self.omega_max, self.delta_max, self.v);
        Ok(match self.case {
            EtaCase::StrongInteraction => {
                if eta <= self.eta_minus {
                    v / om
                } else if eta <= self.eta_plus {
                    om / (4.0 * dm) * (1.0 / (eta * eta) - ((v - dm) / om).powi(2))
                } else {
                    0.0
                }
            }
            EtaCase::WeakInteraction => {
                if eta <= self.eta_minus {
                    (dm * dm + v * v) / (2.0 * om * dm)
                } else if eta <= self.eta_plus {
                    om / (4.0 * dm) * (1.0 / (eta * eta) + ((dm - v) / om).powi(2))
                } else {
                    om / (2.0 * dm) / (eta * eta)
                }
            }
        })
    }

    /// Cumulative distribution, the closed-form piecewise antiderivative of
    /// the density. Continuous, monotone, -> 1 as eta -> infinity.
    pub fn cdf(&self, eta: f64) -> Result<f64> {
        if eta < 0.0 {
            return Err(Error::NegativeArgument(eta));
        }
        let (om, dm, v) = (self.omega_max, self.delta_max, self.v);
        let em = self.eta_minus;
        let ep = self.eta_plus;
        let value = match self.case {
            EtaCase::StrongInteraction => {
                let plateau = v / om;
                if eta <= em {
                    plateau * eta
                } else if eta <= ep {
                    let c2 = ((v - dm) / om).powi(2);
                    plateau * em + om / (4.0 * dm) * (1.0 / em - 1.0 / eta - c2 * (eta - em))
                } else {
                    1.0
                }
            }
            EtaCase::WeakInteraction => {
                let plateau = (dm * dm + v * v) / (2.0 * om * dm);
                let mid = |x: f64| {
                    let c2 = ((dm - v) / om).powi(2);
                    plateau * em + om / (4.0 * dm) * (1.0 / em - 1.0 / x + c2 * (x - em))
                };
                if eta <= em {
                    plateau * eta
                } else if eta <= ep {
                    mid(eta)
                } else {
                    // finite eta_plus: continue with the 1/eta^2 tail
                    mid(ep) + om / (2.0 * dm) * (1.0 / ep - 1.0 / eta)
                }
            }
        };
        Ok(value.min(1.0))
    }
}

/// Characteristic distance d_tilde = (C6 / (Omega_max + Delta_max))^(1/6), the
/// shortest spacing at which sampled pulses can reach eta ~ 1.
pub fn characteristic_distance(c6: f64, omega_max: f64, delta_max: f64) -> f64 {
    (c6 / (omega_max + delta_max)).powf(1.0 / 6.0)
}

/// Median and central-68% band of an ensemble of nearest-neighbor correlator
/// values (one (d, T_f) cell of the blockade study).
pub fn blockade_diagnostic(nn_correlations: &[f64]) -> Result<Summary> {
    summarize(nn_correlations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{DEFAULT_C6, DEFAULT_DELTA_MAX, DEFAULT_OMEGA_MAX};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn model_at(d: f64) -> EtaModel {
        let v = DEFAULT_C6 / d.powi(6);
        EtaModel::new(v, DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX).unwrap()
    }

    /// Adaptive-free quadrature oracle: dense trapezoid on the compact part
    /// plus the exact tail integral for the weak-interaction case.
    fn pdf_integral(model: &EtaModel) -> f64 {
        let upper = if model.eta_plus.is_finite() {
            model.eta_plus
        } else {
            model.eta_minus * 1e4
        };
        let n = 2_000_000;
        let h = upper / n as f64;
        let mut total = 0.5 * (model.pdf(0.0).unwrap() + model.pdf(upper).unwrap());
        for i in 1..n {
            total += model.pdf(i as f64 * h).unwrap();
        }
        let mut integral = total * h;
        match model.case {
            EtaCase::StrongInteraction => {}
            EtaCase::WeakInteraction => {
                // exact tail of c/eta^2 beyond `upper`
                integral += model.omega_max / (2.0 * model.delta_max) / upper;
            }
        }
        integral
    }

    #[test]
    fn case_a_plateau_and_support() {
        // d = 5 um with defaults: V = 5420503/5^6 = 346.9 -> case A
        let m = model_at(5.0);
        assert_eq!(m.case, EtaCase::StrongInteraction);
        let v = DEFAULT_C6 / 5.0f64.powi(6);
        assert_relative_eq!(m.pdf(0.0).unwrap(), v / 12.0, epsilon = 1e-12);
        assert_eq!(m.pdf(m.eta_plus * 1.01).unwrap(), 0.0);
        assert!(m.eta_minus <= m.eta_plus);
    }

    #[test]
    fn pdf_normalization_both_cases() {
        for d in [5.0, 7.0, 10.0] {
            let m = model_at(d);
            let integral = pdf_integral(&m);
            assert!(
                (integral - 1.0).abs() < 1e-8,
                "d = {d}: integral = {integral}"
            );
        }
    }

    #[test]
    fn pdf_continuity_at_breakpoints() {
        for d in [5.0, 7.0, 10.0] {
            let m = model_at(d);
            let eps = 1e-9 * m.eta_minus;
            let lo = m.pdf(m.eta_minus - eps).unwrap();
            let hi = m.pdf(m.eta_minus + eps).unwrap();
            assert!((lo - hi).abs() < 1e-6 * lo.abs().max(1.0), "d = {d} at eta-");
            if m.eta_plus.is_finite() {
                let lo = m.pdf(m.eta_plus).unwrap();
                let hi = m.pdf(m.eta_plus + eps.max(1e-12)).unwrap();
                match m.case {
                    // density vanishes continuously at eta_plus
                    EtaCase::StrongInteraction => {
                        assert!(lo.abs() < 1e-9 && hi == 0.0, "d = {d} at eta+")
                    }
                    // density continuous across eta_plus
                    EtaCase::WeakInteraction => {
                        assert!((lo - hi).abs() < 1e-6 * lo.max(1.0), "d = {d} at eta+")
                    }
                }
            }
        }
    }

    #[test]
    fn antiblockade_limit_v_equals_delta_max() {
        let m = EtaModel::new(DEFAULT_DELTA_MAX, DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX).unwrap();
        assert!(m.eta_plus.is_infinite());
        assert!((pdf_integral(&m) - 1.0).abs() < 1e-4);
        // third branch has disappeared: the mid form applies to any eta
        let far = 1e6;
        assert_relative_eq!(
            m.pdf(far).unwrap(),
            DEFAULT_OMEGA_MAX / (4.0 * DEFAULT_DELTA_MAX) / (far * far),
            max_relative = 1e-12
        );
    }

    #[test]
    fn cdf_matches_pdf_quadrature() {
        for d in [5.0, 7.0, 10.0] {
            let m = model_at(d);
            assert_eq!(m.cdf(0.0).unwrap(), 0.0);
            // constant-density segment
            assert_relative_eq!(
                m.cdf(m.eta_minus).unwrap(),
                m.pdf(0.0).unwrap() * m.eta_minus,
                epsilon = 1e-12
            );
            // grid check against cumulative trapezoid of the pdf
            let upper = if m.eta_plus.is_finite() {
                m.eta_plus * 1.2
            } else {
                m.eta_minus * 100.0
            };
            let n = 1_000;
            let steps = 2_000usize;
            for i in 1..=n {
                let eta = upper * i as f64 / n as f64;
                let h = eta / steps as f64;
                let mut quad = 0.5 * (m.pdf(0.0).unwrap() + m.pdf(eta).unwrap());
                for k in 1..steps {
                    quad += m.pdf(k as f64 * h).unwrap();
                }
                quad *= h;
                assert!(
                    (quad - m.cdf(eta).unwrap()).abs() < 1e-6,
                    "d = {d}, eta = {eta}"
                );
            }
            assert!(m.cdf(1e12).unwrap() > 1.0 - 1e-6);
        }
    }

    #[test]
    fn monte_carlo_ks_distance() {
        // 1e6 samples of eta = Omega / |V - Delta| vs the closed-form CDF
        for d in [5.0, 7.0, 10.0] {
            let m = model_at(d);
            let v = m.v;
            let mut rng = ChaCha12Rng::seed_from_u64(99);
            let n = 1_000_000usize;
            let mut etas: Vec<f64> = (0..n)
                .map(|_| {
                    let omega = rng.gen_range(0.0..=DEFAULT_OMEGA_MAX);
                    let delta = rng.gen_range(-DEFAULT_DELTA_MAX..=DEFAULT_DELTA_MAX);
                    omega / (v - delta).abs()
                })
                .collect();
            etas.sort_by(f64::total_cmp);
            let mut ks: f64 = 0.0;
            for (i, &eta) in etas.iter().enumerate() {
                let cdf = m.cdf(eta).unwrap();
                ks = ks
                    .max((cdf - i as f64 / n as f64).abs())
                    .max((cdf - (i + 1) as f64 / n as f64).abs());
            }
            assert!(ks < 2e-3, "d = {d}: KS = {ks}");
        }
    }

    #[test]
    fn characteristic_distance_examples() {
        let d = characteristic_distance(DEFAULT_C6, DEFAULT_OMEGA_MAX, DEFAULT_DELTA_MAX);
        assert!((d - 7.44).abs() < 0.01, "d_tilde = {d}");
        // sixth-root scaling
        assert_relative_eq!(
            characteristic_distance(64.0 * DEFAULT_C6, 12.0, 20.0),
            2.0 * d,
            max_relative = 1e-12
        );
        assert_relative_eq!(characteristic_distance(32.0, 12.0, 20.0), 1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(EtaModel::new(0.0, 12.0, 20.0).is_err());
        assert!(EtaModel::new(-1.0, 12.0, 20.0).is_err());
        assert!(EtaModel::new(1.0, 0.0, 20.0).is_err());
        let m = model_at(7.0);
        assert!(m.pdf(-0.1).is_err());
        assert!(m.cdf(-0.1).is_err());
    }
}
