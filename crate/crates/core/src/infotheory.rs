//! Closed-form rates for BPSK readout strategies, in bits per time bin.
//!
//! Everything here works in a form that stays accurate for mean photon
//! numbers spanning many decades: `1 - e^{-x}` goes through `expm1`,
//! `ln(1 - x)` through `ln_1p`, and the two quantities that are differences
//! of nearly equal entropies (`1 - H(ε)` and `H(λp) - λH(p)`) switch to their
//! power series when the leading terms would cancel.

use std::f64::consts::{E, LN_2};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Slope of the optimal individual-detection rate at low power, `2 / ln 2`.
pub const BETA: f64 = 2.0 / LN_2;

/// `2^β = e²`, so the hybrid branch point `e 2^β + 1` is `e³ + 1`.
pub fn two_pow_beta() -> f64 {
    BETA.exp2()
}

/// Sequence length at which the asymptotic hybrid optimum switches to `λ = 1`.
pub fn hybrid_branch_point() -> f64 {
    E * two_pow_beta() + 1.0
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RateError {
    #[error("probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("mean photon number {0} must be finite and nonnegative")]
    PhotonNumber(f64),
    #[error("mean photon number {value} is outside the open interval ({lo}, {hi})")]
    PhotonNumberRange { value: f64, lo: f64, hi: f64 },
    #[error("sequence length {0} is out of range for this formula")]
    Length(f64),
    #[error("prior weight {0} is outside [0, 1]")]
    Lambda(f64),
    #[error("transmission {0} is outside (0, 1]")]
    Transmission(f64),
}

/// Operating point of the hybrid scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub n_bar: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub lambda: f64,
    pub transmission: f64,
}

impl ChannelParams {
    pub fn new(n_bar: f64, length: usize, lambda: f64) -> Self {
        Self {
            n_bar,
            length,
            lambda,
            transmission: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), RateError> {
        check_photon_number(self.n_bar)?;
        check_probability(self.lambda).map_err(|_| RateError::Lambda(self.lambda))?;
        if self.length < 1 {
            return Err(RateError::Length(self.length as f64));
        }
        if !(self.transmission > 0.0 && self.transmission <= 1.0) {
            return Err(RateError::Transmission(self.transmission));
        }
        Ok(())
    }

    /// Mean photon number per bin after the lossy receiver.
    pub fn effective_n_bar(&self) -> f64 {
        self.n_bar * self.transmission
    }
}

fn check_probability(x: f64) -> Result<(), RateError> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(RateError::Probability(x))
    }
}

fn check_photon_number(n: f64) -> Result<(), RateError> {
    if n.is_finite() && n >= 0.0 || n == f64::INFINITY {
        Ok(())
    } else {
        Err(RateError::PhotonNumber(n))
    }
}

/// `-(1-x) ln(1-x)` without the `0 · ln 0` hazard at `x = 1`.
fn neg_one_minus_x_ln(x: f64) -> f64 {
    if x >= 1.0 {
        0.0
    } else {
        -(1.0 - x) * (-x).ln_1p()
    }
}

/// `-x ln x`, zero at the origin.
fn neg_x_ln(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.ln()
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> Result<f64, RateError> {
    check_probability(x)?;
    // symmetric; the smaller argument carries the precision
    let y = if x <= 0.5 { x } else { 1.0 - x };
    let nats = neg_x_ln(y) + neg_one_minus_x_ln(y);
    Ok((nats / LN_2).clamp(0.0, 1.0))
}

/// Minimum error probability for `|α⟩` vs `|-α⟩` with `|α|² = n_eff`.
pub fn helstrom_error(n_eff: f64) -> Result<f64, RateError> {
    check_photon_number(n_eff)?;
    let separation = (-(-4.0 * n_eff).exp_m1()).sqrt();
    Ok(0.5 * (1.0 - separation))
}

/// `1 - H(½(1 - s))` in bits, for `s ∈ [0, 1]`.
///
/// Equal to `[(1+s) ln(1+s) + (1-s) ln(1-s)] / (2 ln 2)`; for small `s` the
/// series `Σ s^{2k} / (k (2k-1))` avoids the cancellation.
fn bsc_capacity_from_separation(s: f64) -> f64 {
    let nats = if s < 0.05 {
        let s2 = s * s;
        let mut term = s2;
        let mut sum = 0.0;
        for k in 1..=12 {
            let k = k as f64;
            sum += term / (k * (2.0 * k - 1.0));
            term *= s2;
        }
        sum
    } else if s >= 1.0 {
        2.0 * LN_2
    } else {
        (1.0 + s) * s.ln_1p() + (1.0 - s) * (-s).ln_1p()
    };
    (nats / (2.0 * LN_2)).clamp(0.0, 1.0)
}

/// Mutual information of the binary symmetric channel `1 - H(ε(n_eff))`.
fn helstrom_channel_rate(n_eff: f64) -> f64 {
    let separation = (-(-4.0 * n_eff).exp_m1()).sqrt();
    bsc_capacity_from_separation(separation)
}

/// Optimal individual detection, `1 - H(ε(n̄))`.
pub fn rate_individual(n_bar: f64) -> Result<f64, RateError> {
    check_photon_number(n_bar)?;
    Ok(helstrom_channel_rate(n_bar))
}

/// Low-power form `β n̄`.
pub fn rate_individual_asymptotic(n_bar: f64) -> f64 {
    BETA * n_bar
}

/// Holevo quantity of the equiprobable BPSK ensemble.
pub fn holevo_bpsk(n_bar: f64) -> Result<f64, RateError> {
    check_photon_number(n_bar)?;
    let x = -0.5 * (-2.0 * n_bar).exp_m1();
    binary_entropy(x.min(0.5))
}

/// Leading term `n̄ log₂(1/n̄)`.
pub fn holevo_bpsk_asymptotic(n_bar: f64) -> f64 {
    if n_bar <= 0.0 {
        0.0
    } else {
        -n_bar * n_bar.log2()
    }
}

/// Second-order low-power capacity `n̄ log₂(1/n̄) + n̄ / ln 2`.
pub fn capacity_asymptote(n_bar: f64) -> Result<f64, RateError> {
    if !(n_bar > 0.0 && n_bar < 1.0) {
        return Err(RateError::PhotonNumberRange {
            value: n_bar,
            lo: 0.0,
            hi: 1.0,
        });
    }
    Ok(-n_bar * n_bar.log2() + n_bar / LN_2)
}

fn check_length(length: f64, min: f64) -> Result<(), RateError> {
    if length.is_finite() && length >= min {
        Ok(())
    } else {
        Err(RateError::Length(length))
    }
}

/// Probability that the PPM pulse of energy `L n̄` produces a click.
pub fn ppm_click_probability(n_bar: f64, length: f64) -> Result<f64, RateError> {
    check_photon_number(n_bar)?;
    check_length(length, 1.0)?;
    Ok(-(-length * n_bar).exp_m1())
}

/// Erasure-channel rate of direct PPM detection, `(p / L) log₂ L`.
///
/// `length` is real so the same formula serves the continuous-L curves.
pub fn rate_ppm(n_bar: f64, length: f64) -> Result<f64, RateError> {
    check_length(length, 2.0)?;
    let p = ppm_click_probability(n_bar, length)?;
    Ok(p / length * length.log2())
}

/// `n̄ log₂ L`, valid while `L n̄ ≪ 1`.
pub fn rate_ppm_asymptotic(n_bar: f64, length: f64) -> f64 {
    n_bar * length.log2()
}

/// Two-term expansion of the PPM rate at its optimal length.
pub fn rate_ppm_optimal_expansion(n_bar: f64) -> f64 {
    let inv = 1.0 / n_bar;
    n_bar * inv.log2() - n_bar * inv.ln().log2()
}

/// Golden-section maximization of a unimodal function on `[lo, hi]`.
fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    0.5 * (lo + hi)
}

/// Continuous sequence length maximizing the exact PPM rate, and the rate there.
pub fn ppm_optimal_length(n_bar: f64) -> Result<(f64, f64), RateError> {
    if !(n_bar > 0.0 && n_bar < 0.1) {
        return Err(RateError::PhotonNumberRange {
            value: n_bar,
            lo: 0.0,
            hi: 0.1,
        });
    }
    // the optimum has L n̄ of order a few; search ln L over a generous bracket
    let rate = |ln_l: f64| rate_ppm(n_bar, ln_l.exp()).unwrap_or(0.0);
    let lo = 2f64.ln();
    let hi = (100.0 / n_bar).ln();
    let ln_opt = golden_max(rate, lo, hi, 1e-12);
    let length = ln_opt.exp();
    Ok((length, rate_ppm(n_bar, length)?))
}

/// `Σ_{k≥2} (λ - λ^k) p^k / (k (k-1))`, the part of `H(λp) - λH(p)` (in nats)
/// beyond `λ p ln(1/λ)`. Every term is nonnegative.
fn z_channel_remainder_series(lambda: f64, p: f64) -> f64 {
    let mut sum = 0.0;
    let mut p_pow = p;
    let mut l_pow = lambda;
    for k in 2..=40 {
        p_pow *= p;
        l_pow *= lambda;
        let k = k as f64;
        let term = (lambda - l_pow) * p_pow / (k * (k - 1.0));
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Z-channel mutual information `H(λp) - λ H(p)`.
pub fn z_channel_term(lambda: f64, p: f64) -> Result<f64, RateError> {
    check_probability(lambda).map_err(|_| RateError::Lambda(lambda))?;
    check_probability(p)?;
    if lambda == 0.0 || p == 0.0 {
        return Ok(0.0);
    }
    let nats = if p < 0.05 {
        lambda * p * (-lambda.ln()) + z_channel_remainder_series(lambda, p)
    } else {
        let lp = lambda * p;
        neg_x_ln(lp) + neg_one_minus_x_ln(lp) - lambda * (neg_x_ln(p) + neg_one_minus_x_ln(p))
    };
    Ok((nats / LN_2).max(0.0))
}

/// Small-`p` approximation `λ p log₂(1/λ)`.
pub fn z_channel_term_asymptotic(lambda: f64, p: f64) -> f64 {
    if lambda <= 0.0 {
        0.0
    } else {
        -lambda * p * lambda.log2()
    }
}

/// Exact hybrid rate:
/// `(1/L){(1-λ)[1 - H(ε(L n̄))] + λ p log₂(L-1) + H(λp) - λ H(p)}`.
///
/// Uses `params.n_bar` as is; apply [`ChannelParams::effective_n_bar`] first
/// when modelling a lossy receiver.
pub fn rate_hybrid(params: &ChannelParams) -> Result<f64, RateError> {
    params.validate()?;
    rate_hybrid_continuous(params.n_bar, params.length as f64, params.lambda)
}

/// [`rate_hybrid`] with a real-valued sequence length.
pub fn rate_hybrid_continuous(n_bar: f64, length: f64, lambda: f64) -> Result<f64, RateError> {
    check_photon_number(n_bar)?;
    check_length(length, 2.0)?;
    check_probability(lambda).map_err(|_| RateError::Lambda(lambda))?;
    let energy = length * n_bar;
    let p = -(-energy).exp_m1();
    let binary = helstrom_channel_rate(energy);
    let erasure = p * (length - 1.0).log2();
    let z = z_channel_term(lambda, p)?;
    Ok(((1.0 - lambda) * binary + lambda * erasure + z) / length)
}

/// Closed-form low-power optimum `λ* = min(1, (L-1) / (e 2^β))`.
pub fn lambda_star_asymptotic(length: f64) -> f64 {
    ((length - 1.0) / (E * two_pow_beta())).min(1.0)
}

/// Maximizes the exact hybrid rate over `λ ∈ [0, 1]`; returns `(λ_opt, rate)`.
pub fn optimize_lambda(n_bar: f64, length: usize) -> Result<(f64, f64), RateError> {
    optimize_lambda_continuous(n_bar, length as f64)
}

pub fn optimize_lambda_continuous(n_bar: f64, length: f64) -> Result<(f64, f64), RateError> {
    if !(n_bar > 0.0 && n_bar.is_finite()) {
        return Err(RateError::PhotonNumber(n_bar));
    }
    check_length(length, 2.0)?;
    let rate = |lambda: f64| rate_hybrid_continuous(n_bar, length, lambda).unwrap_or(f64::MIN);
    // concave in λ: H(λp) is concave, the rest is linear
    let interior = golden_max(rate, 0.0, 1.0, 1e-11);
    let best = [0.0, interior, 1.0]
        .into_iter()
        .map(|l| (l, rate(l)))
        .fold((0.0, f64::MIN), |acc, c| if c.1 > acc.1 { c } else { acc });
    Ok(best)
}

/// Piecewise low-power hybrid rate at the asymptotic optimum λ*.
pub fn rate_hybrid_asymptotic(n_bar: f64, length: f64) -> Result<f64, RateError> {
    check_length(length, 2.0)?;
    check_photon_number(n_bar)?;
    if length < hybrid_branch_point() {
        Ok(n_bar * (BETA + (length - 1.0) / (E * two_pow_beta() * LN_2)))
    } else {
        Ok(n_bar * (length - 1.0).log2())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn direct_entropy(x: f64) -> f64 {
        -x * x.log2() - (1.0 - x) * (1.0 - x).log2()
    }

    #[test]
    fn binary_entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(
            binary_entropy(0.11).unwrap(),
            direct_entropy(0.11),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            binary_entropy(0.89).unwrap(),
            direct_entropy(0.11),
            max_relative = 1e-14
        );
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn helstrom_values() {
        assert_eq!(helstrom_error(0.0).unwrap(), 0.5);
        assert_eq!(helstrom_error(f64::INFINITY).unwrap(), 0.0);
        // ½(1 - sqrt(1 - e^{-1}))
        assert_relative_eq!(
            helstrom_error(0.25).unwrap(),
            0.102_469_951_189_674_95,
            max_relative = 1e-14
        );
        assert!(helstrom_error(-1e-3).is_err());
    }

    #[test]
    fn individual_rate() {
        assert_eq!(rate_individual(0.0).unwrap(), 0.0);
        let n = 1e-5;
        let slope = rate_individual(n).unwrap() / n;
        assert!((slope / BETA - 1.0).abs() < 0.01);
        assert_relative_eq!(BETA, 2.885_390_081_777_926_8, max_relative = 1e-15);
        assert!(rate_individual(2e-2).unwrap() < BETA * 2e-2);
        // agrees with the direct formula where cancellation is harmless
        let n: f64 = 0.3;
        let direct = 1.0 - direct_entropy(0.5 * (1.0 - (1.0 - (-4.0 * n).exp()).sqrt()));
        assert_relative_eq!(rate_individual(n).unwrap(), direct, max_relative = 1e-12);
        // series branch matches the closed form at the switch point
        let s: f64 = 0.05;
        let closed = ((1.0 + s) * s.ln_1p() + (1.0 - s) * (-s).ln_1p()) / (2.0 * LN_2);
        assert_relative_eq!(
            bsc_capacity_from_separation(0.049_999_999_999),
            closed,
            max_relative = 1e-9
        );
    }

    #[test]
    fn holevo_values() {
        assert_eq!(holevo_bpsk(0.0).unwrap(), 0.0);
        assert_relative_eq!(holevo_bpsk(50.0).unwrap(), 1.0, max_relative = 1e-12);
        let n = 1e-4;
        let chi = holevo_bpsk(n).unwrap();
        let ind = rate_individual(n).unwrap();
        assert!(chi / ind > 4.0, "{}", chi / ind);
        assert!(chi < capacity_asymptote(n).unwrap());
        // shares the leading n̄ log₂(1/n̄) term
        assert!((chi / holevo_bpsk_asymptotic(n) - 1.0).abs() < 0.15);
    }

    #[test]
    fn capacity_values() {
        let n = 1e-3;
        assert_relative_eq!(
            capacity_asymptote(n).unwrap(),
            n * 1000f64.log2() + n / LN_2,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            capacity_asymptote(0.5).unwrap(),
            0.5 + 0.5 / LN_2,
            max_relative = 1e-14
        );
        assert!(capacity_asymptote(0.0).is_err());
        assert!(capacity_asymptote(1.0).is_err());
    }

    #[test]
    fn ppm_values() {
        assert_eq!(ppm_click_probability(0.0, 8.0).unwrap(), 0.0);
        assert_eq!(ppm_click_probability(f64::INFINITY, 8.0).unwrap(), 1.0);
        assert_relative_eq!(
            ppm_click_probability(2e-4, 8.0).unwrap(),
            1.0 - (-0.0016f64).exp(),
            max_relative = 1e-12
        );
        assert_eq!(rate_ppm(0.0, 8.0).unwrap(), 0.0);
        assert!(rate_ppm(1e-3, 1.0).is_err());
        let n = 2e-4;
        let r8 = rate_ppm(n, 8.0).unwrap() / rate_individual(n).unwrap();
        assert!(r8 > 1.0 && (r8 - 3.0 / BETA).abs() < 2e-3, "{r8}");
        assert!(rate_ppm(n, 4.0).unwrap() < rate_individual(n).unwrap());
    }

    #[test]
    fn ppm_optimum() {
        let n = 1e-6;
        let (_, rate) = ppm_optimal_length(n).unwrap();
        let expansion = rate_ppm_optimal_expansion(n);
        assert!(
            (rate / expansion - 1.0).abs() < 0.05,
            "{rate} vs {expansion}"
        );

        let (l4, _) = ppm_optimal_length(1e-4).unwrap();
        // brute-force grid oracle
        let grid_best = (0..200_000)
            .map(|i| 2.0 + i as f64 * 0.5)
            .map(|l| (l, rate_ppm(1e-4, l).unwrap()))
            .fold((0.0, 0.0), |a, c| if c.1 > a.1 { c } else { a });
        assert!((grid_best.0 - l4).abs() < 1.0);

        let (l_small, _) = ppm_optimal_length(1e-5).unwrap();
        assert!(l_small > l4);
        assert!(ppm_optimal_length(0.2).is_err());
    }

    #[test]
    fn z_channel() {
        assert_eq!(z_channel_term(0.0, 0.3).unwrap(), 0.0);
        assert!(z_channel_term(1.0, 0.3).unwrap().abs() < 1e-15);
        assert!(z_channel_term(1.0, 1e-3).unwrap().abs() < 1e-15);
        assert_eq!(z_channel_term(0.4, 0.0).unwrap(), 0.0);
        let (l, p) = (0.3, 1e-3);
        let exact = z_channel_term(l, p).unwrap();
        assert!((exact / z_channel_term_asymptotic(l, p) - 1.0).abs() < 0.02);
        // both branches agree with the direct entropy difference at moderate p
        for p in [0.01, 0.049, 0.051, 0.2] {
            let direct = direct_entropy(l * p) - l * direct_entropy(p);
            assert_relative_eq!(z_channel_term(l, p).unwrap(), direct, max_relative = 1e-10);
        }
        assert!(z_channel_term(1.2, 0.1).is_err());
        assert!(z_channel_term(0.5, -0.1).is_err());
    }

    #[test]
    fn hybrid_limits() {
        let (n, l) = (3e-3, 8usize);
        let p = ppm_click_probability(n, l as f64).unwrap();
        let at_one = rate_hybrid(&ChannelParams::new(n, l, 1.0)).unwrap();
        assert_relative_eq!(at_one, p * 7f64.log2() / 8.0, max_relative = 1e-12);
        let at_zero = rate_hybrid(&ChannelParams::new(n, l, 0.0)).unwrap();
        assert_relative_eq!(
            at_zero,
            rate_individual(8.0 * n).unwrap() / 8.0,
            max_relative = 1e-12
        );
        assert!(rate_hybrid(&ChannelParams::new(n, l, 1.5)).is_err());
        assert!(rate_hybrid(&ChannelParams::new(-n, l, 0.5)).is_err());
    }

    #[test]
    fn hybrid_two_bin_enhancement() {
        let n = 2e-4;
        let (_, best) = optimize_lambda(n, 2).unwrap();
        let ratio = best / rate_individual(n).unwrap();
        assert!((ratio - 1.025).abs() <= 1e-3, "{ratio}");
    }

    #[test]
    fn lambda_optimum() {
        let (lam, rate) = optimize_lambda(2e-4, 32).unwrap();
        assert!(lam > 1.0 - 1e-9);
        assert_relative_eq!(
            rate,
            rate_hybrid(&ChannelParams::new(2e-4, 32, 1.0)).unwrap()
        );
        assert!((rate / (2e-4 * 31f64.log2()) - 1.0).abs() < 0.01);

        let (_, rate8) = optimize_lambda(2e-4, 8).unwrap();
        let target = BETA + 7.0 / (E * two_pow_beta() * LN_2);
        assert!((rate8 / 2e-4 / target - 1.0).abs() < 0.01);

        let (lam8, _) = optimize_lambda(1e-5, 8).unwrap();
        assert!((lam8 - lambda_star_asymptotic(8.0)).abs() < 0.02);
        // grid oracle
        let best_grid = (0..=1000)
            .map(|i| rate_hybrid(&ChannelParams::new(1e-5, 8, i as f64 / 1000.0)).unwrap())
            .fold(f64::MIN, f64::max);
        let (_, opt) = optimize_lambda(1e-5, 8).unwrap();
        assert!(opt >= best_grid);
        assert!(optimize_lambda(0.0, 8).is_err());
        assert!(optimize_lambda(1e-3, 1).is_err());
    }

    #[test]
    fn hybrid_asymptotic_branches() {
        let n = 1e-3;
        let ratio2 = rate_hybrid_asymptotic(n, 2.0).unwrap() / (BETA * n);
        assert!((ratio2 - 1.025).abs() < 1e-3, "{ratio2}");
        assert_relative_eq!(
            rate_hybrid_asymptotic(n, 24.0).unwrap(),
            n * 23f64.log2(),
            max_relative = 1e-15
        );
        let threshold = hybrid_branch_point();
        assert!((threshold - 21.0855).abs() < 1e-3);
        let first = n * (BETA + (threshold - 1.0) / (E * two_pow_beta() * LN_2));
        let second = n * (threshold - 1.0).log2();
        assert_relative_eq!(first, second, max_relative = 1e-12);
    }
}
