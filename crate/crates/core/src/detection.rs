//! Readout of the circuit outputs: threshold photon counting on every port
//! and a time-sliced Dolinar receiver on the port that carries the `++…+`
//! and `--…-` words in the hybrid scheme.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::AmplitudeVector;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("detector efficiency {0} is outside [0, 1]")]
    Efficiency(f64),
    #[error("dark click probability {0} is outside [0, 1)")]
    DarkClicks(f64),
    #[error("Dolinar receiver needs at least one time slice")]
    NoSlices,
    #[error("amplitude cap {0} must be positive")]
    AmplitudeCap(f64),
    #[error("hypotheses must be a real pair (+a, -a) with a >= 0, got ({0}, {1})")]
    Hypotheses(Complex64, Complex64),
    #[error("record has {actual} ports, expected {expected}")]
    RecordLength { expected: usize, actual: usize },
    #[error("record {0} a Dolinar decision")]
    DolinarPresence(&'static str),
}

/// Threshold detector with optional inefficiency and dark clicks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorModel {
    pub efficiency: f64,
    /// Probability of a spurious click per time bin.
    pub dark_click_probability: f64,
}

impl Default for DetectorModel {
    fn default() -> Self {
        Self {
            efficiency: 1.0,
            dark_click_probability: 0.0,
        }
    }
}

impl DetectorModel {
    pub fn validate(&self) -> Result<(), DetectionError> {
        if !(0.0..=1.0).contains(&self.efficiency) {
            return Err(DetectionError::Efficiency(self.efficiency));
        }
        if !(0.0..1.0).contains(&self.dark_click_probability) {
            return Err(DetectionError::DarkClicks(self.dark_click_probability));
        }
        Ok(())
    }

    /// `1 - (1 - dark) e^{-efficiency · energy}`.
    pub fn click_probability(&self, energy: f64) -> f64 {
        let no_click_signal = (-self.efficiency * energy).exp();
        1.0 - (1.0 - self.dark_click_probability) * no_click_signal
    }
}

/// Click pattern of one threshold detector per port.
///
/// Draws exactly one uniform per port so the stream position after the call
/// does not depend on the amplitudes.
pub fn threshold_detect<R: Rng + ?Sized>(
    v: &AmplitudeVector,
    model: &DetectorModel,
    rng: &mut R,
) -> Vec<bool> {
    v.energies()
        .map(|energy| {
            let p = model.click_probability(energy);
            rng.gen::<f64>() < p
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    fn of(x: f64) -> Option<Sign> {
        if x > 0.0 {
            Some(Sign::Plus)
        } else if x < 0.0 {
            Some(Sign::Minus)
        } else {
            None
        }
    }

    fn coin<R: Rng + ?Sized>(rng: &mut R) -> Sign {
        if rng.gen::<bool>() {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// How the displacement magnitude of each slice is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum FeedbackLaw {
    /// Magnitude follows the continuous-time optimal law evaluated at the
    /// slice midpoint; the direction follows the posterior. Click times are
    /// sampled from precomputed cumulative hazards, so a trial costs
    /// O(clicks · log slices).
    #[default]
    Scheduled,
    /// Magnitude `a · coth(|ℓ|/2)` from the running log-likelihood ratio `ℓ`,
    /// stepped slice by slice.
    Posterior,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DolinarConfig {
    pub num_slices: u32,
    /// Bound on the displacement, in units of the whole-pulse amplitude.
    /// `None` uses the optimal law's value at the midpoint of the first slice.
    pub amplitude_cap: Option<f64>,
    pub feedback: FeedbackLaw,
    pub rng_seed: u64,
}

impl Default for DolinarConfig {
    fn default() -> Self {
        Self {
            num_slices: 1000,
            amplitude_cap: None,
            feedback: FeedbackLaw::Scheduled,
            rng_seed: 0,
        }
    }
}

impl DolinarConfig {
    pub fn validate(&self) -> Result<(), DetectionError> {
        if self.num_slices == 0 {
            return Err(DetectionError::NoSlices);
        }
        if let Some(cap) = self.amplitude_cap {
            if cap.is_nan() || cap <= 0.0 {
                return Err(DetectionError::AmplitudeCap(cap));
            }
        }
        Ok(())
    }
}

const LLR_LIMIT: f64 = 700.0;

/// `1 / sqrt(1 - e^{-4 n t})`: the optimal displacement at time `t` divided
/// by the signal amplitude.
fn optimal_gain(n_eff: f64, t: f64) -> f64 {
    1.0 / (-(-4.0 * n_eff * t).exp_m1()).sqrt()
}

/// Adaptive displacement receiver for the pair `(+a, -a)`.
///
/// The pulse is cut into `N` equal slices. Slice `k` is displaced by
/// `-f · c_k`, where `f` is the currently favoured sign, and hits a threshold
/// detector; after each slice the log-likelihood ratio `ℓ = ln P(+)/P(-)` is
/// updated by Bayes' rule and `f = sign(ℓ)` (a fair coin while `ℓ = 0`). The
/// final decision is `sign(ℓ)`.
#[derive(Debug, Clone)]
pub struct DolinarReceiver {
    amplitude: f64,
    slices: usize,
    efficiency: f64,
    /// Dark-click hazard per slice, `-ln(1 - dark) / N`.
    dark_hazard: f64,
    slice_amplitude: f64,
    cap: f64,
    law: FeedbackLaw,
    /// Scheduled displacement magnitudes `c_k` in per-slice amplitude units.
    displacement: Vec<f64>,
    prefix_c: Vec<f64>,
    prefix_c2: Vec<f64>,
    /// Σ eff (s - c)², the hazard when the favoured sign is the true one.
    prefix_matched: Vec<f64>,
    /// Σ eff (s + c)², the hazard when it is the wrong one.
    prefix_mismatched: Vec<f64>,
}

impl DolinarReceiver {
    pub fn new(
        hypotheses: (Complex64, Complex64),
        config: &DolinarConfig,
        detector: &DetectorModel,
    ) -> Result<Self, DetectionError> {
        config.validate()?;
        detector.validate()?;
        let (h0, h1) = hypotheses;
        if h0.im != 0.0 || h1.im != 0.0 || h0.re < 0.0 || h1.re != -h0.re || !h0.re.is_finite() {
            return Err(DetectionError::Hypotheses(h0, h1));
        }
        let amplitude = h0.re;
        let n = config.num_slices as usize;
        let root_n = (n as f64).sqrt();
        let n_eff = detector.efficiency * amplitude * amplitude;
        let cap = config
            .amplitude_cap
            .unwrap_or_else(|| amplitude * optimal_gain(n_eff, 0.5 / n as f64));
        let displacement: Vec<f64> = (0..n)
            .map(|k| {
                if n_eff == 0.0 {
                    return 0.0;
                }
                let t = (k as f64 + 0.5) / n as f64;
                (amplitude * optimal_gain(n_eff, t)).min(cap) / root_n
            })
            .collect();
        let s = amplitude / root_n;
        let eff = detector.efficiency;
        let prefix = |f: &dyn Fn(f64) -> f64| {
            let mut acc = Vec::with_capacity(n + 1);
            acc.push(0.0);
            let mut sum = 0.0;
            for &c in &displacement {
                sum += f(c);
                acc.push(sum);
            }
            acc
        };
        let prefix_c = prefix(&|c| c);
        let prefix_c2 = prefix(&|c| c * c);
        let prefix_matched = prefix(&|c| eff * (s - c) * (s - c));
        let prefix_mismatched = prefix(&|c| eff * (s + c) * (s + c));
        Ok(Self {
            amplitude,
            slices: n,
            efficiency: eff,
            dark_hazard: -(-detector.dark_click_probability).ln_1p() / n as f64,
            slice_amplitude: s,
            cap,
            law: config.feedback,
            displacement,
            prefix_c,
            prefix_c2,
            prefix_matched,
            prefix_mismatched,
        })
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn num_slices(&self) -> usize {
        self.slices
    }

    /// Displacement magnitude (whole-pulse units) the scheduled law applies in slice `k`.
    pub fn scheduled_displacement(&self, k: usize) -> f64 {
        self.displacement[k] * (self.slices as f64).sqrt()
    }

    /// Model hazards `(λ(+), λ(-))` of a slice displaced by `-fav · c`.
    fn model_hazards(&self, fav: f64, c: f64) -> (f64, f64) {
        let s = self.slice_amplitude;
        let eff = self.efficiency;
        let plus = eff * (s - fav * c) * (s - fav * c) + self.dark_hazard;
        let minus = eff * (s + fav * c) * (s + fav * c) + self.dark_hazard;
        (plus, minus)
    }

    fn click_update(&self, llr: f64, fav: f64, c: f64) -> f64 {
        let (plus, minus) = self.model_hazards(fav, c);
        let ln_click = |h: f64| (-(-h).exp_m1()).ln();
        (llr + ln_click(plus) - ln_click(minus)).clamp(-LLR_LIMIT, LLR_LIMIT)
    }

    /// Decides between `+a` and `-a` for a received amplitude `received`.
    ///
    /// `received` need not be one of the hypotheses; a vacuum input models the
    /// non-`±` words of the hybrid scheme.
    pub fn decide<R: Rng + ?Sized>(&self, received: Complex64, rng: &mut R) -> Sign {
        let llr = match self.law {
            FeedbackLaw::Scheduled => self.run_scheduled(received, rng),
            FeedbackLaw::Posterior => self.run_posterior(received, rng),
        };
        Sign::of(llr).unwrap_or_else(|| Sign::coin(rng))
    }

    fn favoured<R: Rng + ?Sized>(llr: f64, rng: &mut R) -> f64 {
        Sign::of(llr).unwrap_or_else(|| Sign::coin(rng)).value()
    }

    /// Cumulative true hazard over slices `[from, to)` with favoured sign `fav`.
    fn hazard(&self, received: Complex64, fav: f64, from: usize, to: usize) -> f64 {
        let len = (to - from) as f64;
        let dark = self.dark_hazard * len;
        let matched = |p: &[f64]| p[to] - p[from];
        if received.im == 0.0 && received.re.abs() == self.amplitude && self.amplitude > 0.0 {
            let truth = received.re.signum();
            if truth == fav {
                matched(&self.prefix_matched) + dark
            } else {
                matched(&self.prefix_mismatched) + dark
            }
        } else {
            let r = received / (self.slices as f64).sqrt();
            let linear = matched(&self.prefix_c);
            let quadratic = matched(&self.prefix_c2);
            let signal = r.norm_sqr() * len - 2.0 * fav * r.re * linear + quadratic;
            self.efficiency * signal.max(0.0) + dark
        }
    }

    fn run_scheduled<R: Rng + ?Sized>(&self, received: Complex64, rng: &mut R) -> f64 {
        let n = self.slices;
        let gain = 4.0 * self.efficiency * self.slice_amplitude;
        let mut llr = 0.0;
        let mut start = 0;
        while start < n {
            let fav = Self::favoured(llr, rng);
            let threshold: f64 = Exp1.sample(rng);
            if self.hazard(received, fav, start, n) < threshold {
                llr += fav * gain * (self.prefix_c[n] - self.prefix_c[start]);
                break;
            }
            // smallest end with hazard(start, end) >= threshold
            let (mut lo, mut hi) = (start + 1, n);
            while lo < hi {
                let mid = lo + (hi - lo) / 2;
                if self.hazard(received, fav, start, mid) >= threshold {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            let click = lo - 1;
            llr += fav * gain * (self.prefix_c[click] - self.prefix_c[start]);
            llr = self.click_update(llr, fav, self.displacement[click]);
            start = click + 1;
        }
        llr
    }

    fn run_posterior<R: Rng + ?Sized>(&self, received: Complex64, rng: &mut R) -> f64 {
        let root_n = (self.slices as f64).sqrt();
        let r = received / root_n;
        let s = self.slice_amplitude;
        let mut llr: f64 = 0.0;
        let mut budget: f64 = Exp1.sample(rng);
        for _ in 0..self.slices {
            let fav = Self::favoured(llr, rng);
            let total = if llr == 0.0 {
                self.cap
            } else {
                (self.amplitude / (0.5 * llr.abs()).tanh()).min(self.cap)
            };
            let c = total / root_n;
            let true_hazard = self.efficiency * (r - fav * c).norm_sqr() + self.dark_hazard;
            budget -= true_hazard;
            if budget <= 0.0 {
                llr = self.click_update(llr, fav, c);
                budget = Exp1.sample(rng);
            } else {
                llr += fav * 4.0 * self.efficiency * s * c;
            }
        }
        llr
    }
}

/// One-shot convenience wrapper around [`DolinarReceiver`].
pub fn dolinar_decide<R: Rng + ?Sized>(
    received: Complex64,
    hypotheses: (Complex64, Complex64),
    config: &DolinarConfig,
    rng: &mut R,
) -> Result<Sign, DetectionError> {
    let receiver = DolinarReceiver::new(hypotheses, config, &DetectorModel::default())?;
    Ok(receiver.decide(received, rng))
}

/// Raw measurement data of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub clicks: Vec<bool>,
    pub dolinar_port: Option<usize>,
    pub dolinar_decision: Option<Sign>,
}

impl DetectionRecord {
    pub fn direct(clicks: Vec<bool>) -> Self {
        Self {
            clicks,
            dolinar_port: None,
            dolinar_decision: None,
        }
    }

    pub fn hybrid(clicks: Vec<bool>, port: usize, decision: Sign) -> Self {
        Self {
            clicks,
            dolinar_port: Some(port),
            dolinar_decision: Some(decision),
        }
    }
}

/// Decoded measurement result of one word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Word(usize),
    PlusWord,
    MinusWord,
    Erasure,
    Ambiguous,
}

impl Outcome {
    pub fn label(&self) -> String {
        match self {
            Outcome::Word(k) => format!("w{k}"),
            Outcome::PlusWord => "plus".into(),
            Outcome::MinusWord => "minus".into(),
            Outcome::Erasure => "erasure".into(),
            Outcome::Ambiguous => "ambiguous".into(),
        }
    }
}

fn check_length(record: &DetectionRecord, length: usize) -> Result<(), DetectionError> {
    if record.clicks.len() != length {
        return Err(DetectionError::RecordLength {
            expected: length,
            actual: record.clicks.len(),
        });
    }
    Ok(())
}

/// PPM readout: one click names the word, none is an erasure.
pub fn decode_direct(record: &DetectionRecord, length: usize) -> Result<Outcome, DetectionError> {
    check_length(record, length)?;
    if record.dolinar_port.is_some() || record.dolinar_decision.is_some() {
        return Err(DetectionError::DolinarPresence("must not carry"));
    }
    let mut clicked = record.clicks.iter().enumerate().filter(|(_, &c)| c);
    Ok(match (clicked.next(), clicked.next()) {
        (None, _) => Outcome::Erasure,
        (Some((k, _)), None) => Outcome::Word(k),
        (Some(_), Some(_)) => Outcome::Ambiguous,
    })
}

/// Hybrid readout: photon-counter clicks win; otherwise the Dolinar sign.
pub fn decode_hybrid(record: &DetectionRecord, length: usize) -> Result<Outcome, DetectionError> {
    check_length(record, length)?;
    let (Some(port), Some(decision)) = (record.dolinar_port, record.dolinar_decision) else {
        return Err(DetectionError::DolinarPresence("must carry"));
    };
    let mut clicked = record
        .clicks
        .iter()
        .enumerate()
        .filter(|&(k, &c)| c && k != port);
    Ok(match (clicked.next(), clicked.next()) {
        (None, _) => match decision {
            Sign::Plus => Outcome::PlusWord,
            Sign::Minus => Outcome::MinusWord,
        },
        (Some((k, _)), None) => Outcome::Word(k),
        (Some(_), Some(_)) => Outcome::Ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::helstrom_error;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn within_binomial(count: u64, trials: u64, p: f64, sigmas: f64) -> bool {
        let freq = count as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        (freq - p).abs() <= sigmas * sigma + 1e-12
    }

    #[test]
    fn threshold_click_statistics() {
        let model = DetectorModel::default();
        let mut r = rng(1);
        let dark = AmplitudeVector::zeros(4);
        assert!((0..1000).all(|_| threshold_detect(&dark, &model, &mut r).iter().all(|c| !c)));

        let energy: f64 = 0.01;
        let v = AmplitudeVector::from_real(&[energy.sqrt()]);
        let trials = 1_000_000;
        let clicks = (0..trials)
            .filter(|_| threshold_detect(&v, &model, &mut r)[0])
            .count() as u64;
        let p = 1.0 - (-energy).exp();
        assert!((p - 0.00995).abs() < 1e-5);
        assert!(within_binomial(clicks, trials, p, 3.0), "{clicks}");
    }

    #[test]
    fn inefficient_and_dark_detector() {
        let model = DetectorModel {
            efficiency: 0.5,
            dark_click_probability: 0.0,
        };
        let p = model.click_probability(2.0);
        assert!((p - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        let noisy = DetectorModel {
            efficiency: 0.7,
            dark_click_probability: 0.05,
        };
        let v = AmplitudeVector::from_real(&[0.5, 0.0]);
        let mut r = rng(7);
        let trials = 200_000;
        let mut counts = [0u64; 2];
        for _ in 0..trials {
            for (c, hit) in counts.iter_mut().zip(threshold_detect(&v, &noisy, &mut r)) {
                *c += hit as u64;
            }
        }
        assert!(within_binomial(
            counts[0],
            trials,
            1.0 - 0.95 * (-0.7f64 * 0.25).exp(),
            3.0
        ));
        assert!(within_binomial(counts[1], trials, 0.05, 3.0));
        assert!(DetectorModel {
            efficiency: 1.2,
            dark_click_probability: 0.0
        }
        .validate()
        .is_err());
        assert!(DetectorModel {
            efficiency: 1.0,
            dark_click_probability: 1.0
        }
        .validate()
        .is_err());
    }

    fn error_rate(receiver: &DolinarReceiver, truth: f64, trials: u64, seed: u64) -> f64 {
        let mut r = rng(seed);
        let amp = Complex64::new(truth * receiver.amplitude(), 0.0);
        let wrong = (0..trials)
            .filter(|_| receiver.decide(amp, &mut r).value() != truth)
            .count();
        wrong as f64 / trials as f64
    }

    fn receiver(n_eff: f64, slices: u32, feedback: FeedbackLaw) -> DolinarReceiver {
        let a = n_eff.sqrt();
        DolinarReceiver::new(
            (Complex64::new(a, 0.0), Complex64::new(-a, 0.0)),
            &DolinarConfig {
                num_slices: slices,
                feedback,
                ..Default::default()
            },
            &DetectorModel::default(),
        )
        .unwrap()
    }

    #[test]
    fn indistinguishable_hypotheses_give_a_coin() {
        let rec = receiver(0.0, 100, FeedbackLaw::Scheduled);
        let trials = 100_000;
        let err = error_rate(&rec, 1.0, trials, 3);
        assert!(
            within_binomial((err * trials as f64) as u64, trials, 0.5, 3.0),
            "{err}"
        );
    }

    #[test]
    fn single_slice_matches_closed_form() {
        // one slice displaced by the optimal law at t = 1/2:
        // error = ½ (1 - e^{-λ_f} + e^{-λ_u}), λ = n (g ∓ 1)²
        let n: f64 = 0.2;
        let g = 1.0 / (1.0 - (-2.0 * n).exp()).sqrt();
        let closed = 0.5 * (1.0 - (-n * (g - 1.0).powi(2)).exp() + (-n * (g + 1.0).powi(2)).exp());
        assert!(closed > helstrom_error(n).unwrap());
        let rec = receiver(n, 1, FeedbackLaw::Scheduled);
        let trials = 400_000;
        let err = error_rate(&rec, -1.0, trials, 11);
        assert!(
            within_binomial((err * trials as f64).round() as u64, trials, closed, 3.0),
            "{err} vs {closed}"
        );
    }

    #[test]
    fn both_laws_approach_helstrom() {
        let n = 0.2;
        let target = helstrom_error(n).unwrap();
        let trials = 200_000;
        for law in [FeedbackLaw::Scheduled, FeedbackLaw::Posterior] {
            let rec = receiver(n, 2000, law);
            let err = error_rate(&rec, 1.0, trials, 5);
            assert!(
                within_binomial((err * trials as f64).round() as u64, trials, target, 3.5),
                "{law:?}: {err} vs {target}"
            );
        }
    }

    #[test]
    fn decisions_are_symmetric() {
        let rec = receiver(0.5, 500, FeedbackLaw::Scheduled);
        let trials = 200_000;
        let plus = error_rate(&rec, 1.0, trials, 21);
        let minus = error_rate(&rec, -1.0, trials, 22);
        let p = helstrom_error(0.5).unwrap();
        let sigma = (2.0 * p * (1.0 - p) / trials as f64).sqrt();
        assert!((plus - minus).abs() < 4.0 * sigma, "{plus} {minus}");
    }

    #[test]
    fn vacuum_input_is_uninformative() {
        let rec = receiver(0.8, 1000, FeedbackLaw::Scheduled);
        let mut r = rng(9);
        let trials = 100_000;
        let plus = (0..trials)
            .filter(|_| rec.decide(Complex64::new(0.0, 0.0), &mut r) == Sign::Plus)
            .count() as u64;
        assert!(within_binomial(plus, trials, 0.5, 3.0), "{plus}");
    }

    #[test]
    fn strong_pulse_is_nearly_error_free() {
        let rec = receiver(4.0, 1000, FeedbackLaw::Scheduled);
        let err = error_rate(&rec, 1.0, 100_000, 4);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn dolinar_validation() {
        let cfg = DolinarConfig::default();
        let mut r = rng(0);
        let bad = [
            (Complex64::new(1.0, 0.0), Complex64::new(-0.5, 0.0)),
            (Complex64::new(1.0, 0.1), Complex64::new(-1.0, -0.1)),
            (Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)),
        ];
        for hyp in bad {
            assert!(dolinar_decide(Complex64::new(1.0, 0.0), hyp, &cfg, &mut r).is_err());
        }
        let zero_slices = DolinarConfig {
            num_slices: 0,
            ..cfg
        };
        assert!(zero_slices.validate().is_err());
        let bad_cap = DolinarConfig {
            amplitude_cap: Some(0.0),
            ..cfg
        };
        assert!(bad_cap.validate().is_err());
    }

    #[test]
    fn direct_decoding() {
        let mut clicks = vec![false; 8];
        assert_eq!(
            decode_direct(&DetectionRecord::direct(clicks.clone()), 8),
            Ok(Outcome::Erasure)
        );
        clicks[2] = true;
        assert_eq!(
            decode_direct(&DetectionRecord::direct(clicks.clone()), 8),
            Ok(Outcome::Word(2))
        );
        clicks[5] = true;
        assert_eq!(
            decode_direct(&DetectionRecord::direct(clicks.clone()), 8),
            Ok(Outcome::Ambiguous)
        );
        assert!(decode_direct(&DetectionRecord::direct(clicks.clone()), 4).is_err());
        assert!(decode_direct(&DetectionRecord::hybrid(clicks, 0, Sign::Plus), 8).is_err());
    }

    #[test]
    fn hybrid_decoding() {
        let mut clicks = vec![false; 4];
        let rec = |c: &Vec<bool>, s| DetectionRecord::hybrid(c.clone(), 0, s);
        assert_eq!(
            decode_hybrid(&rec(&clicks, Sign::Plus), 4),
            Ok(Outcome::PlusWord)
        );
        assert_eq!(
            decode_hybrid(&rec(&clicks, Sign::Minus), 4),
            Ok(Outcome::MinusWord)
        );
        // the Dolinar port's own click slot is ignored
        clicks[0] = true;
        assert_eq!(
            decode_hybrid(&rec(&clicks, Sign::Minus), 4),
            Ok(Outcome::MinusWord)
        );
        clicks[3] = true;
        assert_eq!(
            decode_hybrid(&rec(&clicks, Sign::Plus), 4),
            Ok(Outcome::Word(3))
        );
        clicks[1] = true;
        assert_eq!(
            decode_hybrid(&rec(&clicks, Sign::Plus), 4),
            Ok(Outcome::Ambiguous)
        );
        assert!(decode_hybrid(&DetectionRecord::direct(clicks), 4).is_err());
    }
}
