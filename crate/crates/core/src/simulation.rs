//! Monte Carlo harness: sample words from the scheme prior, propagate them
//! through the interferometer, detect, decode and estimate the mutual
//! information of the resulting empirical channel.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{
    apply_matrix, apply_plan, decompose_triangular, encode_word, equalize_attenuation,
    AmplitudeVector, CircuitError,
};
use crate::detection::{
    decode_direct, decode_hybrid, threshold_detect, DetectionError, DetectionRecord, DetectorModel,
    DolinarConfig, DolinarReceiver, Outcome, Sign,
};
use crate::hadamard::{construct, Codeword, HadamardError, HadamardMatrix};
use crate::infotheory::{rate_hybrid_continuous, rate_ppm, ChannelParams, RateError};

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 200;

/// Trials handled by one unit of parallel work.
const CHUNK: u64 = 1 << 14;

#[derive(Debug, Error)]
pub enum SimulationError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Hadamard(#[from] HadamardError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Detection(#[from] DetectionError),
    #[error("confusion matrix holds no counts")]
    EmptyMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    DirectPpm,
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// `params.transmission` must stay 1; receiver loss enters through
    /// `per_op_transmission`.
    pub params: ChannelParams,
    pub detector: DetectorModel,
    pub dolinar: Option<DolinarConfig>,
    pub use_decomposed_plan: bool,
    pub per_op_transmission: f64,
    pub trials: u64,
    pub seed: u64,
    /// Allocate trials to inputs in exact proportion to the priors instead of
    /// sampling them.
    pub stratified: bool,
    pub bootstrap_resamples: usize,
}

impl SchemeConfig {
    pub fn direct(n_bar: f64, length: usize, trials: u64, seed: u64) -> Self {
        Self {
            scheme: Scheme::DirectPpm,
            params: ChannelParams::new(n_bar, length, 0.0),
            detector: DetectorModel::default(),
            dolinar: None,
            use_decomposed_plan: false,
            per_op_transmission: 1.0,
            trials,
            seed,
            stratified: false,
            bootstrap_resamples: DEFAULT_BOOTSTRAP_RESAMPLES,
        }
    }

    pub fn hybrid(n_bar: f64, length: usize, lambda: f64, trials: u64, seed: u64) -> Self {
        Self {
            scheme: Scheme::Hybrid,
            params: ChannelParams::new(n_bar, length, lambda),
            dolinar: Some(DolinarConfig {
                rng_seed: seed,
                ..DolinarConfig::default()
            }),
            ..Self::direct(n_bar, length, trials, seed)
        }
    }

    pub fn validate(&self) -> Result<(), SimulationError> {
        self.params.validate()?;
        self.detector.validate()?;
        let bad = |msg: String| Err(SimulationError::Config(msg));
        if self.params.transmission != 1.0 {
            return bad("loss is configured through per_op_transmission".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.params.length < 2 {
            return bad(format!("sequence length {} is below 2", self.params.length));
        }
        if !(self.per_op_transmission > 0.0 && self.per_op_transmission <= 1.0) {
            return bad(format!(
                "per_op_transmission {} is outside (0, 1]",
                self.per_op_transmission
            ));
        }
        match (self.scheme, &self.dolinar) {
            (Scheme::Hybrid, Some(d)) => d.validate()?,
            (Scheme::Hybrid, None) => {
                return bad("hybrid scheme needs a Dolinar configuration".into())
            }
            (Scheme::DirectPpm, Some(_)) => {
                return bad("Dolinar configuration given for the direct scheme".into())
            }
            (Scheme::DirectPpm, None) => {}
        }
        Ok(())
    }
}

/// Prior over the inputs of a scheme, in input order.
///
/// Direct: the `L` Hadamard rows, uniform. Hybrid: row 0 (all plus), rows
/// `1..L`, then the all-minus word; the two constant words get `(1-λ)/2`
/// each and the rest `λ/(L-1)`.
pub fn input_priors(scheme: Scheme, length: usize, lambda: f64) -> Vec<f64> {
    match scheme {
        Scheme::DirectPpm => vec![1.0 / length as f64; length],
        Scheme::Hybrid => {
            let mut p = vec![lambda / (length - 1) as f64; length + 1];
            p[0] = (1.0 - lambda) / 2.0;
            p[length] = (1.0 - lambda) / 2.0;
            p
        }
    }
}

fn sample_index<R: Rng + ?Sized>(priors: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &p) in priors.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    // rounding left u above the last partial sum; take the last nonzero entry
    priors.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

fn input_word(h: &HadamardMatrix, scheme: Scheme, index: usize) -> Codeword {
    match scheme {
        Scheme::Hybrid if index == h.order() => h
            .extended_codeword()
            .expect("construct returns normalized matrices"),
        _ => h.codeword(index).expect("index within order"),
    }
}

/// Draws one input word from the scheme prior.
pub fn sample_word<R: Rng + ?Sized>(
    scheme: Scheme,
    h: &HadamardMatrix,
    lambda: f64,
    rng: &mut R,
) -> Codeword {
    let priors = input_priors(scheme, h.order(), lambda);
    input_word(h, scheme, sample_index(&priors, rng))
}

/// RNG stream of trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Column order of the confusion matrix.
pub fn outcome_columns(scheme: Scheme, length: usize) -> Vec<Outcome> {
    match scheme {
        Scheme::DirectPpm => (0..length)
            .map(Outcome::Word)
            .chain([Outcome::Erasure, Outcome::Ambiguous])
            .collect(),
        Scheme::Hybrid => std::iter::once(Outcome::PlusWord)
            .chain((1..length).map(Outcome::Word))
            .chain([Outcome::MinusWord, Outcome::Ambiguous])
            .collect(),
    }
}

fn column_of(scheme: Scheme, length: usize, outcome: Outcome) -> usize {
    match (scheme, outcome) {
        (_, Outcome::Word(k)) => k,
        (Scheme::DirectPpm, Outcome::Erasure) => length,
        (Scheme::DirectPpm, Outcome::Ambiguous) => length + 1,
        (Scheme::Hybrid, Outcome::PlusWord) => 0,
        (Scheme::Hybrid, Outcome::MinusWord) => length,
        (Scheme::Hybrid, Outcome::Ambiguous) => length + 1,
        _ => unreachable!("decoder emitted {outcome:?} for {scheme:?}"),
    }
}

fn input_labels(scheme: Scheme, length: usize) -> Vec<String> {
    match scheme {
        Scheme::DirectPpm => (0..length).map(|k| format!("w{k}")).collect(),
        Scheme::Hybrid => std::iter::once("plus".to_string())
            .chain((1..length).map(|k| format!("w{k}")))
            .chain(std::iter::once("minus".to_string()))
            .collect(),
    }
}

/// Splits `trials` over inputs by the largest-remainder rule.
pub fn stratified_allocation(priors: &[f64], trials: u64) -> Vec<u64> {
    let exact: Vec<f64> = priors.iter().map(|p| p * trials as f64).collect();
    let mut alloc: Vec<u64> = exact.iter().map(|x| x.floor() as u64).collect();
    let assigned: u64 = alloc.iter().sum();
    let mut order: Vec<usize> = (0..priors.len()).filter(|&k| priors[k] > 0.0).collect();
    order.sort_by(|&a, &b| {
        let ra = exact[a] - alloc[a] as f64;
        let rb = exact[b] - alloc[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in order
        .iter()
        .cycle()
        .take(trials.saturating_sub(assigned) as usize)
    {
        alloc[k] += 1;
    }
    alloc
}

/// Empirical channel from inputs to decoded outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub input_labels: Vec<String>,
    pub outcomes: Vec<Outcome>,
    pub input_priors: Vec<f64>,
    /// `counts[input][outcome]`.
    pub counts: Vec<Vec<u64>>,
    /// Rows were filled by stratified allocation rather than sampling.
    pub stratified: bool,
}

impl ConfusionMatrix {
    pub fn new(input_labels: Vec<String>, outcomes: Vec<Outcome>, input_priors: Vec<f64>) -> Self {
        let counts = vec![vec![0; outcomes.len()]; input_labels.len()];
        Self {
            input_labels,
            outcomes,
            input_priors,
            counts,
            stratified: false,
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_total(&self, input: usize) -> u64 {
        self.counts[input].iter().sum()
    }

    pub fn column_total(&self, outcome: usize) -> u64 {
        self.counts.iter().map(|row| row[outcome]).sum()
    }

    /// Overall frequency of an outcome, or 0 if it is not a column.
    pub fn outcome_frequency(&self, outcome: Outcome) -> f64 {
        match self.outcomes.iter().position(|&o| o == outcome) {
            Some(j) => self.column_total(j) as f64 / self.total().max(1) as f64,
            None => 0.0,
        }
    }

    fn merge(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self
    }

    /// CSV with a header of outcome labels and one row per input.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("input");
        for o in &self.outcomes {
            write!(out, ",{}", o.label()).unwrap();
        }
        out.push('\n');
        for (label, row) in self.input_labels.iter().zip(&self.counts) {
            out.push_str(label);
            for c in row {
                write!(out, ",{c}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Output amplitudes of every input word after the (possibly lossy) circuit.
fn propagated_inputs(
    config: &SchemeConfig,
    h: &HadamardMatrix,
) -> Result<(Vec<AmplitudeVector>, f64), SimulationError> {
    let length = h.order();
    let num_inputs = input_priors(config.scheme, length, config.params.lambda).len();
    let w = h.rescaled();
    let lossy = config.per_op_transmission < 1.0;
    let plan = if config.use_decomposed_plan || lossy {
        let plan = decompose_triangular(&w)?;
        Some(equalize_attenuation(&plan, config.per_op_transmission)?)
    } else {
        None
    };
    let eta = plan.as_ref().map_or(1.0, |(_, eta)| *eta);
    let mut outputs = Vec::with_capacity(num_inputs);
    for index in 0..num_inputs {
        let v = encode_word(&input_word(h, config.scheme, index), config.params.n_bar)?;
        let out = match &plan {
            Some((p, _)) if config.use_decomposed_plan => apply_plan(p, &v)?,
            _ => apply_matrix(&(w.clone() * eta.sqrt()), &v)?,
        };
        outputs.push(out);
    }
    Ok((outputs, eta))
}

/// Overall power transmission `η` the equalized circuit imposes for `config`.
pub fn overall_transmission(config: &SchemeConfig) -> Result<f64, SimulationError> {
    let h = construct(config.params.length)?;
    let plan = decompose_triangular(&h.rescaled())?;
    Ok(equalize_attenuation(&plan, config.per_op_transmission)?.1)
}

/// Runs `config.trials` independent trials and tallies decoded outcomes.
///
/// Trial `t` draws from [`trial_rng`]`(seed, t)` only, so the result does not
/// depend on how rayon schedules the work.
pub fn run_trials(config: &SchemeConfig) -> Result<ConfusionMatrix, SimulationError> {
    config.validate()?;
    let length = config.params.length;
    let h = construct(length)?;
    let (outputs, _) = propagated_inputs(config, &h)?;
    let priors = input_priors(config.scheme, length, config.params.lambda);
    let receiver = match (&config.dolinar, config.scheme) {
        (Some(d), Scheme::Hybrid) => {
            let a = outputs[0].0[0].re;
            let hyp = (
                num_complex::Complex64::new(a, 0.0),
                num_complex::Complex64::new(-a, 0.0),
            );
            Some(DolinarReceiver::new(hyp, d, &config.detector)?)
        }
        _ => None,
    };
    let boundaries: Option<Vec<u64>> = config.stratified.then(|| {
        stratified_allocation(&priors, config.trials)
            .iter()
            .scan(0, |acc, &n| {
                *acc += n;
                Some(*acc)
            })
            .collect()
    });
    let columns = outcome_columns(config.scheme, length);
    let empty = {
        let mut cm =
            ConfusionMatrix::new(input_labels(config.scheme, length), columns, priors.clone());
        cm.stratified = config.stratified;
        cm
    };

    let trial = |t: u64, counts: &mut [Vec<u64>]| {
        let mut rng = trial_rng(config.seed, t);
        let input = match &boundaries {
            Some(b) => b.partition_point(|&end| end <= t),
            None => sample_index(&priors, &mut rng),
        };
        let amps = &outputs[input];
        let clicks = threshold_detect(amps, &config.detector, &mut rng);
        let outcome = match &receiver {
            None => decode_direct(&DetectionRecord::direct(clicks), length),
            Some(rx) => {
                let sign = rx.decide(amps.0[0], &mut rng);
                decode_hybrid(&DetectionRecord::hybrid(clicks, 0, sign), length)
            }
        }
        .expect("records are built for this length");
        counts[input][column_of(config.scheme, length, outcome)] += 1;
    };

    let chunks = config.trials.div_ceil(CHUNK);
    let cm = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut part = empty.clone();
            for t in c * CHUNK..((c + 1) * CHUNK).min(config.trials) {
                trial(t, &mut part.counts);
            }
            part
        })
        .reduce(|| empty.clone(), |a, b| a.merge(&b));
    Ok(cm)
}

/// Plug-in mutual information in bits per word for row-conditional
/// distributions `rows` and priors `priors`. Rows without counts are
/// dropped and the remaining priors renormalized.
fn plug_in_information(priors: &[f64], rows: &[Vec<u64>]) -> f64 {
    let used: Vec<(f64, &Vec<u64>, f64)> = priors
        .iter()
        .zip(rows)
        .filter_map(|(&p, row)| {
            let n: u64 = row.iter().sum();
            (p > 0.0 && n > 0).then_some((p, row, n as f64))
        })
        .collect();
    let mass: f64 = used.iter().map(|u| u.0).sum();
    if mass == 0.0 {
        return 0.0;
    }
    let cols = rows.first().map_or(0, Vec::len);
    let mut marginal = vec![0.0; cols];
    for &(p, row, n) in &used {
        for (m, &c) in marginal.iter_mut().zip(row.iter()) {
            *m += p / mass * c as f64 / n;
        }
    }
    let mut info = 0.0;
    for &(p, row, n) in &used {
        for (&m, &c) in marginal.iter().zip(row.iter()) {
            if c > 0 {
                let cond = c as f64 / n;
                info += p / mass * cond * (cond / m).log2();
            }
        }
    }
    info.max(0.0)
}

fn multinomial<R: Rng + ?Sized>(n: u64, weights: &[u64], rng: &mut R) -> Vec<u64> {
    let mut left_n = n;
    let mut left_w: u64 = weights.iter().sum();
    weights
        .iter()
        .map(|&w| {
            if left_n == 0 || w == 0 {
                return 0;
            }
            let p = (w as f64 / left_w as f64).min(1.0);
            let draw = Binomial::new(left_n, p)
                .expect("p within [0, 1]")
                .sample(rng);
            left_n -= draw;
            left_w -= w;
            draw
        })
        .collect()
}

/// Plug-in mutual information (bits per word) with a bootstrap standard error.
///
/// Resampling redraws the trials: one multinomial over all cells for i.i.d.
/// sampled inputs, or one per row for stratified allocation.
pub fn empirical_mutual_information_with(
    cm: &ConfusionMatrix,
    resamples: usize,
    seed: u64,
) -> Result<(f64, f64), SimulationError> {
    let total = cm.total();
    if total == 0 {
        return Err(SimulationError::EmptyMatrix);
    }
    let estimate = plug_in_information(&cm.input_priors, &cm.counts);
    if resamples < 2 {
        return Ok((estimate, 0.0));
    }
    let mut rng = trial_rng(seed, u64::MAX);
    let cols = cm.outcomes.len();
    let flat: Vec<u64> = cm.counts.iter().flatten().copied().collect();
    let values: Vec<f64> = (0..resamples)
        .map(|_| {
            let rows: Vec<Vec<u64>> = if cm.stratified {
                cm.counts
                    .iter()
                    .map(|row| multinomial(row.iter().sum(), row, &mut rng))
                    .collect()
            } else {
                multinomial(total, &flat, &mut rng)
                    .chunks(cols)
                    .map(<[u64]>::to_vec)
                    .collect()
            };
            plug_in_information(&cm.input_priors, &rows)
        })
        .collect();
    let mean = values.iter().sum::<f64>() / resamples as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok((estimate, var.sqrt()))
}

pub fn empirical_mutual_information(cm: &ConfusionMatrix) -> Result<(f64, f64), SimulationError> {
    empirical_mutual_information_with(cm, DEFAULT_BOOTSTRAP_RESAMPLES, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub scheme: Scheme,
    pub n_bar: f64,
    #[serde(rename = "L")]
    pub length: usize,
    pub lambda: f64,
    pub per_op_transmission: f64,
    pub overall_transmission: f64,
    pub efficiency: f64,
    pub dark_click_probability: f64,
    pub num_slices: Option<u32>,
    pub use_decomposed_plan: bool,
    pub stratified: bool,
    pub trials: u64,
    pub seed: u64,
    /// Photon number per bin the analytic formula is evaluated at.
    pub analytic_n_bar: f64,
    /// Bits per bin.
    pub analytic_rate: f64,
    pub empirical_rate: f64,
    pub empirical_stderr: f64,
    pub bits_per_word: f64,
    pub outcome_frequencies: BTreeMap<String, f64>,
}

impl RateReport {
    /// `|empirical - analytic|` in units of the bootstrap standard error.
    pub fn deviation_in_stderr(&self) -> f64 {
        let diff = (self.empirical_rate - self.analytic_rate).abs();
        if self.empirical_stderr > 0.0 {
            diff / self.empirical_stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Analytic counterpart of `config`: the direct or hybrid rate at the photon
/// number reaching the detectors, `η · efficiency · n̄`. Dark clicks are not
/// modelled analytically.
pub fn analytic_rate(config: &SchemeConfig, eta: f64) -> Result<(f64, f64), SimulationError> {
    let p = &config.params;
    let n = p.n_bar * eta * config.detector.efficiency;
    let rate = match config.scheme {
        Scheme::DirectPpm => rate_ppm(n, p.length as f64)?,
        Scheme::Hybrid => rate_hybrid_continuous(n, p.length as f64, p.lambda)?,
    };
    Ok((n, rate))
}

/// Runs the simulation and pairs its estimate with the analytic rate.
pub fn compare_report(
    config: &SchemeConfig,
) -> Result<(RateReport, ConfusionMatrix), SimulationError> {
    let cm = run_trials(config)?;
    let eta = overall_transmission(config)?;
    let (analytic_n_bar, analytic) = analytic_rate(config, eta)?;
    let (bits, stderr) =
        empirical_mutual_information_with(&cm, config.bootstrap_resamples, config.seed)?;
    let length = config.params.length as f64;
    let outcome_frequencies = cm
        .outcomes
        .iter()
        .map(|&o| (o.label(), cm.outcome_frequency(o)))
        .collect();
    let report = RateReport {
        scheme: config.scheme,
        n_bar: config.params.n_bar,
        length: config.params.length,
        lambda: config.params.lambda,
        per_op_transmission: config.per_op_transmission,
        overall_transmission: eta,
        efficiency: config.detector.efficiency,
        dark_click_probability: config.detector.dark_click_probability,
        num_slices: config.dolinar.map(|d| d.num_slices),
        use_decomposed_plan: config.use_decomposed_plan,
        stratified: config.stratified,
        trials: config.trials,
        seed: config.seed,
        analytic_n_bar,
        analytic_rate: analytic,
        empirical_rate: bits / length,
        empirical_stderr: stderr / length,
        bits_per_word: bits,
        outcome_frequencies,
    };
    Ok((report, cm))
}

/// Error rate of the Dolinar receiver on `(+a, -a)` with `a² = n_eff`.
///
/// Even trials send `+a`, odd trials `-a`; trial `t` uses
/// [`trial_rng`]`(seed, t)`, so runs that differ only in `config` see the same
/// random streams. Returns `(error_rate, errors)`.
pub fn dolinar_error_rate(
    n_eff: f64,
    config: &DolinarConfig,
    detector: &DetectorModel,
    trials: u64,
    seed: u64,
) -> Result<(f64, u64), SimulationError> {
    if !(n_eff >= 0.0 && n_eff.is_finite()) {
        return Err(RateError::PhotonNumber(n_eff).into());
    }
    if trials == 0 {
        return Err(SimulationError::Config("trials must be at least 1".into()));
    }
    let a = n_eff.sqrt();
    let hyp = (
        num_complex::Complex64::new(a, 0.0),
        num_complex::Complex64::new(-a, 0.0),
    );
    let receiver = DolinarReceiver::new(hyp, config, detector)?;
    let chunks = trials.div_ceil(CHUNK);
    let errors: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            (c * CHUNK..((c + 1) * CHUNK).min(trials))
                .filter(|&t| {
                    let truth = if t % 2 == 0 { Sign::Plus } else { Sign::Minus };
                    let mut rng = trial_rng(seed, t);
                    let sent = num_complex::Complex64::new(truth.value() * a, 0.0);
                    receiver.decide(sent, &mut rng) != truth
                })
                .count() as u64
        })
        .sum();
    Ok((errors as f64 / trials as f64, errors))
}
