//! Amplitude-level linear optics for the PPM conversion circuit.
//!
//! Every state in the scheme is a product of coherent states and every
//! element is linear, so propagating the complex amplitude vector is an exact
//! description of the field.
//!
//! The receiver circuit is the triangular mesh of two-mode operations in which
//! pulse `l` (0-based) meets the memory modes `0, 1, …, l-1` in turn. Each
//! operation carries its own 2×2 real orthogonal matrix, so the π phase
//! placement of the physical layout is absorbed into the sign pattern.

use std::fmt::{self, Write as _};

use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::hadamard::Codeword;

/// Orthogonality and reconstruction tolerance.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("mean photon number {0} must be finite and nonnegative")]
    NegativePhotonNumber(f64),
    #[error("matrix is not orthogonal (max |WᵀW - I| = {0:.3e})")]
    NotOrthogonal(f64),
    #[error("matrix is not square ({rows}×{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected} modes, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("a 1×1 sign flip cannot be expressed with two-mode operations")]
    SingleModeSignFlip,
    #[error("transmission {0} is outside (0, 1]")]
    Transmission(f64),
    #[error("invalid operation: {0}")]
    InvalidOp(String),
    #[error("plan parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Complex field amplitudes of the modes; `|a|²` is the mean photon number.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeVector(pub Vec<Complex64>);

impl AmplitudeVector {
    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_real(values: &[f64]) -> Self {
        Self(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_energy(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.0.iter().map(|a| a.norm_sqr())
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

/// Coherent-state amplitudes `signs[i] · sqrt(n_bar)` of a BPSK word.
pub fn encode_word(word: &Codeword, n_bar: f64) -> Result<AmplitudeVector, CircuitError> {
    if !(n_bar >= 0.0 && n_bar.is_finite()) {
        return Err(CircuitError::NegativePhotonNumber(n_bar));
    }
    let alpha = n_bar.sqrt();
    Ok(AmplitudeVector(
        word.signs
            .iter()
            .map(|&s| Complex64::new(s as f64 * alpha, 0.0))
            .collect(),
    ))
}

/// A lossy two-mode beam-splitter-type interaction.
///
/// `(a, b) ← sqrt(transmission) · matrix · (a, b)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitterOp {
    pub mode_a: usize,
    pub mode_b: usize,
    /// Fraction of power exchanged between the two modes, `matrix[0][1]²`.
    pub power_reflectivity: f64,
    pub matrix: [[f64; 2]; 2],
    pub transmission: f64,
}

impl BeamSplitterOp {
    pub fn new(mode_a: usize, mode_b: usize, matrix: [[f64; 2]; 2]) -> Self {
        Self {
            mode_a,
            mode_b,
            power_reflectivity: matrix[0][1] * matrix[0][1],
            matrix,
            transmission: 1.0,
        }
    }

    pub fn check(&self, num_modes: usize) -> Result<(), CircuitError> {
        let invalid = |m: String| Err(CircuitError::InvalidOp(m));
        if self.mode_a == self.mode_b {
            return invalid(format!("both ports are mode {}", self.mode_a));
        }
        if self.mode_a >= num_modes || self.mode_b >= num_modes {
            return invalid(format!(
                "modes ({}, {}) outside 0..{num_modes}",
                self.mode_a, self.mode_b
            ));
        }
        if !(self.transmission > 0.0 && self.transmission <= 1.0) {
            return Err(CircuitError::Transmission(self.transmission));
        }
        let [[a, b], [c, d]] = self.matrix;
        let gram = [a * a + c * c - 1.0, a * b + c * d, b * b + d * d - 1.0];
        if gram.iter().any(|g| g.abs() > RECONSTRUCTION_TOLERANCE) {
            return invalid("2×2 matrix is not orthogonal".into());
        }
        let r = self.power_reflectivity;
        if !(0.0..=1.0).contains(&r)
            || (b * b - r).abs() > RECONSTRUCTION_TOLERANCE
            || (a * a - (1.0 - r)).abs() > RECONSTRUCTION_TOLERANCE
        {
            return invalid(format!("reflectivity {r} does not match the matrix"));
        }
        Ok(())
    }
}

/// An element of a circuit plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Element {
    BeamSplitter(BeamSplitterOp),
    /// Extra single-mode attenuation inserted to equalize path losses.
    Attenuator {
        mode: usize,
        transmission: f64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircuitPlan {
    pub num_modes: usize,
    pub elements: Vec<Element>,
}

impl CircuitPlan {
    pub fn identity(num_modes: usize) -> Self {
        Self {
            num_modes,
            elements: Vec::new(),
        }
    }

    pub fn beam_splitters(&self) -> impl Iterator<Item = &BeamSplitterOp> {
        self.elements.iter().filter_map(|e| match e {
            Element::BeamSplitter(op) => Some(op),
            Element::Attenuator { .. } => None,
        })
    }

    pub fn num_beam_splitters(&self) -> usize {
        self.beam_splitters().count()
    }

    pub fn check(&self) -> Result<(), CircuitError> {
        for element in &self.elements {
            match element {
                Element::BeamSplitter(op) => op.check(self.num_modes)?,
                Element::Attenuator { mode, transmission } => {
                    if *mode >= self.num_modes {
                        return Err(CircuitError::InvalidOp(format!(
                            "attenuator on mode {mode} outside 0..{}",
                            self.num_modes
                        )));
                    }
                    if !(*transmission > 0.0 && *transmission <= 1.0) {
                        return Err(CircuitError::Transmission(*transmission));
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies the plan in place to a real or complex amplitude slice.
    pub fn apply_in_place(&self, amps: &mut [Complex64]) -> Result<(), CircuitError> {
        if amps.len() != self.num_modes {
            return Err(CircuitError::DimensionMismatch {
                expected: self.num_modes,
                actual: amps.len(),
            });
        }
        for element in &self.elements {
            match *element {
                Element::BeamSplitter(op) => {
                    let (a, b) = (amps[op.mode_a], amps[op.mode_b]);
                    let [[s00, s01], [s10, s11]] = op.matrix;
                    let damp = if op.transmission == 1.0 {
                        1.0
                    } else {
                        op.transmission.sqrt()
                    };
                    amps[op.mode_a] = (a * s00 + b * s01) * damp;
                    amps[op.mode_b] = (a * s10 + b * s11) * damp;
                }
                Element::Attenuator { mode, transmission } => {
                    amps[mode] *= transmission.sqrt();
                }
            }
        }
        Ok(())
    }

    /// The full linear map of the plan, losses included.
    pub fn compose(&self) -> DMatrix<f64> {
        let n = self.num_modes;
        let mut out = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            column[j] = Complex64::new(1.0, 0.0);
            self.apply_in_place(&mut column).expect("sized to the plan");
            for i in 0..n {
                out[(i, j)] = column[i].re;
            }
        }
        out
    }

    /// Text export, one element per line.
    ///
    /// Beam splitters: `mode_a mode_b power_reflectivity s00 s01 s10 s11 transmission`.
    /// Attenuators: `att mode transmission`. Lines starting with `#` are comments.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for element in &self.elements {
            match element {
                Element::BeamSplitter(op) => {
                    let [[a, b], [c, d]] = op.matrix;
                    let _ = writeln!(
                        out,
                        "{} {} {} {} {} {} {} {}",
                        op.mode_a,
                        op.mode_b,
                        fmt_f64(op.power_reflectivity),
                        fmt_f64(a),
                        fmt_f64(b),
                        fmt_f64(c),
                        fmt_f64(d),
                        fmt_f64(op.transmission)
                    );
                }
                Element::Attenuator { mode, transmission } => {
                    let _ = writeln!(out, "att {mode} {}", fmt_f64(*transmission));
                }
            }
        }
        out
    }

    /// Parses [`CircuitPlan::to_text`] output for a circuit on `num_modes` modes.
    pub fn from_text(num_modes: usize, text: &str) -> Result<Self, CircuitError> {
        let mut elements = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.trim();
            if content.is_empty() || content.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let parse_err = |message: String| CircuitError::Parse { line, message };
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| parse_err(format!("{s:?} is not a number")))
            };
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| parse_err(format!("{s:?} is not a mode index")))
            };
            let element = match fields.as_slice() {
                ["att", mode, t] => Element::Attenuator {
                    mode: idx(mode)?,
                    transmission: num(t)?,
                },
                [a, b, r, s00, s01, s10, s11, t] => Element::BeamSplitter(BeamSplitterOp {
                    mode_a: idx(a)?,
                    mode_b: idx(b)?,
                    power_reflectivity: num(r)?,
                    matrix: [[num(s00)?, num(s01)?], [num(s10)?, num(s11)?]],
                    transmission: num(t)?,
                }),
                _ => {
                    return Err(parse_err(format!(
                        "expected 8 fields or `att mode transmission`, found {}",
                        fields.len()
                    )))
                }
            };
            let single = CircuitPlan {
                num_modes,
                elements: vec![element],
            };
            single.check().map_err(|e| parse_err(e.to_string()))?;
            elements.push(element);
        }
        Ok(Self {
            num_modes,
            elements,
        })
    }
}

impl fmt::Display for CircuitPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// 17 significant digits, enough to round-trip any double.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Largest entry of `|WᵀW - I|`.
pub fn orthogonality_defect(w: &DMatrix<f64>) -> f64 {
    let n = w.nrows();
    (w.transpose() * w - DMatrix::identity(n, n)).amax()
}

/// Triangular decomposition of a real orthogonal matrix into two-mode operations.
///
/// The last mode is peeled off first: rotations of rows `(k, l)` for
/// `k = l-1, …, 0` zero column `l` above the diagonal, which by orthogonality
/// leaves row and column `l` equal to `±e_l`. Repeating on the leading block
/// reduces `W` to a diagonal sign matrix `D`, so `W = P_{L-1} ⋯ P_1 D` with
/// `P_l` acting only on modes `0..=l`. The plan applies `P_1` first; the signs
/// of `D` are folded into the first operation that touches each mode.
pub fn decompose_triangular(w: &DMatrix<f64>) -> Result<CircuitPlan, CircuitError> {
    if w.nrows() != w.ncols() {
        return Err(CircuitError::NotSquare {
            rows: w.nrows(),
            cols: w.ncols(),
        });
    }
    let n = w.nrows();
    let defect = orthogonality_defect(w);
    if defect.is_nan() || defect >= RECONSTRUCTION_TOLERANCE {
        return Err(CircuitError::NotOrthogonal(defect));
    }
    let mut m = w.clone();
    // stages[l] holds the ops of P_l in application order
    let mut stages: Vec<Vec<BeamSplitterOp>> = vec![Vec::new(); n];
    for l in (1..n).rev() {
        let mut stage = Vec::with_capacity(l);
        for k in (0..l).rev() {
            let (a, b) = (m[(k, l)], m[(l, l)]);
            let r = a.hypot(b);
            let (c, s) = if r > 0.0 { (b / r, a / r) } else { (1.0, 0.0) };
            // G = [[c, -s], [s, c]] on rows (k, l)
            for j in 0..n {
                let (rk, rl) = (m[(k, j)], m[(l, j)]);
                m[(k, j)] = c * rk - s * rl;
                m[(l, j)] = s * rk + c * rl;
            }
            m[(k, l)] = 0.0;
            // the plan applies Gᵀ; the last rotation found is applied first
            stage.push(BeamSplitterOp::new(k, l, [[c, s], [-s, c]]));
        }
        stage.reverse();
        stages[l] = stage;
    }
    let signs: Vec<f64> = (0..n).map(|i| m[(i, i)].signum()).collect();
    let mut elements = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
    let mut touched = vec![false; n];
    for stage in stages.into_iter().skip(1) {
        for mut op in stage {
            for (port, mode) in [(0, op.mode_a), (1, op.mode_b)] {
                if !touched[mode] {
                    touched[mode] = true;
                    op.matrix[0][port] *= signs[mode];
                    op.matrix[1][port] *= signs[mode];
                }
            }
            elements.push(Element::BeamSplitter(op));
        }
    }
    if n == 1 && signs[0] < 0.0 {
        return Err(CircuitError::SingleModeSignFlip);
    }
    Ok(CircuitPlan {
        num_modes: n,
        elements,
    })
}

/// Propagates `v` through the plan.
pub fn apply_plan(
    plan: &CircuitPlan,
    v: &AmplitudeVector,
) -> Result<AmplitudeVector, CircuitError> {
    let mut out = v.clone();
    plan.apply_in_place(&mut out.0)?;
    Ok(out)
}

/// Dense matrix-vector product, the reference for [`apply_plan`].
pub fn apply_matrix(
    w: &DMatrix<f64>,
    v: &AmplitudeVector,
) -> Result<AmplitudeVector, CircuitError> {
    if w.ncols() != v.len() || w.nrows() != v.len() {
        return Err(CircuitError::DimensionMismatch {
            expected: w.ncols(),
            actual: v.len(),
        });
    }
    let out = (0..w.nrows())
        .map(|i| {
            v.0.iter()
                .enumerate()
                .map(|(j, a)| a * w[(i, j)])
                .sum::<Complex64>()
        })
        .collect();
    Ok(AmplitudeVector(out))
}

/// Gives every operation the power transmission `per_op_transmission` and
/// inserts single-mode attenuators so that every input-to-output path passes
/// the same number of lossy stages. Returns the plan and its common power
/// transmission `η`; the lossy plan then equals `sqrt(η)` times the lossless one.
///
/// Loss on both ports of an operation commutes with it, so it is enough to
/// track a loss depth per mode: before each operation the shallower port is
/// padded up to the deeper one, and at the end all modes are padded to the
/// maximum depth `D`, giving `η = t^D`.
pub fn equalize_attenuation(
    plan: &CircuitPlan,
    per_op_transmission: f64,
) -> Result<(CircuitPlan, f64), CircuitError> {
    let t = per_op_transmission;
    if !(t > 0.0 && t <= 1.0) {
        return Err(CircuitError::Transmission(t));
    }
    if t == 1.0 {
        return Ok((plan.clone(), 1.0));
    }
    let pad = |depth: u32| t.powi(depth as i32);
    let mut depth = vec![0u32; plan.num_modes];
    let mut elements = Vec::with_capacity(plan.elements.len() * 2);
    for element in &plan.elements {
        match *element {
            Element::BeamSplitter(op) => {
                let target = depth[op.mode_a].max(depth[op.mode_b]);
                for mode in [op.mode_a, op.mode_b] {
                    if depth[mode] < target {
                        elements.push(Element::Attenuator {
                            mode,
                            transmission: pad(target - depth[mode]),
                        });
                    }
                    depth[mode] = target + 1;
                }
                elements.push(Element::BeamSplitter(BeamSplitterOp {
                    transmission: op.transmission * t,
                    ..op
                }));
            }
            Element::Attenuator { .. } => {
                return Err(CircuitError::InvalidOp(
                    "plan already contains equalizing attenuators".into(),
                ))
            }
        }
    }
    let max_depth = depth.iter().copied().max().unwrap_or(0);
    for (mode, &d) in depth.iter().enumerate() {
        if d < max_depth {
            elements.push(Element::Attenuator {
                mode,
                transmission: pad(max_depth - d),
            });
        }
    }
    let eta = pad(max_depth);
    Ok((
        CircuitPlan {
            num_modes: plan.num_modes,
            elements,
        },
        eta,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hadamard::construct;
    use approx::assert_relative_eq;

    fn max_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).amax()
    }

    #[test]
    fn encode_examples() {
        let h = construct(4).unwrap();
        let v = encode_word(&h.codeword(0).unwrap(), 0.01).unwrap();
        for a in v.as_slice() {
            assert_relative_eq!(a.re, 0.1, max_relative = 1e-15);
            assert_eq!(a.im, 0.0);
        }
        assert_relative_eq!(v.total_energy(), 0.04, max_relative = 1e-14);
        let h2 = construct(2).unwrap();
        let v = encode_word(&h2.codeword(1).unwrap(), 1.0).unwrap();
        assert_eq!(v, AmplitudeVector::from_real(&[1.0, -1.0]));
        let v = encode_word(&h2.codeword(1).unwrap(), 0.0).unwrap();
        assert_eq!(v.total_energy(), 0.0);
        assert!(encode_word(&h2.codeword(1).unwrap(), -0.1).is_err());
    }

    #[test]
    fn two_mode_hadamard_is_one_balanced_op() {
        let w = construct(2).unwrap().rescaled();
        let plan = decompose_triangular(&w).unwrap();
        assert_eq!(plan.num_beam_splitters(), 1);
        let op = plan.beam_splitters().next().unwrap();
        assert_relative_eq!(op.power_reflectivity, 0.5, max_relative = 1e-14);
        assert!(max_diff(&plan.compose(), &w) < 1e-14);
    }

    #[test]
    fn single_balanced_op_on_equal_amplitudes() {
        // 2×2 arithmetic: (1/√2)[[1, 1], [1, -1]] (1, 1) = (√2, 0)
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plan = CircuitPlan {
            num_modes: 2,
            elements: vec![Element::BeamSplitter(BeamSplitterOp::new(
                0,
                1,
                [[h, h], [h, -h]],
            ))],
        };
        let out = apply_plan(&plan, &AmplitudeVector::from_real(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(out.0[0].re, 2f64.sqrt(), max_relative = 1e-15);
        assert!(out.0[1].norm() < 1e-15);
    }

    #[test]
    fn identity_decomposes_to_trivial_ops() {
        let plan = decompose_triangular(&DMatrix::identity(5, 5)).unwrap();
        assert!(plan.beam_splitters().all(|op| op.power_reflectivity == 0.0));
        let v = AmplitudeVector::from_real(&[0.3, -1.0, 2.0, 0.0, 5.0]);
        assert_eq!(apply_plan(&plan, &v).unwrap(), v);
        assert_eq!(apply_plan(&CircuitPlan::identity(5), &v).unwrap(), v);
    }

    #[test]
    fn order_eight_reflectivities() {
        // unit fractions along each pulse's path, pulse 1 through pulse 7
        let expected: [&[f64]; 7] = [
            &[2.0],
            &[3.0, 4.0],
            &[4.0, 3.0, 2.0],
            &[5.0, 6.0, 7.0, 8.0],
            &[6.0, 5.0, 8.0, 7.0, 2.0],
            &[7.0, 8.0, 5.0, 6.0, 3.0, 4.0],
            &[8.0, 7.0, 6.0, 5.0, 4.0, 3.0, 2.0],
        ];
        let w = construct(8).unwrap().rescaled();
        let plan = decompose_triangular(&w).unwrap();
        assert_eq!(plan.num_beam_splitters(), 28);
        let ops: Vec<_> = plan.beam_splitters().collect();
        let mut idx = 0;
        for (pulse, denominators) in expected.iter().enumerate() {
            for (memory, &den) in denominators.iter().enumerate() {
                let op = ops[idx];
                assert_eq!((op.mode_a, op.mode_b), (memory, pulse + 1));
                assert_relative_eq!(op.power_reflectivity, 1.0 / den, max_relative = 1e-12);
                idx += 1;
            }
        }
        assert!(max_diff(&plan.compose(), &w) < 1e-12);
    }

    #[test]
    fn every_order_recomposes_and_maps_words_to_ports() {
        for order in crate::hadamard::SUPPORTED_ORDERS
            .into_iter()
            .filter(|&l| l > 1)
        {
            let h = construct(order).unwrap();
            let w = h.rescaled();
            let plan = decompose_triangular(&w).unwrap();
            plan.check().unwrap();
            assert!(plan.num_beam_splitters() <= order * (order - 1) / 2);
            assert!(max_diff(&plan.compose(), &w) < RECONSTRUCTION_TOLERANCE);
            let n_bar = 0.3;
            let bright = (order as f64 * n_bar).sqrt();
            for k in 0..order {
                let v = encode_word(&h.codeword(k).unwrap(), n_bar).unwrap();
                let out = apply_plan(&plan, &v).unwrap();
                for (i, a) in out.as_slice().iter().enumerate() {
                    if i == k {
                        assert_relative_eq!(a.norm(), bright, max_relative = 1e-12);
                    } else {
                        assert!(a.norm() < 1e-8 * bright);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_non_orthogonal_and_mismatched_inputs() {
        let mut w = construct(4).unwrap().rescaled();
        w[(0, 0)] += 1e-6;
        assert!(matches!(
            decompose_triangular(&w),
            Err(CircuitError::NotOrthogonal(_))
        ));
        assert!(matches!(
            decompose_triangular(&DMatrix::zeros(2, 3)),
            Err(CircuitError::NotSquare { .. })
        ));
        assert!(matches!(
            decompose_triangular(&DMatrix::from_element(1, 1, -1.0)),
            Err(CircuitError::SingleModeSignFlip)
        ));
        let plan = CircuitPlan::identity(3);
        assert!(apply_plan(&plan, &AmplitudeVector::zeros(2)).is_err());
        assert!(apply_matrix(&DMatrix::identity(3, 3), &AmplitudeVector::zeros(2)).is_err());
    }

    #[test]
    fn apply_matrix_examples() {
        let v = AmplitudeVector::from_real(&[1.0, 2.0, 3.0]);
        assert_eq!(apply_matrix(&DMatrix::identity(3, 3), &v).unwrap(), v);
        let n_bar: f64 = 0.02;
        let w = construct(8).unwrap().rescaled();
        let v = AmplitudeVector::from_real(&[n_bar.sqrt(); 8]);
        let out = apply_matrix(&w, &v).unwrap();
        assert_relative_eq!(out.0[0].re, (8.0 * n_bar).sqrt(), max_relative = 1e-14);
        assert!(out.0[1..].iter().all(|a| a.norm() < 1e-15));
    }

    #[test]
    fn equalization_is_noop_without_loss() {
        let plan = decompose_triangular(&construct(8).unwrap().rescaled()).unwrap();
        let (same, eta) = equalize_attenuation(&plan, 1.0).unwrap();
        assert_eq!(same, plan);
        assert_eq!(eta, 1.0);
        assert!(equalize_attenuation(&plan, 0.0).is_err());
        assert!(equalize_attenuation(&plan, 1.1).is_err());
    }

    #[test]
    fn equalization_gives_uniform_transmission() {
        let w = construct(2).unwrap().rescaled();
        let plan = decompose_triangular(&w).unwrap();
        let (lossy, eta) = equalize_attenuation(&plan, 0.9).unwrap();
        assert_relative_eq!(eta, 0.9, max_relative = 1e-15);
        for j in 0..2 {
            let mut basis = AmplitudeVector::zeros(2);
            basis.0[j] = Complex64::new(1.0, 0.0);
            let out = apply_plan(&lossy, &basis).unwrap();
            assert_relative_eq!(out.total_energy(), eta, max_relative = 1e-14);
        }
        for order in [4, 8, 12, 32] {
            let w = construct(order).unwrap().rescaled();
            let plan = decompose_triangular(&w).unwrap();
            let (lossy, eta) = equalize_attenuation(&plan, 0.95).unwrap();
            lossy.check().unwrap();
            let scaled = &w * eta.sqrt();
            assert!(max_diff(&lossy.compose(), &scaled) < 1e-12, "order {order}");
            // a lossy plan cannot be equalized twice
            assert!(equalize_attenuation(&lossy, 0.95).is_err());
        }
    }

    #[test]
    fn plan_text_round_trip() {
        let plan = decompose_triangular(&construct(12).unwrap().rescaled()).unwrap();
        let (lossy, _) = equalize_attenuation(&plan, 0.9).unwrap();
        for p in [plan, lossy] {
            let parsed = CircuitPlan::from_text(p.num_modes, &p.to_text()).unwrap();
            assert_eq!(parsed, p);
        }
        assert!(matches!(
            CircuitPlan::from_text(2, "0 1 0.5 1 2 3\n"),
            Err(CircuitError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            CircuitPlan::from_text(2, "# header\n0 0 0 1 0 0 1 1\n"),
            Err(CircuitError::Parse { line: 2, .. })
        ));
    }
}
