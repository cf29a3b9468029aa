//! Hadamard matrices and the BPSK codebook built from their rows.
//!
//! Orders that are powers of two come from the Sylvester doubling; the
//! remaining orders up to 32 (12, 20, 24, 28) from the Paley type-I
//! construction over GF(q). Every matrix handed out by [`construct`] is
//! normalized so that row 0 and column 0 are all `+1`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::gf::{prime_power, FieldError, FiniteField};

/// Orders for which [`construct`] succeeds.
pub const SUPPORTED_ORDERS: [usize; 10] = [1, 2, 4, 8, 12, 16, 20, 24, 28, 32];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HadamardError {
    #[error("Sylvester exponent {0} is out of range (0..=5)")]
    ExponentOutOfRange(u32),
    #[error("Paley construction needs a prime power q = 3 mod 4 with q <= 31, got {0}")]
    InvalidPaleyOrder(u32),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("no Hadamard matrix of order {0} is available (supported: 1, 2, 4, 8, 12, 16, 20, 24, 28, 32)")]
    UnsupportedOrder(usize),
    #[error("row index {index} out of range for order {order}")]
    RowOutOfRange { index: usize, order: usize },
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("matrix is not a Hadamard matrix")]
    Invalid,
}

/// A square matrix of `±1` entries with `H Hᵀ = L I`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    order: usize,
    entries: Vec<i8>,
}

/// One BPSK word: a row of the generating matrix, or the negated all-plus row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub signs: Vec<i8>,
    pub index: usize,
    pub extended: bool,
}

impl Codeword {
    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }
}

impl HadamardMatrix {
    /// Wraps row-major entries after checking every invariant.
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self, HadamardError> {
        if !validate(rows) {
            return Err(HadamardError::Invalid);
        }
        let order = rows.len();
        let entries = rows.iter().flatten().map(|&v| v as i8).collect();
        Ok(Self { order, entries })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, row: usize, col: usize) -> i8 {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, index: usize) -> &[i8] {
        &self.entries[index * self.order..(index + 1) * self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> + '_ {
        self.entries.chunks(self.order)
    }

    pub fn to_integer_rows(&self) -> Vec<Vec<i64>> {
        self.rows()
            .map(|r| r.iter().map(|&v| v as i64).collect())
            .collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self.entry(i, j) == self.entry(j, i)))
    }

    pub fn is_normalized(&self) -> bool {
        (0..self.order).all(|k| self.entry(0, k) == 1 && self.entry(k, 0) == 1)
    }

    /// `H / sqrt(L)`, an orthogonal matrix.
    pub fn rescaled(&self) -> DMatrix<f64> {
        let scale = 1.0 / (self.order as f64).sqrt();
        DMatrix::from_fn(self.order, self.order, |i, j| {
            self.entry(i, j) as f64 * scale
        })
    }

    /// Negates rows, then columns, until row 0 and column 0 are all `+1`.
    pub fn normalize(&mut self) {
        let n = self.order;
        for i in 0..n {
            if self.entries[i * n] < 0 {
                self.entries[i * n..(i + 1) * n]
                    .iter_mut()
                    .for_each(|v| *v = -*v);
            }
        }
        for j in 0..n {
            if self.entries[j] < 0 {
                for i in 0..n {
                    self.entries[i * n + j] = -self.entries[i * n + j];
                }
            }
        }
    }

    pub fn codeword(&self, index: usize) -> Result<Codeword, HadamardError> {
        if index >= self.order {
            return Err(HadamardError::RowOutOfRange {
                index,
                order: self.order,
            });
        }
        Ok(Codeword {
            signs: self.row(index).to_vec(),
            index,
            extended: false,
        })
    }

    /// The all-minus word that supplements the codebook in the hybrid scheme.
    ///
    /// Only defined for a normalized matrix, whose row 0 is all `+1`.
    pub fn extended_codeword(&self) -> Result<Codeword, HadamardError> {
        if self.row(0).iter().any(|&s| s != 1) {
            return Err(HadamardError::Invalid);
        }
        Ok(Codeword {
            signs: vec![-1; self.order],
            index: 0,
            extended: true,
        })
    }

    pub fn codebook(&self) -> Vec<Codeword> {
        (0..self.order).map(|k| self.codeword(k).unwrap()).collect()
    }

    /// Text form: first line the order, then one row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.order);
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v:+}")).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses the text form and validates the result.
    pub fn from_text(text: &str) -> Result<Self, HadamardError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first, header) = lines.next().ok_or(HadamardError::Parse {
            line: 1,
            message: "empty input".into(),
        })?;
        let order: usize = header.parse().map_err(|_| HadamardError::Parse {
            line: first,
            message: format!("expected the matrix order, found {header:?}"),
        })?;
        let mut rows = Vec::with_capacity(order);
        for (line, content) in lines {
            let row = content
                .split_whitespace()
                .map(|tok| match tok {
                    "1" | "+1" => Ok(1),
                    "-1" => Ok(-1),
                    other => Err(HadamardError::Parse {
                        line,
                        message: format!("entry {other:?} is not one of +1, -1, 1"),
                    }),
                })
                .collect::<Result<Vec<i64>, _>>()?;
            if row.len() != order {
                return Err(HadamardError::Parse {
                    line,
                    message: format!("expected {order} entries, found {}", row.len()),
                });
            }
            rows.push(row);
        }
        if rows.len() != order {
            return Err(HadamardError::Parse {
                line: first,
                message: format!("expected {order} rows, found {}", rows.len()),
            });
        }
        Self::from_rows(&rows)
    }
}

/// True iff `m` is square, has only `±1` entries, order 1, 2 or a multiple of
/// 4, and mutually orthogonal rows (checked in exact integer arithmetic).
pub fn validate(m: &[Vec<i64>]) -> bool {
    let n = m.len();
    if n == 0 || !(n <= 2 || n.is_multiple_of(4)) {
        return false;
    }
    if m.iter()
        .any(|r| r.len() != n || r.iter().any(|&v| v != 1 && v != -1))
    {
        return false;
    }
    (0..n).all(|i| {
        (i..n).all(|j| {
            let dot: i64 = m[i].iter().zip(&m[j]).map(|(a, b)| a * b).sum();
            dot == if i == j { n as i64 } else { 0 }
        })
    })
}

/// Order `2^k` matrix from repeated `[[H, H], [H, -H]]` doubling.
pub fn sylvester(k: u32) -> Result<HadamardMatrix, HadamardError> {
    if k > 5 {
        return Err(HadamardError::ExponentOutOfRange(k));
    }
    let mut order = 1;
    let mut entries = vec![1i8];
    for _ in 0..k {
        let next = 2 * order;
        let mut doubled = vec![0i8; next * next];
        for i in 0..order {
            for j in 0..order {
                let v = entries[i * order + j];
                doubled[i * next + j] = v;
                doubled[i * next + j + order] = v;
                doubled[(i + order) * next + j] = v;
                doubled[(i + order) * next + j + order] = -v;
            }
        }
        order = next;
        entries = doubled;
    }
    Ok(HadamardMatrix { order, entries })
}

/// Paley type-I matrix of order `q + 1`.
///
/// With the Jacobsthal matrix `Q[a][b] = χ(a - b)`, the result is
/// `I + [[0, 1ᵀ], [-1, Q]]`.
pub fn paley(q: u32) -> Result<HadamardMatrix, HadamardError> {
    if q % 4 != 3 || q > 31 {
        return Err(HadamardError::InvalidPaleyOrder(q));
    }
    if prime_power(q).is_none() {
        return Err(FieldError::NotPrimePower(q).into());
    }
    let field = FiniteField::new(q)?;
    let qn = q as usize;
    let n = qn + 1;
    let mut entries = vec![0i8; n * n];
    for j in 1..n {
        entries[j] = 1;
        entries[j * n] = -1;
    }
    for a in 0..qn {
        for b in 0..qn {
            entries[(a + 1) * n + b + 1] = field.quadratic_character(field.sub(a, b));
        }
    }
    for i in 0..n {
        entries[i * n + i] += 1;
    }
    Ok(HadamardMatrix { order: n, entries })
}

/// A normalized Hadamard matrix of any supported order.
pub fn construct(order: usize) -> Result<HadamardMatrix, HadamardError> {
    let mut h = match order {
        1 | 2 | 4 | 8 | 16 | 32 => sylvester(order.trailing_zeros())?,
        12 | 20 | 24 | 28 => paley(order as u32 - 1)?,
        _ => return Err(HadamardError::UnsupportedOrder(order)),
    };
    h.normalize();
    Ok(h)
}
