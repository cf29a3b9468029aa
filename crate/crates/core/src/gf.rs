//! Small finite fields used by the Paley construction.
//!
//! Elements are represented as integers in `0..q`. For prime `q` this is the
//! residue itself; for `q = 27` an element is the base-3 digit string
//! `c0 + 3 c1 + 9 c2` of the polynomial `c0 + c1 x + c2 x^2` over GF(3),
//! reduced modulo the irreducible cubic `x^3 + 2x + 1`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("{0} is not a prime power")]
    NotPrimePower(u32),
    #[error("finite field of order {0} is not supported")]
    Unsupported(u32),
}

/// GF(q) with full addition and multiplication tables.
#[derive(Debug, Clone)]
pub struct FiniteField {
    order: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    squares: Vec<bool>,
}

/// Returns `(p, k)` with `n = p^k`, or `None`.
pub(crate) fn prime_power(n: u32) -> Option<(u32, u32)> {
    if n < 2 {
        return None;
    }
    let p = (2..=n).find(|d| n.is_multiple_of(*d))?;
    let mut m = n;
    let mut k = 0;
    while m.is_multiple_of(p) {
        m /= p;
        k += 1;
    }
    (m == 1).then_some((p, k))
}

// x^3 = -2x - 1 = x + 2 over GF(3)
const GF27_REDUCTION: [u8; 3] = [2, 1, 0];

fn gf27_digits(v: usize) -> [u8; 3] {
    [(v % 3) as u8, (v / 3 % 3) as u8, (v / 9 % 3) as u8]
}

fn gf27_value(d: [u8; 3]) -> usize {
    d[0] as usize + 3 * d[1] as usize + 9 * d[2] as usize
}

fn gf27_mul(a: usize, b: usize) -> usize {
    let (a, b) = (gf27_digits(a), gf27_digits(b));
    let mut prod = [0u8; 5];
    for i in 0..3 {
        for j in 0..3 {
            prod[i + j] = (prod[i + j] + a[i] * b[j]) % 3;
        }
    }
    // fold x^4 and x^3 back down, highest degree first
    for deg in (3..5).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (k, r) in GF27_REDUCTION.iter().enumerate() {
            prod[deg - 3 + k] = (prod[deg - 3 + k] + c * r) % 3;
        }
    }
    gf27_value([prod[0], prod[1], prod[2]])
}

impl FiniteField {
    /// Builds GF(q) for prime `q` or `q = 27`.
    pub fn new(q: u32) -> Result<Self, FieldError> {
        let (_, k) = prime_power(q).ok_or(FieldError::NotPrimePower(q))?;
        let n = q as usize;
        if n > 256 {
            return Err(FieldError::Unsupported(q));
        }
        let (add, mul): (Vec<u8>, Vec<u8>) = if k == 1 {
            let add = (0..n * n).map(|i| ((i / n + i % n) % n) as u8).collect();
            let mul = (0..n * n).map(|i| ((i / n) * (i % n) % n) as u8).collect();
            (add, mul)
        } else if q == 27 {
            let add = (0..n * n)
                .map(|i| {
                    let (a, b) = (gf27_digits(i / n), gf27_digits(i % n));
                    gf27_value([(a[0] + b[0]) % 3, (a[1] + b[1]) % 3, (a[2] + b[2]) % 3]) as u8
                })
                .collect();
            let mul = (0..n * n).map(|i| gf27_mul(i / n, i % n) as u8).collect();
            (add, mul)
        } else {
            return Err(FieldError::Unsupported(q));
        };
        let neg = (0..n)
            .map(|a| (0..n).find(|&b| add[a * n + b] == 0).unwrap() as u8)
            .collect();
        let mut squares = vec![false; n];
        for y in 1..n {
            squares[mul[y * n + y] as usize] = true;
        }
        Ok(Self {
            order: n,
            add,
            mul,
            neg,
            squares,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.order + b] as usize
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.add(a, self.neg[b] as usize)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    /// Quadratic character: 0 at zero, +1 on nonzero squares, -1 otherwise.
    pub fn quadratic_character(&self, a: usize) -> i8 {
        match (a, self.squares[a]) {
            (0, _) => 0,
            (_, true) => 1,
            (_, false) => -1,
        }
    }
}
