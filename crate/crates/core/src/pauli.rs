//! Signed Pauli strings in symplectic form.
//!
//! A string is `i^phase · P_0 ⊗ P_1 ⊗ … ⊗ P_{n-1}` where each `P_q` is one of
//! the Hermitian letters I, X, Y, Z encoded as `(x, z)` = (0,0), (1,0), (1,1),
//! (0,1). Qubit 0 is the leftmost letter and the most significant Kronecker
//! factor of [`PauliString::to_matrix`].

use crate::dense::DenseOperator;
use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("qubit count mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("dense expansion limited to {max} qubits, got {got}")]
    TooLarge { got: usize, max: usize },
    #[error("illegal character {0:?} in Pauli string")]
    IllegalChar(char),
    #[error("empty Pauli string")]
    Empty,
    #[error("phase ±i cannot be written in text form")]
    NonHermitianPhase,
}

pub const MAX_DENSE_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn matrix(self) -> DenseOperator {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let rows = match self {
            Letter::I => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]],
            Letter::X => [[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]],
            Letter::Y => [[c(0., 0.), c(0., -1.)], [c(0., 1.), c(0., 0.)]],
            Letter::Z => [[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]],
        };
        DenseOperator::from_fn(2, |r, col| rows[r][col])
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = n.div_ceil(64);
        Self {
            n,
            x: vec![0; w],
            z: vec![0; w],
            phase: 0,
        }
    }

    /// `-I` on `n` qubits.
    pub fn minus_identity(n: usize) -> Self {
        Self::identity(n).with_phase(2)
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        let mut p = Self::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }

    /// A single letter on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set_letter(q, letter);
        p
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Exponent `k` of the global factor `i^k`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, k: u8) -> Self {
        self.phase = k % 4;
        self
    }

    /// Multiplies by `-1` when `negative`.
    pub fn signed(mut self, negative: bool) -> Self {
        if negative {
            self.phase = (self.phase + 2) % 4;
        }
        self
    }

    pub fn x_bit(&self, q: usize) -> bool {
        assert!(q < self.n);
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn z_bit(&self, q: usize) -> bool {
        assert!(q < self.n);
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    pub fn set_letter(&mut self, q: usize, l: Letter) {
        assert!(q < self.n);
        let (xb, zb) = l.bits();
        let mask = 1u64 << (q % 64);
        let w = q / 64;
        if xb {
            self.x[w] |= mask;
        } else {
            self.x[w] &= !mask;
        }
        if zb {
            self.z[w] |= mask;
        } else {
            self.z[w] &= !mask;
        }
    }

    /// True when all letters are I (the phase may be anything).
    pub fn is_scalar(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// `Some(±1)` for Hermitian strings.
    pub fn sign(&self) -> Option<i8> {
        match self.phase {
            0 => Some(1),
            2 => Some(-1),
            _ => None,
        }
    }

    pub fn y_count(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(&self.z)
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Matrix transpose; each Y letter contributes a factor `-1`.
    pub fn transpose(&self) -> Self {
        let flip = self.y_count() % 2 == 1;
        self.clone().signed(flip)
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, PauliError> {
        if self.n != other.n {
            return Err(PauliError::LengthMismatch(self.n, other.n));
        }
        let mut plus = 0u32;
        let mut minus = 0u32;
        let mut x = Vec::with_capacity(self.x.len());
        let mut z = Vec::with_capacity(self.z.len());
        for w in 0..self.x.len() {
            let (x1, z1, x2, z2) = (self.x[w], self.z[w], other.x[w], other.z[w]);
            // XY = iZ, YZ = iX, ZX = iY and the reversed orders give -i.
            let p = (x1 & !z1 & x2 & z2) | (x1 & z1 & !x2 & z2) | (!x1 & z1 & x2 & !z2);
            let m = (x1 & z1 & x2 & !z2) | (!x1 & z1 & x2 & z2) | (x1 & !z1 & !x2 & z2);
            plus += p.count_ones();
            minus += m.count_ones();
            x.push(x1 ^ x2);
            z.push(z1 ^ z2);
        }
        let phase = (self.phase as u32 + other.phase as u32 + plus + 3 * minus) % 4;
        Ok(Self {
            n: self.n,
            x,
            z,
            phase: phase as u8,
        })
    }

    pub fn commutes(&self, other: &Self) -> Result<bool, PauliError> {
        if self.n != other.n {
            return Err(PauliError::LengthMismatch(self.n, other.n));
        }
        let parity = (0..self.x.len()).fold(0u32, |acc, w| {
            acc ^ ((self.x[w] & other.z[w]) ^ (self.z[w] & other.x[w])).count_ones()
        });
        Ok(parity % 2 == 0)
    }

    /// Tensor product `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut letters: Vec<Letter> = (0..self.n).map(|q| self.letter(q)).collect();
        letters.extend((0..other.n).map(|q| other.letter(q)));
        Self::from_letters(&letters).with_phase(self.phase + other.phase)
    }

    pub fn to_matrix(&self) -> Result<DenseOperator, PauliError> {
        if self.n > MAX_DENSE_QUBITS {
            return Err(PauliError::TooLarge {
                got: self.n,
                max: MAX_DENSE_QUBITS,
            });
        }
        let mut m = DenseOperator::identity(1);
        for q in 0..self.n {
            m = m.kron(&self.letter(q).matrix());
        }
        let factor = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, -1.0),
        ][self.phase as usize];
        Ok(m.scale(factor))
    }

    /// Text form: leading `-` for negative sign, then letters. The positive
    /// zero-qubit string is `+`.
    pub fn to_text(&self) -> Result<String, PauliError> {
        let mut s = match self.phase {
            0 if self.n == 0 => "+".to_string(),
            0 => String::new(),
            2 => "-".to_string(),
            _ => return Err(PauliError::NonHermitianPhase),
        };
        s.extend((0..self.n).map(|q| self.letter(q).as_char()));
        Ok(s)
    }

    pub fn parse(text: &str) -> Result<Self, PauliError> {
        let t = text.trim();
        if t.is_empty() {
            return Err(PauliError::Empty);
        }
        let (negative, body) = if let Some(rest) = t.strip_prefix('-') {
            (true, rest)
        } else if let Some(rest) = t.strip_prefix('\u{2212}') {
            (true, rest)
        } else if let Some(rest) = t.strip_prefix('+') {
            (false, rest)
        } else {
            (false, t)
        };
        if body.starts_with('i') || body.starts_with('j') {
            return Err(PauliError::NonHermitianPhase);
        }
        let letters = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Letter::I),
                'X' => Ok(Letter::X),
                'Y' => Ok(Letter::Y),
                'Z' => Ok(Letter::Z),
                other => Err(PauliError::IllegalChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_letters(&letters).signed(negative))
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = ["+", "+i", "-", "-i"][self.phase as usize];
        write!(f, "{prefix}")?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_text() {
            Ok(s) => f.write_str(&s),
            Err(_) => write!(f, "{self:?}"),
        }
    }
}

impl FromStr for PauliString {
    type Err = PauliError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}
