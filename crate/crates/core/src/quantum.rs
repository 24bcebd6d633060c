//! Exact state-vector simulation of the factorized quantum search.
//!
//! A file of `4^n` cells is addressed by `n` base-4 letters. The search runs
//! one Grover step per letter: a sign oracle on that letter, the 4×4
//! reflection `R0 = 2|s⟩⟨s| − I` on that letter, then a projection that
//! drops every label whose amplitude vanished. With the four values of a
//! letter equally populated, one step resolves the letter with certainty,
//! so a search over `4^n` cells consumes exactly `n` oracle queries.
//!
//! Letters are numbered `1..=n`, most significant first.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Default threshold below which an amplitude is treated as zero.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("invalid correlation: {0}")]
    InvalidCorrelation(String),
    #[error("letter index {index} out of range 1..={n}")]
    LetterIndex { index: usize, n: u32 },
    #[error("target label {target} outside label space of size {size}")]
    TargetOutOfRange { target: usize, size: usize },
    #[error("every amplitude fell below the prune tolerance")]
    EmptyState,
    #[error("prune tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("state has {got} amplitudes, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

/// One quaternary digit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(u8);

impl Letter {
    pub fn new(value: u8) -> Option<Letter> {
        (value < 4).then_some(Letter(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

/// An `n`-letter base-4 label. The integer form is
/// `Σ letters[i] · 4^(n−1−i)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    index: usize,
    n: u32,
}

impl Label {
    pub fn new(index: usize, n: u32) -> Option<Label> {
        (index < space_size(n)).then_some(Label { index, n })
    }

    pub fn from_letters(letters: &[Letter]) -> Label {
        let index = letters.iter().fold(0usize, |acc, l| acc * 4 + l.0 as usize);
        Label {
            index,
            n: letters.len() as u32,
        }
    }

    pub fn index(self) -> usize {
        self.index
    }

    pub fn len(self) -> u32 {
        self.n
    }

    pub fn is_empty(self) -> bool {
        self.n == 0
    }

    /// Letter at 1-based position `i`.
    pub fn letter(self, i: usize) -> Letter {
        letter_of(self.index, self.n, i)
    }

    pub fn letters(self) -> Vec<Letter> {
        (1..=self.n as usize).map(|i| self.letter(i)).collect()
    }

    /// The same integer written with a different number of letters.
    pub fn widen(self, n: u32) -> Option<Label> {
        Label::new(self.index, n)
    }
}

/// Base-4 digits; the zero-letter label renders as `ε`.
impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.n == 0 {
            return f.write_str("ε");
        }
        for l in self.letters() {
            write!(f, "{}", l.0)?;
        }
        Ok(())
    }
}

/// `4^n`.
pub fn space_size(n: u32) -> usize {
    1usize << (2 * n)
}

fn stride(n: u32, i: usize) -> usize {
    space_size(n - i as u32)
}

fn letter_of(index: usize, n: u32, i: usize) -> Letter {
    Letter(((index / stride(n, i)) % 4) as u8)
}

/// The constant reflection applied to a single letter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reflection4 {
    matrix: [[f64; 4]; 4],
}

impl Reflection4 {
    pub const R0: Reflection4 = Reflection4 {
        matrix: [
            [-0.5, 0.5, 0.5, 0.5],
            [0.5, -0.5, 0.5, 0.5],
            [0.5, 0.5, -0.5, 0.5],
            [0.5, 0.5, 0.5, -0.5],
        ],
    };

    pub fn matrix(&self) -> &[[f64; 4]; 4] {
        &self.matrix
    }

    pub fn apply(&self, v: [Complex64; 4]) -> [Complex64; 4] {
        let mut out = [Complex64::new(0.0, 0.0); 4];
        for (row, o) in self.matrix.iter().zip(out.iter_mut()) {
            *o = row.iter().zip(v.iter()).map(|(m, x)| x * *m).sum();
        }
        out
    }
}

/// Data register ⊗ address register: one amplitude per label, and the cell
/// address each label is correlated with.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    n: u32,
    amplitudes: Vec<Complex64>,
    correlation: Vec<usize>,
    active: Vec<bool>,
}

impl JointState {
    /// Builds a state from raw parts. `correlation` must map the whole label
    /// space injectively onto cell addresses.
    pub fn from_parts(
        n: u32,
        amplitudes: Vec<Complex64>,
        correlation: Vec<usize>,
    ) -> Result<JointState, QuantumError> {
        let size = space_size(n);
        if amplitudes.len() != size {
            return Err(QuantumError::Dimension {
                got: amplitudes.len(),
                expected: size,
            });
        }
        check_correlation(n, &correlation)?;
        let active = amplitudes.iter().map(|a| a.norm_sqr() > 0.0).collect();
        Ok(JointState {
            n,
            amplitudes,
            correlation,
            active,
        })
    }

    pub fn letters(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, label: usize) -> Complex64 {
        self.amplitudes[label]
    }

    pub fn correlation(&self) -> &[usize] {
        &self.correlation
    }

    pub fn address_of(&self, label: usize) -> usize {
        self.correlation[label]
    }

    pub fn is_active(&self, label: usize) -> bool {
        self.active[label]
    }

    pub fn active_labels(&self) -> Vec<usize> {
        (0..self.active.len()).filter(|&l| self.active[l]).collect()
    }

    pub fn probability(&self, label: usize) -> f64 {
        self.amplitudes[label].norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    fn check_letter(&self, i: usize) -> Result<(), QuantumError> {
        if i == 0 || i > self.n as usize {
            return Err(QuantumError::LetterIndex {
                index: i,
                n: self.n,
            });
        }
        Ok(())
    }
}

fn check_correlation(n: u32, correlation: &[usize]) -> Result<(), QuantumError> {
    let size = space_size(n);
    if correlation.len() != size {
        return Err(QuantumError::InvalidCorrelation(format!(
            "{} entries for a label space of {size}",
            correlation.len()
        )));
    }
    let mut seen = HashSet::with_capacity(size);
    for (label, &addr) in correlation.iter().enumerate() {
        if !seen.insert(addr) {
            return Err(QuantumError::InvalidCorrelation(format!(
                "address {addr} is correlated with more than one label (second at {label})"
            )));
        }
    }
    Ok(())
}

/// Sign oracle for one sought label. Each application reads one letter and
/// costs one query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizedOracle {
    target: Label,
    queries_used: u64,
}

impl FactorizedOracle {
    pub fn new(target: Label) -> Self {
        FactorizedOracle {
            target,
            queries_used: 0,
        }
    }

    pub fn target(&self) -> Label {
        self.target
    }

    pub fn queries_used(&self) -> u64 {
        self.queries_used
    }

    /// Classical factor for letter `i`: true when the letter matches.
    pub fn factor(&self, i: usize, letter: Letter) -> bool {
        self.target.letter(i) == letter
    }
}

/// Equal superposition over the full label space.
pub fn uniform_state(n: u32, correlation: Vec<usize>) -> Result<JointState, QuantumError> {
    let size = space_size(n);
    let amp = Complex64::new(1.0 / (size as f64).sqrt(), 0.0);
    JointState::from_parts(n, vec![amp; size], correlation)
}

/// Negates every amplitude whose `i`-th letter matches the oracle target.
pub fn apply_oracle(
    state: &JointState,
    oracle: &mut FactorizedOracle,
    i: usize,
) -> Result<JointState, QuantumError> {
    state.check_letter(i)?;
    if oracle.target.n != state.n {
        return Err(QuantumError::TargetOutOfRange {
            target: oracle.target.index,
            size: space_size(state.n),
        });
    }
    let want = oracle.target.letter(i);
    let mut next = state.clone();
    for (label, amp) in next.amplitudes.iter_mut().enumerate() {
        if letter_of(label, state.n, i) == want {
            *amp = -*amp;
        }
    }
    oracle.queries_used += 1;
    Ok(next)
}

/// Applies `I ⊗ … ⊗ R0 ⊗ … ⊗ I` with `R0` on letter `i`.
pub fn apply_reflection(state: &JointState, i: usize) -> Result<JointState, QuantumError> {
    state.check_letter(i)?;
    let step = stride(state.n, i);
    let block = step * 4;
    let mut next = state.clone();
    for base in (0..next.amplitudes.len()).step_by(block) {
        for offset in base..base + step {
            let idx = [offset, offset + step, offset + 2 * step, offset + 3 * step];
            let v = idx.map(|k| next.amplitudes[k]);
            let r = Reflection4::R0.apply(v);
            for (k, a) in idx.iter().zip(r) {
                next.amplitudes[*k] = a;
            }
        }
    }
    Ok(next)
}

/// Zeroes amplitudes of modulus below `eps` and renormalizes the rest.
/// Zeroed labels keep their correlation entry but become inactive.
pub fn project_prune(state: &JointState, eps: f64) -> Result<JointState, QuantumError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(QuantumError::BadTolerance(eps));
    }
    let mut next = state.clone();
    for (amp, act) in next.amplitudes.iter_mut().zip(next.active.iter_mut()) {
        if amp.norm() < eps {
            *amp = Complex64::new(0.0, 0.0);
            *act = false;
        } else {
            *act = true;
        }
    }
    let norm = next.norm_sqr().sqrt();
    if norm == 0.0 {
        return Err(QuantumError::EmptyState);
    }
    for amp in next.amplitudes.iter_mut() {
        *amp /= norm;
    }
    Ok(next)
}

/// One factorized Grover step on letter `i`: oracle, reflection, projection.
///
/// Exact only when the active labels are uniform and balanced across the
/// four values of letter `i`; the step runs regardless, and callers verify
/// what they measure.
pub fn grover_letter_step(
    state: &JointState,
    oracle: &mut FactorizedOracle,
    i: usize,
    eps: f64,
) -> Result<JointState, QuantumError> {
    let marked = apply_oracle(state, oracle, i)?;
    let reflected = apply_reflection(&marked, i)?;
    project_prune(&reflected, eps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub label: Label,
    pub address: usize,
    pub queries: u64,
    /// Probability of the measured label in the final state.
    pub probability: f64,
    pub final_state: JointState,
}

/// Runs the letter steps `1..=n` from a prepared state and measures the most
/// probable label.
pub fn run_search(
    start: JointState,
    oracle: &mut FactorizedOracle,
    eps: f64,
) -> Result<SearchOutcome, QuantumError> {
    let size = space_size(start.n);
    if oracle.target.index >= size || oracle.target.n != start.n {
        return Err(QuantumError::TargetOutOfRange {
            target: oracle.target.index,
            size,
        });
    }
    let before = oracle.queries_used;
    let mut state = start;
    for i in 1..=state.n as usize {
        state = grover_letter_step(&state, oracle, i, eps)?;
    }
    let (label, probability) = state
        .amplitudes
        .iter()
        .enumerate()
        .map(|(l, a)| (l, a.norm_sqr()))
        .fold(
            (0, f64::MIN),
            |best, cur| if cur.1 > best.1 { cur } else { best },
        );
    Ok(SearchOutcome {
        label: Label {
            index: label,
            n: state.n,
        },
        address: state.correlation[label],
        queries: oracle.queries_used - before,
        probability,
        final_state: state,
    })
}

/// Full search over a `4^n`-cell file with the given label → address
/// correlation. A one-cell file (`n = 0`) returns immediately with no query.
pub fn factorized_search(
    n: u32,
    correlation: Vec<usize>,
    oracle: &mut FactorizedOracle,
) -> Result<SearchOutcome, QuantumError> {
    factorized_search_with(n, correlation, oracle, DEFAULT_EPS)
}

pub fn factorized_search_with(
    n: u32,
    correlation: Vec<usize>,
    oracle: &mut FactorizedOracle,
    eps: f64,
) -> Result<SearchOutcome, QuantumError> {
    let start = uniform_state(n, correlation)?;
    run_search(start, oracle, eps)
}
