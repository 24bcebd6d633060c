//! Functional qRAM: `Σ a_j |j⟩ → Σ a_j |d_j⟩|j⟩`.
//!
//! The data register holds the digitized label of each cell's value. Real
//! cells get their codec label; padding cells get the reserved labels
//! `N, N+1, …` in address order.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::digitizer::{letters_for, Codec};
use crate::quantum::{space_size, JointState, QuantumError};
use crate::value::Value;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QramError {
    #[error("address {address} outside file of {size} cells")]
    AddressOutOfRange { address: usize, size: usize },
    #[error("address superposition not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("file {file} has {cells} cells, not a power of 4")]
    NotPadded { file: String, cells: usize },
    #[error("codec of {file} does not match the file contents: {detail}")]
    CodecMismatch { file: String, detail: String },
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

/// One digitized file as seen by the memory: 1-based cells, `None` for
/// padding, and the codec labelling the real values.
#[derive(Debug, Clone)]
pub struct FileView<'a> {
    pub file_id: String,
    pub cells: Vec<Option<&'a Value>>,
    pub codec: &'a Codec,
}

impl FileView<'_> {
    pub fn letters(&self) -> u32 {
        letters_for(self.cells.len())
    }

    /// Data label of every cell, indexed by `address - 1`.
    pub fn cell_labels(&self) -> Result<Vec<usize>, QramError> {
        let size = self.cells.len();
        if space_size(letters_for(size)) != size {
            return Err(QramError::NotPadded {
                file: self.file_id.clone(),
                cells: size,
            });
        }
        let mismatch = |detail: String| QramError::CodecMismatch {
            file: self.file_id.clone(),
            detail,
        };
        let mut next_pad = self.codec.count();
        let mut labels = Vec::with_capacity(size);
        let mut real = 0;
        for cell in &self.cells {
            match cell {
                Some(v) => {
                    let l = self
                        .codec
                        .encode(v)
                        .ok_or_else(|| mismatch(format!("{} has no label", v.literal())))?;
                    labels.push(l.index());
                    real += 1;
                }
                None => {
                    labels.push(next_pad);
                    next_pad += 1;
                }
            }
        }
        if real != self.codec.count() || next_pad != size {
            return Err(mismatch(format!(
                "{real} real cells for {} codec entries",
                self.codec.count()
            )));
        }
        Ok(labels)
    }

    /// Label → address, the inverse of [`cell_labels`](Self::cell_labels).
    pub fn correlation(&self) -> Result<Vec<usize>, QramError> {
        let labels = self.cell_labels()?;
        let mut corr = vec![0; labels.len()];
        for (i, l) in labels.into_iter().enumerate() {
            corr[l] = i + 1;
        }
        Ok(corr)
    }
}

/// `Σ a_j |j⟩` over 1-based cell addresses.
#[derive(Debug, Clone, PartialEq)]
pub struct AddressSuperposition {
    weights: BTreeMap<usize, Complex64>,
}

impl AddressSuperposition {
    pub fn new(weights: BTreeMap<usize, Complex64>) -> Result<Self, QramError> {
        let norm: f64 = weights.values().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(QramError::NotNormalized(norm));
        }
        Ok(AddressSuperposition { weights })
    }

    /// Equal weights over `addresses`; panics on an empty list.
    pub fn uniform(addresses: impl IntoIterator<Item = usize>) -> Self {
        let addrs: Vec<usize> = addresses.into_iter().collect();
        assert!(!addrs.is_empty(), "uniform superposition over no addresses");
        let a = Complex64::new(1.0 / (addrs.len() as f64).sqrt(), 0.0);
        AddressSuperposition {
            weights: addrs.into_iter().map(|j| (j, a)).collect(),
        }
    }

    pub fn single(address: usize) -> Self {
        AddressSuperposition {
            weights: BTreeMap::from([(address, Complex64::new(1.0, 0.0))]),
        }
    }

    pub fn weights(&self) -> &BTreeMap<usize, Complex64> {
        &self.weights
    }

    pub fn norm_sqr(&self) -> f64 {
        self.weights.values().map(|a| a.norm_sqr()).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fetch {
    pub state: JointState,
    /// Addresses carrying non-zero weight.
    pub cells_touched: usize,
}

pub fn correlated_fetch(
    file: &FileView<'_>,
    addresses: &AddressSuperposition,
) -> Result<Fetch, QramError> {
    let size = file.cells.len();
    let labels = file.cell_labels()?;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); size];
    let mut touched = 0;
    for (&j, &a) in &addresses.weights {
        if j == 0 || j > size {
            return Err(QramError::AddressOutOfRange { address: j, size });
        }
        amplitudes[labels[j - 1]] = a;
        if a.norm_sqr() > 0.0 {
            touched += 1;
        }
    }
    let state = JointState::from_parts(file.letters(), amplitudes, file.correlation()?)?;
    Ok(Fetch {
        state,
        cells_touched: touched,
    })
}

/// Uniform fetch over every cell of the file: the search start state.
pub fn fetch_all(file: &FileView<'_>) -> Result<Fetch, QramError> {
    correlated_fetch(file, &AddressSuperposition::uniform(1..=file.cells.len()))
}
