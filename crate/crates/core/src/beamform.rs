//! Beamforming matrices built from monomials in the channel links.
//!
//! Every transmitter sends a bar family. Clean transmitters also send a tilde family, which
//! the relay demultiplexes and cancels at the clean receivers.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ExtendedVector, Scalar, SchemeKind, SchemeParams};
use crate::monomial::{evaluate_table, ExpRange, LinkBank, LinkId, RangeTable};
pub use crate::partition::{partition_b, partition_e_f, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Bar,
    Tilde,
}

/// Exponents of one monomial, split by link role.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ExponentTuple {
    /// Direct or equivalent links keyed by `(tx, rx)`.
    pub alpha: BTreeMap<(usize, usize), u32>,
    /// Transmitter-to-relay links keyed by `(antenna, tx)`.
    pub gamma: BTreeMap<(usize, usize), u32>,
    /// Auxiliary links keyed by `(antenna, tx)`.
    pub beta: BTreeMap<(usize, usize), u32>,
}

impl ExponentTuple {
    pub fn from_table(table: &RangeTable, exponents: &[u32]) -> Self {
        let mut t = ExponentTuple::default();
        for ((id, _), &e) in table.entries().iter().zip(exponents) {
            match *id {
                LinkId::Direct { tx, rx } | LinkId::Equivalent { tx, rx } => {
                    t.alpha.insert((tx, rx), e);
                }
                LinkId::TxToIr { antenna, tx } => {
                    t.gamma.insert((antenna, tx), e);
                }
                LinkId::Aux { antenna, tx } => {
                    t.beta.insert((antenna, tx), e);
                }
            }
        }
        t
    }
}

/// Columns of `V^{[owner]}` for one family, in enumeration order.
#[derive(Clone, Debug)]
pub struct BeamformingMatrix<S: Scalar = Complex64> {
    pub owner: usize,
    pub family: Family,
    pub table: RangeTable,
    pub columns: Vec<(ExponentTuple, ExtendedVector<S>)>,
}

impl<S: Scalar> BeamformingMatrix<S> {
    pub fn width(&self) -> usize {
        self.columns.len()
    }
}

impl BeamformingMatrix<Complex64> {
    /// Column matrix; with `normalize`, every column has unit Euclidean norm.
    pub fn matrix(&self, normalize: bool) -> DMatrix<Complex64> {
        let slots = self.columns.first().map_or(0, |(_, c)| c.len());
        let mut m = DMatrix::from_fn(slots, self.columns.len(), |r, c| self.columns[c].1[r]);
        if normalize {
            normalize_columns(&mut m);
        }
        m
    }
}

/// Scale each nonzero column to unit norm.
pub fn normalize_columns(m: &mut DMatrix<Complex64>) {
    for mut col in m.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col.unscale_mut(norm);
        }
    }
}

/// Off-diagonal `(tx, rx)` pairs, each with exponents `1..=n`.
pub(crate) fn cross_alpha(k: usize, n: u32, equivalent: bool) -> Vec<(LinkId, ExpRange)> {
    let mut out = Vec::new();
    for tx in 0..k {
        for rx in 0..k {
            if tx != rx {
                let id = if equivalent { LinkId::Equivalent { tx, rx } } else { LinkId::Direct { tx, rx } };
                out.push((id, ExpRange::upto(n)));
            }
        }
    }
    out
}

fn check_owner(family: Family, owner: usize, params: &SchemeParams) -> Result<()> {
    if params.kind == SchemeKind::Simple {
        return Err(Error::NotApplicable("the single-slot scheme uses no beamforming tables".into()));
    }
    if owner >= params.k {
        return Err(Error::InvalidParams(format!("transmitter {owner} out of range")));
    }
    if family == Family::Tilde && !params.is_clean(owner) {
        return Err(Error::InvalidParams(format!("transmitter {owner} sends no tilde streams")));
    }
    Ok(())
}

/// Exponent ranges for `V^{[owner]}` of the given family.
pub fn beamformer_table(
    family: Family,
    owner: usize,
    params: &SchemeParams,
    partition: &Partition,
) -> Result<RangeTable> {
    check_owner(family, owner, params)?;
    let (k, n) = (params.k, params.n);
    let (sn, tn, un) = (params.s * n, params.t * n, params.upsilon * n);
    let mut entries = cross_alpha(k, n, family == Family::Tilde);
    for antenna in 0..params.q {
        let demux = partition.demux_set(antenna);
        for tx in 0..k {
            let gamma = LinkId::TxToIr { antenna, tx };
            match family {
                Family::Bar => {
                    let hi = if params.is_clean(owner) { sn } else { tn };
                    entries.push((gamma, ExpRange::upto(hi)));
                }
                Family::Tilde if demux.contains(&tx) => {
                    entries.push((LinkId::Aux { antenna, tx }, ExpRange::upto(un)));
                }
                Family::Tilde => entries.push((gamma, ExpRange::upto(sn))),
            }
        }
    }
    RangeTable::new(entries)
}

/// All exponent tuples of `V^{[owner]}` in column order.
pub fn enumerate_exponents(
    family: Family,
    owner: usize,
    params: &SchemeParams,
    partition: &Partition,
) -> Result<Vec<ExponentTuple>> {
    let table = beamformer_table(family, owner, params, partition)?;
    Ok(table.tuples().map(|e| ExponentTuple::from_table(&table, &e)).collect())
}

pub fn build_beamformer<S: Scalar>(
    family: Family,
    owner: usize,
    bank: &LinkBank<'_, S>,
    params: &SchemeParams,
    partition: &Partition,
) -> Result<BeamformingMatrix<S>> {
    let table = beamformer_table(family, owner, params, partition)?;
    let columns = evaluate_table(&table, bank)?
        .into_iter()
        .map(|(e, col)| (ExponentTuple::from_table(&table, &e), col))
        .collect();
    Ok(BeamformingMatrix { owner, family, table, columns })
}
