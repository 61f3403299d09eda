//! Monomial spans: exponent range tables over channel links and their evaluation.
//!
//! A table is an ordered list of `(link, inclusive exponent range)`. Its tuples are enumerated
//! lexicographically with the last entry varying fastest, and each tuple yields the column
//! `prod_k link_k^{e_k} * w` with `w` the all-ones vector.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ChannelRealization, DiagonalLink, ExtendedVector, Scalar};

/// A link that may appear in a monomial.
///
/// Field order fixes the canonical key order: direct and equivalent links by `(tx, rx)`,
/// relay links by `(antenna, tx)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LinkId {
    Direct { tx: usize, rx: usize },
    /// The equivalent channel seen at a dirty receiver; equals `Direct` elsewhere.
    Equivalent { tx: usize, rx: usize },
    TxToIr { antenna: usize, tx: usize },
    Aux { antenna: usize, tx: usize },
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            LinkId::Direct { tx, rx } => write!(f, "H[{rx},{tx}]"),
            LinkId::Equivalent { tx, rx } => write!(f, "Heq[{rx},{tx}]"),
            LinkId::TxToIr { antenna, tx } => write!(f, "H_TIR[{antenna},{tx}]"),
            LinkId::Aux { antenna, tx } => write!(f, "T[{antenna},{tx}]"),
        }
    }
}

/// Inclusive exponent range `lo..=hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ExpRange {
    pub lo: u32,
    pub hi: u32,
}

impl ExpRange {
    pub fn new(lo: u32, hi: u32) -> Self {
        ExpRange { lo, hi }
    }
    pub fn fixed(v: u32) -> Self {
        ExpRange { lo: v, hi: v }
    }
    /// `1..=hi`; empty when `hi == 0`.
    pub fn upto(hi: u32) -> Self {
        ExpRange { lo: 1, hi }
    }
    pub fn len(&self) -> u64 {
        if self.hi < self.lo {
            0
        } else {
            u64::from(self.hi - self.lo) + 1
        }
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RangeTable {
    entries: Vec<(LinkId, ExpRange)>,
}

impl RangeTable {
    /// Entries are stored in canonical key order; a repeated key is an error.
    pub fn new(mut entries: Vec<(LinkId, ExpRange)>) -> Result<Self> {
        entries.sort_by_key(|(k, _)| *k);
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidParams("duplicate link in exponent table".into()));
        }
        Ok(RangeTable { entries })
    }

    pub fn entries(&self) -> &[(LinkId, ExpRange)] {
        &self.entries
    }

    /// Number of tuples, i.e. the product of range sizes.
    pub fn count(&self) -> BigUint {
        self.entries.iter().fold(BigUint::one(), |acc, (_, r)| acc * BigUint::from(r.len()))
    }

    /// Tuples in lexicographic order, last entry fastest.
    pub fn tuples(&self) -> TupleIter<'_> {
        let done = self.entries.iter().any(|(_, r)| r.is_empty());
        TupleIter {
            table: self,
            current: self.entries.iter().map(|(_, r)| r.lo).collect(),
            done,
        }
    }
}

pub struct TupleIter<'a> {
    table: &'a RangeTable,
    current: Vec<u32>,
    done: bool,
}

impl Iterator for TupleIter<'_> {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let mut pos = self.current.len();
        loop {
            if pos == 0 {
                self.done = true;
                break;
            }
            pos -= 1;
            let r = self.table.entries[pos].1;
            if self.current[pos] < r.hi {
                self.current[pos] += 1;
                break;
            }
            self.current[pos] = r.lo;
        }
        Some(out)
    }
}

/// Resolves link ids against one realization and its equivalent channel.
pub struct LinkBank<'a, S: Scalar> {
    pub channel: &'a ChannelRealization<S>,
    /// Equivalent links keyed by `(rx, tx)`; absent pairs fall back to the direct link.
    pub equivalent: &'a BTreeMap<(usize, usize), DiagonalLink<S>>,
}

impl<'a, S: Scalar> LinkBank<'a, S> {
    pub fn new(
        channel: &'a ChannelRealization<S>,
        equivalent: &'a BTreeMap<(usize, usize), DiagonalLink<S>>,
    ) -> Self {
        LinkBank { channel, equivalent }
    }

    pub fn link(&self, id: LinkId) -> Result<&'a DiagonalLink<S>> {
        let ch = self.channel;
        let (k, q) = (ch.users(), ch.relay_rx());
        match id {
            LinkId::Direct { tx, rx } if tx < k && rx < k => Ok(ch.direct(rx, tx)),
            LinkId::Equivalent { tx, rx } if tx < k && rx < k => {
                Ok(self.equivalent.get(&(rx, tx)).unwrap_or_else(|| ch.direct(rx, tx)))
            }
            LinkId::TxToIr { antenna, tx } if antenna < q && tx < k => Ok(ch.tx_to_ir(antenna, tx)),
            LinkId::Aux { antenna, tx } => {
                ch.aux(antenna, tx).ok_or_else(|| Error::MissingLink(id.to_string()))
            }
            _ => Err(Error::MissingLink(id.to_string())),
        }
    }
}

/// `link^e` for every `e` up to the table's maximum, per entry.
fn power_tables<S: Scalar>(table: &RangeTable, bank: &LinkBank<'_, S>) -> Result<Vec<Vec<Vec<S>>>> {
    let mut out = Vec::with_capacity(table.entries().len());
    for (id, range) in table.entries() {
        let link = bank.link(*id)?;
        let mut pows: Vec<Vec<S>> = vec![vec![S::one(); link.slots()]];
        for _ in 0..range.hi {
            let prev = pows.last().expect("nonempty");
            let next = prev.iter().zip(&link.diag).map(|(a, h)| a.clone() * h.clone()).collect();
            pows.push(next);
        }
        out.push(pows);
    }
    Ok(out)
}

/// Evaluate one column for an exponent tuple.
pub fn monomial_column<S: Scalar>(
    table: &RangeTable,
    bank: &LinkBank<'_, S>,
    exponents: &[u32],
) -> Result<ExtendedVector<S>> {
    if exponents.len() != table.entries().len() {
        return Err(Error::LengthMismatch { expected: table.entries().len(), got: exponents.len() });
    }
    let slots = bank.channel.slots();
    let mut col = vec![S::one(); slots];
    for ((id, _), &e) in table.entries().iter().zip(exponents) {
        if e == 0 {
            continue;
        }
        let link = bank.link(*id)?;
        for (c, h) in col.iter_mut().zip(&link.diag) {
            *c = c.clone() * num_traits::pow(h.clone(), e as usize);
        }
    }
    Ok(col)
}

/// Evaluate every column of a table in enumeration order.
pub fn evaluate_table<S: Scalar>(
    table: &RangeTable,
    bank: &LinkBank<'_, S>,
) -> Result<Vec<(Vec<u32>, ExtendedVector<S>)>> {
    let pows = power_tables(table, bank)?;
    let slots = bank.channel.slots();
    let mut out = Vec::new();
    for tuple in table.tuples() {
        let mut col = vec![S::one(); slots];
        for (k, &e) in tuple.iter().enumerate() {
            if e == 0 {
                continue;
            }
            for (c, h) in col.iter_mut().zip(&pows[k][e as usize]) {
                *c = c.clone() * h.clone();
            }
        }
        out.push((tuple, col));
    }
    Ok(out)
}
