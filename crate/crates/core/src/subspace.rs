//! Message and interference subspaces at receivers and relay antennas: exponent tables,
//! closed-form dimensions, and rank-based verification of containment and independence.
//!
//! Every label owns a range table; its enumerated size must equal the closed-form dimension.
//! Verification is generic over a rank oracle so the same checks run in floating point
//! and in exact arithmetic.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::beamform::{cross_alpha, normalize_columns};
use crate::error::Result;
use crate::exact::exact_rank;
use crate::linalg::{rank_info, RANK_TOL};
use crate::model::{ChannelRealization, ExactComplex, ExtendedVector, Scalar, SchemeKind, SchemeParams};
use crate::monomial::{evaluate_table, ExpRange, LinkBank, LinkId, RangeTable};
use crate::partition::Partition;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Node {
    Receiver(usize),
    Antenna(usize),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Receiver(j) => write!(f, "rx{j}"),
            Node::Antenna(q) => write!(f, "ir{q}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SubspaceLabel {
    /// Own bar streams at a receiver.
    CBar,
    /// Own tilde streams at a clean receiver.
    CTilde,
    /// Aligned bar interference.
    ABar,
    /// Aligned tilde interference at a dirty receiver.
    ATilde,
    /// Tilde streams of `tx` demultiplexed at a relay antenna.
    CTildeIr { tx: usize },
    /// Aligned bar interference at a relay antenna.
    ABarIr,
    /// Aligned tilde interference at a relay antenna.
    ATildeIr,
}

impl fmt::Display for SubspaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubspaceLabel::CBar => f.write_str("C_bar"),
            SubspaceLabel::CTilde => f.write_str("C_tilde"),
            SubspaceLabel::ABar => f.write_str("A_bar"),
            SubspaceLabel::ATilde => f.write_str("A_tilde"),
            SubspaceLabel::CTildeIr { tx } => write!(f, "C_tilde[{tx}]"),
            SubspaceLabel::ABarIr => f.write_str("A_bar"),
            SubspaceLabel::ATildeIr => f.write_str("A_tilde"),
        }
    }
}

/// Labels present in the scheme, grouped by node in a fixed order.
pub fn subspace_labels(params: &SchemeParams, partition: &Partition) -> Vec<(Node, SubspaceLabel)> {
    let mut out = Vec::new();
    if params.kind == SchemeKind::Simple {
        return out;
    }
    for j in 0..params.k {
        let node = Node::Receiver(j);
        out.push((node, SubspaceLabel::CBar));
        if params.is_clean(j) {
            out.push((node, SubspaceLabel::CTilde));
            out.push((node, SubspaceLabel::ABar));
        } else {
            out.push((node, SubspaceLabel::ABar));
            out.push((node, SubspaceLabel::ATilde));
        }
    }
    for q in 0..params.q {
        let node = Node::Antenna(q);
        for &tx in partition.demux_set(q) {
            out.push((node, SubspaceLabel::CTildeIr { tx }));
        }
        out.push((node, SubspaceLabel::ABarIr));
        if !(params.kind == SchemeKind::CirT2 && q == 0) {
            out.push((node, SubspaceLabel::ATildeIr));
        }
    }
    out
}

/// Alpha entries for a message subspace at receiver `j`: cross links `1..=n`, the own
/// link fixed at 1, other diagonal links fixed at 0.
fn message_alpha(k: usize, n: u32, j: usize, equivalent: bool) -> Vec<(LinkId, ExpRange)> {
    let mut out = cross_alpha(k, n, equivalent);
    for d in 0..k {
        let id = if equivalent { LinkId::Equivalent { tx: d, rx: d } } else { LinkId::Direct { tx: d, rx: d } };
        out.push((id, ExpRange::fixed(u32::from(d == j))));
    }
    out
}

/// Alpha entries for aligned interference at receiver `j`: cross links into `j` get `1..=n+1`.
fn widened_alpha(k: usize, n: u32, j: usize, equivalent: bool) -> Vec<(LinkId, ExpRange)> {
    cross_alpha(k, n, equivalent)
        .into_iter()
        .map(|(id, r)| match id {
            LinkId::Direct { rx, .. } | LinkId::Equivalent { rx, .. } if rx == j => (id, ExpRange::upto(n + 1)),
            _ => (id, r),
        })
        .collect()
}

/// Exponent table of one subspace.
pub fn range_table(node: Node, label: SubspaceLabel, params: &SchemeParams, partition: &Partition) -> Result<RangeTable> {
    let (k, n) = (params.k, params.n);
    let (sn, tn, un) = (params.s * n, params.t * n, params.upsilon * n);
    let big = sn.max(tn);
    let mut entries: Vec<(LinkId, ExpRange)>;
    // Tilde-family relay and aux links; `gamma` decides each relay-link range.
    let tilde_tail = |entries: &mut Vec<(LinkId, ExpRange)>, gamma: &dyn Fn(usize, usize) -> ExpRange| {
        for antenna in 0..params.q {
            let demux = partition.demux_set(antenna);
            for tx in 0..k {
                if demux.contains(&tx) {
                    entries.push((LinkId::Aux { antenna, tx }, ExpRange::upto(un)));
                } else {
                    entries.push((LinkId::TxToIr { antenna, tx }, gamma(antenna, tx)));
                }
            }
        }
    };
    match (node, label) {
        (Node::Receiver(j), SubspaceLabel::CBar) => {
            entries = message_alpha(k, n, j, false);
            let hi = if params.is_clean(j) { sn } else { tn };
            for antenna in 0..params.q {
                for tx in 0..k {
                    entries.push((LinkId::TxToIr { antenna, tx }, ExpRange::upto(hi)));
                }
            }
        }
        (Node::Receiver(j), SubspaceLabel::CTilde) => {
            entries = message_alpha(k, n, j, true);
            tilde_tail(&mut entries, &|_, _| ExpRange::upto(sn));
        }
        (Node::Receiver(j), SubspaceLabel::ABar) => {
            entries = widened_alpha(k, n, j, false);
            for antenna in 0..params.q {
                for tx in 0..k {
                    entries.push((LinkId::TxToIr { antenna, tx }, ExpRange::upto(big)));
                }
            }
        }
        (Node::Receiver(j), SubspaceLabel::ATilde) => {
            entries = widened_alpha(k, n, j, true);
            tilde_tail(&mut entries, &|_, _| ExpRange::upto(sn));
        }
        (Node::Antenna(q), SubspaceLabel::CTildeIr { tx: own }) => {
            entries = cross_alpha(k, n, true);
            for antenna in 0..params.q {
                let demux = partition.demux_set(antenna);
                for tx in 0..k {
                    if demux.contains(&tx) {
                        entries.push((LinkId::Aux { antenna, tx }, ExpRange::upto(un)));
                        let g = if antenna == q && tx == own { ExpRange::fixed(1) } else { ExpRange::fixed(0) };
                        entries.push((LinkId::TxToIr { antenna, tx }, g));
                    } else {
                        entries.push((LinkId::TxToIr { antenna, tx }, ExpRange::upto(sn)));
                    }
                }
            }
        }
        (Node::Antenna(q), SubspaceLabel::ABarIr) => {
            entries = cross_alpha(k, n, false);
            for antenna in 0..params.q {
                for tx in 0..k {
                    let r = if antenna != q {
                        ExpRange::upto(big)
                    } else if params.is_clean(tx) {
                        ExpRange::upto((sn + 1).max(tn))
                    } else {
                        ExpRange::upto(sn.max(tn + 1))
                    };
                    entries.push((LinkId::TxToIr { antenna, tx }, r));
                }
            }
        }
        (Node::Antenna(q), SubspaceLabel::ATildeIr) => {
            entries = cross_alpha(k, n, true);
            tilde_tail(&mut entries, &|antenna, tx| {
                if antenna == q && params.is_clean(tx) {
                    ExpRange::upto(sn + 1)
                } else {
                    ExpRange::upto(sn)
                }
            });
        }
        _ => {
            return Err(crate::error::Error::InvalidParams(format!("label {label} does not live at {node}")));
        }
    }
    RangeTable::new(entries)
}

fn pow(base: u32, exp: usize) -> BigUint {
    num_traits::pow(BigUint::from(base), exp)
}

/// Closed-form dimension of one subspace.
pub fn dim_formula(node: Node, label: SubspaceLabel, params: &SchemeParams, partition: &Partition) -> BigUint {
    let (k, q, n) = (params.k, params.q, params.n);
    let (sn, tn, un) = (params.s * n, params.t * n, params.upsilon * n);
    let clean = params.clean_count();
    let theta = partition.theta();
    let phi = q * k - theta;
    let cross = pow(n, k * k - k);
    let widened = pow(n, k * k - 2 * k + 1) * pow(n + 1, k - 1);
    let tilde = pow(sn, phi) * pow(un, theta);
    match (node, label) {
        (Node::Receiver(j), SubspaceLabel::CBar) => {
            cross * if params.is_clean(j) { pow(sn, q * k) } else { pow(tn, q * k) }
        }
        (Node::Receiver(_), SubspaceLabel::CTilde) => cross * tilde,
        (Node::Receiver(_), SubspaceLabel::ABar) => widened * pow(sn.max(tn), q * k),
        (Node::Receiver(_), SubspaceLabel::ATilde) => widened * tilde,
        (Node::Antenna(_), SubspaceLabel::CTildeIr { .. }) => cross * tilde,
        (Node::Antenna(_), SubspaceLabel::ABarIr) => {
            cross
                * pow(sn.max(tn), k * (q - 1))
                * pow((sn + 1).max(tn), clean)
                * pow(sn.max(tn + 1), k - clean)
        }
        (Node::Antenna(a), SubspaceLabel::ATildeIr) => {
            let others = clean - partition.demux_set(a).len();
            cross * pow(sn, phi - others) * pow(sn + 1, others) * pow(un, theta)
        }
        _ => BigUint::zero(),
    }
}

/// Dimension budget of the scheme.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TotalDims {
    pub per_receiver: Vec<BigUint>,
    pub per_antenna: Vec<BigUint>,
    /// Symbol-extension length: the largest node total.
    pub t: BigUint,
}

pub fn total_dims(params: &SchemeParams, partition: &Partition) -> TotalDims {
    if params.kind == SchemeKind::Simple {
        let one = BigUint::one();
        return TotalDims {
            per_receiver: vec![one.clone(); params.k],
            per_antenna: vec![one.clone(); params.q],
            t: one,
        };
    }
    let mut per_receiver = vec![BigUint::zero(); params.k];
    let mut per_antenna = vec![BigUint::zero(); params.q];
    for (node, label) in subspace_labels(params, partition) {
        let d = dim_formula(node, label, params, partition);
        match node {
            Node::Receiver(j) => per_receiver[j] += d,
            Node::Antenna(a) => per_antenna[a] += d,
        }
    }
    let t = per_receiver.iter().chain(&per_antenna).max().cloned().unwrap_or_default();
    TotalDims { per_receiver, per_antenna, t }
}

/// Spanning set of one subspace.
#[derive(Clone, Debug)]
pub struct SubspaceBasis<S: Scalar = Complex64> {
    pub node: Node,
    pub label: SubspaceLabel,
    pub table: RangeTable,
    pub columns: Vec<ExtendedVector<S>>,
}

pub fn build_subspaces<S: Scalar>(
    bank: &LinkBank<'_, S>,
    params: &SchemeParams,
    partition: &Partition,
) -> Result<Vec<SubspaceBasis<S>>> {
    subspace_labels(params, partition)
        .into_iter()
        .map(|(node, label)| {
            let table = range_table(node, label, params, partition)?;
            let columns = evaluate_table(&table, bank)?.into_iter().map(|(_, c)| c).collect();
            Ok(SubspaceBasis { node, label, table, columns })
        })
        .collect()
}

/// Rank decisions for a set of columns.
pub trait RankOracle<S: Scalar> {
    /// Rank and decision margin (infinite for exact arithmetic).
    fn rank(&self, columns: &[&ExtendedVector<S>]) -> (usize, f64);
    fn name(&self) -> &'static str;
}

/// Singular-value rank of unit-normalized columns.
#[derive(Clone, Copy, Debug)]
pub struct FloatRank {
    pub rel_tol: f64,
}

impl Default for FloatRank {
    fn default() -> Self {
        FloatRank { rel_tol: RANK_TOL }
    }
}

pub fn column_matrix(columns: &[&ExtendedVector<Complex64>], normalize: bool) -> DMatrix<Complex64> {
    let rows = columns.first().map_or(0, |c| c.len());
    let mut m = DMatrix::from_fn(rows, columns.len(), |r, c| columns[c][r]);
    if normalize {
        normalize_columns(&mut m);
    }
    m
}

impl RankOracle<Complex64> for FloatRank {
    fn rank(&self, columns: &[&ExtendedVector<Complex64>]) -> (usize, f64) {
        let info = rank_info(&column_matrix(columns, true), self.rel_tol);
        (info.rank, info.margin())
    }
    fn name(&self) -> &'static str {
        "float"
    }
}

/// Fraction-free exact rank.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExactRank;

impl RankOracle<ExactComplex> for ExactRank {
    fn rank(&self, columns: &[&ExtendedVector<ExactComplex>]) -> (usize, f64) {
        let owned: Vec<Vec<ExactComplex>> = columns.iter().map(|c| (*c).clone()).collect();
        (exact_rank(&owned), f64::INFINITY)
    }
    fn name(&self) -> &'static str {
        "exact"
    }
}

/// Margins below this factor are reported as marginal.
pub const MARGINAL_FACTOR: f64 = 10.0;

fn finite(m: f64) -> Option<f64> {
    m.is_finite().then_some(m)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LabelEntry {
    pub dim_formula: String,
    pub dim_enumerated: u64,
    pub rank: usize,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckEntry {
    /// `interference` (must lie inside the aligned space) or `message` (must equal its label).
    pub kind: String,
    pub signal: String,
    pub host: String,
    pub ok: bool,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NodeReport {
    pub labels: BTreeMap<String, LabelEntry>,
    pub total_formula: String,
    pub stacked_rank: usize,
    pub stacked_cols: usize,
    pub independent: bool,
    pub margin: Option<f64>,
    pub checks: Vec<CheckEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubspaceReport {
    pub arithmetic: String,
    pub slots: usize,
    pub nodes: BTreeMap<String, NodeReport>,
    pub dims_match: bool,
    pub all_contained: bool,
    pub all_independent: bool,
    /// Checks whose margin fell below the marginal factor.
    pub marginal: Vec<String>,
    /// Structural degeneracies of the channel (zero entries, unit or repeated links).
    pub degenerate: Vec<String>,
}

impl SubspaceReport {
    pub fn passed(&self) -> bool {
        self.dims_match && self.all_contained && self.all_independent
    }
}

/// Signals arriving at a node, as effective column sets.
pub struct Arrivals<S: Scalar> {
    pub node: Node,
    /// `(description, columns, host label, kind)`.
    pub items: Vec<(String, Vec<ExtendedVector<S>>, SubspaceLabel, &'static str)>,
}

fn scale_columns<S: Scalar>(link: &[S], cols: &[ExtendedVector<S>]) -> Vec<ExtendedVector<S>> {
    cols.iter().map(|c| c.iter().zip(link).map(|(x, h)| x.clone() * h.clone()).collect()).collect()
}

/// Effective spans of every stream at every node, paired with the subspace that must hold them.
///
/// `bar` and `tilde` are the (possibly normalized) beamformer columns per transmitter.
pub fn arrivals<S: Scalar>(
    bank: &LinkBank<'_, S>,
    params: &SchemeParams,
    partition: &Partition,
    bar: &[Vec<ExtendedVector<S>>],
    tilde: &BTreeMap<usize, Vec<ExtendedVector<S>>>,
) -> Result<Vec<Arrivals<S>>> {
    let k = params.k;
    let mut out = Vec::new();
    for j in 0..k {
        let mut items = Vec::new();
        for i in 0..k {
            let h = &bank.link(LinkId::Direct { tx: i, rx: j })?.diag;
            let host = if i == j { SubspaceLabel::CBar } else { SubspaceLabel::ABar };
            let kind = if i == j { "message" } else { "interference" };
            items.push((format!("H[{j},{i}] V_bar[{i}]"), scale_columns(h, &bar[i]), host, kind));
        }
        for (&i, cols) in tilde {
            if params.is_clean(j) {
                if i == j {
                    let h = &bank.link(LinkId::Direct { tx: j, rx: j })?.diag;
                    items.push((format!("H[{j},{j}] V_tilde[{j}]"), scale_columns(h, cols), SubspaceLabel::CTilde, "message"));
                }
            } else {
                let h = &bank.link(LinkId::Equivalent { tx: i, rx: j })?.diag;
                items.push((format!("Heq[{j},{i}] V_tilde[{i}]"), scale_columns(h, cols), SubspaceLabel::ATilde, "interference"));
            }
        }
        out.push(Arrivals { node: Node::Receiver(j), items });
    }
    for q in 0..params.q {
        let mut items = Vec::new();
        let demux = partition.demux_set(q);
        for i in 0..k {
            let h = &bank.link(LinkId::TxToIr { antenna: q, tx: i })?.diag;
            items.push((format!("H_TIR[{q},{i}] V_bar[{i}]"), scale_columns(h, &bar[i]), SubspaceLabel::ABarIr, "interference"));
        }
        for (&i, cols) in tilde {
            let h = &bank.link(LinkId::TxToIr { antenna: q, tx: i })?.diag;
            if demux.contains(&i) {
                items.push((format!("H_TIR[{q},{i}] V_tilde[{i}]"), scale_columns(h, cols), SubspaceLabel::CTildeIr { tx: i }, "message"));
            } else if !(params.kind == SchemeKind::CirT2 && q == 0) {
                items.push((format!("H_TIR[{q},{i}] V_tilde[{i}]"), scale_columns(h, cols), SubspaceLabel::ATildeIr, "interference"));
            }
        }
        out.push(Arrivals { node: Node::Antenna(q), items });
    }
    Ok(out)
}

/// Zero entries, all-unit links and repeated links break the genericity the alignment relies on.
pub fn degeneracies<S: Scalar>(channel: &ChannelRealization<S>) -> Vec<String> {
    let links = channel.all_links();
    let mut out = Vec::new();
    for (name, link) in &links {
        if link.diag.iter().any(|h| h.is_zero()) {
            out.push(format!("{name} has a zero coefficient"));
        }
        if link.diag.iter().all(|h| h.is_one()) {
            out.push(format!("{name} is all ones"));
        }
    }
    for a in 0..links.len() {
        for b in a + 1..links.len() {
            if links[a].1 == links[b].1 {
                out.push(format!("{} repeats {}", links[b].0, links[a].0));
            }
        }
    }
    out
}

/// Check dimensions, containment and independence at every node.
pub fn verify<S: Scalar, O: RankOracle<S>>(
    bases: &[SubspaceBasis<S>],
    arrivals: &[Arrivals<S>],
    params: &SchemeParams,
    partition: &Partition,
    oracle: &O,
    degenerate: Vec<String>,
) -> SubspaceReport {
    let slots = bases.first().and_then(|b| b.columns.first()).map_or(0, Vec::len);
    let mut nodes = BTreeMap::new();
    let mut marginal = Vec::new();
    let (mut dims_match, mut all_contained, mut all_independent) = (true, true, true);
    let dims = total_dims(params, partition);
    let mut flag = |what: String, margin: f64| {
        if margin < MARGINAL_FACTOR {
            marginal.push(what);
        }
    };
    let node_list: Vec<Node> = {
        let mut v: Vec<Node> = bases.iter().map(|b| b.node).collect();
        v.dedup();
        v
    };
    for node in node_list {
        let here: Vec<&SubspaceBasis<S>> = bases.iter().filter(|b| b.node == node).collect();
        let mut labels = BTreeMap::new();
        let mut host_rank: BTreeMap<SubspaceLabel, (usize, f64)> = BTreeMap::new();
        for b in &here {
            let formula = dim_formula(node, b.label, params, partition);
            let enumerated = b.columns.len() as u64;
            dims_match &= formula == BigUint::from(enumerated) && b.table.count() == formula;
            let refs: Vec<&ExtendedVector<S>> = b.columns.iter().collect();
            let (rank, margin) = oracle.rank(&refs);
            host_rank.insert(b.label, (rank, margin));
            labels.insert(
                b.label.to_string(),
                LabelEntry { dim_formula: formula.to_string(), dim_enumerated: enumerated, rank, margin: finite(margin) },
            );
        }
        let stacked: Vec<&ExtendedVector<S>> = here.iter().flat_map(|b| b.columns.iter()).collect();
        let (stacked_rank, stacked_margin) = oracle.rank(&stacked);
        let independent = stacked_rank == stacked.len();
        all_independent &= independent;
        flag(format!("{node} independence"), stacked_margin);
        let mut checks = Vec::new();
        if let Some(arr) = arrivals.iter().find(|a| a.node == node) {
            for (what, cols, host, kind) in &arr.items {
                let Some(hb) = here.iter().find(|b| b.label == *host) else {
                    continue;
                };
                let (hr, hm) = host_rank[host];
                let joint: Vec<&ExtendedVector<S>> = hb.columns.iter().chain(cols.iter()).collect();
                let (jr, jm) = oracle.rank(&joint);
                let mut ok = jr == hr;
                let mut margin = hm.min(jm);
                if *kind == "message" {
                    let refs: Vec<&ExtendedVector<S>> = cols.iter().collect();
                    let (sr, sm) = oracle.rank(&refs);
                    ok &= sr == hr;
                    margin = margin.min(sm);
                }
                all_contained &= ok;
                flag(format!("{node} {what} in {host}"), margin);
                checks.push(CheckEntry {
                    kind: kind.to_string(),
                    signal: what.clone(),
                    host: host.to_string(),
                    ok,
                    margin: finite(margin),
                });
            }
        }
        let total = match node {
            Node::Receiver(j) => dims.per_receiver[j].clone(),
            Node::Antenna(q) => dims.per_antenna[q].clone(),
        };
        nodes.insert(
            node.to_string(),
            NodeReport {
                labels,
                total_formula: total.to_string(),
                stacked_rank,
                stacked_cols: stacked.len(),
                independent,
                margin: finite(stacked_margin),
                checks,
            },
        );
    }
    SubspaceReport {
        arithmetic: oracle.name().to_string(),
        slots,
        nodes,
        dims_match,
        all_contained,
        all_independent,
        marginal,
        degenerate,
    }
}

/// Dimension of a label as a machine integer, if it fits.
pub fn dim_u64(node: Node, label: SubspaceLabel, params: &SchemeParams, partition: &Partition) -> Option<u64> {
    dim_formula(node, label, params, partition).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims_of(params: &SchemeParams) -> (Partition, TotalDims) {
        let part = Partition::for_params(params).unwrap();
        let d = total_dims(params, &part);
        (part, d)
    }

    fn u(v: &BigUint) -> u64 {
        v.to_u64().unwrap()
    }

    #[test]
    fn reference_dimensions() {
        let p = SchemeParams::cir(3, 2, 2);
        let (part, d) = dims_of(&p);
        let get = |node, label| u(&dim_formula(node, label, &p, &part));
        assert_eq!(get(Node::Receiver(0), SubspaceLabel::CBar), 1);
        assert_eq!(get(Node::Receiver(0), SubspaceLabel::CTilde), 1);
        assert_eq!(get(Node::Receiver(0), SubspaceLabel::ABar), 4);
        assert_eq!(get(Node::Receiver(2), SubspaceLabel::CBar), 1);
        assert_eq!(get(Node::Receiver(2), SubspaceLabel::ABar), 4);
        assert_eq!(get(Node::Receiver(2), SubspaceLabel::ATilde), 4);
        assert_eq!(get(Node::Antenna(0), SubspaceLabel::CTildeIr { tx: 0 }), 1);
        assert_eq!(get(Node::Antenna(0), SubspaceLabel::ABarIr), 8);
        assert_eq!(get(Node::Antenna(0), SubspaceLabel::ATildeIr), 2);
        assert_eq!(d.per_receiver.iter().map(u).collect::<Vec<_>>(), vec![6, 6, 9]);
        assert_eq!(d.per_antenna.iter().map(u).collect::<Vec<_>>(), vec![11, 11]);
        assert_eq!(u(&d.t), 11);
    }

    #[test]
    fn other_configurations() {
        let t = |p: SchemeParams| u(&dims_of(&p).1.t);
        assert_eq!(t(SchemeParams::cir(3, 3, 3)), 13);
        assert_eq!(t(SchemeParams::cir(4, 3, 2)), 21);
        assert_eq!(t(SchemeParams::cir(3, 2, 1).with_extension(1, 2, 2, 1)), 48);
        assert_eq!(t(SchemeParams::ncir(3, 2, 1).with_extension(1, 2, 2, 1)), 336);
        let (_, d) = dims_of(&SchemeParams::cir_t2(4, 3, 2));
        assert_eq!(u(&d.per_antenna[0]), 18);
        assert_eq!(u(&d.per_antenna[1]), 21);
    }

    #[test]
    fn tables_enumerate_formula_dims() {
        let configs = [
            SchemeParams::cir(3, 2, 2),
            SchemeParams::cir(3, 2, 2).with_extension(2, 1, 1, 1),
            SchemeParams::cir(4, 3, 2).with_extension(1, 2, 3, 1),
            SchemeParams::cir(3, 2, 1).with_extension(1, 2, 2, 1),
            SchemeParams::cir_t2(4, 3, 2),
            SchemeParams::ncir(3, 2, 1).with_extension(1, 2, 2, 1),
            SchemeParams::ncir(5, 3, 2).with_extension(1, 1, 2, 1),
        ];
        for p in &configs {
            let part = Partition::for_params(p).unwrap();
            for (node, label) in subspace_labels(p, &part) {
                let table = range_table(node, label, p, &part).unwrap();
                assert_eq!(table.count(), dim_formula(node, label, p, &part), "{node} {label} {p:?}");
            }
        }
    }

    #[test]
    fn all_ones_and_repeats_are_degenerate() {
        use crate::model::{gen_channel, DiagonalLink};
        let p = SchemeParams::cir(3, 2, 2);
        let mut ch = gen_channel(&p, 3, 1).unwrap();
        assert!(degeneracies(&ch).is_empty());
        *ch.direct_mut(0, 1) = DiagonalLink::ones(3);
        *ch.direct_mut(2, 1) = ch.direct(1, 2).clone();
        let d = degeneracies(&ch);
        assert_eq!(d.len(), 2, "{d:?}");
    }
}
