//! End-to-end scheme construction: channel, relay inverse, equivalent channel, beamformers,
//! subspaces, relay demultiplexers and receiver zero-forcing, followed by verification.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rand::Rng;
use serde::Serialize;

use crate::beamform::{build_beamformer, Family};
use crate::dof::{breakdown, check_feasibility, DofBreakdown, Feasibility};
use crate::error::{Error, Result};
use crate::linalg::{hstack, left_inverse, RANK_TOL};
use crate::model::{gen_channel, substream, Stream, ChannelRealization, DiagonalLink, ExactComplex, ExtendedVector, SchemeKind, SchemeParams};
use crate::monomial::LinkBank;
use crate::partition::Partition;
use crate::relay::{apply_diag, compute_h_inv, relay_forward, equivalent_channel, slot_conditions, DemuxProjector, RelayPlan};
use crate::subspace::{
    arrivals, build_subspaces, column_matrix, degeneracies, total_dims, verify, ExactRank, FloatRank, Node,
    SubspaceBasis, SubspaceLabel, SubspaceReport, TotalDims,
};

/// Realizations whose per-slot relay systems exceed this condition number are flagged.
pub const ILL_CONDITIONED: f64 = 1e12;

/// Largest extension length the builder accepts.
pub const MAX_SLOTS: usize = 4096;

/// Exact re-checks are attempted only up to this extension length.
pub const EXACT_SLOT_LIMIT: usize = 32;

/// Zero-forcing rows for a receiver's own streams, bar first then tilde.
#[derive(Clone, Debug)]
pub struct ReceiverProjector {
    pub rx: usize,
    pub bar_width: usize,
    pub tilde_width: usize,
    pub rows: DMatrix<Complex64>,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub params: SchemeParams,
    pub partition: Partition,
    pub dims: TotalDims,
    pub slots: usize,
    pub seed: u64,
    pub channel: ChannelRealization,
    pub equivalent: BTreeMap<(usize, usize), DiagonalLink>,
    pub plan: RelayPlan,
    /// Unit-column bar beamformers per transmitter.
    pub bar: Vec<DMatrix<Complex64>>,
    /// Unit-column tilde beamformers per clean transmitter.
    pub tilde: BTreeMap<usize, DMatrix<Complex64>>,
    pub subspaces: Vec<SubspaceBasis>,
    pub receivers: Vec<ReceiverProjector>,
}

fn columns_of(m: &DMatrix<Complex64>) -> Vec<ExtendedVector> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

fn basis_matrix(bases: &[SubspaceBasis], node: Node, label: SubspaceLabel) -> Option<DMatrix<Complex64>> {
    bases
        .iter()
        .find(|b| b.node == node && b.label == label)
        .map(|b| column_matrix(&b.columns.iter().collect::<Vec<_>>(), true))
}

/// Alignment schemes need at least half the receivers clean.
fn check_buildable(params: &SchemeParams) -> Result<()> {
    params.validate()?;
    if params.kind == SchemeKind::Simple {
        return Err(Error::NotApplicable("use the single-slot builder for the simple scheme".into()));
    }
    if 2 * params.clean_count() < params.k {
        return Err(Error::NotApplicable(format!(
            "{} clean receivers out of K = {}: the optimal ratio is unbounded and the scheme \
             reduces to relay-free alignment",
            params.clean_count(),
            params.k
        )));
    }
    Ok(())
}

impl Construction {
    /// Build with the channel drawn from `seed`.
    pub fn build(params: &SchemeParams, seed: u64) -> Result<Construction> {
        check_buildable(params)?;
        let partition = Partition::for_params(params)?;
        let dims = total_dims(params, &partition);
        let slots = dims.t.to_usize().filter(|&t| t <= MAX_SLOTS).ok_or_else(|| {
            Error::InvalidParams(format!("extension length {} exceeds {MAX_SLOTS}", dims.t))
        })?;
        let channel = gen_channel(params, slots, seed)?;
        Self::from_channel(params, channel, seed)
    }

    /// Build on a given realization, which must have `T` slots.
    pub fn from_channel(params: &SchemeParams, channel: ChannelRealization, seed: u64) -> Result<Construction> {
        check_buildable(params)?;
        let partition = Partition::for_params(params)?;
        let dims = total_dims(params, &partition);
        let slots = channel.slots();
        if dims.t.to_usize() != Some(slots) {
            return Err(Error::LengthMismatch { expected: dims.t.to_usize().unwrap_or(usize::MAX), got: slots });
        }
        let h_inv = compute_h_inv(&channel, params, &partition)?;
        let slot_condition = slot_conditions(&channel, params, &partition);
        let equivalent = equivalent_channel(&channel, &h_inv, params, &partition);
        let bank = LinkBank::new(&channel, &equivalent);
        let mut bar = Vec::with_capacity(params.k);
        let mut tilde = BTreeMap::new();
        for i in 0..params.k {
            bar.push(build_beamformer(Family::Bar, i, &bank, params, &partition)?.matrix(true));
            if params.is_clean(i) {
                tilde.insert(i, build_beamformer(Family::Tilde, i, &bank, params, &partition)?.matrix(true));
            }
        }
        let subspaces = build_subspaces(&bank, params, &partition)?;

        let mut demux = Vec::with_capacity(params.q);
        for q in 0..params.q {
            let node = Node::Antenna(q);
            let desired: Vec<(usize, DMatrix<Complex64>)> = partition
                .demux_set(q)
                .iter()
                .map(|&i| (i, apply_diag(channel.tx_to_ir(q, i), &tilde[&i])))
                .collect();
            let mut interference = vec![basis_matrix(&subspaces, node, SubspaceLabel::ABarIr).expect("bar space")];
            let sequential = params.kind == SchemeKind::CirT2 && q == 0;
            let subtract_first = if sequential {
                tilde.keys().copied().filter(|i| !partition.demux_set(0).contains(i)).collect()
            } else {
                interference.extend(basis_matrix(&subspaces, node, SubspaceLabel::ATildeIr));
                Vec::new()
            };
            let refs: Vec<&DMatrix<Complex64>> = interference.iter().collect();
            demux.push(DemuxProjector::new(q, &desired, &refs, subtract_first)?);
        }

        let mut receivers = Vec::with_capacity(params.k);
        for j in 0..params.k {
            let node = Node::Receiver(j);
            let hjj = channel.direct(j, j);
            let own_bar = apply_diag(hjj, &bar[j]);
            let mut blocks = vec![own_bar];
            let tilde_width = match tilde.get(&j) {
                Some(v) => {
                    blocks.push(apply_diag(hjj, v));
                    v.ncols()
                }
                None => 0,
            };
            let own_cols: usize = blocks.iter().map(|b| b.ncols()).sum();
            blocks.extend(basis_matrix(&subspaces, node, SubspaceLabel::ABar));
            blocks.extend(basis_matrix(&subspaces, node, SubspaceLabel::ATilde));
            let refs: Vec<&DMatrix<Complex64>> = blocks.iter().collect();
            let stacked = hstack(&refs);
            let inv = left_inverse(&stacked, RANK_TOL).ok_or_else(|| Error::RankDeficient {
                node: node.to_string(),
                rank: crate::linalg::numerical_rank(&stacked, RANK_TOL),
                cols: stacked.ncols(),
            })?;
            receivers.push(ReceiverProjector {
                rx: j,
                bar_width: bar[j].ncols(),
                tilde_width,
                rows: inv.rows(0, own_cols).into_owned(),
            });
        }

        Ok(Construction {
            params: params.clone(),
            partition: partition.clone(),
            dims,
            slots,
            seed,
            plan: RelayPlan { kind: params.kind, partition, h_inv, slot_condition, demux },
            channel,
            equivalent,
            bar,
            tilde,
            subspaces,
            receivers,
        })
    }

    /// Rebuild with successive seeds until the relay systems are well conditioned.
    pub fn build_well_conditioned(params: &SchemeParams, seed: u64, attempts: u64) -> Result<Construction> {
        let mut last = None;
        for k in 0..attempts.max(1) {
            match Self::build(params, seed.wrapping_add(k)) {
                Ok(c) if !c.ill_conditioned() => return Ok(c),
                Ok(c) => last = Some(Ok(c)),
                Err(e @ (Error::SingularSlot { .. } | Error::RankDeficient { .. })) => last = Some(Err(e)),
                Err(e) => return Err(e),
            }
        }
        last.expect("at least one attempt")
    }

    pub fn ill_conditioned(&self) -> bool {
        self.plan.max_condition() > ILL_CONDITIONED
    }

    /// Streams per receiver: `(bar, tilde)`.
    pub fn stream_counts(&self) -> Vec<(usize, usize)> {
        self.receivers.iter().map(|r| (r.bar_width, r.tilde_width)).collect()
    }

    /// Floating-point verification on this realization.
    pub fn verify_float(&self) -> Result<SubspaceReport> {
        let bank = LinkBank::new(&self.channel, &self.equivalent);
        let bar: Vec<Vec<ExtendedVector>> = self.bar.iter().map(columns_of).collect();
        let tilde: BTreeMap<usize, Vec<ExtendedVector>> = self.tilde.iter().map(|(i, m)| (*i, columns_of(m))).collect();
        let arr = arrivals(&bank, &self.params, &self.partition, &bar, &tilde)?;
        Ok(verify(&self.subspaces, &arr, &self.params, &self.partition, &FloatRank::default(), degeneracies(&self.channel)))
    }

    /// Exact verification on the same realization, converted losslessly to rationals.
    pub fn verify_exact(&self) -> Result<SubspaceReport> {
        verify_exact(&self.params, &self.channel.to_exact())
    }

    /// Floating verification, re-checked exactly when marginal (or always, if `force_exact`).
    pub fn verify(&self, force_exact: bool) -> Result<VerificationSummary> {
        let float = self.verify_float()?;
        let want_exact = force_exact || (!float.marginal.is_empty() && self.slots <= EXACT_SLOT_LIMIT);
        let exact = if want_exact { Some(self.verify_exact()?) } else { None };
        let agreement = exact.as_ref().map(|e| same_decisions(&float, e));
        // Exact decisions are authoritative whenever they were computed.
        let passed = exact.as_ref().map_or(float.passed(), SubspaceReport::passed);
        Ok(VerificationSummary {
            passed,
            marginal_unresolved: !float.marginal.is_empty() && exact.is_none(),
            float,
            exact,
            agreement,
        })
    }

    /// Noiseless probe with random unit-modulus symbols on every stream.
    pub fn probe(&self, symbols: usize, seed: u64) -> Probe {
        let mut rng = substream(seed, Stream::Data, 0);
        let mut draw = |rows: usize| {
            DMatrix::from_fn(rows, symbols, |_, _| Complex64::from_polar(1.0, rng.random::<f64>() * std::f64::consts::TAU))
        };
        let bar_symbols: Vec<DMatrix<Complex64>> = self.bar.iter().map(|v| draw(v.ncols())).collect();
        let tilde_symbols: BTreeMap<usize, DMatrix<Complex64>> =
            self.tilde.iter().map(|(&i, v)| (i, draw(v.ncols()))).collect();
        let tilde_tx: BTreeMap<usize, DMatrix<Complex64>> =
            tilde_symbols.iter().map(|(i, x)| (*i, &self.tilde[i] * x)).collect();
        let tx: Vec<DMatrix<Complex64>> = (0..self.params.k)
            .map(|i| {
                let mut x = &self.bar[i] * &bar_symbols[i];
                if let Some(s) = tilde_tx.get(&i) {
                    x += s;
                }
                x
            })
            .collect();
        let relay_in = (0..self.params.q)
            .map(|q| {
                let mut y = DMatrix::zeros(self.slots, symbols);
                for (i, x) in tx.iter().enumerate() {
                    y += apply_diag(self.channel.tx_to_ir(q, i), x);
                }
                y
            })
            .collect();
        Probe { tilde_symbols, tilde_tx, tx, relay_in }
    }

    /// Tilde interference remaining at each clean receiver after the relay adds its signal,
    /// relative to the interference before cancellation.
    pub fn cancellation_residual(&self, symbols: usize, seed: u64) -> Vec<f64> {
        let probe = self.probe(symbols, seed);
        let out = relay_forward(&self.plan, &self.channel, &self.params, &self.tilde, &probe.relay_in);
        (0..self.params.clean_count())
            .map(|j| {
                let mut before = DMatrix::zeros(self.slots, symbols);
                for (&i, s) in probe.tilde_tx.iter().filter(|(&i, _)| i != j) {
                    before += apply_diag(self.channel.direct(j, i), s);
                }
                let mut after = before.clone();
                for (u, x) in out.iter().enumerate() {
                    after += apply_diag(self.channel.ir_to_rx(j, u), x);
                }
                after.norm_squared() / before.norm_squared().max(f64::MIN_POSITIVE)
            })
            .collect()
    }

    /// Full JSON-serializable report.
    pub fn report(&self, force_exact: bool) -> Result<ConstructionReport> {
        let verification = self.verify(force_exact)?;
        Ok(ConstructionReport {
            params: self.params.clone(),
            partition: self.partition.clone(),
            slots: self.slots,
            seed: self.seed,
            feasibility: check_feasibility(&self.params)?,
            breakdown: breakdown(&self.params, &self.partition)?,
            max_slot_condition: self.plan.max_condition(),
            ill_conditioned: self.ill_conditioned(),
            verification,
        })
    }
}

/// Whether two reports reach the same rank decisions everywhere.
pub fn same_decisions(a: &SubspaceReport, b: &SubspaceReport) -> bool {
    a.dims_match == b.dims_match
        && a.all_contained == b.all_contained
        && a.all_independent == b.all_independent
        && a.nodes.len() == b.nodes.len()
        && a.nodes.iter().zip(&b.nodes).all(|((ka, na), (kb, nb))| {
            ka == kb
                && na.stacked_rank == nb.stacked_rank
                && na.labels.iter().zip(&nb.labels).all(|(x, y)| x.1.rank == y.1.rank)
                && na.checks.iter().zip(&nb.checks).all(|(x, y)| x.ok == y.ok)
        })
}

/// Exact construction and verification for a rational realization.
pub fn verify_exact(params: &SchemeParams, channel: &ChannelRealization<ExactComplex>) -> Result<SubspaceReport> {
    check_buildable(params)?;
    let partition = Partition::for_params(params)?;
    let h_inv = compute_h_inv(channel, params, &partition)?;
    let equivalent = equivalent_channel(channel, &h_inv, params, &partition);
    let bank = LinkBank::new(channel, &equivalent);
    let raw = |family, i| -> Result<Vec<ExtendedVector<ExactComplex>>> {
        Ok(build_beamformer(family, i, &bank, params, &partition)?.columns.into_iter().map(|(_, c)| c).collect())
    };
    let mut bar = Vec::with_capacity(params.k);
    let mut tilde = BTreeMap::new();
    for i in 0..params.k {
        bar.push(raw(Family::Bar, i)?);
        if params.is_clean(i) {
            tilde.insert(i, raw(Family::Tilde, i)?);
        }
    }
    let bases = build_subspaces(&bank, params, &partition)?;
    let arr = arrivals(&bank, params, &partition, &bar, &tilde)?;
    Ok(verify(&bases, &arr, params, &partition, &ExactRank, degeneracies(channel)))
}

/// Noiseless signals for one block of random symbols.
#[derive(Clone, Debug)]
pub struct Probe {
    /// Tilde symbols per clean transmitter, `d_i x M`.
    pub tilde_symbols: BTreeMap<usize, DMatrix<Complex64>>,
    /// Tilde part of each clean transmitter's signal, `T x M`.
    pub tilde_tx: BTreeMap<usize, DMatrix<Complex64>>,
    /// Full transmitted blocks.
    pub tx: Vec<DMatrix<Complex64>>,
    /// Received blocks per relay receive antenna.
    pub relay_in: Vec<DMatrix<Complex64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationSummary {
    pub passed: bool,
    /// Marginal floating decisions that could not be re-checked exactly.
    pub marginal_unresolved: bool,
    pub float: SubspaceReport,
    pub exact: Option<SubspaceReport>,
    pub agreement: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstructionReport {
    pub params: SchemeParams,
    pub partition: Partition,
    pub slots: usize,
    pub seed: u64,
    pub feasibility: Feasibility,
    pub breakdown: DofBreakdown,
    pub max_slot_condition: f64,
    pub ill_conditioned: bool,
    pub verification: VerificationSummary,
}

/// Exact realization with every coefficient a short dyadic rational.
pub fn dyadic_channel(params: &SchemeParams, slots: usize, seed: u64, bits: u32) -> Result<ChannelRealization> {
    let p = params.clone().with_distribution(crate::model::ChannelDistribution::QuantizedGaussian { bits });
    gen_channel(&p, slots, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_builds_and_verifies() {
        let p = SchemeParams::cir(3, 2, 2);
        let c = Construction::build(&p, 1).unwrap();
        assert_eq!(c.slots, 11);
        assert_eq!(c.stream_counts(), vec![(1, 1), (1, 1), (1, 0)]);
        let r = c.verify_float().unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn refuses_mostly_dirty_layouts() {
        assert!(matches!(Construction::build(&SchemeParams::cir(5, 2, 2), 0), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn exact_matches_float_on_reference() {
        let p = SchemeParams::cir(3, 2, 2);
        let c = Construction::build(&p, 3).unwrap();
        let f = c.verify_float().unwrap();
        let e = c.verify_exact().unwrap();
        assert!(e.passed());
        assert!(same_decisions(&f, &e));
    }
}
