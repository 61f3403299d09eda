//! Instantaneous-relay processing: the per-slot inverse of the relay-to-clean-receiver
//! system, the equivalent channel at dirty receivers, zero-forcing demultiplexing of tilde
//! streams at each receive antenna, and interference cancellation.
//!
//! Relay outputs are linear in the received signal; signals are `T x M` matrices holding
//! `M` extended symbols side by side.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{condition_number, invert_small, left_inverse, RANK_TOL};
use crate::model::{ChannelRealization, DiagonalLink, Scalar, SchemeKind, SchemeParams};
use crate::partition::Partition;

/// Antennas used by each cancellation group: all of `0..W` for a coordinated relay, `F_l` otherwise.
fn cancellation_groups(params: &SchemeParams, partition: &Partition) -> Vec<Vec<usize>> {
    match partition {
        Partition::NonCoordinated { f, .. } => f.clone(),
        _ => vec![(0..params.w).collect()],
    }
}

/// `H_inv[(j, u)]`: per slot, the inverse of the clean-receiver block of the relay-to-receiver
/// channel, so that `sum_u H_IRR[j, u] H_inv[(d, u)] = delta_{jd}` within each group.
pub fn compute_h_inv<S: Scalar>(
    channel: &ChannelRealization<S>,
    params: &SchemeParams,
    partition: &Partition,
) -> Result<BTreeMap<(usize, usize), DiagonalLink<S>>> {
    let clean = params.clean_count();
    let slots = channel.slots();
    let mut out = BTreeMap::new();
    for (group, antennas) in cancellation_groups(params, partition).iter().enumerate() {
        if antennas.len() != clean {
            return Err(Error::InvalidParams(format!(
                "group {group} has {} antennas for {clean} clean receivers",
                antennas.len()
            )));
        }
        let mut diags: Vec<Vec<S>> = vec![Vec::with_capacity(slots); clean * clean];
        for slot in 0..slots {
            let g: Vec<Vec<S>> = (0..clean)
                .map(|j| antennas.iter().map(|&u| channel.ir_to_rx(j, u).diag[slot].clone()).collect())
                .collect();
            let inv = invert_small(&g).ok_or(Error::SingularSlot { slot, group })?;
            for j in 0..clean {
                for a in 0..clean {
                    diags[j * clean + a].push(inv[a][j].clone());
                }
            }
        }
        for j in 0..clean {
            for (a, &u) in antennas.iter().enumerate() {
                out.insert((j, u), DiagonalLink::new(std::mem::take(&mut diags[j * clean + a])));
            }
        }
    }
    Ok(out)
}

/// Worst per-slot condition number of the systems inverted by [`compute_h_inv`].
pub fn slot_conditions(channel: &ChannelRealization, params: &SchemeParams, partition: &Partition) -> Vec<f64> {
    let clean = params.clean_count();
    let groups = cancellation_groups(params, partition);
    (0..channel.slots())
        .map(|slot| {
            groups
                .iter()
                .map(|antennas| {
                    let g = DMatrix::from_fn(clean, antennas.len(), |j, a| channel.ir_to_rx(j, antennas[a]).diag[slot]);
                    condition_number(&g)
                })
                .fold(1.0, f64::max)
        })
        .collect()
}

/// Equivalent links `(dirty rx j, clean tx i)` after the relay's cancellation signal:
/// `H[j,i] - sum_u sum_{d != i} H_IRR[j,u] H_inv[(d,u)] H[d,i]`, with `u` over the antennas
/// that cancel transmitter `i` and `d` over clean receivers.
pub fn equivalent_channel<S: Scalar>(
    channel: &ChannelRealization<S>,
    h_inv: &BTreeMap<(usize, usize), DiagonalLink<S>>,
    params: &SchemeParams,
    partition: &Partition,
) -> BTreeMap<(usize, usize), DiagonalLink<S>> {
    let clean = params.clean_count();
    let slots = channel.slots();
    let mut out = BTreeMap::new();
    for j in clean..params.k {
        for i in 0..clean {
            let antennas = partition.cancelling_antennas(i, params.w);
            let diag = (0..slots)
                .map(|t| {
                    let mut acc = channel.direct(j, i).diag[t].clone();
                    for &u in &antennas {
                        let hr = channel.ir_to_rx(j, u).diag[t].clone();
                        for d in (0..clean).filter(|&d| d != i) {
                            let term = hr.clone() * h_inv[&(d, u)].diag[t].clone() * channel.direct(d, i).diag[t].clone();
                            acc = acc - term;
                        }
                    }
                    acc
                })
                .collect();
            out.insert((j, i), DiagonalLink::new(diag));
        }
    }
    out
}

/// Zero-forcing rows extracting the tilde streams demultiplexed at one receive antenna.
#[derive(Clone, Debug, Serialize)]
pub struct DemuxProjector {
    pub antenna: usize,
    /// `(tx, number of tilde streams)` in row order.
    pub streams: Vec<(usize, usize)>,
    /// Streams removed by successive cancellation before projecting.
    pub subtract_first: Vec<usize>,
    #[serde(skip)]
    pub rows: DMatrix<Complex64>,
}

impl DemuxProjector {
    /// Rows of the left inverse of `[desired | interference...]` that belong to `desired`.
    pub fn new(
        antenna: usize,
        desired: &[(usize, DMatrix<Complex64>)],
        interference: &[&DMatrix<Complex64>],
        subtract_first: Vec<usize>,
    ) -> Result<Self> {
        let mut blocks: Vec<&DMatrix<Complex64>> = desired.iter().map(|(_, m)| m).collect();
        blocks.extend(interference.iter().copied());
        let stacked = crate::linalg::hstack(&blocks);
        let n_desired: usize = desired.iter().map(|(_, m)| m.ncols()).sum();
        let inv = left_inverse(&stacked, RANK_TOL).ok_or_else(|| Error::RankDeficient {
            node: format!("relay antenna {antenna}"),
            rank: crate::linalg::numerical_rank(&stacked, RANK_TOL),
            cols: stacked.ncols(),
        })?;
        Ok(DemuxProjector {
            antenna,
            streams: desired.iter().map(|(i, m)| (*i, m.ncols())).collect(),
            subtract_first,
            rows: inv.rows(0, n_desired).into_owned(),
        })
    }

    /// Split projected rows into per-transmitter estimates.
    fn split(&self, est: &DMatrix<Complex64>) -> Vec<(usize, DMatrix<Complex64>)> {
        let mut at = 0;
        self.streams
            .iter()
            .map(|&(i, w)| {
                let block = est.rows(at, w).into_owned();
                at += w;
                (i, block)
            })
            .collect()
    }
}

/// Apply a diagonal link to every column of a `T x M` block.
pub fn apply_diag(link: &DiagonalLink, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let mut out = x.clone();
    for (r, h) in link.diag.iter().enumerate() {
        for v in out.row_mut(r).iter_mut() {
            *v *= h;
        }
    }
    out
}

/// Estimates of the tilde coefficients (`d_i x M`) seen at one antenna.
pub fn demux_at_antenna(projector: &DemuxProjector, y: &DMatrix<Complex64>) -> Vec<(usize, DMatrix<Complex64>)> {
    projector.split(&(&projector.rows * y))
}

/// Everything the relay needs, fixed for a realization.
#[derive(Clone, Debug, Serialize)]
pub struct RelayPlan {
    pub kind: SchemeKind,
    pub partition: Partition,
    #[serde(skip)]
    pub h_inv: BTreeMap<(usize, usize), DiagonalLink>,
    pub slot_condition: Vec<f64>,
    pub demux: Vec<DemuxProjector>,
}

impl RelayPlan {
    pub fn max_condition(&self) -> f64 {
        self.slot_condition.iter().copied().fold(1.0, f64::max)
    }
}

/// Coordinated cancellation: every transmit antenna combines all demultiplexed streams so
/// that, at each clean receiver `d`, the relay signal equals `-sum_{i != d} H[d,i] s_i`,
/// with `s_i = V~_i x^_i`.
pub fn solve_cancellation_cir(
    plan: &RelayPlan,
    channel: &ChannelRealization,
    params: &SchemeParams,
    tilde_signals: &BTreeMap<usize, DMatrix<Complex64>>,
) -> Vec<DMatrix<Complex64>> {
    let clean = params.clean_count();
    let m = tilde_signals.values().next().map_or(0, |s| s.ncols());
    let slots = channel.slots();
    let rhs: Vec<DMatrix<Complex64>> = (0..clean)
        .map(|d| {
            let mut acc = DMatrix::zeros(slots, m);
            for (&i, s) in tilde_signals {
                if i != d {
                    acc -= apply_diag(channel.direct(d, i), s);
                }
            }
            acc
        })
        .collect();
    (0..params.w)
        .map(|u| {
            let mut x = DMatrix::zeros(slots, m);
            for (d, r) in rhs.iter().enumerate() {
                x += apply_diag(&plan.h_inv[&(d, u)], r);
            }
            x
        })
        .collect()
}

/// Non-coordinated cancellation: antenna `u` in `F_l` uses only the estimates of `E_l` it
/// demultiplexed itself.
pub fn solve_cancellation_ncir(
    plan: &RelayPlan,
    channel: &ChannelRealization,
    params: &SchemeParams,
    per_antenna: &[BTreeMap<usize, DMatrix<Complex64>>],
) -> Vec<DMatrix<Complex64>> {
    let clean = params.clean_count();
    let slots = channel.slots();
    (0..params.w)
        .map(|u| {
            let own = &per_antenna[u];
            let m = own.values().next().map_or(0, |s| s.ncols());
            let mut x = DMatrix::zeros(slots, m);
            for d in 0..clean {
                let mut rhs = DMatrix::zeros(slots, m);
                for (&i, s) in own {
                    if i != d {
                        rhs -= apply_diag(channel.direct(d, i), s);
                    }
                }
                x += apply_diag(&plan.h_inv[&(d, u)], &rhs);
            }
            x
        })
        .collect()
}

/// Sequential demultiplexing: antennas other than 0 run first, then antenna 0 subtracts the
/// reconstructed streams outside its own set and projects.
pub fn theorem2_demux(
    plan: &RelayPlan,
    channel: &ChannelRealization,
    tilde_v: &BTreeMap<usize, DMatrix<Complex64>>,
    y_ir: &[DMatrix<Complex64>],
) -> BTreeMap<usize, DMatrix<Complex64>> {
    let mut est = BTreeMap::new();
    for proj in plan.demux.iter().filter(|p| p.antenna != 0) {
        est.extend(demux_at_antenna(proj, &y_ir[proj.antenna]));
    }
    let first = &plan.demux[0];
    let mut y0 = y_ir[0].clone();
    for &i in &first.subtract_first {
        let s = &tilde_v[&i] * &est[&i];
        y0 -= apply_diag(channel.tx_to_ir(0, i), &s);
    }
    est.extend(demux_at_antenna(first, &y0));
    est
}

/// Map the relay's received blocks (one `T x M` block per receive antenna) to its transmitted
/// blocks (one per transmit antenna). `tilde_v` holds the normalized tilde beamformers.
pub fn relay_forward(
    plan: &RelayPlan,
    channel: &ChannelRealization,
    params: &SchemeParams,
    tilde_v: &BTreeMap<usize, DMatrix<Complex64>>,
    y_ir: &[DMatrix<Complex64>],
) -> Vec<DMatrix<Complex64>> {
    match plan.kind {
        SchemeKind::Ncir => {
            let per_antenna: Vec<BTreeMap<usize, DMatrix<Complex64>>> = plan
                .demux
                .iter()
                .map(|p| {
                    demux_at_antenna(p, &y_ir[p.antenna])
                        .into_iter()
                        .map(|(i, x)| (i, &tilde_v[&i] * x))
                        .collect()
                })
                .collect();
            solve_cancellation_ncir(plan, channel, params, &per_antenna)
        }
        SchemeKind::CirT2 => {
            let est = theorem2_demux(plan, channel, tilde_v, y_ir);
            let signals = est.into_iter().map(|(i, x)| (i, &tilde_v[&i] * x)).collect();
            solve_cancellation_cir(plan, channel, params, &signals)
        }
        _ => {
            let mut signals = BTreeMap::new();
            for p in &plan.demux {
                for (i, x) in demux_at_antenna(p, &y_ir[p.antenna]) {
                    signals.insert(i, &tilde_v[&i] * x);
                }
            }
            solve_cancellation_cir(plan, channel, params, &signals)
        }
    }
}

/// Single-slot scheme: with `L = min(W, Q)`, transmitters `0..L` each send one symbol; the
/// relay inverts the `L x L` transmitter-to-relay block on its first `L` receive antennas and
/// cancels every cross term at receivers `0..L` through its first `L` transmit antennas.
#[derive(Clone, Debug)]
pub struct SimpleScheme {
    pub params: SchemeParams,
    pub channel: ChannelRealization,
    pub l: usize,
    /// `demux_inv[i][q]`: estimate of symbol `i` is `sum_q demux_inv[i][q] y_q`.
    pub demux_inv: Vec<Vec<Complex64>>,
    /// `cancel_inv[u][j]`: antenna `u` sends `sum_j cancel_inv[u][j] rhs_j`.
    pub cancel_inv: Vec<Vec<Complex64>>,
    pub condition: f64,
}

pub fn simple_scheme(channel: ChannelRealization, params: &SchemeParams) -> Result<SimpleScheme> {
    params.validate()?;
    let l = params.w.min(params.q);
    let d: Vec<Vec<Complex64>> = (0..l).map(|q| (0..l).map(|i| channel.tx_to_ir(q, i).diag[0]).collect()).collect();
    let c: Vec<Vec<Complex64>> = (0..l).map(|j| (0..l).map(|u| channel.ir_to_rx(j, u).diag[0]).collect()).collect();
    let demux_inv = invert_small(&d).ok_or(Error::SingularSlot { slot: 0, group: 0 })?;
    let cancel_inv = invert_small(&c).ok_or(Error::SingularSlot { slot: 0, group: 1 })?;
    let cond = |m: &Vec<Vec<Complex64>>| condition_number(&DMatrix::from_fn(l, l, |r, k| m[r][k]));
    let condition = cond(&d).max(cond(&c));
    Ok(SimpleScheme { params: params.clone(), channel, l, demux_inv, cancel_inv, condition })
}

impl SimpleScheme {
    /// Relay map from the first `L` received samples to the `W` transmitted samples.
    pub fn relay_forward(&self, y_ir: &[Complex64]) -> Vec<Complex64> {
        let l = self.l;
        let est: Vec<Complex64> = (0..l).map(|i| (0..l).map(|q| self.demux_inv[i][q] * y_ir[q]).sum()).collect();
        let rhs: Vec<Complex64> = (0..l)
            .map(|j| -(0..l).filter(|&i| i != j).map(|i| self.channel.direct(j, i).diag[0] * est[i]).sum::<Complex64>())
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); self.params.w];
        for (u, x) in out.iter_mut().enumerate().take(l) {
            *x = (0..l).map(|j| self.cancel_inv[u][j] * rhs[j]).sum();
        }
        out
    }

    /// Interference-free gain of receiver `j < L`.
    pub fn effective_gains(&self) -> Vec<Complex64> {
        (0..self.l).map(|j| self.channel.direct(j, j).diag[0]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gen_channel;

    #[test]
    fn h_inv_inverts_clean_block() {
        let p = SchemeParams::cir(4, 3, 2);
        let part = Partition::for_params(&p).unwrap();
        let ch = gen_channel(&p, 5, 11).unwrap();
        let h_inv = compute_h_inv(&ch, &p, &part).unwrap();
        for t in 0..5 {
            for j in 0..3 {
                for d in 0..3 {
                    let s: Complex64 = (0..3).map(|u| ch.ir_to_rx(j, u).diag[t] * h_inv[&(d, u)].diag[t]).sum();
                    let want = if j == d { 1.0 } else { 0.0 };
                    assert!((s - want).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn singular_slot_reported() {
        let p = SchemeParams::cir(3, 2, 2);
        let part = Partition::for_params(&p).unwrap();
        let mut ch = gen_channel(&p, 4, 1).unwrap();
        for u in 0..2 {
            ch.ir_to_rx_mut(1, u).diag[2] = ch.ir_to_rx(0, u).diag[2];
        }
        match compute_h_inv(&ch, &p, &part) {
            Err(Error::SingularSlot { slot, .. }) => assert_eq!(slot, 2),
            other => panic!("expected singular slot, got {other:?}"),
        }
    }

    #[test]
    fn no_dirty_receivers_means_no_equivalent_links() {
        let p = SchemeParams::cir(3, 3, 3);
        let part = Partition::for_params(&p).unwrap();
        let ch = gen_channel(&p, 2, 4).unwrap();
        let h_inv = compute_h_inv(&ch, &p, &part).unwrap();
        assert!(equivalent_channel(&ch, &h_inv, &p, &part).is_empty());
    }

    #[test]
    fn simple_scheme_cancels_cross_terms() {
        let p = SchemeParams::simple(6, 4, 4);
        let ch = gen_channel(&p, 1, 9).unwrap();
        let s = simple_scheme(ch.clone(), &p).unwrap();
        let x: Vec<Complex64> = (0..4).map(|i| Complex64::from_polar(1.0, i as f64)).collect();
        let y_ir: Vec<Complex64> = (0..4).map(|q| (0..4).map(|i| ch.tx_to_ir(q, i).diag[0] * x[i]).sum()).collect();
        let xr = s.relay_forward(&y_ir);
        for j in 0..4 {
            let y: Complex64 = (0..4).map(|i| ch.direct(j, i).diag[0] * x[i]).sum::<Complex64>()
                + (0..4).map(|u| ch.ir_to_rx(j, u).diag[0] * xr[u]).sum::<Complex64>();
            assert!((y - s.effective_gains()[j] * x[j]).norm() < 1e-9);
        }
    }
}
