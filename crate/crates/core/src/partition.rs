//! Transmitter and relay-antenna partitions.
//!
//! With a coordinated relay, receive antenna `q` demultiplexes the streams of `B_q`.
//! With the non-coordinated relay, antenna group `F_l` serves transmitters `E_l`, and every
//! antenna `q` in `F_l` demultiplexes all of `E_l`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{SchemeKind, SchemeParams};

/// Split `0..W` into `Q` consecutive sets: with `W = QZ + P`, the first `P` sets get `Z + 1`
/// members and the rest get `Z`.
pub fn partition_b(w: usize, q: usize) -> Result<Vec<Vec<usize>>> {
    if q == 0 {
        return Err(Error::InvalidParams("Q must be positive".into()));
    }
    let (z, p) = (w / q, w % q);
    let mut sets = Vec::with_capacity(q);
    let mut next = 0;
    for idx in 0..q {
        let size = if idx < p { z + 1 } else { z };
        sets.push((next..next + size).collect());
        next += size;
    }
    Ok(sets)
}

/// Split transmitters `0..U` into `p` sets (`e + 1` members for the first `e'`, `e` for the
/// rest) and antennas `0..pU` into `p` consecutive groups of `U`.
pub fn partition_e_f(
    u: usize,
    p: usize,
    e: usize,
    e_rem: usize,
) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    if p == 0 || u != p * e + e_rem || e_rem >= p {
        return Err(Error::InvalidParams(format!(
            "inconsistent split U = {u}, p = {p}, e = {e}, e' = {e_rem}"
        )));
    }
    let mut e_sets = Vec::with_capacity(p);
    let mut next = 0;
    for l in 0..p {
        let size = if l < e_rem { e + 1 } else { e };
        e_sets.push((next..next + size).collect());
        next += size;
    }
    let f_sets = (0..p).map(|l| (l * u..(l + 1) * u).collect()).collect();
    Ok((e_sets, f_sets))
}

/// Which transmitters each relay receive antenna demultiplexes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Partition {
    Coordinated { b: Vec<Vec<usize>> },
    NonCoordinated { e: Vec<Vec<usize>>, f: Vec<Vec<usize>> },
    /// The single-slot scheme uses no alignment partition.
    Unpartitioned { antennas: usize },
}

impl Partition {
    pub fn for_params(params: &SchemeParams) -> Result<Partition> {
        match params.kind {
            SchemeKind::Cir | SchemeKind::CirT2 => {
                Ok(Partition::Coordinated { b: partition_b(params.w, params.q)? })
            }
            SchemeKind::Ncir => {
                let l = params
                    .ncir
                    .ok_or_else(|| Error::InvalidParams("missing U/p layout".into()))?;
                let (e, f) = partition_e_f(l.u, l.p, l.e, l.e_rem)?;
                Ok(Partition::NonCoordinated { e, f })
            }
            SchemeKind::Simple => Ok(Partition::Unpartitioned { antennas: params.q }),
        }
    }

    /// Transmitters whose tilde streams antenna `q` demultiplexes.
    pub fn demux_set(&self, q: usize) -> &[usize] {
        match self {
            Partition::Coordinated { b } => &b[q],
            Partition::NonCoordinated { e, .. } => &e[self.group_of_antenna(q)],
            Partition::Unpartitioned { .. } => &[],
        }
    }

    pub fn antennas(&self) -> usize {
        match self {
            Partition::Coordinated { b } => b.len(),
            Partition::NonCoordinated { f, .. } => f.iter().map(Vec::len).sum(),
            Partition::Unpartitioned { antennas } => *antennas,
        }
    }

    /// Group index `l` with `q` in `F_l`; coordinated relays form a single group.
    pub fn group_of_antenna(&self, q: usize) -> usize {
        match self {
            Partition::NonCoordinated { f, .. } => {
                f.iter().position(|g| g.contains(&q)).expect("antenna within range")
            }
            _ => 0,
        }
    }

    /// Group index `l` with `tx` in `E_l`.
    pub fn group_of_tx(&self, tx: usize) -> usize {
        match self {
            Partition::NonCoordinated { e, .. } => {
                e.iter().position(|g| g.contains(&tx)).unwrap_or(usize::MAX)
            }
            _ => 0,
        }
    }

    /// Relay transmit antennas that cancel the tilde streams of `tx`.
    pub fn cancelling_antennas(&self, tx: usize, relay_tx: usize) -> Vec<usize> {
        match self {
            Partition::NonCoordinated { f, .. } => match f.get(self.group_of_tx(tx)) {
                Some(g) => g.clone(),
                None => Vec::new(),
            },
            _ => (0..relay_tx).collect(),
        }
    }

    /// `sum_q |demux_set(q)|`: W for a coordinated relay, U^2 for a non-coordinated one.
    pub fn theta(&self) -> usize {
        (0..self.antennas()).map(|q| self.demux_set(q).len()).sum()
    }

    pub fn max_demux(&self) -> usize {
        (0..self.antennas()).map(|q| self.demux_set(q).len()).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn b_examples() {
        assert_eq!(partition_b(2, 2).unwrap(), vec![vec![0], vec![1]]);
        assert_eq!(partition_b(3, 2).unwrap(), vec![vec![0, 1], vec![2]]);
        assert_eq!(partition_b(1, 1).unwrap(), vec![vec![0]]);
        assert_eq!(partition_b(1, 2).unwrap(), vec![vec![0], vec![]]);
    }

    #[test]
    fn e_f_examples() {
        let (e, f) = partition_e_f(2, 1, 2, 0).unwrap();
        assert_eq!(e, vec![vec![0, 1]]);
        assert_eq!(f, vec![vec![0, 1]]);
        let (e, f) = partition_e_f(3, 2, 1, 1).unwrap();
        assert_eq!(e, vec![vec![0, 1], vec![2]]);
        assert_eq!(f, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(partition_e_f(3, 2, 1, 0).is_err());
    }

    #[test]
    fn ncir_theta_is_u_squared() {
        let p = Partition::for_params(&SchemeParams::ncir(5, 3, 2)).unwrap();
        assert_eq!(p.theta(), 9);
        assert_eq!(p.max_demux(), 2);
        assert_eq!(p.demux_set(4), &[2]);
        assert_eq!(p.cancelling_antennas(2, 6), vec![3, 4, 5]);
    }

    proptest! {
        #[test]
        fn b_is_a_balanced_partition(w in 1usize..40, q in 1usize..12) {
            let sets = partition_b(w, q).unwrap();
            prop_assert_eq!(sets.len(), q);
            let flat: Vec<usize> = sets.iter().flatten().copied().collect();
            prop_assert_eq!(flat, (0..w).collect::<Vec<_>>());
            let max = sets.iter().map(Vec::len).max().unwrap();
            let min = sets.iter().map(Vec::len).min().unwrap();
            prop_assert!(max - min <= 1);
            prop_assert_eq!(max, w.div_ceil(q));
        }

        #[test]
        fn e_f_partition_ground_sets(e in 0usize..5, p in 1usize..5, r in 0usize..5) {
            let e_rem = r % p;
            let u = p * e + e_rem;
            prop_assume!(u > 0);
            let (es, fs) = partition_e_f(u, p, e, e_rem).unwrap();
            let flat: Vec<usize> = es.iter().flatten().copied().collect();
            prop_assert_eq!(flat, (0..u).collect::<Vec<_>>());
            let flat: Vec<usize> = fs.iter().flatten().copied().collect();
            prop_assert_eq!(flat, (0..p * u).collect::<Vec<_>>());
            for (l, set) in es.iter().enumerate() {
                prop_assert_eq!(set.len(), if l < e_rem { e + 1 } else { e });
            }
        }
    }
}
