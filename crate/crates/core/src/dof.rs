//! Closed-form DoF expressions, the β optimization, finite-n accounting and parameter sizing.
//!
//! All arithmetic is exact; floating values appear only in reports.

use num_bigint::BigUint;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{SchemeKind, SchemeParams};
use crate::partition::Partition;
use crate::subspace::{dim_formula, total_dims, Node, SubspaceLabel};

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

/// `K/2 + max(0, (W - K/2) / (1 + 2c))`: the alignment branch with ratio lower bound `c`.
pub fn alignment_value(k: usize, w: usize, c: u64) -> Rational64 {
    let half = r(k as i64, 2);
    let gain = (r(w as i64, 1) - half) / r(1 + 2 * c as i64, 1);
    half + gain.max(Rational64::zero())
}

fn check_hypothesis(k: usize, w: usize, q: usize) -> Result<()> {
    if k < 2 || w == 0 || q == 0 || w.max(q) > k {
        return Err(Error::InvalidParams(format!("need 1 <= W, Q and max(W, Q) <= K (K={k}, W={w}, Q={q})")));
    }
    Ok(())
}

/// Coordinated relay: `max(alignment with c = ceil(W/Q), min(Q, W))`.
pub fn dof_theorem1(k: usize, w: usize, q: usize) -> Result<Rational64> {
    check_hypothesis(k, w, q)?;
    let c = w.div_ceil(q) as u64;
    Ok(alignment_value(k, w, c).max(r(q.min(w) as i64, 1)))
}

/// Sequential demultiplexing: as the coordinated formula with `floor(W/Q)`; needs `W mod Q = 1`.
pub fn dof_theorem2(k: usize, w: usize, q: usize) -> Result<Rational64> {
    check_hypothesis(k, w, q)?;
    if q < 2 || w % q != 1 {
        return Err(Error::InvalidParams(format!("needs W mod Q = 1 (W={w}, Q={q})")));
    }
    let c = (w / q) as u64;
    Ok(alignment_value(k, w, c).max(r(q.min(w) as i64, 1)))
}

/// Non-coordinated relay with `W = Q = pU` and `K/2 < U <= K`.
pub fn dof_theorem3(k: usize, u: usize, p: usize) -> Result<Rational64> {
    if k < 2 || p == 0 || 2 * u <= k || u > k {
        return Err(Error::InvalidParams(format!("needs K/2 < U <= K and p >= 1 (K={k}, U={u}, p={p})")));
    }
    Ok(alignment_value(k, u, u.div_ceil(p) as u64))
}

/// External reference scheme: `(K + U)/2` with `U(K-1) + U(K-U)` relay receive antennas.
pub fn remark6_dof(k: usize, u: usize) -> Rational64 {
    r((k + u) as i64, 2)
}

pub fn remark6_antennas(k: usize, u: usize) -> usize {
    u * (k - 1) + u * (k - u)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum BetaStar {
    Finite(f64),
    /// Supremum approached as β grows without bound.
    Infinite,
    /// Objective constant in β.
    Any,
}

/// `f(β) = (W(1+β) + (K-W)β) / (1+2β)`.
pub fn beta_objective(k: usize, w: usize, beta: f64) -> f64 {
    (w as f64 * (1.0 + beta) + (k - w) as f64 * beta) / (1.0 + 2.0 * beta)
}

/// Maximize `f` over `β >= c`.
pub fn optimize_beta(k: usize, w: usize, c: u64) -> (BetaStar, Rational64) {
    let twice_w = 2 * w;
    if twice_w > k {
        (BetaStar::Finite(c as f64), alignment_value(k, w, c))
    } else if twice_w < k {
        (BetaStar::Infinite, r(k as i64, 2))
    } else {
        (BetaStar::Any, r(k as i64, 2))
    }
}

/// Maximize `f` over the bounded interval `[c, beta_max]`.
pub fn optimize_beta_bounded(k: usize, w: usize, c: f64, beta_max: f64) -> (f64, f64) {
    let beta = if 2 * w >= k { c } else { beta_max };
    (beta, beta_objective(k, w, beta))
}

/// Lower bound `c` on β that each scheme's relay budget imposes.
pub fn ratio_bound(params: &SchemeParams) -> u64 {
    match params.kind {
        SchemeKind::Cir => params.w.div_ceil(params.q) as u64,
        SchemeKind::CirT2 => (params.w / params.q) as u64,
        SchemeKind::Ncir => params.ncir.map_or(1, |l| l.u.div_ceil(l.p)) as u64,
        SchemeKind::Simple => 1,
    }
}

/// Message dimensions over `T`.
pub fn finite_n_dof(params: &SchemeParams, partition: &Partition) -> BigRational {
    if params.kind == SchemeKind::Simple {
        return BigRational::from_integer(params.w.min(params.q).into());
    }
    let dims = total_dims(params, partition);
    let mut msg = BigUint::zero();
    for j in 0..params.k {
        msg += dim_formula(Node::Receiver(j), SubspaceLabel::CBar, params, partition);
        if params.is_clean(j) {
            msg += dim_formula(Node::Receiver(j), SubspaceLabel::CTilde, params, partition);
        }
    }
    BigRational::new(msg.into(), dims.t.into())
}

/// Smallest `(s = t, υ)` meeting the relay budget, with Γ, χ, ζ at `n = 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Feasibility {
    pub s: u32,
    pub t: u32,
    pub upsilon: u32,
    pub c: u64,
    pub gamma: String,
    pub chi: String,
    pub zeta: String,
    /// `ζ >= c χ` and `Γ = ζ`.
    pub holds: bool,
}

/// Normalized dimensions `(Γ, χ, ζ)` for the given `s, t, υ`.
pub fn normalized_dims(params: &SchemeParams, partition: &Partition) -> (BigUint, BigUint, BigUint) {
    let qk = params.q * params.k;
    let theta = partition.theta();
    let p = |b: u32, e: usize| num_traits::pow(BigUint::from(b), e);
    (
        p(params.s, qk),
        p(params.s, qk - theta) * p(params.upsilon, theta),
        p(params.t, qk),
    )
}

fn certificate(params: &SchemeParams, partition: &Partition) -> Feasibility {
    let c = ratio_bound(params);
    let (gamma, chi, zeta) = normalized_dims(params, partition);
    let holds = gamma == zeta && zeta >= &chi * BigUint::from(c);
    Feasibility {
        s: params.s,
        t: params.t,
        upsilon: params.upsilon,
        c,
        gamma: gamma.to_string(),
        chi: chi.to_string(),
        zeta: zeta.to_string(),
        holds,
    }
}

/// Fill `s = t` and `υ = 1` with the smallest `s` such that `s^θ >= c`.
pub fn feasible_for(params: &SchemeParams) -> Result<(SchemeParams, Feasibility)> {
    params.validate()?;
    let partition = Partition::for_params(params)?;
    let theta = partition.theta() as u32;
    let c = BigUint::from(ratio_bound(params));
    let mut s = 1u32;
    while num_traits::pow(BigUint::from(s), theta as usize) < c {
        s += 1;
    }
    let mut out = params.clone();
    out.s = s;
    out.t = s;
    out.upsilon = 1;
    let cert = certificate(&out, &partition);
    Ok((out, cert))
}

/// Coordinated-relay sizing for `(K, W, Q)` at growth index `n`.
pub fn feasible_params(k: usize, w: usize, q: usize, n: u32) -> Result<Feasibility> {
    let mut p = SchemeParams::cir(k, w, q);
    p.n = n;
    Ok(feasible_for(&p)?.1)
}

/// Certificate for parameters as given.
pub fn check_feasibility(params: &SchemeParams) -> Result<Feasibility> {
    let partition = Partition::for_params(params)?;
    Ok(certificate(params, &partition))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DofBreakdown {
    pub scheme: String,
    /// Asymptotic value of the constructed scheme.
    pub formula_dof: f64,
    pub formula_dof_exact: String,
    /// Full theorem value, including the single-slot branch.
    pub theorem_dof: Option<f64>,
    pub finite_n_dof: String,
    pub finite_n_dof_value: f64,
    pub beta_star: BetaStar,
    pub gamma: String,
    pub chi: String,
    pub zeta: String,
    #[serde(rename = "T")]
    pub t: String,
    pub per_receiver_dims: std::collections::BTreeMap<String, String>,
    pub per_antenna_dims: std::collections::BTreeMap<String, String>,
}

fn to_f64(x: &BigRational) -> f64 {
    x.numer().to_f64().unwrap_or(f64::NAN) / x.denom().to_f64().unwrap_or(f64::NAN)
}

fn rat_f64(x: Rational64) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

pub fn breakdown(params: &SchemeParams, partition: &Partition) -> Result<DofBreakdown> {
    let c = ratio_bound(params);
    let (formula, theorem, beta_star) = match params.kind {
        SchemeKind::Simple => {
            let v = r(params.w.min(params.q) as i64, 1);
            (v, Some(dof_theorem1(params.k, params.w, params.q)?), BetaStar::Any)
        }
        SchemeKind::Ncir => {
            let l = params.ncir.ok_or_else(|| Error::InvalidParams("missing layout".into()))?;
            let (b, v) = optimize_beta(params.k, l.u, c);
            (v, Some(dof_theorem3(params.k, l.u, l.p)?), b)
        }
        SchemeKind::Cir => {
            let (b, v) = optimize_beta(params.k, params.w, c);
            (v, Some(dof_theorem1(params.k, params.w, params.q)?), b)
        }
        SchemeKind::CirT2 => {
            let (b, v) = optimize_beta(params.k, params.w, c);
            (v, Some(dof_theorem2(params.k, params.w, params.q)?), b)
        }
    };
    let dims = total_dims(params, partition);
    let (gamma, chi, zeta) = normalized_dims(params, partition);
    let fin = finite_n_dof(params, partition);
    let mut per_receiver = std::collections::BTreeMap::new();
    for (j, d) in dims.per_receiver.iter().enumerate() {
        per_receiver.insert(format!("rx{j}"), d.to_string());
    }
    let mut per_antenna = std::collections::BTreeMap::new();
    for (q, d) in dims.per_antenna.iter().enumerate() {
        per_antenna.insert(format!("ir{q}"), d.to_string());
    }
    Ok(DofBreakdown {
        scheme: params.kind.to_string(),
        formula_dof: rat_f64(formula),
        formula_dof_exact: formula.to_string(),
        theorem_dof: theorem.map(rat_f64),
        finite_n_dof: fin.to_string(),
        finite_n_dof_value: to_f64(&fin),
        beta_star,
        gamma: gamma.to_string(),
        chi: chi.to_string(),
        zeta: zeta.to_string(),
        t: dims.t.to_string(),
        per_receiver_dims: per_receiver,
        per_antenna_dims: per_antenna,
    })
}

/// One sweep row; absent fields are not applicable to the scheme.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: String,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "W")]
    pub w: Option<usize>,
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    #[serde(rename = "U")]
    pub u: Option<usize>,
    pub p: Option<usize>,
    /// Exact value, or `None` when the hypotheses fail.
    #[serde(skip)]
    pub exact: Option<Rational64>,
    pub dof: Option<f64>,
}

impl SweepRow {
    fn new(scheme: &str, k: usize, w: Option<usize>, q: Option<usize>, u: Option<usize>, p: Option<usize>, v: Option<Rational64>) -> Self {
        SweepRow { scheme: scheme.into(), k, w, q, u, p, exact: v, dof: v.map(rat_f64) }
    }
}

/// Coordinated-relay rows over `W x Q`; with `improved`, sequential-demultiplexing rows
/// are added where applicable.
pub fn sweep_cir(k: usize, ws: &[usize], qs: &[usize], improved: bool) -> Vec<SweepRow> {
    let mut out = Vec::new();
    for &w in ws {
        for &q in qs {
            out.push(SweepRow::new("cir", k, Some(w), Some(q), None, None, dof_theorem1(k, w, q).ok()));
            if improved && q >= 2 && w % q == 1 {
                out.push(SweepRow::new("cir-t2", k, Some(w), Some(q), None, None, dof_theorem2(k, w, q).ok()));
            }
        }
    }
    out
}

/// Non-coordinated rows over `U x p`, each followed by the external reference at the same `U`.
pub fn sweep_ncir(k: usize, us: &[usize], ps: &[usize]) -> Vec<SweepRow> {
    let mut out = Vec::new();
    for &u in us {
        for &p in ps {
            let w = p * u;
            out.push(SweepRow::new("ncir", k, Some(w), Some(w), Some(u), Some(p), dof_theorem3(k, u, p).ok()));
        }
        if u <= k {
            let qa = remark6_antennas(k, u);
            out.push(SweepRow::new("remark6-external", k, None, Some(qa), Some(u), None, Some(remark6_dof(k, u))));
        }
    }
    out
}

/// Best DoF of each scheme family with at most `n` relay antennas on each side.
pub fn compare_at(k: usize, n: usize) -> Vec<SweepRow> {
    let half = r(k as i64, 2);
    let m = n.min(k);
    let cir = if m == 0 { half } else { dof_theorem1(k, m, m).map_or(half, |v| v.max(half)) };
    let mut ncir = (half, None, None);
    for u in (k / 2 + 1)..=k {
        for p in 1..=n / u.max(1) {
            if let Ok(v) = dof_theorem3(k, u, p) {
                if v > ncir.0 {
                    ncir = (v, Some(u), Some(p));
                }
            }
        }
    }
    let mut ext = (half, None);
    for u in 1..=k {
        if remark6_antennas(k, u) <= n && remark6_dof(k, u) > ext.0 {
            ext = (remark6_dof(k, u), Some(u));
        }
    }
    vec![
        SweepRow::new("cir", k, Some(m), Some(m), None, None, Some(cir)),
        SweepRow::new("ncir", k, ncir.2.zip(ncir.1).map(|(p, u)| p * u), ncir.2.zip(ncir.1).map(|(p, u)| p * u), ncir.1, ncir.2, Some(ncir.0)),
        SweepRow::new("remark6-external", k, None, Some(n), ext.1, None, Some(ext.0)),
        SweepRow::new("no-relay", k, Some(0), Some(0), None, None, Some(half)),
    ]
}

pub fn compare_curves(k: usize, ns: &[usize]) -> Vec<(usize, Vec<SweepRow>)> {
    ns.iter().map(|&n| (n, compare_at(k, n))).collect()
}
