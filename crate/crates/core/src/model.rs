//! Channel model: scheme parameters, diagonal (frequency-selective) links over a
//! symbol extension of `T` slots, seeded channel generation and AWGN.
//!
//! Indices are 0-based throughout: transmitters and receivers `0..K`, relay
//! receive antennas `0..Q`, relay transmit antennas `0..W`. Receivers `0..W`
//! (or `0..U` for the non-coordinated scheme) are the clean receivers.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Num, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;

/// Exact complex scalar with rational parts.
pub type ExactComplex = num_complex::Complex<BigRational>;

/// Field element usable by the generic construction code.
pub trait Scalar:
    Clone + fmt::Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static
{
    /// Pivot score; zero iff the element is zero.
    fn magnitude(&self) -> f64;
    /// Lossless for `ExactComplex`, identity for `Complex64`.
    fn from_complex64(z: Complex64) -> Self;
    fn to_complex64(&self) -> Complex64;
    /// Pivots at or below this fraction of the largest entry count as zero.
    fn pivot_tolerance() -> f64 {
        0.0
    }
}

impl Scalar for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn from_complex64(z: Complex64) -> Self {
        z
    }
    fn to_complex64(&self) -> Complex64 {
        *self
    }
    fn pivot_tolerance() -> f64 {
        1e-13
    }
}

impl Scalar for ExactComplex {
    fn magnitude(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let re = self.re.to_f64().unwrap_or(f64::MAX).abs();
        let im = self.im.to_f64().unwrap_or(f64::MAX).abs();
        // Underflowing nonzero values must still score above zero.
        (re + im).max(f64::MIN_POSITIVE)
    }
    fn from_complex64(z: Complex64) -> Self {
        let conv = |x: f64| BigRational::from_float(x).expect("finite channel coefficient");
        ExactComplex::new(conv(z.re), conv(z.im))
    }
    fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.re.to_f64().unwrap_or(f64::NAN),
            self.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

/// Build an exact complex value from integer parts over a common denominator.
pub fn exact_from_parts(re: i64, im: i64, den: i64) -> ExactComplex {
    ExactComplex::new(
        BigRational::new(BigInt::from(re), BigInt::from(den)),
        BigRational::new(BigInt::from(im), BigInt::from(den)),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    /// Coordinated relay, interference-alignment construction.
    Cir,
    /// Coordinated relay with sequential demultiplexing at antenna 0.
    CirT2,
    /// Non-coordinated relay: antenna groups work independently.
    Ncir,
    /// Single-slot zero-forcing relay scheme.
    Simple,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SchemeKind::Cir => "cir",
            SchemeKind::CirT2 => "cir-t2",
            SchemeKind::Ncir => "ncir",
            SchemeKind::Simple => "simple",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ChannelDistribution {
    /// i.i.d. CN(0, 1).
    #[default]
    ComplexGaussian,
    /// CN(0, 1) rounded to the grid `2^-bits`, so every coefficient is a short dyadic rational.
    QuantizedGaussian { bits: u32 },
    /// Uniform over the annulus `inner <= |h| <= outer` with uniform phase.
    UniformAnnulus { inner: f64, outer: f64 },
    /// Real N(0, 1).
    RealGaussian,
}

/// Non-coordinated layout: `U = p*e + e'`, antennas split into `p` groups of `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NcirLayout {
    pub u: usize,
    pub p: usize,
    pub e: usize,
    pub e_rem: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub kind: SchemeKind,
    pub k: usize,
    /// Relay transmit antennas.
    pub w: usize,
    /// Relay receive antennas.
    pub q: usize,
    pub ncir: Option<NcirLayout>,
    pub n: u32,
    pub s: u32,
    pub t: u32,
    pub upsilon: u32,
    pub snr_db: Vec<f64>,
    pub seed: u64,
    pub distribution: ChannelDistribution,
}

impl SchemeParams {
    fn base(kind: SchemeKind, k: usize, w: usize, q: usize) -> Self {
        SchemeParams {
            kind,
            k,
            w,
            q,
            ncir: None,
            n: 1,
            s: 1,
            t: 1,
            upsilon: 1,
            snr_db: vec![40.0, 60.0],
            seed: 0,
            distribution: ChannelDistribution::default(),
        }
    }

    pub fn cir(k: usize, w: usize, q: usize) -> Self {
        Self::base(SchemeKind::Cir, k, w, q)
    }

    pub fn cir_t2(k: usize, w: usize, q: usize) -> Self {
        Self::base(SchemeKind::CirT2, k, w, q)
    }

    pub fn simple(k: usize, w: usize, q: usize) -> Self {
        Self::base(SchemeKind::Simple, k, w, q)
    }

    /// Non-coordinated scheme with `W = Q = p*U`.
    pub fn ncir(k: usize, u: usize, p: usize) -> Self {
        let e = u.checked_div(p).unwrap_or(0);
        let e_rem = u.checked_rem(p).unwrap_or(0);
        let mut params = Self::base(SchemeKind::Ncir, k, p * u, p * u);
        params.ncir = Some(NcirLayout { u, p, e, e_rem });
        params
    }

    pub fn with_extension(mut self, n: u32, s: u32, t: u32, upsilon: u32) -> Self {
        self.n = n;
        self.s = s;
        self.t = t;
        self.upsilon = upsilon;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_distribution(mut self, distribution: ChannelDistribution) -> Self {
        self.distribution = distribution;
        self
    }

    /// Receivers `0..clean_count()` are served by the relay's cancellation.
    pub fn clean_count(&self) -> usize {
        match self.kind {
            SchemeKind::Ncir => self.ncir.map_or(0, |l| l.u),
            SchemeKind::Simple => self.w.min(self.q),
            _ => self.w,
        }
    }

    pub fn is_clean(&self, rx: usize) -> bool {
        rx < self.clean_count()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.k < 2 {
            return bad(format!("K = {} must be at least 2", self.k));
        }
        if self.w == 0 || self.q == 0 {
            return bad(format!("W = {}, Q = {} must be positive", self.w, self.q));
        }
        if self.w.max(self.q) > self.k {
            return bad(format!(
                "max(W, Q) = {} exceeds K = {}",
                self.w.max(self.q),
                self.k
            ));
        }
        if self.n == 0 || self.s == 0 || self.t == 0 || self.upsilon == 0 {
            return bad("n, s, t and upsilon must be positive".into());
        }
        if let ChannelDistribution::UniformAnnulus { inner, outer } = self.distribution {
            if !(inner > 0.0 && outer >= inner && outer.is_finite()) {
                return bad(format!("annulus [{inner}, {outer}] must satisfy 0 < inner <= outer"));
            }
        }
        match self.kind {
            SchemeKind::Ncir => {
                let Some(l) = self.ncir else {
                    return bad("non-coordinated scheme needs a U/p layout".into());
                };
                if l.p == 0 || l.u == 0 {
                    return bad("U and p must be positive".into());
                }
                if 2 * l.u <= self.k || l.u > self.k {
                    return bad(format!("U = {} must satisfy K/2 < U <= K (K = {})", l.u, self.k));
                }
                if self.w != l.p * l.u || self.q != l.p * l.u {
                    return bad("non-coordinated scheme needs W = Q = p*U".into());
                }
                if l.u != l.p * l.e + l.e_rem || l.e_rem >= l.p {
                    return bad("inconsistent U = p*e + e' split".into());
                }
            }
            SchemeKind::CirT2 => {
                if self.q < 2 || self.w % self.q != 1 {
                    return bad(format!(
                        "sequential demultiplexing needs W mod Q = 1 with Q >= 2 (W = {}, Q = {})",
                        self.w, self.q
                    ));
                }
            }
            SchemeKind::Cir | SchemeKind::Simple => {}
        }
        if self.kind != SchemeKind::Ncir && self.ncir.is_some() {
            return bad("U/p layout only applies to the non-coordinated scheme".into());
        }
        Ok(())
    }
}

/// One diagonal link of the `T`-slot symbol extension.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagonalLink<S = Complex64> {
    pub diag: Vec<S>,
}

impl<S: Scalar> DiagonalLink<S> {
    pub fn new(diag: Vec<S>) -> Self {
        DiagonalLink { diag }
    }

    pub fn ones(slots: usize) -> Self {
        DiagonalLink { diag: vec![S::one(); slots] }
    }

    pub fn slots(&self) -> usize {
        self.diag.len()
    }

    pub fn map<S2: Scalar>(&self, f: impl Fn(&S) -> S2) -> DiagonalLink<S2> {
        DiagonalLink { diag: self.diag.iter().map(f).collect() }
    }
}

/// Length-`T` vector over the symbol extension.
pub type ExtendedVector<S = Complex64> = Vec<S>;

/// Elementwise product `diag(link) * v`.
pub fn apply_link<S: Scalar>(link: &DiagonalLink<S>, v: &[S]) -> Result<ExtendedVector<S>> {
    if link.slots() != v.len() {
        return Err(Error::LengthMismatch { expected: link.slots(), got: v.len() });
    }
    Ok(link.diag.iter().zip(v).map(|(h, x)| h.clone() * x.clone()).collect())
}

/// All links of one realization.
#[derive(Clone, Debug, Serialize)]
pub struct ChannelRealization<S = Complex64> {
    slots: usize,
    users: usize,
    relay_tx: usize,
    relay_rx: usize,
    /// `direct[rx * K + tx]`.
    direct: Vec<DiagonalLink<S>>,
    /// `tx_to_ir[antenna * K + tx]`.
    tx_to_ir: Vec<DiagonalLink<S>>,
    /// `ir_to_rx[rx * W + antenna]`.
    ir_to_rx: Vec<DiagonalLink<S>>,
    /// Auxiliary links keyed by `(relay receive antenna, tx)`.
    aux: BTreeMap<(usize, usize), DiagonalLink<S>>,
}

impl<S: Scalar> ChannelRealization<S> {
    pub fn from_parts(
        users: usize,
        relay_tx: usize,
        relay_rx: usize,
        direct: Vec<DiagonalLink<S>>,
        tx_to_ir: Vec<DiagonalLink<S>>,
        ir_to_rx: Vec<DiagonalLink<S>>,
        aux: BTreeMap<(usize, usize), DiagonalLink<S>>,
    ) -> Result<Self> {
        let slots = direct.first().map_or(0, |l| l.slots());
        let check = |want: usize, got: usize| {
            if want == got {
                Ok(())
            } else {
                Err(Error::LengthMismatch { expected: want, got })
            }
        };
        check(users * users, direct.len())?;
        check(relay_rx * users, tx_to_ir.len())?;
        check(users * relay_tx, ir_to_rx.len())?;
        for link in direct.iter().chain(&tx_to_ir).chain(&ir_to_rx).chain(aux.values()) {
            check(slots, link.slots())?;
        }
        Ok(ChannelRealization { slots, users, relay_tx, relay_rx, direct, tx_to_ir, ir_to_rx, aux })
    }

    pub fn slots(&self) -> usize {
        self.slots
    }
    pub fn users(&self) -> usize {
        self.users
    }
    pub fn relay_tx(&self) -> usize {
        self.relay_tx
    }
    pub fn relay_rx(&self) -> usize {
        self.relay_rx
    }

    pub fn direct(&self, rx: usize, tx: usize) -> &DiagonalLink<S> {
        &self.direct[rx * self.users + tx]
    }
    pub fn direct_mut(&mut self, rx: usize, tx: usize) -> &mut DiagonalLink<S> {
        &mut self.direct[rx * self.users + tx]
    }
    pub fn tx_to_ir(&self, antenna: usize, tx: usize) -> &DiagonalLink<S> {
        &self.tx_to_ir[antenna * self.users + tx]
    }
    pub fn tx_to_ir_mut(&mut self, antenna: usize, tx: usize) -> &mut DiagonalLink<S> {
        &mut self.tx_to_ir[antenna * self.users + tx]
    }
    pub fn ir_to_rx(&self, rx: usize, antenna: usize) -> &DiagonalLink<S> {
        &self.ir_to_rx[rx * self.relay_tx + antenna]
    }
    pub fn ir_to_rx_mut(&mut self, rx: usize, antenna: usize) -> &mut DiagonalLink<S> {
        &mut self.ir_to_rx[rx * self.relay_tx + antenna]
    }
    pub fn aux(&self, antenna: usize, tx: usize) -> Option<&DiagonalLink<S>> {
        self.aux.get(&(antenna, tx))
    }
    pub fn aux_links(&self) -> &BTreeMap<(usize, usize), DiagonalLink<S>> {
        &self.aux
    }
    pub fn aux_mut(&mut self) -> &mut BTreeMap<(usize, usize), DiagonalLink<S>> {
        &mut self.aux
    }

    /// Every link, in a fixed order, with a printable name.
    pub fn all_links(&self) -> Vec<(String, &DiagonalLink<S>)> {
        let mut out = Vec::new();
        for rx in 0..self.users {
            for tx in 0..self.users {
                out.push((format!("H[{rx},{tx}]"), self.direct(rx, tx)));
            }
        }
        for q in 0..self.relay_rx {
            for tx in 0..self.users {
                out.push((format!("H_TIR[{q},{tx}]"), self.tx_to_ir(q, tx)));
            }
        }
        for rx in 0..self.users {
            for u in 0..self.relay_tx {
                out.push((format!("H_IRR[{rx},{u}]"), self.ir_to_rx(rx, u)));
            }
        }
        for ((q, tx), link) in &self.aux {
            out.push((format!("T[{q},{tx}]"), link));
        }
        out
    }

    pub fn map<S2: Scalar>(&self, f: impl Fn(&S) -> S2 + Copy) -> ChannelRealization<S2> {
        ChannelRealization {
            slots: self.slots,
            users: self.users,
            relay_tx: self.relay_tx,
            relay_rx: self.relay_rx,
            direct: self.direct.iter().map(|l| l.map(f)).collect(),
            tx_to_ir: self.tx_to_ir.iter().map(|l| l.map(f)).collect(),
            ir_to_rx: self.ir_to_rx.iter().map(|l| l.map(f)).collect(),
            aux: self.aux.iter().map(|(k, l)| (*k, l.map(f))).collect(),
        }
    }
}

impl ChannelRealization<Complex64> {
    /// Lossless conversion to exact rationals.
    pub fn to_exact(&self) -> ChannelRealization<ExactComplex> {
        self.map(|z| ExactComplex::from_complex64(*z))
    }
}

/// Named RNG substreams; each is independent of how much the others consume.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    Channel = 1,
    Aux = 2,
    Noise = 3,
    Data = 4,
}

/// Deterministic generator for `(seed, stream, index)`.
pub fn substream(seed: u64, stream: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((stream as u64) << 48) | (index & 0xFFFF_FFFF_FFFF));
    rng
}

/// One CN(0, `variance`) sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sd, im * sd)
}

fn draw_coefficient<R: Rng + ?Sized>(rng: &mut R, dist: ChannelDistribution) -> Complex64 {
    match dist {
        ChannelDistribution::ComplexGaussian => complex_normal(rng, 1.0),
        ChannelDistribution::QuantizedGaussian { bits } => {
            let scale = (2.0f64).powi(bits as i32);
            loop {
                let z = complex_normal(rng, 1.0);
                let q = Complex64::new((z.re * scale).round() / scale, (z.im * scale).round() / scale);
                if q.re != 0.0 && q.im != 0.0 {
                    return q;
                }
            }
        }
        ChannelDistribution::UniformAnnulus { inner, outer } => {
            let u: f64 = rng.random();
            let r = (inner * inner + u * (outer * outer - inner * inner)).sqrt();
            let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
            Complex64::from_polar(r, phase)
        }
        ChannelDistribution::RealGaussian => {
            let re: f64 = StandardNormal.sample(rng);
            Complex64::new(re, 0.0)
        }
    }
}

fn draw_link<R: Rng + ?Sized>(rng: &mut R, slots: usize, dist: ChannelDistribution) -> DiagonalLink {
    DiagonalLink::new((0..slots).map(|_| draw_coefficient(rng, dist)).collect())
}

/// Draw every link for `params` over `slots` slots.
///
/// Direct, relay-receive and relay-transmit links come from the channel substream in
/// that order; the auxiliary links come from their own substream, so the main links
/// do not depend on the partition.
pub fn gen_channel(params: &SchemeParams, slots: usize, seed: u64) -> Result<ChannelRealization> {
    params.validate()?;
    if slots == 0 {
        return Err(Error::InvalidParams("symbol extension needs at least one slot".into()));
    }
    let dist = params.distribution;
    let (k, w, q) = (params.k, params.w, params.q);
    let mut rng = substream(seed, Stream::Channel, 0);
    let direct = (0..k * k).map(|_| draw_link(&mut rng, slots, dist)).collect();
    let tx_to_ir = (0..q * k).map(|_| draw_link(&mut rng, slots, dist)).collect();
    let ir_to_rx = (0..k * w).map(|_| draw_link(&mut rng, slots, dist)).collect();
    let mut aux_rng = substream(seed, Stream::Aux, 0);
    let partition = Partition::for_params(params)?;
    let mut aux = BTreeMap::new();
    for antenna in 0..q {
        for &tx in partition.demux_set(antenna) {
            aux.insert((antenna, tx), draw_link(&mut aux_rng, slots, dist));
        }
    }
    ChannelRealization::from_parts(k, w, q, direct, tx_to_ir, ir_to_rx, aux)
}

/// Add CN(0, `variance`) noise in place.
pub fn awgn<R: Rng + ?Sized>(rng: &mut R, signal: &mut [Complex64], variance: f64) {
    if variance <= 0.0 {
        return;
    }
    for x in signal {
        *x += complex_normal(rng, variance);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_oversized_relay() {
        assert!(SchemeParams::cir(3, 4, 2).validate().is_err());
        assert!(SchemeParams::cir(3, 2, 2).validate().is_ok());
        assert!(SchemeParams::ncir(3, 2, 1).validate().is_ok());
        assert!(SchemeParams::ncir(4, 2, 1).validate().is_err());
        assert!(SchemeParams::cir_t2(4, 3, 2).validate().is_ok());
        assert!(SchemeParams::cir_t2(4, 2, 2).validate().is_err());
    }

    #[test]
    fn same_seed_same_channel() {
        let p = SchemeParams::cir(3, 2, 2);
        let a = gen_channel(&p, 11, 7).unwrap();
        let b = gen_channel(&p, 11, 7).unwrap();
        let c = gen_channel(&p, 11, 8).unwrap();
        assert_eq!(a.direct(1, 2), b.direct(1, 2));
        assert_ne!(a.direct(1, 2), c.direct(1, 2));
        assert_eq!(a.aux_links().len(), 2);
    }

    #[test]
    fn main_links_ignore_partition() {
        let a = gen_channel(&SchemeParams::cir(4, 3, 3), 5, 1).unwrap();
        let b = gen_channel(&SchemeParams::cir(4, 3, 1), 5, 1).unwrap();
        assert_eq!(a.direct(3, 0), b.direct(3, 0));
    }

    #[test]
    fn exact_conversion_is_lossless() {
        let z = Complex64::new(0.1234567890123, -7.5e-9);
        assert_eq!(ExactComplex::from_complex64(z).to_complex64(), z);
    }

    #[test]
    fn annulus_bounds_hold() {
        let p = SchemeParams::cir(3, 2, 2)
            .with_distribution(ChannelDistribution::UniformAnnulus { inner: 0.5, outer: 2.0 });
        let ch = gen_channel(&p, 64, 3).unwrap();
        for (_, link) in ch.all_links() {
            for h in &link.diag {
                assert!(h.norm() >= 0.5 - 1e-12 && h.norm() <= 2.0 + 1e-12);
            }
        }
    }

    #[test]
    fn real_mode_draws_real_coefficients() {
        let p = SchemeParams::cir(3, 2, 2).with_distribution(ChannelDistribution::RealGaussian);
        let ch = gen_channel(&p, 32, 5).unwrap();
        for (_, link) in ch.all_links() {
            assert!(link.diag.iter().all(|h| h.im == 0.0 && h.re != 0.0));
        }
    }

    #[test]
    fn apply_link_checks_length() {
        let l = DiagonalLink::<Complex64>::ones(3);
        assert!(apply_link(&l, &[Complex64::new(1.0, 0.0); 2]).is_err());
    }
}
