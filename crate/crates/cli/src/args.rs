//! Flag definitions, the JSON config schema (same field names as the long flags) and the
//! translation into scheme parameters.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use irdof::dof::{check_feasibility, feasible_for};
use irdof::model::ChannelDistribution;
use irdof::{SchemeKind, SchemeParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable consulted for the seed when neither a flag nor the config sets it.
pub const SEED_ENV: &str = "IRDOF_SEED";

#[derive(Parser, Debug)]
#[command(name = "irdof", version, about = "Relay-aided interference alignment: DoF tables, constructions and simulation")]
pub struct Cli {
    /// JSON file with the subcommand's options; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Closed-form DoF tables as CSV.
    Dof(DofArgs),
    /// Build a scheme on a seeded channel, verify it and write a JSON report.
    Construct(ConstructArgs),
    /// Monte-Carlo sum rates and the high-SNR slope as CSV.
    Simulate(SimulateArgs),
}

/// Integer list written as `3`, `1..6` (inclusive) or `1,2,5`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RangeRepr", into = "String")]
pub struct IntRange(pub Vec<usize>);

#[derive(Deserialize)]
#[serde(untagged)]
enum RangeRepr {
    One(usize),
    List(Vec<usize>),
    Text(String),
}

impl TryFrom<RangeRepr> for IntRange {
    type Error = String;
    fn try_from(r: RangeRepr) -> Result<Self, String> {
        match r {
            RangeRepr::One(v) => Ok(IntRange(vec![v])),
            RangeRepr::List(v) if !v.is_empty() => Ok(IntRange(v)),
            RangeRepr::List(_) => Err("empty list".into()),
            RangeRepr::Text(s) => s.parse(),
        }
    }
}

impl FromStr for IntRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let num = |x: &str| x.trim().parse::<usize>().map_err(|_| format!("bad integer {x:?} in {s:?}"));
        let values = if let Some((a, b)) = s.split_once("..") {
            let b = b.strip_prefix('=').unwrap_or(b);
            let (a, b) = (num(a)?, num(b)?);
            if a > b {
                return Err(format!("empty range {s:?}"));
            }
            (a..=b).collect()
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        Ok(IntRange(values))
    }
}

impl fmt::Display for IntRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl From<IntRange> for String {
    fn from(r: IntRange) -> String {
        r.to_string()
    }
}

/// SNR list in dB, `40,60`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrList(pub Vec<f64>);

impl FromStr for SnrList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = s
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad SNR {x:?}")))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SnrList(v))
    }
}

fn parse_kind(s: &str) -> Result<SchemeKind, String> {
    match s {
        "cir" => Ok(SchemeKind::Cir),
        "cir-t2" => Ok(SchemeKind::CirT2),
        "ncir" => Ok(SchemeKind::Ncir),
        "simple" => Ok(SchemeKind::Simple),
        _ => Err(format!("unknown scheme {s:?}; expected cir, cir-t2, ncir or simple")),
    }
}

/// Later sources fill only what earlier ones left unset.
pub trait Merge {
    fn merge(self, fallback: Self) -> Self;
}

macro_rules! merge_fields {
    ($t:ty { $($opt:ident),* ; $($flag:ident),* }) => {
        impl Merge for $t {
            fn merge(self, fallback: Self) -> Self {
                Self {
                    $($opt: self.$opt.or(fallback.$opt),)*
                    $($flag: self.$flag || fallback.$flag,)*
                }
            }
        }
    };
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct DofArgs {
    #[arg(long)]
    pub k: Option<usize>,
    /// Coordinated-relay table over `--w` x `--q`.
    #[arg(long)]
    pub cir: bool,
    /// Non-coordinated table over `--u` x `--p`, with the external reference curve.
    #[arg(long)]
    pub ncir: bool,
    /// Best DoF of each family per relay antenna budget `--n` (default `1..K(K-1)`).
    #[arg(long)]
    pub compare: bool,
    /// Add sequential-demultiplexing rows where `W = QZ + 1`.
    #[arg(long)]
    pub improved: bool,
    #[arg(long)]
    pub w: Option<IntRange>,
    #[arg(long)]
    pub q: Option<IntRange>,
    #[arg(long)]
    pub u: Option<IntRange>,
    #[arg(long)]
    pub p: Option<IntRange>,
    #[arg(long)]
    pub n: Option<IntRange>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

merge_fields!(DofArgs { k, w, q, u, p, n, out; cir, ncir, compare, improved });

/// Scheme selection shared by `construct` and `simulate`.
#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SchemeArgs {
    /// cir, cir-t2, ncir or simple; defaults to ncir when `--u` is given, else cir.
    #[arg(long, value_parser = parse_kind)]
    pub scheme: Option<SchemeKind>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long)]
    pub q: Option<usize>,
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long)]
    pub p: Option<usize>,
    /// Alignment growth index.
    #[arg(long)]
    pub n: Option<u32>,
    /// Exponent scale of the bar family; with `--t` and `--upsilon` omitted, the smallest
    /// feasible values are chosen.
    #[arg(long)]
    pub s: Option<u32>,
    #[arg(long)]
    pub t: Option<u32>,
    #[arg(long)]
    pub upsilon: Option<u32>,
    /// Channel seed; falls back to the config, then IRDOF_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Round channel coefficients to multiples of 2^-BITS (cheap exact arithmetic).
    #[arg(long)]
    pub quantize: Option<u32>,
    /// Treat numerical-conditioning advisories as failures (exit 4).
    #[arg(long)]
    pub strict: bool,
}

merge_fields!(SchemeArgs { scheme, k, w, q, u, p, n, s, t, upsilon, seed, quantize; strict });

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scheme: SchemeArgs,
    /// Always re-check every rank decision in exact arithmetic.
    #[arg(long)]
    pub exact: bool,
    /// JSON report destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Merge for ConstructArgs {
    fn merge(self, fallback: Self) -> Self {
        ConstructArgs { scheme: self.scheme.merge(fallback.scheme), exact: self.exact || fallback.exact, out: self.out.or(fallback.out) }
    }
}

#[derive(Args, Debug, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub scheme: SchemeArgs,
    /// SNR points in dB; the slope uses the lowest and highest (default 40,60).
    #[arg(long)]
    pub snr: Option<SnrList>,
    /// Trials per SNR point, at least 10 (default 50).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Extended symbols per trial (default 64).
    #[arg(long)]
    pub symbols: Option<usize>,
    /// Channel realizations considered; the least noisy is kept (default 8).
    #[arg(long)]
    pub candidates: Option<u64>,
    /// JSON-lines trial log destination.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Merge for SimulateArgs {
    fn merge(self, fallback: Self) -> Self {
        SimulateArgs {
            scheme: self.scheme.merge(fallback.scheme),
            snr: self.snr.or(fallback.snr),
            trials: self.trials.or(fallback.trials),
            symbols: self.symbols.or(fallback.symbols),
            candidates: self.candidates.or(fallback.candidates),
            log: self.log.or(fallback.log),
            out: self.out.or(fallback.out),
        }
    }
}

fn need<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

impl SchemeArgs {
    pub fn seed(&self) -> Result<u64, CliError> {
        if let Some(s) = self.seed {
            return Ok(s);
        }
        match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an integer"))),
            Err(_) => Ok(0),
        }
    }

    /// Parameters with feasible `(s, t, υ)` filled in when none were given.
    pub fn params(&self) -> Result<SchemeParams, CliError> {
        let k = need(self.k, "k")?;
        let kind = self.scheme.unwrap_or(if self.u.is_some() { SchemeKind::Ncir } else { SchemeKind::Cir });
        let mut params = match kind {
            SchemeKind::Ncir => {
                if self.w.is_some() || self.q.is_some() {
                    return Err(CliError::Usage("ncir takes --u and --p; W = Q = pU".into()));
                }
                SchemeParams::ncir(k, need(self.u, "u")?, self.p.unwrap_or(1))
            }
            other => {
                if self.u.is_some() || self.p.is_some() {
                    return Err(CliError::Usage(format!("--u and --p apply only to ncir, not {other}")));
                }
                let (w, q) = (need(self.w, "w")?, need(self.q, "q")?);
                match other {
                    SchemeKind::Cir => SchemeParams::cir(k, w, q),
                    SchemeKind::CirT2 => SchemeParams::cir_t2(k, w, q),
                    _ => SchemeParams::simple(k, w, q),
                }
            }
        };
        params.seed = self.seed()?;
        if let Some(bits) = self.quantize {
            params.distribution = ChannelDistribution::QuantizedGaussian { bits };
        }
        params.n = self.n.unwrap_or(1);
        params.validate()?;
        if kind == SchemeKind::Simple {
            return Ok(params);
        }
        if self.s.is_none() && self.t.is_none() && self.upsilon.is_none() {
            return Ok(feasible_for(&params)?.0);
        }
        let s = self.s.or(self.t).unwrap_or(1);
        let n = params.n;
        params = params.with_extension(n, s, self.t.unwrap_or(s), self.upsilon.unwrap_or(1));
        params.validate()?;
        let cert = check_feasibility(&params)?;
        if !cert.holds {
            return Err(CliError::Usage(format!(
                "s = {}, t = {}, upsilon = {} violate the relay budget (Gamma = {}, chi = {}, zeta = {}, c = {})",
                cert.s, cert.t, cert.upsilon, cert.gamma, cert.chi, cert.zeta, cert.c
            )));
        }
        Ok(params)
    }
}

/// Fill unset options from the config file, if any.
pub fn with_config<T: Merge + Serialize + for<'de> Deserialize<'de>>(args: T, config: Option<&PathBuf>) -> Result<T, CliError> {
    let Some(path) = config else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let bad = |e: String| CliError::Usage(format!("{}: {e}", path.display()));
    let raw: serde_json::Map<String, serde_json::Value> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let file: T = serde_json::from_value(raw.clone().into()).map_err(|e| bad(e.to_string()))?;
    // Flattened sections rule out serde's own unknown-field check, so compare key sets.
    let known = serde_json::to_value(&file).map_err(|e| bad(e.to_string()))?;
    if let Some(key) = raw.keys().find(|k| known.get(k.as_str()).is_none()) {
        return Err(bad(format!("unknown option {key:?}")));
    }
    Ok(args.merge(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!("1..4".parse::<IntRange>().unwrap().0, vec![1, 2, 3, 4]);
        assert_eq!("1..=2".parse::<IntRange>().unwrap().0, vec![1, 2]);
        assert_eq!("3,1".parse::<IntRange>().unwrap().0, vec![3, 1]);
        assert!("4..2".parse::<IntRange>().is_err());
        assert!("x".parse::<IntRange>().is_err());
    }

    #[test]
    fn config_uses_flag_names() {
        let a: ConstructArgs = serde_json::from_str(r#"{"k": 3, "w": 2, "q": 2, "seed": 7, "exact": true}"#).unwrap();
        assert_eq!((a.scheme.k, a.scheme.seed, a.exact), (Some(3), Some(7), true));
        let d: DofArgs = serde_json::from_str(r#"{"k": 6, "cir": true, "w": "1..6", "q": [1, 2]}"#).unwrap();
        assert_eq!(d.w.unwrap().0.len(), 6);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let dir = std::env::temp_dir().join(format!("irdof-args-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        std::fs::write(&path, r#"{"k": 3, "bogus": 1}"#).unwrap();
        assert!(with_config(ConstructArgs::default(), Some(&path)).is_err());
        std::fs::write(&path, r#"{"k": 3, "exact": true}"#).unwrap();
        assert!(with_config(ConstructArgs::default(), Some(&path)).unwrap().exact);
    }

    #[test]
    fn flags_override_config() {
        let flags = SchemeArgs { k: Some(4), ..Default::default() };
        let file = SchemeArgs { k: Some(3), w: Some(2), strict: true, ..Default::default() };
        let m = flags.merge(file);
        assert_eq!((m.k, m.w, m.strict), (Some(4), Some(2), true));
    }

    #[test]
    fn feasible_values_filled_in() {
        let a = SchemeArgs { k: Some(3), w: Some(2), q: Some(1), seed: Some(0), ..Default::default() };
        let p = a.params().unwrap();
        assert_eq!((p.s, p.t, p.upsilon), (2, 2, 1));
        let bad = SchemeArgs { s: Some(1), ..a };
        assert!(matches!(bad.params(), Err(CliError::Usage(_))));
    }
}
