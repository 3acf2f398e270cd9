//! Job configuration: JSON on disk, validated into a list of tasks.

use std::path::Path;
use std::sync::Arc;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::characters::{enumerate_x, MulChar};
use crate::error::{Error, Result};
use crate::kirillov::WeylConvention;
use crate::local_factors::{admissible_xi, RepGL2};
use crate::local_field::{LieCoords, LocalElt};
use crate::op_calculus::{SignConvention, Wavepacket};
use crate::relative_character::{packet_grid, OriginCount, PairData, PairShape};
use crate::residue::{base_group, legendre, shared_group, Ext, ResidueRingCfg};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Case {
    Ps,
    Sc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Main,
    Factors,
    Opcalc,
}

/// A character by its discrete-log exponents on the unit group of precision
/// `m`, with `chi(pi) = e^{2 pi i wpi}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharSpec {
    pub m: u32,
    pub exps: Vec<u64>,
    #[serde(default = "zero_pair")]
    pub wpi: [i64; 2],
}

fn zero_pair() -> [i64; 2] {
    [0, 1]
}

impl CharSpec {
    pub fn of(chi: &MulChar) -> Self {
        let w = chi.wpi();
        CharSpec { m: chi.cfg().m, exps: chi.exps().to_vec(), wpi: [*w.numer(), *w.denom()] }
    }

    fn wpi(&self) -> Result<Rational64> {
        if self.wpi[1] == 0 {
            return Err(Error::Config("wpi denominator is zero".into()));
        }
        Ok(Rational64::new(self.wpi[0], self.wpi[1]))
    }

    pub fn build(&self, p: u64, ext: Ext) -> Result<MulChar> {
        let group = match ext {
            Ext::None => base_group(p, self.m)?,
            _ => shared_group(ResidueRingCfg { p, m: self.m, ext })?,
        };
        MulChar::new(group, self.exps.clone(), self.wpi()?)
    }

    pub fn label(&self) -> String {
        let e: Vec<String> = self.exps.iter().map(|x| x.to_string()).collect();
        let mut s = format!("{}:{}", self.m, e.join(","));
        if self.wpi[0] != 0 {
            s.push_str(&format!("@{}/{}", self.wpi[0], self.wpi[1]));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "select")]
pub enum PairSelect {
    /// `rep` is `chi0` for principal series and `xi` for supercuspidals.
    Explicit { rep: CharSpec, chi: CharSpec },
    Sweep {
        #[serde(default = "two")]
        max_rep_cond: u32,
        #[serde(default = "two")]
        max_chi_cond: u32,
        /// Supercuspidal sweeps: bound on `c(xi chi_E^{-1})`.
        #[serde(default)]
        max_twist_cond: Option<u32>,
        /// Keep every `stride`-th pair.
        #[serde(default = "one")]
        stride: usize,
    },
}

fn one() -> usize {
    1
}
fn two() -> u32 {
    2
}

/// `num / p^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coord(pub i64, pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TauSpec {
    pub x: Coord,
    pub y: Coord,
    pub z: Coord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridPolicy {
    Full,
    /// `tau_y = tau_z = 0` with `tau_x` over the window samples.
    Origin,
    Points(Vec<TauSpec>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    #[serde(default = "main_suite")]
    pub suite: Suite,
    #[serde(default = "three")]
    pub p: u64,
    #[serde(default = "ps")]
    pub case: Case,
    /// Quadratic extension for supercuspidals; defaults to the unramified one.
    #[serde(default)]
    pub ext: Option<Ext>,
    #[serde(default = "sweep")]
    pub pairs: PairSelect,
    /// Explicit levels `N`; otherwise `max(1, ceil(c(chi)/2)) ..= max_level`.
    #[serde(default)]
    pub levels: Option<Vec<u32>>,
    #[serde(default = "two")]
    pub max_level: u32,
    #[serde(default = "full")]
    pub grid: GridPolicy,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "negated")]
    pub sign: SignConvention,
    #[serde(default = "plain")]
    pub weyl: WeylConvention,
    #[serde(default = "shells")]
    pub origin: OriginCount,
    /// Character conductor bound for the factor suites.
    #[serde(default)]
    pub max_cond: Option<u32>,
    /// Output prefix: `<out>.ndjson` and `<out>.csv`.
    #[serde(default)]
    pub out: Option<String>,
}

fn main_suite() -> Suite {
    Suite::Main
}
fn three() -> u64 {
    3
}
fn ps() -> Case {
    Case::Ps
}
fn sweep() -> PairSelect {
    PairSelect::Sweep { max_rep_cond: 2, max_chi_cond: 2, max_twist_cond: None, stride: 1 }
}
fn full() -> GridPolicy {
    GridPolicy::Full
}
fn default_tol() -> f64 {
    1e-8
}
fn negated() -> SignConvention {
    SignConvention::Negated
}
fn plain() -> WeylConvention {
    WeylConvention::Plain
}
fn shells() -> OriginCount {
    OriginCount::Shells
}

impl Default for JobConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// One `(pi, chi, N)` with its packets.
#[derive(Clone, Debug)]
pub struct Task {
    pub pair: String,
    pub pd: Arc<PairData>,
    pub level: u32,
    pub packets: Vec<Wavepacket>,
}

fn least_non_residue(p: u64) -> u64 {
    (2..p).find(|&u| legendre(u, p) == -1).expect("odd prime")
}

impl JobConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn ext(&self) -> Result<Ext> {
        match (self.case, self.ext) {
            (Case::Ps, None | Some(Ext::None)) => Ok(Ext::None),
            (Case::Ps, Some(_)) => Err(Error::Config("principal series take no extension".into())),
            (Case::Sc, None) => Ok(Ext::Unramified { u: least_non_residue(self.p) }),
            (Case::Sc, Some(Ext::None)) => Err(Error::Config("supercuspidals need a quadratic extension".into())),
            (Case::Sc, Some(e)) => Ok(e),
        }
    }

    fn check_common(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tolerance must be positive, got {}", self.tol)));
        }
        crate::residue::ring_make(ResidueRingCfg::base(self.p, 1)).map_err(|e| Error::Config(e.to_string()))?;
        let zero = match &self.levels {
            Some(ls) => ls.contains(&0),
            None => self.max_level == 0,
        };
        if zero {
            return Err(Error::Config("hypothesis N ≥ 1 fails: N = 0".into()));
        }
        Ok(())
    }

    fn rep(&self, spec: &CharSpec) -> Result<RepGL2> {
        let ext = self.ext()?;
        match self.case {
            Case::Ps => RepGL2::principal_series(spec.build(self.p, Ext::None)?),
            Case::Sc => RepGL2::supercuspidal(spec.build(self.p, ext)?),
        }
    }

    fn pairs(&self) -> Result<Vec<(String, PairData)>> {
        let kind = match self.case {
            Case::Ps => "ps",
            Case::Sc => "sc",
        };
        match &self.pairs {
            PairSelect::Explicit { rep, chi } => {
                let pi = self.rep(rep).map_err(|e| Error::Config(format!("rep: {e}")))?;
                let ch = chi.build(self.p, Ext::None).map_err(|e| Error::Config(format!("chi: {e}")))?;
                let pd = PairData::new(&pi, &ch).map_err(|e| Error::Config(e.to_string()))?;
                Ok(vec![(format!("{kind}({}) x ({})", rep.label(), chi.label()), pd)])
            }
            PairSelect::Sweep { max_rep_cond, max_chi_cond, max_twist_cond, stride } => {
                if *stride == 0 {
                    return Err(Error::Config("stride must be positive".into()));
                }
                let reps: Vec<MulChar> = match self.case {
                    Case::Ps => enumerate_x(self.p, *max_rep_cond)?.into_iter().filter(|c| c.conductor() > 0).collect(),
                    Case::Sc => admissible_xi(self.p, self.ext()?, (*max_rep_cond).max(1), *max_rep_cond)?,
                };
                let chis = enumerate_x(self.p, *max_chi_cond)?;
                let mut out = Vec::new();
                for r in &reps {
                    let pi = match self.case {
                        Case::Ps => RepGL2::principal_series(r.clone())?,
                        Case::Sc => RepGL2::supercuspidal(r.clone())?,
                    };
                    for c in &chis {
                        let Ok(pd) = PairData::new(&pi, c) else { continue };
                        if let (Some(b), PairShape::Sc { twist_conductor, .. }) = (max_twist_cond, pd.shape) {
                            if twist_conductor > *b {
                                continue;
                            }
                        }
                        let label = format!("{kind}({}) x ({})", CharSpec::of(r).label(), CharSpec::of(c).label());
                        out.push((label, pd));
                    }
                }
                Ok(out.into_iter().step_by(*stride).collect())
            }
        }
    }

    fn levels_for(&self, pd: &PairData, explicit: bool) -> Result<Vec<u32>> {
        let c = pd.chi.conductor();
        match &self.levels {
            Some(ls) => {
                let mut out = Vec::new();
                for &n in ls {
                    if 2 * n >= c {
                        out.push(n);
                    } else if explicit {
                        return Err(Error::Config(format!("hypothesis N ≥ c(χ)/2 fails: N = {n}, c(χ) = {c}")));
                    }
                }
                Ok(out)
            }
            None => Ok((pd.min_level()..=self.max_level).collect()),
        }
    }

    fn packets(&self, pd: &PairData, level: u32) -> Result<Vec<Wavepacket>> {
        match &self.grid {
            GridPolicy::Full => packet_grid(pd, level, self.sign),
            GridPolicy::Origin => Ok(crate::relative_character::tau_x_samples(pd, level, self.sign)?
                .into_iter()
                .map(|x| Wavepacket::new(level, LieCoords::new(x, LocalElt::zero(pd.p()), LocalElt::zero(pd.p()))))
                .collect()),
            GridPolicy::Points(pts) => {
                let p = pd.p();
                let prec = level + pd.c_pair + 4;
                let f = |c: Coord| LocalElt::from_frac(p, c.0, c.1, prec);
                let mut out = Vec::new();
                for t in pts {
                    let a = Wavepacket::new(level, LieCoords::new(f(t.x), f(t.y), f(t.z)));
                    if !a.within_bounds() {
                        return Err(Error::Config(format!(
                            "hypothesis |Tτ| ≤ q^(2N) fails: depths ({}, {}, {}) at N = {level}",
                            a.t(),
                            a.r(),
                            a.s()
                        )));
                    }
                    out.push(a);
                }
                Ok(out)
            }
        }
    }

    /// Check every hypothesis and expand into tasks, in a fixed order.
    pub fn tasks(&self) -> Result<Vec<Task>> {
        self.check_common()?;
        let explicit = matches!(self.pairs, PairSelect::Explicit { .. });
        let mut out = Vec::new();
        for (label, pd) in self.pairs()? {
            let pd = Arc::new(pd);
            for level in self.levels_for(&pd, explicit)? {
                let packets = self.packets(&pd, level)?;
                out.push(Task { pair: label.clone(), pd: pd.clone(), level, packets });
            }
        }
        if out.is_empty() {
            return Err(Error::Config("no (pair, level) satisfies the hypotheses".into()));
        }
        Ok(out)
    }

    /// Validation for the suites that do not expand pairs.
    pub fn check(&self) -> Result<()> {
        self.check_common()?;
        if self.suite == Suite::Main {
            self.tasks()?;
        }
        Ok(())
    }
}
