//! The relative character `H(a) = <Op(a) v_chi^R, v_chi^R>`: a brute-force
//! evaluation in the Kirillov model and the closed-form cell table.

use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::{alpha_of, MulChar};
use crate::error::{Error, Result};
use crate::kirillov::{KirillovCtx, KirillovVec, WeylConvention, WeylTable};
use crate::local_factors::{lambda_ext, pair_factors, twist_ext, RepGL2};
use crate::local_field::{x_count, LieCoords, LocalElt};
use crate::op_calculus::{op_full, OpKind, SignConvention, Wavepacket, DEFAULT_ORDER};
use crate::residue::pow_u64;

/// Coefficient `c` in `pi(w)[n, chi] = c [n - k, chi^{-1}]`.
fn weyl_coefficient(pi: &RepGL2, chi: &MulChar) -> Result<Complex64> {
    Ok(crate::local_factors::gamma_gl2(pi, &chi.inv())?.c)
}

/// Conductor data that decides the closed-form regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PairShape {
    Ps {
        f_flat: u32,
        f_sharp: u32,
    },
    /// `inertia` is `f(E|F)`; `twist_conductor` is `c(xi chi_E^{-1})` in `E`.
    Sc {
        inertia: u32,
        twist_conductor: u32,
    },
}

#[derive(Clone, Debug)]
pub struct PairData {
    pub pi: RepGL2,
    pub chi: MulChar,
    pub c_pair: u32,
    pub alpha_pair: LocalElt,
    pub gamma: Complex64,
    /// `alpha_chi`, zero for unramified `chi`.
    pub alpha_chi: LocalElt,
    pub shape: PairShape,
    /// `lambda(E/F)` for supercuspidals, 1 otherwise. The Weyl coefficients
    /// carry it, so it cancels against `gamma`.
    pub lambda: Complex64,
    /// `gamma` times the conjugate of the Weyl coefficient on the `chi`
    /// shell; the cells are multiplied by it.
    pub prefactor: Complex64,
}

impl PairData {
    pub fn new(pi: &RepGL2, chi: &MulChar) -> Result<Self> {
        if chi.is_ext() {
            return Err(Error::Precondition("chi lives on the base field".into()));
        }
        let pf = pair_factors(pi, chi)?;
        let chib = chi.inv();
        let (shape, lambda) = match pi {
            RepGL2::PrincipalSeries { chi0 } => {
                let f_flat = chi0.mul(&chib)?.conductor();
                let f_sharp = chi0.inv().mul(&chib)?.conductor();
                (PairShape::Ps { f_flat, f_sharp }, Complex64::one())
            }
            RepGL2::Supercuspidal { xi } => {
                let big = twist_ext(xi, &chib)?;
                let ring = big.ring();
                let lam = lambda_ext(ring.p(), ring.cfg().ext)?;
                (PairShape::Sc { inertia: ring.inertia(), twist_conductor: big.conductor() }, lam)
            }
        };
        let alpha_chi = if chi.conductor() == 0 { LocalElt::zero(chi.p()) } else { alpha_of(chi)?.alpha };
        Ok(PairData {
            pi: pi.clone(),
            chi: chi.clone(),
            c_pair: pf.c_pair,
            alpha_pair: pf.alpha_pair,
            gamma: pf.gamma,
            alpha_chi,
            shape,
            lambda,
            prefactor: pf.gamma * weyl_coefficient(pi, chi)?.conj(),
        })
    }

    pub fn p(&self) -> u64 {
        self.chi.p()
    }

    /// Smallest admissible `N`: `N >= c(chi)/2`, and `N >= 1` so that the
    /// torus average converges.
    pub fn min_level(&self) -> u32 {
        self.chi.conductor().div_ceil(2).max(1)
    }

    /// Largest `r`, `s` for which twisting by `X_r` leaves the conductors
    /// alone, so that the fourth cell has a closed form.
    pub fn regime_depth(&self) -> u32 {
        match self.shape {
            PairShape::Ps { f_flat, f_sharp } => f_flat.min(f_sharp) / 2,
            PairShape::Sc { twist_conductor, .. } => twist_conductor / 2,
        }
    }

    /// Whether the fourth cell can be nonzero at level `N`.
    pub fn uncertainty_holds(&self, level: u32) -> bool {
        match self.shape {
            PairShape::Ps { f_flat, f_sharp } => 2 * level >= f_flat.max(f_sharp),
            PairShape::Sc { inertia: 2, twist_conductor } => 2 * level >= twist_conductor,
            PairShape::Sc { .. } => true,
        }
    }

    /// `-sigma pi^N alpha_chi mod O`: the `tau_x` coset the torus average selects.
    pub fn window_center(&self, level: u32, sign: SignConvention) -> Result<Rational64> {
        let p = self.p();
        let scaled = self.alpha_chi.mul(&LocalElt::pi_pow(p, level as i32, self.alpha_chi.prec()));
        let scaled = if sign.sigma() > 0 { scaled.neg() } else { scaled };
        scaled.frac_part()
    }

    pub fn in_window(&self, tau_x: &LocalElt, level: u32, sign: SignConvention) -> Result<bool> {
        Ok(tau_x.frac_part()? == self.window_center(level, sign)?)
    }

    /// `alpha_{pi,chi} / (T tau_y T tau_z)` with `T = pi^{-N}`.
    pub fn fourth_cell_ratio(&self, tau_y: &LocalElt, tau_z: &LocalElt, level: u32) -> Result<LocalElt> {
        let p = self.p();
        let prod = tau_y.mul(tau_z);
        let t2 = LocalElt::pi_pow(p, 2 * level as i32, self.alpha_pair.prec());
        self.alpha_pair
            .mul(&t2)
            .div(&prod)
            .ok_or_else(|| Error::Precondition("fourth cell needs tau_y, tau_z outside O".into()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    /// `tau_y, tau_z` in `O`.
    Origin,
    /// `tau_y` outside `O`, `tau_z` in `O`.
    Y,
    /// `tau_y` in `O`, `tau_z` outside `O`.
    Z,
    Both,
}

impl Cell {
    pub fn of(r: u32, s: u32) -> Self {
        match (r > 0, s > 0) {
            (false, false) => Cell::Origin,
            (true, false) => Cell::Y,
            (false, true) => Cell::Z,
            (true, true) => Cell::Both,
        }
    }
}

/// Which value the origin cell takes. `Shells` counts the `2N - c + 1`
/// shells between `-N` and `N - c`; `Printed` is `2N - c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OriginCount {
    Shells,
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bruteforce,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelCharResult {
    pub value: Complex64,
    pub method: Method,
    pub level: u32,
    pub depths: (u32, u32, u32),
    pub cell: Cell,
    /// Truncation radius of `v_chi^R` (brute force only).
    pub radius: Option<i32>,
    /// Cell value before the prefactor and window (table only).
    pub raw: Option<Rational64>,
}

fn check_level(pd: &PairData, level: u32) -> Result<()> {
    if 2 * level < pd.chi.conductor() {
        return Err(Error::Hypothesis(format!("N >= c(chi)/2 fails: N = {level}, c(chi) = {}", pd.chi.conductor())));
    }
    if level == 0 {
        return Err(Error::Hypothesis("N >= 1 fails".into()));
    }
    Ok(())
}

fn check_packet(a: &Wavepacket) -> Result<()> {
    if !a.within_bounds() {
        return Err(Error::Hypothesis(format!(
            "|T tau| <= q^(2N) fails: depths ({}, {}, {}) at N = {}",
            a.t(),
            a.r(),
            a.s(),
            a.level
        )));
    }
    Ok(())
}

/// The closed-form cell value, before prefactor and window.
pub fn table_raw(pd: &PairData, a: &Wavepacket, origin: OriginCount) -> Result<Rational64> {
    let n = a.level as i64;
    let c = pd.c_pair as i64;
    let q = pd.p();
    let (r, s) = (a.r(), a.s());
    let inv_x = |k: u32| Rational64::new(1, x_count(q, k) as i64);
    Ok(match Cell::of(r, s) {
        Cell::Origin => {
            let extra = if origin == OriginCount::Shells { 1 } else { 0 };
            if 2 * n >= c {
                Rational64::from_integer(2 * n - c + extra)
            } else {
                Rational64::zero()
            }
        }
        Cell::Y => {
            if 2 * n + r as i64 >= c {
                inv_x(r)
            } else {
                Rational64::zero()
            }
        }
        Cell::Z => {
            if 2 * n + s as i64 >= c {
                inv_x(s)
            } else {
                Rational64::zero()
            }
        }
        Cell::Both => {
            let lim = pd.regime_depth();
            if r > lim || s > lim {
                return Err(Error::OutOfRegime(format!("r = {r}, s = {s} exceed {lim}")));
            }
            let beta = pd.fourth_cell_ratio(&a.tau.y, &a.tau.z, a.level)?;
            if beta.in_unit_filtration(r.min(s))? {
                inv_x(r.max(s))
            } else {
                Rational64::zero()
            }
        }
    })
}

/// Table value times the prefactor and the `tau_x` window indicator.
pub fn relchar_table(
    pd: &PairData,
    a: &Wavepacket,
    origin: OriginCount,
    sign: SignConvention,
) -> Result<RelCharResult> {
    check_level(pd, a.level)?;
    check_packet(a)?;
    let raw = table_raw(pd, a, origin)?;
    let window = pd.in_window(&a.tau.x, a.level, sign)?;
    let rv = if window { *raw.numer() as f64 / *raw.denom() as f64 } else { 0.0 };
    Ok(RelCharResult {
        value: pd.prefactor * rv * a.coeff,
        method: Method::Table,
        level: a.level,
        depths: (a.t(), a.r(), a.s()),
        cell: Cell::of(a.r(), a.s()),
        radius: None,
        raw: Some(raw),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteOptions {
    pub sign: SignConvention,
    pub weyl: WeylConvention,
    pub order: [OpKind; 3],
}

impl Default for BruteOptions {
    fn default() -> Self {
        BruteOptions { sign: SignConvention::Negated, weyl: WeylConvention::Plain, order: DEFAULT_ORDER }
    }
}

/// Differences below this between radii `R`, `R+1`, `R+2` count as stable.
pub const STABILITY_TOL: f64 = 1e-10;

/// Brute-force evaluator for one pair at one level; reusable across packets.
#[derive(Clone, Debug)]
pub struct BruteForce {
    level: u32,
    opts: BruteOptions,
    ctx: Arc<KirillovCtx>,
    table: WeylTable,
    radius: i32,
    vs: Vec<KirillovVec>,
}

impl BruteForce {
    pub fn new(pd: &PairData, level: u32, opts: BruteOptions) -> Result<Self> {
        check_level(pd, level)?;
        let m = pd.chi.conductor().max(level);
        let ctx = KirillovCtx::new(pd.p(), m)?;
        let table = WeylTable::new(&pd.pi, &ctx, opts.weyl)?;
        let radius = (level + pd.c_pair + 1) as i32;
        let vs = (0..3).map(|k| KirillovVec::v_chi(&ctx, &pd.chi, radius + k)).collect::<Result<_>>()?;
        Ok(BruteForce { level, opts, ctx, table, radius, vs })
    }

    pub fn ctx(&self) -> &Arc<KirillovCtx> {
        &self.ctx
    }
    pub fn table(&self) -> &WeylTable {
        &self.table
    }
    pub fn options(&self) -> BruteOptions {
        self.opts
    }
    pub fn v(&self) -> &KirillovVec {
        &self.vs[0]
    }

    pub fn eval(&self, a: &Wavepacket) -> Result<RelCharResult> {
        if a.level != self.level {
            return Err(Error::Precondition(format!("packet level {} on an evaluator at {}", a.level, self.level)));
        }
        check_packet(a)?;
        let mut vals = Vec::with_capacity(self.vs.len());
        for v in &self.vs {
            vals.push(op_full(a, v, &self.table, self.opts.order, self.opts.sign)?.inner(v));
        }
        let scale = vals[0].norm().max(1.0);
        if vals.iter().any(|x| (x - vals[0]).norm() > STABILITY_TOL * scale) {
            return Err(Error::PrecisionExhausted(format!("value not stable in R from R = {}", self.radius)));
        }
        Ok(RelCharResult {
            value: vals[0],
            method: Method::Bruteforce,
            level: self.level,
            depths: (a.t(), a.r(), a.s()),
            cell: Cell::of(a.r(), a.s()),
            radius: Some(self.radius),
            raw: None,
        })
    }
}

pub fn relchar_bruteforce(pd: &PairData, a: &Wavepacket, opts: BruteOptions) -> Result<RelCharResult> {
    BruteForce::new(pd, a.level, opts)?.eval(a)
}

fn frac_elt(p: u64, f: Rational64) -> LocalElt {
    if f.is_zero() {
        return LocalElt::zero(p);
    }
    let den = *f.denom() as u64;
    let k = crate::residue::v_p(den, p);
    LocalElt::from_frac(p, *f.numer(), k, k)
}

/// `tau_x` samples: the window center, its mirror, and the center moved by
/// `+-pi^{-1}`.
pub fn tau_x_samples(pd: &PairData, level: u32, sign: SignConvention) -> Result<Vec<LocalElt>> {
    let p = pd.p();
    let c = pd.window_center(level, sign)?;
    let step = Rational64::new(1, p as i64);
    let wrap = |x: Rational64| x - x.floor();
    let mut fr = vec![c, wrap(-c), wrap(c + step), wrap(c - step)];
    let mut seen = Vec::new();
    fr.retain(|x| {
        if seen.contains(x) {
            false
        } else {
            seen.push(*x);
            true
        }
    });
    Ok(fr.into_iter().map(|f| frac_elt(p, f)).collect())
}

/// Coset representatives `pi^{-r} u`, `u` a unit mod `p^r`; just `0` at `r = 0`.
pub fn tau_coset_reps(p: u64, r: u32) -> Vec<LocalElt> {
    if r == 0 {
        return vec![LocalElt::zero(p)];
    }
    let pr = pow_u64(p, r);
    (1..pr).filter(|u| u % p != 0).map(|u| LocalElt::new(p, -(r as i32), u, r)).collect()
}

/// The full packet grid at level `N`: every `tau_y`, `tau_z` coset of depth
/// at most `min(N, regime)` against the `tau_x` samples.
pub fn packet_grid(pd: &PairData, level: u32, sign: SignConvention) -> Result<Vec<Wavepacket>> {
    let p = pd.p();
    let dmax = level.min(pd.regime_depth());
    let xs = tau_x_samples(pd, level, sign)?;
    let mut out = Vec::new();
    for r in 0..=dmax {
        for ty in tau_coset_reps(p, r) {
            for s in 0..=dmax {
                for tz in tau_coset_reps(p, s) {
                    for tx in &xs {
                        out.push(Wavepacket::new(level, LieCoords::new(*tx, ty, tz)));
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_x;

    fn ps_pair(p: u64, m: u32, j0: usize, j: usize) -> Result<PairData> {
        let xs = enumerate_x(p, m).unwrap();
        let pi = RepGL2::principal_series(xs[j0].clone())?;
        PairData::new(&pi, &xs[j])
    }

    fn first_generic(p: u64, m: u32, c0: u32, c: u32) -> PairData {
        let xs = enumerate_x(p, m).unwrap();
        for a in &xs {
            if a.conductor() != c0 {
                continue;
            }
            for b in &xs {
                if b.conductor() != c {
                    continue;
                }
                if let Ok(pd) = PairData::new(&RepGL2::principal_series(a.clone()).unwrap(), b) {
                    return pd;
                }
            }
        }
        panic!("no generic pair");
    }

    #[test]
    fn non_generic_pair_is_rejected() {
        // chi = chi0 makes chi0 chi^{-1} trivial
        let xs = enumerate_x(3, 1).unwrap();
        let e = ps_pair(3, 1, 1, 1).unwrap_err();
        assert!(matches!(e, Error::NonGenericPair(_)), "{e:?} for {:?}", xs[1]);
    }

    #[test]
    fn level_hypothesis_named() {
        let pd = first_generic(3, 2, 1, 2);
        let a = Wavepacket::new(0, LieCoords::zero(3));
        let e = relchar_table(&pd, &a, OriginCount::Shells, SignConvention::Negated).unwrap_err();
        assert!(e.to_string().contains("N >= c(chi)/2"), "{e}");
    }

    #[test]
    fn mixed_cell_value() {
        let pd = first_generic(3, 2, 2, 2);
        let tau = LieCoords::new(LocalElt::zero(3), LocalElt::new(3, -1, 1, 1), LocalElt::zero(3));
        let a = Wavepacket::new(2, tau);
        assert_eq!(table_raw(&pd, &a, OriginCount::Printed).unwrap(), Rational64::new(1, 2));
    }

    #[test]
    fn fourth_cell_out_of_regime_is_reported() {
        let pd = first_generic(5, 2, 1, 1);
        assert_eq!(pd.regime_depth(), 0);
        let t = LocalElt::new(5, -1, 1, 1);
        let a = Wavepacket::new(2, LieCoords::new(LocalElt::zero(5), t, t));
        assert!(matches!(table_raw(&pd, &a, OriginCount::Shells), Err(Error::OutOfRegime(_))));
    }

    #[test]
    fn bruteforce_matches_table_on_small_instances() {
        for (p, c0, c) in [(3, 1, 2), (3, 2, 1), (3, 2, 2), (3, 2, 0), (5, 1, 1), (5, 2, 2)] {
            let pd = first_generic(p, 2, c0, c);
            for level in pd.min_level()..=2 {
                let bf = BruteForce::new(&pd, level, BruteOptions::default()).unwrap();
                for a in packet_grid(&pd, level, SignConvention::Negated).unwrap() {
                    let x = bf.eval(&a).unwrap().value;
                    let t = relchar_table(&pd, &a, OriginCount::Shells, SignConvention::Negated).unwrap().value;
                    assert!((x - t).norm() < 1e-9, "p={p} c0={c0} c={c} N={level} tau={:?}: {x} vs {t}", a.tau);
                }
            }
        }
    }

    #[test]
    fn bruteforce_matches_table_on_supercuspidals() {
        use crate::local_factors::admissible_xi;
        use crate::residue::Ext;
        for ext in [Ext::Unramified { u: 2 }, Ext::Ramified] {
            let mut pairs = Vec::new();
            for xi in admissible_xi(3, ext, 2, 2).unwrap() {
                let pi = RepGL2::supercuspidal(xi).unwrap();
                for chi in enumerate_x(3, 2).unwrap() {
                    if let Ok(pd) = PairData::new(&pi, &chi) {
                        pairs.push(pd);
                    }
                }
            }
            assert!(!pairs.is_empty());
            for pd in pairs.iter().step_by(5) {
                assert!((pd.prefactor - Complex64::new(1.0, 0.0)).norm() < 1e-9);
                for level in pd.min_level()..=2 {
                    assert!(pd.uncertainty_holds(level));
                    let bf = BruteForce::new(pd, level, BruteOptions::default()).unwrap();
                    for a in packet_grid(pd, level, SignConvention::Negated).unwrap() {
                        let x = bf.eval(&a).unwrap().value;
                        let t = relchar_table(pd, &a, OriginCount::Shells, SignConvention::Negated).unwrap().value;
                        assert!((x - t).norm() < 1e-9, "{ext:?} N={level} tau={:?}: {x} vs {t}", a.tau);
                    }
                }
            }
        }
    }
}
