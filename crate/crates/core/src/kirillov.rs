//! Finitely supported vectors in the Kirillov model. A vector is a finite
//! family of shells `n -> W(pi^n u)`, each a function on `(O/p^M)^x`
//! stored by discrete logarithm against the canonical generator.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use rustfft::{Fft, FftPlanner};

use crate::characters::MulChar;
use crate::error::{Error, Result};
use crate::local_factors::{gamma_gl2, gamma_gl2_at, GammaMonomial, RepGL2};
use crate::local_field::{cis_turns, LocalElt};
use crate::residue::{base_group, pow_u64, UnitGroupStructure};

/// Components below this (relative to the shell maximum) are treated as
/// round-off when a shell is split into characters.
pub const DFT_NOISE: f64 = 1e-9;

pub struct KirillovCtx {
    p: u64,
    m: u32,
    group: Arc<UnitGroupStructure>,
    units: Vec<u64>,
    dlog: Vec<u32>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for KirillovCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KirillovCtx(p={}, M={})", self.p, self.m)
    }
}

impl KirillovCtx {
    pub fn new(p: u64, m: u32) -> Result<Arc<Self>> {
        if m == 0 {
            return Err(Error::BadPrecision("unit precision must be at least 1".into()));
        }
        let group = base_group(p, m)?;
        let pm = pow_u64(p, m);
        let g = group.generators()[0].a;
        let order = group.order() as usize;
        let mut units = Vec::with_capacity(order);
        let mut dlog = vec![u32::MAX; pm as usize];
        let mut x = 1u64;
        for a in 0..order {
            units.push(x);
            dlog[x as usize] = a as u32;
            x = crate::residue::mul_mod(x, g, pm);
        }
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(order);
        let inv = planner.plan_fft_inverse(order);
        Ok(Arc::new(KirillovCtx { p, m, group, units, dlog, fwd, inv }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn m(&self) -> u32 {
        self.m
    }
    pub fn order(&self) -> usize {
        self.units.len()
    }
    pub fn modulus(&self) -> u64 {
        pow_u64(self.p, self.m)
    }
    pub fn group(&self) -> &Arc<UnitGroupStructure> {
        &self.group
    }
    /// The unit with discrete logarithm `a`.
    pub fn unit(&self, a: usize) -> u64 {
        self.units[a]
    }
    pub fn dlog(&self, u: u64) -> Option<usize> {
        let d = self.dlog[(u % self.modulus()) as usize];
        (d != u32::MAX).then_some(d as usize)
    }

    /// Index `j` of a base character: `chi(g^a) = e^{2 pi i j a / G}`.
    pub fn char_index(&self, chi: &MulChar) -> Result<usize> {
        if chi.is_ext() || chi.conductor() > self.m {
            return Err(Error::Precondition(format!(
                "character of conductor {} not representable at unit precision {}",
                chi.conductor(),
                self.m
            )));
        }
        let ph = chi.int_phase(self.units[1 % self.order()] as i64).expect("unit");
        let j = ph * Rational64::from_integer(self.order() as i64);
        Ok((*j.numer()).rem_euclid(self.order() as i64) as usize)
    }

    pub fn char_of(&self, j: usize, wpi: Rational64) -> MulChar {
        MulChar::new(self.group.clone(), vec![j as u64], wpi).expect("one generator")
    }

    /// `omega_j(-1)` as a sign.
    pub fn sign_at_minus_one(&self, j: usize) -> f64 {
        let a = self.dlog(self.modulus() - 1).expect("unit");
        // -1 = g^{G/2}, so omega_j(-1) = (-1)^j
        debug_assert_eq!(2 * a, self.order());
        if j.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// Character components: `c_j = G^{-1} sum_a W(g^a) e^{-2 pi i j a/G}`.
    pub fn analyze(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.fwd.process(&mut buf);
        let g = self.order() as f64;
        buf.iter_mut().for_each(|x| *x /= g);
        buf
    }

    /// Inverse of [`analyze`](Self::analyze).
    pub fn synthesize(&self, comps: &[Complex64]) -> Vec<Complex64> {
        let mut buf = comps.to_vec();
        self.inv.process(&mut buf);
        buf
    }

    pub fn char_values(&self, j: usize, coeff: Complex64) -> Vec<Complex64> {
        let g = self.order();
        (0..g).map(|a| coeff * cis_turns(Rational64::new(((j * a) % g) as i64, g as i64))).collect()
    }
}

#[derive(Clone, Debug)]
pub struct KirillovVec {
    ctx: Arc<KirillovCtx>,
    shells: BTreeMap<i32, Vec<Complex64>>,
}

impl KirillovVec {
    pub fn zero(ctx: &Arc<KirillovCtx>) -> Self {
        KirillovVec { ctx: ctx.clone(), shells: BTreeMap::new() }
    }

    /// `coeff * [n, omega_j]`.
    pub fn shell(ctx: &Arc<KirillovCtx>, n: i32, j: usize, coeff: Complex64) -> Self {
        let mut v = KirillovVec::zero(ctx);
        v.shells.insert(n, ctx.char_values(j % ctx.order(), coeff));
        v
    }

    pub fn from_fn(ctx: &Arc<KirillovCtx>, lo: i32, hi: i32, f: impl Fn(i32, u64) -> Complex64) -> Self {
        let mut v = KirillovVec::zero(ctx);
        for n in lo..=hi {
            let vals = (0..ctx.order()).map(|a| f(n, ctx.unit(a))).collect();
            v.shells.insert(n, vals);
        }
        v
    }

    /// `v_chi^R(y) = chi(y) 1_{[-R, R]}(v(y))`.
    pub fn v_chi(ctx: &Arc<KirillovCtx>, chi: &MulChar, r: i32) -> Result<Self> {
        let j = ctx.char_index(chi)?;
        let w = chi.wpi_value();
        let mut v = KirillovVec::zero(ctx);
        for n in -r..=r {
            v.shells.insert(n, ctx.char_values(j, w.powi(n)));
        }
        Ok(v)
    }

    pub fn ctx(&self) -> &Arc<KirillovCtx> {
        &self.ctx
    }
    pub fn shells(&self) -> &BTreeMap<i32, Vec<Complex64>> {
        &self.shells
    }
    pub fn shell_values(&self, n: i32) -> Option<&[Complex64]> {
        self.shells.get(&n).map(|v| v.as_slice())
    }
    pub fn is_zero(&self) -> bool {
        self.shells.is_empty()
    }

    /// Smallest `R` with the support inside valuations `[-R, R]`.
    pub fn support_radius(&self) -> i32 {
        self.shells.keys().map(|n| n.abs()).max().unwrap_or(0)
    }

    /// Drop shells that vanish up to `tol`.
    pub fn pruned(mut self, tol: f64) -> Self {
        self.shells.retain(|_, v| v.iter().any(|x| x.norm() > tol));
        self
    }

    pub fn add_shell(&mut self, n: i32, vals: &[Complex64]) {
        let e = self.shells.entry(n).or_insert_with(|| vec![Complex64::zero(); vals.len()]);
        e.iter_mut().zip(vals).for_each(|(a, b)| *a += b);
    }

    pub fn add(&self, other: &KirillovVec) -> Self {
        let mut out = self.clone();
        for (&n, v) in &other.shells {
            out.add_shell(n, v);
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.shells.values_mut().for_each(|v| v.iter_mut().for_each(|x| *x *= c));
        out
    }

    pub fn sub(&self, other: &KirillovVec) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `<W1, W2> = sum_n int_{O^x} W1 conj(W2) d^x u`.
    pub fn inner(&self, other: &KirillovVec) -> Complex64 {
        let g = self.ctx.order() as f64;
        let mut s = Complex64::zero();
        for (n, a) in &self.shells {
            if let Some(b) = other.shells.get(n) {
                s += a.iter().zip(b).map(|(x, y)| x * y.conj()).sum::<Complex64>() / g;
            }
        }
        s
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    pub fn max_abs_diff(&self, other: &KirillovVec) -> f64 {
        let mut worst = 0f64;
        let keys: Vec<i32> = self.shells.keys().chain(other.shells.keys()).copied().collect();
        for n in keys {
            let a = self.shells.get(&n);
            let b = other.shells.get(&n);
            for i in 0..self.ctx.order() {
                let x = a.map_or(Complex64::zero(), |v| v[i]);
                let y = b.map_or(Complex64::zero(), |v| v[i]);
                worst = worst.max((x - y).norm());
            }
        }
        worst
    }

    /// `l_chi(W) = int W(y) conj(chi(y)) d^x y`.
    pub fn ell_chi(&self, chi: &MulChar) -> Result<Complex64> {
        let r = self.support_radius();
        Ok(self.inner(&KirillovVec::v_chi(&self.ctx, chi, r)?))
    }

    /// `(pi(n(x)) W)(y) = psi(x y) W(y)`.
    pub fn act_unipotent(&self, x: &LocalElt) -> Result<Self> {
        let ctx = &self.ctx;
        let Some(vx) = x.valuation() else { return Ok(self.clone()) };
        let mut out = self.clone();
        for (&n, vals) in out.shells.iter_mut() {
            let v = vx + n;
            if v >= 0 {
                continue;
            }
            let k = (-v) as u32;
            if k > ctx.m || x.prec() < k {
                return Err(Error::PrecisionExhausted(format!("psi(x y) on shell {n} needs {k} digits")));
            }
            let pk = pow_u64(ctx.p, k);
            for (a, val) in vals.iter_mut().enumerate() {
                let t = (x.unit() as u128 * ctx.unit(a) as u128 % pk as u128) as i64;
                *val *= cis_turns(Rational64::new(t, pk as i64));
            }
        }
        Ok(out)
    }

    /// `(pi(a(t)) W)(y) = W(t y)`.
    pub fn act_diag(&self, t: &LocalElt) -> Result<Self> {
        let ctx = &self.ctx;
        let vt = t.valuation().ok_or_else(|| Error::Precondition("a(0) is not invertible".into()))?;
        if t.prec() < ctx.m {
            return Err(Error::PrecisionExhausted("diagonal unit needs full unit precision".into()));
        }
        let dt = ctx.dlog(t.unit()).expect("unit");
        let g = ctx.order();
        let mut out = KirillovVec::zero(ctx);
        for (&n, vals) in &self.shells {
            let nv: Vec<Complex64> = (0..g).map(|a| vals[(a + dt) % g]).collect();
            out.shells.insert(n - vt, nv);
        }
        Ok(out)
    }

    /// Split every shell into characters: `(n, j, coefficient)`, dropping
    /// components below [`DFT_NOISE`] relative to the shell maximum.
    pub fn components(&self) -> Vec<(i32, usize, Complex64)> {
        let mut out = Vec::new();
        for (&n, vals) in &self.shells {
            let comps = self.ctx.analyze(vals);
            let top = comps.iter().map(|c| c.norm()).fold(0f64, f64::max);
            if top == 0.0 {
                continue;
            }
            for (j, c) in comps.into_iter().enumerate() {
                if c.norm() > DFT_NOISE * top.max(1e-300) && c.norm() > 1e-14 {
                    out.push((n, j, c));
                }
            }
        }
        out
    }
}

/// How the Weyl element acts on shells. `Plain` takes the gamma monomial
/// as is; `MinusOneTwist` multiplies by `omega(-1)`, the difference between
/// `[[0,1],[1,0]]` and `[[0,1],[-1,0]]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylConvention {
    Plain,
    MinusOneTwist,
}

/// `pi(w)[n, omega_j] = c_j [-n - k_j, omega_j^{-1}]`, with `(c_j, k_j)` the
/// gamma monomial of `pi (x) omega_j^{-1}`.
#[derive(Clone, Debug)]
pub struct WeylTable {
    ctx: Arc<KirillovCtx>,
    entries: Vec<Option<GammaMonomial>>,
    convention: WeylConvention,
}

impl WeylTable {
    pub fn new(pi: &RepGL2, ctx: &Arc<KirillovCtx>, convention: WeylConvention) -> Result<Self> {
        let mut entries = Vec::with_capacity(ctx.order());
        for j in 0..ctx.order() {
            let nu = ctx.char_of(j, Rational64::zero()).inv();
            match gamma_gl2(pi, &nu) {
                Ok(mut g) => {
                    if convention == WeylConvention::MinusOneTwist {
                        g.c *= ctx.sign_at_minus_one(j);
                    }
                    entries.push(Some(g));
                }
                Err(Error::LFactorPresent(_)) => entries.push(None),
                Err(e) => return Err(e),
            }
        }
        Ok(WeylTable { ctx: ctx.clone(), entries, convention })
    }

    pub fn ctx(&self) -> &Arc<KirillovCtx> {
        &self.ctx
    }
    pub fn convention(&self) -> WeylConvention {
        self.convention
    }
    pub fn entry(&self, j: usize) -> Option<GammaMonomial> {
        self.entries[j]
    }

    /// `pi(w)[n, omega_j]`.
    pub fn on_shell(&self, n: i32, j: usize) -> Result<KirillovVec> {
        let g = self.entries[j].ok_or_else(|| Error::LFactorPresent(format!("shell character {j}")))?;
        let inv = (self.ctx.order() - j) % self.ctx.order();
        Ok(KirillovVec::shell(&self.ctx, -n - g.k, inv, g.c))
    }

    /// `pi(w) W`, shell by shell through the character decomposition.
    pub fn apply(&self, w: &KirillovVec) -> Result<KirillovVec> {
        let order = self.ctx.order();
        let mut spectra: BTreeMap<i32, Vec<Complex64>> = BTreeMap::new();
        for (n, j, c) in w.components() {
            let g = self.entries[j].ok_or_else(|| Error::LFactorPresent(format!("shell {n}, character {j}")))?;
            let inv = (order - j) % order;
            let s = spectra.entry(-n - g.k).or_insert_with(|| vec![Complex64::zero(); order]);
            s[inv] += g.c * c;
        }
        let mut out = KirillovVec::zero(&self.ctx);
        for (m, s) in spectra {
            out.shells.insert(m, self.ctx.synthesize(&s));
        }
        Ok(out)
    }
}

/// `pi(w)[n, omega_j]` by extracting Laurent coefficients of
/// `z -> gamma(pi (x) omega_j^{-1} mu_z) z^n` from samples on the unit circle.
pub fn weyl_contour(
    pi: &RepGL2,
    ctx: &Arc<KirillovCtx>,
    convention: WeylConvention,
    n: i32,
    j: usize,
    samples: usize,
) -> Result<KirillovVec> {
    let nu = ctx.char_of(j, Rational64::zero()).inv();
    let sign = match convention {
        WeylConvention::Plain => 1.0,
        WeylConvention::MinusOneTwist => ctx.sign_at_minus_one(j),
    };
    let zs: Vec<Complex64> = (0..samples).map(|l| cis_turns(Rational64::new(l as i64, samples as i64))).collect();
    let mut vals = Vec::with_capacity(samples);
    for &z in &zs {
        vals.push(gamma_gl2_at(pi, &nu, z)? * sign * z.powi(n));
    }
    let inv = (ctx.order() - j) % ctx.order();
    let mut out = KirillovVec::zero(ctx);
    let half = (samples / 2) as i32;
    // the coefficient of z^{-m} in gamma(z) z^n is the shell at valuation m
    for m in -half + 1..half {
        let a: Complex64 = vals.iter().zip(&zs).map(|(v, z)| v * z.powi(m)).sum::<Complex64>() / samples as f64;
        if a.norm() > 1e-12 {
            out.add_shell(m, &ctx.char_values(inv, a));
        }
    }
    Ok(out)
}

/// The two lifts of the Weyl element to `GL_2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeylMatrix {
    /// `[[0,1],[1,0]]`
    Swap,
    /// `[[0,1],[-1,0]]`
    Rotation,
}

impl WeylConvention {
    /// The matrix whose action the convention's shell formula is.
    pub fn matrix(self) -> WeylMatrix {
        match self {
            WeylConvention::Plain => WeylMatrix::Rotation,
            WeylConvention::MinusOneTwist => WeylMatrix::Swap,
        }
    }
}

/// Residual of the braid relation in `PGL_2`, reading `table` as the action
/// of `matrix`:
/// `w n(x) w = n(1/x) w a(-x^2) n(1/x)` for the swap,
/// `w n(x) w = n(-1/x) w a(x^2) n(-1/x)` for the rotation.
pub fn braid_residual(table: &WeylTable, matrix: WeylMatrix, w: &KirillovVec, x: &LocalElt) -> Result<f64> {
    let p = x.p();
    let xi = x.inv().ok_or_else(|| Error::Precondition("x must be nonzero".into()))?;
    let sq = x.mul(x);
    let (xi, t) = match matrix {
        WeylMatrix::Swap => (xi, sq.neg()),
        WeylMatrix::Rotation => (xi.neg(), sq),
    };
    let lhs = table.apply(&table.apply(w)?.act_unipotent(x)?)?;
    let m = table.ctx().m();
    let t = t.with_prec(m);
    let t = LocalElt::new(p, t.valuation().unwrap(), t.unit(), m.min(t.prec()));
    let rhs = table.apply(&w.act_unipotent(&xi)?.act_diag(&t)?)?.act_unipotent(&xi)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// Worst braid residual over shells `[n, omega_j]` with `n` in `shells` and
/// unit `x`; returns the residual and the number of points that could be
/// evaluated (points running into an L-factor or past the unit precision are
/// skipped).
pub fn braid_check(
    table: &WeylTable,
    matrix: WeylMatrix,
    shells: std::ops::RangeInclusive<i32>,
    xs: &[i64],
) -> (f64, usize) {
    let ctx = table.ctx().clone();
    let mut worst = 0f64;
    let mut used = 0;
    for j in 0..ctx.order() {
        for n in shells.clone() {
            for &x in xs {
                let w = KirillovVec::shell(&ctx, n, j, Complex64::new(1.0, 0.0));
                if let Ok(r) = braid_residual(table, matrix, &w, &LocalElt::from_i64(ctx.p(), x, ctx.m())) {
                    worst = worst.max(r);
                    used += 1;
                }
            }
        }
    }
    (worst, used)
}
