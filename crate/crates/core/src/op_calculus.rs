//! Wavepackets `1_tau^T` and the operators `Op^-`, `Op^0`, `Op^+` built from
//! the Iwahori factorization of `K(N)`, plus the property checks of the
//! calculus (commutativity, the star-product character, microlocalization).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kirillov::{KirillovCtx, KirillovVec, WeylTable};
use crate::local_field::{cis_turns, frac_turns, LieCoords, LocalElt};
use crate::residue::{inv_mod, padic_exp, pow_u64, v_p, v_p_factorial};

/// Sign `sigma` in the packet kernels `psi(sigma u tau)`. `Literal` is
/// `sigma = +1`; `Negated` is `sigma = -1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    Literal,
    Negated,
}

impl SignConvention {
    pub fn sigma(self) -> i64 {
        match self {
            SignConvention::Literal => 1,
            SignConvention::Negated => -1,
        }
    }
}

fn depth(t: &LocalElt) -> u32 {
    t.valuation().map_or(0, |v| (-v).max(0) as u32)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wavepacket {
    pub level: u32,
    pub tau: LieCoords,
    pub coeff: Complex64,
}

impl Wavepacket {
    pub fn new(level: u32, tau: LieCoords) -> Self {
        Wavepacket { level, tau, coeff: Complex64::new(1.0, 0.0) }
    }
    pub fn t(&self) -> u32 {
        depth(&self.tau.x)
    }
    pub fn r(&self) -> u32 {
        depth(&self.tau.y)
    }
    pub fn s(&self) -> u32 {
        depth(&self.tau.z)
    }
    /// `|T tau| <= q^{2N}`.
    pub fn within_bounds(&self) -> bool {
        self.t().max(self.r()).max(self.s()) <= self.level
    }
}

/// Fractional parts of the coordinates: the coset of `tau` modulo `O^3`.
pub fn coset_key(tau: &LieCoords) -> Result<[Rational64; 3]> {
    Ok([tau.x.frac_part()?, tau.y.frac_part()?, tau.z.frac_part()?])
}

#[derive(Clone, Debug, Default)]
pub struct WavepacketSum {
    pub level: u32,
    pub terms: Vec<Wavepacket>,
}

impl WavepacketSum {
    /// Value of `sum a(tau_i) 1_{tau_i}` at `tau` (cosets modulo `O^3`).
    pub fn eval(&self, tau: &LieCoords) -> Result<Complex64> {
        let key = coset_key(tau)?;
        let mut s = Complex64::zero();
        for w in &self.terms {
            if coset_key(&w.tau)? == key {
                s += w.coeff;
            }
        }
        Ok(s)
    }
}

/// Split a function given on coset representatives into packets, one per
/// coset with a nonzero value.
pub fn wavepacket_decompose(samples: &[(LieCoords, Complex64)], level: u32) -> Result<WavepacketSum> {
    let mut seen: BTreeMap<[Rational64; 3], (LieCoords, Complex64)> = BTreeMap::new();
    for (tau, a) in samples {
        let key = coset_key(tau)?;
        if let Some((_, b)) = seen.get(&key) {
            if b != a {
                return Err(Error::Precondition("samples are not constant on cosets".into()));
            }
            continue;
        }
        seen.insert(key, (*tau, *a));
    }
    let terms = seen
        .into_values()
        .filter(|(_, a)| *a != Complex64::zero())
        .map(|(tau, coeff)| Wavepacket { level, tau, coeff })
        .collect();
    Ok(WavepacketSum { level, terms })
}

/// `(Op^+ W)(h) = 1_O(sigma tau_y + pi^N h) W(h)`.
pub fn op_plus(tau_y: &LocalElt, w: &KirillovVec, level: u32, sign: SignConvention) -> Result<KirillovVec> {
    let ctx = w.ctx().clone();
    let r = depth(tau_y);
    if r > ctx.m() || tau_y.prec() < r {
        return Err(Error::PrecisionExhausted(format!("tau_y at depth {r}")));
    }
    let pr = pow_u64(ctx.p(), r);
    let target = if r == 0 {
        0
    } else {
        let t = tau_y.unit() % pr;
        if sign.sigma() > 0 {
            (pr - t) % pr
        } else {
            t
        }
    };
    let mut out = KirillovVec::zero(&ctx);
    for (&n, vals) in w.shells() {
        let k = level as i32 + n;
        let keep = if r == 0 { k >= 0 } else { k == -(r as i32) };
        if !keep {
            continue;
        }
        if r == 0 {
            out.add_shell(n, vals);
            continue;
        }
        let masked: Vec<Complex64> = vals
            .iter()
            .enumerate()
            .map(|(a, &v)| if ctx.unit(a) % pr == target { v } else { Complex64::zero() })
            .collect();
        out.add_shell(n, &masked);
    }
    Ok(out)
}

/// The averaged torus action `W -> int_O psi(sigma u tau_x) pi(a(exp(pi^N u))) W du`,
/// stored as a convolution kernel on discrete logarithms.
#[derive(Clone, Debug)]
pub struct ZeroKernel {
    ctx: Arc<KirillovCtx>,
    entries: Vec<(usize, Complex64)>,
}

impl ZeroKernel {
    pub fn new(ctx: &Arc<KirillovCtx>, tau_x: &LocalElt, level: u32, sign: SignConvention) -> Result<Self> {
        if level == 0 {
            return Err(Error::Precondition("Op^0 needs N >= 1 for exp to converge".into()));
        }
        let p = ctx.p();
        let m = ctx.m();
        let t = depth(tau_x);
        if tau_x.prec() < t {
            return Err(Error::PrecisionExhausted(format!("tau_x at depth {t}")));
        }
        let l = m.saturating_sub(level).max(t);
        let pl = pow_u64(p, l);
        let pt = pow_u64(p, t);
        let pn = pow_u64(p, level.min(m + 1));
        let mut acc = vec![Complex64::zero(); ctx.order()];
        for u in 0..pl {
            let e = if level >= m { 1 } else { padic_exp(p, pn * u, m) };
            let d = ctx.dlog(e).expect("exp lands in the units");
            let ph = if t == 0 {
                Rational64::zero()
            } else {
                let num = (tau_x.unit() as i128 * u as i128 * sign.sigma() as i128).rem_euclid(pt as i128);
                Rational64::new(num as i64, pt as i64)
            };
            acc[d] += cis_turns(ph);
        }
        let entries =
            acc.into_iter().enumerate().filter(|(_, c)| c.norm() > 1e-12).map(|(d, c)| (d, c / pl as f64)).collect();
        Ok(ZeroKernel { ctx: ctx.clone(), entries })
    }

    pub fn apply(&self, w: &KirillovVec) -> KirillovVec {
        let g = self.ctx.order();
        let mut out = KirillovVec::zero(&self.ctx);
        for (&n, vals) in w.shells() {
            let mut nv = vec![Complex64::zero(); g];
            for (a, slot) in nv.iter_mut().enumerate() {
                for &(d, c) in &self.entries {
                    *slot += c * vals[(a + d) % g];
                }
            }
            if nv.iter().any(|x| x.norm() > 1e-13) {
                out.add_shell(n, &nv);
            }
        }
        out
    }
}

pub fn op_zero(tau_x: &LocalElt, w: &KirillovVec, level: u32, sign: SignConvention) -> Result<KirillovVec> {
    Ok(ZeroKernel::new(w.ctx(), tau_x, level, sign)?.apply(w))
}

/// `Op^- = pi(w) Op^+ pi(w)`, fed by the `z` coordinate.
pub fn op_minus(
    tau_z: &LocalElt,
    w: &KirillovVec,
    table: &WeylTable,
    level: u32,
    sign: SignConvention,
) -> Result<KirillovVec> {
    table.apply(&op_plus(tau_z, &table.apply(w)?, level, sign)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OpKind {
    Minus,
    Zero,
    Plus,
}

/// Compositions are written left to right; the rightmost acts first.
pub const DEFAULT_ORDER: [OpKind; 3] = [OpKind::Minus, OpKind::Zero, OpKind::Plus];

pub const ALL_ORDERS: [[OpKind; 3]; 6] = [
    [OpKind::Minus, OpKind::Zero, OpKind::Plus],
    [OpKind::Minus, OpKind::Plus, OpKind::Zero],
    [OpKind::Zero, OpKind::Minus, OpKind::Plus],
    [OpKind::Zero, OpKind::Plus, OpKind::Minus],
    [OpKind::Plus, OpKind::Minus, OpKind::Zero],
    [OpKind::Plus, OpKind::Zero, OpKind::Minus],
];

/// `Op(a_tau) W` with the factors composed in `order`, scaled by the packet
/// coefficient.
pub fn op_full(
    a: &Wavepacket,
    w: &KirillovVec,
    table: &WeylTable,
    order: [OpKind; 3],
    sign: SignConvention,
) -> Result<KirillovVec> {
    if !a.within_bounds() {
        return Err(Error::Precondition(format!(
            "|T tau| exceeds q^(2N): depths ({}, {}, {}) at N = {}",
            a.t(),
            a.r(),
            a.s(),
            a.level
        )));
    }
    let kernel = ZeroKernel::new(w.ctx(), &a.tau.x, a.level, sign)?;
    let mut v = w.clone();
    for op in order.iter().rev() {
        v = match op {
            OpKind::Plus => op_plus(&a.tau.y, &v, a.level, sign)?,
            OpKind::Zero => kernel.apply(&v),
            OpKind::Minus => op_minus(&a.tau.z, &v, table, a.level, sign)?,
        };
    }
    Ok(v.scale(a.coeff))
}

/// Largest pairwise difference between the six orderings applied to `w`.
pub fn ordering_spread(a: &Wavepacket, w: &KirillovVec, table: &WeylTable, sign: SignConvention) -> Result<f64> {
    let outs: Vec<KirillovVec> = ALL_ORDERS.iter().map(|&o| op_full(a, w, table, o, sign)).collect::<Result<_>>()?;
    let mut worst = 0f64;
    for i in 0..outs.len() {
        for j in i + 1..outs.len() {
            worst = worst.max(outs[i].max_abs_diff(&outs[j]));
        }
    }
    Ok(worst)
}

/// Residual of `pi(n(x)) W = psi(s u tau_y) W` over `x = pi^N u`,
/// together with the same for `n_-(x) = w n(x) w` and `tau_z`.
pub fn microlocal_residual(w: &KirillovVec, a: &Wavepacket, table: &WeylTable, s: i64, units: &[u64]) -> Result<f64> {
    let ctx = w.ctx();
    let p = ctx.p();
    let prec = ctx.m() + a.level;
    let mut worst = 0f64;
    let ww = table.apply(w)?;
    for &u in units {
        let x = LocalElt::from_i64(p, (pow_u64(p, a.level) * u) as i64, prec);
        let ey = cis_turns(frac_turns(phase_prod(&a.tau.y, u)? * Rational64::from_integer(s)));
        let up = w.act_unipotent(&x)?;
        worst = worst.max(up.max_abs_diff(&w.scale(ey)));
        let ez = cis_turns(frac_turns(phase_prod(&a.tau.z, u)? * Rational64::from_integer(s)));
        let down = table.apply(&ww.act_unipotent(&x)?)?;
        worst = worst.max(down.max_abs_diff(&w.scale(ez)));
    }
    Ok(worst)
}

fn phase_prod(t: &LocalElt, u: u64) -> Result<Rational64> {
    let r = depth(t);
    if r == 0 {
        return Ok(Rational64::zero());
    }
    if t.prec() < r {
        return Err(Error::PrecisionExhausted("packet coordinate".into()));
    }
    let pr = pow_u64(t.p(), r);
    Ok(Rational64::new(((t.unit() as u128 * u as u128) % pr as u128) as i64, pr as i64))
}

/// The sign `s` for which `pi(n(x)) Op(a) W = psi(s x T tau_y) Op(a) W`, if
/// exactly one of `+1, -1` works; residuals for both are returned.
pub fn microlocal_sign(
    w: &KirillovVec,
    a: &Wavepacket,
    table: &WeylTable,
    units: &[u64],
    tol: f64,
) -> Result<(Option<i64>, f64, f64)> {
    let plus = microlocal_residual(w, a, table, 1, units)?;
    let minus = microlocal_residual(w, a, table, -1, units)?;
    let s = match (plus < tol, minus < tol) {
        (true, false) => Some(1),
        (false, true) => Some(-1),
        _ => None,
    };
    Ok((s, plus, minus))
}

/// 2x2 matrices over `Z / p^prec`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Mat {
    e: [[u128; 2]; 2],
}

struct MatRing {
    p: u64,
    modulus: u128,
}

impl MatRing {
    fn new(p: u64, prec: u32) -> Self {
        MatRing { p, modulus: pow_u64(p, prec) as u128 }
    }
    fn id(&self) -> Mat {
        Mat { e: [[1, 0], [0, 1]] }
    }
    fn sl2_mat(&self, c: [i64; 3]) -> Mat {
        let m = self.modulus as i128;
        let f = |x: i64| (x as i128).rem_euclid(m) as u128;
        Mat { e: [[f(c[0]), f(c[1])], [f(c[2]), f(-c[0])]] }
    }
    fn mul(&self, a: &Mat, b: &Mat) -> Mat {
        let m = self.modulus;
        let mut e = [[0u128; 2]; 2];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = (a.e[i][0] * b.e[0][j] + a.e[i][1] * b.e[1][j]) % m;
            }
        }
        Mat { e }
    }
    fn add_scaled(&self, acc: &mut Mat, x: &Mat, num_unit: u128, div_p: u32, negate: bool) {
        let m = self.modulus;
        let pd = pow_u64(self.p, div_p) as u128;
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(x.e[i][j] % pd, 0, "inexact division in matrix series");
                let mut t = (x.e[i][j] / pd) * num_unit % m;
                if negate {
                    t = (m - t) % m;
                }
                acc.e[i][j] = (acc.e[i][j] + t) % m;
            }
        }
    }
    fn sub_id(&self, a: &Mat) -> Mat {
        let m = self.modulus;
        let mut r = *a;
        r.e[0][0] = (r.e[0][0] + m - 1) % m;
        r.e[1][1] = (r.e[1][1] + m - 1) % m;
        r
    }
    fn unit_inv(&self, k: u64) -> u128 {
        inv_mod(k % self.modulus as u64, self.modulus as u64).expect("unit") as u128
    }
    /// `exp(X)` for `X` with entries in `p`, terms up to `kmax`.
    fn exp(&self, x: &Mat, kmax: u64) -> Mat {
        let mut acc = self.id();
        let mut power = self.id();
        let mut unit_fact = 1u64;
        for k in 1..=kmax {
            power = self.mul(&power, x);
            let vk = v_p(k, self.p);
            unit_fact = (unit_fact as u128 * (k / pow_u64(self.p, vk)) as u128 % self.modulus) as u64;
            let inv = self.unit_inv(unit_fact);
            self.add_scaled(&mut acc, &power, inv, v_p_factorial(k, self.p), false);
        }
        acc
    }
    /// `log(G)` for `G = 1 + Y` with `Y` in `p`.
    fn log(&self, g: &Mat, kmax: u64) -> Mat {
        let y = self.sub_id(g);
        let mut acc = Mat { e: [[0, 0], [0, 0]] };
        let mut power = self.id();
        for k in 1..=kmax {
            power = self.mul(&power, &y);
            let vk = v_p(k, self.p);
            let inv = self.unit_inv(k / pow_u64(self.p, vk));
            self.add_scaled(&mut acc, &power, inv, vk, k % 2 == 0);
        }
        acc
    }
}

/// `x * y = log(exp(x) exp(y))` for `x, y` in `p sl_2`, given by
/// coordinates `(a, b, c)` of `[[a, b], [c, -a]]`, reduced modulo `p^m`.
pub fn star(p: u64, x: [i64; 3], y: [i64; 3], m: u32) -> [i64; 3] {
    let kmax = 2 * m as u64 + 2;
    let extra = v_p_factorial(kmax, p);
    let ring = MatRing::new(p, m + extra + 1);
    let ex = ring.exp(&ring.sl2_mat(x), kmax);
    let ey = ring.exp(&ring.sl2_mat(y), kmax);
    let l = ring.log(&ring.mul(&ex, &ey), kmax);
    let pm = pow_u64(p, m) as u128;
    let red = |v: u128| (v % pm) as i64;
    let out = [red(l.e[0][0]), red(l.e[0][1]), red(l.e[1][0])];
    debug_assert_eq!((l.e[0][0] + l.e[1][1]) % pm, 0);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct StarReport {
    pub checked: u64,
    pub failures: u64,
}

/// Exhaustive check of `<x, xi><y, xi> = <x * y, xi>` for `x, y` in
/// `k(N) / p^m` and `xi` in `p^{-m} / O` (dual coordinates).
pub fn check_star_character(p: u64, level: u32, m: u32) -> Result<StarReport> {
    if level == 0 {
        return Err(Error::Precondition("k(N) needs N >= 1".into()));
    }
    let pm = pow_u64(p, m) as i64;
    let pn = pow_u64(p, level.min(m)) as i64;
    let steps: Vec<i64> = (0..pm).step_by(pn as usize).collect();
    let mut elts = Vec::new();
    for &a in &steps {
        for &b in &steps {
            for &c in &steps {
                elts.push([a, b, c]);
            }
        }
    }
    let pair = |v: &[i64; 3], xi: &[i64; 3]| -> i64 { (2 * v[0] * xi[0] + v[1] * xi[1] + v[2] * xi[2]).rem_euclid(pm) };
    let mut xis = Vec::new();
    for a in 0..pm {
        for b in 0..pm {
            for c in 0..pm {
                xis.push([a, b, c]);
            }
        }
    }
    let mut checked = 0;
    let mut failures = 0;
    for x in &elts {
        for y in &elts {
            let xy = star(p, *x, *y, m);
            for xi in &xis {
                checked += 1;
                if (pair(x, xi) + pair(y, xi)).rem_euclid(pm) != pair(&xy, xi) {
                    failures += 1;
                }
            }
        }
    }
    Ok(StarReport { checked, failures })
}

/// Largest deviation of the finite Fourier transform of `a_tau^vee` from the
/// indicator of `T tau + T O^3`, over dual points `xi` in `p^{-depth} / p^{depth}`
/// per coordinate (the x coordinate pairs with weight 2).
pub fn fourier_support_residual(p: u64, level: u32, tau: [i64; 3], tau_depth: u32, depth: u32) -> Result<f64> {
    if depth < level + tau_depth || level == 0 {
        return Err(Error::Precondition("grid too coarse for the packet".into()));
    }
    // work in units of p^{-depth}: T tau has numerator tau * p^{depth - N - tau_depth}
    let pd = pow_u64(p, depth) as i64;
    let scale = pow_u64(p, depth - level - tau_depth) as i64;
    let nx = pow_u64(p, depth - level) as i64;
    let xs: Vec<i64> = (0..nx).map(|k| k * pow_u64(p, level) as i64).collect();
    let mut worst = 0f64;
    for (coord, &t) in tau.iter().enumerate() {
        let weight = if coord == 0 { 2 } else { 1 };
        let center = t * scale;
        for xi in 0..pd * pd {
            let xi = xi - pd * pd / 2;
            let mut s = Complex64::zero();
            for &x in &xs {
                let num = (weight * x * (center - xi)).rem_euclid(pd);
                s += cis_turns(Rational64::new(num, pd));
            }
            let s = s / xs.len() as f64;
            // indicator of xi in T tau + p^{-N}: (center - xi) divisible by p^{depth - N}
            let ind = if (center - xi).rem_euclid(pow_u64(p, depth - level) as i64) == 0 { 1.0 } else { 0.0 };
            worst = worst.max((s - Complex64::new(ind, 0.0)).norm());
        }
    }
    Ok(worst)
}
