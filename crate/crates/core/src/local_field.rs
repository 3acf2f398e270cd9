//! Truncated elements of `Q_p`, the standard additive character, Haar
//! volumes, and coordinates on the Lie algebra of PGL(2) and its dual.

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::residue::{inv_mod, mul_mod, pow_u64, v_p};

/// `e^{2 pi i r}` for a phase given in turns.
pub fn cis_turns(r: Rational64) -> Complex64 {
    let t = (*r.numer() as f64) / (*r.denom() as f64);
    Complex64::from_polar(1.0, std::f64::consts::TAU * t)
}

/// Reduce a phase to `[0, 1)`.
pub fn frac_turns(r: Rational64) -> Rational64 {
    r - r.floor()
}

/// `x = p^val * unit` with `unit` known modulo `p^prec`; zero has no valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LocalElt {
    p: u64,
    val: Option<i32>,
    unit: u64,
    prec: u32,
}

impl LocalElt {
    pub fn zero(p: u64) -> Self {
        LocalElt { p, val: None, unit: 0, prec: 0 }
    }

    /// `p^val * unit`; a unit divisible by `p` is renormalized.
    pub fn new(p: u64, val: i32, unit: u64, prec: u32) -> Self {
        if prec == 0 {
            return LocalElt { p, val: Some(val), unit: 0, prec: 0 };
        }
        let pm = pow_u64(p, prec);
        let u = unit % pm;
        if u == 0 {
            return LocalElt::zero(p);
        }
        let w = v_p(u, p);
        LocalElt { p, val: Some(val + w as i32), unit: u / pow_u64(p, w), prec: prec - w }
    }

    pub fn from_i64(p: u64, n: i64, prec: u32) -> Self {
        if n == 0 {
            return LocalElt::zero(p);
        }
        let w = v_p(n.unsigned_abs(), p);
        let pm = pow_u64(p, prec) as i64;
        let u = (n / pow_u64(p, w) as i64).rem_euclid(pm) as u64;
        LocalElt { p, val: Some(w as i32), unit: u, prec }
    }

    /// `num / p^k`.
    pub fn from_frac(p: u64, num: i64, k: u32, prec: u32) -> Self {
        let x = LocalElt::from_i64(p, num, prec);
        match x.val {
            None => x,
            Some(v) => LocalElt { val: Some(v - k as i32), ..x },
        }
    }

    /// `p^k`, exactly.
    pub fn pi_pow(p: u64, k: i32, prec: u32) -> Self {
        LocalElt { p, val: Some(k), unit: 1 % pow_u64(p, prec.max(1)), prec }
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn is_zero(&self) -> bool {
        self.val.is_none()
    }
    pub fn valuation(&self) -> Option<i32> {
        self.val
    }
    /// Valuation with zero mapped to `i32::MAX`.
    pub fn val_or_max(&self) -> i32 {
        self.val.unwrap_or(i32::MAX)
    }
    pub fn unit(&self) -> u64 {
        self.unit
    }
    pub fn prec(&self) -> u32 {
        self.prec
    }
    pub fn is_integral(&self) -> bool {
        self.val.is_none_or(|v| v >= 0)
    }
    /// Absolute precision: known modulo `p^(val+prec)`.
    fn abs_prec(&self) -> i64 {
        match self.val {
            None => i64::MAX,
            Some(v) => v as i64 + self.prec as i64,
        }
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        match self.val {
            None => *self,
            Some(v) => LocalElt::new(self.p, v, self.unit, prec.min(self.prec)),
        }
    }

    pub fn neg(&self) -> Self {
        match self.val {
            None => *self,
            Some(_) => {
                let pm = pow_u64(self.p, self.prec);
                LocalElt { unit: (pm - self.unit) % pm, ..*self }
            }
        }
    }

    pub fn mul(&self, other: &LocalElt) -> Self {
        match (self.val, other.val) {
            (Some(a), Some(b)) => {
                let prec = self.prec.min(other.prec);
                let pm = pow_u64(self.p, prec);
                LocalElt { p: self.p, val: Some(a + b), unit: mul_mod(self.unit, other.unit, pm), prec }
            }
            _ => LocalElt::zero(self.p),
        }
    }

    pub fn inv(&self) -> Option<Self> {
        let v = self.val?;
        let pm = pow_u64(self.p, self.prec);
        Some(LocalElt { val: Some(-v), unit: inv_mod(self.unit, pm)?, ..*self })
    }

    pub fn div(&self, other: &LocalElt) -> Option<Self> {
        Some(self.mul(&other.inv()?))
    }

    pub fn add(&self, other: &LocalElt) -> Self {
        let (v1, v2) = match (self.val, other.val) {
            (None, _) => return *other,
            (_, None) => return *self,
            (Some(a), Some(b)) => (a, b),
        };
        let v = v1.min(v2);
        let abs = self.abs_prec().min(other.abs_prec());
        let rel = abs - v as i64;
        if rel <= 0 {
            return LocalElt::zero(self.p);
        }
        let rel = rel as u32;
        let pm = pow_u64(self.p, rel);
        let mut s = 0u64;
        for (vi, ui) in [(v1, self.unit), (v2, other.unit)] {
            let shift = (vi - v) as u32;
            if shift < rel {
                s = (s + mul_mod(ui % pm, pow_u64(self.p, shift), pm)) % pm;
            }
        }
        LocalElt::new(self.p, v, s, rel)
    }

    pub fn sub(&self, other: &LocalElt) -> Self {
        self.add(&other.neg())
    }

    pub fn pow(&self, e: i32) -> Option<Self> {
        let base = if e < 0 { self.inv()? } else { *self };
        let mut r = LocalElt::pi_pow(self.p, 0, base.prec);
        for _ in 0..e.unsigned_abs() {
            r = r.mul(&base);
        }
        Some(r)
    }

    /// `|x| = q^{-v(x)}`.
    pub fn abs(&self) -> Rational64 {
        match self.val {
            None => Rational64::zero(),
            Some(v) => qpow(self.p, -v),
        }
    }

    /// Whether `x` lies in `U(n) = 1 + p^n` (for `n = 0`: in `O^x`).
    pub fn in_unit_filtration(&self, n: u32) -> Result<bool> {
        if self.val != Some(0) {
            return Ok(false);
        }
        if n == 0 {
            return Ok(true);
        }
        if self.prec < n {
            return Err(Error::PrecisionExhausted(format!("unit known to {} digits, need {n}", self.prec)));
        }
        Ok(self.unit % pow_u64(self.p, n) == 1)
    }

    /// Fractional part in `[0, 1)`.
    pub fn frac_part(&self) -> Result<Rational64> {
        let v = match self.val {
            None => return Ok(Rational64::zero()),
            Some(v) if v >= 0 => return Ok(Rational64::zero()),
            Some(v) => v,
        };
        let k = (-v) as u32;
        if self.prec < k {
            return Err(Error::PrecisionExhausted(format!("valuation {v} needs {k} unit digits, have {}", self.prec)));
        }
        let den = pow_u64(self.p, k);
        Ok(Rational64::new((self.unit % den) as i64, den as i64))
    }

    /// Canonical representative of `x + O` as `num / p^k`.
    pub fn mod_o(&self) -> Result<LocalElt> {
        let f = self.frac_part()?;
        if f.is_zero() {
            return Ok(LocalElt::zero(self.p));
        }
        let k = v_p(*f.denom() as u64, self.p);
        Ok(LocalElt::from_frac(self.p, *f.numer(), k, k.max(1) + 8))
    }

    /// Unit part as an integer modulo `p^n` (requires `prec >= n`).
    pub fn unit_mod(&self, n: u32) -> Result<u64> {
        if self.val.is_none() {
            return Err(Error::Precondition("zero has no unit part".into()));
        }
        if self.prec < n {
            return Err(Error::PrecisionExhausted(format!("need {n} unit digits, have {}", self.prec)));
        }
        Ok(self.unit % pow_u64(self.p, n))
    }

    /// Rational value when `x` has finite expansion at its precision.
    pub fn to_rational(&self) -> Rational64 {
        match self.val {
            None => Rational64::zero(),
            Some(v) => Rational64::from_integer(self.unit as i64) * qpow(self.p, v),
        }
    }
}

impl fmt::Display for LocalElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.to_rational();
        if r.is_integer() {
            write!(f, "{}", r.numer())
        } else {
            write!(f, "{}/{}", r.numer(), r.denom())
        }
    }
}

/// `q^k` as an exact rational.
pub fn qpow(q: u64, k: i32) -> Rational64 {
    if k >= 0 {
        Rational64::from_integer(pow_u64(q, k as u32) as i64)
    } else {
        Rational64::new(1, pow_u64(q, (-k) as u32) as i64)
    }
}

pub fn psi_phase(x: &LocalElt) -> Result<Rational64> {
    x.frac_part()
}

/// `psi_t(x) = psi(t x)` for the standard unramified `psi(x) = e^{2 pi i frac(x)}`.
pub fn psi_eval(t: &LocalElt, x: &LocalElt) -> Result<Complex64> {
    Ok(cis_turns(t.mul(x).frac_part()?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Measure {
    /// `du` with `vol(O) = 1`.
    Additive,
    /// `d^x u` with `vol(O^x) = 1`.
    Multiplicative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarSet {
    /// The ball `p^k`.
    Ball { k: i32 },
    /// The shell `p^k U(n)`; `n = 0` is `p^k O^x`.
    Shell { k: i32, n: u32 },
}

/// `|X_n|`, the number of characters of `(O/p^n)^x`.
pub fn x_count(q: u64, n: u32) -> u64 {
    if n == 0 {
        1
    } else {
        pow_u64(q, n - 1) * (q - 1)
    }
}

pub fn haar_volume(set: HaarSet, measure: Measure, q: u64) -> Result<Rational64> {
    match (set, measure) {
        (HaarSet::Ball { k }, Measure::Additive) => Ok(qpow(q, -k)),
        (HaarSet::Ball { .. }, Measure::Multiplicative) => {
            Err(Error::Unsupported("a ball around 0 has infinite multiplicative volume".into()))
        }
        (HaarSet::Shell { n, .. }, Measure::Multiplicative) => Ok(Rational64::new(1, x_count(q, n) as i64)),
        (HaarSet::Shell { k, n }, Measure::Additive) => {
            let units = if n == 0 { Rational64::new(q as i64 - 1, q as i64) } else { qpow(q, -(n as i32)) };
            Ok(qpow(q, -k) * units)
        }
    }
}

/// Coordinates of `[[x, y], [z, -x]]` in the Lie algebra, or of
/// `[[x, z], [y, -x]]` in its dual.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LieCoords {
    pub x: LocalElt,
    pub y: LocalElt,
    pub z: LocalElt,
}

impl LieCoords {
    pub fn new(x: LocalElt, y: LocalElt, z: LocalElt) -> Self {
        LieCoords { x, y, z }
    }
    pub fn zero(p: u64) -> Self {
        let z = LocalElt::zero(p);
        LieCoords { x: z, y: z, z }
    }
    pub fn min_valuation(&self) -> i32 {
        self.x.val_or_max().min(self.y.val_or_max()).min(self.z.val_or_max())
    }
}

/// Phase of `<pv, xi> = psi(Tr(pv xi)) = psi(2 x xi_x + y xi_y + z xi_z)`.
pub fn trace_pair_phase(pv: &LieCoords, xi: &LieCoords) -> Result<Rational64> {
    let p = pv.x.p();
    let two = LocalElt::from_i64(p, 2, pv.x.prec().max(xi.x.prec()).max(1));
    let terms = [pv.x.mul(&xi.x).mul(&two), pv.y.mul(&xi.y), pv.z.mul(&xi.z)];
    let mut s = Rational64::zero();
    for t in terms {
        s += t.frac_part()?;
    }
    Ok(frac_turns(s))
}

pub fn trace_pair(pv: &LieCoords, xi: &LieCoords) -> Result<Complex64> {
    Ok(cis_turns(trace_pair_phase(pv, xi)?))
}

/// `k(N)`: trace-zero matrices with entries in `p^N`, and its dual box
/// `T k(0)^perp = p^{-N} O^3` in dual coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    pub n: i32,
}

impl LatticeBox {
    pub fn contains(&self, pv: &LieCoords) -> bool {
        pv.min_valuation() >= self.n
    }
    pub fn dual_contains(&self, xi: &LieCoords) -> bool {
        xi.min_valuation() >= -self.n
    }
    pub fn volume(&self, q: u64) -> Rational64 {
        qpow(q, -3 * self.n)
    }
    pub fn is_subset_of(&self, other: &LatticeBox) -> bool {
        self.n >= other.n
    }
}

pub fn one(p: u64, prec: u32) -> LocalElt {
    LocalElt::pi_pow(p, 0, prec)
}
