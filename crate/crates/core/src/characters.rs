//! Multiplicative characters of `F^x` and `E^x`, conductors, the finite
//! families `X_n`, and the additive datum `alpha` with
//! `chi(1 + x) = psi(alpha x)` on a deep enough ideal.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::local_field::{cis_turns, frac_turns, LocalElt};
use crate::residue::{
    base_group, mul_mod, pow_u64, shared_group, Ext, ResidueElt, ResidueRing, ResidueRingCfg, UnitGroupStructure,
};

/// A character given by exponents against the generators of a unit group,
/// together with the phase (in turns) of its value at the uniformizer.
#[derive(Clone)]
pub struct MulChar {
    group: Arc<UnitGroupStructure>,
    exps: Vec<u64>,
    wpi: Rational64,
}

impl PartialEq for MulChar {
    fn eq(&self, other: &Self) -> bool {
        self.group.ring().cfg() == other.group.ring().cfg() && self.exps == other.exps && self.wpi == other.wpi
    }
}

impl fmt::Debug for MulChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MulChar")
            .field("cfg", &self.group.ring().cfg())
            .field("exps", &self.exps)
            .field("wpi", &self.wpi)
            .finish()
    }
}

impl MulChar {
    pub fn new(group: Arc<UnitGroupStructure>, exps: Vec<u64>, wpi: Rational64) -> Result<Self> {
        if exps.len() != group.orders().len() {
            return Err(Error::Precondition(format!(
                "{} exponents for {} generators",
                exps.len(),
                group.orders().len()
            )));
        }
        let exps = exps.iter().zip(group.orders()).map(|(&e, &o)| e % o).collect();
        Ok(MulChar { group, exps, wpi: frac_turns(wpi) })
    }

    /// Character of `(Z/p^m)^x` sending the canonical generator to
    /// `e^{2 pi i j / phi(p^m)}`.
    pub fn base(p: u64, m: u32, j: u64, wpi: Rational64) -> Result<Self> {
        MulChar::new(base_group(p, m.max(1))?, vec![j], wpi)
    }

    pub fn trivial(group: Arc<UnitGroupStructure>) -> Self {
        let n = group.orders().len();
        MulChar { group, exps: vec![0; n], wpi: Rational64::zero() }
    }

    pub fn group(&self) -> &Arc<UnitGroupStructure> {
        &self.group
    }
    pub fn ring(&self) -> &ResidueRing {
        self.group.ring()
    }
    pub fn cfg(&self) -> ResidueRingCfg {
        self.group.ring().cfg()
    }
    pub fn p(&self) -> u64 {
        self.ring().p()
    }
    pub fn exps(&self) -> &[u64] {
        &self.exps
    }
    pub fn wpi(&self) -> Rational64 {
        self.wpi
    }
    pub fn wpi_value(&self) -> Complex64 {
        cis_turns(self.wpi)
    }
    pub fn is_ext(&self) -> bool {
        self.ring().is_ext()
    }
    pub fn with_wpi(&self, wpi: Rational64) -> Self {
        MulChar { wpi: frac_turns(wpi), ..self.clone() }
    }

    /// Phase of `chi(u)` for a unit of the ring.
    pub fn unit_phase(&self, u: ResidueElt) -> Option<Rational64> {
        let d = self.group.dlog(u)?;
        Some(self.phase_of_dlog(&d))
    }

    pub fn phase_of_dlog(&self, d: &[u64]) -> Rational64 {
        let mut s = Rational64::zero();
        for ((&e, &x), &o) in self.exps.iter().zip(d).zip(self.group.orders()) {
            s += Rational64::new(mul_mod(e, x, o) as i64, o as i64);
        }
        frac_turns(s)
    }

    /// Phase of `chi(n)` for an integer unit, reduced into the ring.
    pub fn int_phase(&self, n: i64) -> Option<Rational64> {
        let r = self.ring();
        self.unit_phase(r.from_i64(n))
    }

    pub fn eval_unit(&self, u: ResidueElt) -> Option<Complex64> {
        self.unit_phase(u).map(cis_turns)
    }

    /// Phase of `chi(x)` for a nonzero element of `F^x` (base characters).
    pub fn local_phase(&self, x: &LocalElt) -> Result<Rational64> {
        if self.is_ext() {
            return Err(Error::Precondition("local_phase takes a base character".into()));
        }
        let v = x.valuation().ok_or_else(|| Error::Precondition("character at zero".into()))?;
        let c = self.conductor();
        if x.prec() < c {
            return Err(Error::PrecisionExhausted(format!("unit known to {} digits, conductor {c}", x.prec())));
        }
        let u = self.int_phase(x.unit() as i64).expect("unit");
        Ok(frac_turns(self.wpi * Rational64::from_integer(v as i64) + u))
    }

    pub fn eval_local(&self, x: &LocalElt) -> Result<Complex64> {
        self.local_phase(x).map(cis_turns)
    }

    /// The same character viewed on the unit group of precision `m`.
    /// Lowering the precision requires the conductor to fit.
    pub fn rebase(&self, m: u32) -> Result<Self> {
        let cfg = self.cfg();
        if m == cfg.m {
            return Ok(self.clone());
        }
        if m < cfg.m && self.conductor() > m * self.ring().ramification() {
            return Err(Error::Precondition(format!("conductor {} does not fit precision {m}", self.conductor())));
        }
        let group = shared_group(ResidueRingCfg { m, ..cfg })?;
        let ring = self.ring();
        let mut exps = Vec::with_capacity(group.generators().len());
        for (g, &o) in group.generators().iter().zip(group.orders()) {
            let ph = self.unit_phase(ring.elt(g.a, g.b)).expect("generator maps to a unit");
            exps.push(phase_to_exponent(ph, o));
        }
        MulChar::new(group, exps, self.wpi)
    }

    fn align(&self, other: &MulChar) -> Result<(MulChar, MulChar)> {
        let (a, b) = (self.cfg(), other.cfg());
        if a.p != b.p || a.ext != b.ext {
            return Err(Error::Precondition("characters live on different groups".into()));
        }
        let m = a.m.max(b.m);
        Ok((self.rebase(m)?, other.rebase(m)?))
    }

    pub fn mul(&self, other: &MulChar) -> Result<Self> {
        let (a, b) = self.align(other)?;
        let exps = a.exps.iter().zip(&b.exps).zip(a.group.orders()).map(|((&x, &y), &o)| (x + y) % o).collect();
        MulChar::new(a.group.clone(), exps, a.wpi + b.wpi)
    }

    pub fn inv(&self) -> Self {
        let exps = self.exps.iter().zip(self.group.orders()).map(|(&e, &o)| (o - e) % o).collect();
        MulChar { group: self.group.clone(), exps, wpi: frac_turns(-self.wpi) }
    }

    pub fn pow(&self, k: i64) -> Self {
        let exps = self
            .exps
            .iter()
            .zip(self.group.orders())
            .map(|(&e, &o)| ((e as i128 * k as i128).rem_euclid(o as i128)) as u64)
            .collect();
        MulChar { group: self.group.clone(), exps, wpi: frac_turns(self.wpi * Rational64::from_integer(k)) }
    }

    /// Whether the two characters agree on units (after aligning precision).
    pub fn same_on_units(&self, other: &MulChar) -> bool {
        match self.align(other) {
            Ok((a, b)) => a.exps == b.exps,
            Err(_) => false,
        }
    }

    pub fn is_trivial_on_units(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Least `n` with the character trivial on `1 + p^n`, in powers of the
    /// ring uniformizer.
    pub fn conductor(&self) -> u32 {
        if self.is_trivial_on_units() {
            return 0;
        }
        let ring = self.ring();
        let top = ring.pi_precision();
        let mut n = top;
        while n > 1 && self.trivial_on_level(n - 1) {
            n -= 1;
        }
        n
    }

    fn trivial_on_level(&self, k: u32) -> bool {
        filtration_generators(self.ring(), k).into_iter().all(|g| self.unit_phase(g).is_some_and(|ph| ph.is_zero()))
    }
}

fn phase_to_exponent(ph: Rational64, order: u64) -> u64 {
    let e = ph * Rational64::from_integer(order as i64);
    assert!(e.is_integer(), "phase {ph} is not a multiple of 1/{order}");
    (*e.numer()).rem_euclid(order as i64) as u64
}

/// Elements `1 + pi^j b` (`j >= k`, `b` over a residue basis) generating `1 + p^k`.
fn filtration_generators(ring: &ResidueRing, k: u32) -> Vec<ResidueElt> {
    let basis: Vec<ResidueElt> = match ring.cfg().ext {
        Ext::Unramified { .. } => vec![ring.one(), ring.elt(0, 1)],
        _ => vec![ring.one()],
    };
    let pi = ring.uniformizer();
    let mut out = Vec::new();
    for j in k.max(1)..ring.pi_precision() {
        let pj = ring.pow(pi, j as u64);
        for &b in &basis {
            out.push(ring.add(ring.one(), ring.mul(pj, b)));
        }
    }
    out
}

/// Representatives of `O_E / p_E^j` (all elements, `p_E` the maximal ideal).
pub fn residue_classes(ring: &ResidueRing, j: u32) -> Vec<ResidueElt> {
    let p = ring.p();
    let (na, nb) = match ring.cfg().ext {
        Ext::None => (pow_u64(p, j), 1),
        Ext::Unramified { .. } => (pow_u64(p, j), pow_u64(p, j)),
        Ext::Ramified => (pow_u64(p, j.div_ceil(2)), pow_u64(p, j / 2)),
    };
    let mut out = Vec::with_capacity((na * nb) as usize);
    for b in 0..nb {
        for a in 0..na {
            out.push(ring.elt(a, b));
        }
    }
    out
}

pub fn unit_classes(ring: &ResidueRing, j: u32) -> Vec<ResidueElt> {
    if j == 0 {
        return vec![ring.one()];
    }
    residue_classes(ring, j).into_iter().filter(|&u| ring.is_unit(u)).collect()
}

type ClassCache = Mutex<HashMap<(ResidueRingCfg, u32), Arc<Vec<(ResidueElt, Vec<u64>)>>>>;

/// Unit classes modulo `p_E^j` with their discrete logarithms, memoized.
pub fn unit_class_table(group: &UnitGroupStructure, j: u32) -> Arc<Vec<(ResidueElt, Vec<u64>)>> {
    static CACHE: OnceLock<ClassCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let key = (group.ring().cfg(), j);
    if let Some(t) = cache.lock().unwrap().get(&key) {
        return t.clone();
    }
    let ring = group.ring();
    let t: Vec<_> = unit_classes(ring, j)
        .into_iter()
        .map(|u| {
            let d = group.dlog(u).expect("unit");
            (u, d)
        })
        .collect();
    let t = Arc::new(t);
    cache.lock().unwrap().entry(key).or_insert(t).clone()
}

/// Phase of `psi_E(pi_E^k z)` for `z` in the ring, where `psi_E = psi o Tr`
/// on an extension and `psi` itself on the base ring.
pub fn psi_turns(ring: &ResidueRing, k: i32, z: ResidueElt) -> Rational64 {
    let p = ring.p();
    let (coef, e) = match ring.cfg().ext {
        Ext::None => (z.a as i128, k),
        Ext::Unramified { .. } => (2 * z.a as i128, k),
        Ext::Ramified => {
            if k.rem_euclid(2) == 0 {
                (2 * z.a as i128, k / 2)
            } else {
                (2 * z.b as i128, (k + 1).div_euclid(2))
            }
        }
    };
    if e >= 0 || coef == 0 {
        return Rational64::zero();
    }
    let den = pow_u64(p, (-e) as u32) as i128;
    Rational64::new((coef % den) as i64, den as i64)
}

/// The characters of `(O/p^n)^x` with `chi(p) = 1`, on the group of
/// precision `max(n, 1)`.
pub fn enumerate_x(p: u64, n: u32) -> Result<Vec<MulChar>> {
    let g = base_group(p, n.max(1))?;
    let count = if n == 0 { 1 } else { g.order() };
    let step = g.order() / count;
    (0..count).map(|j| MulChar::new(g.clone(), vec![j * step], Rational64::zero())).collect()
}

/// All characters of the unit group of a ring, with a fixed phase at the
/// uniformizer.
pub fn enumerate_group(group: &Arc<UnitGroupStructure>, wpi: Rational64) -> Vec<MulChar> {
    let orders = group.orders().to_vec();
    let total: u64 = orders.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    for mut idx in 0..total {
        let mut exps = Vec::with_capacity(orders.len());
        for &o in &orders {
            exps.push(idx % o);
            idx /= o;
        }
        out.push(MulChar { group: group.clone(), exps, wpi });
    }
    out
}

/// `alpha` for a base character, with the ideal `p^domain` on which the
/// identity was verified.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlphaDatum {
    pub alpha: LocalElt,
    pub domain: u32,
}

/// `alpha = pi_E^val * unit` for a character of `E^x`; the unit is the
/// canonical lift and is meaningful to `rel_prec` uniformizer digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtAlpha {
    pub val: i32,
    pub unit: ResidueElt,
    pub rel_prec: u32,
    pub domain: u32,
}

/// Solve `chi(1 + x) = psi_E(alpha x)` for `x` in `p_E^d`, `d = ceil(n/2)`,
/// returning the unit part of `alpha` (canonical: least dlog among lifts).
fn solve_alpha(chi: &MulChar) -> Result<(i32, ResidueElt, u32, u32)> {
    let ring = chi.ring().clone();
    let n = chi.conductor();
    if n == 0 {
        return Err(Error::Precondition("unramified character has no alpha".into()));
    }
    let delta = ring.different_exponent() as i32;
    let d = n.div_ceil(2);
    let amb = n - d;
    let pi = ring.uniformizer();
    let pid = ring.pow(pi, d as u64);
    let ys = residue_classes(&ring, amb);
    let ks = d as i32 - n as i32 - delta;
    let targets: Vec<(ResidueElt, Rational64)> = ys
        .iter()
        .map(|&y| {
            let x = ring.add(ring.one(), ring.mul(pid, y));
            (y, chi.unit_phase(x).expect("1 + x is a unit"))
        })
        .collect();
    let valid = |w: ResidueElt| targets.iter().all(|&(y, ph)| psi_turns(&ring, ks, ring.mul(w, y)) == ph);
    let group = chi.group();
    let mut best: Option<(Vec<u64>, ResidueElt)> = None;
    let piamb = ring.pow(pi, amb as u64);
    for w in unit_classes(&ring, amb) {
        if !valid(w) {
            continue;
        }
        for t in residue_classes(&ring, d) {
            let lift = ring.add(w, ring.mul(piamb, t));
            let Some(dl) = group.dlog(lift) else { continue };
            if best.as_ref().is_none_or(|(b, _)| dl < *b) {
                best = Some((dl, lift));
            }
        }
    }
    let (_, unit) = best.ok_or_else(|| Error::NoSolution(format!("alpha for conductor {n}")))?;
    Ok((-(n as i32) - delta, unit, amb, d))
}

pub fn alpha_of(chi: &MulChar) -> Result<AlphaDatum> {
    if chi.is_ext() {
        return Err(Error::Precondition("alpha_of takes a base character".into()));
    }
    let (val, unit, amb, d) = solve_alpha(chi)?;
    let p = chi.p();
    let alpha = if amb == 0 { LocalElt::new(p, val, 1, 0) } else { LocalElt::new(p, val, unit.a, amb) };
    Ok(AlphaDatum { alpha, domain: d })
}

pub fn alpha_of_ext(chi: &MulChar) -> Result<ExtAlpha> {
    if !chi.is_ext() {
        return Err(Error::Precondition("alpha_of_ext takes an extension character".into()));
    }
    let (val, unit, amb, d) = solve_alpha(chi)?;
    Ok(ExtAlpha { val, unit, rel_prec: amb, domain: d })
}

impl ExtAlpha {
    /// `Nm(alpha)` as an element of `F`.
    pub fn norm(&self, ring: &ResidueRing) -> Result<LocalElt> {
        let p = ring.p();
        let (nu, _) = ring.norm_trace(self.unit)?;
        let (v, sign, prec) = match ring.cfg().ext {
            Ext::Unramified { .. } => (2 * self.val, 1i64, self.rel_prec),
            Ext::Ramified => (self.val, if self.val.rem_euclid(2) == 0 { 1 } else { -1 }, self.rel_prec.div_ceil(2)),
            Ext::None => return Err(Error::NotExtension),
        };
        let pm = ring.modulus() as i64;
        let unit = ((nu as i64) * sign).rem_euclid(pm) as u64;
        if prec == 0 {
            return Ok(LocalElt::new(p, v, 1, 0));
        }
        Ok(LocalElt::new(p, v, unit, prec))
    }
}

/// `chi o Nm` as a character of `E^x`, where `ext_group` is the unit group
/// of the extension ring.
pub fn compose_norm(chi: &MulChar, ext_group: &Arc<UnitGroupStructure>) -> Result<MulChar> {
    if chi.is_ext() {
        return Err(Error::Precondition("compose_norm takes a base character".into()));
    }
    let ring = ext_group.ring();
    if !ring.is_ext() {
        return Err(Error::NotExtension);
    }
    if chi.conductor() > ring.m() {
        return Err(Error::Precondition(format!(
            "conductor {} exceeds extension precision {}",
            chi.conductor(),
            ring.m()
        )));
    }
    let mut exps = Vec::new();
    for (g, &o) in ext_group.generators().iter().zip(ext_group.orders()) {
        let (nm, _) = ring.norm_trace(*g)?;
        let ph = chi.int_phase(nm as i64).expect("norm of a unit is a unit");
        exps.push(phase_to_exponent(ph, o));
    }
    // Nm(p) = p^2 for unramified E, Nm(sqrt p) = -p for ramified E
    let wpi = match ring.cfg().ext {
        Ext::Unramified { .. } => chi.wpi * 2,
        _ => chi.wpi + chi.int_phase(-1).expect("unit"),
    };
    MulChar::new(ext_group.clone(), exps, wpi)
}

/// `chi^sigma = chi o conj` for a character of `E^x`.
pub fn galois_conjugate(chi: &MulChar) -> Result<MulChar> {
    let ring = chi.ring();
    if !ring.is_ext() {
        return Err(Error::NotExtension);
    }
    let g = chi.group();
    let mut exps = Vec::new();
    for (x, &o) in g.generators().iter().zip(g.orders()) {
        exps.push(phase_to_exponent(chi.unit_phase(ring.conj(*x)).expect("unit"), o));
    }
    // conj(sqrt p) = -sqrt p in the ramified case; p is fixed otherwise
    let wpi = match ring.cfg().ext {
        Ext::Ramified => chi.wpi + chi.unit_phase(ring.neg(ring.one())).expect("unit"),
        _ => chi.wpi,
    };
    MulChar::new(g.clone(), exps, wpi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_field::psi_phase;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn conductor_examples() {
        assert_eq!(MulChar::base(3, 2, 0, r(0, 1)).unwrap().conductor(), 0);
        // quadratic character mod 3
        let q = MulChar::base(3, 1, 1, r(0, 1)).unwrap();
        assert_eq!(q.conductor(), 1);
        assert_eq!(q.int_phase(2).unwrap(), r(1, 2));
        // order 6 on (Z/9)^x: nontrivial on 1 + 3
        let c6 = MulChar::base(3, 2, 1, r(0, 1)).unwrap();
        assert!(c6.int_phase(4).unwrap() != r(0, 1));
        assert_eq!(c6.conductor(), 2);
        // the quadratic character lifted to mod 9 keeps conductor 1
        assert_eq!(MulChar::base(3, 2, 3, r(0, 1)).unwrap().conductor(), 1);
    }

    #[test]
    fn enumerate_x_counts_and_conductors() {
        assert_eq!(enumerate_x(3, 0).unwrap().len(), 1);
        assert_eq!(enumerate_x(3, 1).unwrap().len(), 2);
        assert_eq!(enumerate_x(3, 2).unwrap().len(), 6);
        assert_eq!(enumerate_x(5, 2).unwrap().len(), 20);
        for n in 0..=3 {
            for chi in enumerate_x(3, n).unwrap() {
                assert!(chi.conductor() <= n);
            }
        }
    }

    #[test]
    fn orthogonality_on_x_n() {
        let p = 3;
        for n in 1..=3u32 {
            let xs = enumerate_x(p, n).unwrap();
            let pm = pow_u64(p, n);
            for u in 1..pm {
                if u % p == 0 {
                    continue;
                }
                let s: Complex64 = xs.iter().map(|w| w.eval_unit(ResidueElt::base(u)).unwrap()).sum();
                let s = s / xs.len() as f64;
                let expect = if u == 1 { 1.0 } else { 0.0 };
                assert!((s - Complex64::new(expect, 0.0)).norm() < 1e-12, "n={n} u={u}");
            }
        }
    }

    #[test]
    fn rebase_preserves_values() {
        let chi = MulChar::base(5, 2, 3, r(1, 3)).unwrap();
        let up = chi.rebase(4).unwrap();
        for u in 1..625u64 {
            if u % 5 == 0 {
                continue;
            }
            assert_eq!(up.int_phase(u as i64), chi.int_phase(u as i64));
        }
        let down = up.rebase(2).unwrap();
        assert_eq!(down, chi);
        assert!(up.rebase(1).is_err());
    }

    #[test]
    fn alpha_identity_holds_on_its_domain() {
        for p in [3u64, 5] {
            let top = if p == 3 { 4 } else { 3 };
            for chi in enumerate_x(p, top).unwrap() {
                let n = chi.conductor();
                if n == 0 {
                    assert!(alpha_of(&chi).is_err());
                    continue;
                }
                let a = alpha_of(&chi).unwrap();
                assert_eq!(a.alpha.valuation(), Some(-(n as i32)));
                assert_eq!(a.domain, n.div_ceil(2));
                let lift = LocalElt::new(p, -(n as i32), a.alpha.unit().max(1), n.max(1));
                let pd = pow_u64(p, a.domain);
                for k in 0..pow_u64(p, top - a.domain) {
                    let x = LocalElt::from_i64(p, (pd * k) as i64, 12);
                    let lhs = chi.int_phase((1 + pd * k) as i64).unwrap();
                    let rhs = psi_phase(&lift.mul(&x)).unwrap();
                    assert_eq!(lhs, rhs, "p={p} exps={:?} k={k}", chi.exps());
                }
            }
        }
    }

    #[test]
    fn alpha_of_inverse_is_negated() {
        for chi in enumerate_x(3, 4).unwrap() {
            if chi.conductor() < 2 {
                continue;
            }
            let a = alpha_of(&chi).unwrap().alpha;
            let b = alpha_of(&chi.inv()).unwrap().alpha;
            let s = a.add(&b);
            // the sum vanishes modulo the ambiguity p^{-d}
            let d = chi.conductor().div_ceil(2) as i32;
            assert!(s.is_zero() || s.valuation().unwrap() >= -d);
        }
    }

    #[test]
    fn norm_composition_matches_direct_evaluation() {
        for ext in [Ext::Unramified { u: 2 }, Ext::Ramified] {
            let eg = shared_group(ResidueRingCfg { p: 3, m: 2, ext }).unwrap();
            let ring = eg.ring().clone();
            for chi in enumerate_x(3, 2).unwrap() {
                let chi = chi.with_wpi(r(1, 5));
                let ce = compose_norm(&chi, &eg).unwrap();
                for u in ring.units() {
                    let (nm, _) = ring.norm_trace(u).unwrap();
                    assert_eq!(ce.unit_phase(u), chi.int_phase(nm as i64));
                }
                let expect = match ext {
                    Ext::Ramified => frac_turns(chi.wpi() + chi.int_phase(-1).unwrap()),
                    _ => frac_turns(chi.wpi() * 2),
                };
                assert_eq!(ce.wpi(), expect);
            }
        }
    }

    #[test]
    fn extension_alpha_identity() {
        for ext in [Ext::Unramified { u: 2 }, Ext::Ramified] {
            let eg = shared_group(ResidueRingCfg { p: 3, m: 2, ext }).unwrap();
            let ring = eg.ring().clone();
            for chi in enumerate_group(&eg, r(0, 1)).into_iter().step_by(7) {
                let n = chi.conductor();
                if n < 2 {
                    continue;
                }
                let a = alpha_of_ext(&chi).unwrap();
                let pi = ring.uniformizer();
                let delta = ring.different_exponent() as i32;
                assert_eq!(a.val, -(n as i32) - delta);
                let pid = ring.pow(pi, a.domain as u64);
                for y in residue_classes(&ring, n - a.domain) {
                    let x = ring.mul(pid, y);
                    let lhs = chi.unit_phase(ring.add(ring.one(), x)).unwrap();
                    let rhs = psi_turns(&ring, a.val + a.domain as i32, ring.mul(a.unit, y));
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn psi_turns_ramified_trace() {
        let ring = crate::residue::ring_make(ResidueRingCfg { p: 3, m: 3, ext: Ext::Ramified }).unwrap();
        // Tr(pi^-3 (a + b sqrt3)) = Tr((a sqrt3 + 3b)/9) = 2b/3
        assert_eq!(psi_turns(&ring, -3, ring.elt(1, 1)), r(2, 3));
        // Tr(pi^-2 * 1) = 2/3
        assert_eq!(psi_turns(&ring, -2, ring.elt(1, 0)), r(2, 3));
        assert_eq!(psi_turns(&ring, -1, ring.elt(1, 1)), r(0, 1));
    }

    #[test]
    fn galois_conjugate_is_an_involution() {
        for ext in [Ext::Unramified { u: 2 }, Ext::Ramified] {
            let eg = shared_group(ResidueRingCfg { p: 3, m: 2, ext }).unwrap();
            for chi in enumerate_group(&eg, r(1, 4)).into_iter().step_by(5) {
                let c = galois_conjugate(&chi).unwrap();
                assert_eq!(galois_conjugate(&c).unwrap(), chi);
            }
        }
    }
}
