//! Gauss sums, GL1 zeta integrals and epsilon factors, and the gamma
//! monomials of principal series and dihedral supercuspidal representations.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::{
    alpha_of, compose_norm, enumerate_group, galois_conjugate, psi_turns, unit_class_table, MulChar,
};
use crate::error::{Error, Result};
use crate::local_field::{cis_turns, LocalElt};
use crate::residue::{legendre, pow_u64, shared_group, Ext, ResidueRingCfg};

fn phi(p: u64, l: u32) -> f64 {
    (pow_u64(p, l) - pow_u64(p, l - 1)) as f64
}

/// Phase of `psi(t u)` for a base element `t` and an integer `u`.
fn psi_tu(t: &LocalElt, u: u64) -> Result<Rational64> {
    let Some(v) = t.valuation() else { return Ok(Rational64::zero()) };
    if v >= 0 {
        return Ok(Rational64::zero());
    }
    let k = (-v) as u32;
    if t.prec() < k {
        return Err(Error::PrecisionExhausted(format!("psi(t u) needs {k} digits of t, have {}", t.prec())));
    }
    let pk = pow_u64(t.p(), k);
    let num = (t.unit() as u128 * u as u128 % pk as u128) as i64;
    Ok(Rational64::new(num, pk as i64))
}

/// `g(nu, psi_t) = int_{O^x} nu(u) psi(t u) du` with `vol(O, du) = 1`.
pub fn gauss_sum(nu: &MulChar, t: &LocalElt) -> Result<Complex64> {
    if nu.is_ext() {
        return Err(Error::Precondition("gauss_sum takes a base character".into()));
    }
    let p = nu.p();
    let level = t.valuation().map_or(0, |v| (-v).max(0) as u32);
    let l = nu.conductor().max(level).max(1);
    let pl = pow_u64(p, l);
    let mut s = Complex64::zero();
    for u in 1..pl {
        if u % p == 0 {
            continue;
        }
        let ph = nu.int_phase(u as i64).expect("unit") + psi_tu(t, u)?;
        s += cis_turns(ph);
    }
    Ok(s / pl as f64)
}

/// `eps(1/2, chi, psi)`; `1` for unramified `chi`.
pub fn epsilon_gl1(chi: &MulChar) -> Complex64 {
    epsilon_half(chi, chi.wpi_value())
}

/// `eps(s, chi, psi) = q^{n(1-s)} chi(pi)^n g(chi^{-1}, psi_{pi^{-n}})`.
pub fn epsilon_s(chi: &MulChar, s: Complex64) -> Complex64 {
    let n = chi.conductor();
    if n == 0 {
        return Complex64::one();
    }
    let q = chi.p() as f64;
    let t = LocalElt::pi_pow(chi.p(), -(n as i32), n);
    let g = gauss_sum(&chi.inv(), &t).expect("level matches conductor");
    let nn = n as f64;
    Complex64::new(q, 0.0).powc((1.0 - s) * nn) * chi.wpi_value().powi(n as i32) * g
}

/// `eps(1/2, chi, psi_E)` with `chi(pi_E)` replaced by `w`, on the base
/// field or an extension (`psi_E = psi o Tr`).
pub fn epsilon_half(chi: &MulChar, w: Complex64) -> Complex64 {
    let n = chi.conductor();
    if n == 0 {
        return Complex64::one();
    }
    let ring = chi.ring();
    let delta = ring.different_exponent();
    let k = -((n + delta) as i32);
    let table = unit_class_table(chi.group(), n);
    let inv = chi.inv();
    let mut s = Complex64::zero();
    for (u, dl) in table.iter() {
        s += cis_turns(inv.phase_of_dlog(dl) + psi_turns(ring, k, *u));
    }
    let qe = ring.residue_size() as f64;
    w.powi((n + delta) as i32) * s / qe.powf(n as f64 / 2.0)
}

/// The coset indicator `1_{a + p^m}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TestFn {
    pub center: LocalElt,
    pub m: i32,
}

impl TestFn {
    pub fn coset(center: LocalElt, m: i32) -> Self {
        TestFn { center, m }
    }
    pub fn ball(p: u64, m: i32) -> Self {
        TestFn { center: LocalElt::zero(p), m }
    }
    fn center_val(&self) -> Option<i32> {
        self.center.valuation().filter(|&v| v < self.m)
    }
}

fn lfactor_t(chi: &MulChar, s: Complex64) -> Complex64 {
    chi.wpi_value() * Complex64::new(chi.p() as f64, 0.0).powc(-s)
}

/// `Z(f, chi |.|^s) = int f(x) chi(x) |x|^s d^x x`, `vol(O^x, d^x) = 1`.
pub fn zeta_z(f: &TestFn, chi: &MulChar, s: Complex64) -> Result<Complex64> {
    let p = chi.p();
    let c = chi.conductor();
    let t = lfactor_t(chi, s);
    match f.center_val() {
        None => {
            if c > 0 {
                return Ok(Complex64::zero());
            }
            if t.norm() >= 1.0 {
                return Err(Error::Precondition("zeta integral diverges for Re s <= 0".into()));
            }
            Ok(t.powi(f.m) / (1.0 - t))
        }
        Some(k) => {
            let j = (f.m - k) as u32;
            if f.center.prec() < j {
                return Err(Error::PrecisionExhausted("coset center".into()));
            }
            let l = j.max(c);
            let pj = pow_u64(p, j);
            let au = f.center.unit() % pj;
            let mut sum = Complex64::zero();
            let mut u = au;
            while u < pow_u64(p, l) {
                sum += chi.eval_unit(chi.ring().from_i64(u as i64)).expect("unit");
                u += pj;
            }
            Ok(t.powi(k) * sum / phi(p, l))
        }
    }
}

/// `Z(f^, chi^{-1} |.|^{1-s})` with `f^(y) = q^{-m} psi(a y) 1_{p^{-m}}(y)`.
pub fn zeta_dual(f: &TestFn, chi: &MulChar, s: Complex64) -> Result<Complex64> {
    let p = chi.p();
    let c = chi.conductor();
    let inv = chi.inv();
    let tp = lfactor_t(&inv, 1.0 - s);
    let a = f.center_val().map(|_| f.center);
    let n0 = match a {
        None => -f.m,
        Some(a) => (-f.m).max(-a.valuation().unwrap()),
    };
    let mut total = Complex64::zero();
    if let Some(a) = a {
        let va = a.valuation().unwrap();
        if va + (a.prec() as i32) < f.m {
            return Err(Error::PrecisionExhausted("coset center".into()));
        }
        for n in -f.m..n0 {
            let lvl = (-(va + n)) as u32;
            let l = c.max(lvl).max(1);
            let an = LocalElt::new(p, va + n, a.unit(), a.prec());
            let mut inner = Complex64::zero();
            for u in 1..pow_u64(p, l) {
                if u % p == 0 {
                    continue;
                }
                inner += cis_turns(psi_tu(&an, u)? + inv.int_phase(u as i64).expect("unit"));
            }
            total += tp.powi(n) * inner / phi(p, l);
        }
    }
    if c == 0 {
        if tp.norm() >= 1.0 {
            return Err(Error::Precondition("dual zeta integral diverges for Re s >= 1".into()));
        }
        total += tp.powi(n0) / (1.0 - tp);
    }
    Ok(total * (p as f64).powi(-f.m))
}

pub fn l_factor(chi: &MulChar, s: Complex64) -> Complex64 {
    if chi.conductor() > 0 {
        return Complex64::one();
    }
    1.0 / (1.0 - lfactor_t(chi, s))
}

/// `|Z(f^, chi^v)/L(chi^v) - eps(s, chi) Z(f, chi)/L(chi)|`.
pub fn fe_residual(f: &TestFn, chi: &MulChar, s: Complex64) -> Result<f64> {
    if !(s.re > 0.0 && s.re < 1.0) {
        return Err(Error::Precondition("functional equation checked for 0 < Re s < 1".into()));
    }
    let lhs = zeta_dual(f, chi, s)? / l_factor(&chi.inv(), 1.0 - s);
    let rhs = epsilon_s(chi, s) * zeta_z(f, chi, s)? / l_factor(chi, s);
    Ok((lhs - rhs).norm())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwistLaw {
    /// `eps(chi omega) = omega(alpha_chi) eps(chi)`
    Stated,
    /// `eps(chi omega) = omega^{-1}(alpha_chi) eps(chi)`
    Inverse,
}

/// Residual of the twist law for `c(chi)` even and `c(omega) <= c(chi)/2`.
pub fn tate_twist_residual(chi: &MulChar, omega: &MulChar, law: TwistLaw) -> Result<f64> {
    let n = chi.conductor();
    if n == 0 || n % 2 == 1 {
        return Err(Error::Precondition(format!("twist law needs even positive conductor, got {n}")));
    }
    if 2 * omega.conductor() > n {
        return Err(Error::Precondition(format!("c(omega) = {} exceeds c(chi)/2", omega.conductor())));
    }
    let alpha = alpha_of(chi)?.alpha;
    let w = match law {
        TwistLaw::Stated => omega.eval_local(&alpha)?,
        TwistLaw::Inverse => omega.inv().eval_local(&alpha)?,
    };
    let lhs = epsilon_gl1(&chi.mul(omega)?);
    Ok((lhs - w * epsilon_gl1(chi)).norm())
}

/// `gamma = c z^k` in `z = q^{-s}`, at the centre after the unramified shift.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaMonomial {
    pub c: Complex64,
    pub k: i32,
}

impl GammaMonomial {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.c * z.powi(self.k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RepGL2 {
    PrincipalSeries {
        chi0: MulChar,
    },
    /// Induced from `xi` on the units of a quadratic extension.
    Supercuspidal {
        xi: MulChar,
    },
}

impl RepGL2 {
    pub fn principal_series(chi0: MulChar) -> Result<Self> {
        if chi0.is_ext() {
            return Err(Error::Precondition("chi0 lives on the base field".into()));
        }
        if chi0.conductor() == 0 {
            return Err(Error::Precondition("chi0 must be ramified".into()));
        }
        Ok(RepGL2::PrincipalSeries { chi0 })
    }

    pub fn supercuspidal(xi: MulChar) -> Result<Self> {
        if !xi.is_ext() {
            return Err(Error::NotExtension);
        }
        if !det_condition_holds(&xi) {
            return Err(Error::Precondition("xi restricted to F^x is not the quadratic character of E/F".into()));
        }
        if !is_regular(&xi)? {
            return Err(Error::Precondition("xi equals its Galois conjugate".into()));
        }
        Ok(RepGL2::Supercuspidal { xi })
    }

    pub fn p(&self) -> u64 {
        match self {
            RepGL2::PrincipalSeries { chi0 } => chi0.p(),
            RepGL2::Supercuspidal { xi } => xi.p(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RepGL2::PrincipalSeries { .. } => "ps",
            RepGL2::Supercuspidal { .. } => "sc",
        }
    }

    /// Largest unit precision carried by the defining character.
    pub fn precision(&self) -> u32 {
        match self {
            RepGL2::PrincipalSeries { chi0 } => chi0.cfg().m,
            RepGL2::Supercuspidal { xi } => xi.cfg().m,
        }
    }
}

/// The quadratic character of `E/F`, as a base character.
pub fn eta_ext(p: u64, ext: Ext, m: u32) -> Result<MulChar> {
    let g = crate::residue::base_group(p, m.max(1))?;
    match ext {
        Ext::None => Err(Error::NotExtension),
        Ext::Unramified { .. } => Ok(MulChar::new(g, vec![0], Rational64::new(1, 2))?),
        Ext::Ramified => {
            // -p is a norm, so eta(p) = eta(-1)
            let wpi = if legendre(p - 1, p) == 1 { Rational64::zero() } else { Rational64::new(1, 2) };
            let half = g.order() / 2;
            MulChar::new(g, vec![half], wpi)
        }
    }
}

/// The Langlands constant `lambda(E/F, psi)`.
pub fn lambda_ext(p: u64, ext: Ext) -> Result<Complex64> {
    match ext {
        Ext::None => Err(Error::NotExtension),
        Ext::Unramified { .. } => Ok(Complex64::one()),
        Ext::Ramified => Ok(epsilon_gl1(&eta_ext(p, ext, 1)?)),
    }
}

/// `xi |_{F^x} = eta_{E/F}`, checked on every unit of the base ring and at `p`.
pub fn det_condition_holds(xi: &MulChar) -> bool {
    let ring = xi.ring();
    let cfg = ring.cfg();
    let Ok(eta) = eta_ext(cfg.p, cfg.ext, cfg.m) else { return false };
    let p = cfg.p;
    for u in 1..pow_u64(p, cfg.m) {
        if u % p == 0 {
            continue;
        }
        if xi.unit_phase(ring.elt(u, 0)) != eta.int_phase(u as i64) {
            return false;
        }
    }
    let at_p = match cfg.ext {
        Ext::Unramified { .. } => xi.wpi(),
        _ => crate::local_field::frac_turns(xi.wpi() * 2),
    };
    at_p == eta.wpi()
}

pub fn is_regular(xi: &MulChar) -> Result<bool> {
    Ok(galois_conjugate(xi)? != *xi)
}

/// Regular characters of `E^x` satisfying the determinant condition with
/// `1 <= c(xi) <= max_cond`.
pub fn admissible_xi(p: u64, ext: Ext, m: u32, max_cond: u32) -> Result<Vec<MulChar>> {
    let group = shared_group(ResidueRingCfg { p, m, ext })?;
    let wpis: Vec<Rational64> = match ext {
        Ext::None => return Err(Error::NotExtension),
        Ext::Unramified { .. } => vec![Rational64::new(1, 2)],
        Ext::Ramified => {
            let e = eta_ext(p, ext, m)?.wpi();
            vec![e / 2, e / 2 + Rational64::new(1, 2)]
        }
    };
    let mut out = Vec::new();
    for w in wpis {
        for xi in enumerate_group(&group, w) {
            let c = xi.conductor();
            if c == 0 || c > max_cond {
                continue;
            }
            if det_condition_holds(&xi) && is_regular(&xi)? {
                out.push(xi);
            }
        }
    }
    Ok(out)
}

/// `xi * (nu o Nm)` on a common extension precision.
pub fn twist_ext(xi: &MulChar, nu: &MulChar) -> Result<MulChar> {
    let m = xi.cfg().m.max(nu.cfg().m);
    let xi = xi.rebase(m)?;
    let nu = nu.rebase(m)?;
    let ne = compose_norm(&nu, xi.group())?;
    xi.mul(&ne)
}

/// `gamma(1/2, pi (x) nu)` as a monomial in the unramified twist variable.
pub fn gamma_gl2(pi: &RepGL2, nu: &MulChar) -> Result<GammaMonomial> {
    match pi {
        RepGL2::PrincipalSeries { chi0 } => {
            let a = chi0.mul(nu)?;
            let b = chi0.inv().mul(nu)?;
            let (fa, fb) = (a.conductor(), b.conductor());
            if fa == 0 || fb == 0 {
                return Err(Error::LFactorPresent(format!("twist conductors {fa} and {fb}")));
            }
            Ok(GammaMonomial { c: epsilon_gl1(&a) * epsilon_gl1(&b), k: (fa + fb) as i32 })
        }
        RepGL2::Supercuspidal { xi } => {
            let big = twist_ext(xi, nu)?;
            let n = big.conductor();
            if n == 0 {
                return Err(Error::LFactorPresent("unramified twist of xi".into()));
            }
            let ring = big.ring();
            let f = ring.inertia();
            let lam = lambda_ext(ring.p(), ring.cfg().ext)?;
            Ok(GammaMonomial { c: lam * epsilon_gl1(&big), k: (f * (n + ring.different_exponent())) as i32 })
        }
    }
}

/// `gamma(1/2, pi (x) nu mu_z)` evaluated at a complex `z`, where `mu_z` is
/// unramified with `mu_z(pi) = z`.
pub fn gamma_gl2_at(pi: &RepGL2, nu: &MulChar, z: Complex64) -> Result<Complex64> {
    match pi {
        RepGL2::PrincipalSeries { chi0 } => {
            let a = chi0.mul(nu)?;
            let b = chi0.inv().mul(nu)?;
            if a.conductor() == 0 || b.conductor() == 0 {
                return Err(Error::LFactorPresent("unramified principal series twist".into()));
            }
            Ok(epsilon_half(&a, a.wpi_value() * z) * epsilon_half(&b, b.wpi_value() * z))
        }
        RepGL2::Supercuspidal { xi } => {
            let big = twist_ext(xi, nu)?;
            if big.conductor() == 0 {
                return Err(Error::LFactorPresent("unramified twist of xi".into()));
            }
            let ring = big.ring();
            let lam = lambda_ext(ring.p(), ring.cfg().ext)?;
            Ok(lam * epsilon_half(&big, big.wpi_value() * z.powi(ring.inertia() as i32)))
        }
    }
}

/// Conductor, `alpha` and root number of the pair `(pi, chi)`, read off the
/// twist `pi (x) chi^{-1}`.
#[derive(Clone, Debug)]
pub struct PairFactors {
    pub c_pair: u32,
    pub alpha_pair: LocalElt,
    pub gamma: Complex64,
}

pub fn pair_factors(pi: &RepGL2, chi: &MulChar) -> Result<PairFactors> {
    let chib = chi.inv();
    match pi {
        RepGL2::PrincipalSeries { chi0 } => {
            let flat = chi0.mul(&chib)?;
            let sharp = chi0.inv().mul(&chib)?;
            if flat.conductor() == 0 || sharp.conductor() == 0 {
                return Err(Error::NonGenericPair("chi0 chi^-1 or chi0^-1 chi^-1 is unramified".into()));
            }
            let af = alpha_of(&flat)?.alpha;
            let as_ = alpha_of(&sharp)?.alpha;
            let g = gamma_gl2(pi, &chib)?;
            Ok(PairFactors { c_pair: g.k as u32, alpha_pair: af.mul(&as_), gamma: g.c })
        }
        RepGL2::Supercuspidal { xi } => {
            let big = twist_ext(xi, &chib)?;
            if big.conductor() == 0 {
                return Err(Error::LFactorPresent("unramified twist of xi".into()));
            }
            let a = crate::characters::alpha_of_ext(&big)?;
            let g = gamma_gl2(pi, &chib)?;
            Ok(PairFactors { c_pair: g.k as u32, alpha_pair: a.norm(big.ring())?, gamma: g.c })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_x;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }
    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn quadratic_gauss_sum_mod_three() {
        let q = MulChar::base(3, 1, 1, r(0, 1)).unwrap();
        let g = gauss_sum(&q, &LocalElt::pi_pow(3, -1, 1)).unwrap();
        assert!((g - c(0.0, 1.0 / 3f64.sqrt())).norm() < 1e-12);
        let g2 = gauss_sum(&q, &LocalElt::pi_pow(3, -2, 2)).unwrap();
        assert!(g2.norm() < 1e-12);
        let triv = MulChar::base(3, 1, 0, r(0, 1)).unwrap();
        let g0 = gauss_sum(&triv, &LocalElt::from_i64(3, 1, 4)).unwrap();
        assert!((g0 - c(2.0 / 3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn epsilon_examples() {
        let q = MulChar::base(3, 1, 1, r(0, 1)).unwrap();
        assert!((epsilon_gl1(&q) - c(0.0, 1.0)).norm() < 1e-12);
        let unr = MulChar::base(3, 2, 0, r(1, 7)).unwrap();
        assert_eq!(epsilon_gl1(&unr), Complex64::one());
        for chi in enumerate_x(3, 2).unwrap() {
            if chi.conductor() == 2 {
                assert!((epsilon_gl1(&chi).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn epsilon_half_agrees_with_gauss_sum_form() {
        for chi in enumerate_x(5, 2).unwrap() {
            let chi = chi.with_wpi(r(2, 9));
            let a = epsilon_gl1(&chi);
            let b = epsilon_s(&chi, c(0.5, 0.0));
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn twist_shift_law() {
        for chi in enumerate_x(3, 3).unwrap() {
            let n = chi.conductor() as i32;
            for a in -2..=2 {
                let s = c(0.3, 0.1);
                let lhs = epsilon_s(&chi, s + a as f64);
                let rhs = (3f64).powi(-a * n) * epsilon_s(&chi, s);
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn functional_equation_on_cosets() {
        let p = 3;
        for chi in enumerate_x(p, 2).unwrap() {
            let chi = chi.with_wpi(r(1, 5));
            let fs = [
                TestFn::ball(p, 0),
                TestFn::ball(p, 2),
                TestFn::coset(LocalElt::from_i64(p, 1, 6), 2),
                TestFn::coset(LocalElt::from_i64(p, 5, 6), 3),
                TestFn::coset(LocalElt::from_frac(p, 2, 1, 6), 1),
            ];
            for f in &fs {
                for k in 1..=8 {
                    let s = c(k as f64 / 9.0, 0.0);
                    let res = fe_residual(f, &chi, s).unwrap();
                    assert!(res < 1e-10, "exps={:?} f={f:?} s={s} res={res}", chi.exps());
                }
            }
        }
    }

    #[test]
    fn zeta_examples() {
        let p = 3;
        let unr = MulChar::base(p, 1, 0, r(0, 1)).unwrap();
        let s = c(0.5, 0.0);
        let t = 3f64.powf(-0.5);
        let z = zeta_z(&TestFn::ball(p, 0), &unr, s).unwrap();
        assert!((z - c(1.0 / (1.0 - t), 0.0)).norm() < 1e-12);
        let ram = MulChar::base(p, 1, 1, r(0, 1)).unwrap();
        let units = TestFn::coset(LocalElt::from_i64(p, 1, 3), 0);
        assert!(zeta_z(&units, &ram, s).unwrap().norm() < 1e-12);
        let near_one = TestFn::coset(LocalElt::from_i64(p, 1, 3), 2);
        let z = zeta_z(&near_one, &ram, s).unwrap();
        assert!((z - c(1.0 / 6.0, 0.0)).norm() < 1e-12);
        assert!(fe_residual(&units, &ram, c(1.2, 0.0)).is_err());
    }

    #[test]
    fn tate_twist_laws_differ() {
        let chi = MulChar::base(3, 2, 1, r(0, 1)).unwrap();
        let triv = MulChar::base(3, 1, 0, r(0, 1)).unwrap();
        assert!(tate_twist_residual(&chi, &triv, TwistLaw::Stated).unwrap() < 1e-12);
        let big = MulChar::base(3, 2, 1, r(0, 1)).unwrap();
        assert!(tate_twist_residual(&chi, &big, TwistLaw::Stated).is_err());
        let mut worst_inv = 0f64;
        for chi in enumerate_x(3, 4).unwrap() {
            if chi.conductor() != 4 {
                continue;
            }
            for om in enumerate_x(3, 2).unwrap() {
                let om = om.with_wpi(r(1, 3));
                worst_inv = worst_inv.max(tate_twist_residual(&chi, &om, TwistLaw::Inverse).unwrap());
            }
        }
        assert!(worst_inv < 1e-9);
    }

    #[test]
    fn ramified_lambda_at_three() {
        let lam = lambda_ext(3, Ext::Ramified).unwrap();
        assert!((lam - c(0.0, -1.0)).norm() < 1e-12);
        // lambda^2 = eta(-1)
        let lam5 = lambda_ext(5, Ext::Ramified).unwrap();
        assert!((lam5 * lam5 - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn admissible_xi_found_over_both_extensions() {
        for ext in [Ext::Unramified { u: 2 }, Ext::Ramified] {
            let xs = admissible_xi(3, ext, 2, 3).unwrap();
            assert!(!xs.is_empty());
            for xi in &xs {
                assert!(RepGL2::supercuspidal(xi.clone()).is_ok());
            }
        }
    }

    #[test]
    fn gamma_monomials_are_unimodular() {
        let chi0 = MulChar::base(3, 2, 1, r(0, 1)).unwrap();
        let pi = RepGL2::principal_series(chi0.clone()).unwrap();
        for nu in enumerate_x(3, 2).unwrap() {
            match gamma_gl2(&pi, &nu) {
                Ok(g) => {
                    assert!((g.c.norm() - 1.0).abs() < 1e-12);
                    let z = cis_turns(r(1, 7));
                    assert!((gamma_gl2_at(&pi, &nu, z).unwrap() - g.eval(z)).norm() < 1e-12);
                }
                Err(Error::LFactorPresent(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
        for ext in [Ext::Unramified { u: 2 }, Ext::Ramified] {
            let xi = admissible_xi(3, ext, 2, 2).unwrap().remove(0);
            let pi = RepGL2::supercuspidal(xi).unwrap();
            for nu in enumerate_x(3, 2).unwrap() {
                let g = gamma_gl2(&pi, &nu).unwrap();
                assert!((g.c.norm() - 1.0).abs() < 1e-12);
                let z = cis_turns(r(2, 11));
                assert!((gamma_gl2_at(&pi, &nu, z).unwrap() - g.eval(z)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn non_generic_pair_rejected() {
        let chi0 = MulChar::base(3, 1, 1, r(0, 1)).unwrap();
        let pi = RepGL2::principal_series(chi0.clone()).unwrap();
        assert!(matches!(pair_factors(&pi, &chi0), Err(Error::NonGenericPair(_))));
    }
}
