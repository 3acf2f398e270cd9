//! Integrals of wavepackets over the hyperbola `{x = alpha_chi, yz = alpha_{pi,chi}}`
//! against `d^x xi_y`: closed forms per cell and a lattice-sum oracle.

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::local_field::{x_count, LocalElt};
use crate::op_calculus::{SignConvention, Wavepacket, WavepacketSum};
use crate::relative_character::{Cell, OriginCount, PairData};
use crate::residue::pow_u64;

/// The hyperbola of a pair. The `x` coordinate sits at `-sigma alpha_chi`,
/// the point the torus average of the same sign convention selects.
#[derive(Clone, Debug)]
pub struct HyperbolaSpec {
    pub pd: PairData,
    pub sign: SignConvention,
}

impl HyperbolaSpec {
    pub fn new(pd: &PairData, sign: SignConvention) -> Self {
        HyperbolaSpec { pd: pd.clone(), sign }
    }

    /// `|y| |z|` on the hyperbola.
    pub fn yz_abs(&self) -> Rational64 {
        self.pd.alpha_pair.abs()
    }
}

fn depth(t: &LocalElt) -> u32 {
    t.valuation().map_or(0, |v| (-v).max(0) as u32)
}

/// `e in tau + O`, read from the valuation and the first `r` unit digits.
fn in_coset(e: &LocalElt, tau: &LocalElt) -> Result<bool> {
    let r = depth(tau);
    if r == 0 {
        return Ok(e.is_integral());
    }
    if e.valuation() != Some(-(r as i32)) {
        return Ok(false);
    }
    Ok(e.unit_mod(r)? == tau.unit_mod(r)?)
}

fn inv_x(q: u64, k: u32) -> Rational64 {
    Rational64::new(1, x_count(q, k) as i64)
}

/// Closed-form integral of `1_tau^T` over the hyperbola.
pub fn hyp_integral_closed(hs: &HyperbolaSpec, a: &Wavepacket, origin: OriginCount) -> Result<Rational64> {
    let pd = &hs.pd;
    if !pd.in_window(&a.tau.x, a.level, hs.sign)? {
        return Ok(Rational64::zero());
    }
    let q = pd.p();
    let n = a.level as i64;
    let c = pd.c_pair as i64;
    let (r, s) = (a.r(), a.s());
    Ok(match Cell::of(r, s) {
        Cell::Origin => {
            let extra = if origin == OriginCount::Shells { 1 } else { 0 };
            if 2 * n >= c {
                Rational64::from_integer(2 * n - c + extra)
            } else {
                Rational64::zero()
            }
        }
        Cell::Y if 2 * n + r as i64 >= c => inv_x(q, r),
        Cell::Z if 2 * n + s as i64 >= c => inv_x(q, s),
        Cell::Y | Cell::Z => Rational64::zero(),
        Cell::Both => {
            let beta = pd.fourth_cell_ratio(&a.tau.y, &a.tau.z, a.level)?;
            if beta.in_unit_filtration(r.min(s))? {
                inv_x(q, r.max(s))
            } else {
                Rational64::zero()
            }
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeValue {
    pub value: Rational64,
    /// Whether `depth` resolves every indicator, so that `value` is exact.
    pub is_final: bool,
}

/// Sum of `1_tau^T` over `xi_y = pi^k u`, `k` in `[-N-c-depth, N+depth]`,
/// `u` over unit classes mod `p^depth`, each class weighted by its volume.
pub fn hyp_integral_lattice(hs: &HyperbolaSpec, a: &Wavepacket, depth_: u32) -> Result<LatticeValue> {
    if depth_ == 0 {
        return Err(Error::Precondition("lattice depth must be positive".into()));
    }
    let pd = &hs.pd;
    let p = pd.p();
    let n = a.level as i32;
    let c = pd.c_pair as i32;
    if !pd.in_window(&a.tau.x, a.level, hs.sign)? {
        return Ok(LatticeValue { value: Rational64::zero(), is_final: true });
    }
    let pd_ = pow_u64(p, depth_);
    let vol = inv_x(p, depth_);
    let prec = depth_ + 2 * (n + c) as u32 + 4;
    // any lift of alpha; only the cell with both depths positive sees the choice
    let lift = if pd.alpha_pair.prec() == 0 { 1 } else { pd.alpha_pair.unit() };
    let alpha = LocalElt::new(p, pd.alpha_pair.valuation().expect("nonzero"), lift, prec);
    let mut total = Rational64::zero();
    for k in (-n - c - depth_ as i32)..=(n + depth_ as i32) {
        for u in (1..pd_).filter(|u| u % p != 0) {
            let xy = LocalElt::new(p, k, u, prec);
            let xz = alpha.div(&xy).expect("nonzero");
            let ty = xy.mul(&LocalElt::pi_pow(p, n, prec));
            let tz = xz.mul(&LocalElt::pi_pow(p, n, prec));
            if in_coset(&ty, &a.tau.y)? && in_coset(&tz, &a.tau.z)? {
                total += vol;
            }
        }
    }
    let (r, s) = (a.r(), a.s());
    let lift_ok = Cell::of(r, s) != Cell::Both
        || pd.fourth_cell_ratio(&a.tau.y, &a.tau.z, a.level).and_then(|b| b.in_unit_filtration(r.min(s))).is_ok();
    let is_final = depth_ >= r.max(s).max(1) && lift_ok;
    Ok(LatticeValue { value: total, is_final })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Integrator {
    Closed(OriginCount),
    Lattice(u32),
}

/// `sum coeff_i int 1_{tau_i}^T`, by linearity.
pub fn integrate_sum(hs: &HyperbolaSpec, a: &WavepacketSum, how: Integrator) -> Result<Complex64> {
    let mut s = Complex64::zero();
    for w in &a.terms {
        let v = match how {
            Integrator::Closed(o) => hyp_integral_closed(hs, w, o)?,
            Integrator::Lattice(d) => hyp_integral_lattice(hs, w, d)?.value,
        };
        s += w.coeff * (*v.numer() as f64 / *v.denom() as f64);
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::enumerate_x;
    use crate::local_factors::RepGL2;
    use crate::local_field::LieCoords;
    use crate::relative_character::packet_grid;

    fn pair() -> PairData {
        let xs = enumerate_x(3, 2).unwrap();
        for a in xs.iter().filter(|c| c.conductor() == 2) {
            for b in xs.iter().filter(|c| c.conductor() == 2) {
                if let Ok(pd) = PairData::new(&RepGL2::principal_series(a.clone()).unwrap(), b) {
                    return pd;
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn origin_cell_counts_shells() {
        let pd = pair();
        let hs = HyperbolaSpec::new(&pd, SignConvention::Negated);
        let tx = crate::relative_character::tau_x_samples(&pd, 3, hs.sign).unwrap()[0];
        let a = Wavepacket::new(3, LieCoords::new(tx, LocalElt::zero(3), LocalElt::zero(3)));
        let closed = hyp_integral_closed(&hs, &a, OriginCount::Shells).unwrap();
        assert_eq!(closed, Rational64::from_integer(6 - pd.c_pair as i64 + 1));
        let lat = hyp_integral_lattice(&hs, &a, 2).unwrap();
        assert!(lat.is_final);
        assert_eq!(lat.value, closed);
    }

    #[test]
    fn off_window_is_zero() {
        let pd = pair();
        let hs = HyperbolaSpec::new(&pd, SignConvention::Negated);
        for a in packet_grid(&pd, 2, hs.sign).unwrap() {
            if !pd.in_window(&a.tau.x, 2, hs.sign).unwrap() {
                assert_eq!(hyp_integral_closed(&hs, &a, OriginCount::Shells).unwrap(), Rational64::zero());
                assert_eq!(hyp_integral_lattice(&hs, &a, 2).unwrap().value, Rational64::zero());
            }
        }
    }

    #[test]
    fn closed_equals_lattice_on_grid() {
        let pd = pair();
        for sign in [SignConvention::Negated, SignConvention::Literal] {
            let hs = HyperbolaSpec::new(&pd, sign);
            for level in 1..=3 {
                for a in packet_grid(&pd, level, sign).unwrap() {
                    let c = hyp_integral_closed(&hs, &a, OriginCount::Shells).unwrap();
                    let l = hyp_integral_lattice(&hs, &a, 2).unwrap();
                    assert!(c >= Rational64::zero());
                    assert_eq!(c, l.value, "N={level} tau={:?}", a.tau);
                }
            }
        }
    }

    #[test]
    fn shallow_lattice_is_flagged() {
        let pd = pair();
        let hs = HyperbolaSpec::new(&pd, SignConvention::Negated);
        let tx = crate::relative_character::tau_x_samples(&pd, 2, hs.sign).unwrap()[0];
        let t = LocalElt::new(3, -2, 1, 2);
        let a = Wavepacket::new(2, LieCoords::new(tx, t, LocalElt::zero(3)));
        assert!(!hyp_integral_lattice(&hs, &a, 1).unwrap().is_final);
        assert!(hyp_integral_lattice(&hs, &a, 2).unwrap().is_final);
    }

    #[test]
    fn linear_over_sums() {
        let pd = pair();
        let hs = HyperbolaSpec::new(&pd, SignConvention::Negated);
        let grid = packet_grid(&pd, 2, hs.sign).unwrap();
        let mut sum = WavepacketSum { level: 2, terms: grid[..grid.len().min(6)].to_vec() };
        for (i, t) in sum.terms.iter_mut().enumerate() {
            t.coeff = Complex64::new(i as f64, 1.0);
        }
        let whole = integrate_sum(&hs, &sum, Integrator::Lattice(2)).unwrap();
        let parts: Complex64 = sum
            .terms
            .iter()
            .map(|w| {
                let v = hyp_integral_lattice(&hs, w, 2).unwrap().value;
                w.coeff * (*v.numer() as f64 / *v.denom() as f64)
            })
            .sum();
        assert!((whole - parts).norm() < 1e-12);
        for t in sum.terms.iter_mut() {
            t.coeff = Complex64::zero();
        }
        assert_eq!(integrate_sum(&hs, &sum, Integrator::Lattice(2)).unwrap(), Complex64::zero());
    }

    #[test]
    fn closed_equals_lattice_past_regime() {
        use crate::relative_character::tau_coset_reps;
        let pd = pair();
        let hs = HyperbolaSpec::new(&pd, SignConvention::Negated);
        let level = 2;
        let tx = crate::relative_character::tau_x_samples(&pd, level, hs.sign).unwrap()[0];
        for r in 0..=level {
            for s in 0..=level {
                for ty in tau_coset_reps(3, r) {
                    for tz in tau_coset_reps(3, s) {
                        let a = Wavepacket::new(level, LieCoords::new(tx, ty, tz));
                        let l = hyp_integral_lattice(&hs, &a, r.max(s).max(1)).unwrap();
                        match hyp_integral_closed(&hs, &a, OriginCount::Shells) {
                            Ok(c) => {
                                assert!(l.is_final);
                                assert_eq!(c, l.value, "r={r} s={s}");
                            }
                            Err(Error::PrecisionExhausted(_)) => assert!(!l.is_final),
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }
}
