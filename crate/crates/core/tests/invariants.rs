use std::sync::OnceLock;

use num_rational::Rational64;
use num_traits::Zero;
use proptest::prelude::*;
use relchar_core::characters::{enumerate_x, MulChar};
use relchar_core::local_factors::RepGL2;
use relchar_core::local_field::{LieCoords, LocalElt};
use relchar_core::op_calculus::{SignConvention, Wavepacket};
use relchar_core::phase_space::{hyp_integral_closed, hyp_integral_lattice, HyperbolaSpec};
use relchar_core::relative_character::{
    packet_grid, relchar_bruteforce, relchar_table, BruteOptions, OriginCount, PairData,
};

const P: u64 = 3;

fn chars() -> &'static [MulChar] {
    static C: OnceLock<Vec<MulChar>> = OnceLock::new();
    C.get_or_init(|| enumerate_x(P, 2).unwrap())
}

fn pairs() -> &'static [PairData] {
    static PD: OnceLock<Vec<PairData>> = OnceLock::new();
    PD.get_or_init(|| {
        let mut out = Vec::new();
        for c0 in chars().iter().filter(|c| c.conductor() > 0) {
            let pi = RepGL2::principal_series(c0.clone()).unwrap();
            out.extend(chars().iter().filter_map(|c| PairData::new(&pi, c).ok()));
        }
        out
    })
}

fn unit(u: u64, val: i32) -> LocalElt {
    let u = u % 9;
    let u = if u.is_multiple_of(3) { u + 1 } else { u };
    LocalElt::new(P, val, u, 4)
}

fn sign(b: bool) -> SignConvention {
    if b {
        SignConvention::Negated
    } else {
        SignConvention::Literal
    }
}

/// A pair, a level and a point of its grid.
fn packet() -> impl Strategy<Value = (usize, u32, usize, bool)> {
    (0..pairs().len(), 0u32..3, any::<prop::sample::Index>(), any::<bool>()).prop_map(|(i, dl, ix, b)| {
        let pd = &pairs()[i];
        let level = pd.min_level() + dl;
        let n = packet_grid(pd, level, sign(b)).unwrap().len();
        (i, level, ix.index(n), b)
    })
}

fn grid_point(i: usize, level: u32, k: usize, b: bool) -> (&'static PairData, Wavepacket) {
    let pd = &pairs()[i];
    (pd, packet_grid(pd, level, sign(b)).unwrap()[k])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn characters_are_multiplicative(i in 0..9usize, a in 1u64..81, b in 1u64..81, va in -2i32..3, vb in -2i32..3) {
        let chi = &chars()[i % chars().len()];
        let (x, y) = (unit(a, va), unit(b, vb));
        let lhs = chi.eval_local(&x.mul(&y)).unwrap();
        let rhs = chi.eval_local(&x).unwrap() * chi.eval_local(&y).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!((lhs.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inverse_character_conjugates(i in 0..9usize, a in 1u64..81, v in -2i32..3) {
        let chi = &chars()[i % chars().len()];
        let x = unit(a, v);
        let z = chi.inv().eval_local(&x).unwrap();
        prop_assert!((z - chi.eval_local(&x).unwrap().conj()).norm() < 1e-12);
    }

    #[test]
    fn hyperbola_integral_is_a_nonnegative_volume((i, level, k, b) in packet()) {
        let (pd, a) = grid_point(i, level, k, b);
        let hs = HyperbolaSpec::new(pd, sign(b));
        let closed = hyp_integral_closed(&hs, &a, OriginCount::Shells).unwrap();
        prop_assert!(closed >= Rational64::zero());
        let lat = hyp_integral_lattice(&hs, &a, a.r().max(a.s()).max(1)).unwrap();
        prop_assert!(lat.is_final);
        prop_assert_eq!(lat.value, closed);
    }

    #[test]
    fn integral_vanishes_off_window((i, level, k, b) in packet()) {
        let (pd, a) = grid_point(i, level, k, b);
        let hs = HyperbolaSpec::new(pd, sign(b));
        if !pd.in_window(&a.tau.x, level, sign(b)).unwrap() {
            prop_assert_eq!(hyp_integral_closed(&hs, &a, OriginCount::Shells).unwrap(), Rational64::zero());
        }
    }

    #[test]
    fn shifting_tau_y_by_o_changes_nothing((i, level, k, b) in packet(), n in 1i64..9) {
        let (pd, a) = grid_point(i, level, k, b);
        let shifted = LieCoords::new(a.tau.x, a.tau.y.add(&LocalElt::from_i64(P, n, 4)), a.tau.z);
        let b2 = Wavepacket::new(level, shifted);
        let t1 = relchar_table(pd, &a, OriginCount::Shells, sign(b)).unwrap().value;
        let t2 = relchar_table(pd, &b2, OriginCount::Shells, sign(b)).unwrap().value;
        prop_assert!((t1 - t2).norm() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bruteforce_agrees_with_table((i, level, k, b) in packet()) {
        let (pd, a) = grid_point(i, level, k, b);
        let opts = BruteOptions { sign: sign(b), ..BruteOptions::default() };
        let bf = relchar_bruteforce(pd, &a, opts).unwrap().value;
        let t = relchar_table(pd, &a, OriginCount::Shells, sign(b)).unwrap().value;
        prop_assert!((bf - t).norm() < 1e-9, "{} vs {}", bf, t);
    }
}
