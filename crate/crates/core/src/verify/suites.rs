//! The three verification suites.

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_rational::Rational64;

use crate::characters::{enumerate_x, MulChar};
use crate::error::{Error, Result};
use crate::exec::{map_ordered, ExecMode};
use crate::kirillov::{braid_check, weyl_contour, KirillovCtx, KirillovVec, WeylConvention, WeylTable};
use crate::local_factors::{
    epsilon_gl1, epsilon_s, fe_residual, gauss_sum, tate_twist_residual, RepGL2, TestFn, TwistLaw,
};
use crate::local_field::{LieCoords, LocalElt};
use crate::op_calculus::{
    check_star_character, fourier_support_residual, microlocal_sign, op_full, ordering_spread, wavepacket_decompose,
    Wavepacket, DEFAULT_ORDER,
};
use crate::phase_space::{hyp_integral_closed, hyp_integral_lattice, HyperbolaSpec};
use crate::relative_character::{relchar_table, BruteForce, BruteOptions, Cell};

use super::config::{JobConfig, Suite, Task};
use super::report::{canon, pair, summarize_checks, CheckRecord, Record, Report, SummaryRow, VerifyRecord};

pub fn run(cfg: &JobConfig, mode: ExecMode) -> Result<Report> {
    match cfg.suite {
        Suite::Main => run_main(cfg, mode),
        Suite::Factors => run_factors(cfg, mode),
        Suite::Opcalc => run_opcalc(cfg, mode),
    }
}

fn rat_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn tau_strings(t: &LieCoords) -> [String; 3] {
    [t.x.to_rational().to_string(), t.y.to_rational().to_string(), t.z.to_rational().to_string()]
}

fn main_point(
    cfg: &JobConfig,
    task: &Task,
    hs: &HyperbolaSpec,
    engine: &std::result::Result<BruteForce, Error>,
    a: &Wavepacket,
) -> VerifyRecord {
    let pd = &task.pd;
    let tol = cfg.tol;
    let mut errors = Vec::new();
    let bf = match engine {
        Ok(e) => e.eval(a).map(|r| r.value).map_err(|e| errors.push(format!("bruteforce: {e}"))).ok(),
        Err(e) => {
            errors.push(format!("bruteforce: {e}"));
            None
        }
    };
    let table = match relchar_table(pd, a, cfg.origin, cfg.sign) {
        Ok(r) => Some(r.value),
        Err(Error::OutOfRegime(_)) => None,
        Err(e) => {
            errors.push(format!("table: {e}"));
            None
        }
    };
    let closed = hyp_integral_closed(hs, a, cfg.origin).map_err(|e| errors.push(format!("closed: {e}"))).ok();
    let lattice =
        hyp_integral_lattice(hs, a, a.r().max(a.s()).max(1) + 1).map_err(|e| errors.push(format!("lattice: {e}"))).ok();
    let lattice_exact = matches!((closed, lattice), (Some(c), Some(l)) if l.is_final && l.value == c);
    let rhs = closed.map(rat_f64);
    let ratio = match (bf, rhs) {
        (Some(b), Some(r)) if r > tol => Some(b / r),
        _ => None,
    };
    let mut pass = errors.is_empty() && lattice_exact;
    if let (Some(b), Some(r)) = (bf, rhs) {
        pass &= (b.norm() - r).abs() <= tol * r.max(1.0);
    }
    if let Some(q) = ratio {
        pass &= (q.norm() - 1.0).abs() <= tol;
    }
    if let (Some(b), Some(t)) = (bf, table) {
        pass &= (b - t).norm() <= tol * t.norm().max(1.0);
    }
    VerifyRecord {
        pair: task.pair.clone(),
        c_pair: pd.c_pair,
        level: a.level,
        tau: tau_strings(&a.tau),
        depths: [a.t(), a.r(), a.s()],
        cell: Cell::of(a.r(), a.s()),
        lhs_bruteforce: bf.map(pair),
        lhs_table: table.map(pair),
        rhs_closed: rhs.map(canon),
        rhs_lattice: lattice.map(|l| canon(rat_f64(l.value))),
        rhs_exact: closed.map(|c| c.to_string()),
        lattice_exact,
        ratio: ratio.map(pair),
        error: if errors.is_empty() { None } else { Some(errors.join("; ")) },
        pass,
    }
}

/// Brute force, table, closed form and lattice sum at every grid point.
pub fn run_main(cfg: &JobConfig, mode: ExecMode) -> Result<Report> {
    let tasks = cfg.tasks()?;
    let opts = BruteOptions { sign: cfg.sign, weyl: cfg.weyl, order: DEFAULT_ORDER };
    let engines: Vec<std::result::Result<BruteForce, Error>> =
        map_ordered(mode, &tasks, |t| BruteForce::new(&t.pd, t.level, opts));
    let hyps: Vec<HyperbolaSpec> = tasks.iter().map(|t| HyperbolaSpec::new(&t.pd, cfg.sign)).collect();
    let items: Vec<(usize, usize)> =
        tasks.iter().enumerate().flat_map(|(i, t)| (0..t.packets.len()).map(move |j| (i, j))).collect();
    let records: Vec<VerifyRecord> =
        map_ordered(mode, &items, |&(i, j)| main_point(cfg, &tasks[i], &hyps[i], &engines[i], &tasks[i].packets[j]));
    let summary = summarize_pairs(&records, cfg.tol);
    Ok(Report { records: records.into_iter().map(Record::Main).collect(), summary })
}

/// Per pair: the ratio must be one constant across the grid.
pub fn summarize_pairs(records: &[VerifyRecord], tol: f64) -> Vec<SummaryRow> {
    let mut rows: Vec<(SummaryRow, Option<Complex64>)> = Vec::new();
    for r in records {
        if rows.last().is_none_or(|(row, _)| row.name != r.pair) {
            let row =
                SummaryRow { suite: "main".into(), name: r.pair.clone(), count: 0, passed: 0, worst: 0.0, pass: true };
            rows.push((row, None));
        }
        let (row, first) = rows.last_mut().expect("row");
        row.count += 1;
        row.passed += r.pass as usize;
        row.pass &= r.pass;
        if let Some([re, im]) = r.ratio {
            let q = Complex64::new(re, im);
            match first {
                None => *first = Some(q),
                Some(q0) => row.worst = canon(row.worst.max((q - *q0).norm())),
            }
        }
    }
    rows.into_iter()
        .map(|(mut row, _)| {
            row.pass &= row.worst <= tol;
            row
        })
        .collect()
}

fn check(suite: &str, name: &str, params: String, residual: f64, tol: f64) -> CheckRecord {
    CheckRecord {
        suite: suite.into(),
        check: name.into(),
        params,
        residual: Some(canon(residual)),
        tol,
        pass: residual.is_finite() && residual <= tol,
    }
}

fn failed(suite: &str, name: &str, params: String, e: Error) -> CheckRecord {
    CheckRecord {
        suite: suite.into(),
        check: name.into(),
        params: format!("{params}; {e}"),
        residual: None,
        tol: 0.0,
        pass: false,
    }
}

fn recorded(suite: &str, name: &str, params: String, r: Result<f64>, tol: f64) -> CheckRecord {
    match r {
        Ok(x) => check(suite, name, params, x, tol),
        Err(e) => failed(suite, name, params, e),
    }
}

fn finish(records: Vec<CheckRecord>) -> Report {
    let summary = summarize_checks(&records);
    Report { records: records.into_iter().map(Record::Check).collect(), summary }
}

fn clabel(chi: &MulChar) -> String {
    super::config::CharSpec::of(chi).label()
}

pub const FE_GRID: [(f64, f64); 8] =
    [(0.2, 0.0), (0.5, 0.0), (0.8, 0.0), (0.3, 0.7), (0.6, -1.1), (0.45, 2.3), (0.9, 0.4), (0.1, -0.6)];

/// Root-number unitarity, Gauss-sum vanishing and modulus, both readings of
/// the twist law, the GL(1) functional equation and the unramified shift.
pub fn run_factors(cfg: &JobConfig, mode: ExecMode) -> Result<Report> {
    cfg.check()?;
    let p = cfg.p;
    let max_c = cfg.max_cond.unwrap_or(if p == 3 { 3 } else { 2 });
    let chis = enumerate_x(p, max_c)?;
    let q = p as f64;
    let s = "factors";
    let mut out = Vec::new();

    let per_chi: Vec<Vec<CheckRecord>> = map_ordered(mode, &chis, |chi| {
        let c = chi.conductor();
        let lab = format!("p={p} chi={}", clabel(chi));
        let mut v = Vec::new();
        v.push(check(s, "epsilon_unitarity", lab.clone(), (epsilon_gl1(chi).norm() - 1.0).abs(), 1e-10));
        for k in 0..=max_c + 1 {
            let t = LocalElt::pi_pow(p, -(k as i32), k.max(1));
            let mismatch = k != c && !(c == 0 && k <= 1);
            if mismatch {
                v.push(recorded(
                    s,
                    "gauss_mismatch",
                    format!("{lab} k={k}"),
                    gauss_sum(chi, &t).map(|g| g.norm()),
                    1e-12,
                ));
            } else if c > 0 {
                let r = gauss_sum(chi, &t).map(|g| (g.norm_sqr() - q.powi(-(c as i32))).abs());
                v.push(recorded(s, "gauss_modulus", lab.clone(), r, 1e-10));
            }
        }
        let fs = [
            TestFn::ball(p, 0),
            TestFn::ball(p, 2),
            TestFn::coset(LocalElt::from_i64(p, 1, 6), 2),
            TestFn::coset(LocalElt::from_i64(p, 2, 6), 3),
            TestFn::coset(LocalElt::from_frac(p, 2, 1, 6), 1),
        ];
        let chi_w = chi.with_wpi(Rational64::new(1, 5));
        let mut worst = 0f64;
        let mut err = None;
        for f in &fs {
            for &(re, im) in &FE_GRID {
                match fe_residual(f, &chi_w, Complex64::new(re, im)) {
                    Ok(r) => worst = worst.max(r),
                    Err(e) => err = Some(e),
                }
            }
        }
        v.push(match err {
            Some(e) => failed(s, "gl1_functional_equation", lab.clone(), e),
            None => check(s, "gl1_functional_equation", lab.clone(), worst, 1e-9),
        });
        let n = c as i32;
        let base = Complex64::new(0.3, 0.1);
        let mut shift = 0f64;
        for a in -2..=2 {
            let lhs = epsilon_s(chi, base + a as f64);
            shift = shift.max((lhs - q.powi(-a * n) * epsilon_s(chi, base)).norm());
        }
        v.push(check(s, "twist_shift", lab, shift, 1e-10));
        v
    });
    out.extend(per_chi.into_iter().flatten());

    let twist_conds: &[u32] = if p == 3 { &[2, 4] } else { &[2] };
    for &cc in twist_conds {
        let big: Vec<MulChar> = enumerate_x(p, cc)?.into_iter().filter(|c| c.conductor() == cc).collect();
        let small: Vec<MulChar> =
            enumerate_x(p, cc / 2)?.into_iter().flat_map(|o| [o.clone(), o.with_wpi(Rational64::new(1, 3))]).collect();
        for (law, name) in [(TwistLaw::Stated, "tate_twist"), (TwistLaw::Inverse, "tate_twist_inverse")] {
            let recs: Vec<CheckRecord> = map_ordered(mode, &big, |chi| {
                let mut worst = 0f64;
                for om in &small {
                    match tate_twist_residual(chi, om, law) {
                        Ok(r) => worst = worst.max(r),
                        Err(e) => return failed(s, name, format!("p={p} chi={}", clabel(chi)), e),
                    }
                }
                check(s, name, format!("p={p} chi={} omegas={}", clabel(chi), small.len()), worst, 1e-9)
            });
            out.extend(recs);
        }
    }
    Ok(finish(out))
}

/// Sign `s` expected in `pi(n(x)) Op(a) W = psi(s x T tau_y) Op(a) W`.
pub fn expected_microlocal_sign(sign: crate::op_calculus::SignConvention) -> i64 {
    -sign.sigma()
}

/// Orderings, the zero packet, microlocalization, the star character,
/// reconstruction, Weyl involution and contour, braid relations.
pub fn run_opcalc(cfg: &JobConfig, mode: ExecMode) -> Result<Report> {
    let tasks = cfg.tasks()?;
    let s = "opcalc";
    let opts = BruteOptions { sign: cfg.sign, weyl: cfg.weyl, order: DEFAULT_ORDER };
    let want = expected_microlocal_sign(cfg.sign);
    let per_task: Vec<Vec<CheckRecord>> = map_ordered(mode, &tasks, |t| {
        let lab = format!("{} N={}", t.pair, t.level);
        let bf = match BruteForce::new(&t.pd, t.level, opts) {
            Ok(b) => b,
            Err(e) => return vec![failed(s, "setup", lab, e)],
        };
        let (v, table) = (bf.v(), bf.table());
        let mut out = Vec::new();
        let mut worst = 0f64;
        for a in &t.packets {
            match ordering_spread(a, v, table, cfg.sign) {
                Ok(r) => worst = worst.max(r),
                Err(e) => out.push(failed(s, "orderings", lab.clone(), e)),
            }
        }
        out.push(check(s, "orderings", format!("{lab} packets={}", t.packets.len()), worst, 1e-9));
        let a0 = Wavepacket::new(t.level, LieCoords::zero(t.pd.p()));
        let proj = op_full(&a0, v, table, DEFAULT_ORDER, cfg.sign)
            .and_then(|once| Ok(op_full(&a0, &once, table, DEFAULT_ORDER, cfg.sign)?.max_abs_diff(&once)));
        out.push(recorded(s, "zero_projection", lab.clone(), proj, 1e-9));
        let units: Vec<u64> = (1..t.pd.p() * t.pd.p()).filter(|u| u % t.pd.p() != 0).collect();
        for a in t.packets.iter().filter(|a| a.r() + a.s() > 0) {
            let w = match op_full(a, v, table, DEFAULT_ORDER, cfg.sign) {
                Ok(w) => w,
                Err(e) => {
                    out.push(failed(s, "microlocal_sign", lab.clone(), e));
                    continue;
                }
            };
            if w.norm() < 1e-9 {
                continue;
            }
            let params = format!("{lab} tau={:?}", tau_strings(&a.tau));
            out.push(match microlocal_sign(&w, a, table, &units, 1e-8) {
                Ok((Some(sg), plus, minus)) if sg == want => {
                    check(s, "microlocal_sign", params, if sg > 0 { plus } else { minus }, 1e-8)
                }
                Ok((sg, plus, minus)) => CheckRecord {
                    suite: s.into(),
                    check: "microlocal_sign".into(),
                    params: format!("{params}; sign {sg:?}, expected {want}"),
                    residual: Some(canon(plus.min(minus))),
                    tol: 1e-8,
                    pass: false,
                },
                Err(e) => failed(s, "microlocal_sign", params, e),
            });
        }
        out
    });
    let mut out: Vec<CheckRecord> = per_task.into_iter().flatten().collect();

    for level in [1u32, 2] {
        let r = check_star_character(3, level, 2).map(|rep| rep.failures as f64);
        out.push(recorded(s, "star_character", format!("p=3 N={level} m=2"), r, 0.0));
    }
    for (tau, d) in [([0, 1, 2], 1), ([0, 0, 0], 0), ([1, 2, 0], 1)] {
        let r = fourier_support_residual(3, 1, tau, d, 2);
        out.push(recorded(s, "fourier_support", format!("p=3 N=1 tau={tau:?}/3^{d}"), r, 1e-12));
    }
    for t in tasks.iter().take(4) {
        out.push(reconstruction(t));
    }

    let mut seen = BTreeSet::new();
    let mut reps: Vec<RepGL2> = Vec::new();
    for t in &tasks {
        if seen.insert(format!("{:?}", t.pd.pi)) {
            reps.push(t.pd.pi.clone());
        }
    }
    let per_rep: Vec<Vec<CheckRecord>> = map_ordered(mode, &reps, |pi| weyl_checks(pi, cfg.weyl));
    out.extend(per_rep.into_iter().flatten());
    Ok(finish(out))
}

fn reconstruction(t: &Task) -> CheckRecord {
    let samples: Vec<(LieCoords, Complex64)> = t
        .packets
        .iter()
        .enumerate()
        .map(|(k, a)| (a.tau, Complex64::new((k * 7 % 5) as f64 - 2.0, (k % 3) as f64)))
        .collect();
    let lab = format!("{} N={} samples={}", t.pair, t.level, samples.len());
    let r = wavepacket_decompose(&samples, t.level).and_then(|sum| {
        let mut worst = 0f64;
        for (tau, v) in &samples {
            worst = worst.max((sum.eval(tau)? - v).norm());
        }
        Ok(worst)
    });
    recorded("opcalc", "reconstruction", lab, r, 0.0)
}

fn weyl_checks(pi: &RepGL2, conv: WeylConvention) -> Vec<CheckRecord> {
    let s = "opcalc";
    let lab = format!("{} p={}", pi.kind(), pi.p());
    let ctx = match KirillovCtx::new(pi.p(), 2) {
        Ok(c) => c,
        Err(e) => return vec![failed(s, "weyl", lab, e)],
    };
    let table = match WeylTable::new(pi, &ctx, conv) {
        Ok(t) => t,
        Err(e) => return vec![failed(s, "weyl", lab, e)],
    };
    let one = Complex64::new(1.0, 0.0);
    let (mut inv, mut unit, mut cont) = (0f64, 0f64, 0f64);
    let mut err = None;
    for j in 0..ctx.order() {
        if table.entry(j).is_none() {
            continue;
        }
        for n in -3..=3 {
            let w = KirillovVec::shell(&ctx, n, j, one);
            let r = (|| -> Result<()> {
                let once = table.apply(&w)?;
                unit = unit.max((once.norm() - w.norm()).abs());
                inv = inv.max(table.apply(&once)?.max_abs_diff(&w));
                let contour = weyl_contour(pi, &ctx, conv, n, j, 64)?;
                cont = cont.max(table.on_shell(n, j)?.max_abs_diff(&contour));
                Ok(())
            })();
            if let Err(e) = r {
                err = Some(e);
            }
        }
    }
    if let Some(e) = err {
        return vec![failed(s, "weyl", lab, e)];
    }
    let mut out = vec![
        check(s, "weyl_unitarity", lab.clone(), unit, 1e-9),
        check(s, "weyl_involution", lab.clone(), inv, 1e-9),
        check(s, "weyl_contour", lab.clone(), cont, 1e-9),
    ];
    // shells meeting an L-factor cannot be moved by w; reps with none left are skipped
    let (res, used) = braid_check(&table, conv.matrix(), -2..=0, &[1, 2, 4]);
    if used > 0 {
        out.push(check(s, "braid", format!("{lab} {:?} points={used}", conv.matrix()), res, 1e-9));
    }
    out
}
