//! Exact arithmetic in `O/p^m` and in the residue rings of the two kinds of
//! quadratic extension, together with the structure of their unit groups.
//!
//! Base ring elements are integers modulo `p^m`. Extension ring elements are
//! pairs `a + b*s` with `s^2 = u` (unramified, `u` a non-residue) or
//! `s^2 = p` (ramified, `s` a uniformizer). In the ramified case both
//! coordinates are kept modulo `p^m`, which is precision `2m` in powers of
//! the uniformizer of `E`.

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn checked_pow(p: u64, k: u32) -> Option<u64> {
    let mut r: u64 = 1;
    for _ in 0..k {
        r = r.checked_mul(p)?;
    }
    Some(r)
}

pub fn pow_u64(p: u64, k: u32) -> u64 {
    checked_pow(p, k).expect("p^k overflows u64")
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let (mut old_r, mut r) = (a as i128 % m as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(m as i128) as u64)
}

/// p-adic valuation of a nonzero integer.
pub fn v_p(mut n: u64, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let mut v = 0;
    while n.is_multiple_of(p) {
        n /= p;
        v += 1;
    }
    v
}

/// Valuation of `k!`.
pub fn v_p_factorial(k: u64, p: u64) -> u32 {
    let mut v = 0;
    let mut q = p;
    while q <= k {
        v += (k / q) as u32;
        q = match q.checked_mul(p) {
            Some(x) => x,
            None => break,
        };
    }
    v
}

/// Legendre symbol (a/p) for odd prime p, as -1, 0, 1.
pub fn legendre(a: u64, p: u64) -> i32 {
    let a = a % p;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

fn prime_factors(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `exp(x) mod p^prec` for an integer `x` divisible by `p` (p odd).
pub fn padic_exp(p: u64, x: u64, prec: u32) -> u64 {
    let modulus = pow_u64(p, prec);
    if x.is_multiple_of(modulus) {
        return 1 % modulus;
    }
    assert!(x.is_multiple_of(p), "exp needs x in p");
    // k*v(x) - v(k!) >= k/2, so terms beyond 2*prec vanish
    let kmax = 2 * prec as u64 + 1;
    let extra = v_p_factorial(kmax, p);
    let big = pow_u64(p, prec + extra) as u128;
    let mut sum: u128 = 1;
    let mut power: u128 = 1;
    let mut fact_unit: u128 = 1;
    let mut fact_v = 0u32;
    for k in 1..=kmax {
        power = power * (x as u128 % big) % big;
        let vk = v_p(k, p);
        fact_v += vk;
        fact_unit = fact_unit * (k / pow_u64(p, vk)) as u128 % big;
        let t = power / pow_u64(p, fact_v) as u128;
        let inv = inv_mod((fact_unit % modulus as u128) as u64, modulus).unwrap() as u128;
        sum = (sum + (t % modulus as u128) * inv) % modulus as u128;
    }
    (sum % modulus as u128) as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Ext {
    None,
    /// `E = F(sqrt(u))` with `u` a non-residue unit.
    Unramified {
        u: u64,
    },
    /// `E = F(sqrt(p))`, uniformizer `sqrt(p)`.
    Ramified,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResidueRingCfg {
    pub p: u64,
    pub m: u32,
    pub ext: Ext,
}

impl ResidueRingCfg {
    pub fn base(p: u64, m: u32) -> Self {
        ResidueRingCfg { p, m, ext: Ext::None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueElt {
    pub a: u64,
    pub b: u64,
}

impl ResidueElt {
    pub const fn new(a: u64, b: u64) -> Self {
        ResidueElt { a, b }
    }
    pub const fn base(a: u64) -> Self {
        ResidueElt { a, b: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResidueRing {
    cfg: ResidueRingCfg,
    pm: u64,
    d: u64,
}

pub fn ring_make(cfg: ResidueRingCfg) -> Result<ResidueRing> {
    let p = cfg.p;
    if p == 2 {
        return Err(Error::EvenPrime);
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if cfg.m == 0 {
        return Err(Error::BadPrecision("m must be at least 1".into()));
    }
    let pm = checked_pow(p, cfg.m)
        .filter(|&x| x < (1u64 << 42))
        .ok_or_else(|| Error::BadPrecision(format!("{p}^{} is too large", cfg.m)))?;
    let d = match cfg.ext {
        Ext::None => 0,
        Ext::Unramified { u } => {
            if legendre(u, p) != -1 {
                return Err(Error::SquareParameter { p, u });
            }
            u % pm
        }
        Ext::Ramified => p % pm,
    };
    Ok(ResidueRing { cfg, pm, d })
}

impl ResidueRing {
    pub fn cfg(&self) -> ResidueRingCfg {
        self.cfg
    }
    pub fn p(&self) -> u64 {
        self.cfg.p
    }
    pub fn m(&self) -> u32 {
        self.cfg.m
    }
    pub fn modulus(&self) -> u64 {
        self.pm
    }
    pub fn is_ext(&self) -> bool {
        self.cfg.ext != Ext::None
    }
    /// Square of the adjoined root (0 for the base ring).
    pub fn root_square(&self) -> u64 {
        self.d
    }
    pub fn ramification(&self) -> u32 {
        if self.cfg.ext == Ext::Ramified {
            2
        } else {
            1
        }
    }
    pub fn inertia(&self) -> u32 {
        if matches!(self.cfg.ext, Ext::Unramified { .. }) {
            2
        } else {
            1
        }
    }
    /// Exponent `d` with `psi o Tr` trivial on `p_E^{-d}` but not beyond.
    pub fn different_exponent(&self) -> u32 {
        if self.cfg.ext == Ext::Ramified {
            1
        } else {
            0
        }
    }
    /// Precision in powers of the uniformizer of the ring.
    pub fn pi_precision(&self) -> u32 {
        self.cfg.m * self.ramification()
    }
    pub fn residue_size(&self) -> u64 {
        pow_u64(self.cfg.p, self.inertia())
    }

    pub fn elt(&self, a: u64, b: u64) -> ResidueElt {
        if self.is_ext() {
            ResidueElt::new(a % self.pm, b % self.pm)
        } else {
            ResidueElt::new(a % self.pm, 0)
        }
    }
    pub fn from_i64(&self, a: i64) -> ResidueElt {
        ResidueElt::base(a.rem_euclid(self.pm as i64) as u64)
    }
    pub fn zero(&self) -> ResidueElt {
        ResidueElt::new(0, 0)
    }
    pub fn one(&self) -> ResidueElt {
        ResidueElt::new(1 % self.pm, 0)
    }
    /// The uniformizer of the ring (`p`, `p`, or `sqrt(p)`).
    pub fn uniformizer(&self) -> ResidueElt {
        match self.cfg.ext {
            Ext::Ramified => ResidueElt::new(0, 1),
            _ => self.elt(self.cfg.p, 0),
        }
    }

    pub fn add(&self, x: ResidueElt, y: ResidueElt) -> ResidueElt {
        ResidueElt::new((x.a + y.a) % self.pm, (x.b + y.b) % self.pm)
    }
    pub fn neg(&self, x: ResidueElt) -> ResidueElt {
        ResidueElt::new((self.pm - x.a) % self.pm, (self.pm - x.b) % self.pm)
    }
    pub fn sub(&self, x: ResidueElt, y: ResidueElt) -> ResidueElt {
        self.add(x, self.neg(y))
    }
    pub fn mul(&self, x: ResidueElt, y: ResidueElt) -> ResidueElt {
        let m = self.pm;
        if !self.is_ext() {
            return ResidueElt::new(mul_mod(x.a, y.a, m), 0);
        }
        let a = (mul_mod(x.a, y.a, m) + mul_mod(self.d, mul_mod(x.b, y.b, m), m)) % m;
        let b = (mul_mod(x.a, y.b, m) + mul_mod(x.b, y.a, m)) % m;
        ResidueElt::new(a, b)
    }
    pub fn scale(&self, x: ResidueElt, c: u64) -> ResidueElt {
        ResidueElt::new(mul_mod(x.a, c, self.pm), mul_mod(x.b, c, self.pm))
    }
    pub fn pow(&self, x: ResidueElt, mut e: u64) -> ResidueElt {
        let mut r = self.one();
        let mut b = x;
        while e > 0 {
            if e & 1 == 1 {
                r = self.mul(r, b);
            }
            b = self.mul(b, b);
            e >>= 1;
        }
        r
    }
    pub fn conj(&self, x: ResidueElt) -> ResidueElt {
        ResidueElt::new(x.a, (self.pm - x.b) % self.pm)
    }
    fn norm_raw(&self, x: ResidueElt) -> u64 {
        let m = self.pm;
        let aa = mul_mod(x.a, x.a, m);
        let bb = mul_mod(self.d, mul_mod(x.b, x.b, m), m);
        (aa + m - bb) % m
    }
    pub fn is_unit(&self, x: ResidueElt) -> bool {
        let p = self.cfg.p;
        match self.cfg.ext {
            Ext::None | Ext::Ramified => !x.a.is_multiple_of(p),
            Ext::Unramified { .. } => !self.norm_raw(x).is_multiple_of(p),
        }
    }
    pub fn inv(&self, x: ResidueElt) -> Option<ResidueElt> {
        if !self.is_unit(x) {
            return None;
        }
        if !self.is_ext() {
            return Some(ResidueElt::base(inv_mod(x.a, self.pm)?));
        }
        let n_inv = inv_mod(self.norm_raw(x), self.pm)?;
        Some(self.scale(self.conj(x), n_inv))
    }
    /// Norm and trace down to the base ring `Z/p^m`.
    pub fn norm_trace(&self, x: ResidueElt) -> Result<(u64, u64)> {
        if !self.is_ext() {
            return Err(Error::NotExtension);
        }
        Ok((self.norm_raw(x), (2 * x.a) % self.pm))
    }
    /// Valuation in powers of the ring uniformizer; `None` for zero.
    pub fn val_pi(&self, x: ResidueElt) -> Option<u32> {
        let p = self.cfg.p;
        let va = if x.a == 0 { None } else { Some(v_p(x.a, p)) };
        let vb = if x.b == 0 { None } else { Some(v_p(x.b, p)) };
        match self.cfg.ext {
            Ext::None => va,
            Ext::Unramified { .. } => match (va, vb) {
                (None, None) => None,
                (a, b) => Some(a.unwrap_or(u32::MAX).min(b.unwrap_or(u32::MAX))),
            },
            Ext::Ramified => match (va, vb) {
                (None, None) => None,
                (a, b) => Some(a.map(|v| 2 * v).unwrap_or(u32::MAX).min(b.map(|v| 2 * v + 1).unwrap_or(u32::MAX))),
            },
        }
    }
    pub fn reduce_to(&self, x: ResidueElt, m: u32) -> ResidueElt {
        let q = pow_u64(self.cfg.p, m.min(self.cfg.m));
        ResidueElt::new(x.a % q, x.b % q)
    }

    pub fn unit_count(&self) -> u64 {
        let p = self.cfg.p;
        let m = self.cfg.m;
        match self.cfg.ext {
            Ext::None => pow_u64(p, m - 1) * (p - 1),
            Ext::Unramified { .. } => pow_u64(p, 2 * (m - 1)) * (p * p - 1),
            Ext::Ramified => pow_u64(p, 2 * m - 1) * (p - 1),
        }
    }
    pub fn size(&self) -> u64 {
        if self.is_ext() {
            self.pm * self.pm
        } else {
            self.pm
        }
    }
    /// All elements in lexicographic `(b, a)` order.
    pub fn elements(&self) -> impl Iterator<Item = ResidueElt> + '_ {
        let bmax = if self.is_ext() { self.pm } else { 1 };
        (0..bmax).flat_map(move |b| (0..self.pm).map(move |a| ResidueElt::new(a, b)))
    }
    pub fn units(&self) -> Vec<ResidueElt> {
        self.elements().filter(|&x| self.is_unit(x)).collect()
    }
}

const TABLE_LIMIT: u64 = 100_000;

#[derive(Debug)]
struct Bsgs {
    step: u64,
    baby: HashMap<u64, u64>,
    giant: u64,
}

#[derive(Debug)]
struct PrimaryPart {
    /// Exponent sending `x` to its component in this part.
    projector: u64,
    gens: Vec<usize>,
    table: HashMap<ResidueElt, Vec<u64>>,
}

#[derive(Debug)]
enum Dlog {
    Cyclic { table: Option<Vec<u32>>, bsgs: Option<Bsgs> },
    Primary(Vec<PrimaryPart>),
}

/// Generators, orders and a discrete logarithm for the unit group of a ring.
#[derive(Debug)]
pub struct UnitGroupStructure {
    ring: ResidueRing,
    generators: Vec<ResidueElt>,
    orders: Vec<u64>,
    order: u64,
    dlog: Dlog,
}

/// Smallest integer that is a primitive root modulo every power of `p`.
pub fn canonical_primitive_root(p: u64) -> u64 {
    let factors = prime_factors(p - 1);
    let p2 = p * p;
    (2..p)
        .find(|&g| factors.iter().all(|&(l, _)| pow_mod(g, (p - 1) / l, p) != 1) && pow_mod(g, p - 1, p2) != 1)
        .expect("primitive root exists")
}

pub fn unit_group(ring: &ResidueRing) -> UnitGroupStructure {
    if ring.is_ext() {
        primary_structure(ring)
    } else {
        cyclic_structure(ring)
    }
}

fn cyclic_structure(ring: &ResidueRing) -> UnitGroupStructure {
    let p = ring.p();
    let pm = ring.modulus();
    let n = ring.unit_count();
    let g = canonical_primitive_root(p) % pm;
    let (table, bsgs) = if n <= TABLE_LIMIT {
        let mut t = vec![u32::MAX; pm as usize];
        let mut x = 1 % pm;
        for k in 0..n {
            t[x as usize] = k as u32;
            x = mul_mod(x, g, pm);
        }
        (Some(t), None)
    } else {
        let step = (n as f64).sqrt().ceil() as u64;
        let mut baby = HashMap::with_capacity(step as usize);
        let mut x = 1 % pm;
        for j in 0..step {
            baby.entry(x).or_insert(j);
            x = mul_mod(x, g, pm);
        }
        let giant = inv_mod(pow_mod(g, step, pm), pm).unwrap();
        (None, Some(Bsgs { step, baby, giant }))
    };
    UnitGroupStructure {
        ring: ring.clone(),
        generators: vec![ResidueElt::base(g)],
        orders: vec![n],
        order: n,
        dlog: Dlog::Cyclic { table, bsgs },
    }
}

fn primary_structure(ring: &ResidueRing) -> UnitGroupStructure {
    let n = ring.unit_count();
    let units = ring.units();
    debug_assert_eq!(units.len() as u64, n);
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    let mut parts = Vec::new();
    for (ell, e) in prime_factors(n) {
        let size = pow_u64(ell, e);
        let cofactor = n / size;
        let y = inv_mod(cofactor % size, size).unwrap_or(0);
        let projector = (cofactor as u128 * y as u128 % n as u128) as u64;
        // elements of the ell-primary part in a deterministic order
        let mut seen = HashSet::new();
        let mut elems = Vec::new();
        for &u in &units {
            let x = ring.pow(u, cofactor);
            if seen.insert(x) {
                elems.push(x);
            }
        }
        debug_assert_eq!(elems.len() as u64, size);
        let mut table: HashMap<ResidueElt, Vec<u64>> = HashMap::new();
        table.insert(ring.one(), Vec::new());
        let mut part_gens: Vec<(ResidueElt, u64)> = Vec::new();
        while (table.len() as u64) < size {
            // element of maximal order modulo the current subgroup
            let mut best: Option<(ResidueElt, u32)> = None;
            for &x in &elems {
                let mut a = 0u32;
                let mut z = x;
                while !table.contains_key(&z) {
                    z = ring.pow(z, ell);
                    a += 1;
                }
                if best.is_none_or(|(_, b)| a > b) {
                    best = Some((x, a));
                }
            }
            let (x, a) = best.unwrap();
            let la = pow_u64(ell, a);
            let h = ring.pow(x, la);
            let coords = table[&h].clone();
            let mut xc = x;
            for (i, &t) in coords.iter().enumerate() {
                assert!(t % la == 0, "basis correction failed");
                let (g, ord) = part_gens[i];
                let k = (ord - (t / la) % ord) % ord;
                xc = ring.mul(xc, ring.pow(g, k));
            }
            debug_assert_eq!(ring.pow(xc, la), ring.one());
            let old: Vec<(ResidueElt, Vec<u64>)> = table.drain().collect();
            let mut power = ring.one();
            for k in 0..la {
                for (h, c) in &old {
                    let mut c2 = c.clone();
                    c2.push(k);
                    table.insert(ring.mul(*h, power), c2);
                }
                power = ring.mul(power, xc);
            }
            part_gens.push((xc, la));
        }
        let base = generators.len();
        for &(g, ord) in &part_gens {
            generators.push(g);
            orders.push(ord);
        }
        parts.push(PrimaryPart { projector, gens: (base..base + part_gens.len()).collect(), table });
    }
    UnitGroupStructure { ring: ring.clone(), generators, orders, order: n, dlog: Dlog::Primary(parts) }
}

impl UnitGroupStructure {
    pub fn ring(&self) -> &ResidueRing {
        &self.ring
    }
    pub fn generators(&self) -> &[ResidueElt] {
        &self.generators
    }
    pub fn orders(&self) -> &[u64] {
        &self.orders
    }
    pub fn order(&self) -> u64 {
        self.order
    }
    pub fn is_cyclic_base(&self) -> bool {
        matches!(self.dlog, Dlog::Cyclic { .. })
    }

    /// Exponent of `x` against the single generator of a base unit group.
    pub fn cyclic_index(&self, x: u64) -> Option<u64> {
        let pm = self.ring.modulus();
        let x = x % pm;
        if x.is_multiple_of(self.ring.p()) {
            return None;
        }
        match &self.dlog {
            Dlog::Cyclic { table: Some(t), .. } => {
                let k = t[x as usize];
                (k != u32::MAX).then_some(k as u64)
            }
            Dlog::Cyclic { bsgs: Some(b), .. } => {
                let mut y = x;
                for i in 0..=b.step {
                    if let Some(&j) = b.baby.get(&y) {
                        return Some((i * b.step + j) % self.order);
                    }
                    y = mul_mod(y, b.giant, pm);
                }
                None
            }
            _ => None,
        }
    }

    pub fn dlog(&self, x: ResidueElt) -> Option<Vec<u64>> {
        if !self.ring.is_unit(x) {
            return None;
        }
        match &self.dlog {
            Dlog::Cyclic { .. } => self.cyclic_index(x.a).map(|k| vec![k]),
            Dlog::Primary(parts) => {
                let mut out = vec![0u64; self.generators.len()];
                for part in parts {
                    let xl = self.ring.pow(x, part.projector);
                    let c = part.table.get(&xl)?;
                    for (slot, &g) in c.iter().zip(&part.gens) {
                        out[g] = *slot;
                    }
                }
                Some(out)
            }
        }
    }

    pub fn exp(&self, coords: &[u64]) -> ResidueElt {
        let mut r = self.ring.one();
        for (g, &c) in self.generators.iter().zip(coords) {
            r = self.ring.mul(r, self.ring.pow(*g, c));
        }
        r
    }
}

type GroupCache = Mutex<HashMap<ResidueRingCfg, Arc<UnitGroupStructure>>>;

fn cache() -> &'static GroupCache {
    static CACHE: OnceLock<GroupCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Shared, memoized unit group for a ring configuration.
pub fn shared_group(cfg: ResidueRingCfg) -> Result<Arc<UnitGroupStructure>> {
    if let Some(g) = cache().lock().unwrap().get(&cfg) {
        return Ok(g.clone());
    }
    let ring = ring_make(cfg)?;
    let g = Arc::new(unit_group(&ring));
    Ok(cache().lock().unwrap().entry(cfg).or_insert(g).clone())
}

pub fn base_group(p: u64, m: u32) -> Result<Arc<UnitGroupStructure>> {
    shared_group(ResidueRingCfg::base(p, m))
}
