//! Sparse multivariate polynomials with arbitrary precision integer coefficients.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

const CLASS_SHIFT: u32 = 24;
const TAG_MASK: u32 = (1 << CLASS_SHIFT) - 1;

/// A formal parameter. The numeric value encodes the fixed symbol order
/// hbar < eps < k < z < c<tag> < x<tag> < named.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Sym(u32);

fn names() -> &'static RwLock<Vec<String>> {
    static NAMES: OnceLock<RwLock<Vec<String>>> = OnceLock::new();
    NAMES.get_or_init(|| RwLock::new(vec!["eps1".to_string(), "eps2".to_string()]))
}

impl Sym {
    pub const HBAR: Sym = Sym(0);
    pub const EPS: Sym = Sym(1 << CLASS_SHIFT);
    pub const K: Sym = Sym(2 << CLASS_SHIFT);
    pub const Z: Sym = Sym(3 << CLASS_SHIFT);

    /// Central charge symbol; tag 0 prints as `c`, tag r as `c<r>`.
    pub fn c(tag: u32) -> Sym {
        Sym((4 << CLASS_SHIFT) | (tag & TAG_MASK))
    }

    /// Evaluation shift symbol.
    pub fn x(tag: u32) -> Sym {
        Sym((5 << CLASS_SHIFT) | (tag & TAG_MASK))
    }

    pub fn named(name: &str) -> Sym {
        {
            let table = names().read().expect("symbol table poisoned");
            if let Some(p) = table.iter().position(|n| n == name) {
                return Sym((6 << CLASS_SHIFT) | p as u32);
            }
        }
        let mut table = names().write().expect("symbol table poisoned");
        if let Some(p) = table.iter().position(|n| n == name) {
            return Sym((6 << CLASS_SHIFT) | p as u32);
        }
        table.push(name.to_string());
        Sym((6 << CLASS_SHIFT) | (table.len() - 1) as u32)
    }

    pub fn class(self) -> u32 {
        self.0 >> CLASS_SHIFT
    }

    pub fn tag(self) -> u32 {
        self.0 & TAG_MASK
    }

    pub fn name(self) -> String {
        match self.class() {
            0 => "hbar".into(),
            1 => "eps".into(),
            2 => "k".into(),
            3 => "z".into(),
            4 if self.tag() == 0 => "c".into(),
            4 => format!("c{}", self.tag()),
            5 if self.tag() == 0 => "x".into(),
            5 => format!("x{}", self.tag()),
            _ => names().read().expect("symbol table poisoned")[self.tag() as usize].clone(),
        }
    }

    /// Inverse of [`Sym::name`].
    pub fn from_name(s: &str) -> Sym {
        match s {
            "hbar" => return Sym::HBAR,
            "eps" => return Sym::EPS,
            "k" => return Sym::K,
            "z" => return Sym::Z,
            "c" => return Sym::c(0),
            "x" => return Sym::x(0),
            _ => {}
        }
        for (prefix, mk) in [("c", Sym::c as fn(u32) -> Sym), ("x", Sym::x)] {
            if let Some(rest) = s.strip_prefix(prefix) {
                if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                    if let Ok(t) = rest.parse::<u32>() {
                        return mk(t);
                    }
                }
            }
        }
        Sym::named(s)
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Monomial as sorted (symbol, exponent) pairs with positive exponents.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Mono(pub SmallVec<[(Sym, u32); 4]>);

impl Mono {
    pub fn one() -> Mono {
        Mono(SmallVec::new())
    }

    pub fn var(s: Sym, e: u32) -> Mono {
        if e == 0 {
            return Mono::one();
        }
        let mut v = SmallVec::new();
        v.push((s, e));
        Mono(v)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exp(&self, s: Sym) -> u32 {
        self.0.iter().find(|&&(t, _)| t == s).map_or(0, |&(_, e)| e)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Mono(out)
    }

    /// `self / other` if divisible.
    pub fn div(&self, other: &Mono) -> Option<Mono> {
        let mut out = SmallVec::new();
        let mut j = 0;
        for &(s, e) in self.0.iter() {
            if j < other.0.len() && other.0[j].0 < s {
                return None;
            }
            if j < other.0.len() && other.0[j].0 == s {
                let f = other.0[j].1;
                j += 1;
                match e.cmp(&f) {
                    Ordering::Less => return None,
                    Ordering::Equal => {}
                    Ordering::Greater => out.push((s, e - f)),
                }
            } else {
                out.push((s, e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(Mono(out))
    }

    /// Componentwise minimum (monomial gcd).
    pub fn gcd(&self, other: &Mono) -> Mono {
        let mut out = SmallVec::new();
        for &(s, e) in self.0.iter() {
            let f = other.exp(s);
            if f > 0 {
                out.push((s, e.min(f)));
            }
        }
        Mono(out)
    }

    /// Remove symbol `s`, returning its exponent.
    pub fn split(&self, s: Sym) -> (u32, Mono) {
        let mut out = SmallVec::new();
        let mut e0 = 0;
        for &(t, e) in self.0.iter() {
            if t == s {
                e0 = e;
            } else {
                out.push((t, e));
            }
        }
        (e0, Mono(out))
    }
}

/// Degree-lexicographic order; among equal degrees the larger symbol dominates.
pub fn deglex(a: &Mono, b: &Mono) -> Ordering {
    let da = a.degree();
    let db = b.degree();
    if da != db {
        return da.cmp(&db);
    }
    let (x, y) = (&a.0, &b.0);
    let (mut i, mut j) = (x.len(), y.len());
    while i > 0 && j > 0 {
        let (sa, ea) = x[i - 1];
        let (sb, eb) = y[j - 1];
        if sa != sb {
            return sa.cmp(&sb);
        }
        if ea != eb {
            return ea.cmp(&eb);
        }
        i -= 1;
        j -= 1;
    }
    i.cmp(&j)
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        deglex(self, other)
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Polynomial with terms sorted by strictly decreasing monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Poly {
    terms: Vec<(Mono, BigInt)>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly { terms: Vec::new() }
    }

    pub fn one() -> Poly {
        Poly::constant(BigInt::one())
    }

    pub fn constant(c: BigInt) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(Mono::one(), c)] }
        }
    }

    pub fn from_i64(c: i64) -> Poly {
        Poly::constant(BigInt::from(c))
    }

    pub fn var(s: Sym) -> Poly {
        Poly { terms: vec![(Mono::var(s, 1), BigInt::one())] }
    }

    pub fn monomial(m: Mono, c: BigInt) -> Poly {
        if c.is_zero() {
            Poly::zero()
        } else {
            Poly { terms: vec![(m, c)] }
        }
    }

    /// Build from arbitrary terms, merging duplicates.
    pub fn from_terms(terms: impl IntoIterator<Item = (Mono, BigInt)>) -> Poly {
        let mut map: BTreeMap<Mono, BigInt> = BTreeMap::new();
        for (m, c) in terms {
            *map.entry(m).or_insert_with(BigInt::zero) += c;
        }
        let terms = map.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect();
        Poly { terms }
    }

    pub fn terms(&self) -> &[(Mono, BigInt)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one() && self.terms[0].1.is_one()
    }

    pub fn as_constant(&self) -> Option<BigInt> {
        match self.terms.len() {
            0 => Some(BigInt::zero()),
            1 if self.terms[0].0.is_one() => Some(self.terms[0].1.clone()),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.as_constant().is_some()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<&(Mono, BigInt)> {
        self.terms.first()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.first().map_or(0, |t| t.0.degree())
    }

    pub fn neg(&self) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = &a[i].1 + &b[j].1;
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Poly { terms: out }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect() }
    }

    pub fn mul_term(&self, m: &Mono, c: &BigInt) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        // multiplication by a monomial preserves the order
        Poly { terms: self.terms.iter().map(|(n, d)| (n.mul(m), d * c)).collect() }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if self.terms.len() == 1 {
            let (m, c) = &self.terms[0];
            return other.mul_term(m, c);
        }
        if other.terms.len() == 1 {
            let (m, c) = &other.terms[0];
            return self.mul_term(m, c);
        }
        let mut map: BTreeMap<Mono, BigInt> = BTreeMap::new();
        for (m, c) in &self.terms {
            for (n, d) in &other.terms {
                *map.entry(m.mul(n)).or_insert_with(BigInt::zero) += c * d;
            }
        }
        Poly { terms: map.into_iter().rev().filter(|(_, c)| !c.is_zero()).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut acc = Poly::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Gcd of the integer coefficients (nonnegative).
    pub fn content(&self) -> BigInt {
        let mut g = BigInt::zero();
        for (_, c) in &self.terms {
            g = g.gcd(c);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divide every coefficient exactly by `c`.
    pub fn div_int(&self, c: &BigInt) -> Poly {
        Poly { terms: self.terms.iter().map(|(m, d)| (m.clone(), d / c)).collect() }
    }

    /// Sign so that the leading coefficient is positive.
    pub fn leading_sign(&self) -> i32 {
        match self.terms.first() {
            Some((_, c)) if c.is_negative() => -1,
            _ => 1,
        }
    }

    pub fn vars(&self) -> Vec<Sym> {
        let mut v: Vec<Sym> = self.terms.iter().flat_map(|(m, _)| m.0.iter().map(|&(s, _)| s)).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn degree_in(&self, s: Sym) -> u32 {
        self.terms.iter().map(|(m, _)| m.exp(s)).max().unwrap_or(0)
    }

    /// Coefficients with respect to `s`, indexed by exponent.
    pub fn coeffs_in(&self, s: Sym) -> Vec<Poly> {
        let d = self.degree_in(s) as usize;
        let mut buckets: Vec<Vec<(Mono, BigInt)>> = vec![Vec::new(); d + 1];
        for (m, c) in &self.terms {
            let (e, rest) = m.split(s);
            buckets[e as usize].push((rest, c.clone()));
        }
        buckets.into_iter().map(Poly::from_terms).collect()
    }

    fn from_coeffs(s: Sym, coeffs: &[Poly]) -> Poly {
        let mut acc = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                acc = acc.add(&c.mul_term(&Mono::var(s, e as u32), &BigInt::one()));
            }
        }
        acc
    }

    /// Exact division; `None` when `other` does not divide `self`.
    pub fn div_exact(&self, other: &Poly) -> Option<Poly> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero());
        }
        if let Some(c) = other.as_constant() {
            if self.terms.iter().all(|(_, d)| (d % &c).is_zero()) {
                return Some(self.div_int(&c));
            }
            return None;
        }
        let (lm, lc) = other.terms[0].clone();
        let mut rem = self.clone();
        let mut quot: Vec<(Mono, BigInt)> = Vec::new();
        while let Some((m, c)) = rem.terms.first().cloned() {
            let qm = m.div(&lm)?;
            let (qc, r) = c.div_rem(&lc);
            if !r.is_zero() {
                return None;
            }
            rem = rem.sub(&other.mul_term(&qm, &qc));
            quot.push((qm, qc));
        }
        Some(Poly::from_terms(quot))
    }

    /// Evaluate at integer values; unbound symbols are an error of the caller.
    pub fn eval(&self, point: &dyn Fn(Sym) -> BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(s, e) in m.0.iter() {
                t *= num_traits::pow(point(s), e as usize);
            }
            acc += t;
        }
        acc
    }
}

/// Greatest common divisor, normalized to a positive leading coefficient.
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let g = gcd_raw(a, b);
    if g.leading_sign() < 0 {
        g.neg()
    } else {
        g
    }
}

fn gcd_raw(a: &Poly, b: &Poly) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return Poly::constant(a.content().gcd(&b.content()));
    }
    if a.len() == 1 || b.len() == 1 {
        let (single, other) = if a.len() == 1 { (a, b) } else { (b, a) };
        let mut m = single.terms[0].0.clone();
        for (n, _) in other.terms() {
            m = m.gcd(n);
            if m.is_one() {
                break;
            }
        }
        return Poly::monomial(m, single.content().gcd(&other.content()));
    }
    if a == b {
        return a.clone();
    }
    let va = a.vars();
    let vb = b.vars();
    let common: Vec<Sym> = va.iter().filter(|s| vb.contains(s)).copied().collect();
    let Some(&v) = common.last() else {
        return Poly::constant(a.content().gcd(&b.content()));
    };
    // variables present in only one argument can only appear in the content
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let gc = gcd_raw(&ca, &cb);
    let (mut f, mut g) = if pa.degree_in(v) >= pb.degree_in(v) { (pa, pb) } else { (pb, pa) };
    loop {
        let r = prem(&f, &g, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v) == 0 {
            g = Poly::one();
            break;
        }
        f = g;
        g = primitive_in(&r, v);
    }
    let g = primitive_in(&g, v);
    gc.mul(&g)
}

/// Gcd of coefficients with respect to `v`.
fn content_in(p: &Poly, v: Sym) -> Poly {
    let mut g = Poly::zero();
    for c in p.coeffs_in(v) {
        if c.is_zero() {
            continue;
        }
        g = gcd_raw(&g, &c);
        if g.is_constant() && g.content().is_one() {
            return Poly::one();
        }
    }
    if g.leading_sign() < 0 {
        g.neg()
    } else {
        g
    }
}

fn primitive_in(p: &Poly, v: Sym) -> Poly {
    let c = content_in(p, v);
    let q = p.div_exact(&c).expect("content divides");
    if q.leading_sign() < 0 {
        q.neg()
    } else {
        q
    }
}

/// Pseudo-remainder of `f` by `g` as univariate polynomials in `v`.
fn prem(f: &Poly, g: &Poly, v: Sym) -> Poly {
    let gc = g.coeffs_in(v);
    let dg = gc.len() - 1;
    let lc = gc[dg].clone();
    let mut r = f.coeffs_in(v);
    while r.len() > dg && !r.is_empty() {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        if lr.is_zero() {
            r.pop();
            continue;
        }
        let shift = dr - dg;
        let mut next: Vec<Poly> = r.iter().map(|c| c.mul(&lc)).collect();
        for (k, c) in gc.iter().enumerate() {
            next[k + shift] = next[k + shift].sub(&c.mul(&lr));
        }
        next.pop();
        while matches!(next.last(), Some(c) if c.is_zero()) {
            next.pop();
        }
        r = next;
    }
    Poly::from_coeffs(v, &r)
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if idx == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else if neg {
                f.write_str(" - ")?;
            } else {
                f.write_str(" + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                parts.push(abs.to_string());
            }
            for &(s, e) in m.0.iter() {
                if e == 1 {
                    parts.push(s.name());
                } else {
                    parts.push(format!("{}^{}", s.name(), e));
                }
            }
            f.write_str(&parts.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(s: Sym) -> Poly {
        Poly::var(s)
    }

    #[test]
    fn deglex_orders_degree_then_largest_symbol() {
        let h = Mono::var(Sym::HBAR, 1);
        let e = Mono::var(Sym::EPS, 1);
        let h2 = Mono::var(Sym::HBAR, 2);
        assert_eq!(deglex(&h, &e), Ordering::Less);
        assert_eq!(deglex(&e, &h2), Ordering::Less);
        assert_eq!(deglex(&Mono::one(), &h), Ordering::Less);
    }

    #[test]
    fn gcd_recovers_common_factor() {
        let h = v(Sym::HBAR);
        let e = v(Sym::EPS);
        let k = v(Sym::K);
        let f = h.add(&e).mul(&k.sub(&Poly::from_i64(2)));
        let a = f.mul(&h.sub(&k));
        let b = f.mul(&e.add(&k).add(&Poly::one()));
        assert_eq!(gcd(&a, &b), f);
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let a = v(Sym::HBAR).add(&Poly::one());
        let b = v(Sym::EPS).sub(&Poly::one());
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn exact_division_detects_non_divisibility() {
        let a = v(Sym::HBAR).mul(&v(Sym::EPS)).add(&Poly::one());
        assert!(a.div_exact(&v(Sym::HBAR)).is_none());
        let b = a.mul(&v(Sym::K));
        assert_eq!(b.div_exact(&v(Sym::K)).unwrap(), a);
    }

    #[test]
    fn symbol_names_round_trip() {
        for s in [Sym::HBAR, Sym::EPS, Sym::K, Sym::Z, Sym::c(0), Sym::c(3), Sym::x(2), Sym::named("eps1")] {
            assert_eq!(Sym::from_name(&s.name()), s);
        }
    }
}
