//! Normally ordered mode sums over one or more index variables.
//!
//! An [`Atom`] is `coeff * sum_{s in ranges} f_1(s) ... f_m(s)` where each factor is a
//! current generator whose mode is affine in the index variables. A [`SumExpr`] is a
//! finite [`AlgElement`] plus a list of atoms. Equality in the degreewise completion is
//! decided by [`SumExpr::truncate`]: modulo the span `I_N` of PBW monomials whose
//! positive-mode part has degree at least `N`, only finitely many summands survive.

use std::collections::BTreeMap;
use std::fmt;

use itertools::Itertools;
use rayon::prelude::*;
use smallvec::SmallVec;
use thiserror::Error;

use crate::current::{Ambient, AlgElement, Gen, Mono};
use crate::scalar::{ParamScalar, ScalarError, Sym};

pub const MAX_VARS: usize = 4;
pub const MAX_FACTORS: usize = 4;

const VAR_NAMES: [&str; MAX_VARS] = ["s", "w", "s2", "w2"];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModeSumError {
    #[error("atom has {0} factors; at most {MAX_FACTORS} are supported")]
    TooManyFactors(usize),
    #[error("atom has {0} index variables; at most {MAX_VARS} are supported")]
    TooManyVars(usize),
    #[error("unsupported sum shape: {0}")]
    Unsupported(String),
    #[error("divergent sum: {0}")]
    Divergence(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Range {
    /// `s >= 0`
    NonNeg,
    /// `s in Z`
    All,
}

/// `c + sum_v a[v] * s_v`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Affine {
    pub c: i64,
    pub a: [i64; MAX_VARS],
}

impl Affine {
    pub fn constant(c: i64) -> Self {
        Affine { c, a: [0; MAX_VARS] }
    }

    /// `c + sign * s_v`.
    pub fn var(v: usize, sign: i64, c: i64) -> Self {
        let mut a = [0; MAX_VARS];
        a[v] = sign;
        Affine { c, a }
    }

    pub fn is_const(&self) -> bool {
        self.a.iter().all(|&x| x == 0)
    }

    pub fn eval(&self, pt: &[i64]) -> i64 {
        self.c + pt.iter().zip(self.a.iter()).map(|(x, a)| x * a).sum::<i64>()
    }

    pub fn add(&self, o: &Affine) -> Affine {
        let mut a = self.a;
        for v in 0..MAX_VARS {
            a[v] += o.a[v];
        }
        Affine { c: self.c + o.c, a }
    }

    pub fn scale(&self, k: i64) -> Affine {
        let mut a = self.a;
        for x in a.iter_mut() {
            *x *= k;
        }
        Affine { c: self.c * k, a }
    }

    pub fn add_const(&self, k: i64) -> Affine {
        Affine { c: self.c + k, a: self.a }
    }

    /// Replace `s_v` by `e` (which must not involve `s_v`).
    pub fn subst(&self, v: usize, e: &Affine) -> Affine {
        let k = self.a[v];
        let mut r = *self;
        r.a[v] = 0;
        if k != 0 {
            r = r.add(&e.scale(k));
        }
        r
    }

    /// Drop variable slot `v`, shifting higher variables down.
    fn remove_slot(&self, v: usize) -> Affine {
        debug_assert_eq!(self.a[v], 0);
        let mut a = [0; MAX_VARS];
        let mut t = 0;
        for (u, &x) in self.a.iter().enumerate() {
            if u != v {
                a[t] = x;
                t += 1;
            }
        }
        Affine { c: self.c, a }
    }

    fn shift_slots(&self, by: usize) -> Result<Affine, ModeSumError> {
        let mut a = [0; MAX_VARS];
        for (u, &x) in self.a.iter().enumerate() {
            if x != 0 {
                if u + by >= MAX_VARS {
                    return Err(ModeSumError::TooManyVars(u + by + 1));
                }
                a[u + by] = x;
            }
        }
        Ok(Affine { c: self.c, a })
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (v, &x) in self.a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let name = VAR_NAMES[v];
            let term = match x {
                1 => name.to_string(),
                -1 => format!("-{name}"),
                _ => format!("{x}*{name}"),
            };
            if out.is_empty() {
                out = term;
            } else if let Some(t) = term.strip_prefix('-') {
                out = format!("{out}-{t}");
            } else {
                out = format!("{out}+{term}");
            }
        }
        if out.is_empty() {
            write!(f, "{}", self.c)
        } else if self.c > 0 {
            write!(f, "{out}+{}", self.c)
        } else if self.c < 0 {
            write!(f, "{out}{}", self.c)
        } else {
            write!(f, "{out}")
        }
    }
}

/// A generator whose mode is affine in the index variables.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pat {
    pub slot: u8,
    pub odd: bool,
    pub i: u16,
    pub j: u16,
    pub mode: Affine,
}

impl Pat {
    pub fn e(slot: u8, i: usize, j: usize, mode: Affine) -> Pat {
        Pat { slot, odd: false, i: i as u16, j: j as u16, mode }
    }

    pub fn from_gen(g: Gen) -> Pat {
        Pat { slot: g.slot, odd: g.odd, i: g.i, j: g.j, mode: Affine::constant(g.mode) }
    }

    pub fn at(&self, pt: &[i64]) -> Gen {
        Gen { mode: self.mode.eval(pt), slot: self.slot, odd: self.odd, i: self.i, j: self.j }
    }
}

impl fmt::Display for Pat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.odd {
            write!(f, "psi[{},{};m=", self.i, self.j)?;
        } else {
            write!(f, "E[r={};{},{};m=", self.slot, self.i, self.j)?;
        }
        self.mode.fmt_with(f)?;
        write!(f, "]")
    }
}

/// `coeff * sum_{vars} factors`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub ranges: SmallVec<[Range; MAX_VARS]>,
    pub factors: SmallVec<[Pat; MAX_FACTORS]>,
    pub coeff: ParamScalar,
}

impl Atom {
    pub fn new(ranges: &[Range], factors: &[Pat], coeff: ParamScalar) -> Result<Atom, ModeSumError> {
        if ranges.len() > MAX_VARS {
            return Err(ModeSumError::TooManyVars(ranges.len()));
        }
        if factors.len() > MAX_FACTORS {
            return Err(ModeSumError::TooManyFactors(factors.len()));
        }
        Ok(Atom { ranges: SmallVec::from_slice(ranges), factors: SmallVec::from_slice(factors), coeff })
    }

    pub fn nvars(&self) -> usize {
        self.ranges.len()
    }

    fn key(&self) -> (SmallVec<[Range; MAX_VARS]>, SmallVec<[Pat; MAX_FACTORS]>) {
        (self.ranges.clone(), self.factors.clone())
    }

    pub fn word_at(&self, pt: &[i64]) -> SmallVec<[Gen; MAX_FACTORS]> {
        self.factors.iter().map(|p| p.at(pt)).collect()
    }

    /// Variables that occur in no factor.
    fn idle_vars(&self) -> Vec<usize> {
        (0..self.nvars()).filter(|&v| self.factors.iter().all(|p| p.mode.a[v] == 0)).collect()
    }

    pub fn is_divergent_flagged(&self) -> bool {
        !self.idle_vars().is_empty()
    }

    /// Substitute `s_v := e` and drop the variable.
    fn subst_var(&self, v: usize, e: &Affine) -> Atom {
        let factors = self.factors.iter().map(|p| Pat { mode: p.mode.subst(v, e).remove_slot(v), ..*p }).collect();
        let mut ranges = self.ranges.clone();
        ranges.remove(v);
        Atom { ranges, factors, coeff: self.coeff.clone() }
    }

    /// Substitute `s_v := sign * s_v + shift`, keeping the variable with a new range.
    fn reparam(&self, v: usize, sign: i64, shift: i64, range: Range) -> Atom {
        let e = Affine::var(v, sign, shift);
        let factors = self
            .factors
            .iter()
            .map(|p| {
                let k = p.mode.a[v];
                let mut m = p.mode;
                m.a[v] = 0;
                Pat { mode: m.add(&e.scale(k)), ..*p }
            })
            .collect();
        let mut ranges = self.ranges.clone();
        ranges[v] = range;
        Atom { ranges, factors, coeff: self.coeff.clone() }
    }

    fn scaled(&self, k: &ParamScalar) -> Atom {
        Atom { coeff: self.coeff.mul(k), ..self.clone() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let heads: Vec<String> = self
            .ranges
            .iter()
            .enumerate()
            .map(|(v, r)| match r {
                Range::NonNeg => format!("{}>=0", VAR_NAMES[v]),
                Range::All => format!("{} in Z", VAR_NAMES[v]),
            })
            .collect();
        write!(f, "sum{{{}}} ({})", heads.join(","), self.coeff)?;
        for p in self.factors.iter() {
            write!(f, " * {p}")?;
        }
        Ok(())
    }
}

/// Finite part plus symbolic mode sums; `divergent` holds atoms with an idle index variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SumExpr {
    pub finite: AlgElement,
    pub atoms: Vec<Atom>,
    pub divergent: Vec<Atom>,
}

impl From<AlgElement> for SumExpr {
    fn from(finite: AlgElement) -> Self {
        SumExpr { finite, atoms: Vec::new(), divergent: Vec::new() }
    }
}

impl From<Atom> for SumExpr {
    fn from(a: Atom) -> Self {
        let mut e = SumExpr::zero();
        e.push_atom(a);
        e
    }
}

impl SumExpr {
    pub fn zero() -> Self {
        SumExpr::default()
    }

    pub fn scalar(c: ParamScalar) -> Self {
        AlgElement::scalar(c).into()
    }

    pub fn gen(g: Gen) -> Self {
        AlgElement::gen(g).into()
    }

    /// `sum_{s >= 0} coeff * f_1(s) ... f_m(s)` in one variable.
    pub fn sum1(range: Range, factors: &[Pat], coeff: ParamScalar) -> Self {
        Atom::new(&[range], factors, coeff).expect("within caps").into()
    }

    pub fn push_atom(&mut self, a: Atom) {
        if a.coeff.is_zero() {
            return;
        }
        if a.nvars() > 0 && a.is_divergent_flagged() {
            self.divergent.push(a);
        } else {
            self.atoms.push(a);
        }
    }

    pub fn is_syntactically_zero(&self) -> bool {
        self.finite.is_zero() && self.atoms.is_empty() && self.divergent.is_empty()
    }

    pub fn all_atoms(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter().chain(self.divergent.iter())
    }

    pub fn add_assign(&mut self, o: &SumExpr) {
        self.finite.add_assign(&o.finite);
        for a in o.all_atoms() {
            self.push_atom(a.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &SumExpr, k: &ParamScalar) {
        if k.is_zero() {
            return;
        }
        self.finite.add_scaled(&o.finite, k);
        for a in o.all_atoms() {
            self.push_atom(a.scaled(k));
        }
    }

    pub fn add(&self, o: &SumExpr) -> SumExpr {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub(&self, o: &SumExpr) -> SumExpr {
        let mut r = self.clone();
        r.add_scaled(o, &ParamScalar::int(-1));
        r
    }

    pub fn scale(&self, k: &ParamScalar) -> SumExpr {
        let mut r = SumExpr::zero();
        r.add_scaled(self, k);
        r
    }

    pub fn neg(&self) -> SumExpr {
        self.scale(&ParamScalar::int(-1))
    }

    pub fn map_coeffs<F: Fn(&ParamScalar) -> Result<ParamScalar, ScalarError>>(&self, f: F) -> Result<SumExpr, ScalarError> {
        let mut r = SumExpr::from(self.finite.try_map_coeffs(&f)?);
        for a in self.all_atoms() {
            r.push_atom(Atom { coeff: f(&a.coeff)?, ..a.clone() });
        }
        Ok(r)
    }

    pub fn substitute(&self, b: &BTreeMap<Sym, ParamScalar>) -> Result<SumExpr, ScalarError> {
        self.map_coeffs(|c| c.substitute(b))
    }

    /// Number of finite terms plus atoms.
    pub fn term_count(&self) -> usize {
        self.finite.len() + self.atoms.len() + self.divergent.len()
    }

    /// Replace every generator pattern by a linear combination of patterns with the same mode.
    ///
    /// `f(slot, i, j)` returns `(slot', i', j', coeff)` images; the map must be pattern-linear.
    pub fn map_patterns<F>(&self, amb: &Ambient, f: &F) -> Result<SumExpr, ModeSumError>
    where
        F: Fn(u8, u16, u16) -> Vec<(u8, u16, u16, ParamScalar)>,
    {
        let mut out = SumExpr::zero();
        for (m, c) in self.finite.terms() {
            let pats: Vec<Pat> = m.iter().map(|&g| Pat::from_gen(g)).collect();
            for (ps, k) in expand_patterns(&pats, f) {
                let word: Vec<Gen> = ps.iter().map(|p| p.at(&[])).collect();
                out.finite.add_scaled(&amb.normal_order(&word), &k.mul(c));
            }
        }
        for a in self.all_atoms() {
            for (ps, k) in expand_patterns(&a.factors, f) {
                out.push_atom(Atom { ranges: a.ranges.clone(), factors: ps.into_iter().collect(), coeff: a.coeff.mul(&k) });
            }
        }
        Ok(out)
    }

    /// Product; index variables of the right factor follow those of the left.
    pub fn mul(&self, amb: &Ambient, o: &SumExpr) -> Result<SumExpr, ModeSumError> {
        let mut out = SumExpr::from(amb.mul(&self.finite, &o.finite));
        for a in o.all_atoms() {
            for (m, c) in self.finite.terms() {
                out.push_atom(prepend_mono(m, c, a)?);
            }
        }
        for a in self.all_atoms() {
            for (m, c) in o.finite.terms() {
                out.push_atom(append_mono(a, m, c)?);
            }
            for b in o.all_atoms() {
                out.push_atom(concat_atoms(a, b)?);
            }
        }
        Ok(out)
    }

    /// `xy - yx` (all sums here are even).
    pub fn commutator(&self, amb: &Ambient, o: &SumExpr) -> Result<SumExpr, ModeSumError> {
        let mut r = self.mul(amb, o)?;
        r.add_scaled(&o.mul(amb, self)?, &ParamScalar::int(-1));
        Ok(r)
    }

    /// `[e, g]` by the Leibniz rule, firing Kronecker deltas on the sum variables.
    pub fn sum_commutator(&self, amb: &Ambient, g: Gen) -> Result<SumExpr, ModeSumError> {
        let gg = AlgElement::gen(g);
        let mut out = SumExpr::from(amb.commutator(&self.finite, &gg));
        for a in self.all_atoms() {
            out.add_assign(&atom_commutator(amb, a, g)?);
        }
        Ok(out)
    }

    /// `[e, x]` for a finite element `x`.
    pub fn sum_commutator_alg(&self, amb: &Ambient, x: &AlgElement) -> Result<SumExpr, ModeSumError> {
        let mut out = SumExpr::zero();
        for (m, c) in x.terms() {
            // [e, g_1 ... g_k] = sum_t g_1 .. [e, g_t] .. g_k
            for t in 0..m.len() {
                let left = SumExpr::from(AlgElement::term(SmallVec::from_slice(&m[..t]), c.clone()));
                let right = SumExpr::from(AlgElement::term(SmallVec::from_slice(&m[t + 1..]), ParamScalar::one()));
                let mid = self.sum_commutator(amb, m[t])?;
                out.add_assign(&left.mul(amb, &mid)?.mul(amb, &right)?);
            }
        }
        Ok(out)
    }

    /// Relabel slots.
    pub fn relabel<F: Fn(u8) -> u8>(&self, amb: &Ambient, f: F) -> SumExpr {
        let mut out = SumExpr::zero();
        for (m, c) in self.finite.terms() {
            let word: Vec<Gen> = m.iter().map(|g| g.with_slot(f(g.slot))).collect();
            out.finite.add_scaled(&amb.normal_order(&word), c);
        }
        for a in self.all_atoms() {
            let factors = a.factors.iter().map(|p| Pat { slot: f(p.slot), ..*p }).collect();
            out.push_atom(Atom { factors, ..a.clone() });
        }
        out
    }

    /// Slots touched by any generator.
    pub fn slots(&self) -> Vec<u8> {
        let mut s: Vec<u8> = self.finite.terms().flat_map(|(m, _)| m.iter().map(|g| g.slot).collect::<Vec<_>>()).collect();
        for a in self.all_atoms() {
            s.extend(a.factors.iter().map(|p| p.slot));
        }
        s.sort();
        s.dedup();
        s
    }

    /// Canonical form: factors grouped by slot, single-variable sums re-based so that the first
    /// variable factor carries no offset (boundary terms moved to the finite part), like atoms combined.
    pub fn canonicalize(&self, amb: &Ambient) -> Result<SumExpr, ModeSumError> {
        let mut out = SumExpr::from(self.finite.clone());
        let mut table: BTreeMap<_, ParamScalar> = BTreeMap::new();
        let mut div_table: BTreeMap<_, ParamScalar> = BTreeMap::new();
        let mut pending: Vec<Atom> = self.all_atoms().cloned().collect();
        while let Some(a) = pending.pop() {
            if a.coeff.is_zero() {
                continue;
            }
            if a.nvars() == 0 {
                let word: Vec<Gen> = a.word_at(&[]).to_vec();
                out.finite.add_scaled(&amb.normal_order(&word), &a.coeff);
                continue;
            }
            let mut a = a;
            // slots commute, so a stable sort by slot is exact for even factors
            if a.factors.iter().all(|p| !p.odd) {
                a.factors.sort_by_key(|p| p.slot);
            }
            let idle = a.idle_vars();
            if !idle.is_empty() {
                // constant modes in the idle variable: normal order the product once
                if a.factors.iter().all(|p| p.mode.is_const()) {
                    let word: Vec<Gen> = a.word_at(&vec![0; a.nvars()]).to_vec();
                    for (m, c) in amb.normal_order(&word).terms() {
                        let factors: SmallVec<[Pat; MAX_FACTORS]> = m.iter().map(|&g| Pat::from_gen(g)).collect();
                        if factors.len() > MAX_FACTORS {
                            return Err(ModeSumError::TooManyFactors(factors.len()));
                        }
                        let key = (a.ranges.clone(), factors);
                        let e = div_table.entry(key).or_insert_with(ParamScalar::zero);
                        *e = e.add(&c.mul(&a.coeff));
                    }
                } else {
                    let e = div_table.entry(a.key()).or_insert_with(ParamScalar::zero);
                    *e = e.add(&a.coeff);
                }
                continue;
            }
            if a.nvars() == 1 {
                let (base, boundary) = rebase_line(&a);
                for (pt, sign) in boundary {
                    let word: Vec<Gen> = base.word_at(&[pt]).to_vec();
                    out.finite.add_scaled(&amb.normal_order(&word), &base.coeff.mul_int(sign));
                }
                a = base;
            }
            let e = table.entry(a.key()).or_insert_with(ParamScalar::zero);
            *e = e.add(&a.coeff);
        }
        for ((ranges, factors), coeff) in table {
            if !coeff.is_zero() {
                out.atoms.push(Atom { ranges, factors, coeff });
            }
        }
        for ((ranges, factors), coeff) in div_table {
            if !coeff.is_zero() {
                out.divergent.push(Atom { ranges, factors, coeff });
            }
        }
        Ok(out)
    }

    /// Image in `U / I_N` as a finite element.
    ///
    /// With `cutoff = None` every atom must have finitely many surviving summands. With
    /// `Some(L)` atoms whose survivors are unbounded are regularized by keeping only
    /// summands whose factor modes lie in `[-L, L]`.
    pub fn truncate(&self, amb: &Ambient, n_cut: i64, cutoff: Option<i64>) -> Result<AlgElement, ModeSumError> {
        let mut out = drop_ideal(&self.finite, n_cut);
        if let Some(a) = self.divergent.first() {
            return Err(ModeSumError::Divergence(a.to_string()));
        }
        let parts: Result<Vec<AlgElement>, ModeSumError> =
            self.atoms.par_iter().map(|a| truncate_atom(amb, a, n_cut, cutoff)).collect();
        for p in parts? {
            out.add_assign(&p);
        }
        Ok(out)
    }

    /// Largest absolute constant offset among factor modes and finite generators.
    pub fn offset_bound(&self) -> i64 {
        let mut b = 0;
        for (m, _) in self.finite.terms() {
            for g in m.iter() {
                b = b.max(g.mode.abs());
            }
        }
        for a in self.all_atoms() {
            for p in a.factors.iter() {
                b = b.max(p.mode.c.abs());
            }
        }
        b
    }
}

impl fmt::Display for SumExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.finite.is_zero() {
            parts.push(self.finite.to_string());
        }
        for a in self.atoms.iter() {
            parts.push(a.to_string());
        }
        for a in self.divergent.iter() {
            parts.push(format!("divergent {a}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("\n  + "))
        }
    }
}

fn expand_patterns<F>(pats: &[Pat], f: &F) -> Vec<(Vec<Pat>, ParamScalar)>
where
    F: Fn(u8, u16, u16) -> Vec<(u8, u16, u16, ParamScalar)>,
{
    let choices: Vec<Vec<(Pat, ParamScalar)>> = pats
        .iter()
        .map(|p| f(p.slot, p.i, p.j).into_iter().map(|(s, i, j, c)| (Pat { slot: s, i, j, ..*p }, c)).collect())
        .collect();
    if pats.is_empty() {
        return vec![(Vec::new(), ParamScalar::one())];
    }
    choices
        .into_iter()
        .multi_cartesian_product()
        .map(|combo| {
            let mut k = ParamScalar::one();
            let ps = combo
                .into_iter()
                .map(|(p, c)| {
                    k = k.mul(&c);
                    p
                })
                .collect();
            (ps, k)
        })
        .filter(|(_, k)| !k.is_zero())
        .collect()
}

fn prepend_mono(m: &Mono, c: &ParamScalar, a: &Atom) -> Result<Atom, ModeSumError> {
    let mut factors: Vec<Pat> = m.iter().map(|&g| Pat::from_gen(g)).collect();
    factors.extend(a.factors.iter().cloned());
    Atom::new(&a.ranges, &factors, a.coeff.mul(c))
}

fn append_mono(a: &Atom, m: &Mono, c: &ParamScalar) -> Result<Atom, ModeSumError> {
    let mut factors: Vec<Pat> = a.factors.to_vec();
    factors.extend(m.iter().map(|&g| Pat::from_gen(g)));
    Atom::new(&a.ranges, &factors, a.coeff.mul(c))
}

fn concat_atoms(a: &Atom, b: &Atom) -> Result<Atom, ModeSumError> {
    let shift = a.nvars();
    if shift + b.nvars() > MAX_VARS {
        return Err(ModeSumError::TooManyVars(shift + b.nvars()));
    }
    let mut factors: Vec<Pat> = a.factors.to_vec();
    for p in b.factors.iter() {
        factors.push(Pat { mode: p.mode.shift_slots(shift)?, ..*p });
    }
    let mut ranges: Vec<Range> = a.ranges.to_vec();
    ranges.extend(b.ranges.iter().cloned());
    Atom::new(&ranges, &factors, a.coeff.mul(&b.coeff))
}

/// Impose `eq(s) = 0` on the atom's variables.
fn impose_zero(a: &Atom, eq: &Affine) -> Result<Vec<Atom>, ModeSumError> {
    if eq.is_const() {
        return Ok(if eq.c == 0 { vec![a.clone()] } else { vec![] });
    }
    let v = (0..a.nvars())
        .find(|&v| eq.a[v].abs() == 1)
        .ok_or_else(|| ModeSumError::Unsupported(format!("cannot solve delta in {a}")))?;
    // s_v = -(eq - a_v s_v) / a_v
    let mut rest = *eq;
    rest.a[v] = 0;
    let sol = rest.scale(-eq.a[v]);
    let range = a.ranges[v];
    let b = a.subst_var(v, &sol);
    match range {
        Range::All => Ok(vec![b]),
        Range::NonNeg => impose_nonneg(&b, &sol.remove_slot(v)),
    }
}

/// Impose `expr(s) >= 0`.
fn impose_nonneg(a: &Atom, expr: &Affine) -> Result<Vec<Atom>, ModeSumError> {
    if expr.is_const() {
        return Ok(if expr.c >= 0 { vec![a.clone()] } else { vec![] });
    }
    let vars: Vec<usize> = (0..a.nvars()).filter(|&v| expr.a[v] != 0).collect();
    if vars.len() != 1 || expr.a[vars[0]].abs() != 1 {
        return Err(ModeSumError::Unsupported(format!("range constraint {expr:?} on {a}")));
    }
    let w = vars[0];
    let (mut lo, mut hi) = match a.ranges[w] {
        Range::NonNeg => (Some(0i64), None::<i64>),
        Range::All => (None, None),
    };
    if expr.a[w] == 1 {
        let b = -expr.c;
        lo = Some(lo.map_or(b, |x| x.max(b)));
    } else {
        let b = expr.c;
        hi = Some(hi.map_or(b, |x| x.min(b)));
    }
    Ok(match (lo, hi) {
        (Some(l), Some(h)) => (l..=h).map(|x| a.subst_var(w, &Affine::constant(x))).collect(),
        (Some(l), None) => vec![a.reparam(w, 1, l, Range::NonNeg)],
        (None, Some(h)) => vec![a.reparam(w, -1, h, Range::NonNeg)],
        (None, None) => vec![a.clone()],
    })
}

fn atom_commutator(amb: &Ambient, a: &Atom, g: Gen) -> Result<SumExpr, ModeSumError> {
    let mut out = SumExpr::zero();
    for (k, f) in a.factors.iter().enumerate() {
        if f.slot != g.slot {
            continue;
        }
        if f.odd || g.odd {
            return Err(ModeSumError::Unsupported("odd factor in a mode sum".into()));
        }
        let mode = f.mode.add_const(g.mode);
        let replace = |np: Option<Pat>, coeff: ParamScalar, out: &mut SumExpr| {
            let mut factors: Vec<Pat> = a.factors[..k].to_vec();
            if let Some(p) = np {
                factors.push(p);
            }
            factors.extend(a.factors[k + 1..].iter().cloned());
            let atom = Atom { ranges: a.ranges.clone(), factors: factors.into_iter().collect(), coeff: a.coeff.mul(&coeff) };
            out.push_atom(atom);
        };
        if f.j == g.i {
            replace(Some(Pat { i: f.i, j: g.j, mode, ..*f }), ParamScalar::one(), &mut out);
        }
        if f.i == g.j {
            replace(Some(Pat { i: g.i, j: f.j, mode, ..*f }), ParamScalar::int(-1), &mut out);
        }
        let kappa = amb.pairing(f.slot, f.i, f.j, g.i, g.j);
        if !kappa.is_zero() {
            // fires where f.mode = -g.mode, with factor f.mode = -g.mode
            let mut factors: Vec<Pat> = a.factors[..k].to_vec();
            factors.extend(a.factors[k + 1..].iter().cloned());
            let base = Atom {
                ranges: a.ranges.clone(),
                factors: factors.into_iter().collect(),
                coeff: a.coeff.mul(&kappa).mul_int(-g.mode),
            };
            for b in impose_zero(&base, &mode)? {
                out.push_atom(b);
            }
        }
    }
    finalize_zero_var(amb, out)
}

/// Move zero-variable atoms into the finite part.
fn finalize_zero_var(amb: &Ambient, e: SumExpr) -> Result<SumExpr, ModeSumError> {
    let mut out = SumExpr::from(e.finite);
    for a in e.atoms.into_iter().chain(e.divergent) {
        if a.nvars() == 0 {
            let word: Vec<Gen> = a.word_at(&[]).to_vec();
            out.finite.add_scaled(&amb.normal_order(&word), &a.coeff);
        } else {
            out.push_atom(a);
        }
    }
    Ok(out)
}

/// Re-base a one-variable atom so the first variable factor has zero offset and,
/// for bi-infinite sums, positive orientation. Returns boundary points with signs
/// (in the new parametrization) that must be added to the finite part.
fn rebase_line(a: &Atom) -> (Atom, Vec<(i64, i64)>) {
    let Some(first) = a.factors.iter().find(|p| p.mode.a[0] != 0) else {
        return (a.clone(), vec![]);
    };
    let eps = first.mode.a[0];
    if eps.abs() != 1 {
        return (a.clone(), vec![]);
    }
    let delta = first.mode.c;
    match a.ranges[0] {
        Range::All => {
            // s = eps * s' - eps * delta  makes the first factor's mode s'
            (a.reparam(0, eps, -eps * delta, Range::All), vec![])
        }
        Range::NonNeg => {
            // s = s' - eps*delta, s >= 0  <=>  s' >= start
            let start = eps * delta;
            let b = a.reparam(0, 1, -start, Range::NonNeg);
            let boundary = if start > 0 {
                (0..start).map(|x| (x, -1)).collect()
            } else {
                (start..0).map(|x| (x, 1)).collect()
            };
            (b, boundary)
        }
    }
}

/// Drop PBW monomials whose positive-mode part has degree at least `n_cut`.
pub fn drop_ideal(x: &AlgElement, n_cut: i64) -> AlgElement {
    let mut out = AlgElement::zero();
    for (m, c) in x.terms() {
        if positive_degree(m) < n_cut {
            out.add_term(m.clone(), c.clone());
        }
    }
    out
}

pub fn positive_degree(m: &[Gen]) -> i64 {
    m.iter().map(|g| g.mode.max(0)).sum()
}

/// Sum over slots of the largest suffix degree within that slot.
fn tail_weight(word: &[Gen]) -> i64 {
    let mut best: BTreeMap<u8, (i64, i64)> = BTreeMap::new();
    for g in word.iter().rev() {
        let e = best.entry(g.slot).or_insert((0, 0));
        e.0 += g.mode;
        e.1 = e.1.max(e.0);
    }
    best.values().map(|v| v.1).sum()
}

fn for_each_point<F: FnMut(&[i64])>(bounds: &[(i64, i64)], f: &mut F) {
    let k = bounds.len();
    if k == 0 {
        f(&[]);
        return;
    }
    let mut pt: Vec<i64> = bounds.iter().map(|b| b.0).collect();
    if bounds.iter().any(|b| b.0 > b.1) {
        return;
    }
    loop {
        f(&pt);
        let mut v = 0;
        loop {
            if v == k {
                return;
            }
            if pt[v] < bounds[v].1 {
                pt[v] += 1;
                break;
            }
            pt[v] = bounds[v].0;
            v += 1;
        }
    }
}

/// Survivor points of an atom modulo `I_N`, or a divergence report.
pub fn survivor_points(a: &Atom, n_cut: i64, cutoff: Option<i64>) -> Result<Vec<Vec<i64>>, ModeSumError> {
    let k = a.nvars();
    let offset = a.factors.iter().map(|p| p.mode.c.abs()).max().unwrap_or(0);
    let in_box = |pt: &[i64], l: i64| a.factors.iter().all(|p| p.mode.eval(pt).abs() <= l);
    let survives = |pt: &[i64]| tail_weight(&a.word_at(pt)) < n_cut;
    let bounds_for = |r: i64| -> Vec<(i64, i64)> {
        a.ranges
            .iter()
            .map(|rg| match rg {
                Range::NonNeg => (0, r),
                Range::All => (-r, r),
            })
            .collect()
    };
    let on_shell = |pt: &[i64], r: i64| {
        pt.iter().zip(a.ranges.iter()).any(|(&x, rg)| x == r || (*rg == Range::All && x == -r))
    };
    let mut r = n_cut + offset + 2;
    for _attempt in 0..3 {
        let mut pts = Vec::new();
        let mut shell_hit = false;
        for_each_point(&bounds_for(r), &mut |pt: &[i64]| {
            if survives(pt) {
                if on_shell(pt, r) {
                    shell_hit = true;
                }
                pts.push(pt.to_vec());
            }
        });
        if !shell_hit {
            return Ok(pts);
        }
        r *= 2;
    }
    let Some(l) = cutoff else {
        return Err(ModeSumError::Divergence(a.to_string()));
    };
    if a.is_divergent_flagged() {
        return Err(ModeSumError::Divergence(a.to_string()));
    }
    let r = (k as i64) * (l + offset) + 1;
    let mut pts = Vec::new();
    for_each_point(&bounds_for(r), &mut |pt: &[i64]| {
        if in_box(pt, l) && survives(pt) {
            pts.push(pt.to_vec());
        }
    });
    Ok(pts)
}

fn truncate_atom(amb: &Ambient, a: &Atom, n_cut: i64, cutoff: Option<i64>) -> Result<AlgElement, ModeSumError> {
    let pts = survivor_points(a, n_cut, cutoff)?;
    let mut out = AlgElement::zero();
    for pt in pts {
        let word = a.word_at(&pt);
        let prod = amb.normal_order(&word);
        for (m, c) in prod.terms() {
            if positive_degree(m) < n_cut {
                out.add_term(m.clone(), c.mul(&a.coeff));
            }
        }
    }
    Ok(out)
}

/// Outcome of an equality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub equal: bool,
    /// True when regularized evaluation of pointwise cancelling divergent atoms was needed.
    pub regularized: bool,
    pub residual_terms: usize,
    pub first_mismatch: Option<String>,
}

/// Cut parameter used for an expression: twice its offset bound plus a margin.
pub fn default_cut(e: &SumExpr) -> i64 {
    2 * e.offset_bound() + 8
}

/// Decide `e == 0` in the completion, modulo `I_N` for the default `N`.
pub fn is_zero(amb: &Ambient, e: &SumExpr) -> Result<Verdict, ModeSumError> {
    let n_cut = default_cut(e);
    match e.truncate(amb, n_cut, None) {
        Ok(r) => Ok(verdict_from(&r, false)),
        Err(ModeSumError::Divergence(_)) => {
            let l1 = n_cut + e.offset_bound() + 3;
            let r1 = e.truncate(amb, n_cut, Some(l1))?;
            if !r1.is_zero() {
                return Ok(verdict_from(&r1, true));
            }
            let r2 = e.truncate(amb, n_cut, Some(l1 + 5))?;
            Ok(verdict_from(&r2, true))
        }
        Err(err) => Err(err),
    }
}

/// Decide `e == 0` without regularization; unbounded survivors raise a divergence error.
pub fn is_zero_strict(amb: &Ambient, e: &SumExpr) -> Result<Verdict, ModeSumError> {
    let r = e.truncate(amb, default_cut(e), None)?;
    Ok(verdict_from(&r, false))
}

fn verdict_from(r: &AlgElement, regularized: bool) -> Verdict {
    let first = r.terms().next().map(|(m, c)| {
        let gens: Vec<String> = m.iter().map(|g| g.to_string()).collect();
        format!("({c}) {}", if gens.is_empty() { "1".to_string() } else { gens.join("*") })
    });
    Verdict { equal: r.is_zero(), regularized, residual_terms: r.len(), first_mismatch: first }
}

pub fn equals(amb: &Ambient, a: &SumExpr, b: &SumExpr) -> Result<Verdict, ModeSumError> {
    is_zero(amb, &a.sub(b))
}

/// Term-for-term agreement of canonical forms.
pub fn canonical_eq(amb: &Ambient, a: &SumExpr, b: &SumExpr) -> Result<bool, ModeSumError> {
    let d = a.sub(b).canonicalize(amb)?;
    Ok(d.is_syntactically_zero())
}

/// `y (x) 1 + 1 (x) y` for `y` living in slot 1 of a one-slot ambient.
pub fn sq(amb2: &Ambient, y: &SumExpr) -> Result<SumExpr, ModeSumError> {
    if y.slots().iter().any(|&s| s != 1) {
        return Err(ModeSumError::Unsupported("sq expects a single-leg element".into()));
    }
    let mut out = y.clone();
    out.add_assign(&y.relabel(amb2, |_| 2));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::current::SlotKind;

    fn amb(n: usize) -> Ambient {
        Ambient::new(vec![SlotKind::plain_with(n, ParamScalar::sym(Sym::c(0)))])
    }

    fn s(c: i64) -> Affine {
        Affine::var(0, 1, c)
    }

    fn ms(c: i64) -> Affine {
        Affine::var(0, -1, c)
    }

    #[test]
    fn shift_is_absorbed() {
        let a = amb(3);
        // sum_{s>=0} X t^{-s-1} Y t^{s+1} = sum_{s>=0} X t^{-s} Y t^{s} - X Y
        let x = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, 1, 2, ms(-1)), Pat::e(1, 2, 1, s(1))], ParamScalar::one());
        let y = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, 1, 2, ms(0)), Pat::e(1, 2, 1, s(0))], ParamScalar::one())
            .sub(&SumExpr::from(a.normal_order(&[Gen::e(1, 1, 2, 0), Gen::e(1, 2, 1, 0)])));
        assert!(canonical_eq(&a, &x, &y).unwrap());
        assert!(equals(&a, &x, &y).unwrap().equal);
    }

    #[test]
    fn self_difference_vanishes() {
        let a = amb(3);
        let x = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, 3, 1, ms(0)), Pat::e(1, 1, 3, s(0))], ParamScalar::hbar());
        assert!(x.sub(&x).canonicalize(&a).unwrap().is_syntactically_zero());
    }

    #[test]
    fn commutator_with_disjoint_generator() {
        let a = amb(4);
        let x = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, 1, 2, ms(0)), Pat::e(1, 2, 1, s(0))], ParamScalar::one());
        let r = x.sum_commutator(&a, Gen::e(1, 3, 4, 0)).unwrap();
        assert!(r.canonicalize(&a).unwrap().is_syntactically_zero());
    }

    #[test]
    fn leibniz_matches_concatenation() {
        let a = amb(3);
        let x = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, 1, 2, ms(-1)), Pat::e(1, 2, 1, s(1))], ParamScalar::one());
        for g in [Gen::e(1, 2, 1, 1), Gen::e(1, 1, 2, -2), Gen::e(1, 1, 1, 0), Gen::e(1, 2, 2, 3)] {
            let lhs = x.sum_commutator(&a, g).unwrap();
            let rhs = x.commutator(&a, &SumExpr::gen(g)).unwrap();
            assert!(equals(&a, &lhs, &rhs).unwrap().equal, "{g}");
        }
    }

    #[test]
    fn perturbation_is_detected() {
        let a = amb(3);
        let x = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, 1, 2, ms(0)), Pat::e(1, 2, 1, s(0))], ParamScalar::one());
        let y = x.scale(&ParamScalar::int(2));
        let v = equals(&a, &x, &y).unwrap();
        assert!(!v.equal);
        assert!(v.first_mismatch.is_some());
    }

    #[test]
    fn wrong_order_sum_is_divergent() {
        let a = amb(3);
        let x = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, 1, 2, s(0)), Pat::e(1, 2, 1, ms(0))], ParamScalar::one());
        assert!(matches!(is_zero_strict(&a, &x), Err(ModeSumError::Divergence(_))));
        // its regularized value grows with the cutoff, so it is not zero
        assert!(!is_zero(&a, &x).unwrap().equal);
        // but it cancels against itself
        assert!(is_zero(&a, &x.sub(&x)).unwrap().equal);
    }

    #[test]
    fn square_doubles_scalars() {
        let a2 = Ambient::plain(&[3, 3]);
        let y = SumExpr::scalar(ParamScalar::sym(Sym::c(1)));
        let r = sq(&a2, &y).unwrap();
        assert_eq!(r.finite.constant_term(), ParamScalar::parse("2*c1").unwrap());
        assert!(sq(&a2, &SumExpr::zero()).unwrap().is_syntactically_zero());
    }

    #[test]
    fn print_grammar() {
        let x = Atom::new(&[Range::NonNeg], &[Pat::e(1, 3, 2, ms(0)), Pat::e(1, 2, 3, s(0))], ParamScalar::one()).unwrap();
        assert_eq!(x.to_string(), "sum{s>=0} (1) * E[r=1;3,2;m=-s] * E[r=1;2,3;m=s]");
    }

    #[test]
    fn factor_cap_enforced() {
        let p = Pat::e(1, 1, 1, Affine::constant(0));
        assert!(matches!(Atom::new(&[Range::NonNeg], &[p; 5], ParamScalar::one()), Err(ModeSumError::TooManyFactors(5))));
    }
}
