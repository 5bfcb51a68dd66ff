//! Truncated vacuum modules for tensor products of affine gl currents.
//!
//! The module is induced from the trivial representation of the non-negative modes, so a
//! basis is given by monomials in negative-mode generators. Straightening here is written
//! independently of [`crate::current`]; only slot declarations are shared.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::current::{Ambient, AlgElement, Gen, SlotKind};
use crate::modesum::{Atom, Range, SumExpr};
use crate::scalar::ParamScalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("the vacuum module only supports plain affine slots")]
    UnsupportedSlot,
    #[error("odd generator {0} cannot act on a plain vacuum module")]
    OddGenerator(String),
    #[error("sum has no annihilating tail on this module: {0}")]
    NoAnnihilatingTail(String),
    #[error("degree {0} is outside 0..={1}")]
    DegreeOutOfRange(i64, i64),
}

/// Basis key: generators sorted by (slot, i, j, energy).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Key {
    slot: u8,
    i: u16,
    j: u16,
    energy: i64,
}

impl Key {
    fn gen(&self) -> Gen {
        Gen::e(self.slot, self.i as usize, self.j as usize, -self.energy)
    }
}

type Basis = Vec<Key>;

/// A vector: finite combination of basis monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Vector {
    terms: BTreeMap<Basis, ParamScalar>,
}

impl Vector {
    pub fn zero() -> Self {
        Vector::default()
    }

    pub fn vacuum() -> Self {
        let mut v = Vector::zero();
        v.terms.insert(Vec::new(), ParamScalar::one());
        v
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, b: Basis, c: ParamScalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&b) {
            Some(x) => {
                *x = x.add(&c);
                if x.is_zero() {
                    self.terms.remove(&b);
                }
            }
            None => {
                self.terms.insert(b, c);
            }
        }
    }

    fn add_scaled(&mut self, o: &Vector, k: &ParamScalar) {
        for (b, c) in o.terms.iter() {
            self.add_term(b.clone(), c.mul(k));
        }
    }

    /// Coefficient of the basis vector with index `idx` in `module`'s degree-`d` piece.
    pub fn coeff_at(&self, module: &VacuumModule, d: usize, idx: usize) -> ParamScalar {
        self.terms.get(&module.basis[d][idx]).cloned().unwrap_or_else(ParamScalar::zero)
    }

    fn first_term(&self) -> Option<String> {
        self.terms.iter().next().map(|(b, c)| {
            let gens: Vec<String> = b.iter().map(|k| k.gen().to_string()).collect();
            format!("({c}) {}|0>", gens.join("*"))
        })
    }
}

/// Dense matrix with exact entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<ParamScalar>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![ParamScalar::zero(); rows * cols] }
    }

    pub fn get(&self, r: usize, c: usize) -> &ParamScalar {
        &self.data[r * self.cols + c]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|r| (0..self.cols).all(|c| if r == c { self.get(r, c).is_one() } else { self.get(r, c).is_zero() }))
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().zip(o.data.iter()).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows);
        let mut m = Matrix::zero(self.rows, o.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..o.cols {
                    let idx = r * o.cols + c;
                    m.data[idx] = m.data[idx].add(&a.mul(o.get(k, c)));
                }
            }
        }
        m
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<String> = self.data.iter().map(|x| x.to_string()).collect();
        let w = cells.iter().map(|s| s.len()).max().unwrap_or(1);
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format!("{:>w$}", cells[r * self.cols + c])).collect();
            writeln!(f, "[{}]", row.join(" "))?;
        }
        Ok(())
    }
}

/// Per-slot central data.
#[derive(Clone, Debug)]
struct SlotData {
    size: usize,
    c: ParamScalar,
    z: ParamScalar,
}

#[derive(Clone, Debug)]
pub struct VacuumModule {
    slots: Vec<SlotData>,
    cutoff: usize,
    basis: Vec<Vec<Basis>>,
}

/// Bracket result: optional generator (as slot, i, j, mode) with coefficient, plus a scalar.
struct Br {
    gens: Vec<(Gen, i64)>,
    scalar: ParamScalar,
}

impl VacuumModule {
    pub fn new(amb: &Ambient, cutoff: usize) -> Result<Self, OracleError> {
        let mut slots = Vec::new();
        for s in amb.slots() {
            match s {
                SlotKind::Plain { size, c, z } => slots.push(SlotData { size: *size, c: c.clone(), z: z.clone() }),
                SlotKind::W { .. } => return Err(OracleError::UnsupportedSlot),
            }
        }
        let mut m = VacuumModule { slots, cutoff, basis: Vec::new() };
        m.basis = m.enumerate_basis();
        Ok(m)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn graded_dims(&self) -> Vec<usize> {
        self.basis.iter().map(|b| b.len()).collect()
    }

    pub fn basis_vector(&self, d: usize, idx: usize) -> Vector {
        let mut v = Vector::zero();
        v.add_term(self.basis[d][idx].clone(), ParamScalar::one());
        v
    }

    fn enumerate_basis(&self) -> Vec<Vec<Basis>> {
        let mut keys = Vec::new();
        for (r, s) in self.slots.iter().enumerate() {
            for i in 1..=s.size {
                for j in 1..=s.size {
                    for e in 1..=self.cutoff as i64 {
                        keys.push(Key { slot: r as u8 + 1, i: i as u16, j: j as u16, energy: e });
                    }
                }
            }
        }
        keys.sort();
        let mut out = vec![Vec::new(); self.cutoff + 1];
        fn rec(keys: &[Key], start: usize, left: i64, cur: &mut Vec<Key>, total: i64, out: &mut Vec<Vec<Basis>>) {
            out[total as usize].push(cur.clone());
            for t in start..keys.len() {
                if keys[t].energy <= left {
                    cur.push(keys[t]);
                    rec(keys, t, left - keys[t].energy, cur, total + keys[t].energy, out);
                    cur.pop();
                }
            }
        }
        rec(&keys, 0, self.cutoff as i64, &mut Vec::new(), 0, &mut out);
        out
    }

    fn bracket(&self, x: Gen, y: Gen) -> Br {
        let mut gens = Vec::new();
        let mut scalar = ParamScalar::zero();
        if x.slot == y.slot {
            let m = x.mode + y.mode;
            if x.j == y.i {
                gens.push((Gen { mode: m, ..x }.with_ij(x.i, y.j), 1));
            }
            if x.i == y.j {
                gens.push((Gen { mode: m, ..x }.with_ij(y.i, x.j), -1));
            }
            if m == 0 && x.mode != 0 {
                let sd = &self.slots[x.slot as usize - 1];
                let mut k = ParamScalar::zero();
                if x.j == y.i && x.i == y.j {
                    k = k.add(&sd.c);
                }
                if x.i == x.j && y.i == y.j {
                    k = k.add(&sd.z);
                }
                scalar = k.mul_int(x.mode);
            }
        }
        Br { gens, scalar }
    }

    /// `g` applied to a basis monomial.
    fn act_gen_basis(&self, g: Gen, b: &[Key], k: &ParamScalar, out: &mut Vector) {
        if k.is_zero() {
            return;
        }
        let Some((&x1, rest)) = b.split_first() else {
            if g.mode < 0 {
                out.add_term(vec![key_of(g)], k.clone());
            }
            return;
        };
        if g.mode < 0 && key_of(g) <= x1 {
            let mut nb = Vec::with_capacity(b.len() + 1);
            nb.push(key_of(g));
            nb.extend_from_slice(b);
            out.add_term(nb, k.clone());
            return;
        }
        // g x1 rest = x1 (g rest) + [g, x1] rest
        let mut inner = Vector::zero();
        self.act_gen_basis(g, rest, k, &mut inner);
        for (ib, ic) in inner.terms.iter() {
            self.act_gen_basis(x1.gen(), ib, ic, out);
        }
        let br = self.bracket(g, x1.gen());
        for (h, sgn) in br.gens {
            self.act_gen_basis(h, rest, &k.mul_int(sgn), out);
        }
        if !br.scalar.is_zero() {
            out.add_term(rest.to_vec(), br.scalar.mul(k));
        }
    }

    pub fn act_gen(&self, g: Gen, v: &Vector) -> Result<Vector, OracleError> {
        if g.odd {
            return Err(OracleError::OddGenerator(g.to_string()));
        }
        let mut out = Vector::zero();
        for (b, c) in v.terms.iter() {
            self.act_gen_basis(g, b, c, &mut out);
        }
        Ok(out)
    }

    /// A word acts right to left.
    pub fn act_word(&self, word: &[Gen], v: &Vector) -> Result<Vector, OracleError> {
        let mut cur = v.clone();
        for &g in word.iter().rev() {
            if cur.is_zero() {
                break;
            }
            cur = self.act_gen(g, &cur)?;
        }
        Ok(cur)
    }

    pub fn act_alg(&self, e: &AlgElement, v: &Vector) -> Result<Vector, OracleError> {
        let mut out = Vector::zero();
        for (m, c) in e.terms() {
            out.add_scaled(&self.act_word(m, v)?, c);
        }
        Ok(out)
    }

    /// Index points of `a` that can act nontrivially on vectors of energy at most `energy`.
    fn atom_points(&self, a: &Atom, energy: i64) -> Result<Vec<Vec<i64>>, OracleError> {
        let offset = a.factors.iter().map(|p| p.mode.c.abs()).max().unwrap_or(0);
        let acts = |pt: &[i64]| {
            let mut per_slot: BTreeMap<u8, (i64, i64)> = BTreeMap::new();
            for p in a.factors.iter().rev() {
                let e = per_slot.entry(p.slot).or_insert((0, 0));
                e.0 += p.mode.eval(pt);
                e.1 = e.1.max(e.0);
            }
            per_slot.values().map(|x| x.1).sum::<i64>() <= energy
        };
        let mut r = energy + offset + 2;
        for _ in 0..3 {
            let bounds: Vec<(i64, i64)> = a
                .ranges
                .iter()
                .map(|rg| match rg {
                    Range::NonNeg => (0, r),
                    Range::All => (-r, r),
                })
                .collect();
            let mut pts = Vec::new();
            let mut edge = false;
            let mut pt: Vec<i64> = bounds.iter().map(|b| b.0).collect();
            'outer: loop {
                if acts(&pt) {
                    if pt.iter().zip(bounds.iter()).any(|(&x, b)| x == b.1 || (b.0 < 0 && x == b.0)) {
                        edge = true;
                    }
                    pts.push(pt.clone());
                }
                let mut v = 0;
                loop {
                    if v == pt.len() {
                        break 'outer;
                    }
                    if pt[v] < bounds[v].1 {
                        pt[v] += 1;
                        break;
                    }
                    pt[v] = bounds[v].0;
                    v += 1;
                }
            }
            if !edge {
                return Ok(pts);
            }
            r *= 2;
        }
        Err(OracleError::NoAnnihilatingTail(a.to_string()))
    }

    fn vector_energy(v: &Vector) -> i64 {
        v.terms.keys().map(|b| b.iter().map(|k| k.energy).sum::<i64>()).max().unwrap_or(0)
    }

    pub fn act(&self, e: &SumExpr, v: &Vector) -> Result<Vector, OracleError> {
        let mut out = self.act_alg(&e.finite, v)?;
        let energy = Self::vector_energy(v);
        for a in e.all_atoms() {
            for pt in self.atom_points(a, energy)? {
                let word = a.word_at(&pt);
                out.add_scaled(&self.act_word(&word, v)?, &a.coeff);
            }
        }
        Ok(out)
    }

    /// Matrix of `e` from the degree-`d` piece to the degree-`d - deg` piece.
    pub fn operator_matrix(&self, e: &SumExpr, d: usize, deg: i64) -> Result<Matrix, OracleError> {
        let target = d as i64 - deg;
        if d > self.cutoff {
            return Err(OracleError::DegreeOutOfRange(d as i64, self.cutoff as i64));
        }
        if target < 0 || target > self.cutoff as i64 {
            return Err(OracleError::DegreeOutOfRange(target, self.cutoff as i64));
        }
        let t = target as usize;
        let rows = self.basis[t].len();
        let cols = self.basis[d].len();
        let columns: Result<Vec<Vector>, OracleError> =
            (0..cols).into_par_iter().map(|c| self.act(e, &self.basis_vector(d, c))).collect();
        let mut m = Matrix::zero(rows, cols);
        for (c, v) in columns?.into_iter().enumerate() {
            for r in 0..rows {
                m.data[r * cols + c] = v.coeff_at(self, t, r);
            }
        }
        Ok(m)
    }

    /// Check that `e` annihilates every basis vector of degree at most the cutoff.
    /// Returns the first nonzero image found.
    pub fn check_zero(&self, e: &SumExpr) -> Result<Option<String>, OracleError> {
        let jobs: Vec<(usize, usize)> = (0..=self.cutoff).flat_map(|d| (0..self.basis[d].len()).map(move |i| (d, i))).collect();
        let results: Result<Vec<Option<String>>, OracleError> = jobs
            .par_iter()
            .map(|&(d, i)| {
                let v = self.act(e, &self.basis_vector(d, i))?;
                Ok(v.first_term().map(|t| format!("on basis vector {i} of degree {d}: {t}")))
            })
            .collect();
        Ok(results?.into_iter().flatten().next())
    }
}

fn key_of(g: Gen) -> Key {
    Key { slot: g.slot, i: g.i, j: g.j, energy: -g.mode }
}

trait WithIj {
    fn with_ij(self, i: u16, j: u16) -> Gen;
}

impl WithIj for Gen {
    fn with_ij(self, i: u16, j: u16) -> Gen {
        Gen { i, j, ..self }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modesum::{Affine, Pat};
    use crate::scalar::Sym;

    #[test]
    fn graded_dimensions() {
        assert_eq!(VacuumModule::new(&Ambient::plain(&[2]), 2).unwrap().graded_dims(), vec![1, 4, 14]);
        assert_eq!(VacuumModule::new(&Ambient::plain(&[2]), 0).unwrap().graded_dims(), vec![1]);
        assert_eq!(VacuumModule::new(&Ambient::plain(&[1, 1]), 1).unwrap().graded_dims(), vec![1, 2]);
    }

    #[test]
    fn vacuum_is_annihilated() {
        let m = VacuumModule::new(&Ambient::plain(&[3]), 2).unwrap();
        let v = m.act_gen(Gen::e(1, 1, 1, 0), &Vector::vacuum()).unwrap();
        assert!(v.is_zero());
        let s = SumExpr::sum1(
            Range::NonNeg,
            &[Pat::e(1, 3, 2, Affine::var(0, -1, 0)), Pat::e(1, 2, 3, Affine::var(0, 1, 0))],
            ParamScalar::one(),
        );
        assert!(m.act(&s, &Vector::vacuum()).unwrap().is_zero());
        let c = SumExpr::scalar(ParamScalar::sym(Sym::c(1)));
        let w = m.act(&c, &m.basis_vector(1, 0)).unwrap();
        assert_eq!(w.coeff_at(&m, 1, 0), ParamScalar::sym(Sym::c(1)));
    }

    #[test]
    fn matches_straightening() {
        // independent check of current's normal ordering, one word at a time
        let amb = Ambient::plain(&[2]);
        let m = VacuumModule::new(&amb, 2).unwrap();
        let word = [Gen::e(1, 2, 1, 1), Gen::e(1, 1, 2, -1)];
        let lhs = SumExpr::from(amb.normal_order(&word));
        for d in 0..=2 {
            for i in 0..m.graded_dims()[d] {
                let v = m.basis_vector(d, i);
                assert_eq!(m.act(&lhs, &v).unwrap(), m.act_word(&word, &v).unwrap());
            }
        }
    }

    #[test]
    fn commutator_matrix() {
        let amb = Ambient::plain(&[3]);
        let m = VacuumModule::new(&amb, 1).unwrap();
        let xp = SumExpr::gen(Gen::e(1, 1, 2, 0));
        let xm = SumExpr::gen(Gen::e(1, 2, 1, 0));
        let h = SumExpr::from(AlgElement::gen(Gen::e(1, 1, 1, 0)).sub(&AlgElement::gen(Gen::e(1, 2, 2, 0))));
        let a = m.operator_matrix(&xp, 1, 0).unwrap();
        let b = m.operator_matrix(&xm, 1, 0).unwrap();
        let hm = m.operator_matrix(&h, 1, 0).unwrap();
        assert!(a.mul(&b).sub(&b.mul(&a)).sub(&hm).is_zero());
        assert!(m.operator_matrix(&SumExpr::scalar(ParamScalar::one()), 1, 0).unwrap().is_identity());
        assert!(m.operator_matrix(&SumExpr::zero(), 1, 0).unwrap().is_zero());
    }

    #[test]
    fn idle_sum_has_no_tail() {
        let m = VacuumModule::new(&Ambient::plain(&[2]), 1).unwrap();
        let s = SumExpr::sum1(
            Range::NonNeg,
            &[Pat::e(1, 1, 2, Affine::var(0, 1, 0)), Pat::e(1, 2, 1, Affine::var(0, -1, 0))],
            ParamScalar::one(),
        );
        assert!(matches!(m.act(&s, &Vector::vacuum()), Err(OracleError::NoAnnihilatingTail(_))));
    }
}
