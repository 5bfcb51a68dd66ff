//! Slot-tagged current generators, super brackets and PBW straightening.

use std::collections::BTreeMap;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::scalar::{ParamScalar, Sym};
use crate::shape::BlockShape;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CurrentError {
    #[error("slot {0} is not declared")]
    UnknownSlot(u8),
    #[error("generator {0} has indices outside its slot")]
    IndexOutOfRange(String),
    #[error("odd generator {0} in a plain slot")]
    OddInPlainSlot(String),
    #[error("generator {0} is outside the W-context support")]
    IllegalWIndex(String),
}

/// A current generator `E^{(slot)}_{i,j} t^mode` or `psi_{i,j}[mode]`.
///
/// The derived order (mode, slot, parity, i, j) is the PBW order.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Gen {
    pub mode: i64,
    pub slot: u8,
    pub odd: bool,
    pub i: u16,
    pub j: u16,
}

impl Gen {
    pub fn e(slot: u8, i: usize, j: usize, mode: i64) -> Gen {
        Gen { mode, slot, odd: false, i: i as u16, j: j as u16 }
    }

    pub fn psi(slot: u8, i: usize, j: usize, mode: i64) -> Gen {
        Gen { mode, slot, odd: true, i: i as u16, j: j as u16 }
    }

    pub fn with_mode(self, mode: i64) -> Gen {
        Gen { mode, ..self }
    }

    pub fn with_slot(self, slot: u8) -> Gen {
        Gen { slot, ..self }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.odd {
            write!(f, "psi[{},{};m={}]", self.i, self.j, self.mode)
        } else {
            write!(f, "E[r={};{},{};m={}]", self.slot, self.i, self.j, self.mode)
        }
    }
}

pub type Mono = SmallVec<[Gen; 4]>;

pub fn mono_degree(m: &[Gen]) -> i64 {
    m.iter().map(|g| g.mode).sum()
}

pub fn mono_parity(m: &[Gen]) -> bool {
    m.iter().filter(|g| g.odd).count() % 2 == 1
}

/// Finite linear combination of PBW monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct AlgElement {
    terms: BTreeMap<Mono, ParamScalar>,
}

impl AlgElement {
    pub fn zero() -> Self {
        AlgElement { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::scalar(ParamScalar::one())
    }

    pub fn scalar(c: ParamScalar) -> Self {
        let mut e = Self::zero();
        e.add_term(Mono::new(), c);
        e
    }

    pub fn gen(g: Gen) -> Self {
        let mut e = Self::zero();
        e.add_term(SmallVec::from_slice(&[g]), ParamScalar::one());
        e
    }

    pub fn term(m: Mono, c: ParamScalar) -> Self {
        let mut e = Self::zero();
        e.add_term(m, c);
        e
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

    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &ParamScalar)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Mono, ParamScalar)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &[Gen]) -> ParamScalar {
        let key: Mono = SmallVec::from_slice(m);
        self.terms.get(&key).cloned().unwrap_or_else(ParamScalar::zero)
    }

    /// Constant (empty monomial) coefficient.
    pub fn constant_term(&self) -> ParamScalar {
        self.coeff(&[])
    }

    pub fn add_term(&mut self, m: Mono, c: ParamScalar) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add_assign(&mut self, o: &AlgElement) {
        for (m, c) in o.terms.iter() {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, o: &AlgElement, k: &ParamScalar) {
        if k.is_zero() {
            return;
        }
        for (m, c) in o.terms.iter() {
            self.add_term(m.clone(), c.mul(k));
        }
    }

    pub fn add(&self, o: &AlgElement) -> AlgElement {
        let mut r = self.clone();
        r.add_assign(o);
        r
    }

    pub fn sub(&self, o: &AlgElement) -> AlgElement {
        let mut r = self.clone();
        r.add_scaled(o, &ParamScalar::int(-1));
        r
    }

    pub fn neg(&self) -> AlgElement {
        self.scale(&ParamScalar::int(-1))
    }

    pub fn scale(&self, k: &ParamScalar) -> AlgElement {
        if k.is_zero() {
            return AlgElement::zero();
        }
        AlgElement { terms: self.terms.iter().map(|(m, c)| (m.clone(), c.mul(k))).collect() }
    }

    pub fn map_coeffs<F: FnMut(&ParamScalar) -> ParamScalar>(&self, mut f: F) -> AlgElement {
        let mut r = AlgElement::zero();
        for (m, c) in self.terms.iter() {
            r.add_term(m.clone(), f(c));
        }
        r
    }

    pub fn try_map_coeffs<E, F: FnMut(&ParamScalar) -> Result<ParamScalar, E>>(&self, mut f: F) -> Result<AlgElement, E> {
        let mut r = AlgElement::zero();
        for (m, c) in self.terms.iter() {
            r.add_term(m.clone(), f(c)?);
        }
        Ok(r)
    }

    /// Rename generators monomial by monomial; the caller keeps the order canonical or re-normalizes.
    pub fn map_gens<F: FnMut(Gen) -> Gen>(&self, mut f: F) -> Vec<(Vec<Gen>, ParamScalar)> {
        self.terms.iter().map(|(m, c)| (m.iter().map(|&g| f(g)).collect(), c.clone())).collect()
    }

    /// Distinct degrees present.
    pub fn degrees(&self) -> Vec<i64> {
        let mut d: Vec<i64> = self.terms.keys().map(|m| mono_degree(m)).collect();
        d.sort();
        d.dedup();
        d
    }

    pub fn substitute(&self, b: &BTreeMap<Sym, ParamScalar>) -> Result<AlgElement, crate::scalar::ScalarError> {
        self.try_map_coeffs(|c| c.substitute(b))
    }

    /// Largest total degree among terms, or `None` for zero.
    pub fn max_len(&self) -> usize {
        self.terms.keys().map(|m| m.len()).max().unwrap_or(0)
    }
}

impl fmt::Display for AlgElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for g in m.iter() {
                write!(f, "*{g}")?;
            }
        }
        Ok(())
    }
}

/// Declaration of one tensor slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SlotKind {
    /// Affine gl(size) with central charge `c` and pairing constant `z`.
    Plain { size: usize, c: ParamScalar, z: ParamScalar },
    /// The super current algebra on `b + psi` for a block shape.
    W { shape: BlockShape, alphas: Vec<ParamScalar> },
}

impl SlotKind {
    pub fn plain(size: usize, slot: u8) -> Self {
        SlotKind::Plain { size, c: ParamScalar::sym(Sym::c(slot as u32)), z: ParamScalar::one() }
    }

    pub fn plain_with(size: usize, c: ParamScalar) -> Self {
        SlotKind::Plain { size, c, z: ParamScalar::one() }
    }

    pub fn w(shape: &BlockShape) -> Self {
        let alphas = (1..=shape.l()).map(|v| shape.alpha(v).expect("block in range")).collect();
        SlotKind::W { shape: shape.clone(), alphas }
    }

    pub fn size(&self) -> usize {
        match self {
            SlotKind::Plain { size, .. } => *size,
            SlotKind::W { shape, .. } => shape.N(),
        }
    }
}

/// Tensor product of current algebras; slots are numbered from 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ambient {
    slots: Vec<SlotKind>,
}

fn mono1(g: Gen) -> Mono {
    SmallVec::from_slice(&[g])
}

impl Ambient {
    pub fn new(slots: Vec<SlotKind>) -> Self {
        Ambient { slots }
    }

    /// Slots `1..=sizes.len()` of affine gl with symbolic central charges `c<r>`.
    pub fn plain(sizes: &[usize]) -> Self {
        Ambient { slots: sizes.iter().enumerate().map(|(r, &s)| SlotKind::plain(s, r as u8 + 1)).collect() }
    }

    pub fn w(shape: &BlockShape) -> Self {
        Ambient { slots: vec![SlotKind::w(shape)] }
    }

    pub fn slots(&self) -> &[SlotKind] {
        &self.slots
    }

    pub fn slot(&self, r: u8) -> Result<&SlotKind, CurrentError> {
        self.slots.get((r as usize).wrapping_sub(1)).ok_or(CurrentError::UnknownSlot(r))
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn central(&self, r: u8) -> ParamScalar {
        match &self.slots[r as usize - 1] {
            SlotKind::Plain { c, .. } => c.clone(),
            SlotKind::W { .. } => ParamScalar::zero(),
        }
    }

    pub fn validate(&self, g: Gen) -> Result<(), CurrentError> {
        let kind = self.slot(g.slot)?;
        let n = kind.size();
        if g.i == 0 || g.j == 0 || g.i as usize > n || g.j as usize > n {
            return Err(CurrentError::IndexOutOfRange(g.to_string()));
        }
        match kind {
            SlotKind::Plain { .. } => {
                if g.odd {
                    return Err(CurrentError::OddInPlainSlot(g.to_string()));
                }
            }
            SlotKind::W { shape, .. } => {
                let (ci, cj) = (shape.col(g.i as usize), shape.col(g.j as usize));
                if (g.odd && ci <= cj) || (!g.odd && ci < cj) {
                    return Err(CurrentError::IllegalWIndex(g.to_string()));
                }
            }
        }
        Ok(())
    }

    /// Invariant pairing of `E_{pq}` with `E_{ij}` in slot `r`, without the mode factor.
    pub fn pairing(&self, r: u8, p: u16, q: u16, i: u16, j: u16) -> ParamScalar {
        let mut out = ParamScalar::zero();
        match &self.slots[r as usize - 1] {
            SlotKind::Plain { c, z, .. } => {
                if q == i && p == j {
                    out = out.add(c);
                }
                if p == q && i == j {
                    out = out.add(z);
                }
            }
            SlotKind::W { shape, alphas } => {
                if q == i && p == j {
                    out = out.add(&alphas[shape.col(p as usize) - 1]);
                }
                // trace term only within a column block, matching the leg forms of the Miura map
                if p == q && i == j && shape.col(p as usize) == shape.col(i as usize) {
                    out = out.add(&ParamScalar::one());
                }
            }
        }
        out
    }

    /// Super bracket of two generators.
    pub fn bracket(&self, x: Gen, y: Gen) -> AlgElement {
        let mut out = AlgElement::zero();
        self.bracket_into(x, y, &ParamScalar::one(), &mut out);
        out
    }

    fn bracket_into(&self, x: Gen, y: Gen, k: &ParamScalar, out: &mut AlgElement) {
        if x.slot != y.slot {
            return;
        }
        if x.odd && y.odd {
            return;
        }
        let m = x.mode + y.mode;
        let (p, q, i, j) = (x.i, x.j, y.i, y.j);
        if y.odd || x.odd {
            // [e_{pq}, psi_{ij}] = d_{qi} psi_{pj} - d_{pj} psi_{iq}; [psi, e] = -[e, psi]
            let (e, ps, sign) = if y.odd { (x, y, 1) } else { (y, x, -1) };
            let k = k.mul_int(sign);
            if e.j == ps.i {
                out.add_term(mono1(Gen::psi(x.slot, e.i as usize, ps.j as usize, m)), k.clone());
            }
            if e.i == ps.j {
                out.add_term(mono1(Gen::psi(x.slot, ps.i as usize, e.j as usize, m)), k.neg());
            }
            return;
        }
        if q == i {
            out.add_term(mono1(Gen::e(x.slot, p as usize, j as usize, m)), k.clone());
        }
        if p == j {
            out.add_term(mono1(Gen::e(x.slot, i as usize, q as usize, m)), k.neg());
        }
        if m == 0 && x.mode != 0 {
            let s = ParamScalar::int(x.mode).mul(k);
            out.add_term(Mono::new(), self.pairing(x.slot, p, q, i, j).mul(&s));
        }
    }

    /// Right multiplication of a PBW monomial by a generator, result in PBW form.
    pub fn mul_mono_gen(&self, m: &[Gen], g: Gen, k: &ParamScalar, out: &mut AlgElement) {
        if k.is_zero() {
            return;
        }
        let Some((&x, rest)) = m.split_last() else {
            out.add_term(mono1(g), k.clone());
            return;
        };
        if x < g || (x == g && !g.odd) {
            let mut v: Mono = SmallVec::from_slice(m);
            v.push(g);
            out.add_term(v, k.clone());
            return;
        }
        if x == g {
            return;
        }
        // rest * x * g = sign * (rest * g) * x + rest * [x, g]
        let sign = if x.odd && g.odd { -1 } else { 1 };
        let mut tmp = AlgElement::zero();
        self.mul_mono_gen(rest, g, &k.mul_int(sign), &mut tmp);
        for (mm, c) in tmp.terms.iter() {
            self.mul_mono_gen(mm, x, c, out);
        }
        let br = self.bracket(x, g);
        for (bm, c) in br.terms.iter() {
            let kc = c.mul(k);
            match bm.len() {
                0 => {
                    out.add_term(SmallVec::from_slice(rest), kc);
                }
                _ => self.mul_mono_gen(rest, bm[0], &kc, out),
            }
        }
    }

    pub fn mul_gen(&self, a: &AlgElement, g: Gen) -> AlgElement {
        let mut out = AlgElement::zero();
        for (m, c) in a.terms.iter() {
            self.mul_mono_gen(m, g, c, &mut out);
        }
        out
    }

    /// Product of a PBW monomial with a word, accumulated into `out`.
    pub fn mul_mono_word(&self, m: &[Gen], word: &[Gen], k: &ParamScalar, out: &mut AlgElement) {
        if word.is_empty() {
            out.add_term(SmallVec::from_slice(m), k.clone());
            return;
        }
        let mut cur = AlgElement::term(SmallVec::from_slice(m), k.clone());
        for &g in word {
            cur = self.mul_gen(&cur, g);
            if cur.is_zero() {
                return;
            }
        }
        out.add_assign(&cur);
    }

    pub fn normal_order(&self, word: &[Gen]) -> AlgElement {
        let mut out = AlgElement::zero();
        self.mul_mono_word(&[], word, &ParamScalar::one(), &mut out);
        out
    }

    pub fn mul(&self, a: &AlgElement, b: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero();
        for (ma, ca) in a.terms.iter() {
            for (mb, cb) in b.terms.iter() {
                self.mul_mono_word(ma, mb, &ca.mul(cb), &mut out);
            }
        }
        out
    }

    /// Super commutator `ab - (-1)^{|a||b|} ba` extended bilinearly over homogeneous parts.
    pub fn commutator(&self, a: &AlgElement, b: &AlgElement) -> AlgElement {
        let mut out = AlgElement::zero();
        for (ma, ca) in a.terms.iter() {
            for (mb, cb) in b.terms.iter() {
                let k = ca.mul(cb);
                self.mul_mono_word(ma, mb, &k, &mut out);
                let sign = if mono_parity(ma) && mono_parity(mb) { 1 } else { -1 };
                self.mul_mono_word(mb, ma, &k.mul_int(sign), &mut out);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amb(n: usize) -> Ambient {
        Ambient::new(vec![SlotKind::plain_with(n, ParamScalar::sym(Sym::c(0)))])
    }

    #[test]
    fn bracket_with_central_term() {
        let a = amb(2);
        let r = a.bracket(Gen::e(1, 1, 2, 1), Gen::e(1, 2, 1, -1));
        let expect = AlgElement::gen(Gen::e(1, 1, 1, 0))
            .sub(&AlgElement::gen(Gen::e(1, 2, 2, 0)))
            .add(&AlgElement::scalar(ParamScalar::sym(Sym::c(0))));
        assert_eq!(r, expect);
        assert_eq!(a.bracket(Gen::e(1, 1, 1, 2), Gen::e(1, 1, 1, -2)).constant_term(), ParamScalar::parse("2*c+2").unwrap());
    }

    #[test]
    fn pure_z_pairing() {
        let a = Ambient::new(vec![SlotKind::Plain { size: 2, c: ParamScalar::zero(), z: ParamScalar::sym(Sym::Z) }]);
        assert_eq!(a.bracket(Gen::e(1, 1, 1, 2), Gen::e(1, 2, 2, -2)), AlgElement::scalar(ParamScalar::parse("2*z").unwrap()));
        assert!(amb(4).bracket(Gen::e(1, 1, 2, 0), Gen::e(1, 3, 4, 5)).is_zero());
    }

    #[test]
    fn straightening_example() {
        let a = amb(2);
        let r = a.normal_order(&[Gen::e(1, 2, 1, 1), Gen::e(1, 1, 2, -1)]);
        let mut expect = AlgElement::term(SmallVec::from_slice(&[Gen::e(1, 1, 2, -1), Gen::e(1, 2, 1, 1)]), ParamScalar::one());
        expect.add_assign(&AlgElement::gen(Gen::e(1, 2, 2, 0)));
        expect.add_assign(&AlgElement::gen(Gen::e(1, 1, 1, 0)).neg());
        expect.add_assign(&AlgElement::scalar(ParamScalar::sym(Sym::c(0))));
        assert_eq!(r, expect);
    }

    #[test]
    fn odd_square_vanishes() {
        let s = BlockShape::new(&[2, 1]).unwrap();
        let a = Ambient::w(&s);
        let p = Gen::psi(1, 3, 1, -1);
        assert!(a.normal_order(&[p, p]).is_zero());
        let q = Gen::psi(1, 3, 2, -1);
        let pq = a.normal_order(&[q, p]);
        let qp = a.normal_order(&[p, q]);
        assert_eq!(pq, qp.neg());
    }

    #[test]
    fn cross_slot_commutes() {
        let a = Ambient::plain(&[3, 3]);
        let x = Gen::e(1, 1, 2, 1);
        let y = Gen::e(2, 2, 1, -1);
        assert_eq!(a.normal_order(&[x, y]), a.normal_order(&[y, x]));
    }
}
