//! Affine Yangian generators and relations, evaluation maps, the extended coproduct
//! `Delta^{a,b}` and its iterates.
//!
//! Every map is realized as an [`ImageMap`]: generator tokens go to mode sums in a tensor
//! product of affine `gl` current algebras. Level-1 tokens that have not been evaluated yet
//! are carried symbolically in a [`YImage`] while coproducts are composed.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::current::{Ambient, Gen, SlotKind};
use crate::modesum::{self, Affine, ModeSumError, Pat, Range, SumExpr, Verdict};
use crate::scalar::{ParamScalar, ScalarError, Sym};
use crate::shape::{cartan_with, BlockShape, CartanReading, ShapeError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum YangianError {
    #[error("rank {0} is below 3")]
    Rank(usize),
    #[error("index range violated: {0}")]
    Range(String),
    #[error("no image for {0}")]
    Unmapped(String),
    #[error("cannot parse token {0:?}")]
    Parse(String),
    #[error(transparent)]
    ModeSum(#[from] ModeSumError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

type Result<T> = std::result::Result<T, YangianError>;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    H,
    Xp,
    Xm,
}

/// `H_{i,r}`, `X^+_{i,r}` or `X^-_{i,r}` with `r` in {0, 1}.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token {
    pub kind: Kind,
    pub node: usize,
    pub level: u8,
}

impl Token {
    pub fn h(i: usize, r: u8) -> Token {
        Token { kind: Kind::H, node: i, level: r }
    }

    pub fn xp(i: usize, r: u8) -> Token {
        Token { kind: Kind::Xp, node: i, level: r }
    }

    pub fn xm(i: usize, r: u8) -> Token {
        Token { kind: Kind::Xm, node: i, level: r }
    }

    pub fn x(sign: i64, i: usize, r: u8) -> Token {
        if sign > 0 {
            Token::xp(i, r)
        } else {
            Token::xm(i, r)
        }
    }

    /// `deg(X^{+-}_{i,r}) = +-delta_{i,0}`, `deg(H) = 0`.
    pub fn degree(&self) -> i64 {
        match (self.kind, self.node) {
            (Kind::Xp, 0) => 1,
            (Kind::Xm, 0) => -1,
            _ => 0,
        }
    }

    pub fn at_level(self, r: u8) -> Token {
        Token { level: r, ..self }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = match self.kind {
            Kind::H => "H",
            Kind::Xp => "X+",
            Kind::Xm => "X-",
        };
        write!(f, "{k}[{},{}]", self.node, self.level)
    }
}

impl FromStr for Token {
    type Err = YangianError;
    fn from_str(s: &str) -> Result<Token> {
        let bad = || YangianError::Parse(s.to_string());
        let (head, rest) = s.split_once('[').ok_or_else(bad)?;
        let kind = match head.trim() {
            "H" => Kind::H,
            "X+" => Kind::Xp,
            "X-" => Kind::Xm,
            _ => return Err(bad()),
        };
        let body = rest.strip_suffix(']').ok_or_else(bad)?;
        let (i, r) = body.split_once(',').ok_or_else(bad)?;
        let node = i.trim().parse().map_err(|_| bad())?;
        let level: u8 = r.trim().parse().map_err(|_| bad())?;
        if level > 1 {
            return Err(bad());
        }
        Ok(Token { kind, node, level })
    }
}

/// All `6n` generator tokens, ordered.
pub fn tokens(n: usize) -> Vec<Token> {
    let mut out = Vec::new();
    for r in 0..2u8 {
        for i in 0..n {
            out.push(Token::h(i, r));
            out.push(Token::xp(i, r));
            out.push(Token::xm(i, r));
        }
    }
    out.sort();
    out
}

fn check_rank(n: usize) -> Result<()> {
    if n < 3 {
        Err(YangianError::Rank(n))
    } else {
        Ok(())
    }
}

fn hb() -> ParamScalar {
    ParamScalar::hbar()
}

fn int(k: i64) -> ParamScalar {
    ParamScalar::int(k)
}

/// `-s + c` in the first index variable.
fn ms(c: i64) -> Affine {
    Affine::var(0, -1, c)
}

/// `s + c` in the first index variable.
fn ps(c: i64) -> Affine {
    Affine::var(0, 1, c)
}

fn pe(slot: u8, i: usize, j: usize, m: Affine) -> Pat {
    Pat::e(slot, i, j, m)
}

/// Accumulates finite words and one-variable sums.
struct Build<'a> {
    amb: &'a Ambient,
    out: SumExpr,
}

impl<'a> Build<'a> {
    fn new(amb: &'a Ambient) -> Self {
        Build { amb, out: SumExpr::zero() }
    }

    fn word(&mut self, k: ParamScalar, w: &[Gen]) {
        self.out.finite.add_scaled(&self.amb.normal_order(w), &k);
    }

    fn scalar(&mut self, k: ParamScalar) {
        self.word(k, &[]);
    }

    fn sum(&mut self, k: ParamScalar, range: Range, pats: &[Pat]) {
        self.out.add_assign(&SumExpr::sum1(range, pats, k));
    }

    fn done(self) -> SumExpr {
        self.out
    }
}

/// Level-0 image `h_i`, `x^+_i`, `x^-_i` in `slot`, with central charge `c`.
pub fn level0(n: usize, kind: Kind, i: usize, slot: u8, c: &ParamScalar) -> SumExpr {
    let e = |p, q, m| SumExpr::gen(Gen::e(slot, p, q, m));
    match (kind, i) {
        (Kind::H, 0) => e(n, n, 0).sub(&e(1, 1, 0)).add(&SumExpr::scalar(c.clone())),
        (Kind::H, _) => e(i, i, 0).sub(&e(i + 1, i + 1, 0)),
        (Kind::Xp, 0) => e(n, 1, 1),
        (Kind::Xp, _) => e(i, i + 1, 0),
        (Kind::Xm, 0) => e(1, n, -1),
        (Kind::Xm, _) => e(i + 1, i, 0),
    }
}

/// Level-1 evaluation image of rank `n` in `slot` with central charge `c`.
pub fn ev_level1(amb: &Ambient, n: usize, kind: Kind, i: usize, slot: u8, c: &ParamScalar) -> SumExpr {
    let g = |p, q, m| Gen::e(slot, p, q, m);
    let p = |a, b, m| pe(slot, a, b, m);
    let h = hb();
    let hc = h.mul(c);
    let half_i = ParamScalar::ratio(-(i as i64), 2).mul(&h);
    let mut b = Build::new(amb);
    match (kind, i) {
        (Kind::H, 0) => {
            b.out.add_scaled(&level0(n, Kind::H, 0, slot, c), &hc);
            b.word(h.neg(), &[g(n, n, 0), g(1, 1, 0)]);
            b.word(hc.clone(), &[g(n, n, 0)]);
            for k in 1..=n {
                b.sum(h.clone(), Range::NonNeg, &[p(n, k, ms(0)), p(k, n, ps(0))]);
                b.sum(h.neg(), Range::NonNeg, &[p(1, k, ms(-1)), p(k, 1, ps(1))]);
            }
        }
        (Kind::H, _) => {
            b.out.add_scaled(&level0(n, Kind::H, i, slot, c), &half_i);
            b.word(h.neg(), &[g(i, i, 0), g(i + 1, i + 1, 0)]);
            for (row, sign) in [(i, 1), (i + 1, -1)] {
                let k0 = h.mul_int(sign);
                for k in 1..=i {
                    b.sum(k0.clone(), Range::NonNeg, &[p(row, k, ms(0)), p(k, row, ps(0))]);
                }
                for k in i + 1..=n {
                    b.sum(k0.clone(), Range::NonNeg, &[p(row, k, ms(-1)), p(k, row, ps(1))]);
                }
            }
        }
        (Kind::Xp, 0) => {
            b.word(hc, &[g(n, 1, 1)]);
            for k in 1..=n {
                b.sum(h.clone(), Range::NonNeg, &[p(n, k, ms(0)), p(k, 1, ps(1))]);
            }
        }
        (Kind::Xp, _) => {
            b.word(half_i, &[g(i, i + 1, 0)]);
            for k in 1..=i {
                b.sum(h.clone(), Range::NonNeg, &[p(i, k, ms(0)), p(k, i + 1, ps(0))]);
            }
            for k in i + 1..=n {
                b.sum(h.clone(), Range::NonNeg, &[p(i, k, ms(-1)), p(k, i + 1, ps(1))]);
            }
        }
        (Kind::Xm, 0) => {
            b.word(hc, &[g(1, n, -1)]);
            for k in 1..=n {
                b.sum(h.clone(), Range::NonNeg, &[p(1, k, ms(-1)), p(k, n, ps(0))]);
            }
        }
        (Kind::Xm, _) => {
            b.word(half_i, &[g(i + 1, i, 0)]);
            for k in 1..=i {
                b.sum(h.clone(), Range::NonNeg, &[p(i + 1, k, ms(0)), p(k, i, ps(0))]);
            }
            for k in i + 1..=n {
                b.sum(h.clone(), Range::NonNeg, &[p(i + 1, k, ms(-1)), p(k, i, ps(1))]);
            }
        }
    }
    b.done()
}

/// Evaluation image of any token: level 0 plus `x` times level 0 for level 1.
pub fn ev_token(amb: &Ambient, n: usize, t: Token, slot: u8, c: &ParamScalar, x: &ParamScalar) -> SumExpr {
    let l0 = level0(n, t.kind, t.node, slot, c);
    if t.level == 0 {
        return l0;
    }
    let mut e = ev_level1(amb, n, t.kind, t.node, slot, c);
    e.add_scaled(&l0, x);
    e
}

/// `(-n hbar - eps) / hbar`.
pub fn ev_central(n: usize, eps: &ParamScalar) -> ParamScalar {
    hb().mul_int(-(n as i64)).sub(eps).div(&hb()).expect("hbar is nonzero")
}

/// Symbol for the domain central charge of an extended Yangian.
pub fn domain_c() -> Sym {
    Sym::c(0)
}

/// A map from Yangian tokens (and current generators, for extended domains) to mode sums.
#[derive(Clone, Debug)]
pub struct ImageMap {
    pub label: String,
    /// Rank of the Yangian.
    pub n: usize,
    /// Codomain.
    pub amb: Ambient,
    pub images: BTreeMap<Token, SumExpr>,
    /// `e_{ij} t^s` goes to the sum over `(slot, bound)` with `i, j <= bound` of `e^{(slot)}_{ij} t^s`.
    pub legs: Vec<(u8, usize)>,
    /// Image of the domain central charge `c0`.
    pub central: ParamScalar,
    /// Size of the current algebra of the domain (`n` when the domain has no currents).
    pub domain_size: usize,
    /// Domain parameter `eps` of the relations.
    pub eps: ParamScalar,
    /// Specializations applied before every comparison.
    pub bindings: BTreeMap<Sym, ParamScalar>,
    pub deviations: Vec<String>,
}

impl ImageMap {
    pub fn image(&self, t: Token) -> Result<&SumExpr> {
        self.images.get(&t).ok_or_else(|| YangianError::Unmapped(t.to_string()))
    }

    /// Image of `e_{ij} t^m`.
    pub fn e_image(&self, i: usize, j: usize, m: i64) -> Result<SumExpr> {
        if i == 0 || j == 0 || i > self.domain_size || j > self.domain_size {
            return Err(YangianError::Unmapped(format!("e[{i},{j}]")));
        }
        let mut out = SumExpr::zero();
        for &(slot, bound) in &self.legs {
            if i <= bound && j <= bound {
                out.add_assign(&SumExpr::gen(Gen::e(slot, i, j, m)));
            }
        }
        Ok(out)
    }

    /// Push a domain element (current generators in slot 1, central charge `c0`) through the map.
    pub fn apply(&self, e: &SumExpr) -> Result<SumExpr> {
        if e.slots().iter().any(|&s| s != 1) {
            return Err(YangianError::Unmapped("domain elements live in slot 1".into()));
        }
        let legs = self.legs.clone();
        let size = self.domain_size;
        let f = move |_s: u8, i: u16, j: u16| {
            if i as usize > size || j as usize > size {
                return Vec::new();
            }
            legs.iter()
                .filter(|&&(_, b)| (i as usize) <= b && (j as usize) <= b)
                .map(|&(slot, _)| (slot, i, j, ParamScalar::one()))
                .collect()
        };
        let out = e.map_patterns(&self.amb, &f)?;
        let sub = BTreeMap::from([(domain_c(), self.central.clone())]);
        Ok(out.substitute(&sub)?)
    }

    /// The same map with all bindings applied, including inside the codomain central charges.
    pub fn bound(&self) -> Result<ImageMap> {
        let b = &self.bindings;
        let slots = self
            .amb
            .slots()
            .iter()
            .map(|s| match s {
                SlotKind::Plain { size, c, z } => Ok(SlotKind::Plain { size: *size, c: c.substitute_closure(b)?, z: z.clone() }),
                other => Ok(other.clone()),
            })
            .collect::<std::result::Result<Vec<_>, ScalarError>>()?;
        let mut images = BTreeMap::new();
        for (t, e) in &self.images {
            images.insert(*t, e.map_coeffs(|c| c.substitute_closure(b))?);
        }
        Ok(ImageMap {
            amb: Ambient::new(slots),
            images,
            central: self.central.substitute_closure(b)?,
            eps: self.eps.substitute_closure(b)?,
            bindings: BTreeMap::new(),
            ..self.clone()
        })
    }

    /// Decide `e == 0` after bindings.
    pub fn is_zero(&self, e: &SumExpr) -> Result<Verdict> {
        let e = e.map_coeffs(|c| c.substitute_closure(&self.bindings))?;
        Ok(modesum::is_zero(&self.bound_ambient()?, &e)?)
    }

    pub fn bound_ambient(&self) -> Result<Ambient> {
        let slots = self
            .amb
            .slots()
            .iter()
            .map(|s| match s {
                SlotKind::Plain { size, c, z } => {
                    Ok(SlotKind::Plain { size: *size, c: c.substitute_closure(&self.bindings)?, z: z.clone() })
                }
                other => Ok(other.clone()),
            })
            .collect::<std::result::Result<Vec<_>, ScalarError>>()?;
        Ok(Ambient::new(slots))
    }
}

/// `ev_{hbar,eps}` of rank `n` into `U(gl(n)^c)`, `c` bound to `(-n hbar - eps)/hbar`.
pub fn ev_images(n: usize) -> Result<ImageMap> {
    check_rank(n)?;
    let amb = Ambient::plain(&[n]);
    let c = ParamScalar::sym(Sym::c(1));
    let images = tokens(n).into_iter().map(|t| (t, ev_token(&amb, n, t, 1, &c, &ParamScalar::zero()))).collect();
    Ok(ImageMap {
        label: format!("ev(n={n})"),
        n,
        amb,
        images,
        legs: vec![(1, n)],
        central: c,
        domain_size: n,
        eps: ParamScalar::eps(),
        bindings: BTreeMap::from([(Sym::c(1), ev_central(n, &ParamScalar::eps()))]),
        deviations: Vec::new(),
    })
}

/// `ev~^x` on the extended Yangian `Y^a` into `U(gl(a)^{c_a})`.
pub fn ext_ev_images(n: usize, a: usize, x: &ParamScalar) -> Result<ImageMap> {
    check_rank(n)?;
    if a < n {
        return Err(YangianError::Range(format!("a={a} < n={n}")));
    }
    let amb = Ambient::plain(&[a]);
    let c = ParamScalar::sym(Sym::c(1));
    let images = tokens(n).into_iter().map(|t| (t, ev_token(&amb, n, t, 1, &c, x))).collect();
    Ok(ImageMap {
        label: format!("ext_ev(n={n},a={a},x={x})"),
        n,
        amb,
        images,
        legs: vec![(1, a)],
        central: c,
        domain_size: a,
        eps: ParamScalar::eps(),
        bindings: BTreeMap::from([(Sym::c(1), ev_central(n, &ParamScalar::eps()))]),
        deviations: Vec::new(),
    })
}

/// Correction terms of `Delta^{a,b}` for one level-1 token, with the `Y^a` leg in `s1`
/// and the `Y^b` leg in `s2`.
#[derive(Clone, Debug)]
pub struct Corrections {
    pub a_part: SumExpr,
    pub b_part: SumExpr,
    pub f_part: SumExpr,
}

impl Corrections {
    /// `B (x) 1 + A - F`.
    pub fn total(&self) -> SumExpr {
        self.b_part.add(&self.a_part).sub(&self.f_part)
    }
}

/// Deviation tags carried by every coproduct built here.
pub const COPRODUCT_DEVIATIONS: [&str; 7] = [
    "second-leg-H_i1",
    "B0-diagonal-sum",
    "B0-enn-mode0",
    "Bminus0-range-b",
    "Aplus0-sign",
    "Bi-two-term",
    "Bminus-i-modes",
];

#[allow(clippy::too_many_arguments)]
pub fn corrections(amb: &Ambient, n: usize, a: usize, b: usize, t: Token, s1: u8, s2: u8, ca: &ParamScalar, cb: &ParamScalar) -> Corrections {
    let h = hb();
    let mh = h.neg();
    let i = t.node;
    let g1 = |p, q, m| Gen::e(s1, p, q, m);
    let g2 = |p, q, m| Gen::e(s2, p, q, m);
    let p1 = |p, q, m| pe(s1, p, q, m);
    let p2 = |p, q, m| pe(s2, p, q, m);
    let mut fa = Build::new(amb);
    let mut fb = Build::new(amb);
    let mut ff = Build::new(amb);
    // rows (r1, r2) of F: +r1 and -r2
    match (t.kind, i) {
        (Kind::H, _) => {
            let (r1, r2) = if i == 0 { (n, 1) } else { (i, i + 1) };
            for v in n + 1..=b {
                ff.sum(h.clone(), Range::All, &[p1(v, r1, ps(0)), p2(r1, v, ms(0))]);
                ff.sum(mh.clone(), Range::All, &[p1(v, r2, ps(0)), p2(r2, v, ms(0))]);
            }
        }
        (Kind::Xp, 0) => {
            for u in n + 1..=b {
                ff.sum(h.clone(), Range::All, &[p1(u, 1, ms(0)), p2(n, u, ps(1))]);
            }
        }
        (Kind::Xp, _) => {
            for u in n + 1..=b {
                ff.sum(h.clone(), Range::All, &[p1(u, i + 1, ms(0)), p2(i, u, ps(0))]);
            }
        }
        (Kind::Xm, 0) => {
            for u in n + 1..=b {
                ff.sum(h.clone(), Range::All, &[p1(u, n, ms(0)), p2(1, u, ps(-1))]);
            }
        }
        (Kind::Xm, _) => {
            for u in n + 1..=b {
                ff.sum(h.clone(), Range::All, &[p1(u, i, ms(0)), p2(i + 1, u, ps(0))]);
            }
        }
    }
    match (t.kind, i) {
        (Kind::H, 0) => {
            fa.word(mh.clone(), &[g1(1, 1, 0), g2(n, n, 0)]);
            fa.word(mh.clone(), &[g1(n, n, 0), g2(1, 1, 0)]);
            let hcb = h.mul(cb);
            let hca = h.mul(ca);
            fa.word(hcb.clone(), &[g1(n, n, 0)]);
            fa.word(hcb.neg(), &[g1(1, 1, 0)]);
            fa.word(hca.clone(), &[g2(n, n, 0)]);
            fa.word(hca.neg(), &[g2(1, 1, 0)]);
            fa.scalar(hca.mul(cb));
            for u in 1..=n {
                fa.sum(mh.clone(), Range::NonNeg, &[p1(u, n, ms(-1)), p2(n, u, ps(1))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(n, u, ms(0)), p2(u, n, ps(0))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(u, 1, ms(0)), p2(1, u, ps(0))]);
                fa.sum(mh.clone(), Range::NonNeg, &[p1(1, u, ms(-1)), p2(u, 1, ps(1))]);
            }
            for u in b + 1..=a {
                fb.sum(h.clone(), Range::NonNeg, &[p1(u, n, ms(-1)), p1(n, u, ps(1))]);
                fb.sum(h.clone(), Range::NonNeg, &[p1(n, u, ms(0)), p1(u, n, ps(0))]);
                fb.sum(mh.clone(), Range::NonNeg, &[p1(u, 1, ms(-1)), p1(1, u, ps(1))]);
                fb.sum(mh.clone(), Range::NonNeg, &[p1(1, u, ms(0)), p1(u, 1, ps(0))]);
                fb.word(mh.clone(), &[g1(u, u, 0)]);
            }
            let d = int((a - b) as i64).mul(&h);
            fb.word(d.clone(), &[g1(n, n, 0)]);
            fb.scalar(d.mul(ca));
        }
        (Kind::H, _) => {
            fa.word(mh.clone(), &[g1(i, i, 0), g2(i + 1, i + 1, 0)]);
            fa.word(mh.clone(), &[g1(i + 1, i + 1, 0), g2(i, i, 0)]);
            for (r, k) in [(i, h.clone()), (i + 1, mh.clone())] {
                for u in 1..=i {
                    fa.sum(k.neg(), Range::NonNeg, &[p1(u, r, ms(-1)), p2(r, u, ps(1))]);
                    fa.sum(k.clone(), Range::NonNeg, &[p1(r, u, ms(0)), p2(u, r, ps(0))]);
                }
                for u in i + 1..=n {
                    fa.sum(k.neg(), Range::NonNeg, &[p1(u, r, ms(0)), p2(r, u, ps(0))]);
                    fa.sum(k.clone(), Range::NonNeg, &[p1(r, u, ms(-1)), p2(u, r, ps(1))]);
                }
            }
            for u in b + 1..=a {
                for (r, k) in [(i, h.clone()), (i + 1, mh.clone())] {
                    fb.sum(k.clone(), Range::NonNeg, &[p1(u, r, ms(-1)), p1(r, u, ps(1))]);
                    fb.sum(k, Range::NonNeg, &[p1(r, u, ms(0)), p1(u, r, ps(0))]);
                }
            }
        }
        (Kind::Xp, 0) => {
            fa.word(h.mul(ca), &[g2(n, 1, 1)]);
            for u in 1..=n {
                fa.sum(mh.clone(), Range::NonNeg, &[p1(u, 1, ms(0)), p2(n, u, ps(1))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(n, u, ms(0)), p2(u, 1, ps(1))]);
            }
            for u in b + 1..=a {
                fb.sum(h.clone(), Range::NonNeg, &[p1(u, 1, ms(-1)), p1(n, u, ps(2))]);
                fb.sum(h.clone(), Range::NonNeg, &[p1(n, u, ms(1)), p1(u, 1, ps(0))]);
            }
        }
        (Kind::Xp, _) => {
            for u in 1..=i {
                fa.sum(mh.clone(), Range::NonNeg, &[p1(u, i + 1, ms(-1)), p2(i, u, ps(1))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(i, u, ms(0)), p2(u, i + 1, ps(0))]);
            }
            for u in i + 1..=n {
                fa.sum(mh.clone(), Range::NonNeg, &[p1(u, i + 1, ms(0)), p2(i, u, ps(0))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(i, u, ms(-1)), p2(u, i + 1, ps(1))]);
            }
            for u in b + 1..=a {
                fb.sum(h.clone(), Range::NonNeg, &[p1(u, i + 1, ms(-1)), p1(i, u, ps(1))]);
                fb.sum(h.clone(), Range::NonNeg, &[p1(i, u, ms(0)), p1(u, i + 1, ps(0))]);
            }
        }
        (Kind::Xm, 0) => {
            fa.word(h.mul(cb), &[g1(1, n, -1)]);
            for u in 1..=n {
                fa.sum(mh.clone(), Range::NonNeg, &[p1(u, n, ms(-1)), p2(1, u, ps(0))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(1, u, ms(-1)), p2(u, n, ps(0))]);
            }
            for u in b + 1..=a {
                fb.sum(h.clone(), Range::NonNeg, &[p1(u, n, ms(-1)), p1(1, u, ps(0))]);
                fb.sum(h.clone(), Range::NonNeg, &[p1(1, u, ms(-1)), p1(u, n, ps(0))]);
            }
            fb.word(int((a - b) as i64).mul(&h), &[g1(1, n, -1)]);
        }
        (Kind::Xm, _) => {
            for u in 1..=i {
                fa.sum(mh.clone(), Range::NonNeg, &[p1(u, i, ms(-1)), p2(i + 1, u, ps(1))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(i + 1, u, ms(0)), p2(u, i, ps(0))]);
            }
            for u in i + 1..=n {
                fa.sum(mh.clone(), Range::NonNeg, &[p1(u, i, ms(0)), p2(i + 1, u, ps(0))]);
                fa.sum(h.clone(), Range::NonNeg, &[p1(i + 1, u, ms(-1)), p2(u, i, ps(1))]);
            }
            for u in b + 1..=a {
                fb.sum(h.clone(), Range::NonNeg, &[p1(u, i, ms(-1)), p1(i + 1, u, ps(1))]);
                fb.sum(h.clone(), Range::NonNeg, &[p1(i + 1, u, ms(0)), p1(u, i, ps(0))]);
            }
        }
    }
    Corrections { a_part: fa.done(), b_part: fb.done(), f_part: ff.done() }
}

/// Image of a token under a composite of coproducts: level-1 tokens still abstract in
/// their slots, plus current-algebra terms.
#[derive(Clone, Debug, Default)]
pub struct YImage {
    pub abstract_terms: Vec<(u8, Token, ParamScalar)>,
    pub cur: SumExpr,
}

impl YImage {
    /// `Psi_1(t)` placed in `slot` whose central charge symbol is `c<slot>`.
    pub fn token(n: usize, t: Token, slot: u8) -> YImage {
        if t.level == 0 {
            YImage { abstract_terms: vec![], cur: level0(n, t.kind, t.node, slot, &ParamScalar::sym(Sym::c(slot as u32))) }
        } else {
            YImage { abstract_terms: vec![(slot, t, ParamScalar::one())], cur: SumExpr::zero() }
        }
    }

    /// Apply `Delta^{a,b}` to slot `g`, producing slots `g-1` (the `Y^a` leg) and `g`.
    pub fn split(&self, amb: &Ambient, n: usize, g: u8, a: usize, b: usize) -> Result<YImage> {
        let f = |s: u8, i: u16, j: u16| {
            if s != g {
                return vec![(s, i, j, ParamScalar::one())];
            }
            let mut v = vec![(g - 1, i, j, ParamScalar::one())];
            if i as usize <= b && j as usize <= b {
                v.push((g, i, j, ParamScalar::one()));
            }
            v
        };
        let cg = Sym::c(g as u32);
        let (ca, cb) = (ParamScalar::sym(Sym::c(g as u32 - 1)), ParamScalar::sym(cg));
        let sub = BTreeMap::from([(cg, ca.add(&cb))]);
        let mut cur = self.cur.map_patterns(amb, &f)?.substitute(&sub)?;
        let mut abs = Vec::new();
        for (s, t, k) in &self.abstract_terms {
            let k = k.substitute(&sub)?;
            if *s != g {
                abs.push((*s, *t, k));
                continue;
            }
            abs.push((g - 1, *t, k.clone()));
            abs.push((g, *t, k.clone()));
            let corr = corrections(amb, n, a, b, *t, g - 1, g, &ca, &cb);
            cur.add_scaled(&corr.total(), &k);
        }
        Ok(YImage { abstract_terms: abs, cur })
    }

    /// Evaluate every abstract token of slot `r` by `ev~^{x_r}` with central charge `c<r>`.
    pub fn evaluate(&self, amb: &Ambient, n: usize, shifts: &BTreeMap<u8, ParamScalar>) -> SumExpr {
        let mut out = self.cur.clone();
        for (s, t, k) in &self.abstract_terms {
            let c = ParamScalar::sym(Sym::c(*s as u32));
            let x = shifts.get(s).cloned().unwrap_or_else(ParamScalar::zero);
            out.add_scaled(&ev_token(amb, n, *t, *s, &c, &x), k);
        }
        out
    }
}

/// `Delta^{a,b}` on all tokens, legs in slots 1 (`Y^a`) and 2 (`Y^b`).
pub fn coproduct_images(n: usize, a: usize, b: usize) -> Result<(Ambient, BTreeMap<Token, YImage>)> {
    check_rank(n)?;
    if !(a >= b && b >= n) {
        return Err(YangianError::Range(format!("need a >= b >= n, got a={a}, b={b}, n={n}")));
    }
    let amb = Ambient::plain(&[a, b]);
    let mut out = BTreeMap::new();
    for t in tokens(n) {
        out.insert(t, YImage::token(n, t, 2).split(&amb, n, 2, a, b)?);
    }
    Ok((amb, out))
}

/// `(ev~^{x1} (x) ev~^{x2}) o Delta^{a,b}`, with `c2 = (-n hbar - eps)/hbar` and the quotient
/// `c1 - c2 = -(a - b)`.
pub fn coproduct_ev(n: usize, a: usize, b: usize, x1: &ParamScalar, x2: &ParamScalar) -> Result<ImageMap> {
    let (amb, ys) = coproduct_images(n, a, b)?;
    let shifts = BTreeMap::from([(1u8, x1.clone()), (2u8, x2.clone())]);
    let images = ys.iter().map(|(t, y)| (*t, y.evaluate(&amb, n, &shifts))).collect();
    let c2 = ev_central(n, &ParamScalar::eps());
    let c1 = c2.sub(&int((a - b) as i64));
    let mut deviations: Vec<String> = COPRODUCT_DEVIATIONS.iter().map(|s| s.to_string()).collect();
    deviations.push("leg-central-quotient".into());
    Ok(ImageMap {
        label: format!("ev(x)ev o Delta(n={n},a={a},b={b})"),
        n,
        amb,
        images,
        legs: vec![(1, a), (2, b)],
        central: ParamScalar::sym(Sym::c(1)).add(&ParamScalar::sym(Sym::c(2))),
        domain_size: b,
        eps: ParamScalar::eps(),
        bindings: BTreeMap::from([(Sym::c(1), c1), (Sym::c(2), c2)]),
        deviations,
    })
}

/// How the leg central charges of `ev^l` are bound.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum LegChargeRule {
    /// `c_r = alpha_r = k + N - q_r`.
    Alpha,
    /// `c_r = -(eps - (q_r - q_l) hbar)/hbar`, the formula as printed.
    Literal,
}

/// `Delta^l` for a block shape: images in `l` legs, leg `r` of size `q_r`.
pub fn delta_l(shape: &BlockShape) -> Result<(Ambient, BTreeMap<Token, YImage>)> {
    let n = shape.q_last();
    check_rank(n)?;
    let l = shape.l();
    let amb = Ambient::plain(shape.q());
    let mut out = BTreeMap::new();
    for t in tokens(n) {
        let mut y = YImage::token(n, t, l as u8);
        for g in (2..=l).rev() {
            y = y.split(&amb, n, g as u8, shape.q_at(g - 1), shape.q_at(g))?;
        }
        out.insert(t, y);
    }
    Ok((amb, out))
}

/// Leg central charge for `ev^l`, before binding `eps`.
pub fn leg_charge(shape: &BlockShape, r: usize, rule: LegChargeRule) -> ParamScalar {
    let eps = ParamScalar::eps();
    let ql = shape.q_last() as i64;
    let qr = shape.q_at(r) as i64;
    match rule {
        LegChargeRule::Alpha => ev_central(shape.q_last(), &eps.add(&hb().mul_int(qr - ql))),
        LegChargeRule::Literal => eps.sub(&hb().mul_int(qr - ql)).neg().div(&hb()).expect("hbar is nonzero"),
    }
}

/// `ev^l o Delta^l` with `eps = -(k+N) hbar`, shifts `x_r = -hbar gamma_r`.
pub fn ev_l(shape: &BlockShape, rule: LegChargeRule) -> Result<ImageMap> {
    ev_l_with(shape, rule, |r| shape.shift_a(r).expect("leg in range"))
}

pub fn ev_l_with<F: Fn(usize) -> ParamScalar>(shape: &BlockShape, rule: LegChargeRule, shift: F) -> Result<ImageMap> {
    let (amb, ys) = delta_l(shape)?;
    let n = shape.q_last();
    let l = shape.l();
    let shifts: BTreeMap<u8, ParamScalar> = (1..=l).map(|r| (r as u8, shift(r))).collect();
    let images = ys.iter().map(|(t, y)| (*t, y.evaluate(&amb, n, &shifts))).collect();
    let mut bindings: BTreeMap<Sym, ParamScalar> = (1..=l).map(|r| (Sym::c(r as u32), leg_charge(shape, r, rule))).collect();
    bindings.insert(Sym::EPS, hb().mul_int(-(shape.N() as i64)).sub(&ParamScalar::k().mul(&hb())));
    let mut deviations: Vec<String> = COPRODUCT_DEVIATIONS.iter().map(|s| s.to_string()).collect();
    deviations.push(match rule {
        LegChargeRule::Alpha => "leg-charge-alpha".into(),
        LegChargeRule::Literal => "leg-charge-literal".into(),
    });
    deviations.push("shift-alpha-y".into());
    Ok(ImageMap {
        label: format!("ev^l o Delta^l(shape={shape})"),
        n,
        amb,
        images,
        legs: Vec::new(),
        central: ParamScalar::zero(),
        domain_size: n,
        eps: ParamScalar::eps(),
        bindings,
        deviations,
    })
}

/// Yangian relation identifiers `R2.1` .. `R2.20`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelId(pub u8);

impl fmt::Display for RelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R2.{}", self.0)
    }
}

impl FromStr for RelId {
    type Err = YangianError;
    fn from_str(s: &str) -> Result<RelId> {
        let k: u8 = s.strip_prefix("R2.").and_then(|t| t.parse().ok()).ok_or_else(|| YangianError::Parse(s.to_string()))?;
        if (1..=20).contains(&k) {
            Ok(RelId(k))
        } else {
            Err(YangianError::Parse(s.to_string()))
        }
    }
}

/// One instance of a relation template.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RelInstance {
    pub rel: RelId,
    pub i: usize,
    pub j: usize,
    /// `+1` / `-1` for the `X^+` / `X^-` variants.
    pub sign: i8,
    pub r: u8,
    pub s: u8,
    /// Row/column index `v > n` of the current generator in `R2.11` .. `R2.20`.
    pub v: usize,
    pub w: i64,
}

impl fmt::Display for RelInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let RelInstance { rel, i, j, sign, r, s, v, w } = *self;
        if rel.0 <= 10 {
            let pm = if sign > 0 { "+" } else { "-" };
            write!(f, "{rel}[i={i},j={j},{pm},r={r},s={s}]")
        } else {
            write!(f, "{rel}[i={i},j={j},v={v},w={w}]")
        }
    }
}

fn inst(rel: u8, i: usize, j: usize, sign: i8, r: u8, s: u8) -> RelInstance {
    RelInstance { rel: RelId(rel), i, j, sign, r, s, v: 0, w: 0 }
}

fn is_corner(n: usize, i: usize, j: usize) -> bool {
    (i, j) == (0, n - 1) || (i, j) == (n - 1, 0)
}

/// All instances of `R2.<rel>` for rank `n` (relations 1 to 10).
pub fn instances(n: usize, rel: u8) -> Vec<RelInstance> {
    let mut out = Vec::new();
    let pm = [1i8, -1];
    for i in 0..n {
        for j in 0..n {
            match rel {
                1 => {
                    if i <= j {
                        for r in 0..2 {
                            for s in 0..2 {
                                if i < j || r <= s {
                                    out.push(inst(1, i, j, 1, r, s));
                                }
                            }
                        }
                    }
                }
                2 => out.push(inst(2, i, j, 1, 0, 0)),
                3 => {
                    out.push(inst(3, i, j, 1, 1, 0));
                    out.push(inst(3, i, j, 1, 0, 1));
                }
                4 => {
                    for sg in pm {
                        for r in 0..2 {
                            out.push(inst(4, i, j, sg, r, 0));
                        }
                    }
                }
                5 | 8 => {
                    if !is_corner(n, i, j) {
                        for sg in pm {
                            out.push(inst(rel, i, j, sg, 1, 0));
                        }
                    }
                }
                6 => {
                    if (i, j) == (0, n - 1) {
                        for sg in pm {
                            out.push(inst(6, i, j, sg, 1, 0));
                        }
                    }
                }
                7 => {
                    if (i, j) == (n - 1, 0) {
                        for sg in pm {
                            out.push(inst(7, i, j, sg, 1, 0));
                        }
                    }
                }
                9 => {
                    if (i, j) == (0, n - 1) {
                        for sg in pm {
                            out.push(inst(9, i, j, sg, 1, 0));
                        }
                    }
                }
                10 => {
                    if i != j {
                        for sg in pm {
                            out.push(inst(10, i, j, sg, 0, 0));
                        }
                    }
                }
                _ => {}
            }
        }
    }
    out
}

/// Instances of `R2.11` .. `R2.20` for `n < v <= vmax` and the given modes.
pub fn current_instances(n: usize, rel: u8, vmax: usize, modes: &[i64]) -> Vec<RelInstance> {
    let mut out = Vec::new();
    let mut push = |i: usize, j: usize| {
        for v in n + 1..=vmax {
            for &w in modes {
                out.push(RelInstance { rel: RelId(rel), i, j, sign: 1, r: 1, s: 0, v, w });
            }
        }
    };
    match rel {
        11 | 12 => {
            for i in 1..n {
                for j in 1..=n {
                    if j != i && j != i + 1 {
                        push(i, j);
                    }
                }
            }
        }
        13 | 14 => {
            for i in 2..n {
                push(i, i);
            }
        }
        15 | 16 => {
            for j in 2..n {
                push(0, j);
            }
        }
        17 | 19 => push(0, n),
        18 | 20 => push(0, 1),
        _ => {}
    }
    out
}

/// Pairs `(node, coefficient)` of `H_{., 1}` tokens and the current `e` (row/col) for `R2.11` .. `R2.20`.
fn current_relation_shape(n: usize, x: &RelInstance) -> (Vec<usize>, usize, usize) {
    let (i, j, v) = (x.i, x.j, x.v);
    match x.rel.0 {
        11 => (vec![i], v, j),
        12 => (vec![i], j, v),
        13 => (vec![i - 1, i], v, i),
        14 => (vec![i - 1, i], i, v),
        15 => (vec![0], v, j),
        16 => (vec![0], j, v),
        17 => (vec![0, n - 1], v, n),
        18 => (vec![0, 1], v, 1),
        19 => (vec![0, n - 1], n, v),
        _ => (vec![0, 1], 1, v),
    }
}

/// `ev^(H_{i,1})` in the domain current algebra `gl(size)^{c0}`, slot 1.
pub fn ev_hat(n: usize, size: usize, i: usize) -> (Ambient, SumExpr) {
    let amb = Ambient::new(vec![SlotKind::plain_with(size, ParamScalar::sym(domain_c()))]);
    let e = ev_level1(&amb, n, Kind::H, i, 1, &ParamScalar::sym(domain_c()));
    (amb, e)
}

/// `LHS - RHS` of a relation under `m`.
pub fn relation_residual(m: &ImageMap, x: &RelInstance, cartan: CartanReading) -> Result<SumExpr> {
    let n = m.n;
    let amb = &m.amb;
    let a = cartan_with(n, cartan)?;
    let img = |t: Token| m.image(t).cloned();
    let br = |p: &SumExpr, q: &SumExpr| p.commutator(amb, q);
    let (i, j) = (x.i, x.j);
    let sg = x.sign as i64;
    let h = hb();
    let half = ParamScalar::ratio(1, 2);
    let shift = m.eps.add(&h.mul_int(n as i64).mul(&half));
    let htilde = |k: usize| -> Result<SumExpr> {
        let h0 = img(Token::h(k, 0))?;
        let sq = h0.mul(amb, &h0)?;
        Ok(img(Token::h(k, 1))?.sub(&sq.scale(&h.mul(&half))))
    };
    let out = match x.rel.0 {
        1 => br(&img(Token::h(i, x.r))?, &img(Token::h(j, x.s))?)?,
        2 => {
            let mut e = br(&img(Token::xp(i, 0))?, &img(Token::xm(j, 0))?)?;
            if i == j {
                e = e.sub(&img(Token::h(i, 0))?);
            }
            e
        }
        3 => {
            let e = if x.r == 1 {
                br(&img(Token::xp(i, 1))?, &img(Token::xm(j, 0))?)?
            } else {
                br(&img(Token::xp(i, 0))?, &img(Token::xm(j, 1))?)?
            };
            if i == j {
                e.sub(&img(Token::h(i, 1))?)
            } else {
                e
            }
        }
        4 => {
            let xj = img(Token::x(sg, j, x.r))?;
            br(&img(Token::h(i, 0))?, &xj)?.sub(&xj.scale(&int(sg * a[i][j])))
        }
        5 => {
            let l = br(&htilde(i)?, &img(Token::x(sg, j, 0))?)?;
            l.sub(&img(Token::x(sg, j, 1))?.scale(&int(sg * a[i][j])))
        }
        6 => {
            let l = br(&htilde(0)?, &img(Token::x(sg, n - 1, 0))?)?;
            let r = img(Token::x(sg, n - 1, 1))?.sub(&img(Token::x(sg, n - 1, 0))?.scale(&shift));
            l.add(&r.scale(&int(sg)))
        }
        7 => {
            let l = br(&htilde(n - 1)?, &img(Token::x(sg, 0, 0))?)?;
            let r = img(Token::x(sg, 0, 1))?.add(&img(Token::x(sg, 0, 0))?.scale(&shift));
            l.add(&r.scale(&int(sg)))
        }
        8 | 9 => {
            let (xi1, xi0) = (img(Token::x(sg, i, 1))?, img(Token::x(sg, i, 0))?);
            let (xj1, xj0) = (img(Token::x(sg, j, 1))?, img(Token::x(sg, j, 0))?);
            let l = br(&xi1, &xj0)?.sub(&br(&xi0, &xj1)?);
            let anti = xi0.mul(amb, &xj0)?.add(&xj0.mul(amb, &xi0)?);
            let mut r = anti.scale(&h.mul(&half).mul_int(sg * a[i][j]));
            if x.rel.0 == 9 {
                r = anti.scale(&h.mul(&half).mul_int(-sg)).sub(&br(&xi0, &xj0)?.scale(&shift));
            }
            l.sub(&r)
        }
        10 => {
            let xi = img(Token::x(sg, i, 0))?;
            let mut e = img(Token::x(sg, j, 0))?;
            for _ in 0..(1 - a[i][j]) {
                e = br(&xi, &e)?;
            }
            e
        }
        _ => {
            let (nodes, p, q) = current_relation_shape(n, x);
            let eg = m.e_image(p, q, x.w)?;
            let (damb, _) = ev_hat(n, m.domain_size, 0);
            let mut lhs = SumExpr::zero();
            let mut rhs_dom = SumExpr::zero();
            for &k in &nodes {
                lhs.add_assign(&br(&img(Token::h(k, 1))?, &eg)?);
                let (_, evh) = ev_hat(n, m.domain_size, k);
                rhs_dom.add_assign(&evh.sum_commutator(&damb, Gen::e(1, p, q, x.w))?);
            }
            lhs.sub(&m.apply(&rhs_dom)?)
        }
    };
    Ok(out)
}

/// Result of checking one relation instance.
#[derive(Clone, Debug)]
pub struct RelationCheck {
    pub instance: RelInstance,
    pub verdict: Verdict,
}

/// Check every instance of the listed relations symbolically.
pub fn check_relations(m: &ImageMap, rels: &[RelInstance], cartan: CartanReading) -> Result<Vec<RelationCheck>> {
    use rayon::prelude::*;
    let bm = m.bound()?;
    rels.par_iter()
        .map(|x| {
            let r = relation_residual(&bm, x, cartan)?;
            Ok(RelationCheck { instance: *x, verdict: modesum::is_zero(&bm.amb, &r)? })
        })
        .collect()
}

/// `hbar = eps1 + eps2`, `eps = -n eps2`.
pub fn convert_parameters(eps1: &ParamScalar, eps2: &ParamScalar, n: usize) -> (ParamScalar, ParamScalar) {
    (eps1.add(eps2), eps2.mul_int(-(n as i64)))
}

/// Coefficient `i/2 (eps1 - eps2)` of `h_{i,0}` in the image of `H_{i,1}` under the change
/// of presentation; zero for `i = 0`.
pub fn level1_adjustment(i: usize, eps1: &ParamScalar, eps2: &ParamScalar) -> ParamScalar {
    if i == 0 {
        ParamScalar::zero()
    } else {
        eps1.sub(eps2).mul(&ParamScalar::ratio(i as i64, 2))
    }
}

/// Change of presentation on level-1 Cartan images: `H_{i,1} -> H_{i,1} + k h_{i,0}`.
/// `inverse` undoes it.
pub fn convert_h1(m: &ImageMap, eps1: &ParamScalar, eps2: &ParamScalar, inverse: bool) -> Result<ImageMap> {
    let mut out = m.clone();
    for i in 0..m.n {
        let mut k = level1_adjustment(i, eps1, eps2);
        if inverse {
            k = k.neg();
        }
        let h0 = m.image(Token::h(i, 0))?.clone();
        let e = out.images.get_mut(&Token::h(i, 1)).ok_or_else(|| YangianError::Unmapped(format!("H[{i},1]")))?;
        e.add_scaled(&h0, &k);
    }
    Ok(out)
}

/// Displayed closed forms of `[ev^(H_{i,1}), e_{v,j} t^w]` (`lower = true`) and
/// `[ev^(H_{i,1}), e_{j,v} t^w]`, in slot 1 of `gl(a)^{c0}`, for `n < v <= a`.
pub fn bracket_display(n: usize, a: usize, i: usize, j: usize, v: usize, w: i64, lower: bool) -> Result<SumExpr> {
    check_rank(n)?;
    if i >= n || j == 0 || j > n || v <= n || v > a {
        return Err(YangianError::Range(format!("i={i} j={j} v={v} n={n} a={a}")));
    }
    let (amb, _) = ev_hat(n, a, 0);
    let h = hb();
    let c = ParamScalar::sym(domain_c());
    let d = |x: bool| if x { 1i64 } else { 0 };
    let g = |p, q, m| Gen::e(1, p, q, m);
    let p = |x, y, m| pe(1, x, y, m);
    // w - s, w - s - 1, s + w, s + w + 1
    let (w0, w1, sw0, sw1) = (ms(w), ms(w - 1), ps(w), ps(w + 1));
    let mut b = Build::new(&amb);
    let k = |x: i64| h.mul_int(x);
    if i != 0 {
        let hi = ParamScalar::ratio(i as i64, 2).mul(&h);
        let (dij, di1j, le, gt) = (d(i == j), d(i + 1 == j), d(j <= i), d(j > i));
        let lo = 1..=i;
        let hi_r = i + 1..=n;
        if lower {
            let e = g(v, j, w);
            b.word(hi.mul_int(dij - di1j), &[e]);
            b.word(k(dij), &[e, g(i + 1, i + 1, 0)]);
            b.word(k(di1j), &[g(i, i, 0), e]);
            for (r, sg) in [(i, -1i64), (i + 1, 1)] {
                let dr = if r == i { dij } else { di1j };
                b.sum(k(sg * le), Range::NonNeg, &[p(r, j, ms(0)), p(v, r, sw0)]);
                b.sum(k(sg * gt), Range::NonNeg, &[p(r, j, ms(-1)), p(v, r, sw1)]);
                for u in lo.clone() {
                    b.sum(k(sg * dr), Range::NonNeg, &[p(v, u, w0), p(u, r, ps(0))]);
                }
                for u in hi_r.clone() {
                    b.sum(k(sg * dr), Range::NonNeg, &[p(v, u, w1), p(u, r, ps(1))]);
                }
            }
        } else {
            let e = g(j, v, w);
            b.word(hi.mul_int(di1j - dij), &[e]);
            b.word(k(-dij), &[e, g(i + 1, i + 1, 0)]);
            b.word(k(-di1j), &[g(i, i, 0), e]);
            for (r, sg) in [(i, 1i64), (i + 1, -1)] {
                let dr = if r == i { dij } else { di1j };
                for u in lo.clone() {
                    b.sum(k(sg * dr), Range::NonNeg, &[p(r, u, ms(0)), p(u, v, sw0)]);
                }
                b.sum(k(sg * le), Range::NonNeg, &[p(r, v, w0), p(j, r, ps(0))]);
                for u in hi_r.clone() {
                    b.sum(k(sg * dr), Range::NonNeg, &[p(r, u, ms(-1)), p(u, v, sw1)]);
                }
                b.sum(k(sg * gt), Range::NonNeg, &[p(r, v, w1), p(j, r, ps(1))]);
            }
        }
    } else {
        let hc = h.mul(&c);
        let (dn, d1) = (d(j == n), d(j == 1));
        if lower {
            let e = g(v, j, w);
            b.word(hc.mul_int(d1 - 2 * dn), &[e]);
            b.word(k(d1), &[g(n, n, 0), e]);
            b.word(k(dn), &[e, g(1, 1, 0)]);
            b.sum(k(-1), Range::NonNeg, &[p(n, j, ms(0)), p(v, n, sw0)]);
            b.sum(k(1), Range::NonNeg, &[p(1, j, ms(-1)), p(v, 1, sw1)]);
            for u in 1..=n {
                b.sum(k(-dn), Range::NonNeg, &[p(v, u, w0), p(u, n, ps(0))]);
                b.sum(k(d1), Range::NonNeg, &[p(v, u, w1), p(u, 1, ps(1))]);
            }
        } else {
            let e = g(j, v, w);
            b.word(hc.mul_int(2 * dn - d1), &[e]);
            b.word(k(-d1), &[g(n, n, 0), e]);
            b.word(k(-dn), &[e, g(1, 1, 0)]);
            b.sum(k(1), Range::NonNeg, &[p(n, v, w0), p(j, n, ps(0))]);
            b.sum(k(-1), Range::NonNeg, &[p(1, v, w1), p(j, 1, ps(1))]);
            for u in 1..=n {
                b.sum(k(dn), Range::NonNeg, &[p(n, u, ms(0)), p(u, v, sw0)]);
                b.sum(k(-d1), Range::NonNeg, &[p(1, u, ms(-1)), p(u, v, sw1)]);
            }
        }
    }
    Ok(b.done())
}

/// `sum_commutator(ev^(H_{i,1}), e)` for the generator of [`bracket_display`].
pub fn bracket_computed(n: usize, a: usize, i: usize, j: usize, v: usize, w: i64, lower: bool) -> Result<SumExpr> {
    let (amb, e) = ev_hat(n, a, i);
    let g = if lower { Gen::e(1, v, j, w) } else { Gen::e(1, j, v, w) };
    Ok(e.sum_commutator(&amb, g)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero(m: &ImageMap, e: &SumExpr) -> bool {
        m.is_zero(e).unwrap().equal
    }

    #[test]
    fn level0_images() {
        let m = ev_images(3).unwrap();
        let h1 = m.image(Token::h(1, 0)).unwrap();
        assert_eq!(*h1, SumExpr::gen(Gen::e(1, 1, 1, 0)).sub(&SumExpr::gen(Gen::e(1, 2, 2, 0))));
        assert_eq!(*m.image(Token::xp(0, 0)).unwrap(), SumExpr::gen(Gen::e(1, 3, 1, 1)));
        assert!(ev_images(2).is_err());
    }

    #[test]
    fn token_parse_roundtrip() {
        for t in tokens(4) {
            assert_eq!(t.to_string().parse::<Token>().unwrap(), t);
        }
        assert_eq!(tokens(3).len(), 18);
    }

    #[test]
    fn cheap_relations_under_ev() {
        let m = ev_images(3).unwrap();
        let mut rels = instances(3, 2);
        rels.extend(instances(3, 4));
        rels.extend(instances(3, 10));
        for c in check_relations(&m, &rels, CartanReading::Cyclic).unwrap() {
            assert!(c.verdict.equal, "{} {:?}", c.instance, c.verdict.first_mismatch);
        }
    }

    #[test]
    fn level1_relations_under_ev() {
        let m = ev_images(3).unwrap();
        let mut rels = Vec::new();
        for r in [3, 5, 6, 7, 8, 9] {
            rels.extend(instances(3, r));
        }
        for c in check_relations(&m, &rels, CartanReading::Cyclic).unwrap() {
            assert!(c.verdict.equal, "{} {:?}", c.instance, c.verdict.first_mismatch);
        }
    }

    #[test]
    fn perturbed_eps_breaks_r6() {
        let mut m = ev_images(3).unwrap();
        m.eps = m.eps.add(&ParamScalar::hbar());
        let x = instances(3, 6)[0];
        let r = relation_residual(&m.bound().unwrap(), &x, CartanReading::Cyclic).unwrap();
        assert!(!zero(&m.bound().unwrap(), &r));
    }

    #[test]
    fn ext_ev_with_zero_shift_restricts_to_ev() {
        let e = ev_images(3).unwrap();
        let x = ext_ev_images(3, 3, &ParamScalar::zero()).unwrap();
        for t in tokens(3) {
            assert_eq!(e.image(t).unwrap(), x.image(t).unwrap());
        }
        assert!(ext_ev_images(3, 2, &ParamScalar::zero()).is_err());
    }

    #[test]
    fn coproduct_level0_is_primitive() {
        let (amb, ys) = coproduct_images(3, 4, 3).unwrap();
        let y = &ys[&Token::h(1, 0)];
        assert!(y.abstract_terms.is_empty());
        let expect = level0(3, Kind::H, 1, 1, &ParamScalar::zero()).add(&level0(3, Kind::H, 1, 2, &ParamScalar::zero()));
        assert!(modesum::canonical_eq(&amb, &y.cur, &expect).unwrap());
    }

    #[test]
    fn rectangular_coproduct_has_no_b_or_f() {
        let amb = Ambient::plain(&[3, 3]);
        for t in tokens(3).into_iter().filter(|t| t.level == 1) {
            let c = corrections(&amb, 3, 3, 3, t, 1, 2, &ParamScalar::sym(Sym::c(1)), &ParamScalar::sym(Sym::c(2)));
            assert!(c.f_part.is_syntactically_zero(), "{t}");
            if t != Token::h(0, 1) && t != Token::xm(0, 1) {
                assert!(c.b_part.is_syntactically_zero(), "{t}");
            }
        }
    }

    #[test]
    fn displayed_brackets_match() {
        let (amb, _) = ev_hat(3, 5, 0);
        for i in 0..3 {
            for j in 1..=3 {
                for w in -1..=1 {
                    for lower in [true, false] {
                        let d = bracket_display(3, 5, i, j, 4, w, lower).unwrap();
                        let c = bracket_computed(3, 5, i, j, 4, w, lower).unwrap();
                        assert!(modesum::canonical_eq(&amb, &d, &c).unwrap(), "i={i} j={j} w={w} lower={lower}");
                    }
                }
            }
        }
    }

    #[test]
    fn parameter_change() {
        let (h, e) = convert_parameters(&ParamScalar::hbar(), &ParamScalar::zero(), 3);
        assert_eq!(h, ParamScalar::hbar());
        assert!(e.is_zero());
        assert!(level1_adjustment(0, &ParamScalar::hbar(), &ParamScalar::eps()).is_zero());
        let m = ev_images(3).unwrap();
        let (e1, e2) = (ParamScalar::sym(Sym::named("e1")), ParamScalar::sym(Sym::named("e2")));
        let there = convert_h1(&m, &e1, &e2, false).unwrap();
        assert_ne!(there.image(Token::h(2, 1)).unwrap(), m.image(Token::h(2, 1)).unwrap());
        let back = convert_h1(&there, &e1, &e2, true).unwrap();
        assert!(modesum::canonical_eq(&m.amb, back.image(Token::h(2, 1)).unwrap(), m.image(Token::h(2, 1)).unwrap()).unwrap());
    }
}
