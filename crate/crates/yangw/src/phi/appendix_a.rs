//! `Delta^{a,b}` against the gluing relations `[H_{i,1}, e_{u,j} t^x]`, `n < u <= b`.
//!
//! Slot 1 is the `Y^a` leg, slot 2 the `Y^b` leg. The bracket displays are encoded in their
//! general form (row `r`, summation block `K`), so the numbered terms line up with the
//! regroupings that combine them.

use std::collections::BTreeMap;

use super::{ctx, delta_minus_box, ind, judge_in, sum_s, sum_w, Display, IdentityReport, Method, Result};
use crate::current::{Ambient, Gen};
use crate::modesum::{Affine, Pat, SumExpr};
use crate::scalar::{ParamScalar, Sym};
use crate::yangian::{self, Token, COPRODUCT_DEVIATIONS};

fn hb() -> ParamScalar {
    ParamScalar::hbar()
}

fn e1(i: usize, j: usize, m: Affine) -> Pat {
    Pat::e(1, i, j, m)
}

fn e2(i: usize, j: usize, m: Affine) -> Pat {
    Pat::e(2, i, j, m)
}

fn s(c: i64) -> Affine {
    Affine::var(0, 1, c)
}

fn ms(c: i64) -> Affine {
    Affine::var(0, -1, c)
}

/// Rows of `F_i`, `A_i` for a nonzero node: `(i, i+1)`; node `0` uses `(n, 1)`.
fn rows(n: usize, i: usize) -> (usize, usize) {
    if i == 0 {
        (n, 1)
    } else {
        (i, i + 1)
    }
}

/// The two nodes whose `H_{.,1}` act on column `j` through `h`, or just `i` when `j` is not a row of `i`.
fn nodes_for(n: usize, i: usize, j: usize) -> Vec<usize> {
    let (r1, r2) = rows(n, i);
    if j != r1 && j != r2 {
        return vec![i];
    }
    let mut v: Vec<usize> = (0..n).filter(|&k| {
        let (a, b) = rows(n, k);
        a == j || b == j
    }).collect();
    v.sort();
    v
}

struct Ctx {
    n: usize,
    a: usize,
    b: usize,
    amb: Ambient,
    damb: Ambient,
}

impl Ctx {
    fn new(n: usize, a: usize, b: usize) -> Ctx {
        let (damb, _) = yangian::ev_hat(n, b, 0);
        Ctx { n, a, b, amb: Ambient::plain(&[a, b]), damb }
    }

    fn boxed(&self, p: usize, q: usize, x: i64) -> SumExpr {
        SumExpr::gen(Gen::e(1, p, q, x)).add(&SumExpr::gen(Gen::e(2, p, q, x)))
    }

    fn w(&self, g: &[Gen]) -> SumExpr {
        self.amb.normal_order(g).into()
    }

    /// `[ hbar sum_w sum_v e_{v,p} t^w (x) e_{p,v} t^-w, box(e_{u,q} t^x) ]`.
    fn align100(&self, p: usize, q: usize, u: usize, x: i64) -> Display {
        let h = hb();
        let dpq = ind(p == q);
        let mut t2 = SumExpr::zero();
        for v in self.n + 1..=self.b {
            t2.add_assign(&sum_w(h.mul_int(-dpq), &[e1(v, p, s(0)), e2(u, v, ms(x))]));
        }
        let c2 = ParamScalar::sym(Sym::c(2));
        Display(vec![
            sum_w(h.clone(), &[e1(u, p, s(0)), e2(p, q, ms(x))]),
            t2,
            self.w(&[Gen::e(1, u, p, x)]).scale(&c2.mul(&h).mul_int(-dpq * x)),
        ])
    }

    /// `[ -hbar (e_{pp} (x) e_{p+1,p+1} + e_{p+1,p+1} (x) e_{pp}), box(e_{u,q} t^x) ]`.
    fn align100_5(&self, p: usize, q: usize, u: usize, x: i64) -> Display {
        let h = hb();
        let (a1, a2) = (ind(q == p + 1), ind(q == p));
        Display(vec![
            self.w(&[Gen::e(1, p, p, 0), Gen::e(2, u, q, x)]).scale(&h.mul_int(a1)),
            self.w(&[Gen::e(1, u, q, x), Gen::e(2, p + 1, p + 1, 0)]).scale(&h.mul_int(a2)),
            self.w(&[Gen::e(1, p + 1, p + 1, 0), Gen::e(2, u, q, x)]).scale(&h.mul_int(a2)),
            self.w(&[Gen::e(1, u, q, x), Gen::e(2, p, p, 0)]).scale(&h.mul_int(a1)),
        ])
    }

    /// `[ sgn hbar sum_s sum_{k in K} (-e_{kr} t^{-s-1} (x) e_{rk} t^{s+1} + e_{rk} t^{-s} (x) e_{kr} t^s), box(e_{uq} t^x) ]`
    /// when `lower`, and the block with the shifted modes swapped otherwise.
    #[allow(clippy::too_many_arguments)]
    fn a_block(&self, r: usize, ks: std::ops::RangeInclusive<usize>, lower: bool, sgn: i64, q: usize, u: usize, x: i64) -> Display {
        let h = hb().mul_int(sgn);
        let inq = ind(ks.contains(&q));
        let drq = ind(r == q);
        let (d1, d0) = if lower { (1, 0) } else { (0, 1) };
        let mut t2 = SumExpr::zero();
        let mut t3 = SumExpr::zero();
        for k in ks.clone() {
            t2.add_assign(&sum_s(h.mul_int(drq), &[e1(k, r, ms(-d1)), e2(u, k, s(x + d1))]));
            t3.add_assign(&sum_s(h.mul_int(-drq), &[e1(u, k, ms(x - d0)), e2(k, r, s(d0))]));
        }
        Display(vec![
            sum_s(h.mul_int(inq), &[e1(u, r, ms(x - d1)), e2(r, q, s(d1))]),
            t2,
            t3,
            sum_s(h.mul_int(-inq), &[e1(r, q, ms(-d0)), e2(u, r, s(x + d0))]),
        ])
    }

    fn align101(&self, p: usize, q: usize, u: usize, x: i64) -> Display {
        self.a_block(p, 1..=p, true, 1, q, u, x)
    }

    fn align102(&self, p: usize, q: usize, u: usize, x: i64) -> Display {
        self.a_block(p, p + 1..=self.n, false, 1, q, u, x)
    }

    fn align104(&self, p: usize, q: usize, u: usize, x: i64) -> Display {
        self.a_block(p + 1, 1..=p, true, -1, q, u, x)
    }

    fn align105(&self, p: usize, q: usize, u: usize, x: i64) -> Display {
        self.a_block(p + 1, p + 1..=self.n, false, -1, q, u, x)
    }

    /// `[ hbar sum_s sum_{v=b+1}^a (e_{vp} t^{-s-1} e_{pv} t^{s+1} + e_{pv} t^{-s} e_{vp} t^s), e_{uq} t^x ]` in the first leg.
    fn align103(&self, p: usize, q: usize, u: usize, x: i64) -> Display {
        let k = hb().mul_int(-ind(p == q));
        let mut t1 = SumExpr::zero();
        let mut t2 = SumExpr::zero();
        for v in self.b + 1..=self.a {
            t1.add_assign(&sum_s(k.clone(), &[e1(v, p, ms(-1)), e1(u, v, s(x + 1))]));
            t2.add_assign(&sum_s(k.clone(), &[e1(u, v, ms(x)), e1(v, p, s(0))]));
        }
        Display(vec![t1, t2])
    }

    /// Domain element `sum_s e_{pq} t^{-s-d} e_{ur} t^{s+x+d}` of `Y^b`.
    fn dom_pair(&self, p: usize, q: usize, u: usize, r: usize, x: i64, d: i64) -> SumExpr {
        sum_s(ParamScalar::one(), &[Pat::e(1, p, q, ms(-d)), Pat::e(1, u, r, s(x + d))])
    }

    fn dmb(&self, q: &SumExpr) -> Result<SumExpr> {
        delta_minus_box(&self.amb, self.b, q)
    }

    /// Right-hand side of the `902` regrouping: `-(Delta - box)(hbar sum_s e_{pq} ... e_{up} ...)`.
    fn rhs902(&self, p: usize, q: usize, u: usize, x: i64, row: usize) -> Result<SumExpr> {
        let d = ind(q > p);
        let dom = self.dom_pair(row, q, u, row, x, d).scale(&hb());
        self.dmb(&dom)
    }

    fn lhs902(&self, p: usize, q: usize, u: usize, x: i64) -> SumExpr {
        let (f, l, uu) = (self.align100(p, q, u, x), self.align101(p, q, u, x), self.align102(p, q, u, x));
        f.term(1).neg().add(l.term(1)).add(uu.term(1)).add(l.term(4)).add(uu.term(4))
    }

    fn lhs903(&self, p: usize, q: usize, u: usize, x: i64) -> SumExpr {
        let (f, l, uu) = (self.align100(p + 1, q, u, x), self.align104(p, q, u, x), self.align105(p, q, u, x));
        f.term(1).add(l.term(1)).add(uu.term(1)).add(l.term(4)).add(uu.term(4))
    }

    fn corrections(&self, i: usize) -> SumExpr {
        let (ca, cb) = (ParamScalar::sym(Sym::c(1)), ParamScalar::sym(Sym::c(2)));
        yangian::corrections(&self.amb, self.n, self.a, self.b, Token::h(i, 1), 1, 2, &ca, &cb).total()
    }
}

/// `[B (x) 1 + A - F, box(e_{p,q} t^x)] - (Delta - box)([ev^(H), e_{p,q} t^x])` summed over `nodes`.
pub fn appendix_a_residual(n: usize, a: usize, b: usize, nodes: &[usize], p: usize, q: usize, x: i64) -> Result<SumExpr> {
    let c = Ctx::new(n, a, b);
    let e = c.boxed(p, q, x);
    let mut lhs = SumExpr::zero();
    let mut dom = SumExpr::zero();
    for &k in nodes {
        lhs.add_assign(&ctx(c.corrections(k).commutator(&c.amb, &e), || format!("[corr(H_{k},1), box e]"))?);
        let (_, evh) = yangian::ev_hat(n, b, k);
        dom.add_assign(&ctx(evh.sum_commutator(&c.damb, Gen::e(1, p, q, x)), || "ev^ bracket".into())?);
    }
    Ok(lhs.sub(&c.dmb(&dom)?))
}

fn bindings(n: usize, a: usize, b: usize) -> BTreeMap<Sym, ParamScalar> {
    let c2 = yangian::ev_central(n, &ParamScalar::eps());
    BTreeMap::from([(Sym::c(1), c2.sub(&ParamScalar::int((a - b) as i64))), (Sym::c(2), c2)])
}

fn deviations() -> Vec<String> {
    let mut d: Vec<String> = COPRODUCT_DEVIATIONS.iter().map(|s| s.to_string()).collect();
    d.push("leg-central-quotient".into());
    d
}

/// Compatibility of `Delta^{a,b}` with `[H_{i,1}, e_{u,j} t^x]` and `[H_{i,1}, e_{j,u} t^x]` for every
/// `n < u <= b`. When `j` is a row of node `i`, the relation pairs `H_{i,1}` with the other node
/// acting on `j`, as in the defining relations.
pub fn appendix_a_check(n: usize, a: usize, b: usize, i: usize, j: usize, x: i64, method: Method, d: usize) -> Result<IdentityReport> {
    let nodes = nodes_for(n, i, j);
    let bind = bindings(n, a, b);
    let amb = Ambient::plain(&[a, b]);
    let mut parts = Vec::new();
    for u in n + 1..=b {
        for (p, q, tag) in [(u, j, "lower"), (j, u, "upper")] {
            let r = appendix_a_residual(n, a, b, &nodes, p, q, x)?;
            let id = format!("appA[n={n},a={a},b={b}] nodes={nodes:?} {tag} e[{p},{q}]t^{x}");
            parts.push(judge_in(id, &amb, &bind, &r, method, d, &deviations())?);
        }
    }
    Ok(super::combine(format!("appA[n={n},a={a},b={b}]:i={i},j={j},x={x}"), parts))
}

/// The bracket displays and their regroupings, for every `n < u <= b`, nonzero node `p`, column `q`.
pub fn appendix_a_fixtures(n: usize, a: usize, b: usize, x: i64) -> Result<Vec<IdentityReport>> {
    let c = Ctx::new(n, a, b);
    let none = BTreeMap::new();
    let mut out = Vec::new();
    let h = hb();
    let mut check = |id: String, e: SumExpr, dev: &[&str]| -> Result<()> {
        let dev: Vec<String> = dev.iter().map(|s| s.to_string()).collect();
        out.push(judge_in(format!("{id}[n={n},a={a},b={b},x={x}]"), &c.amb, &none, &e, Method::Symbolic, 0, &dev)?);
        Ok(())
    };
    let (ca, cb) = (ParamScalar::sym(Sym::c(1)), ParamScalar::sym(Sym::c(2)));
    for u in n + 1..=b {
        for p in 1..n {
            for q in 1..=n {
                let e = c.boxed(u, q, x);
                let br = |y: &SumExpr| ctx(y.commutator(&c.amb, &e), || "bracket".into());
                let tag = format!("p={p},q={q},u={u}");
                // F rows
                for r in [p, p + 1] {
                    let mut f = SumExpr::zero();
                    for v in n + 1..=b {
                        f.add_assign(&sum_w(h.clone(), &[e1(v, r, s(0)), e2(r, v, ms(0))]));
                    }
                    check(format!("align100({tag},row={r})"), br(&f)?.sub(&c.align100(r, q, u, x).total()), &[])?;
                }
                let mut a05 = SumExpr::zero();
                a05.add_assign(&c.w(&[Gen::e(1, p, p, 0), Gen::e(2, p + 1, p + 1, 0)]).scale(&h.neg()));
                a05.add_assign(&c.w(&[Gen::e(1, p + 1, p + 1, 0), Gen::e(2, p, p, 0)]).scale(&h.neg()));
                check(format!("align100.5({tag})"), br(&a05)?.sub(&c.align100_5(p, q, u, x).total()), &[])?;
                let blocks: [(&str, usize, std::ops::RangeInclusive<usize>, bool, i64, Display); 4] = [
                    ("align101", p, 1..=p, true, 1, c.align101(p, q, u, x)),
                    ("align102", p, p + 1..=n, false, 1, c.align102(p, q, u, x)),
                    ("align104", p + 1, 1..=p, true, -1, c.align104(p, q, u, x)),
                    ("align105", p + 1, p + 1..=n, false, -1, c.align105(p, q, u, x)),
                ];
                for (name, r, ks, lower, sgn, disp) in blocks {
                    let k = h.mul_int(sgn);
                    let mut y = SumExpr::zero();
                    for kk in ks {
                        if lower {
                            y.add_assign(&sum_s(k.neg(), &[e1(kk, r, ms(-1)), e2(r, kk, s(1))]));
                            y.add_assign(&sum_s(k.clone(), &[e1(r, kk, ms(0)), e2(kk, r, s(0))]));
                        } else {
                            y.add_assign(&sum_s(k.neg(), &[e1(kk, r, ms(0)), e2(r, kk, s(0))]));
                            y.add_assign(&sum_s(k.clone(), &[e1(r, kk, ms(-1)), e2(kk, r, s(1))]));
                        }
                    }
                    let dev: &[&str] = if name == "align104" || name == "align105" { &["align104-105-row-index"] } else { &[] };
                    check(format!("{name}({tag})"), br(&y)?.sub(&disp.total()), dev)?;
                }
                for r in [p, p + 1] {
                    let mut y = SumExpr::zero();
                    for v in b + 1..=a {
                        y.add_assign(&sum_s(h.clone(), &[e1(v, r, ms(-1)), e1(r, v, s(1))]));
                        y.add_assign(&sum_s(h.clone(), &[e1(r, v, ms(0)), e1(v, r, s(0))]));
                    }
                    let e1only = SumExpr::gen(Gen::e(1, u, q, x));
                    let lhs = ctx(y.commutator(&c.amb, &e1only), || "bracket".into())?;
                    check(format!("align103({tag},row={r})"), lhs.sub(&c.align103(r, q, u, x).total()), &[])?;
                }
                // [B + A - F, box e] as the sum of the displays
                let mut decomp = c.align100(p, q, u, x).total().neg().add(&c.align100(p + 1, q, u, x).total());
                for disp in [c.align100_5(p, q, u, x), c.align101(p, q, u, x), c.align102(p, q, u, x), c.align104(p, q, u, x), c.align105(p, q, u, x)] {
                    decomp.add_assign(&disp.total());
                }
                decomp.add_assign(&c.align103(p, q, u, x).total().sub(&c.align103(p + 1, q, u, x).total()));
                let corr = yangian::corrections(&c.amb, n, a, b, Token::h(p, 1), 1, 2, &ca, &cb).total();
                check(format!("decomposition({tag})"), br(&corr)?.sub(&decomp), &[])?;
                // 902, 903
                let r902 = c.rhs902(p, q, u, x, p)?.neg();
                check(format!("align902({tag})"), c.lhs902(p, q, u, x).sub(&r902), &["align902-index"])?;
                let r903 = c.rhs902(p, q, u, x, p + 1)?;
                check(format!("align903({tag})"), c.lhs903(p, q, u, x).sub(&r903), &[])?;
            }
        }
        // the (i-1, i) + (i, i) combination
        for i in 2..n {
            let tag = format!("i={i},u={u}");
            let dom = |g: &[Gen]| -> SumExpr { c.damb.normal_order(g).into() };
            let (p0, p1) = (i - 1, i);
            let a05 = (c.align100_5(p0, i, u, x), c.align100_5(p1, i, u, x));
            let l906 = a05.0.term(1).add(a05.0.term(4)).add(a05.1.term(2)).add(a05.1.term(3));
            let r906 = c.dmb(&dom(&[Gen::e(1, p0, p0, 0), Gen::e(1, u, i, x)]).add(&dom(&[Gen::e(1, u, i, x), Gen::e(1, i + 1, i + 1, 0)])))?;
            check(format!("align906({tag})"), l906.sub(&r906.scale(&h)), &["align906-terms"])?;
            let (b104, b101, b105, b102) = (c.align104(p0, i, u, x), c.align101(p1, i, u, x), c.align105(p0, i, u, x), c.align102(p1, i, u, x));
            let l904 = b104.term(2).add(b101.term(2)).add(b105.term(2)).add(b102.term(2));
            let r904 = c.w(&[Gen::e(1, i, i, 0), Gen::e(2, u, i, x)]).scale(&h.neg());
            check(format!("align904({tag})"), l904.sub(&r904), &["align904-905-signs"])?;
            let l905 = b104.term(3).add(b101.term(3)).add(b105.term(3)).add(b102.term(3));
            let r905 = c.w(&[Gen::e(1, u, i, x), Gen::e(2, i, i, 0)]).scale(&h.neg());
            check(format!("align905({tag})"), l905.sub(&r905), &["align904-905-signs"])?;
            let r907 = c.dmb(&dom(&[Gen::e(1, u, i, x), Gen::e(1, i, i, 0)]))?.scale(&h.neg());
            check(format!("align907({tag})"), l904.add(&l905).sub(&r907), &["align904-905-signs"])?;
            let r908 = c.dmb(&dom(&[Gen::e(1, i, i, 0), Gen::e(1, u, i, x)]))?.scale(&h.neg());
            check(format!("align908({tag})"), c.lhs902(p1, i, u, x).add(&c.lhs903(p0, i, u, x)).sub(&r908), &[])?;
            let b103 = c.align103(p0, i, u, x).total().sub(&c.align103(p1 + 1, i, u, x).total());
            check(format!("align103-pair({tag})"), b103, &[])?;
            let fpair = c.align100(p0, i, u, x).total().sub(&c.align100(p1 + 1, i, u, x).total());
            let fterm1 = c.align100(p0, i, u, x).term(1).sub(c.align100(p1 + 1, i, u, x).term(1));
            check(format!("align100-pair({tag})"), fpair.sub(&fterm1), &[])?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_pairs() {
        assert_eq!(nodes_for(3, 1, 3), vec![1]);
        assert_eq!(nodes_for(3, 1, 1), vec![0, 1]);
        assert_eq!(nodes_for(3, 2, 2), vec![1, 2]);
        assert_eq!(nodes_for(3, 0, 3), vec![0, 2]);
    }

    #[test]
    fn vacuous_when_b_is_n() {
        let r = appendix_a_check(3, 4, 3, 1, 3, 0, Method::Symbolic, 0).unwrap();
        assert!(r.passed());
        assert!(appendix_a_fixtures(3, 4, 3, 0).unwrap().is_empty());
    }
}
