//! Acceptance harness: one line per criterion.
//!
//! A criterion whose statement is unattainable is reported as `FAIL (pinned)`; the run still succeeds
//! when the observed failure set is exactly the pinned one. All comparisons are exact.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use yangw::current::{Ambient, Gen, SlotKind};
use yangw::modesum::{self, Affine, Pat, Range, SumExpr};
use yangw::oracle::VacuumModule;
use yangw::phi::{self, Method, PhiReading};
use yangw::scalar::{ParamScalar, Sym};
use yangw::shape::{BlockShape, CartanReading};
use yangw::walg;
use yangw::yangian::{self, ImageMap, LegChargeRule, RelInstance};

/// Module truncation used wherever a criterion asks for the oracle.
const ORACLE_D1: usize = 3;
const ORACLE_D4: usize = 2;
const ORACLE_D8: usize = 3;
/// Number of random expressions in the oracle equivalence corpus.
const CORPUS: usize = 50;
const SEED: u64 = 0x5eed_0008;

struct Outcome {
    met: bool,
    /// Observed behaviour equals the expected one (`met`, or the pinned failure set).
    as_expected: bool,
    detail: String,
}

impl Outcome {
    fn plain(met: bool, detail: String) -> Outcome {
        Outcome { met, as_expected: met, detail }
    }
}

fn shape(q: &[usize]) -> BlockShape {
    BlockShape::new(q).unwrap()
}

fn rels(n: usize, range: std::ops::RangeInclusive<u8>) -> Vec<RelInstance> {
    range.flat_map(|r| yangian::instances(n, r)).collect()
}

fn failing_relations(m: &ImageMap, rs: &[RelInstance]) -> Vec<String> {
    yangian::check_relations(m, rs, CartanReading::Cyclic)
        .unwrap()
        .into_iter()
        .filter(|c| !c.verdict.equal)
        .map(|c| format!("{} {}", c.instance, c.verdict.first_mismatch.unwrap_or_default()))
        .collect()
}

fn criterion1() -> Outcome {
    let m = yangian::ev_images(3).unwrap();
    let sym_fail = failing_relations(&m, &rels(3, 1..=9));
    let bm = m.bound().unwrap();
    let all = rels(3, 1..=10);
    let serre = all.iter().filter(|x| x.rel.0 == 10).count();
    let mod_fail: Vec<String> = all
        .par_iter()
        .filter_map(|x| {
            let r = yangian::relation_residual(&bm, x, CartanReading::Cyclic).unwrap();
            let rep = phi::judge(x.to_string(), &bm, &r, Method::Module, ORACLE_D1).unwrap();
            (!rep.passed()).then(|| rep.to_string())
        })
        .collect();
    Outcome::plain(
        sym_fail.is_empty() && mod_fail.is_empty(),
        format!(
            "{} instances of R2.1-R2.10 ({serre} Serre) zero on the D={ORACLE_D1} module; symbolic failures {:?}; module failures {:?}",
            all.len(),
            sym_fail,
            mod_fail
        ),
    )
}

fn criterion2() -> Outcome {
    let (n, a) = (3, 5);
    let (amb, _) = yangian::ev_hat(n, a, 0);
    let mut cases = Vec::new();
    for i in 0..n {
        for j in 1..=n {
            for v in n + 1..=a {
                for w in -1..=1 {
                    for lower in [false, true] {
                        cases.push((i, j, v, w, lower));
                    }
                }
            }
        }
    }
    let bad: Vec<String> = cases
        .par_iter()
        .filter_map(|&(i, j, v, w, lower)| {
            let d = yangian::bracket_display(n, a, i, j, v, w, lower).unwrap();
            let c = yangian::bracket_computed(n, a, i, j, v, w, lower).unwrap();
            (!modesum::canonical_eq(&amb, &d, &c).unwrap()).then(|| format!("i={i},j={j},v={v},w={w},lower={lower}"))
        })
        .collect();
    Outcome::plain(bad.is_empty(), format!("{} displayed brackets match sum_commutator; mismatches {:?}", cases.len(), bad))
}

fn criterion3() -> Outcome {
    let n = 3;
    let xs = [-1i64, 0, 1];
    let mut failing = BTreeSet::new();
    let mut total = 0;
    for (a, b) in [(4, 3), (5, 4)] {
        let m = yangian::coproduct_ev(n, a, b, &ParamScalar::zero(), &ParamScalar::zero()).unwrap();
        let rs: Vec<RelInstance> = (11..=20).flat_map(|r| yangian::current_instances(n, r, b, &xs)).collect();
        total += rs.len();
        for c in yangian::check_relations(&m, &rs, CartanReading::Cyclic).unwrap() {
            if !c.verdict.equal {
                failing.insert(format!("({a},{b}) {}", c.instance));
            }
        }
        for x in xs {
            for r in phi::appendix_a_fixtures(n, a, b, x).unwrap() {
                total += 1;
                if !r.passed() {
                    failing.insert(r.id);
                }
            }
        }
        let pairs: Vec<(usize, usize, i64)> = (0..n).flat_map(|i| (1..=n).flat_map(move |j| xs.map(|x| (i, j, x)))).collect();
        let reps: Vec<_> = pairs.par_iter().map(|&(i, j, x)| phi::appendix_a_check(n, a, b, i, j, x, Method::Symbolic, 0).unwrap()).collect();
        total += reps.len();
        failing.extend(reps.into_iter().filter(|r| !r.passed()).map(|r| r.id));
    }
    let mut pinned = BTreeSet::new();
    for rel in [17, 19] {
        for w in xs {
            pinned.insert(format!("(5,4) R2.{rel}[i=0,j=3,v=4,w={w}]"));
        }
    }
    for i in [0, 2] {
        for x in xs {
            pinned.insert(format!("appA[n=3,a=5,b=4]:i={i},j=3,x={x}"));
        }
    }
    Outcome {
        met: failing.is_empty(),
        as_expected: failing == pinned,
        detail: format!(
            "{total} checks; nonzero exactly at {} pinned items (node 0 with column 3 at (5,4), residual hbar*c_1*e[4,3]t^x); \
             (4,3) is vacuous for Appendix A; unexpected {:?}",
            pinned.len(),
            failing.symmetric_difference(&pinned).collect::<Vec<_>>()
        ),
    }
}

fn criterion4() -> Outcome {
    let n = 3;
    let jobs: Vec<(usize, usize, usize, usize)> =
        [(4, 3), (4, 4)].into_iter().flat_map(|(a, b)| [(0, 1), (0, 2), (1, 2)].map(|(i, j)| (a, b, i, j))).collect();
    let reports: Vec<_> = jobs
        .par_iter()
        .flat_map(|&(a, b, i, j)| phi::appendix_b_check(n, a, b, i, j, Method::Both, ORACLE_D4).unwrap())
        .collect();
    let failing: BTreeSet<String> = reports.iter().filter(|r| !r.passed()).map(|r| r.id.clone()).collect();
    let pinned: BTreeSet<String> = [(0, 1), (0, 2), (1, 2)]
        .into_iter()
        .flat_map(|(i, j)| ["HA15", "Lem1"].map(|name| format!("{name}[n=3,a=4,b=3]:i={i},j={j}")))
        .collect();
    let sum_ok = reports.iter().filter(|r| r.id.starts_with("HA15+Lem1")).all(|r| r.passed());
    Outcome {
        met: failing.is_empty(),
        as_expected: failing == pinned && sum_ok,
        detail: format!(
            "{} reports (symbolic and D={ORACLE_D4} module); FF15, Lem2, DD15 zero everywhere; HA15 and Lem1 nonzero at (4,3) \
             with opposite residuals (HA15+Lem1 zero: {sum_ok}); unexpected {:?}",
            reports.len(),
            failing.symmetric_difference(&pinned).collect::<Vec<_>>()
        ),
    }
}

fn criterion5() -> Outcome {
    let mut entries = 0;
    let mut groups = 0;
    let mut bad = Vec::new();
    for q in [&[2, 1][..], &[3, 2], &[3, 2, 2], &[4, 3, 3]] {
        let rep = walg::check_closure(&shape(q)).unwrap();
        entries += rep.entries.len();
        groups += rep.entries.iter().filter(|e| !e.label.starts_with('W')).count();
        bad.extend(rep.failures().map(|e| format!("{:?}:{}[{},{}]", q, e.label, e.p, e.q)));
    }
    Outcome::plain(bad.is_empty(), format!("{entries} closure entries, {groups} of them grouped cancellations; failures {:?}", bad))
}

fn criterion6() -> Outcome {
    let mut summary = Vec::new();
    let mut ok = true;
    for q in [&[4, 3][..], &[4, 3, 3]] {
        let s = shape(q);
        let displayed = phi::displayed_tokens(s.q_last());
        let main = phi::verify_main(&s, Method::Symbolic, 0).unwrap();
        let gather = phi::gather_fixtures(&s, Method::Symbolic, 0).unwrap();
        let shown = main.iter().filter(|r| displayed.iter().any(|t| r.id.ends_with(&format!(":{t}")))).count();
        let bad: Vec<&str> = main.iter().chain(&gather).filter(|r| !r.passed()).map(|r| r.id.as_str()).collect();
        ok &= bad.is_empty() && shown == displayed.len();
        summary.push(format!(
            "{s}: {} tokens ({shown} displayed, {} exploratory promoted), {} gather groupings, failures {:?}",
            main.len(),
            main.len() - shown,
            gather.len(),
            bad
        ));
    }
    Outcome::plain(ok, summary.join("; "))
}

fn criterion7() -> Outcome {
    let s = shape(&[3, 3]);
    let ev = yangian::ev_l(&s, LegChargeRule::Alpha).unwrap();
    let cp = yangian::coproduct_ev(3, 3, 3, &s.shift_a(1).unwrap(), &s.shift_a(2).unwrap()).unwrap();
    let mut bad = Vec::new();
    let tokens = yangian::tokens(3);
    for &t in &tokens {
        let d = ev.image(t).unwrap().sub(cp.image(t).unwrap());
        if !phi::judge(format!("coproduct:{t}"), &ev, &d, Method::Symbolic, 0).unwrap().passed() {
            bad.push(format!("coproduct:{t}"));
        }
        if !phi::verify_generator_identity(&s, t, Method::Symbolic, 0).unwrap().passed() {
            bad.push(format!("phi:{t}"));
        }
    }
    Outcome::plain(bad.is_empty(), format!("{} tokens: composite = Delta^(3,3) construction = mu~ o Phi; failures {:?}", tokens.len(), bad))
}

fn random_gen(rng: &mut StdRng, n: usize, modes: std::ops::RangeInclusive<i64>) -> Gen {
    Gen::e(1, rng.gen_range(1..=n), rng.gen_range(1..=n), rng.gen_range(modes))
}

fn random_coeff(rng: &mut StdRng) -> ParamScalar {
    let k = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
    if rng.gen_bool(0.3) {
        ParamScalar::hbar().mul_int(k)
    } else {
        ParamScalar::int(k)
    }
}

/// A convergent normally ordered sum, a product of two generators and a single generator.
fn random_expr(rng: &mut StdRng, amb: &Ambient, n: usize) -> SumExpr {
    let (x, y) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
    let pats = [
        Pat::e(1, rng.gen_range(1..=n), rng.gen_range(1..=n), Affine::var(0, -1, -x)),
        Pat::e(1, rng.gen_range(1..=n), rng.gen_range(1..=n), Affine::var(0, 1, y)),
    ];
    let mut e = SumExpr::sum1(Range::NonNeg, &pats, random_coeff(rng));
    let p = SumExpr::gen(random_gen(rng, n, -1..=1)).mul(amb, &SumExpr::gen(random_gen(rng, n, -1..=1))).unwrap();
    e.add_scaled(&p, &random_coeff(rng));
    e.add_scaled(&SumExpr::gen(random_gen(rng, n, -1..=1)), &random_coeff(rng));
    e
}

/// An equal expression obtained by peeling `s = 0` off the sum and swapping one product by its bracket.
fn rewrite(rng: &mut StdRng, amb: &Ambient, n: usize) -> (SumExpr, SumExpr) {
    let (x, y) = (rng.gen_range(0..=1), rng.gen_range(0..=1));
    let (i, j, p, q) = (rng.gen_range(1..=n), rng.gen_range(1..=n), rng.gen_range(1..=n), rng.gen_range(1..=n));
    let k = random_coeff(rng);
    let lhs = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, i, j, Affine::var(0, -1, -x)), Pat::e(1, p, q, Affine::var(0, 1, y))], k.clone());
    let head = SumExpr::gen(Gen::e(1, i, j, -x)).mul(amb, &SumExpr::gen(Gen::e(1, p, q, y))).unwrap().scale(&k);
    let tail = SumExpr::sum1(Range::NonNeg, &[Pat::e(1, i, j, Affine::var(0, -1, -x - 1)), Pat::e(1, p, q, Affine::var(0, 1, y + 1))], k);
    let (g, h) = (random_gen(rng, n, -1..=1), random_gen(rng, n, -1..=1));
    let gh = SumExpr::gen(g).mul(amb, &SumExpr::gen(h)).unwrap();
    let hg = SumExpr::gen(h).mul(amb, &SumExpr::gen(g)).unwrap();
    let br: SumExpr = amb.bracket(g, h).into();
    (lhs.add(&gh), head.add(&tail).add(&hg).add(&br))
}

fn criterion8() -> Outcome {
    let n = 2;
    let amb = Ambient::new(vec![SlotKind::plain_with(n, ParamScalar::sym(Sym::c(1)))]);
    let module = VacuumModule::new(&amb, ORACLE_D8).unwrap();
    let mut rng = StdRng::seed_from_u64(SEED);
    let mut pairs = Vec::new();
    for k in 0..CORPUS {
        let (l, r) = rewrite(&mut rng, &amb, n);
        let r = match k % 3 {
            0 => r,
            1 => r.add(&random_expr(&mut rng, &amb, n)),
            _ => r.add(&SumExpr::gen(random_gen(&mut rng, n, -1..=-1)).scale(&random_coeff(&mut rng))),
        };
        pairs.push((l, r));
    }
    let verdicts: Vec<(bool, bool)> = pairs
        .par_iter()
        .map(|(l, r)| {
            let sym = modesum::equals(&amb, l, r).unwrap().equal;
            let orc = module.check_zero(&l.sub(r)).unwrap().is_none();
            (sym, orc)
        })
        .collect();
    let disagree = verdicts.iter().filter(|(s, o)| s != o).count();
    let equal = verdicts.iter().filter(|(s, _)| *s).count();
    Outcome::plain(
        disagree == 0 && equal > 0 && equal < CORPUS,
        format!("{CORPUS} random pairs (seed {SEED:#x}), {equal} equal and {} unequal, D={ORACLE_D8}; discrepancies {disagree}", CORPUS - equal),
    )
}

fn perturb_plain_z(amb: &Ambient) -> Ambient {
    let slots = amb
        .slots()
        .iter()
        .map(|s| match s {
            SlotKind::Plain { size, c, .. } => SlotKind::Plain { size: *size, c: c.clone(), z: ParamScalar::int(2) },
            other => other.clone(),
        })
        .collect();
    Ambient::new(slots)
}

fn with_alpha(amb: &Ambient, v: usize, delta: &ParamScalar) -> Ambient {
    let slots = amb
        .slots()
        .iter()
        .map(|s| match s {
            SlotKind::W { shape, alphas } => {
                let mut alphas = alphas.clone();
                alphas[v - 1] = alphas[v - 1].add(delta);
                SlotKind::W { shape: shape.clone(), alphas }
            }
            other => other.clone(),
        })
        .collect();
    Ambient::new(slots)
}

fn suite1_failures(m: &ImageMap) -> usize {
    failing_relations(m, &rels(3, 1..=10)).len()
}

fn suite5_failures(s: &BlockShape, amb: &Ambient) -> usize {
    walg::check_closure_in(s, amb).unwrap().failures().count()
}

fn suite6_failures(ev: &ImageMap, phi_map: &ImageMap) -> Vec<String> {
    yangian::tokens(ev.n)
        .into_iter()
        .filter_map(|t| {
            let d = ev.image(t).unwrap().sub(phi_map.image(t).unwrap());
            let r = phi::judge(format!("{t}"), ev, &d, Method::Symbolic, 0).unwrap();
            (!r.passed()).then(|| format!("{t}: {}", r.residual.unwrap_or_default()))
        })
        .collect()
}

fn criterion9() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut record = |what: String, hits: usize, first: Option<String>| {
        ok &= hits > 0;
        lines.push(format!("{what}: {hits}{}", first.map(|f| format!(" ({f})")).unwrap_or_default()));
    };

    // suite 1: evaluation map relations
    let ev = yangian::ev_images(3).unwrap();
    let mut m = ev.clone();
    m.amb = perturb_plain_z(&m.amb);
    record("suite1 trace constant z=2".into(), suite1_failures(&m), None);
    let mut m = ev.clone();
    for v in m.bindings.values_mut() {
        *v = v.add(&ParamScalar::one());
    }
    record("suite1 central binding c+1".into(), suite1_failures(&m), None);

    // alpha_v: W closure on (3,2,2) and the main identity on (4,3,3), one leg at a time
    let s5 = shape(&[3, 2, 2]);
    let s6 = shape(&[4, 3, 3]);
    let ev6 = yangian::ev_l(&s6, LegChargeRule::Alpha).unwrap();
    let phi6 = phi::phi_images(&s6).unwrap();
    let mut alpha1_closure = 0;
    for v in 1..=s5.l() {
        let closure = suite5_failures(&s5, &with_alpha(&Ambient::w(&s5), v, &ParamScalar::one()));
        let mut e = ev6.clone();
        let c = e.bindings.get_mut(&Sym::c(v as u32)).unwrap();
        *c = c.add(&ParamScalar::one());
        let main = suite6_failures(&e, &phi6);
        if v == 1 {
            alpha1_closure = closure;
        }
        record(format!("alpha_{v}+1 suite5/suite6 {closure}/{}", main.len()), closure + main.len(), main.first().cloned());
    }

    // suite 5: one structure constant of W^(2)
    let amb = Ambient::w(&s5);
    let (p, q) = walg::w2_indices(&s5)[0];
    let w = walg::build_w2(&amb, &s5, p, q).unwrap();
    let (mono, c) = w.terms().find(|(m, _)| m.len() == 2).map(|(m, c)| (m.clone(), c.clone())).unwrap();
    let mut bumped = w.clone();
    bumped.add_term(mono, c);
    let d = walg::d0(&amb, &bumped).unwrap();
    record(format!("suite5 doubled quadratic coefficient of W2[{p},{q}]"), d.len(), None);

    // suite 6: eps binding and two coefficients of Phi on (4,3)
    let s6 = shape(&[4, 3]);
    let ev6 = yangian::ev_l(&s6, LegChargeRule::Alpha).unwrap();
    let phi6 = phi::phi_images(&s6).unwrap();
    let mut e = ev6.clone();
    let v = e.bindings.get_mut(&Sym::EPS).unwrap();
    *v = v.add(&ParamScalar::hbar());
    let f = suite6_failures(&e, &phi6);
    record("suite6 eps binding +hbar".into(), f.len(), f.first().cloned());
    for (name, rd) in [
        ("X-[0,1] alpha sign", PhiReading { xm01_alpha_sign: -1, ..PhiReading::RESOLVED }),
        ("H[i,1] product sign", PhiReading { hi1_product_sign: 1, ..PhiReading::RESOLVED }),
    ] {
        let f = suite6_failures(&ev6, &phi::phi_images_with(&s6, rd).unwrap());
        record(format!("suite6 flipped {name}"), f.len(), f.first().cloned());
    }
    Outcome::plain(ok, format!("{}; W closure alone does not see alpha_1: {}", lines.join("; "), alpha1_closure == 0))
}

fn main() {
    let criteria: [(u8, fn() -> Outcome); 9] = [
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (9, criterion9),
    ];
    let mut unexpected = 0;
    for (k, f) in criteria {
        let t = Instant::now();
        let o = f();
        let status = match (o.met, o.as_expected) {
            (true, _) => "PASS",
            (false, true) => "FAIL (pinned)",
            (false, false) => "FAIL",
        };
        if !o.as_expected {
            unexpected += 1;
        }
        println!("criterion {k}: {status} [{:.1}s] {}", t.elapsed().as_secs_f64(), o.detail);
    }
    if unexpected > 0 {
        eprintln!("{unexpected} criteria deviate from their expected outcome");
        std::process::exit(1);
    }
}
