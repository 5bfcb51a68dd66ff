//! Exact coefficient field: reduced fractions of integer polynomials in the formal parameters.

mod parse;
pub mod poly;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub use poly::{Mono, Poly, Sym};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator vanishes after substitution: {0}")]
    VanishingDenominator(String),
    #[error("cyclic bindings involving {0}")]
    CyclicBinding(String),
    #[error("parse error: {0}")]
    Parse(String),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ArithKind {
    Add,
    Mul,
    Neg,
    Div,
}

/// Canonical fraction `num/den`: coprime, denominator with positive leading
/// coefficient, zero stored as `0/1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamScalar {
    num: Poly,
    den: Poly,
}

impl Default for ParamScalar {
    fn default() -> Self {
        ParamScalar::zero()
    }
}

impl ParamScalar {
    pub fn zero() -> Self {
        ParamScalar { num: Poly::zero(), den: Poly::one() }
    }

    pub fn one() -> Self {
        ParamScalar { num: Poly::one(), den: Poly::one() }
    }

    pub fn int(n: i64) -> Self {
        ParamScalar { num: Poly::from_i64(n), den: Poly::one() }
    }

    pub fn big(n: BigInt) -> Self {
        ParamScalar { num: Poly::constant(n), den: Poly::one() }
    }

    pub fn ratio(p: i64, q: i64) -> Self {
        ParamScalar::from_parts(Poly::from_i64(p), Poly::from_i64(q)).expect("nonzero denominator")
    }

    pub fn sym(s: Sym) -> Self {
        ParamScalar { num: Poly::var(s), den: Poly::one() }
    }

    pub fn hbar() -> Self {
        Self::sym(Sym::HBAR)
    }

    pub fn eps() -> Self {
        Self::sym(Sym::EPS)
    }

    pub fn k() -> Self {
        Self::sym(Sym::K)
    }

    pub fn poly(p: Poly) -> Self {
        ParamScalar { num: p, den: Poly::one() }
    }

    pub fn from_parts(num: Poly, den: Poly) -> Result<Self, ScalarError> {
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return ParamScalar::zero();
        }
        if den.is_one() {
            return ParamScalar { num, den };
        }
        if let Some(d) = den.as_constant() {
            let g = num.content().gcd(&d);
            let g = if d.is_negative() { -g } else { g };
            let num = if g.is_one() { num } else { num.div_int(&g) };
            let d = d / g;
            return ParamScalar { num, den: Poly::constant(d) };
        }
        let g = poly::gcd(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
        };
        if den.leading_sign() < 0 {
            num = num.neg();
            den = den.neg();
        }
        ParamScalar { num, den }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// Integer value when the scalar is a constant integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn neg(&self) -> Self {
        ParamScalar { num: self.num.neg(), den: self.den.clone() }
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        if self.den == o.den {
            if self.den.is_one() {
                let num = self.num.add(&o.num);
                return ParamScalar { num, den: Poly::one() };
            }
            return Self::reduce(self.num.add(&o.num), self.den.clone());
        }
        let num = self.num.mul(&o.den).add(&o.num.mul(&self.den));
        Self::reduce(num, self.den.mul(&o.den))
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return ParamScalar::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return ParamScalar { num: self.num.mul(&o.num), den: Poly::one() };
        }
        // cross-cancel before multiplying
        let g1 = poly::gcd(&self.num, &o.den);
        let g2 = poly::gcd(&o.num, &self.den);
        let a = self.num.div_exact(&g1).expect("gcd divides");
        let d = o.den.div_exact(&g1).expect("gcd divides");
        let c = o.num.div_exact(&g2).expect("gcd divides");
        let b = self.den.div_exact(&g2).expect("gcd divides");
        Self::reduce(a.mul(&c), b.mul(&d))
    }

    pub fn mul_int(&self, n: i64) -> Self {
        if n == 0 {
            return ParamScalar::zero();
        }
        if self.den.is_one() {
            return ParamScalar { num: self.num.scale(&BigInt::from(n)), den: Poly::one() };
        }
        self.mul(&ParamScalar::int(n))
    }

    pub fn inv(&self) -> Result<Self, ScalarError> {
        if self.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Self::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, o: &Self) -> Result<Self, ScalarError> {
        Ok(self.mul(&o.inv()?))
    }

    pub fn pow(&self, e: u32) -> Self {
        ParamScalar { num: self.num.pow(e), den: self.den.pow(e) }
    }

    pub fn arith(&self, o: &Self, kind: ArithKind) -> Result<Self, ScalarError> {
        match kind {
            ArithKind::Add => Ok(self.add(o)),
            ArithKind::Mul => Ok(self.mul(o)),
            ArithKind::Neg => Ok(self.neg()),
            ArithKind::Div => self.div(o),
        }
    }

    pub fn vars(&self) -> Vec<Sym> {
        let mut v = self.num.vars();
        v.extend(self.den.vars());
        v.sort();
        v.dedup();
        v
    }

    /// Simultaneous substitution of symbols.
    pub fn substitute(&self, bindings: &BTreeMap<Sym, ParamScalar>) -> Result<Self, ScalarError> {
        if bindings.is_empty() || self.vars().iter().all(|s| !bindings.contains_key(s)) {
            return Ok(self.clone());
        }
        let n = eval_poly(&self.num, bindings);
        let d = eval_poly(&self.den, bindings);
        if d.is_zero() {
            return Err(ScalarError::VanishingDenominator(self.to_string()));
        }
        n.div(&d)
    }

    /// Substitute until no bound symbol remains; rejects cyclic bindings.
    pub fn substitute_closure(&self, bindings: &BTreeMap<Sym, ParamScalar>) -> Result<Self, ScalarError> {
        let mut cur = self.clone();
        for _ in 0..=bindings.len() {
            if cur.vars().iter().all(|s| !bindings.contains_key(s)) {
                return Ok(cur);
            }
            cur = cur.substitute(bindings)?;
        }
        let culprit = cur.vars().into_iter().find(|s| bindings.contains_key(s)).map(|s| s.name()).unwrap_or_default();
        Err(ScalarError::CyclicBinding(culprit))
    }

    /// Evaluate at an integer point as an exact rational (num, den).
    pub fn eval_at(&self, point: &dyn Fn(Sym) -> BigInt) -> Option<(BigInt, BigInt)> {
        let n = self.num.eval(point);
        let d = self.den.eval(point);
        if d.is_zero() {
            None
        } else {
            Some((n, d))
        }
    }

    pub fn parse(s: &str) -> Result<Self, ScalarError> {
        parse::parse_scalar(s)
    }
}

fn eval_poly(p: &Poly, bindings: &BTreeMap<Sym, ParamScalar>) -> ParamScalar {
    let mut acc = ParamScalar::zero();
    for (m, c) in p.terms() {
        let mut t = ParamScalar::big(c.clone());
        let mut rest = Mono::one();
        for &(s, e) in m.0.iter() {
            match bindings.get(&s) {
                Some(v) => t = t.mul(&v.pow(e)),
                None => rest = rest.mul(&Mono::var(s, e)),
            }
        }
        if !rest.is_one() {
            t = t.mul(&ParamScalar::poly(Poly::monomial(rest, BigInt::one())));
        }
        acc = acc.add(&t);
    }
    acc
}

impl fmt::Display for ParamScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

impl From<i64> for ParamScalar {
    fn from(n: i64) -> Self {
        ParamScalar::int(n)
    }
}

impl Add for &ParamScalar {
    type Output = ParamScalar;
    fn add(self, o: &ParamScalar) -> ParamScalar {
        ParamScalar::add(self, o)
    }
}

impl Sub for &ParamScalar {
    type Output = ParamScalar;
    fn sub(self, o: &ParamScalar) -> ParamScalar {
        ParamScalar::sub(self, o)
    }
}

impl Mul for &ParamScalar {
    type Output = ParamScalar;
    fn mul(self, o: &ParamScalar) -> ParamScalar {
        ParamScalar::mul(self, o)
    }
}

impl Neg for &ParamScalar {
    type Output = ParamScalar;
    fn neg(self) -> ParamScalar {
        ParamScalar::neg(self)
    }
}

/// Build a binding map from pairs.
pub fn bindings<I: IntoIterator<Item = (Sym, ParamScalar)>>(it: I) -> BTreeMap<Sym, ParamScalar> {
    it.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> ParamScalar {
        ParamScalar::parse(s).unwrap()
    }

    #[test]
    fn add_and_zero() {
        assert_eq!(ParamScalar::hbar().add(&ParamScalar::eps()).to_string(), "eps + hbar");
        assert!(p("k+7").mul(&ParamScalar::zero()).is_zero());
    }

    #[test]
    fn central_charge_fraction() {
        let c = p("-3*hbar-eps").div(&ParamScalar::hbar()).unwrap();
        assert_eq!(c.to_string(), "(-eps - 3*hbar)/(hbar)");
        let b = bindings([(Sym::EPS, p("-(k+10)*hbar"))]);
        assert_eq!(c.substitute(&b).unwrap(), p("k+7"));
    }

    #[test]
    fn leg_parameter_substitution() {
        let e = p("eps - (4-3)*hbar");
        let b = bindings([(Sym::EPS, p("-(k+10)*hbar"))]);
        assert_eq!(e.substitute(&b).unwrap(), p("-(k+11)*hbar"));
        assert_eq!(ParamScalar::eps().substitute(&BTreeMap::new()).unwrap(), ParamScalar::eps());
    }

    #[test]
    fn division_by_zero_is_an_error() {
        assert_eq!(ParamScalar::one().div(&ParamScalar::zero()), Err(ScalarError::DivisionByZero));
        let x = p("hbar/(eps-hbar)");
        let b = bindings([(Sym::EPS, ParamScalar::hbar())]);
        assert!(matches!(x.substitute(&b), Err(ScalarError::VanishingDenominator(_))));
    }

    #[test]
    fn canonical_sign_and_reduction() {
        let a = p("(hbar^2 - eps^2)/(eps - hbar)");
        assert_eq!(a, p("-hbar - eps"));
        let b = p("(2*hbar)/(-4)");
        assert_eq!(b.to_string(), "(-hbar)/(2)");
        assert_eq!(p(&b.to_string()), b);
    }

    #[test]
    fn cyclic_bindings_rejected() {
        let b = bindings([(Sym::EPS, ParamScalar::k()), (Sym::K, ParamScalar::eps())]);
        assert!(matches!(ParamScalar::eps().substitute_closure(&b), Err(ScalarError::CyclicBinding(_))));
    }
}
