//! Exact arithmetic on intersection lattices of complex surfaces, bound
//! right-hand sides, and the Kodaira-fibration family as rational
//! functions of the Kähler-class parameter `ε`.
//!
//! Nothing here touches floating point except the final `f64` exports.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::CohomologyError;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"a"`, `"a/b"` or a finite decimal such as `"0.01"`.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, dec) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && dec.is_empty() {
        return None;
    }
    if !int.chars().chain(dec.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{dec}").parse().ok()?;
    let den = num_traits::pow(BigInt::from(10), dec.len());
    let v = Q::new(digits, den);
    Some(if neg { -v } else { v })
}

/// Decimal expansion with up to `digits` fractional digits, exact when the
/// expansion terminates.
pub fn decimal_string(v: &Q, digits: usize) -> String {
    let neg = v.is_negative();
    let a = v.abs();
    let (int, rem) = a.numer().div_rem(a.denom());
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(&int.to_string());
    let mut rem = rem;
    if !rem.is_zero() {
        out.push('.');
        let ten = BigInt::from(10);
        for _ in 0..digits {
            rem *= &ten;
            let (d, r) = rem.div_rem(a.denom());
            out.push_str(&d.to_string());
            rem = r;
            if rem.is_zero() {
                break;
            }
        }
    }
    out
}

/// Lossless serialized form of an exact rational.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalRepr {
    pub decimal: String,
    pub numerator: String,
    pub denominator: String,
}

impl From<&Q> for RationalRepr {
    fn from(v: &Q) -> Self {
        RationalRepr {
            decimal: decimal_string(v, 20),
            numerator: v.numer().to_string(),
            denominator: v.denom().to_string(),
        }
    }
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Commutative ring operations shared by every coefficient type here.
pub trait Ring: Clone + PartialEq + fmt::Debug + Zero + One + Sub<Output = Self> + Neg<Output = Self> {
    fn from_rational(v: Q) -> Self;

    fn from_int(n: i64) -> Self {
        Self::from_rational(q(n))
    }
}

impl Ring for Q {
    fn from_rational(v: Q) -> Self {
        v
    }
}

// ---------------------------------------------------------------------------
// Univariate polynomials in ε

/// Polynomial `Σ c_i ε^i` with no trailing zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Poly(Vec<Q>);

impl Poly {
    pub fn new(mut c: Vec<Q>) -> Self {
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        Poly(c)
    }

    pub fn constant(v: Q) -> Self {
        Poly::new(vec![v])
    }

    /// The variable `ε`.
    pub fn eps() -> Self {
        Poly::new(vec![q(0), q(1)])
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&v| q(v)).collect())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn leading(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }

    /// Lowest-order nonzero coefficient and its power.
    pub fn lowest(&self) -> Option<(usize, &Q)> {
        self.0.iter().enumerate().find(|(_, c)| !c.is_zero())
    }

    pub fn eval(&self, x: &Q) -> Q {
        let mut acc = Q::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + to_f64(c))
    }

    pub fn scale(&self, k: &Q) -> Poly {
        Poly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect())
    }

    pub fn monic(&self) -> Poly {
        if Zero::is_zero(self) {
            return self.clone();
        }
        self.scale(&(Q::one() / self.leading()))
    }

    pub fn div_rem(&self, d: &Poly) -> Result<(Poly, Poly), CohomologyError> {
        let dd = d.degree().ok_or(CohomologyError::DivisionByZero)?;
        let lead = d.leading();
        let mut r = self.0.clone();
        let n = self.0.len();
        if n <= dd {
            return Ok((Poly::new(vec![]), self.clone()));
        }
        let mut quo = vec![Q::zero(); n - dd];
        for k in (0..n - dd).rev() {
            let c = &r[k + dd] / &lead;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[k + j] -= &c * dc;
                }
            }
            quo[k] = c;
        }
        r.truncate(dd);
        Ok((Poly::new(quo), Poly::new(r)))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !Zero::is_zero(&b) {
            let r = a.div_rem(&b).expect("nonzero divisor").1;
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Same roots, each with multiplicity one.
    pub fn square_free(&self) -> Poly {
        let g = Poly::gcd(self, &self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.clone();
        }
        self.div_rem(&g).expect("nonzero gcd").0
    }
}

impl Zero for Poly {
    fn zero() -> Self {
        Poly(vec![])
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl One for Poly {
    fn one() -> Self {
        Poly::constant(q(1))
    }
}

impl Ring for Poly {
    fn from_rational(v: Q) -> Self {
        Poly::constant(v)
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(self, o: Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly::new(
            (0..n)
                .map(|i| self.0.get(i).cloned().unwrap_or_else(Q::zero) + o.0.get(i).cloned().unwrap_or_else(Q::zero))
                .collect(),
        )
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly(self.0.into_iter().map(|c| -c).collect())
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(self, o: Poly) -> Poly {
        self + (-o)
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, o: Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly(vec![]);
        }
        let mut c = vec![Q::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Poly::new(c)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    write!(f, "e")?;
                    if i > 1 {
                        write!(f, "^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn sign(v: &Q) -> i8 {
    if v.is_zero() {
        0
    } else if v.is_positive() {
        1
    } else {
        -1
    }
}

/// Sturm sequence of a square-free polynomial.
fn sturm_sequence(p: &Poly) -> Vec<Poly> {
    let mut seq = vec![p.clone(), p.derivative()];
    while !Zero::is_zero(seq.last().expect("non-empty")) {
        let n = seq.len();
        let r = seq[n - 2].div_rem(&seq[n - 1]).expect("nonzero").1;
        if Zero::is_zero(&r) {
            break;
        }
        seq.push(-r);
    }
    seq.retain(|p| !Zero::is_zero(p));
    seq
}

fn sign_changes(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0;
    let mut n = 0;
    for s in signs.filter(|s| *s != 0) {
        if last != 0 && s != last {
            n += 1;
        }
        last = s;
    }
    n
}

/// Number of distinct real roots of `p` in `(a, b]`; `b = None` means `+∞`.
pub fn count_roots(p: &Poly, a: &Q, b: Option<&Q>) -> usize {
    if Zero::is_zero(p) || p.degree() == Some(0) {
        return 0;
    }
    let seq = sturm_sequence(&p.square_free());
    let va = sign_changes(seq.iter().map(|s| sign(&s.eval(a))));
    let vb = match b {
        Some(b) => sign_changes(seq.iter().map(|s| sign(&s.eval(b)))),
        None => sign_changes(seq.iter().map(|s| sign(&s.leading()))),
    };
    va.saturating_sub(vb)
}

/// Cauchy bound: every real root has absolute value below this.
fn root_bound(p: &Poly) -> Q {
    let lead = p.leading().abs();
    let m = p.0.iter().take(p.0.len() - 1).map(|c| c.abs() / &lead).max().unwrap_or_else(Q::zero);
    m + q(1)
}

// ---------------------------------------------------------------------------
// Rational functions of ε

/// Reduced `num/den` with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RatFn {
    num: Poly,
    den: Poly,
}

impl RatFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self, CohomologyError> {
        if Zero::is_zero(&den) {
            return Err(CohomologyError::DivisionByZero);
        }
        if Zero::is_zero(&num) {
            return Ok(RatFn { num, den: Poly::one() });
        }
        let g = Poly::gcd(&num, &den);
        let num = num.div_rem(&g)?.0;
        let den = den.div_rem(&g)?.0;
        let lead = den.leading();
        let inv = Q::one() / lead;
        Ok(RatFn { num: num.scale(&inv), den: den.scale(&inv) })
    }

    pub fn poly(p: Poly) -> Self {
        RatFn { num: p, den: Poly::one() }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &Poly {
        &self.den
    }

    pub fn eval(&self, x: &Q) -> Result<Q, CohomologyError> {
        let d = self.den.eval(x);
        if d.is_zero() {
            return Err(CohomologyError::DivisionByZero);
        }
        Ok(self.num.eval(x) / d)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.num.eval_f64(x) / self.den.eval_f64(x)
    }

    pub fn div(&self, o: &RatFn) -> Result<RatFn, CohomologyError> {
        if Zero::is_zero(o) {
            return Err(CohomologyError::DivisionByZero);
        }
        RatFn::new(self.num.clone() * o.den.clone(), self.den.clone() * o.num.clone())
    }

    /// Sign of the function as `ε → 0⁺`.
    pub fn sign_near_zero(&self) -> i8 {
        match (self.num.lowest(), self.den.lowest()) {
            (Some((_, a)), Some((_, b))) => sign(a) * sign(b),
            _ => 0,
        }
    }

    /// Sign analysis on `ε > 0`: the sign just right of zero and the
    /// smallest positive zero or pole, isolated to an exact bracket.
    pub fn sign_analysis(&self) -> SignAnalysis {
        let s0 = self.sign_near_zero();
        let mut crit = (self.num.clone() * self.den.clone()).square_free();
        // strip the factor ε so that 0 itself is not counted
        while crit.0.first().is_some_and(|c| c.is_zero()) {
            crit = Poly::new(crit.0[1..].to_vec());
        }
        let zero = Q::zero();
        let positive = count_roots(&crit, &zero, None);
        if positive == 0 {
            return SignAnalysis { sign_near_zero: s0, threshold: Threshold::Infinite, certified: s0 != 0 };
        }
        let mut lo = Q::zero();
        let mut hi = root_bound(&crit);
        let eps = frac(1, 1_000_000_000_000);
        while &hi - &lo > &eps * hi.clone().max(q(1)) {
            let mid = (&lo + &hi) / q(2);
            if count_roots(&crit, &zero, Some(&mid)) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        // no zero or pole in (0, lo], and the sign there is s0
        let certified = s0 != 0 && count_roots(&crit, &zero, Some(&lo)) == 0;
        SignAnalysis { sign_near_zero: s0, threshold: Threshold::Bracket { lo, hi }, certified }
    }
}

impl Zero for RatFn {
    fn zero() -> Self {
        RatFn::poly(Poly::zero())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.num)
    }
}

impl One for RatFn {
    fn one() -> Self {
        RatFn::poly(Poly::one())
    }
}

impl Ring for RatFn {
    fn from_rational(v: Q) -> Self {
        RatFn::poly(Poly::constant(v))
    }
}

impl Add for RatFn {
    type Output = RatFn;
    fn add(self, o: RatFn) -> RatFn {
        RatFn::new(self.num * o.den.clone() + o.num * self.den.clone(), self.den * o.den).expect("nonzero")
    }
}

impl Neg for RatFn {
    type Output = RatFn;
    fn neg(self) -> RatFn {
        RatFn { num: -self.num, den: self.den }
    }
}

impl Sub for RatFn {
    type Output = RatFn;
    fn sub(self, o: RatFn) -> RatFn {
        self + (-o)
    }
}

impl Mul for RatFn {
    type Output = RatFn;
    fn mul(self, o: RatFn) -> RatFn {
        RatFn::new(self.num * o.num, self.den * o.den).expect("nonzero")
    }
}

impl fmt::Display for RatFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == Poly::one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "({}) / ({})", self.num, self.den)
        }
    }
}

/// Coefficient lists of a rational function, low degree first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatFnRepr {
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
    pub display: String,
}

impl From<&RatFn> for RatFnRepr {
    fn from(r: &RatFn) -> Self {
        RatFnRepr {
            numerator: r.num.coeffs().iter().map(|c| c.to_string()).collect(),
            denominator: r.den.coeffs().iter().map(|c| c.to_string()).collect(),
            display: r.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Threshold {
    /// No zero or pole on `ε > 0`.
    Infinite,
    /// The first zero or pole lies in `(lo, hi]`.
    Bracket { lo: Q, hi: Q },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignAnalysis {
    pub sign_near_zero: i8,
    pub threshold: Threshold,
    /// The sign is `sign_near_zero` on all of `(0, ε*)`, with `ε*` the
    /// lower end of the bracket (or `∞`).
    pub certified: bool,
}

impl SignAnalysis {
    pub fn threshold_f64(&self) -> f64 {
        match &self.threshold {
            Threshold::Infinite => f64::INFINITY,
            Threshold::Bracket { lo, .. } => to_f64(lo),
        }
    }
}

// ---------------------------------------------------------------------------
// Multivariate polynomials in (p, q, τ, ε)

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Var {
    P,
    Q,
    Tau,
    Eps,
}

/// Polynomial in the symbols `p, q, τ, ε` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly(BTreeMap<[u32; 4], Q>);

impl MPoly {
    pub fn var(v: Var) -> Self {
        let mut e = [0; 4];
        e[v as usize] = 1;
        MPoly([(e, q(1))].into_iter().collect())
    }

    pub fn constant(v: Q) -> Self {
        let mut m = BTreeMap::new();
        if !v.is_zero() {
            m.insert([0; 4], v);
        }
        MPoly(m)
    }

    pub fn pow(&self, n: u32) -> Self {
        (0..n).fold(MPoly::one(), |acc, _| acc * self.clone())
    }

    pub fn terms(&self) -> usize {
        self.0.len()
    }

    /// Evaluates at rational values of `(p, q, τ, ε)`.
    pub fn eval(&self, at: &[Q; 4]) -> Q {
        self.0.iter().fold(Q::zero(), |acc, (e, c)| {
            let mut t = c.clone();
            for i in 0..4 {
                for _ in 0..e[i] {
                    t *= &at[i];
                }
            }
            acc + t
        })
    }
}

impl Zero for MPoly {
    fn zero() -> Self {
        MPoly(BTreeMap::new())
    }
    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }
}

impl One for MPoly {
    fn one() -> Self {
        MPoly::constant(q(1))
    }
}

impl Ring for MPoly {
    fn from_rational(v: Q) -> Self {
        MPoly::constant(v)
    }
}

impl Add for MPoly {
    type Output = MPoly;
    fn add(self, o: MPoly) -> MPoly {
        let mut m = self.0;
        for (e, c) in o.0 {
            let entry = m.entry(e).or_insert_with(Q::zero);
            *entry += c;
            if entry.is_zero() {
                m.remove(&e);
            }
        }
        MPoly(m)
    }
}

impl Neg for MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        MPoly(self.0.into_iter().map(|(e, c)| (e, -c)).collect())
    }
}

impl Sub for MPoly {
    type Output = MPoly;
    fn sub(self, o: MPoly) -> MPoly {
        self + (-o)
    }
}

impl Mul for MPoly {
    type Output = MPoly;
    fn mul(self, o: MPoly) -> MPoly {
        let mut acc = MPoly::zero();
        for (ea, ca) in &self.0 {
            for (eb, cb) in &o.0 {
                let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]];
                acc = acc + MPoly([(e, ca * cb)].into_iter().collect());
            }
        }
        acc
    }
}

/// `num/den` of multivariate polynomials, compared by cross-multiplication.
#[derive(Clone, Debug)]
pub struct MFrac {
    pub num: MPoly,
    pub den: MPoly,
}

impl MFrac {
    pub fn new(num: MPoly, den: MPoly) -> Result<Self, CohomologyError> {
        if Zero::is_zero(&den) {
            return Err(CohomologyError::DivisionByZero);
        }
        Ok(MFrac { num, den })
    }

    pub fn poly(p: MPoly) -> Self {
        MFrac { num: p, den: MPoly::one() }
    }

    pub fn div(&self, o: &MFrac) -> Result<MFrac, CohomologyError> {
        MFrac::new(self.num.clone() * o.den.clone(), self.den.clone() * o.num.clone())
    }

    pub fn same_as(&self, o: &MFrac) -> bool {
        Zero::is_zero(&(self.num.clone() * o.den.clone() - o.num.clone() * self.den.clone()))
    }
}

impl Add for MFrac {
    type Output = MFrac;
    fn add(self, o: MFrac) -> MFrac {
        MFrac { num: self.num * o.den.clone() + o.num * self.den.clone(), den: self.den * o.den }
    }
}

impl Sub for MFrac {
    type Output = MFrac;
    fn sub(self, o: MFrac) -> MFrac {
        MFrac { num: self.num * o.den.clone() - o.num * self.den.clone(), den: self.den * o.den }
    }
}

impl Mul for MFrac {
    type Output = MFrac;
    fn mul(self, o: MFrac) -> MFrac {
        MFrac { num: self.num * o.num, den: self.den * o.den }
    }
}

// ---------------------------------------------------------------------------
// Lattices

#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionLattice<C> {
    pub labels: Vec<String>,
    pairing: Vec<Vec<C>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeClass<C> {
    pub coords: Vec<C>,
}

impl<C: Ring> LatticeClass<C> {
    pub fn new(coords: Vec<C>) -> Self {
        LatticeClass { coords }
    }

    pub fn zero(rank: usize) -> Self {
        LatticeClass { coords: vec![C::zero(); rank] }
    }

    pub fn scaled(&self, k: &C) -> Self {
        LatticeClass { coords: self.coords.iter().map(|c| k.clone() * c.clone()).collect() }
    }

    pub fn plus(&self, o: &Self) -> Self {
        LatticeClass { coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a.clone() + b.clone()).collect() }
    }

    pub fn map<D>(&self, f: impl Fn(&C) -> D) -> LatticeClass<D> {
        LatticeClass { coords: self.coords.iter().map(f).collect() }
    }
}

impl<C: Ring> IntersectionLattice<C> {
    pub fn new(labels: Vec<String>, pairing: Vec<Vec<C>>) -> Result<Self, CohomologyError> {
        let n = labels.len();
        if pairing.len() != n {
            return Err(CohomologyError::DimensionMismatch { rank: n, got: pairing.len() });
        }
        for row in &pairing {
            if row.len() != n {
                return Err(CohomologyError::DimensionMismatch { rank: n, got: row.len() });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if pairing[i][j] != pairing[j][i] {
                    return Err(CohomologyError::AsymmetricPairing);
                }
            }
        }
        Ok(IntersectionLattice { labels, pairing })
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn pairing(&self) -> &[Vec<C>] {
        &self.pairing
    }

    pub fn class(&self, coords: Vec<C>) -> Result<LatticeClass<C>, CohomologyError> {
        if coords.len() != self.rank() {
            return Err(CohomologyError::DimensionMismatch { rank: self.rank(), got: coords.len() });
        }
        Ok(LatticeClass { coords })
    }

    /// `aᵀ · pairing · b`.
    pub fn pair(&self, a: &LatticeClass<C>, b: &LatticeClass<C>) -> Result<C, CohomologyError> {
        let n = self.rank();
        for c in [a, b] {
            if c.coords.len() != n {
                return Err(CohomologyError::DimensionMismatch { rank: n, got: c.coords.len() });
            }
        }
        let mut acc = C::zero();
        for i in 0..n {
            for j in 0..n {
                if self.pairing[i][j].is_zero() {
                    continue;
                }
                acc = acc + a.coords[i].clone() * self.pairing[i][j].clone() * b.coords[j].clone();
            }
        }
        Ok(acc)
    }

    pub fn map<D: Ring>(&self, f: impl Fn(&C) -> D) -> IntersectionLattice<D> {
        IntersectionLattice {
            labels: self.labels.clone(),
            pairing: self.pairing.iter().map(|r| r.iter().map(&f).collect()).collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Surfaces

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceInvariants {
    pub chi: i64,
    pub tau: i64,
    /// Base genus of a Kodaira fibration.
    pub p: Option<i64>,
    /// Fiber genus of a Kodaira fibration.
    pub q: Option<i64>,
}

impl SurfaceInvariants {
    pub fn new(chi: i64, tau: i64) -> Self {
        SurfaceInvariants { chi, tau, p: None, q: None }
    }

    pub fn c1_sq(&self) -> i64 {
        2 * self.chi + 3 * self.tau
    }

    pub fn c2(&self) -> i64 {
        self.chi
    }
}

/// Lattice spanned by the fiber class and `c₁` of a Kodaira fibration with
/// base genus `p`, fiber genus `q` and signature `tau`. Basis order is
/// `(𝓕, c₁)`.
pub fn kodaira_lattice(
    p: i64,
    qg: i64,
    tau: i64,
) -> Result<(IntersectionLattice<Q>, SurfaceInvariants), CohomologyError> {
    if p < 2 || qg < 2 {
        return Err(CohomologyError::InvalidGenera { p, q: qg });
    }
    let chi = 4 * (p - 1) * (qg - 1);
    let inv = SurfaceInvariants { chi, tau, p: Some(p), q: Some(qg) };
    let cf = q(2 - 2 * qg);
    let lattice = IntersectionLattice::new(
        vec!["F".into(), "c1".into()],
        vec![vec![q(0), cf.clone()], vec![cf, q(inv.c1_sq())]],
    )?;
    Ok((lattice, inv))
}

fn fiber_and_c1(lattice: &IntersectionLattice<Q>, inv: &SurfaceInvariants) -> Result<(i64, i64), CohomologyError> {
    let p = inv.p.ok_or(CohomologyError::MissingInput { kind: "kodaira", what: "base genus p" })?;
    let qg = inv.q.ok_or(CohomologyError::MissingInput { kind: "kodaira", what: "fiber genus q" })?;
    if lattice.rank() != 2 {
        return Err(CohomologyError::DimensionMismatch { rank: 2, got: lattice.rank() });
    }
    let c1 = lattice.class(vec![q(0), q(1)])?;
    if lattice.pair(&c1, &c1)? != q(inv.c1_sq()) {
        return Err(CohomologyError::IdentityViolated("c1^2 = 2 chi + 3 tau".into()));
    }
    Ok((p, qg))
}

/// The family `[ω_ε] = 2(p−1)𝓕 − εc₁` and its derived quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct FineFamily {
    pub omega: LatticeClass<Poly>,
    pub c1_dot_omega: Poly,
    pub omega_sq: Poly,
    /// `∫s dμ / 4π`.
    pub total_scalar_over_4pi: Poly,
    pub volume: RatFn,
    /// `∫s² dμ / 32π²` for the constant-scalar-curvature representative.
    pub s2_over_32pi2: RatFn,
    /// `∫|𝓡|² dμ / 8π²`.
    pub riemann_sq_over_8pi2: RatFn,
}

pub fn fine_family(lattice: &IntersectionLattice<Q>, inv: &SurfaceInvariants) -> Result<FineFamily, CohomologyError> {
    let (p, _) = fiber_and_c1(lattice, inv)?;
    let pl = lattice.map(|c| Poly::constant(c.clone()));
    let omega = pl.class(vec![Poly::constant(q(2 * (p - 1))), -Poly::eps()])?;
    let c1 = pl.class(vec![Poly::zero(), Poly::one()])?;
    let c1w = pl.pair(&c1, &omega)?;
    let w2 = pl.pair(&omega, &omega)?;
    let ratio = RatFn::new(c1w.clone() * c1w.clone(), w2.clone())?;
    let volume = RatFn::new(w2.clone(), Poly::constant(q(2)))?;
    let c2_minus_c1sq = q(inv.c2() - inv.c1_sq());
    Ok(FineFamily {
        omega,
        total_scalar_over_4pi: c1w.clone(),
        c1_dot_omega: c1w,
        omega_sq: w2,
        volume,
        riemann_sq_over_8pi2: RatFn::from_rational(c2_minus_c1sq) + ratio.clone(),
        s2_over_32pi2: ratio,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TaubesProjections {
    /// `c̄₁ = c₁ + 4(p−1)𝓕`.
    pub c1_bar: LatticeClass<Q>,
    pub c1_bar_sq: Q,
    pub c1_bar_dot_omega: Poly,
    pub plus_sq: RatFn,
    pub minus_sq: RatFn,
}

pub fn taubes_class_projections(
    lattice: &IntersectionLattice<Q>,
    inv: &SurfaceInvariants,
) -> Result<TaubesProjections, CohomologyError> {
    let (p, _) = fiber_and_c1(lattice, inv)?;
    let fam = fine_family(lattice, inv)?;
    let c1_bar = lattice.class(vec![q(4 * (p - 1)), q(1)])?;
    let c1_bar_sq = lattice.pair(&c1_bar, &c1_bar)?;
    let pl = lattice.map(|c| Poly::constant(c.clone()));
    let bar = c1_bar.map(|c| Poly::constant(c.clone()));
    let dot = pl.pair(&bar, &fam.omega)?;
    // (1,1)-class: the self-dual part is the projection onto ω
    let plus_sq = RatFn::new(dot.clone() * dot.clone(), fam.omega_sq.clone())?;
    let minus_sq = plus_sq.clone() - RatFn::from_rational(c1_bar_sq.clone());
    Ok(TaubesProjections { c1_bar, c1_bar_sq, c1_bar_dot_omega: dot, plus_sq, minus_sq })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    /// Assembled from the family and the projections.
    pub assembled: RatFn,
    /// `−3τ[1 − 2χε/(2χ + εc₁²)]`.
    pub closed_form: RatFn,
    pub sign: SignAnalysis,
}

impl GapReport {
    pub fn at(&self, eps: &Q) -> Result<Q, CohomologyError> {
        self.assembled.eval(eps)
    }
}

/// `(1/8π²)∫|𝓡|² − [|c̄₁⁻|² − (χ − 3τ)]`, computed two ways.
pub fn counterexample_gap(
    lattice: &IntersectionLattice<Q>,
    inv: &SurfaceInvariants,
) -> Result<GapReport, CohomologyError> {
    let fam = fine_family(lattice, inv)?;
    let tp = taubes_class_projections(lattice, inv)?;
    let chi = q(inv.chi);
    let tau = q(inv.tau);
    let assembled = fam.riemann_sq_over_8pi2.clone() - (tp.minus_sq.clone() - RatFn::from_rational(&chi - q(3) * &tau));
    let two_chi = Poly::constant(q(2) * &chi);
    let d = two_chi.clone() + Poly::eps().scale(&q(inv.c1_sq()));
    let inner = RatFn::one() - RatFn::new(two_chi * Poly::eps(), d)?;
    let closed_form = RatFn::from_rational(-q(3) * tau) * inner;
    if assembled != closed_form {
        return Err(CohomologyError::IdentityViolated(format!(
            "gap: assembled {assembled} differs from closed form {closed_form}"
        )));
    }
    let sign = assembled.sign_analysis();
    Ok(GapReport { assembled, closed_form, sign })
}

/// `(2χ + 3τ ≥ 0, 2χ − 3τ ≥ 0)`.
pub fn hitchin_thorpe(inv: &SurfaceInvariants) -> (bool, bool) {
    (2 * inv.chi + 3 * inv.tau >= 0, 2 * inv.chi - 3 * inv.tau >= 0)
}

// ---------------------------------------------------------------------------
// Symbolic identities in (p, q, τ, ε)

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicIdentity {
    pub name: String,
    pub holds: bool,
}

/// Checks every displayed identity of the Kodaira family with `p, q, τ, ε`
/// kept symbolic, starting from the lattice alone.
pub fn symbolic_identities() -> Vec<SymbolicIdentity> {
    let (p, qg, tau, eps) = (MPoly::var(Var::P), MPoly::var(Var::Q), MPoly::var(Var::Tau), MPoly::var(Var::Eps));
    let c = |v: i64| MPoly::from_int(v);
    let chi = c(4) * (p.clone() - c(1)) * (qg.clone() - c(1));
    let c1sq = c(2) * chi.clone() + c(3) * tau.clone();
    let cf = c(2) - c(2) * qg.clone();
    let lattice = IntersectionLattice::new(
        vec!["F".into(), "c1".into()],
        vec![vec![c(0), cf.clone()], vec![cf.clone(), c1sq.clone()]],
    )
    .expect("symmetric");
    let omega = LatticeClass::new(vec![c(2) * (p.clone() - c(1)), -eps.clone()]);
    let c1 = LatticeClass::new(vec![c(0), c(1)]);
    let fiber = LatticeClass::new(vec![c(1), c(0)]);
    let c1_bar = LatticeClass::new(vec![c(4) * (p.clone() - c(1)), c(1)]);
    let pair = |a: &LatticeClass<MPoly>, b: &LatticeClass<MPoly>| lattice.pair(a, b).expect("rank 2");

    let c1w = pair(&c1, &omega);
    let w2 = pair(&omega, &omega);
    let barw = pair(&c1_bar, &omega);
    let barsq = pair(&c1_bar, &c1_bar);
    let d = c(2) * chi.clone() + eps.clone() * c1sq.clone();
    let fr = |n: MPoly, dd: MPoly| MFrac::new(n, dd).expect("nonzero");
    let plus_sq = fr(barw.clone() * barw.clone(), w2.clone());
    let minus_sq = plus_sq.clone() - MFrac::poly(barsq.clone());
    let ratio = fr(c1w.clone() * c1w.clone(), w2.clone());
    let rm = MFrac::poly(-(chi.clone() + c(3) * tau.clone())) + ratio.clone();
    let gap_a = rm.clone() - (minus_sq.clone() - MFrac::poly(chi.clone() - c(3) * tau.clone()));
    let gap_b =
        MFrac::poly(-(c(3) * tau.clone())) * (MFrac::poly(c(1)) - fr(c(2) * chi.clone() * eps.clone(), d.clone()));
    let gap_c = fr(-(c(3) * tau.clone()) * (d.clone() - c(2) * chi.clone() * eps.clone()), d.clone());
    let closed_plus = fr((chi.clone() + c(3) * eps.clone() * tau.clone()).pow(2), eps.clone() * d.clone());
    let closed_s2 = fr((chi.clone() + eps.clone() * c1sq.clone()).pow(2), eps.clone() * d.clone());
    // the intermediate numerator in the closing computation
    let num_diff =
        (chi.clone() + eps.clone() * c1sq.clone()).pow(2) - (chi.clone() + c(3) * eps.clone() * tau.clone()).pow(2);
    let num_closed = c(4) * chi.clone() * eps.clone() * (chi.clone() + c(3) * eps.clone() * tau.clone())
        + c(4) * chi.clone().pow(2) * eps.clone().pow(2);
    // c₁·𝓕 is forced: c₁·[ω_ε] = 2(p−1)x − εc₁² must equal −(χ + εc₁²)
    let forced = fr(-chi.clone(), c(2) * (p.clone() - c(1)));
    let id = |name: &str, holds: bool| SymbolicIdentity { name: name.to_string(), holds };
    vec![
        id("fiber self-intersection is zero", Zero::is_zero(&pair(&fiber, &fiber))),
        id("c1.F forced to 2 - 2q", forced.same_as(&MFrac::poly(cf.clone()))),
        id("c1.[w] = -(chi + eps c1^2)", c1w == -(chi.clone() + eps.clone() * c1sq.clone())),
        id("[w]^2 = eps (2 chi + eps c1^2)", w2 == eps.clone() * d.clone()),
        id("c1bar.[w] = -(chi + 3 eps tau)", barw == -(chi.clone() + c(3) * eps.clone() * tau.clone())),
        id("c1bar^2 = 3 tau - 2 chi", barsq == c(3) * tau.clone() - c(2) * chi.clone()),
        id("|c1bar+|^2 closed form", plus_sq.same_as(&closed_plus)),
        id(
            "|c1bar-|^2 - |c1bar+|^2 = 2 chi - 3 tau",
            (minus_sq.clone() - plus_sq.clone()).same_as(&MFrac::poly(c(2) * chi.clone() - c(3) * tau.clone())),
        ),
        id("int s^2 / 32 pi^2 closed form", ratio.same_as(&closed_s2)),
        id("gap numerator expansion", num_diff == num_closed),
        id("gap assembled = closed form", gap_a.same_as(&gap_b)),
        id("gap closed form = single fraction", gap_b.same_as(&gap_c)),
    ]
}

// ---------------------------------------------------------------------------
// Kähler class data and bound right-hand sides

/// `[ω] = omega_scale · omega` in a rational lattice, together with `c₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct KahlerClassData {
    pub lattice: IntersectionLattice<Q>,
    pub c1: LatticeClass<Q>,
    pub omega: LatticeClass<Q>,
    pub omega_scale: f64,
    pub invariants: SurfaceInvariants,
}

impl KahlerClassData {
    pub fn c1_dot_omega_rational(&self) -> Q {
        self.lattice.pair(&self.c1, &self.omega).expect("same lattice")
    }

    pub fn omega_sq_rational(&self) -> Q {
        self.lattice.pair(&self.omega, &self.omega).expect("same lattice")
    }

    pub fn c1_dot_omega(&self) -> f64 {
        self.omega_scale * to_f64(&self.c1_dot_omega_rational())
    }

    pub fn omega_sq(&self) -> f64 {
        self.omega_scale * self.omega_scale * to_f64(&self.omega_sq_rational())
    }

    /// `(c₁·[ω])²/[ω]²`, exact because the scale cancels.
    pub fn ratio(&self) -> Result<Q, CohomologyError> {
        let w2 = self.omega_sq_rational();
        if !w2.is_positive() {
            return Err(CohomologyError::NonPositiveVolume(w2.to_string()));
        }
        let c = self.c1_dot_omega_rational();
        Ok(&c * &c / w2)
    }

    pub fn bound_inputs(&self) -> Result<BoundInputs, CohomologyError> {
        Ok(BoundInputs {
            ratio: Some(self.ratio()?),
            c1_sq: Some(self.lattice.pair(&self.c1, &self.c1)?),
            c2: Some(q(self.invariants.c2())),
            c1_dot_omega: Some(self.c1_dot_omega()),
            omega_sq: Some(self.omega_sq()),
            general: None,
        })
    }
}

fn q_from_f64(v: f64) -> Result<Q, CohomologyError> {
    Q::from_float(v).ok_or(CohomologyError::MissingInput { kind: "lattice", what: "finite parameter" })
}

/// `S²(a) × S²(b)`: basis `(σ₁, σ₂)` with `σ₁·σ₂ = 1`.
pub fn sphere_product_class(a: f64, b: f64) -> Result<KahlerClassData, CohomologyError> {
    let lattice = IntersectionLattice::new(vec!["s1".into(), "s2".into()], vec![vec![q(0), q(1)], vec![q(1), q(0)]])?;
    Ok(KahlerClassData {
        c1: lattice.class(vec![q(2), q(2)])?,
        omega: lattice.class(vec![q_from_f64(b * b)?, q_from_f64(a * a)?])?,
        omega_scale: 4.0 * std::f64::consts::PI,
        invariants: SurfaceInvariants::new(4, 0),
        lattice,
    })
}

/// `Σ_g × Σ_g` with curvature −1 on each factor.
pub fn hyperbolic_product_class(genus: i64) -> Result<KahlerClassData, CohomologyError> {
    if genus < 2 {
        return Err(CohomologyError::InvalidGenera { p: genus, q: genus });
    }
    let lattice = IntersectionLattice::new(vec!["s1".into(), "s2".into()], vec![vec![q(0), q(1)], vec![q(1), q(0)]])?;
    let e = 2 - 2 * genus;
    Ok(KahlerClassData {
        c1: lattice.class(vec![q(e), q(e)])?,
        omega: lattice.class(vec![q(genus - 1), q(genus - 1)])?,
        omega_scale: 4.0 * std::f64::consts::PI,
        invariants: SurfaceInvariants::new(e * e, 0),
        lattice,
    })
}

/// Flat `T⁴ = (ℝ²/2πℤ²)²`.
pub fn flat_torus_class() -> Result<KahlerClassData, CohomologyError> {
    let lattice = IntersectionLattice::new(vec!["s1".into(), "s2".into()], vec![vec![q(0), q(1)], vec![q(1), q(0)]])?;
    Ok(KahlerClassData {
        c1: LatticeClass::zero(2),
        omega: lattice.class(vec![q(1), q(1)])?,
        omega_scale: 4.0 * std::f64::consts::PI * std::f64::consts::PI,
        invariants: SurfaceInvariants::new(0, 0),
        lattice,
    })
}

/// `ℂℙ²` with the Fubini–Study class `[ω] = πH`.
pub fn fubini_study_class() -> Result<KahlerClassData, CohomologyError> {
    let lattice = IntersectionLattice::new(vec!["H".into()], vec![vec![q(1)]])?;
    Ok(KahlerClassData {
        c1: lattice.class(vec![q(3)])?,
        omega: lattice.class(vec![q(1)])?,
        omega_scale: std::f64::consts::PI,
        invariants: SurfaceInvariants::new(3, 1),
        lattice,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `∫s² ≥ 32π² (c₁·[ω])²/[ω]²`
    Who1,
    /// `∫|r|² ≥ 8π² [2(c₁·[ω])²/[ω]² − c₁²]`
    Who2,
    /// `Y ≤ 4π c₁·[ω] / sqrt([ω]²/2)`
    Who3,
    /// `∫s² ≥ 16π² m/(m−1)! · (c₁·[ω]^{m−1})²/[ω]^m`
    Calabi1,
    /// `∫|r|² ≥ 8π²/(m−2)! [m/(m−1) (c₁·[ω]^{m−1})²/[ω]^m − c₁²·[ω]^{m−2}]`
    Calabi2,
    /// `∫|𝓡|² ≥ 8π² [(c₁·[ω])²/[ω]² + c₂ − c₁²]`
    Calabi4,
    /// `[c₁⁺]² ≥ (c₁·[ω])²/[ω]²`
    SwProjection,
    /// `∫(s − √6|W₊|)² ≥ 72π² [c₁⁺]²`, with the projection bound inserted
    SwIntegral,
}

impl BoundKind {
    pub const ALL: [BoundKind; 8] = [
        BoundKind::Who1,
        BoundKind::Who2,
        BoundKind::Who3,
        BoundKind::Calabi1,
        BoundKind::Calabi2,
        BoundKind::Calabi4,
        BoundKind::SwProjection,
        BoundKind::SwIntegral,
    ];
}

/// Pairings for higher complex dimension, supplied as numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralPairings {
    pub m: u32,
    /// `c₁·[ω]^{m−1}`
    pub c1_omega_m1: Q,
    /// `[ω]^m`
    pub omega_m: Q,
    /// `c₁²·[ω]^{m−2}`
    pub c1sq_omega_m2: Option<Q>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    /// `(c₁·[ω])²/[ω]²`
    pub ratio: Option<Q>,
    pub c1_sq: Option<Q>,
    pub c2: Option<Q>,
    /// Real values, needed only by the Yamabe bound.
    pub c1_dot_omega: Option<f64>,
    pub omega_sq: Option<f64>,
    pub general: Option<GeneralPairings>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum BoundValue {
    /// Exact coefficient of `π²` (of `π⁰` for the projection bound).
    Exact(Q),
    /// Real coefficient of `π`.
    Real(f64),
}

impl BoundValue {
    /// Numerical value including the powers of `π`.
    pub fn value(&self, kind: BoundKind) -> f64 {
        let pi = std::f64::consts::PI;
        match (self, kind) {
            (BoundValue::Exact(v), BoundKind::SwProjection) => to_f64(v),
            (BoundValue::Exact(v), _) => to_f64(v) * pi * pi,
            (BoundValue::Real(v), _) => v * pi,
        }
    }
}

fn factorial(n: u32) -> Q {
    (1..=n as i64).fold(q(1), |acc, k| acc * q(k))
}

/// Right-hand side of a bound as an exact coefficient of `π²`.
pub fn bound_rhs(kind: BoundKind, inputs: &BoundInputs) -> Result<BoundValue, CohomologyError> {
    let ratio = || inputs.ratio.clone().ok_or(CohomologyError::MissingInput { kind: "bound", what: "(c1.w)^2/w^2" });
    let c1_sq = || inputs.c1_sq.clone().ok_or(CohomologyError::MissingInput { kind: "bound", what: "c1^2" });
    match kind {
        BoundKind::Who1 => Ok(BoundValue::Exact(q(32) * ratio()?)),
        BoundKind::Who2 => Ok(BoundValue::Exact(q(8) * (q(2) * ratio()? - c1_sq()?))),
        BoundKind::Calabi4 => {
            let c2 = inputs.c2.clone().ok_or(CohomologyError::MissingInput { kind: "calabi4", what: "c2" })?;
            Ok(BoundValue::Exact(q(8) * (ratio()? + c2 - c1_sq()?)))
        }
        BoundKind::SwProjection => Ok(BoundValue::Exact(ratio()?)),
        BoundKind::SwIntegral => Ok(BoundValue::Exact(q(72) * ratio()?)),
        BoundKind::Who3 => {
            let c = inputs.c1_dot_omega.ok_or(CohomologyError::MissingInput { kind: "who3", what: "c1.[w]" })?;
            let w = inputs.omega_sq.ok_or(CohomologyError::MissingInput { kind: "who3", what: "[w]^2" })?;
            if w <= 0.0 {
                return Err(CohomologyError::NonPositiveVolume(w.to_string()));
            }
            Ok(BoundValue::Real(4.0 * c / (w / 2.0).sqrt()))
        }
        BoundKind::Calabi1 | BoundKind::Calabi2 => {
            let (m, a, w, c1sq) = match &inputs.general {
                Some(g) => (g.m, g.c1_omega_m1.clone(), g.omega_m.clone(), g.c1sq_omega_m2.clone()),
                None => (2, q(1), q(1), None),
            };
            if m < 2 {
                return Err(CohomologyError::MissingInput { kind: "calabi", what: "complex dimension m >= 2" });
            }
            let r = if inputs.general.is_some() {
                if !w.is_positive() {
                    return Err(CohomologyError::NonPositiveVolume(w.to_string()));
                }
                &a * &a / &w
            } else {
                ratio()?
            };
            let mq = q(m as i64);
            if kind == BoundKind::Calabi1 {
                Ok(BoundValue::Exact(q(16) * &mq / factorial(m - 1) * r))
            } else {
                let c1sq = match c1sq {
                    Some(v) => v,
                    None if inputs.general.is_none() => c1_sq()?,
                    None => return Err(CohomologyError::MissingInput { kind: "calabi2", what: "c1^2.[w]^(m-2)" }),
                };
                Ok(BoundValue::Exact(q(8) / factorial(m - 2) * (&mq / (&mq - q(1)) * r - c1sq)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_arithmetic_and_gcd() {
        let a = Poly::from_ints(&[-1, 0, 1]); // ε² − 1
        let b = Poly::from_ints(&[1, 1]); // ε + 1
        let (quo, r) = a.div_rem(&b).unwrap();
        assert_eq!(quo, Poly::from_ints(&[-1, 1]));
        assert!(Zero::is_zero(&r));
        assert_eq!(Poly::gcd(&a, &(b.clone() * b.clone())), b);
        assert_eq!(a.eval(&q(3)), q(8));
        assert_eq!(a.to_string(), "-1 + e^2");
    }

    #[test]
    fn rational_functions_reduce() {
        let r = RatFn::new(Poly::from_ints(&[-2, 0, 2]), Poly::from_ints(&[3, 3])).unwrap();
        assert_eq!(r.numerator(), &Poly::new(vec![frac(-2, 3), frac(2, 3)]));
        assert_eq!(r.denominator(), &Poly::one());
        assert!(RatFn::new(Poly::one(), Poly::zero()).is_err());
        let s = RatFn::new(Poly::one(), Poly::from_ints(&[0, 2])).unwrap();
        assert_eq!(s.denominator(), &Poly::eps());
        assert_eq!((s.clone() - s.clone()), RatFn::zero());
    }

    #[test]
    fn sturm_counts() {
        // (ε − 1)(ε − 2)(ε + 3)
        let p = Poly::from_ints(&[-1, 1]) * Poly::from_ints(&[-2, 1]) * Poly::from_ints(&[3, 1]);
        assert_eq!(count_roots(&p, &q(0), None), 2);
        assert_eq!(count_roots(&p, &q(0), Some(&frac(3, 2))), 1);
        assert_eq!(count_roots(&p, &q(-10), None), 3);
    }

    #[test]
    fn sign_analysis_finds_threshold() {
        // (ε − 1/2)/(ε + 1) is negative on (0, 1/2)
        let r = RatFn::new(Poly::new(vec![frac(-1, 2), q(1)]), Poly::from_ints(&[1, 1])).unwrap();
        let s = r.sign_analysis();
        assert_eq!(s.sign_near_zero, -1);
        assert!(s.certified);
        assert!((s.threshold_f64() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn parse_and_print_rationals() {
        assert_eq!(parse_rational("1/100"), Some(frac(1, 100)));
        assert_eq!(parse_rational("0.01"), Some(frac(1, 100)));
        assert_eq!(parse_rational("-618/13"), Some(frac(-618, 13)));
        assert_eq!(parse_rational("x"), None);
        assert_eq!(decimal_string(&frac(-1, 8), 20), "-0.125");
        assert_eq!(decimal_string(&frac(1, 3), 5), "0.33333");
    }

    #[test]
    fn lattice_rejects_bad_input() {
        assert_eq!(
            IntersectionLattice::new(vec!["a".into(), "b".into()], vec![vec![q(0), q(1)], vec![q(2), q(0)]]),
            Err(CohomologyError::AsymmetricPairing)
        );
        let (l, _) = kodaira_lattice(2, 3, 16).unwrap();
        assert!(l.pair(&LatticeClass::new(vec![q(1)]), &LatticeClass::new(vec![q(1), q(0)])).is_err());
        assert!(matches!(kodaira_lattice(1, 3, 0), Err(CohomologyError::InvalidGenera { .. })));
    }

    #[test]
    fn mpoly_cross_multiplication() {
        let e = MPoly::var(Var::Eps);
        let a = MFrac::new(e.clone() * e.clone(), e.clone()).unwrap();
        assert!(a.same_as(&MFrac::poly(e.clone())));
        assert!(!a.same_as(&MFrac::poly(MPoly::one())));
        assert_eq!(e.eval(&[q(0), q(0), q(0), q(5)]), q(5));
    }

    #[test]
    fn general_m_calabi_bounds() {
        let inputs = BoundInputs {
            general: Some(GeneralPairings { m: 3, c1_omega_m1: q(2), omega_m: q(4), c1sq_omega_m2: Some(q(1)) }),
            ..Default::default()
        };
        // 16·3/2! · 4/4 = 24
        assert_eq!(bound_rhs(BoundKind::Calabi1, &inputs).unwrap(), BoundValue::Exact(q(24)));
        // 8/1! · (3/2 · 1 − 1) = 4
        assert_eq!(bound_rhs(BoundKind::Calabi2, &inputs).unwrap(), BoundValue::Exact(q(4)));
        let missing = BoundInputs {
            general: Some(GeneralPairings { m: 3, c1_omega_m1: q(2), omega_m: q(4), c1sq_omega_m2: None }),
            ..Default::default()
        };
        assert!(bound_rhs(BoundKind::Calabi2, &missing).is_err());
    }
    #[test]
    fn kodaira_2_3_16() {
        let (l, inv) = kodaira_lattice(2, 3, 16).unwrap();
        assert_eq!(inv.chi, 8);
        assert_eq!(inv.c1_sq(), 64);
        let c1 = l.class(vec![q(0), q(1)]).unwrap();
        let f = l.class(vec![q(1), q(0)]).unwrap();
        assert_eq!(l.pair(&c1, &f).unwrap(), q(-4));
        let fam = fine_family(&l, &inv).unwrap();
        let e = frac(1, 100);
        assert_eq!(fam.s2_over_32pi2.eval(&e).unwrap(), frac(186624, 13 * 32));
        let tp = taubes_class_projections(&l, &inv).unwrap();
        assert_eq!(tp.c1_bar_dot_omega.eval(&e), frac(-212, 25));
        assert_eq!((tp.minus_sq.clone() - tp.plus_sq.clone()).eval(&e).unwrap(), q(-32));
        let gap = counterexample_gap(&l, &inv).unwrap();
        assert_eq!(gap.at(&e).unwrap(), frac(-618, 13));
        assert_eq!(gap.sign.sign_near_zero, -1);
        assert!(gap.sign.certified);
        assert_eq!(gap.sign.threshold, Threshold::Infinite);
    }

    #[test]
    fn zero_signature_has_no_gap() {
        let (l, inv) = kodaira_lattice(3, 2, 0).unwrap();
        let gap = counterexample_gap(&l, &inv).unwrap();
        assert!(Zero::is_zero(&gap.assembled));
        assert_eq!(gap.sign.sign_near_zero, 0);
    }

    #[test]
    fn hitchin_thorpe_cases() {
        assert_eq!(hitchin_thorpe(&SurfaceInvariants::new(4, 0)), (true, true));
        assert_eq!(hitchin_thorpe(&SurfaceInvariants::new(0, 0)), (true, true));
        assert_eq!(hitchin_thorpe(&SurfaceInvariants::new(8, 16)), (true, false));
    }

    #[test]
    fn sphere_product_bounds() {
        let k = sphere_product_class(1.0, 1.0).unwrap();
        let inp = k.bound_inputs().unwrap();
        assert_eq!(bound_rhs(BoundKind::Who1, &inp).unwrap(), BoundValue::Exact(q(256)));
        assert_eq!(bound_rhs(BoundKind::Calabi4, &inp).unwrap(), BoundValue::Exact(q(32)));
        let fs = fubini_study_class().unwrap();
        // ∫s² = 24² · π²/2 = 288π²
        assert_eq!(bound_rhs(BoundKind::Who1, &fs.bound_inputs().unwrap()).unwrap(), BoundValue::Exact(q(288)));
    }

    #[test]
    fn symbolic_identities_hold() {
        for id in symbolic_identities() {
            assert!(id.holds, "{}", id.name);
        }
    }
}
