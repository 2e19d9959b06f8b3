//! Exact arithmetic in real quadratic fields.
//!
//! Values are elements (p + q√D)/r of ℚ(√D) held in canonical form
//! (gcd(p,q,r) = 1, r > 0, D squarefree > 1), with decidable comparison,
//! periodic continued fractions, stabilizer matrices g ∈ SL₂(ℤ) with gθ = θ,
//! and the integer sequences (aₙ,bₙ,cₙ,dₙ) with unit εₙ = cₙθ + dₙ attached to
//! powers of a hyperbolic stabilizer. Everything here is integer arithmetic;
//! the only floating-point surface is the explicit `to_f64`/`frac_f64` bridge,
//! which rounds an exactly computed 2⁻⁶⁴ fixed-point value once.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use once_cell::sync::Lazy;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

/// Errors from exact quadratic-field arithmetic and stabilizer searches.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QarithError {
    #[error("values live in different fields: sqrt({0}) vs sqrt({1})")]
    MismatchedField(BigInt, BigInt),
    #[error("division by zero")]
    DivisionByZero,
    #[error("denominator r must be nonzero")]
    ZeroDenominator,
    #[error("D must be greater than 1")]
    DTooSmall,
    #[error("D must not be a perfect square")]
    PerfectSquareD,
    #[error("value is rational; this operation needs a quadratic irrational")]
    RationalValue,
    #[error("continued fraction period not detected within {0} terms")]
    PeriodNotFound(usize),
    #[error("mobius transform pole: c*x + d = 0")]
    MobiusPole,
    #[error("matrix is not invertible over the integers")]
    NotUnimodular,
    #[error("matrix must lie in the stabilizer semigroup of theta (det 1, not +-1, g*theta = theta, trace > 0, c > 0)")]
    NotInStabilizer,
    #[error("no generator with c >= a + d + {eps} exists: |theta - theta'| >= 1")]
    NoGeneratorExists { eps: u8 },
    #[error("cannot parse {0:?}; expected \"(p+q*sqrt(D))/r\"")]
    Parse(String),
}

type Result<T> = std::result::Result<T, QarithError>;

/// An element (p + q√D)/r of the real quadratic field ℚ(√D), canonical form.
///
/// Torus parameters must be irrational (q ≠ 0); rational values (q = 0) arise
/// as intermediate results such as θ + θ′ and stay closed under arithmetic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "RawQi", into = "RawQi")]
pub struct QuadraticIrrational {
    p: BigInt,
    q: BigInt,
    r: BigInt,
    d: BigInt,
}

/// Serializes BigInt fields as plain JSON integers (decimal strings past i64).
pub mod bigint_json {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{de, Deserializer, Serializer};
    use std::fmt;
    use std::str::FromStr;

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        match x.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.collect_str(x),
        }
    }

    struct BigIntVisitor;

    impl de::Visitor<'_> for BigIntVisitor {
        type Value = BigInt;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("an integer or a decimal string")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> Result<BigInt, E> {
            Ok(BigInt::from(v))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> Result<BigInt, E> {
            Ok(BigInt::from(v))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> Result<BigInt, E> {
            BigInt::from_str(v).map_err(de::Error::custom)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        d.deserialize_any(BigIntVisitor)
    }
}

#[derive(Serialize, Deserialize, Clone)]
struct RawQi {
    #[serde(with = "bigint_json")]
    p: BigInt,
    #[serde(with = "bigint_json")]
    q: BigInt,
    #[serde(with = "bigint_json")]
    r: BigInt,
    #[serde(rename = "D", with = "bigint_json")]
    d: BigInt,
}

impl TryFrom<RawQi> for QuadraticIrrational {
    type Error = QarithError;
    fn try_from(raw: RawQi) -> Result<Self> {
        QuadraticIrrational::new(raw.p, raw.q, raw.r, raw.d)
    }
}

impl From<QuadraticIrrational> for RawQi {
    fn from(x: QuadraticIrrational) -> Self {
        RawQi { p: x.p, q: x.q, r: x.r, d: x.d }
    }
}

impl QuadraticIrrational {
    /// Builds (p + q√D)/r and canonicalizes: square factors of D move into q,
    /// the sign of r becomes positive, and gcd(p,q,r) reduces to 1.
    pub fn new(
        p: impl Into<BigInt>,
        q: impl Into<BigInt>,
        r: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Result<Self> {
        let (mut p, mut q, mut r, mut d) = (p.into(), q.into(), r.into(), d.into());
        if r.is_zero() {
            return Err(QarithError::ZeroDenominator);
        }
        if d <= BigInt::one() {
            return Err(QarithError::DTooSmall);
        }
        let mut f = BigInt::from(2);
        while &f * &f <= d {
            let f2 = &f * &f;
            while d.is_multiple_of(&f2) {
                d /= &f2;
                q *= &f;
            }
            f += 1;
        }
        if d.is_one() {
            return Err(QarithError::PerfectSquareD);
        }
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_zero() {
            p /= &g;
            q /= &g;
            r /= &g;
        } else {
            r = BigInt::one();
        }
        Ok(Self { p, q, r, d })
    }

    /// The rational number n/m viewed inside ℚ(√D).
    pub fn rational(n: impl Into<BigInt>, m: impl Into<BigInt>, d: impl Into<BigInt>) -> Result<Self> {
        Self::new(n, 0, m, d)
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    pub fn r(&self) -> &BigInt {
        &self.r
    }

    /// The squarefree radicand D.
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    /// True when the value is a genuine quadratic irrational (q ≠ 0).
    pub fn is_irrational(&self) -> bool {
        !self.q.is_zero()
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    /// Field for a binary operation: rational operands adopt the other side's D.
    fn common_d(&self, other: &Self) -> Result<BigInt> {
        if self.q.is_zero() {
            Ok(other.d.clone())
        } else if other.q.is_zero() || self.d == other.d {
            Ok(self.d.clone())
        } else {
            Err(QarithError::MismatchedField(self.d.clone(), other.d.clone()))
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Self::new(
            &self.p * &other.r + &other.p * &self.r,
            &self.q * &other.r + &other.q * &self.r,
            &self.r * &other.r,
            d,
        )
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Self { p: -&self.p, q: -&self.q, r: self.r.clone(), d: self.d.clone() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Self::new(
            &self.p * &other.p + &self.q * &other.q * &d,
            &self.p * &other.q + &self.q * &other.p,
            &self.r * &other.r,
            d,
        )
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.is_zero() {
            return Err(QarithError::DivisionByZero);
        }
        let d = self.common_d(other)?;
        // 1/((p+q√D)/r) = r(p − q√D)/(p² − q²D)
        let norm = &other.p * &other.p - &other.q * &other.q * &d;
        let inv = Self::new(&other.r * &other.p, -(&other.r * &other.q), norm, d)?;
        self.mul(&inv)
    }

    pub fn pow(&self, n: u32) -> Result<Self> {
        let mut acc = Self::rational(1, 1, self.d.clone())?;
        for _ in 0..n {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Exact sign of the value, decided by integer squaring.
    pub fn sign(&self) -> Ordering {
        // r > 0, so the sign is that of p + q√D
        match (self.q.sign(), self.p.sign()) {
            (Sign::NoSign, _) => self.p.cmp(&BigInt::zero()),
            (Sign::Plus, Sign::Plus | Sign::NoSign) => Ordering::Greater,
            (Sign::Minus, Sign::Minus | Sign::NoSign) => Ordering::Less,
            (Sign::Plus, Sign::Minus) => (&self.q * &self.q * &self.d).cmp(&(&self.p * &self.p)),
            (Sign::Minus, Sign::Plus) => (&self.p * &self.p).cmp(&(&self.q * &self.q * &self.d)),
        }
    }

    /// Exact comparison via the sign of the difference.
    pub fn cmp_exact(&self, other: &Self) -> Result<Ordering> {
        Ok(self.sub(other)?.sign())
    }

    /// Galois conjugate (p − q√D)/r.
    pub fn galois_conjugate(&self) -> Self {
        Self { p: self.p.clone(), q: -&self.q, r: self.r.clone(), d: self.d.clone() }
    }

    /// Exact floor. Irrationality of √D makes the integer-sqrt bound strict.
    pub fn floor(&self) -> BigInt {
        let num = match self.q.sign() {
            Sign::NoSign => self.p.clone(),
            Sign::Plus => &self.p + (&self.q * &self.q * &self.d).sqrt(),
            Sign::Minus => &self.p - (&self.q * &self.q * &self.d).sqrt() - 1,
        };
        num.div_floor(&self.r)
    }

    /// Fractional part in [0,1), exact to 2⁻⁶⁴ fixed point before one rounding.
    pub fn frac_f64(&self) -> f64 {
        let fl = self.floor();
        let p_shift: BigInt = (&self.p - &fl * &self.r) << 64;
        let scaled_rad: BigInt = (&self.q * &self.q * &self.d) << 128;
        let num = match self.q.sign() {
            Sign::NoSign => p_shift,
            Sign::Plus => p_shift + scaled_rad.sqrt(),
            Sign::Minus => p_shift - scaled_rad.sqrt() - 1,
        };
        let u = num.div_floor(&self.r);
        u.to_f64().unwrap_or(0.0) / 18446744073709551616.0
    }

    /// Nearest f64, assembled from the exact floor and fractional part.
    pub fn to_f64(&self) -> f64 {
        self.floor().to_f64().unwrap_or(f64::NAN) + self.frac_f64()
    }
}

impl PartialEq for QuadraticIrrational {
    fn eq(&self, other: &Self) -> bool {
        if self.q.is_zero() && other.q.is_zero() {
            self.p == other.p && self.r == other.r
        } else {
            self.d == other.d && self.p == other.p && self.q == other.q && self.r == other.r
        }
    }
}

impl Eq for QuadraticIrrational {}

impl fmt::Display for QuadraticIrrational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (sep, qa) = if self.q.is_negative() { ("-", -&self.q) } else { ("+", self.q.clone()) };
        write!(f, "({}{}{}*sqrt({}))/{}", self.p, sep, qa, self.d, self.r)
    }
}

static QI_GRAMMAR: Lazy<Regex> = Lazy::new(|| {
    Regex::new(r"^\s*\(\s*(-?\d+)\s*([+-])\s*(\d+)\s*\*\s*sqrt\(\s*(\d+)\s*\)\s*\)\s*/\s*(-?\d+)\s*$")
        .expect("grammar regex is valid")
});

impl FromStr for QuadraticIrrational {
    type Err = QarithError;

    /// Parses the form "(p+q*sqrt(D))/r", e.g. "(-1+1*sqrt(21))/10".
    fn from_str(s: &str) -> Result<Self> {
        let caps = QI_GRAMMAR.captures(s).ok_or_else(|| QarithError::Parse(s.to_owned()))?;
        let int = |i: usize| -> Result<BigInt> {
            caps[i].parse::<BigInt>().map_err(|_| QarithError::Parse(s.to_owned()))
        };
        let mut q = int(3)?;
        if &caps[2] == "-" {
            q = -q;
        }
        Self::new(int(1)?, q, int(5)?, int(4)?)
    }
}

/// An integer 2×2 matrix (a b; c d) acting by Möbius transforms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntMatrix2 {
    #[serde(with = "bigint_json")]
    pub a: BigInt,
    #[serde(with = "bigint_json")]
    pub b: BigInt,
    #[serde(with = "bigint_json")]
    pub c: BigInt,
    #[serde(with = "bigint_json")]
    pub d: BigInt,
}

impl IntMatrix2 {
    pub fn new(
        a: impl Into<BigInt>,
        b: impl Into<BigInt>,
        c: impl Into<BigInt>,
        d: impl Into<BigInt>,
    ) -> Self {
        Self { a: a.into(), b: b.into(), c: c.into(), d: d.into() }
    }

    pub fn identity() -> Self {
        Self::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> BigInt {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> BigInt {
        &self.a + &self.d
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            a: &self.a * &other.a + &self.b * &other.c,
            b: &self.a * &other.b + &self.b * &other.d,
            c: &self.c * &other.a + &self.d * &other.c,
            d: &self.c * &other.b + &self.d * &other.d,
        }
    }

    pub fn neg(&self) -> Self {
        Self { a: -&self.a, b: -&self.b, c: -&self.c, d: -&self.d }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::identity();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Inverse of a matrix with det ±1, via the adjugate.
    pub fn inverse_unimodular(&self) -> Result<Self> {
        let det = self.det();
        let adj = Self { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() };
        if det.is_one() {
            Ok(adj)
        } else if det == BigInt::from(-1) {
            Ok(adj.neg())
        } else {
            Err(QarithError::NotUnimodular)
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity()
    }

    pub fn is_neg_identity(&self) -> bool {
        *self == Self::identity().neg()
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {}; {} {})", self.a, self.b, self.c, self.d)
    }
}

/// Entries of gⁿ together with the unit εₙ = cₙθ + dₙ.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerEntries {
    pub n: u32,
    #[serde(with = "bigint_json")]
    pub a_n: BigInt,
    #[serde(with = "bigint_json")]
    pub b_n: BigInt,
    #[serde(with = "bigint_json")]
    pub c_n: BigInt,
    #[serde(with = "bigint_json")]
    pub d_n: BigInt,
    pub eps_n: QuadraticIrrational,
}

impl PowerEntries {
    pub fn matrix(&self) -> IntMatrix2 {
        IntMatrix2::new(self.a_n.clone(), self.b_n.clone(), self.c_n.clone(), self.d_n.clone())
    }
}

/// Applies (ax + b)/(cx + d) exactly.
pub fn mobius_apply(g: &IntMatrix2, x: &QuadraticIrrational) -> Result<QuadraticIrrational> {
    let scale_add = |m: &BigInt, k: &BigInt| -> Result<QuadraticIrrational> {
        QuadraticIrrational::new(m * x.p() + k * x.r(), m * x.q(), x.r().clone(), x.d().clone())
    };
    let num = scale_add(&g.a, &g.b)?;
    let den = scale_add(&g.c, &g.d)?;
    if den.is_zero() {
        return Err(QarithError::MobiusPole);
    }
    num.div(&den)
}

/// Partial quotients of x with the eventual period detected exactly.
///
/// Runs the (P + √N)/Q state recurrence; a repeated (P,Q) state closes the
/// period. Returns (preperiod, period).
pub fn continued_fraction_expand(
    x: &QuadraticIrrational,
    max_terms: usize,
) -> Result<(Vec<BigInt>, Vec<BigInt>)> {
    if !x.is_irrational() {
        return Err(QarithError::RationalValue);
    }
    // Normalize to (P + √N)/Q with positive radical coefficient and Q | N − P².
    let (mut pp, mut qq) = if x.q().is_positive() {
        (x.p().clone(), x.r().clone())
    } else {
        (-x.p(), -x.r())
    };
    let mut n = x.q() * x.q() * x.d();
    if !(&n - &pp * &pp).is_multiple_of(&qq) {
        let qa = qq.abs();
        pp *= &qa;
        n *= &qq * &qq;
        qq *= &qa;
    }
    let sqrt_n = n.sqrt();
    let mut quotients = Vec::new();
    let mut seen: Vec<(BigInt, BigInt)> = Vec::new();
    for _ in 0..max_terms {
        if let Some(start) = seen.iter().position(|s| s.0 == pp && s.1 == qq) {
            let pre = quotients[..start].to_vec();
            let per = quotients[start..].to_vec();
            return Ok((pre, per));
        }
        seen.push((pp.clone(), qq.clone()));
        // floor((P + √N)/Q); floor(P + √N) = P + isqrt(N) since √N is irrational
        let m: BigInt = &pp + &sqrt_n;
        let a = if qq.is_positive() { m.div_floor(&qq) } else { (-m - BigInt::one()).div_floor(&(-&qq)) };
        let p_next = &a * &qq - &pp;
        let q_next = (&n - &p_next * &p_next) / &qq;
        quotients.push(a);
        pp = p_next;
        qq = q_next;
    }
    Err(QarithError::PeriodNotFound(max_terms))
}

fn quotient_product(quotients: &[BigInt]) -> IntMatrix2 {
    quotients.iter().fold(IntMatrix2::identity(), |acc, a| {
        acc.mul(&IntMatrix2::new(a.clone(), BigInt::one(), BigInt::one(), BigInt::zero()))
    })
}

/// A matrix g ∈ SL₂(ℤ), g ≠ ±1, with gx = x, from one continued-fraction
/// period (two periods when one has determinant −1), conjugated back through
/// the preperiod so it stabilizes x itself rather than its periodic tail.
pub fn stabilizer_matrix(x: &QuadraticIrrational) -> Result<IntMatrix2> {
    let (pre, per) = continued_fraction_expand(x, 256)?;
    let mut m = quotient_product(&per);
    if m.det() == BigInt::from(-1) {
        m = m.mul(&m.clone());
    }
    let t = quotient_product(&pre);
    let g = t.mul(&m).mul(&t.inverse_unimodular()?);
    debug_assert!(g.det().is_one());
    debug_assert_eq!(mobius_apply(&g, x)?, *x);
    Ok(g)
}

/// True iff det g = 1, g ≠ ±1, gθ = θ, tr(g) > 0, and c > 0.
pub fn in_s_theta(g: &IntMatrix2, theta: &QuadraticIrrational) -> bool {
    g.det().is_one()
        && !g.is_identity()
        && !g.is_neg_identity()
        && g.trace().is_positive()
        && g.c.is_positive()
        && mobius_apply(g, theta).map(|y| y == *theta).unwrap_or(false)
}

/// Exact entries of gⁿ with εₙ = cₙθ + dₙ, cross-checked against the
/// three-term recurrence c_{k+1} = tr(g)·c_k − c_{k−1} and εₙ = ε₁ⁿ.
pub fn power_entries(g: &IntMatrix2, theta: &QuadraticIrrational, n: u32) -> Result<PowerEntries> {
    if !in_s_theta(g, theta) {
        return Err(QarithError::NotInStabilizer);
    }
    assert!(
        g.trace() >= BigInt::from(3),
        "hyperbolic stabilizers of real quadratic irrationals have trace >= 3"
    );
    assert!(n >= 1, "power entries are defined for n >= 1");
    let tr = g.trace();
    let mut gn = g.clone();
    let mut c_prev = BigInt::zero();
    let mut c_cur = g.c.clone();
    for _ in 1..n {
        gn = gn.mul(g);
        let c_next = &tr * &c_cur - &c_prev;
        c_prev = c_cur;
        c_cur = c_next;
        assert_eq!(gn.c, c_cur, "matrix power disagrees with the c-recurrence");
    }
    let eps = |c: &BigInt, d: &BigInt| -> Result<QuadraticIrrational> {
        QuadraticIrrational::new(
            c * theta.p() + d * theta.r(),
            c * theta.q(),
            theta.r().clone(),
            theta.d().clone(),
        )
    };
    let eps_n = eps(&gn.c, &gn.d)?;
    let eps_1 = eps(&g.c, &g.d)?;
    assert_eq!(eps_n, eps_1.pow(n)?, "unit power identity eps_n = eps_1^n failed");
    assert!(gn.c.is_positive(), "c_n must stay positive on the stabilizer semigroup");
    assert_eq!(eps_n.sign(), Ordering::Greater, "eps_n must stay positive");
    Ok(PowerEntries { n, a_n: gn.a, b_n: gn.b, c_n: gn.c, d_n: gn.d, eps_n })
}

/// Finds g ∈ S_θ with c ≥ a + d + ε by powering the continued-fraction
/// stabilizer (after flipping signs or inverting to make trace and c positive).
///
/// Requires |θ − θ′| < 1, checked exactly; no such g exists otherwise. Each
/// candidate is certified against (a+d)² = c²(θ−θ′)² + 4 before it is returned.
pub fn find_generating_g(theta: &QuadraticIrrational, eps: u8) -> Result<IntMatrix2> {
    assert!(eps <= 2, "the generation bound is only used with eps in 0..=2");
    if !theta.is_irrational() {
        return Err(QarithError::RationalValue);
    }
    // |θ − θ′| = 2|q|√D / r < 1 ⟺ 4q²D < r²
    let four_q2d = BigInt::from(4) * theta.q() * theta.q() * theta.d();
    if four_q2d >= theta.r() * theta.r() {
        return Err(QarithError::NoGeneratorExists { eps });
    }
    let s = stabilizer_matrix(theta)?;
    let candidates = [s.clone(), s.inverse_unimodular()?, s.neg(), s.inverse_unimodular()?.neg()];
    let g0 = candidates
        .into_iter()
        .find(|g| in_s_theta(g, theta))
        .ok_or(QarithError::NotInStabilizer)?;
    for n in 1..=64 {
        let e = power_entries(&g0, theta, n)?;
        if e.c_n >= &e.a_n + &e.d_n + BigInt::from(eps) {
            let lhs = (&e.a_n + &e.d_n).pow(2) * theta.r() * theta.r();
            let rhs = &e.c_n * &e.c_n * &four_q2d + BigInt::from(4) * theta.r() * theta.r();
            assert_eq!(lhs, rhs, "trace identity (a+d)^2 = c^2(theta-theta')^2 + 4 failed");
            return Ok(e.matrix());
        }
    }
    Err(QarithError::NoGeneratorExists { eps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi(p: i64, q: i64, r: i64, d: i64) -> QuadraticIrrational {
        QuadraticIrrational::new(p, q, r, d).unwrap()
    }

    fn golden() -> QuadraticIrrational {
        qi(1, 1, 2, 5)
    }

    fn theta21() -> QuadraticIrrational {
        qi(-1, 1, 10, 21)
    }

    #[test]
    fn canonical_form_reduces_gcd_sign_and_square_factors() {
        let x = QuadraticIrrational::new(2, -4, -6, 5).unwrap();
        assert_eq!((x.p(), x.q(), x.r()), (&BigInt::from(-1), &BigInt::from(2), &BigInt::from(3)));
        let y = QuadraticIrrational::new(0, 1, 1, 20).unwrap();
        assert_eq!((x.d(), y.q(), y.d()), (&BigInt::from(5), &BigInt::from(2), &BigInt::from(5)));
        assert!(matches!(QuadraticIrrational::new(1, 1, 1, 9), Err(QarithError::PerfectSquareD)));
        assert!(matches!(QuadraticIrrational::new(1, 1, 0, 5), Err(QarithError::ZeroDenominator)));
    }

    #[test]
    fn addition_cancels_rational_parts_of_conjugate_pair() {
        let sum = golden().add(&qi(-1, 1, 2, 5)).unwrap();
        assert_eq!(sum, qi(0, 1, 1, 5));
    }

    #[test]
    fn golden_ratio_times_conjugate_is_minus_one() {
        let prod = golden().mul(&golden().galois_conjugate()).unwrap();
        assert_eq!(prod, QuadraticIrrational::rational(-1, 1, 5).unwrap());
    }

    #[test]
    fn sign_of_theta21_is_positive_by_integer_squaring() {
        // oracle: 21 > 1 forces sqrt(21) > 1, hence -1 + sqrt(21) > 0
        assert!(BigInt::from(21) > BigInt::from(1));
        assert_eq!(theta21().sign(), Ordering::Greater);
        assert_eq!(
            theta21().cmp_exact(&QuadraticIrrational::rational(0, 1, 21).unwrap()).unwrap(),
            Ordering::Greater
        );
    }

    #[test]
    fn conjugation_is_an_involution_and_flips_q() {
        assert_eq!(golden().galois_conjugate(), qi(1, -1, 2, 5));
        assert_eq!(theta21().galois_conjugate().galois_conjugate(), theta21());
    }

    #[test]
    fn conjugate_gap_of_theta21_is_below_one() {
        // (θ − θ′)²·25 = 21 < 25, exactly
        let gap = theta21().sub(&theta21().galois_conjugate()).unwrap();
        let gap2 = gap.mul(&gap).unwrap();
        assert_eq!(gap2, QuadraticIrrational::rational(21, 25, 21).unwrap());
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = qi(3, -2, 7, 21);
        let y = qi(-1, 5, 4, 21);
        let z = x.mul(&y).unwrap().div(&y).unwrap();
        assert_eq!(z, x);
        assert!(matches!(
            x.div(&QuadraticIrrational::rational(0, 1, 21).unwrap()),
            Err(QarithError::DivisionByZero)
        ));
        assert!(matches!(x.add(&qi(1, 1, 1, 5)), Err(QarithError::MismatchedField(_, _))));
    }

    #[test]
    fn mobius_identity_fixes_everything() {
        let x = theta21();
        assert_eq!(mobius_apply(&IntMatrix2::identity(), &x).unwrap(), x);
    }

    #[test]
    fn mobius_golden_stabilizer_fixes_golden_ratio() {
        // θ² = θ + 1 forces (2θ+1)/(θ+1) = θ
        let th = golden();
        assert_eq!(th.mul(&th).unwrap(), th.add(&QuadraticIrrational::rational(1, 1, 5).unwrap()).unwrap());
        assert_eq!(mobius_apply(&IntMatrix2::new(2, 1, 1, 1), &th).unwrap(), th);
    }

    #[test]
    fn mobius_g_fixes_theta21() {
        // 5θ² + θ − 1 = 0 forces (2θ+1)/(5θ+3) = θ
        let th = theta21();
        let five_th2 = th.mul(&th).unwrap().mul(&QuadraticIrrational::rational(5, 1, 21).unwrap()).unwrap();
        let lhs = five_th2.add(&th).unwrap();
        assert_eq!(lhs, QuadraticIrrational::rational(1, 1, 21).unwrap());
        assert_eq!(mobius_apply(&IntMatrix2::new(2, 1, 5, 3), &th).unwrap(), th);
    }

    #[test]
    fn continued_fraction_of_golden_is_all_ones() {
        let (pre, per) = continued_fraction_expand(&golden(), 64).unwrap();
        assert!(pre.is_empty());
        assert_eq!(per, vec![BigInt::one()]);
    }

    #[test]
    fn continued_fraction_of_sqrt2_is_one_then_twos() {
        let (pre, per) = continued_fraction_expand(&qi(0, 1, 1, 2), 64).unwrap();
        assert_eq!(pre, vec![BigInt::one()]);
        assert_eq!(per, vec![BigInt::from(2)]);
    }

    /// Rebuilds the value from (preperiod, period): the periodic tail y solves
    /// Cy² + (D−A)y − B = 0 for the period product (A B; C D), and the
    /// preperiod maps y back to x.
    fn reconstruct(pre: &[BigInt], per: &[BigInt]) -> QuadraticIrrational {
        let m = quotient_product(per);
        let disc = (&m.a - &m.d).pow(2) + BigInt::from(4) * &m.b * &m.c;
        let y = QuadraticIrrational::new(&m.a - &m.d, BigInt::one(), BigInt::from(2) * &m.c, disc)
            .unwrap();
        mobius_apply(&quotient_product(pre), &y).unwrap()
    }

    #[test]
    fn continued_fraction_round_trips_exactly() {
        for x in [golden(), qi(0, 1, 1, 2), theta21(), qi(-1, 1, 6, 5), qi(7, -3, 11, 13)] {
            let (pre, per) = continued_fraction_expand(&x, 256).unwrap();
            assert_eq!(reconstruct(&pre, &per), x, "round trip failed for {x}");
        }
    }

    #[test]
    fn stabilizer_of_golden_is_the_squared_fibonacci_matrix() {
        assert_eq!(stabilizer_matrix(&golden()).unwrap(), IntMatrix2::new(2, 1, 1, 1));
    }

    #[test]
    fn stabilizer_has_det_one_and_fixes_its_input() {
        for x in [golden(), qi(0, 1, 1, 2), theta21(), qi(-1, 1, 6, 5)] {
            let g = stabilizer_matrix(&x).unwrap();
            assert!(g.det().is_one());
            assert!(!g.is_identity() && !g.is_neg_identity());
            assert_eq!(mobius_apply(&g, &x).unwrap(), x);
        }
    }

    #[test]
    fn s_theta_membership_examples() {
        assert!(in_s_theta(&IntMatrix2::new(2, 1, 1, 1), &golden()));
        assert!(!in_s_theta(&IntMatrix2::identity(), &golden()));
        assert!(!in_s_theta(&IntMatrix2::new(2, 1, 5, 3), &golden()));
        assert!(in_s_theta(&IntMatrix2::new(2, 1, 5, 3), &theta21()));
    }

    #[test]
    fn power_entries_squares_the_theta21_generator() {
        let e = power_entries(&IntMatrix2::new(2, 1, 5, 3), &theta21(), 2).unwrap();
        assert_eq!(
            (e.a_n, e.b_n, e.c_n, e.d_n),
            (BigInt::from(9), BigInt::from(5), BigInt::from(25), BigInt::from(14))
        );
    }

    #[test]
    fn golden_stabilizer_c_sequence_follows_recurrence() {
        let g = IntMatrix2::new(2, 1, 1, 1);
        // independent oracle: c_{n+1} = 3c_n − c_{n−1} from c_0 = 0, c_1 = 1
        let mut oracle = vec![BigInt::zero(), BigInt::one()];
        for k in 1..6 {
            let next = BigInt::from(3) * &oracle[k] - &oracle[k - 1];
            oracle.push(next);
        }
        for n in 1..=4u32 {
            let e = power_entries(&g, &golden(), n).unwrap();
            assert_eq!(e.c_n, oracle[n as usize]);
        }
        assert_eq!(
            oracle[1..=4].to_vec(),
            vec![BigInt::from(1), BigInt::from(3), BigInt::from(8), BigInt::from(21)]
        );
    }

    #[test]
    fn power_entries_at_one_returns_the_matrix_itself() {
        let g = IntMatrix2::new(2, 1, 5, 3);
        let e = power_entries(&g, &theta21(), 1).unwrap();
        assert_eq!(e.matrix(), g);
    }

    /// Independent oracle: all g ∈ S_θ with c ≥ a + d + eps and entries bounded
    /// by `bound`. gθ = θ reduces to two integer equations in (a,c); b and d
    /// follow by exact division.
    fn exhaustive_generators(theta: &QuadraticIrrational, eps: i64, bound: i64) -> Vec<(i64, i64, i64, i64)> {
        let (p, q, r) = (
            theta.p().to_i64().unwrap(),
            theta.q().to_i64().unwrap(),
            theta.r().to_i64().unwrap(),
        );
        let dd = theta.d().to_i64().unwrap();
        assert!(q != 0);
        let mut found = Vec::new();
        for a in -bound..=bound {
            for c in 1..=bound {
                // gθ = θ ⟺ 2cp + (d−a)r = 0 and c(p²+q²D) + (d−a)pr − br² = 0
                if (2 * c * p) % r != 0 {
                    continue;
                }
                let d = a - 2 * c * p / r;
                let num_b = c * (p * p + q * q * dd) + (d - a) * p * r;
                if num_b % (r * r) != 0 {
                    continue;
                }
                let b = num_b / (r * r);
                if b.abs() > bound || d.abs() > bound {
                    continue;
                }
                if a * d - b * c != 1 || a + d <= 0 || (a == 1 && b == 0 && c == 0) {
                    continue;
                }
                if c >= a + d + eps {
                    found.push((a, b, c, d));
                }
            }
        }
        found
    }

    #[test]
    fn generator_search_matches_exhaustive_oracle_for_theta21() {
        let oracle = exhaustive_generators(&theta21(), 0, 30);
        assert!(oracle.contains(&(2, 1, 5, 3)));
        let g = find_generating_g(&theta21(), 0).unwrap();
        let key = (
            g.a.to_i64().unwrap(),
            g.b.to_i64().unwrap(),
            g.c.to_i64().unwrap(),
            g.d.to_i64().unwrap(),
        );
        assert!(oracle.contains(&key), "returned generator {g} missing from oracle set");
        assert!(in_s_theta(&g, &theta21()));
    }

    #[test]
    fn generator_search_with_margin_two_on_nine_theta() {
        let th = qi(-1, 1, 6, 5);
        let g = find_generating_g(&th, 2).unwrap();
        assert_eq!(g, IntMatrix2::new(2, 1, 9, 5));
        assert!(g.det().is_one());
        assert_eq!(g.trace(), BigInt::from(7));
        assert!(g.c >= g.trace() + BigInt::from(2));
    }

    #[test]
    fn generator_search_rejects_golden_ratio() {
        // |θ − θ′| = √5 > 1, exactly: 4·5 > 4
        assert!(matches!(
            find_generating_g(&golden(), 0),
            Err(QarithError::NoGeneratorExists { eps: 0 })
        ));
    }

    #[test]
    fn trace_identity_holds_exactly_for_both_geometries() {
        for (th, g) in [
            (theta21(), IntMatrix2::new(2, 1, 5, 3)),
            (qi(-1, 1, 6, 5), IntMatrix2::new(2, 1, 9, 5)),
        ] {
            let gap = th.sub(&th.galois_conjugate()).unwrap();
            let gap2 = gap.mul(&gap).unwrap();
            for n in 1..=10 {
                let e = power_entries(&g, &th, n).unwrap();
                let lhs = QuadraticIrrational::new(
                    (&e.a_n + &e.d_n).pow(2),
                    BigInt::zero(),
                    BigInt::one(),
                    th.d().clone(),
                )
                .unwrap();
                let c2 = QuadraticIrrational::new(
                    &e.c_n * &e.c_n,
                    BigInt::zero(),
                    BigInt::one(),
                    th.d().clone(),
                )
                .unwrap();
                let rhs = c2
                    .mul(&gap2)
                    .unwrap()
                    .add(&QuadraticIrrational::rational(4, 1, th.d().clone()).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs, "trace identity failed at n={n}");
            }
        }
    }

    #[test]
    fn floor_and_frac_match_f64_arithmetic() {
        let x = theta21();
        assert_eq!(x.floor(), BigInt::zero());
        let expected = (-1.0 + 21f64.sqrt()) / 10.0;
        assert!((x.frac_f64() - expected).abs() < 1e-15);
        let y = x.neg();
        assert_eq!(y.floor(), BigInt::from(-1));
        assert!((y.to_f64() + expected).abs() < 1e-15);
    }

    #[test]
    fn parse_display_round_trip() {
        for s in ["(-1+1*sqrt(21))/10", "(1+1*sqrt(5))/2", "(3-2*sqrt(7))/5"] {
            let x: QuadraticIrrational = s.parse().unwrap();
            assert_eq!(x.to_string(), s);
            let again: QuadraticIrrational = x.to_string().parse().unwrap();
            assert_eq!(again, x);
        }
        assert!("(1+sqrt(5))/2".parse::<QuadraticIrrational>().is_err());
        assert!("1+2*sqrt(5)".parse::<QuadraticIrrational>().is_err());
    }

    #[test]
    fn serde_round_trip_uses_uppercase_d() {
        let x = theta21();
        let json = serde_json::to_string(&x).unwrap();
        assert!(json.contains("\"D\":21"), "json was {json}");
        let back: QuadraticIrrational = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<QuadraticIrrational>("{\"p\":1,\"q\":1,\"r\":0,\"D\":5}").is_err());
    }
}
