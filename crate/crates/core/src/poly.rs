//! Dense univariate polynomials over Q, plus the division-polynomial
//! machinery used for torsion, kernel polynomials, and x-coordinate
//! multiplication maps.

use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::foundation::{exact_sqrt_rational, factor};

/// Polynomial over Q, coefficients in ascending degree order, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPoly {
    pub coeffs: Vec<Rational>,
}

impl QPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs
            .last()
            .is_some_and(|c| c.cmp0() == std::cmp::Ordering::Equal)
        {
            coeffs.pop();
        }
        QPoly { coeffs }
    }

    pub fn zero() -> Self {
        QPoly { coeffs: vec![] }
    }

    pub fn one() -> Self {
        QPoly::constant(Rational::from(1))
    }

    pub fn constant(c: Rational) -> Self {
        QPoly::new(vec![c])
    }

    pub fn x() -> Self {
        QPoly::new(vec![Rational::new(), Rational::from(1)])
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        QPoly::new(coeffs.iter().map(|&c| Rational::from(c)).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; zero polynomial reports -1.
    pub fn degree(&self) -> i64 {
        self.coeffs.len() as i64 - 1
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_default()
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(Rational::from(self.coeff(i) + other.coeff(i)));
        }
        QPoly::new(out)
    }

    pub fn neg(&self) -> Self {
        QPoly {
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return QPoly::zero();
        }
        let mut out = vec![Rational::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += Rational::from(a * b);
            }
        }
        QPoly::new(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        QPoly::new(self.coeffs.iter().map(|a| Rational::from(a * c)).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = QPoly::one();
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Euclidean division: self = q * div + r with deg r < deg div.
    pub fn divrem(&self, div: &Self) -> Result<(Self, Self)> {
        if div.is_zero() {
            return Err(Error::Argument("polynomial division by zero".into()));
        }
        let mut rem = self.clone();
        let mut quot = vec![Rational::new(); (self.degree() - div.degree() + 1).max(0) as usize];
        let dl = div.leading();
        while !rem.is_zero() && rem.degree() >= div.degree() {
            let shift = (rem.degree() - div.degree()) as usize;
            let c = Rational::from(rem.leading() / &dl);
            quot[shift] = c.clone();
            // rem -= c * x^shift * div
            let mut sub = vec![Rational::new(); shift];
            sub.extend(div.coeffs.iter().map(|a| Rational::from(a * &c)));
            rem = rem.sub(&QPoly::new(sub));
        }
        Ok((QPoly::new(quot), rem))
    }

    /// Exact division; errors if the remainder is nonzero.
    pub fn exact_div(&self, div: &Self) -> Result<Self> {
        let (q, r) = self.divrem(div)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::Inconsistency("polynomial division not exact".into()))
        }
    }

    pub fn divides(&self, other: &Self) -> bool {
        match other.divrem(self) {
            Ok((_, r)) => r.is_zero(),
            Err(_) => false,
        }
    }

    pub fn evaluate(&self, x: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= x;
            acc += c;
        }
        acc
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return QPoly::zero();
        }
        QPoly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, c)| Rational::from(c * Rational::from(i as i64 + 1)))
                .collect(),
        )
    }

    pub fn gcd(&self, other: &Self) -> Result<Self> {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b)?;
            a = b;
            b = r;
        }
        if a.is_zero() {
            return Ok(a);
        }
        let lead = a.leading();
        Ok(a.scale(&Rational::from(1 / lead)))
    }

    /// Clear denominators: primitive integer-coefficient multiple of self.
    fn integer_coeffs(&self) -> Vec<Integer> {
        let mut lcm = Integer::from(1);
        for c in &self.coeffs {
            lcm = lcm.lcm(c.denom());
        }
        let mut ints: Vec<Integer> = self
            .coeffs
            .iter()
            .map(|c| {
                let scaled = Rational::from(c * Rational::from(&lcm));
                scaled.numer().clone()
            })
            .collect();
        let mut g = Integer::new();
        for c in &ints {
            g = g.gcd(c);
        }
        if g > 1 {
            for c in &mut ints {
                *c /= &g;
            }
        }
        ints
    }

    /// All rational roots, with multiplicity one each (the set of roots).
    pub fn rational_roots(&self) -> Result<Vec<Rational>> {
        if self.is_zero() {
            return Err(Error::Argument("roots of the zero polynomial".into()));
        }
        let ints = self.integer_coeffs();
        // strip the root at 0
        let nz = ints
            .iter()
            .position(|c| c.cmp0() != std::cmp::Ordering::Equal)
            .unwrap();
        let mut roots = Vec::new();
        if nz > 0 {
            roots.push(Rational::new());
        }
        let ints = &ints[nz..];
        if ints.len() <= 1 {
            return Ok(roots);
        }
        let a0 = ints[0].clone().abs();
        let an = ints.last().unwrap().clone().abs();
        let divisors = |n: &Integer| -> Result<Vec<Integer>> {
            let f = factor(n)?;
            let mut out = vec![Integer::from(1)];
            for (p, e) in f {
                let mut next = Vec::new();
                for d in &out {
                    let mut pk = Integer::from(1);
                    for _ in 0..=e {
                        next.push(Integer::from(d * &pk));
                        pk *= p;
                    }
                }
                out = next;
            }
            Ok(out)
        };
        let nums = divisors(&a0)?;
        let dens = divisors(&an)?;
        for num in &nums {
            for den in &dens {
                for sign in [1i32, -1] {
                    let cand = Rational::from((Integer::from(num * sign), den.clone()));
                    if self.evaluate(&cand).cmp0() == std::cmp::Ordering::Equal
                        && !roots.contains(&cand)
                    {
                        roots.push(cand);
                    }
                }
            }
        }
        roots.sort();
        Ok(roots)
    }

    /// Roots that are squares of rationals never matter here, but square
    /// discriminants do: convenience re-export for callers.
    pub fn is_square_value(&self, x: &Rational) -> bool {
        exact_sqrt_rational(&self.evaluate(x)).is_some()
    }
}

/// Division polynomials of a Weierstrass model, in the y-free normal form.
///
/// psi_n = g_n for odd n and g_n * psi_2 for even n, where
/// psi_2^2 = 4x^3 + b2 x^2 + 2 b4 x + b6 =: B. This struct caches the g_n.
pub struct DivisionPolys {
    /// B = psi_2^2.
    pub b: QPoly,
    g: Vec<QPoly>,
}

impl DivisionPolys {
    pub fn new(b2: &Rational, b4: &Rational, b6: &Rational, b8: &Rational) -> Self {
        let b = QPoly::new(vec![
            b6.clone(),
            Rational::from(2 * b4.clone()),
            b2.clone(),
            Rational::from(4),
        ]);
        let g3 = QPoly::new(vec![
            b8.clone(),
            Rational::from(3 * b6.clone()),
            Rational::from(3 * b4.clone()),
            b2.clone(),
            Rational::from(3),
        ]);
        let g4 = QPoly::new(vec![
            Rational::from(b4.clone() * b8 - b6.clone() * b6),
            Rational::from(b2.clone() * b8 - b4.clone() * b6),
            Rational::from(10 * b8.clone()),
            Rational::from(10 * b6.clone()),
            Rational::from(5 * b4.clone()),
            b2.clone(),
            Rational::from(2),
        ]);
        DivisionPolys {
            b,
            g: vec![QPoly::zero(), QPoly::one(), QPoly::one(), g3, g4],
        }
    }

    /// The y-free factor g_n of the n-th division polynomial.
    pub fn g(&mut self, n: usize) -> QPoly {
        while self.g.len() <= n {
            let k = self.g.len();
            let m = k / 2;
            let next = if k % 2 == 1 {
                // k = 2m + 1
                let t1 = self.g(m + 2).mul(&self.g(m).pow(3));
                let t2 = self.g(m - 1).mul(&self.g(m + 1).pow(3));
                let b2 = self.b.pow(2);
                if m % 2 == 0 {
                    t1.mul(&b2).sub(&t2)
                } else {
                    t1.sub(&t2.mul(&b2))
                }
            } else {
                // k = 2m
                let t1 = self.g(m + 2).mul(&self.g(m - 1).pow(2));
                let t2 = self.g(m - 2).mul(&self.g(m + 1).pow(2));
                self.g(m).mul(&t1.sub(&t2))
            };
            self.g.push(next);
        }
        self.g[n].clone()
    }

    /// psi_n^2 as a polynomial in x alone.
    pub fn psi_squared(&mut self, n: usize) -> QPoly {
        let gn = self.g(n);
        let sq = gn.mul(&gn);
        if n % 2 == 0 {
            sq.mul(&self.b)
        } else {
            sq
        }
    }

    /// Numerator and denominator of the multiplication-by-n map on x:
    /// x([n]P) = num(x) / den(x).
    pub fn x_multiple(&mut self, n: usize) -> (QPoly, QPoly) {
        assert!(n >= 1);
        let den = self.psi_squared(n);
        // psi_{n-1} psi_{n+1} is y-free: the two factors share parity in g-form
        let cross = if n % 2 == 0 {
            self.g(n - 1).mul(&self.g(n + 1))
        } else {
            self.g(n - 1).mul(&self.g(n + 1)).mul(&self.b)
        };
        let num = QPoly::x().mul(&den).sub(&cross);
        (num, den)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_roundtrip() {
        let p = QPoly::from_ints(&[2, 0, -3, 1]); // x^3 - 3x^2 + 2
        let q = QPoly::from_ints(&[-1, 1]); // x - 1
        let (quot, rem) = p.divrem(&q).unwrap();
        assert_eq!(quot.mul(&q).add(&rem), p);
        assert_eq!(rem, QPoly::zero()); // 1 is a root
        assert!(q.divides(&p));
        assert!(!QPoly::from_ints(&[1, 1]).divides(&p));
    }

    #[test]
    fn roots() {
        // (2x - 1)(x + 3)(3x + 2)
        let p = QPoly::from_ints(&[-1, 2])
            .mul(&QPoly::from_ints(&[3, 1]))
            .mul(&QPoly::from_ints(&[2, 3]));
        let r = p.rational_roots().unwrap();
        assert_eq!(
            r,
            vec![
                Rational::from(-3),
                Rational::from((-2, 3)),
                Rational::from((1, 2))
            ]
        );
        assert!(QPoly::from_ints(&[1, 0, 1]).rational_roots().unwrap().is_empty());
        // root at zero
        let z = QPoly::from_ints(&[0, 0, 1]);
        assert_eq!(z.rational_roots().unwrap(), vec![Rational::new()]);
    }

    #[test]
    fn gcd_and_derivative() {
        let p = QPoly::from_ints(&[-1, 1]).pow(2).mul(&QPoly::from_ints(&[2, 1]));
        let g = p.gcd(&p.derivative()).unwrap();
        assert_eq!(g, QPoly::from_ints(&[-1, 1])); // the repeated factor, monic
    }

    #[test]
    fn division_polys_37a1() {
        // y^2 + y = x^3 - x: b2 = 0, b4 = -2, b6 = 1, b8 = -1
        let mut dp = DivisionPolys::new(
            &Rational::new(),
            &Rational::from(-2),
            &Rational::from(1),
            &Rational::from(-1),
        );
        // psi_2^2 = 4x^3 - 4x + 1
        assert_eq!(dp.b, QPoly::from_ints(&[1, -4, 0, 4]));
        // psi_3 = 3x^4 - 6x^2 + 3x - 1
        assert_eq!(dp.g(3), QPoly::from_ints(&[-1, 3, -6, 0, 3]));
        // deg psi_n^2 = n^2 - 1 in x
        for n in 2..=11usize {
            assert_eq!(dp.psi_squared(n).degree(), (n * n - 1) as i64);
        }
        // x([2](0,0)) = 1 and x([5](0,0)) = 1/4 on 37a1
        let (n2, d2) = dp.x_multiple(2);
        let x0 = Rational::new();
        assert_eq!(
            Rational::from(n2.evaluate(&x0) / d2.evaluate(&x0)),
            Rational::from(1)
        );
        let (n5, d5) = dp.x_multiple(5);
        assert_eq!(
            Rational::from(n5.evaluate(&x0) / d5.evaluate(&x0)),
            Rational::from((1, 4))
        );
    }

    #[test]
    fn division_polys_consistency() {
        // duplication consistency: x([4]P) = x([2]([2]P)) as rational maps,
        // checked at several sample x-values on 11a1
        // 11a1: y^2 + y = x^3 - x^2 - 10x - 20
        // b2 = -4, b4 = -20, b6 = -79, b8 = -21
        let mut dp = DivisionPolys::new(
            &Rational::from(-4),
            &Rational::from(-20),
            &Rational::from(-79),
            &Rational::from(-21),
        );
        let (n2, d2) = dp.x_multiple(2);
        let (n4, d4) = dp.x_multiple(4);
        for xi in [0i64, 1, 2, 7, -3, 16] {
            let x = Rational::from(xi);
            let d2x = d2.evaluate(&x);
            let d4x = d4.evaluate(&x);
            if d2x.cmp0() == std::cmp::Ordering::Equal
                || d4x.cmp0() == std::cmp::Ordering::Equal
            {
                continue;
            }
            let x2 = Rational::from(n2.evaluate(&x) / d2x);
            let d22 = d2.evaluate(&x2);
            if d22.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            let x22 = Rational::from(n2.evaluate(&x2) / d22);
            let x4 = Rational::from(n4.evaluate(&x) / d4x);
            assert_eq!(x22, x4, "at x = {xi}");
        }
    }

    #[test]
    fn torsion_root_11a1() {
        // 11a1 has a rational 5-torsion point with x = 5; psi_5 vanishes there
        let mut dp = DivisionPolys::new(
            &Rational::from(-4),
            &Rational::from(-20),
            &Rational::from(-79),
            &Rational::from(-21),
        );
        let g5 = dp.g(5);
        assert_eq!(g5.evaluate(&Rational::from(5)).cmp0(), std::cmp::Ordering::Equal);
        assert_eq!(g5.evaluate(&Rational::from(16)).cmp0(), std::cmp::Ordering::Equal);
    }
}
