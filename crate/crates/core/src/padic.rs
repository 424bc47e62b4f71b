//! p-adic invariants at a good prime: the formal-group logarithm, local
//! p-torsion orders, the cokernel order delta_v, the control constant C(W),
//! and the anticyclotomic Selmer-order prediction.

use rug::ops::{Pow, RemRounding};
use rug::{Integer, Rational};

use crate::curve::{Curve, Point};
use crate::error::{Error, Result};
use crate::foundation::{kronecker, valp, valp_int, Config, PadicValue};
use crate::heegner::HeegnerSetup;
use crate::local::{ap, bad_primes};
use crate::lseries::analytic_sha_q;

/// Truncated power series over Q, ascending coefficients, fixed length.
#[derive(Debug, Clone)]
struct Series {
    c: Vec<Rational>,
}

impl Series {
    fn zero(m: usize) -> Self {
        Series {
            c: vec![Rational::new(); m + 1],
        }
    }

    fn len(&self) -> usize {
        self.c.len()
    }

    fn mul(&self, other: &Self) -> Self {
        let m = self.len() - 1;
        let mut out = Series::zero(m);
        for (i, a) in self.c.iter().enumerate() {
            if a.cmp0() == std::cmp::Ordering::Equal {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                if i + j > m {
                    break;
                }
                out.c[i + j] += Rational::from(a * b);
            }
        }
        out
    }

    fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (i, b) in other.c.iter().enumerate() {
            out.c[i] += b;
        }
        out
    }

    fn scale(&self, k: &Rational) -> Self {
        Series {
            c: self.c.iter().map(|a| Rational::from(a * k)).collect(),
        }
    }

    /// Multiply by z^s (shift up), truncating.
    fn shift(&self, s: usize) -> Self {
        let m = self.len() - 1;
        let mut out = Series::zero(m);
        for i in 0..=m {
            if i + s > m {
                break;
            }
            out.c[i + s] = self.c[i].clone();
        }
        out
    }

    fn derivative(&self) -> Self {
        let m = self.len() - 1;
        let mut out = Series::zero(m);
        for i in 1..=m {
            out.c[i - 1] = Rational::from(&self.c[i] * &Rational::from(i as u32));
        }
        out
    }

    /// Inverse of a unit series (nonzero constant term).
    fn invert(&self) -> Result<Self> {
        if self.c[0].cmp0() == std::cmp::Ordering::Equal {
            return Err(Error::Argument("series is not a unit".into()));
        }
        let m = self.len() - 1;
        let lead = Rational::from(self.c[0].clone().recip());
        let mut inv = Series::zero(m);
        inv.c[0] = lead.clone();
        for k in 1..=m {
            let mut acc = Rational::new();
            for j in 1..=k {
                acc += Rational::from(&self.c[j] * &inv.c[k - j]);
            }
            inv.c[k] = -acc * &lead;
        }
        Ok(inv)
    }
}

/// The formal-group logarithm lambda(z) = sum c_n z^n in the parameter
/// z = -x/y, with exact rational coefficients.
#[derive(Debug, Clone)]
pub struct FormalLogSeries {
    pub coeffs: Vec<Rational>,
    pub truncation: usize,
}

impl FormalLogSeries {
    /// Expand lambda to m terms from the Weierstrass equation: with
    /// w = -1/y, the curve gives w = z^3 + a1 z w + a2 z^2 w + a3 w^2 +
    /// a4 z w^2 + a6 w^3, solved by iteration; then
    /// lambda'(z) = (-2u - z u') / (u (-2 + a1 z + a3 z^3 u)) for w = z^3 u.
    pub fn new(e: &Curve, m: usize) -> Result<Self> {
        // iterate for u = w / z^3 directly: u = 1 + a1 z u + a2 z^2 u
        //   + a3 z^3 u^2 + a4 z^4 u^2 + a6 z^6 u^3
        let mut u = Series::zero(m);
        u.c[0] = Rational::from(1);
        for _ in 0..=m {
            let u2 = u.mul(&u);
            let u3 = u2.mul(&u);
            let mut next = Series::zero(m);
            next.c[0] = Rational::from(1);
            next = next.add(&u.shift(1).scale(&e.a1));
            next = next.add(&u.shift(2).scale(&e.a2));
            next = next.add(&u2.shift(3).scale(&e.a3));
            next = next.add(&u2.shift(4).scale(&e.a4));
            next = next.add(&u3.shift(6).scale(&e.a6));
            u = next;
        }
        let up = u.derivative();
        // numerator -2u - z u'
        let num = u.scale(&Rational::from(-2)).add(&up.shift(1).scale(&Rational::from(-1)));
        // denominator u * (-2 + a1 z + a3 z^3 u)
        let mut lin = Series::zero(m);
        lin.c[0] = Rational::from(-2);
        lin.c[1] = e.a1.clone();
        let den = u.mul(&lin.add(&u.shift(3).scale(&e.a3)));
        let lp = num.mul(&den.invert()?);
        // integrate
        let mut coeffs = vec![Rational::new(); m + 1];
        for n in 1..=m {
            coeffs[n] = Rational::from(&lp.c[n - 1] / &Rational::from(n as u32));
        }
        Ok(FormalLogSeries {
            coeffs,
            truncation: m,
        })
    }

    /// Exact rational evaluation at z (truncated).
    pub fn evaluate(&self, z: &Rational) -> Rational {
        let mut acc = Rational::new();
        for c in self.coeffs.iter().rev() {
            acc *= z;
            acc += c;
        }
        acc
    }
}

/// ord_p(#E(F_p)) = ord_p(1 - a_p + p); the order of the local p-primary
/// torsion H^0(Q_p, E[p^infty]) for an odd prime of good reduction.
pub fn local_p_torsion(e: &Curve, p: u64) -> Result<u32> {
    let (emin, _) = e.minimal_model()?;
    if emin
        .discriminant()
        .numer()
        .clone()
        .rem_euc(&Integer::from(p))
        .cmp0()
        == std::cmp::Ordering::Equal
    {
        return Err(Error::Argument(format!("bad reduction at {p}")));
    }
    let a = ap(&emin, p)?;
    let count = Integer::from(p) + 1 - a;
    Ok(valp_int(&count, &Integer::from(p)))
}

/// The formal-group logarithm log_omega(P) as a p-adic number: multiply P
/// into the formal group by n = (prime-to-p part of #E(F_p)) * p^k, evaluate
/// lambda at z = -x/y, and divide back by n exactly.
pub fn formal_log(e: &Curve, p0: &Point, p: u64, cfg: &Config) -> Result<PadicValue> {
    let prec = cfg.padic_prec;
    if p0.is_infinity() {
        return Ok(PadicValue::zero(p, prec));
    }
    let (emin, t) = e.minimal_model()?;
    let pi = Integer::from(p);
    if emin.discriminant().numer().clone().rem_euc(&pi).cmp0() == std::cmp::Ordering::Equal {
        return Err(Error::Argument(format!("bad reduction at {p}")));
    }
    let pm = Curve::point_image(&t, p0);
    let a = ap(&emin, p)?;
    let count = Integer::from(p) + 1 - a;
    let e_tors = valp_int(&count, &pi);
    let n0 = count.clone() / pi.clone().pow(e_tors);
    let n0_i = n0.to_i64().ok_or_else(|| {
        Error::Unsupported("point count out of range".into())
    })?;
    let mut q = emin.scalar_mul(n0_i, &pm);
    let mut n = Rational::from(n0);
    let mut guard = 0u32;
    loop {
        match &q {
            Point::Infinity => {
                return Err(Error::DegenerateHeegner(
                    "formal logarithm of a torsion point".into(),
                ))
            }
            Point::Affine(x, _) => {
                // in the formal group iff v_p(x) < 0
                if valp(x, p)?.map(|v| v < 0).unwrap_or(false) {
                    break;
                }
            }
        }
        q = emin.scalar_mul(p as i64, &q);
        n *= Rational::from(p);
        guard += 1;
        if guard > 64 {
            return Err(Error::SearchExhausted(
                "point did not enter the formal group".into(),
            ));
        }
    }
    let Point::Affine(x, y) = &q else { unreachable!() };
    let z = Rational::from(-(x.clone() / y));
    // working precision: target + denominators of c_n + ord_p(n)
    let m = (prec as usize) + 10;
    let series = FormalLogSeries::new(&emin, m)?;
    let value = Rational::from(&series.evaluate(&z) / &n);
    let extra = 2 * (64 - (m as u64).leading_zeros()) + 8;
    PadicValue::from_rational(&value, p, prec + extra)
}

/// All roots of an integer polynomial in Z_p, returned modulo p^prec.
/// Standard branch-and-lift: residues where the Hensel criterion holds are
/// Newton-lifted; multiple residues are recursed into after rescaling.
/// Requires a squarefree polynomial (the recursion depth is then finite).
fn zp_roots(f: &[Integer], p: &Integer, prec: u32, depth: u32) -> Result<Vec<Integer>> {
    if depth == 0 {
        return Err(Error::PrecisionExhausted(
            "p-adic root isolation did not terminate".into(),
        ));
    }
    let eval = |g: &[Integer], x: &Integer, m: &Integer| -> Integer {
        let mut acc = Integer::from(0);
        for c in g.iter().rev() {
            acc = (acc * x + c).rem_euc(m);
        }
        acc
    };
    let modulus = p.clone().pow(prec);
    let deriv: Vec<Integer> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| Integer::from(c * Integer::from(i)))
        .collect();
    let mut roots = Vec::new();
    let pmax = p.to_u32().unwrap_or(u32::MAX);
    for r0 in 0..pmax {
        let mut r = Integer::from(r0);
        if eval(f, &r, p).cmp0() != std::cmp::Ordering::Equal {
            continue;
        }
        let fr = eval(f, &r, &modulus);
        let dr = eval(&deriv, &r, &modulus);
        let vf = if fr.cmp0() == std::cmp::Ordering::Equal {
            prec
        } else {
            valp_int(&fr, p)
        };
        let vd = if dr.cmp0() == std::cmp::Ordering::Equal {
            prec
        } else {
            valp_int(&dr, p)
        };
        if vf > 2 * vd {
            // Newton iteration converges to a unique root above r
            for _ in 0..prec {
                let fr = eval(f, &r, &modulus);
                let dr = eval(&deriv, &r, &modulus);
                let unit = Integer::from(dr.clone() / p.clone().pow(vd));
                let inv = unit.invert(&modulus).map_err(|_| {
                    Error::Inconsistency("Newton step not invertible".into())
                })?;
                let step = Integer::from(fr / p.clone().pow(vd)) * inv;
                r = (r - step).rem_euc(&modulus);
            }
            roots.push(r);
        } else {
            // recurse on g(x) = f(r + p x), with the p-content divided out:
            // g_j = p^j * sum_i f_i * C(i, j) * r^(i-j)
            let mut g: Vec<Integer> = vec![Integer::from(0); f.len()];
            for (i, c) in f.iter().enumerate() {
                for j in 0..=i {
                    let binom = Integer::from(i).binomial((i - j) as u32);
                    g[j] += Integer::from(c * binom)
                        * r.clone().pow((i - j) as u32)
                        * p.clone().pow(j as u32);
                }
            }
            let content = g
                .iter()
                .filter(|c| c.cmp0() != std::cmp::Ordering::Equal)
                .map(|c| valp_int(c, p))
                .min()
                .unwrap_or(0);
            if content >= prec {
                return Err(Error::PrecisionExhausted(
                    "p-adic root isolation lost all precision".into(),
                ));
            }
            let pc = p.clone().pow(content);
            let g: Vec<Integer> = g.iter().map(|c| Integer::from(c / &pc)).collect();
            for s in zp_roots(&g, p, prec, depth - 1)? {
                roots.push((r.clone() + p.clone() * s).rem_euc(&modulus));
            }
        }
    }
    Ok(roots)
}

/// ord_p of H^0(Q_p, E[p^infty]), the p-primary torsion of E(Q_p). For an
/// odd good prime this is 0 or 1 (the Hasse bound caps the p-part of
/// #E(F_p) at p^1), and it is 1 exactly when the p-division polynomial has
/// a Z_p root whose y-coordinates are also p-adic, i.e. whose discriminant
/// quartic value is a square in Q_p.
pub fn h0_local(e: &Curve, p: u64, cfg: &Config) -> Result<u32> {
    let et = local_p_torsion(e, p)?;
    if et == 0 {
        return Ok(0);
    }
    if p == 2 {
        return Err(Error::Unsupported("odd primes only".into()));
    }
    let (emin, _) = e.minimal_model()?;
    let mut dp = emin.division_polys();
    let psi = dp.g(p as usize);
    let coeffs: Vec<Integer> = psi
        .coeffs
        .iter()
        .map(|c| {
            if c.denom() == &Integer::from(1) {
                Ok(c.numer().clone())
            } else {
                Err(Error::Inconsistency(
                    "division polynomial not integral on a minimal model".into(),
                ))
            }
        })
        .collect::<Result<_>>()?;
    let pi = Integer::from(p);
    let prec = cfg.padic_prec.max(20);
    let b2 = emin.b2();
    let b4 = emin.b4();
    let b6 = emin.b6();
    for x0 in zp_roots(&coeffs, &pi, prec, 256)? {
        // y is p-adic iff 4x^3 + b2 x^2 + 2 b4 x + b6 is a square in Q_p
        let x = Rational::from(x0);
        let x2 = Rational::from(&x * &x);
        let x3 = Rational::from(&x2 * &x);
        let d: Rational =
            Rational::from(4) * x3 + b2.clone() * x2 + Rational::from(2) * b4.clone() * x
                + b6.clone();
        let dn = d.numer().clone();
        if dn.cmp0() == std::cmp::Ordering::Equal {
            continue;
        }
        let v = valp_int(&dn, &pi);
        if v as i64 >= prec as i64 - 2 {
            return Err(Error::PrecisionExhausted(
                "discriminant too close to zero at working precision".into(),
            ));
        }
        if v % 2 != 0 {
            continue;
        }
        let unit = Integer::from(&dn / pi.clone().pow(v)).rem_euc(&pi);
        let ui = unit.to_i64().unwrap_or(0);
        if kronecker(ui, p as i64) == 1 {
            return Ok(1);
        }
    }
    Ok(0)
}

/// ord_p of the cokernel delta_v:
///   [v_p(log_omega P) + ord_p(1 - a_p + p) - 1] - index_p - ord_p #H^0(Q_p, E[p^infty]).
pub fn delta_v(e: &Curve, generator: &Point, p: u64, index_p: u32, cfg: &Config) -> Result<u32> {
    let log = formal_log(e, generator, p, cfg)?;
    let v_log = log.valuation_exact()?;
    let e_tors = local_p_torsion(e, p)? as i64;
    let t = h0_local(e, p, cfg)? as i64;
    let val = (v_log + e_tors - 1) - index_p as i64 - t;
    if val < 0 {
        return Err(Error::Inconsistency(format!(
            "delta_v = {val} < 0: unsaturated generator or wrong index"
        )));
    }
    Ok(val as u32)
}

/// ord_p of the control constant C(W) = #H^0(K_v, W) #H^0(K_vbar, W)
/// prod c_w^(p) over split bad primes: with K_v = K_vbar = Q_p this is
/// 2 * ord_p #H^0(Q_p, E[p^infty]) + 2 * sum ord_p(c_l) over bad l split
/// in Q(sqrt D).
pub fn control_constant(e: &Curve, p: u64, d: i64, cfg: &Config) -> Result<u32> {
    if kronecker(d, p as i64) != 1 {
        return Err(Error::Argument(format!(
            "{p} does not split in Q(sqrt {d})"
        )));
    }
    let mut total = 2 * h0_local(e, p, cfg)?;
    let pi = Integer::from(p);
    for ld in bad_primes(e)? {
        if kronecker(d, ld.prime as i64) == 1 {
            total += 2 * valp_int(&Integer::from(ld.tamagawa), &pi);
        }
    }
    Ok(total)
}

/// The predicted ord_p of the anticyclotomic Selmer order:
/// ord_p(#Sha_an(E/K)) + 2 [v_p(((1 - a_p + p)/p) log_omega P) - index_p -
/// ord_p #H^0(Q_p, E[p^infty])], with Sha over K split as
/// Sha(E/Q) x Sha(E^D/Q).
pub fn selmer_prediction(
    e: &Curve,
    setup: &HeegnerSetup,
    generator: &Point,
    index_p: u32,
    regulator: &rug::Float,
    p: u64,
    cfg: &Config,
) -> Result<u32> {
    let sha_q = round_positive_integer(&analytic_sha_q(e, regulator, cfg)?)?;
    let tw = e.quadratic_twist(setup.d)?;
    let one = rug::Float::with_val(cfg.bits(), 1u32);
    let sha_tw = round_positive_integer(&analytic_sha_q(&tw, &one, cfg)?)?;
    let pi = Integer::from(p);
    let sha_val = valp_int(&sha_q, &pi) + valp_int(&sha_tw, &pi);

    let log = formal_log(e, generator, p, cfg)?;
    let v_log = log.valuation_exact()?;
    let e_tors = local_p_torsion(e, p)? as i64;
    let t = h0_local(e, p, cfg)? as i64;
    // v_p(((1 - a_p + p)/p) log P) = e_tors - 1 + v_log
    let corr = (e_tors - 1 + v_log) - index_p as i64 - t;
    let total = sha_val as i64 + 2 * corr;
    if total < 0 {
        return Err(Error::Inconsistency(format!(
            "negative Selmer prediction {total}"
        )));
    }
    Ok(total as u32)
}

/// Round a float that must be a positive integer (analytic Sha orders).
pub fn round_positive_integer(x: &rug::Float) -> Result<Integer> {
    let rounded = x.clone().round();
    let defect = (x.clone() - &rounded).abs();
    if defect > 1e-6 || rounded <= 0 {
        return Err(Error::PrecisionExhausted(format!(
            "{x} is not recognizably a positive integer"
        )));
    }
    Ok(rounded
        .to_integer()
        .ok_or_else(|| Error::PrecisionExhausted("rounding failed".into()))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    fn pt(x: i64, y: i64) -> Point {
        Point::Affine(Rational::from(x), Rational::from(y))
    }

    #[test]
    fn series_coefficients_short_weierstrass() {
        // y^2 = x^3 + a x + b: lambda(z) = z + a/5? The expansion of the
        // invariant differential for [0,0,0,a,b] starts
        // 1 + 2 a z^4 + 3 b z^6 + ..., so c_1 = 1, c_5 = 2a/5, c_7 = 3b/7
        let e = Curve::from_ainvs([0, 0, 0, -1, 1]).unwrap();
        let s = FormalLogSeries::new(&e, 10).unwrap();
        assert_eq!(s.coeffs[1], Rational::from(1));
        assert_eq!(s.coeffs[2], Rational::new());
        assert_eq!(s.coeffs[3], Rational::new());
        assert_eq!(s.coeffs[5], Rational::from((-2, 5)));
        assert_eq!(s.coeffs[7], Rational::from((3, 7)));
    }

    #[test]
    fn n_times_cn_is_p_integral() {
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let s = FormalLogSeries::new(&e, 30).unwrap();
        for (n, c) in s.coeffs.iter().enumerate().skip(1) {
            let nc = Rational::from(c * &Rational::from(n as u32));
            assert_eq!(nc.denom(), &Integer::from(1), "n c_n integral, n = {n}");
        }
    }

    #[test]
    fn log_linearity_37a1_p5() {
        let c = cfg();
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let g = pt(0, 0);
        let base = formal_log(&e, &g, 5, &c).unwrap();
        assert!(base.valuation_exact().unwrap() >= 1);
        for n in 2..=5i64 {
            let ln = formal_log(&e, &e.scalar_mul(n, &g), 5, &c).unwrap();
            let scaled = base.mul(&PadicValue::from_rational(
                &Rational::from(n),
                5,
                base.precision,
            )
            .unwrap());
            let diff = ln.sub(&scaled);
            assert!(
                diff.is_zero() || diff.valuation_exact().unwrap() >= c.padic_prec as i64,
                "n = {n}"
            );
        }
    }

    #[test]
    fn log_of_infinity_is_zero() {
        let c = cfg();
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        assert!(formal_log(&e, &Point::Infinity, 5, &c).unwrap().is_zero());
    }

    #[test]
    fn local_torsion_agrees_with_enumeration() {
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        assert_eq!(local_p_torsion(&e, 5).unwrap(), 0); // #E(F_5) = 8
        for p in [3u64, 5, 7, 11, 13] {
            let count = e.count_points_mod(p);
            assert_eq!(
                local_p_torsion(&e, p).unwrap(),
                valp_int(&Integer::from(count), &Integer::from(p)),
                "p = {p}"
            );
        }
    }

    #[test]
    fn delta_v_37a1_p5_vanishes_and_shifts() {
        let c = cfg();
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let g = pt(0, 0);
        assert_eq!(delta_v(&e, &g, 5, 0, &c).unwrap(), 0);
        // replacing P by 5P raises v_p(log) by one
        let g5 = e.scalar_mul(5, &g);
        assert_eq!(delta_v(&e, &g5, 5, 0, &c).unwrap(), 1);
    }

    #[test]
    fn control_constant_values() {
        let c = cfg();
        let e37 = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        assert_eq!(control_constant(&e37, 5, -11, &c).unwrap(), 0);
        // 11a1 at p = 5 with both 5 and 11 split in Q(sqrt -19): the curve
        // has a rational 5-torsion point (5, 5), so H^0(Q_5, E[5^inf]) has
        // order 5, and c_11 = 5, giving ord_5 C(W) = 2*1 + 2*1 = 4
        let e11 = Curve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        assert_eq!(local_p_torsion(&e11, 5).unwrap(), 1);
        assert_eq!(control_constant(&e11, 5, -19, &c).unwrap(), 4);
        // p inert is a hypothesis violation: kron(-7, 5) = -1
        assert!(control_constant(&e37, 5, -7, &c).is_err());
    }

    #[test]
    fn h0_local_detects_rational_p_torsion() {
        let c = cfg();
        // 11a1 has the rational 5-torsion point (5, 5)
        let e11 = Curve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        assert_eq!(h0_local(&e11, 5, &c).unwrap(), 1);
        // 37a1 is not anomalous at 5, so H^0 is trivial outright
        let e37 = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        assert_eq!(h0_local(&e37, 5, &c).unwrap(), 0);
        // 43a1 is anomalous at 5 (#E(F_5) = 10) but has no 5-torsion
        // over Q_5: the mod-5 representation is irreducible
        let e43 = Curve::from_ainvs([0, 1, 1, 0, 0]).unwrap();
        assert_eq!(local_p_torsion(&e43, 5).unwrap(), 1);
        assert_eq!(h0_local(&e43, 5, &c).unwrap(), 0);
        // 61a1 is anomalous at 7, likewise with trivial H^0
        let e61 = Curve::from_ainvs([1, 0, 0, -2, 1]).unwrap();
        assert_eq!(local_p_torsion(&e61, 7).unwrap(), 1);
        assert_eq!(h0_local(&e61, 7, &c).unwrap(), 0);
    }

    #[test]
    fn integer_outputs_stable_under_precision_doubling() {
        let mut c20 = cfg();
        c20.padic_prec = 20;
        let mut c40 = cfg();
        c40.padic_prec = 40;
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let g = pt(0, 0);
        for p in [3u64, 5, 7] {
            let v20 = formal_log(&e, &g, p, &c20)
                .unwrap()
                .valuation_exact()
                .unwrap();
            let v40 = formal_log(&e, &g, p, &c40)
                .unwrap()
                .valuation_exact()
                .unwrap();
            assert_eq!(v20, v40, "p = {p}");
            assert_eq!(
                delta_v(&e, &g, p, 0, &c20).unwrap(),
                delta_v(&e, &g, p, 0, &c40).unwrap()
            );
        }
    }
}
