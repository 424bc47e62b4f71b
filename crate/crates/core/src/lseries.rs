//! The Hasse–Weil L-function at s = 1: central value, central derivative,
//! analytic rank (restricted to {0, 1}), the real period, and the analytic
//! order of Sha over Q. Also a numeric functional-equation cross-check of
//! the root number.

use rug::ops::Pow;
use rug::{Float, Integer};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::foundation::{exp_integral_e1, Config};
use crate::lattice::Lattice;
use crate::local::{an_coeffs, bad_primes, root_number_semistable};

/// Truncation length for the exponential series at conductor N: enough terms
/// for the tail to fall below the working precision.
pub fn truncation_length(n_conductor: &Integer, cfg: &Config) -> usize {
    let digits = cfg.digits as f64;
    let sqrt_n = n_conductor.to_f64().sqrt();
    let m = ((digits * std::f64::consts::LN_10 + 10.0) * sqrt_n
        / (2.0 * std::f64::consts::PI))
        .ceil() as usize;
    m.max(16)
}

/// The real period Omega_E of the minimal model (measure of E(R)).
pub fn real_period(e: &Curve, cfg: &Config) -> Result<Float> {
    let (emin, _) = e.minimal_model()?;
    Ok(Lattice::new(&emin, cfg)?.real_period())
}

/// Root number determined numerically from the functional equation: the sign
/// for which the theta defect vanishes. Works for any curve (in particular
/// quadratic twists with additive reduction).
pub fn root_number_numeric(e: &Curve, cfg: &Config) -> Result<i32> {
    let prec = cfg.bits();
    let d_plus = theta_defect(e, 1, 1.2, cfg)?.abs();
    let d_minus = theta_defect(e, -1, 1.2, cfg)?.abs();
    let (small, large, w) = if d_plus < d_minus {
        (d_plus, d_minus, 1)
    } else {
        (d_minus, d_plus, -1)
    };
    let tol =
        Float::with_val(prec, Float::with_val(prec, 10u32).pow(-(cfg.digits as i32) / 2));
    if small > tol || large < Float::with_val(prec, 1e-6) {
        return Err(Error::PrecisionExhausted(format!(
            "functional-equation defects {small} / {large} do not determine the root number"
        )));
    }
    Ok(w)
}

/// The root number: the semistable product formula when available, otherwise
/// the numeric functional-equation sign.
pub fn root_number(e: &Curve, cfg: &Config) -> Result<i32> {
    if crate::local::is_semistable(e)? {
        root_number_semistable(e)
    } else {
        root_number_numeric(e, cfg)
    }
}

/// L(E, 1) = (1 + w) sum a_n / n * exp(-2 pi n / sqrt N), where w is the
/// root number; the value is exactly zero for odd parity.
pub fn l_value(e: &Curve, cfg: &Config) -> Result<Float> {
    let prec = cfg.bits();
    let w = root_number(e, cfg)?;
    if w == -1 {
        return Ok(Float::new(prec));
    }
    let n_cond = crate::local::conductor(e)?;
    let m = truncation_length(&n_cond, cfg);
    let a = an_coeffs(e, m)?;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let x = Float::with_val(prec, 2u32) * &pi
        / Float::with_val(prec, &n_cond).sqrt();
    // sum with exponentials by repeated multiplication
    let r = Float::with_val(prec, (-x).exp());
    let mut rn = Float::with_val(prec, 1u32);
    let mut sum = Float::new(prec);
    for (i, &an) in a.iter().enumerate() {
        let n = (i + 1) as u32;
        rn *= &r;
        if an != 0 {
            sum += Float::with_val(prec, an) * &rn / n;
        }
    }
    Ok(sum * 2u32)
}

/// L'(E, 1) = 2 sum a_n / n * E1(2 pi n / sqrt N), valid when L(E, 1) = 0
/// by an odd functional equation.
pub fn l_derivative(e: &Curve, cfg: &Config) -> Result<Float> {
    let prec = cfg.bits();
    let n_cond = crate::local::conductor(e)?;
    let m = truncation_length(&n_cond, cfg);
    let a = an_coeffs(e, m)?;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let x0 = Float::with_val(prec, 2u32) * &pi
        / Float::with_val(prec, &n_cond).sqrt();
    let mut sum = Float::new(prec);
    for (i, &an) in a.iter().enumerate() {
        let n = (i + 1) as u32;
        if an == 0 {
            continue;
        }
        let arg = Float::with_val(prec, &x0 * &Float::with_val(prec, n));
        let e1 = exp_integral_e1(&arg)?;
        sum += Float::with_val(prec, an) * e1 / n;
    }
    Ok(sum * 2u32)
}

/// Numeric functional-equation check: F(t) - w t^{-2} F(1/t) must vanish for
/// F(t) = sum a_n exp(-2 pi n t / sqrt N) and the claimed root number w.
/// Returns the defect, which should be at working-precision scale.
pub fn theta_defect(e: &Curve, w: i32, t: f64, cfg: &Config) -> Result<Float> {
    let prec = cfg.bits();
    let n_cond = crate::local::conductor(e)?;
    // terms for the slower of the two exponentials (t < 1 side)
    let tmin = t.min(1.0 / t);
    let m = (truncation_length(&n_cond, cfg) as f64 / tmin).ceil() as usize;
    let a = an_coeffs(e, m)?;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let base = Float::with_val(prec, 2u32) * &pi
        / Float::with_val(prec, &n_cond).sqrt();
    let f = |tv: &Float| -> Float {
        let r = Float::with_val(prec, (-(base.clone() * tv)).exp());
        let mut rn = Float::with_val(prec, 1u32);
        let mut sum = Float::new(prec);
        for &an in &a {
            rn *= &r;
            if an != 0 {
                sum += Float::with_val(prec, an) * &rn;
            }
        }
        sum
    };
    // F(1/t) = w t^2 F(t), i.e. F(t) - w t^{-2} F(1/t) = 0.
    let tf = Float::with_val(prec, t);
    let tinv = Float::with_val(prec, tf.recip_ref());
    let t2 = Float::with_val(prec, tf.square_ref());
    Ok(f(&tf) - Float::with_val(prec, w) * f(&tinv) / t2)
}

#[derive(Debug, Clone)]
pub struct AnalyticReport {
    pub root_number: i32,
    /// 0 or 1.
    pub analytic_rank: u32,
    /// L(E,1) for rank 0, L'(E,1) for rank 1.
    pub leading_value: Float,
    /// Functional-equation defect F(t) - w t^{-2} F(1/t) at t = 1.2, a
    /// numeric confirmation of the claimed root number.
    pub parity_residual: Float,
}

/// Decide analytic rank 0 or 1 from the root number and (non)vanishing of
/// the central value / derivative. Curves with w = -1 but L'(E,1) = 0 (rank
/// 3 or more) are rejected.
pub fn analytic_rank_01(e: &Curve, cfg: &Config) -> Result<AnalyticReport> {
    let prec = cfg.bits();
    let w = root_number(e, cfg)?;
    let residual = theta_defect(e, w, 1.2, cfg)?;
    let defect_tol =
        Float::with_val(prec, Float::with_val(prec, 10u32).pow(-(cfg.digits as i32) / 2));
    if residual.clone().abs() > defect_tol {
        return Err(Error::Inconsistency(format!(
            "functional-equation defect {residual} contradicts root number {w}"
        )));
    }
    // anything below sqrt(eps) counts as a genuine zero
    let zero_tol = defect_tol;
    if w == 1 {
        let lv = l_value(e, cfg)?;
        if lv.clone().abs() < zero_tol {
            return Err(Error::WrongParity(
                "even functional equation but L(E,1) = 0: analytic rank >= 2".into(),
            ));
        }
        Ok(AnalyticReport {
            root_number: 1,
            analytic_rank: 0,
            leading_value: lv,
            parity_residual: residual,
        })
    } else {
        let ld = l_derivative(e, cfg)?;
        if ld.clone().abs() < zero_tol {
            return Err(Error::WrongParity(
                "L'(E,1) = 0: analytic rank >= 3".into(),
            ));
        }
        Ok(AnalyticReport {
            root_number: -1,
            analytic_rank: 1,
            leading_value: ld,
            parity_residual: residual,
        })
    }
}

/// Analytic order of Sha over Q from the BSD formula, given the regulator
/// (pass 1 for a rank-zero curve).
pub fn analytic_sha_q(e: &Curve, regulator: &Float, cfg: &Config) -> Result<Float> {
    let prec = cfg.bits();
    let report = analytic_rank_01(e, cfg)?;
    let omega = real_period(e, cfg)?;
    let (emin, _) = e.minimal_model()?;
    let tam: u32 = bad_primes(&emin)?.iter().map(|l| l.tamagawa).product();
    let tors = emin.torsion_subgroup()?.order;
    let num = report.leading_value * Float::with_val(prec, tors).square();
    let den = omega * regulator * Float::with_val(prec, tam);
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    fn flit(c: &Config, s: &str) -> Float {
        Float::with_val(c.bits(), Float::parse(s).unwrap())
    }

    #[test]
    fn l_value_11a1_matches_anchor() {
        let c = cfg();
        let e = Curve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        let lv = l_value(&e, &c).unwrap();
        assert!(
            (lv.clone() - flit(&c, "0.25384186")).abs() < Float::with_val(c.bits(), 1e-7)
        );
        // rank-zero identity: L(E,1)/Omega = 1/5 exactly for 11a1
        let omega = real_period(&e, &c).unwrap();
        let ratio = lv / omega;
        let fifth = Float::with_val(c.bits(), 1u32) / 5u32;
        assert!((ratio - fifth).abs() < Float::with_val(c.bits(), 1e-40));
    }

    #[test]
    fn l_derivative_37a1_matches_anchor() {
        let c = cfg();
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let lv = l_value(&e, &c).unwrap();
        assert!(lv.is_zero());
        let ld = l_derivative(&e, &c).unwrap();
        assert!(
            (ld - flit(&c, "0.30599977")).abs() < Float::with_val(c.bits(), 1e-7)
        );
    }

    #[test]
    fn theta_defect_vanishes_with_correct_sign() {
        let c = cfg();
        for (a, w) in [
            ([0i64, 0, 1, -1, 0], -1),
            ([0, -1, 1, -10, -20], 1),
            ([0, 1, 1, 0, 0], -1),
        ] {
            let e = Curve::from_ainvs(a).unwrap();
            let defect = theta_defect(&e, w, 1.2, &c).unwrap();
            assert!(
                defect.clone().abs() < Float::with_val(c.bits(), 1e-40),
                "{a:?}: defect {defect}"
            );
            let wrong = theta_defect(&e, -w, 1.2, &c).unwrap();
            assert!(wrong.abs() > Float::with_val(c.bits(), 1e-6), "{a:?}");
        }
    }

    #[test]
    fn analytic_ranks() {
        let c = cfg();
        let r = analytic_rank_01(&Curve::from_ainvs([0, -1, 1, -10, -20]).unwrap(), &c)
            .unwrap();
        assert_eq!(r.analytic_rank, 0);
        let r = analytic_rank_01(&Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap(), &c).unwrap();
        assert_eq!(r.analytic_rank, 1);
        assert_eq!(r.root_number, -1);
        // 389a1 has rank 2: even parity with vanishing L must be refused
        let err = analytic_rank_01(&Curve::from_ainvs([0, 1, 1, -2, 0]).unwrap(), &c);
        assert!(matches!(err, Err(Error::WrongParity(_))));
        // 5077a1 has rank 3: odd parity with vanishing L' must be refused
        let err = analytic_rank_01(&Curve::from_ainvs([0, 0, 1, -7, 6]).unwrap(), &c);
        assert!(matches!(err, Err(Error::WrongParity(_))));
    }

    #[test]
    fn analytic_sha_11a1_is_one() {
        let c = cfg();
        let e = Curve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        let one = Float::with_val(c.bits(), 1u32);
        let sha = analytic_sha_q(&e, &one, &c).unwrap();
        assert!((sha - 1u32).abs() < Float::with_val(c.bits(), 1e-40));
    }

    #[test]
    fn truncation_grows_with_conductor() {
        let c = cfg();
        let m1 = truncation_length(&Integer::from(11), &c);
        let m2 = truncation_length(&Integer::from(5077), &c);
        assert!(m2 > m1);
        assert!(m1 >= 16);
    }
}
