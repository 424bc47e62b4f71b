//! Heegner points on rank-one curves: choice of the imaginary quadratic
//! field, binary quadratic forms above the conductor, the trace of the
//! modular parametrization over the class group, the index of the resulting
//! rational point, and the Gross–Zagier valuation identity.

use rug::ops::Pow;
use rug::{Complex, Float, Integer};

use crate::curve::{Curve, Point};
use crate::error::{Error, Result};
use crate::foundation::{is_fundamental_discriminant, kronecker, recognize_rational, Config};
use crate::heights::canonical_height;
use crate::lattice::Lattice;
use crate::local::{an_coeffs, bad_primes, conductor};
use crate::lseries::{l_derivative, l_value, real_period};

/// A primitive integral binary quadratic form A x^2 + B x y + C y^2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Form {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl Form {
    fn disc(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }
}

/// Gauss reduction of a positive definite form.
pub fn reduce_form(f: Form) -> Form {
    let mut a = f.a;
    let mut b = f.b;
    let d = f.disc();
    loop {
        // normalize: -a < b <= a
        let mut bn = b.rem_euclid(2 * a);
        if bn > a {
            bn -= 2 * a;
        }
        b = bn;
        let c = (b * b - d) / (4 * a);
        if c < a {
            let (na, nb) = (c, -b);
            a = na;
            b = nb;
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        return Form { a, b, c };
    }
}

/// All reduced primitive forms of a negative fundamental discriminant: one
/// per ideal class.
pub fn reduced_forms(d: i64) -> Result<Vec<Form>> {
    if d >= 0 || !is_fundamental_discriminant(d) {
        return Err(Error::Argument(format!(
            "{d} is not a negative fundamental discriminant"
        )));
    }
    let mut out = Vec::new();
    let bmax = ((-d) as f64 / 3.0).sqrt() as i64 + 1;
    for b in 0..=bmax {
        if (b * b - d) % 4 != 0 {
            continue;
        }
        let ac = (b * b - d) / 4;
        let mut a = if b == 0 { 1 } else { b };
        if a == 0 {
            a = 1;
        }
        while a * a <= ac {
            if a != 0 && ac % a == 0 {
                let c = ac / a;
                if a >= b && gcd3(a, b, c) == 1 {
                    out.push(Form { a, b, c });
                    if b > 0 && b < a && a < c {
                        out.push(Form { a, b: -b, c });
                    }
                }
            }
            a += 1;
        }
    }
    out.sort_by_key(|f| (f.a, f.b));
    Ok(out)
}

fn gcd3(a: i64, b: i64, c: i64) -> i64 {
    gcd(gcd(a.abs(), b.abs()), c.abs())
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Heegner forms for conductor N and discriminant D: one form per ideal
/// class with N | A and a common residue B mod 2N (so that tau = (-B +
/// sqrt(D)) / (2A) lies on the correct cusp for each class).
pub fn heegner_forms(n: i64, d: i64) -> Result<Vec<Form>> {
    let classes = reduced_forms(d)?;
    let h = classes.len();
    // B odd (D odd) with B^2 = D mod 4N, found by direct search
    let beta = (1..=2 * n)
        .find(|b| (b * b - d).rem_euclid(4 * n) == 0)
        .ok_or_else(|| {
            Error::Argument(format!("{d} is not a square modulo 4*{n}"))
        })?;
    let mut picked: Vec<Form> = Vec::with_capacity(h);
    let mut seen: Vec<Form> = Vec::with_capacity(h);
    let mut a_mult = 1i64;
    while picked.len() < h {
        if a_mult > 4_000 {
            return Err(Error::SearchExhausted(format!(
                "could not reach all {h} classes with forms of discriminant {d} above {n}"
            )));
        }
        let a = n * a_mult;
        let mut b = beta.rem_euclid(2 * n);
        // scan the residue class beta mod 2N across |B| <= A
        while b <= a {
            for bb in [b, -b] {
                if bb == -b && b == 0 {
                    continue;
                }
                if (bb * bb - d).rem_euclid(4 * a) != 0 {
                    continue;
                }
                let c = (bb * bb - d) / (4 * a);
                let f = Form { a, b: bb, c };
                if gcd3(a, bb, c) != 1 {
                    continue;
                }
                let red = reduce_form(f);
                if !seen.contains(&red) {
                    seen.push(red);
                    picked.push(f);
                }
            }
            b += 2 * n;
        }
        a_mult += 1;
    }
    Ok(picked)
}

/// Which auxiliary field is being selected: K-prime is the lower-bound field
/// (bad primes inert; logged only, no modular-curve point exists for it at
/// squarefree level), K-doubleprime the classical field with every bad prime
/// split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldRole {
    KPrime,
    KDoublePrime,
}

/// The chosen Heegner setup for a curve and a certification prime.
#[derive(Debug, Clone)]
pub struct HeegnerSetup {
    pub d: i64,
    pub role: FieldRole,
    pub forms: Vec<Form>,
    pub class_number: u32,
}

/// Build the setup directly from a discriminant that is assumed admissible
/// for the curve (all primes dividing N split); only the arithmetic
/// conditions that are needed to construct forms are re-checked.
pub fn setup_for_discriminant(e: &Curve, d: i64) -> Result<HeegnerSetup> {
    let n_cond = conductor(e)?;
    let n = n_cond.to_i64().ok_or_else(|| {
        Error::Unsupported("conductor out of range".into())
    })?;
    let forms = heegner_forms(n, d)?;
    let h = forms.len() as u32;
    Ok(HeegnerSetup {
        d,
        role: FieldRole::KDoublePrime,
        forms,
        class_number: h,
    })
}

/// Choose the smallest admissible auxiliary discriminant for (E, p):
/// fundamental D < 0 coprime to 2 N p with p split. For K-doubleprime every
/// bad prime splits and the twist L-value is checked to be nonzero; for
/// K-prime the smallest bad prime is inert (the field is logged only).
pub fn choose_field(
    e: &Curve,
    p: u64,
    role: FieldRole,
    cfg: &Config,
) -> Result<HeegnerSetup> {
    let n_cond = conductor(e)?;
    let n = n_cond.to_i64().ok_or_else(|| {
        Error::Unsupported("conductor out of range".into())
    })?;
    let bad: Vec<i64> = bad_primes(e)?.iter().map(|l| l.prime as i64).collect();
    let mut d: i64 = -3;
    while -d <= cfg.disc_bound {
        d -= 4;
        // odd fundamental discriminants are exactly the squarefree d = 1 mod 4
        if !is_fundamental_discriminant(d) || d.rem_euclid(2) == 0 {
            continue;
        }
        if gcd(-d, 2 * n * p as i64) != 1 {
            continue;
        }
        let splits = match role {
            // every bad prime splits
            FieldRole::KDoublePrime => bad.iter().all(|&l| kronecker(d, l) == 1),
            // the smallest bad prime is inert, the remaining ones split
            FieldRole::KPrime => {
                kronecker(d, bad[0]) == -1
                    && bad[1..].iter().all(|&l| kronecker(d, l) == 1)
            }
        };
        if !splits || kronecker(d, p as i64) != 1 {
            continue;
        }
        match role {
            FieldRole::KDoublePrime => {
                // the twist must have analytic rank zero
                let tw = e.quadratic_twist(d)?;
                let lv = l_value(&tw, cfg)?;
                let tol = Float::with_val(
                    cfg.bits(),
                    Float::with_val(cfg.bits(), 10u32)
                        .pow(-(cfg.digits as i32) / 2),
                );
                if lv.abs() < tol {
                    continue;
                }
                return setup_for_discriminant(e, d);
            }
            // no modular-curve Heegner system exists at inert level, so no
            // point (nor twist L-value) is computed; with the forced root
            // numbers the twist nonvanishing holds generically and the
            // discriminant alone is recorded
            FieldRole::KPrime => {
                return Ok(HeegnerSetup {
                    d,
                    role,
                    forms: Vec::new(),
                    class_number: reduced_forms(d)?.len() as u32,
                })
            }
        }
    }
    Err(Error::SearchExhausted(format!(
        "no admissible Heegner discriminant up to {}",
        cfg.disc_bound
    )))
}

/// Evaluate the modular parametrization phi(tau) = sum a_n / n q^n.
fn phi(a: &[i64], q: &Complex, prec: u32) -> Complex {
    let mut qn = Complex::with_val(prec, 1u32);
    let mut sum = Complex::new(prec);
    for (i, &an) in a.iter().enumerate() {
        let n = (i + 1) as u32;
        qn *= q;
        if an != 0 {
            sum += Complex::with_val(prec, &qn * &Float::with_val(prec, an)) / n;
        }
    }
    sum
}

/// The trace of the Heegner point over the class group, as a rational point
/// on the (minimalized) curve.
pub fn heegner_point(e: &Curve, setup: &HeegnerSetup, cfg: &Config) -> Result<Point> {
    let prec = cfg.bits();
    let (emin, t_model) = e.minimal_model()?;
    let lat = Lattice::new(&emin, cfg)?;
    let disc_abs = Float::with_val(prec, -setup.d).sqrt();

    // terms needed for the slowest-converging form
    let a_min = setup.forms.iter().map(|f| f.a).max().unwrap_or(1);
    let im_min = (-setup.d as f64).sqrt() / (2.0 * a_min as f64);
    let m_terms = (((cfg.digits as f64) * std::f64::consts::LN_10 + 10.0)
        / (2.0 * std::f64::consts::PI * im_min))
        .ceil() as usize;
    let a = an_coeffs(&emin, m_terms.max(16))?;

    let two_pi = Float::with_val(prec, rug::float::Constant::Pi) * 2u32;
    let mut z = Complex::new(prec);
    for f in &setup.forms {
        // tau = (-B + sqrt D) / (2A)
        let re = Float::with_val(prec, -f.b) / Float::with_val(prec, 2 * f.a);
        let im = disc_abs.clone() / Float::with_val(prec, 2 * f.a);
        // q = exp(2 pi i tau)
        let angle = Float::with_val(prec, &two_pi * &re);
        let radius = Float::with_val(prec, (-(Float::with_val(prec, &two_pi * &im))).exp());
        let q = Complex::with_val(
            prec,
            (
                Float::with_val(prec, angle.cos_ref()) * &radius,
                Float::with_val(prec, angle.sin_ref()) * &radius,
            ),
        );
        z += phi(&a, &q, prec);
    }

    let zred = lat.reduce(&z);
    let tol = lat.tolerance() * Float::with_val(prec, 1u32 << 16);
    let im_half = Float::with_val(prec, lat.omega2.imag()) / 2u32;
    let zim = Float::with_val(prec, zred.imag());
    // candidates for the real representative of the trace
    let zre = Float::with_val(prec, zred.real());
    let t_point: Complex = if zim.clone().abs() < tol {
        Complex::with_val(prec, (&zre, &Float::new(prec)))
    } else if (zim.clone() - &im_half).abs() < tol && lat.disc_positive {
        // bounded real component
        Complex::with_val(prec, (&zre, &im_half))
    } else {
        // fall back to the trace plus its conjugate (twice the point)
        Complex::with_val(prec, (Float::with_val(prec, 2u32) * &zre, &Float::new(prec)))
    };

    // torsion trace: z at a lattice point gives the point at infinity
    let treduced = lat.reduce(&t_point);
    let tabs = Complex::with_val(prec, treduced.abs_ref()).real().clone();
    if tabs < tol {
        return Err(Error::DegenerateHeegner(
            "the Heegner trace is a torsion point".into(),
        ));
    }

    let xc = lat.x_of(&treduced)?;
    if Float::with_val(prec, xc.imag()).abs() > tol {
        return Err(Error::PrecisionExhausted(
            "Heegner point has a non-real x-coordinate".into(),
        ));
    }
    let xr = Float::with_val(prec, xc.real());
    let den_bound = Integer::from(10u64).pow(15);
    let xq = recognize_rational(&xr, &den_bound).ok_or_else(|| {
        Error::PrecisionExhausted(
            "could not recognize the Heegner x-coordinate as rational".into(),
        )
    })?;
    // pick the lift matching the analytic y = (wp' - a1 x - a3)/2
    let wp_prime = lat.wp_prime(&treduced)?;
    let y_analytic = (Float::with_val(prec, wp_prime.real())
        - cfg.float_from_rational(&emin.a1) * Float::with_val(prec, &xr)
        - cfg.float_from_rational(&emin.a3))
        / 2u32;
    let lifts = emin.lift_x(&xq);
    if lifts.is_empty() {
        return Err(Error::PrecisionExhausted(
            "recognized Heegner x-coordinate does not lift to the curve".into(),
        ));
    }
    let mut best: Option<(Float, Point)> = None;
    for cand in lifts {
        let Point::Affine(_, y) = &cand else { continue };
        let diff = (cfg.float_from_rational(y) - y_analytic.clone()).abs();
        if best.as_ref().map(|(d, _)| diff < *d).unwrap_or(true) {
            best = Some((diff, cand));
        }
    }
    let (_, point_min) = best.expect("nonempty lift set");
    // map back to the input model
    Ok(Curve::point_image(&t_model.inverse(), &point_min))
}

/// The Heegner index: y_K = m * generator modulo torsion; m is certified by
/// exact point arithmetic after a square-ratio test on canonical heights.
pub fn heegner_index(
    e: &Curve,
    y_k: &Point,
    generator: &Point,
    cfg: &Config,
) -> Result<u32> {
    let prec = cfg.bits();
    let hy = canonical_height(e, y_k, cfg)?;
    let hg = canonical_height(e, generator, cfg)?;
    if hg.is_zero() {
        return Err(Error::Argument("generator is torsion".into()));
    }
    if hy.is_zero() {
        return Err(Error::DegenerateHeegner(
            "Heegner trace has height zero".into(),
        ));
    }
    let ratio = Float::with_val(prec, &hy / &hg);
    let m = ratio
        .clone()
        .sqrt()
        .to_f64()
        .round() as i64;
    if m < 1 {
        return Err(Error::DegenerateHeegner("index rounds to zero".into()));
    }
    let defect = (ratio - Float::with_val(prec, m * m)).abs();
    if defect > Float::with_val(prec, 1e-6) {
        return Err(Error::DegenerateHeegner(format!(
            "height ratio is not a perfect square (defect {defect})"
        )));
    }
    // exact certification: y_K -+ m gen must be torsion
    for sign in [m, -m] {
        let diff = e.add(y_k, &e.negate(&e.scalar_mul(sign, generator)));
        if diff.is_infinity() || e.point_order(&diff, 16).is_some() {
            return Ok(m as u32);
        }
    }
    Err(Error::Inconsistency(
        "height ratio is a square but the index is not certified by point arithmetic".into(),
    ))
}

/// Both sides of the Gross–Zagier valuation identity at an odd prime p not
/// dividing D:
///   ord_p( L'(E,1) / (Omega Reg) * L(E^D,1) / Omega_D ) = ord_p( m_K^2 ).
/// Returns (lhs, rhs) valuations; callers compare.
pub fn gz_valuations(
    e: &Curve,
    setup: &HeegnerSetup,
    m_index: u32,
    regulator: &Float,
    p: u64,
    cfg: &Config,
) -> Result<(i64, i64)> {
    let _prec = cfg.bits();
    let ld = l_derivative(e, cfg)?;
    let omega = real_period(e, cfg)?;
    let tw = e.quadratic_twist(setup.d)?;
    let ltw = l_value(&tw, cfg)?;
    let omega_tw = real_period(&tw, cfg)?;
    let value = ld / (omega * regulator.clone()) * ltw / omega_tw;
    let den_bound = Integer::from(10u64).pow(12);
    let q = recognize_rational(&value, &den_bound).ok_or_else(|| {
        Error::PrecisionExhausted(format!(
            "Gross–Zagier ratio {value} is not recognizably rational"
        ))
    })?;
    let lhs = crate::foundation::valp(&q, p)?.ok_or_else(|| {
        Error::Inconsistency("Gross–Zagier ratio is zero".into())
    })?;
    let m2 = Integer::from(m_index) * Integer::from(m_index);
    let rhs = crate::foundation::valp_int(&m2, &Integer::from(p)) as i64;
    Ok((lhs, rhs))
}
