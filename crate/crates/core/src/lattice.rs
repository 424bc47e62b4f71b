//! The period lattice of a curve over R, with the complex-analytic toolkit
//! built on it: AGM periods, Eisenstein series, the Weierstrass functions
//! wp / wp' / sigma, and elliptic logarithms via Carlson's R_F.
//!
//! Conventions: omega1 is real and positive; Im(omega2 / omega1) > 0; for
//! positive discriminant omega2 is purely imaginary. The curve coordinate
//! and the Weierstrass coordinate differ by the shift x = wp(z) - b2/12,
//! and wp'(z) = 2y + a1 x + a3.

use rug::ops::Pow;
use rug::{Complex, Float, Rational};

use crate::curve::{Curve, Point};
use crate::error::{Error, Result};
use crate::foundation::Config;

pub struct Lattice {
    pub omega1: Float,
    pub omega2: Complex,
    pub tau: Complex,
    /// Nome q = exp(2 pi i tau).
    pub q: Complex,
    /// Roots of 4x^3 + b2 x^2 + 2 b4 x + b6 in the curve's x-coordinate,
    /// real root(s) first; for positive discriminant r0 > r1 > r2.
    pub roots: Vec<Complex>,
    pub disc_positive: bool,
    b2_over_12: Float,
    prec: u32,
}

fn cnew(prec: u32) -> Complex {
    Complex::new(prec)
}

fn cval(prec: u32, f: &Float) -> Complex {
    Complex::with_val(prec, (f, &Float::new(prec)))
}

fn cabs(z: &Complex) -> Float {
    z.clone().abs().into_real_imag().0
}

/// Complex AGM with the standard branch choice: at each step pick the square
/// root with |a' - b'| <= |a' + b'|.
pub fn complex_agm(a0: &Complex, b0: &Complex) -> Complex {
    let prec = a0.prec().0.max(b0.prec().0);
    let mut a = a0.clone();
    let mut b = b0.clone();
    let eps = Float::with_val(prec, 2f64).pow(&Float::with_val(prec, -(prec as i32) + 8));
    for _ in 0..(2 * prec) {
        let diff = cabs(&Complex::with_val(prec, &a - &b));
        let scale = cabs(&a);
        if diff < Float::with_val(prec, &eps * &scale) {
            break;
        }
        let m = Complex::with_val(prec, &a + &b) / 2u32;
        let mut g = Complex::with_val(prec, &a * &b).sqrt();
        let plus = cabs(&Complex::with_val(prec, &m + &g));
        let minus = cabs(&Complex::with_val(prec, &m - &g));
        if minus > plus {
            g = -g;
        }
        a = m;
        b = g;
    }
    a
}

/// Roots of the monic cubic x^3 + c2 x^2 + c1 x + c0 with real coefficients,
/// to working precision. Returns (roots, all_real).
fn cubic_roots(c2: &Float, c1: &Float, c0: &Float, prec: u32) -> (Vec<Complex>, bool) {
    let third = Float::with_val(prec, 1) / 3u32;
    let shift = Float::with_val(prec, c2 * &third);
    // depressed cubic t^3 + a t + b, x = t - c2/3
    let a = c1.clone() - Float::with_val(prec, c2 * c2) * &third;
    let b = {
        let c2f = Float::with_val(prec, c2);
        Float::with_val(prec, 2u32) * c2f.clone().square() * &c2f / 27u32
            - Float::with_val(prec, c2 * c1) * &third
            + c0.clone()
    };
    let disc = Float::with_val(prec, -4i32) * a.clone().square() * &a
        - Float::with_val(prec, 27) * b.clone().square();
    let mut roots: Vec<Complex> = Vec::new();
    let all_real = disc > 0u32;
    if all_real {
        // trigonometric method: three real roots
        let m = Float::with_val(prec, -&a) / 3u32;
        let sm = m.clone().sqrt();
        let arg = {
            let num = Float::with_val(prec, 3u32) * &b / (Float::with_val(prec, 2u32) * &a);
            let inner = (Float::with_val(prec, -3i32) / &a).sqrt();
            let mut c = Float::with_val(prec, num * inner);
            // clamp against rounding drift
            if c > 1u32 {
                c = Float::with_val(prec, 1);
            }
            if c < -1i32 {
                c = Float::with_val(prec, -1);
            }
            c.acos()
        };
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        for k in 0..3u32 {
            let ang = Float::with_val(prec, &arg - Float::with_val(prec, 2 * k) * &pi) / 3u32;
            let t = Float::with_val(prec, 2u32) * &sm * ang.cos();
            roots.push(cval(prec, &Float::with_val(prec, t - &shift)));
        }
    } else {
        // one real root by Cardano
        let half_b = Float::with_val(prec, &b) / 2u32;
        let rad = (half_b.clone().square()
            + a.clone().square() * &a / Float::with_val(prec, 27))
        .sqrt();
        let u3 = Float::with_val(prec, -&half_b) + &rad;
        let u3b = Float::with_val(prec, -half_b) - &rad;
        // pick the larger magnitude for stability
        let big = if u3.clone().abs() >= u3b.clone().abs() { u3 } else { u3b };
        let u = big.cbrt();
        let v = if u.cmp0() == Some(std::cmp::Ordering::Equal) {
            Float::new(prec)
        } else {
            Float::with_val(prec, -&a) / (Float::with_val(prec, 3u32) * &u)
        };
        let t_real = Float::with_val(prec, &u + &v);
        let re = Float::with_val(prec, -&t_real) / 2u32;
        let im = Float::with_val(prec, 3u32).sqrt() / 2u32 * Float::with_val(prec, &u - &v);
        roots.push(cval(prec, &Float::with_val(prec, &t_real - &shift)));
        roots.push(Complex::with_val(
            prec,
            (Float::with_val(prec, &re - &shift), im.clone()),
        ));
        roots.push(Complex::with_val(
            prec,
            (Float::with_val(prec, re - &shift), -im),
        ));
    }
    // Newton polish on the monic cubic
    for r in roots.iter_mut() {
        for _ in 0..8 {
            let f = Complex::with_val(prec, r.clone().pow(3u32))
                + Complex::with_val(prec, r.clone().square()) * c2
                + Complex::with_val(prec, &*r * c1)
                + c0;
            let df = Complex::with_val(prec, r.clone().square()) * 3u32
                + Complex::with_val(prec, &*r * c2) * 2u32
                + c1;
            let step = Complex::with_val(prec, f / df);
            *r -= step;
        }
    }
    (roots, all_real)
}

/// Carlson's symmetric elliptic integral R_F by the duplication algorithm.
pub fn carlson_rf(x0: &Complex, y0: &Complex, z0: &Complex) -> Complex {
    let prec = x0.prec().0;
    let mut x = x0.clone();
    let mut y = y0.clone();
    let mut z = z0.clone();
    let eps = Float::with_val(prec, 2f64).pow(&Float::with_val(prec, -(prec as i32) / 2 - 8));
    for _ in 0..(2 * prec) {
        let sx = x.clone().sqrt();
        let sy = y.clone().sqrt();
        let sz = z.clone().sqrt();
        let lambda = Complex::with_val(prec, &sx * &sy)
            + Complex::with_val(prec, &sy * &sz)
            + Complex::with_val(prec, &sz * &sx);
        x = Complex::with_val(prec, &x + &lambda) / 4u32;
        y = Complex::with_val(prec, &y + &lambda) / 4u32;
        z = Complex::with_val(prec, &z + &lambda) / 4u32;
        let mu = (Complex::with_val(prec, &x + &y) + &z) / 3u32;
        let scale = cabs(&mu);
        let dx = cabs(&Complex::with_val(prec, &x - &mu));
        let dy = cabs(&Complex::with_val(prec, &y - &mu));
        let dz = cabs(&Complex::with_val(prec, &z - &mu));
        if dx < Float::with_val(prec, &eps * &scale)
            && dy < Float::with_val(prec, &eps * &scale)
            && dz < Float::with_val(prec, &eps * &scale)
        {
            break;
        }
    }
    // finish with the degree-5 Carlson series for the tail
    let mu = (Complex::with_val(prec, &x + &y) + &z) / 3u32;
    let xd = Complex::with_val(prec, 1u32) - Complex::with_val(prec, &x / &mu);
    let yd = Complex::with_val(prec, 1u32) - Complex::with_val(prec, &y / &mu);
    let zd = Complex::with_val(prec, -&xd) - &yd;
    let e2 = Complex::with_val(prec, &xd * &yd) - Complex::with_val(prec, &zd * &zd);
    let e3 = Complex::with_val(prec, &xd * &yd) * &zd;
    let one = Complex::with_val(prec, 1u32);
    let series = one
        - Complex::with_val(prec, &e2 / 10u32)
        + Complex::with_val(prec, &e3 / 14u32)
        + Complex::with_val(prec, e2.clone().square() / 24u32)
        - Complex::with_val(prec, Complex::with_val(prec, &e2 * &e3) * 3u32) / 44u32;
    series / mu.sqrt()
}

impl Lattice {
    pub fn new(e: &Curve, cfg: &Config) -> Result<Lattice> {
        let prec = cfg.bits();
        let b2 = e.b2();
        let b4 = e.b4();
        let b6 = e.b6();
        let fq = |q: &Rational| Float::with_val(prec, q);
        // roots of 4x^3 + b2 x^2 + 2 b4 x + b6: monic form has coefficients /4
        let c2 = fq(&Rational::from(&b2 / Rational::from(4)));
        let c1 = fq(&Rational::from(&b4 / Rational::from(2)));
        let c0 = fq(&Rational::from(&b6 / Rational::from(4)));
        let (mut roots, all_real) = cubic_roots(&c2, &c1, &c0, prec);
        let disc = e.discriminant();
        let disc_positive = disc.cmp0() == std::cmp::Ordering::Greater;
        if all_real != disc_positive {
            return Err(Error::Inconsistency(
                "cubic root count disagrees with discriminant sign".into(),
            ));
        }
        if disc_positive {
            // sort descending by real part
            roots.sort_by(|a, b| {
                b.real().partial_cmp(a.real()).unwrap_or(std::cmp::Ordering::Equal)
            });
        } else {
            // real root first, then u + iv with v > 0, then conjugate
            roots.sort_by_key(|r| {
                if r.imag().cmp0() == Some(std::cmp::Ordering::Equal) {
                    0
                } else if r.imag().cmp0() == Some(std::cmp::Ordering::Greater) {
                    1
                } else {
                    2
                }
            });
        }
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let d13 = Complex::with_val(prec, &roots[0] - &roots[2]).sqrt();
        let d12 = Complex::with_val(prec, &roots[0] - &roots[1]).sqrt();
        let d23 = Complex::with_val(prec, &roots[1] - &roots[2]).sqrt();
        let m1 = complex_agm(&d13, &d12);
        let m2 = complex_agm(&d13, &d23);
        let omega1_c = Complex::with_val(prec, cval(prec, &pi) / &m1);
        let omega2_c = Complex::with_val(prec, cval(prec, &pi) / &m2)
            * Complex::with_val(prec, (0, 1));
        // omega1 must be real up to rounding noise
        let tol = Float::with_val(prec, 2f64).pow(&Float::with_val(prec, -(prec as i32) / 2));
        if omega1_c.imag().clone().abs()
            > Float::with_val(prec, &tol * &cabs(&omega1_c))
        {
            return Err(Error::PrecisionExhausted(
                "real period came out non-real".into(),
            ));
        }
        let mut omega1 = omega1_c.real().clone().abs();
        let mut omega2 = omega2_c;
        // enforce Im(omega2/omega1) > 0
        if omega2.imag().cmp0() == Some(std::cmp::Ordering::Less) {
            omega2 = -omega2;
        }
        // for positive discriminant, make omega2 purely imaginary
        if disc_positive {
            omega2 = Complex::with_val(prec, (Float::new(prec), omega2.imag().clone()));
        }
        omega1.abs_mut();
        let tau = Complex::with_val(prec, &omega2 / &cval(prec, &omega1));
        let two_pi_i = Complex::with_val(prec, (Float::new(prec), Float::with_val(prec, 2u32) * &pi));
        let q = Complex::with_val(prec, &two_pi_i * &tau).exp();
        if cabs(&q) >= 1 {
            return Err(Error::Inconsistency("|q| >= 1 in period lattice".into()));
        }
        Ok(Lattice {
            omega1,
            omega2,
            tau,
            q,
            roots,
            disc_positive,
            b2_over_12: fq(&Rational::from(&b2 / Rational::from(12))),
            prec,
        })
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    /// The real period of the curve: the measure of E(R) against the Neron
    /// differential; 2 omega1 when E(R) has two components, omega1 otherwise.
    pub fn real_period(&self) -> Float {
        if self.disc_positive {
            Float::with_val(self.prec, 2u32) * &self.omega1
        } else {
            self.omega1.clone()
        }
    }

    fn eps(&self) -> Float {
        Float::with_val(self.prec, 2f64)
            .pow(&Float::with_val(self.prec, -(self.prec as i32) + 16))
    }

    /// Eisenstein series E_k(tau), k in {2, 4, 6}, by the sigma-divisor series.
    pub fn eisenstein(&self, k: u32) -> Complex {
        let prec = self.prec;
        let coeff: i64 = match k {
            2 => -24,
            4 => 240,
            6 => -504,
            _ => panic!("eisenstein: k must be 2, 4, or 6"),
        };
        let mut sum = cnew(prec);
        let mut qn = Complex::with_val(prec, 1u32);
        let eps = self.eps();
        for n in 1..100_000u32 {
            qn = Complex::with_val(prec, &qn * &self.q);
            let nk = Float::with_val(prec, n).pow(&Float::with_val(prec, k - 1));
            let term = Complex::with_val(prec, &qn * &cval(prec, &nk))
                / (Complex::with_val(prec, 1u32) - &qn);
            sum += &term;
            if cabs(&term) < eps {
                break;
            }
        }
        Complex::with_val(prec, 1u32) + sum * Complex::with_val(prec, coeff)
    }

    /// Quasi-period eta1 = 2 zeta(omega1 / 2) = pi^2 E2(tau) / (3 omega1).
    pub fn eta1(&self) -> Float {
        let prec = self.prec;
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let e2 = self.eisenstein(2);
        let v = Complex::with_val(
            prec,
            &e2 * &cval(prec, &(pi.clone().square() / (Float::with_val(prec, 3u32) * &self.omega1))),
        );
        v.real().clone()
    }

    /// Write z = a omega1 + b omega2 with real a, b.
    pub fn coordinates(&self, z: &Complex) -> (Float, Float) {
        let prec = self.prec;
        let b = Float::with_val(prec, z.imag() / self.omega2.imag());
        let a = (z.real().clone() - Float::with_val(prec, &b * self.omega2.real()))
            / &self.omega1;
        (a, b)
    }

    /// Reduce z modulo the lattice to a, b in [-1/2, 1/2).
    pub fn reduce(&self, z: &Complex) -> Complex {
        let prec = self.prec;
        let (a, b) = self.coordinates(z);
        let ar = a.clone() - a.round();
        let br = b.clone() - b.round();
        Complex::with_val(prec, &cval(prec, &(ar * &self.omega1)))
            + Complex::with_val(prec, &self.omega2 * &cval(prec, &br))
    }

    /// u = exp(2 pi i z / omega1) for a lattice-reduced z.
    fn u_of(&self, z: &Complex) -> Complex {
        let prec = self.prec;
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let two_pi_i =
            Complex::with_val(prec, (Float::new(prec), Float::with_val(prec, 2u32) * &pi));
        (Complex::with_val(prec, &two_pi_i * z) / &cval(prec, &self.omega1)).exp()
    }

    /// Weierstrass wp(z) for the lattice, in the Weierstrass x-coordinate.
    pub fn wp(&self, z: &Complex) -> Result<Complex> {
        let prec = self.prec;
        let z = self.reduce(z);
        if cabs(&z) < self.eps() {
            return Err(Error::Argument("wp at a lattice point".into()));
        }
        let u = self.u_of(&z);
        let one = Complex::with_val(prec, 1u32);
        // sum = 1/12 + u/(1-u)^2 + sum_n [ q^n u/(1-q^n u)^2
        //        + q^n/u/(1-q^n/u)^2 - 2 q^n/(1-q^n)^2 ]
        let mut s = Complex::with_val(prec, Rational::from((1, 12)));
        let du = Complex::with_val(prec, &one - &u);
        s += Complex::with_val(prec, &u / &Complex::with_val(prec, du.square()));
        let uinv = Complex::with_val(prec, &one / &u);
        let mut qn = one.clone();
        let eps = self.eps();
        for _ in 1..100_000u32 {
            qn = Complex::with_val(prec, &qn * &self.q);
            let t1 = {
                let qu = Complex::with_val(prec, &qn * &u);
                let d = Complex::with_val(prec, &one - &qu);
                Complex::with_val(prec, qu / d.square())
            };
            let t2 = {
                let qu = Complex::with_val(prec, &qn * &uinv);
                let d = Complex::with_val(prec, &one - &qu);
                Complex::with_val(prec, qu / d.square())
            };
            let t3 = {
                let d = Complex::with_val(prec, &one - &qn);
                Complex::with_val(prec, &qn / &Complex::with_val(prec, d.square()))
            };
            let term = t1 + t2 - Complex::with_val(prec, &t3 * &Complex::with_val(prec, 2u32));
            s += &term;
            if cabs(&term) < eps && cabs(&qn) < Float::with_val(prec, 0.5) {
                break;
            }
        }
        // wp = (2 pi i / omega1)^2 * s = -(2 pi / omega1)^2 s
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let scale = -(Float::with_val(prec, 2u32) * pi / &self.omega1).square();
        Ok(s * cval(prec, &scale))
    }

    /// wp'(z), normalized so that wp'(z) = 2y + a1 x + a3 on the curve.
    pub fn wp_prime(&self, z: &Complex) -> Result<Complex> {
        let prec = self.prec;
        let z = self.reduce(z);
        if cabs(&z) < self.eps() {
            return Err(Error::Argument("wp' at a lattice point".into()));
        }
        let u = self.u_of(&z);
        let one = Complex::with_val(prec, 1u32);
        let uinv = Complex::with_val(prec, &one / &u);
        // u d/du of the wp series:
        // u(1+u)/(1-u)^3 + sum_n [ q^n u (1 + q^n u)/(1 - q^n u)^3
        //                        - q^n/u (1 + q^n/u)/(1 - q^n/u)^3 ]
        let cu = |w: &Complex| -> Complex {
            let d = Complex::with_val(prec, &one - w);
            let n = Complex::with_val(prec, w * &Complex::with_val(prec, &one + w));
            let d3 = Complex::with_val(prec, d.clone().square()) * d;
            Complex::with_val(prec, n / d3)
        };
        let mut s = cu(&u);
        let mut qn = one.clone();
        let eps = self.eps();
        for _ in 1..100_000u32 {
            qn = Complex::with_val(prec, &qn * &self.q);
            let t1 = cu(&Complex::with_val(prec, &qn * &u));
            let t2 = cu(&Complex::with_val(prec, &qn * &uinv));
            let term = t1 - t2;
            s += &term;
            if cabs(&term) < eps && cabs(&qn) < Float::with_val(prec, 0.5) {
                break;
            }
        }
        // wp' = (2 pi i / omega1)^3 * (u d/du series) = -i (2 pi/omega1)^3 (...)
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let scale = (Float::with_val(prec, 2u32) * pi / &self.omega1).square()
            * (Float::with_val(prec, 2u32)
                * Float::with_val(prec, rug::float::Constant::Pi)
                / &self.omega1);
        let minus_i = Complex::with_val(prec, (0, -1));
        Ok(s * cval(prec, &scale) * minus_i)
    }

    /// Weierstrass sigma(z) by the q-product, including the exp(eta1 z^2 / 2)
    /// factor. Accurate for lattice-reduced z; quasi-periodicity is the
    /// caller's business otherwise.
    pub fn sigma(&self, z: &Complex) -> Result<Complex> {
        let prec = self.prec;
        if cabs(&self.reduce(z)) < self.eps() {
            return Err(Error::Argument("sigma at a lattice point".into()));
        }
        let pi = Float::with_val(prec, rug::float::Constant::Pi);
        let u = self.u_of(z);
        let one = Complex::with_val(prec, 1u32);
        // sigma(z) = (omega1 / 2 pi i) e^{eta1 z^2/(2 omega1)} (u^{1/2} - u^{-1/2})
        //            prod (1 - q^n u)(1 - q^n/u)/(1 - q^n)^2
        let eta1 = self.eta1();
        let quad = (Complex::with_val(prec, z.clone().square())
            * cval(prec, &(eta1 / (Float::with_val(prec, 2u32) * &self.omega1))))
        .exp();
        let pi_i_z =
            Complex::with_val(prec, (Float::new(prec), pi.clone())) * z / cval(prec, &self.omega1);
        let half_u = pi_i_z.clone().exp();
        let half_u_inv = Complex::with_val(prec, -pi_i_z).exp();
        let mut prod = Complex::with_val(prec, &half_u - &half_u_inv);
        let uinv = Complex::with_val(prec, &one / &u);
        let mut qn = one.clone();
        let eps = self.eps();
        for _ in 1..100_000u32 {
            qn = Complex::with_val(prec, &qn * &self.q);
            let f1 = Complex::with_val(prec, &one - &Complex::with_val(prec, &qn * &u));
            let f2 = Complex::with_val(prec, &one - &Complex::with_val(prec, &qn * &uinv));
            let f3 = Complex::with_val(prec, &one - &qn);
            let factor =
                Complex::with_val(prec, &f1 * &f2) / Complex::with_val(prec, f3.square());
            prod *= &factor;
            if cabs(&Complex::with_val(prec, &factor - &one)) < eps {
                break;
            }
        }
        let i = Complex::with_val(prec, (0, 1));
        let front = cval(prec, &(self.omega1.clone() / (Float::with_val(prec, 2u32) * pi)))
            / i;
        Ok(front * quad * prod)
    }

    /// x-coordinate on the curve model from a lattice point.
    pub fn x_of(&self, z: &Complex) -> Result<Complex> {
        Ok(self.wp(z)? - cval(self.prec, &self.b2_over_12))
    }

    /// Elliptic logarithm of a real point: z with wp(z) - b2/12 = x(P) and
    /// wp'(z) = 2y + a1 x + a3, reduced to the fundamental cell.
    pub fn elliptic_log(&self, e: &Curve, p: &Point) -> Result<Complex> {
        let prec = self.prec;
        let (x, y) = match p {
            Point::Infinity => return Ok(cnew(prec)),
            Point::Affine(x, y) => (x, y),
        };
        let xf = Float::with_val(prec, x);
        let on_identity_component = !self.disc_positive
            || xf >= self.roots[0].real().clone() - Float::with_val(prec, 1e-12);
        if on_identity_component {
            let xc = cval(prec, &xf);
            let z = carlson_rf(
                &Complex::with_val(prec, &xc - &self.roots[0]),
                &Complex::with_val(prec, &xc - &self.roots[1]),
                &Complex::with_val(prec, &xc - &self.roots[2]),
            );
            // fix the sign against wp'
            let yb = Rational::from(2 * y.clone())
                + Rational::from(&e.a1 * x)
                + e.a3.clone();
            let z = self.reduce(&z);
            return self.match_sign(&z, &xf, &Float::with_val(prec, &yb));
        }
        // bounded component: 2P lies on the identity component
        let p2 = e.add(p, p);
        if p2.is_infinity() {
            // 2-torsion on the bounded component: z = omega2/2 or omega1/2+omega2/2
            let half2 = Complex::with_val(prec, &self.omega2 / &Complex::with_val(prec, 2u32));
            for cand in [
                half2.clone(),
                Complex::with_val(prec, &half2 + &cval(prec, &(self.omega1.clone() / 2u32))),
            ] {
                if let Ok(xc) = self.x_of(&cand) {
                    if cabs(&Complex::with_val(prec, &xc - &cval(prec, &xf)))
                        < self.tolerance()
                    {
                        return Ok(cand);
                    }
                }
            }
            return Err(Error::Inconsistency("2-torsion log not located".into()));
        }
        let z2 = self.elliptic_log(e, &p2)?;
        let half = Complex::with_val(prec, &z2 / &Complex::with_val(prec, 2u32));
        let yb = Rational::from(2 * y.clone()) + Rational::from(&e.a1 * x) + e.a3.clone();
        let ybf = Float::with_val(prec, &yb);
        let h1 = cval(prec, &(self.omega1.clone() / 2u32));
        let h2 = Complex::with_val(prec, &self.omega2 / &Complex::with_val(prec, 2u32));
        for s in [1i32, -1] {
            for (i, j) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
                let mut cand = Complex::with_val(prec, &half * &Complex::with_val(prec, s));
                if i == 1 {
                    cand += &h1;
                }
                if j == 1 {
                    cand += &h2;
                }
                let cand = self.reduce(&cand);
                if let Ok(z) = self.match_sign(&cand, &xf, &ybf) {
                    return Ok(z);
                }
            }
        }
        Err(Error::Inconsistency(
            "elliptic log: no candidate matched the point".into(),
        ))
    }

    pub fn tolerance(&self) -> Float {
        Float::with_val(self.prec, 2f64)
            .pow(&Float::with_val(self.prec, -(self.prec as i32) / 2))
    }

    /// Accept z (or -z) if wp, wp' reproduce (x, yb) to tolerance.
    fn match_sign(&self, z: &Complex, x: &Float, yb: &Float) -> Result<Complex> {
        let prec = self.prec;
        let tol = {
            let scale = Float::with_val(prec, 1u32)
                + x.clone().abs().max(&yb.clone().abs());
            Float::with_val(prec, &self.tolerance() * &scale)
        };
        for cand in [z.clone(), Complex::with_val(prec, -z)] {
            let xv = self.x_of(&cand)?;
            let yv = self.wp_prime(&cand)?;
            if cabs(&Complex::with_val(prec, &xv - &cval(prec, x))) < tol
                && cabs(&Complex::with_val(prec, &yv - &cval(prec, yb))) < tol
            {
                return Ok(self.reduce(&cand));
            }
        }
        Err(Error::Inconsistency(
            "elliptic log sign match failed".into(),
        ))
    }
}
