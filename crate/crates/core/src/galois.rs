//! Irreducibility of the mod-p Galois representation on the p-torsion, for
//! small p, decided through kernel polynomials of the p + 1 cyclic subgroups
//! of E[p] computed analytically and certified by exact division into the
//! p-th division polynomial.

use rug::ops::Pow;
use rug::{Complex, Float, Integer};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::foundation::{recognize_rational, Config};
use crate::lattice::Lattice;
use crate::poly::QPoly;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModPImage {
    /// No cyclic subgroup of order p is rational: the representation is
    /// irreducible.
    Irreducible,
    /// A rational p-isogeny exists; the certified kernel polynomial is
    /// attached.
    Reducible(QPoly),
    /// A candidate subgroup had real coefficients that could not be
    /// recognized within the coefficient cap.
    Undecided,
}

const SUPPORTED: [u32; 5] = [3, 5, 7, 11, 13];

/// Decide whether the mod-p representation of E is irreducible.
pub fn mod_p_image(e: &Curve, p: u32, cfg: &Config) -> Result<ModPImage> {
    if !SUPPORTED.contains(&p) {
        return Err(Error::Unsupported(format!(
            "mod-p irreducibility is only implemented for p in {SUPPORTED:?}, got {p}"
        )));
    }
    let prec = cfg.bits();
    let (emin, _) = e.minimal_model()?;
    let lat = Lattice::new(&emin, cfg)?;
    let mut dp = emin.division_polys();
    let psi_p = dp.g(p as usize);
    let tol = lat.tolerance();
    // rational kernel polynomials of minimal models are integral
    let cap = Integer::from(10u64).pow(12);
    let pf = Float::with_val(prec, p);
    let half = (p as usize - 1) / 2;
    let mut undecided = false;

    // subgroup generators: omega1/p and (a omega1 + omega2)/p, a = 0..p-1
    let mut generators: Vec<Complex> = Vec::with_capacity(p as usize + 1);
    generators.push(Complex::with_val(prec, (&lat.omega1, &Float::new(prec))) / &pf);
    for a in 0..p {
        let g = (Complex::with_val(prec, (&lat.omega1, &Float::new(prec)))
            * Float::with_val(prec, a)
            + Complex::with_val(prec, &lat.omega2))
            / &pf;
        generators.push(g);
    }

    'subgroups: for z0 in &generators {
        // roots x(k z0), k = 1..(p-1)/2, one per +-pair
        let mut coeffs = vec![Complex::with_val(prec, 1u32)];
        for k in 1..=half {
            let zk = Complex::with_val(prec, z0 * &Float::with_val(prec, k as u32));
            let root = lat.x_of(&zk)?;
            // multiply the monic polynomial by (x - root)
            coeffs.push(Complex::new(prec));
            for i in (1..coeffs.len()).rev() {
                let shifted = Complex::with_val(prec, &coeffs[i - 1] - &(coeffs[i].clone() * &root));
                coeffs[i] = shifted;
            }
            let c0 = Complex::with_val(prec, &coeffs[0] * &root);
            coeffs[0] = -c0;
        }
        // coeffs is ascending: coeffs[0] the constant term, coeffs[half] = 1
        let mut rat = Vec::with_capacity(half + 1);
        for c in coeffs.iter().take(half) {
            if Float::with_val(prec, c.imag()).abs() > tol {
                continue 'subgroups; // genuinely complex: not rational
            }
            let re = Float::with_val(prec, c.real());
            if re.clone().abs() > Float::with_val(prec, &cap) {
                // too large to recognize reliably at this precision
                undecided = true;
                continue 'subgroups;
            }
            match recognize_rational(&re, &cap) {
                Some(v) => rat.push(v),
                // real but not a small rational: the subgroup is not
                // rational (a rational kernel polynomial would have
                // denominators far below the cap)
                None => continue 'subgroups,
            }
        }
        rat.push(rug::Rational::from(1));
        let f = QPoly::new(rat);
        if f.divides(&psi_p) {
            return Ok(ModPImage::Reducible(f));
        }
        // recognized but fails exact division: numerics too coarse
        undecided = true;
    }
    if undecided {
        Ok(ModPImage::Undecided)
    } else {
        Ok(ModPImage::Irreducible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::default()
    }

    #[test]
    fn curve_37a1_is_irreducible_at_small_primes() {
        let c = cfg();
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        for p in [3u32, 5, 7] {
            assert_eq!(mod_p_image(&e, p, &c).unwrap(), ModPImage::Irreducible, "p={p}");
        }
    }

    #[test]
    fn curve_11a1_has_rational_5_isogeny() {
        let c = cfg();
        let e = Curve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        match mod_p_image(&e, 5, &c).unwrap() {
            ModPImage::Reducible(f) => {
                assert_eq!(f.degree(), 2);
                // the rational 5-torsion points (5, +-...) and (16, ...) have
                // x-coordinates 5 and 16: the kernel polynomial is
                // (x - 5)(x - 16)
                assert!(f.evaluate(&rug::Rational::from(5)).is_zero());
                assert!(f.evaluate(&rug::Rational::from(16)).is_zero());
            }
            other => panic!("expected a 5-isogeny, got {other:?}"),
        }
        assert_eq!(mod_p_image(&e, 7, &c).unwrap(), ModPImage::Irreducible);
    }

    #[test]
    fn rational_3_torsion_gives_reducible_mod_3() {
        let c = cfg();
        // y^2 + y = x^3 has the rational 3-torsion point (0, 0)
        let e = Curve::from_ainvs([0, 0, 1, 0, 0]).unwrap();
        match mod_p_image(&e, 3, &c).unwrap() {
            ModPImage::Reducible(f) => {
                assert_eq!(f.degree(), 1);
                assert!(f.evaluate(&rug::Rational::from(0)).is_zero());
            }
            other => panic!("expected a 3-isogeny, got {other:?}"),
        }
    }

    #[test]
    fn rejects_unsupported_prime() {
        let c = cfg();
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        assert!(mod_p_image(&e, 17, &c).is_err());
    }
}
