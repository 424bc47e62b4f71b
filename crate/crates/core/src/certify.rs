//! Hypothesis gate, assembly of the two-sided bound checks, and
//! certificate emission.
//!
//! A [`Certificate`] records the valuation bookkeeping for one `(curve, p)`
//! pair: the left-hand side `ord_p(L'(E,1) / (Omega * Reg))`, the Tamagawa
//! valuation, their difference (the predicted `ord_p` of the Tate-Shafarevich
//! order), and — at the deeper verification depth — the Heegner-field blocks
//! that witness the upper and lower bounds. Every numeric identity is
//! checked two ways where possible; any mismatch yields a `failed` verdict
//! and any unfinished stage yields `inconclusive`, never `verified`.

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::foundation::{valp, valp_int, Config};
use crate::galois::{mod_p_image, ModPImage};
use crate::heegner::{
    choose_field, gz_valuations, heegner_index, heegner_point, FieldRole,
};
use crate::heights::{canonical_height, generator_rank1};
use crate::local::{ap, bad_primes, conductor, is_semistable};
use crate::lseries::{
    analytic_rank_01, analytic_sha_q, l_derivative, real_period,
};
use crate::padic::{
    control_constant, delta_v, formal_log, round_positive_integer,
    selmer_prediction,
};
use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};
use serde::{Deserialize, Serialize};

/// Three-valued hypothesis flag: some gates can be undecidable at the
/// configured precision, and an undecided gate must never verify.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    True,
    False,
    Undecided,
}

impl Tri {
    pub fn is_true(self) -> bool {
        self == Tri::True
    }
}

/// The hypotheses under which the p-part verification is meaningful.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Squarefree conductor: multiplicative reduction at every bad prime.
    pub semistable: bool,
    /// p does not divide the conductor.
    pub good_at_p: bool,
    /// p >= 5, or p = 3 with ordinary reduction or a_3 = 0.
    pub p_admissible: bool,
    /// The mod-p Galois representation has no rational p-isogeny kernel.
    pub irreducible_mod_p: Tri,
    /// Root number -1 with nonvanishing first derivative.
    pub analytic_rank_one: Tri,
}

impl HypothesisReport {
    pub fn all_true(&self) -> bool {
        self.semistable
            && self.good_at_p
            && self.p_admissible
            && self.irreducible_mod_p.is_true()
            && self.analytic_rank_one.is_true()
    }

    /// The first failing gate, for diagnostics.
    pub fn failing_gate(&self) -> Option<&'static str> {
        if !self.semistable {
            Some("semistable")
        } else if !self.good_at_p {
            Some("good_at_p")
        } else if !self.p_admissible {
            Some("p_admissible")
        } else if !self.irreducible_mod_p.is_true() {
            Some("irreducible_mod_p")
        } else if !self.analytic_rank_one.is_true() {
            Some("analytic_rank_one")
        } else {
            None
        }
    }
}

/// How deep the verification goes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Depth {
    /// Valuation bookkeeping over Q only.
    ValuationOnly,
    /// Additionally run the Heegner-field and p-adic blocks.
    WithHeegner,
}

/// Outcome of a verification run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Verified,
    Failed,
    Inconclusive,
}

/// The two valuations compared by the Gross-Zagier identity.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GzBlock {
    pub lhs_valuation: i64,
    pub rhs_valuation: i64,
    pub matches: bool,
}

/// Data for the imaginary quadratic field in which every bad prime splits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HeegnerBlock {
    pub discriminant: i64,
    pub class_number: u32,
    /// Index of the trace of the Heegner point in the free quotient.
    pub m_index: u32,
    pub gz: GzBlock,
    /// ord_p(#Sha_an(E/K)) <= 2 ord_p(m_index).
    pub kolyvagin_ok: bool,
    /// ord_p of the analytic Sha order over K (product of the two factors
    /// over Q).
    pub sha_k_valuation: u32,
}

/// The lower-bound field, with one bad prime inert. Its quaternionic
/// Heegner system is outside the scope of this artifact, so the block only
/// records the chosen discriminant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KPrimeBlock {
    pub discriminant: i64,
    /// Always false: the point on the associated Shimura curve is not
    /// computed here.
    pub computed: bool,
}

/// The p-adic consistency block.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PadicBlock {
    /// ord_p of the formal logarithm of the generator.
    pub log_valuation: i64,
    /// Nonnegative defect between the log valuation and its lower bound.
    pub delta_v: u32,
    /// The control-theorem constant for the chosen discriminant, when the
    /// twist is p-ordinary.
    pub control_constant: Option<u32>,
    /// Predicted ord_p of the p-Selmer order over the Heegner field.
    pub selmer_prediction: Option<u32>,
}

/// One verification certificate; serialized with this exact field order so
/// that identical inputs yield byte-identical JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate {
    pub label: String,
    pub ainvs: [i64; 5],
    pub conductor: Option<u64>,
    pub prime: u64,
    pub depth: Depth,
    pub hypotheses: Option<HypothesisReport>,
    /// ord_p(L'(E,1) / (Omega * Reg)), recognized exactly.
    pub lhs_valuation: Option<i64>,
    /// ord_p of the product of Tamagawa numbers.
    pub tamagawa_valuation: Option<u32>,
    /// lhs - tamagawa; the p-valuation the formula predicts for #Sha.
    pub sha_p_valuation: Option<i64>,
    /// ord_p of the rounded analytic Sha order, the independent route.
    pub analytic_sha_valuation: Option<u32>,
    pub heegner: Option<HeegnerBlock>,
    pub kprime: Option<KPrimeBlock>,
    pub padic: Option<PadicBlock>,
    pub verdict: Verdict,
    /// The failing stage, when the verdict is not `verified`.
    pub failure: Option<String>,
    /// Which classical results license the inequalities that are consumed
    /// rather than re-proven.
    pub provenance: Vec<String>,
    pub precision_digits: u32,
    pub padic_precision: u32,
    pub version: String,
}

fn blank_certificate(
    label: &str,
    ainvs: [i64; 5],
    p: u64,
    depth: Depth,
    cfg: &Config,
) -> Certificate {
    Certificate {
        label: label.to_string(),
        ainvs,
        conductor: None,
        prime: p,
        depth,
        hypotheses: None,
        lhs_valuation: None,
        tamagawa_valuation: None,
        sha_p_valuation: None,
        analytic_sha_valuation: None,
        heegner: None,
        kprime: None,
        padic: None,
        verdict: Verdict::Inconclusive,
        failure: None,
        provenance: Vec::new(),
        precision_digits: cfg.digits,
        padic_precision: cfg.padic_prec,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Evaluate every hypothesis gate. Never errors: anything that cannot be
/// decided is reported as undecided and blocks verification downstream.
pub fn check_hypotheses(e: &Curve, p: u64, cfg: &Config) -> HypothesisReport {
    let semistable = is_semistable(e).unwrap_or(false);
    let good_at_p = conductor(e)
        .map(|n| !n.is_divisible(&Integer::from(p)))
        .unwrap_or(false);
    let p_admissible = if p >= 5 {
        crate::foundation::is_prime_u64(p)
    } else if p == 3 {
        // ordinary (a_3 not divisible by 3) or exactly supersingular a_3 = 0
        good_at_p
            && match ap(e, 3) {
                Ok(a) => a % 3 != 0 || a == 0,
                Err(_) => false,
            }
    } else {
        false
    };
    let irreducible_mod_p = if !good_at_p {
        Tri::Undecided
    } else {
        match u32::try_from(p).ok().map(|q| mod_p_image(e, q, cfg)) {
            Some(Ok(ModPImage::Irreducible)) => Tri::True,
            Some(Ok(ModPImage::Reducible(_))) => Tri::False,
            _ => Tri::Undecided,
        }
    };
    let analytic_rank_one = match analytic_rank_01(e, cfg) {
        Ok(report) => {
            if report.analytic_rank == 1 {
                Tri::True
            } else {
                Tri::False
            }
        }
        Err(_) => Tri::Undecided,
    };
    HypothesisReport {
        semistable,
        good_at_p,
        p_admissible,
        irreducible_mod_p,
        analytic_rank_one,
    }
}

/// Error kinds that indicate "could not decide" rather than "checked and
/// found false".
fn verdict_for(err: &Error) -> Verdict {
    match err {
        Error::Inconsistency(_) => Verdict::Failed,
        _ => Verdict::Inconclusive,
    }
}

struct ValuationCore {
    lhs: i64,
    tamagawa: u32,
    sha_p: i64,
    analytic_sha: u32,
    generator: crate::curve::Point,
    regulator: rug::Float,
}

fn valuation_core(e: &Curve, p: u64, cfg: &Config) -> Result<ValuationCore> {
    let generator = generator_rank1(e, cfg)?;
    let regulator = canonical_height(e, &generator, cfg)?;
    let ld = l_derivative(e, cfg)?;
    let omega = real_period(e, cfg)?;
    let ratio = ld / (omega * regulator.clone());
    let den_bound = Integer::from(10u64).pow(12);
    let q = crate::foundation::recognize_rational(&ratio, &den_bound)
        .ok_or_else(|| {
            Error::PrecisionExhausted(
                "L'(E,1)/(Omega*Reg) not recognized as a rational".into(),
            )
        })?;
    let lhs = valp(&q, p)?.ok_or_else(|| {
        Error::Inconsistency("vanishing L-ratio at rank one".into())
    })?;
    let pi = Integer::from(p);
    let tamagawa: u32 = bad_primes(e)?
        .iter()
        .map(|ld| valp_int(&Integer::from(ld.tamagawa), &pi))
        .sum();
    let sha_p = lhs - tamagawa as i64;
    let sha_an = round_positive_integer(&analytic_sha_q(e, &regulator, cfg)?)?;
    let analytic_sha = valp_int(&sha_an, &pi);
    Ok(ValuationCore {
        lhs,
        tamagawa,
        sha_p,
        analytic_sha,
        generator,
        regulator,
    })
}

fn heegner_stage(
    e: &Curve,
    p: u64,
    core: &ValuationCore,
    cfg: &Config,
) -> Result<(HeegnerBlock, Option<KPrimeBlock>, PadicBlock)> {
    let setup = choose_field(e, p, FieldRole::KDoublePrime, cfg)?;
    let y = heegner_point(e, &setup, cfg)?;
    let m = heegner_index(e, &y, &core.generator, cfg)?;
    let (gz_lhs, gz_rhs) =
        gz_valuations(e, &setup, m, &core.regulator, p, cfg)?;
    let gz = GzBlock {
        lhs_valuation: gz_lhs,
        rhs_valuation: gz_rhs,
        matches: gz_lhs == gz_rhs,
    };
    // analytic Sha over K is the product of the two rational factors
    let pi = Integer::from(p);
    let tw = e.quadratic_twist(setup.d)?;
    let one = rug::Float::with_val(cfg.bits(), 1u32);
    let sha_tw = round_positive_integer(&analytic_sha_q(&tw, &one, cfg)?)?;
    let sha_k_valuation = core.analytic_sha + valp_int(&sha_tw, &pi);
    let m_val = valp_int(&Integer::from(m), &pi);
    let kolyvagin_ok = sha_k_valuation <= 2 * m_val;

    let kprime = choose_field(e, p, FieldRole::KPrime, cfg)
        .ok()
        .map(|s| KPrimeBlock {
            discriminant: s.d,
            computed: false,
        });

    // for odd p the image of E(Q) + E^D(Q) in E(K) has 2-power index, so
    // the local index correction vanishes
    let index_p = 0u32;
    let log = formal_log(e, &core.generator, p, cfg)?;
    let log_valuation = log.valuation_exact()?;
    let dv = delta_v(e, &core.generator, p, index_p, cfg)?;
    let cw = control_constant(e, p, setup.d, cfg).ok();
    let sp = selmer_prediction(
        e,
        &setup,
        &core.generator,
        index_p,
        &core.regulator,
        p,
        cfg,
    )
    .ok();
    let padic = PadicBlock {
        log_valuation,
        delta_v: dv,
        control_constant: cw,
        selmer_prediction: sp,
    };
    Ok((
        HeegnerBlock {
            discriminant: setup.d,
            class_number: setup.class_number,
            m_index: m,
            gz,
            kolyvagin_ok,
            sha_k_valuation,
        },
        kprime,
        padic,
    ))
}

/// Run the verification pipeline for one `(curve, p)` pair. Never errors:
/// every failure mode is folded into the certificate verdict.
pub fn verify_bsd_p_part(
    label: &str,
    e: &Curve,
    p: u64,
    depth: Depth,
    cfg: &Config,
) -> Certificate {
    let a = e.ainvs();
    let ai = [
        a[0].numer().to_i64().unwrap_or(0),
        a[1].numer().to_i64().unwrap_or(0),
        a[2].numer().to_i64().unwrap_or(0),
        a[3].numer().to_i64().unwrap_or(0),
        a[4].numer().to_i64().unwrap_or(0),
    ];
    let mut cert = blank_certificate(label, ai, p, depth, cfg);
    cert.conductor = conductor(e).ok().and_then(|n| n.to_u64());

    let hyp = check_hypotheses(e, p, cfg);
    cert.hypotheses = Some(hyp);
    if let Some(gate) = hyp.failing_gate() {
        cert.verdict = Verdict::Inconclusive;
        cert.failure = Some(format!("hypothesis gate: {gate}"));
        return cert;
    }

    let core = match valuation_core(e, p, cfg) {
        Ok(c) => c,
        Err(err) => {
            cert.verdict = verdict_for(&err);
            cert.failure = Some(format!("valuation stage: {err}"));
            return cert;
        }
    };
    cert.lhs_valuation = Some(core.lhs);
    cert.tamagawa_valuation = Some(core.tamagawa);
    cert.sha_p_valuation = Some(core.sha_p);
    cert.analytic_sha_valuation = Some(core.analytic_sha);
    if core.sha_p < 0 {
        cert.verdict = Verdict::Failed;
        cert.failure = Some("valuation check: sha valuation negative".into());
        return cert;
    }
    if core.sha_p % 2 != 0 {
        cert.verdict = Verdict::Failed;
        cert.failure = Some("valuation check: sha valuation odd".into());
        return cert;
    }
    if core.sha_p != core.analytic_sha as i64 {
        cert.verdict = Verdict::Failed;
        cert.failure =
            Some("valuation check: two routes to ord_p(#Sha) disagree".into());
        return cert;
    }
    cert.provenance.push(
        "rank-zero twist inputs consumed as nonvanishing L-values \
         (Gross-Zagier; Kolyvagin; Kato; Skinner-Urban)"
            .into(),
    );

    if depth == Depth::WithHeegner {
        match heegner_stage(e, p, &core, cfg) {
            Ok((hb, kp, pb)) => {
                let gz_ok = hb.gz.matches;
                let kol_ok = hb.kolyvagin_ok;
                cert.heegner = Some(hb);
                cert.kprime = kp;
                cert.padic = Some(pb);
                if !gz_ok {
                    cert.verdict = Verdict::Failed;
                    cert.failure =
                        Some("heegner stage: valuation identity".into());
                    return cert;
                }
                if !kol_ok {
                    cert.verdict = Verdict::Failed;
                    cert.failure =
                        Some("heegner stage: upper-bound inequality".into());
                    return cert;
                }
            }
            Err(err) => {
                cert.verdict = verdict_for(&err);
                cert.failure = Some(format!("heegner stage: {err}"));
                return cert;
            }
        }
    }

    cert.verdict = Verdict::Verified;
    cert
}

/// One input row of a batch run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchInput {
    pub label: String,
    pub ainvs: [i64; 5],
}

/// Aggregate counts over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub verified: usize,
    pub failed: usize,
    pub inconclusive: usize,
}

/// Primes attempted by default: the good primes among 3..=13 (the gate
/// rejects the inadmissible ones per curve).
pub const DEFAULT_PRIMES: [u64; 5] = [3, 5, 7, 11, 13];

/// Verify a whole corpus. Jobs run in parallel across `(curve, p)` pairs
/// but the output ordering is deterministic: by (conductor, label, p),
/// independent of the worker count. Per-curve errors are isolated into
/// their certificates.
pub fn batch_verify(
    inputs: &[BatchInput],
    primes: Option<&[u64]>,
    depth: Depth,
    cfg: &Config,
) -> (Summary, Vec<Certificate>) {
    let prime_list: Vec<u64> = primes
        .map(|p| p.to_vec())
        .unwrap_or_else(|| DEFAULT_PRIMES.to_vec());
    // resolve curves up front so the sort key (conductor) is available
    let mut jobs: Vec<(u64, String, u64, std::result::Result<Curve, Error>)> =
        Vec::new();
    for rec in inputs {
        let parsed = Curve::from_ainvs(rec.ainvs);
        let n = parsed
            .as_ref()
            .ok()
            .and_then(|e| conductor(e).ok())
            .and_then(|n| n.to_u64())
            .unwrap_or(u64::MAX);
        for &p in &prime_list {
            jobs.push((n, rec.label.clone(), p, parsed.clone()));
        }
    }
    jobs.sort_by(|a, b| (a.0, &a.1, a.2).cmp(&(b.0, &b.1, b.2)));

    let certs: Vec<Certificate> = jobs
        .par_iter()
        .map(|(_, label, p, parsed)| match parsed {
            Ok(e) => verify_bsd_p_part(label, e, *p, depth, cfg),
            Err(err) => {
                let mut c = blank_certificate(
                    label,
                    [0; 5],
                    *p,
                    depth,
                    cfg,
                );
                c.failure = Some(format!("input stage: {err}"));
                c
            }
        })
        .collect();

    let mut summary = Summary {
        total: certs.len(),
        verified: 0,
        failed: 0,
        inconclusive: 0,
    };
    for c in &certs {
        match c.verdict {
            Verdict::Verified => summary.verified += 1,
            Verdict::Failed => summary.failed += 1,
            Verdict::Inconclusive => summary.inconclusive += 1,
        }
    }
    (summary, certs)
}

/// Render a certificate as compact single-line JSON with the declared
/// field order, the form used for batch output and determinism checks.
pub fn certificate_json(c: &Certificate) -> String {
    serde_json::to_string(c).expect("certificate serialization is total")
}

/// Re-validate a serialized certificate: it must re-parse and its internal
/// arithmetic identities must hold.
pub fn revalidate_json(line: &str) -> Result<Certificate> {
    let c: Certificate = serde_json::from_str(line)
        .map_err(|e| Error::Argument(format!("certificate parse: {e}")))?;
    if let (Some(l), Some(t), Some(s)) =
        (c.lhs_valuation, c.tamagawa_valuation, c.sha_p_valuation)
    {
        if l - t as i64 != s {
            return Err(Error::Inconsistency(
                "certificate identity lhs - tamagawa != sha valuation".into(),
            ));
        }
    }
    if c.verdict == Verdict::Verified {
        match c.sha_p_valuation {
            Some(s) if s >= 0 && s % 2 == 0 => {}
            _ => {
                return Err(Error::Inconsistency(
                    "verified certificate without even nonnegative \
                     sha valuation"
                        .into(),
                ))
            }
        }
    }
    Ok(c)
}

/// Exact rational reconstruction is shared with the CLI for display.
pub fn tamagawa_product(e: &Curve) -> Result<Rational> {
    let mut prod = Rational::from(1);
    for ld in bad_primes(e)? {
        prod *= Rational::from(ld.tamagawa);
    }
    Ok(prod)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> Config {
        Config::with_digits(32)
    }

    #[test]
    fn gate_37a1_5() {
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let h = check_hypotheses(&e, 5, &cfg());
        assert!(h.all_true(), "{h:?}");
    }

    #[test]
    fn gate_rejections() {
        let c = cfg();
        let e11 = Curve::from_ainvs([0, -1, 1, -10, -20]).unwrap();
        let h = check_hypotheses(&e11, 5, &c);
        assert_eq!(h.irreducible_mod_p, Tri::False);
        assert!(!h.all_true());

        let e37 = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let h = check_hypotheses(&e37, 37, &c);
        assert!(!h.good_at_p);
        assert!(!h.all_true());
    }

    #[test]
    fn verify_43a1_7_valuation_only() {
        let e = Curve::from_ainvs([0, 1, 1, 0, 0]).unwrap();
        let cert =
            verify_bsd_p_part("43a1", &e, 7, Depth::ValuationOnly, &cfg());
        assert_eq!(cert.verdict, Verdict::Verified, "{:?}", cert.failure);
        assert_eq!(cert.sha_p_valuation, Some(0));
        assert_eq!(cert.lhs_valuation, Some(0));
    }

    #[test]
    fn verify_389a1_inconclusive() {
        let e = Curve::from_ainvs([0, 1, 1, -2, 0]).unwrap();
        let cert =
            verify_bsd_p_part("389a1", &e, 5, Depth::ValuationOnly, &cfg());
        assert_eq!(cert.verdict, Verdict::Inconclusive);
        assert!(cert
            .failure
            .as_deref()
            .unwrap()
            .contains("analytic_rank_one"));
    }

    #[test]
    fn verify_37a1_5_with_heegner() {
        let e = Curve::from_ainvs([0, 0, 1, -1, 0]).unwrap();
        let cert =
            verify_bsd_p_part("37a1", &e, 5, Depth::WithHeegner, &cfg());
        assert_eq!(cert.verdict, Verdict::Verified, "{:?}", cert.failure);
        assert_eq!(cert.sha_p_valuation, Some(0));
        let hb = cert.heegner.as_ref().unwrap();
        assert_eq!(hb.m_index, 1);
        assert!(hb.gz.matches);
        assert!(hb.kolyvagin_ok);
        let pb = cert.padic.as_ref().unwrap();
        assert_eq!(pb.delta_v, 0);
        // round trip through the JSON schema
        let line = certificate_json(&cert);
        let back = revalidate_json(&line).unwrap();
        assert_eq!(back.verdict, Verdict::Verified);
        assert_eq!(certificate_json(&back), line);
    }

    #[test]
    fn batch_isolated_and_ordered() {
        let inputs = vec![
            BatchInput {
                label: "37a1".into(),
                ainvs: [0, 0, 1, -1, 0],
            },
            BatchInput {
                label: "11a1".into(),
                ainvs: [0, -1, 1, -10, -20],
            },
        ];
        let (summary, certs) =
            batch_verify(&inputs, Some(&[5]), Depth::ValuationOnly, &cfg());
        assert_eq!(summary.total, 2);
        assert_eq!(summary.verified, 1);
        assert_eq!(summary.inconclusive, 1);
        // deterministic ordering by conductor
        assert_eq!(certs[0].label, "11a1");
        assert_eq!(certs[1].label, "37a1");
        assert_eq!(certs[1].verdict, Verdict::Verified);
    }

    #[test]
    fn empty_batch() {
        let (summary, certs) =
            batch_verify(&[], None, Depth::ValuationOnly, &cfg());
        assert_eq!(summary.total, 0);
        assert!(certs.is_empty());
    }
}
