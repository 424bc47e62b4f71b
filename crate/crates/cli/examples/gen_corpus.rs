//! Regenerates the bundled curve corpus (`crates/cli/corpus.jsonl`).
//!
//! Enumerates integral Weierstrass models with small coefficients, reduces
//! each to its minimal model, keeps the semistable ones of conductor at
//! most 1000, groups isogenous curves by their trace fingerprint, and
//! computes the analytic rank of one representative per class. Labels are
//! `<conductor><letter>1` with letters assigned per conductor: rank-one
//! classes first, then by coefficient size. Two well-known higher-rank
//! curves are appended by hand as gate-test material.
//!
//! Usage: cargo run --example gen_corpus > crates/cli/corpus.jsonl

use ecbsd::curve::Curve;
use ecbsd::foundation::Config;
use ecbsd::local::{ap, conductor, is_semistable};
use ecbsd::lseries::analytic_rank_01;
use std::collections::BTreeMap;

fn main() {
    let cfg = Config::with_digits(24);
    // minimal-model ainvs -> conductor
    let mut seen: BTreeMap<[i64; 5], u64> = BTreeMap::new();
    for a1 in 0..=1i64 {
        for a2 in -1..=1i64 {
            for a3 in 0..=1i64 {
                for a4 in -20..=20i64 {
                    for a6 in -30..=30i64 {
                        let Ok(e) = Curve::from_ainvs([a1, a2, a3, a4, a6])
                        else {
                            continue;
                        };
                        let Ok((m, _)) = e.minimal_model() else {
                            continue;
                        };
                        let a = m.ainvs();
                        let key: [i64; 5] = std::array::from_fn(|i| {
                            a[i].numer().to_i64().unwrap()
                        });
                        if seen.contains_key(&key) {
                            continue;
                        }
                        let Ok(n) = conductor(&m) else { continue };
                        let Some(n) = n.to_u64() else { continue };
                        if n > 1000 || !is_semistable(&m).unwrap_or(false) {
                            continue;
                        }
                        seen.insert(key, n);
                    }
                }
            }
        }
    }

    // group isogenous curves: same conductor and same a_p for small p
    let mut classes: BTreeMap<(u64, Vec<i64>), Vec<[i64; 5]>> =
        BTreeMap::new();
    for (ai, n) in &seen {
        let e = Curve::from_ainvs(*ai).unwrap();
        let fp: Vec<i64> = [2u64, 3, 5, 7, 11, 13]
            .iter()
            .map(|&p| ap(&e, p).unwrap())
            .collect();
        classes.entry((*n, fp)).or_default().push(*ai);
    }

    // one representative per class: smallest coefficients, except where a
    // standard optimal model is pinned (the conductor-11 class, whose
    // conventional first curve is not the coefficient-minimal one)
    let pinned: [[i64; 5]; 1] = [[0, -1, 1, -10, -20]];
    let mut reps: Vec<(u64, [i64; 5], u32)> = Vec::new();
    for ((n, _), mut models) in classes {
        models.sort_by_key(|a| {
            (a.iter().map(|x| x.abs()).sum::<i64>(), *a)
        });
        let ai = models
            .iter()
            .find(|m| pinned.contains(m))
            .copied()
            .unwrap_or(models[0]);
        let e = Curve::from_ainvs(ai).unwrap();
        let Ok(report) = analytic_rank_01(&e, &cfg) else {
            continue; // rank >= 2 at this conductor range: none expected
        };
        reps.push((n, ai, report.analytic_rank));
    }

    // selection: all rank-one classes up to conductor 110 plus the
    // rank-zero classes up to conductor 26, for roughly 25 entries
    reps.retain(|(n, _, r)| (*r == 1 && *n <= 110) || (*r == 0 && *n <= 26));
    reps.sort_by_key(|(n, ai, r)| {
        (*n, std::cmp::Reverse(*r), ai.iter().map(|x| x.abs()).sum::<i64>())
    });

    let mut out: Vec<(String, [i64; 5], u64, u32)> = Vec::new();
    let mut per_n: BTreeMap<u64, u8> = BTreeMap::new();
    for (n, ai, r) in reps {
        let idx = per_n.entry(n).or_insert(0);
        let letter = (b'a' + *idx) as char;
        *idx += 1;
        out.push((format!("{n}{letter}1"), ai, n, r));
    }
    out.push(("389a1".into(), [0, 1, 1, -2, 0], 389, 2));
    out.push(("5077a1".into(), [0, 0, 1, -7, 6], 5077, 3));

    for (label, ai, n, r) in out {
        println!(
            "{{\"label\":\"{label}\",\"ainvs\":[{},{},{},{},{}],\
             \"conductor\":{n},\"rank\":{r}}}",
            ai[0], ai[1], ai[2], ai[3], ai[4]
        );
    }
}
