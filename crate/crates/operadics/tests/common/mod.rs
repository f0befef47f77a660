//! Shared helpers for the integration suites: the fixture corpus and seeded
//! generators for operads, piecewise-linear maps, and ordered tuples.
#![allow(dead_code)]

use std::fs;
use std::path::PathBuf;

use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use operadics::format::parse_operad;
use operadics::interval::{pl_sup, q, tuple_validate, IntervalElement, PLMap, Q};
use operadics::operad::FiniteOperad;

pub const CORPUS_FILES: &[&str] = &[
    "terminal3.operad",
    "c2.operad",
    "c3.operad",
    "rightact.operad",
    "freebin.operad",
    "monoid-free.operad",
    "search-found.operad",
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("read {name}: {e}"))
}

pub fn load_corpus() -> Vec<FiniteOperad> {
    CORPUS_FILES
        .iter()
        .map(|name| {
            parse_operad(&fixture_text(name)).unwrap_or_else(|e| panic!("parse {name}: {e}"))
        })
        .collect()
}

/// A random rational in `[0, 1)` with denominator at most `denom_bound`.
pub fn random_unit_rational(rng: &mut ChaCha20Rng, denom_bound: i64) -> Q {
    let d = rng.random_range(1..=denom_bound);
    let n = rng.random_range(0..d);
    q(n, d)
}

/// A random valid map: up to three interior breakpoints on small-denominator
/// coordinates, nondecreasing values, and a limit that is sometimes exactly 1
/// and sometimes exactly the last value.
pub fn random_plmap(rng: &mut ChaCha20Rng) -> PLMap {
    let interior = rng.random_range(0..=3usize);
    let mut ts: Vec<Q> = vec![Q::from_integer(0.into())];
    let mut extra: Vec<Q> = (0..interior)
        .map(|_| random_unit_rational(rng, 8))
        .filter(|t| *t != ts[0])
        .collect();
    extra.sort();
    extra.dedup();
    ts.extend(extra);
    let mut vs: Vec<Q> = (0..ts.len()).map(|_| random_unit_rational(rng, 8)).collect();
    vs.sort();
    let last = vs.last().unwrap().clone();
    let limit = match rng.random_range(0..4u8) {
        0 => Q::one(),
        1 => last.clone(),
        _ => {
            let f = random_unit_rational(rng, 8);
            &last + (Q::one() - &last) * f
        }
    };
    let points: Vec<(Q, Q)> = ts.into_iter().zip(vs).collect();
    PLMap::new(points, limit).expect("generated breakpoints satisfy the invariants")
}

/// Squeezes a map's values into `[floor, 1)` without moving its breakpoint
/// abscissae, so a chain of such maps forms a valid ordered tuple.
fn rescale_above(f: &PLMap, floor: &Q) -> PLMap {
    let span = Q::one() - floor;
    let points: Vec<(Q, Q)> = f
        .points()
        .iter()
        .map(|(t, v)| (t.clone(), floor + &span * v))
        .collect();
    PLMap::new(points, floor + &span * f.limit()).expect("affine rescale preserves validity")
}

/// A random ordered tuple of the given arity; junctions are exact matches
/// often enough that surjective tuples occur regularly.
pub fn random_tuple(rng: &mut ChaCha20Rng, arity: usize) -> IntervalElement {
    let mut maps: Vec<PLMap> = Vec::with_capacity(arity);
    let mut floor = Q::from_integer(0.into());
    for i in 0..arity {
        // a non-final map whose sup reaches 1 would leave no room for a
        // successor, so keep drawing until the limit stays below 1
        let raw = loop {
            let raw = random_plmap(rng);
            if i + 1 == arity || !raw.limit().is_one() {
                break raw;
            }
        };
        let f = rescale_above(&raw, &floor);
        floor = pl_sup(&f).0;
        maps.push(f);
    }
    tuple_validate(maps).expect("chained maps are ordered")
}

pub fn seeded(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}
