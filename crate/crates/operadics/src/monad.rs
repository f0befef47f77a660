//! The monad a truncated operad induces on finite sets.
//!
//! For an operad `P` with bound `N` and a finite set `X = {0..k-1}`, the
//! monad carrier is `SX = Σ_{n ≤ N} P(n) × X^n`; terms are pairs of an
//! operad element and a variable list. Multiplication composes the operad
//! elements and concatenates variable lists, and is partial: it exists when
//! the composite arity stays within the bound. All law checks here quantify
//! over exactly the instances where every evaluation order is defined.
//!
//! `iota` reverses variable lists. It compares the monad of `P` with the
//! monad of the reverse operad: the checks in [`check_iota_monad_iso`]
//! verify the unit and multiplication squares for that comparison.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::operad::{ElemRef, enumerate_morphisms, FiniteOperad, OperadError, OperadMorphism};
use crate::report::LawReport;

/// Seed used when a scan falls back to random sampling.
pub const DEFAULT_SCAN_SEED: u64 = 0x0c0ffee;

/// How a law scan covers the term space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanPolicy {
    Exhaustive,
    Sampled { seed: u64, samples: usize },
}

impl ScanPolicy {
    /// Exhaustive up to `|X| = 3`, seeded sampling beyond.
    pub fn default_for(x_size: usize) -> ScanPolicy {
        if x_size <= 3 {
            ScanPolicy::Exhaustive
        } else {
            ScanPolicy::Sampled {
                seed: DEFAULT_SCAN_SEED,
                samples: 4000,
            }
        }
    }
}

/// An element of `SX`: an operad element with one variable per input slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonadTerm {
    pub op: ElemRef,
    pub xs: Vec<usize>,
}

impl MonadTerm {
    pub fn new(op: ElemRef, xs: Vec<usize>) -> MonadTerm {
        debug_assert_eq!(op.arity, xs.len());
        MonadTerm { op, xs }
    }
}

/// An element of `S(SX)` admissible for multiplication: the inner arities
/// sum to at most the truncation bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NestedTerm {
    pub op: ElemRef,
    pub inner: Vec<MonadTerm>,
}

impl NestedTerm {
    pub fn new(op: ElemRef, inner: Vec<MonadTerm>) -> NestedTerm {
        debug_assert_eq!(op.arity, inner.len());
        NestedTerm { op, inner }
    }

    /// Sum of the inner operad-element arities, the arity of any composite.
    pub fn total_arity(&self) -> usize {
        self.inner.iter().map(|t| t.op.arity).sum()
    }
}

pub fn format_term(op: &FiniteOperad, t: &MonadTerm) -> String {
    let vars: Vec<String> = t.xs.iter().map(|x| format!("x{x}")).collect();
    format!("({}, [{}])", op.label(t.op), vars.join(","))
}

pub fn format_nested(op: &FiniteOperad, w: &NestedTerm) -> String {
    let parts: Vec<String> = w.inner.iter().map(|t| format_term(op, t)).collect();
    format!("({}, [{}])", op.label(w.op), parts.join(","))
}

/// The monad unit: wraps a variable with the operad identity.
pub fn unit(op: &FiniteOperad, x: usize) -> MonadTerm {
    MonadTerm::new(op.identity(), vec![x])
}

/// Monad multiplication: compose the operad elements, concatenate the
/// variable lists in order.
pub fn mu(op: &FiniteOperad, w: &NestedTerm) -> Result<MonadTerm, OperadError> {
    let args: Vec<ElemRef> = w.inner.iter().map(|t| t.op).collect();
    let composed = op.compose(w.op, &args)?;
    let xs: Vec<usize> = w.inner.iter().flat_map(|t| t.xs.iter().copied()).collect();
    Ok(MonadTerm::new(composed, xs))
}

/// Multiplication of the monad induced by the reverse operad, written over
/// the original table: compose the operad elements in reversed order while
/// concatenating the variable lists in their original order.
pub fn mu_rev(op: &FiniteOperad, w: &NestedTerm) -> Result<MonadTerm, OperadError> {
    let args: Vec<ElemRef> = w.inner.iter().rev().map(|t| t.op).collect();
    let composed = op.compose(w.op, &args)?;
    let xs: Vec<usize> = w.inner.iter().flat_map(|t| t.xs.iter().copied()).collect();
    Ok(MonadTerm::new(composed, xs))
}

/// The variable-reversing map on `SX`: same operad element, variables in
/// reverse order. An involution, hence a bijection.
pub fn iota(t: &MonadTerm) -> MonadTerm {
    MonadTerm::new(t.op, t.xs.iter().rev().copied().collect())
}

/// The reversal applied at both layers of `S(SX)`: the list of inner terms
/// is reversed and each inner term is reversed.
pub fn iota_nested(w: &NestedTerm) -> NestedTerm {
    NestedTerm::new(w.op, w.inner.iter().rev().map(iota).collect())
}

/// Functorial relabeling of variables.
pub fn map_term(t: &MonadTerm, f: impl Fn(usize) -> usize) -> MonadTerm {
    MonadTerm::new(t.op, t.xs.iter().map(|&x| f(x)).collect())
}

fn var_tuples(x_size: usize, n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    itertools::repeat_n(0..x_size, n)
        .multi_cartesian_product()
        .collect()
}

/// All of `SX` in canonical order: elements by (arity, index), variable
/// lists lexicographic.
pub fn enumerate_terms(op: &FiniteOperad, x_size: usize) -> Vec<MonadTerm> {
    let mut out = Vec::new();
    for e in op.elements() {
        for xs in var_tuples(x_size, e.arity) {
            out.push(MonadTerm::new(e, xs));
        }
    }
    out
}

/// All admissible elements of `S(SX)` in canonical order.
pub fn enumerate_nested(op: &FiniteOperad, x_size: usize) -> Vec<NestedTerm> {
    let terms = enumerate_terms(op, x_size);
    let mut out = Vec::new();
    let mut stack: Vec<MonadTerm> = Vec::new();
    for e in op.elements() {
        fill(op, e, &terms, op.max_arity(), &mut stack, &mut out);
    }
    fn fill(
        op: &FiniteOperad,
        outer: ElemRef,
        terms: &[MonadTerm],
        budget: usize,
        stack: &mut Vec<MonadTerm>,
        out: &mut Vec<NestedTerm>,
    ) {
        if stack.len() == outer.arity {
            out.push(NestedTerm::new(outer, stack.clone()));
            return;
        }
        for t in terms {
            if t.op.arity > budget {
                continue;
            }
            let rem = budget - t.op.arity;
            stack.push(t.clone());
            fill(op, outer, terms, rem, stack, out);
            stack.pop();
        }
    }
    out
}

/// Visits every `S(S(SX))` element for which both evaluation orders of the
/// associativity square are defined: the middle-layer arities fit the bound
/// and so does the total composite arity.
fn for_each_deep(
    op: &FiniteOperad,
    x_size: usize,
    f: &mut impl FnMut(ElemRef, &[NestedTerm]),
) {
    let nested = enumerate_nested(op, x_size);
    let n_bound = op.max_arity();
    let mut stack: Vec<NestedTerm> = Vec::new();
    for e in op.elements() {
        fill(e, &nested, n_bound, n_bound, &mut stack, f);
    }
    fn fill(
        outer: ElemRef,
        pool: &[NestedTerm],
        mid_budget: usize,
        leaf_budget: usize,
        stack: &mut Vec<NestedTerm>,
        f: &mut impl FnMut(ElemRef, &[NestedTerm]),
    ) {
        if stack.len() == outer.arity {
            f(outer, stack);
            return;
        }
        for w in pool {
            let a = w.op.arity;
            let m = w.total_arity();
            if a > mid_budget || m > leaf_budget {
                continue;
            }
            stack.push(w.clone());
            fill(outer, pool, mid_budget - a, leaf_budget - m, stack, f);
            stack.pop();
        }
    }
}

fn smallest_inhabited_arity(op: &FiniteOperad, x_size: usize) -> Option<usize> {
    (0..=op.max_arity()).find(|&n| op.carrier_size(n) > 0 && (x_size > 0 || n == 0))
}

fn random_term(op: &FiniteOperad, x_size: usize, rng: &mut impl Rng) -> Option<MonadTerm> {
    let pool: Vec<ElemRef> = op
        .elements()
        .filter(|e| x_size > 0 || e.arity == 0)
        .collect();
    let e = *pool.choose(rng)?;
    let xs = (0..e.arity).map(|_| rng.random_range(0..x_size)).collect();
    Some(MonadTerm::new(e, xs))
}

/// Chooses `slots` operad elements whose arities sum to at most `budget`,
/// uniformly slot by slot among the elements that leave room for the rest.
fn random_ops(
    op: &FiniteOperad,
    x_size: usize,
    slots: usize,
    budget: usize,
    rng: &mut impl Rng,
) -> Option<Vec<ElemRef>> {
    let floor = smallest_inhabited_arity(op, x_size)?;
    let mut left = budget;
    let mut out = Vec::with_capacity(slots);
    for s in (1..=slots).rev() {
        let reserve = (s - 1) * floor;
        let cap = left.checked_sub(reserve)?;
        let pool: Vec<ElemRef> = op
            .elements()
            .filter(|e| e.arity <= cap && (x_size > 0 || e.arity == 0))
            .collect();
        let e = *pool.choose(rng)?;
        left -= e.arity;
        out.push(e);
    }
    Some(out)
}

fn random_nested(op: &FiniteOperad, x_size: usize, rng: &mut impl Rng) -> Option<NestedTerm> {
    let outer = *op
        .elements()
        .filter(|e| x_size > 0 || e.arity == 0)
        .collect::<Vec<_>>()
        .choose(rng)?;
    let ops = random_ops(op, x_size, outer.arity, op.max_arity(), rng)?;
    let inner = ops
        .into_iter()
        .map(|e| {
            let xs = (0..e.arity).map(|_| rng.random_range(0..x_size)).collect();
            MonadTerm::new(e, xs)
        })
        .collect();
    Some(NestedTerm::new(outer, inner))
}

fn random_deep(
    op: &FiniteOperad,
    x_size: usize,
    rng: &mut impl Rng,
) -> Option<(ElemRef, Vec<NestedTerm>)> {
    let outer = *op
        .elements()
        .filter(|e| x_size > 0 || e.arity == 0)
        .collect::<Vec<_>>()
        .choose(rng)?;
    let mids = random_ops(op, x_size, outer.arity, op.max_arity(), rng)?;
    let leaf_slots: usize = mids.iter().map(|e| e.arity).sum();
    let leaves = random_ops(op, x_size, leaf_slots, op.max_arity(), rng)?;
    let mut ws = Vec::with_capacity(mids.len());
    let mut off = 0;
    for mid in mids {
        let inner = leaves[off..off + mid.arity]
            .iter()
            .map(|&e| {
                let xs = (0..e.arity).map(|_| rng.random_range(0..x_size)).collect();
                MonadTerm::new(e, xs)
            })
            .collect();
        off += mid.arity;
        ws.push(NestedTerm::new(mid, inner));
    }
    Some((outer, ws))
}

fn check_unit_laws_at(op: &FiniteOperad, t: &MonadTerm, rep: &mut LawReport) {
    let outer = NestedTerm::new(op.identity(), vec![t.clone()]);
    match mu(op, &outer) {
        Ok(got) if got == *t => {}
        Ok(got) => rep.record(
            "monad-unit-outer",
            format_term(op, t),
            format_term(op, &got),
            format_term(op, t),
        ),
        Err(e) => rep.record("monad-unit-outer", format_term(op, t), e.to_string(), "defined"),
    }
    let inner = NestedTerm::new(t.op, t.xs.iter().map(|&x| unit(op, x)).collect());
    match mu(op, &inner) {
        Ok(got) if got == *t => {}
        Ok(got) => rep.record(
            "monad-unit-inner",
            format_term(op, t),
            format_term(op, &got),
            format_term(op, t),
        ),
        Err(e) => rep.record("monad-unit-inner", format_term(op, t), e.to_string(), "defined"),
    }
}

fn check_assoc_at(op: &FiniteOperad, outer: ElemRef, ws: &[NestedTerm], rep: &mut LawReport) {
    let describe = || {
        let parts: Vec<String> = ws.iter().map(|w| format_nested(op, w)).collect();
        format!("({}, [{}])", op.label(outer), parts.join(","))
    };
    let mid_ops: Vec<ElemRef> = ws.iter().map(|w| w.op).collect();
    let composed = match op.compose(outer, &mid_ops) {
        Ok(c) => c,
        Err(e) => {
            rep.record("monad-associativity", describe(), e.to_string(), "defined");
            return;
        }
    };
    let flattened = NestedTerm::new(
        composed,
        ws.iter().flat_map(|w| w.inner.iter().cloned()).collect(),
    );
    let collapsed = NestedTerm::new(
        outer,
        ws.iter()
            .map(|w| mu(op, w).expect("middle admissible"))
            .collect(),
    );
    let lhs = mu(op, &flattened);
    let rhs = mu(op, &collapsed);
    match (lhs, rhs) {
        (Ok(l), Ok(r)) if l == r => {}
        (Ok(l), Ok(r)) => rep.record(
            "monad-associativity",
            describe(),
            format_term(op, &l),
            format_term(op, &r),
        ),
        (l, r) => rep.record(
            "monad-associativity",
            describe(),
            format!("{l:?}"),
            format!("{r:?}"),
        ),
    }
}

/// Verifies the unit laws and the associativity square of the induced monad
/// on every instance where both evaluation orders are defined.
pub fn check_monad_laws(op: &FiniteOperad, x_size: usize, policy: ScanPolicy) -> LawReport {
    let mut rep = LawReport::default();
    match policy {
        ScanPolicy::Exhaustive => {
            for t in enumerate_terms(op, x_size) {
                check_unit_laws_at(op, &t, &mut rep);
            }
            for_each_deep(op, x_size, &mut |outer, ws| {
                check_assoc_at(op, outer, ws, &mut rep);
            });
        }
        ScanPolicy::Sampled { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                if let Some(t) = random_term(op, x_size, &mut rng) {
                    check_unit_laws_at(op, &t, &mut rep);
                }
                if let Some((outer, ws)) = random_deep(op, x_size, &mut rng) {
                    check_assoc_at(op, outer, ws.as_slice(), &mut rep);
                }
            }
        }
    }
    rep
}

fn check_iota_mult_at(
    op: &FiniteOperad,
    rev: &FiniteOperad,
    w: &NestedTerm,
    rep: &mut LawReport,
) {
    let lhs = mu(op, w).map(|t| iota(&t));
    let rhs = mu_rev(op, &iota_nested(w));
    match (lhs, rhs) {
        (Ok(l), Ok(r)) if l == r => {}
        (Ok(l), Ok(r)) => rep.record(
            "iota-multiplication",
            format_nested(op, w),
            format_term(rev, &l),
            format_term(rev, &r),
        ),
        (l, r) => rep.record(
            "iota-multiplication",
            format_nested(op, w),
            format!("{l:?}"),
            format!("{r:?}"),
        ),
    }
}

/// Verifies that variable reversal is a monad map from the monad of `op` to
/// the monad of its reverse: the unit square and the multiplication square,
/// on every admissible instance.
pub fn check_iota_monad_iso(op: &FiniteOperad, x_size: usize, policy: ScanPolicy) -> LawReport {
    let rev = op.reverse();
    let mut rep = LawReport::default();
    for x in 0..x_size {
        let lhs = iota(&unit(op, x));
        let rhs = unit(&rev, x);
        if lhs != rhs {
            rep.record(
                "iota-unit",
                format!("x{x}"),
                format_term(&rev, &lhs),
                format_term(&rev, &rhs),
            );
        }
    }
    match policy {
        ScanPolicy::Exhaustive => {
            for w in enumerate_nested(op, x_size) {
                check_iota_mult_at(op, &rev, &w, &mut rep);
            }
        }
        ScanPolicy::Sampled { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                if let Some(w) = random_nested(op, x_size, &mut rng) {
                    check_iota_mult_at(op, &rev, &w, &mut rep);
                }
            }
        }
    }
    rep
}

/// The map on terms induced by an operad morphism: relabel the operad
/// element, keep the variables.
pub fn induced_term(f: &OperadMorphism, t: &MonadTerm) -> MonadTerm {
    MonadTerm::new(f.apply(t.op), t.xs.clone())
}

fn induced_nested(f: &OperadMorphism, w: &NestedTerm) -> NestedTerm {
    NestedTerm::new(f.apply(w.op), w.inner.iter().map(|t| induced_term(f, t)).collect())
}

/// Verifies that the induced map of a morphism is a monad map: unit and
/// multiplication squares, plus naturality under variable relabelings.
pub fn check_monad_map(f: &OperadMorphism, x_size: usize, policy: ScanPolicy) -> LawReport {
    let p = &f.source;
    let q = &f.target;
    let mut rep = LawReport::default();
    for x in 0..x_size {
        let lhs = induced_term(f, &unit(p, x));
        let rhs = unit(q, x);
        if lhs != rhs {
            rep.record(
                "map-unit",
                format!("x{x}"),
                format_term(q, &lhs),
                format_term(q, &rhs),
            );
        }
    }
    let check_mult = |w: &NestedTerm, rep: &mut LawReport| {
        let lhs = mu(p, w).map(|t| induced_term(f, &t));
        let rhs = mu(q, &induced_nested(f, w));
        match (lhs, rhs) {
            (Ok(l), Ok(r)) if l == r => {}
            (Ok(l), Ok(r)) => rep.record(
                "map-multiplication",
                format_nested(p, w),
                format_term(q, &l),
                format_term(q, &r),
            ),
            (l, r) => rep.record(
                "map-multiplication",
                format_nested(p, w),
                format!("{l:?}"),
                format!("{r:?}"),
            ),
        }
    };
    let check_nat = |t: &MonadTerm, g: &[usize], rep: &mut LawReport| {
        let lhs = induced_term(f, &map_term(t, |x| g[x]));
        let rhs = map_term(&induced_term(f, t), |x| g[x]);
        if lhs != rhs {
            rep.record(
                "map-naturality",
                format!("{} under {:?}", format_term(p, t), g),
                format_term(q, &lhs),
                format_term(q, &rhs),
            );
        }
    };
    match policy {
        ScanPolicy::Exhaustive => {
            for w in enumerate_nested(p, x_size) {
                check_mult(&w, &mut rep);
            }
            let relabelings = var_tuples(x_size, x_size);
            for t in enumerate_terms(p, x_size) {
                for g in &relabelings {
                    check_nat(&t, g, &mut rep);
                }
            }
        }
        ScanPolicy::Sampled { seed, samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                if let Some(w) = random_nested(p, x_size, &mut rng) {
                    check_mult(&w, &mut rep);
                }
                if let Some(t) = random_term(p, x_size, &mut rng) {
                    let g: Vec<usize> =
                        (0..x_size).map(|_| rng.random_range(0..x_size)).collect();
                    check_nat(&t, &g, &mut rep);
                }
            }
        }
    }
    rep
}

/// Outcome of the reflection check for one morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReflectsIso {
    /// Whether the induced map is bijective, per checked set size.
    pub per_size: Vec<(usize, bool)>,
    /// Bijectivity at every size the caller listed.
    pub listed_sizes_bijective: bool,
    /// Whether every component of the morphism is bijective.
    pub components_bijective: bool,
    /// When components are bijective: whether the inverse map is itself a
    /// morphism, confirming an isomorphism.
    pub inverse_morphism_ok: Option<bool>,
    /// A collision or missed target term at the smallest failing size.
    pub witness: Option<String>,
    /// The headline claim: induced maps bijective at every checked size
    /// iff all components bijective iff the morphism is an isomorphism.
    pub equivalence_holds: bool,
}

impl fmt::Display for ReflectsIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, b) in &self.per_size {
            writeln!(
                f,
                "|X| = {k}: induced map {}",
                if *b { "bijective" } else { "not bijective" }
            )?;
        }
        writeln!(
            f,
            "components {}",
            if self.components_bijective {
                "bijective"
            } else {
                "not all bijective"
            }
        )?;
        if let Some(ok) = self.inverse_morphism_ok {
            writeln!(
                f,
                "inverse {}",
                if ok { "is a morphism" } else { "fails morphism laws" }
            )?;
        }
        if let Some(w) = &self.witness {
            writeln!(f, "witness: {w}")?;
        }
        writeln!(
            f,
            "equivalence {}",
            if self.equivalence_holds { "holds" } else { "FAILS" }
        )
    }
}

/// Checks that the passage from morphisms to induced maps reflects
/// isomorphisms: bijectivity of the induced map at the listed set sizes
/// (and all sizes up to the truncation bound) is equivalent to the morphism
/// being an operad isomorphism.
pub fn check_reflects_iso(f: &OperadMorphism, x_sizes: &[usize]) -> ReflectsIso {
    let p = &f.source;
    let q = &f.target;
    let top = x_sizes
        .iter()
        .copied()
        .max()
        .unwrap_or(0)
        .max(p.max_arity());
    let mut per_size = Vec::new();
    let mut witness = None;
    let f0_bijective = {
        let m: Vec<usize> = f.maps[0].clone();
        let mut seen = vec![false; q.carrier_size(0)];
        m.len() == q.carrier_size(0) && m.iter().all(|&i| !std::mem::replace(&mut seen[i], true))
    };
    for k in 0..=top {
        let source_terms = enumerate_terms(p, k);
        let target_terms = enumerate_terms(q, k);
        let mut image = HashMap::new();
        let mut bij = source_terms.len() == target_terms.len();
        for t in &source_terms {
            let img = induced_term(f, t);
            if let Some(prev) = image.insert(img.clone(), t.clone()) {
                bij = false;
                if witness.is_none() {
                    witness = Some(format!(
                        "|X| = {k}: {} and {} both map to {}",
                        format_term(p, &prev),
                        format_term(p, t),
                        format_term(q, &img),
                    ));
                }
            }
        }
        if bij {
            for u in &target_terms {
                if !image.contains_key(u) {
                    bij = false;
                    if witness.is_none() {
                        witness = Some(format!(
                            "|X| = {k}: {} has no preimage",
                            format_term(q, u)
                        ));
                    }
                    break;
                }
            }
        }
        per_size.push((k, bij));
    }
    let components_bijective = f.is_bijective();
    let inverse_morphism_ok = if components_bijective {
        let mut inv: Vec<Vec<usize>> = f.maps.iter().map(|row| vec![0; row.len()]).collect();
        for (arity, row) in f.maps.iter().enumerate() {
            for (i, &j) in row.iter().enumerate() {
                inv[arity][j] = i;
            }
        }
        Some(OperadMorphism::new(q.clone(), p.clone(), inv).is_ok())
    } else {
        None
    };
    let all_sizes = per_size.iter().all(|&(_, b)| b);
    let is_iso = inverse_morphism_ok == Some(true);
    let pointwise_expected = per_size.iter().all(|&(k, b)| {
        if k == 0 {
            b == f0_bijective
        } else {
            b == components_bijective
        }
    });
    let listed_sizes_bijective = x_sizes.iter().all(|&k| per_size[k].1);
    ReflectsIso {
        per_size,
        listed_sizes_bijective,
        components_bijective,
        inverse_morphism_ok,
        witness,
        equivalence_holds: pointwise_expected
            && (all_sizes == components_bijective)
            && (components_bijective == is_iso),
    }
}

/// Why no operad morphism can induce the variable reversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NotFullReport {
    /// A term over `X = {0, 1}` whose variable list is not a palindrome.
    pub witness: MonadTerm,
    /// The reversal's value at the witness.
    pub reversed: MonadTerm,
    /// Number of morphisms from the operad to its reverse that were tried.
    pub morphisms_checked: usize,
    /// Whether every candidate's induced map missed the reversal at the
    /// witness (forced: induced maps never reorder variables).
    pub every_candidate_separated: bool,
}

impl fmt::Display for NotFullReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "witness term has variables {:?}; reversal sends them to {:?}",
            self.witness.xs, self.reversed.xs
        )?;
        writeln!(
            f,
            "any induced map keeps variables in order, so it disagrees with the reversal there"
        )?;
        writeln!(
            f,
            "checked all {} morphisms into the reverse operad: {}",
            self.morphisms_checked,
            if self.every_candidate_separated {
                "every one separated"
            } else {
                "SEPARATION FAILED"
            }
        )
    }
}

/// Shows that the variable reversal is not induced by any operad morphism
/// into the reverse operad: a term with a non-palindromic variable list
/// separates the reversal from every candidate's induced map. Needs an
/// element of arity at least 2 (below that the reversal is the identity).
pub fn demo_not_full(p: &FiniteOperad) -> Result<NotFullReport, OperadError> {
    let theta = p
        .elements()
        .find(|e| e.arity >= 2)
        .ok_or_else(|| {
            OperadError::Precondition(
                "no element of arity >= 2; variable reversal is the identity here".into(),
            )
        })?;
    let mut xs = vec![1usize; theta.arity];
    xs[0] = 0;
    let witness = MonadTerm::new(theta, xs);
    let reversed = iota(&witness);
    debug_assert_ne!(witness.xs, reversed.xs);
    let rev = p.reverse();
    let candidates = enumerate_morphisms(p, &rev, false);
    let every_candidate_separated = candidates
        .iter()
        .all(|f| induced_term(f, &witness) != reversed);
    Ok(NotFullReport {
        witness,
        reversed,
        morphisms_checked: candidates.len(),
        every_candidate_separated,
    })
}

/// A structure map `SX -> X`, tabulated on all of `SX`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Algebra {
    pub x_size: usize,
    values: HashMap<MonadTerm, usize>,
}

impl Algebra {
    /// Tabulates `f` over every term of `SX`.
    pub fn tabulate(
        op: &FiniteOperad,
        x_size: usize,
        f: impl Fn(&MonadTerm) -> usize,
    ) -> Algebra {
        let mut values = HashMap::new();
        for t in enumerate_terms(op, x_size) {
            let v = f(&t);
            values.insert(t, v);
        }
        Algebra { x_size, values }
    }

    pub fn act(&self, t: &MonadTerm) -> Option<usize> {
        self.values.get(t).copied()
    }

    /// Precomposes with the variable reversal, turning an algebra for an
    /// operad into one for its reverse.
    pub fn transport(&self) -> Algebra {
        let values = self
            .values
            .iter()
            .map(|(t, &v)| (iota(t), v))
            .collect();
        Algebra {
            x_size: self.x_size,
            values,
        }
    }
}

/// Verifies the unit and action laws of a structure map on every admissible
/// instance.
pub fn check_algebra_laws(op: &FiniteOperad, alg: &Algebra) -> LawReport {
    let mut rep = LawReport::default();
    for x in 0..alg.x_size {
        let t = unit(op, x);
        match alg.act(&t) {
            Some(v) if v == x => {}
            Some(v) => rep.record("algebra-unit", format_term(op, &t), format!("x{v}"), format!("x{x}")),
            None => rep.record("algebra-unit", format_term(op, &t), "undefined", format!("x{x}")),
        }
    }
    for w in enumerate_nested(op, alg.x_size) {
        let composed = mu(op, &w).expect("admissible by enumeration");
        let lhs = alg.act(&composed);
        let folded = MonadTerm::new(
            w.op,
            match w.inner.iter().map(|t| alg.act(t)).collect::<Option<Vec<_>>>() {
                Some(v) => v,
                None => {
                    rep.record(
                        "algebra-action",
                        format_nested(op, &w),
                        "undefined inner value",
                        "defined",
                    );
                    continue;
                }
            },
        );
        let rhs = alg.act(&folded);
        if lhs != rhs || lhs.is_none() {
            rep.record(
                "algebra-action",
                format_nested(op, &w),
                format!("{lhs:?}"),
                format!("{rhs:?}"),
            );
        }
    }
    rep
}
