//! Exhaustive enumeration of small truncated operads and the search for
//! operads not isomorphic to their own reverse, with replayable certificates.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::format::print_operad;
use crate::monad::{check_iota_monad_iso, ScanPolicy};
use crate::operad::{
    default_labels, eval_assoc, ElemRef, FiniteOperad, InstEval, OperadMorphism,
    SeparatingWitness, Shape,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search space: {0}")]
    BadSpace(String),
    #[error("certificate stage `{stage}` failed: {detail}")]
    StageFailed { stage: &'static str, detail: String },
}

/// The set of composition tables over fixed carrier sizes `(s0, ..., sN)`,
/// with the identity pinned at index 0 of the arity-1 carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpace {
    carrier_sizes: Vec<usize>,
}

impl SearchSpace {
    pub fn new(carrier_sizes: Vec<usize>) -> Result<SearchSpace, SearchError> {
        if carrier_sizes.len() < 2 {
            return Err(SearchError::BadSpace(format!(
                "need carrier sizes s0..sN with N >= 1, got {} entries",
                carrier_sizes.len()
            )));
        }
        if carrier_sizes[1] == 0 {
            return Err(SearchError::BadSpace(
                "the arity-1 carrier must be nonempty (identity)".into(),
            ));
        }
        Shape::new(&carrier_sizes).map_err(|e| SearchError::BadSpace(e.to_string()))?;
        Ok(SearchSpace { carrier_sizes })
    }

    pub fn max_arity(&self) -> usize {
        self.carrier_sizes.len() - 1
    }

    pub fn carrier_sizes(&self) -> &[usize] {
        &self.carrier_sizes
    }

    pub fn total_size(&self) -> usize {
        self.carrier_sizes.iter().sum()
    }

    fn slug(&self) -> String {
        let parts: Vec<String> = self.carrier_sizes.iter().map(|s| s.to_string()).collect();
        parts.join("-")
    }
}

impl fmt::Display for SearchSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.carrier_sizes.iter().map(|s| s.to_string()).collect();
        write!(
            f,
            "max_arity {}, sizes ({})",
            self.max_arity(),
            parts.join(", ")
        )
    }
}

/// All spaces with the given bound and every carrier size at most `size_cap`,
/// ordered by total carrier size and then lexicographically by size vector.
pub fn sweep_spaces(max_arity: usize, size_cap: usize) -> Vec<SearchSpace> {
    let mut vecs: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..=max_arity {
        let mut next = Vec::new();
        for v in &vecs {
            for s in 0..=size_cap {
                let mut w = v.clone();
                w.push(s);
                next.push(w);
            }
        }
        vecs = next;
    }
    let mut spaces: Vec<SearchSpace> = vecs
        .into_iter()
        .filter(|v| v[1] >= 1)
        .map(|v| SearchSpace::new(v).expect("sizes within bounds"))
        .collect();
    spaces.sort_by_key(|s| (s.total_size(), s.carrier_sizes.clone()));
    spaces
}

/// Backtracking completion of a composition table: identity row and unit
/// column forced up front, remaining entries assigned in canonical order,
/// each associativity instance watched on the first table entry its
/// evaluation gets stuck on.
///
/// The entry order is fixed, so an instance that evaluates fully at the
/// assignment of its watched entry has every entry it read at depths at or
/// before that one; any backtrack that disturbs those reads unassigns the
/// watched entry first, and the instance is re-evaluated when it is next
/// assigned. Instances that pass against the forced entries alone are
/// dropped for good.
struct Backtracker {
    shape: Arc<Shape>,
    values: Vec<Option<u16>>,
    free: Vec<u32>,
    domains: Vec<Vec<u16>>,
    pos: Vec<usize>,
    depth: usize,
    instances: Vec<(u16, Vec<u16>, Vec<u16>)>,
    watchers: Vec<Vec<usize>>,
    started: bool,
    dead: bool,
}

impl Backtracker {
    fn new(space: &SearchSpace, shuffle: Option<&mut ChaCha20Rng>) -> Backtracker {
        let shape = Shape::new(space.carrier_sizes()).expect("space was validated");
        let idg = shape.gids[1][0];
        let mut values: Vec<Option<u16>> = vec![None; shape.entries.len()];
        for (e, (theta, args)) in shape.entries.iter().enumerate() {
            if *theta == idg {
                values[e] = Some(args[0]);
            } else if args.iter().all(|&g| g == idg) {
                values[e] = Some(*theta);
            }
        }
        let free: Vec<u32> = (0..shape.entries.len() as u32)
            .filter(|&e| values[e as usize].is_none())
            .collect();
        let mut domains: Vec<Vec<u16>> = free
            .iter()
            .map(|&e| {
                let (_, args) = &shape.entries[e as usize];
                let k: usize = args.iter().map(|&g| shape.arity_of(g)).sum();
                shape.gids[k].clone()
            })
            .collect();
        if let Some(rng) = shuffle {
            for d in domains.iter_mut() {
                d.shuffle(rng);
            }
        }
        let mut instances = Vec::new();
        shape.for_each_assoc_instance(Some(idg), &mut |t, a, b| {
            instances.push((t, a.to_vec(), b.to_vec()));
        });
        let mut watchers: Vec<Vec<usize>> = vec![Vec::new(); shape.entries.len()];
        let mut dead = domains.iter().any(|d| d.is_empty());
        for (i, (t, a, b)) in instances.iter().enumerate() {
            match eval_assoc(&shape, &mut |e| values[e as usize], *t, a, b) {
                InstEval::Pass => {}
                InstEval::Fail { .. } => dead = true,
                InstEval::Blocked(e) => watchers[e as usize].push(i),
            }
        }
        let pos = vec![0usize; free.len()];
        Backtracker {
            shape,
            values,
            free,
            domains,
            pos,
            depth: 0,
            instances,
            watchers,
            started: false,
            dead,
        }
    }

    fn propagate(&mut self, e: usize) -> bool {
        let list = std::mem::take(&mut self.watchers[e]);
        let mut keep = Vec::with_capacity(list.len());
        let mut ok = true;
        let mut j = 0;
        while j < list.len() {
            let inst = list[j];
            let (t, a, b) = &self.instances[inst];
            match eval_assoc(&self.shape, &mut |id| self.values[id as usize], *t, a, b) {
                InstEval::Pass => keep.push(inst),
                InstEval::Fail { .. } => {
                    keep.extend_from_slice(&list[j..]);
                    ok = false;
                    break;
                }
                InstEval::Blocked(e2) => self.watchers[e2 as usize].push(inst),
            }
            j += 1;
        }
        self.watchers[e] = keep;
        ok
    }

    fn next_solution(&mut self) -> Option<Vec<u16>> {
        if self.dead {
            return None;
        }
        if self.free.is_empty() {
            self.dead = true;
            return Some(self.values.iter().map(|v| v.expect("forced")).collect());
        }
        if self.started {
            self.depth -= 1;
        }
        self.started = true;
        loop {
            if self.depth == self.free.len() {
                return Some(self.values.iter().map(|v| v.expect("complete")).collect());
            }
            let slot = self.depth;
            let e = self.free[slot] as usize;
            let mut advanced = false;
            while self.pos[slot] < self.domains[slot].len() {
                let v = self.domains[slot][self.pos[slot]];
                self.pos[slot] += 1;
                self.values[e] = Some(v);
                if self.propagate(e) {
                    self.depth += 1;
                    advanced = true;
                    break;
                }
            }
            if advanced {
                continue;
            }
            self.values[e] = None;
            self.pos[slot] = 0;
            if slot == 0 {
                self.dead = true;
                return None;
            }
            self.depth -= 1;
        }
    }
}

/// Streams every valid operad over the space's carrier sizes, identity fixed
/// at index 0 of arity 1, each table exactly once, in canonical entry order
/// with result values ascending.
pub struct OperadStream {
    bt: Backtracker,
    labels: Vec<Vec<String>>,
    name_prefix: String,
    emitted: u64,
}

impl Iterator for OperadStream {
    type Item = FiniteOperad;

    fn next(&mut self) -> Option<FiniteOperad> {
        let vals = self.bt.next_solution()?;
        let op = FiniteOperad::from_packed(
            format!("{}.{}", self.name_prefix, self.emitted),
            self.labels.clone(),
            ElemRef::new(1, 0),
            self.bt.shape.clone(),
            vals,
        );
        debug_assert!(op.validate().ok(), "enumerated table violates a law");
        self.emitted += 1;
        Some(op)
    }
}

pub fn enumerate_operads(space: &SearchSpace) -> OperadStream {
    OperadStream {
        bt: Backtracker::new(space, None),
        labels: default_labels(space.carrier_sizes()),
        name_prefix: format!("enum{}", space.slug()),
        emitted: 0,
    }
}

/// Valid operads drawn by rerunning the backtracker with seeded random value
/// orders; one operad per restart, duplicates possible.
pub fn random_valid_operads(space: &SearchSpace, seed: u64, count: usize) -> Vec<FiniteOperad> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let labels = default_labels(space.carrier_sizes());
    let mut out = Vec::with_capacity(count);
    for k in 0..count {
        let mut bt = Backtracker::new(space, Some(&mut rng));
        let Some(vals) = bt.next_solution() else {
            break;
        };
        out.push(FiniteOperad::from_packed(
            format!("rand{}.{}", space.slug(), k),
            labels.clone(),
            ElemRef::new(1, 0),
            bt.shape.clone(),
            vals,
        ));
    }
    out
}

/// Everything `verify_candidate` re-checks about a candidate: validity of
/// the operad and its reverse, the outcome of the exhaustive isomorphism
/// search against the reverse, the variable-reversal monad comparison, and
/// the separating-property witnesses on both sides.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub operad: FiniteOperad,
    pub iso_to_reverse: Option<OperadMorphism>,
    pub bijections_examined: u64,
    pub iota_sizes_checked: Vec<usize>,
    pub separating_self: Option<SeparatingWitness>,
    pub separating_reverse: Option<SeparatingWitness>,
}

impl Certificate {
    pub fn is_counterexample(&self) -> bool {
        self.iso_to_reverse.is_none()
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = &self.operad;
        let sizes: Vec<String> = op.carrier_sizes().iter().map(|s| s.to_string()).collect();
        writeln!(
            f,
            "certificate for `{}` (max_arity {}, sizes [{}])",
            op.name(),
            op.max_arity(),
            sizes.join(", ")
        )?;
        writeln!(f, "  validity: operad ok, reverse ok")?;
        match &self.iso_to_reverse {
            None => writeln!(
                f,
                "  isomorphism to reverse: none ({} candidate bijections exhausted)",
                self.bijections_examined
            )?,
            Some(m) => {
                let pairs: Vec<String> = op
                    .elements()
                    .map(|e| format!("{} -> {}", op.label(e), op.label(m.apply(e))))
                    .collect();
                writeln!(f, "  isomorphism to reverse: {}", pairs.join(", "))?;
            }
        }
        let sizes: Vec<String> = self
            .iota_sizes_checked
            .iter()
            .map(|s| s.to_string())
            .collect();
        writeln!(
            f,
            "  variable reversal is a monad isomorphism for |X| in {{{}}}",
            sizes.join(", ")
        )?;
        let show = |w: &Option<SeparatingWitness>| match w {
            Some(w) => format!(
                "witness phi `{}`, gamma `{}`, composite `{}`",
                op.label(w.phi),
                op.label(w.gamma),
                op.label(w.composite)
            ),
            None => "none".to_string(),
        };
        writeln!(f, "  separating property: {}", show(&self.separating_self))?;
        writeln!(
            f,
            "  separating property of reverse: {}",
            show(&self.separating_reverse)
        )?;
        if self.is_counterexample() {
            writeln!(f, "  verdict: not isomorphic to its reverse")
        } else {
            writeln!(f, "  verdict: isomorphic to its reverse")
        }
    }
}

fn law_detail(report: &crate::report::LawReport) -> String {
    match report.violations.first() {
        Some(v) => format!("{}: {} gave {} vs {}", v.law, v.instance, v.lhs, v.rhs),
        None => "no violation recorded".to_string(),
    }
}

/// Re-derives the full certificate for a candidate from scratch. Structural
/// failures (invalid tables, a broken variable-reversal square) abort with
/// the stage name; the isomorphism outcome itself is data, not an error.
pub fn verify_candidate(p: &FiniteOperad) -> Result<Certificate, SearchError> {
    let v = p.validate();
    if !v.ok() {
        return Err(SearchError::StageFailed {
            stage: "validate",
            detail: law_detail(&v),
        });
    }
    let rev = p.reverse();
    let vr = rev.validate();
    if !vr.ok() {
        return Err(SearchError::StageFailed {
            stage: "validate-reverse",
            detail: law_detail(&vr),
        });
    }
    let iso_to_reverse = p.find_isomorphism(&rev);
    let bijections_examined = p.bijection_candidate_count(&rev);
    let mut iota_sizes_checked = Vec::new();
    for x in 0..=3usize {
        let rep = check_iota_monad_iso(p, x, ScanPolicy::Exhaustive);
        if !rep.ok() {
            return Err(SearchError::StageFailed {
                stage: "iota-monad-iso",
                detail: format!("|X| = {x}, {}", law_detail(&rep)),
            });
        }
        iota_sizes_checked.push(x);
    }
    let witness_in = |q: &FiniteOperad| -> Result<Option<SeparatingWitness>, SearchError> {
        if q.max_arity() < 2 {
            return Ok(None);
        }
        q.has_separating_property()
            .map_err(|e| SearchError::StageFailed {
                stage: "separating-property",
                detail: e.to_string(),
            })
    };
    let separating_self = witness_in(p)?;
    let separating_reverse = witness_in(&rev)?;
    Ok(Certificate {
        operad: p.clone(),
        iso_to_reverse,
        bijections_examined,
        iota_sizes_checked,
        separating_self,
        separating_reverse,
    })
}

#[derive(Debug, Clone)]
pub struct SearchReport {
    pub space: SearchSpace,
    pub total_candidates_examined: u64,
    pub found: Option<(FiniteOperad, Certificate)>,
    pub exhausted: bool,
}

impl fmt::Display for SearchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "search report (truncation bound {})",
            self.space.max_arity()
        )?;
        writeln!(f, "space: {}", self.space)?;
        writeln!(
            f,
            "candidates examined: {}",
            self.total_candidates_examined
        )?;
        match &self.found {
            Some((op, cert)) => {
                writeln!(f, "result: found an operad not isomorphic to its reverse")?;
                writeln!(f)?;
                writeln!(f, "{}", print_operad(op).trim_end())?;
                writeln!(f)?;
                write!(f, "{cert}")
            }
            None => writeln!(
                f,
                "result: exhausted, every operad in this space is isomorphic to its reverse"
            ),
        }
    }
}

fn count_true(flags: &[bool]) -> usize {
    flags.iter().filter(|b| **b).count()
}

/// Isomorphism invariants cheap enough to compare before the bijection
/// search. A mismatch in any of them already proves the two operads are not
/// isomorphic, so the fast path only ever confirms candidates, never drops
/// one.
fn invariants_differ(p: &FiniteOperad, q: &FiniteOperad) -> bool {
    if count_true(&p.constant_flags()) != count_true(&q.constant_flags()) {
        return true;
    }
    let profile = |op: &FiniteOperad| -> Vec<usize> {
        op.surjective_flags().iter().map(|row| count_true(row)).collect()
    };
    if profile(p) != profile(q) {
        return true;
    }
    if p.max_arity() >= 2 {
        let a = p.has_separating_property().expect("arity checked");
        let b = q.has_separating_property().expect("arity checked");
        if a.is_some() != b.is_some() {
            return true;
        }
    }
    false
}

fn scan(space: &SearchSpace, filtered: bool) -> SearchReport {
    let mut examined = 0u64;
    for p in enumerate_operads(space) {
        examined += 1;
        let rev = p.reverse();
        let distinct = if filtered && invariants_differ(&p, &rev) {
            true
        } else {
            p.find_isomorphism(&rev).is_none()
        };
        if distinct {
            let cert = verify_candidate(&p).expect("found candidate must certify");
            return SearchReport {
                space: space.clone(),
                total_candidates_examined: examined,
                found: Some((p, cert)),
                exhausted: false,
            };
        }
    }
    SearchReport {
        space: space.clone(),
        total_candidates_examined: examined,
        found: None,
        exhausted: true,
    }
}

/// Scans the enumeration stream for the first operad with no isomorphism to
/// its reverse, fast-pathing candidates whose cheap invariants already
/// separate them from the reverse.
pub fn search_self_reverse_distinct(space: &SearchSpace) -> SearchReport {
    scan(space, true)
}

/// Same scan with the invariant fast path disabled; every candidate goes
/// straight to the exhaustive isomorphism search. Reference mode for testing
/// that the filters never change an outcome.
pub fn search_self_reverse_distinct_unfiltered(space: &SearchSpace) -> SearchReport {
    scan(space, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operad::StructureError;

    fn space(sizes: &[usize]) -> SearchSpace {
        SearchSpace::new(sizes.to_vec()).unwrap()
    }

    #[test]
    fn space_validation() {
        assert!(matches!(
            SearchSpace::new(vec![3]),
            Err(SearchError::BadSpace(_))
        ));
        assert!(matches!(
            SearchSpace::new(vec![1, 0, 2]),
            Err(SearchError::BadSpace(_))
        ));
        assert!(SearchSpace::new(vec![0, 1]).is_ok());
        let s = space(&[0, 2, 2]);
        assert_eq!(s.max_arity(), 2);
        assert_eq!(s.total_size(), 4);
        assert_eq!(s.to_string(), "max_arity 2, sizes (0, 2, 2)");
    }

    #[test]
    fn sweep_order_is_total_then_lex() {
        let spaces = sweep_spaces(2, 2);
        assert_eq!(spaces.len(), 18);
        assert_eq!(spaces[0].carrier_sizes(), &[0, 1, 0]);
        let totals: Vec<usize> = spaces.iter().map(|s| s.total_size()).collect();
        assert!(totals.windows(2).all(|w| w[0] <= w[1]));
        let first_total4 = spaces.iter().find(|s| s.total_size() == 4).unwrap();
        assert_eq!(first_total4.carrier_sizes(), &[0, 2, 2]);
        assert_eq!(spaces.last().unwrap().carrier_sizes(), &[2, 2, 2]);
    }

    fn naive_valid_count(sizes: &[usize]) -> usize {
        let shape = Shape::new(sizes).unwrap();
        let domains: Vec<Vec<u16>> = shape
            .entries
            .iter()
            .map(|(_, args)| {
                let k: usize = args.iter().map(|&g| shape.arity_of(g)).sum();
                shape.gids[k].clone()
            })
            .collect();
        if domains.iter().any(|d| d.is_empty()) {
            return 0;
        }
        let labels = default_labels(sizes);
        let mut idx = vec![0usize; domains.len()];
        let mut count = 0usize;
        loop {
            let values: Vec<u16> = idx.iter().zip(&domains).map(|(&i, d)| d[i]).collect();
            let op = FiniteOperad::from_packed(
                "naive",
                labels.clone(),
                ElemRef::new(1, 0),
                shape.clone(),
                values,
            );
            if op.validate().ok() {
                count += 1;
            }
            let mut d = domains.len();
            loop {
                if d == 0 {
                    return count;
                }
                d -= 1;
                idx[d] += 1;
                if idx[d] < domains[d].len() {
                    break;
                }
                idx[d] = 0;
            }
        }
    }

    #[test]
    fn enumerator_matches_naive_generate_and_filter() {
        for sizes in [
            vec![0, 1],
            vec![0, 2],
            vec![1, 1],
            vec![0, 1, 0],
            vec![0, 1, 1],
            vec![1, 1, 1],
            vec![0, 2, 0],
            vec![0, 2, 1],
            vec![0, 1, 2],
            vec![1, 2, 1],
            vec![2, 1, 1],
        ] {
            let streamed: Vec<FiniteOperad> = enumerate_operads(&space(&sizes)).collect();
            for op in &streamed {
                assert!(op.validate().ok(), "{} fails laws", op.name());
            }
            let mut tables: Vec<String> = streamed.iter().map(print_operad).collect();
            tables.sort();
            tables.dedup();
            assert_eq!(tables.len(), streamed.len(), "duplicate table at {sizes:?}");
            assert_eq!(
                streamed.len(),
                naive_valid_count(&sizes),
                "count mismatch at {sizes:?}"
            );
        }
    }

    #[test]
    fn fully_forced_spaces_are_singletons() {
        assert_eq!(enumerate_operads(&space(&[0, 1])).count(), 1);
        let ops: Vec<FiniteOperad> = enumerate_operads(&space(&[1, 1, 1])).collect();
        assert_eq!(ops.len(), 1);
        assert!(ops[0].validate().ok());
    }

    #[test]
    fn order_two_monoids() {
        let ops: Vec<FiniteOperad> = enumerate_operads(&space(&[0, 2])).collect();
        assert_eq!(ops.len(), 2);
        let id = ElemRef::new(1, 0);
        let a = ElemRef::new(1, 1);
        let squares: Vec<ElemRef> = ops.iter().map(|op| op.compose(a, &[a]).unwrap()).collect();
        assert!(squares.contains(&id), "missing the order-2 group");
        assert!(squares.contains(&a), "missing the idempotent monoid");
    }

    #[test]
    fn empty_result_carrier_empties_the_space() {
        let s = space(&[1, 1, 0, 1]);
        assert_eq!(enumerate_operads(&s).count(), 0);
        let report = search_self_reverse_distinct(&s);
        assert!(report.exhausted);
        assert_eq!(report.total_candidates_examined, 0);
    }

    #[test]
    fn arity_one_spaces_always_exhaust() {
        for sizes in [vec![0, 2], vec![1, 2], vec![0, 3]] {
            let report = search_self_reverse_distinct(&space(&sizes));
            assert!(report.exhausted, "{sizes:?} should exhaust");
            assert!(report.found.is_none());
        }
    }

    #[test]
    fn filtered_and_unfiltered_scans_agree() {
        let mut spaces = Vec::new();
        for s in sweep_spaces(1, 3) {
            if s.total_size() <= 4 {
                spaces.push(s);
            }
        }
        for s in sweep_spaces(2, 2) {
            if s.total_size() <= 4 {
                spaces.push(s);
            }
        }
        assert!(spaces.len() >= 15);
        for s in &spaces {
            let a = search_self_reverse_distinct(s);
            let b = search_self_reverse_distinct_unfiltered(s);
            assert_eq!(a.exhausted, b.exhausted, "outcome differs at {s}");
            assert_eq!(
                a.total_candidates_examined, b.total_candidates_examined,
                "stop point differs at {s}"
            );
            match (&a.found, &b.found) {
                (None, None) => {}
                (Some((p, _)), Some((q, _))) => assert_eq!(p, q, "fixture differs at {s}"),
                _ => panic!("found/exhausted split at {s}"),
            }
        }
    }

    #[test]
    fn sweep_finds_first_counterexample_at_0_2_2() {
        for s in sweep_spaces(2, 2) {
            let report = search_self_reverse_distinct(&s);
            if s.total_size() <= 3 {
                assert!(report.exhausted, "unexpected find at {s}");
                continue;
            }
            assert_eq!(s.carrier_sizes(), &[0, 2, 2]);
            let (op, cert) = report.found.as_ref().expect("counterexample exists here");
            assert!(cert.is_counterexample());
            assert!(op.find_isomorphism(&op.reverse()).is_none());
            assert_eq!(cert.iota_sizes_checked, vec![0, 1, 2, 3]);
            assert_eq!(report.total_candidates_examined, 2);
            assert_eq!(
                print_operad(op),
                include_str!("../fixtures/search-found.operad")
            );
            return;
        }
        panic!("no counterexample found in the sweep");
    }

    #[test]
    fn search_reports_are_reproducible() {
        let s = space(&[0, 2, 2]);
        let a = search_self_reverse_distinct(&s).to_string();
        let b = search_self_reverse_distinct(&s).to_string();
        assert_eq!(a, b);
        assert!(a.starts_with("search report (truncation bound 2)\n"));
        assert!(a.contains("candidates examined:"));
    }

    #[test]
    fn certificate_on_the_terminal_operad_shows_the_isomorphism() {
        let t = FiniteOperad::terminal(2);
        let cert = verify_candidate(&t).unwrap();
        assert!(!cert.is_counterexample());
        let m = cert.iso_to_reverse.as_ref().unwrap();
        for e in t.elements() {
            assert_eq!(m.apply(e), e);
        }
        let text = cert.to_string();
        assert!(text.contains("verdict: isomorphic to its reverse"));
        assert!(text.contains("|X| in {0, 1, 2, 3}"));
    }

    #[test]
    fn verify_candidate_rejects_invalid_tables() {
        let labels = default_labels(&[0, 2]);
        let id = ElemRef::new(1, 0);
        let a = ElemRef::new(1, 1);
        let bad = FiniteOperad::from_parts(
            "bad",
            labels,
            id,
            &[
                (id, vec![id], id),
                (id, vec![a], a),
                (a, vec![id], id),
                (a, vec![a], a),
            ],
        );
        assert!(matches!(bad, Err(StructureError::MissingEntry(_))) == false);
        let bad = bad.unwrap();
        let err = verify_candidate(&bad).unwrap_err();
        match err {
            SearchError::StageFailed { stage, .. } => assert_eq!(stage, "validate"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn random_operads_are_valid_and_seed_stable() {
        let s = space(&[0, 2, 2]);
        let ops = random_valid_operads(&s, 11, 25);
        assert_eq!(ops.len(), 25);
        for op in &ops {
            assert!(op.validate().ok());
            assert!(op.reverse().validate().ok());
            assert_eq!(op.reverse().reverse(), *op);
        }
        let again = random_valid_operads(&s, 11, 25);
        assert_eq!(ops, again);
        let other = random_valid_operads(&s, 12, 25);
        assert_ne!(ops, other);
    }
}
