//! An operad of tuples of piecewise-linear interval maps, with decidable
//! stand-ins for the quantified properties "is a constant element" and "is a
//! surjective element", and a demonstration that the reverse operad fails
//! the separating property the original satisfies.
//!
//! An element of arity n is a tuple `(f_1, ..., f_n)` whose images are
//! weakly ordered left to right: `sup(f_i) <= f_{i+1}(0)`. Composition
//! substitutes tuples into the slots of a tuple and concatenates.

mod plmap;

use std::collections::BTreeSet;
use std::fmt;

pub use plmap::{
    constancy_witness, is_constant_map, pl_compose, pl_eval, pl_sup, q, IntervalError, PLMap, Q,
};

use num_traits::{One, Zero};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct IntervalElement {
    maps: Vec<PLMap>,
}

impl IntervalElement {
    pub fn arity(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[PLMap] {
        &self.maps
    }

    /// The arity-1 element carrying the identity map.
    pub fn unit() -> IntervalElement {
        tuple_validate(vec![PLMap::identity()]).unwrap()
    }
}

impl fmt::Display for IntervalElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.maps.iter().map(|m| m.to_string()).collect();
        write!(f, "tuple {} [{}]", self.maps.len(), parts.join("; "))
    }
}

/// Checks the weak left-to-right ordering `sup(f_i) <= f_{i+1}(0)` on
/// consecutive maps; transitivity makes the consecutive check sufficient.
pub fn tuple_validate(maps: Vec<PLMap>) -> Result<IntervalElement, IntervalError> {
    for i in 1..maps.len() {
        let (sup, _) = pl_sup(&maps[i - 1]);
        let next = maps[i].at_zero();
        if sup > *next {
            return Err(IntervalError::TupleOrder(i - 1, i, sup, next.clone()));
        }
    }
    Ok(IntervalElement { maps })
}

/// Operadic composition: substitute `args[i]` into the i-th slot of `theta`
/// and concatenate, composing each inner map with the slot's outer map.
pub fn interval_compose(
    theta: &IntervalElement,
    args: &[IntervalElement],
) -> Result<IntervalElement, IntervalError> {
    if theta.arity() != args.len() {
        return Err(IntervalError::ArityMismatch {
            expected: theta.arity(),
            got: args.len(),
        });
    }
    let mut maps = Vec::new();
    for (f, arg) in theta.maps.iter().zip(args) {
        for g in &arg.maps {
            maps.push(pl_compose(f, g));
        }
    }
    Ok(tuple_validate(maps).expect("composite of ordered tuples stays ordered"))
}

/// Decides surjectivity of the union of images: the first map must start at
/// 0, each junction must be covered (`f_i(0)` equal to the previous sup,
/// which closes the junction whether or not that sup is attained), and the
/// last sup must be 1.
pub fn is_surjective_tuple(e: &IntervalElement) -> bool {
    let n = e.arity();
    if n == 0 {
        return false;
    }
    if !e.maps[0].at_zero().is_zero() {
        return false;
    }
    for i in 1..n {
        let (sup, _) = pl_sup(&e.maps[i - 1]);
        if *e.maps[i].at_zero() != sup {
            return false;
        }
    }
    pl_sup(&e.maps[n - 1]).0.is_one()
}

/// The leftmost open interval missed by the union of images, if any.
pub fn first_gap(e: &IntervalElement) -> Option<(Q, Q)> {
    if e.arity() == 0 {
        return Some((Q::zero(), Q::one()));
    }
    let start = e.maps[0].at_zero();
    if !start.is_zero() {
        return Some((Q::zero(), start.clone()));
    }
    for i in 1..e.arity() {
        let (sup, _) = pl_sup(&e.maps[i - 1]);
        let next = e.maps[i].at_zero();
        if *next > sup {
            return Some((sup, next.clone()));
        }
    }
    let (sup, _) = pl_sup(e.maps.last().unwrap());
    if !sup.is_one() {
        return Some((sup, Q::one()));
    }
    None
}

/// For a non-surjective element, a unary map `h != id` with `h . e = e`:
/// the identity outside the first gap `(a,b)`, bumped inside it through the
/// knots `(a+d/4, a+d/2)` and `(a+3d/4, a+3d/4)` where `d = b-a`.
pub fn surjectivity_witness(e: &IntervalElement) -> Option<PLMap> {
    let (a, b) = first_gap(e)?;
    let d = &b - &a;
    let quarter = q(1, 4);
    let mut points = vec![(Q::zero(), Q::zero())];
    if !a.is_zero() {
        points.push((a.clone(), a.clone()));
    }
    points.push((&a + &d * &quarter, &a + &d * q(1, 2)));
    points.push((&a + &d * q(3, 4), &a + &d * q(3, 4)));
    if !b.is_one() {
        points.push((b.clone(), b.clone()));
    }
    let h = PLMap::new(points, Q::one()).expect("bump stays inside the gap");
    debug_assert!(!h.is_identity());
    Some(h)
}

/// All canonical maps whose breakpoints use at most `max_interior` interior
/// knots and coordinates with denominator at most `denom_bound` (limits may
/// also be 1). Duplicates arising from collinear raw combinations are
/// removed.
pub fn pl_family(max_interior: usize, denom_bound: i64) -> Vec<PLMap> {
    let vals = coordinate_grid(denom_bound);
    let mut limits = vals.clone();
    limits.push(Q::one());
    let abscissae: Vec<Q> = vals.iter().skip(1).cloned().collect();
    let mut out = BTreeSet::new();
    for m in 0..=max_interior {
        for ts in combinations(&abscissae, m) {
            for vs in multisets(&vals, m + 1) {
                for limit in limits.iter().filter(|l| *l >= vs.last().unwrap()) {
                    let mut points = vec![(Q::zero(), vs[0].clone())];
                    for (t, v) in ts.iter().zip(vs.iter().skip(1)) {
                        points.push((t.clone(), v.clone()));
                    }
                    out.insert(PLMap::new(points, limit.clone()).unwrap());
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Rationals in `[0,1)` with denominator at most `bound`, ascending.
pub fn coordinate_grid(bound: i64) -> Vec<Q> {
    let mut set = BTreeSet::new();
    for d in 1..=bound {
        for n in 0..d {
            set.insert(q(n, d));
        }
    }
    set.into_iter().collect()
}

fn combinations(items: &[Q], k: usize) -> Vec<Vec<Q>> {
    use itertools::Itertools;
    if k == 0 {
        return vec![vec![]];
    }
    items.iter().cloned().combinations(k).collect()
}

fn multisets(items: &[Q], k: usize) -> Vec<Vec<Q>> {
    use itertools::Itertools;
    items.iter().cloned().combinations_with_replacement(k).collect()
}

/// Outcome of the separation argument: the property "some composite with a
/// constant in the first slot is surjective" holds for the operad and fails
/// for its reverse over an exhaustive finite family of candidates.
pub struct SeparationReport {
    pub gamma: IntervalElement,
    pub phi: IntervalElement,
    pub forward_composite: IntervalElement,
    pub family_size: usize,
    pub pairs_checked: usize,
    pub constants_used: usize,
    pub rev_composites_checked: usize,
    pub rev_surjective_found: usize,
}

impl fmt::Display for SeparationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "interval operad separation")?;
        writeln!(f, "  gamma = {}", self.gamma)?;
        writeln!(f, "  phi = {}", self.phi)?;
        writeln!(
            f,
            "  phi . (gamma, unit) = {} : constant first slot, surjective composite",
            self.forward_composite
        )?;
        writeln!(
            f,
            "  family: {} canonical maps (<= 2 interior breakpoints, denominators <= 4)",
            self.family_size
        )?;
        writeln!(
            f,
            "  reversed side: {} ordered pairs, {} constants, {} composites phi' .rev (gamma', unit) checked",
            self.pairs_checked, self.constants_used, self.rev_composites_checked
        )?;
        writeln!(
            f,
            "  surjective reversed composites found: {}",
            self.rev_surjective_found
        )?;
        write!(
            f,
            "P is not isomorphic to rev(P) at the decidable level: separating property holds for P, fails for rev(P)"
        )
    }
}

/// Builds the witnessing elements, checks the forward composite is
/// surjective with a constant first argument, and exhaustively verifies
/// that no reversed composite over the finite family is surjective. Every
/// reversed composite ends in a constant map with value below 1, so its
/// image stays inside a proper subinterval; the surjectivity test confirms
/// this independently per composite.
pub fn separation_demo() -> SeparationReport {
    let zero = PLMap::constant(Q::zero()).unwrap();
    let gamma = tuple_validate(vec![zero.clone()]).unwrap();
    let phi = tuple_validate(vec![zero, PLMap::identity()]).unwrap();
    let unit = IntervalElement::unit();

    assert!(is_constant_map(&gamma.maps()[0]), "gamma must be constant");
    assert!(constancy_witness(&gamma.maps()[0]).is_none());
    let forward = interval_compose(&phi, &[gamma.clone(), unit.clone()]).unwrap();
    assert!(
        is_surjective_tuple(&forward),
        "forward composite {forward} must be surjective"
    );
    assert!(surjectivity_witness(&forward).is_none());

    let family = pl_family(2, 4);
    let constants: Vec<IntervalElement> = family
        .iter()
        .filter(|g| is_constant_map(g))
        .map(|g| tuple_validate(vec![g.clone()]).unwrap())
        .collect();

    let mut pairs_checked = 0usize;
    let mut rev_checked = 0usize;
    let mut rev_surjective = 0usize;
    for f2 in &family {
        let start = f2.at_zero();
        for f1 in &family {
            if pl_sup(f1).0 > *start {
                continue;
            }
            let phi2 = tuple_validate(vec![f1.clone(), f2.clone()]).unwrap();
            pairs_checked += 1;
            for gamma2 in &constants {
                // reversed composition swaps the argument list
                let e = interval_compose(&phi2, &[unit.clone(), gamma2.clone()]).unwrap();
                let (last_sup, _) = pl_sup(&e.maps()[1]);
                assert!(last_sup < Q::one(), "image bound violated by {e}");
                if is_surjective_tuple(&e) {
                    rev_surjective += 1;
                }
                rev_checked += 1;
            }
        }
    }
    assert_eq!(
        rev_surjective, 0,
        "a reversed composite was surjective, separation fails"
    );

    SeparationReport {
        gamma,
        phi,
        forward_composite: forward,
        family_size: family.len(),
        pairs_checked,
        constants_used: constants.len(),
        rev_composites_checked: rev_checked,
        rev_surjective_found: rev_surjective,
    }
}
