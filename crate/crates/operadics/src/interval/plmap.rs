//! Exact piecewise-linear order-preserving self-maps of `[0,1)`.
//!
//! A map is stored as its breakpoints `(t_j, v_j)` with `0 = t_0 < t_1 <
//! ... < t_m < 1` plus the one-sided limit at 1; between breakpoints the map
//! interpolates linearly, and the final piece runs from the last breakpoint
//! toward `(1, limit)`. Values stay in `[0,1)`: the limit may be 1 but is
//! then never attained. All arithmetic is exact rational arithmetic, and
//! every constructor reduces to a canonical form with no collinear interior
//! breakpoints, so structural equality decides functional equality.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Q = BigRational;

/// Shorthand for a rational from small integers.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(n.into(), d.into())
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IntervalError {
    #[error("argument {0} lies outside [0,1)")]
    OutsideDomain(Q),
    #[error("bad breakpoints: {0}")]
    BadBreakpoints(String),
    #[error("tuple order violated between positions {0} and {1}: sup {2} exceeds next start {3}")]
    TupleOrder(usize, usize, Q, Q),
    #[error("arity mismatch: tuple has {expected} maps, got {got} arguments")]
    ArityMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PLMap {
    points: Vec<(Q, Q)>,
    limit: Q,
}

fn collinear(a: &(Q, Q), b: &(Q, Q), c: &(Q, Q)) -> bool {
    (&b.1 - &a.1) * (&c.0 - &b.0) == (&c.1 - &b.1) * (&b.0 - &a.0)
}

impl PLMap {
    /// Validates breakpoints and limit, then removes collinear interior
    /// points (the final piece toward `(1, limit)` participates, so a knot
    /// that merely continues the last slope disappears too).
    pub fn new(points: Vec<(Q, Q)>, limit: Q) -> Result<PLMap, IntervalError> {
        let bad = |msg: &str| Err(IntervalError::BadBreakpoints(msg.to_string()));
        if points.is_empty() {
            return bad("at least one breakpoint is required");
        }
        if !points[0].0.is_zero() {
            return bad("the first abscissa must be 0");
        }
        for w in points.windows(2) {
            if w[0].0 >= w[1].0 {
                return bad("abscissae must strictly increase");
            }
            if w[0].1 > w[1].1 {
                return bad("values must be nondecreasing");
            }
        }
        let last = points.last().unwrap();
        if last.0 >= Q::one() {
            return bad("abscissae must stay below 1");
        }
        for (_, v) in &points {
            if v < &Q::zero() || v >= &Q::one() {
                return bad("values must lie in [0,1)");
            }
        }
        if limit < last.1 || limit > Q::one() {
            return bad("the limit must lie between the last value and 1");
        }
        let mut canon: Vec<(Q, Q)> = Vec::with_capacity(points.len() + 1);
        for p in points.into_iter().chain(std::iter::once((Q::one(), limit.clone()))) {
            while canon.len() >= 2 && collinear(&canon[canon.len() - 2], &canon[canon.len() - 1], &p)
            {
                canon.pop();
            }
            canon.push(p);
        }
        canon.pop();
        Ok(PLMap {
            points: canon,
            limit,
        })
    }

    pub fn identity() -> PLMap {
        PLMap::new(vec![(Q::zero(), Q::zero())], Q::one()).unwrap()
    }

    pub fn constant(c: Q) -> Result<PLMap, IntervalError> {
        PLMap::new(vec![(Q::zero(), c.clone())], c)
    }

    pub fn points(&self) -> &[(Q, Q)] {
        &self.points
    }

    pub fn limit(&self) -> &Q {
        &self.limit
    }

    /// The value at 0, the left end of the image.
    pub fn at_zero(&self) -> &Q {
        &self.points[0].1
    }

    pub fn is_identity(&self) -> bool {
        self.points.len() == 1 && self.points[0].1.is_zero() && self.limit.is_one()
    }
}

impl fmt::Display for PLMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pts: Vec<String> = self
            .points
            .iter()
            .map(|(t, v)| format!("({t},{v})"))
            .collect();
        write!(f, "pl [{}] limit {}", pts.join(","), self.limit)
    }
}

/// Exact evaluation by linear interpolation.
pub fn pl_eval(f: &PLMap, t: &Q) -> Result<Q, IntervalError> {
    if t < &Q::zero() || t >= &Q::one() {
        return Err(IntervalError::OutsideDomain(t.clone()));
    }
    let i = f.points.partition_point(|p| &p.0 <= t) - 1;
    let (t1, v1) = &f.points[i];
    let (t2, v2) = match f.points.get(i + 1) {
        Some((t2, v2)) => (t2.clone(), v2.clone()),
        None => (Q::one(), f.limit.clone()),
    };
    if t == t1 {
        return Ok(v1.clone());
    }
    Ok(v1 + (v2 - v1) * (t - t1) / (t2 - t1))
}

/// The supremum of the image and whether it is attained. The sup is always
/// the limit field; it is attained exactly when the final piece is flat.
pub fn pl_sup(f: &PLMap) -> (Q, bool) {
    let attained = f.limit == f.points.last().unwrap().1;
    (f.limit.clone(), attained)
}

/// Exact composition `f . g` (apply `g` first). Breakpoints of the result
/// are the breakpoints of `g` together with the `g`-preimages of the
/// interior breakpoints of `f`, solved exactly on the linear pieces.
pub fn pl_compose(f: &PLMap, g: &PLMap) -> PLMap {
    let mut ts: Vec<Q> = g.points.iter().map(|(t, _)| t.clone()).collect();
    for (s, _) in f.points.iter().skip(1) {
        for i in 0..g.points.len() {
            let (u1, w1) = &g.points[i];
            let (u2, w2) = match g.points.get(i + 1) {
                Some((u2, w2)) => (u2.clone(), w2.clone()),
                None => (Q::one(), g.limit.clone()),
            };
            if w1 < s && s < &w2 {
                ts.push(u1 + (s - w1) * (&u2 - u1) / (&w2 - w1));
            }
        }
    }
    ts.sort();
    ts.dedup();
    let points: Vec<(Q, Q)> = ts
        .into_iter()
        .map(|t| {
            let v = pl_eval(f, &pl_eval(g, &t).unwrap()).unwrap();
            (t, v)
        })
        .collect();
    let limit = if g.limit.is_one() {
        f.limit.clone()
    } else {
        pl_eval(f, &g.limit).unwrap()
    };
    PLMap::new(points, limit).expect("composite of valid maps is valid")
}

/// Whether the map takes a single value.
pub fn is_constant_map(g: &PLMap) -> bool {
    g.points.iter().all(|(_, v)| v == g.at_zero()) && g.limit == *g.at_zero()
}

/// For a non-constant map, two constant maps whose composites under `g`
/// differ: probes at the first pair of breakpoint abscissae with different
/// values, falling back to the midpoint of the final rising piece.
pub fn constancy_witness(g: &PLMap) -> Option<(PLMap, PLMap)> {
    if is_constant_map(g) {
        return None;
    }
    let t0 = g.points[0].0.clone();
    let v0 = g.points[0].1.clone();
    let probe = match g.points.iter().find(|(_, v)| *v != v0) {
        Some((t, _)) => t.clone(),
        None => {
            // all breakpoint values agree, so the final piece rises
            let tm = &g.points.last().unwrap().0;
            (tm + Q::one()) / q(2, 1)
        }
    };
    let a = PLMap::constant(t0).unwrap();
    let b = PLMap::constant(probe).unwrap();
    debug_assert_ne!(pl_compose(g, &a), pl_compose(g, &b));
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_scale() -> PLMap {
        PLMap::new(vec![(Q::zero(), Q::zero())], q(1, 2)).unwrap()
    }

    #[test]
    fn eval_basics() {
        let id = PLMap::identity();
        assert_eq!(pl_eval(&id, &q(1, 3)).unwrap(), q(1, 3));
        let c = PLMap::constant(Q::zero()).unwrap();
        assert_eq!(pl_eval(&c, &q(7, 9)).unwrap(), Q::zero());
        assert_eq!(pl_eval(&half_scale(), &q(1, 2)).unwrap(), q(1, 4));
        assert!(matches!(
            pl_eval(&id, &Q::one()),
            Err(IntervalError::OutsideDomain(_))
        ));
        assert!(pl_eval(&id, &q(-1, 2)).is_err());
    }

    #[test]
    fn eval_multi_piece() {
        // flat at 1/4 until 1/2, then rising to 3/4
        let f = PLMap::new(vec![(Q::zero(), q(1, 4)), (q(1, 2), q(1, 4))], q(3, 4)).unwrap();
        assert_eq!(pl_eval(&f, &q(1, 4)).unwrap(), q(1, 4));
        assert_eq!(pl_eval(&f, &q(1, 2)).unwrap(), q(1, 4));
        assert_eq!(pl_eval(&f, &q(3, 4)).unwrap(), q(1, 2));
    }

    #[test]
    fn canonical_form_removes_collinear_points() {
        let verbose = PLMap::new(
            vec![(Q::zero(), Q::zero()), (q(1, 2), q(1, 2)), (q(2, 3), q(2, 3))],
            Q::one(),
        )
        .unwrap();
        assert_eq!(verbose, PLMap::identity());
        assert_eq!(verbose.points().len(), 1);

        let flat = PLMap::new(
            vec![(Q::zero(), q(1, 4)), (q(1, 2), q(1, 4))],
            q(1, 4),
        )
        .unwrap();
        assert_eq!(flat, PLMap::constant(q(1, 4)).unwrap());
    }

    #[test]
    fn invalid_breakpoints_are_rejected() {
        assert!(PLMap::new(vec![], Q::one()).is_err());
        assert!(PLMap::new(vec![(q(1, 4), Q::zero())], Q::one()).is_err());
        assert!(PLMap::new(vec![(Q::zero(), Q::zero()), (Q::zero(), q(1, 2))], Q::one()).is_err());
        assert!(PLMap::new(vec![(Q::zero(), q(1, 2)), (q(1, 2), q(1, 4))], Q::one()).is_err());
        assert!(PLMap::new(vec![(Q::zero(), Q::one())], Q::one()).is_err());
        assert!(PLMap::new(vec![(Q::zero(), q(1, 2))], q(1, 4)).is_err());
        assert!(PLMap::new(vec![(Q::zero(), Q::zero())], q(3, 2)).is_err());
    }

    #[test]
    fn sup_examples() {
        assert_eq!(pl_sup(&PLMap::identity()), (Q::one(), false));
        assert_eq!(pl_sup(&PLMap::constant(Q::zero()).unwrap()), (Q::zero(), true));
        let capped = PLMap::new(vec![(Q::zero(), Q::zero()), (q(1, 2), q(1, 2))], q(1, 2)).unwrap();
        assert_eq!(pl_sup(&capped), (q(1, 2), true));
        assert_eq!(pl_sup(&half_scale()), (q(1, 2), false));
    }

    #[test]
    fn compose_units_and_constants() {
        let f = PLMap::new(vec![(Q::zero(), q(1, 4)), (q(1, 2), q(1, 4))], q(3, 4)).unwrap();
        let id = PLMap::identity();
        assert_eq!(pl_compose(&f, &id), f);
        assert_eq!(pl_compose(&id, &f), f);
        let c = PLMap::constant(q(3, 4)).unwrap();
        assert_eq!(pl_compose(&f, &c), PLMap::constant(q(1, 2)).unwrap());
    }

    #[test]
    fn compose_scaling() {
        let h = half_scale();
        let quarter = pl_compose(&h, &h);
        assert_eq!(quarter, PLMap::new(vec![(Q::zero(), Q::zero())], q(1, 4)).unwrap());
        // probe grid agreement
        for d in 1..=16i64 {
            for n in 0..d {
                let t = q(n, d);
                let direct = pl_eval(&quarter, &t).unwrap();
                let nested = pl_eval(&h, &pl_eval(&h, &t).unwrap()).unwrap();
                assert_eq!(direct, nested);
            }
        }
    }

    #[test]
    fn compose_tracks_breakpoint_preimages() {
        // f bends at 1/2, g passes through 1/2 at t = 1/4
        let f = PLMap::new(vec![(Q::zero(), Q::zero()), (q(1, 2), q(1, 4))], q(1, 2)).unwrap();
        let g = PLMap::new(vec![(Q::zero(), Q::zero()), (q(1, 4), q(1, 2))], Q::one()).unwrap();
        let h = pl_compose(&f, &g);
        assert_eq!(h.points().len(), 2);
        assert_eq!(h.points()[1].0, q(1, 4));
        assert_eq!(pl_eval(&h, &q(1, 4)).unwrap(), q(1, 4));
        for d in 1..=12i64 {
            for n in 0..d {
                let t = q(n, d);
                assert_eq!(
                    pl_eval(&h, &t).unwrap(),
                    pl_eval(&f, &pl_eval(&g, &t).unwrap()).unwrap()
                );
            }
        }
    }

    #[test]
    fn compose_with_flat_tail_limit() {
        // g attains its sup, so the composite's limit is f at that value
        let g = PLMap::new(vec![(Q::zero(), Q::zero()), (q(1, 2), q(1, 2))], q(1, 2)).unwrap();
        let f = half_scale();
        let h = pl_compose(&f, &g);
        assert_eq!(pl_sup(&h), (q(1, 4), true));
    }

    #[test]
    fn constancy_examples() {
        assert!(is_constant_map(&PLMap::constant(q(1, 4)).unwrap()));
        assert!(!is_constant_map(&PLMap::identity()));
        assert!(constancy_witness(&PLMap::constant(Q::zero()).unwrap()).is_none());

        let (a, b) = constancy_witness(&PLMap::identity()).unwrap();
        assert_eq!(a, PLMap::constant(Q::zero()).unwrap());
        assert_eq!(b, PLMap::constant(q(1, 2)).unwrap());
        assert_ne!(
            pl_compose(&PLMap::identity(), &a),
            pl_compose(&PLMap::identity(), &b)
        );

        // flat then rising: probes straddle the rise
        let g = PLMap::new(vec![(Q::zero(), q(1, 4)), (q(1, 2), q(1, 4))], q(3, 4)).unwrap();
        let (a, b) = constancy_witness(&g).unwrap();
        assert_ne!(pl_compose(&g, &a), pl_compose(&g, &b));
    }

    #[test]
    fn display_format() {
        assert_eq!(PLMap::identity().to_string(), "pl [(0,0)] limit 1");
        assert_eq!(
            PLMap::new(vec![(Q::zero(), q(1, 4)), (q(1, 2), q(1, 4))], q(3, 4))
                .unwrap()
                .to_string(),
            "pl [(0,1/4),(1/2,1/4)] limit 3/4"
        );
    }
}
