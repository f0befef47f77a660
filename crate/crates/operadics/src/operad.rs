//! Finite truncated planar operads with explicit composition tables.
//!
//! A [`FiniteOperad`] stores carriers `P(0)..P(N)` for a truncation bound
//! `N`, an identity element in `P(1)`, and a total composition table.
//! Composing `theta` in `P(n)` with arguments of arities `k_1..k_n` is
//! admissible exactly when `n <= N`, every `k_i <= N`, and
//! `k_1 + .. + k_n <= N`; the composite lands in `P(k_1 + .. + k_n)`.
//! Every claim made by the checkers in this crate is therefore a claim about
//! the truncated structure only.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::report::LawReport;

/// Largest supported truncation bound. Composition keys pack an operator and
/// up to this many argument ids into a 128-bit word.
pub const MAX_SUPPORTED_ARITY: usize = 7;

/// Position of an element: its arity block and index within that block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElemRef {
    pub arity: usize,
    pub index: usize,
}

impl ElemRef {
    pub fn new(arity: usize, index: usize) -> Self {
        ElemRef { arity, index }
    }
}

impl fmt::Display for ElemRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.arity, self.index)
    }
}

/// Runtime errors for composition and the decision procedures.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OperadError {
    #[error("unknown element {0}")]
    UnknownElement(ElemRef),
    #[error("arity mismatch: operator expects {expected} argument(s), got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("truncation overflow: composite arity {total} exceeds max_arity {max_arity}")]
    TruncationOverflow { total: usize, max_arity: usize },
    #[error("precondition not met: {0}")]
    Precondition(String),
}

/// Structural defects found while building an operad, reported separately
/// from law violations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StructureError {
    #[error("max_arity {0} exceeds the supported bound {MAX_SUPPORTED_ARITY}")]
    ArityBound(usize),
    #[error("carriers must cover arities 0..=1 at least")]
    TooFewCarriers,
    #[error("identity must have arity 1, got arity {0}")]
    IdentityArity(usize),
    #[error("identity index {0} is out of range for P(1)")]
    IdentityRange(usize),
    #[error("label {0:?} appears twice within arity {1}")]
    DuplicateLabel(String, usize),
    #[error("label {0:?} is reused at arities {1} and {2}; composition lines referencing it would be ambiguous")]
    AmbiguousLabel(String, usize, usize),
    #[error("element reference {0} is out of range")]
    BadRef(ElemRef),
    #[error("composition entry {0} is inadmissible: {1}")]
    BadEntry(String, String),
    #[error("duplicate composition entry {0}")]
    DuplicateEntry(String),
    #[error("missing composition entry {0}")]
    MissingEntry(String),
    #[error("composition entry {0} has result of arity {1}, expected {2}")]
    BadResultArity(String, usize, usize),
}

fn pack_key(theta: u16, args: &[u16]) -> u128 {
    debug_assert!(args.len() <= MAX_SUPPORTED_ARITY);
    let mut k = (theta as u128 + 1) << 112;
    for (i, &a) in args.iter().enumerate() {
        k |= (a as u128 + 1) << (96 - 16 * i);
    }
    k
}

/// Table geometry shared by every operad with the same carrier sizes: global
/// element ids, the canonical list of admissible composition entries, and the
/// associativity instances over them.
#[derive(Debug)]
pub(crate) struct Shape {
    pub(crate) max_arity: usize,
    pub(crate) sizes: Vec<usize>,
    pub(crate) elems: Vec<(usize, usize)>,
    pub(crate) gids: Vec<Vec<u16>>,
    pub(crate) entries: Vec<(u16, Vec<u16>)>,
    keys: Vec<u128>,
}

impl Shape {
    pub(crate) fn new(sizes: &[usize]) -> Result<Arc<Shape>, StructureError> {
        if sizes.len() < 2 {
            return Err(StructureError::TooFewCarriers);
        }
        let max_arity = sizes.len() - 1;
        if max_arity > MAX_SUPPORTED_ARITY {
            return Err(StructureError::ArityBound(max_arity));
        }
        let mut elems = Vec::new();
        let mut gids = Vec::with_capacity(sizes.len());
        for (arity, &sz) in sizes.iter().enumerate() {
            let mut row = Vec::with_capacity(sz);
            for index in 0..sz {
                row.push(elems.len() as u16);
                elems.push((arity, index));
            }
            gids.push(row);
        }
        let mut shape = Shape {
            max_arity,
            sizes: sizes.to_vec(),
            elems,
            gids,
            entries: Vec::new(),
            keys: Vec::new(),
        };
        let mut entries = Vec::new();
        let mut buf = Vec::new();
        for theta in 0..shape.elems.len() as u16 {
            let n = shape.arity_of(theta);
            shape.arg_tuples(n, shape.max_arity, &mut buf, &mut |args: &[u16]| {
                entries.push((theta, args.to_vec()));
            });
        }
        let keys: Vec<u128> = entries.iter().map(|(t, a)| pack_key(*t, a)).collect();
        debug_assert!(keys.windows(2).all(|w| w[0] < w[1]));
        shape.entries = entries;
        shape.keys = keys;
        Ok(Arc::new(shape))
    }

    pub(crate) fn elem(&self, gid: u16) -> ElemRef {
        let (arity, index) = self.elems[gid as usize];
        ElemRef { arity, index }
    }

    pub(crate) fn gid(&self, e: ElemRef) -> Option<u16> {
        self.gids
            .get(e.arity)
            .and_then(|row| row.get(e.index))
            .copied()
    }

    pub(crate) fn arity_of(&self, gid: u16) -> usize {
        self.elems[gid as usize].0
    }

    pub(crate) fn entry_id(&self, theta: u16, args: &[u16]) -> Option<u32> {
        let key = pack_key(theta, args);
        self.keys.binary_search(&key).ok().map(|i| i as u32)
    }

    /// Visits all tuples of `len` element ids whose arities sum to at most
    /// `budget`, in lexicographic order by id sequence.
    pub(crate) fn arg_tuples(
        &self,
        len: usize,
        budget: usize,
        buf: &mut Vec<u16>,
        f: &mut impl FnMut(&[u16]),
    ) {
        if len == 0 {
            f(buf);
            return;
        }
        for g in 0..self.elems.len() as u16 {
            let a = self.arity_of(g);
            if a > budget {
                continue;
            }
            buf.push(g);
            self.arg_tuples(len - 1, budget - a, buf, f);
            buf.pop();
        }
    }

    /// Visits every associativity instance: an outer operator `theta`,
    /// middle arguments `alphas`, and inner arguments `betas_flat` (one block
    /// per arity slot of each alpha, concatenated). Both evaluation orders of
    /// such an instance are admissible within the truncation.
    ///
    /// With `skip_for_identity` set, instances that hold by unit forcing
    /// alone (identity outer, all-identity middles or inners, or no inner
    /// arguments at all) are skipped; the enumeration backtracker relies on
    /// this, while `validate` passes `None` and checks everything.
    pub(crate) fn for_each_assoc_instance(
        &self,
        skip_for_identity: Option<u16>,
        f: &mut impl FnMut(u16, &[u16], &[u16]),
    ) {
        let mut alphas = Vec::new();
        let mut betas = Vec::new();
        for theta in 0..self.elems.len() as u16 {
            let n = self.arity_of(theta);
            if n == 0 {
                continue;
            }
            if skip_for_identity == Some(theta) {
                continue;
            }
            let shape = self;
            shape.arg_tuples(n, shape.max_arity, &mut alphas, &mut |mid: &[u16]| {
                let k: usize = mid.iter().map(|&g| shape.arity_of(g)).sum();
                if let Some(idg) = skip_for_identity {
                    if k == 0 || mid.iter().all(|&g| g == idg) {
                        return;
                    }
                }
                let mid = mid.to_vec();
                shape.arg_tuples(k, shape.max_arity, &mut betas, &mut |inner: &[u16]| {
                    if let Some(idg) = skip_for_identity {
                        if inner.iter().all(|&g| g == idg) {
                            return;
                        }
                    }
                    f(theta, &mid, inner);
                });
            });
        }
    }
}

pub(crate) enum InstEval {
    Pass,
    Fail { lhs: u16, rhs: u16 },
    Blocked(u32),
}

/// Evaluates one associativity instance against a (possibly partial) table.
/// Outer-first: `(theta . alphas) . betas`; inner-first:
/// `theta . (alpha_i . beta-block_i)`.
pub(crate) fn eval_assoc(
    shape: &Shape,
    get: &mut impl FnMut(u32) -> Option<u16>,
    theta: u16,
    alphas: &[u16],
    betas_flat: &[u16],
) -> InstEval {
    let e1 = shape.entry_id(theta, alphas).expect("admissible middle");
    let x = match get(e1) {
        Some(v) => v,
        None => return InstEval::Blocked(e1),
    };
    let e2 = shape.entry_id(x, betas_flat).expect("admissible outer");
    let lhs = match get(e2) {
        Some(v) => v,
        None => return InstEval::Blocked(e2),
    };
    let mut gammas = [0u16; MAX_SUPPORTED_ARITY];
    let mut off = 0usize;
    for (i, &a) in alphas.iter().enumerate() {
        let k = shape.arity_of(a);
        let e = shape
            .entry_id(a, &betas_flat[off..off + k])
            .expect("admissible inner");
        match get(e) {
            Some(v) => gammas[i] = v,
            None => return InstEval::Blocked(e),
        }
        off += k;
    }
    let e3 = shape
        .entry_id(theta, &gammas[..alphas.len()])
        .expect("admissible recombined");
    let rhs = match get(e3) {
        Some(v) => v,
        None => return InstEval::Blocked(e3),
    };
    if lhs == rhs {
        InstEval::Pass
    } else {
        InstEval::Fail { lhs, rhs }
    }
}

/// A finite truncated planar operad: labeled carriers, identity, and a total
/// composition table over all admissible tuples.
///
/// Equality compares carrier labels, identity position, and every table
/// entry; the name is ignored.
#[derive(Debug, Clone)]
pub struct FiniteOperad {
    name: String,
    labels: Vec<Vec<String>>,
    label_index: HashMap<String, ElemRef>,
    identity: ElemRef,
    pub(crate) shape: Arc<Shape>,
    pub(crate) values: Vec<u16>,
}

impl PartialEq for FiniteOperad {
    fn eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.identity == other.identity
            && self.shape.sizes == other.shape.sizes
            && self.values == other.values
    }
}

impl Eq for FiniteOperad {}

/// A witness for the separating property: a binary operator, a constant
/// unary element, and their composite `phi . (gamma, id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparatingWitness {
    pub phi: ElemRef,
    pub gamma: ElemRef,
    pub composite: ElemRef,
}

fn check_labels(labels: &[Vec<String>]) -> Result<(), StructureError> {
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for (arity, row) in labels.iter().enumerate() {
        let mut local: HashMap<&str, ()> = HashMap::new();
        for l in row {
            if local.insert(l.as_str(), ()).is_some() {
                return Err(StructureError::DuplicateLabel(l.clone(), arity));
            }
            if let Some(&prev) = seen.get(l.as_str()) {
                return Err(StructureError::AmbiguousLabel(l.clone(), prev, arity));
            }
        }
        for l in row {
            seen.insert(l.as_str(), arity);
        }
    }
    Ok(())
}

impl FiniteOperad {
    /// Builds an operad from explicit composition entries. The entry list
    /// must cover every admissible tuple exactly once; gaps, duplicates, and
    /// inadmissible or ill-typed entries are structural errors.
    pub fn from_parts(
        name: impl Into<String>,
        labels: Vec<Vec<String>>,
        identity: ElemRef,
        entries: &[(ElemRef, Vec<ElemRef>, ElemRef)],
    ) -> Result<FiniteOperad, StructureError> {
        let mut op = Self::skeleton(name, labels, identity)?;
        let mut values: Vec<Option<u16>> = vec![None; op.shape.entries.len()];
        let mut buf = [0u16; MAX_SUPPORTED_ARITY];
        for (theta, args, result) in entries {
            let describe = || {
                let names: Vec<&str> = args.iter().map(|a| op.try_label(*a)).collect();
                format!("{} ({})", op.try_label(*theta), names.join(", "))
            };
            let tg = op
                .shape
                .gid(*theta)
                .ok_or(StructureError::BadRef(*theta))?;
            if args.len() != theta.arity {
                return Err(StructureError::BadEntry(
                    describe(),
                    format!("operator expects {} argument(s)", theta.arity),
                ));
            }
            let mut total = 0usize;
            for (i, a) in args.iter().enumerate() {
                buf[i] = op.shape.gid(*a).ok_or(StructureError::BadRef(*a))?;
                total += a.arity;
            }
            if total > op.max_arity() {
                return Err(StructureError::BadEntry(
                    describe(),
                    format!(
                        "composite arity {} exceeds max_arity {}",
                        total,
                        op.max_arity()
                    ),
                ));
            }
            let rg = op
                .shape
                .gid(*result)
                .ok_or(StructureError::BadRef(*result))?;
            if result.arity != total {
                return Err(StructureError::BadResultArity(
                    describe(),
                    result.arity,
                    total,
                ));
            }
            let e = op
                .shape
                .entry_id(tg, &buf[..args.len()])
                .expect("admissible entry") as usize;
            if values[e].is_some() {
                return Err(StructureError::DuplicateEntry(describe()));
            }
            values[e] = Some(rg);
        }
        let mut resolved = Vec::with_capacity(values.len());
        for (i, v) in values.iter().enumerate() {
            match v {
                Some(g) => resolved.push(*g),
                None => {
                    let (t, args) = &op.shape.entries[i];
                    let names: Vec<&str> =
                        args.iter().map(|&g| op.label_of_gid(g)).collect();
                    return Err(StructureError::MissingEntry(format!(
                        "{} ({})",
                        op.label_of_gid(*t),
                        names.join(", ")
                    )));
                }
            }
        }
        op.values = resolved;
        Ok(op)
    }

    /// Builds an operad by evaluating `f` on every admissible tuple.
    pub fn from_table_fn(
        name: impl Into<String>,
        labels: Vec<Vec<String>>,
        identity: ElemRef,
        f: impl Fn(ElemRef, &[ElemRef]) -> ElemRef,
    ) -> Result<FiniteOperad, StructureError> {
        let mut op = Self::skeleton(name, labels, identity)?;
        let mut values = Vec::with_capacity(op.shape.entries.len());
        for (theta, args) in &op.shape.entries {
            let t = op.shape.elem(*theta);
            let arg_refs: Vec<ElemRef> = args.iter().map(|&g| op.shape.elem(g)).collect();
            let total: usize = arg_refs.iter().map(|a| a.arity).sum();
            let r = f(t, &arg_refs);
            let rg = op.shape.gid(r).ok_or(StructureError::BadRef(r))?;
            if r.arity != total {
                let names: Vec<&str> = args.iter().map(|&g| op.label_of_gid(g)).collect();
                return Err(StructureError::BadResultArity(
                    format!("{} ({})", op.label_of_gid(*theta), names.join(", ")),
                    r.arity,
                    total,
                ));
            }
            values.push(rg);
        }
        op.values = values;
        Ok(op)
    }

    pub(crate) fn from_packed(
        name: impl Into<String>,
        labels: Vec<Vec<String>>,
        identity: ElemRef,
        shape: Arc<Shape>,
        values: Vec<u16>,
    ) -> FiniteOperad {
        let mut label_index = HashMap::new();
        for (arity, row) in labels.iter().enumerate() {
            for (index, l) in row.iter().enumerate() {
                label_index.insert(l.clone(), ElemRef { arity, index });
            }
        }
        FiniteOperad {
            name: name.into(),
            labels,
            label_index,
            identity,
            shape,
            values,
        }
    }

    fn skeleton(
        name: impl Into<String>,
        labels: Vec<Vec<String>>,
        identity: ElemRef,
    ) -> Result<FiniteOperad, StructureError> {
        check_labels(&labels)?;
        let sizes: Vec<usize> = labels.iter().map(|row| row.len()).collect();
        let shape = Shape::new(&sizes)?;
        if identity.arity != 1 {
            return Err(StructureError::IdentityArity(identity.arity));
        }
        if identity.index >= sizes[1] {
            return Err(StructureError::IdentityRange(identity.index));
        }
        Ok(Self::from_packed(name, labels, identity, shape, Vec::new()))
    }

    /// The terminal truncated operad: one element at every arity up to the
    /// bound, with the only possible composition table.
    pub fn terminal(max_arity: usize) -> FiniteOperad {
        let labels: Vec<Vec<String>> = (0..=max_arity).map(|n| vec![format!("u{n}")]).collect();
        FiniteOperad::from_table_fn(
            format!("terminal{max_arity}"),
            labels,
            ElemRef::new(1, 0),
            |_, args| ElemRef::new(args.iter().map(|a| a.arity).sum(), 0),
        )
        .expect("terminal operad is well formed")
    }

    /// A monoid viewed as an operad concentrated in arity 1 (empty carrier at
    /// arity 0). `mul(f, g)` is the element acting as `f` after `g`.
    pub fn from_monoid(
        name: impl Into<String>,
        labels: Vec<String>,
        unit: usize,
        mul: impl Fn(usize, usize) -> usize,
    ) -> Result<FiniteOperad, StructureError> {
        FiniteOperad::from_table_fn(
            name,
            vec![vec![], labels],
            ElemRef::new(1, unit),
            |theta, args| {
                if args.is_empty() {
                    theta
                } else {
                    ElemRef::new(1, mul(theta.index, args[0].index))
                }
            },
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn set_name(&mut self, name: impl Into<String>) {
        self.name = name.into();
    }

    pub fn max_arity(&self) -> usize {
        self.shape.max_arity
    }

    pub fn carrier_sizes(&self) -> &[usize] {
        &self.shape.sizes
    }

    pub fn carrier_size(&self, arity: usize) -> usize {
        self.shape.sizes.get(arity).copied().unwrap_or(0)
    }

    pub fn identity(&self) -> ElemRef {
        self.identity
    }

    pub fn labels(&self) -> &[Vec<String>] {
        &self.labels
    }

    pub fn label(&self, e: ElemRef) -> &str {
        &self.labels[e.arity][e.index]
    }

    fn try_label(&self, e: ElemRef) -> &str {
        self.labels
            .get(e.arity)
            .and_then(|row| row.get(e.index))
            .map(|s| s.as_str())
            .unwrap_or("?")
    }

    fn label_of_gid(&self, gid: u16) -> &str {
        self.label(self.shape.elem(gid))
    }

    pub fn elem_by_label(&self, label: &str) -> Option<ElemRef> {
        self.label_index.get(label).copied()
    }

    /// All elements in canonical order (arity ascending, then index).
    pub fn elements(&self) -> impl Iterator<Item = ElemRef> + '_ {
        self.shape.elems.iter().map(|&(arity, index)| ElemRef { arity, index })
    }

    /// All composition entries in canonical order.
    pub fn comp_entries(&self) -> impl Iterator<Item = (ElemRef, Vec<ElemRef>, ElemRef)> + '_ {
        self.shape
            .entries
            .iter()
            .zip(self.values.iter())
            .map(|((t, args), r)| {
                (
                    self.shape.elem(*t),
                    args.iter().map(|&g| self.shape.elem(g)).collect(),
                    self.shape.elem(*r),
                )
            })
    }

    /// Operadic composition `theta . (args)`. Errors distinguish a wrong
    /// argument count from a composite arity exceeding the truncation bound.
    pub fn compose(&self, theta: ElemRef, args: &[ElemRef]) -> Result<ElemRef, OperadError> {
        let tg = self
            .shape
            .gid(theta)
            .ok_or(OperadError::UnknownElement(theta))?;
        if args.len() != theta.arity {
            return Err(OperadError::ArityMismatch {
                expected: theta.arity,
                got: args.len(),
            });
        }
        let mut buf = [0u16; MAX_SUPPORTED_ARITY];
        let mut total = 0usize;
        for (i, a) in args.iter().enumerate() {
            buf[i] = self
                .shape
                .gid(*a)
                .ok_or(OperadError::UnknownElement(*a))?;
            total += a.arity;
        }
        if total > self.max_arity() {
            return Err(OperadError::TruncationOverflow {
                total,
                max_arity: self.max_arity(),
            });
        }
        let e = self
            .shape
            .entry_id(tg, &buf[..args.len()])
            .expect("total table");
        Ok(self.shape.elem(self.values[e as usize]))
    }

    fn instance_string(&self, theta: u16, alphas: &[u16], betas: &[u16]) -> String {
        let mid: Vec<&str> = alphas.iter().map(|&g| self.label_of_gid(g)).collect();
        let inner: Vec<&str> = betas.iter().map(|&g| self.label_of_gid(g)).collect();
        format!(
            "{} ({}) then ({})",
            self.label_of_gid(theta),
            mid.join(", "),
            inner.join(", ")
        )
    }

    /// Exhaustively checks the unit and associativity laws on every
    /// admissible instance and lists each violation.
    pub fn validate(&self) -> LawReport {
        let mut rep = LawReport::default();
        let idg = self.shape.gid(self.identity).expect("identity in range");
        for g in 0..self.shape.elems.len() as u16 {
            let e = self
                .shape
                .entry_id(idg, &[g])
                .expect("identity composition admissible");
            let got = self.values[e as usize];
            if got != g {
                rep.record(
                    "left-unit",
                    format!("{} ({})", self.label_of_gid(idg), self.label_of_gid(g)),
                    self.label_of_gid(got),
                    self.label_of_gid(g),
                );
            }
        }
        let mut ids = [0u16; MAX_SUPPORTED_ARITY];
        for g in 0..self.shape.elems.len() as u16 {
            let n = self.shape.arity_of(g);
            ids[..n].fill(idg);
            let e = self
                .shape
                .entry_id(g, &ids[..n])
                .expect("unit tuple admissible");
            let got = self.values[e as usize];
            if got != g {
                let args = vec![self.label_of_gid(idg); n];
                rep.record(
                    "right-unit",
                    format!("{} ({})", self.label_of_gid(g), args.join(", ")),
                    self.label_of_gid(got),
                    self.label_of_gid(g),
                );
            }
        }
        self.shape
            .for_each_assoc_instance(None, &mut |theta, alphas, betas| {
                match eval_assoc(
                    &self.shape,
                    &mut |e| Some(self.values[e as usize]),
                    theta,
                    alphas,
                    betas,
                ) {
                    InstEval::Pass => {}
                    InstEval::Fail { lhs, rhs } => rep.record(
                        "associativity",
                        self.instance_string(theta, alphas, betas),
                        self.label_of_gid(lhs),
                        self.label_of_gid(rhs),
                    ),
                    InstEval::Blocked(_) => unreachable!("table is total"),
                }
            });
        rep
    }

    /// The reverse operad: same carriers and identity, with
    /// `rev(theta) . (a_1..a_n) = theta . (a_n..a_1)`. Applying it twice
    /// returns the original operad.
    pub fn reverse(&self) -> FiniteOperad {
        let mut values = vec![0u16; self.values.len()];
        let mut buf = [0u16; MAX_SUPPORTED_ARITY];
        for (i, (theta, args)) in self.shape.entries.iter().enumerate() {
            for (j, &a) in args.iter().rev().enumerate() {
                buf[j] = a;
            }
            let src = self
                .shape
                .entry_id(*theta, &buf[..args.len()])
                .expect("reversed tuple admissible");
            values[i] = self.values[src as usize];
        }
        FiniteOperad {
            name: self.name.clone(),
            labels: self.labels.clone(),
            label_index: self.label_index.clone(),
            identity: self.identity,
            shape: Arc::clone(&self.shape),
            values,
        }
    }

    /// Whether `gamma . (phi)` is independent of `phi` at every arity within
    /// the truncation. Defined for arity-1 elements only.
    pub fn is_constant(&self, gamma: ElemRef) -> Result<bool, OperadError> {
        if gamma.arity != 1 {
            return Err(OperadError::Precondition(format!(
                "is_constant applies to arity-1 elements, got arity {}",
                gamma.arity
            )));
        }
        let gg = self
            .shape
            .gid(gamma)
            .ok_or(OperadError::UnknownElement(gamma))?;
        for row in &self.shape.gids {
            let mut first: Option<u16> = None;
            for &phi in row {
                let e = self.shape.entry_id(gg, &[phi]).expect("unary composition");
                let v = self.values[e as usize];
                match first {
                    None => first = Some(v),
                    Some(w) if w != v => return Ok(false),
                    _ => {}
                }
            }
        }
        Ok(true)
    }

    /// Whether `theta . (phi) = theta' . (phi)` forces `theta = theta'` for
    /// all unary `theta, theta'`.
    pub fn is_surjective(&self, phi: ElemRef) -> Result<bool, OperadError> {
        let pg = self
            .shape
            .gid(phi)
            .ok_or(OperadError::UnknownElement(phi))?;
        let unary = &self.shape.gids[1];
        let mut seen = Vec::with_capacity(unary.len());
        for &t in unary {
            let e = self.shape.entry_id(t, &[pg]).expect("unary composition");
            let v = self.values[e as usize];
            if seen.contains(&v) {
                return Ok(false);
            }
            seen.push(v);
        }
        Ok(true)
    }

    /// Constancy flags for the arity-1 carrier, in index order.
    pub fn constant_flags(&self) -> Vec<bool> {
        (0..self.carrier_size(1))
            .map(|i| self.is_constant(ElemRef::new(1, i)).expect("arity 1"))
            .collect()
    }

    /// Surjectivity flags per arity, in index order.
    pub fn surjective_flags(&self) -> Vec<Vec<bool>> {
        (0..=self.max_arity())
            .map(|n| {
                (0..self.carrier_size(n))
                    .map(|i| self.is_surjective(ElemRef::new(n, i)).expect("in range"))
                    .collect()
            })
            .collect()
    }

    /// Searches for `phi` in `P(2)` and constant `gamma` in `P(1)` with
    /// `phi . (gamma, id)` surjective, in canonical order. Requires
    /// `max_arity >= 2`.
    pub fn has_separating_property(&self) -> Result<Option<SeparatingWitness>, OperadError> {
        if self.max_arity() < 2 {
            return Err(OperadError::Precondition(format!(
                "separating property needs max_arity >= 2, got {}",
                self.max_arity()
            )));
        }
        let constants = self.constant_flags();
        for pi in 0..self.carrier_size(2) {
            let phi = ElemRef::new(2, pi);
            for (gi, constant) in constants.iter().enumerate() {
                if !constant {
                    continue;
                }
                let gamma = ElemRef::new(1, gi);
                let composite = self.compose(phi, &[gamma, self.identity])?;
                if self.is_surjective(composite)? {
                    return Ok(Some(SeparatingWitness {
                        phi,
                        gamma,
                        composite,
                    }));
                }
            }
        }
        Ok(None)
    }

    /// Finds the canonically first arity-wise bijection preserving identity
    /// and composition, if any. Operads with different truncation bounds or
    /// carrier sizes have none.
    pub fn find_isomorphism(&self, other: &FiniteOperad) -> Option<OperadMorphism> {
        if self.max_arity() != other.max_arity() || self.shape.sizes != other.shape.sizes {
            return None;
        }
        let mut found = None;
        morphism_search(self, other, true, &mut |maps| {
            found = Some(maps);
            false
        });
        found.map(|maps| OperadMorphism {
            source: self.clone(),
            target: other.clone(),
            maps,
        })
    }

    /// Number of arity-wise bijections fixing the identity, the raw
    /// candidate space behind `find_isomorphism`.
    pub fn bijection_candidate_count(&self, other: &FiniteOperad) -> u64 {
        if self.max_arity() != other.max_arity() || self.shape.sizes != other.shape.sizes {
            return 0;
        }
        let mut count = 1u64;
        for (arity, &sz) in self.shape.sizes.iter().enumerate() {
            let free = if arity == 1 { sz.saturating_sub(1) } else { sz };
            count = count.saturating_mul((1..=free as u64).product::<u64>().max(1));
        }
        count
    }
}

/// Enumerates all operad morphisms from `p` to `q` (same truncation bound),
/// in canonical order. With `bijective` set, only arity-wise bijections are
/// produced.
pub fn enumerate_morphisms(
    p: &FiniteOperad,
    q: &FiniteOperad,
    bijective: bool,
) -> Vec<OperadMorphism> {
    if p.max_arity() != q.max_arity() {
        return Vec::new();
    }
    if bijective && p.shape.sizes != q.shape.sizes {
        return Vec::new();
    }
    let mut out = Vec::new();
    morphism_search(p, q, bijective, &mut |maps| {
        out.push(OperadMorphism {
            source: p.clone(),
            target: q.clone(),
            maps,
        });
        true
    });
    out
}

fn morphism_search(
    p: &FiniteOperad,
    q: &FiniteOperad,
    bijective: bool,
    on_found: &mut dyn FnMut(Vec<Vec<usize>>) -> bool,
) {
    let pe = p.shape.elems.len();
    let p_id = p.shape.gid(p.identity).unwrap();
    let q_id = q.shape.gid(q.identity).unwrap();
    let (p_const, q_const, p_surj, q_surj) = if bijective {
        (
            p.constant_flags(),
            q.constant_flags(),
            p.surjective_flags(),
            q.surjective_flags(),
        )
    } else {
        (Vec::new(), Vec::new(), Vec::new(), Vec::new())
    };
    let mut entries_of: Vec<Vec<u32>> = vec![Vec::new(); pe];
    for (i, (theta, args)) in p.shape.entries.iter().enumerate() {
        let mut parts = vec![*theta, p.values[i]];
        parts.extend_from_slice(args);
        parts.sort_unstable();
        parts.dedup();
        for g in parts {
            entries_of[g as usize].push(i as u32);
        }
    }
    let mut img: Vec<Option<u16>> = vec![None; pe];
    let mut used = vec![false; q.shape.elems.len()];
    let mut buf = [0u16; MAX_SUPPORTED_ARITY + 1];

    fn consistent(
        p: &FiniteOperad,
        q: &FiniteOperad,
        img: &[Option<u16>],
        entries: &[u32],
        buf: &mut [u16],
    ) -> bool {
        'entry: for &ei in entries {
            let (theta, args) = &p.shape.entries[ei as usize];
            let it = match img[*theta as usize] {
                Some(v) => v,
                None => continue,
            };
            let ir = match img[p.values[ei as usize] as usize] {
                Some(v) => v,
                None => continue,
            };
            for (j, &a) in args.iter().enumerate() {
                match img[a as usize] {
                    Some(v) => buf[j] = v,
                    None => continue 'entry,
                }
            }
            let qe = q
                .shape
                .entry_id(it, &buf[..args.len()])
                .expect("image tuple admissible");
            if q.values[qe as usize] != ir {
                return false;
            }
        }
        true
    }

    fn recurse(
        p: &FiniteOperad,
        q: &FiniteOperad,
        bijective: bool,
        g: usize,
        p_id: u16,
        q_id: u16,
        p_const: &[bool],
        q_const: &[bool],
        p_surj: &[Vec<bool>],
        q_surj: &[Vec<bool>],
        entries_of: &[Vec<u32>],
        img: &mut Vec<Option<u16>>,
        used: &mut Vec<bool>,
        buf: &mut [u16],
        on_found: &mut dyn FnMut(Vec<Vec<usize>>) -> bool,
    ) -> bool {
        if g == img.len() {
            let mut maps: Vec<Vec<usize>> = p
                .shape
                .sizes
                .iter()
                .map(|&s| Vec::with_capacity(s))
                .collect();
            for (pg, i) in img.iter().enumerate() {
                let (arity, _) = p.shape.elems[pg];
                maps[arity].push(q.shape.elem(i.unwrap()).index);
            }
            return on_found(maps);
        }
        let (arity, index) = p.shape.elems[g];
        for cand_index in 0..q.shape.sizes.get(arity).copied().unwrap_or(0) {
            let cand = q.shape.gids[arity][cand_index];
            if bijective && used[cand as usize] {
                continue;
            }
            if g as u16 == p_id && cand != q_id {
                continue;
            }
            if bijective && g as u16 != p_id && cand == q_id {
                continue;
            }
            if bijective {
                if arity == 1 && p_const[index] != q_const[cand_index] {
                    continue;
                }
                if p_surj[arity][index] != q_surj[arity][cand_index] {
                    continue;
                }
            }
            img[g] = Some(cand);
            used[cand as usize] = true;
            let ok = consistent(p, q, img, &entries_of[g], buf);
            let keep_going = if ok {
                recurse(
                    p, q, bijective, g + 1, p_id, q_id, p_const, q_const, p_surj, q_surj,
                    entries_of, img, used, buf, on_found,
                )
            } else {
                true
            };
            img[g] = None;
            used[cand as usize] = false;
            if !keep_going {
                return false;
            }
        }
        true
    }

    recurse(
        p, q, bijective, 0, p_id, q_id, &p_const, &q_const, &p_surj, &q_surj, &entries_of,
        &mut img, &mut used, &mut buf, on_found,
    );
}

/// An arity-wise map between operads with the same truncation bound,
/// preserving identity and composition.
#[derive(Debug, Clone, PartialEq)]
pub struct OperadMorphism {
    pub source: FiniteOperad,
    pub target: FiniteOperad,
    /// `maps[arity][source index]` is the target index.
    pub maps: Vec<Vec<usize>>,
}

impl OperadMorphism {
    /// Validates and wraps an arity-wise map as a morphism.
    pub fn new(
        source: FiniteOperad,
        target: FiniteOperad,
        maps: Vec<Vec<usize>>,
    ) -> Result<OperadMorphism, String> {
        let m = OperadMorphism {
            source,
            target,
            maps,
        };
        m.check()?;
        Ok(m)
    }

    pub fn identity(op: &FiniteOperad) -> OperadMorphism {
        let maps = op
            .carrier_sizes()
            .iter()
            .map(|&s| (0..s).collect())
            .collect();
        OperadMorphism {
            source: op.clone(),
            target: op.clone(),
            maps,
        }
    }

    pub fn apply(&self, e: ElemRef) -> ElemRef {
        ElemRef::new(e.arity, self.maps[e.arity][e.index])
    }

    pub fn is_bijective(&self) -> bool {
        for (arity, row) in self.maps.iter().enumerate() {
            if row.len() != self.target.carrier_size(arity) {
                return false;
            }
            let mut seen = vec![false; row.len()];
            for &i in row {
                if i >= seen.len() || seen[i] {
                    return false;
                }
                seen[i] = true;
            }
        }
        true
    }

    /// Checks component shapes, identity preservation, and composition
    /// preservation on every source table entry.
    pub fn check(&self) -> Result<(), String> {
        if self.source.max_arity() != self.target.max_arity() {
            return Err("source and target have different truncation bounds".into());
        }
        if self.maps.len() != self.source.carrier_sizes().len() {
            return Err("component count does not match carrier count".into());
        }
        for (arity, row) in self.maps.iter().enumerate() {
            if row.len() != self.source.carrier_size(arity) {
                return Err(format!("component at arity {arity} has wrong length"));
            }
            for &i in row {
                if i >= self.target.carrier_size(arity) {
                    return Err(format!("component at arity {arity} maps out of range"));
                }
            }
        }
        if self.apply(self.source.identity()) != self.target.identity() {
            return Err("identity is not preserved".into());
        }
        for (theta, args, result) in self.source.comp_entries() {
            let mapped_args: Vec<ElemRef> = args.iter().map(|&a| self.apply(a)).collect();
            let lhs = self
                .target
                .compose(self.apply(theta), &mapped_args)
                .map_err(|e| e.to_string())?;
            if lhs != self.apply(result) {
                return Err(format!(
                    "composition not preserved at {} ({})",
                    self.source.label(theta),
                    args.iter()
                        .map(|&a| self.source.label(a))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for OperadMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (arity, row) in self.maps.iter().enumerate() {
            for (i, &j) in row.iter().enumerate() {
                writeln!(
                    f,
                    "arity {}: {} -> {}",
                    arity,
                    self.source.label(ElemRef::new(arity, i)),
                    self.target.label(ElemRef::new(arity, j))
                )?;
            }
        }
        Ok(())
    }
}

/// Canonical generated labels for a carrier profile: index `i` at arity `n`
/// becomes letter `i` followed by `n`, so `a1` is the first unary element.
pub fn default_labels(sizes: &[usize]) -> Vec<Vec<String>> {
    sizes
        .iter()
        .enumerate()
        .map(|(arity, &sz)| {
            (0..sz)
                .map(|i| {
                    let letter = (b'a' + (i % 26) as u8) as char;
                    if i < 26 {
                        format!("{letter}{arity}")
                    } else {
                        format!("{letter}{}x{arity}", i / 26)
                    }
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cyclic_monoid_operad(n: usize) -> FiniteOperad {
        let labels: Vec<String> = (0..n).map(|i| format!("g{i}")).collect();
        FiniteOperad::from_monoid(format!("c{n}"), labels, 0, move |a, b| (a + b) % n)
            .expect("cyclic monoid is well formed")
    }

    #[test]
    fn terminal_validates() {
        let op = FiniteOperad::terminal(3);
        assert_eq!(op.carrier_sizes(), &[1, 1, 1, 1]);
        let rep = op.validate();
        assert!(rep.ok(), "{rep}");
    }

    #[test]
    fn redirected_entry_is_reported() {
        // Terminal-like operad with a second binary element; one entry
        // redirected there breaks associativity or units.
        let labels = vec![
            vec!["z".to_string()],
            vec!["e".to_string()],
            vec!["m".to_string(), "w".to_string()],
            vec!["t".to_string()],
        ];
        let op = FiniteOperad::from_table_fn("planted", labels, ElemRef::new(1, 0), |theta, args| {
            let total: usize = args.iter().map(|a| a.arity).sum();
            if theta == ElemRef::new(2, 0)
                && args == [ElemRef::new(1, 0), ElemRef::new(2, 0)]
            {
                return ElemRef::new(3, 0);
            }
            if theta == ElemRef::new(2, 0) && args == [ElemRef::new(0, 0), ElemRef::new(0, 0)] {
                return ElemRef::new(0, 0);
            }
            if theta == ElemRef::new(2, 1) && total == 2 && args[0].arity == 1 {
                // redirect one entry of the fresh element's row
                return ElemRef::new(2, 1);
            }
            ElemRef::new(total, 0)
        })
        .unwrap();
        let rep = op.validate();
        assert!(!rep.ok());
        assert!(rep.violations.iter().any(|v| v.law == "right-unit" || v.law == "associativity"));
    }

    #[test]
    fn monoid_table_is_associative() {
        let op = cyclic_monoid_operad(3);
        // independent check straight from the Cayley table
        for a in 0..3usize {
            for b in 0..3usize {
                for c in 0..3usize {
                    assert_eq!((a + (b + c)) % 3, ((a + b) + c) % 3);
                }
            }
        }
        assert!(op.validate().ok());
    }

    #[test]
    fn compose_units() {
        let op = FiniteOperad::terminal(3);
        let id = op.identity();
        let m = ElemRef::new(2, 0);
        assert_eq!(op.compose(id, &[m]).unwrap(), m);
        assert_eq!(op.compose(m, &[id, id]).unwrap(), m);
        let z = ElemRef::new(0, 0);
        assert_eq!(op.compose(z, &[]).unwrap(), z);
    }

    #[test]
    fn compose_error_kinds_are_distinct() {
        let op = FiniteOperad::terminal(2);
        let m = ElemRef::new(2, 0);
        let u = ElemRef::new(1, 0);
        match op.compose(m, &[u]) {
            Err(OperadError::ArityMismatch { expected: 2, got: 1 }) => {}
            other => panic!("expected arity mismatch, got {other:?}"),
        }
        match op.compose(m, &[u, m]) {
            Err(OperadError::TruncationOverflow { total: 3, max_arity: 2 }) => {}
            other => panic!("expected truncation overflow, got {other:?}"),
        }
    }

    #[test]
    fn reverse_of_terminal_is_equal() {
        let op = FiniteOperad::terminal(3);
        assert_eq!(op.reverse(), op);
    }

    #[test]
    fn reverse_is_involutive_on_monoids() {
        let op = cyclic_monoid_operad(3);
        assert_eq!(op.reverse().reverse(), op);
        assert!(op.reverse().validate().ok());
    }

    #[test]
    fn constants_and_surjectivity_on_small_operads() {
        let term = FiniteOperad::terminal(3);
        assert!(term.is_constant(term.identity()).unwrap());
        assert!(term.is_surjective(term.identity()).unwrap());
        assert!(term.is_surjective(ElemRef::new(2, 0)).unwrap());

        let c2 = cyclic_monoid_operad(2);
        assert!(!c2.is_constant(c2.identity()).unwrap());
        assert!(!c2.is_constant(ElemRef::new(1, 1)).unwrap());
        assert!(c2.is_surjective(ElemRef::new(1, 1)).unwrap());
        assert!(c2.is_constant(ElemRef::new(0, 0)).is_err());
    }

    #[test]
    fn separating_property_on_terminal_and_empty_binary() {
        let term = FiniteOperad::terminal(2);
        let w = term.has_separating_property().unwrap().unwrap();
        assert_eq!(w.phi, ElemRef::new(2, 0));
        assert_eq!(w.gamma, ElemRef::new(1, 0));

        let labels = vec![vec!["z".to_string()], vec!["e".to_string()], vec![]];
        let no_binary =
            FiniteOperad::from_table_fn("nobin", labels, ElemRef::new(1, 0), |theta, args| {
                ElemRef::new(args.iter().map(|a| a.arity).sum::<usize>(), theta.index.min(0))
            })
            .unwrap();
        assert!(no_binary.validate().ok());
        assert!(no_binary.has_separating_property().unwrap().is_none());

        let c2 = cyclic_monoid_operad(2);
        assert!(c2.has_separating_property().is_err());
    }

    #[test]
    fn profiles_are_reverse_invariant() {
        let op = cyclic_monoid_operad(3);
        let rev = op.reverse();
        assert_eq!(op.constant_flags(), rev.constant_flags());
        assert_eq!(op.surjective_flags(), rev.surjective_flags());
    }

    #[test]
    fn find_isomorphism_identity_case() {
        let op = FiniteOperad::terminal(3);
        let iso = op.find_isomorphism(&op).expect("terminal is self-isomorphic");
        assert!(iso.check().is_ok());
        assert!(iso.is_bijective());
    }

    #[test]
    fn find_isomorphism_respects_structure() {
        // C3 and the monoid {e, a, b} with xy = x (left zero outside e) have
        // the same profile sizes but are not isomorphic.
        let c3 = cyclic_monoid_operad(3);
        let lz = FiniteOperad::from_monoid(
            "leftish",
            vec!["e".into(), "a".into(), "b".into()],
            0,
            |a, b| {
                if a == 0 {
                    b
                } else if b == 0 {
                    a
                } else {
                    a
                }
            },
        )
        .unwrap();
        assert!(lz.validate().ok());
        assert!(c3.find_isomorphism(&lz).is_none());
        assert!(c3.find_isomorphism(&c3).is_some());
    }

    /// Brute-force oracle: try every arity-wise bijection fixing nothing but
    /// arity blocks, and check morphism validity directly.
    fn iso_oracle(p: &FiniteOperad, q: &FiniteOperad) -> bool {
        if p.carrier_sizes() != q.carrier_sizes() {
            return false;
        }
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for i in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(i, n - 1);
                    out.push(q);
                }
            }
            out
        }
        fn all_choices(rows: &[Vec<Vec<usize>>]) -> Vec<Vec<Vec<usize>>> {
            if rows.is_empty() {
                return vec![vec![]];
            }
            let rest = all_choices(&rows[1..]);
            let mut out = Vec::new();
            for cand in &rows[0] {
                for r in &rest {
                    let mut v = vec![cand.clone()];
                    v.extend(r.iter().cloned());
                    out.push(v);
                }
            }
            out
        }
        let rows: Vec<Vec<Vec<usize>>> = p
            .carrier_sizes()
            .iter()
            .map(|&s| perms(s))
            .collect();
        for maps in all_choices(&rows) {
            if OperadMorphism::new(p.clone(), q.clone(), maps).is_ok() {
                return true;
            }
        }
        false
    }

    #[test]
    fn find_isomorphism_matches_brute_force_oracle() {
        let cases = vec![
            (cyclic_monoid_operad(3), cyclic_monoid_operad(3)),
            (FiniteOperad::terminal(2), FiniteOperad::terminal(2)),
            (
                cyclic_monoid_operad(3),
                FiniteOperad::from_monoid(
                    "perm",
                    vec!["x".into(), "y".into(), "z".into()],
                    1,
                    |a, b| {
                        // C3 with relabeled elements: unit at index 1
                        let dec = |i: usize| match i {
                            1 => 0,
                            0 => 1,
                            _ => 2,
                        };
                        let enc = |i: usize| match i {
                            0 => 1,
                            1 => 0,
                            _ => 2,
                        };
                        enc((dec(a) + dec(b)) % 3)
                    },
                )
                .unwrap(),
            ),
        ];
        for (p, q) in cases {
            assert!(q.validate().ok());
            let got = p.find_isomorphism(&q);
            assert_eq!(got.is_some(), iso_oracle(&p, &q));
            if let Some(m) = got {
                assert!(m.check().is_ok());
                assert!(m.is_bijective());
            }
        }
    }

    #[test]
    fn morphism_enumeration_includes_collapse() {
        let c2 = cyclic_monoid_operad(2);
        let all = enumerate_morphisms(&c2, &c2, false);
        // identity and the collapse g1 -> g0
        assert_eq!(all.len(), 2);
        assert!(all.iter().any(|m| m.maps[1] == vec![0, 1]));
        assert!(all.iter().any(|m| m.maps[1] == vec![0, 0]));
        for m in &all {
            assert!(m.check().is_ok());
        }
    }

    #[test]
    fn from_parts_structural_errors() {
        let labels = vec![vec![], vec!["e".to_string()]];
        let id = ElemRef::new(1, 0);
        // missing entry
        let err = FiniteOperad::from_parts("bad", labels.clone(), id, &[]).unwrap_err();
        assert!(matches!(err, StructureError::MissingEntry(_)));
        // duplicate entry
        let e = (id, vec![id], id);
        let err =
            FiniteOperad::from_parts("bad", labels.clone(), id, &[e.clone(), e.clone()])
                .unwrap_err();
        assert!(matches!(err, StructureError::DuplicateEntry(_)));
        // ambiguous label across arities
        let labels2 = vec![vec!["e".to_string()], vec!["e".to_string()]];
        let err = FiniteOperad::from_parts("bad", labels2, id, &[]).unwrap_err();
        assert!(matches!(err, StructureError::AmbiguousLabel(..)));
    }
}
