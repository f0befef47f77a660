//! Equational presentations of algebraic theories, the strong-regularity
//! check, and truncated free operads built from strongly regular
//! presentations by congruence closure over enumerated planar terms.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::operad::{ElemRef, FiniteOperad};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TheoryError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: unknown operation {name:?}")]
    UnknownOperation { name: String, line: usize, col: usize },
    #[error("line {line}, column {col}: operation {name:?} expects {expected} argument(s), got {got}")]
    ArityMismatch {
        name: String,
        expected: usize,
        got: usize,
        line: usize,
        col: usize,
    },
    #[error("presentation {0:?} has no free operad here:\n{1}")]
    NotStronglyRegular(String, String),
    #[error("composite {0} has {1} operation nodes, beyond the size bound {2}")]
    TruncationOverflow(String, usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    ops: Vec<(String, usize)>,
}

impl Signature {
    pub fn operations(&self) -> &[(String, usize)] {
        &self.ops
    }

    pub fn arity(&self, op: usize) -> usize {
        self.ops[op].1
    }

    pub fn name(&self, op: usize) -> &str {
        &self.ops[op].0
    }

    fn lookup(&self, name: &str) -> Option<usize> {
        self.ops.iter().position(|(n, _)| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TermExpr {
    Var(usize),
    App(usize, Vec<TermExpr>),
}

impl TermExpr {
    /// Operation nodes, not counting variable leaves.
    pub fn size(&self) -> usize {
        match self {
            TermExpr::Var(_) => 0,
            TermExpr::App(_, args) => 1 + args.iter().map(|a| a.size()).sum::<usize>(),
        }
    }

    pub fn render(&self, sig: &Signature) -> String {
        match self {
            TermExpr::Var(i) => format!("x{i}"),
            TermExpr::App(op, args) => {
                if args.is_empty() {
                    sig.name(*op).to_string()
                } else {
                    let inner: Vec<String> = args.iter().map(|a| a.render(sig)).collect();
                    format!("{}({})", sig.name(*op), inner.join(", "))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    pub lhs: TermExpr,
    pub rhs: TermExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    pub signature: Signature,
    pub equations: Vec<Equation>,
}

/// Left-to-right in-order listing of variable occurrences.
pub fn variable_sequence(t: &TermExpr) -> Vec<usize> {
    fn walk(t: &TermExpr, out: &mut Vec<usize>) {
        match t {
            TermExpr::Var(i) => out.push(*i),
            TermExpr::App(_, args) => args.iter().for_each(|a| walk(a, out)),
        }
    }
    let mut out = Vec::new();
    walk(t, &mut out);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationVerdict {
    pub equation: usize,
    pub rendered: String,
    pub same_set: bool,
    pub same_order: bool,
    pub no_repetition: bool,
}

impl EquationVerdict {
    pub fn ok(&self) -> bool {
        self.same_set && self.same_order && self.no_repetition
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityReport {
    pub verdicts: Vec<EquationVerdict>,
}

impl RegularityReport {
    pub fn accepted(&self) -> bool {
        self.verdicts.iter().all(|v| v.ok())
    }
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.accepted() {
            return write!(f, "strongly regular");
        }
        writeln!(f, "not strongly regular:")?;
        let mut first = true;
        for v in self.verdicts.iter().filter(|v| !v.ok()) {
            if !first {
                writeln!(f)?;
            }
            first = false;
            let mut clauses = Vec::new();
            if !v.same_set {
                clauses.push("same-set");
            }
            if !v.same_order {
                clauses.push("same-order");
            }
            if !v.no_repetition {
                clauses.push("no-repetition");
            }
            write!(
                f,
                "  equation {} `{}` fails: {}",
                v.equation + 1,
                v.rendered,
                clauses.join(", ")
            )?;
        }
        Ok(())
    }
}

/// An equation passes when both sides list the same variables in the same
/// order with no index repeated; the report records each clause separately.
pub fn is_strongly_regular(p: &Presentation) -> RegularityReport {
    let verdicts = p
        .equations
        .iter()
        .enumerate()
        .map(|(i, eq)| {
            let ls = variable_sequence(&eq.lhs);
            let rs = variable_sequence(&eq.rhs);
            let lset: BTreeSet<usize> = ls.iter().copied().collect();
            let rset: BTreeSet<usize> = rs.iter().copied().collect();
            EquationVerdict {
                equation: i,
                rendered: format!(
                    "{} = {}",
                    eq.lhs.render(&p.signature),
                    eq.rhs.render(&p.signature)
                ),
                same_set: lset == rset,
                same_order: ls == rs,
                no_repetition: lset.len() == ls.len() && rset.len() == rs.len(),
            }
        })
        .collect();
    RegularityReport { verdicts }
}

// ---------------------------------------------------------------------------
// parsing

struct Cursor<'a> {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    src: &'a Signature,
}

impl<'a> Cursor<'a> {
    fn col(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> TheoryError {
        TheoryError::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn ident(&mut self) -> Result<(String, usize), TheoryError> {
        self.skip_ws();
        let start = self.col();
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.pos += 1;
            } else {
                break;
            }
        }
        if s.is_empty() {
            return Err(self.err("expected an identifier"));
        }
        Ok((s, start))
    }

    fn expect(&mut self, c: char) -> Result<(), TheoryError> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected {c:?}")))
        }
    }

    fn term(&mut self) -> Result<TermExpr, TheoryError> {
        let (name, start) = self.ident()?;
        if let Some(idx) = variable_index(&name) {
            return Ok(TermExpr::Var(idx));
        }
        let op = self
            .src
            .lookup(&name)
            .ok_or_else(|| TheoryError::UnknownOperation {
                name: name.clone(),
                line: self.line,
                col: start,
            })?;
        let expected = self.src.arity(op);
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some('(') {
            self.pos += 1;
            self.skip_ws();
            if self.peek() == Some(')') {
                self.pos += 1;
            } else {
                loop {
                    args.push(self.term()?);
                    self.skip_ws();
                    match self.peek() {
                        Some(',') => self.pos += 1,
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.err("expected ',' or ')'")),
                    }
                }
            }
        }
        if args.len() != expected {
            return Err(TheoryError::ArityMismatch {
                name,
                expected,
                got: args.len(),
                line: self.line,
                col: start,
            });
        }
        Ok(TermExpr::App(op, args))
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('x')?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

/// Parses the line-oriented presentation DSL:
/// `theory <name>`, `op <name> : <arity>`, `eq <term> = <term>`, `end`,
/// with `#` comments. Variables are the reserved identifiers x0, x1, ...
pub fn parse_presentation(text: &str) -> Result<Presentation, TheoryError> {
    let mut name: Option<String> = None;
    let mut sig = Signature { ops: Vec::new() };
    let mut equations = Vec::new();
    let mut ended = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let body = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        if body.trim().is_empty() {
            continue;
        }
        let serr = |col: usize, msg: &str| TheoryError::Syntax {
            line,
            col,
            msg: msg.to_string(),
        };
        if ended {
            return Err(serr(1, "content after end"));
        }
        let mut words = body.split_whitespace();
        let keyword = words.next().unwrap();
        match keyword {
            "theory" => {
                if name.is_some() {
                    return Err(serr(1, "duplicate theory line"));
                }
                let n = words.next().ok_or_else(|| serr(1, "theory needs a name"))?;
                if words.next().is_some() {
                    return Err(serr(1, "trailing tokens after theory name"));
                }
                name = Some(n.to_string());
            }
            "op" => {
                if name.is_none() {
                    return Err(serr(1, "op before theory line"));
                }
                let rest = body.trim_start().strip_prefix("op").unwrap();
                let (lhs, rhs) = rest
                    .split_once(':')
                    .ok_or_else(|| serr(1, "op line needs `name : arity`"))?;
                let opname = lhs.trim();
                if opname.is_empty()
                    || !opname
                        .chars()
                        .all(|c| c.is_ascii_alphanumeric() || c == '_')
                {
                    return Err(serr(1, "operation name must be an identifier"));
                }
                if variable_index(opname).is_some() {
                    return Err(serr(1, "names x0, x1, ... are reserved for variables"));
                }
                if sig.lookup(opname).is_some() {
                    return Err(serr(1, "duplicate operation name"));
                }
                let arity: usize = rhs
                    .trim()
                    .parse()
                    .map_err(|_| serr(1, "arity must be a natural number"))?;
                sig.ops.push((opname.to_string(), arity));
            }
            "eq" => {
                if name.is_none() {
                    return Err(serr(1, "eq before theory line"));
                }
                let offset = body.chars().take_while(|c| c.is_whitespace()).count() + 2;
                let mut cur = Cursor {
                    chars: body.chars().collect(),
                    pos: offset,
                    line,
                    src: &sig,
                };
                let lhs = cur.term()?;
                cur.expect('=')?;
                let rhs = cur.term()?;
                cur.skip_ws();
                if cur.peek().is_some() {
                    return Err(cur.err("trailing characters after equation"));
                }
                equations.push(Equation { lhs, rhs });
            }
            "end" => ended = true,
            other => return Err(serr(1, &format!("unknown directive {other:?}"))),
        }
    }
    let name = name.ok_or(TheoryError::Syntax {
        line: 1,
        col: 1,
        msg: "missing theory line".to_string(),
    })?;
    if !ended {
        return Err(TheoryError::Syntax {
            line: text.lines().count().max(1),
            col: 1,
            msg: "missing end".to_string(),
        });
    }
    Ok(Presentation {
        name,
        signature: sig,
        equations,
    })
}

// ---------------------------------------------------------------------------
// truncated free operad

/// Planar terms in a hash-consed bank: node 0 is the variable leaf, other
/// nodes are applications referencing children by id.
struct Bank {
    nodes: Vec<Option<(usize, Vec<usize>)>>,
    arity: Vec<usize>,
    size: Vec<usize>,
    index: HashMap<(usize, Vec<usize>), usize>,
}

impl Bank {
    fn new() -> Bank {
        Bank {
            nodes: vec![None],
            arity: vec![1],
            size: vec![0],
            index: HashMap::new(),
        }
    }

    fn leaf(&self) -> usize {
        0
    }

    fn intern(&mut self, op: usize, children: Vec<usize>) -> usize {
        if let Some(&id) = self.index.get(&(op, children.clone())) {
            return id;
        }
        let arity = children.iter().map(|&c| self.arity[c]).sum();
        let size = 1 + children.iter().map(|&c| self.size[c]).sum::<usize>();
        let id = self.nodes.len();
        self.nodes.push(Some((op, children.clone())));
        self.arity.push(arity);
        self.size.push(size);
        self.index.insert((op, children), id);
        id
    }

    fn preorder(&self, id: usize, out: &mut Vec<usize>) {
        match &self.nodes[id] {
            None => out.push(0),
            Some((op, children)) => {
                out.push(op + 1);
                for &c in children {
                    self.preorder(c, out);
                }
            }
        }
    }

    fn key(&self, id: usize) -> (usize, Vec<usize>) {
        let mut pre = Vec::new();
        self.preorder(id, &mut pre);
        (self.size[id], pre)
    }

    fn render(&self, id: usize, sig: &Signature) -> String {
        fn go(bank: &Bank, id: usize, sig: &Signature, next_var: &mut usize, out: &mut String) {
            match &bank.nodes[id] {
                None => {
                    out.push_str(&format!("x{next_var}"));
                    *next_var += 1;
                }
                Some((op, children)) => {
                    out.push_str(sig.name(*op));
                    if !children.is_empty() {
                        out.push('(');
                        for (i, &c) in children.iter().enumerate() {
                            if i > 0 {
                                out.push_str(", ");
                            }
                            go(bank, c, sig, next_var, out);
                        }
                        out.push(')');
                    }
                }
            }
        }
        let mut out = String::new();
        go(self, id, sig, &mut 0, &mut out);
        out
    }

    fn label(&self, id: usize, sig: &Signature) -> String {
        fn go(bank: &Bank, id: usize, sig: &Signature, next_var: &mut usize, out: &mut Vec<String>) {
            match &bank.nodes[id] {
                None => {
                    out.push(format!("x{next_var}"));
                    *next_var += 1;
                }
                Some((op, children)) => {
                    out.push(sig.name(*op).to_string());
                    for &c in children {
                        go(bank, c, sig, next_var, out);
                    }
                }
            }
        }
        let mut parts = Vec::new();
        go(self, id, sig, &mut 0, &mut parts);
        parts.join(".")
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn grow(&mut self, n: usize) {
        while self.parent.len() < n {
            self.parent.push(self.parent.len());
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

pub struct FreeOperadTruncation {
    pub operad: FiniteOperad,
    /// Rendered canonical representative per element, aligned with carriers.
    pub representatives: Vec<Vec<String>>,
    /// True where the representative's size exceeds size_bound minus the
    /// largest equation side, so closure at this bound may have under-merged.
    pub boundary_unstable: Vec<Vec<bool>>,
    pub size_bound: usize,
}

impl FreeOperadTruncation {
    pub fn any_unstable(&self) -> bool {
        self.boundary_unstable.iter().flatten().any(|&b| b)
    }
}

/// Carriers are congruence classes of planar terms with at most
/// `size_bound` operation nodes, modulo all equation instances that stay
/// within the bound, closed under the signature operations; composition
/// substitutes canonical representatives and looks the result up.
pub fn free_operad_truncation(
    p: &Presentation,
    max_arity: usize,
    size_bound: usize,
) -> Result<FreeOperadTruncation, TheoryError> {
    let report = is_strongly_regular(p);
    if !report.accepted() {
        return Err(TheoryError::NotStronglyRegular(
            p.name.clone(),
            report.to_string(),
        ));
    }

    let sig = &p.signature;
    let mut bank = Bank::new();
    // enumerate every term with arity <= max_arity and size <= size_bound,
    // by increasing size so children always exist already
    let mut by_size: Vec<Vec<usize>> = vec![vec![bank.leaf()]];
    for s in 1..=size_bound {
        let mut level = Vec::new();
        for op in 0..sig.ops.len() {
            let k = sig.arity(op);
            if k == 0 {
                if s == 1 {
                    level.push(bank.intern(op, vec![]));
                }
                continue;
            }
            // children sizes sum to s-1
            let mut stack: Vec<(Vec<usize>, usize, usize)> = vec![(Vec::new(), s - 1, 0)];
            while let Some((children, budget, slot)) = stack.pop() {
                if slot == k {
                    if budget == 0 {
                        let arity: usize = children.iter().map(|&c| bank.arity[c]).sum();
                        if arity <= max_arity {
                            level.push(bank.intern(op, children));
                        }
                    }
                    continue;
                }
                for sz in 0..=budget {
                    if sz >= by_size.len() {
                        break;
                    }
                    for &c in &by_size[sz] {
                        let mut next = children.clone();
                        next.push(c);
                        stack.push((next, budget - sz, slot + 1));
                    }
                }
            }
        }
        level.sort_unstable();
        level.dedup();
        by_size.push(level);
    }
    let term_count = bank.nodes.len();
    let mut uf = UnionFind::new(term_count);

    // normalized equations: variables renamed to positions 0..k-1 in the
    // shared occurrence order
    let mut max_eq_size = 0usize;
    let normalized: Vec<(TermExpr, TermExpr, usize)> = p
        .equations
        .iter()
        .map(|eq| {
            let seq = variable_sequence(&eq.lhs);
            let renaming: HashMap<usize, usize> =
                seq.iter().enumerate().map(|(pos, &v)| (v, pos)).collect();
            max_eq_size = max_eq_size.max(eq.lhs.size()).max(eq.rhs.size());
            (
                rename(&eq.lhs, &renaming),
                rename(&eq.rhs, &renaming),
                seq.len(),
            )
        })
        .collect();

    // all substitution instances with both sides inside the bank
    for (lhs, rhs, vars) in &normalized {
        if lhs.size().max(rhs.size()) > size_bound {
            continue;
        }
        let budget = size_bound - lhs.size().max(rhs.size());
        let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
        for _ in 0..*vars {
            let mut next = Vec::new();
            for t in &tuples {
                let used_size: usize = t.iter().map(|&id| bank.size[id]).sum();
                let used_arity: usize = t.iter().map(|&id| bank.arity[id]).sum();
                for sz in 0..=budget - used_size {
                    if sz >= by_size.len() {
                        break;
                    }
                    for &c in &by_size[sz] {
                        if used_arity + bank.arity[c] <= max_arity {
                            let mut u = t.clone();
                            u.push(c);
                            next.push(u);
                        }
                    }
                }
            }
            tuples = next;
        }
        for t in &tuples {
            let total_arity: usize = t.iter().map(|&id| bank.arity[id]).sum();
            if total_arity > max_arity {
                continue;
            }
            let a = instantiate(&mut bank, lhs, t);
            let b = instantiate(&mut bank, rhs, t);
            uf.grow(bank.nodes.len());
            uf.union(a, b);
        }
    }

    // signature congruence closure: merge applications whose operation and
    // child classes agree, to a fixed point
    loop {
        let mut seen: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
        let mut changed = false;
        for id in 1..bank.nodes.len() {
            let (op, children) = bank.nodes[id].clone().unwrap();
            let key: (usize, Vec<usize>) =
                (op, children.iter().map(|&c| uf.find(c)).collect());
            match seen.get(&key) {
                Some(&other) => changed |= uf.union(other, id),
                None => {
                    seen.insert(key, id);
                }
            }
        }
        if !changed {
            break;
        }
    }

    // canonical representative per class: smallest (size, preorder)
    let mut rep: HashMap<usize, usize> = HashMap::new();
    for id in 0..term_count {
        let root = uf.find(id);
        match rep.get(&root) {
            Some(&r) if bank.key(r) <= bank.key(id) => {}
            _ => {
                rep.insert(root, id);
            }
        }
    }

    // carriers: classes grouped by arity, ordered by canonical key
    let mut classes: Vec<Vec<usize>> = vec![Vec::new(); max_arity + 1];
    for (&root, &r) in &rep {
        let _ = root;
        classes[bank.arity[r]].push(r);
    }
    for row in &mut classes {
        row.sort_by_key(|&r| bank.key(r));
    }
    let mut class_index: HashMap<usize, ElemRef> = HashMap::new();
    for (arity, row) in classes.iter().enumerate() {
        for (index, &r) in row.iter().enumerate() {
            class_index.insert(uf.find(r), ElemRef::new(arity, index));
        }
    }

    let labels: Vec<Vec<String>> = classes
        .iter()
        .map(|row| row.iter().map(|&r| bank.label(r, sig)).collect())
        .collect();
    let identity = *class_index
        .get(&uf.find(bank.leaf()))
        .expect("x0 is always enumerated");

    // composition entries by substitution of representatives
    let mut entries: Vec<(ElemRef, Vec<ElemRef>, ElemRef)> = Vec::new();
    for (n, row) in classes.iter().enumerate() {
        for (ti, &theta_rep) in row.iter().enumerate() {
            let theta = ElemRef::new(n, ti);
            let mut args_stack: Vec<(Vec<ElemRef>, usize)> = vec![(Vec::new(), 0)];
            while let Some((args, total)) = args_stack.pop() {
                if args.len() == n {
                    let arg_reps: Vec<usize> =
                        args.iter().map(|a| classes[a.arity][a.index]).collect();
                    let composite = substitute_into_classes(
                        &mut bank,
                        &mut uf,
                        &rep,
                        term_count,
                        theta_rep,
                        &arg_reps,
                    )
                    .map_err(|raw| {
                        TheoryError::TruncationOverflow(
                            bank.render(raw, sig),
                            bank.size[raw],
                            size_bound,
                        )
                    })?;
                    let result = *class_index
                        .get(&uf.find(composite))
                        .expect("reduced composite has a class");
                    entries.push((theta, args, result));
                    continue;
                }
                for (a, arow) in classes.iter().enumerate() {
                    if total + a > max_arity {
                        continue;
                    }
                    for idx in 0..arow.len() {
                        let mut next = args.clone();
                        next.push(ElemRef::new(a, idx));
                        args_stack.push((next, total + a));
                    }
                }
            }
        }
    }

    let operad = FiniteOperad::from_parts(&p.name, labels, identity, &entries)
        .expect("class table is well formed");

    let threshold = size_bound.saturating_sub(max_eq_size);
    let representatives: Vec<Vec<String>> = classes
        .iter()
        .map(|row| row.iter().map(|&r| bank.render(r, sig)).collect())
        .collect();
    let boundary_unstable: Vec<Vec<bool>> = classes
        .iter()
        .map(|row| row.iter().map(|&r| bank.size[r] > threshold).collect())
        .collect();

    Ok(FreeOperadTruncation {
        operad,
        representatives,
        boundary_unstable,
        size_bound,
    })
}

fn rename(t: &TermExpr, renaming: &HashMap<usize, usize>) -> TermExpr {
    match t {
        TermExpr::Var(i) => TermExpr::Var(renaming[i]),
        TermExpr::App(op, args) => {
            TermExpr::App(*op, args.iter().map(|a| rename(a, renaming)).collect())
        }
    }
}

/// Substitutes bank terms for the variables of a normalized equation side.
fn instantiate(bank: &mut Bank, t: &TermExpr, assignment: &[usize]) -> usize {
    match t {
        TermExpr::Var(i) => assignment[*i],
        TermExpr::App(op, args) => {
            let children: Vec<usize> = args
                .iter()
                .map(|a| instantiate(bank, a, assignment))
                .collect();
            bank.intern(*op, children)
        }
    }
}

/// Replaces the leaves of `theta` left to right with the argument terms,
/// collapsing every built node to its class representative so the result
/// stays inside the enumerated bank whenever its class is known. A node
/// whose reduced form still exceeds the bound has no class and is returned
/// as the error.
fn substitute_into_classes(
    bank: &mut Bank,
    uf: &mut UnionFind,
    rep: &HashMap<usize, usize>,
    enumerated: usize,
    theta: usize,
    args: &[usize],
) -> Result<usize, usize> {
    fn go(
        bank: &mut Bank,
        uf: &mut UnionFind,
        rep: &HashMap<usize, usize>,
        enumerated: usize,
        id: usize,
        args: &[usize],
        next: &mut usize,
    ) -> Result<usize, usize> {
        match bank.nodes[id].clone() {
            None => {
                let r = args[*next];
                *next += 1;
                Ok(r)
            }
            Some((op, children)) => {
                let mut reduced = Vec::with_capacity(children.len());
                for c in children {
                    reduced.push(go(bank, uf, rep, enumerated, c, args, next)?);
                }
                let raw = bank.intern(op, reduced);
                if raw >= enumerated {
                    return Err(raw);
                }
                Ok(rep[&uf.find(raw)])
            }
        }
    }
    let mut next = 0;
    let out = go(bank, uf, rep, enumerated, theta, args, &mut next);
    debug_assert!(out.is_err() || next == args.len());
    out
}

pub const MONOID_PRESENTATION: &str = "\
theory monoid
op e : 0
op mul : 2
eq mul(e, x0) = x0
eq mul(x0, e) = x0
eq mul(mul(x0, x1), x2) = mul(x0, mul(x1, x2))
end
";

#[cfg(test)]
mod tests {
    use super::*;

    fn monoid() -> Presentation {
        parse_presentation(MONOID_PRESENTATION).unwrap()
    }

    #[test]
    fn parse_monoid() {
        let p = monoid();
        assert_eq!(p.name, "monoid");
        assert_eq!(p.signature.operations(), &[("e".into(), 0), ("mul".into(), 2)]);
        assert_eq!(p.equations.len(), 3);
        assert_eq!(
            p.equations[2].lhs.render(&p.signature),
            "mul(mul(x0, x1), x2)"
        );
    }

    #[test]
    fn parse_error_positions() {
        let bad = "theory t\nop mul : 2\neq mul(x0) = x0\nend\n";
        match parse_presentation(bad).unwrap_err() {
            TheoryError::ArityMismatch {
                name,
                expected,
                got,
                line,
                col,
            } => {
                assert_eq!((name.as_str(), expected, got), ("mul", 2, 1));
                assert_eq!((line, col), (3, 4));
            }
            other => panic!("wrong error: {other}"),
        }

        let unknown = "theory t\neq f(x0) = x0\nend\n";
        assert!(matches!(
            parse_presentation(unknown).unwrap_err(),
            TheoryError::UnknownOperation { line: 2, .. }
        ));

        let noeq = "theory t\nop u : 1\neq u(x0) u(x0)\nend\n";
        match parse_presentation(noeq).unwrap_err() {
            TheoryError::Syntax { line, col, msg } => {
                assert_eq!(line, 3);
                assert!(col > 1);
                assert!(msg.contains('='));
            }
            other => panic!("wrong error: {other}"),
        }

        assert!(parse_presentation("theory t\nop x0 : 1\nend\n").is_err());
        assert!(parse_presentation("theory t\nop u : 1\nop u : 2\nend\n").is_err());
        assert!(parse_presentation("theory t\n").is_err());
        assert!(parse_presentation("op u : 1\nend\n").is_err());
    }

    #[test]
    fn parse_empty_theory() {
        let p = parse_presentation("theory empty\nend\n").unwrap();
        assert!(p.signature.operations().is_empty());
        let free = free_operad_truncation(&p, 2, 3).unwrap();
        assert_eq!(free.operad.carrier_sizes(), &[0, 1, 0]);
        assert!(free.operad.validate().ok());
    }

    #[test]
    fn variable_sequences() {
        let p = monoid();
        let t = &p.equations[2].lhs; // mul(mul(x0, x1), x2)
        assert_eq!(variable_sequence(t), vec![0, 1, 2]);
        assert_eq!(variable_sequence(&TermExpr::Var(0)), vec![0]);
        let rep = TermExpr::App(1, vec![TermExpr::Var(0), TermExpr::Var(0)]);
        assert_eq!(variable_sequence(&rep), vec![0, 0]);
    }

    #[test]
    fn regularity_verdicts() {
        assert!(is_strongly_regular(&monoid()).accepted());

        let comm = parse_presentation(
            "theory comm\nop e : 0\nop mul : 2\neq mul(x0, x1) = mul(x1, x0)\nend\n",
        )
        .unwrap();
        let report = is_strongly_regular(&comm);
        assert!(!report.accepted());
        let v = &report.verdicts[0];
        assert!(v.same_set && !v.same_order && v.no_repetition);
        assert!(report.to_string().contains("same-order"));

        let group = parse_presentation(
            "theory group\nop e : 0\nop mul : 2\nop inv : 1\neq mul(x0, inv(x0)) = e\nend\n",
        )
        .unwrap();
        let report = is_strongly_regular(&group);
        assert!(!report.accepted());
        let v = &report.verdicts[0];
        assert!(!v.same_set && !v.same_order && !v.no_repetition);
    }

    #[test]
    fn regularity_is_name_invariant() {
        let renamed = parse_presentation(
            "theory m2\nop unit : 0\nop star : 2\neq star(unit, x0) = x0\n\
             eq star(x0, unit) = x0\neq star(star(x0, x1), x2) = star(x0, star(x1, x2))\nend\n",
        )
        .unwrap();
        let a = is_strongly_regular(&monoid());
        let b = is_strongly_regular(&renamed);
        assert_eq!(a.accepted(), b.accepted());
        assert_eq!(
            a.verdicts.iter().map(|v| v.ok()).collect::<Vec<_>>(),
            b.verdicts.iter().map(|v| v.ok()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn monoid_truncation_is_terminal() {
        let free = free_operad_truncation(&monoid(), 3, 5).unwrap();
        assert_eq!(free.operad.carrier_sizes(), &[1, 1, 1, 1]);
        assert!(free.operad.validate().ok());
        assert_eq!(free.operad, free.operad.reverse());
        assert!(!free.any_unstable());
        assert_eq!(free.representatives[0], vec!["e"]);
        assert_eq!(free.representatives[1], vec!["x0"]);
        assert_eq!(free.representatives[2], vec!["mul(x0, x1)"]);
    }

    #[test]
    fn free_binary_tree_counts() {
        let p = parse_presentation("theory magma\nop m : 2\nend\n").unwrap();
        let free = free_operad_truncation(&p, 3, 3).unwrap();
        assert_eq!(free.operad.carrier_sizes(), &[0, 1, 1, 2]);
        assert!(free.operad.validate().ok());
        // ties in size are broken by preorder traversal, leaf before node
        assert_eq!(
            free.representatives[3],
            vec!["m(x0, m(x1, x2))", "m(m(x0, x1), x2)"]
        );
        // composing the generator into its own first slot gives the left tree
        let m = free.operad.elem_by_label("m.x0.x1").unwrap();
        let id = free.operad.identity();
        let left = free.operad.compose(m, &[m, id]).unwrap();
        assert_eq!(free.operad.label(left), "m.m.x0.x1.x2");
        let right = free.operad.compose(m, &[id, m]).unwrap();
        assert_eq!(free.operad.label(right), "m.x0.m.x1.x2");
        assert_ne!(left, right);
    }

    #[test]
    fn unary_collapse() {
        let p = parse_presentation("theory collapse\nop u : 1\neq u(x0) = x0\nend\n").unwrap();
        for bound in 1..=4 {
            let free = free_operad_truncation(&p, 1, bound).unwrap();
            assert_eq!(free.operad.carrier_sizes(), &[0, 1]);
            assert_eq!(free.representatives[1], vec!["x0"]);
            assert!(free.operad.validate().ok());
        }
    }

    #[test]
    fn truncation_overflow_is_reported() {
        let p = parse_presentation("theory freeu\nop u : 1\nend\n").unwrap();
        let err = free_operad_truncation(&p, 1, 2)
            .err()
            .expect("free unary compositions escape any bound");
        match err {
            TheoryError::TruncationOverflow(term, size, bound) => {
                assert_eq!(size, 3);
                assert_eq!(bound, 2);
                assert_eq!(term, "u(u(u(x0)))");
            }
            other => panic!("wrong error: {other}"),
        }
    }

    #[test]
    fn regularity_precondition_enforced() {
        let comm = parse_presentation(
            "theory comm\nop mul : 2\neq mul(x0, x1) = mul(x1, x0)\nend\n",
        )
        .unwrap();
        assert!(matches!(
            free_operad_truncation(&comm, 2, 3),
            Err(TheoryError::NotStronglyRegular(..))
        ));
    }

    #[test]
    fn identifications_persist_across_bounds() {
        // u(u(x0)) = x0 over a constant: terms pile up, classes do not
        let p = parse_presentation(
            "theory uc\nop u : 1\nop c : 0\neq u(u(x0)) = x0\nend\n",
        )
        .unwrap();
        for bound in 3..=5 {
            let free = free_operad_truncation(&p, 1, bound).unwrap();
            assert_eq!(free.operad.carrier_sizes(), &[2, 2]);
            assert_eq!(free.representatives[0], vec!["c", "u(c)"]);
            assert_eq!(free.representatives[1], vec!["x0", "u(x0)"]);
            // the identification u.u = id, first available at bound 2,
            // survives every larger bound
            let u = free.operad.elem_by_label("u.x0").unwrap();
            assert_eq!(
                free.operad.compose(u, &[u]).unwrap(),
                free.operad.identity()
            );
            assert!(free.operad.validate().ok());
        }

        for bound in 3..=5 {
            let free = free_operad_truncation(&monoid(), 2, bound).unwrap();
            assert_eq!(free.operad.carrier_sizes(), &[1, 1, 1]);
        }
    }

    #[test]
    fn boundary_instability_is_flagged() {
        // a vacuous equation of size 2 moves the stability threshold down
        // to 1, flagging the size-2 representatives at arity 3
        let p = parse_presentation(
            "theory padded\nop m : 2\neq m(m(x0, x1), x2) = m(m(x0, x1), x2)\nend\n",
        )
        .unwrap();
        let free = free_operad_truncation(&p, 3, 3).unwrap();
        assert_eq!(free.operad.carrier_sizes(), &[0, 1, 1, 2]);
        assert_eq!(free.boundary_unstable[1], vec![false]);
        assert_eq!(free.boundary_unstable[2], vec![false]);
        assert_eq!(free.boundary_unstable[3], vec![true, true]);
        assert!(free.any_unstable());

        let magma = parse_presentation("theory magma\nop m : 2\nend\n").unwrap();
        assert!(!free_operad_truncation(&magma, 3, 3).unwrap().any_unstable());
    }
}
