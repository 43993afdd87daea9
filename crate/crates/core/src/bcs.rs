//! Linear binary constraint systems and their classical and Pauli-string
//! solvers.
//!
//! The Pauli solver eliminates variables over GF(2), writes each dependent
//! variable as a signed product of free variables, and reduces every
//! constraint to a linear equation over sign unknowns `C_i` (one per
//! dependent variable) and commutator unknowns `C_kl` (one per pair of free
//! variables, `1` meaning anticommute). A solution of that system is turned
//! into Pauli strings with one qubit per anticommuting pair; an inconsistency
//! becomes a [`Certificate`] that [`verify_certificate`] can replay.

use crate::gf2::{self, BitRow, Gf2Outcome, Gf2System};
use crate::pauli::{Letter, PauliError, PauliString};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BcsError {
    #[error("line {line}: unknown variable {name:?}")]
    UnknownVariable { line: usize, name: String },
    #[error("line {line}: malformed right-hand side {text:?} (expected 1 or -1)")]
    MalformedRhs { line: usize, text: String },
    #[error("line {line}: expected `vars... = rhs`")]
    MalformedLine { line: usize },
    #[error("line {line}: duplicate variable {name:?} in header")]
    DuplicateVariable { line: usize, name: String },
    #[error("empty constraint system")]
    Empty,
    #[error("variable index {index} out of range for {count} variables")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("right-hand side must be 1 or -1, got {0}")]
    BadSign(i8),
    #[error("solution line {line}: {msg}")]
    SolutionFormat { line: usize, msg: String },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error("constructed solution failed self-check at constraint {0:?}")]
    SelfCheck(Option<usize>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    /// Variable indices in the order written; repeats are allowed.
    pub vars: Vec<usize>,
    /// `1` or `-1`.
    pub rhs: i8,
}

impl Constraint {
    pub fn new(vars: Vec<usize>, rhs: i8) -> Self {
        Self { vars, rhs }
    }

    pub fn is_negative(&self) -> bool {
        self.rhs < 0
    }

    /// Ascending variables with repeated pairs cancelled (`v² = 1`).
    pub fn support(&self) -> Vec<usize> {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &v in &self.vars {
            *counts.entry(v).or_default() += 1;
        }
        counts
            .into_iter()
            .filter(|&(_, c)| c % 2 == 1)
            .map(|(v, _)| v)
            .collect()
    }

    /// Distinct variables, ascending. All of them must pairwise commute.
    pub fn members(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.vars.iter().copied().collect();
        set.into_iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bcs {
    pub variables: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl Bcs {
    pub fn new(variables: Vec<String>, constraints: Vec<Constraint>) -> Result<Self, BcsError> {
        let count = variables.len();
        for c in &constraints {
            if c.rhs != 1 && c.rhs != -1 {
                return Err(BcsError::BadSign(c.rhs));
            }
            if let Some(&index) = c.vars.iter().find(|&&v| v >= count) {
                return Err(BcsError::IndexOutOfRange { index, count });
            }
        }
        Ok(Self {
            variables,
            constraints,
        })
    }

    /// Variables named `v1..vn`, constraints given as 0-based index lists.
    pub fn from_indices(n_vars: usize, constraints: &[(&[usize], i8)]) -> Result<Self, BcsError> {
        let names = (1..=n_vars).map(|i| format!("v{i}")).collect();
        let cs = constraints
            .iter()
            .map(|(vs, r)| Constraint::new(vs.to_vec(), *r))
            .collect();
        Self::new(names, cs)
    }

    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v == name)
    }

    /// Unordered pairs `(i, j)`, `i < j`, that appear together in some constraint.
    pub fn cooccurring_pairs(&self) -> BTreeSet<(usize, usize)> {
        let mut pairs = BTreeSet::new();
        for c in &self.constraints {
            let m = c.members();
            for a in 0..m.len() {
                for b in a + 1..m.len() {
                    pairs.insert((m[a], m[b]));
                }
            }
        }
        pairs
    }

    pub fn mermin_peres() -> Self {
        Self::from_indices(
            9,
            &[
                (&[0, 1, 2], 1),
                (&[3, 4, 5], 1),
                (&[6, 7, 8], 1),
                (&[0, 3, 6], 1),
                (&[1, 4, 7], 1),
                (&[2, 5, 8], -1),
            ],
        )
        .expect("static system")
    }

    pub fn chsh() -> Self {
        Self::from_indices(2, &[(&[0, 1], 1), (&[0, 1], -1)]).expect("static system")
    }
}

fn parse_rhs(text: &str, line: usize) -> Result<i8, BcsError> {
    match text.trim() {
        "1" | "+1" => Ok(1),
        "-1" | "\u{2212}1" => Ok(-1),
        other => Err(BcsError::MalformedRhs {
            line,
            text: other.to_string(),
        }),
    }
}

/// Parses the text format: `#` comments, an optional `vars:` header, then one
/// `name name ... = 1|-1` constraint per line. Without a header, variables are
/// numbered in order of first appearance.
pub fn parse_bcs(text: &str) -> Result<Bcs, BcsError> {
    let mut variables: Vec<String> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut header = false;
    let mut constraints = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("vars:") {
            header = true;
            for name in rest.split_whitespace() {
                if index.insert(name.to_string(), variables.len()).is_some() {
                    return Err(BcsError::DuplicateVariable {
                        line,
                        name: name.to_string(),
                    });
                }
                variables.push(name.to_string());
            }
            continue;
        }
        let mut parts = body.splitn(2, '=');
        let lhs = parts.next().unwrap_or("");
        let rhs = parts.next().ok_or(BcsError::MalformedLine { line })?;
        let rhs = parse_rhs(rhs, line)?;
        let mut vars = Vec::new();
        for name in lhs.split_whitespace() {
            let idx = match index.get(name) {
                Some(&k) => k,
                None if !header => {
                    index.insert(name.to_string(), variables.len());
                    variables.push(name.to_string());
                    variables.len() - 1
                }
                None => {
                    return Err(BcsError::UnknownVariable {
                        line,
                        name: name.to_string(),
                    })
                }
            };
            vars.push(idx);
        }
        constraints.push(Constraint::new(vars, rhs));
    }
    if variables.is_empty() && constraints.is_empty() {
        return Err(BcsError::Empty);
    }
    Bcs::new(variables, constraints)
}

/// Canonical text: a `vars:` header followed by one line per constraint.
pub fn serialize_bcs(bcs: &Bcs) -> String {
    let mut out = String::from("vars:");
    for v in &bcs.variables {
        out.push(' ');
        out.push_str(v);
    }
    out.push('\n');
    for c in &bcs.constraints {
        let names: Vec<&str> = c.vars.iter().map(|&v| bcs.variables[v].as_str()).collect();
        let _ = writeln!(out, "{} = {}", names.join(" "), c.rhs);
    }
    out
}

/// Parity system: one row per constraint over its support, rhs bit set for `-1`.
pub fn classical_system(bcs: &Bcs) -> Gf2System {
    let rows: Vec<(Vec<usize>, bool)> = bcs
        .constraints
        .iter()
        .map(|c| (c.support(), c.is_negative()))
        .collect();
    Gf2System::from_sparse(bcs.n_vars(), &rows)
}

/// Classical ±1 assignment, or the constraint rows whose product gives `1 = -1`.
pub fn classical_outcome(bcs: &Bcs) -> Result<Vec<i8>, Vec<usize>> {
    match gf2::solve(&classical_system(bcs)) {
        Gf2Outcome::Solution { assignment, .. } => Ok((0..bcs.n_vars())
            .map(|v| if assignment.get(v) { -1 } else { 1 })
            .collect()),
        Gf2Outcome::Inconsistent { provenance } => Err(provenance),
    }
}

pub fn classical_solve(bcs: &Bcs) -> Option<Vec<i8>> {
    classical_outcome(bcs).ok()
}

/// `A_var = C_var · ∏ A_s` over `free_support` (ascending), or `A_var` itself
/// when the variable is free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreeVarExpression {
    pub var: usize,
    /// Variable index `i` of the sign unknown `C_i`; `None` for free variables.
    pub sign_unknown: Option<usize>,
    pub free_support: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elimination {
    pub free: Vec<usize>,
    pub expressions: Vec<FreeVarExpression>,
}

impl Elimination {
    pub fn is_free(&self, v: usize) -> bool {
        self.expressions[v].sign_unknown.is_none()
    }
}

pub fn eliminate_free_vars(bcs: &Bcs) -> Elimination {
    let n = bcs.n_vars();
    let reduced = gf2::row_reduce(&classical_system(bcs));
    let free = reduced.free_columns();
    let mut expressions: Vec<FreeVarExpression> = (0..n)
        .map(|v| FreeVarExpression {
            var: v,
            sign_unknown: None,
            free_support: vec![v],
        })
        .collect();
    for (r, &p) in reduced.pivots.iter().enumerate() {
        let support: Vec<usize> = reduced
            .system
            .matrix
            .row(r)
            .ones()
            .filter(|&c| c != p)
            .collect();
        expressions[p] = FreeVarExpression {
            var: p,
            sign_unknown: Some(p),
            free_support: support,
        };
    }
    Elimination { free, expressions }
}

/// Parity of swaps needed to sort `word` ascending, per pair `(k, l)` with
/// `k < l`, where equal neighbours cancel. Returns the pairs with odd count;
/// `None` when some letter survives the cancellation.
fn word_commutators(word: &[usize]) -> Option<BTreeSet<(usize, usize)>> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for &a in word {
        *counts.entry(a).or_default() += 1;
    }
    if counts.values().any(|c| c % 2 == 1) {
        return None;
    }
    let mut odd = BTreeSet::new();
    for (a, &hi) in word.iter().enumerate() {
        for &lo in &word[a + 1..] {
            if lo < hi && !odd.insert((lo, hi)) {
                odd.remove(&(lo, hi));
            }
        }
    }
    Some(odd)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Unknown {
    /// Sign of dependent variable `i`.
    Sign(usize),
    /// Commutator of free variables `k < l`; bit 1 means they anticommute.
    Comm(usize, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RowTag {
    Constraint(usize),
    Commutation(usize, usize),
    /// `A_i² = I` for a dependent variable, which makes its string Hermitian.
    Involution(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignSystem {
    pub unknowns: Vec<Unknown>,
    pub tags: Vec<RowTag>,
    pub equations: Gf2System,
}

impl SignSystem {
    pub fn column(&self, u: Unknown) -> Option<usize> {
        self.unknowns.binary_search(&u).ok()
    }

    /// Unknowns present in row `r` of the original equations.
    pub fn row_unknowns(&self, r: usize) -> Vec<Unknown> {
        self.equations
            .matrix
            .row(r)
            .ones()
            .map(|c| self.unknowns[c])
            .collect()
    }
}

fn expand(elim: &Elimination, vars: &[usize], word: &mut Vec<usize>, signs: &mut BTreeSet<usize>) {
    for &v in vars {
        let e = &elim.expressions[v];
        if let Some(i) = e.sign_unknown {
            if !signs.insert(i) {
                signs.remove(&i);
            }
        }
        word.extend_from_slice(&e.free_support);
    }
}

pub fn build_sign_system(bcs: &Bcs, elim: &Elimination) -> SignSystem {
    let mut rows: Vec<(RowTag, BTreeSet<Unknown>, bool)> = Vec::new();
    let comm_terms = |word: &[usize]| -> BTreeSet<Unknown> {
        word_commutators(word)
            .expect("free supports must cancel after elimination")
            .into_iter()
            .map(|(k, l)| Unknown::Comm(k, l))
            .collect()
    };
    for (j, c) in bcs.constraints.iter().enumerate() {
        let mut word = Vec::new();
        let mut signs = BTreeSet::new();
        expand(elim, &c.support(), &mut word, &mut signs);
        let mut terms = comm_terms(&word);
        terms.extend(signs.into_iter().map(Unknown::Sign));
        rows.push((RowTag::Constraint(j), terms, c.is_negative()));
    }
    for (i, j) in bcs.cooccurring_pairs() {
        let (si, sj) = (
            &elim.expressions[i].free_support,
            &elim.expressions[j].free_support,
        );
        let word: Vec<usize> = [si, sj, si, sj].into_iter().flatten().copied().collect();
        let terms = comm_terms(&word);
        if !terms.is_empty() {
            rows.push((RowTag::Commutation(i, j), terms, false));
        }
    }
    for e in &elim.expressions {
        if e.sign_unknown.is_some() {
            let s = &e.free_support;
            let word: Vec<usize> = s.iter().chain(s).copied().collect();
            let terms = comm_terms(&word);
            if !terms.is_empty() {
                rows.push((RowTag::Involution(e.var), terms, false));
            }
        }
    }
    rows.retain(|(_, t, rhs)| !t.is_empty() || *rhs);

    let unknowns: Vec<Unknown> = rows
        .iter()
        .flat_map(|(_, t, _)| t.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let col = |u: &Unknown| unknowns.binary_search(u).expect("collected above");
    let sparse: Vec<(Vec<usize>, bool)> = rows
        .iter()
        .map(|(_, t, rhs)| (t.iter().map(col).collect(), *rhs))
        .collect();
    SignSystem {
        tags: rows.iter().map(|(tag, _, _)| *tag).collect(),
        equations: Gf2System::from_sparse(unknowns.len(), &sparse),
        unknowns,
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliSolution {
    pub qubits: usize,
    pub assignment: Vec<PauliString>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub constraint_rows: Vec<usize>,
    pub commutation_rows: Vec<(usize, usize)>,
    #[serde(default)]
    pub involution_rows: Vec<usize>,
    /// Concatenated variables of the cited constraints.
    pub derived_relation: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PauliOutcome {
    Solution(PauliSolution),
    Certificate(Certificate),
}

/// Full solver output, including the intermediate objects for inspection.
#[derive(Clone, Debug)]
pub struct PauliRun {
    pub elimination: Elimination,
    pub sign_system: SignSystem,
    /// Bit per sign-system unknown, present when the system is consistent.
    pub unknown_values: Option<BitRow>,
    pub anticommuting_pairs: Vec<(usize, usize)>,
    pub outcome: PauliOutcome,
}

fn certificate_from_rows(bcs: &Bcs, tags: impl IntoIterator<Item = RowTag>) -> Certificate {
    let mut cert = Certificate::default();
    for tag in tags {
        match tag {
            RowTag::Constraint(j) => cert.constraint_rows.push(j),
            RowTag::Commutation(i, j) => cert.commutation_rows.push((i, j)),
            RowTag::Involution(i) => cert.involution_rows.push(i),
        }
    }
    cert.constraint_rows.sort_unstable();
    cert.commutation_rows.sort_unstable();
    cert.involution_rows.sort_unstable();
    cert.derived_relation = cert
        .constraint_rows
        .iter()
        .flat_map(|&j| bcs.constraints[j].support())
        .collect();
    cert
}

pub fn pauli_solve(bcs: &Bcs) -> Result<PauliOutcome, BcsError> {
    Ok(pauli_solve_detailed(bcs)?.outcome)
}

pub fn pauli_solve_detailed(bcs: &Bcs) -> Result<PauliRun, BcsError> {
    let elimination = eliminate_free_vars(bcs);
    let sign_system = build_sign_system(bcs, &elimination);

    if let Some(j) = bcs
        .constraints
        .iter()
        .position(|c| c.support().is_empty() && c.is_negative())
    {
        return Ok(PauliRun {
            elimination,
            sign_system,
            unknown_values: None,
            anticommuting_pairs: Vec::new(),
            outcome: PauliOutcome::Certificate(certificate_from_rows(bcs, [RowTag::Constraint(j)])),
        });
    }

    let values = match gf2::solve(&sign_system.equations) {
        Gf2Outcome::Inconsistent { provenance } => {
            let tags = provenance.iter().map(|&r| sign_system.tags[r]);
            let cert = certificate_from_rows(bcs, tags);
            return Ok(PauliRun {
                elimination,
                sign_system,
                unknown_values: None,
                anticommuting_pairs: Vec::new(),
                outcome: PauliOutcome::Certificate(cert),
            });
        }
        Gf2Outcome::Solution { assignment, .. } => assignment,
    };

    let value = |u: Unknown| sign_system.column(u).is_some_and(|c| values.get(c));
    let pairs: Vec<(usize, usize)> = sign_system
        .unknowns
        .iter()
        .filter_map(|&u| match u {
            Unknown::Comm(k, l) if value(u) => Some((k, l)),
            _ => None,
        })
        .collect();
    let qubits = pairs.len();
    let mut free_strings: BTreeMap<usize, PauliString> = elimination
        .free
        .iter()
        .map(|&v| (v, PauliString::identity(qubits)))
        .collect();
    for (q, &(k, l)) in pairs.iter().enumerate() {
        free_strings
            .get_mut(&k)
            .expect("free")
            .set_letter(q, Letter::X);
        free_strings
            .get_mut(&l)
            .expect("free")
            .set_letter(q, Letter::Z);
    }
    let mut assignment = Vec::with_capacity(bcs.n_vars());
    for e in &elimination.expressions {
        let mut s = PauliString::identity(qubits);
        for f in &e.free_support {
            s = s.multiply(&free_strings[f])?;
        }
        if let Some(i) = e.sign_unknown {
            s = s.signed(value(Unknown::Sign(i)));
        }
        assignment.push(s);
    }
    let solution = PauliSolution { qubits, assignment };
    let report = verify_pauli_solution(bcs, &solution);
    if !report.ok() {
        return Err(BcsError::SelfCheck(report.first_failure));
    }
    Ok(PauliRun {
        elimination,
        sign_system,
        unknown_values: Some(values),
        anticommuting_pairs: pairs,
        outcome: PauliOutcome::Solution(solution),
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliReport {
    pub hermitian_ok: bool,
    pub commutation_ok: bool,
    pub products_ok: bool,
    /// First constraint where a commutation or product check failed.
    pub first_failure: Option<usize>,
    /// First variable whose string is not a Hermitian involution.
    pub first_bad_variable: Option<usize>,
}

impl PauliReport {
    pub fn ok(&self) -> bool {
        self.hermitian_ok && self.commutation_ok && self.products_ok
    }
}

pub fn verify_pauli_solution(bcs: &Bcs, sol: &PauliSolution) -> PauliReport {
    let mut report = PauliReport {
        hermitian_ok: true,
        commutation_ok: true,
        products_ok: true,
        first_failure: None,
        first_bad_variable: None,
    };
    if sol.assignment.len() != bcs.n_vars() {
        report.hermitian_ok = false;
        report.first_bad_variable = Some(sol.assignment.len().min(bcs.n_vars()));
        return report;
    }
    for (v, s) in sol.assignment.iter().enumerate() {
        if s.n_qubits() != sol.qubits || !s.is_hermitian() {
            report.hermitian_ok = false;
            report.first_bad_variable.get_or_insert(v);
        }
    }
    if !report.hermitian_ok {
        return report;
    }
    for (j, c) in bcs.constraints.iter().enumerate() {
        let m = c.members();
        let commuting = m.iter().enumerate().all(|(a, &u)| {
            m[a + 1..].iter().all(|&w| {
                sol.assignment[u]
                    .commutes(&sol.assignment[w])
                    .unwrap_or(false)
            })
        });
        let mut prod = PauliString::identity(sol.qubits);
        for &v in &c.vars {
            prod = prod.multiply(&sol.assignment[v]).expect("lengths checked");
        }
        let expected = PauliString::identity(sol.qubits).signed(c.is_negative());
        let product_ok = prod == expected;
        if !commuting {
            report.commutation_ok = false;
        }
        if !product_ok {
            report.products_ok = false;
        }
        if !(commuting && product_ok) {
            report.first_failure.get_or_insert(j);
        }
    }
    report
}

/// Formal word over free variables together with accumulated unknown parities.
#[derive(Default)]
struct Replay {
    signs: BTreeSet<usize>,
    comms: BTreeSet<(usize, usize)>,
}

impl Replay {
    fn toggle_comm(&mut self, k: usize, l: usize) {
        let key = (k.min(l), k.max(l));
        if !self.comms.insert(key) {
            self.comms.remove(&key);
        }
    }

    /// Bubble sort with cancellation of equal neighbours. Returns false when a
    /// letter is left over.
    fn reduce(&mut self, mut word: Vec<usize>) -> bool {
        loop {
            let mut changed = false;
            let mut i = 0;
            while i + 1 < word.len() {
                if word[i] == word[i + 1] {
                    word.drain(i..i + 2);
                    changed = true;
                    i = i.saturating_sub(1);
                } else if word[i] > word[i + 1] {
                    self.toggle_comm(word[i], word[i + 1]);
                    word.swap(i, i + 1);
                    changed = true;
                    i += 1;
                } else {
                    i += 1;
                }
            }
            if !changed {
                return word.is_empty();
            }
        }
    }

    fn push_vars(&mut self, elim: &Elimination, vars: &[usize], word: &mut Vec<usize>) {
        for &v in vars {
            let e = &elim.expressions[v];
            if let Some(i) = e.sign_unknown {
                if !self.signs.insert(i) {
                    self.signs.remove(&i);
                }
            }
            word.extend_from_slice(&e.free_support);
        }
    }
}

/// Replays a certificate: the cited constraint products, commutation words
/// `A_i A_j A_i A_j` and involution words `A_i A_i` are expanded over the free
/// variables and reduced by literal bubble sorting. The certificate holds iff
/// every sign and commutator unknown cancels while the right-hand sides
/// multiply to `-1`.
pub fn verify_certificate(bcs: &Bcs, cert: &Certificate) -> bool {
    let n = bcs.n_vars();
    if cert
        .constraint_rows
        .iter()
        .any(|&j| j >= bcs.n_constraints())
        || cert.involution_rows.iter().any(|&i| i >= n)
    {
        return false;
    }
    let pairs = bcs.cooccurring_pairs();
    if cert
        .commutation_rows
        .iter()
        .any(|&(i, j)| !pairs.contains(&(i.min(j), i.max(j))) || i == j)
    {
        return false;
    }
    let elim = eliminate_free_vars(bcs);
    let mut replay = Replay::default();
    let mut negative = false;
    for &j in &cert.constraint_rows {
        let c = &bcs.constraints[j];
        negative ^= c.is_negative();
        let mut word = Vec::new();
        replay.push_vars(&elim, &c.support(), &mut word);
        if !replay.reduce(word) {
            return false;
        }
    }
    for &(i, j) in &cert.commutation_rows {
        let mut word = Vec::new();
        replay.push_vars(&elim, &[i, j, i, j], &mut word);
        if !replay.reduce(word) {
            return false;
        }
    }
    for &i in &cert.involution_rows {
        let mut word = Vec::new();
        replay.push_vars(&elim, &[i, i], &mut word);
        if !replay.reduce(word) {
            return false;
        }
    }
    negative && replay.signs.is_empty() && replay.comms.is_empty()
}

/// Solution file text: one `name = <pauli>` line per variable.
pub fn format_solution(bcs: &Bcs, sol: &PauliSolution) -> Result<String, BcsError> {
    let mut out = format!("# qubits: {}\n", sol.qubits);
    for (name, s) in bcs.variables.iter().zip(&sol.assignment) {
        let _ = writeln!(out, "{name} = {}", s.to_text()?);
    }
    Ok(out)
}

pub fn parse_solution(bcs: &Bcs, text: &str) -> Result<PauliSolution, BcsError> {
    let mut slots: Vec<Option<PauliString>> = vec![None; bcs.n_vars()];
    let mut qubits = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| BcsError::SolutionFormat { line, msg };
        let (name, value) = body
            .split_once('=')
            .ok_or_else(|| err("expected `name = pauli`".into()))?;
        let v = bcs
            .var_index(name.trim())
            .ok_or_else(|| err(format!("unknown variable {:?}", name.trim())))?;
        let s = PauliString::parse(value)?;
        if *qubits.get_or_insert(s.n_qubits()) != s.n_qubits() {
            return Err(err("inconsistent qubit count".into()));
        }
        slots[v] = Some(s);
    }
    let qubits = qubits.unwrap_or(0);
    let assignment = slots
        .into_iter()
        .enumerate()
        .map(|(v, s)| {
            s.ok_or_else(|| BcsError::SolutionFormat {
                line: 0,
                msg: format!("variable {:?} not assigned", bcs.variables[v]),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PauliSolution { qubits, assignment })
}
