//! Dense operator strategies: the `n`-dimensional permutation solution,
//! completion of partial assignments, verification, and simulated play on a
//! maximally entangled state.

use crate::bcs::Bcs;
use crate::dense::{DenseJson, DenseOperator};
use crate::game::GameBcs;
use crate::pauli::PauliString;
use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantumError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("completion stuck with {remaining} unassigned variables")]
    Stuck { remaining: usize },
    #[error("observables {0} and {1} do not commute")]
    NonCommuting(usize, usize),
    #[error("sampled a branch of probability {0:e}")]
    ZeroProbability(f64),
    #[error("variable {0} has no operator")]
    Unassigned(usize),
    #[error("qubit count mismatch: {0} vs {1}")]
    QubitMismatch(usize, usize),
    #[error("question ({alpha}, {beta}) is not a valid constraint/variable pair")]
    BadQuestion { alpha: usize, beta: usize },
}

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSolution {
    pub dim: usize,
    pub assignment: Vec<DenseOperator>,
}

/// Assignment where some variables may still be open.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialSolution {
    pub dim: usize,
    pub assignment: Vec<Option<DenseOperator>>,
}

impl PartialSolution {
    pub fn empty(dim: usize, n_vars: usize) -> Self {
        Self {
            dim,
            assignment: vec![None; n_vars],
        }
    }
}

#[derive(Serialize)]
struct NamedOperator<'a> {
    name: &'a str,
    #[serde(flatten)]
    matrix: DenseJson,
}

#[derive(Serialize)]
struct SolutionJson<'a> {
    dim: usize,
    operators: Vec<NamedOperator<'a>>,
}

impl OperatorSolution {
    pub fn to_json(&self, bcs: &Bcs) -> String {
        let doc = SolutionJson {
            dim: self.dim,
            operators: bcs
                .variables
                .iter()
                .zip(&self.assignment)
                .map(|(name, m)| NamedOperator {
                    name,
                    matrix: m.to_json(),
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("plain data serializes")
    }

    pub fn from_pauli(sol: &crate::bcs::PauliSolution) -> Result<Self, crate::pauli::PauliError> {
        let assignment = sol
            .assignment
            .iter()
            .map(PauliString::to_matrix)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self {
            dim: 1 << sol.qubits,
            assignment,
        })
    }
}

/// `I - 2 e_vv` for each vertex and the transposition matrix of `u, v` for
/// each edge, in dimension `n`; every other variable is derived by
/// [`complete_solution`].
pub fn permutation_generators(game: &GameBcs) -> PartialSolution {
    let n = game.n;
    let mut partial = PartialSolution::empty(n, game.bcs.n_vars());
    for v in 1..=n {
        let mut diag = vec![1.0; n];
        diag[v - 1] = -1.0;
        partial.assignment[game.a(v)] = Some(DenseOperator::diagonal(&diag));
    }
    for u in 1..=n {
        for v in u + 1..=n {
            let swap = |i: usize| match i {
                i if i == u - 1 => v - 1,
                i if i == v - 1 => u - 1,
                i => i,
            };
            let m = DenseOperator::from_fn(n, |r, c| {
                if swap(c) == r {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            partial.assignment[game.x(u, v)] = Some(m);
        }
    }
    partial
}

pub fn permutation_solution(game: &GameBcs) -> Result<OperatorSolution, QuantumError> {
    complete_solution(&game.bcs, permutation_generators(game))
}

/// Repeatedly solves constraints with exactly one open variable. For
/// `L · U · R = c·I` with involutions, `U = c · L⁻¹ R⁻¹` where each inverse is
/// the reversed product.
pub fn complete_solution(
    bcs: &Bcs,
    partial: PartialSolution,
) -> Result<OperatorSolution, QuantumError> {
    let d = partial.dim;
    let mut slots = partial.assignment;
    if slots.len() != bcs.n_vars() {
        return Err(QuantumError::DimensionMismatch {
            expected: bcs.n_vars(),
            got: slots.len(),
        });
    }
    for m in slots.iter().flatten() {
        if m.dim() != d {
            return Err(QuantumError::DimensionMismatch {
                expected: d,
                got: m.dim(),
            });
        }
    }
    loop {
        let mut progress = false;
        for c in &bcs.constraints {
            let open: Vec<usize> = c
                .vars
                .iter()
                .copied()
                .filter(|&v| slots[v].is_none())
                .collect();
            if open.len() != 1 {
                continue;
            }
            let p = c.vars.iter().position(|&v| v == open[0]).expect("present");
            let mut u = DenseOperator::identity(d);
            for &v in c.vars[..p].iter().rev().chain(c.vars[p + 1..].iter().rev()) {
                u = u.matmul(slots[v].as_ref().expect("known"));
            }
            if c.is_negative() {
                u = u.neg();
            }
            slots[open[0]] = Some(u);
            progress = true;
        }
        let remaining = slots.iter().filter(|s| s.is_none()).count();
        if remaining == 0 {
            break;
        }
        if !progress {
            return Err(QuantumError::Stuck { remaining });
        }
    }
    Ok(OperatorSolution {
        dim: d,
        assignment: slots.into_iter().map(|s| s.expect("filled")).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorReport {
    pub hermitian: f64,
    pub involution: f64,
    pub commutation: f64,
    pub product: f64,
    /// Constraint with the largest product violation.
    pub worst_product_constraint: Option<usize>,
    pub worst_commutation_constraint: Option<usize>,
}

impl OperatorReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.hermitian <= tol
            && self.involution <= tol
            && self.commutation <= tol
            && self.product <= tol
    }
}

pub fn verify_operator_solution(
    bcs: &Bcs,
    sol: &OperatorSolution,
) -> Result<OperatorReport, QuantumError> {
    if sol.assignment.len() != bcs.n_vars() {
        return Err(QuantumError::DimensionMismatch {
            expected: bcs.n_vars(),
            got: sol.assignment.len(),
        });
    }
    let d = sol.dim;
    if let Some(m) = sol.assignment.iter().find(|m| m.dim() != d) {
        return Err(QuantumError::DimensionMismatch {
            expected: d,
            got: m.dim(),
        });
    }
    let id = DenseOperator::identity(d);
    let mut report = OperatorReport {
        hermitian: 0.0,
        involution: 0.0,
        commutation: 0.0,
        product: 0.0,
        worst_product_constraint: None,
        worst_commutation_constraint: None,
    };
    for a in &sol.assignment {
        report.hermitian = report.hermitian.max(a.max_abs_diff(&a.adjoint()));
        report.involution = report.involution.max(a.matmul(a).max_abs_diff(&id));
    }
    for (j, c) in bcs.constraints.iter().enumerate() {
        let m = c.members();
        for (i, &u) in m.iter().enumerate() {
            for &w in &m[i + 1..] {
                let (a, b) = (&sol.assignment[u], &sol.assignment[w]);
                let err = a.matmul(b).max_abs_diff(&b.matmul(a));
                if err > report.commutation || report.worst_commutation_constraint.is_none() {
                    report.worst_commutation_constraint = Some(j);
                    report.commutation = report.commutation.max(err);
                }
            }
        }
        let mut prod = id.clone();
        for &v in &c.vars {
            prod = prod.matmul(&sol.assignment[v]);
        }
        let target = if c.is_negative() {
            id.neg()
        } else {
            id.clone()
        };
        let err = prod.max_abs_diff(&target);
        if err > report.product || report.worst_product_constraint.is_none() {
            report.worst_product_constraint = Some(j);
            report.product = report.product.max(err);
        }
    }
    Ok(report)
}

/// `⟨Φ⁺| A ⊗ B |Φ⁺⟩ = Re tr(A Bᵀ) / d`.
pub fn correlation(a: &DenseOperator, b: &DenseOperator) -> Result<f64, QuantumError> {
    if a.dim() != b.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let s: Complex64 = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x * y)
        .sum();
    Ok(s.re / a.dim() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

/// Bipartite pure state; amplitude of `|a⟩|b⟩` sits at `a * dim + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct SharedState {
    pub dim: usize,
    pub amplitudes: Vec<Complex64>,
}

impl SharedState {
    pub fn phi_plus(dim: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim * dim];
        let w = 1.0 / (dim as f64).sqrt();
        for i in 0..dim {
            amplitudes[i * dim + i] = Complex64::new(w, 0.0);
        }
        Self { dim, amplitudes }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `(O ⊗ I)|ψ⟩` or `(I ⊗ O)|ψ⟩`.
    pub fn apply(&self, side: Side, op: &DenseOperator) -> Self {
        let d = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); d * d];
        for a in 0..d {
            for b in 0..d {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    acc += match side {
                        Side::A => op.get(a, k) * self.amplitudes[k * d + b],
                        Side::B => op.get(b, k) * self.amplitudes[a * d + k],
                    };
                }
                out[a * d + b] = acc;
            }
        }
        Self {
            dim: d,
            amplitudes: out,
        }
    }

    /// Unnormalized `(I ± O)/2 |ψ⟩` for outcome `±1`.
    fn project(&self, side: Side, op: &DenseOperator, outcome: i8) -> Self {
        let o = self.apply(side, op);
        let s = if outcome > 0 { 1.0 } else { -1.0 };
        Self {
            dim: self.dim,
            amplitudes: self
                .amplitudes
                .iter()
                .zip(&o.amplitudes)
                .map(|(a, b)| (a + b * s) * 0.5)
                .collect(),
        }
    }

    fn normalized(mut self) -> Self {
        let n = self.norm_sqr().sqrt();
        for z in &mut self.amplitudes {
            *z /= n;
        }
        self
    }
}

fn check_commuting(obs: &[DenseOperator]) -> Result<(), QuantumError> {
    for i in 0..obs.len() {
        for j in i + 1..obs.len() {
            if obs[i].matmul(&obs[j]).max_abs_diff(&obs[j].matmul(&obs[i])) > DEFAULT_TOL {
                return Err(QuantumError::NonCommuting(i, j));
            }
        }
    }
    Ok(())
}

const BRANCH_FLOOR: f64 = 1e-12;

/// Sequential projective measurement of commuting ±1 observables on one side.
pub fn measure_commuting<R: Rng + ?Sized>(
    state: &SharedState,
    side: Side,
    observables: &[DenseOperator],
    rng: &mut R,
) -> Result<(Vec<i8>, SharedState), QuantumError> {
    check_commuting(observables)?;
    let mut psi = state.clone();
    let mut outcomes = Vec::with_capacity(observables.len());
    for o in observables {
        if o.dim() != psi.dim {
            return Err(QuantumError::DimensionMismatch {
                expected: psi.dim,
                got: o.dim(),
            });
        }
        let plus = psi.project(side, o, 1);
        let p_plus = plus.norm_sqr() / psi.norm_sqr();
        let outcome: i8 = if rng.gen::<f64>() < p_plus { 1 } else { -1 };
        let branch = if outcome > 0 {
            plus
        } else {
            psi.project(side, o, -1)
        };
        let p = if outcome > 0 { p_plus } else { 1.0 - p_plus };
        if p < BRANCH_FLOOR {
            return Err(QuantumError::ZeroProbability(p));
        }
        outcomes.push(outcome);
        psi = branch.normalized();
    }
    Ok((outcomes, psi))
}

/// Exact joint outcome distribution of measuring `observables` in order.
pub fn outcome_distribution(
    state: &SharedState,
    side: Side,
    observables: &[DenseOperator],
) -> Result<BTreeMap<Vec<i8>, f64>, QuantumError> {
    check_commuting(observables)?;
    let mut branches = vec![(Vec::new(), state.clone())];
    for o in observables {
        let mut next = Vec::new();
        for (bits, psi) in branches {
            for s in [1i8, -1] {
                let b = psi.project(side, o, s);
                if b.norm_sqr() > BRANCH_FLOOR {
                    let mut bits = bits.clone();
                    bits.push(s);
                    next.push((bits, b));
                }
            }
        }
        branches = next;
    }
    let total = state.norm_sqr();
    Ok(branches
        .into_iter()
        .map(|(bits, psi)| (bits, psi.norm_sqr() / total))
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundResult {
    /// One bit per distinct variable of the constraint, ascending index.
    pub alice_bits: Vec<i8>,
    pub bob_bit: i8,
    pub won: bool,
}

/// Scores answers: Alice's product over the written constraint must equal
/// the right-hand side and her value for `beta` must match Bob's.
pub fn score_answers(bcs: &Bcs, alpha: usize, beta: usize, alice_bits: &[i8], bob_bit: i8) -> bool {
    let c = &bcs.constraints[alpha];
    let members = c.members();
    let value = |v: usize| members.iter().position(|&m| m == v).map(|i| alice_bits[i]);
    let product: i8 = c.vars.iter().map(|&v| value(v).unwrap_or(1)).product();
    let agree = match value(beta) {
        Some(a) => a == bob_bit,
        None => true,
    };
    product == c.rhs && agree
}

pub fn play_round<R: Rng + ?Sized>(
    game: &GameBcs,
    sol: &OperatorSolution,
    (alpha, beta): (usize, usize),
    rng: &mut R,
) -> Result<RoundResult, QuantumError> {
    let bcs = &game.bcs;
    let c = bcs
        .constraints
        .get(alpha)
        .ok_or(QuantumError::BadQuestion { alpha, beta })?;
    let members = c.members();
    if !members.contains(&beta) {
        return Err(QuantumError::BadQuestion { alpha, beta });
    }
    let state = SharedState::phi_plus(sol.dim);
    let obs: Vec<DenseOperator> = members.iter().map(|&v| sol.assignment[v].clone()).collect();
    let (alice_bits, after) = measure_commuting(&state, Side::A, &obs, rng)?;
    let (bob, _) = measure_commuting(&after, Side::B, &[sol.assignment[beta].transpose()], rng)?;
    let won = score_answers(bcs, alpha, beta, &alice_bits, bob[0]);
    Ok(RoundResult {
        alice_bits,
        bob_bit: bob[0],
        won,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairAgreement {
    pub alpha: usize,
    pub beta: usize,
    pub agreement: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub pairs: Vec<PairAgreement>,
    pub min_pair: f64,
    pub avg_win: f64,
    /// Constraints whose observable set fails to commute or multiply to the rhs.
    pub lost_constraints: Vec<usize>,
}

/// `tr(P Qᵀ) / 2^q` for Pauli strings: `±1` when `P = ±Q` up to transposition
/// signs, else `0`.
pub fn pauli_correlation(p: &PauliString, q: &PauliString) -> Result<f64, QuantumError> {
    let prod = p
        .multiply(&q.transpose())
        .map_err(|_| QuantumError::QubitMismatch(p.n_qubits(), q.n_qubits()))?;
    if !prod.is_scalar() {
        return Ok(0.0);
    }
    Ok([1.0, 0.0, -1.0, 0.0][prod.phase() as usize])
}

/// Audits a Pauli strategy: `alice[alpha]` lists one string per distinct
/// variable of constraint `alpha` (ascending), `bob[v]` is the observable
/// Bob measures for `v` (the transpose of Alice's, in a perfect strategy).
pub fn audit_clifford_strategy(
    game: &GameBcs,
    alice: &[Vec<PauliString>],
    bob: &[PauliString],
) -> Result<AuditReport, QuantumError> {
    let bcs = &game.bcs;
    if alice.len() != bcs.n_constraints() {
        return Err(QuantumError::DimensionMismatch {
            expected: bcs.n_constraints(),
            got: alice.len(),
        });
    }
    if bob.len() != bcs.n_vars() {
        return Err(QuantumError::DimensionMismatch {
            expected: bcs.n_vars(),
            got: bob.len(),
        });
    }
    let q = bob.first().map_or(0, |b| b.n_qubits());
    if let Some(s) = bob
        .iter()
        .chain(alice.iter().flatten())
        .find(|s| s.n_qubits() != q)
    {
        return Err(QuantumError::QubitMismatch(q, s.n_qubits()));
    }
    let mut pairs = Vec::new();
    let mut lost = Vec::new();
    for (alpha, c) in bcs.constraints.iter().enumerate() {
        let members = c.members();
        let strings = &alice[alpha];
        if strings.len() != members.len() {
            return Err(QuantumError::DimensionMismatch {
                expected: members.len(),
                got: strings.len(),
            });
        }
        let of = |v: usize| &strings[members.iter().position(|&m| m == v).expect("member")];
        let hermitian = strings.iter().all(PauliString::is_hermitian);
        let commuting = strings.iter().enumerate().all(|(i, s)| {
            strings[i + 1..]
                .iter()
                .all(|t| s.commutes(t).unwrap_or(false))
        });
        let mut prod = PauliString::identity(q);
        for &v in &c.vars {
            prod = prod.multiply(of(v)).expect("qubit counts checked");
        }
        let valid =
            hermitian && commuting && prod == PauliString::identity(q).signed(c.is_negative());
        if !valid {
            lost.push(alpha);
        }
        for (i, &beta) in members.iter().enumerate() {
            let agreement = if valid {
                (1.0 + pauli_correlation(&strings[i], &bob[beta])?) / 2.0
            } else {
                0.0
            };
            pairs.push(PairAgreement {
                alpha,
                beta,
                agreement,
            });
        }
    }
    let min_pair = pairs.iter().map(|p| p.agreement).fold(1.0, f64::min);
    let avg_win = pairs.iter().map(|p| p.agreement).sum::<f64>() / pairs.len().max(1) as f64;
    Ok(AuditReport {
        pairs,
        min_pair,
        avg_win,
        lost_constraints: lost,
    })
}

/// Alice strings taken from one global assignment.
pub fn alice_from_assignment(bcs: &Bcs, assignment: &[PauliString]) -> Vec<Vec<PauliString>> {
    bcs.constraints
        .iter()
        .map(|c| c.members().iter().map(|&v| assignment[v].clone()).collect())
        .collect()
}
