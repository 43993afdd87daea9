//! The two-round relation problem on a line of `N` sites, its one-round
//! sampling variant, and lightcone analysis of bounded fan-in circuits.
//!
//! Each site `i` holds three EPR pairs `(A_i(l), B_i(l))`, one per layer `l`.
//! In round 1 the sites `j..k-1` perform Bell measurements on
//! `(B_i(l), A_{i+1}(l))`, which leaves `(A_j(l), B_k(l))` maximally entangled
//! up to a Pauli frame. A measurement outcome `(x, z)` names the Bell state
//! `(I ⊗ XˣZᶻ)|Φ⁺⟩`; its `x` bit is reported as `r^B_i(l)` and its `z` bit as
//! `r^A_{i+1}(l)`. Bit 0 is the sign `+1` throughout.

use crate::dense::DenseOperator;
use crate::game::GameBcs;
use crate::quantum::{measure_commuting, OperatorSolution, QuantumError, SharedState, Side};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use thiserror::Error;

pub const LAYERS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShallowError {
    #[error("invalid instance: need 1 <= j < k <= N, got j={j}, k={k}, N={n_sites}")]
    BadRange { j: usize, k: usize, n_sites: usize },
    #[error("unknown constraint {0}")]
    UnknownConstraint(usize),
    #[error("unknown variable {0}")]
    UnknownVariable(usize),
    #[error("constraint {alpha} has {count} variables; at most 3 fit the output")]
    TooManyVariables { alpha: usize, count: usize },
    #[error("transcript covers ({tj}, {tk}), asked for ({j}, {k})")]
    RangeMismatch {
        tj: usize,
        tk: usize,
        j: usize,
        k: usize,
    },
    #[error("strategy dimension must be 8, got {0}")]
    Dimension(usize),
    #[error("post-correction fidelity {0} below 1 - 1e-9")]
    CorrectionFailed(f64),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
    #[error("wire {0} does not exist")]
    UnknownWire(usize),
    #[error("gate {gate} reads wire {wire} before it is produced")]
    Acausal { gate: usize, wire: usize },
    #[error("wire {0} is produced by more than one gate")]
    DoubleWrite(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationInstance {
    pub n_sites: usize,
    pub n: usize,
    pub j: usize,
    pub k: usize,
    pub alpha: usize,
    pub beta: usize,
}

impl RelationInstance {
    pub fn validate(&self) -> Result<(), ShallowError> {
        if !(1 <= self.j && self.j < self.k && self.k <= self.n_sites) {
            return Err(ShallowError::BadRange {
                j: self.j,
                k: self.k,
                n_sites: self.n_sites,
            });
        }
        Ok(())
    }
}

/// How `beta` is drawn when sampling instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaChoice {
    /// Uniform over the variables of `alpha`.
    InConstraint,
    /// Uniform over all variables.
    Any,
}

pub fn sample_instance<R: Rng + ?Sized>(
    n_sites: usize,
    game: &GameBcs,
    beta: BetaChoice,
    rng: &mut R,
) -> RelationInstance {
    assert!(n_sites >= 2, "need at least two sites");
    let j = rng.gen_range(1..n_sites);
    let k = rng.gen_range(j + 1..=n_sites);
    let alpha = rng.gen_range(0..game.bcs.n_constraints());
    let beta = match beta {
        BetaChoice::InConstraint => {
            let m = game.bcs.constraints[alpha].members();
            m[rng.gen_range(0..m.len())]
        }
        BetaChoice::Any => rng.gen_range(0..game.bcs.n_vars()),
    };
    RelationInstance {
        n_sites,
        n: game.n,
        j,
        k,
        alpha,
        beta,
    }
}

/// Pauli frame `XˣZᶻ` of one end-to-end pair.
#[derive(
    Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct Frame {
    pub x: bool,
    pub z: bool,
}

impl Frame {
    pub fn is_identity(&self) -> bool {
        !self.x && !self.z
    }
}

fn sign(bit: bool) -> i8 {
    if bit {
        -1
    } else {
        1
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Round1Transcript {
    pub j: usize,
    pub k: usize,
    /// `r_a[i - 1][l]` is `r^A_i(l)`; `+1` outside the swapped range.
    pub r_a: Vec<[i8; LAYERS]>,
    pub r_b: Vec<[i8; LAYERS]>,
    pub frame: [Frame; LAYERS],
}

/// Round 1 with Bell outcomes supplied by `outcome(i, l)` for each
/// measurement position `i` in `j..k`.
pub fn run_round1_with(
    instance: &RelationInstance,
    mut outcome: impl FnMut(usize, usize) -> Frame,
) -> Result<Round1Transcript, ShallowError> {
    instance.validate()?;
    let n = instance.n_sites;
    let mut r_a = vec![[1i8; LAYERS]; n];
    let mut r_b = vec![[1i8; LAYERS]; n];
    let mut frame = [Frame::default(); LAYERS];
    for (l, f) in frame.iter_mut().enumerate() {
        for i in instance.j..instance.k {
            let o = outcome(i, l);
            r_b[i - 1][l] = sign(o.x);
            r_a[i][l] = sign(o.z);
            f.x ^= o.x;
            f.z ^= o.z;
        }
    }
    Ok(Round1Transcript {
        j: instance.j,
        k: instance.k,
        r_a,
        r_b,
        frame,
    })
}

pub fn run_round1<R: Rng + ?Sized>(
    instance: &RelationInstance,
    rng: &mut R,
) -> Result<Round1Transcript, ShallowError> {
    run_round1_with(instance, |_, _| Frame {
        x: rng.gen(),
        z: rng.gen(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Syndrome {
    pub p_a: [i8; LAYERS],
    pub p_b: [i8; LAYERS],
}

impl Syndrome {
    pub fn all_plus(&self) -> bool {
        self.p_a.iter().chain(&self.p_b).all(|&s| s == 1)
    }
}

/// `p^A(l) = ∏_{i=j+1..k} r^A_i(l)` and `p^B(l) = ∏_{i=j..k-1} r^B_i(l)`.
pub fn compute_syndrome(
    t: &Round1Transcript,
    j: usize,
    k: usize,
) -> Result<Syndrome, ShallowError> {
    if (t.j, t.k) != (j, k) || k > t.r_a.len() || j == 0 {
        return Err(ShallowError::RangeMismatch {
            tj: t.j,
            tk: t.k,
            j,
            k,
        });
    }
    let mut s = Syndrome {
        p_a: [1; LAYERS],
        p_b: [1; LAYERS],
    };
    for l in 0..LAYERS {
        s.p_a[l] = (j + 1..=k).map(|i| t.r_a[i - 1][l]).product();
        s.p_b[l] = (j..k).map(|i| t.r_b[i - 1][l]).product();
    }
    Ok(s)
}

fn pauli_x() -> DenseOperator {
    DenseOperator::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

fn pauli_z() -> DenseOperator {
    DenseOperator::diagonal(&[1.0, -1.0])
}

/// `XˣZᶻ` as a 2×2 matrix.
pub fn frame_operator(f: Frame) -> DenseOperator {
    let mut m = DenseOperator::identity(2);
    if f.x {
        m = m.matmul(&pauli_x());
    }
    if f.z {
        m = m.matmul(&pauli_z());
    }
    m
}

/// Alice's single-qubit correction for layer syndrome `(p^A, p^B)`:
/// `(+,+) → I`, `(-,+) → Z`, `(+,-) → X`, `(-,-) → XZ`.
pub fn correction(p_a: i8, p_b: i8) -> DenseOperator {
    frame_operator(Frame {
        x: p_b < 0,
        z: p_a < 0,
    })
}

fn layered(ops: impl Iterator<Item = DenseOperator>) -> DenseOperator {
    ops.fold(DenseOperator::identity(1), |acc, m| acc.kron(&m))
}

/// Three pairs in the given frames: `(I ⊗ F)|Φ⁺_8⟩` with layer 0 the most
/// significant qubit on each side.
pub fn framed_state(frame: &[Frame; LAYERS]) -> SharedState {
    let f = layered(frame.iter().map(|&fr| frame_operator(fr)));
    SharedState::phi_plus(8).apply(Side::B, &f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Round2Outputs {
    /// Alice's bits, one per variable of `alpha` in ascending order, padded with `+1`.
    pub r_a: [i8; 3],
    /// Bob's bit at position 0, padded with `+1`.
    pub r_b: [i8; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Round2Options {
    pub correct: bool,
}

impl Default for Round2Options {
    fn default() -> Self {
        Self { correct: true }
    }
}

fn check_question(game: &GameBcs, alpha: usize, beta: usize) -> Result<Vec<usize>, ShallowError> {
    let c = game
        .bcs
        .constraints
        .get(alpha)
        .ok_or(ShallowError::UnknownConstraint(alpha))?;
    if beta >= game.bcs.n_vars() {
        return Err(ShallowError::UnknownVariable(beta));
    }
    let m = c.members();
    if m.len() > 3 {
        return Err(ShallowError::TooManyVariables {
            alpha,
            count: m.len(),
        });
    }
    Ok(m)
}

fn measure_pair<R: Rng + ?Sized>(
    state: &SharedState,
    members: &[usize],
    beta: usize,
    sol: &OperatorSolution,
    rng: &mut R,
) -> Result<Round2Outputs, ShallowError> {
    let obs: Vec<DenseOperator> = members.iter().map(|&v| sol.assignment[v].clone()).collect();
    let (alice, after) = measure_commuting(state, Side::A, &obs, rng)?;
    let (bob, _) = measure_commuting(&after, Side::B, &[sol.assignment[beta].transpose()], rng)?;
    let mut out = Round2Outputs {
        r_a: [1; 3],
        r_b: [1; 3],
    };
    out.r_a[..alice.len()].copy_from_slice(&alice);
    out.r_b[0] = bob[0];
    Ok(out)
}

pub fn run_round2<R: Rng + ?Sized>(
    instance: &RelationInstance,
    transcript: &Round1Transcript,
    game: &GameBcs,
    sol: &OperatorSolution,
    options: Round2Options,
    rng: &mut R,
) -> Result<Round2Outputs, ShallowError> {
    if sol.dim != 8 {
        return Err(ShallowError::Dimension(sol.dim));
    }
    let members = check_question(game, instance.alpha, instance.beta)?;
    let syndrome = compute_syndrome(transcript, instance.j, instance.k)?;
    let mut state = framed_state(&transcript.frame);
    if options.correct {
        let c = layered((0..LAYERS).map(|l| correction(syndrome.p_a[l], syndrome.p_b[l])));
        state = state.apply(Side::A, &c);
        let fidelity = SharedState::phi_plus(8).inner(&state).norm_sqr();
        if fidelity < 1.0 - 1e-9 {
            return Err(ShallowError::CorrectionFailed(fidelity));
        }
    }
    measure_pair(&state, &members, instance.beta, sol, rng)
}

/// Alice's bits satisfy `alpha`, and when `beta` is one of its variables
/// Bob's bit matches hers.
pub fn check_relation(
    instance: &RelationInstance,
    outputs: &Round2Outputs,
    game: &GameBcs,
) -> Result<bool, ShallowError> {
    let members = check_question(game, instance.alpha, instance.beta)?;
    let c = &game.bcs.constraints[instance.alpha];
    let bit = |v: usize| members.iter().position(|&m| m == v).map(|i| outputs.r_a[i]);
    let product: i8 = c.vars.iter().map(|&v| bit(v).unwrap_or(1)).product();
    let agree = bit(instance.beta).is_none_or(|a| a == outputs.r_b[0]);
    Ok(product == c.rhs && agree)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum SamplingCase {
    Case1,
    Case2,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SamplingTrial {
    pub syndrome: Syndrome,
    pub outputs: Round2Outputs,
    pub case: SamplingCase,
}

/// One-round variant: the swap and the game measurement happen together, so
/// the players measure the uncorrected pairs.
pub fn run_sampling_trial<R: Rng + ?Sized>(
    instance: &RelationInstance,
    game: &GameBcs,
    sol: &OperatorSolution,
    rng: &mut R,
) -> Result<SamplingTrial, ShallowError> {
    let t = run_round1(instance, rng)?;
    sampling_from_transcript(instance, &t, game, sol, rng)
}

pub fn sampling_from_transcript<R: Rng + ?Sized>(
    instance: &RelationInstance,
    transcript: &Round1Transcript,
    game: &GameBcs,
    sol: &OperatorSolution,
    rng: &mut R,
) -> Result<SamplingTrial, ShallowError> {
    let syndrome = compute_syndrome(transcript, instance.j, instance.k)?;
    let outputs = run_round2(
        instance,
        transcript,
        game,
        sol,
        Round2Options { correct: false },
        rng,
    )?;
    let relation = check_relation(instance, &outputs, game)?;
    let case = match (syndrome.all_plus(), relation) {
        (false, _) => SamplingCase::Case2,
        (true, true) => SamplingCase::Case1,
        (true, false) => SamplingCase::Invalid,
    };
    Ok(SamplingTrial {
        syndrome,
        outputs,
        case,
    })
}

/// Outcomes of the Bell measurements along a chain, plus the end-pair frame.
pub type SwapEvent = (Vec<Frame>, Frame);

/// Analytic distribution: every measurement outcome uniform, frame = XOR.
pub fn analytic_swap_distribution(j: usize, k: usize) -> BTreeMap<SwapEvent, f64> {
    let m = k - j;
    let p = 0.25f64.powi(m as i32);
    let mut out = BTreeMap::new();
    for code in 0..(1usize << (2 * m)) {
        let outcomes: Vec<Frame> = (0..m)
            .map(|i| Frame {
                x: (code >> (2 * i)) & 1 == 1,
                z: (code >> (2 * i + 1)) & 1 == 1,
            })
            .collect();
        let frame = outcomes.iter().fold(Frame::default(), |f, o| Frame {
            x: f.x ^ o.x,
            z: f.z ^ o.z,
        });
        out.insert((outcomes, frame), p);
    }
    out
}

/// Amplitude vector over `n_qubits`, qubit 0 most significant.
struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    fn bit(&self, index: usize, q: usize) -> usize {
        (index >> (self.n_qubits - 1 - q)) & 1
    }

    /// Projects qubits `(q1, q2)` onto `(I ⊗ XˣZᶻ)|Φ⁺⟩`.
    fn project_bell(&self, q1: usize, q2: usize, f: Frame) -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell = |a: usize, b: usize| -> f64 {
            // Component ⟨a, b|β⟩ = (-1)^{z·a} / √2 when b = a ⊕ x.
            if b == a ^ (f.x as usize) {
                if f.z && a == 1 {
                    -h
                } else {
                    h
                }
            } else {
                0.0
            }
        };
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        let (s1, s2) = (self.n_qubits - 1 - q1, self.n_qubits - 1 - q2);
        for (idx, slot) in out.iter_mut().enumerate() {
            let (a, b) = (self.bit(idx, q1), self.bit(idx, q2));
            let base = idx & !(1 << s1) & !(1 << s2);
            let mut overlap = Complex64::new(0.0, 0.0);
            for a2 in 0..2 {
                for b2 in 0..2 {
                    let src = base | (a2 << s1) | (b2 << s2);
                    overlap += self.amps[src] * bell(a2, b2);
                }
            }
            *slot = overlap * bell(a, b);
        }
        StateVector {
            n_qubits: self.n_qubits,
            amps: out,
        }
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// State-vector simulation of one layer of the swap chain on `n_sites ≤ 3`
/// sites (`2·n_sites` qubits). Enumerates every measurement record and, for
/// each, identifies the end-pair Bell state; `min_fidelity` is the smallest
/// overlap found with the identified state.
pub fn simulate_swap_chain(n_sites: usize, j: usize, k: usize) -> (BTreeMap<SwapEvent, f64>, f64) {
    assert!(n_sites <= 3 && 1 <= j && j < k && k <= n_sites);
    let nq = 2 * n_sites;
    let mut amps = vec![Complex64::new(1.0, 0.0)];
    let pair = [
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ];
    for _ in 0..n_sites {
        amps = amps
            .iter()
            .flat_map(|a| pair.iter().map(move |p| a * p))
            .collect();
    }
    let start = StateVector { n_qubits: nq, amps };
    let a_q = |s: usize| 2 * (s - 1);
    let b_q = |s: usize| 2 * (s - 1) + 1;

    let all_frames = [
        Frame { x: false, z: false },
        Frame { x: false, z: true },
        Frame { x: true, z: false },
        Frame { x: true, z: true },
    ];
    let mut branches = vec![(Vec::<Frame>::new(), start)];
    for i in j..k {
        let mut next = Vec::new();
        for (rec, psi) in branches {
            for &f in &all_frames {
                let proj = psi.project_bell(b_q(i), a_q(i + 1), f);
                if proj.norm_sqr() > 1e-14 {
                    let mut rec = rec.clone();
                    rec.push(f);
                    next.push((rec, proj));
                }
            }
        }
        branches = next;
    }
    let mut dist = BTreeMap::new();
    let mut min_fidelity = 1.0f64;
    for (rec, psi) in branches {
        let p = psi.norm_sqr();
        let (frame, fid) = all_frames
            .iter()
            .map(|&f| (f, psi.project_bell(a_q(j), b_q(k), f).norm_sqr() / p))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four candidates");
        min_fidelity = min_fidelity.min(fid);
        *dist.entry((rec, frame)).or_insert(0.0) += p;
    }
    (dist, min_fidelity)
}

pub fn total_variation<K: Ord + Clone>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let keys: BTreeSet<&K> = p.keys().chain(q.keys()).collect();
    keys.into_iter()
        .map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs())
        .sum::<f64>()
        / 2.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WireKind {
    Classical,
    Quantum,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    /// 1-based layer.
    pub layer: usize,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub kind: String,
}

/// Wires carrying one site's question bits and answer bits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteWires {
    pub alice_inputs: Vec<usize>,
    pub bob_inputs: Vec<usize>,
    pub alice_outputs: Vec<usize>,
    pub bob_outputs: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitDag {
    pub wires: Vec<WireKind>,
    pub gates: Vec<Gate>,
    pub sites: Vec<SiteWires>,
}

impl CircuitDag {
    fn wire(&mut self, kind: WireKind) -> usize {
        self.wires.push(kind);
        self.wires.len() - 1
    }

    fn wires_n(&mut self, kind: WireKind, count: usize) -> Vec<usize> {
        (0..count).map(|_| self.wire(kind)).collect()
    }

    fn gate(&mut self, layer: usize, kind: &str, inputs: Vec<usize>, outputs: Vec<usize>) {
        self.gates.push(Gate {
            layer,
            inputs,
            outputs,
            kind: kind.to_string(),
        });
    }

    pub fn depth(&self) -> usize {
        self.gates.iter().map(|g| g.layer).max().unwrap_or(0)
    }

    pub fn max_fanin(&self) -> usize {
        self.gates.iter().map(|g| g.inputs.len()).max().unwrap_or(0)
    }

    /// Layer at which each wire becomes available (0 for sources).
    fn production_layers(&self) -> Result<Vec<usize>, ShallowError> {
        let mut layer = vec![None; self.wires.len()];
        for g in &self.gates {
            for &w in &g.outputs {
                let slot = layer.get_mut(w).ok_or(ShallowError::UnknownWire(w))?;
                if slot.is_some() {
                    return Err(ShallowError::DoubleWrite(w));
                }
                *slot = Some(g.layer);
            }
        }
        Ok(layer.into_iter().map(|l| l.unwrap_or(0)).collect())
    }

    /// Checks wire references and that every gate reads earlier wires only.
    pub fn validate(&self) -> Result<(), ShallowError> {
        let produced = self.production_layers()?;
        for (gi, g) in self.gates.iter().enumerate() {
            for &w in &g.inputs {
                let p = *produced.get(w).ok_or(ShallowError::UnknownWire(w))?;
                if p >= g.layer {
                    return Err(ShallowError::Acausal { gate: gi, wire: w });
                }
            }
        }
        for s in &self.sites {
            for &w in s
                .alice_inputs
                .iter()
                .chain(&s.bob_inputs)
                .chain(&s.alice_outputs)
                .chain(&s.bob_outputs)
            {
                if w >= self.wires.len() {
                    return Err(ShallowError::UnknownWire(w));
                }
            }
        }
        Ok(())
    }
}

/// Reader and producer tables for repeated cone queries on one circuit.
pub struct ConeIndex<'a> {
    dag: &'a CircuitDag,
    readers: Vec<Vec<usize>>,
    producers: Vec<Option<usize>>,
}

impl<'a> ConeIndex<'a> {
    pub fn new(dag: &'a CircuitDag) -> Self {
        let mut readers = vec![Vec::new(); dag.wires.len()];
        let mut producers = vec![None; dag.wires.len()];
        for (gi, g) in dag.gates.iter().enumerate() {
            for &w in &g.inputs {
                if let Some(r) = readers.get_mut(w) {
                    r.push(gi);
                }
            }
            for &w in &g.outputs {
                if let Some(p) = producers.get_mut(w) {
                    *p = Some(gi);
                }
            }
        }
        Self {
            dag,
            readers,
            producers,
        }
    }

    fn seed(&self, wires: &[usize]) -> Result<(BTreeSet<usize>, VecDeque<usize>), ShallowError> {
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for &w in wires {
            if w >= self.dag.wires.len() {
                return Err(ShallowError::UnknownWire(w));
            }
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
        Ok((seen, queue))
    }

    /// Every wire reachable from `start` (inclusive).
    pub fn forward(&self, start: &[usize]) -> Result<BTreeSet<usize>, ShallowError> {
        let (mut seen, mut queue) = self.seed(start)?;
        while let Some(w) = queue.pop_front() {
            for &g in &self.readers[w] {
                for &o in &self.dag.gates[g].outputs {
                    if seen.insert(o) {
                        queue.push_back(o);
                    }
                }
            }
        }
        Ok(seen)
    }

    /// Source wires (not produced by any gate) that `wires` depend on.
    pub fn backward(&self, wires: &[usize]) -> Result<BTreeSet<usize>, ShallowError> {
        let (mut seen, mut queue) = self.seed(wires)?;
        let mut sources = BTreeSet::new();
        while let Some(w) = queue.pop_front() {
            match self.producers[w] {
                None => {
                    sources.insert(w);
                }
                Some(g) => {
                    for &i in &self.dag.gates[g].inputs {
                        if seen.insert(i) {
                            queue.push_back(i);
                        }
                    }
                }
            }
        }
        Ok(sources)
    }
}

pub fn forward_lightcone(
    dag: &CircuitDag,
    start: &[usize],
) -> Result<BTreeSet<usize>, ShallowError> {
    ConeIndex::new(dag).forward(start)
}

pub fn backward_lightcone(
    dag: &CircuitDag,
    wires: &[usize],
) -> Result<BTreeSet<usize>, ShallowError> {
    ConeIndex::new(dag).backward(wires)
}

/// Exact fraction of site pairs `j < k` for which Alice's inputs at `j` do not
/// reach Bob's outputs at `k` and Bob's inputs at `k` do not reach Alice's
/// outputs at `j`.
pub fn lightcone_disjoint_probability(dag: &CircuitDag) -> Result<f64, ShallowError> {
    let n = dag.sites.len();
    if n < 2 {
        return Ok(1.0);
    }
    let cones = ConeIndex::new(dag);
    let mut alice_out_site = BTreeMap::new();
    let mut bob_out_site = BTreeMap::new();
    for (s, w) in dag.sites.iter().enumerate() {
        for &o in &w.alice_outputs {
            alice_out_site.insert(o, s);
        }
        for &o in &w.bob_outputs {
            bob_out_site.insert(o, s);
        }
    }
    let mut bad = BTreeSet::new();
    for (s, w) in dag.sites.iter().enumerate() {
        for o in cones.forward(&w.alice_inputs)? {
            if let Some(&t) = bob_out_site.get(&o) {
                if s < t {
                    bad.insert((s, t));
                }
            }
        }
        for o in cones.forward(&w.bob_inputs)? {
            if let Some(&t) = alice_out_site.get(&o) {
                if t < s {
                    bad.insert((t, s));
                }
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(1.0 - bad.len() as f64 / pairs)
}

/// `1 - 48 K^D / N`.
pub fn lightcone_bound(k: usize, d: usize, n_sites: usize) -> f64 {
    1.0 - 48.0 * (k as f64).powi(d as i32) / n_sites as f64
}

/// Smallest depth compatible with success above `(1 + p)/2`:
/// `(ln N + ln((1 - p)/96)) / ln K`.
pub fn depth_lower_bound(n_sites: f64, p_clifford: f64, k: usize) -> f64 {
    (n_sites.ln() + ((1.0 - p_clifford) / 96.0).ln()) / (k as f64).ln()
}

/// Site count above which [`depth_lower_bound`] is positive: `96 / (1 - p)`.
pub fn depth_bound_threshold(p_clifford: f64) -> f64 {
    96.0 / (1.0 - p_clifford)
}

fn bits_for(count: u64) -> usize {
    (u64::BITS - count.leading_zeros()) as usize
}

/// Wiring of the constant-depth strategy for `n_sites` sites:
/// layer 1 prepares EPR pairs, layer 2 performs the flagged Bell
/// measurements, layer 3 applies syndrome-controlled corrections and layer 4
/// measures the game observables.
pub fn build_strategy_dag(n_sites: usize, game: &GameBcs) -> CircuitDag {
    use WireKind::{Classical as C, Quantum as Q};
    assert!(n_sites >= 2, "need at least two sites");
    let alice_bits = bits_for(game.bcs.n_constraints() as u64);
    let bob_bits = bits_for(game.bcs.n_vars() as u64);
    let mut dag = CircuitDag::default();
    let mut qa = vec![[0usize; LAYERS]; n_sites];
    let mut qb = vec![[0usize; LAYERS]; n_sites];
    let mut flags = Vec::with_capacity(n_sites);
    for s in 0..n_sites {
        let question = dag.wires_n(C, alice_bits);
        let syndrome = dag.wires_n(C, 2 * LAYERS);
        let bob_question = dag.wires_n(C, bob_bits);
        flags.push(dag.wire(C));
        dag.sites.push(SiteWires {
            alice_inputs: question.into_iter().chain(syndrome).collect(),
            bob_inputs: bob_question,
            ..SiteWires::default()
        });
        for l in 0..LAYERS {
            let (a0, b0) = (dag.wire(Q), dag.wire(Q));
            let (a1, b1) = (dag.wire(Q), dag.wire(Q));
            dag.gate(1, "epr", vec![a0, b0], vec![a1, b1]);
            qa[s][l] = a1;
            qb[s][l] = b1;
        }
    }
    for s in 0..n_sites - 1 {
        for l in 0..LAYERS {
            let (rb, ra) = (dag.wire(C), dag.wire(C));
            let (b, a) = (dag.wire(Q), dag.wire(Q));
            dag.gate(
                2,
                "bsm",
                vec![flags[s], qb[s][l], qa[s + 1][l]],
                vec![rb, ra, b, a],
            );
            qb[s][l] = b;
            qa[s + 1][l] = a;
        }
    }
    for (s, qa_s) in qa.iter_mut().enumerate() {
        let syndrome = dag.sites[s].alice_inputs[alice_bits..].to_vec();
        for (l, q) in qa_s.iter_mut().enumerate() {
            let out = dag.wire(Q);
            let inputs = vec![syndrome[2 * l], syndrome[2 * l + 1], *q];
            dag.gate(3, "correct", inputs, vec![out]);
            *q = out;
        }
    }
    for s in 0..n_sites {
        let ra = dag.wires_n(C, 3);
        let mut inputs = dag.sites[s].alice_inputs[..alice_bits].to_vec();
        inputs.extend(qa[s]);
        dag.gate(4, "measure-alice", inputs, ra.clone());
        let rb = dag.wires_n(C, 3);
        let mut inputs = dag.sites[s].bob_inputs.clone();
        inputs.extend(qb[s]);
        dag.gate(4, "measure-bob", inputs, rb.clone());
        dag.sites[s].alice_outputs = ra;
        dag.sites[s].bob_outputs = rb;
    }
    dag
}

/// Random layered circuit on a line: each layer, every site runs one gate of
/// fan-in at most `k` reading the previous values of sites within distance
/// `reach`. Site `s` has one Alice and one Bob input and three output bits
/// of each kind taken from its final wires.
pub fn random_local_dag<R: Rng + ?Sized>(
    n_sites: usize,
    k: usize,
    depth: usize,
    reach: usize,
    rng: &mut R,
) -> CircuitDag {
    use WireKind::Classical as C;
    assert!(k >= 1 && depth >= 1);
    let width = 2;
    let mut dag = CircuitDag::default();
    let mut current: Vec<usize> = Vec::with_capacity(n_sites * width);
    for _ in 0..n_sites {
        let a = dag.wire(C);
        let b = dag.wire(C);
        dag.sites.push(SiteWires {
            alice_inputs: vec![a],
            bob_inputs: vec![b],
            ..SiteWires::default()
        });
        current.extend([a, b]);
    }
    let slots = current.len();
    for layer in 1..=depth {
        let mut next = Vec::with_capacity(slots);
        for p in 0..slots {
            let lo = p.saturating_sub(reach * width);
            let hi = (p + reach * width).min(slots - 1);
            let fanin = rng.gen_range(1..=k);
            let mut inputs = BTreeSet::new();
            inputs.insert(current[p]);
            while inputs.len() < fanin.min(hi - lo + 1) {
                inputs.insert(current[rng.gen_range(lo..=hi)]);
            }
            let out = dag.wire(C);
            dag.gate(layer, "random", inputs.into_iter().collect(), vec![out]);
            next.push(out);
        }
        current = next;
    }
    for s in 0..n_sites {
        let (a, b) = (current[width * s], current[width * s + 1]);
        let ra = dag.wires_n(C, 3);
        let rb = dag.wires_n(C, 3);
        dag.gate(depth + 1, "readout", vec![a], ra.clone());
        dag.gate(depth + 1, "readout", vec![b], rb.clone());
        dag.sites[s].alice_outputs = ra;
        dag.sites[s].bob_outputs = rb;
    }
    dag
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::permutation_solution;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn game8() -> (GameBcs, OperatorSolution) {
        let g = GameBcs::build(8, true).unwrap();
        let s = permutation_solution(&g).unwrap();
        (g, s)
    }

    fn inst(n_sites: usize, j: usize, k: usize) -> RelationInstance {
        RelationInstance {
            n_sites,
            n: 8,
            j,
            k,
            alpha: 0,
            beta: 0,
        }
    }

    #[test]
    fn no_error_transcript() {
        let t = run_round1_with(&inst(5, 2, 4), |_, _| Frame::default()).unwrap();
        assert!(t.frame.iter().all(Frame::is_identity));
        let s = compute_syndrome(&t, 2, 4).unwrap();
        assert!(s.all_plus());
        let st = framed_state(&t.frame);
        assert!((SharedState::phi_plus(8).inner(&st).norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_flip_syndrome() {
        let i = inst(6, 2, 5);
        let mut t = run_round1_with(&i, |_, _| Frame::default()).unwrap();
        t.r_b[2 - 1][1] = -1;
        let s = compute_syndrome(&t, 2, 5).unwrap();
        assert_eq!(s.p_b, [1, -1, 1]);
        assert_eq!(s.p_a, [1, 1, 1]);
        assert!(compute_syndrome(&t, 1, 5).is_err());
    }

    #[test]
    fn syndrome_matches_direct_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.gen_range(2..40);
            let j = rng.gen_range(1..n);
            let k = rng.gen_range(j + 1..=n);
            let t = run_round1(&inst(n, j, k), &mut rng).unwrap();
            let s = compute_syndrome(&t, j, k).unwrap();
            for l in 0..LAYERS {
                let mut pa = 1;
                let mut pb = 1;
                for i in 1..=n {
                    if i > j && i <= k {
                        pa *= t.r_a[i - 1][l];
                    }
                    if i >= j && i < k {
                        pb *= t.r_b[i - 1][l];
                    }
                }
                assert_eq!((s.p_a[l], s.p_b[l]), (pa, pb));
                assert_eq!(
                    t.frame[l],
                    Frame {
                        x: pb < 0,
                        z: pa < 0
                    }
                );
            }
        }
    }

    #[test]
    fn swap_chain_oracle_matches_analytic() {
        for n in 2..=3 {
            for j in 1..n {
                for k in j + 1..=n {
                    let (sim, fid) = simulate_swap_chain(n, j, k);
                    assert!(fid > 1.0 - 1e-12);
                    assert!(total_variation(&sim, &analytic_swap_distribution(j, k)) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn corrections_restore_phi_plus() {
        for code in 0..64u32 {
            let frame: [Frame; 3] = std::array::from_fn(|l| Frame {
                x: (code >> (2 * l)) & 1 == 1,
                z: (code >> (2 * l + 1)) & 1 == 1,
            });
            let st = framed_state(&frame);
            let c = layered(frame.iter().map(|f| correction(sign(f.z), sign(f.x))));
            let fixed = st.apply(Side::A, &c);
            assert!((SharedState::phi_plus(8).inner(&fixed).norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_strategy_satisfies_relation() {
        let (g, sol) = game8();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 0..2000 {
            let beta = if t % 2 == 0 {
                BetaChoice::InConstraint
            } else {
                BetaChoice::Any
            };
            let i = sample_instance(50, &g, beta, &mut rng);
            let tr = run_round1(&i, &mut rng).unwrap();
            let out = run_round2(&i, &tr, &g, &sol, Round2Options::default(), &mut rng).unwrap();
            assert!(check_relation(&i, &out, &g).unwrap());
        }
    }

    #[test]
    fn skipped_correction_violates_sometimes() {
        let (g, sol) = game8();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut fails = 0;
        for _ in 0..2000 {
            let i = sample_instance(20, &g, BetaChoice::InConstraint, &mut rng);
            let tr = run_round1(&i, &mut rng).unwrap();
            let out = run_round2(
                &i,
                &tr,
                &g,
                &sol,
                Round2Options { correct: false },
                &mut rng,
            )
            .unwrap();
            if tr.frame.iter().all(Frame::is_identity) {
                assert!(check_relation(&i, &out, &g).unwrap());
            } else if !check_relation(&i, &out, &g).unwrap() {
                fails += 1;
            }
        }
        assert!(fails > 0);
    }

    #[test]
    fn relation_checks() {
        let (g, _) = game8();
        // Constraint 0 is a1 a2 y1_2 = 1.
        let i = RelationInstance {
            n_sites: 4,
            n: 8,
            j: 1,
            k: 2,
            alpha: 0,
            beta: g.a(2),
        };
        let ok = Round2Outputs {
            r_a: [-1, -1, 1],
            r_b: [-1, 1, 1],
        };
        assert!(check_relation(&i, &ok, &g).unwrap());
        let mismatch = Round2Outputs {
            r_b: [1, 1, 1],
            ..ok
        };
        assert!(!check_relation(&i, &mismatch, &g).unwrap());
        let broken = Round2Outputs {
            r_a: [-1, 1, 1],
            r_b: [1, 1, 1],
        };
        assert!(!check_relation(&i, &broken, &g).unwrap());
        let outside = RelationInstance { beta: g.a(7), ..i };
        assert!(check_relation(&outside, &mismatch, &g).unwrap());
        assert!(!check_relation(&outside, &broken, &g).unwrap());
        let unknown = RelationInstance { alpha: 99_999, ..i };
        assert!(check_relation(&unknown, &ok, &g).is_err());
    }

    #[test]
    fn unmodified_product_constraint_rejected() {
        let g = GameBcs::build(8, false).unwrap();
        let sol = permutation_solution(&g).unwrap();
        let alpha = g.bcs.n_constraints() - 1;
        let i = RelationInstance {
            n_sites: 3,
            n: 8,
            j: 1,
            k: 3,
            alpha,
            beta: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tr = run_round1(&i, &mut rng).unwrap();
        assert!(matches!(
            run_round2(&i, &tr, &g, &sol, Round2Options::default(), &mut rng),
            Err(ShallowError::TooManyVariables { count: 8, .. })
        ));
    }

    #[test]
    fn forced_clean_sampling_is_case1() {
        let (g, sol) = game8();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let i = sample_instance(10, &g, BetaChoice::InConstraint, &mut rng);
            let tr = run_round1_with(&i, |_, _| Frame::default()).unwrap();
            let trial = sampling_from_transcript(&i, &tr, &g, &sol, &mut rng).unwrap();
            assert_eq!(trial.case, SamplingCase::Case1);
        }
    }

    #[test]
    fn strategy_dag_shape() {
        let (g, _) = game8();
        let mut depths = BTreeSet::new();
        for n in [2, 4, 64] {
            let dag = build_strategy_dag(n, &g);
            dag.validate().unwrap();
            assert_eq!(dag.max_fanin(), 14);
            depths.insert(dag.depth());
            let fanin = |kind: &str| {
                dag.gates
                    .iter()
                    .filter(|g| g.kind == kind)
                    .map(|g| g.inputs.len())
                    .max()
            };
            assert_eq!(fanin("epr"), Some(2));
            assert_eq!(fanin("bsm"), Some(3));
            assert_eq!(fanin("correct"), Some(3));
            assert_eq!(fanin("measure-alice"), Some(14));
            assert_eq!(lightcone_disjoint_probability(&dag).unwrap(), 1.0);
        }
        assert_eq!(depths.len(), 1);
    }

    #[test]
    fn strategy_cone_excludes_remote_question() {
        let (g, _) = game8();
        let dag = build_strategy_dag(8, &g);
        let cone = backward_lightcone(&dag, &dag.sites[6].bob_outputs).unwrap();
        assert!(dag.sites[2].alice_inputs.iter().all(|w| !cone.contains(w)));
        assert!(dag.sites[6].bob_inputs.iter().all(|w| cone.contains(w)));
    }

    #[test]
    fn small_dags() {
        let mut single = CircuitDag::default();
        let a = single.wire(WireKind::Classical);
        let b = single.wire(WireKind::Classical);
        let o = single.wire(WireKind::Classical);
        single.gate(1, "and", vec![a, b], vec![o]);
        assert!(backward_lightcone(&single, &[o]).unwrap().len() <= 2);
        assert_eq!(
            forward_lightcone(&single, &[a]).unwrap(),
            BTreeSet::from([a, o])
        );

        let mut chain = CircuitDag::default();
        let mut layer: Vec<usize> = (0..8).map(|_| chain.wire(WireKind::Classical)).collect();
        for d in 1..=3 {
            let mut next = Vec::new();
            for pair in layer.chunks(2) {
                let w = chain.wire(WireKind::Classical);
                chain.gate(d, "xor", pair.to_vec(), vec![w]);
                next.push(w);
            }
            layer = next;
        }
        chain.validate().unwrap();
        assert_eq!(chain.depth(), 3);
        assert_eq!(backward_lightcone(&chain, &layer).unwrap().len(), 8);
        assert!(backward_lightcone(&chain, &[999]).is_err());
    }

    #[test]
    fn disconnected_and_global_dags() {
        let mut free = CircuitDag::default();
        for _ in 0..10 {
            let w: Vec<usize> = (0..4).map(|_| free.wire(WireKind::Classical)).collect();
            free.sites.push(SiteWires {
                alice_inputs: vec![w[0]],
                bob_inputs: vec![w[1]],
                alice_outputs: vec![w[2]],
                bob_outputs: vec![w[3]],
            });
        }
        assert_eq!(lightcone_disjoint_probability(&free).unwrap(), 1.0);

        let mut global = CircuitDag::default();
        let mut ins = Vec::new();
        for _ in 0..10 {
            let a = global.wire(WireKind::Classical);
            let b = global.wire(WireKind::Classical);
            ins.extend([a, b]);
            global.sites.push(SiteWires {
                alice_inputs: vec![a],
                bob_inputs: vec![b],
                ..SiteWires::default()
            });
        }
        let outs = global.wires_n(WireKind::Classical, 20);
        global.gate(1, "all", ins, outs.clone());
        for (s, w) in global.sites.iter_mut().enumerate() {
            w.alice_outputs = vec![outs[2 * s]];
            w.bob_outputs = vec![outs[2 * s + 1]];
        }
        assert_eq!(lightcone_disjoint_probability(&global).unwrap(), 0.0);
        assert!(lightcone_bound(global.max_fanin(), global.depth(), 10) < 0.0);
    }

    #[test]
    fn random_dags_respect_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..10 {
            let (n, k, d) = (
                rng.gen_range(20..200),
                rng.gen_range(2..4),
                rng.gen_range(1..4),
            );
            let dag = random_local_dag(n, k, d, 2, &mut rng);
            dag.validate().unwrap();
            let depth = dag.depth();
            let kk = dag.max_fanin();
            for s in &dag.sites {
                let o: Vec<usize> = s
                    .alice_outputs
                    .iter()
                    .chain(&s.bob_outputs)
                    .copied()
                    .collect();
                let cone = backward_lightcone(&dag, &o).unwrap();
                assert!(cone.len() <= o.len() * kk.pow(depth as u32));
            }
            let p = lightcone_disjoint_probability(&dag).unwrap();
            assert!(p >= lightcone_bound(kk, depth, n));
        }
    }

    #[test]
    fn depth_bound_ingredients() {
        let p = crate::game::clifford_bound(8).unwrap();
        let threshold = depth_bound_threshold(p);
        assert!((threshold - 600_192.0).abs() < 1e-6);
        assert!(depth_lower_bound(threshold * 0.99, p, 14) < 0.0);
        assert!(depth_lower_bound(threshold * 1.01, p, 14) > 0.0);
        assert!(depth_lower_bound(1e9, p, 14) > depth_lower_bound(1e8, p, 14));
    }

    #[test]
    fn dag_validation_errors() {
        let mut bad = CircuitDag::default();
        let a = bad.wire(WireKind::Classical);
        let b = bad.wire(WireKind::Classical);
        bad.gate(1, "g", vec![a], vec![b]);
        bad.gate(1, "h", vec![b], vec![a]);
        assert!(bad.validate().is_err());
        let mut dangling = CircuitDag::default();
        dangling.gate(1, "g", vec![3], vec![]);
        assert_eq!(dangling.validate(), Err(ShallowError::UnknownWire(3)));
    }
}
