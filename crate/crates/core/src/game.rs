//! The complete-graph game family.
//!
//! Vertices are `1..=n`. Every vertex carries `a_v`, every edge `x, y, z`,
//! and every pair of disjoint edges one symmetric `b` and two oriented `c`
//! variables. The modified game replaces the `n`-ary product constraint with a
//! chain of 3-variable constraints through fresh variables `a1..k`.

use crate::bcs::{Bcs, Constraint};
use rand::Rng;
use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("game size must be at least 4, got {0}")]
    TooSmall(usize),
    #[error("the Clifford bound applies to even n >= 6 only, got {0}")]
    BoundInapplicable(usize),
    #[error("unknown variable {0:?}")]
    UnknownName(String),
}

pub type Edge = (usize, usize);

fn edge(u: usize, v: usize) -> Edge {
    (u.min(v), u.max(v))
}

fn edge_name((u, v): Edge) -> String {
    format!("{u}_{v}")
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuestionCounts {
    pub alice: u64,
    pub bob: u64,
    pub modified_alice: u64,
}

pub fn count_questions(n: usize) -> Result<QuestionCounts, GameError> {
    if n < 4 {
        return Err(GameError::TooSmall(n));
    }
    let (e, q) = (binomial(n, 2), binomial(n, 4));
    Ok(QuestionCounts {
        alice: 2 * e + 14 * q + 1,
        bob: n as u64 + 3 * e + 9 * q,
        modified_alice: 2 * e + 14 * q + n as u64 - 2,
    })
}

/// Denominator `D` of the Clifford winning-probability cap `1 - 1/D`.
pub fn clifford_bound_denominator(n: usize) -> Result<u64, GameError> {
    if n < 6 || n % 2 == 1 {
        return Err(GameError::BoundInapplicable(n));
    }
    Ok(6 * count_questions(n)?.modified_alice)
}

pub fn clifford_bound(n: usize) -> Result<f64, GameError> {
    Ok(1.0 - 1.0 / clifford_bound_denominator(n)? as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GameClass {
    Classical,
    CliffordOnly,
    MagicRequired,
}

pub fn classify(n: usize) -> Result<GameClass, GameError> {
    match n {
        0..=3 => Err(GameError::TooSmall(n)),
        4 => Ok(GameClass::CliffordOnly),
        _ if n % 2 == 1 => Ok(GameClass::Classical),
        _ => Ok(GameClass::MagicRequired),
    }
}

#[derive(Clone, Debug)]
pub struct GameBcs {
    pub n: usize,
    pub modified: bool,
    pub bcs: Bcs,
    pub var_index: BTreeMap<String, usize>,
}

/// The three ways to split a sorted 4-set into two edges.
fn partitions([p, q, r, s]: [usize; 4]) -> [(Edge, Edge); 3] {
    [((p, q), (r, s)), ((p, r), (q, s)), ((p, s), (q, r))]
}

fn four_sets(n: usize) -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for p in 1..=n {
        for q in p + 1..=n {
            for r in q + 1..=n {
                for s in r + 1..=n {
                    out.push([p, q, r, s]);
                }
            }
        }
    }
    out
}

pub fn a_name(v: usize) -> String {
    format!("a{v}")
}

pub fn x_name(u: usize, v: usize) -> String {
    format!("x{}", edge_name(edge(u, v)))
}

pub fn y_name(u: usize, v: usize) -> String {
    format!("y{}", edge_name(edge(u, v)))
}

pub fn z_name(u: usize, v: usize) -> String {
    format!("z{}", edge_name(edge(u, v)))
}

/// `b_{uv|st}`; invariant under swapping the edges and endpoints within one.
pub fn b_name(e: Edge, f: Edge) -> String {
    let (e, f) = (edge(e.0, e.1), edge(f.0, f.1));
    let (e, f) = if e <= f { (e, f) } else { (f, e) };
    format!("b{}|{}", edge_name(e), edge_name(f))
}

/// `c_{uv|st}`; invariant under swapping endpoints within an edge only.
pub fn c_name(e: Edge, f: Edge) -> String {
    format!(
        "c{}|{}",
        edge_name(edge(e.0, e.1)),
        edge_name(edge(f.0, f.1))
    )
}

/// Chain variable standing for the product `a_1 ⋯ a_k`.
pub fn chain_name(k: usize) -> String {
    format!("a1..{k}")
}

impl GameBcs {
    pub fn build(n: usize, modified: bool) -> Result<Self, GameError> {
        if n < 4 {
            return Err(GameError::TooSmall(n));
        }
        let edges: Vec<Edge> = (1..=n)
            .flat_map(|u| (u + 1..=n).map(move |v| (u, v)))
            .collect();
        let sets = four_sets(n);

        let mut names: Vec<String> = (1..=n).map(a_name).collect();
        for prefix in ["x", "y", "z"] {
            names.extend(edges.iter().map(|&e| format!("{prefix}{}", edge_name(e))));
        }
        for s in &sets {
            names.extend(partitions(*s).iter().map(|&(e, f)| b_name(e, f)));
        }
        for s in &sets {
            let parts = partitions(*s);
            names.extend(parts.iter().map(|&(e, f)| c_name(e, f)));
            names.extend(parts.iter().map(|&(e, f)| c_name(f, e)));
        }
        if modified {
            names.extend((2..=n - 2).map(chain_name));
        }
        let var_index: BTreeMap<String, usize> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let ix = |s: String| var_index[&s];

        let mut cs = Vec::new();
        for &(u, v) in &edges {
            cs.push(Constraint::new(
                vec![ix(a_name(u)), ix(a_name(v)), ix(y_name(u, v))],
                1,
            ));
        }
        for &(u, v) in &edges {
            cs.push(Constraint::new(
                vec![ix(x_name(u, v)), ix(y_name(u, v)), ix(z_name(u, v))],
                1,
            ));
        }
        for s in &sets {
            for (e, f) in partitions(*s) {
                cs.push(Constraint::new(
                    vec![ix(x_name(e.0, e.1)), ix(x_name(f.0, f.1)), ix(b_name(e, f))],
                    1,
                ));
            }
        }
        for s in &sets {
            for (e, f) in partitions(*s) {
                for (g, h) in [(e, f), (f, e)] {
                    cs.push(Constraint::new(
                        vec![ix(x_name(g.0, g.1)), ix(z_name(h.0, h.1)), ix(c_name(g, h))],
                        1,
                    ));
                }
            }
        }
        for s in &sets {
            let vars = partitions(*s)
                .iter()
                .map(|&(e, f)| ix(b_name(e, f)))
                .collect();
            cs.push(Constraint::new(vars, 1));
        }
        for s in &sets {
            // One constraint per apex t: the first edges form the triangle on
            // the other three vertices, each paired with its complement.
            for &t in s.iter().rev() {
                let tri: Vec<usize> = s.iter().copied().filter(|&w| w != t).collect();
                let (u, v, w) = (tri[0], tri[1], tri[2]);
                let vars = [((u, v), (w, t)), ((v, w), (u, t)), ((w, u), (v, t))]
                    .iter()
                    .map(|&(e, f)| ix(c_name(e, f)))
                    .collect();
                cs.push(Constraint::new(vars, 1));
            }
        }
        if modified {
            let a = |v: usize| ix(a_name(v));
            let link = |k: usize| if k == 1 { a(1) } else { ix(chain_name(k)) };
            for k in 2..=n - 2 {
                cs.push(Constraint::new(
                    vec![link(k - 1), a(k), ix(chain_name(k))],
                    1,
                ));
            }
            cs.push(Constraint::new(vec![link(n - 2), a(n - 1), a(n)], -1));
        } else {
            cs.push(Constraint::new(
                (1..=n).map(|v| ix(a_name(v))).collect(),
                -1,
            ));
        }

        let bcs = Bcs::new(names, cs).expect("indices come from the name table");
        Ok(Self {
            n,
            modified,
            bcs,
            var_index,
        })
    }

    pub fn index(&self, name: &str) -> Result<usize, GameError> {
        self.var_index
            .get(name)
            .copied()
            .ok_or_else(|| GameError::UnknownName(name.to_string()))
    }

    pub fn a(&self, v: usize) -> usize {
        self.var_index[&a_name(v)]
    }

    pub fn x(&self, u: usize, v: usize) -> usize {
        self.var_index[&x_name(u, v)]
    }

    pub fn y(&self, u: usize, v: usize) -> usize {
        self.var_index[&y_name(u, v)]
    }

    pub fn z(&self, u: usize, v: usize) -> usize {
        self.var_index[&z_name(u, v)]
    }

    pub fn b(&self, e: Edge, f: Edge) -> usize {
        self.var_index[&b_name(e, f)]
    }

    pub fn c(&self, e: Edge, f: Edge) -> usize {
        self.var_index[&c_name(e, f)]
    }

    /// Name-to-index map as pretty JSON.
    pub fn names_json(&self) -> String {
        serde_json::to_string_pretty(&self.var_index).expect("string map serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuestionSpace {
    pub alice_questions: Vec<usize>,
    pub bob_questions: Vec<usize>,
    /// `(constraint, variable)` with the variable in the constraint.
    pub pairs: Vec<(usize, usize)>,
}

impl QuestionSpace {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (usize, usize) {
        self.pairs[rng.gen_range(0..self.pairs.len())]
    }
}

pub fn enumerate_questions(game: &GameBcs) -> QuestionSpace {
    let bcs = &game.bcs;
    let pairs = bcs
        .constraints
        .iter()
        .enumerate()
        .flat_map(|(a, c)| c.members().into_iter().map(move |b| (a, b)))
        .collect();
    QuestionSpace {
        alice_questions: (0..bcs.n_constraints()).collect(),
        bob_questions: (0..bcs.n_vars()).collect(),
        pairs,
    }
}

pub fn sample_question<R: Rng + ?Sized>(game: &GameBcs, rng: &mut R) -> (usize, usize) {
    enumerate_questions(game).sample(rng)
}
