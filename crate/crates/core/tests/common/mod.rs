//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use magic_bcs::{Bcs, GameBcs, PauliSolution, PauliString};
use proptest::prelude::*;

/// Reduced row echelon form over GF(2), written from scratch for the tests.
struct Echelon {
    /// All rows, the first `pivots.len()` of them carrying the pivots.
    rows: Vec<Vec<bool>>,
    pivots: Vec<usize>,
}

fn echelon(mut rows: Vec<Vec<bool>>, n_cols: usize) -> Echelon {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n_cols {
        let Some(p) = (r..rows.len()).find(|&i| rows[i][c]) else {
            continue;
        };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && rows[i][c] {
                let pivot_row = rows[r].clone();
                for (a, b) in rows[i].iter_mut().zip(pivot_row) {
                    *a ^= b;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    Echelon { rows, pivots }
}

/// Is `A σ = b` solvable? Brute force for few unknowns, elimination otherwise.
fn signs_feasible(rows: &[(Vec<usize>, bool)], n: usize) -> bool {
    if n <= 16 {
        return (0u32..1 << n).any(|s| {
            rows.iter().all(|(vars, rhs)| {
                vars.iter().fold(false, |acc, &v| acc ^ (s >> v & 1 == 1)) == *rhs
            })
        });
    }
    let dense: Vec<Vec<bool>> = rows
        .iter()
        .map(|(vars, rhs)| {
            let mut row = vec![false; n + 1];
            for &v in vars {
                row[v] ^= true;
            }
            row[n] = *rhs;
            row
        })
        .collect();
    let e = echelon(dense, n);
    e.rows
        .iter()
        .all(|row| row[..n].iter().any(|&b| b) || !row[n])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleVerdict {
    pub solvable: bool,
    /// Commutator unknowns plus sign unknowns.
    pub unknowns: usize,
}

/// Decides Pauli solvability by enumerating every commutation pattern among
/// the free variables and every sign of the dependent ones, checking the
/// constraints with literal Pauli products. Returns `None` above
/// `max_pairs` commutation unknowns or `max_unknowns` unknowns in total.
pub fn pauli_oracle(bcs: &Bcs, max_pairs: usize, max_unknowns: usize) -> Option<OracleVerdict> {
    let n = bcs.n_vars();
    let rows: Vec<Vec<bool>> = bcs
        .constraints
        .iter()
        .map(|c| {
            let mut row = vec![false; n];
            for &v in &c.vars {
                row[v] ^= true;
            }
            row
        })
        .collect();
    let e = echelon(rows, n);
    let relevant: Vec<usize> = (0..n)
        .filter(|c| !e.pivots.contains(c) && e.rows.iter().any(|row| row[*c]))
        .collect();
    let deps: Vec<(usize, Vec<usize>)> = e
        .pivots
        .iter()
        .zip(&e.rows)
        .map(|(&p, row)| (p, relevant.iter().copied().filter(|&f| row[f]).collect()))
        .collect();
    let pairs: Vec<(usize, usize)> = (0..relevant.len())
        .flat_map(|i| (i + 1..relevant.len()).map(move |j| (i, j)))
        .collect();
    let unknowns = pairs.len() + deps.len();
    if pairs.len() > max_pairs || unknowns > max_unknowns {
        return None;
    }
    let mut dep_slot = vec![None; n];
    for (slot, (p, _)) in deps.iter().enumerate() {
        dep_slot[*p] = Some(slot);
    }
    for pattern in 0u64..1 << pairs.len() {
        let anti: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(b, _)| pattern >> b & 1 == 1)
            .map(|(_, &p)| p)
            .collect();
        let q = anti.len();
        let mut strings = vec![PauliString::identity(q); n];
        for (qubit, &(k, l)) in anti.iter().enumerate() {
            let xk = PauliString::parse(&letter_at(q, qubit, 'X')).unwrap();
            let zl = PauliString::parse(&letter_at(q, qubit, 'Z')).unwrap();
            strings[relevant[k]] = strings[relevant[k]].multiply(&xk).unwrap();
            strings[relevant[l]] = strings[relevant[l]].multiply(&zl).unwrap();
        }
        let mut hermitian = true;
        for (p, support) in &deps {
            let mut s = PauliString::identity(q);
            for &f in support {
                s = s.multiply(&strings[f]).unwrap();
            }
            hermitian &= s.is_hermitian();
            strings[*p] = s;
        }
        if !hermitian || !commutation_holds(bcs, &strings) {
            continue;
        }
        let mut sign_rows = Vec::new();
        let mut ok = true;
        for c in &bcs.constraints {
            let mut prod = PauliString::identity(q);
            for &v in &c.vars {
                prod = prod.multiply(&strings[v]).unwrap();
            }
            match (prod.is_scalar(), prod.sign()) {
                (true, Some(s)) => {
                    let vars = c.vars.iter().filter_map(|&v| dep_slot[v]).collect();
                    sign_rows.push((vars, s != c.rhs));
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && signs_feasible(&sign_rows, deps.len()) {
            return Some(OracleVerdict {
                solvable: true,
                unknowns,
            });
        }
    }
    Some(OracleVerdict {
        solvable: false,
        unknowns,
    })
}

fn letter_at(n: usize, q: usize, letter: char) -> String {
    if n == 0 {
        return "+".into();
    }
    (0..n).map(|i| if i == q { letter } else { 'I' }).collect()
}

fn commutation_holds(bcs: &Bcs, strings: &[PauliString]) -> bool {
    bcs.constraints.iter().all(|c| {
        let m = c.members();
        m.iter().enumerate().all(|(i, &u)| {
            m[i + 1..]
                .iter()
                .all(|&v| strings[u].commutes(&strings[v]).unwrap())
        })
    })
}

/// A known two-qubit assignment for the `n = 4` game.
pub fn n4_two_qubit_assignment(game: &GameBcs) -> PauliSolution {
    let entries = [
        ("a1", "-ZZ"),
        ("a2", "II"),
        ("a3", "ZI"),
        ("a4", "IZ"),
        ("x1_2", "-YY"),
        ("x1_3", "XI"),
        ("x1_4", "IX"),
        ("x2_3", "II"),
        ("x2_4", "II"),
        ("x3_4", "ZZ"),
        ("y1_2", "-ZZ"),
        ("y1_3", "-IZ"),
        ("y1_4", "-ZI"),
        ("y2_3", "ZI"),
        ("y2_4", "IZ"),
        ("y3_4", "ZZ"),
        ("z1_2", "-XX"),
        ("z1_3", "-XZ"),
        ("z1_4", "-ZX"),
        ("z2_3", "ZI"),
        ("z2_4", "IZ"),
        ("z3_4", "II"),
        ("b1_2|3_4", "XX"),
        ("b1_3|2_4", "XI"),
        ("b1_4|2_3", "IX"),
        ("c1_2|3_4", "-YY"),
        ("c1_3|2_4", "XZ"),
        ("c1_4|2_3", "ZX"),
        ("c3_4|1_2", "YY"),
        ("c2_4|1_3", "-XZ"),
        ("c2_3|1_4", "-ZX"),
    ];
    assert_eq!(entries.len(), game.bcs.n_vars());
    let mut assignment = vec![PauliString::identity(2); game.bcs.n_vars()];
    for (name, text) in entries {
        assignment[game.index(name).unwrap()] = PauliString::parse(text).unwrap();
    }
    PauliSolution {
        qubits: 2,
        assignment,
    }
}

/// Random systems with at most 8 variables and 8 constraints.
pub fn small_bcs() -> impl Strategy<Value = Bcs> {
    (1usize..=8).prop_flat_map(|nv| {
        let constraint = (
            prop::collection::vec(0..nv, 0..=4),
            prop_oneof![Just(1i8), Just(-1i8)],
        );
        prop::collection::vec(constraint, 1..=8).prop_map(move |cs| {
            let refs: Vec<(&[usize], i8)> = cs.iter().map(|(v, r)| (v.as_slice(), *r)).collect();
            Bcs::from_indices(nv, &refs).unwrap()
        })
    })
}
