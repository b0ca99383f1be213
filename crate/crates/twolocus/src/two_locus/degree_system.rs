//! Ascending-degree solving machinery.
//!
//! The recursion is not strictly recursive: joining an `a`-gamete with a
//! `b`-gamete and splitting a typed gamete both preserve the degree
//! `a + b + 2c`. States of one degree therefore form coupled linear systems,
//! solvable once every lower degree is known. Within a degree the coupling
//! graph splits into small connected components (the same-degree moves fix
//! each class's marginal count `a_i + c_{i.}` and `b_j + c_{.j}`), and each
//! component is assembled and solved on its own.
//!
//! The driver is generic over the state type so the allele-count recursion
//! reuses it unchanged.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::hash::Hash;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::numerics::Scalar;

/// One assembled same-degree linear system over a set of coupled states.
#[derive(Debug, Clone)]
pub struct DegreeSystem<S, St = crate::two_locus::TwoLocusConfig> {
    pub degree: usize,
    pub states: Vec<St>,
    pub matrix: Vec<Vec<S>>,
    pub rhs: Vec<S>,
}

/// The recursion seen as per-state terms over canonical states.
pub(crate) trait RecursionSystem {
    type State: Clone + Eq + Hash + Ord;
    type Sc: Scalar;

    fn degree(&self, state: &Self::State) -> usize;

    /// States whose value is fixed by boundary or initial conditions.
    fn known_value(&self, state: &Self::State) -> Option<Self::Sc>;

    /// Diagonal coefficient and right-hand-side terms, targets canonical.
    fn terms(&self, state: &Self::State) -> StateTerms<Self::Sc, Self::State>;
}

pub(crate) struct StateTerms<S, St> {
    pub diagonal: S,
    pub same_degree: Vec<(S, St)>,
    pub lower_degree: Vec<(S, St)>,
}

/// Solve every state reachable from `target` that is not already memoized,
/// inserting results into `memo`. `budget` bounds the total number of states
/// tracked by the memo.
pub(crate) fn solve_reachable<R: RecursionSystem>(
    system: &R,
    memo: &mut HashMap<R::State, R::Sc>,
    target: R::State,
    budget: usize,
) -> Result<()> {
    // Closure over unresolved states.
    let mut pending: HashSet<R::State> = HashSet::new();
    let mut stack = vec![target];
    while let Some(state) = stack.pop() {
        if memo.contains_key(&state) || pending.contains(&state) {
            continue;
        }
        if let Some(value) = system.known_value(&state) {
            memo.insert(state, value);
            continue;
        }
        let terms = system.terms(&state);
        pending.insert(state);
        if memo.len() + pending.len() > budget {
            return Err(Error::Capability(format!(
                "state budget of {budget} exceeded ({} states reached)",
                memo.len() + pending.len()
            )));
        }
        for (_, t) in terms.same_degree.into_iter().chain(terms.lower_degree) {
            if !memo.contains_key(&t) && !pending.contains(&t) {
                stack.push(t);
            }
        }
    }

    let mut by_degree: BTreeMap<usize, Vec<R::State>> = BTreeMap::new();
    for state in pending {
        by_degree.entry(system.degree(&state)).or_default().push(state);
    }

    for (degree, mut states) in by_degree {
        states.sort();
        solve_degree(system, memo, degree, states)?;
    }
    Ok(())
}

fn solve_degree<R: RecursionSystem>(
    system: &R,
    memo: &mut HashMap<R::State, R::Sc>,
    degree: usize,
    states: Vec<R::State>,
) -> Result<()> {
    let index: HashMap<&R::State, usize> =
        states.iter().enumerate().map(|(i, s)| (s, i)).collect();
    let terms: Vec<StateTerms<R::Sc, R::State>> =
        states.iter().map(|s| system.terms(s)).collect();

    // Union-find over same-degree edges between unresolved states.
    let mut parent: Vec<usize> = (0..states.len()).collect();
    fn find(parent: &mut Vec<usize>, mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (row, t) in terms.iter().enumerate() {
        for (_, target) in &t.same_degree {
            if let Some(&col) = index.get(target) {
                let (ri, ci) = (find(&mut parent, row), find(&mut parent, col));
                if ri != ci {
                    parent[ri] = ci;
                }
            }
        }
    }
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..states.len() {
        let root = find(&mut parent, i);
        components.entry(root).or_default().push(i);
    }

    for (_, members) in components {
        let sys = assemble::<R>(memo, degree, &states, &terms, &members)?;
        let solution = R::Sc::solve_dense(sys.matrix, sys.rhs)?;
        for (state, value) in sys.states.into_iter().zip(solution) {
            memo.insert(state, value);
        }
    }
    Ok(())
}

fn assemble<R: RecursionSystem>(
    memo: &HashMap<R::State, R::Sc>,
    degree: usize,
    states: &[R::State],
    terms: &[StateTerms<R::Sc, R::State>],
    members: &[usize],
) -> Result<DegreeSystem<R::Sc, R::State>> {
    let n = members.len();
    let local: HashMap<&R::State, usize> = members
        .iter()
        .enumerate()
        .map(|(r, &i)| (&states[i], r))
        .collect();
    let mut matrix = vec![vec![R::Sc::zero(); n]; n];
    let mut rhs = vec![R::Sc::zero(); n];
    for (row, &i) in members.iter().enumerate() {
        let t = &terms[i];
        matrix[row][row] = t.diagonal.clone();
        for (coeff, target) in &t.same_degree {
            if let Some(value) = memo.get(target) {
                rhs[row] = rhs[row].clone() + coeff.clone() * value.clone();
            } else if let Some(&col) = local.get(target) {
                matrix[row][col] = matrix[row][col].clone() - coeff.clone();
            } else {
                return Err(Error::Numerical(
                    "same-degree target outside its component".into(),
                ));
            }
        }
        for (coeff, target) in &t.lower_degree {
            let value = memo.get(target).ok_or_else(|| {
                Error::Numerical("lower-degree target not yet solved".into())
            })?;
            rhs[row] = rhs[row].clone() + coeff.clone() * value.clone();
        }
    }
    Ok(DegreeSystem {
        degree,
        states: members.iter().map(|&i| states[i].clone()).collect(),
        matrix,
        rhs,
    })
}
