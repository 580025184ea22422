//! Satisfiability under assumptions, with unsatisfiable cores drawn from the
//! assumptions and deletion-based core shrinking.

mod solver;

pub use solver::{SatResult, Solver};

use crate::error::{Error, Result};
use crate::logic::{CnfProblem, Literal};

/// One-shot solve with a fresh solver.
pub fn solve(problem: &CnfProblem, assumptions: &[Literal]) -> SatResult {
    Solver::new(problem).solve(assumptions)
}

impl Solver {
    /// Shrinks an unsatisfiable assumption set to a subset-minimal one by
    /// dropping literals in ascending order and keeping each drop that stays
    /// unsatisfiable.
    pub fn minimize_core(&mut self, core: &[Literal]) -> Result<Vec<Literal>> {
        let mut current: Vec<Literal> = core.to_vec();
        current.sort();
        current.dedup();
        if self.solve(&current).is_sat() {
            return Err(Error::SatisfiableCore);
        }
        let mut i = 0;
        while i < current.len() {
            let mut candidate = current.clone();
            candidate.remove(i);
            if self.solve(&candidate).is_sat() {
                i += 1;
            } else {
                current = candidate;
            }
        }
        Ok(current)
    }
}

pub fn minimize_core(problem: &CnfProblem, core: &[Literal]) -> Result<Vec<Literal>> {
    Solver::new(problem).minimize_core(core)
}
