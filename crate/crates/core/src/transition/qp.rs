//! Thin wrapper over the Clarabel interior-point solver for small dense
//! convex QPs of the form `min ½xᵀPx + qᵀx  s.t.  Gx ≤ h`.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Solved,
    /// Reduced accuracy; the caller must verify feasibility itself.
    Approximate,
}

pub struct QpSolution {
    pub x: Vec<f64>,
    pub status: QpStatus,
}

/// `p` is the full symmetric Hessian in row-major order.
pub fn solve_dense(p: &[Vec<f64>], q: &[f64], g: &[Vec<f64>], h: &[f64]) -> Result<Option<QpSolution>> {
    let n = q.len();
    let mut upper = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i..n {
            upper[i][j] = p[i][j];
        }
    }
    let p = CscMatrix::from(&upper);
    let a = CscMatrix::from(g);
    let cones = [NonnegativeConeT(h.len())];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .build()
        .map_err(|e| Error::Solver(format!("{e:?}")))?;
    let mut solver =
        DefaultSolver::new(&p, q, &a, h, &cones, settings).map_err(|e| Error::Solver(format!("{e:?}")))?;
    solver.solve();
    let status = match solver.solution.status {
        SolverStatus::Solved => QpStatus::Solved,
        SolverStatus::AlmostSolved | SolverStatus::MaxIterations | SolverStatus::InsufficientProgress => {
            QpStatus::Approximate
        }
        _ => return Ok(None),
    };
    Ok(Some(QpSolution {
        x: solver.solution.x.clone(),
        status,
    }))
}
