//! Brute-force reference: for every text position, the exact minimum edit
//! distance between the pattern and any suffix of the text read so far.
//!
//! Deliberately shares no code with [`crate::edit`].

use thiserror::Error;

pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{cells} DP cells exceed the budget of {budget}")]
    BudgetExceeded { cells: u64, budget: u64 },
}

/// Semi-global DP with free text-prefix deletion; entry `l` is the distance
/// after reading `t[..=l]`.
pub fn oracle_all_positions<S: PartialEq>(p: &[S], t: &[S], budget: u64) -> Result<Vec<u32>, OracleError> {
    let cells = (p.len() as u64 + 1).saturating_mul(t.len() as u64);
    if cells > budget {
        return Err(OracleError::BudgetExceeded { cells, budget });
    }
    let mut col: Vec<u32> = (0..=p.len() as u32).collect();
    let mut out = Vec::with_capacity(t.len());
    for c in t {
        let mut diag = col[0];
        for j in 1..col.len() {
            let up = col[j];
            let mut v = diag + u32::from(p[j - 1] != *c);
            v = v.min(up + 1);
            v = v.min(col[j - 1] + 1);
            col[j] = v;
            diag = up;
        }
        out.push(col[p.len()]);
    }
    Ok(out)
}
