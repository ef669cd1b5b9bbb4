//! Euler obstruction for foliating a surface from its bagpipe summary.
//!
//! Input is a bag of characteristic χ(B) with `n` pipes. Capping the bag's
//! contours with discs gives a compact surface F. A foliation of the whole
//! surface would assign indices i(pᵢ) to the disc centres and i(qᵢ) to the
//! collapsed pipe-side circles with
//!
//! ```text
//! (1) χ(M) = χ(B)
//! (2) χ(F) = χ(B) + n
//! (3) Σ i(pᵢ) = χ(F)
//! (4) i(pᵢ) + i(qᵢ) = 2
//! (5) i(qᵢ) ≤ 1
//! ```
//!
//! which is solvable over ½ℤ iff `Σ i(qᵢ) = n − χ(M)` with every cap ≤ 1.
//! Solvability is only a necessary condition for a foliation: the long
//! glass (χ(B) = 1, n = 1) passes the ledger and still has none.

use serde::Serialize;
use thiserror::Error;

use crate::half::HalfIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ObstructionError {
    #[error("cap index {value} at position {position} exceeds 1")]
    CapBoundViolation { position: usize, value: HalfIndex },
    #[error("{given} cap indices given for {pipes} pipes")]
    LengthMismatch { given: usize, pipes: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BagpipeSpec {
    pub chi_bag: i64,
    pub pipes: u32,
    pub cap_indices: Option<Vec<HalfIndex>>,
}

impl BagpipeSpec {
    pub fn new(chi_bag: i64, pipes: u32) -> Self {
        BagpipeSpec { chi_bag, pipes, cap_indices: None }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChainEntry {
    pub label: &'static str,
    pub statement: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub feasible: bool,
    pub chi_m: i64,
    pub chi_f: i64,
    /// `n − χ(M)`, what the caps must add up to.
    pub required_cap_sum: HalfIndex,
    /// Cap indices i(qᵢ) solving the ledger.
    pub witness: Option<Vec<HalfIndex>>,
    /// Disc-centre indices i(pᵢ) = 2 − i(qᵢ) for the witness.
    pub witness_centers: Option<Vec<HalfIndex>>,
    pub chain: Vec<ChainEntry>,
    pub note: &'static str,
}

pub const NECESSARY_ONLY: &str = "necessary condition only: a feasible ledger does not guarantee a foliation \
(the long glass, chi(B) = 1 with one pipe, is feasible here yet admits no foliation)";

/// `(χ(M), χ(F))` from the bag characteristic and pipe count.
pub fn bagpipe_euler(chi_bag: i64, pipes: u32) -> (i64, i64) {
    (chi_bag, chi_bag + pipes as i64)
}

/// Closed-form feasibility of the index ledger.
pub fn foliation_feasibility(spec: &BagpipeSpec) -> Result<Verdict, ObstructionError> {
    let n = spec.pipes;
    let (chi_m, chi_f) = bagpipe_euler(spec.chi_bag, n);
    let required = HalfIndex::from_int(n as i64 - chi_m);
    let cap_max = HalfIndex::from_int(n as i64);

    if let Some(caps) = &spec.cap_indices {
        if caps.len() != n as usize {
            return Err(ObstructionError::LengthMismatch { given: caps.len(), pipes: n });
        }
        if let Some((position, &value)) = caps.iter().enumerate().find(|(_, q)| **q > HalfIndex::ONE) {
            return Err(ObstructionError::CapBoundViolation { position, value });
        }
    }

    let witness: Option<Vec<HalfIndex>> = match &spec.cap_indices {
        Some(caps) => (caps.iter().sum::<HalfIndex>() == required).then(|| caps.clone()),
        None if n == 0 => (chi_m == 0).then(Vec::new),
        None if chi_m >= 0 => {
            let mut caps = vec![HalfIndex::ONE; n as usize];
            caps[0] = HalfIndex::from_int(1 - chi_m);
            Some(caps)
        }
        None => None,
    };
    let feasible = witness.is_some();
    let centers = witness.as_ref().map(|caps| caps.iter().map(|q| HalfIndex::from_int(2) - *q).collect::<Vec<_>>());

    let mut chain = vec![
        ChainEntry { label: "(1)", statement: format!("chi(M) = chi(B) = {chi_m}"), holds: true },
        ChainEntry {
            label: "(2)",
            statement: format!("chi(F) = chi(B) + n = {} + {n} = {chi_f}", spec.chi_bag),
            holds: true,
        },
    ];
    match (&spec.cap_indices, &witness, &centers) {
        (_, Some(caps), Some(centers)) => {
            let p_sum: HalfIndex = centers.iter().sum();
            chain.push(ChainEntry {
                label: "(3)",
                statement: format!("sum i(p_i) = {} = chi(F) = {chi_f}", p_sum),
                holds: p_sum == HalfIndex::from_int(chi_f),
            });
            chain.push(ChainEntry {
                label: "(4)",
                statement: format!("i(p_i) + i(q_i) = 2 for p = [{}], q = [{}]", join(centers), join(caps)),
                holds: true,
            });
            chain.push(ChainEntry {
                label: "(5)",
                statement: format!("i(q_i) <= 1 for q = [{}]", join(caps)),
                holds: caps.iter().all(|q| *q <= HalfIndex::ONE),
            });
            chain.push(ChainEntry {
                label: "(6)",
                statement: format!("sum i(q_i) = {} = n - chi(M) = {required}", caps.iter().sum::<HalfIndex>()),
                holds: true,
            });
        }
        (Some(caps), None, _) => {
            let q_sum: HalfIndex = caps.iter().sum();
            let p_sum = HalfIndex::from_int(2 * n as i64) - q_sum;
            chain.push(ChainEntry {
                label: "(3)",
                statement: format!(
                    "sum i(p_i) = 2n - sum i(q_i) = {} - {q_sum} = {p_sum}, but chi(F) = {chi_f}",
                    2 * n
                ),
                holds: false,
            });
            chain.push(ChainEntry {
                label: "(6)",
                statement: format!("given caps sum to {q_sum}, ledger needs n - chi(M) = {required}"),
                holds: false,
            });
        }
        (None, None, _) if n == 0 => {
            chain.push(ChainEntry {
                label: "(3)",
                statement: format!("no pipes: sum of indices is the empty sum 0, but chi(F) = {chi_f}"),
                holds: false,
            });
        }
        (None, None, _) => {
            chain.push(ChainEntry {
                label: "(3)-(4)",
                statement: format!("sum i(p_i) = 2n - sum i(q_i) = chi(F), so sum i(q_i) = n - chi(M) = {required}"),
                holds: true,
            });
            chain.push(ChainEntry {
                label: "(5)",
                statement: format!("i(q_i) <= 1 gives sum i(q_i) <= n = {cap_max}"),
                holds: true,
            });
            chain.push(ChainEntry {
                label: "(6)",
                statement: format!("{required} <= {cap_max} would force chi(M) >= 0, violating chi(M) = {chi_m} < 0"),
                holds: false,
            });
        }
        _ => unreachable!("witness and centres are built together"),
    }

    Ok(Verdict {
        feasible,
        chi_m,
        chi_f,
        required_cap_sum: required,
        witness,
        witness_centers: centers,
        chain,
        note: NECESSARY_ONLY,
    })
}

fn join(xs: &[HalfIndex]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}
