use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::DirectedNetwork;
use crate::stability::{evaluate_pinning, GainMode, StabilityParams};

/// Largest network the exhaustive search accepts.
pub const ORACLE_MAX_NODES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub count: usize,
    /// Local rows of one minimum-cardinality feasible set.
    pub subset: Vec<usize>,
    pub gain: f64,
}

/// Exhaustive minimum pinning set with the minimal-gain LMI test.
///
/// Returns `None` when no subset is feasible within `c_max`.
pub fn brute_force_min_pinning(net: &DirectedNetwork, params: &StabilityParams) -> Result<Option<OracleResult>> {
    brute_force_min_pinning_with(net, params, GainMode::Minimal)
}

/// As [`brute_force_min_pinning`] with an explicit gain mode. Subsets are
/// tried by increasing size, lexicographically within a size.
pub fn brute_force_min_pinning_with(
    net: &DirectedNetwork,
    params: &StabilityParams,
    mode: GainMode,
) -> Result<Option<OracleResult>> {
    let n = net.n();
    if n > ORACLE_MAX_NODES {
        return Err(Error::SizeCap {
            n,
            cap: ORACLE_MAX_NODES,
        });
    }
    let ls = &net.laplacian().symmetric_part;
    let mut pinned = vec![false; n];
    for size in 0..=n {
        for subset in (0..n).combinations(size) {
            pinned.fill(false);
            for &i in &subset {
                pinned[i] = true;
            }
            let r = evaluate_pinning(ls, &pinned, net.coupling_strength(), net.gamma(), mode, params)?;
            if r.feasible {
                return Ok(Some(OracleResult {
                    count: size,
                    subset,
                    gain: r.gain.unwrap_or_default(),
                }));
            }
        }
    }
    Ok(None)
}
