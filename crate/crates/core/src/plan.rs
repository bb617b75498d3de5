use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::MultiNetworkSystem;

/// Which nodes are pinned in which network, and the gain each network uses.
///
/// `pins[k][a]` refers to local row `a` of network `k`, so positions outside
/// a node's membership cannot be represented at all.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinningPlan {
    pub pins: Vec<Vec<bool>>,
    pub gains: Vec<f64>,
}

impl PinningPlan {
    pub fn new(sys: &MultiNetworkSystem, pins: Vec<Vec<bool>>, gains: Vec<f64>) -> Result<Self> {
        let k = sys.num_networks();
        if pins.len() != k || gains.len() != k {
            return Err(Error::DimensionMismatch {
                what: "plan networks vs system networks",
                expected: k,
                got: if pins.len() != k { pins.len() } else { gains.len() },
            });
        }
        for (net, p) in sys.networks().iter().zip(&pins) {
            if p.len() != net.n() {
                return Err(Error::DimensionMismatch {
                    what: "plan pins vs network size",
                    expected: net.n(),
                    got: p.len(),
                });
            }
        }
        if let Some(g) = gains.iter().find(|g| !(**g >= 0.0 && g.is_finite())) {
            return Err(Error::param("gain", format!("{g} must be finite and >= 0")));
        }
        Ok(Self { pins, gains })
    }

    /// `𝒟ᵢ = max_k dᵢ⁽ᵏ⁾` for every global node.
    pub fn aggregated(&self, sys: &MultiNetworkSystem) -> Vec<bool> {
        (0..sys.total_nodes())
            .map(|i| sys.placements(i).iter().any(|&(k, a)| self.pins[k][a]))
            .collect()
    }

    /// `Σᵢ 𝒟ᵢ`: each node counts once however many networks pin it.
    pub fn pinned_count(&self, sys: &MultiNetworkSystem) -> usize {
        self.aggregated(sys).iter().filter(|&&p| p).count()
    }
}
