//! Structure discovery: conditional-independence testing, PC, GES, Markov
//! equivalence class enumeration and graph comparison.
//!
//! Graph nodes are the dataset's features in schema order followed by the
//! label; all algorithms break ties by that order.

mod ci;
mod dot;
mod enumerate;
mod ges;
mod graph;
mod pc;
mod pdag;

pub use ci::{fisher_z_ci_test, CiResult, CorrelationMatrix};
pub use dot::{cpdag_from_dot, cpdag_to_dot, dag_from_dot, dag_to_dot};
pub use enumerate::{enumerate_dags, enumerate_dags_with_cap, DEFAULT_EXTENSION_CAP};
pub use ges::{ges_discover, ges_discover_columns, BicScorer};
pub use graph::{edge_diff, v_structures, Cpdag, Dag};
pub use pc::{pc_discover, pc_discover_columns, PcOutput};

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DiscoveryAlgorithm {
    Pc,
    Ges,
}

impl DiscoveryAlgorithm {
    pub fn name(self) -> &'static str {
        match self {
            DiscoveryAlgorithm::Pc => "PC",
            DiscoveryAlgorithm::Ges => "GES",
        }
    }
}

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Runs the chosen discovery algorithm with default settings.
pub fn discover(data: &Dataset, algorithm: DiscoveryAlgorithm, alpha: f64) -> Result<Cpdag> {
    match algorithm {
        DiscoveryAlgorithm::Pc => Ok(pc_discover(data, alpha)?.cpdag),
        DiscoveryAlgorithm::Ges => ges_discover(data),
    }
}
