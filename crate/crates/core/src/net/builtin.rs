//! Reference networks shipped with the crate.

use super::Topology;
use crate::error::{Error, Result};

const SIX_NODE: &str = include_str!("../../data/six_node.json");
const NSFNET: &str = include_str!("../../data/nsfnet.json");

pub const BUILTIN_NAMES: &[&str] = &["six-node", "nsfnet"];

/// `six-node`: small 6-node/8-edge test network.
/// `nsfnet`: 14-node/21-edge NSFNET with the usual km distances.
pub fn builtin_topology(name: &str) -> Result<Topology> {
    let text = match name {
        "six-node" => SIX_NODE,
        "nsfnet" => NSFNET,
        other => {
            return Err(Error::Topology(format!(
                "unknown built-in topology {other:?} (expected one of {BUILTIN_NAMES:?})"
            )))
        }
    };
    Topology::from_json(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        let six = builtin_topology("six-node").unwrap();
        assert_eq!(six.node_count(), 6);
        assert_eq!(six.link_count(), 16);
        let nsf = builtin_topology("nsfnet").unwrap();
        assert_eq!(nsf.node_count(), 14);
        assert_eq!(nsf.link_count(), 42);
        assert!(builtin_topology("arpanet").is_err());
    }
}
