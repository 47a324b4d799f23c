//! Physical topology, traffic demands and candidate routes.
//!
//! Undirected edges from the input document are expanded into a pair of
//! opposite directed links. Edge `i` of the document becomes links `2i`
//! (a→b) and `2i + 1` (b→a), so link numbering is stable for a given
//! document.

mod builtin;
mod ksp;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use builtin::{builtin_topology, BUILTIN_NAMES};
pub use ksp::k_shortest_paths;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

pub type DemandId = u32;

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub tail: NodeId,
    pub head: NodeId,
    pub length_km: f64,
}

/// Serialized form of a topology: node names plus undirected edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologyDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub nodes: Vec<String>,
    pub edges: Vec<EdgeDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDocument {
    pub a: String,
    pub b: String,
    pub km: f64,
}

#[derive(Debug, Clone)]
pub struct Topology {
    name: Option<String>,
    names: Vec<String>,
    index: HashMap<String, NodeId>,
    links: Vec<Link>,
    outgoing: Vec<Vec<LinkId>>,
    by_ends: HashMap<(NodeId, NodeId), LinkId>,
}

impl Topology {
    pub fn from_document(doc: &TopologyDocument) -> Result<Self> {
        if doc.nodes.is_empty() {
            return Err(Error::Topology("no nodes".into()));
        }
        let mut index = HashMap::new();
        for (i, name) in doc.nodes.iter().enumerate() {
            if index.insert(name.clone(), NodeId(i)).is_some() {
                return Err(Error::Topology(format!("duplicate node {name:?}")));
            }
        }
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::Topology(format!("edge references unknown node {name:?}")))
        };

        let mut links = Vec::with_capacity(doc.edges.len() * 2);
        let mut outgoing = vec![Vec::new(); doc.nodes.len()];
        let mut by_ends = HashMap::new();
        for edge in &doc.edges {
            let a = lookup(&edge.a)?;
            let b = lookup(&edge.b)?;
            if a == b {
                return Err(Error::Topology(format!("self-loop at node {:?}", edge.a)));
            }
            if !(edge.km.is_finite() && edge.km > 0.0) {
                return Err(Error::Topology(format!(
                    "edge {}-{} has non-positive length {}",
                    edge.a, edge.b, edge.km
                )));
            }
            if by_ends.contains_key(&(a, b)) {
                return Err(Error::Topology(format!("duplicate edge {}-{}", edge.a, edge.b)));
            }
            for (tail, head) in [(a, b), (b, a)] {
                let id = LinkId(links.len());
                links.push(Link { id, tail, head, length_km: edge.km });
                outgoing[tail.0].push(id);
                by_ends.insert((tail, head), id);
            }
        }

        let topo = Topology {
            name: doc.name.clone(),
            names: doc.nodes.clone(),
            index,
            links,
            outgoing,
            by_ends,
        };
        if !topo.is_connected() {
            return Err(Error::Topology("graph is disconnected".into()));
        }
        Ok(topo)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TopologyDocument =
            serde_json::from_str(text).map_err(|e| Error::Topology(format!("parse failure: {e}")))?;
        Self::from_document(&doc)
    }

    /// Loads a topology file, or a built-in network when `path` is
    /// `builtin:<name>`.
    pub fn load(path: &Path) -> Result<Self> {
        if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("builtin:")) {
            return builtin_topology(name);
        }
        let text = crate::error::read_file(path)?;
        Self::from_json(&text)
    }

    pub fn to_document(&self) -> TopologyDocument {
        let edges = self
            .links
            .iter()
            .step_by(2)
            .map(|l| EdgeDocument {
                a: self.names[l.tail.0].clone(),
                b: self.names[l.head.0].clone(),
                km: l.length_km,
            })
            .collect();
        TopologyDocument { name: self.name.clone(), nodes: self.names.clone(), edges }
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.names.len()];
        let mut queue = VecDeque::from([NodeId(0)]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &l in &self.outgoing[n.0] {
                let h = self.links[l.0].head;
                if !seen[h.0] {
                    seen[h.0] = true;
                    queue.push_back(h);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn link_count(&self) -> usize {
        self.links.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.names.len()).map(NodeId)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn outgoing(&self, node: NodeId) -> &[LinkId] {
        &self.outgoing[node.0]
    }

    pub fn link_between(&self, tail: NodeId, head: NodeId) -> Option<LinkId> {
        self.by_ends.get(&(tail, head)).copied()
    }

    pub fn node_name(&self, node: NodeId) -> &str {
        &self.names[node.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    /// `d_ij = length / longest link length`, indexed by link id.
    pub fn normalize_distances(&self) -> Vec<f64> {
        let max = self.links.iter().map(|l| l.length_km).fold(0.0_f64, f64::max);
        self.links.iter().map(|l| l.length_km / max).collect()
    }
}

/// Number of amplified spans on a link of the given length.
pub fn span_count(length_km: f64, span_length_km: f64) -> u32 {
    ((length_km / span_length_km).ceil() as u32).max(1)
}

/// A traffic request for `rho` contiguous frequency slots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demand {
    pub id: DemandId,
    pub source: NodeId,
    pub destination: NodeId,
    pub rho: usize,
}

impl Demand {
    pub fn new(id: DemandId, source: NodeId, destination: NodeId, rho: usize) -> Result<Self> {
        let d = Demand { id, source, destination, rho };
        d.check_shape()?;
        Ok(d)
    }

    fn check_shape(&self) -> Result<()> {
        if self.source == self.destination {
            return Err(Error::Demand { id: self.id, reason: "source equals destination".into() });
        }
        if self.rho == 0 {
            return Err(Error::Demand { id: self.id, reason: "rho must be at least 1".into() });
        }
        Ok(())
    }

    pub fn check_against(&self, topology: &Topology) -> Result<()> {
        self.check_shape()?;
        for n in [self.source, self.destination] {
            if n.0 >= topology.node_count() {
                return Err(Error::Demand { id: self.id, reason: format!("unknown node index {}", n.0) });
            }
        }
        Ok(())
    }
}

/// Checks endpoints and shape of every demand and rejects duplicate ids.
pub fn check_demands(topology: &Topology, demands: &[Demand]) -> Result<()> {
    let mut ids = std::collections::HashSet::new();
    for d in demands {
        d.check_against(topology)?;
        if !ids.insert(d.id) {
            return Err(Error::Demand { id: d.id, reason: "duplicate demand id".into() });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DemandDocument {
    pub id: DemandId,
    pub source: String,
    pub destination: String,
    pub rho: usize,
}

pub fn demands_from_documents(topology: &Topology, docs: &[DemandDocument]) -> Result<Vec<Demand>> {
    let demands = docs
        .iter()
        .map(|d| {
            let node = |name: &str| {
                topology
                    .node_id(name)
                    .ok_or_else(|| Error::Demand { id: d.id, reason: format!("unknown node {name:?}") })
            };
            Demand::new(d.id, node(&d.source)?, node(&d.destination)?, d.rho)
        })
        .collect::<Result<Vec<_>>>()?;
    check_demands(topology, &demands)?;
    Ok(demands)
}

pub fn demands_to_documents(topology: &Topology, demands: &[Demand]) -> Vec<DemandDocument> {
    demands
        .iter()
        .map(|d| DemandDocument {
            id: d.id,
            source: topology.node_name(d.source).to_owned(),
            destination: topology.node_name(d.destination).to_owned(),
            rho: d.rho,
        })
        .collect()
}

pub fn load_demands(topology: &Topology, path: &Path) -> Result<Vec<Demand>> {
    let text = crate::error::read_file(path)?;
    let docs: Vec<DemandDocument> = serde_json::from_str(&text)?;
    demands_from_documents(topology, &docs)
}

/// One of the K routes precomputed for a demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePath {
    pub demand: DemandId,
    /// 1-based position in the K-shortest list.
    pub rank: usize,
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    pub total_km: f64,
    /// Amplified spans per link, aligned with `links`.
    pub spans: Vec<u32>,
    /// In-line amplifier count over the whole route.
    pub edfa_count: u32,
}

impl CandidatePath {
    pub fn hop_count(&self) -> usize {
        self.links.len()
    }

    /// Propagation delay proxy: route length in km.
    pub fn delay(&self) -> f64 {
        self.total_km
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().expect("path has nodes")
    }

    /// Builds a candidate from a node sequence. Returns `None` if any hop
    /// is not a link of `topology`.
    pub fn from_nodes(
        topology: &Topology,
        demand: DemandId,
        rank: usize,
        nodes: Vec<NodeId>,
        span_length_km: f64,
    ) -> Option<Self> {
        let links = nodes
            .windows(2)
            .map(|w| topology.link_between(w[0], w[1]))
            .collect::<Option<Vec<_>>>()?;
        let total_km = links.iter().map(|&l| topology.link(l).length_km).sum();
        let spans: Vec<u32> =
            links.iter().map(|&l| span_count(topology.link(l).length_km, span_length_km)).collect();
        let edfa_count = spans.iter().sum();
        Some(CandidatePath { demand, rank, nodes, links, total_km, spans, edfa_count })
    }
}

pub fn path_delay(path: &CandidatePath) -> f64 {
    path.delay()
}

/// Up to `k` candidate paths for `demand`, ranked from 1.
pub fn candidate_paths(topology: &Topology, demand: &Demand, k: usize, span_length_km: f64) -> Vec<CandidatePath> {
    k_shortest_paths(topology, demand.source, demand.destination, k)
        .into_iter()
        .enumerate()
        .map(|(i, nodes)| {
            CandidatePath::from_nodes(topology, demand.id, i + 1, nodes, span_length_km)
                .expect("k-shortest paths only follow existing links")
        })
        .collect()
}

/// Largest path delay over every candidate of every demand.
pub fn delay_max<'a>(paths: impl IntoIterator<Item = &'a CandidatePath>) -> f64 {
    paths.into_iter().map(path_delay).fold(0.0, f64::max)
}
