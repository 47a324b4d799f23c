//! Loopless K-shortest paths (Yen).
//!
//! Paths are ranked by total length, then hop count, then the node-index
//! sequence. Yen's spur search only resolves length and hop count, so
//! enumeration continues past the K-th path while the next candidate ties
//! with it; the tied set is then sorted by the full key and truncated.

use std::cmp::{Ordering, Reverse};
use std::collections::{BTreeSet, BinaryHeap, HashSet};

use super::{LinkId, NodeId, Topology};

#[derive(Debug, Clone)]
struct Route {
    km: f64,
    nodes: Vec<NodeId>,
    links: Vec<LinkId>,
}

impl Route {
    fn cost(&self) -> (f64, usize) {
        (self.km, self.links.len())
    }
}

fn cmp_cost(a: (f64, usize), b: (f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

impl PartialEq for Route {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Route {}
impl PartialOrd for Route {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Route {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_cost(self.cost(), other.cost()).then_with(|| self.nodes.cmp(&other.nodes))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Label {
    km: f64,
    hops: usize,
    node: NodeId,
}
impl Eq for Label {}
impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_cost((self.km, self.hops), (other.km, other.hops)).then(self.node.cmp(&other.node))
    }
}

/// Dijkstra over (length, hops) avoiding banned nodes and links.
fn shortest(
    topo: &Topology,
    from: NodeId,
    to: NodeId,
    banned_nodes: &[bool],
    banned_links: &HashSet<LinkId>,
) -> Option<Route> {
    let n = topo.node_count();
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut pred: Vec<Option<LinkId>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[from.0] = Some((0.0, 0));
    heap.push(Reverse(Label { km: 0.0, hops: 0, node: from }));

    while let Some(Reverse(Label { km, hops, node })) = heap.pop() {
        if done[node.0] {
            continue;
        }
        done[node.0] = true;
        if node == to {
            break;
        }
        for &l in topo.outgoing(node) {
            if banned_links.contains(&l) {
                continue;
            }
            let head = topo.link(l).head;
            if banned_nodes[head.0] || done[head.0] {
                continue;
            }
            let cand = (km + topo.link(l).length_km, hops + 1);
            let better = match best[head.0] {
                None => true,
                Some(cur) => cmp_cost(cand, cur) == Ordering::Less,
            };
            if better {
                best[head.0] = Some(cand);
                pred[head.0] = Some(l);
                heap.push(Reverse(Label { km: cand.0, hops: cand.1, node: head }));
            }
        }
    }

    if !done[to.0] {
        return None;
    }
    let mut links = Vec::new();
    let mut at = to;
    while at != from {
        let l = pred[at.0]?;
        links.push(l);
        at = topo.link(l).tail;
    }
    links.reverse();
    let mut nodes = vec![from];
    nodes.extend(links.iter().map(|&l| topo.link(l).head));
    Some(Route { km: best[to.0]?.0, nodes, links })
}

/// Up to `k` loopless paths from `source` to `destination`, each as a node
/// sequence. Empty when `k == 0`, when the endpoints coincide, or when no
/// path exists.
pub fn k_shortest_paths(topo: &Topology, source: NodeId, destination: NodeId, k: usize) -> Vec<Vec<NodeId>> {
    if k == 0 || source == destination {
        return Vec::new();
    }
    let no_nodes = vec![false; topo.node_count()];
    let Some(first) = shortest(topo, source, destination, &no_nodes, &HashSet::new()) else {
        return Vec::new();
    };

    let mut accepted: Vec<Route> = vec![first];
    let mut seen: HashSet<Vec<NodeId>> = HashSet::from([accepted[0].nodes.clone()]);
    let mut pending: BTreeSet<Route> = BTreeSet::new();

    loop {
        let last = accepted.last().expect("at least one path").clone();
        for i in 0..last.links.len() {
            let spur = last.nodes[i];
            let root_nodes = &last.nodes[..=i];
            let root_links = &last.links[..i];

            let mut banned_links = HashSet::new();
            for p in &accepted {
                if p.nodes.len() > i + 1 && p.nodes[..=i] == *root_nodes {
                    banned_links.insert(p.links[i]);
                }
            }
            let mut banned_nodes = vec![false; topo.node_count()];
            for &n in &root_nodes[..i] {
                banned_nodes[n.0] = true;
            }

            if let Some(tail) = shortest(topo, spur, destination, &banned_nodes, &banned_links) {
                let mut nodes = root_nodes.to_vec();
                nodes.extend_from_slice(&tail.nodes[1..]);
                if seen.contains(&nodes) {
                    continue;
                }
                let mut links = root_links.to_vec();
                links.extend_from_slice(&tail.links);
                // Sum in path order so equal routes get bit-identical lengths.
                let km = links.iter().map(|&l| topo.link(l).length_km).sum();
                seen.insert(nodes.clone());
                pending.insert(Route { km, nodes, links });
            }
        }

        let Some(next) = pending.first() else { break };
        if accepted.len() >= k {
            let kth = accepted[k - 1].cost();
            if cmp_cost(next.cost(), kth) == Ordering::Greater {
                break;
            }
        }
        let next = pending.pop_first().expect("checked non-empty");
        accepted.push(next);
    }

    accepted.sort();
    accepted.truncate(k);
    accepted.into_iter().map(|r| r.nodes).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{EdgeDocument, TopologyDocument};

    fn topo(nodes: &[&str], edges: &[(&str, &str, f64)]) -> Topology {
        Topology::from_document(&TopologyDocument {
            name: None,
            nodes: nodes.iter().map(|s| s.to_string()).collect(),
            edges: edges
                .iter()
                .map(|&(a, b, km)| EdgeDocument { a: a.into(), b: b.into(), km })
                .collect(),
        })
        .unwrap()
    }

    #[test]
    fn ring_returns_both_arcs_shorter_first() {
        let t = topo(
            &["A", "B", "C", "D"],
            &[("A", "B", 100.0), ("B", "D", 100.0), ("A", "C", 150.0), ("C", "D", 150.0)],
        );
        let paths = k_shortest_paths(&t, NodeId(0), NodeId(3), 2);
        assert_eq!(paths, vec![vec![NodeId(0), NodeId(1), NodeId(3)], vec![NodeId(0), NodeId(2), NodeId(3)]]);
    }

    #[test]
    fn unique_path_on_single_edge() {
        let t = topo(&["A", "B"], &[("A", "B", 5.0)]);
        assert_eq!(k_shortest_paths(&t, NodeId(0), NodeId(1), 3).len(), 1);
    }

    #[test]
    fn ties_resolved_by_hops_then_nodes() {
        // A-D direct 200, A-B-D 100+100, A-C-D 100+100.
        let t = topo(
            &["A", "B", "C", "D"],
            &[("A", "D", 200.0), ("A", "C", 100.0), ("C", "D", 100.0), ("A", "B", 100.0), ("B", "D", 100.0)],
        );
        let paths = k_shortest_paths(&t, NodeId(0), NodeId(3), 2);
        assert_eq!(paths[0], vec![NodeId(0), NodeId(3)]);
        assert_eq!(paths[1], vec![NodeId(0), NodeId(1), NodeId(3)]);
    }
}
