//! Two-terminal series-parallel recognition by series and parallel reductions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::network::Network;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpTree {
    Leaf(String),
    /// First child is the component nearer the source.
    Series(Box<SpTree>, Box<SpTree>),
    Parallel(Box<SpTree>, Box<SpTree>),
}

impl SpTree {
    /// Leaf edge ids in tree order.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            SpTree::Leaf(id) => out.push(id),
            SpTree::Series(a, b) | SpTree::Parallel(a, b) => {
                a.collect_leaves(out);
                b.collect_leaves(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum SpDecomposition {
    Tree(SpTree),
    NotSeriesParallel,
}

impl SpDecomposition {
    pub fn is_series_parallel(&self) -> bool {
        matches!(self, SpDecomposition::Tree(_))
    }

    pub fn tree(&self) -> Option<&SpTree> {
        match self {
            SpDecomposition::Tree(t) => Some(t),
            SpDecomposition::NotSeriesParallel => None,
        }
    }
}

struct Arc {
    tail: usize,
    head: usize,
    tree: SpTree,
}

/// Reduces the network to a single source-sink edge if it is two-terminal
/// series-parallel. Nodes without incident edges are ignored.
pub fn sp_decompose(net: &Network) -> SpDecomposition {
    let (s, t) = (net.source(), net.sink());
    let mut arcs: Vec<Option<Arc>> = (0..net.edge_count())
        .map(|e| {
            Some(Arc {
                tail: net.tail(e),
                head: net.head(e),
                tree: SpTree::Leaf(net.edges()[e].id.clone()),
            })
        })
        .collect();

    loop {
        let mut changed = false;

        // Parallel: fold every group of arcs sharing (tail, head) into its first member.
        let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (i, a) in arcs.iter().enumerate() {
            if let Some(a) = a {
                groups.entry((a.tail, a.head)).or_default().push(i);
            }
        }
        for members in groups.values().filter(|m| m.len() > 1) {
            let first = members[0];
            for &other in &members[1..] {
                let b = arcs[other].take().expect("live arc");
                let a = arcs[first].as_mut().expect("live arc");
                let left = std::mem::replace(&mut a.tree, SpTree::Leaf(String::new()));
                a.tree = SpTree::Parallel(Box::new(left), Box::new(b.tree));
            }
            changed = true;
        }

        // Series: contract one inner node with exactly one arc in and one arc out.
        let n = net.node_count();
        let mut incoming = vec![Vec::new(); n];
        let mut outgoing = vec![Vec::new(); n];
        for (i, a) in arcs.iter().enumerate() {
            if let Some(a) = a {
                outgoing[a.tail].push(i);
                incoming[a.head].push(i);
            }
        }
        for v in 0..n {
            if v == s || v == t || incoming[v].len() != 1 || outgoing[v].len() != 1 {
                continue;
            }
            let (i, o) = (incoming[v][0], outgoing[v][0]);
            let second = arcs[o].take().expect("live arc");
            let first = arcs[i].take().expect("live arc");
            arcs[i] = Some(Arc {
                tail: first.tail,
                head: second.head,
                tree: SpTree::Series(Box::new(first.tree), Box::new(second.tree)),
            });
            changed = true;
            break;
        }

        if !changed {
            break;
        }
    }

    let mut live = arcs.into_iter().flatten();
    match (live.next(), live.next()) {
        (Some(a), None) if a.tail == s && a.head == t => SpDecomposition::Tree(a.tree),
        _ => SpDecomposition::NotSeriesParallel,
    }
}

/// Edge indices of a Braess network: `a: s->u`, `b: u->t`, `c: s->w`,
/// `d: w->t` and the cross edge `e: u->w`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BraessLabels {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub d: usize,
    pub e: usize,
}

impl BraessLabels {
    /// The three source-sink paths `p = (a, b)`, `q = (c, d)`, `r = (a, e, d)`.
    pub fn paths(&self) -> [Vec<usize>; 3] {
        [vec![self.a, self.b], vec![self.c, self.d], vec![self.a, self.e, self.d]]
    }
}

/// Recognizes the four-node, five-edge Braess diamond, whichever way round the
/// middle nodes are named.
pub fn braess_labels(net: &Network) -> Option<BraessLabels> {
    if net.node_count() != 4 || net.edge_count() != 5 {
        return None;
    }
    let (s, t) = (net.source(), net.sink());
    let edge = |from: usize, to: usize| -> Option<usize> {
        let mut found = (0..net.edge_count()).filter(|&e| net.tail(e) == from && net.head(e) == to);
        match (found.next(), found.next()) {
            (Some(e), None) => Some(e),
            _ => None,
        }
    };
    let middle: Vec<usize> = (0..4).filter(|&v| v != s && v != t).collect();
    for (u, w) in [(middle[0], middle[1]), (middle[1], middle[0])] {
        let labels = (|| {
            Some(BraessLabels {
                a: edge(s, u)?,
                b: edge(u, t)?,
                c: edge(s, w)?,
                d: edge(w, t)?,
                e: edge(u, w)?,
            })
        })();
        if labels.is_some() {
            return labels;
        }
    }
    None
}
