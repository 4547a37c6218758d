//! Directed synapse topologies and the generators that build them.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{format_err, param, Result};
use crate::numerics::{RngState, Stream};

/// Directed graph over `n` neurons. Synapses are kept sorted by `(dst, src)`, which
/// makes every neuron's predecessor list ascending and the layout canonical.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    n: usize,
    synapses: Vec<(usize, usize)>,
    predecessors: Vec<Vec<usize>>,
}

impl Topology {
    /// Validates and canonicalizes a synapse list `(src, dst)`.
    pub fn new(n: usize, synapses: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for (src, dst) in synapses {
            if src >= n || dst >= n {
                return Err(param(format!(
                    "synapse {src}->{dst} out of range for {n} neurons"
                )));
            }
            if src == dst {
                return Err(param(format!("self-loop on neuron {src}")));
            }
            if !seen.insert((dst, src)) {
                return Err(param(format!("duplicate synapse {src}->{dst}")));
            }
        }
        let mut predecessors = vec![Vec::new(); n];
        for &(dst, src) in &seen {
            predecessors[dst].push(src);
        }
        Ok(Self {
            n,
            synapses: seen.into_iter().map(|(dst, src)| (src, dst)).collect(),
            predecessors,
        })
    }

    pub fn n_neurons(&self) -> usize {
        self.n
    }

    /// Synapses as `(src, dst)`, sorted by `(dst, src)`.
    pub fn synapses(&self) -> &[(usize, usize)] {
        &self.synapses
    }

    /// Ascending pre-synapse neurons of `j`.
    pub fn predecessors(&self, j: usize) -> Result<&[usize]> {
        self.predecessors
            .get(j)
            .map(Vec::as_slice)
            .ok_or_else(|| param(format!("neuron {j} out of range for {} neurons", self.n)))
    }

    pub fn in_degree(&self, j: usize) -> usize {
        self.predecessors[j].len()
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.synapses.iter().filter(|&&(src, _)| src == i).count()
    }

    /// True when the directed graph contains at least one cycle.
    pub fn has_cycle(&self) -> bool {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            New,
            Open,
            Done,
        }
        let mut successors = vec![Vec::new(); self.n];
        for &(src, dst) in &self.synapses {
            successors[src].push(dst);
        }
        let mut mark = vec![Mark::New; self.n];
        for root in 0..self.n {
            if mark[root] != Mark::New {
                continue;
            }
            // Iterative DFS; the stack holds (node, next successor position).
            let mut stack = vec![(root, 0usize)];
            mark[root] = Mark::Open;
            while let Some((node, pos)) = stack.pop() {
                if let Some(&next) = successors[node].get(pos) {
                    stack.push((node, pos + 1));
                    match mark[next] {
                        Mark::Open => return true,
                        Mark::New => {
                            mark[next] = Mark::Open;
                            stack.push((next, 0));
                        }
                        Mark::Done => {}
                    }
                } else {
                    mark[node] = Mark::Done;
                }
            }
        }
        false
    }

    /// Text edge list: `n <count>` followed by one `src dst` line per synapse.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("n {}\n", self.n);
        for (src, dst) in &self.synapses {
            out.push_str(&format!("{src} {dst}\n"));
        }
        out
    }

    pub fn from_edge_list(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| format_err("empty edge list"))?;
        let n = header
            .strip_prefix("n ")
            .and_then(|s| s.trim().parse::<usize>().ok())
            .ok_or_else(|| format_err(format!("bad edge-list header {header:?}")))?;
        let mut synapses = Vec::new();
        for line in lines {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(src)), Some(Ok(dst)), None) => synapses.push((src, dst)),
                _ => return Err(format_err(format!("bad edge-list line {line:?}"))),
            }
        }
        Self::new(n, synapses)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorKind {
    Chain,
    Cycle,
    Complete,
    /// Watts–Strogatz small world.
    Ws,
    /// Barabási–Albert preferential attachment.
    Ba,
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneratorKind::Chain => "chain",
            GeneratorKind::Cycle => "cycle",
            GeneratorKind::Complete => "complete",
            GeneratorKind::Ws => "ws",
            GeneratorKind::Ba => "ba",
        })
    }
}

impl FromStr for GeneratorKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chain" => Ok(GeneratorKind::Chain),
            "cycle" => Ok(GeneratorKind::Cycle),
            "complete" => Ok(GeneratorKind::Complete),
            "ws" => Ok(GeneratorKind::Ws),
            "ba" => Ok(GeneratorKind::Ba),
            other => Err(param(format!(
                "unknown graph kind {other:?} (expected chain, cycle, complete, ws or ba)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    /// Ring-lattice degree for WS; even and below `n`.
    pub ws_k: usize,
    /// WS rewiring probability.
    pub ws_p: f64,
    /// Edges added per new node for BA.
    pub ba_m: usize,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, n: usize) -> Self {
        Self {
            kind,
            n,
            ws_k: 2,
            ws_p: 0.3,
            ba_m: 2,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(param("graph needs at least one neuron"));
        }
        match self.kind {
            GeneratorKind::Ws => {
                if !self.ws_k.is_multiple_of(2) || self.ws_k >= self.n {
                    return Err(param(format!(
                        "ws_k must be even and below n (got k={}, n={})",
                        self.ws_k, self.n
                    )));
                }
                if !(0.0..=1.0).contains(&self.ws_p) {
                    return Err(param(format!("ws_p must be in [0, 1], got {}", self.ws_p)));
                }
            }
            GeneratorKind::Ba if self.ba_m == 0 || self.ba_m >= self.n => {
                return Err(param(format!(
                    "ba_m must satisfy 1 <= m < n (got m={}, n={})",
                    self.ba_m, self.n
                )));
            }
            _ => {}
        }
        Ok(())
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<Topology> {
    spec.validate()?;
    let n = spec.n;
    let mut rng = RngState::new(spec.seed, Stream::Graph);
    let synapses: Vec<(usize, usize)> = match spec.kind {
        GeneratorKind::Chain => (1..n).map(|i| (i - 1, i)).collect(),
        GeneratorKind::Cycle => {
            let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            // A single neuron has no closure edge; it would be a self-loop.
            if n >= 2 {
                edges.push((n - 1, 0));
            }
            edges
        }
        GeneratorKind::Complete => (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect(),
        GeneratorKind::Ws => both_directions(watts_strogatz(n, spec.ws_k, spec.ws_p, &mut rng)),
        GeneratorKind::Ba => both_directions(barabasi_albert(n, spec.ba_m, &mut rng)),
    };
    Topology::new(n, synapses)
}

fn both_directions(undirected: BTreeSet<(usize, usize)>) -> Vec<(usize, usize)> {
    undirected
        .into_iter()
        .flat_map(|(a, b)| [(a, b), (b, a)])
        .collect()
}

fn undirected_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Ring lattice of degree `k`, then each lattice edge `(u, u + j)` is rewired to a
/// uniformly chosen new endpoint with probability `p`, avoiding self-loops and
/// duplicate edges.
pub(crate) fn watts_strogatz(
    n: usize,
    k: usize,
    p: f64,
    rng: &mut impl Rng,
) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for j in 1..=k / 2 {
        for u in 0..n {
            edges.insert(undirected_key(u, (u + j) % n));
        }
    }
    let degree = |edges: &BTreeSet<(usize, usize)>, u: usize| {
        edges.iter().filter(|&&(a, b)| a == u || b == u).count()
    };
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if rng.random::<f64>() >= p {
                continue;
            }
            if !edges.contains(&undirected_key(u, v)) || degree(&edges, u) >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !edges.contains(&undirected_key(u, w)) {
                    break w;
                }
            };
            edges.remove(&undirected_key(u, v));
            edges.insert(undirected_key(u, w));
        }
    }
    edges
}

/// Starts from a complete graph on `m` nodes; each later node attaches to `m`
/// distinct existing nodes chosen with probability proportional to degree.
/// Edge count is `m(m-1)/2 + (n-m)·m`.
pub(crate) fn barabasi_albert(n: usize, m: usize, rng: &mut impl Rng) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    // Every node appears once per incident edge, so a uniform draw is degree-weighted.
    let mut endpoints: Vec<usize> = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            edges.insert((a, b));
            endpoints.extend([a, b]);
        }
    }
    for node in m..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            let t = if endpoints.is_empty() {
                rng.random_range(0..node)
            } else {
                endpoints[rng.random_range(0..endpoints.len())]
            };
            targets.insert(t);
        }
        for t in targets {
            edges.insert(undirected_key(node, t));
            endpoints.extend([node, t]);
        }
    }
    edges
}
