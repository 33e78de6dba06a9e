//! Ordered trivalent graphs.
//!
//! A graph on `n` vertices is an involution `iota` on the half-edges
//! `0..3n`, where half-edge `h` sits at vertex `h / 3` in slot `h % 3`.
//! Fixed points are leaves. Ordered graphs are identified with these
//! involutions, so enumeration is enumeration of partial matchings.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use serde_json::{json, Value};
use thiserror::Error;

use crate::coeff::{binomial, double_factorial, factorial, int, Rational};
use crate::polyring::{Monomial, Polynomial, RingDescriptor, Variable};
use crate::series::{master_shape, xy_shape, ClosedForm, RSeries, SeriesError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid graph: {0}")]
    Invalid(String),
    #[error("a component has Euler characteristic {0} >= 0 and therefore no core")]
    NonNegativeComponent(i64),
    #[error("bound exceeded: {0}")]
    Bound(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Largest vertex count accepted by the enumerators.
pub const MAX_VERTICES: usize = 6;

/// Largest number of partial matchings the direct enumerator will visit.
pub const MAX_MATCHINGS: u64 = 40_000_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Graph {
    iota: Vec<usize>,
}

impl Graph {
    pub fn new(iota: Vec<usize>) -> Result<Self, GraphError> {
        if !iota.len().is_multiple_of(3) {
            return Err(GraphError::Invalid(format!("{} half-edges is not a multiple of 3", iota.len())));
        }
        for (h, &g) in iota.iter().enumerate() {
            if g >= iota.len() || iota[g] != h {
                return Err(GraphError::Invalid(format!("half-edge {h} is not part of an involution")));
            }
        }
        Ok(Self { iota })
    }

    /// Graph on `n` vertices with the given half-edge pairs; the remaining
    /// half-edges are leaves.
    pub fn from_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut iota: Vec<usize> = (0..3 * n).collect();
        for &(a, b) in pairs {
            if a == b || a >= 3 * n || b >= 3 * n || iota[a] != a || iota[b] != b {
                return Err(GraphError::Invalid(format!("bad pair {a}-{b}")));
            }
            iota[a] = b;
            iota[b] = a;
        }
        Ok(Self { iota })
    }

    pub fn empty() -> Self {
        Self { iota: Vec::new() }
    }

    pub fn num_vertices(&self) -> usize {
        self.iota.len() / 3
    }

    pub fn num_half_edges(&self) -> usize {
        self.iota.len()
    }

    pub fn iota(&self, h: usize) -> usize {
        self.iota[h]
    }

    pub fn tau(&self, h: usize) -> usize {
        h / 3
    }

    pub fn is_leaf(&self, h: usize) -> bool {
        self.iota[h] == h
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.iota.len()).filter(|&h| self.is_leaf(h)).collect()
    }

    pub fn num_leaves(&self) -> usize {
        self.iota.iter().enumerate().filter(|&(h, &g)| h == g).count()
    }

    /// Edges as `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.iota.len()).filter(|&h| self.iota[h] > h).map(|h| (h, self.iota[h])).collect()
    }

    pub fn num_edges(&self) -> usize {
        (self.iota.len() - self.num_leaves()) / 2
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64
    }

    /// Component index of each vertex, numbered by smallest vertex.
    pub fn component_ids(&self) -> Vec<usize> {
        let n = self.num_vertices();
        let mut ids = vec![usize::MAX; n];
        let mut next = 0;
        for start in 0..n {
            if ids[start] != usize::MAX {
                continue;
            }
            ids[start] = next;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for h in 3 * v..3 * v + 3 {
                    let w = self.tau(self.iota[h]);
                    if ids[w] == usize::MAX {
                        ids[w] = next;
                        queue.push_back(w);
                    }
                }
            }
            next += 1;
        }
        ids
    }

    /// Vertex lists of the connected components.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let ids = self.component_ids();
        let count = ids.iter().map(|&i| i + 1).max().unwrap_or(0);
        let mut out = vec![Vec::new(); count];
        for (v, &c) in ids.iter().enumerate() {
            out[c].push(v);
        }
        out
    }

    pub fn num_components(&self) -> usize {
        self.component_ids().iter().map(|&i| i + 1).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        self.num_components() == 1
    }

    /// `(vertices, leaves)` of every component.
    pub fn component_stats(&self) -> Vec<(usize, usize)> {
        let ids = self.component_ids();
        let count = ids.iter().map(|&i| i + 1).max().unwrap_or(0);
        let mut out = vec![(0, 0); count];
        for (v, &c) in ids.iter().enumerate() {
            out[c].0 += 1;
            out[c].1 += (3 * v..3 * v + 3).filter(|&h| self.is_leaf(h)).count();
        }
        out
    }

    /// Euler characteristics of the components.
    pub fn component_euler(&self) -> Vec<i64> {
        self.component_stats().iter().map(|&(v, l)| (l as i64 - v as i64) / 2).collect()
    }

    /// `n|a-b,c-d,...|l1,l2,...` with sorted pairs and leaves.
    pub fn encoding(&self) -> String {
        let pairs: Vec<String> = self.edges().iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let leaves: Vec<String> = self.leaves().iter().map(usize::to_string).collect();
        format!("{}|{}|{}", self.num_vertices(), pairs.join(","), leaves.join(","))
    }

    /// Subgraph on `vertices` (kept in the given order); half-edges paired
    /// outside the subgraph become leaves.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut pos = vec![usize::MAX; self.num_vertices()];
        for (i, &v) in vertices.iter().enumerate() {
            pos[v] = i;
        }
        let map = |h: usize| pos[h / 3].checked_mul(3).map(|b| b + h % 3);
        let mut iota = Vec::with_capacity(3 * vertices.len());
        for &v in vertices {
            for h in 3 * v..3 * v + 3 {
                let own = map(h).expect("selected vertex");
                iota.push(map(self.iota[h]).unwrap_or(own));
            }
        }
        Graph { iota }
    }

    /// Loops, leaves and edge multiplicities; two graphs with the same
    /// signature differ only by the slot order at each vertex.
    pub fn signature(&self) -> MultigraphSignature {
        let n = self.num_vertices();
        let mut sig = MultigraphSignature {
            leaves: vec![0; n],
            loops: vec![0; n],
            adjacency: vec![vec![0; n]; n],
        };
        for h in 0..self.iota.len() {
            let g = self.iota[h];
            let (v, w) = (h / 3, g / 3);
            if g == h {
                sig.leaves[v] += 1;
            } else if v == w {
                if h < g {
                    sig.loops[v] += 1;
                }
            } else {
                sig.adjacency[v][w] += 1;
            }
        }
        sig
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.num_vertices(),
            "edges": self.edges().iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
            "leaves": self.leaves(),
            "euler_characteristic": self.euler_characteristic(),
            "encoding": self.encoding(),
        })
    }
}

impl fmt::Display for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encoding())
    }
}

impl FromStr for Graph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::Invalid(format!("cannot parse graph encoding {s:?}"));
        let parts: Vec<&str> = s.trim().split('|').collect();
        let [n, pairs, leaves] = parts.as_slice() else {
            return Err(bad());
        };
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        let mut list = Vec::new();
        for p in pairs.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (a, b) = p.split_once('-').ok_or_else(bad)?;
            list.push((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?));
        }
        let g = Graph::from_pairs(n, &list)?;
        let declared: Vec<usize> = leaves
            .split(',')
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| l.parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        if declared != g.leaves() {
            return Err(GraphError::Invalid(format!("leaf list of {s:?} does not match its pairs")));
        }
        Ok(g)
    }
}

/// The multigraph underlying an ordered trivalent graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultigraphSignature {
    pub leaves: Vec<u8>,
    pub loops: Vec<u8>,
    pub adjacency: Vec<Vec<u8>>,
}

impl MultigraphSignature {
    /// Number of ordered graphs (slot assignments) with this signature.
    pub fn multiplicity(&self) -> u64 {
        let fact = |k: u8| -> u64 { (1..=k as u64).product() };
        let n = self.leaves.len();
        let mut m = 1u64;
        for v in 0..n {
            let mut denom = fact(self.leaves[v]) * fact(2 * self.loops[v]);
            for u in 0..n {
                if u != v {
                    denom *= fact(self.adjacency[v][u]);
                }
            }
            m *= 6 / denom;
            // pairings of the loop slots
            m *= (1..=self.loops[v] as u64).map(|i| 2 * i - 1).product::<u64>();
        }
        for v in 0..n {
            for u in v + 1..n {
                m *= fact(self.adjacency[v][u]);
            }
        }
        m
    }

    /// An ordered graph with this signature.
    pub fn representative(&self) -> Graph {
        let n = self.leaves.len();
        let mut next = vec![0usize; n];
        let mut pairs = Vec::new();
        fn take(v: usize, next: &mut [usize]) -> usize {
            let h = 3 * v + next[v];
            next[v] += 1;
            h
        }
        for v in 0..n {
            for u in v + 1..n {
                for _ in 0..self.adjacency[v][u] {
                    let a = take(v, &mut next);
                    let b = take(u, &mut next);
                    pairs.push((a, b));
                }
            }
            for _ in 0..self.loops[v] {
                let a = take(v, &mut next);
                let b = take(v, &mut next);
                pairs.push((a, b));
            }
        }
        Graph::from_pairs(n, &pairs).expect("signature has degree 3 everywhere")
    }
}

/// Half-edges that are leaves or point toward a tree.
pub fn superfluous_halfedges(g: &Graph) -> Vec<bool> {
    let n = g.num_vertices();
    let mut out = vec![false; g.num_half_edges()];
    let mut seen = vec![false; n];
    for (h, flag) in out.iter_mut().enumerate() {
        let partner = g.iota(h);
        if partner == h {
            *flag = true;
            continue;
        }
        seen.iter_mut().for_each(|s| *s = false);
        let (origin, far) = (g.tau(h), g.tau(partner));
        seen[far] = true;
        let mut queue = VecDeque::from([far]);
        let mut reaches_origin = far == origin;
        let mut vertices = 0i64;
        let mut half_edges = 0i64;
        while let Some(v) = queue.pop_front() {
            vertices += 1;
            for x in 3 * v..3 * v + 3 {
                let y = g.iota(x);
                if y == x || x == h || x == partner {
                    continue;
                }
                half_edges += 1;
                let w = g.tau(y);
                if w == origin {
                    reaches_origin = true;
                }
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        *flag = !reaches_origin && vertices - half_edges / 2 == 1;
    }
    out
}

pub fn superfluous_vertices(g: &Graph) -> Vec<bool> {
    let sup = superfluous_halfedges(g);
    (0..g.num_vertices()).map(|v| sup[3 * v..3 * v + 3].iter().any(|&s| s)).collect()
}

/// A connected component of the insertion forest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionTree {
    /// Vertices, as indices into the forest.
    pub vertices: Vec<usize>,
    /// Forest leaves that are not leaves of the input graph.
    pub roots: Vec<usize>,
    /// Core half-edges the roots were attached to, in the same order.
    pub attached: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoreDecomposition {
    pub core: Graph,
    /// Original index of each core vertex.
    pub core_vertices: Vec<usize>,
    pub forest: Graph,
    /// Original index of each forest vertex.
    pub forest_vertices: Vec<usize>,
    pub trees: Vec<InsertionTree>,
    /// For every half-edge of a core vertex, the sequence of original
    /// half-edges leading to its partner in the core.
    pub sequences: BTreeMap<usize, Vec<usize>>,
}

pub fn core_decomposition(g: &Graph) -> Result<CoreDecomposition, GraphError> {
    if let Some(&chi) = g.component_euler().iter().find(|&&c| c >= 0) {
        return Err(GraphError::NonNegativeComponent(chi));
    }
    let sup_h = superfluous_halfedges(g);
    let sup_v: Vec<bool> = (0..g.num_vertices()).map(|v| sup_h[3 * v..3 * v + 3].iter().any(|&s| s)).collect();
    let core_vertices: Vec<usize> = (0..g.num_vertices()).filter(|&v| !sup_v[v]).collect();
    let forest_vertices: Vec<usize> = (0..g.num_vertices()).filter(|&v| sup_v[v]).collect();

    let mut core_pos = vec![usize::MAX; g.num_vertices()];
    for (i, &v) in core_vertices.iter().enumerate() {
        core_pos[v] = i;
    }
    let to_core = |h: usize| 3 * core_pos[h / 3] + h % 3;

    let mut core_iota = vec![0; 3 * core_vertices.len()];
    let mut sequences = BTreeMap::new();
    for &v in &core_vertices {
        for h0 in 3 * v..3 * v + 3 {
            let mut seq = vec![h0];
            loop {
                let h = g.iota(*seq.last().expect("nonempty"));
                seq.push(h);
                let w = g.tau(h);
                if !sup_v[w] {
                    break;
                }
                let next: Vec<usize> = (3 * w..3 * w + 3).filter(|&x| x != h && !sup_h[x]).collect();
                if next.len() != 1 || seq.len() > g.num_half_edges() + 1 {
                    return Err(GraphError::Invalid(format!(
                        "core sequence from half-edge {h0} is not well defined at vertex {w}"
                    )));
                }
                seq.push(next[0]);
            }
            core_iota[to_core(h0)] = to_core(*seq.last().expect("nonempty"));
            sequences.insert(h0, seq);
        }
    }
    let core = Graph::new(core_iota)?;

    let forest = g.induced(&forest_vertices);
    let mut trees = Vec::new();
    for comp in forest.components() {
        let mut roots = Vec::new();
        let mut attached = Vec::new();
        for &fv in &comp {
            for s in 0..3 {
                let fh = 3 * fv + s;
                let original = 3 * forest_vertices[fv] + s;
                if forest.is_leaf(fh) && !g.is_leaf(original) {
                    roots.push(fh);
                    attached.push(to_core(g.iota(original)));
                }
            }
        }
        if attached.len() == 2 && attached[0] > attached[1] {
            roots.swap(0, 1);
            attached.swap(0, 1);
        }
        trees.push(InsertionTree { vertices: comp, roots, attached });
    }
    Ok(CoreDecomposition { core, core_vertices, forest, forest_vertices, trees, sequences })
}

impl CoreDecomposition {
    /// The input graph, rebuilt from the core, the forest and the recorded
    /// attachments.
    pub fn reconstruct(&self) -> Result<Graph, GraphError> {
        let n = self.core_vertices.len() + self.forest_vertices.len();
        let core_map = |h: usize| 3 * self.core_vertices[h / 3] + h % 3;
        let forest_map = |h: usize| 3 * self.forest_vertices[h / 3] + h % 3;
        let mut iota = vec![usize::MAX; 3 * n];
        for h in 0..self.core.num_half_edges() {
            iota[core_map(h)] = core_map(self.core.iota(h));
        }
        for h in 0..self.forest.num_half_edges() {
            iota[forest_map(h)] = forest_map(self.forest.iota(h));
        }
        for t in &self.trees {
            for (&r, &c) in t.roots.iter().zip(&t.attached) {
                iota[core_map(c)] = forest_map(r);
                iota[forest_map(r)] = core_map(c);
            }
        }
        Graph::new(iota)
    }

    /// Graph with the core vertices first and the forest vertices after
    /// them, each tree inserted into the chosen core edge. The first root
    /// of a tree is joined to the first half-edge of its edge.
    pub fn reinsert(&self, edges: &[(usize, usize)]) -> Result<Graph, GraphError> {
        if edges.len() != self.trees.len() {
            return Err(GraphError::Invalid(format!("{} edges for {} trees", edges.len(), self.trees.len())));
        }
        let offset = self.core.num_half_edges();
        let mut iota: Vec<usize> = (0..self.core.num_half_edges()).map(|h| self.core.iota(h)).collect();
        iota.extend((0..self.forest.num_half_edges()).map(|h| self.forest.iota(h) + offset));
        for (t, &(a, b)) in self.trees.iter().zip(edges) {
            if t.roots.len() != 2 {
                return Err(GraphError::Invalid("insertion tree without exactly two roots".into()));
            }
            if a >= offset || iota[a] != b || a == b {
                return Err(GraphError::Invalid(format!("{a}-{b} is not an unused core edge")));
            }
            let (ra, rb) = (t.roots[0] + offset, t.roots[1] + offset);
            iota[a] = ra;
            iota[ra] = a;
            iota[b] = rb;
            iota[rb] = b;
        }
        Graph::new(iota)
    }

    /// Every reinsertion of the trees, in order, into an increasing choice
    /// of distinct core edges.
    pub fn reinsertions(&self) -> Result<Vec<Graph>, GraphError> {
        let edges = self.core.edges();
        let k = self.trees.len();
        let mut out = Vec::new();
        let mut choice: Vec<usize> = (0..k).collect();
        if k > edges.len() {
            return Ok(out);
        }
        loop {
            let chosen: Vec<(usize, usize)> = choice.iter().map(|&i| edges[i]).collect();
            out.push(self.reinsert(&chosen)?);
            // next k-subset in lexicographic order
            let mut i = k;
            while i > 0 && choice[i - 1] == edges.len() - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            choice[i - 1] += 1;
            for j in i..k {
                choice[j] = choice[j - 1] + 1;
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "core": self.core.to_json(),
            "core_vertices": self.core_vertices,
            "forest": self.forest.to_json(),
            "forest_vertices": self.forest_vertices,
            "trees": self.trees.iter().map(|t| json!({
                "vertices": t.vertices,
                "roots": t.roots,
                "attached": t.attached,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Checks a connected graph with negative Euler characteristic against its
/// decomposition and returns a description of every failed property.
pub fn decomposition_violations(g: &Graph) -> Vec<String> {
    let d = match core_decomposition(g) {
        Ok(d) => d,
        Err(e) => return vec![e.to_string()],
    };
    let mut out = Vec::new();
    if d.core.euler_characteristic() != g.euler_characteristic() {
        out.push("core changes the Euler characteristic".to_string());
    }
    if d.core.num_leaves() != 0 {
        out.push("core has leaves".to_string());
    }
    if d.trees.iter().any(|t| t.roots.len() != 2) {
        out.push("insertion tree without exactly two roots".to_string());
    }
    for (h0, seq) in &d.sequences {
        let back = seq.last().and_then(|last| d.sequences.get(last));
        let mut rev = seq.clone();
        rev.reverse();
        if back != Some(&rev) {
            out.push(format!("sequence from {h0} is not reflected"));
        }
    }
    match d.reconstruct() {
        Ok(r) if &r == g => {}
        _ => out.push("reconstruction differs".to_string()),
    }
    match d.reinsertions() {
        Ok(graphs) => {
            let expected = binomial(d.core.num_edges() as i64, d.trees.len() as i64);
            if int(graphs.len() as i64) != expected {
                out.push(format!("{} reinsertions, expected {expected}", graphs.len()));
            }
            let bad = graphs.iter().any(|r| {
                r.num_vertices() != g.num_vertices()
                    || r.num_leaves() != g.num_leaves()
                    || r.euler_characteristic() != g.euler_characteristic()
                    || !r.is_connected()
            });
            if bad {
                out.push("a reinsertion changes the vertex, leaf or component data".to_string());
            }
        }
        Err(e) => out.push(e.to_string()),
    }
    out
}

/// Sums class multiplicities by leaf count and compares with the number of
/// partial matchings for every leaf count.
pub fn multiplicities_reconcile(n: usize) -> Result<bool, GraphError> {
    let mut by_leaves: BTreeMap<usize, u64> = BTreeMap::new();
    for class in multigraph_classes(n, &GraphFilter::any())? {
        if class.representative.signature() != class.signature {
            return Ok(false);
        }
        *by_leaves.entry(class.representative.num_leaves()).or_insert(0) += class.multiplicity;
    }
    Ok((0..=3 * n).all(|l| by_leaves.get(&l).copied().unwrap_or(0) == matching_count(n, l)))
}

/// Restriction on the Euler characteristic of every component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiFilter {
    Any,
    Negative,
    Zero,
    Positive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphFilter {
    pub chi: ChiFilter,
    pub connected: bool,
    pub leaf_free: bool,
    pub leaves: Option<usize>,
}

impl GraphFilter {
    pub fn any() -> Self {
        Self { chi: ChiFilter::Any, connected: false, leaf_free: false, leaves: None }
    }

    pub fn negative_only() -> Self {
        Self { chi: ChiFilter::Negative, ..Self::any() }
    }

    pub fn zero_only() -> Self {
        Self { chi: ChiFilter::Zero, ..Self::any() }
    }

    pub fn positive_only() -> Self {
        Self { chi: ChiFilter::Positive, ..Self::any() }
    }

    pub fn leaf_free() -> Self {
        Self { leaf_free: true, ..Self::any() }
    }

    pub fn connected(mut self) -> Self {
        self.connected = true;
        self
    }

    pub fn with_leaves(mut self, leaves: usize) -> Self {
        self.leaves = Some(leaves);
        self
    }

    /// Leaf counts compatible with the filter on `n` vertices.
    pub fn leaf_counts(&self, n: usize) -> Vec<usize> {
        if n == 0 {
            // the empty graph has no components to violate a condition
            let ok = !self.connected && self.leaves.is_none_or(|l| l == 0);
            return if ok { vec![0] } else { Vec::new() };
        }
        (0..=3 * n)
            .filter(|&l| (3 * n - l).is_multiple_of(2))
            .filter(|&l| !self.leaf_free || l == 0)
            .filter(|&l| self.leaves.is_none_or(|x| x == l))
            .filter(|&l| match self.chi {
                ChiFilter::Any => true,
                ChiFilter::Negative => l < n,
                ChiFilter::Zero => l == n,
                ChiFilter::Positive => l > n,
            })
            .collect()
    }

    pub fn accepts(&self, g: &Graph) -> bool {
        if self.leaf_free && g.num_leaves() > 0 {
            return false;
        }
        if self.leaves.is_some_and(|l| l != g.num_leaves()) {
            return false;
        }
        if !self.connected && self.chi == ChiFilter::Any {
            return true;
        }
        let stats = g.component_stats();
        if self.connected && stats.len() != 1 {
            return false;
        }
        stats.iter().all(|&(v, l)| match self.chi {
            ChiFilter::Any => true,
            ChiFilter::Negative => l < v,
            ChiFilter::Zero => l == v,
            ChiFilter::Positive => l > v,
        })
    }
}

/// `C(3n, leaves) (3n - leaves - 1)!!`, the number of ordered graphs on `n`
/// vertices with the given number of leaves.
pub fn matching_count(n: usize, leaves: usize) -> u64 {
    let h = 3 * n;
    if leaves > h || (h - leaves) % 2 == 1 {
        return 0;
    }
    let mut c = 1u64;
    for i in 0..leaves as u64 {
        c = c * (h as u64 - i) / (i + 1);
    }
    let mut df = 1u64;
    let mut k = (h - leaves) as u64;
    while k > 1 {
        df *= k - 1;
        k -= 2;
    }
    c * df
}

fn check_bounds(n: usize, filter: &GraphFilter) -> Result<(), GraphError> {
    if n > MAX_VERTICES {
        return Err(GraphError::Bound(format!("{n} vertices > {MAX_VERTICES}")));
    }
    let total: u64 = filter.leaf_counts(n).iter().map(|&l| matching_count(n, l)).sum();
    if total > MAX_MATCHINGS {
        return Err(GraphError::Bound(format!(
            "{total} partial matchings on {n} vertices exceed {MAX_MATCHINGS}; restrict the leaf count"
        )));
    }
    Ok(())
}

fn matchings_rec(iota: &mut Vec<usize>, from: usize, leaves_left: usize, visit: &mut dyn FnMut(&[usize])) {
    let Some(h) = (from..iota.len()).find(|&x| iota[x] == usize::MAX) else {
        visit(iota);
        return;
    };
    let free = (h..iota.len()).filter(|&x| iota[x] == usize::MAX).count();
    if leaves_left > 0 {
        iota[h] = h;
        matchings_rec(iota, h + 1, leaves_left - 1, visit);
        iota[h] = usize::MAX;
    }
    if free >= leaves_left + 2 {
        for g in h + 1..iota.len() {
            if iota[g] == usize::MAX {
                iota[h] = g;
                iota[g] = h;
                matchings_rec(iota, h + 1, leaves_left, visit);
                iota[g] = usize::MAX;
            }
        }
        iota[h] = usize::MAX;
    }
}

/// Calls `visit` on every ordered trivalent graph with `n` vertices passing
/// the filter. Returns the number of graphs visited.
pub fn for_each_ordered_trivalent(
    n: usize,
    filter: &GraphFilter,
    mut visit: impl FnMut(&Graph),
) -> Result<u64, GraphError> {
    check_bounds(n, filter)?;
    let mut count = 0;
    for leaves in filter.leaf_counts(n) {
        let mut iota = vec![usize::MAX; 3 * n];
        matchings_rec(&mut iota, 0, leaves, &mut |m| {
            let g = Graph { iota: m.to_vec() };
            if filter.accepts(&g) {
                count += 1;
                visit(&g);
            }
        });
    }
    Ok(count)
}

pub fn enumerate_ordered_trivalent(n: usize, filter: &GraphFilter) -> Result<Vec<Graph>, GraphError> {
    let mut out = Vec::new();
    for_each_ordered_trivalent(n, filter, |g| out.push(g.clone()))?;
    Ok(out)
}

/// One vertex-labeled multigraph together with the number of ordered
/// graphs realizing it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultigraphClass {
    pub signature: MultigraphSignature,
    pub representative: Graph,
    pub multiplicity: u64,
}

/// Every vertex-labeled trivalent multigraph on `n` vertices whose
/// representative passes the filter. Filters only see properties that do
/// not depend on the slot order, so the classes partition the ordered
/// graphs the filter accepts.
pub fn multigraph_classes(n: usize, filter: &GraphFilter) -> Result<Vec<MultigraphClass>, GraphError> {
    if n > MAX_VERTICES {
        return Err(GraphError::Bound(format!("{n} vertices > {MAX_VERTICES}")));
    }
    let allowed = filter.leaf_counts(n);
    let mut sig = MultigraphSignature { leaves: vec![0; n], loops: vec![0; n], adjacency: vec![vec![0; n]; n] };
    let mut cap = vec![3u8; n];
    let mut out = Vec::new();
    multigraph_rec(0, 1, &mut sig, &mut cap, &allowed, filter, &mut out);
    Ok(out)
}

fn multigraph_rec(
    v: usize,
    u: usize,
    sig: &mut MultigraphSignature,
    cap: &mut Vec<u8>,
    allowed: &[usize],
    filter: &GraphFilter,
    out: &mut Vec<MultigraphClass>,
) {
    let n = sig.leaves.len();
    if v == n {
        let leaves: usize = sig.leaves.iter().map(|&l| l as usize).sum();
        if allowed.contains(&leaves) {
            let representative = sig.representative();
            if filter.accepts(&representative) {
                out.push(MultigraphClass {
                    signature: sig.clone(),
                    multiplicity: sig.multiplicity(),
                    representative,
                });
            }
        }
        return;
    }
    if u == n {
        // remaining capacity at v splits into loops and leaves
        let c = cap[v];
        for loops in 0..=c / 2 {
            sig.loops[v] = loops;
            sig.leaves[v] = c - 2 * loops;
            multigraph_rec(v + 1, v + 2, sig, cap, allowed, filter, out);
        }
        sig.loops[v] = 0;
        sig.leaves[v] = 0;
        return;
    }
    let max = cap[v].min(cap[u]);
    for a in 0..=max {
        sig.adjacency[v][u] = a;
        sig.adjacency[u][v] = a;
        cap[v] -= a;
        cap[u] -= a;
        multigraph_rec(v, u + 1, sig, cap, allowed, filter, out);
        cap[v] += a;
        cap[u] += a;
    }
    sig.adjacency[v][u] = 0;
    sig.adjacency[u][v] = 0;
}

/// Number of ordered trivalent trees on `n` vertices with one leaf marked
/// as the root, by enumeration.
pub fn rooted_tree_count(n: usize) -> Result<u64, GraphError> {
    let mut total = 0u64;
    for_each_ordered_trivalent(n, &GraphFilter::positive_only().connected(), |g| {
        total += g.num_leaves() as u64;
    })?;
    Ok(total)
}

/// `(2n)! / (n+1)! 3^n`.
pub fn rooted_tree_formula(n: u32) -> Rational {
    factorial(2 * n as u64) / factorial(n as u64 + 1) * int(3i64.pow(n))
}

/// The generating function named by `name`, with coefficients read off an
/// enumeration: `#graphs(n, m) x^n / n! y^m`.
pub fn enumerated_gf(name: ClosedForm, order: u32) -> Result<RSeries, GraphError> {
    let mut s = xy_shape(order);
    for n in 0..=order as usize {
        let inv = Rational::one() / factorial(n as u64);
        let mut counts: BTreeMap<u32, u64> = BTreeMap::new();
        let mut bump = |m: usize, c: u64| *counts.entry(m as u32).or_insert(0) += c;
        match name {
            ClosedForm::Trr => {
                for_each_ordered_trivalent(n, &GraphFilter::positive_only().connected(), |g| {
                    let l = g.num_leaves();
                    bump(l - 2, (l * (l - 1)) as u64);
                })?;
            }
            ClosedForm::G0 | ClosedForm::G0c | ClosedForm::Gplus | ClosedForm::GplusC => {
                let base = match name {
                    ClosedForm::G0 | ClosedForm::G0c => GraphFilter::zero_only(),
                    _ => GraphFilter::positive_only(),
                };
                let filter = if matches!(name, ClosedForm::G0c | ClosedForm::GplusC) { base.connected() } else { base };
                for_each_ordered_trivalent(n, &filter, |g| bump(g.num_leaves(), 1))?;
            }
            ClosedForm::GminusLF => {
                for_each_ordered_trivalent(n, &GraphFilter::leaf_free(), |_| bump(0, 1))?;
            }
        }
        for (m, c) in counts {
            s.add_term(vec![n as u32, m], int(c as i64) * &inv);
        }
    }
    Ok(s)
}

/// The four-factor graph sum whose coefficients are compared with the
/// master series: leaf-free graphs in `xu`, zero-characteristic graphs
/// marked by `w` per component, forests, and doubly rooted forests marked
/// by `z` per tree. Every factor but the last carries `(-1)` per component.
pub fn graph_master_product(order: u32) -> Result<RSeries, GraphError> {
    let shape = master_shape(order);
    let mut leaf_free = shape.zero_like();
    let mut zero = shape.zero_like();
    let mut forests = shape.zero_like();
    let mut rooted = shape.zero_like();
    let sign = |c: usize| if c.is_multiple_of(2) { int(1) } else { int(-1) };
    for n in 0..=order as usize {
        let inv = Rational::one() / factorial(n as u64);
        let x = n as u32;
        for_each_ordered_trivalent(n, &GraphFilter::leaf_free(), |g| {
            leaf_free.add_term(vec![x, 0, 0, 0, x], sign(g.num_components()) * &inv);
        })?;
        for_each_ordered_trivalent(n, &GraphFilter::zero_only(), |g| {
            let c = g.num_components();
            zero.add_term(vec![x, x, 0, c as u32, 0], sign(c) * &inv);
        })?;
        for_each_ordered_trivalent(n, &GraphFilter::positive_only(), |g| {
            let stats = g.component_stats();
            let l = g.num_leaves() as u32;
            forests.add_term(vec![x, l, 0, 0, 0], sign(stats.len()) * &inv);
            let roots: u64 = stats.iter().map(|&(_, l)| (l * (l - 1)) as u64).product();
            let c = stats.len() as u32;
            rooted.add_term(vec![x, l - 2 * c, c, 0, 0], int(roots as i64) * &inv);
        })?;
    }
    Ok(&(&(&leaf_free * &zero) * &forests) * &rooted)
}

/// `(3k)! sum_r (2r-1)!! phi^r sum_G prod_C (-q[0, V_C - L_C])` over
/// ordered graphs with `2k` vertices and `2r` leaves, in the extended ring.
pub fn graph_sum_oracle(k: u32) -> Result<Polynomial, GraphError> {
    if !(1..=2).contains(&k) {
        return Err(GraphError::Bound(format!("graph sum oracle needs k in 1..=2, got {k}")));
    }
    let ring = RingDescriptor::LambdaQHat;
    let mut terms: BTreeMap<Monomial, Rational> = BTreeMap::new();
    for_each_ordered_trivalent(2 * k as usize, &GraphFilter::any(), |g| {
        let stats = g.component_stats();
        let r = g.num_leaves() as i32 / 2;
        let mut m = Monomial::one();
        m.bump(Variable::Phi, r);
        for &(v, l) in &stats {
            m.bump(Variable::Q(0, v as i32 - l as i32), 1);
        }
        let sign = if stats.len() % 2 == 0 { 1 } else { -1 };
        let c = double_factorial(2 * r as i64 - 1).expect("r >= 0") * int(sign);
        *terms.entry(m).or_insert_with(|| int(0)) += c;
    })?;
    let scale = factorial(3 * k as u64);
    Ok(Polynomial::from_terms(ring, terms.into_iter().map(|(m, c)| (m, c * &scale)))
        .expect("graph monomials lie in the extended ring"))
}

#[cfg(test)]
mod tests;
