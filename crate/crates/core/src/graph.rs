// SPDX-License-Identifier: Apache-2.0

//! Exchange graphs: vertices are unlabeled clusters, edges join clusters that
//! share all but one variable.
//!
//! Enumeration is a level-synchronous breadth-first search from the initial
//! seed. Each level's mutations are computed in parallel and merged in frontier
//! order, so vertex numbering does not depend on the number of workers.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::LaurentPoly;
use crate::matrix::IntMatrix;
use crate::seed::{ExchangeMatrix, LabeledSeed, SeedError, SeedPattern, TreePath};

/// Index into the graph's variable table; ids follow the canonical variable order.
pub type VarId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("exchange graph is incomplete ({0}); a complete enumeration is required")]
    Incomplete(Completeness),
    #[error("variable set {0:?} is not contained in any cluster")]
    NotAFace(Vec<String>),
    #[error("unknown cluster variable {0:?}")]
    UnknownVariable(String),
    #[error("vertex {0} does not exist")]
    UnknownVertex(usize),
    #[error("vertices {0} and {1} are not connected")]
    Disconnected(usize, usize),
    #[error("malformed graph: {0}")]
    Malformed(String),
    #[error(transparent)]
    Seed(#[from] SeedError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Completeness {
    Complete,
    VertexBudgetExceeded,
    DepthBudgetExceeded,
}

impl std::fmt::Display for Completeness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Completeness::Complete => "complete",
            Completeness::VertexBudgetExceeded => "vertex budget exceeded",
            Completeness::DepthBudgetExceeded => "depth budget exceeded",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budgets {
    pub max_vertices: usize,
    pub max_depth: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_vertices: 100_000,
            max_depth: 64,
        }
    }
}

/// An unlabeled cluster: distinct variables in canonical order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cluster(Vec<LaurentPoly>);

impl Cluster {
    /// `None` if two variables coincide.
    pub fn new(mut variables: Vec<LaurentPoly>) -> Option<Self> {
        variables.sort();
        if variables.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        Some(Cluster(variables))
    }

    pub fn variables(&self) -> &[LaurentPoly] {
        &self.0
    }

    pub fn strings(&self) -> Vec<String> {
        self.0.iter().map(ToString::to_string).collect()
    }
}

#[derive(Debug, Clone)]
struct Vertex {
    /// Sorted variable ids.
    cluster: Vec<VarId>,
    /// Variable ids in label order at the witness seed.
    labels: Vec<VarId>,
    witness: TreePath,
    /// Vertex reached from the witness seed by each direction.
    exchange: Vec<Option<usize>>,
}

/// The full subgraph on clusters containing `defining_set`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Face {
    pub defining_set: Vec<VarId>,
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl Face {
    pub fn contains(&self, v: usize) -> bool {
        self.vertices.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// All shortest paths between two vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geodesics {
    pub length: usize,
    pub paths: Vec<Vec<usize>>,
    pub truncated: bool,
}

/// Results of the post-hoc structural checks on an enumerated graph.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StructureReport {
    /// Vertices whose degree differs from the rank.
    pub degree_violations: Vec<usize>,
    /// Pairs where stored adjacency and the `|intersection| = n-1` criterion disagree.
    pub edge_mismatches: Vec<(usize, usize)>,
    /// `(n-1)`-subsets of clusters not contained in exactly two clusters.
    pub axiom_violations: Vec<Vec<String>>,
    pub connected: bool,
}

impl StructureReport {
    pub fn is_clean(&self) -> bool {
        self.degree_violations.is_empty()
            && self.edge_mismatches.is_empty()
            && self.axiom_violations.is_empty()
            && self.connected
    }
}

#[derive(Debug, Clone)]
pub struct ExchangeGraph {
    pattern: SeedPattern,
    variables: Vec<LaurentPoly>,
    names: Vec<String>,
    by_name: HashMap<String, VarId>,
    /// For each variable, the sorted vertices whose cluster contains it.
    containing: Vec<Vec<usize>>,
    vertices: Vec<Vertex>,
    by_cluster: HashMap<Vec<VarId>, usize>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    completeness: Completeness,
}

struct Builder {
    rank: usize,
    var_ids: HashMap<LaurentPoly, VarId>,
    variables: Vec<LaurentPoly>,
    vertices: Vec<Vertex>,
    by_cluster: HashMap<Vec<VarId>, usize>,
    edges: HashSet<(usize, usize)>,
}

impl Builder {
    fn lookup(&self, seed: &LabeledSeed) -> Option<usize> {
        let mut ids = seed
            .variables()
            .iter()
            .map(|x| self.var_ids.get(x).copied())
            .collect::<Option<Vec<_>>>()?;
        ids.sort_unstable();
        self.by_cluster.get(&ids).copied()
    }

    fn insert(&mut self, seed: &LabeledSeed) -> usize {
        let labels: Vec<VarId> = seed
            .variables()
            .iter()
            .map(|x| {
                if let Some(&id) = self.var_ids.get(x) {
                    id
                } else {
                    let id = self.variables.len();
                    self.variables.push(x.clone());
                    self.var_ids.insert(x.clone(), id);
                    id
                }
            })
            .collect();
        let mut cluster = labels.clone();
        cluster.sort_unstable();
        let idx = self.vertices.len();
        self.by_cluster.insert(cluster.clone(), idx);
        self.vertices.push(Vertex {
            cluster,
            labels,
            witness: seed.path().clone(),
            exchange: vec![None; self.rank],
        });
        idx
    }

    fn link(&mut self, v: usize, k: usize, w: usize) {
        self.vertices[v].exchange[k] = Some(w);
        self.edges.insert((v.min(w), v.max(w)));
    }
}

impl ExchangeGraph {
    /// Breadth-first closure of the initial seed under all mutations.
    ///
    /// Budget exhaustion is not an error: the partial graph is returned and
    /// flagged through [`completeness`](Self::completeness).
    pub fn enumerate(initial: &ExchangeMatrix, budgets: Budgets) -> Result<Self, GraphError> {
        let n = initial.rank();
        let seed = LabeledSeed::initial(initial.clone());
        let mut b = Builder {
            rank: n,
            var_ids: HashMap::new(),
            variables: Vec::new(),
            vertices: Vec::new(),
            by_cluster: HashMap::new(),
            edges: HashSet::new(),
        };
        let mut completeness = Completeness::Complete;
        if budgets.max_vertices == 0 {
            return Err(GraphError::Malformed("max_vertices must be positive".into()));
        }
        let root = b.insert(&seed);
        let mut frontier = vec![(root, seed)];
        let mut depth = 0usize;

        while !frontier.is_empty() {
            let expanded: Vec<Vec<(usize, LabeledSeed)>> = frontier
                .par_iter()
                .map(|(_, seed)| {
                    (0..n)
                        .filter(|&k| seed.path().last() != Some(k))
                        .map(|k| seed.mutate(k).map(|s| (k, s)))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;

            let mut next = Vec::new();
            for ((parent, _), children) in frontier.iter().zip(expanded) {
                for (k, child) in children {
                    if let Some(w) = b.lookup(&child) {
                        b.link(*parent, k, w);
                        continue;
                    }
                    if depth + 1 > budgets.max_depth {
                        completeness = Completeness::DepthBudgetExceeded;
                        continue;
                    }
                    if b.vertices.len() >= budgets.max_vertices {
                        completeness = Completeness::VertexBudgetExceeded;
                        continue;
                    }
                    let w = b.insert(&child);
                    b.link(*parent, k, w);
                    b.vertices[w].exchange[k] = Some(*parent);
                    next.push((w, child));
                }
            }
            frontier = next;
            depth += 1;
        }

        Ok(Self::finish(
            SeedPattern::new(initial.clone()),
            b.variables,
            b.vertices,
            b.edges.into_iter().collect(),
            completeness,
        ))
    }

    /// Renumbers variables canonically and builds the lookup tables.
    fn finish(
        pattern: SeedPattern,
        variables: Vec<LaurentPoly>,
        mut vertices: Vec<Vertex>,
        mut edges: Vec<(usize, usize)>,
        completeness: Completeness,
    ) -> Self {
        let mut order: Vec<VarId> = (0..variables.len()).collect();
        order.sort_by(|&a, &b| variables[a].cmp(&variables[b]));
        let mut remap = vec![0; variables.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let variables: Vec<LaurentPoly> = order.iter().map(|&i| variables[i].clone()).collect();
        let names: Vec<String> = variables.iter().map(ToString::to_string).collect();
        let by_name = names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();

        let mut containing = vec![Vec::new(); variables.len()];
        let mut by_cluster = HashMap::new();
        for (idx, v) in vertices.iter_mut().enumerate() {
            for id in v.labels.iter_mut() {
                *id = remap[*id];
            }
            v.cluster = v.labels.clone();
            v.cluster.sort_unstable();
            for &id in &v.cluster {
                containing[id].push(idx);
            }
            by_cluster.insert(v.cluster.clone(), idx);
        }

        edges.sort_unstable();
        edges.dedup();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        ExchangeGraph {
            pattern,
            variables,
            names,
            by_name,
            containing,
            vertices,
            by_cluster,
            edges,
            adjacency,
            completeness,
        }
    }

    pub fn rank(&self) -> usize {
        self.pattern.rank()
    }

    pub fn pattern(&self) -> &SeedPattern {
        &self.pattern
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn is_adjacent(&self, v: usize, w: usize) -> bool {
        self.adjacency[v].binary_search(&w).is_ok()
    }

    pub fn completeness(&self) -> Completeness {
        self.completeness
    }

    pub fn is_complete(&self) -> bool {
        self.completeness == Completeness::Complete
    }

    pub fn require_complete(&self) -> Result<(), GraphError> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(GraphError::Incomplete(self.completeness))
        }
    }

    pub fn num_variables(&self) -> usize {
        self.variables.len()
    }

    pub fn variable(&self, id: VarId) -> &LaurentPoly {
        &self.variables[id]
    }

    pub fn variable_name(&self, id: VarId) -> &str {
        &self.names[id]
    }

    pub fn var_id(&self, name: &str) -> Result<VarId, GraphError> {
        if let Some(&id) = self.by_name.get(name) {
            return Ok(id);
        }
        // Accept any spelling that parses to a known variable.
        let poly = LaurentPoly::parse(name, self.rank())
            .map_err(|_| GraphError::UnknownVariable(name.to_string()))?;
        self.by_name
            .get(&poly.to_string())
            .copied()
            .ok_or_else(|| GraphError::UnknownVariable(name.to_string()))
    }

    /// Vertices whose clusters contain the variable.
    pub fn vertices_containing(&self, id: VarId) -> &[usize] {
        &self.containing[id]
    }

    fn check_vertex(&self, v: usize) -> Result<(), GraphError> {
        if v < self.vertices.len() {
            Ok(())
        } else {
            Err(GraphError::UnknownVertex(v))
        }
    }

    /// Sorted variable ids of the cluster at `v`.
    pub fn cluster(&self, v: usize) -> &[VarId] {
        &self.vertices[v].cluster
    }

    pub fn cluster_of(&self, v: usize) -> Cluster {
        Cluster(self.vertices[v].cluster.iter().map(|&i| self.variables[i].clone()).collect())
    }

    pub fn cluster_strings(&self, v: usize) -> Vec<String> {
        self.vertices[v].cluster.iter().map(|&i| self.names[i].clone()).collect()
    }

    /// Variables in label order at the witness seed of `v`.
    pub fn labels(&self, v: usize) -> &[VarId] {
        &self.vertices[v].labels
    }

    pub fn witness(&self, v: usize) -> &TreePath {
        &self.vertices[v].witness
    }

    /// Vertex reached by mutating the witness seed of `v` in direction `k`.
    pub fn exchange(&self, v: usize, k: usize) -> Option<usize> {
        self.vertices[v].exchange[k]
    }

    pub fn vertex_of(&self, cluster: &[VarId]) -> Option<usize> {
        let mut key = cluster.to_vec();
        key.sort_unstable();
        self.by_cluster.get(&key).copied()
    }

    pub fn vertex_of_cluster(&self, cluster: &Cluster) -> Option<usize> {
        let ids = cluster
            .variables()
            .iter()
            .map(|x| self.by_name.get(&x.to_string()).copied())
            .collect::<Option<Vec<_>>>()?;
        self.vertex_of(&ids)
    }

    /// Size of `cluster(v) ∩ cluster(w)`.
    pub fn intersection_size(&self, v: usize, w: usize) -> usize {
        sorted_intersection(&self.vertices[v].cluster, &self.vertices[w].cluster).len()
    }

    pub fn contains_all(&self, v: usize, set: &[VarId]) -> bool {
        let c = &self.vertices[v].cluster;
        set.iter().all(|x| c.binary_search(x).is_ok())
    }

    /// Normalizes a variable set (sorted, deduplicated).
    pub fn var_set(&self, names: &[impl AsRef<str>]) -> Result<Vec<VarId>, GraphError> {
        let mut ids = names
            .iter()
            .map(|s| self.var_id(s.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        ids.sort_unstable();
        ids.dedup();
        Ok(ids)
    }

    pub fn set_strings(&self, set: &[VarId]) -> Vec<String> {
        set.iter().map(|&i| self.names[i].clone()).collect()
    }

    /// The face `F_U`: the full subgraph on clusters containing `u`.
    pub fn face_of(&self, u: &[VarId]) -> Result<Face, GraphError> {
        let mut set = u.to_vec();
        set.sort_unstable();
        set.dedup();
        if let Some(&bad) = set.iter().find(|&&x| x >= self.variables.len()) {
            return Err(GraphError::UnknownVariable(format!("#{bad}")));
        }
        let vertices: Vec<usize> = match set.split_first() {
            None => (0..self.vertices.len()).collect(),
            Some((&first, rest)) => self.containing[first]
                .iter()
                .copied()
                .filter(|&v| self.contains_all(v, rest))
                .collect(),
        };
        if vertices.is_empty() {
            return Err(GraphError::NotAFace(self.set_strings(&set)));
        }
        let edges = self
            .edges
            .iter()
            .copied()
            .filter(|&(a, b)| vertices.binary_search(&a).is_ok() && vertices.binary_search(&b).is_ok())
            .collect();
        Ok(Face {
            defining_set: set,
            vertices,
            edges,
        })
    }

    /// The minimal face containing `v` and `w`, defined by `cluster(v) ∩ cluster(w)`.
    pub fn minimal_face(&self, v: usize, w: usize) -> Result<Face, GraphError> {
        self.require_complete()?;
        self.check_vertex(v)?;
        self.check_vertex(w)?;
        let u = sorted_intersection(&self.vertices[v].cluster, &self.vertices[w].cluster);
        self.face_of(&u)
    }

    /// Breadth-first distances from `source`; `None` for unreachable vertices.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertices.len()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued vertices are labeled");
            for &w in &self.adjacency[v] {
                if dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// All shortest `v -> w` paths, at most `max_paths` of them.
    ///
    /// Distances are labeled from `w`, then paths are grown from `v` through
    /// neighbors one step closer to `w`, in ascending neighbor order.
    pub fn geodesics(&self, v: usize, w: usize, max_paths: usize) -> Result<Geodesics, GraphError> {
        self.require_complete()?;
        self.geodesics_unchecked(v, w, max_paths)
    }

    pub(crate) fn geodesics_unchecked(&self, v: usize, w: usize, max_paths: usize) -> Result<Geodesics, GraphError> {
        self.check_vertex(v)?;
        self.check_vertex(w)?;
        let dist = self.distances_from(w);
        let length = dist[v].ok_or(GraphError::Disconnected(v, w))?;
        let mut out = Geodesics {
            length,
            paths: Vec::new(),
            truncated: false,
        };
        let mut path = vec![v];
        self.descend(&dist, &mut path, max_paths, &mut out);
        Ok(out)
    }

    fn descend(&self, dist: &[Option<usize>], path: &mut Vec<usize>, max_paths: usize, out: &mut Geodesics) {
        let here = *path.last().expect("path starts nonempty");
        let d = dist[here].expect("on a geodesic");
        if d == 0 {
            if out.paths.len() >= max_paths {
                out.truncated = true;
            } else {
                out.paths.push(path.clone());
            }
            return;
        }
        for &next in &self.adjacency[here] {
            if out.truncated {
                return;
            }
            if dist[next] == Some(d - 1) {
                path.push(next);
                self.descend(dist, path, max_paths, out);
                path.pop();
            }
        }
    }

    /// Distinct subsets of clusters with sizes in `sizes`, each sorted, in sorted order.
    pub fn subclusters(&self, sizes: std::ops::RangeInclusive<usize>) -> Vec<Vec<VarId>> {
        let mut set = HashSet::new();
        for v in &self.vertices {
            let c = &v.cluster;
            for mask in 0u64..(1u64 << c.len()) {
                let size = mask.count_ones() as usize;
                if !sizes.contains(&size) {
                    continue;
                }
                let subset: Vec<VarId> = (0..c.len()).filter(|i| mask >> i & 1 == 1).map(|i| c[i]).collect();
                set.insert(subset);
            }
        }
        let mut out: Vec<Vec<VarId>> = set.into_iter().collect();
        out.sort_unstable_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Degree regularity, edge criterion, exchange axioms and connectivity.
    pub fn structure_report(&self) -> StructureReport {
        let n = self.rank();
        let mut report = StructureReport::default();
        for v in 0..self.num_vertices() {
            if self.adjacency[v].len() != n {
                report.degree_violations.push(v);
            }
        }
        // Adjacency recomputed from intersection sizes, independent of mutation links.
        for v in 0..self.num_vertices() {
            for w in v + 1..self.num_vertices() {
                let by_intersection = self.intersection_size(v, w) + 1 == n;
                if by_intersection != self.is_adjacent(v, w) {
                    report.edge_mismatches.push((v, w));
                }
            }
        }
        if n >= 1 {
            for subset in self.subclusters(n - 1..=n - 1) {
                let count = self.face_of(&subset).map(|f| f.len()).unwrap_or(0);
                if count != 2 {
                    report.axiom_violations.push(self.set_strings(&subset));
                }
            }
        }
        report.connected = self.num_vertices() == 0 || self.distances_from(0).iter().all(Option::is_some);
        report
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            complete: self.is_complete(),
            b: self.pattern.initial().rows(),
            symmetrizer: self.pattern.initial().symmetrizer().to_vec(),
            vertices: (0..self.num_vertices())
                .map(|v| VertexJson {
                    id: v,
                    cluster: self.cluster_strings(v),
                    witness_path: self.witness(v).one_based(),
                    labeled_cluster: self.labels(v).iter().map(|&i| self.names[i].clone()).collect(),
                })
                .collect(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }

    /// Rebuilds a graph from its JSON form. The file is trusted as-is apart from
    /// basic consistency checks, so corrupted graphs can be loaded and audited.
    pub fn from_json(json: &GraphJson) -> Result<Self, GraphError> {
        let rows = IntMatrix::from_rows(json.b.clone()).map_err(|e| GraphError::Malformed(e.to_string()))?;
        let initial = if json.symmetrizer.is_empty() {
            ExchangeMatrix::new(rows)?
        } else {
            ExchangeMatrix::with_symmetrizer(rows, json.symmetrizer.clone())?
        };
        let n = initial.rank();
        let mut var_ids: HashMap<LaurentPoly, VarId> = HashMap::new();
        let mut variables = Vec::new();
        let mut intern = |s: &str| -> Result<VarId, GraphError> {
            let p = LaurentPoly::parse(s, n).map_err(|e| GraphError::Malformed(e.to_string()))?;
            Ok(*var_ids.entry(p.clone()).or_insert_with(|| {
                variables.push(p);
                variables.len() - 1
            }))
        };
        let mut vertices = Vec::with_capacity(json.vertices.len());
        for (idx, vj) in json.vertices.iter().enumerate() {
            if vj.id != idx {
                return Err(GraphError::Malformed(format!("vertex ids must be 0..N in order (got {} at {idx})", vj.id)));
            }
            let labels = vj.labeled_cluster.iter().map(|s| intern(s)).collect::<Result<Vec<_>, _>>()?;
            let mut cluster = vj.cluster.iter().map(|s| intern(s)).collect::<Result<Vec<_>, _>>()?;
            cluster.sort_unstable();
            let mut sorted_labels = labels.clone();
            sorted_labels.sort_unstable();
            if labels.len() != n || sorted_labels != cluster || cluster.windows(2).any(|w| w[0] == w[1]) {
                return Err(GraphError::Malformed(format!("vertex {idx}: cluster and labeled cluster disagree")));
            }
            if vj.witness_path.iter().any(|&k| k == 0 || k > n) {
                return Err(GraphError::Malformed(format!("vertex {idx}: witness direction out of range")));
            }
            vertices.push(Vertex {
                cluster,
                labels,
                witness: TreePath::from_steps(vj.witness_path.iter().map(|k| k - 1)),
                exchange: vec![None; n],
            });
        }
        let mut edges = Vec::with_capacity(json.edges.len());
        for &[a, b] in &json.edges {
            if a >= vertices.len() || b >= vertices.len() || a == b {
                return Err(GraphError::Malformed(format!("bad edge [{a}, {b}]")));
            }
            edges.push((a.min(b), a.max(b)));
        }
        let completeness = if json.complete {
            Completeness::Complete
        } else {
            Completeness::VertexBudgetExceeded
        };
        let mut g = Self::finish(SeedPattern::new(initial), variables, vertices, edges, completeness);
        // Exchange partners: the unique other vertex containing all labels but one.
        for v in 0..g.num_vertices() {
            for k in 0..n {
                let rest: Vec<VarId> = {
                    let mut r: Vec<VarId> =
                        g.vertices[v].labels.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, &x)| x).collect();
                    r.sort_unstable();
                    r
                };
                let candidates: Vec<usize> = match g.face_of(&rest) {
                    Ok(f) => f.vertices.into_iter().filter(|&w| w != v).collect(),
                    Err(_) => Vec::new(),
                };
                g.vertices[v].exchange[k] = (candidates.len() == 1).then(|| candidates[0]);
            }
        }
        Ok(g)
    }

    /// Graphviz rendering; vertices and edges of `highlight` are emphasized.
    pub fn to_dot(&self, highlight: Option<&Face>) -> String {
        let mut out = String::from("graph exchange_graph {\n  node [shape=box, fontname=\"monospace\"];\n");
        for v in 0..self.num_vertices() {
            let label = self.cluster_strings(v).join(", ").replace('"', "\\\"");
            let style = match highlight {
                Some(f) if f.contains(v) => ", style=filled, fillcolor=\"#9ecae1\"",
                _ => "",
            };
            let _ = writeln!(out, "  {v} [label=\"{label}\"{style}];");
        }
        for &(a, b) in &self.edges {
            let style = match highlight {
                Some(f) if f.contains(a) && f.contains(b) => " [color=\"#3182bd\", penwidth=2]",
                _ => "",
            };
            let _ = writeln!(out, "  {a} -- {b}{style};");
        }
        out.push_str("}\n");
        out
    }

    /// Replaces the edge set; used to build corrupted fixtures for checker tests.
    pub fn with_edges(&self, edges: Vec<(usize, usize)>) -> Self {
        let mut json = self.to_json();
        json.edges = edges.into_iter().map(|(a, b)| [a, b]).collect();
        Self::from_json(&json).expect("vertex data unchanged")
    }
}

pub(crate) fn sorted_intersection(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// JSON export format; witness paths are one-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub complete: bool,
    #[serde(rename = "B")]
    pub b: Vec<Vec<i64>>,
    #[serde(default)]
    pub symmetrizer: Vec<u64>,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    pub cluster: Vec<String>,
    pub witness_path: Vec<usize>,
    pub labeled_cluster: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(rows: Vec<Vec<i64>>) -> ExchangeGraph {
        ExchangeGraph::enumerate(&ExchangeMatrix::from_rows(rows).unwrap(), Budgets::default()).unwrap()
    }

    fn a2() -> ExchangeGraph {
        graph(vec![vec![0, 1], vec![-1, 0]])
    }

    fn vertex(g: &ExchangeGraph, names: &[&str]) -> usize {
        g.vertex_of(&g.var_set(names).unwrap()).unwrap()
    }

    #[test]
    fn a2_is_a_pentagon() {
        let g = a2();
        assert!(g.is_complete());
        assert_eq!((g.num_vertices(), g.num_edges()), (5, 5));
        let expected = [
            vec!["x1", "x2"],
            vec!["x1^-1 + x1^-1*x2", "x2"],
            vec!["x1^-1 + x1^-1*x2", "x1^-1*x2^-1 + x1^-1 + x2^-1"],
            vec!["x1^-1*x2^-1 + x1^-1 + x2^-1", "x2^-1 + x1*x2^-1"],
            vec!["x2^-1 + x1*x2^-1", "x1"],
        ];
        let ids: Vec<usize> = expected.iter().map(|c| vertex(&g, c)).collect();
        for i in 0..5 {
            assert!(g.is_adjacent(ids[i], ids[(i + 1) % 5]));
        }
        assert!(g.structure_report().is_clean());
        assert_eq!(g.labels(0), g.var_set(&["x1"]).unwrap().into_iter().chain(g.var_set(&["x2"]).unwrap()).collect::<Vec<_>>());
        assert!(g.witness(0).is_empty());
    }

    #[test]
    fn small_finite_types() {
        let b2 = graph(vec![vec![0, 1], vec![-2, 0]]);
        assert_eq!((b2.num_vertices(), b2.num_edges()), (6, 6));
        let g2 = graph(vec![vec![0, 1], vec![-3, 0]]);
        assert_eq!((g2.num_vertices(), g2.num_edges()), (8, 8));
        let a3 = graph(vec![vec![0, 1, 0], vec![-1, 0, 1], vec![0, -1, 0]]);
        assert_eq!((a3.num_vertices(), a3.num_edges()), (14, 21));
        assert!((0..14).all(|v| a3.neighbors(v).len() == 3));
        assert!(a3.structure_report().is_clean());
    }

    #[test]
    fn budgets_flag_incomplete() {
        let markov = ExchangeMatrix::from_rows(vec![vec![0, 2, -2], vec![-2, 0, 2], vec![2, -2, 0]]).unwrap();
        let g = ExchangeGraph::enumerate(
            &markov,
            Budgets {
                max_vertices: 100_000,
                max_depth: 3,
            },
        )
        .unwrap();
        assert_eq!(g.completeness(), Completeness::DepthBudgetExceeded);
        // the Markov exchange graph is the 3-regular tree
        assert_eq!(g.num_vertices(), 1 + 3 + 6 + 12);
        assert!(g.geodesics(0, 1, 10).is_err());
        let g = ExchangeGraph::enumerate(
            &ExchangeMatrix::from_rows(vec![vec![0, 1], vec![-1, 0]]).unwrap(),
            Budgets {
                max_vertices: 3,
                max_depth: 64,
            },
        )
        .unwrap();
        assert_eq!(g.completeness(), Completeness::VertexBudgetExceeded);
        assert_eq!(g.num_vertices(), 3);
    }

    #[test]
    fn face_examples() {
        let g = a2();
        assert_eq!(g.face_of(&[]).unwrap().len(), 5);
        for v in 0..5 {
            let f = g.face_of(g.cluster(v)).unwrap();
            assert_eq!(f.vertices, vec![v]);
        }
        let f = g.face_of(&g.var_set(&["x2"]).unwrap()).unwrap();
        let mut want = vec![vertex(&g, &["x1", "x2"]), vertex(&g, &["x1^-1 + x1^-1*x2", "x2"])];
        want.sort_unstable();
        assert_eq!(f.vertices, want);
        assert_eq!(f.edges.len(), 1);
        // x1 and x2^-1 + x1*x2^-1 are compatible, x1 and (1+x2)/x1 are not
        let incompatible = g.var_set(&["x1", "x1^-1 + x1^-1*x2"]).unwrap();
        assert!(matches!(g.face_of(&incompatible), Err(GraphError::NotAFace(_))));
    }

    #[test]
    fn face_order_is_reverse_inclusion() {
        let g = graph(vec![vec![0, 1, 0], vec![-1, 0, 1], vec![0, -1, 0]]);
        for big in g.subclusters(2..=2) {
            let fb = g.face_of(&big).unwrap();
            for x in &big {
                let fs = g.face_of(&[*x]).unwrap();
                assert!(fb.vertices.iter().all(|v| fs.contains(*v)));
            }
        }
    }

    #[test]
    fn minimal_face_examples() {
        let g = a2();
        assert_eq!(g.minimal_face(2, 2).unwrap().vertices, vec![2]);
        let (a, b) = g.edges()[0];
        let f = g.minimal_face(a, b).unwrap();
        assert_eq!(f.defining_set.len(), 1);
        assert!(f.contains(a) && f.contains(b));
        let v = vertex(&g, &["x1", "x2"]);
        let w = vertex(&g, &["x1^-1 + x1^-1*x2", "x1^-1*x2^-1 + x1^-1 + x2^-1"]);
        let f = g.minimal_face(v, w).unwrap();
        assert!(f.defining_set.is_empty());
        assert_eq!(f.len(), 5);
    }

    #[test]
    fn geodesic_examples() {
        let g = a2();
        let same = g.geodesics(1, 1, 10).unwrap();
        assert_eq!(same.paths, vec![vec![1]]);
        let (a, b) = g.edges()[0];
        assert_eq!(g.geodesics(a, b, 10).unwrap().paths, vec![vec![a, b]]);
        // pentagon: distance-2 pairs have one geodesic
        for v in 0..5 {
            for w in 0..5 {
                let geo = g.geodesics(v, w, 10).unwrap();
                if geo.length == 2 {
                    assert_eq!(geo.paths.len(), 1);
                }
            }
        }
    }

    #[test]
    fn geodesics_truncate() {
        // A_3 antipodal pairs have several geodesics
        let g = graph(vec![vec![0, 1, 0], vec![-1, 0, 1], vec![0, -1, 0]]);
        let (v, w, count) = (0..14)
            .flat_map(|v| (0..14).map(move |w| (v, w)))
            .map(|(v, w)| (v, w, g.geodesics(v, w, 1000).unwrap().paths.len()))
            .max_by_key(|t| t.2)
            .unwrap();
        assert!(count > 1);
        let geo = g.geodesics(v, w, 1).unwrap();
        assert!(geo.truncated);
        assert_eq!(geo.paths.len(), 1);
    }

    #[test]
    fn json_round_trip_preserves_graph() {
        let g = graph(vec![vec![0, 1], vec![-2, 0]]);
        let json = g.to_json();
        let text = serde_json::to_string(&json).unwrap();
        let back = ExchangeGraph::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back.to_json(), json);
        for v in 0..g.num_vertices() {
            for k in 0..2 {
                assert_eq!(back.exchange(v, k), g.exchange(v, k));
            }
        }
    }

    #[test]
    fn dot_output_mentions_every_edge() {
        let g = a2();
        let face = g.face_of(&g.var_set(&["x2"]).unwrap()).unwrap();
        let dot = g.to_dot(Some(&face));
        assert_eq!(dot.matches(" -- ").count(), 5);
        assert_eq!(dot.matches("fillcolor").count(), 2);
        assert!(dot.contains("x1^-1 + x1^-1*x2, x2"));
    }

    #[test]
    fn exchange_links_follow_labels() {
        let g = graph(vec![vec![0, 1, 0], vec![-1, 0, 1], vec![0, -1, 0]]);
        for v in 0..g.num_vertices() {
            for k in 0..3 {
                let w = g.exchange(v, k).unwrap();
                assert!(g.is_adjacent(v, w));
                assert!(!g.contains_all(w, &[g.labels(v)[k]]));
            }
        }
    }
}
