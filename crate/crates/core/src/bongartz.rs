// SPDX-License-Identifier: Apache-2.0

//! Bongartz completions and the face projections they induce.
//!
//! The completion of `U` with respect to a tree vertex `t` is the unique cluster
//! containing `U` whose c-vectors (relative to `t`) at all positions outside `U`
//! are nonnegative. [`bongartz_completion`] finds it by scanning the face `F_U`;
//! [`bongartz_completion_directed`] walks inside the face instead and is checked
//! against the scan in tests.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::graph::{sorted_intersection, ExchangeGraph, Face, GraphError, VarId};
use crate::seed::{replay, CMatrix, SeedError, TreePath};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BongartzError {
    #[error("no Bongartz completion of {u:?} with respect to root {root:?}")]
    NoCompletion { u: Vec<String>, root: Vec<usize> },
    #[error("several Bongartz completions of {u:?} with respect to root {root:?}: vertices {vertices:?}")]
    MultipleCompletions {
        u: Vec<String>,
        root: Vec<usize>,
        vertices: Vec<usize>,
    },
    #[error("directed completion search for {u:?} from root {root:?} did not terminate")]
    SearchDiverged { u: Vec<String>, root: Vec<usize> },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Seed(#[from] SeedError),
}

impl BongartzError {
    /// Failures that would contradict existence and uniqueness of completions,
    /// as opposed to bad input or infrastructure errors.
    pub fn is_falsification(&self) -> bool {
        matches!(
            self,
            BongartzError::NoCompletion { .. }
                | BongartzError::MultipleCompletions { .. }
                | BongartzError::SearchDiverged { .. }
        )
    }
}

/// Variable set `u` (sorted ids) and the tree vertex supplying the reference frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionQuery {
    pub u: Vec<VarId>,
    pub root: TreePath,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResult {
    pub vertex: usize,
    /// Tree vertex realizing the completion.
    pub witness: TreePath,
    /// `(position, c-vector)` for each position outside `U`; all nonnegative.
    pub certificate: Vec<(usize, Vec<i64>)>,
}

/// JSON record of one completion query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletionRecord {
    #[serde(rename = "U")]
    pub u: Vec<String>,
    pub root_path: Vec<usize>,
    pub completion: Vec<String>,
    pub certificate: Vec<CertificateEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateEntry {
    /// One-based label position at the witness seed.
    pub position: usize,
    pub variable: String,
    pub c_vector: Vec<i64>,
}

impl CompletionResult {
    pub fn record(&self, g: &ExchangeGraph, q: &CompletionQuery) -> CompletionRecord {
        let labels = g.labels(self.vertex);
        CompletionRecord {
            u: g.set_strings(&q.u),
            root_path: q.root.one_based(),
            completion: g.cluster_strings(self.vertex),
            certificate: self
                .certificate
                .iter()
                .map(|(i, c)| CertificateEntry {
                    position: i + 1,
                    variable: g.variable_name(labels[*i]).to_string(),
                    c_vector: c.clone(),
                })
                .collect(),
        }
    }
}

/// C-matrices of every vertex's witness seed with respect to one root.
#[derive(Debug, Clone)]
pub struct RootFrame {
    root: TreePath,
    cmatrices: Vec<CMatrix>,
}

impl RootFrame {
    pub fn new(g: &ExchangeGraph, root: &TreePath) -> Result<Self, SeedError> {
        let b_root = g.pattern().matrix_at(root)?;
        let cmatrices = (0..g.num_vertices())
            .map(|v| replay(&b_root, &root.route_to(g.witness(v))).map(|(_, c)| c))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RootFrame {
            root: root.clone(),
            cmatrices,
        })
    }

    /// Frames for many roots, computed in parallel, in input order.
    pub fn for_roots(g: &ExchangeGraph, roots: &[TreePath]) -> Result<Vec<Self>, SeedError> {
        roots.par_iter().map(|r| RootFrame::new(g, r)).collect()
    }

    pub fn root(&self) -> &TreePath {
        &self.root
    }

    pub fn cmatrix(&self, v: usize) -> &CMatrix {
        &self.cmatrices[v]
    }

    /// Brute-force completion over the face `F_U`.
    pub fn completion(&self, g: &ExchangeGraph, face: &Face) -> Result<CompletionResult, BongartzError> {
        scan_face(g, face, &self.root, |v| Ok(self.cmatrices[v].clone()))
    }
}

fn outside_positions(g: &ExchangeGraph, v: usize, u: &[VarId]) -> Vec<usize> {
    g.labels(v)
        .iter()
        .enumerate()
        .filter(|(_, x)| u.binary_search(x).is_err())
        .map(|(i, _)| i)
        .collect()
}

fn scan_face(
    g: &ExchangeGraph,
    face: &Face,
    root: &TreePath,
    cmatrix: impl Fn(usize) -> Result<CMatrix, SeedError>,
) -> Result<CompletionResult, BongartzError> {
    let u = &face.defining_set;
    let mut passing = Vec::new();
    for &v in &face.vertices {
        let c = cmatrix(v)?;
        let outside = outside_positions(g, v, u);
        if outside.iter().all(|&i| c.column_is_nonnegative(i)) {
            passing.push(CompletionResult {
                vertex: v,
                witness: g.witness(v).clone(),
                certificate: outside.into_iter().map(|i| (i, c.column(i))).collect(),
            });
        }
    }
    match passing.len() {
        1 => Ok(passing.pop().expect("one element")),
        0 => Err(BongartzError::NoCompletion {
            u: g.set_strings(u),
            root: root.one_based(),
        }),
        _ => Err(BongartzError::MultipleCompletions {
            u: g.set_strings(u),
            root: root.one_based(),
            vertices: passing.iter().map(|r| r.vertex).collect(),
        }),
    }
}

/// The Bongartz completion `B_U(root)`, by testing every vertex of `F_U`.
pub fn bongartz_completion(g: &ExchangeGraph, q: &CompletionQuery) -> Result<CompletionResult, BongartzError> {
    g.require_complete()?;
    let face = g.face_of(&q.u)?;
    let b_root = g.pattern().matrix_at(&q.root)?;
    scan_face(g, &face, &q.root, |v| Ok(replay(&b_root, &q.root.route_to(g.witness(v)))?.1))
}

/// Same result as [`bongartz_completion`], found by starting at a vertex of
/// `F_U` and repeatedly mutating at a position outside `U` whose c-vector is
/// negative.
pub fn bongartz_completion_directed(g: &ExchangeGraph, q: &CompletionQuery) -> Result<CompletionResult, BongartzError> {
    g.require_complete()?;
    let face = g.face_of(&q.u)?;
    let u = &face.defining_set;
    let start = face.vertices[0];
    let b_root = g.pattern().matrix_at(&q.root)?;
    let mut tree = g.witness(start).clone();
    let (mut b, mut c) = replay(&b_root, &q.root.route_to(&tree))?;
    let mut labels = g.labels(start).to_vec();
    let mut current = start;

    // Each step moves against the c-vector orientation, which is acyclic on a
    // finite exchange graph; the bound only guards against a broken invariant.
    let limit = 4 * g.num_vertices() + 16;
    for _ in 0..limit {
        let red = (0..labels.len()).find(|&i| u.binary_search(&labels[i]).is_err() && !c.column_is_nonnegative(i));
        let Some(i) = red else {
            let certificate = (0..labels.len())
                .filter(|&i| u.binary_search(&labels[i]).is_err())
                .map(|i| (i, c.column(i)))
                .collect();
            return Ok(CompletionResult {
                vertex: current,
                witness: tree,
                certificate,
            });
        };
        c = c.mutate(&b, i)?;
        b = b.mutate(i)?;
        tree.push(i);
        let mut rest: Vec<VarId> = labels.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
        rest.sort_unstable();
        let partner = g
            .face_of(&rest)?
            .vertices
            .into_iter()
            .find(|&w| w != current)
            .ok_or_else(|| GraphError::Malformed(format!("vertex {current} has no exchange partner at {i}")))?;
        let new_var = g
            .cluster(partner)
            .iter()
            .copied()
            .find(|x| rest.binary_search(x).is_err())
            .expect("partner differs in one variable");
        labels[i] = new_var;
        current = partner;
    }
    Err(BongartzError::SearchDiverged {
        u: g.set_strings(u),
        root: q.root.one_based(),
    })
}

/// The map `v -> B_U(witness(v))` onto the face `F_U`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Projection {
    pub face: Face,
    pub map: Vec<usize>,
}

/// `P_U` computed with frames rooted at every vertex's witness (`frames[v]`).
pub fn projection_with_frames(
    g: &ExchangeGraph,
    u: &[VarId],
    frames: &[RootFrame],
) -> Result<Projection, BongartzError> {
    g.require_complete()?;
    let face = g.face_of(u)?;
    let map = frames
        .iter()
        .map(|f| f.completion(g, &face).map(|r| r.vertex))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Projection { face, map })
}

pub fn witness_frames(g: &ExchangeGraph) -> Result<Vec<RootFrame>, SeedError> {
    let roots: Vec<TreePath> = (0..g.num_vertices()).map(|v| g.witness(v).clone()).collect();
    RootFrame::for_roots(g, &roots)
}

pub fn projection(g: &ExchangeGraph, u: &[VarId]) -> Result<Projection, BongartzError> {
    g.require_complete()?;
    projection_with_frames(g, u, &witness_frames(g)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom")]
pub enum ProjectionViolation {
    /// Image outside the face.
    P1 { vertex: usize, image: usize },
    /// A face vertex not fixed.
    P2 { vertex: usize, image: usize },
    /// An edge whose images are distinct and not adjacent in the face.
    P3 { edge: (usize, usize), images: (usize, usize) },
    /// An edge leaving the face whose endpoints have different images.
    P4 { edge: (usize, usize), images: (usize, usize) },
}

/// Checks (P1)-(P4) for a map onto a face.
pub fn audit_projection(g: &ExchangeGraph, p: &Projection) -> Vec<ProjectionViolation> {
    let mut out = Vec::new();
    for (v, &image) in p.map.iter().enumerate() {
        if !p.face.contains(image) {
            out.push(ProjectionViolation::P1 { vertex: v, image });
        }
        if p.face.contains(v) && image != v {
            out.push(ProjectionViolation::P2 { vertex: v, image });
        }
    }
    for &(a, b) in g.edges() {
        let (pa, pb) = (p.map[a], p.map[b]);
        let images = (pa, pb);
        if pa != pb && !(p.face.contains(pa) && p.face.contains(pb) && g.is_adjacent(pa, pb)) {
            out.push(ProjectionViolation::P3 { edge: (a, b), images });
        }
        if p.face.contains(a) != p.face.contains(b) && pa != pb {
            out.push(ProjectionViolation::P4 { edge: (a, b), images });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RootIndependenceViolation {
    pub vertex: usize,
    /// One-based tree path of the alternative root.
    pub alternative_root: Vec<usize>,
    pub expected: usize,
    pub got: usize,
}

/// Tree vertices one step from each witness: `(vertex reached, path)`.
pub fn neighbor_roots(g: &ExchangeGraph) -> Vec<(usize, TreePath)> {
    let mut out = Vec::new();
    for v in 0..g.num_vertices() {
        for k in 0..g.rank() {
            if let Some(w) = g.exchange(v, k) {
                let alt = g.witness(v).child(k);
                if alt != *g.witness(w) {
                    out.push((w, alt));
                }
            }
        }
    }
    out
}

/// Completions taken at alternative tree vertices of the same cluster must agree
/// with the projection computed from the stored witnesses.
pub fn audit_root_independence(
    g: &ExchangeGraph,
    p: &Projection,
    alternatives: &[(usize, RootFrame)],
) -> Result<Vec<RootIndependenceViolation>, BongartzError> {
    let mut out = Vec::new();
    for (w, frame) in alternatives {
        let got = frame.completion(g, &p.face)?.vertex;
        if got != p.map[*w] {
            out.push(RootIndependenceViolation {
                vertex: *w,
                alternative_root: frame.root().one_based(),
                expected: p.map[*w],
                got,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }

    fn merge(&mut self, other: LemmaReport) {
        self.checked += other.checked;
        self.violations.extend(other.violations);
    }
}

fn subsets(set: &[VarId]) -> Vec<Vec<VarId>> {
    (0u64..1 << set.len())
        .map(|mask| (0..set.len()).filter(|i| mask >> i & 1 == 1).map(|i| set[i]).collect())
        .collect()
}

fn record_completion(
    report: &mut LemmaReport,
    g: &ExchangeGraph,
    result: Result<CompletionResult, BongartzError>,
    expected: usize,
    context: impl Fn() -> String,
) -> Result<(), BongartzError> {
    report.checked += 1;
    match result {
        Ok(r) if r.vertex == expected => {}
        Ok(r) => report.violations.push(format!(
            "{}: completion is {:?}, expected {:?}",
            context(),
            g.cluster_strings(r.vertex),
            g.cluster_strings(expected)
        )),
        Err(e) if e.is_falsification() => report.violations.push(format!("{}: {e}", context())),
        Err(e) => return Err(e),
    }
    Ok(())
}

/// `U ⊆ [x_s]` implies `B_U(s) = [x_s]`, checked at the witness of every vertex
/// (the enumeration root is vertex 0) for every subset `U`.
pub fn verify_lemma_case1(g: &ExchangeGraph) -> Result<LemmaReport, BongartzError> {
    g.require_complete()?;
    let frames = witness_frames(g)?;
    let mut report = LemmaReport::default();
    for (s, frame) in frames.iter().enumerate() {
        for u in subsets(g.cluster(s)) {
            let face = g.face_of(&u)?;
            let ctx = || format!("case 1, root {:?}, U = {:?}", frame.root().one_based(), g.set_strings(&u));
            record_completion(&mut report, g, frame.completion(g, &face), s, ctx)?;
        }
    }
    Ok(report)
}

/// For an edge `s --k-- s'` with `U ⊆ [x_s]` and `x_{k;s} ∈ U`, `B_U(s') = [x_s]`.
/// Every vertex's witness serves as `s`.
pub fn verify_lemma_case2(g: &ExchangeGraph) -> Result<LemmaReport, BongartzError> {
    g.require_complete()?;
    let n = g.rank();
    let roots: Vec<(usize, usize, TreePath)> = (0..g.num_vertices())
        .flat_map(|s| (0..n).map(move |k| (s, k)))
        .map(|(s, k)| (s, k, g.witness(s).child(k)))
        .collect();
    let frames = RootFrame::for_roots(g, &roots.iter().map(|r| r.2.clone()).collect::<Vec<_>>())?;
    let mut report = LemmaReport::default();
    for ((s, k, _), frame) in roots.iter().zip(&frames) {
        let exchanged = g.labels(*s)[*k];
        for u in subsets(g.cluster(*s)).into_iter().filter(|u| u.contains(&exchanged)) {
            let face = g.face_of(&u)?;
            let ctx = || {
                format!(
                    "case 2, edge {:?} --{}--, U = {:?}",
                    g.witness(*s).one_based(),
                    k + 1,
                    g.set_strings(&u)
                )
            };
            record_completion(&mut report, g, frame.completion(g, &face), *s, ctx)?;
        }
    }
    Ok(report)
}

/// For every tree edge `t --k-- t'` with `t` in `roots`, the completions of each
/// `U` in `us` at `t` and `t'` coincide or share exactly `n-1` variables.
pub fn verify_lemma_case3(
    g: &ExchangeGraph,
    us: &[Vec<VarId>],
    roots: &[TreePath],
) -> Result<LemmaReport, BongartzError> {
    g.require_complete()?;
    let n = g.rank();
    let faces = us.iter().map(|u| g.face_of(u)).collect::<Result<Vec<_>, _>>()?;
    let reports = roots
        .par_iter()
        .map(|t| -> Result<LemmaReport, BongartzError> {
            let mut report = LemmaReport::default();
            let here = RootFrame::new(g, t)?;
            for k in 0..n {
                let there = RootFrame::new(g, &t.child(k))?;
                for face in &faces {
                    report.checked += 1;
                    let a = here.completion(g, face);
                    let b = there.completion(g, face);
                    let ctx = || format!("case 3, edge {:?} --{}--, U = {:?}", t.one_based(), k + 1, g.set_strings(&face.defining_set));
                    match (a, b) {
                        (Ok(a), Ok(b)) => {
                            let common = sorted_intersection(g.cluster(a.vertex), g.cluster(b.vertex)).len();
                            if common + 1 < n {
                                report.violations.push(format!("{}: completions share only {common} variables", ctx()));
                            }
                        }
                        (Err(e), _) | (_, Err(e)) if e.is_falsification() => {
                            report.violations.push(format!("{}: {e}", ctx()));
                        }
                        (Err(e), _) | (_, Err(e)) => return Err(e),
                    }
                }
            }
            Ok(report)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut total = LemmaReport::default();
    for r in reports {
        total.merge(r);
    }
    Ok(total)
}
