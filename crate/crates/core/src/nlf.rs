// SPDX-License-Identifier: Apache-2.0

//! Verification of the non-leaving-face property.
//!
//! Two routes are run and compared:
//!
//! * geodesic route: for each vertex pair, every shortest path must stay inside
//!   the face defined by the intersection of the two clusters;
//! * projection route: each face defined by a proper nonempty sub-cluster must
//!   admit a projection, namely the Bongartz-completion map, satisfying (P1)-(P4).
//!   A projection for every face forces the geodesic property.
//!
//! A pair on which the two routes reach different verdicts is itself recorded.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bongartz::{
    audit_projection, audit_root_independence, neighbor_roots, projection_with_frames, verify_lemma_case1,
    verify_lemma_case2, verify_lemma_case3, witness_frames, BongartzError, ProjectionViolation, RootFrame,
    RootIndependenceViolation,
};
use crate::graph::{sorted_intersection, ExchangeGraph, StructureReport, VarId};
use crate::seed::{SeedError, TreePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NlfConfig {
    /// Maximum number of vertex pairs; larger graphs are subsampled with a fixed stride.
    pub pair_budget: usize,
    /// Maximum number of geodesics enumerated per pair.
    pub path_budget: usize,
}

impl Default for NlfConfig {
    fn default() -> Self {
        NlfConfig {
            pair_budget: 1_000_000,
            path_budget: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GraphSummary {
    pub rank: usize,
    pub vertices: usize,
    pub edges: usize,
    pub complete: bool,
}

impl GraphSummary {
    pub fn of(g: &ExchangeGraph) -> Self {
        GraphSummary {
            rank: g.rank(),
            vertices: g.num_vertices(),
            edges: g.num_edges(),
            complete: g.is_complete(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NlfViolation {
    pub v: usize,
    pub w: usize,
    /// Offending geodesic; empty when the pair is not connected at all.
    pub geodesic: Vec<usize>,
    pub leaving_vertex: Option<usize>,
    pub minimal_face: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FaceAudit {
    #[serde(rename = "U")]
    pub u: Vec<String>,
    pub face_vertices: usize,
    pub projection: Vec<usize>,
    pub violations: Vec<ProjectionViolation>,
    pub root_independence: Vec<RootIndependenceViolation>,
    /// A completion that failed to exist or was not unique.
    pub falsification: Option<String>,
}

impl FaceAudit {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.root_independence.is_empty() && self.falsification.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RouteDisagreement {
    pub v: usize,
    pub w: usize,
    pub geodesic_route_holds: bool,
    pub projection_route_holds: bool,
}

/// Outcome of a named auxiliary audit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AuditResult {
    pub name: String,
    pub checked: usize,
    pub violations: Vec<String>,
}

impl AuditResult {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NlfReport {
    pub graph: GraphSummary,
    pub structure: StructureReport,
    pub pairs_total: usize,
    pub pairs_checked: usize,
    pub exhaustive: bool,
    pub geodesics_checked: usize,
    /// Pairs whose geodesic list hit the path budget.
    pub truncated_pairs: usize,
    pub violations: Vec<NlfViolation>,
    /// Internal inconsistencies of the path enumerator (length or adjacency).
    pub geodesic_inconsistencies: Vec<String>,
    pub face_audits: Vec<FaceAudit>,
    pub route_disagreements: Vec<RouteDisagreement>,
    pub audits: Vec<AuditResult>,
}

impl NlfReport {
    /// True when nothing checked contradicts the property or its supporting claims.
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
            && self.structure.is_clean()
            && self.geodesic_inconsistencies.is_empty()
            && self.face_audits.iter().all(FaceAudit::passed)
            && self.route_disagreements.is_empty()
            && self.audits.iter().all(AuditResult::holds)
    }

    pub fn summary(&self) -> String {
        let faces_ok = self.face_audits.iter().filter(|f| f.passed()).count();
        let mut s = format!(
            "{} vertices, {} edges, {}\npairs checked: {} of {}{}\ngeodesics checked: {}{}\nNLF violations: {}\nfaces audited: {} ({} passed)\nroute disagreements: {}\n",
            self.graph.vertices,
            self.graph.edges,
            if self.graph.complete { "complete" } else { "incomplete" },
            self.pairs_checked,
            self.pairs_total,
            if self.exhaustive { " (exhaustive)" } else { " (strided sample)" },
            self.geodesics_checked,
            if self.truncated_pairs > 0 {
                format!(" ({} pairs truncated)", self.truncated_pairs)
            } else {
                String::new()
            },
            self.violations.len(),
            self.face_audits.len(),
            faces_ok,
            self.route_disagreements.len(),
        );
        if !self.structure.is_clean() {
            s.push_str("structural checks: FAILED\n");
        }
        for a in &self.audits {
            s.push_str(&format!(
                "{}: {} checked, {} violations\n",
                a.name,
                a.checked,
                a.violations.len()
            ));
        }
        s.push_str(if self.holds() { "verdict: holds\n" } else { "verdict: VIOLATED\n" });
        s
    }
}

/// Checks that every vertex of every path contains `cluster(v) ∩ cluster(w)`.
pub fn check_geodesic_containment(g: &ExchangeGraph, v: usize, w: usize, paths: &[Vec<usize>]) -> Vec<NlfViolation> {
    let u = sorted_intersection(g.cluster(v), g.cluster(w));
    let mut out = Vec::new();
    for path in paths {
        if let Some(&bad) = path.iter().find(|&&x| !g.contains_all(x, &u)) {
            out.push(NlfViolation {
                v,
                w,
                geodesic: path.clone(),
                leaving_vertex: Some(bad),
                minimal_face: g.set_strings(&u),
            });
        }
    }
    out
}

fn geodesic_consistency(g: &ExchangeGraph, v: usize, w: usize, length: usize, paths: &[Vec<usize>]) -> Vec<String> {
    let mut out = Vec::new();
    if paths.is_empty() {
        out.push(format!("pair ({v}, {w}): no geodesic returned"));
    }
    for p in paths {
        let ok = p.len() == length + 1
            && p.first() == Some(&v)
            && p.last() == Some(&w)
            && p.windows(2).all(|e| g.is_adjacent(e[0], e[1]));
        if !ok {
            out.push(format!("pair ({v}, {w}): malformed geodesic {p:?}"));
        }
    }
    out
}

/// Vertex pairs `v < w`, all of them when within budget, otherwise every
/// `ceil(total / budget)`-th pair in lexicographic order.
pub fn select_pairs(num_vertices: usize, budget: usize) -> (Vec<(usize, usize)>, usize, bool) {
    let total = num_vertices * num_vertices.saturating_sub(1) / 2;
    let all = (0..num_vertices).flat_map(|v| (v + 1..num_vertices).map(move |w| (v, w)));
    if total <= budget {
        (all.collect(), total, true)
    } else {
        let stride = total.div_ceil(budget.max(1));
        (all.step_by(stride).collect(), total, false)
    }
}

struct PairOutcome {
    geodesics: usize,
    truncated: bool,
    violations: Vec<NlfViolation>,
    inconsistencies: Vec<String>,
}

fn check_pair(g: &ExchangeGraph, v: usize, w: usize, path_budget: usize) -> PairOutcome {
    match g.geodesics_unchecked(v, w, path_budget) {
        Ok(geo) => PairOutcome {
            geodesics: geo.paths.len(),
            truncated: geo.truncated,
            violations: check_geodesic_containment(g, v, w, &geo.paths),
            inconsistencies: geodesic_consistency(g, v, w, geo.length, &geo.paths),
        },
        Err(_) => PairOutcome {
            geodesics: 0,
            truncated: false,
            violations: vec![NlfViolation {
                v,
                w,
                geodesic: Vec::new(),
                leaving_vertex: None,
                minimal_face: g.set_strings(&sorted_intersection(g.cluster(v), g.cluster(w))),
            }],
            inconsistencies: Vec::new(),
        },
    }
}

/// Projection audit of every face defined by a proper nonempty sub-cluster.
pub fn audit_faces(g: &ExchangeGraph) -> Result<Vec<FaceAudit>, BongartzError> {
    g.require_complete()?;
    let n = g.rank();
    if n < 2 {
        return Ok(Vec::new());
    }
    let frames = witness_frames(g)?;
    let alternatives: Vec<(usize, RootFrame)> = neighbor_roots(g)
        .into_par_iter()
        .map(|(w, root)| RootFrame::new(g, &root).map(|f| (w, f)))
        .collect::<Result<_, SeedError>>()?;
    g.subclusters(1..=n - 1)
        .par_iter()
        .map(|u| {
            let mut audit = FaceAudit {
                u: g.set_strings(u),
                face_vertices: 0,
                projection: Vec::new(),
                violations: Vec::new(),
                root_independence: Vec::new(),
                falsification: None,
            };
            let p = match projection_with_frames(g, u, &frames) {
                Ok(p) => p,
                Err(e) if e.is_falsification() => {
                    audit.falsification = Some(e.to_string());
                    return Ok(audit);
                }
                Err(e) => return Err(e),
            };
            audit.face_vertices = p.face.len();
            audit.violations = audit_projection(g, &p);
            match audit_root_independence(g, &p, &alternatives) {
                Ok(r) => audit.root_independence = r,
                Err(e) if e.is_falsification() => audit.falsification = Some(e.to_string()),
                Err(e) => return Err(e),
            }
            audit.projection = p.map;
            Ok(audit)
        })
        .collect()
}

/// Geodesic containment over vertex pairs plus the projection audit, compared pair by pair.
pub fn verify_nlf(g: &ExchangeGraph, cfg: NlfConfig) -> Result<NlfReport, BongartzError> {
    g.require_complete()?;
    let n = g.rank();
    let (pairs, pairs_total, exhaustive) = select_pairs(g.num_vertices(), cfg.pair_budget);
    let outcomes: Vec<PairOutcome> = pairs
        .par_iter()
        .map(|&(v, w)| check_pair(g, v, w, cfg.path_budget))
        .collect();
    let face_audits = audit_faces(g)?;

    let face_ok: HashMap<Vec<VarId>, bool> = g
        .subclusters(1..=n.saturating_sub(1))
        .into_iter()
        .zip(face_audits.iter().map(FaceAudit::passed))
        .collect();

    let mut report = NlfReport {
        graph: GraphSummary::of(g),
        structure: g.structure_report(),
        pairs_total,
        pairs_checked: pairs.len(),
        exhaustive,
        geodesics_checked: 0,
        truncated_pairs: 0,
        violations: Vec::new(),
        geodesic_inconsistencies: Vec::new(),
        face_audits,
        route_disagreements: Vec::new(),
        audits: Vec::new(),
    };
    for (&(v, w), outcome) in pairs.iter().zip(outcomes) {
        let u = sorted_intersection(g.cluster(v), g.cluster(w));
        let geodesic_route_holds = outcome.violations.is_empty();
        let projection_route_holds = u.is_empty() || u.len() == n || face_ok.get(&u).copied().unwrap_or(false);
        if geodesic_route_holds != projection_route_holds {
            report.route_disagreements.push(RouteDisagreement {
                v,
                w,
                geodesic_route_holds,
                projection_route_holds,
            });
        }
        report.geodesics_checked += outcome.geodesics;
        report.truncated_pairs += usize::from(outcome.truncated);
        report.violations.extend(outcome.violations);
        report.geodesic_inconsistencies.extend(outcome.inconsistencies);
    }
    Ok(report)
}

/// Every C-matrix of every vertex with respect to every root in `roots` has
/// sign-coherent nonzero columns and determinant ±1.
pub fn audit_sign_coherence(g: &ExchangeGraph, roots: &[TreePath]) -> Result<AuditResult, SeedError> {
    let per_root: Vec<(usize, Vec<String>)> = roots
        .par_iter()
        .map(|root| -> Result<(usize, Vec<String>), SeedError> {
            let frame = RootFrame::new(g, root)?;
            let mut bad = Vec::new();
            for v in 0..g.num_vertices() {
                if let Err(e) = frame.cmatrix(v).check_sign_coherent() {
                    bad.push(format!("root {:?}, vertex {v}: {e}", root.one_based()));
                }
            }
            Ok((g.num_vertices(), bad))
        })
        .collect::<Result<_, _>>()?;
    let mut out = AuditResult {
        name: "sign coherence".into(),
        ..Default::default()
    };
    for (checked, bad) in per_root {
        out.checked += checked;
        out.violations.extend(bad);
    }
    Ok(out)
}

/// The C-matrix transition across each edge `s --k-- s'` (for `s` in `sources`)
/// agrees with replaying the recurrence from `s'`, at every target.
pub fn audit_transition(g: &ExchangeGraph, sources: &[TreePath], targets: &[TreePath]) -> Result<AuditResult, SeedError> {
    let n = g.rank();
    let pattern = g.pattern();
    let per_source: Vec<(usize, Vec<String>)> = sources
        .par_iter()
        .map(|s| -> Result<(usize, Vec<String>), SeedError> {
            let mut bad = Vec::new();
            let mut checked = 0;
            for k in 0..n {
                let s1 = s.child(k);
                for t in targets {
                    checked += 1;
                    let formula = pattern.transition_cmatrix(s, k, t)?;
                    let direct = pattern.cmatrix(&s1, t)?;
                    if formula != direct {
                        bad.push(format!(
                            "edge {:?} --{}--, target {:?}: formula {} vs recurrence {}",
                            s.one_based(),
                            k + 1,
                            t.one_based(),
                            formula.matrix(),
                            direct.matrix()
                        ));
                    }
                }
            }
            Ok((checked, bad))
        })
        .collect::<Result<_, _>>()?;
    let mut out = AuditResult {
        name: "C-matrix transition".into(),
        ..Default::default()
    };
    for (checked, bad) in per_source {
        out.checked += checked;
        out.violations.extend(bad);
    }
    Ok(out)
}

/// [`verify_nlf`] followed by the sign-coherence, transition and lemma audits,
/// all rooted at the stored witnesses.
pub fn verify_all(g: &ExchangeGraph, cfg: NlfConfig) -> Result<NlfReport, BongartzError> {
    let mut report = verify_nlf(g, cfg)?;
    let witnesses: Vec<TreePath> = (0..g.num_vertices()).map(|v| g.witness(v).clone()).collect();
    report.audits.push(audit_sign_coherence(g, &witnesses)?);
    report.audits.push(audit_transition(g, &witnesses, &witnesses)?);
    let lemma = |name: &str, r: crate::bongartz::LemmaReport| AuditResult {
        name: name.into(),
        checked: r.checked,
        violations: r.violations,
    };
    report.audits.push(lemma("lemma case 1", verify_lemma_case1(g)?));
    report.audits.push(lemma("lemma case 2", verify_lemma_case2(g)?));
    let us = g.subclusters(0..=g.rank());
    report.audits.push(lemma("lemma case 3", verify_lemma_case3(g, &us, &witnesses)?));
    Ok(report)
}
