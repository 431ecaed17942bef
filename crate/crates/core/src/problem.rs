//! JSON problem, result and sequence files.
//!
//! The schema is documented in `docs/file-formats.md`. Numbers are written in
//! the shortest decimal form that parses back to the same `f64`, so records
//! round-trip exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gh::{ConvergingSequence, Stage};
use crate::model::{ModelKind, ModelPoint};
use crate::par::Execution;
use crate::solver::{
    barycenter_pow, objective, oracle_grid, BarycenterResult, OracleSolve, SolveError, SolverOptions,
    WeightedPointSet, DEFAULT_ORACLE_RESOLUTION,
};
use crate::space::{EdgeSpec, GeodesicSpace, ModelSpace, RTree, TreePoint, TreeSpec};

/// Ambient space of a problem, tagged by `type`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpaceSpec {
    Euclidean { dim: usize },
    /// `dim` defaults to one less than the length of the first point.
    Sphere { k: f64, #[serde(default, skip_serializing_if = "Option::is_none")] dim: Option<usize> },
    Hyperbolic { k: f64, #[serde(default, skip_serializing_if = "Option::is_none")] dim: Option<usize> },
    Tree { vertices: Vec<String>, edges: Vec<EdgeSpec> },
}

/// A point as written in files: ambient coordinates, a position on a tree
/// edge, or a named tree vertex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointSpec {
    Coords(Vec<f64>),
    Edge { edge: usize, offset: f64 },
    Vertex { vertex: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub space: SpaceSpec,
    pub points: Vec<PointSpec>,
    /// Defaults to all ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    /// Exponent `t` of the objective `max u d^t`; defaults to 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

/// Oracle cross-check attached to a result.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub barycenter: PointSpec,
    pub baryradius: f64,
    /// `|objective(solver) - objective(oracle)|`.
    pub objective_gap: f64,
    /// Distance between the two minimizers.
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub barycenter: PointSpec,
    pub baryradius: f64,
    pub active_indices: Vec<usize>,
    pub iterations: usize,
    pub residual: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedPointsSpec {
    pub points: Vec<PointSpec>,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageSpec {
    pub points: Vec<PointSpec>,
    pub weights: Vec<f64>,
    pub delta: f64,
}

/// A converging sequence of weighted sets in a common space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceFile {
    pub space: SpaceSpec,
    pub limit: WeightedPointsSpec,
    pub stages: Vec<StageSpec>,
}

/// Parses JSON, reporting line and column on failure.
pub fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::invalid(format!("parse error: {e}")))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::invalid(e.to_string()))
}

#[derive(Clone, Debug)]
pub enum AnySpace {
    Model(ModelSpace),
    Tree(RTree),
}

/// Decoded points together with their space.
#[derive(Clone, Debug)]
pub enum ProblemPoints {
    Model(ModelSpace, Vec<ModelPoint>),
    Tree(RTree, Vec<TreePoint>),
}

impl SpaceSpec {
    pub fn from_model(space: &ModelSpace) -> Self {
        use crate::space::GeodesicSpace;
        let k = space.curvature().k();
        match space.kind() {
            ModelKind::Euclidean => SpaceSpec::Euclidean { dim: space.dim() },
            ModelKind::Sphere => SpaceSpec::Sphere { k, dim: Some(space.dim()) },
            ModelKind::Hyperboloid => SpaceSpec::Hyperbolic { k, dim: Some(space.dim()) },
        }
    }

    pub fn from_tree(tree: &RTree) -> Self {
        let TreeSpec { vertices, edges } = tree.to_spec();
        SpaceSpec::Tree { vertices, edges }
    }

    /// Builds the space; `first` is the first point, used to infer the
    /// dimension of spheres and hyperbolic spaces.
    pub fn build(&self, first: Option<&PointSpec>) -> Result<AnySpace> {
        let inferred = |dim: Option<usize>| -> Result<usize> {
            match (dim, first) {
                (Some(d), _) => Ok(d),
                (None, Some(PointSpec::Coords(c))) if c.len() >= 2 => Ok(c.len() - 1),
                _ => Err(Error::invalid("space.dim is missing and cannot be inferred from points[0]")),
            }
        };
        Ok(match self {
            SpaceSpec::Euclidean { dim } => AnySpace::Model(ModelSpace::euclidean(*dim)?),
            SpaceSpec::Sphere { k, dim } => AnySpace::Model(ModelSpace::sphere(*k, inferred(*dim)?)?),
            SpaceSpec::Hyperbolic { k, dim } => AnySpace::Model(ModelSpace::hyperbolic(*k, inferred(*dim)?)?),
            SpaceSpec::Tree { vertices, edges } => AnySpace::Tree(RTree::from_spec(&TreeSpec {
                vertices: vertices.clone(),
                edges: edges.clone(),
            })?),
        })
    }
}

fn at(field: &str, i: usize, e: Error) -> Error {
    match e {
        Error::InvalidInput(msg) => Error::invalid(format!("{field}[{i}]: {msg}")),
        e => Error::invalid(format!("{field}[{i}]: {e}")),
    }
}

pub fn model_point(space: &ModelSpace, p: &PointSpec) -> Result<ModelPoint> {
    match p {
        PointSpec::Coords(c) => {
            let expected = match space.kind() {
                ModelKind::Euclidean => space.dim(),
                _ => space.dim() + 1,
            };
            if c.len() != expected {
                return Err(Error::invalid(format!("expected {expected} coordinates, got {}", c.len())));
            }
            space.point(c.clone())
        }
        _ => Err(Error::invalid("model space points must be coordinate arrays")),
    }
}

pub fn tree_point(tree: &RTree, p: &PointSpec) -> Result<TreePoint> {
    match p {
        PointSpec::Edge { edge, offset } => tree.point(*edge, *offset),
        PointSpec::Vertex { vertex } => tree
            .vertex_index(vertex)
            .map(|v| tree.vertex_point(v))
            .ok_or_else(|| Error::invalid(format!("unknown vertex {vertex:?}"))),
        PointSpec::Coords(_) => Err(Error::invalid("tree points must be {edge, offset} or {vertex}")),
    }
}

pub fn model_point_spec(p: &ModelPoint) -> PointSpec {
    PointSpec::Coords(p.coords().to_vec())
}

pub fn tree_point_spec(p: &TreePoint) -> PointSpec {
    PointSpec::Edge { edge: p.edge, offset: p.offset }
}

/// Decoded points of a field, with `field[i]` diagnostics.
fn decode_all<P>(field: &str, specs: &[PointSpec], f: impl Fn(&PointSpec) -> Result<P>) -> Result<Vec<P>> {
    specs.iter().enumerate().map(|(i, p)| f(p).map_err(|e| at(field, i, e))).collect()
}

/// A validated problem.
#[derive(Clone, Debug)]
pub struct Problem {
    pub points: ProblemPoints,
    pub weights: Vec<f64>,
    pub exponent: f64,
}

impl ProblemFile {
    /// Validates the file: parallel arrays, weights `>= 0` and not all zero,
    /// points valid for the space, and the diameter bound when `k > 0`.
    pub fn load(&self) -> Result<Problem> {
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; self.points.len()]);
        let exponent = self.exponent.unwrap_or(1.0);
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::invalid(format!("exponent: must be positive, got {exponent}")));
        }
        let points = match self.space.build(self.points.first())? {
            AnySpace::Model(s) => ProblemPoints::Model(s, decode_all("points", &self.points, |p| model_point(&s, p))?),
            AnySpace::Tree(t) => {
                let pts = decode_all("points", &self.points, |p| tree_point(&t, p))?;
                ProblemPoints::Tree(t, pts)
            }
        };
        let problem = Problem { points, weights, exponent };
        match &problem.points {
            ProblemPoints::Model(s, pts) => {
                WeightedPointSet::new(s, pts.clone(), problem.weights.clone())?.check_diameter(Execution::default())?
            }
            ProblemPoints::Tree(t, pts) => {
                WeightedPointSet::new(t, pts.clone(), problem.weights.clone())?;
            }
        }
        Ok(problem)
    }
}

fn record<S: GeodesicSpace>(
    r: BarycenterResult<S::Point>,
    spec: impl Fn(&S::Point) -> PointSpec,
) -> ResultRecord {
    ResultRecord {
        barycenter: spec(&r.barycenter),
        baryradius: r.baryradius,
        active_indices: r.active_indices,
        iterations: r.iterations,
        residual: r.residual,
        oracle: None,
    }
}

fn solve_in<S: OracleSolve>(
    set: &WeightedPointSet<S>,
    exponent: f64,
    opts: &SolverOptions,
    with_oracle: bool,
    spec: impl Fn(&S::Point) -> PointSpec,
) -> std::result::Result<ResultRecord, SolveError<PointSpec>> {
    let lift = |e: SolveError<S::Point>| match e {
        SolveError::Invalid(e) => SolveError::Invalid(e),
        SolveError::NonConvergence { best } => {
            let r = record::<S>(best.clone(), &spec);
            SolveError::NonConvergence {
                best: BarycenterResult {
                    barycenter: r.barycenter,
                    baryradius: best.baryradius,
                    active_indices: best.active_indices,
                    iterations: best.iterations,
                    residual: best.residual,
                },
            }
        }
    };
    let res = barycenter_pow(set, exponent, opts).map_err(lift)?;
    let mut rec = record::<S>(res.clone(), &spec);
    if with_oracle {
        // The oracle minimizes max u^(1/t) d, whose minimizer is the same.
        let rooted = set.with_weights(set.weights().iter().map(|w| w.powf(1.0 / exponent)).collect())?;
        let o = oracle_grid(&rooted, DEFAULT_ORACLE_RESOLUTION)?;
        let gap = (objective(&rooted, &res.barycenter) - objective(&rooted, &o.barycenter)).abs();
        rec.oracle = Some(OracleRecord {
            barycenter: spec(&o.barycenter),
            baryradius: o.baryradius.powf(exponent),
            objective_gap: gap,
            distance: set.space().distance(&res.barycenter, &o.barycenter),
        });
    }
    Ok(rec)
}

impl Problem {
    /// Solves for the barycenter; `with_oracle` adds the reference solution.
    pub fn solve(
        &self,
        opts: &SolverOptions,
        with_oracle: bool,
    ) -> std::result::Result<ResultRecord, SolveError<PointSpec>> {
        match &self.points {
            ProblemPoints::Model(s, pts) => {
                let set = WeightedPointSet::new(s, pts.clone(), self.weights.clone())?;
                solve_in(&set, self.exponent, opts, with_oracle, model_point_spec)
            }
            ProblemPoints::Tree(t, pts) => {
                let set = WeightedPointSet::new(t, pts.clone(), self.weights.clone())?;
                solve_in(&set, self.exponent, opts, with_oracle, tree_point_spec)
            }
        }
    }

    /// Re-evaluates the objective `max u d^t` at the record's barycenter.
    pub fn revalidate(&self, rec: &ResultRecord) -> Result<f64> {
        let t = self.exponent;
        Ok(match &self.points {
            ProblemPoints::Model(s, pts) => {
                let q = model_point(s, &rec.barycenter)?;
                pts.iter().zip(&self.weights).map(|(p, w)| w * s.distance(&q, p).powf(t)).fold(0.0, f64::max)
            }
            ProblemPoints::Tree(tr, pts) => {
                let q = tree_point(tr, &rec.barycenter)?;
                pts.iter().zip(&self.weights).map(|(p, w)| w * tr.distance(&q, p).powf(t)).fold(0.0, f64::max)
            }
        })
    }
}

impl SequenceFile {
    /// Builds the sequence in a model space.
    pub fn load_model(&self) -> Result<(ModelSpace, ConvergingSequence<ModelPoint>)> {
        match self.space.build(self.limit.points.first())? {
            AnySpace::Model(s) => {
                let dec = |field: &str, ps: &[PointSpec]| decode_all(field, ps, |p| model_point(&s, p));
                Ok((s, self.assemble(&s, dec)?))
            }
            AnySpace::Tree(_) => Err(Error::invalid("space: expected a model space")),
        }
    }

    /// Builds the sequence in a tree.
    pub fn load_tree(&self) -> Result<(RTree, ConvergingSequence<TreePoint>)> {
        match self.space.build(None)? {
            AnySpace::Tree(t) => {
                let dec = |field: &str, ps: &[PointSpec]| decode_all(field, ps, |p| tree_point(&t, p));
                let seq = self.assemble(&t, dec)?;
                Ok((t, seq))
            }
            AnySpace::Model(_) => Err(Error::invalid("space: expected a tree")),
        }
    }

    pub fn is_tree(&self) -> bool {
        matches!(self.space, SpaceSpec::Tree { .. })
    }

    fn assemble<S: GeodesicSpace>(
        &self,
        space: &S,
        dec: impl Fn(&str, &[PointSpec]) -> Result<Vec<S::Point>>,
    ) -> Result<ConvergingSequence<S::Point>> {
        let limit = dec("limit.points", &self.limit.points)?;
        let stages = self
            .stages
            .iter()
            .enumerate()
            .map(|(n, st)| {
                Ok(Stage {
                    points: dec(&format!("stages[{n}].points"), &st.points)?,
                    weights: st.weights.clone(),
                    delta: st.delta,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        ConvergingSequence::new(space, stages, limit, self.limit.weights.clone())
    }

    /// Writes a model-space sequence.
    pub fn from_model(space: &ModelSpace, seq: &ConvergingSequence<ModelPoint>) -> Self {
        let pts = |ps: &[ModelPoint]| ps.iter().map(model_point_spec).collect();
        SequenceFile {
            space: SpaceSpec::from_model(space),
            limit: WeightedPointsSpec { points: pts(seq.limit_points()), weights: seq.limit_weights().to_vec() },
            stages: seq
                .stages()
                .iter()
                .map(|s| StageSpec { points: pts(&s.points), weights: s.weights.clone(), delta: s.delta })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"{
        "space": {"type": "euclidean", "dim": 1},
        "points": [[1], [3], [4]],
        "weights": [1, 4, 3]
    }"#;

    #[test]
    fn worked_example_file() {
        let file: ProblemFile = parse(EXAMPLE).unwrap();
        let problem = file.load().unwrap();
        let rec = problem.solve(&SolverOptions::default(), true).unwrap();
        assert_eq!(rec.barycenter, PointSpec::Coords(vec![3.25]));
        assert!((rec.baryradius - 2.25).abs() < 1e-12);
        assert!(rec.oracle.as_ref().unwrap().objective_gap < 1e-9);
        let back: ResultRecord = parse(&to_json(&rec).unwrap()).unwrap();
        assert!((problem.revalidate(&back).unwrap() - rec.baryradius).abs() <= 1e-12);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = r#"{"space": {"type": "euclidean", "dim": 2}, "points": [[0, 0], [1]]}"#;
        let err = parse::<ProblemFile>(bad).unwrap().load().unwrap_err().to_string();
        assert!(err.contains("points[1]"), "{err}");
        let err = parse::<ProblemFile>("{\"space\": 3}").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn tree_points_by_vertex_and_edge() {
        let text = r#"{
            "space": {"type": "tree", "vertices": ["c", "a", "b"],
                      "edges": [{"from": "c", "to": "a", "length": 1}, {"from": "c", "to": "b", "length": 3}]},
            "points": [{"vertex": "a"}, {"edge": 1, "offset": 3}]
        }"#;
        let rec = parse::<ProblemFile>(text).unwrap().load().unwrap().solve(&SolverOptions::default(), true).unwrap();
        assert!((rec.baryradius - 2.0).abs() < 1e-12);
        assert_eq!(rec.barycenter, PointSpec::Edge { edge: 1, offset: 1.0 });
    }
}
