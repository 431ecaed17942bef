//! Barycentric retraction of a box in `E^n` onto a closed convex subset.
//!
//! The complement of the target `X` is covered by open balls `B(v, d(v, X)/2)`
//! centred at the cells of an adaptive grid. Each ball carries an anchor in
//! `X`, the projection of its centre. A point `y` outside `X` is sent to the
//! barycenter of the anchors of the balls containing it, weighted by the
//! partition of unity `u(y) ∝ r - |y - v|`. A thin collar along the boundary
//! of `X` is left uncovered and mapped by the nearest-point projection.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::corpus;
use crate::error::{Error, Result};
use crate::model::ModelPoint;
use crate::par::Execution;
use crate::report::Report;
use crate::solver::{barycenter, SolverOptions, WeightedPointSet};
use crate::space::{ConvexSubset, GeodesicSpace, ModelSpace};

/// Target of a retraction: a closed convex subset of `E^n`.
pub type Target = ConvexSubset<ModelSpace>;

/// A member `B(center, radius)` of the cover with its anchor in `X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Member {
    pub center: Vec<f64>,
    pub radius: f64,
    pub anchor: Vec<f64>,
    /// `d(center, X)`.
    pub depth: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoverOptions {
    /// Side of the top-level grid cells.
    pub packing: f64,
    /// Width of the uncovered collar along the boundary of `X`; defaults to
    /// `packing`.
    pub collar: Option<f64>,
    /// Points per axis of the grid used to validate the cover.
    pub validation: usize,
    /// Limit on cell subdivision.
    pub max_level: usize,
}

impl CoverOptions {
    pub fn new(packing: f64) -> Self {
        CoverOptions { packing, collar: None, validation: 201, max_level: 40 }
    }

    pub fn with_collar(mut self, collar: f64) -> Self {
        self.collar = Some(collar);
        self
    }
}

/// Finite cover of `window \ (X ∪ collar)` by balls of radius `d(v, X)/2`.
pub struct BallCover<'a> {
    target: &'a Target,
    lo: Vec<f64>,
    hi: Vec<f64>,
    members: Vec<Member>,
    packing: f64,
    collar: f64,
    /// Per subdivision level, grid cell -> members whose ball meets it.
    index: Vec<HashMap<Vec<i64>, Vec<u32>>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RetractMode {
    /// `y` in `X`: `f(y) = y`.
    Identity,
    /// Barycenter of anchors.
    Cover,
    /// Uncovered collar point: nearest-point projection.
    Collar,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn euclid(coords: Vec<f64>) -> ModelPoint {
    ModelPoint::euclidean(coords).expect("finite coordinates")
}

impl<'a> BallCover<'a> {
    /// Builds the cover. Top-level cells of side `packing` tile the window; a
    /// cell with centre `v` and half-diagonal `rho` becomes a member when
    /// `d(v, X) >= 3 rho` (its ball then contains the whole cell), is dropped
    /// when it lies in `X` or within the collar, and is split otherwise.
    /// Every point of the window at distance at least `collar` from `X` ends
    /// up covered; a validation grid confirms it.
    pub fn build(target: &'a Target, lo: Vec<f64>, hi: Vec<f64>, opts: CoverOptions) -> Result<Self> {
        let n = target.ambient().dim();
        if lo.len() != n || hi.len() != n {
            return Err(Error::invalid(format!("window corners must have dimension {n}")));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b)) {
            return Err(Error::invalid("window corners must satisfy lo < hi"));
        }
        if !(opts.packing > 0.0) {
            return Err(Error::invalid("packing must be positive"));
        }
        let collar = opts.collar.unwrap_or(opts.packing);
        if !(collar > 0.0) {
            return Err(Error::invalid("collar must be positive"));
        }
        let mut cover = BallCover {
            target,
            lo,
            hi,
            members: Vec::new(),
            packing: opts.packing,
            collar,
            index: Vec::new(),
        };
        let counts: Vec<usize> = (0..n)
            .map(|i| ((cover.hi[i] - cover.lo[i]) / opts.packing).ceil().max(1.0) as usize)
            .collect();
        let mut stack: Vec<(Vec<f64>, usize)> = Vec::new();
        let total: usize = counts.iter().product();
        for mut idx in 0..total {
            let center = (0..n)
                .map(|i| {
                    let k = idx % counts[i];
                    idx /= counts[i];
                    cover.lo[i] + (k as f64 + 0.5) * opts.packing
                })
                .collect();
            stack.push((center, 0));
        }
        let mut levels: Vec<Vec<usize>> = Vec::new();
        while let Some((center, level)) = stack.pop() {
            let side = opts.packing / (1u64 << level) as f64;
            let rho = side * (n as f64).sqrt() / 2.0;
            let depth = target.distance_to_set(&euclid(center.clone()));
            if depth >= 3.0 * rho {
                let anchor = target.project(&euclid(center.clone())).into_coords();
                if levels.len() <= level {
                    levels.resize(level + 1, Vec::new());
                }
                levels[level].push(cover.members.len());
                cover.members.push(Member { center, radius: depth / 2.0, anchor, depth });
                continue;
            }
            if depth + rho < collar || cover.cell_inside_target(&center, side) {
                continue;
            }
            if level >= opts.max_level {
                return Err(Error::InsufficientCover(format!(
                    "cell at {center:?} still unresolved after {level} subdivisions; increase the collar"
                )));
            }
            for corner in 0..1usize << n {
                let child = center
                    .iter()
                    .enumerate()
                    .map(|(i, c)| c + if corner >> i & 1 == 1 { side / 4.0 } else { -side / 4.0 })
                    .collect();
                stack.push((child, level + 1));
            }
        }
        cover.build_index(&levels);
        cover.validate(opts.validation)?;
        Ok(cover)
    }

    fn cell_inside_target(&self, center: &[f64], side: f64) -> bool {
        let n = center.len();
        (0..1usize << n).all(|corner| {
            let p = center
                .iter()
                .enumerate()
                .map(|(i, c)| c + if corner >> i & 1 == 1 { side / 2.0 } else { -side / 2.0 })
                .collect();
            self.target.contains(&euclid(p))
        })
    }

    fn pitch(&self, level: usize) -> f64 {
        self.packing / (1u64 << level) as f64
    }

    fn key(&self, y: &[f64], level: usize) -> Vec<i64> {
        let p = self.pitch(level);
        y.iter().zip(&self.lo).map(|(v, l)| ((v - l) / p).floor() as i64).collect()
    }

    fn build_index(&mut self, levels: &[Vec<usize>]) {
        let mut index = vec![HashMap::new(); levels.len()];
        for (level, members) in levels.iter().enumerate() {
            for &m in members {
                let member = &self.members[m];
                let lo: Vec<f64> = member.center.iter().map(|c| c - member.radius).collect();
                let hi: Vec<f64> = member.center.iter().map(|c| c + member.radius).collect();
                let (klo, khi) = (self.key(&lo, level), self.key(&hi, level));
                let n = klo.len();
                let mut key = klo.clone();
                loop {
                    index[level].entry(key.clone()).or_insert_with(Vec::new).push(m as u32);
                    let mut i = 0;
                    while i < n {
                        key[i] += 1;
                        if key[i] <= khi[i] {
                            break;
                        }
                        key[i] = klo[i];
                        i += 1;
                    }
                    if i == n {
                        break;
                    }
                }
            }
        }
        self.index = index;
    }

    fn validate(&self, per_axis: usize) -> Result<()> {
        if per_axis < 2 {
            return Ok(());
        }
        let n = self.lo.len();
        let total = per_axis.pow(n as u32);
        let bad = Execution::default().map_range(total, |idx| {
            let y = self.grid_point(idx, per_axis);
            let d = self.target.distance_to_set(&euclid(y.clone()));
            (d >= self.collar && self.containing(&y).is_empty()).then_some(y)
        });
        match bad.into_iter().flatten().next() {
            Some(y) => Err(Error::InsufficientCover(format!(
                "validation point {y:?} is uncovered; use a smaller packing"
            ))),
            None => Ok(()),
        }
    }

    /// Point `idx` of the `per_axis^n` grid spanning the window.
    pub fn grid_point(&self, mut idx: usize, per_axis: usize) -> Vec<f64> {
        (0..self.lo.len())
            .map(|i| {
                let k = idx % per_axis;
                idx /= per_axis;
                self.lo[i] + (self.hi[i] - self.lo[i]) * k as f64 / (per_axis - 1) as f64
            })
            .collect()
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn collar(&self) -> f64 {
        self.collar
    }

    pub fn target(&self) -> &Target {
        self.target
    }

    pub fn window(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    /// Indices of the members whose open ball contains `y`, ascending.
    pub fn containing(&self, y: &[f64]) -> Vec<usize> {
        let mut found: Vec<usize> = Vec::new();
        for (level, cells) in self.index.iter().enumerate() {
            if let Some(ms) = cells.get(&self.key(y, level)) {
                for &m in ms {
                    let member = &self.members[m as usize];
                    if dist(y, &member.center) < member.radius {
                        found.push(m as usize);
                    }
                }
            }
        }
        found.sort_unstable();
        found
    }

    /// Partition-of-unity weights `u(y) = (r - |y - v|) / sum` over the
    /// members containing `y`.
    pub fn partition_of_unity(&self, y: &[f64]) -> Result<Vec<(usize, f64)>> {
        if self.target.contains(&euclid(y.to_vec())) {
            return Err(Error::NotApplicable("the partition of unity is defined off the target".into()));
        }
        let ms = self.containing(y);
        if ms.is_empty() {
            return Err(Error::Uncovered(y.to_vec()));
        }
        let raw: Vec<f64> = ms.iter().map(|&m| self.members[m].radius - dist(y, &self.members[m].center)).collect();
        let total: f64 = raw.iter().sum();
        Ok(ms.into_iter().zip(raw).map(|(m, w)| (m, w / total)).collect())
    }

    pub fn retract(&self, y: &[f64], opts: &SolverOptions) -> Result<Vec<f64>> {
        Ok(self.retract_with_mode(y, opts)?.0)
    }

    pub fn retract_with_mode(&self, y: &[f64], opts: &SolverOptions) -> Result<(Vec<f64>, RetractMode)> {
        let p = euclid(y.to_vec());
        if self.target.contains(&p) {
            return Ok((y.to_vec(), RetractMode::Identity));
        }
        let weights = match self.partition_of_unity(y) {
            Ok(w) => w,
            Err(Error::Uncovered(_)) if self.target.distance_to_set(&p) < self.collar => {
                return Ok((self.target.project(&p).into_coords(), RetractMode::Collar));
            }
            Err(e) => return Err(e),
        };
        let anchors = weights.iter().map(|&(m, _)| euclid(self.members[m].anchor.clone())).collect();
        let set = WeightedPointSet::new(self.target, anchors, weights.iter().map(|&(_, w)| w).collect())?;
        let q = barycenter(&set, opts)?;
        Ok((q.barycenter.into_coords(), RetractMode::Cover))
    }

    /// `(grid point, image)` pairs on a `per_axis^n` grid over the window.
    pub fn sample_field(&self, per_axis: usize, opts: &SolverOptions) -> Result<Vec<FieldSample>> {
        let total = per_axis.pow(self.lo.len() as u32);
        let inner = SolverOptions { execution: Execution::Sequential, ..*opts };
        opts.execution
            .map_range(total, |idx| {
                let y = self.grid_point(idx, per_axis);
                let (image, mode) = self.retract_with_mode(&y, &inner)?;
                Ok(FieldSample { point: y, image, mode })
            })
            .into_iter()
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub point: Vec<f64>,
    pub image: Vec<f64>,
    pub mode: RetractMode,
}

/// Evenly spaced points on the unit circle scaled by `radius`.
pub fn circle_samples(radius: f64, count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| {
            let t = std::f64::consts::TAU * i as f64 / count as f64;
            vec![radius * t.cos(), radius * t.sin()]
        })
        .collect()
}

/// Offsets, as fractions of `epsilon / 6`, at which probe points are placed.
const PROBE_FRACTIONS: [f64; 5] = [0.99, 0.5, 0.1, 0.01, 0.001];
/// Random directions per boundary point and offset.
const PROBE_DIRECTIONS: usize = 8;

/// Boundary-modulus probe: for each boundary sample `x` and probe points
/// `y` with `d(x, y) < epsilon / 6`, checks `d(x, f(y)) < epsilon`, and for
/// every member containing such a `y` (centre `v`, anchor `z`) checks
/// `d(x, z) < 6 d(x, y)`. Returns the modulus report and the factor-6 report.
pub fn continuity_probe(
    cover: &BallCover,
    boundary: &[Vec<f64>],
    epsilon: f64,
    seed: u64,
    opts: &SolverOptions,
) -> Result<(Report, Report)> {
    let n = cover.lo.len();
    let inner = SolverOptions { execution: Execution::Sequential, ..*opts };
    let per_point = opts.execution.map_range(boundary.len(), |b| -> Result<(f64, f64, usize)> {
        let x = &boundary[b];
        let mut rng = corpus::rng(seed ^ (b as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let (mut modulus, mut ratio, mut pairs) = (0.0f64, 0.0f64, 0usize);
        for frac in PROBE_FRACTIONS {
            for _ in 0..PROBE_DIRECTIONS {
                let mut dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                let len = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
                dir.iter_mut().for_each(|c| *c /= len);
                let y: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + frac * epsilon / 6.0 * d).collect();
                let fy = cover.retract(&y, &inner)?;
                modulus = modulus.max(dist(x, &fy));
                let dxy = dist(x, &y);
                for m in cover.containing(&y) {
                    let member = &cover.members[m];
                    // Hypotheses: y in the closed ball B(v, d(v, X)/2), d(v, z) < 2 d(v, X).
                    if dist(&y, &member.center) <= member.depth / 2.0
                        && dist(&member.center, &member.anchor) < 2.0 * member.depth
                    {
                        ratio = ratio.max(dist(x, &member.anchor) / dxy);
                        pairs += 1;
                    }
                }
            }
        }
        Ok((modulus, ratio, pairs))
    });
    let (mut modulus, mut ratio, mut pairs) = (0.0f64, 0.0f64, 0usize);
    for r in per_point {
        let (m, q, p) = r?;
        modulus = modulus.max(m);
        ratio = ratio.max(q);
        pairs += p;
    }
    let label = format!("epsilon-{epsilon:e}");
    let mut m = Report::at_most("retraction-modulus", label.clone(), modulus, epsilon);
    m.pass = modulus < epsilon;
    let mut h = Report::at_most("retraction-howfar", label, ratio, 6.0).with_note(format!("{pairs} anchor/sample pairs"));
    h.pass = ratio < 6.0;
    Ok((m, h))
}

/// Retraction property and image containment on a `per_axis^n` grid:
/// `f(y) = y` exactly on `X`, and `f(y)` in `X` (within `1e-9`) elsewhere.
pub fn retraction_property_check(cover: &BallCover, per_axis: usize, opts: &SolverOptions) -> Result<(Report, Report)> {
    let samples = cover.sample_field(per_axis, opts)?;
    let identity_err = samples
        .iter()
        .filter(|s| s.mode == RetractMode::Identity)
        .map(|s| dist(&s.point, &s.image))
        .fold(0.0, f64::max);
    let outside = samples
        .iter()
        .map(|s| cover.target.distance_to_set(&euclid(s.image.clone())))
        .fold(0.0, f64::max);
    let mut id = Report::at_most("retraction-identity", format!("grid-{per_axis}"), identity_err, 0.0);
    id.pass = identity_err == 0.0;
    let inside = Report::at_most("retraction-image", format!("grid-{per_axis}"), outside, 1e-9);
    Ok((id, inside))
}

/// Local continuity inside the cover: random pairs `y, y'` with
/// `|y - y'| < h`, both at least `collar + h` from `X`, at scales `h`,
/// `h/4`, `h/16`. Passes when the largest displacement `|f(y) - f(y')|`
/// decreases from scale to scale.
pub fn local_continuity_check(
    cover: &BallCover,
    h: f64,
    pairs: usize,
    seed: u64,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Report)> {
    let n = cover.lo.len();
    let mut rng = corpus::rng(seed);
    let mut bases = Vec::new();
    let mut attempts = 0;
    while bases.len() < pairs && attempts < 1000 * pairs {
        attempts += 1;
        let y: Vec<f64> = (0..n).map(|i| rng.gen_range(cover.lo[i]..=cover.hi[i])).collect();
        if cover.target.distance_to_set(&euclid(y.clone())) >= cover.collar + h {
            let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let len = dir.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-300);
            bases.push((y, dir.into_iter().map(|c| c / len).collect::<Vec<f64>>(), rng.gen_range(0.0..1.0)));
        }
    }
    if bases.is_empty() {
        return Err(Error::invalid("no sample points far enough from the target"));
    }
    let inner = SolverOptions { execution: Execution::Sequential, ..*opts };
    let mut scales = Vec::new();
    for scale in [h, h / 4.0, h / 16.0] {
        let moves = opts.execution.map(&bases, |(y, dir, t)| -> Result<f64> {
            let y2: Vec<f64> = y.iter().zip(dir).map(|(a, d)| a + t * scale * d).collect();
            Ok(dist(&cover.retract(y, &inner)?, &cover.retract(&y2, &inner)?))
        });
        let mut worst = 0.0f64;
        for m in moves {
            worst = worst.max(m?);
        }
        scales.push(worst);
    }
    let mut r = Report::at_most("retraction-local", format!("h-{h:e}"), scales[2], scales[0])
        .with_note(format!("max displacement per scale {scales:?}"));
    r.pass = scales[1] <= scales[0] && scales[2] <= scales[1] && (scales[2] < scales[0] || scales[0] == 0.0);
    Ok((scales, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_inside_target_needs_no_members() {
        let disk = ConvexSubset::ball(vec![0.0, 0.0], 5.0).unwrap();
        let cover = BallCover::build(&disk, vec![-1.0, -1.0], vec![1.0, 1.0], CoverOptions::new(0.25)).unwrap();
        assert!(cover.members().is_empty());
    }

    #[test]
    fn members_respect_the_radius_rule() {
        let disk = ConvexSubset::ball(vec![0.0, 0.0], 1.0).unwrap();
        let cover = BallCover::build(&disk, vec![-2.0, -2.0], vec![2.0, 2.0], CoverOptions::new(0.25)).unwrap();
        assert!(!cover.members().is_empty());
        for m in cover.members() {
            let c = ModelPoint::euclidean(m.center.clone()).unwrap();
            assert!((m.radius - disk.distance_to_set(&c) / 2.0).abs() < 1e-15);
            assert!(dist(&m.center, &m.anchor) < 2.0 * m.depth);
        }
    }

    #[test]
    fn partition_weights_sum_to_one() {
        let disk = ConvexSubset::ball(vec![0.0, 0.0], 1.0).unwrap();
        let cover = BallCover::build(&disk, vec![-2.0, -2.0], vec![2.0, 2.0], CoverOptions::new(0.25)).unwrap();
        let w = cover.partition_of_unity(&[1.5, 0.3]).unwrap();
        let total: f64 = w.iter().map(|(_, w)| w).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&(_, w)| w > 0.0 && w <= 1.0));
        assert!(matches!(cover.partition_of_unity(&[0.0, 0.0]), Err(Error::NotApplicable(_))));
    }
}
