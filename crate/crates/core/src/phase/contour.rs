use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::separatrix_energies;
use crate::error::{Error, Result};
use crate::models::{ClassicalModel, ModelId};

pub const DEFAULT_GRID: usize = 400;
const MIN_GRID: usize = 100;
const AUTO_LEVELS: usize = 12;
const EDGE_BISECTIONS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourLine {
    pub energy: f64,
    pub separatrix: bool,
    /// First and last point coincide.
    pub closed: bool,
    /// `[p, q]` pairs in order along the line.
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhasePortrait {
    pub model: ModelId,
    pub lambda: f64,
    pub grid: usize,
    pub levels: Vec<f64>,
    pub separatrix_energies: Vec<f64>,
    /// Sorted by energy, then by smallest `q`, then by smallest `p`.
    pub orbits: Vec<ContourLine>,
}

impl PhasePortrait {
    pub fn separatrix(&self) -> impl Iterator<Item = &ContourLine> {
        self.orbits.iter().filter(|l| l.separatrix)
    }
}

/// Node `(i, k)` sits at `p = −1 + 2i/grid`, `q = −π + 2πk/grid`; `k = grid`
/// repeats the `q = −π` column at `q = π`, and lines crossing that seam are
/// returned as two pieces.
struct Samples {
    grid: usize,
    values: Vec<f64>,
}

impl Samples {
    fn new(model: &ClassicalModel, lambda: f64, grid: usize) -> Self {
        let n = grid + 1;
        let values = (0..n * n)
            .into_par_iter()
            .map(|idx| {
                let (p, q) = node(grid, idx / n, idx % n);
                model.energy(p, q, lambda)
            })
            .collect();
        Samples { grid, values }
    }

    fn at(&self, i: usize, k: usize) -> f64 {
        self.values[i * (self.grid + 1) + k]
    }

    fn range(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

fn node(grid: usize, i: usize, k: usize) -> (f64, f64) {
    (
        -1.0 + 2.0 * i as f64 / grid as f64,
        -PI + 2.0 * PI * k as f64 / grid as f64,
    )
}

/// Edge from node `(i, k)` toward `(i, k+1)` or `(i+1, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Edge {
    AlongQ(usize, usize),
    AlongP(usize, usize),
}

impl Edge {
    fn ends(self) -> ((usize, usize), (usize, usize)) {
        match self {
            Edge::AlongQ(i, k) => ((i, k), (i, k + 1)),
            Edge::AlongP(i, k) => ((i, k), (i + 1, k)),
        }
    }
}

struct LevelTracer<'a> {
    model: &'a ClassicalModel,
    lambda: f64,
    samples: &'a Samples,
    level: f64,
}

impl LevelTracer<'_> {
    fn inside(&self, v: f64) -> bool {
        v > self.level
    }

    fn crosses(&self, e: Edge) -> bool {
        let ((i0, k0), (i1, k1)) = e.ends();
        self.inside(self.samples.at(i0, k0)) != self.inside(self.samples.at(i1, k1))
    }

    /// Bisection on the true energy along the edge.
    fn crossing(&self, e: Edge) -> [f64; 2] {
        let ((i0, k0), (i1, k1)) = e.ends();
        let a = node(self.samples.grid, i0, k0);
        let b = node(self.samples.grid, i1, k1);
        let at = |t: f64| (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1));
        let a_inside = self.inside(self.samples.at(i0, k0));
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..EDGE_BISECTIONS {
            let mid = 0.5 * (lo + hi);
            let (p, q) = at(mid);
            if self.inside(self.model.energy(p, q, self.lambda)) == a_inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (p, q) = at(0.5 * (lo + hi));
        [p, q]
    }

    fn segments(&self) -> Vec<(Edge, Edge)> {
        let g = self.samples.grid;
        let mut out = Vec::new();
        for i in 0..g {
            for k in 0..g {
                // Counterclockwise from the (i, k) corner.
                let edges = [
                    Edge::AlongQ(i, k),
                    Edge::AlongP(i, k + 1),
                    Edge::AlongQ(i + 1, k),
                    Edge::AlongP(i, k),
                ];
                let hit: Vec<Edge> = edges.iter().copied().filter(|&e| self.crosses(e)).collect();
                match hit.len() {
                    2 => out.push((hit[0], hit[1])),
                    4 => {
                        let corners = [
                            self.samples.at(i, k),
                            self.samples.at(i, k + 1),
                            self.samples.at(i + 1, k + 1),
                            self.samples.at(i + 1, k),
                        ];
                        let center = corners.iter().sum::<f64>() / 4.0;
                        if self.inside(center) == self.inside(corners[0]) {
                            out.push((edges[0], edges[1]));
                            out.push((edges[2], edges[3]));
                        } else {
                            out.push((edges[3], edges[0]));
                            out.push((edges[1], edges[2]));
                        }
                    }
                    _ => {}
                }
            }
        }
        out
    }

    fn lines(&self, separatrix: bool) -> Vec<ContourLine> {
        let segments = self.segments();
        let mut touching: BTreeMap<Edge, Vec<usize>> = BTreeMap::new();
        for (s, &(a, b)) in segments.iter().enumerate() {
            touching.entry(a).or_default().push(s);
            touching.entry(b).or_default().push(s);
        }
        let mut used = vec![false; segments.len()];
        let mut chains: Vec<Vec<Edge>> = Vec::new();
        let walk = |from: Edge, first: usize, used: &mut [bool]| {
            let mut chain = vec![from];
            let (mut at, mut seg) = (from, first);
            loop {
                used[seg] = true;
                let (a, b) = segments[seg];
                at = if a == at { b } else { a };
                chain.push(at);
                match touching[&at].iter().find(|&&s| !used[s]) {
                    Some(&s) => seg = s,
                    None => break,
                }
            }
            chain
        };
        let open_ends: Vec<(Edge, usize)> = touching
            .iter()
            .filter(|(_, s)| s.len() == 1)
            .map(|(&e, s)| (e, s[0]))
            .collect();
        for (e, s) in open_ends {
            if !used[s] {
                chains.push(walk(e, s, &mut used));
            }
        }
        for s in 0..segments.len() {
            if !used[s] {
                chains.push(walk(segments[s].0, s, &mut used));
            }
        }

        let mut cache: BTreeMap<Edge, [f64; 2]> = BTreeMap::new();
        chains
            .into_iter()
            .map(|chain| {
                let closed = chain.len() > 2 && chain.first() == chain.last();
                let points = chain
                    .iter()
                    .map(|&e| *cache.entry(e).or_insert_with(|| self.crossing(e)))
                    .collect();
                ContourLine {
                    energy: self.level,
                    separatrix,
                    closed,
                    points,
                }
            })
            .collect()
    }
}

/// Twelve levels evenly spaced strictly inside the sampled energy range,
/// plus the separatrix energies, ascending.
pub fn auto_levels(model: &ClassicalModel, lambda: f64, grid: usize) -> Result<Vec<f64>> {
    let samples = Samples::new(model, lambda, grid);
    auto_levels_from(model, lambda, &samples)
}

fn auto_levels_from(model: &ClassicalModel, lambda: f64, samples: &Samples) -> Result<Vec<f64>> {
    let (lo, hi) = samples.range();
    let mut levels: Vec<f64> = (0..AUTO_LEVELS)
        .map(|k| lo + (hi - lo) * (k + 1) as f64 / (AUTO_LEVELS + 1) as f64)
        .collect();
    levels.extend(separatrix_energies(model, lambda)?);
    levels.sort_by(f64::total_cmp);
    levels.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    Ok(levels)
}

/// Level sets of `H` by marching squares on a `grid × grid` cell sampling of
/// `[−1, 1] × [−π, π]`. Saddle cells are resolved by the cell-center average;
/// crossing points are refined on the true energy along each cell edge.
pub fn portrait(
    model: &ClassicalModel,
    lambda: f64,
    grid: usize,
    energies: Option<&[f64]>,
) -> Result<PhasePortrait> {
    if grid < MIN_GRID {
        return Err(Error::InvalidInput(format!("portrait grid must be at least {MIN_GRID}, got {grid}")));
    }
    if !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("λ must be finite, got {lambda}")));
    }
    let samples = Samples::new(model, lambda, grid);
    let separatrix = separatrix_energies(model, lambda)?;
    let levels = match energies {
        Some(e) => {
            if e.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("contour energies must be finite".into()));
            }
            let mut v = e.to_vec();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v
        }
        None => auto_levels_from(model, lambda, &samples)?,
    };
    let mut orbits: Vec<ContourLine> = levels
        .par_iter()
        .flat_map_iter(|&level| {
            let tracer = LevelTracer {
                model,
                lambda,
                samples: &samples,
                level,
            };
            let is_sep = separatrix.iter().any(|s| (s - level).abs() <= 1e-9);
            tracer.lines(is_sep)
        })
        .collect();
    let key = |l: &ContourLine| {
        l.points.iter().fold((f64::INFINITY, f64::INFINITY), |(q, p), x| {
            (q.min(x[1]), p.min(x[0]))
        })
    };
    orbits.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        a.energy
            .total_cmp(&b.energy)
            .then(ka.0.total_cmp(&kb.0))
            .then(ka.1.total_cmp(&kb.1))
    });
    Ok(PhasePortrait {
        model: model.id,
        lambda,
        grid,
        levels,
        separatrix_energies: separatrix,
        orbits,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_lie_on_their_level() {
        for id in ModelId::ALL {
            let m = ClassicalModel::new(id);
            let portrait = portrait(&m, 1.2, 120, None).unwrap();
            assert!(!portrait.orbits.is_empty());
            for line in &portrait.orbits {
                for x in &line.points {
                    assert!((m.energy(x[0], x[1], 1.2) - line.energy).abs() <= 1e-3);
                }
            }
        }
    }

    #[test]
    fn closed_lines_repeat_their_start() {
        let m = ClassicalModel::new(ModelId::Lipkin);
        let portrait = portrait(&m, 1.5, 100, Some(&[-1.5])).unwrap();
        assert_eq!(portrait.orbits.len(), 2);
        for line in &portrait.orbits {
            assert!(line.closed);
            assert_eq!(line.points.first(), line.points.last());
        }
    }

    #[test]
    fn auto_levels_include_separatrices() {
        let m = ClassicalModel::new(ModelId::Lipkin);
        let levels = auto_levels(&m, 1.5, 100).unwrap();
        assert_eq!(levels.len(), 14);
        assert!(levels.contains(&-1.0) && levels.contains(&1.0));
    }

    #[test]
    fn small_grid_rejected() {
        let m = ClassicalModel::new(ModelId::Lipkin);
        assert!(portrait(&m, 1.0, 50, None).is_err());
    }
}
