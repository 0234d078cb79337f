//! Phase-space analysis of the classical Hamiltonians `H(p, q; λ)`.

mod bifurcation;
mod contour;
mod orbit;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{wrap_angle, ClassicalModel};

pub use bifurcation::{
    bifurcation_scan, bifurcation_scan_grid, BifurcationReport, Census, CensusEntry,
    CriticalPoint, Mechanism, PublishedCritical, BISECTION_WIDTH,
};
pub use contour::{auto_levels, portrait, ContourLine, PhasePortrait, DEFAULT_GRID};
pub use orbit::{integrate_orbit, Orbit, OrbitKind, OrbitPoint, DT_MIN};

/// Interior points stay this far from `p = ±1`.
pub const COLLAR: f64 = 1e-6;
pub const SEED_GRID: usize = 64;
pub const GRADIENT_TOLERANCE: f64 = 1e-10;
pub const MERGE_RADIUS: f64 = 1e-6;
pub const DEGENERATE_DET: f64 = 1e-9;

/// Distance from a pole at which the ring test samples the energy.
const POLE_OFFSET: f64 = 1e-4;
const POLE_SAMPLES: usize = 720;
const NEWTON_ITERATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FixedPointKind {
    Minimum,
    Maximum,
    Saddle,
    Degenerate,
}

impl FixedPointKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FixedPointKind::Minimum => "minimum",
            FixedPointKind::Maximum => "maximum",
            FixedPointKind::Saddle => "saddle",
            FixedPointKind::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FixedPoint {
    pub p: f64,
    pub q: f64,
    pub energy: f64,
    pub kind: FixedPointKind,
    pub on_boundary: bool,
}

/// Local character of a pole `p = ±1`, which is a single point of the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PoleKind {
    Minimum,
    Maximum,
    /// Energy rises along some directions and falls along others.
    Saddle,
}

/// Compares the energy on a small ring around the pole with the pole energy.
pub fn pole_kind(model: &ClassicalModel, lambda: f64, top: bool) -> PoleKind {
    let pole = model.boundary_energy(top);
    let p = if top { 1.0 - POLE_OFFSET } else { -1.0 + POLE_OFFSET };
    let (mut above, mut below) = (false, false);
    for k in 0..POLE_SAMPLES {
        let q = -PI + 2.0 * PI * k as f64 / POLE_SAMPLES as f64;
        let d = model.energy(p, q, lambda) - pole;
        above |= d > 0.0;
        below |= d < 0.0;
    }
    match (above, below) {
        (true, false) => PoleKind::Minimum,
        (false, true) => PoleKind::Maximum,
        _ => PoleKind::Saddle,
    }
}

fn classify(h: [[f64; 2]; 2]) -> FixedPointKind {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    if det.abs() <= DEGENERATE_DET {
        FixedPointKind::Degenerate
    } else if det < 0.0 {
        FixedPointKind::Saddle
    } else if h[0][0] + h[1][1] > 0.0 {
        FixedPointKind::Minimum
    } else {
        FixedPointKind::Maximum
    }
}

/// `q` wrapped, with values within rounding of `+π` mapped to `−π`.
fn canonical_angle(q: f64) -> f64 {
    let w = wrap_angle(q);
    if PI - w < 1e-12 {
        -PI
    } else {
        w
    }
}

/// Damped Newton iteration on the gradient; `None` unless the final gradient
/// norm is within [`GRADIENT_TOLERANCE`].
fn newton(model: &ClassicalModel, lambda: f64, p0: f64, q0: f64) -> Option<(f64, f64)> {
    let (mut p, mut q) = (p0, q0);
    let limit = 1.0 - COLLAR;
    for _ in 0..NEWTON_ITERATIONS {
        let g = model.gradient(p, q, lambda).ok()?;
        if g[0].hypot(g[1]) <= 1e-14 {
            break;
        }
        let h = model.hessian(p, q, lambda).ok()?;
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dp = (h[1][1] * g[0] - h[0][1] * g[1]) / det;
        let dq = (h[0][0] * g[1] - h[1][0] * g[0]) / det;
        let mut t = 1.0;
        while (p - t * dp).abs() > limit {
            t *= 0.5;
            if t < 1e-10 {
                return None;
            }
        }
        p -= t * dp;
        q = wrap_angle(q - t * dq);
        if (t * dp).abs() < 1e-16 && (t * dq).abs() < 1e-16 {
            break;
        }
    }
    let g = model.gradient(p, q, lambda).ok()?;
    (g[0].hypot(g[1]) <= GRADIENT_TOLERANCE).then_some((p, canonical_angle(q)))
}

fn phase_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(wrap_angle(a.1 - b.1))
}

/// Interior stationary points, Newton-refined from a 64×64 seed grid and
/// merged within [`MERGE_RADIUS`], followed by pole extrema (`on_boundary`,
/// reported at `q = 0`). Seeds that fail to converge are dropped.
pub fn find_fixed_points(model: &ClassicalModel, lambda: f64) -> Result<Vec<FixedPoint>> {
    if !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("λ must be finite, got {lambda}")));
    }
    let limit = 1.0 - COLLAR;
    let seeds: Vec<(f64, f64)> = (0..SEED_GRID)
        .flat_map(|i| {
            (0..SEED_GRID).map(move |k| {
                let p = -limit + 2.0 * limit * i as f64 / (SEED_GRID - 1) as f64;
                let q = -PI + 2.0 * PI * k as f64 / SEED_GRID as f64;
                (p, q)
            })
        })
        .collect();
    let converged: Vec<Option<(f64, f64)>> = seeds
        .par_iter()
        .map(|&(p, q)| newton(model, lambda, p, q))
        .collect();

    let mut found: Vec<(f64, f64)> = Vec::new();
    for point in converged.into_iter().flatten() {
        if !found.iter().any(|&f| phase_distance(f, point) <= MERGE_RADIUS) {
            found.push(point);
        }
    }
    // Rounded keys keep the order stable against last-bit noise; `+ 0.0` folds −0 into 0.
    let key = |x: f64| (x * 1e9).round() + 0.0;
    found.sort_by(|a, b| key(a.0).total_cmp(&key(b.0)).then(key(a.1).total_cmp(&key(b.1))));

    let mut points = Vec::with_capacity(found.len() + 2);
    for (p, q) in found {
        points.push(FixedPoint {
            p,
            q,
            energy: model.energy(p, q, lambda),
            kind: classify(model.hessian(p, q, lambda)?),
            on_boundary: false,
        });
    }
    for top in [false, true] {
        let kind = match pole_kind(model, lambda, top) {
            PoleKind::Minimum => FixedPointKind::Minimum,
            PoleKind::Maximum => FixedPointKind::Maximum,
            PoleKind::Saddle => continue,
        };
        points.push(FixedPoint {
            p: if top { 1.0 } else { -1.0 },
            q: 0.0,
            energy: model.boundary_energy(top),
            kind,
            on_boundary: true,
        });
    }
    Ok(points)
}

/// Energies of the level sets dividing librations from rotations, ascending.
///
/// These are the interior saddle energies together with the energies of
/// saddle-like poles. Models without a free term have a single orbit family
/// and return an empty list.
pub fn separatrix_energies(model: &ClassicalModel, lambda: f64) -> Result<Vec<f64>> {
    if model.free_term(0.5) == 0.0 {
        return Ok(Vec::new());
    }
    let mut energies: Vec<f64> = find_fixed_points(model, lambda)?
        .into_iter()
        .filter(|f| f.kind == FixedPointKind::Saddle)
        .map(|f| f.energy)
        .collect();
    for top in [false, true] {
        if pole_kind(model, lambda, top) == PoleKind::Saddle {
            energies.push(model.boundary_energy(top));
        }
    }
    energies.sort_by(f64::total_cmp);
    energies.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
    Ok(energies)
}

/// Global minimum of `orientation · H` over fixed points and poles.
pub fn oriented_minimum(model: &ClassicalModel, lambda: f64, orientation: f64) -> Result<f64> {
    let interior = find_fixed_points(model, lambda)?
        .into_iter()
        .filter(|f| !f.on_boundary)
        .map(|f| orientation * f.energy);
    let poles = [false, true]
        .into_iter()
        .map(|top| orientation * model.boundary_energy(top));
    Ok(interior.chain(poles).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelId;

    fn model(id: ModelId) -> ClassicalModel {
        ClassicalModel::new(id)
    }

    fn interior(id: ModelId, lambda: f64) -> Vec<FixedPoint> {
        find_fixed_points(&model(id), lambda)
            .unwrap()
            .into_iter()
            .filter(|f| !f.on_boundary)
            .collect()
    }

    #[test]
    fn lipkin_four_points() {
        let pts = interior(ModelId::Lipkin, 1.5);
        assert_eq!(pts.len(), 4);
        let third = 1.0 / 3.0;
        let expect = [
            (-third, -PI / 2.0, FixedPointKind::Minimum),
            (-third, PI / 2.0, FixedPointKind::Minimum),
            (third, -PI, FixedPointKind::Maximum),
            (third, 0.0, FixedPointKind::Maximum),
        ];
        for (f, (p, q, kind)) in pts.iter().zip(expect) {
            assert!((f.p - p).abs() < 1e-8 && (f.q - q).abs() < 1e-8, "{f:?}");
            assert_eq!(f.kind, kind);
        }
        assert!((pts[0].energy + 5.0 / 3.0).abs() < 1e-8);
        assert!(interior(ModelId::Lipkin, 0.4).is_empty());
    }

    #[test]
    fn interior_points_are_stationary() {
        for id in ModelId::ALL {
            for lambda in [-1.5, -0.6, 0.4, 0.8, 1.5] {
                let m = model(id);
                for f in interior(id, lambda) {
                    let g = m.gradient(f.p, f.q, lambda).unwrap();
                    assert!(g[0].hypot(g[1]) <= GRADIENT_TOLERANCE);
                    assert_eq!(classify(m.hessian(f.p, f.q, lambda).unwrap()), f.kind);
                }
            }
        }
    }

    #[test]
    fn heisenberg_points() {
        let pts = interior(ModelId::Heisenberg, 0.5);
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].q, pts[0].kind), (-PI, FixedPointKind::Minimum));
        assert!((pts[0].energy + 0.5).abs() < 1e-12);
        assert_eq!((pts[1].q, pts[1].kind), (0.0, FixedPointKind::Saddle));
        assert!((pts[1].energy - 0.5).abs() < 1e-12);
        let after = interior(ModelId::Heisenberg, 1.5);
        assert_eq!(after[1].kind, FixedPointKind::Maximum);
    }

    #[test]
    fn bilayer_points() {
        let pts = interior(ModelId::Bilayer, 0.8);
        assert_eq!(pts.len(), 2);
        assert!((pts[0].p + 7.0 / 9.0).abs() < 1e-6);
        assert_eq!(pts[0].kind, FixedPointKind::Minimum);
        assert!((pts[1].p - 0.75).abs() < 1e-8);
        assert!((pts[1].energy - 1.45).abs() < 1e-8);
    }

    #[test]
    fn pole_classes() {
        let lip = model(ModelId::Lipkin);
        assert_eq!(pole_kind(&lip, 0.4, false), PoleKind::Minimum);
        assert_eq!(pole_kind(&lip, 0.4, true), PoleKind::Maximum);
        assert_eq!(pole_kind(&lip, 0.6, false), PoleKind::Saddle);
        let bil = model(ModelId::Bilayer);
        assert_eq!(pole_kind(&bil, 0.5, true), PoleKind::Saddle);
        assert_eq!(pole_kind(&bil, 0.7, false), PoleKind::Minimum);
        assert_eq!(pole_kind(&bil, 0.72, false), PoleKind::Saddle);
    }

    #[test]
    fn separatrices() {
        let sep = |id, l| separatrix_energies(&model(id), l).unwrap();
        assert_eq!(sep(ModelId::Lipkin, 1.5), vec![-1.0, 1.0]);
        assert!(sep(ModelId::Lipkin, 0.4).is_empty());
        assert_eq!(sep(ModelId::Heisenberg, 0.5), vec![0.5]);
        assert_eq!(sep(ModelId::Heisenberg, 1.5), vec![1.0]);
        assert_eq!(sep(ModelId::Pairing, -1.5), vec![-1.0]);
        assert_eq!(sep(ModelId::Bilayer, 0.8), vec![-1.0, 1.0]);
        assert_eq!(sep(ModelId::Bilayer, 0.5), vec![1.0]);
        assert!(sep(ModelId::JcRotating, 1.0).is_empty());
    }

    #[test]
    fn oriented_minima() {
        let lip = model(ModelId::Lipkin);
        assert!((oriented_minimum(&lip, 1.0, 1.0).unwrap() + 1.25).abs() < 1e-12);
        assert_eq!(oriented_minimum(&lip, 0.25, 1.0).unwrap(), -1.0);
        let heis = model(ModelId::Heisenberg);
        assert_eq!(oriented_minimum(&heis, 0.5, -1.0).unwrap(), -1.0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn lipkin_points_at_half_inverse_lambda(lambda in 0.55f64..4.0) {
                let pts = interior(ModelId::Lipkin, lambda);
                prop_assert_eq!(pts.len(), 4);
                let p = 1.0 / (2.0 * lambda);
                for f in pts {
                    prop_assert!((f.p.abs() - p).abs() <= 1e-8);
                    prop_assert_eq!(f.p < 0.0, f.kind == FixedPointKind::Minimum);
                }
            }

            #[test]
            fn heisenberg_points_do_not_move(a in 0.05f64..0.95, b in 1.05f64..3.0) {
                let (pa, pb) = (interior(ModelId::Heisenberg, a), interior(ModelId::Heisenberg, b));
                prop_assert_eq!(pa.len(), pb.len());
                for (x, y) in pa.iter().zip(&pb) {
                    prop_assert!((x.p - y.p).abs() <= 1e-10 && (x.q - y.q).abs() <= 1e-10);
                }
            }

            #[test]
            fn lipkin_energy_symmetry(p in -1.0f64..1.0, q in -PI..PI, lambda in 0.0f64..3.0) {
                let m = model(ModelId::Lipkin);
                let e = m.energy(p, q, lambda);
                prop_assert!((m.energy(-p, q + PI / 2.0, lambda) + e).abs() <= 1e-12);
            }

            #[test]
            fn wrapped_angles_in_range(q in -100.0f64..100.0) {
                let w = wrap_angle(q);
                prop_assert!((-PI..PI).contains(&w));
                prop_assert!(((q - w) / (2.0 * PI)).fract().abs().min(1.0 - ((q - w) / (2.0 * PI)).fract().abs()) < 1e-9);
            }
        }
    }
}
