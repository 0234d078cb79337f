use std::f64::consts::PI;

use serde::Serialize;

use super::COLLAR;
use crate::error::{Error, Result};
use crate::models::{wrap_angle, ClassicalModel};

/// Smallest step tried before an orbit is truncated at the boundary.
pub const DT_MIN: f64 = 1e-6;
/// Neighborhood of the start point that counts as a return.
const CLOSURE_RADIUS: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrbitPoint {
    pub t: f64,
    pub p: f64,
    /// Wrapped to `[−π, π)`.
    pub q: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OrbitKind {
    /// Closed orbit around an extremum.
    Libration,
    /// Open orbit, `q` runs through the full period.
    Rotation,
    /// Neither within the integration time.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Orbit {
    pub points: Vec<OrbitPoint>,
    pub energy: f64,
    pub max_drift: f64,
    pub hit_boundary: bool,
    pub kind: OrbitKind,
}

/// Hamilton's equations: `dp/dt = −∂H/∂q`, `dq/dt = ∂H/∂p`.
fn flow(model: &ClassicalModel, lambda: f64, p: f64, q: f64) -> Option<[f64; 2]> {
    if p.abs() > 1.0 - COLLAR || !p.is_finite() {
        return None;
    }
    let g = model.gradient(p, q, lambda).ok()?;
    let v = [-g[1], g[0]];
    (v[0].is_finite() && v[1].is_finite()).then_some(v)
}

fn rk4(model: &ClassicalModel, lambda: f64, p: f64, q: f64, dt: f64) -> Option<(f64, f64)> {
    let k1 = flow(model, lambda, p, q)?;
    let k2 = flow(model, lambda, p + 0.5 * dt * k1[0], q + 0.5 * dt * k1[1])?;
    let k3 = flow(model, lambda, p + 0.5 * dt * k2[0], q + 0.5 * dt * k2[1])?;
    let k4 = flow(model, lambda, p + dt * k3[0], q + dt * k3[1])?;
    let np = p + dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    let nq = q + dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    flow(model, lambda, np, nq)?;
    Some((np, nq))
}

/// Distance from `x` to the segment `[a, b]` in the `(p, q)` plane.
fn segment_distance(x: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((x.0 - a.0) * dx + (x.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (a.0 + t * dx - x.0).hypot(a.1 + t * dy - x.1)
}

/// Fixed-step RK4 from `(p0, q0)` up to `t_end`. Steps that would leave the
/// interior collar are halved down to [`DT_MIN`]; past that the orbit stops
/// with `hit_boundary` set.
pub fn integrate_orbit(
    model: &ClassicalModel,
    lambda: f64,
    p0: f64,
    q0: f64,
    t_end: f64,
    dt: f64,
) -> Result<Orbit> {
    if p0.abs() >= 1.0 - COLLAR || !p0.is_finite() || !q0.is_finite() {
        return Err(Error::InvalidInput(format!("start point ({p0}, {q0}) is not interior")));
    }
    if dt.is_nan() || dt <= 0.0 || t_end.is_nan() || t_end < 0.0 {
        return Err(Error::InvalidInput("need dt > 0 and t_end ≥ 0".into()));
    }
    let energy = model.energy(p0, q0, lambda);
    let start = (p0, wrap_angle(q0));
    // q is integrated unwrapped so that windings stay visible.
    let (mut t, mut p, mut q) = (0.0, p0, start.1);
    let mut points = vec![OrbitPoint { t, p, q }];
    let (mut max_drift, mut hit_boundary) = (0.0_f64, false);
    let (mut left_start, mut closed) = (false, false);
    let mut max_winding = 0.0_f64;

    while t < t_end {
        let target = dt.min(t_end - t);
        let mut h = target;
        let next = loop {
            match rk4(model, lambda, p, q, h) {
                Some(step) => break Some(step),
                None if h * 0.5 >= DT_MIN => h *= 0.5,
                None => break None,
            }
        };
        let Some((np, nq)) = next else {
            hit_boundary = true;
            break;
        };
        let prev = (p, q);
        t += h;
        p = np;
        q = nq;
        max_drift = max_drift.max((model.energy(p, q, lambda) - energy).abs());
        max_winding = max_winding.max((q - start.1).abs());
        points.push(OrbitPoint { t, p, q: wrap_angle(q) });

        let here = (p, q);
        if (here.0 - start.0).hypot(here.1 - start.1) > 10.0 * CLOSURE_RADIUS {
            left_start = true;
        } else if left_start
            && !closed
            && max_winding < 2.0 * PI
            && segment_distance(start, prev, here) <= CLOSURE_RADIUS
        {
            closed = true;
        }
    }

    let kind = if max_winding >= 2.0 * PI {
        OrbitKind::Rotation
    } else if closed {
        OrbitKind::Libration
    } else {
        OrbitKind::Undetermined
    };
    Ok(Orbit {
        points,
        energy,
        max_drift,
        hit_boundary,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelId;

    #[test]
    fn lipkin_libration_and_rotation() {
        let m = ClassicalModel::new(ModelId::Lipkin);
        let o = integrate_orbit(&m, 1.5, -1.0 / 3.0 + 0.05, PI / 2.0, 100.0, 1e-3).unwrap();
        assert_eq!(o.kind, OrbitKind::Libration);
        assert!(o.max_drift <= 1e-6);
        let o = integrate_orbit(&m, 0.4, 0.9, 0.0, 100.0, 1e-3).unwrap();
        assert_eq!(o.kind, OrbitKind::Rotation);
        assert!(!o.hit_boundary);
    }

    #[test]
    fn separatrix_orbit_runs_into_pole() {
        // (1/3, π/2) lies on the Lipkin λ=1.5 separatrix through p = −1.
        let m = ClassicalModel::new(ModelId::Lipkin);
        let o = integrate_orbit(&m, 1.5, 1.0 / 3.0, PI / 2.0, 100.0, 1e-3).unwrap();
        assert!(o.hit_boundary);
        assert!(o.points.last().unwrap().t < 100.0);
        assert!(o.points.iter().all(|x| x.p.abs() <= 1.0 - COLLAR));
    }

    #[test]
    fn rejects_boundary_start() {
        let m = ClassicalModel::new(ModelId::Lipkin);
        assert!(integrate_orbit(&m, 1.0, 1.0, 0.0, 1.0, 1e-3).is_err());
        assert!(integrate_orbit(&m, 1.0, 0.0, 0.0, 1.0, 0.0).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(8))]

            #[test]
            fn energy_conserved(which in 0usize..6, lambda in 0.2f64..2.0,
                                p0 in -0.8f64..0.8, q0 in -PI..PI) {
                let m = ClassicalModel::new(ModelId::ALL[which]);
                let o = integrate_orbit(&m, lambda, p0, q0, 20.0, 1e-3).unwrap();
                prop_assert!(o.max_drift <= 1e-6, "drift {}", o.max_drift);
            }
        }
    }
}
