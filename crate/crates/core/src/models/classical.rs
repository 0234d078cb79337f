use std::f64::consts::PI;

use super::ModelId;
use crate::error::{Error, Result};

/// Classical one-degree-of-freedom Hamiltonian `H(p, q; λ)` on
/// `p ∈ [−1, 1]`, `q ∈ [−π, π)`:
///
/// | model      | `H(p, q; λ)`                     |
/// |------------|----------------------------------|
/// | Lipkin     | `p + λ(1−p²) cos 2q`             |
/// | pairing    | `p + λ(1−p²) cos²(q/2)`          |
/// | JC rotating| `λ(1+p)√(1−p) cos q`             |
/// | JC counter | `p + λ(1+p)√(1−p) cos q`         |
/// | bilayer    | `p + λ(1+p)√(1−p) cos q`         |
/// | Heisenberg | `p² + λ(1−p²) cos q`             |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassicalModel {
    pub id: ModelId,
}

/// `f(p) = (1+p)√(1−p)` and its first two derivatives.
fn root_factor(p: f64) -> (f64, f64, f64) {
    let s = (1.0 - p).sqrt();
    let f = (1.0 + p) * s;
    let df = (1.0 - 3.0 * p) / (2.0 * s);
    let d2f = (3.0 * p - 5.0) / (4.0 * s * (1.0 - p));
    (f, df, d2f)
}

impl ClassicalModel {
    pub fn new(id: ModelId) -> Self {
        Self { id }
    }

    /// Models whose interaction carries `√(1−p)`; their gradient diverges at `p = 1`.
    pub fn has_root_singularity(&self) -> bool {
        matches!(
            self.id,
            ModelId::JcRotating | ModelId::JcCounterRotating | ModelId::Bilayer
        )
    }

    /// The free term `p^n`.
    pub fn free_term(&self, p: f64) -> f64 {
        match self.id {
            ModelId::JcRotating => 0.0,
            ModelId::Heisenberg => p * p,
            _ => p,
        }
    }

    /// Energy; NaN outside `|p| ≤ 1`.
    pub fn energy(&self, p: f64, q: f64, lambda: f64) -> f64 {
        if p.abs() > 1.0 {
            return f64::NAN;
        }
        let interaction = match self.id {
            ModelId::Lipkin => (1.0 - p * p) * (2.0 * q).cos(),
            ModelId::Pairing => (1.0 - p * p) * 0.5 * (1.0 + q.cos()),
            ModelId::JcRotating | ModelId::JcCounterRotating | ModelId::Bilayer => {
                (1.0 + p) * (1.0 - p).sqrt() * q.cos()
            }
            ModelId::Heisenberg => (1.0 - p * p) * q.cos(),
        };
        self.free_term(p) + lambda * interaction
    }

    /// Energy on the boundary line `p = ±1`, where it does not depend on `q`.
    pub fn boundary_energy(&self, top: bool) -> f64 {
        self.energy(if top { 1.0 } else { -1.0 }, 0.0, 0.0)
    }

    fn check_domain(&self, p: f64) -> Result<()> {
        let singular = if self.has_root_singularity() {
            p >= 1.0
        } else {
            false
        };
        if singular || p.abs() > 1.0 || !p.is_finite() {
            return Err(Error::SingularBoundary { p });
        }
        Ok(())
    }

    /// `(∂H/∂p, ∂H/∂q)`.
    pub fn gradient(&self, p: f64, q: f64, lambda: f64) -> Result<[f64; 2]> {
        self.check_domain(p)?;
        let (s, c) = q.sin_cos();
        Ok(match self.id {
            ModelId::Lipkin => {
                let (s2, c2) = (2.0 * q).sin_cos();
                [1.0 - 2.0 * lambda * p * c2, -2.0 * lambda * (1.0 - p * p) * s2]
            }
            ModelId::Pairing => [
                1.0 - lambda * p * (1.0 + c),
                -0.5 * lambda * (1.0 - p * p) * s,
            ],
            ModelId::JcRotating | ModelId::JcCounterRotating | ModelId::Bilayer => {
                let (f, df, _) = root_factor(p);
                let free = if self.id == ModelId::JcRotating { 0.0 } else { 1.0 };
                [free + lambda * df * c, -lambda * f * s]
            }
            ModelId::Heisenberg => [
                2.0 * p * (1.0 - lambda * c),
                -lambda * (1.0 - p * p) * s,
            ],
        })
    }

    /// `[[H_pp, H_pq], [H_pq, H_qq]]`.
    pub fn hessian(&self, p: f64, q: f64, lambda: f64) -> Result<[[f64; 2]; 2]> {
        self.check_domain(p)?;
        let (s, c) = q.sin_cos();
        let (hpp, hpq, hqq) = match self.id {
            ModelId::Lipkin => {
                let (s2, c2) = (2.0 * q).sin_cos();
                (
                    -2.0 * lambda * c2,
                    4.0 * lambda * p * s2,
                    -4.0 * lambda * (1.0 - p * p) * c2,
                )
            }
            ModelId::Pairing => (
                -lambda * (1.0 + c),
                lambda * p * s,
                -0.5 * lambda * (1.0 - p * p) * c,
            ),
            ModelId::JcRotating | ModelId::JcCounterRotating | ModelId::Bilayer => {
                let (f, df, d2f) = root_factor(p);
                (lambda * d2f * c, -lambda * df * s, -lambda * f * c)
            }
            ModelId::Heisenberg => (
                2.0 * (1.0 - lambda * c),
                2.0 * lambda * p * s,
                -lambda * (1.0 - p * p) * c,
            ),
        };
        Ok([[hpp, hpq], [hpq, hqq]])
    }
}

/// Wraps an angle into `[−π, π)`.
pub fn wrap_angle(q: f64) -> f64 {
    let r = (q + PI).rem_euclid(2.0 * PI) - PI;
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(id: ModelId) -> ClassicalModel {
        ClassicalModel::new(id)
    }

    #[test]
    fn pointwise_values() {
        assert!((model(ModelId::Lipkin).energy(0.0, 0.0, 1.5) - 1.5).abs() < 1e-15);
        for q in [-3.0, -1.0, 0.0, 2.5] {
            for lambda in [0.2, 1.0, 7.0] {
                assert_eq!(model(ModelId::Bilayer).energy(1.0, q, lambda), 1.0);
            }
        }
        assert!((model(ModelId::Heisenberg).energy(0.0, PI, 0.5) + 0.5).abs() < 1e-15);
        assert!(model(ModelId::Lipkin).energy(1.2, 0.0, 1.0).is_nan());
    }

    #[test]
    fn gradient_flagged_at_root_singularity() {
        let m = model(ModelId::JcCounterRotating);
        assert!(m.energy(1.0, 0.3, 0.8).is_finite());
        assert!(matches!(m.gradient(1.0, 0.3, 0.8), Err(Error::SingularBoundary { .. })));
        assert!(m.hessian(1.0, 0.3, 0.8).is_err());
        assert!(model(ModelId::Lipkin).gradient(1.0, 0.3, 0.8).is_ok());
    }

    #[test]
    fn angle_wrapping() {
        assert_eq!(wrap_angle(PI), -PI);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_angle(-PI), -PI);
        assert!((wrap_angle(0.25) - 0.25).abs() < 1e-15);
    }

    /// Centered finite differences against the analytic derivatives on a
    /// 50×50 interior grid.
    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for id in ModelId::ALL {
            let m = model(id);
            for lambda in [0.4, 0.8, 1.5] {
                for i in 0..50 {
                    let p = -1.0 + 2.0 * (i as f64 + 0.5) / 50.0;
                    for k in 0..50 {
                        let q = -PI + 2.0 * PI * (k as f64 + 0.5) / 50.0;
                        let e = |p, q| m.energy(p, q, lambda);
                        let fd = [
                            (e(p + h, q) - e(p - h, q)) / (2.0 * h),
                            (e(p, q + h) - e(p, q - h)) / (2.0 * h),
                        ];
                        let g = m.gradient(p, q, lambda).unwrap();
                        let gp = |p, q| m.gradient(p, q, lambda).unwrap();
                        let fh = [
                            [
                                (gp(p + h, q)[0] - gp(p - h, q)[0]) / (2.0 * h),
                                (gp(p, q + h)[0] - gp(p, q - h)[0]) / (2.0 * h),
                            ],
                            [
                                (gp(p + h, q)[1] - gp(p - h, q)[1]) / (2.0 * h),
                                (gp(p, q + h)[1] - gp(p, q - h)[1]) / (2.0 * h),
                            ],
                        ];
                        let hs = m.hessian(p, q, lambda).unwrap();
                        let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * a.abs().max(b.abs()).max(1.0);
                        for c in 0..2 {
                            assert!(close(g[c], fd[c]), "{id} grad[{c}] at ({p},{q},{lambda})");
                            for r in 0..2 {
                                assert!(
                                    close(hs[r][c], fh[r][c]),
                                    "{id} hess[{r}][{c}] at ({p},{q},{lambda}): {} vs {}",
                                    hs[r][c],
                                    fh[r][c]
                                );
                            }
                        }
                    }
                }
            }
        }
    }
}
