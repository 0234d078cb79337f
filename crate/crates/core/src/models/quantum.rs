use nalgebra::DMatrix;

use super::{ModelId, ModelSpec};
use crate::error::{Error, Result};
use crate::su2::{
    build_spin_operators, lowering_coefficient, raising_coefficient, spinorized_boson,
    tensor_embed, LadderSet, Spin,
};

/// Largest `2j` accepted by [`build_full_hamiltonian`].
pub const MAX_FULL_SPIN_TWICE: u32 = 16;

/// One reduced-basis state: the first spin's `m` and, for spin-boson models,
/// the boson occupation `n` fixed by the conserved quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisState {
    pub m: f64,
    pub n: Option<u32>,
}

/// Model Hamiltonian restricted to its (2j+1)-dimensional conserved sector.
#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub spec: ModelSpec,
    pub g: f64,
    pub matrix: DMatrix<f64>,
    pub basis: Vec<BasisState>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Number of nonzero diagonals above the main one.
    pub fn bandwidth(&self) -> usize {
        let d = self.dim();
        (1..d)
            .rev()
            .find(|&k| (0..d - k).any(|r| self.matrix[(r, r + k)] != 0.0))
            .unwrap_or(0)
    }
}

fn set_symmetric(h: &mut DMatrix<f64>, r: usize, c: usize, value: f64) {
    h[(r, c)] = value;
    h[(c, r)] = value;
}

/// Builds the reduced Hamiltonian directly from ladder coefficients.
///
/// Bases, all indexed by `m = −j … j`:
/// - Lipkin: `|j, m⟩`
/// - Pairing, Heisenberg: `|j, −m⟩₁ ⊗ |j, m⟩₂`
/// - JC rotating, bilayer: spin `m`, boson `n = j − m`
/// - JC counter-rotating: spin `m`, boson `n = j + m`
pub fn build_reduced_hamiltonian(spec: &ModelSpec, g: f64) -> Result<HamiltonianMatrix> {
    if !g.is_finite() {
        return Err(Error::InvalidInput(format!("coupling must be finite, got {g}")));
    }
    let spin = spec.spin;
    let j = spin.value();
    let d = spin.dim();
    let mut h = DMatrix::zeros(d, d);
    let cp = |m: f64| raising_coefficient(spin, m);
    let cm = |m: f64| lowering_coefficient(spin, m);
    let mut basis = Vec::with_capacity(d);

    for k in 0..d {
        let m = spin.m(k);
        let n_of = |n: f64| Some(n.round() as u32);
        match spec.id {
            ModelId::Lipkin => {
                let n_part = spec.particles.unwrap_or(2.0 * j);
                h[(k, k)] = m;
                if k + 2 < d {
                    let v = g / (2.0 * n_part) * cp(m) * cp(m + 1.0);
                    set_symmetric(&mut h, k + 2, k, v);
                }
                basis.push(BasisState { m, n: None });
            }
            ModelId::Pairing => {
                let n_part = spec.particles.unwrap_or(4.0 * j);
                // H₀ = J2z − J1z = 2m; diagonal of J2+J2− + J1+J1−.
                let diag = cm(m).powi(2) + cp(m).powi(2);
                h[(k, k)] = 2.0 * m - g / n_part * diag;
                if k + 1 < d {
                    // J2+ J1−: (−m, m) → (−m−1, m+1)
                    set_symmetric(&mut h, k + 1, k, -g / n_part * cp(m) * cm(-m));
                }
                basis.push(BasisState { m, n: None });
            }
            ModelId::JcRotating => {
                let scale = g / spec.particles.unwrap_or(2.0 * j).sqrt();
                h[(k, k)] = j;
                if k + 1 < d {
                    // b J1+: n = j − m lowered to n − 1
                    set_symmetric(&mut h, k + 1, k, scale * cp(m) * (j - m).sqrt());
                }
                basis.push(BasisState { m, n: n_of(j - m) });
            }
            ModelId::JcCounterRotating => {
                let scale = g / spec.particles.unwrap_or(2.0 * j).sqrt();
                h[(k, k)] = j + 2.0 * m;
                if k + 1 < d {
                    // b† J1+: n = j + m raised to n + 1
                    set_symmetric(&mut h, k + 1, k, scale * cp(m) * (j + m + 1.0).sqrt());
                }
                basis.push(BasisState { m, n: n_of(j + m) });
            }
            ModelId::Bilayer => {
                let scale = g / spec.particles.unwrap_or(4.0 * j).sqrt();
                h[(k, k)] = j - m;
                if k + 1 < d {
                    // J1+ b: n = j − m lowered to n − 1
                    set_symmetric(&mut h, k + 1, k, scale * cp(m) * (j - m).sqrt());
                }
                basis.push(BasisState { m, n: n_of(j - m) });
            }
            ModelId::Heisenberg => {
                h[(k, k)] = -m * m;
                if k + 1 < d {
                    // J1− J2+: (−m, m) → (−m−1, m+1)
                    set_symmetric(&mut h, k + 1, k, g / 2.0 * cm(-m) * cp(m));
                }
                basis.push(BasisState { m, n: None });
            }
        }
    }

    Ok(HamiltonianMatrix {
        spec: *spec,
        g,
        matrix: h,
        basis,
    })
}

/// A model Hamiltonian on the unreduced tensor space, together with the
/// diagonal of its conserved operator and the sector value the reduced
/// builder targets.
#[derive(Debug, Clone)]
pub struct FullHamiltonian {
    pub spec: ModelSpec,
    pub g: f64,
    pub matrix: DMatrix<f64>,
    pub conserved: Vec<f64>,
    pub sector: f64,
}

impl FullHamiltonian {
    pub fn conserved_operator(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.conserved.clone()))
    }

    pub fn sector_indices(&self) -> Vec<usize> {
        self.conserved
            .iter()
            .enumerate()
            .filter(|(_, &c)| (c - self.sector).abs() < 1e-9)
            .map(|(i, _)| i)
            .collect()
    }

    /// The block of `matrix` on the conserved sector.
    pub fn sector_matrix(&self) -> DMatrix<f64> {
        let idx = self.sector_indices();
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| self.matrix[(idx[r], idx[c])])
    }
}

/// Second component of a two-component model: spin operators for the
/// spin-spin models, inverse Holstein–Primakoff bosons for the rest.
struct Second {
    jz: DMatrix<f64>,
    raise: DMatrix<f64>,
    lower: DMatrix<f64>,
}

/// Builds the model on the full product space by operator products.
///
/// Spin-boson models use the spinorized boson of a spin `j` (boson
/// truncation `n_max = 2j`). Lipkin has a single component; its full space is
/// the spin-`j` multiplet itself and the sector is trivial.
pub fn build_full_hamiltonian(spec: &ModelSpec, g: f64) -> Result<FullHamiltonian> {
    if spec.spin.twice() > MAX_FULL_SPIN_TWICE {
        return Err(Error::SpinTooLarge {
            j: spec.spin.value(),
            max: MAX_FULL_SPIN_TWICE as f64 / 2.0,
        });
    }
    if !g.is_finite() {
        return Err(Error::InvalidInput(format!("coupling must be finite, got {g}")));
    }
    let j = spec.spin.value();
    let one: LadderSet = build_spin_operators(spec.spin);

    if spec.id == ModelId::Lipkin {
        let n_part = spec.particles.unwrap_or(2.0 * j);
        let sq = &one.jplus * &one.jplus + &one.jminus * &one.jminus;
        let matrix = &one.jz + sq * (g / (2.0 * n_part));
        let d = one.dim();
        return Ok(FullHamiltonian {
            spec: *spec,
            g,
            matrix,
            conserved: vec![0.0; d],
            sector: 0.0,
        });
    }

    let second = if spec.id.has_boson() {
        let boson = spinorized_boson(Spin::from_twice(spec.spin.twice()));
        let d = boson.n_max + 1;
        Second {
            jz: &boson.number - DMatrix::identity(d, d) * j,
            raise: boson.bdag,
            lower: boson.b,
        }
    } else {
        let s = build_spin_operators(spec.spin);
        Second {
            jz: s.jz,
            raise: s.jplus,
            lower: s.jminus,
        }
    };

    let i1 = one.identity();
    let i2 = DMatrix::identity(second.jz.nrows(), second.jz.ncols());
    let left = |a: &DMatrix<f64>| tensor_embed(a, &i2);
    let right = |b: &DMatrix<f64>| tensor_embed(&i1, b);

    let j1z = left(&one.jz)?;
    let j1p = left(&one.jplus)?;
    let j1m = left(&one.jminus)?;
    let j2z = right(&second.jz)?;
    let j2p = right(&second.raise)?;
    let j2m = right(&second.lower)?;
    let dim = j1z.nrows();
    let id = DMatrix::<f64>::identity(dim, dim);

    let (matrix, conserved_op) = match spec.id {
        ModelId::Pairing => {
            let n_part = spec.particles.unwrap_or(4.0 * j);
            let up = &j2p + &j1p;
            let down = &j2m + &j1m;
            let h = &j2z - &j1z - (up * down) * (g / n_part);
            (h, &j1z + &j2z)
        }
        ModelId::JcRotating => {
            let scale = g / spec.particles.unwrap_or(2.0 * j).sqrt();
            let h = &id * j + &j1z + &j2z + (&j2m * &j1p + &j2p * &j1m) * scale;
            (h, &j1z + &j2z)
        }
        ModelId::JcCounterRotating => {
            let scale = g / spec.particles.unwrap_or(2.0 * j).sqrt();
            let h = &id * j + &j1z + &j2z + (&j2p * &j1p + &j2m * &j1m) * scale;
            (h, &j2z - &j1z)
        }
        ModelId::Bilayer => {
            let scale = g / spec.particles.unwrap_or(4.0 * j).sqrt();
            let h = &id * j + &j2z + (&j1p * &j2m + &j2p * &j1m) * scale;
            (h, &j1z + &j2z)
        }
        ModelId::Heisenberg => {
            let h = &j1z * &j2z + (&j1p * &j2m + &j1m * &j2p) * (g / 2.0);
            (h, &j1z + &j2z)
        }
        ModelId::Lipkin => unreachable!("handled above"),
    };

    Ok(FullHamiltonian {
        spec: *spec,
        g,
        matrix,
        conserved: conserved_op.diagonal().iter().copied().collect(),
        sector: 0.0,
    })
}
