//! Exact diagonalization, coupling sweeps and transition detectors.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{build_reduced_hamiltonian, HamiltonianMatrix, ModelSpec};

/// Relative asymmetry above which a matrix is rejected.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// Relative gap below which the ground state is flagged degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;
/// Default smoothing half-width of the ESQPT detector.
pub const DEFAULT_WINDOW: usize = 2;

/// Maximum absolute row sum.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub spec: ModelSpec,
    pub g: f64,
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Columns ordered like `eigenvalues`.
    pub eigenvectors: Option<DMatrix<f64>>,
    /// Row-sum norm of the diagonalized matrix.
    pub norm: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// `(E_max − E_min)/(D − 1)`.
    pub fn mean_spacing(&self) -> f64 {
        let n = self.len();
        if n < 2 {
            return 0.0;
        }
        (self.eigenvalues[n - 1] - self.eigenvalues[0]) / (n - 1) as f64
    }

    /// The spectrum of `−H`, still ascending. Upper-band features of `H`
    /// become lower-band features of the negated spectrum.
    pub fn negated(&self) -> Spectrum {
        Spectrum {
            spec: self.spec,
            g: self.g,
            eigenvalues: self.eigenvalues.iter().rev().map(|e| -e).collect(),
            eigenvectors: self.eigenvectors.as_ref().map(|v| {
                let n = v.ncols();
                DMatrix::from_fn(v.nrows(), n, |r, c| v[(r, n - 1 - c)])
            }),
            norm: self.norm,
        }
    }
}

/// Full spectrum of a symmetric Hamiltonian.
pub fn diagonalize(h: &HamiltonianMatrix, want_vectors: bool) -> Result<Spectrum> {
    let m = &h.matrix;
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    let norm = operator_norm(m);
    let asymmetry = (0..m.nrows())
        .flat_map(|r| (0..r).map(move |c| (r, c)))
        .map(|(r, c)| (m[(r, c)] - m[(c, r)]).abs())
        .fold(0.0, f64::max);
    let tolerance = SYMMETRY_TOLERANCE * norm;
    if asymmetry > tolerance {
        return Err(Error::NotSymmetric { asymmetry, tolerance });
    }

    let (eigenvalues, eigenvectors) = if want_vectors {
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        (values, Some(vectors))
    } else {
        let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        (values, None)
    };

    Ok(Spectrum {
        spec: h.spec,
        g: h.g,
        eigenvalues,
        eigenvectors,
        norm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroundState {
    pub energy: f64,
    /// Expectation of the model observable.
    pub value: f64,
    /// `E₁ − E₀`.
    pub gap: f64,
    pub degenerate: bool,
}

/// Ground-state observable of an already diagonalized spectrum (with vectors).
pub fn ground_state_of(spectrum: &Spectrum) -> Result<GroundState> {
    let vectors = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("spectrum was computed without eigenvectors".into()))?;
    let diag = spectrum.spec.observable_diagonal();
    let v = vectors.column(0);
    let value = diag.iter().zip(v.iter()).map(|(o, c)| o * c * c).sum();
    let gap = if spectrum.len() > 1 {
        spectrum.eigenvalues[1] - spectrum.eigenvalues[0]
    } else {
        0.0
    };
    Ok(GroundState {
        energy: spectrum.ground_energy(),
        value,
        gap,
        degenerate: gap <= DEGENERACY_TOLERANCE * spectrum.norm,
    })
}

/// Ground-state expectation of the model observable at coupling `g`.
///
/// For a degenerate ground pair the vector returned by the solver is used
/// as is; `degenerate` is set.
pub fn ground_expectation(spec: &ModelSpec, g: f64) -> Result<GroundState> {
    let h = build_reduced_hamiltonian(spec, g)?;
    ground_state_of(&diagonalize(&h, true)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub g: f64,
    pub eigenvalues: Vec<f64>,
    pub ground: GroundState,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub spec: ModelSpec,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn g_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.g).collect()
    }
}

fn check_ascending(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("coupling grid is empty".into()));
    }
    if grid.iter().any(|g| !g.is_finite()) {
        return Err(Error::InvalidInput("coupling grid has non-finite values".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("coupling grid must be strictly ascending".into()));
    }
    Ok(())
}

/// Diagonalizes at every grid point in parallel; output follows grid order.
pub fn sweep(spec: &ModelSpec, g_grid: &[f64]) -> Result<SweepResult> {
    check_ascending(g_grid)?;
    let points = g_grid
        .par_iter()
        .map(|&g| {
            let spectrum = diagonalize(&build_reduced_hamiltonian(spec, g)?, true)?;
            let ground = ground_state_of(&spectrum)?;
            Ok(SweepPoint {
                g,
                eigenvalues: spectrum.eigenvalues,
                ground,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { spec: *spec, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EsqptMarker {
    pub g: f64,
    /// Midpoint of the minimal smoothed gap.
    pub energy: f64,
    pub gap_at_min: f64,
    /// Index `k` of the gap `E_{k+1} − E_k`.
    pub index: usize,
}

/// Lower-band ESQPT estimate from the minimum of the smoothed level gap.
///
/// Gaps are averaged over a centered window of `2·window + 1`; the search
/// covers the fully smoothed gaps below the band center. A minimum on either
/// end of that range means the gaps are monotone there and yields `None`.
/// Upper-band features are found through [`Spectrum::negated`].
pub fn esqpt_energy(spectrum: &Spectrum, window: usize) -> Result<Option<EsqptMarker>> {
    let e = &spectrum.eigenvalues;
    if window == 0 {
        return Err(Error::InvalidInput("window must be at least 1".into()));
    }
    if e.len() < 2 * window + 3 {
        return Err(Error::InvalidInput(format!(
            "spectrum of {} levels is too short for window {window}",
            e.len()
        )));
    }
    let gaps: Vec<f64> = e.windows(2).map(|w| w[1] - w[0]).collect();
    let half = (e.len() - 1) / 2;
    let width = (2 * window + 1) as f64;
    let candidates: Vec<(usize, f64)> = (window..gaps.len() - window)
        .filter(|&k| k < half)
        .map(|k| (k, gaps[k - window..=k + window].iter().sum::<f64>() / width))
        .collect();
    if candidates.len() < 3 {
        return Ok(None);
    }
    let (pos, &(index, smoothed)) = candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("nonempty");
    if pos == 0 || pos == candidates.len() - 1 {
        return Ok(None);
    }
    Ok(Some(EsqptMarker {
        g: spectrum.g,
        energy: 0.5 * (e[index] + e[index + 1]),
        gap_at_min: smoothed,
        index,
    }))
}

/// Largest grid step accepted by [`critical_g`].
pub const MAX_CRITICAL_STEP: f64 = 0.02;

/// Ground energy at each grid point, eigenvalues only.
pub fn ground_energies(spec: &ModelSpec, g_grid: &[f64]) -> Result<Vec<f64>> {
    g_grid
        .par_iter()
        .map(|&g| Ok(diagonalize(&build_reduced_hamiltonian(spec, g)?, false)?.ground_energy()))
        .collect()
}

/// Finite-size critical coupling: the grid point maximizing `−d²E₀/dg²`.
///
/// Errors with [`Error::Unconverged`] when the peak sits at the first or last
/// interior point, or when `E₀` is linear in `g` (no transition in range).
pub fn critical_g(spec: &ModelSpec, g_grid: &[f64]) -> Result<f64> {
    check_ascending(g_grid)?;
    if g_grid.len() < 5 {
        return Err(Error::InvalidInput("critical_g needs at least 5 grid points".into()));
    }
    let h = (g_grid[g_grid.len() - 1] - g_grid[0]) / (g_grid.len() - 1) as f64;
    if h > MAX_CRITICAL_STEP + 1e-12 {
        return Err(Error::InvalidInput(format!(
            "grid step {h} exceeds {MAX_CRITICAL_STEP}"
        )));
    }
    if g_grid
        .windows(2)
        .any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h)
    {
        return Err(Error::InvalidInput("critical_g needs a uniform grid".into()));
    }
    let e0 = ground_energies(spec, g_grid)?;
    let susceptibility: Vec<f64> = (1..e0.len() - 1)
        .map(|i| -(e0[i - 1] - 2.0 * e0[i] + e0[i + 1]) / (h * h))
        .collect();
    let (k, &peak) = susceptibility
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    let scale = 1.0 + e0.iter().fold(0.0_f64, |a, e| a.max(e.abs()));
    if peak <= 1e-6 * scale {
        return Err(Error::Unconverged(format!(
            "{}: ground energy has no curvature peak on [{}, {}]",
            spec.id,
            g_grid[0],
            g_grid[g_grid.len() - 1]
        )));
    }
    if k == 0 || k == susceptibility.len() - 1 {
        return Err(Error::Unconverged(format!(
            "{}: susceptibility peak at grid edge g = {}",
            spec.id,
            g_grid[k + 1]
        )));
    }
    Ok(g_grid[k + 1])
}

/// `start, start + step, …` up to `stop` inclusive within half a step.
pub fn uniform_grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 0.5).floor() as usize;
    (0..=n).map(|k| start + k as f64 * step).collect()
}
