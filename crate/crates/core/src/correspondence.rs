//! Quantum–classical cross-checks.
//!
//! Quantum energies are compared in classical units through each model's
//! [`EnergyMap`](crate::models::EnergyMap): `orientation · (E − offset) / scale`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{build_reduced_hamiltonian, ModelId, ModelSpec};
use crate::phase::{
    bifurcation_scan_grid, oriented_minimum, separatrix_energies, BifurcationReport,
};
use crate::spectra::{critical_g, diagonalize, esqpt_energy, uniform_grid, DEFAULT_WINDOW};
use crate::su2::Spin;

/// `j = 25, 50, 100`.
pub const DEFAULT_J_LIST: [Spin; 3] = [
    Spin::from_twice(50),
    Spin::from_twice(100),
    Spin::from_twice(200),
];
/// Largest spin accepted for convergence tables.
pub const MAX_SPIN_TWICE: u32 = 800;
/// ESQPT and separatrix must agree within this many mean level spacings.
pub const ESQPT_SPACINGS: f64 = 5.0;
pub const CRITICAL_SPIN: Spin = Spin::from_twice(200);
pub const CRITICAL_STEP: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub j: Spin,
    pub ground_energy: f64,
    pub scaled_ground: f64,
    /// `|scaled_ground − classical_min|`.
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EsqptComparison {
    /// Raw quantum energy of the gap minimum.
    pub energy: f64,
    /// Same in classical units.
    pub scaled: f64,
    /// Nearest separatrix energy.
    pub separatrix: f64,
    pub deviation: f64,
    /// `5 · mean spacing / scale`.
    pub tolerance: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceReport {
    pub spec: ModelSpec,
    pub g: f64,
    pub lambda: f64,
    /// Values at the largest `j` of the table.
    pub scaled_ground: f64,
    pub classical_min: f64,
    pub deviation: f64,
    pub convergence: Vec<ConvergenceRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub esqpt_scaled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub separatrix: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub esqpt: Option<EsqptComparison>,
}

impl CorrespondenceReport {
    /// Whether each deviation is below the previous one; a 10% rise is
    /// tolerated at the largest pair.
    pub fn deviations_decrease(&self) -> bool {
        let d: Vec<f64> = self.convergence.iter().map(|r| r.deviation).collect();
        let n = d.len();
        d.windows(2).enumerate().all(|(i, w)| {
            if i + 2 == n {
                w[1] <= 1.1 * w[0]
            } else {
                w[1] < w[0]
            }
        })
    }
}

fn check_j_list(j_list: &[Spin]) -> Result<()> {
    if j_list.is_empty() {
        return Err(Error::InvalidInput("j list is empty".into()));
    }
    if j_list.windows(2).any(|w| w[1].twice() <= w[0].twice()) {
        return Err(Error::InvalidInput("j list must be strictly ascending".into()));
    }
    let last = j_list[j_list.len() - 1];
    if last.twice() > MAX_SPIN_TWICE {
        return Err(Error::InvalidInput(format!(
            "j = {last} exceeds {}",
            MAX_SPIN_TWICE / 2
        )));
    }
    Ok(())
}

/// Scaled ground energy against the classical minimum at `λ(g)` for each `j`.
pub fn ground_energy_match(id: ModelId, g: f64, j_list: &[Spin]) -> Result<CorrespondenceReport> {
    check_j_list(j_list)?;
    let specs: Vec<ModelSpec> = j_list
        .iter()
        .map(|&j| ModelSpec::new(id, j))
        .collect::<Result<_>>()?;
    let last = specs[specs.len() - 1];
    let lambda = last.lambda_of_g(g);
    let classical_min = oriented_minimum(&last.classical(), lambda, last.energy_map.orientation)?;
    let convergence = specs
        .par_iter()
        .map(|spec| {
            let e0 = diagonalize(&build_reduced_hamiltonian(spec, g)?, false)?.ground_energy();
            let scaled = spec.energy_map.scaled(e0);
            Ok(ConvergenceRow {
                j: spec.spin,
                ground_energy: e0,
                scaled_ground: scaled,
                deviation: (scaled - classical_min).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let top = convergence[convergence.len() - 1];
    Ok(CorrespondenceReport {
        spec: last,
        g,
        lambda,
        scaled_ground: top.scaled_ground,
        classical_min,
        deviation: top.deviation,
        convergence,
        esqpt_scaled: None,
        separatrix: None,
        esqpt: None,
    })
}

/// Ground-energy table plus the ESQPT of the largest `j` compared with the
/// nearest classical separatrix. Models whose portrait has no separatrix
/// report no ESQPT fields; `esqpt` is also absent when no gap minimum is found.
pub fn correspondence_report(
    id: ModelId,
    g: f64,
    j_list: &[Spin],
    window: usize,
) -> Result<CorrespondenceReport> {
    let mut report = ground_energy_match(id, g, j_list)?;
    let spec = report.spec;
    let map = spec.energy_map;
    let spectrum = diagonalize(&build_reduced_hamiltonian(&spec, g)?, false)?;
    let marker = esqpt_energy(&spectrum, window)?;
    let separatrix = separatrix_energies(&spec.classical(), report.lambda)?;

    let scaled = marker.map(|m| map.oriented(map.scaled(m.energy)));
    if !separatrix.is_empty() {
        report.esqpt_scaled = scaled;
        if let (Some(m), Some(s)) = (marker, scaled) {
            let nearest = separatrix
                .iter()
                .copied()
                .min_by(|a, b| (a - s).abs().total_cmp(&(b - s).abs()))
                .expect("nonempty");
            let tolerance = ESQPT_SPACINGS * spectrum.mean_spacing() / map.scale;
            let deviation = (s - nearest).abs();
            report.esqpt = Some(EsqptComparison {
                energy: m.energy,
                scaled: s,
                separatrix: nearest,
                deviation,
                tolerance,
                matches: deviation <= tolerance,
            });
        }
        report.separatrix = Some(separatrix);
    }
    Ok(report)
}

/// [`correspondence_report`] at a single `j` with the default window.
pub fn esqpt_separatrix_match(id: ModelId, g: f64, j: Spin) -> Result<CorrespondenceReport> {
    correspondence_report(id, g, &[j], DEFAULT_WINDOW)
}

/// Coupling windows searched by [`critical_match`]: `(g range, λ range)`.
pub fn critical_ranges(id: ModelId) -> ((f64, f64), (f64, f64)) {
    match id {
        ModelId::Lipkin => ((0.3, 2.0), (0.2, 1.2)),
        ModelId::Pairing => ((0.3, 2.0), (-1.2, -0.2)),
        ModelId::JcRotating => ((0.3, 2.0), (0.2, 2.0)),
        ModelId::JcCounterRotating => ((0.3, 2.0), (0.5, 1.0)),
        ModelId::Bilayer => ((0.3, 1.5), (0.5, 1.0)),
        ModelId::Heisenberg => ((-2.0, -0.3), (0.5, 1.5)),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalMatch {
    pub model: ModelId,
    pub j: Spin,
    pub g_range: (f64, f64),
    pub g_step: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantum_g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantum_note: Option<String>,
    /// `λ(quantum_g)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapped_lambda: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classical_lambda: Option<f64>,
    /// `mapped_lambda − classical_lambda`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference: Option<f64>,
    /// Literature `(g, λ)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub published: Option<(f64, f64)>,
    pub scan: BifurcationReport,
}

/// Quantum critical coupling at `j = 100` beside the classical bifurcation.
pub fn critical_match(id: ModelId) -> Result<CriticalMatch> {
    let ((g_lo, g_hi), (l_lo, l_hi)) = critical_ranges(id);
    let spec = ModelSpec::new(id, CRITICAL_SPIN)?;
    let (quantum_g, quantum_note) =
        match critical_g(&spec, &uniform_grid(g_lo, g_hi, CRITICAL_STEP)) {
            Ok(g) => (Some(g), None),
            Err(Error::Unconverged(msg)) => (None, Some(msg)),
            Err(e) => return Err(e),
        };
    let scan = bifurcation_scan_grid(&spec.classical(), &uniform_grid(l_lo, l_hi, CRITICAL_STEP))?;
    let mapped_lambda = quantum_g.map(|g| spec.lambda_of_g(g));
    let classical_lambda = scan.critical.first().map(|c| c.lambda);
    let difference = match (mapped_lambda, classical_lambda) {
        (Some(m), Some(c)) => Some(m - c),
        _ => None,
    };
    Ok(CriticalMatch {
        model: id,
        j: CRITICAL_SPIN,
        g_range: (g_lo, g_hi),
        g_step: CRITICAL_STEP,
        quantum_g,
        quantum_note,
        mapped_lambda,
        classical_lambda,
        difference,
        published: id.published_critical(),
        scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spins(list: &[u32]) -> Vec<Spin> {
        list.iter().map(|&t| Spin::from_twice(t)).collect()
    }

    #[test]
    fn lipkin_converges() {
        let r = ground_energy_match(ModelId::Lipkin, 2.0, &DEFAULT_J_LIST).unwrap();
        assert!((r.classical_min + 1.25).abs() < 1e-12);
        assert!(r.deviations_decrease());
        assert!(r.convergence.iter().all(|c| c.deviation > 0.0));
        let r = ground_energy_match(ModelId::Lipkin, 0.5, &spins(&[200])).unwrap();
        assert!((r.scaled_ground + 1.0).abs() <= 0.01);
    }

    #[test]
    fn heisenberg_uses_square_scale() {
        let r = ground_energy_match(ModelId::Heisenberg, -0.5, &spins(&[200])).unwrap();
        assert!((r.scaled_ground + 1.0).abs() <= 0.05);
        assert!(r.deviation <= 0.05);
    }

    #[test]
    fn lipkin_esqpt_on_separatrix() {
        let r = esqpt_separatrix_match(ModelId::Lipkin, 3.0, Spin::from_twice(200)).unwrap();
        let e = r.esqpt.unwrap();
        assert_eq!(e.separatrix, -1.0);
        assert!(e.matches && e.deviation <= 0.03);
    }

    #[test]
    fn jc_rotating_has_no_separatrix_fields() {
        let r = correspondence_report(ModelId::JcRotating, 1.5, &spins(&[100]), DEFAULT_WINDOW).unwrap();
        assert!(r.separatrix.is_none() && r.esqpt.is_none());
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("separatrix"));
    }

    #[test]
    fn j_list_validation() {
        assert!(ground_energy_match(ModelId::Lipkin, 1.0, &[]).is_err());
        assert!(ground_energy_match(ModelId::Lipkin, 1.0, &spins(&[100, 50])).is_err());
        assert!(ground_energy_match(ModelId::Lipkin, 1.0, &spins(&[802])).is_err());
    }
}
