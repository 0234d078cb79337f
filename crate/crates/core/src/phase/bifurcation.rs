use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::{find_fixed_points, FixedPointKind};
use crate::error::{Error, Result};
use crate::models::{ClassicalModel, ModelId};

/// Bracket width at which bisection stops.
pub const BISECTION_WIDTH: f64 = 1e-4;

/// Fixed-point counts keyed by `(kind, on_boundary)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Census(BTreeMap<(FixedPointKind, bool), usize>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    pub kind: FixedPointKind,
    pub on_boundary: bool,
    pub count: usize,
}

impl Census {
    pub fn at(model: &ClassicalModel, lambda: f64) -> Result<Self> {
        let mut counts = BTreeMap::new();
        for f in find_fixed_points(model, lambda)? {
            *counts.entry((f.kind, f.on_boundary)).or_insert(0) += 1;
        }
        Ok(Census(counts))
    }

    pub fn interior(&self) -> usize {
        self.0.iter().filter(|((_, b), _)| !b).map(|(_, c)| c).sum()
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }

    /// Contains a degenerate point: the census sits exactly on a transition.
    pub fn is_marginal(&self) -> bool {
        self.0.keys().any(|(k, _)| *k == FixedPointKind::Degenerate)
    }

    pub fn entries(&self) -> Vec<CensusEntry> {
        self.0
            .iter()
            .map(|(&(kind, on_boundary), &count)| CensusEntry {
                kind,
                on_boundary,
                count,
            })
            .collect()
    }
}

impl Serialize for Census {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.entries().serialize(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mechanism {
    /// Interior fixed points appear or disappear (through a pole).
    InteriorPointEntry,
    /// Same interior points, different stability classes.
    StabilityChange,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
    pub mechanism: Mechanism,
    pub before: Census,
    pub after: Census,
}

/// Literature value for the same transition, which may use another λ
/// normalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublishedCritical {
    pub lambda: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaCensus {
    pub lambda: f64,
    pub census: Census,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BifurcationReport {
    pub model: ModelId,
    pub lambda_grid: Vec<f64>,
    pub census: Vec<LambdaCensus>,
    pub critical: Vec<CriticalPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub published: Option<PublishedCritical>,
}

fn published(model: ModelId, found: &[CriticalPoint]) -> Option<PublishedCritical> {
    let (_, lambda) = model.published_critical()?;
    let note = match found.first() {
        Some(c) if (c.lambda - lambda).abs() > 10.0 * BISECTION_WIDTH => format!(
            "published critical λ = {lambda} differs from the bifurcation λ = {:.4} of the \
             classical form analyzed here; the published value corresponds to a coupling \
             normalization twice as large",
            c.lambda
        ),
        Some(_) => format!("published critical λ = {lambda} agrees with the bifurcation found"),
        None => format!("published critical λ = {lambda}; no bifurcation found in range"),
    };
    Some(PublishedCritical { lambda, note })
}

/// Scans `steps + 1` equally spaced λ values over `range`.
pub fn bifurcation_scan(
    model: &ClassicalModel,
    range: (f64, f64),
    steps: usize,
) -> Result<BifurcationReport> {
    if steps < 10 {
        return Err(Error::InvalidInput(format!("scan needs at least 10 steps, got {steps}")));
    }
    let (lo, hi) = range;
    let grid: Vec<f64> = (0..=steps)
        .map(|k| lo + (hi - lo) * k as f64 / steps as f64)
        .collect();
    bifurcation_scan_grid(model, &grid)
}

/// Census at each λ; wherever two neighboring non-marginal censuses differ,
/// the change is bisected down to [`BISECTION_WIDTH`].
pub fn bifurcation_scan_grid(model: &ClassicalModel, grid: &[f64]) -> Result<BifurcationReport> {
    if grid.len() < 2 || grid.windows(2).any(|w| w[1] <= w[0]) || grid.iter().any(|l| !l.is_finite()) {
        return Err(Error::InvalidInput("λ grid must be finite and strictly ascending".into()));
    }
    let census: Vec<Census> = grid
        .par_iter()
        .map(|&l| Census::at(model, l))
        .collect::<Result<_>>()?;

    let regular: Vec<usize> = (0..grid.len()).filter(|&i| !census[i].is_marginal()).collect();
    let critical = regular
        .windows(2)
        .filter(|w| census[w[0]] != census[w[1]])
        .map(|w| {
            let (mut a, mut b) = (grid[w[0]], grid[w[1]]);
            let before = census[w[0]].clone();
            while b - a > BISECTION_WIDTH {
                let mid = 0.5 * (a + b);
                if Census::at(model, mid)? == before {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            let after = census[w[1]].clone();
            let mechanism = if before.interior() != after.interior() {
                Mechanism::InteriorPointEntry
            } else {
                Mechanism::StabilityChange
            };
            Ok(CriticalPoint {
                lambda: 0.5 * (a + b),
                lower: a,
                upper: b,
                mechanism,
                before,
                after,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BifurcationReport {
        model: model.id,
        lambda_grid: grid.to_vec(),
        published: published(model.id, &critical),
        census: grid
            .iter()
            .zip(census)
            .map(|(&lambda, census)| LambdaCensus { lambda, census })
            .collect(),
        critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scan(id: ModelId, lo: f64, hi: f64) -> BifurcationReport {
        bifurcation_scan(&ClassicalModel::new(id), (lo, hi), 50).unwrap()
    }

    #[test]
    fn heisenberg_stability_change() {
        let r = scan(ModelId::Heisenberg, 0.5, 1.5);
        assert_eq!(r.critical.len(), 1);
        let c = &r.critical[0];
        assert!((c.lambda - 1.0).abs() <= 1e-3);
        assert!(c.upper - c.lower <= BISECTION_WIDTH);
        assert_eq!(c.mechanism, Mechanism::StabilityChange);
    }

    #[test]
    fn lipkin_entry_with_published_note() {
        let r = scan(ModelId::Lipkin, 0.2, 1.2);
        assert_eq!(r.critical.len(), 1);
        assert!((r.critical[0].lambda - 0.5).abs() <= 1e-3);
        assert_eq!(r.critical[0].mechanism, Mechanism::InteriorPointEntry);
        let p = r.published.unwrap();
        assert_eq!(p.lambda, 1.0);
        assert!(p.note.contains("differs"));
    }

    #[test]
    fn jc_rotating_has_no_transition() {
        let r = scan(ModelId::JcRotating, 0.2, 2.0);
        assert!(r.critical.is_empty());
        assert!(r.published.is_none());
    }

    #[test]
    fn rejects_short_scans() {
        assert!(bifurcation_scan(&ClassicalModel::new(ModelId::Lipkin), (0.0, 1.0), 5).is_err());
    }
}
