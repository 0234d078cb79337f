//! The five Curie–Weiss models (six, counting both Jaynes–Cummings variants).
//!
//! Each model is an SU(2)-form Hamiltonian `H = H₀ + (g/N^s) H_int` whose
//! classical limit reads `p^n + λ H_int(p, q)`.

mod classical;
mod quantum;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::su2::Spin;

pub use classical::{wrap_angle, ClassicalModel};
pub use quantum::{
    build_full_hamiltonian, build_reduced_hamiltonian, BasisState, FullHamiltonian,
    HamiltonianMatrix, MAX_FULL_SPIN_TWICE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Lipkin,
    Pairing,
    /// Jaynes–Cummings in the rotating-wave approximation (`g′ = 0`).
    JcRotating,
    /// Jaynes–Cummings keeping only the counter-rotating terms (`g = 0`).
    JcCounterRotating,
    Bilayer,
    Heisenberg,
}

impl ModelId {
    pub const ALL: [ModelId; 6] = [
        ModelId::Lipkin,
        ModelId::Pairing,
        ModelId::JcRotating,
        ModelId::JcCounterRotating,
        ModelId::Bilayer,
        ModelId::Heisenberg,
    ];

    /// Models built from two SU(2) (or spin + boson) components.
    pub const TWO_COMPONENT: [ModelId; 5] = [
        ModelId::Pairing,
        ModelId::JcRotating,
        ModelId::JcCounterRotating,
        ModelId::Bilayer,
        ModelId::Heisenberg,
    ];

    pub fn token(self) -> &'static str {
        match self {
            ModelId::Lipkin => "lipkin",
            ModelId::Pairing => "pairing",
            ModelId::JcRotating => "jc-rwa",
            ModelId::JcCounterRotating => "jc-crw",
            ModelId::Bilayer => "bilayer",
            ModelId::Heisenberg => "heisenberg",
        }
    }

    /// Whether the second component is a boson mode (spinorized).
    pub fn has_boson(self) -> bool {
        matches!(
            self,
            ModelId::JcRotating | ModelId::JcCounterRotating | ModelId::Bilayer
        )
    }

    /// Critical couplings `(g, λ)` quoted in the literature for this model.
    ///
    /// For Lipkin and pairing these use a λ normalization different from the
    /// classical forms implemented here, which bifurcate at |λ| = 1/2.
    pub fn published_critical(self) -> Option<(f64, f64)> {
        match self {
            ModelId::Lipkin => Some((1.0, 1.0)),
            ModelId::Pairing => Some((1.0, -1.0)),
            ModelId::JcRotating => None,
            ModelId::JcCounterRotating => Some((1.0, std::f64::consts::FRAC_1_SQRT_2)),
            ModelId::Bilayer => Some((
                std::f64::consts::FRAC_1_SQRT_2,
                std::f64::consts::FRAC_1_SQRT_2,
            )),
            ModelId::Heisenberg => Some((-1.0, 1.0)),
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|id| id.token() == s)
            .ok_or_else(|| {
                Error::InvalidInput(format!(
                    "unknown model `{s}` (expected one of lipkin, pairing, jc-rwa, jc-crw, bilayer, heisenberg)"
                ))
            })
    }
}

impl Serialize for ModelId {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.token())
    }
}

/// Observable whose ground-state mean value serves as order parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Observable {
    Jz,
    J1z,
    J2z,
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Observable::Jz => "Jz",
            Observable::J1z => "J1z",
            Observable::J2z => "J2z",
        })
    }
}

/// Balancing exponent `s = [H_int] − [H₀]` as an exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exponent {
    pub num: u32,
    pub den: u32,
}

impl Exponent {
    /// From the highest SU(2) powers of `H₀` and `H_int`, both counted in
    /// half-units (the inverse square root in a spinorized boson counts −1/2).
    pub fn from_half_degrees(free: u32, interaction: u32) -> Self {
        let diff = interaction - free;
        if diff.is_multiple_of(2) {
            Self { num: diff / 2, den: 1 }
        } else {
            Self { num: diff, den: 2 }
        }
    }

    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Affine map from quantum energies to the classical energy function:
/// `H_cl ≈ orientation · (E − offset) / scale`.
///
/// `orientation = −1` means the quantum ground state sits on the classical
/// maximum (Heisenberg, whose classical form carries the opposite overall sign).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyMap {
    pub offset: f64,
    pub scale: f64,
    pub orientation: f64,
}

impl EnergyMap {
    /// Quantum energy shifted and scaled, sign unchanged.
    pub fn scaled(&self, energy: f64) -> f64 {
        (energy - self.offset) / self.scale
    }

    /// Classical energy in the orientation of the quantum spectrum.
    pub fn oriented(&self, classical: f64) -> f64 {
        self.orientation * classical
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelSpec {
    pub id: ModelId,
    pub spin: Spin,
    /// Particle number `N`; unused for Heisenberg.
    pub particles: Option<f64>,
    pub balancing: Exponent,
    /// Power `n` of the free term `p^n` in the classical form.
    pub free_power: u8,
    pub observable: Observable,
    pub conserved: &'static str,
    pub energy_map: EnergyMap,
}

impl ModelSpec {
    pub fn new(id: ModelId, spin: Spin) -> Result<Self> {
        if spin.twice() == 0 {
            return Err(Error::InvalidSpin("0 (models need j > 0)".into()));
        }
        let j = spin.value();
        // (free, interaction) highest powers in half-units.
        let (particles, degrees, free_power, observable, conserved, energy_map) = match id {
            ModelId::Lipkin => (
                Some(2.0 * j),
                (2, 4),
                1,
                Observable::Jz,
                "J^2",
                EnergyMap { offset: 0.0, scale: j, orientation: 1.0 },
            ),
            ModelId::Pairing => (
                Some(4.0 * j),
                (2, 4),
                1,
                Observable::J2z,
                "J1z + J2z = 0",
                EnergyMap { offset: 0.0, scale: 2.0 * j, orientation: 1.0 },
            ),
            ModelId::JcRotating => (
                Some(2.0 * j),
                (2, 3),
                0,
                Observable::J1z,
                "J1z + J2z = 0",
                EnergyMap { offset: j, scale: 2.0 * j, orientation: 1.0 },
            ),
            ModelId::JcCounterRotating => (
                Some(2.0 * j),
                (2, 3),
                1,
                Observable::J1z,
                "J2z - J1z = 0",
                EnergyMap { offset: j, scale: 2.0 * j, orientation: 1.0 },
            ),
            ModelId::Bilayer => (
                Some(4.0 * j),
                (2, 3),
                1,
                Observable::J2z,
                "J1z + J2z = 0",
                EnergyMap { offset: j, scale: j, orientation: 1.0 },
            ),
            ModelId::Heisenberg => (
                None,
                (4, 4),
                2,
                Observable::J2z,
                "J1z + J2z = 0",
                EnergyMap { offset: 0.0, scale: j * j, orientation: -1.0 },
            ),
        };
        Ok(Self {
            id,
            spin,
            particles,
            balancing: Exponent::from_half_degrees(degrees.0, degrees.1),
            free_power,
            observable,
            conserved,
            energy_map,
        })
    }

    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    /// Classical coupling λ for quantum coupling `g` (`g′` for the
    /// counter-rotating model), from the large-j limit of the balanced form.
    pub fn lambda_of_g(&self, g: f64) -> f64 {
        lambda_of_g(self.id, g)
    }

    /// Inverse of [`Self::lambda_of_g`].
    pub fn g_of_lambda(&self, lambda: f64) -> f64 {
        lambda / lambda_of_g(self.id, 1.0)
    }

    /// Diagonal of the model observable in the reduced basis.
    pub fn observable_diagonal(&self) -> Vec<f64> {
        let sign = if self.id == ModelId::Bilayer { -1.0 } else { 1.0 };
        self.spin.m_values().map(|m| sign * m).collect()
    }

    pub fn classical(&self) -> ClassicalModel {
        ClassicalModel::new(self.id)
    }
}

pub fn lambda_of_g(id: ModelId, g: f64) -> f64 {
    match id {
        ModelId::Lipkin => g / 2.0,
        ModelId::Pairing => -g / 2.0,
        ModelId::JcRotating | ModelId::JcCounterRotating => g * std::f64::consts::FRAC_1_SQRT_2,
        ModelId::Bilayer => g,
        ModelId::Heisenberg => -g,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(id: ModelId) -> ModelSpec {
        ModelSpec::new(id, Spin::from_twice(200)).unwrap()
    }

    #[test]
    fn balancing_exponents() {
        let s: Vec<String> = ModelId::ALL
            .iter()
            .map(|&id| spec(id).balancing.to_string())
            .collect();
        assert_eq!(s, ["1", "1", "1/2", "1/2", "1/2", "0"]);
    }

    #[test]
    fn free_powers() {
        let n: Vec<u8> = ModelId::ALL.iter().map(|&id| spec(id).free_power).collect();
        assert_eq!(n, [1, 1, 0, 1, 1, 2]);
    }

    #[test]
    fn lipkin_metadata() {
        let s = spec(ModelId::Lipkin);
        assert_eq!(s.balancing.value(), 1.0);
        assert_eq!(s.particles, Some(200.0));
        assert_eq!(s.observable, Observable::Jz);
        assert_eq!(s.free_power, 1);
    }

    #[test]
    fn jc_counter_rotating_metadata() {
        let s = spec(ModelId::JcCounterRotating);
        assert_eq!(s.balancing.value(), 0.5);
        assert_eq!(s.particles, Some(200.0));
        assert_eq!(s.observable, Observable::J1z);
    }

    #[test]
    fn heisenberg_metadata() {
        let s = spec(ModelId::Heisenberg);
        assert_eq!(s.balancing.value(), 0.0);
        assert_eq!(s.free_power, 2);
        assert_eq!(s.particles, None);
    }

    #[test]
    fn pairing_and_bilayer_particle_numbers() {
        assert_eq!(spec(ModelId::Pairing).particles, Some(400.0));
        assert_eq!(spec(ModelId::Bilayer).particles, Some(400.0));
    }

    #[test]
    fn lambda_maps_at_published_points() {
        let crw = spec(ModelId::JcCounterRotating).lambda_of_g(1.0);
        assert!((crw - 0.5f64.sqrt()).abs() < 1e-15);
        let bl = spec(ModelId::Bilayer).lambda_of_g(0.5f64.sqrt());
        assert!((bl - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(spec(ModelId::Heisenberg).lambda_of_g(-1.0), 1.0);
        assert_eq!(spec(ModelId::Lipkin).lambda_of_g(2.0), 1.0);
        assert_eq!(spec(ModelId::Pairing).lambda_of_g(2.0), -1.0);
        for id in ModelId::ALL {
            let s = spec(id);
            assert!((s.g_of_lambda(s.lambda_of_g(1.3)) - 1.3).abs() < 1e-14);
        }
    }

    #[test]
    fn model_tokens_round_trip() {
        for id in ModelId::ALL {
            assert_eq!(id.token().parse::<ModelId>().unwrap(), id);
        }
        assert!("dicke".parse::<ModelId>().is_err());
    }

    #[test]
    fn zero_spin_rejected() {
        assert!(ModelSpec::new(ModelId::Lipkin, Spin::from_twice(0)).is_err());
    }
}
