//! Dense matrix representations of SU(2) ladder operators and truncated bosons.
//!
//! Every spin basis is ordered by ascending magnetic quantum number,
//! `m = -j, -j+1, ..., j`, so `Jz` is diagonal ascending and the ladder
//! operators sit on the first sub/super-diagonal. Boson bases are ordered by
//! occupation `n = 0, 1, ..., n_max`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A spin quantum number `j`, stored exactly as the integer `2j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Spin {
    twice: u32,
}

impl Spin {
    pub const fn from_twice(twice: u32) -> Self {
        Self { twice }
    }

    /// Builds `j` from a float, rejecting values where `2j` is not a
    /// non-negative integer.
    pub fn new(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !twice.is_finite() || twice < 0.0 || twice.fract() != 0.0 || twice > u32::MAX as f64 {
            return Err(Error::InvalidSpin(j.to_string()));
        }
        Ok(Self { twice: twice as u32 })
    }

    pub fn twice(self) -> u32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    /// Basis dimension `2j + 1`.
    pub fn dim(self) -> usize {
        self.twice as usize + 1
    }

    /// `m` for basis index `k`.
    pub fn m(self, k: usize) -> f64 {
        (2 * k as i64 - self.twice as i64) as f64 / 2.0
    }

    pub fn m_values(self) -> impl Iterator<Item = f64> {
        (0..self.dim()).map(move |k| self.m(k))
    }

    /// `j(j+1)`.
    pub fn casimir(self) -> f64 {
        let t = self.twice as f64;
        t * (t + 2.0) / 4.0
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice.is_multiple_of(2) {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

impl FromStr for Spin {
    type Err = Error;

    /// Accepts `"100"`, `"3/2"` or a decimal such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidSpin(s.to_string());
        if let Some((num, den)) = s.split_once('/') {
            let num: u32 = num.trim().parse().map_err(|_| bad())?;
            return match den.trim() {
                "1" => num.checked_mul(2).map(Self::from_twice).ok_or_else(bad),
                "2" => Ok(Self::from_twice(num)),
                _ => Err(bad()),
            };
        }
        let value: f64 = s.parse().map_err(|_| bad())?;
        Self::new(value).map_err(|_| bad())
    }
}

impl Serialize for Spin {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// `√((j - m)(j + m + 1))`, the coefficient of `J+|j,m⟩ = c |j,m+1⟩`.
///
/// The radicand is formed in integer arithmetic on `2j` and `2m`.
pub fn raising_coefficient(spin: Spin, m: f64) -> f64 {
    let tj = spin.twice as i64;
    let tm = (2.0 * m).round() as i64;
    let radicand = (tj - tm) * (tj + tm + 2);
    if radicand <= 0 {
        0.0
    } else {
        (radicand as f64 / 4.0).sqrt()
    }
}

/// `√((j + m)(j - m + 1))`, the coefficient of `J-|j,m⟩ = c |j,m-1⟩`.
pub fn lowering_coefficient(spin: Spin, m: f64) -> f64 {
    raising_coefficient(spin, -m)
}

/// `Jz`, `J+` and `J-` on the `|j, m⟩` basis.
#[derive(Debug, Clone)]
pub struct LadderSet {
    pub spin: Spin,
    pub jz: DMatrix<f64>,
    pub jplus: DMatrix<f64>,
    pub jminus: DMatrix<f64>,
}

impl LadderSet {
    pub fn dim(&self) -> usize {
        self.spin.dim()
    }

    pub fn identity(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim())
    }
}

pub fn build_spin_operators(spin: Spin) -> LadderSet {
    let d = spin.dim();
    let jz = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, spin.m_values()));
    let mut jplus = DMatrix::zeros(d, d);
    for k in 0..d.saturating_sub(1) {
        jplus[(k + 1, k)] = raising_coefficient(spin, spin.m(k));
    }
    let jminus = jplus.transpose();
    LadderSet {
        spin,
        jz,
        jplus,
        jminus,
    }
}

/// Boson annihilation/creation/number operators on `|0⟩ … |n_max⟩`.
#[derive(Debug, Clone)]
pub struct BosonSet {
    pub n_max: usize,
    pub b: DMatrix<f64>,
    pub bdag: DMatrix<f64>,
    pub number: DMatrix<f64>,
}

/// Truncated Fock-space boson; `bdag|n_max⟩ = 0`.
pub fn build_truncated_boson(n_max: usize) -> BosonSet {
    let d = n_max + 1;
    let mut b = DMatrix::zeros(d, d);
    for n in 1..d {
        b[(n - 1, n)] = (n as f64).sqrt();
    }
    let bdag = b.transpose();
    let number = DMatrix::from_fn(d, d, |r, c| if r == c { r as f64 } else { 0.0 });
    BosonSet {
        n_max,
        b,
        bdag,
        number,
    }
}

/// Boson operators obtained from a spin `j2` through the inverse
/// Holstein–Primakoff map:
///
/// `b = (j2·1 − J2z)^{-1/2} J2−`, `b† = J2+ (j2·1 − J2z)^{-1/2}`,
/// `b†b = j2·1 + J2z`, with Fock state `|n⟩ = |j2, m = n − j2⟩`.
///
/// The inverse square root is singular on `m = j2`; that direction is
/// annihilated, which is where `J2+` vanishes anyway. The result coincides
/// with [`build_truncated_boson`]`(2·j2)`.
pub fn spinorized_boson(j2: Spin) -> BosonSet {
    let ladder = build_spin_operators(j2);
    let d = ladder.dim();
    let j = j2.value();
    let inv_sqrt = DMatrix::from_fn(d, d, |r, c| {
        if r != c {
            return 0.0;
        }
        let gap = j - j2.m(r);
        if gap > 0.0 {
            1.0 / gap.sqrt()
        } else {
            0.0
        }
    });
    let b = &inv_sqrt * &ladder.jminus;
    let bdag = &ladder.jplus * &inv_sqrt;
    let number = DMatrix::identity(d, d) * j + &ladder.jz;
    BosonSet {
        n_max: j2.twice() as usize,
        b,
        bdag,
        number,
    }
}

fn require_square(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// Kronecker product `A ⊗ B`; the first factor is the slow index.
pub fn tensor_embed(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_square(a)?;
    require_square(b)?;
    Ok(a.kronecker(b))
}

/// `AB − BA`.
pub fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    require_square(a)?;
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    Ok(a * b - b * a)
}

/// Largest absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Residuals of the defining algebra: `[Jz,J+] − J+`, `[Jz,J−] + J−`,
/// `[J+,J−] − 2Jz` and the Casimir `J+J− + Jz² − Jz − j(j+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraResiduals {
    pub raise: f64,
    pub lower: f64,
    pub ladder: f64,
    pub casimir: f64,
}

impl AlgebraResiduals {
    pub fn max(&self) -> f64 {
        self.raise.max(self.lower).max(self.ladder).max(self.casimir)
    }
}

pub fn algebra_residuals(set: &LadderSet) -> AlgebraResiduals {
    let comm = |a, b| commutator(a, b).expect("ladder matrices share one dimension");
    let raise = max_abs(&(comm(&set.jz, &set.jplus) - &set.jplus));
    let lower = max_abs(&(comm(&set.jz, &set.jminus) + &set.jminus));
    let ladder = max_abs(&(comm(&set.jplus, &set.jminus) - &set.jz * 2.0));
    let casimir_op = &set.jplus * &set.jminus + &set.jz * &set.jz - &set.jz;
    let casimir = max_abs(&(casimir_op - set.identity() * set.spin.casimir()));
    AlgebraResiduals {
        raise,
        lower,
        ladder,
        casimir,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half(twice: u32) -> Spin {
        Spin::from_twice(twice)
    }

    #[test]
    fn spin_parsing() {
        assert_eq!("100".parse::<Spin>().unwrap(), half(200));
        assert_eq!("3/2".parse::<Spin>().unwrap(), half(3));
        assert_eq!("1.5".parse::<Spin>().unwrap(), half(3));
        assert_eq!("4/1".parse::<Spin>().unwrap(), half(8));
        assert!("1/3".parse::<Spin>().is_err());
        assert!("-1".parse::<Spin>().is_err());
        assert!("0.3".parse::<Spin>().is_err());
        assert!(Spin::new(f64::NAN).is_err());
        assert_eq!(half(7).to_string(), "7/2");
        assert_eq!(half(200).to_string(), "100");
    }

    #[test]
    fn spin_half_matrices() {
        let s = build_spin_operators(half(1));
        assert_eq!(s.jz[(0, 0)], -0.5);
        assert_eq!(s.jz[(1, 1)], 0.5);
        // J+ |-1/2> = |+1/2>
        assert_eq!(s.jplus[(1, 0)], 1.0);
        assert_eq!(s.jplus[(0, 1)], 0.0);
    }

    #[test]
    fn spin_one_raising() {
        let s = build_spin_operators(half(2));
        assert!((s.jplus[(2, 1)] - 2f64.sqrt()).abs() < 1e-15);
        assert!((s.jplus[(1, 0)] - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn ladder_is_transpose() {
        let s = build_spin_operators(half(17));
        assert_eq!(s.jplus.transpose(), s.jminus);
    }

    #[test]
    fn truncated_boson_actions() {
        let bs = build_truncated_boson(5);
        assert!((bs.b[(2, 3)] - 3f64.sqrt()).abs() < 1e-15);
        assert!(bs.bdag.column(5).iter().all(|&x| x == 0.0));
        let bs = build_truncated_boson(200);
        let nb = &bs.bdag * &bs.b;
        assert!(max_abs(&(nb - &bs.number)) <= 1e-12);
        assert_eq!(bs.number[(200, 200)], 200.0);
    }

    #[test]
    fn spinorized_small_cases() {
        let one = spinorized_boson(half(2));
        assert!((one.b[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((one.b[(1, 2)] - 2f64.sqrt()).abs() < 1e-15);
        let half_spin = spinorized_boson(half(1));
        assert_eq!(half_spin.b, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn spinorized_matches_truncated_at_scale() {
        let s = spinorized_boson(half(200));
        let t = build_truncated_boson(200);
        assert!(max_abs(&(s.b - t.b)) <= 1e-12);
        assert!(max_abs(&(s.bdag - t.bdag)) <= 1e-12);
        assert!(max_abs(&(s.number - t.number)) <= 1e-12);
    }

    #[test]
    fn tensor_embedding() {
        let i2 = DMatrix::<f64>::identity(2, 2);
        let i3 = DMatrix::<f64>::identity(3, 3);
        assert_eq!(tensor_embed(&i2, &i3).unwrap(), DMatrix::identity(6, 6));

        let s = build_spin_operators(half(1));
        let total = tensor_embed(&s.jz, &i2).unwrap() + tensor_embed(&i2, &s.jz).unwrap();
        let diag: Vec<f64> = total.diagonal().iter().copied().collect();
        assert_eq!(diag, vec![-1.0, 0.0, 0.0, 1.0]);

        assert!(tensor_embed(&DMatrix::zeros(2, 3), &i2).is_err());
    }

    #[test]
    fn commutator_examples() {
        let s = build_spin_operators(half(10));
        let c = commutator(&s.jz, &s.jplus).unwrap();
        assert!(max_abs(&(c - &s.jplus)) <= 1e-12);
        assert_eq!(max_abs(&commutator(&s.jplus, &s.jplus).unwrap()), 0.0);
        assert!(matches!(
            commutator(&s.jz, &DMatrix::zeros(3, 3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        // Residuals are bounded by the f64 rounding of sqrt radicands of size
        // ~j(j+1); the bound reaches 1e-12 around j ~ 50.
        #[test]
        fn algebra_holds_to_rounding(twice in 0u32..=200) {
            let s = build_spin_operators(half(twice));
            let r = algebra_residuals(&s);
            let bound = 8.0 * f64::EPSILON * (1.0 + half(twice).casimir());
            prop_assert!(r.max() <= bound, "{:?} > {}", r, bound);
        }

        #[test]
        fn spinorized_equals_truncated(twice in 0u32..=200) {
            let s = spinorized_boson(half(twice));
            let t = build_truncated_boson(twice as usize);
            prop_assert!(max_abs(&(s.b - t.b)) <= 1e-12);
            prop_assert!(max_abs(&(s.bdag - t.bdag)) <= 1e-12);
        }

        #[test]
        fn kronecker_transpose(a in proptest::collection::vec(-5.0f64..5.0, 9),
                               b in proptest::collection::vec(-5.0f64..5.0, 4)) {
            let a = DMatrix::from_row_slice(3, 3, &a);
            let b = DMatrix::from_row_slice(2, 2, &b);
            let lhs = tensor_embed(&a, &b).unwrap().transpose();
            let rhs = tensor_embed(&a.transpose(), &b.transpose()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn factors_commute(ta in 1u32..6, tb in 1u32..6) {
            let a = build_spin_operators(half(ta));
            let b = build_spin_operators(half(tb));
            let left = tensor_embed(&a.jplus, &b.identity()).unwrap();
            let right = tensor_embed(&a.identity(), &b.jminus).unwrap();
            prop_assert_eq!(max_abs(&commutator(&left, &right).unwrap()), 0.0);
        }
    }
}
