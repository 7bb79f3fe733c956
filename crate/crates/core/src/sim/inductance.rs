//! Self/mutual inductance matrices of single-phase transformer fault models.
//!
//! Each winding is split into two sub-coils at the fault point. The leakage
//! inductance of a winding is shared between its sub-coils in proportion to
//! the turns fraction, the magnetizing inductance in proportion to the square
//! of that fraction, and every pair of sub-coils on the core is coupled by
//! `M_ij = sqrt(L_im * L_jm)`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nameplate data of a single-phase transformer unit.
///
/// Reactances are per-unit on each winding's own base (`v / i`), the
/// magnetizing current `im` is per-unit of rated current and shared by all
/// windings. Two-winding units ignore `v3`, `i3`, `x13`, `x23`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformerRating {
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub x12: f64,
    pub x13: f64,
    pub x23: f64,
    pub im: f64,
    pub f: f64,
}

impl TransformerRating {
    /// Two-winding unit; the unused third-winding slots mirror winding 2 so the
    /// leakage split degenerates to `x12 / 2` per winding.
    pub fn two_winding(v1: f64, v2: f64, i1: f64, i2: f64, x12: f64, im: f64, f: f64) -> Self {
        TransformerRating { v1, v2, v3: v2, i1, i2, i3: i2, x12, x13: x12, x23: x12, im, f }
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.f
    }

    /// Star-equivalent leakage reactances `[X1, X2, X3]` (per-unit).
    pub fn leakage_split(&self) -> [f64; 3] {
        [
            (self.x13 - self.x23 + self.x12) / 2.0,
            (self.x23 - self.x13 + self.x12) / 2.0,
            (self.x13 - self.x12 + self.x23) / 2.0,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v1", self.v1),
            ("v2", self.v2),
            ("v3", self.v3),
            ("i1", self.i1),
            ("i2", self.i2),
            ("i3", self.i3),
            ("im", self.im),
            ("f", self.f),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(format!("rating field {name} must be positive, got {value}")));
            }
        }
        for (name, x) in [("x12", self.x12), ("x13", self.x13), ("x23", self.x23)] {
            if !x.is_finite() {
                return Err(Error::invalid(format!("rating field {name} is not finite")));
            }
        }
        let split = self.leakage_split();
        if let Some(k) = split.iter().position(|&x| x < 0.0) {
            return Err(Error::invalid(format!(
                "inconsistent leakage triple (x12={}, x13={}, x23={}): X{} = {} < 0",
                self.x12,
                self.x13,
                self.x23,
                k + 1,
                split[k]
            )));
        }
        Ok(())
    }

    /// Unsplit magnetizing inductance referred to each winding.
    fn magnetizing_base(&self) -> [f64; 3] {
        let w = self.omega();
        [
            self.v1 / (w * self.im * self.i1),
            self.v2 / (w * self.im * self.i2),
            self.v3 / (w * self.im * self.i3),
        ]
    }

    fn leakage_base(&self) -> [f64; 3] {
        let w = self.omega();
        let [x1, x2, x3] = self.leakage_split();
        [x1 * (self.v1 / self.i1) / w, x2 * (self.v2 / self.i2) / w, x3 * (self.v3 / self.i3) / w]
    }
}

/// Inductance matrix of a split-winding fault model (order 4 or 6).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InductanceModel {
    pub order: usize,
    /// Row-major `order x order` matrix in henries.
    pub l: Vec<f64>,
    /// Percent of winding at the fault point, `(fault1, fault2)`.
    pub fault_fractions: (f64, f64),
    /// Sub-coil leakage inductances `L_il`.
    pub leakage: Vec<f64>,
    /// Sub-coil magnetizing inductances `L_im`.
    pub magnetizing: Vec<f64>,
}

impl InductanceModel {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.order + j]
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.order, self.order, &self.l)
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_abs(&self) -> f64 {
        self.l.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Core coupling vector `n_i = sqrt(L_im / L_ref)` relative to the full
    /// first winding, so that the magnetizing part is `L_ref * n n^T`.
    pub fn turns_vector(&self, l_ref: f64) -> Vec<f64> {
        self.magnetizing.iter().map(|lm| (lm / l_ref).sqrt()).collect()
    }

    fn assemble(order: usize, leakage: Vec<f64>, magnetizing: Vec<f64>, fractions: (f64, f64)) -> Self {
        let mut l = vec![0.0; order * order];
        for i in 0..order {
            l[i * order + i] = leakage[i] + magnetizing[i];
            for j in 0..i {
                let m = (magnetizing[i] * magnetizing[j]).sqrt();
                l[i * order + j] = m;
                l[j * order + i] = m;
            }
        }
        InductanceModel { order, l, fault_fractions: fractions, leakage, magnetizing }
    }
}

fn check_percent(name: &str, value: f64) -> Result<f64> {
    if !(0.0..=100.0).contains(&value) {
        return Err(Error::invalid(format!("{name} must lie in [0, 100] percent, got {value}")));
    }
    Ok(value * 0.01)
}

/// 6x6 model of a three-winding unit. Winding 1 is split at `fault1`,
/// winding 2 at `fault2` and winding 3 again at `fault1`.
pub fn three_winding_matrix(rating: &TransformerRating, fault1: f64, fault2: f64) -> Result<InductanceModel> {
    rating.validate()?;
    let fa = check_percent("fault1", fault1)?;
    let fb = 1.0 - fa;
    let fc = check_percent("fault2", fault2)?;
    let fd = 1.0 - fc;
    let fe = fa;
    let ff = 1.0 - fe;

    let [lk1, lk2, lk3] = rating.leakage_base();
    let [l1, l2, l3] = rating.magnetizing_base();
    let leakage = vec![lk1 * fa, lk1 * fb, lk2 * fc, lk2 * fd, lk3 * fe, lk3 * ff];
    let magnetizing = vec![
        l1 * fa * fa,
        l1 * fb * fb,
        l2 * fc * fc,
        l2 * fd * fd,
        l3 * fe * fe,
        l3 * ff * ff,
    ];
    Ok(InductanceModel::assemble(6, leakage, magnetizing, (fault1, fault2)))
}

/// 4x4 model of a two-winding unit; both windings are split at `fault1`.
pub fn two_winding_matrix(rating: &TransformerRating, fault1: f64) -> Result<InductanceModel> {
    rating.validate()?;
    let fa = check_percent("fault1", fault1)?;
    let fb = 1.0 - fa;
    let fc = fa;
    let fd = 1.0 - fc;

    let [lk1, lk2, _] = rating.leakage_base();
    let [l1, l2, _] = rating.magnetizing_base();
    let leakage = vec![lk1 * fa, lk1 * fb, lk2 * fc, lk2 * fd];
    let magnetizing = vec![l1 * fa * fa, l1 * fb * fb, l2 * fc * fc, l2 * fd * fd];
    Ok(InductanceModel::assemble(4, leakage, magnetizing, (fault1, fault1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rating() -> TransformerRating {
        TransformerRating {
            v1: 45.4e3,
            v2: 45.4e3,
            v3: 69.3e3,
            i1: 1255.0,
            i2: 1255.0,
            i3: 1645.0,
            x12: 0.08,
            x13: 0.10,
            x23: 0.10,
            im: 0.004,
            f: 60.0,
        }
    }

    #[test]
    fn full_fault_fraction_zeroes_second_subcoils() {
        let m = three_winding_matrix(&rating(), 100.0, 100.0).unwrap();
        for k in [1, 3, 5] {
            for j in 0..6 {
                assert_eq!(m.get(k, j), 0.0);
                assert_eq!(m.get(j, k), 0.0);
            }
        }
    }

    #[test]
    fn half_split_gives_equal_subcoils() {
        let r = rating();
        let m = three_winding_matrix(&r, 50.0, 30.0).unwrap();
        let base = r.v1 / (r.omega() * r.im * r.i1);
        assert_eq!(m.magnetizing[0], 0.25 * base);
        assert_eq!(m.magnetizing[0], m.magnetizing[1]);
        assert_eq!(m.get(0, 1), m.magnetizing[0]);
    }

    #[test]
    fn leakage_fractions_sum_to_winding_leakage() {
        let r = rating();
        let m = three_winding_matrix(&r, 23.0, 61.0).unwrap();
        let lk = r.leakage_base();
        for w in 0..3 {
            let sum = m.leakage[2 * w] + m.leakage[2 * w + 1];
            assert!((sum - lk[w]).abs() <= 1e-12 * lk[w]);
        }
    }

    #[test]
    fn two_winding_edge_cases() {
        let r = TransformerRating::two_winding(132.8e3, 40e3, 858.0, 2850.0, 0.1, 0.004, 60.0);
        let m = two_winding_matrix(&r, 0.0).unwrap();
        assert_eq!(m.leakage[0], 0.0);
        assert_eq!(m.magnetizing[0], 0.0);
        let m = two_winding_matrix(&r, 50.0).unwrap();
        assert_eq!(m.get(0, 1), m.magnetizing[0]);
        assert_eq!(m.magnetizing[0], m.magnetizing[1]);
        assert!(m.is_symmetric());
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut r = rating();
        assert!(three_winding_matrix(&r, 120.0, 0.0).is_err());
        assert!(three_winding_matrix(&r, -1.0, 0.0).is_err());
        r.x12 = 0.5;
        r.x13 = 0.1;
        r.x23 = 0.1;
        // X3 = (0.1 - 0.5 + 0.1) / 2 < 0
        assert!(three_winding_matrix(&r, 50.0, 50.0).is_err());
        let mut r = rating();
        r.i2 = 0.0;
        assert!(three_winding_matrix(&r, 50.0, 50.0).is_err());
    }

    #[test]
    fn magnetizing_part_is_rank_one_in_turns() {
        let r = rating();
        let m = three_winding_matrix(&r, 35.0, 65.0).unwrap();
        let l_ref = r.v1 / (r.omega() * r.im * r.i1);
        let n = m.turns_vector(l_ref);
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { m.leakage[i] } else { 0.0 } + l_ref * n[i] * n[j];
                assert!((m.get(i, j) - expect).abs() <= 1e-12 * m.max_abs());
            }
        }
    }
}
