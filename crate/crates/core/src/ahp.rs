//! Analytic hierarchy process machinery used to derive the per-category
//! reward weights, plus the fixed weight table the trainer ships with.
//!
//! A pairwise comparison matrix holds judgements a_ij = "how much more
//! important criterion i is than j". The principal right eigenvector of a
//! positive reciprocal matrix, normalized to sum one, is the priority
//! vector; the dominant eigenvalue feeds the consistency check.

use crate::world::CategoryLabel;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AhpError {
    #[error("matrix entries length {len} is not a perfect square of order {n}")]
    Shape { n: usize, len: usize },
    #[error("matrix order {0} is not supported (need 1..=10 for the consistency index)")]
    Order(usize),
    #[error("entry ({i},{j}) = {value} must be positive and finite")]
    NonPositive { i: usize, j: usize, value: f64 },
    #[error("diagonal entry ({i},{i}) = {value} must be 1")]
    Diagonal { i: usize, value: f64 },
    #[error("entries ({i},{j}) and ({j},{i}) are not reciprocal: {a} vs {b}")]
    NotReciprocal { i: usize, j: usize, a: f64, b: f64 },
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    Dimension { expected: usize, got: usize },
    #[error("power iteration did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("weights must be positive and finite: {0}")]
    BadWeight(f64),
}

/// Tolerance for the reciprocity and unit-diagonal validation.
const RECIPROCAL_TOL: f64 = 1e-9;
/// Power iteration stops when the L1 change of the normalized vector
/// drops below this.
const CONVERGENCE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 10_000;
/// Zero weights are floored here before forming calibration ratios, so a
/// disabled criterion still yields a valid positive matrix.
const WEIGHT_FLOOR: f64 = 1e-4;

/// Saaty's random consistency index, indexed by matrix order (0 and 1 unused).
const RANDOM_INDEX: [f64; 11] = [
    0.0, 0.0, 0.0, 0.58, 0.90, 1.12, 1.24, 1.32, 1.41, 1.45, 1.49,
];

/// A positive reciprocal pairwise comparison matrix, stored row major.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl PairwiseMatrix {
    /// Validate and wrap row-major `entries` of an `n` x `n` judgement matrix.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self, AhpError> {
        if entries.len() != n * n {
            return Err(AhpError::Shape {
                n,
                len: entries.len(),
            });
        }
        if n == 0 || n >= RANDOM_INDEX.len() {
            return Err(AhpError::Order(n));
        }
        for i in 0..n {
            for j in 0..n {
                let v = entries[i * n + j];
                if !(v.is_finite() && v > 0.0) {
                    return Err(AhpError::NonPositive { i, j, value: v });
                }
            }
        }
        for i in 0..n {
            let d = entries[i * n + i];
            if (d - 1.0).abs() > RECIPROCAL_TOL {
                return Err(AhpError::Diagonal { i, value: d });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let a = entries[i * n + j];
                let b = entries[j * n + i];
                if (a * b - 1.0).abs() > RECIPROCAL_TOL {
                    return Err(AhpError::NotReciprocal { i, j, a, b });
                }
            }
        }
        Ok(PairwiseMatrix { n, entries })
    }

    /// Perfectly consistent matrix with entries w_i / w_j.
    pub fn from_weights(weights: &[f64]) -> Result<Self, AhpError> {
        for &w in weights {
            if !(w.is_finite() && w > 0.0) {
                return Err(AhpError::BadWeight(w));
            }
        }
        let n = weights.len();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(weights[i] / weights[j]);
            }
        }
        PairwiseMatrix::new(n, entries)
    }

    /// Bypass validation; for tests that need non-reciprocal positive
    /// matrices (for example scaled copies of a valid matrix).
    #[cfg(test)]
    fn raw(n: usize, entries: Vec<f64>) -> Self {
        PairwiseMatrix { n, entries }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    fn mul_vec(&self, v: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let row = &self.entries[i * self.n..(i + 1) * self.n];
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    /// Principal eigenvector (normalized to sum one) and dominant eigenvalue,
    /// via power iteration. Positive matrices make the dominant eigenpair
    /// real and simple, so the plain iteration is reliable here.
    pub fn principal_eigenvector(&self) -> Result<(Vec<f64>, f64), AhpError> {
        let n = self.n;
        let mut v = vec![1.0 / n as f64; n];
        let mut av = vec![0.0; n];
        for _ in 0..MAX_ITERATIONS {
            self.mul_vec(&v, &mut av);
            let sum: f64 = av.iter().sum();
            let mut delta: f64 = 0.0;
            for i in 0..n {
                let next = av[i] / sum;
                delta += (next - v[i]).abs();
                v[i] = next;
            }
            if delta < CONVERGENCE_TOL {
                // Rayleigh quotient v'Av / v'v for the converged direction.
                self.mul_vec(&v, &mut av);
                let num: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
                let den: f64 = v.iter().map(|a| a * a).sum();
                return Ok((v, num / den));
            }
        }
        Err(AhpError::NoConvergence(MAX_ITERATIONS))
    }
}

/// Consistency ratio CR = CI / RI with CI = (lambda_max - n) / (n - 1).
/// Orders 1 and 2 are always consistent and return 0.
pub fn consistency_ratio(matrix: &PairwiseMatrix, lambda_max: f64) -> f64 {
    let n = matrix.order();
    if n <= 2 {
        return 0.0;
    }
    let ci = (lambda_max - n as f64) / (n as f64 - 1.0);
    ci / RANDOM_INDEX[n]
}

/// Reward weights over the four objectives. Kept in criterion order:
/// time, energy, obstacle avoidance, human comfort.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector {
    pub time: f64,
    pub energy: f64,
    pub obstacle: f64,
    pub human: f64,
}

impl WeightVector {
    pub fn new(time: f64, energy: f64, obstacle: f64, human: f64) -> Self {
        WeightVector {
            time,
            energy,
            obstacle,
            human,
        }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.time, self.energy, self.obstacle, self.human]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        WeightVector::new(a[0], a[1], a[2], a[3])
    }

    pub fn sum(&self) -> f64 {
        self.time + self.energy + self.obstacle + self.human
    }

    /// Rescale so the components sum to one. Components must be positive.
    pub fn normalized(&self) -> Self {
        let s = self.sum();
        debug_assert!(s > 0.0);
        WeightVector::new(self.time / s, self.energy / s, self.obstacle / s, self.human / s)
    }

    /// Drop the human-comfort weight and redistribute it proportionally over
    /// the remaining three. Used when no survivor reaction is modelled.
    pub fn without_human(&self) -> Self {
        let s = self.time + self.energy + self.obstacle;
        debug_assert!(s > 0.0);
        WeightVector::new(self.time / s, self.energy / s, self.obstacle / s, 0.0)
    }

    pub fn dot(&self, components: [f64; 4]) -> f64 {
        self.time * components[0]
            + self.energy * components[1]
            + self.obstacle * components[2]
            + self.human * components[3]
    }
}

/// Baseline weights (time, energy, obstacle, human) for each proximity
/// category. The published near-obstacle row sums to 0.999 from rounding;
/// rows are renormalized on construction so each sums to one exactly.
const TABLE_ROWS: [[f64; 4]; 4] = [
    [0.417, 0.417, 0.083, 0.083], // far from both
    [0.083, 0.083, 0.417, 0.417], // near both
    [0.136, 0.191, 0.042, 0.631], // near survivor only
    [0.103, 0.137, 0.724, 0.035], // near obstacle only
];

/// Per-category weight vectors, one row per `CategoryLabel`.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoryWeightTable {
    rows: [WeightVector; 4],
}

impl Default for CategoryWeightTable {
    fn default() -> Self {
        let rows = TABLE_ROWS.map(|r| WeightVector::from_array(r).normalized());
        CategoryWeightTable { rows }
    }
}

impl CategoryWeightTable {
    /// Every category weighs the four criteria equally. Used by baselines
    /// that skip the pairwise-comparison calibration.
    pub fn uniform() -> Self {
        CategoryWeightTable {
            rows: [WeightVector::new(0.25, 0.25, 0.25, 0.25); 4],
        }
    }

    pub fn weights_for(&self, label: CategoryLabel) -> WeightVector {
        self.rows[label.index()]
    }

    /// Replace one row. The row is renormalized; components must be positive.
    pub fn set_row(&mut self, label: CategoryLabel, row: WeightVector) -> Result<(), AhpError> {
        for w in row.as_array() {
            if !(w.is_finite() && w > 0.0) {
                return Err(AhpError::BadWeight(w));
            }
        }
        self.rows[label.index()] = row.normalized();
        Ok(())
    }

    /// Reconstruct, per category, the perfectly consistent judgement matrix
    /// whose priority vector equals the stored row. Feeding these through
    /// `derive_weights` must recover the table; the self test relies on it.
    pub fn calibration_matrices(&self) -> [PairwiseMatrix; 4] {
        self.rows.map(|row| calibration_matrix(&row))
    }
}

/// Consistent judgement matrix `a_ij = w_i / w_j` for one weight row. Zero
/// weights (a disabled criterion) are floored at 1e-4 first.
pub fn calibration_matrix(row: &WeightVector) -> PairwiseMatrix {
    let floored: Vec<f64> = row.as_array().iter().map(|w| w.max(WEIGHT_FLOOR)).collect();
    PairwiseMatrix::from_weights(&floored).expect("floored weights are positive")
}

/// Priority weights and dominant eigenvalue of a 4x4 judgement matrix over
/// the four reward criteria.
pub fn derive_weights(matrix: &PairwiseMatrix) -> Result<(WeightVector, f64), AhpError> {
    if matrix.order() != 4 {
        return Err(AhpError::Dimension {
            expected: 4,
            got: matrix.order(),
        });
    }
    let (v, lambda) = matrix.principal_eigenvector()?;
    Ok((WeightVector::new(v[0], v[1], v[2], v[3]), lambda))
}
