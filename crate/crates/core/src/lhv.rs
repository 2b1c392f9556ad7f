//! Setting-indexed correlation tensors, their expansion in the
//! deterministic product basis, and the l1 locality criterion.
//!
//! Each of the four beams chooses between two analyzer phases, so the
//! correlations at all joint choices form a 2×2×2×2 tensor. Expanding it
//! over products of the strategy vectors (1,1), (1,−1) and their negatives
//! gives unique coefficients c; the correlations admit a local
//! hidden-variable model exactly when Σ|c| ≤ 1, and in that case
//! [`reconstruct_lhv`] builds one explicitly.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::Error;
use crate::measurement::{CorrelationSource, PhaseSettings};
use crate::Result;

/// Coefficient magnitudes this close to the Σ|c| = 1 boundary still count
/// as admitting a local model.
pub const LHV_BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Two candidate phases per beam, indexed 0 and 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SettingChoices {
    pub phi_a: [f64; 2],
    #[serde(rename = "phi_a'")]
    pub phi_a_prime: [f64; 2],
    pub phi_b: [f64; 2],
    #[serde(rename = "phi_b'")]
    pub phi_b_prime: [f64; 2],
}

impl SettingChoices {
    /// The choices φ_a ∈ {0, π/2} and φ_x ∈ {−π/4, π/4} for the other
    /// three beams, which maximize the violation found by the optimizer.
    pub fn standard_violation() -> SettingChoices {
        SettingChoices {
            phi_a: [0.0, FRAC_PI_2],
            phi_a_prime: [-FRAC_PI_4, FRAC_PI_4],
            phi_b: [-FRAC_PI_4, FRAC_PI_4],
            phi_b_prime: [-FRAC_PI_4, FRAC_PI_4],
        }
    }

    pub fn per_beam(self) -> [[f64; 2]; 4] {
        [self.phi_a, self.phi_a_prime, self.phi_b, self.phi_b_prime]
    }

    /// Phases selected by one joint choice, indices 0 or 1 per beam.
    pub fn phases(self, choice: [usize; 4]) -> PhaseSettings {
        let beams = self.per_beam();
        PhaseSettings::new(
            beams[0][choice[0]],
            beams[1][choice[1]],
            beams[2][choice[2]],
            beams[3][choice[3]],
        )
    }

    /// Layout (φ_a⁰, φ_a¹, φ_a′⁰, φ_a′¹, φ_b⁰, φ_b¹, φ_b′⁰, φ_b′¹).
    pub fn from_flat(flat: [f64; 8]) -> SettingChoices {
        SettingChoices {
            phi_a: [flat[0], flat[1]],
            phi_a_prime: [flat[2], flat[3]],
            phi_b: [flat[4], flat[5]],
            phi_b_prime: [flat[6], flat[7]],
        }
    }

    pub fn as_flat(self) -> [f64; 8] {
        [
            self.phi_a[0],
            self.phi_a[1],
            self.phi_a_prime[0],
            self.phi_a_prime[1],
            self.phi_b[0],
            self.phi_b[1],
            self.phi_b_prime[0],
            self.phi_b_prime[1],
        ]
    }
}

/// One of the four ±1 outcome assignments a beam can make to its two
/// settings, viewed as a vector: v¹ = (1,1), v² = (1,−1), v³ = (−1,−1),
/// v⁴ = (−1,1). The first two form an orthogonal basis of the plane and
/// v^{j+2} = −v^j.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StrategyVector {
    index: u8,
}

impl StrategyVector {
    pub const ALL: [StrategyVector; 4] = [
        StrategyVector { index: 1 },
        StrategyVector { index: 2 },
        StrategyVector { index: 3 },
        StrategyVector { index: 4 },
    ];

    /// The two basis vectors v¹, v².
    pub const BASIS: [StrategyVector; 2] = [StrategyVector { index: 1 }, StrategyVector { index: 2 }];

    pub fn from_index(index: u8) -> Result<StrategyVector> {
        if (1..=4).contains(&index) {
            Ok(StrategyVector { index })
        } else {
            Err(Error::BadStrategyIndex(index))
        }
    }

    pub fn index(self) -> u8 {
        self.index
    }

    pub fn components(self) -> [f64; 2] {
        match self.index {
            1 => [1.0, 1.0],
            2 => [1.0, -1.0],
            3 => [-1.0, -1.0],
            _ => [-1.0, 1.0],
        }
    }

    pub fn component(self, setting: usize) -> f64 {
        self.components()[setting]
    }

    pub fn negated(self) -> StrategyVector {
        StrategyVector {
            index: match self.index {
                1 => 3,
                2 => 4,
                3 => 1,
                _ => 2,
            },
        }
    }
}

pub(crate) fn joint_indices() -> impl Iterator<Item = [usize; 4]> {
    (0..16_usize).map(|i| [i >> 3 & 1, i >> 2 & 1, i >> 1 & 1, i & 1])
}

/// Correlation values at the sixteen joint setting choices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationTensor {
    values: [[[[f64; 2]; 2]; 2]; 2],
}

impl CorrelationTensor {
    pub fn zero() -> CorrelationTensor {
        CorrelationTensor {
            values: [[[[0.0; 2]; 2]; 2]; 2],
        }
    }

    pub fn from_fn(mut f: impl FnMut([usize; 4]) -> f64) -> CorrelationTensor {
        let mut tensor = CorrelationTensor::zero();
        for idx in joint_indices() {
            tensor.values[idx[0]][idx[1]][idx[2]][idx[3]] = f(idx);
        }
        tensor
    }

    pub fn from_values(values: [[[[f64; 2]; 2]; 2]; 2]) -> CorrelationTensor {
        CorrelationTensor { values }
    }

    pub fn values(&self) -> &[[[[f64; 2]; 2]; 2]; 2] {
        &self.values
    }

    pub fn entry(&self, idx: [usize; 4]) -> f64 {
        self.values[idx[0]][idx[1]][idx[2]][idx[3]]
    }

    pub fn iter(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        joint_indices().map(move |idx| (idx, self.entry(idx)))
    }

    pub fn scaled(&self, factor: f64) -> CorrelationTensor {
        CorrelationTensor::from_fn(|idx| factor * self.entry(idx))
    }
}

/// Expansion coefficients over the basis v^k ⊗ v^l ⊗ v^m ⊗ v^n with
/// k, l, m, n ∈ {1, 2}, stored 0-indexed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BasisCoefficients {
    values: [[[[f64; 2]; 2]; 2]; 2],
}

impl BasisCoefficients {
    pub fn zero() -> BasisCoefficients {
        BasisCoefficients {
            values: [[[[0.0; 2]; 2]; 2]; 2],
        }
    }

    pub fn from_fn(mut f: impl FnMut([usize; 4]) -> f64) -> BasisCoefficients {
        let mut coefficients = BasisCoefficients::zero();
        for idx in joint_indices() {
            coefficients.values[idx[0]][idx[1]][idx[2]][idx[3]] = f(idx);
        }
        coefficients
    }

    pub fn values(&self) -> &[[[[f64; 2]; 2]; 2]; 2] {
        &self.values
    }

    pub fn entry(&self, idx: [usize; 4]) -> f64 {
        self.values[idx[0]][idx[1]][idx[2]][idx[3]]
    }

    pub fn iter(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        joint_indices().map(move |idx| (idx, self.entry(idx)))
    }

    pub fn scaled(&self, factor: f64) -> BasisCoefficients {
        BasisCoefficients::from_fn(|idx| factor * self.entry(idx))
    }

    /// Σ|c|, the quantity the locality criterion bounds by 1.
    pub fn l1(&self) -> f64 {
        self.iter().map(|(_, c)| c.abs()).sum()
    }
}

/// Correlations of a state or mixture at all sixteen joint choices.
pub fn quantum_tensor<S: CorrelationSource>(source: &S, choices: &SettingChoices) -> CorrelationTensor {
    CorrelationTensor::from_fn(|idx| source.correlation(choices.phases(idx)))
}

/// Orthogonal projection onto the product basis: each basis tensor has
/// squared norm 2⁴, whence the 1/16.
pub fn expand_in_basis(tensor: &CorrelationTensor) -> BasisCoefficients {
    BasisCoefficients::from_fn(|basis_idx| {
        let vectors = basis_idx.map(|j| StrategyVector::BASIS[j]);
        let mut sum = 0.0;
        for (joint, value) in tensor.iter() {
            let mut term = value;
            for x in 0..4 {
                term *= vectors[x].component(joint[x]);
            }
            sum += term;
        }
        sum / 16.0
    })
}

/// Inverse of [`expand_in_basis`]: Σ c_{klmn} v^k ⊗ v^l ⊗ v^m ⊗ v^n.
pub fn reconstruct_tensor(coefficients: &BasisCoefficients) -> CorrelationTensor {
    CorrelationTensor::from_fn(|joint| {
        let mut sum = 0.0;
        for (basis_idx, c) in coefficients.iter() {
            let mut term = c;
            for x in 0..4 {
                term *= StrategyVector::BASIS[basis_idx[x]].component(joint[x]);
            }
            sum += term;
        }
        sum
    })
}

/// Σ|c| of the tensor's basis expansion. At most 1 exactly when the tensor
/// admits a local hidden-variable model.
pub fn lhv_l1(tensor: &CorrelationTensor) -> f64 {
    expand_in_basis(tensor).l1()
}

/// The largest visibility v for which v · tensor still admits a local
/// model: min(1, 1/Σ|c|).
pub fn critical_visibility(tensor: &CorrelationTensor) -> f64 {
    let l1 = lhv_l1(tensor);
    if l1 <= 1.0 {
        1.0
    } else {
        1.0 / l1
    }
}

/// A probability distribution over the 4⁴ joint deterministic strategies,
/// indexed by one [`StrategyVector`] per beam.
#[derive(Clone, Debug, PartialEq)]
pub struct LhvModel {
    weights: [f64; 256],
}

impl LhvModel {
    pub fn from_weights(weights: [f64; 256]) -> Result<LhvModel> {
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < -1e-9 {
                return Err(Error::BadModelWeights(format!("weight {i} is {w}")));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::BadModelWeights(format!("weights sum to {total}")));
        }
        Ok(LhvModel { weights })
    }

    fn flat(strategies: [StrategyVector; 4]) -> usize {
        strategies
            .iter()
            .fold(0, |acc, s| acc * 4 + (s.index() as usize - 1))
    }

    pub fn weight(&self, strategies: [StrategyVector; 4]) -> f64 {
        self.weights[Self::flat(strategies)]
    }

    pub fn weights(&self) -> &[f64; 256] {
        &self.weights
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// The correlations the model predicts: at each joint choice, the
    /// weighted sum of products of strategy components.
    pub fn induced_tensor(&self) -> CorrelationTensor {
        CorrelationTensor::from_fn(|joint| {
            let mut sum = 0.0;
            for (flat, &w) in self.weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let mut term = w;
                for x in 0..4 {
                    let j = flat >> (2 * (3 - x)) & 3;
                    term *= StrategyVector::ALL[j].component(joint[x]);
                }
                sum += term;
            }
            sum
        })
    }
}

/// Builds an explicit local model for coefficients with Σ|c| ≤ 1.
///
/// A coefficient c ≥ 0 at (k,l,m,n) puts weight c on that strategy tuple;
/// c < 0 puts |c| on (k+2, l, m, n), flipping the first beam's vector. The
/// leftover mass 1 − Σ|c| is split between (1,1,1,1) and (3,1,1,1), whose
/// tensor contributions cancel. Failure carries the offending Σ|c|.
pub fn reconstruct_lhv(coefficients: &BasisCoefficients) -> Result<LhvModel> {
    let l1 = coefficients.l1();
    if l1 > 1.0 + LHV_BOUNDARY_TOLERANCE {
        return Err(Error::NoLhvModel { l1 });
    }
    let mut weights = [0.0_f64; 256];
    for (basis_idx, c) in coefficients.iter() {
        if c == 0.0 {
            continue;
        }
        let mut strategies = basis_idx.map(|j| StrategyVector::BASIS[j]);
        if c < 0.0 {
            strategies[0] = strategies[0].negated();
        }
        weights[LhvModel::flat(strategies)] += c.abs();
    }
    let deficit = (1.0 - l1).max(0.0);
    let filler = [StrategyVector::BASIS[0]; 4];
    let mut cancelling = filler;
    cancelling[0] = filler[0].negated();
    weights[LhvModel::flat(filler)] += deficit / 2.0;
    weights[LhvModel::flat(cancelling)] += deficit / 2.0;
    LhvModel::from_weights(weights)
}

/// Everything the tensor analysis produces for one choice of settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorReport {
    pub settings: SettingChoices,
    pub tensor: CorrelationTensor,
    pub coefficients: BasisCoefficients,
    pub l1: f64,
    pub critical_visibility: f64,
}

impl TensorReport {
    pub fn evaluate<S: CorrelationSource>(source: &S, settings: SettingChoices) -> TensorReport {
        let tensor = quantum_tensor(source, &settings);
        let coefficients = expand_in_basis(&tensor);
        let l1 = coefficients.l1();
        let critical_visibility = if l1 <= 1.0 { 1.0 } else { 1.0 / l1 };
        TensorReport {
            settings,
            tensor,
            coefficients,
            l1,
            critical_visibility,
        }
    }

    pub fn admits_lhv(&self) -> bool {
        self.l1 <= 1.0 + LHV_BOUNDARY_TOLERANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::NoiseMixture;
    use crate::state::double_pair_pipeline;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::SQRT_2;

    const VIOLATION: f64 = 8.0 / (3.0 * SQRT_2);

    fn standard_tensor() -> CorrelationTensor {
        let state = double_pair_pipeline().state;
        quantum_tensor(&state, &SettingChoices::standard_violation())
    }

    #[test]
    fn strategy_vectors_form_a_signed_basis() {
        assert!(StrategyVector::from_index(0).is_err());
        assert!(StrategyVector::from_index(5).is_err());
        for v in StrategyVector::ALL {
            assert_eq!(v.negated().negated(), v);
            let [c0, c1] = v.components();
            let [n0, n1] = v.negated().components();
            assert_eq!([n0, n1], [-c0, -c1]);
            assert_eq!(c0 * c0 + c1 * c1, 2.0);
        }
        let [v1, v2] = StrategyVector::BASIS;
        let dot: f64 = v1
            .components()
            .iter()
            .zip(v2.components())
            .map(|(a, b)| a * b)
            .sum();
        assert_eq!(dot, 0.0);
    }

    #[test]
    fn setting_choices_flat_round_trip() {
        let flat = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
        let choices = SettingChoices::from_flat(flat);
        assert_eq!(choices.as_flat(), flat);
        let phases = choices.phases([1, 0, 1, 0]);
        assert_eq!(phases.as_array(), [0.2, 0.3, 0.6, 0.7]);
    }

    #[test]
    fn standard_tensor_first_entry() {
        let tensor = standard_tensor();
        assert!((tensor.entry([0, 0, 0, 0]) + SQRT_2 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn equal_zero_settings_give_the_all_ones_tensor() {
        let state = double_pair_pipeline().state;
        let tensor = quantum_tensor(&state, &SettingChoices::default());
        for (_, value) in tensor.iter() {
            assert!((value - 1.0).abs() < 1e-12);
        }
        assert!((lhv_l1(&tensor) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_visibility_gives_the_zero_tensor() {
        let mixture = NoiseMixture::new(double_pair_pipeline().state, 0.0).unwrap();
        let tensor = quantum_tensor(&mixture, &SettingChoices::standard_violation());
        for (_, value) in tensor.iter() {
            assert!(value.abs() < 1e-14);
        }
        assert_eq!(critical_visibility(&tensor), 1.0);
    }

    #[test]
    fn mixture_tensor_scales_with_visibility() {
        let state = double_pair_pipeline().state;
        let choices = SettingChoices::standard_violation();
        let pure = quantum_tensor(&state, &choices);
        let mixture = NoiseMixture::new(state, 0.37).unwrap();
        let mixed = quantum_tensor(&mixture, &choices);
        for (idx, value) in mixed.iter() {
            assert!((value - 0.37 * pure.entry(idx)).abs() < 1e-12);
        }
    }

    #[test]
    fn all_ones_tensor_is_a_basis_element() {
        let tensor = CorrelationTensor::from_fn(|_| 1.0);
        let coefficients = expand_in_basis(&tensor);
        for (idx, c) in coefficients.iter() {
            if idx == [0, 0, 0, 0] {
                assert_eq!(c, 1.0);
            } else {
                assert_eq!(c, 0.0);
            }
        }
    }

    #[test]
    fn standard_coefficient_magnitudes() {
        let coefficients = expand_in_basis(&standard_tensor());
        assert!((coefficients.l1() - VIOLATION).abs() < 1e-9);
        let mut magnitudes: Vec<f64> = coefficients.iter().map(|(_, c)| c.abs()).collect();
        magnitudes.sort_by(f64::total_cmp);
        let mut expected = Vec::new();
        expected.extend([1.0 / (12.0 * SQRT_2); 4]);
        expected.extend([1.0 / (6.0 * SQRT_2); 8]);
        expected.extend([1.0 / (4.0 * SQRT_2); 4]);
        for (got, want) in magnitudes.iter().zip(expected) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn expansion_round_trips_exactly() {
        let tensor = standard_tensor();
        let rebuilt = reconstruct_tensor(&expand_in_basis(&tensor));
        for (idx, value) in rebuilt.iter() {
            assert!((value - tensor.entry(idx)).abs() < 1e-14);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let random = CorrelationTensor::from_fn(|_| rng.gen_range(-1.0..1.0));
            let rebuilt = reconstruct_tensor(&expand_in_basis(&random));
            for (idx, value) in rebuilt.iter() {
                assert!((value - random.entry(idx)).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn l1_is_positively_homogeneous() {
        let tensor = standard_tensor();
        let base = lhv_l1(&tensor);
        for v in [0.0, 0.25, 0.53, 1.0] {
            assert!((lhv_l1(&tensor.scaled(v)) - v * base).abs() < 1e-12);
        }
        assert!((critical_visibility(&tensor) * base - 1.0).abs() < 1e-12);
    }

    #[test]
    fn violating_coefficients_admit_no_model() {
        let coefficients = expand_in_basis(&standard_tensor());
        match reconstruct_lhv(&coefficients) {
            Err(Error::NoLhvModel { l1 }) => assert!((l1 - VIOLATION).abs() < 1e-9),
            other => panic!("expected no-model failure, got {other:?}"),
        }
    }

    #[test]
    fn halved_tensor_admits_a_model() {
        let halved = standard_tensor().scaled(0.5);
        assert!(lhv_l1(&halved) <= 1.0);
        let model = reconstruct_lhv(&expand_in_basis(&halved)).unwrap();
        assert!((model.total() - 1.0).abs() < 1e-12);
        let induced = model.induced_tensor();
        for (idx, value) in induced.iter() {
            assert!((value - halved.entry(idx)).abs() < 1e-13);
        }
    }

    #[test]
    fn point_mass_reconstruction() {
        let coefficients =
            BasisCoefficients::from_fn(|idx| if idx == [0, 0, 0, 0] { 1.0 } else { 0.0 });
        let model = reconstruct_lhv(&coefficients).unwrap();
        let one = StrategyVector::from_index(1).unwrap();
        assert_eq!(model.weight([one; 4]), 1.0);
        assert_eq!(model.total(), 1.0);
    }

    #[test]
    fn two_coefficient_reconstruction_places_the_deficit() {
        let coefficients = BasisCoefficients::from_fn(|idx| match idx {
            [0, 0, 0, 0] => 0.5,
            [1, 1, 1, 1] => -0.4,
            _ => 0.0,
        });
        let model = reconstruct_lhv(&coefficients).unwrap();
        let s = |i: u8| StrategyVector::from_index(i).unwrap();
        assert!((model.weight([s(1), s(1), s(1), s(1)]) - 0.55).abs() < 1e-15);
        assert!((model.weight([s(4), s(2), s(2), s(2)]) - 0.4).abs() < 1e-15);
        assert!((model.weight([s(3), s(1), s(1), s(1)]) - 0.05).abs() < 1e-15);
        let recovered = expand_in_basis(&model.induced_tensor());
        for (idx, c) in recovered.iter() {
            assert!((c - coefficients.entry(idx)).abs() < 1e-13);
        }
    }

    #[test]
    fn model_weights_are_validated() {
        let mut weights = [0.0; 256];
        weights[0] = 0.5;
        assert!(LhvModel::from_weights(weights).is_err());
        weights[0] = 1.5;
        weights[7] = -0.5;
        assert!(LhvModel::from_weights(weights).is_err());
        weights[0] = 0.5;
        weights[7] = 0.5;
        assert!(LhvModel::from_weights(weights).is_ok());
    }

    #[test]
    fn report_serializes_with_primed_keys() {
        let state = double_pair_pipeline().state;
        let report = TensorReport::evaluate(&state, SettingChoices::standard_violation());
        assert!(!report.admits_lhv());
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"phi_a'\""));
        assert!(json.contains("\"critical_visibility\""));
        let back: TensorReport = serde_json::from_str(&json).unwrap();
        assert!((back.l1 - report.l1).abs() < 1e-12);
        assert_eq!(back.settings, report.settings);
    }
}
