//! Linear Bell expressions over the setting-indexed correlation tensor,
//! with exact local bounds by enumerating all 256 deterministic strategies.

use serde::{Deserialize, Serialize};

use crate::lhv::{joint_indices, BasisCoefficients, CorrelationTensor, StrategyVector};

/// A fixed ±1 answer for each of the eight (beam, setting) pairs, packed
/// into one byte: bit 2·beam + setting, a clear bit meaning +1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DeterministicStrategy {
    code: u8,
}

impl DeterministicStrategy {
    pub fn from_code(code: u8) -> DeterministicStrategy {
        DeterministicStrategy { code }
    }

    pub fn code(self) -> u8 {
        self.code
    }

    pub fn all() -> impl Iterator<Item = DeterministicStrategy> {
        (0..=u8::MAX).map(DeterministicStrategy::from_code)
    }

    pub fn outcome(self, beam: usize, setting: usize) -> f64 {
        if self.code >> (2 * beam + setting) & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// This beam's answers as one of the four strategy vectors.
    pub fn beam_vector(self, beam: usize) -> StrategyVector {
        let index = match (self.outcome(beam, 0) > 0.0, self.outcome(beam, 1) > 0.0) {
            (true, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
            (false, true) => 4,
        };
        StrategyVector::from_index(index).unwrap()
    }

    /// The rank-one correlation tensor of predetermined outcomes.
    pub fn tensor(self) -> CorrelationTensor {
        CorrelationTensor::from_fn(|joint| {
            (0..4).map(|beam| self.outcome(beam, joint[beam])).product()
        })
    }
}

/// A linear functional Σ w · t on correlation tensors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BellExpression {
    weights: [[[[f64; 2]; 2]; 2]; 2],
}

impl BellExpression {
    pub fn from_weights(weights: [[[[f64; 2]; 2]; 2]; 2]) -> BellExpression {
        BellExpression { weights }
    }

    pub fn from_fn(mut f: impl FnMut([usize; 4]) -> f64) -> BellExpression {
        let mut weights = [[[[0.0; 2]; 2]; 2]; 2];
        for idx in joint_indices() {
            weights[idx[0]][idx[1]][idx[2]][idx[3]] = f(idx);
        }
        BellExpression { weights }
    }

    pub fn weights(&self) -> &[[[[f64; 2]; 2]; 2]; 2] {
        &self.weights
    }

    pub fn weight(&self, idx: [usize; 4]) -> f64 {
        self.weights[idx[0]][idx[1]][idx[2]][idx[3]]
    }

    pub fn iter(&self) -> impl Iterator<Item = ([usize; 4], f64)> + '_ {
        joint_indices().map(move |idx| (idx, self.weight(idx)))
    }

    pub fn abs_weight_sum(&self) -> f64 {
        self.iter().map(|(_, w)| w.abs()).sum()
    }
}

/// The expression's value on a tensor.
pub fn quantum_value(expression: &BellExpression, tensor: &CorrelationTensor) -> f64 {
    expression
        .iter()
        .map(|(idx, w)| w * tensor.entry(idx))
        .sum()
}

/// max |Σ w · t| over all deterministic strategies; by convexity this
/// bounds the expression on every local model.
pub fn lhv_bound(expression: &BellExpression) -> f64 {
    DeterministicStrategy::all()
        .map(|strategy| quantum_value(expression, &strategy.tensor()).abs())
        .fold(0.0, f64::max)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// The expression whose local bound certifies Σ|c| ≤ 1: weights
/// w_{pqrs} = (1/16) Σ_{klmn} sign(c_{klmn}) v^k_p v^l_q v^m_r v^n_s.
/// On the tensor that produced c it evaluates to exactly Σ|c|.
pub fn saturating_expression(coefficients: &BasisCoefficients) -> BellExpression {
    BellExpression::from_fn(|joint| {
        let mut sum = 0.0;
        for (basis_idx, c) in coefficients.iter() {
            let mut term = sign(c);
            for x in 0..4 {
                term *= StrategyVector::BASIS[basis_idx[x]].component(joint[x]);
            }
            sum += term;
        }
        sum / 16.0
    })
}
