//! Normalized four-photon polarization states after fourfold post-selection,
//! and the standard double-pair preparation that produces them.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::Error;
use crate::fock::{
    beam_split, pdc_term, postselect_coincidence, rotate_polarization, Beam, CreationPolynomial,
    Polarization, PumpAmplitude,
};
use crate::Result;

/// One polarization per beam, in the order (a, a′, b, b′).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PolarizationPattern {
    slots: [Polarization; 4],
}

impl PolarizationPattern {
    pub const COUNT: usize = 16;

    pub fn new(slots: [Polarization; 4]) -> PolarizationPattern {
        PolarizationPattern { slots }
    }

    /// Dense index with H = 0, V = 1; beam a is the most significant bit,
    /// so index order coincides with lexicographic label order.
    pub fn index(self) -> usize {
        self.slots
            .iter()
            .fold(0, |acc, &p| acc << 1 | p as usize)
    }

    pub fn from_index(index: usize) -> PolarizationPattern {
        assert!(index < Self::COUNT, "pattern index {index} out of range");
        let mut slots = [Polarization::H; 4];
        for (i, slot) in slots.iter_mut().enumerate() {
            *slot = Polarization::ALL[index >> (3 - i) & 1];
        }
        PolarizationPattern { slots }
    }

    pub fn all() -> impl Iterator<Item = PolarizationPattern> {
        (0..Self::COUNT).map(PolarizationPattern::from_index)
    }

    pub fn slots(self) -> [Polarization; 4] {
        self.slots
    }

    pub fn polarization(self, beam: Beam) -> Polarization {
        self.slots[beam as usize]
    }

    /// H ↔ V in every slot.
    pub fn complemented(self) -> PolarizationPattern {
        PolarizationPattern {
            slots: self.slots.map(Polarization::flipped),
        }
    }

    pub fn label(self) -> String {
        self.slots.iter().map(|p| p.label()).collect()
    }

    pub fn from_label(label: &str) -> Result<PolarizationPattern> {
        let mut slots = [Polarization::H; 4];
        let chars: Vec<char> = label.chars().collect();
        if chars.len() != 4 {
            return Err(Error::BadPattern(label.to_string()));
        }
        for (slot, ch) in slots.iter_mut().zip(chars) {
            *slot = match ch {
                'H' => Polarization::H,
                'V' => Polarization::V,
                _ => return Err(Error::BadPattern(label.to_string())),
            };
        }
        Ok(PolarizationPattern { slots })
    }
}

impl std::fmt::Display for PolarizationPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A normalized pure state of one photon per beam, stored as the sixteen
/// polarization-pattern amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct PostselectedState {
    amplitudes: [Complex64; 16],
}

impl PostselectedState {
    /// Builds a state from pattern amplitudes, accumulating duplicates and
    /// normalizing. Fails only when every amplitude is zero.
    pub fn from_amplitudes(
        entries: impl IntoIterator<Item = (PolarizationPattern, Complex64)>,
    ) -> Result<PostselectedState> {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 16];
        for (pattern, amp) in entries {
            amplitudes[pattern.index()] += amp;
        }
        let norm_sqr: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sqr == 0.0 {
            return Err(Error::ZeroNorm);
        }
        let scale = norm_sqr.sqrt().recip();
        for a in &mut amplitudes {
            *a *= scale;
        }
        Ok(PostselectedState { amplitudes })
    }

    /// The basis state concentrated on one pattern.
    pub fn basis(pattern: PolarizationPattern) -> PostselectedState {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 16];
        amplitudes[pattern.index()] = Complex64::new(1.0, 0.0);
        PostselectedState { amplitudes }
    }

    pub fn amplitude(&self, pattern: PolarizationPattern) -> Complex64 {
        self.amplitudes[pattern.index()]
    }

    pub fn amplitudes(&self) -> &[Complex64; 16] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Rotates the global phase so the largest-modulus amplitude (ties
    /// broken by pattern index) is real and positive.
    pub fn phase_canonical(&self) -> PostselectedState {
        let mut pivot = Complex64::new(0.0, 0.0);
        for &a in self.amplitudes.iter() {
            if a.norm() > pivot.norm() + 1e-15 {
                pivot = a;
            }
        }
        if pivot.norm() == 0.0 {
            return self.clone();
        }
        let phase = pivot / pivot.norm();
        let mut amplitudes = self.amplitudes;
        for a in &mut amplitudes {
            *a *= phase.conj();
        }
        PostselectedState { amplitudes }
    }

    /// Equality of rays: both states agree amplitude-by-amplitude after
    /// fixing the global phase convention.
    pub fn approx_eq_up_to_phase(&self, other: &PostselectedState, tolerance: f64) -> bool {
        let lhs = self.phase_canonical();
        let rhs = other.phase_canonical();
        lhs.amplitudes
            .iter()
            .zip(rhs.amplitudes.iter())
            .all(|(x, y)| (x - y).norm() <= tolerance)
    }

    /// All sixteen amplitudes keyed by pattern label, for serialization.
    pub fn amplitude_map(&self) -> BTreeMap<String, [f64; 2]> {
        PolarizationPattern::all()
            .map(|p| {
                let a = self.amplitude(p);
                (p.label(), [a.re, a.im])
            })
            .collect()
    }
}

/// Converts a fourfold-coincidence polynomial into the normalized pattern
/// state it creates. Every monomial must put exactly one photon in each
/// beam; with single occupancy the bosonic weights are all 1, so pattern
/// amplitudes are just the normalized coefficients.
pub fn to_state(poly: &CreationPolynomial) -> Result<PostselectedState> {
    let mut entries = Vec::with_capacity(poly.term_count());
    for (monomial, &coefficient) in poly.terms() {
        if !monomial.is_fourfold_coincidence() {
            return Err(Error::NotCoincidence(monomial.to_string()));
        }
        let mut slots = [Polarization::H; 4];
        for (slot, &beam) in slots.iter_mut().zip(Beam::ALL.iter()) {
            *slot = if monomial.power(crate::fock::Mode::new(beam, Polarization::V)) == 1 {
                Polarization::V
            } else {
                Polarization::H
            };
        }
        entries.push((PolarizationPattern::new(slots), coefficient));
    }
    PostselectedState::from_amplitudes(entries)
}

/// Every stage of the double-pair preparation.
#[derive(Clone, Debug)]
pub struct PipelineStages {
    /// Second-order emission term with unit prefactor.
    pub pair_term: CreationPolynomial,
    /// After both 50:50 splitters.
    pub split: CreationPolynomial,
    /// Fourfold-coincidence part only.
    pub postselected: CreationPolynomial,
    /// After the H ↔ V relabel on beams a and a′.
    pub rotated: CreationPolynomial,
    /// The normalized four-photon state.
    pub state: PostselectedState,
}

/// Runs the standard preparation: double-pair emission, both splitters,
/// fourfold post-selection, and the polarization relabel on the a side.
pub fn double_pair_pipeline() -> PipelineStages {
    let pair_term = pdc_term(2, PumpAmplitude::unit_double_pair())
        .expect("order 2 is within the default cap");
    let split = beam_split(&pair_term).expect("pair term contains no primed modes");
    let postselected = postselect_coincidence(&split);
    let rotated = rotate_polarization(&postselected, &[Beam::A, Beam::APrime]);
    let state = to_state(&rotated).expect("postselected double-pair term is nonzero");
    PipelineStages {
        pair_term,
        split,
        postselected,
        rotated,
        state,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQRT_THIRD: f64 = 0.577_350_269_189_625_7;
    const HALF_SQRT_THIRD: f64 = 0.288_675_134_594_812_87;

    #[test]
    fn pattern_labels_round_trip() {
        for pattern in PolarizationPattern::all() {
            assert_eq!(
                PolarizationPattern::from_label(&pattern.label()).unwrap(),
                pattern
            );
        }
        assert_eq!(PolarizationPattern::from_index(0).label(), "HHHH");
        assert_eq!(PolarizationPattern::from_index(15).label(), "VVVV");
        assert!(PolarizationPattern::from_label("HVX").is_err());
        assert!(PolarizationPattern::from_label("HVXH").is_err());
    }

    #[test]
    fn from_amplitudes_normalizes_and_rejects_zero() {
        let hhhh = PolarizationPattern::from_label("HHHH").unwrap();
        let state =
            PostselectedState::from_amplitudes([(hhhh, Complex64::new(3.0, 0.0))]).unwrap();
        assert!((state.amplitude(hhhh) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((state.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(
            PostselectedState::from_amplitudes([]),
            Err(Error::ZeroNorm)
        );
    }

    #[test]
    fn to_state_rejects_non_coincidence_terms() {
        let pair = pdc_term(2, PumpAmplitude::unit_double_pair()).unwrap();
        match to_state(&pair) {
            Err(Error::NotCoincidence(_)) => {}
            other => panic!("expected NotCoincidence, got {other:?}"),
        }
        assert_eq!(
            to_state(&CreationPolynomial::zero()),
            Err(Error::ZeroNorm)
        );
    }

    #[test]
    fn pipeline_state_amplitudes() {
        let state = double_pair_pipeline().state;
        let expect = |label: &str| state.amplitude(PolarizationPattern::from_label(label).unwrap());
        for label in ["VVVV", "HHHH"] {
            let a = expect(label);
            assert!((a.re - SQRT_THIRD).abs() < 1e-12, "{label}: {a}");
            assert!(a.im.abs() < 1e-12);
        }
        for label in ["HVHV", "HVVH", "VHHV", "VHVH"] {
            let a = expect(label);
            assert!((a.re - HALF_SQRT_THIRD).abs() < 1e-12, "{label}: {a}");
            assert!(a.im.abs() < 1e-12);
        }
        for label in ["HHHV", "HHVH", "HVHH", "VHHH", "HHVV", "VVHH", "VHVV", "HVVV"] {
            assert!(expect(label).norm() < 1e-12, "{label} should vanish");
        }
    }

    #[test]
    fn pipeline_state_mass_splits_two_thirds_one_third() {
        let state = double_pair_pipeline().state;
        let mass = |labels: &[&str]| -> f64 {
            labels
                .iter()
                .map(|l| {
                    state
                        .amplitude(PolarizationPattern::from_label(l).unwrap())
                        .norm_sqr()
                })
                .sum()
        };
        assert!((mass(&["VVVV", "HHHH"]) - 2.0 / 3.0).abs() < 1e-12);
        assert!((mass(&["HVHV", "HVVH", "VHHV", "VHVH"]) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ray_comparison_ignores_global_phase() {
        let state = double_pair_pipeline().state;
        let phase = Complex64::from_polar(1.0, 1.234);
        let rotated = PostselectedState::from_amplitudes(
            PolarizationPattern::all().map(|p| (p, state.amplitude(p) * phase)),
        )
        .unwrap();
        assert!(state.approx_eq_up_to_phase(&rotated, 1e-12));
        let different = PostselectedState::basis(PolarizationPattern::from_index(3));
        assert!(!state.approx_eq_up_to_phase(&different, 1e-12));
    }

    #[test]
    fn amplitude_map_lists_all_patterns_in_label_order() {
        let map = double_pair_pipeline().state.amplitude_map();
        assert_eq!(map.len(), 16);
        let keys: Vec<&String> = map.keys().collect();
        assert_eq!(keys[0], "HHHH");
        assert_eq!(keys[15], "VVVV");
        assert!((map["VVVV"][0] - SQRT_THIRD).abs() < 1e-12);
        assert_eq!(map["HHVV"], [0.0, 0.0]);
    }
}
