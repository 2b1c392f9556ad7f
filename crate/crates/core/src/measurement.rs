//! Analyzer statistics for the four beams: outcome amplitudes,
//! probabilities, and the four-party correlation function.
//!
//! Each beam passes a phase shifter and a polarization analyzer whose
//! eigenkets are |±, φ⟩ = (|V⟩ ± e^{−iφ}|H⟩)/√2. A fourfold detection
//! outcome assigns one sign per beam.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::Error;
use crate::state::PostselectedState;
use crate::Result;

/// A detector outcome at one beam: the +1 or −1 analyzer port.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const ALL: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flipped(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn label(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// One fourfold detection outcome (k, l, m, n) for beams (a, a′, b, b′).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Outcome {
    pub k: Sign,
    pub l: Sign,
    pub m: Sign,
    pub n: Sign,
}

impl Outcome {
    pub fn new(k: Sign, l: Sign, m: Sign, n: Sign) -> Outcome {
        Outcome { k, l, m, n }
    }

    pub fn all() -> [Outcome; 16] {
        let mut outcomes = [Outcome::new(Sign::Plus, Sign::Plus, Sign::Plus, Sign::Plus); 16];
        for (i, slot) in outcomes.iter_mut().enumerate() {
            let pick = |bit: usize| {
                if i >> bit & 1 == 0 {
                    Sign::Plus
                } else {
                    Sign::Minus
                }
            };
            *slot = Outcome::new(pick(3), pick(2), pick(1), pick(0));
        }
        outcomes
    }

    pub fn signs(self) -> [Sign; 4] {
        [self.k, self.l, self.m, self.n]
    }

    /// The product klmn.
    pub fn product(self) -> f64 {
        self.signs().iter().map(|s| s.value()).product()
    }

    pub fn label(self) -> String {
        self.signs().iter().map(|s| s.label()).collect()
    }
}

impl std::fmt::Display for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Analyzer phases (φ_a, φ_a′, φ_b, φ_b′), in radians.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseSettings {
    pub phi_a: f64,
    pub phi_a_prime: f64,
    pub phi_b: f64,
    pub phi_b_prime: f64,
}

impl PhaseSettings {
    pub fn new(phi_a: f64, phi_a_prime: f64, phi_b: f64, phi_b_prime: f64) -> PhaseSettings {
        PhaseSettings {
            phi_a,
            phi_a_prime,
            phi_b,
            phi_b_prime,
        }
    }

    pub fn from_array(phases: [f64; 4]) -> PhaseSettings {
        PhaseSettings::new(phases[0], phases[1], phases[2], phases[3])
    }

    pub fn as_array(self) -> [f64; 4] {
        [self.phi_a, self.phi_a_prime, self.phi_b, self.phi_b_prime]
    }

    pub fn sum(self) -> f64 {
        self.phi_a + self.phi_a_prime + self.phi_b + self.phi_b_prime
    }
}

/// The analyzer eigenket |k, φ⟩ = (|V⟩ + k e^{−iφ}|H⟩)/√2 as its
/// (V, H) components.
pub fn analyzer_ket(sign: Sign, phi: f64) -> [Complex64; 2] {
    [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::from_polar(FRAC_1_SQRT_2, -phi) * sign.value(),
    ]
}

/// ⟨outcome, settings | state⟩ by direct contraction of the four analyzer
/// bras against the pattern amplitudes. This is the authoritative amplitude;
/// the closed forms in [`closed_form`] are pinned to it by tests.
pub fn amplitude(state: &PostselectedState, outcome: Outcome, settings: PhaseSettings) -> Complex64 {
    use crate::fock::Polarization;
    let signs = outcome.signs();
    let phases = settings.as_array();
    // Conjugated ket components: ⟨k,φ|V⟩ = 1/√2, ⟨k,φ|H⟩ = k e^{+iφ}/√2.
    let bra = |x: usize, pol: Polarization| -> Complex64 {
        match pol {
            Polarization::V => Complex64::new(FRAC_1_SQRT_2, 0.0),
            Polarization::H => Complex64::from_polar(FRAC_1_SQRT_2, phases[x]) * signs[x].value(),
        }
    };
    let mut total = Complex64::new(0.0, 0.0);
    for pattern in crate::state::PolarizationPattern::all() {
        let amp = state.amplitude(pattern);
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        let slots = pattern.slots();
        let weight = bra(0, slots[0]) * bra(1, slots[1]) * bra(2, slots[2]) * bra(3, slots[3]);
        total += amp * weight;
    }
    total
}

/// Anything that yields fourfold outcome statistics: a pure post-selected
/// state, or such a state diluted with pattern-white noise.
pub trait CorrelationSource {
    fn state(&self) -> &PostselectedState;

    /// Weight of the pure state in the mixture; 1 for a pure state.
    fn visibility(&self) -> f64;

    /// P(outcome | settings) = (1 − v)/16 + v · |⟨outcome|state⟩|².
    fn probability(&self, outcome: Outcome, settings: PhaseSettings) -> f64 {
        let v = self.visibility();
        (1.0 - v) / 16.0 + v * amplitude(self.state(), outcome, settings).norm_sqr()
    }

    /// E(settings) = Σ_outcomes klmn · P(outcome | settings).
    fn correlation(&self, settings: PhaseSettings) -> f64 {
        Outcome::all()
            .iter()
            .map(|&o| o.product() * self.probability(o, settings))
            .sum()
    }
}

impl CorrelationSource for PostselectedState {
    fn state(&self) -> &PostselectedState {
        self
    }

    fn visibility(&self) -> f64 {
        1.0
    }
}

/// A pure state observed with visibility v, mixed with uniform noise over
/// the sixteen patterns with weight 1 − v.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseMixture {
    visibility: f64,
    state: PostselectedState,
}

impl NoiseMixture {
    pub fn new(state: PostselectedState, visibility: f64) -> Result<NoiseMixture> {
        if !(0.0..=1.0).contains(&visibility) {
            return Err(Error::VisibilityRange(visibility));
        }
        Ok(NoiseMixture { visibility, state })
    }

    pub fn pure_state(&self) -> &PostselectedState {
        &self.state
    }
}

impl CorrelationSource for NoiseMixture {
    fn state(&self) -> &PostselectedState {
        &self.state
    }

    fn visibility(&self) -> f64 {
        self.visibility
    }
}

/// Closed forms specific to the state produced by
/// [`crate::state::double_pair_pipeline`]. Each mirrors the direct
/// contraction and is pinned to it by tests.
pub mod closed_form {
    use super::{Outcome, PhaseSettings};
    use num_complex::Complex64;

    /// Fourfold amplitude
    /// (1/(4√3)) [1 + klmn e^{iΣφ}
    ///            + ½ (k e^{iφ_a} + l e^{iφ_a′})(m e^{iφ_b} + n e^{iφ_b′})].
    pub fn amplitude(outcome: Outcome, settings: PhaseSettings) -> Complex64 {
        let [k, l, m, n] = outcome.signs().map(|s| s.value());
        let [pa, pap, pb, pbp] = settings.as_array();
        let ghz = Complex64::new(1.0, 0.0)
            + Complex64::from_polar(1.0, settings.sum()) * (k * l * m * n);
        let side_a = Complex64::from_polar(1.0, pa) * k + Complex64::from_polar(1.0, pap) * l;
        let side_b = Complex64::from_polar(1.0, pb) * m + Complex64::from_polar(1.0, pbp) * n;
        (ghz + side_a * side_b * 0.5) / (4.0 * 3.0_f64.sqrt())
    }

    /// Fourfold probability, as the GHZ term, the product of the two
    /// pair terms, and their interference:
    ///
    /// (1/16) [ ⅔ (1 + klmn cos Σφ)
    ///        + ⅓ (1 + kl cos(φ_a − φ_a′))(1 + mn cos(φ_b − φ_b′))
    ///        + ⅓ Re((1 + klmn e^{iΣφ}) · conj(AB)) ]
    ///
    /// with A, B the per-side sums from [`amplitude`]. The interference
    /// factor is conjugated so the expression equals |amplitude|² identically.
    pub fn probability(outcome: Outcome, settings: PhaseSettings) -> f64 {
        let [k, l, m, n] = outcome.signs().map(|s| s.value());
        let [pa, pap, pb, pbp] = settings.as_array();
        let klmn = k * l * m * n;
        let ghz = 1.0 + klmn * settings.sum().cos();
        let pair_a = 1.0 + k * l * (pa - pap).cos();
        let pair_b = 1.0 + m * n * (pb - pbp).cos();
        let side_a = Complex64::from_polar(1.0, pa) * k + Complex64::from_polar(1.0, pap) * l;
        let side_b = Complex64::from_polar(1.0, pb) * m + Complex64::from_polar(1.0, pbp) * n;
        let cross = (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, settings.sum()) * klmn)
            * (side_a * side_b).conj();
        (2.0 * ghz + pair_a * pair_b + cross.re) / 48.0
    }

    /// Four-party correlation
    /// E = ⅓ (2 cos Σφ + cos(φ_a − φ_a′) cos(φ_b − φ_b′)),
    /// evaluated as a single division so the perfect correlations at
    /// all-zero phases come out exactly ±1.
    pub fn correlation(settings: PhaseSettings) -> f64 {
        let [pa, pap, pb, pbp] = settings.as_array();
        (2.0 * settings.sum().cos() + (pa - pap).cos() * (pb - pbp).cos()) / 3.0
    }

    /// The same correlation expanded over per-beam sines and cosines:
    ///
    /// E = cccc + ssss − ⅓ (sscc + ccss)
    ///   − ⅔ (scsc + cscs + cssc + sccs),
    ///
    /// where each four-letter word takes s = sin or c = cos of
    /// (φ_a, φ_a′, φ_b, φ_b′) in that order.
    pub fn correlation_trig(settings: PhaseSettings) -> f64 {
        let [sa, sap, sb, sbp] = settings.as_array().map(f64::sin);
        let [ca, cap, cb, cbp] = settings.as_array().map(f64::cos);
        ca * cap * cb * cbp + sa * sap * sb * sbp
            - (sa * sap * cb * cbp + ca * cap * sb * sbp) / 3.0
            - 2.0 / 3.0
                * (sa * cap * sb * cbp
                    + ca * sap * cb * sbp
                    + ca * sap * sb * cbp
                    + sa * cap * cb * sbp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::{double_pair_pipeline, PolarizationPattern};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn zero_settings() -> PhaseSettings {
        PhaseSettings::new(0.0, 0.0, 0.0, 0.0)
    }

    fn random_settings(rng: &mut ChaCha8Rng) -> PhaseSettings {
        PhaseSettings::new(
            rng.gen_range(-2.0 * PI..2.0 * PI),
            rng.gen_range(-2.0 * PI..2.0 * PI),
            rng.gen_range(-2.0 * PI..2.0 * PI),
            rng.gen_range(-2.0 * PI..2.0 * PI),
        )
    }

    #[test]
    fn analyzer_kets_are_orthonormal() {
        for phi in [0.0, 0.7, -2.3] {
            let plus = analyzer_ket(Sign::Plus, phi);
            let minus = analyzer_ket(Sign::Minus, phi);
            let dot = plus[0].conj() * minus[0] + plus[1].conj() * minus[1];
            assert!(dot.norm() < 1e-15);
            let norm: f64 = plus.iter().map(|c| c.norm_sqr()).sum();
            assert!((norm - 1.0).abs() < 1e-15);
        }
        let plus0 = analyzer_ket(Sign::Plus, 0.0);
        assert!((plus0[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((plus0[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
        let minus0 = analyzer_ket(Sign::Minus, 0.0);
        assert!((minus0[1].re + FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn all_plus_amplitude_at_zero_phases() {
        let state = double_pair_pipeline().state;
        let all_plus = Outcome::new(Sign::Plus, Sign::Plus, Sign::Plus, Sign::Plus);
        let a = amplitude(&state, all_plus, zero_settings());
        assert!((a.re - (1.0 / 3.0_f64.sqrt())).abs() < 1e-12);
        assert!(a.im.abs() < 1e-12);
        assert!((state.probability(all_plus, zero_settings()) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn odd_sign_amplitudes_vanish_at_zero_phases() {
        let state = double_pair_pipeline().state;
        for outcome in Outcome::all() {
            if outcome.product() < 0.0 {
                assert!(amplitude(&state, outcome, zero_settings()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn product_state_amplitude_factorizes() {
        let hhhh = PostselectedState::basis(PolarizationPattern::from_label("HHHH").unwrap());
        for outcome in Outcome::all() {
            let a = amplitude(&hhhh, outcome, zero_settings());
            assert!((a.re - outcome.product() / 4.0).abs() < 1e-15);
            assert!(a.im.abs() < 1e-15);
        }
    }

    #[test]
    fn closed_form_amplitude_matches_contraction() {
        let state = double_pair_pipeline().state;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let settings = random_settings(&mut rng);
            for outcome in Outcome::all() {
                let direct = amplitude(&state, outcome, settings);
                let closed = closed_form::amplitude(outcome, settings);
                assert!((direct - closed).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_probability_matches_squared_amplitude() {
        let state = double_pair_pipeline().state;
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..300 {
            let settings = random_settings(&mut rng);
            for outcome in Outcome::all() {
                let direct = state.probability(outcome, settings);
                let closed = closed_form::probability(outcome, settings);
                assert!((direct - closed).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn probabilities_are_normalized_and_nonnegative() {
        let state = double_pair_pipeline().state;
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let settings = random_settings(&mut rng);
            let visibility = rng.gen_range(0.0..=1.0);
            let mixture = NoiseMixture::new(state.clone(), visibility).unwrap();
            let total: f64 = Outcome::all()
                .iter()
                .map(|&o| mixture.probability(o, settings))
                .sum();
            assert!((total - 1.0).abs() < 1e-12);
            for outcome in Outcome::all() {
                assert!(mixture.probability(outcome, settings) >= -1e-15);
            }
        }
    }

    #[test]
    fn zero_visibility_is_uniform() {
        let state = double_pair_pipeline().state;
        let mixture = NoiseMixture::new(state, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let settings = random_settings(&mut rng);
        for outcome in Outcome::all() {
            assert!((mixture.probability(outcome, settings) - 1.0 / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn visibility_outside_unit_interval_is_rejected() {
        let state = double_pair_pipeline().state;
        assert_eq!(
            NoiseMixture::new(state.clone(), -0.1).unwrap_err(),
            Error::VisibilityRange(-0.1)
        );
        assert_eq!(
            NoiseMixture::new(state.clone(), 1.5).unwrap_err(),
            Error::VisibilityRange(1.5)
        );
        assert!(NoiseMixture::new(state, f64::NAN).is_err());
    }

    #[test]
    fn perfect_correlations_at_special_settings() {
        let state = double_pair_pipeline().state;
        assert_eq!(closed_form::correlation(zero_settings()), 1.0);
        assert_eq!(
            closed_form::correlation(PhaseSettings::new(PI, 0.0, 0.0, 0.0)),
            -1.0
        );
        assert!(
            closed_form::correlation(PhaseSettings::new(PI / 2.0, 0.0, 0.0, 0.0)).abs() < 1e-15
        );
        assert!((state.correlation(zero_settings()) - 1.0).abs() < 1e-12);
        assert!((state.correlation(PhaseSettings::new(PI, 0.0, 0.0, 0.0)) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_routes_agree() {
        let state = double_pair_pipeline().state;
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..300 {
            let settings = random_settings(&mut rng);
            let from_sum = state.correlation(settings);
            let closed = closed_form::correlation(settings);
            let trig = closed_form::correlation_trig(settings);
            assert!((from_sum - closed).abs() < 1e-12);
            assert!((trig - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn trig_expansion_keeps_one_word_at_axis_settings() {
        assert_eq!(closed_form::correlation_trig(zero_settings()), 1.0);
        let settings = PhaseSettings::new(PI / 2.0, PI / 2.0, PI / 2.0, PI / 2.0);
        assert!((closed_form::correlation_trig(settings) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_correlation_scales_linearly_with_visibility() {
        let state = double_pair_pipeline().state;
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        for _ in 0..100 {
            let settings = random_settings(&mut rng);
            let v = rng.gen_range(0.0..=1.0);
            let mixture = NoiseMixture::new(state.clone(), v).unwrap();
            assert!((mixture.correlation(settings) - v * state.correlation(settings)).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_is_bounded_and_periodic() {
        let state = double_pair_pipeline().state;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let settings = random_settings(&mut rng);
            let e = state.correlation(settings);
            assert!(e.abs() <= 1.0 + 1e-12);
            let shifted = PhaseSettings::new(
                settings.phi_a + 2.0 * PI,
                settings.phi_a_prime,
                settings.phi_b,
                settings.phi_b_prime - 2.0 * PI,
            );
            assert!((state.correlation(shifted) - e).abs() < 1e-12);
        }
    }
}
