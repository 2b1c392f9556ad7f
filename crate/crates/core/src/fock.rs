//! Sparse algebra of bosonic creation operators for a four-beam,
//! two-polarization interferometer.
//!
//! A [`Monomial`] records the power of each creation operator a†ₓσ for beam
//! x ∈ {a, a′, b, b′} and polarization σ ∈ {H, V}; a [`CreationPolynomial`]
//! is a complex-weighted sum of monomials applied to the vacuum. The
//! functions here build the down-conversion pair terms, push the unprimed
//! beams through 50:50 splitters, keep the fourfold-coincidence part, and
//! relabel polarizations.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::ops::{Add, Mul};

use num_complex::Complex64;

use crate::error::Error;
use crate::Result;

/// Coefficients with modulus below this are dropped after every arithmetic
/// pass, so exact cancellations do not leave dust terms behind.
pub const PRUNE_TOLERANCE: f64 = 1e-15;

/// Largest pair-term order [`pdc_term`] accepts; [`pdc_term_bounded`] lets a
/// caller raise it at their own memory risk.
pub const DEFAULT_MAX_PAIR_ORDER: u32 = 6;

/// One of the four spatial beams. Unprimed beams feed the splitters; primed
/// beams are the splitter outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Beam {
    A,
    APrime,
    B,
    BPrime,
}

impl Beam {
    pub const ALL: [Beam; 4] = [Beam::A, Beam::APrime, Beam::B, Beam::BPrime];

    pub fn label(self) -> &'static str {
        match self {
            Beam::A => "a",
            Beam::APrime => "a'",
            Beam::B => "b",
            Beam::BPrime => "b'",
        }
    }

    pub fn is_primed(self) -> bool {
        matches!(self, Beam::APrime | Beam::BPrime)
    }

    /// The beam sharing a splitter with this one (a ↔ a′, b ↔ b′).
    pub fn splitter_partner(self) -> Beam {
        match self {
            Beam::A => Beam::APrime,
            Beam::APrime => Beam::A,
            Beam::B => Beam::BPrime,
            Beam::BPrime => Beam::B,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::H, Polarization::V];

    pub fn label(self) -> char {
        match self {
            Polarization::H => 'H',
            Polarization::V => 'V',
        }
    }

    pub fn flipped(self) -> Polarization {
        match self {
            Polarization::H => Polarization::V,
            Polarization::V => Polarization::H,
        }
    }
}

/// A single optical mode: one beam at one polarization.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mode {
    pub beam: Beam,
    pub polarization: Polarization,
}

impl Mode {
    pub const COUNT: usize = 8;

    pub fn new(beam: Beam, polarization: Polarization) -> Mode {
        Mode { beam, polarization }
    }

    /// Dense index, beam-major with H before V.
    pub fn index(self) -> usize {
        self.beam as usize * 2 + self.polarization as usize
    }

    pub fn from_index(index: usize) -> Mode {
        assert!(index < Mode::COUNT, "mode index {index} out of range");
        Mode {
            beam: Beam::ALL[index / 2],
            polarization: Polarization::ALL[index % 2],
        }
    }

    pub fn all() -> [Mode; 8] {
        let mut modes = [Mode::new(Beam::A, Polarization::H); 8];
        for (i, slot) in modes.iter_mut().enumerate() {
            *slot = Mode::from_index(i);
        }
        modes
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.beam.label(), self.polarization.label())
    }
}

/// A product of creation operators, stored as the power of each mode.
///
/// The derived ordering is beam-major with H before V, which fixes a
/// canonical term order for display and iteration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    powers: [u8; 8],
}

impl Monomial {
    /// The empty product (no operators applied).
    pub const IDENTITY: Monomial = Monomial { powers: [0; 8] };

    pub fn single(mode: Mode) -> Monomial {
        let mut powers = [0u8; 8];
        powers[mode.index()] = 1;
        Monomial { powers }
    }

    pub fn from_powers(powers: [u8; 8]) -> Monomial {
        Monomial { powers }
    }

    pub fn power(&self, mode: Mode) -> u32 {
        u32::from(self.powers[mode.index()])
    }

    /// Modes with nonzero power, in canonical order.
    pub fn powers(&self) -> impl Iterator<Item = (Mode, u32)> + '_ {
        self.powers
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(i, &p)| (Mode::from_index(i), u32::from(p)))
    }

    pub fn total_photons(&self) -> u32 {
        self.powers.iter().map(|&p| u32::from(p)).sum()
    }

    pub fn beam_photons(&self, beam: Beam) -> u32 {
        u32::from(self.powers[beam as usize * 2]) + u32::from(self.powers[beam as usize * 2 + 1])
    }

    /// True when every beam holds exactly one photon.
    pub fn is_fourfold_coincidence(&self) -> bool {
        Beam::ALL.iter().all(|&x| self.beam_photons(x) == 1)
    }

    pub fn touches_primed(&self) -> bool {
        Beam::ALL
            .iter()
            .any(|&x| x.is_primed() && self.beam_photons(x) > 0)
    }

    pub fn product(&self, other: &Monomial) -> Monomial {
        let mut powers = [0u8; 8];
        for i in 0..8 {
            powers[i] = self.powers[i]
                .checked_add(other.powers[i])
                .expect("mode occupation exceeds u8");
        }
        Monomial { powers }
    }

    /// ∏ₘ nₘ! over the mode occupations, as a float.
    ///
    /// This is the squared norm of the Fock vector the monomial creates from
    /// the vacuum, since ⟨0|aⁿ a†ⁿ|0⟩ = n!.
    pub fn factorial_weight(&self) -> f64 {
        self.powers
            .iter()
            .map(|&p| (1..=u64::from(p)).product::<u64>() as f64)
            .product()
    }

    fn with_swapped_polarization(&self, beam: Beam) -> Monomial {
        let mut powers = self.powers;
        powers.swap(beam as usize * 2, beam as usize * 2 + 1);
        Monomial { powers }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Monomial::IDENTITY {
            return write!(f, "1");
        }
        let mut first = true;
        for (mode, power) in self.powers() {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            if power == 1 {
                write!(f, "{mode}")?;
            } else {
                write!(f, "{mode}^{power}")?;
            }
        }
        Ok(())
    }
}

/// A complex-weighted sum of creation-operator monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CreationPolynomial {
    terms: BTreeMap<Monomial, Complex64>,
}

impl CreationPolynomial {
    pub fn zero() -> CreationPolynomial {
        CreationPolynomial::default()
    }

    /// The constant polynomial 1 (the bare vacuum).
    pub fn identity() -> CreationPolynomial {
        CreationPolynomial::from_term(Monomial::IDENTITY, Complex64::new(1.0, 0.0))
    }

    pub fn from_term(monomial: Monomial, coefficient: Complex64) -> CreationPolynomial {
        CreationPolynomial::from_terms([(monomial, coefficient)])
    }

    pub fn from_terms(
        terms: impl IntoIterator<Item = (Monomial, Complex64)>,
    ) -> CreationPolynomial {
        let mut poly = CreationPolynomial::zero();
        for (monomial, coefficient) in terms {
            poly.accumulate(monomial, coefficient);
        }
        poly.pruned()
    }

    pub fn coefficient(&self, monomial: &Monomial) -> Complex64 {
        self.terms
            .get(monomial)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    /// Terms in canonical monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn scaled(&self, factor: Complex64) -> CreationPolynomial {
        CreationPolynomial {
            terms: self.terms.iter().map(|(m, c)| (*m, c * factor)).collect(),
        }
        .pruned()
    }

    pub fn pow(&self, exponent: u32) -> CreationPolynomial {
        let mut result = CreationPolynomial::identity();
        for _ in 0..exponent {
            result = &result * self;
        }
        result
    }

    /// Squared norm of the Fock vector this polynomial creates from the
    /// vacuum: Σ |c|² ∏ₘ nₘ!.
    pub fn occupation_norm_sqr(&self) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.norm_sqr() * m.factorial_weight())
            .sum()
    }

    fn accumulate(&mut self, monomial: Monomial, coefficient: Complex64) {
        let entry = self
            .terms
            .entry(monomial)
            .or_insert_with(|| Complex64::new(0.0, 0.0));
        *entry += coefficient;
    }

    fn pruned(mut self) -> CreationPolynomial {
        self.terms.retain(|_, c| c.norm() > PRUNE_TOLERANCE);
        self
    }
}

impl Add for &CreationPolynomial {
    type Output = CreationPolynomial;

    fn add(self, rhs: &CreationPolynomial) -> CreationPolynomial {
        let mut out = self.clone();
        for (&m, &c) in rhs.terms() {
            out.accumulate(m, c);
        }
        out.pruned()
    }
}

impl Mul for &CreationPolynomial {
    type Output = CreationPolynomial;

    fn mul(self, rhs: &CreationPolynomial) -> CreationPolynomial {
        let mut out = CreationPolynomial::zero();
        for (ma, ca) in self.terms() {
            for (mb, cb) in rhs.terms() {
                out.accumulate(ma.product(mb), ca * cb);
            }
        }
        out.pruned()
    }
}

impl fmt::Display for CreationPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i) {m}", c.re, c.im)?;
        }
        Ok(())
    }
}

/// The pump amplitude α entering the down-conversion interaction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PumpAmplitude(pub Complex64);

impl PumpAmplitude {
    pub fn new(re: f64, im: f64) -> PumpAmplitude {
        PumpAmplitude(Complex64::new(re, im))
    }

    /// The α for which the second-order prefactor (−iα)²/2! is exactly 1,
    /// namely α = i√2. Convenient for reading off double-pair coefficients.
    pub fn unit_double_pair() -> PumpAmplitude {
        PumpAmplitude(Complex64::new(0.0, std::f64::consts::SQRT_2))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }
}

/// The n-pair emission term (−iα)ⁿ/n! (a†_V b†_H + a†_H b†_V)ⁿ.
///
/// Orders above [`DEFAULT_MAX_PAIR_ORDER`] are rejected; use
/// [`pdc_term_bounded`] to raise the cap.
pub fn pdc_term(order: u32, alpha: PumpAmplitude) -> Result<CreationPolynomial> {
    pdc_term_bounded(order, alpha, DEFAULT_MAX_PAIR_ORDER)
}

/// [`pdc_term`] with a caller-chosen order cap.
pub fn pdc_term_bounded(
    order: u32,
    alpha: PumpAmplitude,
    max_order: u32,
) -> Result<CreationPolynomial> {
    if order > max_order {
        return Err(Error::PairOrderTooLarge {
            order,
            max: max_order,
        });
    }
    let pair = CreationPolynomial::from_terms([
        (
            Monomial::single(Mode::new(Beam::A, Polarization::V))
                .product(&Monomial::single(Mode::new(Beam::B, Polarization::H))),
            Complex64::new(1.0, 0.0),
        ),
        (
            Monomial::single(Mode::new(Beam::A, Polarization::H))
                .product(&Monomial::single(Mode::new(Beam::B, Polarization::V))),
            Complex64::new(1.0, 0.0),
        ),
    ]);
    let factorial: f64 = (1..=u64::from(order)).product::<u64>() as f64;
    let prefactor = (Complex64::new(0.0, -1.0) * alpha.value()).powu(order) / factorial;
    Ok(pair.pow(order).scaled(prefactor))
}

/// Sends every unprimed operator through its 50:50 splitter,
/// a†ₓσ → (a†ₓσ + a†ₓ′σ)/√2 for x ∈ {a, b}.
///
/// Rejects input that already contains primed modes, since that would split
/// the beams twice.
pub fn beam_split(poly: &CreationPolynomial) -> Result<CreationPolynomial> {
    if poly.terms().any(|(m, _)| m.touches_primed()) {
        return Err(Error::AlreadySplit);
    }
    let mut out = CreationPolynomial::zero();
    for (monomial, &coefficient) in poly.terms() {
        let mut term = CreationPolynomial::from_term(Monomial::IDENTITY, coefficient);
        for (mode, power) in monomial.powers() {
            let through = CreationPolynomial::from_terms([
                (Monomial::single(mode), Complex64::new(FRAC_1_SQRT_2, 0.0)),
                (
                    Monomial::single(Mode::new(mode.beam.splitter_partner(), mode.polarization)),
                    Complex64::new(FRAC_1_SQRT_2, 0.0),
                ),
            ]);
            term = &term * &through.pow(power);
        }
        out = &out + &term;
    }
    Ok(out)
}

/// Keeps only the monomials that put exactly one photon in each beam.
pub fn postselect_coincidence(poly: &CreationPolynomial) -> CreationPolynomial {
    CreationPolynomial::from_terms(
        poly.terms()
            .filter(|(m, _)| m.is_fourfold_coincidence())
            .map(|(m, c)| (*m, *c)),
    )
}

/// Relabels H ↔ V on the given beams (a half-wave plate at 45° in each
/// listed beam). Listing a beam twice is the same as listing it once.
pub fn rotate_polarization(poly: &CreationPolynomial, beams: &[Beam]) -> CreationPolynomial {
    let unique: BTreeSet<Beam> = beams.iter().copied().collect();
    CreationPolynomial::from_terms(poly.terms().map(|(m, c)| {
        let mut swapped = *m;
        for &beam in &unique {
            swapped = swapped.with_swapped_polarization(beam);
        }
        (swapped, *c)
    }))
}
