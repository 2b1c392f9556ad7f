//! Search for analyzer settings maximizing the Σ|c| violation: a coarse
//! grid pass over all eight phases followed by simplex refinement.
//!
//! The objective is non-smooth where coefficients change sign, so the
//! refinement is derivative-free. Grid evaluation runs through
//! [`CorrelationKernel`], which collapses the state once and then costs a
//! few hundred floating point operations per grid point instead of a full
//! sixteen-outcome probability sum per tensor entry.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::Error;
use crate::lhv::{lhv_l1, quantum_tensor, SettingChoices};
use crate::measurement::CorrelationSource;
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeConfig {
    /// Grid resolution per phase; 8 puts every multiple of π/4 on the grid.
    pub grid_steps: usize,
    /// How many grid candidates to refine, and how many extra seeded
    /// random starts to refine on top of them.
    pub refine_starts: usize,
    /// Simplex iteration budget per start.
    pub max_iterations: usize,
    /// Stop a refinement once the simplex value spread falls below this.
    pub f_tolerance: f64,
    /// Initial simplex edge length, radians.
    pub simplex_step: f64,
    pub seed: u64,
}

impl Default for OptimizeConfig {
    fn default() -> OptimizeConfig {
        OptimizeConfig {
            grid_steps: 8,
            refine_starts: 4,
            max_iterations: 400,
            f_tolerance: 1e-12,
            simplex_step: 0.2,
            seed: 0,
        }
    }
}

impl OptimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_steps == 0 || self.grid_steps > 12 {
            return Err(Error::BadConfig(format!(
                "grid_steps must be between 1 and 12, got {}",
                self.grid_steps
            )));
        }
        if !self.simplex_step.is_finite() || self.simplex_step <= 0.0 {
            return Err(Error::BadConfig(format!(
                "simplex_step must be positive and finite, got {}",
                self.simplex_step
            )));
        }
        if !self.f_tolerance.is_finite() || self.f_tolerance < 0.0 {
            return Err(Error::BadConfig(format!(
                "f_tolerance must be non-negative and finite, got {}",
                self.f_tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeOutcome {
    pub settings: SettingChoices,
    pub l1: f64,
    pub critical_visibility: f64,
    pub iterations: usize,
}

/// The state collapsed to what the correlation actually depends on.
///
/// Writing the correlation as E(φ) = Σ_P W_P e^{iΣ_x σ_x φ_x}, with P
/// running over the sixteen patterns, σ_x = +1 where P has H and −1 where
/// it has V, only W_P = v · ψ_P · conj(ψ_{P̄}) survives the sum over
/// outcomes (P̄ the polarization complement). A basis coefficient is then
/// a product of per-beam 2×2 contractions of W.
#[derive(Clone, Debug)]
pub struct CorrelationKernel {
    w: [Complex64; 16],
}

impl CorrelationKernel {
    pub fn new<S: CorrelationSource>(source: &S) -> CorrelationKernel {
        let amplitudes = source.state().amplitudes();
        let visibility = source.visibility();
        let mut w = [Complex64::new(0.0, 0.0); 16];
        for (p, slot) in w.iter_mut().enumerate() {
            *slot = amplitudes[p] * amplitudes[p ^ 0xF].conj() * visibility;
        }
        CorrelationKernel { w }
    }

    /// Contraction matrix for one beam: entry [s][j] pairs the phase
    /// signature s (0 for σ=+1, 1 for σ=−1) with basis vector v^{j+1},
    /// g[s][j] = ½ (e^{iσφ⁰} v^j_0 + e^{iσφ¹} v^j_1).
    fn beam_matrix(phi0: f64, phi1: f64) -> [[Complex64; 2]; 2] {
        let e0 = Complex64::from_polar(0.5, phi0);
        let e1 = Complex64::from_polar(0.5, phi1);
        let row = [e0 + e1, e0 - e1];
        [row, [row[0].conj(), row[1].conj()]]
    }

    /// Σ|c| at the given flat phases (layout as [`SettingChoices::as_flat`]).
    pub fn l1(&self, flat: [f64; 8]) -> f64 {
        let ga = Self::beam_matrix(flat[0], flat[1]);
        let gap = Self::beam_matrix(flat[2], flat[3]);
        let gb = Self::beam_matrix(flat[4], flat[5]);
        let gbp = Self::beam_matrix(flat[6], flat[7]);
        let t1 = self.contract_a(&ga);
        l1_from_t1(&t1, &gap, &gb, &gbp)
    }

    /// Contract beam a (pattern bit 3): t1[j_a][p] over the remaining bits.
    fn contract_a(&self, ga: &[[Complex64; 2]; 2]) -> [[Complex64; 8]; 2] {
        let mut t1 = [[Complex64::new(0.0, 0.0); 8]; 2];
        for (ja, row) in t1.iter_mut().enumerate() {
            for (p, slot) in row.iter_mut().enumerate() {
                *slot = self.w[p] * ga[0][ja] + self.w[p | 8] * ga[1][ja];
            }
        }
        t1
    }
}

fn contract_a_prime(t1: &[[Complex64; 8]; 2], gap: &[[Complex64; 2]; 2]) -> [[Complex64; 4]; 4] {
    let mut t2 = [[Complex64::new(0.0, 0.0); 4]; 4];
    for ja in 0..2 {
        for jap in 0..2 {
            for p in 0..4 {
                t2[ja * 2 + jap][p] = t1[ja][p] * gap[0][jap] + t1[ja][p | 4] * gap[1][jap];
            }
        }
    }
    t2
}

fn contract_b(t2: &[[Complex64; 4]; 4], gb: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 8] {
    let mut t3 = [[Complex64::new(0.0, 0.0); 2]; 8];
    for pair in 0..4 {
        for jb in 0..2 {
            for p in 0..2 {
                t3[pair * 2 + jb][p] = t2[pair][p] * gb[0][jb] + t2[pair][p | 2] * gb[1][jb];
            }
        }
    }
    t3
}

fn l1_from_t3(t3: &[[Complex64; 2]; 8], gbp: &[[Complex64; 2]; 2]) -> f64 {
    let mut l1 = 0.0;
    for triple in t3 {
        for jbp in 0..2 {
            let c = triple[0] * gbp[0][jbp] + triple[1] * gbp[1][jbp];
            l1 += c.re.abs();
        }
    }
    l1
}

fn l1_from_t1(
    t1: &[[Complex64; 8]; 2],
    gap: &[[Complex64; 2]; 2],
    gb: &[[Complex64; 2]; 2],
    gbp: &[[Complex64; 2]; 2],
) -> f64 {
    let t2 = contract_a_prime(t1, gap);
    let t3 = contract_b(&t2, gb);
    l1_from_t3(&t3, gbp)
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    l1: f64,
    flat_index: usize,
}

fn push_candidate(best: &mut Vec<Candidate>, candidate: Candidate, keep: usize) {
    if best.len() == keep {
        match best.last() {
            Some(last) if candidate.l1 <= last.l1 => return,
            _ => {}
        }
    }
    let position = best.partition_point(|c| {
        c.l1 > candidate.l1 || (c.l1 == candidate.l1 && c.flat_index < candidate.flat_index)
    });
    best.insert(position, candidate);
    best.truncate(keep);
}

fn merge_candidates(parts: Vec<Vec<Candidate>>, keep: usize) -> Vec<Candidate> {
    let mut all: Vec<Candidate> = parts.into_iter().flatten().collect();
    all.sort_by(|a, b| {
        b.l1.total_cmp(&a.l1)
            .then_with(|| a.flat_index.cmp(&b.flat_index))
    });
    all.truncate(keep);
    all
}

fn decode_grid_point(flat_index: usize, steps: usize) -> [usize; 8] {
    let s2 = steps * steps;
    let pairs = [
        flat_index / (s2 * s2 * s2),
        flat_index / (s2 * s2) % s2,
        flat_index / s2 % s2,
        flat_index % s2,
    ];
    let mut point = [0usize; 8];
    for (x, pair) in pairs.iter().enumerate() {
        point[2 * x] = pair / steps;
        point[2 * x + 1] = pair % steps;
    }
    point
}

/// Evaluate Σ|c| at every joint grid point (each of the eight phases over
/// `steps` multiples of 2π/steps) and keep the `keep` best, reusing the
/// partial beam contractions shared by each nesting level.
fn grid_search(kernel: &CorrelationKernel, steps: usize, keep: usize) -> Result<Vec<[f64; 8]>> {
    if keep == 0 {
        return Ok(Vec::new());
    }
    let s2 = steps * steps;
    let grid_phase = |k: usize| TAU * k as f64 / steps as f64;
    let pair_matrices: Vec<[[Complex64; 2]; 2]> = (0..s2)
        .map(|pq| CorrelationKernel::beam_matrix(grid_phase(pq / steps), grid_phase(pq % steps)))
        .collect();

    let per_a: Vec<std::result::Result<Vec<Candidate>, Error>> = (0..s2)
        .into_par_iter()
        .map(|pa| {
            let mut best: Vec<Candidate> = Vec::with_capacity(keep + 1);
            let t1 = kernel.contract_a(&pair_matrices[pa]);
            for (pap, gap) in pair_matrices.iter().enumerate() {
                let t2 = contract_a_prime(&t1, gap);
                for (pb, gb) in pair_matrices.iter().enumerate() {
                    let t3 = contract_b(&t2, gb);
                    for (pbp, gbp) in pair_matrices.iter().enumerate() {
                        let l1 = l1_from_t3(&t3, gbp);
                        if !l1.is_finite() {
                            return Err(Error::NonFiniteObjective);
                        }
                        let flat_index = ((pa * s2 + pap) * s2 + pb) * s2 + pbp;
                        push_candidate(&mut best, Candidate { l1, flat_index }, keep);
                    }
                }
            }
            Ok(best)
        })
        .collect();

    let mut parts = Vec::with_capacity(s2);
    for part in per_a {
        parts.push(part?);
    }
    Ok(merge_candidates(parts, keep)
        .into_iter()
        .map(|c| decode_grid_point(c.flat_index, steps).map(grid_phase))
        .collect())
}

struct Refined {
    point: [f64; 8],
    iterations: usize,
}

/// Nelder-Mead on −Σ|c|: reflection 1, expansion 2, contraction ½,
/// shrink ½. The best vertex never regresses.
fn refine(
    kernel: &CorrelationKernel,
    start: [f64; 8],
    config: &OptimizeConfig,
) -> Result<Refined> {
    let objective = |x: &[f64; 8]| -> Result<f64> {
        let value = kernel.l1(*x);
        if value.is_finite() {
            Ok(-value)
        } else {
            Err(Error::NonFiniteObjective)
        }
    };

    let mut vertices: Vec<([f64; 8], f64)> = Vec::with_capacity(9);
    vertices.push((start, objective(&start)?));
    for i in 0..8 {
        let mut x = start;
        x[i] += config.simplex_step;
        vertices.push((x, objective(&x)?));
    }

    let mut iterations = 0;
    while iterations < config.max_iterations {
        vertices.sort_by(|a, b| a.1.total_cmp(&b.1));
        if vertices[8].1 - vertices[0].1 < config.f_tolerance {
            break;
        }
        iterations += 1;

        let mut centroid = [0.0_f64; 8];
        for (x, _) in &vertices[..8] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / 8.0;
            }
        }
        let worst = vertices[8];
        let shifted = |scale: f64| -> [f64; 8] {
            let mut x = centroid;
            for (xi, wi) in x.iter_mut().zip(worst.0) {
                *xi += scale * (*xi - wi);
            }
            x
        };

        let reflected = shifted(1.0);
        let f_reflected = objective(&reflected)?;
        if f_reflected < vertices[0].1 {
            let expanded = shifted(2.0);
            let f_expanded = objective(&expanded)?;
            vertices[8] = if f_expanded < f_reflected {
                (expanded, f_expanded)
            } else {
                (reflected, f_reflected)
            };
        } else if f_reflected < vertices[7].1 {
            vertices[8] = (reflected, f_reflected);
        } else {
            let contracted = if f_reflected < worst.1 {
                shifted(0.5)
            } else {
                shifted(-0.5)
            };
            let f_contracted = objective(&contracted)?;
            if f_contracted < f_reflected.min(worst.1) {
                vertices[8] = (contracted, f_contracted);
            } else {
                let best = vertices[0].0;
                for vertex in vertices.iter_mut().skip(1) {
                    for (xi, bi) in vertex.0.iter_mut().zip(best) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    vertex.1 = objective(&vertex.0)?;
                }
            }
        }
    }

    vertices.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(Refined {
        point: vertices[0].0,
        iterations,
    })
}

/// Maximizes Σ|c| of the quantum tensor over all eight phases. The
/// returned value is recomputed through [`quantum_tensor`] and never falls
/// below the value at `initial`; identical config and seed give identical
/// output.
pub fn optimize_settings<S: CorrelationSource>(
    source: &S,
    initial: SettingChoices,
    config: &OptimizeConfig,
) -> Result<OptimizeOutcome> {
    config.validate()?;
    let kernel = CorrelationKernel::new(source);

    let mut starts: Vec<[f64; 8]> = vec![initial.as_flat()];
    starts.extend(grid_search(&kernel, config.grid_steps, config.refine_starts)?);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for _ in 0..config.refine_starts {
        let mut point = [0.0_f64; 8];
        for phase in &mut point {
            *phase = rng.gen_range(0.0..TAU);
        }
        starts.push(point);
    }

    let mut iterations = 0;
    let mut candidates: Vec<[f64; 8]> = vec![initial.as_flat()];
    for start in starts {
        let refined = refine(&kernel, start, config)?;
        iterations += refined.iterations;
        candidates.push(refined.point);
    }

    let mut best: Option<(SettingChoices, f64)> = None;
    for point in candidates {
        let settings = SettingChoices::from_flat(point);
        let l1 = lhv_l1(&quantum_tensor(source, &settings));
        if !l1.is_finite() {
            return Err(Error::NonFiniteObjective);
        }
        if best.map_or(true, |(_, current)| l1 > current) {
            best = Some((settings, l1));
        }
    }
    let (settings, l1) = best.expect("the initial settings are always a candidate");

    Ok(OptimizeOutcome {
        settings,
        l1,
        critical_visibility: if l1 <= 1.0 { 1.0 } else { 1.0 / l1 },
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::NoiseMixture;
    use crate::state::{double_pair_pipeline, PolarizationPattern, PostselectedState};
    use std::f64::consts::SQRT_2;

    fn small_config() -> OptimizeConfig {
        OptimizeConfig {
            grid_steps: 4,
            refine_starts: 2,
            max_iterations: 80,
            seed: 7,
            ..OptimizeConfig::default()
        }
    }

    fn random_state(rng: &mut ChaCha8Rng) -> PostselectedState {
        PostselectedState::from_amplitudes(PolarizationPattern::all().map(|p| {
            (
                p,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        }))
        .unwrap()
    }

    #[test]
    fn kernel_agrees_with_the_tensor_expansion() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..40 {
            let state = random_state(&mut rng);
            let visibility = rng.gen_range(0.0..=1.0);
            let mixture = NoiseMixture::new(state, visibility).unwrap();
            let kernel = CorrelationKernel::new(&mixture);
            let mut flat = [0.0_f64; 8];
            for phase in &mut flat {
                *phase = rng.gen_range(-TAU..TAU);
            }
            let choices = SettingChoices::from_flat(flat);
            let reference = lhv_l1(&quantum_tensor(&mixture, &choices));
            assert!((kernel.l1(flat) - reference).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let no_grid = OptimizeConfig {
            grid_steps: 0,
            ..OptimizeConfig::default()
        };
        assert!(no_grid.validate().is_err());
        let huge_grid = OptimizeConfig {
            grid_steps: 64,
            ..OptimizeConfig::default()
        };
        assert!(huge_grid.validate().is_err());
        let bad_step = OptimizeConfig {
            simplex_step: -1.0,
            ..OptimizeConfig::default()
        };
        assert!(bad_step.validate().is_err());
        let bad_tolerance = OptimizeConfig {
            f_tolerance: f64::NAN,
            ..OptimizeConfig::default()
        };
        assert!(bad_tolerance.validate().is_err());
    }

    #[test]
    fn identical_seeds_give_identical_outcomes() {
        let state = double_pair_pipeline().state;
        let config = small_config();
        let first = optimize_settings(&state, SettingChoices::default(), &config).unwrap();
        let second = optimize_settings(&state, SettingChoices::default(), &config).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn never_worse_than_the_initial_settings() {
        let state = double_pair_pipeline().state;
        let initial = SettingChoices::standard_violation();
        let initial_value = lhv_l1(&quantum_tensor(&state, &initial));
        let outcome = optimize_settings(&state, initial, &small_config()).unwrap();
        assert!(outcome.l1 >= initial_value);
        assert!(outcome.l1 >= 8.0 / (3.0 * SQRT_2) - 1e-12);
    }

    #[test]
    fn pure_noise_has_nothing_to_optimize() {
        let mixture = NoiseMixture::new(double_pair_pipeline().state, 0.0).unwrap();
        let config = OptimizeConfig {
            grid_steps: 2,
            refine_starts: 1,
            max_iterations: 20,
            ..OptimizeConfig::default()
        };
        let outcome = optimize_settings(&mixture, SettingChoices::default(), &config).unwrap();
        assert!(outcome.l1 < 1e-12);
        assert_eq!(outcome.critical_visibility, 1.0);
    }

    #[test]
    fn product_state_never_violates() {
        let state = PostselectedState::basis(PolarizationPattern::from_label("HHHH").unwrap());
        let outcome = optimize_settings(&state, SettingChoices::default(), &small_config()).unwrap();
        assert!(outcome.l1 <= 1.0 + 1e-9);
    }

    #[test]
    fn non_finite_initial_phases_are_rejected() {
        let state = double_pair_pipeline().state;
        let initial = SettingChoices::from_flat([f64::NAN; 8]);
        assert_eq!(
            optimize_settings(&state, initial, &small_config()).unwrap_err(),
            Error::NonFiniteObjective
        );
    }
}
