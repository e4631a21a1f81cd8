//! Multi-photon Fock-space evolution under a linear-optical scattering matrix.
//!
//! A photon entering mode `j` leaves in mode `k` with amplitude `S[k, j]`, so
//! the transition amplitude between occupation patterns is a permanent of a
//! submatrix of `S` with rows repeated by output occupation and columns by
//! input occupation. Linear optics conserves photon number, so states are kept
//! per photon-number sector and each sector evolves on its own.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::network::{unitarity_residual, ScatteringMatrix};
use crate::permanent::permanent;

pub type Occupation = Vec<u8>;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// All occupation tuples of `n_photons` over `n_modes`, in descending
/// lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccupationBasis {
    n_modes: usize,
    n_photons: usize,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

impl OccupationBasis {
    pub fn new(n_modes: usize, n_photons: usize) -> Self {
        assert!(n_modes >= 1, "a Fock basis needs at least one mode");
        let mut states = Vec::new();
        let mut current = vec![0u8; n_modes];
        fill(&mut current, 0, n_photons, &mut states);
        let index = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        Self {
            n_modes,
            n_photons,
            states,
            index,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_photons(&self) -> usize {
        self.n_photons
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn index_of(&self, occupation: &[u8]) -> Option<usize> {
        self.index.get(occupation).copied()
    }
}

fn fill(current: &mut Vec<u8>, mode: usize, remaining: usize, out: &mut Vec<Occupation>) {
    if mode + 1 == current.len() {
        current[mode] = remaining as u8;
        out.push(current.clone());
        return;
    }
    for n in (0..=remaining).rev() {
        current[mode] = n as u8;
        fill(current, mode + 1, remaining - n, out);
    }
    current[mode] = 0;
}

pub fn enumerate_basis(n_modes: usize, n_photons: usize) -> OccupationBasis {
    OccupationBasis::new(n_modes, n_photons)
}

fn factorial_product(occupation: &[u8]) -> f64 {
    occupation
        .iter()
        .map(|&n| (1..=n as u64).product::<u64>() as f64)
        .product()
}

fn repeated_modes(occupation: &[u8]) -> Vec<usize> {
    occupation
        .iter()
        .enumerate()
        .flat_map(|(mode, &n)| std::iter::repeat_n(mode, n as usize))
        .collect()
}

/// `<output| U(S) |input>` for two occupation patterns with equal photon number.
pub fn transition_amplitude(s: &DMatrix<Complex64>, output: &[u8], input: &[u8]) -> Complex64 {
    let rows = repeated_modes(output);
    let cols = repeated_modes(input);
    debug_assert_eq!(rows.len(), cols.len());
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| s[(rows[i], cols[j])]);
    permanent(&sub) / (factorial_product(output) * factorial_product(input)).sqrt()
}

/// The n-photon representation of a single-photon unitary.
#[derive(Debug, Clone)]
pub struct SectorUnitary {
    pub basis: OccupationBasis,
    pub matrix: DMatrix<Complex64>,
}

pub fn lift_unitary(s: &ScatteringMatrix, n_photons: usize) -> Result<SectorUnitary> {
    let residual = s.unitarity_residual();
    if residual > 1e-10 {
        return Err(Error::NonUnitary(residual));
    }
    let basis = OccupationBasis::new(s.dim(), n_photons);
    let n = basis.len();
    let columns: Vec<Vec<Complex64>> = basis
        .states()
        .par_iter()
        .map(|input| {
            basis
                .states()
                .iter()
                .map(|output| transition_amplitude(s.matrix(), output, input))
                .collect()
        })
        .collect();
    let matrix = DMatrix::from_fn(n, n, |i, j| columns[j][i]);
    Ok(SectorUnitary { basis, matrix })
}

#[derive(Debug, Clone)]
pub struct Sector {
    pub basis: OccupationBasis,
    pub amplitudes: Vec<Complex64>,
}

impl Sector {
    fn zeros(n_modes: usize, n_photons: usize) -> Self {
        let basis = OccupationBasis::new(n_modes, n_photons);
        let amplitudes = vec![ZERO; basis.len()];
        Self { basis, amplitudes }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Pure multi-mode Fock state stored per total photon number.
#[derive(Debug, Clone)]
pub struct SectoredState {
    n_modes: usize,
    sectors: BTreeMap<usize, Sector>,
}

impl SectoredState {
    /// The zero vector; also used as the conditional state of an impossible
    /// measurement outcome.
    pub fn empty(n_modes: usize) -> Self {
        Self {
            n_modes,
            sectors: BTreeMap::new(),
        }
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::from_terms(n_modes, [(vec![0u8; n_modes], Complex64::new(1.0, 0.0))])
            .expect("vacuum occupation has the right length")
    }

    /// State with the given occupation amplitudes; repeated occupations add.
    pub fn from_terms<I>(n_modes: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Occupation, Complex64)>,
    {
        let mut state = Self::empty(n_modes);
        for (occupation, amplitude) in terms {
            if occupation.len() != n_modes {
                return Err(Error::Dimension {
                    expected: n_modes,
                    found: occupation.len(),
                });
            }
            *state.entry(&occupation) += amplitude;
        }
        Ok(state)
    }

    fn entry(&mut self, occupation: &[u8]) -> &mut Complex64 {
        let photons: usize = occupation.iter().map(|&n| n as usize).sum();
        let n_modes = self.n_modes;
        let sector = self
            .sectors
            .entry(photons)
            .or_insert_with(|| Sector::zeros(n_modes, photons));
        let i = sector
            .basis
            .index_of(occupation)
            .expect("occupation belongs to its own sector");
        &mut sector.amplitudes[i]
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn sectors(&self) -> impl Iterator<Item = (usize, &Sector)> {
        self.sectors.iter().map(|(&n, s)| (n, s))
    }

    pub fn sector(&self, photons: usize) -> Option<&Sector> {
        self.sectors.get(&photons)
    }

    pub fn is_empty(&self) -> bool {
        self.sectors.is_empty()
    }

    pub fn amplitude(&self, occupation: &[u8]) -> Complex64 {
        let photons: usize = occupation.iter().map(|&n| n as usize).sum();
        self.sectors
            .get(&photons)
            .and_then(|s| s.basis.index_of(occupation).map(|i| s.amplitudes[i]))
            .unwrap_or(ZERO)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.sectors.values().map(Sector::norm_sqr).sum()
    }

    /// Non-zero terms in sector order, then basis order.
    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, Complex64)> {
        self.sectors.values().flat_map(|s| {
            s.basis
                .states()
                .iter()
                .zip(s.amplitudes.iter().copied())
                .filter(|(_, a)| *a != ZERO)
        })
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        for s in self.sectors.values_mut() {
            for a in &mut s.amplitudes {
                *a *= factor;
            }
        }
        self
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SectoredState) -> Complex64 {
        self.terms()
            .map(|(occ, a)| a.conj() * other.amplitude(occ))
            .sum()
    }
}

/// Apply `s` to every photon-number sector of `state`.
pub fn evolve(state: &SectoredState, s: &ScatteringMatrix) -> Result<SectoredState> {
    if s.dim() != state.n_modes {
        return Err(Error::Dimension {
            expected: state.n_modes,
            found: s.dim(),
        });
    }
    let mut out = SectoredState::empty(state.n_modes);
    for (&photons, sector) in &state.sectors {
        let inputs: Vec<(&Occupation, Complex64)> = sector
            .basis
            .states()
            .iter()
            .zip(sector.amplitudes.iter().copied())
            .filter(|(_, a)| *a != ZERO)
            .collect();
        let amplitudes: Vec<Complex64> = sector
            .basis
            .states()
            .par_iter()
            .map(|output| {
                inputs
                    .iter()
                    .map(|(input, a)| a * transition_amplitude(s.matrix(), output, input))
                    .sum()
            })
            .collect();
        out.sectors.insert(
            photons,
            Sector {
                basis: sector.basis.clone(),
                amplitudes,
            },
        );
    }
    Ok(out)
}

/// Photon-number requirements on a subset of modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementPattern {
    constraints: Vec<(usize, u8)>,
}

impl MeasurementPattern {
    pub fn new(n_modes: usize, constraints: Vec<(usize, u8)>) -> Result<Self> {
        let mut seen = vec![false; n_modes];
        for &(mode, _) in &constraints {
            if mode >= n_modes {
                return Err(Error::Pattern(format!(
                    "mode {mode} out of range for {n_modes} modes"
                )));
            }
            if std::mem::replace(&mut seen[mode], true) {
                return Err(Error::Pattern(format!("mode {mode} constrained twice")));
            }
        }
        Ok(Self { constraints })
    }

    pub fn constraints(&self) -> &[(usize, u8)] {
        &self.constraints
    }

    fn matches(&self, occupation: &[u8]) -> bool {
        self.constraints
            .iter()
            .all(|&(mode, n)| occupation[mode] == n)
    }

    fn is_constrained(&self, mode: usize) -> bool {
        self.constraints.iter().any(|&(m, _)| m == mode)
    }
}

#[derive(Debug, Clone)]
pub struct Projection {
    pub probability: f64,
    /// Normalized state of the unconstrained modes; empty when the outcome
    /// has zero probability.
    pub conditional: SectoredState,
    /// Unnormalized projected amplitudes over the unconstrained modes.
    pub unnormalized: SectoredState,
}

pub fn project(state: &SectoredState, pattern: &MeasurementPattern) -> Result<Projection> {
    if let Some(&(mode, _)) = pattern
        .constraints
        .iter()
        .find(|(m, _)| *m >= state.n_modes)
    {
        return Err(Error::Pattern(format!(
            "mode {mode} out of range for {} modes",
            state.n_modes
        )));
    }
    let free: Vec<usize> = (0..state.n_modes)
        .filter(|&m| !pattern.is_constrained(m))
        .collect();
    let terms = state
        .terms()
        .filter(|(occ, _)| pattern.matches(occ))
        .map(|(occ, a)| (free.iter().map(|&m| occ[m]).collect::<Occupation>(), a));
    let unnormalized = SectoredState::from_terms(free.len(), terms)?;
    let probability = unnormalized.norm_sqr();
    let conditional = if probability > 0.0 {
        unnormalized
            .clone()
            .scaled(Complex64::from(1.0 / probability.sqrt()))
    } else {
        SectoredState::empty(free.len())
    };
    Ok(Projection {
        probability,
        conditional,
        unnormalized,
    })
}

/// Single-mode input `α0|0> + α1|1> + α2|2>` of the sign gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlpsgInput {
    alpha: [Complex64; 3],
}

impl NlpsgInput {
    pub fn new(alpha: [Complex64; 3]) -> Result<Self> {
        let norm: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Normalization(norm));
        }
        Ok(Self { alpha })
    }

    /// Normalizes the amplitudes; also returns whether they needed it.
    pub fn normalized(alpha: [Complex64; 3]) -> Result<(Self, bool)> {
        let norm: f64 = alpha.iter().map(|a| a.norm_sqr()).sum();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Normalization(norm));
        }
        let changed = (norm - 1.0).abs() > 1e-12;
        let scale = 1.0 / norm.sqrt();
        Ok((
            Self {
                alpha: alpha.map(|a| a * scale),
            },
            changed,
        ))
    }

    pub fn alpha(&self) -> [Complex64; 3] {
        self.alpha
    }

    /// `|ψ>_1 ⊗ |1>_2 ⊗ |0>_3`.
    pub fn global_state(&self) -> SectoredState {
        let terms = (0..3u8).map(|n| (vec![n, 1, 0], self.alpha[n as usize]));
        SectoredState::from_terms(3, terms).expect("three-mode occupations")
    }

    /// Ancilla pattern heralding success: one photon in mode 2, none in mode 3.
    pub fn herald() -> MeasurementPattern {
        MeasurementPattern::new(3, vec![(1, 1), (2, 0)]).expect("static pattern")
    }
}

/// Heralded amplitudes of `|n>_1|1>_2|0>_3`, written in the entries of `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NlpsgAmplitudes {
    pub success: [Complex64; 3],
    /// Probability carried by the rejected branch, `1 - Σ|success|²`.
    pub failure_weight: f64,
}

impl NlpsgAmplitudes {
    pub fn success_probability(&self) -> f64 {
        self.success.iter().map(|a| a.norm_sqr()).sum()
    }
}

pub fn nlpsg_closed_form(s: &ScatteringMatrix, input: &NlpsgInput) -> Result<NlpsgAmplitudes> {
    if s.dim() != 3 {
        return Err(Error::Dimension {
            expected: 3,
            found: s.dim(),
        });
    }
    let e = |i: usize, j: usize| s.get(i - 1, j - 1);
    let [a0, a1, a2] = input.alpha;
    let pair = e(1, 1) * e(2, 2) + e(2, 1) * e(1, 2);
    let triple = e(1, 1) * (e(1, 1) * e(2, 2) + 2.0 * e(2, 1) * e(1, 2));
    let success = [a0 * e(2, 2), a1 * pair, a2 * triple];
    let weight: f64 = success.iter().map(|a| a.norm_sqr()).sum();
    Ok(NlpsgAmplitudes {
        success,
        failure_weight: 1.0 - weight,
    })
}

/// Evolve `input` with its ancilla photon through `s` and herald on the
/// ancilla pattern.
pub fn simulate_nlpsg(s: &ScatteringMatrix, input: &NlpsgInput) -> Result<Projection> {
    let out = evolve(&input.global_state(), s)?;
    project(&out, &NlpsgInput::herald())
}

/// `||S†S - I||` bound used before lifting.
pub fn is_unitary(s: &DMatrix<Complex64>, tol: f64) -> bool {
    unitarity_residual(s) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{closed_form_resonant, compose_scattering, NetworkParams};
    use crate::nlpsg::{T_MIDDLE, T_OUTER};
    use crate::ring::RingCoupler;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn optimal() -> ScatteringMatrix {
        closed_form_resonant(T_OUTER, T_MIDDLE, T_OUTER).unwrap()
    }

    fn splitter() -> ScatteringMatrix {
        let h = 1.0 / 2f64.sqrt();
        ScatteringMatrix::new(DMatrix::from_row_slice(
            2,
            2,
            &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)],
        ))
        .unwrap()
    }

    #[test]
    fn basis_sizes_and_order() {
        assert_eq!(enumerate_basis(3, 3).len(), 10);
        assert_eq!(enumerate_basis(8, 4).len(), 330);
        let b = enumerate_basis(2, 0);
        assert_eq!(b.states(), &[vec![0, 0]]);
        let b = enumerate_basis(3, 2);
        assert_eq!(b.states()[0], vec![2, 0, 0]);
        assert_eq!(b.states()[1], vec![1, 1, 0]);
        assert_eq!(b.states().last().unwrap(), &vec![0, 0, 2]);
        let mut sorted = b.states().to_vec();
        sorted.sort_by(|a, b| b.cmp(a));
        sorted.dedup();
        assert_eq!(sorted, b.states());
    }

    #[test]
    fn lift_examples() {
        let s = optimal();
        let one = lift_unitary(&s, 1).unwrap();
        assert!((&one.matrix - s.matrix()).iter().all(|z| z.norm() < 1e-15));

        let id = lift_unitary(&ScatteringMatrix::identity(4), 3).unwrap();
        let n = id.basis.len();
        assert!((id.matrix - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .all(|z| z.norm() < 1e-15));

        let mut bad = DMatrix::<Complex64>::identity(2, 2);
        bad[(0, 1)] = c(0.1, 0.0);
        assert!(matches!(
            lift_unitary(&ScatteringMatrix::new(bad).unwrap(), 2),
            Err(Error::NonUnitary(_))
        ));
    }

    #[test]
    fn hong_ou_mandel() {
        let input = SectoredState::from_terms(2, [(vec![1, 1], c(1.0, 0.0))]).unwrap();
        let out = evolve(&input, &splitter()).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!(out.amplitude(&[1, 1]).norm() < 1e-15);
        assert!((out.amplitude(&[2, 0]).norm() - h).abs() < 1e-15);
        assert!((out.amplitude(&[0, 2]).norm() - h).abs() < 1e-15);
    }

    #[test]
    fn single_photon_follows_columns() {
        let s = optimal();
        let input = SectoredState::from_terms(3, [(vec![1, 0, 0], c(1.0, 0.0))]).unwrap();
        let out = evolve(&input, &s).unwrap();
        for k in 0..3 {
            let mut occ = vec![0u8; 3];
            occ[k] = 1;
            assert!((out.amplitude(&occ) - s.get(k, 0)).norm() < 1e-15);
        }
        let vac = evolve(&SectoredState::vacuum(3), &s).unwrap();
        assert!((vac.amplitude(&[0, 0, 0]) - 1.0).norm() < 1e-15);
        assert!(matches!(
            evolve(&SectoredState::vacuum(2), &s),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn optimal_gate_flips_two_photon_sign() {
        let a = 1.0 / 3f64.sqrt();
        let input = NlpsgInput::new([c(a, 0.0), c(0.0, a), c(-a, 0.0)]).unwrap();
        let out = evolve(&input.global_state(), &optimal()).unwrap();
        let p = project(&out, &NlpsgInput::herald()).unwrap();
        assert!((p.probability - 0.25).abs() < 1e-12);
        let alpha = input.alpha();
        for n in 0..3u8 {
            let expected = if n == 2 { -alpha[2] } else { alpha[n as usize] } * 0.5;
            let got = p.unnormalized.amplitude(&[n]);
            assert!(
                (got - expected).norm() < 1e-12,
                "n = {n}: {got} vs {expected}"
            );
        }
    }

    #[test]
    fn projection_edge_cases() {
        let pat = MeasurementPattern::new(3, vec![(1, 1)]).unwrap();
        let p = project(&SectoredState::vacuum(3), &pat).unwrap();
        assert_eq!(p.probability, 0.0);
        assert!(p.conditional.is_empty());

        let state = NlpsgInput::new([c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)])
            .unwrap()
            .global_state();
        let all = MeasurementPattern::new(3, vec![]).unwrap();
        let p = project(&state, &all).unwrap();
        assert!((p.probability - 1.0).abs() < 1e-15);
        assert!((p.conditional.inner(&state) - 1.0).norm() < 1e-15);

        assert!(MeasurementPattern::new(3, vec![(1, 1), (1, 0)]).is_err());
        assert!(MeasurementPattern::new(3, vec![(3, 1)]).is_err());
    }

    #[test]
    fn closed_form_examples() {
        let s = optimal();
        let vac = NlpsgInput::new([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = nlpsg_closed_form(&s, &vac).unwrap();
        assert!((r.success[0] - 0.5).norm() < 1e-12);
        assert!((r.success_probability() - 0.25).abs() < 1e-12);

        let two = NlpsgInput::new([c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let r = nlpsg_closed_form(&s, &two).unwrap();
        assert!((r.success[2] + 0.5).norm() < 1e-12);
        assert!((r.failure_weight - 0.75).abs() < 1e-12);
    }

    #[test]
    fn vacuum_routing_probability_is_s22() {
        let rings = [
            RingCoupler::new(0.3, 0.8, 1.0, None).unwrap(),
            RingCoupler::new(-0.2, 0.5, 2.0, None).unwrap(),
            RingCoupler::new(0.6, 0.1, 0.4, None).unwrap(),
        ];
        let s = compose_scattering(&NetworkParams::new(rings, [0.1, 0.2, 0.3])).unwrap();
        let vac = NlpsgInput::new([c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        let r = nlpsg_closed_form(&s, &vac).unwrap();
        assert!((r.success_probability() - s.get(1, 1).norm_sqr()).abs() < 1e-15);
    }

    #[test]
    fn normalization_handling() {
        assert!(matches!(
            NlpsgInput::new([c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
            Err(Error::Normalization(_))
        ));
        let (input, changed) =
            NlpsgInput::normalized([c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!(changed);
        let norm: f64 = input.alpha().iter().map(|a| a.norm_sqr()).sum();
        assert!((norm - 1.0).abs() < 1e-15);
    }

    fn random_unitary_params() -> impl Strategy<Value = NetworkParams> {
        (
            proptest::array::uniform3(-0.95f64..0.95),
            proptest::array::uniform3(-0.95f64..0.95),
            proptest::array::uniform3(0.0f64..std::f64::consts::TAU),
            proptest::array::uniform3(-3.0f64..3.0),
        )
            .prop_map(|(tau, eta, theta, delta)| {
                let rings =
                    [0, 1, 2].map(|i| RingCoupler::new(tau[i], eta[i], theta[i], None).unwrap());
                NetworkParams::new(rings, delta)
            })
    }

    fn random_input() -> impl Strategy<Value = NlpsgInput> {
        proptest::collection::vec(-1.0f64..1.0, 6).prop_filter_map("nonzero", |v| {
            let alpha = [c(v[0], v[1]), c(v[2], v[3]), c(v[4], v[5])];
            NlpsgInput::normalized(alpha).ok().map(|(a, _)| a)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn closed_form_matches_permanent_evolution(p in random_unitary_params(), input in random_input()) {
            let s = compose_scattering(&p).unwrap();
            let oracle = nlpsg_closed_form(&s, &input).unwrap();
            let out = evolve(&input.global_state(), &s).unwrap();
            prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
            let proj = project(&out, &NlpsgInput::herald()).unwrap();
            for n in 0..3u8 {
                let diff = (proj.unnormalized.amplitude(&[n]) - oracle.success[n as usize]).norm();
                prop_assert!(diff < 1e-12);
            }
            prop_assert!((proj.probability + oracle.failure_weight - 1.0).abs() < 1e-12);
        }

        #[test]
        fn lifted_unitaries_stay_unitary(p in random_unitary_params(), n in 1usize..=4) {
            let s = compose_scattering(&p).unwrap();
            let lifted = lift_unitary(&s, n).unwrap();
            prop_assert!(unitarity_residual(&lifted.matrix) < 1e-10);
        }
    }
}
