//! Heralded dual-rail CNOT built from two sign gates.
//!
//! Eight modes: control rails 0/1, target rails 2/3, and one ancilla pair per
//! sign gate (4/5 and 6/7). The target rails are mixed on a 50/50 splitter,
//! the one-rails of control and target interfere on a second splitter with a
//! sign gate on each output, and both splitters are undone. Success is
//! heralded by one photon in modes 4 and 6 and none in 5 and 7.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{evolve, project, MeasurementPattern, Occupation, SectoredState};
use crate::network::{scattering_matrix, NetworkParams, ScatteringMatrix};
use crate::nlpsg::verdict;

pub const N_MODES: usize = 8;
pub const NLPSG_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualRailQubit {
    pub zero: usize,
    pub one: usize,
}

impl DualRailQubit {
    pub fn new(zero: usize, one: usize, n_modes: usize) -> Result<Self> {
        if zero == one || zero >= n_modes || one >= n_modes {
            return Err(Error::ModeMap(format!(
                "rails ({zero}, {one}) must be distinct modes below {n_modes}"
            )));
        }
        Ok(Self { zero, one })
    }

    pub fn rail(&self, bit: u8) -> usize {
        if bit == 0 {
            self.zero
        } else {
            self.one
        }
    }

    /// Logical value carried by an occupation, if exactly one photon sits on
    /// the rails.
    pub fn decode(&self, occupation: &[u8]) -> Option<u8> {
        match (occupation[self.zero], occupation[self.one]) {
            (1, 0) => Some(0),
            (0, 1) => Some(1),
            _ => None,
        }
    }
}

/// Place `s` on the modes listed in `mode_map` of an `n_total`-mode identity.
pub fn embed(s: &ScatteringMatrix, mode_map: &[usize], n_total: usize) -> Result<ScatteringMatrix> {
    if mode_map.len() != s.dim() {
        return Err(Error::Dimension {
            expected: s.dim(),
            found: mode_map.len(),
        });
    }
    let mut seen = vec![false; n_total];
    for &m in mode_map {
        if m >= n_total {
            return Err(Error::ModeMap(format!(
                "mode {m} out of range for {n_total} modes"
            )));
        }
        if std::mem::replace(&mut seen[m], true) {
            return Err(Error::ModeMap(format!("mode {m} mapped twice")));
        }
    }
    let mut g = DMatrix::<Complex64>::identity(n_total, n_total);
    for (i, &gi) in mode_map.iter().enumerate() {
        for (j, &gj) in mode_map.iter().enumerate() {
            g[(gi, gj)] = s.get(i, j);
        }
    }
    ScatteringMatrix::new(g)
}

fn splitter() -> ScatteringMatrix {
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    ScatteringMatrix::new(DMatrix::from_row_slice(2, 2, &[h, h, h, -h]))
        .expect("2x2 matrix is square")
}

/// Ancilla modes of one sign gate: the photon is injected into `photon` and
/// `vacuum` starts empty; success needs the same pattern at the output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AncillaPair {
    pub photon: usize,
    pub vacuum: usize,
}

#[derive(Debug, Clone)]
pub struct CnotNetwork {
    pub matrix: ScatteringMatrix,
    pub control: DualRailQubit,
    pub target: DualRailQubit,
    pub ancillas: [AncillaPair; 2],
    pub gates: [ScatteringMatrix; 2],
}

impl CnotNetwork {
    /// Wire two sign-gate scattering matrices into the CNOT without checking
    /// that they satisfy the gate constraints.
    pub fn assemble(gate1: ScatteringMatrix, gate2: ScatteringMatrix) -> Result<Self> {
        let control = DualRailQubit::new(0, 1, N_MODES)?;
        let target = DualRailQubit::new(2, 3, N_MODES)?;
        let ancillas = [
            AncillaPair {
                photon: 4,
                vacuum: 5,
            },
            AncillaPair {
                photon: 6,
                vacuum: 7,
            },
        ];
        let bs = splitter();
        let hadamard = embed(&bs, &[target.zero, target.one], N_MODES)?;
        let mixer = embed(&bs, &[control.one, target.one], N_MODES)?;
        let n1 = embed(
            &gate1,
            &[control.one, ancillas[0].photon, ancillas[0].vacuum],
            N_MODES,
        )?;
        let n2 = embed(
            &gate2,
            &[target.one, ancillas[1].photon, ancillas[1].vacuum],
            N_MODES,
        )?;
        let matrix = hadamard
            .then_after(&mixer)
            .then_after(&n2.then_after(&n1))
            .then_after(&mixer)
            .then_after(&hadamard);
        let residual = matrix.unitarity_residual();
        if residual > 1e-10 {
            return Err(Error::NonUnitary(residual));
        }
        Ok(Self {
            matrix,
            control,
            target,
            ancillas,
            gates: [gate1, gate2],
        })
    }

    fn input_occupation(&self, c: u8, t: u8) -> Occupation {
        let mut occ = vec![0u8; N_MODES];
        occ[self.control.rail(c)] = 1;
        occ[self.target.rail(t)] = 1;
        for a in &self.ancillas {
            occ[a.photon] = 1;
        }
        occ
    }

    fn herald(&self) -> MeasurementPattern {
        let constraints = self
            .ancillas
            .iter()
            .flat_map(|a| [(a.photon, 1), (a.vacuum, 0)])
            .collect();
        MeasurementPattern::new(N_MODES, constraints).expect("ancilla modes are distinct")
    }

    /// Heralded, unnormalized state of the four logical modes for a
    /// superposition of computational inputs `Σ c_ij |i>|j>`.
    pub fn heralded(&self, input: &[((u8, u8), Complex64)]) -> Result<(f64, SectoredState)> {
        let terms = input
            .iter()
            .map(|&((c, t), a)| (self.input_occupation(c, t), a));
        let state = SectoredState::from_terms(N_MODES, terms)?;
        let p = project(&evolve(&state, &self.matrix)?, &self.herald())?;
        Ok((p.probability, p.unnormalized))
    }

    /// Logical output (control, target) of a four-mode occupation.
    fn logical(&self, occ: &[u8]) -> Option<(u8, u8)> {
        // the heralded state lives on modes 0..4, which are the logical rails
        Some((self.control.decode(occ)?, self.target.decode(occ)?))
    }

    fn computational(&self, c: u8, t: u8) -> Occupation {
        let mut occ = vec![0u8; 4];
        occ[self.control.rail(c)] = 1;
        occ[self.target.rail(t)] = 1;
        occ
    }
}

/// Build the CNOT, rejecting sign gates that miss their constraints.
pub fn build_cnot(nlpsg1: &NetworkParams, nlpsg2: &NetworkParams) -> Result<CnotNetwork> {
    let mut gates = Vec::with_capacity(2);
    for (i, p) in [nlpsg1, nlpsg2].into_iter().enumerate() {
        let s = scattering_matrix(p)?;
        let v = verdict(&s)?;
        if !v.satisfied(NLPSG_TOLERANCE) {
            return Err(Error::InvalidNlpsg {
                gate: i + 1,
                verdict: Box::new(v),
            });
        }
        gates.push(s);
    }
    let gate2 = gates.pop().expect("two gates");
    let gate1 = gates.pop().expect("two gates");
    CnotNetwork::assemble(gate1, gate2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthTableRow {
    pub control: u8,
    pub target: u8,
    pub probability: f64,
    /// Most likely logical output after heralding.
    pub output: (u8, u8),
    /// Probability of `output` within the heralded state.
    pub fidelity: f64,
    /// Norm of the normalized heralded state outside the logical subspace.
    pub leakage: f64,
}

pub fn verify_truth_table(net: &CnotNetwork) -> Result<Vec<TruthTableRow>> {
    let inputs = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)];
    inputs
        .par_iter()
        .map(|&(c, t)| {
            let (probability, state) = net.heralded(&[((c, t), Complex64::new(1.0, 0.0))])?;
            let mut best = ((0, 0), -1.0);
            let mut inside = 0.0;
            for (occ, a) in state.terms() {
                if let Some(logical) = net.logical(occ) {
                    let w = a.norm_sqr() / probability;
                    inside += w;
                    if w > best.1 {
                        best = (logical, w);
                    }
                }
            }
            Ok(TruthTableRow {
                control: c,
                target: t,
                probability,
                output: best.0,
                fidelity: best.1.max(0.0),
                leakage: (1.0 - inside).max(0.0).sqrt(),
            })
        })
        .collect()
}

/// Heralded amplitudes between computational states, rows and columns
/// ordered `|00>, |01>, |10>, |11>` (control, target).
pub fn conditional_matrix(net: &CnotNetwork) -> Result<DMatrix<Complex64>> {
    let basis = [(0u8, 0u8), (0, 1), (1, 0), (1, 1)];
    let columns: Vec<Result<Vec<Complex64>>> = basis
        .par_iter()
        .map(|&input| {
            let (_, state) = net.heralded(&[(input, Complex64::new(1.0, 0.0))])?;
            Ok(basis
                .iter()
                .map(|&(c, t)| state.amplitude(&net.computational(c, t)))
                .collect())
        })
        .collect();
    let mut m = DMatrix::zeros(4, 4);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, a) in col?.into_iter().enumerate() {
            m[(i, j)] = a;
        }
    }
    Ok(m)
}

/// Singular values of `m / |m[0,0]|`, descending.
pub fn normalized_singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let scale = m[(0, 0)].norm();
    let mut sv: Vec<f64> = SVD::new(m.map(|z| z / scale), false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// `m` divided by its largest-magnitude entry.
pub fn phase_normalized(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let pivot = m
        .iter()
        .copied()
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .unwrap_or(Complex64::new(1.0, 0.0));
    m.map(|z| z / pivot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub probability: f64,
    /// `|<Φ+|ψ>|²` for the heralded state of `(|0>+|1>)|0>/√2`.
    pub bell_overlap: f64,
    /// Norm of the normalized heralded superposition outside the logical
    /// subspace.
    pub leakage: f64,
    /// `|<00|ψ>|²` for the heralded state of `|0>|0>`.
    pub product_overlap: f64,
}

pub fn verify_coherence(net: &CnotNetwork) -> Result<CoherenceReport> {
    let h = Complex64::from(std::f64::consts::FRAC_1_SQRT_2);
    let (probability, state) = net.heralded(&[((0, 0), h), ((1, 0), h)])?;
    let bell = SectoredState::from_terms(
        4,
        [(net.computational(0, 0), h), (net.computational(1, 1), h)],
    )?;
    let bell_overlap = bell.inner(&state).norm_sqr() / probability;
    let inside: f64 = state
        .terms()
        .filter(|(occ, _)| net.logical(occ).is_some())
        .map(|(_, a)| a.norm_sqr())
        .sum();
    let leakage = (1.0 - inside / probability).max(0.0).sqrt();

    let (p0, product) = net.heralded(&[((0, 0), Complex64::new(1.0, 0.0))])?;
    let product_overlap = product.amplitude(&net.computational(0, 0)).norm_sqr() / p0;
    Ok(CoherenceReport {
        probability,
        bell_overlap,
        leakage,
        product_overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::closed_form_resonant;
    use crate::nlpsg::{T_MIDDLE, T_OUTER};
    use approx::assert_abs_diff_eq;

    fn optimal_params(taus: [f64; 3]) -> NetworkParams {
        NetworkParams::resonant([T_OUTER, T_MIDDLE, T_OUTER], taus).unwrap()
    }

    fn optimal() -> CnotNetwork {
        build_cnot(&optimal_params([0.0; 3]), &optimal_params([0.0; 3])).unwrap()
    }

    #[test]
    fn embed_examples() {
        let id = embed(&ScatteringMatrix::identity(3), &[5, 0, 2], 8).unwrap();
        assert_eq!(id, ScatteringMatrix::identity(8));

        let s = closed_form_resonant(T_OUTER, T_MIDDLE, T_OUTER).unwrap();
        assert_eq!(embed(&s, &[0, 1, 2], 3).unwrap(), s);

        let a = embed(&s, &[0, 3, 5], 8).unwrap();
        let b = embed(&splitter(), &[1, 7], 8).unwrap();
        assert!(a.then_after(&b).max_abs_diff(&b.then_after(&a)) < 1e-15);

        assert!(matches!(embed(&s, &[0, 0, 1], 8), Err(Error::ModeMap(_))));
        assert!(matches!(embed(&s, &[0, 1, 8], 8), Err(Error::ModeMap(_))));
        assert!(matches!(
            embed(&s, &[0, 1], 8),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn dual_rail_validation() {
        assert!(DualRailQubit::new(1, 1, 4).is_err());
        assert!(DualRailQubit::new(0, 4, 4).is_err());
        let q = DualRailQubit::new(2, 3, 4).unwrap();
        assert_eq!(q.decode(&[0, 0, 1, 0]), Some(0));
        assert_eq!(q.decode(&[0, 0, 0, 1]), Some(1));
        assert_eq!(q.decode(&[0, 0, 1, 1]), None);
    }

    #[test]
    fn truth_table_of_the_optimal_gate() {
        let net = optimal();
        assert!(net.matrix.unitarity_residual() < 1e-10);
        for row in verify_truth_table(&net).unwrap() {
            assert_abs_diff_eq!(row.probability, 1.0 / 16.0, epsilon = 1e-9);
            assert_eq!(row.output, (row.control, row.control ^ row.target));
            assert!(row.leakage < 1e-9, "{row:?}");
            assert_abs_diff_eq!(row.fidelity, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn conditional_matrix_is_a_scaled_cnot() {
        let m = conditional_matrix(&optimal()).unwrap();
        let sv = normalized_singular_values(&m);
        for s in &sv {
            assert_abs_diff_eq!(*s, sv[0], epsilon = 1e-8);
        }
        let cnot = DMatrix::from_row_slice(
            4,
            4,
            &[
                1.0, 0.0, 0.0, 0.0, //
                0.0, 1.0, 0.0, 0.0, //
                0.0, 0.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        )
        .map(Complex64::from);
        let diff = (phase_normalized(&m) - cnot)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-9);
    }

    #[test]
    fn bell_state_from_superposed_control() {
        let r = verify_coherence(&optimal()).unwrap();
        assert_abs_diff_eq!(r.probability, 1.0 / 16.0, epsilon = 1e-9);
        assert!(r.bell_overlap >= 1.0 - 1e-9);
        assert!(r.leakage < 1e-9);
        assert_abs_diff_eq!(r.product_overlap, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn parameter_choice_does_not_matter() {
        let a = build_cnot(
            &optimal_params([0.1, 0.4, 0.7]),
            &optimal_params([0.6, 0.0, 0.2]),
        )
        .unwrap();
        let b = optimal();
        let ma = phase_normalized(&conditional_matrix(&a).unwrap());
        let mb = phase_normalized(&conditional_matrix(&b).unwrap());
        assert!((ma - mb).iter().all(|z| z.norm() < 1e-8));
        for (ra, rb) in verify_truth_table(&a)
            .unwrap()
            .iter()
            .zip(verify_truth_table(&b).unwrap())
        {
            assert_abs_diff_eq!(ra.probability, rb.probability, epsilon = 1e-9);
            assert_eq!(ra.output, rb.output);
        }
    }

    #[test]
    fn detuned_gate_is_rejected() {
        let bad = NetworkParams::resonant([0.8, T_MIDDLE, T_OUTER], [0.0; 3]).unwrap();
        match build_cnot(&optimal_params([0.0; 3]), &bad) {
            Err(Error::InvalidNlpsg { gate, verdict }) => {
                assert_eq!(gate, 2);
                assert!(verdict.residual > 1e-3 || verdict.s11_residual > 1e-3);
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn ancilla_sign_flip_is_only_a_global_phase() {
        // negating every β through the ancilla output line
        let s = closed_form_resonant(T_OUTER, T_MIDDLE, T_OUTER).unwrap();
        let flipped = s.with_output_phases(&[0.0, std::f64::consts::PI, 0.0]);
        let v = verdict(&flipped).unwrap();
        assert!((v.beta0 + 0.5).norm() < 1e-12 && (v.beta2 + 0.5).norm() < 1e-12);
        let net = CnotNetwork::assemble(flipped, s).unwrap();
        let r = verify_coherence(&net).unwrap();
        assert!(r.bell_overlap >= 1.0 - 1e-9);
    }

    #[test]
    fn signal_phase_detune_degrades_coherence() {
        let detuned = optimal_params([0.0; 3]).with_deltas([0.4, 0.0, 0.0]);
        let s = scattering_matrix(&detuned).unwrap();
        let good = closed_form_resonant(T_OUTER, T_MIDDLE, T_OUTER).unwrap();
        let net = CnotNetwork::assemble(s, good).unwrap();
        let r = verify_coherence(&net).unwrap();
        assert!(r.bell_overlap < 0.99, "{r:?}");
        assert!(matches!(
            build_cnot(&detuned, &optimal_params([0.0; 3])),
            Err(Error::InvalidNlpsg { gate: 1, .. })
        ));
    }
}
