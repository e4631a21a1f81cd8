//! Three-ring gate network and its scattering matrix.
//!
//! Each block of the network is described by a 3×3 transfer matrix: one ring
//! acting on two of the lines and an in-line phase on the third. Because the
//! mode-2 line runs backwards through the blocks (ring 3 feeds ring 2 feeds
//! ring 1), the transfer matrices cannot simply be multiplied. Swapping the
//! mode-2 input and output of every block turns each into a map that chains
//! forward; one more swap of the product gives the scattering matrix.

use std::fmt;
use std::ops::Neg;

use nalgebra::{DMatrix, Matrix3};
use num_complex::{Complex, Complex64};
use num_traits::{Num, NumAssign};
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::error::{check_unit_interval, Error, Result};
use crate::ring::{invert_effective, RingCoupler, RingSlot, RingTransfer};

pub const SWAP_PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub rings: [RingCoupler; 3],
    pub deltas: [f64; 3],
}

impl NetworkParams {
    pub fn new(rings: [RingCoupler; 3], deltas: [f64; 3]) -> Self {
        Self { rings, deltas }
    }

    /// Resonant network with effective transmissions `t` realised through the
    /// lower-coupler choices `taus` (upper couplers from the inversion
    /// `η = (t + τ)/(1 + tτ)`), all in-line phases zero.
    pub fn resonant(t: [f64; 3], taus: [f64; 3]) -> Result<Self> {
        let mut rings = [RingCoupler::resonant(0.0, 0.0)?; 3];
        for i in 0..3 {
            let eta = invert_effective(t[i], taus[i])?;
            rings[i] = RingCoupler::resonant(taus[i], eta)?;
        }
        Ok(Self::new(rings, [0.0; 3]))
    }

    pub fn ring(&self, slot: RingSlot) -> &RingCoupler {
        &self.rings[slot.index()]
    }

    pub fn with_deltas(mut self, deltas: [f64; 3]) -> Self {
        self.deltas = deltas;
        self
    }
}

/// Label of a line entering or leaving a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Port {
    /// External input of a mode (1-based).
    Input(u8),
    /// External output of a mode (1-based).
    Output(u8),
    /// Internal line on `mode` running from block `from` to block `to`.
    Link { mode: u8, from: u8, to: u8 },
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Port::Input(m) => write!(f, "in{m}"),
            Port::Output(m) => write!(f, "out{m}"),
            Port::Link { mode, from, to } => write!(f, "mode{mode}[{from}->{to}]"),
        }
    }
}

/// Block transfer matrix: `outputs = matrix · inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transfer3 {
    pub matrix: Matrix3<Complex64>,
    pub inputs: [Port; 3],
    pub outputs: [Port; 3],
}

const fn link(mode: u8, from: u8, to: u8) -> Port {
    Port::Link { mode, from, to }
}

/// Assemble the block transfer matrix for the ring in `block`. Blocks 1 and 3
/// carry the in-line phase on the mode-1 line and the ring on lines 2, 3;
/// block 2 carries the ring on lines 1, 2 and the phase on the mode-3 line.
/// In-line phases enter as `exp(+iδ)`.
pub fn block_transfer(block: RingSlot, m: &RingTransfer, delta: f64) -> Transfer3 {
    let z = Complex64::new(0.0, 0.0);
    let phase = Complex64::from_polar(1.0, delta);
    match block {
        RingSlot::First => Transfer3 {
            matrix: Matrix3::new(phase, z, z, z, m.a, m.b, z, m.c, m.d),
            inputs: [Port::Input(1), link(2, 2, 1), Port::Input(3)],
            outputs: [link(1, 1, 2), Port::Output(2), link(3, 1, 2)],
        },
        RingSlot::Middle => Transfer3 {
            matrix: Matrix3::new(m.a, m.b, z, m.c, m.d, z, z, z, phase),
            inputs: [link(1, 1, 2), link(2, 3, 2), link(3, 1, 2)],
            outputs: [link(1, 2, 3), link(2, 2, 1), link(3, 2, 3)],
        },
        RingSlot::Last => Transfer3 {
            matrix: Matrix3::new(phase, z, z, z, m.a, m.b, z, m.c, m.d),
            inputs: [link(1, 2, 3), Port::Input(2), link(3, 2, 3)],
            outputs: [Port::Output(1), link(2, 3, 2), Port::Output(3)],
        },
    }
}

fn minor<T: SwapReal>(g: &Matrix3<Complex<T>>, row: usize, col: usize) -> Complex<T> {
    let r: Vec<usize> = (0..3).filter(|&i| i != row).collect();
    let c: Vec<usize> = (0..3).filter(|&j| j != col).collect();
    g[(r[0], c[0])] * g[(r[1], c[1])] - g[(r[0], c[1])] * g[(r[1], c[0])]
}

/// Exchange the dependent and independent variable of mode `mode` (0-based)
/// in the linear relation `x' = G x`.
///
/// For `mode = 1` the result maps `(x, y', z)` to `(x', y, z')`; the other two
/// modes are analogous. Applying the swap twice returns `G`.
pub fn mode_swap3(g: &Matrix3<Complex64>, mode: usize) -> Result<Matrix3<Complex64>> {
    assert!(mode < 3, "mode index {mode} out of range for a 3-mode swap");
    check_pivot(g[(mode, mode)].norm(), mode)?;
    Ok(swap_unchecked(g, mode))
}

fn check_pivot(magnitude: f64, mode: usize) -> Result<()> {
    if magnitude <= SWAP_PIVOT_EPS {
        return Err(Error::SingularPivot {
            mode: mode + 1,
            block: None,
            magnitude,
        });
    }
    Ok(())
}

/// Real scalar the swap can run on: `f64`, or `TwoFloat` inside the
/// composition.
trait SwapReal: nalgebra::Scalar + Copy + Num + NumAssign + Neg<Output = Self> {}

impl<T: nalgebra::Scalar + Copy + Num + NumAssign + Neg<Output = T>> SwapReal for T {}

fn swap_unchecked<T: SwapReal>(g: &Matrix3<Complex<T>>, mode: usize) -> Matrix3<Complex<T>> {
    let pivot = g[(mode, mode)];
    let m = |i: usize, j: usize| minor(g, i - 1, j - 1);
    let e = |i: usize, j: usize| g[(i - 1, j - 1)];
    let one = Complex::new(T::one(), T::zero());
    let swapped = match mode {
        0 => Matrix3::new(
            one,
            -e(1, 2),
            -e(1, 3),
            e(2, 1),
            m(3, 3),
            m(3, 2),
            e(3, 1),
            m(2, 3),
            m(2, 2),
        ),
        1 => Matrix3::new(
            m(3, 3),
            e(1, 2),
            -m(3, 1),
            -e(2, 1),
            one,
            -e(2, 3),
            -m(1, 3),
            e(3, 2),
            m(1, 1),
        ),
        _ => Matrix3::new(
            m(2, 2),
            m(2, 1),
            e(1, 3),
            m(1, 2),
            m(1, 1),
            e(2, 3),
            -e(3, 1),
            -e(3, 2),
            one,
        ),
    };
    swapped.map(|z| z / pivot)
}

/// Square complex matrix mapping input mode operators to output ones.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringMatrix(DMatrix<Complex64>);

impl ScatteringMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn from_matrix3(m: &Matrix3<Complex64>) -> Self {
        Self(DMatrix::from_fn(3, 3, |i, j| m[(i, j)]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    /// Entry `S[row, col]`, 0-based.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn unitarity_residual(&self) -> f64 {
        unitarity_residual(&self.0)
    }

    pub fn determinant(&self) -> Complex64 {
        self.0.clone().determinant()
    }

    pub fn max_abs_diff(&self, other: &ScatteringMatrix) -> f64 {
        (&self.0 - &other.0)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `self · other`: `other` acts first.
    pub fn then_after(&self, other: &ScatteringMatrix) -> ScatteringMatrix {
        ScatteringMatrix(&self.0 * &other.0)
    }

    /// Multiply the lines of `rows` by unit phases from the left.
    pub fn with_output_phases(&self, phases: &[f64]) -> ScatteringMatrix {
        let mut m = self.0.clone();
        for (i, &p) in phases.iter().enumerate() {
            let z = Complex64::from_polar(1.0, p);
            for j in 0..m.ncols() {
                m[(i, j)] *= z;
            }
        }
        ScatteringMatrix(m)
    }
}

/// `max |S†S - I|`.
pub fn unitarity_residual(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let g = m.adjoint() * m - DMatrix::<Complex64>::identity(n, n);
    g.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn tag_block(e: Error, block: usize) -> Error {
    match e {
        Error::SingularPivot {
            mode, magnitude, ..
        } => Error::SingularPivot {
            mode,
            block: Some(block),
            magnitude,
        },
        other => other,
    }
}

/// Global scattering matrix of the three-ring network.
pub fn compose_scattering(p: &NetworkParams) -> Result<ScatteringMatrix> {
    // Swapped blocks carry entries of order 1/t that cancel in the final
    // swap, so the chain runs in double-double precision.
    let widen = |z: &Complex64| Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im));
    let mut chained = Matrix3::<Complex64>::identity().map(|z| widen(&z));
    for slot in RingSlot::ALL {
        let ring = p.ring(slot).transfer_in_slot(slot);
        let block = block_transfer(slot, &ring, p.deltas[slot.index()]);
        check_pivot(block.matrix[(1, 1)].norm(), 1).map_err(|e| tag_block(e, slot.number()))?;
        chained = swap_unchecked(&block.matrix.map(|z| widen(&z)), 1) * chained;
    }
    let pivot = chained[(1, 1)];
    check_pivot(f64::from(pivot.re).hypot(f64::from(pivot.im)), 1)?;
    let s = swap_unchecked(&chained, 1).map(|z| Complex64::new(z.re.into(), z.im.into()));
    Ok(ScatteringMatrix::from_matrix3(&s))
}

/// Scattering matrix from a direct linear solve over every internal line.
///
/// Unlike [`compose_scattering`] this has no pivot restriction, so it also
/// covers rings with vanishing effective transmission.
pub fn solve_scattering(p: &NetworkParams) -> Result<ScatteringMatrix> {
    let blocks: Vec<Transfer3> = RingSlot::ALL
        .iter()
        .map(|&slot| {
            let ring = p.ring(slot).transfer_in_slot(slot);
            block_transfer(slot, &ring, p.deltas[slot.index()])
        })
        .collect();

    // unknowns: every block output (internal lines and the three outputs)
    let unknowns: Vec<Port> = blocks.iter().flat_map(|b| b.outputs).collect();
    let position = |port: &Port| unknowns.iter().position(|u| u == port);
    let n = unknowns.len();

    let mut lhs = DMatrix::<Complex64>::identity(n, n);
    let mut rhs = DMatrix::<Complex64>::zeros(n, 3);
    for (b, block) in blocks.iter().enumerate() {
        for i in 0..3 {
            let row = 3 * b + i;
            for j in 0..3 {
                let coeff = block.matrix[(i, j)];
                match block.inputs[j] {
                    Port::Input(mode) => rhs[(row, mode as usize - 1)] += coeff,
                    port => {
                        let col =
                            position(&port).expect("every internal line is driven by a block");
                        lhs[(row, col)] -= coeff;
                    }
                }
            }
        }
    }
    let solution = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Pole("network equations are singular".into()))?;
    let s = DMatrix::from_fn(3, 3, |out, k| {
        let row = position(&Port::Output(out as u8 + 1)).expect("outputs are unknowns");
        solution[(row, k)]
    });
    ScatteringMatrix::new(s)
}

/// Scattering matrix by mode-swap composition, falling back to the direct
/// solve when a block pivot vanishes.
pub fn scattering_matrix(p: &NetworkParams) -> Result<ScatteringMatrix> {
    match compose_scattering(p) {
        Err(Error::SingularPivot { .. }) => solve_scattering(p),
        other => other,
    }
}

/// Resonant scattering matrix written directly in the effective
/// transmissions of the three rings (all in-line phases zero).
pub fn closed_form_resonant(t1: f64, t2: f64, t3: f64) -> Result<ScatteringMatrix> {
    let t1 = check_unit_interval("t1", t1)?;
    let t2 = check_unit_interval("t2", t2)?;
    let t3 = check_unit_interval("t3", t3)?;
    let r1 = (1.0 - t1 * t1).sqrt();
    let r2 = (1.0 - t2 * t2).sqrt();
    let r3 = (1.0 - t3 * t3).sqrt();
    let den = t2 * r1 * r3 - 1.0;
    if den.abs() <= f64::EPSILON {
        return Err(Error::Pole(format!(
            "t2·r1·r3 - 1 = {den} for t = ({t1}, {t2}, {t3})"
        )));
    }
    #[rustfmt::skip]
    let s = Matrix3::new(
        t2 - r1 * r3,  -t3 * r2,           t1 * r2 * r3,
        -t1 * r2,      -t1 * t2 * t3,      t2 * r3 - r1,
        t3 * r1 * r2,  t2 * r1 - r3,       -t1 * t3,
    ) / den;
    Ok(ScatteringMatrix::from_matrix3(&s.map(Complex64::from)))
}
