//! Matrix permanents.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Permanent by Ryser's formula, visiting column subsets in Gray-code order so
/// each step adds or removes a single column from the running row sums.
pub fn permanent(m: &DMatrix<Complex64>) -> Complex64 {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "permanent of a non-square matrix");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    assert!(n < 31, "permanent of a {n}x{n} matrix is out of reach");

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray = 0u32;
    for k in 1u32..(1 << n) {
        let bit = k.trailing_zeros() as usize;
        gray ^= 1 << bit;
        let added = gray & (1 << bit) != 0;
        for (i, s) in row_sums.iter_mut().enumerate() {
            if added {
                *s += m[(i, bit)];
            } else {
                *s -= m[(i, bit)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Permanent by direct expansion over all permutations. Kept as an
/// independent cross-check of [`permanent`].
pub fn permanent_naive(m: &DMatrix<Complex64>) -> Complex64 {
    fn expand(m: &DMatrix<Complex64>, row: usize, used: &mut [bool]) -> Complex64 {
        if row == m.nrows() {
            return Complex64::new(1.0, 0.0);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for col in 0..m.ncols() {
            if !used[col] {
                used[col] = true;
                acc += m[(row, col)] * expand(m, row + 1, used);
                used[col] = false;
            }
        }
        acc
    }
    assert_eq!(m.nrows(), m.ncols(), "permanent of a non-square matrix");
    expand(m, 0, &mut vec![false; m.ncols()])
}
