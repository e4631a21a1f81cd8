//! Fixed number formatting for reproducible output.

use std::fmt::Write;

use num_complex::Complex64;

/// Nine significant digits in scientific notation; `-0` prints as `0`.
pub fn num(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.8e}")
}

pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self { out }
    }

    pub fn row<I, S>(&mut self, fields: I)
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut first = true;
        for f in fields {
            if !first {
                self.out.push(',');
            }
            first = false;
            let _ = write!(self.out, "{}", f.as_ref());
        }
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// `[re, im]` for JSON output.
pub fn pair(z: Complex64) -> [f64; 2] {
    let clean = |x: f64| if x == 0.0 { 0.0 } else { x };
    [clean(z.re), clean(z.im)]
}
