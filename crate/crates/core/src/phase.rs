//! Phase factors with positions measured in resonant wavelengths.
//!
//! All propagation phases in this crate are `2π·x` for some `x` expressed in
//! turns. Reducing `x` modulo quarter turns before calling `sin`/`cos` makes
//! the lattice phases (multiples of λ_A/4) exact, which the sub-radiance and
//! Jaynes-Cummings reductions rely on.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `(sin 2πx, cos 2πx)`, exact when `4x` is an integer.
pub fn sin_cos_turns(x: f64) -> (f64, f64) {
    let r = x - x.round();
    let quarter = (4.0 * r).round();
    let f = r - 0.25 * quarter;
    let (s, c) = if f == 0.0 { (0.0, 1.0) } else { (TAU * f).sin_cos() };
    match quarter as i64 {
        0 => (s, c),
        1 => (c, -s),
        -1 => (-c, s),
        _ => (-s, -c),
    }
}

/// `exp(2πi·x)`.
pub fn cis_turns(x: f64) -> Complex64 {
    let (s, c) = sin_cos_turns(x);
    Complex64::new(c, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_turns_are_exact() {
        assert_eq!(sin_cos_turns(0.25), (1.0, 0.0));
        assert_eq!(sin_cos_turns(0.5), (0.0, -1.0));
        assert_eq!(sin_cos_turns(0.75), (-1.0, 0.0));
        assert_eq!(sin_cos_turns(-0.25), (-1.0, 0.0));
        assert_eq!(sin_cos_turns(1000.75), (-1.0, 0.0));
        assert_eq!(sin_cos_turns(49999.5), (0.0, -1.0));
    }

    #[test]
    fn matches_libm_off_lattice() {
        for &x in &[0.1, 0.37, -1.9, 12.3456, 0.125, 0.49] {
            let (s, c) = sin_cos_turns(x);
            assert!((s - (TAU * x).sin()).abs() < 1e-12, "{x}");
            assert!((c - (TAU * x).cos()).abs() < 1e-12, "{x}");
        }
    }
}
