//! Reference values computed without the library's series engine.
#![allow(dead_code)]

use std::f64::consts::PI;

// Lanczos approximation, g = 7, nine terms.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x` away from the poles.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
}

/// Γ(a + d) for integer `a` and small `d`, through Γ(1 + d) and the recurrence,
/// so that nothing is lost near the poles.
pub fn gamma_shifted(a: i32, d: f64) -> f64 {
    let mut g = gamma(1.0 + d);
    if a >= 1 {
        for k in 1..a {
            g *= k as f64 + d;
        }
    } else {
        for k in a..=0 {
            g /= k as f64 + d;
        }
    }
    g
}

pub const FOUR_PI_SQ: f64 = 16.0 * PI * PI;

pub fn rel_err(got: f64, want: f64) -> f64 {
    if want == 0.0 {
        got.abs()
    } else {
        (got - want).abs() / want.abs()
    }
}
