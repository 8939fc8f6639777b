//! Complex log-Gamma (Lanczos for moderate |z|, Stirling for large |z|, reflection on the left).

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

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

// B_{2k} / (2k (2k-1)) for k = 1..10
const STIRLING: [f64; 10] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
];

/// Integer test used for Gamma poles and zeros of 1/Gamma.
pub fn is_nonpositive_integer(z: C64) -> bool {
    let r = z.re.round();
    r <= 0.0 && z.im.abs() <= 1e-13 && (z.re - r).abs() <= 1e-13 * z.re.abs().max(1.0)
}

/// log sin(pi z) without overflow for large |Im z| (any branch).
pub fn ln_sin_pi(z: C64) -> C64 {
    let w = z * PI;
    let i = C64::i();
    if w.im > 1.0 {
        -i * w + (C64::new(1.0, 0.0) - (2.0 * i * w).exp()).ln() + (i / 2.0).ln()
    } else if w.im < -1.0 {
        i * w + (C64::new(1.0, 0.0) - (-2.0 * i * w).exp()).ln() - (2.0 * i).ln()
    } else {
        w.sin().ln()
    }
}

fn ln_gamma_right(z: C64) -> C64 {
    if z.norm() > 15.0 {
        let mut s = (z - 0.5) * z.ln() - z + 0.5 * (2.0 * PI).ln();
        let z2 = z * z;
        let mut zp = z;
        for c in STIRLING {
            s += c / zp;
            zp *= z2;
        }
        return s;
    }
    let zm = z - 1.0;
    let mut x = C64::new(LANCZOS[0], 0.0);
    for (k, &c) in LANCZOS.iter().enumerate().skip(1) {
        x += c / (zm + k as f64);
    }
    let t = zm + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm + 0.5) * t.ln() - t + x.ln()
}

/// log Gamma(z) modulo 2 pi i. Callers only exponentiate it.
pub fn ln_gamma(z: C64) -> C64 {
    if z.re < 0.5 {
        C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - ln_gamma_right(1.0 - z)
    } else {
        ln_gamma_right(z)
    }
}

/// Gamma(z); `None` at poles.
pub fn gamma(z: C64) -> Option<C64> {
    if is_nonpositive_integer(z) {
        None
    } else {
        Some(ln_gamma(z).exp())
    }
}

/// 1/Gamma(z), exactly zero at nonpositive integers.
pub fn rgamma(z: C64) -> C64 {
    if is_nonpositive_integer(z) {
        C64::new(0.0, 0.0)
    } else {
        (-ln_gamma(z)).exp()
    }
}

/// log m!
pub fn ln_factorial(m: u32) -> f64 {
    (1..=m).map(|k| (k as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn real_values() {
        assert!(close(gamma(C64::new(5.0, 0.0)).unwrap(), C64::new(24.0, 0.0), 1e-13));
        assert!(close(gamma(C64::new(0.5, 0.0)).unwrap(), C64::new(PI.sqrt(), 0.0), 1e-13));
        assert!(close(gamma(C64::new(-1.5, 0.0)).unwrap(), C64::new(4.0 * PI.sqrt() / 3.0, 0.0), 1e-13));
        assert!(close(gamma(C64::new(30.5, 0.0)).unwrap(), C64::new(4.822_696_933_490_909e31, 0.0), 1e-12));
        assert_eq!(rgamma(C64::new(-3.0, 0.0)), C64::new(0.0, 0.0));
        assert!(gamma(C64::new(0.0, 0.0)).is_none());
    }

    #[test]
    fn recurrence_and_reflection() {
        for &(x, y) in &[(0.3, 0.7), (-2.2, 4.0), (3.1, -25.0), (0.5, 40.0), (-7.3, -0.2), (16.0, 3.0)] {
            let z = C64::new(x, y);
            let lhs = ln_gamma(z + 1.0).exp();
            let rhs = z * ln_gamma(z).exp();
            assert!(close(lhs, rhs, 1e-12), "{z}");
            let refl = ln_gamma(z).exp() * ln_gamma(1.0 - z).exp() * (z * PI).sin();
            assert!((refl - C64::new(PI, 0.0)).norm() < 1e-10 * refl.norm().max(PI), "{z}");
        }
    }

    #[test]
    fn stirling_lanczos_join() {
        for &(x, y) in &[(14.9, 0.1), (10.0, 11.0), (1.0, 14.99)] {
            let z = C64::new(x, y);
            let a = ln_gamma_right(z);
            let b = ln_gamma_right(z + 1.0) - z.ln();
            assert!((a.exp() - b.exp()).norm() < 1e-12 * a.exp().norm());
        }
    }
}
