//! Special functions.

/// Digamma function ψ(x) for x > 0.
///
/// Shifts the argument above 10 with ψ(x) = ψ(x + 1) − 1/x, then sums the
/// asymptotic expansion through the x^-14 term.
pub fn digamma(x: f64) -> f64 {
    assert!(x > 0.0, "digamma is only defined here for positive arguments");
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli coefficients B_2k / (2k)
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    acc + x.ln() - 0.5 / x - series
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn reference_values() {
        assert!((digamma(1.0) + EULER_GAMMA).abs() < 1e-14);
        assert!((digamma(0.5) - (-1.963_510_026_021_423_5)).abs() < 1e-13);
        assert!((digamma(10.0) - 2.251_752_589_066_721).abs() < 1e-14);
        assert!((digamma(2.5) - 0.703_156_640_645_243_2).abs() < 1e-14);
    }

    #[test]
    fn integers_match_harmonic_numbers() {
        // ψ(n) = H_{n-1} − γ
        let mut h = 0.0;
        for n in 1..5000u32 {
            let rel = (digamma(n as f64) - (h - EULER_GAMMA)).abs() / (1.0 + h);
            assert!(rel < 1e-13, "n={n}");
            h += 1.0 / n as f64;
        }
    }

    proptest! {
        #[test]
        fn recurrence(x in 1.0f64..500.0) {
            prop_assert!((digamma(x + 1.0) - digamma(x) - 1.0 / x).abs() < 1e-12);
        }
    }
}
