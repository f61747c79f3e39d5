//! Number formatting for the plain-text exports.

/// Format `v` with `digits` significant digits, `%g` style: fixed notation
/// for moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn format_significant(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mantissa = trim_zeros(mantissa);
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::format_significant as f;

    #[test]
    fn formats() {
        assert_eq!(f(0.0, 12), "0");
        assert_eq!(f(1.0, 12), "1");
        assert_eq!(f(0.5, 12), "0.5");
        assert_eq!(f(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(f(-0.0338200123456789, 9), "-0.0338200123");
        assert_eq!(f(1.5e-7, 12), "1.5e-7");
        assert_eq!(f(123456789.0, 9), "123456789");
        assert_eq!(f(1.23456789e12, 9), "1.23456789e12");
        assert_eq!(f(0.66156110050, 5), "0.66156");
    }
}
