/// `printf("%.{digits}g")`: the shorter of fixed and scientific notation
/// with `digits` significant digits and trailing zeros removed.
pub fn general(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // the exponent after rounding to `digits` significant digits
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
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
    use super::general;

    #[test]
    fn matches_printf() {
        assert_eq!(general(0.0, 9), "0");
        assert_eq!(general(1.0, 9), "1");
        assert_eq!(general(2.0, 9), "2");
        assert_eq!(general(0.5, 9), "0.5");
        assert_eq!(general(0.289_064_5, 9), "0.2890645");
        assert_eq!(general(1.0 / 3.0, 9), "0.333333333");
        assert_eq!(general(2.0 / 3.0, 9), "0.666666667");
        assert_eq!(general(123_456_789.0, 9), "123456789");
        assert_eq!(general(1_234_567_890.0, 9), "1.23456789e+09");
        assert_eq!(general(0.000_123_4, 9), "0.0001234");
        assert_eq!(general(0.000_012_34, 9), "1.234e-05");
        assert_eq!(general(9.999_999_999_5, 9), "10");
        assert_eq!(general(-2.5, 3), "-2.5");
    }
}
