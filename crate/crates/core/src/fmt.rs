//! Text formatting for CSV output.

/// Format a real with 17 significant digits, `.` as decimal separator and no
/// grouping. Non-finite values print as `inf`, `-inf` and `nan`.
pub fn real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp) as usize;
        let fixed = format!("{x:.decimals$}");
        trim_fraction(&fixed)
    } else {
        let (mantissa, e) = sci.split_at(sci.find('e').unwrap());
        format!("{}{}", trim_fraction(mantissa), e)
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::real;

    #[test]
    fn formats() {
        assert_eq!(real(0.5), "0.5");
        assert_eq!(real(1.0), "1");
        assert_eq!(real(-2.25), "-2.25");
        assert_eq!(real(0.1), "0.10000000000000001");
        assert_eq!(real(1e-7), "9.9999999999999995e-8");
        assert_eq!(real(123456789.0), "123456789");
        assert_eq!(real(f64::NEG_INFINITY), "-inf");
        assert_eq!(real(0.0), "0");
    }

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt() * 1e10, 6.02e23, -1.5e-300] {
            assert_eq!(real(x).parse::<f64>().unwrap(), x);
        }
    }
}
