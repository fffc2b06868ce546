//! Deterministic number formatting for report files.
//!
//! Report cells use a C-style `%.17g` rendering: 17 significant digits, fixed
//! or scientific notation chosen by exponent, trailing zeros trimmed. 17
//! digits round-trip any f64 bit pattern, so identical runs produce
//! byte-identical files.

/// Significant digits carried by [`g17`]; enough to round-trip an f64.
const SIG_DIGITS: usize = 17;

/// Formats `v` the way C's `printf("%.17g", v)` does.
pub fn g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0" } else { "0" }.to_string();
    }

    // {:.16e} renders exactly 17 significant digits, correctly rounded.
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponential format");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), SIG_DIGITS);

    let body = if exp < -4 || exp >= SIG_DIGITS as i32 {
        let frac = digits[1..].trim_end_matches('0');
        let mant = if frac.is_empty() {
            digits[..1].to_string()
        } else {
            format!("{}.{}", &digits[..1], frac)
        };
        format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else if exp < 0 {
        // 0.0...ddd
        let zeros = "0".repeat((-exp - 1) as usize);
        let frac = format!("{zeros}{digits}");
        format!("0.{}", frac.trim_end_matches('0'))
    } else {
        let point = exp as usize + 1;
        let int_part = &digits[..point];
        let frac = digits[point..].trim_end_matches('0');
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trims_trailing_zeros_in_fixed_notation() {
        assert_eq!(g17(210.0 / 1024.0), "0.205078125");
        assert_eq!(g17(0.375), "0.375");
        assert_eq!(g17(1.0), "1");
        assert_eq!(g17(-2.5), "-2.5");
    }

    #[test]
    fn full_precision_when_needed() {
        assert_eq!(g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(g17(1.0 / 6.0), "0.16666666666666666");
    }

    #[test]
    fn scientific_for_extreme_exponents() {
        // Dyadic values have exact 17-digit renderings.
        assert_eq!(g17(2.0f64.powi(-24)), "5.9604644775390625e-08");
        assert_eq!(g17(2.0f64.powi(70)), "1.1805916207174113e+21");
        assert_eq!(g17(-2.0f64.powi(-45)), "-2.8421709430404007e-14");
        // Exponent -4 stays fixed, -5 flips to scientific.
        assert_eq!(g17(2.0f64.powi(-10)), "0.0009765625");
        assert_eq!(g17(2.0f64.powi(-14)), "6.103515625e-05");
    }

    #[test]
    fn zero_and_specials() {
        assert_eq!(g17(0.0), "0");
        assert_eq!(g17(f64::INFINITY), "inf");
        assert_eq!(g17(f64::NAN), "nan");
    }

    #[test]
    fn round_trips_f64() {
        for &v in &[
            0.1,
            std::f64::consts::PI,
            1.9131528943740885e-7,
            6.02e23,
            -7.25e-300,
        ] {
            let back: f64 = g17(v).parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "g17 must round-trip {v}");
        }
    }
}
