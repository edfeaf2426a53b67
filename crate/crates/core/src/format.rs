//! Number formatting shared by every CSV writer.

/// Formats `v` in plain decimal notation with nine significant digits.
///
/// Non-finite values are written as `nan`, `inf` and `-inf`.
pub fn sig9(v: f64) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (8 - exponent).clamp(0, 40) as usize;
    let s = format!("{:.*}", decimals, v);
    // Rounding can carry into a new leading digit (9.999999999 -> 10.00000000);
    // reformat with one decimal less so the significant digit count stays 9.
    let digits = s.chars().filter(|c| c.is_ascii_digit()).count();
    let leading_zeros = s
        .trim_start_matches('-')
        .chars()
        .take_while(|c| *c == '0' || *c == '.')
        .filter(|c| *c == '0')
        .count();
    if digits - leading_zeros > 9 && decimals > 0 {
        format!("{:.*}", decimals - 1, v)
    } else {
        s
    }
}

/// Joins a row of values with commas using [`sig9`].
pub fn csv_row(values: &[f64]) -> String {
    values.iter().map(|v| sig9(*v)).collect::<Vec<_>>().join(",")
}
