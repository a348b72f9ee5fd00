//! Number formatting shared by the CSV writers.

/// 17 significant digits, '.' decimal separator, no locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_exactly() {
        for &x in &[0.1, -2.0 / 3.0, 1e-300, 123456.789, std::f64::consts::PI] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
