//! Number formatting shared by the CSV writers.

/// 17 significant digits in scientific notation; round-trips every `f64`.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::full;

    #[test]
    fn round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            assert_eq!(full(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(full(121.25), "1.2125000000000000e2");
    }
}
