/// Parse a number with an optional `k`, `M` or `G` suffix.
pub fn parse_si(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, scale) = match s.chars().last() {
        Some('k' | 'K') => (&s[..s.len() - 1], 1e3),
        Some('M') => (&s[..s.len() - 1], 1e6),
        Some('G') => (&s[..s.len() - 1], 1e9),
        _ => (s, 1.0),
    };
    let v: f64 = num
        .parse()
        .map_err(|_| format!("'{s}' is not a number (suffixes k, M, G allowed)"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v * scale)
}

pub fn parse_positive_si(s: &str) -> Result<f64, String> {
    let v = parse_si(s)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(format!("'{s}' must be positive"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suffixes() {
        assert_eq!(parse_si("3.6G").unwrap(), 3.6e9);
        assert_eq!(parse_si("100M").unwrap(), 1e8);
        assert_eq!(parse_si("5k").unwrap(), 5e3);
        assert_eq!(parse_si("1.6e9").unwrap(), 1.6e9);
        assert_eq!(parse_si("-2").unwrap(), -2.0);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "G", "3.6 GHz", "1m", "inf", "NaN"] {
            assert!(parse_si(bad).is_err(), "{bad}");
        }
        assert!(parse_positive_si("0").is_err());
    }
}
