//! Parsing of point lists given on the command line.

const MAX_POINTS: usize = 1_000_000;

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

/// `start:stop:step` (stop included within half a step), `log:start:stop:count`
/// (geometric, both ends included), `a,b,c`, or a single value.
pub fn parse_points(spec: &str) -> Result<Vec<f64>, String> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("log:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(format!("expected log:start:stop:count, got '{spec}'"));
        };
        let (a, b) = (number(a)?, number(b)?);
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("'{n}' is not a point count"))?;
        if !(a > 0.0 && b > a) || !(2..=MAX_POINTS).contains(&n) {
            return Err(format!(
                "log grid needs 0 < start < stop and 2 <= count <= {MAX_POINTS}, got '{spec}'"
            ));
        }
        let ratio = (b / a).ln() / (n - 1) as f64;
        let mut pts: Vec<f64> = (0..n).map(|i| a * (ratio * i as f64).exp()).collect();
        pts[n - 1] = b;
        return Ok(pts);
    }
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [a, b, h] = parts[..] else {
            return Err(format!("expected start:stop:step, got '{spec}'"));
        };
        let (a, b, h) = (number(a)?, number(b)?, number(h)?);
        if h <= 0.0 || b < a {
            return Err(format!(
                "range needs step > 0 and stop >= start, got '{spec}'"
            ));
        }
        let steps = ((b - a) / h + 0.5).floor();
        if steps >= MAX_POINTS as f64 {
            return Err(format!("range '{spec}' has more than {MAX_POINTS} points"));
        }
        return Ok((0..=steps as usize).map(|i| a + h * i as f64).collect());
    }
    let pts = spec.split(',').map(number).collect::<Result<Vec<_>, _>>()?;
    if pts.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("list '{spec}' must be strictly increasing"));
    }
    Ok(pts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_includes_stop_within_half_step() {
        assert_eq!(
            parse_points("0:1:0.25").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_points("0:1.1:0.25").unwrap().len(), 5);
        assert_eq!(parse_points("0:1.2:0.25").unwrap().len(), 6);
    }

    #[test]
    fn lists_and_single_values() {
        assert_eq!(parse_points("2").unwrap(), vec![2.0]);
        assert_eq!(parse_points("1, 2.5,7").unwrap(), vec![1.0, 2.5, 7.0]);
        assert!(parse_points("2,1").is_err());
        assert!(parse_points("x").is_err());
    }

    #[test]
    fn geometric_grid_hits_both_ends() {
        let p = parse_points("log:1:1000:4").unwrap();
        assert_eq!(p[0], 1.0);
        assert_eq!(p[3], 1000.0);
        assert!((p[1] - 10.0).abs() < 1e-12 && (p[2] - 100.0).abs() < 1e-10);
    }

    #[test]
    fn rejects_malformed_ranges() {
        for bad in [
            "0:1",
            "1:0:0.1",
            "0:1:0",
            "0:1:-1",
            "log:0:1:3",
            "log:1:2:1",
            "0:1e9:1e-3",
        ] {
            assert!(parse_points(bad).is_err(), "{bad}");
        }
    }
}
