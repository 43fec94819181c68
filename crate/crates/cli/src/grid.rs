//! Numeric grid syntax shared by flags and config files:
//! either a comma list `a,b,c` or an inclusive range `lo:step:hi`.

use crate::CliError;

fn parse_number(field: &'static str, token: &str) -> Result<f64, CliError> {
    let t = token.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::validation(field, format!("not a finite number: {t:?}")))
}

// Range points are lo + i*step, snapped to 12 significant digits so that
// e.g. a 0.1-step grid prints as exact multiples of 0.1 in CSV output.
fn snap(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().unwrap()
}

pub fn parse_grid(field: &'static str, spec: &str) -> Result<Vec<f64>, CliError> {
    let s = spec.trim();
    if s.is_empty() {
        return Err(CliError::validation(field, "grid must be nonempty"));
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::validation(
                field,
                format!("range syntax is lo:step:hi, got {s:?}"),
            ));
        }
        let lo = parse_number(field, parts[0])?;
        let step = parse_number(field, parts[1])?;
        let hi = parse_number(field, parts[2])?;
        if step <= 0.0 {
            return Err(CliError::validation(
                field,
                format!("range step must be positive, got {step}"),
            ));
        }
        if hi < lo {
            return Err(CliError::validation(
                field,
                format!("range end {hi} is below start {lo}"),
            ));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as u64;
        Ok((0..=count).map(|i| snap(lo + i as f64 * step)).collect())
    } else {
        s.split(',').map(|t| parse_number(field, t)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comma_list() {
        assert_eq!(parse_grid("x", "0.5,1,2,4").unwrap(), vec![0.5, 1.0, 2.0, 4.0]);
        assert_eq!(parse_grid("x", "-8").unwrap(), vec![-8.0]);
    }

    #[test]
    fn range_is_inclusive_and_snapped() {
        let g = parse_grid("x", "0.1:0.1:5").unwrap();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[2], 0.3);
        assert_eq!(*g.last().unwrap(), 5.0);
    }

    #[test]
    fn range_end_not_forced() {
        assert_eq!(parse_grid("x", "0:0.3:1").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_grid("x", "").is_err());
        assert!(parse_grid("x", "1,,2").is_err());
        assert!(parse_grid("x", "1:2").is_err());
        assert!(parse_grid("x", "1:0:2").is_err());
        assert!(parse_grid("x", "2:1:1").is_err());
        assert!(parse_grid("x", "nan").is_err());
    }
}
