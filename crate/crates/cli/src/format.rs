//! Number parsing and printing.

use std::fmt;

/// A decimal number `mantissa · 10^(−scale)`, kept exact so grid points
/// print without binary noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal {
    mantissa: i128,
    scale: u32,
}

const MAX_SCALE: u32 = 30;

impl Decimal {
    pub fn to_f64(self) -> f64 {
        self.to_string().parse().expect("decimal text parses")
    }

    pub fn is_positive(self) -> bool {
        self.mantissa > 0
    }

    fn rescale(self, scale: u32) -> Option<i128> {
        self.mantissa.checked_mul(10i128.checked_pow(scale - self.scale)?)
    }

    /// The points 0, step, 2·step, … up to and including `max`.
    pub fn grid(step: Decimal, max: Decimal, limit: usize) -> Result<Vec<Decimal>, String> {
        if !step.is_positive() {
            return Err("step must be positive".into());
        }
        let scale = step.scale.max(max.scale);
        let overflow = || "grid values too large".to_string();
        let s = step.rescale(scale).ok_or_else(overflow)?;
        let m = max.rescale(scale).ok_or_else(overflow)?;
        if m < 0 {
            return Ok(Vec::new());
        }
        let count = m / s + 1;
        if count > limit as i128 {
            return Err(format!("grid has {count} points, more than the limit {limit}"));
        }
        Ok((0..count)
            .map(|i| Decimal {
                mantissa: i * s,
                scale,
            }
            .normalized())
            .collect())
    }

    fn normalized(mut self) -> Self {
        while self.scale > 0 && self.mantissa % 10 == 0 {
            self.mantissa /= 10;
            self.scale -= 1;
        }
        self
    }
}

impl std::str::FromStr for Decimal {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, String> {
        let bad = || format!("'{text}' is not a decimal number");
        let t = text.trim();
        let (body, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
            None => (t, 0),
        };
        let (neg, body) = match body.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, body.strip_prefix('+').unwrap_or(body)),
        };
        let (int, frac) = body.split_once('.').unwrap_or((body, ""));
        if int.is_empty() && frac.is_empty() {
            return Err(bad());
        }
        if !int.bytes().chain(frac.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits = format!("{int}{frac}");
        let digits = digits.trim_start_matches('0');
        let mut mantissa: i128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
        let mut scale = frac.len() as i64 - exp as i64;
        while scale < 0 {
            mantissa = mantissa.checked_mul(10).ok_or_else(bad)?;
            scale += 1;
        }
        if scale > MAX_SCALE as i64 {
            return Err(format!("'{text}' has too many decimal places"));
        }
        if neg {
            mantissa = -mantissa;
        }
        Ok(Decimal {
            mantissa,
            scale: scale as u32,
        }
        .normalized())
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.normalized();
        let sign = if d.mantissa < 0 { "-" } else { "" };
        let digits = d.mantissa.unsigned_abs().to_string();
        if d.scale == 0 {
            return write!(f, "{sign}{digits}");
        }
        let scale = d.scale as usize;
        let padded = format!("{digits:0>width$}", width = scale + 1);
        let (int, frac) = padded.split_at(padded.len() - scale);
        write!(f, "{sign}{int}.{frac}")
    }
}

/// A real number; plain decimals and scientific notation are both accepted.
pub fn parse_real(text: &str) -> Result<f64, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{text}' is not finite"));
    }
    Ok(v)
}

/// A non-negative integer, also accepted in scientific notation ("1e6").
pub fn parse_count(text: &str) -> Result<u64, String> {
    if let Ok(v) = text.trim().parse::<u64>() {
        return Ok(v);
    }
    let v = parse_real(text)?;
    if v < 0.0 || v.fract() != 0.0 || v > u64::MAX as f64 {
        return Err(format!("'{text}' is not a non-negative integer"));
    }
    Ok(v as u64)
}

pub fn parse_small_count(text: &str) -> Result<u32, String> {
    let v = parse_count(text)?;
    u32::try_from(v).map_err(|_| format!("'{text}' is too large"))
}

/// `%g`-style output with `digits` significant digits: trailing zeros are
/// dropped and the exponent form is used below 1e-4 and from 10^digits.
pub fn format_sig(v: f64, digits: u32) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let p = digits.max(1) as usize;
    let sci = format!("{:.*e}", p - 1, v);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let mant = strip_zeros(mant);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mant}e{sign}{:02}", exp.abs())
    } else {
        strip_zeros(&format!("{:.*}", (p as i32 - 1 - exp) as usize, v)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_round_trip() {
        for (text, shown) in [
            ("0.1", "0.1"),
            ("2", "2"),
            ("2.50", "2.5"),
            ("1e-1", "0.1"),
            ("2.5e2", "250"),
            ("-0.05", "-0.05"),
            (".5", "0.5"),
            ("0", "0"),
        ] {
            assert_eq!(text.parse::<Decimal>().unwrap().to_string(), shown);
        }
        assert!("abc".parse::<Decimal>().is_err());
        assert!("1.2.3".parse::<Decimal>().is_err());
        assert!("".parse::<Decimal>().is_err());
    }

    #[test]
    fn grid_points_are_exact() {
        let g = Decimal::grid("0.1".parse().unwrap(), "4".parse().unwrap(), 1000).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[3].to_string(), "0.3");
        assert_eq!(g[40].to_string(), "4");
        assert_eq!(g[3].to_f64(), 0.3);
        let g = Decimal::grid("0.5".parse().unwrap(), "1".parse().unwrap(), 10).unwrap();
        let shown: Vec<String> = g.iter().map(|d| d.to_string()).collect();
        assert_eq!(shown, ["0", "0.5", "1"]);
        assert!(Decimal::grid("0".parse().unwrap(), "1".parse().unwrap(), 10).is_err());
        assert!(Decimal::grid("0.001".parse().unwrap(), "100".parse().unwrap(), 10).is_err());
    }

    #[test]
    fn significant_digits_match_table_style() {
        assert_eq!(format_sig(0.904689, 6), "0.904689");
        assert_eq!(format_sig(0.9046895, 5), "0.90469");
        assert_eq!(format_sig(0.13032, 6), "0.13032");
        assert_eq!(format_sig(0.00491093, 6), "0.00491093");
        assert_eq!(format_sig(1.0, 6), "1");
        assert_eq!(format_sig(4.86e-5, 6), "4.86e-05");
        assert_eq!(format_sig(1234567.0, 6), "1.23457e+06");
        assert_eq!(format_sig(123456.0, 6), "123456");
        assert_eq!(format_sig(-0.5, 3), "-0.5");
        assert_eq!(format_sig(9.9999996, 6), "10");
    }

    #[test]
    fn integer_parsing() {
        assert_eq!(parse_count("1e6").unwrap(), 1_000_000);
        assert_eq!(parse_count("20").unwrap(), 20);
        assert!(parse_count("2.5").is_err());
        assert!(parse_count("-1").is_err());
        assert_eq!(parse_real("1.5e3").unwrap(), 1500.0);
        assert!(parse_real("inf").is_err());
    }
}
