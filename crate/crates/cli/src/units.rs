//! Quantities with units on the command line: "3ms", "0,11.1,48.1mm".

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Time,
}

fn scale(unit: &str, dim: Dimension) -> Option<f64> {
    match (dim, unit) {
        (Dimension::Length, "m") => Some(1.0),
        (Dimension::Length, "cm") => Some(1e-2),
        (Dimension::Length, "mm") => Some(1e-3),
        (Dimension::Length, "um") => Some(1e-6),
        (Dimension::Time, "s") => Some(1.0),
        (Dimension::Time, "ms") => Some(1e-3),
        (Dimension::Time, "us") => Some(1e-6),
        _ => None,
    }
}

fn split_unit(s: &str) -> (&str, &str) {
    let at = s.find(|c: char| c.is_ascii_alphabetic()).unwrap_or(s.len());
    (s[..at].trim(), s[at..].trim())
}

/// Comma-separated values in SI units. Elements without a unit take the unit
/// of the last element, which must have one.
pub fn parse_list(s: &str, dim: Dimension) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let (_, default_unit) = split_unit(parts.last().copied().unwrap_or(""));
    if default_unit.is_empty() {
        return Err(format!("{s:?} needs a unit, e.g. {}", example(dim)));
    }
    parts
        .iter()
        .map(|p| {
            let (num, unit) = split_unit(p);
            let unit = if unit.is_empty() { default_unit } else { unit };
            let factor = scale(unit, dim).ok_or_else(|| format!("unknown unit {unit:?} in {s:?}"))?;
            let v: f64 = num.parse().map_err(|_| format!("{num:?} is not a number"))?;
            if !v.is_finite() {
                return Err(format!("{num:?} is not finite"));
            }
            Ok(v * factor)
        })
        .collect()
}

pub fn parse_one(s: &str, dim: Dimension) -> Result<f64, String> {
    match parse_list(s, dim)?.as_slice() {
        [v] => Ok(*v),
        _ => Err(format!("expected a single value, got {s:?}")),
    }
}

fn example(dim: Dimension) -> &'static str {
    match dim {
        Dimension::Length => "\"0,11.1,48.1mm\"",
        Dimension::Time => "\"3ms\"",
    }
}
