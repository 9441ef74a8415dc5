//! Profile CSV (`phi,W,AW`).

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{GridProfile, GridSpec};

pub const CSV_HEADER: &str = "phi,W,AW";

/// One row per grid point, `{:.16e}` per field, LF line endings.
pub fn profile_csv(w: &GridProfile, aw: &GridProfile) -> Result<String> {
    w.spec().check_same(aw.spec())?;
    let spec = w.spec();
    let mut out = String::with_capacity(72 * (w.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for (i, (a, b)) in w.values().iter().zip(aw.values()).enumerate() {
        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", spec.phi(i), a, b);
    }
    Ok(out)
}

/// A profile read back from CSV, with its `AW` column when present.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileTable {
    pub w: GridProfile,
    pub aw: Option<GridProfile>,
}

/// Parses `phi,W[,AW]` rows; the grid is recovered from the `phi` column,
/// which must be the midpoints of a uniform cell `[−K, K)`.
pub fn parse_profile_csv(text: &str) -> Result<ProfileTable> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty file".into() })?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols.len() < 2 || cols[0] != "phi" || cols[1] != "W" {
        return Err(Error::Parse { line: 1, msg: format!("expected header '{CSV_HEADER}', got '{header}'") });
    }
    let width = cols.len();
    let (mut phi, mut w, mut aw) = (Vec::new(), Vec::new(), Vec::new());
    for (idx, line) in lines {
        let line_no = idx + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != width {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {width} fields, found {}", fields.len()),
            });
        }
        let mut nums = [0.0; 3];
        for (k, f) in fields.iter().take(3).enumerate() {
            nums[k] = f
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("bad number '{f}'") })?;
        }
        phi.push(nums[0]);
        w.push(nums[1]);
        if width >= 3 {
            aw.push(nums[2]);
        }
    }
    let n = phi.len();
    if n < 2 {
        return Err(Error::Parse { line: n + 1, msg: "need at least two rows".into() });
    }
    let h = (phi[n - 1] - phi[0]) / (n - 1) as f64;
    let spec = GridSpec::new(0.5 * n as f64 * h, n).map_err(|e| Error::Parse { line: 2, msg: e.to_string() })?;
    for (i, &x) in phi.iter().enumerate() {
        if (x - spec.phi(i)).abs() > 1e-9 * spec.half_period.max(1.0) {
            return Err(Error::Parse { line: i + 2, msg: format!("phi={x} is not the midpoint {}", spec.phi(i)) });
        }
    }
    let w = GridProfile::new(spec, w)?;
    let aw = if width >= 3 { Some(GridProfile::new(spec, aw)?) } else { None };
    Ok(ProfileTable { w, aw })
}
