//! CSV and JSON persistence. Numbers use Rust's shortest round-trip decimal
//! formatting, so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::optimizers::Trajectory;

pub const TRAJECTORY_HEADER: &str = "k,f_gap,dist,grad_norm,raw_grad_norm,clip_active,case";
pub const CRITERIA_HEADER: &str = "trial_index,criterion,diverged,max_dist,t3_count";

/// Shortest decimal string that parses back to the same `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

pub fn trajectory_csv(t: &Trajectory) -> String {
    let mut out = String::with_capacity(64 * (t.steps.len() + 2));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for (k, s) in t.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{}",
            fmt_f64(s.f_gap),
            fmt_f64(s.dist),
            fmt_f64(s.grad_norm),
            fmt_f64(s.raw_grad_norm),
            s.clip_active,
            s.case.index()
        );
    }
    match t.divergence {
        Some(step) => {
            let _ = writeln!(out, "# diverged=true,step={step}");
        }
        None => {
            let _ = writeln!(out, "# diverged=false,final_dist={}", fmt_f64(t.final_dist));
        }
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

/// Pretty JSON with a trailing newline; struct fields keep declaration order.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_formatting() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 6.02214076e23, -2.5, 0.0, 123456789.125] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(0.5), "0.5");
        assert_eq!(fmt_f64(3.0), "3");
        assert_eq!(fmt_f64(f64::INFINITY), "inf");
    }
}
