//! Artifact writers: atomic file emission, versioned CSV, and PGM
//! rasters.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rotor::experiments::{primal_normalized, ExperimentSeries};
use rotor::lattice::Site;

use crate::CliError;

pub const CSV_HEADER: &str = "# rotor-series schema=1";

/// Writes via a temp file plus rename so readers never see a partial
/// artifact.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// The series CSV: schema line, header, one row per checkpoint with the
/// dimension-appropriate normalized rate.
pub fn series_csv(series: &ExperimentSeries) -> String {
    let normalized: std::collections::BTreeMap<u64, f64> =
        primal_normalized(series).into_iter().collect();
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    out.push_str("n,I,u0,h_plus,h_minus,breadth,steps,normalized_rate\n");
    for cp in &series.checkpoints {
        let rate = normalized
            .get(&cp.n)
            .map(|v| format!("{v:.9}"))
            .unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            cp.n, cp.escaped, cp.u0, cp.h_plus, cp.h_minus, cp.breadth, cp.total_steps, rate
        )
        .unwrap();
    }
    out
}

/// Site/value CSV for odometer fields.
pub fn field_csv(d: usize, rows: &[(Site, u64)]) -> String {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for a in 0..d {
        write!(out, "x{},", a + 1).unwrap();
    }
    out.push_str("value\n");
    for (site, v) in rows {
        for c in site {
            write!(out, "{c},").unwrap();
        }
        writeln!(out, "{v}").unwrap();
    }
    out
}

/// ASCII PGM (P2) of a d = 2 site set: cluster pixels 255 on black.
pub fn cluster_pgm(cluster: &[Site]) -> String {
    let (mut lo_x, mut hi_x, mut lo_y, mut hi_y) = (0i64, 0, 0, 0);
    for s in cluster {
        lo_x = lo_x.min(s[0]);
        hi_x = hi_x.max(s[0]);
        lo_y = lo_y.min(s[1]);
        hi_y = hi_y.max(s[1]);
    }
    let w = (hi_x - lo_x + 1) as usize;
    let h = (hi_y - lo_y + 1) as usize;
    let mut grid = vec![0u8; w * h];
    for s in cluster {
        // Row 0 is the top: largest x2.
        let col = (s[0] - lo_x) as usize;
        let row = (hi_y - s[1]) as usize;
        grid[row * w + col] = 1;
    }
    let mut out = format!("P2\n{w} {h}\n255\n");
    for row in 0..h {
        let line: Vec<&str> = grid[row * w..(row + 1) * w]
            .iter()
            .map(|&v| if v == 1 { "255" } else { "0" })
            .collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
