//! Measured lattice constants: `a_d` fits, Green origin values,
//! Monte-Carlo escape probabilities, and miscellaneous fitted bounds.
//! Stored as versioned line-oriented text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::green::exact_green_field;
use super::mc::mc_alpha;
use super::PotentialError;

pub const CALIBRATION_HEADER: &str = "# rotor-calibration schema=1";

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Calibration {
    /// Fitted `a_d` with the max relative spread of the fit.
    a: BTreeMap<usize, (f64, f64)>,
    /// Measured `G_r(0,0)` for `d >= 3` at the calibration radius.
    green_origin: BTreeMap<usize, f64>,
    /// Monte-Carlo escape probability with its standard error.
    alpha: BTreeMap<usize, (f64, f64)>,
    /// Named scalar constants (fitted J, J', offsets, ...).
    consts: BTreeMap<String, f64>,
}

impl Calibration {
    pub fn a(&self, d: usize) -> Option<f64> {
        self.a.get(&d).map(|&(v, _)| v)
    }

    pub fn green_origin(&self, d: usize) -> Option<f64> {
        self.green_origin.get(&d).copied()
    }

    pub fn alpha(&self, d: usize) -> Option<(f64, f64)> {
        self.alpha.get(&d).copied()
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.consts.get(name).copied()
    }

    pub fn set_a(&mut self, d: usize, value: f64, spread: f64) {
        self.a.insert(d, (value, spread));
    }

    pub fn set_green_origin(&mut self, d: usize, value: f64) {
        self.green_origin.insert(d, value);
    }

    pub fn set_alpha(&mut self, d: usize, value: f64, std_error: f64) {
        self.alpha.insert(d, (value, std_error));
    }

    pub fn set_constant(&mut self, name: &str, value: f64) {
        self.consts.insert(name.to_string(), value);
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(CALIBRATION_HEADER);
        out.push('\n');
        for (d, (v, spread)) in &self.a {
            writeln!(out, "a {} {:.12e} {:.3e}", d, v, spread).unwrap();
        }
        for (d, v) in &self.green_origin {
            writeln!(out, "green-origin {} {:.12e}", d, v).unwrap();
        }
        for (d, (v, se)) in &self.alpha {
            writeln!(out, "alpha {} {:.12e} {:.3e}", d, v, se).unwrap();
        }
        for (name, v) in &self.consts {
            writeln!(out, "const {} {:.12e}", name, v).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Calibration, PotentialError> {
        let bad = |msg: &str| PotentialError::BadCalibration(msg.to_string());
        let mut lines = text.lines();
        match lines.next() {
            Some(h) if h.trim() == CALIBRATION_HEADER => {}
            _ => return Err(bad("missing schema header")),
        }
        let mut cal = Calibration::default();
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| bad(&format!("bad number {s:?}")))
            };
            match (tok[0], tok.len()) {
                ("a", 4) => {
                    let d = tok[1].parse().map_err(|_| bad("bad dimension"))?;
                    cal.set_a(d, parse(tok[2])?, parse(tok[3])?);
                }
                ("green-origin", 3) => {
                    let d = tok[1].parse().map_err(|_| bad("bad dimension"))?;
                    cal.set_green_origin(d, parse(tok[2])?);
                }
                ("alpha", 4) => {
                    let d = tok[1].parse().map_err(|_| bad("bad dimension"))?;
                    cal.set_alpha(d, parse(tok[2])?, parse(tok[3])?);
                }
                ("const", 3) => cal.set_constant(tok[1], parse(tok[2])?),
                _ => return Err(bad(&format!("unrecognized line {line:?}"))),
            }
        }
        Ok(cal)
    }
}

/// Fits `a_d` from `G_r(x, 0) = a_d (|x|^{2-d} - r^{2-d})` over the
/// shell `lo <= |x| <= hi`, returning the fit and its max relative
/// spread across sample sites.
pub fn fit_a_d(d: usize, r: f64, lo: f64, hi: f64) -> Result<(f64, f64), PotentialError> {
    if d < 3 {
        return Err(PotentialError::RecurrentDimension(d));
    }
    let origin = vec![0i64; d];
    let field = exact_green_field(d, r, &origin)?;
    let p = 2.0 - d as f64;
    let mut samples = Vec::new();
    for x in field.region.interior() {
        let dist = x.iter().map(|&c| (c as f64).powi(2)).sum::<f64>().sqrt();
        if dist >= lo && dist <= hi {
            samples.push(field.value(x) / (dist.powf(p) - r.powf(p)));
        }
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let spread = samples
        .iter()
        .map(|s| (s / mean - 1.0).abs())
        .fold(0.0, f64::max);
    Ok((mean, spread))
}

/// `G_r(0,0) - (2/pi) log r`: the d = 2 lattice offset.
pub fn d2_green_offset(r: f64) -> Result<f64, PotentialError> {
    let field = exact_green_field(2, r, &[0, 0])?;
    Ok(field.value(&[0, 0]) - 2.0 / std::f64::consts::PI * r.ln())
}

/// Runs every fit at the given scale and assembles a calibration.
/// `scale` trades accuracy for time: the d >= 3 solves use radius
/// `2 * scale` and the Monte-Carlo run `scale^2` trials.
pub fn calibrate(d_max: usize, scale: f64, seed: u64) -> Result<Calibration, PotentialError> {
    let mut cal = Calibration::default();
    let r3 = 2.0 * scale;
    for d in 3..=d_max.max(3) {
        let (a, spread) = fit_a_d(d, r3, scale / 6.0, scale / 2.4)?;
        cal.set_a(d, a, spread);
        let origin = vec![0i64; d];
        let field = exact_green_field(d, r3, &origin)?;
        cal.set_green_origin(d, field.value(&origin));
        let mc = mc_alpha(d, (scale * scale) as u64, 100.0 * scale, seed)?;
        cal.set_alpha(d, mc.estimate, mc.std_error);
    }
    cal.set_constant("d2-green-offset", d2_green_offset(scale.max(20.0))?);
    Ok(cal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_round_trip() {
        let mut cal = Calibration::default();
        cal.set_a(3, 0.4775, 0.02);
        cal.set_green_origin(3, 1.4861);
        cal.set_alpha(3, 0.6595, 0.00047);
        cal.set_constant("j-prime", 5.5);
        let text = cal.to_text();
        assert!(text.starts_with(CALIBRATION_HEADER));
        let back = Calibration::from_text(&text).unwrap();
        assert_eq!(cal, back);
    }

    #[test]
    fn missing_header_is_rejected() {
        assert!(matches!(
            Calibration::from_text("a 3 0.5 0.1\n"),
            Err(PotentialError::BadCalibration(_))
        ));
    }

    #[test]
    fn a3_fit_lands_near_the_known_constant() {
        // a_3 = 3 / (2 pi) ~ 0.47746.
        let (a, spread) = fit_a_d(3, 24.0, 6.0, 12.0).unwrap();
        assert!((a - 0.47746).abs() < 0.05, "a_3 fit {a} spread {spread}");
    }

    #[test]
    fn d2_offset_is_stable_in_r() {
        let o1 = d2_green_offset(20.0).unwrap();
        let o2 = d2_green_offset(40.0).unwrap();
        assert!((o1 - o2).abs() < 0.02, "offsets {o1} vs {o2}");
    }
}
