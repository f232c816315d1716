use std::path::Path;

use crate::error::{Error, Result};

const BUNDLED_COPPER: &str = include_str!("../../data/copper_attenuation.csv");

/// Photon attenuation lengths of a material versus energy.
///
/// Lookups between nodes interpolate linearly in (ln E, ln λ).
#[derive(Clone, Debug, PartialEq)]
pub struct AttenuationTable {
    nodes: Vec<(f64, f64)>,
    density_g_cm3: Option<f64>,
}

impl AttenuationTable {
    pub fn new(nodes: Vec<(f64, f64)>, density_g_cm3: Option<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::domain("attenuation table needs at least two nodes"));
        }
        for w in nodes.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::domain(format!(
                    "attenuation table energies must increase strictly ({} then {})",
                    w[0].0, w[1].0
                )));
            }
        }
        if let Some(&(e, l)) = nodes.iter().find(|(e, l)| !(*e > 0.0) || !(*l > 0.0)) {
            return Err(Error::domain(format!(
                "attenuation table node ({e}, {l}) must have positive energy and length"
            )));
        }
        Ok(Self { nodes, density_g_cm3 })
    }

    /// Copper table shipped with the crate (NIST mass attenuation
    /// coefficients at 8.96 g/cm³, 2–20 keV).
    pub fn copper() -> Self {
        Self::parse(BUNDLED_COPPER, "bundled copper table").expect("bundled table is valid")
    }

    /// A material that never absorbs.
    pub fn transparent() -> Self {
        Self {
            nodes: vec![(1e-3, f64::INFINITY), (1e6, f64::INFINITY)],
            density_g_cm3: None,
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses `energy_keV,attenuation_length_cm` CSV. Lines starting with
    /// `#` are comments; `# density_g_cm3=<v>` records the density.
    pub fn parse(text: &str, what: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut density = None;
        let mut header_seen = false;
        let mut offset = 0;
        for line in text.split_inclusive('\n') {
            let at = offset;
            offset += line.len();
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(v) = comment.trim().strip_prefix("density_g_cm3=") {
                    density = Some(
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::format(what, at, format!("bad density: {e}")))?,
                    );
                }
                continue;
            }
            if !header_seen {
                if line != "energy_keV,attenuation_length_cm" {
                    return Err(Error::format(
                        what,
                        at,
                        "expected header `energy_keV,attenuation_length_cm`",
                    ));
                }
                header_seen = true;
                continue;
            }
            let mut fields = line.split(',');
            let (Some(e), Some(l), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::format(what, at, "expected two fields"));
            };
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|err| Error::format(what, at, format!("bad number `{s}`: {err}")))
            };
            nodes.push((parse(e)?, parse(l)?));
        }
        if !header_seen {
            return Err(Error::format(what, offset, "missing header"));
        }
        Self::new(nodes, density)
    }

    pub fn density_g_cm3(&self) -> Option<f64> {
        self.density_g_cm3
    }

    pub fn nodes(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    pub fn span(&self) -> (f64, f64) {
        (self.nodes[0].0, self.nodes[self.nodes.len() - 1].0)
    }

    /// Attenuation length in cm at `energy` keV.
    pub fn length_at(&self, energy: f64) -> Result<f64> {
        let (lo, hi) = self.span();
        if !(energy >= lo && energy <= hi) {
            return Err(Error::domain(format!(
                "energy {energy} keV outside attenuation table span [{lo}, {hi}]"
            )));
        }
        let i = self.nodes.partition_point(|(e, _)| *e <= energy);
        if i == 0 {
            return Ok(self.nodes[0].1);
        }
        let (e0, l0) = self.nodes[i - 1];
        if e0 == energy || i == self.nodes.len() {
            return Ok(l0);
        }
        let (e1, l1) = self.nodes[i];
        if l0 == l1 {
            return Ok(l0);
        }
        let t = (energy.ln() - e0.ln()) / (e1.ln() - e0.ln());
        Ok((l0.ln() + t * (l1.ln() - l0.ln())).exp())
    }

    /// Beer–Lambert survival probability through `path_cm` of material.
    pub fn survival(&self, path_cm: f64, energy: f64) -> Result<f64> {
        if !(path_cm >= 0.0) {
            return Err(Error::domain(format!("path length must be >= 0, got {path_cm}")));
        }
        Ok(survival_for_length(path_cm, self.length_at(energy)?))
    }
}

pub(crate) fn survival_for_length(path_cm: f64, attenuation_length_cm: f64) -> f64 {
    (-path_cm / attenuation_length_cm).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    #[test]
    fn bundled_table_spans_the_lines() {
        let t = AttenuationTable::copper();
        let (lo, hi) = t.span();
        assert!(lo <= 7.0 && hi >= 9.0);
        assert_eq!(t.density_g_cm3(), Some(8.96));
        // Below the K edge copper is comparatively transparent to its own Kα.
        let l8 = t.length_at(8.0).unwrap();
        assert!(l8 > 15e-4 && l8 < 30e-4, "{l8}");
        assert!(t.length_at(9.5).unwrap() < l8);
    }

    #[test]
    fn nodes_are_returned_exactly() {
        let t = AttenuationTable::new(vec![(1.0, 2.0), (2.0, 8.0), (4.0, 1.0)], None).unwrap();
        assert_eq!(t.length_at(1.0).unwrap(), 2.0);
        assert_eq!(t.length_at(2.0).unwrap(), 8.0);
        assert_eq!(t.length_at(4.0).unwrap(), 1.0);
        // Power law 2 E² between the first two nodes.
        assert_relative_eq!(t.length_at(1.5).unwrap(), 4.5, max_relative = 1e-12);
    }

    #[test]
    fn survival_basics() {
        let t = AttenuationTable::copper();
        assert_eq!(t.survival(0.0, 8.0).unwrap(), 1.0);
        let l = t.length_at(8.0).unwrap();
        assert_abs_diff_eq!(t.survival(l, 8.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        let s50 = t.survival(50e-4, 8.0).unwrap();
        assert!(s50 > 0.0 && s50 < 1.0);
        assert!(t.survival(60e-4, 8.0).unwrap() < s50);
        assert!(t.survival(1e-3, 30.0).is_err());
        assert!(t.survival(-1.0, 8.0).is_err());
    }

    #[test]
    fn transparent_never_absorbs() {
        assert_eq!(AttenuationTable::transparent().survival(100.0, 7.7).unwrap(), 1.0);
    }

    #[test]
    fn malformed_tables() {
        assert!(AttenuationTable::parse("energy_keV,attenuation_length_cm\n1,1\n1,2\n", "t").is_err());
        assert!(AttenuationTable::parse("energy_keV,attenuation_length_cm\n1,1\n2,-2\n", "t").is_err());
        let err = AttenuationTable::parse("energy_keV,attenuation_length_cm\n1,1\n2\n", "t").unwrap_err();
        assert!(matches!(err, Error::Format { offset: 37, .. }), "{err}");
        assert!(AttenuationTable::parse("e,l\n1,1\n", "t").is_err());
    }

    proptest! {
        #[test]
        fn beer_lambert_composes(a in 0.0f64..0.01, b in 0.0f64..0.01, e in 7.0f64..9.0) {
            let t = AttenuationTable::copper();
            let joint = t.survival(a + b, e).unwrap();
            let split = t.survival(a, e).unwrap() * t.survival(b, e).unwrap();
            prop_assert!((joint - split).abs() <= 1e-12);
        }
    }
}
