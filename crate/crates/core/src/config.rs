//! JSON inputs: polytopes, weights and test configurations.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polytope::{catalog, DelzantPolytope};
use crate::profiles::{self, Family, Profile, WeightPair};
use crate::testconfig::{AffinePiece, PLConvex, ToricTC};

/// A catalog name, or otherwise a path to a polytope JSON file.
pub fn load_polytope(source: &str) -> Result<DelzantPolytope> {
    match catalog::load(source) {
        Ok(p) => Ok(p),
        Err(Error::UnknownCatalog(_)) if Path::new(source).exists() => {
            let text = std::fs::read_to_string(source)?;
            DelzantPolytope::from_json(&text)
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfilePair {
    pub f: Profile,
    pub g: Profile,
}

/// `{ "xi": [...], "family": "...", "params": {...}, "profiles": {"f": ..., "g": ...} }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightConfig {
    pub xi: Vec<f64>,
    pub family: Family,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles: Option<ProfilePair>,
}

impl WeightConfig {
    pub fn new(family: Family, xi: Vec<f64>) -> Self {
        Self { xi, family, params: BTreeMap::new(), profiles: None }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Builds the weights, checking the dimension and any pole of the family.
    pub fn build(&self, polytope: &DelzantPolytope) -> Result<WeightPair> {
        if self.xi.len() != polytope.dim() {
            return Err(Error::DimensionMismatch { expected: polytope.dim(), got: self.xi.len() });
        }
        if let Some(key) = self.params.keys().find(|k| k.as_str() != "a") {
            return Err(Error::Parse(format!("unknown weight parameter `{key}`")));
        }
        if let Some(p) = &self.profiles {
            let mut w = WeightPair::new(self.xi.clone(), p.f.clone(), p.g.clone());
            w.family = self.family;
            return Ok(w);
        }
        profiles::builtin(self.family, &self.xi, self.params.get("a").copied(), Some(polytope))
    }
}

/// Weights of a family with a parameter `a` placing `a + ⟨ξ,x⟩ ≥ 1` on `P`
/// when the family needs one.
pub fn family_weights(family: Family, xi: &[f64], polytope: &DelzantPolytope) -> Result<WeightPair> {
    let a = match family {
        Family::Sasaki | Family::Ckem => Some(safe_a(polytope, xi)),
        _ => None,
    };
    profiles::builtin(family, xi, a, Some(polytope))
}

/// `a = 1 − min_P ⟨ξ,x⟩`.
pub fn safe_a(polytope: &DelzantPolytope, xi: &[f64]) -> f64 {
    1.0 - polytope.interval_along(xi).0
}

/// `{ "pieces": [ { "gradient": ["p/q", ...], "constant": "p/q" } ], "twist": [...] }`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TcConfig {
    pub pieces: Vec<AffinePiece>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<Vec<f64>>,
}

impl TcConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn build(&self, dim: usize) -> Result<ToricTC> {
        let phi = PLConvex::new(self.pieces.clone())?;
        if phi.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: phi.dim() });
        }
        let tc = ToricTC::new(phi);
        match &self.twist {
            Some(beta) if beta.len() != dim => Err(Error::DimensionMismatch { expected: dim, got: beta.len() }),
            Some(beta) => Ok(tc.twist(beta)),
            None => Ok(tc),
        }
    }
}

impl From<&PLConvex> for TcConfig {
    fn from(phi: &PLConvex) -> Self {
        Self { pieces: phi.pieces.clone(), twist: None }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn weight_config_round_trip() {
        let p = load_polytope("cp2").unwrap();
        let text = r#"{ "xi": [0.5, -0.25], "family": "sasaki", "params": { "a": 3.0 } }"#;
        let cfg = WeightConfig::from_json(text).unwrap();
        let w = cfg.build(&p).unwrap();
        assert!((w.v(&[0.0, 0.0]).unwrap() - 3f64.powi(-3)).abs() < 1e-14);
        let again = WeightConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(again, cfg);
        let csck = WeightConfig::from_json(r#"{ "xi": [0, 0], "family": "cscK" }"#).unwrap();
        assert!(csck.build(&p).unwrap().is_constant());
    }

    #[test]
    fn weight_config_errors() {
        let p = load_polytope("cp2").unwrap();
        let pole = WeightConfig::from_json(r#"{ "xi": [1, 0], "family": "sasaki", "params": { "a": 0 } }"#).unwrap();
        assert!(matches!(pole.build(&p), Err(Error::Positivity(_))));
        let short = WeightConfig::from_json(r#"{ "xi": [1], "family": "soliton" }"#).unwrap();
        assert!(matches!(short.build(&p), Err(Error::DimensionMismatch { .. })));
        assert!(WeightConfig::from_json(r#"{ "xi": [1, 0], "family": "kahler" }"#).is_err());
        let custom = r#"{ "xi": [1, 0], "family": "custom",
            "profiles": { "f": { "kind": "exponential", "scale": 1.0 }, "g": { "kind": "monomial", "degree": 3 } } }"#;
        let w = WeightConfig::from_json(custom).unwrap().build(&p).unwrap();
        assert!((w.v(&[0.5, 0.0]).unwrap() - 0.5f64.exp()).abs() < 1e-14);
        assert!((w.w(&[0.5, 0.0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tc_config_with_twist() {
        let text = r#"{ "pieces": [ { "gradient": ["1", "0"], "constant": "0" },
                                    { "gradient": ["0", "1"], "constant": "-1/2" } ],
                       "twist": [1.0, 0.5] }"#;
        let tc = TcConfig::from_json(text).unwrap().build(2).unwrap();
        assert_eq!(tc.phi.pieces[0].gradient, vec![int(0), ratio(-1, 2)]);
        assert_eq!(tc.phi.pieces[1].constant, ratio(-1, 2));
        assert!(TcConfig::from_json(text).unwrap().build(3).is_err());
    }

    #[test]
    fn safe_parameters_are_positive() {
        for p in catalog::standard() {
            let name = p.name().unwrap_or_default().to_string();
            let xi = vec![0.3; p.dim()];
            for family in [Family::Sasaki, Family::Ckem] {
                let w = family_weights(family, &xi, &p).unwrap();
                assert!(profiles::positivity_check(&w, &p).positive, "{name}");
            }
        }
    }
}
