//! Experiment configuration: one JSON document per run.

use std::path::PathBuf;
use std::sync::Arc;

use horoflow::fuchsian::SchottkyGroup;
use horoflow::representation::sym_power;
use horoflow::{BoundaryPoint, ProjMat, Representation};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::Failure;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub group: GroupSpec,
    #[serde(default)]
    pub representation: Option<RepresentationSpec>,
    #[serde(default)]
    pub params: Params,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    /// `[fix_minus, fix_plus, multiplier]` per generator.
    pub axes: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RepresentationSpec {
    SymPower(usize),
    /// One image per generator.
    Images(Vec<ImageSpec>),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ImageSpec {
    /// `Sym^n` of this generator.
    SymPower(usize),
    /// The identity of the given order.
    Identity(usize),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    #[default]
    OffGraph,
    OnGraph,
}

/// A boundary point: a real number or the string `"infinity"`.
#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(untagged)]
pub enum BoundarySpec {
    Real(f64),
    Infinity(Infinity),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Infinity {
    Infinity,
}

impl BoundarySpec {
    pub fn point(self) -> BoundaryPoint {
        match self {
            BoundarySpec::Real(t) => BoundaryPoint::finite(t),
            BoundarySpec::Infinity(_) => BoundaryPoint::infinity(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<StartKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub return_radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word: Option<Vec<i32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<BoundarySpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub linear: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda_ref: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start_index: Option<usize>,
    /// Indices of two limit-set sample points whose dual vector is tested.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub limit_pair: Option<[usize; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    #[serde(default)]
    pub svg: bool,
}

pub struct Loaded {
    pub config: ExperimentConfig,
    /// SHA-256 of the canonical (key-sorted, compact) config document.
    pub hash: String,
}

/// Parses a config. A seed given on the command line replaces
/// `params.seed` before hashing, so the hash covers it.
pub fn load(text: &str, seed: Option<u64>) -> Result<Loaded, Failure> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Failure::config(format!("config is not valid JSON: {e}")))?;
    if let (Some(seed), Some(doc)) = (seed, value.as_object_mut()) {
        let params = doc.entry("params").or_insert_with(|| serde_json::json!({}));
        match params.as_object_mut() {
            Some(p) => {
                p.insert("seed".into(), seed.into());
            }
            None => return Err(Failure::config("config schema violation: params must be an object")),
        }
    }
    let canonical = serde_json::to_vec(&value).map_err(|e| Failure::config(e.to_string()))?;
    let config: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| Failure::config(format!("config schema violation: {e}")))?;
    Ok(Loaded {
        config,
        hash: hex::encode(Sha256::digest(&canonical)),
    })
}

impl ExperimentConfig {
    pub fn build_group(&self) -> Result<Arc<SchottkyGroup>, Failure> {
        let axes: Vec<(f64, f64, f64)> = self.group.axes.iter().map(|a| (a[0], a[1], a[2])).collect();
        SchottkyGroup::from_axes(&axes).map(Arc::new).map_err(|e| match e {
            horoflow::Error::Certificate(_) => Failure::from(e),
            other => Failure::config(format!("group: {other}")),
        })
    }

    pub fn build_representation(&self, group: Arc<SchottkyGroup>) -> Result<Representation, Failure> {
        let spec = self
            .representation
            .as_ref()
            .ok_or_else(|| Failure::config(format!("experiment {} needs a representation", self.experiment)))?;
        let built = match spec {
            RepresentationSpec::SymPower(n) => Representation::sym_power(group, *n),
            RepresentationSpec::Images(images) => {
                if images.len() != group.rank() {
                    return Err(Failure::config(format!(
                        "{} generator images for a rank {} group",
                        images.len(),
                        group.rank()
                    )));
                }
                let mats = images
                    .iter()
                    .zip(group.generators())
                    .map(|(spec, g)| match spec {
                        ImageSpec::SymPower(n) => sym_power(g, *n),
                        ImageSpec::Identity(order) => Ok(ProjMat::identity(*order)),
                        ImageSpec::Matrix(rows) => ProjMat::from_rows(rows),
                    })
                    .collect::<horoflow::Result<Vec<ProjMat>>>()
                    .map_err(|e| Failure::config(format!("representation: {e}")))?;
                Representation::new(group, mats)
            }
        };
        built.map_err(|e| Failure::config(format!("representation: {e}")))
    }

    /// `n` when the representation is `Sym^n`, whose limit map is the
    /// Veronese curve.
    pub fn veronese_degree(&self) -> Option<usize> {
        match self.representation {
            Some(RepresentationSpec::SymPower(n)) => Some(n),
            _ => None,
        }
    }
}

impl Params {
    pub fn require<T: Clone>(field: &Option<T>, name: &str, experiment: &str) -> Result<T, Failure> {
        field
            .clone()
            .ok_or_else(|| Failure::config(format!("experiment {experiment} requires params.{name}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"experiment": "limit-set", "group": {"axes": [[-1, 1, 9], [-4, 3, 100]]}}"#;

    #[test]
    fn parses_minimal_config() {
        let loaded = load(MINIMAL, None).unwrap();
        assert_eq!(loaded.config.experiment, "limit-set");
        assert_eq!(loaded.hash.len(), 64);
        assert_eq!(loaded.config.build_group().unwrap().rank(), 2);
    }

    #[test]
    fn hash_ignores_formatting_and_key_order() {
        let a = load(MINIMAL, None).unwrap().hash;
        let b = load(
            r#"{"group":{"axes":[[-1,1,9],[-4,3,100]]},"experiment":"limit-set"}"#,
            None,
        )
        .unwrap()
        .hash;
        assert_eq!(a, b);
        let c = load(
            r#"{"group":{"axes":[[-1,1,9],[-4,3,101]]},"experiment":"limit-set"}"#,
            None,
        )
        .unwrap()
        .hash;
        assert_ne!(a, c);
    }

    #[test]
    fn seed_override_enters_the_hash() {
        let plain = load(MINIMAL, None).unwrap();
        let seeded = load(MINIMAL, Some(7)).unwrap();
        assert_eq!(seeded.config.params.seed, Some(7));
        assert_ne!(plain.hash, seeded.hash);
        let explicit =
            r#"{"experiment": "limit-set", "group": {"axes": [[-1, 1, 9], [-4, 3, 100]]}, "params": {"seed": 7}}"#;
        assert_eq!(load(explicit, None).unwrap().hash, seeded.hash);
        assert_eq!(load(explicit, Some(7)).unwrap().hash, seeded.hash);
    }

    #[test]
    fn rejects_unknown_keys() {
        let bad = r#"{"experiment": "limit-set", "group": {"axes": []}, "colour": 1}"#;
        assert_eq!(load(bad, None).err().unwrap().code, 2);
        let bad = r#"{"experiment": "limit-set", "group": {"axes": []}, "params": {"L": 3}}"#;
        assert_eq!(load(bad, None).err().unwrap().code, 2);
    }

    #[test]
    fn representation_specs() {
        let text = r#"{"experiment": "minimal-set",
            "group": {"axes": [[-1, 1, 9], [-4, 3, 100], [-0.2, 0.3, 100]]},
            "representation": {"images": [{"sym_power": 2}, {"sym_power": 2}, {"identity": 3}]}}"#;
        let cfg = load(text, None).unwrap().config;
        let rho = cfg.build_representation(cfg.build_group().unwrap()).unwrap();
        assert_eq!(rho.order(), 3);
        assert_eq!(cfg.veronese_degree(), None);
        let text = r#"{"experiment": "minimal-set", "group": {"axes": [[-1, 1, 9], [-4, 3, 100]]},
            "representation": {"images": [{"identity": 3}]}}"#;
        let cfg = load(text, None).unwrap().config;
        assert_eq!(
            cfg.build_representation(cfg.build_group().unwrap()).err().unwrap().code,
            2
        );
    }

    #[test]
    fn boundary_specs() {
        let p: Params = serde_json::from_str(r#"{"xi": "infinity"}"#).unwrap();
        assert!(p.xi.unwrap().point().is_infinity());
        let p: Params = serde_json::from_str(r#"{"xi": 1.5}"#).unwrap();
        assert_eq!(p.xi.unwrap().point().as_real(), Some(1.5));
        assert!(serde_json::from_str::<Params>(r#"{"xi": "north"}"#).is_err());
    }

    #[test]
    fn overlapping_disks_fail_the_certificate() {
        let text = r#"{"experiment": "limit-set", "group": {"axes": [[-1, 1, 1.5], [-1.1, 1.2, 1.5]]}}"#;
        let cfg = load(text, None).unwrap().config;
        assert_eq!(cfg.build_group().err().unwrap().code, 3);
    }
}
