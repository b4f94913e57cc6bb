//! JSON model files.
//!
//! Either an explicit kernel
//! `{"horizontal": {"e1": 0.1, "-e1": 0.3, ...}, "vertical": ..., "origin": ..., "interior": ...}`
//! or a family stanza such as
//! `{"family": "joint_departures", "lambda": 0.1, "mu": 0.8, "mu_star": 0.32}`.

use serde_json::{Map, Value};

use super::{ComponentId, CoupledProcessors, Family, JointDepartures, ModelError, RandomWalkSpec, Step};

/// A parsed model: its walk and, for family stanzas, the family parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDoc {
    pub walk: RandomWalkSpec<f64>,
    pub family: Option<Family<f64>>,
}

fn err(msg: impl Into<String>) -> ModelError {
    ModelError::Json(msg.into())
}

pub fn parse_model(text: &str) -> Result<ModelDoc, ModelError> {
    let value: Value = serde_json::from_str(text).map_err(|e| err(e.to_string()))?;
    let Value::Object(obj) = value else { return Err(err("top level must be an object")) };
    if obj.contains_key("family") {
        let family = parse_family(&obj)?;
        Ok(ModelDoc { walk: family.walk()?, family: Some(family) })
    } else {
        Ok(ModelDoc { walk: parse_explicit(&obj)?, family: None })
    }
}

fn component_key(k: ComponentId) -> &'static str {
    match k {
        ComponentId::Horizontal => "horizontal",
        ComponentId::Vertical => "vertical",
        ComponentId::Origin => "origin",
        ComponentId::Interior => "interior",
    }
}

fn number(v: &Value, what: &str) -> Result<f64, ModelError> {
    v.as_f64().ok_or_else(|| err(format!("`{what}` must be a number")))
}

fn parse_explicit(obj: &Map<String, Value>) -> Result<RandomWalkSpec<f64>, ModelError> {
    for key in obj.keys() {
        if !ComponentId::ALL.iter().any(|&k| component_key(k) == key) {
            return Err(err(format!("unknown key `{key}`")));
        }
    }
    let mut entries = Vec::new();
    for k in ComponentId::ALL {
        let name = component_key(k);
        let row = obj.get(name).ok_or_else(|| err(format!("missing `{name}`")))?;
        let Value::Object(row) = row else { return Err(err(format!("`{name}` must be an object"))) };
        for (dir, p) in row {
            let u = Step::from_key(dir).ok_or_else(|| err(format!("unknown direction `{dir}` in `{name}`")))?;
            entries.push((k, u, number(p, dir)?));
        }
    }
    RandomWalkSpec::new(entries)
}

struct Params<'a> {
    obj: &'a Map<String, Value>,
}

impl Params<'_> {
    fn get(&self, key: &str) -> Result<Option<f64>, ModelError> {
        self.obj.get(key).map(|v| number(v, key)).transpose()
    }

    fn first(&self, keys: &[&str]) -> Result<Option<f64>, ModelError> {
        for key in keys {
            if let Some(v) = self.get(key)? {
                return Ok(Some(v));
            }
        }
        Ok(None)
    }

    fn need(&self, keys: &[&str]) -> Result<f64, ModelError> {
        self.first(keys)?.ok_or_else(|| err(format!("missing `{}`", keys[0])))
    }
}

const JD_KEYS: &[&str] = &["family", "lambda", "lambda1", "lambda2", "mu", "mu1", "mu2", "mu_star", "load", "mu_star_ratio"];
const CP_KEYS: &[&str] = &["family", "lambda", "lambda1", "lambda2", "mu", "mu1", "mu2", "mu_h", "mu_v", "load", "mu_star_ratio"];

fn parse_family(obj: &Map<String, Value>) -> Result<Family<f64>, ModelError> {
    let name = obj.get("family").and_then(Value::as_str).ok_or_else(|| err("`family` must be a string"))?;
    let allowed = match name {
        "joint_departures" => JD_KEYS,
        "coupled_processors" => CP_KEYS,
        other => return Err(err(format!("unknown family `{other}`"))),
    };
    if let Some(key) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(err(format!("unknown key `{key}` for family `{name}`")));
    }
    let p = Params { obj };
    if let Some(load) = p.get("load")? {
        let ratio = p.need(&["mu_star_ratio"])?;
        return Ok(match name {
            "joint_departures" => Family::JointDepartures(JointDepartures::symmetric(load, ratio)),
            _ => Family::CoupledProcessors(CoupledProcessors::symmetric(load, ratio)),
        });
    }
    let lambda1 = p.need(&["lambda1", "lambda"])?;
    let lambda2 = p.need(&["lambda2", "lambda"])?;
    Ok(match name {
        "joint_departures" => {
            let mu = p.need(&["mu"])?;
            Family::JointDepartures(JointDepartures {
                lambda1,
                lambda2,
                mu,
                mu1: p.need(&["mu1", "mu_star"])?,
                mu2: p.need(&["mu2", "mu_star"])?,
            })
        }
        _ => Family::CoupledProcessors(CoupledProcessors {
            lambda1,
            lambda2,
            mu1: p.need(&["mu1", "mu"])?,
            mu2: p.need(&["mu2", "mu"])?,
            mu_h: p.need(&["mu_h"])?,
            mu_v: p.need(&["mu_v"])?,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::joint_departures;

    #[test]
    fn explicit_model() {
        let text = r#"{
            "horizontal": {"e1": 0.1, "e2": 0.1, "-e1": 0.32, "0": 0.48},
            "vertical": {"e1": 0.1, "e2": 0.1, "-e2": 0.32, "0": 0.48},
            "origin": {"e1": 0.1, "e2": 0.1, "0": 0.8},
            "interior": {"e1": 0.1, "e2": 0.1, "-d1": 0.8}
        }"#;
        let doc = parse_model(text).unwrap();
        let expect = joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap();
        for k in ComponentId::ALL {
            for u in Step::ALL {
                assert!((doc.walk.p(k, u) - expect.p(k, u)).abs() < 1e-15);
            }
        }
        assert!(doc.family.is_none());
    }

    #[test]
    fn family_stanza() {
        let doc = parse_model(r#"{"family":"joint_departures","lambda":0.1,"mu":0.8,"mu_star":0.32}"#).unwrap();
        assert_eq!(doc.walk, joint_departures(0.1_f64, 0.1, 0.8, 0.32, 0.32).unwrap());
        let doc = parse_model(r#"{"family":"coupled_processors","lambda1":0.2,"lambda2":0.2,"mu1":0.3,"mu2":0.3,"mu_h":0.25,"mu_v":0.35}"#);
        assert!(doc.is_ok());
    }

    #[test]
    fn rejections() {
        assert!(parse_model("{not json").is_err());
        assert!(parse_model(r#"{"horizontal":{}, "extra":1}"#).is_err());
        assert!(parse_model(r#"{"family":"joint_departures","lambda":0.1,"mu":0.8,"mu_star":0.32,"bogus":1}"#).is_err());
        let bad_dir = r#"{"horizontal":{"-e2":1},"vertical":{"0":1},"origin":{"0":1},"interior":{"0":1}}"#;
        assert!(parse_model(bad_dir).is_err());
    }
}
