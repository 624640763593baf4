//! Problem-instance readers.
//!
//! Accepted inputs:
//! - CSV, one `re,im` pair per line; blank lines and `#` comments skipped,
//!   an optional `re,im` header line allowed.
//! - JSON array of `[re, im]` pairs.
//! - JSON object with one of `z` (pair array), `h_s`/`h_r`/`h_d` (cascade
//!   with direct link), or `scene` (far-field scene, angles in degrees).

use num_complex::Complex64;
use serde::Deserialize;

use crate::channels::{build_model2_objective, SceneSpec};
use crate::error::{Error, Result};
use crate::reduce::CascadedChannel;
use crate::types::RankOneObjective;

#[derive(Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum JsonInstance {
    Pairs(Vec<[f64; 2]>),
    Vector {
        z: Vec<[f64; 2]>,
    },
    Cascade {
        h_s: Vec<[f64; 2]>,
        h_r: Vec<[f64; 2]>,
        #[serde(default)]
        h_d: [f64; 2],
    },
    Scene {
        scene: SceneSpec,
    },
}

fn pairs(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses `re,im` lines into a complex vector.
pub fn parse_csv_vector(text: &str) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if out.is_empty() && rec.len() == 2 && &rec[0] == "re" && &rec[1] == "im" {
            continue;
        }
        if rec.len() != 2 {
            return Err(parse_err(
                line,
                format!("expected 2 fields, found {}", rec.len()),
            ));
        }
        let num = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| parse_err(line, format!("not a finite number: {s:?}")))
        };
        out.push(Complex64::new(num(&rec[0])?, num(&rec[1])?));
    }
    if out.is_empty() {
        return Err(parse_err(1, "no entries"));
    }
    Ok(out)
}

/// Reads an instance from text and reduces it to an objective.
pub fn parse_instance(text: &str) -> Result<RankOneObjective> {
    let first = text.trim_start().chars().next();
    if !matches!(first, Some('[') | Some('{')) {
        return RankOneObjective::new(parse_csv_vector(text)?);
    }
    let inst: JsonInstance = serde_json::from_str(text).map_err(|e| {
        let msg = if e.is_data() {
            "unrecognized instance layout; expected a pair array or an object with z, h_s/h_r/h_d, or scene".to_string()
        } else {
            e.to_string()
        };
        parse_err(e.line(), msg)
    })?;
    match inst {
        JsonInstance::Pairs(v) | JsonInstance::Vector { z: v } => {
            if v.is_empty() {
                return Err(parse_err(1, "no entries"));
            }
            RankOneObjective::new(pairs(&v))
        }
        JsonInstance::Cascade { h_s, h_r, h_d } => {
            CascadedChannel::new(pairs(&h_s), pairs(&h_r), Complex64::new(h_d[0], h_d[1]))?
                .objective()
        }
        JsonInstance::Scene { scene } => build_model2_objective(&scene.to_scene()?),
    }
}
