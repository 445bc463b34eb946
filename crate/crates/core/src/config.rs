//! Flat `key = value` configuration files describing a channel.
//!
//! Grammar: one `key = value` pair per line, `#` starts a comment, blank
//! lines are ignored. Keys are dotted: `model_a.*` and `model_h.*` describe
//! the two fading laws, `noise_var` and `power` the physical-layer scalars
//! (both defaulting to 1). Unknown keys are rejected outright — a config
//! that parses is a config that was fully understood.
//!
//! ```text
//! # two-link example
//! model_a.family = gaussian-iid   # estimate N(0, s^2 I), error N(0, eps^2 I)
//! model_a.s   = 1.0
//! model_a.eps = 0.1
//! model_h.family = ring-phase     # estimate uniform on a radius-rho ring
//! model_h.rho = 1.0
//! model_h.eps = 0.1
//! noise_var = 1.0
//! power = 1.0
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use crate::channel::{ChannelConfig, FadingModel};
use crate::{Error, Result};

/// Every key the grammar accepts, for strictness diagnostics.
const ACCEPTED_KEYS: &str = "model_a.family, model_a.s, model_a.rho, model_a.eps, \
     model_h.family, model_h.s, model_h.rho, model_h.eps, noise_var, power";

fn parse_value(key: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>().map_err(|_| {
        Error::Config(format!("key `{key}`: expected a number, got `{raw}`"))
    })
}

/// One fading model from its dotted keys (`<prefix>.family` etc.),
/// consuming them from `pairs`.
fn take_model(prefix: &str, pairs: &mut BTreeMap<String, String>) -> Result<FadingModel> {
    let take = |pairs: &mut BTreeMap<String, String>, field: &str| -> Option<String> {
        pairs.remove(&format!("{prefix}.{field}"))
    };
    let family = take(pairs, "family")
        .ok_or_else(|| Error::Config(format!("missing key `{prefix}.family`")))?;
    let eps_raw = take(pairs, "eps")
        .ok_or_else(|| Error::Config(format!("missing key `{prefix}.eps`")))?;
    let eps = parse_value(&format!("{prefix}.eps"), &eps_raw)?;
    if eps <= 0.0 {
        return Err(Error::Config(format!(
            "key `{prefix}.eps`: estimation-error spread must be > 0 (got {eps}); \
             a zero-spread error has no finite entropy, which the model assumes"
        )));
    }
    let model = match family.as_str() {
        "gaussian-iid" => {
            let s_raw = take(pairs, "s")
                .ok_or_else(|| Error::Config(format!("missing key `{prefix}.s`")))?;
            let s = parse_value(&format!("{prefix}.s"), &s_raw)?;
            FadingModel::gaussian_iid(s, eps)
        }
        "ring-phase" => {
            let rho_raw = take(pairs, "rho")
                .ok_or_else(|| Error::Config(format!("missing key `{prefix}.rho`")))?;
            let rho = parse_value(&format!("{prefix}.rho"), &rho_raw)?;
            FadingModel::ring_phase(rho, eps)
        }
        other => {
            return Err(Error::Config(format!(
                "key `{prefix}.family`: unknown family `{other}`; expected gaussian-iid or ring-phase"
            )))
        }
    };
    model.map_err(|e| Error::Config(format!("{prefix}: {e}")))
}

/// Parses configuration text into a [`ChannelConfig`]. See the module
/// documentation for the grammar.
pub fn parse_channel_config(text: &str) -> Result<ChannelConfig> {
    let mut pairs: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected `key = value`, got `{line}`", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(Error::Config(format!("line {}: key `{key}` has no value", lineno + 1)));
        }
        if pairs.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }

    let model_a = take_model("model_a", &mut pairs)?;
    let model_h = take_model("model_h", &mut pairs)?;
    let noise_var = match pairs.remove("noise_var") {
        Some(raw) => parse_value("noise_var", &raw)?,
        None => 1.0,
    };
    let power = match pairs.remove("power") {
        Some(raw) => parse_value("power", &raw)?,
        None => 1.0,
    };
    if let Some((key, _)) = pairs.into_iter().next() {
        return Err(Error::Config(format!(
            "unknown key `{key}`; accepted keys: {ACCEPTED_KEYS}"
        )));
    }
    ChannelConfig::new(model_a, model_h, noise_var, power)
        .map_err(|e| Error::Config(e.to_string()))
}

/// Reads and parses a configuration file.
pub fn load_channel_config(path: &Path) -> Result<ChannelConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_channel_config(&text)
}
