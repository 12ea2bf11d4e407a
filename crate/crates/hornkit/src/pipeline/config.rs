//! `key = value` pipeline configuration files.
//!
//! ```text
//! # comments run to the end of the line
//! mode = int
//! method = cpa
//! steps = specialise, strengthen
//! depth = 16
//! ```
//!
//! Keys: `mode`, `method`, `depth`, `kleene_iters`, `widening_delay`,
//! `join`, `max_iters`, `generalisation`, `max_unfold`, `max_defs`,
//! `max_rounds`, `steps`, `check_each`, `format`. Unset keys keep their
//! defaults; later lines override earlier ones.

use std::str::FromStr;

use serde::de::DeserializeOwned;

use super::{OutputFormat, PipelineError, PipelineSpec, StepKind};

fn kebab<T: DeserializeOwned>(v: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(v.to_string())).map_err(|_| format!("unknown value `{v}`"))
}

fn num(v: &str) -> Result<usize, String> {
    v.parse().map_err(|_| format!("expected a non-negative integer, got `{v}`"))
}

fn flag(v: &str) -> Result<bool, String> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(format!("expected true or false, got `{v}`")),
    }
}

/// Parses a comma- or whitespace-separated step list.
pub fn parse_steps(v: &str) -> Result<Vec<StepKind>, String> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(StepKind::from_str).collect()
}

fn set(spec: &mut PipelineSpec, key: &str, v: &str) -> Result<(), String> {
    let s = &mut spec.settings;
    match key {
        "mode" => s.mode = Some(v.parse()?),
        "method" => spec.method = v.parse()?,
        "depth" => s.td_depth = num(v)?,
        "kleene_iters" => s.kleene_iters = num(v)?,
        "widening_delay" => s.analysis.widening_delay = num(v)?,
        "join" => s.analysis.join = kebab(v)?,
        "max_iters" => s.analysis.max_iters = num(v)?,
        "generalisation" => s.specialise.generalisation = kebab(v)?,
        "max_unfold" => s.specialise.max_unfold = num(v)?,
        "max_defs" => s.specialise.max_defs = num(v)?,
        "max_rounds" => s.specialise.max_rounds = num(v)?,
        "steps" => spec.steps = parse_steps(v)?,
        "check_each" => spec.check_each = flag(v)?,
        "format" => spec.format = v.parse::<OutputFormat>()?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Applies the settings in `text` on top of `spec`.
pub fn apply_config(spec: &mut PipelineSpec, text: &str) -> Result<(), PipelineError> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| PipelineError::Config { line: i + 1, msg };
        let (k, v) = line.split_once('=').ok_or_else(|| err("expected `key = value`".into()))?;
        set(spec, k.trim(), v.trim()).map_err(err)?;
    }
    Ok(())
}

/// A spec built from the defaults and `text`.
pub fn parse_config(text: &str) -> Result<PipelineSpec, PipelineError> {
    let mut spec = PipelineSpec::default();
    apply_config(&mut spec, text)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyze::Join;
    use crate::pipeline::Method;
    use crate::syntax::Mode;
    use crate::transform::Generalisation;

    #[test]
    fn every_key_is_read() {
        let text = "# pipeline\nmode = int\nmethod = td\ndepth = 7  # bound\nkleene_iters=5\n\
            widening_delay = 2\njoin = union-then-hull\nmax_iters = 9\ngeneralisation = hull-widening\n\
            max_unfold = 1\nmax_defs = 10\nmax_rounds = 11\nsteps = specialise, qa reverse\n\
            check_each = yes\nformat = json\n";
        let s = parse_config(text).unwrap();
        assert_eq!(s.settings.mode, Some(Mode::Integer));
        assert_eq!(s.method, Method::Td);
        assert_eq!(s.settings.td_depth, 7);
        assert_eq!(s.settings.kleene_iters, 5);
        assert_eq!(s.settings.analysis.widening_delay, 2);
        assert_eq!(s.settings.analysis.join, Join::UnionThenHull);
        assert_eq!(s.settings.analysis.max_iters, 9);
        assert_eq!(s.settings.specialise.generalisation, Generalisation::HullWidening);
        assert_eq!(s.settings.specialise.max_unfold, 1);
        assert_eq!(s.settings.specialise.max_defs, 10);
        assert_eq!(s.settings.specialise.max_rounds, 11);
        assert_eq!(s.steps, vec![StepKind::Specialise, StepKind::Qa, StepKind::Reverse]);
        assert!(s.check_each);
        assert_eq!(s.format, OutputFormat::Json);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_config("mode = int\n\ndepth = many\n").unwrap_err();
        assert!(matches!(e, PipelineError::Config { line: 3, .. }), "{e}");
        assert!(matches!(parse_config("colour = red").unwrap_err(), PipelineError::Config { line: 1, .. }));
        assert!(matches!(parse_config("steps = fold").unwrap_err(), PipelineError::Config { line: 1, .. }));
        assert!(matches!(parse_config("just words").unwrap_err(), PipelineError::Config { line: 1, .. }));
    }
}
