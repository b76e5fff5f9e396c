use std::fs;
use std::path::Path;

use serde::Deserialize;
use serde_json::Value;

use super::{CliError, Context};
use crate::numkit::expr::eval_expr;
use crate::numkit::{Assignment, Real, Tier};
use crate::qindep::{expand_group, GroupSlice};

pub(crate) fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.display().to_string(), message: e.to_string() })?;
    }
    fs::write(path, bytes).map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}

fn json_error(path: &Path, e: serde_json::Error) -> CliError {
    CliError::Parse(format!("{}: {e}", path.display()))
}

fn value_text(v: &Value, path: &Path) -> Result<String, CliError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(CliError::Parse(format!("{}: expected a string or number, got {other}", path.display()))),
    }
}

/// A JSON array of strings or numbers, or one entry per non-empty line.
pub(crate) fn load_value_list(path: &Path) -> Result<Vec<String>, CliError> {
    let text = read_file(path)?;
    if text.trim_start().starts_with('[') {
        let vals: Vec<Value> = serde_json::from_str(&text).map_err(|e| json_error(path, e))?;
        vals.iter().map(|v| value_text(v, path)).collect()
    } else {
        Ok(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(String::from).collect())
    }
}

pub(crate) fn load_f64_list(path: &Path) -> Result<Vec<f64>, CliError> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| json_error(path, e))
}

#[derive(Deserialize)]
struct GroupFile {
    generators: Vec<Value>,
    radius: u32,
}

/// `{"generators": [...], "radius": r}`.
pub(crate) fn load_group(path: &Path, tier: Tier, prec: usize) -> Result<GroupSlice, CliError> {
    let g: GroupFile = serde_json::from_str(&read_file(path)?).map_err(|e| json_error(path, e))?;
    let gens = g
        .generators
        .iter()
        .map(|v| {
            let t = value_text(v, path)?;
            Ok(Real::parse(&t, tier, prec).context(format!("generator `{t}`"))?)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    if gens.is_empty() {
        return Ok(GroupSlice::trivial(tier));
    }
    Ok(expand_group(&gens, g.radius)?)
}

/// `name=expr` pairs evaluated at `prec` bits.
pub(crate) fn parse_assignment(items: &[String], prec: usize) -> Result<Assignment, CliError> {
    let mut out = Assignment::new();
    for item in items {
        let (name, expr) =
            item.split_once('=').ok_or_else(|| CliError::Usage(format!("--assign `{item}` is not name=value")))?;
        let v = eval_expr(expr.trim(), prec).context(format!("--assign {item}"))?;
        out.insert(name.trim().to_string(), v);
    }
    Ok(out)
}
