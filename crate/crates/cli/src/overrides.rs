//! Layering of command-line overrides onto TOML config tables.

use anyhow::{bail, Context, Result};
use toml::{Table, Value};

/// Parses `raw` as a TOML value, falling back to a bare string so that
/// `--set learner.kind=knn` needs no quoting.
pub fn parse_value(raw: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

/// Sets `path` (dot-separated) in `table`, creating intermediate tables.
pub fn set_path(table: &mut Table, path: &str, value: Value) -> Result<()> {
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        bail!("malformed key `{path}`");
    }
    let (last, parents) = keys.split_last().expect("non-empty split");
    let mut cur = table;
    for key in parents {
        let slot = cur
            .entry(key.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = match slot {
            Value::Table(t) => t,
            _ => bail!("`{key}` in `{path}` is not a table"),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

/// Applies one `key=value` assignment.
pub fn apply_assignment(table: &mut Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .with_context(|| format!("expected key=value, got `{assignment}`"))?;
    set_path(table, key.trim(), parse_value(raw.trim()))
}

/// Expands the `--dataset` shorthand: `circle:1`, `sea:3` or `file:PATH`.
pub fn dataset_table(spec: &str) -> Result<Value> {
    let (kind, arg) = spec.split_once(':').with_context(|| {
        format!("dataset `{spec}`: expected FAMILY:CONCEPT, sea:FUNCTION or file:PATH")
    })?;
    let mut t = Table::new();
    match kind {
        "sea" => {
            t.insert("type".into(), "sea".into());
            t.insert(
                "function".into(),
                Value::Integer(arg.parse().context("SEA function")?),
            );
        }
        "file" => {
            t.insert("type".into(), "file".into());
            t.insert("path".into(), arg.into());
        }
        family => {
            t.insert("type".into(), "synthetic".into());
            t.insert("family".into(), family.into());
            t.insert(
                "concept".into(),
                Value::Integer(arg.parse().context("concept")?),
            );
        }
    }
    Ok(Value::Table(t))
}
