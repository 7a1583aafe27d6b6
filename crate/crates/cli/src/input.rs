use std::sync::Arc;

use sumset_core::grid::ConstructibleSet;
use sumset_core::{FiniteAbelianGroup, GroupSubset, SetSpec};

/// Reads `@path` arguments from disk; anything else is taken literally.
pub fn load(arg: &str) -> Result<String, String> {
    match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}")),
        None => Ok(arg.to_string()),
    }
}

/// Byte offset of serde_json's 1-based line/column position.
pub fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text
        .split_inclusive('\n')
        .take(line.saturating_sub(1))
        .map(str::len)
        .sum();
    before + column.saturating_sub(1)
}

pub fn json_error(flag: &str, text: &str, e: &serde_json::Error) -> String {
    format!(
        "{flag}: invalid JSON at byte {} (line {}, column {}): {e}",
        byte_offset(text, e.line(), e.column()),
        e.line(),
        e.column()
    )
}

pub fn group(literal: &str) -> Result<Arc<FiniteAbelianGroup>, String> {
    literal
        .parse::<FiniteAbelianGroup>()
        .map(Arc::new)
        .map_err(|e| format!("--group: {e}"))
}

/// A JSON set literal, or `"0,1,4"` for cyclic groups.
pub fn subset(
    flag: &str,
    arg: &str,
    g: &Arc<FiniteAbelianGroup>,
    seed: u64,
) -> Result<GroupSubset, String> {
    let text = load(arg)?;
    let t = text.trim();
    if t.starts_with('{') {
        let spec: SetSpec = serde_json::from_str(t).map_err(|e| json_error(flag, t, &e))?;
        return spec.build(g.clone(), seed).map_err(|e| format!("{flag}: {e}"));
    }
    if !g.is_cyclic() {
        return Err(format!("{flag}: the comma shorthand needs a cyclic group, got {g}"));
    }
    let mut idx = Vec::new();
    for (pos, part) in t.split(',').enumerate() {
        let p = part.trim();
        if p.is_empty() && t.is_empty() {
            break;
        }
        let v: u64 = p
            .parse()
            .map_err(|_| format!("{flag}: item {} ({p:?}) is not a non-negative integer", pos + 1))?;
        if v >= g.order() as u64 {
            return Err(format!("{flag}: {v} is out of range for {g}"));
        }
        idx.push(v as usize);
    }
    GroupSubset::from_indices(g.clone(), idx).map_err(|e| format!("{flag}: {e}"))
}

pub fn constructible(flag: &str, arg: &str) -> Result<ConstructibleSet, String> {
    let text = load(arg)?;
    let t = text.trim();
    let set = ConstructibleSet::from_json(t).map_err(|e| json_error(flag, t, &e))?;
    set.dim().map_err(|e| format!("{flag}: {e}"))?;
    Ok(set)
}

pub fn list<T: std::str::FromStr>(flag: &str, arg: &str) -> Result<Vec<T>, String> {
    arg.split(',')
        .map(|p| {
            p.trim()
                .parse()
                .map_err(|_| format!("{flag}: cannot parse {:?}", p.trim()))
        })
        .collect()
}

/// `"2,0;1,1"` → `[(2,0), (1,1)]`
pub fn pairs(arg: &str) -> Result<Vec<(u32, u32)>, String> {
    arg.split(';')
        .map(|p| {
            let v: Vec<u32> = list("--pairs", p)?;
            match v[..] {
                [m, n] => Ok((m, n)),
                _ => Err(format!("--pairs: expected m,n but got {p:?}")),
            }
        })
        .collect()
}
