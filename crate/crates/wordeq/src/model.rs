//! Printing models as `x = "…"` lines and reading them back.

use std::collections::BTreeMap;

use wordeq_core::Model;

use crate::{Input, InputError};

pub fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            c if c.is_control() => out.push_str(&format!("\\u{{{:x}}}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// One line per user variable, sorted by name. Integers print unquoted.
pub fn render(input: &Input, m: &Model) -> String {
    let mut lines: BTreeMap<String, String> = BTreeMap::new();
    for v in input.string_vars() {
        let val = m.get(v).map_or("", String::as_str);
        lines.insert(input.display_name(v), quote(val));
    }
    for i in &input.ints {
        lines.insert(i.name.clone(), input.int_value(i, m).to_string());
    }
    lines.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ParsedModel {
    pub strings: BTreeMap<String, String>,
    pub ints: BTreeMap<String, i64>,
}

/// Inverse of [`render`].
pub fn parse_model(text: &str) -> Result<ParsedModel, InputError> {
    let mut out = ParsedModel::default();
    for (k, line) in text.lines().enumerate() {
        let ln = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let Some((name, val)) = line.split_once(" = ") else {
            return Err(InputError::parse(ln, 1, "expected `name = value`"));
        };
        let col = name.chars().count() + 4;
        if let Some(body) = val.strip_prefix('"').and_then(|v| v.strip_suffix('"')) {
            let s = unquote(body).ok_or_else(|| InputError::parse(ln, col, "bad escape"))?;
            out.strings.insert(name.to_string(), s);
        } else {
            let n = val.parse().map_err(|_| InputError::parse(ln, col, "expected a string or an integer"))?;
            out.ints.insert(name.to_string(), n);
        }
    }
    Ok(out)
}

fn unquote(body: &str) -> Option<String> {
    let mut out = String::new();
    let mut cs = body.chars();
    while let Some(c) = cs.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match cs.next()? {
            '"' => out.push('"'),
            '\\' => out.push('\\'),
            'u' => {
                if cs.next()? != '{' {
                    return None;
                }
                let hex: String = cs.by_ref().take_while(|&c| c != '}').collect();
                out.push(char::from_u32(u32::from_str_radix(&hex, 16).ok()?)?);
            }
            _ => return None,
        }
    }
    Some(out)
}
