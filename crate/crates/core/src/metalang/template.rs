//! Facet templates: facet lines that may mention concept parameters.
//!
//! A template line may start with a guard `[$param: v1 v2 ...]`; the line is
//! kept only when the parameter's value is one of the listed values. Inside
//! the line `$name` is replaced by the parameter value (child references are
//! `$0`, `$1`, ... and are left alone).

use super::scan::quote;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Guard {
    pub param: String,
    pub values: Vec<String>,
}

fn is_param_start(c: char) -> bool {
    c.is_ascii_lowercase()
}

fn is_param_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_'
}

/// Splits off a leading guard. Errors describe a malformed guard.
pub fn split_guard(line: &str) -> Result<(Option<Guard>, &str), String> {
    let trimmed = line.trim_start();
    let Some(rest) = trimmed.strip_prefix("[$") else {
        return Ok((None, line));
    };
    let Some(close) = rest.find(']') else {
        return Err("unterminated guard".to_string());
    };
    let inner = &rest[..close];
    let Some((param, values)) = inner.split_once(':') else {
        return Err("guard must read `[$param: value ...]`".to_string());
    };
    let param = param.trim();
    if !param.starts_with(is_param_start) || !param.chars().all(is_param_char) {
        return Err(format!("bad guard parameter `{param}`"));
    }
    let values: Vec<String> = values.split_whitespace().map(str::to_string).collect();
    if values.is_empty() {
        return Err("guard lists no values".to_string());
    }
    Ok((Some(Guard { param: param.to_string(), values }), &rest[close + 1..]))
}

/// Parameter names mentioned as `$name`, in order of first occurrence,
/// including the guard parameter.
pub fn param_refs(line: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '$' && chars.get(i + 1).copied().is_some_and(is_param_start) {
            let start = i + 1;
            i = start;
            while i < chars.len() && is_param_char(chars[i]) {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            if !out.contains(&name) {
                out.push(name);
            }
        } else {
            i += 1;
        }
    }
    out
}

/// Replaces every `$name` for which `value` yields a replacement.
pub fn substitute(line: &str, value: impl Fn(&str) -> Option<String>) -> String {
    let chars: Vec<char> = line.chars().collect();
    let mut out = String::with_capacity(line.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] == '$' && chars.get(i + 1).copied().is_some_and(is_param_start) {
            let start = i + 1;
            let mut j = start;
            while j < chars.len() && is_param_char(chars[j]) {
                j += 1;
            }
            let name: String = chars[start..j].iter().collect();
            if let Some(v) = value(&name) {
                out.push_str(&v);
                i = j;
                continue;
            }
        }
        out.push(chars[i]);
        i += 1;
    }
    out
}

/// Replaces every quoted literal spelled exactly `from` by `to`.
pub fn rename_literal(line: &str, from: &str, to: &str) -> String {
    rename_literals(line, |s| (s == from).then(|| to.to_string()))
}

/// Replaces quoted literals in one pass, so renames never chain.
pub fn rename_literals(line: &str, rename: impl Fn(&str) -> Option<String>) -> String {
    let chars: Vec<char> = line.chars().collect();
    let mut out = String::with_capacity(line.len());
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '"' {
            // Comments end the meaningful part of the line.
            if chars[i] == '#' {
                out.extend(&chars[i..]);
                break;
            }
            out.push(chars[i]);
            i += 1;
            continue;
        }
        let start = i;
        let mut content = String::new();
        i += 1;
        let mut closed = false;
        while i < chars.len() {
            match chars[i] {
                '"' => {
                    closed = true;
                    i += 1;
                    break;
                }
                '\\' if i + 1 < chars.len() => {
                    content.push(chars[i + 1]);
                    i += 2;
                }
                c => {
                    content.push(c);
                    i += 1;
                }
            }
        }
        match rename(&content) {
            Some(to) if closed => out.push_str(&quote(&to)),
            _ => out.extend(&chars[start..i]),
        }
    }
    out
}

/// Quoted literals of a line in order (used to validate rename slots).
pub fn literals(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        match chars[i] {
            '#' => break,
            '"' => {
                let mut content = String::new();
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    if chars[i] == '\\' && i + 1 < chars.len() {
                        i += 1;
                    }
                    content.push(chars[i]);
                    i += 1;
                }
                out.push(content);
                i += 1;
            }
            _ => i += 1,
        }
    }
    out
}
