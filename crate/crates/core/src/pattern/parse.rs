use std::collections::HashSet;
use std::iter::Peekable;
use std::str::Chars;

use super::{Pattern, PatternItem};
use crate::error::PatternError;
use crate::{Error, Result};

/// Parses a single `name: ITEM+` line.
pub fn parse_pattern(line: &str) -> Result<Pattern, PatternError> {
    let (name, body) = line.split_once(':').ok_or(PatternError::MissingName)?;
    let name = name.trim();
    if name.is_empty() || name.contains(char::is_whitespace) {
        return Err(PatternError::MissingName);
    }
    check_parens(name, body)?;
    let mut chars = body.chars().peekable();
    let mut items = Vec::new();
    loop {
        while chars.next_if(|c| c.is_whitespace()).is_some() {}
        if chars.peek().is_none() {
            break;
        }
        let atom = parse_atom(name, &mut chars)?;
        let item = match chars.peek() {
            Some('{') => {
                chars.next();
                let (min, max) = parse_bounds(name, &mut chars)?;
                PatternItem::Repeat {
                    item: Box::new(atom),
                    min,
                    max,
                }
            }
            _ => atom,
        };
        match chars.peek() {
            None => {}
            Some(c) if c.is_whitespace() => {}
            Some(')') => return Err(unbalanced(name)),
            Some('{') => return Err(syntax(name, "nested repetition")),
            Some(c) => return Err(syntax(name, format!("unexpected {c:?} after item"))),
        }
        items.push(item);
    }
    Pattern::new(name, items)
}

fn check_parens(name: &str, body: &str) -> Result<(), PatternError> {
    let mut depth = 0i32;
    for c in body.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if !(0..=1).contains(&depth) {
            return Err(unbalanced(name));
        }
    }
    if depth != 0 {
        return Err(unbalanced(name));
    }
    Ok(())
}

fn parse_atom(name: &str, chars: &mut Peekable<Chars<'_>>) -> Result<PatternItem, PatternError> {
    match chars.next() {
        Some('*') => Ok(PatternItem::Wildcard),
        Some('(') => {
            let mut inner = String::new();
            loop {
                match chars.next() {
                    None => return Err(unbalanced(name)),
                    Some(')') => break,
                    Some('(') => return Err(unbalanced(name)),
                    Some(c) => inner.push(c),
                }
            }
            let tags: Vec<String> = inner.split('|').map(|t| t.trim().to_string()).collect();
            if tags.iter().any(String::is_empty) {
                return Err(syntax(name, "empty alternative in alternation"));
            }
            if tags.len() == 1 {
                Ok(PatternItem::Literal(tags.into_iter().next().unwrap()))
            } else {
                Ok(PatternItem::Alternation(tags))
            }
        }
        Some(')') => Err(unbalanced(name)),
        Some(c) if c.is_alphanumeric() || c == '_' => {
            let mut tag = String::from(c);
            while let Some(c) = chars.next_if(|c| c.is_alphanumeric() || *c == '_') {
                tag.push(c);
            }
            Ok(PatternItem::Literal(tag))
        }
        Some(c) => Err(syntax(name, format!("unexpected {c:?}"))),
        None => Err(syntax(name, "missing item")),
    }
}

fn parse_bounds(
    name: &str,
    chars: &mut Peekable<Chars<'_>>,
) -> Result<(usize, usize), PatternError> {
    let mut inner = String::new();
    loop {
        match chars.next() {
            None => return Err(syntax(name, "unterminated repetition bound")),
            Some('}') => break,
            Some(c) => inner.push(c),
        }
    }
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .map_err(|_| syntax(name, format!("invalid repetition bound {{{inner}}}")))
    };
    match inner.split_once(',') {
        Some((lo, hi)) => Ok((num(lo)?, num(hi)?)),
        None => {
            let n = num(&inner)?;
            Ok((n, n))
        }
    }
}

fn unbalanced(name: &str) -> PatternError {
    PatternError::Unbalanced {
        name: name.to_string(),
    }
}

fn syntax(name: &str, message: impl Into<String>) -> PatternError {
    PatternError::Syntax {
        name: name.to_string(),
        message: message.into(),
    }
}

/// Parses a pattern file: one pattern per line, `#` starts a comment line,
/// blank lines ignored. Names must be unique.
pub fn parse_pattern_file(text: &str) -> Result<Vec<Pattern>> {
    let mut patterns = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let pattern = parse_pattern(line).map_err(|e| Error::parse(i + 1, e.to_string()))?;
        if !seen.insert(pattern.name().to_string()) {
            let dup = PatternError::Duplicate {
                name: pattern.name().to_string(),
            };
            return Err(Error::parse(i + 1, dup.to_string()));
        }
        patterns.push(pattern);
    }
    Ok(patterns)
}
