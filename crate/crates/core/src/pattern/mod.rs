//! POS-sequence patterns and MWE candidate extraction.
//!
//! A pattern line looks like `np2: NOUN ADP{0,1} NOUN`. Items are UPOS tags,
//! alternations `(ADJ|PROPN)`, the wildcard `*`, and any of those followed by
//! a repetition bound `{m,n}` (or `{m}`), with `0 <= m <= n <= 8`.

mod extract;
mod matcher;
mod parse;

pub use extract::{
    dice_score, extract_candidates, extract_candidates_with, read_candidates, select_candidates,
    write_candidates, MweCandidate, Occurrence,
};
pub use matcher::{match_patterns, PatternMatch, PatternSet};
pub use parse::{parse_pattern, parse_pattern_file};

use std::fmt;

use crate::error::{PatternError, UPOS_TAGS};

pub const MAX_REPEAT: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternItem {
    Literal(String),
    Alternation(Vec<String>),
    Wildcard,
    Repeat {
        item: Box<PatternItem>,
        min: usize,
        max: usize,
    },
}

impl PatternItem {
    /// Fewest tokens this item can consume.
    pub fn min_len(&self) -> usize {
        match self {
            PatternItem::Repeat { min, .. } => *min,
            _ => 1,
        }
    }

    /// True if the item accepts a token with this POS tag. For a repeat
    /// this is the test applied to each repeated token.
    pub fn accepts(&self, pos: &str) -> bool {
        match self {
            PatternItem::Literal(tag) => tag == pos,
            PatternItem::Alternation(tags) => tags.iter().any(|t| t == pos),
            PatternItem::Wildcard => true,
            PatternItem::Repeat { item, .. } => item.accepts(pos),
        }
    }
}

impl fmt::Display for PatternItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternItem::Literal(tag) => f.write_str(tag),
            PatternItem::Alternation(tags) => write!(f, "({})", tags.join("|")),
            PatternItem::Wildcard => f.write_str("*"),
            PatternItem::Repeat { item, min, max } => write!(f, "{item}{{{min},{max}}}"),
        }
    }
}

/// A named sequence of items that must match consecutive tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    name: String,
    items: Vec<PatternItem>,
}

impl Pattern {
    /// Validates tags, repetition bounds and the two-token minimum.
    pub fn new(name: impl Into<String>, items: Vec<PatternItem>) -> Result<Self, PatternError> {
        let name = name.into();
        if items.is_empty() {
            return Err(PatternError::Empty { name });
        }
        for item in &items {
            validate_item(&name, item, false)?;
        }
        let min_len: usize = items.iter().map(PatternItem::min_len).sum();
        if min_len < 2 {
            return Err(PatternError::TooShort { name, min_len });
        }
        Ok(Pattern { name, items })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn items(&self) -> &[PatternItem] {
        &self.items
    }

    pub fn min_len(&self) -> usize {
        self.items.iter().map(PatternItem::min_len).sum()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name)?;
        for item in &self.items {
            write!(f, " {item}")?;
        }
        Ok(())
    }
}

fn validate_item(name: &str, item: &PatternItem, nested: bool) -> Result<(), PatternError> {
    let check_tag = |tag: &String| {
        if UPOS_TAGS.contains(&tag.as_str()) {
            Ok(())
        } else {
            Err(PatternError::UnknownTag { tag: tag.clone() })
        }
    };
    match item {
        PatternItem::Literal(tag) => check_tag(tag),
        PatternItem::Alternation(tags) => {
            if tags.is_empty() {
                return Err(PatternError::Syntax {
                    name: name.to_string(),
                    message: "empty alternation".into(),
                });
            }
            tags.iter().try_for_each(check_tag)
        }
        PatternItem::Wildcard => Ok(()),
        PatternItem::Repeat { item, min, max } => {
            if nested || matches!(**item, PatternItem::Repeat { .. }) {
                return Err(PatternError::Syntax {
                    name: name.to_string(),
                    message: "nested repetition".into(),
                });
            }
            if min > max || *max > MAX_REPEAT {
                return Err(PatternError::RepeatBounds {
                    name: name.to_string(),
                    min: *min,
                    max: *max,
                });
            }
            validate_item(name, item, true)
        }
    }
}
