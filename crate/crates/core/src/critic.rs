//! Parsing of model responses: critic feedback tags and heuristic code.

use alloc::string::{String, ToString};
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticFeedback {
    /// Reflection on the evolution direction.
    pub reflection: String,
    /// Critique with suggested changes.
    pub critique: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ParseError {
    MissingTag(&'static str),
    EmptyTag(&'static str),
    NoCode,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::MissingTag(t) => write!(f, "response has no <{t}>...</{t}> block"),
            ParseError::EmptyTag(t) => write!(f, "response has an empty <{t}> block"),
            ParseError::NoCode => f.write_str("response contains no function definition"),
        }
    }
}

/// Trimmed body of the first `<tag>...</tag>` pair.
pub fn tag_body<'a>(text: &'a str, tag: &'static str) -> Result<&'a str, ParseError> {
    let open = alloc::format!("<{tag}>");
    let close = alloc::format!("</{tag}>");
    let start = text.find(&open).ok_or(ParseError::MissingTag(tag))? + open.len();
    let len = text[start..].find(&close).ok_or(ParseError::MissingTag(tag))?;
    let body = text[start..start + len].trim();
    if body.is_empty() {
        return Err(ParseError::EmptyTag(tag));
    }
    Ok(body)
}

pub fn parse_critic(text: &str) -> Result<CriticFeedback, ParseError> {
    Ok(CriticFeedback {
        reflection: tag_body(text, "ref")?.to_string(),
        critique: tag_body(text, "ans")?.to_string(),
    })
}

pub fn parse_ans(text: &str) -> Result<String, ParseError> {
    tag_body(text, "ans").map(ToString::to_string)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtractedHeuristic {
    pub description: String,
    pub source: String,
}

/// Splits a heuristic response into its brace-delimited description and code.
///
/// Code is taken from the first fenced block that defines a function, or
/// failing that from the first `import`/`def` line to the end.
pub fn extract_candidate(text: &str) -> Result<ExtractedHeuristic, ParseError> {
    let (source, prose) = match fenced_code(text) {
        Some((code, before)) => (code.to_string(), before),
        None => {
            let start = code_start(text).ok_or(ParseError::NoCode)?;
            (text[start..].to_string(), &text[..start])
        }
    };
    let source = source.trim_matches('\n').trim_end().to_string();
    if !has_def(&source) {
        return Err(ParseError::NoCode);
    }
    let description = brace_span(prose)
        .or_else(|| brace_span(text))
        .map(|d| d.trim().to_string())
        .unwrap_or_else(|| first_line(prose));
    Ok(ExtractedHeuristic { description, source })
}

fn has_def(src: &str) -> bool {
    src.lines().any(|l| l.trim_start().starts_with("def "))
}

fn first_line(text: &str) -> String {
    text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("").to_string()
}

/// Body of the first fenced block containing a `def`, plus the text before it.
fn fenced_code(text: &str) -> Option<(&str, &str)> {
    let mut from = 0;
    while let Some(rel) = text[from..].find("```") {
        let fence = from + rel;
        let body_start = text[fence + 3..].find('\n').map(|i| fence + 3 + i + 1)?;
        let body_len = text[body_start..].find("```")?;
        let body = &text[body_start..body_start + body_len];
        if has_def(body) {
            return Some((body, &text[..fence]));
        }
        from = body_start + body_len + 3;
    }
    None
}

fn code_start(text: &str) -> Option<usize> {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let t = line.trim_start();
        if t.starts_with("import ") || t.starts_with("from ") || t.starts_with("def ") {
            return Some(offset);
        }
        offset += line.len();
    }
    None
}

/// Contents of the first balanced `{...}` span.
fn brace_span(text: &str) -> Option<&str> {
    let start = text.find('{')?;
    let mut depth = 0usize;
    for (i, c) in text[start..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    let body = &text[start + 1..start + i];
                    return (!body.trim().is_empty()).then_some(body);
                }
            }
            _ => {}
        }
    }
    None
}
