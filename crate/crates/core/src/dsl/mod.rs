//! The `.grs` check language: lexer, parser, printer and binder.

pub mod ast;
mod bind;
mod lexer;
mod parser;
mod printer;

use std::fmt;

pub use bind::{bind_document, scalar_expr, BoundCheck};
pub use parser::{parse, parse_expr};
pub use printer::{print, print_expr, print_statement};

/// Position in the source: 1-based line, 0-based column in characters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl Span {
    pub fn new(line: usize, col: usize) -> Self {
        Span { line, col }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, col {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: Span,
    /// The offending source line, when the text is at hand.
    pub excerpt: Option<String>,
}

impl Diagnostic {
    pub fn error(span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
            excerpt: None,
        }
    }

    pub fn with_excerpt(mut self, src: &str) -> Self {
        self.excerpt = src.lines().nth(self.span.line.saturating_sub(1)).map(str::to_string);
        self
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}: {}: {}", self.span, self.message)?;
        if let Some(line) = &self.excerpt {
            let pad: String = line.chars().take(self.span.col).map(|c| if c == '\t' { '\t' } else { ' ' }).collect();
            write!(f, "\n  | {line}\n  | {pad}^")?;
        }
        Ok(())
    }
}

/// Parses and binds `src`, attaching source excerpts to any diagnostics.
pub fn compile(src: &str) -> Result<Vec<BoundCheck>, Vec<Diagnostic>> {
    let attach = |ds: Vec<Diagnostic>| ds.into_iter().map(|d| d.with_excerpt(src)).collect::<Vec<_>>();
    let doc = parse(src).map_err(attach)?;
    bind_document(&doc).map_err(attach)
}
