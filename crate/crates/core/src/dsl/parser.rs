use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{Diagnostic, Span};

const KEYWORDS: &[&str] = &["chart", "field", "form", "vector", "algebra", "check"];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, Diagnostic>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn at_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == w)
    }

    fn unexpected(&self, what: &str) -> Diagnostic {
        Diagnostic::error(self.span(), format!("expected {what}, found {}", self.peek()))
    }

    fn expect(&mut self, t: Tok) -> PResult<Span> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&t.to_string()))
        }
    }

    fn expect_word(&mut self, w: &str) -> PResult<Span> {
        if self.at_word(w) {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(&format!("`{w}`")))
        }
    }

    fn name(&mut self) -> PResult<Name> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_keyword(&s) => {
                let span = self.bump().span;
                Ok(Name { text: s, span })
            }
            Tok::Ident(s) => Err(Diagnostic::error(
                self.span(),
                format!("`{s}` is a keyword and cannot be used as a name"),
            )),
            _ => Err(self.unexpected("a name")),
        }
    }

    fn comma_list<T>(&mut self, close: Tok, mut item: impl FnMut(&mut Self) -> PResult<T>) -> PResult<Vec<T>> {
        let mut out = Vec::new();
        if *self.peek() == close {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if *self.peek() == Tok::Comma {
                self.bump();
                continue;
            }
            self.expect(close.clone())?;
            return Ok(out);
        }
    }

    fn expr(&mut self) -> PResult<Ast> {
        self.expr_bp(0, None)
    }

    fn prefix(&mut self, after: Option<(&Tok, Span)>) -> PResult<Ast> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Ast::new(ExprKind::Num(v), span))
            }
            Tok::Ident(s) if !is_keyword(&s) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    let args = self.comma_list(Tok::RParen, |p| p.expr())?;
                    Ok(Ast::new(ExprKind::Call(s, args), span))
                } else {
                    Ok(Ast::new(ExprKind::Ident(s), span))
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Minus => {
                self.bump();
                let inner = self.expr_bp(40, Some((&Tok::Minus, span)))?;
                Ok(Ast::new(ExprKind::Neg(Box::new(inner)), span))
            }
            _ => Err(match after {
                Some((t, s)) => Diagnostic::error(s, format!("expected expression after {t}")),
                None => self.unexpected("an expression"),
            }),
        }
    }

    fn expr_bp(&mut self, min: u8, after: Option<(&Tok, Span)>) -> PResult<Ast> {
        let mut lhs = self.prefix(after)?;
        loop {
            let t = self.peek().clone();
            let (op, lbp, rbp) = match t {
                Tok::Plus => (BinOp::Add, 10, 11),
                Tok::Minus => (BinOp::Sub, 10, 11),
                Tok::Star => (BinOp::Mul, 30, 31),
                Tok::Slash => (BinOp::Div, 30, 31),
                Tok::Wedge => (BinOp::Wedge, 30, 31),
                Tok::Caret => (BinOp::Pow, 50, 50),
                Tok::At => {
                    if 20 < min {
                        break;
                    }
                    let span = self.bump().span;
                    let label = self.name().map_err(|_| {
                        Diagnostic::error(span, "expected a value label after '@'".to_string())
                    })?;
                    let s = lhs.span;
                    lhs = Ast::new(ExprKind::Label(Box::new(lhs), label.text), s);
                    continue;
                }
                _ => break,
            };
            if lbp < min {
                break;
            }
            let span = self.bump().span;
            let rhs = self.expr_bp(rbp, Some((&t, span)))?;
            let s = lhs.span;
            lhs = Ast::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), s);
        }
        Ok(lhs)
    }

    fn arg(&mut self) -> PResult<Arg> {
        if *self.peek() == Tok::LBracket {
            let span = self.bump().span;
            let items = self.comma_list(Tok::RBracket, |p| p.arg())?;
            Ok(Arg::List(items, span))
        } else {
            Ok(Arg::Expr(self.expr()?))
        }
    }

    fn check_arg(&mut self) -> PResult<CheckArg> {
        let named = matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Eq;
        let name = if named {
            let n = self.name()?;
            self.bump();
            Some(n)
        } else {
            None
        };
        Ok(CheckArg { name, value: self.arg()? })
    }

    fn sample(&mut self) -> PResult<SampleDecl> {
        let span = self.span();
        let kind = if self.at_word("grid") {
            SampleKind::Grid
        } else if self.at_word("random") {
            SampleKind::Random
        } else {
            return Err(self.unexpected("`grid` or `random`"));
        };
        self.bump();
        self.expect(Tok::LParen)?;
        let mut ranges = Vec::new();
        loop {
            let a = self.expr()?;
            self.expect(Tok::DotDot)?;
            let b = self.expr()?;
            ranges.push((a, b));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::Semi => {
                    self.bump();
                    break;
                }
                _ => return Err(self.unexpected("',' or ';'")),
            }
        }
        let count = self.expr()?;
        let mut seed = None;
        if kind == SampleKind::Random && *self.peek() == Tok::Comma {
            self.bump();
            self.expect_word("seed")?;
            seed = Some(self.expr()?);
        }
        self.expect(Tok::RParen)?;
        Ok(SampleDecl {
            kind,
            ranges,
            count,
            seed,
            span,
        })
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let span = self.span();
        let kw = match self.peek() {
            Tok::Ident(s) if is_keyword(s) => s.clone(),
            _ => return Err(self.unexpected("a statement (chart, field, form, vector, algebra or check)")),
        };
        self.bump();
        let kind = match kw.as_str() {
            "chart" => {
                let name = self.name()?;
                self.expect(Tok::LParen)?;
                let coords = self.comma_list(Tok::RParen, |p| p.name())?;
                self.expect_word("metric")?;
                let metric = if self.at_word("diag") {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    MetricDecl::Diag(self.comma_list(Tok::RParen, |p| p.expr())?)
                } else if self.at_word("matrix") {
                    self.bump();
                    self.expect(Tok::LBracket)?;
                    MetricDecl::Matrix(self.comma_list(Tok::RBracket, |p| {
                        p.expect(Tok::LBracket)?;
                        p.comma_list(Tok::RBracket, |q| q.expr())
                    })?)
                } else {
                    return Err(self.unexpected("`diag` or `matrix`"));
                };
                StmtKind::Chart { name, coords, metric }
            }
            "field" => {
                let name = self.name()?;
                self.expect(Tok::Eq)?;
                StmtKind::Field {
                    name,
                    value: self.expr()?,
                }
            }
            "form" | "vector" => {
                let name = self.name()?;
                self.expect(Tok::Colon)?;
                let degree = self.prefix(None)?;
                let values = if self.at_word("values") {
                    self.bump();
                    Some(self.name()?)
                } else {
                    None
                };
                self.expect(Tok::Eq)?;
                StmtKind::Form {
                    vector: kw == "vector",
                    name,
                    degree,
                    values,
                    value: self.expr()?,
                }
            }
            "algebra" => {
                let name = self.name()?;
                self.expect_word("dim")?;
                let dim = self.prefix(None)?;
                let mut brackets = Vec::new();
                if self.at_word("bracket") {
                    self.bump();
                    while *self.peek() == Tok::LParen {
                        let open = self.bump().span;
                        let items = self.comma_list(Tok::RParen, |p| p.expr())?;
                        if items.len() != 3 && items.len() != 4 {
                            return Err(Diagnostic::error(open, "a bracket is (i, j, k) or (i, j, k, coefficient)".to_string()));
                        }
                        let mut it = items.into_iter();
                        let (i, j, k) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                        brackets.push(Bracket { i, j, k, coef: it.next() });
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        }
                    }
                    if brackets.is_empty() {
                        return Err(self.unexpected("'('"));
                    }
                }
                StmtKind::Algebra { name, dim, brackets }
            }
            _ => {
                let entry = self.name()?;
                self.expect(Tok::LParen)?;
                let args = self.comma_list(Tok::RParen, |p| p.check_arg())?;
                self.expect_word("on")?;
                let sample = self.sample()?;
                let tol = if self.at_word("tol") {
                    self.bump();
                    Some(self.expr()?)
                } else {
                    None
                };
                let alias = if self.at_word("as") {
                    self.bump();
                    Some(self.name()?)
                } else {
                    None
                };
                StmtKind::Check(CheckStmt {
                    entry,
                    args,
                    sample,
                    tol,
                    alias,
                })
            }
        };
        Ok(Stmt { kind, span })
    }

    /// Skips to the next statement keyword.
    fn recover(&mut self) {
        self.bump();
        while !matches!(self.peek(), Tok::Eof) {
            if let Tok::Ident(s) = self.peek() {
                if is_keyword(s) {
                    return;
                }
            }
            self.bump();
        }
    }
}

/// Parses a whole document, collecting one diagnostic per broken statement.
pub fn parse(src: &str) -> Result<Document, Vec<Diagnostic>> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let mut doc = Document::default();
    let mut diags = Vec::new();
    while *p.peek() != Tok::Eof {
        match p.statement() {
            Ok(s) => doc.statements.push(s),
            Err(d) => {
                diags.push(d);
                p.recover();
            }
        }
    }
    if diags.is_empty() {
        Ok(doc)
    } else {
        Err(diags)
    }
}

/// Parses a single expression, as used by `eval`.
pub fn parse_expr(src: &str) -> Result<Ast, Vec<Diagnostic>> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr().map_err(|d| vec![d])?;
    if *p.peek() != Tok::Eof {
        return Err(vec![p.unexpected("end of input")]);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dangling_operator_diagnostic() {
        let d = parse("field f = 2 +").unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "expected expression after '+'");
        assert_eq!((d[0].span.line, d[0].span.col), (1, 12));
    }

    #[test]
    fn recovers_at_statement_boundaries() {
        let src = "field a = 1 +\nfield b = 2\nfield c = )\nfield d = 3";
        let d = parse(src).unwrap_err();
        assert_eq!(d.len(), 2);
        assert_eq!(d[1].span.line, 3);
    }

    #[test]
    fn negation_binds_looser_than_power() {
        let e = parse_expr("-x^2").unwrap();
        assert!(matches!(e.kind, ExprKind::Neg(ref inner) if matches!(inner.kind, ExprKind::Binary(BinOp::Pow, _, _))));
    }

    #[test]
    fn check_statement() {
        let doc = parse("check autoparallel_vector(u) on random(-2..2,-2..2,-2..2,-2..2; 1000, seed 7) tol 1e-9").unwrap();
        let StmtKind::Check(c) = &doc.statements[0].kind else { panic!() };
        assert_eq!(c.entry.text, "autoparallel_vector");
        assert_eq!(c.sample.ranges.len(), 4);
        assert!(c.tol.is_some() && c.sample.seed.is_some());
    }

    #[test]
    fn labels_bind_looser_than_products() {
        let e = parse_expr("a*dx @E1 + b*dy @E2").unwrap();
        let ExprKind::Binary(BinOp::Add, l, r) = e.kind else { panic!() };
        assert!(matches!(l.kind, ExprKind::Label(_, ref s) if s == "E1"));
        assert!(matches!(r.kind, ExprKind::Label(_, ref s) if s == "E2"));
    }
}
