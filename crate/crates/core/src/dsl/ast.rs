use super::Span;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Wedge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
            BinOp::Wedge => "^w",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    Ident(String),
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call(String, Vec<Ast>),
    /// `expr @ LABEL`
    Label(Box<Ast>, String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ast {
    pub kind: ExprKind,
    pub span: Span,
}

impl Ast {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Ast { kind, span }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricDecl {
    Diag(Vec<Ast>),
    Matrix(Vec<Vec<Ast>>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Expr(Ast),
    List(Vec<Arg>, Span),
}

impl Arg {
    pub fn span(&self) -> Span {
        match self {
            Arg::Expr(a) => a.span,
            Arg::List(_, s) => *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckArg {
    pub name: Option<Name>,
    pub value: Arg,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SampleKind {
    Grid,
    Random,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleDecl {
    pub kind: SampleKind,
    pub ranges: Vec<(Ast, Ast)>,
    pub count: Ast,
    pub seed: Option<Ast>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bracket {
    pub i: Ast,
    pub j: Ast,
    pub k: Ast,
    pub coef: Option<Ast>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckStmt {
    pub entry: Name,
    pub args: Vec<CheckArg>,
    pub sample: SampleDecl,
    pub tol: Option<Ast>,
    pub alias: Option<Name>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Chart {
        name: Name,
        coords: Vec<Name>,
        metric: MetricDecl,
    },
    Field {
        name: Name,
        value: Ast,
    },
    Form {
        vector: bool,
        name: Name,
        degree: Ast,
        values: Option<Name>,
        value: Ast,
    },
    Algebra {
        name: Name,
        dim: Ast,
        brackets: Vec<Bracket>,
    },
    Check(CheckStmt),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Document {
    pub statements: Vec<Stmt>,
}
