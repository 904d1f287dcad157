use std::fmt;

use num_bigint::BigInt;

use super::diag::Diagnostic;

macro_rules! keywords {
    ($($variant:ident => $text:literal,)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
        pub enum Kw { $($variant,)* }

        impl Kw {
            pub fn as_str(self) -> &'static str {
                match self { $(Kw::$variant => $text,)* }
            }

            fn lookup(s: &str) -> Option<Kw> {
                match s { $($text => Some(Kw::$variant),)* _ => None }
            }
        }
    };
}

keywords! {
    Concept => "Concept",
    Enhancement => "Enhancement",
    Realization => "Realization",
    Facility => "Facility",
    For => "for",
    Of => "of",
    Uses => "uses",
    Type => "Type",
    TypeParam => "type",
    Is => "is",
    Modeled => "modeled",
    By => "by",
    Constraint => "constraint",
    Operation => "Operation",
    Procedure => "Procedure",
    Recursive => "Recursive",
    Requires => "requires",
    Ensures => "ensures",
    Maintaining => "maintaining",
    Decreasing => "decreasing",
    Changing => "changing",
    While => "While",
    Do => "do",
    If => "If",
    Then => "then",
    Else => "else",
    Var => "Var",
    End => "end",
    Updates => "updates",
    Restores => "restores",
    Replaces => "replaces",
    Evaluates => "evaluates",
    Alters => "alters",
    Clears => "clears",
    Preserves => "preserves",
    And => "and",
    Not => "not",
    Implies => "implies",
    True => "true",
    False => "false",
    Theorem => "Theorem",
    ForAll => "For",
    All => "all",
    IfMath => "if",
    Triggers => "triggers",
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sym {
    Eq,
    Ne,
    Le,
    Lt,
    Gt,
    Plus,
    Minus,
    Assign,
    Swap,
    Hash,
    Concat,
    Bar,
    Semi,
    Colon,
    Comma,
    LParen,
    RParen,
}

impl Sym {
    pub fn as_str(self) -> &'static str {
        match self {
            Sym::Eq => "=",
            Sym::Ne => "/=",
            Sym::Le => "<=",
            Sym::Lt => "<",
            Sym::Gt => ">",
            Sym::Plus => "+",
            Sym::Minus => "-",
            Sym::Assign => ":=",
            Sym::Swap => ":=:",
            Sym::Hash => "#",
            Sym::Concat => "o",
            Sym::Bar => "|",
            Sym::Semi => ";",
            Sym::Colon => ":",
            Sym::Comma => ",",
            Sym::LParen => "(",
            Sym::RParen => ")",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Kw(Kw),
    Ident(String),
    Int(BigInt),
    Sym(Sym),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Kw(k) => write!(f, "kw({})", k.as_str()),
            Tok::Ident(s) => write!(f, "id({s})"),
            Tok::Int(n) => write!(f, "int({n})"),
            Tok::Sym(Sym::Bar) => write!(f, "bar"),
            Tok::Sym(Sym::Semi) => write!(f, "semi"),
            Tok::Sym(s) => write!(f, "op({})", s.as_str()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
}

/// Splits source text into tokens. Whitespace, `-- line` comments and
/// `(* block *)` comments are dropped.
pub fn tokenize(src: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut errors = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);

    let bump = |i: &mut usize, line: &mut u32, col: &mut u32| {
        if chars[*i] == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
        *i += 1;
    };

    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        let next = chars.get(i + 1).copied();
        if c.is_whitespace() {
            bump(&mut i, &mut line, &mut col);
            continue;
        }
        if c == '-' && next == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                bump(&mut i, &mut line, &mut col);
            }
            continue;
        }
        if c == '(' && next == Some('*') {
            bump(&mut i, &mut line, &mut col);
            bump(&mut i, &mut line, &mut col);
            let mut closed = false;
            while i < chars.len() {
                if chars[i] == '*' && chars.get(i + 1) == Some(&')') {
                    bump(&mut i, &mut line, &mut col);
                    bump(&mut i, &mut line, &mut col);
                    closed = true;
                    break;
                }
                bump(&mut i, &mut line, &mut col);
            }
            if !closed {
                errors.push(Diagnostic::error("unterminated comment", tl, tc));
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                bump(&mut i, &mut line, &mut col);
            }
            while i < chars.len() && chars[i] == '\'' {
                bump(&mut i, &mut line, &mut col);
            }
            let word: String = chars[start..i].iter().collect();
            let tok = if word == "o" {
                Tok::Sym(Sym::Concat)
            } else if let Some(k) = Kw::lookup(&word) {
                Tok::Kw(k)
            } else {
                Tok::Ident(word)
            };
            out.push(Token { tok, line: tl, col: tc });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                bump(&mut i, &mut line, &mut col);
            }
            let digits: String = chars[start..i].iter().collect();
            let n: BigInt = digits.parse().expect("ascii digits");
            out.push(Token {
                tok: Tok::Int(n),
                line: tl,
                col: tc,
            });
            continue;
        }
        let (sym, width) = match (c, next, chars.get(i + 2).copied()) {
            (':', Some('='), Some(':')) => (Sym::Swap, 3),
            (':', Some('='), _) => (Sym::Assign, 2),
            ('/', Some('='), _) => (Sym::Ne, 2),
            ('<', Some('='), _) => (Sym::Le, 2),
            ('=', ..) => (Sym::Eq, 1),
            ('<', ..) => (Sym::Lt, 1),
            ('>', ..) => (Sym::Gt, 1),
            ('+', ..) => (Sym::Plus, 1),
            ('-', ..) => (Sym::Minus, 1),
            ('#', ..) => (Sym::Hash, 1),
            ('|', ..) => (Sym::Bar, 1),
            (';', ..) => (Sym::Semi, 1),
            (':', ..) => (Sym::Colon, 1),
            (',', ..) => (Sym::Comma, 1),
            ('(', ..) => (Sym::LParen, 1),
            (')', ..) => (Sym::RParen, 1),
            _ => {
                errors.push(Diagnostic::error(format!("unexpected character `{c}`"), tl, tc));
                bump(&mut i, &mut line, &mut col);
                continue;
            }
        };
        for _ in 0..width {
            bump(&mut i, &mut line, &mut col);
        }
        out.push(Token {
            tok: Tok::Sym(sym),
            line: tl,
            col: tc,
        });
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}
