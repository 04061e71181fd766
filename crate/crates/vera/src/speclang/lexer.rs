//! Indentation-aware lexer. Blocks are exactly four spaces per level;
//! newlines inside brackets are joined; `#` comments run to end of line.

use super::{Category, Diagnostic};

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Newline,
    Indent,
    Dedent,
    Eof,
    Def,
    If,
    Elif,
    Else,
    For,
    While,
    In,
    Return,
    Assert,
    And,
    Or,
    Not,
    True,
    False,
    None,
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    Plus,
    Minus,
    Star,
    Slash,
    SlashSlash,
    Percent,
    StarStar,
    EqEq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Assign,
    PlusEq,
    MinusEq,
    StarEq,
    SlashEq,
    SlashSlashEq,
    PercentEq,
    StarStarEq,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Dot,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Newline => "end of line".to_string(),
            Tok::Indent => "indent".to_string(),
            Tok::Dedent => "dedent".to_string(),
            Tok::Eof => "end of input".to_string(),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(v) => format!("'{v}'"),
            Tok::Real(v) => format!("'{v}'"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::Def => "'def'".to_string(),
            Tok::If => "'if'".to_string(),
            Tok::Elif => "'elif'".to_string(),
            Tok::Else => "'else'".to_string(),
            Tok::For => "'for'".to_string(),
            Tok::While => "'while'".to_string(),
            Tok::In => "'in'".to_string(),
            Tok::Return => "'return'".to_string(),
            Tok::Assert => "'assert'".to_string(),
            Tok::And => "'and'".to_string(),
            Tok::Or => "'or'".to_string(),
            Tok::Not => "'not'".to_string(),
            Tok::True => "'True'".to_string(),
            Tok::False => "'False'".to_string(),
            Tok::None => "'None'".to_string(),
            Tok::Plus => "'+'".to_string(),
            Tok::Minus => "'-'".to_string(),
            Tok::Star => "'*'".to_string(),
            Tok::Slash => "'/'".to_string(),
            Tok::SlashSlash => "'//'".to_string(),
            Tok::Percent => "'%'".to_string(),
            Tok::StarStar => "'**'".to_string(),
            Tok::EqEq => "'=='".to_string(),
            Tok::Ne => "'!='".to_string(),
            Tok::Lt => "'<'".to_string(),
            Tok::Le => "'<='".to_string(),
            Tok::Gt => "'>'".to_string(),
            Tok::Ge => "'>='".to_string(),
            Tok::Assign => "'='".to_string(),
            Tok::PlusEq => "'+='".to_string(),
            Tok::MinusEq => "'-='".to_string(),
            Tok::StarEq => "'*='".to_string(),
            Tok::SlashEq => "'/='".to_string(),
            Tok::SlashSlashEq => "'//='".to_string(),
            Tok::PercentEq => "'%='".to_string(),
            Tok::StarStarEq => "'**='".to_string(),
            Tok::LParen => "'('".to_string(),
            Tok::RParen => "')'".to_string(),
            Tok::LBracket => "'['".to_string(),
            Tok::RBracket => "']'".to_string(),
            Tok::LBrace => "'{'".to_string(),
            Tok::RBrace => "'}'".to_string(),
            Tok::Comma => "','".to_string(),
            Tok::Colon => "':'".to_string(),
            Tok::Dot => "'.'".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
}

/// Python keywords that exist but are deliberately outside the subset.
const REJECTED_KEYWORDS: &[&str] = &[
    "as", "async", "await", "break", "class", "continue", "del", "except", "finally", "from",
    "global", "import", "is", "lambda", "nonlocal", "pass", "raise", "try", "with", "yield",
];

fn err(line: u32, category: Category, message: impl Into<String>) -> Vec<Diagnostic> {
    vec![Diagnostic::new(line, category, message)]
}

pub fn lex(source: &str) -> Result<Vec<Token>, Vec<Diagnostic>> {
    let mut toks: Vec<Token> = Vec::new();
    let mut indent_stack: Vec<u32> = vec![0];
    let mut depth: u32 = 0;

    for (i, raw) in source.split('\n').enumerate() {
        let line_no = (i + 1) as u32;
        let body;
        if depth == 0 {
            let mut spaces: u32 = 0;
            for c in raw.chars() {
                match c {
                    ' ' => spaces += 1,
                    '\t' => {
                        return Err(err(
                            line_no,
                            Category::Syntax,
                            "tab in indentation; use 4-space indents",
                        ))
                    }
                    _ => break,
                }
            }
            let rest = &raw[spaces as usize..];
            let trimmed = rest.trim_end();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if spaces % 4 != 0 {
                return Err(err(
                    line_no,
                    Category::Syntax,
                    format!("indentation of {spaces} spaces is not a multiple of 4"),
                ));
            }
            let level = spaces / 4;
            let top = *indent_stack.last().unwrap();
            if level > top {
                if level != top + 1 {
                    return Err(err(line_no, Category::Syntax, "block indented by more than one level"));
                }
                indent_stack.push(level);
                toks.push(Token { tok: Tok::Indent, line: line_no });
            } else {
                while level < *indent_stack.last().unwrap() {
                    indent_stack.pop();
                    toks.push(Token { tok: Tok::Dedent, line: line_no });
                }
                if level != *indent_stack.last().unwrap() {
                    return Err(err(line_no, Category::Syntax, "unindent does not match any outer block"));
                }
            }
            body = rest;
        } else {
            body = raw;
        }

        scan_line(body, line_no, &mut depth, &mut toks)?;

        if depth == 0 {
            if let Some(last) = toks.last() {
                if last.tok != Tok::Newline && last.tok != Tok::Indent && last.tok != Tok::Dedent {
                    toks.push(Token { tok: Tok::Newline, line: line_no });
                }
            }
        }
    }

    let last_line = source.split('\n').count() as u32;
    if depth > 0 {
        return Err(err(last_line, Category::Syntax, "unclosed bracket at end of input"));
    }
    while indent_stack.len() > 1 {
        indent_stack.pop();
        toks.push(Token { tok: Tok::Dedent, line: last_line });
    }
    toks.push(Token { tok: Tok::Eof, line: last_line });
    Ok(toks)
}

fn scan_line(
    body: &str,
    line: u32,
    depth: &mut u32,
    toks: &mut Vec<Token>,
) -> Result<(), Vec<Diagnostic>> {
    let chars: Vec<char> = body.chars().collect();
    let mut i = 0usize;
    let push = |toks: &mut Vec<Token>, tok: Tok| toks.push(Token { tok, line });

    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' => i += 1,
            '\t' => return Err(err(line, Category::Syntax, "tab character in code")),
            '#' => break,
            '(' => {
                *depth += 1;
                push(toks, Tok::LParen);
                i += 1;
            }
            '[' => {
                *depth += 1;
                push(toks, Tok::LBracket);
                i += 1;
            }
            '{' => {
                *depth += 1;
                push(toks, Tok::LBrace);
                i += 1;
            }
            ')' | ']' | '}' => {
                if *depth == 0 {
                    return Err(err(line, Category::Syntax, format!("unmatched '{c}'")));
                }
                *depth -= 1;
                push(
                    toks,
                    match c {
                        ')' => Tok::RParen,
                        ']' => Tok::RBracket,
                        _ => Tok::RBrace,
                    },
                );
                i += 1;
            }
            '"' | '\'' => {
                let (s, next) = scan_string(&chars, i, line)?;
                push(toks, Tok::Str(s));
                i = next;
            }
            '0'..='9' => {
                let (tok, next) = scan_number(&chars, i, line)?;
                push(toks, tok);
                i = next;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "def" => Tok::Def,
                    "if" => Tok::If,
                    "elif" => Tok::Elif,
                    "else" => Tok::Else,
                    "for" => Tok::For,
                    "while" => Tok::While,
                    "in" => Tok::In,
                    "return" => Tok::Return,
                    "assert" => Tok::Assert,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    "not" => Tok::Not,
                    "True" => Tok::True,
                    "False" => Tok::False,
                    "None" => Tok::None,
                    w if REJECTED_KEYWORDS.contains(&w) => {
                        return Err(err(
                            line,
                            Category::Construct,
                            format!("keyword '{w}' is not part of the language"),
                        ))
                    }
                    _ => Tok::Ident(word),
                };
                push(toks, tok);
            }
            _ => {
                let (tok, next) = scan_operator(&chars, i, line)?;
                push(toks, tok);
                i = next;
            }
        }
    }
    Ok(())
}

fn scan_string(chars: &[char], start: usize, line: u32) -> Result<(String, usize), Vec<Diagnostic>> {
    let quote = chars[start];
    let mut out = String::new();
    let mut i = start + 1;
    while i < chars.len() {
        let c = chars[i];
        if c == quote {
            return Ok((out, i + 1));
        }
        if c == '\\' {
            i += 1;
            let esc = chars.get(i).copied().ok_or_else(|| {
                err(line, Category::Syntax, "unterminated string literal")
            })?;
            match esc {
                'n' => out.push('\n'),
                't' => out.push('\t'),
                '\\' => out.push('\\'),
                '\'' => out.push('\''),
                '"' => out.push('"'),
                other => {
                    return Err(err(
                        line,
                        Category::Syntax,
                        format!("unknown escape '\\{other}' in string"),
                    ))
                }
            }
            i += 1;
        } else {
            out.push(c);
            i += 1;
        }
    }
    Err(err(line, Category::Syntax, "unterminated string literal"))
}

fn scan_number(chars: &[char], start: usize, line: u32) -> Result<(Tok, usize), Vec<Diagnostic>> {
    let mut i = start;
    while i < chars.len() && chars[i].is_ascii_digit() {
        i += 1;
    }
    let mut is_real = false;
    if i < chars.len() && chars[i] == '.' {
        if i + 1 >= chars.len() || !chars[i + 1].is_ascii_digit() {
            return Err(err(line, Category::Syntax, "malformed number: expected digits after '.'"));
        }
        is_real = true;
        i += 1;
        while i < chars.len() && chars[i].is_ascii_digit() {
            i += 1;
        }
    }
    if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
        let mut j = i + 1;
        if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
            j += 1;
        }
        if j < chars.len() && chars[j].is_ascii_digit() {
            is_real = true;
            i = j;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
        }
    }
    let text: String = chars[start..i].iter().collect();
    if is_real {
        let v: f64 = text
            .parse()
            .map_err(|_| err(line, Category::Syntax, format!("malformed number '{text}'")))?;
        if !v.is_finite() {
            return Err(err(line, Category::Syntax, format!("number '{text}' is out of range")));
        }
        Ok((Tok::Real(v), i))
    } else {
        let v: i64 = text.parse().map_err(|_| {
            err(line, Category::Syntax, format!("integer literal '{text}' is out of range"))
        })?;
        Ok((Tok::Int(v), i))
    }
}

fn scan_operator(chars: &[char], i: usize, line: u32) -> Result<(Tok, usize), Vec<Diagnostic>> {
    let c = chars[i];
    let c1 = chars.get(i + 1).copied();
    let c2 = chars.get(i + 2).copied();
    let tok3 = match (c, c1, c2) {
        ('*', Some('*'), Some('=')) => Some(Tok::StarStarEq),
        ('/', Some('/'), Some('=')) => Some(Tok::SlashSlashEq),
        _ => None,
    };
    if let Some(t) = tok3 {
        return Ok((t, i + 3));
    }
    let tok2 = match (c, c1) {
        ('*', Some('*')) => Some(Tok::StarStar),
        ('/', Some('/')) => Some(Tok::SlashSlash),
        ('=', Some('=')) => Some(Tok::EqEq),
        ('!', Some('=')) => Some(Tok::Ne),
        ('<', Some('=')) => Some(Tok::Le),
        ('>', Some('=')) => Some(Tok::Ge),
        ('+', Some('=')) => Some(Tok::PlusEq),
        ('-', Some('=')) => Some(Tok::MinusEq),
        ('*', Some('=')) => Some(Tok::StarEq),
        ('/', Some('=')) => Some(Tok::SlashEq),
        ('%', Some('=')) => Some(Tok::PercentEq),
        _ => None,
    };
    if let Some(t) = tok2 {
        return Ok((t, i + 2));
    }
    let tok1 = match c {
        '+' => Some(Tok::Plus),
        '-' => Some(Tok::Minus),
        '*' => Some(Tok::Star),
        '/' => Some(Tok::Slash),
        '%' => Some(Tok::Percent),
        '<' => Some(Tok::Lt),
        '>' => Some(Tok::Gt),
        '=' => Some(Tok::Assign),
        ',' => Some(Tok::Comma),
        ':' => Some(Tok::Colon),
        '.' => Some(Tok::Dot),
        _ => None,
    };
    match tok1 {
        Some(t) => Ok((t, i + 1)),
        None => Err(err(line, Category::Syntax, format!("unexpected character '{c}'"))),
    }
}
