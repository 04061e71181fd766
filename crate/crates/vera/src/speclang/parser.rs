//! Recursive-descent parser producing the syntax tree, with Python-like
//! operator precedence and comparison chaining.

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use super::{Category, Diagnostic};

pub fn parse(source: &str, role: Role) -> Result<Program, Vec<Diagnostic>> {
    let toks = lex(source)?;
    let mut p = Parser { toks, pos: 0 };
    p.parse_program(role).map_err(|d| vec![d])
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

    fn peek_at(&self, offset: usize) -> &Tok {
        let idx = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[idx].tok
    }

    fn line(&self) -> u32 {
        self.toks[self.pos].line
    }

    fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, context: &str) -> PResult<u32> {
        let line = self.line();
        if self.peek() == &tok {
            self.advance();
            Ok(line)
        } else {
            Err(self.unexpected(&format!("expected {} {}", tok.describe(), context)))
        }
    }

    fn unexpected(&self, detail: &str) -> Diagnostic {
        Diagnostic::new(
            self.line(),
            Category::Syntax,
            format!("{detail}, found {}", self.peek().describe()),
        )
    }

    fn expect_ident(&mut self, context: &str) -> PResult<(String, u32)> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok((name, line))
            }
            _ => Err(self.unexpected(&format!("expected a name {context}"))),
        }
    }

    fn parse_program(&mut self, role: Role) -> PResult<Program> {
        while self.eat(&Tok::Newline) {}
        let def_line = self.expect(Tok::Def, "to start the program")?;
        let (name, _) = self.expect_ident("after 'def'")?;
        if name != role.function_name() {
            return Err(Diagnostic::new(
                def_line,
                Category::Construct,
                format!("a {role} program must define '{}', found '{name}'", role.function_name()),
            ));
        }
        self.expect(Tok::LParen, "after the function name")?;
        let (param, _) = self.expect_ident("as the parameter")?;
        if param != role.param_name() {
            return Err(Diagnostic::new(
                def_line,
                Category::Construct,
                format!("{role} takes a single parameter named '{}'", role.param_name()),
            ));
        }
        self.expect(Tok::RParen, "after the parameter")?;
        self.expect(Tok::Colon, "after the signature")?;
        self.expect(Tok::Newline, "after ':'")?;
        self.expect(Tok::Indent, "to open the function body")?;
        let body = self.parse_stmts()?;
        self.expect(Tok::Dedent, "to close the function body")?;
        while self.eat(&Tok::Newline) {}
        if self.peek() != &Tok::Eof {
            return Err(Diagnostic::new(
                self.line(),
                Category::Construct,
                "only one top-level function is allowed".to_string(),
            ));
        }
        Ok(Program { role, name, param, body })
    }

    fn parse_stmts(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = Vec::new();
        while self.peek() != &Tok::Dedent && self.peek() != &Tok::Eof {
            out.push(self.parse_stmt()?);
        }
        if out.is_empty() {
            return Err(self.unexpected("expected at least one statement in the block"));
        }
        Ok(out)
    }

    fn parse_block(&mut self, context: &str) -> PResult<Vec<Stmt>> {
        self.expect(Tok::Colon, context)?;
        self.expect(Tok::Newline, "after ':'")?;
        self.expect(Tok::Indent, "to open the block")?;
        let body = self.parse_stmts()?;
        self.expect(Tok::Dedent, "to close the block")?;
        Ok(body)
    }

    fn parse_stmt(&mut self) -> PResult<Stmt> {
        match self.peek() {
            Tok::If => self.parse_if(),
            Tok::While => self.parse_while(),
            Tok::For => self.parse_for(),
            Tok::Return => self.parse_return(),
            Tok::Assert => self.parse_assert(),
            Tok::Ident(_) if self.looks_like_assignment() => self.parse_assign(),
            Tok::Ident(_) if self.is_aug_assign() => self.parse_aug_assign(),
            _ => {
                let line = Line(self.line());
                let expr = self.parse_expr()?;
                if self.peek() == &Tok::Assign {
                    return Err(Diagnostic::new(
                        self.line(),
                        Category::Construct,
                        "assignment targets must be plain names".to_string(),
                    ));
                }
                self.expect(Tok::Newline, "after the expression")?;
                Ok(Stmt::ExprStmt { line, expr })
            }
        }
    }

    /// True when the upcoming tokens are `name (, name)* =`.
    fn looks_like_assignment(&self) -> bool {
        let mut k = 0usize;
        loop {
            match self.peek_at(k) {
                Tok::Ident(_) => {}
                _ => return false,
            }
            match self.peek_at(k + 1) {
                Tok::Assign => return true,
                Tok::Comma => k += 2,
                _ => return false,
            }
        }
    }

    fn is_aug_assign(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_))
            && matches!(
                self.peek_at(1),
                Tok::PlusEq
                    | Tok::MinusEq
                    | Tok::StarEq
                    | Tok::SlashEq
                    | Tok::SlashSlashEq
                    | Tok::PercentEq
                    | Tok::StarStarEq
            )
    }

    fn parse_assign(&mut self) -> PResult<Stmt> {
        let line = Line(self.line());
        let mut targets = Vec::new();
        loop {
            let (name, _) = self.expect_ident("as an assignment target")?;
            targets.push(name);
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(Tok::Assign, "in the assignment")?;
        let values = self.parse_expr_list()?;
        if self.peek() == &Tok::Assign {
            return Err(Diagnostic::new(
                self.line(),
                Category::Construct,
                "chained assignment is not supported".to_string(),
            ));
        }
        if values.len() != 1 && values.len() != targets.len() {
            return Err(Diagnostic::new(
                line.0,
                Category::Arity,
                format!("cannot unpack {} values into {} targets", values.len(), targets.len()),
            ));
        }
        self.expect(Tok::Newline, "after the assignment")?;
        Ok(Stmt::Assign { line, targets, values })
    }

    fn parse_aug_assign(&mut self) -> PResult<Stmt> {
        let line = Line(self.line());
        let (target, _) = self.expect_ident("as an assignment target")?;
        let op = match self.advance() {
            Tok::PlusEq => BinOp::Add,
            Tok::MinusEq => BinOp::Sub,
            Tok::StarEq => BinOp::Mul,
            Tok::SlashEq => BinOp::Div,
            Tok::SlashSlashEq => BinOp::FloorDiv,
            Tok::PercentEq => BinOp::Mod,
            Tok::StarStarEq => BinOp::Pow,
            _ => unreachable!("guarded by is_aug_assign"),
        };
        let value = self.parse_expr()?;
        self.expect(Tok::Newline, "after the assignment")?;
        Ok(Stmt::AugAssign { line, target, op, value })
    }

    fn parse_if(&mut self) -> PResult<Stmt> {
        let line = Line(self.line());
        self.expect(Tok::If, "")?;
        let cond = self.parse_expr()?;
        let body = self.parse_block("after the if condition")?;
        let mut arms = vec![(cond, body)];
        let mut orelse = Vec::new();
        loop {
            if self.peek() == &Tok::Elif {
                self.advance();
                let cond = self.parse_expr()?;
                let body = self.parse_block("after the elif condition")?;
                arms.push((cond, body));
            } else if self.peek() == &Tok::Else {
                self.advance();
                orelse = self.parse_block("after 'else'")?;
                break;
            } else {
                break;
            }
        }
        Ok(Stmt::If { line, arms, orelse })
    }

    fn parse_while(&mut self) -> PResult<Stmt> {
        let line = Line(self.line());
        self.expect(Tok::While, "")?;
        let cond = self.parse_expr()?;
        let body = self.parse_block("after the while condition")?;
        Ok(Stmt::While { line, cond, body })
    }

    fn parse_for(&mut self) -> PResult<Stmt> {
        let line = Line(self.line());
        self.expect(Tok::For, "")?;
        let (var, _) = self.expect_ident("as the loop variable")?;
        self.expect(Tok::In, "after the loop variable")?;
        match self.peek().clone() {
            Tok::Ident(name) if name == "range" => {
                self.advance();
            }
            _ => {
                return Err(Diagnostic::new(
                    self.line(),
                    Category::Construct,
                    "for-loops must iterate over an explicit integer range(...)".to_string(),
                ))
            }
        }
        self.expect(Tok::LParen, "after 'range'")?;
        let range_args = self.parse_call_args()?;
        if range_args.is_empty() || range_args.len() > 3 {
            return Err(Diagnostic::new(
                line.0,
                Category::Arity,
                format!("range takes 1 to 3 arguments, got {}", range_args.len()),
            ));
        }
        let body = self.parse_block("after the range")?;
        Ok(Stmt::For { line, var, range_args, body })
    }

    fn parse_return(&mut self) -> PResult<Stmt> {
        let line = Line(self.line());
        self.expect(Tok::Return, "")?;
        let values = if self.peek() == &Tok::Newline {
            Vec::new()
        } else {
            let mut values = self.parse_expr_list()?;
            // `return (a, b)` and `return a, b` mean the same thing.
            if values.len() == 1 {
                if let Expr::Tuple { items, .. } = &values[0] {
                    values = items.clone();
                }
            }
            values
        };
        self.expect(Tok::Newline, "after the return value")?;
        Ok(Stmt::Return { line, values })
    }

    fn parse_assert(&mut self) -> PResult<Stmt> {
        let line = Line(self.line());
        self.expect(Tok::Assert, "")?;
        let cond = self.parse_expr()?;
        let message = if self.eat(&Tok::Comma) { Some(self.parse_expr()?) } else { None };
        self.expect(Tok::Newline, "after the assertion")?;
        Ok(Stmt::Assert { line, cond, message })
    }

    fn parse_expr_list(&mut self) -> PResult<Vec<Expr>> {
        let mut out = vec![self.parse_expr()?];
        while self.eat(&Tok::Comma) {
            out.push(self.parse_expr()?);
        }
        Ok(out)
    }

    fn parse_expr(&mut self) -> PResult<Expr> {
        self.parse_or()
    }

    fn parse_or(&mut self) -> PResult<Expr> {
        let line = Line(self.line());
        let first = self.parse_and()?;
        if self.peek() != &Tok::Or {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.eat(&Tok::Or) {
            operands.push(self.parse_and()?);
        }
        Ok(Expr::BoolChain { line, op: BoolOp::Or, operands })
    }

    fn parse_and(&mut self) -> PResult<Expr> {
        let line = Line(self.line());
        let first = self.parse_not()?;
        if self.peek() != &Tok::And {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.eat(&Tok::And) {
            operands.push(self.parse_not()?);
        }
        Ok(Expr::BoolChain { line, op: BoolOp::And, operands })
    }

    fn parse_not(&mut self) -> PResult<Expr> {
        if self.peek() == &Tok::Not {
            let line = Line(self.line());
            self.advance();
            let operand = Box::new(self.parse_not()?);
            return Ok(Expr::Unary { line, op: UnaryOp::Not, operand });
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> PResult<Expr> {
        let line = Line(self.line());
        let first = self.parse_arith()?;
        let mut rest = Vec::new();
        loop {
            let op = match self.peek() {
                Tok::EqEq => CmpOp::Eq,
                Tok::Ne => CmpOp::Ne,
                Tok::Lt => CmpOp::Lt,
                Tok::Le => CmpOp::Le,
                Tok::Gt => CmpOp::Gt,
                Tok::Ge => CmpOp::Ge,
                _ => break,
            };
            self.advance();
            rest.push((op, self.parse_arith()?));
        }
        if rest.is_empty() {
            Ok(first)
        } else {
            Ok(Expr::Compare { line, first: Box::new(first), rest })
        }
    }

    fn parse_arith(&mut self) -> PResult<Expr> {
        let mut left = self.parse_term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let line = Line(self.line());
            self.advance();
            let right = self.parse_term()?;
            left = Expr::Binary { line, op, left: Box::new(left), right: Box::new(right) };
        }
        Ok(left)
    }

    fn parse_term(&mut self) -> PResult<Expr> {
        let mut left = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::SlashSlash => BinOp::FloorDiv,
                Tok::Percent => BinOp::Mod,
                _ => break,
            };
            let line = Line(self.line());
            self.advance();
            let right = self.parse_unary()?;
            left = Expr::Binary { line, op, left: Box::new(left), right: Box::new(right) };
        }
        Ok(left)
    }

    fn parse_unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Minus => {
                let line = Line(self.line());
                self.advance();
                let operand = Box::new(self.parse_unary()?);
                Ok(Expr::Unary { line, op: UnaryOp::Neg, operand })
            }
            Tok::Plus => {
                self.advance();
                self.parse_unary()
            }
            _ => self.parse_power(),
        }
    }

    fn parse_power(&mut self) -> PResult<Expr> {
        let base = self.parse_postfix()?;
        if self.peek() == &Tok::StarStar {
            let line = Line(self.line());
            self.advance();
            let right = self.parse_unary()?;
            return Ok(Expr::Binary {
                line,
                op: BinOp::Pow,
                left: Box::new(base),
                right: Box::new(right),
            });
        }
        Ok(base)
    }

    fn parse_postfix(&mut self) -> PResult<Expr> {
        let mut expr = self.parse_atom()?;
        loop {
            match self.peek() {
                Tok::LParen => {
                    let line = Line(self.line());
                    let func = match &expr {
                        Expr::Name { id, .. } => id.clone(),
                        _ => {
                            return Err(Diagnostic::new(
                                self.line(),
                                Category::Construct,
                                "only named builtins can be called".to_string(),
                            ))
                        }
                    };
                    self.advance();
                    let args = self.parse_call_args()?;
                    expr = Expr::Call { line, func, args };
                }
                Tok::LBracket => {
                    let line = Line(self.line());
                    self.advance();
                    let index = Box::new(self.parse_expr()?);
                    self.expect(Tok::RBracket, "to close the index")?;
                    expr = Expr::Index { line, base: Box::new(expr), index };
                }
                Tok::Dot => {
                    let line = Line(self.line());
                    self.advance();
                    let (method, _) = self.expect_ident("after '.'")?;
                    self.expect(Tok::LParen, "after the method name")?;
                    let args = self.parse_call_args()?;
                    expr = Expr::MethodCall { line, base: Box::new(expr), method, args };
                }
                _ => break,
            }
        }
        Ok(expr)
    }

    /// Arguments up to and including the closing parenthesis.
    fn parse_call_args(&mut self) -> PResult<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.parse_expr()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RParen, "to close the arguments")?;
            break;
        }
        Ok(args)
    }

    fn parse_atom(&mut self) -> PResult<Expr> {
        let line = Line(self.line());
        match self.peek().clone() {
            Tok::Int(value) => {
                self.advance();
                Ok(Expr::Int { line, value })
            }
            Tok::Real(value) => {
                self.advance();
                Ok(Expr::Real { line, value })
            }
            Tok::Str(value) => {
                self.advance();
                Ok(Expr::Str { line, value })
            }
            Tok::True => {
                self.advance();
                Ok(Expr::Bool { line, value: true })
            }
            Tok::False => {
                self.advance();
                Ok(Expr::Bool { line, value: false })
            }
            Tok::None => {
                self.advance();
                Ok(Expr::NoneLit { line })
            }
            Tok::Ident(id) => {
                self.advance();
                Ok(Expr::Name { line, id })
            }
            Tok::LParen => {
                self.advance();
                let first = self.parse_expr()?;
                if self.eat(&Tok::Comma) {
                    let second = self.parse_expr()?;
                    self.expect(Tok::RParen, "to close the pair")?;
                    return Ok(Expr::Tuple { line, items: vec![first, second] });
                }
                self.expect(Tok::RParen, "to close the parenthesis")?;
                Ok(first)
            }
            Tok::LBracket => {
                self.advance();
                let mut items = Vec::new();
                if !self.eat(&Tok::RBracket) {
                    loop {
                        items.push(self.parse_expr()?);
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(Tok::RBracket, "to close the list")?;
                        break;
                    }
                }
                Ok(Expr::List { line, items })
            }
            Tok::LBrace => {
                self.advance();
                let mut entries = Vec::new();
                if !self.eat(&Tok::RBrace) {
                    loop {
                        let key = match self.peek().clone() {
                            Tok::Str(k) => {
                                self.advance();
                                k
                            }
                            _ => {
                                return Err(Diagnostic::new(
                                    self.line(),
                                    Category::Construct,
                                    "map keys must be string literals".to_string(),
                                ))
                            }
                        };
                        self.expect(Tok::Colon, "after the map key")?;
                        entries.push((key, self.parse_expr()?));
                        if self.eat(&Tok::Comma) {
                            continue;
                        }
                        self.expect(Tok::RBrace, "to close the map")?;
                        break;
                    }
                }
                Ok(Expr::MapLit { line, entries })
            }
            _ => Err(self.unexpected("expected an expression")),
        }
    }
}
