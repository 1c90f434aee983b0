//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Precedence, loosest first: `<=>`, `=>` (right associative), `|`, `&`, `!`.
//! Quantifiers `forall v.` / `exists v.` extend as far right as possible.
//! Probability expressions use `+ -` below `*`.

use std::fmt;

use thiserror::Error;

use super::{PathFormula, ProbExpr, Relation, StateFormula, Var};
use crate::model::is_valid_proposition;
use crate::rational::{parse_rational, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.line, self.column, self.message
        )
    }
}

type PResult<T> = Result<T, ParseError>;

pub fn parse_formula(text: &str) -> PResult<StateFormula> {
    let mut parser = Parser::new(text);
    let formula = parser.state()?;
    parser.expect_end()?;
    Ok(formula)
}

/// Parses a standalone probability expression such as `P(F a@s)`.
pub fn parse_prob_expr(text: &str) -> PResult<ProbExpr> {
    let mut parser = Parser::new(text);
    let expr = parser.prob_expr()?;
    parser.expect_end()?;
    Ok(expr)
}

fn is_var_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

fn is_prop_char(c: char) -> bool {
    is_var_char(c) || c == '=' || c == '.'
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
    /// Furthest failure seen while backtracking; reported if nothing better.
    furthest: Option<ParseError>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            pos: 0,
            furthest: None,
        }
    }

    fn error_at(&self, offset: usize, message: impl Into<String>) -> ParseError {
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ParseError {
            offset,
            line,
            column,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        self.error_at(self.pos, message)
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> PResult<()> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{token}`")))
        }
    }

    fn expect_end(&mut self) -> PResult<()> {
        self.skip_ws();
        if self.pos == self.text.len() {
            Ok(())
        } else {
            let err = self.error(format!("unexpected input `{}`", truncate(self.rest())));
            Err(self.pick(err))
        }
    }

    /// Prefer the backtracking failure that got further into the input.
    fn pick(&mut self, err: ParseError) -> ParseError {
        match self.furthest.take() {
            Some(f) if f.offset > err.offset => f,
            _ => err,
        }
    }

    fn remember(&mut self, err: ParseError) {
        if self.furthest.as_ref().is_none_or(|f| err.offset >= f.offset) {
            self.furthest = Some(err);
        }
    }

    /// Identifier made of `pred` characters, starting with a letter or `_`.
    fn peek_ident(&mut self, pred: fn(char) -> bool) -> Option<&'a str> {
        self.skip_ws();
        let rest = self.rest();
        let first = rest.chars().next()?;
        if !(first.is_ascii_alphabetic() || first == '_') {
            return None;
        }
        let end = rest.find(|c: char| !pred(c)).unwrap_or(rest.len());
        Some(&rest[..end])
    }

    /// Consumes `word` if it is the next whole identifier.
    fn eat_keyword(&mut self, word: &str) -> bool {
        if self.peek_ident(is_var_char) == Some(word) && !self.atom_follows(word.len()) {
            self.pos += word.len();
            true
        } else {
            false
        }
    }

    /// Whether `@` follows the identifier of length `len` at the cursor.
    fn atom_follows(&self, len: usize) -> bool {
        self.text[self.pos + len..].trim_start().starts_with('@')
    }

    fn natural(&mut self) -> PResult<u64> {
        self.skip_ws();
        let rest = self.rest();
        let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
        if end == 0 {
            return Err(self.error("expected a natural number"));
        }
        let value = rest[..end]
            .parse()
            .map_err(|_| self.error("step bound too large"))?;
        self.pos += end;
        Ok(value)
    }

    fn number(&mut self) -> PResult<Rational> {
        self.skip_ws();
        let start = self.pos;
        let rest = self.rest();
        let mut end = 0;
        if rest.starts_with('-') {
            end = 1;
        }
        end += rest[end..]
            .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '/'))
            .unwrap_or(rest.len() - end);
        let literal = &rest[..end];
        if literal.is_empty() || literal == "-" {
            return Err(self.error("expected a number"));
        }
        let value = parse_rational(literal).map_err(|e| self.error_at(start, e.to_string()))?;
        self.pos += end;
        Ok(value)
    }

    fn variable(&mut self) -> PResult<String> {
        match self.peek_ident(is_var_char) {
            Some(name) => {
                self.pos += name.len();
                Ok(name.to_string())
            }
            None => Err(self.error("expected a state variable")),
        }
    }

    // ---- state formulas ----

    fn state(&mut self) -> PResult<StateFormula> {
        let mut left = self.implication()?;
        while self.eat("<=>") {
            let right = self.implication()?;
            left = StateFormula::iff(left, right);
        }
        Ok(left)
    }

    fn implication(&mut self) -> PResult<StateFormula> {
        let left = self.disjunction()?;
        if self.eat("=>") {
            let right = self.implication()?;
            return Ok(StateFormula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> PResult<StateFormula> {
        let mut left = self.conjunction()?;
        while self.eat("|") {
            let right = self.conjunction()?;
            left = StateFormula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> PResult<StateFormula> {
        let mut left = self.unary()?;
        while self.eat("&") {
            let right = self.unary()?;
            left = StateFormula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> PResult<StateFormula> {
        self.skip_ws();
        if self.rest().starts_with('!') && !self.rest().starts_with("!=") {
            self.pos += 1;
            return Ok(StateFormula::not(self.unary()?));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<StateFormula> {
        for (word, universal) in [("forall", true), ("exists", false)] {
            if self.eat_keyword(word) {
                let var = self.variable()?;
                self.expect(".")?;
                let body = self.state()?;
                return Ok(if universal {
                    StateFormula::forall(var, body)
                } else {
                    StateFormula::exists(var, body)
                });
            }
        }
        if self.eat_keyword("true") {
            return Ok(StateFormula::True);
        }
        if self.eat_keyword("false") {
            return Ok(StateFormula::False);
        }

        let start = self.pos;
        match self.peek() {
            None => return Err(self.error("unexpected end of input")),
            Some(c) if c.is_ascii_digit() || c == '.' || c == '-' || c == '(' => {}
            Some(_) => {
                if let Some(prop) = self.peek_ident(is_prop_char) {
                    if self.atom_follows(prop.len()) {
                        return self.atom(prop);
                    }
                }
                match self.peek_ident(is_var_char) {
                    Some("P") => {}
                    Some(op @ ("X" | "F" | "G" | "U")) => {
                        return Err(self.error(format!(
                            "path operator `{op}` may only appear directly inside P(...)"
                        )))
                    }
                    Some(word) => {
                        return Err(self.error(format!(
                            "unexpected `{word}`; atoms are written `name@variable`"
                        )))
                    }
                    None => {
                        return Err(self.error(format!(
                            "unexpected `{}`",
                            truncate(self.rest())
                        )))
                    }
                }
            }
        }

        // A comparison, or a parenthesized state formula.
        let comparison_err = match self.comparison() {
            Ok(f) => return Ok(f),
            Err(e) => e,
        };
        self.pos = start;
        if self.eat("(") {
            self.remember(comparison_err);
            let inner = self.state()?;
            self.expect(")")?;
            self.furthest = None;
            return Ok(inner);
        }
        Err(self.pick(comparison_err))
    }

    fn atom(&mut self, prop: &str) -> PResult<StateFormula> {
        if !is_valid_proposition(prop) {
            return Err(self.error(format!("invalid proposition name `{prop}`")));
        }
        self.pos += prop.len();
        self.expect("@")?;
        let var = self.variable()?;
        Ok(StateFormula::Atom {
            prop: prop.to_string(),
            var: Var::Name(var),
        })
    }

    fn comparison(&mut self) -> PResult<StateFormula> {
        let left = self.prob_expr()?;
        if self.eat_keyword("in") {
            self.expect("[")?;
            let lower = self.number()?;
            self.expect(",")?;
            let upper = self.number()?;
            self.expect("]")?;
            return Ok(StateFormula::InInterval(left, lower, upper));
        }
        let relation = self
            .relation()
            .ok_or_else(|| self.error("expected a comparison operator"))?;
        let right = self.prob_expr()?;
        Ok(StateFormula::Compare(left, relation, right))
    }

    fn relation(&mut self) -> Option<Relation> {
        self.skip_ws();
        let rest = self.rest();
        let (rel, len) = if rest.starts_with("<=>") || rest.starts_with("=>") {
            return None;
        } else if rest.starts_with("<=") {
            (Relation::Le, 2)
        } else if rest.starts_with(">=") {
            (Relation::Ge, 2)
        } else if rest.starts_with("!=") {
            (Relation::Ne, 2)
        } else if rest.starts_with('<') {
            (Relation::Lt, 1)
        } else if rest.starts_with('>') {
            (Relation::Gt, 1)
        } else if rest.starts_with('=') {
            (Relation::Eq, 1)
        } else {
            return None;
        };
        self.pos += len;
        Some(rel)
    }

    // ---- probability expressions ----

    fn prob_expr(&mut self) -> PResult<ProbExpr> {
        let mut left = self.prob_term()?;
        loop {
            if self.eat("+") {
                left = ProbExpr::add(left, self.prob_term()?);
            } else if self.peek() == Some('-') {
                self.pos += 1;
                left = ProbExpr::sub(left, self.prob_term()?);
            } else {
                return Ok(left);
            }
        }
    }

    fn prob_term(&mut self) -> PResult<ProbExpr> {
        let mut left = self.prob_factor()?;
        while self.eat("*") {
            left = ProbExpr::mul(left, self.prob_factor()?);
        }
        Ok(left)
    }

    fn prob_factor(&mut self) -> PResult<ProbExpr> {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' || c == '-' => {
                Ok(ProbExpr::Const(self.number()?))
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.prob_expr()?;
                self.expect(")")?;
                Ok(inner)
            }
            _ if self.eat_keyword("P") => {
                self.expect("(")?;
                let path = self.path()?;
                self.expect(")")?;
                Ok(ProbExpr::prob(path))
            }
            _ => Err(self.error("expected a probability expression")),
        }
    }

    // ---- path formulas ----

    fn bounds(&mut self) -> PResult<Option<(u64, u64)>> {
        self.skip_ws();
        if self.rest().starts_with("<=") && !self.rest().starts_with("<=>") {
            self.pos += 2;
            return Ok(Some((0, self.natural()?)));
        }
        if self.rest().starts_with('[') {
            let start = self.pos;
            self.pos += 1;
            let k1 = self.natural()?;
            self.expect(",")?;
            let k2 = self.natural()?;
            self.expect("]")?;
            if k1 > k2 {
                return Err(self.error_at(
                    start,
                    format!("malformed step bounds [{k1},{k2}]: lower bound exceeds upper bound"),
                ));
            }
            return Ok(Some((k1, k2)));
        }
        Ok(None)
    }

    fn path(&mut self) -> PResult<PathFormula> {
        if self.eat_keyword("X") {
            return Ok(PathFormula::Next(self.state()?));
        }
        if self.eat_keyword("F") {
            let bounds = self.bounds()?;
            let body = self.state()?;
            return Ok(match bounds {
                Some((k1, k2)) => PathFormula::BoundedEventually(body, k1, k2),
                None => PathFormula::Eventually(body),
            });
        }
        if self.eat_keyword("G") {
            let bounds = self.bounds()?;
            let body = self.state()?;
            return Ok(match bounds {
                Some((k1, k2)) => PathFormula::BoundedGlobally(body, k1, k2),
                None => PathFormula::Globally(body),
            });
        }
        let left = self.state()?;
        if !self.eat_keyword("U") {
            let err = self.error("expected `U` or a path operator (X, F, G)");
            return Err(self.pick(err));
        }
        let bounds = self.bounds()?;
        let right = self.state()?;
        Ok(match bounds {
            Some((k1, k2)) => PathFormula::BoundedUntil(left, right, k1, k2),
            None => PathFormula::Until(left, right),
        })
    }
}

fn truncate(text: &str) -> String {
    text.chars().take(16).collect()
}
