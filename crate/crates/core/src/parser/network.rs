use std::collections::HashMap;
use std::fmt::Write as _;
use std::iter::Peekable;
use std::vec::IntoIter;

use crate::model::{ModelError, Network, VarId, Variable, ROW_SUM_TOLERANCE};

use super::lexer::{parse_number, tokenize, Tok, Token};
use super::{ParseError, ParseErrorKind, Position};

struct VarDecl {
    name: String,
    pos: Position,
    values: Vec<(String, Position)>,
}

struct CptDecl {
    name: String,
    pos: Position,
    parents: Vec<(String, Position)>,
    rows: Vec<Vec<(f64, Position)>>,
    row_pos: Vec<Position>,
}

struct Cursor {
    tokens: Peekable<IntoIter<Token>>,
    last: Position,
}

impl Cursor {
    fn next(&mut self) -> Result<Token, ParseError> {
        match self.tokens.next() {
            Some(t) => {
                self.last = t.pos;
                Ok(t)
            }
            None => Err(ParseError::new(
                self.last,
                ParseErrorKind::Syntax("unexpected end of input".into()),
            )),
        }
    }

    fn peek(&mut self) -> Option<&Token> {
        self.tokens.peek()
    }

    fn word(&mut self, what: &str) -> Result<(String, Position), ParseError> {
        let t = self.next()?;
        match t.tok {
            Tok::Word(w) => Ok((w, t.pos)),
            other => Err(unexpected(t.pos, &other, what)),
        }
    }

    fn expect(&mut self, want: Tok) -> Result<Position, ParseError> {
        let t = self.next()?;
        if t.tok == want {
            Ok(t.pos)
        } else {
            Err(unexpected(t.pos, &t.tok, &want.describe()))
        }
    }
}

fn unexpected(pos: Position, found: &Tok, wanted: &str) -> ParseError {
    ParseError::new(
        pos,
        ParseErrorKind::Syntax(format!("expected {wanted}, found {}", found.describe())),
    )
}

fn parse_var(cur: &mut Cursor) -> Result<VarDecl, ParseError> {
    let (name, pos) = cur.word("a variable name")?;
    cur.expect(Tok::LBrace)?;
    let mut values = Vec::new();
    loop {
        let t = cur.next()?;
        match t.tok {
            Tok::RBrace if !values.is_empty() => break,
            Tok::Word(w) => values.push((w, t.pos)),
            other => return Err(unexpected(t.pos, &other, "a value name")),
        }
        let t = cur.next()?;
        match t.tok {
            Tok::Comma => {}
            Tok::RBrace => break,
            other => return Err(unexpected(t.pos, &other, "`,` or `}`")),
        }
    }
    Ok(VarDecl { name, pos, values })
}

fn parse_cpt(cur: &mut Cursor) -> Result<CptDecl, ParseError> {
    let (name, pos) = cur.word("a variable name")?;
    let mut parents = Vec::new();
    if matches!(cur.peek(), Some(Token { tok: Tok::Bar, .. })) {
        cur.next()?;
        loop {
            let t = cur.next()?;
            match t.tok {
                Tok::Word(w) => parents.push((w, t.pos)),
                Tok::LBrace if !parents.is_empty() => break,
                other => return Err(unexpected(t.pos, &other, "a parent name")),
            }
        }
    } else {
        cur.expect(Tok::LBrace)?;
    }
    let mut rows: Vec<Vec<(f64, Position)>> = vec![Vec::new()];
    let mut row_pos = vec![cur.last];
    loop {
        let t = cur.next()?;
        match t.tok {
            Tok::Word(w) => {
                let p = parse_number(&w).ok_or_else(|| ParseError::new(t.pos, ParseErrorKind::BadNumber(w.clone())))?;
                let row = rows.last_mut().unwrap();
                if row.is_empty() {
                    *row_pos.last_mut().unwrap() = t.pos;
                }
                row.push((p, t.pos));
            }
            Tok::Comma if !rows.last().unwrap().is_empty() => {}
            Tok::Semi if !rows.last().unwrap().is_empty() => {
                rows.push(Vec::new());
                row_pos.push(t.pos);
            }
            Tok::RBrace => break,
            other => return Err(unexpected(t.pos, &other, "a probability")),
        }
    }
    // a trailing `;` leaves an empty last row
    if rows.len() > 1 && rows.last().unwrap().is_empty() {
        rows.pop();
        row_pos.pop();
    }
    if rows[0].is_empty() {
        return Err(ParseError::new(pos, ParseErrorKind::Syntax("empty table".into())));
    }
    Ok(CptDecl {
        name,
        pos,
        parents,
        rows,
        row_pos,
    })
}

/// Parses and validates a `.bn` document.
///
/// ```text
/// # comments run to end of line
/// var rain { yes, no }
/// var grass { wet, dry }
/// cpt rain { 0.2, 0.8 }
/// cpt grass | rain { 0.9, 0.1; 0.05, 0.95 }
/// ```
///
/// Table rows are listed row-major over the parents (last parent fastest),
/// each row in the variable's value order.
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let mut cur = Cursor {
        tokens: tokenize(text)?.into_iter().peekable(),
        last: Position::new(1, 1),
    };
    let mut vars: Vec<VarDecl> = Vec::new();
    let mut cpts: Vec<CptDecl> = Vec::new();
    while let Some(t) = cur.tokens.next() {
        cur.last = t.pos;
        match &t.tok {
            Tok::Word(w) if w == "var" => vars.push(parse_var(&mut cur)?),
            Tok::Word(w) if w == "cpt" => cpts.push(parse_cpt(&mut cur)?),
            other => return Err(unexpected(t.pos, other, "`var` or `cpt`")),
        }
    }

    let mut ids: HashMap<&str, usize> = HashMap::new();
    for (i, var) in vars.iter().enumerate() {
        if ids.insert(&var.name, i).is_some() {
            return Err(ParseError::new(
                var.pos,
                ParseErrorKind::DuplicateVariable(var.name.clone()),
            ));
        }
        if var.values.len() < 2 {
            return Err(ParseError::new(
                var.pos,
                ParseErrorKind::DomainTooSmall(var.name.clone()),
            ));
        }
        for (j, (value, pos)) in var.values.iter().enumerate() {
            if var.values[..j].iter().any(|(v, _)| v == value) {
                return Err(ParseError::new(
                    *pos,
                    ParseErrorKind::DuplicateValue {
                        variable: var.name.clone(),
                        value: value.clone(),
                    },
                ));
            }
        }
    }

    let mut by_var: Vec<Option<&CptDecl>> = vec![None; vars.len()];
    for cpt in &cpts {
        let Some(&i) = ids.get(cpt.name.as_str()) else {
            return Err(ParseError::new(
                cpt.pos,
                ParseErrorKind::UnknownVariable(cpt.name.clone()),
            ));
        };
        if by_var[i].is_some() {
            return Err(ParseError::new(cpt.pos, ParseErrorKind::DuplicateCpt(cpt.name.clone())));
        }
        by_var[i] = Some(cpt);
    }

    let mut variables = Vec::with_capacity(vars.len());
    let mut tables = Vec::with_capacity(vars.len());
    for (i, var) in vars.iter().enumerate() {
        let cpt = by_var[i].ok_or_else(|| ParseError::new(var.pos, ParseErrorKind::MissingCpt(var.name.clone())))?;
        let mut parents = Vec::with_capacity(cpt.parents.len());
        for (j, (parent, pos)) in cpt.parents.iter().enumerate() {
            let Some(&p) = ids.get(parent.as_str()) else {
                return Err(ParseError::new(
                    *pos,
                    ParseErrorKind::UnknownParent {
                        variable: cpt.name.clone(),
                        parent: parent.clone(),
                    },
                ));
            };
            if cpt.parents[..j].iter().any(|(q, _)| q == parent) {
                return Err(ParseError::new(
                    *pos,
                    ParseErrorKind::DuplicateParent {
                        variable: cpt.name.clone(),
                        parent: parent.clone(),
                    },
                ));
            }
            parents.push(VarId(p));
        }
        let expected_rows: usize = parents.iter().map(|p| vars[p.0].values.len()).product();
        if cpt.rows.len() != expected_rows {
            return Err(ParseError::new(
                cpt.pos,
                ParseErrorKind::RowCount {
                    variable: cpt.name.clone(),
                    expected: expected_rows,
                    found: cpt.rows.len(),
                },
            ));
        }
        let card = var.values.len();
        let mut table = Vec::with_capacity(expected_rows * card);
        for (r, row) in cpt.rows.iter().enumerate() {
            if row.len() != card {
                return Err(ParseError::new(
                    cpt.row_pos[r],
                    ParseErrorKind::RowArity {
                        variable: cpt.name.clone(),
                        row: r,
                        expected: card,
                        found: row.len(),
                    },
                ));
            }
            if let Some(&(p, pos)) = row.iter().find(|(p, _)| !(0.0..=1.0).contains(p)) {
                return Err(ParseError::new(
                    pos,
                    ParseErrorKind::ProbabilityRange {
                        variable: cpt.name.clone(),
                        row: r,
                        value: p,
                    },
                ));
            }
            let sum: f64 = row.iter().map(|(p, _)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(ParseError::new(
                    cpt.row_pos[r],
                    ParseErrorKind::RowSum {
                        variable: cpt.name.clone(),
                        row: r,
                        sum,
                    },
                ));
            }
            table.extend(row.iter().map(|(p, _)| *p));
        }
        variables.push(Variable::new(
            var.name.clone(),
            var.values.iter().map(|(v, _)| v.clone()).collect(),
            parents,
        ));
        tables.push(table);
    }

    Network::new(variables, tables).map_err(|err| match err {
        ModelError::Cycle { from, to } => {
            // point at `from` in the parent list of `to`
            let pos = by_var[ids[to.as_str()]]
                .and_then(|c| c.parents.iter().find(|(p, _)| *p == from).map(|(_, pos)| *pos))
                .unwrap_or(Position::new(1, 1));
            ParseError::new(pos, ParseErrorKind::Cycle { from, to })
        }
        other => ParseError::new(Position::new(1, 1), ParseErrorKind::Model(other)),
    })
}

/// Serializes a network in the `.bn` format read by [`parse_network`].
/// Probabilities print in shortest round-trip form, so parsing the output
/// reproduces the network exactly.
pub fn write_network(net: &Network) -> String {
    let mut out = String::new();
    for var in net.variables() {
        let _ = writeln!(out, "var {} {{ {} }}", var.name, var.domain.join(", "));
    }
    for v in net.ids() {
        let var = net.variable(v);
        let cpt = net.cpt(v);
        let row_text = |r: usize| cpt.row(r).iter().map(|p| format!("{p}")).collect::<Vec<_>>().join(", ");
        if var.parents.is_empty() {
            let _ = writeln!(out, "cpt {} {{ {} }}", var.name, row_text(0));
            continue;
        }
        let parents: Vec<&str> = var.parents.iter().map(|&p| net.name(p)).collect();
        let _ = writeln!(out, "cpt {} | {} {{", var.name, parents.join(" "));
        let rows = cpt.row_count();
        for r in 0..rows {
            let sep = if r + 1 < rows { ";" } else { "" };
            let _ = writeln!(out, "  {}{}", row_text(r), sep);
        }
        out.push_str("}\n");
    }
    out
}
