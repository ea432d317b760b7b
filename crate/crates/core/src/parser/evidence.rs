use crate::model::{Assignment, Evidence, Network};

use super::{ParseError, ParseErrorKind, Position};

/// Byte offset to 1-based column.
fn column(line: &str, offset: usize) -> usize {
    line[..offset].chars().count() + 1
}

/// Parses evidence, one `name = value` binding per line. `#` starts a
/// comment; blank lines are ignored, so an empty document is empty
/// evidence.
pub fn parse_evidence(text: &str, net: &Network) -> Result<Evidence, ParseError> {
    let mut a = Assignment::for_network(net);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let at = |offset: usize| Position::new(i + 1, column(raw, offset));
        let start = line.len() - line.trim_start().len();
        let Some(eq) = line.find('=') else {
            return Err(ParseError::new(
                at(start),
                ParseErrorKind::Syntax("expected `name = value`".into()),
            ));
        };
        let name = line[..eq].trim();
        let rest = &line[eq + 1..];
        let value = rest.trim();
        let value_start = eq + 1 + (rest.len() - rest.trim_start().len());
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(ParseError::new(
                at(start),
                ParseErrorKind::Syntax("expected a single variable name before `=`".into()),
            ));
        }
        if value.is_empty() || value.contains(char::is_whitespace) || value.contains('=') {
            return Err(ParseError::new(
                at(value_start.min(line.len())),
                ParseErrorKind::Syntax("expected a single value after `=`".into()),
            ));
        }
        let v = net
            .lookup(name)
            .ok_or_else(|| ParseError::new(at(start), ParseErrorKind::UnknownVariable(name.into())))?;
        let x = net.variable(v).domain.iter().position(|d| d == value).ok_or_else(|| {
            ParseError::new(
                at(value_start),
                ParseErrorKind::UnknownValue {
                    variable: name.into(),
                    value: value.into(),
                },
            )
        })?;
        if a.is_bound(v) {
            return Err(ParseError::new(
                at(start),
                ParseErrorKind::DuplicateBinding(name.into()),
            ));
        }
        a.bind(v, x);
    }
    Ok(Evidence::new(a))
}
