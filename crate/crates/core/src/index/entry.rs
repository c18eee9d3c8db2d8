use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Reference to an option, optionally qualified by its system (`SYS:opt`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OptionRef {
    pub system: Option<String>,
    pub option: String,
}

/// When a system becomes available: `TRUE`, or AND/OR combinations of
/// previously chosen options. There is no negation.
///
/// Text form: `TRUE`, `decision`, `MOVE:decision & (a | b)`; `AND`/`OR` are
/// accepted for `&`/`|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EntryCondition {
    True,
    Option(OptionRef),
    All(Vec<EntryCondition>),
    Any(Vec<EntryCondition>),
}

impl EntryCondition {
    pub fn option(name: &str) -> Self {
        EntryCondition::Option(OptionRef { system: None, option: name.to_string() })
    }

    pub fn evaluate(&self, chosen: &BTreeSet<&str>) -> bool {
        match self {
            EntryCondition::True => true,
            EntryCondition::Option(r) => chosen.contains(r.option.as_str()),
            EntryCondition::All(parts) => parts.iter().all(|p| p.evaluate(chosen)),
            EntryCondition::Any(parts) => parts.iter().any(|p| p.evaluate(chosen)),
        }
    }

    pub fn references(&self) -> Vec<&OptionRef> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect<'a>(&'a self, out: &mut Vec<&'a OptionRef>) {
        match self {
            EntryCondition::True => {}
            EntryCondition::Option(r) => out.push(r),
            EntryCondition::All(parts) | EntryCondition::Any(parts) => parts.iter().for_each(|p| p.collect(out)),
        }
    }
}

fn write_part(f: &mut fmt::Formatter<'_>, part: &EntryCondition, grouped: bool) -> fmt::Result {
    if grouped {
        write!(f, "({part})")
    } else {
        write!(f, "{part}")
    }
}

impl fmt::Display for EntryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntryCondition::True => f.write_str("TRUE"),
            EntryCondition::Option(r) => match &r.system {
                Some(s) => write!(f, "{s}:{}", r.option),
                None => f.write_str(&r.option),
            },
            EntryCondition::All(parts) => {
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" & ")?;
                    }
                    let grouped = matches!(part, EntryCondition::All(_) | EntryCondition::Any(_));
                    write_part(f, part, grouped)?;
                }
                Ok(())
            }
            EntryCondition::Any(parts) => {
                for (i, part) in parts.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" | ")?;
                    }
                    write_part(f, part, matches!(part, EntryCondition::Any(_)))?;
                }
                Ok(())
            }
        }
    }
}

impl From<EntryCondition> for String {
    fn from(e: EntryCondition) -> Self {
        e.to_string()
    }
}

impl TryFrom<String> for EntryCondition {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Debug, PartialEq)]
enum Token {
    And,
    Or,
    Open,
    Close,
    True,
    Ref(OptionRef),
}

fn tokenize(s: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = s.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '&' => {
                chars.next();
                tokens.push(Token::And);
            }
            '|' => {
                chars.next();
                tokens.push(Token::Or);
            }
            '(' => {
                chars.next();
                tokens.push(Token::Open);
            }
            ')' => {
                chars.next();
                tokens.push(Token::Close);
            }
            c if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == ':' => {
                let mut end = i;
                while let Some(&(j, c)) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == ':' {
                        end = j + c.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                let word = &s[i..end];
                tokens.push(match word {
                    "TRUE" => Token::True,
                    "AND" => Token::And,
                    "OR" => Token::Or,
                    _ => {
                        let (system, option) = match word.split_once(':') {
                            Some((sys, opt)) => (Some(sys.to_string()), opt),
                            None => (None, word),
                        };
                        let ok = |t: &str| !t.is_empty() && !t.contains(':');
                        if !ok(option) || system.as_deref().is_some_and(|s| !ok(s)) {
                            return Err(format!("malformed option reference {word:?}"));
                        }
                        Token::Ref(OptionRef { system, option: option.to_string() })
                    }
                });
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(tokens)
}

struct EntryParser {
    tokens: std::iter::Peekable<std::vec::IntoIter<Token>>,
}

impl EntryParser {
    fn any(&mut self) -> Result<EntryCondition, String> {
        let mut parts = vec![self.all()?];
        while self.tokens.next_if_eq(&Token::Or).is_some() {
            parts.push(self.all()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { EntryCondition::Any(parts) })
    }

    fn all(&mut self) -> Result<EntryCondition, String> {
        let mut parts = vec![self.atom()?];
        while self.tokens.next_if_eq(&Token::And).is_some() {
            parts.push(self.atom()?);
        }
        Ok(if parts.len() == 1 { parts.pop().expect("one") } else { EntryCondition::All(parts) })
    }

    fn atom(&mut self) -> Result<EntryCondition, String> {
        match self.tokens.next() {
            Some(Token::True) => Ok(EntryCondition::True),
            Some(Token::Ref(r)) => Ok(EntryCondition::Option(r)),
            Some(Token::Open) => {
                let inner = self.any()?;
                match self.tokens.next() {
                    Some(Token::Close) => Ok(inner),
                    _ => Err("missing ')'".into()),
                }
            }
            Some(other) => Err(format!("unexpected {other:?}")),
            None => Err("unexpected end of entry condition".into()),
        }
    }
}

impl FromStr for EntryCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parser = EntryParser { tokens: tokenize(s)?.into_iter().peekable() };
        let cond = parser.any()?;
        match parser.tokens.next() {
            None => Ok(cond),
            Some(t) => Err(format!("trailing {t:?}")),
        }
    }
}
