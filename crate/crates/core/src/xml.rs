//! Minimal element tree over quick-xml.
//!
//! Enough for the workspace's document classes: no mixed content, no
//! namespaces. Whitespace-only text between elements is dropped.

use std::fmt::Write as _;

use quick_xml::escape::escape;
use quick_xml::events::Event;
use quick_xml::Reader;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed XML at line {line}: {message}")]
pub struct XmlError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Element {
    pub name: String,
    pub attrs: Vec<(String, String)>,
    pub children: Vec<Element>,
    pub text: String,
}

impl Element {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), ..Default::default() }
    }

    pub fn attr(mut self, key: &str, value: impl ToString) -> Self {
        self.set_attr(key, value);
        self
    }

    pub fn opt_attr(self, key: &str, value: Option<impl ToString>) -> Self {
        match value {
            Some(v) => self.attr(key, v),
            None => self,
        }
    }

    pub fn with_text(mut self, text: impl Into<String>) -> Self {
        self.text = text.into();
        self
    }

    pub fn child(mut self, child: Element) -> Self {
        self.children.push(child);
        self
    }

    pub fn push(&mut self, child: Element) {
        self.children.push(child);
    }

    pub fn set_attr(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.attrs.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.attrs.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.attrs.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn elements<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Element> + 'a {
        self.children.iter().filter(move |c| c.name == name)
    }

    pub fn first(&self, name: &str) -> Option<&Element> {
        self.children.iter().find(|c| c.name == name)
    }

    /// Serializes with an XML declaration and two-space indentation.
    pub fn to_document(&self) -> String {
        let mut out = String::from("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        self.write_into(&mut out, 0);
        out
    }

    fn write_into(&self, out: &mut String, depth: usize) {
        let indent = "  ".repeat(depth);
        let _ = write!(out, "{indent}<{}", self.name);
        for (k, v) in &self.attrs {
            let _ = write!(out, " {k}=\"{}\"", escape(v.as_str()));
        }
        if self.children.is_empty() && self.text.is_empty() {
            out.push_str("/>\n");
        } else if self.children.is_empty() {
            let _ = writeln!(out, ">{}</{}>", escape(self.text.as_str()), self.name);
        } else {
            out.push_str(">\n");
            for child in &self.children {
                child.write_into(out, depth + 1);
            }
            let _ = writeln!(out, "{indent}</{}>", self.name);
        }
    }
}

fn line_at(text: &str, offset: u64) -> usize {
    let offset = (offset as usize).min(text.len());
    1 + text.as_bytes()[..offset].iter().filter(|&&b| b == b'\n').count()
}

/// Parses a document with exactly one root element.
pub fn parse(text: &str) -> Result<Element, XmlError> {
    let mut reader = Reader::from_str(text);
    let fail = |reader: &Reader<&[u8]>, message: String| XmlError {
        line: line_at(text, reader.buffer_position()),
        message,
    };
    let mut stack: Vec<Element> = Vec::new();
    let mut root: Option<Element> = None;

    let open = |reader: &Reader<&[u8]>, start: &quick_xml::events::BytesStart| -> Result<Element, XmlError> {
        let name = std::str::from_utf8(start.name().as_ref())
            .map_err(|e| fail(reader, e.to_string()))?
            .to_string();
        let mut el = Element::new(name);
        for attr in start.attributes() {
            let attr = attr.map_err(|e| fail(reader, e.to_string()))?;
            let key = std::str::from_utf8(attr.key.as_ref()).map_err(|e| fail(reader, e.to_string()))?;
            let value = attr.unescape_value().map_err(|e| fail(reader, e.to_string()))?;
            el.attrs.push((key.to_string(), value.into_owned()));
        }
        Ok(el)
    };

    loop {
        let event = reader.read_event().map_err(|e| XmlError {
            line: line_at(text, reader.error_position()),
            message: e.to_string(),
        })?;
        match event {
            Event::Start(start) => {
                if root.is_some() && stack.is_empty() {
                    return Err(fail(&reader, "content after the root element".into()));
                }
                let el = open(&reader, &start)?;
                stack.push(el);
            }
            Event::Empty(start) => {
                let el = open(&reader, &start)?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None if root.is_none() => root = Some(el),
                    None => return Err(fail(&reader, "more than one root element".into())),
                }
            }
            Event::End(_) => {
                let el = stack.pop().ok_or_else(|| fail(&reader, "unmatched end tag".into()))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(el),
                    None => root = Some(el),
                }
            }
            Event::Text(t) => {
                let value = t.unescape().map_err(|e| fail(&reader, e.to_string()))?;
                if value.trim().is_empty() {
                    continue;
                }
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&value),
                    None => return Err(fail(&reader, "text outside the root element".into())),
                }
            }
            Event::CData(c) => {
                let value = std::str::from_utf8(&c).map_err(|e| fail(&reader, e.to_string()))?.to_string();
                match stack.last_mut() {
                    Some(el) => el.text.push_str(&value),
                    None => return Err(fail(&reader, "text outside the root element".into())),
                }
            }
            Event::Eof => break,
            Event::Decl(_) | Event::PI(_) | Event::Comment(_) | Event::DocType(_) => {}
        }
    }
    if !stack.is_empty() {
        return Err(XmlError {
            line: line_at(text, text.len() as u64),
            message: format!("unclosed element <{}>", stack.last().map_or("", |e| e.name.as_str())),
        });
    }
    root.ok_or_else(|| XmlError { line: 1, message: "no root element".into() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let el = Element::new("a")
            .attr("x", "1 & <2>")
            .child(Element::new("b").with_text("tom & \"jerry\""))
            .child(Element::new("c"));
        let text = el.to_document();
        assert_eq!(parse(&text).unwrap(), el);
    }

    #[test]
    fn errors() {
        for bad in ["", "<a>", "<a></b>", "<a/><b/>", "text", "<a x=\"1\" x=\"2\"/>", "<a><b></a>"] {
            assert!(parse(bad).is_err(), "{bad:?}");
        }
    }

    #[test]
    fn error_line() {
        let err = parse("<a>\n<b>\n</c>\n</a>").unwrap_err();
        assert_eq!(err.line, 3);
    }
}
