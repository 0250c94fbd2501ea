use std::iter::{Enumerate, Peekable};
use std::str::{FromStr, Lines};

use super::{ClassifyError, Result};

/// Line-oriented reader for the `key=value` model format.
pub(crate) struct Reader<'a> {
    lines: Peekable<Enumerate<Lines<'a>>>,
    last: usize,
}

impl<'a> Reader<'a> {
    pub fn new(text: &'a str) -> Self {
        Reader {
            lines: text.lines().enumerate().peekable(),
            last: 0,
        }
    }

    pub fn error(&self, line: usize, message: &str) -> ClassifyError {
        ClassifyError::Format {
            line,
            message: message.to_string(),
        }
    }

    pub fn line(&mut self) -> Result<(usize, &'a str)> {
        match self.lines.next() {
            Some((i, l)) => {
                self.last = i + 1;
                Ok((i + 1, l))
            }
            None => Err(self.error(self.last + 1, "unexpected end of file")),
        }
    }

    pub fn field(&mut self, key: &str) -> Result<(usize, &'a str)> {
        let (ln, line) = self.line()?;
        match line.split_once('=') {
            Some((k, v)) if k == key => Ok((ln, v)),
            _ => Err(self.error(ln, &format!("expected {key}=..."))),
        }
    }

    pub fn parse_field<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (ln, v) = self.field(key)?;
        v.parse()
            .map_err(|_| self.error(ln, &format!("invalid value for {key}: {v:?}")))
    }

    /// Parses a whitespace-separated list from field `key`.
    pub fn list_field<T: FromStr>(&mut self, key: &str) -> Result<(usize, Vec<T>)> {
        let (ln, v) = self.field(key)?;
        let items = v
            .split_ascii_whitespace()
            .map(|s| s.parse())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|_| self.error(ln, &format!("invalid list for {key}")))?;
        Ok((ln, items))
    }

    pub fn finish(mut self) -> Result<()> {
        match self.lines.find(|(_, l)| !l.trim().is_empty()) {
            None => Ok(()),
            Some((i, _)) => Err(self.error(i + 1, "trailing content")),
        }
    }
}

/// Reads `class=<LABEL> present|absent`, checking the label.
pub(crate) fn read_class_marker(r: &mut Reader<'_>, label: crate::corpus::StanceLabel) -> Result<bool> {
    let (ln, v) = r.field("class")?;
    let (name, state) = v
        .split_once(' ')
        .ok_or_else(|| r.error(ln, "expected class=<LABEL> present|absent"))?;
    if name != label.as_str() {
        return Err(r.error(ln, &format!("expected class {label}")));
    }
    match state {
        "present" => Ok(true),
        "absent" => Ok(false),
        _ => Err(r.error(ln, "expected present or absent")),
    }
}
