//! `summary.json` writer.
//!
//! The first line is always `{"schema_version": 1,` and floats are written
//! with 17 significant digits, so reruns are byte-identical.

use serde::Serialize;
use serde_json::ser::Formatter;
use std::io::{self, Write};

pub const SCHEMA_VERSION: u32 = 1;

struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }
}

fn compact<T: Serialize>(value: &T) -> serde_json::Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// Ordered `key: value` entries written one per line.
#[derive(Default)]
pub struct Summary {
    entries: Vec<(String, String)>,
}

impl Summary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add<T: Serialize>(&mut self, key: &str, value: &T) -> serde_json::Result<&mut Self> {
        self.entries.push((key.to_string(), compact(value)?));
        Ok(self)
    }

    pub fn render(&self) -> String {
        let mut out = format!("{{\"schema_version\": {SCHEMA_VERSION}");
        for (k, v) in &self.entries {
            out.push_str(&format!(",\n  {}: {v}", serde_json::Value::String(k.clone())));
        }
        out.push_str("\n}\n");
        out
    }
}
