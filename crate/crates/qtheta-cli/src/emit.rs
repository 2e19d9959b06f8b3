//! Byte-stable JSON rendering: object keys are sorted (serde_json's map is
//! ordered), and every float is printed with 17 significant digits so the
//! value round-trips through the text exactly. Rerunning a command with the
//! same configuration reproduces the output byte for byte.

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};
use serde_json::Value;
use std::io::{self, Write};

/// The pretty formatter with floats forced to `{:.16e}` (17 significant
/// digits, enough to reconstruct any f64 exactly).
struct SigDigits17<'a> {
    inner: PrettyFormatter<'a>,
}

impl Formatter for SigDigits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.inner.end_object_value(writer)
    }
}

/// Renders a report deterministically, with a trailing newline.
pub fn stable_json(value: &Value) -> String {
    let mut out = Vec::new();
    let mut ser =
        Serializer::with_formatter(&mut out, SigDigits17 { inner: PrettyFormatter::new() });
    value.serialize(&mut ser).expect("in-memory JSON serialization does not fail");
    out.push(b'\n');
    String::from_utf8(out).expect("the serializer emits UTF-8")
}
