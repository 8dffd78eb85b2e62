//! JSON output with every `f64` written to 17 significant digits, enough to
//! round-trip any double exactly.

use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter, Serializer};

use crate::error::{CliError, Result};

struct FullPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FullPrecision<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            writer.write_all(b"null")
        } else if value == 0.0 {
            // also maps −0 to 0
            writer.write_all(b"0.0")
        } else {
            write!(writer, "{value:.16e}")
        }
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, FullPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory does not fail");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON output is UTF-8")
}

pub fn write<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, to_string(value)).map_err(|e| CliError::io(path, e))
}

pub fn read<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn doubles_round_trip() {
        let v = vec![0.1, 1.0 / 3.0, -2.5e-300, 12345.678, f64::MIN_POSITIVE, 0.0];
        let back: Vec<f64> = serde_json::from_str(&to_string(&v)).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn random_bit_patterns_round_trip() {
        let mut rng = randnet_core::rng::RngStream::new(1, 0);
        let v: Vec<f64> = (0..10_000)
            .map(|_| f64::from_bits(rng.next_u64()))
            .filter(|x| x.is_finite())
            .collect();
        let back: Vec<f64> = serde_json::from_str(&to_string(&v)).unwrap();
        assert!(back
            .iter()
            .zip(&v)
            .all(|(a, b)| a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0)));
    }

    #[test]
    fn uses_seventeen_digits() {
        assert_eq!(to_string(&0.1).trim(), "1.0000000000000001e-1");
        assert_eq!(to_string(&-0.0).trim(), "0.0");
    }
}
