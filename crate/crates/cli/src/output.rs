//! Report rendering. Floats carry 17 significant digits so every report
//! parses back to the same values and re-serialises byte for byte.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;

/// Pretty or compact JSON whose finite floats print as `{:.16e}`.
/// Non-finite floats never reach it: serde_json writes them as `null`.
struct LosslessFloats<F>(F);

macro_rules! forward {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(
            fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
                self.0.$name(w $(, $arg)*)
            }
        )*
    };
}

impl<F: Formatter> Formatter for LosslessFloats<F> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    forward! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

fn render<T: Serialize + ?Sized, F: Formatter>(value: &T, fmt: F) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, LosslessFloats(fmt));
    value
        .serialize(&mut ser)
        .expect("reports serialise into memory");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn pretty<T: Serialize + ?Sized>(value: &T) -> String {
    render(value, PrettyFormatter::new())
}

pub fn compact<T: Serialize + ?Sized>(value: &T) -> String {
    render(value, serde_json::ser::CompactFormatter)
}

/// Converts a serialisable value into a JSON tree; non-finite floats become
/// `null`.
pub fn to_value<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("report types serialise to JSON")
}

/// Quotes a CSV field when it holds a separator, quote or newline.
pub fn csv_field(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}
