//! Ginibre ensemble toolkit: kernels, exact vacuum and count probabilities,
//! Palm conditioning, critical radii, samplers and gap statistics.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gaps;
pub mod geometry;
pub mod kernel;
pub mod linalg;
pub mod quadrature;
pub mod rn;
pub mod sampler;
pub mod scalar;
pub mod special;
pub mod stream;
pub mod vacuum;

pub use error::{Error, Result};
pub use geometry::{ComplexPoint, PointConfiguration, Region, Scale};
pub use scalar::Real;
pub use stream::{RandomStream, StreamDescriptor};

/// Double-precision point.
pub type Point = ComplexPoint<f64>;
/// Double-precision region.
pub type Region64 = Region<f64>;
/// Double-precision configuration.
pub type Configuration = PointConfiguration<f64>;

/// Decimal text of a float with 17 significant digits, enough to round-trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// JSON text with every float written by [`format_float`]; non-finite
/// floats become `null`.
pub fn to_json_string<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FloatDigits);
    value.serialize(&mut ser).map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))
}

struct FloatDigits;

impl serde_json::ser::Formatter for FloatDigits {
    fn write_f64<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        if value.is_finite() {
            writer.write_all(format_float(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + std::io::Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}
