//! Real-valued fields sampled on rectangular grids, and their CSV / PGM export.

use std::io::{self, Write};

use crate::error::{precondition, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub unit: String,
    pub points: Vec<f64>,
}

impl Axis {
    pub fn new(label: &str, unit: &str, points: Vec<f64>) -> Self {
        Axis {
            label: label.to_string(),
            unit: unit.to_string(),
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// How a field maps onto an 8-bit image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    /// Nonnegative values: divided by the global max, then gamma-compressed.
    Density,
    /// Signed values: `0.5 + 0.5 v / max|v|`.
    Signed,
}

/// Gamma applied to density images before quantization.
pub const DENSITY_GAMMA: f64 = 0.5;

/// Values sampled on `axis1 x axis2`, stored row-major (one row per `axis1` point).
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub axis1: Axis,
    pub axis2: Axis,
    pub values: Vec<f64>,
    pub value_label: String,
    pub value_unit: String,
    pub kind: FieldKind,
}

impl Field2D {
    pub fn new(
        axis1: Axis,
        axis2: Axis,
        values: Vec<f64>,
        value_label: &str,
        value_unit: &str,
        kind: FieldKind,
    ) -> Result<Self> {
        if values.len() != axis1.len() * axis2.len() {
            return Err(precondition(format!(
                "field has {} values for a {} x {} grid",
                values.len(),
                axis1.len(),
                axis2.len()
            )));
        }
        if kind == FieldKind::Density && values.iter().any(|v| *v < 0.0) {
            return Err(precondition("density fields must be nonnegative"));
        }
        Ok(Field2D {
            axis1,
            axis2,
            values,
            value_label: value_label.to_string(),
            value_unit: value_unit.to_string(),
            kind,
        })
    }

    pub fn rows(&self) -> usize {
        self.axis1.len()
    }

    pub fn cols(&self) -> usize {
        self.axis2.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    /// Matrix CSV: a comment line describing the axes, a header row with the
    /// `axis2` coordinates, then one line per `axis1` point.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(
            out,
            "# rows: {} [{}] ({} points); columns: {} [{}] ({} points); values: {} [{}]",
            self.axis1.label,
            self.axis1.unit,
            self.rows(),
            self.axis2.label,
            self.axis2.unit,
            self.cols(),
            self.value_label,
            self.value_unit,
        )?;
        write!(out, "{}\\{}", self.axis1.label, self.axis2.label)?;
        for v in &self.axis2.points {
            write!(out, ",{v:e}")?;
        }
        writeln!(out)?;
        for (i, a) in self.axis1.points.iter().enumerate() {
            write!(out, "{a:e}")?;
            for v in self.row(i) {
                write!(out, ",{v:e}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Binary 8-bit grayscale PGM (P5): `cols` wide, `rows` high, row 0 first.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        let (comment, pixels) = self.to_gray();
        write!(out, "P5\n# {comment}\n{} {}\n255\n", self.cols(), self.rows())?;
        out.write_all(&pixels)
    }

    /// Quantized pixels and a description of the mapping used.
    pub fn to_gray(&self) -> (String, Vec<u8>) {
        let quantize = |u: f64| (255.0 * u.clamp(0.0, 1.0)).round() as u8;
        match self.kind {
            FieldKind::Density => {
                let max = self.values.iter().copied().fold(0.0, f64::max);
                let scale = if max > 0.0 { max.recip() } else { 0.0 };
                let pixels = self
                    .values
                    .iter()
                    .map(|v| quantize((v * scale).powf(DENSITY_GAMMA)))
                    .collect();
                (
                    format!("pixel = round(255 * (v / {max:e})^{DENSITY_GAMMA}); normalization={max:e} gamma={DENSITY_GAMMA}"),
                    pixels,
                )
            }
            FieldKind::Signed => {
                let max = self.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
                let scale = if max > 0.0 { max.recip() } else { 0.0 };
                let pixels = self
                    .values
                    .iter()
                    .map(|v| quantize(0.5 + 0.5 * v * scale))
                    .collect();
                (
                    format!("pixel = round(255 * (0.5 + 0.5 * v / {max:e})); normalization={max:e} offset=0.5"),
                    pixels,
                )
            }
        }
    }
}
