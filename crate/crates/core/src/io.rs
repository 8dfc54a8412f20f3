//! File formats: state files, experiment configs, and JSON output with
//! round-trippable floats.
//!
//! A state file is either
//! `{"rho_re": [[..4..]; 4], "rho_im": [[..4..]; 4]}` (row-major, basis
//! `|HH⟩, |HV⟩, |VH⟩, |VV⟩`) or `{"bloch": {"x": [3], "y": [3], "T": [[3]; 3]}}`.

use std::io;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::experiment::ExperimentConfig;
use crate::linalg::{Mat4, C64};
use crate::state::{bloch_compose, BlochForm, TwoQubitState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlochFile {
    pub x: [f64; 3],
    pub y: [f64; 3],
    #[serde(rename = "T")]
    pub t: [[f64; 3]; 3],
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_re: Option<[[f64; 4]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho_im: Option<[[f64; 4]; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<BlochFile>,
}

impl StateFile {
    pub fn from_state(state: &TwoQubitState) -> Self {
        let m = state.matrix();
        Self {
            rho_re: Some(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].re))),
            rho_im: Some(std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)].im))),
            bloch: None,
        }
    }

    /// Validates the file contents into a state.
    pub fn into_state(self) -> Result<TwoQubitState> {
        match (self.rho_re, self.rho_im, self.bloch) {
            (Some(re), Some(im), None) => TwoQubitState::new(Mat4::from_fn(|i, j| C64::new(re[i][j], im[i][j]))),
            (None, None, Some(b)) => bloch_compose(&BlochForm {
                x: Vector3::from(b.x),
                y: Vector3::from(b.y),
                t: Matrix3::from_fn(|i, j| b.t[i][j]),
            }),
            (Some(_), None, None) | (None, Some(_), None) => {
                Err(Error::Parse("matrix form needs both rho_re and rho_im".into()))
            }
            (None, None, None) => Err(Error::Parse("state file has neither rho_re/rho_im nor bloch".into())),
            _ => Err(Error::Parse("state file must contain exactly one of rho_re/rho_im or bloch".into())),
        }
    }
}

/// Parses and validates a state file. Syntax and shape problems give
/// [`Error::Parse`]; a well-formed file describing a non-state gives
/// [`Error::InvalidState`] or [`Error::NotAState`].
pub fn parse_state(text: &str) -> Result<TwoQubitState> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.into_state()
}

/// Parses and validates an experiment config; absent fields take defaults.
pub fn parse_experiment_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Pretty JSON whose floats are written with [`sig17`].
struct Sig17Formatter<'a>(PrettyFormatter<'a>);

impl Formatter for Sig17Formatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(sig17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes `value` as indented JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17Formatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}
