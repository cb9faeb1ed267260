use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Diagnostic, DiagnosticKind, JumpChannel, MeasurementModel, ModelSegment};
use crate::algebra::{Operator, C64};
use crate::{Error, Result};

/// A square complex matrix as rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub kraus_ops: Vec<MatrixJson>,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentFile {
    pub t_start: f64,
    pub t_end: f64,
    pub hamiltonian: MatrixJson,
    #[serde(default)]
    pub lindblad_ops: Vec<MatrixJson>,
    #[serde(default)]
    pub diffusive_ops: Vec<MatrixJson>,
    #[serde(default)]
    pub jump_channels: Vec<ChannelFile>,
}

/// On-disk form of a [`MeasurementModel`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    pub initial_state: MatrixJson,
    pub segments: Vec<SegmentFile>,
}

fn matrix_to_json(op: &Operator) -> MatrixJson {
    let m = op.matrix();
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

struct Builder {
    dim: usize,
    diagnostics: Vec<Diagnostic>,
}

impl Builder {
    fn push(&mut self, kind: DiagnosticKind, location: &str, segment: Option<usize>, message: String) {
        self.diagnostics.push(Diagnostic::new(kind, location, segment, message));
    }

    fn matrix(&mut self, json: &MatrixJson, location: &str, segment: Option<usize>) -> Option<Operator> {
        let d = self.dim;
        if json.len() != d || json.iter().any(|row| row.len() != d) {
            let shape: Vec<usize> = json.iter().map(Vec::len).collect();
            self.push(DiagnosticKind::DimMismatch, location, segment, format!("expected {d}x{d}, found rows of lengths {shape:?}"));
            return None;
        }
        if json.iter().flatten().flatten().any(|x| !x.is_finite()) {
            self.push(DiagnosticKind::NonFinite, location, segment, "non-finite entry".into());
            return None;
        }
        Some(Operator::from_fn(d, |i, j| C64::new(json[i][j][0], json[i][j][1])))
    }

    fn list(&mut self, json: &[MatrixJson], name: &str, segment: Option<usize>) -> Option<Vec<Operator>> {
        let ops: Vec<Option<Operator>> = json.iter().enumerate().map(|(i, m)| self.matrix(m, &format!("{name}[{i}]"), segment)).collect();
        ops.into_iter().collect()
    }
}

impl ModelFile {
    pub fn from_model(model: &MeasurementModel) -> Self {
        let segments = model
            .segments()
            .iter()
            .map(|s| SegmentFile {
                t_start: s.t_start,
                t_end: s.t_end,
                hamiltonian: matrix_to_json(s.hamiltonian()),
                lindblad_ops: s.lindblad_ops().iter().map(matrix_to_json).collect(),
                diffusive_ops: s.diffusive_ops().iter().map(matrix_to_json).collect(),
                jump_channels: s
                    .jump_channels()
                    .iter()
                    .map(|c| ChannelFile { kraus_ops: c.kraus_ops().iter().map(matrix_to_json).collect(), rate: c.rate() })
                    .collect(),
            })
            .collect();
        Self { dim: model.dim(), initial_state: matrix_to_json(model.initial_state()), segments }
    }

    /// Builds the model, reporting structural problems (shapes, non-finite
    /// entries, empty Kraus families) as [`Error::InvalidModel`]. Semantic
    /// invariants are left to [`super::validate`].
    pub fn to_model(&self) -> Result<MeasurementModel> {
        let mut b = Builder { dim: self.dim, diagnostics: Vec::new() };
        if self.dim == 0 {
            b.push(DiagnosticKind::DimMismatch, "dim", None, "dimension must be positive".into());
            return Err(Error::InvalidModel(b.diagnostics));
        }
        if self.segments.is_empty() {
            b.push(DiagnosticKind::EmptySchedule, "segments", None, "no segments".into());
        }
        let rho0 = b.matrix(&self.initial_state, "initial_state", None);
        let mut segments = Vec::with_capacity(self.segments.len());
        for (i, s) in self.segments.iter().enumerate() {
            let at = Some(i);
            let h = b.matrix(&s.hamiltonian, "hamiltonian", at);
            let ls = b.list(&s.lindblad_ops, "lindblad_ops", at);
            let rs = b.list(&s.diffusive_ops, "diffusive_ops", at);
            let mut channels = Some(Vec::with_capacity(s.jump_channels.len()));
            for (k, c) in s.jump_channels.iter().enumerate() {
                let name = format!("jump_channels[{k}].kraus_ops");
                if c.kraus_ops.is_empty() {
                    b.push(DiagnosticKind::EmptyKrausFamily, &name, at, "channel has no operators".into());
                    channels = None;
                    continue;
                }
                match (b.list(&c.kraus_ops, &name, at), channels.as_mut()) {
                    (Some(ops), Some(list)) => list.push(JumpChannel::new(ops, c.rate)?),
                    _ => channels = None,
                }
            }
            if let (Some(h), Some(ls), Some(rs), Some(chs)) = (h, ls, rs, channels) {
                segments.push(ModelSegment::new(s.t_start, s.t_end, h, ls, rs, chs)?);
            }
        }
        match rho0 {
            Some(rho0) if b.diagnostics.is_empty() => MeasurementModel::new(rho0, segments),
            _ => Err(Error::InvalidModel(b.diagnostics)),
        }
    }

    pub fn from_json_str(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("model files always serialize")
    }
}

impl MeasurementModel {
    /// Parses and builds a model from JSON text.
    pub fn from_json_str(s: &str) -> Result<Self> {
        ModelFile::from_json_str(s)?.to_model()
    }

    pub fn to_json_string(&self) -> String {
        ModelFile::from_model(self).to_json_string()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MeasurementModel {
        let h = Operator::pauli_x().scale(0.1 + 0.2);
        let r = Operator::pauli_z().scale(std::f64::consts::FRAC_1_SQRT_2 / 3.0);
        let v = Operator::sigma_minus().scale(1.0 / 7.0);
        let s1 =
            ModelSegment::new(0.0, 0.3, h.clone(), vec![Operator::pauli_y()], vec![r.clone()], vec![JumpChannel::new(vec![v.clone()], 1.1).unwrap()])
                .unwrap();
        let s2 = ModelSegment::new(0.3, 1.0, h, vec![], vec![r], vec![JumpChannel::new(vec![v.clone(), v.adjoint()], 0.7).unwrap()]).unwrap();
        let rho0 =
            Operator::from_rows(&[vec![C64::new(1.0 / 3.0, 0.0), C64::new(0.1, -0.2)], vec![C64::new(0.1, 0.2), C64::new(2.0 / 3.0, 0.0)]]).unwrap();
        MeasurementModel::new(rho0, vec![s1, s2]).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = sample();
        let text = model.to_json_string();
        let back = MeasurementModel::from_json_str(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn shape_errors_are_diagnostics() {
        let mut file = ModelFile::from_model(&sample());
        file.segments[1].hamiltonian.pop();
        match file.to_model() {
            Err(Error::InvalidModel(d)) => {
                assert_eq!(d.len(), 1);
                assert_eq!(d[0].tag(), "DimMismatch@hamiltonian");
                assert_eq!(d[0].segment, Some(1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{"dim": 1, "initial_state": [[[1, 0]]], "segments": [], "extra": 1}"#;
        assert!(matches!(MeasurementModel::from_json_str(text), Err(Error::Json(_))));
    }

    #[test]
    fn optional_lists_default_to_empty() {
        let text = r#"{"dim": 1, "initial_state": [[[1, 0]]],
            "segments": [{"t_start": 0, "t_end": 1, "hamiltonian": [[[0.5, 0]]]}]}"#;
        let model = MeasurementModel::from_json_str(text).unwrap();
        assert_eq!(model.n_diffusive(), 0);
        assert_eq!(model.horizon(), 1.0);
    }
}
