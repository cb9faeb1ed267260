use std::fmt;

use serde::{Deserialize, Serialize};

use super::{MeasurementModel, TIME_EPS};
use crate::algebra::{min_eigenvalue, Operator, TOL_HERM, TOL_PSD, TOL_TR};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticKind {
    NotHermitian,
    NotPositive,
    NotNormalized,
    NonFinite,
    DimMismatch,
    NonPositiveRate,
    EmptyKrausFamily,
    EmptySchedule,
    ScheduleStart,
    ScheduleGap,
    ScheduleOverlap,
    EmptyInterval,
    ChannelCountMismatch,
}

impl fmt::Display for DiagnosticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// One violated model invariant and where it was found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    /// Field path inside the segment (or top-level field), e.g. `hamiltonian`.
    pub location: String,
    pub segment: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn new(kind: DiagnosticKind, location: impl Into<String>, segment: Option<usize>, message: impl Into<String>) -> Self {
        Self { kind, location: location.into(), segment, message: message.into() }
    }

    /// `Kind@location`, the stable identifier of a diagnostic.
    pub fn tag(&self) -> String {
        format!("{}@{}", self.kind, self.location)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())?;
        if let Some(s) = self.segment {
            write!(f, " (segment {s})")?;
        }
        write!(f, ": {}", self.message)
    }
}

fn check_finite(op: &Operator, location: &str, segment: Option<usize>, out: &mut Vec<Diagnostic>) -> bool {
    if op.is_finite() {
        return true;
    }
    out.push(Diagnostic::new(DiagnosticKind::NonFinite, location, segment, "operator has NaN or infinite entries"));
    false
}

/// Checks every semantic invariant of a model. The list is empty iff the
/// model is well formed.
pub fn validate(model: &MeasurementModel) -> Vec<Diagnostic> {
    use DiagnosticKind::*;
    let mut out = Vec::new();

    let rho0 = model.initial_state();
    if check_finite(rho0, "initial_state", None, &mut out) {
        let defect = rho0.hermiticity_defect();
        if defect > TOL_HERM {
            out.push(Diagnostic::new(NotHermitian, "initial_state", None, format!("Hermiticity defect {defect:.3e}")));
        } else {
            let lo = min_eigenvalue(rho0);
            if lo < -TOL_PSD {
                out.push(Diagnostic::new(NotPositive, "initial_state", None, format!("eigenvalue {lo:.3e}")));
            }
            let tr = rho0.trace().re;
            if (tr - 1.0).abs() > TOL_TR {
                out.push(Diagnostic::new(NotNormalized, "initial_state", None, format!("trace {tr}")));
            }
        }
    }

    let segments = model.segments();
    if segments.is_empty() {
        out.push(Diagnostic::new(EmptySchedule, "segments", None, "no segments"));
        return out;
    }
    if segments[0].t_start.abs() > TIME_EPS {
        out.push(Diagnostic::new(ScheduleStart, "t_start", Some(0), format!("schedule starts at {} instead of 0", segments[0].t_start)));
    }
    let (n_diff, n_jump) = (segments[0].diffusive_ops().len(), segments[0].jump_channels().len());

    for (i, seg) in segments.iter().enumerate() {
        let at = Some(i);
        if !(seg.t_start.is_finite() && seg.t_end.is_finite()) || seg.t_start >= seg.t_end {
            out.push(Diagnostic::new(EmptyInterval, "t_end", at, format!("interval ({}, {}] is empty", seg.t_start, seg.t_end)));
        }
        if i > 0 {
            let prev_end = segments[i - 1].t_end;
            if seg.t_start > prev_end + TIME_EPS {
                out.push(Diagnostic::new(ScheduleGap, "t_start", at, format!("gap between {prev_end} and {}", seg.t_start)));
            } else if seg.t_start < prev_end - TIME_EPS {
                out.push(Diagnostic::new(ScheduleOverlap, "t_start", at, format!("overlaps previous segment ending at {prev_end}")));
            }
        }
        if seg.diffusive_ops().len() != n_diff {
            out.push(Diagnostic::new(
                ChannelCountMismatch,
                "diffusive_ops",
                at,
                format!("{} diffusive channels, first segment has {n_diff}", seg.diffusive_ops().len()),
            ));
        }
        if seg.jump_channels().len() != n_jump {
            out.push(Diagnostic::new(
                ChannelCountMismatch,
                "jump_channels",
                at,
                format!("{} jump channels, first segment has {n_jump}", seg.jump_channels().len()),
            ));
        }

        let h = seg.hamiltonian();
        if check_finite(h, "hamiltonian", at, &mut out) {
            let defect = h.hermiticity_defect();
            if defect > TOL_HERM {
                out.push(Diagnostic::new(NotHermitian, "hamiltonian", at, format!("Hermiticity defect {defect:.3e}")));
            }
        }
        for (l, op) in seg.lindblad_ops().iter().enumerate() {
            check_finite(op, &format!("lindblad_ops[{l}]"), at, &mut out);
        }
        for (j, op) in seg.diffusive_ops().iter().enumerate() {
            check_finite(op, &format!("diffusive_ops[{j}]"), at, &mut out);
        }
        for (k, ch) in seg.jump_channels().iter().enumerate() {
            let loc = format!("jump_channels[{k}]");
            if !(ch.rate() > 0.0 && ch.rate().is_finite()) {
                out.push(Diagnostic::new(NonPositiveRate, format!("{loc}.rate"), at, format!("rate {} is not positive", ch.rate())));
            }
            let finite = ch.kraus_ops().iter().enumerate().all(|(r, v)| check_finite(v, &format!("{loc}.kraus_ops[{r}]"), at, &mut out));
            if finite {
                let j = ch.intensity_operator();
                let defect = j.hermiticity_defect();
                let lo = min_eigenvalue(j);
                if defect > TOL_HERM || lo < -TOL_PSD {
                    out.push(Diagnostic::new(NotPositive, loc, at, format!("J is not Hermitian PSD (defect {defect:.1e}, min eigenvalue {lo:.1e})")));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::C64;
    use crate::model::{JumpChannel, ModelSegment};

    fn qubit_segment(t0: f64, t1: f64, h: Operator) -> ModelSegment {
        ModelSegment::new(
            t0,
            t1,
            h,
            vec![],
            vec![Operator::pauli_z().scale(0.5)],
            vec![JumpChannel::new(vec![Operator::sigma_minus()], 1.0).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn well_formed_model_has_no_diagnostics() {
        let model = MeasurementModel::new(Operator::from_diagonal(&[0.5, 0.5]), vec![qubit_segment(0.0, 1.0, Operator::pauli_x())]).unwrap();
        assert!(validate(&model).is_empty());
    }

    #[test]
    fn non_hermitian_hamiltonian() {
        let mut h = Operator::pauli_x();
        h.add_scaled(C64::new(1e-3, 0.0), &Operator::sigma_minus());
        let model = MeasurementModel::new(Operator::from_diagonal(&[0.5, 0.5]), vec![qubit_segment(0.0, 1.0, h)]).unwrap();
        let tags: Vec<String> = validate(&model).iter().map(Diagnostic::tag).collect();
        assert_eq!(tags, vec!["NotHermitian@hamiltonian"]);
    }

    #[test]
    fn schedule_gap() {
        let model = MeasurementModel::new(
            Operator::from_diagonal(&[0.5, 0.5]),
            vec![qubit_segment(0.0, 1.0, Operator::pauli_x()), qubit_segment(1.5, 2.0, Operator::pauli_x())],
        )
        .unwrap();
        let kinds: Vec<DiagnosticKind> = validate(&model).iter().map(|d| d.kind).collect();
        assert_eq!(kinds, vec![DiagnosticKind::ScheduleGap]);
    }

    #[test]
    fn bad_initial_state_and_rate() {
        let seg =
            ModelSegment::new(0.0, 1.0, Operator::zeros(2), vec![], vec![], vec![JumpChannel::new(vec![Operator::sigma_minus()], -1.0).unwrap()])
                .unwrap();
        let model = MeasurementModel::new(Operator::from_diagonal(&[0.7, 0.7]), vec![seg]).unwrap();
        let kinds: Vec<DiagnosticKind> = validate(&model).iter().map(|d| d.kind).collect();
        assert!(kinds.contains(&DiagnosticKind::NotNormalized));
        assert!(kinds.contains(&DiagnosticKind::NonPositiveRate));
    }
}
