use super::{NoiseDraw, ReferenceMeans, TrajectoryState, INTENSITY_FLOOR, LOG_P_FLOOR, MAX_CLIP_TRAJECTORY};
use crate::algebra::{DensityMatrix, Operator, C64};
use crate::model::{MeasurementModel, ModelSegment};
use crate::{Error, Result};

/// One-step increments `(Δ ln p, Δ ln q)`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LogDensityIncrement {
    pub log_p: f64,
    pub log_q: f64,
}

/// Increments of `ln p` and `ln q` over one step:
///
/// ```text
/// Δ ln p = Σ_j [m_j dW_j − ½ m_j² dt] + Σ_k [ln(μ_k/λ_k) ΔN_k + (λ_k − μ_k) dt]
/// ```
///
/// and the same with `(n_j, ν_k)` in place of `(m_j, μ_k)` for `ln q`.
/// `dw_q` are the output increments under the reference measure; intensities
/// are floored at [`INTENSITY_FLOOR`] inside the logarithm.
pub fn accumulate_log_densities(
    m: &[f64],
    mu: &[f64],
    reference: ReferenceMeans<'_>,
    rates: &[f64],
    dw_q: &[f64],
    jumps: &[bool],
    dt: f64,
) -> LogDensityIncrement {
    let mut inc = LogDensityIncrement::default();
    for ((&mj, &nj), &dw) in m.iter().zip(reference.n).zip(dw_q) {
        inc.log_p += mj * dw - 0.5 * mj * mj * dt;
        inc.log_q += nj * dw - 0.5 * nj * nj * dt;
    }
    for (k, &lambda) in rates.iter().enumerate() {
        let (muk, nuk) = (mu[k], reference.nu[k]);
        inc.log_p += (lambda - muk) * dt;
        inc.log_q += (lambda - nuk) * dt;
        if jumps[k] {
            inc.log_p += (muk.max(INTENSITY_FLOOR) / lambda).ln();
            inc.log_q += (nuk.max(INTENSITY_FLOOR) / lambda).ln();
        }
    }
    inc
}

fn check_intensities(t: f64, intensities: impl IntoIterator<Item = f64>, dt: f64) -> Result<()> {
    for (channel, x) in intensities.into_iter().enumerate() {
        let product = x * dt;
        if product > 1.0 {
            return Err(Error::IntensityOverflow { t, channel, product });
        }
    }
    Ok(())
}

/// `(R ρ + ρ R†)` for Hermitian `ρ`.
fn diffusive_action(r: &Operator, rho: &Operator) -> Operator {
    let r_rho = r * rho;
    &r_rho + &r_rho.adjoint()
}

fn apply_jumps(seg: &ModelSegment, rho: &Operator, jumps: &[bool], normalize: impl Fn(usize, &Operator) -> Option<f64>) -> Operator {
    let mut cur = rho.clone();
    for (k, ch) in seg.jump_channels().iter().enumerate() {
        if jumps[k] {
            let next = ch.apply(&cur);
            if let Some(scale) = normalize(k, &next) {
                cur = next.scale(scale);
            }
        }
    }
    cur
}

fn finish_step(model: &MeasurementModel, state: &mut TrajectoryState, unnormalized: &Operator, dt: f64) -> Result<()> {
    let t_next = state.t + dt;
    let (rho, phys) = DensityMatrix::physicalize(unnormalized).map_err(|_| Error::NonPhysicalState { t: t_next, clipped: f64::INFINITY })?;
    if phys.clipped > MAX_CLIP_TRAJECTORY {
        return Err(Error::NonPhysicalState { t: t_next, clipped: phys.clipped });
    }
    state.min_eigenvalue = state.min_eigenvalue.min(phys.min_eigenvalue);
    let seg = model.segment_after(t_next)?;
    state.m = seg.diffusive_means(rho.as_operator());
    state.mu = seg.jump_intensities(rho.as_operator());
    state.rho = rho;
    state.t = t_next;
    state.step += 1;
    Ok(())
}

/// One Euler–Maruyama step of the nonlinear equation under the physical law.
///
/// `draw.dw` are innovation increments `dŴ_j` and `draw.jumps` must have been
/// drawn with probabilities `min(μ_k dt, 1)` using `state.mu`. On a jump the
/// state is replaced by `𝒥_k[ρ]/Tr{𝒥_k[ρ]}`; otherwise
///
/// ```text
/// dρ = (ℒ[ρ] − Σ_k (𝒥_k[ρ] − μ_k ρ)) dt + Σ_j (R_j ρ + ρ R_j† − m_j ρ) dŴ_j.
/// ```
///
/// The output paths advance by `dW_j = dŴ_j + m_j dt`.
pub fn step_nonlinear(
    model: &MeasurementModel,
    reference: ReferenceMeans<'_>,
    state: &mut TrajectoryState,
    draw: &NoiseDraw,
    dt: f64,
) -> Result<LogDensityIncrement> {
    let seg = model.segment_after(state.t)?;
    check_intensities(state.t, state.mu.iter().copied(), dt)?;
    let rho = state.rho.as_operator();
    let next = if draw.any_jump() {
        apply_jumps(seg, rho, &draw.jumps, |_, x| {
            let tr = x.trace().re;
            (tr > 0.0).then(|| 1.0 / tr)
        })
    } else {
        let mut drift = seg.no_jump_generator(rho);
        drift.add_scaled(C64::from(state.mu.iter().sum::<f64>()), rho);
        let mut next = rho + &(&drift * dt);
        for ((r, &mj), &dw) in seg.diffusive_ops().iter().zip(&state.m).zip(&draw.dw) {
            let mut d = diffusive_action(r, rho);
            d.add_scaled(C64::from(-mj), rho);
            next.add_scaled(C64::from(dw), &d);
        }
        next
    };

    let dw_q: Vec<f64> = draw.dw.iter().zip(&state.m).map(|(dw, mj)| dw + mj * dt).collect();
    let rates: Vec<f64> = seg.jump_channels().iter().map(|c| c.rate()).collect();
    let inc = accumulate_log_densities(&state.m, &state.mu, reference, &rates, &dw_q, &draw.jumps, dt);

    finish_step(model, state, &next, dt)?;
    state.log_p += inc.log_p;
    state.log_q += inc.log_q;
    for (w, dw) in state.w.iter_mut().zip(&dw_q) {
        *w += dw;
    }
    for (n, &jump) in state.counts.iter_mut().zip(&draw.jumps) {
        *n += jump as u64;
    }
    Ok(inc)
}

/// One Euler–Maruyama step of the linear equation under the reference
/// measure, tracking `p_t = Tr{σ_t}` in log space and `ρ_t = σ_t / p_t`.
///
/// `draw.dw` are reference-measure increments and `draw.jumps` must have
/// been drawn with probabilities `min(λ_k dt, 1)`. On a jump
/// `σ ← 𝒥_k[σ]/λ_k`; otherwise
///
/// ```text
/// dσ = (ℒ[σ] − Σ_k (𝒥_k[σ]/λ_k − σ) λ_k) dt + Σ_j (R_j σ + σ R_j†) dW_j.
/// ```
///
/// The returned `log_p` increment is `ln` of the trace ratio over the step.
pub fn step_linear(
    model: &MeasurementModel,
    reference: ReferenceMeans<'_>,
    state: &mut TrajectoryState,
    draw: &NoiseDraw,
    dt: f64,
) -> Result<LogDensityIncrement> {
    let seg = model.segment_after(state.t)?;
    let rates: Vec<f64> = seg.jump_channels().iter().map(|c| c.rate()).collect();
    check_intensities(state.t, rates.iter().copied(), dt)?;
    let rho = state.rho.as_operator();
    let next = if draw.any_jump() {
        apply_jumps(seg, rho, &draw.jumps, |k, _| Some(1.0 / rates[k]))
    } else {
        let mut drift = seg.no_jump_generator(rho);
        drift.add_scaled(C64::from(rates.iter().sum::<f64>()), rho);
        let mut next = rho + &(&drift * dt);
        for (r, &dw) in seg.diffusive_ops().iter().zip(&draw.dw) {
            next.add_scaled(C64::from(dw), &diffusive_action(r, rho));
        }
        next
    };

    let t_next = state.t + dt;
    // Without jumps the trace ratio is known in closed form; using it keeps
    // p_t exactly 1 when no channel carries information.
    let tr = if draw.any_jump() {
        next.trace().re
    } else {
        let jump_part: f64 = rates.iter().zip(&state.mu).map(|(l, mu)| (l - mu) * dt).sum();
        let diffusive_part: f64 = state.m.iter().zip(&draw.dw).map(|(m, dw)| m * dw).sum();
        1.0 + jump_part + diffusive_part
    };
    let log_p = state.log_p + tr.ln();
    if !(tr > 0.0 && tr.is_finite()) || log_p < LOG_P_FLOOR {
        return Err(Error::TraceCollapse { t: t_next, log_p });
    }
    let q_inc = accumulate_log_densities(&state.m, &state.mu, reference, &rates, &draw.dw, &draw.jumps, dt);
    let inc = LogDensityIncrement { log_p: tr.ln(), log_q: q_inc.log_q };

    finish_step(model, state, &next.scale(1.0 / tr), dt)?;
    state.log_p = log_p;
    state.log_q += inc.log_q;
    for (w, dw) in state.w.iter_mut().zip(&draw.dw) {
        *w += dw;
    }
    for (n, &jump) in state.counts.iter_mut().zip(&draw.jumps) {
        *n += jump as u64;
    }
    Ok(inc)
}
