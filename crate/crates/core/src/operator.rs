//! The perturbed forward shift `T`, its orbit `γ_j = T^j u_0`, and the
//! continuity data `L_N`.

use crate::construction::ConstructionState;
use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::scalar::Scalar;
use crate::vector::{FinVector, Frame};

/// How `T` acts on `u_j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Step {
    /// `T u_j = u_{j+1}`.
    Shift,
    /// `j = a_n - 1`: `T u_j = u_{a_n} + u_0`.
    Wrap(usize),
    /// `j = a_n + Δ_n - 1`: `T u_j = u_{Δ_{n+1}} - u_{Δ_n}`.
    Edge(usize),
}

impl<S: Scalar> ConstructionState<S> {
    pub fn step_at(&self, j: usize) -> Step {
        if let Ok(k) = self.a.binary_search(&(j + 1)) {
            return Step::Wrap(k + 1);
        }
        // Δ_{n+1} for n >= 1 sits at delta[n + 1]
        match self.delta[2..].binary_search(&(j + 1)) {
            Ok(k) => Step::Edge(k + 1),
            Err(_) => Step::Shift,
        }
    }

    /// Stage `n` with `j ∈ [a_n, a_n + Δ_n)`, if any.
    pub fn perturbed_block(&self, j: usize) -> Option<usize> {
        let k = self.a.partition_point(|a| *a <= j);
        if k == 0 {
            return None;
        }
        let n = k;
        (j < self.a[n - 1] + self.delta[n]).then_some(n)
    }
}

fn key(j: u64) -> usize {
    j as usize
}

/// `T u_j` in the u-frame.
pub fn t_of_u<S: Scalar>(state: &ConstructionState<S>, j: usize) -> Result<FinVector<S>> {
    state.check_horizon(j)?;
    let one = S::one();
    let v = match state.step_at(j) {
        Step::Shift => {
            state.check_horizon(j + 1)?;
            FinVector::unit(Frame::U, j as u64 + 1)
        }
        Step::Wrap(n) => FinVector::from_pairs(Frame::U, [(state.a(n) as u64, one.clone()), (0, one)]),
        Step::Edge(n) => {
            state.check_horizon(j + 1)?;
            FinVector::from_pairs(Frame::U, [(j as u64 + 1, one.clone()), (state.delta(n) as u64, -one)])
        }
    };
    Ok(v)
}

/// e-frame → u-frame via `e_{i_j} = λ_j u_j`.
pub fn e_to_u<S: Scalar>(state: &ConstructionState<S>, v: &FinVector<S>) -> Result<FinVector<S>> {
    expect_frame(v, Frame::E)?;
    let mut out = FinVector::zero(Frame::U);
    for (i, c) in v.iter() {
        let j = state.position_of(i).ok_or_else(|| {
            Error::Horizon(format!("basis index {i} is not placed below the horizon {}", state.horizon()))
        })?;
        out.add_at(j as u64, c.clone() / state.alpha[j].clone());
    }
    Ok(out)
}

/// u-frame → e-frame.
pub fn u_to_e<S: Scalar>(state: &ConstructionState<S>, v: &FinVector<S>) -> Result<FinVector<S>> {
    expect_frame(v, Frame::U)?;
    let mut out = FinVector::zero(Frame::E);
    for (j, c) in v.iter() {
        let j = key(j);
        state.check_horizon(j)?;
        out.add_at(state.pos_index[j], c.clone() * state.alpha[j].clone());
    }
    Ok(out)
}

/// γ-frame → u-frame.
pub fn gamma_to_u<S: Scalar>(state: &ConstructionState<S>, y: &FinVector<S>) -> Result<FinVector<S>> {
    expect_frame(y, Frame::Gamma)?;
    let mut out = FinVector::zero(Frame::U);
    for (j, c) in y.iter() {
        out.axpy(c, &gamma_u(state, key(j))?);
    }
    Ok(out)
}

/// u-frame → γ-frame, using `u_j = γ_j - γ_{j - a_n}` on perturbed blocks.
pub fn u_to_gamma<S: Scalar>(state: &ConstructionState<S>, v: &FinVector<S>) -> Result<FinVector<S>> {
    expect_frame(v, Frame::U)?;
    let mut out = FinVector::zero(Frame::Gamma);
    for (j, c) in v.iter() {
        let j = key(j);
        state.check_horizon(j)?;
        out.add_at(j as u64, c.clone());
        if let Some(n) = state.perturbed_block(j) {
            out.add_at((j - state.a(n)) as u64, -c.clone());
        }
    }
    Ok(out)
}

/// Converts `v` to the requested frame.
pub fn to_frame<S: Scalar>(state: &ConstructionState<S>, v: &FinVector<S>, frame: Frame) -> Result<FinVector<S>> {
    if v.frame() == frame {
        return Ok(v.clone());
    }
    let u = match v.frame() {
        Frame::U => v.clone(),
        Frame::E => e_to_u(state, v)?,
        Frame::Gamma => gamma_to_u(state, v)?,
    };
    match frame {
        Frame::U => Ok(u),
        Frame::E => u_to_e(state, &u),
        Frame::Gamma => u_to_gamma(state, &u),
    }
}

/// `γ_j = T^j u_0` in the u-frame.
pub fn gamma_u<S: Scalar>(state: &ConstructionState<S>, j: usize) -> Result<FinVector<S>> {
    state.check_horizon(j)?;
    let mut out = FinVector::zero(Frame::U);
    let mut m = j;
    loop {
        out.add_at(m as u64, S::one());
        match state.perturbed_block(m) {
            Some(n) => m -= state.a(n),
            None => return Ok(out),
        }
    }
}

/// `γ_j` in the e-frame.
pub fn gamma_e<S: Scalar>(state: &ConstructionState<S>, j: usize) -> Result<FinVector<S>> {
    u_to_e(state, &gamma_u(state, j)?)
}

/// `T v`, returned in the frame of `v`.
pub fn apply_t<S: Scalar>(state: &ConstructionState<S>, v: &FinVector<S>) -> Result<FinVector<S>> {
    if v.frame() == Frame::Gamma {
        let mut out = FinVector::zero(Frame::Gamma);
        for (j, c) in v.iter() {
            state.check_horizon(key(j) + 1)?;
            out.add_at(j + 1, c.clone());
        }
        return Ok(out);
    }
    let u = to_frame(state, v, Frame::U)?;
    let mut out = FinVector::zero(Frame::U);
    for (j, c) in u.iter() {
        out.axpy(c, &t_of_u(state, key(j))?);
    }
    to_frame(state, &out, v.frame())
}

/// `P(T) v` by Horner accumulation, returned in the frame of `v`.
pub fn apply_poly<S: Scalar>(
    state: &ConstructionState<S>,
    p: &Polynomial<S>,
    v: &FinVector<S>,
) -> Result<FinVector<S>> {
    let frame = v.frame();
    let work = if frame == Frame::E { e_to_u(state, v)? } else { v.clone() };
    let mut acc = FinVector::zero(work.frame());
    for c in p.coeffs().iter().rev() {
        acc = apply_t(state, &acc)?;
        acc.axpy(c, &work);
    }
    if frame == Frame::E {
        u_to_e(state, &acc)
    } else {
        Ok(acc)
    }
}

/// `L_N = max{2^j p_N(T u_j) / p_{N+1}(u_j) : p_{N+1}(u_j) ≠ 0, j < Δ_{N+1} - 1} + 1`.
pub fn continuity_constant<S: Scalar>(state: &ConstructionState<S>, nlev: usize) -> Result<S> {
    if nlev == 0 || nlev > state.stages_done() {
        return Err(Error::Horizon(format!("L_{nlev} needs stage {nlev} committed ({} done)", state.stages_done())));
    }
    let level = nlev as u32;
    let mut best = S::zero();
    for j in 0..state.delta(nlev + 1) - 1 {
        let den = state.p_u(level + 1, j);
        if den.is_zero() {
            continue;
        }
        let tu = u_to_e(state, &t_of_u(state, j)?)?;
        let num = state.space().seminorm(level, &tu)?;
        if num.is_zero() {
            continue;
        }
        best = best.max_of(S::pow2(j as i64) * num / den);
    }
    Ok(best + S::one())
}

/// `(p_N(T v), 8 C_{N+1} L_N p_{N+2}(v))`.
pub fn continuity_margin<S: Scalar>(state: &ConstructionState<S>, nlev: usize, v: &FinVector<S>) -> Result<(S, S)> {
    let level = nlev as u32;
    let e = to_frame(state, v, Frame::E)?;
    let tv = to_frame(state, &apply_t(state, v)?, Frame::E)?;
    let lhs = state.space().seminorm(level, &tv)?;
    let c: S = state.space().basis_constant(level + 1);
    let rhs = S::from_i64(8) * c * state.l(nlev).clone() * state.space().seminorm(level + 2, &e)?;
    Ok((lhs, rhs))
}

fn expect_frame<S: Scalar>(v: &FinVector<S>, frame: Frame) -> Result<()> {
    if v.frame() != frame {
        return Err(Error::Frame(format!("expected a {frame}-frame vector, got {}", v.frame())));
    }
    Ok(())
}
