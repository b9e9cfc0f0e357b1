//! Auxiliary norms, the compact sets `K_n`, the certified coordinate bound
//! `D_n`, the per-vector polynomial solver, and the cyclicity demonstration.

use serde::Serialize;

use crate::construction::ConstructionState;
use crate::error::{Error, Result};
use crate::operator::{self, to_frame};
use crate::polynomial::Polynomial;
use crate::scalar::Scalar;
use crate::schedule::nn_schedule;
use crate::space::SpaceDescriptor;
use crate::vector::{FinVector, Frame};

/// `‖x‖_N = p_N(x) + Σ_i 2^{-i} p_{lvl(i)+1}(x_i e_i) / C_{lvl(i)+1}` on an
/// e-frame vector.
pub fn weighted_norm<S: Scalar>(space: &SpaceDescriptor, nlev: u32, v: &FinVector<S>) -> Result<S> {
    let mut acc = space.seminorm(nlev, v)?;
    for (i, c) in v.iter() {
        let lvl = space.level_of(i)?;
        let term = space.seminorm_of_term(lvl + 1, i, c)? / space.basis_constant::<S>(lvl + 1);
        acc = acc + term * S::pow2(-(i as i64));
    }
    Ok(acc)
}

/// `‖v‖_N` for a vector in any frame.
pub fn norm_n<S: Scalar>(state: &ConstructionState<S>, nlev: u32, v: &FinVector<S>) -> Result<S> {
    weighted_norm(state.space(), nlev, &to_frame(state, v, Frame::E)?)
}

/// `τ_n`: drops γ-coordinates at or above `a_n`.
pub fn tau_restrict<S: Scalar>(state: &ConstructionState<S>, n: usize, y: &FinVector<S>) -> Result<FinVector<S>> {
    if y.frame() != Frame::Gamma {
        return Err(Error::Frame(format!("τ_n acts on gamma-frame vectors, got {}", y.frame())));
    }
    let top = state.delta(n + 1) as u64;
    if y.max_key().is_some_and(|k| k >= top) {
        return Err(Error::Frame(format!("support reaches beyond Δ_{} = {top}", n + 1)));
    }
    let an = state.a(n) as u64;
    Ok(y.filtered(|k| k < an))
}

#[derive(Clone, Debug, Serialize)]
pub struct KnMembership<S> {
    pub n: usize,
    pub norm1: S,
    pub tau_norm1: S,
    /// Support lies in `span{u_j : j < Δ_{n+1}}`.
    pub in_span: bool,
    pub in_set: bool,
}

pub fn kn_membership<S: Scalar>(state: &ConstructionState<S>, n: usize, y: &FinVector<S>) -> Result<KnMembership<S>> {
    let top = state.delta(n + 1);
    let u = to_frame(state, y, Frame::U)?;
    let norm1 = norm_n(state, 1, &u)?;
    if u.max_key().is_some_and(|k| k as usize >= top) {
        return Ok(KnMembership { n, norm1, tau_norm1: S::zero(), in_span: false, in_set: false });
    }
    let g = operator::u_to_gamma(state, &u)?;
    let tau_norm1 = norm_n(state, 1, &tau_restrict(state, n, &g)?)?;
    let in_set = S::ge_tol(&S::from_ratio(3, 2), &norm1) && S::ge_tol(&tau_norm1, &S::from_ratio(1, 2));
    Ok(KnMembership { n, norm1, tau_norm1, in_span: true, in_set })
}

/// `π^{(u)}_{[0,Δ_{n+1})} x`: e-coordinates placed below `Δ_{n+1}`.
pub fn project_u<S: Scalar>(state: &ConstructionState<S>, n: usize, x: &FinVector<S>) -> FinVector<S> {
    let top = state.delta(n + 1);
    x.filtered(|i| state.position_of(i).is_some_and(|j| j < top))
}

#[derive(Clone, Debug, Serialize)]
pub struct KnEntry<S> {
    pub stage: usize,
    pub m_k: S,
    pub membership: KnMembership<S>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KnLocation<S> {
    pub m0: usize,
    /// `M = ‖π x‖_1 - p_1(π x)` at `m0`.
    pub lower_bound: S,
    pub entries: Vec<KnEntry<S>>,
}

pub fn kn_locate<S: Scalar>(state: &ConstructionState<S>, x: &FinVector<S>, stages: &[usize]) -> Result<KnLocation<S>> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    // e-frame, since coordinates beyond the horizon belong to the tail
    if x.frame() != Frame::E {
        return Err(Error::Frame("kn_locate takes e-frame input".into()));
    }
    let space = state.space();
    let mut found = None;
    for m0 in 1..=state.stages_done() {
        let p = project_u(state, m0, x);
        let m = weighted_norm(space, 1, &p)? - space.seminorm(1, &p)?;
        if !m.is_zero() && !m.is_negative() {
            found = Some((m0, m));
            break;
        }
    }
    let (m0, lower_bound) = found
        .ok_or_else(|| Error::Horizon(format!("no stage up to {} captures part of the vector", state.stages_done())))?;
    let mut entries = Vec::new();
    for &n in stages {
        if n == 0 || n > state.stages_done() {
            return Err(Error::Horizon(format!("stage {n} is not committed")));
        }
        let p = project_u(state, n, x);
        let m_k = weighted_norm(space, 1, &p)?;
        let membership = if m_k.is_zero() {
            KnMembership { n, norm1: S::zero(), tau_norm1: S::zero(), in_span: true, in_set: false }
        } else {
            kn_membership(state, n, &p.scaled(&(S::one() / m_k.clone())))?
        };
        entries.push(KnEntry { stage: n, m_k, membership });
    }
    Ok(KnLocation { m0, lower_bound, entries })
}

/// Certified `D_n >= sup{Σ|y_j| : y ∈ K_n}`.
///
/// `‖x‖_1 <= 3/2` bounds every e-coordinate through its weighted term; the
/// bound is carried to u-coordinates by `α_j` and to γ-coordinates through
/// `u_j = γ_j - γ_{j-a_k}`, which at most doubles the perturbed-block terms.
pub fn certify_d<S: Scalar>(state: &ConstructionState<S>, n: usize) -> Result<S> {
    let space = state.space();
    let three_halves = S::from_ratio(3, 2);
    let mut sum = S::zero();
    for j in 0..state.delta(n + 1) {
        let i = state.pos_index[j];
        let lvl = state.level_at(j);
        let pe = space.seminorm_of_term(lvl + 1, i, &S::one())?;
        let c: S = space.basis_constant(lvl + 1);
        let bound = three_halves.clone() * S::pow2(i as i64) * c / (pe * state.alpha[j].abs());
        let weight = if state.perturbed_block(j).is_some() { S::from_i64(2) } else { S::one() };
        sum = sum + weight * bound;
    }
    let prev = if n >= 2 { state.d(n - 1).clone() } else { S::one() };
    Ok(sum.max_of(prev).max_of(S::one()))
}

/// Output of [`find_cyclic_poly`].
#[derive(Clone, Debug)]
pub struct CyclicPoly<S> {
    pub poly: Polynomial<S>,
    /// γ-coordinates `c_m`, `m ∈ [Δ_{n+1}, 2Δ_{n+1})`, of `P(T)y - γ_{a_n}`.
    pub remainder: FinVector<S>,
    pub abs_p: S,
    pub abs_c: S,
    /// `‖P(T)y - u_0‖_{N_n}`.
    pub error: S,
    /// `2‖u_{a_n}‖_{N_n} + max(|P|, Σ|c_m|) max_{Δ_{n+1} <= j < 2Δ_{n+1}} ‖u_j‖_{N_n}`.
    pub bound: S,
    pub budget_flag: bool,
}

/// Solves for `P` with `P(T)y = γ_{a_n} + Σ_{m >= Δ_{n+1}} c_m γ_m`.
pub fn find_cyclic_poly<S: Scalar>(state: &ConstructionState<S>, n: usize, y: &FinVector<S>) -> Result<CyclicPoly<S>> {
    if state.stages_done() < n + 1 {
        return Err(Error::Horizon(format!("the solver at stage {n} needs stage {} committed", n + 1)));
    }
    let memb = kn_membership(state, n, y)?;
    if !memb.in_set {
        return Err(Error::Precondition(format!(
            "vector is not in K_{n} (‖y‖_1 = {}, ‖τ y‖_1 = {})",
            memb.norm1, memb.tau_norm1
        )));
    }
    let g = to_frame(state, y, Frame::Gamma)?;
    let d = state.delta(n + 1);
    let an = state.a(n);
    let v = g.min_key().expect("members of K_n are nonzero") as usize;
    if v >= an {
        return Err(Error::Precondition(format!("valuation {v} is not below a_{n} = {an}")));
    }
    let yv = g.get(v as u64);
    let higher: Vec<(usize, S)> =
        g.iter().filter(|(k, _)| *k as usize > v).map(|(k, c)| (k as usize, c.clone())).collect();
    let mut rho = vec![S::zero(); d - v];
    for m in an..d {
        let mut acc = if m == an { S::one() } else { S::zero() };
        for (k, yk) in &higher {
            if *k > m || m - k < an - v {
                continue;
            }
            acc = acc - rho[m - k].clone() * yk.clone();
        }
        rho[m - v] = acc / yv.clone();
    }
    let poly = Polynomial::new(rho);
    let mut remainder = FinVector::zero(Frame::Gamma);
    for (r, c) in poly.terms() {
        for (k, yk) in g.iter() {
            let m = r + k as usize;
            if m >= d {
                remainder.add_at(m as u64, c.clone() * yk.clone());
            }
        }
    }
    let nn = nn_schedule(n);
    let ua = state.u_vector(an)?;
    let mut diff = ua.clone();
    for (m, c) in remainder.iter() {
        diff.axpy(c, &operator::gamma_e(state, m as usize)?);
    }
    let space = state.space();
    let error = weighted_norm(space, nn, &diff)?;
    let mut max_u = S::zero();
    for j in d..2 * d {
        max_u = max_u.max_of(weighted_norm(space, nn, &state.u_vector(j)?)?);
    }
    let abs_p = poly.abs_sum();
    let abs_c = remainder.l1();
    let bound = S::from_i64(2) * weighted_norm(space, nn, &ua)? + abs_p.clone().max_of(abs_c.clone()) * max_u;
    let dn = state.d(n);
    let budget_flag = abs_p <= *dn && abs_c <= *dn;
    Ok(CyclicPoly { poly, remainder, abs_p, abs_c, error, bound, budget_flag })
}

/// `(p_{N_n}(P(T)x), 4 max(1, |P|/D_n) p_{N_n+2}(x))` for `x` supported on
/// positions `>= Δ_{n+1}`.
pub fn tail_margin<S: Scalar>(
    state: &ConstructionState<S>,
    n: usize,
    p: &Polynomial<S>,
    x_tail: &FinVector<S>,
) -> Result<(S, S)> {
    let d = state.delta(n + 1);
    if p.valuation().is_some_and(|v| v < 1) {
        return Err(Error::Precondition("tail bound needs val(P) >= 1".into()));
    }
    if p.degree().is_some_and(|g| g >= d) {
        return Err(Error::Precondition(format!("tail bound needs deg(P) < Δ_{} = {d}", n + 1)));
    }
    let u = to_frame(state, x_tail, Frame::U)?;
    if u.min_key().is_some_and(|k| (k as usize) < d) {
        return Err(Error::Precondition(format!("tail vector has positions below Δ_{} = {d}", n + 1)));
    }
    let nn = nn_schedule(n);
    let image = to_frame(state, &operator::apply_poly(state, p, &u)?, Frame::E)?;
    let lhs = state.space().seminorm(nn, &image)?;
    let scale = (p.abs_sum() / state.d(n).clone()).max_of(S::one());
    let e = to_frame(state, &u, Frame::E)?;
    let rhs = S::from_i64(4) * scale * state.space().seminorm(nn + 2, &e)?;
    Ok((lhs, rhs))
}

#[derive(Clone, Debug)]
pub struct CyclicityWitness<S> {
    pub x: FinVector<S>,
    pub nlev: u32,
    pub stage: usize,
    pub m_k: S,
    pub lower_bound: S,
    pub q: Polynomial<S>,
    pub achieved_error: S,
    /// `3/2^{n_k} + (4/M) p_{N+2}(tail)`.
    pub predicted_bound: S,
    pub budget_flag: bool,
}

/// `Q(T)x` evaluated through γ-coordinates.
pub fn apply_poly_gamma<S: Scalar>(
    state: &ConstructionState<S>,
    q: &Polynomial<S>,
    x: &FinVector<S>,
) -> Result<FinVector<S>> {
    let g = to_frame(state, x, Frame::Gamma)?;
    let mut out = FinVector::zero(Frame::Gamma);
    for (r, c) in q.terms() {
        for (k, yk) in g.iter() {
            out.add_at(k + r as u64, c.clone() * yk.clone());
        }
    }
    to_frame(state, &out, Frame::E)
}

/// `p_N(Q(T)x - u_0)`.
pub fn replay_error<S: Scalar>(
    state: &ConstructionState<S>,
    nlev: u32,
    q: &Polynomial<S>,
    x: &FinVector<S>,
) -> Result<S> {
    let image = apply_poly_gamma(state, q, x)?;
    state.space().seminorm(nlev, &image.sub(&state.u_vector(0)?))
}

/// Finds `Q` with `p_N(Q(T)x - u_0) < eps`, trying stages `n_k` with
/// `N_{n_k} = N` in increasing order.
pub fn cyclic_approx<S: Scalar>(
    state: &ConstructionState<S>,
    x: &FinVector<S>,
    nlev: u32,
    eps: &S,
) -> Result<CyclicityWitness<S>> {
    if x.is_zero() {
        return Err(Error::ZeroVector);
    }
    if x.frame() != Frame::E {
        return Err(Error::Frame("cyclic_approx takes e-frame input".into()));
    }
    let usable: Vec<usize> = (1..state.stages_done()).filter(|m| nn_schedule(*m) == nlev).collect();
    if usable.is_empty() {
        return Err(Error::Horizon(format!(
            "no stage n < {} with N_n = {nlev}; build more stages",
            state.stages_done()
        )));
    }
    let loc = kn_locate(state, x, &usable)?;
    let space = state.space();
    let mut best: Option<CyclicityWitness<S>> = None;
    let mut last_err = None;
    for entry in &loc.entries {
        if !entry.membership.in_set {
            continue;
        }
        let n = entry.stage;
        let y = project_u(state, n, x).scaled(&(S::one() / entry.m_k.clone()));
        let sol = match find_cyclic_poly(state, n, &y) {
            Ok(s) => s,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let q = sol.poly.scaled(&(S::one() / entry.m_k.clone()));
        let achieved_error = match replay_error(state, nlev, &q, x) {
            Ok(v) => v,
            Err(e) => {
                last_err = Some(e);
                continue;
            }
        };
        let tail = x.sub(&project_u(state, n, x));
        let predicted_bound = S::from_i64(3) * S::pow2(-(n as i64))
            + S::from_i64(4) * space.seminorm(nlev + 2, &tail)? / loc.lower_bound.clone();
        let w = CyclicityWitness {
            x: x.clone(),
            nlev,
            stage: n,
            m_k: entry.m_k.clone(),
            lower_bound: loc.lower_bound.clone(),
            q,
            achieved_error,
            predicted_bound,
            budget_flag: sol.budget_flag,
        };
        let done = w.achieved_error < *eps;
        if best.as_ref().is_none_or(|b| w.achieved_error < b.achieved_error) {
            best = Some(w);
        }
        if done {
            break;
        }
    }
    match best {
        Some(w) if w.achieved_error < *eps => Ok(w),
        Some(w) => Err(Error::Witness(format!(
            "best error {} at stage {} does not reach eps = {eps}; build more stages",
            w.achieved_error, w.stage
        ))),
        None => Err(last_err.unwrap_or_else(|| {
            Error::Horizon(format!("no committed stage with N_n = {nlev} contains the vector in K_n"))
        })),
    }
}
