//! The staged inductive construction of the reordered, rescaled basis
//! `u_j = α_j e_{i_j}` and the block lengths `a_n`, `Δ_n`.
//!
//! Stage `n` fixes the block `[Δ_n, Δ_{n+1})` in three passes:
//! `[Δ_n, 2Δ_n)` on `E_n`, then `[a_n, a_n + Δ_n)` on `E_{N_n}` (which does
//! not depend on `a_n`), then the staircase `[2Δ_n, a_n)`, whose length
//! decides `a_n`. Every stage is re-certified from the seminorm oracle before
//! it is committed.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::analysis::{self, weighted_norm};
use crate::certificates::{self, CertificateReport};
use crate::error::{Error, Result};
use crate::operator;
use crate::scalar::Scalar;
use crate::schedule::nn_schedule;
use crate::space::SpaceDescriptor;
use crate::vector::{FinVector, Frame};

/// Default cap on the number of committed positions.
pub const DEFAULT_MAX_HORIZON: u64 = 4_000_000;

#[derive(Clone, Debug)]
pub struct ConstructionState<S> {
    pub(crate) space: SpaceDescriptor,
    pub(crate) stages_done: usize,
    /// `Δ_0 ..= Δ_{n+1}`.
    pub(crate) delta: Vec<usize>,
    /// `a_1 ..= a_n`, stored from index 0.
    pub(crate) a: Vec<usize>,
    /// `s_2 ..= s_{n+1}`, stored from index 0.
    pub(crate) s: Vec<u64>,
    pub(crate) pos_index: Vec<u64>,
    pub(crate) alpha: Vec<S>,
    /// `D_1 ..= D_n`.
    pub(crate) d: Vec<S>,
    /// `L_1 ..= L_n`.
    pub(crate) l: Vec<S>,
    pub(crate) certificates: Vec<CertificateReport>,
    pub(crate) index_pos: HashMap<u64, usize>,
    pub(crate) levels: Vec<u32>,
    pub(crate) max_horizon: u64,
}

impl<S: Scalar> ConstructionState<S> {
    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    pub fn stages_done(&self) -> usize {
        self.stages_done
    }

    /// `Δ_m`.
    pub fn delta(&self, m: usize) -> usize {
        self.delta[m]
    }

    pub fn deltas(&self) -> &[usize] {
        &self.delta
    }

    /// `a_m`, `m >= 1`.
    pub fn a(&self, m: usize) -> usize {
        self.a[m - 1]
    }

    pub fn a_values(&self) -> &[usize] {
        &self.a
    }

    /// `s_m`, `m >= 2`.
    pub fn s(&self, m: usize) -> u64 {
        self.s[m - 2]
    }

    pub fn s_values(&self) -> &[u64] {
        &self.s
    }

    /// Certified `D_m`, `m >= 1`.
    pub fn d(&self, m: usize) -> &S {
        &self.d[m - 1]
    }

    pub fn d_values(&self) -> &[S] {
        &self.d
    }

    /// `L_m`, `m >= 1`.
    pub fn l(&self, m: usize) -> &S {
        &self.l[m - 1]
    }

    pub fn l_values(&self) -> &[S] {
        &self.l
    }

    pub fn certificates(&self) -> &[CertificateReport] {
        &self.certificates
    }

    /// `Δ_{n+1}` for `n` committed stages.
    pub fn horizon(&self) -> usize {
        self.delta[self.stages_done + 1]
    }

    pub fn max_horizon(&self) -> u64 {
        self.max_horizon
    }

    pub fn set_max_horizon(&mut self, limit: u64) {
        self.max_horizon = limit;
    }

    /// Basis enumeration number `i_j = σ^{-1}(j)`.
    pub fn index_at(&self, j: usize) -> Result<u64> {
        self.check_horizon(j)?;
        Ok(self.pos_index[j])
    }

    /// `σ(i)`: position carrying `e_i`, if committed.
    pub fn position_of(&self, enum_no: u64) -> Option<usize> {
        self.index_pos.get(&enum_no).copied()
    }

    pub fn alpha(&self, j: usize) -> Result<&S> {
        self.check_horizon(j)?;
        Ok(&self.alpha[j])
    }

    /// `λ_j = 1 / α_j`, so that `e_{i_j} = λ_j u_j`.
    pub fn lambda(&self, j: usize) -> Result<S> {
        Ok(S::one() / self.alpha(j)?.clone())
    }

    pub fn level_at(&self, j: usize) -> u32 {
        self.levels[j]
    }

    pub(crate) fn check_horizon(&self, j: usize) -> Result<()> {
        if j >= self.horizon() {
            return Err(Error::Horizon(format!(
                "position {j} is beyond the horizon Δ_{} = {}",
                self.stages_done + 1,
                self.horizon()
            )));
        }
        Ok(())
    }

    /// `u_j = α_j e_{i_j}` in the e-frame.
    pub fn u_vector(&self, j: usize) -> Result<FinVector<S>> {
        self.check_horizon(j)?;
        Ok(FinVector::single(Frame::E, self.pos_index[j], self.alpha[j].clone()))
    }

    /// `p_l(u_j)`.
    pub fn p_u(&self, l: u32, j: usize) -> S {
        self.space.seminorm_of_term(l, self.pos_index[j], &self.alpha[j]).expect("committed index belongs to the space")
    }

    /// Stage whose block `[Δ_m, Δ_{m+1})` contains position `j >= 1`.
    pub fn block_of(&self, j: usize) -> usize {
        debug_assert!(j >= 1);
        // delta is strictly increasing from index 1
        self.delta.partition_point(|d| *d <= j) - 1
    }

    /// `N_m` of the schedule.
    pub fn nn(&self, m: usize) -> u32 {
        nn_schedule(m)
    }

    pub(crate) fn rebuild_derived(&mut self) -> Result<()> {
        self.index_pos.clear();
        self.levels.clear();
        for (j, &i) in self.pos_index.iter().enumerate() {
            self.levels.push(self.space.level_of(i)?);
            self.index_pos.insert(i, j);
        }
        Ok(())
    }

    fn place(&mut self, j: usize, enum_no: u64, alpha: S) -> Result<()> {
        if j >= self.pos_index.len() {
            self.pos_index.resize(j + 1, u64::MAX);
            self.alpha.resize(j + 1, S::zero());
            self.levels.resize(j + 1, u32::MAX);
        }
        self.pos_index[j] = enum_no;
        self.alpha[j] = alpha;
        self.levels[j] = self.space.level_of(enum_no)?;
        self.index_pos.insert(enum_no, j);
        Ok(())
    }

    fn used(&self) -> HashSet<u64> {
        self.index_pos.keys().copied().collect()
    }
}

/// `α := smallest power of two >= 2 * bound` (`1` without a bound).
fn big_alpha<S: Scalar>(bound: Option<S>) -> S {
    match bound {
        Some(b) if !b.is_zero() => (S::from_i64(2) * b).ceil_pow2(),
        _ => S::one(),
    }
}

fn raise<S: Scalar>(acc: &mut Option<S>, v: S) {
    *acc = Some(match acc.take() {
        Some(a) => a.max_of(v),
        None => v,
    });
}

/// Index in `E_level`, outside `exclude`, of least enumeration number such
/// that `u = numer / p_{nlev+1}(e_i) · e_i` has `‖u‖_{nlev} <= target`.
#[allow(clippy::too_many_arguments)]
fn sufficiently_big_index<S: Scalar>(
    space: &SpaceDescriptor,
    level: u32,
    nlev: u32,
    numer: &S,
    target: &S,
    exclude: &HashSet<u64>,
    stage: usize,
    limit: u64,
) -> Result<(u64, S)> {
    // ‖u‖ ≈ numer / (C 2^i): start a little below the estimate.
    let c = space.basis_constant::<S>(nlev + 1);
    let est = numer.log2() - target.log2() - c.log2();
    let floor = if est.is_finite() && est > 4.0 { (est - 4.0).floor() as u64 } else { 0 };
    if floor > limit {
        return Err(Error::HorizonLimit { stage, needed: floor, limit });
    }
    for cand in space.level_members(level, floor) {
        if exclude.contains(&cand) {
            continue;
        }
        if cand > limit {
            return Err(Error::HorizonLimit { stage, needed: cand, limit });
        }
        let pe = space.seminorm_of_term(nlev + 1, cand, &S::one())?;
        let alpha = numer.clone() / pe;
        let norm = weighted_norm(space, nlev, &FinVector::single(Frame::E, cand, alpha.clone()))?;
        if norm <= *target {
            return Ok((cand, alpha));
        }
    }
    Err(Error::LevelExhausted { space: space.name(), level })
}

/// Max over a window of later positions, maintained while walking backwards.
struct BackwardWindow<S> {
    width: usize,
    deque: VecDeque<(usize, S)>,
}

impl<S: Scalar> BackwardWindow<S> {
    fn new(width: usize) -> Self {
        BackwardWindow { width, deque: VecDeque::new() }
    }

    /// Adds position `pos`; the window becomes `[pos, pos + width)`.
    fn push(&mut self, pos: usize, v: S) {
        while self.deque.front().is_some_and(|(_, f)| *f <= v) {
            self.deque.pop_front();
        }
        self.deque.push_front((pos, v));
        while self.deque.back().is_some_and(|(p, _)| *p >= pos + self.width) {
            self.deque.pop_back();
        }
    }

    fn max(&self) -> Option<&S> {
        self.deque.back().map(|(_, v)| v)
    }
}

/// Stage 1: `u_0`, `u_1`, `u_{a_1}` and the first staircase.
pub fn init_construction<S: Scalar>(space: &SpaceDescriptor) -> Result<ConstructionState<S>> {
    init_construction_with_limit(space, DEFAULT_MAX_HORIZON)
}

pub fn init_construction_with_limit<S: Scalar>(
    space: &SpaceDescriptor,
    max_horizon: u64,
) -> Result<ConstructionState<S>> {
    if !space.supports_mode(S::MODE) {
        return Err(Error::Config(format!("space '{}' does not support {} scalars", space.name(), S::MODE)));
    }
    if space.classify_isp()?.satisfies_isp() {
        return Err(Error::ConstructionRefused(space.name()));
    }
    let mut st = ConstructionState {
        space: space.clone(),
        stages_done: 0,
        delta: vec![0, 1],
        a: Vec::new(),
        s: Vec::new(),
        pos_index: Vec::new(),
        alpha: Vec::new(),
        d: Vec::new(),
        l: Vec::new(),
        certificates: Vec::new(),
        index_pos: HashMap::new(),
        levels: Vec::new(),
        max_horizon,
    };
    let first = space.fresh_indices(1, 2, &HashSet::new(), 0)?;
    st.place(0, first[0], S::one())?;
    st.place(1, first[1], S::one())?;
    build_stage(&mut st, 1)?;
    Ok(st)
}

/// Commits stage `stages_done + 1`.
pub fn advance_stage<S: Scalar>(state: &ConstructionState<S>) -> Result<ConstructionState<S>> {
    let mut st = state.clone();
    let n = st.stages_done + 1;
    let dn = st.delta[n];
    let dprev = st.d(n - 1).clone();
    // (i) [Δ_n, 2Δ_n) on E_n, small enough for the ‖·‖_{N_{n-1}} budget
    let nprev = nn_schedule(n - 1);
    let fresh = space_fresh(&st, n as u32, dn, 0)?;
    let budget = S::one() / (S::pow2(n as i64 - 1) * dprev);
    for (t, i) in fresh.into_iter().enumerate() {
        let unit: S = weighted_norm(&st.space, nprev, &FinVector::unit(Frame::E, i))?;
        let alpha = (budget.clone() / (unit * S::from_i64(2)))
            .floor_pow2()
            .ok_or_else(|| Error::Precondition("vanishing weighted norm".into()))?;
        st.place(dn + t, i, alpha)?;
    }
    build_stage(&mut st, n)?;
    Ok(st)
}

fn space_fresh<S: Scalar>(st: &ConstructionState<S>, level: u32, count: usize, floor: u64) -> Result<Vec<u64>> {
    st.space.fresh_indices(level, count, &st.used(), floor)
}

/// Builds `K ∪ (perturbed block)` for stage `n` given that
/// positions `[Δ_n, 2Δ_n)` (or `0, 1` for `n = 1`) are already placed.
fn build_stage<S: Scalar>(st: &mut ConstructionState<S>, n: usize) -> Result<()> {
    let dn = st.delta[n];
    let nn = nn_schedule(n);
    let space = st.space.clone();
    let c_next: S = space.basis_constant(n as u32 + 1);
    let d_prev = if n >= 2 { st.d(n - 1).clone() } else { S::one() };
    let tail_factor = c_next.clone() * d_prev.clone();

    // orbit data below Δ_n
    let gamma_norm1: Vec<S> =
        (0..dn).map(|m| operator::gamma_e(st, m).and_then(|g| weighted_norm(&space, 1, &g))).collect::<Result<_>>()?;
    let u0_norm1 = gamma_norm1[0].clone();

    // (ii) offsets 1..Δ_n of the perturbed block, chosen before a_n is known
    let offs_idx = space_fresh(st, nn, dn - 1, 0)?;
    let mut offs_alpha: Vec<S> = vec![S::zero(); dn];
    // p_l of the already chosen offsets, per l, for window maxima
    let levels_n = n as u32;
    let mut windows: Vec<BackwardWindow<S>> = (0..=levels_n).map(|_| BackwardWindow::new(dn.max(1))).collect();
    let delta_pow = S::from_i64(dn as i64) * S::pow2(dn as i64);
    for t in (1..dn).rev() {
        let i = offs_idx[t - 1];
        let unit = |l: u32| space.seminorm_of_term(l, i, &S::one());
        let mut bound: Option<S> = None;
        // K1
        raise(&mut bound, S::pow2(dn as i64) * gamma_norm1[t].clone() / unit(nn + 1)?);
        for l in 1..=levels_n {
            let pe = unit(l + 1)?;
            // finalcont1bis against t+1, tail1bis against the window (t, Δ_n)
            if t + 1 < dn {
                let next = space.seminorm_of_term(l, offs_idx[t], &offs_alpha[t + 1])?;
                if !next.is_zero() {
                    raise(&mut bound, need(&pe, delta_pow.clone() * next, "finalcont1bis", n, t)?);
                }
            }
            if let Some(m) = windows[l as usize].max() {
                if !m.is_zero() {
                    let rhs = delta_pow.clone() * S::from_i64(2) * tail_factor.clone() * m.clone();
                    raise(&mut bound, need(&pe, rhs, "tail1bis", n, t)?);
                }
            }
        }
        let alpha = big_alpha(bound);
        for l in 1..=levels_n {
            let v = space.seminorm_of_term(l, i, &alpha)?;
            windows[l as usize].push(t, v);
        }
        offs_alpha[t] = alpha;
    }
    // u_{a_n}
    let max_pn = (1..dn)
        .map(|t| space.seminorm_of_term(levels_n, offs_idx[t - 1], &offs_alpha[t]))
        .collect::<Result<Vec<S>>>()?
        .into_iter()
        .fold(S::zero(), S::max_of);
    let numer = delta_pow * S::from_i64(2) * tail_factor.clone() * max_pn + S::pow2(dn as i64) * u0_norm1;
    let mut exclude = st.used();
    exclude.extend(offs_idx.iter().copied());
    let target = S::pow2(-(n as i64) - 1);
    let (i_an, alpha_an) = sufficiently_big_index(&space, nn, nn, &numer, &target, &exclude, n, st.max_horizon)?;
    exclude.insert(i_an);

    // (iii) the staircase family
    let per_level = dn;
    let mut seeds: Vec<u64> = Vec::new();
    for lev in 0..=(n as u32 + 2) {
        let mut ex = exclude.clone();
        ex.extend(seeds.iter().copied());
        seeds.extend(space.fresh_indices(lev, per_level, &ex, 0)?);
    }
    let s_next = exclude.iter().chain(seeds.iter()).copied().max().expect("nonempty");
    let needed = s_next + 1;
    if needed > st.max_horizon {
        return Err(Error::HorizonLimit { stage: n, needed, limit: st.max_horizon });
    }
    let mut family: Vec<u64> = seeds.clone();
    let mut taken: HashSet<u64> = exclude.iter().chain(seeds.iter()).copied().collect();
    for e in 0..=s_next {
        if taken.insert(e) {
            family.push(e);
        }
    }
    // no empty level below the highest one
    let mut fam_levels: Vec<u32> = family.iter().map(|e| space.level_of(*e)).collect::<Result<_>>()?;
    let top = *fam_levels.iter().max().expect("nonempty family");
    let present: HashSet<u32> = fam_levels.iter().copied().collect();
    for lev in 0..top {
        if !present.contains(&lev) {
            let pad = space.fresh_indices(lev, 1, &taken, s_next + 1)?[0];
            taken.insert(pad);
            family.push(pad);
            fam_levels.push(lev);
        }
    }
    let mut order: Vec<(u32, u64)> = fam_levels.into_iter().zip(family).collect();
    order.sort_by(|x, y| y.0.cmp(&x.0).then(x.1.cmp(&y.1)));

    let a_n = order.len() + 2 * dn;
    let delta_next = a_n + dn;
    if delta_next as u64 > st.max_horizon {
        return Err(Error::HorizonLimit { stage: n, needed: delta_next as u64, limit: st.max_horizon });
    }
    // place the perturbed block, then the staircase top-down
    st.place(a_n, i_an, alpha_an)?;
    for t in 1..dn {
        st.place(a_n + t, offs_idx[t - 1], offs_alpha[t].clone())?;
    }
    for (k, (_, e)) in order.iter().enumerate() {
        st.place(2 * dn + k, *e, S::zero())?;
    }
    st.a.push(a_n);
    st.delta.push(delta_next);
    st.s.push(s_next);

    // staircase α, walking back from a_n - 1
    let sup_pn_gamma = if n >= 2 {
        (0..dn)
            .map(|m| operator::gamma_e(st, m).and_then(|g| space.seminorm(levels_n, &g)))
            .collect::<Result<Vec<S>>>()?
            .into_iter()
            .fold(S::zero(), S::max_of)
    } else {
        S::zero()
    };
    let p_n_u0 = st.p_u(levels_n, 0);
    // tail1 looks ahead r < Δ_n
    let mut windows: Vec<BackwardWindow<S>> =
        (0..=levels_n).map(|_| BackwardWindow::new(dn.saturating_sub(1).max(1))).collect();
    // seed windows with the perturbed block entries reachable from a_n - 1
    for pos in (a_n..(a_n + dn).min(delta_next)).rev() {
        for l in 1..=levels_n {
            windows[l as usize].push(pos, st.p_u(l, pos));
        }
    }
    for j in (2 * dn..a_n).rev() {
        let i = st.pos_index[j];
        let unit = |l: u32| space.seminorm_of_term(l, i, &S::one());
        let mut bound: Option<S> = None;
        let two_j = S::pow2(j as i64 + 1);
        for l in 1..=levels_n {
            let pe = unit(l + 1)?;
            let next = st.p_u(l, j + 1);
            if !next.is_zero() {
                raise(&mut bound, need(&pe, two_j.clone() * next, "finalcont1", n, j)?);
            }
            if n >= 2 {
                // window currently covers (j, j + Δ_n)
                if let Some(m) = windows[l as usize].max() {
                    if !m.is_zero() {
                        raise(&mut bound, need(&pe, two_j.clone() * tail_factor.clone() * m.clone(), "tail1", n, j)?);
                    }
                }
            }
        }
        if j == a_n - 1 {
            let rhs = S::pow2(a_n as i64) * p_n_u0.clone();
            if !rhs.is_zero() {
                raise(&mut bound, need(&unit(1)?, rhs, "finalcont2", n, j)?);
            }
        }
        if n >= 2 && j + dn >= a_n && !sup_pn_gamma.is_zero() {
            let rhs = two_j.clone() * tail_factor.clone() * sup_pn_gamma.clone();
            raise(&mut bound, need(&unit(1)?, rhs, "tail3", n, j)?);
        }
        st.alpha[j] = big_alpha(bound);
        for l in 1..=levels_n {
            windows[l as usize].push(j, st.p_u(l, j));
        }
    }
    commit_stage(st, n)
}

/// Lower bound on `α` from `α * pe >= rhs`.
fn need<S: Scalar>(pe: &S, rhs: S, condition: &str, stage: usize, at: usize) -> Result<S> {
    if pe.is_zero() {
        return Err(Error::Certificate {
            stage,
            condition: condition.to_string(),
            location: format!("position {at} (level ordering leaves no admissible scale)"),
            margin: -1.0,
        });
    }
    Ok(rhs / pe.clone())
}

fn commit_stage<S: Scalar>(st: &mut ConstructionState<S>, n: usize) -> Result<()> {
    st.stages_done = n;
    let dn = analysis::certify_d(st, n)?;
    st.d.push(dn);
    let ln = operator::continuity_constant(st, n)?;
    st.l.push(ln);
    let report = certificates::verify_certificates(st, n)?;
    if let Some(bad) = report.first_failure() {
        return Err(Error::Certificate {
            stage: n,
            condition: bad.condition.to_string(),
            location: bad.location.clone(),
            margin: bad.margin,
        });
    }
    st.certificates.push(report);
    Ok(())
}

/// Runs `init_construction` and then advances to `stages` committed stages.
pub fn build<S: Scalar>(space: &SpaceDescriptor, stages: usize, max_horizon: u64) -> Result<ConstructionState<S>> {
    if stages == 0 {
        return Err(Error::Config("stage count must be at least 1".into()));
    }
    let mut st = init_construction_with_limit(space, max_horizon)?;
    while st.stages_done < stages {
        st = advance_stage(&st)?;
    }
    Ok(st)
}
