//! Stage certificates: every inequality the construction relies on,
//! recomputed from the seminorm oracle.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::weighted_norm;
use crate::construction::ConstructionState;
use crate::error::Result;
use crate::operator;
use crate::scalar::Scalar;
use crate::schedule::nn_schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Tn,
    Tn2,
    Param,
    Finalcont1,
    Finalcont1bis,
    Finalcont2,
    Finalcont3,
    Finalcont4,
    K1,
    Tail1,
    Tail1bis,
    Tail2,
    Tail3,
    Final1,
    Final2,
}

impl Condition {
    pub const ALL: [Condition; 15] = [
        Condition::Tn,
        Condition::Tn2,
        Condition::Param,
        Condition::Finalcont1,
        Condition::Finalcont1bis,
        Condition::Finalcont2,
        Condition::Finalcont3,
        Condition::Finalcont4,
        Condition::K1,
        Condition::Tail1,
        Condition::Tail1bis,
        Condition::Tail2,
        Condition::Tail3,
        Condition::Final1,
        Condition::Final2,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Condition::Tn => "tn",
            Condition::Tn2 => "tn2",
            Condition::Param => "param",
            Condition::Finalcont1 => "finalcont1",
            Condition::Finalcont1bis => "finalcont1bis",
            Condition::Finalcont2 => "finalcont2",
            Condition::Finalcont3 => "finalcont3",
            Condition::Finalcont4 => "finalcont4",
            Condition::K1 => "K1",
            Condition::Tail1 => "tail1",
            Condition::Tail1bis => "tail1bis",
            Condition::Tail2 => "tail2",
            Condition::Tail3 => "tail3",
            Condition::Final1 => "final1",
            Condition::Final2 => "final2",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Aggregate of one condition over its quantifier range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub condition: Condition,
    /// Position range `[start, end)` the condition was evaluated on.
    pub range: (usize, usize),
    pub instances: u64,
    /// Worst relative margin `(lhs - rhs) / max(|lhs|, |rhs|)`; `0` for
    /// identities that hold, `-1` for ones that fail.
    pub margin: f64,
    pub location: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub stage: usize,
    pub checks: Vec<CheckEntry>,
    /// sha256 over the data the stage committed.
    pub digest: String,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| !c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> + '_ {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn get(&self, condition: Condition) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.condition == condition)
    }
}

struct Agg {
    entry: CheckEntry,
}

impl Agg {
    fn new(condition: Condition, range: (usize, usize)) -> Self {
        Agg {
            entry: CheckEntry {
                condition,
                range,
                instances: 0,
                margin: f64::INFINITY,
                location: String::new(),
                pass: true,
            },
        }
    }

    fn record(&mut self, margin: f64, pass: bool, location: impl FnOnce() -> String) {
        self.entry.instances += 1;
        let worse = (!pass && self.entry.pass) || (pass == self.entry.pass && margin < self.entry.margin);
        if worse {
            self.entry.margin = margin;
            self.entry.location = location();
        }
        self.entry.pass &= pass;
    }

    fn ge<S: Scalar>(&mut self, lhs: &S, rhs: &S, location: impl FnOnce() -> String) {
        let pass = S::ge_tol(lhs, rhs);
        self.record(S::relative_margin(lhs, rhs), pass, location);
    }

    fn gt<S: Scalar>(&mut self, lhs: &S, rhs: &S, location: impl FnOnce() -> String) {
        let pass = S::gt_tol(lhs, rhs);
        self.record(S::relative_margin(lhs, rhs), pass, location);
    }

    fn holds(&mut self, ok: bool, location: impl FnOnce() -> String) {
        self.record(if ok { 0.0 } else { -1.0 }, ok, location);
    }

    fn finish(mut self) -> CheckEntry {
        if self.entry.instances == 0 || self.entry.margin == f64::INFINITY {
            self.entry.margin = 0.0;
        }
        self.entry
    }
}

/// Backward sliding maximum over `[j + 1, j + width]`.
struct Lookahead<S> {
    width: usize,
    deque: VecDeque<(usize, S)>,
}

impl<S: Scalar> Lookahead<S> {
    fn new(width: usize) -> Self {
        Lookahead { width, deque: VecDeque::new() }
    }

    fn max_after(&mut self, j: usize) -> S {
        while self.deque.back().is_some_and(|(p, _)| *p > j + self.width) {
            self.deque.pop_back();
        }
        self.deque.back().map(|(_, v)| v.clone()).unwrap_or_else(S::zero)
    }

    fn push(&mut self, pos: usize, v: S) {
        while self.deque.front().is_some_and(|(_, f)| *f <= v) {
            self.deque.pop_front();
        }
        self.deque.push_front((pos, v));
    }
}

/// Re-verifies every condition attached to stage `n` of a state with at
/// least `n` stages.
pub fn verify_certificates<S: Scalar>(state: &ConstructionState<S>, n: usize) -> Result<CertificateReport> {
    let space = state.space();
    let dn = state.delta(n);
    let an = state.a(n);
    let dnext = state.delta(n + 1);
    let nn = nn_schedule(n);
    let level = n as u32;
    let c_next: S = space.basis_constant(level + 1);
    let tail_factor = if n >= 2 { c_next.clone() * state.d(n - 1).clone() } else { S::one() };
    let at = |j: usize| move || format!("j = {j}");
    let mut checks = Vec::new();

    // a state whose block bookkeeping is inconsistent cannot be indexed
    if dnext != an + dn || 2 * dn >= an || dnext > state.pos_index.len() {
        let mut param = Agg::new(Condition::Param, (dn, dnext));
        param.holds(false, || format!("Δ_{} = {dnext}, a_{n} = {an}, Δ_{n} = {dn}", n + 1));
        checks.push(param.finish());
        return Ok(CertificateReport { stage: n, checks, digest: stage_digest(state, n) });
    }

    // (tn), (tn2) at index n + 1, with σ a bijection onto nonzero multiples
    let s_next = state.s(n + 1);
    let mut tn = Agg::new(Condition::Tn, (0, dnext));
    let mut seen = std::collections::HashSet::with_capacity(dnext);
    for j in 0..dnext {
        let i = state.pos_index[j];
        let fresh = seen.insert(i);
        tn.holds(fresh && !state.alpha[j].is_zero(), || format!("j = {j} (index {i} repeated or α_j = 0)"));
    }
    for e in 0..=s_next {
        let ok = state.position_of(e).is_some_and(|p| p < dnext && state.pos_index[p] == e);
        tn.holds(ok, || format!("basis index {e} <= s_{} not placed below Δ_{}", n + 1, n + 1));
    }
    checks.push(tn.finish());
    let mut tn2 = Agg::new(Condition::Tn2, (0, dnext));
    for j in 0..dnext {
        let i = state.pos_index[j];
        if i > s_next {
            let p = space.seminorm_of_term(level + 3, i, &S::one())?;
            tn2.holds(p.is_zero(), at(j));
        }
    }
    checks.push(tn2.finish());

    // (param)
    let mut param = Agg::new(Condition::Param, (dn, dnext));
    param.holds(dnext == an + dn, || format!("Δ_{} = {dnext} but a_{n} + Δ_{n} = {}", n + 1, an + dn));
    param.record((an as f64 - 2.0 * dn as f64) / an.max(1) as f64, 2 * dn < an, || {
        format!("2Δ_{n} = {} vs a_{n} = {an}", 2 * dn)
    });
    checks.push(param.finish());

    // (finalcont1) on [Δ_n, a_n)
    let mut fc1 = Agg::new(Condition::Finalcont1, (dn, an));
    for j in dn..an {
        for l in 1..=level {
            let lhs = state.p_u(l + 1, j);
            let rhs = S::pow2(j as i64 + 1) * state.p_u(l, j + 1);
            fc1.ge(&lhs, &rhs, || format!("j = {j}, l = {l}"));
        }
    }
    checks.push(fc1.finish());

    // (finalcont1bis) on [a_n, Δ_{n+1} - 1)
    let mut fc1b = Agg::new(Condition::Finalcont1bis, (an, dnext - 1));
    let dpow = S::from_i64(dn as i64) * S::pow2(dn as i64);
    for j in an..dnext - 1 {
        for l in 1..=level {
            let lhs = state.p_u(l + 1, j);
            let rhs = dpow.clone() * state.p_u(l, j + 1);
            fc1b.ge(&lhs, &rhs, || format!("j = {j}, l = {l}"));
        }
    }
    checks.push(fc1b.finish());

    // (finalcont2)
    let mut fc2 = Agg::new(Condition::Finalcont2, (an - 1, an));
    fc2.gt(&state.p_u(1, an - 1), &(S::pow2(an as i64) * state.p_u(level, 0)), at(an - 1));
    checks.push(fc2.finish());

    // (finalcont3)
    let mut fc3 = Agg::new(Condition::Finalcont3, (dn, dnext));
    fc3.holds(state.p_u(level, dn).is_zero(), || format!("p_{n}(u_{dn}) != 0"));
    fc3.gt(&state.p_u(level + 1, dn), &S::zero(), at(dn));
    fc3.gt(&state.p_u(level + 1, dnext - 1), &S::zero(), at(dnext - 1));
    checks.push(fc3.finish());

    // (finalcont4) on [Δ_n - 1, Δ_{n+1} - 1); the step out of the block is
    // settled by (finalcont3) of this stage and the next
    let mut fc4 = Agg::new(Condition::Finalcont4, (dn.saturating_sub(1), dnext));
    for j in dn.saturating_sub(1)..dnext - 1 {
        let top = state.level_at(j).max(state.level_at(j + 1)) + 1;
        for l in 1..=top {
            if state.p_u(l + 1, j).is_zero() {
                fc4.holds(state.p_u(l, j + 1).is_zero(), || format!("j = {j}, l = {l}"));
            }
        }
    }
    fc4.holds(!state.p_u(level + 1, dnext - 1).is_zero(), || format!("j = {}", dnext - 1));
    checks.push(fc4.finish());

    // (K1) on [a_n, a_n + Δ_n)
    let mut k1 = Agg::new(Condition::K1, (an, dnext));
    for j in an..dnext {
        k1.holds(state.level_at(j) == nn, || format!("j = {j} not in E_{nn}"));
        let g = operator::gamma_e(state, j - an)?;
        let rhs = S::pow2(dn as i64) * weighted_norm(space, 1, &g)?;
        k1.ge(&state.p_u(nn + 1, j), &rhs, at(j));
    }
    checks.push(k1.finish());

    // tail conditions only start at stage 2
    let mut t1 = Agg::new(Condition::Tail1, (dn, an));
    let mut t1b = Agg::new(Condition::Tail1bis, (an, dnext));
    let mut t2 = Agg::new(Condition::Tail2, (dn, 2 * dn));
    let mut t3 = Agg::new(Condition::Tail3, (an - dn, an));
    if n >= 2 {
        for l in 1..=level {
            // (tail1bis): r ranges over the rest of the block
            let mut ahead = Lookahead::new(dn);
            for j in (an..dnext).rev() {
                let m = ahead.max_after(j);
                let rhs = dpow.clone() * S::from_i64(2) * tail_factor.clone() * m;
                t1b.ge(&state.p_u(l + 1, j), &rhs, || format!("j = {j}, l = {l}"));
                ahead.push(j, state.p_u(l, j));
            }
            // (tail1): 1 <= r < Δ_n, continuing into the block
            let mut ahead = Lookahead::new(dn - 1);
            for j in (an..(an + dn - 1).min(dnext)).rev() {
                ahead.push(j, state.p_u(l, j));
            }
            for j in (dn..an).rev() {
                let m = ahead.max_after(j);
                let rhs = S::pow2(j as i64 + 1) * tail_factor.clone() * m;
                t1.ge(&state.p_u(l + 1, j), &rhs, || format!("j = {j}, l = {l}"));
                ahead.push(j, state.p_u(l, j));
            }
        }
        for j in dn..2 * dn {
            t2.holds(state.p_u(level, j).is_zero(), at(j));
        }
        let mut sup = S::zero();
        for m in 0..dn {
            sup = sup.max_of(space.seminorm(level, &operator::gamma_e(state, m)?)?);
        }
        for j in an - dn..an {
            let rhs = S::pow2(j as i64 + 1) * tail_factor.clone() * sup.clone();
            t3.ge(&state.p_u(1, j), &rhs, at(j));
        }
    }
    checks.extend([t1.finish(), t1b.finish(), t2.finish(), t3.finish()]);

    // (final1)
    let mut f1 = Agg::new(Condition::Final1, (an, an + 1));
    f1.ge(&S::pow2(-(n as i64)), &weighted_norm(space, nn, &state.u_vector(an)?)?, at(an));
    checks.push(f1.finish());

    // (final2) for n - 1 on [Δ_n, 2Δ_n)
    let mut f2 = Agg::new(Condition::Final2, (dn, 2 * dn));
    if n >= 2 {
        let np = nn_schedule(n - 1);
        let budget = S::one() / (S::pow2(n as i64 - 1) * state.d(n - 1).clone());
        for j in dn..2 * dn {
            f2.ge(&budget, &weighted_norm(space, np, &state.u_vector(j)?)?, at(j));
        }
    }
    checks.push(f2.finish());

    Ok(CertificateReport { stage: n, checks, digest: stage_digest(state, n) })
}

/// sha256 over the stage's block, parameters and certified constants.
pub fn stage_digest<S: Scalar>(state: &ConstructionState<S>, n: usize) -> String {
    let mut h = Sha256::new();
    h.update(format!("{}|{}|{}|{}|{}|", state.space().name(), n, state.delta(n), state.a(n), state.s(n + 1)));
    let end = state.delta(n + 1).min(state.pos_index.len()).min(state.alpha.len());
    for j in state.delta(n).min(end)..end {
        h.update(format!("{}:{}:{};", j, state.pos_index[j], state.alpha[j].encode()));
    }
    if n <= state.d.len() {
        h.update(state.d(n).encode());
    }
    if n <= state.l.len() {
        h.update(state.l(n).encode());
    }
    hex::encode(h.finalize())
}
