//! Seeded randomized checks of the lemma bounds on a committed state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{kn_locate, tail_margin};
use crate::construction::ConstructionState;
use crate::error::Result;
use crate::operator::continuity_margin;
use crate::polynomial::Polynomial;
use crate::scalar::Scalar;
use crate::schedule::stages_with_level;
use crate::vector::{FinVector, Frame};

#[derive(Clone, Debug, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub instances: usize,
    pub held: usize,
    /// Largest `lhs / rhs` seen, for inequality suites.
    pub worst_ratio: Option<f64>,
}

impl SuiteResult {
    fn new(name: String) -> Self {
        SuiteResult { name, instances: 0, held: 0, worst_ratio: None }
    }

    pub fn passed(&self) -> bool {
        self.held == self.instances
    }

    fn record<S: Scalar>(&mut self, lhs: &S, rhs: &S) {
        self.instances += 1;
        if S::ge_tol(rhs, lhs) {
            self.held += 1;
        }
        let ratio = if !rhs.is_zero() {
            (lhs.clone() / rhs.clone()).to_f64()
        } else if lhs.is_zero() {
            0.0
        } else {
            f64::INFINITY
        };
        self.worst_ratio = Some(self.worst_ratio.map_or(ratio, |w| w.max(ratio)));
    }
}

fn coef<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    loop {
        let c = rng.gen_range(-64i64..=64);
        if c != 0 {
            return S::from_ratio(c, 64);
        }
    }
}

fn random_u<S: Scalar>(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> FinVector<S> {
    let terms = rng.gen_range(1..=5);
    FinVector::from_pairs(Frame::U, (0..terms).map(|_| (rng.gen_range(lo..hi) as u64, coef(rng))))
}

/// `p_N(Tv) <= 8 C L_N p_{N+2}(v)` for `N <= min(3, stages)`.
pub fn continuity_suite<S: Scalar>(
    state: &ConstructionState<S>,
    seed: u64,
    per_level: usize,
) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = state.horizon() - 1;
    let near = (2 * state.delta(state.stages_done())).min(top);
    let mut out = Vec::new();
    for nlev in 1..=state.stages_done().min(3) {
        let mut res = SuiteResult::new(format!("continuity N={nlev}"));
        for k in 0..per_level {
            let v = random_u::<S>(&mut rng, 0, if k % 2 == 0 { top } else { near });
            let (lhs, rhs) = continuity_margin(state, nlev, &v)?;
            res.record(&lhs, &rhs);
        }
        out.push(res);
    }
    Ok(out)
}

/// Vectors supported in `[0, s_2]` lie in `K_{n_k}` from some `n_k` on.
pub fn kn_suite<S: Scalar>(state: &ConstructionState<S>, seed: u64, count: usize) -> Result<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stages = stages_with_level(1, 1, state.stages_done());
    let top = state.s(2);
    let mut res = SuiteResult::new(format!("K_n locator on stages {stages:?}"));
    for _ in 0..count {
        let mut x = FinVector::zero(Frame::E);
        while x.is_zero() {
            let terms = rng.gen_range(1..=4);
            for _ in 0..terms {
                x.add_at(rng.gen_range(0..=top), coef::<S>(&mut rng));
            }
        }
        let loc = kn_locate(state, &x, &stages)?;
        let flags: Vec<bool> = loc.entries.iter().map(|e| e.membership.in_set).collect();
        res.instances += 1;
        if flags.iter().position(|b| *b).is_some_and(|i| flags[i..].iter().all(|b| *b)) {
            res.held += 1;
        }
    }
    Ok(res)
}

/// `p_{N_n}(P(T)x) <= 4 max(1, |P|/D_n) p_{N_n+2}(x)` for `n < stages`.
pub fn tail_suite<S: Scalar>(state: &ConstructionState<S>, seed: u64, per_stage: usize) -> Result<Vec<SuiteResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for n in 1..state.stages_done() {
        let d1 = state.delta(n + 1);
        let hi = state.horizon() - d1;
        let mut res = SuiteResult::new(format!("tail n={n}"));
        for _ in 0..per_stage {
            let mut coeffs = vec![S::zero(); d1];
            for _ in 0..rng.gen_range(1..=4) {
                let scale = state.d(n).clone() * S::pow2(rng.gen_range(-4..=4));
                coeffs[rng.gen_range(1..d1)] = coef::<S>(&mut rng) * scale;
            }
            let x = random_u::<S>(&mut rng, d1, hi);
            let (lhs, rhs) = tail_margin(state, n, &Polynomial::new(coeffs), &x)?;
            res.record(&lhs, &rhs);
        }
        out.push(res);
    }
    Ok(out)
}

/// All suites with their default sizes.
pub fn lemma_suites<S: Scalar>(state: &ConstructionState<S>, seed: u64) -> Result<Vec<SuiteResult>> {
    let mut out = continuity_suite(state, seed, 100)?;
    out.push(kn_suite(state, seed.wrapping_add(1), 20)?);
    out.extend(tail_suite(state, seed.wrapping_add(2), 50)?);
    Ok(out)
}
