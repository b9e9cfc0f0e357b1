//! One PASS/FAIL line per acceptance criterion, followed by indented notes.
//!
//! Criteria that name a state beyond the buildable horizon are attempted at
//! the stated scale, reported as FAIL, and then exercised at the largest
//! committed stage so the notes show how the same check behaves there.

use std::process::ExitCode;
use std::thread;
use std::time::{Duration, Instant};

use isplab::analysis::{certify_d, cyclic_approx, find_cyclic_poly, kn_locate, kn_membership, norm_n, tail_margin};
use isplab::construction::{advance_stage, build, DEFAULT_MAX_HORIZON};
use isplab::operator::{apply_poly, apply_t, continuity_margin, gamma_u, to_frame};
use isplab::persist::{verify_state, StateFile};
use isplab::schedule::nn_schedule;
use isplab::space::power_space;
use isplab::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

const STATED_STAGES: usize = 5;

struct Outcome {
    pass: bool,
    summary: String,
    notes: Vec<String>,
}

impl Outcome {
    fn new(pass: bool, summary: impl Into<String>) -> Self {
        Outcome { pass, summary: summary.into(), notes: Vec::new() }
    }

    fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    fn notes(mut self, lines: impl IntoIterator<Item = String>) -> Self {
        self.notes.extend(lines);
        self
    }
}

/// Shared fixtures: the largest feasible states, plus the stated-scale attempts.
struct Fixtures {
    l2: ConstructionState<Real>,
    l2_again: ConstructionState<Real>,
    l1: ConstructionState<Real>,
    l1_rat: ConstructionState<Rational>,
    l2_stated: std::result::Result<ConstructionState<Real>, String>,
    l1_stated: std::result::Result<ConstructionState<Real>, String>,
    stated_time: Duration,
}

fn extend_to<S: Scalar>(
    mut st: ConstructionState<S>,
    stages: usize,
) -> std::result::Result<ConstructionState<S>, String> {
    while st.stages_done() < stages {
        st = advance_stage(&st).map_err(|e| format!("stage {}: {e}", st.stages_done() + 1))?;
    }
    Ok(st)
}

fn fixtures() -> Fixtures {
    let t = Instant::now();
    let (l2, l2_again, l1, l1_rat) = thread::scope(|s| {
        let a = s.spawn(|| build::<Real>(&SpaceDescriptor::l2_power(), 3, DEFAULT_MAX_HORIZON).unwrap());
        let b = s.spawn(|| build::<Real>(&SpaceDescriptor::l2_power(), 3, DEFAULT_MAX_HORIZON).unwrap());
        let c = s.spawn(|| build::<Real>(&SpaceDescriptor::l1_power(), 3, DEFAULT_MAX_HORIZON).unwrap());
        let d = s.spawn(|| build::<Rational>(&SpaceDescriptor::l1_power(), 2, DEFAULT_MAX_HORIZON).unwrap());
        (a.join().unwrap(), b.join().unwrap(), c.join().unwrap(), d.join().unwrap())
    });
    eprintln!("fixtures: stage-3 binary64 states and stage-2 rational state in {:.1?}", t.elapsed());
    let t = Instant::now();
    let (l2_stated, l1_stated) = thread::scope(|s| {
        let a = s.spawn(|| extend_to(l2.clone(), STATED_STAGES));
        let b = s.spawn(|| extend_to(l1.clone(), STATED_STAGES));
        (a.join().unwrap(), b.join().unwrap())
    });
    Fixtures { l2, l2_again, l1, l1_rat, l2_stated, l1_stated, stated_time: t.elapsed() }
}

fn stated_note(f: &Fixtures) -> String {
    match &f.l2_stated {
        Ok(_) => "stage-5 state available".into(),
        Err(e) => format!("stage-5 (l2)^N state unavailable: {e}"),
    }
}

fn u_vec(rng: &mut ChaCha8Rng, lo: usize, hi: usize, terms: usize) -> FinVector<Real> {
    FinVector::from_pairs(
        Frame::U,
        (0..terms).map(|_| (rng.gen_range(lo..hi) as u64, Real::new(rng.gen_range(-1.0..1.0)))),
    )
}

fn e_vec_below(rng: &mut ChaCha8Rng, top: u64) -> FinVector<Real> {
    loop {
        let terms = rng.gen_range(1..=4);
        let v = FinVector::from_pairs(
            Frame::E,
            (0..terms).map(|_| (rng.gen_range(0..=top), Real::new(rng.gen_range(-1.0..1.0)))),
        );
        if !v.is_zero() {
            return v;
        }
    }
}

fn le<S: Scalar>(lhs: &S, rhs: &S) -> bool {
    S::ge_tol(rhs, lhs)
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let omega = SpaceDescriptor::omega();
    let cases = [
        ("omega", omega.clone(), true),
        ("omega^N", power_space(&omega).unwrap(), true),
        ("(l1)^N", SpaceDescriptor::l1_power(), false),
        ("(l2)^N", SpaceDescriptor::l2_power(), false),
        ("omega + l2", SpaceDescriptor::omega_plus_l2(), true),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, space, expected) in cases {
        let got = space.classify_isp().map(|v| v.satisfies_isp());
        let hit = matches!(got, Ok(g) if g == expected);
        ok &= hit;
        notes.push(format!("{name}: expected {}, got {got:?}", if expected { "ISP" } else { "no ISP" }));
    }
    let elapsed = t.elapsed();
    ok &= elapsed < Duration::from_secs(1);
    Outcome::new(ok, format!("classifier truth table ({elapsed:.1?})")).notes(notes)
}

fn report_lines<S: Scalar>(name: &str, st: &ConstructionState<S>) -> Vec<String> {
    st.certificates()
        .iter()
        .map(|r| {
            let worst = r.checks.iter().map(|c| c.margin).fold(f64::INFINITY, f64::min);
            format!(
                "{name} stage {}: {}/{} conditions pass, worst relative margin {worst:e}",
                r.stage,
                r.checks.iter().filter(|c| c.pass).count(),
                r.checks.len()
            )
        })
        .collect()
}

fn criterion_2(f: &Fixtures) -> Outcome {
    let certified = |st: &std::result::Result<ConstructionState<Real>, String>| {
        st.as_ref().is_ok_and(|s| s.stages_done() == STATED_STAGES && s.certificates().iter().all(|r| r.passed()))
    };
    let ok = certified(&f.l2_stated) && certified(&f.l1_stated) && f.stated_time < Duration::from_secs(120);
    let mut out = Outcome::new(ok, format!("build --stages {STATED_STAGES} with every condition certified"));
    for (name, st) in [("(l2)^N", &f.l2_stated), ("(l1)^N", &f.l1_stated)] {
        if let Err(e) = st {
            out = out.note(format!("{name}: {e}"));
        }
    }
    out.notes(report_lines("(l2)^N", &f.l2))
        .notes(report_lines("(l1)^N", &f.l1))
        .notes(report_lines("(l1)^N rational", &f.l1_rat))
}

/// Counts `p_N(Tv) <= 8 C L_N p_{N+2}(v)` over 100 random vectors per N.
fn continuity_suite(st: &ConstructionState<Real>) -> (usize, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut held, mut total, mut worst) = (0, 0, f64::INFINITY);
    let top = st.horizon() - 1;
    for nlev in 1..=3usize {
        for k in 0..100 {
            let hi = if k % 2 == 0 { top } else { (2 * st.delta(st.stages_done())).min(top) };
            let terms = rng.gen_range(1..=6);
            let v = u_vec(&mut rng, 0, hi, terms);
            let (lhs, rhs) = continuity_margin(st, nlev, &v).unwrap();
            total += 1;
            if le(&lhs, &rhs) {
                held += 1;
            }
            if !rhs.is_zero() {
                worst = worst.min(1.0 - (lhs / rhs).to_f64());
            }
        }
    }
    (held, total, worst)
}

fn criterion_3(f: &Fixtures) -> Outcome {
    let stated = f.l2_stated.as_ref().ok().map(continuity_suite);
    let ok = stated.is_some_and(|(h, t, _)| h == t);
    let (h, t, w) = continuity_suite(&f.l2);
    Outcome::new(ok, "continuity bound on the stage-5 state for N = 1, 2, 3")
        .note(stated_note(f))
        .note(format!("stage-3 (l2)^N: {h}/{t} hold, smallest 1 - lhs/rhs = {w:.3}"))
}

/// Largest j below `limit` for which `γ_j` equals `T^j u_0`, compared exactly or to 1e-9.
fn gamma_consistency<S: Scalar>(st: &ConstructionState<S>, limit: usize) -> (usize, bool) {
    let mut it = FinVector::<S>::unit(Frame::U, 0);
    for j in 0..limit {
        let g = gamma_u(st, j).unwrap();
        let diff = g.sub(&it).l1();
        let same = match S::MODE {
            ScalarMode::Rational => diff.is_zero(),
            ScalarMode::Binary64 => le(&diff, &(g.l1() * S::from_f64_lossy(1e-9))),
        };
        if !same {
            return (j, false);
        }
        if j + 1 < limit {
            it = to_frame(st, &apply_t(st, &it).unwrap(), Frame::U).unwrap();
        }
    }
    (limit, true)
}

fn criterion_4(f: &Fixtures) -> Outcome {
    let ok = f.l2_stated.as_ref().is_ok_and(|st| gamma_consistency(st, st.delta(5)).1);
    let (rj, rok) = gamma_consistency(&f.l1_rat, f.l1_rat.delta(3));
    let (bj, bok) = gamma_consistency(&f.l2, f.l2.delta(4));
    Outcome::new(ok, "gamma(j) = T^j u_0 for all j < Delta_5, exact in rational mode on (l1)^N")
        .note(stated_note(f))
        .note("rational (l1)^N: stage 3 not attempted (stage 2 -> 3 exceeds 10 min in exact arithmetic)")
        .note(format!(
            "stage-2 rational (l1)^N: exact for all j < Delta_3 = {}: {rok} (checked {rj})",
            f.l1_rat.delta(3)
        ))
        .note(format!(
            "stage-3 binary64 (l2)^N: within 1e-9 for all j < Delta_4 = {}: {bok} (checked {bj})",
            f.l2.delta(4)
        ))
}

fn criterion_5(f: &Fixtures) -> Outcome {
    let st = &f.l2;
    let stages: Vec<usize> = (1..=st.stages_done()).filter(|m| nn_schedule(*m) == 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ok = true;
    let mut notes = Vec::new();
    for k in 0..20 {
        let x = e_vec_below(&mut rng, st.s(2));
        let loc = kn_locate(st, &x, &stages).unwrap();
        let flags: Vec<bool> = loc.entries.iter().map(|e| e.membership.in_set).collect();
        let first = flags.iter().position(|b| *b);
        let good = first.is_some_and(|i| flags[i..].iter().all(|b| *b));
        ok &= good;
        if !good || k < 3 {
            notes.push(format!("vector {k}: m0 = {}, in_set over stages {stages:?} = {flags:?}", loc.m0));
        }
    }
    Outcome::new(
        ok,
        format!("kn_locate on 20 random vectors in [0, s_2], stages {stages:?} of the stage-3 (l2)^N state"),
    )
    .notes(notes)
}

/// Rejection-samples members of `K_n` and checks `Σ|y_j| <= D_n`; returns (accepted, violations, max ratio).
fn d_soundness<S: Scalar>(
    st: &ConstructionState<S>,
    n: usize,
    wanted: usize,
    coef: impl Fn(&mut ChaCha8Rng) -> S,
) -> (usize, usize, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(6 + n as u64);
    let (top, an) = (st.delta(n + 1), st.a(n));
    let dn = certify_d(st, n).unwrap();
    let (mut accepted, mut bad, mut ratio) = (0, 0, 0.0f64);
    let mut attempts = 0;
    while accepted < wanted && attempts < 50 * wanted {
        attempts += 1;
        let terms = rng.gen_range(1..=6);
        let y = FinVector::from_pairs(
            Frame::U,
            (0..terms).map(|i| (rng.gen_range(0..if i % 2 == 0 { an } else { top }) as u64, coef(&mut rng))),
        );
        let norm = norm_n(st, 1, &y).unwrap();
        if norm.is_zero() {
            continue;
        }
        let target = S::from_ratio(rng.gen_range(1..=30), 20);
        let y = y.scaled(&(target / norm));
        if !kn_membership(st, n, &y).unwrap().in_set {
            continue;
        }
        accepted += 1;
        let g = to_frame(st, &y, Frame::Gamma).unwrap().l1();
        if !le(&g, &dn) {
            bad += 1;
        }
        ratio = ratio.max((g / dn.clone()).to_f64());
    }
    (accepted, bad, ratio)
}

fn criterion_6(f: &Fixtures) -> Outcome {
    let mut out =
        Outcome::new(false, "D_n bounds Σ|y_j| on 10^4 sampled members of K_n for n <= 4").note(stated_note(f));
    for n in 1..=3 {
        let (acc, bad, r) = d_soundness(&f.l2, n, 10_000, |rng| Real::new(rng.gen_range(-1.0..1.0)));
        out = out.note(format!("binary64 (l2)^N n = {n}: {acc} accepted, {bad} violations, max Σ|y_j|/D_n = {r:.3e}"));
    }
    for n in 1..=2 {
        let (acc, bad, r) = d_soundness(&f.l1_rat, n, 2_000, |rng| Rational::from_ratio(rng.gen_range(-16..=16), 16));
        out = out.note(format!("rational (l1)^N n = {n}: {acc} accepted, {bad} violations, max Σ|y_j|/D_n = {r:.3e}"));
    }
    out
}

/// Runs the solver on the three reference inputs and re-checks every claim independently.
fn finder_checks<S: Scalar>(st: &ConstructionState<S>, n: usize) -> Vec<(String, bool)> {
    let nn = nn_schedule(n);
    let (d1, an) = (st.delta(n + 1), st.a(n));
    let inputs = [
        ("gamma_0", FinVector::<S>::unit(Frame::Gamma, 0)),
        ("gamma_1", FinVector::unit(Frame::Gamma, 1)),
        ("gamma_0 + gamma_1", FinVector::from_pairs(Frame::Gamma, [(0, S::one()), (1, S::one())])),
    ];
    let u_norm = |j: usize| norm_n(st, nn, &FinVector::<S>::unit(Frame::U, j as u64)).unwrap();
    let mut out = Vec::new();
    for (name, y) in inputs {
        let y = y.scaled(&(S::one() / norm_n(st, 1, &y).unwrap()));
        let sol = match find_cyclic_poly(st, n, &y) {
            Ok(s) => s,
            Err(e) => {
                out.push((format!("{name}: {e}"), false));
                continue;
            }
        };
        let val_ok = sol.poly.valuation().is_some_and(|v| v >= 1);
        let deg_ok = sol.poly.degree().is_some_and(|g| g < d1);
        let supp_ok = sol.remainder.keys().all(|k| (d1 as u64..2 * d1 as u64).contains(&k));
        let image = to_frame(st, &apply_poly(st, &sol.poly, &y).unwrap(), Frame::Gamma).unwrap();
        let expected = sol.remainder.add(&FinVector::unit(Frame::Gamma, an as u64));
        let resid = image.sub(&expected).l1();
        let exact = match S::MODE {
            ScalarMode::Rational => resid.is_zero(),
            ScalarMode::Binary64 => le(&resid, &(image.l1() * S::from_f64_lossy(1e-9))),
        };
        let err = norm_n(st, nn, &image.sub(&FinVector::unit(Frame::Gamma, 0))).unwrap();
        let abs_c = sol.remainder.iter().fold(S::zero(), |a, (_, c)| a + c.abs());
        let worst_u = (d1..2 * d1).map(u_norm).fold(S::zero(), S::max_of);
        let bound = S::from_i64(2) * u_norm(an) + sol.poly.abs_sum().max_of(abs_c) * worst_u;
        let bound_ok = le(&err, &bound);
        let pass = val_ok && deg_ok && supp_ok && exact && bound_ok && sol.budget_flag;
        out.push((
            format!(
                "{name}: val {:?}, deg {:?} < {d1}, remainder in [Delta, 2Delta) {supp_ok}, exact {exact}, error {err} <= {bound} {bound_ok}, budget clean {}",
                sol.poly.valuation(),
                sol.poly.degree(),
                sol.budget_flag
            ),
            pass,
        ));
    }
    out
}

fn criterion_7(f: &Fixtures) -> Outcome {
    let stated = f.l2_stated.as_ref().ok().map(|st| (1..=4).flat_map(|n| finder_checks(st, n)).all(|(_, p)| p));
    let mut out =
        Outcome::new(stated == Some(true), "find_cyclic_poly on gamma_0, gamma_1, gamma_0 + gamma_1 for n <= 4")
            .note(stated_note(f));
    for n in 1..=2 {
        for (line, pass) in finder_checks(&f.l2, n) {
            out = out.note(format!("binary64 (l2)^N n = {n} [{}] {line}", if pass { "ok" } else { "bad" }));
        }
    }
    for (line, pass) in finder_checks(&f.l1_rat, 1) {
        out = out.note(format!("rational (l1)^N n = 1 [{}] {line}", if pass { "ok" } else { "bad" }));
    }
    out
}

/// 100 random admissible `(P, x_tail)` pairs at stage `n`; returns (held, total).
fn tail_suite(st: &ConstructionState<Real>, n: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(8 + n as u64);
    let d1 = st.delta(n + 1);
    let dn = *st.d(n);
    let mut held = 0;
    for _ in 0..100 {
        let mut coeffs = vec![Real::zero(); d1];
        for _ in 0..rng.gen_range(1..=5) {
            let scale = dn * Real::pow2(rng.gen_range(-4..=4));
            coeffs[rng.gen_range(1..d1)] = Real::new(rng.gen_range(-1.0..1.0)) * scale;
        }
        let p = Polynomial::new(coeffs);
        let terms = rng.gen_range(1..=5);
        let x = u_vec(&mut rng, d1, st.horizon() - d1, terms);
        if p.is_zero() || x.is_zero() {
            held += 1;
            continue;
        }
        let (lhs, rhs) = tail_margin(st, n, &p, &x).unwrap();
        if le(&lhs, &rhs) {
            held += 1;
        }
    }
    (held, 100)
}

fn criterion_8(f: &Fixtures) -> Outcome {
    let stated = f.l2_stated.as_ref().ok().map(|st| {
        (1..=4).all(|n| {
            let (h, t) = tail_suite(st, n);
            h == t
        })
    });
    let mut out = Outcome::new(stated == Some(true), "tail bound on 100 random (P, x_tail) pairs per stage n <= 4")
        .note(stated_note(f));
    for n in 1..=2 {
        let (h, t) = tail_suite(&f.l2, n);
        out = out.note(format!("stage-3 (l2)^N n = {n}: {h}/{t} hold"));
    }
    out
}

/// Runs `cyclic_approx` on 20 random vectors and replays each error via Horner.
fn cyclicity_suite(st: &ConstructionState<Real>) -> (usize, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let eps = Real::from_ratio(1, 4);
    let u0 = st.u_vector(0).unwrap();
    let mut good = 0;
    let mut notes = Vec::new();
    for k in 0..20 {
        let x = e_vec_below(&mut rng, st.s(2));
        match cyclic_approx(st, &x, 1, &eps) {
            Ok(w) => {
                let image = to_frame(st, &apply_poly(st, &w.q, &x).unwrap(), Frame::E).unwrap();
                let replay = st.space().seminorm(1, &image.sub(&u0)).unwrap();
                let ok = replay < eps;
                good += ok as usize;
                if !ok || k < 3 {
                    notes.push(format!("vector {k}: stage {}, error {}, replayed {replay}", w.stage, w.achieved_error));
                }
            }
            Err(e) => notes.push(format!("vector {k}: {e}")),
        }
    }
    (good, notes)
}

fn criterion_9(f: &Fixtures) -> Outcome {
    let t = Instant::now();
    let stated = f.l2_stated.as_ref().ok().map(cyclicity_suite);
    let ok = stated.is_some_and(|(g, _)| g == 20) && t.elapsed() < Duration::from_secs(300);
    let t = Instant::now();
    let (good, notes) = cyclicity_suite(&f.l2);
    Outcome::new(ok, "cyclic_approx with N = 1, eps = 0.25 on 20 random vectors on the stage-5 (l2)^N state")
        .note(stated_note(f))
        .note(format!("stage-3 (l2)^N: {good}/20 replayed below eps in {:.1?}", t.elapsed()))
        .notes(notes)
}

fn criterion_10() -> Outcome {
    let st = build::<Real>(&SpaceDescriptor::l2_power(), 2, DEFAULT_MAX_HORIZON).unwrap();
    let text = st.to_json();
    let scale = |s: &str, by: Real| (Real::decode(s).unwrap() * by).encode();
    type Mutation = Box<dyn Fn(&mut StateFile)>;
    let (a1, a2) = (st.a(1), st.a(2));
    let (lo, hi) = (2 * st.delta(2), st.a(2) - 1);
    let cases: Vec<(&str, usize, Condition, Mutation)> = vec![
        (
            "halve alpha_{a_1}",
            1,
            Condition::K1,
            Box::new(move |f| f.alpha[a1] = scale(&f.alpha[a1], Real::from_ratio(1, 2))),
        ),
        (
            "swap top and bottom of the stage-2 staircase",
            2,
            Condition::Finalcont4,
            Box::new(move |f| {
                let (x, y) = (f.pos_to_index[lo].1, f.pos_to_index[hi].1);
                f.pos_to_index[lo].1 = y;
                f.pos_to_index[hi].1 = x;
            }),
        ),
        ("shrink a_2 by one", 2, Condition::Param, Box::new(|f| f.a[1] -= 1)),
        ("zero a staircase alpha", 2, Condition::Tn, Box::new(move |f| f.alpha[a2 - 3] = Real::zero().encode())),
        (
            "inflate alpha_{a_2} by 2^40",
            2,
            Condition::Final1,
            Box::new(move |f| f.alpha[a2] = scale(&f.alpha[a2], Real::pow2(40))),
        ),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, stage, cond, mutate) in cases {
        let mut file: StateFile = serde_json::from_str(&text).unwrap();
        mutate(&mut file);
        let caught = ConstructionState::<Real>::from_file_unchecked(&file)
            .and_then(|bad| verify_state(&bad, &file))
            .map(|o| o.failed_conditions());
        let hit = caught.as_ref().is_ok_and(|c| c.contains(&(stage, cond)));
        ok &= hit;
        notes.push(format!("{name}: expected {cond} at stage {stage}, verify reported {caught:?}"));
    }
    Outcome::new(ok, "five single-parameter mutations caught with the right condition id").notes(notes)
}

fn criterion_11(f: &Fixtures) -> Outcome {
    let digest = |s: &str| hex::encode(Sha256::digest(s.as_bytes()));
    let (a, b) = (f.l2.to_json(), f.l2_again.to_json());
    let r1 = f.l1_rat.to_json();
    let r2 = build::<Rational>(&SpaceDescriptor::l1_power(), 2, DEFAULT_MAX_HORIZON).unwrap().to_json();
    let ok = a == b && r1 == r2;
    Outcome::new(ok, "identical configs give byte-identical state files")
        .note(format!("stage-3 binary64 (l2)^N: {} bytes, sha256 {} / {}", a.len(), digest(&a), digest(&b)))
        .note(format!("stage-2 rational (l1)^N: {} bytes, sha256 {} / {}", r1.len(), digest(&r1), digest(&r2)))
}

fn main() -> ExitCode {
    let fx = fixtures();
    let criteria: Vec<(usize, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(|| criterion_2(&fx))),
        (3, Box::new(|| criterion_3(&fx))),
        (4, Box::new(|| criterion_4(&fx))),
        (5, Box::new(|| criterion_5(&fx))),
        (6, Box::new(|| criterion_6(&fx))),
        (7, Box::new(|| criterion_7(&fx))),
        (8, Box::new(|| criterion_8(&fx))),
        (9, Box::new(|| criterion_9(&fx))),
        (10, Box::new(criterion_10)),
        (11, Box::new(|| criterion_11(&fx))),
    ];
    let mut failed = Vec::new();
    for (k, run) in criteria {
        let t = Instant::now();
        let out = run();
        println!("{} criterion {k}: {} [{:.1?}]", if out.pass { "PASS" } else { "FAIL" }, out.summary, t.elapsed());
        for line in &out.notes {
            println!("    {line}");
        }
        if !out.pass {
            failed.push(k);
        }
    }
    println!("acceptance: {} passed, {} failed {failed:?}", 11 - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
