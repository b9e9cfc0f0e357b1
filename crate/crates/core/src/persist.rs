//! JSON state files, space configs and witness export.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, CyclicityWitness};
use crate::certificates::{self, CertificateReport, Condition};
use crate::construction::{ConstructionState, DEFAULT_MAX_HORIZON};
use crate::error::{Error, Result};
use crate::operator;
use crate::scalar::{Scalar, ScalarMode};
use crate::space::SpaceDescriptor;

/// `{"space": ..., "scalar_mode": ...}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceConfig {
    pub space: String,
    pub scalar_mode: ScalarMode,
}

impl SpaceConfig {
    pub fn descriptor(&self) -> Result<SpaceDescriptor> {
        let d = SpaceDescriptor::by_name(&self.space)?;
        if !d.supports_mode(self.scalar_mode) {
            return Err(Error::Config(format!("space '{}' does not support {} scalars", self.space, self.scalar_mode)));
        }
        Ok(d)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad space config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageDigest {
    pub stage: usize,
    pub digest: String,
}

/// On-disk layout of a [`ConstructionState`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateFile {
    pub space: SpaceConfig,
    pub stages_done: usize,
    #[serde(rename = "Delta")]
    pub delta: Vec<usize>,
    pub a: Vec<usize>,
    pub s: Vec<u64>,
    #[serde(rename = "D")]
    pub d: Vec<String>,
    #[serde(rename = "L")]
    pub l: Vec<String>,
    pub pos_to_index: Vec<(usize, u64)>,
    pub alpha: Vec<String>,
    pub certificates: Vec<StageDigest>,
}

impl<S: Scalar> ConstructionState<S> {
    pub fn to_file(&self) -> StateFile {
        StateFile {
            space: SpaceConfig { space: self.space.name(), scalar_mode: S::MODE },
            stages_done: self.stages_done,
            delta: self.delta.clone(),
            a: self.a.clone(),
            s: self.s.clone(),
            d: self.d.iter().map(Scalar::encode).collect(),
            l: self.l.iter().map(Scalar::encode).collect(),
            pos_to_index: self.pos_index.iter().enumerate().map(|(j, i)| (j, *i)).collect(),
            alpha: self.alpha.iter().map(Scalar::encode).collect(),
            certificates: self
                .certificates
                .iter()
                .map(|c| StageDigest { stage: c.stage, digest: c.digest.clone() })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("state serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Rebuilds the in-memory state without re-verifying anything.
    pub fn from_file_unchecked(file: &StateFile) -> Result<Self> {
        if file.space.scalar_mode != S::MODE {
            return Err(Error::Config(format!("state uses {} scalars, expected {}", file.space.scalar_mode, S::MODE)));
        }
        let space = file.space.descriptor()?;
        let n = file.stages_done;
        if n == 0
            || file.delta.len() != n + 2
            || file.a.len() != n
            || file.s.len() != n
            || file.d.len() != n
            || file.l.len() != n
            || file.pos_to_index.len() != file.alpha.len()
        {
            return Err(Error::Parse("array lengths disagree with stages_done".into()));
        }
        let mut pos_index = vec![u64::MAX; file.pos_to_index.len()];
        for &(j, i) in &file.pos_to_index {
            *pos_index.get_mut(j).ok_or_else(|| Error::Parse(format!("position {j} out of range")))? = i;
        }
        if pos_index.contains(&u64::MAX) {
            return Err(Error::Parse("pos_to_index has gaps".into()));
        }
        let decode_all = |v: &[String]| v.iter().map(|s| S::decode(s)).collect::<Result<Vec<S>>>();
        let mut st = ConstructionState {
            space,
            stages_done: n,
            delta: file.delta.clone(),
            a: file.a.clone(),
            s: file.s.clone(),
            pos_index,
            alpha: decode_all(&file.alpha)?,
            d: decode_all(&file.d)?,
            l: decode_all(&file.l)?,
            certificates: Vec::new(),
            index_pos: HashMap::new(),
            levels: Vec::new(),
            max_horizon: DEFAULT_MAX_HORIZON,
        };
        st.rebuild_derived()?;
        Ok(st)
    }

    /// Loads a state and re-verifies it; any failure is an error.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: StateFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let mut st = Self::from_file_unchecked(&file)?;
        let outcome = verify_state(&st, &file)?;
        if let Some((stage, cond, loc, margin)) = outcome.first_failure() {
            return Err(Error::Certificate { stage, condition: cond, location: loc, margin });
        }
        st.certificates = outcome.reports;
        Ok(st)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// Reads just the scalar mode of a state file.
pub fn peek_mode(text: &str) -> Result<ScalarMode> {
    #[derive(Deserialize)]
    struct Head {
        space: SpaceConfig,
    }
    let h: Head = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Ok(h.space.scalar_mode)
}

/// Result of re-verifying a loaded state.
#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub reports: Vec<CertificateReport>,
    /// Stored values that recomputation does not reproduce.
    pub mismatches: Vec<String>,
}

impl VerifyOutcome {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.reports.iter().all(|r| r.passed())
    }

    pub fn failed_conditions(&self) -> Vec<(usize, Condition)> {
        self.reports.iter().flat_map(|r| r.failures().map(move |c| (r.stage, c.condition))).collect()
    }

    fn first_failure(&self) -> Option<(usize, String, String, f64)> {
        for r in &self.reports {
            if let Some(c) = r.first_failure() {
                return Some((r.stage, c.condition.to_string(), c.location.clone(), c.margin));
            }
        }
        self.mismatches.first().map(|m| (0, "digest".to_string(), m.clone(), -1.0))
    }
}

/// Re-runs every stage certificate and compares recomputed `D_n`, `L_n`
/// and digests against the stored ones.
pub fn verify_state<S: Scalar>(state: &ConstructionState<S>, file: &StateFile) -> Result<VerifyOutcome> {
    let mut reports = Vec::new();
    let mut mismatches = Vec::new();
    let degenerate = state.alpha.iter().any(|a| a.is_zero());
    for n in 1..=state.stages_done() {
        let report = certificates::verify_certificates(state, n)?;
        let structural = report.get(Condition::Param).is_some_and(|c| !c.pass) && report.checks.len() == 1;
        if !degenerate && !structural {
            let d = analysis::certify_d(state, n)?;
            if d != *state.d(n) {
                mismatches.push(format!("stage {n}: stored D_{n} = {}, recomputed {d}", state.d(n)));
            }
            let l = operator::continuity_constant(state, n)?;
            if l != *state.l(n) {
                mismatches.push(format!("stage {n}: stored L_{n} = {}, recomputed {l}", state.l(n)));
            }
        }
        match file.certificates.iter().find(|c| c.stage == n) {
            Some(c) if c.digest == report.digest => {}
            Some(_) => mismatches.push(format!("stage {n}: digest differs from the stored one")),
            None => mismatches.push(format!("stage {n}: no stored digest")),
        }
        let stop = structural;
        reports.push(report);
        if stop {
            break;
        }
    }
    Ok(VerifyOutcome { reports, mismatches })
}

/// Witness export with exact coefficient strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WitnessFile {
    pub space: SpaceConfig,
    pub vector: Vec<(u64, String)>,
    pub norm: u32,
    pub stage: usize,
    pub horizon: usize,
    #[serde(rename = "M_k")]
    pub m_k: String,
    #[serde(rename = "M")]
    pub lower_bound: String,
    pub q: Vec<String>,
    pub achieved_error: String,
    pub achieved_error_f64: f64,
    pub predicted_bound: String,
    pub budget_flag: bool,
}

impl WitnessFile {
    pub fn from_witness<S: Scalar>(state: &ConstructionState<S>, w: &CyclicityWitness<S>) -> Self {
        WitnessFile {
            space: SpaceConfig { space: state.space().name(), scalar_mode: S::MODE },
            vector: w.x.iter().map(|(k, c)| (k, c.encode())).collect(),
            norm: w.nlev,
            stage: w.stage,
            horizon: state.horizon(),
            m_k: w.m_k.encode(),
            lower_bound: w.lower_bound.encode(),
            q: w.q.coeffs().iter().map(Scalar::encode).collect(),
            achieved_error: w.achieved_error.encode(),
            achieved_error_f64: w.achieved_error.to_f64(),
            predicted_bound: w.predicted_bound.encode(),
            budget_flag: w.budget_flag,
        }
    }
}
