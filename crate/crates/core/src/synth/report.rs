use serde::{Deserialize, Serialize};

/// One inequality evaluated during synthesis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintCheck {
    pub level: usize,
    pub constraint: String,
    pub lhs: String,
    pub relation: String,
    pub rhs: String,
    pub satisfied: bool,
}

/// Per-level record of every inequality checked, plus the constraint list
/// that pinned each `m_k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthReport {
    pub checks: Vec<ConstraintCheck>,
    pub notes: Vec<String>,
}

impl SynthReport {
    pub fn push(
        &mut self,
        level: usize,
        constraint: impl Into<String>,
        lhs: impl Into<String>,
        relation: &str,
        rhs: impl Into<String>,
        satisfied: bool,
    ) {
        self.checks.push(ConstraintCheck {
            level,
            constraint: constraint.into(),
            lhs: lhs.into(),
            relation: relation.to_string(),
            rhs: rhs.into(),
            satisfied,
        });
    }

    pub fn extend(&mut self, other: SynthReport) {
        self.checks.extend(other.checks);
        self.notes.extend(other.notes);
    }

    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.satisfied)
    }
}
