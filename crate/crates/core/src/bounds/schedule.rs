use serde::Serialize;

use crate::perm::{classify, IndexClass, IndexClassification, Permutation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepCase {
    Peak,
    LadderBlock,
    UncoveredSlope,
    CoveredSlope,
    Valley,
    Last,
}

/// One elimination step. `rows` is a single row except for ladder blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rows: Vec<usize>,
    pub case: StepCase,
    /// Columns integrated out, in order.
    pub columns: Vec<usize>,
    /// Point singularity carried into the step (`None` when absent).
    pub carried_in: Option<Vec<i64>>,
    /// Point singularity left after the step.
    pub carried_out: Option<Vec<i64>>,
}

impl Step {
    pub fn row(&self) -> usize {
        self.rows[0]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Schedule {
    pub sigma: Permutation,
    pub signature: String,
    pub steps: Vec<Step>,
}

/// Row h_μ of M with the pivot entry zeroed.
fn covered_row(c: &IndexClassification, h: usize) -> Vec<i64> {
    let pivot = c.pivot(h).expect("slope rows have pivots");
    (1..=c.k + 1)
        .map(|j| if j == pivot { 0 } else { c.tower.get(h, j) })
        .collect()
}

pub fn schedule(sigma: &Permutation) -> Schedule {
    let c = classify(sigma);
    let mut steps = Vec::new();
    let mut carried: Option<Vec<i64>> = None;
    let mut h = 1;
    while h <= c.k + 1 {
        let (rows, case, columns, out) = match c.class(h) {
            IndexClass::Peak => (vec![h], StepCase::Peak, vec![], carried.clone()),
            IndexClass::Ladder => {
                let run = c.ladder_runs.iter().find(|r| r.first == h).expect("ladder rows start a run");
                let rows: Vec<usize> = (run.first..=run.last).collect();
                let cols = rows.iter().map(|&i| c.pivot(i).unwrap()).collect();
                (rows, StepCase::LadderBlock, cols, carried.clone())
            }
            IndexClass::Slope if c.is_covered(h) => {
                (vec![h], StepCase::CoveredSlope, vec![c.pivot(h).unwrap()], Some(covered_row(&c, h)))
            }
            IndexClass::Slope => (vec![h], StepCase::UncoveredSlope, vec![c.pivot(h).unwrap()], None),
            IndexClass::Valley => {
                let cols = vec![c.pivot(h).unwrap(), c.valley_alt[&h]];
                (vec![h], StepCase::Valley, cols, None)
            }
            IndexClass::Last => (vec![h], StepCase::Last, vec![c.pivot(h).unwrap()], None),
        };
        h += rows.len();
        steps.push(Step { rows, case, columns, carried_in: carried.clone(), carried_out: out.clone() });
        carried = out;
    }
    Schedule { sigma: sigma.clone(), signature: c.signature(), steps }
}

/// A violated schedule invariant, described in words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScheduleViolation(pub String);

impl Schedule {
    pub fn k(&self) -> usize {
        self.sigma.k()
    }

    pub fn count(&self, case: StepCase) -> usize {
        self.steps.iter().filter(|s| s.case == case).count()
    }

    /// Checks the structural invariants against a fresh classification.
    pub fn verify(&self) -> Result<(), ScheduleViolation> {
        let bad = |s: String| Err(ScheduleViolation(s));
        let c = classify(&self.sigma);
        let n = self.k() + 1;
        let mut rows = vec![0u32; n + 1];
        let mut cols = vec![0u32; n + 1];
        for st in &self.steps {
            st.rows.iter().for_each(|&r| rows[r] += 1);
            st.columns.iter().for_each(|&j| cols[j] += 1);
        }
        if rows[1..].iter().any(|&x| x != 1) {
            return bad(format!("row multiplicities {:?}", &rows[1..]));
        }
        if cols[1..].iter().any(|&x| x > 1) {
            return bad(format!("column multiplicities {:?}", &cols[1..]));
        }
        let blocks: Vec<(usize, usize)> = self
            .steps
            .iter()
            .filter(|s| s.case == StepCase::LadderBlock)
            .map(|s| (s.rows[0], *s.rows.last().unwrap()))
            .collect();
        let runs: Vec<(usize, usize)> = c.ladder_runs.iter().map(|r| (r.first, r.last)).collect();
        if blocks != runs {
            return bad(format!("ladder blocks {blocks:?} differ from runs {runs:?}"));
        }
        let ladder_pivots: Vec<usize> = c.ladders.iter().map(|&i| c.pivot(i).unwrap()).collect();
        for st in &self.steps {
            for b in st.carried_in.iter().chain(&st.carried_out) {
                if let Some(&j) = ladder_pivots.iter().find(|&&j| b[j - 1] != 0) {
                    return bad(format!("ladder pivot {j} in carried vector at row {}", st.row()));
                }
            }
            if let Some(b) = &st.carried_in {
                if st.case != StepCase::Peak && st.case != StepCase::LadderBlock {
                    let var = st.columns[0];
                    if b[var - 1].abs() != 1 {
                        return bad(format!("row {}: variable {var} missing from carried vector", st.row()));
                    }
                }
            }
            if st.case == StepCase::CoveredSlope {
                let want = covered_row(&c, st.row());
                if st.carried_out.as_ref() != Some(&want) {
                    return bad(format!("row {}: carried vector is not the zeroed row", st.row()));
                }
            }
        }
        let last = self.steps.last().expect("schedule has a last step");
        if last.case != StepCase::Last || last.carried_in.is_some() {
            return bad("last step carries a point singularity".into());
        }
        Ok(())
    }
}
