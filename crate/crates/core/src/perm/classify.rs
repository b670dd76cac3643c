use std::collections::BTreeMap;

use serde::Serialize;

use super::{tower_matrix, Permutation, TowerMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum IndexClass {
    Peak,
    Valley,
    Ladder,
    Slope,
    Last,
}

impl IndexClass {
    pub fn letter(self) -> char {
        match self {
            IndexClass::Peak => 'p',
            IndexClass::Valley => 'v',
            IndexClass::Ladder => 'l',
            IndexClass::Slope => 's',
            IndexClass::Last => 'L',
        }
    }
}

/// A maximal run `top+1 ..= top+len` of ladder indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LadderRun {
    pub top: usize,
    pub first: usize,
    pub last: usize,
    pub bottom: usize,
}

impl LadderRun {
    pub fn len(&self) -> usize {
        self.last + 1 - self.first
    }

    pub fn is_empty(&self) -> bool {
        self.last < self.first
    }

    /// Bottom taken from the `i+b+1` branch of the definition.
    pub fn extended_bottom(&self) -> bool {
        self.bottom == self.last + 1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexClassification {
    pub k: usize,
    pub peaks: Vec<usize>,
    pub valleys: Vec<usize>,
    pub ladders: Vec<usize>,
    pub slopes: Vec<usize>,
    pub last: usize,
    pub degree: usize,
    pub ladder_tops: Vec<usize>,
    pub ladder_bottoms: Vec<usize>,
    pub ladder_runs: Vec<LadderRun>,
    pub covered_slopes: Vec<usize>,
    pub uncovered_slopes: Vec<usize>,
    /// c(i) for every non-peak row.
    pub pivots: BTreeMap<usize, usize>,
    /// c̃(i) for valley rows.
    pub valley_alt: BTreeMap<usize, usize>,
    #[serde(skip)]
    classes: Vec<IndexClass>,
    #[serde(skip)]
    pub tower: TowerMatrix,
}

impl IndexClassification {
    /// Class of row `i` in `1..=k+1`.
    pub fn class(&self, i: usize) -> IndexClass {
        self.classes[i - 1]
    }

    pub fn pivot(&self, i: usize) -> Option<usize> {
        self.pivots.get(&i).copied()
    }

    pub fn is_covered(&self, i: usize) -> bool {
        self.covered_slopes.binary_search(&i).is_ok()
    }

    /// Class letters for rows 1..=k+1, e.g. "llpvs…L".
    pub fn signature(&self) -> String {
        self.classes.iter().map(|c| c.letter()).collect()
    }

    pub fn p(&self) -> usize {
        self.peaks.len()
    }
    pub fn v(&self) -> usize {
        self.valleys.len()
    }
    pub fn l(&self) -> usize {
        self.ladders.len()
    }
    pub fn s(&self) -> usize {
        self.slopes.len()
    }
}

fn point_class(sigma: &Permutation, j: usize) -> IndexClass {
    let x = sigma.at(j);
    let (a, b) = (sigma.ext(j - 1), sigma.ext(j + 1));
    if x < a.min(b) {
        IndexClass::Peak
    } else if x > a.max(b) {
        IndexClass::Valley
    } else if x - 1 == a || x - 1 == b {
        IndexClass::Ladder
    } else {
        IndexClass::Slope
    }
}

pub fn classify(sigma: &Permutation) -> IndexClassification {
    let k = sigma.k();
    let tower = tower_matrix(sigma);
    let mut classes = vec![IndexClass::Last; k + 1];
    for j in 1..=k {
        classes[sigma.at(j) - 1] = point_class(sigma, j);
    }
    let rows_of = |c: IndexClass| -> Vec<usize> {
        (1..=k).filter(|&i| classes[i - 1] == c).collect()
    };
    let (peaks, valleys, ladders, slopes) = (
        rows_of(IndexClass::Peak),
        rows_of(IndexClass::Valley),
        rows_of(IndexClass::Ladder),
        rows_of(IndexClass::Slope),
    );

    let mut ladder_runs = Vec::new();
    let mut i = 1;
    while i <= k {
        if classes[i - 1] != IndexClass::Ladder {
            i += 1;
            continue;
        }
        let first = i;
        while i < k && classes[i] == IndexClass::Ladder {
            i += 1;
        }
        let last = i;
        let gap = sigma.ext_inverse(last + 1).abs_diff(sigma.ext_inverse(last));
        let bottom = if gap == 1 { last + 1 } else { last };
        ladder_runs.push(LadderRun { top: first - 1, first, last, bottom });
        i += 1;
    }

    let mut pivots = BTreeMap::new();
    let mut valley_alt = BTreeMap::new();
    for i in 1..=k + 1 {
        match classes[i - 1] {
            IndexClass::Peak => {}
            IndexClass::Valley => {
                let j = sigma.ext_inverse(i);
                let (tj, tn) = (tower.top(j), tower.top(j + 1));
                assert_ne!(tj, tn, "valley columns with equal tops");
                debug_assert!(tower.bottom(j) == i && tower.bottom(j + 1) == i);
                let (c, ct) = if tj < tn { (j, j + 1) } else { (j + 1, j) };
                pivots.insert(i, c);
                valley_alt.insert(i, ct);
            }
            _ => {
                let mut cols = (1..=k + 1).filter(|&j| tower.bottom(j) == i);
                let c = cols.next().expect("non-peak row is a tower bottom");
                assert!(cols.next().is_none(), "pivot column of row {i} not unique");
                pivots.insert(i, c);
            }
        }
    }

    // h_1 < h_2 < ... over valleys and slopes.
    let hs: Vec<usize> = (1..=k)
        .filter(|&i| matches!(classes[i - 1], IndexClass::Valley | IndexClass::Slope))
        .collect();
    let mut covered_slopes = Vec::new();
    let mut uncovered_slopes = Vec::new();
    for (mu, &h) in hs.iter().enumerate() {
        if classes[h - 1] != IndexClass::Slope {
            continue;
        }
        let covered = hs
            .get(mu + 1)
            .is_some_and(|&next| tower.top(pivots[&next]) <= h);
        if covered {
            covered_slopes.push(h);
        } else {
            uncovered_slopes.push(h);
        }
    }

    IndexClassification {
        k,
        degree: k - ladders.len(),
        ladder_tops: ladder_runs.iter().map(|r| r.top).collect(),
        ladder_bottoms: ladder_runs.iter().map(|r| r.bottom).collect(),
        peaks,
        valleys,
        ladders,
        slopes,
        last: k + 1,
        ladder_runs,
        covered_slopes,
        uncovered_slopes,
        pivots,
        valley_alt,
        classes,
        tower,
    }
}
