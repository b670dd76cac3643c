use std::collections::BTreeMap;

use serde::Serialize;

use super::Partition;
use crate::error::{Error, Result};

/// Auxiliary momenta u_μ keyed by the smallest label of each lump.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuxMomentaLedger {
    d: usize,
    entries: BTreeMap<usize, Vec<f64>>,
}

impl AuxMomentaLedger {
    pub fn zeros(p: &Partition, d: usize) -> Self {
        AuxMomentaLedger { d, entries: p.lumps().iter().map(|l| (l[0], vec![0.0; d])).collect() }
    }

    pub fn from_entries(d: usize, entries: BTreeMap<usize, Vec<f64>>) -> Self {
        AuxMomentaLedger { d, entries }
    }

    pub fn get(&self, lump_min: usize) -> Option<&[f64]> {
        self.entries.get(&lump_min).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.d];
        for u in self.entries.values() {
            for (a, b) in s.iter_mut().zip(u) {
                *a += b;
            }
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BreakRecord {
    pub lump: Vec<usize>,
    pub parts: (Vec<usize>, Vec<usize>),
    pub r_norm: f64,
}

/// Operation I: split lump `lump` (index into `p.lumps()`) into `split.0`
/// (ν′, inherits u_ν − r) and `split.1` (ν″, carries r).
pub fn break_lump(
    p: &Partition,
    lump: usize,
    split: (&[usize], &[usize]),
    r: &[f64],
    ledger: &AuxMomentaLedger,
) -> Result<(Partition, AuxMomentaLedger, BreakRecord)> {
    let target = p
        .lumps()
        .get(lump)
        .ok_or_else(|| Error::BadSplit(format!("no lump {lump}")))?;
    let (a, b) = split;
    if a.is_empty() || b.is_empty() {
        return Err(Error::BadSplit("parts must be nonempty".into()));
    }
    let mut union: Vec<usize> = a.iter().chain(b).copied().collect();
    union.sort_unstable();
    if union != *target || union.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::BadSplit(format!("{a:?} and {b:?} do not partition {target:?}")));
    }
    if r.len() != ledger.d {
        return Err(Error::BadSplit("momentum dimension mismatch".into()));
    }
    let mut lumps: Vec<Vec<usize>> = p.lumps().to_vec();
    lumps[lump] = a.to_vec();
    lumps.push(b.to_vec());
    let np = Partition::new(p.k(), lumps)?;

    let u_nu = ledger
        .entries
        .get(&target[0])
        .cloned()
        .ok_or_else(|| Error::BadSplit(format!("ledger has no entry for lump {target:?}")))?;
    let mut entries = ledger.entries.clone();
    entries.remove(&target[0]);
    let amin = *a.iter().min().unwrap();
    let bmin = *b.iter().min().unwrap();
    entries.insert(amin, u_nu.iter().zip(r).map(|(u, r)| u - r).collect());
    entries.insert(bmin, r.to_vec());
    let rec = BreakRecord {
        lump: target.clone(),
        parts: (a.to_vec(), b.to_vec()),
        r_norm: r.iter().map(|x| x * x).sum::<f64>().sqrt(),
    };
    Ok((np, AuxMomentaLedger { d: ledger.d, entries }, rec))
}

/// Peel the largest label off nontrivial lumps until every lump is a
/// singleton. `r_of(step)` supplies the transferred momentum.
pub fn break_to_singletons(
    p: &Partition,
    ledger: &AuxMomentaLedger,
    mut r_of: impl FnMut(usize) -> Vec<f64>,
) -> Result<(Partition, AuxMomentaLedger, Vec<BreakRecord>)> {
    let (mut p, mut ledger) = (p.clone(), ledger.clone());
    let mut records = Vec::new();
    while let Some(idx) = p.lumps().iter().position(|l| l.len() > 1) {
        let l = p.lumps()[idx].clone();
        let (head, tail) = l.split_at(l.len() - 1);
        let (np, nl, rec) = break_lump(&p, idx, (head, tail), &r_of(records.len()), &ledger)?;
        p = np;
        ledger = nl;
        records.push(rec);
    }
    Ok((p, ledger, records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_preserves_sum() {
        let p = Partition::new(3, vec![vec![1, 2, 3]]).unwrap();
        let ledger = AuxMomentaLedger::zeros(&p, 2);
        let q = [0.3, -1.2];
        let (np, nl, rec) = break_lump(&p, 0, (&[1], &[2, 3]), &q, &ledger).unwrap();
        assert_eq!(np.to_string(), "[[1],[2,3]]");
        assert_eq!(nl.get(1).unwrap(), &[-0.3, 1.2]);
        assert_eq!(nl.get(2).unwrap(), &q);
        assert!(nl.sum().iter().all(|x| x.abs() < 1e-15));
        assert!((rec.r_norm - (0.09f64 + 1.44).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bad_splits() {
        let p = Partition::new(3, vec![vec![1, 2, 3]]).unwrap();
        let l = AuxMomentaLedger::zeros(&p, 1);
        assert!(matches!(break_lump(&p, 0, (&[1], &[2]), &[0.0], &l), Err(Error::BadSplit(_))));
        assert!(matches!(break_lump(&p, 0, (&[], &[1, 2, 3]), &[0.0], &l), Err(Error::BadSplit(_))));
        assert!(matches!(break_lump(&p, 0, (&[1, 2], &[2, 3]), &[0.0], &l), Err(Error::BadSplit(_))));
    }

    #[test]
    fn singletons_within_s_steps() {
        let p = Partition::new(7, vec![vec![1, 4, 5], vec![2, 7], vec![3], vec![6]]).unwrap();
        let l = AuxMomentaLedger::zeros(&p, 3);
        let (fin, nl, recs) = break_to_singletons(&p, &l, |s| vec![s as f64, 1.0, -2.0]).unwrap();
        assert!(fin.is_trivial());
        assert!(recs.len() <= p.s());
        assert!(nl.sum().iter().all(|x| x.abs() < 1e-12));
    }
}
