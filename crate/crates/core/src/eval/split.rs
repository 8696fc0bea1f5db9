use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::corpus::project_of;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<String>,
    pub test: Vec<String>,
}

/// Groups issue keys by their project prefix; keys are sorted and deduplicated.
pub fn group_by_project<S: AsRef<str>>(keys: &[S]) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for k in keys {
        out.entry(project_of(k.as_ref()).to_owned()).or_default().push(k.as_ref().to_owned());
    }
    for v in out.values_mut() {
        v.sort();
        v.dedup();
    }
    out
}

/// Holds out one uniformly chosen issue per project. Projects are visited
/// in name order and issues in key order, so the result depends only on the
/// key sets and `seed`.
pub fn split_dataset(projects: &BTreeMap<String, Vec<String>>, seed: u64) -> Result<Split, EvalError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut split = Split { train: Vec::new(), test: Vec::new() };
    for (project, issues) in projects {
        let mut issues = issues.clone();
        issues.sort();
        issues.dedup();
        if issues.len() < 2 {
            return Err(EvalError::TooFewIssues { project: project.clone(), count: issues.len() });
        }
        let pick = rng.random_range(0..issues.len());
        for (i, key) in issues.into_iter().enumerate() {
            if i == pick { split.test.push(key) } else { split.train.push(key) }
        }
    }
    Ok(split)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus() -> BTreeMap<String, Vec<String>> {
        let keys: Vec<String> =
            ["A", "B", "C"].iter().flat_map(|p| (1..=10).map(move |i| format!("{p}-{i}"))).collect();
        group_by_project(&keys)
    }

    #[test]
    fn one_per_project() {
        let s = split_dataset(&corpus(), 7).unwrap();
        assert_eq!((s.test.len(), s.train.len()), (3, 27));
        assert_eq!(s, split_dataset(&corpus(), 7).unwrap());
    }

    #[test]
    fn single_issue_project() {
        let g = group_by_project(&["A-1", "A-2", "B-1"]);
        assert!(matches!(split_dataset(&g, 0), Err(EvalError::TooFewIssues { count: 1, .. })));
    }
}
