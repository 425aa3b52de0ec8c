//! Test-group decoding shared by reconstruction and both repair schemes.
//!
//! Out of `a` contributors, groups of `a - b` members are tried in
//! lexicographic order. A group is accepted when the estimates from all of
//! its `(a - 2b)`-subsets exist and agree. With at most `b` corrupted
//! contributors some group is fully honest, and any consistent group must
//! contain an honest subset, so the accepted estimate is genuine.

use std::collections::HashMap;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Outcome of one accepted (or the last rejected) test group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestGroupVerdict<T> {
    pub group: Vec<usize>,
    /// Estimates per subset in enumeration order; `None` marks a malformed one.
    pub estimates: Vec<(Vec<usize>, Option<T>)>,
    pub consistent: bool,
    /// 1-based position of this group in the enumeration.
    pub groups_tried: usize,
}

/// Runs test-group decoding over `members`.
///
/// `estimate` maps a subset of members (ascending) to an estimate, or `None`
/// when the inputs cannot produce a well-formed one. Estimates are cached so
/// each subset is evaluated at most once across groups.
pub fn decode<T, F>(
    members: &[usize],
    group_size: usize,
    subset_size: usize,
    mut estimate: F,
) -> Result<(T, TestGroupVerdict<T>)>
where
    T: Clone + PartialEq,
    F: FnMut(&[usize]) -> Option<T>,
{
    if subset_size == 0 || subset_size > group_size || group_size > members.len() {
        return Err(Error::BadHelperSet(format!(
            "cannot form groups of {group_size} with subsets of {subset_size} from {} members",
            members.len()
        )));
    }
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    let mut cache: HashMap<Vec<usize>, Option<T>> = HashMap::new();

    for (gi, group) in sorted.iter().copied().combinations(group_size).enumerate() {
        let mut estimates: Vec<(Vec<usize>, Option<T>)> = Vec::new();
        let mut consistent = true;
        for subset in group.iter().copied().combinations(subset_size) {
            let est = cache
                .entry(subset.clone())
                .or_insert_with(|| estimate(&subset))
                .clone();
            consistent &= match (&est, estimates.first()) {
                (None, _) => false,
                (Some(_), None) => true,
                (Some(a), Some((_, first))) => first.as_ref() == Some(a),
            };
            estimates.push((subset, est));
            if !consistent {
                break;
            }
        }
        if consistent {
            let value = estimates[0]
                .1
                .clone()
                .expect("consistent group has estimates");
            return Ok((
                value,
                TestGroupVerdict {
                    group,
                    estimates,
                    consistent,
                    groups_tried: gi + 1,
                },
            ));
        }
    }
    Err(Error::NoConsistentGroup)
}
