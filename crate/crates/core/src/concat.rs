//! Repair for `b = 0` by treating each component block as an independent
//! product-matrix code. Components are spread over the `d` helpers so that
//! every component gets `d_min` helpers and every helper serves `α/d` of them.

use crate::code::Code;
use crate::encoder::NodeShare;
use crate::error::{Error, Result};
use crate::galois::{solve_right, Elem, Mat};

/// Component-to-helper bipartite graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub helpers: Vec<usize>,
    /// `neighbors[v]`: helpers serving component `v`, ascending.
    pub neighbors: Vec<Vec<usize>>,
}

impl Assignment {
    pub fn components(&self) -> usize {
        self.neighbors.len()
    }

    pub fn degree(&self, helper: usize) -> usize {
        self.neighbors
            .iter()
            .filter(|n| n.contains(&helper))
            .count()
    }

    /// Components served by `helper`, ascending.
    pub fn served_by(&self, helper: usize) -> Vec<usize> {
        (0..self.neighbors.len())
            .filter(|&v| self.neighbors[v].contains(&helper))
            .collect()
    }
}

/// Connects every component to the `d_min` helpers of currently lowest degree,
/// ties broken by position in `helpers`.
pub fn assign_bipartite(components: usize, helpers: &[usize], d_min: usize) -> Result<Assignment> {
    let d = helpers.len();
    if d < d_min || d_min == 0 {
        return Err(Error::BadHelperSet(format!(
            "{d} helpers cannot cover d_min = {d_min}"
        )));
    }
    if !(components * d_min).is_multiple_of(d) {
        return Err(Error::NonIntegralDegree(format!(
            "{components} components x {d_min} / {d} helpers"
        )));
    }
    let mut degree = vec![0usize; d];
    let mut neighbors = Vec::with_capacity(components);
    for _ in 0..components {
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by_key(|&u| (degree[u], u));
        let mut chosen: Vec<usize> = order[..d_min].to_vec();
        chosen.sort_unstable();
        for &u in &chosen {
            degree[u] += 1;
        }
        neighbors.push(chosen.into_iter().map(|u| helpers[u]).collect());
    }
    let target = components * d_min / d;
    if degree.iter().any(|&g| g != target) {
        return Err(Error::NonIntegralDegree(format!(
            "unbalanced degrees {degree:?}"
        )));
    }
    Ok(Assignment {
        helpers: helpers.to_vec(),
        neighbors,
    })
}

fn require_b0(code: &Code) -> Result<()> {
    if code.params().b != 0 {
        return Err(Error::UnsupportedScheme("concat requires b = 0".into()));
    }
    Ok(())
}

/// Assignment for repairing with the given helpers.
pub fn plan_concat(code: &Code, failed: usize, helpers: &[usize]) -> Result<Assignment> {
    require_b0(code)?;
    code.check_helpers(failed, helpers.len(), helpers)?;
    assign_bipartite(code.derived().z, helpers, code.derived().d_min)
}

/// `x_h(i) ψ_f(i)ᵀ` for each component `i` the helper serves.
pub fn helper_concat_symbols(
    code: &Code,
    asg: &Assignment,
    helper: &NodeShare,
    failed: usize,
) -> Vec<Elem> {
    let lambda = code.derived().lambda;
    asg.served_by(helper.node)
        .into_iter()
        .map(|i| {
            code.field()
                .dot(helper.segment(i, lambda), &code.psi_segment(failed, i))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatBundle {
    pub failed: usize,
    pub assignment: Assignment,
    pub symbols: Vec<(usize, Vec<Elem>)>,
}

impl ConcatBundle {
    pub fn gather(code: &Code, failed: usize, helpers: &[&NodeShare]) -> Result<Self> {
        let ids: Vec<usize> = helpers.iter().map(|h| h.node).collect();
        let assignment = plan_concat(code, failed, &ids)?;
        let symbols = helpers
            .iter()
            .map(|h| (h.node, helper_concat_symbols(code, &assignment, h, failed)))
            .collect();
        Ok(ConcatBundle {
            failed,
            assignment,
            symbols,
        })
    }

    pub fn total_symbols(&self) -> usize {
        self.symbols.iter().map(|(_, s)| s.len()).sum()
    }
}

/// Solves each component from its `d_min` helper symbols.
pub fn decode_concat(code: &Code, bundle: &ConcatBundle) -> Result<Vec<Elem>> {
    require_b0(code)?;
    let lambda = code.derived().lambda;
    let asg = &bundle.assignment;
    let mut x = Vec::with_capacity(code.alpha());
    for (i, nbrs) in asg.neighbors.iter().enumerate() {
        let mut a = Mat::zeros(lambda, lambda);
        let mut y = Vec::with_capacity(lambda);
        for (c, &h) in nbrs.iter().enumerate() {
            let (_, syms) = bundle
                .symbols
                .iter()
                .find(|(n, _)| *n == h)
                .ok_or_else(|| Error::BadHelperSet(format!("helper {h} sent nothing")))?;
            let slot = asg
                .served_by(h)
                .iter()
                .position(|&v| v == i)
                .expect("assigned");
            y.push(*syms.get(slot).ok_or_else(|| {
                Error::DimensionMismatch(format!("helper {h} sent too few symbols"))
            })?);
            for (r, coef) in code.psi_segment(h, i).into_iter().enumerate() {
                a[(r, c)] = coef;
            }
        }
        x.extend(solve_right(code.field(), &y, &a)?);
    }
    Ok(x)
}

/// Gathers and decodes in one step; returns the share and the symbols moved.
pub fn repair_b0(code: &Code, failed: usize, helpers: &[&NodeShare]) -> Result<(Vec<Elem>, usize)> {
    let bundle = ConcatBundle::gather(code, failed, helpers)?;
    Ok((decode_concat(code, &bundle)?, bundle.total_symbols()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{encode_message, SourceMessage};
    use crate::galois::Field;
    use crate::params::CodeParams;
    use itertools::Itertools;
    use proptest::prelude::*;

    #[test]
    fn complete_bipartite_when_d_equals_d_min() {
        let a = assign_bipartite(4, &[1, 2, 3], 3).unwrap();
        assert!(a.neighbors.iter().all(|n| n == &vec![1, 2, 3]));
    }

    #[test]
    fn balanced_four_by_four() {
        let a = assign_bipartite(4, &[1, 2, 3, 4], 3).unwrap();
        assert_eq!(
            a.neighbors,
            vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]]
        );
        assert!((1..=4).all(|u| a.degree(u) == 3));
    }

    #[test]
    fn single_component_takes_lowest() {
        let a = assign_bipartite(1, &[5, 6, 7], 3).unwrap();
        assert_eq!(a.neighbors, vec![vec![5, 6, 7]]);
        assert!(matches!(
            assign_bipartite(1, &[5, 6, 7, 8], 3),
            Err(Error::NonIntegralDegree(_))
        ));
    }

    #[test]
    fn exact_repair_n5_k2_b0() {
        let code = Code::new(
            CodeParams::new(5, 2, &[3, 4], 0, 12),
            Field::new(7).unwrap(),
        )
        .unwrap();
        let f = code.field();
        let s = SourceMessage((0..20).map(|i| f.elem(i * 3 + 1)).collect());
        let sh = encode_message(&s, &code).unwrap();
        for fl in 1..=5 {
            for d in [3usize, 4] {
                let others: Vec<&NodeShare> = sh.iter().filter(|x| x.node != fl).collect();
                for helpers in others.into_iter().combinations(d) {
                    let bundle = ConcatBundle::gather(&code, fl, &helpers).unwrap();
                    assert!(bundle.symbols.iter().all(|(_, s)| s.len() == 12 / d));
                    let (x, moved) = repair_b0(&code, fl, &helpers).unwrap();
                    assert_eq!(x, sh[fl - 1].x);
                    assert_eq!(moved, 12);
                }
            }
        }
    }

    #[test]
    fn rejects_error_resilient_params() {
        let code = Code::new(CodeParams::new(6, 3, &[4, 5], 1, 6), Field::new(7).unwrap()).unwrap();
        assert!(matches!(
            plan_concat(&code, 1, &[2, 3, 4, 5]),
            Err(Error::UnsupportedScheme(_))
        ));
    }

    proptest! {
        #[test]
        fn degrees_are_balanced(d_min in 1usize..8, extra in 0usize..6, mult in 1usize..5) {
            let d = d_min + extra;
            let alpha = d_min * d / gcd(d_min, d) * mult;
            let helpers: Vec<usize> = (1..=d).collect();
            let a = assign_bipartite(alpha / d_min, &helpers, d_min).unwrap();
            prop_assert!(a.neighbors.iter().all(|n| n.len() == d_min));
            prop_assert!(helpers.iter().all(|&u| a.degree(u) == alpha / d));
        }
    }

    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
}
