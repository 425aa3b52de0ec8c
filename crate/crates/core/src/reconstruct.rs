//! Data reconstruction from `k` accessed nodes.

use crate::code::Code;
use crate::encoder::{extract_message, DataMatrix, NodeShare, SourceMessage};
use crate::error::{Error, Result};
use crate::galois::{Elem, Field, Mat};
use crate::testgroup::{self, TestGroupVerdict};

/// Recovers one component block `M_i` from `κ` rows of `Ψ_ℋ(i)` and the
/// matching stored segments.
///
/// With `Ψ_ℋ(i) = [Φ | Δ]` the stored segments are `[Φ N + Δ Lᵀ | Φ L]`, so
/// `L = Φ⁻¹ X_right` and `N = Φ⁻¹ (X_left - Δ Lᵀ)`. Fails with
/// `StructureViolation` if the recovered `N` is not symmetric.
pub fn pm_reconstruct_component(
    field: &Field,
    coeffs: &[Vec<Elem>],
    segments: &[Vec<Elem>],
    lambda: usize,
    kappa: usize,
) -> Result<Mat> {
    if coeffs.len() != kappa
        || segments.len() != kappa
        || coeffs.iter().chain(segments).any(|r| r.len() != lambda)
    {
        return Err(Error::DimensionMismatch(format!(
            "component reconstruction needs {kappa} rows of length {lambda}"
        )));
    }
    let rest = lambda - kappa;
    let sub = |rows: &[Vec<Elem>], from: usize, len: usize| {
        Mat::from_rows(rows.iter().map(|r| r[from..from + len].to_vec()).collect())
    };
    let phi_inv = sub(coeffs, 0, kappa)?.inverse(field)?;
    let delta = sub(coeffs, kappa, rest)?;
    let x_left = sub(segments, 0, kappa)?;
    let x_right = sub(segments, kappa, rest)?;

    let l = phi_inv.mul(field, &x_right)?;
    let dlt = delta.mul(field, &l.transpose())?;
    let mut diff = x_left;
    for r in 0..kappa {
        for c in 0..kappa {
            diff[(r, c)] = field.sub(diff[(r, c)], dlt[(r, c)]);
        }
    }
    let n = phi_inv.mul(field, &diff)?;

    let mut m = Mat::zeros(lambda, lambda);
    for r in 0..kappa {
        for c in 0..kappa {
            if n[(r, c)] != n[(c, r)] {
                return Err(Error::StructureViolation(
                    "recovered N is not symmetric".into(),
                ));
            }
            m[(r, c)] = n[(r, c)];
        }
        for c in 0..rest {
            m[(r, kappa + c)] = l[(r, c)];
            m[(kappa + c, r)] = l[(r, c)];
        }
    }
    Ok(m)
}

/// Message estimate from exactly `k - 2b` shares.
pub fn reconstruct_estimate(code: &Code, shares: &[&NodeShare]) -> Result<SourceMessage> {
    let d = code.derived();
    if shares.len() != d.kappa {
        return Err(Error::BadHelperSet(format!(
            "estimate needs {} shares, got {}",
            d.kappa,
            shares.len()
        )));
    }
    let mut blocks = Vec::with_capacity(d.z);
    for i in 0..d.z {
        let coeffs: Vec<Vec<Elem>> = shares.iter().map(|s| code.psi_segment(s.node, i)).collect();
        let segs: Vec<Vec<Elem>> = shares
            .iter()
            .map(|s| s.segment(i, d.lambda).to_vec())
            .collect();
        blocks.push(pm_reconstruct_component(
            code.field(),
            &coeffs,
            &segs,
            d.lambda,
            d.kappa,
        )?);
    }
    extract_message(&DataMatrix::from_blocks(&blocks, d.lambda, d.kappa)?)
}

fn check_access(code: &Code, access: &[NodeShare], expected: usize) -> Result<()> {
    if access.len() != expected {
        return Err(Error::BadHelperSet(format!(
            "access set must hold exactly {expected} nodes, got {}",
            access.len()
        )));
    }
    for (i, s) in access.iter().enumerate() {
        code.check_node(s.node)?;
        if s.x.len() != code.alpha() {
            return Err(Error::DimensionMismatch(format!(
                "share of node {} length",
                s.node
            )));
        }
        if access[..i].iter().any(|o| o.node == s.node) {
            return Err(Error::BadHelperSet(format!(
                "node {} accessed twice",
                s.node
            )));
        }
    }
    Ok(())
}

/// Test-group reconstruction from exactly `k` shares, up to `b` of them corrupted.
pub fn testgroup_reconstruct(code: &Code, access: &[NodeShare]) -> Result<SourceMessage> {
    testgroup_reconstruct_verdict(code, access).map(|(m, _)| m)
}

pub fn testgroup_reconstruct_verdict(
    code: &Code,
    access: &[NodeShare],
) -> Result<(SourceMessage, TestGroupVerdict<SourceMessage>)> {
    let p = code.params();
    check_access(code, access, p.k)?;
    let by_node = |n: usize| {
        access
            .iter()
            .find(|s| s.node == n)
            .expect("member of access")
    };
    let members: Vec<usize> = access.iter().map(|s| s.node).collect();
    testgroup::decode(&members, p.k - p.b, p.k - 2 * p.b, |subset| {
        let shares: Vec<&NodeShare> = subset.iter().map(|&n| by_node(n)).collect();
        reconstruct_estimate(code, &shares).ok()
    })
}
