//! Repair with a truncated Vandermonde mixer `Ω`.
//!
//! Helper `h` sends `r_{h,f} = x_h Φ_f Ω_{z_d}` where `x_h Φ_f` collects the
//! `z` per-component products `x_h(i) ψ_f(i)ᵀ`. Symmetry of each block gives
//! `r_{h,f} = x_f Φ_h Ω_{z_d}`, so `d - 2b` honest helpers determine `x_f`
//! through the `α×α` matrix `Θ_ℋ = [Φ_{h_1} Ω_{z_d}, ...]`.

use std::fmt;

use itertools::Itertools;

use crate::code::Code;
use crate::encoder::{header_fields, parse_body, parse_num, NodeShare};
use crate::error::{Error, Result};
use crate::galois::{next_prime, solve_right, vandermonde, Elem, Field, Mat};
use crate::params::CodeParams;
use crate::testgroup::{self, TestGroupVerdict};

/// The mixer `Ω` (`z×z`, row `j` = powers of `g^{i_j}`) for a code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaConfig {
    pub exponents: Vec<u64>,
    pub omega: Mat,
}

impl OmegaConfig {
    /// First `z_d` columns of `Ω`.
    pub fn truncated(&self, z_d: usize) -> Mat {
        self.omega.first_cols(z_d)
    }
}

/// Builds `Ω` from exponents `i_j = αn(j-1) + 1` and checks every truncation
/// used by `D` has full column rank.
pub fn omega_build(code: &Code) -> Result<OmegaConfig> {
    let f = code.field();
    let z = code.derived().z;
    let step = (code.alpha() * code.n()) as u64;
    let exponents: Vec<u64> = (0..z as u64).map(|j| step * j + 1).collect();
    let points: Vec<Elem> = exponents
        .iter()
        .map(|&i| f.gen_pow((i % (f.modulus() - 1)) as i64))
        .collect();
    let omega = match vandermonde(f, &points, z) {
        Ok(m) => m,
        Err(_) => {
            // colliding points; report against the smallest affected d
            let d = code
                .derived()
                .per_d
                .iter()
                .find(|r| r.z_d > 1)
                .map_or(0, |r| r.d);
            return Err(Error::OmegaRankDeficient { d, p: f.modulus() });
        }
    };
    let cfg = OmegaConfig { exponents, omega };
    for dims in &code.derived().per_d {
        if cfg.truncated(dims.z_d).rank(f) != dims.z_d {
            return Err(Error::OmegaRankDeficient {
                d: dims.d,
                p: f.modulus(),
            });
        }
    }
    Ok(cfg)
}

/// `Φ_ℓ`: `α×z` block-diagonal with `ψ_ℓ(i)ᵀ` in column `i`.
pub fn phi_matrix(code: &Code, node: usize) -> Mat {
    let d = code.derived();
    let mut m = Mat::zeros(code.alpha(), d.z);
    for i in 0..d.z {
        for (r, c) in code.psi_segment(node, i).into_iter().enumerate() {
            m[(i * d.lambda + r, i)] = c;
        }
    }
    m
}

/// `x_h Φ_f`, computed segment-wise.
pub fn project(code: &Code, x: &[Elem], f: usize) -> Vec<Elem> {
    let d = code.derived();
    (0..d.z)
        .map(|i| {
            code.field().dot(
                &x[i * d.lambda..(i + 1) * d.lambda],
                &code.psi_segment(f, i),
            )
        })
        .collect()
}

/// Symbols helper `h` sends to repair `f` with `d` helpers: `z_d` of them.
pub fn helper_repair_symbols(
    code: &Code,
    cfg: &OmegaConfig,
    helper: &NodeShare,
    failed: usize,
    d: usize,
) -> Result<Vec<Elem>> {
    code.check_node(failed)?;
    let z_d = code.derived().dims(d)?.z_d;
    cfg.truncated(z_d)
        .left_mul_vec(code.field(), &project(code, &helper.x, failed))
}

/// `Θ_ℋ`; depends only on the helper subset and `d`.
pub fn theta(code: &Code, cfg: &OmegaConfig, subset: &[usize], d: usize) -> Result<Mat> {
    let dims = code.derived().dims(d)?;
    if subset.len() != d - 2 * code.params().b {
        return Err(Error::BadHelperSet(format!(
            "Theta needs {} helpers, got {}",
            d - 2 * code.params().b,
            subset.len()
        )));
    }
    let om = cfg.truncated(dims.z_d);
    let parts = subset
        .iter()
        .map(|&h| phi_matrix(code, h).mul(code.field(), &om))
        .collect::<Result<Vec<_>>>()?;
    Mat::hcat(&parts)
}

/// `x̂ = ρ Θ⁻¹` for concatenated symbols `ρ`.
pub fn estimate(field: &Field, rho: &[Elem], theta: &Mat) -> Result<Vec<Elem>> {
    solve_right(field, rho, theta)
}

/// One helper's contribution to a repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairBundleI {
    pub failed: usize,
    pub d: usize,
    /// `(helper, symbols)` pairs.
    pub symbols: Vec<(usize, Vec<Elem>)>,
}

impl RepairBundleI {
    /// Collects honest symbols from the given helper shares.
    pub fn gather(
        code: &Code,
        cfg: &OmegaConfig,
        failed: usize,
        helpers: &[&NodeShare],
    ) -> Result<Self> {
        let d = helpers.len();
        let symbols = helpers
            .iter()
            .map(|h| Ok((h.node, helper_repair_symbols(code, cfg, h, failed, d)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RepairBundleI { failed, d, symbols })
    }

    pub fn total_symbols(&self) -> usize {
        self.symbols.iter().map(|(_, s)| s.len()).sum()
    }
}

pub fn testgroup_repair(
    code: &Code,
    cfg: &OmegaConfig,
    bundle: &RepairBundleI,
) -> Result<Vec<Elem>> {
    testgroup_repair_verdict(code, cfg, bundle).map(|(x, _)| x)
}

pub fn testgroup_repair_verdict(
    code: &Code,
    cfg: &OmegaConfig,
    bundle: &RepairBundleI,
) -> Result<(Vec<Elem>, TestGroupVerdict<Vec<Elem>>)> {
    let b = code.params().b;
    let d = bundle.d;
    let helpers: Vec<usize> = bundle.symbols.iter().map(|(h, _)| *h).collect();
    code.check_helpers(bundle.failed, d, &helpers)?;
    let z_d = code.derived().dims(d)?.z_d;
    if let Some((h, s)) = bundle.symbols.iter().find(|(_, s)| s.len() != z_d) {
        return Err(Error::DimensionMismatch(format!(
            "helper {h} sent {} symbols, expected {z_d}",
            s.len()
        )));
    }
    let of = |h: usize| {
        &bundle
            .symbols
            .iter()
            .find(|(n, _)| *n == h)
            .expect("helper")
            .1
    };
    testgroup::decode(&helpers, d - b, d - 2 * b, |subset| {
        let th = theta(code, cfg, subset, d).ok()?;
        let rho: Vec<Elem> = subset.iter().flat_map(|&h| of(h).iter().copied()).collect();
        estimate(code.field(), &rho, &th).ok()
    })
}

/// Result of checking `Θ_ℋ` over every helper subset of every `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaReport {
    pub checked: usize,
    pub singular: Vec<(usize, Vec<usize>)>,
}

impl ThetaReport {
    pub fn passed(&self) -> bool {
        self.singular.is_empty()
    }
}

/// Exhaustively checks invertibility of `Θ_ℋ` for all `d ∈ D` and all
/// `ℋ ⊆ [n]` of size `d - 2b`.
pub fn verify_theta_all(code: &Code, cfg: &OmegaConfig) -> Result<ThetaReport> {
    let mut report = ThetaReport {
        checked: 0,
        singular: Vec::new(),
    };
    let b = code.params().b;
    for &d in &code.params().d_set {
        for subset in (1..=code.n()).combinations(d - 2 * b) {
            report.checked += 1;
            let th = theta(code, cfg, &subset, d)?;
            if th.rank(code.field()) != code.alpha() {
                report.singular.push((d, subset));
            }
        }
    }
    Ok(report)
}

/// Builds the code over `GF(p)` and runs both checks.
pub fn certify(params: &CodeParams, p: u64) -> Result<(Code, OmegaConfig, ThetaReport)> {
    let code = Code::new(params.clone(), Field::new(p)?)?;
    let cfg = omega_build(&code)?;
    let report = verify_theta_all(&code, &cfg)?;
    Ok((code, cfg, report))
}

/// Smallest prime `p ≥ max(n + 1, from)`, `p ≤ to`, that certifies.
pub fn find_field(params: &CodeParams, from: u64, to: u64) -> Result<(Code, OmegaConfig)> {
    params.validate()?;
    let mut p = next_prime(from.max(params.n as u64 + 1).max(3));
    while p <= to {
        if let Ok((code, cfg, report)) = certify(params, p) {
            if report.passed() {
                return Ok((code, cfg));
            }
        }
        p = next_prime(p + 1);
    }
    Err(Error::NoCertifiedField { from, to })
}

/// Wire record of one helper's symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRecordI {
    pub d: usize,
    pub failed: usize,
    pub helper: usize,
    pub symbols: Vec<Elem>,
}

impl RepairRecordI {
    /// Parses a record; `expected` is the symbol count `z_d`.
    pub fn parse(field: &Field, text: &str, expected: usize) -> Result<Self> {
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let v = header_fields(header, "BAERR1", &["d", "f", "h"])?;
        Ok(RepairRecordI {
            d: parse_num(v[0], "d")?,
            failed: parse_num(v[1], "f")?,
            helper: parse_num(v[2], "h")?,
            symbols: parse_body(field, body, expected)?,
        })
    }
}

impl fmt::Display for RepairRecordI {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BAERR1 d={} f={} h={}", self.d, self.failed, self.helper)?;
        for s in &self.symbols {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
