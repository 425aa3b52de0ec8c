//! Per-scheme field certification: a field is accepted for a scheme only if
//! every repair system the scheme can ever form is solvable over it.

use std::fmt;

use crate::code::{Code, Scheme};
use crate::concat::assign_bipartite;
use crate::error::{Error, Result};
use crate::galois::{next_prime, Field};
use crate::params::CodeParams;
use crate::repair1::{omega_build, verify_theta_all};
use crate::repair2::{verify_reduced_all, RepairPlanII};

/// One named check with a short detail string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub scheme: Scheme,
    pub p: u64,
    pub checks: Vec<Check>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl fmt::Display for Certificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {}: {}",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        write!(
            f,
            "scheme {} over GF({}): {}",
            self.scheme,
            self.p,
            if self.passed() {
                "certified"
            } else {
                "not certified"
            }
        )
    }
}

fn check(name: &str, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn sample(singular: &[(usize, Vec<usize>)]) -> String {
    match singular.first() {
        None => String::new(),
        Some((d, h)) => format!(", first d={d} helpers={h:?}"),
    }
}

/// Runs every check for `scheme` over `GF(p)`. Parameter or field errors
/// (bad params, composite `p`, `p ≤ n`) are returned as `Err`.
pub fn certify_scheme(params: &CodeParams, scheme: Scheme, p: u64) -> Result<(Code, Certificate)> {
    let code = Code::new(params.clone(), Field::new(p)?)?;
    let mut checks = vec![check("field", true, format!("p = {p} > n = {}", params.n))];
    match scheme {
        Scheme::One => match omega_build(&code) {
            Ok(cfg) => {
                checks.push(check(
                    "omega",
                    true,
                    format!("{} x {}", cfg.omega.rows(), cfg.omega.cols()),
                ));
                let r = verify_theta_all(&code, &cfg)?;
                checks.push(check(
                    "theta",
                    r.passed(),
                    format!(
                        "{} subsets, {} singular{}",
                        r.checked,
                        r.singular.len(),
                        sample(&r.singular)
                    ),
                ));
            }
            Err(e @ Error::OmegaRankDeficient { .. }) => {
                checks.push(check("omega", false, e.to_string()))
            }
            Err(e) => return Err(e),
        },
        Scheme::Two => {
            for &d in &params.d_set {
                let plan = RepairPlanII::new(params, d)?;
                checks.push(check(
                    &format!("schedule d={d}"),
                    true,
                    format!(
                        "{} iteration(s), {} symbols per helper",
                        plan.iterations(),
                        plan.symbols_per_helper()
                    ),
                ));
            }
            let r = verify_reduced_all(&code)?;
            checks.push(check(
                "reduced systems",
                r.passed(),
                format!(
                    "{} subsets, {} singular{}",
                    r.checked,
                    r.singular.len(),
                    sample(&r.singular)
                ),
            ));
        }
        Scheme::Concat => {
            checks.push(check("b = 0", params.b == 0, format!("b = {}", params.b)));
            let dv = code.derived();
            for &d in &params.d_set {
                let helpers: Vec<usize> = (1..=d).collect();
                let r = assign_bipartite(dv.z, &helpers, dv.d_min);
                checks.push(check(
                    &format!("assignment d={d}"),
                    r.is_ok(),
                    match r {
                        Ok(_) => format!("{} components of degree {}", dv.z, dv.d_min),
                        Err(e) => e.to_string(),
                    },
                ));
            }
        }
    }
    Ok((code, Certificate { scheme, p, checks }))
}

/// Smallest prime `p` in `[max(from, n + 1), to]` certified for `scheme`.
pub fn find_certified_field(
    params: &CodeParams,
    scheme: Scheme,
    from: u64,
    to: u64,
) -> Result<(Code, Certificate)> {
    params.validate()?;
    let mut p = next_prime(from.max(params.n as u64 + 1).max(2));
    while p <= to {
        let (code, cert) = certify_scheme(params, scheme, p)?;
        if cert.passed() {
            return Ok((code, cert));
        }
        // concat failures do not depend on the field
        if scheme == Scheme::Concat {
            break;
        }
        p = next_prime(p + 1);
    }
    Err(Error::NoCertifiedField { from, to })
}
