use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::galois::{Elem, Field};
use crate::params::{CodeParams, Derived};

/// Which repair procedure a stored code is operated with. All three share the
/// same storage encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Repair via the `Θ_ℋ` inversion; needs a verified (usually large) field.
    One,
    /// Iterative merge-operator repair; works in fields of size about `n`.
    Two,
    /// Plain concatenation of component codes, `b = 0` only.
    Concat,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::One => "1",
            Scheme::Two => "2",
            Scheme::Concat => "concat",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Scheme::One),
            "2" => Ok(Scheme::Two),
            "concat" => Ok(Scheme::Concat),
            other => Err(Error::Parse(format!("unknown scheme {other:?}"))),
        }
    }
}

/// Validated parameters bound to a field. Node `ℓ` (1-based) is assigned the
/// evaluation point `e_ℓ = g^ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Code {
    params: CodeParams,
    derived: Derived,
    field: Field,
    points: Vec<Elem>,
}

impl Code {
    pub fn new(params: CodeParams, field: Field) -> Result<Self> {
        let derived = params.validate()?;
        // e_1..e_n must be distinct and nonzero
        if field.modulus() < params.n as u64 + 1 {
            return Err(Error::FieldTooSmall {
                p: field.modulus(),
                n: params.n,
            });
        }
        let points = (1..=params.n).map(|l| field.gen_pow(l as i64)).collect();
        Ok(Code {
            params,
            derived,
            field,
            points,
        })
    }

    #[inline]
    pub fn params(&self) -> &CodeParams {
        &self.params
    }

    #[inline]
    pub fn derived(&self) -> &Derived {
        &self.derived
    }

    #[inline]
    pub fn field(&self) -> &Field {
        &self.field
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.params.n
    }

    #[inline]
    pub fn alpha(&self) -> usize {
        self.params.alpha
    }

    pub fn check_node(&self, node: usize) -> Result<()> {
        if node == 0 || node > self.params.n {
            Err(Error::BadNodeIndex(node))
        } else {
            Ok(())
        }
    }

    /// Checks a helper list for repairing `failed` with `d` helpers.
    pub fn check_helpers(&self, failed: usize, d: usize, helpers: &[usize]) -> Result<()> {
        self.check_node(failed)?;
        self.derived.dims(d)?;
        if helpers.len() != d {
            return Err(Error::BadHelperSet(format!(
                "{} helpers given for d = {d}",
                helpers.len()
            )));
        }
        for (i, &h) in helpers.iter().enumerate() {
            self.check_node(h)?;
            if h == failed {
                return Err(Error::BadHelperSet(format!("node {h} cannot help itself")));
            }
            if helpers[..i].contains(&h) {
                return Err(Error::BadHelperSet(format!("helper {h} listed twice")));
            }
        }
        Ok(())
    }

    /// `e_ℓ = g^ℓ`.
    pub fn point(&self, node: usize) -> Elem {
        self.points[node - 1]
    }

    /// `e_ℓ^exp`, exponent may be negative.
    pub fn point_pow(&self, node: usize, exp: i64) -> Elem {
        self.field
            .pow(self.point(node), exp)
            .expect("evaluation points are nonzero")
    }

    /// Coefficients `[e_ℓ^start, ..., e_ℓ^(start+len-1)]`, a window of `ψ_ℓ`.
    pub fn psi_window(&self, node: usize, start: usize, len: usize) -> Vec<Elem> {
        let e = self.point(node);
        let mut acc = self.point_pow(node, start as i64);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            out.push(acc);
            acc = self.field.mul(acc, e);
        }
        out
    }

    /// The full coefficient vector `ψ_ℓ` of length `alpha`.
    pub fn psi(&self, node: usize) -> Vec<Elem> {
        self.psi_window(node, 0, self.params.alpha)
    }

    /// `ψ_ℓ(i)` for component `i` (0-based), length `lambda`.
    pub fn psi_segment(&self, node: usize, component: usize) -> Vec<Elem> {
        let lambda = self.derived.lambda;
        self.psi_window(node, component * lambda, lambda)
    }
}
