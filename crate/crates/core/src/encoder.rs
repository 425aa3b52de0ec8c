//! Storage encoding: source symbols are packed into the block-diagonal
//! symmetric data matrix `M`, and node `ℓ` stores `x_ℓ = ψ_ℓ · M`.
//!
//! Each of the `z` diagonal blocks is a product-matrix MBR message matrix
//!
//! ```text
//! M_i = [ N_i   L_i ]
//!       [ L_iᵀ  0   ]
//! ```
//!
//! with `N_i` symmetric `κ×κ` and `L_i` of size `κ×(λ-κ)`. Symbols fill the
//! upper triangle of `N_i` row by row, then `L_i` row by row, block after block.

use std::fmt;
use std::str::FromStr;

use crate::code::{Code, Scheme};
use crate::error::{Error, Result};
use crate::galois::{Elem, Field, Mat};
use crate::params::CodeParams;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceMessage(pub Vec<Elem>);

impl SourceMessage {
    pub fn symbols(&self) -> &[Elem] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Parses one decimal symbol per line.
    pub fn parse(field: &Field, text: &str) -> Result<Self> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| parse_symbol(field, l.trim()))
            .collect::<Result<Vec<_>>>()
            .map(SourceMessage)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.0 {
            out.push_str(&s.to_string());
            out.push('\n');
        }
        out
    }
}

/// Strict decimal: no sign, no leading zeros, below the modulus.
pub(crate) fn parse_symbol(field: &Field, token: &str) -> Result<Elem> {
    if token.is_empty()
        || !token.bytes().all(|b| b.is_ascii_digit())
        || (token.len() > 1 && token.starts_with('0'))
    {
        return Err(Error::Parse(format!("malformed symbol {token:?}")));
    }
    let v: u64 = token
        .parse()
        .map_err(|_| Error::Parse(format!("symbol {token:?} out of range")))?;
    field.checked_elem(v)
}

/// The `α×α` message matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataMatrix {
    m: Mat,
    lambda: usize,
    kappa: usize,
}

impl DataMatrix {
    pub fn matrix(&self) -> &Mat {
        &self.m
    }

    pub fn components(&self) -> usize {
        self.m.rows() / self.lambda
    }

    /// Diagonal block `M_i` (0-based).
    pub fn block(&self, i: usize) -> Mat {
        let mut out = Mat::zeros(self.lambda, self.lambda);
        let off = i * self.lambda;
        for r in 0..self.lambda {
            for c in 0..self.lambda {
                out[(r, c)] = self.m[(off + r, off + c)];
            }
        }
        out
    }

    /// Wraps a raw matrix after checking the block structure.
    pub fn from_matrix(m: Mat, lambda: usize, kappa: usize) -> Result<Self> {
        let dm = DataMatrix { m, lambda, kappa };
        dm.check_structure()?;
        Ok(dm)
    }

    /// Assembles `M` from its diagonal blocks.
    pub fn from_blocks(blocks: &[Mat], lambda: usize, kappa: usize) -> Result<Self> {
        let alpha = blocks.len() * lambda;
        let mut m = Mat::zeros(alpha, alpha);
        for (i, b) in blocks.iter().enumerate() {
            if b.rows() != lambda || b.cols() != lambda {
                return Err(Error::DimensionMismatch("component block size".into()));
            }
            for r in 0..lambda {
                for c in 0..lambda {
                    m[(i * lambda + r, i * lambda + c)] = b[(r, c)];
                }
            }
        }
        DataMatrix::from_matrix(m, lambda, kappa)
    }

    fn check_structure(&self) -> Result<()> {
        let alpha = self.m.rows();
        if self.m.cols() != alpha || self.lambda == 0 || !alpha.is_multiple_of(self.lambda) {
            return Err(Error::StructureViolation("shape".into()));
        }
        for r in 0..alpha {
            for c in 0..alpha {
                let v = self.m[(r, c)];
                let same_block = r / self.lambda == c / self.lambda;
                if !same_block {
                    if !v.is_zero() {
                        return Err(Error::StructureViolation(format!(
                            "off-block entry ({r}, {c}) is nonzero"
                        )));
                    }
                    continue;
                }
                if v != self.m[(c, r)] {
                    return Err(Error::StructureViolation(format!(
                        "asymmetric at ({r}, {c})"
                    )));
                }
                let (br, bc) = (r % self.lambda, c % self.lambda);
                if br >= self.kappa && bc >= self.kappa && !v.is_zero() {
                    return Err(Error::StructureViolation(format!(
                        "zero corner entry ({r}, {c}) is nonzero"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Symbols per component block: `κ(κ+1)/2 + κ(λ-κ)`.
pub fn symbols_per_block(lambda: usize, kappa: usize) -> usize {
    kappa * (kappa + 1) / 2 + kappa * (lambda - kappa)
}

pub fn build_data_matrix(msg: &SourceMessage, params: &CodeParams) -> Result<DataMatrix> {
    let derived = params.validate()?;
    if msg.len() != derived.f_mbr {
        return Err(Error::WrongMessageLength {
            got: msg.len(),
            expected: derived.f_mbr,
        });
    }
    let (lambda, kappa) = (derived.lambda, derived.kappa);
    let mut m = Mat::zeros(params.alpha, params.alpha);
    let mut symbols = msg.symbols().iter().copied();
    for i in 0..derived.z {
        let off = i * lambda;
        for r in 0..kappa {
            for c in r..kappa {
                let s = symbols.next().expect("length checked");
                m[(off + r, off + c)] = s;
                m[(off + c, off + r)] = s;
            }
        }
        for r in 0..kappa {
            for c in kappa..lambda {
                let s = symbols.next().expect("length checked");
                m[(off + r, off + c)] = s;
                m[(off + c, off + r)] = s;
            }
        }
    }
    Ok(DataMatrix { m, lambda, kappa })
}

pub fn extract_message(dm: &DataMatrix) -> Result<SourceMessage> {
    dm.check_structure()?;
    let (lambda, kappa) = (dm.lambda, dm.kappa);
    let mut out = Vec::with_capacity(dm.components() * symbols_per_block(lambda, kappa));
    for i in 0..dm.components() {
        let off = i * lambda;
        for r in 0..kappa {
            for c in r..kappa {
                out.push(dm.m[(off + r, off + c)]);
            }
        }
        for r in 0..kappa {
            for c in kappa..lambda {
                out.push(dm.m[(off + r, off + c)]);
            }
        }
    }
    Ok(SourceMessage(out))
}

/// One node's stored vector together with its identity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NodeShare {
    pub node: usize,
    pub point: Elem,
    pub x: Vec<Elem>,
}

impl NodeShare {
    /// Segment `i` (0-based) of length `len`.
    pub fn segment(&self, i: usize, len: usize) -> &[Elem] {
        &self.x[i * len..(i + 1) * len]
    }
}

pub fn encode_node(dm: &DataMatrix, node: usize, code: &Code) -> Result<NodeShare> {
    code.check_node(node)?;
    let f = code.field();
    let lambda = code.derived().lambda;
    let mut x = Vec::with_capacity(code.alpha());
    for i in 0..code.derived().z {
        let psi = code.psi_segment(node, i);
        let off = i * lambda;
        for c in 0..lambda {
            let col: Vec<Elem> = (0..lambda).map(|r| dm.m[(off + r, off + c)]).collect();
            x.push(f.dot(&psi, &col));
        }
    }
    Ok(NodeShare {
        node,
        point: code.point(node),
        x,
    })
}

pub fn encode_all(dm: &DataMatrix, code: &Code) -> Result<Vec<NodeShare>> {
    (1..=code.n()).map(|l| encode_node(dm, l, code)).collect()
}

/// Convenience: message straight to all `n` shares.
pub fn encode_message(msg: &SourceMessage, code: &Code) -> Result<Vec<NodeShare>> {
    let dm = build_data_matrix(msg, code.params())?;
    encode_all(&dm, code)
}

/// On-disk share: a one-line header followed by `alpha` decimal symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShareFile {
    pub p: u64,
    pub params: CodeParams,
    pub scheme: Scheme,
    pub node: usize,
    pub x: Vec<Elem>,
}

impl ShareFile {
    pub fn new(code: &Code, scheme: Scheme, share: &NodeShare) -> Self {
        ShareFile {
            p: code.field().modulus(),
            params: code.params().clone(),
            scheme,
            node: share.node,
            x: share.x.clone(),
        }
    }

    pub fn into_share(self, code: &Code) -> Result<NodeShare> {
        code.check_node(self.node)?;
        if self.x.len() != code.alpha() {
            return Err(Error::DimensionMismatch("share length".into()));
        }
        Ok(NodeShare {
            node: self.node,
            point: code.point(self.node),
            x: self.x,
        })
    }
}

impl fmt::Display for ShareFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        let ds: Vec<String> = p.d_set.iter().map(ToString::to_string).collect();
        writeln!(
            f,
            "BAER1 p={} n={} k={} b={} alpha={} D={} node={} scheme={}",
            self.p,
            p.n,
            p.k,
            p.b,
            p.alpha,
            ds.join(","),
            self.node,
            self.scheme
        )?;
        for s in &self.x {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}

/// Splits a `key=value` header token list, checking the expected key order.
pub(crate) fn header_fields<'a>(line: &'a str, magic: &str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let mut tokens = line.split(' ');
    if tokens.next() != Some(magic) {
        return Err(Error::Parse(format!("expected {magic} header")));
    }
    let mut out = Vec::with_capacity(keys.len());
    for key in keys {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::Parse(format!("header missing {key}")))?;
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad header token {tok:?}")))?;
        if k != *key {
            return Err(Error::Parse(format!("expected key {key}, found {k}")));
        }
        out.push(v);
    }
    if tokens.next().is_some() {
        return Err(Error::Parse("trailing header tokens".into()));
    }
    Ok(out)
}

pub(crate) fn parse_num<T: FromStr>(v: &str, what: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Parse(format!("bad value {v:?} for {what}")))
}

pub(crate) fn parse_list(v: &str, what: &str) -> Result<Vec<usize>> {
    v.split(',').map(|t| parse_num(t, what)).collect()
}

/// Parses the symbol lines that follow a header, requiring LF endings.
pub(crate) fn parse_body(field: &Field, body: &str, expected: usize) -> Result<Vec<Elem>> {
    if body.contains('\r') {
        return Err(Error::Parse("CR line endings are not allowed".into()));
    }
    let mut lines: Vec<&str> = body.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    if lines.len() != expected {
        return Err(Error::Parse(format!(
            "expected {expected} symbols, found {}",
            lines.len()
        )));
    }
    lines.into_iter().map(|l| parse_symbol(field, l)).collect()
}

impl FromStr for ShareFile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (header, body) = s.split_once('\n').unwrap_or((s, ""));
        let v = header_fields(
            header,
            "BAER1",
            &["p", "n", "k", "b", "alpha", "D", "node", "scheme"],
        )?;
        let p: u64 = parse_num(v[0], "p")?;
        let field = Field::new(p)?;
        let params = CodeParams {
            n: parse_num(v[1], "n")?,
            k: parse_num(v[2], "k")?,
            b: parse_num(v[3], "b")?,
            alpha: parse_num(v[4], "alpha")?,
            d_set: parse_list(v[5], "D")?,
        };
        let node = parse_num(v[6], "node")?;
        let scheme = v[7].parse()?;
        let x = parse_body(&field, body, params.alpha)?;
        Ok(ShareFile {
            p,
            params,
            scheme,
            node,
            x,
        })
    }
}
