//! Parameter validation and the closed-form quantities of an MBR BAER code:
//! derived dimensions, the minimum repair bandwidth `γ(d) = αd/(d-2b)`, the
//! storage capacity, the capacity upper bounds, and the iteration schedules of
//! the small-field repair scheme.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;

use crate::error::{Error, Result};

/// Exact rational amount of symbols (bounds are not always integral).
pub type Symbols = Ratio<u64>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    /// Admissible helper counts, ascending.
    pub d_set: Vec<usize>,
    pub b: usize,
    pub alpha: usize,
}

/// Per-`d` repair quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepairDims {
    pub d: usize,
    /// Symbols each helper sends.
    pub beta: usize,
    /// Total symbols moved: `d * beta`.
    pub gamma: usize,
    /// Width of the `Ω` truncation used by the large-field scheme.
    pub z_d: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derived {
    pub d_min: usize,
    /// `d_min - 2b`, the component code's helper count.
    pub lambda: usize,
    /// `k - 2b`, the component code's reconstruction degree.
    pub kappa: usize,
    /// Number of component codes, `alpha / lambda`.
    pub z: usize,
    pub per_d: Vec<RepairDims>,
    pub f_mbr: usize,
}

impl Derived {
    pub fn dims(&self, d: usize) -> Result<RepairDims> {
        self.per_d
            .iter()
            .copied()
            .find(|r| r.d == d)
            .ok_or(Error::DNotInD(d))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

impl CodeParams {
    pub fn new(n: usize, k: usize, d_set: &[usize], b: usize, alpha: usize) -> Self {
        CodeParams {
            n,
            k,
            d_set: d_set.to_vec(),
            b,
            alpha,
        }
    }

    pub fn d_min(&self) -> usize {
        self.d_set.first().copied().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<Derived> {
        let Some(&d_min) = self.d_set.first() else {
            return Err(Error::OrderingViolation("D is empty".into()));
        };
        if 2 * self.b >= self.k {
            return Err(Error::OrderingViolation(format!(
                "2b = {} is not below k = {}",
                2 * self.b,
                self.k
            )));
        }
        if self.k > d_min {
            return Err(Error::OrderingViolation(format!(
                "k = {} exceeds d_1 = {}",
                self.k, d_min
            )));
        }
        if self.d_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::OrderingViolation(format!(
                "D = {:?} is not strictly increasing",
                self.d_set
            )));
        }
        let d_max = *self.d_set.last().expect("nonempty");
        if d_max + 1 > self.n {
            return Err(Error::DTooLarge {
                d: d_max,
                max: self.n.saturating_sub(1),
            });
        }
        let l = self
            .d_set
            .iter()
            .fold(1, |acc, &d| lcm(acc, d - 2 * self.b));
        if self.alpha == 0 || !self.alpha.is_multiple_of(l) {
            return Err(Error::AlphaNotMultiple {
                alpha: self.alpha,
                lcm: l,
            });
        }

        let lambda = d_min - 2 * self.b;
        let kappa = self.k - 2 * self.b;
        let z = self.alpha / lambda;
        let per_d = self
            .d_set
            .iter()
            .map(|&d| {
                let beta = self.alpha / (d - 2 * self.b);
                RepairDims {
                    d,
                    beta,
                    gamma: d * beta,
                    z_d: beta,
                }
            })
            .collect();

        // sum form: Σ_{j<κ} (λ - j)·α/λ
        let f_mbr: usize = (0..kappa).map(|j| (lambda - j) * z).sum();
        // product form, doubled to stay integral: α·κ·(2d_min - 2b - (k-1)) / λ
        let doubled = self.alpha * kappa * (2 * d_min - 2 * self.b - (self.k - 1));
        assert_eq!(doubled % lambda, 0);
        assert_eq!(doubled / lambda, 2 * f_mbr, "capacity forms disagree");
        assert!(f_mbr > 0);

        Ok(Derived {
            d_min,
            lambda,
            kappa,
            z,
            per_d,
            f_mbr,
        })
    }

    /// Minimum total repair bandwidth `αd / (d - 2b)` for `d ∈ D`.
    pub fn gamma_mbr(&self, d: usize) -> Result<usize> {
        if !self.d_set.contains(&d) {
            return Err(Error::DNotInD(d));
        }
        Ok(self.alpha * d / (d - 2 * self.b))
    }

    /// `γ_MBR` for every `d ∈ D`, ready to feed into [`capacity_upper_bound`].
    pub fn gamma_mbr_map(&self) -> BTreeMap<usize, u64> {
        self.d_set
            .iter()
            .map(|&d| (d, (self.alpha * d / (d - 2 * self.b)) as u64))
            .collect()
    }

    pub fn f_mbr(&self) -> Result<usize> {
        Ok(self.validate()?.f_mbr)
    }
}

/// `Σ_{j=0}^{k-2b-1} min(α, min_{d∈D} (d-2b-j)·γ(d)/d)`.
pub fn capacity_upper_bound(p: &CodeParams, gamma: &BTreeMap<usize, u64>) -> Result<Symbols> {
    p.validate()?;
    let alpha = Symbols::from_integer(p.alpha as u64);
    let mut total = Symbols::from_integer(0);
    for j in 0..(p.k - 2 * p.b) {
        let mut term = alpha;
        for &d in &p.d_set {
            let g = *gamma.get(&d).ok_or(Error::GammaMissingD(d))?;
            let t = Symbols::new((d - 2 * p.b - j) as u64 * g, d as u64);
            if t < term {
                term = t;
            }
        }
        total += term;
    }
    Ok(total)
}

/// Classical regenerating-code bound `Σ_{i=0}^{min(k,d)-1} min(α, (d-i)γ/d)`.
pub fn classical_bound(k: usize, d: usize, alpha: u64, gamma: u64) -> Result<Symbols> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidRange(format!("k = {k}, d = {d}")));
    }
    Ok(bound_sum(0, k.min(d), d, alpha, gamma))
}

/// Error-resilient bound `Σ_{i=2b}^{k-1} min(α, (d-i)γ/d)`.
pub fn err_resilient_bound(
    k: usize,
    d: usize,
    b: usize,
    alpha: u64,
    gamma: u64,
) -> Result<Symbols> {
    if 2 * b >= k || k > d {
        return Err(Error::InvalidRange(format!(
            "need 2b < k <= d, got k = {k}, d = {d}, b = {b}"
        )));
    }
    Ok(bound_sum(2 * b, k, d, alpha, gamma))
}

fn bound_sum(from: usize, to: usize, d: usize, alpha: u64, gamma: u64) -> Symbols {
    let alpha = Symbols::from_integer(alpha);
    (from..to)
        .map(|i| alpha.min(Symbols::new((d - i) as u64 * gamma, d as u64)))
        .sum()
}

/// One decoding iteration of the small-field repair scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Iteration {
    /// Active entries per active segment at the start of the iteration.
    pub tau: usize,
    pub mu: usize,
    pub sigma: usize,
    /// Length of the merged vector, `xi + sigma` (equals `xi` when nothing merges).
    pub m: usize,
    /// Segments per group: `mu + 1` when `sigma > 0`, else `mu`.
    pub group_size: usize,
    pub n_groups: usize,
    /// Active segments entering the iteration.
    pub active_segments: usize,
}

impl Iteration {
    pub fn merges(&self) -> bool {
        self.sigma > 0
    }
}

/// Iteration plan for one `d` of the small-field repair scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleII {
    pub d: usize,
    /// Segment length: the largest multiple of `lambda` not exceeding `d - 2b`.
    pub xi: usize,
    /// Number of segments, `alpha / xi`.
    pub zeta: usize,
    /// Component blocks per segment, `xi / lambda`.
    pub c: usize,
    pub iterations: Vec<Iteration>,
}

impl ScheduleII {
    /// Repair symbols each helper sends over the whole plan.
    pub fn symbols_per_helper(&self) -> usize {
        self.iterations.iter().map(|it| it.n_groups).sum()
    }

    pub fn is_single_iteration(&self) -> bool {
        self.iterations.len() == 1 && !self.iterations[0].merges()
    }
}

pub fn schedule_scheme2(p: &CodeParams, d: usize) -> Result<ScheduleII> {
    let derived = p.validate()?;
    if !p.d_set.contains(&d) {
        return Err(Error::DNotInD(d));
    }
    let width = d - 2 * p.b;
    let xi = (width / derived.lambda) * derived.lambda;
    debug_assert!(xi <= width && width < 2 * xi);
    if !p.alpha.is_multiple_of(xi) {
        return Err(Error::DivisibilityViolation {
            d,
            detail: format!("xi = {xi} does not divide alpha = {}", p.alpha),
        });
    }
    let zeta = p.alpha / xi;
    let mut iterations = Vec::new();
    let mut tau = xi;
    let mut active = zeta;
    loop {
        let mu = width / tau;
        let sigma = width % tau;
        let group_size = if sigma > 0 { mu + 1 } else { mu };
        if !active.is_multiple_of(group_size) {
            return Err(Error::DivisibilityViolation {
                d,
                detail: format!(
                    "iteration {}: {active} active segments not divisible into groups of {group_size}",
                    iterations.len() + 1
                ),
            });
        }
        let n_groups = active / group_size;
        iterations.push(Iteration {
            tau,
            mu,
            sigma,
            m: xi + sigma,
            group_size,
            n_groups,
            active_segments: active,
        });
        if sigma == 0 {
            break;
        }
        tau -= sigma;
        active = n_groups;
    }
    Ok(ScheduleII {
        d,
        xi,
        zeta,
        c: xi / derived.lambda,
        iterations,
    })
}

/// A parameter file: the code parameters plus an optional field modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamsFile {
    pub params: CodeParams,
    pub p: Option<u64>,
}

impl FromStr for ParamsFile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in s.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim();
            if kv
                .insert(key.to_string(), value.trim().to_string())
                .is_some()
            {
                return Err(Error::Parse(format!("duplicate key {key}")));
            }
        }
        let get = |key: &str| -> Result<usize> {
            kv.get(key)
                .ok_or_else(|| Error::Parse(format!("missing key {key}")))?
                .parse()
                .map_err(|_| Error::Parse(format!("bad value for {key}")))
        };
        let d_set = kv
            .get("D")
            .ok_or_else(|| Error::Parse("missing key D".into()))?
            .split(',')
            .map(|t| {
                t.trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad entry {t:?} in D")))
            })
            .collect::<Result<Vec<usize>>>()?;
        let p = kv
            .get("p")
            .map(|v| {
                v.parse()
                    .map_err(|_| Error::Parse("bad value for p".into()))
            })
            .transpose()?;
        if let Some(extra) = kv
            .keys()
            .find(|k| !["n", "k", "b", "alpha", "D", "p"].contains(&k.as_str()))
        {
            return Err(Error::Parse(format!("unknown key {extra}")));
        }
        Ok(ParamsFile {
            params: CodeParams {
                n: get("n")?,
                k: get("k")?,
                d_set,
                b: get("b")?,
                alpha: get("alpha")?,
            },
            p,
        })
    }
}

impl fmt::Display for ParamsFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.params;
        writeln!(f, "n={}", p.n)?;
        writeln!(f, "k={}", p.k)?;
        writeln!(f, "b={}", p.b)?;
        writeln!(f, "alpha={}", p.alpha)?;
        let ds: Vec<String> = p.d_set.iter().map(ToString::to_string).collect();
        writeln!(f, "D={}", ds.join(","))?;
        if let Some(q) = self.p {
            writeln!(f, "p={q}")?;
        }
        Ok(())
    }
}
