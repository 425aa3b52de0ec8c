//! Adversarial nodes: what a controlled node stores and emits.
//!
//! `Random` replaces data with seeded uniform symbols. `ConsistentLiar` makes
//! every controlled node behave honestly with respect to one common fake
//! message, so its outputs pass every local protocol check.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::code::Code;
use crate::concat::{helper_concat_symbols, Assignment};
use crate::encoder::{build_data_matrix, encode_node, NodeShare, SourceMessage};
use crate::error::{Error, Result};
use crate::galois::Elem;
use crate::repair1::{helper_repair_symbols, OmegaConfig};
use crate::repair2::{helper_all_symbols, RepairPlanII};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    Honest,
    Random { seed: u64 },
    ConsistentLiar { seed: u64 },
}

impl Strategy {
    /// Builds a strategy from its CLI name.
    pub fn from_name(name: &str, seed: u64) -> Result<Self> {
        match name {
            "honest" => Ok(Strategy::Honest),
            "random" => Ok(Strategy::Random { seed }),
            "liar" => Ok(Strategy::ConsistentLiar { seed }),
            other => Err(Error::Parse(format!("unknown adversary {other:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Honest => "honest",
            Strategy::Random { .. } => "random",
            Strategy::ConsistentLiar { .. } => "liar",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Honest => f.write_str("honest"),
            Strategy::Random { seed } => write!(f, "random({seed})"),
            Strategy::ConsistentLiar { seed } => write!(f, "liar({seed})"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    /// Accepts `honest`, `random(<seed>)`, `liar(<seed>)`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "honest" {
            return Ok(Strategy::Honest);
        }
        let (name, rest) = s
            .split_once('(')
            .ok_or_else(|| Error::Parse(format!("bad strategy {s:?}")))?;
        let seed = rest
            .strip_suffix(')')
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad strategy seed in {s:?}")))?;
        Strategy::from_name(name, seed)
    }
}

/// Controlled nodes and how they misbehave. The size of `controlled` is not
/// capped, so runs outside the `≤ b` model are possible on purpose.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryPolicy {
    pub controlled: BTreeSet<usize>,
    pub strategy: Strategy,
}

// distinct RNG streams for storage, access, and repair emissions
const TAG_STORAGE: u64 = 0;
const TAG_ACCESS: u64 = 1;
const TAG_REPAIR: u64 = 2;

impl AdversaryPolicy {
    pub fn honest() -> Self {
        AdversaryPolicy {
            controlled: BTreeSet::new(),
            strategy: Strategy::Honest,
        }
    }

    pub fn new(controlled: impl IntoIterator<Item = usize>, strategy: Strategy) -> Self {
        AdversaryPolicy {
            controlled: controlled.into_iter().collect(),
            strategy,
        }
    }

    pub fn controls(&self, node: usize) -> bool {
        self.strategy != Strategy::Honest && self.controlled.contains(&node)
    }

    fn rng(seed: u64, node: usize, tag: u64, nonce: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ nonce.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        rng.set_stream(((node as u64) << 8) | tag);
        rng
    }

    fn random_elems(
        code: &Code,
        seed: u64,
        node: usize,
        tag: u64,
        nonce: u64,
        len: usize,
    ) -> Vec<Elem> {
        let mut rng = Self::rng(seed, node, tag, nonce);
        let p = code.field().modulus();
        (0..len)
            .map(|_| code.field().elem(rng.gen_range(0..p)))
            .collect()
    }

    /// The message all liars pretend is stored.
    pub fn fake_message(code: &Code, seed: u64) -> SourceMessage {
        SourceMessage(Self::random_elems(
            code,
            seed,
            0,
            TAG_STORAGE,
            0,
            code.derived().f_mbr,
        ))
    }

    fn fake_share(code: &Code, seed: u64, node: usize) -> Result<NodeShare> {
        let dm = build_data_matrix(&Self::fake_message(code, seed), code.params())?;
        encode_node(&dm, node, code)
    }

    fn replace_share(&self, code: &Code, share: &NodeShare, tag: u64) -> Result<NodeShare> {
        if !self.controls(share.node) {
            return Ok(share.clone());
        }
        match self.strategy {
            Strategy::Honest => Ok(share.clone()),
            Strategy::Random { seed } => Ok(NodeShare {
                x: Self::random_elems(code, seed, share.node, tag, 0, share.x.len()),
                ..share.clone()
            }),
            Strategy::ConsistentLiar { seed } => Self::fake_share(code, seed, share.node),
        }
    }

    /// Rewrites the stored content of every controlled node.
    pub fn corrupt_storage(&self, code: &Code, shares: &[NodeShare]) -> Result<Vec<NodeShare>> {
        shares
            .iter()
            .map(|s| self.replace_share(code, s, TAG_STORAGE))
            .collect()
    }

    /// The share a controlled node hands to a data collector.
    pub fn corrupt_access(&self, code: &Code, share: &NodeShare) -> Result<NodeShare> {
        self.replace_share(code, share, TAG_ACCESS)
    }

    /// Generic emission rewrite: random symbols of the same shape, or the
    /// honest computation `from_share` applied to the liar's fake share.
    /// `nonce` separates independent emissions of one node.
    pub fn corrupt_emission<F>(
        &self,
        code: &Code,
        node: usize,
        nonce: u64,
        honest: Vec<Vec<Elem>>,
        from_share: F,
    ) -> Result<Vec<Vec<Elem>>>
    where
        F: FnOnce(&NodeShare) -> Result<Vec<Vec<Elem>>>,
    {
        if !self.controls(node) {
            return Ok(honest);
        }
        match self.strategy {
            Strategy::Honest => Ok(honest),
            Strategy::Random { seed } => {
                let total: usize = honest.iter().map(Vec::len).sum();
                let mut flat =
                    Self::random_elems(code, seed, node, TAG_REPAIR, nonce, total).into_iter();
                Ok(honest
                    .iter()
                    .map(|row| row.iter().map(|_| flat.next().expect("sized")).collect())
                    .collect())
            }
            Strategy::ConsistentLiar { seed } => from_share(&Self::fake_share(code, seed, node)?),
        }
    }

    /// Large-field repair symbols emitted by `helper`.
    pub fn repair1_symbols(
        &self,
        code: &Code,
        cfg: &OmegaConfig,
        helper: &NodeShare,
        failed: usize,
        d: usize,
        nonce: u64,
    ) -> Result<Vec<Elem>> {
        let honest = helper_repair_symbols(code, cfg, helper, failed, d)?;
        let out = self.corrupt_emission(code, helper.node, nonce, vec![honest], |s| {
            Ok(vec![helper_repair_symbols(code, cfg, s, failed, d)?])
        })?;
        Ok(out.into_iter().next().expect("one row"))
    }

    /// Small-field repair symbol stream emitted by `helper`.
    pub fn repair2_stream(
        &self,
        code: &Code,
        plan: &RepairPlanII,
        helper: &NodeShare,
        failed: usize,
        nonce: u64,
    ) -> Result<Vec<Vec<Elem>>> {
        let honest = helper_all_symbols(code, plan, helper, failed)?;
        self.corrupt_emission(code, helper.node, nonce, honest, |s| {
            helper_all_symbols(code, plan, s, failed)
        })
    }

    /// Concatenation-scheme symbols emitted by `helper`.
    pub fn concat_symbols(
        &self,
        code: &Code,
        asg: &Assignment,
        helper: &NodeShare,
        failed: usize,
        nonce: u64,
    ) -> Result<Vec<Elem>> {
        let honest = helper_concat_symbols(code, asg, helper, failed);
        let out = self.corrupt_emission(code, helper.node, nonce, vec![honest], |s| {
            Ok(vec![helper_concat_symbols(code, asg, s, failed)])
        })?;
        Ok(out.into_iter().next().expect("one row"))
    }
}
