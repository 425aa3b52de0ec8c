//! Deterministic storage-cluster simulation with bandwidth metering.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::adversary::{AdversaryPolicy, Strategy};
use crate::code::{Code, Scheme};
use crate::concat::{decode_concat, plan_concat, ConcatBundle};
use crate::encoder::{encode_message, parse_list, parse_num, NodeShare, SourceMessage};
use crate::error::{Error, Result};
use crate::galois::Elem;
use crate::reconstruct::testgroup_reconstruct;
use crate::repair1::{omega_build, testgroup_repair, OmegaConfig, RepairBundleI};
use crate::repair2::{testgroup_repair2, RepairBundleII, RepairPlanII};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HelperPolicy {
    Lowest,
    Random(u64),
    Exclude(Vec<usize>),
}

impl fmt::Display for HelperPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HelperPolicy::Lowest => f.write_str("lowest"),
            HelperPolicy::Random(s) => write!(f, "random:{s}"),
            HelperPolicy::Exclude(l) => write!(f, "exclude:{}", join(l)),
        }
    }
}

impl FromStr for HelperPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "lowest" {
            Ok(HelperPolicy::Lowest)
        } else if let Some(v) = s.strip_prefix("random:") {
            Ok(HelperPolicy::Random(parse_num(v, "helper seed")?))
        } else if let Some(v) = s.strip_prefix("exclude:") {
            Ok(HelperPolicy::Exclude(parse_list(v, "excluded helpers")?))
        } else {
            Err(Error::Parse(format!("unknown helper policy {s:?}")))
        }
    }
}

fn join(l: &[usize]) -> String {
    l.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Fail(usize),
    Repair {
        node: usize,
        d: usize,
        helpers: HelperPolicy,
    },
    /// Hands `nodes` to the adversary; an honest strategy releases all control.
    Corrupt {
        strategy: Strategy,
        nodes: Vec<usize>,
    },
    Reconstruct(Vec<usize>),
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Fail(_) => "fail",
            Event::Repair { .. } => "repair",
            Event::Corrupt { .. } => "corrupt",
            Event::Reconstruct(_) => "reconstruct",
        }
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Event::Fail(n) => write!(f, "fail {n}"),
            Event::Repair { node, d, helpers } => {
                write!(f, "repair {node} d={d} helpers={helpers}")
            }
            Event::Corrupt { strategy, nodes } => {
                let seed = match strategy {
                    Strategy::Honest => 0,
                    Strategy::Random { seed } | Strategy::ConsistentLiar { seed } => *seed,
                };
                write!(
                    f,
                    "corrupt {} nodes={} seed={seed}",
                    strategy.name(),
                    join(nodes)
                )
            }
            Event::Reconstruct(l) => write!(f, "reconstruct {}", join(l)),
        }
    }
}

fn kv<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key)?.strip_prefix('='))
        .ok_or_else(|| Error::Parse(format!("expected {key}=...")))
}

impl FromStr for Event {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        parse_event(line)
    }
}

fn parse_event<'a>(line: &'a str) -> Result<Event> {
    let mut t = line.split_whitespace();
    let kind = t.next().ok_or_else(|| Error::Parse("empty event".into()))?;
    let arg = t.next();
    let need = |a: Option<&'a str>| -> Result<&'a str> {
        a.ok_or_else(|| Error::Parse(format!("{kind} needs an argument")))
    };
    let ev = match kind {
        "fail" => Event::Fail(parse_num(need(arg)?, "node")?),
        "repair" => {
            let node = parse_num(need(arg)?, "node")?;
            let d = parse_num(kv(t.next(), "d")?, "d")?;
            let helpers = match t.next() {
                None => HelperPolicy::Lowest,
                tok => kv(tok, "helpers")?.parse()?,
            };
            Event::Repair { node, d, helpers }
        }
        "corrupt" => {
            let name = need(arg)?;
            let nodes = parse_list(kv(t.next(), "nodes")?, "nodes")?;
            let seed = match t.next() {
                None => 0,
                tok => parse_num(kv(tok, "seed")?, "seed")?,
            };
            Event::Corrupt {
                strategy: Strategy::from_name(name, seed)?,
                nodes,
            }
        }
        "reconstruct" => Event::Reconstruct(parse_list(need(arg)?, "nodes")?),
        other => return Err(Error::Parse(format!("unknown event {other:?}"))),
    };
    if t.next().is_some() {
        return Err(Error::Parse(format!("trailing tokens in {line:?}")));
    }
    Ok(ev)
}

/// Parses a scenario: one event per line, `#` comments and blank lines ignored.
pub fn parse_scenario(text: &str) -> Result<Vec<Event>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(str::parse)
        .collect()
}

pub fn scenario_to_text(events: &[Event]) -> String {
    events.iter().map(|e| format!("{e}\n")).collect()
}

/// One report line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventRow {
    pub index: usize,
    pub event: Event,
    pub symbols: usize,
    pub expected: usize,
    pub ok: bool,
    pub genuine: bool,
    pub wall_us: u128,
    pub note: String,
}

impl EventRow {
    pub fn bandwidth_matches(&self) -> bool {
        self.symbols == self.expected
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub header: String,
    pub rows: Vec<EventRow>,
    /// Largest number of simultaneously faulty nodes seen.
    pub max_faulty: usize,
}

impl Report {
    pub fn all_bandwidth_match(&self) -> bool {
        self.rows.iter().all(EventRow::bandwidth_matches)
    }

    pub fn all_ok(&self) -> bool {
        self.rows.iter().all(|r| r.ok && r.genuine)
    }

    /// Outcome of the last reconstruction, if any.
    pub fn final_reconstruction_genuine(&self) -> Option<bool> {
        self.rows
            .iter()
            .rev()
            .find(|r| matches!(r.event, Event::Reconstruct(_)))
            .map(|r| r.ok && r.genuine)
    }

    pub fn total_symbols(&self) -> usize {
        self.rows.iter().map(|r| r.symbols).sum()
    }
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.header)?;
        writeln!(
            f,
            "index\tevent\tsymbols\texpected\tmatch\tok\tgenuine\twall_us\tnote"
        )?;
        for r in &self.rows {
            writeln!(
                f,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.index,
                r.event,
                r.symbols,
                r.expected,
                yn(r.bandwidth_matches()),
                yn(r.ok),
                yn(r.genuine),
                r.wall_us,
                if r.note.is_empty() { "-" } else { &r.note }
            )?;
        }
        let count = |k: &str| self.rows.iter().filter(|r| r.event.kind() == k).count();
        writeln!(
            f,
            "totals events={} repairs={} reconstructs={} symbols={} expected={} bandwidth_match={} all_ok={} max_faulty={} final_reconstruction={}",
            self.rows.len(),
            count("repair"),
            count("reconstruct"),
            self.total_symbols(),
            self.rows.iter().map(|r| r.expected).sum::<usize>(),
            yn(self.all_bandwidth_match()),
            yn(self.all_ok()),
            self.max_faulty,
            match self.final_reconstruction_genuine() {
                None => "none",
                Some(true) => "genuine",
                Some(false) => "wrong",
            }
        )
    }
}

/// Repairs `failed` from `helpers` (so `d = helpers.len()`) under the given
/// scheme, with emissions passed through `adversary`. Returns the share and
/// the number of symbols moved. `omega` is derived when absent.
pub fn repair_share(
    code: &Code,
    scheme: Scheme,
    omega: Option<&OmegaConfig>,
    adversary: &AdversaryPolicy,
    failed: usize,
    helpers: &[&NodeShare],
    nonce: u64,
) -> Result<(Vec<Elem>, usize)> {
    let d = helpers.len();
    let ids: Vec<usize> = helpers.iter().map(|s| s.node).collect();
    code.check_helpers(failed, d, &ids)?;
    match scheme {
        Scheme::One => {
            let built;
            let cfg = match omega {
                Some(c) => c,
                None => {
                    built = omega_build(code)?;
                    &built
                }
            };
            let symbols = helpers
                .iter()
                .map(|s| {
                    Ok((
                        s.node,
                        adversary.repair1_symbols(code, cfg, s, failed, d, nonce)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let bundle = RepairBundleI { failed, d, symbols };
            let moved = bundle.total_symbols();
            Ok((testgroup_repair(code, cfg, &bundle)?, moved))
        }
        Scheme::Two => {
            let plan = RepairPlanII::new(code.params(), d)?;
            let streams = helpers
                .iter()
                .map(|s| {
                    Ok((
                        s.node,
                        adversary.repair2_stream(code, &plan, s, failed, nonce)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let bundle = RepairBundleII { failed, d, streams };
            let moved = bundle.total_symbols();
            Ok((testgroup_repair2(code, &plan, &bundle)?, moved))
        }
        Scheme::Concat => {
            let assignment = plan_concat(code, failed, &ids)?;
            let symbols = helpers
                .iter()
                .map(|s| {
                    Ok((
                        s.node,
                        adversary.concat_symbols(code, &assignment, s, failed, nonce)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            let bundle = ConcatBundle {
                failed,
                assignment,
                symbols,
            };
            let moved = bundle.total_symbols();
            Ok((decode_concat(code, &bundle)?, moved))
        }
    }
}

/// Live cluster: stored shares (possibly corrupted), ground truth, and the
/// adversary currently in force.
#[derive(Debug, Clone)]
pub struct Cluster {
    code: Code,
    scheme: Scheme,
    omega: Option<OmegaConfig>,
    message: SourceMessage,
    truth: Vec<NodeShare>,
    stored: Vec<Option<NodeShare>>,
    adversary: AdversaryPolicy,
    nonce: u64,
    rows: Vec<EventRow>,
    max_faulty: usize,
}

impl Cluster {
    pub fn new(code: Code, scheme: Scheme, message: SourceMessage) -> Result<Self> {
        let omega = match scheme {
            Scheme::One => Some(omega_build(&code)?),
            Scheme::Two => {
                for &d in &code.params().d_set {
                    RepairPlanII::new(code.params(), d)?;
                }
                None
            }
            Scheme::Concat => {
                if code.params().b != 0 {
                    return Err(Error::UnsupportedScheme("concat requires b = 0".into()));
                }
                None
            }
        };
        let truth = encode_message(&message, &code)?;
        Ok(Cluster {
            stored: truth.iter().cloned().map(Some).collect(),
            truth,
            code,
            scheme,
            omega,
            message,
            adversary: AdversaryPolicy::honest(),
            nonce: 0,
            rows: Vec::new(),
            max_faulty: 0,
        })
    }

    pub fn code(&self) -> &Code {
        &self.code
    }

    pub fn message(&self) -> &SourceMessage {
        &self.message
    }

    pub fn stored(&self, node: usize) -> Option<&NodeShare> {
        self.stored.get(node.wrapping_sub(1))?.as_ref()
    }

    pub fn truth(&self, node: usize) -> &NodeShare {
        &self.truth[node - 1]
    }

    pub fn live_nodes(&self) -> Vec<usize> {
        (1..=self.code.n())
            .filter(|&n| self.stored[n - 1].is_some())
            .collect()
    }

    pub fn adversary(&self) -> &AdversaryPolicy {
        &self.adversary
    }

    /// Nodes that are controlled or store something other than the truth.
    pub fn faulty_nodes(&self) -> BTreeSet<usize> {
        let mut out: BTreeSet<usize> = self
            .adversary
            .controlled
            .iter()
            .copied()
            .filter(|&n| self.adversary.controls(n) && self.stored[n - 1].is_some())
            .collect();
        for n in self.live_nodes() {
            if self.stored[n - 1].as_ref() != Some(&self.truth[n - 1]) {
                out.insert(n);
            }
        }
        out
    }

    fn select_helpers(&self, failed: usize, d: usize, policy: &HelperPolicy) -> Result<Vec<usize>> {
        let mut cand: Vec<usize> = self
            .live_nodes()
            .into_iter()
            .filter(|&n| n != failed)
            .collect();
        if let HelperPolicy::Exclude(ex) = policy {
            cand.retain(|n| !ex.contains(n));
        }
        if cand.len() < d {
            return Err(Error::NotEnoughHelpers {
                need: d,
                have: cand.len(),
            });
        }
        if let HelperPolicy::Random(seed) = policy {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            cand.shuffle(&mut rng);
        }
        let mut chosen = cand[..d].to_vec();
        chosen.sort_unstable();
        Ok(chosen)
    }

    fn repair(&self, failed: usize, helpers: &[usize]) -> Result<(Vec<Elem>, usize)> {
        let shares: Vec<&NodeShare> = helpers
            .iter()
            .map(|&h| self.stored[h - 1].as_ref().expect("helpers are live"))
            .collect();
        repair_share(
            &self.code,
            self.scheme,
            self.omega.as_ref(),
            &self.adversary,
            failed,
            &shares,
            self.nonce,
        )
    }

    /// Applies one event. Protocol misuse (repairing a live node, failing a
    /// failed one) is an error; decoding failures are recorded in the row.
    pub fn run_event(&mut self, event: &Event) -> Result<EventRow> {
        let start = Instant::now();
        self.nonce += 1;
        let mut row = EventRow {
            index: self.rows.len() + 1,
            event: event.clone(),
            symbols: 0,
            expected: 0,
            ok: true,
            genuine: true,
            wall_us: 0,
            note: String::new(),
        };
        match event {
            Event::Fail(node) => {
                self.code.check_node(*node)?;
                if self.stored[node - 1].take().is_none() {
                    return Err(Error::NodeAlreadyFailed(*node));
                }
            }
            Event::Repair { node, d, helpers } => {
                self.code.check_node(*node)?;
                if self.stored[node - 1].is_some() {
                    return Err(Error::RepairOfLiveNode(*node));
                }
                row.expected = self.code.params().gamma_mbr(*d)?;
                let chosen = self.select_helpers(*node, *d, helpers)?;
                row.note = format!("helpers={}", join(&chosen));
                match self.repair(*node, &chosen) {
                    Ok((x, moved)) => {
                        row.symbols = moved;
                        row.genuine = x == self.truth[node - 1].x;
                        self.stored[node - 1] = Some(NodeShare {
                            node: *node,
                            point: self.code.point(*node),
                            x,
                        });
                        // a freshly repaired node is a new, honest machine
                        self.adversary.controlled.remove(node);
                    }
                    Err(e) => {
                        row.ok = false;
                        row.genuine = false;
                        row.symbols = row.expected;
                        row.note = format!("{} error={e}", row.note);
                    }
                }
            }
            Event::Corrupt { strategy, nodes } => {
                for &n in nodes {
                    self.code.check_node(n)?;
                }
                self.adversary = AdversaryPolicy::new(nodes.iter().copied(), *strategy);
                let live: Vec<NodeShare> = self.stored.iter().flatten().cloned().collect();
                for s in self.adversary.corrupt_storage(&self.code, &live)? {
                    let n = s.node;
                    self.stored[n - 1] = Some(s);
                }
            }
            Event::Reconstruct(nodes) => {
                let k = self.code.params().k;
                row.expected = k * self.code.alpha();
                let mut access = Vec::with_capacity(nodes.len());
                for &n in nodes {
                    self.code.check_node(n)?;
                    let s = self.stored[n - 1]
                        .as_ref()
                        .ok_or(Error::NodeAlreadyFailed(n))?;
                    access.push(self.adversary.corrupt_access(&self.code, s)?);
                }
                row.symbols = access.iter().map(|s| s.x.len()).sum();
                match testgroup_reconstruct(&self.code, &access) {
                    Ok(m) => row.genuine = m == self.message,
                    Err(e) => {
                        row.ok = false;
                        row.genuine = false;
                        row.note = format!("error={e}");
                    }
                }
            }
        }
        self.max_faulty = self.max_faulty.max(self.faulty_nodes().len());
        row.wall_us = start.elapsed().as_micros();
        self.rows.push(row.clone());
        Ok(row)
    }

    pub fn report(&self) -> Report {
        let p = self.code.params();
        Report {
            header: format!(
                "BAERSIM p={} n={} k={} b={} alpha={} D={} scheme={} f_mbr={} gamma={}",
                self.code.field().modulus(),
                p.n,
                p.k,
                p.b,
                p.alpha,
                join(&p.d_set),
                self.scheme,
                self.code.derived().f_mbr,
                p.d_set
                    .iter()
                    .map(|&d| format!("{d}:{}", p.gamma_mbr(d).unwrap_or(0)))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            rows: self.rows.clone(),
            max_faulty: self.max_faulty,
        }
    }
}

/// Runs all events in order and returns the report.
pub fn run_scenario(cluster: &mut Cluster, events: &[Event]) -> Result<Report> {
    for e in events {
        cluster.run_event(e)?;
    }
    Ok(cluster.report())
}

/// A valid random scenario of exactly `len` events ending in a
/// reconstruction. At most `b` nodes are adversarial at any time, always
/// with the given strategy kind (`random` or `liar`).
pub fn generate_scenario(code: &Code, len: usize, seed: u64, strategy: &str) -> Result<Vec<Event>> {
    let p = code.params();
    if len == 0 {
        return Ok(Vec::new());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let all: Vec<usize> = (1..=p.n).collect();
    let mut events = Vec::with_capacity(len);
    let mut failed: Option<usize> = None;
    let mut controlled: Vec<usize> = Vec::new();

    while events.len() + 1 < len {
        let remaining = len - 1 - events.len();
        let ev = if let Some(f) = failed {
            failed = None;
            controlled.retain(|&c| c != f);
            let d = *p.d_set.choose(&mut rng).expect("D is nonempty");
            let helpers = match rng.gen_range(0..3) {
                0 => HelperPolicy::Lowest,
                1 => HelperPolicy::Random(rng.gen_range(0..1_000_000)),
                _ => {
                    // exclude one node while leaving enough helpers
                    let spare = p.n - 1 - d;
                    if spare == 0 {
                        HelperPolicy::Lowest
                    } else {
                        let x = *all
                            .iter()
                            .filter(|&&x| x != f)
                            .collect::<Vec<_>>()
                            .choose(&mut rng)
                            .expect("n > 1");
                        HelperPolicy::Exclude(vec![*x])
                    }
                }
            };
            Event::Repair {
                node: f,
                d,
                helpers,
            }
        } else if controlled.is_empty() && p.b > 0 && remaining >= 2 && rng.gen_bool(0.3) {
            let mut nodes = all.clone();
            nodes.shuffle(&mut rng);
            nodes.truncate(p.b);
            nodes.sort_unstable();
            controlled = nodes.clone();
            Event::Corrupt {
                strategy: Strategy::from_name(strategy, rng.gen_range(0..1_000_000))?,
                nodes,
            }
        } else if remaining >= 2 && rng.gen_bool(0.75) {
            let f = *all.choose(&mut rng).expect("n > 0");
            failed = Some(f);
            Event::Fail(f)
        } else {
            Event::Reconstruct(random_access(&all, p.k, &mut rng))
        };
        events.push(ev);
    }
    match failed {
        // the final slot must reconstruct; replace a dangling failure
        Some(_) => {
            events.pop();
            let live: Vec<usize> = all.clone();
            events.push(Event::Reconstruct(random_access(&live, p.k, &mut rng)));
            events.push(Event::Reconstruct(random_access(&live, p.k, &mut rng)));
        }
        None => events.push(Event::Reconstruct(random_access(&all, p.k, &mut rng))),
    }
    Ok(events)
}

fn random_access(nodes: &[usize], k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v: Vec<usize> = nodes.choose_multiple(rng, k).copied().collect();
    v.sort_unstable();
    v
}
