//! Iterative small-field repair built on the merge operator.
//!
//! `x_f` is cut into `ζ` segments of length `ξ`. Every iteration groups the
//! active segments; a helper sends one symbol per group. When the iteration
//! merges (`σ > 0`) the last two segments of a group are overlapped with
//! [`merge`], so a single symbol covers `d - 2b` unknowns. Entries move from
//! active to known, or to inactive with a pending relation that is resolved
//! once everything else is known.
//!
//! Segment indices are 0-based throughout; entry `t` of segment `i` sits at
//! position `iξ + t` of the share.

use std::fmt;

use itertools::Itertools;

use crate::code::Code;
use crate::encoder::{header_fields, parse_num, parse_symbol, NodeShare};
use crate::error::{Error, Result};
use crate::galois::{solve_right, Elem, Field, Mat};
use crate::params::{schedule_scheme2, CodeParams, ScheduleII};
use crate::testgroup::{self, TestGroupVerdict};

/// `[v, 0…0] + e^{m-εξ}[0…0, u]` for `ξ = |v| = |u|`, `ξ ≤ m < 2ξ`.
pub fn merge(
    field: &Field,
    m: usize,
    eps: usize,
    e: Elem,
    v: &[Elem],
    u: &[Elem],
) -> Result<Vec<Elem>> {
    let xi = v.len();
    if u.len() != xi || xi == 0 || m < xi || m >= 2 * xi {
        return Err(Error::BadDimensions(format!(
            "merge needs |v| = |u| = xi <= m < 2 xi, got |v| = {}, |u| = {}, m = {m}",
            v.len(),
            u.len()
        )));
    }
    if eps < 2 {
        return Err(Error::BadDimensions(format!(
            "merge needs eps >= 2, got {eps}"
        )));
    }
    let scale = field
        .pow(e, m as i64 - (eps * xi) as i64)
        .map_err(|_| Error::BadDimensions("merge point is zero".into()))?;
    let mut out = vec![Elem::ZERO; m];
    out[..xi].copy_from_slice(v);
    for (t, &ut) in u.iter().enumerate() {
        let q = m - xi + t;
        out[q] = field.add(out[q], field.mul(scale, ut));
    }
    Ok(out)
}

/// Schedule plus the concrete segment groups of every iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairPlanII {
    pub schedule: ScheduleII,
    /// `groups[j][g]` lists the segments of group `g` in iteration `j`, ascending.
    pub groups: Vec<Vec<Vec<usize>>>,
}

impl RepairPlanII {
    pub fn new(params: &CodeParams, d: usize) -> Result<Self> {
        let schedule = schedule_scheme2(params, d)?;
        let mut active: Vec<usize> = (0..schedule.zeta).collect();
        let mut groups = Vec::with_capacity(schedule.iterations.len());
        for it in &schedule.iterations {
            let gs: Vec<Vec<usize>> = active
                .chunks(it.group_size)
                .map(<[usize]>::to_vec)
                .collect();
            debug_assert_eq!(gs.len(), it.n_groups);
            // the last segment of each merged group stays active
            active = gs
                .iter()
                .map(|g| *g.last().expect("nonempty group"))
                .collect();
            groups.push(gs);
        }
        Ok(RepairPlanII { schedule, groups })
    }

    pub fn d(&self) -> usize {
        self.schedule.d
    }

    pub fn iterations(&self) -> usize {
        self.groups.len()
    }

    pub fn symbols_per_helper(&self) -> usize {
        self.schedule.symbols_per_helper()
    }
}

/// One helper's symbols for iteration `j` (0-based): one per group.
pub fn helper_round_symbols(
    code: &Code,
    plan: &RepairPlanII,
    j: usize,
    helper: &NodeShare,
    failed: usize,
) -> Result<Vec<Elem>> {
    code.check_node(failed)?;
    let it = plan
        .schedule
        .iterations
        .get(j)
        .ok_or_else(|| Error::PlanMismatch(format!("iteration {} beyond plan", j + 1)))?;
    let f = code.field();
    let xi = plan.schedule.xi;
    let seg = |i: usize| &helper.x[i * xi..(i + 1) * xi];
    let plain = |i: usize| f.dot(seg(i), &code.psi_window(failed, i * xi, xi));
    plan.groups[j]
        .iter()
        .map(|group| {
            if !it.merges() {
                return Ok(group
                    .iter()
                    .fold(Elem::ZERO, |acc, &i| f.add(acc, plain(i))));
            }
            let (a, b) = (group[group.len() - 2], group[group.len() - 1]);
            let merged = merge(f, it.m, b - a + 1, helper.point, seg(a), seg(b))?;
            let rho = f.mul(
                code.point_pow(failed, (a * xi) as i64),
                f.dot(&merged, &code.psi_window(failed, 0, it.m)),
            );
            Ok(group[..group.len() - 2]
                .iter()
                .fold(rho, |acc, &i| f.add(acc, plain(i))))
        })
        .collect()
}

/// All of one helper's symbols, iteration by iteration.
pub fn helper_all_symbols(
    code: &Code,
    plan: &RepairPlanII,
    helper: &NodeShare,
    failed: usize,
) -> Result<Vec<Vec<Elem>>> {
    (0..plan.iterations())
        .map(|j| helper_round_symbols(code, plan, j, helper, failed))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryLabel {
    Active,
    Inactive,
    Known,
}

/// `x[target] = value - scale * x[partner]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Relation {
    target: usize,
    value: Elem,
    scale: Elem,
    partner: usize,
}

/// An unknown of one group's reduced system.
#[derive(Debug, Clone, Copy)]
enum Slot {
    /// Entry of an unmerged segment at this share position.
    Direct(usize),
    /// Merged slot `q`; `v`/`u` are the active constituents' positions.
    Merged {
        q: usize,
        v: Option<usize>,
        u: Option<usize>,
    },
}

/// Decoder state for one helper subset.
#[derive(Debug, Clone)]
pub struct RepairSessionII<'a> {
    code: &'a Code,
    plan: &'a RepairPlanII,
    failed: usize,
    labels: Vec<EntryLabel>,
    values: Vec<Elem>,
    relations: Vec<Relation>,
    iteration: usize,
}

impl<'a> RepairSessionII<'a> {
    pub fn new(code: &'a Code, plan: &'a RepairPlanII, failed: usize) -> Result<Self> {
        code.check_node(failed)?;
        Ok(RepairSessionII {
            code,
            plan,
            failed,
            labels: vec![EntryLabel::Active; code.alpha()],
            values: vec![Elem::ZERO; code.alpha()],
            relations: Vec::new(),
            iteration: 0,
        })
    }

    pub fn labels(&self) -> &[EntryLabel] {
        &self.labels
    }

    /// Value of a known entry.
    pub fn value(&self, pos: usize) -> Option<Elem> {
        (self.labels[pos] == EntryLabel::Known).then_some(self.values[pos])
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Checks the per-iteration invariants: every active segment holds the
    /// same number of active entries, at its lowest indices, and no inactive
    /// entries.
    pub fn invariants_hold(&self) -> bool {
        let xi = self.plan.schedule.xi;
        let mut count = None;
        for seg in self.labels.chunks(xi) {
            let active = seg.iter().filter(|&&l| l == EntryLabel::Active).count();
            if active == 0 {
                continue;
            }
            if seg.contains(&EntryLabel::Inactive)
                || seg[..active].iter().any(|&l| l != EntryLabel::Active)
                || *count.get_or_insert(active) != active
            {
                return false;
            }
        }
        true
    }

    /// Solves iteration `self.iteration()` from the symbols of `d - 2b` helpers
    /// (`symbols[t]` holds one value per group for `helpers[t]`).
    pub fn decoder_round(&mut self, helpers: &[usize], symbols: &[Vec<Elem>]) -> Result<()> {
        let j = self.iteration;
        let it = *self
            .plan
            .schedule
            .iterations
            .get(j)
            .ok_or_else(|| Error::PlanMismatch("no iterations left".into()))?;
        let width = self.plan.d() - 2 * self.code.params().b;
        let n_groups = self.plan.groups[j].len();
        if helpers.len() != width
            || symbols.len() != width
            || symbols.iter().any(|s| s.len() != n_groups)
        {
            return Err(Error::PlanMismatch(format!(
                "iteration {} expects {width} helpers with {n_groups} symbols each",
                j + 1
            )));
        }
        let f = self.code.field();
        let xi = self.plan.schedule.xi;
        for (g, group) in self.plan.groups[j].iter().enumerate() {
            let (plain, merged): (&[usize], Option<(usize, usize)>) = if it.merges() {
                let k = group.len() - 2;
                (&group[..k], Some((group[k], group[k + 1])))
            } else {
                (&group[..], None)
            };
            let base = merged.map_or(0, |(a, _)| a * xi);
            let scale = merged.map(|(a, b)| {
                let eps = b - a + 1;
                self.code
                    .point_pow(self.failed, it.m as i64 - (eps * xi) as i64)
            });

            // unknown slots and the known part of each equation
            let mut slots = Vec::with_capacity(width);
            let mut known_terms: Vec<(Elem, i64)> = Vec::new();
            for &i in plain {
                for t in 0..xi {
                    let p = i * xi + t;
                    match self.labels[p] {
                        EntryLabel::Active => slots.push(Slot::Direct(p)),
                        EntryLabel::Known => known_terms.push((self.values[p], p as i64)),
                        EntryLabel::Inactive => {
                            return Err(Error::PlanMismatch(format!("inactive entry {p} in group")))
                        }
                    }
                }
            }
            if let (Some((a, b)), Some(s)) = (merged, scale) {
                for q in 0..it.m {
                    let exp = (base + q) as i64;
                    let v = (q < xi).then_some(a * xi + q);
                    let u = (q >= it.m - xi).then(|| b * xi + q - (it.m - xi));
                    let mut active_v = None;
                    let mut active_u = None;
                    if let Some(pv) = v {
                        match self.labels[pv] {
                            EntryLabel::Active => active_v = Some(pv),
                            EntryLabel::Known => known_terms.push((self.values[pv], exp)),
                            EntryLabel::Inactive => {
                                return Err(Error::PlanMismatch(format!(
                                    "inactive entry {pv} merged"
                                )))
                            }
                        }
                    }
                    if let Some(pu) = u {
                        match self.labels[pu] {
                            EntryLabel::Active => active_u = Some(pu),
                            EntryLabel::Known => known_terms.push((f.mul(s, self.values[pu]), exp)),
                            EntryLabel::Inactive => {
                                return Err(Error::PlanMismatch(format!(
                                    "inactive entry {pu} merged"
                                )))
                            }
                        }
                    }
                    if active_v.is_some() || active_u.is_some() {
                        slots.push(Slot::Merged {
                            q,
                            v: active_v,
                            u: active_u,
                        });
                    }
                }
            }
            if slots.len() != width {
                return Err(Error::PlanMismatch(format!(
                    "iteration {} group {} has {} unknowns, expected {width}",
                    j + 1,
                    g + 1,
                    slots.len()
                )));
            }

            // reduced system: rows are slots, columns are helpers
            let mut a = Mat::zeros(width, width);
            let mut y = Vec::with_capacity(width);
            for (c, &h) in helpers.iter().enumerate() {
                for (r, slot) in slots.iter().enumerate() {
                    let exp = match *slot {
                        Slot::Direct(p) => p,
                        Slot::Merged { q, .. } => base + q,
                    };
                    a[(r, c)] = self.code.point_pow(h, exp as i64);
                }
                let known = known_terms.iter().fold(Elem::ZERO, |acc, &(val, exp)| {
                    f.add(acc, f.mul(val, self.code.point_pow(h, exp)))
                });
                y.push(f.sub(symbols[c][g], known));
            }
            let sol = solve_right(f, &y, &a).map_err(|e| match e {
                Error::Singular => Error::SingularReducedSystem,
                other => other,
            })?;

            for (slot, val) in slots.into_iter().zip(sol) {
                match slot {
                    Slot::Direct(p) => self.set_known(p, val),
                    Slot::Merged {
                        v: Some(pv),
                        u: None,
                        ..
                    } => self.set_known(pv, val),
                    Slot::Merged {
                        v: None,
                        u: Some(pu),
                        ..
                    } => {
                        let s = scale.expect("merged slot has a scale");
                        self.set_known(pu, f.div(val, s)?);
                    }
                    Slot::Merged {
                        v: Some(pv),
                        u: Some(pu),
                        ..
                    } => {
                        self.labels[pv] = EntryLabel::Inactive;
                        self.relations.push(Relation {
                            target: pv,
                            value: val,
                            scale: scale.expect("merged slot has a scale"),
                            partner: pu,
                        });
                    }
                    Slot::Merged {
                        v: None, u: None, ..
                    } => unreachable!("slot without unknowns"),
                }
            }
        }
        self.iteration += 1;
        Ok(())
    }

    fn set_known(&mut self, p: usize, v: Elem) {
        self.labels[p] = EntryLabel::Known;
        self.values[p] = v;
    }

    /// Resolves inactive entries, newest relation first.
    pub fn finalize(mut self) -> Result<Vec<Elem>> {
        let f = *self.code.field();
        for rel in std::mem::take(&mut self.relations).into_iter().rev() {
            if self.labels[rel.partner] != EntryLabel::Known {
                return Err(Error::UnresolvedEntries(1));
            }
            let v = f.sub(rel.value, f.mul(rel.scale, self.values[rel.partner]));
            self.set_known(rel.target, v);
        }
        let open = self
            .labels
            .iter()
            .filter(|&&l| l != EntryLabel::Known)
            .count();
        if open > 0 {
            return Err(Error::UnresolvedEntries(open));
        }
        Ok(self.values)
    }
}

/// Runs a full session for one subset; `streams[t][j]` are helper `t`'s
/// symbols in iteration `j`.
pub fn estimate_subset(
    code: &Code,
    plan: &RepairPlanII,
    failed: usize,
    helpers: &[usize],
    streams: &[&Vec<Vec<Elem>>],
) -> Result<Vec<Elem>> {
    let mut s = RepairSessionII::new(code, plan, failed)?;
    for j in 0..plan.iterations() {
        let round: Vec<Vec<Elem>> = streams
            .iter()
            .map(|st| {
                st.get(j)
                    .cloned()
                    .ok_or_else(|| Error::PlanMismatch("stream too short".into()))
            })
            .collect::<Result<_>>()?;
        s.decoder_round(helpers, &round)?;
    }
    s.finalize()
}

/// All helpers' symbol streams for one repair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairBundleII {
    pub failed: usize,
    pub d: usize,
    /// `(helper, per-iteration symbols)`.
    pub streams: Vec<(usize, Vec<Vec<Elem>>)>,
}

impl RepairBundleII {
    pub fn gather(
        code: &Code,
        plan: &RepairPlanII,
        failed: usize,
        helpers: &[&NodeShare],
    ) -> Result<Self> {
        let streams = helpers
            .iter()
            .map(|h| Ok((h.node, helper_all_symbols(code, plan, h, failed)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(RepairBundleII {
            failed,
            d: plan.d(),
            streams,
        })
    }

    pub fn total_symbols(&self) -> usize {
        self.streams
            .iter()
            .map(|(_, s)| s.iter().map(Vec::len).sum::<usize>())
            .sum()
    }
}

pub fn testgroup_repair2(
    code: &Code,
    plan: &RepairPlanII,
    bundle: &RepairBundleII,
) -> Result<Vec<Elem>> {
    testgroup_repair2_verdict(code, plan, bundle).map(|(x, _)| x)
}

pub fn testgroup_repair2_verdict(
    code: &Code,
    plan: &RepairPlanII,
    bundle: &RepairBundleII,
) -> Result<(Vec<Elem>, TestGroupVerdict<Vec<Elem>>)> {
    let b = code.params().b;
    let d = bundle.d;
    if d != plan.d() {
        return Err(Error::PlanMismatch(format!(
            "bundle for d = {d}, plan for d = {}",
            plan.d()
        )));
    }
    let helpers: Vec<usize> = bundle.streams.iter().map(|(h, _)| *h).collect();
    code.check_helpers(bundle.failed, d, &helpers)?;
    for (h, st) in &bundle.streams {
        let shape_ok = st.len() == plan.iterations()
            && st.iter().zip(&plan.groups).all(|(s, g)| s.len() == g.len());
        if !shape_ok {
            return Err(Error::PlanMismatch(format!(
                "helper {h} stream does not match the plan"
            )));
        }
    }
    let of = |h: usize| {
        &bundle
            .streams
            .iter()
            .find(|(n, _)| *n == h)
            .expect("helper")
            .1
    };
    testgroup::decode(&helpers, d - b, d - 2 * b, |subset| {
        let streams: Vec<&Vec<Vec<Elem>>> = subset.iter().map(|&h| of(h)).collect();
        estimate_subset(code, plan, bundle.failed, subset, &streams).ok()
    })
}

/// Subsets whose reduced systems are singular, per `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedReport {
    pub checked: usize,
    pub singular: Vec<(usize, Vec<usize>)>,
}

impl ReducedReport {
    pub fn passed(&self) -> bool {
        self.singular.is_empty()
    }
}

/// Checks every reduced system for every `d ∈ D` and every `ℋ ⊆ [n]` of size
/// `d - 2b`. The systems depend only on the plan and `ℋ`, so a session is run
/// on all-zero symbols.
pub fn verify_reduced_all(code: &Code) -> Result<ReducedReport> {
    let mut report = ReducedReport {
        checked: 0,
        singular: Vec::new(),
    };
    let b = code.params().b;
    for &d in &code.params().d_set {
        let plan = RepairPlanII::new(code.params(), d)?;
        let zeros: Vec<Vec<Elem>> = plan
            .groups
            .iter()
            .map(|g| vec![Elem::ZERO; g.len()])
            .collect();
        for subset in (1..=code.n()).combinations(d - 2 * b) {
            report.checked += 1;
            let failed = (1..=code.n())
                .find(|x| !subset.contains(x))
                .expect("n > d - 2b");
            let streams = vec![&zeros; subset.len()];
            match estimate_subset(code, &plan, failed, &subset, &streams) {
                Ok(_) => {}
                Err(Error::SingularReducedSystem) => report.singular.push((d, subset)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}

/// Wire record: one helper's symbols for one iteration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairRecordII {
    pub d: usize,
    pub failed: usize,
    pub helper: usize,
    /// 1-based iteration number.
    pub iteration: usize,
    pub symbols: Vec<Elem>,
}

impl RepairRecordII {
    /// Records for every iteration of one helper's stream.
    pub fn from_stream(d: usize, failed: usize, helper: usize, stream: &[Vec<Elem>]) -> Vec<Self> {
        stream
            .iter()
            .enumerate()
            .map(|(j, s)| RepairRecordII {
                d,
                failed,
                helper,
                iteration: j + 1,
                symbols: s.clone(),
            })
            .collect()
    }

    /// Parses consecutive records, using the plan's group counts to delimit them.
    pub fn parse_stream(field: &Field, text: &str, plan: &RepairPlanII) -> Result<Vec<Self>> {
        if text.contains('\r') {
            return Err(Error::Parse("CR line endings are not allowed".into()));
        }
        let mut lines = text.split('\n').peekable();
        let mut out = Vec::new();
        while let Some(header) = lines.next() {
            if header.is_empty() && lines.peek().is_none() {
                break;
            }
            let v = header_fields(header, "BAERR2", &["d", "f", "h", "j"])?;
            let iteration: usize = parse_num(v[3], "j")?;
            if iteration != out.len() + 1 || iteration > plan.iterations() {
                return Err(Error::PlanMismatch(format!(
                    "unexpected iteration {iteration}"
                )));
            }
            let count = plan.groups[iteration - 1].len();
            let symbols = (0..count)
                .map(|_| {
                    let l = lines
                        .next()
                        .ok_or_else(|| Error::Parse("record truncated".into()))?;
                    parse_symbol(field, l)
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(RepairRecordII {
                d: parse_num(v[0], "d")?,
                failed: parse_num(v[1], "f")?,
                helper: parse_num(v[2], "h")?,
                iteration,
                symbols,
            });
        }
        if out.len() != plan.iterations() {
            return Err(Error::PlanMismatch(format!(
                "{} records for a {}-iteration plan",
                out.len(),
                plan.iterations()
            )));
        }
        Ok(out)
    }
}

impl fmt::Display for RepairRecordII {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "BAERR2 d={} f={} h={} j={}",
            self.d, self.failed, self.helper, self.iteration
        )?;
        for s in &self.symbols {
            writeln!(f, "{s}")?;
        }
        Ok(())
    }
}
