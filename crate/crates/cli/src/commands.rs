use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use baer_core::adversary::AdversaryPolicy;
use baer_core::certify::{certify_scheme, find_certified_field};
use baer_core::encoder::{encode_message, ShareFile};
use baer_core::params::{capacity_upper_bound, classical_bound, err_resilient_bound, ParamsFile};
use baer_core::reconstruct::testgroup_reconstruct;
use baer_core::simnet::{generate_scenario, parse_scenario, repair_share, run_scenario, Cluster};
use baer_core::{Code, CodeParams, Error, Field, NodeShare, Scheme, SourceMessage};

use crate::{AdversaryArgs, AdversaryKind, Command};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_DECODE: u8 = 3;
pub const EXIT_UNCERTIFIED: u8 = 4;

/// The configured field failed certification.
#[derive(Debug)]
struct Uncertified(String);

impl fmt::Display for Uncertified {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Uncertified {}

/// A simulation finished but some event did not decode genuinely.
#[derive(Debug)]
struct ScenarioFailed(usize);

impl fmt::Display for ScenarioFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} event(s) failed to decode genuinely", self.0)
    }
}

impl std::error::Error for ScenarioFailed {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Uncertified>() {
            return EXIT_UNCERTIFIED;
        }
        if cause.is::<ScenarioFailed>() {
            return EXIT_DECODE;
        }
        match cause.downcast_ref::<Error>() {
            Some(Error::NoConsistentGroup) => return EXIT_DECODE,
            Some(Error::NoCertifiedField { .. }) => return EXIT_UNCERTIFIED,
            _ => {}
        }
    }
    EXIT_VALIDATION
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Bounds { params } => bounds(&params),
        Command::FindField {
            params,
            scheme,
            from,
            to,
            out,
        } => find_field(&params, scheme, from, to, out.as_deref()),
        Command::Encode {
            params,
            scheme,
            message,
            out,
        } => encode(&params, scheme, &message, &out),
        Command::Repair {
            params,
            scheme,
            failed,
            d,
            helpers,
            adversary,
            out,
        } => repair(
            params.as_deref(),
            scheme,
            failed,
            d,
            &helpers,
            &adversary,
            &out,
        ),
        Command::Reconstruct {
            params,
            shares,
            adversary,
            out,
        } => reconstruct(params.as_deref(), &shares, &adversary, &out),
        Command::Simulate {
            params,
            scheme,
            scenario,
            events,
            adversary,
            seed,
            message,
            out,
        } => simulate(
            &params,
            scheme,
            scenario.as_deref(),
            events,
            adversary,
            seed,
            message.as_deref(),
            out.as_deref(),
        ),
        Command::Selftest { params, scheme } => selftest(&params, scheme),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_params(path: &Path) -> Result<ParamsFile> {
    let pf: ParamsFile = read(path)?
        .parse()
        .with_context(|| format!("parsing {}", path.display()))?;
    pf.params.validate()?;
    Ok(pf)
}

/// The configured field, or the smallest one certified for `scheme`.
fn code_for(pf: &ParamsFile, scheme: Scheme) -> Result<Code> {
    match pf.p {
        Some(p) => Ok(Code::new(pf.params.clone(), Field::new(p)?)?),
        None => {
            let (code, _) = find_certified_field(&pf.params, scheme, 2, 100_000)?;
            eprintln!(
                "no p configured; using certified p={}",
                code.field().modulus()
            );
            Ok(code)
        }
    }
}

fn bounds(path: &Path) -> Result<()> {
    let p = load_params(path)?.params;
    let derived = p.validate()?;
    let ds: Vec<String> = p.d_set.iter().map(ToString::to_string).collect();
    println!(
        "n={} k={} b={} alpha={} D={}",
        p.n,
        p.k,
        p.b,
        p.alpha,
        ds.join(",")
    );
    println!("d\tbeta\tgamma_mbr\tclassical_bound\terr_resilient_bound");
    for dims in &derived.per_d {
        let g = dims.gamma as u64;
        println!(
            "{}\t{}\t{}\t{}\t{}",
            dims.d,
            dims.beta,
            dims.gamma,
            classical_bound(p.k, dims.d, p.alpha as u64, g)?,
            err_resilient_bound(p.k, dims.d, p.b, p.alpha as u64, g)?
        );
    }
    println!("f_mbr={}", derived.f_mbr);
    println!(
        "capacity_upper_bound={}",
        capacity_upper_bound(&p, &p.gamma_mbr_map())?
    );
    Ok(())
}

fn find_field(path: &Path, scheme: Scheme, from: u64, to: u64, out: Option<&Path>) -> Result<()> {
    let mut pf = load_params(path)?;
    let (code, cert) = find_certified_field(&pf.params, scheme, from, to)?;
    println!("{cert}");
    println!("p={}", code.field().modulus());
    if let Some(out) = out {
        pf.p = Some(code.field().modulus());
        write(out, &pf.to_string())?;
    }
    Ok(())
}

fn share_path(dir: &Path, node: usize) -> PathBuf {
    dir.join(format!("node{node}.share"))
}

fn encode(path: &Path, scheme: Scheme, message: &Path, out: &Path) -> Result<()> {
    let pf = load_params(path)?;
    let code = code_for(&pf, scheme)?;
    let msg = SourceMessage::parse(code.field(), &read(message)?)
        .with_context(|| format!("parsing {}", message.display()))?;
    let shares = encode_message(&msg, &code)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for s in &shares {
        write(
            &share_path(out, s.node),
            &ShareFile::new(&code, scheme, s).to_string(),
        )?;
    }
    println!(
        "encoded {} symbols into {} shares of {} symbols over GF({}) in {}",
        msg.len(),
        shares.len(),
        code.alpha(),
        code.field().modulus(),
        out.display()
    );
    Ok(())
}

/// Loads share files that must agree on field, parameters and scheme.
fn load_shares(paths: &[PathBuf], params: Option<&Path>) -> Result<(Code, Scheme, Vec<NodeShare>)> {
    let files = paths
        .iter()
        .map(|p| {
            read(p)?
                .parse::<ShareFile>()
                .with_context(|| format!("parsing {}", p.display()))
        })
        .collect::<Result<Vec<_>>>()?;
    let first = files.first().context("no share files given")?;
    for f in &files {
        ensure!(
            f.p == first.p && f.params == first.params && f.scheme == first.scheme,
            "share files disagree on field, parameters or scheme (node {} vs node {})",
            f.node,
            first.node
        );
    }
    if let Some(path) = params {
        let pf = load_params(path)?;
        ensure!(
            pf.params == first.params,
            "parameter file does not match the share headers"
        );
        if let Some(p) = pf.p {
            ensure!(
                p == first.p,
                "parameter file has p={p}, shares have p={}",
                first.p
            );
        }
    }
    let code = Code::new(first.params.clone(), Field::new(first.p)?)?;
    let scheme = first.scheme;
    let shares = files
        .into_iter()
        .map(|f| f.into_share(&code))
        .collect::<baer_core::Result<Vec<_>>>()?;
    Ok((code, scheme, shares))
}

fn policy(args: &AdversaryArgs, code: &Code) -> Result<AdversaryPolicy> {
    for &n in &args.controlled {
        code.check_node(n)?;
    }
    if args.adversary != AdversaryKind::Honest && args.controlled.is_empty() {
        bail!("--adversary {:?} needs --controlled", args.adversary);
    }
    Ok(AdversaryPolicy::new(
        args.controlled.iter().copied(),
        args.strategy(),
    ))
}

fn repair(
    params: Option<&Path>,
    scheme: Option<Scheme>,
    failed: usize,
    d: Option<usize>,
    helpers: &[PathBuf],
    adv: &AdversaryArgs,
    out: &Path,
) -> Result<()> {
    let (code, file_scheme, shares) = load_shares(helpers, params)?;
    if let Some(s) = scheme {
        ensure!(
            s == file_scheme,
            "--scheme {s} but the shares were written for scheme {file_scheme}"
        );
    }
    let d = d.unwrap_or(shares.len());
    ensure!(
        shares.len() == d,
        "d={d} needs exactly {d} helper files, got {}",
        shares.len()
    );
    code.check_node(failed)?;
    let pol = policy(adv, &code)?;
    let refs: Vec<&NodeShare> = shares.iter().collect();
    let (x, moved) = repair_share(&code, file_scheme, None, &pol, failed, &refs, adv.seed)?;
    let share = NodeShare {
        node: failed,
        point: code.point(failed),
        x,
    };
    write(out, &ShareFile::new(&code, file_scheme, &share).to_string())?;
    println!(
        "bandwidth d={d} symbols={moved} gamma_mbr={} per_helper={}",
        code.params().gamma_mbr(d)?,
        moved / d
    );
    Ok(())
}

fn reconstruct(
    params: Option<&Path>,
    paths: &[PathBuf],
    adv: &AdversaryArgs,
    out: &Path,
) -> Result<()> {
    let (code, _, shares) = load_shares(paths, params)?;
    let pol = policy(adv, &code)?;
    let access = shares
        .iter()
        .map(|s| pol.corrupt_access(&code, s))
        .collect::<baer_core::Result<Vec<_>>>()?;
    let msg = testgroup_reconstruct(&code, &access)?;
    write(out, &msg.to_text())?;
    let nodes: Vec<String> = shares.iter().map(|s| s.node.to_string()).collect();
    println!(
        "reconstructed {} symbols from nodes {}",
        msg.len(),
        nodes.join(",")
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    path: &Path,
    scheme: Scheme,
    scenario: Option<&Path>,
    events: usize,
    adversary: AdversaryKind,
    seed: u64,
    message: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let pf = load_params(path)?;
    let code = code_for(&pf, scheme)?;
    let msg = match message {
        Some(m) => SourceMessage::parse(code.field(), &read(m)?)?,
        None => AdversaryPolicy::fake_message(&code, seed),
    };
    let script = match scenario {
        Some(s) => parse_scenario(&read(s)?).with_context(|| format!("parsing {}", s.display()))?,
        None => generate_scenario(&code, events, seed, adversary.name())?,
    };
    let mut cluster = Cluster::new(code, scheme, msg)?;
    let report = run_scenario(&mut cluster, &script)?;
    let text = report.to_string();
    match out {
        Some(o) => write(o, &text)?,
        None => print!("{text}"),
    }
    let failed = report.rows.iter().filter(|r| !(r.ok && r.genuine)).count();
    if failed > 0 {
        return Err(ScenarioFailed(failed).into());
    }
    Ok(())
}

fn selftest(path: &Path, scheme: Scheme) -> Result<()> {
    let pf = load_params(path)?;
    let Some(p) = pf.p else {
        bail!("{} has no p; run find-field first", path.display());
    };
    let params: &CodeParams = &pf.params;
    let (_, cert) = certify_scheme(params, scheme, p)?;
    println!("{cert}");
    if !cert.passed() {
        return Err(Uncertified(format!("GF({p}) is not certified for scheme {scheme}")).into());
    }
    Ok(())
}
