//! Command-line front end. Every command writes its artifacts atomically
//! into `--out` together with a `manifest.json` that records the argument
//! list and the SHA-256 of each artifact, so `replay` can check a run
//! reproduces byte for byte.
//!
//! Exit codes: 0 success, 2 infeasible input, 3 certificate failure,
//! 64 usage.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::entropy_builder::{free_product_table, run_construction, verify_levels, BuilderParams, LevelCheck, LevelsFile, GENERATOR_LEVEL};
use crate::error::{LabError, LabResult};
use crate::fullgroup::FreeProductCertificate;
use crate::gamma::{delta_curve, FiniteDistribution};
use crate::lattice::{FiniteRegion, LatticePoint};
use crate::rational::{fmt_q, parse_rational};
use crate::subshift::{restrict_values, toeplitz_certificate};
use crate::toeplitz_delta::{build_labeling, check_membership, faithfulness_table, involution_failures, pack_phi, ZParameter};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_CERTIFICATE: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

pub const THREADS_ENV: &str = "FULLGROUP_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(name = "fullgroup-lab", version, about = "Certified constructions for topological full groups of Z^d subshifts")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Build a prescribed-entropy box system and certify it
    BuildEntropy(BuildEntropyArgs),
    /// Build the Toeplitz edge labeling for a parameter z and certify it
    BuildToeplitz(BuildToeplitzArgs),
    /// Free-product witness table for the generators g_1, g_2, g_3
    CertifyFree(CertifyFreeArgs),
    /// Certified delta curve of the half-set lemma as CSV
    GammaTable(GammaTableArgs),
    /// Re-check a levels file
    Verify(VerifyArgs),
    /// Re-run a manifest and compare artifact hashes
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
pub struct BuildEntropyArgs {
    /// target entropy as p/q, in nats
    #[arg(long)]
    pub lambda: String,
    /// number of levels from the default schedule
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    /// explicit schedule, e.g. 8x8,512x32 (overrides --levels)
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// longest word in the free-product table
    #[arg(long = "max-len", alias = "maxlen", default_value_t = 3)]
    pub max_len: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct BuildToeplitzArgs {
    /// parameter as prefix:rule, rule one of zero, one, periodic=BITS, seeded=N
    #[arg(long, default_value = ":zero")]
    pub z: String,
    /// half-width of the certified square
    #[arg(long, default_value_t = 32)]
    pub scan: i64,
    /// corrupt a vertical edge, as x,y=label
    #[arg(long)]
    pub fault: Vec<String>,
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    /// seed for the sampled involution offsets
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CertifyFreeArgs {
    #[arg(long = "max-len", alias = "maxlen", default_value_t = 4)]
    pub max_len: usize,
    /// levels file from build-entropy; otherwise a fresh build
    #[arg(long)]
    pub level_file: Option<PathBuf>,
    #[arg(long, default_value = "1/2")]
    pub lambda: String,
    #[arg(long, default_value_t = 2)]
    pub levels: usize,
    #[arg(long, default_value_t = 4)]
    pub budget: u64,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GammaTableArgs {
    /// uniform2, uniform4, uniform4b, or a JSON file {atoms:[[num,den,massNum,massDen]]}
    #[arg(long, default_value = "uniform2")]
    pub nu: String,
    #[arg(long)]
    pub eps: String,
    #[arg(long = "max")]
    pub max: usize,
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub level_file: PathBuf,
    /// also write verify.json here
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// where the re-run writes; a temporary directory by default
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// arguments after the program name, without `--out`
    pub args: Vec<String>,
    pub seed: Option<u64>,
    /// artifact file name to lowercase hex SHA-256
    pub outputs: BTreeMap<String, String>,
    pub exit_code: i32,
    pub wall_time_ms: u64,
}

pub const MANIFEST: &str = "manifest.json";

pub fn exit_code(e: &LabError) -> i32 {
    match e {
        LabError::Usage(_) | LabError::Io(_) | LabError::Json(_) => EXIT_USAGE,
        LabError::Infeasible { .. } | LabError::Precondition(_) => EXIT_INFEASIBLE,
        LabError::Certificate(_) | LabError::Inconclusive(_) => EXIT_CERTIFICATE,
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> LabResult<String> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(dir.join(name)).map_err(|e| LabError::Io(e.error))?;
    Ok(sha256_hex(bytes))
}

fn json_bytes<T: Serialize>(v: &T) -> LabResult<Vec<u8>> {
    let mut b = serde_json::to_vec_pretty(v)?;
    b.push(b'\n');
    Ok(b)
}

/// Artifacts of one command, in write order.
#[derive(Default)]
struct Outputs {
    files: Vec<(String, Vec<u8>)>,
    code: i32,
    seed: Option<u64>,
    summary: Vec<String>,
}

impl Outputs {
    fn json<T: Serialize>(&mut self, name: &str, v: &T) -> LabResult<()> {
        self.files.push((name.into(), json_bytes(v)?));
        Ok(())
    }
}

fn parse_dims(s: &str) -> LabResult<(i64, i64)> {
    let bad = || LabError::Usage(format!("dims must look like 8x8, got {s:?}"));
    let (a, b) = s.trim().split_once('x').ok_or_else(bad)?;
    Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
}

fn parse_fault(s: &str) -> LabResult<(LatticePoint, u8)> {
    let bad = || LabError::Usage(format!("fault must look like x,y=label, got {s:?}"));
    let (at, v) = s.split_once('=').ok_or_else(bad)?;
    let (x, y) = at.split_once(',').ok_or_else(bad)?;
    Ok((
        LatticePoint::new(x.trim().parse().map_err(|_| bad())?, y.trim().parse().map_err(|_| bad())?),
        v.trim().parse().map_err(|_| bad())?,
    ))
}

fn free_product_csv(cert: &FreeProductCertificate) -> LabResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["word", "length", "witness", "dx", "dy", "tx", "ty"])
        .map_err(|e| LabError::Usage(e.to_string()))?;
    for r in &cert.rows {
        let word: String = r.word.iter().map(|l| l.to_string()).collect();
        w.write_record([
            word,
            r.word.len().to_string(),
            r.witness_id.to_string(),
            r.displacement.x().to_string(),
            r.displacement.y().to_string(),
            r.distinguishing.x().to_string(),
            r.distinguishing.y().to_string(),
        ])
        .map_err(|e| LabError::Usage(e.to_string()))?;
    }
    w.into_inner().map_err(|e| LabError::Usage(e.to_string()))
}

fn cmd_build_entropy(a: &BuildEntropyArgs) -> LabResult<Outputs> {
    let lambda = parse_rational(&a.lambda)?;
    let params = if a.dims.is_empty() {
        BuilderParams::with_default_schedule(lambda, a.levels, a.budget, a.seed)?
    } else {
        let dims = a.dims.iter().map(|d| parse_dims(d)).collect::<LabResult<Vec<_>>>()?;
        BuilderParams::new(lambda, dims, a.budget, a.seed)?
    };
    let c = run_construction(&params, a.max_len)?;
    let mut out = Outputs {
        seed: Some(a.seed),
        ..Default::default()
    };
    out.json("levels.json", &LevelsFile::new(&params, &c.levels))?;
    out.json("report.json", &c.report)?;
    out.files.push(("free_product.csv".into(), free_product_csv(&c.report.free_product)?));
    for (e, ch) in c.report.entropy.iter().zip(&c.report.checks) {
        out.summary.push(format!(
            "level {}: density {}/{} {}, entropy in [{:.6}, {:.6}] nats",
            e.k,
            ch.density.ratio.0,
            ch.density.ratio.1,
            if ch.passes() { "ok" } else { "FAILED" },
            e.lower_nats,
            e.upper_nats
        ));
    }
    out.summary.push(format!(
        "free product: {} of {} words witnessed",
        c.report.free_product.rows.len(),
        c.report.free_product.rows.len() + c.report.free_product.missing.len()
    ));
    if c.report.minimality_weakened {
        out.summary.push("minimality sampling weakened (partial pattern coverage or inconclusive scan)".into());
    }
    out.code = if c.report.passed { EXIT_OK } else { EXIT_CERTIFICATE };
    Ok(out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ToeplitzSummary {
    max_exp: u32,
    odd_max: i64,
    certified: usize,
    total: usize,
    failures: Vec<LatticePoint>,
    largest_period: Option<(i64, i64)>,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ToeplitzCertificate {
    z: String,
    scan: i64,
    faults: Vec<(LatticePoint, u8)>,
    toeplitz: ToeplitzSummary,
    membership: crate::toeplitz_delta::MembershipReport,
    involution_offsets: usize,
    involution_failures: Vec<LatticePoint>,
    faithfulness: Vec<crate::toeplitz_delta::FaithfulnessRow>,
    passed: bool,
}

#[derive(Serialize)]
struct PackedSample {
    lo: LatticePoint,
    hi: LatticePoint,
    /// rows indexed by the second coordinate
    rows: Vec<Vec<u32>>,
}

fn cmd_build_toeplitz(a: &BuildToeplitzArgs) -> LabResult<Outputs> {
    if a.scan < 1 {
        return Err(LabError::Usage("--scan must be at least 1".into()));
    }
    let z: ZParameter = a.z.parse()?;
    let mut lambda = build_labeling(&z);
    lambda.faults = a.fault.iter().map(|f| parse_fault(f)).collect::<LabResult<_>>()?;
    let s = a.scan;
    let packed = pack_phi(&lambda);

    let square = FiniteRegion::centered_square(-s, s);
    let rep = toeplitz_certificate(&packed, &square, 8, 3);
    let failures = rep.failures();
    let toeplitz = ToeplitzSummary {
        max_exp: rep.max_exp,
        odd_max: rep.odd_max,
        certified: rep.coords.len() - failures.len(),
        total: rep.coords.len(),
        largest_period: rep.coords.iter().filter_map(|c| c.period).max_by_key(|&(p, q)| (p * q, p, q)),
        failures,
    };
    let membership = check_membership(&lambda, &FiniteRegion::centered_square(-2 * s, 2 * s));
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let offsets: Vec<LatticePoint> = (0..1000)
        .map(|_| LatticePoint::new(rng.gen_range(-s..=s), rng.gen_range(-s..=s)))
        .collect();
    let inv = involution_failures(&lambda, &offsets)?;
    let faithfulness = faithfulness_table(&lambda, a.max_len)?;
    let passed = toeplitz.failures.is_empty() && membership.passes() && inv.is_empty() && faithfulness.iter().all(|r| r.found);

    let mut out = Outputs {
        seed: Some(a.seed),
        ..Default::default()
    };
    out.summary.push(format!("toeplitz: {}/{} coordinates certified", toeplitz.certified, toeplitz.total));
    out.summary.push(format!(
        "membership: {} violations on {} cells",
        membership.violations.len(),
        membership.scanned
    ));
    if let Some(v) = membership.violations.first() {
        out.summary.push(format!("first violation: {:?} at {}", v.kind, v.at));
    }
    out.summary.push(format!("involutions: {} failures on {} offsets", inv.len(), offsets.len()));
    out.summary.push(format!(
        "faithfulness: {}/{} words witnessed",
        faithfulness.iter().filter(|r| r.found).count(),
        faithfulness.len()
    ));
    let lo = LatticePoint::new(-s, -s);
    let hi = LatticePoint::new(s + 1, s + 1);
    let sample = PackedSample {
        lo,
        hi,
        rows: (lo.y()..hi.y())
            .map(|y| restrict_values(&packed, &FiniteRegion::rect(LatticePoint::new(lo.x(), y), LatticePoint::new(hi.x(), y + 1))))
            .collect(),
    };
    out.json("labeling.json", &lambda.export(lo, hi))?;
    out.json("packed.json", &sample)?;
    out.json(
        "certificate.json",
        &ToeplitzCertificate {
            z: z.to_string(),
            scan: s,
            faults: lambda.faults.clone(),
            toeplitz,
            membership,
            involution_offsets: offsets.len(),
            involution_failures: inv,
            faithfulness,
            passed,
        },
    )?;
    out.code = if passed { EXIT_OK } else { EXIT_CERTIFICATE };
    Ok(out)
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct FreeCertificateDoc {
    k: u32,
    m: i64,
    piece_counts: Vec<usize>,
    displacements_exact: bool,
    certificate: FreeProductCertificate,
    passed: bool,
}

fn cmd_certify_free(a: &CertifyFreeArgs) -> LabResult<Outputs> {
    let levels = match &a.level_file {
        Some(p) => {
            let file: LevelsFile = serde_json::from_slice(&fs::read(p)?)?;
            let (_, theta, levels) = file.decode()?;
            if !verify_levels(&levels, &theta).iter().all(LevelCheck::passes) {
                return Err(LabError::Certificate(format!("{} does not verify", p.display())));
            }
            levels
        }
        None => {
            let params = BuilderParams::with_default_schedule(parse_rational(&a.lambda)?, a.levels, a.budget, 0)?;
            crate::entropy_builder::build_levels(&params)?
        }
    };
    let (gens, cert, exact) = free_product_table(&levels, GENERATOR_LEVEL, a.max_len)?;
    let passed = cert.complete() && cert.involutive.iter().all(|&b| b) && exact;
    let mut out = Outputs::default();
    out.summary.push(format!(
        "{} rows, {} missing, involutive {:?}, displacements exact: {exact}",
        cert.rows.len(),
        cert.missing.len(),
        cert.involutive
    ));
    out.files.push(("free_product.csv".into(), free_product_csv(&cert)?));
    out.json(
        "certificate.json",
        &FreeCertificateDoc {
            k: gens.k,
            m: gens.m,
            piece_counts: gens.gens.iter().map(|g| g.piece_count()).collect(),
            displacements_exact: exact,
            certificate: cert,
            passed,
        },
    )?;
    out.code = if passed { EXIT_OK } else { EXIT_CERTIFICATE };
    Ok(out)
}

pub fn named_distribution(s: &str) -> LabResult<FiniteDistribution> {
    match s {
        "uniform2" => Ok(FiniteDistribution::uniform2()),
        "uniform4" => Ok(FiniteDistribution::uniform4()),
        "uniform4b" => Ok(FiniteDistribution::uniform4b()),
        path => {
            let bytes = fs::read(path).map_err(|_| LabError::Usage(format!("unknown distribution {path:?}")))?;
            Ok(serde_json::from_slice(&bytes)?)
        }
    }
}

fn cmd_gamma_table(a: &GammaTableArgs) -> LabResult<Outputs> {
    let nu = named_distribution(&a.nu)?;
    let eps = parse_rational(&a.eps)?;
    let rows = delta_curve(&nu, &eps, a.max)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| LabError::Usage(e.to_string());
    w.write_record(["size_f", "delta", "worst_discrepancy", "worst_measure_gap"]).map_err(err)?;
    let pair = |p: &Option<(String, String)>| p.as_ref().map(|(n, d)| format!("{n}/{d}")).unwrap_or_default();
    for r in &rows {
        let delta = r.best_delta.map(|(j, f)| fmt_q(&crate::rational::q(j as i64, f as i64))).unwrap_or_default();
        w.write_record([r.size_f.to_string(), delta, pair(&r.worst_discrepancy), pair(&r.worst_measure_gap)])
            .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| LabError::Usage(e.to_string()))?;
    let mut out = Outputs::default();
    out.summary.push(format!("{} rows for eps = {}", rows.len(), fmt_q(&eps)));
    out.files.push(("delta_curve.csv".into(), bytes));
    Ok(out)
}

fn cmd_verify(a: &VerifyArgs) -> LabResult<Outputs> {
    let file: LevelsFile = serde_json::from_slice(&fs::read(&a.level_file)?)
        .map_err(|e| LabError::Certificate(format!("{} is not a levels file: {e}", a.level_file.display())))?;
    let (_, theta, levels) = file.decode()?;
    let checks = verify_levels(&levels, &theta);
    let mut out = Outputs::default();
    for c in &checks {
        out.summary.push(format!(
            "level {}: density {}/{} lower {} upper {}, box {}, column {}, restriction {}, nested {}",
            c.density.k,
            c.density.ratio.0,
            c.density.ratio.1,
            c.density.lower_holds,
            c.density.upper_holds,
            c.box_shaped,
            c.column_free,
            c.restricts_to_prev,
            c.nested
        ));
    }
    out.code = if checks.iter().all(LevelCheck::passes) { EXIT_OK } else { EXIT_CERTIFICATE };
    if a.out.is_some() {
        out.json("verify.json", &checks)?;
    }
    Ok(out)
}

fn cmd_replay(a: &ReplayArgs) -> LabResult<i32> {
    let m: RunManifest = serde_json::from_slice(&fs::read(&a.manifest)?)?;
    let tmp;
    let dir = match &a.out {
        Some(d) => d.clone(),
        None => {
            tmp = tempfile::tempdir()?;
            tmp.path().to_path_buf()
        }
    };
    let mut args = vec!["fullgroup-lab".to_string()];
    args.extend(m.args.iter().cloned());
    args.push("--out".into());
    args.push(dir.display().to_string());
    let code = run_quiet(args);
    let mut matched = Vec::new();
    let mut mismatched = Vec::new();
    for (name, hash) in &m.outputs {
        match fs::read(dir.join(name)) {
            Ok(b) if sha256_hex(&b) == *hash => matched.push(name.clone()),
            _ => mismatched.push(name.clone()),
        }
    }
    println!(
        "replay of {}: {} artifacts match, {} differ, exit {code} (recorded {})",
        m.command,
        matched.len(),
        mismatched.len(),
        m.exit_code
    );
    for n in &mismatched {
        println!("  differs: {n}");
    }
    Ok(if mismatched.is_empty() && code == m.exit_code {
        EXIT_OK
    } else {
        EXIT_CERTIFICATE
    })
}

/// Arguments with any `--out X` / `--out=X` removed.
fn strip_out(args: &[String]) -> Vec<String> {
    let mut v = Vec::new();
    let mut skip = false;
    for a in args {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            v.push(a.clone());
        }
    }
    v
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn finish(command: &str, argv: &[String], dir: &Path, res: LabResult<Outputs>, started: Instant, quiet: bool) -> i32 {
    let mut out = match res {
        Ok(o) => o,
        Err(e) => {
            let code = exit_code(&e);
            if !quiet {
                eprintln!("error: {e}");
            }
            if code != EXIT_USAGE {
                let marker = serde_json::json!({ "command": command, "error": e.to_string(), "exitCode": code });
                if let Ok(b) = json_bytes(&marker) {
                    let _ = write_atomic(dir, "FAILED.json", &b);
                }
            }
            return code;
        }
    };
    if !quiet {
        for line in &out.summary {
            println!("{line}");
        }
    }
    let mut outputs = BTreeMap::new();
    for (name, bytes) in std::mem::take(&mut out.files) {
        match write_atomic(dir, &name, &bytes) {
            Ok(h) => {
                outputs.insert(name, h);
            }
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    let manifest = RunManifest {
        tool: "fullgroup-lab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        args: strip_out(&argv[1..]),
        seed: out.seed,
        outputs,
        exit_code: out.code,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    if let Err(e) = json_bytes(&manifest).and_then(|b| write_atomic(dir, MANIFEST, &b)) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if !quiet && out.code != EXIT_OK {
        eprintln!("certificate failure (exit {})", out.code);
    }
    out.code
}

/// Parses `argv` (program name first) and runs one command.
pub fn run(argv: Vec<String>) -> i32 {
    dispatch(argv, false)
}

fn run_quiet(argv: Vec<String>) -> i32 {
    dispatch(argv, true)
}

fn dispatch(argv: Vec<String>, quiet: bool) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if !quiet {
                let _ = e.print();
            }
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    configure_threads();
    let started = Instant::now();
    match &cli.cmd {
        Cmd::BuildEntropy(a) => finish("build-entropy", &argv, &a.out, cmd_build_entropy(a), started, quiet),
        Cmd::BuildToeplitz(a) => finish("build-toeplitz", &argv, &a.out, cmd_build_toeplitz(a), started, quiet),
        Cmd::CertifyFree(a) => finish("certify-free", &argv, &a.out, cmd_certify_free(a), started, quiet),
        Cmd::GammaTable(a) => finish("gamma-table", &argv, &a.out, cmd_gamma_table(a), started, quiet),
        Cmd::Verify(a) => match &a.out {
            Some(dir) => finish("verify", &argv, dir, cmd_verify(a), started, quiet),
            None => match cmd_verify(a) {
                Ok(o) => {
                    if !quiet {
                        o.summary.iter().for_each(|l| println!("{l}"));
                    }
                    o.code
                }
                Err(e) => {
                    if !quiet {
                        eprintln!("error: {e}");
                    }
                    match exit_code(&e) {
                        EXIT_USAGE if matches!(e, LabError::Json(_)) => EXIT_CERTIFICATE,
                        c => c,
                    }
                }
            },
        },
        Cmd::Replay(a) => match cmd_replay(a) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    }
}
