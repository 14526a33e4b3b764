//! `ffdlog`: file-per-stage driver for the index-calculus pipeline.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ffdlog::descent::{self, Descender, DescentConfig, DEFAULT_RETRY_BUDGET};
use ffdlog::dlog::{self, FactorbaseLogs};
use ffdlog::oracle::{self, DEFAULT_TABLE_BOUND};
use ffdlog::relations::{generate_all, verify_row};
use ffdlog::select::{DEFAULT_C, DEFAULT_D};
use ffdlog::{
    build_standalone, build_tower, search_good, search_good_filtered, CosetMode, FieldSetup, Poly, RelationMatrix,
    TowerParams,
};

const MANIFEST: &str = "manifest.json";
const TOWER: &str = "tower.txt";
const SETUP: &str = "setup.txt";
const RELATIONS: &str = "relations.txt";
const SNF: &str = "snf.txt";
const LOGS: &str = "logs.txt";
const ALG2: &str = "alg2.txt";
const DESCENT: &str = "descent.txt";
const PROBE: &str = "probe.txt";

#[derive(Parser)]
#[command(name = "ffdlog", version, about = "Discrete logarithms in small-characteristic finite fields")]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone, Debug)]
struct GlobalOpts {
    /// Characteristic.
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Base field is F_q with q = p^e.
    #[arg(long, global = true)]
    e: Option<u32>,
    /// Target extension degree (standalone mode, 2 < m <= q).
    #[arg(long, global = true, conflicts_with = "n")]
    m: Option<usize>,
    /// Extension degree n of F_{p^n}; picks q and m by embedding.
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Smoothness exponent: primes <= q^{2C} are small.
    #[arg(long = "C", global = true)]
    c: Option<u32>,
    /// Degree bound on h0, h1.
    #[arg(long = "D", global = true)]
    d: Option<u32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, value_enum, global = true)]
    coset_mode: Option<ModeArg>,
    /// Coset sample count for sampled mode.
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[arg(long, global = true)]
    retry_budget: Option<usize>,
    #[arg(long, global = true, default_value = "ffdlog-out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    Exhaustive,
    Sampled,
    Auto,
}

#[derive(Subcommand)]
enum Command {
    /// Build the field tower and start a manifest.
    Setup,
    /// Search for a good h and write the setup file.
    Select {
        /// Skip h whose relation lattice fails the generator condition.
        #[arg(long)]
        require_snf: bool,
    },
    /// Generate the relation matrix.
    Relgen,
    /// Smith decomposition, factorbase logs and the mod-L elimination.
    Solve,
    /// Descend one element to the factorbase and write the trace.
    Descend {
        #[arg(long)]
        target: String,
    },
    /// Print x with eta^x = gamma, or `none`.
    Dlog {
        #[arg(long)]
        gamma: String,
        #[arg(long)]
        eta: String,
    },
    /// Re-verify every artifact present in the output directory.
    Verify {
        /// Random dlogs checked against the brute-force table.
        #[arg(long, default_value_t = 8)]
        checks: usize,
    },
    /// Group-structure obstruction report for an h (searched if not given).
    Probe {
        #[arg(long, requires = "h1")]
        h0: Option<String>,
        #[arg(long, requires = "h0")]
        h1: Option<String>,
    },
}

#[derive(Serialize, Deserialize, Clone, Debug, Default)]
struct StageRecord {
    millis: u128,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize, Clone, Debug)]
struct Manifest {
    p: u32,
    e: u32,
    m: usize,
    #[serde(rename = "C")]
    c: u32,
    #[serde(rename = "D")]
    d: u32,
    seed: u64,
    coset_mode: ModeArg,
    samples: usize,
    retry_budget: usize,
    /// Digest of every artifact written so far.
    artifacts: BTreeMap<String, String>,
    stages: BTreeMap<String, StageRecord>,
}

/// Exit-code classes.
#[derive(Debug)]
enum Failure {
    /// Heuristic, obstruction or verification failure (exit 2).
    Algorithmic(anyhow::Error),
    /// Usage, IO, parse or digest error (exit 1).
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        match e.downcast_ref::<ffdlog::Error>() {
            Some(ce) if ce.is_heuristic_failure() || matches!(ce, ffdlog::Error::Verification(_)) => {
                Failure::Algorithmic(e)
            }
            _ => Failure::Usage(e),
        }
    }
}

impl From<ffdlog::Error> for Failure {
    fn from(e: ffdlog::Error) -> Failure {
        anyhow::Error::new(e).into()
    }
}

type Res<T> = std::result::Result<T, Failure>;

fn sha(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Run {
    dir: PathBuf,
    manifest: Manifest,
    record: StageRecord,
    started: Instant,
}

impl Run {
    fn manifest_path(dir: &Path) -> PathBuf {
        dir.join(MANIFEST)
    }

    fn load(opts: &GlobalOpts) -> Res<Option<Manifest>> {
        let path = Self::manifest_path(&opts.out_dir);
        if !path.exists() {
            return Ok(None);
        }
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let m: Manifest = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        Ok(Some(m))
    }

    /// Open an existing run, failing if no manifest exists.
    fn open(opts: &GlobalOpts) -> Res<Run> {
        let manifest = Self::load(opts)?
            .ok_or_else(|| anyhow!("no {MANIFEST} in {}; run `setup` or `select` first", opts.out_dir.display()))?;
        check_consistent(&manifest, opts)?;
        Ok(Run::with(opts, manifest))
    }

    fn with(opts: &GlobalOpts, manifest: Manifest) -> Run {
        Run { dir: opts.out_dir.clone(), manifest, record: StageRecord::default(), started: Instant::now() }
    }

    /// Read an artifact, checking it against the digest recorded when it
    /// was written.
    fn read(&mut self, name: &str) -> Res<String> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path).with_context(|| format!("missing input {}", path.display()))?;
        let got = sha(&bytes);
        match self.manifest.artifacts.get(name) {
            Some(want) if *want == got => {}
            Some(want) => {
                return Err(Failure::Usage(anyhow!("digest mismatch for {name}: manifest has {want}, file has {got}")))
            }
            None => return Err(Failure::Usage(anyhow!("{name} is not recorded in {MANIFEST}"))),
        }
        self.record.inputs.insert(name.to_string(), got);
        String::from_utf8(bytes).map_err(|_| Failure::Usage(anyhow!("{name} is not UTF-8")))
    }

    fn has(&self, name: &str) -> bool {
        self.manifest.artifacts.contains_key(name) && self.dir.join(name).exists()
    }

    fn write(&mut self, name: &str, text: &str) -> Res<()> {
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        let path = self.dir.join(name);
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        let d = sha(text.as_bytes());
        self.manifest.artifacts.insert(name.to_string(), d.clone());
        self.record.outputs.insert(name.to_string(), d);
        Ok(())
    }

    fn finish(mut self, stage: &str) -> Res<()> {
        self.record.millis = self.started.elapsed().as_millis();
        self.manifest.stages.insert(stage.to_string(), self.record);
        let text = serde_json::to_string_pretty(&self.manifest).context("serializing manifest")?;
        fs::create_dir_all(&self.dir).with_context(|| format!("creating {}", self.dir.display()))?;
        fs::write(Self::manifest_path(&self.dir), text + "\n").context("writing manifest")?;
        Ok(())
    }

    fn tower(&mut self) -> Res<TowerParams> {
        let text = self.read(TOWER)?;
        Ok(TowerParams::from_text(&text)?)
    }

    fn setup(&mut self) -> Res<FieldSetup> {
        let text = self.read(SETUP)?;
        Ok(FieldSetup::from_text(&text)?)
    }

    fn coset_mode(&self, t: &TowerParams) -> CosetMode {
        let (samples, seed) = (self.manifest.samples, self.manifest.seed);
        match self.manifest.coset_mode {
            ModeArg::Exhaustive => CosetMode::Exhaustive,
            ModeArg::Sampled => CosetMode::Sampled { count: samples, seed },
            ModeArg::Auto => CosetMode::auto(t, samples, seed),
        }
    }

    fn descent_config(&self, setup: &FieldSetup) -> DescentConfig {
        let mut cfg = DescentConfig::new(setup, self.manifest.seed);
        cfg.retry_budget = self.manifest.retry_budget;
        cfg.coset_mode = self.coset_mode(&setup.tower);
        cfg
    }
}

/// Flags given on a later stage must agree with the manifest.
fn check_consistent(m: &Manifest, o: &GlobalOpts) -> Res<()> {
    let clash = |name: &str, given: String, have: String| -> Res<()> {
        Err(Failure::Usage(anyhow!("--{name} {given} conflicts with the manifest value {have}")))
    };
    macro_rules! same {
        ($flag:literal, $opt:expr, $have:expr) => {
            if let Some(v) = $opt {
                if v != $have {
                    return clash($flag, v.to_string(), $have.to_string());
                }
            }
        };
    }
    same!("p", o.p, m.p);
    same!("e", o.e, m.e);
    same!("m", o.m, m.m);
    same!("C", o.c, m.c);
    same!("D", o.d, m.d);
    same!("seed", o.seed, m.seed);
    same!("samples", o.samples, m.samples);
    same!("retry-budget", o.retry_budget, m.retry_budget);
    if let Some(mode) = o.coset_mode {
        if mode != m.coset_mode {
            return clash("coset-mode", format!("{mode:?}"), format!("{:?}", m.coset_mode));
        }
    }
    Ok(())
}

fn build_from_flags(o: &GlobalOpts) -> Res<(TowerParams, Manifest)> {
    let p = o.p.ok_or_else(|| Failure::Usage(anyhow!("--p is required")))?;
    let tower = match (o.e, o.m, o.n) {
        (Some(e), Some(m), None) => build_standalone(p, e, m)?,
        (None, None, Some(n)) => build_tower(p, n)?,
        _ => return Err(Failure::Usage(anyhow!("give either --e and --m, or --n"))),
    };
    let manifest = Manifest {
        p,
        e: tower.e,
        m: tower.m,
        c: o.c.unwrap_or(DEFAULT_C),
        d: o.d.unwrap_or(DEFAULT_D),
        seed: o.seed.unwrap_or(0),
        coset_mode: o.coset_mode.unwrap_or(ModeArg::Auto),
        samples: o.samples.unwrap_or(4096),
        retry_budget: o.retry_budget.unwrap_or(DEFAULT_RETRY_BUDGET),
        artifacts: BTreeMap::new(),
        stages: BTreeMap::new(),
    };
    Ok((tower, manifest))
}

fn cmd_setup(o: &GlobalOpts) -> Res<()> {
    let (tower, manifest) = build_from_flags(o)?;
    let mut run = Run::with(o, manifest);
    run.write(TOWER, &tower.to_text())?;
    println!("q = {}, m = {}, lambda = {}", tower.q, tower.m, tower.elem_token(tower.lambda));
    run.finish("setup")
}

fn cmd_select(o: &GlobalOpts, require_snf: bool) -> Res<()> {
    let (mut run, tower) = match Run::load(o)? {
        Some(m) => {
            check_consistent(&m, o)?;
            let mut run = Run::with(o, m);
            let t = run.tower()?;
            (run, t)
        }
        None => {
            let (t, m) = build_from_flags(o)?;
            let mut run = Run::with(o, m);
            run.write(TOWER, &t.to_text())?;
            (run, t)
        }
    };
    let (c, d) = (run.manifest.c, run.manifest.d);
    let setup = if require_snf {
        let mode = run.coset_mode(&tower);
        search_good_filtered(&tower, c, d, |s| match generate_all(s, mode) {
            Ok(mat) => dlog::check_snf_condition(&dlog::decompose(&mat), s),
            Err(_) => false,
        })?
    } else {
        search_good(&tower, c, d)?
    };
    setup.validate()?;
    run.write(SETUP, &setup.to_text())?;
    let t = &setup.tower;
    println!("h = {}", setup.h.to_text(t));
    println!("g = {}", setup.g.to_text(t));
    println!("v = {}, L = {}", setup.v, setup.l);
    run.finish("select")
}

fn cmd_relgen(o: &GlobalOpts) -> Res<()> {
    let mut run = Run::open(o)?;
    let setup = run.setup()?;
    let mode = run.coset_mode(&setup.tower);
    let matrix = generate_all(&setup, mode)?;
    run.write(RELATIONS, &matrix.to_text(&setup.tower))?;
    println!("{} rows from {} cosets ({mode})", matrix.rows.len(), matrix.cosets_tried);
    run.finish("relgen")
}

fn load_matrix(run: &mut Run, setup: &FieldSetup) -> Res<RelationMatrix> {
    let text = run.read(RELATIONS)?;
    let matrix = RelationMatrix::from_text(&setup.tower, &text)?;
    if matrix.digest != setup.digest() {
        return Err(Failure::Usage(anyhow!("{RELATIONS} was generated for a different setup")));
    }
    Ok(matrix)
}

fn alg2_text(setup: &FieldSetup, r: &dlog::AlgIIResult) -> String {
    let logs: Vec<String> = r.logs.iter().map(|x| x.to_string()).collect();
    format!("alpha {}\nlogs {}\n{}", r.alpha.to_text(&setup.tower), logs.join(" "), r.split.to_text())
}

fn cmd_solve(o: &GlobalOpts) -> Res<()> {
    let mut run = Run::open(o)?;
    let setup = run.setup()?;
    let matrix = load_matrix(&mut run, &setup)?;
    let dec = dlog::decompose(&matrix);
    run.write(SNF, &dec.to_text())?;
    if !dlog::check_snf_condition(&dec, &setup) {
        let d: Vec<String> = dec.diag.iter().map(|x| x.to_string()).collect();
        run.finish("solve")?;
        return Err(Failure::Algorithmic(anyhow!(
            "relation lattice does not isolate the L-torsion (invariant factors {}); try `select --require-snf`",
            d.join(" ")
        )));
    }
    let logs = dlog::factorbase_logs(&dec, &setup)?;
    let alg2 = dlog::alg2_solve(&matrix, &setup)?;
    if !dlog::algorithms_agree(&logs, &alg2) {
        return Err(Failure::Algorithmic(anyhow!("Smith and mod-L solvers disagree")));
    }
    run.write(LOGS, &logs.to_text(&setup.tower))?;
    run.write(ALG2, &alg2_text(&setup, &alg2))?;
    println!("{} factorbase logs; generator {}", logs.theta.len(), logs.generator.elem.to_text(&setup.tower));
    run.finish("solve")
}

fn load_logs(run: &mut Run, setup: &FieldSetup) -> Res<FactorbaseLogs> {
    let text = run.read(LOGS)?;
    Ok(FactorbaseLogs::from_text(setup, &text)?)
}

fn cmd_descend(o: &GlobalOpts, target: &str) -> Res<()> {
    let mut run = Run::open(o)?;
    let setup = run.setup()?;
    let t = &setup.tower;
    let p = Poly::parse(t, target)?;
    let mut desc = Descender::new(&setup, run.descent_config(&setup));
    let res = desc.full_descent(&p)?;
    let ex: Vec<String> = res.expression.iter().map(|x| x.to_string()).collect();
    let text = format!(
        "target {}\ndepth {}\nrandomizations {}\nexpression {}\n\n{}",
        p.to_text(t),
        res.depth,
        res.randomizations,
        ex.join(" "),
        desc.trace_text()
    );
    run.write(DESCENT, &text)?;
    let stats: Vec<String> = descent::summarize(&desc.nodes).iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("depth {}, {}", res.depth, stats.join(", "));
    run.finish("descend")
}

fn cmd_dlog(o: &GlobalOpts, gamma: &str, eta: &str) -> Res<()> {
    let mut run = Run::open(o)?;
    let setup = run.setup()?;
    let t = &setup.tower;
    let (g, e) = (Poly::parse(t, gamma)?, Poly::parse(t, eta)?);
    let logs = load_logs(&mut run, &setup)?;
    let mut desc = Descender::new(&setup, run.descent_config(&setup));
    match descent::dlog(&g, &e, &setup, &logs, &mut desc)? {
        Some(x) => println!("{x}"),
        None => println!("none"),
    }
    run.finish("dlog")
}

fn cmd_verify(o: &GlobalOpts, samples: usize) -> Res<()> {
    let mut run = Run::open(o)?;
    let setup = run.setup()?;
    setup.validate()?;
    println!("setup: ok");
    if !run.has(RELATIONS) {
        return run.finish("verify");
    }
    let matrix = load_matrix(&mut run, &setup)?;
    let bad = matrix.rows.iter().filter(|r| !verify_row(&setup, r)).count();
    if bad > 0 {
        return Err(Failure::Algorithmic(anyhow!("{bad} relation rows fail in F_h")));
    }
    println!("relations: {} rows ok", matrix.rows.len());
    if !run.has(LOGS) {
        return run.finish("verify");
    }
    let dec = dlog::decompose(&matrix);
    if run.read(SNF)? != dec.to_text() {
        return Err(Failure::Algorithmic(anyhow!("{SNF} does not match a fresh decomposition")));
    }
    let logs = load_logs(&mut run, &setup)?;
    let alg2 = dlog::alg2_solve(&matrix, &setup)?;
    if run.read(ALG2)? != alg2_text(&setup, &alg2) || !dlog::algorithms_agree(&logs, &alg2) {
        return Err(Failure::Algorithmic(anyhow!("{ALG2} does not agree with the factorbase logs")));
    }
    println!("logs: {} columns verified, solvers agree", logs.theta.len());
    match oracle::brute_logs(&setup, DEFAULT_TABLE_BOUND) {
        Ok(table) => {
            let n = oracle::check_logs(&setup, &logs, &table)?;
            let mut desc = Descender::new(&setup, run.descent_config(&setup));
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(run.manifest.seed);
            for _ in 0..samples {
                let g = oracle::random_target(&setup, &mut rng);
                let e = oracle::random_target(&setup, &mut rng);
                let x = descent::dlog(&g, &e, &setup, &logs, &mut desc)?;
                oracle::check_dlog(&setup, &table, &g, &e, x.as_ref())?;
            }
            println!("brute-force table: {n} columns and {samples} dlogs match");
        }
        Err(ffdlog::Error::SizeBound(_)) => println!("brute-force table: skipped (group too large)"),
        Err(e) => return Err(e.into()),
    }
    run.finish("verify")
}

fn cmd_probe(o: &GlobalOpts, h0: Option<&str>, h1: Option<&str>) -> Res<()> {
    let setup = match (h0, h1) {
        (Some(h0), Some(h1)) => {
            let (t, _) = build_from_flags(o)?;
            let (h0, h1) = (Poly::parse(&t, h0)?, Poly::parse(&t, h1)?);
            let h = ffdlog::select::assemble_h(&t, &h0, &h1);
            let f = h.factor(&t)?;
            let g = f
                .factors
                .iter()
                .find(|(g, a)| g.deg() == t.m && *a == 1)
                .map(|(g, _)| g.clone())
                .ok_or_else(|| Failure::Usage(anyhow!("h has no simple irreducible factor of degree {}", t.m)))?;
            let d = h0.deg().max(h1.deg()) as u32;
            FieldSetup::unchecked(t, o.c.unwrap_or(DEFAULT_C), d, h0, h1, g)?
        }
        _ => oracle::find_obstruction_instance(o.c.unwrap_or(1))
            .ok_or_else(|| Failure::Usage(anyhow!("no obstruction instance found")))?,
    };
    let t = &setup.tower;
    let mode = match o.coset_mode.unwrap_or(ModeArg::Exhaustive) {
        ModeArg::Sampled => CosetMode::Sampled { count: o.samples.unwrap_or(4096), seed: o.seed.unwrap_or(0) },
        ModeArg::Auto => CosetMode::auto(t, o.samples.unwrap_or(4096), o.seed.unwrap_or(0)),
        ModeArg::Exhaustive => CosetMode::Exhaustive,
    };
    let report = oracle::obstruction_probe(&setup, mode)?;
    let text = format!(
        "h {}\ng {}\nL {}\n{}",
        setup.h.to_text(t),
        setup.g.to_text(t),
        setup.l,
        report.to_text()
    );
    fs::create_dir_all(&o.out_dir).with_context(|| format!("creating {}", o.out_dir.display()))?;
    fs::write(o.out_dir.join(PROBE), &text).context("writing probe report")?;
    print!("{text}");
    if report.obstructed || report.rank_deficient {
        return Err(Failure::Algorithmic(anyhow!("obstruction detected")));
    }
    Ok(())
}

fn run(cli: Cli) -> Res<()> {
    let o = &cli.opts;
    rayon::ThreadPoolBuilder::new()
        .num_threads(o.threads.max(1))
        .build_global()
        .map_err(|e| Failure::Usage(anyhow!("thread pool: {e}")))?;
    match &cli.cmd {
        Command::Setup => cmd_setup(o),
        Command::Select { require_snf } => cmd_select(o, *require_snf),
        Command::Relgen => cmd_relgen(o),
        Command::Solve => cmd_solve(o),
        Command::Descend { target } => cmd_descend(o, target),
        Command::Dlog { gamma, eta } => cmd_dlog(o, gamma, eta),
        Command::Verify { checks } => cmd_verify(o, *checks),
        Command::Probe { h0, h1 } => cmd_probe(o, h0.as_deref(), h1.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Algorithmic(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
