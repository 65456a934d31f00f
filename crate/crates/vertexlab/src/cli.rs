//! Batch front end: one subcommand per verification suite.
//!
//! Parameters are resolved as defaults, then a `key = value` config file, then
//! flags. Lengths are in units of `L`-scaled momenta or `L/2π`, as documented on
//! each parameter struct in [`crate::suites`].

use crate::error::{Error, Result};
use crate::report::{csv_table, output_dir, to_json, write_text, CheckReport, OUTPUT_DIR_ENV};
use crate::suites;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "vertexlab", version, about = "Verification suites for loop-group vertex operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Subcommand)]
pub enum Command {
    /// Cocycle identities of the loop-group extension on random loops.
    CheckCocycle(RunArgs),
    /// Blip, smeared sign and delta profiles against closed forms.
    CheckBlips(RunArgs),
    /// Heisenberg relations of the smeared currents on the truncated Fock space.
    CheckHeisenberg(RunArgs),
    /// Anticommutators of bosonized fermions over a regulator ladder.
    CheckCar(RunArgs),
    /// Exchange phases of anyon fields from chained matrix elements.
    CheckExchange(RunArgs),
    /// Commutators of the W generators, boson and fermion pictures.
    WCommutators(RunArgs),
    /// Boson and fermion forms of the W generators agree.
    Kronig(RunArgs),
    /// Anyon correlators from the Fock chain against the product formula.
    AnyonCorr(RunArgs),
    /// Calogero-Sutherland groundstates and excited recipes.
    CsEigen(RunArgs),
    /// Elliptic Calogero identity over a regulator ladder.
    CsElliptic(RunArgs),
    /// Fit the spin-three anyon Hamiltonian against the reference states.
    HNu3Calibrate(RunArgs),
    /// Thermal Szego kernel against its Fourier series.
    SzegoIdentity(RunArgs),
    /// KMS condition and projection blocks of the thermal two-point function.
    KmsProject(RunArgs),
}

/// Arguments shared by all subcommands. A parameter flag not used by the
/// chosen suite is a usage error.
#[derive(Clone, Debug, Default, Args)]
pub struct RunArgs {
    /// Plain-text `key = value` file; `#` starts a comment.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Report directory.
    #[arg(long, env = OUTPUT_DIR_ENV)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Print the report to stdout without writing files.
    #[arg(long)]
    pub stdout: bool,
    /// Extra `key=value` override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Period `L`.
    #[arg(long = "L")]
    pub l: Option<String>,
    /// Level cutoff Λ.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub trials: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    /// Regulator in units of `L/2π`; comma list for ladders.
    #[arg(long)]
    pub eps: Option<String>,
    /// Particle number.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub nu: Option<String>,
    #[arg(long)]
    pub nu0: Option<String>,
    /// Elliptic nome.
    #[arg(long)]
    pub q: Option<String>,
    /// Inverse temperature in units of `L/2π`.
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    #[arg(long)]
    pub order: Option<String>,
    /// Momenta `p_1,…,p_N` in units of `2π/L`; `0` is the groundstate.
    #[arg(long)]
    pub recipe: Option<String>,
}

impl RunArgs {
    fn flag_pairs(&self) -> Vec<(String, String)> {
        let named = [
            ("l", &self.l),
            ("lambda", &self.lambda),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("eps", &self.eps),
            ("n", &self.n),
            ("nu", &self.nu),
            ("nu0", &self.nu0),
            ("q", &self.q),
            ("beta", &self.beta),
            ("grid", &self.grid),
            ("tol", &self.tol),
            ("order", &self.order),
            ("recipe", &self.recipe),
        ];
        named.iter().filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone()))).collect()
    }
}

/// Command name, resolved parameters and output settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub params: Value,
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub format: Format,
}

/// Parse `key = value` lines.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Invalid(format!("config line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// JSON literal, else comma list of JSON literals, else string.
fn parse_value(v: &str) -> Value {
    if let Ok(x) = serde_json::from_str::<Value>(v) {
        return x;
    }
    if v.contains(',') {
        let parts: Option<Vec<Value>> = v.split(',').map(|p| serde_json::from_str(p.trim()).ok()).collect();
        if let Some(p) = parts {
            return Value::Array(p);
        }
    }
    Value::String(v.to_string())
}

fn as_list(v: Value) -> Value {
    match v {
        Value::Array(_) => v,
        x => Value::Array(vec![x]),
    }
}

/// Apply one override. Singular keys fill plural list fields (`beta` → `betas`).
fn apply_kv(command: &str, params: &mut Value, key: &str, raw: &str) -> Result<()> {
    let obj = params.as_object_mut().ok_or_else(|| Error::Invalid("parameters are not a table".into()))?;
    let v = parse_value(raw);
    if command == "cs-eigen" {
        match key {
            "n" => {
                let n = v.clone();
                obj.insert("ns".into(), as_list(n.clone()));
                obj.insert("excited_n".into(), n);
                return Ok(());
            }
            "nu" => {
                obj.insert("nus".into(), as_list(v.clone()));
                obj.insert("excited_nu".into(), v);
                return Ok(());
            }
            "recipe" => {
                let r = as_list(v);
                let ground = r.as_array().is_some_and(|a| a.iter().all(|x| x.as_i64() == Some(0)));
                obj.insert("recipes".into(), if ground { Value::Array(vec![]) } else { Value::Array(vec![r]) });
                return Ok(());
            }
            _ => {}
        }
    }
    let key = if key == "L" { "l" } else { key };
    match obj.get(key) {
        Some(Value::Array(_)) => {
            obj.insert(key.into(), as_list(v));
        }
        Some(_) => {
            obj.insert(key.into(), v);
        }
        None => {
            let plural = format!("{key}s");
            if obj.contains_key(&plural) {
                obj.insert(plural, as_list(v));
            } else {
                return Err(Error::Invalid(format!("{command} has no parameter `{key}`")));
            }
        }
    }
    Ok(())
}

fn resolve<P: Serialize + DeserializeOwned + Default>(command: &str, args: &RunArgs) -> Result<(P, Value)> {
    let mut v = serde_json::to_value(P::default()).map_err(|e| Error::Invalid(e.to_string()))?;
    let mut pairs = Vec::new();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        pairs.extend(parse_config(&text)?);
    }
    for s in &args.set {
        let (k, val) = s.split_once('=').ok_or_else(|| Error::Invalid(format!("--set {s}: expected key=value")))?;
        pairs.push((k.trim().into(), val.trim().into()));
    }
    pairs.extend(args.flag_pairs());
    for (k, val) in &pairs {
        apply_kv(command, &mut v, k, val)?;
    }
    let p: P = serde_json::from_value(v.clone()).map_err(|e| Error::Invalid(format!("{command}: {e}")))?;
    let v = serde_json::to_value(&p).map_err(|e| Error::Invalid(e.to_string()))?;
    Ok((p, v))
}

fn flatten(prefix: &str, v: &Value, rows: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, rows);
            }
        }
        Value::Array(a) => {
            for (i, x) in a.iter().enumerate() {
                flatten(&format!("{prefix}[{i}]"), x, rows);
            }
        }
        Value::String(s) => rows.push(vec![prefix.into(), s.clone()]),
        x => rows.push(vec![prefix.into(), x.to_string()]),
    }
}

/// Report as a `key,value` table of every scalar metric.
pub fn report_csv(r: &CheckReport) -> String {
    let mut rows = vec![vec!["pass".into(), r.pass.to_string()]];
    flatten("", &r.metrics, &mut rows);
    let rows: Vec<Vec<String>> = rows.into_iter().map(|row| row.into_iter().map(|c| c.replace(',', ";")).collect()).collect();
    csv_table(&["key", "value"], &rows)
}

/// Resolve parameters and run the suite for `cmd`.
pub fn dispatch(cmd: &Command) -> Result<(RunConfig, CheckReport)> {
    macro_rules! run {
        ($name:literal, $args:expr, $p:ty, $f:path) => {{
            let (p, v) = resolve::<$p>($name, $args)?;
            let r = $f(&p)?;
            (RunConfig { command: $name.into(), params: v, out: $args.out.clone(), format: $args.format }, r)
        }};
    }
    Ok(match cmd {
        Command::CheckCocycle(a) => run!("check-cocycle", a, suites::CocycleParams, suites::check_cocycle),
        Command::CheckBlips(a) => run!("check-blips", a, suites::BlipCheckParams, suites::check_blips),
        Command::CheckHeisenberg(a) => run!("check-heisenberg", a, suites::HeisenbergParams, suites::check_heisenberg),
        Command::CheckCar(a) => run!("check-car", a, suites::CarParams, suites::check_car),
        Command::CheckExchange(a) => run!("check-exchange", a, suites::ExchangeParams, suites::check_exchange),
        Command::WCommutators(a) => run!("w-commutators", a, suites::WCommutatorParams, suites::w_commutators),
        Command::Kronig(a) => run!("kronig", a, suites::KronigParams, suites::kronig),
        Command::AnyonCorr(a) => run!("anyon-corr", a, suites::AnyonCorrParams, suites::anyon_corr),
        Command::CsEigen(a) => run!("cs-eigen", a, suites::CsEigenParams, suites::cs_eigen),
        Command::CsElliptic(a) => run!("cs-elliptic", a, suites::CsEllipticParams, suites::cs_elliptic),
        Command::HNu3Calibrate(a) => run!("h-nu3-calibrate", a, suites::HNu3Params, suites::h_nu3_calibrate),
        Command::SzegoIdentity(a) => run!("szego-identity", a, suites::SzegoParams, suites::szego_identity),
        Command::KmsProject(a) => run!("kms-project", a, suites::KmsParams, suites::kms_project),
    })
}

fn args_of(cmd: &Command) -> &RunArgs {
    match cmd {
        Command::CheckCocycle(a)
        | Command::CheckBlips(a)
        | Command::CheckHeisenberg(a)
        | Command::CheckCar(a)
        | Command::CheckExchange(a)
        | Command::WCommutators(a)
        | Command::Kronig(a)
        | Command::AnyonCorr(a)
        | Command::CsEigen(a)
        | Command::CsElliptic(a)
        | Command::HNu3Calibrate(a)
        | Command::SzegoIdentity(a)
        | Command::KmsProject(a) => a,
    }
}

/// Extra tables written next to the CSV report.
fn extra_tables(cfg: &RunConfig) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    if cfg.command == "szego-identity" {
        let p: suites::SzegoParams = serde_json::from_value(cfg.params.clone()).map_err(|e| Error::Invalid(e.to_string()))?;
        for b in &p.betas {
            out.push((format!("szego-kernel-beta{b}.csv"), crate::torus::kernel_csv(*b, 64)?));
        }
    }
    Ok(out)
}

fn write_outputs(dir: &Path, cfg: &RunConfig, r: &CheckReport) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let (name, body) = match cfg.format {
        Format::Json => (format!("{}.json", cfg.command), to_json(r)?),
        Format::Csv => (format!("{}.csv", cfg.command), report_csv(r)),
    };
    written.push(write_text(dir, &name, &body)?);
    if cfg.format == Format::Csv {
        for (n, b) in extra_tables(cfg)? {
            written.push(write_text(dir, &n, &b)?);
        }
    }
    if !r.pass {
        let manifest = serde_json::json!({ "check": r.check, "failures": r.failures });
        written.push(write_text(dir, &format!("{}.failures.json", cfg.command), &to_json(&manifest)?)?);
    }
    Ok(written)
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let args = args_of(&cli.command).clone();
    let (cfg, report) = match dispatch(&cli.command) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if args.stdout {
        let body = match cfg.format {
            Format::Json => to_json(&report),
            Format::Csv => Ok(report_csv(&report)),
        };
        match body {
            Ok(b) => println!("{b}"),
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        }
    } else {
        let dir = output_dir(cfg.out.as_deref());
        match write_outputs(&dir, &cfg, &report) {
            Ok(files) => {
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            Err(e) => {
                eprintln!("error: {e}");
                return 2;
            }
        }
        println!("{}", report.line());
    }
    if report.pass {
        0
    } else {
        for f in &report.failures {
            eprintln!("failed: {f}");
        }
        1
    }
}
