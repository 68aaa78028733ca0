use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{Map, Value};

use fglwb::cache::{self, CacheFile};
use fglwb::combinat::{big_d, d, d2, d_closed_form, novikov_admissible};
use fglwb::expr::parse_expr;
use fglwb::genera::{kh_solve, odd_denominators, schreieder_genus, ClassifyingMap};
use fglwb::graded::GradedPoly;
use fglwb::su::{
    build_bk_xk, build_x234, chern_number, partitions, s_number_manifold, su_check, w_coefficients, Partition,
};
use fglwb::verify::{run_verify, Suite};
use fglwb::Error;

#[derive(Parser)]
#[command(name = "fglwb", version, about = "Exact formal group law and cobordism computations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Weight bound for all series and tables.
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=40))]
    max_degree: u32,
    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Class expression, e.g. "CP2 - 9/8*CP1^2".
    #[arg(long, global = true)]
    eval: Option<String>,
    /// Recompute everything and leave the cache untouched.
    #[arg(long, global = true)]
    no_cache: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Coefficients of the universal formal group law.
    Alpha,
    /// Coefficients of A(x,y) = F(x,y)(x w(y) - y w(x)).
    Pairing,
    /// gcd functions of binomial coefficients.
    Combinat {
        /// Largest m to tabulate.
        #[arg(long, default_value_t = 64)]
        max_m: u32,
    },
    /// Images of CP_n under a genus, or of --eval.
    Genus {
        #[arg(value_enum)]
        which: Genus,
        /// List odd primes in the denominators of each image.
        #[arg(long)]
        denominators: bool,
    },
    /// SU generators and SU checks.
    Su {
        #[command(subcommand)]
        action: SuAction,
    },
    /// Chern numbers of a class given by --eval or --manifold.
    Chern {
        /// Class expression; same grammar as --eval.
        #[arg(long)]
        manifold: Option<String>,
        /// Partition such as "1,3"; all partitions of the weight if omitted.
        #[arg(long)]
        partition: Option<String>,
    },
    /// Run a verification suite.
    Verify {
        #[arg(default_value = "all", value_parser = Suite::NAMES)]
        suite: String,
    },
    /// Inspect or clear the coefficient cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Genus {
    Kh,
    Schreieder,
    Buchstaber,
    Abelian,
}

#[derive(Subcommand)]
enum SuAction {
    /// x_2, x_3, x_4 and x_k from the W coefficients.
    Generators,
    /// Chern numbers containing c1 of the class given by --eval.
    Check,
}

#[derive(Subcommand)]
enum CacheAction {
    /// List cache files and whether each one loads.
    Info,
    /// Delete every cache file.
    Clear,
}

enum Failure {
    Usage(String),
    Verify,
    Inconsistent(String),
    Io(String),
    /// Stdout was closed early, e.g. by `head`.
    ClosedPipe,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) | Error::Cache(m) => Failure::Io(m),
            Error::Consistency(m) => Failure::Inconsistent(m),
            e => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return Failure::ClosedPipe;
        }
        Failure::Io(e.to_string())
    }
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(headers: &[&'static str]) -> Self {
        Table { headers: headers.to_vec(), rows: Vec::new() }
    }

    fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    fn emit(&self, format: Format, out: &mut impl Write) -> io::Result<()> {
        match format {
            Format::Table => {
                let mut widths: Vec<usize> = self.headers.iter().map(|h| h.chars().count()).collect();
                for r in &self.rows {
                    for (w, c) in widths.iter_mut().zip(r) {
                        *w = (*w).max(c.chars().count());
                    }
                }
                let line = |cells: Vec<&str>| {
                    let last = cells.len() - 1;
                    let parts: Vec<String> = cells
                        .iter()
                        .enumerate()
                        .map(|(i, c)| if i == last { c.to_string() } else { format!("{c:<w$}", w = widths[i]) })
                        .collect();
                    parts.join("  ")
                };
                writeln!(out, "{}", line(self.headers.clone()))?;
                for r in &self.rows {
                    writeln!(out, "{}", line(r.iter().map(String::as_str).collect()))?;
                }
            }
            Format::Csv => {
                let esc = |c: &str| {
                    if c.contains([',', '"', '\n']) {
                        format!("\"{}\"", c.replace('"', "\"\""))
                    } else {
                        c.to_string()
                    }
                };
                writeln!(out, "{}", self.headers.join(","))?;
                for r in &self.rows {
                    writeln!(out, "{}", r.iter().map(|c| esc(c)).collect::<Vec<_>>().join(","))?;
                }
            }
            Format::Jsonl => {
                for r in &self.rows {
                    let obj: Map<String, Value> =
                        self.headers.iter().zip(r).map(|(h, c)| (h.to_string(), Value::String(c.clone()))).collect();
                    writeln!(out, "{}", Value::Object(obj))?;
                }
            }
        }
        Ok(())
    }
}

fn warn(msg: impl AsRef<str>) {
    eprintln!("fglwb: warning: {}", msg.as_ref());
}

fn cache_dir(g: &Global) -> Option<PathBuf> {
    if g.no_cache {
        None
    } else {
        cache::cache_dir()
    }
}

/// Cached tables when possible; a broken or unwritable cache falls back to recomputation.
fn tables(g: &Global) -> Result<CacheFile, Failure> {
    let n = g.max_degree;
    match cache_dir(g) {
        None => Ok(CacheFile::compute(n)?),
        Some(dir) => match cache::load_or_compute(Some(&dir), n) {
            Ok(f) => Ok(f),
            Err(e @ (Error::Cache(_) | Error::Io(_))) => {
                warn(format!("cache unusable ({e}); recomputing"));
                Ok(CacheFile::compute(n)?)
            }
            Err(e) => Err(e.into()),
        },
    }
}

fn parse_class(text: &str) -> Result<GradedPoly, Failure> {
    parse_expr(text).map(|e| e.eval()).map_err(|e| match e {
        Error::Parse { offset, message } => {
            Failure::Usage(format!("syntax error at offset {offset}: {message}\n  {text}\n  {}^", " ".repeat(offset)))
        }
        e => e.into(),
    })
}

fn require_no_eval(g: &Global, cmd: &str) -> Result<(), Failure> {
    match g.eval {
        Some(_) => Err(Failure::Usage(format!("--eval is not used by '{cmd}'"))),
        None => Ok(()),
    }
}

fn section_table(file: &CacheFile, name: &str, key_header: &'static str) -> Table {
    let mut t = Table::new(&[key_header, "weight", "value"]);
    for e in &file.section(name).unwrap().entries {
        let w = e.value.homogeneous_weight().map_or("-".into(), |w| w.to_string());
        t.row(vec![e.key.clone(), w, e.value.to_string()]);
    }
    t
}

fn map_table(map: &ClassifyingMap) -> Table {
    let mut t = Table::new(&["generator", "image"]);
    for (g, img) in map.images() {
        t.row(vec![g.to_string(), img.to_string()]);
    }
    t
}

fn run(cli: Cli, out: &mut impl Write) -> Result<(), Failure> {
    let g = &cli.global;
    let n = g.max_degree;
    match cli.command {
        Command::Alpha => {
            require_no_eval(g, "alpha")?;
            section_table(&tables(g)?, "alpha", "i,j").emit(g.format, out)?;
        }
        Command::Pairing => {
            require_no_eval(g, "pairing")?;
            section_table(&tables(g)?, "pairing", "i,j").emit(g.format, out)?;
        }
        Command::Combinat { max_m } => {
            require_no_eval(g, "combinat")?;
            let mut t = Table::new(&["m", "d", "closed form", "D", "D/d", "d2"]);
            let opt = |r: Result<fglwb::arith::BigInt, Error>| r.map_or("-".to_string(), |v| v.to_string());
            for m in 1..=max_m {
                let dm = d(m)?;
                let ratio = big_d(m).map_or("-".to_string(), |v| (v / &dm).to_string());
                t.row(vec![
                    m.to_string(),
                    dm.to_string(),
                    d_closed_form(m).to_string(),
                    opt(big_d(m)),
                    ratio,
                    opt(d2(m)),
                ]);
            }
            t.emit(g.format, out)?;
        }
        Command::Genus { which, denominators } => {
            let map = match which {
                Genus::Schreieder => schreieder_genus(n)?,
                Genus::Kh => match tables(g)?.classifying_map("kh")? {
                    Some(m) => m,
                    None => kh_solve(n)?.map,
                },
                Genus::Buchstaber | Genus::Abelian => {
                    let name = if matches!(which, Genus::Buchstaber) { "buchstaber" } else { "abelian" };
                    tables(g)?
                        .classifying_map(name)?
                        .ok_or_else(|| Failure::Usage(format!("the {name} map needs a larger --max-degree")))?
                }
            };
            if let Some(text) = &g.eval {
                let cls = parse_class(text)?;
                let mut t = Table::new(&["class", "image"]);
                t.row(vec![cls.to_string(), map.eval(&cls)?.to_string()]);
                t.emit(g.format, out)?;
            } else if denominators {
                let mut t = Table::new(&["generator", "odd primes"]);
                for (k, ps) in odd_denominators(&map) {
                    let ps: Vec<String> = ps.iter().map(|p| p.to_string()).collect();
                    t.row(vec![format!("CP{k}"), if ps.is_empty() { "-".into() } else { ps.join(" ") }]);
                }
                t.emit(g.format, out)?;
            } else {
                map_table(&map).emit(g.format, out)?;
            }
        }
        Command::Su { action: SuAction::Generators } => {
            require_no_eval(g, "su generators")?;
            if n < 4 {
                return Err(Failure::Usage("SU generators need --max-degree >= 4".into()));
            }
            let f = tables(g)?.fgl_table()?;
            let low = build_x234(&f)?;
            let mut t = Table::new(&["name", "weight", "s", "novikov", "su", "class"]);
            let mut add = |name: String, k: u32, x: &GradedPoly, su: Option<bool>| -> Result<(), Failure> {
                let s = s_number_manifold(x)?;
                let nv = if s == fglwb::arith::rat_int(0) {
                    "-".to_string()
                } else {
                    novikov_admissible(k, &s)?.admissible.to_string()
                };
                let su = su.map_or("-".to_string(), |b| b.to_string());
                t.row(vec![name, k.to_string(), s.to_string(), nv, su, x.to_string()]);
                Ok(())
            };
            for (name, k, x) in [("x2", 2, &low.x2), ("x3", 3, &low.x3), ("x4", 4, &low.x4)] {
                add(name.into(), k, x, Some(su_check(x, n.max(4))?.passed()))?;
            }
            let w = w_coefficients(&f)?;
            for e in build_bk_xk(&f, &w, fglwb::su::DEFAULT_PARTITION_CAP)? {
                if e.k >= 5 {
                    add(format!("x{}", e.k), e.k, &e.x, e.su.as_ref().map(|r| r.passed()))?;
                }
            }
            t.emit(g.format, out)?;
        }
        Command::Su { action: SuAction::Check } => {
            let text = g.eval.as_ref().ok_or_else(|| Failure::Usage("su check needs --eval <expr>".into()))?;
            let cls = parse_class(text)?;
            let report = su_check(&cls, fglwb::su::DEFAULT_PARTITION_CAP)?;
            let mut t = Table::new(&["partition", "status", "value"]);
            for c in &report.checks {
                t.row(vec![c.name.clone(), if c.passed { "PASS" } else { "FAIL" }.into(), c.detail.clone()]);
            }
            t.emit(g.format, out)?;
            if !report.passed() {
                return Err(Failure::Verify);
            }
        }
        Command::Chern { manifold, partition } => {
            let text = match (&manifold, &g.eval) {
                (Some(m), None) | (None, Some(m)) => m,
                (Some(_), Some(_)) => {
                    return Err(Failure::Usage("give the class with either --manifold or --eval".into()))
                }
                (None, None) => return Err(Failure::Usage("chern needs --manifold <expr>".into())),
            };
            let cls = parse_class(text)?;
            let w = cls
                .homogeneous_weight()
                .ok_or_else(|| Failure::Usage("the class must be homogeneous of positive weight".into()))?;
            let parts = match partition {
                Some(p) => vec![p.parse::<Partition>()?],
                None => partitions(w),
            };
            let mut t = Table::new(&["partition", "value"]);
            for p in parts {
                t.row(vec![p.label(), chern_number(&cls, &p)?.to_string()]);
            }
            t.emit(g.format, out)?;
        }
        Command::Verify { suite } => {
            require_no_eval(g, "verify")?;
            let suite: Suite = suite.parse()?;
            let reports = run_verify(suite, n, cache_dir(g).as_deref())?;
            let ok = reports.iter().all(|r| r.passed());
            match g.format {
                Format::Table => {
                    for r in &reports {
                        writeln!(out, "{r}")?;
                    }
                    let (p, total) =
                        reports.iter().flat_map(|r| &r.checks).fold((0, 0), |(p, t), c| (p + c.passed as usize, t + 1));
                    writeln!(out, "{p}/{total} checks passed")?;
                }
                fmt => {
                    let mut t = Table::new(&["report", "check", "status", "detail"]);
                    for r in &reports {
                        for c in &r.checks {
                            t.row(vec![
                                r.title.clone(),
                                c.name.clone(),
                                if c.passed { "PASS" } else { "FAIL" }.into(),
                                c.detail.clone(),
                            ]);
                        }
                        for note in &r.notes {
                            t.row(vec![r.title.clone(), String::new(), "NOTE".into(), note.clone()]);
                        }
                    }
                    t.emit(fmt, out)?;
                }
            }
            if !ok {
                return Err(Failure::Verify);
            }
        }
        Command::Cache { action } => {
            require_no_eval(g, "cache")?;
            let dir =
                cache::cache_dir().ok_or_else(|| Failure::Io("no cache directory (set FGLWB_CACHE_DIR)".into()))?;
            match action {
                CacheAction::Info => {
                    writeln!(out, "directory: {}", dir.display())?;
                    let mut t = Table::new(&["file", "max-degree", "status"]);
                    for (m, path) in cache::list(&dir)? {
                        let status = match cache::load(&path) {
                            Ok(_) => "valid".to_string(),
                            Err(e) => format!("invalid: {e}"),
                        };
                        t.row(vec![path.file_name().unwrap().to_string_lossy().into_owned(), m.to_string(), status]);
                    }
                    t.emit(g.format, out)?;
                }
                CacheAction::Clear => {
                    let removed = cache::clear(&dir)?;
                    writeln!(out, "removed {removed} file(s) from {}", dir.display())?;
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out) {
        Ok(()) | Err(Failure::ClosedPipe) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Inconsistent(m)) => {
            eprintln!("fglwb: consistency check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("fglwb: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Io(m)) => {
            eprintln!("fglwb: {m}");
            ExitCode::from(3)
        }
    }
}
