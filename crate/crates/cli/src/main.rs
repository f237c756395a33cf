mod args;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use args::{Command, OnOff, ParseFailure, RunArgs, SchemeArgs};
use cweno::harness::{
    convergence_table, disc_scan_table, property_r_table, run_convergence, run_disc_scan, run_named_test,
    run_property_r, run_well_balance, well_balance_table, Options, ScanOptions, Table, TestId,
};
use cweno::solver::{ButcherTableau, Integrator};
use cweno::{Error, Parallelism};

/// Failure of a command, mapped to the process exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonFinite { .. } | Error::InvalidState(_) | Error::SingularPoint(_) => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match args::parse(std::env::args_os().collect()) {
        Ok(cli) => cli,
        Err(ParseFailure::Clap(e)) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
        Err(ParseFailure::Config(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Outcome<()> {
    match command {
        Command::Convergence { scheme, run } => {
            let opts = options(&scheme, Some(&run))?;
            let test = resolve_test(&run)?.unwrap_or(TestId::AdvectLow);
            let ns = if run.n.is_empty() { default_convergence_ns(test) } else { run.n.clone() };
            let rows = run_convergence(test, &ns, &opts)?;
            for r in &rows {
                eprintln!("N = {:5}  error = {:.3e}  {:.2} s", r.n, r.error, r.seconds);
            }
            emit(&[convergence_table(test, &rows, &opts)?], scheme.out.as_deref())
        }
        Command::Solve { scheme, run } => {
            let opts = options(&scheme, Some(&run))?;
            let test = resolve_test(&run)?.unwrap_or(TestId::Burgers);
            let n = single(&run.n, "--N")?;
            let out = run_named_test(test, n, &opts)?;
            eprintln!("{}: {} steps, {:.2} s", test, out.stats.steps, out.seconds);
            emit(&out.tables(), scheme.out.as_deref())
        }
        Command::Wellbalance { scheme, run } => {
            if let Some(t) = resolve_test(&run)?.filter(|&t| t != TestId::LakeAtRest) {
                return Err(Failure::Usage(format!("wellbalance runs lake_at_rest, not {t}")));
            }
            let opts = options(&scheme, Some(&run))?;
            let orders = or_default(&scheme.order, &[3, 5, 7, 9]);
            let ns = or_default(&run.n, &[100, 200, 400]);
            let mut reports = Vec::new();
            for &order in &orders {
                for &n in &ns {
                    let r = run_well_balance(n, &Options { order, ..opts.clone() })?;
                    eprintln!("order {order} N = {n}: max |q| = {:.3e}", r.max_discharge);
                    reports.push(r);
                }
            }
            emit(&[well_balance_table(&reports, &opts)], scheme.out.as_deref())
        }
        Command::Discscan { scheme } => {
            configure_threads(scheme.threads)?;
            let order = single(&scheme.order, "--order")?.unwrap_or(3);
            let d0s = or_default(&scheme.d0, &[0.5, 0.75, 0.9]);
            let ds: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
            let so = scan_options(&scheme);
            let rows = run_disc_scan(order, &d0s, &ds, &so)?;
            emit(&[disc_scan_table(order, &rows, &so)], scheme.out.as_deref())
        }
        Command::PropertyR { scheme, n } => {
            configure_threads(scheme.threads)?;
            let orders = or_default(&scheme.order, &[3, 5, 7, 9]);
            let d0s = or_default(&scheme.d0, &[0.1, 0.5, 0.9]);
            let ns = or_default(&n, &[8, 16, 32, 64, 128, 256, 512, 1024]);
            if ns.contains(&0) {
                return Err(Failure::Usage("--N must be positive".into()));
            }
            let hs: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
            let so = scan_options(&scheme);
            let rows = run_property_r(&orders, &d0s, &hs, &so)?;
            emit(&[property_r_table(&rows, &so)], scheme.out.as_deref())
        }
    }
}

fn or_default<T: Clone>(given: &[T], default: &[T]) -> Vec<T> {
    if given.is_empty() { default.to_vec() } else { given.to_vec() }
}

fn single<T: Copy>(values: &[T], flag: &str) -> Outcome<Option<T>> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(Failure::Usage(format!("{flag} takes a single value here"))),
    }
}

fn default_convergence_ns(test: TestId) -> Vec<usize> {
    match test {
        TestId::SweSmooth => vec![16, 32, 64, 128, 256],
        _ => vec![40, 80, 160, 320, 640],
    }
}

/// The test named by `--test`, or the first test of `--model`; both must
/// agree when given together.
fn resolve_test(run: &RunArgs) -> Outcome<Option<TestId>> {
    let Some(model) = run.model.as_deref() else { return Ok(run.test) };
    let model = model.replace('-', "_");
    let known: Vec<&str> = TestId::ALL.iter().map(|t| t.model_name()).collect();
    if !known.contains(&model.as_str()) {
        return Err(Failure::Usage(format!("unknown model `{model}`")));
    }
    match run.test {
        Some(t) if t.model_name() != model => {
            Err(Failure::Usage(format!("test {t} solves the {} model, not {model}", t.model_name())))
        }
        Some(t) => Ok(Some(t)),
        None => Ok(TestId::ALL.into_iter().find(|t| t.model_name() == model)),
    }
}

fn options(scheme: &SchemeArgs, run: Option<&RunArgs>) -> Outcome<Options> {
    let mut o = Options { parallelism: configure_threads(scheme.threads)?, ..Options::default() };
    if let Some(order) = single(&scheme.order, "--order")? {
        o.order = order;
    }
    if let Some(d0) = single(&scheme.d0, "--d0")? {
        o.d0 = d0;
    }
    o.eps_hat = scheme.eps_hat.unwrap_or(o.eps_hat);
    o.eps_power = scheme.eps_power.unwrap_or(o.eps_power);
    o.t_exp = scheme.t_exp.unwrap_or(o.t_exp);
    if let Some(run) = run {
        o.cfl = run.cfl;
        o.char_proj = run.char_proj.map(OnOff::is_on);
        o.well_balanced = run.wb.map(OnOff::is_on);
        o.t_end = run.tend;
        o.seed = run.seed.unwrap_or(o.seed);
        o.grid = run.grid.unwrap_or(o.grid);
        o.quadrature = run.quad.unwrap_or(o.quadrature);
        o.gravity = run.gravity;
        o.reference_order = run.ref_order.unwrap_or(o.reference_order);
        o.reference_n = run.ref_n.unwrap_or(o.reference_n);
        o.integrator = match (&run.tableau, &run.integrator) {
            (Some(path), _) => Some(Integrator::Tableau(ButcherTableau::from_file(path)?)),
            (None, i) => i.clone(),
        };
    }
    o.cweno()?;
    Ok(o)
}

fn scan_options(scheme: &SchemeArgs) -> ScanOptions {
    let d = ScanOptions::default();
    ScanOptions {
        eps_hat: scheme.eps_hat.unwrap_or(d.eps_hat),
        eps_power: scheme.eps_power.unwrap_or(d.eps_power),
        t_exp: scheme.t_exp.unwrap_or(d.t_exp),
        ..d
    }
}

fn configure_threads(threads: Option<usize>) -> Outcome<Parallelism> {
    match threads {
        None => Ok(Parallelism::Parallel),
        Some(0) => Err(Failure::Usage("--threads must be positive".into())),
        Some(1) => Ok(Parallelism::Sequential),
        Some(_n) => {
            #[cfg(feature = "parallel")]
            rayon::ThreadPoolBuilder::new()
                .num_threads(_n)
                .build_global()
                .map_err(|e| Failure::Usage(format!("thread pool: {e}")))?;
            Ok(Parallelism::Parallel)
        }
    }
}

/// Writes the tables to `out`, or to standard output one after another.
/// Several tables with an output path go to `<stem>_<k>.<ext>`.
fn emit(tables: &[Table], out: Option<&Path>) -> Outcome<()> {
    let io = |e: std::io::Error| Failure::Usage(format!("writing output: {e}"));
    match out {
        None => {
            let mut text = String::new();
            for t in tables {
                text.push_str(&t.to_csv_string());
            }
            let mut lock = std::io::stdout().lock();
            match lock.write_all(text.as_bytes()).and_then(|_| lock.flush()) {
                // a closed pipe (`| head`) is not a failure of the run
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(io),
            }
        }
        Some(path) if tables.len() == 1 => Ok(tables[0].save(path)?),
        Some(path) => {
            for (k, t) in tables.iter().enumerate() {
                t.save(&numbered(path, k))?;
            }
            Ok(())
        }
    }
}

fn numbered(path: &Path, k: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}_{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{k}"),
    };
    path.with_file_name(name)
}
