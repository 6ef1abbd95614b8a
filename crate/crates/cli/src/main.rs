//! `caylex`: run capacity scans, harmonic splits, isoperimetric searches and
//! the verification suites from the command line.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use caylex::dirichlet::RoydenSource;
use caylex::experiment::{
    run, write_report, ExperimentConfig, ExperimentReport, Format, Operation, RadiusSchedule,
};
use caylex::geometry::Strategy;
use caylex::Error;
use clap::{Args, Parser, Subcommand};

/// Exit status for a verification suite that found a counterexample.
const SUITE_FAILURE: u8 = 1;

#[derive(Parser, Debug)]
#[command(
    name = "caylex",
    version,
    about = "Discrete potential theory on Cayley graphs"
)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Largest ball, in vertices, any operation may build.
    #[arg(long, global = true, env = "CAYLEX_MAX_VERTICES")]
    max_vertices: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,

    /// json or csv; inferred from the --out extension when omitted.
    #[arg(long, value_parser = parse::<Format>)]
    format: Option<Format>,
}

#[derive(Args, Debug)]
struct SolverArgs {
    /// Use the accelerated first-order method instead of Newton for p != 2.
    #[arg(long)]
    accelerated: bool,

    /// Stopping rule `|grad E| <= tol (1 + E)` for p != 2.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Vertex count and sphere sizes of a word-metric ball.
    Ball {
        #[arg(long)]
        group: String,
        #[arg(long)]
        radius: u32,
        /// Include the full neighbour table.
        #[arg(long)]
        with_neighbors: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Capacities cap_p(e, R) over a radius schedule, with a verdict.
    Capacity {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// start:stop[:*factor|:+step]
        #[arg(long, value_parser = parse::<RadiusSchedule>)]
        radii: RadiusSchedule,
        /// Also extract the null sequence (parabolic scans only).
        #[arg(long)]
        null_sequence: bool,
        #[arg(long)]
        theta_small: Option<f64>,
        #[arg(long)]
        theta_large: Option<f64>,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Harmonic extensions of a named source from each sphere.
    Royden {
        #[arg(long)]
        group: String,
        /// green-like, coordinate, end-separating or constant.
        #[arg(long, value_parser = parse::<RoydenSource>)]
        source: RoydenSource,
        #[arg(long, value_parser = parse::<RadiusSchedule>)]
        radii: RadiusSchedule,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Isoperimetric profile min |boundary A| over |A| = n.
    Iso {
        #[arg(long)]
        group: String,
        #[arg(long = "nmax")]
        n_max: usize,
        /// exhaustive, greedy or ball-family.
        #[arg(long, value_parser = parse::<Strategy>, default_value = "exhaustive")]
        strategy: Strategy,
        /// Also fit the constant in |A|^((d-1)/d) <= C |boundary A|.
        #[arg(long)]
        d: Option<f64>,
        /// Cap on connected sets visited by the exhaustive search.
        #[arg(long)]
        budget: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Empirical constant in the d-dimensional Sobolev inequality.
    Sobolev {
        #[arg(long)]
        group: String,
        #[arg(long)]
        d: Option<f64>,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        /// Support radius of the test functions.
        #[arg(long, default_value_t = 8)]
        radius: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Both sides of the power rule for alpha^t.
    Lemma61 {
        #[arg(long)]
        group: String,
        /// Formal sum file; the point mass at the identity when omitted.
        #[arg(long)]
        alpha: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        #[command(flatten)]
        output: Output,
    },
    /// The pairing of two formal sums and its Hoelder bound.
    Pairing {
        #[arg(long)]
        group: String,
        #[arg(long)]
        alpha: PathBuf,
        #[arg(long)]
        beta: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Seeded property suites; prints a summary and fails on a counterexample.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the full report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment described by a TOML or JSON config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path; the format follows its extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl SolverArgs {
    fn apply(&self, config: &mut ExperimentConfig) {
        config.solver.accelerated = self.accelerated;
        if let Some(t) = self.tolerance {
            config.solver.gradient_tolerance = t;
        }
    }
}

impl Output {
    fn apply(self, config: &mut ExperimentConfig) {
        if let Some(f) = self.format {
            config.format = f;
        } else if let Some(path) = &self.out {
            config.format = Format::from_path(path);
        }
        config.output = self.out;
    }
}

fn build_config(command: Command) -> Result<ExperimentConfig, Error> {
    let config = match command {
        Command::Ball {
            group,
            radius,
            with_neighbors,
            output,
        } => {
            let mut c = ExperimentConfig::new(Operation::Ball);
            c.group = Some(group);
            c.radius = Some(radius);
            c.with_neighbors = with_neighbors;
            output.apply(&mut c);
            c
        }
        Command::Capacity {
            group,
            p,
            radii,
            null_sequence,
            theta_small,
            theta_large,
            solver,
            output,
        } => {
            let mut c = ExperimentConfig::new(Operation::Capacity);
            c.group = Some(group);
            c.p = Some(p);
            c.radii = Some(radii);
            c.null_sequence = null_sequence;
            if let Some(t) = theta_small {
                c.thresholds.small = t;
            }
            if let Some(t) = theta_large {
                c.thresholds.large = t;
            }
            solver.apply(&mut c);
            output.apply(&mut c);
            c
        }
        Command::Royden {
            group,
            source,
            radii,
            solver,
            output,
        } => {
            let mut c = ExperimentConfig::new(Operation::Royden);
            c.group = Some(group);
            c.source = Some(source);
            c.radii = Some(radii);
            solver.apply(&mut c);
            output.apply(&mut c);
            c
        }
        Command::Iso {
            group,
            n_max,
            strategy,
            d,
            budget,
            output,
        } => {
            let mut c = ExperimentConfig::new(Operation::Iso);
            c.group = Some(group);
            c.n_max = Some(n_max);
            c.strategy = Some(strategy);
            c.d = d;
            c.budget = budget;
            output.apply(&mut c);
            c
        }
        Command::Sobolev {
            group,
            d,
            samples,
            radius,
            seed,
            output,
        } => {
            let mut c = ExperimentConfig::new(Operation::Sobolev);
            c.group = Some(group);
            c.d = d;
            c.samples = Some(samples);
            c.radius = Some(radius);
            c.seed = seed;
            output.apply(&mut c);
            c
        }
        Command::Lemma61 {
            group,
            alpha,
            t,
            output,
        } => {
            let mut c = ExperimentConfig::new(Operation::Lemma61);
            c.group = Some(group);
            c.alpha = alpha;
            c.t = Some(t);
            output.apply(&mut c);
            c
        }
        Command::Pairing {
            group,
            alpha,
            beta,
            p,
            output,
        } => {
            let mut c = ExperimentConfig::new(Operation::Pairing);
            c.group = Some(group);
            c.alpha = Some(alpha);
            c.beta = Some(beta);
            c.p = Some(p);
            output.apply(&mut c);
            c
        }
        Command::Verify { suite, seed, out } => {
            let mut c = ExperimentConfig::new(Operation::Verify);
            c.suite = Some(suite);
            c.seed = seed;
            c.output = out;
            c
        }
        Command::Run { config, out } => {
            let mut c = ExperimentConfig::load(&config)?;
            if let Some(out) = out {
                c.format = Format::from_path(&out);
                c.output = Some(out);
            }
            c
        }
    };
    Ok(config)
}

/// Machine-readable error record on standard error.
fn report_error(e: &Error) -> ExitCode {
    let code = e.exit_code();
    let record = serde_json::json!({
        "error": {
            "kind": e.kind(),
            "message": e.to_string(),
            "exit_code": code,
        }
    });
    eprintln!("{record}");
    ExitCode::from(code as u8)
}

fn emit(report: &ExperimentReport) -> Result<(), Error> {
    let config = &report.config;
    if let Some(path) = &config.output {
        return write_report(report, path, config.format);
    }
    let text = if config.operation == Operation::Verify {
        match &report.payload {
            caylex::experiment::Payload::Verify(v) => v.render(),
            _ => unreachable!("verify config yields a verify payload"),
        }
    } else {
        report.render(config.format)?
    };
    let mut stdout = std::io::stdout().lock();
    stdout.write_all(text.as_bytes())?;
    stdout.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            return report_error(&Error::InvalidParameter(
                "--workers must be positive".into(),
            ));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            return report_error(&Error::InvalidParameter(e.to_string()));
        }
    }
    let mut config = match build_config(cli.command) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    if cli.max_vertices.is_some() {
        config.max_vertices = cli.max_vertices;
    }
    let report = match run(&config) {
        Ok(r) => r,
        Err(e) => return report_error(&e),
    };
    // verify prints its summary even when it also writes a file
    if config.operation == Operation::Verify && config.output.is_some() {
        if let caylex::experiment::Payload::Verify(v) = &report.payload {
            print!("{}", v.render());
        }
    }
    if let Err(e) = emit(&report) {
        return report_error(&e);
    }
    if let Some(cut) = report.cutoff() {
        let budget = config.budget.unwrap_or(caylex::geometry::DEFAULT_BUDGET);
        eprintln!("partial profile: {}", cut.reason);
        return report_error(&Error::BudgetExceeded { budget });
    }
    if report.suite_failed() {
        return ExitCode::from(SUITE_FAILURE);
    }
    ExitCode::SUCCESS
}
