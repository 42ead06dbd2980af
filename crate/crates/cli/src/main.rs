//! `relaydof`: command-line front end for relay-dof.
//!
//! Exit codes: 0 success or feasible, 1 negative verdict, 2 input error,
//! 3 internal verification failure.

use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use relay_dof::num::decimal6;
use relay_dof::region::check_demand;
use relay_dof::schedule::{integer_schedule, integer_schedule_for, verify_schedule};
use relay_dof::{
    analyze, classify, validate_demand, ExactDemand, ExactReport, ExtRational, FamilySpec,
    NetworkTopology, Rational,
};

#[derive(Parser, Debug)]
#[command(name = "relaydof", version, about = "Exact DoF bounds and schedules for layered relay networks")]
struct Cli {
    /// Render rationals as 6-significant-digit decimals (table and CSV output).
    #[arg(long, global = true)]
    decimal: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Achievable and cut-set bounds, gaps and optimality of topologies.
    Analyze {
        #[arg(required = true)]
        topologies: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        format: ReportFormat,
    },
    /// Check a demand matrix against the achievable region.
    Check {
        topology: PathBuf,
        demand: PathBuf,
        #[arg(long, value_enum, default_value_t = VerdictFormat::Json)]
        format: VerdictFormat,
    },
    /// Integer phase schedule and split plan.
    Schedule {
        topology: PathBuf,
        #[arg(long)]
        demand: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ScheduleFormat::Json)]
        format: ScheduleFormat,
    },
    /// Sample a topology family and print its samples (CSV) and scaling law.
    Classify { family: PathBuf },
    /// Sample a topology family, write the samples to a CSV file and print the scaling law.
    Sweep {
        family: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ReportFormat {
    Table,
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum VerdictFormat {
    Json,
    Table,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ScheduleFormat {
    Json,
    Dot,
}

/// Terminates with the given exit code after printing a diagnostic.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_topology(path: &Path) -> Result<NetworkTopology, Failure> {
    NetworkTopology::from_json(&read(path)?).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_demand(path: &Path, t: &NetworkTopology) -> Result<ExactDemand, Failure> {
    let d = ExactDemand::from_json(&read(path)?)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    validate_demand(t, &d).map_err(|issues| {
        let text: Vec<String> = issues.iter().map(ToString::to_string).collect();
        input_error(format!("{}: {}", path.display(), text.join("; ")))
    })?;
    Ok(d)
}

struct Style {
    decimal: bool,
    bold: bool,
}

impl Style {
    fn value(&self, v: &ExtRational) -> String {
        if self.decimal {
            decimal6(v.to_f64_lossy())
        } else {
            v.to_string()
        }
    }

    fn rational(&self, v: &Rational) -> String {
        self.value(&ExtRational::Finite(v.clone()))
    }

    fn opt(&self, v: &Option<ExtRational>) -> String {
        v.as_ref().map_or_else(|| "-".to_string(), |v| self.value(v))
    }

    fn list(&self, v: &[ExtRational]) -> String {
        v.iter().map(|x| self.value(x)).collect::<Vec<_>>().join(", ")
    }

    fn key(&self, k: &str) -> String {
        if self.bold {
            format!("\x1b[1m{k:<22}\x1b[0m")
        } else {
            format!("{k:<22}")
        }
    }
}

fn report_table(style: &Style, t: &NetworkTopology, r: &ExactReport) -> String {
    let set: Vec<String> = r.bounding_set.iter().map(ToString::to_string).collect();
    let sizes: Vec<String> = r.sizes.iter().map(ToString::to_string).collect();
    let rows = [
        ("topology", t.to_string()),
        ("effective sizes", format!("[{}]", sizes.join(","))),
        ("alpha", style.value(&r.alpha)),
        ("alpha_k", style.list(&r.alpha_k)),
        ("beta", style.value(&r.beta)),
        ("beta_k", style.list(&r.beta_k)),
        ("inverse gap", style.value(&r.inverse_gap.exact)),
        ("inverse gap bound 1", style.value(&r.inverse_gap.bound1)),
        ("inverse gap bound 2", style.value(&r.inverse_gap.bound2)),
        ("absolute gap", style.opt(&r.absolute_gap)),
        ("fractional gap bound", style.opt(&r.fractional_gap_bound)),
        ("bounding hops", format!("{{{}}}", set.join(","))),
        ("optimal", r.optimal.to_string()),
        ("ultimate capacity", style.opt(&r.ultimate_capacity)),
        ("gamma", style.opt(&r.gamma)),
    ];
    rows.iter().map(|(k, v)| format!("{}{v}\n", style.key(k))).collect()
}

const CSV_HEADER: &str = "topology,alpha,beta,inverse_gap,inverse_gap_bound1,inverse_gap_bound2,\
absolute_gap,fractional_gap_bound,optimal,ultimate_capacity,gamma";

fn report_csv(style: &Style, t: &NetworkTopology, r: &ExactReport) -> String {
    format!(
        "\"{t}\",{},{},{},{},{},{},{},{},{},{}",
        style.value(&r.alpha),
        style.value(&r.beta),
        style.value(&r.inverse_gap.exact),
        style.value(&r.inverse_gap.bound1),
        style.value(&r.inverse_gap.bound2),
        style.opt(&r.absolute_gap),
        style.opt(&r.fractional_gap_bound),
        r.optimal,
        style.opt(&r.ultimate_capacity),
        style.opt(&r.gamma),
    )
}

fn cmd_analyze(style: &Style, paths: &[PathBuf], format: ReportFormat) -> Result<u8, Failure> {
    let mut loaded = Vec::with_capacity(paths.len());
    for p in paths {
        let t = load_topology(p)?;
        let r = analyze::<Rational>(&t);
        loaded.push((t, r));
    }
    match format {
        ReportFormat::Table => {
            let tables: Vec<String> = loaded.iter().map(|(t, r)| report_table(style, t, r)).collect();
            print!("{}", tables.join("\n"));
        }
        ReportFormat::Json => {
            let reports: Vec<&ExactReport> = loaded.iter().map(|(_, r)| r).collect();
            let out = if reports.len() == 1 {
                serde_json::to_string_pretty(reports[0])
            } else {
                serde_json::to_string_pretty(&reports)
            };
            println!("{}", out.expect("report serializes"));
        }
        ReportFormat::Csv => {
            println!("{CSV_HEADER}");
            for (t, r) in &loaded {
                println!("{}", report_csv(style, t, r));
            }
        }
    }
    Ok(0)
}

fn cmd_check(style: &Style, topology: &Path, demand: &Path, format: VerdictFormat) -> Result<u8, Failure> {
    let t = load_topology(topology)?;
    let d = load_demand(demand, &t)?;
    let verdict = check_demand(&t, &d).map_err(|e| input_error(e.to_string()))?;
    match format {
        VerdictFormat::Json => {
            println!("{}", serde_json::to_string(&verdict).expect("verdict serializes"));
        }
        VerdictFormat::Table => {
            println!("{}{}", style.key("feasible"), verdict.feasible);
            for v in &verdict.violations {
                println!(
                    "{}{} > {}",
                    style.key(&format!("violated {}", v.constraint)),
                    style.rational(&v.lhs),
                    style.rational(&v.rhs)
                );
            }
            println!("{}{}", style.key("binding"), verdict.binding.join(", "));
        }
    }
    Ok(if verdict.feasible { 0 } else { 1 })
}

fn cmd_schedule(topology: &Path, demand: Option<&Path>, format: ScheduleFormat) -> Result<u8, Failure> {
    let t = load_topology(topology)?;
    let schedule = match demand {
        Some(p) => {
            let d = load_demand(p, &t)?;
            integer_schedule_for(&t, &d)
        }
        None => integer_schedule(&t),
    }
    .map_err(|e| input_error(e.to_string()))?;
    let report = verify_schedule(&schedule);
    if !report.all_passed() {
        let failed: Vec<String> =
            report.failures().map(|c| format!("{}: {}", c.name, c.detail)).collect();
        return Err(Failure { code: 3, message: format!("schedule verification failed: {}", failed.join("; ")) });
    }
    match format {
        ScheduleFormat::Json => {
            let mut v = schedule.to_json();
            v["verified_checks"] = report.checks.len().into();
            println!("{}", serde_json::to_string_pretty(&v).expect("schedule serializes"));
        }
        ScheduleFormat::Dot => print!("{}", schedule.split_plan.to_dot()),
    }
    Ok(0)
}

fn run_classification(family: &Path) -> Result<relay_dof::ScalingVerdict, Failure> {
    let spec = FamilySpec::from_json(&read(family)?)
        .map_err(|e| input_error(format!("{}: {e}", family.display())))?;
    classify(&spec).map_err(|e| input_error(e.to_string()))
}

fn verdict_code(v: &relay_dof::ScalingVerdict) -> u8 {
    if v.class.is_some() {
        0
    } else {
        1
    }
}

fn cmd_classify(family: &Path) -> Result<u8, Failure> {
    let verdict = run_classification(family)?;
    print!("{}", verdict.to_csv());
    println!("{}", verdict.summary());
    Ok(verdict_code(&verdict))
}

fn cmd_sweep(family: &Path, out: &Path) -> Result<u8, Failure> {
    let verdict = run_classification(family)?;
    fs::write(out, verdict.to_csv()).map_err(|e| input_error(format!("{}: {e}", out.display())))?;
    println!("{}", verdict.summary());
    Ok(verdict_code(&verdict))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style {
        decimal: cli.decimal,
        bold: std::env::var_os("NO_COLOR").is_none() && std::io::stdout().is_terminal(),
    };
    let result = match &cli.command {
        Command::Analyze { topologies, format } => cmd_analyze(&style, topologies, *format),
        Command::Check { topology, demand, format } => cmd_check(&style, topology, demand, *format),
        Command::Schedule { topology, demand, format } => {
            cmd_schedule(topology, demand.as_deref(), *format)
        }
        Command::Classify { family } => cmd_classify(family),
        Command::Sweep { family, out } => cmd_sweep(family, out),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
