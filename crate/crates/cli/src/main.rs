use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use hdrelay_core::gaussian::{
    gap_certificate, parse_network, random_layout, random_network, sweep_line, to_csv, to_json, RandomSpec,
};
use hdrelay_core::lp::{solve_full_lp, FULL_LP_LIMIT};
use hdrelay_core::model::check_submodular;
use hdrelay_core::scheduler::{solve_saddle, verify_schedule, SolveOptions};
use hdrelay_core::{CutSet, CutValueTable, Error, NetworkSpec, RelayState, SolveResult, Switching};

#[derive(Parser)]
#[command(name = "hdrelay", version, about = "Simple schedules for half-duplex relay networks")]
struct Cli {
    /// Print solver progress to stderr.
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal simple schedule of a network file.
    Solve {
        network: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write the offending network when the certificate fails.
        #[arg(long, default_value = "hdrelay-witness.json")]
        witness: PathBuf,
    },
    /// Exact value from the full LP over all cuts (at most 10 relays).
    Oracle {
        network: PathBuf,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line network with one two-antenna relay over a log-spaced gain grid.
    SweepLine {
        #[arg(long)]
        gamma_min: f64,
        #[arg(long)]
        gamma_max: f64,
        #[arg(long)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Property suite on random networks.
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "hdrelay-witness.json")]
        witness: PathBuf,
    },
    /// Random network with CN(0, 1) gains.
    GenRandom {
        #[arg(long)]
        n: usize,
        /// One count for every relay, or a comma-separated count per relay.
        #[arg(long, default_value = "1")]
        antennas: String,
        #[arg(long, default_value_t = 1)]
        m_source: usize,
        #[arg(long, default_value_t = 1)]
        m_dest: usize,
        #[arg(long, value_enum, default_value = "independent")]
        switching: SwitchingArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Submodularity,
    Gap,
    Sparsity,
}

#[derive(Clone, Copy, ValueEnum)]
enum SwitchingArg {
    Lockstep,
    Independent,
}

impl From<SwitchingArg> for Switching {
    fn from(s: SwitchingArg) -> Self {
        match s {
            SwitchingArg::Lockstep => Switching::Lockstep,
            SwitchingArg::Independent => Switching::Independent,
        }
    }
}

enum Failure {
    Input(String),
    Certificate { message: String, witness: String },
    Refused(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Certificate { message, witness } => Failure::Certificate { message, witness },
            Error::Schema { .. } | Error::InvalidInput(_) | Error::InvalidState(_) | Error::Json(_) => {
                Failure::Input(e.to_string())
            }
            e => Failure::Certificate {
                message: e.to_string(),
                witness: String::new(),
            },
        }
    }
}

type CmdResult = Result<(), Failure>;

fn emit(out: Option<&Path>, text: &str) -> CmdResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_network(path: &Path) -> Result<NetworkSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    parse_network(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn cut_json(c: CutSet) -> Value {
    json!(c.relays())
}

fn solve_json(net: &NetworkSpec, r: &SolveResult) -> Value {
    let bits = net.layout().state_bits();
    let schedule: Vec<Value> = r
        .schedule
        .support()
        .iter()
        .map(|&s| {
            let state = RelayState::new(s, bits).expect("state in range");
            json!({ "state_bits": state.to_string(), "prob": r.schedule.prob(s) })
        })
        .collect();
    json!({
        "rate_bits": r.rate,
        "schedule": schedule,
        "tight_cuts": r.tight_cuts.iter().map(|&c| cut_json(c)).collect::<Vec<_>>(),
        "iterations": r.iterations,
        "certificate": {
            "min_cut_value_at_schedule": r.certificate.min_cut_value_at_schedule,
            "worst_cut": cut_json(r.certificate.worst_cut),
            "gap_to_master": r.certificate.gap_to_master,
            "passed": r.certificate.passed,
        },
        "route": format!("{:?}", r.route),
        "diagnostic": r.diagnostic,
    })
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}

fn solve(net: &NetworkSpec, tol: f64, verbose: bool) -> Result<SolveResult, Failure> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::Input(format!("--tol {tol} must lie in (0, 1)")));
    }
    let table = CutValueTable::from_network(net)?;
    let opts = SolveOptions {
        tol,
        ..SolveOptions::default()
    };
    let r = solve_saddle(&table, &opts)?;
    if verbose {
        for (k, step) in r.trace.iter().enumerate() {
            eprintln!(
                "iteration {k}: master {:.10} violation {:.3e}{}",
                step.master_value,
                step.violation,
                step.violated_cut.map(|c| format!(" cut {c}")).unwrap_or_default()
            );
        }
        eprintln!("extraction: {:?}", r.route);
    }
    Ok(r)
}

fn cmd_solve(network: &Path, tol: f64, out: Option<&Path>, witness: &Path, verbose: bool) -> CmdResult {
    let net = read_network(network)?;
    let r = match solve(&net, tol, verbose) {
        Ok(r) => r,
        Err(Failure::Certificate { message, .. }) => {
            return write_witness(
                witness,
                Failure::Certificate {
                    message,
                    witness: to_json(&net),
                },
            )
        }
        Err(f) => return Err(f),
    };
    emit(out, &pretty(&solve_json(&net, &r)))?;
    if !r.certificate.passed {
        let f = Failure::Certificate {
            message: format!(
                "schedule achieves {} against master value {} (worst cut {})",
                r.certificate.min_cut_value_at_schedule, r.rate, r.certificate.worst_cut
            ),
            witness: to_json(&net),
        };
        return write_witness(witness, f);
    }
    Ok(())
}

fn write_witness(path: &Path, f: Failure) -> CmdResult {
    if let Failure::Certificate { witness, .. } = &f {
        if !witness.is_empty() {
            fs::write(path, witness).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            eprintln!("witness written to {}", path.display());
        }
    }
    Err(f)
}

fn cmd_oracle(network: &Path, tol: f64, out: Option<&Path>, verbose: bool) -> CmdResult {
    let net = read_network(network)?;
    if net.n_relays() > FULL_LP_LIMIT {
        return Err(Failure::Refused(format!(
            "exact oracle handles at most {FULL_LP_LIMIT} relays, file has {}",
            net.n_relays()
        )));
    }
    let table = CutValueTable::from_network(&net)?;
    let exact = solve_full_lp(&table)?;
    let r = solve(&net, tol, verbose)?;
    let matches = (exact.c_prime - r.rate).abs() <= 1e-6;
    let v = json!({
        "c_prime_exact": exact.c_prime,
        "solver_rate": r.rate,
        "matches_solver": matches,
    });
    emit(out, &pretty(&v))
}

fn cmd_sweep(gamma_min: f64, gamma_max: f64, points: usize, out: Option<&Path>) -> CmdResult {
    let single = points == 1 && gamma_min == gamma_max;
    if !single && (points < 2 || !(gamma_min > 0.0 && gamma_min < gamma_max)) {
        return Err(Failure::Input(format!(
            "need 0 < gamma-min < gamma-max and at least 2 points, got [{gamma_min}, {gamma_max}] with {points}"
        )));
    }
    let rows = sweep_line(gamma_min, gamma_max, points)?;
    emit(out, &to_csv(&rows))
}

fn parse_antennas(text: &str, n: usize) -> Result<Vec<usize>, Failure> {
    let counts = text
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Input(format!("--antennas {text:?}: {e}")))?;
    match counts.len() {
        1 => Ok(vec![counts[0]; n]),
        k if k == n => Ok(counts),
        k => Err(Failure::Input(format!("--antennas lists {k} counts for {n} relays"))),
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(1_000_003).wrapping_add(trial as u64)
}

fn cmd_verify(suite: Suite, n: usize, trials: usize, seed: u64, witness: &Path) -> CmdResult {
    if n == 0 {
        return Err(Failure::Input("--n must be at least 1".into()));
    }
    if matches!(suite, Suite::Sparsity) && n > 8 {
        return Err(Failure::Input(format!("sparsity suite handles n <= 8, got {n}")));
    }
    let mut worst = f64::INFINITY;
    for t in 0..trials {
        let s = trial_seed(seed, t);
        let (net, violation) = match suite {
            Suite::Submodularity => {
                // Odd trials use up to two antennas per relay, switched independently.
                let spec = if t % 2 == 0 {
                    RandomSpec::single_antenna(n, Switching::Lockstep)
                } else {
                    random_layout(n, 2, Switching::Independent, s)
                };
                let net = random_network(&spec, s)?;
                let table = CutValueTable::from_network(&net)?;
                let mut v = None;
                for state in 0..table.num_states() {
                    let rep = check_submodular(&table, state)?;
                    worst = worst.min(rep.worst_violation);
                    if !rep.is_submodular {
                        v = Some(format!("state {state}: {:?}", rep.witness));
                        break;
                    }
                }
                (net, v)
            }
            Suite::Sparsity => {
                let net = random_network(&RandomSpec::single_antenna(n, Switching::Lockstep), s)?;
                let table = CutValueTable::from_network(&net)?;
                let r = solve_saddle(&table, &SolveOptions::default())?;
                let achieved = verify_schedule(&table, &r.schedule)?.achieved_rate;
                let active = r.schedule.support().len();
                worst = worst.min(achieved - (r.rate - 1e-6));
                let v = if active > n + 1 {
                    Some(format!("{active} active states for {n} relays"))
                } else if achieved < r.rate - 1e-6 {
                    Some(format!("schedule achieves {achieved} below {}", r.rate))
                } else {
                    None
                };
                (net, v)
            }
            Suite::Gap => {
                let net = random_network(&random_layout(n, 2, Switching::Independent, s), s)?;
                let v = match gap_certificate(&net) {
                    Ok(c) => {
                        worst = worst.min(c.bound() - c.gap());
                        None
                    }
                    Err(Error::Certificate { message, .. }) => Some(message),
                    Err(e) => return Err(e.into()),
                };
                (net, v)
            }
        };
        if let Some(message) = violation {
            let f = Failure::Certificate {
                message: format!("trial {t} (seed {s}): {message}"),
                witness: to_json(&net),
            };
            return write_witness(witness, f);
        }
    }
    let name = match suite {
        Suite::Submodularity => "submodularity",
        Suite::Gap => "gap",
        Suite::Sparsity => "sparsity",
    };
    let report = json!({
        "suite": name,
        "n": n,
        "trials": trials,
        "seed": seed,
        "passed": true,
        "min_slack": if worst.is_finite() { json!(worst) } else { Value::Null },
    });
    emit(None, &pretty(&report))
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Solve {
            network,
            tol,
            out,
            witness,
        } => cmd_solve(&network, tol, out.as_deref(), &witness, cli.verbose),
        Command::Oracle { network, tol, out } => cmd_oracle(&network, tol, out.as_deref(), cli.verbose),
        Command::SweepLine {
            gamma_min,
            gamma_max,
            points,
            out,
        } => cmd_sweep(gamma_min, gamma_max, points, out.as_deref()),
        Command::Verify {
            suite,
            n,
            trials,
            seed,
            witness,
        } => cmd_verify(suite, n, trials, seed, &witness),
        Command::GenRandom {
            n,
            antennas,
            m_source,
            m_dest,
            switching,
            seed,
            out,
        } => {
            if n == 0 {
                return Err(Failure::Input("--n must be at least 1".into()));
            }
            let spec = RandomSpec {
                m_source,
                m_relay: parse_antennas(&antennas, n)?,
                m_dest,
                switching: switching.into(),
            };
            let net = random_network(&spec, seed)?;
            let mut text = to_json(&net);
            text.push('\n');
            emit(out.as_deref(), &text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Certificate { message, .. }) => {
            eprintln!("certificate failure: {message}");
            ExitCode::from(2)
        }
        Err(Failure::Refused(m)) => {
            eprintln!("refused: {m}");
            ExitCode::from(3)
        }
    }
}
