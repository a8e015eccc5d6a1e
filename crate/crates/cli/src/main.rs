//! `pctc`: command-line front end for the P-CTC simulator.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pctc_core::algorithms::dimacs::parse_dimacs;
use pctc_core::algorithms::factor::{factor, FactorInstance};
use pctc_core::algorithms::npconp::{np_conp_solve, problem_from_json};
use pctc_core::algorithms::sat::sat_solve;
use pctc_core::algorithms::{Answer, EvalOptions, Path};
use pctc_core::distinguish::{self, Route, StateSet};
use pctc_core::engine::{self, InducedMap, PctcCircuit, RetroCoupling};
use pctc_core::ensembles::compare_semantics;
use pctc_core::{dctc, gadget, io, random, selftest, Capacity, OutcomeDistribution, PctcError};

use output::{Format, Report};

#[derive(Parser, Debug)]
#[command(name = "pctc", version, about = "Simulate quantum circuits with postselected closed timelike curves")]
struct Cli {
    /// Seed for sampling and randomized sweeps.
    #[arg(long, global = true, default_value_t = selftest::DEFAULT_SEED)]
    seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Relative norm below which an input counts as paradoxical.
    #[arg(long, global = true, value_parser = positive_f64)]
    tolerance_paradox: Option<f64>,

    /// Qubit limit for dense operators.
    #[arg(long, global = true, env = "PCTC_MAX_QUBITS")]
    max_qubits: Option<usize>,

    /// Evaluator for factor, sat and npconp.
    #[arg(long, global = true, value_parser = parse_path, default_value = "structured")]
    path: Path,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Induced operator of a circuit.
    Induce { circuit: PathBuf },
    /// Run a pure or mixed state through a circuit.
    Apply { circuit: PathBuf, state: PathBuf },
    /// Entangled pair with one half coupled to a CTC qubit.
    RetroDemo {
        #[arg(long, value_enum, default_value_t = Coupling::Cnot)]
        coupling: Coupling,
    },
    /// Postselect a generalized measurement on a state.
    Gadget { measurement: PathBuf, state: PathBuf },
    /// Map each member of a state set to its label.
    Distinguish {
        set: PathBuf,
        #[arg(long, value_parser = parse_route, default_value = "direct")]
        route: Route,
        /// Run this state instead of the set members.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Four BB84 states made perfectly distinguishable.
    Bb84Demo,
    /// Proper-mixture vs true-density readings of a labeled ensemble.
    Mixture {
        ensemble: PathBuf,
        /// Circuit to apply; defaults to the ensemble's own distinguishing map.
        #[arg(long)]
        circuit: Option<PathBuf>,
    },
    /// The same circuit under the Deutsch and postselected models.
    DctcDemo,
    /// Find the factors of a composite integer.
    Factor {
        q: u64,
        #[arg(long)]
        exclude_trivial: bool,
    },
    /// Decide satisfiability of a DIMACS CNF formula.
    Sat {
        file: PathBuf,
        #[arg(short = 'k', long = "rounds", default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
        rounds: u32,
    },
    /// Decide a problem with witnesses for both answers.
    Npconp {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Run the seeded invariant suite.
    Selftest,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Coupling {
    Cnot,
    Identity,
    Inverted,
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("expected a positive number, got {s:?}")),
    }
}

fn parse_path(s: &str) -> Result<Path, String> {
    s.parse().map_err(|e: PctcError| e.to_string())
}

fn parse_route(s: &str) -> Result<Route, String> {
    s.parse().map_err(|e: PctcError| e.to_string())
}

/// Failures surfaced to the user.
enum Failure {
    Domain(PctcError),
    Io(String),
    Usage(String),
}

impl From<PctcError> for Failure {
    fn from(e: PctcError) -> Self {
        Failure::Domain(e)
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

struct Context {
    seed: u64,
    opts: EvalOptions,
    capacity: Capacity,
    paradox_tol: Option<f64>,
}

impl Context {
    fn map(&self, circuit: &PctcCircuit) -> Result<InducedMap, Failure> {
        self.capacity.check_qubits(circuit.layout().total_qubits())?;
        let map = engine::induced_map(circuit)?;
        Ok(match self.paradox_tol {
            Some(t) => map.with_paradox_tolerance(t),
            None => map,
        })
    }

    fn circuit(&self, path: &PathBuf) -> Result<PctcCircuit, Failure> {
        Ok(io::circuit_from_json(&read(path)?)?)
    }
}

fn sampled(d: &OutcomeDistribution, seed: u64) -> Option<usize> {
    d.sample(&mut random::rng(seed))
}

fn run(cli: &Cli) -> Result<Report, Failure> {
    let mut opts = EvalOptions::default().with_path(cli.path);
    if let Some(q) = cli.max_qubits {
        opts = opts.with_max_qubits(q);
    }
    if let Some(t) = cli.tolerance_paradox {
        opts = opts.with_paradox_tolerance(t);
    }
    let ctx = Context { seed: cli.seed, opts, capacity: opts.capacity, paradox_tol: cli.tolerance_paradox };

    Ok(match &cli.command {
        Command::Induce { circuit } => {
            let map = ctx.map(&ctx.circuit(circuit)?)?;
            Report::value(json!({
                "layout": map.layout(),
                "operator": map.operator(),
                "sigma_max": map.sigma_max(),
            }))
        }
        Command::Apply { circuit, state } => {
            let map = ctx.map(&ctx.circuit(circuit)?)?;
            let text = read(state)?;
            let names: Vec<String> = map.layout().names().map(str::to_owned).collect();
            let names: Vec<&str> = names.iter().map(String::as_str).collect();
            let parsed: Value = serde_json::from_str(&text)
                .map_err(|e| PctcError::InvalidValue(format!("state: {e}")))?;
            if parsed.get("matrix").is_some() {
                let out = map.apply_mixed(&io::density_from_json(&text)?)?;
                let d = out.measure(&names)?;
                Report::with_distribution(json!({ "state": out, "distribution": d }), d)
            } else {
                let out = map.apply_pure(&io::state_from_json(&text)?)?;
                let d = out.measure(&names)?;
                Report::with_distribution(json!({ "state": out, "distribution": d }), d)
            }
        }
        Command::RetroDemo { coupling } => {
            let coupling = match coupling {
                Coupling::Cnot => RetroCoupling::Cnot,
                Coupling::Identity => RetroCoupling::Identity,
                Coupling::Inverted => RetroCoupling::InvertedCnot,
            };
            let d = engine::retro_demo_with(coupling)?;
            Report::with_distribution(json!({ "register": "A", "distribution": d }), d)
        }
        Command::Gadget { measurement, state } => {
            let (meas, accept) = io::measurement_from_json(&read(measurement)?)?;
            let psi = io::state_from_json(&read(state)?)?;
            let r = gadget::postselect(&meas, &accept, &psi)?;
            let d = r.distribution();
            Report::with_distribution(json!({ "outcomes": r.outcomes, "distribution": d }), d)
        }
        Command::Distinguish { set, route, input } => {
            let set: StateSet = io::state_set_from_json(&read(set)?)?;
            match input {
                Some(p) => {
                    let psi = io::state_from_json(&read(p)?)?;
                    let psi = psi.with_layout(set.layout().clone())?;
                    let r = distinguish::distinguish(&set, *route, &psi)?;
                    let d = r.distribution.clone();
                    Report::with_distribution(json!({ "route": route, "distribution": d }), d)
                }
                None => {
                    let rows = set
                        .states()
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let r = distinguish::distinguish(&set, *route, s)?;
                            Ok(json!({ "member": i, "p_correct": r.distribution.prob(i), "distribution": r.distribution }))
                        })
                        .collect::<Result<Vec<_>, PctcError>>()?;
                    Report::value(json!({ "route": route, "members": rows }))
                }
            }
        }
        Command::Bb84Demo => Report::value(serde_json::to_value(distinguish::bb84_demo()?).expect("serializable")),
        Command::Mixture { ensemble, circuit } => {
            let e = io::ensemble_from_json(&read(ensemble)?)?;
            let map = match circuit {
                Some(p) => ctx.map(&ctx.circuit(p)?)?,
                None => {
                    let set = StateSet::new(e.entries().iter().map(|x| x.state.clone()).collect())?;
                    distinguish::build_c(&set)?
                }
            };
            let r = compare_semantics(&map, &e)?;
            Report::value(json!({
                "p": r.p,
                "q": r.q,
                "total_variation": r.total_variation,
                "purification_gap": r.purification_gap,
                "purification_consistent": r.purification_consistent(),
            }))
        }
        Command::DctcDemo => Report::value(serde_json::to_value(dctc::dctc_demo()?).expect("serializable")),
        Command::Factor { q, exclude_trivial } => {
            let inst = FactorInstance::new(*q)?.with_exclude_trivial(*exclude_trivial);
            let r = factor(&inst, &ctx.opts)?;
            let pick = sampled(&r.distribution, ctx.seed);
            Report::with_distribution(
                json!({
                    "q": r.q,
                    "answer": pick,
                    "witness": pick.map(|k| r.distribution.bitstring(k)),
                    "factors": r.factors(),
                    "path": r.path,
                    "distribution": r.distribution,
                }),
                r.distribution,
            )
        }
        Command::Sat { file, rounds } => {
            let f = parse_dimacs(&read(file)?)?;
            let r = sat_solve(&f, *rounds as usize, &ctx.opts)?;
            let (answer, witness) = r.sample(&mut random::rng(ctx.seed));
            let n = r.n_vars;
            Report::with_distribution(
                json!({
                    "answer": answer,
                    "witness": witness.map(|w| format!("{w:0n$b}")),
                    "n_vars": n,
                    "rounds": r.rounds,
                    "p_no": r.p_no,
                    "path": r.path,
                    "distribution": r.decoded,
                }),
                r.decoded,
            )
        }
        Command::Npconp { spec } => {
            let p = problem_from_json(&read(spec)?)?;
            let r = np_conp_solve(&p, &ctx.opts)?;
            let pick = sampled(&r.distribution, ctx.seed).map(|k| r.decode(k));
            let n = r.n_bits;
            let answer = r.answer.or_else(|| pick.map(|(f, _, _)| if f == 1 { Answer::Yes } else { Answer::No }));
            Report::with_distribution(
                json!({
                    "answer": answer,
                    "witness": pick.map(|(_, _, w)| format!("{w:0n$b}")),
                    "promise_violation": r.promise_violation,
                    "path": r.path,
                    "distribution": r.distribution,
                }),
                r.distribution,
            )
        }
        Command::Selftest => {
            let r = selftest::run(ctx.seed);
            let ok = r.all_passed();
            Report::value(serde_json::to_value(&r).expect("serializable")).failing(!ok)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|report| {
        let text = report.render(cli.format).map_err(Failure::Usage)?;
        output::emit(&text, cli.out.as_deref()).map_err(Failure::Io)?;
        Ok(report.failed)
    });
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Domain(e)) => {
            println!("{}", output::error_json(e.code(), &e.to_string()));
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            println!("{}", output::error_json("io", &msg));
            ExitCode::from(1)
        }
    }
}
