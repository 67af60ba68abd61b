use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use mqc::ancilla::{branch_table, Prior};
use mqc::compiler::{
    compile_with, simulate, verify_equivalence, CompileOptions, GateCircuit, MeasurementProgram, Mode, RotAxis, SetId,
    UniversalSet,
};
use mqc::outcome::Forced;
use mqc::statevector::StateVector;
use mqc::stats::{round_statistics, StatsGadget};

const EXIT_PARSE: u8 = 2;
const EXIT_SEMANTIC: u8 = 3;
const EXIT_VERIFY: u8 = 4;

#[derive(Parser)]
#[command(name = "mqc", version, about = "Measurement-only quantum computation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a circuit file into a measurement program
    Compile {
        circuit: PathBuf,
        #[command(flatten)]
        target: Target,
        /// Append a Z-basis readout of every qubit
        #[arg(long)]
        readout: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Compile and run a circuit on a basis-state input
    Simulate {
        circuit: PathBuf,
        #[command(flatten)]
        target: Target,
        /// Input bitstring, qubit 0 first (defaults to all zeros)
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Outcome indices to force first (0 = +1, 1 = -1), comma separated
        #[arg(long, value_delimiter = ',')]
        force: Vec<usize>,
        #[arg(long)]
        readout: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Compile and check against the circuit unitary on random inputs
    Verify {
        circuit: PathBuf,
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Flip the relabel flag of the first teleport measurement
        #[arg(long)]
        inject_fault: bool,
        #[command(flatten)]
        out: Output,
    },
    /// Enumerate every forced branch of the CNOT ancilla factory
    Acn {
        #[arg(long, value_enum, default_value_t = PriorArg::ZeroPlus)]
        prior: PriorArg,
        #[command(flatten)]
        out: Output,
    },
    /// Monte Carlo statistics of gadget round counts
    Stats {
        #[arg(value_enum)]
        gadget: GadgetArg,
        #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Target {
    #[arg(long, default_value = "s3")]
    set: String,
    #[arg(long)]
    theta: Option<f64>,
    /// Axis of u for s0
    #[arg(long, value_enum, default_value_t = AxisArg::Z)]
    axis: AxisArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Frame)]
    mode: ModeArg,
}

#[derive(Args)]
struct Output {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Literal,
    Frame,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Z,
    X,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    Zero,
    ZeroPlus,
}

#[derive(Clone, Copy, ValueEnum)]
enum GadgetArg {
    #[value(name = "1q")]
    OneQubit,
    #[value(name = "2q")]
    TwoQubit,
    Bu,
}

struct Failure {
    code: u8,
    msg: String,
}

fn fail(code: u8, msg: impl ToString) -> Failure {
    Failure { code, msg: msg.to_string() }
}

fn semantic(e: impl ToString) -> Failure {
    fail(EXIT_SEMANTIC, e)
}

fn read_circuit(path: &Path) -> Result<GateCircuit, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(1, format!("{}: {e}", path.display())))?;
    text.parse().map_err(|e| fail(EXIT_PARSE, format!("{}: {e}", path.display())))
}

fn build(target: &Target, circuit: &GateCircuit, readout: bool) -> Result<MeasurementProgram, Failure> {
    let id: SetId = target.set.parse().map_err(semantic)?;
    let axis = match target.axis {
        AxisArg::Z => RotAxis::Z,
        AxisArg::X => RotAxis::X,
    };
    let set = UniversalSet::with_axis(id, target.theta, axis).map_err(semantic)?;
    let mode = match target.mode {
        ModeArg::Literal => Mode::Literal,
        ModeArg::Frame => Mode::Frame,
    };
    compile_with(circuit, &set, CompileOptions { mode, readout }).map_err(semantic)
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn emit(out: &Output, text: String) -> Result<(), Failure> {
    match &out.out {
        Some(path) => std::fs::write(path, text).map_err(|e| fail(1, format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ProgramStats {
    steps: usize,
    two_qubit_steps: usize,
    ancillas_used: usize,
    gadgets: usize,
    loops: usize,
}

fn program_stats(p: &MeasurementProgram) -> ProgramStats {
    let m = p.measurements();
    ProgramStats {
        steps: m.len(),
        two_qubit_steps: m.iter().filter(|(_, t, _)| t.len() == 2).count(),
        ancillas_used: p.n_physical - p.n_logical,
        gadgets: p.gadgets,
        loops: p.loop_count(),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Compile { circuit, target, readout, out } => {
            let c = read_circuit(&circuit)?;
            let p = build(&target, &c, readout)?;
            let stats = program_stats(&p);
            let text = if out.json {
                to_json(&json!({ "program": p, "stats": stats }))
            } else {
                format!(
                    "{p}# stats steps={} two_qubit_steps={} ancillas_used={} gadgets={} loops={}\n",
                    stats.steps, stats.two_qubit_steps, stats.ancillas_used, stats.gadgets, stats.loops
                )
            };
            emit(&out, text)
        }
        Command::Simulate { circuit, target, input, seed, force, readout, out } => {
            let c = read_circuit(&circuit)?;
            let p = build(&target, &c, readout)?;
            let bits = input.unwrap_or_else(|| "0".repeat(c.n_qubits));
            let psi = StateVector::basis(c.n_qubits, &bits).map_err(semantic)?;
            let r = simulate(&p, &psi, &mut Forced::then_sample(force, seed)).map_err(semantic)?;
            let amps = r.state.to_sparse();
            let text = if out.json {
                to_json(&json!({
                    "seed": seed,
                    "state": amps,
                    "frame": r.frame.to_string(),
                    "bits": r.bits,
                    "stats": r.stats,
                    "log": r.log,
                }))
            } else {
                let mut s = String::new();
                let n = amps.n_qubits;
                for &(k, re, im) in &amps.entries {
                    let _ = writeln!(s, "|{k:0n$b}> {re:+.6} {im:+.6}i");
                }
                let _ = writeln!(s, "frame {}", r.frame);
                if r.bits.iter().any(Option::is_some) {
                    let shown: String = r.bits.iter().map(|b| b.map_or('?', |v| char::from(b'0' + v))).collect();
                    let _ = writeln!(s, "bits {shown}");
                }
                let st = &r.stats;
                let _ = writeln!(
                    s,
                    "# stats steps={} two_qubit_steps={} ancillas_used={} rounds_total={} seed={seed}",
                    st.steps, st.two_qubit_steps, st.ancillas_used, st.rounds_total
                );
                s
            };
            emit(&out, text)
        }
        Command::Verify { circuit, target, trials, seed, inject_fault, out } => {
            let c = read_circuit(&circuit)?;
            let mut p = build(&target, &c, false)?;
            if inject_fault && !p.inject_fault() {
                return Err(semantic("program has no teleport measurement to corrupt"));
            }
            let report = verify_equivalence(&c, &p, trials as usize, seed).map_err(semantic)?;
            let text = if out.json {
                to_json(&report)
            } else {
                let mut s = format!(
                    "{} trials={} seed={} min_fidelity={:.12} failures={} mean_rounds={:.3} max_rounds={}\n",
                    if report.passed() { "PASS" } else { "FAIL" },
                    report.trials,
                    report.seed,
                    report.min_fidelity,
                    report.failures.len(),
                    report.mean_rounds,
                    report.max_rounds
                );
                for f in &report.failures {
                    let _ = writeln!(s, "  trial {} fidelity {:.12}", f.trial, f.fidelity);
                }
                s
            };
            emit(&out, text)?;
            if report.passed() {
                Ok(())
            } else {
                Err(fail(EXIT_VERIFY, "verification failed"))
            }
        }
        Command::Acn { prior, out } => {
            let prior = match prior {
                PriorArg::Zero => Prior::Zero,
                PriorArg::ZeroPlus => Prior::ZeroPlus,
            };
            let rows = branch_table(prior).map_err(semantic)?;
            let text = if out.json {
                to_json(&rows)
            } else {
                let mut s = String::from("# X Z XX ZZ P+- ZZ' -> (k,l) overlap probability\n");
                for r in &rows {
                    let signs: Vec<&str> = r.signs.iter().map(|&v| if v > 0 { "+" } else { "-" }).collect();
                    let _ = writeln!(
                        s,
                        "{} -> ({},{}) {:.12} {:.6}",
                        signs.join(" "),
                        r.label.0,
                        r.label.1,
                        r.overlap,
                        r.probability
                    );
                }
                s
            };
            emit(&out, text)
        }
        Command::Stats { gadget, trials, seed, out } => {
            let g = match gadget {
                GadgetArg::OneQubit => StatsGadget::Literal1q,
                GadgetArg::TwoQubit => StatsGadget::Generic2q,
                GadgetArg::Bu => StatsGadget::Bu,
            };
            let s = round_statistics(g, trials as usize, seed).map_err(semantic)?;
            let text = if out.json {
                to_json(&s)
            } else {
                format!(
                    "{} trials={} seed={} mean={:.4} se={:.4} min={} max={} expected={}\n",
                    s.gadget, s.trials, s.seed, s.mean, s.std_error, s.min, s.max, s.expected
                )
            };
            emit(&out, text)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
