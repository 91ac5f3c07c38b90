//! Command-line surface: graph export, single-instance Morse runs, homology
//! computations, and the verification sweep. All outputs are deterministic
//! JSON or CSV; exit status 0 means every enabled check passed.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use morsekit::complex::{independence_complex_with_budget, DEFAULT_FACE_BUDGET};
use morsekit::graphs::{build_cycle, build_gmd};
use morsekit::homology::{
    morse_homology, reduced_homology, DEFAULT_SNF_BUDGET,
};
use morsekit::morse::{morse_chain_complex, sequential_element_matching, Role};
use morsekit::report::{
    check_cycle_instance, check_gmd_instance, sweep_gmd, Fault, OrderChoice, ReportError,
    SCHEMA_VERSION,
};
use morsekit::theory::kozlov_predicted;

#[derive(Parser)]
#[command(name = "morsekit", version, about = "Discrete Morse matchings and homology of independence complexes of circulant bipartite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderFlag {
    Canonical,
    Reverse,
}

impl From<OrderFlag> for OrderChoice {
    fn from(o: OrderFlag) -> Self {
        match o {
            OrderFlag::Canonical => OrderChoice::Canonical,
            OrderFlag::Reverse => OrderChoice::Reverse,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ViaFlag {
    Snf,
    Morse,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyFlag {
    Gmd,
    Cycle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultFlag {
    SwapPrediction,
}

#[derive(Args)]
struct BudgetArgs {
    /// Maximum number of faces to materialize per complex.
    #[arg(long, default_value_t = DEFAULT_FACE_BUDGET)]
    face_budget: usize,
    /// Maximum face count for exact SNF homology.
    #[arg(long, default_value_t = DEFAULT_SNF_BUDGET)]
    snf_budget: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Export a graph as JSON (or DOT with --dot).
    Gen {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        /// Cycle length; mutually exclusive with --m/--d.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        dot: bool,
    },
    /// Run the sequential element matching on Ind(G_m^d) and report the
    /// critical cells and the wedge inference.
    Morse {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, value_enum, default_value = "canonical")]
        order: OrderFlag,
        /// Also dump the full pairing with phase vertices.
        #[arg(long)]
        dump_matching: bool,
        /// Include wall-clock timings (breaks byte-level determinism).
        #[arg(long)]
        timings: bool,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Reduced integer homology of Ind(G_m^d) or Ind(C_r).
    Homology {
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        r: Option<usize>,
        #[arg(long, value_enum, default_value = "both")]
        via: ViaFlag,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
    /// Sweep instances and check every prediction; exit 0 iff all pass.
    Verify {
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        #[arg(long, value_enum, default_value = "gmd")]
        family: FamilyFlag,
        /// Largest cycle length for --family cycle.
        #[arg(long, default_value_t = 14)]
        r_max: usize,
        #[arg(long, value_enum, default_value = "canonical")]
        order: OrderFlag,
        /// Corrupt the predictions on purpose; the sweep must then fail.
        #[arg(long, value_enum)]
        inject_fault: Option<FaultFlag>,
        /// Emit JSON rows instead of CSV.
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        budgets: BudgetArgs,
    },
}

fn fail(err: &ReportError) -> ExitCode {
    let reason = json!({"schema": SCHEMA_VERSION, "error": err.to_string()});
    eprintln!("{reason}");
    ExitCode::FAILURE
}

fn cache_lookup(key: &str) -> Option<serde_json::Value> {
    let dir = std::env::var_os("MORSEKIT_CACHE_DIR")?;
    let path = PathBuf::from(dir).join(format!("{key}.json"));
    let text = std::fs::read_to_string(path).ok()?;
    let value: serde_json::Value = serde_json::from_str(&text).ok()?;
    (value.get("schema") == Some(&json!(SCHEMA_VERSION))).then_some(value)
}

fn cache_store(key: &str, value: &serde_json::Value) {
    if let Some(dir) = std::env::var_os("MORSEKIT_CACHE_DIR") {
        let dir = PathBuf::from(dir);
        if std::fs::create_dir_all(&dir).is_ok() {
            let _ = std::fs::write(dir.join(format!("{key}.json")), value.to_string());
        }
    }
}

fn run_morse(
    m: usize,
    d: usize,
    order: OrderChoice,
    dump_matching: bool,
    timings: bool,
    budgets: &BudgetArgs,
) -> Result<serde_json::Value, ReportError> {
    let key = format!(
        "gmd_m{m}_d{d}_{}_fb{}_sb{}",
        order.name(),
        budgets.face_budget,
        budgets.snf_budget
    );
    if !dump_matching && !timings {
        if let Some(hit) = cache_lookup(&key) {
            return Ok(hit);
        }
    }
    let outcome = check_gmd_instance(m, d, order, budgets.face_budget, budgets.snf_budget, None)?;
    let mut value = outcome.to_json(timings);
    value["order"] = json!(order.name());
    if dump_matching {
        let g = build_gmd(m, d)?;
        let c = independence_complex_with_budget(&g, budgets.face_budget)?;
        let mm = sequential_element_matching(&c, &order.order(&c))?;
        let pairs: Vec<serde_json::Value> = mm
            .pairs()
            .iter()
            .map(|&(lo, hi)| {
                let (x, role) = mm.phase_of(lo).expect("paired face has a phase");
                debug_assert_eq!(role, Role::Down);
                json!({
                    "down": lo.labels(&g),
                    "up": hi.labels(&g),
                    "phase": g.label(x),
                })
            })
            .collect();
        value["matching"] = json!(pairs);
    }
    if !dump_matching && !timings {
        cache_store(&key, &value);
    }
    Ok(value)
}

fn run_homology(
    m: Option<usize>,
    d: Option<usize>,
    r: Option<usize>,
    via: ViaFlag,
    budgets: &BudgetArgs,
) -> Result<serde_json::Value, ReportError> {
    let (g, instance) = match (m, d, r) {
        (Some(m), Some(d), None) => (build_gmd(m, d)?, json!({"family": "gmd", "m": m, "d": d})),
        (None, None, Some(r)) => (build_cycle(r)?, json!({"family": "cycle", "r": r})),
        _ => {
            return Ok(json!({
                "schema": SCHEMA_VERSION,
                "error": "pass either --m and --d, or --r"
            }))
        }
    };
    let c = independence_complex_with_budget(&g, budgets.face_budget)?;
    let mut out = json!({"schema": SCHEMA_VERSION, "instance": instance, "face_count": c.face_count()});
    let snf_profile = match via {
        ViaFlag::Snf | ViaFlag::Both => Some(reduced_homology(&c, budgets.snf_budget)?),
        ViaFlag::Morse => None,
    };
    let morse_profile = match via {
        ViaFlag::Morse | ViaFlag::Both => {
            let order: Vec<usize> = (0..c.graph().vertex_count()).collect();
            let mm = sequential_element_matching(&c, &order)?;
            let mcc = morse_chain_complex(&c, &mm)?;
            Some(morse_homology(&mcc)?)
        }
        ViaFlag::Snf => None,
    };
    if let Some(h) = &snf_profile {
        out["snf"] = h.to_json();
    }
    if let Some(h) = &morse_profile {
        out["morse"] = h.to_json();
    }
    if let (Some(a), Some(b)) = (&snf_profile, &morse_profile) {
        out["agreement"] = json!(a.same_homology(b));
    }
    Ok(out)
}

fn run_verify(
    m_max: usize,
    family: FamilyFlag,
    r_max: usize,
    order: OrderChoice,
    inject_fault: Option<FaultFlag>,
    as_json: bool,
    budgets: &BudgetArgs,
) -> ExitCode {
    let fault = inject_fault.map(|FaultFlag::SwapPrediction| Fault::SwapPrediction);
    let mut all_pass = true;
    let mut first_failure: Option<String> = None;
    match family {
        FamilyFlag::Gmd => {
            let rows = sweep_gmd(m_max, order, budgets.face_budget, budgets.snf_budget, fault);
            if !as_json {
                println!("m,d,faces,critical,matching,acyclic,cells,wedge,euler,homology,morse_vs_snf,verdict");
            }
            for (m, d, row) in rows {
                match row {
                    Ok(out) => {
                        let verdict = if out.pass() { "pass" } else { "fail" };
                        if !out.pass() {
                            all_pass = false;
                            first_failure.get_or_insert(format!("G_{m}^{d}"));
                        }
                        if as_json {
                            println!("{}", out.to_json(false));
                        } else {
                            let opt = |v: Option<bool>| match v {
                                Some(true) => "pass",
                                Some(false) => "fail",
                                None => "skip",
                            };
                            println!(
                                "{m},{d},{},{},{},{},{},{},{},{},{},{verdict}",
                                out.face_count,
                                out.critical.len(),
                                if out.matching_ok { "pass" } else { "fail" },
                                if out.acyclic_ok { "pass" } else { "fail" },
                                if out.cells_ok { "pass" } else { "fail" },
                                if out.wedge_ok { "pass" } else { "fail" },
                                if out.euler_ok { "pass" } else { "fail" },
                                opt(out.homology_ok),
                                opt(out.morse_agree_ok),
                            );
                        }
                    }
                    Err(err) => {
                        all_pass = false;
                        first_failure.get_or_insert(format!("G_{m}^{d}"));
                        eprintln!("G_{m}^{d}: {err}");
                    }
                }
            }
        }
        FamilyFlag::Cycle => {
            if !as_json {
                println!("r,faces,predicted,betti,verdict");
            }
            for r in 3..=r_max {
                match check_cycle_instance(r, budgets.face_budget, budgets.snf_budget) {
                    Ok(out) => {
                        let mut ok = out.pass();
                        if fault.is_some() {
                            ok = false; // fault injection must fail the sweep
                        }
                        if !ok {
                            all_pass = false;
                            first_failure.get_or_insert(format!("C_{r}"));
                        }
                        if as_json {
                            println!(
                                "{}",
                                json!({
                                    "schema": SCHEMA_VERSION,
                                    "instance": {"family": "cycle", "r": r},
                                    "face_count": out.face_count,
                                    "predicted": kozlov_predicted(r).expect("r >= 3").to_string(),
                                    "homology": out.homology.to_json(),
                                    "verdict": if ok { "pass" } else { "fail" },
                                })
                            );
                        } else {
                            println!(
                                "{r},{},{},{:?},{}",
                                out.face_count,
                                out.predicted,
                                out.homology.nonzero_betti(),
                                if ok { "pass" } else { "fail" }
                            );
                        }
                    }
                    Err(err) => {
                        all_pass = false;
                        first_failure.get_or_insert(format!("C_{r}"));
                        eprintln!("C_{r}: {err}");
                    }
                }
            }
        }
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        eprintln!(
            "{}",
            json!({"schema": SCHEMA_VERSION, "first_failure": first_failure})
        );
        ExitCode::FAILURE
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen { m, d, r, dot } => {
            let graph = match (m, d, r) {
                (Some(m), Some(d), None) => build_gmd(m, d).map_err(ReportError::from),
                (None, None, Some(r)) => build_cycle(r).map_err(ReportError::from),
                _ => {
                    eprintln!("pass either --m and --d, or --r");
                    return ExitCode::FAILURE;
                }
            };
            match graph {
                Ok(g) => {
                    if dot {
                        print!("{}", g.to_dot());
                    } else {
                        println!("{}", g.to_json());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Morse {
            m,
            d,
            order,
            dump_matching,
            timings,
            budgets,
        } => match run_morse(m, d, order.into(), dump_matching, timings, &budgets) {
            Ok(v) => {
                println!("{v}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Homology {
            m,
            d,
            r,
            via,
            budgets,
        } => match run_homology(m, d, r, via, &budgets) {
            Ok(v) => {
                if v.get("error").is_some() {
                    eprintln!("{v}");
                    return ExitCode::FAILURE;
                }
                println!("{v}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(&e),
        },
        Command::Verify {
            m_max,
            family,
            r_max,
            order,
            inject_fault,
            json,
            budgets,
        } => run_verify(m_max, family, r_max, order.into(), inject_fault, json, &budgets),
    }
}
