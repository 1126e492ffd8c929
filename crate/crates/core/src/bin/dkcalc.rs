//! Batch command-line surface over the JSON request runner.
//!
//! Every run prints a single JSON response (or a plain-text rendering with
//! `--pretty`) that embeds the full effective configuration, so identical
//! invocations are byte-identical. Exit codes: 0 success / zero residual,
//! 1 nonzero residual or contract violation, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "dkcalc", version, about = "Exact computations in Drinfeld-Kohno algebras and truncated quasi-Hopf deformations")]
struct Cli {
    /// Human-readable rendering instead of compact JSON.
    #[arg(long, global = true)]
    pretty: bool,
    /// Write the response to a file instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InstanceArgs {
    /// Instance definition file (basis, brackets, caps, optional phi/twist).
    #[arg(long)]
    instance: PathBuf,
    /// Override the instance's hbar cap.
    #[arg(long)]
    hbar_cap: Option<u32>,
    /// Override the instance's PBW degree cap.
    #[arg(long)]
    pbw_cap: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Pentagon residual of an associator file.
    Pentagon {
        #[arg(long)]
        input: PathBuf,
    },
    /// Both hexagon residuals (and the duality residual) of an associator.
    Hexagon {
        #[arg(long)]
        input: PathBuf,
    },
    /// Apply a twist file to an associator file.
    Twist {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        twist: PathBuf,
    },
    /// Twist an associator into the Lie representative of its orbit.
    Lieify {
        #[arg(long)]
        input: PathBuf,
        /// Reported coefficient convention: `plus` (gamma + d(beta)) or `minus`.
        #[arg(long, default_value = "plus")]
        solve_beta_sign: String,
    },
    /// Canonical isotropy-coset representative of a twist.
    Canonicalize {
        #[arg(long)]
        twist: PathBuf,
    },
    /// Degree-by-degree extension of an associator, dumping kernel bases.
    Extend {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        to_degree: u32,
        #[arg(long, default_value_t = 1)]
        from_degree: u32,
        #[arg(long)]
        hexagons: bool,
        #[arg(long)]
        duality: bool,
        #[arg(long)]
        lie: bool,
    },
    /// Graded dimension table of t_n.
    DkDim {
        #[arg(long, default_value_t = 3)]
        n: u8,
        #[arg(long, default_value_t = 6)]
        max: u32,
    },
    /// Apply the co-Hochschild differential on either carrier.
    Cohochschild {
        /// `dk` or `sym`.
        #[arg(long, default_value = "dk")]
        carrier: String,
        #[arg(long)]
        element: PathBuf,
        /// Lie algebra file (required for the `sym` carrier).
        #[arg(long)]
        g: Option<PathBuf>,
    },
    /// Universal BCH table, optionally evaluating a star product.
    Bch {
        #[arg(long, default_value_t = 6)]
        degree: u32,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
    },
    /// Enumerate planar binary trees; optionally extract a subtree.
    Trees {
        #[arg(long)]
        n: usize,
        /// Comma-separated leaf numbers to extract.
        #[arg(long)]
        extract: Option<String>,
        /// Tree to extract from (parenthesized form); left comb by default.
        #[arg(long)]
        tree: Option<String>,
    },
    /// Evaluate a tree coproduct delta^(P) on an element.
    Delta {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        tree: String,
    },
    /// Randomized multiplication-identity residual scan.
    Prop14 {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 100)]
        pairs: u64,
        #[arg(long, default_value_t = 4)]
        tree_bound: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_deg: Option<u32>,
        /// Largest hbar power used in sampled elements.
        #[arg(long)]
        max_hbar: Option<u32>,
    },
    /// Filtration valuation report for one element.
    Uprime {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        element: PathBuf,
        #[arg(long, default_value_t = 3)]
        tree_bound: u32,
        #[arg(long, default_value_t = 2)]
        n_bound: u32,
    },
    /// Symbol of an evidence-checked element in S^n(g).
    Symbol {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        n: u32,
    },
    /// Comparison elements between tree coproducts, with verification.
    Coherence {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        p0: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        verify_samples: u64,
    },
    /// Iterated admissibilizing twist with per-stage certificates.
    Admissibilize {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long, default_value_t = 4)]
        max_total_degree: u32,
    },
    /// Star-pentagon residual on the symmetric carrier.
    PoissonPentagon {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        coproduct_twist: Option<PathBuf>,
    },
    /// Equalize two star-pentagon solutions by an invariant twist.
    Equalize {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        phi1: PathBuf,
        #[arg(long)]
        phi2: PathBuf,
        /// Which adjacent slots the recursion multiplies: `1-2` or `2-3`.
        #[arg(long, default_value = "1-2")]
        idm_slots: String,
    },
    /// Evaluate a two-letter Lie series into Poisson tensors.
    EvalAssoc {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        series: PathBuf,
        #[arg(long, default_value_t = 5)]
        degree_cap: u32,
    },
    /// Classical reduction of a star-pentagon element.
    Reduce {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        #[arg(long)]
        coproduct_twist: Option<PathBuf>,
        /// `averaged` (default) or `signed-sum`.
        #[arg(long, default_value = "averaged")]
        alt_normalization: String,
    },
}

fn load_json(path: &PathBuf) -> Result<Value, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("bad JSON in {}: {e}", path.display()))
}

fn instance_value(args: &InstanceArgs) -> Result<Value, String> {
    let mut value = load_json(&args.instance)?;
    if let Value::Object(map) = &mut value {
        if let Some(cap) = args.hbar_cap {
            map.insert("hbar_cap".into(), json!(cap));
        }
        if let Some(cap) = args.pbw_cap {
            map.insert("pbw_cap".into(), json!(cap));
        }
    }
    Ok(value)
}

fn build_request(command: &Command) -> Result<Value, String> {
    let mut req = Map::new();
    let mut set = |k: &str, v: Value| {
        req.insert(k.to_string(), v);
    };
    match command {
        Command::Pentagon { input } => {
            set("command", json!("pentagon"));
            set("associator", load_json(input)?);
        }
        Command::Hexagon { input } => {
            set("command", json!("hexagon"));
            set("associator", load_json(input)?);
        }
        Command::Twist { input, twist } => {
            set("command", json!("twist"));
            set("associator", load_json(input)?);
            set("twist", load_json(twist)?);
        }
        Command::Lieify {
            input,
            solve_beta_sign,
        } => {
            set("command", json!("lieify"));
            set("associator", load_json(input)?);
            set("solve_beta_sign", json!(solve_beta_sign));
        }
        Command::Canonicalize { twist } => {
            set("command", json!("canonicalize"));
            set("twist", load_json(twist)?);
        }
        Command::Extend {
            input,
            to_degree,
            from_degree,
            hexagons,
            duality,
            lie,
        } => {
            set("command", json!("extend"));
            set("associator", load_json(input)?);
            set("to_degree", json!(to_degree));
            set("from_degree", json!(from_degree));
            set("hexagons", json!(hexagons));
            set("duality", json!(duality));
            set("lie", json!(lie));
        }
        Command::DkDim { n, max } => {
            set("command", json!("dk-dim"));
            set("n", json!(n));
            set("max", json!(max));
        }
        Command::Cohochschild {
            carrier,
            element,
            g,
        } => {
            set("command", json!("cohochschild"));
            set("carrier", json!(carrier));
            set("element", load_json(element)?);
            if let Some(g) = g {
                set("g", load_json(g)?);
            }
        }
        Command::Bch { degree, a, b } => {
            set("command", json!("bch"));
            set("degree", json!(degree));
            if let Some(a) = a {
                set("a", load_json(a)?);
            }
            if let Some(b) = b {
                set("b", load_json(b)?);
            }
        }
        Command::Trees { n, extract, tree } => {
            set("command", json!("trees"));
            set("n", json!(n));
            if let Some(extract) = extract {
                let leaves: Vec<u64> = extract
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| format!("bad leaf `{s}`")))
                    .collect::<Result<_, String>>()?;
                set("extract", json!(leaves));
            }
            if let Some(tree) = tree {
                set("tree", json!(tree));
            }
        }
        Command::Delta {
            instance,
            element,
            tree,
        } => {
            set("command", json!("delta"));
            set("instance", instance_value(instance)?);
            set("element", load_json(element)?);
            set("tree", json!(tree));
        }
        Command::Prop14 {
            instance,
            pairs,
            tree_bound,
            seed,
            max_deg,
            max_hbar,
        } => {
            set("command", json!("prop14"));
            set("instance", instance_value(instance)?);
            set("pairs", json!(pairs));
            set("tree_bound", json!(tree_bound));
            set("seed", json!(seed));
            if let Some(d) = max_deg {
                set("max_deg", json!(d));
            }
            if let Some(h) = max_hbar {
                set("hbar_cap", json!(h));
            }
        }
        Command::Uprime {
            instance,
            element,
            tree_bound,
            n_bound,
        } => {
            set("command", json!("uprime"));
            set("instance", instance_value(instance)?);
            set("element", load_json(element)?);
            set("tree_bound", json!(tree_bound));
            set("n_bound", json!(n_bound));
        }
        Command::Symbol {
            instance,
            element,
            n,
        } => {
            set("command", json!("symbol"));
            set("instance", instance_value(instance)?);
            set("element", load_json(element)?);
            set("n", json!(n));
        }
        Command::Coherence {
            instance,
            n,
            p,
            p0,
            seed,
            verify_samples,
        } => {
            set("command", json!("coherence"));
            set("instance", instance_value(instance)?);
            set("n", json!(n));
            if let Some(p) = p {
                set("p", json!(p));
            }
            if let Some(p0) = p0 {
                set("p0", json!(p0));
            }
            set("seed", json!(seed));
            set("verify_samples", json!(verify_samples));
        }
        Command::Admissibilize {
            instance,
            max_total_degree,
        } => {
            set("command", json!("admissibilize"));
            set("instance", instance_value(instance)?);
            set("max_total_degree", json!(max_total_degree));
        }
        Command::PoissonPentagon {
            g,
            phi,
            coproduct_twist,
        } => {
            set("command", json!("poisson-pentagon"));
            set("g", load_json(g)?);
            set("phi", load_json(phi)?);
            if let Some(t) = coproduct_twist {
                set("coproduct_twist", load_json(t)?);
            }
        }
        Command::Equalize {
            g,
            phi1,
            phi2,
            idm_slots,
        } => {
            set("command", json!("equalize"));
            set("g", load_json(g)?);
            set("phi1", load_json(phi1)?);
            set("phi2", load_json(phi2)?);
            set("idm_slots", json!(idm_slots));
        }
        Command::EvalAssoc {
            g,
            metric,
            series,
            degree_cap,
        } => {
            set("command", json!("eval-assoc"));
            set("g", load_json(g)?);
            set("metric", load_json(metric)?);
            set("series", load_json(series)?);
            set("degree_cap", json!(degree_cap));
        }
        Command::Reduce {
            g,
            phi,
            coproduct_twist,
            alt_normalization,
        } => {
            set("command", json!("reduce"));
            set("g", load_json(g)?);
            set("phi", load_json(phi)?);
            if let Some(t) = coproduct_twist {
                set("coproduct_twist", load_json(t)?);
            }
            set("alt_normalization", json!(alt_normalization));
        }
    }
    Ok(Value::Object(req))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let request = match build_request(&cli.command) {
        Ok(r) => r,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(2);
        }
    };
    let outcome = dkcalc::api::run_request(&request);
    let rendered = if cli.pretty {
        dkcalc::api::render_pretty(&outcome.body)
    } else {
        let mut s = serde_json::to_string(&outcome.body).expect("serializable");
        s.push('\n');
        s
    };
    match &cli.output {
        None => print!("{rendered}"),
        Some(path) => {
            if let Err(e) = std::fs::write(path, rendered) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
    }
    ExitCode::from(u8::try_from(outcome.exit).unwrap_or(1))
}
