use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use netloc::construct;
use netloc::efficiency::{self, SearchBudget};
use netloc::examples::{self, CircleShape, SegmentShape, StarOutcome, StarShape};
use netloc::payoff;
use netloc::rational::format as fmt_q;
use netloc::verify;
use netloc::{Network, Point, Profile, Q};

#[derive(Parser)]
#[command(name = "netloc", version, about = "Location games on metric networks, in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Distance between two points, each given as JSON `{"edge": E, "alpha": "p/q"}`.
    Dist {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Payoff of every player.
    Payoffs(NetProfile),
    /// Consumer social cost.
    Cost(NetProfile),
    /// Build the constructive equilibrium; `--format csv` emits the cost curve up to `--n-max`.
    Construct {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Exact Nash check; exits 0 iff the profile is an equilibrium.
    Verify(NetProfile),
    /// Efficiency report with an empirical optimum.
    Report {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
    /// Closed-form networks and profiles.
    Examples {
        #[arg(value_enum)]
        shape: ShapeName,
        #[arg(long)]
        n: Option<usize>,
        /// Rays of the star.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Parameter of the three-ray star profiles.
        #[arg(long)]
        b: Option<usize>,
        /// Profile name: opt, tilde, hat, hat_ell, breve, equilibrium, worst, good, worst_odd, opt_odd.
        #[arg(long)]
        profile: Option<String>,
        /// Single position for hat_ell.
        #[arg(long)]
        ell: Option<usize>,
    },
    /// Multistart search for the social optimum.
    SearchOptimum {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        budget: BudgetArgs,
    },
}

#[derive(Args)]
struct NetProfile {
    #[arg(long)]
    net: PathBuf,
    #[arg(long)]
    profile: PathBuf,
}

#[derive(Args)]
struct BudgetArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    starts: usize,
    #[arg(long, default_value_t = 25)]
    iters: usize,
}

impl From<&BudgetArgs> for SearchBudget {
    fn from(b: &BudgetArgs) -> Self {
        SearchBudget { starts: b.starts, iters: b.iters, seed: b.seed }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeName {
    Segment,
    Circle,
    Star,
}

fn read(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| netloc::Error::Parse(format!("{}: {e}", path.display())).into())
}

// Accepts a bare network or a bundle with a "network" field.
fn load_net(path: &Path) -> Result<Network> {
    let v = read(path)?;
    let v = v.get("network").cloned().unwrap_or(v);
    Ok(Network::from_json(&v.to_string())?)
}

// Accepts a bare profile or a bundle with a "profile" field.
fn load_profile(path: &Path) -> Result<Profile> {
    let v = read(path)?;
    let v = v.get("profile").cloned().unwrap_or(v);
    Ok(Profile::from_json(&v.to_string())?)
}

fn parse_point(s: &str) -> Result<Point> {
    serde_json::from_str(s).map_err(|e| netloc::Error::Parse(format!("point {s:?}: {e}")).into())
}

fn q(x: &Q) -> Value {
    Value::String(fmt_q(x))
}

fn qs(xs: &[Q]) -> Value {
    Value::Array(xs.iter().map(q).collect())
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn net_value(net: &Network) -> Value {
    serde_json::from_str(&net.to_json()).expect("network JSON")
}

enum Output {
    Json(Value),
    Csv(String),
}

fn run(cli: &Cli) -> Result<(Output, ExitCode)> {
    let ok = ExitCode::SUCCESS;
    let json = |v| Ok((Output::Json(v), ok));
    match &cli.command {
        Command::Dist { net, x, y } => {
            let net = load_net(net)?;
            let d = net.distance(&parse_point(x)?, &parse_point(y)?)?;
            json(json!({ "distance": q(&d) }))
        }
        Command::Payoffs(a) => {
            let (net, profile) = (load_net(&a.net)?, load_profile(&a.profile)?);
            let p = payoff::payoffs(&net, &profile)?;
            let total: Q = p.iter().sum();
            json(json!({ "payoffs": qs(&p), "total": q(&total) }))
        }
        Command::Cost(a) => {
            let (net, profile) = (load_net(&a.net)?, load_profile(&a.profile)?);
            json(json!({ "social_cost": q(&payoff::social_cost(&net, &profile)?) }))
        }
        Command::Construct { net, n, n_max } => {
            let net = load_net(net)?;
            if cli.format == Format::Csv {
                let hi = n_max.unwrap_or(*n);
                let mut out = String::from("n,cost,phi_n,bound\n");
                for m in *n..=hi {
                    let (profile, _) = construct::build_equilibrium(&net, m)?;
                    let cost = payoff::social_cost(&net, &profile)?;
                    let phi = efficiency::phi(&net, m)?;
                    let bound = efficiency::eq_cost_upper_bound(&net, m)?;
                    out.push_str(&format!("{m},{},{},{}\n", fmt_q(&cost), fmt_q(&phi), fmt_q(&bound)));
                }
                return Ok((Output::Csv(out), ok));
            }
            let (profile, plan) = construct::build_equilibrium(&net, *n)?;
            json(json!({
                "xi": q(&plan.xi),
                "n": plan.n,
                "n_prime": plan.n_prime,
                "social_cost": q(&payoff::social_cost(&net, &profile)?),
                "constructed_cost": q(&construct::constructed_cost(&plan)),
                "profile": to_value(&profile),
                "plan": to_value(&plan),
            }))
        }
        Command::Verify(a) => {
            let (net, profile) = (load_net(&a.net)?, load_profile(&a.profile)?);
            let cert = verify::is_nash(&net, &profile)?;
            let code = if cert.is_nash { ok } else { ExitCode::from(1) };
            Ok((Output::Json(to_value(&cert)), code))
        }
        Command::Report { net, n, budget } => {
            let net = load_net(net)?;
            json(to_value(&efficiency::efficiency_report(&net, *n, &budget.into())?))
        }
        Command::SearchOptimum { net, n, budget } => {
            let net = load_net(net)?;
            let b = SearchBudget::from(budget);
            let (profile, cost) = efficiency::empirical_optimum(&net, *n, &b)?;
            json(json!({ "cost": q(&cost), "profile": to_value(&profile), "seed": b.seed }))
        }
        Command::Examples { shape, n, k, b, profile, ell } => json(example(*shape, *n, *k, *b, profile.as_deref(), *ell)?),
    }
}

fn example(shape: ShapeName, n: Option<usize>, k: usize, b: Option<usize>, name: Option<&str>, ell: Option<usize>) -> Result<Value> {
    let need_n = || n.ok_or_else(|| anyhow!("--n is required for this profile"));
    let need_b = || b.ok_or_else(|| anyhow!("--b is required for this profile"));
    let (net, profile, extra) = match shape {
        ShapeName::Segment => {
            let net = examples::make_segment();
            let s = SegmentShape::detect(&net).expect("segment");
            let n = need_n()?;
            let p = match name.unwrap_or("opt") {
                "opt" => s.opt(n)?,
                "tilde" => s.tilde(n)?,
                "hat" => s.hat(n)?,
                "hat_ell" => s.hat_ell(n, ell.unwrap_or_else(|| SegmentShape::default_ell(n)))?,
                other => bail!(netloc::Error::InvalidArgument(format!("unknown segment profile {other:?}"))),
            };
            (net, p, Value::Null)
        }
        ShapeName::Circle => {
            let net = examples::make_circle(&Q::from_integer(1.into()))?;
            let c = CircleShape::detect(&net).expect("circle");
            let n = need_n()?;
            let p = match name.unwrap_or("tilde") {
                "tilde" => c.tilde(n)?,
                "hat" => c.hat(n)?,
                "breve" => c.breve(n)?,
                other => bail!(netloc::Error::InvalidArgument(format!("unknown circle profile {other:?}"))),
            };
            (net, p, Value::Null)
        }
        ShapeName::Star => {
            let net = examples::make_star(k)?;
            let s = StarShape::detect(&net).expect("star");
            match name.unwrap_or("equilibrium") {
                "equilibrium" => match s.equilibrium(need_n()?)? {
                    StarOutcome::Equilibrium(eq) => {
                        let extra = json!({
                            "kind": to_value(&eq.kind),
                            "xi": eq.xi.as_ref().map(q),
                            "interval": to_value(&eq.interval),
                        });
                        (net, eq.profile, extra)
                    }
                    StarOutcome::NoEquilibrium => {
                        return Ok(json!({ "network": net_value(&net), "outcome": "no_equilibrium" }))
                    }
                },
                "worst" => (net.clone(), s.worst_equilibrium(need_b()?)?, Value::Null),
                named @ ("good" | "worst_odd" | "opt_odd") => {
                    let r = s.remark_profiles(need_b()?)?;
                    let p = match named {
                        "good" => r.good,
                        "worst_odd" => r.worst_eq_odd,
                        _ => r.opt_odd,
                    };
                    (net, p, Value::Null)
                }
                other => bail!(netloc::Error::InvalidArgument(format!("unknown star profile {other:?}"))),
            }
        }
    };
    let mut out = json!({ "network": net_value(&net), "profile": to_value(&profile) });
    if !extra.is_null() {
        out["details"] = extra;
    }
    Ok(out)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<netloc::Error>() {
        Some(netloc::Error::Parse(_) | netloc::Error::InvalidNetwork(_)) => 2,
        Some(_) => 3,
        None => 2,
    }
}

fn main() -> ExitCode {
    if let Some(t) = std::env::var("NETLOC_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        // only fails if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, code)) => {
            let text = match out {
                Output::Json(v) => serde_json::to_string_pretty(&v).expect("JSON") + "\n",
                Output::Csv(s) => s,
            };
            let written = match &cli.out {
                Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display())),
                None => std::io::stdout().write_all(text.as_bytes()).context("writing stdout"),
            };
            if let Err(e) = written {
                eprintln!("error: {e:#}");
                return ExitCode::from(2);
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
