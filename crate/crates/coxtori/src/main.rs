use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use coxtori::isocrystal::{LangConfig, MatrixGroupSpec};
use coxtori::report::{self, ConfigError, RunConfig, VerificationReport};
use coxtori::root_datum::{Family, GroupType, Isogeny, RootDatum};
use coxtori::tori::{self, BasicLabel};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "coxtori", version, about = "Checks for tori, apartments and isocrystals attached to twisted Coxeter elements")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    Json,
    #[default]
    Table,
}

#[derive(Args, Clone, Debug)]
struct Common {
    /// Family: A, B, C, D, 2A or 2D.
    #[arg(long = "type", value_name = "TYPE")]
    family: Option<String>,
    /// Rank parameter (`n` for A and 2A, `m` otherwise).
    #[arg(long, visible_alias = "m")]
    n: Option<usize>,
    #[arg(long)]
    kappa: Option<i64>,
    /// Residue field size.
    #[arg(long, default_value_t = 2)]
    q: u64,
    /// Working precision of the isocrystal checks.
    #[arg(long)]
    precision: Option<i64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Named example; see `coxtori presets`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the output here instead of standard output.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check and report the results.
    Report {
        #[command(flatten)]
        common: Common,
        /// Largest rank parameter when `--n` is not given.
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        /// Isocrystal trials per slope.
        #[arg(long, default_value_t = 20)]
        trials: u64,
        /// Largest denominator of the isocrystal slopes.
        #[arg(long, default_value_t = 4)]
        max_slope_n: usize,
        /// Random Coxeter lifts tested for basicness per group.
        #[arg(long, default_value_t = 50)]
        lift_trials: usize,
        /// Random filtration mutations.
        #[arg(long, default_value_t = 200)]
        mutations: usize,
        /// Largest rank of the tori enumerations.
        #[arg(long, default_value_t = 4)]
        tori_max_rank: usize,
        /// Run only these sections (comma separated): pi1, newton, kottwitz,
        /// fixed-point, bounds, cross-section, filtration, tori, isocrystal.
        #[arg(long, value_delimiter = ',')]
        only: Vec<report::Section>,
        /// JSON object of expected values keyed by check id, replacing the built-in ones.
        #[arg(long, value_name = "FILE")]
        golden: Option<PathBuf>,
    },
    /// Rational classes of tori over the special Coxeter element.
    Tori {
        #[command(flatten)]
        common: Common,
        /// Isogeny variant: model, adjoint or sc.
        #[arg(long, default_value = "model")]
        isogeny: String,
        /// Basic label: `1`, `b1` (sl2xsl2 preset only) or `all`.
        #[arg(long, default_value = "all")]
        b: String,
    },
    /// Valuation bounds of the cross-section coordinates, both routes.
    Bounds {
        #[command(flatten)]
        common: Common,
    },
    /// Fixed point of c_kappa sigma on the apartment.
    FixedPoint {
        #[command(flatten)]
        common: Common,
    },
    /// Root filtration of the special Coxeter element.
    Filtration {
        #[command(flatten)]
        common: Common,
    },
    /// Newton points of the special lifts and of random Coxeter lifts.
    Newton {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        lift_trials: usize,
    },
    /// Kottwitz classes of the special lifts.
    Kottwitz {
        #[command(flatten)]
        common: Common,
    },
    /// Randomized check of the slope bound for cyclic relations.
    Isocrystal {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        trials: u64,
    },
    /// Level-by-level solution of g^-1 sigma_b(g) = y.
    LangLift {
        #[command(flatten)]
        common: Common,
        /// unipotent or torus.
        #[arg(long, default_value = "unipotent")]
        group: String,
        #[arg(long, default_value_t = 4)]
        levels: usize,
        /// Largest residue degree allowed for the solution.
        #[arg(long, default_value_t = 64)]
        degree_bound: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        /// Valuations of the diagonal twist b, comma separated; zeros by default.
        #[arg(long, value_delimiter = ',')]
        b: Vec<i64>,
    },
    /// List the named examples.
    Presets {
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
}

/// Exit status 2 with a message.
#[derive(Debug)]
struct Usage(String);

impl<E: std::fmt::Display> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FAIL),
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}

/// `Ok(pass)` or a configuration error.
fn run(cmd: Command) -> Result<bool, Usage> {
    match cmd {
        Command::Report { common, n_max, trials, max_slope_n, lift_trials, mutations, tori_max_rank, only, golden } => {
            let mut cfg = run_config(&common)?;
            cfg.max_rank = n_max;
            cfg.trials = trials;
            cfg.max_slope_denominator = max_slope_n;
            cfg.lift_trials = lift_trials;
            cfg.mutations = mutations;
            cfg.tori_max_rank = tori_max_rank;
            cfg.sections = only;
            let golden = golden.map(read_golden).transpose()?;
            let mut rep = report::cmd_report(&cfg)?;
            if let Some(g) = golden {
                let unknown = rep.apply_golden(&g);
                if !unknown.is_empty() {
                    return Err(Usage(format!("golden file names unknown checks: {}", unknown.join(", "))));
                }
            }
            emit(&common, &rep, false)
        }
        Command::Tori { common, isogeny, b } => cmd_tori(&common, &isogeny, &b),
        Command::Bounds { common } => topic(&common, report::bound_checks),
        Command::FixedPoint { common } => topic(&common, report::fixed_point_checks),
        Command::Filtration { common } => topic(&common, |cfg| {
            let mut c = report::filtration_checks(&RunConfig { mutations: 0, ..cfg.clone() });
            c.extend(report::cross_section_checks(cfg));
            c
        }),
        Command::Newton { common, lift_trials } => topic(&common, |cfg| report::newton_checks(&RunConfig { lift_trials, ..cfg.clone() })),
        Command::Kottwitz { common } => topic(&common, report::kottwitz_checks),
        Command::Isocrystal { common, trials } => cmd_isocrystal(&common, trials),
        Command::LangLift { common, group, levels, degree_bound, trials, b } => {
            let n = common.n.unwrap_or(3);
            let group = match group.to_ascii_lowercase().as_str() {
                "unipotent" => MatrixGroupSpec::Unipotent(n),
                "torus" => MatrixGroupSpec::Torus(n),
                other => return Err(Usage(format!("unknown group `{other}` (expected unipotent or torus)"))),
            };
            let b = if b.is_empty() { vec![0; n] } else { b };
            if b.len() != n {
                return Err(Usage(format!("--b needs {n} entries, got {}", b.len())));
            }
            let cfg = LangConfig { q: common.q, levels, degree_bound, ..LangConfig::default() };
            if coxtori::gf::prime_power(cfg.q).is_none() {
                return Err(ConfigError::NotPrimePower(cfg.q).into());
            }
            if levels == 0 || levels > cfg.max_levels {
                return Err(Usage(format!("--levels must be in 1..={}", cfg.max_levels)));
            }
            let check = report::lang_check(group, &b, &cfg, trials, common.seed);
            let config = json!({ "group": format!("{group:?}"), "b": b, "q": cfg.q, "levels": levels, "degree_bound": degree_bound, "trials": trials, "seed": common.seed });
            emit(&common, &VerificationReport::new(config, vec![check]), true)
        }
        Command::Presets { format } => {
            let list = report::presets();
            let text = match format {
                Format::Json => serde_json::to_string_pretty(&list).expect("presets serialize") + "\n",
                Format::Table => list.iter().map(|p| format!("{:<10} {}\n", p.name, p.description)).collect(),
            };
            print!("{text}");
            Ok(true)
        }
    }
}

fn read_golden(path: PathBuf) -> Result<BTreeMap<String, Value>, Usage> {
    let text = fs::read_to_string(&path).map_err(|e| Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

/// Apply `--preset`, then the explicit flags.
fn run_config(c: &Common) -> Result<RunConfig, Usage> {
    let mut cfg = RunConfig { q: c.q, precision: c.precision, seed: c.seed, ..RunConfig::default() };
    if let Some(name) = &c.preset {
        let p = report::preset(name).ok_or_else(|| Usage(format!("unknown preset `{name}`; see `coxtori presets`")))?;
        let t = p.group.ok_or_else(|| Usage(format!("preset `{name}` is not a classical type; use it with `tori`")))?;
        cfg.family = Some(t.family);
        cfg.rank = Some(t.rank_param);
        cfg.kappa = p.kappa;
    }
    if let Some(f) = &c.family {
        cfg.family = Some(Family::from_str(f)?);
    }
    if c.n.is_some() {
        cfg.rank = c.n;
    }
    if c.kappa.is_some() {
        cfg.kappa = c.kappa;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Per-topic commands need a single group type.
fn topic(common: &Common, build: impl Fn(&RunConfig) -> Vec<report::Check>) -> Result<bool, Usage> {
    let cfg = run_config(common)?;
    if cfg.family.is_none() || cfg.rank.is_none() {
        return Err(Usage("this command needs --type and --n (or --m), or --preset".into()));
    }
    let rep = VerificationReport::new(cfg.to_value(), build(&cfg));
    emit(common, &rep, true)
}

fn cmd_isocrystal(common: &Common, trials: u64) -> Result<bool, Usage> {
    let n = common.n.ok_or_else(|| Usage("isocrystal needs --n (the dimension)".into()))?;
    let cfg = RunConfig { trials, max_slope_denominator: n, ..run_config(&Common { family: None, n: None, kappa: None, preset: None, ..common.clone() })? };
    let lemma = coxtori::isocrystal::LemmaConfig { q: cfg.q, precision: cfg.precision, ..Default::default() };
    let checks = match common.kappa {
        Some(k) if (0..n as i64).contains(&k) => vec![report::isocrystal_check(n, k, trials, cfg.seed, &lemma)],
        Some(k) => return Err(Usage(format!("slope numerator {k} must lie in 0..{n}"))),
        None => report::isocrystal_checks(&cfg),
    };
    let mut config = cfg.to_value();
    config["n"] = json!(n);
    config["kappa"] = json!(common.kappa);
    emit(common, &VerificationReport::new(config, checks), true)
}

fn cmd_tori(common: &Common, isogeny: &str, b: &str) -> Result<bool, Usage> {
    let sl2 = common.preset.as_deref().is_some_and(|p| p.eq_ignore_ascii_case("sl2xsl2"));
    let (d, name, config) = if sl2 {
        (RootDatum::sl2_sl2_mod_mu2(), "sl2xsl2".to_string(), json!({ "preset": "sl2xsl2", "b": b }))
    } else {
        let cfg = run_config(common)?;
        let (Some(f), Some(r)) = (cfg.family, cfg.rank) else {
            return Err(Usage("tori needs --type and --n (or --m), or --preset".into()));
        };
        let iso = Isogeny::from_str(isogeny)?;
        let t = GroupType::new(f, r, iso)?;
        (RootDatum::build(t)?, report::key(t), json!({ "type": f.to_string(), "n": r, "isogeny": iso.to_string(), "b": b }))
    };
    let labels: Vec<(String, BasicLabel)> = match b {
        "1" => vec![("1".into(), BasicLabel::trivial(&d))],
        "b1" if sl2 => vec![("b1".into(), tori::sl2_example_nontrivial_label(&d))],
        "b1" => return Err(Usage("the label b1 belongs to the sl2xsl2 preset".into())),
        "all" => {
            let trivial = BasicLabel::trivial(&d);
            tori::basic_labels_in_box(&d, 1)
                .into_iter()
                .map(|l| {
                    let name = match () {
                        _ if l == trivial => "1".to_string(),
                        _ if sl2 => "b1".to_string(),
                        _ => format!("kottwitz={}", l.kottwitz.iter().map(i64::to_string).collect::<Vec<_>>().join(",")),
                    };
                    (name, l)
                })
                .collect()
        }
        other => return Err(Usage(format!("unknown label `{other}` (expected 1, b1 or all)"))),
    };
    let mut checks = Vec::new();
    for (label_name, label) in labels {
        let s = report::tori_summary(&d, &label)?;
        // Known counts: the worked example, and b = 1 where the action is trivial.
        let expected_classes = if sl2 {
            Some(if label_name == "1" { 2 } else { 1 })
        } else if d.group_type().is_some_and(|t| t.isogeny == Isogeny::Adjoint) {
            Some(1)
        } else {
            None
        };
        checks.push(report::tori_class_check(&name, &label_name, &s, expected_classes));
    }
    emit(common, &VerificationReport::new(config, checks), true)
}

fn emit(common: &Common, rep: &VerificationReport, details: bool) -> Result<bool, Usage> {
    let text = match common.format {
        Format::Json => rep.to_json(),
        Format::Table => rep.to_table_with(details),
    };
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(rep.all_pass())
}
