mod input;
mod plot;

use std::io::Write;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use serde::Serialize;

use sumset_core::grid::{self, PipelineOptions};
use sumset_core::rational::{self, Rational};
use sumset_core::search;
use sumset_core::sumsets::set_default_engine;
use sumset_core::theorems::{self, InequalityId, PetridisMode, PetridisOptions, QuotientMap};
use sumset_core::{Config, Engine, FiniteAbelianGroup, GroupSubset, VerificationReport};

#[derive(Parser)]
#[command(name = "sumset", version, about = "Exact sumset computation and inequality checks")]
struct Cli {
    /// Sumset engine
    #[arg(long, global = true, default_value = "auto")]
    engine: String,
    /// Worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for random sets and searches
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// SVG line chart (convergence only)
    #[arg(long, global = true)]
    plot: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Check one inequality on explicit sets
    Verify {
        #[arg(long)]
        group: String,
        #[arg(long)]
        ineq: String,
        #[arg(long)]
        set_a: String,
        /// Set JSON, "0,1,4", or "same" to reuse A
        #[arg(long, default_value = "same")]
        set_b: String,
        /// Third set for ruzsa_triangle
        #[arg(long)]
        set_c: Option<String>,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        /// Codomain for quotient_lemma, e.g. Z4
        #[arg(long)]
        to: Option<String>,
    },
    /// Petridis subset selection with a verified certificate
    Petridis {
        #[arg(long)]
        group: String,
        #[arg(long)]
        set_a: String,
        #[arg(long, default_value = "same")]
        set_b: String,
        #[arg(long, default_value_t = 4)]
        m_max: u32,
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        #[arg(long, default_value_t = 20)]
        cap: usize,
    },
    /// Grid discretization argument for closed sets of the torus
    Pipeline {
        #[arg(long)]
        set_a: String,
        #[arg(long, default_value = "same")]
        set_b: String,
        #[arg(long, default_value = "1/10")]
        epsilon: String,
        #[arg(long, default_value_t = 3)]
        m_max: u32,
        /// Finite factor Z, e.g. Z2
        #[arg(long)]
        finite: Option<String>,
        #[arg(long, default_value_t = 16)]
        max_doublings: u32,
    },
    /// Pre-Cantor sets on the ternary grid
    CantorDemo {
        #[arg(long, default_value_t = 3)]
        depth: u32,
        /// (m, n) pairs, e.g. "1,0;2,0;1,1"
        #[arg(long, default_value = "1,0;2,0;1,1;0,2;3,0;2,1;2,2")]
        pairs: String,
    },
    /// Outer and inner measures along a list of resolutions
    Convergence {
        #[arg(long)]
        set_a: String,
        #[arg(long, default_value = "same")]
        set_b: String,
        #[arg(long, default_value = "8,16,32,64")]
        resolutions: String,
        #[arg(long)]
        finite: Option<String>,
    },
    /// Quotient lemma over every codomain subset and random pairs
    QuotientDemo {
        #[arg(long)]
        group: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value = "1/2")]
        density: String,
    },
    /// Near-tight instances in a small group
    Search {
        #[arg(long)]
        group: String,
        #[arg(long)]
        ineq: String,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 10)]
        top: usize,
        /// Random trials instead of the exhaustive scan
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value = "1/2")]
        density: String,
    },
    /// Quick end-to-end checks of the library
    Selftest,
}

struct Outcome {
    text: String,
    pass: bool,
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn ratio_arg(flag: &str, s: &str) -> Result<Rational, String> {
    rational::parse(s).map_err(|e| format!("{flag}: {e}"))
}

fn report_csv(r: &VerificationReport) -> String {
    format!(
        "inequality,group,m,n,lhs,rhs,pass,slack,status\n{},{},{},{},{},{},{},{},{}\n",
        r.inequality,
        r.group,
        r.m.map_or(String::new(), |v| v.to_string()),
        r.n.map_or(String::new(), |v| v.to_string()),
        r.lhs,
        r.rhs,
        r.pass,
        r.slack,
        serde_json::to_value(r.status).unwrap().as_str().unwrap()
    )
}

fn csv_unavailable(cmd: &str) -> String {
    format!("--format csv is not available for {cmd}")
}

fn finite_group(arg: &Option<String>) -> Result<Arc<FiniteAbelianGroup>, String> {
    match arg {
        Some(s) => s
            .parse::<FiniteAbelianGroup>()
            .map(Arc::new)
            .map_err(|e| format!("--finite: {e}")),
        None => Ok(Arc::new(FiniteAbelianGroup::trivial())),
    }
}

fn second(
    arg: &str,
    first: &GroupSubset,
    g: &Arc<FiniteAbelianGroup>,
    seed: u64,
    flag: &str,
) -> Result<GroupSubset, String> {
    if arg == "same" {
        Ok(first.clone())
    } else {
        input::subset(flag, arg, g, seed.wrapping_add(1))
    }
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    let seed = cli.seed;
    let format = cli.format;
    if cli.plot.is_some() && !matches!(cli.command, Command::Convergence { .. }) {
        return Err("--plot is only available for convergence".into());
    }
    match &cli.command {
        Command::Verify {
            group,
            ineq,
            set_a,
            set_b,
            set_c,
            m,
            n,
            to,
        } => {
            let id: InequalityId = ineq.parse().map_err(|e| format!("--ineq: {e}"))?;
            let g = input::group(group)?;
            let a = input::subset("--set-a", set_a, &g, seed)?;
            let b = second(set_b, &a, &g, seed, "--set-b")?;
            let p = g.order() as u64;
            let report = match id {
                InequalityId::Plunnecke => theorems::check_plunnecke(&a, &b, *m, *n),
                InequalityId::PlunneckeNormalized => theorems::check_plunnecke_normalized(&a, &b, *m, *n),
                InequalityId::CauchyDavenport => theorems::check_cauchy_davenport(&a, &b, p),
                InequalityId::NbBound => theorems::check_nb_bound(&a, &b, p, *m),
                InequalityId::RuzsaTriangle => {
                    let c = match set_c {
                        Some(c) => second(c, &a, &g, seed.wrapping_add(1), "--set-c")?,
                        None => return Err("ruzsa_triangle needs --set-c".into()),
                    };
                    theorems::check_ruzsa_triangle(&a, &b, &c)
                }
                InequalityId::QuotientLemma => {
                    let to = to.as_deref().ok_or("quotient_lemma needs --to")?;
                    let target = input::group(to)?;
                    let q = QuotientMap::onto(&g, &target).map_err(|e| format!("--to: {e}"))?;
                    theorems::check_quotient_lemma(&a, &b, &q)
                }
            }
            .map_err(|e| e.to_string())?;
            let text = match format {
                Format::Json => json(&report),
                Format::Csv => report_csv(&report),
            };
            Ok(Outcome {
                text,
                pass: !report.is_violation(),
            })
        }
        Command::Petridis {
            group,
            set_a,
            set_b,
            m_max,
            mode,
            cap,
        } => {
            if format == Format::Csv {
                return Err(csv_unavailable("petridis"));
            }
            let mode: PetridisMode = mode.parse().map_err(|e| format!("--mode: {e}"))?;
            let g = input::group(group)?;
            let a = input::subset("--set-a", set_a, &g, seed)?;
            let b = second(set_b, &a, &g, seed, "--set-b")?;
            let opts = PetridisOptions {
                cap: *cap,
                ..PetridisOptions::new(mode, *m_max)
            };
            let cert = theorems::petridis_select_with(&a, &b, &opts).map_err(|e| e.to_string())?;
            Ok(Outcome {
                text: json(&cert),
                pass: cert.holds(),
            })
        }
        Command::Pipeline {
            set_a,
            set_b,
            epsilon,
            m_max,
            finite,
            max_doublings,
        } => {
            if format == Format::Csv {
                return Err(csv_unavailable("pipeline"));
            }
            let a = input::constructible("--set-a", set_a)?;
            let b = if set_b == "same" {
                a.clone()
            } else {
                input::constructible("--set-b", set_b)?
            };
            let mut opts = PipelineOptions::new(ratio_arg("--epsilon", epsilon)?, *m_max);
            opts.finite = finite_group(finite)?;
            opts.max_doublings = *max_doublings;
            let r = grid::petridis_pipeline(&a, &b, &opts).map_err(|e| e.to_string())?;
            Ok(Outcome {
                text: json(&r),
                pass: r.pass,
            })
        }
        Command::CantorDemo { depth, pairs } => {
            let pairs = input::pairs(pairs)?;
            let r = grid::cantor_demo(*depth, &pairs, &Config::default()).map_err(|e| e.to_string())?;
            let text = match format {
                Format::Json => json(&r),
                Format::Csv => {
                    let mut s = String::from("depth,m,n,measure,claim_applies,ok\n");
                    for row in &r.rows {
                        s.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            r.depth, row.m, row.n, row.measure, row.claim_applies, row.ok
                        ));
                    }
                    s
                }
            };
            Ok(Outcome { text, pass: r.pass })
        }
        Command::Convergence {
            set_a,
            set_b,
            resolutions,
            finite,
        } => {
            let a = input::constructible("--set-a", set_a)?;
            let b = if set_b == "same" {
                a.clone()
            } else {
                input::constructible("--set-b", set_b)?
            };
            let res: Vec<usize> = input::list("--resolutions", resolutions)?;
            let c = grid::convergence_curve(&a, &b, &res, &finite_group(finite)?, &Config::default())
                .map_err(|e| e.to_string())?;
            if let Some(path) = &cli.plot {
                let f = |r: &Rational| r.to_f64().unwrap_or(f64::NAN);
                let col = |get: fn(&grid::CurveRow) -> &Rational| {
                    c.rows.iter().map(|r| ((r.resolution as f64).log2(), f(get(r)))).collect()
                };
                let series = [
                    plot::Series { name: "outer A", points: col(|r| &r.outer_a) },
                    plot::Series { name: "inner A", points: col(|r| &r.inner_a) },
                    plot::Series { name: "outer sum", points: col(|r| &r.outer_sum) },
                    plot::Series { name: "inner sum", points: col(|r| &r.inner_sum) },
                ];
                let svg = plot::line_chart("Grid measures", "log2 N", &series);
                std::fs::write(path, svg).map_err(|e| format!("--plot: cannot write {path}: {e}"))?;
            }
            let text = match format {
                Format::Json => json(&c),
                Format::Csv => {
                    let mut s = String::from("resolution,outer_a,inner_a,outer_sum,inner_sum\n");
                    for r in &c.rows {
                        s.push_str(&format!(
                            "{},{},{},{},{}\n",
                            r.resolution, r.outer_a, r.inner_a, r.outer_sum, r.inner_sum
                        ));
                    }
                    s
                }
            };
            Ok(Outcome {
                text,
                pass: c.outer_monotone && c.inner_monotone && c.bounded,
            })
        }
        Command::QuotientDemo {
            group,
            to,
            trials,
            density,
        } => {
            if format == Format::Csv {
                return Err(csv_unavailable("quotient-demo"));
            }
            let g = input::group(group)?;
            let target = input::group(to).map_err(|e| e.replace("--group", "--to"))?;
            let q = QuotientMap::onto(&g, &target).map_err(|e| format!("--to: {e}"))?;
            let r = theorems::quotient_demo(&q, *trials, &ratio_arg("--density", density)?, seed)
                .map_err(|e| e.to_string())?;
            Ok(Outcome {
                text: json(&r),
                pass: r.pass,
            })
        }
        Command::Search {
            group,
            ineq,
            m,
            n,
            top,
            random,
            density,
        } => {
            let id: InequalityId = ineq.parse().map_err(|e| format!("--ineq: {e}"))?;
            let g = input::group(group)?;
            let out = match random {
                Some(trials) => search::random_search(
                    &g,
                    id,
                    *m,
                    *n,
                    *trials,
                    &ratio_arg("--density", density)?,
                    seed,
                    *top,
                ),
                None => search::exhaustive_search(&g, id, *m, *n, *top, &Config::default()),
            }
            .map_err(|e| e.to_string())?;
            let text = match format {
                Format::Csv => search::hits_to_csv(&out.hits),
                Format::Json => {
                    #[derive(Serialize)]
                    struct Hit<'a> {
                        a: String,
                        b: String,
                        report: &'a VerificationReport,
                    }
                    #[derive(Serialize)]
                    struct Out<'a> {
                        evaluated: u64,
                        skipped: u64,
                        violations: u64,
                        hits: Vec<Hit<'a>>,
                    }
                    json(&Out {
                        evaluated: out.evaluated,
                        skipped: out.skipped,
                        violations: out.violations,
                        hits: out
                            .hits
                            .iter()
                            .map(|h| Hit {
                                a: h.a.bits().to_hex(),
                                b: h.b.bits().to_hex(),
                                report: &h.report,
                            })
                            .collect(),
                    })
                }
            };
            Ok(Outcome {
                text,
                pass: out.violations == 0,
            })
        }
        Command::Selftest => {
            if format == Format::Csv {
                return Err(csv_unavailable("selftest"));
            }
            selftest()
        }
    }
}

fn selftest() -> Result<Outcome, String> {
    let e = |e: sumset_core::Error| e.to_string();
    let cfg = Config::default();
    let z = |n: u64| Arc::new(FiniteAbelianGroup::cyclic(n).unwrap());
    let set = |g: &Arc<FiniteAbelianGroup>, idx: &[usize]| {
        GroupSubset::from_indices(g.clone(), idx.iter().copied()).unwrap()
    };
    let mut checks: Vec<(&str, bool)> = Vec::new();

    let g5 = z(5);
    let s = sumset_core::sumset_direct(&set(&g5, &[0, 1]), &set(&g5, &[0, 2])).map_err(e)?;
    checks.push(("sumset Z5 {0,1}+{0,2}", s == set(&g5, &[0, 1, 2, 3])));

    let g = z(4096);
    let half = rational::ratio(1, 3);
    let x = GroupSubset::random(g.clone(), &half, 1).map_err(e)?;
    let y = GroupSubset::random(g.clone(), &half, 2).map_err(e)?;
    checks.push((
        "engines agree in Z4096",
        sumset_core::sumset_direct(&x, &y).map_err(e)? == sumset_core::sumset_convolution(&x, &y).map_err(e)?,
    ));

    let g8 = z(8);
    let a = set(&g8, &[0, 1]);
    let r = theorems::check_plunnecke(&a, &a, 2, 0).map_err(e)?;
    checks.push(("plunnecke Z8 m=2 n=0", r.pass && r.lhs == rational::ratio(3, 8)));

    let c = theorems::petridis_select(&set(&g5, &[0, 1]), &set(&g5, &[0, 1]), 2, PetridisMode::Exhaustive)
        .map_err(e)?;
    checks.push(("petridis Z5", c.holds() && c.ratio == rational::ratio(3, 2)));

    let cd = grid::cantor_demo(3, &[(2, 0), (1, 1), (2, 2)], &cfg).map_err(e)?;
    checks.push(("cantor depth 3", cd.pass));

    let q = QuotientMap::onto(&z(12), &FiniteAbelianGroup::cyclic(4).unwrap()).map_err(e)?;
    let qd = theorems::quotient_demo(&q, 20, &rational::ratio(1, 2), 0).map_err(e)?;
    checks.push(("quotient Z12 -> Z4", qd.pass));

    let quarter = grid::ConstructibleSet::interval(rational::int(0), rational::ratio(1, 4));
    let p = grid::petridis_pipeline(&quarter, &quarter, &PipelineOptions::new(rational::ratio(1, 10), 2))
        .map_err(e)?;
    checks.push(("pipeline [0,1/4]", p.pass));

    #[derive(Serialize)]
    struct Line<'a> {
        check: &'a str,
        pass: bool,
    }
    let lines: Vec<Line> = checks.iter().map(|&(check, pass)| Line { check, pass }).collect();
    Ok(Outcome {
        pass: checks.iter().all(|c| c.1),
        text: json(&lines),
    })
}

fn emit(cli: &Cli, text: &str) -> Result<(), String> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("--out: cannot write {path}: {e}")),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("stdout: {e}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let setup = || -> Result<(), String> {
        let engine: Engine = cli.engine.parse().map_err(|e| format!("--engine: {e}"))?;
        set_default_engine(engine);
        if let Some(t) = cli.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| format!("--threads: {e}"))?;
        }
        Ok(())
    };
    let result = setup().and_then(|_| run(&cli)).and_then(|o| {
        emit(&cli, &o.text)?;
        Ok(o.pass)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
