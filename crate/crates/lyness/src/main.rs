//! Command-line front end: table reproduction, invariant and rotation
//! queries, periodic-orbit search, number-theory reports, and verification
//! suites with per-property pass/fail output.

use clap::{Parser, Subcommand, ValueEnum};
use lyness::{flow, map, numtheory, periodic, tables};
use lyness::{Params, Point3};
use serde_json::json;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "lyness",
    about = "Numerical dynamics laboratory for the third-order Lyness map",
    version
)]
struct Cli {
    /// Map parameter a > 0.
    #[arg(long, global = true, default_value_t = 3.0)]
    a: f64,
    /// Integration tolerance in [1e-14, 1e-6].
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,
    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Exit nonzero if any row or property fails.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads for row evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write a gnuplot script next to the CSV output.
    #[arg(long, global = true)]
    emit_plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iterate the map from a starting point.
    Iterate {
        x: f64,
        y: f64,
        z: f64,
        /// Number of iterations.
        #[arg(short, long, default_value_t = 10)]
        n: u64,
    },
    /// First integrals, surface value and region at a point.
    Invariants { x: f64, y: f64, z: f64 },
    /// Rotation number on the invariant circle through a point.
    Rotation {
        x: f64,
        y: f64,
        z: f64,
        /// 1 for the map itself (surface circles only), 2 for its square.
        #[arg(short, long, default_value_t = 2)]
        power: u8,
        /// Also run the winding-angle oracle with this many iterates.
        #[arg(long)]
        oracle_iters: Option<usize>,
    },
    /// Reproduce one of the four benchmark tables.
    Table {
        /// Table id (1-4).
        id: u8,
    },
    /// Refine a seed toward an n-periodic point and cross-check its
    /// rotation number.
    FindPeriodic {
        x: f64,
        y: f64,
        z: f64,
        /// Attempted period.
        #[arg(short, long)]
        n: u64,
    },
    /// Excluded even periods and the parameter-specific denominator bound.
    Periods,
    /// Gap cover and excluded denominators of the rotation interval.
    Denominators,
    /// Scan a path of base points and report rotation numbers.
    Scan {
        /// Path family: points on the separating surface, or on a V1 level.
        #[arg(value_enum)]
        path: ScanKind,
        #[arg(long, default_value_t = 0.0)]
        t_start: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 11)]
        samples: usize,
    },
    /// Run a named verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScanKind {
    Surface,
    Level,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Suite {
    Invariance,
    Symmetry,
    Tables,
    Numtheory,
    Senar,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(cli: &Cli, text: &str) -> lyness::Result<()> {
    match &cli.out {
        Some(path) => {
            let mut f = std::fs::File::create(path)
                .map_err(|e| lyness::Error::Domain(format!("cannot open {path:?}: {e}")))?;
            f.write_all(text.as_bytes())
                .map_err(|e| lyness::Error::Domain(format!("write failed: {e}")))?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_plot_script(cli: &Cli) -> lyness::Result<()> {
    if !cli.emit_plot {
        return Ok(());
    }
    let Some(out) = &cli.out else {
        return Ok(());
    };
    let script = format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel 't'\n\
         set ylabel 'rotation number'\n\
         plot '{}' using 1:8 with linespoints\n",
        out.display()
    );
    let path = out.with_extension("gp");
    std::fs::write(&path, script)
        .map_err(|e| lyness::Error::Domain(format!("cannot write {path:?}: {e}")))?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.5}")).unwrap_or_default()
}

fn rows_to_csv(rows: &[tables::TableRow], preamble: &str) -> String {
    let mut s = String::new();
    s.push_str(preamble);
    s.push_str("t,x,y,z,T,tau,rho_F,rho_F2,flag\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{:.5},{:.5},{:.5},{},{},{},{},{}",
            r.t,
            r.x,
            r.y,
            r.z,
            fmt_opt(r.t_period),
            fmt_opt(r.tau),
            fmt_opt(r.rho_f),
            fmt_opt(r.rho_f2),
            r.flag
        );
    }
    s
}

fn params_from(cli: &Cli) -> lyness::Result<Params> {
    Params::new(cli.a)
}

fn run(cli: &Cli) -> lyness::Result<ExitCode> {
    match &cli.command {
        Command::Iterate { x, y, z, n } => {
            let pr = params_from(cli)?;
            let mut p = Point3::new(*x, *y, *z)?;
            match cli.format {
                Format::Csv => {
                    let mut s = String::from("i,x,y,z\n");
                    for i in 0..=*n {
                        let _ = writeln!(s, "{i},{:.5},{:.5},{:.5}", p.x, p.y, p.z);
                        p = map::map_f(&p, &pr);
                    }
                    emit(cli, &s)?;
                }
                Format::Json => {
                    let mut out = Vec::new();
                    for i in 0..=*n {
                        out.push(json!({"i": i, "x": p.x, "y": p.y, "z": p.z}));
                        p = map::map_f(&p, &pr);
                    }
                    emit(cli, &format!("{}\n", serde_json::to_string_pretty(&out).unwrap()))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Invariants { x, y, z } => {
            let pr = params_from(cli)?;
            let p = Point3::new(*x, *y, *z)?;
            let lv = map::invariants(&p, &pr);
            let g = map::g_value(&p, &pr);
            let region = match map::classify_region(&p, &pr) {
                map::Region::Positive => "positive",
                map::Region::Negative => "negative",
                map::Region::OnSurface => "on-surface",
            };
            match cli.format {
                Format::Csv => emit(
                    cli,
                    &format!("k,h,g,region\n{:.5},{:.5},{:.5},{region}\n", lv.k, lv.h, g),
                )?,
                Format::Json => emit(
                    cli,
                    &format!(
                        "{}\n",
                        serde_json::to_string_pretty(
                            &json!({"k": lv.k, "h": lv.h, "g": g, "region": region})
                        )
                        .unwrap()
                    ),
                )?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Rotation {
            x,
            y,
            z,
            power,
            oracle_iters,
        } => {
            let pr = params_from(cli)?;
            let p = Point3::new(*x, *y, *z)?;
            let r = flow::rotation_number(&p, &pr, *power, cli.tol)?;
            let oracle = oracle_iters
                .map(|iters| flow::rotation_number_oracle(&p, &pr, *power, iters))
                .transpose()?;
            match cli.format {
                Format::Csv => {
                    let mut s = String::from("T,tau,rho,power,oracle\n");
                    let _ = writeln!(
                        s,
                        "{:.5},{:.5},{:.5},{},{}",
                        r.t_period,
                        r.tau,
                        r.rho,
                        r.power,
                        fmt_opt(oracle)
                    );
                    emit(cli, &s)?;
                }
                Format::Json => emit(
                    cli,
                    &format!(
                        "{}\n",
                        serde_json::to_string_pretty(&json!({
                            "T": r.t_period, "tau": r.tau, "rho": r.rho,
                            "power": r.power, "oracle": oracle
                        }))
                        .unwrap()
                    ),
                )?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Table { id } => run_table(cli, *id),
        Command::FindPeriodic { x, y, z, n } => {
            let pr = params_from(cli)?;
            let seed = Point3::new(*x, *y, *z)?;
            let orbit = periodic::newton_refine(&seed, *n, &pr, cli.tol.max(1e-13));
            let orbit = periodic::with_rho_check(orbit, &pr, if *n % 2 == 1 { 1 } else { 2 });
            let report = json!({
                "point": {"x": orbit.point.x, "y": orbit.point.y, "z": orbit.point.z},
                "n": orbit.n,
                "residual_l1": orbit.residual_l1,
                "converged": orbit.converged,
                "rho_check": orbit.rho_check,
            });
            emit(cli, &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()))?;
            Ok(if orbit.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Periods => {
            let pr = params_from(cli)?;
            let even = numtheory::excluded_even_periods()?;
            let q0 = numtheory::q0_for_a(&pr).ok().map(|b| b.to_string());
            emit(
                cli,
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "excluded_even_periods": even,
                        "a": pr.a(),
                        "q0_bound": q0,
                    }))
                    .unwrap()
                ),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Denominators => {
            let interval = numtheory::i_rot();
            let published = numtheory::gap_cover(&interval, numtheory::ThresholdMode::Published3)?;
            let strict = numtheory::gap_cover(&interval, numtheory::ThresholdMode::Strict4)?;
            let excluded = numtheory::excluded_denominators(&interval)?;
            emit(
                cli,
                &format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "interval": {"lo": interval.lo.value(), "hi": interval.hi.value()},
                        "p_next": strict.p_next,
                        "primes": strict.primes,
                        "exponents_strict4": strict.exponents,
                        "exponents_published3": published.exponents,
                        "bound_strict4": strict.bound.to_string(),
                        "bound_published3": published.bound.to_string(),
                        "excluded_denominators": excluded,
                    }))
                    .unwrap()
                ),
            )?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Scan {
            path,
            t_start,
            t_end,
            samples,
        } => {
            let pr = params_from(cli)?;
            let t_values: Vec<f64> = if *samples == 0 {
                Vec::new()
            } else if *samples == 1 {
                vec![*t_start]
            } else {
                (0..*samples)
                    .map(|i| t_start + (t_end - t_start) * i as f64 / (*samples as f64 - 1.0))
                    .collect()
            };
            let scan = match path {
                ScanKind::Surface => tables::ScanPath::OnSurface { t_values },
                ScanKind::Level => tables::ScanPath::OnLevel { t_values },
            };
            let rows = tables::scan_path(&scan, &pr, cli.tol)?;
            let mono = monotonicity_report(&rows);
            let text = match cli.format {
                Format::Csv => rows_to_csv(&rows, &format!("# {mono}\n")),
                Format::Json => format!(
                    "{}\n",
                    serde_json::to_string_pretty(&json!({
                        "monotonicity": mono,
                        "rows": rows,
                    }))
                    .unwrap()
                ),
            };
            emit(cli, &text)?;
            emit_plot_script(cli)?;
            let failed = rows.iter().any(|r| r.flag.starts_with("error"));
            Ok(if failed && cli.strict {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Verify { suite } => run_verify(cli, *suite),
    }
}

/// Evidence line about whether the rotation numbers move monotonically
/// along the scan (an open question, reported but never asserted).
fn monotonicity_report(rows: &[tables::TableRow]) -> String {
    let vals: Vec<f64> = rows.iter().filter_map(|r| r.rho_f2.or(r.rho_f)).collect();
    if vals.len() < 3 {
        return "monotonicity: insufficient data".into();
    }
    let increasing = vals.windows(2).all(|w| w[1] >= w[0] - 1e-12);
    let decreasing = vals.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    match (increasing, decreasing) {
        (true, _) => "monotonicity: nondecreasing along the scan".into(),
        (_, true) => "monotonicity: nonincreasing along the scan".into(),
        _ => "monotonicity: not monotone along the scan".into(),
    }
}

fn run_table(cli: &Cli, id: u8) -> lyness::Result<ExitCode> {
    let Some((pr, path)) = tables::table_setup(id) else {
        eprintln!("error: table id must be 1-4");
        return Ok(ExitCode::from(2));
    };
    let rows = tables::scan_path(&path, &pr, cli.tol)?;
    let mut preamble = String::new();
    if id == 4 {
        // The commonly quoted caption level for this scan (0.24956) matches
        // neither the recomputed level nor its own closed form; report both.
        let recomputed = tables::on_level_k(&pr)?;
        let s = 1587984839746.0_f64.sqrt();
        let closed = 101.0 / 272452149.0 * (923217.0 + s) * (69592724.0 + 3.0 * s)
            / (-890190.0 + s);
        let _ = writeln!(
            preamble,
            "# level: recomputed={recomputed:.5} closed_form={closed:.5}; \
             note: the widely quoted caption value 0.24956 matches neither \
             (it repeats a rotation-number entry); row values are authoritative"
        );
    }
    let text = match cli.format {
        Format::Csv => rows_to_csv(&rows, &preamble),
        Format::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&json!({"table": id, "rows": rows})).unwrap()
        ),
    };
    emit(cli, &text)?;
    emit_plot_script(cli)?;
    let failed = rows.iter().any(|r| r.flag.starts_with("error"));
    Ok(if failed && cli.strict {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

struct SuiteReport {
    lines: Vec<String>,
    ok: bool,
}

impl SuiteReport {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            ok: true,
        }
    }

    fn check(&mut self, name: &str, pass: bool, detail: String) {
        self.ok &= pass;
        self.lines
            .push(format!("{} {name} {detail}", if pass { "PASS" } else { "FAIL" }));
    }
}

fn random_octant_points(n: usize, seed: u64) -> Vec<Point3> {
    // Deterministic low-discrepancy-ish sampling without extra dependencies.
    let mut state = seed.wrapping_mul(0x9E3779B97F4A7C15).wrapping_add(1);
    let mut next = || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        0.05 + 7.95 * (state >> 11) as f64 / (1u64 << 53) as f64
    };
    (0..n)
        .map(|_| Point3::new(next(), next(), next()).unwrap())
        .collect()
}

fn run_verify(cli: &Cli, suite: Suite) -> lyness::Result<ExitCode> {
    let mut rep = SuiteReport::new();
    match suite {
        Suite::Invariance => {
            let pr = params_from(cli)?;
            let pts = random_octant_points(1000, 4242);
            let mut max_v1 = 0.0_f64;
            let mut max_v2 = 0.0_f64;
            let mut max_gf = 0.0_f64;
            for p in &pts {
                let q = map::map_f(p, &pr);
                let lv0 = map::invariants(p, &pr);
                let lv1 = map::invariants(&q, &pr);
                max_v1 = max_v1.max(((lv1.k - lv0.k) / lv0.k).abs());
                max_v2 = max_v2.max(((lv1.h - lv0.h) / lv0.h).abs());
                let cof = -(pr.a() + p.y + p.z) / (p.x * p.x);
                let g0 = map::g_value(p, &pr);
                let g1 = map::g_value(&q, &pr);
                let scale = g1.abs().max(g0.abs()).max(1e-9);
                max_gf = max_gf.max((g1 - cof * g0).abs() / scale);
            }
            rep.check("invariance.v1", max_v1 < 1e-12, format!("max_rel={max_v1:.3e}"));
            rep.check("invariance.v2", max_v2 < 1e-12, format!("max_rel={max_v2:.3e}"));
            rep.check(
                "invariance.surface_cofactor",
                max_gf < 1e-12,
                format!("max_rel={max_gf:.3e}"),
            );
            if (pr.a() - 1.0).abs() < 1e-12 {
                let mut max_f8 = 0.0_f64;
                for p in &pts {
                    let q = map::map_f_iter(p, &pr, 8);
                    let rel = (q.to_vector() - p.to_vector()).norm() / p.to_vector().norm();
                    max_f8 = max_f8.max(rel);
                }
                rep.check(
                    "invariance.eighth_iterate_identity",
                    max_f8 < 1e-9,
                    format!("max_rel={max_f8:.3e}"),
                );
            }
        }
        Suite::Symmetry => {
            let pr = params_from(cli)?;
            let pts = random_octant_points(500, 515);
            let mut worst = 0.0_f64;
            for p in &pts {
                let lhs = flow::vector_field(&map::map_f(p, &pr), &pr);
                let rhs = map::jacobian_f(p, &pr) * flow::vector_field(p, &pr);
                worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1e-6));
            }
            rep.check("symmetry.commutation", worst < 1e-9, format!("max_rel={worst:.3e}"));
        }
        Suite::Tables => {
            for id in 1..=4u8 {
                let (pr, path) = tables::table_setup(id).unwrap();
                let rows = tables::scan_path(&path, &pr, cli.tol)?;
                let golden = tables::golden_table(id);
                let mut worst = 0.0_f64;
                let mut failures = 0usize;
                for (r, g) in rows.iter().zip(golden.iter()) {
                    if r.flag.starts_with("error") {
                        failures += 1;
                        continue;
                    }
                    let mut diffs: Vec<f64> = Vec::new();
                    if let Some(v) = r.rho_f2 {
                        diffs.push((v - g.rho_f2).abs());
                    }
                    if id == 1 || id == 3 {
                        if let (Some(v), Some(gv)) = (r.rho_f, g.rho_f) {
                            diffs.push((v - gv).abs());
                        }
                        if let (Some(v), Some(gv)) = (r.t_period, g.t_period) {
                            diffs.push((v - gv).abs());
                        }
                        if let (Some(v), Some(gv)) = (r.tau, g.tau) {
                            diffs.push((v - gv).abs());
                        }
                    }
                    for d in diffs {
                        worst = worst.max(d);
                    }
                }
                rep.check(
                    &format!("tables.table{id}"),
                    failures == 0 && worst < 5e-5,
                    format!("max_abs={worst:.3e} failed_rows={failures}"),
                );
            }
        }
        Suite::Numtheory => {
            let interval = numtheory::i_rot();
            let excluded = numtheory::excluded_denominators(&interval)?;
            let expected: Vec<u64> = vec![1, 2, 3, 5, 6, 8, 9, 12, 14, 20];
            rep.check(
                "numtheory.excluded_denominators",
                excluded == expected,
                format!("{excluded:?}"),
            );
            let published = numtheory::gap_cover(&interval, numtheory::ThresholdMode::Published3)?;
            let strict = numtheory::gap_cover(&interval, numtheory::ThresholdMode::Strict4)?;
            rep.check(
                "numtheory.bound_published3",
                published.bound == num_bigint::BigUint::from(2_329_089_562_800u64),
                format!("{}", published.bound),
            );
            rep.check(
                "numtheory.bound_strict4",
                strict.bound == num_bigint::BigUint::from(4_658_179_125_600u64),
                format!("{}", strict.bound),
            );
            let even = numtheory::excluded_even_periods()?;
            rep.check(
                "numtheory.excluded_even_periods",
                even == vec![4, 6, 10, 12, 16, 18, 24, 28, 40],
                format!("{even:?}"),
            );
        }
        Suite::Senar => {
            let w = periodic::senar_witness();
            rep.check(
                "senar.a_star",
                (w.a_star - 8.29590).abs() < 5e-6,
                format!("a*={:.6}", w.a_star),
            );
            let pr = Params::new(w.a_star)?;
            let rho = map::rho_limit_fixed(&pr);
            rep.check(
                "senar.rotation_limit_is_one_seventh",
                (rho - 1.0 / 7.0).abs() < 1e-12,
                format!("rho={rho:.15}"),
            );
            let res = periodic::residual_norm(&w.q, 7, &pr)?;
            rep.check(
                "senar.witness_not_seven_periodic",
                res > 1e-3,
                format!("residual={res:.3e}"),
            );
        }
    }
    let mut text = rep.lines.join("\n");
    text.push('\n');
    emit(cli, &text)?;
    Ok(if rep.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}
