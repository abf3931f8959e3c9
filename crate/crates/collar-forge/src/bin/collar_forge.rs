//! Command-line front end: build fixtures, verify Lipschitz bounds,
//! export fiber trajectories.

use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use collar_forge::bicollar::{bicollar_epsilon, pasting_check, restrict_bicollar, RestrictionConstants};
use collar_forge::collar::ValidationConfig;
use collar_forge::error::CollarError;
use collar_forge::estimator::{verify, Verdict, VerifyConfig};
use collar_forge::fixtures::{make_fixture, Fixture};
use collar_forge::sampling;

#[derive(Parser)]
#[command(name = "collar-forge", version, about = "Numerical collar construction and certification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct FixtureArgs {
    /// Fixture name: circle, circle_misdeclared, square, strip.
    #[arg(long)]
    fixture: String,
    /// Circle radius.
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    /// Strip shear.
    #[arg(long, allow_negative_numbers = true)]
    tilt: Option<f64>,
    /// Square side length.
    #[arg(long, allow_negative_numbers = true)]
    side: Option<f64>,
    /// Number of square collars (4 or 8).
    #[arg(long)]
    n_collars: Option<u64>,
    /// Collar enumeration order, comma-separated indices.
    #[arg(long)]
    order: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl FixtureArgs {
    fn build(&self) -> collar_forge::Result<Fixture> {
        let mut params = serde_json::Map::new();
        if let Some(r) = self.r {
            params.insert("r".into(), r.into());
        }
        if let Some(t) = self.tilt {
            params.insert("tilt".into(), t.into());
        }
        if let Some(s) = self.side {
            params.insert("side".into(), s.into());
        }
        if let Some(n) = self.n_collars {
            params.insert("n_collars".into(), n.into());
        }
        let fixture = make_fixture(&self.fixture, &serde_json::Value::Object(params))?;
        match &self.order {
            None => Ok(fixture),
            Some(spec) => {
                let order: Vec<usize> = spec
                    .split(',')
                    .map(|s| {
                        s.trim().parse::<usize>().map_err(|e| {
                            CollarError::InvalidParameter(format!("order entry '{s}': {e}"))
                        })
                    })
                    .collect::<collar_forge::Result<_>>()?;
                fixture.with_order(order)
            }
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build and validate a fixture, writing its JSON description.
    Build {
        #[command(flatten)]
        fixture: FixtureArgs,
        /// Output path for the fixture JSON (default: <name>.json).
        #[arg(long)]
        out: Option<String>,
    },
    /// Build the global collar and verify the Lipschitz bounds.
    Verify {
        #[command(flatten)]
        fixture: FixtureArgs,
        /// Number of sampled pairs for each constant estimate.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Write the report JSON here instead of stdout.
        #[arg(long)]
        out: Option<String>,
        /// Also write every sampled quotient as CSV rows.
        #[arg(long)]
        emit_quotients: Option<String>,
        /// Restrict the glued bicollar to heights [-eps, eps]
        /// (two-sided fixtures only) and report the restricted bounds.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Export fiber trajectories of the global collar as CSV.
    Trace {
        #[command(flatten)]
        fixture: FixtureArgs,
        /// Number of traced base points.
        #[arg(long, default_value_t = 8)]
        samples: usize,
        /// Number of height steps (the grid always contains 0 and 1).
        #[arg(long, default_value_t = 32)]
        grid: usize,
        /// Output CSV path (default: stdout).
        #[arg(long)]
        out: Option<String>,
    },
}

fn usage_error(e: &CollarError) -> bool {
    matches!(
        e,
        CollarError::InvalidParameter(_) | CollarError::Unsupported(_)
    )
}

fn write_out(path: &Option<String>, content: &str) -> collar_forge::Result<()> {
    match path {
        Some(p) => std::fs::write(p, content)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_build(args: &FixtureArgs, out: &Option<String>) -> collar_forge::Result<()> {
    let fixture = args.build()?;
    let cfg = ValidationConfig {
        seed: args.seed,
        ..ValidationConfig::default()
    };
    let gc = fixture.build_global(&cfg)?;
    let path = out
        .clone()
        .unwrap_or_else(|| format!("{}.json", fixture.name));
    let json = serde_json::to_string_pretty(&fixture.spec())?;
    std::fs::write(&path, json)?;
    eprintln!(
        "built {}: {} collars validated, delta = {:.6}, wrote {}",
        fixture.name,
        gc.collars.len(),
        fixture.delta,
        path
    );
    Ok(())
}

fn cmd_verify(
    args: &FixtureArgs,
    samples: usize,
    out: &Option<String>,
    emit_quotients: &Option<String>,
    epsilon: Option<f64>,
) -> collar_forge::Result<bool> {
    let fixture = args.build()?;
    if epsilon.is_some() && !fixture.two_sided {
        return Err(CollarError::InvalidParameter(
            "--epsilon applies only to two-sided fixtures".into(),
        ));
    }
    let vcfg = ValidationConfig {
        seed: args.seed,
        ..ValidationConfig::default()
    };
    let gc = fixture.build_global(&vcfg)?;
    let mut report = verify(
        &gc,
        &VerifyConfig {
            n_pairs: samples,
            seed: args.seed,
            keep_quotients: emit_quotients.is_some(),
            ..VerifyConfig::default()
        },
    )?;

    if let Some(eps) = epsilon {
        let (bi, interior, exterior) = fixture.build_glued_bicollar(&vcfg)?;
        let il_alpha = fixture
            .charts
            .iter()
            .filter_map(|c| c.declared().il)
            .fold(1.0f64, f64::max);
        let bl_alpha = fixture
            .charts
            .iter()
            .filter_map(|c| c.declared().bl())
            .fold(1.0f64, f64::max);
        let k = RestrictionConstants {
            l_c: report.estimates.l_hat.max(1.0),
            il_plus: report.estimates.il_hat.max(1.0),
            il_minus: report.estimates.il_hat.max(1.0),
            bl_alpha_max: bl_alpha,
            bl_alpha_recip_max: bl_alpha,
            delta: fixture.delta,
        };
        let cap = bicollar_epsilon(k.l_c, il_alpha, k.delta)?;
        let restricted = restrict_bicollar(&bi, eps, &k, il_alpha);
        let paste = pasting_check(&bi, &fixture.dom, samples, samples / 10, args.seed)?;
        let _ = (&interior, &exterior);
        match restricted {
            Ok(r) => report.verdicts.push(Verdict {
                check: "bicollar restriction".into(),
                passed: r.il_bound_verbatim.is_finite(),
                detail: format!(
                    "eps = {eps} (cap {} via {}), restricted iL bounds {:.6} / {:.6}",
                    cap.eps, cap.binding, r.il_bound_verbatim, r.il_bound_alternate
                ),
            }),
            Err(e) => report.verdicts.push(Verdict {
                check: "bicollar restriction".into(),
                passed: false,
                detail: e.to_string(),
            }),
        }
        report.verdicts.push(Verdict {
            check: "bicollar pasting".into(),
            passed: paste.l_glued <= paste.l_plus.max(paste.l_minus) + 1e-9,
            detail: format!(
                "glued {:.6} vs one-sided max {:.6} over {} cross pairs",
                paste.l_glued,
                paste.l_plus.max(paste.l_minus),
                paste.cross_pairs
            ),
        });
    }

    if let Some(path) = emit_quotients {
        let mut csv = String::from("x0,x1,s,y0,y1,t,in_dist,out_dist,quotient\n");
        for w in &report.quotients {
            csv.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                w.x[0], w.x[1], w.s, w.y[0], w.y[1], w.t, w.in_dist, w.out_dist, w.quotient
            ));
        }
        std::fs::write(path, csv)?;
    }

    for v in &report.verdicts {
        eprintln!(
            "[{}] {}: {}",
            if v.passed { "PASS" } else { "FAIL" },
            v.check,
            v.detail
        );
    }
    let passed = report.passed();
    report.quotients.clear();
    let json = serde_json::to_string_pretty(&report)?;
    write_out(out, &(json + "\n"))?;
    Ok(passed)
}

fn cmd_trace(
    args: &FixtureArgs,
    samples: usize,
    grid: usize,
    out: &Option<String>,
) -> collar_forge::Result<()> {
    let fixture = args.build()?;
    let cfg = ValidationConfig {
        seed: args.seed,
        ..ValidationConfig::default()
    };
    let gc = fixture.build_global(&cfg)?;
    let params = sampling::sample_curve_params(&fixture.dom.base, samples.max(1), args.seed);
    let grid = grid.max(1);
    let mut csv = String::from("point_id,t,y0,y1\n");
    for (id, &s) in params.iter().enumerate() {
        let x = fixture.dom.base.point_at(s);
        for k in 0..=grid {
            let t = k as f64 / grid as f64;
            let y = gc.evaluate(&x, t)?;
            csv.push_str(&format!("{id},{t},{},{}\n", y.0[0], y.0[1]));
        }
    }
    write_out(out, &csv)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Build { fixture, out } => cmd_build(fixture, out).map(|()| true),
        Command::Verify {
            fixture,
            samples,
            out,
            emit_quotients,
            epsilon,
        } => cmd_verify(fixture, *samples, out, emit_quotients, *epsilon),
        Command::Trace {
            fixture,
            samples,
            grid,
            out,
        } => cmd_trace(fixture, *samples, *grid, out).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
