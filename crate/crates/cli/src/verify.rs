use globalspin::suite::{run_suite, Suite, SuiteConfig};

use crate::report::RunReport;
use crate::{Context, Failure, Outcome};

#[derive(clap::Args)]
pub struct Args {
    /// all | swap | tilde | cp | xy | xycp | parallel
    #[arg(long, default_value = "all")]
    suite: String,
    /// Replace every threshold.
    #[arg(long)]
    tol: Option<f64>,
    /// Random draws per identity.
    #[arg(long, default_value_t = 100)]
    samples: usize,
}

pub fn run(a: &Args, ctx: &Context, command: String) -> Result<(RunReport, Outcome), Failure> {
    let suite: Suite = a.suite.parse().map_err(Failure::input)?;
    if let Some(t) = a.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Failure::input(format!("--tol must be positive, got {t}")));
        }
    }
    let mut report = RunReport::new(command, ctx.seed);
    report.info("suite", suite.to_string());
    report.info("samples", a.samples);
    let cfg = SuiteConfig {
        samples: a.samples,
        seed: ctx.seed,
        tol: a.tol,
        ..Default::default()
    };
    for c in run_suite(suite, &cfg)? {
        report.check(c);
    }
    Ok((report, Outcome::checks()))
}
