use std::path::PathBuf;

use globalspin::suite::Check;
use globalspin::synthesis::files::{parse_problem, write_continuous_result, write_result, ProblemFile};
use globalspin::synthesis::{enumerate, hadamard8_search, reverify};
use globalspin::templates::format_sequence;
use globalspin::Error;

use crate::report::RunReport;
use crate::{read_input, Context, Failure, Outcome, EXIT_BUDGET};

/// Sequences echoed in the report; the result file lists all of them.
const SHOWN: usize = 10;

#[derive(clap::Args)]
pub struct Args {
    /// Problem file.
    problem: PathBuf,
    /// Result file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cap on enumerated candidates (or structures × starts).
    #[arg(long)]
    budget: Option<u128>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// Random samples per candidate during the search.
    #[arg(long)]
    samples: Option<usize>,
    /// Acceptance distance.
    #[arg(long)]
    tol: Option<f64>,
    /// Fresh samples for re-verifying each solution.
    #[arg(long, default_value_t = 100)]
    reverify: usize,
    /// Fail unless at least one sequence is found.
    #[arg(long)]
    require_solution: bool,
}

fn write_out(path: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    if let Some(p) = path {
        std::fs::write(p, text).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

pub fn run(a: &Args, ctx: &Context, command: String) -> Result<(RunReport, Outcome), Failure> {
    let mut report = RunReport::new(command, ctx.seed);
    let src = read_input(&a.problem, &mut report)?;
    if let Some(w) = a.workers {
        if w == 0 {
            return Err(Failure::input("--workers must be at least 1"));
        }
    }
    match parse_problem(&src)? {
        ProblemFile::Enumerate(mut p) => {
            if let Some(b) = a.budget {
                p.budget = b;
            }
            if let Some(s) = a.samples {
                p.samples = s;
            }
            if let Some(t) = a.tol {
                p.tolerance = t;
            }
            p.workers = a.workers.or(p.workers);
            if ctx.seed_given {
                p.seed = ctx.seed;
            }
            p.validate()?;
            report.seed = p.seed;
            report.info("mode", "enumerate");
            report.info("target", p.target.to_string());
            report.info("slots", p.slot_count);
            report.info("exchanges", p.exchange_slots);
            report.info("alphabet", format_sequence(&p.alphabet));
            let r = match enumerate(&p) {
                Err(Error::BudgetExceeded { needed, cap }) => {
                    report.info("budget_exceeded", format!("need {needed}, cap {cap}"));
                    report.info("solutions", 0);
                    let code = a.require_solution.then_some(EXIT_BUDGET);
                    return Ok((
                        report,
                        Outcome {
                            override_code: code,
                            csv_checks: true,
                        },
                    ));
                }
                other => other?,
            };
            let st = &r.stats;
            report.info("field_sequences", st.field_sequences.to_string());
            report.info("field_survivors", st.field_survivors.to_string());
            report.info("candidates", st.candidates.to_string());
            report.info("pruned", st.pruned.to_string());
            report.info("rejected_dense", st.rejected_dense);
            let rate = if st.wall_seconds > 0.0 {
                st.candidates as f64 / st.wall_seconds
            } else {
                0.0
            };
            report.info("candidates_per_second", format!("{rate:.3e}"));
            report.info("solutions", r.sequences.len());
            for (k, seq) in r.sequences.iter().take(SHOWN).enumerate() {
                report.info(format!("sequence.{k}"), format_sequence(seq));
            }
            write_out(&a.out, &write_result(&p, &r))?;
            if !r.sequences.is_empty() {
                let rv = reverify(&r.sequences, p.target, p.tolerance, a.reverify, p.seed ^ 0x7e7e)?;
                let wd = rv.entries.iter().map(|e| e.worst_distance).fold(0.0, f64::max);
                let wb = rv.entries.iter().map(|e| e.worst_bystander).fold(0.0, f64::max);
                report.info("reverify_samples", a.reverify);
                report.check(Check::at_most("reverify.distance", wd, p.tolerance));
                report.check(Check::at_most("reverify.bystander", wb, p.tolerance));
            }
            if a.require_solution {
                report.check(Check::at_least("solutions", r.sequences.len() as f64, 1.0));
            }
        }
        ProblemFile::Continuous { target, mut config } => {
            if let Some(b) = a.budget {
                config.budget = b;
            }
            if let Some(t) = a.tol {
                config.success_tol = t;
            }
            config.workers = a.workers.or(config.workers);
            if ctx.seed_given {
                config.seed = ctx.seed;
            }
            report.seed = config.seed;
            report.info("mode", "hadamard8");
            report.info("target", target.name());
            report.info("depth", config.depth);
            let r = match hadamard8_search(&target.unitary(), &config) {
                Err(Error::BudgetExceeded { needed, cap }) => {
                    report.info("budget_exceeded", format!("need {needed}, cap {cap}"));
                    let code = a.require_solution.then_some(EXIT_BUDGET);
                    return Ok((
                        report,
                        Outcome {
                            override_code: code,
                            csv_checks: true,
                        },
                    ));
                }
                other => other?,
            };
            report.info("structures", r.fits.len());
            report.info("success", r.success);
            if let Some(b) = r.best_fit() {
                let w: Vec<&str> = b.word.iter().map(|w| w.symbol()).collect();
                report.info("best_word", w.join(" "));
                report.info("best_distance", b.distance);
            }
            write_out(&a.out, &write_continuous_result(&target, &config, &r))?;
            if a.require_solution {
                let best = r.best_fit().map_or(f64::INFINITY, |b| b.distance);
                report.check(Check::at_most("best_distance", best, config.success_tol));
            }
        }
    }
    Ok((report, Outcome::checks()))
}
