use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use num_rational::BigRational;

use mbsp_sort::bench::{self, BenchConfig, CellStatus, OutputFormat};
use mbsp_sort::costmodel::MachineParams;
use mbsp_sort::{Algorithm, Radix};

/// Time the sorting algorithms over a grid of sizes and core counts.
///
/// SR4 rows report mean seconds; every other row reports its speedup over SR4
/// at the same size. Exits with status 0 iff every executed cell verified (or
/// verification is off).
#[derive(Debug, Parser)]
#[command(name = "mbsp-bench", version)]
struct Args {
    /// Algorithms to run (sr4, pr4, pr2, btn, oet). The sr4 baseline always runs.
    #[arg(long, value_delimiter = ',', default_value = "sr4,pr4,pr2,btn,oet")]
    algo: Vec<Algorithm>,

    /// Problem sizes; accepts K (10^3) and M (10^6) suffixes.
    #[arg(long, value_delimiter = ',', value_parser = bench::parse_size)]
    n: Vec<usize>,

    /// Processor counts.
    #[arg(long, value_delimiter = ',')]
    p: Vec<usize>,

    /// Use the small-size grid (1K to 512K keys, p = 2,4,8) as defaults.
    #[arg(long)]
    small: bool,

    /// Radix of sr4 and of the local sorts in btn/oet.
    #[arg(long, default_value_t = 256, value_parser = parse_radix)]
    radix: u64,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Repetitions per cell; the report shows their mean.
    #[arg(long, default_value_t = 4)]
    reps: usize,

    #[arg(long, default_value = "csv")]
    format: OutputFormat,

    /// Check every output against an independent comparison sort.
    #[arg(long)]
    verify: bool,

    /// Annotate rows with the cost model's predicted speedup.
    #[arg(long)]
    predict: bool,

    /// Ratio g/G of slow- to fast-memory gap used for predictions, e.g. 5 or 9/2.
    #[arg(long = "g-over-G", default_value = "5")]
    g_over_big_g: BigRational,

    /// Output path, or "stdout".
    #[arg(long, default_value = "stdout")]
    out: String,
}

fn parse_radix(s: &str) -> Result<u64, String> {
    let r: u64 = s.parse().map_err(|_| format!("invalid radix {s:?}"))?;
    match r {
        256 | 65536 => Ok(r),
        _ => Err("radix must be 256 or 65536".into()),
    }
}

fn main() -> ExitCode {
    let args = Args::parse();
    let base = if args.small {
        BenchConfig::small()
    } else {
        BenchConfig::default()
    };
    let config = BenchConfig {
        algorithms: args.algo,
        sizes: if args.n.is_empty() {
            base.sizes
        } else {
            args.n
        },
        processors: if args.p.is_empty() {
            base.processors
        } else {
            args.p
        },
        seed: args.seed,
        repetitions: args.reps,
        radix: Radix::new(args.radix).expect("validated by the argument parser"),
        verify: args.verify,
        model: args
            .predict
            .then(|| MachineParams::with_gap_ratio(1, args.g_over_big_g.clone())),
    };

    let report = match bench::run_benchmark(&config) {
        Ok(report) => report,
        Err(e) => {
            eprintln!("mbsp-bench: {e}");
            return ExitCode::from(2);
        }
    };

    for row in &report.rows {
        match &row.status {
            CellStatus::Skipped(why) => {
                eprintln!("skipped {} n={} p={}: {why}", row.algorithm, row.n, row.p)
            }
            CellStatus::Failed(why) => {
                eprintln!("FAILED {} n={} p={}: {why}", row.algorithm, row.n, row.p)
            }
            CellStatus::Ok if config.verify && !row.verified => {
                eprintln!(
                    "FAILED {} n={} p={}: output is not a sorted permutation",
                    row.algorithm, row.n, row.p
                )
            }
            CellStatus::Ok => {}
        }
        if let Some(model) = &row.model {
            if model.exceeds_bound {
                eprintln!(
                    "note: {} n={} p={} measured speedup {:.2} exceeds the model's asymptotic {:.2}",
                    row.algorithm,
                    row.n,
                    row.p,
                    row.speedup.unwrap_or(f64::NAN),
                    model.asymptotic_speedup
                );
            }
        }
    }

    let text = bench::emit_table(&report, args.format);
    let written = if args.out == "stdout" {
        io::stdout().write_all(text.as_bytes())
    } else {
        fs::write(&args.out, text)
    };
    if let Err(e) = written {
        eprintln!("mbsp-bench: cannot write {}: {e}", args.out);
        return ExitCode::from(2);
    }

    let ok = if config.verify {
        report.all_verified()
    } else {
        !report.any_failed()
    };
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
