//! Benchmark harness: times every algorithm over a grid of sizes and core
//! counts, reports speedups against the serial radix sort and annotates them
//! with the cost model's predictions.

use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::costmodel::{self, int, MachineParams, Rational};
use crate::instance::{Algorithm, Radix, SortInstance};
use crate::keys::{derive_seed, generate_uniform_keys, verify_sorted_permutation};

/// Columns of the CSV report, in order.
pub const CSV_HEADER: [&str; 7] = [
    "algorithm",
    "n",
    "p",
    "mean_seconds",
    "speedup",
    "predicted_speedup",
    "verified",
];

/// Largest size rendered in microseconds rather than seconds/speedups.
pub const SMALL_SIZE_LIMIT: usize = 512_000;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid benchmark configuration: {0}")]
    Config(String),

    #[error("malformed CSV report: {0}")]
    Csv(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Markdown,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "markdown" | "md" => Ok(OutputFormat::Markdown),
            other => Err(format!(
                "unknown format {other:?} (expected csv or markdown)"
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Algorithms to time. The SR4 baseline is always run.
    pub algorithms: Vec<Algorithm>,
    pub sizes: Vec<usize>,
    pub processors: Vec<usize>,
    pub seed: u64,
    pub repetitions: usize,
    /// Radix of SR4 and of the local sorts in BTN/OET. PR4/PR2 fix their own.
    pub radix: Radix,
    pub verify: bool,
    /// Machine used for predictions; `None` disables them.
    pub model: Option<MachineParams>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: Algorithm::ALL.to_vec(),
            sizes: vec![8_000_000, 32_000_000, 128_000_000],
            processors: vec![2, 4, 8, 16],
            seed: 1,
            repetitions: 4,
            radix: Radix::R256,
            verify: false,
            model: None,
        }
    }
}

impl BenchConfig {
    /// The small-size grid of the threshold study: 1K to 512K keys.
    pub fn small() -> BenchConfig {
        BenchConfig {
            algorithms: vec![
                Algorithm::Sr4,
                Algorithm::Pr4,
                Algorithm::Btn,
                Algorithm::Oet,
            ],
            sizes: vec![1_000, 2_000, 8_000, 32_000, 128_000, 512_000],
            processors: vec![2, 4, 8],
            ..BenchConfig::default()
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be at least 1".into()));
        }
        if self.sizes.is_empty() {
            return Err(BenchError::Config("no problem sizes given".into()));
        }
        if self.processors.is_empty() {
            return Err(BenchError::Config("no processor counts given".into()));
        }
        if self.processors.contains(&0) {
            return Err(BenchError::Config(
                "processor counts must be positive".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(BenchError::Config("no algorithms given".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellStatus {
    Ok,
    Skipped(String),
    Failed(String),
}

/// Cost-model annotation of one row.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelAnnotation {
    pub predicted_speedup: f64,
    /// Predicted speedup as `n` grows without bound.
    pub asymptotic_speedup: f64,
    /// Measured over predicted speedup.
    pub ratio: f64,
    /// Measured speedup is above the asymptotic prediction.
    pub exceeds_bound: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    pub mean_seconds: f64,
    pub rep_seconds: Vec<f64>,
    /// SR4 mean time at the same `n` over this row's mean time.
    pub speedup: Option<f64>,
    pub model: Option<ModelAnnotation>,
    pub verified: bool,
    pub status: CellStatus,
}

impl BenchRow {
    fn new(algorithm: Algorithm, n: usize, p: usize) -> BenchRow {
        BenchRow {
            algorithm,
            n,
            p,
            mean_seconds: 0.0,
            rep_seconds: Vec::new(),
            speedup: None,
            model: None,
            verified: false,
            status: CellStatus::Ok,
        }
    }

    pub fn executed(&self) -> bool {
        !matches!(self.status, CellStatus::Skipped(_))
    }

    pub fn predicted_speedup(&self) -> Option<f64> {
        self.model.as_ref().map(|m| m.predicted_speedup)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// True iff every executed cell ran and passed verification.
    pub fn all_verified(&self) -> bool {
        self.rows
            .iter()
            .filter(|r| r.executed())
            .all(|r| r.status == CellStatus::Ok && r.verified)
    }

    pub fn any_failed(&self) -> bool {
        self.rows
            .iter()
            .any(|r| matches!(r.status, CellStatus::Failed(_)))
    }

    pub fn find(&self, algorithm: Algorithm, n: usize, p: usize) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.algorithm == algorithm && r.n == n && r.p == p)
    }

    fn sizes(&self) -> Vec<usize> {
        let mut sizes: Vec<usize> = self.rows.iter().map(|r| r.n).collect();
        sizes.sort_unstable();
        sizes.dedup();
        sizes
    }
}

/// The (algorithm, p) cells of a config in report order: SR4 first, then each
/// requested algorithm for each core count.
fn cells(config: &BenchConfig) -> Vec<(Algorithm, usize)> {
    let mut cells = vec![(Algorithm::Sr4, 1)];
    for &alg in &config.algorithms {
        if alg == Algorithm::Sr4 {
            continue;
        }
        for &p in &config.processors {
            if !cells.contains(&(alg, p)) {
                cells.push((alg, p));
            }
        }
    }
    cells
}

/// Runs every cell of `config`.
///
/// Each repetition draws one input from `derive_seed(seed, rep)` and feeds the
/// same keys to every cell, so all algorithms sort identical data. Only the
/// sort call is timed.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let cells = cells(config);
    let mut rows = Vec::new();

    for &n in &config.sizes {
        let mut grid: Vec<BenchRow> = cells
            .iter()
            .map(|&(alg, p)| BenchRow::new(alg, n, p))
            .collect();
        for row in grid.iter_mut() {
            row.verified = config.verify;
            if let Err(e) = row.algorithm.check_processors(row.p) {
                row.status = CellStatus::Skipped(e.to_string());
            }
        }

        for rep in 0..config.repetitions {
            let input = generate_uniform_keys(n, derive_seed(config.seed, rep as u64));
            for row in grid.iter_mut().filter(|r| r.status == CellStatus::Ok) {
                let radix = row.algorithm.fixed_radix().unwrap_or(config.radix);
                let instance = match SortInstance::new(
                    input.clone(),
                    row.p,
                    row.algorithm,
                    radix,
                    config.seed,
                ) {
                    Ok(instance) => instance,
                    Err(e) => {
                        row.status = CellStatus::Failed(e.to_string());
                        continue;
                    }
                };
                let start = Instant::now();
                let result = instance.run();
                let elapsed = start.elapsed().as_secs_f64();
                match result {
                    Ok(outcome) => {
                        row.rep_seconds.push(elapsed);
                        if config.verify && !verify_sorted_permutation(&input, &outcome.keys) {
                            row.verified = false;
                        }
                    }
                    Err(e) => row.status = CellStatus::Failed(e.to_string()),
                }
            }
        }

        for row in grid.iter_mut().filter(|r| r.status == CellStatus::Ok) {
            row.mean_seconds = row.rep_seconds.iter().sum::<f64>() / row.rep_seconds.len() as f64;
        }
        let baseline = grid[0].mean_seconds;
        for row in grid.iter_mut().filter(|r| r.status == CellStatus::Ok) {
            row.speedup = Some(if row.algorithm == Algorithm::Sr4 {
                1.0
            } else {
                baseline / row.mean_seconds
            });
        }
        rows.extend(grid);
    }

    let report = BenchReport { rows };
    Ok(match &config.model {
        Some(params) => compare_with_model(report, params),
        None => report,
    })
}

/// Attaches the model's predicted speedup, its large-`n` limit and the
/// measured/predicted ratio to every executed row.
pub fn compare_with_model(mut report: BenchReport, params: &MachineParams) -> BenchReport {
    for row in report
        .rows
        .iter_mut()
        .filter(|r| r.status == CellStatus::Ok)
    {
        row.model = annotate(row, params);
    }
    report
}

fn annotate(row: &BenchRow, params: &MachineParams) -> Option<ModelAnnotation> {
    if row.algorithm == Algorithm::Sr4 {
        return Some(ModelAnnotation {
            predicted_speedup: 1.0,
            asymptotic_speedup: 1.0,
            ratio: 1.0,
            exceeds_bound: false,
        });
    }
    let machine = params.with_p(row.p as u64);
    let n: Rational = int(row.n as u64);
    let predicted =
        costmodel::to_f64(&costmodel::predicted_speedup(row.algorithm, &n, &machine).ok()?);
    let asymptotic =
        costmodel::to_f64(&costmodel::asymptotic_speedup(row.algorithm, &machine).ok()?);
    let measured = row.speedup?;
    Some(ModelAnnotation {
        predicted_speedup: predicted,
        asymptotic_speedup: asymptotic,
        ratio: if predicted > 0.0 {
            measured / predicted
        } else {
            f64::INFINITY
        },
        exceeds_bound: measured > asymptotic,
    })
}

/// Renders `report` as CSV or markdown.
pub fn emit_table(report: &BenchReport, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => emit_csv(report),
        OutputFormat::Markdown => emit_markdown(report),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

fn emit_csv(report: &BenchReport) -> String {
    let records: Vec<CsvRecord> = report
        .rows
        .iter()
        .filter(|r| r.status == CellStatus::Ok)
        .map(CsvRecord::from_row)
        .collect();
    records_to_csv(&records)
}

/// Writes CSV records under [`CSV_HEADER`]. Floats use Rust's shortest
/// round-trip formatting, so [`parse_csv`] recovers them bit for bit.
pub fn records_to_csv(records: &[CsvRecord]) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(CSV_HEADER).expect("writing to memory");
    for rec in records {
        writer
            .write_record([
                rec.algorithm.name().to_string(),
                rec.n.to_string(),
                rec.p.to_string(),
                format!("{:?}", rec.mean_seconds),
                fmt_opt(rec.speedup),
                fmt_opt(rec.predicted_speedup),
                rec.verified.to_string(),
            ])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flushing to memory")).expect("CSV is UTF-8")
}

/// One parsed line of a CSV report.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub algorithm: Algorithm,
    pub n: usize,
    pub p: usize,
    pub mean_seconds: f64,
    pub speedup: Option<f64>,
    pub predicted_speedup: Option<f64>,
    pub verified: bool,
}

impl CsvRecord {
    pub fn from_row(row: &BenchRow) -> CsvRecord {
        CsvRecord {
            algorithm: row.algorithm,
            n: row.n,
            p: row.p,
            mean_seconds: row.mean_seconds,
            speedup: row.speedup,
            predicted_speedup: row.predicted_speedup(),
            verified: row.verified,
        }
    }
}

/// Parses CSV produced by [`emit_table`]; the header must match [`CSV_HEADER`] exactly.
pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>, BenchError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| BenchError::Csv(e.to_string()))?;
    if headers.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(BenchError::Csv(format!("unexpected header {:?}", headers)));
    }
    let bad = |line: usize, what: &str| BenchError::Csv(format!("line {line}: bad {what}"));
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| BenchError::Csv(e.to_string()))?;
        let line = i + 2;
        let opt = |s: &str| -> Result<Option<f64>, BenchError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(line, "number"))
            }
        };
        out.push(CsvRecord {
            algorithm: record[0].parse().map_err(|_| bad(line, "algorithm"))?,
            n: record[1].parse().map_err(|_| bad(line, "n"))?,
            p: record[2].parse().map_err(|_| bad(line, "p"))?,
            mean_seconds: record[3].parse().map_err(|_| bad(line, "mean_seconds"))?,
            speedup: opt(&record[4])?,
            predicted_speedup: opt(&record[5])?,
            verified: record[6].parse().map_err(|_| bad(line, "verified"))?,
        });
    }
    Ok(out)
}

/// Human-readable size label: 8000000 -> "8M", 32000 -> "32K".
pub fn size_label(n: usize) -> String {
    if n >= 1_000_000 && n.is_multiple_of(1_000_000) {
        format!("{}M", n / 1_000_000)
    } else if n >= 1_000 && n.is_multiple_of(1_000) {
        format!("{}K", n / 1_000)
    } else {
        n.to_string()
    }
}

/// Parses a size with an optional decimal `K`/`M` suffix.
pub fn parse_size(s: &str) -> Result<usize, String> {
    let s = s.trim();
    let (digits, scale) = match s.chars().last() {
        Some('k' | 'K') => (&s[..s.len() - 1], 1_000),
        Some('m' | 'M') => (&s[..s.len() - 1], 1_000_000),
        _ => (s, 1),
    };
    digits
        .parse::<usize>()
        .ok()
        .and_then(|v| v.checked_mul(scale))
        .ok_or_else(|| format!("invalid size {s:?}"))
}

/// Markdown table grouped by algorithm and `p`, one column per size.
///
/// When every size is at most [`SMALL_SIZE_LIMIT`] all cells are mean times in
/// microseconds; otherwise SR4 shows seconds and the other rows show speedups.
/// Predicted speedups, when present, follow in parentheses.
fn emit_markdown(report: &BenchReport) -> String {
    let sizes = report.sizes();
    let micro = !sizes.is_empty() && sizes.iter().all(|&n| n <= SMALL_SIZE_LIMIT);
    let mut out = String::new();
    if micro {
        out.push_str("Mean running time (µs)\n\n");
    } else {
        out.push_str("Speedup over sr4; time (s) for sr4\n\n");
    }
    out.push_str("| algorithm | p |");
    for &n in &sizes {
        let _ = write!(out, " {} |", size_label(n));
    }
    out.push_str("\n|---|---:|");
    for _ in &sizes {
        out.push_str("---:|");
    }
    out.push('\n');

    let mut groups: Vec<(Algorithm, usize)> = Vec::new();
    for row in &report.rows {
        if !groups.contains(&(row.algorithm, row.p)) {
            groups.push((row.algorithm, row.p));
        }
    }
    let mut previous = None;
    for (alg, p) in groups {
        if previous.is_some_and(|prev| prev != alg) {
            // blank separator cells mark a new algorithm block
            out.push_str("| | |");
            for _ in &sizes {
                out.push_str(" |");
            }
            out.push('\n');
        }
        previous = Some(alg);
        let _ = write!(out, "| {alg} | {p} |");
        for &n in &sizes {
            let cell = match report.find(alg, n, p) {
                None => String::new(),
                Some(row) => match &row.status {
                    CellStatus::Skipped(_) => "skipped".into(),
                    CellStatus::Failed(_) => "failed".into(),
                    CellStatus::Ok => {
                        let mut cell = if micro {
                            format!("{:.0}", row.mean_seconds * 1e6)
                        } else if alg == Algorithm::Sr4 {
                            format!("{:.3}", row.mean_seconds)
                        } else {
                            format!("{:.2}", row.speedup.unwrap_or(f64::NAN))
                        };
                        if let Some(pred) = row.predicted_speedup() {
                            let _ = write!(cell, " ({pred:.2})");
                        }
                        if !row.verified {
                            cell.push_str(" *");
                        }
                        cell
                    }
                },
            };
            let _ = write!(out, " {cell} |");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> BenchConfig {
        BenchConfig {
            algorithms: Algorithm::ALL.to_vec(),
            sizes: vec![1_000, 3_001],
            processors: vec![1, 3, 4],
            seed: 5,
            repetitions: 2,
            radix: Radix::R256,
            verify: true,
            model: Some(MachineParams::new(1)),
        }
    }

    fn sr4_row(n: usize, t: f64) -> BenchRow {
        BenchRow {
            algorithm: Algorithm::Sr4,
            n,
            p: 1,
            mean_seconds: t,
            rep_seconds: vec![t],
            speedup: Some(1.0),
            model: Some(ModelAnnotation {
                predicted_speedup: 1.0,
                asymptotic_speedup: 1.0,
                ratio: 1.0,
                exceeds_bound: false,
            }),
            verified: true,
            status: CellStatus::Ok,
        }
    }

    #[test]
    fn sr4_only_reports_self_speedup() {
        let config = BenchConfig {
            algorithms: vec![Algorithm::Sr4],
            sizes: vec![1_000],
            processors: vec![1],
            repetitions: 1,
            ..tiny_config()
        };
        let report = run_benchmark(&config).unwrap();
        assert_eq!(report.rows.len(), 1);
        assert_eq!(report.rows[0].speedup, Some(1.0));
        assert!(report.all_verified());
    }

    #[test]
    fn grid_rows_speedups_and_skips() {
        let report = run_benchmark(&tiny_config()).unwrap();
        // per size: sr4 + 4 algorithms x 3 core counts
        assert_eq!(report.rows.len(), 2 * 13);
        let skipped = report.find(Algorithm::Btn, 1_000, 3).unwrap();
        assert!(matches!(skipped.status, CellStatus::Skipped(_)));
        assert!(report.all_verified());
        for row in report.rows.iter().filter(|r| r.status == CellStatus::Ok) {
            assert_eq!(row.rep_seconds.len(), 2);
            let base = report.find(Algorithm::Sr4, row.n, 1).unwrap().mean_seconds;
            let product = row.speedup.unwrap() * row.mean_seconds;
            assert!((product - base).abs() <= 1e-9 * base.max(1e-12), "{row:?}");
            assert!(row.model.is_some());
        }
    }

    #[test]
    fn invalid_configs() {
        for config in [
            BenchConfig {
                repetitions: 0,
                ..tiny_config()
            },
            BenchConfig {
                sizes: vec![],
                ..tiny_config()
            },
            BenchConfig {
                processors: vec![],
                ..tiny_config()
            },
            BenchConfig {
                processors: vec![0],
                ..tiny_config()
            },
            BenchConfig {
                algorithms: vec![],
                ..tiny_config()
            },
        ] {
            assert!(matches!(run_benchmark(&config), Err(BenchError::Config(_))));
        }
    }

    #[test]
    fn empty_report_is_header_only() {
        let csv = emit_table(&BenchReport::default(), OutputFormat::Csv);
        assert_eq!(
            csv,
            "algorithm,n,p,mean_seconds,speedup,predicted_speedup,verified\n"
        );
        assert!(parse_csv(&csv).unwrap().is_empty());
    }

    #[test]
    fn sr4_csv_line() {
        let report = BenchReport {
            rows: vec![sr4_row(8_000_000, 0.362)],
        };
        let csv = emit_table(&report, OutputFormat::Csv);
        assert_eq!(csv.lines().nth(1), Some("sr4,8000000,1,0.362,1.0,1.0,true"));
    }

    #[test]
    fn model_annotations() {
        let mut pr4 = BenchRow::new(Algorithm::Pr4, 1 << 40, 4);
        pr4.speedup = Some(3.61);
        let mut btn = BenchRow::new(Algorithm::Btn, 1 << 20, 8);
        btn.speedup = Some(2.0);
        let report = compare_with_model(
            BenchReport {
                rows: vec![sr4_row(1 << 20, 1.0), pr4, btn],
            },
            &MachineParams::new(1),
        );
        let sr4 = report.rows[0].model.clone().unwrap();
        assert_eq!((sr4.predicted_speedup, sr4.ratio), (1.0, 1.0));
        let pr4 = report.rows[1].model.clone().unwrap();
        assert!((pr4.predicted_speedup - 68.0 * 4.0 / 88.0).abs() < 1e-6);
        assert!(pr4.exceeds_bound);
        let btn = report.rows[2].model.clone().unwrap();
        assert!((btn.predicted_speedup - 544.0 / 188.0).abs() < 1e-12);
        assert!(!btn.exceeds_bound);
        assert!((btn.ratio - 2.0 / (544.0 / 188.0)).abs() < 1e-12);
    }

    #[test]
    fn markdown_layout() {
        let report = run_benchmark(&BenchConfig {
            algorithms: vec![Algorithm::Pr4, Algorithm::Btn],
            sizes: vec![1_000, 2_000],
            processors: vec![2, 3],
            repetitions: 1,
            ..tiny_config()
        })
        .unwrap();
        let md = emit_table(&report, OutputFormat::Markdown);
        assert!(md.starts_with("Mean running time (µs)"));
        assert!(md.contains("| algorithm | p | 1K | 2K |"));
        assert!(md.contains("| btn | 3 | skipped | skipped |"));
        let body: Vec<&str> = md
            .lines()
            .filter(|l| l.starts_with("| sr4") || l.starts_with("| pr4") || l.starts_with("| btn"))
            .collect();
        assert_eq!(body.len(), 5);
    }

    #[test]
    fn sizes() {
        assert_eq!(size_label(8_000_000), "8M");
        assert_eq!(size_label(512_000), "512K");
        assert_eq!(size_label(1234), "1234");
        assert_eq!(parse_size("8M"), Ok(8_000_000));
        assert_eq!(parse_size("32k"), Ok(32_000));
        assert_eq!(parse_size("17"), Ok(17));
        assert!(parse_size("x").is_err());
    }

    #[test]
    fn rejects_wrong_header() {
        assert!(parse_csv("algo,n\nsr4,1\n").is_err());
        assert!(parse_csv(
            "algorithm,n,p,mean_seconds,speedup,predicted_speedup,verified\nzz,1,1,0.1,,,true\n"
        )
        .is_err());
    }

    proptest::proptest! {
        #[test]
        fn csv_round_trip(
            rows in proptest::collection::vec(
                (0usize..5, 0usize..1 << 30, 1usize..64, 0.0f64..1e3, proptest::option::of(0.0f64..100.0),
                 proptest::option::of(0.0f64..100.0), proptest::bool::ANY),
                0..20)
        ) {
            let report = BenchReport {
                rows: rows
                    .into_iter()
                    .map(|(a, n, p, t, s, pred, v)| BenchRow {
                        algorithm: Algorithm::ALL[a],
                        n,
                        p,
                        mean_seconds: t,
                        rep_seconds: vec![t],
                        speedup: s,
                        model: pred.map(|x| ModelAnnotation {
                            predicted_speedup: x,
                            asymptotic_speedup: x,
                            ratio: 1.0,
                            exceeds_bound: false,
                        }),
                        verified: v,
                        status: CellStatus::Ok,
                    })
                    .collect(),
            };
            let parsed = parse_csv(&emit_table(&report, OutputFormat::Csv)).unwrap();
            let expected: Vec<CsvRecord> = report.rows.iter().map(CsvRecord::from_row).collect();
            proptest::prop_assert_eq!(parsed, expected);
        }
    }
}
