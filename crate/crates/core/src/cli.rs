//! Command-line front end. Each stage subcommand runs the per-scan workflow
//! up to its stage and writes that stage's JSON Lines file; `run` writes all
//! of them, so chaining subcommands and `run` produce the same files.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dicom::{parse_dicom, series_to_volume};
use crate::fsio::{meta_sidecar, write_atomic};
use crate::metrics::{pathology_csv, pathology_text, subgroup_csv, subgroup_text, subgroup_report, Axis, MetricsTable, PublishedTables, ScanRecord};
use crate::nifti::{read_nifti, write_nifti_as, NiftiDatatype};
use crate::phantom::{generate_phantom, read_truth, scan_id, suite_specs, write_phantom_case, PhantomCase};
use crate::pipeline::{
    lesion_mask_ious, process_scan, scan_record, stage_mean_ious, PipelineConfig, PipelineError, ScanReport, Stage,
    SuiteSummary,
};
use crate::segment::Mask;
use crate::volume::{Volume, VolumeMeta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_IO: i32 = 2;

pub const VERIFY_FILE: &str = "verify.jsonl";
pub const CLASSIFY_FILE: &str = "classifications.jsonl";
pub const MASKS_FILE: &str = "masks.jsonl";
pub const DETECTIONS_FILE: &str = "detections.jsonl";
pub const REPORTS_FILE: &str = "reports.jsonl";
pub const ERRORS_FILE: &str = "errors.jsonl";
pub const CONFIG_FILE: &str = "effective_config.json";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(name = "spinescan", version, about = "Spine MRI analysis pipeline")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Pipeline configuration (JSON). Defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// NIfTI file, DICOM series directory, or a directory of either.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Worker threads for batch processing (0 = all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Format of the summary printed to stdout.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// DICOM series to NIfTI plus a metadata sidecar.
    Convert(Common),
    /// Orientation and sequence check.
    Verify(Common),
    /// Normal/abnormal triage.
    Classify(Common),
    /// Refined lesion masks.
    Segment(Common),
    /// Cascade detections.
    Detect(Common),
    /// Every stage, plus one full report per scan.
    Run(Common),
    /// Scores a `run` output directory against phantom ground truth.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Directory holding `<scan>.truth.json` files.
        #[arg(long)]
        truth: PathBuf,
    },
    /// Renders published metric tables from a fixture file.
    Report {
        /// Fixture JSON; the built-in tables are used when omitted.
        #[arg(long)]
        fixture: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Writes a synthetic phantom suite.
    Phantom {
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
        /// Also write each phantom as a DICOM series.
        #[arg(long)]
        dicom: bool,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {detail}")]
    Io { path: String, detail: String },
    /// Some scans failed; details are in the errors file.
    #[error("{failed} of {total} scans failed (see {ERRORS_FILE})")]
    Partial { failed: usize, total: usize, io: bool },
}

impl CliError {
    fn io(path: &Path, e: impl std::fmt::Display) -> CliError {
        CliError::Io {
            path: path.display().to_string(),
            detail: e.to_string(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Partial { io, .. } => {
                if *io {
                    EXIT_IO
                } else {
                    EXIT_VALIDATION
                }
            }
        }
    }
}

/// Per-scan failure, written to the errors file.
#[derive(Debug, Clone, Serialize)]
pub struct ScanError {
    pub scan_id: String,
    pub stage: String,
    pub path: String,
    pub cause: String,
    pub io: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Nifti(PathBuf),
    Dicom(Vec<PathBuf>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputScan {
    pub scan_id: String,
    /// File or directory named in error records.
    pub path: PathBuf,
    pub source: Source,
}

fn has_ext(p: &Path, ext: &str) -> bool {
    p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        out.push(e.map_err(|e| CliError::io(dir, e))?.path());
    }
    out.sort();
    Ok(out)
}

fn dicom_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    Ok(sorted_entries(dir)?
        .into_iter()
        .filter(|p| p.is_file() && has_ext(p, "dcm"))
        .collect())
}

/// Scan id for a DICOM directory; a trailing `_dicom` is dropped.
fn series_id(p: &Path) -> String {
    let name = p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "scan".into());
    name.strip_suffix("_dicom").map(str::to_string).unwrap_or(name)
}

/// Finds scans under `input`: a `.nii` file, a directory of `.dcm` slices,
/// or a directory containing `.nii` files and/or DICOM series
/// subdirectories. A `<id>_dicom` series is skipped when `<id>.nii` exists.
pub fn discover_inputs(input: &Path) -> Result<Vec<InputScan>, CliError> {
    if input.is_file() {
        if !has_ext(input, "nii") {
            return Err(CliError::Validation(format!("{}: expected a .nii file or a directory", input.display())));
        }
        let id = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        return Ok(vec![InputScan {
            scan_id: id,
            path: input.to_path_buf(),
            source: Source::Nifti(input.to_path_buf()),
        }]);
    }
    if !input.is_dir() {
        return Err(CliError::io(input, "no such file or directory"));
    }
    let own = dicom_files(input)?;
    if !own.is_empty() {
        return Ok(vec![InputScan {
            scan_id: series_id(input),
            path: input.to_path_buf(),
            source: Source::Dicom(own),
        }]);
    }
    let mut scans = Vec::new();
    let entries = sorted_entries(input)?;
    for p in entries.iter().filter(|p| p.is_file() && has_ext(p, "nii")) {
        scans.push(InputScan {
            scan_id: p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            path: p.clone(),
            source: Source::Nifti(p.clone()),
        });
    }
    for p in entries.iter().filter(|p| p.is_dir()) {
        let files = dicom_files(p)?;
        if files.is_empty() {
            continue;
        }
        let id = series_id(p);
        if scans.iter().any(|s| s.scan_id == id) {
            continue;
        }
        scans.push(InputScan {
            scan_id: id,
            path: p.clone(),
            source: Source::Dicom(files),
        });
    }
    scans.sort_by(|a, b| a.scan_id.cmp(&b.scan_id));
    if scans.is_empty() {
        return Err(CliError::Validation(format!("{}: no .nii files or DICOM series found", input.display())));
    }
    Ok(scans)
}

/// Loads a scan; errors carry the offending file and whether it was I/O.
pub fn load_scan(scan: &InputScan) -> Result<Volume, ScanError> {
    let fail = |path: &Path, cause: String, io: bool| ScanError {
        scan_id: scan.scan_id.clone(),
        stage: "ingest".into(),
        path: path.display().to_string(),
        cause,
        io,
    };
    match &scan.source {
        Source::Nifti(p) => {
            let bytes = fs::read(p).map_err(|e| fail(p, e.to_string(), true))?;
            let mut v = read_nifti(&bytes).map_err(|e| fail(p, e.to_string(), false))?;
            let side = meta_sidecar(p);
            if side.is_file() {
                let text = fs::read_to_string(&side).map_err(|e| fail(&side, e.to_string(), true))?;
                v.meta = serde_json::from_str::<VolumeMeta>(&text).map_err(|e| fail(&side, e.to_string(), false))?;
            }
            Ok(v)
        }
        Source::Dicom(files) => {
            let mut slices = Vec::with_capacity(files.len());
            for f in files {
                let bytes = fs::read(f).map_err(|e| fail(f, e.to_string(), true))?;
                slices.push(parse_dicom(&bytes).map_err(|e| fail(f, e.to_string(), false))?);
            }
            series_to_volume(&slices).map_err(|e| fail(&scan.path, e.to_string(), false))
        }
    }
}

fn load_config(common: &Common) -> Result<PipelineConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            PipelineConfig::from_json(&text).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
        }
        None => PipelineConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(cfg)
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Validation(format!("--jobs {jobs}: {e}")))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    write_atomic(path, bytes).map_err(|e| CliError::io(path, e))
}

fn jsonl<T: Serialize>(items: impl IntoIterator<Item = T>) -> String {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(&it).expect("record serializes"));
        s.push('\n');
    }
    s
}

fn pretty<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}

fn finish(errors: &[ScanError], total: usize, output: &Path) -> Result<(), CliError> {
    write(&output.join(ERRORS_FILE), jsonl(errors).as_bytes())?;
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Partial {
            failed: errors.len(),
            total,
            io: errors.iter().any(|e| e.io),
        })
    }
}

fn pipeline_error(scan: &InputScan, e: PipelineError) -> ScanError {
    let (stage, cause) = match &e {
        PipelineError::Stage { stage, detail } => (stage.to_string(), detail.clone()),
        PipelineError::Config(_) => ("config".to_string(), e.to_string()),
        PipelineError::Io { .. } => ("io".to_string(), e.to_string()),
    };
    ScanError {
        scan_id: scan.scan_id.clone(),
        stage,
        path: scan.path.display().to_string(),
        cause,
        io: e.is_io(),
    }
}

fn stage_command(common: &Common, until: Stage, full: bool) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let scans = discover_inputs(&common.input)?;
    let results: Vec<Result<ScanReport, ScanError>> = pool(common.jobs)?.install(|| {
        scans
            .par_iter()
            .map(|s| {
                let v = load_scan(s)?;
                process_scan(&s.scan_id, &v, &cfg, until).map_err(|e| pipeline_error(s, e))
            })
            .collect()
    });
    let out = &common.output;
    write(&out.join(CONFIG_FILE), cfg.to_json().as_bytes())?;
    let reports: Vec<&ScanReport> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
    let errors: Vec<ScanError> = results.iter().filter_map(|r| r.as_ref().err().cloned()).collect();

    if full || until == Stage::Verify {
        write(&out.join(VERIFY_FILE), jsonl(reports.iter().map(|r| &r.verify)).as_bytes())?;
    }
    if full || until == Stage::Classify {
        let recs = reports.iter().filter_map(|r| r.classification.as_ref());
        write(&out.join(CLASSIFY_FILE), jsonl(recs).as_bytes())?;
    }
    if full || until == Stage::Segment {
        let recs = reports.iter().filter_map(|r| r.masks.as_ref());
        write(&out.join(MASKS_FILE), jsonl(recs).as_bytes())?;
    }
    if full || until == Stage::Detect {
        let recs = reports.iter().flat_map(|r| r.detections.iter());
        write(&out.join(DETECTIONS_FILE), jsonl(recs).as_bytes())?;
    }
    if full {
        write(&out.join(REPORTS_FILE), jsonl(&reports).as_bytes())?;
    }
    eprintln!("{} scans processed, {} failed", reports.len(), errors.len());
    finish(&errors, scans.len(), out)
}

fn convert(common: &Common) -> Result<(), CliError> {
    let scans = discover_inputs(&common.input)?;
    let results: Vec<Result<(), ScanError>> = pool(common.jobs)?.install(|| {
        scans
            .par_iter()
            .map(|s| {
                let v = load_scan(s)?;
                let integral = v.voxels.iter().all(|x| x.fract() == 0.0 && (i16::MIN as f32..=i16::MAX as f32).contains(x));
                let dtype = if integral { NiftiDatatype::Int16 } else { NiftiDatatype::Float32 };
                let bytes = write_nifti_as(&v, dtype).map_err(|e| ScanError {
                    scan_id: s.scan_id.clone(),
                    stage: "convert".into(),
                    path: s.path.display().to_string(),
                    cause: e.to_string(),
                    io: false,
                })?;
                let io_err = |p: &Path, e: std::io::Error| ScanError {
                    scan_id: s.scan_id.clone(),
                    stage: "convert".into(),
                    path: p.display().to_string(),
                    cause: e.to_string(),
                    io: true,
                };
                let nii = common.output.join(format!("{}.nii", s.scan_id));
                write_atomic(&nii, &bytes).map_err(|e| io_err(&nii, e))?;
                let side = meta_sidecar(&nii);
                write_atomic(&side, pretty(&v.meta).as_bytes()).map_err(|e| io_err(&side, e))
            })
            .collect()
    });
    let errors: Vec<ScanError> = results.into_iter().filter_map(Result::err).collect();
    eprintln!("{} series converted, {} failed", scans.len() - errors.len(), errors.len());
    finish(&errors, scans.len(), &common.output)
}

fn read_reports(path: &Path) -> Result<Vec<ScanReport>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Validation(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn table_text(t: &MetricsTable, format: Format) -> String {
    let pathology = t.axis == Axis::Pathology;
    match format {
        Format::Json => pretty(t),
        Format::Csv if pathology => pathology_csv(t),
        Format::Csv => subgroup_csv(t),
        Format::Text if pathology => pathology_text(t),
        Format::Text => subgroup_text(t),
    }
}

fn axis_slug(axis: Axis) -> &'static str {
    match axis {
        Axis::Age => "age",
        Axis::Gender => "gender",
        Axis::Manufacturer => "manufacturer",
        Axis::Pathology => "pathology",
    }
}

/// Writes `<prefix>_<axis>.{csv,txt,json}` and prints the chosen format.
fn emit_tables(out: &Path, prefix: &str, tables: &[MetricsTable], format: Format) -> Result<(), CliError> {
    for t in tables {
        let base = format!("{prefix}_{}", axis_slug(t.axis));
        write(&out.join(format!("{base}.csv")), table_text(t, Format::Csv).as_bytes())?;
        write(&out.join(format!("{base}.txt")), table_text(t, Format::Text).as_bytes())?;
        write(&out.join(format!("{base}.json")), table_text(t, Format::Json).as_bytes())?;
        print!("{}", table_text(t, format));
        if format == Format::Text {
            println!();
        }
    }
    Ok(())
}

fn evaluate(common: &Common, truth: &Path) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let reports_path = if common.input.is_dir() {
        common.input.join(REPORTS_FILE)
    } else {
        common.input.clone()
    };
    let reports = read_reports(&reports_path)?;
    let joined: Vec<Result<(ScanRecord, Vec<f64>, Vec<(f64, usize)>), ScanError>> = pool(common.jobs)?.install(|| {
        reports
            .par_iter()
            .map(|r| {
                let p = truth.join(format!("{}.truth.json", r.scan_id));
                let case: PhantomCase = read_truth(&p).map_err(|e| ScanError {
                    scan_id: r.scan_id.clone(),
                    stage: "evaluate".into(),
                    path: p.display().to_string(),
                    cause: e.to_string(),
                    io: !p.is_file(),
                })?;
                let [nx, ny, _] = case.spec.dims;
                let masks: Vec<Mask> = match &r.masks {
                    Some(m) => m.slices.iter().map(|s| Mask::from_binary(nx, ny, &s.decode())).collect(),
                    None => (0..case.spec.dims[2]).map(|_| Mask::empty(nx, ny)).collect(),
                };
                let ious = lesion_mask_ious(&case.truth, &masks);
                let stages = stage_mean_ious(&r.detections, &case.truth.boxes(), cfg.metrics.iou_threshold);
                Ok((scan_record(r, &case), ious, stages))
            })
            .collect()
    });
    let mut records = Vec::new();
    let mut ious = Vec::new();
    let mut stages: Vec<(f64, usize)> = Vec::new();
    let mut errors = Vec::new();
    for j in joined {
        match j {
            Ok((rec, li, st)) => {
                records.push(rec);
                ious.extend(li);
                if stages.len() < st.len() {
                    stages.resize(st.len(), (0.0, 0));
                }
                for (acc, s) in stages.iter_mut().zip(st) {
                    acc.0 += s.0;
                    acc.1 += s.1;
                }
            }
            Err(e) => errors.push(e),
        }
    }
    if records.is_empty() {
        finish(&errors, reports.len(), &common.output)?;
        return Err(CliError::Validation("no scans could be evaluated".into()));
    }
    let thr = cfg.metrics.iou_threshold;
    let tables = [Axis::Age, Axis::Gender, Axis::Manufacturer, Axis::Pathology]
        .into_iter()
        .map(|a| subgroup_report(&records, a, thr).map_err(|e| CliError::Validation(format!("{} table: {e}", axis_slug(a)))))
        .collect::<Result<Vec<_>, _>>()?;
    let out = &common.output;
    write(&out.join(CONFIG_FILE), cfg.to_json().as_bytes())?;
    emit_tables(out, "metrics", &tables, common.format)?;
    let summary = SuiteSummary::from_parts(&records, &ious, &stages, thr);
    write(&out.join(SUMMARY_FILE), pretty(&summary).as_bytes())?;
    eprintln!(
        "accuracy {:.4}, detection recall {:.4}, mean lesion mask IoU {:.4}",
        summary.classification_accuracy, summary.detection_recall, summary.mean_lesion_mask_iou
    );
    finish(&errors, reports.len(), out)
}

fn report(fixture: Option<&Path>, output: &Path, format: Format) -> Result<(), CliError> {
    let tables = match fixture {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            serde_json::from_str::<PublishedTables>(&text).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
        }
        None => PublishedTables::embedded(),
    };
    emit_tables(
        output,
        "published",
        &[tables.age_table(), tables.gender_table(), tables.pathology_table()],
        format,
    )
}

fn phantom(count: usize, seed: u64, output: &Path, dicom: bool, jobs: usize) -> Result<(), CliError> {
    if count == 0 {
        return Err(CliError::Validation("--count must be at least 1".into()));
    }
    let specs = suite_specs(seed, count);
    let results: Vec<Result<(), CliError>> = pool(jobs)?.install(|| {
        specs
            .par_iter()
            .enumerate()
            .map(|(i, spec)| {
                let (v, truth) = generate_phantom(spec).map_err(|e| CliError::Validation(format!("phantom {i}: {e}")))?;
                let case = PhantomCase {
                    scan_id: scan_id(i),
                    spec: spec.clone(),
                    truth,
                };
                write_phantom_case(output, &case, &v, dicom).map_err(|e| CliError::io(output, e))
            })
            .collect()
    });
    results.into_iter().collect::<Result<Vec<()>, _>>()?;
    eprintln!("{count} phantoms written to {}", output.display());
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Convert(c) => convert(&c),
        Command::Verify(c) => stage_command(&c, Stage::Verify, false),
        Command::Classify(c) => stage_command(&c, Stage::Classify, false),
        Command::Segment(c) => stage_command(&c, Stage::Segment, false),
        Command::Detect(c) => stage_command(&c, Stage::Detect, false),
        Command::Run(c) => stage_command(&c, Stage::Detect, true),
        Command::Evaluate { common, truth } => evaluate(&common, &truth),
        Command::Report { fixture, output, format } => report(fixture.as_deref(), &output, format),
        Command::Phantom {
            count,
            seed,
            output,
            dicom,
            jobs,
        } => phantom(count, seed, &output, dicom, jobs),
    }
}

/// Parses `args` (including the program name) and runs; returns the exit
/// code. Errors go to stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Validation("x".into()).exit_code(), 1);
        assert_eq!(CliError::io(Path::new("a"), "b").exit_code(), 2);
        let partial = |io| CliError::Partial { failed: 1, total: 2, io };
        assert_eq!(partial(false).exit_code(), 1);
        assert_eq!(partial(true).exit_code(), 2);
    }

    #[test]
    fn discovery_prefers_nifti_over_its_dicom_twin() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.nii"), b"").unwrap();
        fs::write(dir.path().join("a.nii"), b"").unwrap();
        fs::create_dir(dir.path().join("a_dicom")).unwrap();
        fs::write(dir.path().join("a_dicom/1.dcm"), b"").unwrap();
        fs::create_dir(dir.path().join("c")).unwrap();
        fs::write(dir.path().join("c/1.dcm"), b"").unwrap();
        let ids: Vec<_> = discover_inputs(dir.path()).unwrap().into_iter().map(|s| s.scan_id).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn missing_input_is_io() {
        let e = discover_inputs(Path::new("/nonexistent/spinescan")).unwrap_err();
        assert_eq!(e.exit_code(), EXIT_IO);
    }
}
