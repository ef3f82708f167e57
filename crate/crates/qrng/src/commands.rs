//! The pipeline stages behind each subcommand.
//!
//! Every stage reads its inputs from files and writes its outputs into one
//! directory, so running the stages one after another produces exactly the
//! files of [`pipeline`].

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qrng_core::correlate::{fit_antibunching, histogram_coincidences, AntibunchFit, HistogramOptions};
use qrng_core::extract::{debias_stage1, debias_von_neumann};
use qrng_core::sim::{channel_timestamps, simulate_scene, theory, PS_PER_NS};
use qrng_core::{
    encode_bits, BitStream, Detector, EncodingRule, Origin, RateReport, SceneConfig, Sequence, TestParams, TestReport,
    TimeTag, Verdict,
};
use serde::{Deserialize, Serialize};

use crate::config::{G2Settings, RunConfig};
use crate::error::{Error, Result};
use crate::formats::{self, FormatError};
use crate::fsio;

/// Raw detection rate of the reference hardware, events per second.
pub const REFERENCE_RAW_RATE_PER_S: f64 = 264_000.0;
/// Unbiased bit rate of the reference hardware, bits per second.
pub const REFERENCE_UNBIASED_RATE_PER_S: f64 = 21_000.0;
/// Retention of the cascade on fair, independent input.
pub const IDEAL_RETENTION: f64 = 1.0 / 16.0;

pub const TAGS_SIDECAR: &str = "tags.json";
pub const RATES_FILE: &str = "rates.json";
pub const BATTERY_JSON: &str = "battery.json";
pub const BATTERY_CSV: &str = "battery.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Bin,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Bin => "bin",
        }
    }
}

fn unsupported(format: Format, what: &str, allowed: &str) -> Error {
    Error::validation(format!(
        "--format {} is not available for {what}; use {allowed}",
        format.name()
    ))
}

/// File name of the tag stream for a format.
pub fn tags_file_name(format: Option<Format>) -> Result<&'static str> {
    match format.unwrap_or(Format::Bin) {
        Format::Bin => Ok("tags.ptag"),
        Format::Csv => Ok("tags.csv"),
        f => Err(unsupported(f, "time tags", "bin or csv")),
    }
}

fn bits_extension(format: Option<Format>) -> Result<&'static str> {
    match format.unwrap_or(Format::Bin) {
        Format::Bin => Ok("qbit"),
        Format::Csv => Ok("csv"),
        f => Err(unsupported(f, "bit files", "bin or csv")),
    }
}

/// Which of the JSON and CSV reports to write; both when unspecified.
fn report_formats(format: Option<Format>, what: &str) -> Result<(bool, bool)> {
    match format {
        None => Ok((true, true)),
        Some(Format::Json) => Ok((true, false)),
        Some(Format::Csv) => Ok((false, true)),
        Some(f) => Err(unsupported(f, what, "json or csv")),
    }
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn format_error(path: &Path, source: FormatError) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        source,
    }
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv") || e.eq_ignore_ascii_case("txt"))
}

// ---------------------------------------------------------------------------
// simulate

/// JSON sidecar written next to a tag file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagSidecar {
    pub file: String,
    pub seed: u64,
    pub preset: String,
    pub duration_ns: f64,
    pub events: u64,
    pub counts: BTreeMap<Detector, u64>,
    pub rates_per_s: BTreeMap<Detector, f64>,
    pub total_rate_per_s: f64,
    /// Share of all events registered by T1.
    pub transmission_share: f64,
    /// Model prediction of the registered rates.
    pub expected_rates_per_s: BTreeMap<Detector, f64>,
    pub expected_total_rate_per_s: f64,
    pub scene: SceneConfig,
}

impl TagSidecar {
    pub fn new(file: String, preset: &str, scene: &SceneConfig, tags: &[TimeTag]) -> Self {
        let seconds = scene.duration_ns * 1e-9;
        let mut counts: BTreeMap<Detector, u64> = Detector::ALL.iter().map(|&d| (d, 0)).collect();
        for t in tags {
            *counts.get_mut(&t.detector).unwrap() += 1;
        }
        let rates_per_s = counts.iter().map(|(&d, &n)| (d, n as f64 / seconds)).collect();
        let expected = theory::expected_rates(scene).expect("scene was validated");
        let expected_rates_per_s: BTreeMap<Detector, f64> = Detector::ALL
            .iter()
            .map(|&d| (d, expected[d.index()].registered * 1e9))
            .collect();
        let events = tags.len() as u64;
        TagSidecar {
            file,
            seed: scene.seed,
            preset: preset.to_string(),
            duration_ns: scene.duration_ns,
            events,
            transmission_share: if events > 0 {
                counts[&Detector::T1] as f64 / events as f64
            } else {
                0.0
            },
            counts,
            rates_per_s,
            total_rate_per_s: events as f64 / seconds,
            expected_total_rate_per_s: expected_rates_per_s.values().sum(),
            expected_rates_per_s,
            scene: scene.clone(),
        }
    }
}

/// Sidecar path for a tag file: same directory, `tags.json`.
pub fn sidecar_path(tags: &Path) -> PathBuf {
    tags.with_file_name(TAGS_SIDECAR)
}

/// Simulates the configured scene into `out`. Everything is validated before
/// the output directory is touched.
pub fn simulate(cfg: &RunConfig, out: &Path, format: Option<Format>) -> Result<TagSidecar> {
    cfg.require_seed()?;
    cfg.scene
        .validate()
        .map_err(|e| Error::validation(format!("scene: {e}")))?;
    let name = tags_file_name(format)?;
    let tags = simulate_scene(&cfg.scene).map_err(|e| Error::validation(format!("scene: {e}")))?;
    fsio::create_dir(out)?;
    let path = out.join(name);
    match format.unwrap_or(Format::Bin) {
        Format::Csv => fsio::write_atomic(&path, |w| formats::csv::write_tags(w, &tags))?,
        _ => fsio::write_atomic(&path, |w| formats::ptag::write(w, &tags))?,
    }
    let sidecar = TagSidecar::new(name.to_string(), cfg.preset.name(), &cfg.scene, &tags);
    fsio::write_json(&sidecar_path(&path), &sidecar)?;
    Ok(sidecar)
}

/// Reads a PTAG file, or tag CSV when the extension is `.csv`.
pub fn load_tags(path: &Path) -> Result<Vec<TimeTag>> {
    let data = fsio::read(path)?;
    let parsed = if is_csv(path) {
        formats::csv::parse_tags(&data)
    } else {
        formats::ptag::parse(&data)
    };
    parsed.map_err(|e| format_error(path, e))
}

/// Observation time of a tag file: the sidecar duration when present, else
/// the time of the last tag.
fn observation_ns(tags_path: &Path, tags: &[TimeTag]) -> Result<(f64, &'static str)> {
    let sidecar = sidecar_path(tags_path);
    if sidecar.exists() {
        let s: TagSidecar = fsio::read_json(&sidecar)?;
        if s.file == file_name(tags_path) {
            return Ok((s.duration_ns, "sidecar"));
        }
    }
    let last = tags.last().map_or(0, |t| t.timestamp_ps);
    Ok(((last + 1) as f64 / PS_PER_NS, "last_tag"))
}

// ---------------------------------------------------------------------------
// g2

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub pair: String,
    pub tags: String,
    pub bin_width_ns: f64,
    pub max_lag_ns: f64,
    pub observation_ns: f64,
    pub events_a: u64,
    pub events_b: u64,
    pub coincidences: u64,
    pub fit: Option<AntibunchFit>,
    pub identified: bool,
    pub error: Option<String>,
}

pub fn pair_label(pair: (Detector, Detector)) -> String {
    format!("{}_{}", pair.0, pair.1)
}

/// Correlates each configured pair of `tags_path`, writing `g2_A_B.csv` (or
/// `.json`) and `fit_A_B.json` for each.
pub fn g2(tags_path: &Path, settings: &G2Settings, out: &Path, format: Option<Format>) -> Result<Vec<FitRecord>> {
    let curve_ext = match format.unwrap_or(Format::Csv) {
        Format::Csv => "csv",
        Format::Json => "json",
        f => return Err(unsupported(f, "correlation curves", "csv or json")),
    };
    if settings.pairs.is_empty() {
        return Err(Error::validation("no detector pairs to correlate"));
    }
    let tags = load_tags(tags_path)?;
    let (observation, _) = observation_ns(tags_path, &tags)?;
    let opts = HistogramOptions::new(settings.bin_width_ns, settings.max_lag_ns).with_observation(observation);
    let mut jobs = Vec::new();
    for &(a, b) in &settings.pairs {
        let ta = channel_timestamps(&tags, a);
        let tb = channel_timestamps(&tags, b);
        for (d, t) in [(a, &ta), (b, &tb)] {
            if t.is_empty() {
                return Err(Error::validation(format!(
                    "{}: channel {d} has no events",
                    tags_path.display()
                )));
            }
        }
        let curve =
            histogram_coincidences(&ta, &tb, &opts).map_err(|e| Error::validation(format!("pair {a}:{b}: {e}")))?;
        jobs.push(((a, b), ta.len(), tb.len(), curve));
    }
    fsio::create_dir(out)?;
    let mut records = Vec::new();
    for (pair, na, nb, curve) in jobs {
        let label = pair_label(pair);
        let curve_path = out.join(format!("g2_{label}.{curve_ext}"));
        if curve_ext == "csv" {
            fsio::write_atomic(&curve_path, |w| {
                writeln!(w, "lag_ns,counts,normalized")?;
                for i in 0..curve.len() {
                    writeln!(w, "{},{},{}", curve.lags_ns[i], curve.counts[i], curve.normalized[i])?;
                }
                Ok(())
            })?;
        } else {
            fsio::write_json(&curve_path, &curve)?;
        }
        let (fit, error) = match fit_antibunching(&curve) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let record = FitRecord {
            pair: format!("{}:{}", pair.0, pair.1),
            tags: file_name(tags_path),
            bin_width_ns: settings.bin_width_ns,
            max_lag_ns: settings.max_lag_ns,
            observation_ns: observation,
            events_a: na as u64,
            events_b: nb as u64,
            coincidences: curve.counts.iter().sum(),
            identified: fit.as_ref().is_some_and(AntibunchFit::is_identified),
            fit,
            error,
        };
        fsio::write_json(&out.join(format!("fit_{label}.json")), &record)?;
        records.push(record);
    }
    Ok(records)
}

// ---------------------------------------------------------------------------
// extract

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub file: String,
    pub bits: u64,
    pub ones_fraction: Option<f64>,
    pub rate_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatesRecord {
    pub tags: String,
    pub observation_ns: f64,
    pub observation_source: String,
    pub zero_detectors: Vec<Detector>,
    pub one_detectors: Vec<Detector>,
    pub discarded_detectors: Vec<Detector>,
    pub raw: StageRecord,
    pub stage1: StageRecord,
    pub unbiased: StageRecord,
    pub report: RateReport,
    pub ideal_retention: f64,
}

fn stage_record(bits: &BitStream, file: String, seconds: f64) -> StageRecord {
    StageRecord {
        file,
        bits: bits.len() as u64,
        ones_fraction: (!bits.is_empty()).then(|| bits.count_ones() as f64 / bits.len() as f64),
        rate_per_s: bits.len() as f64 / seconds,
    }
}

/// Encodes tags into raw bits and runs the cascade, writing `raw`, `stage1`
/// and `unbiased` bit files plus `rates.json`.
pub fn extract(tags_path: &Path, encoding: &EncodingRule, out: &Path, format: Option<Format>) -> Result<RatesRecord> {
    let ext = bits_extension(format)?;
    let tags = load_tags(tags_path)?;
    let (observation, source) = observation_ns(tags_path, &tags)?;
    let raw = encode_bits(&tags, encoding).map_err(|e| Error::validation(format!("{}: {e}", tags_path.display())))?;
    drop(tags);
    let stage1 = debias_stage1(&raw);
    let unbiased = debias_von_neumann(&stage1);
    fsio::create_dir(out)?;
    let seconds = observation * 1e-9;
    let mut stages = Vec::new();
    for bits in [&raw, &stage1, &unbiased] {
        let name = format!("{}.{ext}", bits.origin());
        let path = out.join(&name);
        if ext == "qbit" {
            fsio::write_atomic(&path, |w| formats::qbit::write(w, bits))?;
        } else {
            fsio::write_atomic(&path, |w| formats::csv::write_bits(w, bits))?;
        }
        stages.push(stage_record(bits, name, seconds));
    }
    let [raw_rec, stage1_rec, unbiased_rec]: [StageRecord; 3] = stages.try_into().expect("three stages");
    let record = RatesRecord {
        tags: file_name(tags_path),
        observation_ns: observation,
        observation_source: source.to_string(),
        zero_detectors: encoding.members(Some(false)).collect(),
        one_detectors: encoding.members(Some(true)).collect(),
        discarded_detectors: encoding.members(None).collect(),
        raw: raw_rec,
        stage1: stage1_rec,
        unbiased: unbiased_rec,
        report: RateReport::new(raw.len() as u64, stage1.len() as u64, unbiased.len() as u64),
        ideal_retention: IDEAL_RETENTION,
    };
    fsio::write_json(&out.join(RATES_FILE), &record)?;
    Ok(record)
}

/// Reads a QBIT file, or `0`/`1` text when the extension is `.csv` or `.txt`.
pub fn load_bits(path: &Path) -> Result<BitStream> {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().to_lowercase())
        .unwrap_or_default();
    let origin = match stem.as_str() {
        "raw" => Origin::Raw,
        "stage1" => Origin::Stage1,
        _ => Origin::Unbiased,
    };
    let data = fsio::read(path)?;
    let parsed = if is_csv(path) {
        formats::csv::parse_bits(&data, origin)
    } else {
        formats::qbit::parse(&data, origin)
    };
    parsed.map_err(|e| format_error(path, e))
}

// ---------------------------------------------------------------------------
// test

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryRecord {
    pub input: String,
    pub report: TestReport,
}

fn opt_num(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn battery_csv(report: &TestReport) -> String {
    let mut s = String::from("test,min_p_value,combined_p_value,critical_value,pass\n");
    for r in &report.records {
        let pass = match r.pass {
            Some(true) => "true",
            Some(false) => "false",
            None => "skipped",
        };
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            r.test.name(),
            opt_num(r.min_p_value),
            opt_num(r.combined_p_value),
            report.params.alpha,
            pass
        );
    }
    s
}

/// Runs the battery on a bit file and writes `battery.json` and/or
/// `battery.csv`. The caller decides what a failing verdict means.
pub fn test(bits_path: &Path, params: &TestParams, out: &Path, format: Option<Format>) -> Result<TestReport> {
    let (json, csv) = report_formats(format, "battery reports")?;
    params
        .validate()
        .map_err(|e| Error::validation(format!("tests: {e}")))?;
    let bits = load_bits(bits_path)?;
    let report = qrng_core::run_battery(&Sequence::from_stream(&bits), params);
    fsio::create_dir(out)?;
    if json {
        let record = BatteryRecord {
            input: file_name(bits_path),
            report: report.clone(),
        };
        fsio::write_json(&out.join(BATTERY_JSON), &record)?;
    }
    if csv {
        let text = battery_csv(&report);
        fsio::write_atomic(&out.join(BATTERY_CSV), |w| w.write_all(text.as_bytes()))?;
    }
    Ok(report)
}

/// Maps a battery verdict to the statistical-failure exit path.
pub fn require_pass(report: &TestReport) -> Result<()> {
    match report.verdict {
        Verdict::Pass => Ok(()),
        Verdict::Fail => {
            let failed: Vec<&str> = report.failures().map(|r| r.test.name()).collect();
            Err(Error::Statistical(format!("battery failed: {}", failed.join(", "))))
        }
        Verdict::Inconclusive => Err(Error::Statistical(format!(
            "battery inconclusive: {} bits are too few for every test",
            report.bits
        ))),
    }
}

// ---------------------------------------------------------------------------
// report

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub detections: Option<DetectionSummary>,
    pub bits: Option<BitSummary>,
    pub correlations: Vec<CorrelationSummary>,
    pub battery: Option<BatterySummary>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectionSummary {
    pub seed: u64,
    pub preset: String,
    pub duration_ns: f64,
    pub counts: BTreeMap<Detector, u64>,
    pub total_rate_per_s: f64,
    pub expected_total_rate_per_s: f64,
    pub reference_total_rate_per_s: f64,
    pub transmission_share: f64,
    pub expected_transmission_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BitSummary {
    pub raw_bits: u64,
    pub stage1_bits: u64,
    pub unbiased_bits: u64,
    pub raw_rate_per_s: f64,
    pub unbiased_rate_per_s: f64,
    pub raw_ones_fraction: Option<f64>,
    pub unbiased_ones_fraction: Option<f64>,
    pub retention: Option<f64>,
    pub ideal_retention: f64,
    pub reference_raw_rate_per_s: f64,
    pub reference_unbiased_rate_per_s: f64,
    pub reference_retention: f64,
    pub reference_retention_reproduced: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub pair: String,
    pub coincidences: u64,
    pub g2_at_zero: Option<f64>,
    pub std_error_g2_at_zero: Option<f64>,
    pub tau0_ns: Option<f64>,
    pub std_error_tau0_ns: Option<f64>,
    pub identified: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestSummary {
    pub test: String,
    pub min_p_value: Option<f64>,
    pub combined_p_value: Option<f64>,
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BatterySummary {
    pub input: String,
    pub bits: u64,
    pub alpha: f64,
    pub verdict: Verdict,
    pub executed: usize,
    pub passed: usize,
    pub failed: Vec<String>,
    pub skipped: Vec<String>,
    pub tests: Vec<TestSummary>,
}

fn fit_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = file_name(&path);
        if name.starts_with("fit_") && name.ends_with(".json") {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn retention_note(bits: &BitSummary) -> String {
    let measured = bits
        .retention
        .map_or_else(|| "undefined".to_string(), |r| format!("{r:.4}"));
    format!(
        "Retention: the reference hardware reports {:.0} bit/s raw and {:.0} bit/s unbiased, a retention of {:.4}. \
         Stage 1 reads two-bit blocks and keeps the second bit when the first is 1; von Neumann keeps one bit \
         per unequal pair. For independent raw bits with P(1) = p the cascade keeps p^2 (1 - p) / 2 of them: \
         1/16 = 0.0625 for fair bits and at most 2/27 = 0.0741 at p = 2/3. A retention of {:.4} is above that \
         maximum and is not reproduced here. This run retained {measured}.",
        bits.reference_raw_rate_per_s,
        bits.reference_unbiased_rate_per_s,
        bits.reference_retention,
        bits.reference_retention
    )
}

/// Builds the consolidated summary from whatever stage outputs exist in
/// `run_dir`.
pub fn summarize(run_dir: &Path) -> Result<Summary> {
    if !run_dir.is_dir() {
        return Err(Error::validation(format!("{} is not a directory", run_dir.display())));
    }
    let mut notes = Vec::new();

    let sidecar = run_dir.join(TAGS_SIDECAR);
    let detections = if sidecar.exists() {
        let s: TagSidecar = fsio::read_json(&sidecar)?;
        let scene = &s.scene;
        let expected =
            theory::expected_rates(scene).map_err(|e| Error::validation(format!("{}: {e}", sidecar.display())))?;
        let total: f64 = expected.iter().map(|r| r.registered).sum();
        notes.push(format!(
            "Raw rate: the {} preset sets the pump rate so that the model predicts {:.0} registered events/s over all \
             detectors; {:.0} events/s were realized. The match to the reference rate holds by construction.",
            s.preset,
            total * 1e9,
            s.total_rate_per_s
        ));
        Some(DetectionSummary {
            seed: s.seed,
            preset: s.preset.clone(),
            duration_ns: s.duration_ns,
            counts: s.counts.clone(),
            total_rate_per_s: s.total_rate_per_s,
            expected_total_rate_per_s: s.expected_total_rate_per_s,
            reference_total_rate_per_s: REFERENCE_RAW_RATE_PER_S,
            transmission_share: s.transmission_share,
            expected_transmission_share: expected[Detector::T1.index()].registered / total,
        })
    } else {
        None
    };

    let rates_path = run_dir.join(RATES_FILE);
    let bits = if rates_path.exists() {
        let r: RatesRecord = fsio::read_json(&rates_path)?;
        let reference_retention = REFERENCE_UNBIASED_RATE_PER_S / REFERENCE_RAW_RATE_PER_S;
        let summary = BitSummary {
            raw_bits: r.raw.bits,
            stage1_bits: r.stage1.bits,
            unbiased_bits: r.unbiased.bits,
            raw_rate_per_s: r.raw.rate_per_s,
            unbiased_rate_per_s: r.unbiased.rate_per_s,
            raw_ones_fraction: r.raw.ones_fraction,
            unbiased_ones_fraction: r.unbiased.ones_fraction,
            retention: r.report.retention,
            ideal_retention: IDEAL_RETENTION,
            reference_raw_rate_per_s: REFERENCE_RAW_RATE_PER_S,
            reference_unbiased_rate_per_s: REFERENCE_UNBIASED_RATE_PER_S,
            reference_retention,
            reference_retention_reproduced: false,
        };
        let names = |v: &[Detector]| v.iter().map(|d| d.name()).collect::<Vec<_>>().join("+");
        notes.push(format!(
            "Encoding: {} -> 0, {} -> 1, {} discarded; the raw bit rate counts only encoded events.",
            names(&r.zero_detectors),
            names(&r.one_detectors),
            if r.discarded_detectors.is_empty() {
                "nothing".to_string()
            } else {
                names(&r.discarded_detectors)
            }
        ));
        notes.push(retention_note(&summary));
        Some(summary)
    } else {
        None
    };

    let mut correlations = Vec::new();
    for path in fit_files(run_dir)? {
        let f: FitRecord = fsio::read_json(&path)?;
        correlations.push(CorrelationSummary {
            pair: f.pair,
            coincidences: f.coincidences,
            g2_at_zero: f.fit.as_ref().map(|x| x.g2_at_zero),
            std_error_g2_at_zero: f.fit.as_ref().and_then(|x| x.std_error_a),
            tau0_ns: f.fit.as_ref().map(|x| x.tau0_ns),
            std_error_tau0_ns: f.fit.as_ref().and_then(|x| x.std_error_tau0_ns),
            identified: f.identified,
            error: f.error,
        });
    }
    if !correlations.is_empty() {
        notes.push(
            "Correlations are not background corrected; uncorrelated light and dark counts raise g2(0).".to_string(),
        );
    }

    let battery_path = run_dir.join(BATTERY_JSON);
    let battery = if battery_path.exists() {
        let b: BatteryRecord = fsio::read_json(&battery_path)?;
        let rep = &b.report;
        Some(BatterySummary {
            input: b.input.clone(),
            bits: rep.bits as u64,
            alpha: rep.params.alpha,
            verdict: rep.verdict,
            executed: rep.executed().count(),
            passed: rep.records.iter().filter(|r| r.pass == Some(true)).count(),
            failed: rep.failures().map(|r| r.test.name().to_string()).collect(),
            skipped: rep
                .records
                .iter()
                .filter(|r| r.is_skipped())
                .map(|r| r.test.name().to_string())
                .collect(),
            tests: rep
                .records
                .iter()
                .map(|r| TestSummary {
                    test: r.test.name().to_string(),
                    min_p_value: r.min_p_value,
                    combined_p_value: r.combined_p_value,
                    pass: r.pass,
                })
                .collect(),
        })
    } else {
        None
    };

    if detections.is_none() && bits.is_none() && correlations.is_empty() && battery.is_none() {
        return Err(Error::validation(format!(
            "{} holds no stage outputs ({TAGS_SIDECAR}, {RATES_FILE}, fit_*.json, {BATTERY_JSON})",
            run_dir.display()
        )));
    }
    Ok(Summary {
        detections,
        bits,
        correlations,
        battery,
        notes,
    })
}

/// Flattens JSON into `key,value` rows with dotted keys.
fn flatten(prefix: &str, value: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    use serde_json::Value;
    let join = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten(&join(k), v, rows);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), v, rows);
            }
        }
        Value::Null => rows.push((prefix.to_string(), String::new())),
        Value::String(s) => rows.push((prefix.to_string(), s.clone())),
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

pub fn summary_csv(summary: &Summary) -> Result<String> {
    let value = serde_json::to_value(summary).map_err(|e| Error::validation(e.to_string()))?;
    let mut rows = Vec::new();
    flatten("", &value, &mut rows);
    let mut w = ::csv::Writer::from_writer(Vec::new());
    let io = |e: ::csv::Error| Error::validation(e.to_string());
    w.write_record(["key", "value"]).map_err(io)?;
    for (k, v) in rows {
        w.write_record([k, v]).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::validation(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
}

/// Writes `summary.json` and/or `summary.csv` for a run directory.
pub fn report(run_dir: &Path, out: &Path, format: Option<Format>) -> Result<Summary> {
    let (json, csv) = report_formats(format, "run summaries")?;
    let summary = summarize(run_dir)?;
    fsio::create_dir(out)?;
    if json {
        fsio::write_json(&out.join(SUMMARY_JSON), &summary)?;
    }
    if csv {
        let text = summary_csv(&summary)?;
        fsio::write_atomic(&out.join(SUMMARY_CSV), |w| w.write_all(text.as_bytes()))?;
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// pipeline

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineResult {
    pub sidecar: TagSidecar,
    pub fits: Vec<FitRecord>,
    pub rates: RatesRecord,
    pub battery: TestReport,
    pub summary: Summary,
}

/// simulate, g2, extract, test and report into one directory. `format`
/// selects the tag and bit file encoding.
pub fn pipeline(cfg: &RunConfig, out: &Path, format: Option<Format>) -> Result<PipelineResult> {
    cfg.validate()?;
    let tags_name = tags_file_name(format)?;
    bits_extension(format)?;
    let sidecar = simulate(cfg, out, format)?;
    let tags = out.join(tags_name);
    let fits = g2(&tags, &cfg.g2, out, None)?;
    let rates = extract(&tags, &cfg.encoding, out, format)?;
    let battery = test(&out.join(&rates.unbiased.file), &cfg.tests, out, None)?;
    let summary = report(out, out, None)?;
    Ok(PipelineResult {
        sidecar,
        fits,
        rates,
        battery,
        summary,
    })
}
