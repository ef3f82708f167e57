//! Plain-text run configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Keys:
//!
//! ```text
//! seed = 42                         # decimal or 0x-prefixed hex
//! preset = reference                # reference | bright, applied before all other keys
//! duration_ns = 1e9
//! emitters.count = 2                # truncate or extend the emitter list
//! emitters.0.lifetime_ns = 0.77
//! emitters.0.pump_rate_per_ns = 0.1
//! emitters.0.weight = 1
//! split.prob_reflection = 0.91
//! split.prob_transmission = 0.09    # optional, must sum to 1 with the above
//! reflection_hbt_split = 0.5
//! detectors.R1.efficiency = 0.6     # R1, R2, T1, or `all`
//! detectors.all.dead_time_ns = 22
//! detectors.T1.dark_rate_per_ns = 1e-6
//! detectors.R2.jitter_sigma_ns = 0.02
//! encoding = reflection_pair        # or reflection_transmission
//! encoding.zero = R1                # detector lists; `none` for empty
//! encoding.one = R2
//! encoding.discard = T1
//! g2.pairs = R1:T1, R1:R2
//! g2.bin_width_ns = 0.1
//! g2.max_lag_ns = 10
//! tests.alpha = 0.01                # also block_frequency_m, non_overlapping_m,
//!                                   # overlapping_m, linear_complexity_m,
//!                                   # serial_m, apen_m
//! ```
//!
//! Later entries override earlier ones; command-line flags come after the
//! file. Extending `emitters.count` copies the last emitter.

use std::fmt;
use std::str::FromStr;

use qrng_core::sim::presets::Preset;
use qrng_core::{Detector, DetectorParams, EncodingRule, SceneConfig, SplitParams, TestParams};
use serde::Serialize;

use crate::error::{Error, Result};

pub const DEFAULT_DURATION_NS: f64 = 1e9;
pub const DEFAULT_BIN_WIDTH_NS: f64 = 0.1;
pub const DEFAULT_MAX_LAG_NS: f64 = 10.0;

/// Where a setting came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    File { name: String, line: usize },
    Flag(String),
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::File { name, line } => write!(f, "{name}:{line}"),
            Source::Flag(flag) => write!(f, "{flag}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub key: String,
    pub value: String,
    pub source: Source,
}

impl Entry {
    pub fn flag(key: &str, value: impl Into<String>, flag: &str) -> Self {
        Entry {
            key: key.to_string(),
            value: value.into(),
            source: Source::Flag(flag.to_string()),
        }
    }

    /// Parses a `--set KEY=VALUE` argument.
    pub fn from_assignment(text: &str) -> Result<Self> {
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| Error::validation(format!("--set {text:?}: expected KEY=VALUE")))?;
        Ok(Entry::flag(key.trim(), unquote(value.trim()), "--set"))
    }

    fn error(&self, msg: impl fmt::Display) -> Error {
        Error::validation(format!("{}: {} = {:?}: {msg}", self.source, self.key, self.value))
    }

    fn parse<T: FromStr>(&self) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.value.parse::<T>().map_err(|e| self.error(e))
    }
}

fn unquote(s: &str) -> &str {
    s.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(s)
}

pub fn parse_entries(text: &str, name: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let source = Source::File {
            name: name.to_string(),
            line: i + 1,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::validation(format!("{source}: expected `key = value`, found {line:?}")))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::validation(format!("{source}: missing key")));
        }
        out.push(Entry {
            key: key.to_string(),
            value: unquote(value.trim()).to_string(),
            source,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G2Settings {
    pub pairs: Vec<(Detector, Detector)>,
    pub bin_width_ns: f64,
    pub max_lag_ns: f64,
}

impl Default for G2Settings {
    fn default() -> Self {
        G2Settings {
            pairs: vec![(Detector::R1, Detector::T1), (Detector::R1, Detector::R2)],
            bin_width_ns: DEFAULT_BIN_WIDTH_NS,
            max_lag_ns: DEFAULT_MAX_LAG_NS,
        }
    }
}

/// Parses `A:B` (or `AxB`) into a detector pair of distinct
/// detectors.
pub fn parse_pair(text: &str) -> std::result::Result<(Detector, Detector), String> {
    let (a, b) = text
        .split_once([':', 'x'])
        .ok_or_else(|| format!("pair {text:?} must look like R1:T1"))?;
    let a: Detector = a.trim().parse().map_err(|e| format!("{e:?}"))?;
    let b: Detector = b.trim().parse().map_err(|e| format!("{e:?}"))?;
    if a == b {
        return Err(format!(
            "pair {a}:{b} correlates a detector with itself; dead time hides its short-lag coincidences"
        ));
    }
    Ok((a, b))
}

fn parse_detectors(text: &str) -> std::result::Result<Vec<Detector>, String> {
    if text.trim().eq_ignore_ascii_case("none") || text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',')
        .map(|d| d.trim().parse::<Detector>().map_err(|e| format!("{e:?}")))
        .collect()
}

/// Everything a run needs besides file paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub preset: Preset,
    pub scene: SceneConfig,
    pub encoding: EncodingRule,
    pub g2: G2Settings,
    pub tests: TestParams,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::from_entries(&[]).expect("defaults are valid")
    }
}

fn parse_seed(entry: &Entry) -> Result<u64> {
    let v = entry.value.trim();
    let parsed = match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => v.parse::<u64>(),
    };
    parsed.map_err(|e| entry.error(e))
}

impl RunConfig {
    pub fn from_entries(entries: &[Entry]) -> Result<Self> {
        let preset = match entries.iter().rev().find(|e| e.key == "preset") {
            Some(e) => e.parse::<Preset>()?,
            None => Preset::Reference,
        };
        let mut cfg = RunConfig {
            seed: None,
            preset,
            scene: preset.scene(0, DEFAULT_DURATION_NS),
            encoding: EncodingRule::reflection_pair(),
            g2: G2Settings::default(),
            tests: TestParams::default(),
        };
        let mut transmission: Option<(f64, &Entry)> = None;
        let mut sets = [vec![Detector::R1], vec![Detector::R2], vec![Detector::T1]];
        for entry in entries {
            let key = entry.key.as_str();
            let parts: Vec<&str> = key.split('.').collect();
            match parts.as_slice() {
                ["preset"] => {}
                ["seed"] => cfg.seed = Some(parse_seed(entry)?),
                ["duration_ns"] => cfg.scene.duration_ns = entry.parse()?,
                ["reflection_hbt_split"] => cfg.scene.reflection_hbt_split = entry.parse()?,
                ["split", "prob_reflection"] => {
                    cfg.scene.split = SplitParams::new(entry.parse()?).map_err(|e| entry.error(e))?;
                }
                ["split", "prob_transmission"] => transmission = Some((entry.parse()?, entry)),
                ["emitters", "count"] => {
                    let n: usize = entry.parse()?;
                    if n == 0 {
                        return Err(entry.error("a scene needs at least one emitter"));
                    }
                    let last = *cfg.scene.emitters.last().expect("presets have emitters");
                    cfg.scene.emitters.resize(n, last);
                }
                ["emitters", index, field] => {
                    let i: usize = index
                        .parse()
                        .map_err(|_| entry.error("emitter index must be a number"))?;
                    let count = cfg.scene.emitters.len();
                    let e = cfg.scene.emitters.get_mut(i).ok_or_else(|| {
                        entry.error(format!(
                            "emitter {i} does not exist; there are {count} (set emitters.count first)"
                        ))
                    })?;
                    match *field {
                        "lifetime_ns" => e.lifetime_ns = entry.parse()?,
                        "pump_rate_per_ns" => e.pump_rate_per_ns = entry.parse()?,
                        "weight" => e.weight = entry.parse()?,
                        _ => {
                            return Err(
                                entry.error("unknown emitter field; expected lifetime_ns, pump_rate_per_ns or weight")
                            )
                        }
                    }
                }
                ["detectors", which, field] => {
                    let targets: Vec<Detector> = if *which == "all" {
                        Detector::ALL.to_vec()
                    } else {
                        vec![which
                            .parse()
                            .map_err(|_| entry.error("unknown detector; expected R1, R2, T1 or all"))?]
                    };
                    let value: f64 = entry.parse()?;
                    for d in targets {
                        let p: &mut DetectorParams = cfg.scene.detectors.entry(d).or_insert(DetectorParams::IDEAL);
                        match *field {
                            "efficiency" => p.efficiency = value,
                            "dead_time_ns" => p.dead_time_ns = value,
                            "dark_rate_per_ns" => p.dark_rate_per_ns = value,
                            "jitter_sigma_ns" => p.jitter_sigma_ns = value,
                            _ => {
                                return Err(entry.error(
                                    "unknown detector field; expected efficiency, dead_time_ns, dark_rate_per_ns or jitter_sigma_ns",
                                ))
                            }
                        }
                    }
                }
                ["encoding"] => {
                    sets = match entry.value.as_str() {
                        "reflection_pair" => [vec![Detector::R1], vec![Detector::R2], vec![Detector::T1]],
                        "reflection_transmission" => [vec![Detector::R1, Detector::R2], vec![Detector::T1], vec![]],
                        _ => return Err(entry.error("expected reflection_pair or reflection_transmission")),
                    }
                }
                ["encoding", set] => {
                    let slot = match *set {
                        "zero" => 0,
                        "one" => 1,
                        "discard" => 2,
                        _ => return Err(entry.error("expected encoding.zero, encoding.one or encoding.discard")),
                    };
                    let members = parse_detectors(&entry.value).map_err(|e| entry.error(e))?;
                    for (j, other) in sets.iter_mut().enumerate() {
                        if j != slot {
                            other.retain(|d| !members.contains(d));
                        }
                    }
                    sets[slot] = members;
                }
                ["g2", "pairs"] => {
                    cfg.g2.pairs = entry
                        .value
                        .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                        .filter(|s| !s.is_empty())
                        .map(parse_pair)
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|e| entry.error(e))?;
                    if cfg.g2.pairs.is_empty() {
                        return Err(entry.error("at least one pair is needed"));
                    }
                }
                ["g2", "bin_width_ns"] => cfg.g2.bin_width_ns = entry.parse()?,
                ["g2", "max_lag_ns"] => cfg.g2.max_lag_ns = entry.parse()?,
                ["tests", field] => {
                    let t = &mut cfg.tests;
                    match *field {
                        "alpha" => t.alpha = entry.parse()?,
                        "block_frequency_m" => t.block_frequency_m = entry.parse()?,
                        "non_overlapping_m" => t.non_overlapping_m = entry.parse()?,
                        "overlapping_m" => t.overlapping_m = entry.parse()?,
                        "linear_complexity_m" => t.linear_complexity_m = entry.parse()?,
                        "serial_m" => t.serial_m = entry.parse()?,
                        "apen_m" => t.apen_m = entry.parse()?,
                        _ => return Err(entry.error("unknown test parameter")),
                    }
                }
                _ => return Err(entry.error("unknown key")),
            }
        }
        if let Some((t, entry)) = transmission {
            cfg.scene.split =
                SplitParams::from_pair(cfg.scene.split.prob_reflection(), t).map_err(|e| entry.error(e))?;
        }
        cfg.encoding =
            EncodingRule::new(&sets[0], &sets[1], &sets[2]).map_err(|e| Error::validation(format!("encoding: {e}")))?;
        if let Some(seed) = cfg.seed {
            cfg.scene.seed = seed;
        }
        Ok(cfg)
    }

    /// Checks the scene, correlation and test settings.
    pub fn validate(&self) -> Result<()> {
        self.scene
            .validate()
            .map_err(|e| Error::validation(format!("scene: {e}")))?;
        self.validate_g2()?;
        self.tests
            .validate()
            .map_err(|e| Error::validation(format!("tests: {e}")))
    }

    pub fn validate_g2(&self) -> Result<()> {
        let g = &self.g2;
        if !(g.bin_width_ns.is_finite() && g.bin_width_ns > 0.0) {
            return Err(Error::validation(format!(
                "g2.bin_width_ns must be > 0, got {}",
                g.bin_width_ns
            )));
        }
        if !(g.max_lag_ns.is_finite() && g.max_lag_ns >= g.bin_width_ns) {
            return Err(Error::validation(format!(
                "g2.max_lag_ns must be at least g2.bin_width_ns ({}), got {}",
                g.bin_width_ns, g.max_lag_ns
            )));
        }
        Ok(())
    }

    /// The seed, or an error explaining how to supply one.
    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| {
            Error::validation(
                "no seed given; pass --seed N or set `seed = N` in the config file so the run can be reproduced",
            )
        })
    }
}
