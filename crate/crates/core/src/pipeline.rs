//! End-to-end run: extract → align → compose → mwe-devset.
//!
//! Configured by a flat `key = value` file. Relative paths are resolved
//! against the directory holding the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::aligner::{align_pairs_with, AlignConfig, AlignWeights, MwePair, TaggedBitext};
use crate::composer::{
    compose, default_layout, parse_layout, phrase_units, sentence_units, ComposeMode, LayoutSpec,
};
use crate::corpus_io::{
    parse_conllu, read_file, read_parallel, write_file, write_mwe_lexicon, LexiconEntry,
    ParallelCorpus, TaggedSentence,
};
use crate::evaluation::extract_mwe_devset;
use crate::pattern::{extract_candidates_with, parse_pattern_file, write_candidates};
use crate::{Error, Execution, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub src_tagged: PathBuf,
    pub trg_tagged: PathBuf,
    /// Plain-text sides of the tagged bitext; derived from the tagged
    /// forms when absent.
    pub src_text: Option<PathBuf>,
    pub trg_text: Option<PathBuf>,
    /// Baseline corpus for composition; the tagged bitext's text when absent.
    pub baseline_src: Option<PathBuf>,
    pub baseline_trg: Option<PathBuf>,
    pub src_patterns: PathBuf,
    pub trg_patterns: PathBuf,
    pub dev_src: PathBuf,
    pub dev_trg: PathBuf,
    pub out_dir: PathBuf,
    pub min_freq: usize,
    pub align: AlignConfig,
    pub mode: ComposeMode,
    pub layout: Option<PathBuf>,
    pub limit: Option<usize>,
    pub seed: u64,
}

const KEYS: [&str; 19] = [
    "src_tagged",
    "trg_tagged",
    "src_text",
    "trg_text",
    "baseline_src",
    "baseline_trg",
    "src_patterns",
    "trg_patterns",
    "dev_src",
    "dev_trg",
    "out_dir",
    "min_freq",
    "w_dice",
    "w_sim",
    "threshold",
    "mode",
    "layout",
    "limit",
    "seed",
];

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&read_file(path)?, base)
    }

    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(i + 1, format!("expected `key = value`, got {line:?}"))
            })?;
            let k = k.trim();
            if !KEYS.contains(&k) {
                return Err(Error::parse(i + 1, format!("unknown config key {k:?}")));
            }
            if kv
                .insert(k.to_string(), (i + 1, v.trim().to_string()))
                .is_some()
            {
                return Err(Error::parse(i + 1, format!("duplicate config key {k:?}")));
            }
        }
        let path = |k: &str| kv.get(k).map(|(_, v)| base_dir.join(v));
        let required =
            |k: &str| path(k).ok_or_else(|| Error::Config(format!("missing required key {k:?}")));
        fn num<T: std::str::FromStr>(
            kv: &BTreeMap<String, (usize, String)>,
            k: &str,
        ) -> Result<Option<T>> {
            kv.get(k)
                .map(|(line, v)| {
                    v.parse()
                        .map_err(|_| Error::parse(*line, format!("invalid value {v:?} for {k}")))
                })
                .transpose()
        }
        let defaults = AlignConfig::default();
        let weights = AlignWeights::new(
            num(&kv, "w_dice")?.unwrap_or(defaults.weights.dice()),
            num(&kv, "w_sim")?.unwrap_or(defaults.weights.sim()),
        )?;
        let mode = match kv.get("mode") {
            Some((_, v)) => v.parse()?,
            None => ComposeMode::Sentences,
        };
        Ok(PipelineConfig {
            src_tagged: required("src_tagged")?,
            trg_tagged: required("trg_tagged")?,
            src_text: path("src_text"),
            trg_text: path("trg_text"),
            baseline_src: path("baseline_src"),
            baseline_trg: path("baseline_trg"),
            src_patterns: required("src_patterns")?,
            trg_patterns: required("trg_patterns")?,
            dev_src: required("dev_src")?,
            dev_trg: required("dev_trg")?,
            out_dir: required("out_dir")?,
            min_freq: num(&kv, "min_freq")?.unwrap_or(2),
            align: AlignConfig {
                weights,
                threshold: num(&kv, "threshold")?.unwrap_or(defaults.threshold),
            },
            mode,
            layout: path("layout"),
            limit: num(&kv, "limit")?,
            seed: num(&kv, "seed")?.unwrap_or(1),
        })
    }

    fn inputs(&self) -> Vec<(&'static str, &Path)> {
        let mut v: Vec<(&'static str, &Path)> = vec![
            ("src_tagged", &self.src_tagged),
            ("trg_tagged", &self.trg_tagged),
            ("src_patterns", &self.src_patterns),
            ("trg_patterns", &self.trg_patterns),
            ("dev_src", &self.dev_src),
            ("dev_trg", &self.dev_trg),
        ];
        let optional = [
            ("src_text", &self.src_text),
            ("trg_text", &self.trg_text),
            ("baseline_src", &self.baseline_src),
            ("baseline_trg", &self.baseline_trg),
            ("layout", &self.layout),
        ];
        for (k, p) in optional {
            if let Some(p) = p {
                v.push((k, p));
            }
        }
        v
    }

    /// Checks that every input exists and that paired paths come in pairs.
    pub fn validate(&self) -> Result<()> {
        for (key, path) in self.inputs() {
            if !path.is_file() {
                return Err(Error::Config(format!(
                    "{key}: input {} does not exist",
                    path.display()
                )));
            }
        }
        if self.src_text.is_some() != self.trg_text.is_some() {
            return Err(Error::Config(
                "src_text and trg_text must be given together".into(),
            ));
        }
        if self.baseline_src.is_some() != self.baseline_trg.is_some() {
            return Err(Error::Config(
                "baseline_src and baseline_trg must be given together".into(),
            ));
        }
        if self.min_freq == 0 {
            return Err(Error::Config("min_freq must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.align.threshold) {
            return Err(Error::Config("threshold must be in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub src_candidates: usize,
    pub trg_candidates: usize,
    pub pairs: usize,
    pub composed_lines: usize,
    pub devset_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool_version: String,
    pub generated_unix: u64,
    pub inputs: BTreeMap<String, FileRecord>,
    pub parameters: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, FileRecord>,
    pub counts: Counts,
}

impl Manifest {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }
}

/// Lowercase hex SHA-256.
pub fn content_hash(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub const OUTPUT_FILES: [(&str, &str); 8] = [
    ("src_candidates", "src_candidates.tsv"),
    ("trg_candidates", "trg_candidates.tsv"),
    ("lexicon", "lexicon.tsv"),
    ("composed_src", "composed.src"),
    ("composed_trg", "composed.trg"),
    ("devset_src", "devset.src"),
    ("devset_trg", "devset.trg"),
    ("devset_idx", "devset.idx"),
];

struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
    records: BTreeMap<String, FileRecord>,
}

impl Outputs {
    fn write(&mut self, role: &str, contents: &str) -> Result<()> {
        let name = OUTPUT_FILES
            .iter()
            .find(|(r, _)| *r == role)
            .map(|(_, n)| *n)
            .expect("known output role");
        let path = self.dir.join(name);
        self.written.push(path.clone());
        write_file(&path, contents)?;
        self.records.insert(
            role.to_string(),
            FileRecord {
                path: path.display().to_string(),
                sha256: content_hash(contents.as_bytes()),
            },
        );
        Ok(())
    }

    fn remove_all(&self) {
        for p in &self.written {
            let _ = std::fs::remove_file(p);
        }
        let _ = std::fs::remove_file(self.dir.join("manifest.json"));
    }
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        source: Box::new(e),
    })
}

fn text_of(sentences: &[TaggedSentence]) -> Vec<String> {
    sentences.iter().map(TaggedSentence::text).collect()
}

fn load_parallel(src: &Path, trg: &Path) -> Result<ParallelCorpus> {
    read_parallel(&read_file(src)?, &read_file(trg)?)
}

/// Newline-terminated 0-based indices.
pub fn write_indices(indices: &[usize]) -> String {
    indices.iter().map(|i| format!("{i}\n")).collect()
}

pub fn run_pipeline(config: &PipelineConfig) -> Result<Manifest> {
    run_pipeline_with(config, Execution::default())
}

/// Runs all stages and writes their outputs plus `manifest.json` into the
/// output directory. On failure every file written so far is removed.
pub fn run_pipeline_with(config: &PipelineConfig, exec: Execution) -> Result<Manifest> {
    stage("validate", config.validate())?;
    std::fs::create_dir_all(&config.out_dir).map_err(|e| Error::io(&config.out_dir, e))?;
    let mut outputs = Outputs {
        dir: config.out_dir.clone(),
        written: Vec::new(),
        records: BTreeMap::new(),
    };
    match run_stages(config, exec, &mut outputs) {
        Ok(m) => Ok(m),
        Err(e) => {
            outputs.remove_all();
            Err(e)
        }
    }
}

fn run_stages(config: &PipelineConfig, exec: Execution, outputs: &mut Outputs) -> Result<Manifest> {
    // extract
    let (bitext, src_cands, trg_cands) = stage(
        "extract",
        (|| {
            let src = parse_conllu(&read_file(&config.src_tagged)?)?;
            let trg = parse_conllu(&read_file(&config.trg_tagged)?)?;
            let bitext = TaggedBitext::new(src, trg)?;
            let src_pats = parse_pattern_file(&read_file(&config.src_patterns)?)?;
            let trg_pats = parse_pattern_file(&read_file(&config.trg_patterns)?)?;
            let src_cands =
                extract_candidates_with(&src_pats, &bitext.source, config.min_freq, exec)?;
            let trg_cands =
                extract_candidates_with(&trg_pats, &bitext.target, config.min_freq, exec)?;
            outputs.write("src_candidates", &write_candidates(&src_cands))?;
            outputs.write("trg_candidates", &write_candidates(&trg_cands))?;
            Ok::<_, Error>((bitext, src_cands, trg_cands))
        })(),
    )?;

    // align
    let (parallel, pairs, lexicon) = stage(
        "align",
        (|| {
            let parallel = match (&config.src_text, &config.trg_text) {
                (Some(s), Some(t)) => load_parallel(s, t)?,
                _ => ParallelCorpus::new(text_of(&bitext.source), text_of(&bitext.target))?,
            };
            bitext.check_against(&parallel)?;
            let pairs: Vec<MwePair> =
                align_pairs_with(&src_cands, &trg_cands, &bitext, &config.align, exec)?;
            let lexicon: Vec<LexiconEntry> = pairs.iter().map(MwePair::to_lexicon_entry).collect();
            outputs.write("lexicon", &write_mwe_lexicon(&lexicon))?;
            Ok::<_, Error>((parallel, pairs, lexicon))
        })(),
    )?;

    // compose
    let composed = stage(
        "compose",
        (|| {
            let mut layout: LayoutSpec = match &config.layout {
                Some(p) => LayoutSpec::from_segments(
                    config.mode,
                    parse_layout(&read_file(p)?)?,
                    config.seed,
                ),
                None => default_layout(config.mode),
            };
            layout.seed = config.seed;
            layout.baseline_limit = config.limit;
            let baseline = match (&config.baseline_src, &config.baseline_trg) {
                (Some(s), Some(t)) => load_parallel(s, t)?,
                _ => parallel.clone(),
            };
            let units = match config.mode {
                ComposeMode::Phrases => phrase_units(&lexicon),
                ComposeMode::Sentences => sentence_units(&pairs, &parallel),
            };
            let composed = compose(&baseline, &units, &layout)?;
            let (s, t) = composed.to_texts();
            outputs.write("composed_src", &s)?;
            outputs.write("composed_trg", &t)?;
            Ok::<_, Error>(composed)
        })(),
    )?;

    // mwe-devset
    let devset_size = stage(
        "mwe-devset",
        (|| {
            let dev = load_parallel(&config.dev_src, &config.dev_trg)?;
            let (subset, idx) = extract_mwe_devset(&dev, &lexicon);
            let (s, t) = subset.to_texts();
            outputs.write("devset_src", &s)?;
            outputs.write("devset_trg", &t)?;
            outputs.write("devset_idx", &write_indices(&idx))?;
            Ok::<_, Error>(subset.len())
        })(),
    )?;

    let mut inputs = BTreeMap::new();
    for (key, path) in config.inputs() {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        inputs.insert(
            key.to_string(),
            FileRecord {
                path: path.display().to_string(),
                sha256: content_hash(&bytes),
            },
        );
    }
    let mut parameters = BTreeMap::new();
    parameters.insert("min_freq".to_string(), config.min_freq.to_string());
    parameters.insert(
        "w_dice".to_string(),
        config.align.weights.dice().to_string(),
    );
    parameters.insert("w_sim".to_string(), config.align.weights.sim().to_string());
    parameters.insert("threshold".to_string(), config.align.threshold.to_string());
    parameters.insert("mode".to_string(), config.mode.to_string());
    parameters.insert(
        "limit".to_string(),
        config
            .limit
            .map_or_else(|| "none".to_string(), |l| l.to_string()),
    );
    parameters.insert("seed".to_string(), config.seed.to_string());

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        generated_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        inputs,
        parameters,
        outputs: outputs.records.clone(),
        counts: Counts {
            src_candidates: src_cands.len(),
            trg_candidates: trg_cands.len(),
            pairs: pairs.len(),
            composed_lines: composed.len(),
            devset_size,
        },
    };
    write_file(config.out_dir.join("manifest.json"), manifest.to_json())?;
    Ok(manifest)
}
