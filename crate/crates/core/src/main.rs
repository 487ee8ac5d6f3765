use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mwe_mt::aligner::{align_pairs, AlignConfig, AlignWeights, MwePair, TaggedBitext};
use mwe_mt::attention::{
    attention_stats, compare_systems, merge_bpe, render_matrix, RenderFormat, WordAttention,
};
use mwe_mt::composer::{compose, default_layout, parse_layout, ComposeMode, LayoutSpec};
use mwe_mt::corpus_io::{
    parse_conllu, read_attention_jsonl, read_file, read_mwe_lexicon, read_parallel, write_file,
    write_mwe_lexicon, LexiconEntry, ParallelCorpus,
};
use mwe_mt::evaluation::{
    corpus_bleu, extract_mwe_devset, extract_mwe_devset_by_lemma, ngram_diff, render_diff_html,
    tokenize, BleuOptions,
};
use mwe_mt::pattern::{
    extract_candidates, parse_pattern_file, read_candidates, select_candidates, write_candidates,
};
use mwe_mt::pipeline::{run_pipeline, write_indices, PipelineConfig};
use mwe_mt::{Error, Result};

#[derive(Parser)]
#[command(
    name = "mwe-mt",
    version,
    about = "Multi-word expression tooling for machine translation"
)]
struct Cli {
    /// Seed for every shuffle (compose, all).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for data-parallel stages (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract MWE candidates from a CoNLL-U corpus.
    Extract {
        #[arg(long)]
        conllu: PathBuf,
        #[arg(long)]
        patterns: PathBuf,
        #[arg(long, default_value_t = 2)]
        min_freq: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Align source and target candidates into an MWE lexicon.
    Align(AlignArgs),
    /// Mix a baseline corpus with repeated MWE data.
    Compose {
        #[arg(long)]
        mode: ComposeMode,
        /// SRC,TRG
        #[arg(long, value_parser = path_pair)]
        baseline: (PathBuf, PathBuf),
        /// SRC,TRG
        #[arg(long, value_parser = path_pair)]
        mwe: (PathBuf, PathBuf),
        #[arg(long)]
        limit: Option<usize>,
        /// Segment list (`base 0.25` / `mwe 2` per line).
        #[arg(long)]
        layout: Option<PathBuf>,
        /// SRC,TRG
        #[arg(long, value_parser = path_pair)]
        out: (PathBuf, PathBuf),
    },
    /// Keep dev sentences containing lexicon MWEs.
    MweDevset {
        /// SRC,TRG
        #[arg(long, value_parser = path_pair)]
        dev: (PathBuf, PathBuf),
        #[arg(long)]
        lexicon: PathBuf,
        /// SRC,TRG,IDX
        #[arg(long, value_parser = path_triple)]
        out: (PathBuf, PathBuf, PathBuf),
        /// Tagged dev source; switches to lemma matching (needs --cands).
        #[arg(long, requires = "cands")]
        tagged_dev: Option<PathBuf>,
        /// Source candidate dump providing lemma keys for lexicon entries.
        #[arg(long, requires = "tagged_dev")]
        cands: Option<PathBuf>,
    },
    /// Corpus BLEU as JSON.
    Bleu {
        #[arg(long)]
        hyp: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        smooth: bool,
        /// Also write the report here.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Highlight improving and worsening n-grams as HTML.
    Diff {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        new: PathBuf,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        html: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_n: usize,
    },
    /// Attention dump analysis.
    #[command(subcommand)]
    Attn(AttnCommand),
    /// Run extract, align, compose and mwe-devset from a config file.
    All {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long)]
    src_cands: PathBuf,
    #[arg(long)]
    trg_cands: PathBuf,
    #[arg(long)]
    src_tagged: PathBuf,
    #[arg(long)]
    trg_tagged: PathBuf,
    #[arg(long)]
    src_patterns: PathBuf,
    #[arg(long)]
    trg_patterns: PathBuf,
    /// SRC,TRG plain text checked against the tagged corpora.
    #[arg(long, value_parser = path_pair)]
    parallel: Option<(PathBuf, PathBuf)>,
    #[arg(long, default_value_t = 0.7)]
    w_dice: f64,
    #[arg(long, default_value_t = 0.3)]
    w_sim: f64,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum AttnCommand {
    /// Entropy and MWE concentration per record, as JSON.
    Stats {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        json: PathBuf,
    },
    /// Render one record's soft alignment matrix.
    Render {
        #[arg(long)]
        dump: PathBuf,
        #[arg(long)]
        id: String,
        #[arg(long, default_value = "text")]
        format: String,
        #[arg(long)]
        out: PathBuf,
        /// Keep BPE units instead of merging them into words.
        #[arg(long)]
        subwords: bool,
    },
    /// Compare two systems' attention on lexicon MWEs.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        lexicon: PathBuf,
        #[arg(long)]
        tsv: PathBuf,
    },
}

fn path_pair(s: &str) -> std::result::Result<(PathBuf, PathBuf), String> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [a, b] if !a.is_empty() && !b.is_empty() => Ok((a.into(), b.into())),
        _ => Err(format!("expected SRC,TRG, got {s:?}")),
    }
}

fn path_triple(s: &str) -> std::result::Result<(PathBuf, PathBuf, PathBuf), String> {
    match s.split(',').collect::<Vec<_>>().as_slice() {
        [a, b, c] if !a.is_empty() && !b.is_empty() && !c.is_empty() => {
            Ok((a.into(), b.into(), c.into()))
        }
        _ => Err(format!("expected SRC,TRG,IDX, got {s:?}")),
    }
}

fn load_parallel((src, trg): &(PathBuf, PathBuf)) -> Result<ParallelCorpus> {
    read_parallel(&read_file(src)?, &read_file(trg)?)
}

fn write_parallel(corpus: &ParallelCorpus, (src, trg): &(PathBuf, PathBuf)) -> Result<()> {
    let (s, t) = corpus.to_texts();
    write_file(src, s)?;
    write_file(trg, t)
}

fn load_lexicon(path: &Path) -> Result<Vec<LexiconEntry>> {
    read_mwe_lexicon(&read_file(path)?)
}

fn tokenized_lines(path: &Path) -> Result<Vec<Vec<String>>> {
    Ok(read_file(path)?.lines().map(tokenize).collect())
}

fn align(args: &AlignArgs) -> Result<()> {
    let src = parse_conllu(&read_file(&args.src_tagged)?)?;
    let trg = parse_conllu(&read_file(&args.trg_tagged)?)?;
    let bitext = TaggedBitext::new(src, trg)?;
    if let Some(p) = &args.parallel {
        bitext.check_against(&load_parallel(p)?)?;
    }
    let restore = |cands: &Path, patterns: &Path, corpus| -> Result<_> {
        let keep = read_candidates(&read_file(cands)?)?;
        let all = extract_candidates(&parse_pattern_file(&read_file(patterns)?)?, corpus, 1)?;
        Ok(select_candidates(all, &keep))
    };
    let src_cands = restore(&args.src_cands, &args.src_patterns, &bitext.source)?;
    let trg_cands = restore(&args.trg_cands, &args.trg_patterns, &bitext.target)?;
    let config = AlignConfig {
        weights: AlignWeights::new(args.w_dice, args.w_sim)?,
        threshold: args.threshold,
    };
    let pairs = align_pairs(&src_cands, &trg_cands, &bitext, &config)?;
    warn_lengths(&pairs);
    let lexicon: Vec<LexiconEntry> = pairs.iter().map(MwePair::to_lexicon_entry).collect();
    write_file(&args.out, write_mwe_lexicon(&lexicon))
}

fn warn_lengths(pairs: &[MwePair]) {
    for p in pairs.iter().filter(|p| p.length_warning) {
        eprintln!(
            "warning: token counts differ sharply: {:?} -> {:?}",
            p.src.surface_text(),
            p.trg.surface_text()
        );
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed.unwrap_or(1);
    match cli.command {
        Command::Extract {
            conllu,
            patterns,
            min_freq,
            out,
        } => {
            let corpus = parse_conllu(&read_file(&conllu)?)?;
            let patterns = parse_pattern_file(&read_file(&patterns)?)?;
            let cands = extract_candidates(&patterns, &corpus, min_freq)?;
            write_file(&out, write_candidates(&cands))
        }
        Command::Align(args) => align(&args),
        Command::Compose {
            mode,
            baseline,
            mwe,
            limit,
            layout,
            out,
        } => {
            let mut plan: LayoutSpec = match layout {
                Some(p) => LayoutSpec::from_segments(mode, parse_layout(&read_file(&p)?)?, seed),
                None => default_layout(mode),
            };
            plan.seed = seed;
            plan.baseline_limit = limit;
            let composed = compose(&load_parallel(&baseline)?, &load_parallel(&mwe)?, &plan)?;
            write_parallel(&composed, &out)
        }
        Command::MweDevset {
            dev,
            lexicon,
            out,
            tagged_dev,
            cands,
        } => {
            let dev = load_parallel(&dev)?;
            let lexicon = load_lexicon(&lexicon)?;
            let (subset, idx) = match (tagged_dev, cands) {
                (Some(tagged), Some(cands)) => {
                    let tagged = parse_conllu(&read_file(&tagged)?)?;
                    let keys: Vec<Vec<String>> = read_candidates(&read_file(&cands)?)?
                        .into_iter()
                        .filter(|c| lexicon.iter().any(|e| e.src_surface == c.surface_text()))
                        .map(|c| c.lemma_key)
                        .collect();
                    extract_mwe_devset_by_lemma(&dev, &tagged, &keys)?
                }
                _ => extract_mwe_devset(&dev, &lexicon),
            };
            write_parallel(&subset, &(out.0, out.1))?;
            write_file(&out.2, write_indices(&idx))
        }
        Command::Bleu {
            hyp,
            reference,
            smooth,
            json,
        } => {
            let report = corpus_bleu(
                &tokenized_lines(&hyp)?,
                &tokenized_lines(&reference)?,
                BleuOptions { smooth },
            )?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            print!("{text}");
            match json {
                Some(p) => write_file(p, text),
                None => Ok(()),
            }
        }
        Command::Diff {
            base,
            new,
            reference,
            html,
            max_n,
        } => {
            let (b, n, r) = (
                tokenized_lines(&base)?,
                tokenized_lines(&new)?,
                tokenized_lines(&reference)?,
            );
            if b.len() != n.len() || n.len() != r.len() {
                return Err(Error::InvalidArgument(format!(
                    "line counts differ: base {}, new {}, ref {}",
                    b.len(),
                    n.len(),
                    r.len()
                )));
            }
            let diffs = (0..b.len())
                .map(|i| ngram_diff(&b[i], &n[i], &r[i], max_n))
                .collect::<Result<Vec<_>>>()?;
            let improving: usize = diffs.iter().map(|d| d.improving.len()).sum();
            let worsening: usize = diffs.iter().map(|d| d.worsening.len()).sum();
            println!(
                "{} sentences, {improving} improving and {worsening} worsening n-grams",
                diffs.len()
            );
            write_file(&html, render_diff_html(&b, &n, &r, &diffs))
        }
        Command::Attn(cmd) => attn(cmd),
        Command::All { config } => {
            let mut config = PipelineConfig::load(&config)?;
            if let Some(s) = cli.seed {
                config.seed = s;
            }
            let manifest = run_pipeline(&config)?;
            let c = &manifest.counts;
            println!(
                "candidates {}/{}, pairs {}, composed lines {}, devset {}",
                c.src_candidates, c.trg_candidates, c.pairs, c.composed_lines, c.devset_size
            );
            Ok(())
        }
    }
}

fn attn(cmd: AttnCommand) -> Result<()> {
    match cmd {
        AttnCommand::Stats {
            dump,
            lexicon,
            json,
        } => {
            let records = read_attention_jsonl(&read_file(&dump)?)?;
            let stats = attention_stats(&records, &load_lexicon(&lexicon)?)?;
            write_file(
                json,
                serde_json::to_string_pretty(&stats).expect("stats serialize") + "\n",
            )
        }
        AttnCommand::Render {
            dump,
            id,
            format,
            out,
            subwords,
        } => {
            let format: RenderFormat = format.parse()?;
            let records = read_attention_jsonl(&read_file(&dump)?)?;
            let record = records
                .iter()
                .find(|r| r.id == id)
                .ok_or_else(|| Error::InvalidArgument(format!("no record with id {id:?}")))?;
            let wa = if subwords {
                WordAttention::unmerged(record)
            } else {
                merge_bpe(record)?
            };
            write_file(out, render_matrix(&wa, format))
        }
        AttnCommand::Compare { a, b, lexicon, tsv } => {
            let ra = read_attention_jsonl(&read_file(&a)?)?;
            let rb = read_attention_jsonl(&read_file(&b)?)?;
            let cmp = compare_systems(&ra, &rb, &load_lexicon(&lexicon)?)?;
            if cmp.unmatched_ids > 0 {
                eprintln!(
                    "skipped {} record id(s) present in only one dump",
                    cmp.unmatched_ids
                );
            }
            write_file(tsv, cmp.to_tsv())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
