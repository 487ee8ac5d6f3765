use crate::{Error, Result};

/// Sentence-aligned bitext: `source[i]` translates to `target[i]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    source: Vec<String>,
    target: Vec<String>,
}

impl ParallelCorpus {
    pub fn new(source: Vec<String>, target: Vec<String>) -> Result<Self> {
        if source.len() != target.len() {
            return Err(Error::LengthMismatch {
                what: "parallel corpus",
                source_len: source.len(),
                target_len: target.len(),
            });
        }
        Ok(ParallelCorpus { source, target })
    }

    pub fn from_pairs<I, S, T>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let (source, target) = pairs.into_iter().map(|(s, t)| (s.into(), t.into())).unzip();
        ParallelCorpus { source, target }
    }

    pub fn len(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source.is_empty()
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }

    pub fn pair(&self, i: usize) -> (&str, &str) {
        (&self.source[i], &self.target[i])
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.source
            .iter()
            .zip(&self.target)
            .map(|(s, t)| (s.as_str(), t.as_str()))
    }

    /// Keeps the first `n` pairs.
    pub fn truncate(&mut self, n: usize) {
        self.source.truncate(n);
        self.target.truncate(n);
    }

    pub fn push(&mut self, source: impl Into<String>, target: impl Into<String>) {
        self.source.push(source.into());
        self.target.push(target.into());
    }

    pub fn extend_from(&mut self, other: &ParallelCorpus) {
        self.source.extend_from_slice(&other.source);
        self.target.extend_from_slice(&other.target);
    }

    /// Returns the pairs reordered so that output pair `k` is input pair
    /// `order[k]`. Both sides move together.
    pub fn permuted(&self, order: &[usize]) -> ParallelCorpus {
        ParallelCorpus {
            source: order.iter().map(|&i| self.source[i].clone()).collect(),
            target: order.iter().map(|&i| self.target[i].clone()).collect(),
        }
    }

    /// Serializes each side as newline-terminated lines.
    pub fn to_texts(&self) -> (String, String) {
        (join_lines(&self.source), join_lines(&self.target))
    }
}

fn join_lines(lines: &[String]) -> String {
    let mut out = String::with_capacity(lines.iter().map(|l| l.len() + 1).sum());
    for line in lines {
        out.push_str(line);
        out.push('\n');
    }
    out
}

fn split_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

/// Pairs up two newline-delimited texts line by line. A trailing final
/// newline does not add an empty pair.
pub fn read_parallel(src_text: &str, trg_text: &str) -> Result<ParallelCorpus> {
    ParallelCorpus::new(split_lines(src_text), split_lines(trg_text))
}
