use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::ModelError;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NgramConfig {
    pub order: usize,
    pub smoothing_k: f64,
    pub backoff_factor: f64,
    pub seed: u64,
}

impl Default for NgramConfig {
    fn default() -> Self {
        NgramConfig { order: 4, smoothing_k: 0.01, backoff_factor: 0.4, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Continuations {
    total: u64,
    /// Sorted by token id.
    next: Vec<(u32, u64)>,
}

impl Continuations {
    fn count(&self, token: u32) -> u64 {
        self.next
            .binary_search_by_key(&token, |&(t, _)| t)
            .map(|i| self.next[i].1)
            .unwrap_or(0)
    }
}

/// Token n-gram model over lexical tokens.
///
/// Log-probabilities use additive smoothing at the longest context seen in
/// training, a proper distribution over the vocabulary. Generation scores
/// tokens with stupid backoff.
#[derive(Debug, Clone, PartialEq)]
pub struct NgramModel {
    config: NgramConfig,
    /// Sorted; ids index into this. Holds every training token plus EOS and UNK.
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    /// Keyed by context (0..order-1 token ids, BOS allowed).
    contexts: HashMap<Vec<u32>, Continuations>,
    bos: u32,
    eos: u32,
    unk: u32,
    /// Unigram continuation ids ordered by descending count, then id.
    unigram_rank: Vec<u32>,
}

/// On-disk form with deterministic ordering.
#[derive(Serialize, Deserialize)]
struct ModelFile {
    order: usize,
    smoothing_k: f64,
    backoff_factor: f64,
    seed: u64,
    vocab: Vec<String>,
    /// (context, [(next, count)]) sorted by context.
    counts: CountTable,
}

/// (context, [(next, count)]) rows as stored on disk.
type CountTable = Vec<(Vec<u32>, Vec<(u32, u64)>)>;

pub fn train_ngram<S: AsRef<str>>(sequences: &[Vec<S>], config: NgramConfig) -> Result<NgramModel, ModelError> {
    if config.order == 0 {
        return Err(ModelError::InvalidConfig("order must be at least 1".into()));
    }
    if config.smoothing_k.is_nan() || config.smoothing_k <= 0.0 {
        return Err(ModelError::InvalidConfig("smoothing_k must be positive".into()));
    }
    if sequences.iter().all(|s| s.is_empty()) {
        return Err(ModelError::EmptyCorpus);
    }
    let mut words: Vec<&str> = sequences.iter().flatten().map(AsRef::as_ref).collect();
    words.extend([EOS, UNK, BOS]);
    words.sort_unstable();
    words.dedup();
    let vocab: Vec<String> = words.into_iter().map(str::to_owned).collect();
    let ids: HashMap<String, u32> = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
    let bos = ids[BOS];
    let eos = ids[EOS];

    let n = config.order;
    let mut raw: HashMap<Vec<u32>, BTreeMap<u32, u64>> = HashMap::new();
    for seq in sequences.iter().filter(|s| !s.is_empty()) {
        let mut padded: Vec<u32> = vec![bos; n - 1];
        padded.extend(seq.iter().map(|t| ids[t.as_ref()]));
        padded.push(eos);
        for i in (n - 1)..padded.len() {
            for ctx_len in 0..n {
                let ctx = padded[i - ctx_len..i].to_vec();
                *raw.entry(ctx).or_default().entry(padded[i]).or_insert(0) += 1;
            }
        }
    }
    let contexts = raw
        .into_iter()
        .map(|(ctx, next)| {
            let total = next.values().sum();
            (ctx, Continuations { total, next: next.into_iter().collect() })
        })
        .collect();
    Ok(NgramModel::assemble(config, vocab, contexts))
}

impl NgramModel {
    fn assemble(config: NgramConfig, vocab: Vec<String>, contexts: HashMap<Vec<u32>, Continuations>) -> Self {
        let ids: HashMap<String, u32> = vocab.iter().enumerate().map(|(i, w)| (w.clone(), i as u32)).collect();
        let mut unigram_rank: Vec<u32> = contexts
            .get(&Vec::new())
            .map(|c| c.next.iter().map(|&(t, _)| t).collect())
            .unwrap_or_default();
        if let Some(uni) = contexts.get(&Vec::new()) {
            unigram_rank.sort_by(|&a, &b| uni.count(b).cmp(&uni.count(a)).then(a.cmp(&b)));
        }
        NgramModel {
            config,
            bos: ids[BOS],
            eos: ids[EOS],
            unk: ids[UNK],
            ids,
            vocab,
            contexts,
            unigram_rank,
        }
    }

    pub fn config(&self) -> &NgramConfig {
        &self.config
    }

    pub fn order(&self) -> usize {
        self.config.order
    }

    /// Predictable tokens: every training token, EOS and UNK.
    pub fn vocab_size(&self) -> usize {
        self.vocab.len() - 1
    }

    pub fn vocab(&self) -> impl Iterator<Item = &str> {
        self.vocab.iter().map(String::as_str).filter(|&w| w != BOS)
    }

    fn id(&self, token: &str) -> u32 {
        match self.ids.get(token) {
            Some(&id) if id != self.bos => id,
            _ => self.unk,
        }
    }

    fn padded_history(&self, tokens: &[u32]) -> Vec<u32> {
        let mut h = vec![self.bos; self.order() - 1];
        h.extend_from_slice(tokens);
        h
    }

    /// Longest suffix of `history` (at most order-1 tokens) seen as a context.
    fn longest_context<'a>(&'a self, history: &[u32]) -> (&'a [u32], &'a Continuations) {
        let max = (self.order() - 1).min(history.len());
        for len in (0..=max).rev() {
            let ctx = &history[history.len() - len..];
            if let Some((k, c)) = self.contexts.get_key_value(ctx) {
                return (k.as_slice(), c);
            }
        }
        unreachable!("the empty context is always trained")
    }

    fn smoothed(&self, c: &Continuations, token: u32) -> f64 {
        let k = self.config.smoothing_k;
        (c.count(token) as f64 + k) / (c.total as f64 + k * self.vocab_size() as f64)
    }

    /// Probability of `token` after `history` (tokens, unpadded).
    pub fn prob<S: AsRef<str>>(&self, history: &[S], token: &str) -> f64 {
        let ids: Vec<u32> = history.iter().map(|t| self.id(t.as_ref())).collect();
        let h = self.padded_history(&ids);
        let (_, c) = self.longest_context(&h);
        self.smoothed(c, self.id(token))
    }

    /// Natural-log probability of each token given everything before it.
    pub fn logprobs<S: AsRef<str>>(&self, tokens: &[S]) -> Result<Vec<f64>, ModelError> {
        if tokens.is_empty() {
            return Err(ModelError::EmptySequence);
        }
        let ids: Vec<u32> = tokens.iter().map(|t| self.id(t.as_ref())).collect();
        let mut h = self.padded_history(&[]);
        let mut out = Vec::with_capacity(ids.len());
        for &t in &ids {
            let (_, c) = self.longest_context(&h);
            out.push(self.smoothed(c, t).ln());
            h.push(t);
        }
        Ok(out)
    }

    /// Stupid-backoff scores after `history` for every token reachable from
    /// some suffix context; unlisted tokens score 0.
    pub fn backoff_scores<S: AsRef<str>>(&self, history: &[S]) -> Vec<(String, f64)> {
        let ids: Vec<u32> = history.iter().map(|t| self.id(t.as_ref())).collect();
        let h = self.padded_history(&ids);
        let mut scores = self.backoff_ids(&h);
        scores.sort_by_key(|&(t, _)| t);
        scores.into_iter().map(|(t, s)| (self.vocab[t as usize].clone(), s)).collect()
    }

    fn backoff_ids(&self, h: &[u32]) -> Vec<(u32, f64)> {
        let mut seen: HashMap<u32, f64> = HashMap::new();
        let mut scale = 1.0;
        let max = (self.order() - 1).min(h.len());
        for len in (0..=max).rev() {
            if let Some(c) = self.contexts.get(&h[h.len() - len..]) {
                for &(t, n) in &c.next {
                    seen.entry(t).or_insert(scale * n as f64 / c.total as f64);
                }
            }
            scale *= self.config.backoff_factor;
        }
        seen.into_iter().collect()
    }

    /// Greedy choice: highest backoff score, ties to the lexicographically
    /// smallest token.
    fn argmax(&self, h: &[u32]) -> u32 {
        let mut best: Option<(f64, u32)> = None;
        let mut higher: Vec<&Continuations> = Vec::new();
        let mut scale = 1.0;
        let max = (self.order() - 1).min(h.len());
        let consider = |score: f64, t: u32, best: &mut Option<(f64, u32)>| match best {
            Some((s, b)) if score < *s || (score == *s && t > *b) => {}
            _ => *best = Some((score, t)),
        };
        for len in (0..=max).rev() {
            let Some(c) = self.contexts.get(&h[h.len() - len..]) else {
                scale *= self.config.backoff_factor;
                continue;
            };
            if len == 0 {
                // Unigrams cover everything; take the first not already scored above.
                for &t in &self.unigram_rank {
                    if higher.iter().any(|hc| hc.count(t) > 0) {
                        continue;
                    }
                    let s = scale * c.count(t) as f64 / c.total as f64;
                    consider(s, t, &mut best);
                    // Later ranks score no higher; only equal scores can still win ties.
                    if best.is_some_and(|(bs, _)| s < bs) {
                        break;
                    }
                }
            } else {
                for &(t, n) in &c.next {
                    if higher.iter().any(|hc| hc.count(t) > 0) {
                        continue;
                    }
                    consider(scale * n as f64 / c.total as f64, t, &mut best);
                }
            }
            higher.push(c);
            scale *= self.config.backoff_factor;
        }
        best.map(|(_, t)| t).unwrap_or(self.eos)
    }

    fn sample(&self, h: &[u32], temperature: f64, rng: &mut ChaCha8Rng) -> u32 {
        let mut scores = self.backoff_ids(h);
        scores.sort_by_key(|&(t, _)| t);
        let max = scores.iter().map(|&(_, s)| s).fold(0.0f64, f64::max);
        let weights: Vec<f64> = scores.iter().map(|&(_, s)| (s / max).powf(1.0 / temperature)).collect();
        match WeightedIndex::new(&weights) {
            Ok(dist) => scores[dist.sample(rng)].0,
            Err(_) => self.eos,
        }
    }

    /// Continue `prompt` by up to `max_new_tokens` tokens, stopping at end of
    /// sequence. Temperature 0 is greedy; otherwise sampling is seeded.
    pub fn generate<S: AsRef<str>>(
        &self,
        prompt: &[S],
        max_new_tokens: usize,
        temperature: f64,
        seed: u64,
    ) -> Vec<String> {
        let ids: Vec<u32> = prompt.iter().map(|t| self.id(t.as_ref())).collect();
        let mut h = self.padded_history(&ids);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        while out.len() < max_new_tokens {
            let next = if temperature <= 0.0 {
                self.argmax(&h)
            } else {
                self.sample(&h, temperature, &mut rng)
            };
            if next == self.eos || next == self.unk {
                break;
            }
            out.push(self.vocab[next as usize].clone());
            h.push(next);
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut counts: CountTable =
            self.contexts.iter().map(|(k, c)| (k.clone(), c.next.clone())).collect();
        counts.sort();
        let file = ModelFile {
            order: self.config.order,
            smoothing_k: self.config.smoothing_k,
            backoff_factor: self.config.backoff_factor,
            seed: self.config.seed,
            vocab: self.vocab.clone(),
            counts,
        };
        serde_json::to_string(&file).expect("model file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| ModelError::BadModelFile(e.to_string()))?;
        let config = NgramConfig {
            order: file.order,
            smoothing_k: file.smoothing_k,
            backoff_factor: file.backoff_factor,
            seed: file.seed,
        };
        let required = [BOS, EOS, UNK];
        if config.order == 0 || !required.iter().all(|w| file.vocab.iter().any(|v| v == w)) {
            return Err(ModelError::BadModelFile("missing order or sentinel tokens".into()));
        }
        let v = file.vocab.len() as u32;
        let mut contexts = HashMap::new();
        for (ctx, next) in file.counts {
            if ctx.iter().chain(next.iter().map(|(t, _)| t)).any(|&t| t >= v) {
                return Err(ModelError::BadModelFile("token id out of range".into()));
            }
            let total = next.iter().map(|&(_, n)| n).sum();
            contexts.insert(ctx, Continuations { total, next });
        }
        if !contexts.contains_key(&Vec::new()) {
            return Err(ModelError::BadModelFile("no unigram counts".into()));
        }
        Ok(NgramModel::assemble(config, file.vocab, contexts))
    }

    pub fn save(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json()).map_err(|e| ModelError::Io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Io(path.display().to_string(), e))?;
        Self::from_json(&text)
    }
}
