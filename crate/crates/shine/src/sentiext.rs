//! Entity-level sentiment extraction: emoticon weak labeling, a PMI-based
//! sentiment-orientation lexicon, SentiCircle entity scoring, and thresholded
//! signed-edge emission. Inputs arrive pre-tokenized with precomputed
//! dependency edges.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShineError};

/// One pre-processed tweet. `user` is optional; when absent the tweet id
/// doubles as the author id for edge emission.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    #[serde(default)]
    pub user: Option<String>,
    pub tokens: Vec<String>,
    /// (token index, entity id)
    #[serde(default)]
    pub mentions: Vec<(usize, String)>,
    /// undirected dependency edges between token indices
    #[serde(default)]
    pub deps: Vec<(usize, usize)>,
}

impl Tweet {
    pub fn author(&self) -> &str {
        self.user.as_deref().unwrap_or(&self.id)
    }

    fn validate(&self) -> Result<()> {
        let n = self.tokens.len();
        for &(idx, _) in &self.mentions {
            if idx >= n {
                return Err(ShineError::InvalidConfig(format!(
                    "tweet {}: mention token index {idx} out of range",
                    self.id
                )));
            }
        }
        for &(a, b) in &self.deps {
            if a >= n || b >= n {
                return Err(ShineError::InvalidConfig(format!(
                    "tweet {}: dependency edge ({a}, {b}) out of range",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeakLabel {
    Pos,
    Neg,
    None,
}

/// Emoticon → class map; no emoticon may map to both classes.
#[derive(Debug, Clone, Default)]
pub struct EmoticonMap {
    classes: HashMap<String, bool>, // true = positive
}

impl EmoticonMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, emoticon: &str, positive: bool) -> Result<()> {
        if let Some(&prev) = self.classes.get(emoticon) {
            if prev != positive {
                return Err(ShineError::EmoticonConflict(emoticon.to_string()));
            }
            return Ok(());
        }
        self.classes.insert(emoticon.to_string(), positive);
        Ok(())
    }

    /// TSV `emoticon<TAB>pos|neg`.
    pub fn from_reader<R: BufRead>(r: R) -> Result<Self> {
        let mut map = Self::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split('\t');
            let (emo, cls) = match (it.next(), it.next()) {
                (Some(e), Some(c)) => (e, c.trim()),
                _ => {
                    return Err(ShineError::MalformedLine {
                        path: "<emoticon map>".into(),
                        line: lineno + 1,
                        reason: "expected emoticon<TAB>pos|neg".into(),
                    })
                }
            };
            let positive = match cls {
                "pos" => true,
                "neg" => false,
                other => {
                    return Err(ShineError::MalformedLine {
                        path: "<emoticon map>".into(),
                        line: lineno + 1,
                        reason: format!("class '{other}' not pos|neg"),
                    })
                }
            };
            map.insert(emo, positive)?;
        }
        Ok(map)
    }

    pub fn class_of(&self, token: &str) -> Option<bool> {
        self.classes.get(token).copied()
    }
}

/// Pos/neg when all matched emoticons agree on one class; `None` when no
/// emoticon matches or classes conflict.
pub fn weak_label(tweet: &Tweet, map: &EmoticonMap) -> WeakLabel {
    let mut seen: Option<bool> = None;
    for tok in &tweet.tokens {
        if let Some(cls) = map.class_of(tok) {
            match seen {
                None => seen = Some(cls),
                Some(prev) if prev != cls => return WeakLabel::None,
                _ => {}
            }
        }
    }
    match seen {
        Some(true) => WeakLabel::Pos,
        Some(false) => WeakLabel::Neg,
        None => WeakLabel::None,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LexiconMeta {
    pub n_pos_tweets: usize,
    pub n_neg_tweets: usize,
    pub min_freq: usize,
    pub max_freq: usize,
    pub smoothing: f64,
    /// PMI probability space: distinct-word, tweet-level co-occurrence counts.
    pub count_space: String,
    pub max_abs_raw_score: f64,
}

/// Word → normalized sentiment-orientation score in [-1, 1].
#[derive(Debug, Clone)]
pub struct Lexicon {
    pub scores: BTreeMap<String, f64>,
    pub meta: LexiconMeta,
}

impl Lexicon {
    pub fn score(&self, word: &str) -> Option<f64> {
        self.scores.get(word).copied()
    }

    /// JSON metadata header line followed by `word<TAB>score` rows.
    pub fn write<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", serde_json::to_string(&self.meta)?)?;
        for (word, score) in &self.scores {
            writeln!(w, "{word}\t{score:.17}")?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| ShineError::ModelFormat("empty lexicon file".into()))??;
        let meta: LexiconMeta = serde_json::from_str(&header)?;
        let mut scores = BTreeMap::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mut it = trimmed.split('\t');
            match (it.next(), it.next().and_then(|s| s.parse::<f64>().ok())) {
                (Some(word), Some(score)) => {
                    scores.insert(word.to_string(), score);
                }
                _ => {
                    return Err(ShineError::MalformedLine {
                        path: "<lexicon>".into(),
                        line: lineno + 2,
                        reason: "expected word<TAB>score".into(),
                    })
                }
            }
        }
        Ok(Lexicon { scores, meta })
    }
}

/// Build the SO-score lexicon from a weakly labeled corpus.
///
/// Counts are tweet-level and per distinct word. With smoothing k, classes
/// pos/neg of sizes c(pos)/c(neg) and per-class word counts c(w, cls), the raw
/// score reduces to
///
///   SO(w) = ln( (c(w,pos)+k) · c(neg) / ((c(w,neg)+k) · c(pos)) )
///
/// which is PMI(w,pos) − PMI(w,neg) with additive smoothing on the joint
/// counts. Raw scores are divided by the maximum absolute raw score so results
/// lie in [-1, 1]. Only words whose total token occurrence count over the
/// whole corpus lies within [min_freq, max_freq] are kept.
pub fn build_lexicon(
    corpus: &[Tweet],
    map: &EmoticonMap,
    min_freq: usize,
    max_freq: usize,
    smoothing: f64,
) -> Result<Lexicon> {
    let mut occurrences: HashMap<&str, usize> = HashMap::new();
    for tweet in corpus {
        for tok in &tweet.tokens {
            *occurrences.entry(tok).or_insert(0) += 1;
        }
    }

    let mut n_pos = 0usize;
    let mut n_neg = 0usize;
    let mut pos_counts: HashMap<&str, usize> = HashMap::new();
    let mut neg_counts: HashMap<&str, usize> = HashMap::new();
    for tweet in corpus {
        let label = weak_label(tweet, map);
        let counts = match label {
            WeakLabel::Pos => {
                n_pos += 1;
                &mut pos_counts
            }
            WeakLabel::Neg => {
                n_neg += 1;
                &mut neg_counts
            }
            WeakLabel::None => continue,
        };
        let mut seen: Vec<&str> = tweet.tokens.iter().map(String::as_str).collect();
        seen.sort_unstable();
        seen.dedup();
        for tok in seen {
            *counts.entry(tok).or_insert(0) += 1;
        }
    }
    if n_pos == 0 {
        return Err(ShineError::EmptyClass("positive"));
    }
    if n_neg == 0 {
        return Err(ShineError::EmptyClass("negative"));
    }

    let mut raw: BTreeMap<String, f64> = BTreeMap::new();
    let mut vocab: Vec<&str> = pos_counts.keys().chain(neg_counts.keys()).copied().collect();
    vocab.sort_unstable();
    vocab.dedup();
    for word in vocab {
        let freq = occurrences.get(word).copied().unwrap_or(0);
        if freq < min_freq || freq > max_freq {
            continue;
        }
        let cp = pos_counts.get(word).copied().unwrap_or(0) as f64;
        let cn = neg_counts.get(word).copied().unwrap_or(0) as f64;
        let so = ((cp + smoothing) * n_neg as f64 / ((cn + smoothing) * n_pos as f64)).ln();
        raw.insert(word.to_string(), so);
    }

    let max_abs = raw.values().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let scores = if max_abs > 0.0 {
        raw.into_iter().map(|(w, v)| (w, v / max_abs)).collect()
    } else {
        raw
    };
    Ok(Lexicon {
        scores,
        meta: LexiconMeta {
            n_pos_tweets: n_pos,
            n_neg_tweets: n_neg,
            min_freq,
            max_freq,
            smoothing,
            count_space: "tweet-level".into(),
            max_abs_raw_score: max_abs,
        },
    })
}

/// Shortest-path distances from `start` over the undirected dependency graph.
pub fn dependency_distances(n_tokens: usize, deps: &[(usize, usize)], start: usize) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); n_tokens];
    for &(a, b) in deps {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut dist = vec![None; n_tokens];
    dist[start] = Some(0);
    let mut queue = VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// SentiCircle score of a mention: each lexicon term t at finite dependency
/// distance d ≥ 1 contributes the point (r, θ) = (1/d, SO(t)·π); the score is
/// the y-coordinate of the arithmetic mean of the Cartesian points.
///
/// Unreachable terms are skipped (r must stay positive); when no term is
/// scorable the result is `Unscorable` rather than 0, distinguishing absence
/// from neutrality.
pub fn senticircle_score(tweet: &Tweet, mention_idx: usize, lexicon: &Lexicon) -> Result<f64> {
    tweet.validate()?;
    if mention_idx >= tweet.tokens.len() {
        return Err(ShineError::InvalidConfig(format!(
            "mention token index {mention_idx} out of range"
        )));
    }
    let dist = dependency_distances(tweet.tokens.len(), &tweet.deps, mention_idx);
    let mut sum_y = 0.0;
    let mut count = 0usize;
    for (idx, tok) in tweet.tokens.iter().enumerate() {
        if idx == mention_idx {
            continue;
        }
        let d = match dist[idx] {
            Some(d) if d >= 1 => d,
            _ => continue,
        };
        let so = match lexicon.score(tok) {
            Some(s) => s,
            None => continue,
        };
        let r = 1.0 / d as f64;
        let theta = so * std::f64::consts::PI;
        sum_y += r * theta.sin();
        count += 1;
    }
    if count == 0 {
        return Err(ShineError::Unscorable(mention_idx));
    }
    Ok(sum_y / count as f64)
}

/// Emit signed (user, entity, ±1) edges for every scorable mention whose
/// absolute score reaches the threshold (inclusive).
pub fn emit_signed_edges(
    corpus: &[Tweet],
    lexicon: &Lexicon,
    threshold: f64,
) -> Result<Vec<(String, String, i8)>> {
    if !(threshold > 0.0) {
        return Err(ShineError::InvalidConfig("threshold must be > 0".into()));
    }
    let mut edges = Vec::new();
    for tweet in corpus {
        for &(idx, ref entity) in &tweet.mentions {
            let score = match senticircle_score(tweet, idx, lexicon) {
                Ok(s) => s,
                Err(ShineError::Unscorable(_)) => continue,
                Err(e) => return Err(e),
            };
            if score >= threshold {
                edges.push((tweet.author().to_string(), entity.clone(), 1));
            } else if score <= -threshold {
                edges.push((tweet.author().to_string(), entity.clone(), -1));
            }
        }
    }
    Ok(edges)
}

/// Read a JSON-lines corpus, one tweet per line.
pub fn read_corpus<R: BufRead>(r: R) -> Result<Vec<Tweet>> {
    let mut tweets = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let tweet: Tweet = serde_json::from_str(&line).map_err(|e| ShineError::MalformedLine {
            path: "<corpus>".into(),
            line: lineno + 1,
            reason: e.to_string(),
        })?;
        tweet.validate()?;
        tweets.push(tweet);
    }
    Ok(tweets)
}
