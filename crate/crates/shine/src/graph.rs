//! Data model and ingestion for the sentiment, social, and profile networks.
//!
//! All three networks share one node table. Adjacency vectors are materialized
//! lazily and sparsely; dense expansion happens only inside the autoencoder
//! forward pass.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use sha2::{Digest, Sha256};

use crate::error::{Result, ShineError};
use crate::rng::sub_rng;

/// Bijection between external string ids and dense indices 0..|V|-1.
#[derive(Debug, Clone, Default)]
pub struct NodeTable {
    ids: Vec<String>,
    index: HashMap<String, u32>,
}

impl NodeTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, id: &str) -> u32 {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len() as u32;
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<u32> {
        self.index.get(id).copied()
    }

    pub fn external_id(&self, index: u32) -> &str {
        &self.ids[index as usize]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Stable fingerprint of the index → external id mapping.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        for (i, id) in self.ids.iter().enumerate() {
            hasher.update(format!("{i}\t{id}\n"));
        }
        hex(&hasher.finalize())
    }

    pub fn write_sidecar<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, id) in self.ids.iter().enumerate() {
            writeln!(w, "{i}\t{id}")?;
        }
        Ok(())
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Directed signed network; absent pair means s_ij = 0.
#[derive(Debug, Clone, Default)]
pub struct SentimentNetwork {
    out: Vec<BTreeMap<u32, i8>>,
    inc: Vec<BTreeMap<u32, i8>>,
    n_edges: usize,
}

impl SentimentNetwork {
    pub fn with_nodes(n: usize) -> Self {
        Self {
            out: vec![BTreeMap::new(); n],
            inc: vec![BTreeMap::new(); n],
            n_edges: 0,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.out.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn grow(&mut self, n: usize) {
        if n > self.out.len() {
            self.out.resize(n, BTreeMap::new());
            self.inc.resize(n, BTreeMap::new());
        }
    }

    /// Insert or overwrite an edge. Self-loops are rejected.
    pub fn set_sign(&mut self, i: u32, j: u32, s: i8) {
        debug_assert!(i != j && (s == 1 || s == -1));
        let prev = self.out[i as usize].insert(j, s);
        self.inc[j as usize].insert(i, s);
        if prev.is_none() {
            self.n_edges += 1;
        }
    }

    pub fn remove(&mut self, i: u32, j: u32) {
        if self.out[i as usize].remove(&j).is_some() {
            self.inc[j as usize].remove(&i);
            self.n_edges -= 1;
        }
    }

    pub fn sign(&self, i: u32, j: u32) -> i8 {
        self.out
            .get(i as usize)
            .and_then(|m| m.get(&j))
            .copied()
            .unwrap_or(0)
    }

    pub fn out_edges(&self, i: u32) -> impl Iterator<Item = (u32, i8)> + '_ {
        self.out[i as usize].iter().map(|(&j, &s)| (j, s))
    }

    pub fn in_edges(&self, j: u32) -> impl Iterator<Item = (u32, i8)> + '_ {
        self.inc[j as usize].iter().map(|(&i, &s)| (i, s))
    }

    pub fn out_degree(&self, i: u32) -> usize {
        self.out[i as usize].len()
    }

    /// All edges in (src, dst) order.
    pub fn edges(&self) -> Vec<(u32, u32, i8)> {
        let mut v = Vec::with_capacity(self.n_edges);
        for (i, m) in self.out.iter().enumerate() {
            for (&j, &s) in m {
                v.push((i as u32, j, s));
            }
        }
        v
    }
}

/// Directed unweighted follow network.
#[derive(Debug, Clone, Default)]
pub struct SocialNetwork {
    out: Vec<BTreeSet<u32>>,
    inc: Vec<BTreeSet<u32>>,
    n_edges: usize,
}

impl SocialNetwork {
    pub fn with_nodes(n: usize) -> Self {
        Self {
            out: vec![BTreeSet::new(); n],
            inc: vec![BTreeSet::new(); n],
            n_edges: 0,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.out.len()
    }

    pub fn n_edges(&self) -> usize {
        self.n_edges
    }

    pub fn grow(&mut self, n: usize) {
        if n > self.out.len() {
            self.out.resize(n, BTreeSet::new());
            self.inc.resize(n, BTreeSet::new());
        }
    }

    pub fn add(&mut self, i: u32, j: u32) {
        debug_assert!(i != j);
        if self.out[i as usize].insert(j) {
            self.inc[j as usize].insert(i);
            self.n_edges += 1;
        }
    }

    pub fn follows(&self, i: u32, j: u32) -> bool {
        self.out
            .get(i as usize)
            .map(|s| s.contains(&j))
            .unwrap_or(false)
    }

    pub fn out_edges(&self, i: u32) -> impl Iterator<Item = u32> + '_ {
        self.out[i as usize].iter().copied()
    }

    pub fn in_edges(&self, j: u32) -> impl Iterator<Item = u32> + '_ {
        self.inc[j as usize].iter().copied()
    }
}

/// Bipartite user ↔ attribute-value network. The (attribute, value) vocabulary
/// is assigned dense ids in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct ProfileNetwork {
    links: Vec<BTreeSet<u32>>,
    values: Vec<(String, String)>,
    value_index: HashMap<(String, String), u32>,
    single_valued: BTreeSet<String>,
}

impl ProfileNetwork {
    pub fn with_nodes(n: usize) -> Self {
        Self {
            links: vec![BTreeSet::new(); n],
            ..Self::default()
        }
    }

    pub fn n_values(&self) -> usize {
        self.values.len()
    }

    pub fn grow(&mut self, n: usize) {
        if n > self.links.len() {
            self.links.resize(n, BTreeSet::new());
        }
    }

    pub fn mark_single_valued(&mut self, attribute: &str) {
        self.single_valued.insert(attribute.to_string());
    }

    pub fn intern_value(&mut self, attribute: &str, value: &str) -> u32 {
        let key = (attribute.to_string(), value.to_string());
        if let Some(&id) = self.value_index.get(&key) {
            return id;
        }
        let id = self.values.len() as u32;
        self.values.push(key.clone());
        self.value_index.insert(key, id);
        id
    }

    pub fn value(&self, id: u32) -> &(String, String) {
        &self.values[id as usize]
    }

    pub fn add(&mut self, user: u32, value_id: u32) -> Result<()> {
        let attr = &self.values[value_id as usize].0;
        if self.single_valued.contains(attr) {
            let held = self.links[user as usize]
                .iter()
                .any(|&v| &self.values[v as usize].0 == attr && v != value_id);
            if held {
                return Err(ShineError::InvalidConfig(format!(
                    "user {user} holds two values of single-valued attribute '{attr}'"
                )));
            }
        }
        self.links[user as usize].insert(value_id);
        Ok(())
    }

    pub fn values_of(&self, user: u32) -> impl Iterator<Item = u32> + '_ {
        self.links[user as usize].iter().copied()
    }
}

/// Sparse adjacency row consumed by the autoencoders.
///
/// For sentiment/social the layout is `[outgoing row i | incoming column i]`
/// of length 2|V|; for profile it is the user's attribute-value row of
/// length |U|.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyVector {
    pub len: usize,
    /// (position, value), positions strictly increasing.
    pub entries: Vec<(usize, f64)>,
}

impl AdjacencyVector {
    pub fn dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.len];
        for &(p, x) in &self.entries {
            v[p] = x;
        }
        v
    }
}

#[derive(Debug, Clone)]
pub struct HeteroGraph {
    pub nodes: NodeTable,
    pub sentiment: SentimentNetwork,
    pub social: Option<SocialNetwork>,
    pub profile: Option<ProfileNetwork>,
}

impl HeteroGraph {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn check_node(&self, i: u32) -> Result<()> {
        if (i as usize) < self.n_nodes() {
            Ok(())
        } else {
            Err(ShineError::NodeOutOfRange {
                index: i,
                n_nodes: self.n_nodes(),
            })
        }
    }

    /// `x_i`: outgoing signs at positions j, incoming signs at |V|+j.
    pub fn sentiment_adjacency(&self, i: u32) -> Result<AdjacencyVector> {
        self.check_node(i)?;
        let n = self.n_nodes();
        let mut entries: Vec<(usize, f64)> = self
            .sentiment
            .out_edges(i)
            .map(|(j, s)| (j as usize, s as f64))
            .collect();
        entries.extend(
            self.sentiment
                .in_edges(i)
                .map(|(j, s)| (n + j as usize, s as f64)),
        );
        Ok(AdjacencyVector {
            len: 2 * n,
            entries,
        })
    }

    /// `y_i`: same layout as `sentiment_adjacency` with 0/1 values.
    pub fn social_adjacency(&self, i: u32) -> Result<AdjacencyVector> {
        self.check_node(i)?;
        let social = self.social.as_ref().ok_or(ShineError::NoNetworksEnabled)?;
        let n = self.n_nodes();
        let mut entries: Vec<(usize, f64)> =
            social.out_edges(i).map(|j| (j as usize, 1.0)).collect();
        entries.extend(social.in_edges(i).map(|j| (n + j as usize, 1.0)));
        Ok(AdjacencyVector {
            len: 2 * n,
            entries,
        })
    }

    /// `z_i`: the user's attribute-value indicator row of length |U|.
    pub fn profile_adjacency(&self, i: u32) -> Result<AdjacencyVector> {
        self.check_node(i)?;
        let profile = self.profile.as_ref().ok_or(ShineError::ProfileAbsent)?;
        let entries = profile.values_of(i).map(|v| (v as usize, 1.0)).collect();
        Ok(AdjacencyVector {
            len: profile.n_values(),
            entries,
        })
    }

    /// Copy of this graph with the sentiment network replaced by `links`.
    pub fn with_sentiment_links(&self, links: &[(u32, u32, i8)]) -> HeteroGraph {
        let mut sentiment = SentimentNetwork::with_nodes(self.n_nodes());
        for &(i, j, s) in links {
            sentiment.set_sign(i, j, s);
        }
        HeteroGraph {
            nodes: self.nodes.clone(),
            sentiment,
            social: self.social.clone(),
            profile: self.profile.clone(),
        }
    }
}

/// Collapse repeated (src, dst) triples by sign of the value sum; exact ties
/// are dropped.
pub fn aggregate_sentiment_triples(n_nodes: usize, triples: &[(u32, u32, i8)]) -> SentimentNetwork {
    let mut sums: BTreeMap<(u32, u32), i64> = BTreeMap::new();
    for &(i, j, s) in triples {
        *sums.entry((i, j)).or_insert(0) += s as i64;
    }
    let mut net = SentimentNetwork::with_nodes(n_nodes);
    for ((i, j), sum) in sums {
        if sum > 0 {
            net.set_sign(i, j, 1);
        } else if sum < 0 {
            net.set_sign(i, j, -1);
        }
    }
    net
}

fn parse_sign(field: &str) -> Option<i8> {
    match field.trim() {
        "+1" | "1" => Some(1),
        "-1" => Some(-1),
        _ => None,
    }
}

fn read_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    Ok(BufReader::new(File::open(path)?).lines())
}

fn split_fields(line: &str) -> Vec<&str> {
    // Tab-separated per the format; fall back to whitespace for hand-written files.
    if line.contains('\t') {
        line.split('\t').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

/// Load the heterogeneous graph from TSV files.
///
/// Unseen node ids in the social/profile files are appended to the node table
/// with empty sentiment rows. With `aggregate` set, repeated sentiment pairs
/// collapse by sign of the value sum; otherwise a conflicting duplicate is an
/// error.
pub fn load_hetero_graph(
    sentiment_path: &Path,
    social_path: Option<&Path>,
    profile_path: Option<&Path>,
    aggregate: bool,
) -> Result<HeteroGraph> {
    let mut nodes = NodeTable::new();
    let mut triples: Vec<(u32, u32, i8)> = Vec::new();
    let spath = sentiment_path.display().to_string();
    for (lineno, line) in read_lines(sentiment_path)?.enumerate() {
        let line = line?;
        let lineno = lineno + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_fields(trimmed);
        if fields.len() != 3 {
            return Err(ShineError::MalformedLine {
                path: spath.clone(),
                line: lineno,
                reason: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        let sign = parse_sign(fields[2]).ok_or_else(|| ShineError::MalformedLine {
            path: spath.clone(),
            line: lineno,
            reason: format!("sign '{}' not in {{+1, -1}}", fields[2]),
        })?;
        if fields[0] == fields[1] {
            return Err(ShineError::SelfLoop {
                path: spath.clone(),
                line: lineno,
                node: fields[0].to_string(),
            });
        }
        let i = nodes.intern(fields[0]);
        let j = nodes.intern(fields[1]);
        triples.push((i, j, sign));
    }

    let mut social = None;
    if let Some(path) = social_path {
        let mut net = SocialNetwork::with_nodes(nodes.len());
        let pstr = path.display().to_string();
        for (lineno, line) in read_lines(path)?.enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields = split_fields(trimmed);
            if fields.len() != 2 {
                return Err(ShineError::MalformedLine {
                    path: pstr.clone(),
                    line: lineno,
                    reason: format!("expected 2 fields, got {}", fields.len()),
                });
            }
            if fields[0] == fields[1] {
                return Err(ShineError::SelfLoop {
                    path: pstr.clone(),
                    line: lineno,
                    node: fields[0].to_string(),
                });
            }
            let i = nodes.intern(fields[0]);
            let j = nodes.intern(fields[1]);
            net.grow(nodes.len());
            net.add(i, j);
        }
        social = Some(net);
    }

    let mut profile = None;
    if let Some(path) = profile_path {
        let mut net = ProfileNetwork::with_nodes(nodes.len());
        let pstr = path.display().to_string();
        for (lineno, line) in read_lines(path)?.enumerate() {
            let line = line?;
            let lineno = lineno + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields = split_fields(trimmed);
            if fields.len() != 3 {
                return Err(ShineError::MalformedLine {
                    path: pstr.clone(),
                    line: lineno,
                    reason: format!("expected 3 fields, got {}", fields.len()),
                });
            }
            let u = nodes.intern(fields[0]);
            net.grow(nodes.len());
            let v = net.intern_value(fields[1], fields[2]);
            net.add(u, v)?;
        }
        profile = Some(net);
    }

    let n = nodes.len();
    let sentiment = if aggregate {
        aggregate_sentiment_triples(n, &triples)
    } else {
        let mut net = SentimentNetwork::with_nodes(n);
        for &(i, j, s) in &triples {
            let prev = net.sign(i, j);
            if prev != 0 && prev != s {
                return Err(ShineError::ConflictingSign {
                    src: nodes.external_id(i).to_string(),
                    dst: nodes.external_id(j).to_string(),
                });
            }
            net.set_sign(i, j, s);
        }
        net
    };

    let mut g = HeteroGraph {
        nodes,
        sentiment,
        social,
        profile,
    };
    g.sentiment.grow(n);
    if let Some(s) = g.social.as_mut() {
        s.grow(n);
    }
    if let Some(p) = g.profile.as_mut() {
        p.grow(n);
    }
    Ok(g)
}

/// Write sentiment edges back out in the input TSV format.
pub fn write_sentiment_tsv<W: Write>(g: &HeteroGraph, mut w: W) -> Result<()> {
    for (i, j, s) in g.sentiment.edges() {
        writeln!(
            w,
            "{}\t{}\t{}",
            g.nodes.external_id(i),
            g.nodes.external_id(j),
            if s > 0 { "+1" } else { "-1" }
        )?;
    }
    Ok(())
}

/// Hide `test_fraction` of sentiment links; social/profile stay untouched.
///
/// With `balanced`, the test set downsamples the majority sign among hidden
/// links so positive and negative counts match. All hidden links leave the
/// training graph, including those dropped from the balanced test set.
pub fn split_links(
    g: &HeteroGraph,
    test_fraction: f64,
    balanced: bool,
    seed: u64,
) -> Result<(HeteroGraph, Vec<(u32, u32, i8)>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ShineError::InvalidSplit(format!(
            "test_fraction {test_fraction} not in (0, 1)"
        )));
    }
    let mut edges = g.sentiment.edges();
    let mut rng = sub_rng(seed, "split");
    edges.shuffle(&mut rng);
    let n_hidden = ((edges.len() as f64) * test_fraction).round() as usize;
    let (hidden, kept) = edges.split_at(n_hidden);

    let test = if balanced {
        let pos: Vec<_> = hidden.iter().copied().filter(|&(_, _, s)| s > 0).collect();
        let neg: Vec<_> = hidden.iter().copied().filter(|&(_, _, s)| s < 0).collect();
        let k = pos.len().min(neg.len());
        if k == 0 {
            return Err(ShineError::InvalidSplit(
                "hidden set has zero links of some sign; cannot balance".into(),
            ));
        }
        // `hidden` is already in shuffled order, so taking the first k of
        // each sign is a uniform downsample under the seed.
        let mut t: Vec<_> = pos[..k].iter().chain(neg[..k].iter()).copied().collect();
        t.sort_unstable();
        t
    } else {
        let mut t = hidden.to_vec();
        t.sort_unstable();
        t
    };

    Ok((g.with_sentiment_links(kept), test))
}

/// Hold out whole source users: every sentiment link whose source is a
/// selected user moves to the test set, and links pointing at a selected user
/// are dropped from training, so held users have zero sentiment degree there.
/// Social and profile links stay visible.
pub fn cold_start_split(
    g: &HeteroGraph,
    test_fraction: f64,
    seed: u64,
) -> Result<(HeteroGraph, Vec<(u32, u32, i8)>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(ShineError::InvalidSplit(format!(
            "test_fraction {test_fraction} not in (0, 1)"
        )));
    }
    let total = g.sentiment.n_edges();
    let target = ((total as f64) * test_fraction).round() as usize;
    let mut sources: Vec<u32> = (0..g.n_nodes() as u32)
        .filter(|&i| g.sentiment.out_degree(i) > 0)
        .collect();
    let mut rng = sub_rng(seed, "cold_start");
    sources.shuffle(&mut rng);

    let mut test: Vec<(u32, u32, i8)> = Vec::new();
    let mut moved = 0usize;
    for &u in &sources {
        if moved >= target {
            break;
        }
        let deg = g.sentiment.out_degree(u);
        if total - moved - deg == 0 {
            continue; // would empty the training set
        }
        for (j, s) in g.sentiment.out_edges(u) {
            test.push((u, j, s));
        }
        moved += deg;
    }
    if moved < target {
        return Err(ShineError::InvalidSplit(format!(
            "cannot reach test fraction {test_fraction} without emptying the training set"
        )));
    }
    let held: BTreeSet<u32> = test.iter().map(|&(i, _, _)| i).collect();
    let kept: Vec<_> = g
        .sentiment
        .edges()
        .into_iter()
        .filter(|&(i, j, _)| !held.contains(&i) && !held.contains(&j))
        .collect();
    if kept.is_empty() {
        return Err(ShineError::InvalidSplit(
            "cold-start split would empty the training sentiment network".into(),
        ));
    }
    test.sort_unstable();
    Ok((g.with_sentiment_links(&kept), test))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::NamedTempFile;

    fn tsv(content: &str) -> NamedTempFile {
        let mut f = NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn tiny_graph() -> HeteroGraph {
        let s = tsv("a\tb\t+1\nc\ta\t-1\nb\tc\t+1\n");
        load_hetero_graph(s.path(), None, None, false).unwrap()
    }

    #[test]
    fn load_three_line_sentiment() {
        let g = tiny_graph();
        assert_eq!(g.n_nodes(), 3);
        assert_eq!(g.sentiment.n_edges(), 3);
        let a = g.nodes.get("a").unwrap();
        let b = g.nodes.get("b").unwrap();
        assert_eq!(g.sentiment.sign(a, b), 1);
        assert_eq!(g.sentiment.sign(b, a), 0);
    }

    #[test]
    fn self_loop_rejected() {
        let s = tsv("a\ta\t+1\n");
        let err = load_hetero_graph(s.path(), None, None, false).unwrap_err();
        assert!(matches!(err, ShineError::SelfLoop { line: 1, .. }));
    }

    #[test]
    fn bad_sign_reports_line_number() {
        let s = tsv("a\tb\t+1\na\tc\t2\n");
        let err = load_hetero_graph(s.path(), None, None, false).unwrap_err();
        assert!(matches!(err, ShineError::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn conflicting_duplicate_errors_without_aggregate() {
        let s = tsv("a\tb\t+1\na\tb\t-1\n");
        let err = load_hetero_graph(s.path(), None, None, false).unwrap_err();
        assert!(matches!(err, ShineError::ConflictingSign { .. }));
        // and collapses (to a dropped tie) with aggregate on
        let s = tsv("a\tb\t+1\na\tb\t-1\n");
        let g = load_hetero_graph(s.path(), None, None, true).unwrap();
        assert_eq!(g.sentiment.n_edges(), 0);
    }

    #[test]
    fn side_file_users_get_empty_sentiment_rows() {
        let s = tsv("a\tb\t+1\n");
        let p = tsv("z\tgender\tf\n");
        let g = load_hetero_graph(s.path(), None, Some(p.path()), false).unwrap();
        assert_eq!(g.n_nodes(), 3);
        let z = g.nodes.get("z").unwrap();
        assert!(g.sentiment_adjacency(z).unwrap().entries.is_empty());
        assert_eq!(g.profile_adjacency(z).unwrap().entries, vec![(0, 1.0)]);
    }

    #[test]
    fn aggregate_majority_and_tie() {
        let net = aggregate_sentiment_triples(2, &[(0, 1, 1), (0, 1, 1), (0, 1, -1)]);
        assert_eq!(net.sign(0, 1), 1);
        let net = aggregate_sentiment_triples(2, &[(0, 1, 1), (0, 1, -1)]);
        assert_eq!(net.sign(0, 1), 0);
        let net = aggregate_sentiment_triples(2, &[(0, 1, -1)]);
        assert_eq!(net.sign(0, 1), -1);
    }

    #[test]
    fn sentiment_adjacency_layout() {
        // |V|=3 with s_01 = +1 and s_20 = -1.
        let mut net = SentimentNetwork::with_nodes(3);
        net.set_sign(0, 1, 1);
        net.set_sign(2, 0, -1);
        let g = HeteroGraph {
            nodes: {
                let mut t = NodeTable::new();
                for id in ["a", "b", "c"] {
                    t.intern(id);
                }
                t
            },
            sentiment: net,
            social: None,
            profile: None,
        };
        let x0 = g.sentiment_adjacency(0).unwrap();
        assert_eq!(x0.dense(), vec![0.0, 1.0, 0.0, 0.0, 0.0, -1.0]);
        let x1 = g.sentiment_adjacency(1).unwrap();
        assert_eq!(x1.dense(), vec![0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        // isolated orientation check: node 2 has outgoing only
        let x2 = g.sentiment_adjacency(2).unwrap();
        assert_eq!(x2.dense(), vec![-1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(g.sentiment_adjacency(9).is_err());
    }

    #[test]
    fn social_adjacency_layout() {
        let mut t = NodeTable::new();
        t.intern("a");
        t.intern("b");
        let mut net = SocialNetwork::with_nodes(2);
        net.add(0, 1);
        net.add(1, 0);
        let g = HeteroGraph {
            nodes: t,
            sentiment: SentimentNetwork::with_nodes(2),
            social: Some(net),
            profile: None,
        };
        assert_eq!(g.social_adjacency(0).unwrap().dense(), vec![0.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn profile_adjacency_errors_when_absent() {
        let g = tiny_graph();
        assert!(matches!(
            g.profile_adjacency(0),
            Err(ShineError::ProfileAbsent)
        ));
    }

    #[test]
    fn split_is_deterministic_and_partitions_edges() {
        let mut net = SentimentNetwork::with_nodes(12);
        for j in 1..9 {
            net.set_sign(0, j, 1);
        }
        net.set_sign(9, 10, -1);
        net.set_sign(10, 11, -1);
        let mut t = NodeTable::new();
        for i in 0..12 {
            t.intern(&i.to_string());
        }
        let g = HeteroGraph {
            nodes: t,
            sentiment: net,
            social: None,
            profile: None,
        };
        let (train, test) = split_links(&g, 0.5, true, 42).unwrap();
        let (train2, test2) = split_links(&g, 0.5, true, 42).unwrap();
        assert_eq!(test, test2);
        assert_eq!(train.sentiment.edges(), train2.sentiment.edges());
        let n_pos = test.iter().filter(|&&(_, _, s)| s > 0).count();
        let n_neg = test.len() - n_pos;
        assert_eq!(n_pos, n_neg);
        assert!(n_pos <= 2);
        // disjoint partition: train + hidden = original
        assert_eq!(train.sentiment.n_edges(), g.sentiment.n_edges() - 5);
        for &(i, j, _) in &test {
            assert_eq!(train.sentiment.sign(i, j), 0);
        }
    }

    #[test]
    fn cold_start_zeroes_source_rows() {
        let mut net = SentimentNetwork::with_nodes(8);
        for i in 0..4 {
            for j in 4..8 {
                net.set_sign(i, j, if (i + j) % 2 == 0 { 1 } else { -1 });
            }
        }
        let mut t = NodeTable::new();
        for i in 0..8 {
            t.intern(&i.to_string());
        }
        let g = HeteroGraph {
            nodes: t,
            sentiment: net,
            social: None,
            profile: None,
        };
        let (train, test) = cold_start_split(&g, 0.25, 7).unwrap();
        assert!(!test.is_empty());
        for &(i, _, _) in &test {
            assert_eq!(train.sentiment.out_degree(i), 0);
            assert_eq!(train.sentiment.in_edges(i).count(), 0);
        }
        let (_, test2) = cold_start_split(&g, 0.25, 7).unwrap();
        assert_eq!(test, test2);
    }
}
