//! Knowledge-graph entity embeddings: lexicon IO, a toy translation-based
//! trainer, and PCA dimension reduction.
//!
//! A [`KgEmbeddingTable`] maps normalized entity strings to dense vectors of
//! one fixed dimension. Tables are immutable after construction and safe to
//! share across threads.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::fmt_sig9;

/// Normalize an entity surface string to its table key: lowercase,
/// whitespace collapsed to single spaces, spaces replaced by underscores.
pub fn normalize_entity_id(raw: &str) -> String {
    raw.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
}

/// Entity-string -> dense vector map for one knowledge graph.
#[derive(Debug, Clone, PartialEq)]
pub struct KgEmbeddingTable {
    graph_name: String,
    dim: usize,
    entries: BTreeMap<String, Vec<f64>>,
}

impl KgEmbeddingTable {
    pub fn new(graph_name: impl Into<String>, dim: usize) -> Self {
        Self {
            graph_name: graph_name.into(),
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn graph_name(&self) -> &str {
        &self.graph_name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Insert a vector under a (normalized) entity key.
    pub fn insert(&mut self, entity: &str, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::Dimension(format!(
                "entity '{entity}': got {} components, table dim is {}",
                vector.len(),
                self.dim
            )));
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("entity '{entity}': non-finite component")));
        }
        let key = normalize_entity_id(entity);
        if self.entries.contains_key(&key) {
            return Err(Error::Config(format!("duplicate entity '{key}' in table")));
        }
        self.entries.insert(key, vector);
        Ok(())
    }

    /// Look up a vector by entity string. Missing entities are an absence,
    /// not an error; callers decide the fallback.
    pub fn get(&self, entity: &str) -> Option<&[f64]> {
        self.entries.get(&normalize_entity_id(entity)).map(|v| v.as_slice())
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.get(entity).is_some()
    }

    /// Entities in sorted key order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|k| k.as_str())
    }
}

/// Load a lexicon TSV: one `entity<TAB>v1 v2 ... vD` row per entity.
///
/// The table dimension is `expected_dim` when given, otherwise the dimension
/// of the first row. Rows that disagree produce a dimension error naming the
/// line; malformed rows produce a parse error naming the line.
pub fn load_lexicon(path: impl AsRef<Path>, expected_dim: Option<usize>) -> Result<KgEmbeddingTable> {
    let path = path.as_ref();
    let graph_name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "lexicon".to_string());
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);

    let mut dim = expected_dim;
    let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut cols = line.splitn(2, '\t');
        let entity = cols.next().unwrap_or_default();
        let values = match cols.next() {
            Some(v) => v,
            None => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: "expected `entity<TAB>values`".to_string(),
                })
            }
        };
        if entity.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                msg: "empty entity string".to_string(),
            });
        }
        let mut vector = Vec::new();
        for tok in values.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("non-numeric value '{tok}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value '{tok}'"),
                });
            }
            vector.push(v);
        }
        match dim {
            None => dim = Some(vector.len()),
            Some(d) if d != vector.len() => {
                return Err(Error::Dimension(format!(
                    "line {line_no}: expected {d} components, got {}",
                    vector.len()
                )))
            }
            _ => {}
        }
        rows.push((entity.to_string(), vector));
    }

    let dim = dim.ok_or_else(|| {
        Error::Dimension(format!(
            "empty lexicon '{}' and no expected dimension given",
            path.display()
        ))
    })?;
    let mut table = KgEmbeddingTable::new(graph_name, dim);
    for (line_idx, (entity, vector)) in rows.into_iter().enumerate() {
        table.insert(&entity, vector).map_err(|e| match e {
            Error::Config(msg) => Error::Parse {
                line: line_idx + 1,
                msg,
            },
            other => other,
        })?;
    }
    Ok(table)
}

/// Save a table in the same TSV format, entities in sorted order, values
/// printed with 9 significant digits.
pub fn save_lexicon(table: &KgEmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for (entity, vector) in table.iter() {
        let values: Vec<String> = vector.iter().map(|&v| fmt_sig9(v)).collect();
        writeln!(out, "{entity}\t{}", values.join(" "))?;
    }
    Ok(())
}

/// A small in-memory knowledge graph: entity/relation name lists plus
/// index triples.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ToyKg {
    pub entities: Vec<String>,
    pub relations: Vec<String>,
    /// (head entity index, relation index, tail entity index)
    pub triples: Vec<(usize, usize, usize)>,
}

impl ToyKg {
    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::BTreeSet::new();
        for &(h, r, t) in &self.triples {
            if h >= self.entities.len() || t >= self.entities.len() || r >= self.relations.len() {
                return Err(Error::Config(format!("triple ({h},{r},{t}) index out of range")));
            }
            if !seen.insert((h, r, t)) {
                return Err(Error::Config(format!("duplicate triple ({h},{r},{t})")));
            }
        }
        Ok(())
    }

    /// True iff two entities appear together in some triple (either order).
    pub fn are_neighbors(&self, a: usize, b: usize) -> bool {
        self.triples
            .iter()
            .any(|&(h, _, t)| (h == a && t == b) || (h == b && t == a))
    }
}

/// Hyperparameters for the toy translation-embedding trainer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransEConfig {
    pub dim: usize,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub negatives_per_positive: usize,
    pub seed: u64,
}

impl Default for TransEConfig {
    fn default() -> Self {
        Self {
            dim: 16,
            margin: 1.0,
            learning_rate: 0.05,
            epochs: 500,
            negatives_per_positive: 1,
            seed: 0,
        }
    }
}

impl TransEConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0
            || self.epochs == 0
            || self.negatives_per_positive == 0
            || self.margin <= 0.0
            || self.learning_rate <= 0.0
        {
            return Err(Error::Config("all TransE hyperparameters must be > 0".to_string()));
        }
        Ok(())
    }
}

/// Triple plausibility: the Euclidean norm of `h + r - t`. Zero iff the
/// relation translates the head exactly onto the tail.
pub fn transe_score(h: &[f64], r: &[f64], t: &[f64]) -> Result<f64> {
    if h.len() != r.len() || h.len() != t.len() {
        return Err(Error::Dimension(format!(
            "score vectors disagree: {} / {} / {}",
            h.len(),
            r.len(),
            t.len()
        )));
    }
    let sum_sq: f64 = h
        .iter()
        .zip(r)
        .zip(t)
        .map(|((h, r), t)| {
            let d = h + r - t;
            d * d
        })
        .sum();
    Ok(sum_sq.sqrt())
}

/// Trained entity embeddings plus the per-epoch loss trace and the relation
/// vectors (kept for link-prediction evaluation; never exported to lexicons).
#[derive(Debug, Clone)]
pub struct TransEOutcome {
    pub embeddings: KgEmbeddingTable,
    pub epoch_loss: Vec<f64>,
    relations: Vec<Vec<f64>>,
    entity_vectors: Vec<Vec<f64>>,
}

impl TransEOutcome {
    /// Fraction of training triples whose true tail ranks first among all
    /// entities under the trained score (ties count in the tail's favor).
    pub fn hits_at_one(&self, kg: &ToyKg) -> f64 {
        if kg.triples.is_empty() {
            return 0.0;
        }
        let mut hits = 0usize;
        for &(h, r, t) in &kg.triples {
            let true_score =
                transe_score(&self.entity_vectors[h], &self.relations[r], &self.entity_vectors[t])
                    .expect("trained vectors share one dimension");
            let beaten = (0..kg.entities.len()).any(|cand| {
                cand != t
                    && transe_score(
                        &self.entity_vectors[h],
                        &self.relations[r],
                        &self.entity_vectors[cand],
                    )
                    .expect("trained vectors share one dimension")
                        < true_score
            });
            if !beaten {
                hits += 1;
            }
        }
        hits as f64 / kg.triples.len() as f64
    }
}

/// Train entity embeddings with margin-ranking descent: for each triple,
/// corrupt the head or tail uniformly and descend on
/// `max(0, margin + score(pos) - score(neg))`. Entity vectors are
/// re-normalized to unit length after every epoch. Deterministic per seed.
pub fn train_toy_transe(kg: &ToyKg, cfg: &TransEConfig) -> Result<TransEOutcome> {
    cfg.validate()?;
    kg.validate()?;
    if kg.triples.is_empty() {
        return Err(Error::Config("knowledge graph has no triples".to_string()));
    }
    if kg.entities.len() < 2 {
        return Err(Error::Config("need at least two entities to corrupt triples".to_string()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 6.0 / (cfg.dim as f64).sqrt();
    let mut entities: Vec<Vec<f64>> = (0..kg.entities.len())
        .map(|_| (0..cfg.dim).map(|_| rng.gen_range(-bound..bound)).collect())
        .collect();
    let mut relations: Vec<Vec<f64>> = (0..kg.relations.len())
        .map(|_| (0..cfg.dim).map(|_| rng.gen_range(-bound..bound)).collect())
        .collect();
    for e in entities.iter_mut() {
        normalize(e);
    }
    for r in relations.iter_mut() {
        normalize(r);
    }

    let mut order: Vec<usize> = (0..kg.triples.len()).collect();
    let mut epoch_loss = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut loss_count = 0usize;
        for &ti in &order {
            let (h, r, t) = kg.triples[ti];
            for _ in 0..cfg.negatives_per_positive {
                let corrupt_head = rng.gen_bool(0.5);
                let original = if corrupt_head { h } else { t };
                let replacement = sample_other_entity(&mut rng, kg.entities.len(), original);
                let (nh, nt) = if corrupt_head { (replacement, t) } else { (h, replacement) };

                let pos_diff = diff(&entities[h], &relations[r], &entities[t]);
                let neg_diff = diff(&entities[nh], &relations[r], &entities[nt]);
                let pos = norm(&pos_diff);
                let neg = norm(&neg_diff);
                let hinge = cfg.margin + pos - neg;
                loss_sum += hinge.max(0.0);
                loss_count += 1;
                if hinge <= 0.0 {
                    continue;
                }

                let pos_unit = unit_or_zero(&pos_diff, pos);
                let neg_unit = unit_or_zero(&neg_diff, neg);
                let lr = cfg.learning_rate;
                for i in 0..cfg.dim {
                    // d hinge / d(h,r,t) through the positive score,
                    // and through the negative score with opposite sign.
                    entities[h][i] -= lr * pos_unit[i];
                    entities[t][i] += lr * pos_unit[i];
                    relations[r][i] -= lr * (pos_unit[i] - neg_unit[i]);
                    entities[nh][i] += lr * neg_unit[i];
                    entities[nt][i] -= lr * neg_unit[i];
                }
            }
        }
        for e in entities.iter_mut() {
            normalize(e);
        }
        epoch_loss.push(loss_sum / loss_count.max(1) as f64);
    }

    let mut table = KgEmbeddingTable::new("transe", cfg.dim);
    for (name, vector) in kg.entities.iter().zip(&entities) {
        table.insert(name, vector.clone())?;
    }
    Ok(TransEOutcome {
        embeddings: table,
        epoch_loss,
        relations,
        entity_vectors: entities,
    })
}

fn sample_other_entity(rng: &mut ChaCha8Rng, n: usize, exclude: usize) -> usize {
    let pick = rng.gen_range(0..n - 1);
    if pick >= exclude {
        pick + 1
    } else {
        pick
    }
}

fn diff(h: &[f64], r: &[f64], t: &[f64]) -> Vec<f64> {
    h.iter().zip(r).zip(t).map(|((h, r), t)| h + r - t).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit_or_zero(v: &[f64], n: f64) -> Vec<f64> {
    if n > 0.0 {
        v.iter().map(|x| x / n).collect()
    } else {
        vec![0.0; v.len()]
    }
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
}

/// Project a table onto its top `target_dim` principal components
/// (descending eigenvalue order, mean-centered).
pub fn pca_project(table: &KgEmbeddingTable, target_dim: usize) -> Result<KgEmbeddingTable> {
    let n = table.len();
    if n < 2 {
        return Err(Error::Config(format!(
            "PCA needs at least 2 entries, table has {n}"
        )));
    }
    if target_dim == 0 || target_dim > table.dim().min(n) {
        return Err(Error::Dimension(format!(
            "target_dim {target_dim} must be in 1..=min(dim {}, entries {n})",
            table.dim()
        )));
    }

    let dim = table.dim();
    let mut data = Array2::<f64>::zeros((n, dim));
    let keys: Vec<&str> = table.keys().collect();
    for (i, (_, v)) in table.iter().enumerate() {
        for (j, &x) in v.iter().enumerate() {
            data[[i, j]] = x;
        }
    }
    let mean = data.mean_axis(ndarray::Axis(0)).expect("n >= 2");
    for mut row in data.rows_mut() {
        row -= &mean;
    }
    let cov = data.t().dot(&data) / (n as f64 - 1.0);
    let (eigenvalues, eigenvectors) = symmetric_eigen(&cov);

    // Stable sort by descending eigenvalue; ties keep original axis order.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eigenvalues[b].partial_cmp(&eigenvalues[a]).expect("finite eigenvalues"));
    let mut basis = Array2::<f64>::zeros((dim, target_dim));
    for (out_col, &src_col) in order.iter().take(target_dim).enumerate() {
        let mut col = eigenvectors.column(src_col).to_owned();
        // Sign convention: largest-magnitude component positive.
        let lead = col
            .iter()
            .cloned()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).expect("finite eigenvector"))
            .map(|(_, v)| v)
            .unwrap_or(1.0);
        if lead < 0.0 {
            col.mapv_inplace(|x| -x);
        }
        basis.column_mut(out_col).assign(&col);
    }
    let projected = data.dot(&basis);

    let mut out = KgEmbeddingTable::new(table.graph_name(), target_dim);
    for (i, key) in keys.iter().enumerate() {
        out.insert(key, projected.row(i).to_vec())?;
    }
    Ok(out)
}

/// Eigenvalues and eigenvectors (as columns) of a symmetric matrix via
/// cyclic Jacobi rotations. Matrices here are small; exactness and
/// determinism beat speed.
pub(crate) fn symmetric_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "matrix must be square");
    let mut a = m.clone();
    let mut v = Array2::<f64>::eye(n);
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-14 * frob.max(1.0);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[[p, q]].abs();
            }
        }
        if off < tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[[p, q]].abs() < tol / (n * n) as f64 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * a[[p, q]]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..n).map(|i| a[[i, i]]).collect();
    (eigenvalues, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        use std::io::Write as _;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn load_lexicon_parses_rows() {
        let f = write_temp("greenhouse_effect\t0.1 0.2\nsolar_energy\t0.3 0.4\n");
        let table = load_lexicon(f.path(), None).unwrap();
        assert_eq!(table.dim(), 2);
        assert_eq!(table.len(), 2);
        assert_eq!(table.get("greenhouse effect"), Some(&[0.1, 0.2][..]));
    }

    #[test]
    fn load_lexicon_empty_file() {
        let f = write_temp("");
        let table = load_lexicon(f.path(), Some(4)).unwrap();
        assert_eq!(table.dim(), 4);
        assert!(table.is_empty());
        assert!(matches!(load_lexicon(f.path(), None), Err(Error::Dimension(_))));
    }

    #[test]
    fn load_lexicon_dimension_mismatch_names_line() {
        let f = write_temp("x\t0.1 0.2\ny\t0.1\n");
        match load_lexicon(f.path(), None) {
            Err(Error::Dimension(msg)) => assert!(msg.contains("line 2"), "{msg}"),
            other => panic!("expected dimension error, got {other:?}"),
        }
    }

    #[test]
    fn load_lexicon_rejects_malformed_rows() {
        let f = write_temp("x\t0.1 oops\n");
        match load_lexicon(f.path(), None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("expected parse error, got {other:?}"),
        }
        let f = write_temp("no_tab_here\n");
        assert!(matches!(load_lexicon(f.path(), None), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn save_load_round_trips_bitwise() {
        let mut table = KgEmbeddingTable::new("g", 3);
        table.insert("alpha", vec![0.1, -0.25, 1.0 / 3.0]).unwrap();
        table.insert("beta", vec![1e-9, 2.5e8, -0.0]).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_lexicon(&table, f.path()).unwrap();
        let loaded = load_lexicon(f.path(), None).unwrap();
        // Values carry 9 significant digits, so a second save is identical.
        let f2 = tempfile::NamedTempFile::new().unwrap();
        save_lexicon(&loaded, f2.path()).unwrap();
        assert_eq!(
            std::fs::read(f.path()).unwrap(),
            std::fs::read(f2.path()).unwrap()
        );
    }

    #[test]
    fn normalization_maps_surface_to_key() {
        assert_eq!(normalize_entity_id("Greenhouse  Effect"), "greenhouse_effect");
        assert_eq!(normalize_entity_id(" world war ii "), "world_war_ii");
    }

    #[test]
    fn transe_score_examples() {
        assert_eq!(transe_score(&[1.0, 0.0], &[0.0, 1.0], &[1.0, 1.0]).unwrap(), 0.0);
        let s = transe_score(&[0.0, 0.0], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!((s - 2.0_f64.sqrt()).abs() < 1e-15);
        let s = transe_score(&[2.0, 3.0], &[-1.0, 0.0], &[0.0, 0.0]).unwrap();
        assert!((s - 10.0_f64.sqrt()).abs() < 1e-15);
        assert!(transe_score(&[1.0], &[1.0, 2.0], &[1.0, 2.0]).is_err());
    }

    fn cycle_kg() -> ToyKg {
        ToyKg {
            entities: vec!["a".into(), "b".into(), "c".into()],
            relations: vec!["r".into()],
            triples: vec![(0, 0, 1), (1, 0, 2), (2, 0, 0)],
        }
    }

    /// Two clusters of three entities; each head pairs with exactly one
    /// tail so link prediction has a unique answer.
    pub(crate) fn two_cluster_kg() -> ToyKg {
        ToyKg {
            entities: vec!["x1".into(), "x2".into(), "x3".into(), "y1".into(), "y2".into(), "y3".into()],
            relations: vec!["linked_to".into(), "linked_from".into()],
            triples: vec![
                (0, 0, 3),
                (1, 0, 4),
                (2, 0, 5),
                (3, 1, 0),
                (4, 1, 1),
                (5, 1, 2),
            ],
        }
    }

    #[test]
    fn transe_separates_positive_from_corrupted_on_cycle() {
        let kg = cycle_kg();
        let cfg = TransEConfig {
            dim: 8,
            epochs: 500,
            seed: 11,
            ..TransEConfig::default()
        };
        let out = train_toy_transe(&kg, &cfg).unwrap();
        // Oracle: recompute both means from the trained vectors with a fresh
        // corruption stream, independent of the training loop's bookkeeping.
        let mut rng = ChaCha8Rng::seed_from_u64(999);
        let mut pos_sum = 0.0;
        let mut neg_sum = 0.0;
        let mut count = 0.0;
        for &(h, r, t) in &kg.triples {
            for _ in 0..200 {
                let corrupt_head = rng.gen_bool(0.5);
                let original = if corrupt_head { h } else { t };
                let replacement = sample_other_entity(&mut rng, kg.entities.len(), original);
                let (nh, nt) = if corrupt_head { (replacement, t) } else { (h, replacement) };
                pos_sum += transe_score(&out.entity_vectors[h], &out.relations[r], &out.entity_vectors[t]).unwrap();
                neg_sum += transe_score(&out.entity_vectors[nh], &out.relations[r], &out.entity_vectors[nt]).unwrap();
                count += 1.0;
            }
        }
        assert!(
            pos_sum / count < neg_sum / count,
            "positives should score below corruptions: {} vs {}",
            pos_sum / count,
            neg_sum / count
        );
    }

    #[test]
    fn transe_is_deterministic_per_seed() {
        let kg = cycle_kg();
        let cfg = TransEConfig {
            dim: 8,
            epochs: 50,
            seed: 42,
            ..TransEConfig::default()
        };
        let a = train_toy_transe(&kg, &cfg).unwrap();
        let b = train_toy_transe(&kg, &cfg).unwrap();
        assert_eq!(a.embeddings, b.embeddings);
        assert_eq!(a.epoch_loss, b.epoch_loss);
    }

    #[test]
    fn transe_two_cluster_link_prediction() {
        let kg = two_cluster_kg();
        let cfg = TransEConfig {
            dim: 8,
            epochs: 500,
            seed: 3,
            ..TransEConfig::default()
        };
        let out = train_toy_transe(&kg, &cfg).unwrap();
        assert!(out.hits_at_one(&kg) >= 0.5, "hits@1 = {}", out.hits_at_one(&kg));
    }

    #[test]
    fn transe_rejects_empty_kg() {
        let kg = ToyKg {
            entities: vec!["a".into(), "b".into()],
            relations: vec!["r".into()],
            triples: vec![],
        };
        assert!(matches!(
            train_toy_transe(&kg, &TransEConfig::default()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn transe_loss_non_increasing_over_windows() {
        let kg = two_cluster_kg();
        let cfg = TransEConfig {
            dim: 8,
            epochs: 300,
            seed: 5,
            ..TransEConfig::default()
        };
        let out = train_toy_transe(&kg, &cfg).unwrap();
        let loss = &out.epoch_loss;
        let tolerance = 0.05 * loss[0].max(1e-9);
        for i in 0..loss.len().saturating_sub(50) {
            assert!(
                loss[i + 50] <= loss[i] + tolerance,
                "loss rose over window starting at epoch {i}: {} -> {}",
                loss[i],
                loss[i + 50]
            );
        }
    }

    #[test]
    fn pca_one_dimensional_data_keeps_distances() {
        let mut table = KgEmbeddingTable::new("g", 2);
        table.insert("p1", vec![1.0, 0.0]).unwrap();
        table.insert("p2", vec![2.0, 0.0]).unwrap();
        table.insert("p3", vec![3.0, 0.0]).unwrap();
        let out = pca_project(&table, 1).unwrap();
        let d = |a: &str, b: &str| {
            let va = out.get(a).unwrap();
            let vb = out.get(b).unwrap();
            (va[0] - vb[0]).abs()
        };
        assert!((d("p1", "p2") - 1.0).abs() < 1e-12);
        assert!((d("p1", "p3") - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pca_full_rank_is_an_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut table = KgEmbeddingTable::new("g", 4);
        for i in 0..6 {
            let v: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            table.insert(&format!("e{i}"), v).unwrap();
        }
        let out = pca_project(&table, 4).unwrap();
        let keys: Vec<&str> = table.keys().collect();
        for i in 0..keys.len() {
            for j in (i + 1)..keys.len() {
                let a1 = table.get(keys[i]).unwrap();
                let b1 = table.get(keys[j]).unwrap();
                let a2 = out.get(keys[i]).unwrap();
                let b2 = out.get(keys[j]).unwrap();
                let d1: f64 = a1.iter().zip(b1).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                let d2: f64 = a2.iter().zip(b2).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
                assert!((d1 - d2).abs() < 1e-9, "distance changed: {d1} vs {d2}");
            }
        }
    }

    #[test]
    fn pca_reconstruction_error_matches_discarded_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let mut table = KgEmbeddingTable::new("g", 8);
        for i in 0..10 {
            let v: Vec<f64> = (0..8).map(|_| rng.gen_range(-2.0..2.0)).collect();
            table.insert(&format!("e{i}"), v).unwrap();
        }
        let target = 2;
        let out = pca_project(&table, target).unwrap();

        // Spectrum route: eigenvalues of the sample covariance.
        let n = table.len();
        let dim = table.dim();
        let mut data = Array2::<f64>::zeros((n, dim));
        for (i, (_, v)) in table.iter().enumerate() {
            for (j, &x) in v.iter().enumerate() {
                data[[i, j]] = x;
            }
        }
        let mean = data.mean_axis(ndarray::Axis(0)).unwrap();
        for mut row in data.rows_mut() {
            row -= &mean;
        }
        let cov = data.t().dot(&data) / (n as f64 - 1.0);
        let (mut eigenvalues, _) = symmetric_eigen(&cov);
        eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let discarded: f64 = eigenvalues[target..].iter().sum();

        // Data route: residual variance after projection.
        let total_var = data.iter().map(|x| x * x).sum::<f64>() / (n as f64 - 1.0);
        let kept_var = out
            .iter()
            .map(|(_, v)| v.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            / (n as f64 - 1.0);
        // Projected coordinates are already centered, so kept variance is
        // their second moment; the residual must equal the discarded spectrum.
        assert!(
            ((total_var - kept_var) - discarded).abs() < 1e-6,
            "residual {} vs discarded {}",
            total_var - kept_var,
            discarded
        );
    }

    #[test]
    fn pca_rejects_bad_targets() {
        let mut table = KgEmbeddingTable::new("g", 2);
        table.insert("a", vec![1.0, 0.0]).unwrap();
        assert!(matches!(pca_project(&table, 1), Err(Error::Config(_))));
        table.insert("b", vec![0.0, 1.0]).unwrap();
        assert!(matches!(pca_project(&table, 3), Err(Error::Dimension(_))));
    }

    #[test]
    fn pca_component_variance_is_non_increasing() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for case in 0..5 {
            let dim = 3 + case;
            let mut table = KgEmbeddingTable::new("g", dim);
            for i in 0..(dim + 4) {
                let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-3.0..3.0)).collect();
                table.insert(&format!("e{i}"), v).unwrap();
            }
            let out = pca_project(&table, dim.min(table.len())).unwrap();
            let n = out.len() as f64;
            let mut var = vec![0.0; out.dim()];
            for (_, v) in out.iter() {
                for (j, &x) in v.iter().enumerate() {
                    var[j] += x * x / (n - 1.0);
                }
            }
            for w in var.windows(2) {
                assert!(w[1] <= w[0] + 1e-9, "component variance increased: {var:?}");
            }
        }
    }
}
