//! Tokenization and model-input assembly: the combined token + entity
//! sequence with its token types and aligned position ids.
//!
//! Layout of one encoded record (lengths in parentheses):
//!
//! ```text
//! [CLS] s1 tokens (n) [SEP] s2 tokens (m-n) [SEP] | s1 entity slots (n') [SEP] s2 entity slots (m') [SEP]
//! ```
//!
//! Token types are 0 for `[CLS]` + sentence 1 + first `[SEP]`, 1 for
//! sentence 2 + second `[SEP]`, and 2 for the whole entity segment.
//! Token position ids run sequentially; an entity slot reuses the position
//! id of the first token of its span.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::entity_extraction::{EntityAnnotations, EntityType, Span};
use crate::error::{Error, Result};
use crate::kg_store::KgEmbeddingTable;

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const ENT_UNK: &str = "[ENT_UNK]";
pub const RESERVED: [&str; 5] = [CLS, SEP, PAD, UNK, ENT_UNK];

/// Subword continuation marker.
pub const CONTINUATION: &str = "##";

/// Token-string <-> id bijection with the five reserved tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Build from plain tokens; the reserved tokens are prepended.
    pub fn from_tokens(tokens: impl IntoIterator<Item = String>) -> Result<Self> {
        let all = RESERVED
            .iter()
            .map(|s| s.to_string())
            .chain(tokens)
            .collect::<Vec<_>>();
        Self::from_lines(all)
    }

    /// Build from a vocabulary file: one token per line, id = line number.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let lines: Vec<String> = BufReader::new(file).lines().collect::<std::io::Result<_>>()?;
        Self::from_lines(lines)
    }

    fn from_lines(tokens: Vec<String>) -> Result<Self> {
        let mut ids = BTreeMap::new();
        for (id, tok) in tokens.iter().enumerate() {
            if tok.is_empty() {
                return Err(Error::Config(format!("empty vocabulary token at id {id}")));
            }
            if ids.insert(tok.clone(), id).is_some() {
                return Err(Error::Config(format!("duplicate vocabulary token '{tok}'")));
            }
        }
        for reserved in RESERVED {
            if !ids.contains_key(reserved) {
                return Err(Error::Config(format!("vocabulary lacks reserved token {reserved}")));
            }
        }
        Ok(Self { tokens, ids })
    }

    pub fn to_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        for tok in &self.tokens {
            writeln!(out, "{tok}")?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.ids.contains_key(token)
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&str> {
        self.tokens.get(id).map(|s| s.as_str())
    }

    pub fn unk_id(&self) -> usize {
        self.ids[UNK]
    }

    pub fn cls_id(&self) -> usize {
        self.ids[CLS]
    }

    pub fn sep_id(&self) -> usize {
        self.ids[SEP]
    }

    pub fn ent_unk_id(&self) -> usize {
        self.ids[ENT_UNK]
    }
}

/// Greedy longest-prefix subword segmentation over a lowercased,
/// whitespace-normalized sentence. A word with no matchable prefix (or an
/// unmatchable remainder) becomes a single `[UNK]`.
pub fn tokenize(sentence: &str, vocab: &Vocabulary) -> Vec<String> {
    let mut out = Vec::new();
    for word in sentence.to_lowercase().split_whitespace() {
        let mut pieces = Vec::new();
        let chars: Vec<char> = word.chars().collect();
        let mut start = 0;
        while start < chars.len() {
            let mut end = chars.len();
            let mut found = None;
            while end > start {
                let piece: String = chars[start..end].iter().collect();
                let candidate = if start == 0 { piece } else { format!("{CONTINUATION}{piece}") };
                if vocab.contains(&candidate) {
                    found = Some((candidate, end));
                    break;
                }
                end -= 1;
            }
            match found {
                Some((piece, consumed)) => {
                    pieces.push(piece);
                    start = consumed;
                }
                None => {
                    pieces = vec![UNK.to_string()];
                    break;
                }
            }
        }
        out.extend(pieces);
    }
    out
}

/// Where an entity slot's vector comes from at forward time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingSource {
    Graph { graph: String, entity: String },
    Unk,
}

/// One entity slot in the encoded sequence. The span is re-indexed to
/// position coordinates (it includes the `[CLS]` and mid-`[SEP]` offsets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntitySlot {
    pub embedding_source: EmbeddingSource,
    pub etype: EntityType,
    pub span: Span,
    pub sentence: u8,
}

/// Sequence boundary metadata.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeqLayout {
    /// Tokens in sentence 1.
    pub sentence1_tokens: usize,
    /// Tokens in both sentences combined.
    pub total_tokens: usize,
    /// Entity slots kept for sentence 1.
    pub sentence1_entities: usize,
    /// Entity slots kept for sentence 2.
    pub sentence2_entities: usize,
}

/// Role of one index in the full encoded sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    /// A real token (including `[CLS]` and the two token-segment `[SEP]`s).
    Token,
    /// Entity slot, with its index into `entity_slots`.
    Entity(usize),
    /// One of the two entity-segment `[SEP]` markers.
    SegmentSep,
}

/// The full model input for one record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedInput {
    /// `[CLS]` + sentence-1 tokens + `[SEP]` + sentence-2 tokens + `[SEP]`.
    pub token_ids: Vec<usize>,
    pub entity_slots: Vec<EntitySlot>,
    /// Full-sequence index of the `[SEP]` closing the sentence-1 entity run.
    pub sep_after_s1_entities: usize,
    /// Token type per full-sequence index; values in {0, 1, 2}.
    pub token_types: Vec<u8>,
    /// Position id per full-sequence index.
    pub position_ids: Vec<usize>,
    pub layout: SeqLayout,
    /// Entities dropped by the per-sentence slot budget.
    pub truncated_entities: usize,
    /// Entities whose id had no embedding and fell back to `[ENT_UNK]`.
    pub unresolved_entities: usize,
    /// Entities dropped because fallback was disabled.
    pub dropped_entities: usize,
}

impl EncodedInput {
    /// Full sequence length: tokens + entity slots + two segment `[SEP]`s.
    pub fn seq_len(&self) -> usize {
        self.token_ids.len() + self.entity_slots.len() + 2
    }

    /// Role of every full-sequence index, in order.
    pub fn roles(&self) -> Vec<Role> {
        let mut roles = vec![Role::Token; self.token_ids.len()];
        for i in 0..self.layout.sentence1_entities {
            roles.push(Role::Entity(i));
        }
        roles.push(Role::SegmentSep);
        for i in 0..self.layout.sentence2_entities {
            roles.push(Role::Entity(self.layout.sentence1_entities + i));
        }
        roles.push(Role::SegmentSep);
        roles
    }

    /// Recover the two token lists from `token_ids`.
    pub fn decode_tokens(&self, vocab: &Vocabulary) -> Result<(Vec<String>, Vec<String>)> {
        let n = self.layout.sentence1_tokens;
        let m = self.layout.total_tokens;
        let tok = |id: usize| -> Result<String> {
            vocab
                .token(id)
                .map(|s| s.to_string())
                .ok_or_else(|| Error::Encoding(format!("token id {id} is outside the vocabulary")))
        };
        let s1 = self.token_ids[1..=n].iter().map(|&i| tok(i)).collect::<Result<_>>()?;
        let s2 = self.token_ids[n + 2..=m + 1].iter().map(|&i| tok(i)).collect::<Result<_>>()?;
        Ok((s1, s2))
    }
}

/// Knowledge-graph tables bound to each entity type for slot resolution.
#[derive(Debug, Clone, Copy, Default)]
pub struct KgCatalog<'a> {
    pub conceptual: Option<&'a KgEmbeddingTable>,
    pub ambiguous: Option<&'a KgEmbeddingTable>,
}

impl<'a> KgCatalog<'a> {
    fn table_for(&self, etype: EntityType) -> Option<&'a KgEmbeddingTable> {
        match etype {
            EntityType::Conceptual => self.conceptual,
            EntityType::Ambiguous => self.ambiguous,
        }
    }
}

/// Limits and fallback policy for input assembly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EncodeOptions {
    pub max_positions: usize,
    pub max_entity_slots_per_sentence: usize,
    /// Entities with no embedding use the learned `[ENT_UNK]` vector when
    /// true; otherwise they are dropped (and counted).
    pub use_ent_unk: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        Self {
            max_positions: 128,
            max_entity_slots_per_sentence: 16,
            use_ent_unk: true,
        }
    }
}

/// Assemble the full encoded input for one record.
///
/// Annotation spans arrive in combined-token coordinates and leave in
/// position coordinates (`[CLS]` offset for sentence 1, `[CLS]` plus the
/// mid-`[SEP]` for sentence 2). Entity order is preserved. Entities beyond
/// the per-sentence slot budget are truncated, never tokens.
pub fn assemble_input(
    tokens_s1: &[String],
    tokens_s2: &[String],
    annotations: &EntityAnnotations,
    vocab: &Vocabulary,
    catalog: &KgCatalog,
    opts: &EncodeOptions,
) -> Result<EncodedInput> {
    let n = tokens_s1.len();
    let m = n + tokens_s2.len();

    let mut token_ids = Vec::with_capacity(m + 3);
    token_ids.push(vocab.cls_id());
    for tok in tokens_s1 {
        token_ids.push(vocab.id(tok).unwrap_or_else(|| vocab.unk_id()));
    }
    token_ids.push(vocab.sep_id());
    for tok in tokens_s2 {
        token_ids.push(vocab.id(tok).unwrap_or_else(|| vocab.unk_id()));
    }
    token_ids.push(vocab.sep_id());
    if token_ids.len() > opts.max_positions {
        return Err(Error::Encoding(format!(
            "record needs {} token positions, limit is {}",
            token_ids.len(),
            opts.max_positions
        )));
    }

    let mut slots: Vec<EntitySlot> = Vec::new();
    let mut per_sentence = [0usize; 2];
    let mut truncated = 0usize;
    let mut unresolved = 0usize;
    let mut dropped = 0usize;
    for entity in annotations.iter() {
        let (lo, hi) = match entity.sentence {
            1 => (0, n),
            2 => (n, m),
            other => return Err(Error::Encoding(format!("entity names sentence {other}"))),
        };
        if entity.span.start < lo || entity.span.end >= hi || entity.span.start > entity.span.end {
            return Err(Error::Encoding(format!(
                "entity '{}' span [{}, {}] inconsistent with sentence {} token range [{lo}, {hi})",
                entity.surface, entity.span.start, entity.span.end, entity.sentence
            )));
        }
        let sentence_idx = (entity.sentence - 1) as usize;
        if per_sentence[sentence_idx] >= opts.max_entity_slots_per_sentence {
            truncated += 1;
            continue;
        }
        let offset = if entity.sentence == 1 { 1 } else { 2 };
        let span = Span::new(entity.span.start + offset, entity.span.end + offset);
        let source = match catalog.table_for(entity.etype) {
            Some(table) if table.contains(&entity.normalized_id) => EmbeddingSource::Graph {
                graph: table.graph_name().to_string(),
                entity: entity.normalized_id.clone(),
            },
            _ if opts.use_ent_unk => {
                unresolved += 1;
                EmbeddingSource::Unk
            }
            _ => {
                dropped += 1;
                continue;
            }
        };
        per_sentence[sentence_idx] += 1;
        slots.push(EntitySlot {
            embedding_source: source,
            etype: entity.etype,
            span,
            sentence: entity.sentence,
        });
    }

    let layout = SeqLayout {
        sentence1_tokens: n,
        total_tokens: m,
        sentence1_entities: per_sentence[0],
        sentence2_entities: per_sentence[1],
    };

    let mut token_types: Vec<u8> = Vec::with_capacity(m + 3 + slots.len() + 2);
    token_types.extend(std::iter::repeat(0).take(n + 2));
    token_types.extend(std::iter::repeat(1).take(m - n + 1));
    token_types.extend(std::iter::repeat(2).take(slots.len() + 2));

    let last_token_pos = m + 2;
    let mut position_ids: Vec<usize> = (0..=last_token_pos).collect();
    for slot in slots.iter().take(per_sentence[0]) {
        position_ids.push(slot.span.start);
    }
    position_ids.push(last_token_pos);
    for slot in slots.iter().skip(per_sentence[0]) {
        position_ids.push(slot.span.start);
    }
    position_ids.push(last_token_pos);

    Ok(EncodedInput {
        sep_after_s1_entities: (m + 3) + per_sentence[0],
        token_ids,
        entity_slots: slots,
        token_types,
        position_ids,
        layout,
        truncated_entities: truncated,
        unresolved_entities: unresolved,
        dropped_entities: dropped,
    })
}
