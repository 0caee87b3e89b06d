//! Entity extraction over two-sentence records: gazetteer n-gram matching
//! for conceptual entities, sense-tag ingestion for ambiguous ones, and the
//! merged per-record annotation set.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::input_encoding::Vocabulary;
use crate::kg_store::{normalize_entity_id, KgEmbeddingTable};

/// Conceptual entities carry a specific concept; ambiguous entities carry a
/// word sense resolved upstream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityType {
    Conceptual,
    Ambiguous,
}

/// Inclusive token index range within the combined (sentence1 + sentence2)
/// token sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false // inclusive ranges always cover at least one token
    }

    pub fn contains(&self, idx: usize) -> bool {
        idx >= self.start && idx <= self.end
    }

    /// True iff `self` lies entirely inside `other` (equality included).
    pub fn is_subrange_of(&self, other: &Span) -> bool {
        self.start >= other.start && self.end <= other.end
    }
}

/// One extracted entity with its span, source sentence, and type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub surface: String,
    /// Lexicon key: for conceptual entities the normalized surface, for
    /// ambiguous entities the sense id.
    pub normalized_id: String,
    pub span: Span,
    /// 1 or 2.
    pub sentence: u8,
    pub etype: EntityType,
    pub sense_id: Option<String>,
}

impl Entity {
    fn check(&self) -> Result<()> {
        match (self.etype, &self.sense_id) {
            (EntityType::Ambiguous, None) => Err(Error::Annotation(format!(
                "ambiguous entity '{}' lacks a sense id",
                self.surface
            ))),
            (EntityType::Conceptual, Some(_)) => Err(Error::Annotation(format!(
                "conceptual entity '{}' must not carry a sense id",
                self.surface
            ))),
            _ => Ok(()),
        }
    }
}

/// The ordered entity set of one record: sentence-1 entities first, then
/// sentence-2 entities, each sentence ordered by span start.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EntityAnnotations {
    entities: Vec<Entity>,
}

impl EntityAnnotations {
    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entities.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Entity> {
        self.entities.iter()
    }
}

/// An upstream word-sense tag: (sentence, sentence-local span, sense id).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SenseTag {
    pub sentence: u8,
    /// Inclusive token range within the tagged sentence's own tokens.
    pub span: Span,
    pub sense_id: String,
}

/// Result of ambiguous-entity ingestion; tags whose sense id is missing
/// from the sense lexicon are dropped and counted.
#[derive(Debug, Clone, Default)]
pub struct AmbiguousExtraction {
    pub entities: Vec<Entity>,
    pub dropped_unknown_senses: usize,
}

/// Extract conceptual entities by n-gram comparison against the lexicon.
///
/// A candidate matches when its normalized surface is a lexicon key and it
/// is out-of-vocabulary for the model: multi-token, or a single token absent
/// from `model_vocab`. Matching is greedy longest-first then leftmost, and
/// no sub-span of a matched span is matched again.
pub fn extract_conceptual(
    tokens_s1: &[String],
    tokens_s2: &[String],
    lexicon: &KgEmbeddingTable,
    model_vocab: &Vocabulary,
    max_ngram: usize,
) -> Vec<Entity> {
    assert!(max_ngram >= 1, "max_ngram must be at least 1");
    let mut out = Vec::new();
    for (sentence, tokens, offset) in [
        (1u8, tokens_s1, 0usize),
        (2u8, tokens_s2, tokens_s1.len()),
    ] {
        let mut accepted: Vec<Span> = Vec::new();
        for len in (1..=max_ngram.min(tokens.len().max(1))).rev() {
            if len > tokens.len() {
                continue;
            }
            for start in 0..=(tokens.len() - len) {
                let span = Span::new(start, start + len - 1);
                if accepted.iter().any(|a| span.is_subrange_of(a)) {
                    continue;
                }
                let surface = tokens[start..=span.end].join(" ");
                let key = normalize_entity_id(&surface);
                if !lexicon.contains(&key) {
                    continue;
                }
                if len == 1 && model_vocab.contains(&tokens[start]) {
                    continue; // in-vocabulary single tokens stay plain tokens
                }
                accepted.push(span);
                out.push(Entity {
                    surface,
                    normalized_id: key,
                    span: Span::new(offset + span.start, offset + span.end),
                    sentence,
                    etype: EntityType::Conceptual,
                    sense_id: None,
                });
            }
        }
    }
    out
}

/// Ingest upstream sense tags as ambiguous entities. Spans are
/// sentence-local in the tags and re-based onto the combined sequence here.
pub fn extract_ambiguous(
    tokens_s1: &[String],
    tokens_s2: &[String],
    sense_tags: &[SenseTag],
    sense_lexicon: &KgEmbeddingTable,
) -> Result<AmbiguousExtraction> {
    let mut out = AmbiguousExtraction::default();
    for tag in sense_tags {
        let (tokens, offset) = match tag.sentence {
            1 => (tokens_s1, 0),
            2 => (tokens_s2, tokens_s1.len()),
            other => {
                return Err(Error::Annotation(format!(
                    "sense tag names sentence {other}; records have sentences 1 and 2"
                )))
            }
        };
        if tag.span.end >= tokens.len() || tag.span.start > tag.span.end {
            return Err(Error::Annotation(format!(
                "sense tag '{}' span [{}, {}] out of range for sentence {} ({} tokens)",
                tag.sense_id,
                tag.span.start,
                tag.span.end,
                tag.sentence,
                tokens.len()
            )));
        }
        if !sense_lexicon.contains(&tag.sense_id) {
            out.dropped_unknown_senses += 1;
            continue;
        }
        out.entities.push(Entity {
            surface: tokens[tag.span.start..=tag.span.end].join(" "),
            normalized_id: normalize_entity_id(&tag.sense_id),
            span: Span::new(offset + tag.span.start, offset + tag.span.end),
            sentence: tag.sentence,
            etype: EntityType::Ambiguous,
            sense_id: Some(tag.sense_id.clone()),
        });
    }
    Ok(out)
}

/// Merge conceptual and ambiguous entities into one ordered annotation set.
///
/// Entities of different types may overlap; same-type spans must not nest.
pub fn build_annotations(conceptual: Vec<Entity>, ambiguous: Vec<Entity>) -> Result<EntityAnnotations> {
    let mut entities: Vec<Entity> = conceptual.into_iter().chain(ambiguous).collect();
    for e in &entities {
        e.check()?;
        if !(e.sentence == 1 || e.sentence == 2) {
            return Err(Error::Annotation(format!(
                "entity '{}' names sentence {}",
                e.surface, e.sentence
            )));
        }
    }
    for i in 0..entities.len() {
        for j in 0..entities.len() {
            if i == j || entities[i].etype != entities[j].etype {
                continue;
            }
            if entities[i].span.is_subrange_of(&entities[j].span) {
                return Err(Error::Annotation(format!(
                    "same-type spans nest: '{}' [{}, {}] inside '{}' [{}, {}]",
                    entities[i].surface,
                    entities[i].span.start,
                    entities[i].span.end,
                    entities[j].surface,
                    entities[j].span.start,
                    entities[j].span.end
                )));
            }
        }
    }
    entities.sort_by(|a, b| {
        (a.sentence, a.span.start, a.span.end, a.etype as u8, &a.normalized_id).cmp(&(
            b.sentence,
            b.span.start,
            b.span.end,
            b.etype as u8,
            &b.normalized_id,
        ))
    });
    Ok(EntityAnnotations { entities })
}
