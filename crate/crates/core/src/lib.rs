//! Desk-scale knowledge-infused transformer encoder.
//!
//! The pipeline: knowledge-graph embeddings ([`kg_store`]) are attached to
//! entities found in two-sentence records ([`entity_extraction`]), laid out
//! as extra input slots with their own token types and aligned positions
//! ([`input_encoding`]), projected into the encoder's vector space
//! ([`knowledge_projection`]), and wired into attention through a selective
//! mask ([`selective_attention`]). A small trainable encoder ([`encoder`])
//! consumes that input, and [`harness`] runs config-driven experiments over
//! synthetic tasks.

pub mod autodiff;
pub mod encoder;
pub mod entity_extraction;
pub mod error;
pub mod harness;
pub mod input_encoding;
pub mod kg_store;
pub mod knowledge_projection;
pub mod selective_attention;
pub mod util;

pub use error::{Error, Result};
