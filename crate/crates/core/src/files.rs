//! Loading the text file formats from disk. A `poset:` header is resolved
//! relative to the directory of the file that contains it.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{load_kb, EngineError, KnowledgeBase};
use crate::grades::{GeneratorPoset, GradeError};
use crate::kripke::{parse_interpretation, validate_interpretation, Interpretation, ModelError};
use crate::proofs::{parse_proof, proof_header, Proof, ProofError};

#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: missing `poset:` header")]
    MissingPoset { path: String },
    #[error("{path}: {source}")]
    Poset { path: String, source: GradeError },
    #[error("{path}: {source}")]
    Engine { path: String, source: EngineError },
    #[error("{path}: {source}")]
    Proof { path: String, source: ProofError },
    #[error("{path}: {source}")]
    Model { path: String, source: ModelError },
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn read(path: &Path) -> Result<String, FileError> {
    fs::read_to_string(path).map_err(|source| FileError::Io {
        path: display(path),
        source,
    })
}

pub fn load_poset(path: &Path) -> Result<GeneratorPoset, FileError> {
    GeneratorPoset::parse(&read(path)?).map_err(|source| FileError::Poset {
        path: display(path),
        source,
    })
}

/// Resolves the `poset:` header of `text`, found in the file at `path`.
fn resolve_poset(path: &Path, text: &str) -> Result<(PathBuf, GeneratorPoset), FileError> {
    let rel = proof_header(text).ok_or_else(|| FileError::MissingPoset { path: display(path) })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let poset_path = base.join(rel);
    let poset = load_poset(&poset_path)?;
    Ok((poset_path, poset))
}

pub fn load_kb_file(path: &Path) -> Result<(PathBuf, KnowledgeBase), FileError> {
    let text = read(path)?;
    let (poset_path, poset) = resolve_poset(path, &text)?;
    let kb = load_kb(&text, &poset).map_err(|source| FileError::Engine {
        path: display(path),
        source,
    })?;
    Ok((poset_path, kb))
}

pub fn load_proof_file(path: &Path) -> Result<(PathBuf, Proof), FileError> {
    let text = read(path)?;
    let (poset_path, poset) = resolve_poset(path, &text)?;
    let proof = parse_proof(&text, &poset).map_err(|source| FileError::Proof {
        path: display(path),
        source,
    })?;
    Ok((poset_path, proof))
}

/// Reads an interpretation file. The outer result fails on unreadable or
/// malformed files; the inner one reports a well-formed but invalid
/// interpretation.
pub fn load_interpretation_file(
    path: &Path,
) -> Result<(GeneratorPoset, Result<Interpretation, ModelError>), FileError> {
    let text = read(path)?;
    let (_, poset) = resolve_poset(path, &text)?;
    let (_, raw) = parse_interpretation(&text).map_err(|source| FileError::Model {
        path: display(path),
        source,
    })?;
    let interp = validate_interpretation(&raw, &poset);
    Ok((poset, interp))
}
