use std::collections::HashMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use super::TokenizerError;

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const MASK: &str = "[MASK]";

pub const SPECIAL_TOKENS: [&str; 5] = [PAD, UNK, CLS, SEP, MASK];

/// Upper bound on replaceable `[unusedN]` slots a vocabulary may carry.
pub const MAX_PLACEHOLDERS: usize = 997;

const BUILTIN_BASE: &str = include_str!("../../data/base_vocab.txt");

/// Returns true for tokens spelled `[unusedN]`.
pub fn is_placeholder(token: &str) -> bool {
    token
        .strip_prefix("[unused")
        .and_then(|rest| rest.strip_suffix(']'))
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

/// Ordered token list; the token id is its position.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
    pad_id: u32,
    unk_id: u32,
    cls_id: u32,
    sep_id: u32,
    mask_id: u32,
    max_piece_chars: usize,
}

impl PartialEq for Vocabulary {
    fn eq(&self, other: &Self) -> bool {
        self.tokens == other.tokens
    }
}

impl Eq for Vocabulary {}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self, TokenizerError> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, tok) in tokens.iter().enumerate() {
            if tok.is_empty() {
                return Err(TokenizerError::EmptyToken { line: i + 1 });
            }
            if let Some(prev) = index.insert(tok.clone(), i as u32) {
                return Err(TokenizerError::DuplicateToken {
                    token: tok.clone(),
                    first_line: prev as usize + 1,
                    second_line: i + 1,
                });
            }
        }
        let special = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| TokenizerError::MissingSpecial(name.to_string()))
        };
        let vocab = Self {
            pad_id: special(PAD)?,
            unk_id: special(UNK)?,
            cls_id: special(CLS)?,
            sep_id: special(SEP)?,
            mask_id: special(MASK)?,
            max_piece_chars: tokens
                .iter()
                .map(|t| t.strip_prefix("##").unwrap_or(t).chars().count())
                .max()
                .unwrap_or(0),
            tokens,
            index,
        };
        let slots = vocab.placeholder_ids().len();
        if slots > MAX_PLACEHOLDERS {
            return Err(TokenizerError::TooManyPlaceholders(slots));
        }
        Ok(vocab)
    }

    pub fn parse(text: &str) -> Result<Self, TokenizerError> {
        Self::from_tokens(text.lines().map(|l| l.trim_end_matches('\r').to_string()).collect())
    }

    /// The stock general-domain vocabulary shipped with the crate.
    pub fn builtin_base() -> Self {
        Self::parse(BUILTIN_BASE).expect("bundled base vocabulary is valid")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn pad_id(&self) -> u32 {
        self.pad_id
    }
    pub fn unk_id(&self) -> u32 {
        self.unk_id
    }
    pub fn cls_id(&self) -> u32 {
        self.cls_id
    }
    pub fn sep_id(&self) -> u32 {
        self.sep_id
    }
    pub fn mask_id(&self) -> u32 {
        self.mask_id
    }

    pub fn is_special_id(&self, id: u32) -> bool {
        [self.pad_id, self.unk_id, self.cls_id, self.sep_id, self.mask_id].contains(&id)
    }

    /// Longest piece length in characters, ignoring the `##` marker.
    pub fn max_piece_chars(&self) -> usize {
        self.max_piece_chars
    }

    /// Ids of the remaining `[unusedN]` slots, ascending.
    pub fn placeholder_ids(&self) -> Vec<u32> {
        self.tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| is_placeholder(t))
            .map(|(i, _)| i as u32)
            .collect()
    }

    /// Hex SHA-256 over the newline-joined token list.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for tok in &self.tokens {
            hasher.update(tok.as_bytes());
            hasher.update(b"\n");
        }
        hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    /// Returns a copy with the given slots overwritten. Callers guarantee the
    /// ids are placeholders and the words are new.
    pub(crate) fn with_replaced(&self, replacements: &[(u32, String)]) -> Result<Self, TokenizerError> {
        let mut tokens = self.tokens.clone();
        for (id, word) in replacements {
            tokens[*id as usize] = word.clone();
        }
        Self::from_tokens(tokens)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TokenizerError> {
        let mut w = BufWriter::new(fs::File::create(path)?);
        for tok in &self.tokens {
            writeln!(w, "{tok}")?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vocabulary, TokenizerError> {
    Vocabulary::parse(&fs::read_to_string(path)?)
}

pub fn save_vocab(vocab: &Vocabulary, path: impl AsRef<Path>) -> Result<(), TokenizerError> {
    vocab.save(path)
}
