use super::Vocabulary;

pub const CONTINUATION_PREFIX: &str = "##";
pub const DEFAULT_MAX_WORD_CHARS: usize = 200;

/// One matched piece: character range inside the word and its vocabulary id.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct PieceMatch {
    pub start: usize,
    pub end: usize,
    pub id: u32,
}

/// Greedy longest-match-first segmentation. `None` means the word maps to
/// `[UNK]` as a whole.
pub(crate) fn segment(word: &[char], vocab: &Vocabulary, max_word_chars: usize) -> Option<Vec<PieceMatch>> {
    if word.is_empty() || word.len() > max_word_chars {
        return None;
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut candidate = String::new();
    while start < word.len() {
        let longest = (word.len() - start).min(vocab.max_piece_chars());
        let mut found = None;
        for end in (start + 1..=start + longest).rev() {
            candidate.clear();
            if start > 0 {
                candidate.push_str(CONTINUATION_PREFIX);
            }
            candidate.extend(&word[start..end]);
            if let Some(id) = vocab.id(&candidate) {
                found = Some(PieceMatch { start, end, id });
                break;
            }
        }
        let piece = found?;
        start = piece.end;
        pieces.push(piece);
    }
    Some(pieces)
}

/// Splits one lowercased word into vocabulary pieces. Non-initial pieces carry
/// the `##` prefix; a word with any unmatched position becomes `[UNK]`.
pub fn wordpiece(word: &str, vocab: &Vocabulary, max_word_chars: usize) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    match segment(&chars, vocab, max_word_chars) {
        Some(pieces) => pieces
            .iter()
            .map(|p| vocab.token(p.id).unwrap_or_default().to_string())
            .collect(),
        None => vec![super::vocab::UNK.to_string()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vocab(extra: &[&str]) -> Vocabulary {
        let mut toks: Vec<String> = super::super::vocab::SPECIAL_TOKENS
            .iter()
            .map(|s| s.to_string())
            .collect();
        toks.extend(extra.iter().map(|s| s.to_string()));
        Vocabulary::from_tokens(toks).unwrap()
    }

    #[test]
    fn her2_splits_into_her_and_2() {
        let v = vocab(&["her", "##2", "h", "##e"]);
        assert_eq!(wordpiece("her2", &v, 200), vec!["her", "##2"]);
    }

    #[test]
    fn whole_word_hit() {
        let v = vocab(&["tumor", "tum", "##or"]);
        assert_eq!(wordpiece("tumor", &v, 200), vec!["tumor"]);
    }

    #[test]
    fn no_match_is_unk() {
        let v = vocab(&["a", "##b"]);
        assert_eq!(wordpiece("qzx", &v, 200), vec!["[UNK]"]);
        // a later position failing also collapses the whole word
        assert_eq!(wordpiece("ac", &v, 200), vec!["[UNK]"]);
    }

    #[test]
    fn overlong_word_is_unk() {
        let v = vocab(&["a", "##a"]);
        assert_eq!(wordpiece("aaaa", &v, 3), vec!["[UNK]"]);
        assert_eq!(wordpiece("aaa", &v, 3), vec!["a", "##a", "##a"]);
    }
}
