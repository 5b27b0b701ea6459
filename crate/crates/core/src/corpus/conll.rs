use std::io::Write;

use super::{split_sentences, token_labels, CorpusError, Document};
use crate::tokenizer::basic_tokenize;

/// Writes word-level BIO as `token<TAB>tag` lines with a blank line after
/// every sentence.
pub fn write_conll<W: Write>(mut w: W, docs: &[Document]) -> Result<(), CorpusError> {
    for doc in docs {
        let words = basic_tokenize(&doc.text);
        let tags = token_labels(doc);
        let chars: Vec<char> = doc.text.chars().collect();
        for (s, e) in split_sentences(&doc.text) {
            let mut any = false;
            for (word, tag) in words.iter().zip(&tags) {
                if word.start >= s && word.end <= e {
                    let surface: String = chars[word.start..word.end].iter().collect();
                    writeln!(w, "{surface}\t{tag}")?;
                    any = true;
                }
            }
            if any {
                writeln!(w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
